//! One-way ANOVA and the two-sample equal-variance t-test, from raw samples or
//! from sufficient statistics.
//!
//! Results carry statistics only. Whether a p-value counts as significant is
//! left to the caller.

use crate::special::{f_inv, f_sf, t_inv, t_sf, DomainError, Probability};
use crate::table;
use serde::{Deserialize, Serialize};

/// Significance level used when none is given.
pub const DEFAULT_ALPHA: f64 = 0.05;

fn domain(function: &'static str, message: impl Into<String>) -> DomainError {
    DomainError::new(function, message)
}

fn check_alpha(function: &'static str, alpha: f64) -> Result<(), DomainError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain(function, format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Size, mean and sample variance of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
}

impl GroupSummary {
    pub fn new(n: usize, mean: f64, variance: f64) -> Result<Self, DomainError> {
        if n < 2 {
            return Err(domain("GroupSummary::new", format!("need n >= 2, got {n}")));
        }
        if !(variance >= 0.0) || !variance.is_finite() || !mean.is_finite() {
            return Err(domain(
                "GroupSummary::new",
                format!("mean and variance must be finite with variance >= 0, got {mean}, {variance}"),
            ));
        }
        Ok(Self { n, mean, variance })
    }

    pub fn from_sample(values: &[f64]) -> Result<Self, DomainError> {
        let n = values.len();
        if n < 2 {
            return Err(domain("GroupSummary::from_sample", format!("need n >= 2, got {n}")));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let variance = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Self::new(n, mean, variance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub ss_between: f64,
    pub ss_within: f64,
    pub ss_total: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub df_total: usize,
    pub ms_between: f64,
    pub ms_within: f64,
    pub f: f64,
    pub p_value: Probability,
    pub f_crit: f64,
    pub alpha: f64,
}

/// ANOVA table from between- and within-group sums of squares for `k` groups
/// totalling `n` observations.
pub fn anova_from_ss(
    ss_between: f64,
    ss_within: f64,
    k: usize,
    n: usize,
    alpha: f64,
) -> Result<AnovaTable, DomainError> {
    const F: &str = "anova_from_ss";
    check_alpha(F, alpha)?;
    if k < 2 {
        return Err(domain(F, format!("need at least 2 groups, got {k}")));
    }
    if n <= k {
        return Err(domain(F, format!("need more observations ({n}) than groups ({k})")));
    }
    if !(ss_between >= 0.0 && ss_within >= 0.0) || !ss_between.is_finite() || !ss_within.is_finite() {
        return Err(domain(F, "sums of squares must be finite and non-negative"));
    }
    if ss_within == 0.0 {
        return Err(domain(F, "within-group variation is zero; F is undefined"));
    }
    let df_between = k - 1;
    let df_within = n - k;
    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;
    let f = ms_between / ms_within;
    Ok(AnovaTable {
        ss_between,
        ss_within,
        ss_total: ss_between + ss_within,
        df_between,
        df_within,
        df_total: n - 1,
        ms_between,
        ms_within,
        f,
        p_value: f_sf(f, df_between as f64, df_within as f64)?,
        f_crit: f_inv(1.0 - alpha, df_between as f64, df_within as f64)?,
        alpha,
    })
}

/// One-way ANOVA over raw samples.
pub fn one_way_anova<S: AsRef<[f64]>>(groups: &[S], alpha: f64) -> Result<AnovaTable, DomainError> {
    const F: &str = "one_way_anova";
    if groups.len() < 2 {
        return Err(domain(F, format!("need at least 2 groups, got {}", groups.len())));
    }
    if let Some(i) = groups.iter().position(|g| g.as_ref().is_empty()) {
        return Err(domain(F, format!("group {i} is empty")));
    }
    let n: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let grand_mean = groups.iter().flat_map(|g| g.as_ref()).sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let g = g.as_ref();
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (mean - grand_mean).powi(2);
        ss_within += g.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    }
    anova_from_ss(ss_between, ss_within, groups.len(), n, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub groups: [GroupSummary; 2],
    pub pooled_variance: f64,
    pub hypothesized_mean_diff: f64,
    pub df: usize,
    pub t_stat: f64,
    /// Upper-tail probability of `|t|`, whatever the sign of `t`.
    pub p_one_tail: Probability,
    pub p_two_tail: Probability,
    pub t_crit_one_tail: f64,
    pub t_crit_two_tail: f64,
    pub alpha: f64,
}

/// Two-sample t-test assuming equal variances.
pub fn t_test_equal_var(
    g1: GroupSummary,
    g2: GroupSummary,
    hypothesized_diff: f64,
    alpha: f64,
) -> Result<TTestResult, DomainError> {
    const F: &str = "t_test_equal_var";
    check_alpha(F, alpha)?;
    for g in [&g1, &g2] {
        GroupSummary::new(g.n, g.mean, g.variance)?;
    }
    let (n1, n2) = (g1.n as f64, g2.n as f64);
    let df = g1.n + g2.n - 2;
    let pooled = ((n1 - 1.0) * g1.variance + (n2 - 1.0) * g2.variance) / df as f64;
    if pooled == 0.0 {
        return Err(domain(F, "pooled variance is zero; t is undefined"));
    }
    let t = (g1.mean - g2.mean - hypothesized_diff) / (pooled * (1.0 / n1 + 1.0 / n2)).sqrt();
    let dff = df as f64;
    let p_one = t_sf(t.abs(), dff)?;
    Ok(TTestResult {
        groups: [g1, g2],
        pooled_variance: pooled,
        hypothesized_mean_diff: hypothesized_diff,
        df,
        t_stat: t,
        p_one_tail: p_one,
        p_two_tail: Probability::clamped(2.0 * p_one.value()),
        t_crit_one_tail: t_inv(1.0 - alpha, dff)?,
        t_crit_two_tail: t_inv(1.0 - alpha / 2.0, dff)?,
        alpha,
    })
}

pub fn t_test_from_samples(
    s1: &[f64],
    s2: &[f64],
    hypothesized_diff: f64,
    alpha: f64,
) -> Result<TTestResult, DomainError> {
    t_test_equal_var(
        GroupSummary::from_sample(s1)?,
        GroupSummary::from_sample(s2)?,
        hypothesized_diff,
        alpha,
    )
}

fn num(x: f64) -> String {
    format!("{x:.7}")
        .trim_end_matches('0')
        .trim_end_matches('.')
        .to_string()
}

impl AnovaTable {
    pub fn to_text(&self) -> String {
        let header = ["Source of Variation", "SS", "Df", "MS", "F", "P-value", "F crit."]
            .map(String::from)
            .to_vec();
        let rows = vec![
            vec![
                "Between Groups".into(),
                num(self.ss_between),
                self.df_between.to_string(),
                num(self.ms_between),
                num(self.f),
                num(self.p_value.value()),
                num(self.f_crit),
            ],
            vec![
                "Within Groups".into(),
                num(self.ss_within),
                self.df_within.to_string(),
                num(self.ms_within),
            ],
            vec!["Total".into(), num(self.ss_total), self.df_total.to_string()],
        ];
        table::render(&header, &rows)
    }

    pub fn to_csv(&self) -> String {
        format!(
            "source,ss,df,ms,f,p_value,f_crit\n\
             between,{},{},{},{},{},{}\n\
             within,{},{},{},,,\n\
             total,{},{},,,,\n",
            self.ss_between,
            self.df_between,
            self.ms_between,
            self.f,
            self.p_value,
            self.f_crit,
            self.ss_within,
            self.df_within,
            self.ms_within,
            self.ss_total,
            self.df_total
        )
    }
}

impl TTestResult {
    pub fn to_text(&self, labels: [&str; 2]) -> String {
        let [g1, g2] = &self.groups;
        let header = vec![String::new(), labels[0].to_string(), labels[1].to_string()];
        let pair = |name: &str, a: String, b: String| vec![name.to_string(), a, b];
        let single = |name: &str, a: String| vec![name.to_string(), a];
        let rows = vec![
            pair("Mean", num(g1.mean), num(g2.mean)),
            pair("Variance", num(g1.variance), num(g2.variance)),
            pair("Observations", g1.n.to_string(), g2.n.to_string()),
            single("Pooled Variance", num(self.pooled_variance)),
            single("Hypothesized Mean Difference", num(self.hypothesized_mean_diff)),
            single("Df", self.df.to_string()),
            single("t Stat", num(self.t_stat)),
            single("P(T<=t) one-tail", num(self.p_one_tail.value())),
            single("t Critical one-tail", num(self.t_crit_one_tail)),
            single("P(T<=t) two-tail", num(self.p_two_tail.value())),
            single("t Critical two-tail", num(self.t_crit_two_tail)),
        ];
        table::render(&header, &rows)
    }

    pub fn to_csv(&self) -> String {
        let [g1, g2] = &self.groups;
        format!(
            "statistic,group_1,group_2\n\
             mean,{},{}\nvariance,{},{}\nobservations,{},{}\n\
             pooled_variance,{},\nhypothesized_mean_difference,{},\ndf,{},\nt_stat,{},\n\
             p_one_tail,{},\nt_critical_one_tail,{},\np_two_tail,{},\nt_critical_two_tail,{},\n",
            g1.mean,
            g2.mean,
            g1.variance,
            g2.variance,
            g1.n,
            g2.n,
            self.pooled_variance,
            self.hypothesized_mean_diff,
            self.df,
            self.t_stat,
            self.p_one_tail,
            self.t_crit_one_tail,
            self.p_two_tail,
            self.t_crit_two_tail
        )
    }
}
