//! Per-group summary statistics (mean, spread, shape) in the layout of a
//! spreadsheet "descriptive statistics" report.

use crate::data::{DataError, Dataset};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DescriptiveError {
    #[error("no values to summarize")]
    EmptyInput,
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Why a statistic could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Absent {
    /// The statistic needs at least `required` values.
    TooFewValues { required: usize },
    /// Every value occurs once, so there is no mode.
    NoRepeatedValue,
}

impl fmt::Display for Absent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Absent::TooFewValues { required } => write!(f, "needs n >= {required}"),
            Absent::NoRepeatedValue => f.write_str("no repeated value"),
        }
    }
}

/// A statistic that may be undefined for the sample at hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stat {
    Value(f64),
    Absent(Absent),
}

impl Stat {
    pub fn value(self) -> Option<f64> {
        match self {
            Stat::Value(v) => Some(v),
            Stat::Absent(_) => None,
        }
    }

    fn requiring(n: usize, required: usize, compute: impl FnOnce() -> f64) -> Stat {
        if n >= required {
            Stat::Value(compute())
        } else {
            Stat::Absent(Absent::TooFewValues { required })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub st_dev: Stat,
    pub median: f64,
    pub mode: Stat,
    pub std_error: Stat,
    /// Bias-corrected excess kurtosis.
    pub kurtosis: Stat,
    /// Bias-corrected skewness.
    pub skewness: Stat,
}

/// Summarizes a sample.
///
/// Skewness is `n/((n-1)(n-2)) Σz³` and excess kurtosis is
/// `n(n+1)/((n-1)(n-2)(n-3)) Σz⁴ - 3(n-1)²/((n-2)(n-3))` with
/// `z = (x - mean)/s`, the conventions of common spreadsheet tools. The mode
/// is the most frequent value with ties going to the smallest; it is absent
/// when no value repeats.
pub fn summarize(values: &[f64]) -> Result<DescriptiveSummary, DescriptiveError> {
    if values.is_empty() {
        return Err(DescriptiveError::EmptyInput);
    }
    let n = values.len();
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
    let sd = (ss / (nf - 1.0)).sqrt();

    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };

    // With sd == 0 the standardized moments are undefined; report 0/0 as NaN
    // rather than inventing a value.
    let z_power_sum = |p: i32| values.iter().map(|x| ((x - mean) / sd).powi(p)).sum::<f64>();

    Ok(DescriptiveSummary {
        n,
        mean,
        st_dev: Stat::requiring(n, 2, || sd),
        median,
        mode: mode(&sorted),
        std_error: Stat::requiring(n, 2, || sd / nf.sqrt()),
        skewness: Stat::requiring(n, 3, || nf / ((nf - 1.0) * (nf - 2.0)) * z_power_sum(3)),
        kurtosis: Stat::requiring(n, 4, || {
            nf * (nf + 1.0) / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0)) * z_power_sum(4)
                - 3.0 * (nf - 1.0).powi(2) / ((nf - 2.0) * (nf - 3.0))
        }),
    })
}

fn mode(sorted: &[f64]) -> Stat {
    let mut best: Option<(f64, usize)> = None;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let run = j - i;
        // Strict comparison keeps the smallest value among equal runs.
        if run > 1 && best.is_none_or(|(_, count)| run > count) {
            best = Some((sorted[i], run));
        }
        i = j;
    }
    match best {
        Some((value, _)) => Stat::Value(value),
        None => Stat::Absent(Absent::NoRepeatedValue),
    }
}

/// One summary per non-empty group of `group_attr`, in value-list order.
pub fn summarize_by_group(
    ds: &Dataset,
    value_attr: &str,
    group_attr: &str,
) -> Result<IndexMap<String, DescriptiveSummary>, DescriptiveError> {
    if !ds.attribute(value_attr)?.is_numeric() {
        return Err(DataError::NotNumeric(value_attr.to_string()).into());
    }
    let groups = ds.partition_by(group_attr)?;
    let mut out = IndexMap::with_capacity(groups.len());
    for (label, part) in groups {
        out.insert(label, summarize(&part.numeric_column(value_attr)?)?);
    }
    Ok(out)
}

/// Descriptive grid: one column per variable, one sub-row per group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveGrid {
    pub group_attribute: String,
    pub columns: IndexMap<String, IndexMap<String, DescriptiveSummary>>,
}

impl DescriptiveGrid {
    pub fn build(ds: &Dataset, values: &[&str], group_attr: &str) -> Result<Self, DescriptiveError> {
        let mut columns = IndexMap::new();
        for v in values {
            columns.insert(v.to_string(), summarize_by_group(ds, v, group_attr)?);
        }
        Ok(Self {
            group_attribute: group_attr.to_string(),
            columns,
        })
    }

    fn groups(&self) -> Vec<String> {
        let mut groups: Vec<String> = Vec::new();
        for per_group in self.columns.values() {
            for g in per_group.keys() {
                if !groups.contains(g) {
                    groups.push(g.clone());
                }
            }
        }
        groups
    }

    fn rows(&self) -> Vec<(&'static str, String, Vec<String>)> {
        let fmt_stat = |s: Stat| s.value().map_or_else(|| "n/a".to_string(), fmt_num);
        let stats: [(&str, fn(&DescriptiveSummary) -> Stat); 8] = [
            ("Mean", |s| Stat::Value(s.mean)),
            ("St. dev.", |s| s.st_dev),
            ("Median", |s| Stat::Value(s.median)),
            ("Mode", |s| s.mode),
            ("Standard Error", |s| s.std_error),
            ("Kurtosis", |s| s.kurtosis),
            ("Skewness", |s| s.skewness),
            ("Count", |s| Stat::Value(s.n as f64)),
        ];
        let groups = self.groups();
        let mut rows = Vec::new();
        for (name, get) in stats {
            for g in &groups {
                let cells = self
                    .columns
                    .values()
                    .map(|per_group| per_group.get(g).map_or_else(|| "-".to_string(), |s| fmt_stat(get(s))))
                    .collect();
                rows.push((name, g.clone(), cells));
            }
        }
        rows
    }

    pub fn to_text(&self) -> String {
        let mut header = vec!["Statistic".to_string(), "Group".to_string()];
        header.extend(self.columns.keys().cloned());
        let body: Vec<Vec<String>> = self
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, (name, group, cells))| {
                let groups = self.groups().len().max(1);
                let label = if i % groups == 0 { name.to_string() } else { String::new() };
                let mut row = vec![label, group];
                row.extend(cells);
                row
            })
            .collect();
        crate::table::render(&header, &body)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic,group");
        for c in self.columns.keys() {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (name, group, cells) in self.rows() {
            out.push_str(&format!("{name},{group},{}\n", cells.join(",")));
        }
        out
    }
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x}")
    } else {
        format!("{x:.6}")
    }
}
