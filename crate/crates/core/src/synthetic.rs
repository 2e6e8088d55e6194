//! Seeded synthetic cohorts with a planted link between the hours
//! difference and the risk label.
//!
//! Gender and learning status are assigned by quota: exactly
//! `round(n * fraction)` students get the first value, at shuffled
//! positions. The risk label is drawn per student from `risk_priors`.
//! Registered hours depend on learning status; the hours difference and the
//! GPA depend on the risk label. Continuous draws are normal, truncated by
//! rejection to their valid range, then rounded.

use crate::data::{
    derive_diff, AdStatus, Dataset, Gender, LearningStatus, PlanOfStudy, RawStudentRecord,
    StudentRecord,
};
use crate::data::cohort::GPA_MAX;
use crate::rng::Lcg;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SyntheticError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalSpec {
    pub mean: f64,
    pub sd: f64,
}

impl NormalSpec {
    pub const fn new(mean: f64, sd: f64) -> Self {
        Self { mean, sd }
    }
}

/// One value per risk class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerRisk<T> {
    pub normal: T,
    pub near_to_risk: T,
    pub under_risk: T,
}

impl<T: Copy> PerRisk<T> {
    pub fn get(&self, r: AdStatus) -> T {
        match r {
            AdStatus::Normal => self.normal,
            AdStatus::NearToRisk => self.near_to_risk,
            AdStatus::UnderRisk => self.under_risk,
        }
    }

    fn all(&self) -> [T; 3] {
        [self.normal, self.near_to_risk, self.under_risk]
    }
}

/// One value per learning status.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerStatus<T> {
    pub expected_to_graduate: T,
    pub in_study: T,
}

impl<T: Copy> PerStatus<T> {
    pub fn get(&self, s: LearningStatus) -> T {
        match s {
            LearningStatus::ExpectedToGraduate => self.expected_to_graduate,
            LearningStatus::InStudy => self.in_study,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    pub n: usize,
    pub seed: u64,
    pub female_fraction: f64,
    pub expected_fraction: f64,
    pub risk_priors: PerRisk<f64>,
    pub total_reg: PerStatus<NormalSpec>,
    pub diff: PerRisk<NormalSpec>,
    pub cum_gpa: PerRisk<NormalSpec>,
    /// Inclusive range of current-semester hours, drawn uniformly. Students
    /// who failed hours are held near the minimum load.
    pub current_hours: PerRisk<(u32, u32)>,
    /// Upper bound on registered hours.
    pub max_total_reg: u32,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            n: 249,
            seed: 42,
            female_fraction: 0.46,
            expected_fraction: 39.0 / 249.0,
            risk_priors: PerRisk { normal: 0.70, near_to_risk: 0.16, under_risk: 0.14 },
            total_reg: PerStatus {
                expected_to_graduate: NormalSpec::new(175.5385, 20.50911),
                in_study: NormalSpec::new(109.3381, 41.40297),
            },
            diff: PerRisk {
                normal: NormalSpec::new(12.0, 5.0),
                near_to_risk: NormalSpec::new(30.0, 6.0),
                under_risk: NormalSpec::new(50.0, 8.0),
            },
            cum_gpa: PerRisk {
                normal: NormalSpec::new(3.8, 0.55),
                near_to_risk: NormalSpec::new(3.2, 0.55),
                under_risk: NormalSpec::new(2.5, 0.55),
            },
            current_hours: PerRisk { normal: (14, 19), near_to_risk: (13, 16), under_risk: (13, 15) },
            max_total_reg: 250,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), SyntheticError> {
        let bad = |m: String| Err(SyntheticError::InvalidParams(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        for (name, f) in [("female_fraction", self.female_fraction), ("expected_fraction", self.expected_fraction)] {
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("{name} must lie in [0, 1], got {f}"));
            }
        }
        let priors = self.risk_priors.all();
        if priors.iter().any(|p| !(*p >= 0.0)) || (priors.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad(format!("risk_priors must be non-negative and sum to 1, got {priors:?}"));
        }
        let specs = [self.total_reg.expected_to_graduate, self.total_reg.in_study]
            .into_iter()
            .chain(self.diff.all())
            .chain(self.cum_gpa.all());
        for s in specs {
            if !s.mean.is_finite() || !(s.sd >= 0.0) || !s.sd.is_finite() {
                return bad(format!("normal parameters must be finite with sd >= 0, got {s:?}"));
            }
        }
        for (lo, hi) in self.current_hours.all() {
            if lo > hi {
                return bad(format!("current_hours range {lo}..={hi} is empty"));
            }
        }
        if self.max_total_reg == 0 {
            return bad("max_total_reg must be positive".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, SyntheticError> {
        let p: Self = serde_json::from_str(text).map_err(|e| SyntheticError::InvalidParams(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }
}

/// Rejection attempts before a truncated draw falls back to clamping.
const MAX_REJECTIONS: usize = 1000;

fn truncated_normal(rng: &mut Lcg, spec: NormalSpec, lo: f64, hi: f64) -> f64 {
    for _ in 0..MAX_REJECTIONS {
        let x = spec.mean + spec.sd * rng.normal();
        if (lo..=hi).contains(&x) {
            return x;
        }
    }
    spec.mean.clamp(lo, hi)
}

/// `count` true flags at shuffled positions among `n`.
fn quota(rng: &mut Lcg, n: usize, count: usize) -> Vec<bool> {
    let mut flags: Vec<bool> = (0..n).map(|i| i < count).collect();
    rng.shuffle(&mut flags);
    flags
}

fn quota_count(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).round() as usize).min(n)
}

pub fn generate_records(p: &GeneratorParams) -> Result<Vec<StudentRecord>, SyntheticError> {
    p.validate()?;
    let mut rng = Lcg::new(p.seed);
    let female = quota(&mut rng, p.n, quota_count(p.n, p.female_fraction));
    let expected = quota(&mut rng, p.n, quota_count(p.n, p.expected_fraction));
    let priors = p.risk_priors.all();
    let max_reg = f64::from(p.max_total_reg);

    let mut out = Vec::with_capacity(p.n);
    for i in 0..p.n {
        let u = rng.next_f64();
        let mut risk = AdStatus::UnderRisk;
        let mut acc = 0.0;
        for (&r, &prior) in AdStatus::ALL.iter().zip(&priors) {
            acc += prior;
            if u < acc {
                risk = r;
                break;
            }
        }
        let l_status = if expected[i] { LearningStatus::ExpectedToGraduate } else { LearningStatus::InStudy };
        let reg = truncated_normal(&mut rng, p.total_reg.get(l_status), 1.0, max_reg).round();
        let diff = truncated_normal(&mut rng, p.diff.get(risk), 0.0, reg).round().min(reg);
        let gpa = truncated_normal(&mut rng, p.cum_gpa.get(risk), 0.0, GPA_MAX);
        let (lo, hi) = p.current_hours.get(risk);
        let cur = lo + rng.below((hi - lo + 1) as usize) as u32;
        let plan = PlanOfStudy::ALL[rng.below(PlanOfStudy::ALL.len())];
        let raw = RawStudentRecord {
            sid: format!("S{:04}", i + 1),
            total_reg_ch: reg as u32,
            total_gain_ch: (reg - diff) as u32,
            total_cur_ch: cur,
            cum_gpa: ((gpa * 100.0).round() / 100.0).clamp(0.0, GPA_MAX),
            l_status,
            gen: if female[i] { Gender::Female } else { Gender::Male },
            ad_status: risk,
            plan_study: plan,
        };
        out.push(derive_diff(&raw).expect("gain never exceeds registered hours"));
    }
    Ok(out)
}

pub fn generate_cohort(p: &GeneratorParams) -> Result<Dataset, SyntheticError> {
    Ok(Dataset::from_records(&generate_records(p)?))
}
