//! The statistical battery run over a cohort before modelling: descriptive
//! statistics by learning status, an ANOVA of the hours difference across
//! genders among expected graduates, and a t-test of the hours difference
//! between good and poor GPA bands.
//!
//! Each section is computed independently; a failing section is recorded
//! with its error and the others still run.

use super::AdvisorError;
use crate::data::cohort::{CUM_GPA, DIFF, GEN, L_STATUS, SID, TOTAL_GAIN, TOTAL_REG};
use crate::data::{gpa_band, Dataset, Gender, GpaBand, LearningStatus};
use crate::descriptive::DescriptiveGrid;
use crate::inferential::{one_way_anova, t_test_from_samples, AnovaTable, GroupSummary, TTestResult};
use crate::table;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Outcome of one analysis section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "result", rename_all = "snake_case")]
pub enum Section<T> {
    Ok(T),
    Failed { error: String },
}

impl<T> Section<T> {
    fn from_result(r: Result<T, AdvisorError>) -> Self {
        match r {
            Ok(v) => Section::Ok(v),
            Err(e) => Section::Failed { error: e.to_string() },
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Section::Ok(v) => Some(v),
            Section::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    pub students: usize,
    pub expected_to_graduate: usize,
    pub in_study: usize,
    pub female: usize,
    pub male: usize,
}

impl Composition {
    fn pct(part: usize, whole: usize) -> f64 {
        if whole == 0 {
            0.0
        } else {
            100.0 * part as f64 / whole as f64
        }
    }

    pub fn expected_percent(&self) -> f64 {
        Self::pct(self.expected_to_graduate, self.students)
    }

    pub fn female_percent(&self) -> f64 {
        Self::pct(self.female, self.students)
    }

    pub fn male_percent(&self) -> f64 {
        Self::pct(self.male, self.students)
    }

    pub fn to_line(&self) -> String {
        format!(
            "Out of {} students, {} (≈{:.0}%) are expected to graduate; {:.0}% are Female and {:.0}% Male.",
            self.students,
            self.expected_to_graduate,
            self.expected_percent(),
            self.female_percent(),
            self.male_percent()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaSection {
    /// Learning-status partition the test runs in.
    pub partition: String,
    pub factor: String,
    pub response: String,
    pub groups: Vec<(String, GroupSummary)>,
    pub table: AnovaTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestSection {
    pub response: String,
    pub labels: [String; 2],
    pub result: TTestResult,
}

/// Per-student values for plotting registered, gained and difference hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    /// 1-based position in the cohort.
    pub index: usize,
    pub sid: String,
    pub reg: f64,
    pub gain: f64,
    pub diff: f64,
    pub band: GpaBand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortAnalysis {
    pub alpha: f64,
    pub composition: Section<Composition>,
    pub descriptive: Section<DescriptiveGrid>,
    pub anova: Section<AnovaSection>,
    pub t_test: Section<TTestSection>,
    pub series: Section<Vec<SeriesPoint>>,
}

pub const DESCRIBED_COLUMNS: [&str; 4] = [TOTAL_REG, TOTAL_GAIN, DIFF, CUM_GPA];

pub fn cohort_analysis(ds: &Dataset, alpha: f64) -> CohortAnalysis {
    CohortAnalysis {
        alpha,
        composition: Section::from_result(composition(ds)),
        descriptive: Section::from_result(
            DescriptiveGrid::build(ds, &DESCRIBED_COLUMNS, L_STATUS).map_err(AdvisorError::from),
        ),
        anova: Section::from_result(gender_anova(ds, alpha)),
        t_test: Section::from_result(band_t_test(ds, alpha)),
        series: Section::from_result(series(ds)),
    }
}

fn count_label(ds: &Dataset, attr: &str, label: &str) -> Result<usize, AdvisorError> {
    let idx = ds.attribute_index(attr)?;
    let value = ds.schema()[idx]
        .value_index(label)
        .ok_or_else(|| AdvisorError::MissingGroup(format!("{attr} = {label}")))?;
    Ok(ds.instances().iter().filter(|r| r[idx].as_cat() == Some(value)).count())
}

pub fn composition(ds: &Dataset) -> Result<Composition, AdvisorError> {
    Ok(Composition {
        students: ds.len(),
        expected_to_graduate: count_label(ds, L_STATUS, LearningStatus::ExpectedToGraduate.label())?,
        in_study: count_label(ds, L_STATUS, LearningStatus::InStudy.label())?,
        female: count_label(ds, GEN, Gender::Female.label())?,
        male: count_label(ds, GEN, Gender::Male.label())?,
    })
}

/// One-way ANOVA of the hours difference across genders among students
/// expected to graduate.
pub fn gender_anova(ds: &Dataset, alpha: f64) -> Result<AnovaSection, AdvisorError> {
    let partition = LearningStatus::ExpectedToGraduate.label();
    let expected = ds
        .partition_by(L_STATUS)?
        .shift_remove(partition)
        .ok_or_else(|| AdvisorError::MissingGroup(format!("{L_STATUS} = {partition}")))?;
    let by_gender = expected.partition_by(GEN)?;
    let mut groups = Vec::new();
    let mut samples = Vec::new();
    for g in Gender::ALL {
        let part = by_gender
            .get(g.label())
            .ok_or_else(|| AdvisorError::MissingGroup(format!("{GEN} = {} among {partition}", g.label())))?;
        let values = part.numeric_column(DIFF)?;
        groups.push((g.label().to_string(), GroupSummary::from_sample(&values)?));
        samples.push(values);
    }
    Ok(AnovaSection {
        partition: partition.to_string(),
        factor: GEN.to_string(),
        response: DIFF.to_string(),
        table: one_way_anova(&samples, alpha)?,
        groups,
    })
}

/// Hours-difference samples of the Good and Poor GPA bands, in cohort order.
pub fn band_samples(ds: &Dataset) -> Result<[Vec<f64>; 2], AdvisorError> {
    let gpa = ds.numeric_column(CUM_GPA)?;
    let diff = ds.numeric_column(DIFF)?;
    let mut good = Vec::new();
    let mut poor = Vec::new();
    for (g, d) in gpa.into_iter().zip(diff) {
        match gpa_band(g) {
            GpaBand::Good => good.push(d),
            GpaBand::Poor => poor.push(d),
            GpaBand::BelowScale => {}
        }
    }
    Ok([good, poor])
}

/// Equal-variance t-test of the hours difference, Good band against Poor.
pub fn band_t_test(ds: &Dataset, alpha: f64) -> Result<TTestSection, AdvisorError> {
    let [good, poor] = band_samples(ds)?;
    for (band, s) in [("Good", &good), ("Poor", &poor)] {
        if s.is_empty() {
            return Err(AdvisorError::MissingGroup(format!("GPA band {band}")));
        }
    }
    Ok(TTestSection {
        response: DIFF.to_string(),
        labels: ["Group with high GPA (Good Group)".into(), "Group with Low GPA (Poor Group)".into()],
        result: t_test_from_samples(&good, &poor, 0.0, alpha)?,
    })
}

pub fn series(ds: &Dataset) -> Result<Vec<SeriesPoint>, AdvisorError> {
    let sid_idx = ds.attribute_index(SID)?;
    let reg = ds.numeric_column(TOTAL_REG)?;
    let gain = ds.numeric_column(TOTAL_GAIN)?;
    let diff = ds.numeric_column(DIFF)?;
    let gpa = ds.numeric_column(CUM_GPA)?;
    Ok((0..ds.len())
        .map(|i| SeriesPoint {
            index: i + 1,
            sid: ds.format_value(sid_idx, &ds.instances()[i][sid_idx]),
            reg: reg[i],
            gain: gain[i],
            diff: diff[i],
            band: gpa_band(gpa[i]),
        })
        .collect())
}

/// Cohort mean of the hours difference plus one sample standard deviation.
pub fn default_diff_threshold(ds: &Dataset) -> Result<f64, AdvisorError> {
    let diff = ds.numeric_column(DIFF)?;
    let s = GroupSummary::from_sample(&diff)?;
    Ok(s.mean + s.variance.sqrt())
}

impl CohortAnalysis {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut section = |title: &str, body: String| {
            let _ = writeln!(out, "{title}\n{}\n{body}", "=".repeat(title.chars().count()));
        };
        section(
            "Cohort composition",
            match &self.composition {
                Section::Ok(c) => format!("{}\n", c.to_line()),
                Section::Failed { error } => failed(error),
            },
        );
        section(
            &format!("Statistical analysis by {L_STATUS}"),
            match &self.descriptive {
                Section::Ok(g) => g.to_text(),
                Section::Failed { error } => failed(error),
            },
        );
        section(
            "One-way ANOVA",
            match &self.anova {
                Section::Ok(a) => {
                    let mut s = format!("{} across {} within {} = {}\n\n", a.response, a.factor, L_STATUS, a.partition);
                    let rows: Vec<Vec<String>> = a
                        .groups
                        .iter()
                        .map(|(g, s)| vec![g.clone(), s.n.to_string(), format!("{:.4}", s.mean), format!("{:.4}", s.variance)])
                        .collect();
                    s.push_str(&table::render(&["Group", "Count", "Mean", "Variance"].map(String::from), &rows));
                    s.push('\n');
                    s.push_str(&a.table.to_text());
                    s.push_str(&verdict(a.table.p_value.value(), self.alpha));
                    s
                }
                Section::Failed { error } => failed(error),
            },
        );
        section(
            "t-Test: Two-Sample Assuming Equal Variances",
            match &self.t_test {
                Section::Ok(t) => {
                    let mut s = format!("{} by GPA band (Good [3.76, 5.00], Poor [2.00, 3.75])\n\n", t.response);
                    s.push_str(&t.result.to_text([&t.labels[0], &t.labels[1]]));
                    s.push_str(&verdict(t.result.p_two_tail.value(), self.alpha));
                    s
                }
                Section::Failed { error } => failed(error),
            },
        );
        out
    }

    /// The per-student series, one row per student.
    pub fn series_csv(&self) -> Result<String, AdvisorError> {
        match &self.series {
            Section::Ok(points) => {
                let mut out = String::from("index,sid,reg,gain,diff,band\n");
                for p in points {
                    let _ = writeln!(out, "{},{},{},{},{},{}", p.index, p.sid, p.reg, p.gain, p.diff, p.band);
                }
                Ok(out)
            }
            Section::Failed { error } => Err(AdvisorError::SectionFailed(error.clone())),
        }
    }
}

fn failed(error: &str) -> String {
    format!("not available: {error}\n")
}

fn verdict(p: f64, alpha: f64) -> String {
    if p < alpha {
        format!("Significant at alpha = {alpha} (p = {p:.6}).\n")
    } else {
        format!("Not significant at alpha = {alpha} (p = {p:.6}).\n")
    }
}
