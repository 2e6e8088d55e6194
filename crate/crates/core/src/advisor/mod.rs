//! Advisor-facing layer: rules read off decision trees, the cohort analysis
//! battery and per-student advising reports.

pub mod analysis;
pub mod report;
pub mod rules;

use crate::classifiers::ModelError;
use crate::data::DataError;
use crate::descriptive::DescriptiveError;
use crate::special::DomainError;

pub use analysis::{cohort_analysis, default_diff_threshold, CohortAnalysis, Section};
pub use report::{build_report, parse_report_text, render_report, AdvisingReport, Narrative, ReportFormat};
pub use rules::{extract_rules, AdvisingRule, Condition, ConditionValue, Relation};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdvisorError {
    #[error("missing group: {0}")]
    MissingGroup(String),
    #[error("format `{0}` is not supported for this output")]
    UnsupportedFormat(String),
    #[error("invalid report: {0}")]
    InvalidReport(String),
    #[error("report text line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("section failed: {0}")]
    SectionFailed(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Descriptive(#[from] DescriptiveError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
