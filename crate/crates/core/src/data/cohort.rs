//! Student-cohort records, their CSV dialect and the registered-minus-gained
//! hours derivation.
//!
//! The dialect is plain comma-separated UTF-8 without quoting. The header must
//! name exactly these columns, in any order:
//!
//! `Sid, Total_Reg_C_H, Total_Gain_C_H, Total_Cur_C_H, CUM_GPA, L_STATUS, GEN, Ad_STATUS, Plan_Study`
//!
//! plus an optional `Diff_G_R_C_H`, which is derived when absent and checked
//! when present. Missing values are rejected.

use super::{AttributeSpec, DataError, Dataset, Role, Value};
use serde::{Deserialize, Serialize};
use std::fmt;

pub const SID: &str = "Sid";
pub const TOTAL_REG: &str = "Total_Reg_C_H";
pub const TOTAL_GAIN: &str = "Total_Gain_C_H";
pub const TOTAL_CUR: &str = "Total_Cur_C_H";
pub const CUM_GPA: &str = "CUM_GPA";
pub const DIFF: &str = "Diff_G_R_C_H";
pub const L_STATUS: &str = "L_STATUS";
pub const GEN: &str = "GEN";
pub const AD_STATUS: &str = "Ad_STATUS";
pub const PLAN_STUDY: &str = "Plan_Study";

/// Upper end of the grade-point scale.
pub const GPA_MAX: f64 = 5.0;

fn normalize_label(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, ' ' | '_' | '-' | '.'))
        .flat_map(char::to_lowercase)
        .collect()
}

macro_rules! vocabulary {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal $(| $alias:literal)*),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            /// Spelling used in CSV files and dataset value lists.
            pub fn label(self) -> &'static str {
                match self { $($name::$variant => $label),+ }
            }

            /// Parses a label, ignoring case, spaces, underscores and hyphens.
            pub fn from_label(s: &str) -> Option<Self> {
                let key = normalize_label(s);
                $(
                    if key == normalize_label($label) $(|| key == normalize_label($alias))* {
                        return Some($name::$variant);
                    }
                )+
                None
            }

            pub fn index(self) -> usize {
                Self::ALL.iter().position(|&v| v == self).expect("listed")
            }

            pub fn from_index(i: usize) -> Option<Self> {
                Self::ALL.get(i).copied()
            }

            pub fn labels() -> Vec<String> {
                Self::ALL.iter().map(|v| v.label().to_string()).collect()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

vocabulary!(
    /// Whether a student is still studying or expected to graduate.
    LearningStatus {
        InStudy => "InStudy",
        ExpectedToGraduate => "ExpectedToGraduate" | "Expected",
    }
);

vocabulary!(
    Gender {
        Male => "M" | "Male",
        Female => "F" | "Female",
    }
);

vocabulary!(
    /// Advisor-assigned risk label; the class attribute.
    AdStatus {
        Normal => "Normal",
        NearToRisk => "NearToRisk",
        UnderRisk => "UnderRisk",
    }
);

vocabulary!(
    PlanOfStudy {
        Old => "Old",
        New => "New",
        Developed => "Developed",
    }
);

/// Cumulative-GPA band used to compare strong and weak students.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GpaBand {
    Good,
    Poor,
    BelowScale,
}

impl fmt::Display for GpaBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GpaBand::Good => "Good",
            GpaBand::Poor => "Poor",
            GpaBand::BelowScale => "BelowScale",
        })
    }
}

/// Good covers [3.76, 5.00], Poor [2.00, 3.75], BelowScale everything under
/// 2.00. GPAs carry two decimals, so the gap between 3.75 and 3.76 is split
/// at 3.755.
pub fn gpa_band(cum_gpa: f64) -> GpaBand {
    if cum_gpa >= 3.755 {
        GpaBand::Good
    } else if cum_gpa >= 2.0 {
        GpaBand::Poor
    } else {
        GpaBand::BelowScale
    }
}

/// A student record before the hours difference is derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawStudentRecord {
    pub sid: String,
    pub total_reg_ch: u32,
    pub total_gain_ch: u32,
    pub total_cur_ch: u32,
    pub cum_gpa: f64,
    pub l_status: LearningStatus,
    pub gen: Gender,
    pub ad_status: AdStatus,
    pub plan_study: PlanOfStudy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentRecord {
    pub sid: String,
    pub total_reg_ch: u32,
    pub total_gain_ch: u32,
    pub total_cur_ch: u32,
    pub cum_gpa: f64,
    pub diff_g_r_ch: u32,
    pub l_status: LearningStatus,
    pub gen: Gender,
    pub ad_status: AdStatus,
    pub plan_study: PlanOfStudy,
}

impl StudentRecord {
    pub fn to_raw(&self) -> RawStudentRecord {
        RawStudentRecord {
            sid: self.sid.clone(),
            total_reg_ch: self.total_reg_ch,
            total_gain_ch: self.total_gain_ch,
            total_cur_ch: self.total_cur_ch,
            cum_gpa: self.cum_gpa,
            l_status: self.l_status,
            gen: self.gen,
            ad_status: self.ad_status,
            plan_study: self.plan_study,
        }
    }

    pub fn gpa_band(&self) -> GpaBand {
        gpa_band(self.cum_gpa)
    }

    /// Values in [`cohort_schema`] order.
    pub fn to_instance(&self) -> Vec<Value> {
        vec![
            Value::Text(self.sid.clone()),
            Value::Num(self.total_reg_ch.into()),
            Value::Num(self.total_gain_ch.into()),
            Value::Num(self.total_cur_ch.into()),
            Value::Num(self.cum_gpa),
            Value::Num(self.diff_g_r_ch.into()),
            Value::Cat(self.l_status.index()),
            Value::Cat(self.gen.index()),
            Value::Cat(self.ad_status.index()),
            Value::Cat(self.plan_study.index()),
        ]
    }
}

/// Registered minus gained credit hours.
pub fn derive_diff(record: &RawStudentRecord) -> Result<StudentRecord, DataError> {
    let diff = record
        .total_reg_ch
        .checked_sub(record.total_gain_ch)
        .ok_or(DataError::NegativeDiff {
            reg: record.total_reg_ch,
            gain: record.total_gain_ch,
        })?;
    Ok(StudentRecord {
        sid: record.sid.clone(),
        total_reg_ch: record.total_reg_ch,
        total_gain_ch: record.total_gain_ch,
        total_cur_ch: record.total_cur_ch,
        cum_gpa: record.cum_gpa,
        diff_g_r_ch: diff,
        l_status: record.l_status,
        gen: record.gen,
        ad_status: record.ad_status,
        plan_study: record.plan_study,
    })
}

/// The cohort schema, with `Ad_STATUS` as class attribute.
pub fn cohort_schema() -> Vec<AttributeSpec> {
    vec![
        AttributeSpec::identifier(SID),
        AttributeSpec::numeric(TOTAL_REG, Role::Feature),
        AttributeSpec::numeric(TOTAL_GAIN, Role::Feature),
        AttributeSpec::numeric(TOTAL_CUR, Role::Feature),
        AttributeSpec::numeric(CUM_GPA, Role::Feature),
        AttributeSpec::numeric(DIFF, Role::Derived),
        AttributeSpec::nominal(L_STATUS, LearningStatus::labels(), Role::Feature),
        AttributeSpec::nominal(GEN, Gender::labels(), Role::Feature),
        AttributeSpec::nominal(AD_STATUS, AdStatus::labels(), Role::Class),
        AttributeSpec::nominal(PLAN_STUDY, PlanOfStudy::labels(), Role::Feature),
    ]
}

impl Dataset {
    pub fn from_records(records: &[StudentRecord]) -> Dataset {
        Dataset::new(
            cohort_schema(),
            records.iter().map(StudentRecord::to_instance).collect(),
        )
        .expect("student records always satisfy the cohort schema")
    }
}

const REQUIRED_COLUMNS: [&str; 9] = [
    SID, TOTAL_REG, TOTAL_GAIN, TOTAL_CUR, CUM_GPA, L_STATUS, GEN, AD_STATUS, PLAN_STUDY,
];

struct Columns {
    positions: [usize; 9],
    diff: Option<usize>,
    width: usize,
}

fn parse_header(line: &str) -> Result<Columns, DataError> {
    let names: Vec<&str> = line.split(',').map(str::trim).collect();
    let mut positions = [usize::MAX; 9];
    let mut diff = None;
    for (pos, name) in names.iter().enumerate() {
        if *name == DIFF {
            if diff.replace(pos).is_some() {
                return Err(DataError::MalformedHeader(format!("duplicate column `{DIFF}`")));
            }
            continue;
        }
        let slot = REQUIRED_COLUMNS
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| DataError::MalformedHeader(format!("unknown column `{name}`")))?;
        if positions[slot] != usize::MAX {
            return Err(DataError::MalformedHeader(format!("duplicate column `{name}`")));
        }
        positions[slot] = pos;
    }
    let missing: Vec<&str> = REQUIRED_COLUMNS
        .iter()
        .zip(positions)
        .filter(|(_, p)| *p == usize::MAX)
        .map(|(c, _)| *c)
        .collect();
    if !missing.is_empty() {
        return Err(DataError::MalformedHeader(format!(
            "missing column(s): {}",
            missing.join(", ")
        )));
    }
    Ok(Columns {
        positions,
        diff,
        width: names.len(),
    })
}

fn value_error(line: usize, column: &str, message: impl Into<String>) -> DataError {
    DataError::Value {
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

fn parse_hours(line: usize, column: &str, cell: &str) -> Result<u32, DataError> {
    if let Ok(v) = cell.parse::<u32>() {
        return Ok(v);
    }
    match cell.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 => Ok(x as u32),
        Ok(x) => Err(value_error(
            line,
            column,
            format!("`{x}` is not a non-negative whole number of hours"),
        )),
        Err(_) => Err(value_error(line, column, format!("`{cell}` is not numeric"))),
    }
}

fn parse_nominal<T>(
    line: usize,
    column: &str,
    cell: &str,
    parse: fn(&str) -> Option<T>,
    labels: Vec<String>,
) -> Result<T, DataError> {
    parse(cell).ok_or_else(|| {
        value_error(
            line,
            column,
            format!("`{cell}` is not one of {}", labels.join(", ")),
        )
    })
}

/// Parses cohort CSV text into validated records, preserving row order.
pub fn parse_cohort_records(text: &str) -> Result<Vec<StudentRecord>, DataError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l,
            None => return Err(DataError::MalformedHeader("input is empty".into())),
        }
    };
    let cols = parse_header(header)?;

    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != cols.width {
            return Err(value_error(
                line_no,
                "*",
                format!("expected {} fields, found {}", cols.width, cells.len()),
            ));
        }
        let cell = |slot: usize| cells[cols.positions[slot]];
        for (slot, name) in REQUIRED_COLUMNS.iter().enumerate() {
            if cell(slot).is_empty() {
                return Err(value_error(line_no, name, "missing value"));
            }
        }

        let cum_gpa = cell(4)
            .parse::<f64>()
            .map_err(|_| value_error(line_no, CUM_GPA, format!("`{}` is not numeric", cell(4))))?;
        if !(0.0..=GPA_MAX).contains(&cum_gpa) {
            return Err(value_error(
                line_no,
                CUM_GPA,
                format!("{cum_gpa} lies outside [0, {GPA_MAX}]"),
            ));
        }

        let raw = RawStudentRecord {
            sid: cell(0).to_string(),
            total_reg_ch: parse_hours(line_no, TOTAL_REG, cell(1))?,
            total_gain_ch: parse_hours(line_no, TOTAL_GAIN, cell(2))?,
            total_cur_ch: parse_hours(line_no, TOTAL_CUR, cell(3))?,
            cum_gpa,
            l_status: parse_nominal(line_no, L_STATUS, cell(5), LearningStatus::from_label, LearningStatus::labels())?,
            gen: parse_nominal(line_no, GEN, cell(6), Gender::from_label, Gender::labels())?,
            ad_status: parse_nominal(line_no, AD_STATUS, cell(7), AdStatus::from_label, AdStatus::labels())?,
            plan_study: parse_nominal(line_no, PLAN_STUDY, cell(8), PlanOfStudy::from_label, PlanOfStudy::labels())?,
        };
        let record = derive_diff(&raw).map_err(|e| value_error(line_no, TOTAL_GAIN, e.to_string()))?;
        if let Some(pos) = cols.diff {
            let given = parse_hours(line_no, DIFF, cells[pos])?;
            if given != record.diff_g_r_ch {
                return Err(value_error(
                    line_no,
                    DIFF,
                    format!(
                        "{given} disagrees with {TOTAL_REG} - {TOTAL_GAIN} = {}",
                        record.diff_g_r_ch
                    ),
                ));
            }
        }
        records.push(record);
    }
    Ok(records)
}

/// Parses cohort CSV text into a dataset with `Ad_STATUS` as class.
pub fn parse_cohort_csv(text: &str) -> Result<Dataset, DataError> {
    Ok(Dataset::from_records(&parse_cohort_records(text)?))
}

/// Writes records in the canonical column order, `Diff_G_R_C_H` included.
pub fn write_cohort_csv(records: &[StudentRecord]) -> String {
    Dataset::from_records(records).to_csv()
}
