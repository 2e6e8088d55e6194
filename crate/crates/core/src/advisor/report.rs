//! Per-student advising report: the annual three-semester advising form
//! with the model's risk prediction appended.
//!
//! The text rendering is a `|`-separated grid and can be parsed back into
//! the same report, so free-text fields (course names, solutions, the
//! advisor's name) must not contain `|` or line breaks and must not start or
//! end with whitespace.

use super::AdvisorError;
use crate::classifiers::{Classifier, ModelError};
use crate::data::cohort::{
    AD_STATUS, CUM_GPA, DIFF, GEN, L_STATUS, PLAN_STUDY, SID, TOTAL_CUR, TOTAL_GAIN, TOTAL_REG,
};
use crate::data::{derive_diff, AdStatus, Dataset, Gender, GpaBand, LearningStatus, PlanOfStudy, RawStudentRecord, StudentRecord};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const SEMESTERS: [&str; 3] = ["First Academic Semester", "Second Academic Semester", "Summer Semester"];
/// Course rows printed per semester even when fewer courses are listed.
pub const MIN_COURSE_ROWS: usize = 6;

const TITLE: &str = "Annual Academic Report";
const PREDICTION_TITLE: &str = "Risk prediction";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

impl ReportFormat {
    pub fn name(self) -> &'static str {
        match self {
            ReportFormat::Text => "text",
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemTypes {
    pub academic: bool,
    pub psychological: bool,
    pub social: bool,
}

/// The advisor's entries for one semester.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SemesterRecord {
    pub recommended: Vec<String>,
    pub selected: Vec<String>,
    /// Answer to "is there any problem"; `None` when left blank.
    pub problem: Option<bool>,
    pub problem_type: ProblemTypes,
    pub solution: String,
}

/// Free-text advisor input, passed through unchanged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Narrative {
    pub semesters: [SemesterRecord; 3],
    pub advisor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskProbability {
    pub class: AdStatus,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvisingReport {
    pub student: StudentRecord,
    pub model: String,
    pub predicted_risk: AdStatus,
    /// Probability per risk class, in class order.
    pub distribution: Vec<RiskProbability>,
    pub gpa_band: GpaBand,
    pub diff_threshold: f64,
    /// Set when the student's hours difference exceeds `diff_threshold`.
    pub diff_flag: bool,
    pub narrative: Narrative,
}

/// Predicts the student's risk with `model` and assembles the report.
/// The student is projected onto the attributes the model was trained on.
pub fn build_report(
    model: &dyn Classifier,
    model_name: &str,
    student: &StudentRecord,
    diff_threshold: f64,
    narrative: Narrative,
) -> Result<AdvisingReport, AdvisorError> {
    let schema = model.schema();
    let class_attr = &schema.attributes[schema.class_index];
    if class_attr.name != AD_STATUS {
        return Err(ModelError::SchemaMismatch(format!(
            "model predicts `{}`, not `{AD_STATUS}`",
            class_attr.name
        ))
        .into());
    }
    let names: Vec<&str> = schema.attributes.iter().map(|a| a.name.as_str()).collect();
    let projected = Dataset::from_records(std::slice::from_ref(student)).select(&names)?;
    schema.check_dataset(&projected)?;
    let dist = model.predict_proba(&projected.instances()[0])?;
    let mut distribution = Vec::with_capacity(AdStatus::ALL.len());
    for &class in AdStatus::ALL {
        let i = schema
            .class_labels()
            .iter()
            .position(|l| l == class.label())
            .ok_or_else(|| ModelError::SchemaMismatch(format!("model has no class `{class}`")))?;
        distribution.push(RiskProbability { class, probability: dist.probs()[i] });
    }
    let predicted_risk = AdStatus::from_label(&schema.class_labels()[dist.argmax()]).expect("checked above");
    let report = AdvisingReport {
        student: student.clone(),
        model: model_name.to_string(),
        predicted_risk,
        distribution,
        gpa_band: student.gpa_band(),
        diff_threshold,
        diff_flag: f64::from(student.diff_g_r_ch) > diff_threshold,
        narrative,
    };
    report.validate()?;
    Ok(report)
}

fn check_text(what: &str, s: &str) -> Result<(), AdvisorError> {
    if s.contains(['|', '\n', '\r']) {
        return Err(AdvisorError::InvalidReport(format!("{what} `{s}` contains `|` or a line break")));
    }
    if s.trim() != s {
        return Err(AdvisorError::InvalidReport(format!("{what} `{s}` has surrounding whitespace")));
    }
    Ok(())
}

impl AdvisingReport {
    pub fn validate(&self) -> Result<(), AdvisorError> {
        check_text("student id", &self.student.sid)?;
        check_text("model name", &self.model)?;
        check_text("advisor name", &self.narrative.advisor)?;
        if self.student.sid.is_empty() {
            return Err(AdvisorError::InvalidReport("student id is empty".into()));
        }
        for (name, s) in SEMESTERS.iter().zip(&self.narrative.semesters) {
            for c in s.recommended.iter().chain(&s.selected) {
                check_text("course", c)?;
                if c.is_empty() {
                    return Err(AdvisorError::InvalidReport(format!("empty course name in {name}")));
                }
            }
            check_text("solution", &s.solution)?;
        }
        let classes: Vec<AdStatus> = self.distribution.iter().map(|p| p.class).collect();
        if classes != AdStatus::ALL {
            return Err(AdvisorError::InvalidReport("distribution must list every risk class once, in order".into()));
        }
        let sum: f64 = self.distribution.iter().map(|p| p.probability).sum();
        if self.distribution.iter().any(|p| !(0.0..=1.0).contains(&p.probability)) || (sum - 1.0).abs() > 1e-9 {
            return Err(AdvisorError::InvalidReport("distribution is not a probability distribution".into()));
        }
        let mut best = 0;
        for (i, p) in self.distribution.iter().enumerate() {
            if p.probability > self.distribution[best].probability {
                best = i;
            }
        }
        if self.distribution[best].class != self.predicted_risk {
            return Err(AdvisorError::InvalidReport("predicted risk is not the most probable class".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, AdvisorError> {
        let r: Self = serde_json::from_str(text).map_err(|e| AdvisorError::InvalidReport(e.to_string()))?;
        r.validate()?;
        Ok(r)
    }

    fn problem_line(&self) -> String {
        if self.diff_flag {
            format!(
                "Problem: {DIFF} = {} exceeds the threshold {}",
                self.student.diff_g_r_ch, self.diff_threshold
            )
        } else {
            "Problem: none".to_string()
        }
    }

    pub fn to_text(&self) -> String {
        let s = &self.student;
        let mut out = String::new();
        let _ = writeln!(out, "{TITLE}\n{}", "=".repeat(TITLE.len()));
        for (k, v) in [
            (SID, s.sid.clone()),
            (TOTAL_REG, s.total_reg_ch.to_string()),
            (TOTAL_GAIN, s.total_gain_ch.to_string()),
            (TOTAL_CUR, s.total_cur_ch.to_string()),
            (CUM_GPA, s.cum_gpa.to_string()),
            (DIFF, s.diff_g_r_ch.to_string()),
            (L_STATUS, s.l_status.to_string()),
            (GEN, s.gen.to_string()),
            (AD_STATUS, s.ad_status.to_string()),
            (PLAN_STUDY, s.plan_study.to_string()),
        ] {
            let _ = writeln!(out, "{k}: {v}");
        }
        out.push('\n');
        out.push_str(&self.grid());
        out.push('\n');
        let _ = writeln!(out, "{PREDICTION_TITLE}\n{}", "=".repeat(PREDICTION_TITLE.len()));
        let _ = writeln!(out, "Model: {}", self.model);
        let _ = writeln!(out, "Predicted {AD_STATUS}: {}", self.predicted_risk);
        for p in &self.distribution {
            let _ = writeln!(out, "P({}) = {}", p.class, p.probability);
        }
        let _ = writeln!(out, "GPA band: {}", self.gpa_band);
        let _ = writeln!(out, "{DIFF} threshold: {}", self.diff_threshold);
        let _ = writeln!(out, "{}", self.problem_line());
        out
    }

    fn grid(&self) -> String {
        let sems = &self.narrative.semesters;
        let n_rows = sems
            .iter()
            .map(|s| s.recommended.len().max(s.selected.len()))
            .max()
            .unwrap_or(0)
            .max(MIN_COURSE_ROWS);
        let mut rows: Vec<Vec<String>> = Vec::new();
        rows.push(SEMESTERS.iter().flat_map(|s| [s.to_string(), String::new()]).collect());
        rows.push(
            (0..3)
                .flat_map(|_| ["Recommended Courses".to_string(), "Actually selected Courses".to_string()])
                .collect(),
        );
        for i in 0..n_rows {
            let cell = |list: &[String]| match list.get(i) {
                Some(c) => format!("{}. {c}", i + 1),
                None => format!("{}.", i + 1),
            };
            rows.push(sems.iter().flat_map(|s| [cell(&s.recommended), cell(&s.selected)]).collect());
        }
        let tick = |b: bool| if b { "[x]" } else { "[ ]" };
        let wide = |f: &dyn Fn(&SemesterRecord) -> String| -> Vec<String> {
            sems.iter().flat_map(|s| [f(s), String::new()]).collect()
        };
        rows.push(wide(&|s| {
            format!(
                "Is there any problem confronted student? Yes {} No {}",
                tick(s.problem == Some(true)),
                tick(s.problem == Some(false))
            )
        }));
        rows.push(wide(&|s| {
            format!(
                "Problem type: Academic {} Psychological {} Social {}",
                tick(s.problem_type.academic),
                tick(s.problem_type.psychological),
                tick(s.problem_type.social)
            )
        }));
        rows.push(wide(&|s| format!("Solution: {}", s.solution).trim_end().to_string()));
        let advisor = &self.narrative.advisor;
        let signature = if advisor.is_empty() {
            "Student's signature: Advisor's name: Advisor's signature:".to_string()
        } else {
            format!("Student's signature: Advisor's name: {advisor} Advisor's signature:")
        };
        rows.push(wide(&|_| signature.clone()));

        let mut widths = [0usize; 6];
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        for r in rows {
            out.push('|');
            for (w, c) in widths.iter().zip(&r) {
                let _ = write!(out, " {c}{} |", " ".repeat(w - c.chars().count()));
            }
            out.push('\n');
        }
        out
    }
}

pub fn render_report(r: &AdvisingReport, format: ReportFormat) -> Result<String, AdvisorError> {
    r.validate()?;
    match format {
        ReportFormat::Text => Ok(r.to_text()),
        ReportFormat::Json => Ok(r.to_json()),
        ReportFormat::Csv => Err(AdvisorError::UnsupportedFormat(format.name().into())),
    }
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> AdvisorError {
        AdvisorError::Parse { line: self.pos.min(self.lines.len().saturating_sub(1)) + 1, message: message.into() }
    }

    fn next(&mut self) -> Result<&'a str, AdvisorError> {
        let line = self.lines.get(self.pos).copied().ok_or_else(|| self.err("unexpected end of report"))?;
        self.pos += 1;
        Ok(line)
    }

    fn skip_blank(&mut self) {
        while self.lines.get(self.pos).is_some_and(|l| l.trim().is_empty()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, want: &str) -> Result<(), AdvisorError> {
        let line = self.next()?;
        if line.trim() != want {
            self.pos -= 1;
            return Err(self.err(format!("expected `{want}`")));
        }
        Ok(())
    }

    fn field(&mut self, key: &str) -> Result<&'a str, AdvisorError> {
        let line = self.next()?;
        match line.strip_prefix(key).and_then(|r| r.strip_prefix(':')) {
            Some(v) => Ok(v.trim()),
            None => {
                self.pos -= 1;
                Err(self.err(format!("expected `{key}:`")))
            }
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, AdvisorError> {
        let v = self.field(key)?;
        v.parse().map_err(|_| {
            self.pos -= 1;
            self.err(format!("invalid {key} `{v}`"))
        })
    }

    fn vocab<T>(&mut self, key: &str, from: fn(&str) -> Option<T>) -> Result<T, AdvisorError> {
        let v = self.field(key)?;
        from(v).ok_or_else(|| {
            self.pos -= 1;
            self.err(format!("unknown {key} `{v}`"))
        })
    }

    fn grid_row(&mut self) -> Result<Vec<&'a str>, AdvisorError> {
        let line = self.next()?.trim();
        let inner = line
            .strip_prefix('|')
            .and_then(|l| l.strip_suffix('|'))
            .ok_or_else(|| {
                self.pos -= 1;
                self.err("expected a grid row")
            })?;
        let cells: Vec<&str> = inner.split('|').map(str::trim).collect();
        if cells.len() != 6 {
            self.pos -= 1;
            return Err(self.err(format!("expected 6 grid cells, found {}", cells.len())));
        }
        Ok(cells)
    }
}

fn parse_ticks(cell: &str, labels: &[&str]) -> Option<Vec<bool>> {
    let mut rest = cell;
    let mut out = Vec::new();
    for l in labels {
        rest = rest.trim_start().strip_prefix(l)?.trim_start();
        let (mark, tail) = if let Some(t) = rest.strip_prefix("[x]") {
            (true, t)
        } else {
            (false, rest.strip_prefix("[ ]")?)
        };
        out.push(mark);
        rest = tail;
    }
    rest.trim().is_empty().then_some(out)
}

/// Parses the text rendering back into a report.
pub fn parse_report_text(text: &str) -> Result<AdvisingReport, AdvisorError> {
    let mut p = Lines { lines: text.lines().collect(), pos: 0 };
    p.skip_blank();
    p.expect(TITLE)?;
    p.next()?;
    let raw = RawStudentRecord {
        sid: p.field(SID)?.to_string(),
        total_reg_ch: p.parsed(TOTAL_REG)?,
        total_gain_ch: p.parsed(TOTAL_GAIN)?,
        total_cur_ch: p.parsed(TOTAL_CUR)?,
        cum_gpa: p.parsed(CUM_GPA)?,
        ..placeholder_raw()
    };
    let diff: u32 = p.parsed(DIFF)?;
    let raw = RawStudentRecord {
        l_status: p.vocab(L_STATUS, LearningStatus::from_label)?,
        gen: p.vocab(GEN, Gender::from_label)?,
        ad_status: p.vocab(AD_STATUS, AdStatus::from_label)?,
        plan_study: p.vocab(PLAN_STUDY, PlanOfStudy::from_label)?,
        ..raw
    };
    let student = derive_diff(&raw)?;
    if student.diff_g_r_ch != diff {
        return Err(AdvisorError::InvalidReport(format!("{DIFF} {diff} does not equal registered minus gained hours")));
    }

    p.skip_blank();
    let header = p.grid_row()?;
    for (i, name) in SEMESTERS.iter().enumerate() {
        if header[2 * i] != *name {
            p.pos -= 1;
            return Err(p.err(format!("expected `{name}`")));
        }
    }
    p.grid_row()?;
    let mut semesters: [SemesterRecord; 3] = Default::default();
    let mut row = 1;
    loop {
        let cells = p.grid_row()?;
        let prefix = format!("{row}.");
        if !cells[0].starts_with(&prefix) {
            p.pos -= 1;
            break;
        }
        for (c, cell) in cells.iter().enumerate() {
            let course = cell.strip_prefix(&prefix).map(str::trim).ok_or_else(|| {
                p.pos -= 1;
                p.err(format!("expected course row {row}"))
            })?;
            if !course.is_empty() {
                let s = &mut semesters[c / 2];
                let list = if c % 2 == 0 { &mut s.recommended } else { &mut s.selected };
                if list.len() + 1 != row {
                    p.pos -= 1;
                    return Err(p.err("course lists must not have gaps"));
                }
                list.push(course.to_string());
            }
        }
        row += 1;
    }
    let cells = p.grid_row()?;
    for (s, cell) in semesters.iter_mut().zip(cells.iter().step_by(2)) {
        let ticks = cell
            .strip_prefix("Is there any problem confronted student?")
            .and_then(|r| parse_ticks(r, &["Yes", "No"]))
            .ok_or_else(|| p.err("malformed problem row"))?;
        s.problem = match (ticks[0], ticks[1]) {
            (true, false) => Some(true),
            (false, true) => Some(false),
            (false, false) => None,
            (true, true) => return Err(p.err("both Yes and No ticked")),
        };
    }
    let cells = p.grid_row()?;
    for (s, cell) in semesters.iter_mut().zip(cells.iter().step_by(2)) {
        let ticks = cell
            .strip_prefix("Problem type:")
            .and_then(|r| parse_ticks(r, &["Academic", "Psychological", "Social"]))
            .ok_or_else(|| p.err("malformed problem type row"))?;
        s.problem_type = ProblemTypes { academic: ticks[0], psychological: ticks[1], social: ticks[2] };
    }
    let cells = p.grid_row()?;
    for (s, cell) in semesters.iter_mut().zip(cells.iter().step_by(2)) {
        s.solution = cell
            .strip_prefix("Solution:")
            .ok_or_else(|| p.err("malformed solution row"))?
            .trim()
            .to_string();
    }
    let cells = p.grid_row()?;
    let advisor = cells[0]
        .strip_prefix("Student's signature: Advisor's name:")
        .and_then(|r| r.strip_suffix("Advisor's signature:"))
        .ok_or_else(|| p.err("malformed signature row"))?
        .trim()
        .to_string();

    p.skip_blank();
    p.expect(PREDICTION_TITLE)?;
    p.next()?;
    let model = p.field("Model")?.to_string();
    let predicted_risk = p.vocab(&format!("Predicted {AD_STATUS}"), AdStatus::from_label)?;
    let mut distribution = Vec::new();
    for &class in AdStatus::ALL {
        let key = format!("P({class}) =");
        let line = p.next()?;
        let v = line.strip_prefix(&key).map(str::trim).ok_or_else(|| {
            p.pos -= 1;
            p.err(format!("expected `{key}`"))
        })?;
        let probability = v.parse().map_err(|_| p.err(format!("invalid probability `{v}`")))?;
        distribution.push(RiskProbability { class, probability });
    }
    let gpa_band = match p.field("GPA band")? {
        "Good" => GpaBand::Good,
        "Poor" => GpaBand::Poor,
        "BelowScale" => GpaBand::BelowScale,
        other => return Err(p.err(format!("unknown GPA band `{other}`"))),
    };
    let diff_threshold = p.parsed(&format!("{DIFF} threshold"))?;
    let problem = p.field("Problem")?;

    let report = AdvisingReport {
        student,
        model,
        predicted_risk,
        distribution,
        gpa_band,
        diff_threshold,
        diff_flag: problem != "none",
        narrative: Narrative { semesters, advisor },
    };
    if report.problem_line() != format!("Problem: {problem}") {
        return Err(AdvisorError::InvalidReport("problem line disagrees with the hours difference".into()));
    }
    report.validate()?;
    Ok(report)
}

fn placeholder_raw() -> RawStudentRecord {
    RawStudentRecord {
        sid: String::new(),
        total_reg_ch: 0,
        total_gain_ch: 0,
        total_cur_ch: 0,
        cum_gpa: 0.0,
        l_status: LearningStatus::InStudy,
        gen: Gender::Male,
        ad_status: AdStatus::Normal,
        plan_study: PlanOfStudy::Old,
    }
}
