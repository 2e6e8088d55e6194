use std::fmt::Write as _;
use std::fs;
use std::io::{Read as _, Write as _};
use std::path::Path;

use advisory_miner::advisor::analysis::{band_t_test, gender_anova, DESCRIBED_COLUMNS};
use advisory_miner::advisor::report::ReportFormat;
use advisory_miner::advisor::rules::{rules_csv, rules_text};
use advisory_miner::advisor::{
    build_report, cohort_analysis, default_diff_threshold, extract_rules, render_report, Narrative,
};
use advisory_miner::classifiers::{Classifier, Model};
use advisory_miner::data::cohort::{L_STATUS, SID};
use advisory_miner::data::{parse_cohort_csv, parse_cohort_records, write_cohort_csv, Dataset, DatasetDocument};
use advisory_miner::descriptive::DescriptiveGrid;
use advisory_miner::evaluation::{cross_validate_with, rank, reports_csv, reports_text, CvConfig, RankBy};
use advisory_miner::inferential::{anova_from_ss, t_test_equal_var, GroupSummary};
use advisory_miner::synthetic::{generate_records, GeneratorParams};
use serde::Serialize;

use crate::args::*;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad invocation; exit status 2.
    #[error("{0}")]
    Usage(String),
    /// Data, domain or I/O failure; exit status 1.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

fn failed(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Failed(format!("{context}: {e}"))
}

type Result<T, E = CliError> = std::result::Result<T, E>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Describe(a) => describe(a),
        Command::Analyze(a) => analyze(a),
        Command::Anova(a) => anova(a),
        Command::Ttest(a) => ttest(a),
        Command::Train(a) => train(a),
        Command::Crossval(a) => crossval(a),
        Command::Predict(a) => predict(a),
        Command::Rules(a) => rules(a),
        Command::Report(a) => report(a),
    }
}

fn read_source(path: &str) -> Result<String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| failed("reading stdin", e))?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| failed(path, e))
    }
}

fn is_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

/// Loads cohort CSV, or a dataset JSON document when the text is a JSON object.
fn load_dataset(path: &str) -> Result<Dataset> {
    let text = read_source(path)?;
    if is_json(&text) {
        let doc: DatasetDocument = serde_json::from_str(&text).map_err(|e| failed(path, e))?;
        Dataset::try_from(doc).map_err(|e| failed(path, e))
    } else {
        parse_cohort_csv(&text).map_err(|e| failed(path, e))
    }
}

fn load_input(input: &DataInput) -> Result<Dataset> {
    let ds = load_dataset(&input.data)?;
    if input.exclude.is_empty() {
        return Ok(ds);
    }
    let names: Vec<&str> = input.exclude.iter().map(String::as_str).collect();
    ds.exclude(&names).map_err(|e| failed("--exclude", e))
}

fn load_model(path: &Path) -> Result<Model> {
    let text = fs::read_to_string(path).map_err(|e| failed(path.display(), e))?;
    serde_json::from_str(&text).map_err(|e| failed(path.display(), e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

/// Writes to `out`, or stdout when absent. Files go through a temporary in
/// the same directory and are renamed into place, so a failed run leaves no
/// partial file.
fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        return match stdout.write_all(content.as_bytes()).and_then(|()| stdout.flush()) {
            // a closed downstream pipe (`| head`) is not a failure
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => other.map_err(|e| failed("writing stdout", e)),
        };
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let ctx = || path.display().to_string();
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| failed(ctx(), e))?;
    tmp.write_all(content.as_bytes()).map_err(|e| failed(ctx(), e))?;
    tmp.persist(path).map_err(|e| failed(ctx(), e.error))?;
    Ok(())
}

fn unsupported(command: &str, format: Format) -> CliError {
    let name = match format {
        Format::Text => "text",
        Format::Csv => "csv",
        Format::Json => "json",
    };
    CliError::Usage(format!("`{command}` does not support --format {name}"))
}

fn echo_seed(seed: u64) {
    eprintln!("seed: {seed}");
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mut params = match &a.params {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| failed(path.display(), e))?;
            GeneratorParams::from_json(&text).map_err(|e| failed(path.display(), e))?
        }
        None => GeneratorParams::default(),
    };
    params.seed = a.seed;
    if let Some(n) = a.n {
        params.n = n;
    }
    echo_seed(a.seed);
    let records = generate_records(&params).map_err(|e| failed("generate", e))?;
    let content = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => write_cohort_csv(&records),
        Format::Json => to_json(&DatasetDocument::from(Dataset::from_records(&records))),
        f @ Format::Text => return Err(unsupported("generate", f)),
    };
    emit(a.output.out.as_deref(), &content)
}

fn describe(a: DescribeArgs) -> Result<()> {
    let ds = load_input(&a.input)?;
    let columns: Vec<&str> = if a.columns.is_empty() {
        DESCRIBED_COLUMNS.to_vec()
    } else {
        a.columns.iter().map(String::as_str).collect()
    };
    let grid = DescriptiveGrid::build(&ds, &columns, &a.group_by).map_err(|e| failed("describe", e))?;
    let content = match a.output.format.unwrap_or(Format::Text) {
        Format::Text => grid.to_text(),
        Format::Csv => grid.to_csv(),
        Format::Json => to_json(&grid),
    };
    emit(a.output.out.as_deref(), &content)
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let ds = load_input(&a.input)?;
    let analysis = cohort_analysis(&ds, a.alpha.alpha);
    let content = match a.output.format.unwrap_or(Format::Text) {
        Format::Text => analysis.to_text(),
        Format::Csv => analysis.series_csv().map_err(|e| failed("analyze", e))?,
        Format::Json => to_json(&analysis),
    };
    emit(a.output.out.as_deref(), &content)
}

fn anova(a: AnovaArgs) -> Result<()> {
    let alpha = a.alpha.alpha;
    let format = a.output.format.unwrap_or(Format::Text);
    let content = if let Some(path) = &a.data {
        let section = gender_anova(&load_dataset(path)?, alpha).map_err(|e| failed("anova", e))?;
        match format {
            Format::Text => format!(
                "{} by {} ({} = {})\n{}",
                section.response, section.factor, L_STATUS, section.partition, section.table.to_text()
            ),
            Format::Csv => section.table.to_csv(),
            Format::Json => to_json(&section),
        }
    } else {
        // clap guarantees all four summary flags are present together
        let table = anova_from_ss(
            a.ss_between.unwrap_or_default(),
            a.ss_within.unwrap_or_default(),
            a.groups.unwrap_or_default(),
            a.observations.unwrap_or_default(),
            alpha,
        )
        .map_err(|e| failed("anova", e))?;
        match format {
            Format::Text => table.to_text(),
            Format::Csv => table.to_csv(),
            Format::Json => to_json(&table),
        }
    };
    emit(a.output.out.as_deref(), &content)
}

fn ttest(a: TtestArgs) -> Result<()> {
    let alpha = a.alpha.alpha;
    let format = a.output.format.unwrap_or(Format::Text);
    let content = if let Some(path) = &a.data {
        let section = band_t_test(&load_dataset(path)?, alpha).map_err(|e| failed("ttest", e))?;
        match format {
            Format::Text => format!(
                "{}\n{}",
                section.response,
                section.result.to_text([section.labels[0].as_str(), section.labels[1].as_str()])
            ),
            Format::Csv => section.result.to_csv(),
            Format::Json => to_json(&section),
        }
    } else {
        let group = |n: Option<usize>, mean: Option<f64>, var: Option<f64>| {
            GroupSummary::new(n.unwrap_or_default(), mean.unwrap_or_default(), var.unwrap_or_default())
                .map_err(|e| failed("ttest", e))
        };
        let g1 = group(a.n1, a.mean1, a.var1)?;
        let g2 = group(a.n2, a.mean2, a.var2)?;
        let result = t_test_equal_var(g1, g2, a.hypothesized_diff, alpha).map_err(|e| failed("ttest", e))?;
        match format {
            Format::Text => result.to_text(["Variable 1", "Variable 2"]),
            Format::Csv => result.to_csv(),
            Format::Json => to_json(&result),
        }
    };
    emit(a.output.out.as_deref(), &content)
}

fn train(a: TrainArgs) -> Result<()> {
    let ds = load_input(&a.input)?;
    let learner = a.hyper.learner(a.algo);
    let model = learner.fit(&ds).map_err(|e| failed(learner.name(), e))?;
    emit(a.out.as_deref(), &to_json(&model))
}

fn crossval(a: CrossvalArgs) -> Result<()> {
    let ds = load_input(&a.input)?;
    echo_seed(a.seed);
    let config = CvConfig {
        folds: a.folds,
        seed: a.seed,
        parallel: a.parallel,
    };
    let mut reports = Vec::with_capacity(a.algo.len());
    for &algo in &a.algo {
        let learner = a.hyper.learner(algo);
        let report = cross_validate_with(&learner, &ds, &config).map_err(|e| failed(learner.name(), e))?;
        for w in &report.warnings {
            eprintln!("{}: {w}", report.algorithm);
        }
        reports.push(report);
    }
    let ordered: Vec<_> = match a.rank_by {
        Some(key) => rank(&reports, RankBy::from(key)),
        None => reports.iter().collect(),
    };
    let content = match a.output.format.unwrap_or(Format::Text) {
        Format::Text => {
            let mut s = reports_text(&ordered);
            if let (Some(key), Some(best)) = (a.rank_by, ordered.first()) {
                let _ = writeln!(s, "\nBest by {}: {}", RankBy::from(key).name(), best.algorithm);
            }
            s
        }
        Format::Csv => reports_csv(&ordered),
        Format::Json => to_json(&ordered),
    };
    emit(a.output.out.as_deref(), &content)
}

#[derive(Serialize)]
struct ClassProbability {
    class: String,
    probability: f64,
}

#[derive(Serialize)]
struct Prediction {
    sid: Option<String>,
    predicted: String,
    distribution: Vec<ClassProbability>,
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let ds = load_dataset(&a.data)?;
    let schema = model.schema();
    let names: Vec<&str> = schema.attributes.iter().map(|s| s.name.as_str()).collect();
    let projected = ds.select(&names).map_err(|e| failed(&a.data, e))?;
    schema.check_dataset(&projected).map_err(|e| failed(&a.data, e))?;
    let labels = schema.class_labels();
    let sid_col = ds.attribute_index(SID).ok();

    let mut predictions = Vec::with_capacity(ds.len());
    for (row, x) in projected.instances().iter().enumerate() {
        let ctx = || format!("{} row {}", a.data, row + 1);
        let dist = model.predict_proba(x).map_err(|e| failed(ctx(), e))?;
        let class = model.predict(x).map_err(|e| failed(ctx(), e))?;
        predictions.push(Prediction {
            sid: sid_col.map(|c| ds.format_value(c, &ds.instances()[row][c])),
            predicted: labels[class].clone(),
            distribution: labels
                .iter()
                .zip(dist.probs())
                .map(|(class, &probability)| ClassProbability { class: class.clone(), probability })
                .collect(),
        });
    }

    let content = match a.output.format.unwrap_or(Format::Text) {
        Format::Text => {
            let mut s = String::new();
            for (i, p) in predictions.iter().enumerate() {
                let id = p.sid.clone().unwrap_or_else(|| format!("#{}", i + 1));
                let dist: Vec<String> = p.distribution.iter().map(|c| format!("{}={:.4}", c.class, c.probability)).collect();
                let _ = writeln!(s, "{id}\t{}\t{}", p.predicted, dist.join(" "));
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("row,sid,predicted");
            for l in labels {
                let _ = write!(s, ",p_{l}");
            }
            s.push('\n');
            for (i, p) in predictions.iter().enumerate() {
                let _ = write!(s, "{},{},{}", i + 1, p.sid.as_deref().unwrap_or(""), p.predicted);
                for c in &p.distribution {
                    let _ = write!(s, ",{}", c.probability);
                }
                s.push('\n');
            }
            s
        }
        Format::Json => to_json(&predictions),
    };
    emit(a.output.out.as_deref(), &content)
}

fn rules(a: RulesArgs) -> Result<()> {
    let model = match (&a.data, &a.model) {
        (Some(data), _) => {
            let input = DataInput {
                data: data.clone(),
                exclude: a.exclude.clone(),
            };
            let ds = load_input(&input)?;
            let learner = a.hyper.learner(Algo::C45);
            learner.fit(&ds).map_err(|e| failed(learner.name(), e))?
        }
        (None, Some(path)) => load_model(path)?,
        (None, None) => unreachable!("clap requires --data or --model"),
    };
    let Some(tree) = model.as_tree() else {
        return Err(CliError::Failed(format!(
            "rules need a C4.5 model, got {}",
            model.name()
        )));
    };
    let rules = extract_rules(tree);
    let content = match a.output.format.unwrap_or(Format::Text) {
        Format::Text => rules_text(&rules),
        Format::Csv => rules_csv(&rules),
        Format::Json => to_json(&rules),
    };
    emit(a.output.out.as_deref(), &content)
}

fn report(a: ReportArgs) -> Result<()> {
    let format = match a.output.format.unwrap_or(Format::Text) {
        Format::Text => ReportFormat::Text,
        Format::Json => ReportFormat::Json,
        Format::Csv => ReportFormat::Csv,
    };
    let model = load_model(&a.model)?;
    let text = read_source(&a.data)?;
    let records = parse_cohort_records(&text).map_err(|e| failed(&a.data, e))?;
    let student = match &a.sid {
        Some(sid) => records
            .iter()
            .find(|r| &r.sid == sid)
            .ok_or_else(|| CliError::Failed(format!("{}: no student with {SID} `{sid}`", a.data)))?,
        None if records.len() == 1 => &records[0],
        None => {
            return Err(CliError::Usage(format!(
                "{} holds {} students; choose one with --sid",
                a.data,
                records.len()
            )))
        }
    };
    let threshold = match a.diff_threshold {
        Some(t) => t,
        None => default_diff_threshold(&Dataset::from_records(&records))
            .map_err(|e| failed("default Diff_G_R_C_H threshold (pass --diff-threshold)", e))?,
    };
    let narrative: Narrative = match &a.narrative {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| failed(path.display(), e))?;
            serde_json::from_str(&text).map_err(|e| failed(path.display(), e))?
        }
        None => Narrative::default(),
    };
    let report = build_report(&model, model.name(), student, threshold, narrative)
        .map_err(|e| failed("report", e))?;
    let content = render_report(&report, format).map_err(|e| failed("report", e))?;
    emit(a.output.out.as_deref(), &content)
}
