//! Stratified k-fold cross-validation and the metrics reported for it.
//!
//! Every metric is computed from the pooled held-out predictions of all
//! folds. Probability errors compare each predicted distribution with the
//! one-hot actual class and average over all `n * C` entries; the relative
//! errors divide by the same errors of a predictor that outputs the class
//! proportions of the fold's training data.

use crate::classifiers::{ClassDistribution, Classifier, LearnerSpec, ModelError};
use crate::data::Dataset;
use crate::rng::Lcg;
use crate::special::Probability;
use crate::table;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("fold count {k} must lie in 2..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("dataset has no instances")]
    EmptyDataset,
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("no predictions given")]
    EmptyInput,
    #[error("the prior baseline makes no errors, so relative errors are undefined")]
    DegenerateBaseline,
    #[error("invalid confusion matrix: {0}")]
    InvalidMatrix(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `counts[actual][predicted]` in schema class order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn from_counts(labels: Vec<String>, counts: Vec<Vec<usize>>) -> Result<Self, EvalError> {
        if counts.len() != labels.len() || counts.iter().any(|r| r.len() != labels.len()) {
            return Err(EvalError::InvalidMatrix(format!(
                "expected a {0}x{0} matrix",
                labels.len()
            )));
        }
        Ok(Self { labels, counts })
    }

    pub fn record(&mut self, actual: usize, predicted: usize) {
        self.counts[actual][predicted] += 1;
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_total(&self, actual: usize) -> usize {
        self.counts[actual].iter().sum()
    }

    pub fn column_total(&self, predicted: usize) -> usize {
        self.counts.iter().map(|r| r[predicted]).sum()
    }

    pub fn accuracy(&self) -> Result<Probability, EvalError> {
        let total = self.nonempty_total()?;
        Ok(Probability::clamped(self.correct() as f64 / total))
    }

    fn nonempty_total(&self) -> Result<f64, EvalError> {
        match self.total() {
            0 => Err(EvalError::EmptyMatrix),
            t => Ok(t as f64),
        }
    }

    pub fn to_text(&self) -> String {
        let mut header = vec!["actual \\ predicted".to_string()];
        header.extend(self.labels.iter().cloned());
        let rows: Vec<Vec<String>> = self
            .labels
            .iter()
            .zip(&self.counts)
            .map(|(l, r)| std::iter::once(l.clone()).chain(r.iter().map(usize::to_string)).collect())
            .collect();
        table::render(&header, &rows)
    }
}

/// Cohen's kappa. Zero when chance agreement is already perfect.
pub fn kappa(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let total = cm.nonempty_total()?;
    let p_o = cm.correct() as f64 / total;
    let p_e: f64 = (0..cm.n_classes())
        .map(|i| cm.row_total(i) as f64 * cm.column_total(i) as f64)
        .sum::<f64>()
        / (total * total);
    if p_e >= 1.0 {
        return Ok(0.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    /// Number of instances whose actual class is this one.
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfTable {
    pub per_class: Vec<ClassMetrics>,
    /// Averages weighted by actual-class support.
    pub weighted: WeightedMetrics,
}

pub fn per_class_prf(cm: &ConfusionMatrix) -> Result<PrfTable, EvalError> {
    let total = cm.nonempty_total()?;
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let per_class: Vec<ClassMetrics> = (0..cm.n_classes())
        .map(|i| {
            let tp = cm.counts[i][i];
            let precision = ratio(tp, cm.column_total(i));
            let recall = ratio(tp, cm.row_total(i));
            ClassMetrics {
                label: cm.labels[i].clone(),
                precision,
                recall,
                f_measure: f_measure(precision, recall),
                support: cm.row_total(i),
            }
        })
        .collect();
    let avg = |f: fn(&ClassMetrics) -> f64| {
        per_class.iter().map(|m| f(m) * m.support as f64).sum::<f64>() / total
    };
    let weighted = WeightedMetrics {
        precision: avg(|m| m.precision),
        recall: avg(|m| m.recall),
        f_measure: avg(|m| m.f_measure),
    };
    Ok(PrfTable { per_class, weighted })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub mae: f64,
    pub rmse: f64,
    pub rae_percent: f64,
    pub rrse_percent: f64,
}

/// Running sums of absolute and squared probability errors for a predictor
/// and its prior baseline.
#[derive(Debug, Clone, Default)]
struct ErrorSums {
    entries: usize,
    abs: f64,
    sq: f64,
    base_abs: f64,
    base_sq: f64,
}

impl ErrorSums {
    fn add(&mut self, predicted: &ClassDistribution, baseline: &ClassDistribution, actual: usize) {
        for (c, (&p, &b)) in predicted.probs().iter().zip(baseline.probs()).enumerate() {
            let target = if c == actual { 1.0 } else { 0.0 };
            self.abs += (p - target).abs();
            self.sq += (p - target).powi(2);
            self.base_abs += (b - target).abs();
            self.base_sq += (b - target).powi(2);
        }
        self.entries += predicted.len();
    }

    fn finish(&self) -> Result<ErrorMetrics, EvalError> {
        if self.entries == 0 {
            return Err(EvalError::EmptyInput);
        }
        if self.base_abs == 0.0 || self.base_sq == 0.0 {
            return Err(EvalError::DegenerateBaseline);
        }
        let n = self.entries as f64;
        Ok(ErrorMetrics {
            mae: self.abs / n,
            rmse: (self.sq / n).sqrt(),
            rae_percent: 100.0 * self.abs / self.base_abs,
            rrse_percent: 100.0 * (self.sq / self.base_sq).sqrt(),
        })
    }
}

/// Probability-vector errors of `predictions` (distribution, actual class),
/// with relative errors taken against a predictor that always outputs
/// `priors`.
pub fn probabilistic_errors(
    predictions: &[(ClassDistribution, usize)],
    priors: &ClassDistribution,
) -> Result<ErrorMetrics, EvalError> {
    let mut sums = ErrorSums::default();
    for (p, actual) in predictions {
        sums.add(p, priors, *actual);
    }
    sums.finish()
}

/// Splits the instance indices of `ds` into `k` folds, each class dealt
/// round-robin over the folds after a seeded shuffle. The dealing position
/// carries over from one class to the next so fold sizes differ by at most
/// one. Each fold is sorted ascending.
pub fn stratified_k_fold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if ds.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    if k < 2 || k > ds.len() {
        return Err(EvalError::KOutOfRange { k, n: ds.len() });
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.n_classes()];
    for i in 0..ds.len() {
        by_class[ds.class_of(i)].push(i);
    }
    let mut rng = Lcg::new(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for members in &mut by_class {
        rng.shuffle(members);
        for &i in members.iter() {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    /// Evaluate folds on worker threads. Results are identical either way.
    pub parallel: bool,
}

impl CvConfig {
    pub fn new(folds: usize, seed: u64) -> Self {
        Self {
            folds,
            seed,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub algorithm: String,
    pub learner: LearnerSpec,
    pub fold_count: usize,
    pub seed: u64,
    pub instances: usize,
    pub correct: usize,
    pub accuracy: Probability,
    pub kappa: f64,
    #[serde(flatten)]
    pub errors: ErrorMetrics,
    pub per_class: Vec<ClassMetrics>,
    pub weighted: WeightedMetrics,
    pub confusion: ConfusionMatrix,
    pub warnings: Vec<String>,
}

struct HeldOut {
    distribution: ClassDistribution,
    baseline: ClassDistribution,
    predicted: usize,
    actual: usize,
}

fn run_fold(learner: &LearnerSpec, ds: &Dataset, test: &[usize]) -> Result<Vec<HeldOut>, EvalError> {
    let mut in_test = vec![false; ds.len()];
    for &i in test {
        in_test[i] = true;
    }
    let train_idx: Vec<usize> = (0..ds.len()).filter(|&i| !in_test[i]).collect();
    let train = ds.subset(&train_idx);
    let model = learner.fit(&train)?;
    let baseline = ClassDistribution::from_counts(&train.class_counts());
    test.iter()
        .map(|&i| {
            let x = &ds.instances()[i];
            Ok(HeldOut {
                distribution: model.predict_proba(x)?,
                baseline: baseline.clone(),
                predicted: model.predict(x)?,
                actual: ds.class_of(i),
            })
        })
        .collect()
}

fn run_folds(learner: &LearnerSpec, ds: &Dataset, folds: &[Vec<usize>], parallel: bool) -> Result<Vec<Vec<HeldOut>>, EvalError> {
    if !parallel {
        return folds.iter().map(|f| run_fold(learner, ds, f)).collect();
    }
    let workers = std::thread::available_parallelism().map_or(1, usize::from).min(folds.len());
    let per_worker = folds.len().div_ceil(workers);
    let chunks: Vec<Result<Vec<Vec<HeldOut>>, EvalError>> = std::thread::scope(|s| {
        let handles: Vec<_> = folds
            .chunks(per_worker)
            .map(|chunk| s.spawn(move || chunk.iter().map(|f| run_fold(learner, ds, f)).collect()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fold worker panicked"))
            .collect()
    });
    // chunks come back in fold order; the first error in that order wins
    let mut out = Vec::with_capacity(folds.len());
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}

/// `k`-fold stratified cross-validation of `learner` on `ds`.
pub fn cross_validate(learner: &LearnerSpec, ds: &Dataset, k: usize, seed: u64) -> Result<EvaluationReport, EvalError> {
    cross_validate_with(learner, ds, &CvConfig::new(k, seed))
}

pub fn cross_validate_with(learner: &LearnerSpec, ds: &Dataset, config: &CvConfig) -> Result<EvaluationReport, EvalError> {
    let folds = stratified_k_fold(ds, config.folds, config.seed)?;
    let mut warnings = Vec::new();
    for (label, &count) in ds.class_labels().iter().zip(&ds.class_counts()) {
        if count < config.folds {
            warnings.push(format!(
                "StratificationWarning: class `{label}` has {count} instances, fewer than {} folds",
                config.folds
            ));
        }
    }

    let results = run_folds(learner, ds, &folds, config.parallel)?;
    let mut cm = ConfusionMatrix::new(ds.class_labels().to_vec());
    let mut sums = ErrorSums::default();
    for h in results.iter().flatten() {
        cm.record(h.actual, h.predicted);
        sums.add(&h.distribution, &h.baseline, h.actual);
    }
    let prf = per_class_prf(&cm)?;
    Ok(EvaluationReport {
        algorithm: learner.name().to_string(),
        learner: learner.clone(),
        fold_count: config.folds,
        seed: config.seed,
        instances: cm.total(),
        correct: cm.correct(),
        accuracy: cm.accuracy()?,
        kappa: kappa(&cm)?,
        errors: sums.finish()?,
        per_class: prf.per_class,
        weighted: prf.weighted,
        confusion: cm,
        warnings,
    })
}

/// A report column to rank classifiers by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankBy {
    Accuracy,
    Kappa,
    Mae,
    Rmse,
    Rae,
    Rrse,
    WeightedF,
}

impl RankBy {
    pub const ALL: [RankBy; 7] = [
        RankBy::Accuracy,
        RankBy::Kappa,
        RankBy::Mae,
        RankBy::Rmse,
        RankBy::Rae,
        RankBy::Rrse,
        RankBy::WeightedF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RankBy::Accuracy => "accuracy",
            RankBy::Kappa => "kappa",
            RankBy::Mae => "mae",
            RankBy::Rmse => "rmse",
            RankBy::Rae => "rae",
            RankBy::Rrse => "rrse",
            RankBy::WeightedF => "f-measure",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name().eq_ignore_ascii_case(s.trim()))
    }

    pub fn value(self, r: &EvaluationReport) -> f64 {
        match self {
            RankBy::Accuracy => r.accuracy.value(),
            RankBy::Kappa => r.kappa,
            RankBy::Mae => r.errors.mae,
            RankBy::Rmse => r.errors.rmse,
            RankBy::Rae => r.errors.rae_percent,
            RankBy::Rrse => r.errors.rrse_percent,
            RankBy::WeightedF => r.weighted.f_measure,
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, RankBy::Accuracy | RankBy::Kappa | RankBy::WeightedF)
    }
}

/// Best first; equal scores keep their input order.
pub fn rank(reports: &[EvaluationReport], by: RankBy) -> Vec<&EvaluationReport> {
    let mut out: Vec<&EvaluationReport> = reports.iter().collect();
    out.sort_by(|a, b| {
        let ord = by.value(a).total_cmp(&by.value(b));
        if by.higher_is_better() {
            ord.reverse()
        } else {
            ord
        }
    });
    out
}

fn fixed(x: f64, places: usize) -> String {
    format!("{x:.places$}")
}

/// One row per report with the summary columns.
pub fn summary_text(reports: &[&EvaluationReport]) -> String {
    let header: Vec<String> = [
        "Algorithm",
        "Correctly Classified Instances %",
        "Kappa statistic",
        "Mean absolute error",
        "Root mean squared error",
        "Relative absolute error %",
        "Root relative squared error %",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.algorithm.clone(),
                format!("{} %", fixed(100.0 * r.accuracy.value(), 4)),
                fixed(r.kappa, 4),
                fixed(r.errors.mae, 4),
                fixed(r.errors.rmse, 4),
                format!("{} %", fixed(r.errors.rae_percent, 4)),
                format!("{} %", fixed(r.errors.rrse_percent, 4)),
            ]
        })
        .collect();
    table::render(&header, &rows)
}

/// Per-class precision, recall and F-measure with the weighted averages,
/// grouped by report.
pub fn class_metrics_text(reports: &[&EvaluationReport]) -> String {
    let header: Vec<String> = ["Algorithm", "Precision", "Recall", "F-Measure", "Class"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    for r in reports {
        for (i, m) in r.per_class.iter().enumerate() {
            let name = if i == 0 { r.algorithm.clone() } else { String::new() };
            rows.push(vec![name, fixed(m.precision, 3), fixed(m.recall, 3), fixed(m.f_measure, 3), m.label.clone()]);
        }
        rows.push(vec![
            String::new(),
            fixed(r.weighted.precision, 3),
            fixed(r.weighted.recall, 3),
            fixed(r.weighted.f_measure, 3),
            "Weighted Avg.".into(),
        ]);
    }
    table::render(&header, &rows)
}

/// Both grids, the confusion matrices and any warnings.
pub fn reports_text(reports: &[&EvaluationReport]) -> String {
    let mut out = String::new();
    if let Some(first) = reports.first() {
        let _ = writeln!(out, "Stratified {}-fold cross-validation, seed {}\n", first.fold_count, first.seed);
    }
    out.push_str(&summary_text(reports));
    out.push('\n');
    out.push_str(&class_metrics_text(reports));
    for r in reports {
        let _ = write!(out, "\nConfusion matrix, {}:\n{}", r.algorithm, r.confusion.to_text());
        for w in &r.warnings {
            let _ = writeln!(out, "{w}");
        }
    }
    out
}

/// One CSV row per (report, class) plus a weighted row per report, with the
/// summary metrics repeated on each row.
pub fn reports_csv(reports: &[&EvaluationReport]) -> String {
    let mut out = String::from(
        "algorithm,folds,seed,accuracy,kappa,mae,rmse,rae_percent,rrse_percent,class,precision,recall,f_measure,support\n",
    );
    for r in reports {
        let prefix = format!(
            "{},{},{},{},{},{},{},{},{}",
            r.algorithm,
            r.fold_count,
            r.seed,
            r.accuracy.value(),
            r.kappa,
            r.errors.mae,
            r.errors.rmse,
            r.errors.rae_percent,
            r.errors.rrse_percent
        );
        for m in &r.per_class {
            let _ = writeln!(out, "{prefix},{},{},{},{},{}", m.label, m.precision, m.recall, m.f_measure, m.support);
        }
        let _ = writeln!(
            out,
            "{prefix},Weighted Avg.,{},{},{},{}",
            r.weighted.precision, r.weighted.recall, r.weighted.f_measure, r.instances
        );
    }
    out
}
