//! Naive Bayes with add-one smoothed class priors and nominal likelihoods,
//! and per-class Gaussian likelihoods for numeric attributes. Posteriors are
//! accumulated in log space.

use super::{require_fit_input, ClassDistribution, Classifier, ModelError, ModelSchema};
use crate::data::{AttributeKind, Dataset, Value};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Variance floor as a fraction of the squared attribute range.
const VARIANCE_FLOOR_FRACTION: f64 = 1e-9;
/// Floor used when an attribute is constant in the training data.
const MIN_VARIANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Likelihood {
    /// `table[class][value]`, each row summing to 1.
    Nominal { attribute: usize, table: Vec<Vec<f64>> },
    Gaussian {
        attribute: usize,
        means: Vec<f64>,
        variances: Vec<f64>,
    },
}

impl Likelihood {
    fn log_density(&self, class: usize, x: &[Value]) -> f64 {
        match self {
            Likelihood::Nominal { attribute, table } => {
                table[class][x[*attribute].as_cat().expect("checked nominal")].ln()
            }
            Likelihood::Gaussian { attribute, means, variances } => {
                let v = x[*attribute].as_num().expect("checked numeric");
                let var = variances[class];
                -0.5 * (2.0 * PI * var).ln() - (v - means[class]).powi(2) / (2.0 * var)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub schema: ModelSchema,
    pub priors: Vec<f64>,
    pub likelihoods: Vec<Likelihood>,
}

impl NaiveBayesModel {
    /// Unnormalized log posteriors, `ln P(i) + Σ ln f(x_k | i)`.
    pub fn log_joint(&self, x: &[Value]) -> Result<Vec<f64>, ModelError> {
        self.schema.check(x)?;
        Ok((0..self.priors.len())
            .map(|c| {
                self.priors[c].ln()
                    + self.likelihoods.iter().map(|l| l.log_density(c, x)).sum::<f64>()
            })
            .collect())
    }
}

impl Classifier for NaiveBayesModel {
    fn schema(&self) -> &ModelSchema {
        &self.schema
    }

    fn predict_proba(&self, x: &[Value]) -> Result<ClassDistribution, ModelError> {
        Ok(ClassDistribution::from_log_weights(&self.log_joint(x)?))
    }
}

pub fn nb_fit(ds: &Dataset) -> Result<NaiveBayesModel, ModelError> {
    let inputs = require_fit_input(ds)?;
    let n_classes = ds.n_classes();
    let class_counts = ds.class_counts();
    let n = ds.len() as f64;
    let priors = class_counts
        .iter()
        .map(|&c| (c as f64 + 1.0) / (n + n_classes as f64))
        .collect();

    let mut likelihoods = Vec::with_capacity(inputs.len());
    for attr in inputs {
        let likelihood = match &ds.schema()[attr].kind {
            AttributeKind::Nominal(values) => {
                let mut counts = vec![vec![0usize; values.len()]; n_classes];
                for (i, row) in ds.instances().iter().enumerate() {
                    counts[ds.class_of(i)][row[attr].as_cat().expect("nominal")] += 1;
                }
                let table = counts
                    .iter()
                    .zip(&class_counts)
                    .map(|(row, &total)| {
                        row.iter()
                            .map(|&c| (c as f64 + 1.0) / (total as f64 + values.len() as f64))
                            .collect()
                    })
                    .collect();
                Likelihood::Nominal { attribute: attr, table }
            }
            AttributeKind::Numeric => gaussian(ds, attr, n_classes),
            AttributeKind::Identifier => continue,
        };
        likelihoods.push(likelihood);
    }
    Ok(NaiveBayesModel {
        schema: ModelSchema::of(ds),
        priors,
        likelihoods,
    })
}

fn gaussian(ds: &Dataset, attr: usize, n_classes: usize) -> Likelihood {
    let mut per_class: Vec<Vec<f64>> = vec![Vec::new(); n_classes];
    for (i, row) in ds.instances().iter().enumerate() {
        per_class[ds.class_of(i)].push(row[attr].as_num().expect("numeric"));
    }
    let all: Vec<f64> = per_class.iter().flatten().copied().collect();
    let (lo, hi) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    let floor = (VARIANCE_FLOOR_FRACTION * range * range).max(MIN_VARIANCE);
    let (overall_mean, overall_var) = mean_var(&all);

    let mut means = Vec::with_capacity(n_classes);
    let mut variances = Vec::with_capacity(n_classes);
    for values in &per_class {
        // A class absent from the training data falls back to the pooled
        // estimate, which makes the attribute uninformative for it.
        let (m, v) = if values.is_empty() {
            (overall_mean, overall_var)
        } else {
            mean_var(values)
        };
        means.push(m);
        variances.push(v.max(floor));
    }
    Likelihood::Gaussian {
        attribute: attr,
        means,
        variances,
    }
}

/// Mean and sample variance; a single value has variance 0.
fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
