//! Classifiers behind a common interface: fit on a [`Dataset`], then predict
//! a class distribution for an instance.
//!
//! Fitted models own a copy of the schema they were trained on and are
//! immutable, so they can be shared across threads for prediction.

pub mod bayes;
pub mod knn;
pub mod tree;

use crate::data::{check_value, AttributeSpec, DataError, Dataset, Value};
use serde::{Deserialize, Serialize};

pub use bayes::{nb_fit, NaiveBayesModel};
pub use knn::{knn_distance, knn_fit, KnnModel, DEFAULT_K};
pub use tree::{c45_fit, gain_ratio, info_gain, DecisionTreeModel, Node, TreeParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("dataset has no instances")]
    EmptyDataset,
    #[error("dataset has no feature attributes")]
    NoFeatures,
    #[error("no class counts given")]
    EmptyInput,
    #[error("k = {k} exceeds the {n} training instances")]
    KTooLarge { k: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("`{0}` is not a feature attribute")]
    NotAFeature(String),
    #[error("instance does not match the model schema: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Per-class probabilities in schema class order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassDistribution(Vec<f64>);

impl ClassDistribution {
    /// Normalizes non-negative weights. All-zero weights give the uniform
    /// distribution.
    pub fn from_weights(weights: Vec<f64>) -> Self {
        debug_assert!(weights.iter().all(|w| *w >= 0.0));
        let total: f64 = weights.iter().sum();
        if total > 0.0 && total.is_finite() {
            Self(weights.into_iter().map(|w| w / total).collect())
        } else {
            Self::uniform(weights.len())
        }
    }

    pub fn from_counts(counts: &[usize]) -> Self {
        Self::from_weights(counts.iter().map(|&c| c as f64).collect())
    }

    /// Normalizes unnormalized log-weights with the log-sum-exp shift.
    pub fn from_log_weights(log_weights: &[f64]) -> Self {
        let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Self::uniform(log_weights.len());
        }
        Self::from_weights(log_weights.iter().map(|l| (l - max).exp()).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn one_hot(n: usize, class: usize) -> Self {
        let mut p = vec![0.0; n];
        p[class] = 1.0;
        Self(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Most probable class; ties go to the earliest class.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn max_probability(&self) -> f64 {
        self.0[self.argmax()]
    }
}

/// Class entropy in bits. Zero counts contribute nothing.
pub fn entropy(class_counts: &[usize]) -> Result<f64, ModelError> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(ModelError::EmptyInput);
    }
    Ok(entropy_of(class_counts, total as f64))
}

pub(crate) fn entropy_of(counts: &[usize], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * p.log2()
        })
        .sum::<f64>()
}

/// The attributes a model was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSchema {
    pub attributes: Vec<AttributeSpec>,
    pub class_index: usize,
}

impl ModelSchema {
    pub(crate) fn of(ds: &Dataset) -> Self {
        Self {
            attributes: ds.schema().to_vec(),
            class_index: ds.class_index(),
        }
    }

    pub fn class_labels(&self) -> &[String] {
        self.attributes[self.class_index]
            .values()
            .expect("class attribute is nominal")
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels().len()
    }

    pub fn input_indices(&self) -> Vec<usize> {
        self.attributes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.role.is_input())
            .map(|(i, _)| i)
            .collect()
    }

    /// Checks every non-class slot of `x` against the schema.
    pub fn check(&self, x: &[Value]) -> Result<(), ModelError> {
        if x.len() != self.attributes.len() {
            return Err(ModelError::SchemaMismatch(format!(
                "expected {} values, found {}",
                self.attributes.len(),
                x.len()
            )));
        }
        for (i, (attr, value)) in self.attributes.iter().zip(x).enumerate() {
            if i != self.class_index {
                check_value(attr, value).map_err(ModelError::SchemaMismatch)?;
            }
        }
        Ok(())
    }

    /// Checks that `ds` has exactly this schema.
    pub fn check_dataset(&self, ds: &Dataset) -> Result<(), ModelError> {
        if ds.schema() != self.attributes.as_slice() {
            return Err(ModelError::SchemaMismatch(
                "dataset schema differs from the training schema".into(),
            ));
        }
        Ok(())
    }
}

pub trait Classifier: Send + Sync {
    fn schema(&self) -> &ModelSchema;

    fn predict_proba(&self, x: &[Value]) -> Result<ClassDistribution, ModelError>;

    fn predict(&self, x: &[Value]) -> Result<usize, ModelError> {
        Ok(self.predict_proba(x)?.argmax())
    }
}

/// Always predicts the training class proportions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorModel {
    pub schema: ModelSchema,
    pub priors: ClassDistribution,
}

/// Unsmoothed class proportions of `ds`.
pub fn class_priors(ds: &Dataset) -> Result<ClassDistribution, ModelError> {
    if ds.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    Ok(ClassDistribution::from_counts(&ds.class_counts()))
}

pub fn prior_fit(ds: &Dataset) -> Result<PriorModel, ModelError> {
    Ok(PriorModel {
        schema: ModelSchema::of(ds),
        priors: class_priors(ds)?,
    })
}

impl Classifier for PriorModel {
    fn schema(&self) -> &ModelSchema {
        &self.schema
    }

    fn predict_proba(&self, x: &[Value]) -> Result<ClassDistribution, ModelError> {
        self.schema.check(x)?;
        Ok(self.priors.clone())
    }
}

/// Which learner to fit, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum LearnerSpec {
    C45(TreeParams),
    NaiveBayes,
    Knn { k: usize, normalize: bool },
    Prior,
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::C45(_) => "C4.5",
            LearnerSpec::NaiveBayes => "NaiveBayes",
            LearnerSpec::Knn { .. } => "K-nearest neighbour",
            LearnerSpec::Prior => "Prior",
        }
    }

    pub fn fit(&self, ds: &Dataset) -> Result<Model, ModelError> {
        Ok(match self {
            LearnerSpec::C45(params) => Model::C45(c45_fit(ds, params)?),
            LearnerSpec::NaiveBayes => Model::NaiveBayes(nb_fit(ds)?),
            LearnerSpec::Knn { k, normalize } => {
                Model::Knn(knn::knn_fit_with(ds, *k, *normalize)?)
            }
            LearnerSpec::Prior => Model::Prior(prior_fit(ds)?),
        })
    }
}

/// Any fitted model; the unit of JSON model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Model {
    C45(DecisionTreeModel),
    NaiveBayes(NaiveBayesModel),
    Knn(KnnModel),
    Prior(PriorModel),
}

impl Model {
    fn inner(&self) -> &dyn Classifier {
        match self {
            Model::C45(m) => m,
            Model::NaiveBayes(m) => m,
            Model::Knn(m) => m,
            Model::Prior(m) => m,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::C45(_) => "C4.5",
            Model::NaiveBayes(_) => "NaiveBayes",
            Model::Knn(_) => "K-nearest neighbour",
            Model::Prior(_) => "Prior",
        }
    }

    pub fn as_tree(&self) -> Option<&DecisionTreeModel> {
        match self {
            Model::C45(m) => Some(m),
            _ => None,
        }
    }
}

impl Classifier for Model {
    fn schema(&self) -> &ModelSchema {
        self.inner().schema()
    }

    fn predict_proba(&self, x: &[Value]) -> Result<ClassDistribution, ModelError> {
        self.inner().predict_proba(x)
    }

    fn predict(&self, x: &[Value]) -> Result<usize, ModelError> {
        self.inner().predict(x)
    }
}

pub(crate) fn require_fit_input(ds: &Dataset) -> Result<Vec<usize>, ModelError> {
    if ds.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let inputs = ds.input_indices();
    if inputs.is_empty() {
        return Err(ModelError::NoFeatures);
    }
    Ok(inputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[5, 5]).unwrap(), 1.0);
        assert_eq!(entropy(&[10, 0]).unwrap(), 0.0);
        let p: f64 = 9.0 / 14.0;
        let q: f64 = 5.0 / 14.0;
        let want = -(p * p.log2() + q * q.log2());
        assert!((entropy(&[9, 5]).unwrap() - want).abs() < 1e-15);
        assert!((entropy(&[9, 5]).unwrap() - 0.9403).abs() < 5e-5);
        assert_eq!(entropy(&[0, 0]), Err(ModelError::EmptyInput));
    }

    #[test]
    fn distribution_helpers() {
        let d = ClassDistribution::from_counts(&[1, 3]);
        assert_eq!(d.probs(), &[0.25, 0.75]);
        assert_eq!(d.argmax(), 1);
        assert_eq!(ClassDistribution::from_weights(vec![0.0, 0.0]).probs(), &[0.5, 0.5]);
        assert_eq!(ClassDistribution::uniform(4).argmax(), 0);
        let d = ClassDistribution::from_log_weights(&[-1000.0, -1000.0 + 2f64.ln()]);
        assert!((d.probs()[1] - 2.0 / 3.0).abs() < 1e-12);
    }
}
