//! k-nearest-neighbour classification by linear scan.
//!
//! Distance is Euclidean over the input attributes: numeric differences are
//! divided by the training range of the attribute (min-max normalization,
//! optional), nominal attributes contribute 0 on a match and 1 on a mismatch.
//! An attribute that is constant in the training data contributes nothing
//! when normalizing.

use super::{require_fit_input, ClassDistribution, Classifier, ModelError, ModelSchema};
use crate::data::{AttributeKind, Dataset, Instance, Value};
use serde::{Deserialize, Serialize};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub schema: ModelSchema,
    pub k: usize,
    pub normalize: bool,
    /// Training `(min, max)` per schema attribute, for numeric inputs only.
    pub ranges: Vec<Option<(f64, f64)>>,
    pub instances: Vec<Instance>,
    pub classes: Vec<usize>,
}

pub fn knn_fit(ds: &Dataset, k: usize) -> Result<KnnModel, ModelError> {
    knn_fit_with(ds, k, true)
}

pub fn knn_fit_with(ds: &Dataset, k: usize, normalize: bool) -> Result<KnnModel, ModelError> {
    if k == 0 {
        return Err(ModelError::InvalidParams("k must be at least 1".into()));
    }
    let inputs = require_fit_input(ds)?;
    if k > ds.len() {
        return Err(ModelError::KTooLarge { k, n: ds.len() });
    }
    let mut ranges = vec![None; ds.schema().len()];
    for &a in &inputs {
        if matches!(ds.schema()[a].kind, AttributeKind::Numeric) {
            ranges[a] = ds.instances().iter().map(|r| r[a].as_num().expect("numeric")).fold(
                None,
                |acc: Option<(f64, f64)>, v| Some(acc.map_or((v, v), |(lo, hi)| (lo.min(v), hi.max(v)))),
            );
        }
    }
    Ok(KnnModel {
        schema: ModelSchema::of(ds),
        k,
        normalize,
        ranges,
        instances: ds.instances().to_vec(),
        classes: (0..ds.len()).map(|i| ds.class_of(i)).collect(),
    })
}

/// Distance between two instances under the model's normalization.
pub fn knn_distance(m: &KnnModel, a: &[Value], b: &[Value]) -> Result<f64, ModelError> {
    m.schema.check(a)?;
    m.schema.check(b)?;
    Ok(m.distance(a, b))
}

impl KnnModel {
    fn distance(&self, a: &[Value], b: &[Value]) -> f64 {
        let mut sum = 0.0;
        for (i, attr) in self.schema.attributes.iter().enumerate() {
            if !attr.role.is_input() {
                continue;
            }
            let term = match (&a[i], &b[i]) {
                (Value::Num(x), Value::Num(y)) => {
                    let d = x - y;
                    if self.normalize {
                        match self.ranges[i] {
                            Some((lo, hi)) if hi > lo => d / (hi - lo),
                            _ => 0.0,
                        }
                    } else {
                        d
                    }
                }
                (Value::Cat(x), Value::Cat(y)) => f64::from(u8::from(x != y)),
                _ => 0.0,
            };
            sum += term * term;
        }
        sum.sqrt()
    }

    /// The `k` nearest training instances as `(training index, distance)`,
    /// nearest first; equal distances keep training order.
    pub fn neighbors(&self, x: &[Value]) -> Result<Vec<(usize, f64)>, ModelError> {
        self.schema.check(x)?;
        let mut all: Vec<(usize, f64)> = self
            .instances
            .iter()
            .enumerate()
            .map(|(i, row)| (i, self.distance(x, row)))
            .collect();
        all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        all.truncate(self.k);
        Ok(all)
    }

    fn votes(&self, neighbors: &[(usize, f64)]) -> (Vec<usize>, Vec<f64>) {
        let n_classes = self.schema.n_classes();
        let mut votes = vec![0usize; n_classes];
        let mut closeness = vec![0.0; n_classes];
        for &(i, d) in neighbors {
            let c = self.classes[i];
            votes[c] += 1;
            closeness[c] += if d == 0.0 { f64::INFINITY } else { 1.0 / d };
        }
        (votes, closeness)
    }
}

impl Classifier for KnnModel {
    fn schema(&self) -> &ModelSchema {
        &self.schema
    }

    /// Vote shares of the `k` nearest neighbours.
    fn predict_proba(&self, x: &[Value]) -> Result<ClassDistribution, ModelError> {
        let (votes, _) = self.votes(&self.neighbors(x)?);
        Ok(ClassDistribution::from_counts(&votes))
    }

    /// Majority vote; ties go to the larger summed inverse distance, then to
    /// the earlier class.
    fn predict(&self, x: &[Value]) -> Result<usize, ModelError> {
        let (votes, closeness) = self.votes(&self.neighbors(x)?);
        let mut best = 0;
        for c in 1..votes.len() {
            if votes[c] > votes[best] || (votes[c] == votes[best] && closeness[c] > closeness[best]) {
                best = c;
            }
        }
        Ok(best)
    }
}
