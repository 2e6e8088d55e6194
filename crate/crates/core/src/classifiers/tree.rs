//! C4.5 decision-tree induction.
//!
//! Growth is top-down: at each node every usable attribute is scored by
//! information gain, candidates whose gain is below the mean gain of all
//! candidates are discarded, and the survivor with the highest gain ratio
//! becomes the test. Nominal attributes get one branch per value and are used
//! at most once on any path; numeric attributes get a binary `<=`/`>` test at
//! the midpoint between two adjacent distinct values.
//!
//! A node becomes a leaf when it is pure, when it holds fewer than
//! `2 * min_leaf` cases, or when no attribute can split it into at least two
//! branches of `min_leaf` cases. Zero-gain splits are still taken when they
//! are the only split available; otherwise a set like XOR could never be fit.
//!
//! Optional pruning replaces a subtree by a leaf when the leaf's pessimistic
//! error estimate (the upper confidence bound at `cf` on the binomial error
//! rate) is no worse than the subtree's.

use super::{entropy_of, require_fit_input, ClassDistribution, Classifier, ModelError, ModelSchema};
use crate::data::{AttributeKind, Dataset, Value};
use crate::special::normal_inv;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Minimum number of cases in at least two branches of any split.
    pub min_leaf: usize,
    pub prune: bool,
    /// Confidence level of the pessimistic error bound.
    pub cf: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            min_leaf: 2,
            prune: true,
            cf: 0.25,
        }
    }
}

impl TreeParams {
    fn validate(&self) -> Result<(), ModelError> {
        if self.min_leaf == 0 {
            return Err(ModelError::InvalidParams("min_leaf must be at least 1".into()));
        }
        if !(self.cf > 0.0 && self.cf <= 0.5) {
            return Err(ModelError::InvalidParams(format!(
                "cf must lie in (0, 0.5], got {}",
                self.cf
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        counts: Vec<usize>,
        distribution: ClassDistribution,
    },
    Nominal {
        attribute: usize,
        counts: Vec<usize>,
        branches: Vec<Node>,
    },
    Numeric {
        attribute: usize,
        threshold: f64,
        counts: Vec<usize>,
        le: Box<Node>,
        gt: Box<Node>,
    },
}

impl Node {
    /// Training class counts that reached this node.
    pub fn counts(&self) -> &[usize] {
        match self {
            Node::Leaf { counts, .. } | Node::Nominal { counts, .. } | Node::Numeric { counts, .. } => counts,
        }
    }

    pub fn n(&self) -> usize {
        self.counts().iter().sum()
    }

    /// Most frequent training class at this node (earliest on ties).
    pub fn majority(&self) -> usize {
        ClassDistribution::from_counts(self.counts()).argmax()
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }

    pub fn children(&self) -> Vec<&Node> {
        match self {
            Node::Leaf { .. } => Vec::new(),
            Node::Nominal { branches, .. } => branches.iter().collect(),
            Node::Numeric { le, gt, .. } => vec![le, gt],
        }
    }

    fn leaf(counts: Vec<usize>, fallback: &ClassDistribution) -> Node {
        let distribution = if counts.iter().any(|&c| c > 0) {
            ClassDistribution::from_counts(&counts)
        } else {
            fallback.clone()
        };
        Node::Leaf { counts, distribution }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub schema: ModelSchema,
    pub params: TreeParams,
    pub root: Node,
}

impl DecisionTreeModel {
    pub fn leaves(&self) -> Vec<&Node> {
        let mut out = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            if node.is_leaf() {
                out.push(node);
            } else {
                stack.extend(node.children().into_iter().rev());
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        fn depth(node: &Node) -> usize {
            node.children().into_iter().map(depth).max().map_or(0, |d| d + 1)
        }
        depth(&self.root)
    }

    pub fn attribute_name(&self, attribute: usize) -> &str {
        &self.schema.attributes[attribute].name
    }

    fn leaf_for(&self, x: &[Value]) -> &Node {
        let mut node = &self.root;
        loop {
            node = match node {
                Node::Leaf { .. } => return node,
                Node::Nominal { attribute, branches, .. } => {
                    &branches[x[*attribute].as_cat().expect("checked nominal")]
                }
                Node::Numeric { attribute, threshold, le, gt, .. } => {
                    if x[*attribute].as_num().expect("checked numeric") <= *threshold {
                        le
                    } else {
                        gt
                    }
                }
            };
        }
    }

    /// Indented rendering, one line per test, leaves annotated with
    /// `(cases/errors)`.
    pub fn to_text(&self) -> String {
        let labels = self.schema.class_labels();
        let mut out = String::new();
        if self.root.is_leaf() {
            let n = self.root.n();
            let _ = writeln!(out, ": {} ({}/{})", labels[self.root.majority()], n, n - self.root.counts()[self.root.majority()]);
            return out;
        }
        self.write_node(&self.root, 0, &mut out);
        out
    }

    fn write_node(&self, node: &Node, depth: usize, out: &mut String) {
        let labels = self.schema.class_labels();
        let indent = "|   ".repeat(depth);
        let mut branch = |cond: String, child: &Node| {
            if child.is_leaf() {
                let n = child.n();
                let errors = n - child.counts()[child.majority()];
                let _ = writeln!(out, "{indent}{cond}: {} ({n}/{errors})", labels[child.majority()]);
            } else {
                let _ = writeln!(out, "{indent}{cond}");
                self.write_node(child, depth + 1, out);
            }
        };
        match node {
            Node::Leaf { .. } => {}
            Node::Nominal { attribute, branches, .. } => {
                let attr = &self.schema.attributes[*attribute];
                let values = attr.values().expect("nominal");
                for (value, child) in values.iter().zip(branches) {
                    branch(format!("{} = {value}", attr.name), child);
                }
            }
            Node::Numeric { attribute, threshold, le, gt, .. } => {
                let name = self.attribute_name(*attribute);
                branch(format!("{name} <= {threshold}"), le);
                branch(format!("{name} > {threshold}"), gt);
            }
        }
    }
}

impl Classifier for DecisionTreeModel {
    fn schema(&self) -> &ModelSchema {
        &self.schema
    }

    fn predict_proba(&self, x: &[Value]) -> Result<ClassDistribution, ModelError> {
        self.schema.check(x)?;
        match self.leaf_for(x) {
            Node::Leaf { distribution, .. } => Ok(distribution.clone()),
            _ => unreachable!("leaf_for returns leaves"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Test {
    Nominal,
    Threshold(f64),
}

#[derive(Debug, Clone, Copy)]
struct Split {
    attribute: usize,
    gain: f64,
    split_info: f64,
    test: Test,
    /// Number of branches holding at least `min_leaf` cases.
    viable_branches: usize,
}

impl Split {
    fn ratio(&self) -> Option<f64> {
        (self.split_info > GAIN_EPS).then(|| self.gain / self.split_info)
    }
}

fn class_counts(ds: &Dataset, rows: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; ds.n_classes()];
    for &r in rows {
        counts[ds.class_of(r)] += 1;
    }
    counts
}

/// Gain and split information of partitioning `rows` into the given class
/// count tables.
fn partition_scores(parent: &[usize], branches: &[Vec<usize>]) -> (f64, f64) {
    let n: usize = parent.iter().sum();
    let nf = n as f64;
    let mut remainder = 0.0;
    let mut split_info = 0.0;
    for b in branches {
        let size: usize = b.iter().sum();
        if size == 0 {
            continue;
        }
        let w = size as f64 / nf;
        remainder += w * entropy_of(b, size as f64);
        split_info -= w * w.log2();
    }
    ((entropy_of(parent, nf) - remainder).max(0.0), split_info)
}

fn score_nominal(ds: &Dataset, rows: &[usize], attribute: usize, parent: &[usize], min_leaf: usize) -> Split {
    let n_values = ds.schema()[attribute].values().expect("nominal").len();
    let mut branches = vec![vec![0usize; ds.n_classes()]; n_values];
    for &r in rows {
        let v = ds.instances()[r][attribute].as_cat().expect("nominal");
        branches[v][ds.class_of(r)] += 1;
    }
    let (gain, split_info) = partition_scores(parent, &branches);
    let viable_branches = branches
        .iter()
        .filter(|b| b.iter().sum::<usize>() >= min_leaf)
        .count();
    Split {
        attribute,
        gain,
        split_info,
        test: Test::Nominal,
        viable_branches,
    }
}

/// Best binary threshold by information gain; `None` when no threshold leaves
/// `min_leaf` cases on both sides.
fn score_numeric(ds: &Dataset, rows: &[usize], attribute: usize, parent: &[usize], min_leaf: usize) -> Option<Split> {
    let mut sorted: Vec<(f64, usize)> = rows
        .iter()
        .map(|&r| (ds.instances()[r][attribute].as_num().expect("numeric"), ds.class_of(r)))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let mut left = vec![0usize; parent.len()];
    let mut best: Option<Split> = None;
    for i in 0..n.saturating_sub(1) {
        left[sorted[i].1] += 1;
        if sorted[i].0 == sorted[i + 1].0 {
            continue;
        }
        let n_left = i + 1;
        if n_left < min_leaf || n - n_left < min_leaf {
            continue;
        }
        let right: Vec<usize> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
        let (gain, split_info) = partition_scores(parent, &[left.clone(), right]);
        if best.is_none_or(|b| gain > b.gain + GAIN_EPS) {
            best = Some(Split {
                attribute,
                gain,
                split_info,
                test: Test::Threshold(0.5 * (sorted[i].0 + sorted[i + 1].0)),
                viable_branches: 2,
            });
        }
    }
    best
}

fn score(ds: &Dataset, rows: &[usize], attribute: usize, parent: &[usize], min_leaf: usize) -> Option<Split> {
    match ds.schema()[attribute].kind {
        AttributeKind::Numeric => score_numeric(ds, rows, attribute, parent, min_leaf),
        AttributeKind::Nominal(_) => Some(score_nominal(ds, rows, attribute, parent, min_leaf)),
        AttributeKind::Identifier => None,
    }
}

fn feature_index(ds: &Dataset, attr: &str) -> Result<usize, ModelError> {
    let idx = ds.attribute_index(attr)?;
    if !ds.schema()[idx].role.is_input() {
        return Err(ModelError::NotAFeature(attr.to_string()));
    }
    Ok(idx)
}

fn whole_set_split(ds: &Dataset, attr: &str) -> Result<Option<Split>, ModelError> {
    let idx = feature_index(ds, attr)?;
    if ds.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let rows: Vec<usize> = (0..ds.len()).collect();
    let parent = class_counts(ds, &rows);
    Ok(score(ds, &rows, idx, &parent, 1))
}

/// Information gain of splitting all of `ds` on `attr`. For numeric
/// attributes this is the best gain over all midpoint thresholds; a constant
/// numeric attribute has gain 0.
pub fn info_gain(ds: &Dataset, attr: &str) -> Result<f64, ModelError> {
    Ok(whole_set_split(ds, attr)?.map_or(0.0, |s| s.gain))
}

/// Gain ratio of the split [`info_gain`] scores. `None` when the split
/// information is zero, i.e. the attribute does not partition the data.
pub fn gain_ratio(ds: &Dataset, attr: &str) -> Result<Option<f64>, ModelError> {
    Ok(whole_set_split(ds, attr)?.and_then(|s| s.ratio()))
}

struct Grower<'a> {
    ds: &'a Dataset,
    inputs: Vec<usize>,
    min_leaf: usize,
}

impl Grower<'_> {
    fn choose(&self, rows: &[usize], parent: &[usize], used: &[bool]) -> Option<Split> {
        let candidates: Vec<Split> = self
            .inputs
            .iter()
            .filter(|&&a| !used[a])
            .filter_map(|&a| score(self.ds, rows, a, parent, self.min_leaf))
            .filter(|s| s.viable_branches >= 2 && s.ratio().is_some())
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let mean_gain = candidates.iter().map(|s| s.gain).sum::<f64>() / candidates.len() as f64;
        let mut best: Option<Split> = None;
        for s in candidates.iter().filter(|s| s.gain >= mean_gain - GAIN_EPS) {
            let ratio = s.ratio().expect("filtered");
            if best.is_none_or(|b| ratio > b.ratio().expect("filtered") + GAIN_EPS) {
                best = Some(*s);
            }
        }
        best
    }

    fn grow(&self, rows: &[usize], used: &mut Vec<bool>, fallback: &ClassDistribution) -> Node {
        let counts = class_counts(self.ds, rows);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || rows.len() < 2 * self.min_leaf {
            return Node::leaf(counts, fallback);
        }
        let Some(split) = self.choose(rows, &counts, used) else {
            return Node::leaf(counts, fallback);
        };
        let here = ClassDistribution::from_counts(&counts);
        let attr = split.attribute;
        match split.test {
            Test::Nominal => {
                let n_values = self.ds.schema()[attr].values().expect("nominal").len();
                let mut parts = vec![Vec::new(); n_values];
                for &r in rows {
                    parts[self.ds.instances()[r][attr].as_cat().expect("nominal")].push(r);
                }
                used[attr] = true;
                let branches = parts.iter().map(|p| self.grow(p, used, &here)).collect();
                used[attr] = false;
                Node::Nominal {
                    attribute: attr,
                    counts,
                    branches,
                }
            }
            Test::Threshold(threshold) => {
                let (le, gt): (Vec<usize>, Vec<usize>) = rows
                    .iter()
                    .partition(|&&r| self.ds.instances()[r][attr].as_num().expect("numeric") <= threshold);
                Node::Numeric {
                    attribute: attr,
                    threshold,
                    counts,
                    le: Box::new(self.grow(&le, used, &here)),
                    gt: Box::new(self.grow(&gt, used, &here)),
                }
            }
        }
    }
}

/// Upper-bound extra errors for `e` observed errors among `n` cases at
/// confidence `cf` (`coeff` is the squared normal deviate of `1 - cf`).
fn extra_errors(n: f64, e: f64, cf: f64, coeff: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if e < 1e-6 {
        n * (1.0 - (cf.ln() / n).exp())
    } else if e < 0.9999 {
        let base = n * (1.0 - (cf.ln() / n).exp());
        base + e * (extra_errors(n, 1.0, cf, coeff) - base)
    } else if e + 0.5 >= n {
        0.67 * (n - e)
    } else {
        let e5 = e + 0.5;
        let upper = (e5 + coeff / 2.0 + (coeff * (e5 * (1.0 - e5 / n) + coeff / 4.0)).sqrt()) / (n + coeff);
        n * upper - e
    }
}

fn leaf_errors(counts: &[usize]) -> (f64, f64) {
    let n: usize = counts.iter().sum();
    let max = counts.iter().copied().max().unwrap_or(0);
    (n as f64, (n - max) as f64)
}

fn estimated_errors(node: &Node, cf: f64, coeff: f64) -> f64 {
    if node.is_leaf() {
        let (n, e) = leaf_errors(node.counts());
        e + extra_errors(n, e, cf, coeff)
    } else {
        node.children().into_iter().map(|c| estimated_errors(c, cf, coeff)).sum()
    }
}

fn prune(node: Node, cf: f64, coeff: f64) -> Node {
    let node = match node {
        Node::Leaf { .. } => return node,
        Node::Nominal { attribute, counts, branches } => Node::Nominal {
            attribute,
            counts,
            branches: branches.into_iter().map(|b| prune(b, cf, coeff)).collect(),
        },
        Node::Numeric { attribute, threshold, counts, le, gt } => Node::Numeric {
            attribute,
            threshold,
            counts,
            le: Box::new(prune(*le, cf, coeff)),
            gt: Box::new(prune(*gt, cf, coeff)),
        },
    };
    let (n, e) = leaf_errors(node.counts());
    let as_leaf = e + extra_errors(n, e, cf, coeff);
    if as_leaf <= estimated_errors(&node, cf, coeff) + 0.1 {
        let counts = node.counts().to_vec();
        let distribution = ClassDistribution::from_counts(&counts);
        Node::Leaf { counts, distribution }
    } else {
        node
    }
}

pub fn c45_fit(ds: &Dataset, params: &TreeParams) -> Result<DecisionTreeModel, ModelError> {
    params.validate()?;
    let inputs = require_fit_input(ds)?;
    let grower = Grower {
        ds,
        inputs,
        min_leaf: params.min_leaf,
    };
    let rows: Vec<usize> = (0..ds.len()).collect();
    let mut used = vec![false; ds.schema().len()];
    let prior = ClassDistribution::from_counts(&ds.class_counts());
    let mut root = grower.grow(&rows, &mut used, &prior);
    if params.prune {
        let z = normal_inv(1.0 - params.cf);
        root = prune(root, params.cf, z * z);
    }
    Ok(DecisionTreeModel {
        schema: ModelSchema::of(ds),
        params: params.clone(),
        root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AttributeSpec, Role};

    fn nominal_ds(rows: &[(&[usize], usize)], arity: &[usize]) -> Dataset {
        let mut schema: Vec<AttributeSpec> = arity
            .iter()
            .enumerate()
            .map(|(i, &k)| AttributeSpec::nominal(format!("a{i}"), (0..k).map(|v| format!("v{v}")), Role::Feature))
            .collect();
        schema.push(AttributeSpec::nominal("class", ["p", "n"], Role::Class));
        let instances = rows
            .iter()
            .map(|(vals, c)| {
                let mut row: Vec<Value> = vals.iter().map(|&v| Value::Cat(v)).collect();
                row.push(Value::Cat(*c));
                row
            })
            .collect();
        Dataset::new(schema, instances).unwrap()
    }

    #[test]
    fn single_class_gives_single_leaf() {
        let ds = nominal_ds(&[(&[0], 1), (&[1], 1), (&[0], 1)], &[2]);
        let tree = c45_fit(&ds, &TreeParams::default()).unwrap();
        assert!(tree.root.is_leaf());
        let p = tree.predict_proba(&ds.instances()[0]).unwrap();
        assert_eq!(p.probs(), &[0.0, 1.0]);
    }

    #[test]
    fn perfect_nominal_predictor_gives_depth_one() {
        let rows: Vec<(&[usize], usize)> = vec![
            (&[0, 0], 0), (&[0, 1], 0), (&[0, 2], 0), (&[0, 0], 0),
            (&[1, 1], 1), (&[1, 2], 1), (&[1, 0], 1), (&[1, 1], 1),
        ];
        let ds = nominal_ds(&rows, &[2, 3]);
        let tree = c45_fit(&ds, &TreeParams::default()).unwrap();
        assert_eq!(tree.depth(), 1);
        assert!(matches!(tree.root, Node::Nominal { attribute: 0, .. }));
    }

    #[test]
    fn gain_of_perfect_and_constant_attributes() {
        let rows: Vec<(&[usize], usize)> = vec![(&[0, 1], 0), (&[0, 1], 0), (&[1, 1], 1), (&[1, 1], 0)];
        let ds = nominal_ds(&rows, &[2, 2]);
        assert_eq!(info_gain(&ds, "a1").unwrap(), 0.0);
        assert_eq!(gain_ratio(&ds, "a1").unwrap(), None);
        let perfect = nominal_ds(&[(&[0], 0), (&[1], 1), (&[0], 0)], &[2]);
        let h = entropy_of(&[2, 1], 3.0);
        assert!((info_gain(&perfect, "a0").unwrap() - h).abs() < 1e-15);
        assert!(matches!(info_gain(&perfect, "class"), Err(ModelError::NotAFeature(_))));
        assert!(info_gain(&perfect, "missing").is_err());
    }

    #[test]
    fn xor_is_fit_without_pruning() {
        let rows: Vec<(&[usize], usize)> = vec![(&[0, 0], 0), (&[0, 1], 1), (&[1, 0], 1), (&[1, 1], 0)];
        let ds = nominal_ds(&rows, &[2, 2]);
        let params = TreeParams { min_leaf: 1, prune: false, cf: 0.25 };
        let tree = c45_fit(&ds, &params).unwrap();
        for (i, row) in ds.instances().iter().enumerate() {
            assert_eq!(tree.predict(row).unwrap(), ds.class_of(i));
        }
    }

    #[test]
    fn numeric_threshold_is_a_midpoint() {
        let schema = vec![
            AttributeSpec::numeric("x", Role::Feature),
            AttributeSpec::nominal("c", ["a", "b"], Role::Class),
        ];
        let rows = [(1.0, 0), (2.0, 0), (3.0, 0), (10.0, 1), (11.0, 1), (12.0, 1)]
            .iter()
            .map(|&(x, c)| vec![Value::Num(x), Value::Cat(c)])
            .collect();
        let ds = Dataset::new(schema, rows).unwrap();
        let tree = c45_fit(&ds, &TreeParams::default()).unwrap();
        match &tree.root {
            Node::Numeric { threshold, le, gt, .. } => {
                assert_eq!(*threshold, 6.5);
                assert_eq!(le.counts(), &[3, 0]);
                assert_eq!(gt.counts(), &[0, 3]);
            }
            other => panic!("expected numeric split, got {other:?}"),
        }
        let text = tree.to_text();
        assert!(text.contains("x <= 6.5: a (3/0)"), "{text}");
    }

    #[test]
    fn pessimistic_error_bound_matches_reference_values() {
        // With no observed errors the bound solves (1 - p)^n = cf.
        let z = normal_inv(0.75);
        let coeff = z * z;
        let got = extra_errors(6.0, 0.0, 0.25, coeff);
        assert!((got - 6.0 * (1.0 - 0.25f64.powf(1.0 / 6.0))).abs() < 1e-12);
        // Normal-approximation branch, n = 14, e = 5.
        let e5 = 5.5;
        let want = 14.0 * (e5 + coeff / 2.0 + (coeff * (e5 * (1.0 - e5 / 14.0) + coeff / 4.0)).sqrt()) / (14.0 + coeff) - 5.0;
        assert!((extra_errors(14.0, 5.0, 0.25, coeff) - want).abs() < 1e-12);
        assert_eq!(extra_errors(0.0, 0.0, 0.25, coeff), 0.0);
    }

    #[test]
    fn pruning_collapses_noise_splits() {
        // Class is independent of the attribute; the grown split is not worth keeping.
        let rows: Vec<(&[usize], usize)> = vec![
            (&[0], 0), (&[0], 0), (&[0], 0), (&[0], 1),
            (&[1], 0), (&[1], 0), (&[1], 1), (&[1], 0),
        ];
        let ds = nominal_ds(&rows, &[2]);
        let pruned = c45_fit(&ds, &TreeParams::default()).unwrap();
        assert!(pruned.root.is_leaf());
    }

    #[test]
    fn rejects_bad_input() {
        let ds = nominal_ds(&[], &[2]);
        assert_eq!(c45_fit(&ds, &TreeParams::default()).unwrap_err(), ModelError::EmptyDataset);
        let ds = nominal_ds(&[(&[0], 0)], &[2]).exclude(&["a0"]).unwrap();
        assert_eq!(c45_fit(&ds, &TreeParams::default()).unwrap_err(), ModelError::NoFeatures);
        let ds = nominal_ds(&[(&[0], 0)], &[2]);
        let bad = TreeParams { cf: 0.9, ..TreeParams::default() };
        assert!(matches!(c45_fit(&ds, &bad), Err(ModelError::InvalidParams(_))));
        let tree = c45_fit(&ds, &TreeParams::default()).unwrap();
        assert!(matches!(tree.predict_proba(&[Value::Num(1.0), Value::Cat(0)]), Err(ModelError::SchemaMismatch(_))));
    }
}
