//! Decision-tree paths as readable advising rules.

use crate::classifiers::{DecisionTreeModel, Node};
use crate::data::Value;
use crate::special::Probability;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Gt => ">",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConditionValue {
    Threshold(f64),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub attribute: String,
    /// Position of the attribute in the tree's schema.
    pub attribute_index: usize,
    pub relation: Relation,
    pub value: ConditionValue,
    /// Value index for `=` conditions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_index: Option<usize>,
}

impl Condition {
    pub fn holds(&self, x: &[Value]) -> bool {
        match (self.relation, &self.value, &x[self.attribute_index]) {
            (Relation::Eq, _, Value::Cat(v)) => Some(*v) == self.value_index,
            (Relation::Le, ConditionValue::Threshold(t), Value::Num(v)) => v <= t,
            (Relation::Gt, ConditionValue::Threshold(t), Value::Num(v)) => v > t,
            _ => false,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            ConditionValue::Threshold(t) => write!(f, "{} {} {}", self.attribute, self.relation, t),
            ConditionValue::Label(l) => write!(f, "{} {} {}", self.attribute, self.relation, l),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvisingRule {
    /// Root-to-leaf tests, root first.
    pub conditions: Vec<Condition>,
    pub class_attribute: String,
    pub conclusion: String,
    pub conclusion_index: usize,
    /// Training instances reaching the leaf.
    pub support: usize,
    /// Share of the supporting instances in the concluded class.
    pub confidence: Probability,
}

impl AdvisingRule {
    pub fn matches(&self, x: &[Value]) -> bool {
        self.conditions.iter().all(|c| c.holds(x))
    }

    pub fn conditions_on(&self, attribute: &str) -> bool {
        self.conditions.iter().any(|c| c.attribute == attribute)
    }
}

impl fmt::Display for AdvisingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("IF ")?;
        if self.conditions.is_empty() {
            f.write_str("TRUE")?;
        }
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{c}")?;
        }
        write!(
            f,
            " THEN {} = {} (support {}, confidence {:.3})",
            self.class_attribute,
            self.conclusion,
            self.support,
            self.confidence.value()
        )
    }
}

/// One rule per leaf that training instances reach, most supported first.
/// Leaves with equal support keep left-to-right tree order.
pub fn extract_rules(tree: &DecisionTreeModel) -> Vec<AdvisingRule> {
    let mut rules = Vec::new();
    let mut path = Vec::new();
    walk(tree, &tree.root, &mut path, &mut rules);
    rules.sort_by_key(|r| std::cmp::Reverse(r.support));
    rules
}

fn walk(tree: &DecisionTreeModel, node: &Node, path: &mut Vec<Condition>, out: &mut Vec<AdvisingRule>) {
    match node {
        Node::Leaf { counts, .. } => {
            let support: usize = counts.iter().sum();
            if support == 0 {
                return;
            }
            let class = node.majority();
            let class_attr = &tree.schema.attributes[tree.schema.class_index];
            out.push(AdvisingRule {
                conditions: path.clone(),
                class_attribute: class_attr.name.clone(),
                conclusion: tree.schema.class_labels()[class].clone(),
                conclusion_index: class,
                support,
                confidence: Probability::clamped(counts[class] as f64 / support as f64),
            });
        }
        Node::Nominal { attribute, branches, .. } => {
            let spec = &tree.schema.attributes[*attribute];
            let labels = spec.values().expect("nominal split");
            for (v, child) in branches.iter().enumerate() {
                path.push(Condition {
                    attribute: spec.name.clone(),
                    attribute_index: *attribute,
                    relation: Relation::Eq,
                    value: ConditionValue::Label(labels[v].clone()),
                    value_index: Some(v),
                });
                walk(tree, child, path, out);
                path.pop();
            }
        }
        Node::Numeric { attribute, threshold, le, gt, .. } => {
            for (relation, child) in [(Relation::Le, le), (Relation::Gt, gt)] {
                path.push(Condition {
                    attribute: tree.attribute_name(*attribute).to_string(),
                    attribute_index: *attribute,
                    relation,
                    value: ConditionValue::Threshold(*threshold),
                    value_index: None,
                });
                walk(tree, child, path, out);
                path.pop();
            }
        }
    }
}

pub fn rules_text(rules: &[AdvisingRule]) -> String {
    rules.iter().enumerate().map(|(i, r)| format!("{:>3}. {r}\n", i + 1)).collect()
}

pub fn rules_csv(rules: &[AdvisingRule]) -> String {
    let mut out = String::from("rank,conditions,conclusion,support,confidence\n");
    for (i, r) in rules.iter().enumerate() {
        let conds: Vec<String> = r.conditions.iter().map(Condition::to_string).collect();
        out.push_str(&format!(
            "{},\"{}\",{},{},{}\n",
            i + 1,
            conds.join(" AND ").replace('"', "\"\""),
            r.conclusion,
            r.support,
            r.confidence.value()
        ));
    }
    out
}
