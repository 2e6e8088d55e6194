//! Typed tabular datasets: attribute schema, instances and the designated
//! class attribute. The student-cohort schema and its CSV dialect live in
//! [`cohort`].

pub mod cohort;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

pub use cohort::{
    cohort_schema, derive_diff, gpa_band, parse_cohort_csv, parse_cohort_records,
    write_cohort_csv, AdStatus, Gender, GpaBand, LearningStatus, PlanOfStudy, RawStudentRecord,
    StudentRecord,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}, column {column}: {message}")]
    Value {
        line: usize,
        column: String,
        message: String,
    },
    #[error("gained hours ({gain}) exceed registered hours ({reg})")]
    NegativeDiff { reg: u32, gain: u32 },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{0}` is not nominal")]
    NotNominal(String),
    #[error("attribute `{0}` is not numeric")]
    NotNumeric(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("instance {index}: {message}")]
    InvalidInstance { index: usize, message: String },
    #[error("dataset has no instances")]
    EmptyDataset,
    #[error("invalid dataset document: {0}")]
    Document(String),
}

/// Value domain of an attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Numeric,
    Nominal(Vec<String>),
    /// Opaque identifier text, never used as a feature.
    Identifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Id,
    Feature,
    Class,
    Derived,
}

impl Role {
    /// Whether learners consume attributes with this role.
    pub fn is_input(self) -> bool {
        matches!(self, Role::Feature | Role::Derived)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
    pub role: Role,
}

impl AttributeSpec {
    pub fn numeric(name: impl Into<String>, role: Role) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Numeric,
            role,
        }
    }

    pub fn nominal<S: Into<String>>(
        name: impl Into<String>,
        values: impl IntoIterator<Item = S>,
        role: Role,
    ) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Nominal(values.into_iter().map(Into::into).collect()),
            role,
        }
    }

    pub fn identifier(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Identifier,
            role: Role::Id,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttributeKind::Numeric)
    }

    /// Value labels of a nominal attribute.
    pub fn values(&self) -> Option<&[String]> {
        match &self.kind {
            AttributeKind::Nominal(values) => Some(values),
            _ => None,
        }
    }

    /// Index of `label` in a nominal attribute's value list.
    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.values()?.iter().position(|v| v == label)
    }

    fn validate(&self) -> Result<(), DataError> {
        if self.name.is_empty() {
            return Err(DataError::InvalidSchema("empty attribute name".into()));
        }
        match (&self.kind, self.role) {
            (AttributeKind::Nominal(values), _) => {
                if values.is_empty() {
                    return Err(DataError::InvalidSchema(format!(
                        "nominal attribute `{}` has an empty value list",
                        self.name
                    )));
                }
                let mut seen = HashSet::new();
                if let Some(dup) = values.iter().find(|v| !seen.insert(v.as_str())) {
                    return Err(DataError::InvalidSchema(format!(
                        "nominal attribute `{}` lists `{dup}` twice",
                        self.name
                    )));
                }
            }
            (AttributeKind::Identifier, role) if role != Role::Id => {
                return Err(DataError::InvalidSchema(format!(
                    "identifier attribute `{}` must have role id",
                    self.name
                )));
            }
            _ => {}
        }
        if self.role == Role::Class && self.values().is_none() {
            return Err(DataError::InvalidSchema(format!(
                "class attribute `{}` must be nominal",
                self.name
            )));
        }
        Ok(())
    }
}

/// One cell of an instance. Nominal values are stored as indices into the
/// attribute's value list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Num(f64),
    Cat(usize),
    Text(String),
}

impl Value {
    pub fn as_num(&self) -> Option<f64> {
        match *self {
            Value::Num(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_cat(&self) -> Option<usize> {
        match *self {
            Value::Cat(i) => Some(i),
            _ => None,
        }
    }
}

pub type Instance = Vec<Value>;

/// Checks that `value` fits `attr`; returns a description of the mismatch.
pub(crate) fn check_value(attr: &AttributeSpec, value: &Value) -> Result<(), String> {
    match (&attr.kind, value) {
        (AttributeKind::Numeric, Value::Num(x)) if x.is_finite() => Ok(()),
        (AttributeKind::Numeric, Value::Num(x)) => {
            Err(format!("`{}` holds non-finite value {x}", attr.name))
        }
        (AttributeKind::Nominal(values), Value::Cat(i)) if *i < values.len() => Ok(()),
        (AttributeKind::Nominal(values), Value::Cat(i)) => Err(format!(
            "`{}` value index {i} outside its {} labels",
            attr.name,
            values.len()
        )),
        (AttributeKind::Identifier, Value::Text(_)) => Ok(()),
        _ => Err(format!("`{}` holds a value of the wrong kind", attr.name)),
    }
}

/// Schema plus instances. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetDocument", into = "DatasetDocument")]
pub struct Dataset {
    schema: Vec<AttributeSpec>,
    instances: Vec<Instance>,
    class_index: usize,
}

impl Dataset {
    pub fn new(schema: Vec<AttributeSpec>, instances: Vec<Instance>) -> Result<Self, DataError> {
        let class_index = validate_schema(&schema)?;
        for (index, instance) in instances.iter().enumerate() {
            if instance.len() != schema.len() {
                return Err(DataError::InvalidInstance {
                    index,
                    message: format!(
                        "expected {} values, found {}",
                        schema.len(),
                        instance.len()
                    ),
                });
            }
            for (attr, value) in schema.iter().zip(instance) {
                check_value(attr, value)
                    .map_err(|message| DataError::InvalidInstance { index, message })?;
            }
        }
        Ok(Self {
            schema,
            instances,
            class_index,
        })
    }

    pub fn schema(&self) -> &[AttributeSpec] {
        &self.schema
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn class_index(&self) -> usize {
        self.class_index
    }

    pub fn class_attribute(&self) -> &AttributeSpec {
        &self.schema[self.class_index]
    }

    pub fn class_labels(&self) -> &[String] {
        self.class_attribute()
            .values()
            .expect("class attribute is nominal")
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels().len()
    }

    /// Class index of instance `i`.
    pub fn class_of(&self, i: usize) -> usize {
        self.instances[i][self.class_index]
            .as_cat()
            .expect("class values are nominal")
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for i in 0..self.len() {
            counts[self.class_of(i)] += 1;
        }
        counts
    }

    /// Indices of the attributes learners consume (roles feature and derived).
    pub fn input_indices(&self) -> Vec<usize> {
        self.schema
            .iter()
            .enumerate()
            .filter(|(_, a)| a.role.is_input())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn attribute_index(&self, name: &str) -> Result<usize, DataError> {
        self.schema
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| DataError::UnknownAttribute(name.to_string()))
    }

    pub fn attribute(&self, name: &str) -> Result<&AttributeSpec, DataError> {
        Ok(&self.schema[self.attribute_index(name)?])
    }

    /// All values of a numeric attribute, in row order.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>, DataError> {
        let idx = self.attribute_index(name)?;
        if !self.schema[idx].is_numeric() {
            return Err(DataError::NotNumeric(name.to_string()));
        }
        Ok(self
            .instances
            .iter()
            .map(|row| row[idx].as_num().expect("validated numeric"))
            .collect())
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
            class_index: self.class_index,
        }
    }

    /// Splits on a nominal attribute. Groups follow the attribute's value
    /// order; values with no instances are omitted.
    pub fn partition_by(&self, name: &str) -> Result<IndexMap<String, Dataset>, DataError> {
        let idx = self.attribute_index(name)?;
        let labels = self.schema[idx]
            .values()
            .ok_or_else(|| DataError::NotNominal(name.to_string()))?;
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); labels.len()];
        for (row, instance) in self.instances.iter().enumerate() {
            buckets[instance[idx].as_cat().expect("validated nominal")].push(row);
        }
        Ok(labels
            .iter()
            .zip(buckets)
            .filter(|(_, rows)| !rows.is_empty())
            .map(|(label, rows)| (label.clone(), self.subset(&rows)))
            .collect())
    }

    /// Drops the named input attributes. The class and id columns cannot be
    /// excluded.
    pub fn exclude(&self, names: &[&str]) -> Result<Dataset, DataError> {
        let mut drop = Vec::with_capacity(names.len());
        for name in names {
            let idx = self.attribute_index(name)?;
            if !self.schema[idx].role.is_input() {
                return Err(DataError::InvalidSchema(format!(
                    "`{name}` is not a feature and cannot be excluded"
                )));
            }
            drop.push(idx);
        }
        let keep: Vec<&str> = self
            .schema
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, a)| a.name.as_str())
            .collect();
        self.select(&keep)
    }

    /// Projects onto the named columns, in the given order. The names must
    /// include the class attribute.
    pub fn select(&self, names: &[&str]) -> Result<Dataset, DataError> {
        let indices = names
            .iter()
            .map(|n| self.attribute_index(n))
            .collect::<Result<Vec<_>, _>>()?;
        let schema: Vec<AttributeSpec> = indices.iter().map(|&i| self.schema[i].clone()).collect();
        let instances = self
            .instances
            .iter()
            .map(|row| indices.iter().map(|&i| row[i].clone()).collect())
            .collect();
        let class_index = validate_schema(&schema)?;
        Ok(Dataset {
            schema,
            instances,
            class_index,
        })
    }

    /// Renders a cell the way the CSV dialect spells it.
    pub fn format_value(&self, attr: usize, value: &Value) -> String {
        match value {
            Value::Num(x) => format!("{x}"),
            Value::Cat(i) => self.schema[attr].values().expect("nominal")[*i].clone(),
            Value::Text(s) => s.clone(),
        }
    }

    /// Comma-separated rendering with a header of attribute names.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self.schema.iter().map(|a| a.name.as_str()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.instances {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, v)| self.format_value(i, v))
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn validate_schema(schema: &[AttributeSpec]) -> Result<usize, DataError> {
    let mut names = HashSet::new();
    let mut class_index = None;
    for (i, attr) in schema.iter().enumerate() {
        attr.validate()?;
        if !names.insert(attr.name.as_str()) {
            return Err(DataError::InvalidSchema(format!(
                "attribute `{}` appears twice",
                attr.name
            )));
        }
        if attr.role == Role::Class {
            if class_index.is_some() {
                return Err(DataError::InvalidSchema(
                    "more than one class attribute".into(),
                ));
            }
            class_index = Some(i);
        }
    }
    class_index.ok_or_else(|| DataError::InvalidSchema("no class attribute".into()))
}

/// JSON form of a [`Dataset`]: the schema plus rows of plain JSON cells
/// (numbers for numeric attributes, labels for nominal ones).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetDocument {
    pub schema: Vec<AttributeSpec>,
    pub class_attribute: String,
    pub rows: Vec<Vec<serde_json::Value>>,
}

impl From<Dataset> for DatasetDocument {
    fn from(ds: Dataset) -> Self {
        let rows = ds
            .instances
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(i, v)| match v {
                        Value::Num(x) => serde_json::json!(x),
                        other => serde_json::Value::String(ds.format_value(i, other)),
                    })
                    .collect()
            })
            .collect();
        DatasetDocument {
            class_attribute: ds.class_attribute().name.clone(),
            schema: ds.schema,
            rows,
        }
    }
}

impl TryFrom<DatasetDocument> for Dataset {
    type Error = DataError;

    fn try_from(doc: DatasetDocument) -> Result<Self, Self::Error> {
        let mut instances = Vec::with_capacity(doc.rows.len());
        for (index, row) in doc.rows.iter().enumerate() {
            if row.len() != doc.schema.len() {
                return Err(DataError::Document(format!(
                    "row {index} has {} cells, schema has {}",
                    row.len(),
                    doc.schema.len()
                )));
            }
            let mut instance = Vec::with_capacity(row.len());
            for (attr, cell) in doc.schema.iter().zip(row) {
                let value = match (&attr.kind, cell) {
                    (AttributeKind::Numeric, serde_json::Value::Number(n)) => {
                        Value::Num(n.as_f64().unwrap_or(f64::NAN))
                    }
                    (AttributeKind::Nominal(_), serde_json::Value::String(s)) => {
                        Value::Cat(attr.value_index(s).ok_or_else(|| {
                            DataError::Document(format!(
                                "row {index}: `{s}` is not a value of `{}`",
                                attr.name
                            ))
                        })?)
                    }
                    (AttributeKind::Identifier, serde_json::Value::String(s)) => {
                        Value::Text(s.clone())
                    }
                    _ => {
                        return Err(DataError::Document(format!(
                            "row {index}: cell for `{}` has the wrong JSON type",
                            attr.name
                        )))
                    }
                };
                instance.push(value);
            }
            instances.push(instance);
        }
        let ds = Dataset::new(doc.schema, instances)?;
        if ds.class_attribute().name != doc.class_attribute {
            return Err(DataError::Document(format!(
                "class_attribute `{}` does not name the class-role attribute",
                doc.class_attribute
            )));
        }
        Ok(ds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        let schema = vec![
            AttributeSpec::identifier("id"),
            AttributeSpec::numeric("x", Role::Feature),
            AttributeSpec::nominal("color", ["red", "blue"], Role::Feature),
            AttributeSpec::nominal("label", ["yes", "no"], Role::Class),
        ];
        let rows = vec![
            vec![Value::Text("a".into()), Value::Num(1.5), Value::Cat(0), Value::Cat(0)],
            vec![Value::Text("b".into()), Value::Num(2.0), Value::Cat(1), Value::Cat(1)],
            vec![Value::Text("c".into()), Value::Num(-3.0), Value::Cat(0), Value::Cat(1)],
        ];
        Dataset::new(schema, rows).unwrap()
    }

    #[test]
    fn schema_rules() {
        let dup = vec![AttributeSpec::nominal("c", ["a", "a"], Role::Class)];
        assert!(matches!(Dataset::new(dup, vec![]), Err(DataError::InvalidSchema(_))));
        let empty = vec![AttributeSpec::nominal("c", Vec::<String>::new(), Role::Class)];
        assert!(Dataset::new(empty, vec![]).is_err());
        let none = vec![AttributeSpec::numeric("x", Role::Feature)];
        assert!(Dataset::new(none, vec![]).is_err());
        let two = vec![
            AttributeSpec::nominal("c", ["a"], Role::Class),
            AttributeSpec::nominal("d", ["a"], Role::Class),
        ];
        assert!(Dataset::new(two, vec![]).is_err());
    }

    #[test]
    fn instance_validation() {
        let schema = toy().schema().to_vec();
        let bad = vec![vec![Value::Text("a".into()), Value::Num(1.0), Value::Cat(2), Value::Cat(0)]];
        assert!(matches!(
            Dataset::new(schema.clone(), bad),
            Err(DataError::InvalidInstance { index: 0, .. })
        ));
        let short = vec![vec![Value::Num(1.0)]];
        assert!(Dataset::new(schema, short).is_err());
    }

    #[test]
    fn partition_and_projection() {
        let ds = toy();
        let parts = ds.partition_by("color").unwrap();
        assert_eq!(parts.keys().collect::<Vec<_>>(), ["red", "blue"]);
        assert_eq!(parts["red"].len(), 2);
        assert!(matches!(ds.partition_by("x"), Err(DataError::NotNominal(_))));
        assert!(matches!(ds.partition_by("nope"), Err(DataError::UnknownAttribute(_))));

        let slim = ds.exclude(&["color"]).unwrap();
        assert_eq!(slim.schema().len(), 3);
        assert_eq!(slim.class_index(), 2);
        assert!(ds.exclude(&["label"]).is_err());
        assert_eq!(ds.input_indices(), vec![1, 2]);
    }

    #[test]
    fn json_document_round_trip() {
        let ds = toy();
        let text = serde_json::to_string(&ds).unwrap();
        assert!(text.contains("\"class_attribute\":\"label\""));
        let back: Dataset = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ds);
    }
}
