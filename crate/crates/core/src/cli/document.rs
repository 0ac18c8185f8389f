//! JSON documents for messages and valuation tables. Rationals travel as
//! strings (`"3"`, `"-7/2"`) so that nothing passes through floating point.

use crate::model::{
    validate_message, AssignmentMessage, Bundle, ModelError, TreeConstraint, ValidationReport,
    ValuationTable, Variable,
};
use crate::rational::{format_rational, parse_rational, ParseRationalError, Rational};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDocument {
    pub id: usize,
    pub good: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintDocument {
    pub tree: usize,
    pub members: Vec<usize>,
    pub lower: i64,
    pub upper: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MessageDocument {
    pub num_goods: usize,
    pub variables: Vec<VariableDocument>,
    pub constraints: Vec<ConstraintDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntryDocument {
    pub bundle: Vec<i64>,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDocument {
    pub num_goods: usize,
    pub entries: Vec<TableEntryDocument>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DocumentError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {source}")]
    BadRational {
        field: String,
        #[source]
        source: ParseRationalError,
    },
    #[error("invalid assignment message:\n{0}")]
    Invalid(ValidationReport),
    #[error("constraint #{index}: member list repeats variable {variable}")]
    RepeatedMember { index: usize, variable: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<serde_json::Error> for DocumentError {
    fn from(e: serde_json::Error) -> Self {
        DocumentError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

fn rational_field(field: impl FnOnce() -> String, text: &str) -> Result<Rational, DocumentError> {
    parse_rational(text).map_err(|source| DocumentError::BadRational {
        field: field(),
        source,
    })
}

impl MessageDocument {
    pub fn from_message(msg: &AssignmentMessage) -> Self {
        MessageDocument {
            num_goods: msg.num_goods,
            variables: msg
                .variables
                .iter()
                .map(|v| VariableDocument {
                    id: v.id,
                    good: v.good,
                    value: format_rational(&v.value),
                })
                .collect(),
            constraints: msg
                .constraints
                .iter()
                .map(|c| ConstraintDocument {
                    tree: c.tree,
                    members: c.members.iter().copied().collect(),
                    lower: c.lower,
                    upper: c.upper,
                })
                .collect(),
        }
    }

    /// Converts without validating.
    pub fn to_message(&self) -> Result<AssignmentMessage, DocumentError> {
        let variables = self
            .variables
            .iter()
            .enumerate()
            .map(|(k, v)| {
                Ok(Variable {
                    id: v.id,
                    good: v.good,
                    value: rational_field(|| format!("variables[{k}].value"), &v.value)?,
                })
            })
            .collect::<Result<Vec<_>, DocumentError>>()?;
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for (index, c) in self.constraints.iter().enumerate() {
            let tc = TreeConstraint::new(c.tree, c.members.iter().copied(), c.lower, c.upper);
            if tc.members.len() != c.members.len() {
                let mut seen = std::collections::BTreeSet::new();
                let variable = c
                    .members
                    .iter()
                    .copied()
                    .find(|j| !seen.insert(*j))
                    .unwrap_or(0);
                return Err(DocumentError::RepeatedMember { index, variable });
            }
            constraints.push(tc);
        }
        Ok(AssignmentMessage {
            num_goods: self.num_goods,
            variables,
            constraints,
        })
    }
}

impl TableDocument {
    pub fn from_table(table: &ValuationTable) -> Self {
        TableDocument {
            num_goods: table.num_goods(),
            entries: table
                .iter()
                .map(|(b, v)| TableEntryDocument {
                    bundle: b.quantities().to_vec(),
                    value: format_rational(v),
                })
                .collect(),
        }
    }

    pub fn to_table(&self) -> Result<ValuationTable, DocumentError> {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(k, e)| {
                Ok((
                    Bundle::new(e.bundle.clone()),
                    rational_field(|| format!("entries[{k}].value"), &e.value)?,
                ))
            })
            .collect::<Result<Vec<_>, DocumentError>>()?;
        Ok(ValuationTable::new(self.num_goods, entries)?)
    }
}

/// Parses a message document and validates it.
pub fn parse_message(text: &str) -> Result<AssignmentMessage, DocumentError> {
    let doc: MessageDocument = serde_json::from_str(text)?;
    let msg = doc.to_message()?;
    let report = validate_message(&msg);
    if !report.is_valid() {
        return Err(DocumentError::Invalid(report));
    }
    Ok(msg)
}

fn lines<T: Serialize>(items: &[T]) -> Vec<String> {
    items
        .iter()
        .map(|x| serde_json::to_string(x).expect("documents serialize"))
        .collect()
}

/// JSON object text with one list element per line.
fn compact_document(num_goods: usize, lists: &[(&str, Vec<String>)]) -> String {
    let mut out = format!("{{\n  \"num_goods\": {num_goods}");
    for (name, items) in lists {
        out.push_str(&format!(",\n  \"{name}\": ["));
        if !items.is_empty() {
            out.push_str("\n    ");
            out.push_str(&items.join(",\n    "));
            out.push_str("\n  ");
        }
        out.push(']');
    }
    out.push_str("\n}\n");
    out
}

pub fn serialize_message(msg: &AssignmentMessage) -> String {
    let doc = MessageDocument::from_message(msg);
    compact_document(
        doc.num_goods,
        &[
            ("variables", lines(&doc.variables)),
            ("constraints", lines(&doc.constraints)),
        ],
    )
}

pub fn parse_table(text: &str) -> Result<ValuationTable, DocumentError> {
    let doc: TableDocument = serde_json::from_str(text)?;
    doc.to_table()
}

pub fn serialize_table(table: &ValuationTable) -> String {
    let doc = TableDocument::from_table(table);
    compact_document(doc.num_goods, &[("entries", lines(&doc.entries))])
}

/// Either kind of input document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    Message(AssignmentMessage),
    Table(ValuationTable),
}

/// Accepts a table document (it has `entries`) or a message document.
pub fn parse_valuation(text: &str) -> Result<Valuation, DocumentError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("entries").is_some() {
        Ok(Valuation::Table(parse_table(text)?))
    } else {
        Ok(Valuation::Message(parse_message(text)?))
    }
}
