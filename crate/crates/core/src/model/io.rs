//! The model file format.
//!
//! A model is a single JSON document:
//!
//! ```text
//! {
//!   "format_version": 1,
//!   "kind": "bayesian" | "credal",
//!   "variables": [{"id": "S", "name": "...", "states": ["0", "1"], "role": "skill"}, ...],
//!   "edges": [["S", "Q1"], ...],
//!   "tables": [
//!     {"variable": "Q1", "parents": ["S"],
//!      "rows": [{"given": ["0"], "probs": [0.7, 0.3]}, ...]},
//!     ...
//!   ]
//! }
//! ```
//!
//! Credal rows carry `"intervals": [[lower, upper], ...]` instead of `"probs"`.
//! Rows are keyed by the parent state labels in `given` (in the table's parent
//! order) and may appear in any order; serialization writes them row-major.

use serde::{Deserialize, Serialize};

use super::{BayesianNetwork, CredalNetwork, IntervalPmf, Network, Pmf, Role, Row, Table, VarId, Variable};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Bayesian,
    Credal,
}

/// A loaded model of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyNetwork {
    Bayesian(BayesianNetwork),
    Credal(CredalNetwork),
}

impl AnyNetwork {
    pub fn kind(&self) -> ModelKind {
        match self {
            AnyNetwork::Bayesian(_) => ModelKind::Bayesian,
            AnyNetwork::Credal(_) => ModelKind::Credal,
        }
    }

    pub fn structure(&self) -> &super::Structure {
        match self {
            AnyNetwork::Bayesian(n) => n.structure(),
            AnyNetwork::Credal(n) => n.structure(),
        }
    }

    pub fn validate(&self) -> Vec<super::Violation> {
        match self {
            AnyNetwork::Bayesian(n) => n.validate(),
            AnyNetwork::Credal(n) => n.validate(),
        }
    }

    pub fn to_document(&self) -> String {
        let doc = match self {
            AnyNetwork::Bayesian(n) => document(n, ModelKind::Bayesian, |p: &Pmf| RowValues::Probs {
                probs: p.probs().to_vec(),
            }),
            AnyNetwork::Credal(n) => document(n, ModelKind::Credal, |iv: &IntervalPmf| RowValues::Intervals {
                intervals: iv.lower().iter().zip(iv.upper()).map(|(&l, &u)| [l, u]).collect(),
            }),
        };
        serde_json::to_string_pretty(&doc).expect("model documents always serialize")
    }
}

impl From<BayesianNetwork> for AnyNetwork {
    fn from(n: BayesianNetwork) -> Self {
        AnyNetwork::Bayesian(n)
    }
}

impl From<CredalNetwork> for AnyNetwork {
    fn from(n: CredalNetwork) -> Self {
        AnyNetwork::Credal(n)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    format_version: u32,
    kind: ModelKind,
    variables: Vec<VariableDoc>,
    #[serde(default)]
    edges: Vec<[String; 2]>,
    tables: Vec<TableDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableDoc {
    id: String,
    #[serde(default)]
    name: Option<String>,
    states: Vec<String>,
    role: Role,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    variable: String,
    #[serde(default)]
    parents: Vec<String>,
    rows: Vec<RowDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RowDoc {
    #[serde(default)]
    given: Vec<String>,
    #[serde(flatten)]
    values: RowValues,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RowValues {
    Probs { probs: Vec<f64> },
    Intervals { intervals: Vec<[f64; 2]> },
}

fn document<R: Row>(net: &Network<R>, kind: ModelKind, row: impl Fn(&R) -> RowValues) -> ModelDocument {
    let s = net.structure();
    let id = |v: VarId| s.variable(v).id.clone();
    ModelDocument {
        format_version: FORMAT_VERSION,
        kind,
        variables: s
            .variables()
            .iter()
            .map(|v| VariableDoc {
                id: v.id.clone(),
                name: Some(v.name.clone()),
                states: v.states.clone(),
                role: v.role,
            })
            .collect(),
        edges: s.edges().iter().map(|&(p, c)| [id(p), id(c)]).collect(),
        tables: net
            .tables()
            .iter()
            .map(|t| TableDoc {
                variable: id(t.child),
                parents: t.parents.iter().map(|&p| id(p)).collect(),
                rows: t
                    .rows
                    .iter()
                    .enumerate()
                    .map(|(r, values)| RowDoc {
                        given: t
                            .parent_states(s.cards(), r)
                            .iter()
                            .zip(&t.parents)
                            .map(|(&st, &p)| s.variable(p).states[st].clone())
                            .collect(),
                        values: row(values),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Parses and validates a model document.
pub fn load_model(text: &str) -> Result<AnyNetwork> {
    let doc: ModelDocument = serde_json::from_str(text)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::Schema {
            path: "format_version".into(),
            message: format!("unsupported version {}, expected {FORMAT_VERSION}", doc.format_version),
        });
    }

    let variables: Vec<Variable> = doc
        .variables
        .iter()
        .map(|v| Variable {
            id: v.id.clone(),
            name: v.name.clone().unwrap_or_else(|| v.id.clone()),
            states: v.states.clone(),
            role: v.role,
        })
        .collect();
    let lookup = |id: &str, path: String| -> Result<VarId> {
        variables
            .iter()
            .position(|v| v.id == id)
            .map(VarId)
            .ok_or_else(|| Error::Schema {
                path,
                message: format!("unknown variable `{id}`"),
            })
    };

    let mut edges = Vec::with_capacity(doc.edges.len());
    for (i, [p, c]) in doc.edges.iter().enumerate() {
        edges.push((
            lookup(p, format!("edges[{i}][0]"))?,
            lookup(c, format!("edges[{i}][1]"))?,
        ));
    }

    match doc.kind {
        ModelKind::Bayesian => {
            let tables = convert_tables(&doc.tables, &variables, &lookup, |values, path| match values {
                RowValues::Probs { probs } => Ok(Pmf::new_unchecked(probs.clone())),
                RowValues::Intervals { .. } => Err(Error::Schema {
                    path,
                    message: "interval row in a bayesian model".into(),
                }),
            })?;
            Ok(AnyNetwork::Bayesian(Network::new(variables, edges, tables)?))
        }
        ModelKind::Credal => {
            let tables = convert_tables(&doc.tables, &variables, &lookup, |values, _| match values {
                RowValues::Intervals { intervals } => Ok(IntervalPmf::new_unchecked(
                    intervals.iter().map(|b| b[0]).collect(),
                    intervals.iter().map(|b| b[1]).collect(),
                )),
                // A point row is a degenerate interval row.
                RowValues::Probs { probs } => Ok(IntervalPmf::new_unchecked(probs.clone(), probs.clone())),
            })?;
            Ok(AnyNetwork::Credal(Network::new(variables, edges, tables)?))
        }
    }
}

fn convert_tables<R>(
    docs: &[TableDoc],
    variables: &[Variable],
    lookup: &dyn Fn(&str, String) -> Result<VarId>,
    row: impl Fn(&RowValues, String) -> Result<R>,
) -> Result<Vec<Table<R>>> {
    let mut tables = Vec::with_capacity(docs.len());
    for (ti, t) in docs.iter().enumerate() {
        let child = lookup(&t.variable, format!("tables[{ti}].variable"))?;
        let parents = t
            .parents
            .iter()
            .enumerate()
            .map(|(pi, p)| lookup(p, format!("tables[{ti}].parents[{pi}]")))
            .collect::<Result<Vec<_>>>()?;
        let cards: Vec<usize> = variables.iter().map(Variable::card).collect();
        let expected: usize = parents.iter().map(|p| cards[p.0]).product();
        let mut slots: Vec<Option<R>> = (0..expected).map(|_| None).collect();
        let probe = Table::<()>::new(child, parents.clone(), Vec::new());
        for (ri, r) in t.rows.iter().enumerate() {
            let path = format!("tables[{ti}].rows[{ri}]");
            if r.given.len() != parents.len() {
                return Err(Error::Schema {
                    path: format!("{path}.given"),
                    message: format!("expected {} parent states, found {}", parents.len(), r.given.len()),
                });
            }
            let mut states = Vec::with_capacity(parents.len());
            for (p, label) in parents.iter().zip(&r.given) {
                let var = &variables[p.0];
                let s = var.state_index(label).ok_or_else(|| Error::Schema {
                    path: format!("{path}.given"),
                    message: format!("`{}` has no state `{label}`", var.id),
                })?;
                states.push(s);
            }
            let idx = probe.row_index(&cards, &states);
            if slots[idx].is_some() {
                return Err(Error::Schema {
                    path,
                    message: "duplicate row for this parent configuration".into(),
                });
            }
            slots[idx] = Some(row(&r.values, path)?);
        }
        let mut rows = Vec::with_capacity(expected);
        for (i, slot) in slots.into_iter().enumerate() {
            match slot {
                Some(r) => rows.push(r),
                None => {
                    return Err(Error::Schema {
                        path: format!("tables[{ti}]"),
                        message: format!("missing row for parent configuration #{i} of `{}`", t.variable),
                    })
                }
            }
        }
        tables.push(Table::new(child, parents, rows));
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{chain_bank, fig1, perturb_to_credal, ChainBankSpec, PerturbationSpec};

    #[test]
    fn fig1_round_trip() {
        let m = AnyNetwork::Bayesian(fig1());
        let text = m.to_document();
        let back = load_model(&text).unwrap();
        assert_eq!(back, m);
        let s = back.structure();
        assert_eq!(s.skills().len(), 1);
        assert_eq!(s.questions().len(), 2);
    }

    #[test]
    fn credal_round_trip() {
        let cn = perturb_to_credal(&chain_bank(&ChainBankSpec::default()), &PerturbationSpec::new(0.05)).unwrap();
        let m = AnyNetwork::Credal(cn);
        let back = load_model(&m.to_document()).unwrap();
        assert_eq!(back.kind(), ModelKind::Credal);
        assert_eq!(back, m);
    }

    #[test]
    fn empty_document_is_a_syntax_error() {
        assert!(matches!(load_model(""), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unknown_parent_has_a_path() {
        let text = r#"{"format_version":1,"kind":"bayesian",
            "variables":[{"id":"S","states":["0","1"],"role":"skill"}],
            "tables":[{"variable":"S","parents":["X"],"rows":[]}]}"#;
        match load_model(text) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "tables[0].parents[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_model_reports_violations() {
        let text = r#"{"format_version":1,"kind":"bayesian",
            "variables":[{"id":"S","states":["0","1"],"role":"skill"}],
            "tables":[{"variable":"S","rows":[{"probs":[0.5,0.4]}]}]}"#;
        assert!(matches!(load_model(text), Err(Error::Invalid(v)) if v.len() == 1));
    }
}
