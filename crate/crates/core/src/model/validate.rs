use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Role, Row, Structure, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    DuplicateId,
    TooFewStates,
    DuplicateState,
    UnknownVariable,
    Cycle,
    QuestionNotLeaf,
    QuestionParentNotSkill,
    MissingTable,
    DuplicateTable,
    ParentMismatch,
    RowCount,
    RowWidth,
    Normalization,
}

/// One failed model invariant, naming the variable (and row) it concerns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub subject: String,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{:?}]: {}", self.subject, self.rule, self.detail)
    }
}

fn push(out: &mut Vec<Violation>, subject: impl Into<String>, rule: Rule, detail: impl Into<String>) {
    out.push(Violation {
        subject: subject.into(),
        rule,
        detail: detail.into(),
    });
}

pub(super) fn validate<R: Row>(structure: &Structure, tables: &[Table<R>]) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = structure.len();
    let vars = structure.variables();

    let mut seen = HashSet::new();
    for v in vars {
        if !seen.insert(v.id.as_str()) {
            push(&mut out, &v.id, Rule::DuplicateId, "variable id is declared twice");
        }
        if v.states.len() < 2 {
            push(&mut out, &v.id, Rule::TooFewStates, "a variable needs at least two states");
        }
        let mut labels = HashSet::new();
        for s in &v.states {
            if !labels.insert(s.as_str()) {
                push(&mut out, &v.id, Rule::DuplicateState, format!("state `{s}` is repeated"));
            }
        }
    }

    for &(p, c) in structure.edges() {
        if p.0 >= n || c.0 >= n {
            push(&mut out, "edges", Rule::UnknownVariable, "edge endpoint is not a declared variable");
        }
    }

    if structure.topological_order().is_none() {
        push(&mut out, "graph", Rule::Cycle, "edges do not form a directed acyclic graph");
    }

    for v in structure.ids() {
        let var = structure.variable(v);
        if var.role != Role::Question {
            continue;
        }
        if !structure.children(v).is_empty() {
            push(&mut out, &var.id, Rule::QuestionNotLeaf, "questions must be leaf nodes");
        }
        for p in structure.graph_parents(v) {
            if structure.variable(*p).role != Role::Skill {
                push(
                    &mut out,
                    &var.id,
                    Rule::QuestionParentNotSkill,
                    format!("parent `{}` is not a skill", structure.variable(*p).id),
                );
            }
        }
    }

    let mut table_of = vec![None; n];
    for (i, t) in tables.iter().enumerate() {
        if t.child.0 >= n || t.parents.iter().any(|p| p.0 >= n) {
            push(&mut out, format!("table #{i}"), Rule::UnknownVariable, "table references an undeclared variable");
            continue;
        }
        if table_of[t.child.0].is_some() {
            push(&mut out, &vars[t.child.0].id, Rule::DuplicateTable, "more than one table for this variable");
        } else {
            table_of[t.child.0] = Some(t);
        }
    }

    let cards = structure.cards();
    for v in structure.ids() {
        let var = structure.variable(v);
        let Some(table) = table_of[v.0] else {
            push(&mut out, &var.id, Rule::MissingTable, "no conditional table");
            continue;
        };
        let mut declared: Vec<_> = table.parents.clone();
        declared.sort();
        let mut graph: Vec<_> = structure.graph_parents(v).to_vec();
        graph.sort();
        if declared != graph {
            push(&mut out, &var.id, Rule::ParentMismatch, "table parents differ from graph parents");
            continue;
        }
        let expected: usize = table.parents.iter().map(|p| cards[p.0]).product();
        if table.rows.len() != expected {
            push(
                &mut out,
                &var.id,
                Rule::RowCount,
                format!("expected {expected} rows, found {}", table.rows.len()),
            );
            continue;
        }
        for (r, row) in table.rows.iter().enumerate() {
            let subject = row_subject(structure, table, r);
            if row.width() != var.card() {
                push(
                    &mut out,
                    subject,
                    Rule::RowWidth,
                    format!("row has {} entries, variable has {} states", row.width(), var.card()),
                );
                continue;
            }
            if let Err(e) = row.check_row() {
                push(&mut out, subject, Rule::Normalization, e);
            }
        }
    }
    out
}

fn row_subject<R>(structure: &Structure, table: &Table<R>, row: usize) -> String {
    let var = structure.variable(table.child);
    if table.parents.is_empty() {
        return var.id.clone();
    }
    let states = table.parent_states(structure.cards(), row);
    let given: Vec<String> = table
        .parents
        .iter()
        .zip(states)
        .map(|(p, s)| {
            let pv = structure.variable(*p);
            format!("{}={}", pv.id, pv.states[s])
        })
        .collect();
    format!("{} | {}", var.id, given.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fig1, Network, Pmf, Table, VarId, Variable};

    #[test]
    fn fig1_is_valid() {
        assert!(fig1().validate().is_empty());
    }

    #[test]
    fn question_with_question_parent() {
        let vars = vec![
            Variable::new("S", "S", &["0", "1"], Role::Skill),
            Variable::new("Q1", "Q1", &["0", "1"], Role::Question),
            Variable::new("Q2", "Q2", &["0", "1"], Role::Question),
        ];
        let p = |x: f64| Pmf::new_unchecked(vec![1.0 - x, x]);
        let tables = vec![
            Table::new(VarId(0), vec![], vec![p(0.5)]),
            Table::new(VarId(1), vec![VarId(0)], vec![p(0.3), p(0.9)]),
            Table::new(VarId(2), vec![VarId(1)], vec![p(0.4), p(0.6)]),
        ];
        let net = Network::new_unchecked(vars, vec![(VarId(0), VarId(1)), (VarId(1), VarId(2))], tables);
        let v = net.validate();
        // Q1 gets a child (not a leaf) and Q2 gets a question parent.
        assert!(v.iter().any(|x| x.rule == Rule::QuestionParentNotSkill && x.subject == "Q2"));
        assert_eq!(
            v.iter().filter(|x| x.rule == Rule::QuestionParentNotSkill).count(),
            1
        );
    }

    #[test]
    fn row_not_summing_to_one() {
        let vars = vec![
            Variable::new("S", "S", &["0", "1"], Role::Skill),
            Variable::new("Q", "Q", &["0", "1"], Role::Question),
        ];
        let tables = vec![
            Table::new(VarId(0), vec![], vec![Pmf::new_unchecked(vec![0.5, 0.5])]),
            Table::new(
                VarId(1),
                vec![VarId(0)],
                vec![Pmf::new_unchecked(vec![0.6, 0.3]), Pmf::new_unchecked(vec![0.1, 0.9])],
            ),
        ];
        let net = Network::new_unchecked(vars, vec![(VarId(0), VarId(1))], tables);
        let v = net.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::Normalization);
        assert_eq!(v[0].subject, "Q | S=0");
    }

    #[test]
    fn cycle_detected() {
        let vars = vec![
            Variable::new("A", "A", &["0", "1"], Role::Skill),
            Variable::new("B", "B", &["0", "1"], Role::Skill),
        ];
        let p = Pmf::new_unchecked(vec![0.5, 0.5]);
        let tables = vec![
            Table::new(VarId(0), vec![VarId(1)], vec![p.clone(), p.clone()]),
            Table::new(VarId(1), vec![VarId(0)], vec![p.clone(), p]),
        ];
        let net = Network::new_unchecked(vars, vec![(VarId(0), VarId(1)), (VarId(1), VarId(0))], tables);
        assert!(net.validate().iter().any(|v| v.rule == Rule::Cycle));
    }
}
