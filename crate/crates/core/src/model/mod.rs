//! Test models: skill and question variables arranged in a DAG with one
//! (point or interval) conditional table per variable.

mod banks;
mod io;
mod perturb;
mod pmf;
mod question;
mod validate;

use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use banks::{chain_bank, fig1, single_skill_bank, ChainBankSpec, CHAIN_LEVELS, SINGLE_SKILL_GRID};
pub use io::{load_model, AnyNetwork, ModelKind, FORMAT_VERSION};
pub use perturb::{perturb_to_credal, PerturbationSpec};
pub use pmf::{IntervalPmf, Pmf, PROB_TOL};
pub use question::{build_boolean_question, QuestionParams};
pub use validate::{Rule, Violation};

/// Index of a variable inside its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Skill,
    Question,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub id: String,
    pub name: String,
    pub states: Vec<String>,
    pub role: Role,
}

impl Variable {
    pub fn new(id: impl Into<String>, name: impl Into<String>, states: &[&str], role: Role) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            states: states.iter().map(|s| s.to_string()).collect(),
            role,
        }
    }

    pub fn card(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// A row type that can fill a conditional table.
pub trait Row: Clone + Debug + PartialEq + Send + Sync {
    fn width(&self) -> usize;
    fn check_row(&self) -> std::result::Result<(), String>;
}

impl Row for Pmf {
    fn width(&self) -> usize {
        self.len()
    }
    fn check_row(&self) -> std::result::Result<(), String> {
        self.check()
    }
}

impl Row for IntervalPmf {
    fn width(&self) -> usize {
        self.len()
    }
    fn check_row(&self) -> std::result::Result<(), String> {
        self.check()
    }
}

/// Conditional table of `child` given `parents`.
///
/// Rows are stored row-major over the declared parent order: the first
/// parent varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<R> {
    pub child: VarId,
    pub parents: Vec<VarId>,
    pub rows: Vec<R>,
}

pub type Cpt = Table<Pmf>;
pub type CredalCpt = Table<IntervalPmf>;

impl<R> Table<R> {
    pub fn new(child: VarId, parents: Vec<VarId>, rows: Vec<R>) -> Self {
        Self {
            child,
            parents,
            rows,
        }
    }

    /// Row index for a full parent configuration given per-parent states.
    pub fn row_index(&self, cards: &[usize], parent_states: &[usize]) -> usize {
        let mut idx = 0;
        for (p, &s) in self.parents.iter().zip(parent_states) {
            idx = idx * cards[p.0] + s;
        }
        idx
    }

    /// Row index for the configuration read off a full assignment.
    pub fn row_for(&self, cards: &[usize], assignment: &[usize]) -> usize {
        let mut idx = 0;
        for p in &self.parents {
            idx = idx * cards[p.0] + assignment[p.0];
        }
        idx
    }

    /// Per-parent states of row `row`.
    pub fn parent_states(&self, cards: &[usize], mut row: usize) -> Vec<usize> {
        let mut out = vec![0; self.parents.len()];
        for (slot, p) in out.iter_mut().zip(&self.parents).rev() {
            let c = cards[p.0];
            *slot = row % c;
            row /= c;
        }
        out
    }

    pub fn map_rows<S>(&self, f: impl FnMut(&R) -> S) -> Table<S> {
        Table {
            child: self.child,
            parents: self.parents.clone(),
            rows: self.rows.iter().map(f).collect(),
        }
    }
}

/// The graph and variable set shared by a Bayesian network and its credal
/// counterparts.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    variables: Vec<Variable>,
    edges: Vec<(VarId, VarId)>,
    parents: Vec<Vec<VarId>>,
    children: Vec<Vec<VarId>>,
    index: HashMap<String, VarId>,
    cards: Vec<usize>,
}

impl Structure {
    pub fn new(variables: Vec<Variable>, edges: Vec<(VarId, VarId)>) -> Self {
        let n = variables.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(p, c) in &edges {
            if p.0 < n && c.0 < n {
                parents[c.0].push(p);
                children[p.0].push(c);
            }
        }
        let mut index = HashMap::new();
        for (i, v) in variables.iter().enumerate() {
            index.entry(v.id.clone()).or_insert(VarId(i));
        }
        let cards = variables.iter().map(Variable::card).collect();
        Self {
            variables,
            edges,
            parents,
            children,
            index,
            cards,
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.variables[v.0]
    }

    pub fn edges(&self) -> &[(VarId, VarId)] {
        &self.edges
    }

    pub fn graph_parents(&self, v: VarId) -> &[VarId] {
        &self.parents[v.0]
    }

    pub fn children(&self, v: VarId) -> &[VarId] {
        &self.children[v.0]
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn card(&self, v: VarId) -> usize {
        self.cards[v.0]
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn find(&self, id: &str) -> Option<VarId> {
        self.index.get(id).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len()).map(VarId)
    }

    pub fn skills(&self) -> Vec<VarId> {
        self.ids()
            .filter(|v| self.variables[v.0].role == Role::Skill)
            .collect()
    }

    pub fn questions(&self) -> Vec<VarId> {
        self.ids()
            .filter(|v| self.variables[v.0].role == Role::Question)
            .collect()
    }

    /// Topological order, or `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<VarId>> {
        let n = self.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: Vec<VarId> = (0..n).rev().filter(|&i| indegree[i] == 0).map(VarId).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for c in self.children[v.0].iter().rev() {
                indegree[c.0] -= 1;
                if indegree[c.0] == 0 {
                    ready.push(*c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// `vars` together with all their ancestors, as a membership mask.
    pub fn ancestral_closure(&self, vars: impl IntoIterator<Item = VarId>) -> Vec<bool> {
        let mut keep = vec![false; self.len()];
        let mut stack: Vec<VarId> = vars.into_iter().collect();
        while let Some(v) = stack.pop() {
            if keep[v.0] {
                continue;
            }
            keep[v.0] = true;
            stack.extend(self.parents[v.0].iter().copied());
        }
        keep
    }

    pub fn resolve(&self, id: &str) -> Result<VarId> {
        self.find(id).ok_or_else(|| Error::UnknownVariable(id.to_string()))
    }

    pub fn resolve_state(&self, v: VarId, label: &str) -> Result<usize> {
        let var = self.variable(v);
        var.state_index(label).ok_or_else(|| Error::UnknownState {
            var: var.id.clone(),
            state: label.to_string(),
        })
    }
}

/// A DAG over skills and questions with one table per variable.
///
/// Networks built through [`Network::new`] are validated and immutable;
/// [`Network::new_unchecked`] exists so that invalid models can be inspected
/// with [`Network::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Network<R> {
    structure: Arc<Structure>,
    tables: Vec<Table<R>>,
}

pub type BayesianNetwork = Network<Pmf>;
pub type CredalNetwork = Network<IntervalPmf>;

impl<R: Row> Network<R> {
    pub fn new(
        variables: Vec<Variable>,
        edges: Vec<(VarId, VarId)>,
        tables: Vec<Table<R>>,
    ) -> Result<Self> {
        let net = Self::new_unchecked(variables, edges, tables);
        let violations = net.validate();
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::Invalid(violations))
        }
    }

    pub fn new_unchecked(
        variables: Vec<Variable>,
        edges: Vec<(VarId, VarId)>,
        mut tables: Vec<Table<R>>,
    ) -> Self {
        tables.sort_by_key(|t| t.child);
        Self {
            structure: Arc::new(Structure::new(variables, edges)),
            tables,
        }
    }

    /// Reuses an existing structure with new tables of another row type.
    pub fn with_structure(structure: Arc<Structure>, mut tables: Vec<Table<R>>) -> Result<Self> {
        tables.sort_by_key(|t| t.child);
        let net = Self { structure, tables };
        let violations = net.validate();
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::Invalid(violations))
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate::validate(&self.structure, &self.tables)
    }
}

impl<R> Network<R> {
    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn shared_structure(&self) -> Arc<Structure> {
        Arc::clone(&self.structure)
    }

    pub fn tables(&self) -> &[Table<R>] {
        &self.tables
    }

    pub fn table(&self, v: VarId) -> &Table<R> {
        &self.tables[v.0]
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        self.structure.variable(v)
    }

    pub fn var(&self, id: &str) -> Result<VarId> {
        self.structure.resolve(id)
    }

    pub fn skills(&self) -> Vec<VarId> {
        self.structure.skills()
    }

    pub fn questions(&self) -> Vec<VarId> {
        self.structure.questions()
    }

    pub fn cards(&self) -> &[usize] {
        self.structure.cards()
    }

    pub fn card(&self, v: VarId) -> usize {
        self.structure.card(v)
    }

    pub fn map_tables<S>(&self, mut f: impl FnMut(&Table<R>) -> Table<S>) -> Network<S> {
        Network {
            structure: Arc::clone(&self.structure),
            tables: self.tables.iter().map(&mut f).collect(),
        }
    }
}

impl CredalNetwork {
    /// Replaces every interval row with a member of its credal set.
    pub fn central_completion(&self) -> BayesianNetwork {
        self.map_tables(|t| t.map_rows(IntervalPmf::central_member))
    }
}

/// Incremental construction of a network. Edges are derived from table
/// parents.
#[derive(Debug, Default)]
pub struct NetworkBuilder<R> {
    variables: Vec<Variable>,
    tables: Vec<Table<R>>,
}

impl<R: Row> NetworkBuilder<R> {
    pub fn new() -> Self {
        Self {
            variables: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn variable(&mut self, var: Variable) -> VarId {
        self.variables.push(var);
        VarId(self.variables.len() - 1)
    }

    pub fn skill(&mut self, id: &str, name: &str, states: &[&str]) -> VarId {
        self.variable(Variable::new(id, name, states, Role::Skill))
    }

    pub fn question(&mut self, id: &str, name: &str, states: &[&str]) -> VarId {
        self.variable(Variable::new(id, name, states, Role::Question))
    }

    pub fn table(&mut self, table: Table<R>) -> &mut Self {
        self.tables.push(table);
        self
    }

    pub fn build(self) -> Result<Network<R>> {
        let edges = self
            .tables
            .iter()
            .flat_map(|t| t.parents.iter().map(move |&p| (p, t.child)))
            .collect();
        Network::new(self.variables, edges, self.tables)
    }
}
