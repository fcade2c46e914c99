use serde::{Deserialize, Serialize};

use super::{BayesianNetwork, CredalNetwork, IntervalPmf, Network, Table};
use crate::error::{Error, Result};

/// Symmetric perturbation of every table entry by `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub epsilon: f64,
    #[serde(default = "default_clip")]
    pub clip: bool,
}

fn default_clip() -> bool {
    true
}

impl PerturbationSpec {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon, clip: true }
    }
}

/// Turns every entry `p` into `[p - eps, p + eps]` (clipped to `[0, 1]` when
/// requested) and tightens each row to its reachable intervals.
pub fn perturb_to_credal(model: &BayesianNetwork, spec: &PerturbationSpec) -> Result<CredalNetwork> {
    if !(spec.epsilon >= 0.0) || !spec.epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {} must be a finite nonnegative number",
            spec.epsilon
        )));
    }
    let eps = spec.epsilon;
    let mut tables = Vec::with_capacity(model.tables().len());
    for table in model.tables() {
        let mut rows = Vec::with_capacity(table.rows.len());
        for (r, row) in table.rows.iter().enumerate() {
            let mut lower = Vec::with_capacity(row.len());
            let mut upper = Vec::with_capacity(row.len());
            for &p in row.probs() {
                let (l, u) = (p - eps, p + eps);
                if !spec.clip && (l < 0.0 || u > 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "perturbing `{}` row {r} leaves [0, 1] and clipping is disabled",
                        model.variable(table.child).id
                    )));
                }
                lower.push(l.max(0.0));
                upper.push(u.min(1.0));
            }
            let iv = IntervalPmf::tightened(lower, upper).map_err(|e| {
                Error::InvalidParameter(format!(
                    "perturbed row {r} of `{}`: {e}",
                    model.variable(table.child).id
                ))
            })?;
            rows.push(iv);
        }
        tables.push(Table::new(table.child, table.parents.clone(), rows));
    }
    Network::with_structure(model.shared_structure(), tables)
}
