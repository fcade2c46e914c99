//! Brute-force inference by enumerating the full joint. Exponential in the
//! number of variables; meant for checking faster algorithms on small models.

use super::Evidence;
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, VarId};

/// Largest joint the oracle will enumerate.
pub const MAX_JOINT: usize = 1 << 22;

/// `P(targets | e)`, row-major over `targets`.
pub fn joint_posterior(net: &BayesianNetwork, targets: &[VarId], evidence: &Evidence) -> Result<Vec<f64>> {
    let cards = net.cards();
    let size: usize = cards.iter().product();
    if size > MAX_JOINT {
        return Err(Error::InvalidParameter(format!(
            "joint has {size} entries, more than the oracle limit {MAX_JOINT}"
        )));
    }
    let out_size: usize = targets.iter().map(|t| cards[t.0]).product();
    let mut out = vec![0.0; out_size];
    let mut assignment = vec![0usize; cards.len()];
    for _ in 0..size {
        if evidence.iter().all(|(q, s)| assignment[q.0] == s) {
            let mut p = 1.0;
            for t in net.tables() {
                p *= t.rows[t.row_for(cards, &assignment)].get(assignment[t.child.0]);
            }
            let mut idx = 0;
            for t in targets {
                idx = idx * cards[t.0] + assignment[t.0];
            }
            out[idx] += p;
        }
        for d in (0..cards.len()).rev() {
            assignment[d] += 1;
            if assignment[d] < cards[d] {
                break;
            }
            assignment[d] = 0;
        }
    }
    let total: f64 = out.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InconsistentEvidence);
    }
    Ok(out.into_iter().map(|p| p / total).collect())
}
