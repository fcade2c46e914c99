//! Lower and upper posterior probabilities in interval credal networks.
//!
//! A posterior probability is a ratio of multilinear functions of the table
//! rows, so its extremes over the credal network are attained when every
//! row sits at a vertex of its credal set. [`credal_posterior_bounds`]
//! either enumerates those vertex completions or runs coordinate ascent over
//! them.

mod completions;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub(crate) use completions::{checked_total, Completions};

use crate::bn::{Evidence, SkillSpace};
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, CredalNetwork, IntervalPmf, Pmf, Role, VarId};

/// Default cap on enumerated vertex completions.
pub const DEFAULT_MAX_VERTICES: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    VertexEnumeration,
    CoordinateAscent,
    /// Enumeration when within `max_vertices`, coordinate ascent otherwise.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CredalStrategy {
    pub kind: StrategyKind,
    pub max_vertices: u64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for CredalStrategy {
    fn default() -> Self {
        Self {
            kind: StrategyKind::Auto,
            max_vertices: DEFAULT_MAX_VERTICES,
            restarts: 5,
            seed: 0,
        }
    }
}

impl CredalStrategy {
    pub fn enumeration() -> Self {
        Self {
            kind: StrategyKind::VertexEnumeration,
            ..Self::default()
        }
    }

    pub fn ascent() -> Self {
        Self {
            kind: StrategyKind::CoordinateAscent,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.max_vertices < 1 {
            return Err(Error::InvalidParameter("max_vertices must be at least 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        Ok(())
    }

    /// Resolves `Auto` for a family with `vertices` completions.
    pub(crate) fn resolve(&self, vertices: u128) -> Result<StrategyKind> {
        self.check()?;
        match self.kind {
            StrategyKind::VertexEnumeration if vertices > self.max_vertices as u128 => {
                Err(Error::VertexCapExceeded {
                    needed: vertices,
                    cap: self.max_vertices,
                })
            }
            StrategyKind::Auto if vertices > self.max_vertices as u128 => Ok(StrategyKind::CoordinateAscent),
            StrategyKind::Auto => Ok(StrategyKind::VertexEnumeration),
            k => Ok(k),
        }
    }
}

/// Posterior bounds with the method that produced them. `exact` is false
/// for coordinate ascent, whose bounds are an inner approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalBounds {
    pub bounds: IntervalPmf,
    pub exact: bool,
    pub method: StrategyKind,
}

/// Lower and upper `P(target = s | e)` for every state `s` of a skill.
pub fn credal_posterior_bounds(
    net: &CredalNetwork,
    target: VarId,
    evidence: &Evidence,
    strategy: &CredalStrategy,
) -> Result<CredalBounds> {
    let space = SkillSpace::new(net)?;
    posterior_bounds_in(net, &space, target, evidence, strategy)
}

/// Bounds for every skill, in skill order.
pub fn credal_skill_bounds(
    net: &CredalNetwork,
    space: &SkillSpace,
    evidence: &Evidence,
    strategy: &CredalStrategy,
) -> Result<Vec<CredalBounds>> {
    space
        .skills()
        .iter()
        .map(|&s| posterior_bounds_in(net, space, s, evidence, strategy))
        .collect()
}

pub fn posterior_bounds_in(
    net: &CredalNetwork,
    space: &SkillSpace,
    target: VarId,
    evidence: &Evidence,
    strategy: &CredalStrategy,
) -> Result<CredalBounds> {
    let var = net.variable(target);
    if var.role != Role::Skill {
        return Err(Error::NotASkill(var.id.clone()));
    }
    let family = Completions::new(net, space, &[target], evidence, None)?;
    let card = var.card();
    let k = space.position(target).expect("skills are indexed");
    let cells_by_state: Vec<Vec<usize>> = (0..card)
        .map(|st| (0..family.cells()).filter(|&c| space.state(k, c) == st).collect())
        .collect();
    let posterior = |w: &[f64], st: usize| -> f64 {
        let total: f64 = w.iter().sum();
        cells_by_state[st].iter().map(|&c| w[c]).sum::<f64>() / total
    };

    let method = strategy.resolve(family.vertex_count())?;
    let mut lower = vec![f64::INFINITY; card];
    let mut upper = vec![f64::NEG_INFINITY; card];
    match method {
        StrategyKind::VertexEnumeration => {
            family.enumerate(|w| {
                let total = checked_total(w)?;
                for st in 0..card {
                    let p = cells_by_state[st].iter().map(|&c| w[c]).sum::<f64>() / total;
                    lower[st] = lower[st].min(p);
                    upper[st] = upper[st].max(p);
                }
                Ok(())
            })?;
        }
        _ => {
            // for a Boolean skill the bounds of one state fix the other
            let states: Vec<usize> = if card == 2 { vec![1] } else { (0..card).collect() };
            for &st in &states {
                let objective = |w: &[f64]| posterior(w, st);
                let seed = mix(strategy.seed, st as u64);
                lower[st] = family.ascend(&objective, false, strategy.restarts, seed);
                upper[st] = family.ascend(&objective, true, strategy.restarts, seed ^ 0x9e37_79b9);
            }
            if card == 2 {
                lower[0] = 1.0 - upper[1];
                upper[0] = 1.0 - lower[1];
            }
            if lower.iter().chain(&upper).any(|x| !x.is_finite()) {
                return Err(Error::InconsistentEvidence);
            }
        }
    }
    for (l, u) in lower.iter_mut().zip(upper.iter_mut()) {
        *l = l.clamp(0.0, 1.0);
        *u = u.clamp(*l, 1.0);
    }
    Ok(CredalBounds {
        bounds: IntervalPmf::new_unchecked(lower, upper),
        exact: method == StrategyKind::VertexEnumeration,
        method,
    })
}

/// Per-state `(lower + upper) / 2`, renormalized.
pub fn midpoint(bounds: &IntervalPmf) -> Pmf {
    let mid: Vec<f64> = bounds
        .lower()
        .iter()
        .zip(bounds.upper())
        .map(|(l, u)| 0.5 * (l + u))
        .collect();
    Pmf::from_weights(&mid).unwrap_or_else(|| Pmf::uniform(bounds.len()))
}

/// A Bayesian completion with every row drawn at random from its credal set
/// (a random convex combination of the row's vertices).
pub fn random_completion(net: &CredalNetwork, rng: &mut impl Rng) -> BayesianNetwork {
    net.map_tables(|t| {
        t.map_rows(|row| {
            let vs = row.vertices();
            let w: Vec<f64> = vs.iter().map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
            let total: f64 = w.iter().sum();
            let mut p = vec![0.0; row.len()];
            for (v, wi) in vs.iter().zip(&w) {
                for (x, y) in p.iter_mut().zip(v.probs()) {
                    *x += wi / total * y;
                }
            }
            Pmf::new_unchecked(p)
        })
    })
}

pub(crate) fn mix(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
