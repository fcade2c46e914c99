//! Point and interval-valued probability mass functions.

use serde::{Deserialize, Serialize};

/// Absolute tolerance for normalization and interval checks.
pub const PROB_TOL: f64 = 1e-9;

/// A normalized discrete distribution over the states of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Builds a PMF, rejecting negative entries or a total that is not 1.
    pub fn new(probs: Vec<f64>) -> Result<Self, String> {
        let pmf = Self { probs };
        pmf.check()?;
        Ok(pmf)
    }

    /// Wraps the values without validation. Callers must uphold the invariants
    /// or run [`Pmf::check`].
    pub fn new_unchecked(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    /// Normalizes a nonnegative weight vector. Returns `None` if the total is zero.
    pub fn from_weights(weights: &[f64]) -> Option<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        Some(Self {
            probs: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// All mass on `state`.
    pub fn degenerate(n: usize, state: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[state] = 1.0;
        Self { probs }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.probs.is_empty() {
            return Err("empty distribution".into());
        }
        for (i, &p) in self.probs.iter().enumerate() {
            if !p.is_finite() || p < -PROB_TOL || p > 1.0 + PROB_TOL {
                return Err(format!("entry {i} = {p} is outside [0, 1]"));
            }
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(format!("entries sum to {total}, expected 1"));
        }
        Ok(())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, state: usize) -> f64 {
        self.probs[state]
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the most probable state; ties go to the lowest index.
    /// First most probable state. Probabilities within `1e-12` of the
    /// maximum count as tied, so rounding noise does not break exact ties.
    pub fn mode(&self) -> usize {
        let max = self.max_prob();
        self.probs.iter().position(|&p| p >= max - 1e-12).unwrap_or(0)
    }

    pub fn expectation(&self, f: &[f64]) -> f64 {
        self.probs.iter().zip(f).map(|(p, v)| p * v).sum()
    }
}

// Moves `bound` to `reachable` only when they differ by more than rounding
// noise, so that reachable input comes back bit-identical.
fn tighten(bound: f64, reachable: f64, is_lower: bool) -> f64 {
    let moved = if is_lower { reachable - bound } else { bound - reachable };
    let out = if moved > 1e-12 { reachable } else { bound };
    out.clamp(0.0, 1.0)
}

/// Per-state probability intervals defining the credal set
/// `{p : lower <= p <= upper, sum(p) = 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalPmf {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl IntervalPmf {
    /// Builds an interval PMF, checking order, non-emptiness and reachability.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, String> {
        let iv = Self { lower, upper };
        iv.check()?;
        Ok(iv)
    }

    pub fn new_unchecked(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self { lower, upper }
    }

    /// Zero-width intervals around a point distribution.
    pub fn degenerate(p: &Pmf) -> Self {
        Self {
            lower: p.probs.clone(),
            upper: p.probs.clone(),
        }
    }

    /// `[0, 1]` on every state.
    pub fn vacuous(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            upper: vec![1.0; n],
        }
    }

    /// Tightens bounds to their reachable values:
    /// `l[v] = max(l[v], 1 - sum_{v' != v} u[v'])` and
    /// `u[v] = min(u[v], 1 - sum_{v' != v} l[v'])`.
    ///
    /// The result is unchanged on already reachable input. Fails if the set
    /// is empty.
    pub fn tightened(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, String> {
        if lower.len() != upper.len() {
            return Err("lower and upper have different lengths".into());
        }
        let sum_l: f64 = lower.iter().sum();
        let sum_u: f64 = upper.iter().sum();
        if sum_l > 1.0 + PROB_TOL || sum_u < 1.0 - PROB_TOL {
            return Err(format!(
                "empty credal set: sum(lower) = {sum_l}, sum(upper) = {sum_u}"
            ));
        }
        let new_lower: Vec<f64> = lower
            .iter()
            .zip(&upper)
            .map(|(&l, &u)| tighten(l, 1.0 - (sum_u - u), true))
            .collect();
        let new_upper: Vec<f64> = lower
            .iter()
            .zip(&upper)
            .map(|(&l, &u)| tighten(u, 1.0 - (sum_l - l), false))
            .collect();
        Self::new(new_lower, new_upper)
    }

    pub fn check(&self) -> Result<(), String> {
        if self.lower.len() != self.upper.len() {
            return Err("lower and upper have different lengths".into());
        }
        if self.lower.is_empty() {
            return Err("empty distribution".into());
        }
        for (i, (&l, &u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !l.is_finite() || !u.is_finite() {
                return Err(format!("state {i} has a non-finite bound"));
            }
            if l < -PROB_TOL || u > 1.0 + PROB_TOL || l > u + PROB_TOL {
                return Err(format!("state {i} interval [{l}, {u}] is not within 0 <= l <= u <= 1"));
            }
        }
        let sum_l: f64 = self.lower.iter().sum();
        let sum_u: f64 = self.upper.iter().sum();
        if sum_l > 1.0 + PROB_TOL || sum_u < 1.0 - PROB_TOL {
            return Err(format!(
                "empty credal set: sum(lower) = {sum_l}, sum(upper) = {sum_u}"
            ));
        }
        for i in 0..self.lower.len() {
            let reach_low = self.lower[i] + (sum_u - self.upper[i]);
            let reach_up = self.upper[i] + (sum_l - self.lower[i]);
            if reach_low < 1.0 - PROB_TOL {
                return Err(format!("lower bound of state {i} is not reachable"));
            }
            if reach_up > 1.0 + PROB_TOL {
                return Err(format!("upper bound of state {i} is not reachable"));
            }
        }
        Ok(())
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn is_degenerate(&self, tol: f64) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .all(|(l, u)| (u - l).abs() <= tol)
    }

    pub fn contains(&self, p: &Pmf, tol: f64) -> bool {
        p.len() == self.len()
            && p
                .probs()
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&l, &u))| x >= l - tol && x <= u + tol)
    }

    /// A member of the set obtained by moving every state the same fraction
    /// of the way from its lower to its upper bound. Equals the interval
    /// midpoint whenever that midpoint is normalized.
    pub fn central_member(&self) -> Pmf {
        let sum_l: f64 = self.lower.iter().sum();
        let width: f64 = self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).sum();
        let t = if width > 0.0 {
            ((1.0 - sum_l) / width).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let probs: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l + t * (u - l))
            .collect();
        Pmf::from_weights(&probs).unwrap_or_else(|| Pmf::uniform(self.len()))
    }

    /// Extreme points of the interval credal set.
    ///
    /// Every vertex has all states but one at a bound; the free state takes
    /// the remaining mass. Zero-width rows yield a single vertex.
    pub fn vertices(&self) -> Vec<Pmf> {
        let n = self.len();
        let mut out: Vec<Vec<f64>> = Vec::new();
        if self.is_degenerate(1e-15) {
            return vec![Pmf::new_unchecked(self.lower.clone())];
        }
        for free in 0..n {
            let others = n - 1;
            for mask in 0u64..(1u64 << others) {
                let mut p = vec![0.0; n];
                let mut bit = 0;
                let mut sum = 0.0;
                for (i, slot) in p.iter_mut().enumerate() {
                    if i == free {
                        continue;
                    }
                    *slot = if mask >> bit & 1 == 1 {
                        self.upper[i]
                    } else {
                        self.lower[i]
                    };
                    sum += *slot;
                    bit += 1;
                }
                let rest = 1.0 - sum;
                if rest < self.lower[free] - 1e-12 || rest > self.upper[free] + 1e-12 {
                    continue;
                }
                p[free] = rest.clamp(self.lower[free], self.upper[free]);
                if !out
                    .iter()
                    .any(|q| q.iter().zip(&p).all(|(a, b)| (a - b).abs() <= 1e-12))
                {
                    out.push(p);
                }
            }
        }
        out.into_iter().map(Pmf::new_unchecked).collect()
    }

    /// Lower and upper expectation of `f` over the credal set.
    pub fn expectation_bounds(&self, f: &[f64]) -> (f64, f64) {
        (self.extreme_expectation(f, false), self.extreme_expectation(f, true))
    }

    // Greedy solution of the linear program over the interval polytope: start
    // from the lower bounds and pour the remaining mass into the states with
    // the best coefficient first.
    fn extreme_expectation(&self, f: &[f64], maximize: bool) -> f64 {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            let ord = f[a].partial_cmp(&f[b]).unwrap_or(std::cmp::Ordering::Equal);
            if maximize {
                ord.reverse()
            } else {
                ord
            }
        });
        let mut p = self.lower.clone();
        let mut remaining = 1.0 - p.iter().sum::<f64>();
        for i in order {
            if remaining <= 0.0 {
                break;
            }
            let add = (self.upper[i] - self.lower[i]).min(remaining);
            p[i] += add;
            remaining -= add;
        }
        p.iter().zip(f).map(|(p, v)| p * v).sum()
    }
}
