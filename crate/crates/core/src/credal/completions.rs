//! Families of Bayesian completions of a credal network, compiled down to
//! their effect on a small table of joint weights.
//!
//! A *cell* is a joint skill configuration, optionally crossed with the state
//! of one unanswered question. Every completion assigns each cell the weight
//! `P(cell, e)`. Only rows that influence the query become free *slots*: rows
//! of skills in the ancestral closure of the targets and the evidence, rows
//! of answered questions (through the probability of the observed state
//! only) and the rows of the extra question. Everything else is fixed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bn::{Evidence, SkillSpace};
use crate::error::{Error, Result};
use crate::model::{CredalNetwork, IntervalPmf, Role, VarId};

#[derive(Debug, Clone)]
struct Slot {
    cells: Vec<usize>,
    /// `candidates[k][idx]` is the factor of candidate `k` on `cells[idx]`.
    candidates: Vec<Vec<f64>>,
    start: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Completions {
    base: Vec<f64>,
    slots: Vec<Slot>,
    /// Slots touching each cell, with the cell's index inside the slot.
    cell_slots: Vec<Vec<(usize, usize)>>,
    /// Number of states of the extra question (1 without one).
    pub extra_card: usize,
}

impl Completions {
    pub fn new(
        net: &CredalNetwork,
        space: &SkillSpace,
        targets: &[VarId],
        evidence: &Evidence,
        extra: Option<VarId>,
    ) -> Result<Self> {
        evidence.check(net.structure())?;
        let s = net.structure();
        let keep = s.ancestral_closure(targets.iter().copied().chain(evidence.vars()).chain(extra));
        let extra_card = extra.map_or(1, |q| net.card(q));
        let cells = space.len() * extra_card;
        let mut base = vec![1.0; cells];
        let mut slots = Vec::new();

        let mut add = |cells_of: Vec<usize>, row: &IntervalPmf, factor: &dyn Fn(&[f64], usize) -> f64, single_state: Option<usize>| {
            let cands: Vec<Vec<f64>> = match single_state {
                Some(st) => {
                    let (l, u) = (row.lower()[st], row.upper()[st]);
                    if (u - l).abs() <= 1e-15 {
                        vec![vec![l]]
                    } else {
                        vec![vec![l], vec![u]]
                    }
                }
                None => row.vertices().into_iter().map(|p| p.probs().to_vec()).collect(),
            };
            let centre = row.central_member();
            let start: Vec<f64> = match single_state {
                Some(st) => vec![centre.get(st)],
                None => centre.probs().to_vec(),
            };
            let expand = |p: &[f64]| -> Vec<f64> { cells_of.iter().map(|&cell| factor(p, cell)).collect() };
            if cands.len() == 1 {
                for (&cell, f) in cells_of.iter().zip(expand(&cands[0])) {
                    base[cell] *= f;
                }
            } else {
                slots.push(Slot {
                    candidates: cands.iter().map(|p| expand(p)).collect(),
                    start: expand(&start),
                    cells: cells_of,
                });
            }
        };

        for v in s.ids() {
            if !keep[v.0] {
                continue;
            }
            let var = s.variable(v);
            let table = net.table(v);
            match var.role {
                Role::Skill => {
                    let k = space.position(v).expect("skills are indexed");
                    for (r, row) in table.rows.iter().enumerate() {
                        let cells_of: Vec<usize> = (0..cells)
                            .filter(|&cell| space.row(v, cell / extra_card) == r)
                            .collect();
                        let state = |cell: usize| space.state(k, cell / extra_card);
                        add(cells_of, row, &|p: &[f64], cell: usize| p[state(cell)], None);
                    }
                }
                Role::Question => {
                    if let Some(obs) = evidence.get(v) {
                        for (r, row) in table.rows.iter().enumerate() {
                            let cells_of: Vec<usize> = (0..cells)
                                .filter(|&cell| space.row(v, cell / extra_card) == r)
                                .collect();
                            add(cells_of, row, &|p: &[f64], _: usize| p[0], Some(obs));
                        }
                    } else if Some(v) == extra {
                        for (r, row) in table.rows.iter().enumerate() {
                            let cells_of: Vec<usize> = (0..cells)
                                .filter(|&cell| space.row(v, cell / extra_card) == r)
                                .collect();
                            add(cells_of, row, &|p: &[f64], cell: usize| p[cell % extra_card], None);
                        }
                    }
                }
            }
        }

        let mut cell_slots = vec![Vec::new(); cells];
        for (k, slot) in slots.iter().enumerate() {
            for (idx, &cell) in slot.cells.iter().enumerate() {
                cell_slots[cell].push((k, idx));
            }
        }
        Ok(Self {
            base,
            slots,
            cell_slots,
            extra_card,
        })
    }

    pub fn cells(&self) -> usize {
        self.base.len()
    }

    /// Number of vertex completions, saturating.
    pub fn vertex_count(&self) -> u128 {
        self.slots
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.candidates.len() as u128))
    }

    /// Calls `visit` with the cell weights of every vertex completion.
    pub fn enumerate(&self, mut visit: impl FnMut(&[f64]) -> Result<()>) -> Result<()> {
        let n = self.slots.len();
        let cells = self.cells();
        // levels[k] holds the product of the base and slots < k
        let mut levels = vec![self.base.clone(); n + 1];
        let mut digit = vec![0usize; n];
        let refresh = |levels: &mut Vec<Vec<f64>>, digit: &[usize], from: usize| {
            for k in from..n {
                let (lo, hi) = levels.split_at_mut(k + 1);
                hi[0].copy_from_slice(&lo[k]);
                let slot = &self.slots[k];
                for (&cell, f) in slot.cells.iter().zip(&slot.candidates[digit[k]]) {
                    hi[0][cell] *= f;
                }
            }
        };
        refresh(&mut levels, &digit, 0);
        debug_assert_eq!(levels[n].len(), cells);
        loop {
            visit(&levels[n])?;
            let mut k = n;
            loop {
                if k == 0 {
                    return Ok(());
                }
                k -= 1;
                digit[k] += 1;
                if digit[k] < self.slots[k].candidates.len() {
                    break;
                }
                digit[k] = 0;
            }
            refresh(&mut levels, &digit, k);
        }
    }

    fn weights_of(&self, factors: &[Vec<f64>]) -> Vec<f64> {
        let mut w = self.base.clone();
        for (slot, f) in self.slots.iter().zip(factors) {
            for (&cell, x) in slot.cells.iter().zip(f) {
                w[cell] *= x;
            }
        }
        w
    }

    /// Coordinate ascent on `objective` over vertex completions: sweep the
    /// slots, moving each to its best candidate, until a sweep changes
    /// nothing. The first run starts at the central completion, later
    /// restarts at random vertices. Returns the best objective value found.
    pub fn ascend(
        &self,
        objective: &dyn Fn(&[f64]) -> f64,
        maximize: bool,
        restarts: usize,
        seed: u64,
    ) -> f64 {
        let better = |a: f64, b: f64| if maximize { a > b + 1e-14 } else { a < b - 1e-14 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = f64::NAN;
        for run in 0..restarts.max(1) {
            let mut factors: Vec<Vec<f64>> = if run == 0 {
                self.slots.iter().map(|s| s.start.clone()).collect()
            } else {
                self.slots
                    .iter()
                    .map(|s| s.candidates.choose(&mut rng).expect("slots have candidates").clone())
                    .collect()
            };
            let mut w = self.weights_of(&factors);
            let mut current = objective(&w);
            let mut scratch = w.clone();
            for sweep in 0..200 {
                let mut moved = false;
                for (k, slot) in self.slots.iter().enumerate() {
                    let mut choice: Option<(usize, f64)> = None;
                    for (c, cand) in slot.candidates.iter().enumerate() {
                        scratch.copy_from_slice(&w);
                        for (idx, &cell) in slot.cells.iter().enumerate() {
                            let old = factors[k][idx];
                            scratch[cell] = if old != 0.0 {
                                w[cell] / old * cand[idx]
                            } else {
                                self.recompute_cell(cell, &factors, Some((k, cand[idx])))
                            };
                        }
                        let value = objective(&scratch);
                        let incumbent = choice.map_or(current, |(_, v)| v);
                        if better(value, incumbent) || (current.is_nan() && !value.is_nan()) {
                            choice = Some((c, value));
                        }
                    }
                    if let Some((c, value)) = choice {
                        factors[k] = slot.candidates[c].clone();
                        for &cell in &slot.cells {
                            w[cell] = self.recompute_cell(cell, &factors, None);
                        }
                        current = value;
                        moved = true;
                    }
                }
                // drop accumulated rounding once per sweep
                w = self.weights_of(&factors);
                current = objective(&w);
                if !moved || sweep == 199 {
                    break;
                }
            }
            if best.is_nan() || better(current, best) {
                best = current;
            }
        }
        best
    }

    fn recompute_cell(&self, cell: usize, factors: &[Vec<f64>], replace: Option<(usize, f64)>) -> f64 {
        let mut w = self.base[cell];
        for &(k, idx) in &self.cell_slots[cell] {
            w *= match replace {
                Some((rk, f)) if rk == k => f,
                _ => factors[k][idx],
            };
        }
        w
    }
}

/// Sum of the weights, failing if some completion makes the evidence impossible.
pub(crate) fn checked_total(w: &[f64]) -> Result<f64> {
    let total: f64 = w.iter().sum();
    if total > 0.0 && total.is_finite() {
        Ok(total)
    } else {
        Err(Error::InconsistentEvidence)
    }
}
