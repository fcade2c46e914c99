use crate::model::VarId;

/// A nonnegative table over a set of discrete variables.
///
/// Values are stored row-major over `vars` (first variable slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub vars: Vec<VarId>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

impl Factor {
    pub fn new(vars: Vec<VarId>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(vars.len(), cards.len());
        debug_assert_eq!(values.len(), cards.iter().product::<usize>());
        Self { vars, cards, values }
    }

    pub fn scalar(value: f64) -> Self {
        Self::new(Vec::new(), Vec::new(), vec![value])
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.vars.contains(&v)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.cards[i + 1];
        }
        strides
    }

    /// Pointwise product over the union of both scopes.
    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (v, c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(v) {
                vars.push(*v);
                cards.push(*c);
            }
        }
        let size: usize = cards.iter().product();
        let stride_in = |f: &Factor| -> Vec<usize> {
            let s = f.strides();
            vars.iter()
                .map(|v| f.vars.iter().position(|w| w == v).map_or(0, |k| s[k]))
                .collect()
        };
        let sa = stride_in(self);
        let sb = stride_in(other);
        let mut values = Vec::with_capacity(size);
        let mut counter = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            // odometer increment, last variable fastest
            for d in (0..vars.len()).rev() {
                counter[d] += 1;
                ia += sa[d];
                ib += sb[d];
                if counter[d] < cards[d] {
                    break;
                }
                ia -= sa[d] * cards[d];
                ib -= sb[d] * cards[d];
                counter[d] = 0;
            }
        }
        Factor { vars, cards, values }
    }

    /// Sums `v` out of the factor.
    pub fn sum_out(&self, v: VarId) -> Factor {
        let k = match self.vars.iter().position(|&w| w == v) {
            Some(k) => k,
            None => return self.clone(),
        };
        let strides = self.strides();
        let card = self.cards[k];
        let inner = strides[k];
        let outer = self.values.len() / (card * inner);
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for s in 0..card {
                let base = (o * card + s) * inner;
                for i in 0..inner {
                    values[o * inner + i] += self.values[base + i];
                }
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(k);
        cards.remove(k);
        Factor { vars, cards, values }
    }

    /// Restricts `v` to `state`, dropping it from the scope.
    pub fn reduce(&self, v: VarId, state: usize) -> Factor {
        let k = match self.vars.iter().position(|&w| w == v) {
            Some(k) => k,
            None => return self.clone(),
        };
        let strides = self.strides();
        let card = self.cards[k];
        let inner = strides[k];
        let outer = self.values.len() / (card * inner);
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = (o * card + state) * inner;
            values.extend_from_slice(&self.values[base..base + inner]);
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(k);
        cards.remove(k);
        Factor { vars, cards, values }
    }

    /// Permutes the scope into `order`, which must list exactly the factor's variables.
    pub fn reorder(&self, order: &[VarId]) -> Factor {
        if order == self.vars.as_slice() {
            return self.clone();
        }
        let strides = self.strides();
        let perm: Vec<usize> = order
            .iter()
            .map(|v| self.vars.iter().position(|w| w == v).expect("variable in scope"))
            .collect();
        let cards: Vec<usize> = perm.iter().map(|&k| self.cards[k]).collect();
        let src: Vec<usize> = perm.iter().map(|&k| strides[k]).collect();
        let mut values = Vec::with_capacity(self.values.len());
        let mut counter = vec![0usize; order.len()];
        let mut idx = 0usize;
        for _ in 0..self.values.len() {
            values.push(self.values[idx]);
            for d in (0..order.len()).rev() {
                counter[d] += 1;
                idx += src[d];
                if counter[d] < cards[d] {
                    break;
                }
                idx -= src[d] * cards[d];
                counter[d] = 0;
            }
        }
        Factor {
            vars: order.to_vec(),
            cards,
            values,
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}
