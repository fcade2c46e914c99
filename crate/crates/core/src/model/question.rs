//! Difficulty / discrimination parametrization of Boolean questions.

use serde::{Deserialize, Serialize};

use super::{Cpt, Pmf, Table, VarId};
use crate::error::{Error, Result};

/// `delta` is the mean probability of a wrong answer over the two skill
/// values; `kappa` is how much more likely a right answer is with the skill.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuestionParams {
    pub delta: f64,
    pub kappa: f64,
}

impl QuestionParams {
    pub fn new(delta: f64, kappa: f64) -> Result<Self> {
        let params = Self { delta, kappa };
        params.check()?;
        Ok(params)
    }

    /// `P(Q = 1 | S = 1)`.
    pub fn p_right_with_skill(&self) -> f64 {
        (1.0 - self.delta) + self.kappa / 2.0
    }

    /// `P(Q = 1 | S = 0)`.
    pub fn p_right_without_skill(&self) -> f64 {
        (1.0 - self.delta) - self.kappa / 2.0
    }

    /// Recovers the parameters from the two right-answer probabilities.
    pub fn from_probabilities(p_with: f64, p_without: f64) -> Self {
        Self {
            delta: 1.0 - 0.5 * (p_with + p_without),
            kappa: p_with - p_without,
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} is outside [0, 1]",
                self.delta
            )));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::InvalidParameter(format!(
                "kappa = {} must lie in [0, 1]",
                self.kappa
            )));
        }
        let tol = 1e-12;
        let with = self.p_right_with_skill();
        if !(-tol..=1.0 + tol).contains(&with) {
            return Err(Error::InvalidParameter(format!(
                "row S=1: P(Q=1|S=1) = {with} is outside [0, 1]"
            )));
        }
        let without = self.p_right_without_skill();
        if !(-tol..=1.0 + tol).contains(&without) {
            return Err(Error::InvalidParameter(format!(
                "row S=0: P(Q=1|S=0) = {without} is outside [0, 1]"
            )));
        }
        Ok(())
    }
}

/// CPT of a Boolean question with a single Boolean skill parent.
/// Row 0 is `S = 0`, row 1 is `S = 1`; state 1 of the question is the right answer.
pub fn build_boolean_question(question: VarId, skill: VarId, params: QuestionParams) -> Result<Cpt> {
    params.check()?;
    let row = |p: f64| {
        let p = p.clamp(0.0, 1.0);
        Pmf::new_unchecked(vec![1.0 - p, p])
    };
    Ok(Table::new(
        question,
        vec![skill],
        vec![
            row(params.p_right_without_skill()),
            row(params.p_right_with_skill()),
        ],
    ))
}
