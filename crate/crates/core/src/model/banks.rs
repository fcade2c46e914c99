//! Bundled test models.

use super::{build_boolean_question, BayesianNetwork, NetworkBuilder, Pmf, QuestionParams, Table};

const BOOL: [&str; 2] = ["0", "1"];

/// One Boolean skill `S` with a uniform prior and two questions:
/// `Q1` with `P(Q1=1|S=1)=0.9, P(Q1=1|S=0)=0.3` and `Q2` with `0.6 / 0.4`.
pub fn fig1() -> BayesianNetwork {
    let mut b = NetworkBuilder::new();
    let s = b.skill("S", "Knows multiplication", &BOOL);
    let q1 = b.question("Q1", "10 x 5?", &BOOL);
    let q2 = b.question("Q2", "13 x 14?", &BOOL);
    b.table(Table::new(s, vec![], vec![Pmf::uniform(2)]));
    for (q, delta, kappa) in [(q1, 0.4, 0.6), (q2, 0.5, 0.2)] {
        let params = QuestionParams::new(delta, kappa).expect("valid parameters");
        b.table(build_boolean_question(q, s, params).expect("valid parameters"));
    }
    b.build().expect("fig1 model is valid")
}

/// `(delta, kappa)` grid of the single-skill bank, in question-id order.
pub const SINGLE_SKILL_GRID: [f64; 3] = [0.4, 0.5, 0.6];

/// One Boolean skill with a uniform prior and 18 questions, two per
/// `(delta, kappa)` point of [`SINGLE_SKILL_GRID`] squared. Ids `Q01..Q18`
/// follow `(delta, kappa)` lexicographic order.
pub fn single_skill_bank() -> BayesianNetwork {
    let mut b = NetworkBuilder::new();
    let s = b.skill("S", "Skill", &BOOL);
    b.table(Table::new(s, vec![], vec![Pmf::uniform(2)]));
    let mut n = 0;
    for &delta in &SINGLE_SKILL_GRID {
        for &kappa in &SINGLE_SKILL_GRID {
            for _ in 0..2 {
                n += 1;
                let q = b.question(
                    &format!("Q{n:02}"),
                    &format!("delta={delta} kappa={kappa}"),
                    &BOOL,
                );
                let params = QuestionParams::new(delta, kappa).expect("grid values are valid");
                b.table(build_boolean_question(q, s, params).expect("grid values are valid"));
            }
        }
    }
    b.build().expect("single-skill bank is valid")
}

/// Question levels of the bundled chain model.
pub const CHAIN_LEVELS: [(f64, f64); 4] = [(0.4, 0.6), (0.5, 0.8), (0.5, 0.6), (0.6, 0.6)];

/// Shape of a chain-of-skills bank.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainBankSpec {
    pub skills: usize,
    /// `P(S_{i+1}=1 | S_i=1)` and `P(S_{i+1}=1 | S_i=0)`.
    pub link: (f64, f64),
    pub levels: Vec<(f64, f64)>,
    pub per_level: usize,
}

impl Default for ChainBankSpec {
    fn default() -> Self {
        Self {
            skills: 4,
            link: (0.8, 0.2),
            levels: CHAIN_LEVELS.to_vec(),
            per_level: 4,
        }
    }
}

/// Boolean skills `S1 -> S2 -> ... ` with `per_level` questions per level and
/// skill. Question ids run level-major, then repetition, then skill, so that
/// consecutive ids address different skills.
pub fn chain_bank(spec: &ChainBankSpec) -> BayesianNetwork {
    let mut b = NetworkBuilder::new();
    let skills: Vec<_> = (1..=spec.skills)
        .map(|i| b.skill(&format!("S{i}"), &format!("Skill {i}"), &BOOL))
        .collect();
    for (i, &s) in skills.iter().enumerate() {
        if i == 0 {
            b.table(Table::new(s, vec![], vec![Pmf::uniform(2)]));
        } else {
            let (p1, p0) = spec.link;
            b.table(Table::new(
                s,
                vec![skills[i - 1]],
                vec![
                    Pmf::new(vec![1.0 - p0, p0]).expect("link probability in [0, 1]"),
                    Pmf::new(vec![1.0 - p1, p1]).expect("link probability in [0, 1]"),
                ],
            ));
        }
    }
    let mut n = 0;
    for (level, &(delta, kappa)) in spec.levels.iter().enumerate() {
        for rep in 0..spec.per_level {
            for (k, &s) in skills.iter().enumerate() {
                n += 1;
                let q = b.question(
                    &format!("Q{n:02}"),
                    &format!("skill S{} level {} item {}", k + 1, level + 1, rep + 1),
                    &BOOL,
                );
                let params = QuestionParams::new(delta, kappa).expect("valid level");
                b.table(build_boolean_question(q, s, params).expect("valid level"));
            }
        }
    }
    b.build().expect("chain bank is valid")
}
