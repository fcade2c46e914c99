#![allow(dead_code)]

use credalcat::model::{NetworkBuilder, Table};
use credalcat::{BayesianNetwork, Pmf, VarId};
use rand::seq::index::sample;
use rand::Rng;

pub fn random_pmf(rng: &mut impl Rng, n: usize) -> Pmf {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    Pmf::from_weights(&w).unwrap()
}

/// Random network: skills form a DAG where each skill draws up to two
/// parents among earlier skills; each question draws one or two skill
/// parents. `card` gives the number of states of every variable.
pub fn random_bn(rng: &mut impl Rng, skills: usize, questions: usize, card: usize) -> BayesianNetwork {
    let states: Vec<String> = (0..card).map(|s| s.to_string()).collect();
    let states: Vec<&str> = states.iter().map(String::as_str).collect();
    let mut b = NetworkBuilder::new();
    let sk: Vec<VarId> = (0..skills).map(|i| b.skill(&format!("S{i}"), "", &states)).collect();
    let qs: Vec<VarId> = (0..questions).map(|i| b.question(&format!("Q{i}"), "", &states)).collect();
    for (i, &s) in sk.iter().enumerate() {
        let k = rng.gen_range(0..=i.min(2));
        let mut parents: Vec<VarId> = sample(rng, i, k).into_iter().map(|j| sk[j]).collect();
        parents.sort();
        let rows = card.pow(parents.len() as u32);
        b.table(Table::new(s, parents, (0..rows).map(|_| random_pmf(rng, card)).collect()));
    }
    for &q in &qs {
        let k = rng.gen_range(1..=skills.min(2));
        let mut parents: Vec<VarId> = sample(rng, skills, k).into_iter().map(|j| sk[j]).collect();
        parents.sort();
        let rows = card.pow(parents.len() as u32);
        b.table(Table::new(q, parents, (0..rows).map(|_| random_pmf(rng, card)).collect()));
    }
    b.build().unwrap()
}

/// Endpoints of a Boolean interval row: its only extreme points.
pub fn boolean_vertices(row: &credalcat::IntervalPmf) -> Vec<Pmf> {
    let lo1 = row.lower()[1].max(1.0 - row.upper()[0]);
    let hi1 = row.upper()[1].min(1.0 - row.lower()[0]);
    if (hi1 - lo1).abs() < 1e-15 {
        vec![Pmf::new(vec![1.0 - lo1, lo1]).unwrap()]
    } else {
        vec![Pmf::new(vec![1.0 - lo1, lo1]).unwrap(), Pmf::new(vec![1.0 - hi1, hi1]).unwrap()]
    }
}

/// Every Bayesian network whose rows of tables selected by `free` sit at a
/// vertex of the Boolean credal rows; other rows take their first vertex.
pub fn vertex_completions(
    cn: &credalcat::CredalNetwork,
    free: impl Fn(VarId) -> bool,
) -> Vec<BayesianNetwork> {
    let slots: Vec<(usize, usize)> = cn
        .tables()
        .iter()
        .enumerate()
        .filter(|(_, t)| free(t.child))
        .flat_map(|(ti, t)| (0..t.rows.len()).map(move |r| (ti, r)))
        .collect();
    let choices: Vec<Vec<Pmf>> = slots
        .iter()
        .map(|&(ti, r)| boolean_vertices(&cn.tables()[ti].rows[r]))
        .collect();
    let base: Vec<Table<Pmf>> = cn
        .tables()
        .iter()
        .map(|t| t.map_rows(|row| boolean_vertices(row).remove(0)))
        .collect();
    let mut out = Vec::new();
    let mut digit = vec![0usize; slots.len()];
    loop {
        let mut tables = base.clone();
        for (k, &(ti, r)) in slots.iter().enumerate() {
            tables[ti].rows[r] = choices[k][digit[k]].clone();
        }
        out.push(BayesianNetwork::with_structure(cn.shared_structure(), tables).unwrap());
        let mut k = 0;
        loop {
            if k == slots.len() {
                return out;
            }
            digit[k] += 1;
            if digit[k] < choices[k].len() {
                break;
            }
            digit[k] = 0;
            k += 1;
        }
    }
}
