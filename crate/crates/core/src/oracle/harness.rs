//! Numeric soundness checks of identification results against `[G]`.
//!
//! Each trial draws a random discrete model on one member DAG. Its joint is
//! Markov to every DAG in the class, so each member can be refit to the same
//! joint; an identified expression must reproduce the truncated
//! factorization of every refit model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::graph::{Dag, Mpdag};
use crate::ident::{DensityExpression, Query};
use crate::oracle::discrete::{
    configurations, evaluate_expression, Assignment, DiscreteModel, JointTable,
};
use crate::oracle::enumerate::{enumerate_dags, DEFAULT_CAP};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoundnessReport {
    pub dags: usize,
    pub trials: usize,
    pub evaluations: usize,
    pub max_deviation: f64,
}

/// `f(y | do(x), z)` for every `(x, y, z)` configuration, in a fixed order.
pub fn effect_table(m: &DiscreteModel, q: &Query) -> Result<Vec<f64>> {
    let d = m.domains();
    let mut out = Vec::new();
    for x in configurations(d, &q.x) {
        let post = m.truncated_joint(&x)?;
        for z in configurations(d, &q.z) {
            for y in configurations(d, &q.y) {
                out.push(post.conditional(&y, &z)?);
            }
        }
    }
    Ok(out)
}

/// `e` evaluated on `joint` in the order of [`effect_table`].
pub fn expression_table(e: &DensityExpression, joint: &JointTable, q: &Query) -> Result<Vec<f64>> {
    let d = joint.domains();
    let mut out = Vec::new();
    for x in configurations(d, &q.x) {
        for z in configurations(d, &q.z) {
            for y in configurations(d, &q.y) {
                let mut b: Assignment = x.clone();
                b.extend(z.iter().map(|(k, v)| (*k, *v)));
                b.extend(y.iter().map(|(k, v)| (*k, *v)));
                out.push(evaluate_expression(e, joint, &b)?);
            }
        }
    }
    Ok(out)
}

/// Per-DAG effect tables for one random joint drawn on `class[seed_dag]`.
pub fn class_effects(class: &[Dag], seed_dag: usize, q: &Query, rng: &mut ChaCha8Rng) -> Result<(JointTable, Vec<Vec<f64>>)> {
    let base = DiscreteModel::random_binary(&class[seed_dag], rng);
    let joint = base.joint();
    let tables = class
        .iter()
        .map(|d| effect_table(&DiscreteModel::from_joint(d, &joint)?, q))
        .collect::<Result<Vec<_>>>()?;
    Ok((joint, tables))
}

fn trial(class: &[Dag], e: &DensityExpression, q: &Query, seed: u64, t: usize) -> Result<(usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
    let (joint, tables) = class_effects(class, t % class.len(), q, &mut rng)?;
    let lhs = expression_table(e, &joint, q)?;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for rhs in &tables {
        for (a, b) in lhs.iter().zip(rhs) {
            worst = worst.max((a - b).abs());
            count += 1;
        }
    }
    Ok((count, worst))
}

/// Largest gap between `e` and the interventional truth across `trials`
/// random models and every DAG in `[g]`. Trials run in parallel; the result
/// does not depend on scheduling.
pub fn check_expression(
    g: &Mpdag,
    q: &Query,
    e: &DensityExpression,
    trials: usize,
    seed: u64,
) -> Result<SoundnessReport> {
    let class = enumerate_dags(g, DEFAULT_CAP)?;
    let results: Vec<Result<(usize, f64)>> =
        (0..trials).into_par_iter().map(|t| trial(&class, e, q, seed, t)).collect();
    let mut evaluations = 0;
    let mut max_deviation: f64 = 0.0;
    for r in results {
        let (c, w) = r?;
        evaluations += c;
        max_deviation = max_deviation.max(w);
    }
    Ok(SoundnessReport { dags: class.len(), trials, evaluations, max_deviation })
}
