//! Discrete Bayesian networks, exact interventional distributions via the
//! truncated factorization, and numeric evaluation of density expressions.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, NodeSet};
use crate::ident::{DensityExpression, Factor};

/// Values for some of the nodes.
pub type Assignment = BTreeMap<NodeId, usize>;

/// Joint probability table over all nodes. Node 0 varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    domains: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn value(&self, mut index: usize, v: NodeId) -> usize {
        for d in &self.domains[..v.0] {
            index /= d;
        }
        index % self.domains[v.0]
    }

    /// Marginal probability of a partial assignment.
    pub fn probability(&self, event: &Assignment) -> f64 {
        let strides = strides(&self.domains);
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| event.iter().all(|(v, &val)| (i / strides[v.0]) % self.domains[v.0] == val))
            .map(|(_, p)| p)
            .sum()
    }

    /// `P(target | given)`. Conflicting overlaps yield zero.
    pub fn conditional(&self, target: &Assignment, given: &Assignment) -> Result<f64> {
        let den = self.probability(given);
        if den <= 0.0 {
            return Err(Error::ZeroConditioningMass);
        }
        let mut both = given.clone();
        for (&v, &val) in target {
            if *both.entry(v).or_insert(val) != val {
                return Ok(0.0);
            }
        }
        Ok(self.probability(&both) / den)
    }

    /// Value of node `v` in full configuration `index`.
    pub fn value_at(&self, index: usize, v: NodeId) -> usize {
        self.value(index, v)
    }
}

fn strides(domains: &[usize]) -> Vec<usize> {
    let mut s = Vec::with_capacity(domains.len());
    let mut acc = 1;
    for d in domains {
        s.push(acc);
        acc *= d;
    }
    s
}

/// All assignments to `vars`, first node varying fastest.
pub fn configurations(domains: &[usize], vars: &NodeSet) -> Vec<Assignment> {
    let vars: Vec<NodeId> = vars.iter().collect();
    let total: usize = vars.iter().map(|v| domains[v.0]).product();
    (0..total)
        .map(|mut i| {
            vars.iter()
                .map(|&v| {
                    let val = i % domains[v.0];
                    i /= domains[v.0];
                    (v, val)
                })
                .collect()
        })
        .collect()
}

/// Discrete Bayesian network with strictly positive conditional tables.
#[derive(Debug, Clone)]
pub struct DiscreteModel {
    dag: Dag,
    domains: Vec<usize>,
    parents: Vec<Vec<NodeId>>,
    /// `cpts[v][row * domains[v] + value]`, `row` indexing parent values
    /// with the first parent varying fastest.
    cpts: Vec<Vec<f64>>,
}

impl DiscreteModel {
    /// Validates shapes, positivity and row sums.
    pub fn new(dag: Dag, domains: Vec<usize>, cpts: Vec<Vec<f64>>) -> Result<DiscreteModel> {
        let n = dag.n();
        if domains.len() != n || cpts.len() != n {
            return Err(Error::InvalidModel("one domain and one table per node".into()));
        }
        if domains.contains(&0) {
            return Err(Error::InvalidModel("empty domain".into()));
        }
        let parents: Vec<Vec<NodeId>> = dag.nodes().map(|v| dag.parents_of(v).collect()).collect();
        for v in 0..n {
            let rows: usize = parents[v].iter().map(|p| domains[p.0]).product();
            if cpts[v].len() != rows * domains[v] {
                return Err(Error::InvalidModel(format!("table of {} has wrong size", dag.label(NodeId(v)))));
            }
            for row in cpts[v].chunks(domains[v]) {
                if row.iter().any(|&p| p <= 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidModel(format!(
                        "table of {} is not a positive distribution",
                        dag.label(NodeId(v))
                    )));
                }
            }
        }
        Ok(DiscreteModel { dag, domains, parents, cpts })
    }

    /// Entries drawn uniformly from `[0.1, 0.9]`, then normalized per row.
    pub fn random<R: Rng>(dag: &Dag, domains: Vec<usize>, rng: &mut R) -> DiscreteModel {
        let cpts = dag
            .nodes()
            .map(|v| {
                let rows: usize = dag.parents_of(v).map(|p| domains[p.0]).product();
                let mut t = Vec::with_capacity(rows * domains[v.0]);
                for _ in 0..rows {
                    let row: Vec<f64> =
                        (0..domains[v.0]).map(|_| rng.random_range(0.1..=0.9)).collect();
                    let s: f64 = row.iter().sum();
                    t.extend(row.into_iter().map(|p| p / s));
                }
                t
            })
            .collect();
        DiscreteModel::new(dag.clone(), domains, cpts).expect("random tables are valid")
    }

    pub fn random_binary<R: Rng>(dag: &Dag, rng: &mut R) -> DiscreteModel {
        DiscreteModel::random(dag, vec![2; dag.n()], rng)
    }

    /// Factorizes `joint` along `dag`. Exact when the joint is Markov to `dag`.
    pub fn from_joint(dag: &Dag, joint: &JointTable) -> Result<DiscreteModel> {
        let domains = joint.domains.clone();
        let mut cpts = Vec::with_capacity(dag.n());
        for v in dag.nodes() {
            let pa: NodeSet = dag.parents_of(v).collect();
            let mut t = Vec::new();
            for row in configurations(&domains, &pa) {
                for val in 0..domains[v.0] {
                    t.push(joint.conditional(&Assignment::from([(v, val)]), &row)?);
                }
            }
            cpts.push(t);
        }
        DiscreteModel::new(dag.clone(), domains, cpts)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    fn cpt(&self, v: usize, full: &[usize]) -> f64 {
        let mut row = 0;
        let mut stride = 1;
        for p in &self.parents[v] {
            row += full[p.0] * stride;
            stride *= self.domains[p.0];
        }
        self.cpts[v][row * self.domains[v] + full[v]]
    }

    /// Distribution after `do(intervention)`: product of the tables of
    /// non-intervened nodes, with intervened nodes pinned.
    pub fn truncated_joint(&self, intervention: &Assignment) -> Result<JointTable> {
        for (&v, &val) in intervention {
            if v.0 >= self.domains.len() || val >= self.domains[v.0] {
                return Err(Error::InvalidModel(format!("bad intervention value for {v}")));
            }
        }
        let n = self.domains.len();
        let total: usize = self.domains.iter().product();
        let mut probs = vec![0.0; total];
        let mut full = vec![0usize; n];
        for (i, slot) in probs.iter_mut().enumerate() {
            let mut rest = i;
            for (f, &d) in full.iter_mut().zip(&self.domains) {
                *f = rest % d;
                rest /= d;
            }
            if intervention.iter().any(|(v, &val)| full[v.0] != val) {
                continue;
            }
            *slot = (0..n)
                .filter(|&v| !intervention.contains_key(&NodeId(v)))
                .map(|v| self.cpt(v, &full))
                .product();
        }
        Ok(JointTable { domains: self.domains.clone(), probs })
    }

    pub fn joint(&self) -> JointTable {
        self.truncated_joint(&Assignment::new()).expect("no intervention")
    }
}

/// `f(y | do(x), z)` by the truncated factorization.
pub fn interventional_probability(
    m: &DiscreteModel,
    intervention: &Assignment,
    y: &Assignment,
    z: &Assignment,
) -> Result<f64> {
    m.truncated_joint(intervention)?.conditional(y, z)
}

/// Table of `f(y | do(x), z)` over all values of `ys` and `zs`, as
/// `(y-values, z-values, probability)` rows.
pub fn interventional_density(
    m: &DiscreteModel,
    intervention: &Assignment,
    ys: &NodeSet,
    zs: &NodeSet,
) -> Result<Vec<(Assignment, Assignment, f64)>> {
    let post = m.truncated_joint(intervention)?;
    let mut out = Vec::new();
    for z in configurations(m.domains(), zs) {
        for y in configurations(m.domains(), ys) {
            let p = post.conditional(&y, &z)?;
            out.push((y, z.clone(), p));
        }
    }
    Ok(out)
}

/// Evaluates `e` against an observational joint. `bindings` supplies values
/// for free and intervention-fixed nodes; marginalized nodes are summed over
/// their domains.
pub fn evaluate_expression(
    e: &DensityExpression,
    joint: &JointTable,
    bindings: &Assignment,
) -> Result<f64> {
    match e {
        DensityExpression::Factor(f) => evaluate_factor(f, joint, bindings),
        DensityExpression::Product(items) => {
            let mut acc = 1.0;
            for i in items {
                acc *= evaluate_expression(i, joint, bindings)?;
            }
            Ok(acc)
        }
        DensityExpression::MarginalOver { vars, body } => {
            let mut total = 0.0;
            for vals in configurations(joint.domains(), vars) {
                let mut b = bindings.clone();
                b.extend(vals);
                total += evaluate_expression(body, joint, &b)?;
            }
            Ok(total)
        }
        DensityExpression::Fraction { numerator, denominator } => {
            let den = evaluate_expression(denominator, joint, bindings)?;
            if den <= 0.0 {
                return Err(Error::ZeroConditioningMass);
            }
            Ok(evaluate_expression(numerator, joint, bindings)? / den)
        }
    }
}

fn evaluate_factor(f: &Factor, joint: &JointTable, bindings: &Assignment) -> Result<f64> {
    let pick = |s: &NodeSet| -> Result<Assignment> {
        s.iter()
            .map(|v| {
                bindings
                    .get(&v)
                    .map(|&val| (v, val))
                    .ok_or_else(|| Error::InvalidModel(format!("no value bound for {v}")))
            })
            .collect()
    };
    joint.conditional(&pick(&f.target)?, &pick(&f.conditioning())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Pdag;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dag(text: &str) -> Dag {
        Dag::new(Pdag::parse(text).unwrap()).unwrap()
    }

    fn a(pairs: &[(usize, usize)]) -> Assignment {
        pairs.iter().map(|&(v, x)| (NodeId(v), x)).collect()
    }

    #[test]
    fn joint_sums_to_one_and_cpts_round_trip() {
        let d = dag("A -> B; C -> B; B -> D");
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = DiscreteModel::random(&d, vec![2, 3, 2, 2], &mut rng);
        let j = m.joint();
        assert!((j.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let back = DiscreteModel::from_joint(&d, &j).unwrap();
        assert!((back.joint().probs().iter().zip(j.probs()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)) < 1e-12);
    }

    #[test]
    fn null_intervention_is_observational_conditioning() {
        let d = dag("A -> B; B -> C; A -> C");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = DiscreteModel::random_binary(&d, &mut rng);
        let j = m.joint();
        for y in 0..2 {
            for z in 0..2 {
                let p = interventional_probability(&m, &Assignment::new(), &a(&[(2, y)]), &a(&[(0, z)])).unwrap();
                let q = j.probability(&a(&[(2, y), (0, z)])) / j.probability(&a(&[(0, z)]));
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_causal_path_means_no_effect() {
        let d = dag("Y -> X; Z -> Y");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DiscreteModel::random_binary(&d, &mut rng);
        let j = m.joint();
        let p = interventional_probability(&m, &a(&[(1, 1)]), &a(&[(0, 1)]), &a(&[(2, 0)])).unwrap();
        let q = j.conditional(&a(&[(0, 1)]), &a(&[(2, 0)])).unwrap();
        assert!((p - q).abs() < 1e-12);
    }

    #[test]
    fn product_of_node_factors_integrates_to_one() {
        let d = dag("A -> B; B -> C");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let j = DiscreteModel::random_binary(&d, &mut rng).joint();
        let s = |ix: &[usize]| NodeSet::from_indices(ix.iter().copied());
        let e = DensityExpression::marginal(
            s(&[0, 1, 2]),
            DensityExpression::product(vec![
                DensityExpression::factor(s(&[0]), s(&[])),
                DensityExpression::factor(s(&[1]), s(&[0])),
                DensityExpression::factor(s(&[2]), s(&[1])),
            ]),
        );
        assert!((evaluate_expression(&e, &j, &Assignment::new()).unwrap() - 1.0).abs() < 1e-12);
        let f = DensityExpression::factor(s(&[2]), s(&[0]));
        let v = evaluate_expression(&f, &j, &a(&[(2, 1), (0, 0)])).unwrap();
        assert!((v - j.conditional(&a(&[(2, 1)]), &a(&[(0, 0)])).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn invalid_tables_are_rejected() {
        let d = dag("A -> B");
        let bad = DiscreteModel::new(d.clone(), vec![2, 2], vec![vec![0.5, 0.5], vec![1.0, 0.0, 0.5, 0.5]]);
        assert!(matches!(bad, Err(Error::InvalidModel(_))));
        let bad = DiscreteModel::new(d, vec![2, 2], vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(matches!(bad, Err(Error::InvalidModel(_))));
    }
}
