//! Linear-Gaussian structural equation models.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Dag, Mpdag, NodeId};
use crate::oracle::enumerate::{enumerate_dags, DEFAULT_CAP};

/// `V_j = c_j + Σ_i β_ij V_i + ε_j`, `ε_j ~ N(0, σ²_j)` independent.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianSem {
    dag: Dag,
    /// `coef[i][j]` is the coefficient on `i -> j`.
    coef: Vec<Vec<f64>>,
    error_var: Vec<f64>,
    intercept: Vec<f64>,
}

impl LinearGaussianSem {
    /// Coefficients on edges of `dag` (missing ones are zero) and positive
    /// error variances.
    pub fn new(dag: Dag, coefs: &[(NodeId, NodeId, f64)], error_var: Vec<f64>) -> Result<Self> {
        let n = dag.n();
        if error_var.len() != n || error_var.iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidModel("need one positive error variance per node".into()));
        }
        let mut coef = vec![vec![0.0; n]; n];
        for &(a, b, c) in coefs {
            if !dag.has_directed(a, b) {
                return Err(Error::InvalidModel(format!(
                    "no edge {} -> {}",
                    dag.label(a),
                    dag.label(b)
                )));
            }
            coef[a.0][b.0] = c;
        }
        Ok(LinearGaussianSem { dag, coef, error_var, intercept: vec![0.0; n] })
    }

    /// Labelled form of [`new`](Self::new). Unlisted error variances default to 1.
    pub fn from_labels(dag: Dag, coefs: &[(&str, &str, f64)], vars: &[(&str, f64)]) -> Result<Self> {
        let mut cs = Vec::new();
        for &(a, b, c) in coefs {
            cs.push((dag.node_or_err(a)?, dag.node_or_err(b)?, c));
        }
        let mut ev = vec![1.0; dag.n()];
        for &(v, s) in vars {
            ev[dag.node_or_err(v)?.0] = s;
        }
        LinearGaussianSem::new(dag, &cs, ev)
    }

    /// Picks error variances so every node has unit variance. Fails if the
    /// coefficients already explain more than all the variance of a node.
    pub fn standardized(dag: Dag, coefs: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let n = dag.n();
        let mut sem = LinearGaussianSem::new(dag, coefs, vec![1.0; n])?;
        let order = sem.dag.topological_order().expect("DAG");
        for v in order {
            let explained = sem.variance_explained(v);
            if explained >= 1.0 {
                return Err(Error::InvalidModel("coefficients too large to standardize".into()));
            }
            sem.error_var[v.0] = 1.0 - explained;
        }
        Ok(sem)
    }

    /// Variance of `β_v^T Pa(v)` using the current covariance of the parents.
    fn variance_explained(&self, v: NodeId) -> f64 {
        let pa: Vec<NodeId> = self.dag.parents_of(v).collect();
        let mut s = 0.0;
        for &a in &pa {
            for &b in &pa {
                s += self.coef[a.0][v.0] * self.coef[b.0][v.0] * self.trek_covariance(a, b);
            }
        }
        s
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn coefficient(&self, a: NodeId, b: NodeId) -> f64 {
        self.coef[a.0][b.0]
    }

    pub fn error_variances(&self) -> &[f64] {
        &self.error_var
    }

    fn b_matrix(&self) -> DMatrix<f64> {
        let n = self.dag.n();
        DMatrix::from_fn(n, n, |i, j| self.coef[i][j])
    }

    fn inverse_i_minus_bt(&self) -> DMatrix<f64> {
        let n = self.dag.n();
        (DMatrix::identity(n, n) - self.b_matrix().transpose())
            .try_inverse()
            .expect("acyclic coefficient matrix is invertible")
    }

    /// `(I - B^T)^{-1} Ω (I - B^T)^{-T}`, with `B[i][j]` the coefficient on `i -> j`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let inv = self.inverse_i_minus_bt();
        let omega = DMatrix::from_diagonal(&DVector::from_vec(self.error_var.clone()));
        &inv * omega * inv.transpose()
    }

    pub fn mean(&self) -> DVector<f64> {
        self.inverse_i_minus_bt() * DVector::from_vec(self.intercept.clone())
    }

    /// Total effect `τ_ab`: sum over directed paths of coefficient products,
    /// with `τ_aa = 1`.
    pub fn total_effect(&self, a: NodeId, b: NodeId) -> f64 {
        if a == b {
            return 1.0;
        }
        self.dag.children_of(a).map(|c| self.coef[a.0][c.0] * self.total_effect(c, b)).sum()
    }

    /// `Cov(a, b) = Σ_k τ_ka τ_kb σ²_k`.
    pub fn trek_covariance(&self, a: NodeId, b: NodeId) -> f64 {
        self.dag
            .nodes()
            .map(|k| self.total_effect(k, a) * self.total_effect(k, b) * self.error_var[k.0])
            .sum()
    }

    /// Whether every node has unit variance.
    pub fn is_standardized(&self) -> bool {
        self.dag.nodes().all(|v| (self.trek_covariance(v, v) - 1.0).abs() < 1e-9)
    }

    /// Model after `do(v = value)`: edges into `v` are dropped and `v`'s
    /// value is substituted into its children's equations.
    pub fn intervene(&self, assignments: &[(NodeId, f64)]) -> LinearGaussianSem {
        let mut out = self.clone();
        for &(v, value) in assignments {
            for c in self.dag.children_of(v) {
                out.intercept[c.0] += out.coef[v.0][c.0] * value;
                out.coef[v.0][c.0] = 0.0;
            }
            for p in self.dag.parents_of(v) {
                out.coef[p.0][v.0] = 0.0;
            }
            out.intercept[v.0] = value;
        }
        out
    }
}

fn collider_free_paths(sem: &LinearGaussianSem, a: NodeId, b: NodeId) -> f64 {
    fn go(
        sem: &LinearGaussianSem,
        cur: NodeId,
        b: NodeId,
        came_in: bool,
        on: &mut Vec<bool>,
        product: f64,
    ) -> f64 {
        if cur == b {
            return product;
        }
        let mut total = 0.0;
        for &(next, mark) in sem.dag.neighbors(cur) {
            if on[next.0] {
                continue;
            }
            // `came_in`: the previous edge points into `cur`; leaving through
            // another arrowhead would make `cur` a collider.
            let into_cur = mark == crate::graph::Mark::In;
            if came_in && into_cur {
                continue;
            }
            let c = if into_cur { sem.coef[next.0][cur.0] } else { sem.coef[cur.0][next.0] };
            on[next.0] = true;
            total += go(sem, next, b, !into_cur, on, product * c);
            on[next.0] = false;
        }
        total
    }
    let mut on = vec![false; sem.dag.n()];
    on[a.0] = true;
    go(sem, a, b, false, &mut on, 1.0)
}

/// Covariance of `a` and `b` by path tracing. Standardized models use the
/// sum over collider-free paths of coefficient products; others use
/// `Σ_k τ_ka τ_kb σ²_k`.
pub fn wright_covariance(sem: &LinearGaussianSem, a: NodeId, b: NodeId) -> f64 {
    if sem.is_standardized() {
        collider_free_paths(sem, a, b)
    } else {
        sem.trek_covariance(a, b)
    }
}

/// `E[target | given]` as `μ_t + Σ_tG Σ_GG^{-1} (g - μ_G)`.
pub fn gaussian_conditional_expectation(
    sem: &LinearGaussianSem,
    target: NodeId,
    given: &[(NodeId, f64)],
) -> Result<f64> {
    let sigma = sem.covariance();
    let mu = sem.mean();
    if given.is_empty() {
        return Ok(mu[target.0]);
    }
    let k = given.len();
    let s11 = DMatrix::from_fn(k, k, |i, j| sigma[(given[i].0 .0, given[j].0 .0)]);
    let s21 = DVector::from_fn(k, |i, _| sigma[(target.0, given[i].0 .0)]);
    let dev = DVector::from_fn(k, |i, _| given[i].1 - mu[given[i].0 .0]);
    let chol = s11.cholesky().ok_or(Error::SingularCovariance)?;
    let w = chol.solve(&dev);
    Ok(mu[target.0] + s21.dot(&w))
}

/// Evidence that two models agree observationally but disagree on an
/// interventional conditional expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    /// Largest entrywise difference of the observational covariances.
    pub covariance_gap: f64,
    /// Largest difference of the observational means.
    pub mean_gap: f64,
    pub expectation_1: f64,
    pub expectation_2: f64,
}

impl CounterexampleReport {
    pub fn difference(&self) -> f64 {
        (self.expectation_1 - self.expectation_2).abs()
    }
}

/// Compares `E[target | do(intervention), given]` under two SEMs whose DAGs
/// must both belong to `[g]`.
pub fn verify_counterexample(
    g: &Mpdag,
    target: NodeId,
    intervention: &[(NodeId, f64)],
    given: &[(NodeId, f64)],
    sem1: &LinearGaussianSem,
    sem2: &LinearGaussianSem,
) -> Result<CounterexampleReport> {
    let class = enumerate_dags(g, DEFAULT_CAP)?;
    for sem in [sem1, sem2] {
        if !class.iter().any(|d| d == sem.dag()) {
            return Err(Error::DagNotInClass);
        }
    }
    let (c1, c2) = (sem1.covariance(), sem2.covariance());
    let covariance_gap = (&c1 - &c2).abs().max();
    let mean_gap = (sem1.mean() - sem2.mean()).abs().max();
    let e1 = gaussian_conditional_expectation(&sem1.intervene(intervention), target, given)?;
    let e2 = gaussian_conditional_expectation(&sem2.intervene(intervention), target, given)?;
    Ok(CounterexampleReport { covariance_gap, mean_gap, expectation_1: e1, expectation_2: e2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Pdag;

    fn dag(text: &str) -> Dag {
        Dag::new(Pdag::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn disconnected_nodes_have_zero_covariance() {
        let d = dag("A -> B; node C");
        let sem = LinearGaussianSem::from_labels(d, &[("A", "B", 0.7)], &[]).unwrap();
        let (a, c) = (NodeId(0), NodeId(2));
        assert_eq!(wright_covariance(&sem, a, c), 0.0);
        assert!(sem.covariance()[(0, 2)].abs() < 1e-15);
    }

    #[test]
    fn standardized_variance_is_one() {
        let d = dag("A -> B; A -> C; B -> C");
        let (a, b, c) = (NodeId(0), NodeId(1), NodeId(2));
        let sem = LinearGaussianSem::standardized(d, &[(a, b, 0.5), (a, c, 0.3), (b, c, -0.4)]).unwrap();
        assert!(sem.is_standardized());
        for v in [a, b, c] {
            assert!((wright_covariance(&sem, v, v) - 1.0).abs() < 1e-12);
        }
        let cov = sem.covariance();
        assert!((wright_covariance(&sem, a, c) - cov[(0, 2)]).abs() < 1e-12);
        assert!((wright_covariance(&sem, b, c) - cov[(1, 2)]).abs() < 1e-12);
    }

    #[test]
    fn intervention_substitutes_value() {
        let d = dag("X -> Y");
        let sem = LinearGaussianSem::from_labels(d, &[("X", "Y", 2.0)], &[]).unwrap();
        let post = sem.intervene(&[(NodeId(0), 3.0)]);
        assert!((gaussian_conditional_expectation(&post, NodeId(1), &[]).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn singular_conditioning_block() {
        let d = dag("X -> Y");
        let sem = LinearGaussianSem::from_labels(d, &[("X", "Y", 1.0)], &[]).unwrap();
        let r = gaussian_conditional_expectation(&sem, NodeId(1), &[(NodeId(0), 1.0), (NodeId(0), 1.0)]);
        assert!(matches!(r, Err(Error::SingularCovariance)));
    }

    #[test]
    fn same_sem_twice_gives_equal_expectations() {
        let g = Mpdag::new(Pdag::parse("X -- Y").unwrap()).unwrap();
        let d = dag("X -> Y");
        let sem = LinearGaussianSem::from_labels(d, &[("X", "Y", 0.5)], &[]).unwrap();
        let r = verify_counterexample(&g, NodeId(1), &[(NodeId(0), 1.0)], &[], &sem, &sem).unwrap();
        assert_eq!(r.difference(), 0.0);
        assert_eq!(r.covariance_gap, 0.0);
        let reversed = LinearGaussianSem::from_labels(dag("node X; Y -> X"), &[], &[]).unwrap();
        let directed = Mpdag::new(Pdag::parse("X -> Y").unwrap()).unwrap();
        assert!(matches!(
            verify_counterexample(&directed, NodeId(1), &[], &[], &reversed, &reversed),
            Err(Error::DagNotInClass)
        ));
    }
}
