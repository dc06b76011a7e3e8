//! Ground truth for testing: the DAG class of a graph, textbook DAG
//! d-separation, exact discrete interventional distributions, and
//! linear-Gaussian models.
//!
//! These checks cover a finite battery of discrete and Gaussian models. They
//! test soundness; they do not prove it.

mod dag_dsep;
pub mod discrete;
pub mod enumerate;
pub mod gaussian;
pub mod harness;
pub mod random;

pub use dag_dsep::dag_d_separated;
pub use discrete::{
    evaluate_expression, interventional_density, interventional_probability, Assignment,
    DiscreteModel, JointTable,
};
pub use enumerate::{enumerate_dags, DEFAULT_CAP};
pub use gaussian::{
    gaussian_conditional_expectation, verify_counterexample, wright_covariance,
    CounterexampleReport, LinearGaussianSem,
};
