use thiserror::Error;

use crate::reach::PathWitness;

/// Errors raised by graph construction, closure, and query evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate node label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown node label `{0}`")]
    UnknownLabel(String),
    #[error("node index {0} out of range")]
    UnknownNode(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("inconsistent orientation: {0}")]
    InconsistentOrientation(String),
    #[error("edge `{0}` -- `{1}` is not undirected")]
    NotUndirected(String, String),
    #[error("graph is not an MPDAG: {0}")]
    NotMpdag(String),
    #[error("graph is not a DAG: {0}")]
    NotDag(String),
    #[error("node sets overlap on {0:?}")]
    SetsOverlap(Vec<String>),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("identification formula precondition violated: {0}")]
    PreconditionViolated(Precondition),
    #[error("{found} undirected edges exceed the enumeration cap of {cap}")]
    TooManyUndirectedEdges { found: usize, cap: usize },
    #[error("conditioning event has zero probability")]
    ZeroConditioningMass,
    #[error("conditioning covariance block is singular")]
    SingularCovariance,
    #[error("DAG is not a member of the class")]
    DagNotInClass,
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// Which hypothesis of the identification formula failed.
#[derive(Debug, Clone, PartialEq)]
pub enum Precondition {
    /// Conditioning nodes that are possible descendants of the treatment.
    ConditioningAffected(Vec<String>),
    /// A proper possibly causal path from treatment to outcome that starts undirected.
    UndirectedStart(PathWitness),
}

impl std::fmt::Display for Precondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Precondition::ConditioningAffected(nodes) => {
                write!(f, "conditioning set meets PossDe(X): {}", nodes.join(","))
            }
            Precondition::UndirectedStart(path) => write!(
                f,
                "proper possibly causal path starting undirected through nodes {:?}",
                path.nodes.iter().map(|n| n.index()).collect::<Vec<_>>()
            ),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
