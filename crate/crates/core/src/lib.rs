//! Identification of conditional causal effects from maximally oriented
//! partially directed acyclic graphs (MPDAGs).
//!
//! ```
//! use mpdag_core::graph::{Mpdag, Pdag};
//! use mpdag_core::ident::{cidm, IdentificationResult, Query};
//!
//! let g = Mpdag::new(Pdag::parse("X -> Y; V -> X; V -> Y").unwrap()).unwrap();
//! let q = Query::parse(&g, "X", "Y", "V").unwrap();
//! assert!(matches!(cidm(&g, &q).unwrap(), IdentificationResult::Identified(_)));
//! ```

pub mod dsep;
pub mod error;
pub mod graph;
pub mod ident;
pub mod meek;
pub mod oracle;
pub mod pco;
pub mod reach;

pub use error::{Error, Result};
