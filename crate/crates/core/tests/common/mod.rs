//! Graphs and helpers shared by the integration tests.

#![allow(dead_code)]

use mpdag_core::graph::{Mpdag, NodeSet, Pdag};
use mpdag_core::ident::{DensityExpression, Factor};

pub const TRIANGLE: &str = "X -- Y; Y -- Z; Z -- X";
pub const TRIANGLE_REFINED: &str = "X -> Y; Z -> Y; Z -- X";
pub const ADJUST: &str = "X -> Y; V3 -> X; V3 -- V1; V1 -- V2; V2 -> X; V2 -> Y; V1 -> X; V1 -> Y";
pub const TWO_TREATMENTS: &str = "X1 -> V1; V1 -> Y; V1 -> X2; X2 -> Y; V2 -> X1; V2 -> Y";
pub const UNAFFECTED: &str = "V1 -> X; V1 -> Y; X -- V2; V2 -- V3; V3 -> Z; V3 -> X; V1 -> V2; V1 -> V3";
pub const RULE2: &str = "X -> Y; V1 -- V2; V2 -- X; V1 -> X; V1 -> Y; V2 -> V3; Y -> V3";
pub const RULE3_CHAIN: &str = "X -- Z; Z -> Y";
pub const NONFRACTIONAL: &str = "X1 -- Z; Z -> Y; X1 -> X2; Z -> X2; X2 -> Y; X1 -> Y";
pub const FRACTIONAL: &str = "X -> Z; Z -- Y; V1 -> X; V1 -> Z; V1 -> Y; X -> Y";
pub const FAIL: &str = "X -- Z; Z -> Y; V1 -> X; V1 -> Z; V1 -> Y; X -> Y";
pub const UNDIRECTED_START: &str = "X -- V1; V1 -> Z; Y -> Z; X -> Y";

pub fn pdag(text: &str) -> Pdag {
    Pdag::parse(text).unwrap()
}

pub fn mpdag(text: &str) -> Mpdag {
    Mpdag::new(pdag(text)).unwrap()
}

pub fn set(g: &Pdag, labels: &str) -> NodeSet {
    g.parse_set(labels).unwrap()
}

pub fn f(g: &Pdag, target: &str, given: &str, fixed: &str) -> DensityExpression {
    DensityExpression::Factor(Factor {
        target: set(g, target),
        given: set(g, given),
        fixed: set(g, fixed),
    })
}

pub fn prod(items: Vec<DensityExpression>) -> DensityExpression {
    DensityExpression::product(items)
}

pub fn int(g: &Pdag, vars: &str, body: DensityExpression) -> DensityExpression {
    DensityExpression::marginal(set(g, vars), body)
}
