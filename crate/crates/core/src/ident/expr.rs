use serde::Serialize;

use crate::graph::NodeSet;

/// Observational density factor `f(target | given, fixed)`.
///
/// Nodes in `fixed` are held at their intervention values; `given` nodes
/// take the value bound in the enclosing scope.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Factor {
    pub target: NodeSet,
    pub given: NodeSet,
    pub fixed: NodeSet,
}

impl Factor {
    pub fn new(target: NodeSet, given: NodeSet) -> Factor {
        Factor { target, given, fixed: NodeSet::new() }
    }

    /// Conditioning set: `given` and `fixed` together.
    pub fn conditioning(&self) -> NodeSet {
        self.given.union(&self.fixed)
    }

    fn sort_key(&self) -> (Vec<usize>, Vec<usize>) {
        (self.target.indices(), self.conditioning().indices())
    }
}

/// Symbolic expression over observational densities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum DensityExpression {
    Factor(Factor),
    Product(Vec<DensityExpression>),
    MarginalOver { vars: NodeSet, body: Box<DensityExpression> },
    Fraction { numerator: Box<DensityExpression>, denominator: Box<DensityExpression> },
}

impl DensityExpression {
    pub fn factor(target: NodeSet, given: NodeSet) -> Self {
        DensityExpression::Factor(Factor::new(target, given))
    }

    /// `∫ body d vars`, or `body` itself when `vars` is empty.
    pub fn marginal(vars: NodeSet, body: DensityExpression) -> Self {
        DensityExpression::MarginalOver { vars, body: Box::new(body) }.normalized()
    }

    pub fn product(items: Vec<DensityExpression>) -> Self {
        DensityExpression::Product(items).normalized()
    }

    pub fn fraction(numerator: DensityExpression, denominator: DensityExpression) -> Self {
        DensityExpression::Fraction {
            numerator: Box::new(numerator.normalized()),
            denominator: Box::new(denominator.normalized()),
        }
    }

    /// Normal form: nested products flattened, single-item products
    /// unwrapped, factors sorted by target then conditioning indices,
    /// empty marginalizations dropped and nested ones merged.
    pub fn normalized(self) -> Self {
        use DensityExpression::*;
        match self {
            Factor(f) => Factor(f),
            Product(items) => {
                let mut flat = Vec::new();
                for item in items {
                    match item.normalized() {
                        Product(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                // Stable: non-factor items keep their relative order after factors.
                flat.sort_by(|a, b| match (a, b) {
                    (Factor(x), Factor(y)) => x.sort_key().cmp(&y.sort_key()),
                    (Factor(_), _) => std::cmp::Ordering::Less,
                    (_, Factor(_)) => std::cmp::Ordering::Greater,
                    _ => std::cmp::Ordering::Equal,
                });
                if flat.len() == 1 {
                    flat.pop().expect("one item")
                } else {
                    Product(flat)
                }
            }
            MarginalOver { vars, body } => {
                let body = body.normalized();
                if vars.is_empty() {
                    return body;
                }
                match body {
                    MarginalOver { vars: inner, body } => {
                        MarginalOver { vars: vars.union(&inner), body }
                    }
                    body => MarginalOver { vars, body: Box::new(body) },
                }
            }
            Fraction { numerator, denominator } => Fraction {
                numerator: Box::new(numerator.normalized()),
                denominator: Box::new(denominator.normalized()),
            },
        }
    }

    /// Every factor in the expression, depth first.
    pub fn factors(&self) -> Vec<&Factor> {
        let mut out = Vec::new();
        self.collect_factors(&mut out);
        out
    }

    fn collect_factors<'a>(&'a self, out: &mut Vec<&'a Factor>) {
        match self {
            DensityExpression::Factor(f) => out.push(f),
            DensityExpression::Product(items) => {
                items.iter().for_each(|i| i.collect_factors(out))
            }
            DensityExpression::MarginalOver { body, .. } => body.collect_factors(out),
            DensityExpression::Fraction { numerator, denominator } => {
                numerator.collect_factors(out);
                denominator.collect_factors(out);
            }
        }
    }

    /// Nodes not bound by a marginalization.
    pub fn free_variables(&self) -> NodeSet {
        match self {
            DensityExpression::Factor(f) => f.target.union(&f.given),
            DensityExpression::Product(items) => {
                items.iter().fold(NodeSet::new(), |acc, i| acc.union(&i.free_variables()))
            }
            DensityExpression::MarginalOver { vars, body } => {
                body.free_variables().difference(vars)
            }
            DensityExpression::Fraction { numerator, denominator } => {
                numerator.free_variables().union(&denominator.free_variables())
            }
        }
    }

    /// Nodes held at intervention values anywhere in the expression.
    pub fn fixed_variables(&self) -> NodeSet {
        self.factors().iter().fold(NodeSet::new(), |acc, f| acc.union(&f.fixed))
    }

    /// Structural invariants: disjoint factor sets, bound variables used,
    /// no empty denominator.
    pub fn is_well_formed(&self) -> bool {
        match self {
            DensityExpression::Factor(f) => {
                !f.target.is_empty()
                    && f.target.is_disjoint(&f.given)
                    && f.target.is_disjoint(&f.fixed)
                    && f.given.is_disjoint(&f.fixed)
            }
            DensityExpression::Product(items) => items.iter().all(Self::is_well_formed),
            DensityExpression::MarginalOver { vars, body } => {
                body.is_well_formed() && vars.is_subset(&body.free_variables())
            }
            DensityExpression::Fraction { numerator, denominator } => {
                numerator.is_well_formed()
                    && denominator.is_well_formed()
                    && !matches!(**denominator, DensityExpression::Product(ref v) if v.is_empty())
            }
        }
    }
}
