//! Identification of conditional causal effects `f(y | do(x), z)` in MPDAGs.

mod expr;

use serde::Serialize;

pub use expr::{DensityExpression, Factor};

use crate::dsep::{check_disjoint, d_separated, DConnectionWitness, Separation};
use crate::error::{Error, Precondition, Result};
use crate::graph::{Mpdag, NodeId, NodeSet, Pdag};
use crate::meek::{refine, Orientation};
use crate::pco::pco;
use crate::reach::{
    ancestors_excluding, find_proper_pc_path_starting_undirected, parents, possible_ancestors,
    possible_ancestors_excluding, possible_descendants, MarkKind, PathWitness,
};

/// Effect of `x` on `y` given `z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Query {
    pub x: NodeSet,
    pub y: NodeSet,
    pub z: NodeSet,
}

impl Query {
    /// Checks that the sets are in range, pairwise disjoint, and that `x`
    /// and `y` are nonempty.
    pub fn new(g: &Pdag, x: NodeSet, y: NodeSet, z: NodeSet) -> Result<Query> {
        check_disjoint(g, &[&x, &y, &z])?;
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidQuery("treatment and outcome sets must be nonempty".into()));
        }
        Ok(Query { x, y, z })
    }

    /// Builds a query from comma-separated label lists.
    pub fn parse(g: &Pdag, x: &str, y: &str, z: &str) -> Result<Query> {
        Query::new(g, g.parse_set(x)?, g.parse_set(y)?, g.parse_set(z)?)
    }
}

/// Identification formula for `f(y | do(x), z)`.
///
/// Requires `z` to avoid the possible descendants of `x`, and no proper
/// possibly causal path from `x` to `y` that starts with an undirected edge.
pub fn id_formula(g: &Mpdag, q: &Query) -> Result<DensityExpression> {
    id_formula_sets(g, &q.x, &q.y, &q.z)
}

fn id_formula_sets(g: &Mpdag, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<DensityExpression> {
    let possde_x = possible_descendants(g, x)?;
    let affected = z.intersection(&possde_x);
    if !affected.is_empty() {
        return Err(Error::PreconditionViolated(Precondition::ConditioningAffected(
            g.set_labels(&affected),
        )));
    }
    if let Some(p) = find_proper_pc_path_starting_undirected(g, x, y, &NodeSet::new()) {
        return Err(Error::PreconditionViolated(Precondition::UndirectedStart(p)));
    }

    let an_y = ancestors_excluding(g, y, x)?;
    let d = an_y.difference(z);
    let b = d.difference(y);
    let buckets = pco(g, &d)?;
    let mut factors = Vec::with_capacity(buckets.len());
    let mut earlier = NodeSet::new();
    for bucket in &buckets {
        let possde_b = possible_descendants(g, bucket)?;
        if z.is_disjoint(&possde_b) {
            let pa = parents(g, bucket)?;
            factors.push(DensityExpression::Factor(Factor {
                target: bucket.clone(),
                given: pa.difference(x),
                fixed: pa.intersection(x),
            }));
        } else {
            let given = earlier.difference(&possde_x).union(z);
            factors.push(DensityExpression::factor(bucket.clone(), given));
        }
        earlier = earlier.union(bucket);
    }
    Ok(DensityExpression::marginal(b, DensityExpression::product(factors)))
}

/// `f(y | z)` when neither `y` nor `z` meets the possible descendants of `x`.
pub fn rule3_shortcut(g: &Mpdag, q: &Query) -> Result<Option<DensityExpression>> {
    let pd = possible_descendants(g, &q.x)?;
    Ok((pd.is_disjoint(&q.y) && pd.is_disjoint(&q.z))
        .then(|| DensityExpression::factor(q.y.clone(), q.z.clone())))
}

/// `f(y | z)` when Rule 3 removes the whole intervention, i.e. the Rule 3
/// premise holds for dropping `do(x)` given `z`.
pub fn rule3_reduction(g: &Mpdag, q: &Query) -> Result<Option<DensityExpression>> {
    Ok(rule3_holds(g, &NodeSet::new(), &q.y, &q.x, &q.z)?
        .then(|| DensityExpression::factor(q.y.clone(), q.z.clone())))
}

/// Rule 1: `f(y | do(x), z, w) = f(y | do(x), w)` when `Y ⊥ Z | X, W` in
/// the graph with edges into `X` removed.
pub fn rule1_holds(g: &Mpdag, x: &NodeSet, y: &NodeSet, z: &NodeSet, w: &NodeSet) -> Result<bool> {
    check_disjoint(g, &[x, y, z, w])?;
    let m = g.remove_edges_into(x)?;
    Ok(d_separated(&m, y, z, &x.union(w))?.is_separated())
}

/// Rule 2: `f(y | do(x), do(z), w) = f(y | do(x), z, w)` when `Y ⊥ Z | X, W`
/// with edges into `X` and out of `Z` removed.
pub fn rule2_holds(g: &Mpdag, x: &NodeSet, y: &NodeSet, z: &NodeSet, w: &NodeSet) -> Result<bool> {
    check_disjoint(g, &[x, y, z, w])?;
    let m = g.remove_edges_into(x)?.remove_edges_out_of(z)?;
    Ok(d_separated(&m, y, z, &x.union(w))?.is_separated())
}

/// Rule 3: `f(y | do(x), do(z), w) = f(y | do(x), w)` when `Y ⊥ Z | X, W`
/// with edges into `X ∪ Z'(W)` removed, `Z'(W) = Z \ PossAn(W, G[V \ X])`.
pub fn rule3_holds(g: &Mpdag, x: &NodeSet, y: &NodeSet, z: &NodeSet, w: &NodeSet) -> Result<bool> {
    check_disjoint(g, &[x, y, z, w])?;
    let z_w = z.difference(&possible_ancestors_excluding(g, w, x)?);
    let m = g.remove_edges_into(&x.union(&z_w))?;
    Ok(d_separated(&m, y, z, &x.union(w))?.is_separated())
}

/// Why an effect is not identifiable: a proper possibly causal path starting
/// undirected from `treatment`, and an open path showing the Rule 2 premise
/// fails for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub treatment: NodeId,
    /// Proper possibly causal path from `intervened` to `Y ∪ conditioning`.
    pub path: PathWitness,
    /// Treatments still intervened on when the search failed.
    pub intervened: NodeSet,
    /// Conditioning set at that point, including treatments moved by Rule 2.
    pub conditioning: NodeSet,
    /// Open path from `treatment` to `Y` given `intervened \ {treatment}`
    /// and `conditioning`, with edges into `intervened \ {treatment}` and
    /// out of `treatment` removed.
    pub connection: DConnectionWitness,
}

impl Certificate {
    /// Graph the d-connection lives in.
    pub fn mutilated(&self, g: &Pdag) -> Result<Pdag> {
        let rest = self.rest();
        g.remove_edges_into(&rest)?.remove_edges_out_of(&NodeSet::singleton(self.treatment))
    }

    fn rest(&self) -> NodeSet {
        let mut rest = self.intervened.clone();
        rest.remove(self.treatment);
        rest
    }

    /// Re-checks every claim against `g` and the outcome set `y`.
    pub fn verify(&self, g: &Pdag, y: &NodeSet) -> bool {
        let p = &self.path;
        let targets = y.union(&self.conditioning);
        let proper = p.nodes[1..].iter().all(|v| !self.intervened.contains(*v));
        let path_ok = p.is_valid_in(g)
            && p.first() == self.treatment
            && self.intervened.contains(self.treatment)
            && proper
            && p.nodes.len() >= 2
            && p.marks[0] == MarkKind::Undirected
            && p.is_possibly_causal(g)
            && targets.contains(p.last());
        let Ok(m) = self.mutilated(g) else { return false };
        let cond = self.rest().union(&self.conditioning);
        path_ok
            && self.connection.verify(&m, &NodeSet::singleton(self.treatment), y, &cond)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum IdentificationResult {
    Identified(DensityExpression),
    NotIdentifiable(Box<Certificate>),
}

impl IdentificationResult {
    pub fn expression(&self) -> Option<&DensityExpression> {
        match self {
            IdentificationResult::Identified(e) => Some(e),
            IdentificationResult::NotIdentifiable(_) => None,
        }
    }
}

enum Step {
    Done(DensityExpression),
    Fail { certificate: Certificate },
}

/// Main loop shared by [`cidm`] and [`cidme`]. Treatments passing the Rule 2
/// test are moved into the conditioning set; the first failure stops.
fn cidm_step(g: &Mpdag, y: &NodeSet, x: &mut NodeSet, z: &mut NodeSet) -> Result<Step> {
    loop {
        let targets = y.union(z);
        let Some(path) = find_proper_pc_path_starting_undirected(g, x, &targets, &NodeSet::new())
        else {
            break;
        };
        let t = path.first();
        let mut rest = x.clone();
        rest.remove(t);
        let single = NodeSet::singleton(t);
        let m = g.remove_edges_into(&rest)?.remove_edges_out_of(&single)?;
        match d_separated(&m, y, &single, &rest.union(z))? {
            Separation::Separated => {
                x.remove(t);
                z.insert(t);
            }
            Separation::Connected(w) => {
                let connection = reverse_witness(&m, w);
                return Ok(Step::Fail {
                    certificate: Certificate {
                        treatment: t,
                        path,
                        intervened: x.clone(),
                        conditioning: z.clone(),
                        connection,
                    },
                });
            }
        }
    }

    let xz = x.difference(&possible_ancestors(g, z)?);
    let m = g.remove_edges_into(&xz)?;
    if d_separated(&m, y, x, z)?.is_separated() {
        return Ok(Step::Done(DensityExpression::factor(y.clone(), z.clone())));
    }

    let possde = possible_descendants(g, x)?;
    let zd = z.intersection(&possde);
    let zn = z.difference(&possde);
    let numerator = id_formula_sets(g, x, &y.union(&zd), &zn)?;
    if zd.is_empty() {
        return Ok(Step::Done(numerator));
    }
    let denominator = id_formula_sets(g, x, &zd, &zn)?;
    Ok(Step::Done(DensityExpression::fraction(numerator, denominator)))
}

/// Witness paths are searched from `Y`; certificates read from the treatment.
fn reverse_witness(g: &Pdag, w: DConnectionWitness) -> DConnectionWitness {
    let mut nodes = w.path.nodes;
    nodes.reverse();
    let path = PathWitness::from_nodes(g, nodes).expect("reversal keeps a valid path");
    let mut collider_paths = w.collider_paths;
    collider_paths.reverse();
    DConnectionWitness { path, collider_paths }
}

/// Sound and complete identification of `f(y | do(x), z)`.
pub fn cidm(g: &Mpdag, q: &Query) -> Result<IdentificationResult> {
    let (mut x, mut z) = (q.x.clone(), q.z.clone());
    Ok(match cidm_step(g, &q.y, &mut x, &mut z)? {
        Step::Done(e) => IdentificationResult::Identified(e),
        Step::Fail { certificate } => IdentificationResult::NotIdentifiable(Box::new(certificate)),
    })
}

/// One leaf of the enumeration tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CidmeLeaf {
    pub graph: Mpdag,
    pub expression: DensityExpression,
}

/// Enumerates the expressions the effect takes across refinements of `g`.
/// On each failure the first edge `X -- V` of the offending path is oriented
/// both ways. Leaves are in branch order, `X -> V` first.
pub fn cidme_leaves(g: &Mpdag, q: &Query) -> Result<Vec<CidmeLeaf>> {
    branch(g.clone(), &q.y, q.x.clone(), q.z.clone())
}

/// Multiset of expressions from [`cidme_leaves`].
pub fn cidme(g: &Mpdag, q: &Query) -> Result<Vec<DensityExpression>> {
    Ok(cidme_leaves(g, q)?.into_iter().map(|l| l.expression).collect())
}

fn branch(g: Mpdag, y: &NodeSet, mut x: NodeSet, mut z: NodeSet) -> Result<Vec<CidmeLeaf>> {
    match cidm_step(&g, y, &mut x, &mut z)? {
        Step::Done(expression) => Ok(vec![CidmeLeaf { graph: g, expression }]),
        Step::Fail { certificate } => {
            let (a, b) = (certificate.path.nodes[0], certificate.path.nodes[1]);
            let g1 = refine(&g, Orientation::new(a, b))?;
            let g2 = refine(&g, Orientation::new(b, a))?;
            let (left, right) = rayon::join(
                || branch(g1, y, x.clone(), z.clone()),
                || branch(g2, y, x.clone(), z.clone()),
            );
            let mut out = left?;
            out.extend(right?);
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(text: &str) -> Mpdag {
        Mpdag::new(Pdag::parse(text).unwrap()).unwrap()
    }

    fn f(g: &Pdag, target: &str, given: &str, fixed: &str) -> DensityExpression {
        DensityExpression::Factor(Factor {
            target: g.parse_set(target).unwrap(),
            given: g.parse_set(given).unwrap(),
            fixed: g.parse_set(fixed).unwrap(),
        })
    }

    fn int(g: &Pdag, vars: &str, items: Vec<DensityExpression>) -> DensityExpression {
        DensityExpression::marginal(g.parse_set(vars).unwrap(), DensityExpression::product(items))
    }

    const ADJUST: &str = "X -> Y; V3 -> X; V3 -- V1; V1 -- V2; V2 -> X; V2 -> Y; V1 -> X; V1 -> Y";

    #[test]
    fn adjustment_formula_and_cidm_agree() {
        let g = m(ADJUST);
        let q = Query::parse(&g, "X", "Y", "V1").unwrap();
        let want = int(&g, "V2", vec![f(&g, "Y", "V1,V2", "X"), f(&g, "V2", "V1", "")]);
        assert_eq!(id_formula(&g, &q).unwrap(), want);
        assert_eq!(cidm(&g, &q).unwrap(), IdentificationResult::Identified(want));
    }

    #[test]
    fn empty_z_reduces_to_parent_factors() {
        let g = m("X -> M; M -> Y; C -> X; C -> Y");
        let q = Query::parse(&g, "X", "Y", "").unwrap();
        let want = int(
            &g,
            "M,C",
            vec![f(&g, "M", "", "X"), f(&g, "Y", "M,C", ""), f(&g, "C", "", "")],
        );
        assert_eq!(id_formula(&g, &q).unwrap(), want);
    }

    #[test]
    fn id_formula_preconditions() {
        let g = m("X -- Z; Z -> Y");
        let q = Query::parse(&g, "X", "Y", "Z").unwrap();
        assert!(matches!(
            id_formula(&g, &q),
            Err(Error::PreconditionViolated(Precondition::ConditioningAffected(_)))
        ));
        let q = Query::parse(&g, "X", "Y", "").unwrap();
        assert!(matches!(
            id_formula(&g, &q),
            Err(Error::PreconditionViolated(Precondition::UndirectedStart(_)))
        ));
    }

    #[test]
    fn rule3_shortcut_cases() {
        let g = m(ADJUST);
        let q = Query::parse(&g, "X", "Y", "V1").unwrap();
        assert_eq!(rule3_shortcut(&g, &q).unwrap(), None);
        let iso = m("node X; A -> Y");
        let q = Query::parse(&iso, "X", "Y", "A").unwrap();
        assert_eq!(rule3_shortcut(&iso, &q).unwrap(), Some(f(&iso, "Y", "A", "")));
    }

    #[test]
    fn rules_with_empty_z_hold() {
        let g = m("X -- Z; Z -> Y");
        let (x, y, e) = (g.parse_set("X").unwrap(), g.parse_set("Y").unwrap(), NodeSet::new());
        assert!(rule1_holds(&g, &x, &y, &e, &e).unwrap());
        assert!(rule2_holds(&g, &x, &y, &e, &e).unwrap());
        assert!(rule3_holds(&g, &x, &y, &e, &e).unwrap());
        assert!(matches!(rule1_holds(&g, &x, &x, &e, &e), Err(Error::SetsOverlap(_))));
    }

    #[test]
    fn fail_certificate_verifies() {
        let g = m("X -- Z; Z -> Y; V1 -> X; V1 -> Z; V1 -> Y; X -> Y");
        let q = Query::parse(&g, "X", "Y", "Z").unwrap();
        let IdentificationResult::NotIdentifiable(c) = cidm(&g, &q).unwrap() else {
            panic!("expected failure");
        };
        assert_eq!(c.path.render(&g), "X -- Z");
        let cut = c.mutilated(&g).unwrap();
        assert_eq!(c.connection.render(&cut), "X <- V1 -> Y");
        assert!(c.verify(&g, &q.y));
        assert_eq!(cidme(&g, &q).unwrap().len(), 2);
    }
}
