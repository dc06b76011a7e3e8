//! d-separation over definite-status paths.
//!
//! The search runs over ordered pairs `(prev, cur)`. Moving on to `next`
//! requires `cur` to be a collider or a definite non-collider on
//! `(prev, cur, next)` and to be open given `Z`. Definite status is read off
//! the graph exactly as given, including mutilated graphs that are no longer
//! MPDAGs. When the first open walk found repeats a node, an exhaustive
//! search over simple paths settles the question.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Mark, NodeId, NodeSet, Pdag};
use crate::reach::{ancestors, PathWitness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TripleStatus {
    Collider,
    DefiniteNonCollider,
    NotDefinite,
}

/// Status of `cur` on `(prev, cur, next)`. All three must be distinct, with
/// `prev` and `next` both adjacent to `cur`.
pub fn triple_status(g: &Pdag, prev: NodeId, cur: NodeId, next: NodeId) -> TripleStatus {
    let into_cur = |v| g.mark(v, cur) == Some(Mark::Out);
    let out_of_cur = |v| g.mark(cur, v) == Some(Mark::Out);
    if into_cur(prev) && into_cur(next) {
        TripleStatus::Collider
    } else if out_of_cur(prev)
        || out_of_cur(next)
        || (g.has_undirected(prev, cur)
            && g.has_undirected(cur, next)
            && !g.adjacent(prev, next))
    {
        TripleStatus::DefiniteNonCollider
    } else {
        TripleStatus::NotDefinite
    }
}

/// An open definite-status path plus, for each collider on it, a directed
/// path from the collider into the conditioning set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DConnectionWitness {
    pub path: PathWitness,
    pub collider_paths: Vec<Vec<NodeId>>,
}

impl DConnectionWitness {
    /// Independently checks the witness against `g`, `x`, `y`, `z`.
    pub fn verify(&self, g: &Pdag, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> bool {
        let p = &self.path;
        if !p.is_valid_in(g) || !x.contains(p.first()) || !y.contains(p.last()) {
            return false;
        }
        let mut colliders = Vec::new();
        for w in p.nodes.windows(3) {
            match triple_status(g, w[0], w[1], w[2]) {
                TripleStatus::NotDefinite => return false,
                TripleStatus::DefiniteNonCollider if z.contains(w[1]) => return false,
                TripleStatus::DefiniteNonCollider => {}
                TripleStatus::Collider => colliders.push(w[1]),
            }
        }
        colliders.len() == self.collider_paths.len()
            && colliders.iter().zip(&self.collider_paths).all(|(&c, d)| {
                d.first() == Some(&c)
                    && d.last().is_some_and(|&l| z.contains(l))
                    && d.windows(2).all(|e| g.has_directed(e[0], e[1]))
            })
    }

    pub fn render(&self, g: &Pdag) -> String {
        self.path.render(g)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Separation {
    Separated,
    Connected(DConnectionWitness),
}

impl Separation {
    pub fn is_separated(&self) -> bool {
        matches!(self, Separation::Separated)
    }

    pub fn witness(&self) -> Option<&DConnectionWitness> {
        match self {
            Separation::Separated => None,
            Separation::Connected(w) => Some(w),
        }
    }
}

pub(crate) fn check_disjoint(g: &Pdag, sets: &[&NodeSet]) -> Result<()> {
    for s in sets {
        g.check_set(s)?;
    }
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            let common = a.intersection(b);
            if !common.is_empty() {
                return Err(Error::SetsOverlap(g.set_labels(&common)));
            }
        }
    }
    Ok(())
}

struct Ctx<'g> {
    g: &'g Pdag,
    in_x: Vec<bool>,
    in_y: Vec<bool>,
    in_z: Vec<bool>,
    an_z: Vec<bool>,
}

impl Ctx<'_> {
    fn passes(&self, prev: NodeId, cur: NodeId, next: NodeId) -> bool {
        match triple_status(self.g, prev, cur, next) {
            TripleStatus::Collider => self.an_z[cur.0],
            TripleStatus::DefiniteNonCollider => !self.in_z[cur.0],
            TripleStatus::NotDefinite => false,
        }
    }

    fn walk(&self) -> Option<Vec<NodeId>> {
        let n = self.g.n();
        let mut pred: Vec<Option<(NodeId, NodeId)>> = vec![None; n * n];
        let mut seen = vec![false; n * n];
        let mut queue = VecDeque::new();
        for x in (0..n).filter(|&v| self.in_x[v]).map(NodeId) {
            for &(w, _) in self.g.neighbors(x) {
                if self.in_x[w.0] || seen[x.0 * n + w.0] {
                    continue;
                }
                seen[x.0 * n + w.0] = true;
                queue.push_back((x, w));
            }
        }
        while let Some((prev, cur)) = queue.pop_front() {
            if self.in_y[cur.0] {
                let mut walk = vec![cur, prev];
                let mut state = (prev, cur);
                while let Some(p) = pred[state.0 .0 * n + state.1 .0] {
                    walk.push(p.0);
                    state = p;
                }
                walk.reverse();
                return Some(walk);
            }
            for &(next, _) in self.g.neighbors(cur) {
                if next == prev || self.in_x[next.0] || seen[cur.0 * n + next.0] {
                    continue;
                }
                if self.passes(prev, cur, next) {
                    seen[cur.0 * n + next.0] = true;
                    pred[cur.0 * n + next.0] = Some((prev, cur));
                    queue.push_back((cur, next));
                }
            }
        }
        None
    }

    fn simple_path(&self) -> Option<Vec<NodeId>> {
        let n = self.g.n();
        let mut path = Vec::new();
        let mut on_path = vec![false; n];
        for x in (0..n).filter(|&v| self.in_x[v]).map(NodeId) {
            path.push(x);
            on_path[x.0] = true;
            if self.dfs(&mut path, &mut on_path) {
                return Some(path);
            }
            on_path[x.0] = false;
            path.pop();
        }
        None
    }

    fn dfs(&self, path: &mut Vec<NodeId>, on_path: &mut [bool]) -> bool {
        let cur = *path.last().expect("nonempty");
        if path.len() > 1 && self.in_y[cur.0] {
            return true;
        }
        for &(next, _) in self.g.neighbors(cur) {
            if on_path[next.0] || self.in_x[next.0] {
                continue;
            }
            if path.len() > 1 && !self.passes(path[path.len() - 2], cur, next) {
                continue;
            }
            path.push(next);
            on_path[next.0] = true;
            if self.dfs(path, on_path) {
                return true;
            }
            on_path[next.0] = false;
            path.pop();
        }
        false
    }

    fn collider_path(&self, c: NodeId) -> Vec<NodeId> {
        let n = self.g.n();
        let mut pred = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([c]);
        seen[c.0] = true;
        while let Some(u) = queue.pop_front() {
            if self.in_z[u.0] {
                let mut out = vec![u];
                let mut cur = u;
                while let Some(p) = pred[cur.0] {
                    out.push(p);
                    cur = p;
                }
                out.reverse();
                return out;
            }
            for v in self.g.children_of(u) {
                if !seen[v.0] {
                    seen[v.0] = true;
                    pred[v.0] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        unreachable!("collider passed the ancestor test")
    }

    fn witness(&self, nodes: Vec<NodeId>) -> DConnectionWitness {
        let collider_paths = nodes
            .windows(3)
            .filter(|w| triple_status(self.g, w[0], w[1], w[2]) == TripleStatus::Collider)
            .map(|w| self.collider_path(w[1]))
            .collect();
        let path = PathWitness::from_nodes(self.g, nodes).expect("simple path");
        DConnectionWitness { path, collider_paths }
    }
}

/// Whether every definite-status path from `x` to `y` is blocked given `z`.
pub fn d_separated(g: &Pdag, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<Separation> {
    check_disjoint(g, &[x, y, z])?;
    if x.is_empty() || y.is_empty() {
        return Ok(Separation::Separated);
    }
    let n = g.n();
    let ctx = Ctx {
        g,
        in_x: x.mask(n),
        in_y: y.mask(n),
        in_z: z.mask(n),
        an_z: ancestors(g, z)?.mask(n),
    };
    let found = match ctx.walk() {
        None => None,
        Some(w) if is_simple(&w) => Some(w),
        Some(_) => ctx.simple_path(),
    };
    Ok(match found {
        None => Separation::Separated,
        Some(nodes) => Separation::Connected(ctx.witness(nodes)),
    })
}

/// Exhaustive search over simple paths. Same verdict as [`d_separated`].
pub fn d_separated_by_paths(g: &Pdag, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool> {
    check_disjoint(g, &[x, y, z])?;
    let n = g.n();
    let ctx = Ctx {
        g,
        in_x: x.mask(n),
        in_y: y.mask(n),
        in_z: z.mask(n),
        an_z: ancestors(g, z)?.mask(n),
    };
    Ok(ctx.simple_path().is_none())
}

fn is_simple(walk: &[NodeId]) -> bool {
    let mut sorted = walk.to_vec();
    sorted.sort();
    sorted.windows(2).all(|w| w[0] != w[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(text: &str) -> Pdag {
        Pdag::parse(text).unwrap()
    }

    fn sep(g: &Pdag, x: &str, y: &str, z: &str) -> Separation {
        d_separated(g, &g.parse_set(x).unwrap(), &g.parse_set(y).unwrap(), &g.parse_set(z).unwrap())
            .unwrap()
    }

    #[test]
    fn rule2_premise_with_v1_v2() {
        let h = g("X -> Y; V1 -- V2; V2 -- X; V1 -> X; V1 -> Y; V2 -> V3; Y -> V3");
        let cut = h.remove_edges_out_of(&h.parse_set("X").unwrap()).unwrap();
        assert!(sep(&cut, "Y", "X", "V1,V2").is_separated());
    }

    #[test]
    fn chain_rule3_premise() {
        let h = g("X -- Z; Z -> Y");
        let cut = h.remove_edges_into(&h.parse_set("X").unwrap()).unwrap();
        assert!(sep(&cut, "Y", "X", "Z").is_separated());
    }

    #[test]
    fn confounded_connected_with_witness() {
        let h = g("X -- Z; Z -> Y; V1 -> X; V1 -> Z; V1 -> Y; X -> Y");
        let cut = h.remove_edges_out_of(&h.parse_set("X").unwrap()).unwrap();
        let s = sep(&cut, "X", "Y", "Z");
        let w = s.witness().expect("connected");
        assert_eq!(w.render(&cut), "X <- V1 -> Y");
        let (x, y, z) = (
            h.parse_set("X").unwrap(),
            h.parse_set("Y").unwrap(),
            h.parse_set("Z").unwrap(),
        );
        assert!(w.verify(&cut, &x, &y, &z));
    }

    #[test]
    fn trivial_cases() {
        let h = g("node A; node B");
        assert!(sep(&h, "A", "B", "").is_separated());
        let f = g("X -> Y; Z -> Y; Z -- X");
        assert!(!sep(&f, "X", "Z", "").is_separated());
        assert!(matches!(
            d_separated(&f, &f.parse_set("X").unwrap(), &f.parse_set("X,Y").unwrap(), &NodeSet::new()),
            Err(Error::SetsOverlap(_))
        ));
    }

    #[test]
    fn colliders_need_conditioned_descendant() {
        let h = g("A -> B; C -> B; B -> D");
        assert!(sep(&h, "A", "C", "").is_separated());
        let s = sep(&h, "A", "C", "D");
        let w = s.witness().unwrap();
        assert_eq!(w.collider_paths, vec![vec![NodeId(1), NodeId(3)]]);
        assert!(w.verify(&h, &h.parse_set("A").unwrap(), &h.parse_set("C").unwrap(), &h.parse_set("D").unwrap()));
    }

    #[test]
    fn triple_statuses() {
        let h = g("A -- B; B -- C; A -- C; C -> D; E -> D; B -> F");
        let id = |l: &str| h.node(l).unwrap();
        let st = |a, b, c| triple_status(&h, id(a), id(b), id(c));
        assert_eq!(st("A", "B", "C"), TripleStatus::NotDefinite);
        assert_eq!(st("C", "D", "E"), TripleStatus::Collider);
        assert_eq!(st("A", "C", "D"), TripleStatus::DefiniteNonCollider);
        assert_eq!(st("A", "B", "F"), TripleStatus::DefiniteNonCollider);
        let open = g("A -- B; B -- C");
        let id = |l: &str| open.node(l).unwrap();
        assert_eq!(triple_status(&open, id("A"), id("B"), id("C")), TripleStatus::DefiniteNonCollider);
    }
}
