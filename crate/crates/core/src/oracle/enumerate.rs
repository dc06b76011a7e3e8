//! Brute-force enumeration of the DAGs represented by a partially directed graph.

use crate::error::{Error, Result};
use crate::graph::{Dag, Edge, EdgeKind, NodeId, Pdag};

/// Default cap on undirected edges for [`enumerate_dags`].
pub const DEFAULT_CAP: usize = 20;

struct Search<'g> {
    g: &'g Pdag,
    undirected: Vec<(NodeId, NodeId)>,
    /// `dir[u * n + v]`: `u -> v` is present in the partial orientation.
    dir: Vec<bool>,
    chosen: Vec<Edge>,
    limit: usize,
    out: Vec<Pdag>,
}

impl Search<'_> {
    fn reaches(&self, from: NodeId, to: NodeId) -> bool {
        let n = self.g.n();
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        seen[from.0] = true;
        while let Some(u) = stack.pop() {
            if u == to {
                return true;
            }
            for (v, s) in seen.iter_mut().enumerate() {
                if self.dir[u.0 * n + v] && !*s {
                    *s = true;
                    stack.push(NodeId(v));
                }
            }
        }
        false
    }

    /// Whether adding `u -> v` creates an unshielded collider at `v` that `g` lacks.
    fn new_collider(&self, u: NodeId, v: NodeId) -> bool {
        let n = self.g.n();
        (0..n).map(NodeId).any(|p| {
            p != u
                && self.dir[p.0 * n + v.0]
                && !self.g.adjacent(p, u)
                && !(self.g.has_directed(p, v) && self.g.has_directed(u, v))
        })
    }

    fn run(&mut self, i: usize) {
        if self.out.len() >= self.limit {
            return;
        }
        if i == self.undirected.len() {
            let mut edges: Vec<Edge> = self
                .g
                .edges()
                .iter()
                .copied()
                .filter(|e| e.kind == EdgeKind::Directed)
                .collect();
            edges.extend(self.chosen.iter().copied());
            self.out.push(self.g.with_edges(edges).expect("orientation keeps skeleton"));
            return;
        }
        let n = self.g.n();
        let (a, b) = self.undirected[i];
        for (u, v) in [(a, b), (b, a)] {
            if self.reaches(v, u) || self.new_collider(u, v) {
                continue;
            }
            self.dir[u.0 * n + v.0] = true;
            self.chosen.push(Edge::directed(u, v));
            self.run(i + 1);
            self.chosen.pop();
            self.dir[u.0 * n + v.0] = false;
        }
    }
}

fn search(g: &Pdag, limit: usize) -> Vec<Pdag> {
    let n = g.n();
    let mut dir = vec![false; n * n];
    for e in g.edges().iter().filter(|e| e.kind == EdgeKind::Directed) {
        dir[e.a.0 * n + e.b.0] = true;
    }
    let undirected = g
        .edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Undirected)
        .map(|e| (e.a, e.b))
        .collect();
    let mut s = Search { g, undirected, dir, chosen: Vec::new(), limit, out: Vec::new() };
    if g.has_directed_cycle() {
        return Vec::new();
    }
    s.run(0);
    s.out
}

/// All DAGs with `g`'s skeleton and directed edges and no unshielded collider
/// absent from `g`, in a deterministic order.
///
/// Collider status is read off `g` itself, so this is the class `[g]` for
/// any PDAG, closed or not.
pub fn enumerate_dags(g: &Pdag, cap: usize) -> Result<Vec<Dag>> {
    let found = g.undirected_count();
    if found > cap {
        return Err(Error::TooManyUndirectedEdges { found, cap });
    }
    Ok(search(g, usize::MAX)
        .into_iter()
        .map(|d| Dag::new(d).expect("search emits DAGs"))
        .collect())
}

/// First DAG found by [`enumerate_dags`], if any.
pub fn first_extension(g: &Pdag) -> Option<Pdag> {
    search(g, 1).pop()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(text: &str) -> usize {
        enumerate_dags(&Pdag::parse(text).unwrap(), DEFAULT_CAP).unwrap().len()
    }

    #[test]
    fn triangle_counts() {
        assert_eq!(count("X -- Y; Y -- Z; Z -- X"), 6);
        assert_eq!(count("X -> Y; Z -> Y; Z -- X"), 2);
        assert_eq!(count("A -> B; C -> B"), 1);
        assert_eq!(count("A -- B; B -- C"), 3);
    }

    #[test]
    fn no_new_collider_next_to_existing_one() {
        // D -> B would add the unshielded collider A -> B <- D.
        assert_eq!(count("A -> B; C -> B; B -- D"), 1);
    }

    #[test]
    fn cap_is_enforced() {
        let g = Pdag::parse("A -- B; B -- C; C -- A").unwrap();
        assert!(matches!(
            enumerate_dags(&g, 2),
            Err(Error::TooManyUndirectedEdges { found: 3, cap: 2 })
        ));
    }
}
