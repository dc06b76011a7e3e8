//! Ancestral relations and possibly causal path search.
//!
//! `PossDe` and `PossAn` are computed by a search over ordered pairs
//! `(prev, cur)`: a step `cur -> next` or `cur -- next` is allowed only when
//! `prev` and `next` are nonadjacent. Every possibly causal path contains an
//! unshielded possibly causal subsequence with the same endpoints, and in an
//! MPDAG (or an induced subgraph of one) every such unshielded walk is forced
//! into a causal path by some member of the DAG class, so the result is
//! exact there. Plain edgewise reachability is not: in `C -> A, A -- B,
//! B -- C` it would put `C` among the possible descendants of `A`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::Result;
use crate::graph::{Mark, NodeId, NodeSet, Pdag};

/// A path with the edge mark between each consecutive pair, seen from the
/// earlier node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathWitness {
    pub nodes: Vec<NodeId>,
    pub marks: Vec<MarkKind>,
}

/// Serializable mirror of [`Mark`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkKind {
    Out,
    In,
    Undirected,
}

impl From<Mark> for MarkKind {
    fn from(m: Mark) -> Self {
        match m {
            Mark::Out => MarkKind::Out,
            Mark::In => MarkKind::In,
            Mark::Undirected => MarkKind::Undirected,
        }
    }
}

impl PathWitness {
    /// Reads edge marks off `g`. `None` unless consecutive nodes are adjacent
    /// and all nodes are distinct.
    pub fn from_nodes(g: &Pdag, nodes: Vec<NodeId>) -> Option<PathWitness> {
        let mut seen = vec![false; g.n()];
        for &v in &nodes {
            if v.0 >= g.n() || std::mem::replace(&mut seen[v.0], true) {
                return None;
            }
        }
        let marks = nodes
            .windows(2)
            .map(|w| g.mark(w[0], w[1]).map(MarkKind::from))
            .collect::<Option<Vec<_>>>()?;
        Some(PathWitness { nodes, marks })
    }

    /// Whether the recorded marks still match `g` and nodes are distinct.
    pub fn is_valid_in(&self, g: &Pdag) -> bool {
        PathWitness::from_nodes(g, self.nodes.clone()).is_some_and(|p| p.marks == self.marks)
    }

    pub fn first(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn last(&self) -> NodeId {
        *self.nodes.last().expect("paths are nonempty")
    }

    /// No edge `V_j -> V_i` in `g` for `i < j`.
    pub fn is_possibly_causal(&self, g: &Pdag) -> bool {
        self.nodes.iter().enumerate().all(|(i, &a)| {
            self.nodes[i + 1..].iter().all(|&b| !g.has_directed(b, a))
        })
    }

    /// Renders as `X -- Z -> Y`.
    pub fn render(&self, g: &Pdag) -> String {
        let mut s = g.label(self.nodes[0]).to_string();
        for (m, v) in self.marks.iter().zip(&self.nodes[1..]) {
            s.push_str(match m {
                MarkKind::Out => " -> ",
                MarkKind::In => " <- ",
                MarkKind::Undirected => " -- ",
            });
            s.push_str(g.label(*v));
        }
        s
    }
}

/// Set parents: tails of directed edges into `s`, minus `s`.
pub fn parents(g: &Pdag, s: &NodeSet) -> Result<NodeSet> {
    g.check_set(s)?;
    let pa: NodeSet = s.iter().flat_map(|v| g.parents_of(v)).collect();
    Ok(pa.difference(s))
}

fn directed_closure(g: &Pdag, s: &NodeSet, forward: bool, excluded: &[bool]) -> NodeSet {
    let mut seen = vec![false; g.n()];
    let mut stack: Vec<NodeId> = s.iter().filter(|v| !excluded[v.0]).collect();
    for v in &stack {
        seen[v.0] = true;
    }
    while let Some(u) = stack.pop() {
        let want = if forward { Mark::Out } else { Mark::In };
        for &(v, m) in g.neighbors(u) {
            if m == want && !seen[v.0] && !excluded[v.0] {
                seen[v.0] = true;
                stack.push(v);
            }
        }
    }
    NodeSet::from_mask(&seen)
}

/// Reflexive ancestors along directed edges.
pub fn ancestors(g: &Pdag, s: &NodeSet) -> Result<NodeSet> {
    g.check_set(s)?;
    Ok(directed_closure(g, s, false, &vec![false; g.n()]))
}

/// Reflexive descendants along directed edges.
pub fn descendants(g: &Pdag, s: &NodeSet) -> Result<NodeSet> {
    g.check_set(s)?;
    Ok(directed_closure(g, s, true, &vec![false; g.n()]))
}

/// Ancestors of `s` in the subgraph induced by the nodes not in `excluded`,
/// on the original node indices.
pub fn ancestors_excluding(g: &Pdag, s: &NodeSet, excluded: &NodeSet) -> Result<NodeSet> {
    g.check_set(s)?;
    g.check_set(excluded)?;
    Ok(directed_closure(g, s, false, &excluded.mask(g.n())))
}

fn unshielded_walk_closure(g: &Pdag, s: &NodeSet, forward: bool, excluded: &[bool]) -> NodeSet {
    let n = g.n();
    // Forward: a step from `cur` to `next` needs `cur -> next` or `cur -- next`.
    // Backward walks the same paths from their far end.
    let step_ok = |m: Mark| {
        m == Mark::Undirected || m == if forward { Mark::Out } else { Mark::In }
    };
    let mut reached = vec![false; n];
    // visited[prev * n + cur]
    let mut visited = vec![false; n * n];
    let mut queue: VecDeque<(NodeId, NodeId)> = VecDeque::new();
    for v in s.iter().filter(|v| !excluded[v.0]) {
        reached[v.0] = true;
        for &(w, m) in g.neighbors(v) {
            if step_ok(m) && !excluded[w.0] && !visited[v.0 * n + w.0] {
                visited[v.0 * n + w.0] = true;
                queue.push_back((v, w));
            }
        }
    }
    while let Some((prev, cur)) = queue.pop_front() {
        reached[cur.0] = true;
        for &(next, m) in g.neighbors(cur) {
            if next != prev
                && step_ok(m)
                && !excluded[next.0]
                && !g.adjacent(prev, next)
                && !visited[cur.0 * n + next.0]
            {
                visited[cur.0 * n + next.0] = true;
                queue.push_back((cur, next));
            }
        }
    }
    NodeSet::from_mask(&reached)
}

/// Reflexive possible descendants: nodes reachable by a possibly causal path.
pub fn possible_descendants(g: &Pdag, s: &NodeSet) -> Result<NodeSet> {
    g.check_set(s)?;
    Ok(unshielded_walk_closure(g, s, true, &vec![false; g.n()]))
}

/// Reflexive possible ancestors.
pub fn possible_ancestors(g: &Pdag, s: &NodeSet) -> Result<NodeSet> {
    g.check_set(s)?;
    Ok(unshielded_walk_closure(g, s, false, &vec![false; g.n()]))
}

/// Possible descendants in the subgraph induced by the nodes not in `excluded`.
pub fn possible_descendants_excluding(
    g: &Pdag,
    s: &NodeSet,
    excluded: &NodeSet,
) -> Result<NodeSet> {
    g.check_set(s)?;
    g.check_set(excluded)?;
    Ok(unshielded_walk_closure(g, s, true, &excluded.mask(g.n())))
}

/// Possible ancestors in the subgraph induced by the nodes not in `excluded`.
pub fn possible_ancestors_excluding(
    g: &Pdag,
    s: &NodeSet,
    excluded: &NodeSet,
) -> Result<NodeSet> {
    g.check_set(s)?;
    g.check_set(excluded)?;
    Ok(unshielded_walk_closure(g, s, false, &excluded.mask(g.n())))
}

struct PathSearch<'g> {
    g: &'g Pdag,
    /// Allowed after the first node: not in X, not forbidden, and able to reach T.
    allowed: Vec<bool>,
    target: Vec<bool>,
    path: Vec<NodeId>,
    on_path: Vec<bool>,
}

impl PathSearch<'_> {
    fn extend(&mut self, depth: usize) -> bool {
        let last = *self.path.last().expect("path starts at a treatment node");
        if self.target[last.0] && self.path.len() > 1 {
            return true;
        }
        if depth == 0 {
            return false;
        }
        let first_step = self.path.len() == 1;
        for &(next, m) in self.g.neighbors(last) {
            let ok_mark = if first_step { m == Mark::Undirected } else { m != Mark::In };
            if !ok_mark || !self.allowed[next.0] || self.on_path[next.0] {
                continue;
            }
            if self.path.iter().any(|&p| self.g.has_directed(next, p)) {
                continue;
            }
            self.path.push(next);
            self.on_path[next.0] = true;
            if self.extend(depth - 1) {
                return true;
            }
            self.on_path[next.0] = false;
            self.path.pop();
        }
        false
    }
}

/// Shortest proper possibly causal path from `x` to `t` whose first edge is
/// undirected and which avoids `forbid`. Among shortest paths the one with
/// the lexicographically smallest node-index sequence is returned.
pub fn find_proper_pc_path_starting_undirected(
    g: &Pdag,
    x: &NodeSet,
    t: &NodeSet,
    forbid: &NodeSet,
) -> Option<PathWitness> {
    let n = g.n();
    let blocked = x.union(forbid);
    let t = t.difference(&blocked);
    if t.is_empty() {
        return None;
    }
    let can_reach = unshielded_walk_closure(g, &t, false, &blocked.mask(n));
    let mut search = PathSearch {
        g,
        allowed: can_reach.mask(n),
        target: t.mask(n),
        path: Vec::new(),
        on_path: vec![false; n],
    };
    for depth in 1..n {
        for start in x.difference(forbid).iter() {
            search.path.clear();
            search.path.push(start);
            search.on_path = vec![false; n];
            search.on_path[start.0] = true;
            if search.extend(depth) {
                return PathWitness::from_nodes(g, search.path.clone());
            }
        }
    }
    None
}
