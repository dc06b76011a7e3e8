//! Mixed graphs with directed and undirected edges.
//!
//! A single [`Pdag`] type represents DAGs, CPDAGs, MPDAGs and the mutilated
//! graphs that do-calculus premises are evaluated in. Values are immutable;
//! every edit returns a new graph.

mod io;
mod nodeset;

use std::collections::{BTreeSet, HashMap};
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nodeset::{NodeId, NodeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Directed,
    Undirected,
}

/// An edge `a -> b` or `a -- b`. Undirected edges keep the lower index in `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn directed(a: NodeId, b: NodeId) -> Edge {
        Edge { a, b, kind: EdgeKind::Directed }
    }

    pub fn undirected(a: NodeId, b: NodeId) -> Edge {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Edge { a, b, kind: EdgeKind::Undirected }
    }

    fn canonical(self) -> Edge {
        match self.kind {
            EdgeKind::Directed => self,
            EdgeKind::Undirected => Edge::undirected(self.a, self.b),
        }
    }

    fn pair_key(&self) -> (NodeId, NodeId) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

/// Edge endpoint as seen from one node towards a neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mark {
    /// `u -> v`
    Out,
    /// `u <- v`
    In,
    /// `u -- v`
    Undirected,
}

impl Mark {
    pub fn reversed(self) -> Mark {
        match self {
            Mark::Out => Mark::In,
            Mark::In => Mark::Out,
            Mark::Undirected => Mark::Undirected,
        }
    }
}

/// Partially directed graph.
#[derive(Debug, Clone)]
pub struct Pdag {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<Edge>,
    adj: Vec<Vec<(NodeId, Mark)>>,
    marks: Vec<Option<Mark>>,
}

impl PartialEq for Pdag {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.edges == other.edges
    }
}

impl Eq for Pdag {}

impl std::hash::Hash for Pdag {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.labels.hash(state);
        self.edges.hash(state);
    }
}

impl Pdag {
    /// Builds a graph over `labels` from edges on node indices.
    pub fn new(labels: Vec<String>, edges: impl IntoIterator<Item = Edge>) -> Result<Pdag> {
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), NodeId(i)).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let mut marks = vec![None; n * n];
        let mut list = Vec::new();
        for e in edges {
            for v in [e.a, e.b] {
                if v.0 >= n {
                    return Err(Error::UnknownNode(v.0));
                }
            }
            if e.a == e.b {
                return Err(Error::SelfLoop(labels[e.a.0].clone()));
            }
            let e = e.canonical();
            let (a, b) = (e.a.0, e.b.0);
            if marks[a * n + b].is_some() {
                return Err(Error::DuplicateEdge(labels[a].clone(), labels[b].clone()));
            }
            let m = match e.kind {
                EdgeKind::Directed => Mark::Out,
                EdgeKind::Undirected => Mark::Undirected,
            };
            marks[a * n + b] = Some(m);
            marks[b * n + a] = Some(m.reversed());
            list.push(e);
        }
        list.sort_by_key(|e| e.pair_key());
        let mut adj = vec![Vec::new(); n];
        for u in 0..n {
            for v in 0..n {
                if let Some(m) = marks[u * n + v] {
                    adj[u].push((NodeId(v), m));
                }
            }
        }
        Ok(Pdag { labels, index, edges: list, adj, marks })
    }

    /// Builds a graph from labelled nodes and labelled edges.
    pub fn build<S: AsRef<str>>(nodes: &[S], edges: &[(S, S, EdgeKind)]) -> Result<Pdag> {
        let labels: Vec<String> = nodes.iter().map(|s| s.as_ref().to_string()).collect();
        let lookup: HashMap<&str, usize> =
            labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let id = |s: &S| {
            lookup
                .get(s.as_ref())
                .map(|&i| NodeId(i))
                .ok_or_else(|| Error::UnknownLabel(s.as_ref().to_string()))
        };
        let mut list = Vec::with_capacity(edges.len());
        for (a, b, kind) in edges {
            let (a, b) = (id(a)?, id(b)?);
            list.push(Edge { a, b, kind: *kind });
        }
        Pdag::new(labels, list)
    }

    /// Same nodes, different edges.
    pub fn with_edges(&self, edges: impl IntoIterator<Item = Edge>) -> Result<Pdag> {
        Pdag::new(self.labels.clone(), edges)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n()).map(NodeId)
    }

    pub fn all_nodes(&self) -> NodeSet {
        self.nodes().collect()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.0]
    }

    pub fn node(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn node_or_err(&self, label: &str) -> Result<NodeId> {
        self.node(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Edges in canonical order: by unordered endpoint pair.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn mark(&self, u: NodeId, v: NodeId) -> Option<Mark> {
        self.marks[u.0 * self.n() + v.0]
    }

    pub fn adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.mark(u, v).is_some()
    }

    /// `u -> v`
    pub fn has_directed(&self, u: NodeId, v: NodeId) -> bool {
        self.mark(u, v) == Some(Mark::Out)
    }

    pub fn has_undirected(&self, u: NodeId, v: NodeId) -> bool {
        self.mark(u, v) == Some(Mark::Undirected)
    }

    /// Neighbours of `u` with the mark seen from `u`, sorted by index.
    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, Mark)] {
        &self.adj[u.0]
    }

    fn neighbors_with(&self, u: NodeId, m: Mark) -> impl Iterator<Item = NodeId> + '_ {
        self.adj[u.0].iter().filter(move |(_, k)| *k == m).map(|(v, _)| *v)
    }

    pub fn parents_of(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors_with(u, Mark::In)
    }

    pub fn children_of(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors_with(u, Mark::Out)
    }

    pub fn undirected_of(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors_with(u, Mark::Undirected)
    }

    pub fn undirected_count(&self) -> usize {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Undirected).count()
    }

    pub fn is_fully_directed(&self) -> bool {
        self.edges.iter().all(|e| e.kind == EdgeKind::Directed)
    }

    /// Topological order of the directed part, or `None` if it has a cycle.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        let n = self.n();
        let mut indeg: Vec<usize> = (0..n).map(|u| self.parents_of(NodeId(u)).count()).collect();
        let mut ready: BTreeSet<NodeId> =
            (0..n).filter(|&u| indeg[u] == 0).map(NodeId).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.pop_first() {
            order.push(u);
            for c in self.children_of(u) {
                indeg[c.0] -= 1;
                if indeg[c.0] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn has_directed_cycle(&self) -> bool {
        self.topological_order().is_none()
    }

    /// Unordered adjacent pairs.
    pub fn skeleton(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.edges.iter().map(Edge::pair_key).collect()
    }

    /// Unshielded colliders `a -> c <- b` as `(a, c, b)` with `a < b`.
    pub fn unshielded_colliders(&self) -> BTreeSet<(NodeId, NodeId, NodeId)> {
        let mut out = BTreeSet::new();
        for c in self.nodes() {
            let pa: Vec<NodeId> = self.parents_of(c).collect();
            for (i, &a) in pa.iter().enumerate() {
                for &b in &pa[i + 1..] {
                    if !self.adjacent(a, b) {
                        out.insert((a, c, b));
                    }
                }
            }
        }
        out
    }

    pub fn check_set(&self, s: &NodeSet) -> Result<()> {
        match s.iter().find(|v| v.0 >= self.n()) {
            Some(v) => Err(Error::UnknownNode(v.0)),
            None => Ok(()),
        }
    }

    /// Parses a comma-separated list of labels. Empty input gives the empty set.
    pub fn parse_set(&self, text: &str) -> Result<NodeSet> {
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| self.node_or_err(s))
            .collect()
    }

    pub fn set_labels(&self, s: &NodeSet) -> Vec<String> {
        s.iter().map(|v| self.label(v).to_string()).collect()
    }

    /// Deletes every directed edge whose head is in `x`.
    pub fn remove_edges_into(&self, x: &NodeSet) -> Result<Pdag> {
        self.check_set(x)?;
        self.filtered(|e| !(e.kind == EdgeKind::Directed && x.contains(e.b)))
    }

    /// Deletes every directed edge whose tail is in `z`.
    pub fn remove_edges_out_of(&self, z: &NodeSet) -> Result<Pdag> {
        self.check_set(z)?;
        self.filtered(|e| !(e.kind == EdgeKind::Directed && z.contains(e.a)))
    }

    fn filtered(&self, keep: impl Fn(&Edge) -> bool) -> Result<Pdag> {
        self.with_edges(self.edges.iter().copied().filter(keep))
    }

    /// Subgraph on `keep`, reindexed densely in the original node order.
    pub fn induced_subgraph(&self, keep: &NodeSet) -> Result<Pdag> {
        self.check_set(keep)?;
        let mut map = vec![None; self.n()];
        let mut labels = Vec::with_capacity(keep.len());
        for (i, v) in keep.iter().enumerate() {
            map[v.0] = Some(NodeId(i));
            labels.push(self.labels[v.0].clone());
        }
        let edges = self.edges.iter().filter_map(|e| {
            Some(Edge { a: map[e.a.0]?, b: map[e.b.0]?, kind: e.kind })
        });
        Pdag::new(labels, edges)
    }
}

/// Validation outcome of [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GraphClass {
    GeneralPdag,
    Dag,
    Mpdag,
}

/// Tags `g` as a DAG, an MPDAG, or neither.
pub fn classify(g: &Pdag) -> GraphClass {
    if g.has_directed_cycle() {
        return GraphClass::GeneralPdag;
    }
    if g.is_fully_directed() {
        return GraphClass::Dag;
    }
    if Mpdag::new(g.clone()).is_ok() {
        GraphClass::Mpdag
    } else {
        GraphClass::GeneralPdag
    }
}

/// A graph verified to be Meek-closed with a nonempty DAG class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mpdag(Pdag);

impl Mpdag {
    pub fn new(g: Pdag) -> Result<Mpdag> {
        if g.has_directed_cycle() {
            return Err(Error::NotMpdag("directed cycle".into()));
        }
        let closed = crate::meek::meek_closure(&g)
            .map_err(|e| Error::NotMpdag(e.to_string()))?;
        if closed != g {
            return Err(Error::NotMpdag("not closed under the orientation rules".into()));
        }
        Ok(Mpdag(g))
    }

    pub(crate) fn new_unchecked(g: Pdag) -> Mpdag {
        Mpdag(g)
    }

    pub fn pdag(&self) -> &Pdag {
        &self.0
    }

    pub fn into_pdag(self) -> Pdag {
        self.0
    }
}

impl Deref for Mpdag {
    type Target = Pdag;

    fn deref(&self) -> &Pdag {
        &self.0
    }
}

/// A fully directed acyclic graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag(Pdag);

impl Dag {
    pub fn new(g: Pdag) -> Result<Dag> {
        if !g.is_fully_directed() {
            return Err(Error::NotDag("has undirected edges".into()));
        }
        if g.has_directed_cycle() {
            return Err(Error::NotDag("directed cycle".into()));
        }
        Ok(Dag(g))
    }

    pub fn pdag(&self) -> &Pdag {
        &self.0
    }

    pub fn to_mpdag(&self) -> Mpdag {
        Mpdag(self.0.clone())
    }
}

impl Deref for Dag {
    type Target = Pdag;

    fn deref(&self) -> &Pdag {
        &self.0
    }
}
