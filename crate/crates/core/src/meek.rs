//! Closure under Meek's orientation rules R1-R4, and MPDAG construction
//! from a CPDAG plus background-knowledge orientations.
//!
//! The rules follow Meek (1995). For an undirected edge `a -- b` each rule
//! orients it as `a -> b`:
//!
//! * R1: `c -> a -- b`, `c` and `b` nonadjacent.
//! * R2: `a -> c -> b`.
//! * R3: `a -- c -> b` and `a -- d -> b`, `c` and `d` nonadjacent.
//! * R4: `a -- c -> d -> b`, `a` adjacent to `d`, `c` and `b` nonadjacent.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{Dag, Edge, EdgeKind, Mark, Mpdag, NodeId, Pdag};
use crate::oracle::enumerate;

/// Background knowledge `from -> to` for an undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Orientation {
    pub from: NodeId,
    pub to: NodeId,
}

impl Orientation {
    pub fn new(from: NodeId, to: NodeId) -> Orientation {
        Orientation { from, to }
    }

    /// Parses `A>B`.
    pub fn parse(g: &Pdag, text: &str) -> Result<Orientation> {
        let (a, b) = text.split_once('>').ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("orientation `{text}` is not of the form A>B"),
        })?;
        Ok(Orientation::new(g.node_or_err(a.trim())?, g.node_or_err(b.trim())?))
    }
}

/// Collider triples used as the reference for "no new unshielded colliders".
type Colliders = BTreeSet<(NodeId, NodeId, NodeId)>;

struct Marks {
    n: usize,
    m: Vec<Option<Mark>>,
}

impl Marks {
    fn of(g: &Pdag) -> Marks {
        let n = g.n();
        let mut m = vec![None; n * n];
        for u in g.nodes() {
            for &(v, k) in g.neighbors(u) {
                m[u.0 * n + v.0] = Some(k);
            }
        }
        Marks { n, m }
    }

    fn get(&self, u: usize, v: usize) -> Option<Mark> {
        self.m[u * self.n + v]
    }

    fn adj(&self, u: usize, v: usize) -> bool {
        self.get(u, v).is_some()
    }

    fn dir(&self, u: usize, v: usize) -> bool {
        self.get(u, v) == Some(Mark::Out)
    }

    fn und(&self, u: usize, v: usize) -> bool {
        self.get(u, v) == Some(Mark::Undirected)
    }

    fn orient(&mut self, u: usize, v: usize) {
        self.m[u * self.n + v] = Some(Mark::Out);
        self.m[v * self.n + u] = Some(Mark::In);
    }

    fn implied(&self, a: usize, b: usize) -> bool {
        let n = self.n;
        // R1
        if (0..n).any(|c| self.dir(c, a) && c != b && !self.adj(c, b)) {
            return true;
        }
        // R2
        if (0..n).any(|c| self.dir(a, c) && self.dir(c, b)) {
            return true;
        }
        // R3
        let mids: Vec<usize> = (0..n).filter(|&c| self.und(a, c) && self.dir(c, b)).collect();
        for (i, &c) in mids.iter().enumerate() {
            if mids[i + 1..].iter().any(|&d| !self.adj(c, d)) {
                return true;
            }
        }
        // R4
        for c in (0..n).filter(|&c| self.und(a, c) && c != b && !self.adj(c, b)) {
            if (0..n).any(|d| self.dir(c, d) && self.dir(d, b) && self.adj(a, d)) {
                return true;
            }
        }
        false
    }

    fn into_pdag(self, labels: &[String]) -> Pdag {
        let n = self.n;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                match self.get(u, v) {
                    Some(Mark::Out) => edges.push(Edge::directed(NodeId(u), NodeId(v))),
                    Some(Mark::Undirected) if u < v => {
                        edges.push(Edge::undirected(NodeId(u), NodeId(v)))
                    }
                    _ => {}
                }
            }
        }
        Pdag::new(labels.to_vec(), edges).expect("closure preserves the skeleton")
    }
}

fn inconsistent(msg: impl Into<String>) -> Error {
    Error::InconsistentOrientation(msg.into())
}

fn close(start: &Pdag, reference: &Colliders) -> Result<Pdag> {
    if start.has_directed_cycle() {
        return Err(inconsistent("directed part has a cycle"));
    }
    let n = start.n();
    let mut m = Marks::of(start);
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    let mut queued = vec![false; n * n];
    let push = |q: &mut VecDeque<(usize, usize)>, flags: &mut Vec<bool>, a: usize, b: usize| {
        let (a, b) = (a.min(b), a.max(b));
        if !flags[a * n + b] {
            flags[a * n + b] = true;
            q.push_back((a, b));
        }
    };
    for e in start.edges().iter().filter(|e| e.kind == EdgeKind::Undirected) {
        push(&mut queue, &mut queued, e.a.0, e.b.0);
    }
    while let Some((a, b)) = queue.pop_front() {
        queued[a * n + b] = false;
        if !m.und(a, b) {
            continue;
        }
        let (fwd, bwd) = (m.implied(a, b), m.implied(b, a));
        let (u, v) = match (fwd, bwd) {
            (false, false) => continue,
            (true, true) => {
                return Err(inconsistent(format!(
                    "rules orient `{}` -- `{}` both ways",
                    start.label(NodeId(a)),
                    start.label(NodeId(b))
                )))
            }
            (true, false) => (a, b),
            (false, true) => (b, a),
        };
        m.orient(u, v);
        let mut touched: Vec<usize> = vec![u, v];
        touched.extend((0..n).filter(|&w| m.adj(u, w) || m.adj(v, w)));
        for w in touched {
            for x in 0..n {
                if m.und(w, x) {
                    push(&mut queue, &mut queued, w, x);
                }
            }
        }
    }
    let out = m.into_pdag(start.labels());
    if out.has_directed_cycle() {
        return Err(inconsistent("closure creates a directed cycle"));
    }
    if let Some(&(a, c, b)) = out.unshielded_colliders().difference(reference).next() {
        return Err(inconsistent(format!(
            "closure creates unshielded collider {} -> {} <- {}",
            out.label(a),
            out.label(c),
            out.label(b)
        )));
    }
    if !has_consistent_extension(&out) {
        return Err(inconsistent("no DAG is consistent with the orientations"));
    }
    Ok(out)
}

/// Closes `g` under R1-R4.
pub fn meek_closure(g: &Pdag) -> Result<Pdag> {
    close(g, &g.unshielded_colliders())
}

/// Applies background knowledge to `base` and closes. Unshielded colliders
/// are checked against those of `base`.
pub fn complete(base: &Pdag, orientations: &[Orientation]) -> Result<Mpdag> {
    let reference = base.unshielded_colliders();
    let oriented = apply(base, orientations, true)?;
    close(&oriented, &reference).map(Mpdag::new_unchecked)
}

/// Orients one undirected edge of an MPDAG and closes.
pub fn refine(g: &Mpdag, o: Orientation) -> Result<Mpdag> {
    let reference = g.unshielded_colliders();
    let oriented = apply(g, &[o], false)?;
    close(&oriented, &reference).map(Mpdag::new_unchecked)
}

fn apply(g: &Pdag, orientations: &[Orientation], allow_same: bool) -> Result<Pdag> {
    let mut edges: Vec<Edge> = g.edges().to_vec();
    for o in orientations {
        g.check_set(&[o.from, o.to].into_iter().collect())?;
        let not_und = || Error::NotUndirected(g.label(o.from).into(), g.label(o.to).into());
        match g.mark(o.from, o.to) {
            Some(Mark::Undirected) => {}
            Some(Mark::Out) if allow_same => continue,
            _ => return Err(not_und()),
        }
        let e = edges
            .iter_mut()
            .find(|e| e.kind == EdgeKind::Undirected && Edge::undirected(o.from, o.to) == **e)
            .ok_or_else(not_und)?;
        *e = Edge::directed(o.from, o.to);
    }
    g.with_edges(edges)
}

/// CPDAG of a DAG: skeleton, v-structures, then closure.
pub fn cpdag_of(dag: &Dag) -> Mpdag {
    let colliders = dag.unshielded_colliders();
    let mut keep: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for &(a, c, b) in &colliders {
        keep.insert((a, c));
        keep.insert((b, c));
    }
    let edges = dag.edges().iter().map(|e| {
        if keep.contains(&(e.a, e.b)) {
            *e
        } else {
            Edge::undirected(e.a, e.b)
        }
    });
    let pattern = dag.with_edges(edges).expect("same skeleton");
    Mpdag::new_unchecked(close(&pattern, &colliders).expect("a DAG is its own extension"))
}

/// Undirected edges above which the extension check switches from exact
/// search to the Dor-Tarsi sink elimination.
pub const EXACT_EXTENSION_CAP: usize = 12;

/// Whether some DAG has `g`'s skeleton and directed edges and no unshielded
/// collider beyond those of `g`.
pub fn has_consistent_extension(g: &Pdag) -> bool {
    if g.undirected_count() <= EXACT_EXTENSION_CAP {
        enumerate::first_extension(g).is_some()
    } else {
        dor_tarsi(g).is_some()
    }
}

/// Dor-Tarsi extension: repeatedly remove a node with no outgoing directed
/// edge whose undirected neighbours are adjacent to all its other
/// neighbours, orienting its undirected edges into it.
pub fn dor_tarsi(g: &Pdag) -> Option<Pdag> {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut edges: Vec<Edge> = g
        .edges()
        .iter()
        .copied()
        .filter(|e| e.kind == EdgeKind::Directed)
        .collect();
    for _ in 0..n {
        let sink = (0..n).map(NodeId).find(|&x| {
            alive[x.0]
                && !g.children_of(x).any(|c| alive[c.0])
                && {
                    let nb: Vec<NodeId> =
                        g.neighbors(x).iter().map(|(v, _)| *v).filter(|v| alive[v.0]).collect();
                    g.undirected_of(x)
                        .filter(|y| alive[y.0])
                        .all(|y| nb.iter().all(|&w| w == y || g.adjacent(y, w)))
                }
        })?;
        for y in g.undirected_of(sink).filter(|y| alive[y.0]) {
            edges.push(Edge::directed(y, sink));
        }
        alive[sink.0] = false;
    }
    g.with_edges(edges).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(text: &str) -> Pdag {
        Pdag::parse(text).unwrap()
    }

    fn o(g: &Pdag, s: &str) -> Orientation {
        Orientation::parse(g, s).unwrap()
    }

    #[test]
    fn background_knowledge_on_triangle() {
        let t = g("X -- Y; Y -- Z; Z -- X");
        let m = complete(&t, &[o(&t, "X>Y"), o(&t, "Z>Y")]).unwrap();
        assert!(m.has_directed(NodeId(0), NodeId(1)));
        assert!(m.has_directed(NodeId(2), NodeId(1)));
        assert!(m.has_undirected(NodeId(0), NodeId(2)));
    }

    #[test]
    fn r1_chain() {
        let c = meek_closure(&g("A -> B; B -- C")).unwrap();
        assert_eq!(c, g("A -> B; B -> C"));
    }

    #[test]
    fn r2_r3_r4_patterns() {
        // R2: a -> c -> b with a -- b.
        let c = meek_closure(&g("A -> C; C -> B; A -- B")).unwrap();
        assert!(c.has_directed(NodeId(0), NodeId(2)));
        // R3: a -- c -> b, a -- d -> b, c, d nonadjacent.
        let r3 = g("A -- C; C -> B; A -- D; D -> B; A -- B");
        let c = meek_closure(&r3).unwrap();
        let (a, b) = (r3.node("A").unwrap(), r3.node("B").unwrap());
        assert!(c.has_directed(a, b));
        // R4: a -- c -> d -> b, a adj d, c, b nonadjacent.
        let r4 = g("A -- C; C -> D; D -> B; A -- D; A -- B");
        let c = meek_closure(&r4).unwrap();
        let (a, b) = (r4.node("A").unwrap(), r4.node("B").unwrap());
        assert!(c.has_directed(a, b));
    }

    #[test]
    fn closed_graph_is_fixed_point() {
        let m = g("X -> Y; Z -> Y; Z -- X");
        assert_eq!(meek_closure(&m).unwrap(), m);
    }

    #[test]
    fn refine_refined_triangle() {
        let m = Mpdag::new(g("X -> Y; Z -> Y; Z -- X")).unwrap();
        let (x, z) = (m.node("X").unwrap(), m.node("Z").unwrap());
        let left = refine(&m, Orientation::new(z, x)).unwrap();
        assert!(left.is_fully_directed() && left.has_directed(z, x));
        let right = refine(&m, Orientation::new(x, z)).unwrap();
        assert!(right.is_fully_directed() && right.has_directed(x, z));
        let y = m.node("Y").unwrap();
        assert!(matches!(refine(&m, Orientation::new(x, y)), Err(Error::NotUndirected(..))));
    }

    #[test]
    fn inconsistent_background_knowledge() {
        // Creating a new unshielded collider.
        let p = g("A -- B; B -- C");
        assert!(matches!(
            complete(&p, &[o(&p, "A>B"), o(&p, "C>B")]),
            Err(Error::InconsistentOrientation(_))
        ));
        // Directed cycle.
        let t = g("A -- B; B -- C; C -- A");
        assert!(matches!(
            complete(&t, &[o(&t, "A>B"), o(&t, "B>C"), o(&t, "C>A")]),
            Err(Error::InconsistentOrientation(_))
        ));
    }

    #[test]
    fn cpdag_of_collider_and_chain() {
        let d = Dag::new(g("A -> B; C -> B")).unwrap();
        assert_eq!(*cpdag_of(&d).pdag(), *d.pdag());
        let chain = Dag::new(g("A -> B; B -> C")).unwrap();
        assert_eq!(cpdag_of(&chain).undirected_count(), 2);
    }

    #[test]
    fn dor_tarsi_matches_search_on_small_graphs() {
        for text in ["A -- B; B -- C; C -- A", "A -- B; B -- C", "A -> B; B -- C; A -- C"] {
            let p = g(text);
            assert_eq!(dor_tarsi(&p).is_some(), enumerate::first_extension(&p).is_some());
        }
        // Undirected 4-cycle has no extension without a new collider.
        let c4 = g("A -- B; B -- C; C -- D; D -- A");
        assert!(dor_tarsi(&c4).is_none());
        assert!(enumerate::first_extension(&c4).is_none());
    }
}
