//! Graph and query generators for property tests and the soundness harness.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Dag, Edge, EdgeKind, Mpdag, NodeId, NodeSet, Pdag};
use crate::ident::Query;
use crate::meek::{complete, cpdag_of, Orientation};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("V{i}")).collect()
}

/// Random DAG on `n` nodes: a random causal order, each forward pair
/// joined with probability `p`.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, p: f64) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push(Edge::directed(NodeId(order[i]), NodeId(order[j])));
            }
        }
    }
    Dag::new(Pdag::new(labels(n), edges).expect("valid edges")).expect("acyclic by construction")
}

/// Random MPDAG: the CPDAG of a random DAG with each undirected edge
/// oriented as in the DAG with probability `knowledge`, then closed.
pub fn random_mpdag<R: Rng>(rng: &mut R, n: usize, p: f64, knowledge: f64) -> Mpdag {
    let dag = random_dag(rng, n, p);
    let cpdag = cpdag_of(&dag);
    let orientations: Vec<Orientation> = cpdag
        .edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Undirected && rng.random_bool(knowledge))
        .map(|e| {
            if dag.has_directed(e.a, e.b) {
                Orientation::new(e.a, e.b)
            } else {
                Orientation::new(e.b, e.a)
            }
        })
        .collect();
    complete(&cpdag, &orientations).expect("knowledge drawn from a member DAG is consistent")
}

/// Every labelled DAG on `n` nodes.
pub fn all_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut edges = Vec::new();
        for &(i, j) in &pairs {
            match c % 3 {
                1 => edges.push(Edge::directed(NodeId(i), NodeId(j))),
                2 => edges.push(Edge::directed(NodeId(j), NodeId(i))),
                _ => {}
            }
            c /= 3;
        }
        let g = Pdag::new(labels(n), edges).expect("valid edges");
        if let Ok(d) = Dag::new(g) {
            out.push(d);
        }
    }
    out
}

/// Every MPDAG on `n` labelled nodes: CPDAGs of all DAGs refined by every
/// subset of orientations taken from a member DAG.
pub fn all_mpdags(n: usize) -> Vec<Mpdag> {
    let mut seen: BTreeSet<Vec<(usize, usize, bool)>> = BTreeSet::new();
    let mut out = Vec::new();
    for dag in all_dags(n) {
        let cpdag = cpdag_of(&dag);
        let und: Vec<Edge> =
            cpdag.edges().iter().copied().filter(|e| e.kind == EdgeKind::Undirected).collect();
        for mask in 0u32..(1 << und.len()) {
            let orientations: Vec<Orientation> = und
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, e)| {
                    if dag.has_directed(e.a, e.b) {
                        Orientation::new(e.a, e.b)
                    } else {
                        Orientation::new(e.b, e.a)
                    }
                })
                .collect();
            let m = complete(&cpdag, &orientations).expect("consistent knowledge");
            let key = m
                .edges()
                .iter()
                .map(|e| (e.a.0, e.b.0, e.kind == EdgeKind::Directed))
                .collect();
            if seen.insert(key) {
                out.push(m);
            }
        }
    }
    out
}

/// Random query with nonempty `X` and `Y` and possibly empty `Z`.
pub fn random_query<R: Rng>(rng: &mut R, g: &Pdag) -> Option<Query> {
    let n = g.n();
    if n < 2 {
        return None;
    }
    let mut nodes: Vec<NodeId> = g.nodes().collect();
    nodes.shuffle(rng);
    let nx = rng.random_range(1..=((n - 1).min(2)));
    let x: NodeSet = nodes[..nx].iter().copied().collect();
    let rest = &nodes[nx..];
    let ny = rng.random_range(1..=rest.len().min(2));
    let y: NodeSet = rest[..ny].iter().copied().collect();
    let rest = &rest[ny..];
    let nz = if rest.is_empty() { 0 } else { rng.random_range(0..=rest.len().min(2)) };
    let z: NodeSet = rest[..nz].iter().copied().collect();
    Query::new(g, x, y, z).ok()
}

/// All ordered triples of pairwise disjoint node sets with `X`, `Y` nonempty.
pub fn disjoint_triples(n: usize) -> Vec<(NodeSet, NodeSet, NodeSet)> {
    let mut out = Vec::new();
    // Each node goes to X, Y, Z, or none.
    for code in 0..4usize.pow(n as u32) {
        let (mut x, mut y, mut z) = (NodeSet::new(), NodeSet::new(), NodeSet::new());
        let mut c = code;
        for v in 0..n {
            match c % 4 {
                0 => x.insert(NodeId(v)),
                1 => y.insert(NodeId(v)),
                2 => z.insert(NodeId(v)),
                _ => false,
            };
            c /= 4;
        }
        if !x.is_empty() && !y.is_empty() {
            out.push((x, y, z));
        }
    }
    out
}
