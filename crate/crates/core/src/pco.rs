//! Bucket decomposition and the partial causal ordering (PCO) of node sets.

use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeSet, Pdag};

/// Ordered buckets: every edge between bucket `i` and a later bucket `j`
/// points from `i` into `j`.
pub type BucketList = Vec<NodeSet>;

/// Maximal connected components of the undirected part of `g`, ordered by
/// smallest member.
pub fn undirected_components(g: &Pdag) -> Vec<NodeSet> {
    let n = g.n();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = NodeSet::new();
        let mut stack = vec![NodeId(s)];
        comp[s] = id;
        while let Some(u) = stack.pop() {
            members.insert(u);
            for v in g.undirected_of(u) {
                if comp[v.0] == usize::MAX {
                    comp[v.0] = id;
                    stack.push(v);
                }
            }
        }
        out.push(members);
    }
    out
}

/// Intersections of `d` with the undirected components of `g`, empty ones
/// dropped, ordered by smallest member.
pub fn bucket_decomposition(g: &Pdag, d: &NodeSet) -> Result<Vec<NodeSet>> {
    g.check_set(d)?;
    Ok(undirected_components(g)
        .into_iter()
        .map(|c| c.intersection(d))
        .filter(|b| !b.is_empty())
        .collect())
}

/// Partial causal ordering of `d`. Components of the whole graph are peeled
/// from the sink end; when several are peelable, the one holding the smallest
/// node index goes first.
pub fn pco(g: &Pdag, d: &NodeSet) -> Result<BucketList> {
    g.check_set(d)?;
    let n = g.n();
    let mut remaining = undirected_components(g);
    let mut comp_of = vec![0; n];
    for (i, c) in remaining.iter().enumerate() {
        for v in c {
            comp_of[v.0] = i;
        }
    }
    let mut alive: Vec<bool> = vec![true; remaining.len()];
    let mut order: Vec<NodeSet> = Vec::new();
    while alive.iter().any(|&a| a) {
        let peel = (0..remaining.len()).find(|&i| {
            alive[i]
                && remaining[i].iter().all(|u| {
                    g.neighbors(u).iter().all(|&(v, _)| {
                        let j = comp_of[v.0];
                        j == i || !alive[j] || g.has_directed(v, u)
                    })
                })
        });
        let i = peel.ok_or_else(|| Error::NotMpdag("no sink component to peel".into()))?;
        alive[i] = false;
        let b = std::mem::take(&mut remaining[i]).intersection(d);
        if !b.is_empty() {
            order.push(b);
        }
    }
    order.reverse();
    Ok(order)
}
