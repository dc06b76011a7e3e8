use crate::dsep::check_disjoint;
use crate::error::Result;
use crate::graph::{Dag, NodeSet};

/// Textbook d-separation in a DAG via the moralized ancestral graph.
pub fn dag_d_separated(d: &Dag, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool> {
    check_disjoint(d, &[x, y, z])?;
    let n = d.n();
    // Ancestral closure of X ∪ Y ∪ Z.
    let mut anc = vec![false; n];
    let mut stack: Vec<_> = x.union(y).union(z).iter().collect();
    for v in &stack {
        anc[v.0] = true;
    }
    while let Some(u) = stack.pop() {
        for p in d.parents_of(u) {
            if !anc[p.0] {
                anc[p.0] = true;
                stack.push(p);
            }
        }
    }
    // Moral graph restricted to the ancestral set.
    let mut moral = vec![vec![false; n]; n];
    for c in (0..n).filter(|&c| anc[c]) {
        let pa: Vec<usize> = d.parents_of(crate::graph::NodeId(c)).map(|p| p.0).collect();
        for &p in &pa {
            moral[p][c] = true;
            moral[c][p] = true;
        }
        for &a in &pa {
            for &b in &pa {
                if a != b {
                    moral[a][b] = true;
                }
            }
        }
    }
    let blocked = z.mask(n);
    let target = y.mask(n);
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = x.iter().map(|v| v.0).collect();
    for &v in &stack {
        seen[v] = true;
    }
    while let Some(u) = stack.pop() {
        if target[u] {
            return Ok(false);
        }
        for v in 0..n {
            if moral[u][v] && anc[v] && !seen[v] && !blocked[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Pdag;

    fn dag(text: &str) -> Dag {
        Dag::new(Pdag::parse(text).unwrap()).unwrap()
    }

    fn sep(d: &Dag, x: &str, y: &str, z: &str) -> bool {
        dag_d_separated(d, &d.parse_set(x).unwrap(), &d.parse_set(y).unwrap(), &d.parse_set(z).unwrap())
            .unwrap()
    }

    #[test]
    fn chain_fork_collider() {
        let chain = dag("A -> B; B -> C");
        assert!(sep(&chain, "A", "C", "B"));
        assert!(!sep(&chain, "A", "C", ""));
        let collider = dag("A -> B; C -> B; B -> D");
        assert!(sep(&collider, "A", "C", ""));
        assert!(!sep(&collider, "A", "C", "B"));
        assert!(!sep(&collider, "A", "C", "D"));
    }
}
