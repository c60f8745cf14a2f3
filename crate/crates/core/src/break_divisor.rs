//! Break divisors: one chip on an endpoint of every edge outside a spanning
//! tree.
//!
//! Compatibility with a fixed tree is an assignment problem (non-tree edges
//! to endpoints, vertex `v` taking exactly `D(v)` edges) solved exactly with
//! augmenting paths.

use std::collections::{BTreeMap, HashMap};

use crate::divisor::{are_equivalent, Divisor, DivisorClass};
use crate::error::{Error, Result};
use crate::graph::{spanning_trees, visit_spanning_trees_within, RibbonGraph, SpanningTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakDivisor {
    pub divisor: Divisor,
    pub witness_tree: Option<SpanningTree>,
}

/// A decision procedure for break-divisor membership on an edge-masked
/// subgraph. The subgraph is assumed connected and spanning.
pub trait BreakDivisorOracle: Sync {
    fn is_break_divisor_within(&self, g: &RibbonGraph, alive: &[bool], d: &Divisor) -> bool;
}

/// Tries every spanning tree of the subgraph and solves the assignment
/// problem for each.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactMatchingOracle;

impl BreakDivisorOracle for ExactMatchingOracle {
    fn is_break_divisor_within(&self, g: &RibbonGraph, alive: &[bool], d: &Divisor) -> bool {
        is_break_divisor_within(g, alive, d)
    }
}

/// Checks `D(S) >= |E(S)| - |S| + 1` over every vertex subset `S` of the
/// subgraph, with `E(S)` the alive edges inside `S`. Exponential in `|V|`.
#[derive(Debug, Default, Clone, Copy)]
pub struct SubsetOracle;

impl BreakDivisorOracle for SubsetOracle {
    fn is_break_divisor_within(&self, g: &RibbonGraph, alive: &[bool], d: &Divisor) -> bool {
        let n = g.num_vertices();
        assert!(n < 64, "subset oracle needs fewer than 64 vertices");
        let live = alive.iter().filter(|&&a| a).count() as i64;
        if d.degree() != live - n as i64 + 1 || !d.is_effective() {
            return false;
        }
        let edge_masks: Vec<u64> = (0..g.num_edges())
            .filter(|&e| alive[e])
            .map(|e| g.ends(e).iter().fold(0u64, |m, &v| m | 1 << v))
            .collect();
        for s in 1u64..(1u64 << n) {
            let inside = edge_masks.iter().filter(|&&m| m & s == m).count() as i64;
            let chips: i64 = (0..n).filter(|&v| s >> v & 1 == 1).map(|v| d[v]).sum();
            if chips < inside - s.count_ones() as i64 + 1 {
                return false;
            }
        }
        true
    }
}

/// Assigns each edge in `edges` to an endpoint so that vertex `v` receives
/// exactly `d[v]` edges. Returns the chosen endpoint per edge.
fn assign_edges(g: &RibbonGraph, edges: &[usize], d: &Divisor) -> Option<Vec<usize>> {
    if d.degree() != edges.len() as i64 || !d.is_effective() {
        return None;
    }
    let mut load = vec![0i64; g.num_vertices()];
    let mut owner = vec![usize::MAX; edges.len()];
    for i in 0..edges.len() {
        let mut visited = vec![false; g.num_vertices()];
        if !augment(g, edges, d, i, &mut owner, &mut load, &mut visited) {
            return None;
        }
    }
    Some(owner)
}

fn augment(
    g: &RibbonGraph,
    edges: &[usize],
    d: &Divisor,
    i: usize,
    owner: &mut [usize],
    load: &mut [i64],
    visited: &mut [bool],
) -> bool {
    for v in g.ends(edges[i]) {
        if visited[v] {
            continue;
        }
        visited[v] = true;
        if load[v] < d[v] {
            owner[i] = v;
            load[v] += 1;
            return true;
        }
        // v is full: try to move one of its edges to the other endpoint.
        for j in 0..edges.len() {
            if j != i && owner[j] == v && augment(g, edges, d, j, owner, load, visited) {
                // j moved to its other endpoint; i takes its place at v.
                owner[i] = v;
                return true;
            }
        }
    }
    false
}

/// Decides whether `d` is a `T`-break divisor; on success returns the
/// assignment `(non-tree edge, endpoint)` in edge order.
pub fn is_compatible(
    g: &RibbonGraph,
    d: &Divisor,
    t: &SpanningTree,
) -> Result<Option<Vec<(usize, usize)>>> {
    if d.degree() != g.genus() as i64 || !d.is_effective() {
        return Err(Error::DegreeMismatch(format!(
            "need an effective divisor of degree {}, got degree {}",
            g.genus(),
            d.degree()
        )));
    }
    let rest = t.complement(g.num_edges());
    Ok(assign_edges(g, &rest, d).map(|owner| rest.into_iter().zip(owner).collect()))
}

pub fn is_break_divisor(g: &RibbonGraph, d: &Divisor) -> bool {
    is_break_divisor_within(g, &vec![true; g.num_edges()], d)
}

/// Membership on the spanning subgraph with edges `alive`.
pub fn is_break_divisor_within(g: &RibbonGraph, alive: &[bool], d: &Divisor) -> bool {
    let live = alive.iter().filter(|&&a| a).count();
    if live + 1 < g.num_vertices() {
        return false;
    }
    let genus = (live + 1 - g.num_vertices()) as i64;
    if d.degree() != genus || !d.is_effective() {
        return false;
    }
    let mut found = false;
    visit_spanning_trees_within(g, alive, &mut |tree| {
        let rest: Vec<usize> = (0..g.num_edges())
            .filter(|&e| alive[e] && tree.binary_search(&e).is_err())
            .collect();
        found = assign_edges(g, &rest, d).is_some();
        !found
    });
    found
}

/// All break divisors with one witness tree each, ordered by coefficient
/// vector. Independent of the matching code: every tree and every endpoint
/// choice is expanded.
pub fn enumerate_break_divisors(g: &RibbonGraph) -> Vec<BreakDivisor> {
    let mut seen: BTreeMap<Divisor, SpanningTree> = BTreeMap::new();
    for t in spanning_trees(g) {
        let rest = t.complement(g.num_edges());
        let combos = 1u64 << rest.len();
        for mask in 0..combos {
            let mut d = Divisor::zero(g.num_vertices());
            for (i, &e) in rest.iter().enumerate() {
                let side = ((mask >> i) & 1) as usize;
                d.add_chip(g.ends(e)[side], 1);
            }
            seen.entry(d).or_insert_with(|| t.clone());
        }
    }
    seen.into_iter()
        .map(|(divisor, t)| BreakDivisor {
            divisor,
            witness_tree: Some(t),
        })
        .collect()
}

/// The unique break divisor in a class of degree `g_comb`, by scanning.
pub fn break_representative(g: &RibbonGraph, c: &DivisorClass) -> Result<BreakDivisor> {
    if c.degree() != g.genus() as i64 {
        return Err(Error::DegreeMismatch(format!(
            "class has degree {}, genus is {}",
            c.degree(),
            g.genus()
        )));
    }
    let mut hits: Vec<BreakDivisor> = enumerate_break_divisors(g)
        .into_iter()
        .filter(|b| are_equivalent(g, &b.divisor, c.reduced()))
        .collect();
    if hits.len() != 1 {
        return Err(Error::UniquenessViolation { found: hits.len() });
    }
    Ok(hits.pop().expect("one hit"))
}

/// Break divisors keyed by their class, for repeated lookups.
#[derive(Debug, Clone)]
pub struct BreakClassTable {
    by_class: HashMap<DivisorClass, Divisor>,
}

impl BreakClassTable {
    pub fn new(g: &RibbonGraph) -> Result<Self> {
        let mut by_class = HashMap::new();
        for b in enumerate_break_divisors(g) {
            let class = DivisorClass::of(g, &b.divisor);
            if by_class.insert(class, b.divisor).is_some() {
                return Err(Error::UniquenessViolation { found: 2 });
            }
        }
        Ok(BreakClassTable { by_class })
    }

    pub fn len(&self) -> usize {
        self.by_class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_class.is_empty()
    }

    pub fn representative(&self, c: &DivisorClass) -> Option<&Divisor> {
        self.by_class.get(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{k3, path3, single_edge, theta_planar};

    fn div(v: &[i64]) -> Divisor {
        Divisor::from_vec(v.to_vec())
    }

    #[test]
    fn tree_graph_zero_divisor() {
        let g = path3();
        let t = spanning_trees(&g).remove(0);
        assert_eq!(is_compatible(&g, &div(&[0, 0, 0]), &t).unwrap(), Some(vec![]));
        assert!(is_break_divisor(&g, &div(&[0, 0, 0])));
    }

    #[test]
    fn theta_compatibility() {
        let g = theta_planar();
        let t = SpanningTree::from_names(&g, &["p"]).unwrap();
        let w = is_compatible(&g, &div(&[1, 1]), &t).unwrap().unwrap();
        assert_eq!(w.len(), 2);
        let mut chips = Divisor::zero(2);
        for (_, v) in w {
            chips.add_chip(v, 1);
        }
        assert_eq!(chips, div(&[1, 1]));
        assert!(is_break_divisor(&g, &div(&[2, 0])));
        assert!(!is_break_divisor(&g, &div(&[2, 1])));
        assert!(!is_break_divisor(&g, &div(&[3, -1])));
    }

    #[test]
    fn k3_endpoint_check() {
        let g = k3();
        let t = SpanningTree::from_names(&g, &["a", "b"]).unwrap();
        // c joins 3 and 1, so (2) is not compatible with {a, b}.
        assert_eq!(is_compatible(&g, &div(&[0, 1, 0]), &t).unwrap(), None);
        assert!(is_compatible(&g, &div(&[1, 0, 0]), &t).unwrap().is_some());
        assert!(matches!(
            is_compatible(&g, &div(&[1, 1, 0]), &t),
            Err(Error::DegreeMismatch(_))
        ));
    }

    #[test]
    fn k3_break_divisors_are_the_vertices() {
        let g = k3();
        let all: Vec<Divisor> = enumerate_break_divisors(&g).into_iter().map(|b| b.divisor).collect();
        assert_eq!(all.len(), 3);
        for v in 0..3 {
            assert!(all.contains(&Divisor::point(3, v)));
            assert!(is_break_divisor(&g, &Divisor::point(3, v)));
        }
    }

    #[test]
    fn theta_break_divisors() {
        let g = theta_planar();
        let all: Vec<Divisor> = enumerate_break_divisors(&g).into_iter().map(|b| b.divisor).collect();
        assert_eq!(all, vec![div(&[0, 2]), div(&[1, 1]), div(&[2, 0])]);
        assert_eq!(
            enumerate_break_divisors(&single_edge())
                .into_iter()
                .map(|b| b.divisor)
                .collect::<Vec<_>>(),
            vec![div(&[0, 0])]
        );
    }

    #[test]
    fn representatives() {
        let g = theta_planar();
        let c = DivisorClass::of(&g, &div(&[2, 0]));
        assert_eq!(break_representative(&g, &c).unwrap().divisor, div(&[2, 0]));
        let shifted = &div(&[1, 1]) + &crate::divisor::laplacian_of(&g, &[4, -3]).unwrap();
        let c = DivisorClass::of(&g, &shifted);
        assert_eq!(break_representative(&g, &c).unwrap().divisor, div(&[1, 1]));
        let bad = DivisorClass::of(&g, &div(&[1, 0]));
        assert!(matches!(break_representative(&g, &bad), Err(Error::DegreeMismatch(_))));
    }

    #[test]
    fn oracles_agree_on_small_graphs() {
        for g in [k3(), theta_planar(), path3(), crate::corpus::banana4(), crate::corpus::complete(4)] {
            let alive = vec![true; g.num_edges()];
            let n = g.num_vertices();
            let genus = g.genus() as i64;
            // Every effective divisor of degree genus.
            let mut stack = vec![(0usize, Divisor::zero(n), genus)];
            while let Some((v, d, left)) = stack.pop() {
                if v + 1 == n {
                    let mut d = d;
                    d.add_chip(v, left);
                    assert_eq!(
                        SubsetOracle.is_break_divisor_within(&g, &alive, &d),
                        ExactMatchingOracle.is_break_divisor_within(&g, &alive, &d),
                        "{:?}",
                        d
                    );
                    continue;
                }
                for c in 0..=left {
                    let mut next = d.clone();
                    next.add_chip(v, c);
                    stack.push((v + 1, next, left - c));
                }
            }
        }
    }

    #[test]
    fn k3_break_divisors_pairwise_inequivalent() {
        let g = k3();
        let all = enumerate_break_divisors(&g);
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                assert_eq!(are_equivalent(&g, &a.divisor, &b.divisor), i == j);
            }
        }
    }
}
