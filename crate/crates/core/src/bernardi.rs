//! The Bernardi tour of a spanning tree and the bijection it induces between
//! spanning trees and break divisors.
//!
//! The tour is a state machine on `(vertex, edge)` pairs. Standing at `x`
//! facing `e`: a tree edge is walked to its far endpoint `y` and the tour
//! continues with the successor of `e` at `y`; a non-tree edge is cut and the
//! tour continues with the successor of `e` at `x`. The first time a non-tree
//! edge is cut, a chip is dropped at the current vertex.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::break_divisor::{
    break_representative, BreakClassTable, BreakDivisor, BreakDivisorOracle, ExactMatchingOracle,
};
use crate::divisor::{Divisor, DivisorClass};
use crate::error::{Error, Result};
use crate::graph::{spanning_trees, RibbonGraph, SpanningTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepAction {
    Walk,
    Cut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TourStep {
    pub at_vertex: usize,
    pub edge: usize,
    pub action: StepAction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub initial: (usize, usize),
    pub steps: Vec<TourStep>,
    /// Vertex of the first cut, for every non-tree edge; `None` on tree edges.
    pub eta: Vec<Option<usize>>,
}

impl Tour {
    /// One line per step, then an `eta` block.
    pub fn dump(&self, g: &RibbonGraph) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let action = match s.action {
                StepAction::Walk => "walk",
                StepAction::Cut => "cut",
            };
            let _ = writeln!(out, "{} {} {}", g.vertex_name(s.at_vertex), g.edge_name(s.edge), action);
        }
        out.push_str("eta\n");
        for (e, v) in self.eta.iter().enumerate() {
            if let Some(v) = v {
                let _ = writeln!(out, "{} {}", g.edge_name(e), g.vertex_name(*v));
            }
        }
        out
    }

    pub fn divisor(&self, n: usize) -> Divisor {
        let mut d = Divisor::zero(n);
        for v in self.eta.iter().flatten() {
            d.add_chip(*v, 1);
        }
        d
    }
}

fn check_incident(g: &RibbonGraph, v: usize, e: usize) -> Result<()> {
    if e >= g.num_edges() || !g.is_incident(e, v) {
        return Err(Error::NotIncident {
            vertex: g.vertex_name(v).to_string(),
            edge: if e < g.num_edges() {
                g.edge_name(e).to_string()
            } else {
                format!("#{e}")
            },
        });
    }
    Ok(())
}

pub fn bernardi_tour(g: &RibbonGraph, v: usize, e: usize, t: &SpanningTree) -> Result<Tour> {
    check_incident(g, v, e)?;
    let in_tree = t.mask(g.num_edges());
    let mut steps = Vec::with_capacity(2 * g.num_edges());
    let mut eta = vec![None; g.num_edges()];
    let (mut at, mut edge) = (v, e);
    for _ in 0..2 * g.num_edges() {
        if in_tree[edge] {
            steps.push(TourStep {
                at_vertex: at,
                edge,
                action: StepAction::Walk,
            });
            at = g.opposite(edge, at);
        } else {
            steps.push(TourStep {
                at_vertex: at,
                edge,
                action: StepAction::Cut,
            });
            eta[edge].get_or_insert(at);
        }
        edge = g.rotation_next(at, edge);
    }
    debug_assert_eq!((at, edge), (v, e), "tour closes after 2|E| steps");
    Ok(Tour {
        initial: (v, e),
        steps,
        eta,
    })
}

/// `β_(v,e)(T)` without recording the steps.
pub(crate) fn beta_divisor(g: &RibbonGraph, v: usize, e: usize, in_tree: &[bool]) -> Divisor {
    let mut d = Divisor::zero(g.num_vertices());
    let mut cut = vec![false; g.num_edges()];
    let (mut at, mut edge) = (v, e);
    for _ in 0..2 * g.num_edges() {
        if in_tree[edge] {
            at = g.opposite(edge, at);
        } else if !cut[edge] {
            cut[edge] = true;
            d.add_chip(at, 1);
        }
        edge = g.rotation_next(at, edge);
    }
    d
}

pub fn bernardi_beta(g: &RibbonGraph, v: usize, e: usize, t: &SpanningTree) -> Result<BreakDivisor> {
    check_incident(g, v, e)?;
    Ok(BreakDivisor {
        divisor: beta_divisor(g, v, e, &t.mask(g.num_edges())),
        witness_tree: Some(t.clone()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    /// Successors; chip removed at the current vertex.
    Right,
    /// Predecessors; chip removed at the far endpoint.
    Left,
}

/// Right inverse of `β_(v,e)`, with the exact break-divisor oracle.
pub fn alpha_right(g: &RibbonGraph, v: usize, e: usize, d: &Divisor) -> Result<SpanningTree> {
    alpha_with(g, v, e, d, Direction::Right, &ExactMatchingOracle)
}

/// Left inverse of `β_(v,e)`, with the exact break-divisor oracle.
pub fn alpha_left(g: &RibbonGraph, v: usize, e: usize, d: &Divisor) -> Result<SpanningTree> {
    alpha_with(g, v, e, d, Direction::Left, &ExactMatchingOracle)
}

pub fn alpha_right_with(
    g: &RibbonGraph,
    v: usize,
    e: usize,
    d: &Divisor,
    oracle: &dyn BreakDivisorOracle,
) -> Result<SpanningTree> {
    alpha_with(g, v, e, d, Direction::Right, oracle)
}

pub fn alpha_left_with(
    g: &RibbonGraph,
    v: usize,
    e: usize,
    d: &Divisor,
    oracle: &dyn BreakDivisorOracle,
) -> Result<SpanningTree> {
    alpha_with(g, v, e, d, Direction::Left, oracle)
}

fn alpha_with(
    g: &RibbonGraph,
    v: usize,
    e: usize,
    d: &Divisor,
    dir: Direction,
    oracle: &dyn BreakDivisorOracle,
) -> Result<SpanningTree> {
    check_incident(g, v, e)?;
    if d.degree() != g.genus() as i64 || !d.is_effective() {
        return Err(Error::NotBreakDivisor);
    }
    let m = g.num_edges();
    let mut alive = vec![true; m];
    let mut in_tree = vec![false; m];
    let mut undecided = m;
    let mut chips = d.clone();
    let mut at = v;
    let mut edge = match dir {
        Direction::Right => e,
        Direction::Left => g.rotation_prev(v, e),
    };
    let turn = |at: usize, edge: usize, alive: &[bool]| match dir {
        Direction::Right => g.rotation_next_within(at, edge, alive),
        Direction::Left => g.rotation_prev_within(at, edge, alive),
    };
    // Each pass of the tour around the current tree decides at least one
    // edge, so a valid input finishes well within this budget.
    let budget = 2 * m * (m + 1) + 1;
    let mut iterations = 0;
    while undecided > 0 {
        iterations += 1;
        if iterations > budget {
            return Err(Error::NotBreakDivisor);
        }
        let far = g.opposite(edge, at);
        if !in_tree[edge] {
            let charged = match dir {
                Direction::Right => at,
                Direction::Left => far,
            };
            alive[edge] = false;
            let cut = chips[charged] > 0 && g.is_connected_within(&alive) && {
                chips.add_chip(charged, -1);
                let ok = oracle.is_break_divisor_within(g, &alive, &chips);
                if !ok {
                    chips.add_chip(charged, 1);
                }
                ok
            };
            if cut {
                undecided -= 1;
                edge = turn(at, edge, &alive).expect("connected minor keeps an edge at every vertex");
                continue;
            }
            alive[edge] = true;
            in_tree[edge] = true;
            undecided -= 1;
        }
        at = far;
        edge = turn(at, edge, &alive).expect("walked edge is alive");
    }
    let edges: Vec<usize> = (0..m).filter(|&f| in_tree[f]).collect();
    if !chips.is_zero() {
        return Err(Error::NotBreakDivisor);
    }
    SpanningTree::new(g, edges).map_err(|_| Error::NotBreakDivisor)
}

/// `β_v(γ, T)`: move the break divisor of `T` by `γ` and pull back, using the
/// first edge in the rotation at `v`.
pub fn bernardi_act(
    g: &RibbonGraph,
    v: usize,
    gamma: &DivisorClass,
    t: &SpanningTree,
) -> Result<SpanningTree> {
    if gamma.degree() != 0 {
        return Err(Error::DegreeMismatch(format!("class of degree {}", gamma.degree())));
    }
    let Some(&e) = g.rotation(v).first() else {
        return Ok(t.clone());
    };
    bernardi_act_with_edge(g, v, e, gamma, t)
}

pub fn bernardi_act_with_edge(
    g: &RibbonGraph,
    v: usize,
    e: usize,
    gamma: &DivisorClass,
    t: &SpanningTree,
) -> Result<SpanningTree> {
    let b = bernardi_beta(g, v, e, t)?.divisor;
    let target = DivisorClass::of(g, &(&b + gamma.reduced()));
    let rep = break_representative(g, &target)?;
    alpha_right(g, v, e, &rep.divisor)
}

/// The two arcs of the rotation at `v` cut out by `e1` and `e2`, and the
/// induced split of the other vertices through `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSplit {
    /// Edges from `e1` up to (not including) `e2`.
    pub arc_i: Vec<usize>,
    /// Edges from `e2` up to (not including) `e1`.
    pub arc_j: Vec<usize>,
    pub in_a: Vec<bool>,
    pub in_b: Vec<bool>,
}

pub fn vertex_split(g: &RibbonGraph, v: usize, e1: usize, e2: usize, t: &SpanningTree) -> Result<VertexSplit> {
    check_incident(g, v, e1)?;
    check_incident(g, v, e2)?;
    let rot = g.rotation(v);
    let start = rot.iter().position(|&x| x == e1).expect("incident");
    let mut arc_i = Vec::new();
    let mut arc_j = Vec::new();
    let mut in_j = false;
    for k in 0..rot.len() {
        let f = rot[(start + k) % rot.len()];
        if f == e2 && k > 0 {
            in_j = true;
        }
        if in_j {
            arc_j.push(f);
        } else {
            arc_i.push(f);
        }
    }
    let mask = t.mask(g.num_edges());
    let n = g.num_vertices();
    let mut in_a = vec![false; n];
    let mut in_b = vec![false; n];
    for (arc, side) in [(&arc_i, &mut in_a), (&arc_j, &mut in_b)] {
        for &f in arc {
            if !mask[f] {
                continue;
            }
            let mut stack = vec![g.opposite(f, v)];
            while let Some(x) = stack.pop() {
                if side[x] {
                    continue;
                }
                side[x] = true;
                for &h in g.rotation(x) {
                    let y = g.opposite(h, x);
                    if mask[h] && y != v && !side[y] {
                        stack.push(y);
                    }
                }
            }
        }
    }
    Ok(VertexSplit {
        arc_i,
        arc_j,
        in_a,
        in_b,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftCheck {
    pub lhs: Divisor,
    pub rhs: Divisor,
    pub equal: bool,
}

/// Compares `β_(v,e1)(T) - β_(v,e2)(T)` computed from two tours with the
/// closed-form sum over non-tree edges crossing the split.
pub fn shift_difference_check(
    g: &RibbonGraph,
    v: usize,
    e1: usize,
    e2: usize,
    t: &SpanningTree,
) -> Result<ShiftCheck> {
    let split = vertex_split(g, v, e1, e2, t)?;
    let mask = t.mask(g.num_edges());
    let lhs = &beta_divisor(g, v, e1, &mask) - &beta_divisor(g, v, e2, &mask);
    let mut rhs = Divisor::zero(g.num_vertices());
    for f in 0..g.num_edges() {
        if mask[f] {
            continue;
        }
        let [x, y] = g.ends(f);
        if x != v && y != v {
            let (a, b) = if split.in_a[x] && split.in_b[y] {
                (x, y)
            } else if split.in_a[y] && split.in_b[x] {
                (y, x)
            } else {
                continue;
            };
            rhs.add_chip(a, 1);
            rhs.add_chip(b, -1);
        } else {
            let other = g.opposite(f, v);
            if split.arc_j.contains(&f) && split.in_a[other] {
                rhs.add_chip(other, 1);
                rhs.add_chip(v, -1);
            } else if split.arc_i.contains(&f) && split.in_b[other] {
                rhs.add_chip(v, 1);
                rhs.add_chip(other, -1);
            }
        }
    }
    let equal = lhs == rhs;
    Ok(ShiftCheck { lhs, rhs, equal })
}

/// The Bernardi bijection for fixed initial data, tabulated over all trees.
#[derive(Debug, Clone)]
pub struct BernardiMap {
    pub vertex: usize,
    pub edge: usize,
    /// `β(trees[i])`.
    pub images: Vec<Divisor>,
    inverse: HashMap<Divisor, usize>,
}

impl BernardiMap {
    pub fn new(g: &RibbonGraph, trees: &[SpanningTree], vertex: usize, edge: usize) -> Result<Self> {
        check_incident(g, vertex, edge)?;
        let images: Vec<Divisor> = trees
            .iter()
            .map(|t| beta_divisor(g, vertex, edge, &t.mask(g.num_edges())))
            .collect();
        let inverse = images.iter().cloned().enumerate().map(|(i, d)| (d, i)).collect();
        Ok(BernardiMap {
            vertex,
            edge,
            images,
            inverse,
        })
    }

    /// True when no two trees share an image.
    pub fn is_injective(&self) -> bool {
        self.inverse.len() == self.images.len()
    }

    pub fn preimage(&self, d: &Divisor) -> Option<usize> {
        self.inverse.get(d).copied()
    }
}

/// `β_v` on tree indices, backed by a tabulated bijection.
#[derive(Debug, Clone)]
pub struct BernardiTorsor {
    map: BernardiMap,
}

impl BernardiTorsor {
    pub fn new(g: &RibbonGraph, trees: &[SpanningTree], vertex: usize, edge: usize) -> Result<Self> {
        let map = BernardiMap::new(g, trees, vertex, edge)?;
        if !map.is_injective() {
            return Err(Error::UniquenessViolation { found: 2 });
        }
        Ok(BernardiTorsor { map })
    }

    pub fn map(&self) -> &BernardiMap {
        &self.map
    }

    /// Index of `γ · trees[t]`.
    pub fn act(&self, g: &RibbonGraph, breaks: &BreakClassTable, gamma: &DivisorClass, t: usize) -> Result<usize> {
        let moved = DivisorClass::of(g, &(&self.map.images[t] + gamma.reduced()));
        let rep = breaks
            .representative(&moved)
            .ok_or(Error::UniquenessViolation { found: 0 })?;
        self.map
            .preimage(rep)
            .ok_or(Error::UniquenessViolation { found: 0 })
    }
}

/// All spanning trees and the tree-to-index lookup.
#[derive(Debug, Clone)]
pub struct TreeIndex {
    pub trees: Vec<SpanningTree>,
    index: HashMap<SpanningTree, usize>,
}

impl TreeIndex {
    pub fn new(g: &RibbonGraph) -> Self {
        let trees = spanning_trees(g);
        let index = trees.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        TreeIndex { trees, index }
    }

    pub fn index_of(&self, t: &SpanningTree) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}
