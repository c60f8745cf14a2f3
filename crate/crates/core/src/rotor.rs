//! Rotor-routing on ribbon graphs: the chip-and-rotor process with a sink,
//! the induced action on spanning trees, and sink-free unicycle dynamics.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::bernardi::TreeIndex;
use crate::divisor::{kirchhoff_count, Divisor, DivisorClass};
use crate::error::{Error, Result};
use crate::graph::{Dart, RibbonGraph, SpanningTree};

/// An outgoing dart at every vertex except the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RotorConfig {
    pub root: usize,
    pub rotor: Vec<Option<Dart>>,
}

/// One rotor step: the rotor at `chip` moved from `before` to `after`, and the
/// chip went to `next`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RotorStep {
    pub chip: usize,
    pub before: usize,
    pub after: usize,
    pub next: usize,
}

impl RotorStep {
    pub fn line(&self, g: &RibbonGraph) -> String {
        format!(
            "{} {} {} {}",
            g.vertex_name(self.chip),
            g.edge_name(self.before),
            g.edge_name(self.after),
            g.vertex_name(self.next)
        )
    }
}

/// Advances the rotor at `chip` to the next edge in the rotation and returns
/// the dart the chip travels along.
fn advance(g: &RibbonGraph, rotor: &mut Dart, chip: usize) -> Dart {
    let next = g.rotation_next(chip, rotor.edge);
    *rotor = g.dart_from(next, chip).expect("rotation edges are incident");
    *rotor
}

impl RotorConfig {
    /// Orients the tree towards `root`.
    pub fn from_tree(g: &RibbonGraph, t: &SpanningTree, root: usize) -> Self {
        let mask = t.mask(g.num_edges());
        let mut rotor = vec![None; g.num_vertices()];
        let mut seen = vec![false; g.num_vertices()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &e in g.rotation(u) {
                let w = g.opposite(e, u);
                if mask[e] && !seen[w] {
                    seen[w] = true;
                    rotor[w] = g.dart_from(e, w);
                    queue.push_back(w);
                }
            }
        }
        RotorConfig { root, rotor }
    }

    /// One step of the process with sink `root`; returns the step record.
    pub fn step(&mut self, g: &RibbonGraph, chip: usize) -> Result<RotorStep> {
        if chip == self.root {
            return Err(Error::ChipAtSink);
        }
        let r = self.rotor[chip].as_mut().expect("non-root vertices carry a rotor");
        let before = r.edge;
        let d = advance(g, r, chip);
        Ok(RotorStep {
            chip,
            before,
            after: d.edge,
            next: g.head(d),
        })
    }

    /// The rotor edges, sorted.
    pub fn edge_set(&self) -> Vec<usize> {
        let mut es: Vec<usize> = self.rotor.iter().flatten().map(|d| d.edge).collect();
        es.sort_unstable();
        es
    }
}

pub fn rotors_from_tree(g: &RibbonGraph, t: &SpanningTree, root: usize) -> RotorConfig {
    RotorConfig::from_tree(g, t, root)
}

/// `((x) - (y))_y (T)`: route a chip from `x` until it first reaches `y`.
pub fn rotor_move(g: &RibbonGraph, t: &SpanningTree, x: usize, y: usize) -> SpanningTree {
    rotor_move_traced(g, t, x, y).0
}

pub fn rotor_move_traced(g: &RibbonGraph, t: &SpanningTree, x: usize, y: usize) -> (SpanningTree, Vec<RotorStep>) {
    let mut config = RotorConfig::from_tree(g, t, y);
    let mut chip = x;
    let mut trace = Vec::new();
    while chip != y {
        let s = config.step(g, chip).expect("chip is not at the sink");
        chip = s.next;
        trace.push(s);
    }
    let tree = SpanningTree::new(g, config.edge_set()).expect("rotor-routing ends on a spanning tree");
    (tree, trace)
}

/// `r_v(γ, T)`: write the reduced representative of `γ` as
/// `Σ a_u ((u) - (v))` and apply each move `a_u mod |Pic^0|` times.
pub fn rotor_act(g: &RibbonGraph, v: usize, gamma: &DivisorClass, t: &SpanningTree) -> Result<SpanningTree> {
    if gamma.degree() != 0 {
        return Err(Error::DegreeMismatch(format!("class of degree {}", gamma.degree())));
    }
    rotor_act_divisor(g, v, gamma.reduced(), t)
}

/// Same as `rotor_act` but for an arbitrary degree-0 representative.
pub fn rotor_act_divisor(g: &RibbonGraph, v: usize, d: &Divisor, t: &SpanningTree) -> Result<SpanningTree> {
    if d.degree() != 0 {
        return Err(Error::DegreeMismatch(format!("divisor of degree {}", d.degree())));
    }
    let order = kirchhoff_count(g) as i64;
    let mut tree = t.clone();
    for u in 0..g.num_vertices() {
        if u == v {
            continue;
        }
        for _ in 0..d[u].rem_euclid(order) {
            tree = rotor_move(g, &tree, u, v);
        }
    }
    Ok(tree)
}

/// `r_v` on tree indices: one table of rotor moves `((u) - (v))_v` per `u`.
#[derive(Debug, Clone)]
pub struct RotorTorsor {
    pub root: usize,
    moves: Vec<Vec<usize>>,
    order: i64,
}

impl RotorTorsor {
    pub fn new(g: &RibbonGraph, trees: &TreeIndex, root: usize) -> Result<Self> {
        let mut moves = Vec::with_capacity(g.num_vertices());
        for u in 0..g.num_vertices() {
            let row = trees
                .trees
                .iter()
                .map(|t| {
                    let out = rotor_move(g, t, u, root);
                    trees
                        .index_of(&out)
                        .ok_or_else(|| Error::NotATree(out.names(g).join(",")))
                })
                .collect::<Result<Vec<usize>>>()?;
            moves.push(row);
        }
        Ok(RotorTorsor {
            root,
            moves,
            order: trees.len() as i64,
        })
    }

    /// Index of `((u) - (root))_root (trees[t])`.
    pub fn move_from(&self, u: usize, t: usize) -> usize {
        self.moves[u][t]
    }

    pub fn act_divisor(&self, d: &Divisor, mut t: usize) -> usize {
        for u in 0..self.moves.len() {
            if u == self.root {
                continue;
            }
            for _ in 0..d[u].rem_euclid(self.order) {
                t = self.moves[u][t];
            }
        }
        t
    }

    pub fn act(&self, gamma: &DivisorClass, t: usize) -> usize {
        self.act_divisor(gamma.reduced(), t)
    }
}

/// A sink-free rotor state: an outgoing dart at every vertex plus a chip.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnicycleState {
    pub rotor: Vec<Dart>,
    pub chip: usize,
}

impl UnicycleState {
    /// Moves the chip once; returns the dart it travelled along.
    pub fn step(&mut self, g: &RibbonGraph) -> Dart {
        let chip = self.chip;
        let d = advance(g, &mut self.rotor[chip], chip);
        self.chip = g.head(d);
        d
    }

    /// The directed cycle of the rotor digraph, starting at the chip, if the
    /// state is a unicycle.
    pub fn cycle(&self, g: &RibbonGraph) -> Option<Vec<Dart>> {
        let n = self.rotor.len();
        // Follow rotors from the chip; the walk must come back to the chip.
        let mut cycle = Vec::new();
        let mut x = self.chip;
        for _ in 0..n {
            let d = self.rotor[x];
            cycle.push(d);
            x = g.head(d);
            if x == self.chip {
                break;
            }
        }
        if x != self.chip {
            return None;
        }
        // Exactly one cycle: every other vertex must drain into it.
        let on_cycle: Vec<bool> = {
            let mut m = vec![false; n];
            for d in &cycle {
                m[g.tail(*d)] = true;
            }
            m
        };
        for start in 0..n {
            let mut y = start;
            let mut hops = 0;
            while !on_cycle[y] {
                y = g.head(self.rotor[y]);
                hops += 1;
                if hops > n {
                    return None;
                }
            }
        }
        Some(cycle)
    }
}

/// How non-cycle vertices are pointed at the cycle when building a unicycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnicycleConstruction {
    /// Breadth-first from the cycle, scanning edges in file order.
    BreadthFirst,
    /// Breadth-first from the cycle, scanning edges in reverse file order.
    ReverseBreadthFirst,
}

fn check_cycle(g: &RibbonGraph, cycle: &[Dart]) -> Result<()> {
    if cycle.len() < 2 {
        return Err(Error::NotACycle("fewer than two darts".into()));
    }
    let mut seen_v = vec![false; g.num_vertices()];
    let mut seen_e = vec![false; g.num_edges()];
    for (i, d) in cycle.iter().enumerate() {
        if d.edge >= g.num_edges() {
            return Err(Error::NotACycle(format!("edge index {} out of range", d.edge)));
        }
        let next = cycle[(i + 1) % cycle.len()];
        if g.head(*d) != g.tail(next) {
            return Err(Error::NotACycle(format!("darts {i} and {} do not connect", i + 1)));
        }
        if std::mem::replace(&mut seen_v[g.tail(*d)], true) {
            return Err(Error::NotACycle(format!("vertex {} repeats", g.vertex_name(g.tail(*d)))));
        }
        if std::mem::replace(&mut seen_e[d.edge], true) {
            return Err(Error::NotACycle(format!("edge {} repeats", g.edge_name(d.edge))));
        }
    }
    Ok(())
}

/// The unicycle used to test a cycle: rotors along `cycle`, every other
/// vertex pointing towards it, chip on the least cycle vertex.
pub fn unicycle_for_cycle(g: &RibbonGraph, cycle: &[Dart], how: UnicycleConstruction) -> Result<UnicycleState> {
    check_cycle(g, cycle)?;
    let n = g.num_vertices();
    let mut rotor: Vec<Option<Dart>> = vec![None; n];
    let mut queue = VecDeque::new();
    for d in cycle {
        rotor[g.tail(*d)] = Some(*d);
        queue.push_back(g.tail(*d));
    }
    while let Some(u) = queue.pop_front() {
        let mut incident: Vec<usize> = g.rotation(u).to_vec();
        incident.sort_unstable();
        if how == UnicycleConstruction::ReverseBreadthFirst {
            incident.reverse();
        }
        for e in incident {
            let w = g.opposite(e, u);
            if rotor[w].is_none() {
                rotor[w] = g.dart_from(e, w);
                queue.push_back(w);
            }
        }
    }
    let chip = cycle.iter().map(|d| g.tail(*d)).min().expect("nonempty cycle");
    Ok(UnicycleState {
        rotor: rotor.into_iter().map(|r| r.expect("graph is connected")).collect(),
        chip,
    })
}

/// Reverses the cycle of a unicycle, keeping the other rotors.
pub fn reverse_cycle(g: &RibbonGraph, state: &UnicycleState) -> Option<UnicycleState> {
    let cycle = state.cycle(g)?;
    let mut rotor = state.rotor.clone();
    for d in &cycle {
        rotor[g.head(*d)] = d.reversed();
    }
    Some(UnicycleState {
        rotor,
        chip: state.chip,
    })
}

/// Result of running a unicycle for one full period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    /// Steps until the initial state first recurs.
    pub period: usize,
    /// How often each dart (by `Dart::index`) was travelled in that period.
    pub dart_uses: Vec<usize>,
    pub states: Vec<UnicycleState>,
}

/// Runs at most `2|E|` steps, stopping when the initial state recurs.
pub fn unicycle_orbit(g: &RibbonGraph, start: &UnicycleState) -> Orbit {
    let limit = 2 * g.num_edges();
    let mut state = start.clone();
    let mut uses = vec![0; 2 * g.num_edges()];
    let mut states = vec![state.clone()];
    let mut period = 0;
    for i in 1..=limit {
        let d = state.step(g);
        uses[d.index()] += 1;
        if state == *start {
            period = i;
            break;
        }
        states.push(state.clone());
    }
    Orbit {
        period,
        dart_uses: uses,
        states,
    }
}

pub fn cycle_is_reversible(g: &RibbonGraph, cycle: &[Dart]) -> Result<bool> {
    cycle_is_reversible_with(g, cycle, UnicycleConstruction::BreadthFirst)
}

pub fn cycle_is_reversible_with(g: &RibbonGraph, cycle: &[Dart], how: UnicycleConstruction) -> Result<bool> {
    let start = unicycle_for_cycle(g, cycle, how)?;
    let target = reverse_cycle(g, &start).expect("constructed state is a unicycle");
    Ok(unicycle_orbit(g, &start).states.contains(&target))
}

/// All simple directed cycles, each listed from its least vertex.
pub fn directed_cycles(g: &RibbonGraph) -> Vec<Vec<Dart>> {
    let mut out = Vec::new();
    for s in 0..g.num_vertices() {
        let mut path = Vec::new();
        let mut on_path = vec![false; g.num_vertices()];
        on_path[s] = true;
        extend_cycles(g, s, s, &mut path, &mut on_path, &mut out);
    }
    out
}

fn extend_cycles(
    g: &RibbonGraph,
    start: usize,
    at: usize,
    path: &mut Vec<Dart>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<Dart>>,
) {
    let mut incident = g.rotation(at).to_vec();
    incident.sort_unstable();
    for e in incident {
        if path.iter().any(|d: &Dart| d.edge == e) {
            continue;
        }
        let d = g.dart_from(e, at).expect("incident");
        let w = g.head(d);
        if w == start && !path.is_empty() {
            let mut c = path.clone();
            c.push(d);
            out.push(c);
        } else if w > start && !on_path[w] {
            on_path[w] = true;
            path.push(d);
            extend_cycles(g, start, w, path, on_path, out);
            path.pop();
            on_path[w] = false;
        }
    }
}

/// Parses `"u p q r"` style input: a start vertex followed by edge ids.
pub fn parse_cycle(g: &RibbonGraph, start: &str, edges: &[&str]) -> Result<Vec<Dart>> {
    let mut at = g.vertex(start)?;
    let mut out = Vec::with_capacity(edges.len());
    for name in edges {
        let e = g.edge(name)?;
        let d = g
            .dart_from(e, at)
            .ok_or_else(|| Error::NotACycle(format!("edge {name} does not leave {}", g.vertex_name(at))))?;
        out.push(d);
        at = g.head(d);
    }
    check_cycle(g, &out)?;
    Ok(out)
}

pub fn trace_dump(g: &RibbonGraph, steps: &[RotorStep]) -> String {
    let mut s = String::new();
    for step in steps {
        let _ = writeln!(s, "{}", step.line(g));
    }
    s
}
