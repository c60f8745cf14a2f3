//! Named small ribbon graphs and the default verification corpus.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{trace_faces, RibbonGraph};

/// Seed of the random part of the default corpus.
pub const DEFAULT_SEED: u64 = 0x5eed_2014;

fn build(vertices: &[&str], edges: &[(&str, &str, &str)], rotation: &[&[&str]]) -> RibbonGraph {
    RibbonGraph::from_parts(
        vertices.iter().map(|s| s.to_string()).collect(),
        edges
            .iter()
            .map(|(id, a, b)| (id.to_string(), [a.to_string(), b.to_string()]))
            .collect(),
        rotation
            .iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect(),
    )
    .expect("built-in graph is valid")
}

pub fn single_edge() -> RibbonGraph {
    build(&["u", "v"], &[("e1", "u", "v")], &[&["e1"], &["e1"]])
}

pub fn path3() -> RibbonGraph {
    build(
        &["1", "2", "3"],
        &[("a", "1", "2"), ("b", "2", "3")],
        &[&["a"], &["a", "b"], &["b"]],
    )
}

/// Triangle with rotation 1:(a,c), 2:(b,a), 3:(c,b).
pub fn k3() -> RibbonGraph {
    build(
        &["1", "2", "3"],
        &[("a", "1", "2"), ("b", "2", "3"), ("c", "3", "1")],
        &[&["a", "c"], &["b", "a"], &["c", "b"]],
    )
}

const THETA_EDGES: &[(&str, &str, &str)] = &[("p", "u", "v"), ("q", "u", "v"), ("r", "u", "v")];

/// Theta graph, rotation u:(p,q,r), v:(r,q,p). Three faces.
pub fn theta_planar() -> RibbonGraph {
    build(&["u", "v"], THETA_EDGES, &[&["p", "q", "r"], &["r", "q", "p"]])
}

/// Theta graph, rotation u:(p,q,r), v:(p,q,r). One face, torus.
pub fn theta_torus() -> RibbonGraph {
    build(&["u", "v"], THETA_EDGES, &[&["p", "q", "r"], &["p", "q", "r"]])
}

/// Two vertices joined by four parallel edges, planar rotation.
pub fn banana4() -> RibbonGraph {
    build(
        &["u", "v"],
        &[("p", "u", "v"), ("q", "u", "v"), ("r", "u", "v"), ("s", "u", "v")],
        &[&["p", "q", "r", "s"], &["s", "r", "q", "p"]],
    )
}

/// Complete graph on `n` vertices named `1..=n`, edges `ij`, rotation in
/// file order.
pub fn complete(n: usize) -> RibbonGraph {
    let names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((format!("{}{}", names[i], names[j]), [names[i].clone(), names[j].clone()]));
        }
    }
    file_order(names, edges)
}

/// Complete bipartite graph `K_{3,3}` with parts `a1..a3`, `b1..b3`.
pub fn k33() -> RibbonGraph {
    let names: Vec<String> = ["a1", "a2", "a3", "b1", "b2", "b3"].iter().map(|s| s.to_string()).collect();
    let mut edges = Vec::new();
    for a in 0..3 {
        for b in 3..6 {
            edges.push((format!("{}{}", names[a], names[b]), [names[a].clone(), names[b].clone()]));
        }
    }
    file_order(names, edges)
}

fn file_order(vertices: Vec<String>, edges: Vec<(String, [String; 2])>) -> RibbonGraph {
    let mut rotation = vec![Vec::new(); vertices.len()];
    for (id, [a, b]) in &edges {
        for end in [a, b] {
            let v = vertices.iter().position(|x| x == end).expect("known vertex");
            rotation[v].push(id.clone());
        }
    }
    RibbonGraph::from_parts(vertices, edges, rotation).expect("built-in graph is valid")
}

/// Every rotation system of the underlying graph of `g`. The first edge at
/// each vertex stays fixed and the rest are permuted, so each cyclic order
/// appears exactly once.
pub struct RotationSystems {
    base: RibbonGraph,
    /// Per vertex: permutations of the rotation tail.
    choices: Vec<Vec<Vec<usize>>>,
    counter: Vec<usize>,
    done: bool,
}

impl RotationSystems {
    pub fn new(g: &RibbonGraph) -> Self {
        let choices = g
            .rotations()
            .iter()
            .map(|rot| {
                if rot.is_empty() {
                    return vec![Vec::new()];
                }
                let mut tail: Vec<usize> = rot[1..].to_vec();
                tail.sort_unstable();
                let mut out = Vec::new();
                loop {
                    let mut r = vec![rot[0]];
                    r.extend_from_slice(&tail);
                    out.push(r);
                    if !next_permutation(&mut tail) {
                        break;
                    }
                }
                out
            })
            .collect::<Vec<_>>();
        let counter = vec![0; choices.len()];
        RotationSystems {
            base: g.clone(),
            choices,
            counter,
            done: false,
        }
    }

    /// `Π_v (deg(v) - 1)!`.
    pub fn count(&self) -> usize {
        self.choices.iter().map(Vec::len).product()
    }
}

impl Iterator for RotationSystems {
    type Item = RibbonGraph;

    fn next(&mut self) -> Option<RibbonGraph> {
        if self.done {
            return None;
        }
        let rotation: Vec<Vec<usize>> = self
            .counter
            .iter()
            .zip(&self.choices)
            .map(|(&i, c)| c[i].clone())
            .collect();
        let mut k = self.counter.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.counter[k] += 1;
            if self.counter[k] < self.choices[k].len() {
                break;
            }
            self.counter[k] = 0;
        }
        Some(self.base.with_rotation(rotation).expect("permuted rotation stays valid"))
    }
}

fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// A random connected loopless multigraph with a random rotation system.
pub fn random_multigraph(rng: &mut ChaCha8Rng, max_vertices: usize, max_edges: usize) -> RibbonGraph {
    let n = rng.gen_range(2..=max_vertices);
    let m = rng.gen_range(n - 1..=max_edges.max(n - 1));
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut pairs = Vec::with_capacity(m);
    for i in 1..n {
        pairs.push((rng.gen_range(0..i), i));
    }
    while pairs.len() < m {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            pairs.push((a.min(b), a.max(b)));
        }
    }
    pairs.shuffle(rng);
    let edges: Vec<(String, [String; 2])> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| (format!("e{i}"), [names[a].clone(), names[b].clone()]))
        .collect();
    let mut rotation: Vec<Vec<String>> = vec![Vec::new(); n];
    for (id, [a, b]) in &edges {
        for end in [a, b] {
            let v = names.iter().position(|x| x == end).expect("known vertex");
            rotation[v].push(id.clone());
        }
    }
    for r in &mut rotation {
        r.shuffle(rng);
    }
    RibbonGraph::from_parts(names, edges, rotation).expect("generator builds valid graphs")
}

/// First planar rotation system of the underlying graph, if any.
pub fn planar_rotation(g: &RibbonGraph) -> Option<RibbonGraph> {
    RotationSystems::new(g).find(|h| trace_faces(h).is_planar())
}

/// Random planar bridgeless multigraphs; graphs that are non-planar or have
/// bridges are redrawn.
pub fn random_planar_bridgeless(rng: &mut ChaCha8Rng, max_vertices: usize, max_edges: usize) -> RibbonGraph {
    loop {
        let g = random_multigraph(rng, max_vertices, max_edges);
        if g.num_vertices() < 3 || !g.bridges().is_empty() {
            continue;
        }
        if let Some(p) = planar_rotation(&g) {
            return p;
        }
    }
}

/// The default corpus as `(name, graph)` pairs, in a fixed order.
pub fn default_corpus() -> Vec<(String, RibbonGraph)> {
    let mut out: Vec<(String, RibbonGraph)> = vec![
        ("single-edge".into(), single_edge()),
        ("path3".into(), path3()),
        ("k3".into(), k3()),
    ];
    for (i, g) in RotationSystems::new(&theta_planar()).enumerate() {
        out.push((format!("theta-r{i}"), g));
    }
    out.push(("banana4".into(), banana4()));
    for (i, g) in RotationSystems::new(&complete(4)).enumerate() {
        out.push((format!("k4-r{i:02}"), g));
    }
    out.push(("k5".into(), complete(5)));
    out.push(("k33".into(), k33()));
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    for i in 0..5 {
        out.push((format!("random-planar-{i}"), random_planar_bridgeless(&mut rng, 6, 10)));
    }
    for i in 0..5 {
        out.push((format!("random-{i}"), random_multigraph(&mut rng, 6, 10)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::trace_faces;

    #[test]
    fn rotation_system_counts() {
        assert_eq!(RotationSystems::new(&theta_planar()).count(), 4);
        assert_eq!(RotationSystems::new(&theta_planar()).collect::<Vec<_>>().len(), 4);
        let k4: Vec<RibbonGraph> = RotationSystems::new(&complete(4)).collect();
        assert_eq!(k4.len(), 16);
        let planar = k4.iter().filter(|g| trace_faces(g).is_planar()).count();
        assert_eq!(planar, 2);
        assert_eq!(RotationSystems::new(&complete(5)).count(), 6usize.pow(5));
    }

    #[test]
    fn rotation_systems_are_distinct() {
        let all: Vec<Vec<Vec<usize>>> = RotationSystems::new(&complete(4))
            .map(|g| g.rotations().to_vec())
            .collect();
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), all.len());
    }

    #[test]
    fn default_corpus_shape() {
        let c = default_corpus();
        assert_eq!(c.len(), 3 + 4 + 1 + 16 + 2 + 10);
        for (name, g) in &c {
            if name.starts_with("random") {
                assert!(g.num_vertices() <= 6 && g.num_edges() <= 10, "{name}");
            }
            if name.starts_with("random-planar") {
                assert!(trace_faces(g).is_planar());
                assert!(g.bridges().is_empty());
            }
        }
        // Deterministic.
        let again = default_corpus();
        for ((a, g), (b, h)) in c.iter().zip(&again) {
            assert_eq!(a, b);
            assert_eq!(g.to_json(), h.to_json());
        }
    }

    #[test]
    fn named_graphs() {
        assert_eq!(trace_faces(&theta_planar()).faces.len(), 3);
        assert_eq!(trace_faces(&theta_torus()).topological_genus, 1);
        assert!(trace_faces(&banana4()).is_planar());
        assert!(trace_faces(&k3()).is_planar());
        assert!(!trace_faces(&complete(5)).is_planar());
        assert!(!trace_faces(&k33()).is_planar());
    }
}
