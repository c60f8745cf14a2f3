//! Planar duality for bridgeless planar ribbon graphs.
//!
//! Dual vertices are the faces of `G` (in face-tracing order) and the dual of
//! edge `e` is `e*`. A dart `d` of `G` lies on the face `face(d)`; its dual
//! dart crosses `d` with the orientation of the plane.

use crate::bernardi::bernardi_act;
use crate::divisor::{Divisor, DivisorClass};
use crate::error::{Error, Result};
use crate::graph::{trace_faces, Dart, FaceDecomposition, RibbonGraph, SpanningTree};

/// Which of the two mirror conventions to use for the dual. `Standard` is the
/// convention under which duality commutes with the Bernardi action;
/// `Mirrored` swaps the handedness of the dual rotation and exists for
/// debugging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DualConvention {
    #[default]
    Standard,
    Mirrored,
}

#[derive(Debug, Clone)]
pub struct DualCorrespondence {
    pub dual: RibbonGraph,
    pub faces: FaceDecomposition,
    /// Dual dart of each primal dart, by `Dart::index`.
    pub dart_map: Vec<Dart>,
    pub convention: DualConvention,
}

impl DualCorrespondence {
    /// `e*` has the same index as `e`.
    pub fn dual_edge(&self, e: usize) -> usize {
        e
    }

    pub fn dual_dart(&self, d: Dart) -> Dart {
        self.dart_map[d.index()]
    }

    /// `e <-> e*` table, one pair per line.
    pub fn edge_table(&self, g: &RibbonGraph) -> String {
        (0..g.num_edges())
            .map(|e| format!("{} {}\n", g.edge_name(e), self.dual.edge_name(self.dual_edge(e))))
            .collect()
    }
}

pub fn dual_graph(g: &RibbonGraph) -> Result<DualCorrespondence> {
    dual_graph_with(g, DualConvention::Standard)
}

pub fn dual_graph_with(g: &RibbonGraph, convention: DualConvention) -> Result<DualCorrespondence> {
    let faces = trace_faces(g);
    if !faces.is_planar() {
        return Err(Error::NotPlanar(faces.topological_genus));
    }
    if let Some(&b) = g.bridges().first() {
        return Err(Error::HasBridge(g.edge_name(b).to_string()));
    }
    let names: Vec<String> = (0..faces.faces.len()).map(|i| format!("f{i}")).collect();
    let edges: Vec<(String, [String; 2])> = (0..g.num_edges())
        .map(|e| {
            let f0 = faces.face_of[Dart::new(e, 0).index()];
            let f1 = faces.face_of[Dart::new(e, 1).index()];
            (format!("{}*", g.edge_name(e)), [names[f0].clone(), names[f1].clone()])
        })
        .collect();
    // Faces are traced with the face on the right of each dart, so the walk
    // order already goes around the face in the opposite orientation.
    let rotation: Vec<Vec<String>> = faces
        .faces
        .iter()
        .map(|cycle| {
            let mut order: Vec<String> = cycle.iter().map(|d| edges[d.edge].0.clone()).collect();
            if convention == DualConvention::Mirrored {
                order.reverse();
            }
            order
        })
        .collect();
    let dual = RibbonGraph::from_parts(names, edges, rotation)?;
    // (e*, s) runs from face(e, s) to face(e, 1 - s), so the dual of (e, s)
    // crosses it from its left to its right.
    let dart_map = g.darts().map(|d| Dart::new(d.edge, 1 - d.side)).collect();
    Ok(DualCorrespondence {
        dual,
        faces,
        dart_map,
        convention,
    })
}

/// `σ(T) = {e* : e ∉ T}`.
pub fn dual_tree(corr: &DualCorrespondence, g: &RibbonGraph, t: &SpanningTree) -> Result<SpanningTree> {
    let edges = t
        .complement(g.num_edges())
        .into_iter()
        .map(|e| corr.dual_edge(e))
        .collect();
    SpanningTree::new(&corr.dual, edges)
}

/// An integral 1-chain: a coefficient per dart with `c(rev d) = 0` kept
/// normalized by storing only side-0 coefficients per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain(Vec<i64>);

impl Chain {
    pub fn zero(num_edges: usize) -> Self {
        Chain(vec![0; num_edges])
    }

    pub fn add_dart(&mut self, d: Dart, c: i64) {
        if d.side == 0 {
            self.0[d.edge] += c;
        } else {
            self.0[d.edge] -= c;
        }
    }

    /// `∂(u -> w) = (w) - (u)`.
    pub fn boundary(&self, g: &RibbonGraph) -> Divisor {
        let mut d = Divisor::zero(g.num_vertices());
        for (e, &c) in self.0.iter().enumerate() {
            if c != 0 {
                let dart = Dart::new(e, 0);
                d.add_chip(g.head(dart), c);
                d.add_chip(g.tail(dart), -c);
            }
        }
        d
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.0
    }
}

/// How chip pairs are joined when lifting a divisor to a chain.
pub trait Router {
    fn route(&self, g: &RibbonGraph, from: usize, to: usize) -> Vec<Dart>;
}

/// Breadth-first shortest paths, ties by edge order.
pub struct ShortestPaths;

impl Router for ShortestPaths {
    fn route(&self, g: &RibbonGraph, from: usize, to: usize) -> Vec<Dart> {
        g.shortest_path(from, to)
    }
}

/// Paths inside a fixed spanning tree.
pub struct TreePaths(pub SpanningTree);

impl Router for TreePaths {
    fn route(&self, g: &RibbonGraph, from: usize, to: usize) -> Vec<Dart> {
        crate::graph::tree_path(g, &self.0, from, to)
    }
}

/// A chain with boundary `d` (degree 0): chips are paired greedily in vertex
/// order and each pair `(a) - (b)` is joined by a routed path from `b` to `a`.
pub fn lift_to_chain(g: &RibbonGraph, d: &Divisor, router: &dyn Router) -> Result<Chain> {
    if d.degree() != 0 {
        return Err(Error::DegreeMismatch(format!("divisor of degree {}", d.degree())));
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for v in 0..g.num_vertices() {
        let c = d[v];
        for _ in 0..c.max(0) {
            plus.push(v);
        }
        for _ in 0..(-c).max(0) {
            minus.push(v);
        }
    }
    let mut chain = Chain::zero(g.num_edges());
    for (&a, &b) in plus.iter().zip(&minus) {
        for dart in router.route(g, b, a) {
            chain.add_dart(dart, 1);
        }
    }
    Ok(chain)
}

/// Maps a chain on `G` to the dual, dart by dart.
pub fn dual_chain(corr: &DualCorrespondence, chain: &Chain) -> Chain {
    let mut out = Chain::zero(corr.dual.num_edges());
    for (e, &c) in chain.coefficients().iter().enumerate() {
        if c != 0 {
            out.add_dart(corr.dual_dart(Dart::new(e, 0)), c);
        }
    }
    out
}

/// `Ψ(γ)`: lift, map through the darts, take the boundary on the dual.
pub fn psi_class(corr: &DualCorrespondence, g: &RibbonGraph, gamma: &DivisorClass) -> Result<DivisorClass> {
    psi_class_with(corr, g, gamma, &ShortestPaths)
}

pub fn psi_class_with(
    corr: &DualCorrespondence,
    g: &RibbonGraph,
    gamma: &DivisorClass,
    router: &dyn Router,
) -> Result<DivisorClass> {
    let chain = lift_to_chain(g, gamma.reduced(), router)?;
    psi_of_divisor_chain(corr, &chain)
}

pub fn psi_of_divisor_chain(corr: &DualCorrespondence, chain: &Chain) -> Result<DivisorClass> {
    let image = dual_chain(corr, chain);
    Ok(DivisorClass::of(&corr.dual, &image.boundary(&corr.dual)))
}

/// Both sides of the duality square for one `(γ, T)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareSides {
    pub primal_then_dual: SpanningTree,
    pub dual_then_act: SpanningTree,
}

impl SquareSides {
    pub fn commutes(&self) -> bool {
        self.primal_then_dual == self.dual_then_act
    }
}

/// `σ(β_v(γ, T))` against `β*(Ψ(γ), σ(T))`, acting on the dual at its first
/// vertex.
pub fn duality_square(
    corr: &DualCorrespondence,
    g: &RibbonGraph,
    v: usize,
    gamma: &DivisorClass,
    t: &SpanningTree,
) -> Result<SquareSides> {
    let primal = bernardi_act(g, v, gamma, t)?;
    let primal_then_dual = dual_tree(corr, g, &primal)?;
    let psi = psi_class(corr, g, gamma)?;
    let dual_then_act = bernardi_act(&corr.dual, 0, &psi, &dual_tree(corr, g, t)?)?;
    Ok(SquareSides {
        primal_then_dual,
        dual_then_act,
    })
}

pub fn duality_square_check(
    corr: &DualCorrespondence,
    g: &RibbonGraph,
    v: usize,
    gamma: &DivisorClass,
    t: &SpanningTree,
) -> Result<bool> {
    Ok(duality_square(corr, g, v, gamma, t)?.commutes())
}
