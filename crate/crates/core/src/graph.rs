//! Ribbon graphs as combinatorial maps.
//!
//! A ribbon graph is a loopless connected multigraph together with a cyclic
//! order of the incident edges at every vertex. Because there are no loops,
//! each edge meets each of its endpoints exactly once, so the per-vertex edge
//! lists determine the rotation on darts (half-edges) unambiguously.
//!
//! Faces are traced with the successor rule: from a dart `u -> w` the next
//! dart of the same face leaves `w` along the edge that follows the reverse
//! dart in the rotation at `w`.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationKind};

/// Largest accepted vertex or edge count. Everything here is exhaustive.
pub const MAX_ELEMENTS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub ends: [usize; 2],
}

/// An edge with a chosen tail. `side` selects which entry of `Edge::ends`
/// is the tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart {
    pub edge: usize,
    pub side: u8,
}

impl Dart {
    pub fn new(edge: usize, side: u8) -> Self {
        debug_assert!(side < 2);
        Dart { edge, side }
    }

    pub fn reversed(self) -> Self {
        Dart {
            edge: self.edge,
            side: 1 - self.side,
        }
    }

    /// Dense index in `0..2|E|`.
    pub fn index(self) -> usize {
        2 * self.edge + self.side as usize
    }

    pub fn from_index(i: usize) -> Self {
        Dart {
            edge: i / 2,
            side: (i % 2) as u8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RibbonGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    rotation: Vec<Vec<usize>>,
    /// `slot[e][s]` is the position of edge `e` in the rotation at `ends[s]`.
    slot: Vec<[usize; 2]>,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

/// On-disk graph format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeRecord>,
    pub rotation: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: String,
    pub ends: [String; 2],
}

impl RibbonGraph {
    /// Builds and validates a ribbon graph from identifiers.
    pub fn from_parts(
        vertices: Vec<String>,
        edges: Vec<(String, [String; 2])>,
        rotation: Vec<Vec<String>>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid(ValidationKind::Disconnected, "no vertices"));
        }
        if vertices.len() > MAX_ELEMENTS || edges.len() > MAX_ELEMENTS {
            return Err(Error::Parse("graph too large".into()));
        }
        let mut vertex_index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(Error::invalid(
                    ValidationKind::DuplicateId,
                    format!("vertex {v}"),
                ));
            }
        }
        let mut edge_index = HashMap::new();
        let mut edge_list = Vec::with_capacity(edges.len());
        for (i, (id, [a, b])) in edges.into_iter().enumerate() {
            if edge_index.insert(id.clone(), i).is_some() {
                return Err(Error::invalid(
                    ValidationKind::DuplicateId,
                    format!("edge {id}"),
                ));
            }
            let lookup = |x: &String| {
                vertex_index
                    .get(x)
                    .copied()
                    .ok_or_else(|| Error::Parse(format!("edge {id} names unknown vertex {x}")))
            };
            let (ia, ib) = (lookup(&a)?, lookup(&b)?);
            if ia == ib {
                return Err(Error::invalid(ValidationKind::Loop, format!("edge {id} at {a}")));
            }
            edge_list.push(Edge { id, ends: [ia, ib] });
        }
        if rotation.len() != vertices.len() {
            return Err(Error::invalid(
                ValidationKind::RotationMismatch,
                "rotation must list every vertex",
            ));
        }
        let mut rot = Vec::with_capacity(vertices.len());
        for (v, list) in rotation.iter().enumerate() {
            let mut ids = Vec::with_capacity(list.len());
            for id in list {
                let e = *edge_index.get(id).ok_or_else(|| {
                    Error::invalid(
                        ValidationKind::RotationMismatch,
                        format!("rotation at {} names unknown edge {id}", vertices[v]),
                    )
                })?;
                ids.push(e);
            }
            rot.push(ids);
        }
        Self::from_indices(vertices, edge_list, rot, vertex_index, edge_index)
    }

    fn from_indices(
        vertices: Vec<String>,
        edges: Vec<Edge>,
        rotation: Vec<Vec<usize>>,
        vertex_index: HashMap<String, usize>,
        edge_index: HashMap<String, usize>,
    ) -> Result<Self> {
        let mut slot = vec![[usize::MAX; 2]; edges.len()];
        for (v, list) in rotation.iter().enumerate() {
            for (pos, &e) in list.iter().enumerate() {
                let side = match edges[e].ends.iter().position(|&x| x == v) {
                    Some(s) => s,
                    None => {
                        return Err(Error::invalid(
                            ValidationKind::RotationMismatch,
                            format!("edge {} is not incident to {}", edges[e].id, vertices[v]),
                        ))
                    }
                };
                if slot[e][side] != usize::MAX {
                    return Err(Error::invalid(
                        ValidationKind::RotationMismatch,
                        format!("edge {} repeated at {}", edges[e].id, vertices[v]),
                    ));
                }
                slot[e][side] = pos;
            }
        }
        for (e, s) in slot.iter().enumerate() {
            for side in 0..2 {
                if s[side] == usize::MAX {
                    return Err(Error::invalid(
                        ValidationKind::RotationMismatch,
                        format!(
                            "edge {} missing from rotation at {}",
                            edges[e].id, vertices[edges[e].ends[side]]
                        ),
                    ));
                }
            }
        }
        let g = RibbonGraph {
            vertices,
            edges,
            rotation,
            slot,
            vertex_index,
            edge_index,
        };
        if !g.is_connected_within(&vec![true; g.num_edges()]) {
            return Err(Error::invalid(ValidationKind::Disconnected, "graph is not connected"));
        }
        Ok(g)
    }

    /// Convenience constructor: rotation at each vertex is the incident edges
    /// in file order.
    pub fn with_file_order_rotation(
        vertices: &[&str],
        edges: &[(&str, &str, &str)],
    ) -> Result<Self> {
        let mut rotation: Vec<Vec<String>> = vec![Vec::new(); vertices.len()];
        for (id, a, b) in edges {
            for end in [a, b] {
                if let Some(v) = vertices.iter().position(|x| x == end) {
                    rotation[v].push(id.to_string());
                }
            }
        }
        Self::from_parts(
            vertices.iter().map(|s| s.to_string()).collect(),
            edges
                .iter()
                .map(|(id, a, b)| (id.to_string(), [a.to_string(), b.to_string()]))
                .collect(),
            rotation,
        )
    }

    /// Same underlying graph with a different rotation system, given as edge
    /// indices per vertex.
    pub fn with_rotation(&self, rotation: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_indices(
            self.vertices.clone(),
            self.edges.clone(),
            rotation,
            self.vertex_index.clone(),
            self.edge_index.clone(),
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut rotation = Vec::with_capacity(file.vertices.len());
        for v in &file.vertices {
            let list = match file.rotation.get(v) {
                Some(serde_json::Value::Array(items)) => items
                    .iter()
                    .map(|x| {
                        x.as_str()
                            .map(str::to_owned)
                            .ok_or_else(|| Error::Parse(format!("rotation at {v}: non-string entry")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                Some(_) => return Err(Error::Parse(format!("rotation at {v} is not a list"))),
                None => {
                    return Err(Error::invalid(
                        ValidationKind::RotationMismatch,
                        format!("no rotation for vertex {v}"),
                    ))
                }
            };
            rotation.push(list);
        }
        if let Some(extra) = file.rotation.keys().find(|k| !file.vertices.contains(k)) {
            return Err(Error::invalid(
                ValidationKind::RotationMismatch,
                format!("rotation names unknown vertex {extra}"),
            ));
        }
        Self::from_parts(
            file.vertices,
            file.edges.into_iter().map(|e| (e.id, e.ends)).collect(),
            rotation,
        )
    }

    pub fn to_file(&self) -> GraphFile {
        let mut rotation = serde_json::Map::new();
        for (v, list) in self.rotation.iter().enumerate() {
            rotation.insert(
                self.vertices[v].clone(),
                serde_json::Value::Array(
                    list.iter()
                        .map(|&e| serde_json::Value::String(self.edges[e].id.clone()))
                        .collect(),
                ),
            );
        }
        GraphFile {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    id: e.id.clone(),
                    ends: [self.vertices[e.ends[0]].clone(), self.vertices[e.ends[1]].clone()],
                })
                .collect(),
            rotation,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("graph serializes")
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn edge_name(&self, e: usize) -> &str {
        &self.edges[e].id
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, name: &str) -> Result<usize> {
        self.vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownId(format!("vertex {name}")))
    }

    pub fn edge(&self, name: &str) -> Result<usize> {
        self.edge_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownId(format!("edge {name}")))
    }

    pub fn ends(&self, e: usize) -> [usize; 2] {
        self.edges[e].ends
    }

    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotation[v]
    }

    pub fn rotations(&self) -> &[Vec<usize>] {
        &self.rotation
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rotation[v].len()
    }

    /// Combinatorial genus `|E| - |V| + 1`.
    pub fn genus(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    pub fn tail(&self, d: Dart) -> usize {
        self.edges[d.edge].ends[d.side as usize]
    }

    pub fn head(&self, d: Dart) -> usize {
        self.edges[d.edge].ends[1 - d.side as usize]
    }

    /// The other endpoint of `e` as seen from `v`.
    pub fn opposite(&self, e: usize, v: usize) -> usize {
        let [a, b] = self.edges[e].ends;
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn is_incident(&self, e: usize, v: usize) -> bool {
        self.edges[e].ends.contains(&v)
    }

    /// The dart of `e` leaving `v`.
    pub fn dart_from(&self, e: usize, v: usize) -> Option<Dart> {
        self.edges[e]
            .ends
            .iter()
            .position(|&x| x == v)
            .map(|s| Dart::new(e, s as u8))
    }

    pub fn darts(&self) -> impl Iterator<Item = Dart> {
        (0..2 * self.edges.len()).map(Dart::from_index)
    }

    fn position(&self, e: usize, v: usize) -> usize {
        let side = self.edges[e].ends.iter().position(|&x| x == v).expect("incident");
        self.slot[e][side]
    }

    /// Edge after `e` in the cyclic order at `v`.
    pub fn rotation_next(&self, v: usize, e: usize) -> usize {
        let list = &self.rotation[v];
        list[(self.position(e, v) + 1) % list.len()]
    }

    /// Edge before `e` in the cyclic order at `v`.
    pub fn rotation_prev(&self, v: usize, e: usize) -> usize {
        let list = &self.rotation[v];
        list[(self.position(e, v) + list.len() - 1) % list.len()]
    }

    /// Successor of `e` at `v` among edges with `alive[_] == true`.
    pub fn rotation_next_within(&self, v: usize, e: usize, alive: &[bool]) -> Option<usize> {
        let list = &self.rotation[v];
        let start = self.position(e, v);
        (1..=list.len())
            .map(|k| list[(start + k) % list.len()])
            .find(|&f| alive[f])
    }

    /// Predecessor of `e` at `v` among edges with `alive[_] == true`.
    pub fn rotation_prev_within(&self, v: usize, e: usize, alive: &[bool]) -> Option<usize> {
        let list = &self.rotation[v];
        let n = list.len();
        let start = self.position(e, v);
        (1..=n).map(|k| list[(start + n - k) % n]).find(|&f| alive[f])
    }

    /// Next dart on the same face.
    pub fn face_successor(&self, d: Dart) -> Dart {
        let w = self.head(d);
        let next = self.rotation_next(w, d.edge);
        self.dart_from(next, w).expect("rotation edges are incident")
    }

    pub fn is_connected_within(&self, alive: &[bool]) -> bool {
        let n = self.vertices.len();
        let mut uf = UnionFind::new(n);
        let mut comps = n;
        for (e, edge) in self.edges.iter().enumerate() {
            if alive[e] && uf.union(edge.ends[0], edge.ends[1]) {
                comps -= 1;
            }
        }
        comps == 1
    }

    /// Edges whose removal disconnects the graph, in file order.
    pub fn bridges(&self) -> Vec<usize> {
        let mut alive = vec![true; self.edges.len()];
        let mut out = Vec::new();
        for e in 0..self.edges.len() {
            alive[e] = false;
            if !self.is_connected_within(&alive) {
                out.push(e);
            }
            alive[e] = true;
        }
        out
    }

    /// First pair of parallel edges, if any.
    pub fn parallel_pair(&self) -> Option<(usize, usize)> {
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        for (e, edge) in self.edges.iter().enumerate() {
            let [a, b] = edge.ends;
            let key = (a.min(b), a.max(b));
            if let Some(&f) = seen.get(&key) {
                return Some((f, e));
            }
            seen.insert(key, e);
        }
        None
    }

    /// Laplacian matrix `deg(v) on the diagonal, -multiplicity off it`.
    pub fn laplacian_matrix(&self) -> Vec<Vec<i64>> {
        let n = self.vertices.len();
        let mut m = vec![vec![0i64; n]; n];
        for edge in &self.edges {
            let [a, b] = edge.ends;
            m[a][a] += 1;
            m[b][b] += 1;
            m[a][b] -= 1;
            m[b][a] -= 1;
        }
        m
    }

    /// Breadth-first distances from `source` in vertex-index order.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertices.len()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.rotation[u] {
                let w = self.opposite(e, u);
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest path from `from` to `to` as a dart sequence. Ties are broken by
    /// edge file order.
    pub fn shortest_path(&self, from: usize, to: usize) -> Vec<Dart> {
        let mut parent: Vec<Option<Dart>> = vec![None; self.vertices.len()];
        let mut seen = vec![false; self.vertices.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                break;
            }
            let mut incident: Vec<usize> = self.rotation[u].clone();
            incident.sort_unstable();
            for e in incident {
                let d = self.dart_from(e, u).expect("incident");
                let w = self.head(d);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        let mut path = Vec::new();
        let mut cur = to;
        while cur != from {
            let d = parent[cur].expect("graph is connected");
            path.push(d);
            cur = self.tail(d);
        }
        path.reverse();
        path
    }

    /// Orientation-preserving ribbon graph isomorphism test. Returns the edge
    /// map `self -> other` when one exists.
    pub fn ribbon_isomorphism(&self, other: &RibbonGraph) -> Option<Vec<usize>> {
        if self.num_vertices() != other.num_vertices() || self.num_edges() != other.num_edges() {
            return None;
        }
        if self.num_edges() == 0 {
            return Some(Vec::new());
        }
        other.darts().find_map(|target| {
            self.isomorphism_from(other, target)
                .map(|m| (0..self.num_edges()).map(|e| m[2 * e].edge).collect())
        })
    }

    /// The rotation-preserving isomorphism sending dart `(0, 0)` to `target`,
    /// as a dart map by `Dart::index`.
    pub fn isomorphism_from(&self, other: &RibbonGraph, target: Dart) -> Option<Vec<Dart>> {
        if self.num_vertices() != other.num_vertices() || self.num_edges() != other.num_edges() {
            return None;
        }
        if self.num_edges() == 0 {
            return Some(Vec::new());
        }
        let start = Dart::new(0, 0);
        let mut dart_map: Vec<Option<Dart>> = vec![None; 2 * self.num_edges()];
        let mut vertex_map: Vec<Option<usize>> = vec![None; self.num_vertices()];
        let mut stack = vec![(start, target)];
        while let Some((d, t)) = stack.pop() {
            match dart_map[d.index()] {
                Some(existing) if existing == t => continue,
                Some(_) => return None,
                None => {}
            }
            dart_map[d.index()] = Some(t);
            let (u, ut) = (self.tail(d), other.tail(t));
            match vertex_map[u] {
                Some(x) if x != ut => return None,
                _ => vertex_map[u] = Some(ut),
            }
            if self.degree(u) != other.degree(ut) {
                return None;
            }
            stack.push((d.reversed(), t.reversed()));
            let nd = self
                .dart_from(self.rotation_next(u, d.edge), u)
                .expect("incident");
            let nt = other
                .dart_from(other.rotation_next(ut, t.edge), ut)
                .expect("incident");
            stack.push((nd, nt));
        }
        let mut images: Vec<usize> = vertex_map.iter().map(|x| x.expect("connected")).collect();
        images.sort_unstable();
        images.dedup();
        if images.len() != self.num_vertices() {
            return None;
        }
        Some(dart_map.into_iter().map(|d| d.expect("connected")).collect())
    }
}

/// Darts partitioned into faces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceDecomposition {
    pub faces: Vec<Vec<Dart>>,
    /// Face index of each dart, by `Dart::index`.
    pub face_of: Vec<usize>,
    pub topological_genus: usize,
}

impl FaceDecomposition {
    pub fn is_planar(&self) -> bool {
        self.topological_genus == 0
    }
}

pub fn trace_faces(g: &RibbonGraph) -> FaceDecomposition {
    let nd = 2 * g.num_edges();
    let mut face_of = vec![usize::MAX; nd];
    let mut faces = Vec::new();
    for start in 0..nd {
        if face_of[start] != usize::MAX {
            continue;
        }
        let id = faces.len();
        let mut cycle = Vec::new();
        let mut d = Dart::from_index(start);
        loop {
            face_of[d.index()] = id;
            cycle.push(d);
            d = g.face_successor(d);
            if d.index() == start {
                break;
            }
        }
        faces.push(cycle);
    }
    // A tree with a single vertex has one (empty) face.
    let num_faces = faces.len().max(1);
    let euler = g.num_vertices() as i64 - g.num_edges() as i64 + num_faces as i64;
    debug_assert!(euler <= 2 && euler % 2 == 0);
    FaceDecomposition {
        faces,
        face_of,
        topological_genus: ((2 - euler) / 2) as usize,
    }
}

/// A spanning tree as a sorted list of edge indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanningTree {
    edges: Vec<usize>,
}

impl SpanningTree {
    /// Validates that `edges` form a spanning tree of `g`.
    pub fn new(g: &RibbonGraph, mut edges: Vec<usize>) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        if edges.len() + 1 != g.num_vertices() {
            return Err(Error::NotATree(format!(
                "{} edges for {} vertices",
                edges.len(),
                g.num_vertices()
            )));
        }
        let mut uf = UnionFind::new(g.num_vertices());
        for &e in &edges {
            if e >= g.num_edges() {
                return Err(Error::NotATree(format!("edge index {e} out of range")));
            }
            let [a, b] = g.ends(e);
            if !uf.union(a, b) {
                return Err(Error::NotATree(format!("edge {} closes a cycle", g.edge_name(e))));
            }
        }
        Ok(SpanningTree { edges })
    }

    pub fn from_names(g: &RibbonGraph, names: &[&str]) -> Result<Self> {
        let edges = names.iter().map(|n| g.edge(n)).collect::<Result<Vec<_>>>()?;
        Self::new(g, edges)
    }

    /// Trusted constructor for sets already known to be trees.
    pub(crate) fn from_sorted_unchecked(edges: Vec<usize>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        SpanningTree { edges }
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn mask(&self, num_edges: usize) -> Vec<bool> {
        let mut m = vec![false; num_edges];
        for &e in &self.edges {
            m[e] = true;
        }
        m
    }

    /// Edges not in the tree, in file order.
    pub fn complement(&self, num_edges: usize) -> Vec<usize> {
        (0..num_edges).filter(|&e| !self.contains(e)).collect()
    }

    pub fn names<'g>(&self, g: &'g RibbonGraph) -> Vec<&'g str> {
        self.edges.iter().map(|&e| g.edge_name(e)).collect()
    }
}

/// All spanning trees, lexicographic in sorted edge-index tuples.
pub fn spanning_trees(g: &RibbonGraph) -> Vec<SpanningTree> {
    spanning_trees_within(g, &vec![true; g.num_edges()])
}

/// Spanning trees of the subgraph formed by edges with `alive[e]`.
pub fn spanning_trees_within(g: &RibbonGraph, alive: &[bool]) -> Vec<SpanningTree> {
    let mut out = Vec::new();
    visit_spanning_trees_within(g, alive, &mut |t| {
        out.push(SpanningTree::from_sorted_unchecked(t.to_vec()));
        true
    });
    out
}

/// Backtracking enumeration in file order. The visitor returns `false` to
/// stop early; the function returns `false` if it was stopped.
pub fn visit_spanning_trees_within(
    g: &RibbonGraph,
    alive: &[bool],
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    let candidates: Vec<usize> = (0..g.num_edges()).filter(|&e| alive[e]).collect();
    let need = g.num_vertices() - 1;
    if !g.is_connected_within(alive) {
        return true;
    }
    let mut chosen = Vec::with_capacity(need);
    let mut uf = UnionFind::new(g.num_vertices());
    backtrack(g, &candidates, 0, need, &mut chosen, &mut uf, visit)
}

fn backtrack(
    g: &RibbonGraph,
    candidates: &[usize],
    at: usize,
    need: usize,
    chosen: &mut Vec<usize>,
    uf: &mut UnionFind,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if chosen.len() == need {
        return visit(chosen);
    }
    if at == candidates.len() || candidates.len() - at < need - chosen.len() {
        return true;
    }
    let e = candidates[at];
    let [a, b] = g.ends(e);
    if uf.find(a) != uf.find(b) {
        let saved = uf.clone();
        uf.union(a, b);
        chosen.push(e);
        let go_on = backtrack(g, candidates, at + 1, need, chosen, uf, visit);
        chosen.pop();
        *uf = saved;
        if !go_on {
            return false;
        }
    }
    // Skipping `e` is only useful if the remaining edges can still connect
    // everything.
    if completable(g, candidates, at + 1, uf) {
        return backtrack(g, candidates, at + 1, need, chosen, uf, visit);
    }
    true
}

fn completable(g: &RibbonGraph, candidates: &[usize], from: usize, uf: &UnionFind) -> bool {
    let mut probe = uf.clone();
    let mut comps = probe.components();
    for &e in &candidates[from..] {
        let [a, b] = g.ends(e);
        if probe.union(a, b) {
            comps -= 1;
        }
    }
    comps == 1
}

/// The unique cycle in `T + e`, starting with the dart `start` of `e`.
pub fn fundamental_cycle(g: &RibbonGraph, t: &SpanningTree, start: Dart) -> Result<Vec<Dart>> {
    if t.contains(start.edge) {
        return Err(Error::EdgeInTree(g.edge_name(start.edge).to_string()));
    }
    let mut cycle = vec![start];
    cycle.extend(tree_path(g, t, g.head(start), g.tail(start)));
    Ok(cycle)
}

/// Path between two vertices inside a spanning tree, as darts.
pub fn tree_path(g: &RibbonGraph, t: &SpanningTree, from: usize, to: usize) -> Vec<Dart> {
    let mask = t.mask(g.num_edges());
    let mut parent: Vec<Option<Dart>> = vec![None; g.num_vertices()];
    let mut seen = vec![false; g.num_vertices()];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(u) = stack.pop() {
        for &e in g.rotation(u) {
            if !mask[e] {
                continue;
            }
            let w = g.opposite(e, u);
            if !seen[w] {
                seen[w] = true;
                parent[w] = g.dart_from(e, u);
                stack.push(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = to;
    while cur != from {
        let d = parent[cur].expect("spanning tree reaches every vertex");
        path.push(d);
        cur = g.tail(d);
    }
    path.reverse();
    path
}

#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    count: usize,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            count: n,
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if the two classes were distinct.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        self.count -= 1;
        true
    }

    pub(crate) fn components(&self) -> usize {
        self.count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn theta(planar: bool) -> RibbonGraph {
        let v_rot: &[&str] = if planar { &["r", "q", "p"] } else { &["p", "q", "r"] };
        RibbonGraph::from_parts(
            vec!["u".into(), "v".into()],
            vec![
                ("p".into(), ["u".into(), "v".into()]),
                ("q".into(), ["u".into(), "v".into()]),
                ("r".into(), ["u".into(), "v".into()]),
            ],
            vec![
                vec!["p".into(), "q".into(), "r".into()],
                v_rot.iter().map(|s| s.to_string()).collect(),
            ],
        )
        .unwrap()
    }

    fn k3() -> RibbonGraph {
        RibbonGraph::with_file_order_rotation(
            &["1", "2", "3"],
            &[("a", "1", "2"), ("b", "2", "3"), ("c", "3", "1")],
        )
        .unwrap()
    }

    #[test]
    fn parse_single_edge() {
        let g = RibbonGraph::parse(
            r#"{"vertices":["u","v"],"edges":[{"id":"e1","ends":["u","v"]}],
                "rotation":{"u":["e1"],"v":["e1"]}}"#,
        )
        .unwrap();
        assert_eq!((g.num_vertices(), g.num_edges(), g.genus()), (2, 1, 0));
    }

    #[test]
    fn parse_rejects_loop() {
        let err = RibbonGraph::parse(
            r#"{"vertices":["u"],"edges":[{"id":"l","ends":["u","u"]}],"rotation":{"u":["l"]}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation { kind: ValidationKind::Loop, .. }));
    }

    #[test]
    fn parse_rejects_disconnected_and_mismatch_and_duplicates() {
        let disc = RibbonGraph::parse(
            r#"{"vertices":["u","v"],"edges":[],"rotation":{"u":[],"v":[]}}"#,
        )
        .unwrap_err();
        assert!(matches!(disc, Error::Validation { kind: ValidationKind::Disconnected, .. }));

        let mismatch = RibbonGraph::parse(
            r#"{"vertices":["u","v"],"edges":[{"id":"e","ends":["u","v"]}],
                "rotation":{"u":["e"],"v":[]}}"#,
        )
        .unwrap_err();
        assert!(matches!(
            mismatch,
            Error::Validation { kind: ValidationKind::RotationMismatch, .. }
        ));

        let dup = RibbonGraph::parse(
            r#"{"vertices":["u","u"],"edges":[],"rotation":{"u":[]}}"#,
        )
        .unwrap_err();
        assert!(matches!(dup, Error::Validation { kind: ValidationKind::DuplicateId, .. }));

        let repeated = RibbonGraph::parse(
            r#"{"vertices":["u","v"],"edges":[{"id":"e","ends":["u","v"]}],
                "rotation":{"u":["e","e"],"v":["e"]}}"#,
        )
        .unwrap_err();
        assert!(matches!(
            repeated,
            Error::Validation { kind: ValidationKind::RotationMismatch, .. }
        ));

        assert!(matches!(RibbonGraph::parse("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn theta_genus_and_faces() {
        let planar = theta(true);
        assert_eq!(planar.genus(), 2);
        let f = trace_faces(&planar);
        assert_eq!((f.faces.len(), f.topological_genus), (3, 0));

        let torus = theta(false);
        let f = trace_faces(&torus);
        assert_eq!((f.faces.len(), f.topological_genus), (1, 1));
    }

    #[test]
    fn single_edge_has_one_face_of_length_two() {
        let g = RibbonGraph::with_file_order_rotation(&["u", "v"], &[("e1", "u", "v")]).unwrap();
        let f = trace_faces(&g);
        assert_eq!(f.faces.len(), 1);
        assert_eq!(f.faces[0].len(), 2);
        assert!(f.is_planar());
    }

    #[test]
    fn tree_counts() {
        let single =
            RibbonGraph::with_file_order_rotation(&["u", "v"], &[("e1", "u", "v")]).unwrap();
        assert_eq!(spanning_trees(&single).len(), 1);
        assert_eq!(spanning_trees(&k3()).len(), 3);
        let g = theta(true);
        let names: Vec<Vec<&str>> = spanning_trees(&g).iter().map(|t| t.names(&g)).collect();
        assert_eq!(names, vec![vec!["p"], vec!["q"], vec!["r"]]);
    }

    #[test]
    fn trees_are_lexicographic() {
        let g = k3();
        let ts = spanning_trees(&g);
        let edges: Vec<Vec<usize>> = ts.iter().map(|t| t.edges().to_vec()).collect();
        assert_eq!(edges, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn fundamental_cycles() {
        let g = k3();
        let t = SpanningTree::from_names(&g, &["a", "b"]).unwrap();
        let c = g.edge("c").unwrap();
        let cyc = fundamental_cycle(&g, &t, Dart::new(c, 0)).unwrap();
        assert_eq!(cyc.len(), 3);
        assert_eq!(cyc[0].edge, c);
        for w in cyc.windows(2) {
            assert_eq!(g.head(w[0]), g.tail(w[1]));
        }
        assert_eq!(g.head(*cyc.last().unwrap()), g.tail(cyc[0]));

        let a = g.edge("a").unwrap();
        assert!(matches!(
            fundamental_cycle(&g, &t, Dart::new(a, 0)),
            Err(Error::EdgeInTree(_))
        ));

        let th = theta(true);
        let t = SpanningTree::from_names(&th, &["p"]).unwrap();
        let cyc = fundamental_cycle(&th, &t, Dart::new(th.edge("q").unwrap(), 0)).unwrap();
        let edges: Vec<&str> = cyc.iter().map(|d| th.edge_name(d.edge)).collect();
        assert_eq!(edges, vec!["q", "p"]);
    }

    #[test]
    fn spanning_tree_validation() {
        let g = k3();
        assert!(SpanningTree::from_names(&g, &["a"]).is_err());
        assert!(SpanningTree::from_names(&g, &["a", "b"]).is_ok());
        let th = theta(true);
        assert!(SpanningTree::from_names(&th, &["p", "q"]).is_err());
    }

    #[test]
    fn round_trip_json() {
        let g = theta(true);
        let back = RibbonGraph::parse(&g.to_json()).unwrap();
        assert_eq!(back.rotations(), g.rotations());
        assert_eq!(back.vertex_names(), g.vertex_names());
    }

    #[test]
    fn isomorphism_detects_mirror() {
        let planar = theta(true);
        let torus = theta(false);
        assert!(planar.ribbon_isomorphism(&planar).is_some());
        assert!(planar.ribbon_isomorphism(&torus).is_none());
    }
}
