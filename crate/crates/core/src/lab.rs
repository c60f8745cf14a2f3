//! Theorem suite, torsor comparison and the rotation-system search.
//!
//! Every check produces one [`Record`]. Failing records carry a witness with
//! enough data (vertex, class, tree) to replay the failure through a single
//! CLI command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bernardi::{
    alpha_left_with, alpha_right_with, shift_difference_check, BernardiMap,
    BernardiTorsor, TreeIndex,
};
use crate::break_divisor::{
    enumerate_break_divisors, BreakClassTable, BreakDivisorOracle, ExactMatchingOracle, SubsetOracle,
};
use crate::corpus::RotationSystems;
use crate::divisor::{
    is_q_reduced, kirchhoff_count, laplacian_of, q_reduce, Divisor, DivisorClass, PicardGroup,
};
use crate::duality::{dual_graph_with, dual_tree, psi_class, psi_class_with, DualConvention, TreePaths};
use crate::error::{Error, Result};
use crate::graph::{fundamental_cycle, trace_faces, Dart, RibbonGraph, SpanningTree};
use crate::rotor::{
    cycle_is_reversible_with, directed_cycles, rotor_act, rotor_act_divisor, rotor_move, unicycle_for_cycle,
    unicycle_orbit, RotorTorsor, UnicycleConstruction,
};

/// Trees, Picard group and break divisors of one graph.
#[derive(Debug, Clone)]
pub struct Tables {
    pub trees: TreeIndex,
    pub pic: PicardGroup,
    pub breaks: BreakClassTable,
}

impl Tables {
    pub fn new(g: &RibbonGraph) -> Result<Self> {
        Ok(Tables {
            trees: TreeIndex::new(g),
            pic: PicardGroup::new(g),
            breaks: BreakClassTable::new(g)?,
        })
    }
}

/// `β_v` for every generator `[(u) - (q)]` and every tree: `table[i][t]`.
pub type ActionTable = Vec<Vec<usize>>;

pub fn bernardi_torsor(g: &RibbonGraph, tables: &Tables, v: usize) -> Result<Option<BernardiTorsor>> {
    match g.rotation(v).first() {
        Some(&e) => BernardiTorsor::new(g, &tables.trees.trees, v, e).map(Some),
        None => Ok(None),
    }
}

pub fn bernardi_table(g: &RibbonGraph, tables: &Tables, v: usize) -> Result<ActionTable> {
    let torsor = bernardi_torsor(g, tables, v)?;
    action_table(g, tables, torsor.as_ref())
}

/// The action table of `β_(v,e)` for an explicit initial edge.
pub fn bernardi_table_with_edge(g: &RibbonGraph, tables: &Tables, v: usize, e: usize) -> Result<ActionTable> {
    let torsor = BernardiTorsor::new(g, &tables.trees.trees, v, e)?;
    action_table(g, tables, Some(&torsor))
}

fn action_table(g: &RibbonGraph, tables: &Tables, torsor: Option<&BernardiTorsor>) -> Result<ActionTable> {
    tables
        .pic
        .generators()
        .iter()
        .map(|gamma| {
            (0..tables.trees.len())
                .map(|t| match torsor {
                    Some(b) => b.act(g, &tables.breaks, gamma, t),
                    None => Ok(t),
                })
                .collect()
        })
        .collect()
}

pub fn rotor_table(g: &RibbonGraph, tables: &Tables, v: usize) -> Result<ActionTable> {
    let torsor = RotorTorsor::new(g, &tables.trees, v)?;
    Ok(tables
        .pic
        .generators()
        .iter()
        .map(|gamma| (0..tables.trees.len()).map(|t| torsor.act(gamma, t)).collect())
        .collect())
}

/// Where two actions disagree: generator `[(u) - (q)]` at tree `tree`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionWitness {
    pub generator: usize,
    pub tree: usize,
    pub left: usize,
    pub right: usize,
}

impl ActionWitness {
    pub fn to_json(&self, g: &RibbonGraph, tables: &Tables) -> Value {
        let trees = &tables.trees.trees;
        json!({
            "class": div_json(g, tables.pic.generators()[self.generator].reduced()),
            "tree": trees[self.tree].names(g),
            "left": trees[self.left].names(g),
            "right": trees[self.right].names(g),
        })
    }
}

pub fn first_difference(a: &ActionTable, b: &ActionTable) -> Option<ActionWitness> {
    for (i, (ra, rb)) in a.iter().zip(b).enumerate() {
        for (t, (&x, &y)) in ra.iter().zip(rb).enumerate() {
            if x != y {
                return Some(ActionWitness {
                    generator: i,
                    tree: t,
                    left: x,
                    right: y,
                });
            }
        }
    }
    None
}

/// `None` when `β_v = β_v'`, otherwise a generator and tree where they differ.
pub fn compare_bernardi_vertices(g: &RibbonGraph, v: usize, w: usize) -> Result<Option<Value>> {
    let tables = Tables::new(g)?;
    let a = bernardi_table(g, &tables, v)?;
    let b = bernardi_table(g, &tables, w)?;
    Ok(first_difference(&a, &b).map(|x| x.to_json(g, &tables)))
}

/// `None` when `β_v = r_v`, otherwise a witness.
pub fn compare_torsors(g: &RibbonGraph, v: usize) -> Result<Option<Value>> {
    let tables = Tables::new(g)?;
    let a = bernardi_table(g, &tables, v)?;
    let b = rotor_table(g, &tables, v)?;
    Ok(first_difference(&a, &b).map(|x| x.to_json(g, &tables)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub check: String,
    pub graph: String,
    pub params: Value,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Record {
    fn new(check: &str, graph: &str, params: Value, pass: bool, witness: Option<Value>) -> Self {
        Record {
            check: check.to_string(),
            graph: graph.to_string(),
            params,
            pass,
            witness,
        }
    }

    fn error(check: &str, graph: &str, params: Value, e: &Error) -> Self {
        Record::new(check, graph, params, false, Some(json!({ "error": e.to_string() })))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SuiteReport {
    pub records: Vec<Record>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.records.iter().filter(|r| r.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.records.len() - self.passed()
    }

    pub fn all_pass(&self) -> bool {
        self.failed() == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// One JSON record per line, then a summary line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        let summary = json!({
            "summary": { "total": self.records.len(), "passed": self.passed(), "failed": self.failed() }
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Counting,
    Faces,
    FundamentalCycles,
    QReduce,
    BreakOracles,
    Bijectivity,
    EdgeIndependence,
    ShiftIdentity,
    VertexIndependence,
    TorsorAgreement,
    TorsorAxioms,
    RotorMoves,
    RotorRepresentatives,
    Unicycles,
    Duality,
}

impl Check {
    pub const ALL: [Check; 15] = [
        Check::Counting,
        Check::Faces,
        Check::FundamentalCycles,
        Check::QReduce,
        Check::BreakOracles,
        Check::Bijectivity,
        Check::EdgeIndependence,
        Check::ShiftIdentity,
        Check::VertexIndependence,
        Check::TorsorAgreement,
        Check::TorsorAxioms,
        Check::RotorMoves,
        Check::RotorRepresentatives,
        Check::Unicycles,
        Check::Duality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Counting => "counting",
            Check::Faces => "faces",
            Check::FundamentalCycles => "fundamental-cycles",
            Check::QReduce => "q-reduce",
            Check::BreakOracles => "break-oracles",
            Check::Bijectivity => "bijectivity",
            Check::EdgeIndependence => "edge-independence",
            Check::ShiftIdentity => "shift-identity",
            Check::VertexIndependence => "vertex-independence",
            Check::TorsorAgreement => "torsor-agreement",
            Check::TorsorAxioms => "torsor-axioms",
            Check::RotorMoves => "rotor-moves",
            Check::RotorRepresentatives => "rotor-representatives",
            Check::Unicycles => "unicycles",
            Check::Duality => "duality",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub checks: Vec<Check>,
    /// Build duals with the mirrored convention (debugging aid).
    pub mirrored_dual: bool,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            checks: Check::ALL.to_vec(),
            mirrored_dual: false,
            seed: crate::corpus::DEFAULT_SEED,
        }
    }
}

/// Runs the selected checks on every graph, in parallel, merging results in
/// corpus order.
pub fn run_theorem_suite(corpus: &[(String, RibbonGraph)], options: &SuiteOptions) -> SuiteReport {
    let records = corpus
        .par_iter()
        .flat_map_iter(|(name, g)| run_graph(name, g, options))
        .collect();
    SuiteReport { records }
}

pub fn run_graph(name: &str, g: &RibbonGraph, options: &SuiteOptions) -> Vec<Record> {
    let tables = match Tables::new(g) {
        Ok(t) => t,
        Err(e) => return vec![Record::error("tables", name, json!({}), &e)],
    };
    let cx = Context {
        name,
        g,
        tables: &tables,
        options,
    };
    options
        .checks
        .par_iter()
        .flat_map_iter(|&c| cx.run(c))
        .collect()
}

struct Context<'a> {
    name: &'a str,
    g: &'a RibbonGraph,
    tables: &'a Tables,
    options: &'a SuiteOptions,
}

fn oracle_for(g: &RibbonGraph) -> &'static dyn BreakDivisorOracle {
    if g.num_vertices() <= 20 {
        &SubsetOracle
    } else {
        &ExactMatchingOracle
    }
}

impl Context<'_> {
    fn run(&self, check: Check) -> Vec<Record> {
        match check {
            Check::Counting => vec![self.counting()],
            Check::Faces => vec![self.faces()],
            Check::FundamentalCycles => vec![self.fundamental_cycles()],
            Check::QReduce => vec![self.q_reduce()],
            Check::BreakOracles => vec![self.break_oracles()],
            Check::Bijectivity => self.bijectivity(),
            Check::EdgeIndependence => self.edge_independence(),
            Check::ShiftIdentity => self.shift_identity(),
            Check::VertexIndependence => vec![self.vertex_independence()],
            Check::TorsorAgreement => self.torsor_agreement(),
            Check::TorsorAxioms => self.torsor_axioms(),
            Check::RotorMoves => vec![self.rotor_moves()],
            Check::RotorRepresentatives => vec![self.rotor_representatives()],
            Check::Unicycles => vec![self.unicycles()],
            Check::Duality => self.duality(),
        }
    }

    fn record(&self, check: Check, params: Value, pass: bool, witness: Option<Value>) -> Record {
        Record::new(check.name(), self.name, params, pass, witness)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.options.seed ^ salt)
    }

    fn vertex(&self, v: usize) -> &str {
        self.g.vertex_name(v)
    }

    fn counting(&self) -> Record {
        let g = self.g;
        let trees = self.tables.trees.len();
        let breaks = enumerate_break_divisors(g).len();
        let picard = self.tables.pic.order();
        let kirchhoff = kirchhoff_count(g);
        let pass = trees == breaks && breaks == picard && kirchhoff == picard as i128 && self.tables.breaks.len() == breaks;
        let data = json!({ "trees": trees, "breaks": breaks, "picard": picard, "kirchhoff": kirchhoff.to_string() });
        self.record(Check::Counting, data.clone(), pass, (!pass).then_some(data))
    }

    fn faces(&self) -> Record {
        let g = self.g;
        let faces = trace_faces(g);
        for d in g.darts() {
            let len = faces.faces[faces.face_of[d.index()]].len();
            let mut x = d;
            for _ in 0..len {
                x = g.face_successor(x);
            }
            if x != d {
                return self.record(Check::Faces, json!({}), false, Some(json!({ "dart": dart_json(g, d) })));
            }
        }
        let euler = g.num_vertices() as i64 - g.num_edges() as i64 + faces.faces.len() as i64;
        let pass = euler % 2 == 0 && euler <= 2 && euler == 2 - 2 * faces.topological_genus as i64;
        self.record(
            Check::Faces,
            json!({ "faces": faces.faces.len(), "genus": faces.topological_genus }),
            pass,
            (!pass).then(|| json!({ "euler": euler })),
        )
    }

    fn fundamental_cycles(&self) -> Record {
        let g = self.g;
        for t in &self.tables.trees.trees {
            for e in t.complement(g.num_edges()) {
                let bad = match fundamental_cycle(g, t, Dart::new(e, 0)) {
                    Ok(c) => {
                        !c.iter().any(|d| d.edge == e)
                            || c.iter().any(|d| d.edge != e && !t.contains(d.edge))
                            || c.first().map(|d| g.tail(*d)) != c.last().map(|d| g.head(*d))
                    }
                    Err(_) => true,
                };
                if bad {
                    return self.record(
                        Check::FundamentalCycles,
                        json!({}),
                        false,
                        Some(json!({ "tree": t.names(g), "edge": g.edge_name(e) })),
                    );
                }
            }
        }
        self.record(Check::FundamentalCycles, json!({}), true, None)
    }

    /// Idempotence, the reduced-form property and independence of the
    /// representative, on random divisors and random principal shifts.
    fn q_reduce(&self) -> Record {
        let g = self.g;
        let n = g.num_vertices();
        let mut rng = self.rng(1);
        for _ in 0..40 {
            let d = Divisor::from_vec((0..n).map(|_| rng.gen_range(-4..=4)).collect());
            let f: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
            let shifted = &d + &laplacian_of(g, &f).expect("f covers every vertex");
            for q in 0..n {
                let r = q_reduce(g, &d, q);
                let ok = is_q_reduced(g, &r, q)
                    && q_reduce(g, &r, q) == r
                    && q_reduce(g, &shifted, q) == r
                    && r.degree() == d.degree();
                if !ok {
                    return self.record(
                        Check::QReduce,
                        json!({}),
                        false,
                        Some(json!({ "divisor": div_json(g, &d), "q": self.vertex(q), "f": f })),
                    );
                }
            }
        }
        self.record(Check::QReduce, json!({ "samples": 40 }), true, None)
    }

    /// The two break-divisor deciders agree on every effective divisor of
    /// degree `g` (on graphs small enough to list them).
    fn break_oracles(&self) -> Record {
        let g = self.g;
        let n = g.num_vertices();
        let alive = vec![true; g.num_edges()];
        let mut count = 0usize;
        let mut witness = None;
        for_each_effective(n, g.genus() as i64, &mut |d| {
            count += 1;
            let a = SubsetOracle.is_break_divisor_within(g, &alive, d);
            let b = ExactMatchingOracle.is_break_divisor_within(g, &alive, d);
            let c = self.tables.breaks.representative(&DivisorClass::of(g, d)) == Some(d);
            if a != b || b != c {
                witness = Some(json!({ "divisor": div_json(g, d), "subset": a, "matching": b, "table": c }));
                return false;
            }
            count < 5000
        });
        let pass = witness.is_none();
        self.record(Check::BreakOracles, json!({ "divisors": count }), pass, witness)
    }

    fn bijectivity(&self) -> Vec<Record> {
        let g = self.g;
        let trees = &self.tables.trees.trees;
        let breaks: Vec<Divisor> = enumerate_break_divisors(g).into_iter().map(|b| b.divisor).collect();
        let oracle = oracle_for(g);
        let mut out = Vec::new();
        for v in 0..g.num_vertices() {
            for &e in g.rotation(v) {
                let params = json!({ "vertex": self.vertex(v), "edge": g.edge_name(e) });
                let map = match BernardiMap::new(g, trees, v, e) {
                    Ok(m) => m,
                    Err(err) => {
                        out.push(Record::error(Check::Bijectivity.name(), self.name, params, &err));
                        continue;
                    }
                };
                let mut witness = None;
                if !map.is_injective() || map.images.iter().any(|d| breaks.binary_search(d).is_err()) {
                    witness = Some(json!({ "reason": "beta is not a bijection onto break divisors" }));
                }
                for b in &breaks {
                    if witness.is_some() {
                        break;
                    }
                    let right = alpha_right_with(g, v, e, b, oracle);
                    let left = alpha_left_with(g, v, e, b, oracle);
                    let ok = match (&right, &left) {
                        (Ok(r), Ok(l)) => {
                            r == l && map.preimage(b).map(|i| &trees[i]) == Some(r)
                        }
                        _ => false,
                    };
                    if !ok {
                        let show = |x: &Result<SpanningTree>| match x {
                            Ok(t) => json!(t.names(g)),
                            Err(e) => json!(e.to_string()),
                        };
                        witness = Some(json!({
                            "divisor": div_json(g, b),
                            "alpha-r": show(&right),
                            "alpha-l": show(&left),
                        }));
                    }
                }
                let pass = witness.is_none();
                out.push(self.record(Check::Bijectivity, params, pass, witness));
            }
        }
        out
    }

    /// The action of `β_(v,e)` is the same for every `e` at `v`.
    fn edge_independence(&self) -> Vec<Record> {
        let g = self.g;
        let mut out = Vec::new();
        for v in 0..g.num_vertices() {
            let params = json!({ "vertex": self.vertex(v) });
            let tables: Result<Vec<ActionTable>> = g
                .rotation(v)
                .iter()
                .map(|&e| bernardi_table_with_edge(g, self.tables, v, e))
                .collect();
            let tables = match tables {
                Ok(t) => t,
                Err(err) => {
                    out.push(Record::error(Check::EdgeIndependence.name(), self.name, params, &err));
                    continue;
                }
            };
            let mut witness = None;
            for (k, table) in tables.iter().enumerate().skip(1) {
                if let Some(x) = first_difference(&tables[0], table) {
                    let mut w = x.to_json(g, self.tables);
                    w["edges"] = json!([g.edge_name(g.rotation(v)[0]), g.edge_name(g.rotation(v)[k])]);
                    witness = Some(w);
                    break;
                }
            }
            let pass = witness.is_none();
            out.push(self.record(Check::EdgeIndependence, params, pass, witness));
        }
        out
    }

    fn shift_identity(&self) -> Vec<Record> {
        let g = self.g;
        let mut out = Vec::new();
        for v in 0..g.num_vertices() {
            for &e1 in g.rotation(v) {
                for &e2 in g.rotation(v) {
                    let params = json!({ "vertex": self.vertex(v), "e1": g.edge_name(e1), "e2": g.edge_name(e2) });
                    let mut witness = None;
                    for t in &self.tables.trees.trees {
                        match shift_difference_check(g, v, e1, e2, t) {
                            Ok(c) if c.equal => {}
                            Ok(c) => {
                                witness = Some(json!({
                                    "tree": t.names(g),
                                    "lhs": div_json(g, &c.lhs),
                                    "rhs": div_json(g, &c.rhs),
                                }));
                                break;
                            }
                            Err(e) => {
                                witness = Some(json!({ "tree": t.names(g), "error": e.to_string() }));
                                break;
                            }
                        }
                    }
                    let pass = witness.is_none();
                    out.push(self.record(Check::ShiftIdentity, params, pass, witness));
                }
            }
        }
        out
    }

    /// Planar: `β_v` is the same at every vertex. Otherwise some pair of
    /// vertices must differ, and the witness is recorded either way.
    fn vertex_independence(&self) -> Record {
        let g = self.g;
        let genus = trace_faces(g).topological_genus;
        let tables: Result<Vec<ActionTable>> =
            (0..g.num_vertices()).map(|v| bernardi_table(g, self.tables, v)).collect();
        let tables = match tables {
            Ok(t) => t,
            Err(e) => return Record::error(Check::VertexIndependence.name(), self.name, json!({}), &e),
        };
        let mut found = None;
        'outer: for v in 0..tables.len() {
            for w in v + 1..tables.len() {
                if let Some(x) = first_difference(&tables[v], &tables[w]) {
                    let mut wit = x.to_json(g, self.tables);
                    wit["vertex"] = json!(self.vertex(v));
                    wit["other"] = json!(self.vertex(w));
                    found = Some(wit);
                    break 'outer;
                }
            }
        }
        let pass = (genus == 0) == found.is_none();
        self.record(Check::VertexIndependence, json!({ "genus": genus }), pass, found)
    }

    /// Planar: `β_v = r_v` at every vertex. Non-planar graphs are recorded
    /// as data only.
    fn torsor_agreement(&self) -> Vec<Record> {
        let g = self.g;
        let genus = trace_faces(g).topological_genus;
        (0..g.num_vertices())
            .map(|v| {
                let params = json!({ "vertex": self.vertex(v), "genus": genus });
                let diff = bernardi_table(g, self.tables, v)
                    .and_then(|a| rotor_table(g, self.tables, v).map(|b| first_difference(&a, &b)));
                match diff {
                    Err(e) => Record::error(Check::TorsorAgreement.name(), self.name, params, &e),
                    Ok(d) => {
                        let mut params = params;
                        params["agree"] = json!(d.is_none());
                        let witness = d.map(|x| {
                            let mut w = x.to_json(g, self.tables);
                            w["vertex"] = json!(self.vertex(v));
                            w
                        });
                        let pass = genus > 0 || witness.is_none();
                        self.record(Check::TorsorAgreement, params, pass, witness)
                    }
                }
            })
            .collect()
    }

    /// Identity, compatibility with the group law and simple transitivity,
    /// for `β_v` and `r_v` at every vertex.
    fn torsor_axioms(&self) -> Vec<Record> {
        let g = self.g;
        let mut out = Vec::new();
        for v in 0..g.num_vertices() {
            let bernardi = match bernardi_torsor(g, self.tables, v) {
                Ok(b) => b,
                Err(e) => {
                    out.push(Record::error(Check::TorsorAxioms.name(), self.name, json!({}), &e));
                    continue;
                }
            };
            let rotor = match RotorTorsor::new(g, &self.tables.trees, v) {
                Ok(r) => r,
                Err(e) => {
                    out.push(Record::error(Check::TorsorAxioms.name(), self.name, json!({}), &e));
                    continue;
                }
            };
            let act_b = |gamma: &DivisorClass, t: usize| -> Result<usize> {
                match &bernardi {
                    Some(b) => b.act(g, &self.tables.breaks, gamma, t),
                    None => Ok(t),
                }
            };
            let act_r = |gamma: &DivisorClass, t: usize| -> Result<usize> { Ok(rotor.act(gamma, t)) };
            for (label, act) in [
                ("bernardi", &act_b as &dyn Fn(&DivisorClass, usize) -> Result<usize>),
                ("rotor", &act_r),
            ] {
                let params = json!({ "action": label, "vertex": self.vertex(v) });
                let witness = self.axiom_witness(act).unwrap_or_else(|e| Some(json!({ "error": e.to_string() })));
                let pass = witness.is_none();
                out.push(self.record(Check::TorsorAxioms, params, pass, witness));
            }
        }
        out
    }

    fn axiom_witness(&self, act: &dyn Fn(&DivisorClass, usize) -> Result<usize>) -> Result<Option<Value>> {
        let g = self.g;
        let pic = &self.tables.pic;
        let trees = &self.tables.trees.trees;
        let zero = DivisorClass::zero(g);
        for t in 0..trees.len() {
            if act(&zero, t)? != t {
                return Ok(Some(json!({ "axiom": "identity", "tree": trees[t].names(g) })));
            }
            // Orbit of t is all of S(G), each tree hit once.
            let mut hit = vec![false; trees.len()];
            for gamma in pic.elements() {
                let s = act(gamma, t)?;
                if hit[s] {
                    return Ok(Some(json!({
                        "axiom": "simple-transitivity",
                        "tree": trees[t].names(g),
                        "class": div_json(g, gamma.reduced()),
                    })));
                }
                hit[s] = true;
            }
        }
        // (a + b) T = a (b T) for a a generator, b arbitrary.
        for a in pic.generators() {
            for b in pic.elements() {
                let ab = a.add(g, b);
                for t in 0..trees.len() {
                    if act(&ab, t)? != act(a, act(b, t)?)? {
                        return Ok(Some(json!({
                            "axiom": "additivity",
                            "tree": trees[t].names(g),
                            "a": div_json(g, a.reduced()),
                            "b": div_json(g, b.reduced()),
                        })));
                    }
                }
            }
        }
        Ok(None)
    }

    /// `((x) - (y))_y (T)` is a spanning tree for all `x, y, T`, and `x = y`
    /// does nothing.
    fn rotor_moves(&self) -> Record {
        let g = self.g;
        for t in &self.tables.trees.trees {
            for y in 0..g.num_vertices() {
                for x in 0..g.num_vertices() {
                    let out = std::panic::catch_unwind(|| rotor_move(g, t, x, y));
                    let ok = match &out {
                        Ok(s) => self.tables.trees.index_of(s).is_some() && (x != y || s == t),
                        Err(_) => false,
                    };
                    if !ok {
                        return self.record(
                            Check::RotorMoves,
                            json!({}),
                            false,
                            Some(json!({ "tree": t.names(g), "from": self.vertex(x), "root": self.vertex(y) })),
                        );
                    }
                }
            }
        }
        self.record(Check::RotorMoves, json!({}), true, None)
    }

    fn rotor_representatives(&self) -> Record {
        let g = self.g;
        let n = g.num_vertices();
        let pic = &self.tables.pic;
        let trees = &self.tables.trees.trees;
        let mut rng = self.rng(2);
        for _ in 0..12 {
            let gamma = &pic.elements()[rng.gen_range(0..pic.order())];
            let t = &trees[rng.gen_range(0..trees.len())];
            let v = rng.gen_range(0..n);
            let f: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
            let other = gamma.reduced() + &laplacian_of(g, &f).expect("f covers every vertex");
            let a = rotor_act(g, v, gamma, t);
            let b = rotor_act_divisor(g, v, &other, t);
            if a.is_err() || a != b {
                return self.record(
                    Check::RotorRepresentatives,
                    json!({}),
                    false,
                    Some(json!({
                        "vertex": self.vertex(v),
                        "class": div_json(g, gamma.reduced()),
                        "other": div_json(g, &other),
                        "tree": t.names(g),
                    })),
                );
            }
        }
        self.record(Check::RotorRepresentatives, json!({ "samples": 12 }), true, None)
    }

    /// Orbit period `2|E|` with every dart used once, agreement of the two
    /// unicycle constructions, and: every cycle reversible iff planar.
    fn unicycles(&self) -> Record {
        let g = self.g;
        let genus = trace_faces(g).topological_genus;
        let cycles = directed_cycles(g);
        let mut irreversible = None;
        for c in &cycles {
            let cycle_json = json!(c.iter().map(|d| g.edge_name(d.edge)).collect::<Vec<_>>());
            let start = json!(self.vertex(g.tail(c[0])));
            let fail = |why: &str| {
                self.record(
                    Check::Unicycles,
                    json!({ "genus": genus }),
                    false,
                    Some(json!({ "reason": why, "start": start, "cycle": cycle_json })),
                )
            };
            let state = match unicycle_for_cycle(g, c, UnicycleConstruction::BreadthFirst) {
                Ok(s) => s,
                Err(_) => return fail("not a cycle"),
            };
            let orbit = unicycle_orbit(g, &state);
            if orbit.period != 2 * g.num_edges() || orbit.dart_uses.iter().any(|&k| k != 1) {
                return fail("period");
            }
            let a = cycle_is_reversible_with(g, c, UnicycleConstruction::BreadthFirst);
            let b = cycle_is_reversible_with(g, c, UnicycleConstruction::ReverseBreadthFirst);
            match (a, b) {
                (Ok(a), Ok(b)) if a == b => {
                    if !a && irreversible.is_none() {
                        irreversible = Some(json!({ "start": start, "cycle": cycle_json }));
                    }
                }
                _ => return fail("constructions disagree"),
            }
        }
        let pass = (genus == 0) == irreversible.is_none();
        self.record(
            Check::Unicycles,
            json!({ "genus": genus, "cycles": cycles.len() }),
            pass,
            irreversible,
        )
    }

    fn duality(&self) -> Vec<Record> {
        let g = self.g;
        if !trace_faces(g).is_planar() || !g.bridges().is_empty() {
            return Vec::new();
        }
        let convention = if self.options.mirrored_dual {
            DualConvention::Mirrored
        } else {
            DualConvention::Standard
        };
        let mut out = Vec::new();
        let corr = match dual_graph_with(g, convention) {
            Ok(c) => c,
            Err(e) => return vec![Record::error(Check::Duality.name(), self.name, json!({}), &e)],
        };
        let dual = &corr.dual;
        let faces = trace_faces(g).faces.len();
        let shape = dual.num_vertices() == faces
            && dual.num_edges() == g.num_edges()
            && trace_faces(dual).is_planar()
            && dual.bridges().is_empty();
        let double = dual_graph_with(dual, convention).ok().is_some_and(|cc| {
            g.darts().any(|target| {
                cc.dual
                    .isomorphism_from(g, target)
                    .is_some_and(|m| m.iter().enumerate().all(|(i, d)| d.edge == i / 2))
            })
        });
        out.push(self.record(
            Check::Duality,
            json!({ "part": "shape" }),
            shape && double,
            (!(shape && double)).then(|| json!({ "euler": shape, "double-dual": double })),
        ));

        let dual_tables = match Tables::new(dual) {
            Ok(t) => t,
            Err(e) => {
                out.push(Record::error(Check::Duality.name(), self.name, json!({}), &e));
                return out;
            }
        };
        let trees = &self.tables.trees.trees;
        // sigma is a bijection onto the dual's trees.
        let sigma: Vec<Option<usize>> = trees
            .iter()
            .map(|t| dual_tree(&corr, g, t).ok().and_then(|s| dual_tables.trees.index_of(&s)))
            .collect();
        let mut seen: Vec<usize> = sigma.iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.dedup();
        let sigma_ok = seen.len() == trees.len() && dual_tables.trees.len() == trees.len();
        out.push(self.record(Check::Duality, json!({ "part": "sigma" }), sigma_ok, None));
        if !sigma_ok {
            return out;
        }
        let sigma: Vec<usize> = sigma.into_iter().flatten().collect();

        // Psi: bijective, additive, independent of the lift.
        let pic = &self.tables.pic;
        let psi: Result<Vec<DivisorClass>> = pic.elements().iter().map(|c| psi_class(&corr, g, c)).collect();
        let psi = match psi {
            Ok(p) => p,
            Err(e) => {
                out.push(Record::error(Check::Duality.name(), self.name, json!({ "part": "psi" }), &e));
                return out;
            }
        };
        let mut psi_witness = None;
        let mut image: Vec<Option<usize>> = psi.iter().map(|c| dual_tables.pic.index_of(c)).collect();
        if image.iter().any(Option::is_none) {
            psi_witness = Some(json!({ "reason": "image outside the dual Picard group" }));
        }
        image.sort_unstable();
        image.dedup();
        if psi_witness.is_none() && image.len() != pic.order() {
            psi_witness = Some(json!({ "reason": "not injective" }));
        }
        for (i, a) in pic.elements().iter().enumerate() {
            if psi_witness.is_some() {
                break;
            }
            for (j, b) in pic.elements().iter().enumerate() {
                let sum = pic.index_of(&a.add(g, b)).expect("closed under addition");
                if psi[sum] != psi[i].add(dual, &psi[j]) {
                    psi_witness = Some(json!({ "reason": "not additive", "a": div_json(g, a.reduced()), "b": div_json(g, b.reduced()) }));
                    break;
                }
            }
        }
        for t in trees.iter().take(4) {
            if psi_witness.is_some() {
                break;
            }
            for (i, c) in pic.elements().iter().enumerate() {
                if psi_class_with(&corr, g, c, &TreePaths(t.clone())).ok().as_ref() != Some(&psi[i]) {
                    psi_witness = Some(json!({ "reason": "depends on the lift", "class": div_json(g, c.reduced()), "tree": t.names(g) }));
                    break;
                }
            }
        }
        let pass = psi_witness.is_none();
        out.push(self.record(Check::Duality, json!({ "part": "psi" }), pass, psi_witness));

        // The square, at the first vertex on both sides.
        let square = (|| -> Result<Option<Value>> {
            let primal = bernardi_torsor(g, self.tables, 0)?;
            let dual_torsor = bernardi_torsor(dual, &dual_tables, 0)?;
            let (Some(primal), Some(dual_torsor)) = (primal, dual_torsor) else {
                return Ok(None);
            };
            for (i, gamma) in pic.elements().iter().enumerate() {
                for t in 0..trees.len() {
                    let left = sigma[primal.act(g, &self.tables.breaks, gamma, t)?];
                    let right = dual_torsor.act(dual, &dual_tables.breaks, &psi[i], sigma[t])?;
                    if left != right {
                        return Ok(Some(json!({
                            "vertex": self.vertex(0),
                            "class": div_json(g, gamma.reduced()),
                            "tree": trees[t].names(g),
                            "left": dual_tables.trees.trees[left].names(dual),
                            "right": dual_tables.trees.trees[right].names(dual),
                        })));
                    }
                }
            }
            Ok(None)
        })();
        let witness = square.unwrap_or_else(|e| Some(json!({ "error": e.to_string() })));
        let pass = witness.is_none();
        out.push(self.record(
            Check::Duality,
            json!({ "part": "square", "mirrored": self.options.mirrored_dual }),
            pass,
            witness,
        ));
        out
    }
}

fn div_json(g: &RibbonGraph, d: &Divisor) -> Value {
    serde_json::from_str(&d.to_json(g)).expect("divisor JSON is valid")
}

fn dart_json(g: &RibbonGraph, d: Dart) -> Value {
    json!({ "edge": g.edge_name(d.edge), "tail": g.vertex_name(g.tail(d)) })
}

/// Calls `f` on every effective divisor of degree `total` on `n` vertices
/// until it returns false.
fn for_each_effective(n: usize, total: i64, f: &mut dyn FnMut(&Divisor) -> bool) {
    fn go(d: &mut Vec<i64>, v: usize, left: i64, f: &mut dyn FnMut(&Divisor) -> bool) -> bool {
        if v + 1 == d.len() {
            d[v] = left;
            let keep = f(&Divisor::from_vec(d.clone()));
            d[v] = 0;
            return keep;
        }
        for c in (0..=left).rev() {
            d[v] = c;
            if !go(d, v + 1, left - c, f) {
                d[v] = 0;
                return false;
            }
        }
        d[v] = 0;
        true
    }
    if n == 0 {
        return;
    }
    go(&mut vec![0; n], 0, total, f);
}

/// Verdict for one rotation system in the conjecture search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemVerdict {
    pub index: usize,
    pub genus: usize,
    pub rotation: Vec<Vec<String>>,
    /// `β_v = r_v` at every vertex.
    pub agree_everywhere: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub systems: Vec<SystemVerdict>,
    /// Planar systems where the torsors disagree somewhere.
    pub planar_failures: Vec<usize>,
    /// Non-planar systems where the torsors agree at every vertex.
    pub counterexamples: Vec<usize>,
}

impl SearchReport {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.systems {
            out.push_str(&serde_json::to_string(s).expect("verdicts serialize"));
            out.push('\n');
        }
        let summary = json!({
            "summary": {
                "systems": self.systems.len(),
                "planar": self.systems.iter().filter(|s| s.genus == 0).count(),
                "planar-failures": self.planar_failures,
                "counterexamples": self.counterexamples,
            }
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

/// The verdict for one ribbon graph: the first vertex and generator where
/// `β_v` and `r_v` differ, if any.
pub fn torsor_disagreement(g: &RibbonGraph) -> Result<Option<Value>> {
    let tables = Tables::new(g)?;
    for v in 0..g.num_vertices() {
        let a = bernardi_table(g, &tables, v)?;
        let b = rotor_table(g, &tables, v)?;
        if let Some(x) = first_difference(&a, &b) {
            let mut w = x.to_json(g, &tables);
            w["vertex"] = json!(g.vertex_name(v));
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Runs over every rotation system of `base` (which must be simple) and
/// compares the Bernardi and rotor torsors at every vertex.
pub fn search_conjecture(base: &RibbonGraph) -> Result<SearchReport> {
    if let Some((a, b)) = base.parallel_pair() {
        return Err(Error::NotSimple(base.edge_name(a).to_string(), base.edge_name(b).to_string()));
    }
    let systems: Vec<RibbonGraph> = RotationSystems::new(base).collect();
    let systems = systems
        .par_iter()
        .enumerate()
        .map(|(index, g)| {
            let genus = trace_faces(g).topological_genus;
            let witness = torsor_disagreement(g)?;
            let rotation = g
                .rotations()
                .iter()
                .map(|r| r.iter().map(|&e| g.edge_name(e).to_string()).collect())
                .collect();
            Ok(SystemVerdict {
                index,
                genus,
                rotation,
                agree_everywhere: witness.is_none(),
                witness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let planar_failures = systems
        .iter()
        .filter(|s| s.genus == 0 && !s.agree_everywhere)
        .map(|s| s.index)
        .collect();
    let counterexamples = systems
        .iter()
        .filter(|s| s.genus > 0 && s.agree_everywhere)
        .map(|s| s.index)
        .collect();
    Ok(SearchReport {
        systems,
        planar_failures,
        counterexamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{complete, k3, path3, theta_planar, theta_torus};

    #[test]
    fn theta_vertices() {
        let p = theta_planar();
        assert_eq!(compare_bernardi_vertices(&p, 0, 1).unwrap(), None);
        assert_eq!(compare_bernardi_vertices(&p, 1, 1).unwrap(), None);
        let t = theta_torus();
        assert!(compare_bernardi_vertices(&t, 0, 1).unwrap().is_some());
    }

    #[test]
    fn planar_torsors_agree() {
        for g in [k3(), theta_planar(), path3()] {
            for v in 0..g.num_vertices() {
                assert_eq!(compare_torsors(&g, v).unwrap(), None);
            }
        }
    }

    #[test]
    fn suite_on_small_graphs_passes() {
        let corpus = vec![
            ("k3".to_string(), k3()),
            ("theta".to_string(), theta_planar()),
            ("torus".to_string(), theta_torus()),
            ("path3".to_string(), path3()),
        ];
        let report = run_theorem_suite(&corpus, &SuiteOptions::default());
        let fails: Vec<_> = report.failures().collect();
        assert!(fails.is_empty(), "{fails:#?}");
        assert_eq!(report.to_jsonl(), run_theorem_suite(&corpus, &SuiteOptions::default()).to_jsonl());
        assert!(run_theorem_suite(&[], &SuiteOptions::default()).all_pass());
    }

    #[test]
    fn mirrored_dual_breaks_the_square() {
        let corpus: Vec<(String, RibbonGraph)> = RotationSystems::new(&complete(4))
            .filter(|g| trace_faces(g).is_planar())
            .enumerate()
            .map(|(i, g)| (format!("k4-{i}"), g))
            .collect();
        let mut options = SuiteOptions {
            checks: vec![Check::Duality],
            ..SuiteOptions::default()
        };
        assert!(run_theorem_suite(&corpus, &options).all_pass());
        options.mirrored_dual = true;
        let report = run_theorem_suite(&corpus, &options);
        let square: Vec<&Record> = report.failures().filter(|r| r.params["part"] == "square").collect();
        assert!(!square.is_empty());
        assert!(square.iter().all(|r| r.witness.is_some()));
    }

    #[test]
    fn search_k3_and_multigraph() {
        let r = search_conjecture(&k3()).unwrap();
        assert_eq!(r.systems.len(), 1);
        assert!(r.systems[0].agree_everywhere);
        assert!(matches!(search_conjecture(&theta_planar()), Err(Error::NotSimple(_, _))));
        let k4 = search_conjecture(&complete(4)).unwrap();
        assert_eq!(k4.systems.len(), 16);
        assert!(k4.planar_failures.is_empty());
    }
}
