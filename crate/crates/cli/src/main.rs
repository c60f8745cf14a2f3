use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ribbon_torsor::bernardi::{alpha_left, alpha_right, bernardi_act, bernardi_beta, bernardi_tour, StepAction};
use ribbon_torsor::break_divisor::enumerate_break_divisors;
use ribbon_torsor::corpus::default_corpus;
use ribbon_torsor::divisor::kirchhoff_count;
use ribbon_torsor::duality::{dual_graph_with, duality_square, psi_class, DualConvention};
use ribbon_torsor::graph::{spanning_trees, trace_faces};
use ribbon_torsor::lab::{
    compare_bernardi_vertices, compare_torsors, run_theorem_suite, search_conjecture, Check, SuiteOptions,
};
use ribbon_torsor::rotor::{cycle_is_reversible, parse_cycle, rotor_act, rotor_move_traced, trace_dump};
use ribbon_torsor::{Divisor, DivisorClass, Error, RibbonGraph, SpanningTree};

#[derive(Parser)]
#[command(name = "torsor-lab", version, about = "Spanning-tree torsors on ribbon graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Start {
    #[arg(long)]
    vertex: String,
    #[arg(long)]
    edge: String,
}

#[derive(Subcommand)]
enum Command {
    /// Vertex, edge, genus and face counts.
    Info { file: PathBuf },
    /// All spanning trees, one JSON array per line.
    Trees { file: PathBuf },
    /// All break divisors with a witness tree.
    BreakDivisors { file: PathBuf },
    /// Step-by-step Bernardi tour.
    Tour {
        file: PathBuf,
        #[command(flatten)]
        start: Start,
        #[arg(long)]
        tree: String,
    },
    /// The break divisor of a tree.
    Beta {
        file: PathBuf,
        #[command(flatten)]
        start: Start,
        #[arg(long)]
        tree: String,
    },
    /// The tree of a break divisor, by cutting as early as possible.
    AlphaR {
        file: PathBuf,
        #[command(flatten)]
        start: Start,
        #[arg(long)]
        divisor: String,
    },
    /// The tree of a break divisor, by walking the rotation backwards.
    AlphaL {
        file: PathBuf,
        #[command(flatten)]
        start: Start,
        #[arg(long)]
        divisor: String,
    },
    /// Acts on a tree by a degree-0 class through the Bernardi bijection.
    ActBernardi {
        file: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        class: String,
        #[arg(long)]
        tree: String,
    },
    /// Acts on a tree by a degree-0 class through rotor-routing.
    ActRotor {
        file: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        class: String,
        #[arg(long)]
        tree: String,
    },
    /// Routes one chip from `--from` to the root, printing the trace.
    RotorMove {
        file: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        root: String,
        #[arg(long)]
        tree: String,
    },
    /// Whether a directed cycle is reversible under rotor-routing.
    Reversible {
        file: PathBuf,
        /// Vertex the cycle starts at.
        #[arg(long)]
        start: String,
        /// Edge ids along the cycle, comma separated.
        #[arg(long)]
        cycle: String,
    },
    /// The planar dual in graph file format.
    Dual {
        file: PathBuf,
        /// Where to write the `e e*` table.
        #[arg(long)]
        edge_map: Option<PathBuf>,
        #[arg(long)]
        mirrored: bool,
    },
    /// The image of a degree-0 class on the dual.
    DualClass {
        file: PathBuf,
        #[arg(long)]
        class: String,
        #[arg(long)]
        mirrored: bool,
    },
    /// Both sides of the duality square for one class and tree.
    CheckSquare {
        file: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        class: String,
        #[arg(long)]
        tree: String,
        #[arg(long)]
        mirrored: bool,
    },
    /// Compares the Bernardi actions at two vertices (default: every vertex
    /// against the first).
    CompareVertices {
        file: PathBuf,
        #[arg(long)]
        vertex: Option<String>,
        #[arg(long)]
        other: Option<String>,
    },
    /// Compares the Bernardi and rotor actions (default: at every vertex).
    CompareTorsors {
        file: PathBuf,
        #[arg(long)]
        vertex: Option<String>,
    },
    /// Runs the theorem suite over every `*.json` graph in a directory.
    Suite {
        dir: PathBuf,
        /// Restrict to these checks.
        #[arg(long = "check")]
        checks: Vec<String>,
        #[arg(long)]
        mirrored_dual: bool,
    },
    /// Compares the two torsors over every rotation system of a simple graph.
    Search { file: PathBuf },
    /// A Bernardi tour or rotor trace as an annotated DOT graph.
    ExportDot {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: DotKind,
        #[arg(long)]
        tree: String,
        /// Tour start vertex, or rotor chip start.
        #[arg(long)]
        vertex: String,
        /// Tour start edge.
        #[arg(long)]
        edge: Option<String>,
        /// Rotor sink.
        #[arg(long)]
        root: Option<String>,
    },
    /// Writes the built-in default corpus as graph files.
    WriteCorpus { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum DotKind {
    Tour,
    Rotor,
}

/// Input problems exit with 2, failed checks with 1.
enum Failure {
    Input(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Check(out)) => {
            print!("{out}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> std::result::Result<RibbonGraph, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(RibbonGraph::parse(&text)?)
}

/// A tree as a JSON array of edge ids, or a comma-separated list.
fn parse_tree(g: &RibbonGraph, text: &str) -> std::result::Result<SpanningTree, Failure> {
    let names: Vec<String> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| Failure::Input(format!("tree: {e}")))?
    } else {
        text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
    };
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Ok(SpanningTree::from_names(g, &refs)?)
}

fn parse_class(g: &RibbonGraph, text: &str) -> std::result::Result<DivisorClass, Failure> {
    let d = Divisor::parse(g, text)?;
    if d.degree() != 0 {
        return Err(Failure::Input(format!("class has degree {}, expected 0", d.degree())));
    }
    Ok(DivisorClass::of(g, &d))
}

fn tree_line(g: &RibbonGraph, t: &SpanningTree) -> String {
    format!("{}\n", json!(t.names(g)))
}

fn convention(mirrored: bool) -> DualConvention {
    if mirrored {
        DualConvention::Mirrored
    } else {
        DualConvention::Standard
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Info { file } => {
            let g = load(&file)?;
            let faces = trace_faces(&g);
            let info = json!({
                "vertices": g.num_vertices(),
                "edges": g.num_edges(),
                "genus": g.genus(),
                "topological_genus": faces.topological_genus,
                "faces": faces.faces.len(),
                "spanning_trees": kirchhoff_count(&g).to_string(),
            });
            Ok(format!("{info}\n"))
        }
        Command::Trees { file } => {
            let g = load(&file)?;
            Ok(spanning_trees(&g).iter().map(|t| tree_line(&g, t)).collect())
        }
        Command::BreakDivisors { file } => {
            let g = load(&file)?;
            let mut out = String::new();
            for b in enumerate_break_divisors(&g) {
                let tree = b.witness_tree.map(|t| json!(t.names(&g))).unwrap_or(Value::Null);
                let divisor: Value = serde_json::from_str(&b.divisor.to_json(&g)).expect("valid JSON");
                let _ = writeln!(out, "{}", json!({ "divisor": divisor, "tree": tree }));
            }
            Ok(out)
        }
        Command::Tour { file, start, tree } => {
            let g = load(&file)?;
            let t = parse_tree(&g, &tree)?;
            let tour = bernardi_tour(&g, g.vertex(&start.vertex)?, g.edge(&start.edge)?, &t)?;
            Ok(tour.dump(&g))
        }
        Command::Beta { file, start, tree } => {
            let g = load(&file)?;
            let t = parse_tree(&g, &tree)?;
            let b = bernardi_beta(&g, g.vertex(&start.vertex)?, g.edge(&start.edge)?, &t)?;
            Ok(format!("{}\n", b.divisor.to_json(&g)))
        }
        Command::AlphaR { file, start, divisor } => {
            let g = load(&file)?;
            let d = Divisor::parse(&g, &divisor)?;
            let t = alpha_right(&g, g.vertex(&start.vertex)?, g.edge(&start.edge)?, &d)?;
            Ok(tree_line(&g, &t))
        }
        Command::AlphaL { file, start, divisor } => {
            let g = load(&file)?;
            let d = Divisor::parse(&g, &divisor)?;
            let t = alpha_left(&g, g.vertex(&start.vertex)?, g.edge(&start.edge)?, &d)?;
            Ok(tree_line(&g, &t))
        }
        Command::ActBernardi { file, vertex, class, tree } => {
            let g = load(&file)?;
            let t = parse_tree(&g, &tree)?;
            let c = parse_class(&g, &class)?;
            Ok(tree_line(&g, &bernardi_act(&g, g.vertex(&vertex)?, &c, &t)?))
        }
        Command::ActRotor { file, vertex, class, tree } => {
            let g = load(&file)?;
            let t = parse_tree(&g, &tree)?;
            let c = parse_class(&g, &class)?;
            Ok(tree_line(&g, &rotor_act(&g, g.vertex(&vertex)?, &c, &t)?))
        }
        Command::RotorMove { file, from, root, tree } => {
            let g = load(&file)?;
            let t = parse_tree(&g, &tree)?;
            let (out, steps) = rotor_move_traced(&g, &t, g.vertex(&from)?, g.vertex(&root)?);
            Ok(format!("{}{}", trace_dump(&g, &steps), tree_line(&g, &out)))
        }
        Command::Reversible { file, start, cycle } => {
            let g = load(&file)?;
            let edges: Vec<&str> = cycle.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            let c = parse_cycle(&g, &start, &edges)?;
            Ok(format!("{}\n", cycle_is_reversible(&g, &c)?))
        }
        Command::Dual { file, edge_map, mirrored } => {
            let g = load(&file)?;
            let corr = dual_graph_with(&g, convention(mirrored))?;
            if let Some(path) = edge_map {
                std::fs::write(&path, corr.edge_table(&g))
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            }
            Ok(format!("{}\n", corr.dual.to_json()))
        }
        Command::DualClass { file, class, mirrored } => {
            let g = load(&file)?;
            let c = parse_class(&g, &class)?;
            let corr = dual_graph_with(&g, convention(mirrored))?;
            let image = psi_class(&corr, &g, &c)?;
            Ok(format!("{}\n", image.reduced().to_json(&corr.dual)))
        }
        Command::CheckSquare { file, vertex, class, tree, mirrored } => {
            let g = load(&file)?;
            let t = parse_tree(&g, &tree)?;
            let c = parse_class(&g, &class)?;
            let corr = dual_graph_with(&g, convention(mirrored))?;
            let sides = duality_square(&corr, &g, g.vertex(&vertex)?, &c, &t)?;
            let out = format!(
                "{}\n",
                json!({
                    "commutes": sides.commutes(),
                    "primal_then_dual": sides.primal_then_dual.names(&corr.dual),
                    "dual_then_act": sides.dual_then_act.names(&corr.dual),
                })
            );
            if sides.commutes() {
                Ok(out)
            } else {
                Err(Failure::Check(out))
            }
        }
        Command::CompareVertices { file, vertex, other } => {
            let g = load(&file)?;
            let pairs: Vec<(usize, usize)> = match (vertex, other) {
                (Some(v), Some(w)) => vec![(g.vertex(&v)?, g.vertex(&w)?)],
                (Some(v), None) | (None, Some(v)) => {
                    let v = g.vertex(&v)?;
                    (0..g.num_vertices()).map(|w| (v, w)).collect()
                }
                (None, None) => (0..g.num_vertices()).map(|w| (0, w)).collect(),
            };
            let mut out = String::new();
            let mut equal = true;
            for (v, w) in pairs {
                let witness = compare_bernardi_vertices(&g, v, w)?;
                equal &= witness.is_none();
                let _ = writeln!(
                    out,
                    "{}",
                    json!({
                        "vertex": g.vertex_name(v),
                        "other": g.vertex_name(w),
                        "equal": witness.is_none(),
                        "witness": witness,
                    })
                );
            }
            if equal {
                Ok(out)
            } else {
                Err(Failure::Check(out))
            }
        }
        Command::CompareTorsors { file, vertex } => {
            let g = load(&file)?;
            let vertices = match vertex {
                Some(v) => vec![g.vertex(&v)?],
                None => (0..g.num_vertices()).collect(),
            };
            let mut out = String::new();
            let mut equal = true;
            for v in vertices {
                let witness = compare_torsors(&g, v)?;
                equal &= witness.is_none();
                let _ = writeln!(
                    out,
                    "{}",
                    json!({ "vertex": g.vertex_name(v), "equal": witness.is_none(), "witness": witness })
                );
            }
            if equal {
                Ok(out)
            } else {
                Err(Failure::Check(out))
            }
        }
        Command::Suite { dir, checks, mirrored_dual } => {
            let corpus = load_dir(&dir)?;
            let mut options = SuiteOptions {
                mirrored_dual,
                ..SuiteOptions::default()
            };
            if !checks.is_empty() {
                options.checks = checks
                    .iter()
                    .map(|name| {
                        Check::ALL
                            .into_iter()
                            .find(|c| c.name() == name)
                            .ok_or_else(|| Failure::Input(format!("unknown check {name}")))
                    })
                    .collect::<std::result::Result<_, _>>()?;
            }
            let report = run_theorem_suite(&corpus, &options);
            if report.all_pass() {
                Ok(report.to_jsonl())
            } else {
                Err(Failure::Check(report.to_jsonl()))
            }
        }
        Command::Search { file } => {
            let g = load(&file)?;
            let report = search_conjecture(&g)?;
            if report.planar_failures.is_empty() {
                Ok(report.to_jsonl())
            } else {
                Err(Failure::Check(report.to_jsonl()))
            }
        }
        Command::ExportDot { file, kind, tree, vertex, edge, root } => {
            let g = load(&file)?;
            let t = parse_tree(&g, &tree)?;
            let v = g.vertex(&vertex)?;
            match kind {
                DotKind::Tour => {
                    let e = edge.ok_or_else(|| Failure::Input("--edge is required for a tour".into()))?;
                    let tour = bernardi_tour(&g, v, g.edge(&e)?, &t)?;
                    Ok(tour_dot(&g, &t, &tour))
                }
                DotKind::Rotor => {
                    let r = root.ok_or_else(|| Failure::Input("--root is required for a rotor trace".into()))?;
                    let (out, steps) = rotor_move_traced(&g, &t, v, g.vertex(&r)?);
                    Ok(rotor_dot(&g, &t, &out, &steps))
                }
            }
        }
        Command::WriteCorpus { dir } => {
            std::fs::create_dir_all(&dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
            let mut out = String::new();
            for (name, g) in default_corpus() {
                let path = dir.join(format!("{name}.json"));
                std::fs::write(&path, format!("{}\n", g.to_json()))
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                let _ = writeln!(out, "{}", path.display());
            }
            Ok(out)
        }
    }
}

/// Every `*.json` file in `dir`, sorted by file name; the graph id is the
/// file stem.
fn load_dir(dir: &Path) -> std::result::Result<Vec<(String, RibbonGraph)>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().expect("json file has a stem").to_string_lossy().into_owned();
            load(p).map(|g| (name, g))
        })
        .collect()
}

fn dot_header(g: &RibbonGraph) -> String {
    let mut s = String::from("graph G {\n");
    for v in g.vertex_names() {
        let _ = writeln!(s, "  \"{v}\";");
    }
    s
}

/// Tree edges solid, others dashed; each edge is labelled with the tour
/// steps that visit it, and cut edges with the vertex of the first cut.
fn tour_dot(g: &RibbonGraph, t: &SpanningTree, tour: &ribbon_torsor::bernardi::Tour) -> String {
    let mut s = dot_header(g);
    let mut visits: Vec<Vec<String>> = vec![Vec::new(); g.num_edges()];
    for (i, step) in tour.steps.iter().enumerate() {
        let tag = match step.action {
            StepAction::Walk => "w",
            StepAction::Cut => "c",
        };
        visits[step.edge].push(format!("{}{tag}@{}", i + 1, g.vertex_name(step.at_vertex)));
    }
    for (e, edge) in g.edges().iter().enumerate() {
        let [a, b] = edge.ends;
        let mut label = format!("{} [{}]", edge.id, visits[e].join(" "));
        if let Some(v) = tour.eta[e] {
            let _ = write!(label, " eta={}", g.vertex_name(v));
        }
        let style = if t.contains(e) { "solid" } else { "dashed" };
        let _ = writeln!(
            s,
            "  \"{}\" -- \"{}\" [label=\"{label}\", style={style}];",
            g.vertex_name(a),
            g.vertex_name(b)
        );
    }
    s.push_str("}\n");
    s
}

/// Final rotors drawn as arrows toward their head; step numbers on every
/// edge the chip crossed.
fn rotor_dot(
    g: &RibbonGraph,
    before: &SpanningTree,
    after: &SpanningTree,
    steps: &[ribbon_torsor::rotor::RotorStep],
) -> String {
    let mut s = dot_header(g);
    let mut crossings: Vec<Vec<String>> = vec![Vec::new(); g.num_edges()];
    for (i, step) in steps.iter().enumerate() {
        crossings[step.after].push(format!("{}:{}>{}", i + 1, g.vertex_name(step.chip), g.vertex_name(step.next)));
    }
    for (e, edge) in g.edges().iter().enumerate() {
        let [a, b] = edge.ends;
        let style = match (before.contains(e), after.contains(e)) {
            (_, true) => "bold",
            (true, false) => "dotted",
            (false, false) => "dashed",
        };
        let _ = writeln!(
            s,
            "  \"{}\" -- \"{}\" [label=\"{} [{}]\", style={style}];",
            g.vertex_name(a),
            g.vertex_name(b),
            edge.id,
            crossings[e].join(" ")
        );
    }
    s.push_str("}\n");
    s
}
