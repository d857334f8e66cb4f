//! Command-line interface: parse a system document, run pipeline stages, and
//! emit deterministic text or JSON reports.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Read;
use std::process::ExitCode;
use traintrack::absolute::{transition_analysis, whitehead_graphs, AbsMap};
use traintrack::bounds::compute_bounds;
use traintrack::doc::SystemDocument;
use traintrack::fixed::{build_xstar, classify_conjugacy_class, fixed_subgroup_generators};
use traintrack::gos::{parse_closed_path, parse_edge_path, validate_system};
use traintrack::inp::{compute_inps, legalize};
use traintrack::report::{self, render_json, render_text};
use traintrack::turns::special_turns;
use traintrack::vsets::enumerate_v;
use traintrack::{Error, Session};

#[derive(Parser)]
#[command(name = "traintrack", version, about = "Train track maps on graphs of spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// System document (JSON); `-` reads standard input.
    #[arg(short, long, default_value = "-")]
    input: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Cap on materialized image lengths.
    #[arg(long)]
    max_image_len: Option<u128>,
    /// Cap on the number of candidate-set entries.
    #[arg(long)]
    max_v_entries: Option<usize>,
    /// Cap on candidate branch lengths.
    #[arg(long)]
    max_branch_len: Option<usize>,
    /// Cap on legalization iterations.
    #[arg(long)]
    max_legalize_iterations: Option<usize>,
    /// Cap on powers of the map the caches will expand.
    #[arg(long)]
    max_power: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Check all structural invariants and the standing hypotheses.
    Validate(Common),
    /// Train-track and expansion profile.
    Profile(Common),
    /// Turn calculus.
    Turns {
        #[command(subcommand)]
        which: TurnsCmd,
    },
    /// Enumerate the candidate set V(f^t).
    Vset {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        power: u32,
    },
    /// Cancellation and iteration constants.
    Bounds(Common),
    /// INP paths with periods, endpoints, and iteration exponents.
    Inp(Common),
    /// Iterate a path until it is a legal concatenation of legal and INP
    /// pieces.
    Legalize {
        #[command(flatten)]
        common: Common,
        /// Edge-path expression.
        #[arg(long)]
        path: String,
    },
    /// Classify the conjugacy class of a loop.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Closed-path expression.
        #[arg(long = "loop")]
        loop_expr: String,
    },
    /// Fixed subgroup generators at a vertex (absolute maps).
    Fixed {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        vertex: String,
    },
    /// Growth classification and transition matrix (absolute maps).
    Growth(Common),
    /// Per-vertex Whitehead graphs (absolute maps).
    Whitehead(Common),
    /// Build the graph of spaces over the polynomially growing part
    /// (absolute maps); emits a system document.
    GosBuild(Common),
    /// Full pipeline report.
    Report(Common),
}

#[derive(Subcommand)]
enum TurnsCmd {
    /// The illegal turn closure.
    Illegal(Common),
    /// The t-special turns.
    Special {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        power: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Parse(_) | Error::Structural(_) | Error::Domain(_) => 1,
                Error::Hypothesis(_) => 2,
                Error::Capacity { .. } => 3,
                Error::Internal(_) => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn load(common: &Common) -> traintrack::Result<(SystemDocument, traintrack::Caps)> {
    let text = if common.input == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::Parse(format!("reading standard input: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(&common.input)
            .map_err(|e| Error::Parse(format!("reading {}: {e}", common.input)))?
    };
    let doc = SystemDocument::from_json(&text)?;
    let mut caps = doc.caps();
    if let Some(v) = common.max_image_len {
        caps.max_image_len = v;
    }
    if let Some(v) = common.max_v_entries {
        caps.max_v_entries = v;
    }
    if let Some(v) = common.max_branch_len {
        caps.max_branch_len = v;
    }
    if let Some(v) = common.max_legalize_iterations {
        caps.max_legalize_iterations = v;
    }
    if let Some(v) = common.max_power {
        caps.max_power = v;
    }
    Ok((doc, caps))
}

fn emit<T: serde::Serialize>(common: &Common, value: &T) {
    match common.format {
        Format::Json => println!("{}", render_json(value)),
        Format::Text => print!("{}", render_text(value)),
    }
}

fn run(cli: Cli) -> traintrack::Result<ExitCode> {
    match cli.command {
        Command::Validate(common) => {
            let (doc, _) = load(&common)?;
            let sys = doc.build()?;
            let rep = validate_system(&sys);
            emit(&common, &rep);
            Ok(if rep.ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Profile(common) => {
            let (doc, caps) = load(&common)?;
            let sys = doc.build()?;
            let sess = Session::new(&sys, caps)?;
            let rep = report::profile_report(&sess)?;
            emit(&common, &rep);
            Ok(ExitCode::SUCCESS)
        }
        Command::Turns { which } => match which {
            TurnsCmd::Illegal(common) => {
                let (doc, caps) = load(&common)?;
                let sys = doc.build()?;
                let sess = Session::new(&sys, caps)?;
                let rep = report::turns_report(&sys, &sess.profile.closure);
                emit(&common, &rep);
                Ok(ExitCode::SUCCESS)
            }
            TurnsCmd::Special { common, power } => {
                let (doc, caps) = load(&common)?;
                let sys = doc.build()?;
                let sess = Session::new(&sys, caps)?;
                let turns = special_turns(&sys, power, sess.caps.max_image_len)?;
                let rep = report::special_turns_report(&sys, power, &turns);
                emit(&common, &rep);
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Vset { common, power } => {
            let (doc, caps) = load(&common)?;
            let sys = doc.build()?;
            let sess = Session::new(&sys, caps)?;
            sess.require_expanding_train_track()?;
            let entries = enumerate_v(&sess, power)?;
            let rep = report::vset_report(&sys, power, &entries);
            emit(&common, &rep);
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds(common) => {
            let (doc, caps) = load(&common)?;
            let sys = doc.build()?;
            let sess = Session::new(&sys, caps)?;
            let b = compute_bounds(&sess)?;
            emit(&common, &b);
            Ok(ExitCode::SUCCESS)
        }
        Command::Inp(common) => {
            let (doc, caps) = load(&common)?;
            let sys = doc.build()?;
            let sess = Session::new(&sys, caps)?;
            let b = compute_bounds(&sess)?;
            let inps = compute_inps(&sess, &b)?;
            let rep = report::inp_report(&sys, &inps);
            emit(&common, &rep);
            Ok(ExitCode::SUCCESS)
        }
        Command::Legalize { common, path } => {
            let (doc, caps) = load(&common)?;
            let sys = doc.build()?;
            let sess = Session::new(&sys, caps)?;
            let b = compute_bounds(&sess)?;
            let inps = compute_inps(&sess, &b)?;
            let p = parse_edge_path(&sys.graph, &path)?;
            let res = legalize(&sess, &inps, &p)?;
            let rep = report::legalize_report(&sys, &inps, &path, &res);
            emit(&common, &rep);
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { common, loop_expr } => {
            let (doc, caps) = load(&common)?;
            let sys = doc.build()?;
            let sess = Session::new(&sys, caps)?;
            let b = compute_bounds(&sess)?;
            let inps = compute_inps(&sess, &b)?;
            let lp = parse_closed_path(&sys.graph, &loop_expr)?;
            let cert = classify_conjugacy_class(&sess, &inps, &lp)?;
            let rep = report::ClassifyReport {
                loop_path: loop_expr,
                certificate: cert,
            };
            emit(&common, &rep);
            Ok(ExitCode::SUCCESS)
        }
        Command::Fixed { common, vertex } => {
            let (doc, caps) = load(&common)?;
            let sys = doc.build()?;
            let map = AbsMap::from_system(&sys)?;
            let xs = build_xstar(&map, &caps)?;
            let gens = fixed_subgroup_generators(&xs, &vertex)?;
            let rep = report::fixed_report(&xs, &vertex, gens);
            emit(&common, &rep);
            Ok(ExitCode::SUCCESS)
        }
        Command::Growth(common) => {
            let (doc, _) = load(&common)?;
            let sys = doc.build()?;
            let map = AbsMap::from_system(&sys)?;
            let ta = transition_analysis(&map);
            let rep = report::growth_report(&map, &ta);
            emit(&common, &rep);
            Ok(ExitCode::SUCCESS)
        }
        Command::Whitehead(common) => {
            let (doc, _) = load(&common)?;
            let sys = doc.build()?;
            let map = AbsMap::from_system(&sys)?;
            let rep = whitehead_graphs(&map);
            emit(&common, &rep);
            Ok(ExitCode::SUCCESS)
        }
        Command::GosBuild(common) => {
            let (doc, _) = load(&common)?;
            let sys = doc.build()?;
            let map = AbsMap::from_system(&sys)?;
            let (gos_sys, _) = traintrack::absolute::to_graph_of_spaces(&map)?;
            let out = traintrack::doc::from_system(&gos_sys);
            println!("{}", out.to_json());
            Ok(ExitCode::SUCCESS)
        }
        Command::Report(common) => {
            let (doc, caps) = load(&common)?;
            let sys = doc.build()?;
            let validation = validate_system(&sys);
            let sess = Session::new(&sys, caps.clone())?;
            let profile = report::profile_report(&sess)?;
            let turns = report::turns_report(&sys, &sess.profile.closure);
            let mut bounds = None;
            let mut v_set = None;
            let mut inp = None;
            let mut growth = None;
            let mut whitehead = None;
            let mut fixed = None;
            if sess.require_expanding_train_track().is_ok() {
                let b = compute_bounds(&sess)?;
                let entries = enumerate_v(&sess, b.t_hat)?;
                v_set = Some(report::vset_report(&sys, b.t_hat, &entries));
                let inps = compute_inps(&sess, &b)?;
                inp = Some(report::inp_report(&sys, &inps));
                bounds = Some(b);
            }
            if sys.graph.is_absolute() {
                let map = AbsMap::from_system(&sys)?;
                let ta = transition_analysis(&map);
                growth = Some(report::growth_report(&map, &ta));
                whitehead = Some(whitehead_graphs(&map));
                if let Ok(xs) = build_xstar(&map, &caps) {
                    let mut reports = Vec::new();
                    for v in 0..xs.graph.vertex_names.len() as u32 {
                        if xs.vertex_map[v as usize] != v {
                            continue;
                        }
                        let name = xs.graph.vertex_names[v as usize].clone();
                        // Only original vertices are natural base points.
                        if !map.vertex_names.contains(&name) {
                            continue;
                        }
                        if let Ok(gens) = fixed_subgroup_generators(&xs, &name) {
                            reports.push(report::fixed_report(&xs, &name, gens));
                        }
                    }
                    fixed = Some(reports);
                }
            }
            let full = report::FullReport {
                validation,
                profile,
                turns,
                bounds,
                v_set,
                inp,
                growth,
                whitehead,
                fixed,
            };
            emit(&common, &full);
            Ok(ExitCode::SUCCESS)
        }
    }
}
