//! Command-line surface.
//!
//! Exit codes form a contract for scripting: 0 for success (including the
//! ALL_FG_* verdicts), 10 for a NOT_ALL_FG verdict, 2 for malformed input,
//! 3 for precondition violations (elementary or non-1-free systems, bounded
//! verdicts fed to `witness`), 1 for verification failures.

use std::fs;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::classify::{classify, classify_bs, center_exponent, ClassifyError, Verdict};
use crate::dsl::{parse_gbs, GbsDocument};
use crate::graph::{LabelledGraph, Presentation};
use crate::report::{
    classification_json, rational_json, system_json, verification_json, witness_json, Report,
};
use crate::witness::{build_for, verify_witness, WitnessError};
use crate::words::{parse_word, tree_ball_capped, DEFAULT_RADIUS_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_NOT_ALL_FG: i32 = 10;

#[derive(Parser)]
#[command(
    name = "gbsfix",
    about = "Fixed-subgroup classification for generalised Baumslag-Solitar systems",
    disable_help_flag = false
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the system in a .gbs file.
    Classify {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Classify BS(p,q) = <x, t | x^p = t x^q t^-1>.
    #[command(allow_negative_numbers = true)]
    Bs {
        p: i64,
        q: i64,
        #[arg(long)]
        json: bool,
    },
    /// Print the modulus of each stable letter and the canonical subgroup.
    Delta { file: String },
    /// Reduce a word to normal form.
    Word { file: String, word: String },
    /// Build and verify the witness automorphism for the system's verdict.
    Witness {
        file: String,
        /// Twist scaling N for the integral-modulus family.
        #[arg(long = "N", default_value_t = 1)]
        n: i64,
        /// Target rank for the bounded-prefix family.
        #[arg(long, default_value_t = 3)]
        rank: u64,
        /// Ray depth K to verify.
        #[arg(long, default_value_t = 6)]
        depth: u64,
        #[arg(long)]
        json: bool,
    },
    /// Materialise a ball of the Bass-Serre tree.
    Ball {
        file: String,
        #[arg(long)]
        radius: usize,
        /// Emit DOT instead of an edge list.
        #[arg(long)]
        dot: bool,
    },
    /// Compute the centre exponent of a Betti-0 system.
    Center {
        file: String,
        #[arg(long)]
        root: String,
    },
}

/// Runs the CLI; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are not errors.
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Classify { file, json } => cmd_classify(&file, json),
        Command::Bs { p, q, json } => cmd_bs(p, q, json),
        Command::Delta { file } => cmd_delta(&file),
        Command::Word { file, word } => cmd_word(&file, &word),
        Command::Witness { file, n, rank, depth, json } => cmd_witness(&file, n, rank, depth, json),
        Command::Ball { file, radius, dot } => cmd_ball(&file, radius, dot),
        Command::Center { file, root } => cmd_center(&file, &root),
    }
}

fn load_document(path: &str) -> Result<GbsDocument, i32> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read '{path}': {e}");
        EXIT_INPUT
    })?;
    parse_gbs(&text).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_INPUT
    })
}

fn load_graph(path: &str) -> Result<(GbsDocument, LabelledGraph), i32> {
    let doc = load_document(path)?;
    let graph = doc.to_graph().map_err(|e| {
        eprintln!("error: {e}");
        EXIT_INPUT
    })?;
    Ok((doc, graph))
}

fn presentation_for(doc: &GbsDocument, graph: &LabelledGraph) -> Result<Arc<Presentation>, i32> {
    let root = doc.root_vertex().expect("validated documents have vertices");
    graph
        .presentation(&root)
        .map(Arc::new)
        .map_err(|e| {
            eprintln!("error: {e}");
            EXIT_INPUT
        })
}

fn classify_exit(verdict: &Verdict) -> i32 {
    match verdict {
        Verdict::NotAllFg => EXIT_NOT_ALL_FG,
        _ => EXIT_OK,
    }
}

fn classify_error_exit(e: &ClassifyError) -> i32 {
    match e {
        ClassifyError::NotOneFree { .. }
        | ClassifyError::Elementary { .. }
        | ClassifyError::NonzeroBetti { .. }
        | ClassifyError::PreconditionViolated(_) => EXIT_PRECONDITION,
        ClassifyError::Graph(_) | ClassifyError::Word(_) => EXIT_INPUT,
        _ => EXIT_FAIL,
    }
}

fn emit_classification(graph: &LabelledGraph, c: &crate::classify::Classification, json: bool) {
    if json {
        let report = Report {
            system: system_json(graph, Some(c)),
            classification: Some(classification_json(c)),
            witness: None,
            verification: None,
            warnings: Vec::new(),
        };
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
        return;
    }
    println!(
        "system: {} vertices, {} edges, betti {}, one-free",
        c.vertex_count, c.edge_count, c.betti
    );
    for (edge, d) in &c.modulus.generators {
        println!("delta({edge}) = {d}");
    }
    match &c.modulus.integer_generator {
        Some(n) => println!("modulus subgroup: generated by integer {n}"),
        None if c.modulus.pm_one => println!("modulus subgroup: {{1, -1}}"),
        None => println!("modulus subgroup: not generated by an integer"),
    }
    match &c.verdict {
        Verdict::AllFgBounded { bound } => println!(
            "verdict: ALL_FG_BOUNDED (rank bound {bound}, scope {})",
            c.scope.as_str()
        ),
        Verdict::AllFgUnbounded => {
            println!("verdict: ALL_FG_UNBOUNDED (scope {})", c.scope.as_str())
        }
        Verdict::NotAllFg => println!("verdict: NOT_ALL_FG (scope {})", c.scope.as_str()),
    }
    if let Some(kind) = c.witness_recipe {
        println!("witness recipe: {}", kind.as_str());
    }
    for note in &c.notes {
        println!("note: {note}");
    }
}

fn cmd_classify(file: &str, json: bool) -> i32 {
    let (_, graph) = match load_graph(file) {
        Ok(x) => x,
        Err(code) => return code,
    };
    match classify(&graph) {
        Ok(c) => {
            emit_classification(&graph, &c, json);
            classify_exit(&c.verdict)
        }
        Err(e) => {
            eprintln!("error: {e}");
            classify_error_exit(&e)
        }
    }
}

fn cmd_bs(p: i64, q: i64, json: bool) -> i32 {
    match classify_bs(p, q) {
        Ok(c) => {
            let graph = LabelledGraph::bs(p, q).expect("classify_bs validated the labels");
            emit_classification(&graph, &c, json);
            classify_exit(&c.verdict)
        }
        Err(e) => {
            eprintln!("error: {e}");
            classify_error_exit(&e)
        }
    }
}

fn cmd_delta(file: &str) -> i32 {
    let (doc, graph) = match load_graph(file) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let pres = match presentation_for(&doc, &graph) {
        Ok(p) => p,
        Err(code) => return code,
    };
    match crate::modulus::modulus_of_system(&graph, &pres) {
        Ok(m) => {
            for (e, d) in &m.stable_deltas {
                println!("delta({}) = {}", graph.edge(*e).id, d);
            }
            if m.stable_deltas.is_empty() {
                println!("no stable letters: delta is trivial");
            }
            let s = &m.subgroup;
            println!(
                "canonical: minus_one={}, primes={:?}, basis={:?}",
                s.contains_minus_one(),
                s.primes(),
                s.basis()
                    .iter()
                    .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_PRECONDITION
        }
    }
}

fn cmd_word(file: &str, word: &str) -> i32 {
    let (doc, graph) = match load_graph(file) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let pres = match presentation_for(&doc, &graph) {
        Ok(p) => p,
        Err(code) => return code,
    };
    match parse_word(word, &pres) {
        Ok(w) => {
            println!("{}", w.canonicalize().display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn cmd_witness(file: &str, n: i64, rank: u64, depth: u64, json: bool) -> i32 {
    let (doc, graph) = match load_graph(file) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let c = match classify(&graph) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return classify_error_exit(&e);
        }
    };
    let Some(kind) = c.witness_recipe else {
        eprintln!(
            "error: verdict is {}; every fixed subgroup is finitely generated, no witness family exists",
            c.verdict.as_str()
        );
        return EXIT_PRECONDITION;
    };
    let pres = match presentation_for(&doc, &graph) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let recipe = match build_for(&pres, kind, n, rank) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                WitnessError::PreconditionViolated(_) | WitnessError::NoSuitableStableLetter => {
                    EXIT_PRECONDITION
                }
                _ => EXIT_FAIL,
            };
        }
    };
    let verification = match verify_witness(&recipe, depth) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
    };
    if json {
        let report = Report {
            system: system_json(&graph, Some(&c)),
            classification: Some(classification_json(&c)),
            witness: Some(witness_json(&recipe)),
            verification: Some(verification_json(&verification)),
            warnings: Vec::new(),
        };
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("witness kind: {}", recipe.kind.as_str());
        println!("automorphism: {}", recipe.describe());
        println!("p = {}, N = {}, delta = {}", recipe.p, recipe.scale, recipe.delta);
        if let Some(g) = &recipe.gamma {
            println!("gamma = {g}");
        }
        if let Some(m) = recipe.prefix_len {
            println!("integral prefix M_N = {m}");
        }
        for r in &verification.ray {
            match (&r.exponent, r.identity_holds) {
                (Some(e), Some(ok)) => println!(
                    "k={}: l_k = {}, exponent {} -> {}",
                    r.k,
                    r.l_k,
                    e,
                    if ok { "ok" } else { "FAIL" }
                ),
                _ => println!("k={}: l_k = {} (beyond integral prefix, skipped)", r.k, r.l_k),
            }
        }
        println!("verification: {}", if verification.pass { "PASS" } else { "FAIL" });
    }
    if verification.pass {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn radius_cap() -> usize {
    std::env::var("GBSFIX_MAX_RADIUS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_RADIUS_CAP)
}

fn cmd_ball(file: &str, radius: usize, dot: bool) -> i32 {
    let (doc, graph) = match load_graph(file) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let pres = match presentation_for(&doc, &graph) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let base = pres.root();
    let ball = match tree_ball_capped(&pres, base, radius, radius_cap()) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    if dot {
        println!("graph ball {{");
        for (a, b, e) in &ball.edges {
            println!(
                "  \"{}\" -- \"{}\" [label=\"{}\"];",
                ball.vertex_label(*a),
                ball.vertex_label(*b),
                graph.edge(*e).id
            );
        }
        println!("}}");
    } else {
        println!(
            "ball of radius {} at {}: {} vertices, {} edges",
            ball.radius,
            graph.vertex_id(base),
            ball.vertices.len(),
            ball.edges.len()
        );
        for (a, b, e) in &ball.edges {
            println!(
                "{} -- {} (via {})",
                ball.vertex_label(*a),
                ball.vertex_label(*b),
                graph.edge(*e).id
            );
        }
    }
    EXIT_OK
}

fn cmd_center(file: &str, root: &str) -> i32 {
    let (_, graph) = match load_graph(file) {
        Ok(x) => x,
        Err(code) => return code,
    };
    match center_exponent(&graph, root) {
        Ok(info) => {
            println!("center: <{}^{}>", info.root, info.exponent);
            for (v, m) in &info.ratios {
                let r = rational_json(m);
                println!("m_{v} = {}/{}", r.num, r.den);
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            classify_error_exit(&e)
        }
    }
}
