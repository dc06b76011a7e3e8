mod render;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mpdag_core::dsep::d_separated;
use mpdag_core::graph::{Mpdag, NodeSet, Pdag};
use mpdag_core::ident::{cidm, cidme_leaves, IdentificationResult, Query};
use mpdag_core::meek::{complete, Orientation};
use mpdag_core::oracle::enumerate::{enumerate_dags, DEFAULT_CAP};
use mpdag_core::oracle::harness::check_expression;
use mpdag_core::pco::pco;
use mpdag_core::reach;

use render::{Format, RenderStyle};

const SEED_VAR: &str = "MPDAG_ID_SEED";
const TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "mpdag", version, about = "Causal effect identification in MPDAGs")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArg {
    /// Graph file in edge-list or JSON format; `-` reads stdin.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    /// Treatment labels, comma separated.
    #[arg(long)]
    x: String,
    /// Outcome labels, comma separated.
    #[arg(long)]
    y: String,
    /// Conditioning labels, comma separated.
    #[arg(long, default_value = "")]
    z: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Pa,
    An,
    De,
    Possan,
    Possde,
}

#[derive(Subcommand)]
enum Command {
    /// Close a graph under the orientation rules after adding orientations.
    Complete {
        #[command(flatten)]
        graph: GraphArg,
        /// Orientation `A>B`; repeatable.
        #[arg(long)]
        orient: Vec<String>,
    },
    /// List the DAGs represented by a graph.
    Dags {
        #[command(flatten)]
        graph: GraphArg,
        /// Print at most this many DAGs.
        #[arg(long)]
        limit: Option<usize>,
        /// Refuse graphs with more undirected edges than this.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Partial causal ordering of a node set into buckets.
    Pco {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        set: String,
    },
    /// Test d-separation, optionally in a mutilated graph.
    Dsep {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value = "")]
        z: String,
        /// Remove directed edges into these nodes first.
        #[arg(long, default_value = "")]
        cut_into: String,
        /// Remove directed edges out of these nodes first.
        #[arg(long, default_value = "")]
        cut_outof: String,
    },
    /// Parents, ancestors, descendants and their possible counterparts.
    Reach {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        set: String,
    },
    /// Identify f(y | do(x), z).
    Identify {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Enumerate the expressions f(y | do(x), z) takes across the class.
    Enumerate {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// List every leaf in branch order instead of counting duplicates.
        #[arg(long)]
        no_dedupe: bool,
    },
    /// Check identified expressions numerically on random discrete models.
    Verify {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Overridden by the MPDAG_ID_SEED environment variable.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 picks one per core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

enum Outcome {
    Success,
    NotIdentifiable,
    CheckFailed,
}

fn read_graph(path: &Path) -> Result<Pdag> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading --graph from stdin")?;
        s
    } else {
        std::fs::read_to_string(path).with_context(|| format!("--graph {}", path.display()))?
    };
    Pdag::parse_any(&text).with_context(|| format!("--graph {}", path.display()))
}

fn read_mpdag(path: &Path) -> Result<Mpdag> {
    let g = read_graph(path)?;
    Mpdag::new(g).with_context(|| format!("--graph {}", path.display()))
}

fn node_set(g: &Pdag, flag: &str, text: &str) -> Result<NodeSet> {
    g.parse_set(text).with_context(|| format!("--{flag} {text:?}"))
}

fn query(g: &Pdag, q: &QueryArgs) -> Result<Query> {
    let x = node_set(g, "x", &q.x)?;
    let y = node_set(g, "y", &q.y)?;
    let z = node_set(g, "z", &q.z)?;
    Query::new(g, x, y, z).context("--x, --y, --z")
}

fn list(g: &Pdag, s: &NodeSet) -> String {
    g.set_labels(s).join(",")
}

fn emit(json: bool, value: Value, text: Vec<String>) {
    if json {
        println!("{}", serde_json::to_string_pretty(&value).expect("JSON values serialize"));
    } else {
        for line in text {
            println!("{line}");
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let json = cli.json;
    match cli.command {
        Command::Complete { graph, orient } => {
            let g = read_graph(&graph.graph)?;
            let os = orient
                .iter()
                .map(|o| Orientation::parse(&g, o).with_context(|| format!("--orient {o:?}")))
                .collect::<Result<Vec<_>>>()?;
            let m = complete(&g, &os)?;
            emit(json, m.to_json_value(), vec![m.to_text().trim_end().to_string()]);
        }
        Command::Dags { graph, limit, cap } => {
            let g = read_graph(&graph.graph)?;
            let dags = enumerate_dags(&g, cap)?;
            let shown = &dags[..limit.unwrap_or(dags.len()).min(dags.len())];
            let mut text = vec![format!("# {} DAGs", dags.len())];
            for (i, d) in shown.iter().enumerate() {
                text.push(format!("# DAG {}", i + 1));
                text.push(d.edges_text().trim_end().to_string());
            }
            let value = json!({
                "count": dags.len(),
                "dags": shown.iter().map(|d| d.to_json_value()).collect::<Vec<_>>(),
            });
            emit(json, value, text);
        }
        Command::Pco { graph, set } => {
            let g = read_mpdag(&graph.graph)?;
            let d = node_set(&g, "set", &set)?;
            let buckets = pco(&g, &d)?;
            let text = buckets.iter().enumerate().map(|(i, b)| format!("{}: {}", i + 1, list(&g, b)));
            let value = json!({
                "buckets": buckets.iter().map(|b| render::labels(&g, b)).collect::<Vec<_>>(),
            });
            emit(json, value, text.collect());
        }
        Command::Dsep { graph, x, y, z, cut_into, cut_outof } => {
            let g = read_graph(&graph.graph)?;
            let (xs, ys, zs) = (node_set(&g, "x", &x)?, node_set(&g, "y", &y)?, node_set(&g, "z", &z)?);
            let into = node_set(&g, "cut-into", &cut_into)?;
            let outof = node_set(&g, "cut-outof", &cut_outof)?;
            let m = g.remove_edges_into(&into)?.remove_edges_out_of(&outof)?;
            let s = d_separated(&m, &xs, &ys, &zs).context("--x, --y, --z")?;
            match s.witness() {
                None => emit(json, json!({ "separated": true }), vec!["SEPARATED".into()]),
                Some(w) => {
                    let colliders: Vec<Vec<&str>> = w
                        .collider_paths
                        .iter()
                        .map(|p| p.iter().map(|v| m.label(*v)).collect())
                        .collect();
                    let value = json!({
                        "separated": false,
                        "path": w.render(&m),
                        "collider_paths": colliders,
                    });
                    emit(json, value, vec!["CONNECTED".into(), format!("path: {}", w.render(&m))]);
                }
            }
        }
        Command::Reach { graph, kind, set } => {
            let g = read_graph(&graph.graph)?;
            let s = node_set(&g, "set", &set)?;
            let (name, r) = match kind {
                Kind::Pa => ("pa", reach::parents(&g, &s)?),
                Kind::An => ("an", reach::ancestors(&g, &s)?),
                Kind::De => ("de", reach::descendants(&g, &s)?),
                Kind::Possan => ("possan", reach::possible_ancestors(&g, &s)?),
                Kind::Possde => ("possde", reach::possible_descendants(&g, &s)?),
            };
            let value = json!({
                "kind": name,
                "set": render::labels(&g, &s),
                "result": render::labels(&g, &r),
            });
            emit(json, value, vec![list(&g, &r)]);
        }
        Command::Identify { graph, query: qa, format } => {
            let g = read_mpdag(&graph.graph)?;
            let q = query(&g, &qa)?;
            match cidm(&g, &q)? {
                IdentificationResult::Identified(e) => {
                    let value = json!({
                        "identifiable": true,
                        "text": render::render(&g, &e, Format::Text),
                        "latex": render::render(&g, &e, Format::Latex),
                        "expression": render::expression_json(&g, &e),
                    });
                    emit(json, value, vec![render::render(&g, &e, format)]);
                }
                IdentificationResult::NotIdentifiable(c) => {
                    let value = json!({
                        "identifiable": false,
                        "certificate": render::certificate_json(&g, &c),
                    });
                    let mut text = vec!["NOT-IDENTIFIABLE".to_string()];
                    text.extend(render::certificate_text(&g, &c));
                    emit(json, value, text);
                    return Ok(Outcome::NotIdentifiable);
                }
            }
        }
        Command::Enumerate { graph, query: qa, format, no_dedupe } => {
            let g = read_mpdag(&graph.graph)?;
            let q = query(&g, &qa)?;
            let leaves = cidme_leaves(&g, &q)?;
            let es: Vec<_> = leaves.iter().map(|l| l.expression.clone()).collect();
            let style = RenderStyle { format, dedupe: !no_dedupe };
            let rows = render::render_multiset(&g, &es, style);
            let text = if no_dedupe {
                rows.iter().enumerate().map(|(i, (s, _))| format!("leaf {}: {s}", i + 1)).collect()
            } else {
                rows.iter().map(|(s, c)| format!("{c}x {s}")).collect()
            };
            let value = json!({
                "leaves": leaves.iter().map(|l| json!({
                    "text": render::render(&g, &l.expression, Format::Text),
                    "expression": render::expression_json(&g, &l.expression),
                    "graph": l.graph.to_json_value(),
                })).collect::<Vec<_>>(),
                "multiset": render::render_multiset(&g, &es, RenderStyle { format: Format::Text, dedupe: true })
                    .into_iter()
                    .map(|(s, c)| json!({ "text": s, "count": c }))
                    .collect::<Vec<_>>(),
            });
            emit(json, value, text);
        }
        Command::Verify { graph, query: qa, trials, seed, jobs } => {
            let g = read_mpdag(&graph.graph)?;
            let q = query(&g, &qa)?;
            let seed = match std::env::var(SEED_VAR) {
                Ok(s) => s.trim().parse().with_context(|| format!("{SEED_VAR}={s:?}"))?,
                Err(_) => seed,
            };
            let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
            let leaves = pool.install(|| cidme_leaves(&g, &q))?;
            let mut text = Vec::new();
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for (i, l) in leaves.iter().enumerate() {
                let r = pool.install(|| check_expression(&l.graph, &q, &l.expression, trials, seed))?;
                worst = worst.max(r.max_deviation);
                let expr = render::render(&g, &l.expression, Format::Text);
                text.push(format!(
                    "leaf {}: {expr}\n  dags: {}, trials: {}, evaluations: {}, max deviation: {:.3e}",
                    i + 1,
                    r.dags,
                    r.trials,
                    r.evaluations,
                    r.max_deviation
                ));
                rows.push(json!({
                    "text": expr,
                    "dags": r.dags,
                    "trials": r.trials,
                    "evaluations": r.evaluations,
                    "max_deviation": r.max_deviation,
                }));
            }
            let identifiable = leaves.len() == 1;
            let pass = worst <= TOLERANCE;
            text.insert(0, format!("identifiable: {identifiable}, seed: {seed}"));
            text.push(if pass { "PASS".into() } else { "FAIL".into() });
            let value = json!({
                "identifiable": identifiable,
                "seed": seed,
                "leaves": rows,
                "max_deviation": worst,
                "pass": pass,
            });
            emit(json, value, text);
            if !pass {
                return Ok(Outcome::CheckFailed);
            }
        }
    }
    Ok(Outcome::Success)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::NotIdentifiable) => ExitCode::from(3),
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

