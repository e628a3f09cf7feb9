//! `coarse-lab`: command-line front end.
//!
//! Exit codes: 0 success, 1 a mathematical negative (failed verification,
//! refusal, no witness), 2 a usage or input error.

mod io;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coarse_lab::amenability::{doubling_check, folner_search, Doubling, Strategy};
use coarse_lab::castle::{castle_from_tiling, invariance_defect, Castle, Comparison};
use coarse_lab::homology::{min_norm_fill, HomologyError};
use coarse_lab::monoid::{Bounds, Element, MonoidPresentation, Verdict};
use coarse_lab::selftest;
use coarse_lab::tiling::{
    tile_box_space, tile_interval, tile_sparse_subset, tile_stacked_product, verify_tiling, Tiling,
};
use coarse_lab::Rational;
use serde::Serialize;
use serde_json::{json, Value};

use io::{Document, SchemaError};

#[derive(Parser, Serialize)]
#[command(name = "coarse-lab", version, about = "Exact experiments on Følner tilings, castles, type semigroups and uniformly finite homology")]
struct Cli {
    /// Print only the JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Outer R-boundary and Følner ratio of a point set.
    Boundary {
        #[arg(long = "in", value_name = "SPACE")]
        input: PathBuf,
        #[arg(long, value_name = "SET")]
        set: PathBuf,
        #[arg(long = "R")]
        radius: u64,
    },
    /// Closed ball around a point.
    Ball {
        #[arg(long = "in", value_name = "SPACE")]
        input: PathBuf,
        #[arg(long)]
        center: String,
        #[arg(long = "R")]
        radius: u64,
    },
    /// Build a tiling by one of the explicit constructions.
    Tile {
        #[arg(long, value_enum)]
        strategy: TileStrategy,
        #[arg(long = "R")]
        radius: u64,
        #[arg(long)]
        epsilon: String,
        #[arg(long = "in", value_name = "SPACE")]
        input: PathBuf,
        #[arg(long, value_name = "TILING")]
        out: Option<PathBuf>,
        /// Treat a sparse set as a prefix of an infinite one.
        #[arg(long)]
        prefix: bool,
    },
    /// Check a tiling file: partition, ratios and diameters.
    VerifyTiling {
        #[arg(long = "in", value_name = "TILING")]
        input: PathBuf,
    },
    /// Bounded search for a Følner set in a window.
    Folner {
        #[arg(long = "in", value_name = "WINDOW")]
        input: PathBuf,
        #[arg(long = "R")]
        radius: u64,
        #[arg(long)]
        epsilon: String,
        #[arg(long, value_enum, default_value = "intervals")]
        strategy: SearchStrategy,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
    },
    /// Two disjoint R-translates of a set, or a Hall violator.
    Paradox {
        #[arg(long = "in", value_name = "WINDOW")]
        input: PathBuf,
        #[arg(long, value_name = "SET")]
        set: PathBuf,
        #[arg(long = "R")]
        radius: u64,
    },
    /// Minimum sup-norm 1-chain with prescribed boundary.
    HomologyFill {
        #[arg(long = "in", value_name = "WINDOW")]
        input: PathBuf,
        #[arg(long, value_name = "CHAIN")]
        chain: PathBuf,
        #[arg(long = "P")]
        propagation: u64,
    },
    #[command(subcommand)]
    Castle(CastleCommand),
    #[command(subcommand)]
    Monoid(MonoidCommand),
    /// Run the acceptance suite.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TileStrategy {
    Interval,
    Sparse,
    Stack,
    Box,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SearchStrategy {
    Balls,
    Intervals,
    Greedy,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CastleCommand {
    /// Report every structural violation.
    Validate {
        #[arg(long, value_name = "CASTLE")]
        castle: PathBuf,
    },
    /// Split towers so levels are adapted to the target sets.
    Refine {
        #[arg(long, value_name = "CASTLE")]
        castle: PathBuf,
        /// JSON array of atom arrays.
        #[arg(long, value_name = "TARGETS")]
        targets: PathBuf,
        #[arg(long, value_name = "CASTLE")]
        out: Option<PathBuf>,
    },
    /// Decide whether A is subequivalent to B.
    Compare {
        #[arg(long, value_name = "CASTLE")]
        castle: PathBuf,
        #[arg(long, value_name = "SET")]
        a: PathBuf,
        #[arg(long, value_name = "SET")]
        b: PathBuf,
    },
    /// Invariance defect of the orbits at radius R.
    Defect {
        #[arg(long, value_name = "CASTLE")]
        castle: PathBuf,
        #[arg(long = "in", value_name = "WINDOW")]
        input: PathBuf,
        #[arg(long = "R")]
        radius: u64,
    },
    /// The castle whose orbits are the tiles of a verified tiling.
    FromTiling {
        #[arg(long = "in", value_name = "TILING")]
        input: PathBuf,
        #[arg(long, value_name = "CASTLE")]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Serialize)]
struct MonoidArgs {
    #[arg(long, value_name = "PRESENTATION")]
    presentation: PathBuf,
    #[arg(long, default_value_t = 12)]
    depth: usize,
    #[arg(long, default_value_t = 20)]
    cap: u32,
    #[arg(long, default_value_t = 10)]
    zcap: u32,
    #[arg(long, default_value_t = 4)]
    nmax: u32,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MonoidCommand {
    /// Word problem u = v.
    Equal {
        #[command(flatten)]
        common: MonoidArgs,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
    },
    /// Algebraic preorder u ≤ v.
    Leq {
        #[command(flatten)]
        common: MonoidArgs,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
    },
    /// Sweep for a failure of almost unperforation.
    Aup {
        #[command(flatten)]
        common: MonoidArgs,
        #[arg(long, default_value_t = 3)]
        xcap: u32,
    },
    /// Proper infiniteness of x and of its multiples.
    Pinf {
        #[command(flatten)]
        common: MonoidArgs,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 4)]
        mcap: u32,
    },
    /// Refinement of a + b = c + d.
    Refine {
        #[command(flatten)]
        common: MonoidArgs,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        c: String,
        #[arg(long)]
        d: String,
    },
    /// Equality in the cancellative hull.
    Canc {
        #[command(flatten)]
        common: MonoidArgs,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
    },
}

/// What a command produced: the JSON result, a human summary, and whether
/// the answer was negative.
struct Outcome {
    result: Value,
    summary: Vec<String>,
    negative: bool,
}

impl Outcome {
    fn new(result: Value, negative: bool, summary: impl Into<String>) -> Self {
        Outcome {
            result,
            summary: vec![summary.into()],
            negative,
        }
    }
}

enum Failure {
    Usage(String),
    Schema(SchemaError),
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::Schema(e)
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<Document, Failure> {
    Ok(Document::read(path)?)
}

fn epsilon(text: &str) -> Result<Rational, Failure> {
    Rational::parse_positive(text).map_err(|e| Failure::Usage(format!("epsilon {text:?}: {e}")))
}

fn element(text: &str, rank: usize) -> Result<Element, Failure> {
    let entries = text
        .split(',')
        .map(|s| s.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(format!("element {text:?}: {e}")))?;
    if entries.len() != rank {
        return Err(Failure::Usage(format!(
            "element {text:?} has {} entries, the presentation has rank {rank}",
            entries.len()
        )));
    }
    Ok(Element(entries))
}

fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(usage)?;
    std::fs::write(path, text + "\n").map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn tiling_summary(t: &Tiling) -> Value {
    json!({
        "tiles": t.tiles.len(),
        "construction": t.construction,
        "diameter_bound": t.diameter_bound,
        "max_clean_ratio": t.max_clean_ratio(),
        "contaminated": t.meta.iter().filter(|m| m.contaminated).count(),
    })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Boundary { input, set, radius } => {
            let doc = read(input)?;
            let space = io::parse_space(&doc.root())?;
            let set_doc = read(set)?;
            let f = io::point_set(&space, &set_doc.root())?;
            let boundary = space.outer_boundary(&f, *radius).map_err(usage)?;
            let ratio = space.folner_ratio(&f, *radius).map_err(usage)?;
            Ok(Outcome::new(
                json!({ "boundary": io::labels(&space, &boundary), "size": f.len(), "ratio": ratio }),
                false,
                format!("|boundary| = {}, |F| = {}, ratio {ratio}", boundary.len(), f.len()),
            ))
        }
        Command::Ball { input, center, radius } => {
            let doc = read(input)?;
            let space = io::parse_space(&doc.root())?;
            let c = space.lookup(center).map_err(usage)?;
            let ball = space.ball(c, *radius).map_err(usage)?;
            Ok(Outcome::new(
                json!({ "ball": io::labels(&space, &ball) }),
                false,
                format!("|B_{radius}({center})| = {}", ball.len()),
            ))
        }
        Command::Tile {
            strategy,
            radius,
            epsilon: eps,
            input,
            out,
            prefix,
        } => {
            let eps = epsilon(eps)?;
            let doc = read(input)?;
            let root = doc.root();
            let (tiling, window_def) = match strategy {
                TileStrategy::Interval => {
                    let w = io::parse_window(&root)?;
                    (tile_interval(Arc::new(w), *radius, eps), root.value().clone())
                }
                TileStrategy::Stack => {
                    let w = io::parse_window(&root)?;
                    (tile_stacked_product(Arc::new(w), *radius, eps), root.value().clone())
                }
                TileStrategy::Sparse => {
                    let space = io::parse_space(&root)?;
                    let Some(values) = space.integer_values().map(<[i64]>::to_vec) else {
                        return Err(Failure::Usage("sparse tiling needs an {\"integers\": [...]} space".into()));
                    };
                    let def = json!({ "integers": values });
                    (tile_sparse_subset(values, *radius, eps, *prefix), def)
                }
                TileStrategy::Box => {
                    let moduli = io::moduli(&root.get("moduli")?)?;
                    let def = json!({ "moduli": moduli });
                    (tile_box_space(&moduli, *radius, eps), def)
                }
            };
            let tiling = tiling.map_err(usage)?;
            let file = io::tiling_to_json(&tiling, &window_def);
            let mut result = tiling_summary(&tiling);
            match out {
                Some(path) => write_json(path, &file)?,
                None => result["tiling"] = file,
            }
            let max = tiling.max_clean_ratio().map_or("none".into(), |r| r.to_string());
            Ok(Outcome::new(
                result,
                false,
                format!("{} tiles, max clean ratio {max}, diameter bound {}", tiling.tiles.len(), tiling.diameter_bound),
            ))
        }
        Command::VerifyTiling { input } => {
            let doc = read(input)?;
            let (tiling, _) = io::parse_tiling(&doc.root())?;
            match verify_tiling(&tiling) {
                Ok(report) => {
                    let space = tiling.space();
                    let failing: Vec<Value> = report
                        .failing
                        .iter()
                        .map(|&i| {
                            let r = &report.tiles[i];
                            json!({ "index": i, "first_point": space.label(tiling.tiles[i][0]), "ratio": r.ratio, "diam": r.diameter })
                        })
                        .collect();
                    let max = report.max_ratio.map_or("none".into(), |r| r.to_string());
                    let summary = format!(
                        "{}: {} tiles, {} contaminated, max clean ratio {max} against epsilon {}, {} failing",
                        if report.pass { "PASS" } else { "FAIL" },
                        report.tiles.len(),
                        report.contaminated,
                        tiling.epsilon,
                        failing.len()
                    );
                    Ok(Outcome::new(
                        json!({
                            "pass": report.pass,
                            "tiles": report.tiles.len(),
                            "contaminated": report.contaminated,
                            "max_ratio": report.max_ratio,
                            "max_diameter": report.max_diameter,
                            "diameter_bound": report.diameter_bound,
                            "epsilon": tiling.epsilon,
                            "failing": failing,
                        }),
                        !report.pass,
                        summary,
                    ))
                }
                Err(e) => Ok(Outcome::new(
                    json!({ "pass": false, "partition_error": e }),
                    true,
                    format!("FAIL: {e}"),
                )),
            }
        }
        Command::Folner {
            input,
            radius,
            epsilon: eps,
            strategy,
            budget,
        } => {
            let eps = epsilon(eps)?;
            let doc = read(input)?;
            let w = io::parse_window(&doc.root())?;
            let strategy = match strategy {
                SearchStrategy::Balls => Strategy::Balls,
                SearchStrategy::Intervals => Strategy::Intervals,
                SearchStrategy::Greedy => Strategy::Greedy,
            };
            let out = folner_search(&w, *radius, eps, strategy, *budget).map_err(usage)?;
            let summary = if out.found {
                format!("found |F| = {} with ratio {} < {eps}", out.best.set.len(), out.best.ratio)
            } else {
                format!(
                    "none among {} candidates examined; best ratio {} (not a proof of non-amenability)",
                    out.examined, out.best.ratio
                )
            };
            Ok(Outcome::new(
                json!({
                    "found": out.found,
                    "set": io::labels(w.space(), &out.best.set),
                    "ratio": out.best.ratio,
                    "examined": out.examined,
                }),
                !out.found,
                summary,
            ))
        }
        Command::Paradox { input, set, radius } => {
            let doc = read(input)?;
            let w = io::parse_window(&doc.root())?;
            let set_doc = read(set)?;
            let f = io::point_set(w.space(), &set_doc.root())?;
            let space = w.space();
            let map = |pairs: &[(usize, usize)]| -> Value {
                pairs.iter().map(|&(x, y)| (space.label(x), json!(space.label(y)))).collect::<serde_json::Map<_, _>>().into()
            };
            match doubling_check(&w, &f, *radius).map_err(usage)? {
                Doubling::Witness(wit) => Ok(Outcome::new(
                    json!({ "kind": "witness", "R": radius, "phi1": map(&wit.phi1), "phi2": map(&wit.phi2) }),
                    false,
                    format!("witness: two disjoint {radius}-translates of {} points", f.len()),
                )),
                Doubling::Violator(v) => Ok(Outcome::new(
                    json!({ "kind": "violator", "R": radius, "set": io::labels(space, &v.set), "neighbourhood": v.neighbourhood }),
                    true,
                    format!("Hall violator: |B_R(S)| = {} < 2|S| = {}", v.neighbourhood, 2 * v.set.len()),
                )),
            }
        }
        Command::HomologyFill { input, chain, propagation } => {
            let doc = read(input)?;
            let w = io::parse_window(&doc.root())?;
            let chain_doc = read(chain)?;
            let c = io::parse_zero_chain(w.space(), &chain_doc.root())?;
            match min_norm_fill(&w, &c, *propagation) {
                Ok(fill) => Ok(Outcome::new(
                    json!({ "norm": fill.norm, "chain": io::one_chain_to_json(w.space(), &fill.chain) }),
                    false,
                    format!("minimum sup norm {}", fill.norm),
                )),
                Err(HomologyError::Infeasible { component, total }) => Ok(Outcome::new(
                    json!({ "infeasible": { "component": io::labels(w.space(), &component), "total": total } }),
                    true,
                    format!("infeasible: a closed component of {} points carries mass {total}", component.len()),
                )),
                Err(e) => Err(usage(e)),
            }
        }
        Command::Castle(cmd) => run_castle(cmd),
        Command::Monoid(cmd) => run_monoid(cmd),
        Command::Selftest => {
            let results = selftest::run_all(cli.seed);
            let pass = results.iter().all(|r| r.pass);
            Ok(Outcome {
                result: json!({
                    "pass": pass,
                    "criteria": results
                        .iter()
                        .map(|r| json!({ "id": r.id, "name": r.name, "pass": r.pass, "detail": r.detail }))
                        .collect::<Vec<_>>(),
                }),
                summary: results.iter().map(ToString::to_string).collect(),
                negative: !pass,
            })
        }
    }
}

fn load_castle(path: &Path) -> Result<Castle, Failure> {
    Ok(io::parse_castle(&read(path)?.root())?)
}

fn run_castle(cmd: &CastleCommand) -> Result<Outcome, Failure> {
    match cmd {
        CastleCommand::Validate { castle } => {
            let doc = read(castle)?;
            let c = io::parse_castle_unchecked(&doc.root())?;
            let violations = c.validate();
            let summary = if violations.is_empty() {
                format!("valid: {} towers, {} orbits", c.towers.len(), c.orbit_count())
            } else {
                violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
            };
            Ok(Outcome::new(
                json!({ "valid": violations.is_empty(), "violations": violations }),
                !violations.is_empty(),
                summary,
            ))
        }
        CastleCommand::Refine { castle, targets, out } => {
            let c = load_castle(castle)?;
            let doc = read(targets)?;
            let targets = doc
                .root()
                .items()?
                .iter()
                .map(io::atom_set)
                .collect::<Result<Vec<BTreeSet<String>>, _>>()?;
            let refined = c.refine(&targets).map_err(usage)?;
            let value = io::castle_to_json(&refined);
            let mut result = json!({ "towers": refined.towers.len() });
            match out {
                Some(path) => write_json(path, &value)?,
                None => result["castle"] = value,
            }
            Ok(Outcome::new(
                result,
                false,
                format!("{} towers refined into {}", c.towers.len(), refined.towers.len()),
            ))
        }
        CastleCommand::Compare { castle, a, b } => {
            let c = load_castle(castle)?;
            let a = io::atom_set(&read(a)?.root())?;
            let b = io::atom_set(&read(b)?.root())?;
            match c.compare(&a, &b).map_err(usage)? {
                Comparison::Witness { e_counts, f_counts, moves } => Ok(Outcome::new(
                    json!({ "outcome": "witness", "E": e_counts, "F": f_counts, "moves": moves }),
                    false,
                    format!("A is subequivalent to B: E = {e_counts:?} <= F = {f_counts:?}"),
                )),
                Comparison::Refusal(r) => Ok(Outcome::new(
                    serde_json::to_value(&r).map(|mut v| {
                        v["outcome"] = json!("refusal");
                        v
                    }).map_err(usage)?,
                    true,
                    format!(
                        "refused at tower {} (from input tower {}): E = {} > F = {}",
                        r.tower, r.origin, r.e, r.f
                    ),
                )),
            }
        }
        CastleCommand::Defect { castle, input, radius } => {
            let c = load_castle(castle)?;
            let w = io::parse_window(&read(input)?.root())?;
            let d = invariance_defect(&c, &w, *radius).map_err(usage)?;
            Ok(Outcome::new(
                serde_json::to_value(&d).map_err(usage)?,
                false,
                format!("defect {} over {} orbits ({} contaminated skipped)", d.value, d.measured, d.contaminated),
            ))
        }
        CastleCommand::FromTiling { input, out } => {
            let doc = read(input)?;
            let (tiling, _) = io::parse_tiling(&doc.root())?;
            match castle_from_tiling(&tiling) {
                Ok(c) => {
                    let value = io::castle_to_json(&c);
                    let mut result = json!({
                        "towers": c.towers.iter().map(|t| json!({ "height": t.height, "columns": t.columns.len() })).collect::<Vec<_>>(),
                    });
                    match out {
                        Some(path) => write_json(path, &value)?,
                        None => result["castle"] = value,
                    }
                    Ok(Outcome::new(result, false, format!("{} towers, {} orbits", c.towers.len(), c.orbit_count())))
                }
                Err(e) => Ok(Outcome::new(json!({ "error": e.to_string() }), true, e.to_string())),
            }
        }
    }
}

fn verdict_outcome<C: Serialize>(what: String, v: Verdict<C>) -> Result<Outcome, Failure> {
    let label = v.label();
    Ok(Outcome::new(
        serde_json::to_value(&v).map_err(usage)?,
        !v.is_yes(),
        format!("{what}: {label}"),
    ))
}

fn run_monoid(cmd: &MonoidCommand) -> Result<Outcome, Failure> {
    let common = match cmd {
        MonoidCommand::Equal { common, .. }
        | MonoidCommand::Leq { common, .. }
        | MonoidCommand::Aup { common, .. }
        | MonoidCommand::Pinf { common, .. }
        | MonoidCommand::Refine { common, .. }
        | MonoidCommand::Canc { common, .. } => common,
    };
    let p: MonoidPresentation = io::parse_presentation(&read(&common.presentation)?.root())?;
    let bounds = Bounds {
        depth: common.depth,
        cap: common.cap,
        z_cap: common.zcap,
        n_max: common.nmax,
    };
    let el = |s: &str| element(s, p.rank);
    match cmd {
        MonoidCommand::Equal { u, v, .. } => {
            verdict_outcome(format!("{u} = {v}"), p.equal(&el(u)?, &el(v)?, &bounds).map_err(usage)?)
        }
        MonoidCommand::Leq { u, v, .. } => {
            verdict_outcome(format!("{u} <= {v}"), p.leq(&el(u)?, &el(v)?, &bounds).map_err(usage)?)
        }
        MonoidCommand::Canc { u, v, .. } => verdict_outcome(
            format!("{u} ~ {v} in the cancellative hull"),
            p.cancellative_equal(&el(u)?, &el(v)?, &bounds).map_err(usage)?,
        ),
        MonoidCommand::Refine { a, b, c, d, .. } => verdict_outcome(
            "refinement".into(),
            p.refinement_instance(&el(a)?, &el(b)?, &el(c)?, &el(d)?, &bounds).map_err(usage)?,
        ),
        MonoidCommand::Aup { xcap, .. } => {
            let out = p.check_almost_unperforated(*xcap, &bounds).map_err(usage)?;
            let summary = match &out.counterexample {
                Some(c) => format!("counterexample: x = {}, y = {}, n = {}", c.x, c.y, c.n),
                None => format!(
                    "none within bounds (x_cap {xcap}, n_max {}); {} triples undecided",
                    bounds.n_max, out.inconclusive
                ),
            };
            Ok(Outcome::new(
                serde_json::to_value(&out).map_err(usage)?,
                out.counterexample.is_some(),
                summary,
            ))
        }
        MonoidCommand::Pinf { x, mcap, .. } => {
            let out = p.properly_infinite(&el(x)?, *mcap, &bounds).map_err(usage)?;
            let multiple = out.least_multiple.as_ref().map_or("none".to_string(), |(m, _)| m.to_string());
            let summary = format!("2x <= x: {}; least multiple m <= {mcap} with 2mx <= mx: {multiple}", out.direct.label());
            Ok(Outcome::new(
                serde_json::to_value(&out).map_err(usage)?,
                !out.direct.is_yes(),
                summary,
            ))
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(text) = std::env::var("COARSE_LAB_THREADS") {
        let n: usize = text
            .parse()
            .map_err(|_| Failure::Usage(format!("COARSE_LAB_THREADS={text:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(usage)?;
    }
    Ok(())
}

fn command_name(cmd: &Command) -> String {
    match cmd {
        Command::Castle(c) => format!("castle {}", first_key(c)),
        Command::Monoid(c) => format!("monoid {}", first_key(c)),
        other => first_key(other),
    }
}

fn first_key<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::Object(m)) => m.keys().next().cloned().unwrap_or_default(),
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let header = json!({
        "tool": "coarse-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command_name(&cli.command),
        "seed": cli.seed,
        "params": cli.command,
    });
    let outcome = configure_threads().and_then(|()| run(&cli));
    let (report, summary, code) = match outcome {
        Ok(o) => {
            let status = if o.negative { "negative" } else { "ok" };
            (
                json!({ "header": header, "status": status, "result": o.result }),
                o.summary,
                if o.negative { 1 } else { 0 },
            )
        }
        Err(f) => {
            let message = match f {
                Failure::Usage(m) => m,
                Failure::Schema(e) => e.to_string(),
            };
            (
                json!({ "header": header, "status": "error", "error": message }),
                vec![format!("error: {message}")],
                2,
            )
        }
    };
    let text = serde_json::to_string_pretty(&report).unwrap_or_default();
    if let Some(path) = &cli.report {
        if let Err(e) = std::fs::write(path, text.clone() + "\n") {
            eprintln!("error: cannot write report {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if cli.json {
        println!("{text}");
    } else if code == 2 {
        for line in summary {
            eprintln!("{line}");
        }
    } else {
        for line in summary {
            println!("{line}");
        }
    }
    ExitCode::from(code)
}
