//! Command-line front end.
//!
//! Exit codes: 0 on success (findings such as GS witnesses, deficits, μ
//! violations or atypical intersections are successful reports), 1 on
//! domain or budget errors, 2 on malformed input or usage.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::amalgam::{self, BuildConfig, ExtensionTemplate, Level};
use crate::budget::Budget;
use crate::collapse::{self, MuFunction};
use crate::error::{Error, Result};
use crate::geometry::{self, Dim, GeomClosure};
use crate::matroid;
use crate::pointset::PointSet;
use crate::predim::{self, GsOutcome, Predim, PredimensionSpec};
use crate::structures::{self, Embedding, PreStructure};
use crate::toric::{self, IntMatrix, LatticeCoset};

#[derive(Parser, Debug)]
#[command(name = "predim", version, about = "Predimension constructions and torus-intersection lattice arithmetic")]
struct Cli {
    /// Print a single line of JSON with sorted keys.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest domain on which subset enumeration is attempted.
    #[arg(long, global = true, default_value_t = 20)]
    max_points: usize,
    /// Largest number of subsets a single enumeration may visit.
    #[arg(long, global = true, default_value_t = 1 << 24)]
    max_subsets: u128,
    /// Wall-clock limit for long searches.
    #[arg(long, global = true)]
    timeout_ms: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Source {
    /// Structure file.
    #[arg(long)]
    structure: PathBuf,
    /// Predimension preset; defaults to the one declared in the structure.
    #[arg(long)]
    spec: Option<String>,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(long, default_value = "trivial_r")]
    spec: String,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    #[arg(long, default_value_t = 12)]
    cap: usize,
    #[arg(long, default_value_t = 2)]
    level: usize,
    /// Extra template points beyond the level.
    #[arg(long, default_value_t = 0)]
    template_cap: usize,
    /// Write the trace here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// δ(X).
    Delta {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value = "")]
        set: String,
    },
    /// δ(B/A) = δ(A ∪ B) − δ(A).
    DeltaRel {
        #[command(flatten)]
        src: Source,
        #[arg(long = "b")]
        b: String,
        #[arg(long = "a", default_value = "")]
        a: String,
    },
    /// δ ≥ 0 on every subset, or a minimal witness.
    GsCheck {
        #[command(flatten)]
        src: Source,
    },
    /// Derived dimension ∂(X).
    Partial {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value = "")]
        set: String,
    },
    /// Whether δ(X) = ∂(X).
    Strong {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value = "")]
        set: String,
    },
    /// Least strong superset of X.
    Closure {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value = "")]
        set: String,
    },
    /// Whether an embedding preserves ∂ on every subset.
    EmbedCheck {
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// JSON object mapping source labels to target labels; defaults to equal labels.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Free amalgam of two extensions of a common strong base.
    Amalgamate {
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        left_map: Option<PathBuf>,
        #[arg(long)]
        right_map: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extension templates by size and relative predimension.
    Templates {
        #[arg(long)]
        base_size: usize,
        #[arg(long)]
        ext_size: usize,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        min_delta: i64,
        #[arg(long, default_value_t = i64::MAX, allow_hyphen_values = true)]
        max_delta: i64,
    },
    /// Unrealized (strong anchor, template) pairs.
    Richness {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 2)]
        level: usize,
        #[arg(long, default_value_t = 0)]
        template_cap: usize,
    },
    /// Seeded approximation of the generic structure.
    Generic {
        #[command(flatten)]
        build: BuildArgs,
    },
    /// The generic schedule replayed under μ bounds.
    Collapse {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        mu: PathBuf,
    },
    /// Zero-minimal copy counts exceeding μ.
    MuCheck {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        mu: PathBuf,
        #[arg(long, default_value_t = collapse::DEFAULT_MU_EXT)]
        max_ext: usize,
    },
    /// max over tuples of ∂(C ∪ tuple) − ∂(C).
    Dim {
        #[command(flatten)]
        src: Source,
        /// JSON list of label lists.
        #[arg(long)]
        tuples: PathBuf,
        #[arg(long, default_value = "")]
        over: String,
    },
    /// Points of dimension zero over A.
    GeomClosure {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value = "")]
        set: String,
    },
    /// Pregeometry axioms of the geometric closure.
    Pregeometry {
        #[command(flatten)]
        src: Source,
    },
    /// Rank axioms of a declared oracle.
    MatroidVerify {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        oracle: String,
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Integer lattices and torsion cosets of subtori.
    #[command(subcommand)]
    Torus(TorusCommand),
}

#[derive(Subcommand, Debug)]
enum TorusCommand {
    /// Smith normal form U·A·V = D of a JSON row list.
    Snf { matrix: PathBuf },
    /// Dimension and component count of A ∩ B.
    Intersect { a: PathBuf, b: PathBuf },
    /// Expected against actual dimension of W ∩ S.
    Typical { w: PathBuf, s: PathBuf },
    /// Certificate family for W and its coverage check.
    Tau {
        w: PathBuf,
        #[arg(long, default_value_t = 2)]
        bound: i64,
        /// Random subgroups checked in addition to the exhaustive scan.
        #[arg(long, default_value_t = 100)]
        random: usize,
        /// Skip the exhaustive scan over one- and two-generator subgroups.
        #[arg(long)]
        no_exhaustive: bool,
    },
}

/// A command's result: JSON for `--json`, text otherwise.
struct Report {
    value: Value,
    text: String,
}

impl Report {
    fn with_text(value: Value, text: impl Into<String>) -> Self {
        Report { value, text: text.into() }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut budget = Budget::new(cli.max_points, cli.max_subsets);
    if let Some(ms) = cli.timeout_ms {
        budget = budget.with_timeout_ms(ms);
    }
    match execute(&cli, &budget) {
        Ok(r) => {
            let line = if cli.json {
                serde_json::to_string(&r.value).expect("json")
            } else {
                r.text
            };
            let _ = writeln!(out, "{}", line.trim_end());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_input() {
                2
            } else {
                1
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::input(path.display().to_string(), e.to_string()))
}

fn at<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse(p) => Error::input(path.display().to_string(), p.to_string()),
        Error::Input { path: inner, message } => Error::input(format!("{}: {inner}", path.display()), message),
        other => other,
    })
}

fn load(path: &Path) -> Result<PreStructure> {
    let text = read(path)?;
    at(path, structures::load_structure(text.as_bytes()))
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::input(path.display().to_string(), e.to_string()))
}

fn resolve_spec(flag: Option<&str>, m: Option<&PreStructure>) -> Result<PredimensionSpec> {
    match flag.or_else(|| m.and_then(PreStructure::declared_spec)) {
        Some(s) => s.parse().map_err(|e: Error| Error::input("--spec", e.to_string())),
        None => Err(Error::input("--spec", "no preset given and none declared in the structure")),
    }
}

fn parse_set(m: &PreStructure, s: &str) -> Result<PointSet> {
    let labels: Vec<&str> = s.split(',').map(str::trim).filter(|l| !l.is_empty()).collect();
    m.set_of(&labels).map_err(|e| Error::input("--set", e.to_string()))
}

fn load_map(path: &Path, source: &PreStructure, target: &PreStructure) -> Result<Embedding> {
    let text = read(path)?;
    let map: BTreeMap<String, String> = at(path, serde_json::from_str(&text).map_err(Error::from))?;
    at(path, Embedding::from_label_map(source, target, &map))
}

fn labels(m: &PreStructure, s: PointSet) -> Value {
    json!(m.labels_of(s))
}

fn braces(m: &PreStructure, s: PointSet) -> String {
    format!("{{{}}}", m.labels_of(s).join(","))
}

fn execute(cli: &Cli, budget: &Budget) -> Result<Report> {
    match &cli.command {
        Command::Delta { src, set } => with_predim(src, budget, |pd, m| {
            let v = pd.delta(parse_set(m, set)?)?;
            Ok(Report::with_text(json!({ "delta": v }), v.to_string()))
        }),
        Command::DeltaRel { src, b, a } => with_predim(src, budget, |pd, m| {
            let v = pd.delta_rel(parse_set(m, b)?, parse_set(m, a)?)?;
            Ok(Report::with_text(json!({ "delta_rel": v }), v.to_string()))
        }),
        Command::GsCheck { src } => with_predim(src, budget, |pd, m| {
            Ok(match pd.gs_check()? {
                GsOutcome::Ok => Report::with_text(json!({ "ok": true }), "ok"),
                GsOutcome::Witness(w) => Report::with_text(
                    json!({ "ok": false, "witness": labels(m, w) }),
                    format!("violated: δ{} = {}", braces(m, w), pd.delta_unchecked(w)),
                ),
            })
        }),
        Command::Partial { src, set } => with_predim(src, budget, |pd, m| {
            let v = pd.d_partial(parse_set(m, set)?)?;
            Ok(Report::with_text(json!({ "partial": v }), v.to_string()))
        }),
        Command::Strong { src, set } => with_predim(src, budget, |pd, m| {
            let v = pd.is_strong(parse_set(m, set)?)?;
            Ok(Report::with_text(json!({ "strong": v }), v.to_string()))
        }),
        Command::Closure { src, set } => with_predim(src, budget, |pd, m| {
            let c = pd.strong_closure(parse_set(m, set)?)?;
            Ok(Report::with_text(json!({ "closure": labels(m, c) }), braces(m, c)))
        }),
        Command::EmbedCheck { spec, source, target, map } => {
            let m = load(source)?;
            let l = load(target)?;
            let spec = resolve_spec(spec.as_deref(), Some(&m))?;
            let e = match map {
                Some(p) => load_map(p, &m, &l)?,
                None => Embedding::by_labels(&m, &l)?,
            };
            let v = predim::is_strong_embedding(&spec, &m, &l, &e, budget)?;
            Ok(Report::with_text(json!({ "strong": v }), v.to_string()))
        }
        Command::Amalgamate { spec, base, left, right, left_map, right_map, out } => {
            let a = load(base)?;
            let b = load(left)?;
            let c = load(right)?;
            let spec = resolve_spec(spec.as_deref(), Some(&b))?;
            let eb = match left_map {
                Some(p) => load_map(p, &a, &b)?,
                None => Embedding::by_labels(&a, &b)?,
            };
            let ec = match right_map {
                Some(p) => load_map(p, &a, &c)?,
                None => Embedding::by_labels(&a, &c)?,
            };
            let d = amalgam::free_amalgam(&spec, &a, &b, &c, &eb, &ec, budget)?;
            let file = structures::serialize(&d.structure);
            let value = json!({
                "structure": serde_json::to_value(d.structure.to_file())?,
                "left": d.left.to_label_map(&b, &d.structure),
                "right": d.right.to_label_map(&c, &d.structure),
            });
            match out {
                Some(p) => {
                    write_out(p, &file)?;
                    Ok(Report::with_text(value, format!("wrote {} ({} points)", p.display(), d.structure.n())))
                }
                None => Ok(Report::with_text(value, file)),
            }
        }
        Command::Templates { base_size, ext_size, min_delta, max_delta } => {
            let ts = amalgam::enumerate_templates(*base_size, *ext_size, (*min_delta, *max_delta), budget)?;
            let rows: Vec<Value> = ts.iter().map(template_json).collect();
            let text = ts.iter().map(|t| format!("{}\t{}\tδ={}", t.hash(), t.code(), t.rel_delta())).collect::<Vec<_>>();
            Ok(Report::with_text(Value::Array(rows), text.join("\n")))
        }
        Command::Richness { src, level, template_cap } => {
            let m = load(&src.structure)?;
            let spec = resolve_spec(src.spec.as_deref(), Some(&m))?;
            let lv = Level { k: *level, cap: *template_cap };
            let d = amalgam::richness_deficit(&spec, &m, lv, budget)?;
            let recs: Vec<_> = d.iter().map(|x| x.record(&m)).collect();
            let text = if recs.is_empty() {
                "deficit empty".to_string()
            } else {
                recs.iter()
                    .map(|r| format!("[{}]\t{}", r.anchor.join(","), r.template))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            Ok(Report::with_text(json!({ "count": recs.len(), "deficit": recs }), text))
        }
        Command::Generic { build } => {
            let (spec, config) = build_config(build, cli.seed)?;
            let t = amalgam::generic_build(&spec, config, budget)?;
            trace_report(&t, build.out.as_deref())
        }
        Command::Collapse { build, mu } => {
            let (spec, config) = build_config(build, cli.seed)?;
            let mu = load_mu(mu)?;
            let t = collapse::collapse_build(&spec, &mu, config, budget)?;
            trace_report(&t, build.out.as_deref())
        }
        Command::MuCheck { src, mu, max_ext } => {
            let m = load(&src.structure)?;
            let spec = resolve_spec(src.spec.as_deref(), Some(&m))?;
            let mu = load_mu(mu)?;
            let v = collapse::mu_admissible(&spec, &m, &mu, *max_ext, budget)?;
            let text = if v.is_empty() {
                "ok".to_string()
            } else {
                v.iter()
                    .map(|x| format!("[{}]\t{}\t{} > {}", x.anchor.join(","), x.template, x.count, x.bound))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            Ok(Report::with_text(json!({ "ok": v.is_empty(), "violations": v }), text))
        }
        Command::Dim { src, tuples, over } => with_predim(src, budget, |pd, m| {
            let text = read(tuples)?;
            let rows: Vec<Vec<String>> = at(tuples, serde_json::from_str(&text).map_err(Error::from))?;
            let idx = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|l| m.index_of(l).ok_or_else(|| Error::input(tuples.display().to_string(), format!("unknown point '{l}'"))))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(match geometry::dim_set(pd, &idx, parse_set(m, over)?)? {
                Dim::Empty => Report::with_text(json!({ "dim": null, "empty": true }), "empty"),
                Dim::Finite(v) => Report::with_text(json!({ "dim": v, "empty": false }), v.to_string()),
            })
        }),
        Command::GeomClosure { src, set } => with_predim(src, budget, |pd, m| {
            let c = geometry::geom_closure(pd, parse_set(m, set)?)?;
            Ok(Report::with_text(json!({ "closure": labels(m, c) }), braces(m, c)))
        }),
        Command::Pregeometry { src } => with_predim(src, budget, |pd, _| {
            let r = geometry::verify_pregeometry(&GeomClosure(pd), budget)?;
            let mut value = serde_json::to_value(&r)?;
            value["ok"] = json!(r.is_empty());
            let text = format!("{} sets checked, {} violations", r.checked_sets, r.violations.len());
            Ok(Report::with_text(value, text))
        }),
        Command::MatroidVerify { structure, oracle, max_size } => {
            let m = load(structure)?;
            let o = m.oracle(oracle).map_err(|e| Error::input("--oracle", e.to_string()))?;
            let k = max_size.unwrap_or(o.oracle.ground().len());
            let r = matroid::verify_matroid(&o.oracle, k, budget)?;
            let mut value = serde_json::to_value(&r)?;
            value["ok"] = json!(r.is_empty());
            let text = format!("{} subset pairs checked, {} violations", r.checked_pairs, r.violations.len());
            Ok(Report::with_text(value, text))
        }
        Command::Torus(t) => torus(t, cli.seed),
    }
}

fn with_predim(
    src: &Source,
    budget: &Budget,
    f: impl FnOnce(&Predim<'_>, &PreStructure) -> Result<Report>,
) -> Result<Report> {
    let m = load(&src.structure)?;
    let spec = resolve_spec(src.spec.as_deref(), Some(&m))?;
    let pd = Predim::new(&spec, &m)?.with_budget(budget.clone());
    f(&pd, &m)
}

fn template_json(t: &ExtensionTemplate) -> Value {
    json!({ "code": t.code(), "id": t.id(), "hash": t.hash(), "rel_delta": t.rel_delta() })
}

fn build_config(b: &BuildArgs, seed: u64) -> Result<(PredimensionSpec, BuildConfig)> {
    let spec = resolve_spec(Some(&b.spec), None)?;
    let level = Level { k: b.level, cap: b.template_cap };
    Ok((spec, BuildConfig { steps: b.steps, size_cap: b.cap, level, seed }))
}

fn load_mu(path: &Path) -> Result<MuFunction> {
    let text = read(path)?;
    at(path, MuFunction::from_json(&text))
}

fn trace_report(t: &amalgam::BuildTrace, out: Option<&Path>) -> Result<Report> {
    let last = t.last()?;
    let summary = json!({
        "stages": t.stages.len(),
        "points": last.n(),
        "triples": last.triples().len(),
        "realized": t.realized.len(),
        "skipped": t.skipped.len(),
    });
    let text = format!(
        "{} stages, final stage {} points / {} triples, {} realized, {} skipped",
        t.stages.len(),
        last.n(),
        last.triples().len(),
        t.realized.len(),
        t.skipped.len()
    );
    match out {
        Some(p) => {
            write_out(p, &t.to_json())?;
            Ok(Report::with_text(summary, text))
        }
        None => Ok(Report::with_text(serde_json::to_value(t)?, t.to_json())),
    }
}

fn load_coset(path: &Path) -> Result<LatticeCoset> {
    let text = read(path)?;
    at(path, LatticeCoset::from_json(&text))
}

fn torus(t: &TorusCommand, seed: u64) -> Result<Report> {
    match t {
        TorusCommand::Snf { matrix } => {
            let text = read(matrix)?;
            let a: IntMatrix = at(matrix, serde_json::from_str(&text).map_err(Error::from))?;
            let s = toric::snf(&a);
            let diag: Vec<String> = s.diagonal().iter().map(ToString::to_string).collect();
            let mut value = serde_json::to_value(&s)?;
            value["rank"] = json!(s.rank());
            Ok(Report::with_text(value, format!("diagonal: [{}]", diag.join(", "))))
        }
        TorusCommand::Intersect { a, b } => {
            let i = toric::intersect_cosets(&load_coset(a)?, &load_coset(b)?)?;
            let text = if i.is_empty() {
                "empty".to_string()
            } else {
                format!("dim {}, {} components", i.dim, i.components)
            };
            Ok(Report::with_text(serde_json::to_value(&i)?, text))
        }
        TorusCommand::Typical { w, s } => match toric::typicality(&load_coset(w)?, &load_coset(s)?)? {
            None => Ok(Report::with_text(json!({ "empty": true }), "empty intersection")),
            Some(t) => {
                let text = format!(
                    "expected {}, actual {}, {} (defect {})",
                    t.expected,
                    t.actual,
                    if t.atypical { "atypical" } else { "typical" },
                    t.defect
                );
                Ok(Report::with_text(serde_json::to_value(&t)?, text))
            }
        },
        TorusCommand::Tau { w, bound, random, no_exhaustive } => {
            let text = read(w)?;
            let members = at(w, LatticeCoset::list_from_json(&text))?;
            let n = members.first().map_or(0, LatticeCoset::ambient);
            if members.iter().any(|m| m.ambient() != n) {
                return Err(Error::input(w.display().to_string(), "members differ in ambient dimension"));
            }
            let tau = toric::tau_family(&members);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut subgroups = if *no_exhaustive { Vec::new() } else { toric::exhaustive_subgroups(n, *bound) };
            subgroups.extend(toric::random_subgroups(&mut rng, n, *bound, *random));
            let report = toric::verify_tau(&members, &tau, subgroups)?;
            let text = format!(
                "{} subtori in τ; {} subgroups, {} atypical intersections, {} uncovered",
                tau.len(),
                report.subgroups,
                report.atypical,
                report.uncovered.len()
            );
            Ok(Report::with_text(
                json!({ "tau": tau, "covered": report.is_covered(), "report": report }),
                text,
            ))
        }
    }
}
