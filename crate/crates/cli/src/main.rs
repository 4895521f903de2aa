//! `cms`: command-line frontend for certified computations on presented
//! compact metric spaces.

mod selftest;

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use cms_core::convex::{self, BodyFile, ConvexBody, IsoSchedule};
use cms_core::expr::{self, Window};
use cms_core::frechet::{self, Curve, CurveFile, Orientation, Topology};
use cms_core::functions::{eval_from_graph, graph_from_function};
use cms_core::optimize::{maximize, OptProblem};
use cms_core::spaces::{covering_check, cube, pair, real_point, reals, rounding_check, unpair, SpaceId};
use cms_core::{Dyadic, DyadicInterval, PointName};

/// Decimal digits printed next to exact dyadic values.
const DECIMAL_DIGITS: usize = 12;

#[derive(Parser, Debug)]
#[command(name = "cms", version, about = "Certified computation on presented compact metric spaces")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Args, Debug)]
struct Precision {
    /// Target precision n: enclosures are at most 2^-n wide.
    #[arg(long, short = 'n', default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=200))]
    precision: u32,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enclose the Fréchet distance between two curve files.
    Frechet {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        precision: Precision,
        #[arg(long, default_value = "oriented")]
        orientation: Orientation,
        /// Also print the coupling as sample index pairs.
        #[arg(long)]
        witness: bool,
    },
    /// Enclose the Euclidean Hausdorff distance between two convex bodies.
    Hausdorff {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        precision: Precision,
    },
    /// Exact volume (area in the plane) of a convex body.
    Volume {
        #[arg(long)]
        body: PathBuf,
    },
    /// Enclose the boundary measure of a convex body.
    Surface {
        #[arg(long)]
        body: PathBuf,
        #[command(flatten)]
        precision: Precision,
    },
    /// Enclose the largest area of a planar convex body with perimeter 1.
    Isoperimetric {
        #[command(flatten)]
        precision: Precision,
        /// Regular polygons with up to this many vertices are searched.
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(3..=4096))]
        max_gon: u64,
        /// Skip the scale refinement of the best polygon.
        #[arg(long)]
        no_refine: bool,
    },
    /// Maximize an objective subject to `constraint <= 0` over the unit cube.
    Optimize {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=8))]
        dim: u64,
        #[arg(long)]
        objective: String,
        #[arg(long)]
        constraint: String,
        #[command(flatten)]
        precision: Precision,
        /// Maximum number of cell bisections.
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
    },
    /// Evaluate an expression directly and through its graph name.
    Eval {
        #[arg(long)]
        expr: String,
        /// Comma-separated dyadic coordinates in the unit cube.
        #[arg(long)]
        point: String,
        /// Cube dimension; defaults to the number of coordinates given.
        #[arg(long)]
        dim: Option<usize>,
        #[command(flatten)]
        precision: Precision,
    },
    /// Validate covering, rounding and pairing contracts of a space.
    SpacesCheck {
        /// interval, circle, cantor, cube:d or product(X,Y)
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 6)]
        max_level: u32,
    },
    /// Run the randomized property suite.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Random cases per property.
        #[arg(long, default_value_t = 40)]
        cases: usize,
    },
}

/// A failure the user can act on; always exit code 1.
#[derive(Debug)]
struct Failure(String);

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<Report, Failure>;

/// Ordered key/value output rendered as text or JSON.
#[derive(Default)]
struct Report {
    fields: Vec<(String, Value)>,
    ok: bool,
}

impl Report {
    fn new() -> Report {
        Report { fields: Vec::new(), ok: true }
    }

    fn put(mut self, key: &str, value: Value) -> Report {
        self.fields.push((key.to_string(), value));
        self
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let map: Map<String, Value> = self.fields.iter().cloned().collect();
                serde_json::to_string(&Value::Object(map)).expect("JSON values serialize")
            }
            Format::Human => {
                self.fields.iter().map(|(k, v)| format!("{k}: {}", human(v))).collect::<Vec<_>>().join("\n")
            }
        }
    }
}

fn human(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Object(m) if m.contains_key("lo") && m.contains_key("hi") => {
            let s = |k: &str| m[k].as_str().unwrap_or_default().to_string();
            format!("[{}, {}] ~ [{}, {}]", s("lo"), s("hi"), s("lo_decimal"), s("hi_decimal"))
        }
        Value::Object(m) if m.contains_key("exact") => {
            format!("{} ~ {}", m["exact"].as_str().unwrap_or_default(), m["decimal"].as_str().unwrap_or_default())
        }
        Value::Array(items) if items.len() > 8 => format!("{} entries (full list with --format json)", items.len()),
        Value::Array(items) => items.iter().map(human).collect::<Vec<_>>().join("; "),
        other => other.to_string(),
    }
}

fn dyadic(x: &Dyadic) -> Value {
    json!({ "exact": x.to_string(), "decimal": x.to_decimal(DECIMAL_DIGITS) })
}

fn interval(iv: &DyadicInterval) -> Value {
    json!({
        "lo": iv.lo().to_string(),
        "hi": iv.hi().to_string(),
        "lo_decimal": iv.lo().to_decimal(DECIMAL_DIGITS),
        "hi_decimal": iv.hi().to_decimal(DECIMAL_DIGITS),
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn read_body(path: &Path) -> Result<ConvexBody, Failure> {
    let file: BodyFile = read_json(path)?;
    ConvexBody::from_file(&file).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn run_frechet(a: &Path, b: &Path, n: u32, orientation: Orientation, witness: bool) -> Outcome {
    let ca = Curve::from_file(&read_json::<CurveFile>(a)?)?;
    let cb = Curve::from_file(&read_json::<CurveFile>(b)?)?;
    let r = match ca.topology() {
        Topology::Path => frechet::frechet_paths(&ca, &cb, orientation, n)?,
        Topology::Loop => frechet::frechet_loops(&ca, &cb, orientation, n)?,
    };
    let mut rep = Report::new()
        .put("enclosure", interval(&r.enclosure))
        .put("resolution", json!(r.resolution))
        .put("discrete", dyadic(&r.discrete))
        .put("reversed", json!(r.reversed));
    if let Some(s) = r.shift {
        rep = rep.put("shift", json!(s));
    }
    if witness {
        rep = rep.put("witness", json!(r.witness));
    }
    Ok(rep.put("coupling_length", json!(r.witness.len())))
}

fn run_isoperimetric(n: u32, max_gon: usize, refine: bool) -> Outcome {
    let r = convex::isoperimetric(n, &IsoSchedule { max_gon, refine });
    let verts: Vec<Value> =
        r.body.vertices().iter().map(|p| json!(p.iter().map(|x| x.to_string()).collect::<Vec<_>>())).collect();
    Ok(Report::new()
        .put("interval", interval(&r.interval))
        .put("gon", json!(r.gon))
        .put("perimeter", interval(&r.perimeter))
        .put("vertices", Value::Array(verts)))
}

fn run_optimize(dim: usize, objective: &str, constraint: &str, n: u32, budget: usize) -> Outcome {
    let p = OptProblem::parse(dim, objective, constraint)?;
    let r = maximize(&p, n, budget)?;
    let mut rep = Report::new().put("status", json!(r.status.to_string()));
    rep = match r.interval() {
        Some(iv) => rep.put("interval", interval(&iv)),
        None => rep.put("upper_bound", dyadic(&r.hi)),
    };
    if let Some(w) = &r.witness {
        rep = rep.put("witness", Value::Array(w.iter().map(interval).collect()));
    }
    Ok(rep.put("expansions", json!(r.expansions)))
}

fn run_eval(text: &str, point: &str, dim: Option<usize>, n: u32) -> Outcome {
    let e = expr::parse(text)?;
    let xs: Vec<Dyadic> = point.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>()?;
    let dim = dim.unwrap_or(xs.len());
    if xs.len() != dim {
        return Err(Failure(format!("{} coordinates given for dimension {dim}", xs.len())));
    }
    if xs.iter().any(|x| x.is_negative() || x > &Dyadic::one()) {
        return Err(Failure("point lies outside the unit cube".into()));
    }
    let window = Window::fit(&e.range(dim.max(e.arity())));
    let f = expr::to_function(&e, dim, &window)?;
    let name = PointName::of_point(&cube(dim), real_point(&xs))?;
    let y = f.codomain().clone();
    let back = |u: u64| window.from_unit(&reals(&y.point(u)).expect("real codomain")[0]);
    let direct = back(f.eval(&name, n)?);
    let graph = graph_from_function(&f);
    let via_graph = back(eval_from_graph(&graph, &name, n)?);
    // both are within 2^-n of the value in unit coordinates
    let radius = window.width().mul_pow2(-(n as i64));
    Ok(Report::new()
        .put("expr", json!(e.to_string()))
        .put("exact", dyadic(&e.eval_point(&xs)))
        .put("direct", dyadic(&direct))
        .put("graph", dyadic(&via_graph))
        .put("radius", dyadic(&radius)))
}

fn run_spaces_check(space: &str, max_level: u32) -> Outcome {
    let id: SpaceId = space.parse()?;
    let s = id.build()?;
    let mut rep = Report::new().put("space", json!(id.to_string()));
    let mut ok = true;
    let mut rows = Vec::new();
    for m in 0..=max_level {
        let cover = covering_check(&s, m, m + 3);
        let round = rounding_check(&s, m, 2);
        let bijective = match s.factors() {
            Some(_) if s.level_count(m) <= 1 << 16 => Some((0..s.level_count(m)).all(|w| {
                let (u, v) = unpair(&s, w).unwrap();
                pair(&s, u, v) == Some(w)
            })),
            _ => None,
        };
        ok &= cover.ok && round.ok && bijective.unwrap_or(true);
        rows.push(json!({
            "level": m,
            "covering": cover.ok,
            "covering_worst": cover.worst.to_string(),
            "rounding": round.ok,
            "rounding_worst": round.worst.to_string(),
            "pairing": bijective,
        }));
    }
    rep = rep.put("levels", Value::Array(rows)).put("ok", json!(ok));
    rep.ok = ok;
    Ok(rep)
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Frechet { a, b, precision, orientation, witness } => {
            run_frechet(&a, &b, precision.precision, orientation, witness)
        }
        Command::Hausdorff { a, b, precision } => {
            let h = convex::hausdorff_convex(&read_body(&a)?, &read_body(&b)?, precision.precision)?;
            Ok(Report::new().put("enclosure", interval(&h)))
        }
        Command::Volume { body } => {
            let v = convex::volume(&read_body(&body)?);
            let approx = v.to_f64().map(|x| format!("{x:.12}")).unwrap_or_default();
            Ok(Report::new().put("volume", json!({ "exact": v.to_string(), "decimal": approx })))
        }
        Command::Surface { body, precision } => {
            let s = convex::surface(&read_body(&body)?, precision.precision)?;
            Ok(Report::new().put("enclosure", interval(&s)))
        }
        Command::Isoperimetric { precision, max_gon, no_refine } => {
            run_isoperimetric(precision.precision, max_gon as usize, !no_refine)
        }
        Command::Optimize { dim, objective, constraint, precision, budget } => {
            run_optimize(dim as usize, &objective, &constraint, precision.precision, budget)
        }
        Command::Eval { expr, point, dim, precision } => run_eval(&expr, &point, dim, precision.precision),
        Command::SpacesCheck { space, max_level } => run_spaces_check(&space, max_level),
        Command::Selftest { seed, cases } => Ok(selftest::run(seed, cases)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(rep) => {
            // a closed pipe (e.g. `| head`) is not an error of the computation
            let _ = writeln!(std::io::stdout().lock(), "{}", rep.render(cli.format));
            if rep.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
