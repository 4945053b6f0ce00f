//! Command-line front end: evaluate kernels, subordination densities and
//! derivative coefficient tables, run the four solvers, and run the
//! verification suites. Emits CSV (with `#` metadata comments) or JSON.
//!
//! Exit codes: 0 success / suite pass, 1 numerical failure or suite fail,
//! 2 usage error.

use clap::{Parser, Subcommand};
use fracevo::{
    cm_check, convolution_identity_check, density_contour, h_derivative_apply,
    hille_yosida_check, k1_eval, k2_eval, postwidder_coeffs, sector_angle_check,
    solve_postwidder, solve_resolvent, solve_subordination, solve_volterra,
    subordination_density, subordination_grid, ContourSpec, Generator, KernelId, Method,
    ProblemKind, WeightSpec,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Evaluation grid: a single value or `START:STOP:COUNT[:log|:linear]`
/// with COUNT >= 2 inclusive endpoints.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Single(f64),
    Range { start: f64, stop: f64, count: usize, log: bool },
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match *self {
            GridSpec::Single(x) => vec![x],
            GridSpec::Range { start, stop, count, log } => {
                let n = count as f64 - 1.0;
                (0..count)
                    .map(|i| {
                        let f = i as f64 / n;
                        if log {
                            (start.ln() + f * (stop.ln() - start.ln())).exp()
                        } else {
                            start + f * (stop - start)
                        }
                    })
                    .collect()
            }
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad_num = |tok: &str| format!("cannot parse {tok:?} as a number");
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.len() {
            1 => {
                let x: f64 = parts[0].trim().parse().map_err(|_| bad_num(parts[0]))?;
                if !x.is_finite() {
                    return Err("grid value must be finite".into());
                }
                Ok(GridSpec::Single(x))
            }
            3 | 4 => {
                let start: f64 = parts[0].trim().parse().map_err(|_| bad_num(parts[0]))?;
                let stop: f64 = parts[1].trim().parse().map_err(|_| bad_num(parts[1]))?;
                let count: usize = parts[2]
                    .trim()
                    .parse()
                    .map_err(|_| format!("cannot parse {:?} as a count", parts[2]))?;
                let log = match parts.get(3).map(|p| p.trim()) {
                    None | Some("linear") => false,
                    Some("log") => true,
                    Some(other) => {
                        return Err(format!("grid scale must be log or linear, got {other:?}"))
                    }
                };
                if !start.is_finite() || !stop.is_finite() {
                    return Err("grid endpoints must be finite".into());
                }
                if count < 2 {
                    return Err("grid count must be >= 2 (use a single value otherwise)".into());
                }
                if !(stop > start) {
                    return Err("grid needs stop > start".into());
                }
                if log && !(start > 0.0) {
                    return Err("log grid needs start > 0".into());
                }
                Ok(GridSpec::Range { start, stop, count, log })
            }
            _ => Err(format!(
                "grid must be VALUE or START:STOP:COUNT[:log|:linear], got {s:?}"
            )),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Single(x) => write!(f, "{x}"),
            GridSpec::Range { start, stop, count, log } => {
                write!(f, "{start}:{stop}:{count}")?;
                if *log {
                    write!(f, ":log")?;
                }
                Ok(())
            }
        }
    }
}

// Library types and GridSpec serialize through their text grammars; f64
// Display is shortest-round-trip, so re-parsing reproduces identical bits.
macro_rules! grammar_serde {
    ($module:ident, $ty:ty) => {
        mod $module {
            use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

            pub fn serialize<S: Serializer>(v: &$ty, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&v.to_string())
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<$ty, D::Error> {
                let text = String::deserialize(d)?;
                text.parse::<$ty>().map_err(|e| D::Error::custom(e.to_string()))
            }
        }
    };
}

grammar_serde!(weight_serde, fracevo::WeightSpec);
grammar_serde!(kind_serde, fracevo::ProblemKind);
grammar_serde!(generator_serde, fracevo::Generator);
grammar_serde!(method_serde, fracevo::Method);
grammar_serde!(kernel_serde, fracevo::KernelId);
grammar_serde!(grid_serde, crate::GridSpec);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Kernel,
    Density,
    Coeffs,
    Solve,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Convolution,
    Sector,
    Cm,
    Density,
    Agreement,
    Generation,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "convolution" => Ok(Suite::Convolution),
            "sector" => Ok(Suite::Sector),
            "cm" => Ok(Suite::Cm),
            "density" => Ok(Suite::Density),
            "agreement" => Ok(Suite::Agreement),
            "generation" => Ok(Suite::Generation),
            other => Err(format!(
                "unknown suite {other:?}; expected convolution, sector, cm, density, \
                 agreement, or generation"
            )),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Convolution => "convolution",
            Suite::Sector => "sector",
            Suite::Cm => "cm",
            Suite::Density => "density",
            Suite::Agreement => "agreement",
            Suite::Generation => "generation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?}; expected csv or json")),
        }
    }
}

/// Fully resolved invocation. Serializing to JSON and re-parsing yields an
/// identical config (and therefore an identical run).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(with = "weight_serde")]
    pub weight: WeightSpec,
    #[serde(with = "kind_serde")]
    pub kind: ProblemKind,
    #[serde(with = "generator_serde")]
    pub generator: Generator,
    /// Time grid (`--t`). For the Volterra method the largest point is the
    /// step grid's end time.
    #[serde(with = "grid_serde")]
    pub times: GridSpec,
    #[serde(with = "grid_serde")]
    pub tau: GridSpec,
    #[serde(with = "kernel_serde")]
    pub which: KernelId,
    pub s: f64,
    pub n: usize,
    pub initial: Vec<f64>,
    #[serde(with = "method_serde")]
    pub method: Method,
    pub contour_nodes: usize,
    pub steps: usize,
    pub order: usize,
    pub suite: Suite,
    pub samples: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    pub tol_stepper: Option<f64>,
    pub format: OutputFormat,
    pub out: Option<String>,
}

fn parse_weight(s: &str) -> Result<WeightSpec, String> {
    let w: WeightSpec = s.parse().map_err(|e: fracevo::Error| e.to_string())?;
    w.ensure_valid().map_err(|e| e.to_string())?;
    Ok(w)
}

fn parse_kind(s: &str) -> Result<ProblemKind, String> {
    s.parse().map_err(|e: fracevo::Error| e.to_string())
}

fn parse_generator(s: &str) -> Result<Generator, String> {
    let g: Generator = s.parse().map_err(|e: fracevo::Error| e.to_string())?;
    g.ensure_valid().map_err(|e| e.to_string())?;
    Ok(g)
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: fracevo::Error| e.to_string())
}

fn parse_kernel(s: &str) -> Result<KernelId, String> {
    s.parse().map_err(|e: fracevo::Error| e.to_string())
}

fn parse_positive_grid(s: &str) -> Result<GridSpec, String> {
    let g: GridSpec = s.parse()?;
    let positive = match g {
        GridSpec::Single(x) => x > 0.0,
        GridSpec::Range { start, .. } => start > 0.0,
    };
    if positive {
        Ok(g)
    } else {
        Err("time grid must be strictly positive".into())
    }
}

fn parse_tau_grid(s: &str) -> Result<GridSpec, String> {
    let g: GridSpec = s.parse()?;
    let ok = match g {
        GridSpec::Single(x) => x >= 0.0,
        GridSpec::Range { start, .. } => start >= 0.0,
    };
    if ok {
        Ok(g)
    } else {
        Err("tau grid must be nonnegative".into())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fracevo",
    about = "Distributed-order fractional evolution: kernels, densities, solvers, checks",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, clap::Args)]
struct OutputArgs {
    /// Output format: csv or json
    #[arg(long, value_parser = OutputFormat::from_str, default_value = "csv")]
    format: OutputFormat,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate a Volterra kernel k1 or k2 on a time grid
    Kernel {
        /// Weight: discrete:ALPHA[,AJ:BJ]* | constant | poly:C0,C1,...
        #[arg(long, value_parser = parse_weight)]
        weight: WeightSpec,
        /// Which kernel: k1 (transform 1/h) or k2 (transform h/s)
        #[arg(long, value_parser = parse_kernel, default_value = "k1")]
        which: KernelId,
        /// Time grid: VALUE or START:STOP:COUNT[:log|:linear]
        #[arg(long = "t", value_parser = parse_positive_grid)]
        t: GridSpec,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate the subordination density phi(t, tau) on a tau grid
    Density {
        #[arg(long, value_parser = parse_weight)]
        weight: WeightSpec,
        /// Problem kind: caputo or riemann-liouville (rl)
        #[arg(long, value_parser = parse_kind, default_value = "caputo")]
        kind: ProblemKind,
        /// Single positive time
        #[arg(long = "t")]
        t: f64,
        /// tau grid: VALUE or START:STOP:COUNT[:log|:linear]
        #[arg(long, value_parser = parse_tau_grid)]
        tau: GridSpec,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emit the derivative coefficient table b_{n,k,p}(s)
    Coeffs {
        #[arg(long, value_parser = parse_weight)]
        weight: WeightSpec,
        #[arg(long, value_parser = parse_kind, default_value = "caputo")]
        kind: ProblemKind,
        /// Transform argument s > 0
        #[arg(long = "s", default_value_t = 1.0)]
        s: f64,
        /// Derivative order n (1..=40)
        #[arg(long = "n", default_value_t = 8)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve the evolution problem on a time grid
    Solve {
        #[arg(long, value_parser = parse_weight)]
        weight: WeightSpec,
        #[arg(long, value_parser = parse_kind, default_value = "caputo")]
        kind: ProblemKind,
        /// Generator: scalar:L | diagonal:L1,L2,... | laplacian1d:N:SPACING
        #[arg(long, value_parser = parse_generator, default_value = "scalar:-1")]
        generator: Generator,
        /// Initial datum, comma separated (default: all ones)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        initial: Option<Vec<f64>>,
        #[arg(long = "t", value_parser = parse_positive_grid)]
        t: GridSpec,
        /// resolvent | subordination | post-widder | volterra
        #[arg(long, value_parser = parse_method, default_value = "resolvent")]
        method: Method,
        /// Talbot contour size for the resolvent method
        #[arg(long, default_value_t = 32)]
        contour_nodes: usize,
        /// Step count for the Volterra method
        #[arg(long, default_value_t = 1024)]
        steps: usize,
        /// Approximation order for the Post-Widder method
        #[arg(long, default_value_t = 16)]
        order: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a verification suite; exit 0 on pass, 1 on fail
    Verify {
        /// convolution | sector | cm | density | agreement | generation
        #[arg(long, value_parser = Suite::from_str)]
        suite: Suite,
        #[arg(long, value_parser = parse_weight, default_value = "discrete:0.5")]
        weight: WeightSpec,
        #[arg(long, value_parser = parse_kind, default_value = "caputo")]
        kind: ProblemKind,
        #[arg(long, value_parser = parse_generator, default_value = "scalar:-1")]
        generator: Generator,
        /// Grid of times (suite-specific default when omitted)
        #[arg(long = "t", value_parser = parse_positive_grid)]
        t: Option<GridSpec>,
        /// Sample count for the sector suite
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// RNG seed for the sector suite
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Primary tolerance (module default when omitted)
        #[arg(long)]
        tol: Option<f64>,
        /// Volterra-vs-resolvent tolerance for the agreement suite
        #[arg(long)]
        tol_stepper: Option<f64>,
    },
}

fn base_config() -> RunConfig {
    RunConfig {
        command: CommandKind::Kernel,
        weight: WeightSpec::Discrete { alpha: 0.5, terms: vec![] },
        kind: ProblemKind::Caputo,
        generator: Generator::Scalar { lambda: -1.0 },
        times: GridSpec::Single(1.0),
        tau: GridSpec::Single(1.0),
        which: KernelId::K1,
        s: 1.0,
        n: 8,
        initial: vec![1.0],
        method: Method::Resolvent,
        contour_nodes: 32,
        steps: 1024,
        order: 16,
        suite: Suite::Convolution,
        samples: 500,
        seed: 7,
        tol: None,
        tol_stepper: None,
        format: OutputFormat::Csv,
        out: None,
    }
}

/// Parse an argument list (without the program name). On error the message
/// names the offending flag; `code` 0 is help/version, 2 a usage error.
pub struct UsageExit {
    pub code: i32,
    pub message: String,
}

pub fn parse_args<I>(argv: I) -> Result<RunConfig, UsageExit>
where
    I: IntoIterator,
    I::Item: Into<String>,
{
    let full = std::iter::once("fracevo".to_string()).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(full).map_err(|e| {
        let code = match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
            _ => 2,
        };
        UsageExit { code, message: e.to_string() }
    })?;
    let mut cfg = base_config();
    match cli.cmd {
        Cmd::Kernel { weight, which, t, output } => {
            cfg.command = CommandKind::Kernel;
            cfg.weight = weight;
            cfg.which = which;
            cfg.times = t;
            cfg.format = output.format;
            cfg.out = output.out;
        }
        Cmd::Density { weight, kind, t, tau, output } => {
            if !(t > 0.0) || !t.is_finite() {
                return Err(UsageExit {
                    code: 2,
                    message: format!("invalid value for '--t': needs t > 0, got {t}"),
                });
            }
            cfg.command = CommandKind::Density;
            cfg.weight = weight;
            cfg.kind = kind;
            cfg.times = GridSpec::Single(t);
            cfg.tau = tau;
            cfg.format = output.format;
            cfg.out = output.out;
        }
        Cmd::Coeffs { weight, kind, s, n, output } => {
            if !(s > 0.0) || !s.is_finite() {
                return Err(UsageExit {
                    code: 2,
                    message: format!("invalid value for '--s': needs s > 0, got {s}"),
                });
            }
            cfg.command = CommandKind::Coeffs;
            cfg.weight = weight;
            cfg.kind = kind;
            cfg.s = s;
            cfg.n = n;
            cfg.format = output.format;
            cfg.out = output.out;
        }
        Cmd::Solve {
            weight,
            kind,
            generator,
            initial,
            t,
            method,
            contour_nodes,
            steps,
            order,
            output,
        } => {
            let dim = generator.dim();
            let a = initial.unwrap_or_else(|| vec![1.0; dim]);
            if a.len() != dim {
                return Err(UsageExit {
                    code: 2,
                    message: format!(
                        "invalid value for '--initial': got {} components, generator \
                         dimension is {dim}",
                        a.len()
                    ),
                });
            }
            cfg.command = CommandKind::Solve;
            cfg.weight = weight;
            cfg.kind = kind;
            cfg.generator = generator;
            cfg.initial = a;
            cfg.times = t;
            cfg.method = method;
            cfg.contour_nodes = contour_nodes;
            cfg.steps = steps;
            cfg.order = order;
            cfg.format = output.format;
            cfg.out = output.out;
        }
        Cmd::Verify {
            suite,
            weight,
            kind,
            generator,
            t,
            samples,
            seed,
            tol,
            tol_stepper,
        } => {
            cfg.command = CommandKind::Verify;
            cfg.suite = suite;
            cfg.weight = weight;
            cfg.kind = kind;
            cfg.initial = vec![1.0; generator.dim()];
            cfg.generator = generator;
            cfg.times = t.unwrap_or_else(|| default_suite_grid(suite));
            cfg.samples = samples;
            cfg.seed = seed;
            cfg.tol = tol;
            cfg.tol_stepper = tol_stepper;
        }
    }
    Ok(cfg)
}

fn default_suite_grid(suite: Suite) -> GridSpec {
    match suite {
        Suite::Convolution => GridSpec::Range { start: 0.1, stop: 10.0, count: 3, log: true },
        Suite::Cm => GridSpec::Range { start: 0.01, stop: 100.0, count: 25, log: true },
        Suite::Sector => GridSpec::Single(1.0),
        Suite::Density => GridSpec::Single(1.0),
        Suite::Agreement => GridSpec::Single(1.0),
        Suite::Generation => GridSpec::Range { start: 0.1, stop: 10.0, count: 5, log: true },
    }
}

/// Fixed 15-significant-digit scientific formatting; identical invocations
/// produce byte-identical bodies.
fn format_sig(v: f64) -> String {
    format!("{v:.14e}")
}

struct Table {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    meta: Vec<(&'a str, &'a str)>,
    columns: &'a [String],
    rows: &'a [Vec<f64>],
}

fn render(table: &Table, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut text = String::new();
            for (key, value) in &table.meta {
                text.push_str(&format!("# {key}: {value}\n"));
            }
            text.push_str(&table.columns.join(","));
            text.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|&v| format_sig(v)).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            text
        }
        OutputFormat::Json => {
            let json = JsonTable {
                meta: table.meta.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect(),
                columns: &table.columns,
                rows: &table.rows,
            };
            let mut text = serde_json::to_string_pretty(&json).expect("static serializable");
            text.push('\n');
            text
        }
    }
}

fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("FRACEVO_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n >= 1 {
                builder = builder.num_threads(n);
            }
        }
    }
    builder.build().expect("thread pool construction cannot fail with these settings")
}

fn run_kernel(cfg: &RunConfig) -> Result<Table, fracevo::Error> {
    let points = cfg.times.points();
    let eval = match cfg.which {
        KernelId::K1 => k1_eval,
        KernelId::K2 => k2_eval,
    };
    let values: Result<Vec<f64>, _> = thread_pool()
        .install(|| points.par_iter().map(|&t| eval(&cfg.weight, t)).collect());
    let values = values?;
    Ok(Table {
        meta: vec![
            ("weight".into(), cfg.weight.to_string()),
            ("kernel".into(), cfg.which.to_string()),
            ("tolerance".into(), "1e-6 relative (quadrature paths target)".into()),
        ],
        columns: vec!["t".into(), "value".into()],
        rows: points.iter().zip(values).map(|(&t, v)| vec![t, v]).collect(),
    })
}

fn run_density(cfg: &RunConfig) -> Result<Table, fracevo::Error> {
    let t = match cfg.times {
        GridSpec::Single(x) => x,
        _ => unreachable!("density always stores a single time"),
    };
    let taus = cfg.tau.points();
    let values: Result<Vec<f64>, _> = thread_pool().install(|| {
        taus.par_iter()
            .map(|&tau| {
                let contour = density_contour(&cfg.weight, cfg.kind, t, tau)?;
                subordination_density(&cfg.weight, cfg.kind, t, tau, &contour)
            })
            .collect()
    });
    let values = values?;
    Ok(Table {
        meta: vec![
            ("weight".into(), cfg.weight.to_string()),
            ("kind".into(), cfg.kind.to_string()),
            ("tolerance".into(), "1e-9 absolute (contour noise floor)".into()),
        ],
        columns: vec!["t".into(), "tau".into(), "phi".into()],
        rows: taus.iter().zip(values).map(|(&tau, phi)| vec![t, tau, phi]).collect(),
    })
}

fn run_coeffs(cfg: &RunConfig) -> Result<Table, fracevo::Error> {
    let table = postwidder_coeffs(&cfg.weight, cfg.kind, cfg.s, cfg.n)?;
    Ok(Table {
        meta: vec![
            ("weight".into(), cfg.weight.to_string()),
            ("kind".into(), cfg.kind.to_string()),
            ("n".into(), cfg.n.to_string()),
            ("s".into(), format_sig(cfg.s)),
            ("tolerance".into(), "entries nonnegative up to 1e-12 of table scale".into()),
        ],
        columns: vec!["k".into(), "p".into(), "b".into()],
        rows: table
            .entries
            .iter()
            .map(|(&(k, p), &b)| vec![k as f64, p as f64, b])
            .collect(),
    })
}

fn run_solve(cfg: &RunConfig) -> Result<Table, fracevo::Error> {
    let times = cfg.times.points();
    let w = &cfg.weight;
    let op = &cfg.generator;
    let a = &cfg.initial;
    let mut meta = vec![
        ("weight".into(), w.to_string()),
        ("kind".into(), cfg.kind.to_string()),
        ("method".into(), cfg.method.to_string()),
        ("generator".into(), op.to_string()),
    ];
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let push_row = |t: f64, state: &[f64], rows: &mut Vec<Vec<f64>>| {
        let mut row = Vec::with_capacity(state.len() + 1);
        row.push(t);
        row.extend_from_slice(state);
        rows.push(row);
    };
    let mut theta0 = None;
    match cfg.method {
        Method::Resolvent => {
            let contour = ContourSpec::FixedTalbot { nodes: cfg.contour_nodes };
            let solved: Result<Vec<(Vec<f64>, Option<f64>)>, _> = thread_pool().install(|| {
                times
                    .par_iter()
                    .map(|&t| {
                        solve_resolvent(w, cfg.kind, op, a, &[t], &contour)
                            .map(|tr| (tr.states[1].clone(), tr.theta0))
                    })
                    .collect()
            });
            let solved = solved?;
            theta0 = solved[0].1;
            meta.push(("contour".into(), format!("talbot:{}", cfg.contour_nodes)));
            meta.push(("tolerance".into(), "~1e-11 absolute contour noise".into()));
            push_row(0.0, a, &mut rows);
            for (&t, (state, _)) in times.iter().zip(&solved) {
                push_row(t, state, &mut rows);
            }
        }
        Method::Subordination => {
            let solved: Result<Vec<(Vec<f64>, Option<f64>)>, _> = thread_pool().install(|| {
                times
                    .par_iter()
                    .map(|&t| {
                        solve_subordination(w, cfg.kind, op, a, &[t])
                            .map(|tr| (tr.states[1].clone(), tr.theta0))
                    })
                    .collect()
            });
            let solved = solved?;
            theta0 = solved[0].1;
            meta.push(("tolerance".into(), "tau tail below 1e-8 mass".into()));
            push_row(0.0, a, &mut rows);
            for (&t, (state, _)) in times.iter().zip(&solved) {
                push_row(t, state, &mut rows);
            }
        }
        Method::PostWidder => {
            let states: Result<Vec<Vec<f64>>, _> = thread_pool().install(|| {
                times
                    .par_iter()
                    .map(|&t| solve_postwidder(w, cfg.kind, op, a, t, cfg.order))
                    .collect()
            });
            let states = states?;
            meta.push(("order".into(), cfg.order.to_string()));
            meta.push(("tolerance".into(), "first order in 1/order".into()));
            push_row(0.0, a, &mut rows);
            for (&t, state) in times.iter().zip(&states) {
                push_row(t, state, &mut rows);
            }
        }
        Method::Volterra => {
            let t_end = *times.last().expect("grid is never empty");
            let tr = solve_volterra(w, cfg.kind, op, a, t_end, cfg.steps)?;
            theta0 = tr.theta0;
            meta.push(("steps".into(), cfg.steps.to_string()));
            meta.push(("tolerance".into(), "first order in t_end/steps".into()));
            for (t, state) in tr.times.iter().zip(&tr.states) {
                push_row(*t, state, &mut rows);
            }
        }
    }
    if let Some(angle) = theta0 {
        meta.push(("theta0".into(), format_sig(angle)));
    }
    let mut columns = vec!["t".to_string()];
    for i in 1..=a.len() {
        columns.push(format!("u_{i}"));
    }
    Ok(Table { meta, columns, rows })
}

fn write_output(text: &str, out: &Option<String>) -> i32 {
    match out {
        None => {
            print!("{text}");
            0
        }
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("cannot write {path}: {e}");
                1
            }
        },
    }
}

struct SuiteOutcome {
    lines: Vec<String>,
    pass: bool,
}

fn verify_convolution(cfg: &RunConfig) -> Result<SuiteOutcome, fracevo::Error> {
    let tol = cfg.tol.unwrap_or(if cfg.weight.is_continuous() { 1e-5 } else { 1e-6 });
    let points = cfg.times.points();
    let devs: Result<Vec<f64>, _> = thread_pool().install(|| {
        points
            .par_iter()
            .map(|&t| convolution_identity_check(&cfg.weight, t).map(|v| (v - 1.0).abs()))
            .collect()
    });
    let worst = devs?.into_iter().fold(0.0f64, f64::max);
    let pass = worst <= tol;
    Ok(SuiteOutcome {
        lines: vec![format!(
            "convolution: max |k1*k2 - 1| = {:.3e} over {} times (tol {tol:.1e}): {}",
            worst,
            points.len(),
            verdict(pass)
        )],
        pass,
    })
}

fn verify_sector(cfg: &RunConfig) -> Result<SuiteOutcome, fracevo::Error> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<Complex64> = (0..cfg.samples)
        .map(|_| {
            let radius = 10f64.powf(rng.gen_range(-3.0..3.0));
            let angle = rng.gen_range(-std::f64::consts::PI + 1e-9..std::f64::consts::PI - 1e-9);
            Complex64::from_polar(radius, angle)
        })
        .collect();
    let report = sector_angle_check(&cfg.weight, cfg.kind, &samples)?;
    let pass = report.pass;
    Ok(SuiteOutcome {
        lines: vec![format!(
            "sector: |arg g| <= {} |arg s| holds with max excess {:.3e} over {} samples \
             (tol 1e-12): {}",
            report.bound_coefficient,
            report.max_excess,
            report.samples_checked,
            verdict(pass)
        )],
        pass,
    })
}

fn verify_cm(cfg: &RunConfig) -> Result<SuiteOutcome, fracevo::Error> {
    let grid = cfg.times.points();
    let mut lines = Vec::new();
    let mut pass = true;
    for id in [KernelId::K1, KernelId::K2] {
        let report = cm_check(&cfg.weight, id, &grid)?;
        pass &= report.pass;
        let mut line = format!(
            "cm {id}: 4th-order alternating differences on {} points, worst ratio {:.3e}",
            report.points, report.worst_ratio
        );
        if let Some(cert) = report.spectral_certificate {
            line.push_str(&format!(", spectral density positive: {cert}"));
        }
        line.push_str(&format!(": {}", verdict(report.pass)));
        lines.push(line);
    }
    Ok(SuiteOutcome { lines, pass })
}

fn verify_density(cfg: &RunConfig) -> Result<SuiteOutcome, fracevo::Error> {
    let tol_mass = cfg.tol.unwrap_or(1e-6);
    let floor = -1e-9;
    let mut lines = Vec::new();
    let mut pass = true;
    for &t in &cfg.times.points() {
        let grid = subordination_grid(&cfg.weight, cfg.kind, t)?;
        let phis: Result<Vec<f64>, _> = thread_pool().install(|| {
            grid.par_iter()
                .map(|&(tau, _)| {
                    let contour = density_contour(&cfg.weight, cfg.kind, t, tau)?;
                    subordination_density(&cfg.weight, cfg.kind, t, tau, &contour)
                })
                .collect()
        });
        let phis = phis?;
        let mass: f64 = grid.iter().zip(&phis).map(|(&(_, wq), &phi)| wq * phi).sum();
        let min_phi = phis.iter().copied().fold(f64::INFINITY, f64::min);
        let ok = (mass - 1.0).abs() <= tol_mass && min_phi >= floor;
        pass &= ok;
        lines.push(format!(
            "density t={t}: |integral - 1| = {:.3e} (tol {tol_mass:.1e}), min phi = {:.3e} \
             (floor {floor:.1e}): {}",
            (mass - 1.0).abs(),
            min_phi,
            verdict(ok)
        ));
    }
    Ok(SuiteOutcome { lines, pass })
}

fn verify_agreement(cfg: &RunConfig) -> Result<SuiteOutcome, fracevo::Error> {
    let tol_sub = cfg.tol.unwrap_or(1e-5);
    let tol_step = cfg.tol_stepper.unwrap_or(2e-3);
    let times = cfg.times.points();
    let t_end = *times.last().expect("grid is never empty");
    let contour = ContourSpec::FixedTalbot { nodes: cfg.contour_nodes };
    let res = solve_resolvent(&cfg.weight, cfg.kind, &cfg.generator, &cfg.initial, &times, &contour)?;
    let sub = solve_subordination(&cfg.weight, cfg.kind, &cfg.generator, &cfg.initial, &times)?;
    let scale = norm2(&cfg.initial).max(1e-30);
    let mut diff_sub = 0.0f64;
    for (u, v) in res.states.iter().zip(&sub.states) {
        diff_sub = diff_sub.max(diff_norm(u, v) / scale);
    }
    let vol = solve_volterra(&cfg.weight, cfg.kind, &cfg.generator, &cfg.initial, t_end, cfg.steps)?;
    let res_end = solve_resolvent(
        &cfg.weight,
        cfg.kind,
        &cfg.generator,
        &cfg.initial,
        &[t_end],
        &contour,
    )?;
    let diff_vol =
        diff_norm(&vol.states[vol.states.len() - 1], &res_end.states[1]) / scale;
    let pass = diff_sub <= tol_sub && diff_vol <= tol_step;
    Ok(SuiteOutcome {
        lines: vec![
            format!(
                "agreement: resolvent vs subordination max rel diff = {diff_sub:.3e} \
                 (tol {tol_sub:.1e}): {}",
                verdict(diff_sub <= tol_sub)
            ),
            format!(
                "agreement: volterra({} steps) vs resolvent at t={t_end} rel diff = \
                 {diff_vol:.3e} (tol {tol_step:.1e}): {}",
                cfg.steps,
                verdict(diff_vol <= tol_step)
            ),
        ],
        pass,
    })
}

fn verify_generation(cfg: &RunConfig) -> Result<SuiteOutcome, fracevo::Error> {
    let s_grid = cfg.times.points();
    let hy = hille_yosida_check(&cfg.generator, &s_grid, 5)?;
    let mut lines = vec![format!(
        "generation: resolvent power bound, {} combinations, max ratio {:.6} (cap 1+1e-10): {}",
        hy.combinations_checked,
        hy.max_ratio,
        verdict(hy.pass)
    )];
    let mut pass = hy.pass;
    // Transform derivative bound: ||H^(n)(s) a|| <= n! s^{-(n+1)} ||a||.
    let a = &cfg.initial;
    let scale = norm2(a).max(1e-30);
    let mut worst = 0.0f64;
    for &s in &s_grid {
        for n in 1..=8usize {
            let hn = h_derivative_apply(&cfg.weight, cfg.kind, &cfg.generator, a, s, n)?;
            let mut bound = 1.0;
            for k in 1..=n {
                bound *= k as f64;
            }
            bound *= s.powi(-(n as i32 + 1));
            worst = worst.max(norm2(&hn) / (bound * scale));
        }
    }
    let ok = worst <= 1.0 + 1e-9;
    pass &= ok;
    lines.push(format!(
        "generation: transform derivative bound n<=8, max ratio {worst:.6} (cap 1+1e-9): {}",
        verdict(ok)
    ));
    Ok(SuiteOutcome { lines, pass })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff_norm(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn run_verify(cfg: &RunConfig) -> Result<SuiteOutcome, fracevo::Error> {
    match cfg.suite {
        Suite::Convolution => verify_convolution(cfg),
        Suite::Sector => verify_sector(cfg),
        Suite::Cm => verify_cm(cfg),
        Suite::Density => verify_density(cfg),
        Suite::Agreement => verify_agreement(cfg),
        Suite::Generation => verify_generation(cfg),
    }
}

/// Execute a parsed configuration. Returns the process exit code; numerical
/// failures print the library error verbatim to stderr.
pub fn run(cfg: &RunConfig) -> i32 {
    match cfg.command {
        CommandKind::Kernel | CommandKind::Density | CommandKind::Coeffs | CommandKind::Solve => {
            let table = match cfg.command {
                CommandKind::Kernel => run_kernel(cfg),
                CommandKind::Density => run_density(cfg),
                CommandKind::Coeffs => run_coeffs(cfg),
                CommandKind::Solve => run_solve(cfg),
                CommandKind::Verify => unreachable!(),
            };
            match table {
                Ok(table) => write_output(&render(&table, cfg.format), &cfg.out),
                Err(e) => {
                    eprintln!("{e}");
                    1
                }
            }
        }
        CommandKind::Verify => match run_verify(cfg) {
            Ok(outcome) => {
                let mut text = format!(
                    "# suite: {}\n# weight: {}\n# kind: {}\n",
                    cfg.suite, cfg.weight, cfg.kind
                );
                for line in &outcome.lines {
                    text.push_str(line);
                    text.push('\n');
                }
                let code = if outcome.pass { 0 } else { 1 };
                let io = write_output(&text, &cfg.out);
                if io != 0 {
                    io
                } else {
                    code
                }
            }
            Err(e) => {
                eprintln!("{e}");
                1
            }
        },
    }
}

/// Entry point for the binary: parse `std::env::args`, run, return the code.
pub fn run_from_env() -> i32 {
    match parse_args(std::env::args().skip(1)) {
        Ok(cfg) => run(&cfg),
        Err(usage) => {
            // clap messages end with a newline already; ours do not.
            let nl = if usage.message.ends_with('\n') { "" } else { "\n" };
            if usage.code == 0 {
                print!("{}{nl}", usage.message);
            } else {
                eprint!("{}{nl}", usage.message);
            }
            usage.code
        }
    }
}
