//! Batch front end behind the `apq` binary.

pub mod format;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::ainf::{ainf_constants, classify_ainf, eval_ainf_with, in_domain_ainf, AinfConstants};
use crate::bellman::eval;
use crate::error::{ApqError, Result};
use crate::extremal::{build, check_attainment};
use crate::geometry::{classify, gamma1_point, gamma_q_point, in_domain, Region};
use crate::params::Model;
use crate::rh::{alpha0, rh_constant};
use crate::verify::{check_concavity_seeded, check_majorization, check_oracle, oracle_points, VerifyReport};
use crate::weights::Weight;

use format::{g17, to_json};

/// Exit status for success and passing verification.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid flags.
pub const EXIT_USAGE: i32 = 1;
/// Exit status for domain and numerical errors.
pub const EXIT_DOMAIN: i32 = 2;
/// Exit status for a failed verification campaign.
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "apq", version, about = "Bellman function for two-exponent Muckenhoupt weight classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
struct ModelArgs {
    /// First exponent.
    #[arg(long, allow_hyphen_values = true)]
    p1: f64,
    /// Second exponent; 0 together with --p1 1 selects the logarithmic limit class.
    #[arg(long, allow_hyphen_values = true)]
    p2: f64,
    /// Class constant, greater than 1.
    #[arg(long)]
    q: f64,
}

#[derive(Debug, Clone, Copy, Args)]
struct PointArgs {
    #[arg(long, allow_hyphen_values = true)]
    x1: f64,
    #[arg(long, allow_hyphen_values = true)]
    x2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the constants derived from (p1, p2, Q).
    Constants {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Print the region containing a point.
    Region {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Evaluate the Bellman function at a point.
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        point: PointArgs,
        /// Threshold level; the default 1 is the normalized problem.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
    },
    /// Build an extremal weight at a point and check it.
    Extremal {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        point: PointArgs,
        /// Subdivisions per piece in the class-norm estimate.
        #[arg(long, default_value_t = 32)]
        resolution: usize,
    },
    /// Estimate the class norm of a weight read from a JSON file.
    Norm {
        #[command(flatten)]
        model: ModelArgs,
        /// Weight JSON document; `-` reads standard input.
        #[arg(long)]
        weight: PathBuf,
        #[arg(long, default_value_t = 32)]
        resolution: usize,
    },
    /// Finite-difference Hessian and boundary midpoint concavity campaign.
    VerifyConcavity {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 500)]
        n_interior: usize,
        #[arg(long, default_value_t = 100)]
        n_boundary: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Brute-force search over step weights compared with the Bellman value.
    VerifyOracle {
        #[command(flatten)]
        model: ModelArgs,
        /// Single point to test; by default a seeded sample of points is used.
        #[arg(long, allow_hyphen_values = true, requires = "x2")]
        x1: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "x1")]
        x2: Option<f64>,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, default_value_t = 3)]
        pieces: usize,
        #[arg(long, default_value_t = 40)]
        values: usize,
        #[arg(long, default_value_t = 20)]
        breaks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random split weights checked against the Bellman bound.
    VerifyMajorization {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        weights: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Evaluate on an N x N grid over the domain's bounding box and keep the nodes inside the domain.
    Scan {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Reverse Hölder constant for the (1, -1) class from an upper-boundary point.
    Rh {
        #[arg(long)]
        q: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// Upper-boundary point; defaults to (1, Q).
        #[arg(long, requires = "x2")]
        x1: Option<f64>,
        #[arg(long, requires = "x1")]
        x2: Option<f64>,
    },
}

/// The exponent pair selected on the command line.
enum Selected {
    General(Model),
    LogLimit(AinfConstants),
}

fn select(m: &ModelArgs) -> Result<Selected> {
    if m.p2 == 0.0 {
        if m.p1 != 1.0 {
            return Err(ApqError::InvalidParams("--p2 0 selects the logarithmic class and needs --p1 1".into()));
        }
        return Ok(Selected::LogLimit(ainf_constants(m.q)?));
    }
    Ok(Selected::General(Model::new(m.p1, m.p2, m.q)?))
}

fn general(m: &ModelArgs, what: &str) -> Result<Model> {
    match select(m)? {
        Selected::General(model) => Ok(model),
        Selected::LogLimit(_) => Err(ApqError::Unsupported(format!("{what} is not available for the logarithmic class"))),
    }
}

/// What a command produced: text for standard output and an exit status.
struct Output {
    text: String,
    status: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, status: EXIT_OK }
    }

    fn report(r: &VerifyReport) -> Self {
        Output { text: to_json(r), status: if r.pass { EXIT_OK } else { EXIT_VERIFY } }
    }
}

#[derive(Serialize)]
struct EvalOut {
    value: f64,
    region: Region,
    #[serde(skip_serializing_if = "Option::is_none")]
    v: Option<f64>,
}

#[derive(Serialize)]
struct RhOut {
    alpha: f64,
    alpha0: f64,
    constant: Option<f64>,
    converged: bool,
    tail_power: f64,
}

fn read_weight(path: &PathBuf) -> Result<Weight> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())
    } else {
        fs::read_to_string(path)
    }
    .map_err(|e| ApqError::InvalidWeight(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ApqError::InvalidWeight(e.to_string()))
}

fn eval_general(model: &Model, p: PointArgs, lambda: Option<f64>) -> Result<EvalOut> {
    let (params, c) = (&model.params, &model.consts);
    let lambda = lambda.unwrap_or(1.0);
    if !lambda.is_finite() {
        return Err(ApqError::InvalidParams(format!("lambda must be finite, got {lambda}")));
    }
    if lambda <= 0.0 {
        let region = classify(p.x1, p.x2, params, c)?;
        if region == Region::Outside {
            return Err(ApqError::OutsideDomain { x1: p.x1, x2: p.x2 });
        }
        return Ok(EvalOut { value: 1.0, region, v: None });
    }
    let y1 = p.x1 * lambda.powf(-params.p1);
    let y2 = p.x2 * lambda.powf(-params.p2);
    let e = eval(y1, y2, params, c).map_err(|err| match err {
        ApqError::OutsideDomain { .. } => ApqError::OutsideDomain { x1: p.x1, x2: p.x2 },
        other => other,
    })?;
    Ok(EvalOut { value: e.value, region: e.region, v: e.v })
}

fn scan_box(model: &Selected) -> ((f64, f64), (f64, f64)) {
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut take = |p: (f64, f64)| {
        lo = (lo.0.min(p.0), lo.1.min(p.1));
        hi = (hi.0.max(p.0), hi.1.max(p.1));
    };
    match model {
        Selected::General(m) => {
            let (a, b) = (m.consts.v_minus.ln(), m.consts.v_plus.ln());
            for k in 0..=64 {
                let v = (a + (b - a) * k as f64 / 64.0).exp();
                take(gamma1_point(v, &m.params));
                take(gamma_q_point(v, &m.params));
            }
        }
        Selected::LogLimit(c) => {
            for v in [c.v_minus, 1.0, c.v_plus] {
                take((v, v.ln()));
                take((v, v.ln() - c.q.ln()));
            }
        }
    }
    (lo, hi)
}

fn scan(model: &Selected, n: usize) -> Result<Vec<(f64, f64, Region, f64)>> {
    if n < 2 {
        return Err(ApqError::InvalidParams(format!("--grid must be at least 2, got {n}")));
    }
    let (lo, hi) = scan_box(model);
    // The general domain is a thin band between two power curves, so its
    // nodes are spaced geometrically; the logarithmic class has a signed
    // second coordinate and keeps a uniform grid.
    let geometric = matches!(model, Selected::General(_));
    let node = move |a: f64, b: f64, t: f64| if geometric { a * (b / a).powf(t) } else { a + t * (b - a) };
    let nodes: Vec<(f64, f64)> = (0..n)
        .flat_map(|j| {
            (0..n).map(move |i| {
                let t = i as f64 / (n - 1) as f64;
                let s = j as f64 / (n - 1) as f64;
                (node(lo.0, hi.0, t), node(lo.1, hi.1, s))
            })
        })
        .collect();
    let rows: Vec<Result<Option<(f64, f64, Region, f64)>>> = nodes
        .par_iter()
        .map(|&(x1, x2)| match model {
            Selected::General(m) => {
                if !in_domain(x1, x2, &m.params)? {
                    return Ok(None);
                }
                let e = eval(x1, x2, &m.params, &m.consts)?;
                Ok(Some((x1, x2, e.region, e.value)))
            }
            Selected::LogLimit(c) => {
                if !in_domain_ainf(x1, x2, c.q)? {
                    return Ok(None);
                }
                let (value, region, _) = eval_ainf_with(x1, x2, c)?;
                Ok(Some((x1, x2, region, value)))
            }
        })
        .collect();
    rows.into_iter().filter_map(|r| r.transpose()).collect()
}

fn execute(command: Command) -> Result<Output> {
    match command {
        Command::Constants { model } => Ok(Output::ok(match select(&model)? {
            Selected::General(m) => to_json(&m.consts),
            Selected::LogLimit(c) => to_json(&c),
        })),
        Command::Region { model, point } => {
            let region = match select(&model)? {
                Selected::General(m) => classify(point.x1, point.x2, &m.params, &m.consts)?,
                Selected::LogLimit(c) => classify_ainf(point.x1, point.x2, &c)?,
            };
            Ok(Output::ok(to_json(&json!({ "region": region }))))
        }
        Command::Eval { model, point, lambda } => {
            let out = match select(&model)? {
                Selected::General(m) => eval_general(&m, point, lambda)?,
                Selected::LogLimit(c) => {
                    if lambda.is_some_and(|l| l != 1.0) {
                        return Err(ApqError::Unsupported("--lambda with the logarithmic class".into()));
                    }
                    let (value, region, v) = eval_ainf_with(point.x1, point.x2, &c)?;
                    EvalOut { value, region, v }
                }
            };
            Ok(Output::ok(to_json(&out)))
        }
        Command::Extremal { model, point, resolution } => {
            let m = general(&model, "extremal")?;
            let ex = build(point.x1, point.x2, &m.params, &m.consts)?;
            let check = check_attainment(point.x1, point.x2, &m.params, &m.consts, resolution)?;
            let text = to_json(&json!({
                "region": ex.region,
                "plan": ex.plan,
                "weight": ex.weight,
                "attainment": check,
            }));
            Ok(Output { text, status: if check.pass { EXIT_OK } else { EXIT_VERIFY } })
        }
        Command::Norm { model, weight, resolution } => {
            let m = general(&model, "norm")?;
            let w = read_weight(&weight)?;
            let norm = w.apq_norm(&m.params, resolution)?;
            Ok(Output::ok(to_json(&json!({ "apq_norm": norm, "q": m.params.q, "in_class": norm <= m.params.q * (1.0 + 1e-6) }))))
        }
        Command::VerifyConcavity { model, n_interior, n_boundary, seed } => {
            let m = general(&model, "verify-concavity")?;
            Ok(Output::report(&check_concavity_seeded(&m.consts, &m.params, n_interior, n_boundary, seed)))
        }
        Command::VerifyOracle { model, x1, x2, points, pieces, values, breaks, seed } => {
            let m = general(&model, "verify-oracle")?;
            let pts = match (x1, x2) {
                (Some(a), Some(b)) => vec![(a, b)],
                _ => oracle_points(&m.params, &m.consts, points, seed)?,
            };
            for &(a, b) in &pts {
                if classify(a, b, &m.params, &m.consts)? == Region::Outside {
                    return Err(ApqError::OutsideDomain { x1: a, x2: b });
                }
            }
            if !(1..=4).contains(&pieces) {
                return Err(ApqError::InvalidParams(format!("--pieces must be 1 to 4, got {pieces}")));
            }
            Ok(Output::report(&check_oracle(&pts, &m.consts, &m.params, pieces, values, breaks)))
        }
        Command::VerifyMajorization { model, weights, seed } => {
            let m = general(&model, "verify-majorization")?;
            Ok(Output::report(&check_majorization(&m.consts, &m.params, weights, seed)))
        }
        Command::Scan { model, grid, out, format } => {
            let selected = select(&model)?;
            let rows = scan(&selected, grid)?;
            let text = match format {
                OutputFormat::Csv => {
                    let mut s = String::from("x1,x2,region,B\n");
                    for (x1, x2, region, b) in &rows {
                        s.push_str(&format!("{},{},{},{}\n", g17(*x1), g17(*x2), region, g17(*b)));
                    }
                    s.pop();
                    s
                }
                OutputFormat::Json => {
                    let rows: Vec<_> = rows
                        .iter()
                        .map(|&(x1, x2, region, b)| json!({ "x1": x1, "x2": x2, "region": region, "B": b }))
                        .collect();
                    to_json(&rows)
                }
            };
            match out {
                Some(path) => {
                    fs::write(&path, format!("{text}\n"))
                        .map_err(|e| ApqError::InvalidParams(format!("cannot write {}: {e}", path.display())))?;
                    Ok(Output::ok(to_json(&json!({ "rows": rows.len(), "out": path }))))
                }
                None => Ok(Output::ok(text)),
            }
        }
        Command::Rh { q, alpha, x1, x2 } => {
            let (x1, x2) = match (x1, x2) {
                (Some(a), Some(b)) => (a, b),
                _ => (1.0, q),
            };
            let r = rh_constant(q, alpha, x1, x2)?;
            Ok(Output::ok(to_json(&RhOut {
                alpha,
                alpha0: alpha0(q),
                constant: r.constant,
                converged: r.converged,
                tail_power: r.tail_power,
            })))
        }
    }
}

/// Run the command line `argv` (program name first), writing results to `out`
/// and diagnostics to `err`. Returns the process exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(rendered.as_bytes()) } else { out.write_all(rendered.as_bytes()) };
            return status;
        }
    };
    match execute(cli.command) {
        Ok(o) => {
            let _ = writeln!(out, "{}", o.text);
            o.status
        }
        Err(e) => {
            let _ = writeln!(err, "{}", to_json(&json!({ "error": e.to_string(), "kind": e.kind() })));
            EXIT_DOMAIN
        }
    }
}
