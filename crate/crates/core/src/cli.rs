//! Command-line front end. Every command prints one JSON report on standard
//! output; usage and input errors go to standard error.
//!
//! Exit codes: 0 on success, 2 when a candidate or convexity claim is
//! falsified or a worked-example fact fails, 1 on usage or input errors.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expr::ConvexMatrixExpr;
use crate::oracle::{falsify_convexity, Oracle};
use crate::repro::{abs_sum_2x2, build_example, diag_max_2x, double_abs, hinge_split};
use crate::spec_file;
use crate::subgrad::{clarke_sample, subdiff_interval_1d, subgradient, MatTuple, DEFAULT_DIFF_TOL};
use crate::symmat::{SymMat, DEFAULT_PSD_TOL};

#[derive(Parser, Debug)]
#[command(name = "matsubdiff", about = "Subgradients of convex matrix-valued functions")]
struct Cli {
    /// Indent the JSON report.
    #[arg(long, global = true)]
    pretty: bool,
    /// Relative tolerance of PSD tests.
    #[arg(long, global = true, default_value_t = DEFAULT_PSD_TOL)]
    tol: f64,
    /// Differentiability tolerance for gradients and Clarke sampling.
    #[arg(long, global = true, default_value_t = DEFAULT_DIFF_TOL)]
    diff_tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate F(x).
    Eval {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        /// Comma-separated point.
        #[arg(short = 'x', long = "point", allow_hyphen_values = true)]
        x: String,
    },
    /// A subgradient from the calculus rules, with the rule tree that produced it.
    Subgrad {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(short = 'x', long = "point", allow_hyphen_values = true)]
        x: String,
    },
    /// Exact subdifferential of a univariate function as a Loewner interval.
    Interval {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(short = 'x', long = "point", allow_hyphen_values = true)]
        x: String,
    },
    /// Verify or falsify a candidate subgradient.
    Check {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(short = 'x', long = "point", allow_hyphen_values = true)]
        x: String,
        /// JSON array of d symmetric matrices (a single matrix is accepted when d = 1).
        #[arg(short = 'V', long = "candidate")]
        candidate: PathBuf,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Split the budget over this many threads.
        #[arg(long, default_value_t = 1)]
        shards: usize,
    },
    /// Sample gradients at smooth points near x.
    Clarke {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(short = 'x', long = "point", allow_hyphen_values = true)]
        x: String,
        #[arg(short = 'n', long = "samples", default_value_t = 1000)]
        n: usize,
        #[arg(short = 'r', long = "radius", default_value_t = 1e-3)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search for a violation of matrix convexity.
    FalsifyConvexity {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the facts of a worked example.
    Repro {
        #[arg(long)]
        name: String,
    },
    /// Print the function spec of a worked example.
    ExampleSpec {
        /// abs-sum-2x2, diag-max-2x, sum-strict-f1, sum-strict-f2 or double-abs
        #[arg(long)]
        name: String,
    },
}

/// What a CLI invocation produced.
#[derive(Clone, Debug, PartialEq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliOutput {
    fn usage(message: String) -> Self {
        CliOutput {
            code: 1,
            stdout: String::new(),
            stderr: message,
        }
    }
}

/// Runs the command line `argv` (including the program name).
pub fn run<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutput::usage(text)
            } else {
                CliOutput {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    if !(cli.tol >= 0.0) || !(cli.diff_tol >= 0.0) {
        return CliOutput::usage("error: tolerances must be nonnegative\n".into());
    }
    let started = Instant::now();
    match execute(&cli) {
        Ok(report) => {
            let code = report.code;
            let mut doc = json!({
                "command": report.command,
                "inputs": report.inputs,
                "result": report.result,
                "seed": report.seed,
                "tolerances": {"psd": cli.tol, "diff": cli.diff_tol},
            });
            doc["wall_time_ms"] = json!(started.elapsed().as_secs_f64() * 1e3);
            let stdout = if cli.pretty {
                serde_json::to_string_pretty(&doc)
            } else {
                serde_json::to_string(&doc)
            }
            .expect("serializable")
                + "\n";
            CliOutput {
                code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => CliOutput::usage(format!("error: {e}\n")),
    }
}

struct Report {
    command: &'static str,
    inputs: Value,
    result: Value,
    seed: Option<u64>,
    code: i32,
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidArgument(format!("bad coordinate `{p}` in `{text}`")))
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ConvexMatrixExpr> {
    spec_file::from_str(&read(path)?)
}

fn matrix_from(v: &Value, what: &str) -> Result<SymMat> {
    let rows: Vec<Vec<f64>> = serde_json::from_value(v.clone())
        .map_err(|e| Error::InvalidArgument(format!("{what}: expected an array of rows ({e})")))?;
    SymMat::from_rows(&rows)
}

fn load_candidate(path: &Path, d: usize) -> Result<MatTuple> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("{}: malformed JSON: {e}", path.display())))?;
    let items = v
        .as_array()
        .ok_or_else(|| Error::InvalidArgument("candidate must be a JSON array".into()))?;
    let single = d == 1 && items.first().is_some_and(|r| r.as_array().is_some_and(|r| r.iter().all(Value::is_number)));
    if single {
        return Ok(MatTuple::from(matrix_from(&v, "candidate")?));
    }
    let mats = items
        .iter()
        .enumerate()
        .map(|(i, m)| matrix_from(m, &format!("candidate[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    MatTuple::new(mats)
}

fn example_spec(name: &str) -> Result<ConvexMatrixExpr> {
    Ok(match name {
        "abs-sum-2x2" => abs_sum_2x2(),
        "diag-max-2x" | "sum-strict" => diag_max_2x(),
        "sum-strict-f1" => hinge_split().0,
        "sum-strict-f2" => hinge_split().1,
        "double-abs" => double_abs(),
        other => return Err(Error::UnknownExample(other.to_string())),
    })
}

fn execute(cli: &Cli) -> Result<Report> {
    let oracle = Oracle::new(cli.tol);
    Ok(match &cli.command {
        Command::Eval { file, x } => {
            let f = load(file)?;
            let x = parse_point(x)?;
            let value = f.evaluate(&x)?;
            Report {
                command: "eval",
                inputs: json!({"file": file, "x": x}),
                result: json!({"value": value}),
                seed: None,
                code: 0,
            }
        }
        Command::Subgrad { file, x } => {
            let f = load(file)?;
            let x = parse_point(x)?;
            let cert = subgradient(&f, &x)?;
            Report {
                command: "subgrad",
                inputs: json!({"file": file, "x": x}),
                result: to_json(&cert),
                seed: None,
                code: 0,
            }
        }
        Command::Interval { file, x } => {
            let f = load(file)?;
            let x = parse_point(x)?;
            if x.len() != 1 || f.input_dim() != 1 {
                return Err(Error::NotUnivariate(f.input_dim()));
            }
            let iv = subdiff_interval_1d(&f, x[0])?;
            Report {
                command: "interval",
                inputs: json!({"file": file, "x": x}),
                result: to_json(&iv),
                seed: None,
                code: 0,
            }
        }
        Command::Check {
            file,
            x,
            candidate,
            budget,
            seed,
            shards,
        } => {
            let f = load(file)?;
            let x = parse_point(x)?;
            let v = load_candidate(candidate, f.input_dim())?;
            let verdict = oracle.check_subgradient_sharded(&f, &x, &v, *budget, *seed, *shards)?;
            Report {
                command: "check",
                inputs: json!({"file": file, "x": x, "candidate": v, "budget": budget, "shards": shards}),
                code: if verdict.is_falsified() { 2 } else { 0 },
                result: to_json(&verdict),
                seed: Some(*seed),
            }
        }
        Command::Clarke {
            file,
            x,
            n,
            radius,
            seed,
        } => {
            let f = load(file)?;
            let x = parse_point(x)?;
            let sample = clarke_sample(&f, &x, *n, *radius, *seed)?;
            let generators: Vec<Value> = sample
                .distinct()
                .into_iter()
                .map(|(g, count)| json!({"value": g, "count": count}))
                .collect();
            Report {
                command: "clarke",
                inputs: json!({"file": file, "x": x, "n": n, "radius": radius}),
                result: json!({
                    "generators": generators,
                    "drawn": sample.drawn,
                    "nonsmooth": sample.nonsmooth,
                    "lipschitz_estimate": sample.lipschitz_estimate(),
                }),
                seed: Some(*seed),
                code: 0,
            }
        }
        Command::FalsifyConvexity { file, budget, seed } => {
            let f = load(file)?;
            let w = falsify_convexity(&f, *budget, *seed, cli.tol)?;
            Report {
                command: "falsify-convexity",
                inputs: json!({"file": file, "budget": budget}),
                code: if w.is_some() { 2 } else { 0 },
                result: json!({"witness": w}),
                seed: Some(*seed),
            }
        }
        Command::Repro { name } => {
            let ex = build_example(name)?;
            let facts = ex.run();
            let passed = facts.iter().all(|f| f.passed);
            Report {
                command: "repro",
                inputs: json!({"name": name}),
                result: json!({"facts": facts, "passed": passed}),
                seed: None,
                code: if passed { 0 } else { 2 },
            }
        }
        Command::ExampleSpec { name } => {
            let f = example_spec(name)?;
            Report {
                command: "example-spec",
                inputs: json!({"name": name}),
                result: spec_file::to_value(&f),
                seed: None,
                code: 0,
            }
        }
    })
}
