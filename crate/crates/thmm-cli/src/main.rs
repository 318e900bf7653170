//! Command line front end: generate moment fixtures, check solvability,
//! evaluate resolvents, verify the identity battery and expand the
//! resolvents in power series.  All output is JSON.
//!
//! Exit codes: 0 success, 1 input error, 2 numerical failure,
//! 3 assumption or solvability failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use thmm::expansions::{series_at, Center};
use thmm::identities::{run_battery, TolProfile};
use thmm::moments::{
    check_solvability, measure_to_json, moments_from_json, moments_to_json,
    random_hausdorff_sequence, Interval, MomentSequence, Parity, PD_TOL,
};
use thmm::resolvent::{u_even, u_odd, v_even_poly, v_odd_poly, ResolventEval};
use thmm::Error;

#[derive(Parser)]
#[command(
    name = "thmm",
    version,
    about = "Truncated Hausdorff matrix moment toolkit"
)]
struct Cli {
    /// Output format (only json is supported).
    #[arg(long, global = true, default_value = "json")]
    format: String,
    /// Write the primary output to this path instead of stdout
    /// (for `gen`: directory receiving measure.json and moments.json).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Positive definiteness threshold relative to the matrix scale.
    #[arg(long, global = true, default_value_t = PD_TOL)]
    tol: f64,
    /// Seed for the fixture generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a discrete matrix measure and its moment sequence.
    Gen {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
    /// Report the solvability verdict of a moment file.
    Check { file: PathBuf },
    /// Evaluate a resolvent matrix at a list of points.
    Resolvent {
        file: PathBuf,
        /// U: resolvent at the point a; V: resolvent at the point 0.
        #[arg(long, value_enum)]
        which: Which,
        /// Points "re,im" separated by semicolons, e.g. "0.25,0;1,-0.5".
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Run the identity battery and emit the report.
    Verify {
        file: PathBuf,
        #[arg(long)]
        tol_structural: Option<f64>,
        #[arg(long)]
        tol_moment: Option<f64>,
        #[arg(long)]
        tol_one_inverse: Option<f64>,
        #[arg(long)]
        tol_nested: Option<f64>,
    },
    /// Power-series coefficients of the resolvent at 0 or at a.
    Expand {
        file: PathBuf,
        /// Expansion center: "0" or "a".
        #[arg(long)]
        center: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "UPPER")]
enum Which {
    U,
    V,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::AssumptionViolated(_) => 3,
        Error::SingularMatrix { .. } => 2,
        _ => 1,
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_moments(path: &Path) -> Result<MomentSequence, Error> {
    let text = fs::read_to_string(path)?;
    moments_from_json(&text)
}

fn parse_points(text: &str) -> Result<Vec<Complex64>, Error> {
    text.split(';')
        .filter(|chunk| !chunk.trim().is_empty())
        .map(|chunk| {
            let parts: Vec<&str> = chunk.split(',').map(str::trim).collect();
            let bad = || Error::InvalidArgument(format!("cannot parse point '{chunk}'"));
            match parts.as_slice() {
                [re] => Ok(Complex64::new(re.parse().map_err(|_| bad())?, 0.0)),
                [re, im] => Ok(Complex64::new(
                    re.parse().map_err(|_| bad())?,
                    im.parse().map_err(|_| bad())?,
                )),
                _ => Err(bad()),
            }
        })
        .collect()
}

fn matrix_json(m: &thmm::mat::CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn eval_json(eval: &ResolventEval) -> Value {
    json!({
        "z": [eval.z.re, eval.z.im],
        "alpha": matrix_json(&eval.alpha()),
        "beta": matrix_json(&eval.beta()),
        "gamma": matrix_json(&eval.gamma()),
        "delta": matrix_json(&eval.delta()),
    })
}

fn run(cli: Cli) -> Result<u8, Error> {
    if cli.format != "json" {
        return Err(Error::InvalidArgument(format!(
            "unsupported format '{}'",
            cli.format
        )));
    }
    match cli.command {
        Command::Gen { q, m, a, b } => {
            let interval = Interval::new(a, b)?;
            let (mu, seq) = random_hausdorff_sequence(q, m, interval, cli.seed)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("measure.json"), measure_to_json(&mu))?;
            fs::write(dir.join("moments.json"), moments_to_json(&seq))?;
            let verdict = check_solvability(&seq, PD_TOL)?;
            println!("{}", serde_json::to_string_pretty(&verdict)?);
            Ok(0)
        }
        Command::Check { file } => {
            let seq = load_moments(&file)?;
            let verdict = check_solvability(&seq, cli.tol)?;
            let ok = verdict.pd
                && verdict.h1tilde_invertible.unwrap_or(true)
                && verdict.gamma_invertible.unwrap_or(true);
            emit(&cli.out, &serde_json::to_string_pretty(&verdict)?)?;
            Ok(if ok { 0 } else { 3 })
        }
        Command::Resolvent { file, which, z } => {
            let seq = load_moments(&file)?;
            let points = parse_points(&z)?;
            let (parity, n) = Parity::of_order(seq.order());
            let evals: Vec<Value> = match (which, parity) {
                (Which::U, Parity::EvenCount) => {
                    let u = u_even(&seq, n)?;
                    points.iter().map(|&p| eval_json(&u.eval(p))).collect()
                }
                (Which::U, Parity::OddCount) => {
                    let u = u_odd(&seq, n)?;
                    points.iter().map(|&p| eval_json(&u.eval(p))).collect()
                }
                (Which::V, Parity::EvenCount) => {
                    let (v, _) = v_even_poly(&seq, n)?;
                    points.iter().map(|&p| eval_json(&v.eval(p))).collect()
                }
                (Which::V, Parity::OddCount) => {
                    let (v, _) = v_odd_poly(&seq, n)?;
                    points.iter().map(|&p| eval_json(&v.eval(p))).collect()
                }
            };
            let doc = json!({
                "which": match which { Which::U => "U", Which::V => "V" },
                "m": seq.order(),
                "n": n,
                "q": seq.q,
                "evals": evals,
            });
            emit(&cli.out, &serde_json::to_string_pretty(&doc)?)?;
            Ok(0)
        }
        Command::Verify {
            file,
            tol_structural,
            tol_moment,
            tol_one_inverse,
            tol_nested,
        } => {
            let seq = load_moments(&file)?;
            let verdict = check_solvability(&seq, cli.tol)?;
            if !verdict.pd {
                emit(&cli.out, &serde_json::to_string_pretty(&verdict)?)?;
                return Ok(3);
            }
            let mut tols = TolProfile::default();
            if let Some(t) = tol_structural {
                tols.structural = t;
            }
            if let Some(t) = tol_moment {
                tols.moment = t;
            }
            if let Some(t) = tol_one_inverse {
                tols.one_inverse = t;
            }
            if let Some(t) = tol_nested {
                tols.nested = t;
            }
            let grid = thmm::resolvent::default_grid(seq.interval);
            let report = run_battery(&seq, &grid, &tols, None)?;
            emit(&cli.out, &report.to_json())?;
            Ok(if report.overall { 0 } else { 2 })
        }
        Command::Expand { file, center } => {
            let seq = load_moments(&file)?;
            let center = match center.as_str() {
                "0" => Center::Zero,
                "a" => Center::LeftEndpoint,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "center must be '0' or 'a', got '{other}'"
                    )))
                }
            };
            let series = series_at(&seq, center)?;
            let doc = json!({
                "center": match center { Center::Zero => "0", Center::LeftEndpoint => "a" },
                "parity": match series.parity {
                    Parity::EvenCount => "even-count",
                    Parity::OddCount => "odd-count",
                },
                "n": series.n,
                "coefficients": series.coeffs.iter().map(matrix_json).collect::<Vec<_>>(),
                "extraction_diffs": series.diffs,
            });
            emit(&cli.out, &serde_json::to_string_pretty(&doc)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
