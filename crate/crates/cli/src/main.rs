//! `lab`: batch runner for the three-circle checks.
//!
//! Exit status is 0 when every check passes, 1 when a check reports a
//! violation that was not expected, and 2 on usage or numerical errors.

// Negated comparisons are NaN guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use threecircle::suite::SUITES;

use crate::config::{parse_list, ModelField, RadiiField, RunConfig};

#[derive(Parser)]
#[command(name = "lab", version, about = "Three-circle experiments on radial Kähler models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate curvature and the model Hessian on the radii.
    Curvature,
    /// Solve the Riccati comparison equation and its convexifier.
    Ode,
    /// Check convexity of log M_f in h.
    ThreeCircle,
    /// Check monotonicity of log M_f − d·h.
    Monotonicity,
    /// Fit the small-radius deficit of M_z1(r)/r.
    Necessity,
    /// Sweep the homogeneity defect over large radii.
    Homogeneity,
    /// Dimension bounds for polynomial-growth spaces.
    Dimension,
    /// Run a bundled acceptance suite.
    Suite {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        name: String,
    },
}

#[derive(Args)]
struct Flags {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// flat, cigar, hyperbolic, sphere or conformal_poly.
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    /// Coefficients c0,c1,... of a conformal_poly profile.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<f64>>,
    #[arg(long, global = true)]
    rho_max: Option<f64>,
    /// Profile table with columns `rho lambda`.
    #[arg(long, global = true)]
    profile: Option<String>,
    /// Complex dimension.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Polynomial in z (n = 1) or z1..zN, e.g. "z^3 + (1+2i) z".
    #[arg(long, global = true, allow_hyphen_values = true)]
    f: Option<String>,
    /// Center of the balls, e.g. "0.5-0.2i" (n = 1 only).
    #[arg(long, global = true, allow_hyphen_values = true)]
    center: Option<String>,
    /// start:stop:count, or a comma-separated list.
    #[arg(long, global = true)]
    radii: Option<String>,
    /// Space start:stop:count radii linearly instead of logarithmically.
    #[arg(long, global = true)]
    linear: bool,
    /// auto, logr, log_tanh, log_tan, log_sinh, power_decay or riccati.
    #[arg(long, global = true)]
    h: Option<String>,
    #[arg(long = "A", global = true)]
    a: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long = "C", global = true)]
    c: Option<f64>,
    #[arg(long, global = true)]
    c1: Option<f64>,
    #[arg(long = "B", global = true)]
    big_b: Option<f64>,
    #[arg(long, global = true)]
    r0: Option<f64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Count a violation as the desired outcome.
    #[arg(long, global = true)]
    expect_violation: bool,
    #[arg(long, global = true, env = "LAB_SEED")]
    seed: Option<u64>,
    /// Write the curve CSV here.
    #[arg(long, global = true)]
    csv: Option<String>,
    /// Write the JSON report here (`-` for standard output).
    #[arg(long, global = true)]
    json: Option<String>,
    #[arg(long, global = true)]
    d: Option<f64>,
    /// nonincreasing or nondecreasing.
    #[arg(long, global = true)]
    direction: Option<String>,
    #[arg(long = "K", global = true)]
    k: Option<f64>,
    #[arg(long, global = true)]
    rays: Option<usize>,
    /// constant:VALUE, cigar, power_decay, inverse_square or model.
    #[arg(long, global = true)]
    bound: Option<String>,
    /// Supersolution to check against the bound: flat, hyperbolic,
    /// spherical, cigar, power_decay or inverse_square_claim.
    #[arg(long, global = true)]
    verify: Option<String>,
    #[arg(long, global = true)]
    r_end: Option<f64>,
    /// euclidean, power-decay, exp-growth or h.
    #[arg(long, global = true)]
    regime: Option<String>,
    /// lo,hi radius window for measuring the growth of h.
    #[arg(long, global = true)]
    window: Option<String>,
}

impl Flags {
    fn to_config(&self) -> Result<RunConfig> {
        let radii = match &self.radii {
            Some(s) if s.contains(':') => Some(RadiiField::Range(s.clone())),
            Some(s) => Some(RadiiField::List(parse_list(s)?)),
            None => None,
        };
        let window = match &self.window {
            Some(s) => match parse_list(s)?[..] {
                [lo, hi] => Some([lo, hi]),
                _ => bail!("--window takes lo,hi"),
            },
            None => None,
        };
        Ok(RunConfig {
            model: self.model.clone().map(ModelField::Tag),
            kappa: self.kappa,
            coeffs: self.coeffs.clone(),
            rho_max: self.rho_max,
            profile: self.profile.clone(),
            n: self.n,
            f: self.f.clone(),
            center: self.center.clone(),
            radii,
            linear: self.linear.then_some(true),
            h: self.h.clone(),
            a: self.a,
            eps: self.eps,
            c: self.c,
            c1: self.c1,
            big_b: self.big_b,
            r0: self.r0,
            tol: self.tol,
            expect_violation: self.expect_violation.then_some(true),
            seed: self.seed,
            csv: self.csv.clone(),
            json: self.json.clone(),
            d: self.d,
            direction: self.direction.clone(),
            k: self.k,
            rays: self.rays,
            bound: self.bound.clone(),
            verify: self.verify.clone(),
            r_end: self.r_end,
            regime: self.regime.clone(),
            window,
        })
    }
}

fn run(cli: Cli) -> Result<bool> {
    let start = Instant::now();
    let (cfg, echo) = RunConfig::load(cli.flags.config.as_deref(), &cli.flags.to_config()?)?;
    let mut out = match &cli.command {
        Command::Curvature => commands::curvature(&cfg, echo),
        Command::Ode => commands::ode(&cfg, echo),
        Command::ThreeCircle => commands::three_circle(&cfg, echo),
        Command::Monotonicity => commands::monotonicity(&cfg, echo),
        Command::Necessity => commands::necessity(&cfg, echo),
        Command::Homogeneity => commands::homogeneity(&cfg, echo),
        Command::Dimension => commands::dimension(&cfg, echo),
        Command::Suite { name } => commands::suite(name, &cfg, echo),
    }?;
    out.report.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);

    match (&cfg.csv, &out.csv) {
        (Some(path), Some(body)) => std::fs::write(path, body).with_context(|| format!("writing {path}"))?,
        (Some(_), None) => bail!("this command produces no CSV output"),
        _ => {}
    }
    let text = match cfg.json.as_deref() {
        Some("-") => out.report.to_json() + "\n",
        Some(path) => {
            std::fs::write(path, out.report.to_json() + "\n").with_context(|| format!("writing {path}"))?;
            summary(&out)
        }
        None => summary(&out),
    };
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    Ok(out.report.passed)
}

fn summary(out: &commands::Outcome) -> String {
    format!(
        "{}\n{}seed {}  elapsed {:.1} ms\n",
        out.headline,
        out.report.summary_table(),
        out.report.seed,
        out.report.elapsed_ms.unwrap_or(0.0)
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
