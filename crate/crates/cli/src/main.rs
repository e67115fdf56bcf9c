//! `smashline`: moment tables, coproduct expansions, diffusion solves and the
//! verification ledger.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use smashline::matrix_realization::{DualVariant, Regime, Scheme};

use config::{set, Format, Prefactor, RunConfig};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "smashline", version, about = "Algebraic Brownian motion on the smash line")]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Main output file (the summary goes next to it as `<stem>.summary.json`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Nilpotency order of ξ.
    #[arg(long = "N", global = true)]
    order: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Table of n-step moments ⟨x^k ξ^l⟩.
    Moments(MomentArgs),
    /// Iterated coproduct of a monomial x^k ξ^l.
    Coproduct(CoproductArgs),
    /// Continuum-limit diffusion.
    Diffusion {
        #[command(subcommand)]
        action: DiffusionAction,
    },
    /// Run the invariant suite and write the ledger.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct MomentArgs {
    /// Cross braiding factor between x and ξ increments.
    #[arg(long = "Q")]
    big_q: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    /// Step counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    l_max: Option<usize>,
    /// Also evaluate the normal-ordering oracle.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct CoproductArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    /// Number of tensor slots.
    #[arg(long)]
    parts: Option<usize>,
}

#[derive(Subcommand)]
enum DiffusionAction {
    /// Solve the coupled component system on a grid.
    Solve(DiffusionArgs),
    /// Evaluate the heat kernel and the ξ-sector closed form.
    ClosedForm(DiffusionArgs),
    /// PDE residual of the heat kernel.
    Residual(DiffusionArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct DiffusionArgs {
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    /// Real part of α2.
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    alpha2_im: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    lambda_tilde: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    variant: Option<DualVariant>,
    #[arg(long)]
    regime: Option<String>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    upwind: bool,
    #[arg(long)]
    sigma0: Option<f64>,
    /// Times for `closed-form`, comma separated.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    prefactor: Option<Prefactor>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    dt_fd: Option<f64>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct VerifyArgs {
    /// Orders N to check, comma separated.
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
}

fn parse_regime(s: &str) -> CliResult<Regime> {
    match s {
        "stationary" => Ok(Regime::Stationary),
        "nonstationary" => Ok(Regime::Nonstationary),
        other => Err(CliError::Validation(format!("unknown regime '{other}'"))),
    }
}

impl DiffusionArgs {
    fn apply(self, cfg: &mut RunConfig, residual_grid: bool) -> CliResult<()> {
        let p = &mut cfg.diffusion;
        set(&mut p.c1, self.c1);
        set(&mut p.alpha1, self.alpha1);
        set(&mut p.c2, self.c2);
        set(&mut p.alpha2.re, self.alpha2);
        set(&mut p.alpha2.im, self.alpha2_im);
        set(&mut p.lambda, self.lambda);
        set(&mut p.lambda_tilde, self.lambda_tilde);
        set(&mut p.t, self.t);
        set(&mut cfg.variant, self.variant);
        if let Some(r) = self.regime {
            cfg.regime = parse_regime(&r)?;
        }
        // x-range flags address the residual sampling grid for `residual`
        if residual_grid {
            let r = &mut cfg.residual;
            set(&mut r.x_min, self.x_min);
            set(&mut r.x_max, self.x_max);
            set(&mut r.dx, self.dx);
        } else {
            let g = &mut cfg.grid;
            set(&mut g.x_min, self.x_min);
            set(&mut g.x_max, self.x_max);
            set(&mut g.dx, self.dx);
        }
        let g = &mut cfg.grid;
        set(&mut g.dt, self.dt);
        set(&mut g.t_end, self.t_end);
        set(&mut g.scheme, self.scheme);
        set(&mut g.stride, self.stride);
        g.upwind |= self.upwind;
        let r = &mut cfg.residual;
        set(&mut r.t_min, self.t_min);
        set(&mut r.t_max, self.t_max);
        set(&mut r.nt, self.nt);
        set(&mut r.dt_fd, self.dt_fd);
        set(&mut cfg.sigma0, self.sigma0);
        set(&mut cfg.times, self.times);
        set(&mut cfg.prefactor, self.prefactor);
        Ok(())
    }
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("SMASHLINE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("SMASHLINE_THREADS = '{v}' is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

type Action = dyn FnOnce(&RunConfig, &Path) -> CliResult<serde_json::Value>;

fn default_output(name: &str, format: Format) -> PathBuf {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    PathBuf::from(format!("{name}.{ext}"))
}

fn run(cli: Cli) -> CliResult<()> {
    let started = Instant::now();
    init_threads()?;
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    set(&mut cfg.order, cli.order);
    set(&mut cfg.format, cli.format);

    let (name, action): (&str, Box<Action>) = match cli.command {
        Command::Moments(a) => {
            set(&mut cfg.big_q, a.big_q);
            set(&mut cfg.step.a, a.a);
            set(&mut cfg.step.p1, a.p1);
            set(&mut cfg.step.theta, a.theta);
            set(&mut cfg.step.p2, a.p2);
            set(&mut cfg.n, a.n);
            set(&mut cfg.k_max, a.k_max);
            set(&mut cfg.l_max, a.l_max);
            cfg.oracle |= a.oracle;
            ("moments", Box::new(commands::moments::run))
        }
        Command::Coproduct(a) => {
            set(&mut cfg.coproduct.k, a.k);
            set(&mut cfg.coproduct.l, a.l);
            set(&mut cfg.coproduct.parts, a.parts);
            ("coproduct", Box::new(commands::coproduct::run))
        }
        Command::Diffusion { action } => match action {
            DiffusionAction::Solve(a) => {
                a.apply(&mut cfg, false)?;
                ("solve", Box::new(commands::diffusion::solve))
            }
            DiffusionAction::ClosedForm(a) => {
                a.apply(&mut cfg, false)?;
                ("closed-form", Box::new(commands::diffusion::closed_form))
            }
            DiffusionAction::Residual(a) => {
                a.apply(&mut cfg, true)?;
                ("residual", Box::new(commands::diffusion::residual))
            }
        },
        Command::Verify(a) => {
            set(&mut cfg.orders, a.orders);
            // the ledger is always JSON
            let output = cli.output.clone().unwrap_or_else(|| PathBuf::from("verify.json"));
            let (results, failures) = commands::verify::run(&cfg, &output)?;
            output::write_summary("verify", &output, &cfg, results, started)?;
            if !failures.is_empty() {
                return Err(CliError::Invariant(failures.join(", ")));
            }
            println!("{}", output.display());
            return Ok(());
        }
    };
    let output = cli.output.unwrap_or_else(|| default_output(name, cfg.format));
    let results = action(&cfg, &output)?;
    output::write_summary(name, &output, &cfg, results, started)?;
    println!("{}", output.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("smashline: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
