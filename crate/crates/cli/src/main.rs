//! `crysect`: command-line front end.
//!
//! Exit codes: 0 success, 1 suite failure, 2 configuration or input error,
//! 3 precision or budget exhaustion.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crysect_core::{Error, Result};
use config::{EpsSetting, RunConfig};

#[derive(Parser)]
#[command(name = "crysect", version, about = "Deformation loci, decay profiles and lattice densities at a superspecial point")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// TOML file with RunConfig fields; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Nonresidue residue or "auto".
    #[arg(long, global = true)]
    eps: Option<String>,
    /// p-adic precision N.
    #[arg(long = "precision", short = 'N', global = true)]
    precision: Option<u32>,
    /// Total-degree bound D.
    #[arg(long = "degree-bound", short = 'D', global = true)]
    degree_bound: Option<u32>,
    /// Largest t-precision T.
    #[arg(long = "t-precision", short = 'T', global = true)]
    t_precision: Option<usize>,
    #[arg(long, global = true)]
    point_budget: Option<u64>,
    #[arg(long, global = true)]
    wall_clock: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Frobenius data, strata equations and optionally F_∞.
    Crystal {
        #[arg(long)]
        f_infty: bool,
    },
    /// The series G_{n,⋆}(ω).
    Gseries {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "even")]
        star: String,
        #[arg(long)]
        omega: String,
        /// Evaluate through the recursion from level m.
        #[arg(long)]
        recursive: Option<u32>,
    },
    /// Decay profile and intersection multiplicities of a curve.
    Decay {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value = "0,0,1,0,0")]
        omega: String,
        #[arg(long, default_value_t = 3)]
        nmax: u32,
        /// Also check lifting degrees along the case-adapted basis.
        #[arg(long)]
        classify: bool,
    },
    /// Local density δ(l, L, m).
    Density {
        /// Preset (ambient, model-p3, q-prime) or a form JSON file.
        #[arg(long, default_value = "q-prime")]
        lattice: String,
        #[arg(long)]
        l: u64,
        #[arg(long)]
        m: i64,
        /// Fixed level a instead of stabilizing.
        #[arg(long)]
        level: Option<u32>,
        #[arg(long)]
        hanke: bool,
    },
    /// Eisenstein coefficients q_L(m).
    Eisenstein {
        #[arg(long, default_value = "ambient")]
        lattice: String,
        /// e.g. "1,4,10" or "1..2000".
        #[arg(long = "m-set")]
        m_set: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value = "json")]
        out: String,
    },
    /// Local intersections l_P(m) against the global share g_P(m).
    Intersect {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value = "model-p3")]
        lattice: String,
        /// e.g. "1..100/3" keeps the m that are squares mod 3.
        #[arg(long = "m-set")]
        m_set: String,
        #[arg(long, default_value_t = 1)]
        nmax: u32,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value = "csv")]
        out: String,
    },
    /// Print the resolved configuration as TOML.
    Config,
    /// Run a named property suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Include wall times (the report is then not reproducible byte for byte).
        #[arg(long)]
        timings: bool,
    },
}

fn resolve_config(g: &GlobalOpts) -> Result<RunConfig> {
    let mut c = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = g.p {
        c.p = p;
    }
    if let Some(e) = &g.eps {
        c.eps = EpsSetting::Named(e.clone());
    }
    if let Some(n) = g.precision {
        c.precision = n;
    }
    if g.degree_bound.is_some() {
        c.degree_bound = g.degree_bound;
    }
    if let Some(t) = g.t_precision {
        c.t_precision = t;
    }
    if let Some(b) = g.point_budget {
        c.point_budget = b;
    }
    if let Some(w) = g.wall_clock {
        c.wall_clock_secs = w;
    }
    if let Some(s) = g.seed {
        c.seed = s;
    }
    c.validate()?;
    Ok(c)
}

fn format_out(out: &str) -> Result<bool> {
    match out {
        "csv" => Ok(true),
        "json" => Ok(false),
        _ => Err(Error::Config(format!("--out must be csv or json, got {out:?}"))),
    }
}

/// Output text and whether the command succeeded.
fn run(cli: &Cli) -> Result<(String, bool)> {
    let cfg = resolve_config(&cli.global)?;
    let start = Instant::now();
    let res = match &cli.command {
        Command::Crystal { f_infty } => (commands::crystal(&cfg, *f_infty)?, true),
        Command::Gseries { n, star, omega, recursive } => (commands::gseries(&cfg, *n, star, omega, *recursive)?, true),
        Command::Decay { curve, omega, nmax, classify } => (commands::decay(&cfg, curve, omega, *nmax, *classify)?, true),
        Command::Density { lattice, l, m, level, hanke } => (commands::density(&cfg, lattice, *l, *m, *level, *hanke)?, true),
        Command::Eisenstein { lattice, m_set, tol, out } => {
            (commands::eisenstein(&cfg, lattice, &commands::parse_m_set(m_set)?, *tol, format_out(out)?)?, true)
        }
        Command::Intersect { curve, lattice, m_set, nmax, tol, out } => {
            (commands::intersect(&cfg, curve, lattice, &commands::parse_m_set(m_set)?, *nmax, *tol, format_out(out)?)?, true)
        }
        Command::Config => (cfg.to_toml(), true),
        Command::Verify { suite, timings } => commands::verify(&cfg, suite, *timings)?,
    };
    let secs = start.elapsed().as_secs_f64();
    if secs > cfg.wall_clock_secs {
        return Err(Error::budget("wall clock", format!("{secs:.1}s exceeds the {:.1}s cap", cfg.wall_clock_secs)));
    }
    Ok(res)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, ok)) => {
            let text = if text.ends_with('\n') { text } else { text + "\n" };
            match &cli.global.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
