//! Manufactured-solution runs of the pressure-correction schemes.
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use navier_pc::harness::run::logfmt;
use navier_pc::harness::{parse_config, run_case, run_sweep, RunConfig};

#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single case and write its steps and summary CSV files.
    Run(Opts),
    /// Run every combination of the level lists and write a rate table.
    Sweep(Opts),
}

#[derive(Args)]
struct Opts {
    /// Config file with one `key = value` per line.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// implicit, explicit or explicit-star (comma list for sweeps).
    #[arg(long)]
    scheme: Option<String>,

    /// temporal or spatial.
    #[arg(long)]
    mode: Option<String>,

    /// Spatial level, h = 2^(-s-4). Sweeps take lists like `1,2` or `1..3`.
    #[arg(long = "s", value_name = "S")]
    s: Option<String>,

    /// Temporal level, k = 2^(-l-7) (times 0.1 in spatial mode).
    #[arg(long = "l", value_name = "L")]
    l: Option<String>,

    #[arg(long)]
    nu: Option<String>,

    #[arg(long)]
    dim: Option<String>,

    /// Inverse-inequality constant used by the viscous diagnostic.
    #[arg(long)]
    cinv: Option<String>,

    /// Final time; must be a multiple of k.
    #[arg(long = "T", value_name = "T")]
    t_end: Option<String>,

    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Per-step logfmt lines on stderr.
    #[arg(long)]
    verbose: bool,

    /// Permit 3D grids finer than 128³.
    #[arg(long)]
    allow_large: bool,
}

impl Opts {
    fn config(&self) -> navier_pc::Result<RunConfig> {
        let text = match &self.config {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        let mut overrides: Vec<(&str, String)> = Vec::new();
        for (key, v) in [
            ("scheme", &self.scheme),
            ("mode", &self.mode),
            ("s", &self.s),
            ("l", &self.l),
            ("nu", &self.nu),
            ("dim", &self.dim),
            ("cinv", &self.cinv),
            ("T", &self.t_end),
        ] {
            if let Some(v) = v {
                overrides.push((key, v.clone()));
            }
        }
        if let Some(out) = &self.out {
            overrides.push(("out", out.display().to_string()));
        }
        if self.allow_large {
            overrides.push(("allow_large", "true".into()));
        }
        parse_config(&text, overrides)
    }
}

fn run(opts: &Opts) -> navier_pc::Result<()> {
    let cfg = opts.config()?;
    let case = cfg.single_case()?;
    let (out, files) = run_case(&case, &cfg.out, |r| {
        if opts.verbose {
            eprintln!("{}", logfmt(&case, r));
        }
    })?;
    let r = &out.report;
    println!(
        "{} err_l2l2_pred={:.4e} err_l2h1_pred={:.4e} err_l2l2_pres={:.4e} steps={}/{}{}",
        case.tag(),
        r.l2l2_pred(),
        r.l2h1_pred(),
        r.l2l2_pres(),
        out.records.len(),
        case.n_steps,
        if out.diverged { " diverged" } else { "" }
    );
    for f in &files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn sweep(opts: &Opts) -> navier_pc::Result<()> {
    let cfg = opts.config()?;
    let (rows, path) = run_sweep(
        &cfg,
        |o| eprintln!("done {} err_l2l2_pred={:.4e}", o.case.tag(), o.report.l2l2_pred()),
        |case, r| {
            if opts.verbose {
                eprintln!("{}", logfmt(case, r));
            }
        },
    )?;
    let rate = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
    println!("{:<14} {:>2} {:>2} {:>11} {:>11} {:>11} {:>7} {:>7}", "scheme", "s", "l", "l2l2", "l2h1", "pres", "rate", "rate_h1");
    for r in &rows {
        println!(
            "{:<14} {:>2} {:>2} {:>11.4e} {:>11.4e} {:>11.4e} {:>7} {:>7}",
            r.scheme.as_str(),
            r.s,
            r.l,
            r.err_l2l2,
            r.err_l2h1,
            r.err_pres,
            rate(r.rate_l2l2),
            rate(r.rate_l2h1)
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run(o) => run(o),
        Command::Sweep(o) => sweep(o),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
