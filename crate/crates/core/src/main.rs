use clap::Parser;
use magorbit::cli::{run, CliError, RunConfig, Stage};
use std::path::PathBuf;
use std::process::ExitCode;

/// Orbit-method eigenvalue asymptotics: runs one pipeline stage and writes JSON/CSV artifacts.
#[derive(Parser, Debug)]
#[command(name = "magorbit", version)]
struct Args {
    /// Config file with [spec], [run] and [constants] sections.
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Stage to run; overrides `stage` in the config.
    #[arg(long, value_enum)]
    stage: Option<Stage>,
    /// Log-spaced λ values, lo:hi:steps.
    #[arg(long)]
    lambdas: Option<String>,
    /// λ values of the sampled growth curves, lo:hi:steps.
    #[arg(long)]
    mc_lambdas: Option<String>,
    /// Interior grid points per axis, m1,m2[,m3].
    #[arg(long)]
    grid: Option<String>,
    /// Box half-widths per axis, L1,L2[,L3].
    #[arg(long = "box")]
    box_half_widths: Option<String>,
    /// Truncation constant C in Ψ*² ≤ C·λ.
    #[arg(long)]
    ctrunc: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    refine: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn config(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            RunConfig::parse_text(&text, args.stage)?
        }
        None => RunConfig::new(args.stage.ok_or_else(|| CliError::Input("give --spec or --stage".into()))?),
    };
    let flags = [
        ("lambdas", &args.lambdas),
        ("mc_lambdas", &args.mc_lambdas),
        ("grid", &args.grid),
        ("box", &args.box_half_widths),
        ("ctrunc", &args.ctrunc),
        ("samples", &args.samples),
        ("seed", &args.seed),
        ("tol", &args.tol),
        ("refine", &args.refine),
    ];
    for (key, v) in flags {
        if let Some(v) = v {
            cfg.set("run", key, v)?;
        }
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match config(&args).and_then(|c| run(&c)) {
        Ok(o) => {
            println!("{}", o.summary);
            println!("config hash {}", o.config_hash);
            for a in &o.artifacts {
                println!("wrote {}", a.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
