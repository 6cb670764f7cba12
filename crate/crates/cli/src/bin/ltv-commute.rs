use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ltv_commute_cli::pipeline::{self, Overrides, ResponsePair};
use ltv_commute_cli::{builtins, csv, report, resolve};

/// Commutativity of cascaded second-order linear time-varying systems.
#[derive(Parser)]
#[command(name = "ltv-commute", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the commutativity conditions only.
    Check(Common),
    /// Simulate both cascade orderings only.
    Simulate(Common),
    /// Check, simulate and cross-reference the two.
    Run(Common),
    /// List the built-in scenarios.
    ListBuiltins,
}

#[derive(Args)]
struct Common {
    /// Built-in scenario names or scenario file paths.
    #[arg(required = true)]
    scenarios: Vec<String>,
    /// Integration step.
    #[arg(long)]
    h: Option<f64>,
    /// Initial time.
    #[arg(long)]
    t0: Option<f64>,
    /// End of the simulated window.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Fixed threshold for calling two responses equal.
    #[arg(long = "tol-sim")]
    tol_sim: Option<f64>,
    /// Override the constant k2.
    #[arg(long, allow_hyphen_values = true)]
    k2: Option<f64>,
    /// Override the constant k1.
    #[arg(long, allow_hyphen_values = true)]
    k1: Option<f64>,
    /// Override the constant k0.
    #[arg(long, allow_hyphen_values = true)]
    k0: Option<f64>,
    /// Directory for trajectory CSVs and report dumps.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Simulations run concurrently within a scenario.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            h: self.h,
            t0: self.t0,
            t_end: self.t_end,
            tol_sim: self.tol_sim,
            k2: self.k2,
            k1: self.k1,
            k0: self.k0,
        }
    }
}

fn write_pair(dir: &Path, name: &str, kind: &str, pair: &ResponsePair) -> Result<()> {
    for (order, tr) in [("ab", &pair.ab), ("ba", &pair.ba)] {
        let path = dir.join(format!("{name}_{kind}_{order}.csv"));
        fs::write(&path, csv::to_string(tr)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn write_file(dir: &Path, file: String, text: &str) -> Result<()> {
    let path = dir.join(file);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

/// Returns `true` when every scenario agrees with its simulation.
fn execute(command: &Command, args: &Common) -> Result<bool> {
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut all_agree = true;
    for spec in &args.scenarios {
        let mut s = resolve(spec).with_context(|| format!("loading scenario `{spec}`"))?;
        args.overrides().apply(&mut s)?;
        match command {
            Command::Check(_) => {
                let c = pipeline::check(&s).with_context(|| format!("checking `{spec}`"))?;
                let dump = report::render_dump(&report::check_dump(&c));
                print!("{}\n{dump}", report::check_text(&c));
                if let Some(dir) = &args.out_dir {
                    write_file(dir, format!("{}_check.txt", s.name), &dump)?;
                }
            }
            Command::Simulate(_) => {
                let c = pipeline::check(&s).with_context(|| format!("checking `{spec}`"))?;
                let sim = pipeline::simulate(&s, &c, args.jobs).with_context(|| format!("simulating `{spec}`"))?;
                println!("scenario {}", s.name);
                let pairs = [("forced", Some(&sim.forced)), ("ic", sim.ic.as_ref())];
                for (kind, pair) in pairs {
                    let Some(pair) = pair else { continue };
                    let d = &pair.deviation;
                    println!(
                        "  {kind:<7} samples {}, max |y_AB - y_BA| = {:.6e}, threshold {:.3e}",
                        pair.ab.samples.len(),
                        d.max_abs,
                        d.threshold
                    );
                    if let Some(dir) = &args.out_dir {
                        write_pair(dir, &s.name, kind, pair)?;
                    }
                }
            }
            Command::Run(_) => {
                let o = pipeline::run(&s, args.jobs).with_context(|| format!("running `{spec}`"))?;
                let dump = report::render_dump(&report::outcome_dump(&o));
                print!("{}\n{dump}", report::outcome_text(&o));
                if let Some(dir) = &args.out_dir {
                    write_pair(dir, &s.name, "forced", &o.simulation.forced)?;
                    if let Some(ic) = &o.simulation.ic {
                        write_pair(dir, &s.name, "ic", ic)?;
                    }
                    write_file(dir, format!("{}_report.txt", s.name), &dump)?;
                }
                all_agree &= o.agreement();
            }
            Command::ListBuiltins => unreachable!(),
        }
    }
    Ok(all_agree)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::ListBuiltins => {
            for name in builtins::names() {
                let description = builtins::get(name).and_then(Result::ok).map(|s| s.description).unwrap_or_default();
                println!("{name:<24} {description}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Check(a) | Command::Simulate(a) | Command::Run(a) => a,
    };
    match execute(&cli.command, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
