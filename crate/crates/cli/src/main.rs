use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gausscontrol_cli::{compare, load_scenario, render_times, run, verify_control, write_outputs, CliError};

#[derive(Parser)]
#[command(name = "gausscontrol", version, about = "Relaxation of Gaussian states in a lossy channel, with and without optimal symplectic control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trajectory and summary files.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run two scenarios and print a per-threshold speed-up table.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Also write both runs' output files here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print T_heat, T_cool and T_free for a scenario's initial state.
    Times {
        scenario: PathBuf,
        /// Sample this many budgeted controls to check the optimal rates.
        #[arg(long, default_value_t = 0)]
        verify: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario, out_dir } => {
            let sc = load_scenario(&scenario)?;
            let out = run(&sc)?;
            let (traj, summary) = write_outputs(&sc, &out, &out_dir)?;
            print!("{}", out.summary.render());
            eprintln!("wrote {} and {}", traj.display(), summary.display());
        }
        Command::Compare { a, b, out_dir } => {
            let (sa, sb) = (load_scenario(&a)?, load_scenario(&b)?);
            let (report, ra, rb) = compare(&sa, &sb)?;
            if let Some(dir) = out_dir {
                write_outputs(&sa, &ra, &dir)?;
                write_outputs(&sb, &rb, &dir)?;
            }
            print!("{}", report.render());
        }
        Command::Times { scenario, verify, seed } => {
            let sc = load_scenario(&scenario)?;
            print!("{}", render_times(&sc)?);
            if verify > 0 {
                let v = verify_control(&sc, verify, seed)?;
                println!(
                    "verified {} budgeted controls (seed {seed}): det rate in [{:.9e}, {:.9e}], optimum [{:.9e}, {:.9e}], violations {}",
                    v.samples, v.min_sampled, v.max_sampled, v.cool_rate, v.heat_rate, v.violations
                );
            }
        }
    }
    Ok(())
}
