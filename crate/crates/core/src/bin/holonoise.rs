use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use holonoise::experiments::{
    compare_dynamical, config_trajectory, dump_loop_trajectory, ideal_gate_report, run_sweep,
    write_comparison_csv, write_loop_csv, SweepConfig,
};
use holonoise::propagate::{default_steps_per_interval, trace, write_trace_csv, QuantumState};
use holonoise::Result;

#[derive(Parser)]
#[command(
    name = "holonoise",
    version,
    about = "Holonomic gates under control-field noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the config's `output`, else the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity vs n_r for the configured gate.
    Sweep(Common),
    /// Dump the clean and noisy loop for the first n_r of the config.
    Trajectory {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        samples_per_interval: usize,
    },
    /// Holonomic gate vs π pulse on a shared hold-time grid.
    CompareDynamical(Common),
    /// Analytic vs Wilczek–Zee vs evolved gate for the configured loop.
    IdealGate(Common),
}

struct Run {
    config: SweepConfig,
    out: PathBuf,
    stem: String,
}

fn prepare(common: &Common) -> Result<Run> {
    let mut config = SweepConfig::from_path(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    if let Some(n) = common.threads {
        // Fails only if a global pool exists already, which is fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let stem = common
        .config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    fs::create_dir_all(&out)?;
    Ok(Run { config, out, stem })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(common) => {
            let r = prepare(&common)?;
            let result = run_sweep(&r.config)?;
            let (csv, manifest) = result.save(&r.out, &r.stem)?;
            println!("wrote {} and {}", csv.display(), manifest.display());
        }
        Command::Trajectory {
            common,
            samples_per_interval,
        } => {
            let r = prepare(&common)?;
            let (schedule, traj) = config_trajectory(&r.config)?;
            let points = dump_loop_trajectory(&schedule, &traj, samples_per_interval)?;
            let loop_path = r.out.join(format!("{}.loop.csv", r.stem));
            write_loop_csv(&points, create(&loop_path)?)?;
            let noise_path = r.out.join(format!("{}.noise.csv", r.stem));
            traj.write_csv(create(&noise_path)?)?;
            let steps = r
                .config
                .steps_per_interval
                .unwrap_or_else(|| default_steps_per_interval(&schedule, traj.len()));
            let psi0 = QuantumState::basis(schedule.gate().logical_pair().0);
            let rows = trace(
                &schedule,
                Some(&traj),
                &psi0,
                steps,
                steps.div_ceil(samples_per_interval.max(1)),
            )?;
            let trace_path = r.out.join(format!("{}.populations.csv", r.stem));
            write_trace_csv(&rows, create(&trace_path)?)?;
            println!(
                "wrote {}, {} and {}",
                loop_path.display(),
                noise_path.display(),
                trace_path.display()
            );
        }
        Command::CompareDynamical(common) => {
            let r = prepare(&common)?;
            let rows = compare_dynamical(&r.config)?;
            let path = r.out.join(format!("{}.dynamical.csv", r.stem));
            write_comparison_csv(&rows, create(&path)?)?;
            println!("wrote {}", path.display());
        }
        Command::IdealGate(common) => {
            let r = prepare(&common)?;
            let schedule = r.config.schedule()?;
            println!(
                "{}",
                ideal_gate_report(&schedule, r.config.steps_per_interval)?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
