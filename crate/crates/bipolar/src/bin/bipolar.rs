//! Command-line interface: samplers, the walk/map encoding, distances,
//! profile estimation, experiments, and verification suites.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 failed verification or
//! acceptance, 3 censoring-threshold breach.

use bipolar::busemann::{estimate_profile_stream, WhichIncrement, WindowParams};
use bipolar::distance::Mode;
use bipolar::error::Error;
use bipolar::experiment::{self, ExperimentReport};
use bipolar::sampler::{self, BridgeMode};
use bipolar::{distance, io as bio, kmsw, verify};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bipolar", version, about = "Bipolar-oriented triangulations toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ldp,
    Sdp,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Ldp => Mode::Ldp,
            ModeArg::Sdp => Mode::Sdp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Cell,
    Uiqbot,
    Boltzmann,
    BoltzmannMarked,
    Channeled,
    Uibhbot,
}

#[derive(Args)]
struct WindowArgs {
    /// Initial window size for profile estimation.
    #[arg(long, default_value_t = 256)]
    initial_window: usize,
    /// Maximum window size before a replica is censored.
    #[arg(long, default_value_t = 1 << 21)]
    max_window: usize,
    /// Consecutive clean probes required for stabilization.
    #[arg(long, default_value_t = 5)]
    probes: usize,
}

impl WindowArgs {
    fn params(&self) -> WindowParams {
        WindowParams {
            initial_window: self.initial_window,
            max_window: self.max_window,
            probes: self.probes,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random map model and write it as map JSON.
    Sample {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Primary size: steps (cell, uiqbot), right boundary length
        /// (boltzmann), left boundary length (channeled), negative
        /// segments (uibhbot).
        #[arg(long)]
        size: usize,
        /// Secondary size: walk steps (channeled), positive steps
        /// (uibhbot).
        #[arg(long, default_value_t = 0)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        max_attempts: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// The walk/map encoding: build a map from a walk or invert a map.
    Kmsw {
        #[command(subcommand)]
        direction: KmswDirection,
    },
    /// Directed distances on a map file.
    Distance {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        src: usize,
        /// Single destination; omit and pass --all for a CSV of all
        /// targets.
        #[arg(long)]
        dst: Option<usize>,
        /// Emit CSV rows (src, dst, mode, value|UNREACHABLE) for every
        /// destination.
        #[arg(long, default_value_t = false)]
        all: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate boundary profiles over independent replicas; CSV columns
    /// replica, k, X_k, window, censored.
    Busemann {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long = "K", default_value_t = 1)]
        k_max: i64,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 0.2)]
        censor_threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Statistical experiments emitting a versioned JSON report.
    Experiment {
        #[arg(long)]
        name: String,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also dump raw positive-increment samples as CSV.
        #[arg(long)]
        dump_csv: Option<PathBuf>,
    },
    /// Exhaustive and randomized verification suites.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum KmswDirection {
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Invert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Error::CensoringThreshold { rate, threshold }) => {
            eprintln!("error: censoring rate {rate:.4} exceeds threshold {threshold:.4}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> bipolar::Result<ExitCode> {
    match cli.command {
        Command::Sample { model, size, steps, seed, max_attempts, out } => {
            let map = match model {
                ModelArg::Cell => sampler::sample_cell(size, seed),
                ModelArg::Uiqbot => sampler::sample_uiqbot_window(size, seed),
                ModelArg::Boltzmann => sampler::sample_boltzmann_right(size, seed, max_attempts)?,
                ModelArg::BoltzmannMarked => {
                    let (map, mark) = sampler::sample_boltzmann_marked(size, seed)?;
                    eprintln!("marked vertex: {mark}");
                    map
                }
                ModelArg::Channeled => {
                    let mode = if steps <= 12 {
                        BridgeMode::ExactSmall
                    } else {
                        BridgeMode::Rejection { max_attempts }
                    };
                    sampler::sample_boundary_channeled(size, steps, mode, seed)?
                }
                ModelArg::Uibhbot => sampler::sample_uibhbot_window(size, steps, seed)?.map,
            };
            std::fs::write(&out, bio::map_to_json(&map))?;
            println!(
                "wrote {} ({} vertices, {} edges)",
                out.display(),
                map.vertex_count(),
                map.edge_count()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Kmsw { direction } => {
            match direction {
                KmswDirection::Build { input, out } => {
                    let walk = bio::walk_from_text(&std::fs::read_to_string(&input)?)?;
                    let map = kmsw::build(&walk);
                    std::fs::write(&out, bio::map_to_json(&map))?;
                    println!("built {} edges from {} steps", map.edge_count(), walk.len());
                }
                KmswDirection::Invert { input, out } => {
                    let map = bio::map_from_json(&std::fs::read_to_string(&input)?)?;
                    let walk = kmsw::invert(&map)?;
                    std::fs::write(&out, bio::walk_to_text(&walk))?;
                    println!("recovered {} steps", walk.len());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Distance { map, mode, src, dst, all, out } => {
            let map = bio::map_from_json(&std::fs::read_to_string(&map)?)?;
            let mode: Mode = mode.into();
            if let Some(dst) = dst {
                match distance::xdp(&map, mode, src, dst)? {
                    Some(v) => println!("{v}"),
                    None => println!("UNREACHABLE"),
                }
            } else if all {
                let field = distance::distance_field(&map, mode, src)?;
                let mut csv = String::from("src,dst,mode,value\n");
                for v in 0..map.vertex_count() {
                    let val = field
                        .get(v)
                        .map_or("UNREACHABLE".to_string(), |d| d.to_string());
                    csv.push_str(&format!("{src},{v},{},{val}\n", mode.as_str()));
                }
                match out {
                    Some(path) => std::fs::write(path, csv)?,
                    None => print!("{csv}"),
                }
            } else {
                return Err(Error::Precondition("pass --dst or --all".into()));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Busemann { mode, k_max, samples, seed, window, censor_threshold, out } => {
            let mode: Mode = mode.into();
            let params = window.params();
            let rows: Vec<(u64, Option<bipolar::busemann::BusemannProfile>)> = (0..samples
                as u64)
                .into_par_iter()
                .map(|r| (r, estimate_profile_stream(mode, k_max, &params, seed, r).ok()))
                .collect();
            let censored = rows.iter().filter(|(_, p)| p.is_none()).count();
            std::fs::write(&out, bio::profiles_to_csv(mode, k_max, &rows))?;
            println!(
                "wrote {} ({} replicas, {} censored)",
                out.display(),
                samples,
                censored
            );
            let rate = censored as f64 / samples as f64;
            if rate > censor_threshold {
                return Err(Error::CensoringThreshold { rate, threshold: censor_threshold });
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment { name, mode, samples, seed, workers, window, out, dump_csv } => {
            if workers > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build_global()
                    .map_err(|e| Error::Precondition(format!("worker pool: {e}")))?;
            }
            let params = window.params();
            let mode_val: Option<Mode> = mode.map(Into::into);
            let need_mode = || -> bipolar::Result<Mode> {
                mode_val.ok_or_else(|| Error::Precondition("--mode is required".into()))
            };
            let report: ExperimentReport = match name.as_str() {
                "tail" => {
                    let mode = need_mode()?;
                    let band = match mode {
                        Mode::Ldp => (0.55, 0.78),
                        Mode::Sdp => (1.15, 1.55),
                    };
                    experiment::tail_exponent(mode, samples, &params, seed, band, (1.6, 2.4))?
                }
                "kappa" => experiment::kappa_estimate(samples, &params, seed)?,
                "ldp-identity" => experiment::ldp_aggregate_identity(samples, &params, seed)?,
                "recursive" => {
                    let mode = need_mode()?;
                    let y_range = match mode {
                        Mode::Ldp => -3..=-1,
                        Mode::Sdp => -1..=1,
                    };
                    experiment::recursive_residual(
                        mode,
                        -3..=3,
                        y_range,
                        samples,
                        &params,
                        seed,
                        4.0,
                    )?
                }
                "cubic" => {
                    let mode = need_mode()?;
                    let grid: Vec<f64> = (1..=5).map(|i| 0.04 * i as f64).collect();
                    experiment::cubic_residual(mode, &grid, samples, &params, seed)?
                }
                "self-sim" => {
                    let mode = need_mode()?;
                    experiment::self_similarity(mode, 8, samples, &params, seed, 0.001)?
                }
                "symmetry" => {
                    let mode = need_mode()?;
                    experiment::symmetry_experiment(mode, samples, &params, seed, 0.001)?
                }
                "cell-path" => {
                    let mode = need_mode()?;
                    let sizes: Vec<usize> = (12..=18).map(|p| 1usize << p).collect();
                    let band = match mode {
                        Mode::Ldp => (0.69, 0.81),
                        Mode::Sdp => (0.315, 0.435),
                    };
                    experiment::path_exponent_cell(mode, &sizes, 50, seed, band)?
                }
                "boltzmann" => {
                    let r_list = [16, 32, 64, 128, 256];
                    experiment::boltzmann_exponent(
                        &r_list,
                        50,
                        seed,
                        (1.38, 1.62),
                        (0.63, 0.87),
                        (1.9, 2.1),
                    )?
                }
                "selftest" => experiment::estimator_selftest(seed)?,
                other => {
                    return Err(Error::Precondition(format!(
                        "unknown experiment {other}; expected tail|cell-path|boltzmann|recursive|kappa|cubic|self-sim|symmetry|ldp-identity|selftest"
                    )))
                }
            };
            if let Some(csv_path) = dump_csv {
                if let Some(mode) = mode_val {
                    let batch = bipolar::busemann::increment_samples(
                        mode,
                        WhichIncrement::Positive,
                        samples,
                        &params,
                        seed,
                        1.0,
                    )?;
                    std::fs::write(csv_path, bio::samples_to_csv(&batch))?;
                }
            }
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            match out {
                Some(path) => std::fs::write(path, &json)?,
                None => println!("{json}"),
            }
            for e in &report.estimates {
                println!(
                    "[{}] {} = {:.6} (se {:.6}){}",
                    match e.verdict {
                        experiment::Verdict::Pass => "PASS",
                        experiment::Verdict::Fail => "FAIL",
                        experiment::Verdict::Info => "info",
                    },
                    e.name,
                    e.value,
                    e.std_error,
                    e.band
                        .map(|b| format!(" band [{}, {}]", b.0, b.1))
                        .unwrap_or_default()
                );
            }
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::Verify { suite, seed } => {
            let report = verify::run_suite(&suite, seed)?;
            for c in &report.checks {
                println!("[{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
    }
}
