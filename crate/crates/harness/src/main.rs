use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use impulse2d::env::{EnvParams, SizeClass};
use impulse2d::levelgen::{generate, serialize};
use impulse2d_harness::pool::{hardware_parallelism, parallel_map};
use impulse2d_harness::*;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "impulse2d", version, about = "Benchmarks, rollouts and level tooling for impulse2d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure aggregate steps per second over a sweep of instance counts.
    Bench {
        #[arg(long, default_value = "M")]
        size: SizeClass,
        #[arg(long, value_delimiter = ',', default_value = "1,8,64,512")]
        instances: Vec<usize>,
        #[arg(long, default_value_t = 10.0)]
        secs: f64,
        /// engine, env or pixels
        #[arg(long, default_value = "engine")]
        mode: BenchMode,
        /// Defaults to the hardware parallelism.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate levels and write them as JSON files.
    Gen {
        #[arg(long)]
        size: SizeClass,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long)]
        out: PathBuf,
        /// Seed of the first level; level i uses seed + i.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run one episode and report the outcome.
    Rollout {
        #[arg(long)]
        level: PathBuf,
        /// noop, random:SEED or file:PATH
        #[arg(long, default_value = "noop")]
        policy: PolicySpec,
    },
    /// Rank a directory of levels by learnability.
    Filter {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "random:0")]
        policy: PolicySpec,
        #[arg(long, default_value_t = 64)]
        trials: usize,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check that repeated and pooled runs produce identical trajectories.
    Audit {
        #[arg(long, required = true)]
        level: Vec<PathBuf>,
        /// Engine steps per run.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value = "random:0")]
        policy: PolicySpec,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0))
}

/// Prints the command line with every seed made explicit.
fn print_seed_line(args: &[String]) {
    eprintln!("# reproduce: impulse2d {}", args.join(" "));
}

fn csv_out<T: Serialize>(rows: &[T]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| HarnessError::io("<stdout>".as_ref(), e))?;
    Ok(())
}

#[derive(Serialize)]
struct GenRow {
    name: String,
    seed: u64,
    hash: String,
    path: String,
}

#[derive(Serialize)]
struct RankRow<'a> {
    rank: usize,
    name: &'a str,
    score: f64,
    successes: usize,
    trials: usize,
}

#[derive(Serialize)]
struct AuditRow<'a> {
    level: &'a str,
    route: &'static str,
    repeat: usize,
    hash: String,
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Bench { size, instances, secs, mode, workers, seed } => {
            let seed = resolve_seed(seed);
            let workers = workers.unwrap_or_else(hardware_parallelism);
            let counts: Vec<String> = instances.iter().map(|n| n.to_string()).collect();
            print_seed_line(&[
                "bench".into(),
                format!("--size {size} --instances {} --secs {secs} --mode {mode} --workers {workers} --seed {seed}", counts.join(",")),
            ]);
            let rows = bench(size, &instances, Duration::from_secs_f64(secs), mode, workers, seed);
            csv_out(&rows)?;
        }
        Command::Gen { size, count, out, seed, workers } => {
            let seed = resolve_seed(seed);
            print_seed_line(&[format!("gen --size {size} --count {count} --out {} --seed {seed}", out.display())]);
            std::fs::create_dir_all(&out).map_err(|e| HarnessError::io(&out, e))?;
            let seeds: Vec<u64> = (0..count).map(|i| seed.wrapping_add(i)).collect();
            let made = parallel_map(seeds, workers.unwrap_or_else(hardware_parallelism), |s| (s, generate(s, size)));
            let mut rows = Vec::new();
            let mut failed = 0;
            for (s, result) in made {
                match result {
                    Ok(level) => {
                        let path = out.join(format!("{}.json", level.name));
                        std::fs::write(&path, serialize(&level)).map_err(|e| HarnessError::io(&path, e))?;
                        rows.push(GenRow { name: level.name.clone(), seed: s, hash: format!("{:016x}", level.hash()), path: path.display().to_string() });
                    }
                    Err(e) => {
                        eprintln!("seed {s}: {e}");
                        failed += 1;
                    }
                }
            }
            csv_out(&rows)?;
            if failed > 0 {
                eprintln!("{failed} of {count} seeds failed to generate");
            }
        }
        Command::Rollout { level, policy } => {
            print_seed_line(&[format!("rollout --level {} --policy {policy}", level.display())]);
            let level = load_level(&level)?;
            let result = rollout(&level, &policy, &EnvParams::new(level.size_class))?;
            csv_out(&[result])?;
        }
        Command::Filter { input, policy, trials, top, workers } => {
            print_seed_line(&[format!("filter --in {} --policy {policy} --trials {trials}", input.display())]);
            let levels = load_level_dir(&input)?;
            let Some(first) = levels.first() else {
                return Err(HarnessError::Usage(format!("no levels in {}", input.display())));
            };
            let params = EnvParams::new(first.size_class);
            let ranked = rank_levels(&levels, &policy, trials, &params, workers.unwrap_or_else(hardware_parallelism))?;
            let keep = top.unwrap_or(ranked.len()).min(ranked.len());
            let rows: Vec<RankRow> = ranked[..keep].iter().enumerate().map(|(i, r)| RankRow {
                    rank: i + 1,
                    name: &r.name,
                    score: r.score,
                    successes: r.successes,
                    trials: r.trials,
                }).collect();
            csv_out(&rows)?;
        }
        Command::Audit { level, steps, repeats, policy, workers } => {
            let workers = workers.unwrap_or_else(|| hardware_parallelism().max(2));
            let names: Vec<String> = level.iter().map(|p| format!("--level {}", p.display())).collect();
            print_seed_line(&[format!("audit {} --steps {steps} --repeats {repeats} --policy {policy} --workers {workers}", names.join(" "))]);
            let levels = level.iter().map(|p| load_level(p)).collect::<Result<Vec<_>, _>>()?;
            let params = EnvParams::new(levels[0].size_class);
            let reports = audit(&levels, &policy, steps, repeats, workers, &params);
            let mut rows = Vec::new();
            for r in &reports {
                for (route, hashes) in [("serial", &r.serial), ("pool", &r.pooled)] {
                    for (i, h) in hashes.iter().enumerate() {
                        rows.push(AuditRow { level: &r.level_name, route, repeat: i, hash: format!("{h:016x}") });
                    }
                }
            }
            csv_out(&rows)?;
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.level_name.as_str()).collect();
            if !failed.is_empty() {
                eprintln!("audit FAILED for {}", failed.join(", "));
                return Ok(ExitCode::FAILURE);
            }
            eprintln!("audit passed: {} levels x {repeats} repeats", reports.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
