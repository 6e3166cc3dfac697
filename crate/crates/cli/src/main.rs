use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chansurf_cli::demos::{demo_config, DemoParams, DEMOS};
use chansurf_cli::{run_scene, RunReport, SceneConfig, Status};

#[derive(Parser)]
#[command(
    name = "chansurf",
    version,
    about = "Channel surfaces in Lie sphere geometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scene file and write meshes and a report.
    Run {
        scene: PathBuf,
        /// Output directory (default: $CHANSURF_OUT/<scene name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in demo, or `all`.
    Demo {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Samples per circle.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Print the demo's scene file instead of running it.
        #[arg(long)]
        emit_config: bool,
    },
    /// Validate a scene file without running it.
    Check { scene: PathBuf },
}

fn out_root() -> PathBuf {
    std::env::var_os("CHANSURF_OUT").map_or_else(|| PathBuf::from("chansurf-out"), PathBuf::from)
}

fn summarise(report: &RunReport, dir: &Path) -> Status {
    let total = report.assertions.len();
    let failed: Vec<_> = report.failed_assertions().collect();
    for a in &failed {
        eprintln!(
            "FAIL {}/{}: measured {:e}, tolerance {:e} ({:?})",
            a.stage, a.name, a.measured, a.tolerance, a.comparison
        );
    }
    if let Some(e) = &report.error {
        eprintln!("{}: stage {} failed: {}", report.name, e.stage, e.message);
        return Status::Fail;
    }
    println!(
        "{}: {}/{} assertions passed, outputs in {}",
        report.name,
        total - failed.len(),
        total,
        dir.display()
    );
    if report.pass {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn run(cfg: &SceneConfig, dir: &Path) -> Status {
    match run_scene(cfg, dir) {
        Ok(report) => summarise(&report, dir),
        Err(e) => {
            eprintln!("{}: {e:#}", cfg.name);
            Status::Fail
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Check { scene } => match SceneConfig::load(&scene) {
            Ok(cfg) => {
                println!(
                    "{}: {} objects, {} stages",
                    cfg.name,
                    cfg.objects.len(),
                    cfg.pipeline.len()
                );
                Status::Pass
            }
            Err(e) => {
                eprintln!("{e}");
                Status::Schema
            }
        },
        Command::Run { scene, out } => match SceneConfig::load(&scene) {
            Ok(cfg) => {
                let dir = out.unwrap_or_else(|| out_root().join(&cfg.name));
                run(&cfg, &dir)
            }
            Err(e) => {
                eprintln!("{e}");
                Status::Schema
            }
        },
        Command::Demo {
            name,
            out,
            grid,
            seed,
            emit_config,
        } => {
            let names: Vec<&str> = if name == "all" {
                DEMOS.to_vec()
            } else {
                vec![name.as_str()]
            };
            if grid < 8 {
                eprintln!("--grid must be at least 8");
                return ExitCode::from(Status::Schema as u8);
            }
            let params = DemoParams { grid, seed };
            let mut status = Status::Pass;
            for n in names {
                let Some(cfg) = demo_config(n, params) else {
                    eprintln!("unknown demo {n}; available: all, {}", DEMOS.join(", "));
                    return ExitCode::from(Status::Schema as u8);
                };
                if emit_config {
                    let text = serde_json::to_string_pretty(&cfg).expect("scene serialises");
                    // a closed pipe (e.g. `| head`) is not an error
                    let _ = writeln!(std::io::stdout().lock(), "{text}");
                    continue;
                }
                let root = out.clone().unwrap_or_else(out_root);
                if run(&cfg, &root.join(n)) != Status::Pass {
                    status = Status::Fail;
                }
            }
            status
        }
    };
    ExitCode::from(status as u8)
}
