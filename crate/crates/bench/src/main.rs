use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tamper_bench::replay::{replay, rerun_matches};
use tamper_bench::suite::{run_suite, RunOptions, Suite};
use tamper_bench::validate::validate;
use tamper_core::scenario::Scenario;
use tamper_core::trace::{Method, RunTrace};

#[derive(Parser)]
#[command(name = "tamper-bench", about = "Run, replay and validate TAMPER benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every problem of a suite and print the metrics table.
    Run {
        suite: PathBuf,
        /// Restrict to these methods (tamp, tamper, baseline).
        #[arg(long = "method", value_delimiter = ',')]
        methods: Vec<Method>,
        /// Use this seed for every problem.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the shadow shrink ratio of every scenario.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Print a recorded trace event by event.
    Replay {
        trace: PathBuf,
        /// Scenario the trace was recorded on; enables plots and --verify.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Write one PNG per world-changing event here.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        /// Re-simulate and require a byte-identical trace.
        #[arg(long)]
        verify: bool,
    },
    /// Check a scenario file for layout and goal problems.
    Validate { scenario: PathBuf },
}

fn load_scenario(path: &std::path::Path) -> Result<Scenario, String> {
    Scenario::load(path).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<bool, String> = match cli.cmd {
        Cmd::Run {
            suite,
            methods,
            seed,
            epsilon,
            out_dir,
        } => (|| {
            let s = Suite::load(&suite).map_err(|e| e.to_string())?;
            let opts = RunOptions {
                methods: (!methods.is_empty()).then_some(methods),
                seed,
                epsilon,
                out_dir: Some(out_dir.clone()),
            };
            let report = run_suite(&s, &opts).map_err(|e| e.to_string())?;
            print!("{}", tamper_bench::suite::table_markdown(&report));
            println!("\n{} runs in {:.1}s, traces in {}", report.rows.len(), report.wall_s, out_dir.display());
            Ok(report.passed())
        })(),
        Cmd::Replay {
            trace,
            scenario,
            plot_dir,
            verify,
        } => (|| {
            let text = std::fs::read_to_string(&trace).map_err(|e| format!("{}: {e}", trace.display()))?;
            let t = RunTrace::from_jsonl(&text).map_err(|e| format!("{}: {e}", trace.display()))?;
            let sc = scenario.as_deref().map(load_scenario).transpose()?;
            for line in replay(&t, sc.as_ref(), plot_dir.as_deref())? {
                println!("{line}");
            }
            if verify {
                let sc = sc.ok_or("--verify needs --scenario")?;
                let same = rerun_matches(&t, &sc);
                println!("rerun {}", if same { "matches byte for byte" } else { "DIFFERS" });
                return Ok(same);
            }
            Ok(true)
        })(),
        Cmd::Validate { scenario } => (|| {
            let sc = load_scenario(&scenario)?;
            let diags = validate(&sc);
            for d in &diags {
                println!("{}: {d}", scenario.display());
            }
            if diags.is_empty() {
                println!("{}: ok", scenario.display());
            }
            Ok(diags.is_empty())
        })(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
