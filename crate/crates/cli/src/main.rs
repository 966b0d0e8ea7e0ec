use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use semiclassical::experiments::{self, ExperimentConfig, PotentialConfig, Scenario};

#[derive(Parser)]
#[command(name = "semiclassical", version, about = "Semiclassical phase-space experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wick symbol of the Heisenberg-evolved observable vs the classical flow
    Ehrenfest(RunArgs),
    /// Husimi density of TDHF vs the Vlasov solution, L¹ distance
    TdhfVlasov(RunArgs),
    /// Free coherent state: quantum/classical distance over long times
    EhrenfestTime(RunArgs),
    /// Trace-class operator whose Weyl symbol is not integrable
    Counterexample(RunArgs),
    /// Wick composition remainders and the Husimi evolution equation
    Composition(RunArgs),
    /// Every invariant suite at reduced size
    Selftest {
        /// Write selftest_summary.json here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; keys override the scenario defaults, unknown keys are rejected
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the CSV and the JSON summary
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated, strictly descending
    #[arg(long, value_delimiter = ',')]
    h_list: Option<Vec<f64>>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Potential preset: zero, harmonic, cosine or gaussian_W
    #[arg(long)]
    preset: Option<String>,
}

fn load(scenario: Scenario, a: &RunArgs) -> Result<ExperimentConfig, String> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            ExperimentConfig::from_json(&text, Some(scenario)).map_err(|e| e.to_string())?
        }
        None => ExperimentConfig::preset(scenario),
    };
    if cfg.scenario != scenario {
        return Err(format!("config is for {}, not {}", cfg.scenario.name(), scenario.name()));
    }
    if let Some(h) = &a.h_list {
        cfg.h_list = h.clone();
    }
    if let Some(t) = a.t_max {
        cfg.t_max = t;
    }
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    if let Some(p) = &a.preset {
        cfg.potential = PotentialConfig::named(p);
    }
    if let Some(o) = &a.out {
        cfg.output.dir = o.clone();
    }
    Ok(cfg)
}

fn run(scenario: Scenario, a: &RunArgs) -> Result<bool, String> {
    let cfg = load(scenario, a)?;
    let start = Instant::now();
    let res = experiments::run(&cfg).map_err(|e| e.to_string())?;
    let (csv, json) = res.write(&cfg.output).map_err(|e| e.to_string())?;
    for f in &res.fits {
        println!("fit {}: slope {:.4}, r² {:.4}", f.name, f.fit.slope, f.fit.r2);
    }
    for c in &res.checks {
        println!("{}", c.line());
    }
    println!("wrote {} and {} in {:.1} s", csv.display(), json.display(), start.elapsed().as_secs_f64());
    Ok(res.passed())
}

fn selftest(out: &Option<PathBuf>) -> Result<bool, String> {
    let start = Instant::now();
    let report = experiments::selftest().map_err(|e| e.to_string())?;
    for l in report.lines() {
        println!("{l}");
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        let path = dir.join("selftest_summary.json");
        let text = report.to_json().map_err(|e| e.to_string())?;
        std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    println!("selftest {} in {:.1} s", if report.pass { "passed" } else { "FAILED" }, start.elapsed().as_secs_f64());
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Ehrenfest(a) => run(Scenario::Ehrenfest, a),
        Command::TdhfVlasov(a) => run(Scenario::TdhfVlasov, a),
        Command::EhrenfestTime(a) => run(Scenario::EhrenfestTime, a),
        Command::Counterexample(a) => run(Scenario::Counterexample, a),
        Command::Composition(a) => run(Scenario::Composition, a),
        Command::Selftest { out } => selftest(out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
