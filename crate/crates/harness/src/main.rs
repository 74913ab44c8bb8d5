use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maac_envs::EnvParams;
use maac_harness::experiment::OUTPUT_ROOT_VAR;
use maac_harness::{
    exact_report, replot, resolve_output, run_experiment, write_report, ExperimentSpec,
    HarnessError, PolicySource,
};

const EXIT_SPEC: u8 = 1;
const EXIT_RUN_FAILURES: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "maac", version, about = "Tabular multi-agent actor-critic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single-configuration experiment spec.
    Run(RunArgs),
    /// Run a spec whose `grid` lists values to sweep.
    Sweep(RunArgs),
    /// Exact analysis of an explicit model under fixed policies.
    Exact {
        model: String,
        /// JSON policy file; uniform policies when omitted.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Model parameter `key=value`; values parse as JSON when possible.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed of the contraction probes.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Regenerate charts of an experiment directory.
    Plot { dir: PathBuf },
}

#[derive(clap::Args)]
struct RunArgs {
    spec: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite artifacts of a previous run in the output directory.
    #[arg(long)]
    force: bool,
    /// Worker threads; overrides the spec.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                HarnessError::Spec(_)
                | HarnessError::OutputExists(_)
                | HarnessError::UnsupportedEnvironment(_)
                | HarnessError::Env(_)
                | HarnessError::Train(_)
                | HarnessError::Json(_) => EXIT_SPEC,
                _ => EXIT_RUN_FAILURES,
            })
        }
    }
}

fn dispatch(cmd: Command) -> maac_harness::Result<u8> {
    match cmd {
        Command::Run(args) => run(args, false),
        Command::Sweep(args) => run(args, true),
        Command::Exact {
            model,
            policy,
            k,
            params,
            out,
            seed,
        } => {
            let params = parse_params(&params)?;
            let source = match &policy {
                Some(p) => PolicySource::from_path(p)?,
                None => PolicySource::Uniform,
            };
            let report = exact_report(&model, &params, &source, k, seed)?;
            let dir = out.unwrap_or_else(|| output_root().join(format!("exact_{model}_k{k}")));
            write_report(&report, &dir)?;
            println!("wrote {}", dir.display());
            for a in &report.agents {
                let c = &a.check;
                println!(
                    "agent {}: marginal residual {:.3e}, gradient residual {:.3e}, min variance gap {:.3e}",
                    c.agent, c.marginal_residual, c.gradient_residual, c.min_variance_gap
                );
            }
            let violations = report.violations();
            for v in &violations {
                eprintln!("violation: {v}");
            }
            Ok(if violations.is_empty() { 0 } else { EXIT_VIOLATION })
        }
        Command::Plot { dir } => {
            replot(&dir)?;
            println!("wrote {}", dir.join("plots").display());
            Ok(0)
        }
    }
}

fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map_or_else(|| PathBuf::from("results"), PathBuf::from)
}

fn run(args: RunArgs, sweep: bool) -> maac_harness::Result<u8> {
    let text = std::fs::read_to_string(&args.spec).map_err(|e| {
        HarnessError::Spec(format!("{}: {e}", args.spec.display()))
    })?;
    let mut spec = ExperimentSpec::from_json(&text)?;
    if let Some(j) = args.jobs {
        spec.parallelism = Some(j);
    }
    if sweep && spec.grid.is_empty() {
        return Err(HarnessError::Spec("sweep needs a non-empty `grid`".into()));
    }
    if !sweep && !spec.grid.is_empty() {
        return Err(HarnessError::Spec("spec has a `grid`; use `maac sweep`".into()));
    }
    spec.validate()?;
    let dir = resolve_output(&spec, args.out.as_deref());
    let manifest = run_experiment(&spec, &dir, args.force)?;
    report_runs(&dir, &manifest);
    Ok(if manifest.failures() > 0 { EXIT_RUN_FAILURES } else { 0 })
}

fn report_runs(dir: &Path, manifest: &maac_harness::Manifest) {
    println!("wrote {} ({} runs)", dir.display(), manifest.runs.len());
    for cell in &manifest.cells {
        let finals: Vec<f64> = manifest
            .runs
            .iter()
            .filter(|r| r.cell == cell.tag && r.aborted.is_none())
            .map(|r| r.final_return)
            .collect();
        if !finals.is_empty() {
            let mean = finals.iter().sum::<f64>() / finals.len() as f64;
            println!("{}: mean final return {mean:.3} over {} runs", cell.tag, finals.len());
        }
    }
    for r in manifest.runs.iter().filter(|r| r.aborted.is_some()) {
        eprintln!(
            "run {} of {} aborted: {}",
            r.run,
            r.cell,
            r.aborted.as_deref().unwrap_or_default()
        );
    }
}

fn parse_params(raw: &[String]) -> maac_harness::Result<EnvParams> {
    let mut params = EnvParams::new();
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| HarnessError::Spec(format!("expected KEY=VALUE, got `{item}`")))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| serde_json::Value::String(v.into()));
        params.insert(k.to_string(), value);
    }
    Ok(params)
}
