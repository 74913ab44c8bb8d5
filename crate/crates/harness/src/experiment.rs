//! Multi-seed experiment driver and artifact directory layout.
//!
//! ```text
//! <out>/spec.json
//! <out>/runs/<cell>/run_<r>.csv        learning curve, long format
//! <out>/runs/<cell>/gradients_<r>.csv  gradient records (when logged)
//! <out>/runs/<cell>/gradvar_<r>.csv    windowed gradient variance (when logged)
//! <out>/aggregate/<cell>.csv           cross-run statistics
//! <out>/aggregate/<cell>.gradvar.csv
//! <out>/plots/*.svg
//! <out>/manifest.json
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use maac_envs::build_env;
use maac_learners::{
    per_rollout_gradient_variance, train_run, write_curve_csv, write_gradient_csv, Actors,
    GradientRecord, TrainConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregate::{
    aggregate, read_aggregate_csv, read_long_csv, write_aggregate_csv, write_long_csv,
    AggregateCurve, LongRow,
};
use crate::error::{io_err, HarnessError, Result};
use crate::plot::{render_svg, Series};
use crate::seeds::run_seed;
use crate::spec::{Cell, ExperimentSpec};

pub const OUTPUT_ROOT_VAR: &str = "MAAC_OUTPUT_DIR";
const GENERATED: [&str; 5] = ["runs", "aggregate", "plots", "manifest.json", "spec.json"];
const GRADVAR_SUFFIX: &str = ".gradvar.csv";
/// Per-parameter variance series are written only up to this many
/// parameters per actor; per-action sums are always written.
const MAX_PARAM_SERIES: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStatus {
    pub cell: String,
    pub run: usize,
    pub seed: u64,
    pub updates: usize,
    pub env_steps: u64,
    pub final_return: f64,
    pub final_discounted_return: f64,
    pub aborted: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellEntry {
    pub tag: String,
    pub grid: BTreeMap<String, serde_json::Value>,
    pub config: TrainConfig,
    pub env_params: maac_envs::EnvParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub version: String,
    pub spec: ExperimentSpec,
    pub cells: Vec<CellEntry>,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunStatus>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.aborted.is_some()).count()
    }
}

/// Output directory: explicit path, else the spec's, else
/// `$MAAC_OUTPUT_DIR/<name>` (default root `results`).
pub fn resolve_output(spec: &ExperimentSpec, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| spec.output.clone())
        .unwrap_or_else(|| {
            let root = std::env::var_os(OUTPUT_ROOT_VAR).unwrap_or_else(|| "results".into());
            PathBuf::from(root).join(&spec.name)
        })
}

/// Refuse a non-empty directory unless `force`, in which case only
/// previously generated artifacts are removed.
pub fn prepare_output(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let non_empty = fs::read_dir(dir).map_err(io_err(dir))?.next().is_some();
        if non_empty && !force {
            return Err(HarnessError::OutputExists(dir.to_path_buf()));
        }
        for name in GENERATED {
            let p = dir.join(name);
            if p.is_dir() {
                fs::remove_dir_all(&p).map_err(io_err(&p))?;
            } else if p.exists() {
                fs::remove_file(&p).map_err(io_err(&p))?;
            }
        }
    }
    fs::create_dir_all(dir).map_err(io_err(dir))
}

struct RunOutput {
    status: RunStatus,
    curve: Vec<LongRow>,
    curve_csv: Vec<u8>,
    gradients_csv: Option<Vec<u8>>,
    gradvar: Vec<LongRow>,
}

fn execute(spec: &ExperimentSpec, cell: &Cell, run: usize, seed: u64) -> Result<RunOutput> {
    let mut env = build_env(&spec.env, &cell.env_params)?;
    let cfg = TrainConfig {
        seed,
        ..cell.config.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res = train_run(env.as_mut(), &cfg, run, &mut rng)?;
    let mut curve_csv = Vec::new();
    write_curve_csv(&mut curve_csv, run, &res.curve)?;
    let curve = res
        .curve
        .iter()
        .map(|p| LongRow {
            run,
            step: p.env_steps,
            metric: p.metric.clone(),
            value: Some(p.value),
        })
        .collect();
    let (gradients_csv, gradvar) = if cfg.log_gradients {
        let mut buf = Vec::new();
        write_gradient_csv(&mut buf, &res.gradients)?;
        let actions = match res.trainer.actors() {
            Actors::Independent(pis) => pis.iter().map(|p| p.num_actions()).collect(),
            Actors::Joint(pi) => vec![pi.num_actions()],
        };
        (Some(buf), gradient_variance_rows(&res.gradients, &actions, spec.gradient_window, run))
    } else {
        (None, Vec::new())
    };
    Ok(RunOutput {
        status: RunStatus {
            cell: cell.tag.clone(),
            run,
            seed,
            updates: res.trainer.updates(),
            env_steps: res.trainer.env_steps(),
            final_return: res.final_return.0,
            final_discounted_return: res.final_return.1,
            aborted: res.aborted,
        },
        curve,
        curve_csv,
        gradients_csv,
        gradvar,
    })
}

/// Windowed variance series per actor, indexed by rollout. Metrics are
/// `agent<i>.action<b>` (sum over the parameters of action `b`) and, for
/// small actors, `agent<i>.param<p>`. Empty windows become empty values.
pub fn gradient_variance_rows(
    records: &[GradientRecord],
    num_actions: &[usize],
    window: usize,
    run: usize,
) -> Vec<LongRow> {
    let mut rows = Vec::new();
    for (agent, &na) in num_actions.iter().enumerate() {
        let recs: Vec<GradientRecord> =
            records.iter().filter(|r| r.agent == agent).cloned().collect();
        let dim = recs
            .iter()
            .flat_map(|r| r.entries.iter().map(|(p, _)| p + 1))
            .max()
            .unwrap_or(0)
            .max(na);
        let series = per_rollout_gradient_variance(&recs, dim, window);
        for (step, var) in series.iter().enumerate() {
            for b in 0..na {
                let touched: Vec<f64> = (b..dim).step_by(na).filter_map(|p| var[p]).collect();
                rows.push(LongRow {
                    run,
                    step: step as u64,
                    metric: format!("agent{agent}.action{b}"),
                    value: (!touched.is_empty()).then(|| touched.iter().sum()),
                });
            }
            if dim <= MAX_PARAM_SERIES {
                for (p, v) in var.iter().enumerate() {
                    rows.push(LongRow {
                        run,
                        step: step as u64,
                        metric: format!("agent{agent}.param{p}"),
                        value: *v,
                    });
                }
            }
        }
    }
    rows
}

fn write_file(dir: &Path, rel: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(&path, bytes).map_err(io_err(&path))
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn list_files(dir: &Path, base: &Path, out: &mut Vec<String>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(dir)))
        .collect::<Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            list_files(&p, base, out)?;
        } else {
            let rel = p.strip_prefix(base).expect("listed under base");
            out.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}

/// Run every cell of `spec` for `spec.runs` seeds and write all artifacts
/// into `dir`. Aborted runs are recorded and do not stop the experiment.
pub fn run_experiment(spec: &ExperimentSpec, dir: &Path, force: bool) -> Result<Manifest> {
    spec.validate()?;
    let cells = spec.cells()?;
    prepare_output(dir, force)?;
    let seeds: Vec<u64> = (0..spec.runs).map(|r| run_seed(spec.seed, r)).collect();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.runs).map(move |r| (c, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallelism.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Spec(format!("thread pool: {e}")))?;
    let outputs: Vec<Result<RunOutput>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, r)| execute(spec, &cells[c], r, seeds[r]))
            .collect()
    });

    write_file(dir, "spec.json", serde_json::to_string_pretty(spec)?.as_bytes())?;
    let mut statuses = Vec::new();
    let mut per_cell: BTreeMap<usize, (Vec<LongRow>, Vec<LongRow>)> = BTreeMap::new();
    for (&(c, r), out) in jobs.iter().zip(outputs) {
        let out = out?;
        let tag = &cells[c].tag;
        write_file(dir, &format!("runs/{tag}/run_{r}.csv"), &out.curve_csv)?;
        if let Some(g) = &out.gradients_csv {
            write_file(dir, &format!("runs/{tag}/gradients_{r}.csv"), g)?;
            let mut buf = Vec::new();
            write_long_csv(&mut buf, &out.gradvar)?;
            write_file(dir, &format!("runs/{tag}/gradvar_{r}.csv"), &buf)?;
        }
        let entry = per_cell.entry(c).or_default();
        entry.0.extend(out.curve);
        entry.1.extend(out.gradvar);
        statuses.push(out.status);
    }
    let mut curves = BTreeMap::new();
    let mut gradvars = BTreeMap::new();
    for (c, (curve_rows, var_rows)) in per_cell {
        let tag = cells[c].tag.clone();
        let agg = aggregate(&curve_rows);
        let mut buf = Vec::new();
        write_aggregate_csv(&mut buf, &agg)?;
        write_file(dir, &format!("aggregate/{tag}.csv"), &buf)?;
        curves.insert(tag.clone(), agg);
        if !var_rows.is_empty() {
            let agg = aggregate(&var_rows);
            let mut buf = Vec::new();
            write_aggregate_csv(&mut buf, &agg)?;
            write_file(dir, &format!("aggregate/{tag}{GRADVAR_SUFFIX}"), &buf)?;
            gradvars.insert(tag, agg);
        }
    }
    write_plots(dir, &spec.name, &curves, &gradvars)?;

    let mut rels = Vec::new();
    list_files(dir, dir, &mut rels)?;
    let files = rels
        .into_iter()
        .filter(|r| r != "manifest.json")
        .map(|path| {
            Ok(FileEntry {
                sha256: sha256_file(&dir.join(&path))?,
                path,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        name: spec.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        spec: spec.clone(),
        cells: cells
            .iter()
            .map(|c| CellEntry {
                tag: c.tag.clone(),
                grid: c.grid.clone(),
                config: c.config.clone(),
                env_params: c.env_params.clone(),
            })
            .collect(),
        seeds,
        runs: statuses,
        files,
    };
    write_file(dir, "manifest.json", serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(manifest)
}

/// One chart per curve metric with a series per cell, and one chart per
/// cell of its gradient-variance series.
pub fn write_plots(
    dir: &Path,
    title: &str,
    curves: &BTreeMap<String, Vec<AggregateCurve>>,
    gradvars: &BTreeMap<String, Vec<AggregateCurve>>,
) -> Result<()> {
    if curves.is_empty() && gradvars.is_empty() {
        return Err(HarnessError::NothingToPlot);
    }
    let mut by_metric: BTreeMap<&str, Vec<Series>> = BTreeMap::new();
    for (tag, aggs) in curves {
        for a in aggs {
            by_metric
                .entry(&a.metric)
                .or_default()
                .push(Series::from_aggregate(tag, a));
        }
    }
    for (metric, series) in by_metric {
        let svg = render_svg(&format!("{title}: {metric}"), "environment steps", metric, &series);
        write_file(dir, &format!("plots/{metric}.svg"), svg.as_bytes())?;
    }
    for (tag, aggs) in gradvars {
        let series: Vec<Series> = aggs
            .iter()
            .filter(|a| a.metric.contains(".action"))
            .map(|a| Series::from_aggregate(&a.metric, a))
            .collect();
        let svg = render_svg(
            &format!("{title}: {tag} per-rollout gradient variance"),
            "rollout",
            "variance",
            &series,
        );
        write_file(dir, &format!("plots/{tag}.gradvar.svg"), svg.as_bytes())?;
    }
    Ok(())
}

/// Regenerate the charts of an experiment directory from its aggregates.
pub fn replot(dir: &Path) -> Result<()> {
    let agg_dir = dir.join("aggregate");
    let mut names: Vec<String> = fs::read_dir(&agg_dir)
        .map_err(io_err(&agg_dir))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    let title = fs::read_to_string(dir.join("spec.json"))
        .ok()
        .and_then(|s| serde_json::from_str::<ExperimentSpec>(&s).ok())
        .map_or_else(|| dir.display().to_string(), |s| s.name);
    let mut curves = BTreeMap::new();
    let mut gradvars = BTreeMap::new();
    for n in names {
        let path = agg_dir.join(&n);
        let file = fs::File::open(&path).map_err(io_err(&path))?;
        let aggs = read_aggregate_csv(file, &path.display().to_string())?;
        match n.strip_suffix(GRADVAR_SUFFIX) {
            Some(tag) => gradvars.insert(tag.to_string(), aggs),
            None => curves.insert(n.trim_end_matches(".csv").to_string(), aggs),
        };
    }
    write_plots(dir, &title, &curves, &gradvars)
}

/// Aggregate run curves of one cell directory from disk.
pub fn aggregate_cell_dir(cell_dir: &Path) -> Result<Vec<AggregateCurve>> {
    let mut rows = Vec::new();
    let mut names: Vec<PathBuf> = fs::read_dir(cell_dir)
        .map_err(io_err(cell_dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("run_") && n.ends_with(".csv"))
        })
        .collect();
    names.sort();
    for p in names {
        let file = fs::File::open(&p).map_err(io_err(&p))?;
        rows.extend(read_long_csv(file, &p.display().to_string())?);
    }
    Ok(aggregate(&rows))
}
