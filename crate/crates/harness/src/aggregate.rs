//! Cross-run statistics of long-format curves.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{io_err, HarnessError, Result};

pub const LONG_HEADER: [&str; 4] = ["run", "step", "metric", "value"];
pub const AGGREGATE_HEADER: [&str; 9] =
    ["metric", "step", "mean", "std", "lo", "hi", "n", "filled", "degenerate"];

/// One long-format row; `value` is `None` for an empty cell.
#[derive(Clone, Debug, PartialEq)]
pub struct LongRow {
    pub run: usize,
    pub step: u64,
    pub metric: String,
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub step: u64,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator).
    pub std: f64,
    /// 95% Student-t interval for the mean.
    pub lo: f64,
    pub hi: f64,
    /// Runs contributing at this step.
    pub n: usize,
    /// Contributing runs whose value was carried forward from an earlier step.
    pub filled: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurve {
    pub metric: String,
    pub runs: usize,
    /// Fewer than two runs: spread and interval collapse to the mean.
    pub degenerate: bool,
    pub points: Vec<AggregatePoint>,
}

/// Mean, sample std and 95% interval of `values`, independent of order.
pub fn summarize(values: &[f64]) -> (f64, f64, f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0, mean, mean);
    }
    let mut dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    dev.sort_by(f64::total_cmp);
    let std = (dev.iter().sum::<f64>() / (n - 1) as f64).sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    let half = t * std / (n as f64).sqrt();
    (mean, std, mean - half, mean + half)
}

/// Aggregate every metric across runs. Steps are the union over runs; a run
/// missing a step contributes its latest earlier value, counted in `filled`.
pub fn aggregate(rows: &[LongRow]) -> Vec<AggregateCurve> {
    let mut by_metric: BTreeMap<&str, BTreeMap<usize, BTreeMap<u64, f64>>> = BTreeMap::new();
    for r in rows {
        if let Some(v) = r.value {
            by_metric
                .entry(&r.metric)
                .or_default()
                .entry(r.run)
                .or_default()
                .insert(r.step, v);
        }
    }
    by_metric
        .into_iter()
        .map(|(metric, runs)| {
            let steps: BTreeSet<u64> = runs.values().flat_map(|m| m.keys().copied()).collect();
            let points = steps
                .into_iter()
                .map(|step| {
                    let mut values = Vec::with_capacity(runs.len());
                    let mut filled = 0;
                    for series in runs.values() {
                        if let Some(v) = series.get(&step) {
                            values.push(*v);
                        } else if let Some((_, v)) = series.range(..step).next_back() {
                            values.push(*v);
                            filled += 1;
                        }
                    }
                    let (mean, std, lo, hi) = summarize(&values);
                    AggregatePoint {
                        step,
                        mean,
                        std,
                        lo,
                        hi,
                        n: values.len(),
                        filled,
                    }
                })
                .collect();
            AggregateCurve {
                metric: metric.to_string(),
                runs: runs.len(),
                degenerate: runs.len() < 2,
                points,
            }
        })
        .collect()
}

pub fn read_long_csv<R: Read>(reader: R, source: &str) -> Result<Vec<LongRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(LONG_HEADER) {
        return Err(HarnessError::Schema(vec![source.to_string()]));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let parse_err = || HarnessError::Schema(vec![format!("{source}: {rec:?}")]);
        let value = match &rec[3] {
            "" => None,
            v => Some(v.parse().map_err(|_| parse_err())?),
        };
        out.push(LongRow {
            run: rec[0].parse().map_err(|_| parse_err())?,
            step: rec[1].parse().map_err(|_| parse_err())?,
            metric: rec[2].to_string(),
            value,
        });
    }
    Ok(out)
}

/// Read and aggregate several long-format files. All files with a wrong
/// header are reported together.
pub fn aggregate_files(paths: &[impl AsRef<Path>]) -> Result<Vec<AggregateCurve>> {
    let mut rows = Vec::new();
    let mut offending = Vec::new();
    for p in paths {
        let p = p.as_ref();
        let file = std::fs::File::open(p).map_err(io_err(p))?;
        match read_long_csv(file, &p.display().to_string()) {
            Ok(r) => rows.extend(r),
            Err(HarnessError::Schema(bad)) => offending.extend(bad),
            Err(e) => return Err(e),
        }
    }
    if !offending.is_empty() {
        return Err(HarnessError::Schema(offending));
    }
    Ok(aggregate(&rows))
}

pub fn write_long_csv<W: Write>(writer: W, rows: &[LongRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(LONG_HEADER)?;
    for r in rows {
        w.write_record([
            r.run.to_string(),
            r.step.to_string(),
            r.metric.clone(),
            r.value.map_or(String::new(), |v| v.to_string()),
        ])?;
    }
    w.flush().map_err(io_err("<csv>"))?;
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(writer: W, curves: &[AggregateCurve]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(AGGREGATE_HEADER)?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                c.metric.clone(),
                p.step.to_string(),
                p.mean.to_string(),
                p.std.to_string(),
                p.lo.to_string(),
                p.hi.to_string(),
                p.n.to_string(),
                p.filled.to_string(),
                c.degenerate.to_string(),
            ])?;
        }
    }
    w.flush().map_err(io_err("<csv>"))?;
    Ok(())
}

pub fn read_aggregate_csv<R: Read>(reader: R, source: &str) -> Result<Vec<AggregateCurve>> {
    let mut rdr = csv::Reader::from_reader(reader);
    if rdr.headers()?.iter().ne(AGGREGATE_HEADER) {
        return Err(HarnessError::Schema(vec![source.to_string()]));
    }
    let mut curves: Vec<AggregateCurve> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let bad = || HarnessError::Schema(vec![format!("{source}: {rec:?}")]);
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad());
        let point = AggregatePoint {
            step: rec[1].parse().map_err(|_| bad())?,
            mean: f(2)?,
            std: f(3)?,
            lo: f(4)?,
            hi: f(5)?,
            n: rec[6].parse().map_err(|_| bad())?,
            filled: rec[7].parse().map_err(|_| bad())?,
        };
        let degenerate = rec[8].parse().map_err(|_| bad())?;
        match curves.last_mut() {
            Some(c) if c.metric == rec[0] => c.points.push(point),
            _ => curves.push(AggregateCurve {
                metric: rec[0].to_string(),
                runs: if degenerate { 1 } else { 2 },
                degenerate,
                points: vec![point],
            }),
        }
    }
    for c in &mut curves {
        if !c.degenerate {
            c.runs = c.points.iter().map(|p| p.n).max().unwrap_or(0);
        }
    }
    Ok(curves)
}
