//! CSV emission for learning curves and gradient records.

use std::io::Write;

use crate::error::Result;
use crate::train::{CurvePoint, GradientRecord};

/// Long-format rows `run, step, metric, value`, where `step` counts
/// environment steps.
pub fn write_curve_csv<W: Write>(writer: W, run: usize, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["run", "step", "metric", "value"])?;
    for p in curve {
        w.write_record([
            run.to_string(),
            p.env_steps.to_string(),
            p.metric.clone(),
            p.value.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Rows `run, update, agent, param_index, grad_value`, one per sparse entry.
pub fn write_gradient_csv<W: Write>(writer: W, records: &[GradientRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["run", "update", "agent", "param_index", "grad_value"])?;
    for r in records {
        for &(p, v) in &r.entries {
            w.write_record([
                r.run.to_string(),
                r.update.to_string(),
                r.agent.to_string(),
                p.to_string(),
                v.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_rows_are_long_format() {
        let curve = vec![CurvePoint {
            update: 1,
            env_steps: 64,
            metric: "return".into(),
            value: 5.0,
        }];
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, 3, &curve).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "run,step,metric,value\n3,64,return,5\n");
    }

    #[test]
    fn gradient_rows_expand_entries() {
        let rec = GradientRecord {
            run: 1,
            update: 2,
            agent: 0,
            entries: vec![(0, -0.5), (1, 0.5)],
            taken: vec![1],
            rollout_return: 3.0,
        };
        let mut buf = Vec::new();
        write_gradient_csv(&mut buf, &[rec]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("1,2,0,1,0.5"));
    }
}
