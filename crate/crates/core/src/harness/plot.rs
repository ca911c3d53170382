//! Seed-averaged curves for plotting.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::solver::{RunRecord, RunRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMode {
    ObjVsTime,
    ObjVsSfo,
    AccVsTime,
}

impl FromStr for PlotMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "obj_vs_time" => Ok(PlotMode::ObjVsTime),
            "obj_vs_sfo" => Ok(PlotMode::ObjVsSfo),
            "acc_vs_time" => Ok(PlotMode::AccVsTime),
            _ => Err(Error::invalid(format!("unknown plot mode `{s}`"))),
        }
    }
}

impl PlotMode {
    fn axis(&self) -> &'static str {
        match self {
            PlotMode::ObjVsSfo => "sfo_calls",
            _ => "cpu_seconds",
        }
    }

    fn x(&self, r: &RunRow) -> Option<f64> {
        match self {
            PlotMode::ObjVsSfo => Some(r.sfo_calls as f64),
            _ => r.cpu_seconds,
        }
    }

    fn y(&self, r: &RunRow) -> Option<f64> {
        match self {
            PlotMode::AccVsTime => r.accuracy,
            _ => Some(r.objective),
        }
    }
}

/// One point of an averaged curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Running minimum of `mean` (running maximum for accuracy).
    pub best_so_far: f64,
}

/// Averages records on the union of their x values. Between logged points
/// each record holds its last logged value; before its first point it
/// holds the first one.
pub fn average_curve(records: &[RunRecord], mode: PlotMode) -> Result<Vec<CurvePoint>> {
    let first = records.first().ok_or_else(|| Error::invalid("no records to plot"))?;
    if let Some(other) = records.iter().find(|r| r.label != first.label) {
        return Err(Error::invalid(format!(
            "incompatible records: `{}` and `{}`",
            first.label, other.label
        )));
    }
    let mut series: Vec<Vec<(f64, f64)>> = Vec::with_capacity(records.len());
    for rec in records {
        let pts: Option<Vec<(f64, f64)>> = rec.rows.iter().map(|r| Some((mode.x(r)?, mode.y(r)?))).collect();
        let pts = pts.ok_or_else(|| {
            Error::invalid(format!("record {} (seed {}) lacks data for {mode:?}", rec.label, rec.seed))
        })?;
        if pts.is_empty() {
            return Err(Error::invalid(format!("record {} (seed {}) is empty", rec.label, rec.seed)));
        }
        series.push(pts);
    }
    let mut grid: Vec<f64> = series.iter().flatten().map(|p| p.0).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let higher_is_better = mode == PlotMode::AccVsTime;
    let mut best = if higher_is_better { f64::NEG_INFINITY } else { f64::INFINITY };
    let mut cursor = vec![0usize; series.len()];
    let mut out = Vec::with_capacity(grid.len());
    for &x in &grid {
        let mut vals = Vec::with_capacity(series.len());
        for (s, c) in series.iter().zip(cursor.iter_mut()) {
            while *c + 1 < s.len() && s[*c + 1].0 <= x {
                *c += 1;
            }
            vals.push(s[*c].1);
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        best = if higher_is_better { best.max(mean) } else { best.min(mean) };
        out.push(CurvePoint {
            x,
            mean,
            min: vals.iter().copied().fold(f64::INFINITY, f64::min),
            max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            best_so_far: best,
        });
    }
    Ok(out)
}

/// CSV with columns `<axis>,mean,min,max,best_so_far`.
pub fn emit_plot_data(records: &[RunRecord], mode: PlotMode) -> Result<String> {
    let curve = average_curve(records, mode)?;
    let mut s = format!("{},mean,min,max,best_so_far\n", mode.axis());
    for p in curve {
        s.push_str(&format!("{:?},{:?},{:?},{:?},{:?}\n", p.x, p.mean, p.min, p.max, p.best_so_far));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(seed: u64, pts: &[(u64, f64)]) -> RunRecord {
        RunRecord {
            label: "x".into(),
            seed,
            rows: pts
                .iter()
                .enumerate()
                .map(|(i, &(s, o))| RunRow {
                    iter: i as u64,
                    sfo_calls: s,
                    cpu_seconds: None,
                    objective: o,
                    gap: None,
                    accuracy: None,
                })
                .collect(),
        }
    }

    #[test]
    fn single_record_is_itself() {
        let r = rec(0, &[(0, 3.0), (5, 2.0), (10, 2.5)]);
        let c = average_curve(&[r], PlotMode::ObjVsSfo).unwrap();
        let ys: Vec<f64> = c.iter().map(|p| p.mean).collect();
        assert_eq!(ys, vec![3.0, 2.0, 2.5]);
        assert_eq!(c[2].best_so_far, 2.0);
        assert!(c.iter().all(|p| p.min == p.mean && p.max == p.mean));
    }

    #[test]
    fn step_interpolation_and_envelope() {
        let a = rec(0, &[(0, 4.0), (10, 2.0)]);
        let b = rec(1, &[(0, 2.0), (5, 1.0)]);
        let c = average_curve(&[a, b], PlotMode::ObjVsSfo).unwrap();
        assert_eq!(c.iter().map(|p| p.x).collect::<Vec<_>>(), vec![0.0, 5.0, 10.0]);
        assert_eq!(c[1].mean, 2.5);
        assert_eq!((c[1].min, c[1].max), (1.0, 4.0));
        assert_eq!(c[2].mean, 1.5);
    }

    #[test]
    fn incompatible_or_missing_columns_rejected() {
        let a = rec(0, &[(0, 1.0)]);
        let mut b = rec(1, &[(0, 1.0)]);
        b.label = "y".into();
        assert!(average_curve(&[a.clone(), b], PlotMode::ObjVsSfo).is_err());
        assert!(average_curve(std::slice::from_ref(&a), PlotMode::ObjVsTime).is_err());
        assert!(average_curve(&[a], PlotMode::AccVsTime).is_err());
        assert!(average_curve(&[], PlotMode::ObjVsSfo).is_err());
    }
}
