//! Volume ladders: run a plan at several sizes and fit time against volume.

use std::fmt;

use super::plan::GenerationPlan;
use super::report::ThroughputReport;
use crate::error::{Error, Result};

/// Mean wall time of the repetitions at one volume.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    /// Bytes, records or edges, in the plan's volume unit.
    pub volume: u64,
    pub seconds: Vec<f64>,
    pub mean_seconds: f64,
}

/// Least-squares line `time = slope * volume + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub points: Vec<ScalingPoint>,
    pub fit: LinearFit,
}

/// A ladder that stopped early, with the volumes that completed.
#[derive(Debug)]
pub struct PartialScaling {
    pub completed: Vec<ScalingPoint>,
    pub error: Error,
}

impl fmt::Display for PartialScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "partial results ({} volumes completed): {}", self.completed.len(), self.error)
    }
}

impl std::error::Error for PartialScaling {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Ordinary least squares. With zero variance in `ys`, R² is 1 for a
/// perfect fit and 0 otherwise.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::param("linear fit needs at least two paired points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::param("linear fit needs at least two distinct volumes"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Runs `template` at each volume `repetitions` times with the rate cap
/// removed and fits mean time against volume.
///
/// One untimed run at the smallest volume comes first to warm caches and
/// the allocator. Times are the generator's own measurements.
pub fn scaling_experiment<F>(
    template: &GenerationPlan,
    volumes: &[u64],
    repetitions: usize,
    mut runner: F,
) -> Result<ScalingResult, PartialScaling>
where
    F: FnMut(&GenerationPlan) -> Result<ThroughputReport>,
{
    let fail = |completed, error| PartialScaling { completed, error };
    if volumes.len() < 3 {
        return Err(fail(Vec::new(), Error::param("a scaling ladder needs at least 3 volumes")));
    }
    if volumes.contains(&0) {
        return Err(fail(Vec::new(), Error::param("scaling volumes must be > 0")));
    }
    if repetitions == 0 {
        return Err(fail(Vec::new(), Error::param("repetitions must be >= 1")));
    }
    let plan_for = |v: u64| {
        let mut p = template.clone();
        p.volume = p.volume.with_amount(v);
        p.rate_cap = None;
        p
    };
    let smallest = *volumes.iter().min().expect("non-empty");
    if let Err(e) = runner(&plan_for(smallest)) {
        return Err(fail(Vec::new(), e));
    }
    let mut points = Vec::with_capacity(volumes.len());
    for &v in volumes {
        let plan = plan_for(v);
        let mut seconds = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            match runner(&plan) {
                Ok(r) => seconds.push(r.seconds),
                Err(e) => return Err(fail(points, e)),
            }
        }
        let mean_seconds = seconds.iter().sum::<f64>() / seconds.len() as f64;
        points.push(ScalingPoint {
            volume: v,
            seconds,
            mean_seconds,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.volume as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_seconds).collect();
    match linear_fit(&xs, &ys) {
        Ok(fit) => Ok(ScalingResult { points, fit }),
        Err(e) => Err(fail(points, e)),
    }
}
