//! Waterfall curves and per-vertex p-value trajectories.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ScreeningReport;

/// One point on a waterfall curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub vertex: usize,
    pub label: String,
    pub rho: f64,
    pub lambda: f64,
    pub p_value: f64,
}

/// Family of degree-indexed curves: curve δ holds every vertex with
/// d_i ≥ δ, ranked by descending p-value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WaterfallCurves {
    pub curves: BTreeMap<usize, Vec<CurvePoint>>,
    pub d_max: usize,
}

/// A single vertex's (δ, ρ_i(δ), λ, pv) points for δ = 1..d_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub vertex: usize,
    pub label: String,
    pub points: Vec<TrajectoryPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub delta: usize,
    pub rho: f64,
    pub lambda: f64,
    pub p_value: f64,
}

/// Assemble the waterfall curves from a screening report.
///
/// The ranked order sorts by ascending ρ_i(δ) (ties by vertex id), which is
/// descending p-value because the p-value is a non-increasing function of the
/// threshold.
pub fn build_waterfall(report: &ScreeningReport) -> WaterfallCurves {
    let mut curves = BTreeMap::new();
    for delta in 1..=report.d_max {
        let mut curve: Vec<CurvePoint> = report
            .discoveries
            .iter()
            .filter(|rec| rec.degree >= delta)
            .map(|rec| CurvePoint {
                vertex: rec.vertex,
                label: rec.label.clone(),
                rho: rec.profile[delta - 1],
                lambda: rec.lambdas[delta - 1],
                p_value: rec.pvalues[delta - 1],
            })
            .collect();
        curve.sort_by(|a, b| a.rho.partial_cmp(&b.rho).unwrap().then(a.vertex.cmp(&b.vertex)));
        curves.insert(delta, curve);
    }
    WaterfallCurves {
        curves,
        d_max: report.d_max,
    }
}

/// The p-value trajectory of one discovered vertex; it starts at δ = 1 and
/// extinguishes at δ = d_i.
pub fn trajectory(report: &ScreeningReport, vertex: usize) -> Result<Trajectory> {
    let rec = report
        .discoveries
        .iter()
        .find(|rec| rec.vertex == vertex)
        .ok_or(Error::VertexNotDiscovered(vertex))?;
    let points = (1..=rec.degree)
        .map(|delta| TrajectoryPoint {
            delta,
            rho: rec.profile[delta - 1],
            lambda: rec.lambdas[delta - 1],
            p_value: rec.pvalues[delta - 1],
        })
        .collect();
    Ok(Trajectory {
        vertex,
        label: rec.label.clone(),
        points,
    })
}
