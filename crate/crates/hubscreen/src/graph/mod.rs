//! Thresholded (partial) correlation graphs and hub discovery.

mod kernel;
mod vptree;

pub use kernel::{dot, pair_correlation};
pub use vptree::VpTree;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::binomial_u128;
use crate::stats::{discovery_pvalue, ScreeningMode, ScreeningParams};
use crate::zscore::{ScoreKind, ScoreMatrix};

/// Default number of columns per tile in the dense engine; chosen so a pair
/// of tiles stays cache-resident at score dimensions up to ~1024.
pub const TILE_COLUMNS: usize = 256;

/// One adjacency entry: neighbor id, |correlation| and its sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: usize,
    pub magnitude: f64,
    pub sign: i8,
}

/// The graph G_ρ: vertex set {0..p}, edges where |ZᵢᵀZⱼ| ≥ ρ.
///
/// Adjacency lists are sorted by descending magnitude with ties broken by
/// ascending neighbor id, so identical inputs produce identical graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGraph {
    rho: f64,
    adjacency: Vec<Vec<Neighbor>>,
    p: usize,
}

impl ThresholdGraph {
    /// Assemble a graph from half-edges (i < j); used by tests and small
    /// hand-built cases. Magnitudes below `rho` are rejected.
    pub fn from_edges(p: usize, rho: f64, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); p];
        for &(i, j, r) in edges {
            if i >= p || j >= p || i == j {
                return Err(Error::InvalidParams(format!("bad edge ({i}, {j})")));
            }
            if r.abs() < rho || r.abs() > 1.0 {
                return Err(Error::InvalidParams(format!(
                    "edge ({i}, {j}) magnitude {} outside [rho, 1]",
                    r.abs()
                )));
            }
            let sign = if r < 0.0 { -1 } else { 1 };
            adjacency[i].push(Neighbor {
                id: j,
                magnitude: r.abs(),
                sign,
            });
            adjacency[j].push(Neighbor {
                id: i,
                magnitude: r.abs(),
                sign,
            });
        }
        let mut graph = ThresholdGraph { rho, adjacency, p };
        graph.sort_neighbors();
        Ok(graph)
    }

    fn sort_neighbors(&mut self) {
        for list in &mut self.adjacency {
            list.sort_by(|a, b| {
                b.magnitude
                    .partial_cmp(&a.magnitude)
                    .unwrap()
                    .then(a.id.cmp(&b.id))
            });
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.adjacency[i]
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Which construction path to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphEngine {
    /// Blocked dense inner products over column tiles.
    Exact,
    /// Metric range search on a vantage-point tree; exact by construction.
    Range,
}

impl GraphEngine {
    pub fn build(&self, z: &ScoreMatrix, rho: f64) -> ThresholdGraph {
        match self {
            GraphEngine::Exact => build_graph_exact(z, rho),
            GraphEngine::Range => build_graph_range(z, rho),
        }
    }
}

fn validate_rho(rho: f64) {
    assert!(
        (0.0..=1.0).contains(&rho),
        "threshold must lie in [0, 1], got {rho}"
    );
}

/// Dense engine: every pair evaluated once via blocked column tiles.
pub fn build_graph_exact(z: &ScoreMatrix, rho: f64) -> ThresholdGraph {
    build_graph_exact_with_tile(z, rho, TILE_COLUMNS)
}

pub fn build_graph_exact_with_tile(z: &ScoreMatrix, rho: f64, tile: usize) -> ThresholdGraph {
    validate_rho(rho);
    let p = z.p();
    let tile = tile.max(1);
    let n_tiles = p.div_ceil(tile);
    let mut tasks = Vec::with_capacity(n_tiles * (n_tiles + 1) / 2);
    for ta in 0..n_tiles {
        for tb in ta..n_tiles {
            tasks.push((ta, tb));
        }
    }

    let tile_edges: Vec<Vec<(u32, u32, f64)>> = tasks
        .par_iter()
        .map(|&(ta, tb)| {
            let (a0, a1) = (ta * tile, ((ta + 1) * tile).min(p));
            let (b0, b1) = (tb * tile, ((tb + 1) * tile).min(p));
            let mut edges = Vec::new();
            for i in a0..a1 {
                let ci = z.column(i);
                let j_start = if ta == tb { i + 1 } else { b0 };
                for j in j_start..b1 {
                    let r = pair_correlation(ci, z.column(j));
                    if r.abs() >= rho {
                        edges.push((i as u32, j as u32, r));
                    }
                }
            }
            edges
        })
        .collect();

    let mut adjacency = vec![Vec::new(); p];
    for edges in tile_edges {
        for (i, j, r) in edges {
            let sign = if r < 0.0 { -1 } else { 1 };
            adjacency[i as usize].push(Neighbor {
                id: j as usize,
                magnitude: r.abs(),
                sign,
            });
            adjacency[j as usize].push(Neighbor {
                id: i as usize,
                magnitude: r.abs(),
                sign,
            });
        }
    }
    let mut graph = ThresholdGraph { rho, adjacency, p };
    graph.sort_neighbors();
    graph
}

/// Range-search engine: a vantage-point tree over the antipodally identified
/// score columns, queried once per vertex with radius √(2(1−ρ)). Produces
/// the same graph as the dense engine.
pub fn build_graph_range(z: &ScoreMatrix, rho: f64) -> ThresholdGraph {
    validate_rho(rho);
    let p = z.p();
    let tree = VpTree::build(z);
    let adjacency: Vec<Vec<Neighbor>> = (0..p)
        .into_par_iter()
        .map(|i| {
            let mut list: Vec<Neighbor> = tree
                .range_query(i, rho)
                .into_iter()
                .map(|(j, r)| Neighbor {
                    id: j,
                    magnitude: r.abs(),
                    sign: if r < 0.0 { -1 } else { 1 },
                })
                .collect();
            list.sort_by(|a, b| {
                b.magnitude
                    .partial_cmp(&a.magnitude)
                    .unwrap()
                    .then(a.id.cmp(&b.id))
            });
            list
        })
        .collect();
    ThresholdGraph { rho, adjacency, p }
}

/// Vertices of degree ≥ δ and their count N_{δ,ρ}.
pub fn hub_discoveries(graph: &ThresholdGraph, delta: usize) -> (Vec<usize>, usize) {
    assert!(delta >= 1, "delta must be at least 1");
    let vertices: Vec<usize> = (0..graph.p())
        .filter(|&i| graph.degree(i) >= delta)
        .collect();
    let count = vertices.len();
    (vertices, count)
}

/// Per-vertex threshold profile ρ_i(δ) for δ = 1..d_i: the δ-th largest
/// neighbor magnitude, i.e. the largest threshold at which vertex i still
/// has degree δ.
pub fn threshold_profile(graph: &ThresholdGraph, vertex: usize) -> Result<Vec<f64>> {
    let neighbors = graph.neighbors(vertex);
    if neighbors.is_empty() {
        return Err(Error::VertexNotDiscovered(vertex));
    }
    Ok(neighbors.iter().map(|nb| nb.magnitude).collect())
}

/// Star subgraph count Ñ_{δ,ρ} = Σ_i C(d_i, δ), saturating at `u128::MAX`.
/// Zero exactly when no vertex has degree ≥ δ.
pub fn count_stars(graph: &ThresholdGraph, delta: usize) -> u128 {
    assert!(delta >= 1, "delta must be at least 1");
    (0..graph.p()).fold(0u128, |acc, i| {
        acc.saturating_add(binomial_u128(graph.degree(i) as u64, delta as u64))
    })
}

/// One hub discovery with its degree profile and attached statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryRecord {
    pub vertex: usize,
    pub label: String,
    pub degree: usize,
    /// ρ_i(δ) for δ = 1..degree, non-increasing.
    pub profile: Vec<f64>,
    /// Effective Poisson rate per δ; λ = −log(1 − pv) whenever pv < 1.
    pub lambdas: Vec<f64>,
    pub pvalues: Vec<f64>,
}

/// Full screening output: all discoveries plus per-δ counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub params: ScreeningParams,
    pub discoveries: Vec<DiscoveryRecord>,
    /// N_{δ,ρ*} for δ = 1..d_max.
    pub counts: BTreeMap<usize, usize>,
    pub d_max: usize,
}

impl ScreeningReport {
    pub fn count_at(&self, delta: usize) -> usize {
        self.counts.get(&delta).copied().unwrap_or(0)
    }
}

/// Screen the score matrix at threshold ρ*: build the graph, then attach a
/// profile, λ-values and p-values to every positive-degree vertex.
pub fn screen(
    z: &ScoreMatrix,
    rho_star: f64,
    params: &ScreeningParams,
    engine: GraphEngine,
) -> Result<ScreeningReport> {
    if !(rho_star > 0.0 && rho_star <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "rho_star must lie in (0, 1], got {rho_star}"
        )));
    }
    params.validate()?;
    if params.n != z.n() || params.p != z.p() {
        return Err(Error::DimensionMismatch(format!(
            "params are for n={}, p={} but scores have n={}, p={}",
            params.n,
            params.p,
            z.n(),
            z.p()
        )));
    }
    let expected_kind = match params.mode {
        ScreeningMode::Correlation => ScoreKind::UScore,
        ScreeningMode::PartialCorrelation => ScoreKind::YScore,
    };
    if z.kind() != expected_kind {
        return Err(Error::InvalidParams(format!(
            "score kind {:?} does not match mode {}",
            z.kind(),
            params.mode
        )));
    }

    let graph = engine.build(z, rho_star);
    let params = params.clone().with_rho(rho_star);

    let hubs: Vec<usize> = (0..graph.p()).filter(|&i| graph.degree(i) >= 1).collect();
    let discoveries: Vec<DiscoveryRecord> = hubs
        .par_iter()
        .map(|&vertex| {
            let profile = threshold_profile(&graph, vertex)?;
            let mut lambdas = Vec::with_capacity(profile.len());
            let mut pvalues = Vec::with_capacity(profile.len());
            for (idx, &rho_i) in profile.iter().enumerate() {
                let (lambda, pv) = discovery_pvalue(idx + 1, rho_i, &params)?;
                lambdas.push(lambda);
                pvalues.push(pv);
            }
            Ok(DiscoveryRecord {
                vertex,
                label: z.labels()[vertex].clone(),
                degree: profile.len(),
                profile,
                lambdas,
                pvalues,
            })
        })
        .collect::<Result<_>>()?;

    let d_max = discoveries.iter().map(|d| d.degree).max().unwrap_or(0);
    let mut counts = BTreeMap::new();
    for delta in 1..=d_max {
        counts.insert(
            delta,
            discoveries.iter().filter(|d| d.degree >= delta).count(),
        );
    }
    Ok(ScreeningReport {
        params,
        discoveries,
        counts,
        d_max,
    })
}
