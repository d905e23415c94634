//! Vantage-point tree over score columns with antipodal identification.
//!
//! Thresholding |ZᵢᵀZⱼ| ≥ ρ is a range search in the projective metric
//! d(i, j) = min(‖Zᵢ−Zⱼ‖, ‖Zᵢ+Zⱼ‖) = √(2 − 2|ZᵢᵀZⱼ|), the quotient metric of
//! the sphere under x ↦ −x, with query radius r = √(2(1−ρ)). One inner
//! product yields the distance, and final membership is always decided by
//! `pair_correlation` so the edge set matches the dense path exactly; the
//! triangle-inequality pruning bounds carry a small slack for floating-point
//! safety.

use crate::graph::kernel::pair_correlation;
use crate::zscore::ScoreMatrix;

/// Slack added to pruning comparisons; distances carry O(1e-13) rounding,
/// so this cannot cause a missed neighbor while being far too small to
/// admit meaningful extra work.
const PRUNE_PAD: f64 = 1e-9;

const NIL: u32 = u32::MAX;

struct Node {
    point: u32,
    /// Distance splitting the near and far children; f64::MAX for leaves.
    split: f64,
    near: u32,
    far: u32,
}

pub struct VpTree<'a> {
    scores: &'a ScoreMatrix,
    nodes: Vec<Node>,
    root: u32,
}

#[inline]
fn projective_distance(r: f64) -> f64 {
    (2.0 - 2.0 * r.abs()).max(0.0).sqrt()
}

impl<'a> VpTree<'a> {
    pub fn build(scores: &'a ScoreMatrix) -> Self {
        let p = scores.p();
        let mut items: Vec<(u32, f64)> = (0..p as u32).map(|i| (i, 0.0)).collect();
        let mut nodes = Vec::with_capacity(p);
        let root = Self::build_node(scores, &mut items, &mut nodes);
        VpTree {
            scores,
            nodes,
            root,
        }
    }

    fn build_node(scores: &ScoreMatrix, items: &mut [(u32, f64)], nodes: &mut Vec<Node>) -> u32 {
        match items.len() {
            0 => return NIL,
            1 => {
                let id = nodes.len() as u32;
                nodes.push(Node {
                    point: items[0].0,
                    split: f64::MAX,
                    near: NIL,
                    far: NIL,
                });
                return id;
            }
            _ => {}
        }
        // deterministic vantage choice: first item of the current slice
        let vp = items[0].0;
        let rest = &mut items[1..];
        for it in rest.iter_mut() {
            let r = pair_correlation(scores.column(vp as usize), scores.column(it.0 as usize));
            it.1 = projective_distance(r);
        }
        let mid = rest.len() / 2;
        rest.select_nth_unstable_by(mid, |a, b| a.1.partial_cmp(&b.1).unwrap());
        let split = rest[mid].1;
        let id = nodes.len() as u32;
        nodes.push(Node {
            point: vp,
            split,
            near: NIL,
            far: NIL,
        });
        let (near_items, far_items) = rest.split_at_mut(mid);
        let near = Self::build_node(scores, near_items, nodes);
        let far = Self::build_node(scores, far_items, nodes);
        nodes[id as usize].near = near;
        nodes[id as usize].far = far;
        id
    }

    /// All points j ≠ query with |ZⱼᵀZ_query| ≥ rho, as (j, correlation).
    pub fn range_query(&self, query: usize, rho: f64) -> Vec<(usize, f64)> {
        let radius = (2.0 * (1.0 - rho)).max(0.0).sqrt();
        let mut out = Vec::new();
        if self.root != NIL {
            self.search(self.root, query, rho, radius, &mut out);
        }
        out
    }

    fn search(&self, node: u32, query: usize, rho: f64, radius: f64, out: &mut Vec<(usize, f64)>) {
        let node = &self.nodes[node as usize];
        let vp = node.point as usize;
        let r = pair_correlation(self.scores.column(query), self.scores.column(vp));
        if vp != query && r.abs() >= rho {
            out.push((vp, r));
        }
        if node.split == f64::MAX {
            return;
        }
        let d = projective_distance(r);
        if node.near != NIL && d - radius <= node.split + PRUNE_PAD {
            self.search(node.near, query, rho, radius, out);
        }
        if node.far != NIL && d + radius >= node.split - PRUNE_PAD {
            self.search(node.far, query, rho, radius, out);
        }
    }
}
