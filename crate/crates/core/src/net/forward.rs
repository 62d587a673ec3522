//! Forward pass: the embedding recursion and the value readout.
//!
//! Per node `v` and iteration `t`:
//!
//! ```text
//! H(t+1, v) = relu(theta1 x_v + theta2 sum_{u != v} H(t, u)
//!                  + theta3 sum_{u != v} relu(theta4 w_vu))
//! ```
//!
//! with `H(0, *) = 0` and `N(v)` = all other nodes (complete graph). Edge
//! weights `w` are normalized by the instance's length unit. Because
//! weights are non-negative, `relu(theta4[k] * w) = relu(theta4[k]) * w`,
//! so the edge term collapses to `relu(theta4) * rowsum(v)` and is
//! constant across iterations.
//!
//! Readout: `h(v) = theta5 . relu([theta6 sum_u H(T,u), theta7 H(T,v)])`,
//! in normalized length units.

use super::linalg::matvec;
use super::{node_features, EmbeddingParams, EMBED_ITERATIONS, FEATURE_DIM};
use crate::instance::PathState;

/// All intermediate activations of one forward pass, kept for
/// backpropagation: embeddings for every iteration `t = 0..=T`, the node
/// features, and the normalized weight row sums that generate the edge
/// term.
#[derive(Debug, Clone)]
pub struct EmbeddingState {
    pub n: usize,
    pub dim: usize,
    /// `(T+1) * n * dim`, level-major then node-major.
    pub levels: Vec<f64>,
    /// `n * FEATURE_DIM`.
    pub features: Vec<f64>,
    /// `sum_{u != v} w_norm(v, u)` per node.
    pub weight_rowsum: Vec<f64>,
}

impl EmbeddingState {
    pub fn level(&self, t: usize) -> &[f64] {
        let stride = self.n * self.dim;
        &self.levels[t * stride..(t + 1) * stride]
    }

    pub fn node_embedding(&self, t: usize, v: usize) -> &[f64] {
        &self.level(t)[v * self.dim..(v + 1) * self.dim]
    }

    pub fn node_features_row(&self, v: usize) -> &[f64] {
        &self.features[v * FEATURE_DIM..(v + 1) * FEATURE_DIM]
    }

    /// Final-iteration embedding of node `v`.
    pub fn final_embedding(&self, v: usize) -> &[f64] {
        self.node_embedding(EMBED_ITERATIONS, v)
    }

    /// Sum of final embeddings over all nodes.
    pub fn pooled(&self) -> Vec<f64> {
        let mut pool = vec![0.0; self.dim];
        let last = self.level(EMBED_ITERATIONS);
        for chunk in last.chunks_exact(self.dim) {
            for (p, h) in pool.iter_mut().zip(chunk) {
                *p += h;
            }
        }
        pool
    }
}

/// Run the T-iteration embedding recursion for every node of the graph.
pub fn embed_forward(params: &EmbeddingParams, state: &PathState<'_>) -> EmbeddingState {
    let inst = state.instance();
    let n = inst.n();
    let dim = params.dim();
    let unit = inst.length_unit();

    let mut features = vec![0.0; n * FEATURE_DIM];
    for v in 0..n {
        features[v * FEATURE_DIM..(v + 1) * FEATURE_DIM].copy_from_slice(&node_features(state, v));
    }
    let weight_rowsum: Vec<f64> = (0..n)
        .map(|v| inst.weight_row(v).iter().sum::<f64>() / unit)
        .collect();
    let relu4: Vec<f64> = params.theta4.iter().map(|w| w.max(0.0)).collect();

    // Per-node constant part: theta1 x_v + theta3 (relu(theta4) * rowsum_v).
    let mut constant = vec![0.0; n * dim];
    let mut edge_vec = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    for v in 0..n {
        let c = &mut constant[v * dim..(v + 1) * dim];
        matvec(
            &params.theta1,
            dim,
            FEATURE_DIM,
            &features[v * FEATURE_DIM..(v + 1) * FEATURE_DIM],
            c,
        );
        for (e, r) in edge_vec.iter_mut().zip(&relu4) {
            *e = r * weight_rowsum[v];
        }
        matvec(&params.theta3, dim, dim, &edge_vec, &mut tmp);
        for (cv, t) in c.iter_mut().zip(&tmp) {
            *cv += t;
        }
    }

    let stride = n * dim;
    let mut levels = vec![0.0; (EMBED_ITERATIONS + 1) * stride];
    let mut total = vec![0.0; dim];
    let mut nb = vec![0.0; dim];
    let mut mixed = vec![0.0; dim];
    for t in 0..EMBED_ITERATIONS {
        total.fill(0.0);
        {
            let cur = &levels[t * stride..(t + 1) * stride];
            for chunk in cur.chunks_exact(dim) {
                for (s, h) in total.iter_mut().zip(chunk) {
                    *s += h;
                }
            }
        }
        for v in 0..n {
            {
                let h_v = &levels[t * stride + v * dim..t * stride + (v + 1) * dim];
                for ((d, s), h) in nb.iter_mut().zip(&total).zip(h_v) {
                    *d = s - h;
                }
            }
            matvec(&params.theta2, dim, dim, &nb, &mut mixed);
            let c = &constant[v * dim..(v + 1) * dim];
            let out = &mut levels[(t + 1) * stride + v * dim..(t + 1) * stride + (v + 1) * dim];
            for ((o, m), cv) in out.iter_mut().zip(&mixed).zip(c) {
                *o = (m + cv).max(0.0);
            }
        }
    }

    EmbeddingState {
        n,
        dim,
        levels,
        features,
        weight_rowsum,
    }
}

/// Value readout `h(v)` from a computed embedding, in normalized length
/// units (multiply by the instance's length unit for plane units).
pub fn value_h(params: &EmbeddingParams, emb: &EmbeddingState, v: usize) -> f64 {
    let dim = params.dim();
    assert_eq!(dim, emb.dim, "params and embedding widths differ");
    assert!(v < emb.n, "city index {v} out of range (n={})", emb.n);
    let pool = emb.pooled();
    let mut u6 = vec![0.0; dim];
    let mut u7 = vec![0.0; dim];
    matvec(&params.theta6, dim, dim, &pool, &mut u6);
    matvec(&params.theta7, dim, dim, emb.final_embedding(v), &mut u7);
    let mut h = 0.0;
    for (w, u) in params.theta5[..dim].iter().zip(&u6) {
        h += w * u.max(0.0);
    }
    for (w, u) in params.theta5[dim..].iter().zip(&u7) {
        h += w * u.max(0.0);
    }
    h
}

/// Readout intermediates shared by the gradient code.
pub(super) struct Readout {
    pub pool: Vec<f64>,
    pub u6: Vec<f64>,
    pub u7: Vec<f64>,
    pub h: f64,
}

pub(super) fn readout(params: &EmbeddingParams, emb: &EmbeddingState, v: usize) -> Readout {
    let dim = params.dim();
    let pool = emb.pooled();
    let mut u6 = vec![0.0; dim];
    let mut u7 = vec![0.0; dim];
    matvec(&params.theta6, dim, dim, &pool, &mut u6);
    matvec(&params.theta7, dim, dim, emb.final_embedding(v), &mut u7);
    let mut h = 0.0;
    for (w, u) in params.theta5[..dim].iter().zip(&u6) {
        h += w * u.max(0.0);
    }
    for (w, u) in params.theta5[dim..].iter().zip(&u7) {
        h += w * u.max(0.0);
    }
    Readout { pool, u6, u7, h }
}
