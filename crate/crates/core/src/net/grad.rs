//! Squared-error loss with L2 regularization and its exact gradient.
//!
//! A training sample is a (state, action, reward) tuple; the network value
//! is evaluated on the state that results from appending the action
//! (candidate-successor evaluation), read out at the appended node. The
//! gradient is hand-derived backpropagation through the readout and all T
//! embedding iterations; the relu subgradient at 0 is taken as 0.

use super::forward::{embed_forward, readout};
use super::linalg::{matvec_t, outer_acc};
use super::{EmbeddingParams, EmbeddingState, NetError, EMBED_ITERATIONS};
use crate::instance::{PathState, TspInstance};

/// One replay tuple resolved against its instance. `visited` is the state
/// before the action; `reward` is in normalized length units.
#[derive(Debug, Clone, Copy)]
pub struct TrainSample<'a> {
    pub inst: &'a TspInstance,
    pub visited: &'a [usize],
    pub action: usize,
    pub reward: f64,
}

fn successor_state<'a>(sample: &TrainSample<'a>) -> Result<PathState<'a>, NetError> {
    let mut state = PathState::from_visited(sample.inst, sample.visited)
        .map_err(|e| NetError::InvalidArgument(e.to_string()))?;
    if sample.action >= sample.inst.n() || state.contains(sample.action) {
        return Err(NetError::InvalidArgument(format!(
            "action {} invalid for sample state",
            sample.action
        )));
    }
    state.push(sample.action);
    Ok(state)
}

/// Network value for one sample (normalized units).
pub fn sample_value(params: &EmbeddingParams, sample: &TrainSample<'_>) -> Result<f64, NetError> {
    let state = successor_state(sample)?;
    let emb = embed_forward(params, &state);
    Ok(readout(params, &emb, sample.action).h)
}

/// Mean squared error over the batch plus `l2 * ||Theta||^2`.
pub fn loss(
    params: &EmbeddingParams,
    samples: &[TrainSample<'_>],
    l2: f64,
) -> Result<f64, NetError> {
    if samples.is_empty() {
        return Err(NetError::InvalidArgument("empty batch".into()));
    }
    let mut acc = 0.0;
    for s in samples {
        let h = sample_value(params, s)?;
        let r = s.reward - h;
        acc += r * r;
    }
    Ok(acc / samples.len() as f64 + l2 * params.sq_norm())
}

/// Hash of the relu activation pattern of one forward+readout pass.
///
/// Two parameter points with the same signature lie on the same linear
/// piece of the network, which is what makes a finite-difference gradient
/// comparison valid.
pub fn activation_signature(params: &EmbeddingParams, emb: &EmbeddingState, v: usize) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bit: bool| {
        hash ^= bit as u64 + 0x9e37_79b9_7f4a_7c15;
        hash = hash.wrapping_mul(0x100_0000_01b3);
    };
    for w in &params.theta4 {
        feed(*w > 0.0);
    }
    for t in 1..=EMBED_ITERATIONS {
        for h in emb.level(t) {
            feed(*h > 0.0);
        }
    }
    let ro = readout(params, emb, v);
    for u in ro.u6.iter().chain(&ro.u7) {
        feed(*u > 0.0);
    }
    hash
}

/// [`loss`] plus the combined activation signature of the whole batch.
pub fn loss_with_signature(
    params: &EmbeddingParams,
    samples: &[TrainSample<'_>],
    l2: f64,
) -> Result<(f64, u64), NetError> {
    if samples.is_empty() {
        return Err(NetError::InvalidArgument("empty batch".into()));
    }
    let mut acc = 0.0;
    let mut sig: u64 = 0;
    for s in samples {
        let state = successor_state(s)?;
        let emb = embed_forward(params, &state);
        let ro = readout(params, &emb, s.action);
        let r = s.reward - ro.h;
        acc += r * r;
        sig = sig
            .rotate_left(7)
            .wrapping_add(activation_signature(params, &emb, s.action));
    }
    Ok((acc / samples.len() as f64 + l2 * params.sq_norm(), sig))
}

/// Analytic gradient of [`loss`], congruent to the parameter blocks.
pub fn grad(
    params: &EmbeddingParams,
    samples: &[TrainSample<'_>],
    l2: f64,
) -> Result<EmbeddingParams, NetError> {
    if samples.is_empty() {
        return Err(NetError::InvalidArgument("empty batch".into()));
    }
    let dim = params.dim();
    let mut g = EmbeddingParams::zeros(dim);
    let inv_batch = 1.0 / samples.len() as f64;
    let relu4: Vec<f64> = params.theta4.iter().map(|w| w.max(0.0)).collect();

    for s in samples {
        let state = successor_state(s)?;
        let emb = embed_forward(params, &state);
        let n = emb.n;
        let ro = readout(params, &emb, s.action);
        let gh = 2.0 * (ro.h - s.reward) * inv_batch;

        // Readout layer.
        let mut delta6 = vec![0.0; dim];
        let mut delta7 = vec![0.0; dim];
        for k in 0..dim {
            let m6 = ro.u6[k].max(0.0);
            let m7 = ro.u7[k].max(0.0);
            g.theta5[k] += gh * m6;
            g.theta5[dim + k] += gh * m7;
            delta6[k] = if ro.u6[k] > 0.0 { gh * params.theta5[k] } else { 0.0 };
            delta7[k] = if ro.u7[k] > 0.0 { gh * params.theta5[dim + k] } else { 0.0 };
        }
        outer_acc(&mut g.theta6, &delta6, &ro.pool);
        outer_acc(&mut g.theta7, &delta7, emb.final_embedding(s.action));

        // Gradient w.r.t. final embeddings: the pooled path reaches every
        // node, the per-node path only the readout node.
        let mut common = vec![0.0; dim];
        let mut extra = vec![0.0; dim];
        matvec_t(&params.theta6, dim, dim, &delta6, &mut common);
        matvec_t(&params.theta7, dim, dim, &delta7, &mut extra);
        let mut g_emb = vec![0.0; n * dim];
        for v in 0..n {
            g_emb[v * dim..(v + 1) * dim].copy_from_slice(&common);
        }
        for (ge, e) in g_emb[s.action * dim..(s.action + 1) * dim]
            .iter_mut()
            .zip(&extra)
        {
            *ge += e;
        }

        // Walk the recursion backwards; q accumulates dL/d(edge term).
        let mut q = vec![0.0; n * dim];
        let mut delta_z = vec![0.0; n * dim];
        let mut s_prev = vec![0.0; dim];
        let mut buf = vec![0.0; dim];
        let mut edge_vec = vec![0.0; dim];
        for t in (0..EMBED_ITERATIONS).rev() {
            let next = emb.level(t + 1);
            let cur = emb.level(t);
            for (dz, (ge, h)) in delta_z.iter_mut().zip(g_emb.iter().zip(next)) {
                *dz = if *h > 0.0 { *ge } else { 0.0 };
            }
            s_prev.fill(0.0);
            for chunk in cur.chunks_exact(dim) {
                for (sp, h) in s_prev.iter_mut().zip(chunk) {
                    *sp += h;
                }
            }
            for v in 0..n {
                let dz = &delta_z[v * dim..(v + 1) * dim];
                outer_acc(&mut g.theta1, dz, emb.node_features_row(v));
                let h_v = &cur[v * dim..(v + 1) * dim];
                for ((b, sp), h) in buf.iter_mut().zip(&s_prev).zip(h_v) {
                    *b = sp - h;
                }
                outer_acc(&mut g.theta2, dz, &buf);
                for (e, r) in edge_vec.iter_mut().zip(&relu4) {
                    *e = r * emb.weight_rowsum[v];
                }
                outer_acc(&mut g.theta3, dz, &edge_vec);
                matvec_t(&params.theta3, dim, dim, dz, &mut buf);
                for (qv, b) in q[v * dim..(v + 1) * dim].iter_mut().zip(&buf) {
                    *qv += b;
                }
            }
            if t > 0 {
                // dL/dH(t, u) = theta2^T (sum_v delta_z(v) - delta_z(u)).
                let mut delta_sum = vec![0.0; dim];
                for chunk in delta_z.chunks_exact(dim) {
                    for (d, z) in delta_sum.iter_mut().zip(chunk) {
                        *d += z;
                    }
                }
                let mut mixed_sum = vec![0.0; dim];
                matvec_t(&params.theta2, dim, dim, &delta_sum, &mut mixed_sum);
                for v in 0..n {
                    matvec_t(
                        &params.theta2,
                        dim,
                        dim,
                        &delta_z[v * dim..(v + 1) * dim],
                        &mut buf,
                    );
                    for ((ge, ms), b) in g_emb[v * dim..(v + 1) * dim]
                        .iter_mut()
                        .zip(&mixed_sum)
                        .zip(&buf)
                    {
                        *ge = ms - b;
                    }
                }
            }
        }
        // Edge-weight lift: e_v[k] = relu(theta4[k]) * rowsum_v.
        for k in 0..dim {
            if params.theta4[k] > 0.0 {
                let mut acc = 0.0;
                for v in 0..n {
                    acc += q[v * dim + k] * emb.weight_rowsum[v];
                }
                g.theta4[k] += acc;
            }
        }
    }

    // L2 term: d/dTheta of l2 * ||Theta||^2.
    for (gb, pb) in g.blocks_mut().into_iter().zip(params.blocks()) {
        for (gw, pw) in gb.iter_mut().zip(pb) {
            *gw += 2.0 * l2 * pw;
        }
    }
    Ok(g)
}
