//! Adam updates over the flattened parameter blocks.

use super::{EmbeddingParams, NetError};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// First/second moment accumulators, one per parameter entry, plus the
/// step counter used for bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }

    pub fn for_params(params: &EmbeddingParams) -> Self {
        Self::new(params.flat_len())
    }
}

/// One bias-corrected Adam step in place.
pub fn adam_step(
    params: &mut EmbeddingParams,
    state: &mut AdamState,
    grads: &EmbeddingParams,
    lr: f64,
) -> Result<(), NetError> {
    if !params.same_shape(grads) {
        return Err(NetError::DimensionMismatch(format!(
            "params dim {} vs grads dim {}",
            params.dim(),
            grads.dim()
        )));
    }
    if state.m.len() != params.flat_len() {
        return Err(NetError::DimensionMismatch(format!(
            "adam state len {} vs params len {}",
            state.m.len(),
            params.flat_len()
        )));
    }
    state.step += 1;
    let bc1 = 1.0 - ADAM_BETA1.powi(state.step as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(state.step as i32);
    let mut cursor = 0;
    for (pb, gb) in params.blocks_mut().into_iter().zip(grads.blocks()) {
        for (p, g) in pb.iter_mut().zip(gb) {
            let m = &mut state.m[cursor];
            let v = &mut state.v[cursor];
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
            cursor += 1;
        }
    }
    Ok(())
}
