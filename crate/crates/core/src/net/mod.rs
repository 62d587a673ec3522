//! Graph-embedding value network.
//!
//! Nodes are featurized into 9-dimensional vectors, embedded by a T=4
//! message-passing recursion over the complete graph, and pooled into a
//! scalar completion estimate `h(v)`. Training is plain squared-error
//! regression with L2 regularization, exact hand-derived gradients, and
//! Adam updates — no autodiff framework.
//!
//! All lengths inside the network (features, rewards, h) are normalized by
//! `coord_scale * sqrt(2)` so targets stay O(n) across the 10^6 coordinate
//! range; callers rescale at the search boundary.

mod adam;
mod checkpoint;
mod features;
mod forward;
mod grad;
mod linalg;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint,
};
pub use features::{node_features, FEATURE_DIM};
pub use forward::{embed_forward, value_h, EmbeddingState};
pub use grad::{activation_signature, grad, loss, loss_with_signature, sample_value, TrainSample};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Embedding width `l` (= readout width `p`).
pub const DEFAULT_EMBED_DIM: usize = 64;

/// Number of embedding iterations `T`.
pub const EMBED_ITERATIONS: usize = 4;

/// Half-width of the uniform weight initialization.
pub const INIT_RANGE: f64 = 0.08;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad checkpoint: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The seven parameter blocks of the value network.
///
/// With embedding width `l`: `theta1` is `l x 9` (feature lift), `theta2`
/// and `theta3` are `l x l` (neighbor-embedding and edge-term mixing),
/// `theta4` has length `l` (edge-weight lift), `theta5` has length `2l`
/// (readout weights), `theta6` and `theta7` are `l x l` (pooled-graph and
/// per-node readout projections). Matrices are stored row-major. The same
/// struct doubles as the congruent gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingParams {
    dim: usize,
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    pub theta3: Vec<f64>,
    pub theta4: Vec<f64>,
    pub theta5: Vec<f64>,
    pub theta6: Vec<f64>,
    pub theta7: Vec<f64>,
}

impl EmbeddingParams {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "embedding width must be positive");
        Self {
            dim,
            theta1: vec![0.0; dim * FEATURE_DIM],
            theta2: vec![0.0; dim * dim],
            theta3: vec![0.0; dim * dim],
            theta4: vec![0.0; dim],
            theta5: vec![0.0; 2 * dim],
            theta6: vec![0.0; dim * dim],
            theta7: vec![0.0; dim * dim],
        }
    }

    /// Random initialization: every entry i.i.d. uniform in
    /// `[-INIT_RANGE, INIT_RANGE]`, deterministic per seed (ChaCha8).
    pub fn init(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Self::zeros(dim);
        for block in p.blocks_mut() {
            for w in block {
                *w = rng.random_range(-INIT_RANGE..INIT_RANGE);
            }
        }
        p
    }

    /// Paper-sized network (l = p = 64).
    pub fn init_default(seed: u64) -> Self {
        Self::init(DEFAULT_EMBED_DIM, seed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of scalar parameters.
    pub fn flat_len(&self) -> usize {
        4 * self.dim * self.dim + 12 * self.dim
    }

    /// Blocks in declaration order (theta1..theta7).
    pub fn blocks(&self) -> [&[f64]; 7] {
        [
            &self.theta1,
            &self.theta2,
            &self.theta3,
            &self.theta4,
            &self.theta5,
            &self.theta6,
            &self.theta7,
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut [f64]; 7] {
        [
            &mut self.theta1,
            &mut self.theta2,
            &mut self.theta3,
            &mut self.theta4,
            &mut self.theta5,
            &mut self.theta6,
            &mut self.theta7,
        ]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dim == other.dim
    }

    /// Read one scalar by flat index (blocks concatenated in order).
    pub fn get_flat(&self, mut idx: usize) -> f64 {
        for block in self.blocks() {
            if idx < block.len() {
                return block[idx];
            }
            idx -= block.len();
        }
        panic!("flat index out of range");
    }

    /// Write one scalar by flat index.
    pub fn set_flat(&mut self, mut idx: usize, value: f64) {
        for block in self.blocks_mut() {
            if idx < block.len() {
                block[idx] = value;
                return;
            }
            idx -= block.len();
        }
        panic!("flat index out of range");
    }

    /// Squared Frobenius norm over all blocks.
    pub fn sq_norm(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|b| b.iter())
            .map(|w| w * w)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|w| w.is_finite()))
    }

    /// Plain-text dump, one block per theta, for debugging.
    pub fn dump_text(&self) -> String {
        use std::fmt::Write as _;
        let shapes: [(&str, usize, usize); 7] = [
            ("theta1", self.dim, FEATURE_DIM),
            ("theta2", self.dim, self.dim),
            ("theta3", self.dim, self.dim),
            ("theta4", 1, self.dim),
            ("theta5", 1, 2 * self.dim),
            ("theta6", self.dim, self.dim),
            ("theta7", self.dim, self.dim),
        ];
        let mut out = String::new();
        for ((name, rows, cols), block) in shapes.iter().zip(self.blocks()) {
            let _ = writeln!(out, "{name} {rows}x{cols}");
            for r in 0..*rows {
                let row = &block[r * cols..(r + 1) * cols];
                let line = row.iter().map(|w| format!("{w:.6e}")).collect::<Vec<_>>();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        out
    }
}
