//! Node featurization.
//!
//! Each node is described by 9 scalars capturing its traversal state, its
//! normalized position, its relation to the first and last nodes of the
//! traversed path, and its typical edge weight:
//!
//! ```text
//! [0] traversed flag (0/1)
//! [1] x / coord_scale
//! [2] y / coord_scale
//! [3] is-first-in-path flag (0/1)
//! [4] is-last-in-path flag (0/1)
//! [5] w(v, first) / (coord_scale * sqrt(2))
//! [6] w(v, last)  / (coord_scale * sqrt(2))
//! [7] mean edge weight from v to all other nodes, normalized
//! [8] constant 1 bias
//! ```

use crate::instance::PathState;

/// Length of a node feature vector.
pub const FEATURE_DIM: usize = 9;

/// Compute the 9-dimensional feature vector of node `v` in `state`.
pub fn node_features(state: &PathState<'_>, v: usize) -> [f64; FEATURE_DIM] {
    let inst = state.instance();
    let n = inst.n();
    assert!(v < n, "city index {v} out of range (n={n})");
    let p = inst.point(v);
    let unit = inst.length_unit();
    let row_mean =
        inst.weight_row(v).iter().sum::<f64>() / (n - 1) as f64 / unit;
    [
        if state.contains(v) { 1.0 } else { 0.0 },
        p.x / inst.coord_scale(),
        p.y / inst.coord_scale(),
        if v == state.first() { 1.0 } else { 0.0 },
        if v == state.last() { 1.0 } else { 0.0 },
        inst.norm_weight(v, state.first()),
        inst.norm_weight(v, state.last()),
        row_mean,
        1.0,
    ]
}
