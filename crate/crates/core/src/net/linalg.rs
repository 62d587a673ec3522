//! Minimal dense kernels for the fixed-shape network math.

/// out = mat * x, with `mat` row-major rows x cols.
#[inline]
pub(crate) fn matvec(mat: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(mat.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    debug_assert_eq!(out.len(), rows);
    for (r, o) in out.iter_mut().enumerate() {
        let row = &mat[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for (m, v) in row.iter().zip(x) {
            acc += m * v;
        }
        *o = acc;
    }
}

/// out = mat^T * x, with `mat` row-major rows x cols (so out has len cols).
#[inline]
pub(crate) fn matvec_t(mat: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(mat.len(), rows * cols);
    debug_assert_eq!(x.len(), rows);
    debug_assert_eq!(out.len(), cols);
    out.fill(0.0);
    for (r, &xv) in x.iter().enumerate() {
        let row = &mat[r * cols..(r + 1) * cols];
        for (o, m) in out.iter_mut().zip(row) {
            *o += m * xv;
        }
    }
}

/// acc += a (x) b, accumulating a rank-1 update into a rows x cols matrix.
#[inline]
pub(crate) fn outer_acc(acc: &mut [f64], a: &[f64], b: &[f64]) {
    debug_assert_eq!(acc.len(), a.len() * b.len());
    let cols = b.len();
    for (r, &av) in a.iter().enumerate() {
        if av == 0.0 {
            continue;
        }
        let row = &mut acc[r * cols..(r + 1) * cols];
        for (o, &bv) in row.iter_mut().zip(b) {
            *o += av * bv;
        }
    }
}
