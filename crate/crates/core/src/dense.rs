//! Small dense kernels used by the standard Monte Carlo paths.

use ndarray::ArrayView2;

/// `out = x · A` for a row vector `x` (length `s`) and an `s × t` matrix.
///
/// Accumulates row by row (`out += x_j · A[j, :]`), which streams `A` once in
/// memory order. This is the per-sample `O(s·t)` product of standard MC.
pub fn vecmat_into(x: &[f64], a: ArrayView2<'_, f64>, out: &mut [f64]) {
    assert_eq!(x.len(), a.nrows());
    assert_eq!(out.len(), a.ncols());
    out.fill(0.0);
    match a.as_slice() {
        Some(data) => {
            let t = a.ncols();
            for (&xj, row) in x.iter().zip(data.chunks_exact(t.max(1))) {
                if xj == 0.0 {
                    continue;
                }
                for (o, &v) in out.iter_mut().zip(row) {
                    *o += xj * v;
                }
            }
        }
        None => {
            for (j, &xj) in x.iter().enumerate() {
                for (o, &v) in out.iter_mut().zip(a.row(j)) {
                    *o += xj * v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn contiguous_and_strided_agree() {
        let a = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
        let mut out = vec![0.0; 3];
        vecmat_into(&[1.0, -1.0], a.view(), &mut out);
        assert_eq!(out, vec![-3.0, -3.0, -3.0]);

        let mut out2 = vec![0.0; 2];
        vecmat_into(&[1.0, 1.0, 1.0], a.t(), &mut out2);
        assert_eq!(out2, vec![6.0, 15.0]);
    }
}
