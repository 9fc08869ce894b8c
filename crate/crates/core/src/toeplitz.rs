//! Implicit Toeplitz operators with FFT-based products.
//!
//! An operator is defined by a generating sequence `g` of length `N + s - 1`
//! and represents the `N × s` matrix whose row `n` (0-based) is the sliding
//! window `(g[n+s-1], g[n+s-2], ..., g[n])`. The matrix is never stored.
//!
//! Products are computed by embedding the operator into a circulant of length
//! `P`, the smallest power of two `>= N + s - 1`. With that padding the cyclic
//! convolution of `g` with a zero-padded column of length `s` has no
//! wrap-around in the entries `s-1 .. N+s-1`, which are exactly the rows of
//! the product.

use std::cell::RefCell;
use std::sync::Arc;

use ndarray::{s, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, TmcError};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan_pair(len: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(len), p.plan_fft_inverse(len))
    })
}

/// The `rows × cols` Toeplitz matrix built from one scalar sample stream.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzOperator {
    generating: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl ToeplitzOperator {
    pub fn new(generating: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(TmcError::InvalidArgument(format!(
                "Toeplitz operator needs rows, cols >= 1 (got {rows} x {cols})"
            )));
        }
        let needed = rows + cols - 1;
        if generating.len() != needed {
            return Err(TmcError::DimensionMismatch {
                expected: needed,
                got: generating.len(),
            });
        }
        Ok(Self { generating, rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn generating(&self) -> &[f64] {
        &self.generating
    }

    /// Entry `(n, j)`, both 0-based.
    #[inline]
    pub fn entry(&self, n: usize, j: usize) -> f64 {
        self.generating[n + self.cols - 1 - j]
    }

    /// Row `n` written out: `(g[n+s-1], ..., g[n])`.
    pub fn row(&self, n: usize) -> Vec<f64> {
        self.generating[n..n + self.cols].iter().rev().copied().collect()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.rows, self.cols), |(n, j)| self.entry(n, j))
    }

    /// Precomputes the circulant embedding used by the fast products.
    pub fn plan(&self) -> CirculantPlan {
        CirculantPlan::new(self)
    }

    /// Reference product `X a` by direct summation.
    pub fn naive_matvec(&self, a: &[f64]) -> Result<Vec<f64>> {
        self.check_len(a.len())?;
        Ok((0..self.rows)
            .map(|n| {
                let window = &self.generating[n..n + self.cols];
                window.iter().rev().zip(a).map(|(x, c)| x * c).sum::<f64>()
            })
            .collect())
    }

    /// Reference product `X A` by direct summation.
    pub fn naive_matmat(&self, a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_len(a.nrows())?;
        let mut out = Array2::zeros((self.rows, a.ncols()));
        for n in 0..self.rows {
            let mut row = out.row_mut(n);
            for j in 0..self.cols {
                let x = self.entry(n, j);
                row.scaled_add(x, &a.row(j));
            }
        }
        Ok(out)
    }

    pub fn fast_matvec(&self, a: &[f64]) -> Result<Vec<f64>> {
        self.check_len(a.len())?;
        Ok(self.plan().apply(a))
    }

    /// `X A` for an `s × t` matrix `A`, sharing one circulant plan over all
    /// columns.
    pub fn fast_matmat(&self, a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_len(a.nrows())?;
        Ok(self.plan().apply_columns(a))
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.cols {
            return Err(TmcError::DimensionMismatch {
                expected: self.cols,
                got,
            });
        }
        Ok(())
    }
}

/// Builds the `n × s` operator from the first `n + s - 1` values of a stream.
pub fn build_operator(stream: impl AsRef<[f64]>, n: usize, s: usize) -> Result<ToeplitzOperator> {
    let values = stream.as_ref();
    if n == 0 || s == 0 {
        return Err(TmcError::InvalidArgument(format!(
            "Toeplitz operator needs N, s >= 1 (got N={n}, s={s})"
        )));
    }
    let needed = n + s - 1;
    if values.len() < needed {
        return Err(TmcError::InsufficientStream {
            needed,
            available: values.len(),
        });
    }
    ToeplitzOperator::new(values[..needed].to_vec(), n, s)
}

/// Circulant embedding of a [`ToeplitzOperator`].
///
/// `spectrum` is the DFT of the generating sequence zero-padded to `len`.
#[derive(Clone)]
pub struct CirculantPlan {
    len: usize,
    rows: usize,
    cols: usize,
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantPlan")
            .field("len", &self.len)
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish_non_exhaustive()
    }
}

impl CirculantPlan {
    pub fn new(op: &ToeplitzOperator) -> Self {
        let len = (op.rows + op.cols - 1).next_power_of_two();
        let (forward, inverse) = plan_pair(len);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); len];
        for (slot, &g) in spectrum.iter_mut().zip(&op.generating) {
            slot.re = g;
        }
        forward.process(&mut spectrum);
        Self {
            len,
            rows: op.rows,
            cols: op.cols,
            spectrum,
            forward,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// Cyclic convolution of the generator with `buf[..cols]` (rest zero),
    /// in place. Output row `n` ends up at `buf[n + cols - 1] * len`.
    fn convolve(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
        for (b, h) in buf.iter_mut().zip(&self.spectrum) {
            *b *= h;
        }
        self.inverse.process_with_scratch(buf, scratch);
    }

    fn scratch(&self) -> Vec<Complex64> {
        let n = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        vec![Complex64::new(0.0, 0.0); n]
    }

    /// Panics if `a.len() != cols`; the public entry points check first.
    fn apply(&self, a: &[f64]) -> Vec<f64> {
        assert_eq!(a.len(), self.cols);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        let mut scratch = self.scratch();
        for (slot, &v) in buf.iter_mut().zip(a) {
            slot.re = v;
        }
        self.convolve(&mut buf, &mut scratch);
        let norm = 1.0 / self.len as f64;
        buf[self.cols - 1..self.cols - 1 + self.rows]
            .iter()
            .map(|z| z.re * norm)
            .collect()
    }

    /// Applies the operator to every column of `a`.
    ///
    /// The generator is real, so two real columns are packed into the real and
    /// imaginary parts of one complex transform. Each column is scaled to unit
    /// max-norm first so a large column cannot swamp its partner's roundoff.
    fn apply_columns(&self, a: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(a.nrows(), self.cols);
        let t = a.ncols();
        let mut out = Array2::zeros((self.rows, t));
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        let mut scratch = self.scratch();
        let norm = 1.0 / self.len as f64;
        let col_scale = |c: usize| {
            let m = a.column(c).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if m > 0.0 {
                m
            } else {
                1.0
            }
        };

        let mut c = 0;
        while c < t {
            let paired = c + 1 < t;
            let s0 = col_scale(c);
            let s1 = if paired { col_scale(c + 1) } else { 1.0 };
            buf.fill(Complex64::new(0.0, 0.0));
            for j in 0..self.cols {
                buf[j].re = a[[j, c]] / s0;
                if paired {
                    buf[j].im = a[[j, c + 1]] / s1;
                }
            }
            self.convolve(&mut buf, &mut scratch);
            let rows = &buf[self.cols - 1..self.cols - 1 + self.rows];
            for (n, z) in rows.iter().enumerate() {
                out[[n, c]] = z.re * norm * s0;
                if paired {
                    out[[n, c + 1]] = z.im * norm * s1;
                }
            }
            c += 2;
        }
        out
    }
}

/// Row-blocked product for `N = L·s`: block `ℓ` is the `s × s` Toeplitz
/// slice built from `g[ℓs .. ℓs + 2s - 1]`, and blocks are processed in
/// parallel on the current rayon pool.
pub fn block_matmat(stream: impl AsRef<[f64]>, blocks: usize, s: usize, a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if blocks == 0 {
        return Err(TmcError::InvalidArgument("block count must be >= 1".into()));
    }
    blocked_matmat(stream, blocks * s, s, a)
}

/// Like [`block_matmat`] but for any `n >= 1`; when `s` does not divide `n`
/// the last block is a shorter Toeplitz slice.
///
/// Every block uses the same embedding length, so the result does not depend
/// on how many workers the pool has.
pub fn blocked_matmat(stream: impl AsRef<[f64]>, n: usize, s: usize, a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let values = stream.as_ref();
    if n == 0 || s == 0 {
        return Err(TmcError::InvalidArgument(format!(
            "blocked product needs N, s >= 1 (got N={n}, s={s})"
        )));
    }
    if a.nrows() != s {
        return Err(TmcError::DimensionMismatch {
            expected: s,
            got: a.nrows(),
        });
    }
    let needed = n + s - 1;
    if values.len() < needed {
        return Err(TmcError::InsufficientStream {
            needed,
            available: values.len(),
        });
    }

    let starts: Vec<usize> = (0..n).step_by(s).collect();
    let parts: Vec<Array2<f64>> = starts
        .par_iter()
        .map(|&start| {
            let rows = s.min(n - start);
            let op = ToeplitzOperator::new(values[start..start + rows + s - 1].to_vec(), rows, s)
                .expect("block slice has the right length");
            op.plan().apply_columns(a)
        })
        .collect();

    let mut out = Array2::zeros((n, a.ncols()));
    for (&start, part) in starts.iter().zip(&parts) {
        out.slice_mut(s![start..start + part.nrows(), ..]).assign(part);
    }
    debug_assert_eq!(out.len_of(Axis(0)), n);
    Ok(out)
}
