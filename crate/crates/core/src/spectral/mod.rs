//! Circulant-matrix algebra on top of the DFT.
//!
//! A circulant is diagonalised by the DFT matrix and its eigenvalues are the
//! DFT of its first column, so products, adjoints and log-determinants all
//! reduce to element-wise work on spectra.

mod circulant;
mod dense;
pub mod fft;

pub use circulant::{CirculantMatrix, DENSE_LIMIT};
pub use dense::DenseMatrix;
pub use fft::{dft, idft, FftPlan};

use crate::{Error, Result};

/// Round-off allowance for nominally non-negative eigenvalues.
pub const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-12;

/// `log2(1 + x)`, accurate for small `x`.
#[inline]
pub fn log2_1p(x: f64) -> f64 {
    libm::log1p(x) * core::f64::consts::LOG2_E
}

/// `log2 det(I + scale * A)` for a Hermitian PSD matrix `A` given by its
/// eigenvalues, i.e. `sum_i log2(1 + scale * lambda_i)` in bits.
///
/// Eigenvalues in `[-1e-12, 0)` are treated as zero.
pub fn log2det_identity_plus_scaled_gram(gram_spectrum: &[f64], scale: f64) -> Result<f64> {
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter {
            name: "scale",
            reason: "must be finite and non-negative",
        });
    }
    let mut acc = 0.0;
    for (index, &value) in gram_spectrum.iter().enumerate() {
        if value < -NEGATIVE_EIGENVALUE_TOLERANCE || value.is_nan() {
            return Err(Error::NegativeEigenvalue { index, value });
        }
        acc += log2_1p(scale * value.max(0.0));
    }
    Ok(acc)
}
