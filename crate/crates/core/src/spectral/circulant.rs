use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::fft::{dft, idft};
use super::DenseMatrix;
use crate::{Error, Result};

/// Largest dimension [`CirculantMatrix::to_dense`] will materialise.
pub const DENSE_LIMIT: usize = 4096;

/// An `n x n` circulant matrix held by its first column, with the DFT of
/// that column (its eigenvalues) computed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantMatrix {
    first_column: Vec<Complex64>,
    spectrum: Vec<Complex64>,
}

impl CirculantMatrix {
    pub fn from_first_column(first_column: Vec<Complex64>) -> Result<Self> {
        if first_column.is_empty() {
            return Err(Error::EmptyDimension);
        }
        let spectrum = dft(&first_column);
        Ok(Self {
            first_column,
            spectrum,
        })
    }

    /// Circulant whose eigenvalues are `spectrum`; the first column is its
    /// inverse DFT.
    pub fn from_spectrum(spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.is_empty() {
            return Err(Error::EmptyDimension);
        }
        let first_column = idft(&spectrum);
        Ok(Self {
            first_column,
            spectrum,
        })
    }

    /// Zero-pads an impulse response to length `n`.
    pub fn from_taps(taps: &[Complex64], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        if taps.len() > n {
            return Err(Error::TooManyTaps {
                taps: taps.len(),
                n,
            });
        }
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        column[..taps.len()].copy_from_slice(taps);
        Self::from_first_column(column)
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        column[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            first_column: column,
            spectrum: vec![Complex64::new(1.0, 0.0); n],
        })
    }

    pub fn n(&self) -> usize {
        self.first_column.len()
    }

    pub fn first_column(&self) -> &[Complex64] {
        &self.first_column
    }

    /// Eigenvalues, i.e. the N-point DFT of the first column.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// `|lambda_i|^2`: the eigenvalues of `C C^H`.
    pub fn gram_spectrum(&self) -> Vec<f64> {
        self.spectrum.iter().map(|l| l.norm_sqr()).collect()
    }

    /// Total energy of the first column, `tr(C^H C) / n`.
    pub fn column_energy(&self) -> f64 {
        self.first_column.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Conjugate transpose. The first column is `conj(c[-k mod n])` and the
    /// spectrum is conjugated.
    pub fn hermitian(&self) -> Self {
        let n = self.n();
        let first_column = (0..n)
            .map(|k| self.first_column[(n - k) % n].conj())
            .collect();
        let spectrum = self.spectrum.iter().map(|l| l.conj()).collect();
        Self {
            first_column,
            spectrum,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            first_column: self.first_column.iter().map(|x| x * factor).collect(),
            spectrum: self.spectrum.iter().map(|x| x * factor).collect(),
        }
    }

    /// Product `self * rhs`; circulants commute so the order only matters
    /// for round-off.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs.n())?;
        let spectrum: Vec<Complex64> = self
            .spectrum
            .iter()
            .zip(&rhs.spectrum)
            .map(|(a, b)| a * b)
            .collect();
        Self::from_spectrum(spectrum)
    }

    /// Element-wise sum.
    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs.n())?;
        Ok(Self {
            first_column: self
                .first_column
                .iter()
                .zip(&rhs.first_column)
                .map(|(a, b)| a + b)
                .collect(),
            spectrum: self
                .spectrum
                .iter()
                .zip(&rhs.spectrum)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Matrix-vector product through the spectrum (circular convolution).
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_dim(x.len())?;
        let mut xf = dft(x);
        for (v, l) in xf.iter_mut().zip(&self.spectrum) {
            *v *= l;
        }
        Ok(idft(&xf))
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let n = self.n();
        if n > DENSE_LIMIT {
            return Err(Error::DenseTooLarge {
                n,
                limit: DENSE_LIMIT,
            });
        }
        DenseMatrix::from_fn(n, n, |r, c| self.first_column[(r + n - c) % n])
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if other != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: other,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_column(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed.wrapping_mul(0x2545_F491_4F6C_DD1D) | 1;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| c(next(), next())).collect()
    }

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let h = CirculantMatrix::from_taps(&[c(1.0, 0.0)], 4).unwrap();
        assert_eq!(h.first_column(), &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        assert!(max_err(h.eigenvalues(), &[c(1.0, 0.0); 4]) < 1e-15);
    }

    #[test]
    fn two_tap_spectrum() {
        let h = CirculantMatrix::from_taps(&[c(1., 0.), c(1., 0.)], 4).unwrap();
        let expected = [c(2., 0.), c(1., -1.), c(0., 0.), c(1., 1.)];
        assert!(max_err(h.eigenvalues(), &expected) < 1e-15);
    }

    #[test]
    fn long_channel_in_large_block() {
        let taps = random_column(130, 3);
        let h = CirculantMatrix::from_taps(&taps, 2048).unwrap();
        assert_eq!(h.eigenvalues().len(), 2048);
    }

    #[test]
    fn too_many_taps() {
        let err = CirculantMatrix::from_taps(&[c(1., 0.); 5], 4).unwrap_err();
        assert_eq!(err, Error::TooManyTaps { taps: 5, n: 4 });
    }

    #[test]
    fn dense_layout() {
        let (a, b) = (c(1., 0.), c(2., 0.));
        let z = c(0., 0.);
        let d = CirculantMatrix::from_first_column(vec![a, b, z])
            .unwrap()
            .to_dense()
            .unwrap();
        let expected = [a, z, b, b, a, z, z, b, a];
        assert_eq!(d.as_row_major(), &expected);

        let one = CirculantMatrix::from_first_column(vec![c(3., 1.)]).unwrap();
        assert_eq!(one.to_dense().unwrap().as_row_major(), &[c(3., 1.)]);
    }

    #[test]
    fn dense_guard() {
        let big = CirculantMatrix::identity(DENSE_LIMIT + 1).unwrap();
        assert!(matches!(big.to_dense(), Err(Error::DenseTooLarge { .. })));
    }

    #[test]
    fn fourier_vectors_are_eigenvectors() {
        // C v_k = lambda_k v_k with v_k[t] = exp(j 2 pi k t / n)
        let n = 8;
        let h = CirculantMatrix::from_first_column(random_column(n, 11)).unwrap();
        let dense = h.to_dense().unwrap();
        for k in 0..n {
            let v: Vec<Complex64> = (0..n)
                .map(|t| {
                    let th = 2.0 * core::f64::consts::PI * (k * t) as f64 / n as f64;
                    c(th.cos(), th.sin())
                })
                .collect();
            let cv = dense.matvec(&v).unwrap();
            let lv: Vec<Complex64> = v.iter().map(|x| x * h.eigenvalues()[k]).collect();
            assert!(max_err(&cv, &lv) < 1e-12);
        }
    }

    #[test]
    fn identity_is_neutral() {
        let a = CirculantMatrix::from_first_column(random_column(8, 5)).unwrap();
        let i = CirculantMatrix::identity(8).unwrap();
        let p = a.mul(&i).unwrap();
        assert!(max_err(p.first_column(), a.first_column()) < 1e-15);
    }

    #[test]
    fn product_matches_dense() {
        let a = CirculantMatrix::from_first_column(random_column(8, 1)).unwrap();
        let b = CirculantMatrix::from_first_column(random_column(8, 2)).unwrap();
        let fast = a.mul(&b).unwrap().to_dense().unwrap();
        let slow = a.to_dense().unwrap().matmul(&b.to_dense().unwrap()).unwrap();
        assert!(fast.max_abs_diff(&slow).unwrap() < 1e-9);
    }

    #[test]
    fn mismatched_product() {
        let a = CirculantMatrix::identity(4).unwrap();
        let b = CirculantMatrix::identity(8).unwrap();
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hermitian_matches_dense_adjoint() {
        let a = CirculantMatrix::from_first_column(random_column(7, 9)).unwrap();
        let h = a.hermitian();
        let diff = h
            .to_dense()
            .unwrap()
            .max_abs_diff(&a.to_dense().unwrap().adjoint())
            .unwrap();
        assert!(diff < 1e-15);
        let rebuilt = CirculantMatrix::from_first_column(h.first_column().to_vec()).unwrap();
        assert!(max_err(rebuilt.eigenvalues(), h.eigenvalues()) < 1e-12);
    }

    #[test]
    fn apply_matches_dense() {
        let a = CirculantMatrix::from_first_column(random_column(12, 4)).unwrap();
        let x = random_column(12, 5);
        let fast = a.apply(&x).unwrap();
        let slow = a.to_dense().unwrap().matvec(&x).unwrap();
        assert!(max_err(&fast, &slow) < 1e-12);
    }

    proptest! {
        #[test]
        fn product_commutes(n in 1usize..40, s1 in any::<u64>(), s2 in any::<u64>()) {
            let a = CirculantMatrix::from_first_column(random_column(n, s1)).unwrap();
            let b = CirculantMatrix::from_first_column(random_column(n, s2)).unwrap();
            let ab = a.mul(&b).unwrap();
            let ba = b.mul(&a).unwrap();
            prop_assert!(max_err(ab.first_column(), ba.first_column()) < 1e-12);
        }

        #[test]
        fn gram_eigenvalues_are_squared_magnitudes(n in 1usize..64, s in any::<u64>()) {
            let h = CirculantMatrix::from_first_column(random_column(n, s)).unwrap();
            let a = h.mul(&h.hermitian()).unwrap();
            for (l, g) in a.eigenvalues().iter().zip(h.gram_spectrum()) {
                prop_assert!((l - c(g, 0.0)).norm() < 1e-12);
            }
        }

        #[test]
        fn cached_spectrum_is_dft(n in 1usize..64, s in any::<u64>()) {
            let h = CirculantMatrix::from_spectrum(random_column(n, s)).unwrap();
            let again = dft(h.first_column());
            prop_assert!(max_err(&again, h.eigenvalues()) < 1e-12);
        }
    }
}
