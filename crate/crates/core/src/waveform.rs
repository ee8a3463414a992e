//! Zadoff-Chu spreading, cyclic prefix and the despread link model.
//!
//! Column `k` of the spreading matrix `Z` is the root sequence cyclically
//! shifted down by `k` and scaled by `1/sqrt(N)`. `Z` is therefore a unitary
//! circulant, and despreading a block that went through a circulant channel
//! `H` gives back `H s` plus white noise of unchanged variance.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::spectral::fft::unit_phasor;
use crate::spectral::{CirculantMatrix, DenseMatrix};
use crate::{Error, Result};

pub const DEFAULT_ROOT_INDEX: u64 = 1;
pub const DEFAULT_CP_LENGTH: usize = 130;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Unit-modulus Zadoff-Chu root sequence of length `n` and root `u`.
///
/// Even `n` uses `exp(-j pi u k^2 / n)`, odd `n` uses
/// `exp(-j pi u k (k + 1) / n)`.
pub fn zc_root(n: usize, u: u64) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    if gcd(u, n as u64) != 1 {
        return Err(Error::InvalidRoot { u, n });
    }
    let den = n as u128;
    let u = u as u128;
    Ok((0..n as u128)
        .map(|k| {
            let quad = if n % 2 == 0 { k * k } else { k * (k + 1) };
            unit_phasor((u % (2 * den)) * (quad % (2 * den)), den)
        })
        .collect())
}

/// The spreading matrix `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZcMatrix {
    root_sequence: Vec<Complex64>,
    root_index: u64,
    circulant: CirculantMatrix,
}

impl ZcMatrix {
    pub fn new(n: usize, root_index: u64) -> Result<Self> {
        let root_sequence = zc_root(n, root_index)?;
        let norm = 1.0 / libm::sqrt(n as f64);
        let column = root_sequence.iter().map(|x| x * norm).collect();
        Ok(Self {
            root_sequence,
            root_index,
            circulant: CirculantMatrix::from_first_column(column)?,
        })
    }

    pub fn with_default_root(n: usize) -> Result<Self> {
        Self::new(n, DEFAULT_ROOT_INDEX)
    }

    pub fn n(&self) -> usize {
        self.root_sequence.len()
    }

    pub fn root_index(&self) -> u64 {
        self.root_index
    }

    /// Unnormalised root sequence.
    pub fn root_sequence(&self) -> &[Complex64] {
        &self.root_sequence
    }

    /// `Z` as a circulant (first column is the normalised root).
    pub fn as_circulant(&self) -> &CirculantMatrix {
        &self.circulant
    }

    /// Column `k`: the normalised root shifted down by `k`.
    pub fn column(&self, k: usize) -> Vec<Complex64> {
        let n = self.n();
        let col = self.circulant.first_column();
        (0..n).map(|r| col[(r + n - k % n) % n]).collect()
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        self.circulant.to_dense()
    }

    /// `Z s`: every symbol rides its own cyclic shift, then all are summed.
    pub fn spread(&self, symbols: &[Complex64]) -> Result<Vec<Complex64>> {
        self.circulant.apply(symbols)
    }

    /// `Z^H y`.
    pub fn despread(&self, received: &[Complex64]) -> Result<Vec<Complex64>> {
        self.circulant.hermitian().apply(received)
    }
}

/// A payload block with its cyclic prefix prepended.
#[derive(Debug, Clone, PartialEq)]
pub struct CpBlock {
    payload: Vec<Complex64>,
    cp_length: usize,
    samples: Vec<Complex64>,
}

impl CpBlock {
    pub fn payload(&self) -> &[Complex64] {
        &self.payload
    }

    pub fn cp_length(&self) -> usize {
        self.cp_length
    }

    /// Prefix followed by payload, `N + cp_length` samples.
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
}

/// Copies the last `cp_length` payload samples in front of the payload.
pub fn add_cp(payload: &[Complex64], cp_length: usize) -> Result<CpBlock> {
    let n = payload.len();
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    if cp_length > n {
        return Err(Error::CpTooLong { cp_length, n });
    }
    let mut samples = Vec::with_capacity(n + cp_length);
    samples.extend_from_slice(&payload[n - cp_length..]);
    samples.extend_from_slice(payload);
    Ok(CpBlock {
        payload: payload.to_vec(),
        cp_length,
        samples,
    })
}

/// Drops the first `cp_length` samples and keeps the next `n`.
pub fn strip_cp(samples: &[Complex64], cp_length: usize, n: usize) -> Result<Vec<Complex64>> {
    if samples.len() < cp_length + n {
        return Err(Error::DimensionMismatch {
            expected: cp_length + n,
            actual: samples.len(),
        });
    }
    Ok(samples[cp_length..cp_length + n].to_vec())
}

/// Causal linear convolution with a tapped delay line, truncated to the
/// input length (samples spilling past the window are dropped).
pub fn tapped_delay_line(input: &[Complex64], taps: &[Complex64]) -> Vec<Complex64> {
    (0..input.len())
        .map(|t| {
            taps.iter()
                .enumerate()
                .take(t + 1)
                .map(|(k, &h)| h * input[t - k])
                .sum()
        })
        .collect()
}

/// Despread output of the block model: `Z^H (H Z s + v)`.
pub fn simulate_despread_rx(
    channel: &CirculantMatrix,
    z: &ZcMatrix,
    symbols: &[Complex64],
    noise: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = z.n();
    for len in [channel.n(), symbols.len(), noise.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    let mut received = channel.apply(&z.spread(symbols)?)?;
    for (r, v) in received.iter_mut().zip(noise) {
        *r += v;
    }
    z.despread(&received)
}

/// Sample-level transmit/receive chain: spread, add CP, filter through the
/// channel taps, add noise, strip CP, despread.
pub fn sample_level_rx(
    taps: &[Complex64],
    z: &ZcMatrix,
    symbols: &[Complex64],
    cp_length: usize,
    noise: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = z.n();
    if noise.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: noise.len(),
        });
    }
    if taps.len() > cp_length + 1 {
        return Err(Error::CpTooLong {
            cp_length: taps.len() - 1,
            n: cp_length,
        });
    }
    let block = add_cp(&z.spread(symbols)?, cp_length)?;
    let filtered = tapped_delay_line(block.samples(), taps);
    let mut payload = strip_cp(&filtered, cp_length, n)?;
    for (r, v) in payload.iter_mut().zip(noise) {
        *r += v;
    }
    z.despread(&payload)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| c(next(), next())).collect()
    }

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn unit(n: usize, k: usize) -> Vec<Complex64> {
        let mut e = vec![c(0., 0.); n];
        e[k] = c(1., 0.);
        e
    }

    /// `max |Z^H Z - I|` from the periodic autocorrelation of the root,
    /// which is all the distinct entries of `Z^H Z`.
    fn unitarity_error(z: &ZcMatrix) -> f64 {
        let root = z.root_sequence();
        let n = root.len();
        (0..n)
            .map(|lag| {
                let r: Complex64 = (0..n).map(|t| root[t].conj() * root[(t + lag) % n]).sum();
                let r = r / n as f64;
                let target = if lag == 0 { c(1., 0.) } else { c(0., 0.) };
                (r - target).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn trivial_root() {
        assert_eq!(zc_root(1, 1).unwrap(), vec![c(1., 0.)]);
    }

    #[test]
    fn length_four_root_by_hand() {
        let q = c((PI / 4.0).cos(), -(PI / 4.0).sin());
        let expected = [c(1., 0.), q, c(-1., 0.), q];
        assert!(max_err(&zc_root(4, 1).unwrap(), &expected) < 1e-15);
    }

    #[test]
    fn odd_length_formula() {
        let root = zc_root(7, 3).unwrap();
        for (k, v) in root.iter().enumerate() {
            let th = -PI * 3.0 * (k * (k + 1)) as f64 / 7.0;
            assert!((v - c(th.cos(), th.sin())).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_coprime_root() {
        assert_eq!(zc_root(8, 2), Err(Error::InvalidRoot { u: 2, n: 8 }));
        assert!(ZcMatrix::new(9, 3).is_err());
    }

    #[test]
    fn dense_unitarity_small() {
        let z = ZcMatrix::new(16, 1).unwrap();
        let d = z.to_dense().unwrap();
        let g = d.adjoint().matmul(&d).unwrap();
        let err = g.max_abs_diff(&DenseMatrix::identity(16).unwrap()).unwrap();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn unitarity_across_sizes() {
        for n in [16, 64, 128, 2048] {
            let z = ZcMatrix::with_default_root(n).unwrap();
            assert!(unitarity_error(&z) < 1e-10, "n={n}");
            for v in z.root_sequence() {
                assert!((v.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spread_unit_symbol_gives_first_column() {
        let z = ZcMatrix::new(8, 1).unwrap();
        let out = z.spread(&unit(8, 0)).unwrap();
        assert!(max_err(&out, &z.column(0)) < 1e-14);
    }

    #[test]
    fn despread_column_gives_unit_vector() {
        let z = ZcMatrix::new(32, 5).unwrap();
        for k in [0, 1, 17, 31] {
            let out = z.despread(&z.column(k)).unwrap();
            assert!(max_err(&out, &unit(32, k)) < 1e-12);
        }
    }

    #[test]
    fn spread_round_trip_and_energy() {
        let z = ZcMatrix::new(64, 1).unwrap();
        let s = random_vec(64, 3);
        let x = z.spread(&s).unwrap();
        assert!(max_err(&z.despread(&x).unwrap(), &s) < 1e-10);
        let es: f64 = s.iter().map(|v| v.norm_sqr()).sum();
        let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        assert!((es - ex).abs() < 1e-10);
    }

    #[test]
    fn spread_dimension_mismatch() {
        let z = ZcMatrix::new(8, 1).unwrap();
        assert!(matches!(
            z.spread(&random_vec(7, 1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn despread_commutes_with_channel() {
        let z = ZcMatrix::new(64, 1).unwrap();
        let h = CirculantMatrix::from_taps(&random_vec(10, 8), 64).unwrap();
        let s = random_vec(64, 9);
        let y = h.apply(&z.spread(&s).unwrap()).unwrap();
        let out = z.despread(&y).unwrap();
        assert!(max_err(&out, &h.apply(&s).unwrap()) < 1e-9);
    }

    #[test]
    fn dense_commutation() {
        let n = 32;
        let z = ZcMatrix::new(n, 1).unwrap().to_dense().unwrap();
        let h = CirculantMatrix::from_first_column(random_vec(n, 4))
            .unwrap()
            .to_dense()
            .unwrap();
        let zhz = z.adjoint().matmul(&h).unwrap().matmul(&z).unwrap();
        assert!(zhz.max_abs_diff(&h).unwrap() < 1e-9);
    }

    #[test]
    fn cp_layout() {
        let p: Vec<Complex64> = (1..=4).map(|v| c(v as f64, 0.)).collect();
        let block = add_cp(&p, 2).unwrap();
        let expected: Vec<Complex64> = [3, 4, 1, 2, 3, 4].iter().map(|&v| c(v as f64, 0.)).collect();
        assert_eq!(block.samples(), expected.as_slice());
        assert_eq!(add_cp(&p, 0).unwrap().samples(), p.as_slice());
        assert_eq!(add_cp(&p, 5), Err(Error::CpTooLong { cp_length: 5, n: 4 }));
        assert_eq!(strip_cp(block.samples(), 2, 4).unwrap(), p);
    }

    #[test]
    fn cp_turns_linear_into_circular_convolution() {
        let (n, cp) = (2048, 130);
        let payload = random_vec(n, 21);
        let taps = random_vec(130, 22);
        let block = add_cp(&payload, cp).unwrap();
        let rx = strip_cp(&tapped_delay_line(block.samples(), &taps), cp, n).unwrap();
        let circular: Vec<Complex64> = (0..n)
            .map(|t| {
                taps.iter()
                    .enumerate()
                    .map(|(k, &h)| h * payload[(t + n - k) % n])
                    .sum()
            })
            .collect();
        assert!(max_err(&rx, &circular) < 1e-9);
    }

    #[test]
    fn block_model_examples() {
        let n = 64;
        let z = ZcMatrix::new(n, 1).unwrap();
        let taps = random_vec(12, 5);
        let h = CirculantMatrix::from_taps(&taps, n).unwrap();
        let zero = vec![c(0., 0.); n];

        let out = simulate_despread_rx(&h, &z, &unit(n, 0), &zero).unwrap();
        assert!(max_err(&out, h.first_column()) < 1e-12);

        let s = random_vec(n, 6);
        let out = simulate_despread_rx(&h, &z, &s, &zero).unwrap();
        let mut sf = crate::spectral::dft(&s);
        for (v, l) in sf.iter_mut().zip(h.eigenvalues()) {
            *v *= l;
        }
        assert!(max_err(&out, &crate::spectral::idft(&sf)) < 1e-9);

        let id = CirculantMatrix::identity(n).unwrap();
        let out = simulate_despread_rx(&id, &z, &s, &zero).unwrap();
        assert!(max_err(&out, &s) < 1e-12);
    }

    #[test]
    fn block_model_noise_term() {
        let n = 32;
        let z = ZcMatrix::new(n, 3).unwrap();
        let h = CirculantMatrix::from_taps(&random_vec(4, 1), n).unwrap();
        let s = random_vec(n, 2);
        let v = random_vec(n, 3);
        let out = simulate_despread_rx(&h, &z, &s, &v).unwrap();
        let hs = h.apply(&s).unwrap();
        let zv = z.despread(&v).unwrap();
        let expected: Vec<Complex64> = hs.iter().zip(&zv).map(|(a, b)| a + b).collect();
        assert!(max_err(&out, &expected) < 1e-9);
    }

    #[test]
    fn sample_chain_matches_block_model() {
        let (n, cp) = (256, 20);
        let z = ZcMatrix::new(n, 1).unwrap();
        let taps = random_vec(21, 31);
        let h = CirculantMatrix::from_taps(&taps, n).unwrap();
        let s = random_vec(n, 32);
        let zero = vec![c(0., 0.); n];
        let out = sample_level_rx(&taps, &z, &s, cp, &zero).unwrap();
        assert!(max_err(&out, &h.apply(&s).unwrap()) < 1e-9);
        assert!(sample_level_rx(&random_vec(22, 1), &z, &s, cp, &zero).is_err());
    }
}
