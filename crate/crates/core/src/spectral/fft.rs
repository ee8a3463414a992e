//! Discrete Fourier transform of arbitrary length.
//!
//! Forward transform uses the `exp(-j 2 pi k n / N)` kernel without scaling;
//! the inverse carries the `1/N`. Power-of-two lengths run an iterative
//! radix-2 transform, every other length goes through Bluestein's chirp-z
//! identity on a power-of-two convolution.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Reusable transform plan for one length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    algo: Algorithm,
}

#[derive(Debug, Clone)]
enum Algorithm {
    Trivial,
    Radix2 {
        twiddles: Vec<Complex64>,
        bitrev: Vec<usize>,
    },
    Bluestein {
        chirp: Vec<Complex64>,
        kernel_spectrum: Vec<Complex64>,
        inner: Box<FftPlan>,
    },
}

/// `exp(-j pi num / den)` with the numerator reduced modulo `2 den` in
/// integer arithmetic so large arguments keep full precision.
pub(crate) fn unit_phasor(num: u128, den: u128) -> Complex64 {
    let r = num % (2 * den);
    let theta = -PI * (r as f64) / (den as f64);
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "transform length must be positive");
        let algo = if n == 1 {
            Algorithm::Trivial
        } else if n.is_power_of_two() {
            let twiddles = (0..n / 2)
                .map(|k| unit_phasor(2 * k as u128, n as u128))
                .collect();
            let bits = n.trailing_zeros();
            let bitrev = (0..n)
                .map(|i| i.reverse_bits() >> (usize::BITS - bits))
                .collect();
            Algorithm::Radix2 { twiddles, bitrev }
        } else {
            let m = (2 * n - 1).next_power_of_two();
            // chirp[k] = exp(-j pi k^2 / n)
            let chirp: Vec<Complex64> = (0..n)
                .map(|k| unit_phasor((k as u128) * (k as u128), n as u128))
                .collect();
            let mut kernel = vec![Complex64::new(0.0, 0.0); m];
            kernel[0] = chirp[0].conj();
            for k in 1..n {
                kernel[k] = chirp[k].conj();
                kernel[m - k] = chirp[k].conj();
            }
            let inner = FftPlan::new(m);
            inner.forward(&mut kernel);
            Algorithm::Bluestein {
                chirp,
                kernel_spectrum: kernel,
                inner: Box::new(inner),
            }
        };
        Self { n, algo }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward transform. Panics if `buf.len() != self.len()`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "buffer length does not match plan");
        match &self.algo {
            Algorithm::Trivial => {}
            Algorithm::Radix2 { twiddles, bitrev } => radix2(buf, twiddles, bitrev),
            Algorithm::Bluestein {
                chirp,
                kernel_spectrum,
                inner,
            } => {
                let m = inner.len();
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for ((w, &x), &c) in work.iter_mut().zip(buf.iter()).zip(chirp) {
                    *w = x * c;
                }
                inner.forward(&mut work);
                for (w, &k) in work.iter_mut().zip(kernel_spectrum) {
                    *w *= k;
                }
                inner.inverse(&mut work);
                for ((out, &w), &c) in buf.iter_mut().zip(&work).zip(chirp) {
                    *out = w * c;
                }
            }
        }
    }

    /// In-place inverse transform including the `1/N` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        for x in buf.iter_mut() {
            *x = x.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.n as f64;
        for x in buf.iter_mut() {
            *x = x.conj() * scale;
        }
    }
}

fn radix2(buf: &mut [Complex64], twiddles: &[Complex64], bitrev: &[usize]) {
    let n = buf.len();
    for (i, &j) in bitrev.iter().enumerate() {
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut half = 1;
    while half < n {
        let stride = n / (2 * half);
        for start in (0..n).step_by(2 * half) {
            for k in 0..half {
                let t = buf[start + k + half] * twiddles[k * stride];
                let u = buf[start + k];
                buf[start + k] = u + t;
                buf[start + k + half] = u - t;
            }
        }
        half *= 2;
    }
}

/// Forward DFT of `x`.
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let mut out = x.to_vec();
    FftPlan::new(x.len()).forward(&mut out);
    out
}

/// Inverse DFT of `x`, including the `1/N` factor.
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    let mut out = x.to_vec();
    FftPlan::new(x.len()).inverse(&mut out);
    out
}
