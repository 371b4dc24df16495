use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Square 2D complex FFT built from row transforms and transposes.
#[derive(Clone)]
pub(crate) struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    fn run(&self, fft: &dyn Fft<f64>, data: &mut [Complex64], tmp: &mut Vec<Complex64>) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        fft.process(data);
        transpose(data, tmp, n);
        fft.process(data);
        transpose(data, tmp, n);
    }

    /// Unnormalised forward transform, in place.
    pub(crate) fn forward(&self, data: &mut [Complex64], tmp: &mut Vec<Complex64>) {
        self.run(self.forward.as_ref(), data, tmp);
    }

    /// Inverse transform including the `1/n^2` normalisation, in place.
    pub(crate) fn inverse(&self, data: &mut [Complex64], tmp: &mut Vec<Complex64>) {
        self.run(self.inverse.as_ref(), data, tmp);
        let scale = 1.0 / (self.n * self.n) as f64;
        for d in data.iter_mut() {
            *d *= scale;
        }
    }
}

fn transpose(data: &mut [Complex64], tmp: &mut Vec<Complex64>, n: usize) {
    tmp.clear();
    tmp.extend_from_slice(data);
    for i in 0..n {
        for j in 0..n {
            data[j * n + i] = tmp[i * n + j];
        }
    }
}

/// Signed FFT wavenumber index for position `m` of an `n`-point transform;
/// the Nyquist index maps to zero so spectral derivatives stay real.
#[inline]
pub(crate) fn signed_index(m: usize, n: usize) -> f64 {
    if 2 * m < n {
        m as f64
    } else if 2 * m == n {
        0.0
    } else {
        m as f64 - n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let fft = Fft2::new(8);
        let orig: Vec<Complex64> = (0..64)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        let mut tmp = Vec::new();
        fft.forward(&mut data, &mut tmp);
        fft.inverse(&mut data, &mut tmp);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn matches_direct_dft() {
        let n = 4;
        let fft = Fft2::new(n);
        let x: Vec<Complex64> = (0..n * n).map(|k| Complex64::new(k as f64, 0.0)).collect();
        let mut data = x.clone();
        fft.forward(&mut data, &mut Vec::new());
        for p in 0..n {
            for q in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..n {
                    for b in 0..n {
                        let ph = -2.0 * std::f64::consts::PI * ((p * a + q * b) as f64) / n as f64;
                        acc += x[a * n + b] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((acc - data[p * n + q]).norm() < 1e-12);
            }
        }
    }
}
