//! FFT-backed convolution for the double-precision scalar.
//!
//! Only the f64 paths use this: rigorous (interval) and exact (rational)
//! convolutions always go through the elementary kernels. Real inputs are
//! handled with Hermitian-half spectra so the large-shell pipeline stores
//! half as much.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct FftPlans {
    pub len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPlans {
    pub fn new(len: usize) -> Self {
        assert!(len.is_power_of_two());
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    /// Half spectrum (bins 0..=len/2) of a real signal zero-padded to `len`.
    pub fn forward_half(&self, x: &[f64]) -> Vec<Complex64> {
        assert!(x.len() <= self.len);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for (b, &v) in buf.iter_mut().zip(x) {
            b.re = v;
        }
        self.forward.process(&mut buf);
        buf.truncate(self.len / 2 + 1);
        buf
    }

    /// Real signal from a Hermitian half spectrum (normalized inverse).
    pub fn inverse_half(&self, half: &[Complex64]) -> Vec<f64> {
        let l = self.len;
        assert_eq!(half.len(), l / 2 + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        buf[..=l / 2].copy_from_slice(half);
        for k in l / 2 + 1..l {
            buf[k] = half[l - k].conj();
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / l as f64;
        buf.into_iter().map(|z| z.re * scale).collect()
    }

    pub fn forward_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert!(x.len() <= self.len);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        buf[..x.len()].copy_from_slice(x);
        self.forward.process(&mut buf);
        buf
    }

    pub fn inverse_complex(&self, mut spec: Vec<Complex64>) -> Vec<Complex64> {
        assert_eq!(spec.len(), self.len);
        self.inverse.process(&mut spec);
        let scale = 1.0 / self.len as f64;
        for v in spec.iter_mut() {
            *v *= scale;
        }
        spec
    }
}

/// Linear convolution of complex sequences via FFT.
pub fn convolve_complex(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let l = out_len.next_power_of_two().max(2);
    let plans = FftPlans::new(l);
    let fa = plans.forward_complex(a);
    let fb = plans.forward_complex(b);
    let prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let mut out = plans.inverse_complex(prod);
    out.truncate(out_len);
    out
}
