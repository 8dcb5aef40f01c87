//! Evaluation engines for exponential sums `Σ_k c_k e^{-2πi x_k ξ}` over a
//! uniform node set `x_k = origin + k·spacing`.
//!
//! Three engines share one definition: direct summation (the reference),
//! a folded FFT for uniform frequency grids whose step is commensurate with
//! the node spacing, and a blockwise Taylor expansion for many low
//! frequencies of very long sums.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

const RESEED: usize = 64;
const FFT_MAX: usize = 1 << 24;

#[derive(Debug, Clone)]
pub(crate) struct UniformExpSum {
    origin: f64,
    spacing: f64,
    coeffs: Arc<Vec<f64>>,
    support: Option<Arc<Vec<usize>>>,
}

fn unit(cycles: f64) -> Complex64 {
    let frac = cycles - cycles.floor();
    let (s, c) = (2.0 * PI * frac).sin_cos();
    Complex64::new(c, -s)
}

impl UniformExpSum {
    pub(crate) fn new(origin: f64, spacing: f64, coeffs: Vec<f64>) -> Self {
        let nnz = coeffs.iter().filter(|c| **c != 0.0).count();
        let support = (nnz * 8 < coeffs.len())
            .then(|| Arc::new((0..coeffs.len()).filter(|&k| coeffs[k] != 0.0).collect()));
        Self {
            origin,
            spacing,
            coeffs: Arc::new(coeffs),
            support,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.coeffs.len()
    }

    fn nnz(&self) -> usize {
        self.support.as_ref().map_or(self.coeffs.len(), |s| s.len())
    }

    /// Direct summation; the reference engine.
    pub(crate) fn eval(&self, xi: f64) -> Complex64 {
        let node = |k: usize| (self.origin + k as f64 * self.spacing) * xi;
        if let Some(support) = &self.support {
            return support
                .iter()
                .map(|&k| self.coeffs[k] * unit(node(k)))
                .sum();
        }
        let step = unit(self.spacing * xi);
        let mut total = Complex64::new(0.0, 0.0);
        for (chunk_index, chunk) in self.coeffs.chunks(RESEED).enumerate() {
            let mut z = unit(node(chunk_index * RESEED));
            let mut acc = Complex64::new(0.0, 0.0);
            for &c in chunk {
                acc += c * z;
                z *= step;
            }
            total += acc;
        }
        total
    }

    /// Values at `j·dxi` for `j = 0..count`.
    pub(crate) fn grid(&self, dxi: f64, count: usize) -> Vec<Complex64> {
        if count == 0 {
            return Vec::new();
        }
        if let Some(period) = self.fft_period(dxi) {
            let fft_cost = 5.0 * period as f64 * (period as f64).log2().max(1.0) + self.len() as f64;
            let direct_cost = 4.0 * count as f64 * self.nnz() as f64;
            if fft_cost < direct_cost {
                return self.grid_fft(dxi, count, period);
            }
        }
        (0..count)
            .into_par_iter()
            .map(|j| self.eval(j as f64 * dxi))
            .collect()
    }

    /// `1/(dxi·spacing)` when it is an integer small enough for an FFT.
    fn fft_period(&self, dxi: f64) -> Option<usize> {
        let l = 1.0 / (dxi * self.spacing);
        let r = l.round();
        ((l - r).abs() <= 1e-9 * r && r >= 1.0 && r <= FFT_MAX as f64).then_some(r as usize)
    }

    fn grid_fft(&self, dxi: f64, count: usize, period: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); period];
        for (k, &c) in self.coeffs.iter().enumerate() {
            buf[k % period].re += c;
        }
        FftPlanner::new().plan_fft_forward(period).process(&mut buf);
        (0..count)
            .map(|j| buf[j % period] * unit(self.origin * j as f64 * dxi))
            .collect()
    }

    pub(crate) fn taylor(&self, max_freq: f64) -> TaylorExpSum {
        TaylorExpSum::new(self, max_freq)
    }
}

/// Blockwise Taylor expansion of a [`UniformExpSum`], accurate to about
/// `1e-16` relative to `Σ|c_k|` for `|ξ| ≤ max_freq`.
#[derive(Debug, Clone)]
pub(crate) struct TaylorExpSum {
    max_freq: f64,
    block: usize,
    block_step: f64,
    first_center: f64,
    polys: Vec<[Complex64; TAYLOR_TERMS]>,
}

const TAYLOR_TERMS: usize = 16;

impl TaylorExpSum {
    fn new(sum: &UniformExpSum, max_freq: f64) -> Self {
        let max_freq = max_freq.abs().max(1e-300);
        // Block half-width r with 2π·max_freq·r ≤ 1/2.
        let ideal = 1.0 / (2.0 * PI * max_freq * sum.spacing);
        let mut block = 1usize;
        while ((block * 2) as f64) <= ideal {
            block *= 2;
        }
        let block_len = block as f64 * sum.spacing;
        let first_center = sum.origin + 0.5 * (block as f64 - 1.0) * sum.spacing;
        let mut factors = [Complex64::new(1.0, 0.0); TAYLOR_TERMS];
        for n in 1..TAYLOR_TERMS {
            factors[n] = factors[n - 1] * Complex64::new(0.0, -2.0 * PI) / n as f64;
        }
        let polys = sum
            .coeffs
            .par_chunks(block)
            .enumerate()
            .map(|(b, chunk)| {
                let center = first_center + b as f64 * block_len;
                let mut moments = [0.0f64; TAYLOR_TERMS];
                for (i, &c) in chunk.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    let d = sum.origin + (b * block + i) as f64 * sum.spacing - center;
                    let mut pw = c;
                    for m in moments.iter_mut() {
                        *m += pw;
                        pw *= d;
                    }
                }
                let mut poly = [Complex64::new(0.0, 0.0); TAYLOR_TERMS];
                for n in 0..TAYLOR_TERMS {
                    poly[n] = factors[n] * moments[n];
                }
                poly
            })
            .collect();
        Self {
            max_freq,
            block,
            block_step: block_len,
            first_center,
            polys,
        }
    }

    /// Number of nodes folded into each block.
    pub(crate) fn block_len(&self) -> usize {
        self.block
    }

    pub(crate) fn eval(&self, xi: f64) -> Complex64 {
        debug_assert!(xi.abs() <= self.max_freq * (1.0 + 1e-12));
        let step = unit(self.block_step * xi);
        let mut total = Complex64::new(0.0, 0.0);
        let mut z = Complex64::new(1.0, 0.0);
        for (b, poly) in self.polys.iter().enumerate() {
            if b % RESEED == 0 {
                z = unit((self.first_center + b as f64 * self.block_step) * xi);
            }
            let mut acc = poly[TAYLOR_TERMS - 1];
            for n in (0..TAYLOR_TERMS - 1).rev() {
                acc = acc * xi + poly[n];
            }
            total += acc * z;
            z *= step;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(origin: f64, spacing: f64, coeffs: &[f64], xi: f64) -> Complex64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let a = -2.0 * PI * (origin + k as f64 * spacing) * xi;
                c * Complex64::new(a.cos(), a.sin())
            })
            .sum()
    }

    fn coeffs(n: usize) -> Vec<f64> {
        (0..n).map(|k| ((k * 7919) % 13) as f64 / 13.0).collect()
    }

    #[test]
    fn direct_matches_naive() {
        let c = coeffs(1000);
        let s = UniformExpSum::new(0.0005, 0.001, c.clone());
        for &xi in &[0.0, 1.3, -77.7, 4096.5] {
            assert!((s.eval(xi) - naive(0.0005, 0.001, &c, xi)).norm() < 1e-10);
        }
    }

    #[test]
    fn sparse_path_matches_naive() {
        let mut c = vec![0.0; 4096];
        c[3] = 0.5;
        c[4000] = 0.25;
        let s = UniformExpSum::new(0.0, 1.0 / 4096.0, c.clone());
        assert!(s.support.is_some());
        let xi = 123.25;
        assert!((s.eval(xi) - naive(0.0, 1.0 / 4096.0, &c, xi)).norm() < 1e-13);
    }

    #[test]
    fn fft_grid_matches_direct() {
        let c = coeffs(512);
        let s = UniformExpSum::new(1.0 / 1024.0, 1.0 / 512.0, c);
        let dxi = 0.25;
        assert_eq!(s.fft_period(dxi), Some(2048));
        let fast = s.grid_fft(dxi, 5000, 2048);
        for (j, v) in fast.iter().enumerate().step_by(97) {
            assert!((v - s.eval(j as f64 * dxi)).norm() < 1e-10, "j={j}");
        }
    }

    #[test]
    fn taylor_matches_direct() {
        let c = coeffs(1 << 14);
        let s = UniformExpSum::new(0.5 / 16384.0, 1.0 / 16384.0, c);
        let t = s.taylor(40.0);
        for &xi in &[0.0, 0.7, -13.1, 39.9, -40.0] {
            let want = s.eval(xi);
            assert!((t.eval(xi) - want).norm() < 1e-10 * (1.0 + want.norm()), "xi={xi}");
        }
    }
}
