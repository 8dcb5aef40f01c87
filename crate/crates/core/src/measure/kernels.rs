//! The smooth profiles: mollifier `φ`, window `τ` and weight `ϕ`.

use std::f64::consts::PI;
use std::sync::LazyLock;

use num_complex::Complex64;

use crate::quad::{bisect, GL16, GL32, GL8};
use crate::sampled::SampledFunction;

fn psi(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

fn dpsi(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        psi(u) / (u * u)
    }
}

/// `C^∞` step: 0 for `u ≤ 0`, 1 for `u ≥ 1`, and `S(u) + S(1-u) = 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let (a, b) = (psi(u), psi(1.0 - u));
        a / (a + b)
    }
}

fn smooth_step_derivative(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let (a, b) = (psi(u), psi(1.0 - u));
    let (da, db) = (dpsi(u), dpsi(1.0 - u));
    (da * b + a * db) / ((a + b) * (a + b))
}

/// Normalized bump `φ(x) = e^{-1/(1-x²)}/Z` on `(-1, 1)`.
#[derive(Debug)]
pub struct MollifierPhi {
    norm: f64,
    cdf: SampledFunction,
    transform: Vec<[f64; TAYLOR_ORDER]>,
}

static PHI: LazyLock<MollifierPhi> = LazyLock::new(MollifierPhi::build);

const CDF_INTERVALS: usize = 4096;
const TRANSFORM_MAX: f64 = 128.0;
const TRANSFORM_STEP: f64 = 1.0 / 64.0;
const TAYLOR_ORDER: usize = 10;

fn bump(x: f64) -> f64 {
    let d = 1.0 - x * x;
    if d <= 0.0 {
        0.0
    } else {
        (-1.0 / d).exp()
    }
}

impl MollifierPhi {
    pub fn standard() -> &'static Self {
        &PHI
    }

    fn build() -> Self {
        let norm = GL32.composite(-1.0, 1.0, 64, bump);
        let h = 2.0 / CDF_INTERVALS as f64;
        let mut values = Vec::with_capacity(CDF_INTERVALS + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for k in 0..CDF_INTERVALS {
            let a = -1.0 + h * k as f64;
            acc += GL8.integrate(a, a + h, bump) / norm;
            values.push(acc);
        }
        let end = acc;
        for v in values.iter_mut() {
            *v /= end;
        }
        let slopes = (0..=CDF_INTERVALS)
            .map(|k| bump(-1.0 + h * k as f64) / norm)
            .collect();
        let cdf = SampledFunction::new(-1.0, h, values)
            .and_then(|f| f.with_slopes(slopes))
            .expect("valid grid");
        let transform = Self::tabulate_transform(norm);
        Self {
            norm,
            cdf,
            transform,
        }
    }

    /// Taylor coefficients of `φ̂(u) = 2∫₀¹ φ(x) cos(2πux) dx` at each grid node,
    /// by running the phase recurrence in `u` for every quadrature node.
    fn tabulate_transform(norm: f64) -> Vec<[f64; TAYLOR_ORDER]> {
        let count = (TRANSFORM_MAX / TRANSFORM_STEP).round() as usize + 1;
        let mut table = vec![[0.0; TAYLOR_ORDER]; count];
        for (x, w) in GL16.composite_nodes(0.0, 1.0, 256) {
            let a = 2.0 * w * bump(x) / norm;
            let mut scale = [0.0; TAYLOR_ORDER];
            let mut c = a;
            for (k, s) in scale.iter_mut().enumerate() {
                *s = c;
                c *= 2.0 * PI * x / (k + 1) as f64;
            }
            let step = Complex64::from_polar(1.0, 2.0 * PI * x * TRANSFORM_STEP);
            let mut z = Complex64::new(1.0, 0.0);
            for (j, row) in table.iter_mut().enumerate() {
                if j % 64 == 0 {
                    z = Complex64::from_polar(1.0, 2.0 * PI * x * TRANSFORM_STEP * j as f64);
                }
                let cycle = [z.re, -z.im, -z.re, z.im];
                for (k, r) in row.iter_mut().enumerate() {
                    *r += scale[k] * cycle[k % 4];
                }
                z *= step;
            }
        }
        table
    }

    /// `∫_{-1}^{1} e^{-1/(1-x²)} dx`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    pub fn eval(&self, x: f64) -> f64 {
        bump(x) / self.norm
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let d = 1.0 - x * x;
        if d <= 0.0 {
            0.0
        } else {
            -2.0 * x / (d * d) * self.eval(x)
        }
    }

    /// `∫_{-1}^{x} φ`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -1.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            self.cdf.eval(x)
        }
    }

    /// `φ_ε(x) = φ(x/ε)/ε`.
    pub fn scaled(&self, eps: f64, x: f64) -> f64 {
        self.eval(x / eps) / eps
    }

    /// Real, even transform `φ̂(u)`; treated as zero beyond `|u| = 128`.
    pub fn fourier(&self, u: f64) -> f64 {
        let u = u.abs();
        if u >= TRANSFORM_MAX {
            return 0.0;
        }
        let j = (u / TRANSFORM_STEP).round() as usize;
        let d = u - j as f64 * TRANSFORM_STEP;
        self.transform[j].iter().rev().fold(0.0, |acc, c| acc * d + c)
    }

    /// Transform support cutoff.
    pub fn transform_cutoff(&self) -> f64 {
        TRANSFORM_MAX
    }

    /// Profile sampled with slopes on `n` intervals of `[-1, 1]`.
    pub fn profile(&self, n: usize) -> SampledFunction {
        SampledFunction::tabulate(-1.0, 1.0, n, |x| self.eval(x), Some(&|x| self.derivative(x)))
            .expect("valid grid")
    }
}

/// Window `τ`: ramp on `[1/2, 1]`, plateau 1 on `[1, 2]`, descent on `[2, 4]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct WindowTau;

impl WindowTau {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.5 || x >= 4.0 {
            0.0
        } else if x < 1.0 {
            smooth_step(2.0 * x - 1.0)
        } else if x <= 2.0 {
            1.0
        } else {
            smooth_step(0.5 * (4.0 - x))
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= 0.5 || x >= 4.0 || (1.0..=2.0).contains(&x) {
            0.0
        } else if x < 1.0 {
            2.0 * smooth_step_derivative(2.0 * x - 1.0)
        } else {
            -0.5 * smooth_step_derivative(0.5 * (4.0 - x))
        }
    }

    /// `τ_l(t) = τ(2^l t)`.
    pub fn scaled(&self, l: u32, t: f64) -> f64 {
        self.eval((l as f64).exp2() * t)
    }

    /// `‖τ‖₁ = 9/4`.
    pub fn l1_norm(&self) -> f64 {
        2.25
    }

    /// `‖τ_l‖₁ = 2^{-l}·9/4`.
    pub fn scaled_l1_norm(&self, l: u32) -> f64 {
        self.l1_norm() * (-(l as f64)).exp2()
    }

    pub fn profile(&self, n: usize) -> SampledFunction {
        SampledFunction::tabulate(0.5, 4.0, n, |x| self.eval(x), Some(&|x| self.derivative(x)))
            .expect("valid grid")
    }
}

/// Weight `ϕ = h/∫h` with `h(x) = S((x−m)/r)·S((1−m−x)/r)`, `∫h = 1/2`,
/// hence `∫ϕ = 1` and `sup ϕ = 2`.
#[derive(Debug)]
pub struct WeightVarphi {
    margin: f64,
    ramp: f64,
    scale: f64,
    cdf: SampledFunction,
}

static VARPHI: LazyLock<WeightVarphi> = LazyLock::new(WeightVarphi::build);

const VARPHI_MARGIN: f64 = 1.0 / 16.0;

fn plateau(x: f64, m: f64, r: f64) -> f64 {
    smooth_step((x - m) / r) * smooth_step((1.0 - m - x) / r)
}

fn plateau_derivative(x: f64, m: f64, r: f64) -> f64 {
    let (a, b) = ((x - m) / r, (1.0 - m - x) / r);
    (smooth_step_derivative(a) * smooth_step(b) - smooth_step(a) * smooth_step_derivative(b)) / r
}

impl WeightVarphi {
    pub fn standard() -> &'static Self {
        &VARPHI
    }

    fn build() -> Self {
        let m = VARPHI_MARGIN;
        let mass = |r: f64| GL32.composite(m, 1.0 - m, 256, |x| plateau(x, m, r));
        let ramp = bisect(|r| mass(r) - 0.5, 1e-3, 0.5 - m, 1e-15);
        let scale = 1.0 / mass(ramp);
        let n = 8192;
        let h = 1.0 / n as f64;
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for k in 0..n {
            let a = h * k as f64;
            acc += scale * GL8.integrate(a, a + h, |x| plateau(x, m, ramp));
            values.push(acc);
        }
        let slopes = (0..=n).map(|k| scale * plateau(h * k as f64, m, ramp)).collect();
        let cdf = SampledFunction::new(0.0, h, values)
            .and_then(|f| f.with_slopes(slopes))
            .expect("valid grid");
        Self {
            margin: m,
            ramp,
            scale,
            cdf,
        }
    }

    /// Distance from the support to `{0, 1}`.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Width of each smooth ramp.
    pub fn ramp_width(&self) -> f64 {
        self.ramp
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.scale * plateau(x, self.margin, self.ramp)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.scale * plateau_derivative(x, self.margin, self.ramp)
    }

    /// `∫_0^x ϕ`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            self.cdf.values()[self.cdf.len() - 1]
        } else {
            self.cdf.eval(x)
        }
    }

    /// `w(Q) = ∫_Q ϕ`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        (self.cdf(b) - self.cdf(a)).max(0.0)
    }

    /// `ϕ̂(ξ)`, using the symmetry of `ϕ` about `1/2`.
    pub fn fourier(&self, xi: f64) -> Complex64 {
        let half = 0.5 - self.margin;
        let panels = 8 + (4.0 * xi.abs()).ceil() as usize;
        let a = 2.0
            * GL16.composite(0.0, half, panels, |y| {
                self.eval(0.5 + y) * (2.0 * PI * y * xi).cos()
            });
        a * Complex64::from_polar(1.0, -PI * xi)
    }

    pub fn profile(&self, n: usize) -> SampledFunction {
        SampledFunction::tabulate(0.0, 1.0, n, |x| self.eval(x), Some(&|x| self.derivative(x)))
            .expect("valid grid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_step_symmetry() {
        for i in 0..=20 {
            let u = i as f64 / 20.0;
            assert!((smooth_step(u) + smooth_step(1.0 - u) - 1.0).abs() < 1e-15);
        }
        let d = GL32.composite(0.0, 1.0, 16, smooth_step_derivative);
        assert!((d - 1.0).abs() < 1e-13);
    }

    #[test]
    fn mollifier_facts() {
        let phi = MollifierPhi::standard();
        assert!((phi.normalization() - 0.443_993_816_168_079_4).abs() < 1e-12);
        assert!(phi.eval(0.5) >= 0.5 && (phi.eval(0.5) - 0.594).abs() < 1e-3);
        assert!((phi.cdf(0.0) - 0.5).abs() < 1e-14);
        assert!((phi.profile(512).integral() - 1.0).abs() < 1e-10);
        assert!((phi.fourier(0.0) - 1.0).abs() < 1e-12);
        for &u in &[0.3, 1.7, 9.4] {
            let direct = GL32.composite(-1.0, 1.0, 64, |x| phi.eval(x) * (2.0 * PI * u * x).cos());
            assert!((phi.fourier(u) - direct).abs() < 1e-12, "u={u}");
        }
        assert!(phi.fourier(128.0).abs() < 1e-14);
    }

    #[test]
    fn window_facts() {
        let tau = WindowTau;
        assert_eq!(tau.eval(1.5), 1.0);
        assert_eq!(tau.eval(0.5), 0.0);
        assert_eq!(tau.eval(4.0), 0.0);
        let l1 = GL32.composite(0.5, 4.0, 64, |x| tau.eval(x));
        assert!((l1 - tau.l1_norm()).abs() < 1e-13);
        assert!((tau.scaled(2, 0.3) - tau.eval(1.2)).abs() < 1e-15);
    }

    #[test]
    fn weight_facts() {
        let w = WeightVarphi::standard();
        assert!((w.ramp_width() - 0.375).abs() < 1e-12);
        assert!((w.mass(0.0, 1.0) - 1.0).abs() < 1e-12);
        assert!((w.eval(0.5) - 2.0).abs() < 1e-12);
        assert_eq!(w.eval(w.margin()), 0.0);
        assert!((w.fourier(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
