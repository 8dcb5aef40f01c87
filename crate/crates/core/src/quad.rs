//! Fixed and composite quadrature rules shared by the numerical modules.

use std::sync::LazyLock;

use gauss_quad::legendre::GaussLegendre;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) struct GaussRule {
    pairs: Vec<(f64, f64)>,
}

pub(crate) static GL4: LazyLock<GaussRule> = LazyLock::new(|| GaussRule::legendre(4));
pub(crate) static GL8: LazyLock<GaussRule> = LazyLock::new(|| GaussRule::legendre(8));
pub(crate) static GL16: LazyLock<GaussRule> = LazyLock::new(|| GaussRule::legendre(16));
pub(crate) static GL32: LazyLock<GaussRule> = LazyLock::new(|| GaussRule::legendre(32));

impl GaussRule {
    pub(crate) fn legendre(degree: usize) -> Self {
        let rule = GaussLegendre::new(degree).expect("degree >= 2");
        Self {
            pairs: rule.as_node_weight_pairs().to_vec(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub(crate) fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.pairs.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }

    pub(crate) fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub(crate) fn composite(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: impl FnMut(f64) -> f64,
    ) -> f64 {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + width * i as f64;
                self.integrate(lo, lo + width, &mut f)
            })
            .sum()
    }

    /// All nodes and weights of the composite rule, in increasing order.
    pub(crate) fn composite_nodes(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.len());
        for i in 0..panels {
            let lo = a + width * i as f64;
            out.extend(self.mapped(lo, lo + width));
        }
        out
    }
}

/// Weights of the fourth-order extended trapezoid (Gregory) rule on `n + 1`
/// equispaced samples, excluding the step factor. Needs `n >= 6`.
pub(crate) fn gregory_weights(n: usize) -> Vec<f64> {
    assert!(n >= 6, "gregory rule needs at least 7 samples");
    let mut w = vec![1.0; n + 1];
    let ends = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
    for (i, &e) in ends.iter().enumerate() {
        w[i] = e;
        w[n - i] = e;
    }
    w
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub(crate) fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `sin(x) / x` with the removable singularity filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}
