//! Shared oracles for the integration tests. Everything here is computed
//! by routes independent of the library code it checks: adaptive Simpson
//! quadrature (not the library's Gauss-Kronrod), the integral
//! representation of the symmetric stable CDF, and closed-form fractional
//! moments.

#![allow(dead_code)]

use statrs::function::gamma::gamma;
use std::f64::consts::{FRAC_PI_2, PI};

/// Plain recursive adaptive Simpson quadrature with a relative tolerance
/// (taken against a coarse magnitude estimate, with a small floor), so
/// unattainable absolute targets cannot make the recursion grind.
pub fn adaptive_simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, 0.5 * (a + m), m);
        let right = simpson(f, m, 0.5 * (m + b), b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        recurse(f, a, m, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let coarse = simpson(&f, a, m, b);
    let tol_abs = tol * (coarse.abs() + 1e-15 * (b - a).abs());
    recurse(&f, a, b, coarse, tol_abs, 28)
}

/// `nu({|y| > r})` by quadrature of the density with the substitution
/// `x = r e^w`, which removes both the tail and any endpoint stiffness.
/// The integrand collapses to `c x^(-alpha)` after the Jacobian; keeping it
/// in that form avoids overflow in the separate powers.
pub fn tail_mass_quad(alpha: f64, c_plus: f64, c_minus: f64, r: f64) -> f64 {
    let w_max = 42.0 / alpha;
    let one_side = |c: f64| {
        adaptive_simpson(|w: f64| c * (r * w.exp()).powf(-alpha), 0.0, w_max, 1e-12)
    };
    one_side(c_plus) + one_side(c_minus)
}

/// `int_{|y| <= r} y^2 nu(dy)` with the substitution `x = r e^{-w}`; the
/// integrand collapses to `c x^(2-alpha)`.
pub fn small_second_moment_quad(alpha: f64, c_plus: f64, c_minus: f64, r: f64) -> f64 {
    let w_max = 42.0 / (2.0 - alpha);
    let one_side = |c: f64| {
        adaptive_simpson(
            |w: f64| c * (r * (-w).exp()).powf(2.0 - alpha),
            0.0,
            w_max,
            1e-12,
        )
    };
    one_side(c_plus) + one_side(c_minus)
}

/// `int_{1 < |x| <= r} x nu(dx)` directly (smooth integrand on [1, r]).
pub fn band_drift_quad(alpha: f64, c_plus: f64, c_minus: f64, r: f64) -> f64 {
    if r <= 1.0 {
        return 0.0;
    }
    let pos = adaptive_simpson(|x: f64| c_plus * x.powf(-alpha), 1.0, r, 1e-12);
    let neg = adaptive_simpson(|x: f64| c_minus * x.powf(-alpha), 1.0, r, 1e-12);
    pos - neg
}

/// CDF of the standard symmetric alpha-stable law (characteristic function
/// `exp(-|u|^alpha)`), through the non-oscillatory integral representation
/// of the inverted characteristic function. `alpha != 1`; the Cauchy case
/// has the closed form `1/2 + atan(x)/pi`.
pub fn symmetric_stable_cdf(alpha: f64, x: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 2.0);
    if alpha == 1.0 {
        return 0.5 + x.atan() / PI;
    }
    if x == 0.0 {
        return 0.5;
    }
    if x < 0.0 {
        return 1.0 - symmetric_stable_cdf(alpha, -x);
    }

    let shape = alpha / (alpha - 1.0);
    let r = x.powf(shape);
    let v = |theta: f64| -> f64 {
        let th = theta.clamp(1e-12, FRAC_PI_2 - 1e-12);
        let base = th.cos() / (alpha * th).sin();
        base.powf(shape) * ((alpha - 1.0) * th).cos() / th.cos()
    };
    let integrand = |theta: f64| -> f64 {
        let arg = r * v(theta);
        if arg > 700.0 {
            0.0
        } else {
            (-arg).exp()
        }
    };
    let integral = adaptive_simpson(integrand, 0.0, FRAC_PI_2, 1e-11);
    if alpha > 1.0 {
        1.0 - integral / PI
    } else {
        0.5 + integral / PI
    }
}

/// CDF with scale: `P(Y <= x)` for `Y` symmetric alpha-stable with
/// characteristic function `exp(-(sigma |u|)^alpha)`.
pub fn symmetric_stable_cdf_scaled(alpha: f64, sigma: f64, x: f64) -> f64 {
    symmetric_stable_cdf(alpha, x / sigma)
}

/// First-order tail constant: `P(Y > x) ~ sigma^alpha C(alpha) x^-alpha`.
pub fn stable_tail_constant(alpha: f64) -> f64 {
    (FRAC_PI_2 * alpha).sin() * gamma(alpha) / PI
}

/// Closed-form fractional moment `E|Y|^p` of the symmetric stable law with
/// scale `sigma`, valid for `0 < p < alpha`.
pub fn stable_fractional_moment(alpha: f64, p: f64, sigma: f64) -> f64 {
    assert!(p > 0.0 && p < alpha);
    sigma.powf(p) * 2f64.powf(p) * gamma((1.0 + p) / 2.0) * gamma(1.0 - p / alpha)
        / (PI.sqrt() * gamma(1.0 - p / 2.0))
}

/// Standard Cauchy CDF.
pub fn cauchy_cdf(x: f64) -> f64 {
    0.5 + x.atan() / PI
}

/// `int_0^inf (1 - cos v)/v^(1+alpha) dv` by direct quadrature: an exact
/// series head below epsilon, adaptive quadrature over the oscillatory
/// bulk, and the integration-by-parts tail beyond a whole number of
/// periods. Independent of the library's closed form.
pub fn one_minus_cos_integral_oracle(alpha: f64) -> f64 {
    let eps: f64 = 1e-4;
    // (1 - cos v)/v^(1+alpha) ~ v^(1-alpha)/2 - v^(3-alpha)/24 near zero
    let head = eps.powf(2.0 - alpha) / (2.0 * (2.0 - alpha))
        - eps.powf(4.0 - alpha) / (24.0 * (4.0 - alpha));
    // integrate period by period: dyadic splitting of the whole range
    // aliases against the cosine, one period at a time cannot
    let v_max = 128.0 * 2.0 * PI;
    let f = |v: f64| (1.0 - v.cos()) / v.powf(1.0 + alpha);
    let mut bulk = adaptive_simpson(f, eps, 2.0 * PI, 1e-12);
    for k in 1..128 {
        bulk += adaptive_simpson(f, 2.0 * PI * k as f64, 2.0 * PI * (k + 1) as f64, 1e-12);
    }
    // at whole periods sin = 0 and cos = 1, so the tail reduces to
    // V^-alpha/alpha - (1+alpha) V^-(2+alpha) + O(V^-(3+alpha))
    let tail = v_max.powf(-alpha) / alpha - (1.0 + alpha) * v_max.powf(-2.0 - alpha);
    head + bulk + tail
}

/// Composite Simpson over a fixed geometric grid: cheap and predictable
/// when the integrand itself is expensive (e.g. contains a CDF evaluation).
pub fn geometric_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(a > 0.0 && b > a);
    let ratio = (b / a).powf(1.0 / panels as f64);
    let mut acc = 0.0;
    let mut lo = a;
    for _ in 0..panels {
        let hi = lo * ratio;
        let m = 0.5 * (lo + hi);
        acc += (hi - lo) / 6.0 * (f(lo) + 4.0 * f(m) + f(hi));
        lo = hi;
    }
    acc
}

/// Tabulated symmetric stable CDF with scale, for bulk evaluation at many
/// points (KS statistics over large samples). Geometric abscissae, linear
/// interpolation, first-order series beyond the last node.
pub struct StableCdfTable {
    alpha: f64,
    sigma: f64,
    xs: Vec<f64>,
    fs: Vec<f64>,
    tail_coeff: f64,
}

impl StableCdfTable {
    pub fn build(alpha: f64, sigma: f64) -> Self {
        let tail_coeff = stable_tail_constant(alpha) * sigma.powf(alpha);
        // last node where the series tail is ~5e-5
        let x_hi = (tail_coeff / 5e-5).powf(1.0 / alpha);
        let x_lo = 1e-4 * sigma;
        let n = 1600usize;
        let ratio = (x_hi / x_lo).powf(1.0 / (n - 1) as f64);
        let mut xs = Vec::with_capacity(n + 1);
        let mut fs = Vec::with_capacity(n + 1);
        xs.push(0.0);
        fs.push(0.5);
        let mut x = x_lo;
        for _ in 0..n {
            xs.push(x);
            fs.push(symmetric_stable_cdf(alpha, x / sigma));
            x *= ratio;
        }
        Self { alpha, sigma, xs, fs, tail_coeff }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0 - self.eval(-x);
        }
        let last = *self.xs.last().unwrap();
        if x >= last {
            return 1.0 - self.tail_coeff * x.powf(-self.alpha);
        }
        let idx = self.xs.partition_point(|&xi| xi <= x);
        let (x0, x1) = (self.xs[idx - 1], self.xs[idx]);
        let (f0, f1) = (self.fs[idx - 1], self.fs[idx]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

