//! The weighted-energy functionals against closed forms and dense-grid
//! brute force, at the tolerances the constants suite requires.

mod common;

use common::adaptive_simpson;
use stable_sde::coeffs::TimeFactorPreset;
use stable_sde::convolution::{eta, eta_window};

/// Closed form of `int_0^t e^{-a(t-s)} sin^2 s` via the antiderivative of
/// `e^{as} sin^2 s`.
fn sine_energy_closed(a: f64, t: f64) -> f64 {
    let anti = |s: f64| -> f64 {
        (a * s).exp() * (0.5 / a - (a * (2.0 * s).cos() + 2.0 * (2.0 * s).sin()) / (2.0 * (a * a + 4.0)))
    };
    (-a * t).exp() * (anti(t) - anti(0.0))
}

/// Dense-grid sup with parabolic refinement around the best node.
fn dense_sup<F: Fn(f64) -> f64>(f: F, t_end: f64, n: usize) -> f64 {
    let mut best = f64::MIN;
    let mut best_i = 0;
    for i in 0..=n {
        let v = f(i as f64 * t_end / n as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // parabolic refinement on the surrounding triple
    if best_i > 0 && best_i < n {
        let h = t_end / n as f64;
        let t0 = best_i as f64 * h;
        let (fm, f0, fp) = (f(t0 - h), best, f(t0 + h));
        let denom = fm - 2.0 * f0 + fp;
        if denom < 0.0 {
            let shift = 0.5 * h * (fm - fp) / denom;
            let refined = f(t0 + shift.clamp(-h, h));
            return refined.max(best);
        }
    }
    best
}

#[test]
fn eta_constant_closed_form_grid() {
    for (a, t_end, g0) in [(2.0f64, 1.0, 1.0), (0.5, 3.0, 2.0), (7.0, 0.4, 0.3)] {
        let g = TimeFactorPreset::Const { value: g0 }.build().unwrap();
        let expect = g0 * ((1.0 - (-a * t_end).exp()) / a).sqrt();
        let got = eta(a, t_end, g.as_ref()).unwrap();
        assert!(
            (got - expect).abs() <= 1e-8 * expect,
            "a={a}, T={t_end}: {got} vs {expect}"
        );
    }
}

#[test]
fn eta_sine_matches_dense_oracle() {
    // the worked case: amplitude 1, unit decay, horizon pi
    let g = TimeFactorPreset::Sine { amplitude: 1.0 }.build().unwrap();
    let t_end = std::f64::consts::PI;
    let oracle = dense_sup(|t| sine_energy_closed(1.0, t), t_end, 100_000).sqrt();
    let got = eta(1.0, t_end, g.as_ref()).unwrap();
    assert!(
        (got - oracle).abs() <= 1e-8 * oracle,
        "{got} vs oracle {oracle}"
    );

    // second decay/horizon pair, and an amplitude scaling check
    let oracle2 = dense_sup(|t| 2.25 * sine_energy_closed(2.0, t), 2.5, 100_000).sqrt();
    let g2 = TimeFactorPreset::Sine { amplitude: 1.5 }.build().unwrap();
    let got2 = eta(2.0, 2.5, g2.as_ref()).unwrap();
    assert!(
        (got2 - oracle2).abs() <= 1e-8 * oracle2,
        "{got2} vs oracle {oracle2}"
    );
}

#[test]
fn eta_is_positively_homogeneous_in_the_factor() {
    let t_end = 2.0;
    let base = TimeFactorPreset::Sine { amplitude: 1.0 }.build().unwrap();
    let scaled = TimeFactorPreset::Sine { amplitude: 3.0 }.build().unwrap();
    let e1 = eta(1.3, t_end, base.as_ref()).unwrap();
    let e3 = eta(1.3, t_end, scaled.as_ref()).unwrap();
    assert!((e3 - 3.0 * e1).abs() < 1e-10 * e3);
}

#[test]
fn eta_window_sine_matches_brute_force() {
    let g = TimeFactorPreset::Sine { amplitude: 1.0 }.build().unwrap();
    let (a, t_end, h) = (1.0, 2.0, 0.3);
    // brute force: the window integral per probe t, dense in t
    let window_at = |t: f64| {
        adaptive_simpson(
            |s: f64| (-a * (t + h - s)).exp() * s.sin() * s.sin(),
            t,
            t + h,
            1e-12,
        )
    };
    let oracle = dense_sup(window_at, t_end, 20_000).sqrt();
    let got = eta_window(a, t_end, g.as_ref(), h).unwrap();
    assert!(
        (got - oracle).abs() <= 1e-8 * oracle.max(1e-12),
        "{got} vs oracle {oracle}"
    );
}

#[test]
fn eta_window_constant_closed_form_grid() {
    for (a, h, g0) in [(1.0f64, 0.1, 1.0), (3.0, 0.5, 0.7)] {
        let g = TimeFactorPreset::Const { value: g0 }.build().unwrap();
        let expect = g0 * ((1.0 - (-a * h).exp()) / a).sqrt();
        let got = eta_window(a, 1.0, g.as_ref(), h).unwrap();
        assert!(
            (got - expect).abs() <= 1e-8 * expect,
            "a={a}, h={h}: {got} vs {expect}"
        );
    }
}

#[test]
fn eta_handles_extreme_decay_rates() {
    // gigantic combined decay (the weighted-norm search probes these):
    // for constant g the closed form stays exact
    let g = TimeFactorPreset::Const { value: 1.0 }.build().unwrap();
    for lambda in [1e6, 1e12, 1e18] {
        let got = eta(lambda, 1.0, g.as_ref()).unwrap();
        let expect = (1.0f64 / lambda).sqrt();
        assert!(
            (got - expect).abs() <= 1e-8 * expect,
            "lambda={lambda}: {got} vs {expect}"
        );
    }
}

#[test]
fn eta_table_factor_against_dense_oracle() {
    // piecewise-linear g: oracle integrates the interpolant directly
    let times = vec![0.0, 0.5, 1.0, 1.5, 2.0];
    let values = vec![0.0, 1.0, 0.2, 0.9, 0.1];
    let preset = TimeFactorPreset::Table { times: times.clone(), values: values.clone() };
    let g = preset.build().unwrap();
    let a = 1.7;
    let energy = |t: f64| {
        adaptive_simpson(
            |s: f64| {
                let gs = g.eval(s);
                (-a * (t - s)).exp() * gs * gs
            },
            0.0,
            t.max(1e-12),
            1e-11,
        )
    };
    let oracle = dense_sup(energy, 2.0, 20_000).sqrt();
    let got = eta(a, 2.0, g.as_ref()).unwrap();
    // table kinks cap the quadrature order; the tolerance reflects that
    assert!(
        (got - oracle).abs() <= 1e-6 * oracle,
        "{got} vs oracle {oracle}"
    );
}
