//! Self-checks of the test oracles, and quadrature verification of the
//! closed-form measure functionals against them.

mod common;

use common::*;
use stable_sde::levy::StableCharacteristics;

#[test]
fn simpson_matches_closed_forms() {
    assert!((adaptive_simpson(|x| x * x, 0.0, 3.0, 1e-12) - 9.0).abs() < 1e-10);
    assert!((adaptive_simpson(|x: f64| (-x).exp(), 0.0, 50.0, 1e-13) - 1.0).abs() < 1e-10);
}

#[test]
fn stable_cdf_is_a_cdf_and_matches_the_tail_series() {
    for alpha in [0.9, 1.5] {
        assert!((symmetric_stable_cdf(alpha, 0.0) - 0.5).abs() < 1e-12);
        let f2 = symmetric_stable_cdf(alpha, 2.0);
        let fm2 = symmetric_stable_cdf(alpha, -2.0);
        assert!((f2 + fm2 - 1.0).abs() < 1e-9, "alpha={alpha}");
        let mut prev = 0.0;
        for i in 0..200 {
            let x = -40.0 + i as f64 * 0.4;
            let f = symmetric_stable_cdf(alpha, x);
            assert!(f >= prev - 1e-12, "alpha={alpha}, x={x}");
            prev = f;
        }
        let c = stable_tail_constant(alpha);
        for x in [60.0, 150.0] {
            let tail = 1.0 - symmetric_stable_cdf(alpha, x);
            let series = c * x.powf(-alpha);
            assert!(
                (tail - series).abs() < 0.02 * series,
                "alpha={alpha}, x={x}: {tail} vs {series}"
            );
        }
    }
}

#[test]
fn stable_cdf_recovers_fractional_moments() {
    // E|Y|^p = int_0^inf p x^(p-1) P(|Y| > x) dx against the closed formula;
    // fixed geometric panels keep the (expensive) CDF evaluation count bounded
    for (alpha, p) in [(1.5, 0.7), (0.9, 0.4)] {
        let x_hi = 4000.0;
        let bulk = geometric_simpson(
            |x: f64| {
                let tail = 2.0 * (1.0 - symmetric_stable_cdf(alpha, x));
                p * x.powf(p - 1.0) * tail
            },
            1e-7,
            x_hi,
            400,
        );
        // below the lowest node the integrand is ~ p x^(p-1), integrable
        let head = 1e-7f64.powf(p);
        // beyond the horizon, integrate the tail series
        let tail = 2.0 * stable_tail_constant(alpha) * p / (alpha - p) * x_hi.powf(p - alpha);
        let numeric = bulk + head + tail;
        let exact = stable_fractional_moment(alpha, p, 1.0);
        assert!(
            (numeric - exact).abs() < 2e-3 * exact,
            "alpha={alpha}, p={p}: {numeric} vs {exact}"
        );
    }
}

#[test]
fn cdf_table_matches_direct_evaluation() {
    for (alpha, sigma) in [(1.5, 0.9), (0.9, 1.7)] {
        let table = StableCdfTable::build(alpha, sigma);
        for x in [-31.0, -2.4, -0.3, 0.0, 1e-3, 0.7, 3.0, 19.0, 240.0] {
            let direct = symmetric_stable_cdf(alpha, x / sigma);
            let tabulated = table.eval(x);
            assert!(
                (direct - tabulated).abs() < 5e-5,
                "alpha={alpha}, x={x}: {tabulated} vs {direct}"
            );
        }
    }
}

#[test]
fn cauchy_special_case_of_moment_formula() {
    // E|C|^(1/2) = sqrt(2) for the standard Cauchy
    let m = stable_fractional_moment(1.0 + 1e-9, 0.5, 1.0);
    assert!((m - 2f64.sqrt()).abs() < 1e-6, "got {m}");
}

// ---------------------------------------------------------------------------
// Closed-form measure functionals against independent quadrature
// ---------------------------------------------------------------------------

#[test]
fn tail_mass_matches_quadrature_to_1e10() {
    for alpha in [0.5, 1.0, 1.5, 1.9] {
        let (cp, cm) = if alpha == 1.0 { (0.7, 0.7) } else { (0.7, 0.3) };
        let chars = StableCharacteristics::new(alpha, cp, cm, 0.0).unwrap();
        for r in [1.0, 1.7, 4.0, 25.0] {
            let closed = chars.tail_mass(r).unwrap();
            let quad = tail_mass_quad(alpha, cp, cm, r);
            assert!(
                (closed - quad).abs() <= 1e-10 * quad.abs(),
                "alpha={alpha}, r={r}: {closed} vs {quad}"
            );
        }
    }
}

#[test]
fn small_second_moment_matches_quadrature() {
    for alpha in [0.5, 1.0, 1.5, 1.9] {
        let (cp, cm) = if alpha == 1.0 { (0.4, 0.4) } else { (0.4, 1.1) };
        let chars = StableCharacteristics::new(alpha, cp, cm, 0.0).unwrap();
        for r in [0.5, 1.0, 2.0, 10.0] {
            let closed = chars.small_second_moment(r).unwrap();
            let quad = small_second_moment_quad(alpha, cp, cm, r);
            assert!(
                (closed - quad).abs() <= 1e-8 * quad.abs(),
                "alpha={alpha}, r={r}: {closed} vs {quad}"
            );
        }
    }
}

#[test]
fn truncated_drift_matches_quadrature() {
    for alpha in [0.5, 1.5, 1.9] {
        let b = 0.37;
        let chars = StableCharacteristics::new(alpha, 1.2, 0.4, b).unwrap();
        for r in [1.0, 2.0, 10.0] {
            let closed = chars.truncated_drift(r).unwrap();
            let quad = b + band_drift_quad(alpha, 1.2, 0.4, r);
            assert!(
                (closed - quad).abs() <= 1e-8 * (1.0 + quad.abs()),
                "alpha={alpha}, r={r}: {closed} vs {quad}"
            );
        }
    }
}

#[test]
fn tail_constants_match_quadrature_at_unit_level() {
    // c1 equals the tail mass at R = 1; the second-moment constant scales
    // the restricted second moment as c2 R^(2-beta), checked at two levels
    for alpha in [0.5, 1.5] {
        let chars = StableCharacteristics::new(alpha, 0.9, 0.1, 0.0).unwrap();
        let tb = chars.tail_bounds();
        let c1_quad = tail_mass_quad(alpha, 0.9, 0.1, 1.0);
        assert!((tb.c1 - c1_quad).abs() <= 1e-10 * c1_quad);
        for r in [1.0, 3.0] {
            let m2 = small_second_moment_quad(alpha, 0.9, 0.1, r);
            assert!(
                (tb.c2 * r.powf(2.0 - tb.beta) - m2).abs() <= 1e-8 * m2,
                "alpha={alpha}, r={r}"
            );
        }
    }
}

#[test]
fn moment_condition_quadrature_heuristic() {
    // int_{1<|x|<X} |x|^p nu(dx) stabilizes as X doubles iff p < alpha,
    // and keeps growing otherwise
    // both tails of the symmetric measure with weight 0.5 each side
    let grow = |alpha: f64, p: f64| -> Vec<f64> {
        [8.0, 64.0, 512.0, 4096.0]
            .iter()
            .map(|&x_max| {
                adaptive_simpson(|x: f64| x.powf(p - alpha - 1.0), 1.0, x_max, 1e-12)
            })
            .collect()
    };

    // convergent: alpha = 1.5, p = 1, increments die out
    let conv = grow(1.5, 1.0);
    assert!((conv[3] - conv[2]).abs() < 0.05 * conv[3]);
    assert!(StableCharacteristics::symmetric(1.5, 0.5).unwrap().admits_moment_order(1.0).unwrap());

    // divergent (log): alpha = 1.5, p = 1.5, constant increments ln 8
    let marginal = grow(1.5, 1.5);
    assert!(marginal[3] - marginal[2] > 0.5);
    assert!(!StableCharacteristics::symmetric(1.5, 0.5).unwrap().admits_moment_order(1.5).unwrap());

    // divergent (power): p = 2, alpha = 1.9, increments keep growing
    let diverge = grow(1.9, 2.0);
    let inc_last = diverge[3] - diverge[2];
    let inc_prev = diverge[2] - diverge[1];
    assert!(inc_last > inc_prev && inc_last > 0.5, "increments {inc_prev} -> {inc_last}");
    assert!(!StableCharacteristics::symmetric(1.9, 0.5).unwrap().admits_moment_order(2.0).unwrap());
}

#[test]
fn cosine_integral_oracle_agrees_with_the_closed_form() {
    use stable_sde::levy::one_minus_cos_integral;
    for alpha in [0.5, 0.9, 1.0, 1.5, 1.9] {
        let oracle = one_minus_cos_integral_oracle(alpha);
        let closed = one_minus_cos_integral(alpha);
        assert!(
            (oracle - closed).abs() < 1e-6 * closed,
            "alpha={alpha}: {oracle} vs {closed}"
        );
    }
}
