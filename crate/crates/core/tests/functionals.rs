use std::f64::consts::PI;

use fracchem_core::field::{random_smooth_field, Field, Grid, SmoothFieldParams};
use fracchem_core::fraclap::hs_seminorm;
use fracchem_core::functionals::{
    dissipation_rate, fisher_information, fisher_symmetric_form, lyapunov, shannon_entropy,
    sup_interpolation_residual, theta_prime, theta_profile, theta_quadrature, GammaFunction,
};
use fracchem_core::kinetics::{polynomial, power_law};
use proptest::prelude::*;

fn positive_field(grid: &Grid, seed: u64) -> Field {
    let params = SmoothFieldParams {
        decay: 2.0,
        floor: 0.3,
        modes: 10.min(grid.n() / 3),
    };
    random_smooth_field(grid, seed, params).unwrap()
}

#[test]
fn entropy_of_shifted_cosine_matches_closed_form() {
    // ∫ (2 + cos x) log(2 + cos x) dx = 4π log((2 + √3)/2) + 2π (2 - √3)
    let exact = 4.0 * PI * ((2.0 + 3f64.sqrt()) / 2.0).ln() + 2.0 * PI * (2.0 - 3f64.sqrt());
    let grid = Grid::new(256).unwrap();
    let u = Field::from_fn(&grid, |x| 2.0 + x.cos());
    assert!((shannon_entropy(&u).unwrap() - exact).abs() <= 1e-12);
}

#[test]
fn fisher_of_shifted_cosine_matches_closed_form() {
    // Λ^α(2 + cos x) = cos x for every α, and ∫ cos x log(2 + cos x) dx = 2π (2 - √3).
    let exact = 2.0 * PI * (2.0 - 3f64.sqrt());
    let grid = Grid::new(256).unwrap();
    let u = Field::from_fn(&grid, |x| 2.0 + x.cos());
    for alpha in [0.5, 1.0, 2.0] {
        let fi = fisher_information(&u, alpha, GammaFunction::Log).unwrap();
        assert!((fi - exact).abs() <= 1e-12, "alpha={alpha}: {fi}");
    }
}

#[test]
fn fisher_with_identity_is_spectral_energy() {
    let grid = Grid::new(64).unwrap();
    let u = positive_field(&grid, 4);
    for alpha in [0.5, 1.3, 2.0] {
        // Σ 2π |k|^α |û_k|² = ‖Λ^{α/2} u‖².
        let spectral = hs_seminorm(&u, alpha / 2.0).powi(2);
        let fi = fisher_information(&u, alpha, GammaFunction::Identity).unwrap();
        assert!((fi - spectral).abs() <= 1e-11 * spectral);
    }
}

#[test]
fn symmetric_form_agrees_with_operator_form() {
    let grid = Grid::new(256).unwrap();
    let cosine = Field::from_fn(&grid, |x| 2.0 + x.cos());
    let op = fisher_information(&cosine, 1.0, GammaFunction::Log).unwrap();
    let sym = fisher_symmetric_form(&cosine, 1.0, GammaFunction::Log, 50).unwrap();
    assert!((op - sym).abs() / op.max(1.0) <= 5e-3, "{op} vs {sym}");

    for seed in 0..3 {
        let u = positive_field(&grid, seed);
        for alpha in [0.5, 1.0, 1.5] {
            for gamma in [GammaFunction::Log, GammaFunction::Power { s: 0.5 }] {
                let op = fisher_information(&u, alpha, gamma).unwrap();
                let sym = fisher_symmetric_form(&u, alpha, gamma, 50).unwrap();
                assert!(sym >= 0.0);
                assert!(
                    (op - sym).abs() / op.max(1.0) <= 5e-3,
                    "seed={seed} alpha={alpha} {gamma}: {op} vs {sym}"
                );
            }
        }
    }
}

#[test]
fn theta_closed_form_matches_nested_quadrature() {
    for r in [1.0, 1.3, 1.5, 2.0] {
        let f = power_law(r).unwrap();
        for s in [0.05, 0.5, 1.0, 1.7, 4.0] {
            let closed = theta_profile(&f, s).unwrap();
            let quad = theta_quadrature(&f, s);
            assert!((closed - quad).abs() <= 1e-9, "r={r} s={s}: {closed} vs {quad}");
        }
    }
}

#[test]
fn polynomial_theta_matches_nested_quadrature() {
    let f = polynomial(vec![0.3, 0.5, 0.25, 0.1]).unwrap();
    for s in [0.1, 0.7, 1.0, 2.5] {
        let closed = theta_profile(&f, s).unwrap();
        assert!((closed - theta_quadrature(&f, s)).abs() <= 1e-9, "s={s}");
    }
}

#[test]
fn polynomial_theta_reproduces_power_law() {
    // f = y²/2 written as a polynomial reproduces the power-law profile.
    let poly = polynomial(vec![0.0, 0.0, 0.5]).unwrap();
    let pow = power_law(2.0).unwrap();
    for s in [0.2, 1.0, 3.0] {
        assert!((theta_profile(&poly, s).unwrap() - theta_profile(&pow, s).unwrap()).abs() < 1e-9);
        assert!((theta_prime(&poly, s).unwrap() - theta_prime(&pow, s).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn dissipation_rate_is_nonnegative() {
    let grid = Grid::new(64).unwrap();
    for seed in 0..10 {
        let u = positive_field(&grid, seed);
        for r in [1.0, 1.5, 2.0] {
            let d = dissipation_rate(&u, 1.2, &power_law(r).unwrap()).unwrap();
            assert!(d >= -1e-12, "seed={seed} r={r}: {d}");
        }
    }
}

#[test]
fn lyapunov_of_shifted_cosine_matches_quadratic_profile() {
    // Θ(u) = (u - 1)²/2 for r = 2, so ∫ (1 + cos x)²/2 dx = 3π/2.
    let grid = Grid::new(128).unwrap();
    let u = Field::from_fn(&grid, |x| 2.0 + x.cos());
    let q = Field::zeros(&grid);
    let value = lyapunov(&u, &q, &power_law(2.0).unwrap()).unwrap();
    assert!((value - 1.5 * PI).abs() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fisher_is_nonnegative(seed in 0u64..10_000, alpha in 0.1..=2.0f64, s in 0.1..2.0f64) {
        let grid = Grid::new(64).unwrap();
        let u = positive_field(&grid, seed);
        for gamma in [GammaFunction::Log, GammaFunction::Identity, GammaFunction::Power { s }] {
            prop_assert!(fisher_information(&u, alpha, gamma).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn theta_is_convex_and_nonnegative(r in 1.0..=2.0f64, s in 0.01..10.0f64, h in 1e-3..0.5f64) {
        let f = power_law(r).unwrap();
        let lo = (s - h).max(s / 2.0);
        let hi = s + h;
        let mid = 0.5 * (lo + hi);
        let (a, b, c) = (
            theta_profile(&f, lo).unwrap(),
            theta_profile(&f, mid).unwrap(),
            theta_profile(&f, hi).unwrap(),
        );
        prop_assert!(a >= 0.0 && b >= 0.0 && c >= 0.0);
        prop_assert!(a + c - 2.0 * b >= -1e-12 * (1.0 + a.abs() + c.abs()));
    }

    #[test]
    fn lyapunov_is_nonnegative(seed in 0u64..10_000, r in 1.0..=2.0f64) {
        let grid = Grid::new(32).unwrap();
        let u = positive_field(&grid, seed);
        let q = positive_field(&grid, seed + 7).map(|v| v - 1.0);
        prop_assert!(lyapunov(&u, &q, &power_law(r).unwrap()).unwrap() >= 0.0);
    }

    #[test]
    fn interpolation_residual_is_scale_invariant(seed in 0u64..10_000, lambda in 0.01..100.0f64, alpha in 1.01..=2.0f64) {
        let grid = Grid::new(64).unwrap();
        let u = positive_field(&grid, seed);
        let base = sup_interpolation_residual(&u, alpha).unwrap();
        let scaled = sup_interpolation_residual(&u.map(|v| lambda * v), alpha).unwrap();
        prop_assert!(base.is_finite() && base > 0.0);
        prop_assert!((scaled - base).abs() <= 1e-10 * base);
    }
}
