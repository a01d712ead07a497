//! The fractional Laplacian `Λ^α = (-Δ)^{α/2}` on the torus, as a Fourier
//! multiplier and as a periodized singular integral, together with the
//! fractional Sobolev (`Ḣ^s`) and Slobodeckij (`Ẇ^{s,p}`) seminorms.
//!
//! The singular-integral quantities all reduce to one-dimensional integrals in
//! the displacement `η`,
//!
//! ```text
//!     ∫_0^π S(η) K(η) dη,   S(η) ~ η^q g(0) as η → 0,
//! ```
//!
//! evaluated with [`SingularWeights`]: `S` is sampled on the grid shifts
//! `η_m = m h` and the kernel singularity is integrated exactly.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::field::{derivative, derivative_n, forward_transform, resample, synthesize, Field, Grid};
use crate::quadrature::{sin_squared_integral, LatticeKernel, SingularWeights};

/// Default number of lattice images kept on each side.
pub const DEFAULT_LATTICE_CUTOFF: usize = 50;

fn check_alpha(alpha: f64, allow_two: bool) -> Result<()> {
    let ok = alpha > 0.0 && (alpha < 2.0 || (allow_two && alpha == 2.0));
    if !ok {
        let reason = if allow_two {
            "must lie in (0, 2]"
        } else {
            "must lie in (0, 2)"
        };
        return Err(param("alpha", alpha, reason));
    }
    Ok(())
}

/// `Λ^α f` through the multiplier `|k|^α`.
pub fn fractional_laplacian_spectral(f: &Field, alpha: f64) -> Result<Field> {
    check_alpha(alpha, true)?;
    let mut s = forward_transform(f);
    s.apply_symbol(|k| (k.unsigned_abs() as f64).powf(alpha));
    Ok(synthesize(&s))
}

/// `C(s, 1) = (∫_ℝ 4 sin²(x/2) / |x|^{1+2s} dx)^{-1}`.
pub fn normalization_constant(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(param("s", s, "must lie in (0, 1)"));
    }
    Ok(1.0 / sin_squared_integral(s, 1e-11))
}

/// `Λ^α f` from the periodized singular integral
/// `2C(α/2,1) ∫_{-π}^{π} (u(x) - u(x-η)) Σ_{|k|≤K} |η + 2kπ|^{-1-α} dη`.
///
/// The principal value is taken by pairing `η` with `-η`, giving the second
/// difference `2u(x) - u(x-η) - u(x+η) ~ -u''(x) η²`. Images beyond `K` enter
/// through a quadratic fit of their summed kernel.
pub fn fractional_laplacian_integral(f: &Field, alpha: f64, lattice_cutoff: usize) -> Result<Field> {
    check_alpha(alpha, false)?;
    if lattice_cutoff < 1 {
        return Err(param(
            "lattice_cutoff",
            lattice_cutoff as f64,
            "must be at least 1",
        ));
    }
    let grid = f.grid();
    let n = grid.n();
    let kernel = LatticeKernel {
        exponent: 1.0 + alpha,
        cutoff: lattice_cutoff,
        tail: true,
    };
    let weights = SingularWeights::new(n, 2.0, kernel);
    let c = normalization_constant(alpha / 2.0)?;
    let u = f.samples();
    let curvature = derivative_n(f, 2);
    let half = n / 2;
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut diffs = vec![0.0; half + 1];
            for (m, d) in diffs.iter_mut().enumerate().skip(1) {
                *d = 2.0 * u[j] - u[(j + n - m) % n] - u[(j + m) % n];
            }
            2.0 * c * weights.apply(-curvature.samples()[j], &diffs)
        })
        .collect();
    Field::from_samples(grid, values)
}

/// `‖f‖_{Ḣ^s} = ‖Λ^s f‖_{L²} = (2π Σ_{k≠0} |k|^{2s} |f̂_k|²)^{1/2}`.
pub fn hs_seminorm(f: &Field, s: f64) -> f64 {
    let spec = forward_transform(f);
    (TAU * spec.weighted_power(|k| {
        if k == 0 {
            0.0
        } else {
            (k.unsigned_abs() as f64).powf(2.0 * s)
        }
    }))
    .sqrt()
}

fn check_slobodeckij(s: f64, p: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(param("s", s, "must lie in (0, 1)"));
    }
    if !(p >= 1.0) {
        return Err(param("p", p, "must be at least 1"));
    }
    Ok(())
}

fn slobodeckij_with_kernel(f: &Field, p: f64, kernel: LatticeKernel) -> f64 {
    let grid = f.grid();
    let n = grid.n();
    let h = grid.spacing();
    let u = f.samples();
    let half = n / 2;
    let weights = SingularWeights::new(n, p, kernel);
    // Σ(η_m) = ∫ |u(x) - u(x - η_m)|^p dx, even in η.
    let shifts: Vec<f64> = (0..=half)
        .into_par_iter()
        .map(|m| {
            if m == 0 {
                return 0.0;
            }
            (0..n)
                .map(|j| (u[j] - u[(j + n - m) % n]).abs().powf(p))
                .sum::<f64>()
                * h
        })
        .collect();
    let slope = derivative(f).lp_pow(p);
    (2.0 * weights.apply(slope, &shifts)).max(0.0).powf(1.0 / p)
}

/// `Ẇ^{s,p}` seminorm `(∫_𝕋∫_𝕋 |u(x) - u(y)|^p / d(x,y)^{1+sp} dx dy)^{1/p}` with
/// `d` the geodesic distance on the torus. The diagonal `x = y` is excluded
/// from the sampled pairs; its neighbourhood enters through the limit
/// `∫ |u'|^p dx`.
pub fn slobodeckij_seminorm(f: &Field, s: f64, p: f64) -> Result<f64> {
    check_slobodeckij(s, p)?;
    Ok(slobodeckij_with_kernel(
        f,
        p,
        LatticeKernel::nearest_image(1.0 + s * p),
    ))
}

/// Seminorm with the fully periodized kernel `Σ_k |x - y + 2πk|^{-1-sp}`, for
/// which `C(s,1) ‖u‖²_{Ẇ^{s,2}} = ‖u‖²_{Ḣ^s}` holds exactly on the torus.
pub fn periodic_slobodeckij_seminorm(
    f: &Field,
    s: f64,
    p: f64,
    lattice_cutoff: usize,
) -> Result<f64> {
    check_slobodeckij(s, p)?;
    Ok(slobodeckij_with_kernel(
        f,
        p,
        LatticeKernel {
            exponent: 1.0 + s * p,
            cutoff: lattice_cutoff,
            tail: true,
        },
    ))
}

fn check_band_limit(f: &Field) -> Result<()> {
    let spec = forward_transform(f);
    let quarter = (f.grid().n() / 4) as i64;
    let total = spec.weighted_power(|_| 1.0);
    let high = spec.weighted_power(|k| if k.abs() > quarter { 1.0 } else { 0.0 });
    if high > 1e-20 * total.max(1e-300) && high > 1e-28 {
        return Err(param(
            "f",
            high,
            "must be band-limited to n/4 modes (energy found above)",
        ));
    }
    Ok(())
}

/// `|C(s,1) ‖u‖²_{Ẇ^{s,2}} - ‖u‖²_{Ḣ^s}| / ‖u‖²_{Ḣ^s}` at each refinement level
/// `n, 2n, …, 2^{n_refinements} n` (trigonometric interpolation of `f`).
pub fn norm_equivalence_study(f: &Field, s: f64, n_refinements: usize) -> Result<Vec<(usize, f64)>> {
    check_slobodeckij(s, 2.0)?;
    check_band_limit(f)?;
    let c = normalization_constant(s)?;
    let mut out = Vec::with_capacity(n_refinements + 1);
    for level in 0..=n_refinements {
        let grid = Grid::new(f.grid().n() << level)?;
        let g = resample(f, &grid);
        let hs = hs_seminorm(&g, s).powi(2);
        if hs == 0.0 {
            return Err(Error::UndefinedRatio("Ḣ^s seminorm of the field vanishes"));
        }
        let w = periodic_slobodeckij_seminorm(&g, s, 2.0, DEFAULT_LATTICE_CUTOFF)?.powi(2);
        out.push((grid.n(), (c * w - hs).abs() / hs));
    }
    Ok(out)
}

/// Norm-equivalence residual at the finest level of [`norm_equivalence_study`].
pub fn norm_equivalence_residual(f: &Field, s: f64, n_refinements: usize) -> Result<f64> {
    let study = norm_equivalence_study(f, s, n_refinements)?;
    Ok(study.last().map(|(_, r)| *r).unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn max_abs_diff(a: &Field, b: &Field) -> f64 {
        a.samples()
            .iter()
            .zip(b.samples())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn spectral_examples() {
        let g = Grid::new(64).unwrap();
        let c = fractional_laplacian_spectral(&Field::constant(&g, 3.0), 0.7).unwrap();
        assert!(c.linf() < 1e-14);
        let cos = Field::from_fn(&g, f64::cos);
        let l = fractional_laplacian_spectral(&cos, 1.5).unwrap();
        assert!(max_abs_diff(&l, &cos) < 1e-13);
        let cos2 = Field::from_fn(&g, |x| (2.0 * x).cos());
        let l = fractional_laplacian_spectral(&cos2, 0.5).unwrap();
        let expect = Field::from_fn(&g, |x| 2f64.sqrt() * (2.0 * x).cos());
        assert!(max_abs_diff(&l, &expect) < 1e-13);
    }

    #[test]
    fn alpha_range_is_enforced() {
        let g = Grid::new(16).unwrap();
        let f = Field::constant(&g, 1.0);
        assert!(fractional_laplacian_spectral(&f, 0.0).is_err());
        assert!(fractional_laplacian_spectral(&f, 2.1).is_err());
        assert!(fractional_laplacian_spectral(&f, 2.0).is_ok());
        assert!(fractional_laplacian_integral(&f, 2.0, 5).is_err());
        assert!(fractional_laplacian_integral(&f, 1.0, 0).is_err());
        assert!(normalization_constant(1.0).is_err());
        assert!(normalization_constant(0.0).is_err());
    }

    #[test]
    fn normalization_constant_at_half() {
        let c = normalization_constant(0.5).unwrap();
        assert_abs_diff_eq!(c, 1.0 / (2.0 * PI), epsilon = 1e-10);
    }

    #[test]
    fn integral_path_annihilates_constants() {
        let g = Grid::new(64).unwrap();
        let z = fractional_laplacian_integral(&Field::constant(&g, 2.5), 1.2, 10).unwrap();
        assert!(z.linf() < 1e-12);
    }

    #[test]
    fn integral_matches_spectral_on_cosine() {
        let g = Grid::new(256).unwrap();
        let f = Field::from_fn(&g, f64::cos);
        let spec = fractional_laplacian_spectral(&f, 1.0).unwrap();
        let int = fractional_laplacian_integral(&f, 1.0, 50).unwrap();
        let rel = max_abs_diff(&spec, &int) / spec.linf();
        assert!(rel <= 1e-3, "relative error {rel}");
    }

    #[test]
    fn hs_examples() {
        let g = Grid::new(32).unwrap();
        assert_eq!(hs_seminorm(&Field::constant(&g, 4.0), 0.7), 0.0);
        let cos = Field::from_fn(&g, f64::cos);
        assert_abs_diff_eq!(hs_seminorm(&cos, 0.5), PI.sqrt(), epsilon = 1e-13);
        let cos2 = Field::from_fn(&g, |x| (2.0 * x).cos());
        assert_abs_diff_eq!(hs_seminorm(&cos2, 1.0), 2.0 * PI.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn slobodeckij_basic_properties() {
        let g = Grid::new(128).unwrap();
        assert_eq!(
            slobodeckij_seminorm(&Field::constant(&g, 1.3), 0.4, 1.5).unwrap(),
            0.0
        );
        let f = Field::from_fn(&g, |x| 1.0 + 0.4 * x.sin() + 0.1 * (3.0 * x).cos());
        let a = slobodeckij_seminorm(&f, 0.4, 1.5).unwrap();
        let b = slobodeckij_seminorm(&f.shifted(1), 0.4, 1.5).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
        let scaled = f.map(|v| 3.0 * v);
        let c = slobodeckij_seminorm(&scaled, 0.4, 1.5).unwrap();
        assert!((c - 3.0 * a).abs() <= 1e-12 * c);
        assert!(slobodeckij_seminorm(&f, 1.0, 2.0).is_err());
        assert!(slobodeckij_seminorm(&f, 0.5, 0.5).is_err());
    }

    #[test]
    fn periodic_slobodeckij_of_cosine() {
        // C(1/2,1) = 1/(2π) and ‖cos‖²_{Ḣ^{1/2}} = π, so the squared seminorm is 2π².
        let g = Grid::new(256).unwrap();
        let f = Field::from_fn(&g, f64::cos);
        let w = periodic_slobodeckij_seminorm(&f, 0.5, 2.0, 50).unwrap();
        let target = 2.0 * PI * PI;
        assert!(((w * w) - target).abs() / target < 0.05);
    }

    #[test]
    fn residual_rejects_zero_and_wide_band() {
        let g = Grid::new(32).unwrap();
        assert!(matches!(
            norm_equivalence_residual(&Field::constant(&g, 2.0), 0.5, 0),
            Err(Error::UndefinedRatio(_))
        ));
        let wide = Field::from_fn(&g, |x| (12.0 * x).cos());
        assert!(norm_equivalence_residual(&wide, 0.5, 0).is_err());
    }
}
