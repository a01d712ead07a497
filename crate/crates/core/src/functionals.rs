//! Entropy, generalized Fisher information, the profile `Θ` and the Lyapunov
//! functional `∫Θ(u) + ½∫q²`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{derivative, Field};
use crate::fraclap::{fractional_laplacian_spectral, hs_seminorm, normalization_constant};
use crate::kinetics::KineticFunction;
use crate::quadrature::{integrate, LatticeKernel, SingularWeights};

/// Increasing function `Γ` paired with the Fisher information, with the
/// constant `c` in `Γ'(z) ≥ c / z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaFunction {
    Log,
    Identity,
    /// `Γ(z) = z^s`, `s > 0`.
    Power { s: f64 },
}

impl GammaFunction {
    pub fn power(s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(param("s", s, "must be positive"));
        }
        Ok(GammaFunction::Power { s })
    }

    pub fn value(&self, z: f64) -> f64 {
        match self {
            GammaFunction::Log => z.ln(),
            GammaFunction::Identity => z,
            GammaFunction::Power { s } => z.powf(*s),
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            GammaFunction::Log => 1.0 / z,
            GammaFunction::Identity => 1.0,
            GammaFunction::Power { s } => s * z.powf(s - 1.0),
        }
    }

    pub fn lower_c(&self) -> f64 {
        match self {
            GammaFunction::Log => 1.0,
            GammaFunction::Identity | GammaFunction::Power { .. } => 0.0,
        }
    }

    /// Whether `Γ` needs strictly positive arguments.
    fn needs_positive(&self) -> bool {
        !matches!(self, GammaFunction::Identity)
    }
}

impl fmt::Display for GammaFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaFunction::Log => write!(f, "log"),
            GammaFunction::Identity => write!(f, "identity"),
            GammaFunction::Power { s } => write!(f, "power:s={s}"),
        }
    }
}

/// Parses `log`, `identity` or `power:s=<real>`.
impl FromStr for GammaFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "log" => Ok(GammaFunction::Log),
            "identity" => Ok(GammaFunction::Identity),
            other => {
                let value = other
                    .strip_prefix("power:s=")
                    .ok_or_else(|| Error::Parse(format!("unknown gamma function `{other}`")))?;
                let v = value
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad exponent `{value}`")))?;
                GammaFunction::power(v)
            }
        }
    }
}

pub(crate) fn check_positive(u: &Field) -> Result<()> {
    match u.samples().iter().position(|v| !(*v > 0.0)) {
        Some(index) => Err(Error::Positivity {
            index,
            value: u.samples()[index],
        }),
        None => Ok(()),
    }
}

/// `∫ u log u dx`.
pub fn shannon_entropy(u: &Field) -> Result<f64> {
    check_positive(u)?;
    Ok(u.samples().iter().map(|v| v * v.ln()).sum::<f64>() * u.grid().spacing())
}

/// `∫ Λ^α u · Γ(u) dx` with `Λ^α` applied spectrally.
pub fn fisher_information(u: &Field, alpha: f64, gamma: GammaFunction) -> Result<f64> {
    if gamma.needs_positive() {
        check_positive(u)?;
    }
    let lu = fractional_laplacian_spectral(u, alpha)?;
    Ok(lu
        .samples()
        .iter()
        .zip(u.samples())
        .map(|(l, v)| l * gamma.value(*v))
        .sum::<f64>()
        * u.grid().spacing())
}

/// Fisher information from the symmetrized double integral
///
/// ```text
///     C(α/2,1) ∫∫ (u(x) - u(y)) (Γ(u(x)) - Γ(u(y))) Σ_{|k|≤K} |x - y + 2πk|^{-1-α} dy dx,
/// ```
///
/// with the images beyond `K` folded into the kernel as in the singular
/// integral form of `Λ^α`. Every sampled product and every quadrature weight
/// is nonnegative, so the result is nonnegative without tolerance.
pub fn fisher_symmetric_form(
    u: &Field,
    alpha: f64,
    gamma: GammaFunction,
    lattice_cutoff: usize,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(param("alpha", alpha, "must lie in (0, 2)"));
    }
    if lattice_cutoff < 1 {
        return Err(param(
            "lattice_cutoff",
            lattice_cutoff as f64,
            "must be at least 1",
        ));
    }
    if gamma.needs_positive() {
        check_positive(u)?;
    }
    let grid = u.grid();
    let n = grid.n();
    let h = grid.spacing();
    let v = u.samples();
    let g: Vec<f64> = v.iter().map(|x| gamma.value(*x)).collect();
    let half = n / 2;
    let products: Vec<f64> = (0..=half)
        .into_par_iter()
        .map(|m| {
            if m == 0 {
                return 0.0;
            }
            (0..n)
                .map(|j| {
                    let i = (j + n - m) % n;
                    (v[j] - v[i]) * (g[j] - g[i])
                })
                .sum::<f64>()
                * h
        })
        .collect();
    let slope = derivative(u);
    let g0 = slope
        .samples()
        .iter()
        .zip(v)
        .map(|(d, x)| d * d * gamma.derivative(*x))
        .sum::<f64>()
        * h;
    let kernel = LatticeKernel {
        exponent: 1.0 + alpha,
        cutoff: lattice_cutoff,
        tail: true,
    };
    let weights = SingularWeights::new(n, 2.0, kernel);
    let c = normalization_constant(alpha / 2.0)?;
    Ok(2.0 * c * weights.apply(g0, &products))
}

fn check_theta_arg(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain {
            value: s,
            domain: "(0, inf)",
        });
    }
    Ok(())
}

/// `Θ'(s) = ∫_1^s f'(χ)/χ dχ`.
pub fn theta_prime(f: &KineticFunction, s: f64) -> Result<f64> {
    check_theta_arg(s)?;
    Ok(match f {
        KineticFunction::PowerLaw { r } if *r == 1.0 => s.ln(),
        KineticFunction::PowerLaw { r } => (s.powf(r - 1.0) - 1.0) / (r - 1.0),
        KineticFunction::Polynomial { coeffs } => {
            let mut acc = coeffs.get(1).map_or(0.0, |c1| c1 * s.ln());
            for (i, c) in coeffs.iter().enumerate().skip(2) {
                let m = (i - 1) as f64;
                acc += i as f64 * c * (s.powf(m) - 1.0) / m;
            }
            acc
        }
    })
}

/// `Θ(s) = ∫_1^s ∫_1^ξ f'(χ)/χ dχ dξ` in closed form; [`theta_quadrature`]
/// evaluates the defining integral directly.
pub fn theta_profile(f: &KineticFunction, s: f64) -> Result<f64> {
    check_theta_arg(s)?;
    Ok(match f {
        KineticFunction::PowerLaw { r } if *r == 1.0 => s * s.ln() - s + 1.0,
        KineticFunction::PowerLaw { r } => {
            let r = *r;
            s.powf(r) / (r * (r - 1.0)) - s / (r - 1.0) - (1.0 / (r * (r - 1.0)) - 1.0 / (r - 1.0))
        }
        KineticFunction::Polynomial { coeffs } => {
            let mut acc = coeffs.get(1).map_or(0.0, |c1| c1 * (s * s.ln() - s + 1.0));
            for (i, c) in coeffs.iter().enumerate().skip(2) {
                let k = i as f64;
                acc += k * c / (k - 1.0) * ((s.powf(k) - 1.0) / k - (s - 1.0));
            }
            acc
        }
    })
}

const THETA_TOL: f64 = 1e-10;

fn theta_prime_quadrature(f: &KineticFunction, s: f64) -> f64 {
    integrate(|chi| f.eval(1, chi) / chi, 1.0, s, THETA_TOL).value
}

/// Nested adaptive quadrature of the defining double integral of `Θ`.
pub fn theta_quadrature(f: &KineticFunction, s: f64) -> f64 {
    integrate(|xi| theta_prime_quadrature(f, xi), 1.0, s, THETA_TOL).value
}

/// `∫ Θ(u) dx + ½ ∫ q² dx`.
pub fn lyapunov(u: &Field, q: &Field, f: &KineticFunction) -> Result<f64> {
    check_positive(u)?;
    u.grid().check_same(q.grid())?;
    let mut theta = 0.0;
    for v in u.samples() {
        theta += theta_profile(f, *v)?;
    }
    Ok(theta * u.grid().spacing() + 0.5 * q.dot(q))
}

/// Dissipation rate `∫ Λ^α u · Θ'(u) dx`.
pub fn dissipation_rate(u: &Field, alpha: f64, f: &KineticFunction) -> Result<f64> {
    check_positive(u)?;
    let lu = fractional_laplacian_spectral(u, alpha)?;
    let mut acc = 0.0;
    for (l, v) in lu.samples().iter().zip(u.samples()) {
        acc += l * theta_prime(f, *v)?;
    }
    Ok(acc * u.grid().spacing())
}

/// `‖u - ⟨u⟩‖_∞ / (‖u‖_{Ḣ^{α/2}}^{2/(1+α)} ‖u‖_{L¹}^{1-2/(1+α)})`, with `0/0 = 0`.
pub fn sup_interpolation_residual(u: &Field, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(param("alpha", alpha, "must lie in (1, 2]"));
    }
    if let Some(index) = u.samples().iter().position(|v| *v < 0.0) {
        return Err(Error::Positivity {
            index,
            value: u.samples()[index],
        });
    }
    let l1 = u.l1();
    if l1 == 0.0 {
        return Err(Error::UndefinedRatio("field vanishes identically"));
    }
    let mean = crate::field::mean(u);
    let num = u.samples().iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    let theta = 2.0 / (1.0 + alpha);
    let den = hs_seminorm(u, alpha / 2.0).powf(theta) * l1.powf(1.0 - theta);
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::kinetics::power_law;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{E, PI, TAU};

    #[test]
    fn entropy_examples() {
        let grid = Grid::new(16).unwrap();
        assert_eq!(shannon_entropy(&Field::constant(&grid, 1.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            shannon_entropy(&Field::constant(&grid, E)).unwrap(),
            TAU * E,
            epsilon = 1e-13
        );
        let bad = Field::from_fn(&grid, |x| x.cos());
        assert!(matches!(shannon_entropy(&bad), Err(Error::Positivity { .. })));
    }

    #[test]
    fn gamma_parsing() {
        assert_eq!("log".parse::<GammaFunction>().unwrap(), GammaFunction::Log);
        assert_eq!(
            "power:s=0.5".parse::<GammaFunction>().unwrap(),
            GammaFunction::Power { s: 0.5 }
        );
        assert!("power:s=-1".parse::<GammaFunction>().is_err());
        assert!("exp".parse::<GammaFunction>().is_err());
        for g in [GammaFunction::Log, GammaFunction::Identity, GammaFunction::Power { s: 0.25 }] {
            assert_eq!(g.to_string().parse::<GammaFunction>().unwrap(), g);
        }
    }

    #[test]
    fn gamma_lower_bound_holds() {
        for g in [GammaFunction::Log, GammaFunction::Identity, GammaFunction::Power { s: 0.5 }] {
            for i in 1..=100 {
                let z = i as f64 * 0.05;
                assert!(g.derivative(z) > 0.0);
                assert!(g.derivative(z) * z >= g.lower_c() - 1e-15);
            }
        }
    }

    #[test]
    fn fisher_of_constant_is_zero() {
        let grid = Grid::new(32).unwrap();
        let u = Field::constant(&grid, 3.0);
        assert_eq!(fisher_information(&u, 1.0, GammaFunction::Log).unwrap(), 0.0);
        assert_eq!(
            fisher_symmetric_form(&u, 1.0, GammaFunction::Log, 5).unwrap(),
            0.0
        );
    }

    #[test]
    fn theta_examples() {
        let f = power_law(2.0).unwrap();
        assert_abs_diff_eq!(theta_profile(&f, 3.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(theta_profile(&f, 1.0).unwrap(), 0.0);
        let f = power_law(1.0).unwrap();
        assert_abs_diff_eq!(theta_profile(&f, E).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(theta_profile(&f, 1.0).unwrap(), 0.0);
        assert!(theta_profile(&f, 0.0).is_err());
        assert!(theta_profile(&f, -1.0).is_err());
    }

    #[test]
    fn lyapunov_examples() {
        let grid = Grid::new(64).unwrap();
        let f = power_law(2.0).unwrap();
        let one = Field::constant(&grid, 1.0);
        let zero = Field::zeros(&grid);
        assert_eq!(lyapunov(&one, &zero, &f).unwrap(), 0.0);
        let q = Field::from_fn(&grid, |x| x.sin());
        assert_abs_diff_eq!(lyapunov(&one, &q, &f).unwrap(), PI / 2.0, epsilon = 1e-13);
        let u = Field::from_fn(&grid, |x| 2.0 + x.cos());
        assert_abs_diff_eq!(lyapunov(&u, &zero, &f).unwrap(), 1.5 * PI, epsilon = 1e-13);
    }

    #[test]
    fn interpolation_residual_edge_cases() {
        let grid = Grid::new(32).unwrap();
        assert_eq!(
            sup_interpolation_residual(&Field::constant(&grid, 2.0), 1.5).unwrap(),
            0.0
        );
        assert!(matches!(
            sup_interpolation_residual(&Field::zeros(&grid), 1.5),
            Err(Error::UndefinedRatio(_))
        ));
        assert!(sup_interpolation_residual(&Field::constant(&grid, 2.0), 1.0).is_err());
    }
}
