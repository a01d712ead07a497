//! Quadrature kernels shared by the fractional operators and functionals.

use std::f64::consts::{PI, TAU};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 8-point Gauss–Legendre on [-1, 1].
const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]` with bisection
/// until the local error estimate meets the share of `abs_tol` owned by the
/// interval. The interval endpoints are never evaluated.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Quad {
    let mut value = 0.0;
    let mut error = 0.0;
    let mut stack = vec![(a, b, abs_tol, 0u32)];
    while let Some((lo, hi, tol, depth)) = stack.pop() {
        let (v, e) = gk15(&f, lo, hi);
        if e <= tol || depth >= 48 || (hi - lo).abs() < 1e-14 * (1.0 + lo.abs()) {
            value += v;
            error += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * tol, depth + 1));
            stack.push((lo, mid, 0.5 * tol, depth + 1));
        }
    }
    Quad { value, error }
}

/// `Σ_{k=N}^∞ k^{-s}` for `s > 1`, `N >= 1`: ten explicit terms followed by an
/// Euler–Maclaurin remainder.
pub fn hurwitz_tail(s: f64, start: u64) -> f64 {
    assert!(s > 1.0 && start >= 1);
    let mut sum = 0.0;
    let direct = 20;
    for k in start..start + direct {
        sum += (k as f64).powf(-s);
    }
    let m = (start + direct) as f64;
    let ms = m.powf(-s);
    sum += m.powf(1.0 - s) / (s - 1.0) + 0.5 * ms + s * ms / m / 12.0
        - s * (s + 1.0) * (s + 2.0) * ms / m.powi(3) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * ms / m.powi(5) / 30240.0
        - (0..7).map(|i| s + i as f64).product::<f64>() * ms / m.powi(7) / 1_209_600.0;
    sum
}

/// Periodized kernel `Σ_{|k|≤K} |η + 2πk|^{-a}` split as `η^{-a} + smooth(η)`.
///
/// `smooth` includes the images `0 < |k| ≤ K` and, when `tail` is set, the
/// images beyond `K` through their expansion to second order in `η`.
#[derive(Clone, Copy, Debug)]
pub struct LatticeKernel {
    pub exponent: f64,
    pub cutoff: usize,
    pub tail: bool,
}

impl LatticeKernel {
    pub fn nearest_image(exponent: f64) -> Self {
        Self {
            exponent,
            cutoff: 0,
            tail: false,
        }
    }

    /// Coefficients `(c0, c2)` with `Σ_{|k|>K} |η + 2πk|^{-a} ≈ c0 + c2 η²`:
    /// `c0 = 2 (2π)^{-a} ζ(a, K+1)`, `c2 = a(a+1) (2π)^{-a-2} ζ(a+2, K+1)`.
    pub fn tail_coefficients(&self) -> (f64, f64) {
        if !self.tail {
            return (0.0, 0.0);
        }
        let a = self.exponent;
        let start = self.cutoff as u64 + 1;
        (
            2.0 * TAU.powf(-a) * hurwitz_tail(a, start),
            a * (a + 1.0) * TAU.powf(-a - 2.0) * hurwitz_tail(a + 2.0, start),
        )
    }

    /// Smooth part of the kernel at `η ∈ [0, π]`.
    pub fn smooth(&self, eta: f64, tail: (f64, f64)) -> f64 {
        let a = self.exponent;
        let mut acc = 0.0;
        for k in 1..=self.cutoff {
            let shift = TAU * k as f64;
            acc += (shift + eta).powf(-a) + (shift - eta).powf(-a);
        }
        acc + tail.0 + tail.1 * eta * eta
    }

    /// Upper bound for the integrand mass dropped by truncating the lattice at
    /// `K`, for a difference bounded by `2 sup|u|`: images beyond `K` sit at
    /// distance at least `2π(|k|-1)`.
    pub fn truncation_bound(&self, sup: f64) -> f64 {
        let k = (self.cutoff as u64).max(1);
        2.0 * TAU.powf(-self.exponent) * hurwitz_tail(self.exponent, k) * 4.0 * sup * TAU
    }
}

/// Product-integration weights for `∫_0^π S(η) K(η) dη` where `S(η) = η^q g(η)`
/// with smooth `g`, sampled at `η_m = m h`, `m = 0..=n/2`, and `K` a
/// [`LatticeKernel`].
///
/// The integrand is written as `η^{q-a} G(η)` with `G` smooth, `G` is
/// interpolated by piecewise quadratics on pairs of cells and the singular
/// factor `η^{q-a}` is integrated exactly against each Lagrange basis function.
/// The first pair uses closed-form moments; the others use 8-point
/// Gauss–Legendre, where `η^{q-a}` is analytic.
#[derive(Clone, Debug)]
pub struct SingularWeights {
    /// Weight of `g(0)`.
    pub origin: f64,
    /// `per_sample[m]` multiplies `S(η_m)`; index 0 is unused.
    pub per_sample: Vec<f64>,
}

impl SingularWeights {
    pub fn new(n: usize, leading_power: f64, kernel: LatticeKernel) -> Self {
        let half = n / 2;
        let h = TAU / n as f64;
        let beta = leading_power - kernel.exponent;
        assert!(beta > -1.0, "kernel not integrable against the leading power");
        assert!(half.is_multiple_of(2));

        // Weights ω_m for ∫_0^π η^β G(η) dη ≈ Σ ω_m G(η_m).
        let mut omega = vec![0.0; half + 1];
        // Pair [0, 2h]: basis in t = η/h, moments of η^β t^p are closed form.
        let mom = |p: f64| h.powf(beta + 1.0) * 2f64.powf(beta + p + 1.0) / (beta + p + 1.0);
        let (m0, m1, m2) = (mom(0.0), mom(1.0), mom(2.0));
        omega[0] += 0.5 * (m2 - 3.0 * m1 + 2.0 * m0);
        omega[1] += -(m2 - 2.0 * m1);
        omega[2] += 0.5 * (m2 - m1);
        for pair in 1..half / 2 {
            let a = 2 * pair;
            let centre = (a as f64 + 1.0) * h;
            for (x, w) in GL8_X.iter().zip(GL8_W) {
                for sign in [-1.0, 1.0] {
                    let eta = centre + sign * x * h;
                    let t = (eta - a as f64 * h) / h;
                    let base = w * h * eta.powf(beta);
                    omega[a] += base * 0.5 * (t - 1.0) * (t - 2.0);
                    omega[a + 1] += base * (-t * (t - 2.0));
                    omega[a + 2] += base * 0.5 * t * (t - 1.0);
                }
            }
        }

        let tail = kernel.tail_coefficients();
        let a = kernel.exponent;
        let q = leading_power;
        let mut per_sample = vec![0.0; half + 1];
        for m in 1..=half {
            let eta = m as f64 * h;
            let factor = eta.powf(-q) + eta.powf(a - q) * kernel.smooth(eta, tail);
            per_sample[m] = omega[m] * factor;
        }
        Self {
            origin: omega[0],
            per_sample,
        }
    }

    /// Applies the weights to samples `S(η_m)` (`samples[0]` ignored) and the
    /// limit `g(0) = lim S(η)/η^q`.
    pub fn apply(&self, g0: f64, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.per_sample.len());
        let mut acc = self.origin * g0;
        for (w, s) in self.per_sample.iter().zip(samples).skip(1) {
            acc += w * s;
        }
        acc
    }
}

/// `∫_ℝ 4 sin²(x/2) / |x|^{1+2s} dx` for `0 < s < 1`.
///
/// Split at `|x| = 1`. Near the origin the integrand is `x^{1-2s} sinc²(x/2)`,
/// integrated after the substitution `x = t^{1/(2-2s)}`. Beyond 1 the
/// non-oscillatory part `2 x^{-1-2s}` integrates in closed form, the cosine part
/// is integrated period by period up to `X = 64π` and its remainder is taken
/// from the asymptotic expansion of `∫_X^∞ e^{ix} x^{-a} dx`.
pub fn sin_squared_integral(s: f64, abs_tol: f64) -> f64 {
    let p = 2.0 - 2.0 * s;
    let sinc2 = |x: f64| {
        if x < 1e-8 {
            1.0 - x * x / 12.0
        } else {
            let y = (0.5 * x).sin() / (0.5 * x);
            y * y
        }
    };
    let near = integrate(|t| sinc2(t.powf(1.0 / p)), 0.0, 1.0, 0.1 * abs_tol).value / p;

    let a = 1.0 + 2.0 * s;
    let envelope = 1.0 / s; // ∫_1^∞ 2 x^{-a} dx
    let periods = 64usize;
    let x_max = PI * periods as f64;
    let mut osc = integrate(|x| x.cos() * x.powf(-a), 1.0, PI, 0.01 * abs_tol).value;
    for j in 1..periods {
        let lo = PI * j as f64;
        osc += integrate(|x| x.cos() * x.powf(-a), lo, lo + PI, 0.01 * abs_tol / periods as f64)
            .value;
    }
    // ∫_X^∞ e^{ix} x^{-a} dx ~ i e^{iX} Σ_k (-i)^k (a)_k X^{-a-k}
    let mut term_re = 0.0;
    let mut term_im = 0.0;
    let mut rising = 1.0;
    for k in 0..16 {
        let mag = rising * x_max.powf(-a - k as f64);
        // (-i)^k
        let (cr, ci) = match k % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, -1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, 1.0),
        };
        term_re += cr * mag;
        term_im += ci * mag;
        rising *= a + k as f64;
    }
    // i e^{iX} (term_re + i term_im), real part.
    let (sx, cx) = x_max.sin_cos();
    osc -= sx * term_re + cx * term_im;

    2.0 * (near + envelope - 2.0 * osc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_kronrod_polynomials_and_singularity() {
        let q = integrate(|x| x * x * x - x, 0.0, 2.0, 1e-13);
        assert_relative_eq!(q.value, 2.0, epsilon = 1e-13);
        let q = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10);
        assert_relative_eq!(q.value, 2.0, epsilon = 1e-8);
        let q = integrate(f64::sin, 0.0, PI, 1e-12);
        assert_relative_eq!(q.value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn hurwitz_matches_basel() {
        let z = hurwitz_tail(2.0, 1);
        assert_relative_eq!(z, PI * PI / 6.0, epsilon = 1e-12);
        let z4 = hurwitz_tail(4.0, 1);
        assert_relative_eq!(z4, PI.powi(4) / 90.0, epsilon = 1e-12);
        // ζ(2, 3) = ζ(2) - 1 - 1/4
        assert_relative_eq!(hurwitz_tail(2.0, 3), PI * PI / 6.0 - 1.25, epsilon = 1e-12);
    }

    #[test]
    fn sin_squared_integral_at_half() {
        // ∫ 4 sin²(x/2)/x² dx = 2π.
        assert_relative_eq!(sin_squared_integral(0.5, 1e-11), TAU, epsilon = 1e-10);
    }

    #[test]
    fn singular_weights_integrate_powers() {
        // S(η) = η² (g ≡ 1) against the nearest-image kernel η^{-1-α}:
        // ∫_0^π η^{1-α} dη = π^{2-α}/(2-α).
        for alpha in [0.3, 1.0, 1.5, 1.9] {
            let n = 64;
            let w = SingularWeights::new(n, 2.0, LatticeKernel::nearest_image(1.0 + alpha));
            let h = TAU / n as f64;
            let s: Vec<f64> = (0..=n / 2).map(|m| (m as f64 * h).powi(2)).collect();
            let exact = PI.powf(2.0 - alpha) / (2.0 - alpha);
            assert_relative_eq!(w.apply(1.0, &s), exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn singular_weights_smooth_factor_converges() {
        // S(η) = η² cos η, β = 1 - α: compare against adaptive quadrature.
        let alpha = 1.3;
        let exact = integrate(|e| e.powf(1.0 - alpha) * e.cos(), 0.0, PI, 1e-13).value;
        let err = |n: usize| {
            let w = SingularWeights::new(n, 2.0, LatticeKernel::nearest_image(1.0 + alpha));
            let h = TAU / n as f64;
            let s: Vec<f64> = (0..=n / 2)
                .map(|m| {
                    let e = m as f64 * h;
                    e * e * e.cos()
                })
                .collect();
            (w.apply(1.0, &s) - exact).abs()
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e2 < e1 / 6.0, "{e1} {e2}");
        assert!(e2 < 1e-6);
    }
}
