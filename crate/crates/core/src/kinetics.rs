//! Kinetic functions `f` driving the `q` equation, and a sampled admissibility
//! check: `f' > 0` on the positives and `γ ≤ y / f'(y) ≤ γ̃` on compact
//! intervals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Arguments at or below this value are outside the domain `(-1, ∞)`.
pub const DOMAIN_FLOOR: f64 = -1.0 + 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KineticFunction {
    /// `f(y) = y^r / r`, extended to negative `y` as an odd function.
    PowerLaw { r: f64 },
    /// `f(y) = Σ c_i y^i`.
    Polynomial { coeffs: Vec<f64> },
}

pub fn power_law(r: f64) -> Result<KineticFunction> {
    if !(1.0..=2.0).contains(&r) {
        return Err(param("r", r, "must lie in [1, 2]"));
    }
    Ok(KineticFunction::PowerLaw { r })
}

pub fn polynomial(coeffs: Vec<f64>) -> Result<KineticFunction> {
    if coeffs.is_empty() {
        return Err(Error::Parse("polynomial needs at least one coefficient".into()));
    }
    if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
        return Err(param("coeffs", *c, "must be finite"));
    }
    Ok(KineticFunction::Polynomial { coeffs })
}

/// `d^k/dy^k y^r` for `y > 0`.
fn power_derivative(r: f64, k: u32, y: f64) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c *= r - i as f64;
    }
    if c == 0.0 {
        return 0.0;
    }
    c * y.powf(r - k as f64)
}

impl KineticFunction {
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// `f^{(order)}(y)` without the domain guard.
    pub fn eval(&self, order: u32, y: f64) -> f64 {
        match self {
            KineticFunction::PowerLaw { r } => {
                let r = *r;
                // Odd extension: derivatives of odd order are even in y.
                let sign = if y < 0.0 && order.is_multiple_of(2) { -1.0 } else { 1.0 };
                let a = y.abs();
                if a == 0.0 {
                    let k = order as f64;
                    return if r == k {
                        (1..order).map(|i| i as f64).product::<f64>()
                    } else if r > k || power_derivative(r, order, 1.0) == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                }
                sign * power_derivative(r, order, a) / r
            }
            KineticFunction::Polynomial { coeffs } => {
                let order = order as usize;
                let mut acc = 0.0;
                for (i, c) in coeffs.iter().enumerate().skip(order).rev() {
                    let falling: f64 = ((i - order + 1)..=i).map(|m| m as f64).product();
                    acc = acc * y + c * falling;
                }
                acc
            }
        }
    }

    pub fn derivative(&self, order: u32, y: f64) -> Result<f64> {
        if !(y > DOMAIN_FLOOR) {
            return Err(Error::Domain {
                value: y,
                domain: "(-1, inf)",
            });
        }
        Ok(self.eval(order, y))
    }

    pub fn value(&self, y: f64) -> Result<f64> {
        self.derivative(0, y)
    }

    /// The exponent `r` for power laws.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            KineticFunction::PowerLaw { r } => Some(*r),
            KineticFunction::Polynomial { .. } => None,
        }
    }
}

impl fmt::Display for KineticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KineticFunction::PowerLaw { r } => write!(f, "power:r={r}"),
            KineticFunction::Polynomial { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "f={}", parts.join(","))
            }
        }
    }
}

/// Parses `power:r=<real>` or `f=<c0,c1,...>`.
impl FromStr for KineticFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let real = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{t}` in kinetic spec `{s}`")))
        };
        if let Some(rest) = s.strip_prefix("power:") {
            let value = rest
                .trim()
                .strip_prefix("r=")
                .ok_or_else(|| Error::Parse(format!("expected `power:r=<real>`, got `{s}`")))?;
            return power_law(real(value)?);
        }
        if let Some(rest) = s.strip_prefix("f=") {
            let coeffs = rest.split(',').map(real).collect::<Result<Vec<_>>>()?;
            return polynomial(coeffs);
        }
        Err(Error::Parse(format!(
            "unknown kinetic spec `{s}` (expected `power:r=<real>` or `f=<c0,c1,...>`)"
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub interval: [f64; 2],
    /// `min y / f'(y)` over the samples.
    pub gamma_lower: f64,
    /// `max y / f'(y)` over the samples.
    pub gamma_upper: f64,
    /// `sup |f^{(k)}|` for `k = 1..=4` over the samples.
    pub derivative_sup_norms: [f64; 4],
    pub monotone: bool,
    /// `min f'` over `[0, b]` when positive.
    pub uniform_lower_c1: Option<f64>,
}

/// Half the points evenly spaced, half log-spaced towards the left end.
fn sample_points(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let linear = samples / 2;
    let log = samples - linear;
    let mut ys = Vec::with_capacity(samples + 2);
    for i in 0..linear {
        ys.push(lo + (hi - lo) * i as f64 / (linear - 1).max(1) as f64);
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    for i in 0..log {
        ys.push((l0 + (l1 - l0) * i as f64 / (log - 1).max(1) as f64).exp());
    }
    ys.push(lo);
    ys.push(hi);
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    ys
}

pub fn admissibility_report(
    f: &KineticFunction,
    a: f64,
    b: f64,
    samples: usize,
) -> Result<AdmissibilityReport> {
    if !(a >= 0.0) {
        return Err(param("a", a, "must be nonnegative"));
    }
    if !(b > a) || !b.is_finite() {
        return Err(param("b", b, "must be finite and exceed a"));
    }
    if samples < 100 {
        return Err(param("samples", samples as f64, "must be at least 100"));
    }
    let lo = a.max(1e-9);
    let ys = sample_points(lo, b, samples);

    let mut gamma_lower = f64::INFINITY;
    let mut gamma_upper = f64::NEG_INFINITY;
    let mut sups = [0.0f64; 4];
    for &y in &ys {
        let d1 = f.derivative(1, y)?;
        if !(d1 > 0.0) {
            return Err(Error::NonAdmissible {
                witness: y,
                derivative: d1,
            });
        }
        let ratio = y / d1;
        gamma_lower = gamma_lower.min(ratio);
        gamma_upper = gamma_upper.max(ratio);
        for (k, sup) in sups.iter_mut().enumerate() {
            *sup = sup.max(f.derivative(k as u32 + 1, y)?.abs());
        }
    }

    // The uniform bound is over [0, b], so include the origin and the gap below a.
    let mut c1 = f.derivative(1, 0.0)?;
    if lo > 1e-9 {
        for y in sample_points(1e-9, lo, samples) {
            c1 = c1.min(f.derivative(1, y)?);
        }
    }
    for &y in &ys {
        c1 = c1.min(f.derivative(1, y)?);
    }

    Ok(AdmissibilityReport {
        interval: [a, b],
        gamma_lower,
        gamma_upper,
        derivative_sup_norms: sups,
        monotone: true,
        uniform_lower_c1: (c1 > 0.0).then_some(c1),
    })
}
