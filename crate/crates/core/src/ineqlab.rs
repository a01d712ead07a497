//! Randomized checks of the Fisher-information lower bounds.
//!
//! Each check draws positive band-limited fields, evaluates both sides of an
//! inequality without its constant and records `LHS / RHS`. The largest ratio
//! is an empirical lower bound for the constant. Sample `i` draws from the
//! ChaCha8 stream `i` of the run seed, so any sample can be regenerated alone
//! and a run with more samples extends a run with fewer.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{forward_transform, random_smooth_field_with, Field, Grid, SmoothFieldParams};
use crate::fraclap::{hs_seminorm, slobodeckij_seminorm};
use crate::functionals::{fisher_information, GammaFunction};
use crate::sci17;

/// Grid size used by the lab.
pub const LAB_GRID: usize = 128;
/// Absolute sign tolerance, multiplied by the field's spectral magnitude.
pub const SIGN_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    /// `‖u‖²_{Ḣ^{α/2}} ≤ C ‖u‖_∞ ∫Λ^α u Γ(u)`.
    Lemma1Hs,
    /// `‖u‖²_{Ẇ^{α/2-δ,1}} ≤ C ‖u‖_{L¹} ∫Λ^α u Γ(u)`.
    Lemma1W,
    /// `‖u‖_{Ḣ^{α/2}}^{2-2/(1+α)} ≤ C ‖u‖_{L¹}^{1-2/(1+α)} (∫Λ^α u Γ(u) + ‖u‖_{L¹})`.
    Lemma2Torus,
    /// `‖u‖^{2+2s}_{Ẇ^{α/(2+2s)-δ,1+s}} ≤ C ‖u‖^{1+s}_{L^{1+s}} ∫Λ^α u u^s`.
    LemmaB2,
    /// `‖u - ⟨u⟩‖_∞ ≤ C ‖u‖_{Ḣ^{α/2}}^{2/(1+α)} ‖u‖_{L¹}^{1-2/(1+α)}`.
    Interpolation,
}

impl InequalityId {
    pub fn as_str(&self) -> &'static str {
        match self {
            InequalityId::Lemma1Hs => "lemma1_hs",
            InequalityId::Lemma1W => "lemma1_w",
            InequalityId::Lemma2Torus => "lemma2_torus",
            InequalityId::LemmaB2 => "lemma_b2",
            InequalityId::Interpolation => "interpolation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub alpha: f64,
    pub delta: Option<f64>,
    pub s_exp: Option<f64>,
    pub gamma: GammaFunction,
    /// `c` in `Γ'(z) ≥ c/z`, recorded next to every estimate.
    pub gamma_lower_c: f64,
}

/// Sample attaining the largest ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub seed: u64,
    pub stream: u64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub stream: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// The Fisher-type integral whose sign is checked.
    pub integral: f64,
    pub tolerance: f64,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub inequality_id: InequalityId,
    pub parameters: Parameters,
    pub sampler: SmoothFieldParams,
    pub n: usize,
    pub seed: u64,
    pub sample_count: usize,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub min_rhs_witness: Option<Witness>,
    pub violations: usize,
    pub samples: Vec<Sample>,
}

impl InequalityReport {
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn write_samples_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "sample,lhs,rhs,ratio,integral,violation")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.stream,
                sci17(s.lhs),
                sci17(s.rhs),
                sci17(s.ratio),
                sci17(s.integral),
                u8::from(s.violation)
            )?;
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.ratios.iter().all(|r| r.is_finite() && *r >= 0.0)
    }
}

/// Sampler shared by every check: strictly positive fields with `|k|^{-2}`
/// spectral decay on 16 modes.
pub fn default_sampler() -> SmoothFieldParams {
    SmoothFieldParams {
        decay: 2.0,
        floor: 0.1,
        modes: 16,
    }
}

/// The field of sample `stream` under `seed`.
pub fn sample_field(grid: &Grid, seed: u64, stream: u64, params: SmoothFieldParams) -> Result<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    random_smooth_field_with(grid, &mut rng, params)
}

/// Round-off scale of `∫ Λ^α u Γ(u)`: `2π Σ_k |k|^α |û_k| · max|Γ(u)|`.
fn sign_tolerance(u: &Field, alpha: f64, gamma: GammaFunction) -> f64 {
    let spec = forward_transform(u);
    let spectral: f64 = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| (spec.grid().wavenumber(i).unsigned_abs() as f64).powf(alpha) * c.norm())
        .sum();
    let gamma_sup = u
        .samples()
        .iter()
        .fold(0.0f64, |m, v| m.max(gamma.value(*v).abs()));
    SIGN_TOLERANCE * (std::f64::consts::TAU * spectral * gamma_sup).max(1.0)
}

fn is_constant(u: &Field) -> bool {
    u.max() == u.min()
}

/// Ratio with `0/0 = 0`; a positive left side over a nonpositive right side
/// is infinite.
fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs > 0.0 {
        lhs / rhs
    } else {
        f64::INFINITY
    }
}

/// Both sides and the sign-checked integral for one field.
type Evaluator<'a> = dyn Fn(&Field) -> Result<(f64, f64, f64)> + Sync + 'a;

fn evaluate_sample(
    u: &Field,
    stream: u64,
    alpha: f64,
    gamma: GammaFunction,
    eval: &Evaluator<'_>,
) -> Result<Sample> {
    if is_constant(u) {
        return Ok(Sample {
            stream,
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
            integral: 0.0,
            tolerance: 0.0,
            violation: false,
        });
    }
    let (lhs, rhs, integral) = eval(u)?;
    let tolerance = sign_tolerance(u, alpha, gamma);
    let r = ratio(lhs, rhs);
    Ok(Sample {
        stream,
        lhs,
        rhs,
        ratio: r,
        integral,
        tolerance,
        violation: integral < -tolerance || !r.is_finite(),
    })
}

fn assemble(
    id: InequalityId,
    parameters: Parameters,
    seed: u64,
    sampler: SmoothFieldParams,
    samples: Vec<Sample>,
) -> InequalityReport {
    let ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    let mut witness: Option<Witness> = None;
    for s in &samples {
        if witness.is_none_or(|w| s.ratio > w.ratio) {
            witness = Some(Witness {
                seed,
                stream: s.stream,
                ratio: s.ratio,
            });
        }
    }
    InequalityReport {
        inequality_id: id,
        parameters,
        sampler,
        n: LAB_GRID,
        seed,
        sample_count: samples.len(),
        max_ratio: witness.map_or(0.0, |w| w.ratio),
        min_rhs_witness: witness,
        violations: samples.iter().filter(|s| s.violation).count(),
        ratios,
        samples,
    }
}

fn run_check(
    id: InequalityId,
    parameters: Parameters,
    n_samples: usize,
    seed: u64,
    eval: &Evaluator<'_>,
) -> Result<InequalityReport> {
    if n_samples == 0 {
        return Err(param("n_samples", 0.0, "must be at least 1"));
    }
    let grid = Grid::new(LAB_GRID)?;
    let sampler = default_sampler();
    let (alpha, gamma) = (parameters.alpha, parameters.gamma);
    let samples = (0..n_samples as u64)
        .into_par_iter()
        .map(|stream| {
            let u = sample_field(&grid, seed, stream, sampler)?;
            evaluate_sample(&u, stream, alpha, gamma, eval)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(id, parameters, seed, sampler, samples))
}

fn check_open_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(param("alpha", alpha, "must lie in (0, 2)"));
    }
    Ok(())
}

fn parameters(alpha: f64, delta: Option<f64>, s_exp: Option<f64>, gamma: GammaFunction) -> Parameters {
    Parameters {
        alpha,
        delta,
        s_exp,
        gamma,
        gamma_lower_c: gamma.lower_c(),
    }
}

/// `(‖u‖²_{Ḣ^{α/2}}, ‖u‖_∞ I, I)` with `I = ∫Λ^α u Γ(u)`.
pub fn lemma1_hs_sides(u: &Field, alpha: f64, gamma: GammaFunction) -> Result<(f64, f64, f64)> {
    let i = fisher_information(u, alpha, gamma)?;
    Ok((hs_seminorm(u, alpha / 2.0).powi(2), u.linf() * i, i))
}

pub fn lemma1_w_sides(u: &Field, alpha: f64, delta: f64, gamma: GammaFunction) -> Result<(f64, f64, f64)> {
    let i = fisher_information(u, alpha, gamma)?;
    let w = slobodeckij_seminorm(u, alpha / 2.0 - delta, 1.0)?;
    Ok((w * w, u.l1() * i, i))
}

pub fn lemma2_sides(u: &Field, alpha: f64, gamma: GammaFunction) -> Result<(f64, f64, f64)> {
    let i = fisher_information(u, alpha, gamma)?;
    let theta = 2.0 / (1.0 + alpha);
    let l1 = u.l1();
    let lhs = hs_seminorm(u, alpha / 2.0).powf(2.0 - theta);
    Ok((lhs, l1.powf(1.0 - theta) * (i + l1), i))
}

pub fn lemma_b2_sides(u: &Field, alpha: f64, s_exp: f64, delta: f64) -> Result<(f64, f64, f64)> {
    let gamma = GammaFunction::power(s_exp)?;
    let i = fisher_information(u, alpha, gamma)?;
    let p = 1.0 + s_exp;
    let w = slobodeckij_seminorm(u, alpha / (2.0 + 2.0 * s_exp) - delta, p)?;
    Ok((w.powf(2.0 * p), u.lp_pow(p) * i, i))
}

pub fn check_lemma1_hs(alpha: f64, gamma: GammaFunction, n_samples: usize, seed: u64) -> Result<InequalityReport> {
    check_open_alpha(alpha)?;
    run_check(
        InequalityId::Lemma1Hs,
        parameters(alpha, None, None, gamma),
        n_samples,
        seed,
        &|u| lemma1_hs_sides(u, alpha, gamma),
    )
}

pub fn check_lemma1_w(
    alpha: f64,
    delta: f64,
    gamma: GammaFunction,
    n_samples: usize,
    seed: u64,
) -> Result<InequalityReport> {
    check_open_alpha(alpha)?;
    if !(delta > 0.0 && delta < alpha / 2.0) {
        return Err(param("delta", delta, "must lie in (0, alpha/2)"));
    }
    run_check(
        InequalityId::Lemma1W,
        parameters(alpha, Some(delta), None, gamma),
        n_samples,
        seed,
        &|u| lemma1_w_sides(u, alpha, delta, gamma),
    )
}

pub fn check_lemma2_torus(alpha: f64, gamma: GammaFunction, n_samples: usize, seed: u64) -> Result<InequalityReport> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(param("alpha", alpha, "must lie in (1, 2]"));
    }
    run_check(
        InequalityId::Lemma2Torus,
        parameters(alpha, None, None, gamma),
        n_samples,
        seed,
        &|u| lemma2_sides(u, alpha, gamma),
    )
}

pub fn check_lemma_b2(
    alpha: f64,
    s_exp: f64,
    delta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<InequalityReport> {
    check_open_alpha(alpha)?;
    if !(s_exp > 0.0 && s_exp <= 1.0) {
        return Err(param("s", s_exp, "must lie in (0, 1]"));
    }
    let top = alpha / (2.0 + 2.0 * s_exp);
    if !(delta > 0.0 && delta < top) {
        return Err(param("delta", delta, "must lie in (0, alpha/(2+2s))"));
    }
    let gamma = GammaFunction::power(s_exp)?;
    run_check(
        InequalityId::LemmaB2,
        parameters(alpha, Some(delta), Some(s_exp), gamma),
        n_samples,
        seed,
        &|u| lemma_b2_sides(u, alpha, s_exp, delta),
    )
}

/// The sup-norm interpolation bound. It has no sign condition, so the
/// integral column carries `‖u - ⟨u⟩‖_∞`.
pub fn check_interpolation(alpha: f64, n_samples: usize, seed: u64) -> Result<InequalityReport> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(param("alpha", alpha, "must lie in (1, 2]"));
    }
    let theta = 2.0 / (1.0 + alpha);
    run_check(
        InequalityId::Interpolation,
        parameters(alpha, None, None, GammaFunction::Identity),
        n_samples,
        seed,
        &|u| {
            let mean = crate::field::mean(u);
            let sup = u.samples().iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
            let rhs = hs_seminorm(u, alpha / 2.0).powf(theta) * u.l1().powf(1.0 - theta);
            Ok((sup, rhs, sup))
        },
    )
}

/// Largest observed ratio: an empirical lower bound on the constant.
pub fn estimate_constant(report: &InequalityReport) -> Result<(f64, Option<Witness>)> {
    if report.samples.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok((report.max_ratio, report.min_rhs_witness))
}
