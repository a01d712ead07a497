//! The inequality suites and the representation oracle.

use std::path::Path;

use anyhow::Result;
use clap::ValueEnum;
use fracchem_core::field::{Field, Grid};
use fracchem_core::fraclap::{fractional_laplacian_integral, fractional_laplacian_spectral};
use fracchem_core::functionals::GammaFunction;
use fracchem_core::ineqlab::{
    check_interpolation, check_lemma1_hs, check_lemma1_w, check_lemma2_torus, check_lemma_b2, InequalityReport,
};
use fracchem_core::sci17;

use crate::ic::Expr;
use crate::output::{ensure_dir, write_atomic};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Lemma {
    /// Ḣ^{α/2} bound by ‖u‖_∞ times the Fisher information.
    #[value(name = "1a")]
    HsSup,
    /// Ẇ^{α/2-δ,1} bound by ‖u‖_{L¹} times the Fisher information.
    #[value(name = "1b")]
    WL1,
    /// Torus bound with the extra ‖u‖_{L¹} term, α in (1, 2].
    #[value(name = "2")]
    Torus,
    /// Power-law Γ(u) = u^s: sign and Ẇ^{α/(2+2s)-δ,1+s} bound.
    #[value(name = "b2")]
    B2,
    /// Sup-norm interpolation, α in (1, 2].
    #[value(name = "interp")]
    Interpolation,
}

pub struct SuiteArgs {
    pub lemma: Lemma,
    pub alpha: f64,
    pub delta: Option<f64>,
    pub gamma: GammaFunction,
    pub s: f64,
    pub samples: usize,
    pub seed: u64,
}

pub fn run_suite(a: &SuiteArgs) -> Result<InequalityReport> {
    Ok(match a.lemma {
        Lemma::HsSup => check_lemma1_hs(a.alpha, a.gamma, a.samples, a.seed)?,
        Lemma::WL1 => check_lemma1_w(a.alpha, a.delta.unwrap_or(0.2), a.gamma, a.samples, a.seed)?,
        Lemma::Torus => check_lemma2_torus(a.alpha, a.gamma, a.samples, a.seed)?,
        Lemma::B2 => check_lemma_b2(a.alpha, a.s, a.delta.unwrap_or(0.1), a.samples, a.seed)?,
        Lemma::Interpolation => check_interpolation(a.alpha, a.samples, a.seed)?,
    })
}

pub fn write_report(dir: &Path, report: &InequalityReport) -> Result<()> {
    ensure_dir(dir)?;
    write_atomic(&dir.join("report.json"), |w| {
        report.write_json(&mut *w)?;
        Ok(writeln!(w)?)
    })?;
    write_atomic(&dir.join("samples.csv"), |w| Ok(report.write_samples_csv(w)?))
}

pub struct OracleResult {
    pub max_rel_err: f64,
    pub rows: Vec<[f64; 4]>,
}

/// Spectral and singular-integral `Λ^α` on the same samples. The relative
/// error is `‖integral - spectral‖_∞ / ‖spectral‖_∞`, and 0 when the
/// spectral reference vanishes.
pub fn oracle(ic: &Expr, alpha: f64, n: usize, cutoff: usize) -> Result<OracleResult> {
    let grid = Grid::new(n)?;
    let u = Field::from_fn(&grid, |x| ic.eval(x));
    let spectral = fractional_laplacian_spectral(&u, alpha)?;
    let integral = fractional_laplacian_integral(&u, alpha, cutoff)?;
    let rows: Vec<[f64; 4]> = (0..n)
        .map(|j| {
            let (s, i) = (spectral.samples()[j], integral.samples()[j]);
            [grid.point(j), s, i, (i - s).abs()]
        })
        .collect();
    let reference = spectral.linf();
    let max_err = rows.iter().fold(0.0f64, |m, r| m.max(r[3]));
    let max_rel_err = if reference == 0.0 { 0.0 } else { max_err / reference };
    Ok(OracleResult { max_rel_err, rows })
}

pub fn write_oracle(path: &Path, res: &OracleResult) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "x,spectral,integral,abs_err")?;
        for r in &res.rows {
            writeln!(w, "{},{},{},{}", sci17(r[0]), sci17(r[1]), sci17(r[2]), sci17(r[3]))?;
        }
        Ok(())
    })
}
