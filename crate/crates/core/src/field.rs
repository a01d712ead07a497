//! Periodic grids on the torus `[0, 2π)`, real sample fields, their discrete
//! Fourier spectra, spectral differentiation and a seeded sampler of random
//! smooth positive fields.
//!
//! Transform convention: `û_k = (1/n) Σ_j u(x_j) e^{-i k x_j}`, so mode 0 is the
//! mean of the field. Spectra are stored in the usual FFT order: index `i`
//! carries wavenumber `i` for `i <= n/2` and `i - n` above.

use std::f64::consts::TAU;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{param, Error, Result};
use crate::sci17;

/// Relative Hermitian-symmetry defect above which a spectrum is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

struct Plan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform grid of `n` points on the torus of circumference `2π`.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    spacing: f64,
    plan: Arc<Plan>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("spacing", &self.spacing)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(n));
        }
        let mut planner = FftPlanner::new();
        let plan = Plan {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            n,
            // n is a power of two, so this division and `spacing * n` are exact.
            spacing: TAU / n as f64,
            plan: Arc::new(plan),
        })
    }

    /// Unnormalized in-place forward FFT.
    pub(crate) fn fft_forward(&self, buf: &mut [Complex64]) {
        self.plan.forward.process(buf);
    }

    /// Unnormalized in-place inverse FFT.
    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64]) {
        self.plan.inverse.process(buf);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn length(&self) -> f64 {
        TAU
    }

    pub fn point(&self, j: usize) -> f64 {
        j as f64 * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Signed wavenumber stored at FFT index `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// FFT index of wavenumber `k`, for `-n/2 < k <= n/2`.
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Largest wavenumber kept by the 2/3 dealiasing rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

/// Real samples `u(x_j)` on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    samples: Vec<f64>,
}

impl Field {
    pub fn from_samples(grid: &Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::SampleCount {
                expected: grid.n,
                got: samples.len(),
            });
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid: grid.clone(),
            samples,
        })
    }

    /// Samples may be non-finite; callers check before exposing the field.
    pub(crate) fn from_raw(grid: &Grid, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.n);
        Self {
            grid: grid.clone(),
            samples,
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        let samples = (0..grid.n).map(|j| f(grid.point(j))).collect();
        Self::from_raw(grid, samples)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self::from_raw(grid, vec![value; grid.n])
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(&self.grid, self.samples.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Field::from_raw(&self.grid, samples))
    }

    /// Cyclic shift by `cells` grid points: `g(x_j) = f(x_{j - cells})`.
    pub fn shifted(&self, cells: usize) -> Field {
        let n = self.grid.n;
        let samples = (0..n)
            .map(|j| self.samples[(j + n - cells % n) % n])
            .collect();
        Field::from_raw(&self.grid, samples)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn linf(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid (= midpoint on the periodic grid) approximation of `∫ u dx`.
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.grid.spacing
    }

    /// `∫ |u|^p dx` on the grid.
    pub fn lp_pow(&self, p: f64) -> f64 {
        self.samples.iter().map(|v| v.abs().powf(p)).sum::<f64>() * self.grid.spacing
    }

    pub fn l1(&self) -> f64 {
        self.samples.iter().map(|v| v.abs()).sum::<f64>() * self.grid.spacing
    }

    pub fn l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `∫ u v dx`; panics if the grids differ.
    pub fn dot(&self, other: &Field) -> f64 {
        assert_eq!(self.grid.n, other.grid.n, "grid mismatch in dot product");
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.spacing
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,value")?;
        for (j, v) in self.samples.iter().enumerate() {
            writeln!(out, "{},{}", sci17(self.grid.point(j)), sci17(*v))?;
        }
        Ok(())
    }

    /// Reads the `x,value` format written by [`Field::write_csv`]; the grid size
    /// is the number of rows.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Field> {
        let mut lines = input.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "x,value" => {}
            _ => return Err(Error::Parse("missing `x,value` header".into())),
        }
        let mut samples = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let value = line
                .split(',')
                .nth(1)
                .ok_or_else(|| Error::Parse(format!("bad row `{line}`")))?;
            samples.push(
                value
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(e.to_string()))?,
            );
        }
        let grid = Grid::new(samples.len())?;
        Field::from_samples(&grid, samples)
    }
}

/// Complex Fourier coefficients of a real field.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n {
            return Err(Error::SampleCount {
                expected: grid.n,
                got: coeffs.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Coefficients in FFT order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    /// Sets `û_k` and `û_{-k} = conj(û_k)` together.
    pub fn set_mode(&mut self, k: i64, value: Complex64) {
        let i = self.grid.index_of(k);
        let j = self.grid.index_of(-k);
        self.coeffs[i] = value;
        self.coeffs[j] = value.conj();
    }

    /// Multiplies every coefficient by a real symbol of the wavenumber.
    pub fn apply_symbol(&mut self, symbol: impl Fn(i64) -> f64) {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c *= symbol(self.grid.wavenumber(i));
        }
    }

    /// Largest Hermitian-symmetry defect relative to the largest coefficient.
    pub fn symmetry_defect(&self) -> (i64, f64) {
        let n = self.grid.n;
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm())).max(1.0);
        let mut worst = (0i64, 0.0f64);
        for i in 0..=n / 2 {
            let j = (n - i) % n;
            let d = (self.coeffs[i] - self.coeffs[j].conj()).norm() / scale;
            if d > worst.1 {
                worst = (self.grid.wavenumber(i), d);
            }
        }
        worst
    }

    /// `Σ_k w(k) |û_k|²` with the sum running over all stored modes.
    pub fn weighted_power(&self, weight: impl Fn(i64) -> f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| weight(self.grid.wavenumber(i)) * c.norm_sqr())
            .sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,re,im")?;
        let half = (self.grid.n / 2) as i64;
        for k in (-half + 1)..=half {
            let c = self.coeff(k);
            writeln!(out, "{},{},{}", k, sci17(c.re), sci17(c.im))?;
        }
        Ok(())
    }
}

/// Forward transform with the `1/n` normalization on this pass.
pub fn forward_transform(f: &Field) -> Spectrum {
    let n = f.grid.n;
    let mut buf: Vec<Complex64> = f.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    f.grid.plan.forward.process(&mut buf);
    let inv_n = 1.0 / n as f64;
    for c in &mut buf {
        *c *= inv_n;
    }
    Spectrum {
        grid: f.grid.clone(),
        coeffs: buf,
    }
}

/// Inverse transform; rejects spectra that are not Hermitian within
/// [`SYMMETRY_TOLERANCE`].
pub fn inverse_transform(s: &Spectrum) -> Result<Field> {
    let (mode, defect) = s.symmetry_defect();
    if defect > SYMMETRY_TOLERANCE {
        return Err(Error::MalformedSpectrum { mode, defect });
    }
    Ok(synthesize(s))
}

/// Inverse transform keeping the real part, for spectra that are Hermitian by
/// construction.
pub(crate) fn synthesize(s: &Spectrum) -> Field {
    let mut buf = s.coeffs.clone();
    s.grid.plan.inverse.process(&mut buf);
    Field::from_raw(&s.grid, buf.into_iter().map(|c| c.re).collect())
}

/// Spectral `∂x`: multiplier `ik`, Nyquist mode dropped.
pub fn derivative(f: &Field) -> Field {
    derivative_n(f, 1)
}

/// `order`-th spectral derivative.
pub fn derivative_n(f: &Field, order: u32) -> Field {
    let mut s = forward_transform(f);
    differentiate_spectrum(&mut s, order);
    synthesize(&s)
}

pub(crate) fn differentiate_spectrum(s: &mut Spectrum, order: u32) {
    let n = s.grid.n;
    let nyquist = n / 2;
    let i_pow = Complex64::new(0.0, 1.0).powu(order);
    for (i, c) in s.coeffs.iter_mut().enumerate() {
        if order % 2 == 1 && i == nyquist {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let k = s.grid.wavenumber(i) as f64;
        *c *= i_pow * k.powi(order as i32);
    }
}

/// Trigonometric interpolation of `f` onto `target` (zero padding or
/// truncation in spectral space). The Nyquist mode is split evenly when
/// refining so the result stays real.
pub fn resample(f: &Field, target: &Grid) -> Field {
    let src = forward_transform(f);
    let mut out = Spectrum::zeros(target);
    let n_src = f.grid.n as i64;
    let n_dst = target.n as i64;
    let keep = (n_src.min(n_dst)) / 2;
    for k in -(keep - 1)..keep {
        out.coeffs[target.index_of(k)] = src.coeff(k);
    }
    let ny = src.coeff(keep);
    if n_dst > n_src {
        out.coeffs[target.index_of(keep)] = 0.5 * ny;
        out.coeffs[target.index_of(-keep)] = 0.5 * ny;
    } else {
        out.coeffs[target.index_of(keep)] = Complex64::new(ny.re, 0.0);
    }
    synthesize(&out)
}

pub fn mean(f: &Field) -> f64 {
    f.samples.iter().sum::<f64>() / f.grid.n as f64
}

/// Parameters of the random smooth field family
/// `floor + offset + Σ_{1≤|k|≤modes} a_k e^{ikx}`, `|a_k| = ρ_k |k|^{-decay}`
/// with `ρ_k ~ U[0.5, 1.5)` and uniform phases.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SmoothFieldParams {
    pub decay: f64,
    pub floor: f64,
    pub modes: usize,
}

impl SmoothFieldParams {
    fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.decay > 1.0) {
            return Err(param("decay", self.decay, "must exceed 1"));
        }
        if !(self.floor >= 0.0) {
            return Err(param("floor", self.floor, "must be nonnegative"));
        }
        if self.modes > grid.n / 3 {
            return Err(param("modes", self.modes as f64, "must not exceed n/3"));
        }
        Ok(())
    }
}

/// Random smooth field drawn from a generator seeded with `seed`.
pub fn random_smooth_field(grid: &Grid, seed: u64, params: SmoothFieldParams) -> Result<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_smooth_field_with(grid, &mut rng, params)
}

/// Same family, drawing from a caller-owned generator.
pub fn random_smooth_field_with<R: Rng>(
    grid: &Grid,
    rng: &mut R,
    params: SmoothFieldParams,
) -> Result<Field> {
    params.validate(grid)?;
    let mut spec = Spectrum::zeros(grid);
    for k in 1..=params.modes as i64 {
        let rho: f64 = rng.random_range(0.5..1.5);
        let phase: f64 = rng.random_range(0.0..TAU);
        let amp = rho * (k as f64).powf(-params.decay);
        spec.set_mode(k, Complex64::from_polar(amp, phase));
    }
    let fluct = synthesize(&spec);
    let lowest = fluct.min();
    let lowest = if lowest.is_finite() { lowest } else { 0.0 };
    Ok(fluct.map(|v| params.floor + (v - lowest)))
}
