//! Time integration of
//!
//! ```text
//!     ∂t u = -μ Λ^α u + ε ∂xx u + ∂x(u q),
//!     ∂t q =            ε ∂xx q + ∂x f(u),
//! ```
//!
//! by an integrating-factor scheme: the linear symbols are integrated exactly
//! and the fluxes by the explicit midpoint rule,
//!
//! ```text
//!     v* = E(dt/2) (v_n + dt/2 N(v_n)),
//!     v_{n+1} = E(dt) v_n + dt E(dt/2) N(v*),
//! ```
//!
//! with products formed on the grid and truncated to `|k| ≤ n/3`. Every flux
//! is a spectral derivative, so mode 0 of both fields is never touched.

use std::f64::consts::TAU;
use std::io::Write;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{forward_transform, mean, Field, Grid};
use crate::fraclap::hs_seminorm;
use crate::functionals::{fisher_information, lyapunov, shannon_entropy, theta_prime, GammaFunction};
use crate::kinetics::{admissibility_report, KineticFunction};
use crate::sci17;

/// Values above this (in sup norm) count as blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e12;
/// Floor applied to `u` before taking logarithms in diagnostics.
pub const DIAGNOSTIC_FLOOR: f64 = 1e-12;
/// `u_min < -POSITIVITY_TOLERANCE · u_max` raises a positivity warning.
pub const POSITIVITY_TOLERANCE: f64 = 1e-6;

pub const DIAGNOSTICS_HEADER: &str =
    "t,mass,q_mean,u_min,u_max,l2_u,l2_q,hs_u,entropy,fisher,lyapunov,h3_energy,dissipation_integral";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub record_every: usize,
    pub cfl_safety: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            mu: 1.0,
            epsilon: 0.0,
            n: 256,
            dt: 1e-3,
            t_end: 1.0,
            dealias: true,
            record_every: 10,
            cfl_safety: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<Grid> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(param("alpha", self.alpha, "must lie in (0, 2]"));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(param("mu", self.mu, "must be finite and nonnegative"));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(param("epsilon", self.epsilon, "must be finite and nonnegative"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(param("dt", self.dt, "must be positive"));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(param("t_end", self.t_end, "must be finite and nonnegative"));
        }
        if self.record_every == 0 {
            return Err(param("record_every", 0.0, "must be at least 1"));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(param("cfl_safety", self.cfl_safety, "must lie in (0, 1]"));
        }
        Grid::new(self.n)
    }

    fn cutoff(&self) -> usize {
        if self.dealias {
            self.n / 3
        } else {
            self.n / 2 - 1
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u: Field,
    pub q: Field,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub q_mean: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub l2_u: f64,
    pub l2_q: f64,
    /// `‖u‖_{Ḣ^{α/2}}`.
    pub hs_u: f64,
    pub entropy: f64,
    /// `∫ Λ^α u log u`.
    pub fisher: f64,
    pub lyapunov: f64,
    /// `‖u‖²_{H³} + γ ‖q‖²_{H³}`, absent when the spectra are not resolved.
    pub h3_energy: Option<f64>,
    /// `∫_0^t ∫ Λ^α u Θ'(u) dx ds`.
    pub dissipation_integral: f64,
    /// `∫_0^t ‖u‖²_{Ḣ^{α/2}} ds`.
    pub hs_squared_integral: f64,
    /// `‖∂x q‖_∞` at `t`.
    pub dxq_linf: f64,
    /// `∫_0^t ‖∂x q‖_∞ ds`.
    pub dxq_integral: f64,
    /// Set when `u` went negative beyond tolerance since the previous record.
    pub positivity_warning: bool,
}

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        let h3 = self.h3_energy.map(sci17).unwrap_or_default();
        [
            sci17(self.t),
            sci17(self.mass),
            sci17(self.q_mean),
            sci17(self.u_min),
            sci17(self.u_max),
            sci17(self.l2_u),
            sci17(self.l2_q),
            sci17(self.hs_u),
            sci17(self.entropy),
            sci17(self.fisher),
            sci17(self.lyapunov),
            h3,
            sci17(self.dissipation_integral),
        ]
        .join(",")
    }
}

pub fn write_diagnostics_csv<W: Write>(records: &[DiagnosticsRecord], mut out: W) -> Result<()> {
    writeln!(out, "{DIAGNOSTICS_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    BlowUp { t: f64, norm: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Bounded,
    Blowup,
    Unresolved,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Bounded => "bounded",
            Classification::Blowup => "blowup",
            Classification::Unresolved => "unresolved",
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            Classification::Bounded => 0,
            Classification::Blowup => 1,
            Classification::Unresolved => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    /// Last finite state (the state before the blow-up step on blow-up).
    pub final_state: State,
    pub records: Vec<DiagnosticsRecord>,
    pub outcome: Outcome,
    pub steps: usize,
    pub positivity_warnings: usize,
    /// Largest `‖u‖_∞` seen at any step.
    pub max_linf_u: f64,
}

impl RunOutput {
    pub fn classification(&self) -> Classification {
        match self.outcome {
            Outcome::BlowUp { .. } => Classification::Blowup,
            Outcome::Completed if self.positivity_warnings > 0 => Classification::Unresolved,
            Outcome::Completed => Classification::Bounded,
        }
    }
}

/// `u^ε(0) = ε + H_ε * u0`, `q^ε(0) = H_ε * q0` with the heat-kernel symbol
/// `e^{-k² ε}`.
pub fn mollify_initial_data(u0: &Field, q0: &Field, epsilon: f64) -> Result<(Field, Field)> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(param("epsilon", epsilon, "must be positive"));
    }
    u0.grid().check_same(q0.grid())?;
    let smooth = |f: &Field| {
        let mut s = forward_transform(f);
        s.apply_symbol(|k| (-(k * k) as f64 * epsilon).exp());
        crate::field::synthesize(&s)
    };
    Ok((smooth(u0).map(|v| v + epsilon), smooth(q0)))
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Largest admissible step: `safety · min(h/|q|_∞, h/|f'(u)|_∞, cap)` with
/// `cap = 1/(k_max (|q|_∞ + sup √|u f'(u)|))`, the inverse of the fastest
/// characteristic frequency on the retained modes; never above `cfg.dt`.
pub fn cfl_timestep(s: &State, cfg: &SolverConfig, f: &KineticFunction, safety: f64) -> f64 {
    cfl_from_samples(s.u.samples(), s.q.samples(), s.u.grid().spacing(), cfg, f, safety)
}

fn cfl_from_samples(
    u: &[f64],
    q: &[f64],
    h: f64,
    cfg: &SolverConfig,
    f: &KineticFunction,
    safety: f64,
) -> f64 {
    let q_inf = sup_abs(q);
    let mut df_inf = 0.0f64;
    let mut wave = 0.0f64;
    for &v in u {
        let d = f.eval(1, v);
        df_inf = df_inf.max(d.abs());
        wave = wave.max((v * d).abs());
    }
    let k_max = cfg.cutoff().max(1) as f64;
    let advect = h / q_inf.max(1e-12);
    let kinetic = h / df_inf.max(1e-12);
    let cap = 1.0 / (k_max * (q_inf + wave.sqrt())).max(1e-12);
    (safety * advect.min(kinetic).min(cap)).min(cfg.dt)
}

/// Spectral state and precomputed symbols for one run.
struct Stepper {
    grid: Grid,
    n: usize,
    f: KineticFunction,
    /// `μ|k|^α + εk²` for `u` and `εk²` for `q`.
    decay_u: Vec<f64>,
    decay_q: Vec<f64>,
    /// `ik` on retained modes, zero elsewhere.
    dx: Vec<Complex64>,
    /// `|k|^α`.
    frac: Vec<f64>,
    factors: Option<Factors>,
}

struct Factors {
    dt: f64,
    u_half: Vec<f64>,
    u_full: Vec<f64>,
    q_half: Vec<f64>,
    q_full: Vec<f64>,
}

struct Rates {
    hs_squared: f64,
    dissipation: f64,
    dxq_linf: f64,
}

impl Stepper {
    fn new(grid: &Grid, cfg: &SolverConfig, f: &KineticFunction) -> Self {
        let n = grid.n();
        let cutoff = cfg.cutoff() as i64;
        let mut decay_u = vec![0.0; n];
        let mut decay_q = vec![0.0; n];
        let mut dx = vec![Complex64::new(0.0, 0.0); n];
        let mut frac = vec![0.0; n];
        for i in 0..n {
            let k = grid.wavenumber(i);
            let ak = k.unsigned_abs() as f64;
            let k2 = (k * k) as f64;
            frac[i] = if k == 0 { 0.0 } else { ak.powf(cfg.alpha) };
            decay_u[i] = cfg.mu * frac[i] + cfg.epsilon * k2;
            decay_q[i] = cfg.epsilon * k2;
            if k.abs() <= cutoff {
                dx[i] = Complex64::new(0.0, k as f64);
            }
        }
        Self {
            grid: grid.clone(),
            n,
            f: f.clone(),
            decay_u,
            decay_q,
            dx,
            frac,
            factors: None,
        }
    }

    fn to_spectrum(&self, samples: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.fft_forward(&mut buf);
        let inv_n = 1.0 / self.n as f64;
        for c in &mut buf {
            *c *= inv_n;
        }
        buf
    }

    fn to_samples(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.grid.fft_inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// `∂x P(uq)` and `∂x P f(u)` in spectral space.
    fn fluxes(&self, u: &[f64], q: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let uq: Vec<f64> = u.iter().zip(q).map(|(a, b)| a * b).collect();
        let fu: Vec<f64> = u.iter().map(|&v| self.f.eval(0, v)).collect();
        let mut nu = self.to_spectrum(&uq);
        let mut nq = self.to_spectrum(&fu);
        for i in 0..self.n {
            nu[i] *= self.dx[i];
            nq[i] *= self.dx[i];
        }
        (nu, nq)
    }

    fn factors(&mut self, dt: f64) -> &Factors {
        let stale = self.factors.as_ref().is_none_or(|f| f.dt != dt);
        if stale {
            let exp = |d: &[f64], tau: f64| d.iter().map(|l| (-l * tau).exp()).collect::<Vec<_>>();
            self.factors = Some(Factors {
                dt,
                u_half: exp(&self.decay_u, 0.5 * dt),
                u_full: exp(&self.decay_u, dt),
                q_half: exp(&self.decay_q, 0.5 * dt),
                q_full: exp(&self.decay_q, dt),
            });
        }
        self.factors.as_ref().unwrap()
    }

    /// One step from spectra `(uh, qh)` whose grid values are `(u, q)`.
    fn advance(
        &mut self,
        uh: &[Complex64],
        qh: &[Complex64],
        u: &[f64],
        q: &[f64],
        dt: f64,
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let (nu1, nq1) = self.fluxes(u, q);
        let n = self.n;
        let fac = self.factors(dt);
        let mut um = vec![Complex64::new(0.0, 0.0); n];
        let mut qm = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            um[i] = fac.u_half[i] * (uh[i] + 0.5 * dt * nu1[i]);
            qm[i] = fac.q_half[i] * (qh[i] + 0.5 * dt * nq1[i]);
        }
        let u_mid = self.to_samples(&um);
        let q_mid = self.to_samples(&qm);
        let (nu2, nq2) = self.fluxes(&u_mid, &q_mid);
        let fac = self.factors.as_ref().unwrap();
        let mut un = vec![Complex64::new(0.0, 0.0); n];
        let mut qn = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            un[i] = fac.u_full[i] * uh[i] + dt * fac.u_half[i] * nu2[i];
            qn[i] = fac.q_full[i] * qh[i] + dt * fac.q_half[i] * nq2[i];
        }
        (un, qn)
    }

    fn rates(&self, uh: &[Complex64], qh: &[Complex64], u: &[f64]) -> Rates {
        let hs_squared = TAU
            * uh
                .iter()
                .zip(&self.frac)
                .map(|(c, w)| w * c.norm_sqr())
                .sum::<f64>();
        let lu: Vec<Complex64> = uh.iter().zip(&self.frac).map(|(c, w)| c * w).collect();
        let lu = self.to_samples(&lu);
        let h = self.grid.spacing();
        let dissipation = lu
            .iter()
            .zip(u)
            .map(|(l, v)| l * theta_prime(&self.f, v.max(DIAGNOSTIC_FLOOR)).unwrap_or(0.0))
            .sum::<f64>()
            * h;
        let dq: Vec<Complex64> = qh.iter().zip(&self.dx).map(|(c, d)| c * d).collect();
        let dxq_linf = sup_abs(&self.to_samples(&dq));
        Rates {
            hs_squared,
            dissipation,
            dxq_linf,
        }
    }
}

/// Advances `s` by one step of size `cfg.dt`.
pub fn step(s: &State, cfg: &SolverConfig, f: &KineticFunction) -> Result<State> {
    let grid = cfg.validate()?;
    grid.check_same(s.u.grid())?;
    grid.check_same(s.q.grid())?;
    let mut stepper = Stepper::new(&grid, cfg, f);
    let uh = stepper.to_spectrum(s.u.samples());
    let qh = stepper.to_spectrum(s.q.samples());
    let (un, qn) = stepper.advance(&uh, &qh, s.u.samples(), s.q.samples(), cfg.dt);
    let u = stepper.to_samples(&un);
    let q = stepper.to_samples(&qn);
    let t = s.t + cfg.dt;
    check_finite(&u, &q, t)?;
    Ok(State {
        u: Field::from_samples(&grid, u)?,
        q: Field::from_samples(&grid, q)?,
        t,
    })
}

fn check_finite(u: &[f64], q: &[f64], t: f64) -> Result<()> {
    let mut norm = 0.0f64;
    for v in u.iter().chain(q) {
        if !v.is_finite() {
            return Err(Error::BlowUp { t, norm: f64::NAN });
        }
        norm = norm.max(v.abs());
    }
    if norm > BLOWUP_THRESHOLD {
        return Err(Error::BlowUp { t, norm });
    }
    Ok(())
}

/// Value and resolution flag of the `H³` energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct H3Energy {
    pub value: f64,
    /// Spectral tail (`|k| > n/4`) below `1e-8` of the peak coefficient for both fields.
    pub resolved: bool,
}

/// `‖u‖²_{H³} + γ ‖q‖²_{H³}` with `‖v‖²_{H³} = ‖v‖²_{L²} + ‖v‖²_{Ḣ³}`.
pub fn energy_h3(s: &State, gamma_lower: f64) -> H3Energy {
    let norm = |f: &Field| {
        let spec = forward_transform(f);
        let value = TAU * spec.weighted_power(|k| 1.0 + (k * k * k * k * k * k) as f64);
        let quarter = (f.grid().n() / 4) as i64;
        let mut peak = 0.0f64;
        let mut tail = 0.0f64;
        for (i, c) in spec.coeffs().iter().enumerate() {
            let a = c.norm();
            peak = peak.max(a);
            if f.grid().wavenumber(i).abs() > quarter {
                tail = tail.max(a);
            }
        }
        (value, tail <= 1e-8 * peak)
    };
    let (eu, ru) = norm(&s.u);
    let (eq, rq) = norm(&s.q);
    H3Energy {
        value: eu + gamma_lower * eq,
        resolved: ru && rq,
    }
}

struct Running {
    dissipation: f64,
    hs_squared: f64,
    dxq: f64,
    /// The diagnostics floor is reported once per run.
    floor_reported: bool,
}

fn record(
    state: &State,
    cfg: &SolverConfig,
    f: &KineticFunction,
    gamma_lower: f64,
    rates: &Rates,
    running: &mut Running,
    positivity_warning: bool,
) -> DiagnosticsRecord {
    let u = &state.u;
    let q = &state.q;
    let floored = if u.min() > DIAGNOSTIC_FLOOR {
        u.clone()
    } else {
        if !running.floor_reported {
            warn!(
                "t = {}: u reaches {:e}; floored at {DIAGNOSTIC_FLOOR:e} for entropy, Fisher and Lyapunov from here on",
                state.t,
                u.min()
            );
            running.floor_reported = true;
        }
        u.map(|v| v.max(DIAGNOSTIC_FLOOR))
    };
    let h3 = energy_h3(state, gamma_lower);
    DiagnosticsRecord {
        t: state.t,
        mass: u.integral(),
        q_mean: mean(q),
        u_min: u.min(),
        u_max: u.max(),
        l2_u: u.l2(),
        l2_q: q.l2(),
        hs_u: hs_seminorm(u, cfg.alpha / 2.0),
        entropy: shannon_entropy(&floored).unwrap_or(f64::NAN),
        fisher: fisher_information(&floored, cfg.alpha, GammaFunction::Log).unwrap_or(f64::NAN),
        lyapunov: lyapunov(&floored, q, f).unwrap_or(f64::NAN),
        h3_energy: h3.resolved.then_some(h3.value),
        dissipation_integral: running.dissipation,
        hs_squared_integral: running.hs_squared,
        dxq_linf: rates.dxq_linf,
        dxq_integral: running.dxq,
        positivity_warning,
    }
}

/// `γ` for the `H³` energy: the lower admissibility constant of `f` over the
/// range of `u0`, or 1 when it cannot be certified.
fn energy_gamma(f: &KineticFunction, u0: &Field) -> f64 {
    let a = u0.min().max(0.0);
    let b = u0.max().max(a + 1e-6);
    match admissibility_report(f, a, b, 200) {
        Ok(rep) if rep.gamma_lower.is_finite() => rep.gamma_lower,
        _ => {
            warn!("could not certify admissibility of {f} on [{a}, {b}]; using gamma = 1");
            1.0
        }
    }
}

/// Runs from `(u0, q0)` to `cfg.t_end`.
///
/// Steps are `min(cfg.dt, CFL)` and are shortened to land exactly on the record
/// times `j · record_every · dt` and on `t_end`. Blow-up ends the run early and
/// is reported in [`RunOutput::outcome`].
pub fn run(cfg: &SolverConfig, f: &KineticFunction, u0: &Field, q0: &Field) -> Result<RunOutput> {
    run_observed(cfg, f, u0, q0, |_| {})
}

/// [`run`], handing the state at every record time to `on_record`.
pub fn run_observed(
    cfg: &SolverConfig,
    f: &KineticFunction,
    u0: &Field,
    q0: &Field,
    mut on_record: impl FnMut(&State),
) -> Result<RunOutput> {
    let grid = cfg.validate()?;
    grid.check_same(u0.grid())?;
    grid.check_same(q0.grid())?;
    if let Some(index) = u0.samples().iter().position(|v| *v < 0.0) {
        return Err(Error::Positivity {
            index,
            value: u0.samples()[index],
        });
    }
    let q_mean = mean(q0);
    if q_mean.abs() > 1e-12 * (1.0 + q0.linf()) {
        return Err(param("q0", q_mean, "must have zero mean"));
    }

    let mut stepper = Stepper::new(&grid, cfg, f);
    let cutoff = cfg.cutoff() as i64;
    let project = |mut c: Vec<Complex64>| {
        for (i, v) in c.iter_mut().enumerate() {
            if grid.wavenumber(i).abs() > cutoff {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        c
    };
    let mut uh = project(stepper.to_spectrum(u0.samples()));
    let mut qh = project(stepper.to_spectrum(q0.samples()));
    let mut u = stepper.to_samples(&uh);
    let mut q = stepper.to_samples(&qh);
    let gamma = energy_gamma(f, u0);

    let mut t = 0.0;
    let mut rates = stepper.rates(&uh, &qh, &u);
    let mut running = Running {
        dissipation: 0.0,
        hs_squared: 0.0,
        dxq: 0.0,
        floor_reported: false,
    };
    let state = |u: &[f64], q: &[f64], t: f64| State {
        u: Field::from_raw(&grid, u.to_vec()),
        q: Field::from_raw(&grid, q.to_vec()),
        t,
    };
    let initial = state(&u, &q, t);
    on_record(&initial);
    let mut records = vec![record(&initial, cfg, f, gamma, &rates, &mut running, false)];
    let interval = cfg.record_every as f64 * cfg.dt;
    let mut outcome = Outcome::Completed;
    let mut steps = 0usize;
    let mut warnings = 0usize;
    let mut pending_warning = false;
    let mut max_linf_u = sup_abs(&u);

    while t < cfg.t_end {
        let target = ((records.len() as f64) * interval).min(cfg.t_end);
        let mut dt = cfl_from_samples(&u, &q, grid.spacing(), cfg, f, cfg.cfl_safety);
        let remaining = target - t;
        let lands = dt >= remaining * (1.0 - 1e-9);
        if lands {
            dt = remaining;
        }
        let (un, qn) = stepper.advance(&uh, &qh, &u, &q, dt);
        let u_new = stepper.to_samples(&un);
        let q_new = stepper.to_samples(&qn);
        let t_new = if lands { target } else { t + dt };
        if let Err(Error::BlowUp { t, norm }) = check_finite(&u_new, &q_new, t_new) {
            outcome = Outcome::BlowUp { t, norm };
            break;
        }
        let rates_new = stepper.rates(&un, &qn, &u_new);
        running.dissipation += 0.5 * dt * (rates.dissipation + rates_new.dissipation);
        running.hs_squared += 0.5 * dt * (rates.hs_squared + rates_new.hs_squared);
        running.dxq += 0.5 * dt * (rates.dxq_linf + rates_new.dxq_linf);
        (uh, qh, u, q, t, rates) = (un, qn, u_new, q_new, t_new, rates_new);
        steps += 1;
        max_linf_u = max_linf_u.max(sup_abs(&u));

        let u_min = u.iter().copied().fold(f64::INFINITY, f64::min);
        let u_max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if u_min < -POSITIVITY_TOLERANCE * u_max.abs() {
            warnings += 1;
            pending_warning = true;
        }
        if lands {
            let current = state(&u, &q, t);
            on_record(&current);
            records.push(record(&current, cfg, f, gamma, &rates, &mut running, pending_warning));
            pending_warning = false;
        }
    }

    Ok(RunOutput {
        final_state: state(&u, &q, t),
        records,
        outcome,
        steps,
        positivity_warnings: warnings,
        max_linf_u,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinPrincipleReport {
    /// `min u > 0` at every record.
    pub positive: bool,
    /// Smallest `u_min(t) - u_min(0) exp(-∫‖∂x q‖_∞)` over the records.
    pub lower_margin: f64,
    /// Smallest `u_max(0) exp(∫‖∂x q‖_∞) - u_max(t)` over the records.
    pub upper_margin: f64,
    pub pass: bool,
}

/// Checks positivity and the exponential envelopes
/// `u_min(0) e^{-I(t)} ≤ u(t) ≤ u_max(0) e^{I(t)}`, `I(t) = ∫_0^t ‖∂x q‖_∞`.
pub fn min_principle_monitor(records: &[DiagnosticsRecord]) -> Result<MinPrincipleReport> {
    let first = records.first().ok_or(Error::EmptyReport)?;
    let mut positive = true;
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    for r in records {
        positive &= r.u_min > 0.0;
        lower = lower.min(r.u_min - first.u_min * (-r.dxq_integral).exp());
        upper = upper.min(first.u_max * r.dxq_integral.exp() - r.u_max);
    }
    Ok(MinPrincipleReport {
        positive,
        lower_margin: lower,
        upper_margin: upper,
        pass: positive && lower >= 0.0 && upper >= 0.0,
    })
}

/// Largest `|‖u‖² + ‖q‖² + 2μ ∫‖u‖²_{Ḣ^{α/2}} - (‖u0‖² + ‖q0‖²)|` over the
/// records; the quantity is conserved when `f(y) = y²/2`.
pub fn l2_balance_residual(records: &[DiagnosticsRecord], mu: f64) -> Result<f64> {
    let first = records.first().ok_or(Error::EmptyReport)?;
    let e0 = first.l2_u.powi(2) + first.l2_q.powi(2);
    Ok(records
        .iter()
        .map(|r| (r.l2_u.powi(2) + r.l2_q.powi(2) + 2.0 * mu * r.hs_squared_integral - e0).abs())
        .fold(0.0, f64::max))
}

/// Largest increase of the Lyapunov functional between consecutive records,
/// per unit time, relative to its initial value.
pub fn lyapunov_excess(records: &[DiagnosticsRecord]) -> Result<f64> {
    let first = records.first().ok_or(Error::EmptyReport)?;
    let scale = first.lyapunov.abs().max(f64::MIN_POSITIVE);
    Ok(records
        .windows(2)
        .map(|w| (w[1].lyapunov - w[0].lyapunov) / ((w[1].t - w[0].t) * scale))
        .fold(f64::NEG_INFINITY, f64::max))
}
