//! Single runs: specification, execution and the run directory layout.

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use fracchem_core::field::{random_smooth_field, Field, Grid};
use fracchem_core::ineqlab::default_sampler;
use fracchem_core::kinetics::KineticFunction;
use fracchem_core::sci17;
use fracchem_core::solver::{
    mollify_initial_data, run, write_diagnostics_csv, Classification, Outcome, RunOutput, SolverConfig,
};
use serde::{Deserialize, Serialize};

use crate::ic::Expr;
use crate::output::{ensure_dir, write_atomic};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const FINAL_STATE_FILE: &str = "final_state.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything a run depends on. A manifest holds one of these, and running it
/// again reproduces the CSV outputs byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub config: SolverConfig,
    pub kinetic: KineticFunction,
    /// Expression in `x`, or `random` for a sampler draw from `seed`.
    pub ic: String,
    pub q_ic: String,
    /// Replace the data by its heat-kernel mollification at `epsilon`.
    pub mollify: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    #[serde(flatten)]
    pub spec: RunSpec,
    pub classification: Classification,
    pub outcome: Outcome,
    pub t_final: f64,
    pub steps: usize,
    pub positivity_warnings: usize,
    pub max_linf_u: f64,
    /// Not part of the reproducibility contract.
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

fn field_from(spec: &str, grid: &Grid, seed: u64) -> Result<Field> {
    if spec.trim() == "random" {
        return Ok(random_smooth_field(grid, seed, default_sampler())?);
    }
    let expr: Expr = spec.parse().with_context(|| format!("initial condition '{spec}'"))?;
    Ok(Field::from_fn(grid, |x| expr.eval(x)))
}

/// Initial data on the run grid, mollified when requested.
pub fn initial_data(spec: &RunSpec) -> Result<(Field, Field)> {
    let grid = spec.config.validate()?;
    let u0 = field_from(&spec.ic, &grid, spec.seed)?;
    let q0 = field_from(&spec.q_ic, &grid, spec.seed.wrapping_add(1))?;
    if spec.mollify {
        return Ok(mollify_initial_data(&u0, &q0, spec.config.epsilon)?);
    }
    Ok((u0, q0))
}

pub struct Executed {
    pub output: RunOutput,
    pub manifest: RunManifest,
}

pub fn execute(spec: &RunSpec) -> Result<Executed> {
    let (u0, q0) = initial_data(spec)?;
    let start = Instant::now();
    let output = run(&spec.config, &spec.kinetic, &u0, &q0)?;
    let manifest = RunManifest {
        artifact: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        spec: spec.clone(),
        classification: output.classification(),
        outcome: output.outcome,
        t_final: output.final_state.t,
        steps: output.steps,
        positivity_warnings: output.positivity_warnings,
        max_linf_u: output.max_linf_u,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(Executed { output, manifest })
}

/// Writes `diagnostics.csv`, `final_state.csv` and `manifest.json` into `dir`.
pub fn write_run_dir(dir: &Path, done: &Executed) -> Result<()> {
    ensure_dir(dir)?;
    write_atomic(&dir.join(DIAGNOSTICS_FILE), |w| {
        Ok(write_diagnostics_csv(&done.output.records, w)?)
    })?;
    let state = &done.output.final_state;
    write_atomic(&dir.join(FINAL_STATE_FILE), |w| {
        writeln!(w, "x,u,q")?;
        for (j, (u, q)) in state.u.samples().iter().zip(state.q.samples()).enumerate() {
            writeln!(w, "{},{},{}", sci17(state.u.grid().point(j)), sci17(*u), sci17(*q))?;
        }
        Ok(())
    })?;
    write_atomic(&dir.join(MANIFEST_FILE), |w| {
        serde_json::to_writer_pretty(&mut *w, &done.manifest)?;
        Ok(writeln!(w)?)
    })
}
