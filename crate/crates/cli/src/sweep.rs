//! Parallel sweeps over `(α, r)`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use anyhow::{Context, Result};
use fracchem_core::kinetics::power_law;
use fracchem_core::sci17;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{ensure_dir, write_atomic};
use crate::run::{execute, initial_data, write_run_dir, RunSpec};

pub const REGIMES_FILE: &str = "regimes.csv";
pub const REGIMES_HEADER: &str = "alpha,r,classification,t_final,max_linf_u";

#[derive(Clone, Debug, Serialize)]
pub struct SweepPlan {
    pub alphas: Vec<f64>,
    pub rs: Vec<f64>,
    /// Template for every cell; `alpha` and the kinetics are overwritten.
    pub base: RunSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub alpha: f64,
    pub r: f64,
    pub classification: String,
    pub t_final: f64,
    pub max_linf_u: f64,
}

impl CellResult {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.alpha,
            self.r,
            self.classification,
            sci17(self.t_final),
            sci17(self.max_linf_u)
        )
    }
}

impl SweepPlan {
    /// Cells in row-major order, `α` outer.
    pub fn cells(&self) -> Result<Vec<RunSpec>> {
        let mut out = Vec::with_capacity(self.alphas.len() * self.rs.len());
        for &alpha in &self.alphas {
            for &r in &self.rs {
                let mut spec = self.base.clone();
                spec.config.alpha = alpha;
                spec.kinetic = power_law(r)?;
                out.push(spec);
            }
        }
        Ok(out)
    }
}

fn cell_dir(root: &Path, index: usize) -> PathBuf {
    root.join("cells").join(format!("cell_{index:03}"))
}

/// Runs every cell on `jobs` workers. Rows reach `regimes.csv` in cell
/// order as soon as all earlier cells are done, through a `.partial` file
/// that is renamed when the sweep finishes.
pub fn run_sweep(plan: &SweepPlan, jobs: usize, out: &Path) -> Result<Vec<CellResult>> {
    let cells = plan.cells()?;
    // Fail on bad parameters before any cell starts.
    for spec in &cells {
        initial_data(spec)?;
    }
    ensure_dir(out)?;
    write_atomic(&out.join("sweep.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, plan)?;
        Ok(writeln!(w)?)
    })?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("building worker pool")?;
    let partial = out.join(format!("{REGIMES_FILE}.partial"));
    let mut writer = BufWriter::new(File::create(&partial)?);
    writeln!(writer, "{REGIMES_HEADER}")?;
    writer.flush()?;

    let (tx, rx) = mpsc::channel::<(usize, Result<CellResult>)>();
    let results = std::thread::scope(|scope| -> Result<Vec<CellResult>> {
        let cells = &cells;
        scope.spawn(move || {
            pool.install(|| {
                cells.par_iter().enumerate().for_each_with(tx, |tx, (i, spec)| {
                    let res = execute(spec).and_then(|done| {
                        write_run_dir(&cell_dir(out, i), &done)?;
                        log::info!(
                            "cell {i}: alpha={} {} -> {}",
                            spec.config.alpha,
                            spec.kinetic,
                            done.manifest.classification.as_str()
                        );
                        Ok(CellResult {
                            alpha: spec.config.alpha,
                            r: spec.kinetic.exponent().unwrap_or(f64::NAN),
                            classification: done.manifest.classification.as_str().to_string(),
                            t_final: done.manifest.t_final,
                            max_linf_u: done.manifest.max_linf_u,
                        })
                    });
                    let _ = tx.send((i, res));
                });
            });
        });

        let mut pending = BTreeMap::new();
        let mut done = Vec::with_capacity(cells.len());
        for (i, res) in rx {
            pending.insert(i, res?);
            while let Some(cell) = pending.remove(&done.len()) {
                writeln!(writer, "{}", cell.csv_row())?;
                writer.flush()?;
                done.push(cell);
            }
        }
        Ok(done)
    })?;
    drop(writer);
    fs::rename(&partial, out.join(REGIMES_FILE))?;
    Ok(results)
}
