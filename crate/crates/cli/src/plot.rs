//! Plot-ready files from run and sweep directories.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::output::{ensure_dir, write_atomic, write_string};
use crate::run::DIAGNOSTICS_FILE;
use crate::svg::line_chart;
use crate::sweep::REGIMES_FILE;

/// Splits a CSV into header and rows, keeping every cell as written.
fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.is_empty());
    let header: Vec<String> = match lines.next() {
        Some(h) => h.split(',').map(str::to_string).collect(),
        None => Vec::new(),
    };
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    Ok((header, rows))
}

/// One `<name>.csv` and `<name>.svg` per diagnostic column against `t`.
/// Empty cells (an unresolved `h3_energy`) are left out of both.
fn emit_diagnostics(src: &Path, out: &Path) -> Result<usize> {
    let (header, rows) = read_table(src)?;
    if rows.is_empty() || header.first().map(String::as_str) != Some("t") {
        return Ok(0);
    }
    for (col, name) in header.iter().enumerate().skip(1) {
        let points: Vec<(String, String)> = rows
            .iter()
            .filter_map(|r| {
                let v = r.get(col)?;
                (!v.is_empty()).then(|| (r[0].clone(), v.clone()))
            })
            .collect();
        write_atomic(&out.join(format!("{name}.csv")), |w| {
            writeln!(w, "t,{name}")?;
            for (t, v) in &points {
                writeln!(w, "{t},{v}")?;
            }
            Ok(())
        })?;
        write_string(&out.join(format!("{name}.svg")), &line_chart(name, "t", &points))?;
    }
    Ok(rows.len())
}

/// `alpha,r,class_code` with 0 bounded, 1 blowup, 2 unresolved.
fn emit_heatmap(src: &Path, out: &Path) -> Result<usize> {
    let (_, rows) = read_table(src)?;
    let mut lines = vec!["alpha,r,class_code".to_string()];
    for r in &rows {
        let code = match r.get(2).map(String::as_str) {
            Some("bounded") => 0,
            Some("blowup") => 1,
            Some("unresolved") => 2,
            other => bail!("unknown classification {other:?} in {}", src.display()),
        };
        lines.push(format!("{},{},{code}", r[0], r[1]));
    }
    write_string(&out.join("heatmap.csv"), &(lines.join("\n") + "\n"))?;
    Ok(rows.len())
}

/// Returns the number of data rows consumed, so 0 means there was nothing to
/// plot.
pub fn plotdata(run_dir: &Path, out: &Path) -> Result<usize> {
    let diagnostics = run_dir.join(DIAGNOSTICS_FILE);
    let regimes = run_dir.join(REGIMES_FILE);
    if !diagnostics.is_file() && !regimes.is_file() {
        return Ok(0);
    }
    ensure_dir(out)?;
    let mut rows = 0;
    if diagnostics.is_file() {
        rows += emit_diagnostics(&diagnostics, out)?;
    }
    if regimes.is_file() {
        rows += emit_heatmap(&regimes, out)?;
    }
    Ok(rows)
}
