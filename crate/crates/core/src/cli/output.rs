//! JSON report and CSV sidecar tables.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::analysis::{Analysis, ProfileWithMode};
use crate::error::Result;
use crate::mi::BlockScan;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_mi_table(path: &Path, scan: &BlockScan) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["m", "r", "mi_bits"])?;
    for p in &scan.profiles {
        for (r, v) in p.distances.iter().zip(&p.values) {
            w.write_record([p.block_size.to_string(), r.to_string(), fmt_f64(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_correlation(path: &Path, c: &ProfileWithMode) -> Result<()> {
    let p = &c.profile;
    let mut w = csv_writer(path)?;
    w.write_record([
        "r",
        "connected",
        "full",
        "connected_full_state",
        "p_contraction_joint",
        "p_contraction_product",
    ])?;
    for k in 0..p.distances.len() {
        w.write_record([
            p.distances[k].to_string(),
            fmt_f64(p.connected[k]),
            fmt_f64(p.full[k]),
            fmt_f64(p.connected_full_state[k]),
            fmt_f64(p.p_contraction_joint[k]),
            fmt_f64(p.p_contraction_product[k]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_mode(path: &Path, c: &ProfileWithMode) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["k", "magnitude"])?;
    for (k, m) in c.mode.momenta.iter().zip(&c.mode.magnitudes) {
        w.write_record([fmt_f64(*k), fmt_f64(*m)])?;
    }
    w.flush()?;
    Ok(())
}

fn write_spectrum(path: &Path, analysis: &Analysis) -> Result<bool> {
    let Some(reference) = &analysis.reference else {
        return Ok(false);
    };
    let weights = match &analysis.diagonal {
        Some(crate::orderparam::DiagonalOrder::Found { spec, .. }) => spec.weights.clone(),
        _ => Vec::new(),
    };
    let mut w = csv_writer(path)?;
    w.write_record(["index", "p", "weight"])?;
    for (k, p) in reference.spectrum.iter().enumerate() {
        let weight = weights.get(k).map_or_else(|| fmt_f64(0.0), |x| fmt_f64(*x));
        w.write_record([k.to_string(), fmt_f64(*p), weight])?;
    }
    w.flush()?;
    Ok(true)
}

/// CSV tables for an analysis; returns the files written.
pub fn write_analysis_tables(dir: &Path, analysis: &Analysis) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mi = dir.join("mi_table.csv");
    write_mi_table(&mi, &analysis.mi_scan)?;
    written.push(mi);
    let spectrum = dir.join("spectrum.csv");
    if write_spectrum(&spectrum, analysis)? {
        written.push(spectrum);
    }
    for c in &analysis.correlations {
        let path = dir.join(format!("correlation_{}.csv", c.profile.label));
        write_correlation(&path, c)?;
        written.push(path);
        let path = dir.join(format!("mode_{}.csv", c.profile.label));
        write_mode(&path, c)?;
        written.push(path);
    }
    Ok(written)
}
