//! Artifact writers. Every number in a CSV is printed with 17 significant
//! digits so files round-trip exactly and compare byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use qmetro_core::design::{ExperimentCounts, SUPPORT_TOL};
use qmetro_core::fisher::FisherTable;

use crate::error::CliError;
use crate::run::{CellReport, QfiSweep, RunReport};

pub const CURVES_HEADER: &str = "theta,f_ac,f_wc,f_max,f_qfi_best_beta";
pub const SWEEP_HEADER: &str = "beta,f_qfi";
pub const COUNTS_HEADER: &str = "design,config,phi,beta,lambda,count";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub fn curves_csv(cell: &CellReport) -> String {
    let c = &cell.curves;
    let mut out = format!("{CURVES_HEADER}\n");
    for r in 0..c.theta.len() {
        let row = [c.theta[r], c.f_ac[r], c.f_wc[r], c.f_max[r], c.f_qfi_best_beta[r]];
        csv_row(&mut out, &row.map(fmt_f64));
    }
    out
}

fn sweep_csv(betas: &[f64], values: &[f64]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for (b, v) in betas.iter().zip(values) {
        csv_row(&mut out, &[fmt_f64(*b), fmt_f64(*v)]);
    }
    out
}

pub fn qfi_sweep_csv(sweep: &QfiSweep) -> String {
    sweep_csv(&sweep.betas, &sweep.values)
}

/// The scenario's own input angles, the points to mark on the sweep.
pub fn qfi_grid_csv(sweep: &QfiSweep) -> String {
    sweep_csv(&sweep.grid_betas, &sweep.grid_values)
}

pub fn counts_csv(cell: &CellReport) -> String {
    let mut out = format!("{COUNTS_HEADER}\n");
    for (design, counts) in [(&cell.average, &cell.average_counts), (&cell.worst, &cell.worst_counts)] {
        for (k, (&w, &n)) in design.lambda.iter().zip(&counts.counts).enumerate() {
            if n == 0 && w <= SUPPORT_TOL {
                continue;
            }
            let label = cell.table.grid().label(k);
            let _ = writeln!(
                out,
                "{},{k},{},{},{},{n}",
                design.kind.name(),
                fmt_f64(label.phi),
                fmt_f64(label.beta),
                fmt_f64(w)
            );
        }
    }
    out
}

fn counts_json(counts: &ExperimentCounts) -> Value {
    json!({
        "total": counts.total,
        "lower_bound": counts.lower_bound,
        "upper_bound": counts.upper_bound,
        "nonzero": counts.counts.iter().enumerate().filter(|(_, &n)| n > 0).map(|(k, &n)| json!([k, n])).collect::<Vec<_>>(),
    })
}

fn grid_json(table: &FisherTable) -> Value {
    json!({
        "n_configs": table.n_configs(),
        "n_povm": table.grid().n_povm(),
        "n_input": table.grid().n_input(),
        "singular_entries": table.singular_count(),
    })
}

pub fn design_json(cell: &CellReport) -> Value {
    json!({
        "gamma": cell.gamma,
        "mode": cell.mode,
        "grid": grid_json(&cell.table),
        "average_case": cell.average,
        "worst_case": cell.worst,
        "counts": {
            "average_case": counts_json(&cell.average_counts),
            "worst_case": counts_json(&cell.worst_counts),
        },
    })
}

fn stem(cell: &CellReport) -> String {
    format!("{}_{}", cell.gamma, cell.mode)
}

fn summary(report: &RunReport, files: &[String]) -> Value {
    let cells: Vec<Value> = report
        .cells
        .iter()
        .map(|c| {
            let support = |d: &qmetro_core::DesignDistribution| {
                d.support
                    .iter()
                    .map(|s| json!({ "config": s.config, "phi": s.phi, "beta": s.beta, "weight": s.weight }))
                    .collect::<Vec<_>>()
            };
            json!({
                "gamma": c.gamma,
                "mode": c.mode,
                "grid": grid_json(&c.table),
                "average_case": { "objective": c.average.objective, "support": support(&c.average) },
                "worst_case": { "objective": c.worst.objective, "support": support(&c.worst) },
                "counts": {
                    "average_case": [c.average_counts.lower_bound, c.average_counts.upper_bound],
                    "worst_case": [c.worst_counts.lower_bound, c.worst_counts.upper_bound],
                },
            })
        })
        .collect();
    json!({
        "tool": "qmetro",
        "version": report.version,
        "scenario_sha256": report.scenario_sha256,
        "n_theta": report.thetas.len(),
        "theta_range": [report.thetas.first(), report.thetas.last()],
        "cells": cells,
        "warnings": report.warnings().collect::<Vec<_>>(),
        "files": files,
    })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

/// All artifacts as (file name, contents), in a fixed order.
pub fn render(report: &RunReport) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for cell in &report.cells {
        let stem = stem(cell);
        files.push((format!("curves_{stem}.csv"), curves_csv(cell)));
        files.push((format!("design_{stem}.json"), pretty(&design_json(cell))));
        files.push((format!("counts_{stem}.csv"), counts_csv(cell)));
    }
    for sweep in &report.sweeps {
        files.push((format!("qfi_sweep_{}.csv", sweep.gamma), qfi_sweep_csv(sweep)));
        files.push((format!("qfi_grid_{}.csv", sweep.gamma), qfi_grid_csv(sweep)));
    }
    let names: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    files.push(("report.json".to_string(), pretty(&summary(report, &names))));
    files
}

pub fn emit(report: &RunReport, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();
    for (name, contents) in render(report) {
        let path = out_dir.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}
