// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Per-seed CSV files and their readers.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use bipartite_landscape::optimizer::{OptimizerTrace, TraceRecord};

pub const TRACE_HEADER: [&str; 12] = [
    "iter",
    "F",
    "one_minus_F",
    "J",
    "gamma",
    "grad_norm",
    "rank_Gc",
    "rank_Gcphi",
    "degenerate",
    "finite_difference",
    "sum_sin_omega",
    "phi_grad_inf",
];

/// Rendering used by every output file: 17 significant digits in
/// scientific notation, which round-trips any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trace_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("trace_seed{seed}.csv"))
}

pub fn spectra_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("spectra_seed{seed}.csv"))
}

pub fn controls_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("controls_seed{seed}.csv"))
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn writer(path: &Path) -> std::io::Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn finish(mut w: csv::Writer<BufWriter<File>>) -> std::io::Result<()> {
    w.flush()?;
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?.flush()
}

pub fn write_trace(path: &Path, trace: &OptimizerTrace) -> std::io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        w.write_record([
            r.iter.to_string(),
            fmt_f64(r.fidelity),
            fmt_f64(r.one_minus_f),
            fmt_f64(r.j_value),
            fmt_f64(r.gamma),
            fmt_f64(r.grad_norm),
            r.rank_g_c.to_string(),
            r.rank_g_stack.to_string(),
            flag(r.degenerate).to_string(),
            flag(r.finite_difference).to_string(),
            fmt_f64(r.sum_sin_omega),
            fmt_f64(r.phi_gradient_inf),
        ])?;
    }
    finish(w)
}

/// Long format: one row per singular value.
pub fn write_spectra(path: &Path, trace: &OptimizerTrace) -> std::io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["iter", "matrix", "index", "sigma"])?;
    for r in &trace.records {
        let sets = [("Gc", &r.g_c_singular_values), ("Gcphi", &r.g_stack_singular_values)];
        for (name, values) in sets {
            for (i, s) in values.iter().flatten().enumerate() {
                w.write_record([r.iter.to_string(), name.to_string(), i.to_string(), fmt_f64(*s)])?;
            }
        }
    }
    finish(w)
}

pub fn write_controls(path: &Path, controls: &[f64], n_controls: usize) -> std::io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["interval", "control", "value"])?;
    for (k, v) in controls.iter().enumerate() {
        w.write_record([(k / n_controls).to_string(), (k % n_controls).to_string(), fmt_f64(*v)])?;
    }
    finish(w)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()
}

/// Row of a trace file as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub fidelity: f64,
    pub one_minus_f: f64,
    pub rank_g_c: usize,
    pub rank_g_stack: usize,
    pub degenerate: bool,
    pub sum_sin_omega: f64,
    pub phi_gradient_inf: f64,
}

fn bad_data(msg: String) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, msg)
}

pub fn read_trace(path: &Path) -> std::io::Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| bad_data(e.to_string()))?;
    let header = r.headers().map_err(|e| bad_data(e.to_string()))?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(bad_data(format!("{}: unexpected trace header", path.display())));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad_data(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let parse_f = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|e| bad_data(format!("{}:{}: column {}: {e}", path.display(), line + 2, TRACE_HEADER[i])))
        };
        let parse_u = |i: usize| {
            field(i)
                .parse::<usize>()
                .map_err(|e| bad_data(format!("{}:{}: column {}: {e}", path.display(), line + 2, TRACE_HEADER[i])))
        };
        rows.push(TraceRow {
            iter: parse_u(0)?,
            fidelity: parse_f(1)?,
            one_minus_f: parse_f(2)?,
            rank_g_c: parse_u(6)?,
            rank_g_stack: parse_u(7)?,
            degenerate: field(8) == "1",
            sum_sin_omega: parse_f(10)?,
            phi_gradient_inf: parse_f(11)?,
        });
    }
    Ok(rows)
}

pub fn read_controls(path: &Path) -> std::io::Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| bad_data(e.to_string()))?;
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad_data(e.to_string()))?;
        let v = rec
            .get(2)
            .unwrap_or("")
            .parse::<f64>()
            .map_err(|e| bad_data(format!("{}: {e}", path.display())))?;
        values.push(v);
    }
    Ok(values)
}

/// Most frequent value; ties go to the smaller value.
pub fn modal_value<I: IntoIterator<Item = usize>>(values: I) -> Option<usize> {
    let mut counts = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    let mut best: Option<(usize, usize)> = None;
    for (v, n) in counts {
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((v, n));
        }
    }
    best.map(|(v, _)| v)
}

/// Ranks of every recorded iterate, for modal summaries.
pub fn rank_columns(records: &[TraceRecord]) -> (Vec<usize>, Vec<usize>) {
    records.iter().map(|r| (r.rank_g_c, r.rank_g_stack)).unzip()
}
