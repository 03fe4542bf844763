//! Grid CSV: header `u,v,x0,…`, one row per node, u-major, 17 significant digits.

use std::io::Write;
use std::path::Path;

use pmc_helix::ambient::ProductAmbient;
use pmc_helix::sampled::{Axis, Provenance, SampledImmersion};
use pmc_helix::surface::ImmersionSpec;

use crate::error::CliError;

/// Round-trip exact formatting of an f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn header(dim: usize) -> Vec<String> {
    let mut h = vec!["u".to_string(), "v".to_string()];
    h.extend((0..dim).map(|k| format!("x{k}")));
    h
}

fn write_rows<W: Write>(
    out: W,
    dim: usize,
    rows: impl Iterator<Item = (f64, f64, Vec<f64>)>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(dim))?;
    for (u, v, p) in rows {
        let mut rec = vec![num(u), num(v)];
        rec.extend(p.into_iter().map(num));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn to_cli(path: &Path, e: csv::Error) -> CliError {
    CliError::input(path, e.to_string())
}

pub fn write_sampled<W: Write>(out: W, grid: &SampledImmersion) -> csv::Result<()> {
    let (s, t) = grid.axes();
    let rows = (0..s.count).flat_map(move |i| (0..t.count).map(move |j| (i, j)));
    write_rows(
        out,
        grid.ambient().dim(),
        rows.map(|(i, j)| (s.node(i), t.node(j), grid.position(i, j).to_vec())),
    )
}

/// Samples any surface on a `nodes × nodes` lattice over its domain.
pub fn write_surface<W: Write>(out: W, spec: &ImmersionSpec, nodes: usize) -> Result<(), CliError> {
    if let Some(grid) = spec.sampled_grid() {
        return write_sampled(out, grid).map_err(|e| CliError::param(e.to_string()));
    }
    let dom = spec.domain();
    let axes = dom.map(|[a, b]| Axis::new(a, (b - a) / (nodes - 1) as f64, nodes));
    let mut rows = Vec::with_capacity(nodes * nodes);
    for i in 0..nodes {
        for j in 0..nodes {
            let (u, v) = (axes[0].node(i), axes[1].node(j));
            rows.push((u, v, spec.position([u, v])?));
        }
    }
    write_rows(out, spec.ambient().dim(), rows.into_iter())
        .map_err(|e| CliError::param(e.to_string()))
}

fn regular_axis(path: &Path, name: &str, values: &[f64]) -> Result<Axis, CliError> {
    let n = values.len();
    if n < 2 {
        return Err(CliError::input(
            path,
            format!("column {name}: need at least 2 distinct values"),
        ));
    }
    let step = (values[n - 1] - values[0]) / (n - 1) as f64;
    if !(step > 0.0) {
        return Err(CliError::input(
            path,
            format!("column {name}: values must increase"),
        ));
    }
    for (k, x) in values.iter().enumerate() {
        if (x - (values[0] + step * k as f64)).abs() > 1e-9 * step.max(1.0) {
            return Err(CliError::input(
                path,
                format!("column {name}: value {k} ({x}) breaks the regular spacing"),
            ));
        }
    }
    Ok(Axis::new(values[0], step, n))
}

pub fn read(
    path: &Path,
    ambient: ProductAmbient,
    provenance: Provenance,
) -> Result<SampledImmersion, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| to_cli(path, e))?;
    let want = header(ambient.dim());
    let head = r.headers().map_err(|e| to_cli(path, e))?.clone();
    if head.iter().collect::<Vec<_>>() != want.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(CliError::input(
            path,
            format!(
                "line 1: header must be \"{}\" for this ambient",
                want.join(",")
            ),
        ));
    }
    let mut us = Vec::new();
    let mut vs = Vec::new();
    let mut positions = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| to_cli(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let mut row = Vec::with_capacity(rec.len());
        for (k, field) in rec.iter().enumerate() {
            let x: f64 = field.trim().parse().map_err(|_| {
                CliError::input(
                    path,
                    format!(
                        "line {line}, field {} ({}): not a number: {field:?}",
                        k + 1,
                        want[k]
                    ),
                )
            })?;
            row.push(x);
        }
        us.push(row[0]);
        vs.push(row[1]);
        positions.push(row[2..].to_vec());
    }
    let nv = us.iter().take_while(|u| **u == us[0]).count();
    if nv == 0 || us.len() % nv != 0 {
        return Err(CliError::input(
            path,
            "rows do not form a u-major rectangular grid",
        ));
    }
    let nu = us.len() / nv;
    let u_nodes: Vec<f64> = (0..nu).map(|i| us[i * nv]).collect();
    let v_nodes: Vec<f64> = vs[..nv].to_vec();
    for i in 0..nu {
        for j in 0..nv {
            let k = i * nv + j;
            if us[k] != u_nodes[i] || vs[k] != v_nodes[j] {
                return Err(CliError::input(
                    path,
                    format!(
                        "line {}: node ({}, {}) out of u-major order",
                        k + 2,
                        us[k],
                        vs[k]
                    ),
                ));
            }
        }
    }
    let s_axis = regular_axis(path, "u", &u_nodes)?;
    let t_axis = regular_axis(path, "v", &v_nodes)?;
    for (k, p) in positions.iter().enumerate() {
        let res = ambient.on_manifold_residual_raw(p);
        if !(res <= 1e-8) {
            return Err(CliError::input(
                path,
                format!("line {}: point is off M^n(c)×ℝ (residual {res:e})", k + 2),
            ));
        }
    }
    Ok(SampledImmersion::new(
        ambient, s_axis, t_axis, positions, None, provenance,
    )?)
}

pub fn write_file(
    path: &Path,
    f: impl FnOnce(std::fs::File) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f(file)
}
