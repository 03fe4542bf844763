//! WebAssembly bindings: build a surface by name, verify and classify it,
//! trace Frenet curvatures along its coordinate curves, and check the
//! compatibility of reconstruction data. Every export returns JSON.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use pmc_helix::ambient::ProductAmbient;
use pmc_helix::frenet::{frenet_apparatus, sample_parameters, CurveSpec};
use pmc_helix::reconstruct::{
    build_case3, build_case4, build_case5, case4_data, case5_data, compatibility_check, GridSpec,
    HnSign,
};
use pmc_helix::surface::{Family, ImmersionSpec};
use pmc_helix::verify::{classify_surface, verify, ProbeGrid, Tolerances};
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub const KINDS: [&str; 5] = ["case3", "case4", "case5", "torus-helix", "small-sphere"];

fn param(params: &BTreeMap<String, f64>, name: &str, default: Option<f64>) -> Result<f64, String> {
    params
        .get(name)
        .copied()
        .or(default)
        .ok_or_else(|| format!("missing parameter \"{name}\""))
}

/// Builds one of [`KINDS`] from a JSON object of parameters.
pub fn surface(kind: &str, c: f64, n: usize, params_json: &str) -> Result<ImmersionSpec, String> {
    let p: BTreeMap<String, f64> = serde_json::from_str(params_json).map_err(|e| e.to_string())?;
    let spec = match kind {
        "case3" => build_case3(c, n, param(&p, "H", None)?),
        "case4" => {
            let sign = if param(&p, "sign", Some(1.0))? < 0.0 {
                HnSign::Minus
            } else {
                HnSign::Plus
            };
            let half = param(&p, "half", Some(1.0))?;
            build_case4(
                c,
                param(&p, "T", None)?,
                sign,
                &GridSpec::centered(half, half),
            )
        }
        "case5" => {
            let half = param(&p, "half", Some(PI))?;
            build_case5(
                c,
                param(&p, "H", None)?,
                param(&p, "T", None)?,
                &GridSpec::centered(half, half),
            )
        }
        "torus-helix" => {
            let family = Family::TorusHelix {
                r1: param(&p, "r1", None)?,
                r2: param(&p, "r2", None)?,
                slope: param(&p, "slope", None)?,
            };
            ProductAmbient::with(c, 3)
                .and_then(|pa| ImmersionSpec::closed_form(pa, family, "torus_helix"))
        }
        "small-sphere" => {
            let family = Family::SmallSphere {
                rho: param(&p, "rho", None)?,
            };
            ProductAmbient::with(c, n)
                .and_then(|pa| ImmersionSpec::closed_form(pa, family, "small_sphere"))
        }
        other => {
            return Err(format!(
                "unknown kind \"{other}\"; expected one of {}",
                KINDS.join(", ")
            ))
        }
    };
    spec.map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct CheckRow {
    name: String,
    max: f64,
    tol: f64,
    pass: bool,
    status: pmc_helix::verify::CheckStatus,
}

#[derive(Serialize)]
struct Summary {
    class: String,
    all_pass: bool,
    t_norm: f64,
    h_norm: f64,
    checks: Vec<CheckRow>,
    flags: Vec<String>,
}

/// Verification and classification summary on a `grid`×`grid` probe grid.
pub fn verify_summary(
    kind: &str,
    c: f64,
    n: usize,
    params_json: &str,
    grid: usize,
) -> Result<String, String> {
    let spec = surface(kind, c, n, params_json)?;
    let grid = ProbeGrid {
        nu: grid.max(1),
        nv: grid.max(1),
    };
    let report = verify(&spec, &grid, &Tolerances::for_spec(&spec)).map_err(|e| e.to_string())?;
    let cl = classify_surface(&spec, &report);
    let summary = Summary {
        class: cl.class.to_string(),
        all_pass: report.all_pass(),
        t_norm: cl.t_norm,
        h_norm: cl.h_norm,
        checks: report
            .checks
            .iter()
            .map(|(name, e)| CheckRow {
                name: name.clone(),
                max: e.max,
                tol: e.tol,
                pass: e.pass,
                status: e.status,
            })
            .collect(),
        flags: cl.flags.clone(),
    };
    Ok(serde_json::to_string(&summary).expect("summary serializes"))
}

#[derive(Serialize)]
struct FrenetRows {
    s: Vec<f64>,
    kappa: Vec<Vec<f64>>,
}

/// Frenet curvatures along the coordinate curve `var` through the domain center.
pub fn frenet_rows(
    kind: &str,
    c: f64,
    n: usize,
    params_json: &str,
    var: usize,
    samples: usize,
) -> Result<String, String> {
    if var > 1 {
        return Err("var must be 0 or 1".into());
    }
    let spec = surface(kind, c, n, params_json)?;
    let through = spec.domain().map(|r| 0.5 * (r[0] + r[1]));
    let curve = CurveSpec::coordinate_curve(&spec, var, through);
    let s = sample_parameters(&curve, samples.max(1));
    let kappa = s
        .iter()
        .map(|&t| frenet_apparatus(&curve, t, 4).map(|f| f.curvatures))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&FrenetRows { s, kappa }).expect("rows serialize"))
}

/// Compatibility residuals of the case 4 (`c < 0`) or case 5 (`c > 0`) frame data.
pub fn compatibility_summary(c: f64, h: f64, t: f64, sign: f64) -> Result<String, String> {
    let data = if c < 0.0 {
        case4_data(
            c,
            t,
            if sign < 0.0 {
                HnSign::Minus
            } else {
                HnSign::Plus
            },
        )
    } else {
        case5_data(c, h, t)
    }
    .map_err(|e| e.to_string())?;
    let r = compatibility_check(&data);
    Ok(serde_json::to_string(&r).expect("report serializes"))
}

#[wasm_bindgen(js_name = verifySurface)]
pub fn verify_surface_js(
    kind: &str,
    c: f64,
    n: usize,
    params_json: &str,
    grid: usize,
) -> Result<String, JsValue> {
    verify_summary(kind, c, n, params_json, grid).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = frenetCurvatures)]
pub fn frenet_js(
    kind: &str,
    c: f64,
    n: usize,
    params_json: &str,
    var: usize,
    samples: usize,
) -> Result<String, JsValue> {
    frenet_rows(kind, c, n, params_json, var, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = compatibility)]
pub fn compatibility_js(c: f64, h: f64, t: f64, sign: f64) -> Result<String, JsValue> {
    compatibility_summary(c, h, t, sign).map_err(|e| JsValue::from_str(&e))
}
