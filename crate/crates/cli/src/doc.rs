//! JSON documents describing surfaces and curves.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use pmc_helix::ambient::{axis, spaceform_circle, AmbientPoint, ProductAmbient};
use pmc_helix::frenet::{CurveKind, CurveSpec};
use pmc_helix::reconstruct::{build_case3, build_case4, build_case5, GridSpec, HnSign};
use pmc_helix::sampled::Provenance;
use pmc_helix::surface::{Family, ImmersionSpec};
use pmc_helix::verify::{ProbeGrid, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::grid_csv;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientDoc {
    pub c: f64,
    pub n: usize,
}

/// Either a named construction with parameters or a sampled grid on disk.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub nu: usize,
    pub nv: usize,
}

/// Looser-only overrides of the default tolerances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceDoc {
    pub scale: Option<f64>,
    pub structure: Option<f64>,
    pub pmc: Option<f64>,
    pub helix: Option<f64>,
    pub xi_identity: Option<f64>,
    pub identities: Option<f64>,
    pub ar_form: Option<f64>,
    pub pseudo_umbilical: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDocument {
    pub ambient: AmbientDoc,
    pub surface: SurfaceSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    /// Coordinate curve of this surface.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub through: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDocument {
    pub ambient: AmbientDoc,
    pub curve: CurveSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(path, e.to_string()))
}

/// Consumes named parameters, rejecting unknown names.
struct Params<'a> {
    kind: &'a str,
    map: BTreeMap<String, f64>,
}

impl<'a> Params<'a> {
    fn new(kind: &'a str, map: &BTreeMap<String, f64>) -> Self {
        Params {
            kind,
            map: map.clone(),
        }
    }

    fn get(&mut self, name: &str, default: Option<f64>) -> Result<f64, CliError> {
        match (self.map.remove(name), default) {
            (Some(v), _) if v.is_finite() => Ok(v),
            (Some(v), _) => Err(CliError::param(format!(
                "{}: parameter {name} = {v} is not finite",
                self.kind
            ))),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(CliError::param(format!(
                "{}: missing parameter \"{name}\"",
                self.kind
            ))),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.map.keys().next() {
            Some(k) => Err(CliError::param(format!(
                "{}: unknown parameter \"{k}\"",
                self.kind
            ))),
            None => Ok(()),
        }
    }
}

fn require_n(kind: &str, n: usize, want: usize) -> Result<(), CliError> {
    if n == want {
        Ok(())
    } else {
        Err(CliError::param(format!(
            "{kind} lives in M^{want}(c)×ℝ, got n = {n}"
        )))
    }
}

pub const SURFACE_KINDS: [&str; 8] = [
    "slice",
    "graph-strip",
    "case3",
    "torus-helix",
    "cmc-torus",
    "small-sphere",
    "case4",
    "case5",
];

/// Builds the surface described by `src`; relative grid paths resolve against `base`.
pub fn build_surface(
    ambient: AmbientDoc,
    src: &SurfaceSource,
    base: &Path,
) -> Result<ImmersionSpec, CliError> {
    let AmbientDoc { c, n } = ambient;
    match (&src.kind, &src.grid_csv) {
        (Some(_), Some(_)) => Err(CliError::param(
            "surface: give either \"kind\" or \"grid_csv\", not both".into(),
        )),
        (None, None) => Err(CliError::param(
            "surface: one of \"kind\" or \"grid_csv\" is required".into(),
        )),
        (None, Some(path)) => {
            if !src.params.is_empty() {
                return Err(CliError::param(
                    "surface: \"params\" only applies to \"kind\"".into(),
                ));
            }
            let path = base.join(path);
            let pa = ProductAmbient::with(c, n)?;
            let grid = grid_csv::read(&path, pa, Provenance::default())?;
            Ok(ImmersionSpec::sampled(grid, path.display().to_string()))
        }
        (Some(kind), None) => {
            let kind = kind.replace('_', "-");
            let mut p = Params::new(&kind, &src.params);
            let spec = match kind.as_str() {
                "slice" => {
                    let t0 = p.get("t0", Some(0.0))?;
                    ImmersionSpec::closed_form(
                        ProductAmbient::with(c, n)?,
                        Family::Slice { t0 },
                        "slice",
                    )?
                }
                "graph-strip" => ImmersionSpec::closed_form(
                    ProductAmbient::with(c, n)?,
                    Family::GraphStrip,
                    "graph_strip",
                )?,
                "case3" | "cylinder" => build_case3(c, n, p.get("H", None)?)?,
                "torus-helix" | "cmc-torus" => {
                    let r1 = p.get("r1", None)?;
                    let r2 = p.get("r2", None)?;
                    let slope = if kind == "torus-helix" {
                        p.get("slope", None)?
                    } else {
                        0.0
                    };
                    if kind == "cmc-torus" && r1 == r2 {
                        return Err(CliError::param(
                            "cmc-torus: r1 = r2 is the minimal Clifford torus".into(),
                        ));
                    }
                    let label = kind.replace('-', "_");
                    ImmersionSpec::closed_form(
                        ProductAmbient::with(c, n)?,
                        Family::TorusHelix { r1, r2, slope },
                        label,
                    )?
                }
                "small-sphere" => {
                    let rho = p.get("rho", None)?;
                    ImmersionSpec::closed_form(
                        ProductAmbient::with(c, n)?,
                        Family::SmallSphere { rho },
                        "small_sphere",
                    )?
                }
                "case4" => {
                    require_n("case4", n, 2)?;
                    let t = p.get("T", None)?;
                    let sign = if p.get("sign", Some(1.0))? < 0.0 {
                        HnSign::Minus
                    } else {
                        HnSign::Plus
                    };
                    let half = p.get("half", Some(1.0))?;
                    build_case4(c, t, sign, &GridSpec::centered(half, half))?
                }
                "case5" => {
                    require_n("case5", n, 4)?;
                    let h = p.get("H", None)?;
                    let t = p.get("T", None)?;
                    let half = p.get("half", Some(PI))?;
                    build_case5(c, h, t, &GridSpec::centered(half, half))?
                }
                other => {
                    return Err(CliError::param(format!(
                        "unknown surface kind \"{other}\" (expected one of {})",
                        SURFACE_KINDS.join(", ")
                    )))
                }
            };
            p.finish()?;
            Ok(spec)
        }
    }
}

impl SurfaceDocument {
    pub fn spec(&self, base: &Path) -> Result<ImmersionSpec, CliError> {
        build_surface(self.ambient, &self.surface, base)
    }

    pub fn probe_grid(&self) -> Result<ProbeGrid, CliError> {
        match self.grid {
            None => Ok(ProbeGrid::default()),
            Some(GridDoc { nu, nv }) if nu > 0 && nv > 0 => Ok(ProbeGrid { nu, nv }),
            Some(_) => Err(CliError::param("grid: nu and nv must be positive".into())),
        }
    }

    /// Defaults for `spec`, loosened by the document and then by `scale`.
    pub fn tolerances(&self, spec: &ImmersionSpec, scale: f64) -> Result<Tolerances, CliError> {
        check_scale(scale)?;
        let mut t = Tolerances::for_spec(spec);
        if let Some(doc) = &self.tolerances {
            if let Some(s) = doc.scale {
                check_scale(s)?;
                t = t.scaled(s);
            }
            let slots: [(&str, Option<f64>, &mut f64); 7] = [
                ("structure", doc.structure, &mut t.structure),
                ("pmc", doc.pmc, &mut t.pmc),
                ("helix", doc.helix, &mut t.helix),
                ("xi_identity", doc.xi_identity, &mut t.xi_identity),
                ("identities", doc.identities, &mut t.identities),
                ("ar_form", doc.ar_form, &mut t.ar_form),
                (
                    "pseudo_umbilical",
                    doc.pseudo_umbilical,
                    &mut t.pseudo_umbilical,
                ),
            ];
            for (name, value, slot) in slots {
                if let Some(v) = value {
                    if !(v >= *slot) {
                        return Err(CliError::param(format!(
                            "tolerances.{name} = {v} is tighter than the default {}; overrides may only loosen",
                            *slot
                        )));
                    }
                    *slot = v;
                }
            }
        }
        Ok(t.scaled(scale))
    }
}

pub fn check_scale(scale: f64) -> Result<(), CliError> {
    if scale >= 1.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(CliError::param(format!(
            "tolerance scale must be ≥ 1, got {scale}"
        )))
    }
}

pub const CURVE_KINDS: [&str; 4] = ["circle", "slant-helix", "vertical-line", "torus-loop"];

impl CurveDocument {
    pub fn spec(&self, base: &Path) -> Result<CurveSpec, CliError> {
        let AmbientDoc { c, n } = self.ambient;
        let src = &self.curve;
        let curve = match (&src.kind, &src.surface) {
            (Some(_), Some(_)) => {
                return Err(CliError::param(
                    "curve: give either \"kind\" or \"surface\"".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::param(
                    "curve: one of \"kind\" or \"surface\" is required".into(),
                ))
            }
            (None, Some(surface)) => {
                if !src.params.is_empty() {
                    return Err(CliError::param(
                        "curve: \"params\" only applies to \"kind\"".into(),
                    ));
                }
                let spec = build_surface(self.ambient, surface, base)?;
                let var = src.var.unwrap_or(0);
                if var > 1 {
                    return Err(CliError::param(format!(
                        "curve.var must be 0 or 1, got {var}"
                    )));
                }
                let through = match src.through {
                    Some(t) => t,
                    None => spec.domain().map(|r| 0.5 * (r[0] + r[1])),
                };
                CurveSpec::coordinate_curve(&spec, var, through)
            }
            (Some(kind), None) => {
                if src.var.is_some() || src.through.is_some() {
                    return Err(CliError::param(
                        "curve: \"var\"/\"through\" only apply to surface curves".into(),
                    ));
                }
                let kind = kind.replace('_', "-");
                let mut p = Params::new(&kind, &src.params);
                let pa = ProductAmbient::with(c, n)?;
                let circle = |kappa: f64| -> Result<CurveSpec, CliError> {
                    let p0 = AmbientPoint::new(pa.canonical_point());
                    Ok(spaceform_circle(
                        pa.space_form(),
                        &p0,
                        &axis(&p0, 1),
                        &axis(&p0, 2),
                        kappa,
                    )?)
                };
                let curve = match kind.as_str() {
                    "circle" => circle(p.get("kappa", None)?)?,
                    "slant-helix" => {
                        let base = circle(p.get("kappa", None)?)?;
                        let slope = p.get("slope", None)?;
                        if !(0.0..1.0).contains(&slope) {
                            return Err(CliError::param(format!(
                                "slant-helix: slope must lie in [0, 1), got {slope}"
                            )));
                        }
                        let CurveKind::Circle(cp) = base.kind().clone() else {
                            unreachable!("circle constructor returns a circle")
                        };
                        let (a, b) = base.interval();
                        CurveSpec::new(
                            pa.clone(),
                            CurveKind::SlantHelix { circle: cp, slope },
                            (a, b),
                            true,
                        )
                    }
                    "vertical-line" => CurveSpec::new(
                        pa.clone(),
                        CurveKind::VerticalLine {
                            base: pa.canonical_point(),
                        },
                        (-1.0, 1.0),
                        true,
                    ),
                    "torus-loop" => {
                        if c <= 0.0 || n != 3 {
                            return Err(CliError::param("torus-loop lives in S³(c)×ℝ".into()));
                        }
                        let r1 = p.get("r1", None)?;
                        let r2 = p.get("r2", None)?;
                        let a = p.get("loop_radius", None)?;
                        if (r1 * r1 + r2 * r2 - 1.0 / c).abs() > 1e-12 / c {
                            return Err(CliError::param(
                                "torus-loop: r1² + r2² must equal 1/c".into(),
                            ));
                        }
                        CurveSpec::new(
                            pa.clone(),
                            CurveKind::TorusLoop {
                                r1,
                                r2,
                                loop_radius: a,
                            },
                            (0.0, std::f64::consts::TAU * a),
                            true,
                        )
                    }
                    other => return Err(CliError::param(format!(
                        "unknown curve kind \"{other}\" (expected one of {} or a surface curve)",
                        CURVE_KINDS.join(", ")
                    ))),
                };
                p.finish()?;
                curve
            }
        };
        Ok(match self.interval {
            Some([a, b]) if a < b => curve.with_interval((a, b)),
            Some([a, b]) => return Err(CliError::param(format!("interval [{a}, {b}] is empty"))),
            None => curve,
        })
    }
}
