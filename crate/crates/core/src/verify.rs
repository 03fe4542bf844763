//! Residual checks over a probe grid and the case classifier.

use std::collections::BTreeMap;
use std::fmt;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::surface::{IdentityResiduals, ImmersionKind, ImmersionSpec, LocalGeometry, ANGLE_TOL};

/// Cell-centred probe grid over the parameter domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProbeGrid {
    pub nu: usize,
    pub nv: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        ProbeGrid { nu: 64, nv: 64 }
    }
}

impl ProbeGrid {
    pub fn points(&self, domain: [[f64; 2]; 2]) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.nu * self.nv);
        for i in 0..self.nu {
            for j in 0..self.nv {
                let u = domain[0][0]
                    + (domain[0][1] - domain[0][0]) * (i as f64 + 0.5) / self.nu as f64;
                let v = domain[1][0]
                    + (domain[1][1] - domain[1][0]) * (j as f64 + 0.5) / self.nv as f64;
                out.push([u, v]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub structure: f64,
    pub pmc: f64,
    pub helix: f64,
    pub xi_identity: f64,
    pub identities: f64,
    pub ar_form: f64,
    pub pseudo_umbilical: f64,
}

impl Tolerances {
    pub fn closed_form() -> Self {
        Tolerances {
            structure: 1e-6,
            pmc: 1e-6,
            helix: 1e-6,
            xi_identity: 1e-7,
            identities: 1e-5,
            ar_form: 1e-5,
            pseudo_umbilical: 1e-6,
        }
    }

    pub fn reconstructed() -> Self {
        Tolerances {
            structure: 1e-5,
            pmc: 1e-5,
            xi_identity: 1e-5,
            ..Self::closed_form()
        }
    }

    pub fn for_spec(spec: &ImmersionSpec) -> Self {
        match spec.kind() {
            ImmersionKind::ClosedForm(_) => Self::closed_form(),
            ImmersionKind::Sampled(_) => Self::reconstructed(),
        }
    }

    /// Every tolerance multiplied by `k` (k ≥ 1 only loosens).
    pub fn scaled(&self, k: f64) -> Self {
        let k = k.max(1.0);
        Tolerances {
            structure: self.structure * k,
            pmc: self.pmc * k,
            helix: self.helix * k,
            xi_identity: self.xi_identity * k,
            identities: self.identities * k,
            ar_form: self.ar_form * k,
            pseudo_umbilical: self.pseudo_umbilical * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Checked,
    /// Reported but never fails the report.
    Informational,
    /// Preconditions fail on every probe.
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub max: f64,
    pub mean: f64,
    pub tol: f64,
    pub pass: bool,
    pub points: usize,
    pub status: CheckStatus,
}

impl CheckEntry {
    fn from_values(values: &[f64], tol: f64, status: CheckStatus) -> Self {
        if values.is_empty() {
            return CheckEntry {
                max: 0.0,
                mean: 0.0,
                tol,
                pass: true,
                points: 0,
                status: CheckStatus::Inapplicable,
            };
        }
        let max = values.iter().copied().fold(0.0, f64::max);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        CheckEntry {
            max,
            mean,
            tol,
            pass: max <= tol,
            points: values.len(),
            status,
        }
    }

    fn spread(values: &[f64], tol: f64) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread = hi - lo;
        CheckEntry {
            max: spread,
            mean: spread,
            tol,
            pass: spread <= tol,
            points: values.len(),
            status: CheckStatus::Checked,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarStat {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl ScalarStat {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        ScalarStat {
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Largest magnitude over the grid.
    pub fn abs_max(&self) -> f64 {
        self.min.abs().max(self.max.abs())
    }
}

/// Everything measured at one probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSample {
    pub uv: [f64; 2],
    pub gauss: f64,
    pub codazzi: f64,
    pub ricci: f64,
    pub pmc: f64,
    pub xi_identity: f64,
    pub pseudo_umbilical: f64,
    pub ar_form: f64,
    pub identities: Option<IdentityResiduals>,
    pub t_norm: f64,
    pub h_norm: f64,
    pub k: f64,
    pub k_gauss: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub h_dot_n: f64,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub first_normal_rank: usize,
}

fn sample(spec: &ImmersionSpec, uv: [f64; 2]) -> Result<PointSample> {
    let lg = LocalGeometry::new(spec, uv)?;
    let fd = lg.fundamental();
    let beta = if fd.h_norm > 1e-8 && fd.n_norm > 1e-8 {
        Some(
            (fd.h_dot_n / (fd.h_norm * fd.n_norm))
                .clamp(-1.0, 1.0)
                .acos(),
        )
    } else {
        None
    };
    let lambda = lg.mean_curvature_frame().map(|f| f.shape[2][0][0]);
    Ok(PointSample {
        uv,
        gauss: lg.gauss_residual(),
        codazzi: lg.codazzi_residual(),
        ricci: lg.ricci_residual(),
        pmc: lg.pmc_residual(),
        xi_identity: lg.xi_identity_residual(),
        pseudo_umbilical: lg.pseudo_umbilical_defect(),
        ar_form: lg.ar_form_residual(),
        identities: lg.identity_residuals(),
        t_norm: fd.t_norm,
        h_norm: fd.h_norm,
        k: lg.k_intrinsic.value(),
        k_gauss: lg.k_extrinsic(),
        lambda1: fd.lambda1,
        lambda2: fd.lambda2,
        h_dot_n: fd.h_dot_n,
        beta,
        lambda,
        first_normal_rank: lg.first_normal_rank(1e-6),
    })
}

/// Samples every probe of `grid` (in parallel when enabled), in grid order.
pub fn survey(spec: &ImmersionSpec, grid: &ProbeGrid) -> Result<Vec<PointSample>> {
    let pts = grid.points(spec.domain());
    #[cfg(feature = "parallel")]
    let out = pts.par_iter().map(|uv| sample(spec, *uv)).collect();
    #[cfg(not(feature = "parallel"))]
    let out = pts.iter().map(|uv| sample(spec, *uv)).collect();
    out
}

pub const IDENTITY_CHECKS: [&str; 6] = [
    "e1_lambda",
    "e2_lambda",
    "gaussian_curvature",
    "e_hn",
    "e_k",
    "balance",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub label: String,
    pub grid: ProbeGrid,
    pub checks: BTreeMap<String, CheckEntry>,
    pub scalars: BTreeMap<String, ScalarStat>,
    pub max_first_normal_rank: usize,
    /// 1 for closed forms; the structure-equation ladder rung otherwise.
    pub tolerances: Tolerances,
    pub c: f64,
    pub n: usize,
}

impl ResidualReport {
    pub fn check(&self, name: &str) -> &CheckEntry {
        &self.checks[name]
    }

    pub fn scalar(&self, name: &str) -> &ScalarStat {
        &self.scalars[name]
    }

    /// All checks with status `Checked` pass.
    pub fn all_pass(&self) -> bool {
        self.checks
            .values()
            .all(|e| e.status != CheckStatus::Checked || e.pass)
    }

    pub fn pseudo_umbilical(&self) -> bool {
        self.check("pseudo_umbilical").pass
    }
}

fn col(samples: &[PointSample], f: impl Fn(&PointSample) -> f64) -> Vec<f64> {
    samples.iter().map(f).collect()
}

pub fn report_from_samples(
    spec: &ImmersionSpec,
    grid: &ProbeGrid,
    samples: &[PointSample],
    tol: &Tolerances,
) -> ResidualReport {
    let pa = spec.ambient();
    let mut checks = BTreeMap::new();
    let mut put = |name: &str, e: CheckEntry| {
        checks.insert(name.to_string(), e);
    };
    let checked = CheckStatus::Checked;
    put(
        "gauss",
        CheckEntry::from_values(&col(samples, |s| s.gauss), tol.structure, checked),
    );
    put(
        "codazzi",
        CheckEntry::from_values(&col(samples, |s| s.codazzi), tol.structure, checked),
    );
    put(
        "ricci",
        CheckEntry::from_values(&col(samples, |s| s.ricci), tol.structure, checked),
    );
    put(
        "pmc",
        CheckEntry::from_values(&col(samples, |s| s.pmc), tol.pmc, checked),
    );
    put(
        "helix",
        CheckEntry::spread(&col(samples, |s| s.t_norm), tol.helix),
    );
    put(
        "xi_identity",
        CheckEntry::from_values(&col(samples, |s| s.xi_identity), tol.xi_identity, checked),
    );
    put(
        "pseudo_umbilical",
        CheckEntry::from_values(
            &col(samples, |s| s.pseudo_umbilical),
            tol.pseudo_umbilical,
            CheckStatus::Informational,
        ),
    );
    let ar = if pa.n() == 2 {
        col(samples, |s| s.ar_form)
    } else {
        Vec::new()
    };
    put(
        "ar_form",
        CheckEntry::from_values(&ar, tol.ar_form, CheckStatus::Informational),
    );
    let ids: Vec<IdentityResiduals> = samples.iter().filter_map(|s| s.identities).collect();
    let pick = |f: fn(&IdentityResiduals) -> f64| ids.iter().map(f).collect::<Vec<_>>();
    let fields: [fn(&IdentityResiduals) -> f64; 6] = [
        |r| r.e1_lambda,
        |r| r.e2_lambda,
        |r| r.gaussian_curvature,
        |r| r.e_hn,
        |r| r.e_k,
        |r| r.balance,
    ];
    for (name, f) in IDENTITY_CHECKS.iter().zip(fields) {
        put(
            name,
            CheckEntry::from_values(&pick(f), tol.identities, checked),
        );
    }

    let c = pa.c();
    let mut scalars = BTreeMap::new();
    let mut stat = |name: &str, v: Vec<f64>| {
        if !v.is_empty() {
            scalars.insert(name.to_string(), ScalarStat::of(&v));
        }
    };
    stat("T", col(samples, |s| s.t_norm));
    stat("H", col(samples, |s| s.h_norm));
    stat("K", col(samples, |s| s.k));
    stat("K_gauss", col(samples, |s| s.k_gauss));
    stat(
        "4H2+cT2",
        col(samples, |s| {
            4.0 * s.h_norm * s.h_norm + c * s.t_norm * s.t_norm
        }),
    );
    stat(
        "K-c(1-T2)",
        col(samples, |s| s.k - c * (1.0 - s.t_norm * s.t_norm)),
    );
    stat("lambda1", col(samples, |s| s.lambda1));
    stat("lambda2", col(samples, |s| s.lambda2));
    stat("H.N", col(samples, |s| s.h_dot_n));
    stat("beta", samples.iter().filter_map(|s| s.beta).collect());
    stat("lambda", samples.iter().filter_map(|s| s.lambda).collect());
    ResidualReport {
        label: spec.label().to_string(),
        grid: *grid,
        checks,
        scalars,
        max_first_normal_rank: samples
            .iter()
            .map(|s| s.first_normal_rank)
            .max()
            .unwrap_or(0),
        tolerances: *tol,
        c,
        n: pa.n(),
    }
}

/// All checks at the given tolerances.
pub fn verify(spec: &ImmersionSpec, grid: &ProbeGrid, tol: &Tolerances) -> Result<ResidualReport> {
    let samples = survey(spec, grid)?;
    Ok(report_from_samples(spec, grid, &samples, tol))
}

fn verify_default(spec: &ImmersionSpec, grid: &ProbeGrid) -> Result<ResidualReport> {
    verify(spec, grid, &Tolerances::for_spec(spec))
}

/// Gauss, Codazzi and Ricci entries.
pub fn check_structure_equations(
    spec: &ImmersionSpec,
    grid: &ProbeGrid,
) -> Result<[CheckEntry; 3]> {
    let r = verify_default(spec, grid)?;
    Ok(["gauss", "codazzi", "ricci"].map(|n| r.check(n).clone()))
}

pub fn check_pmc(spec: &ImmersionSpec, grid: &ProbeGrid) -> Result<CheckEntry> {
    Ok(verify_default(spec, grid)?.check("pmc").clone())
}

pub fn check_helix(spec: &ImmersionSpec, grid: &ProbeGrid) -> Result<CheckEntry> {
    Ok(verify_default(spec, grid)?.check("helix").clone())
}

pub fn check_pseudo_umbilical(spec: &ImmersionSpec, grid: &ProbeGrid) -> Result<CheckEntry> {
    Ok(verify_default(spec, grid)?
        .check("pseudo_umbilical")
        .clone())
}

pub fn check_identities(
    spec: &ImmersionSpec,
    grid: &ProbeGrid,
) -> Result<BTreeMap<String, CheckEntry>> {
    let r = verify_default(spec, grid)?;
    Ok(IDENTITY_CHECKS
        .iter()
        .map(|n| (n.to_string(), r.check(n).clone()))
        .collect())
}

pub fn ar_form_residual(spec: &ImmersionSpec, grid: &ProbeGrid) -> Result<CheckEntry> {
    Ok(verify_default(spec, grid)?.check("ar_form").clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceClass {
    Case1,
    Case2,
    Case3,
    Case4,
    Case5,
    Minimal,
    PseudoUmbilical,
    NotPmcHelix,
    Unclassified,
}

impl fmt::Display for SurfaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SurfaceClass::Case1 => "case1",
            SurfaceClass::Case2 => "case2",
            SurfaceClass::Case3 => "case3",
            SurfaceClass::Case4 => "case4",
            SurfaceClass::Case5 => "case5",
            SurfaceClass::Minimal => "minimal",
            SurfaceClass::PseudoUmbilical => "pseudo-umbilical",
            SurfaceClass::NotPmcHelix => "not-pmc-helix",
            SurfaceClass::Unclassified => "unclassified",
        };
        f.write_str(s)
    }
}

/// Thresholds of the decision tree.
pub const MINIMAL_TOL: f64 = 1e-8;
pub const CASE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class: SurfaceClass,
    /// e.g. "P_H²-compatible" for case 4.
    pub flags: Vec<String>,
    /// 2 + rank of the first normal space, for |T| = 0 surfaces.
    pub sub_ambient_dim: Option<usize>,
    pub pseudo_umbilical_defect: f64,
    pub t_norm: f64,
    pub h_norm: f64,
    pub case4_invariant: f64,
    pub k_max: f64,
    pub lambda1_max: f64,
    /// For unclassified surfaces: the closest branch and its distance.
    pub nearest: Option<(String, f64)>,
}

pub fn classify_surface(spec: &ImmersionSpec, report: &ResidualReport) -> Classification {
    let c = spec.ambient().c();
    let t = report.scalar("T").mean;
    let h_max = report.scalar("H").max;
    let case4_invariant = report.scalar("4H2+cT2").abs_max();
    let k_max = report.scalar("K").abs_max();
    let lambda1_max = report.scalar("lambda1").abs_max();
    let mut out = Classification {
        class: SurfaceClass::Unclassified,
        flags: Vec::new(),
        sub_ambient_dim: None,
        pseudo_umbilical_defect: report.check("pseudo_umbilical").max,
        t_norm: t,
        h_norm: report.scalar("H").mean,
        case4_invariant,
        k_max,
        lambda1_max,
        nearest: None,
    };
    out.class = if !(report.check("pmc").pass && report.check("helix").pass) {
        SurfaceClass::NotPmcHelix
    } else if h_max <= MINIMAL_TOL {
        SurfaceClass::Minimal
    } else if report.pseudo_umbilical() {
        SurfaceClass::PseudoUmbilical
    } else if t <= ANGLE_TOL {
        let dim = 2 + report.max_first_normal_rank;
        out.sub_ambient_dim = Some(dim);
        if dim <= 3 {
            SurfaceClass::Case2
        } else {
            out.nearest = Some(("case2".into(), (dim - 3) as f64));
            SurfaceClass::Unclassified
        }
    } else if t >= 1.0 - ANGLE_TOL {
        SurfaceClass::Case3
    } else if c < 0.0 && case4_invariant <= CASE_TOL {
        out.flags.push("P_H²-compatible".into());
        SurfaceClass::Case4
    } else if c > 0.0 && k_max <= CASE_TOL && lambda1_max <= CASE_TOL {
        SurfaceClass::Case5
    } else {
        let d4 = if c < 0.0 {
            case4_invariant
        } else {
            f64::INFINITY
        };
        let d5 = if c > 0.0 {
            k_max.max(lambda1_max)
        } else {
            f64::INFINITY
        };
        out.nearest = Some(if d4 <= d5 {
            ("case4".into(), d4)
        } else {
            ("case5".into(), d5)
        });
        SurfaceClass::Unclassified
    };
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruct::{build_case3, build_control, Control};

    const SMALL: ProbeGrid = ProbeGrid { nu: 12, nv: 12 };

    #[test]
    fn slice_residuals_vanish() {
        let s = build_control(Control::Slice { c: 1.0, n: 2 }).unwrap();
        let r = verify(&s, &SMALL, &Tolerances::closed_form()).unwrap();
        for name in ["gauss", "codazzi", "ricci"] {
            assert!(r.check(name).max <= 1e-9, "{name}");
        }
        assert!(r.check("pmc").max <= 1e-10);
        assert!(r.check("pseudo_umbilical").max <= 1e-10);
        assert!(r.check("ar_form").max <= 1e-12);
        assert_eq!(r.check("balance").status, CheckStatus::Inapplicable);
        assert_eq!(classify_surface(&s, &r).class, SurfaceClass::Minimal);
    }

    #[test]
    fn cylinder_is_case3_with_nonvanishing_q() {
        let s = build_case3(1.0, 2, 0.5).unwrap();
        let r = verify(&s, &SMALL, &Tolerances::closed_form()).unwrap();
        assert!(r.all_pass(), "{r:#?}");
        assert!(r.check("helix").max <= 1e-12);
        assert!((r.check("ar_form").max - 2.0).abs() <= 1e-6);
        assert_eq!(r.check("e_k").status, CheckStatus::Inapplicable);
        assert_eq!(classify_surface(&s, &r).class, SurfaceClass::Case3);
    }

    #[test]
    fn controls_classify() {
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let torus = build_control(Control::TorusHelix {
            c: 1.0,
            r1: r2,
            r2,
            slope: 0.5,
        })
        .unwrap();
        let r = verify(&torus, &SMALL, &Tolerances::closed_form()).unwrap();
        assert!(r.check("helix").pass);
        assert!(!r.check("pmc").pass);
        assert!((r.check("pmc").max - 0.054).abs() <= 0.005);
        assert_eq!(
            classify_surface(&torus, &r).class,
            SurfaceClass::NotPmcHelix
        );

        let cmc = build_control(Control::CmcTorusInS3 {
            c: 1.0,
            r1: 0.6,
            r2: 0.8,
        })
        .unwrap();
        let r = verify(&cmc, &SMALL, &Tolerances::closed_form()).unwrap();
        assert!(r.check("pmc").pass && r.check("helix").pass);
        let cl = classify_surface(&cmc, &r);
        assert_eq!(cl.class, SurfaceClass::Case2);
        assert_eq!(cl.sub_ambient_dim, Some(3));

        let sphere =
            build_control(Control::GeodesicSphereInSmallSphere { c: 1.0, rho: 0.6 }).unwrap();
        let r = verify(&sphere, &SMALL, &Tolerances::closed_form()).unwrap();
        assert!(r.check("pseudo_umbilical").max <= 1e-6);
        assert_eq!(
            classify_surface(&sphere, &r).class,
            SurfaceClass::PseudoUmbilical
        );

        let graph = build_control(Control::GraphStrip { c: 1.0, n: 2 }).unwrap();
        let r = verify(&graph, &SMALL, &Tolerances::closed_form()).unwrap();
        assert!(r.check("helix").max > 0.1 && !r.check("helix").pass);
        assert_eq!(
            classify_surface(&graph, &r).class,
            SurfaceClass::NotPmcHelix
        );
    }

    #[test]
    fn tolerance_scaling_only_loosens() {
        let t = Tolerances::closed_form();
        assert_eq!(t.scaled(0.1), t);
        assert!((t.scaled(10.0).pmc - 1e-5).abs() < 1e-18);
    }
}
