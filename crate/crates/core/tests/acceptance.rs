//! Acceptance criteria AC1–AC8, one PASS/FAIL line each.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::process::ExitCode;
use std::time::Instant;

use common::Model;
use pmc_helix::ambient::{axis, spaceform_circle, AmbientPoint, ProductAmbient, SpaceForm};
use pmc_helix::frenet::{classify_curve, frenet_apparatus, CurveClass, CurveKind, CurveSpec};
use pmc_helix::reconstruct::{
    build_case3, build_case4, build_case5, build_control, case5_data, default_grid, flow,
    initial_state, Control, HnSign, DEFAULT_STEP,
};
use pmc_helix::surface::{fundamental_data, mean_curvature_derivative, ImmersionSpec};
use pmc_helix::verify::{
    classify_surface, verify, ProbeGrid, ResidualReport, SurfaceClass, Tolerances, IDENTITY_CHECKS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn ensure(ok: bool, msg: String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn report(spec: &ImmersionSpec) -> Result<ResidualReport, String> {
    verify(spec, &ProbeGrid::default(), &Tolerances::for_spec(spec)).map_err(|e| e.to_string())
}

type Builder = Box<dyn Fn() -> pmc_helix::Result<ImmersionSpec>>;

fn gallery() -> Vec<(&'static str, Builder)> {
    vec![
        (
            "slice S2",
            Box::new(|| build_control(Control::Slice { c: 1.0, n: 2 })),
        ),
        (
            "slice H2",
            Box::new(|| build_control(Control::Slice { c: -1.0, n: 2 })),
        ),
        (
            "cmc torus",
            Box::new(|| {
                build_control(Control::CmcTorusInS3 {
                    c: 1.0,
                    r1: 0.6,
                    r2: 0.8,
                })
            }),
        ),
        ("cylinder c=1", Box::new(|| build_case3(1.0, 2, 0.5))),
        ("cylinder c=-1", Box::new(|| build_case3(-1.0, 2, 0.6))),
        (
            "case4",
            Box::new(|| build_case4(-1.0, 0.8, HnSign::Plus, &default_grid(4))),
        ),
        (
            "case5",
            Box::new(|| build_case5(1.0, 0.5, 0.6, &default_grid(5))),
        ),
    ]
}

fn ac1() -> Outcome {
    let mut worst_time: f64 = 0.0;
    let mut lines = Vec::new();
    for (name, build) in gallery() {
        let t0 = Instant::now();
        let spec = build().map_err(|e| format!("{name}: {e}"))?;
        let r = report(&spec)?;
        let dt = t0.elapsed().as_secs_f64();
        worst_time = worst_time.max(dt);
        let tol = r.tolerances.structure;
        let m = ["gauss", "codazzi", "ricci"].map(|k| r.check(k).max);
        ensure(
            m.iter().all(|x| *x <= tol),
            format!("{name}: gauss/codazzi/ricci = {m:?} > {tol:e}"),
        )?;
        ensure(dt <= 30.0, format!("{name}: {dt:.1}s > 30s"))?;
        lines.push(format!(
            "{name} {:.1e}",
            m.iter().copied().fold(0.0, f64::max)
        ));
    }
    Ok(format!(
        "64x64, slowest {worst_time:.2}s; {}",
        lines.join(", ")
    ))
}

fn ac2() -> Outcome {
    let spec = build_case3(1.0, 2, 0.5).map_err(|e| e.to_string())?;
    let generator = CurveSpec::coordinate_curve(&spec, 0, [0.0, 0.0]);
    let cc = classify_curve(&generator, 64).map_err(|e| e.to_string())?;
    ensure(
        cc.class == CurveClass::Circle,
        format!("generator is {}", cc.class),
    )?;
    let k = cc.mean_curvatures[0];
    ensure((k - 1.0).abs() <= 1e-6, format!("κ = {k}"))?;
    let class = classify_surface(&spec, &report(&spec)?).class;
    ensure(class == SurfaceClass::Case3, format!("classified {class}"))?;
    Ok(format!("κ = {k:.9}, class {class}"))
}

fn ac3() -> Outcome {
    let spec = build_case4(-1.0, 0.8, HnSign::Plus, &default_grid(4)).map_err(|e| e.to_string())?;
    let r = report(&spec)?;
    let inv = r.scalar("4H2+cT2").abs_max();
    ensure(inv <= 1e-6, format!("|4|H|²+c|T|²| = {inv:e}"))?;
    let k = r.scalar("K");
    let kerr = (k.min + 0.36).abs().max((k.max + 0.36).abs());
    ensure(kerr <= 1e-5, format!("K ∈ [{}, {}]", k.min, k.max))?;
    let ar = r.check("ar_form").max;
    ensure(ar <= 1e-5, format!("AR form {ar:e}"))?;
    let cl = classify_surface(&spec, &r);
    ensure(
        cl.class == SurfaceClass::Case4,
        format!("classified {}", cl.class),
    )?;
    Ok(format!(
        "invariant {inv:.1e}, K = {:.9}, AR {ar:.1e}, class {} {:?}",
        k.mean, cl.class, cl.flags
    ))
}

fn ac4() -> Outcome {
    let spec = build_case5(1.0, 0.5, 0.6, &default_grid(5)).map_err(|e| e.to_string())?;
    let r = report(&spec)?;
    let k = r.scalar("K").abs_max();
    let l1 = r.scalar("lambda1").abs_max();
    ensure(k <= 1e-5 && l1 <= 1e-5, format!("|K| {k:e}, |λ₁| {l1:e}"))?;
    let g1 = classify_curve(&CurveSpec::coordinate_curve(&spec, 0, [0.0, 0.0]), 64)
        .map_err(|e| e.to_string())?;
    ensure(
        g1.class == CurveClass::Helix,
        format!("s-curve is {}", g1.class),
    )?;
    let (k1, k2) = (g1.mean_curvatures[0], g1.mean_curvatures[1]);
    ensure(
        (k1 - 0.8).abs() <= 1e-5 && (k2 - 0.6).abs() <= 1e-5,
        format!("s-curve κ = ({k1}, {k2})"),
    )?;
    let g2 = classify_curve(&CurveSpec::coordinate_curve(&spec, 1, [0.0, 0.0]), 64)
        .map_err(|e| e.to_string())?;
    ensure(
        g2.class == CurveClass::Circle,
        format!("t-curve is {}", g2.class),
    )?;
    let kt = g2.mean_curvatures[0];
    ensure((kt - 1.28062).abs() <= 1e-5, format!("t-curve κ = {kt}"))?;
    let class = classify_surface(&spec, &r).class;
    ensure(class == SurfaceClass::Case5, format!("classified {class}"))?;
    Ok(format!(
        "|K| {k:.1e}, |λ₁| {l1:.1e}, helix ({k1:.7}, {k2:.7}), circle {kt:.7}, class {class}"
    ))
}

fn ac5() -> Outcome {
    let (r1, r2, slope) = (FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.5);
    let spec = build_control(Control::TorusHelix {
        c: 1.0,
        r1,
        r2,
        slope,
    })
    .map_err(|e| e.to_string())?;
    let r = report(&spec)?;
    ensure(
        r.check("helix").pass,
        format!("helix spread {:e}", r.check("helix").max),
    )?;
    let pmc = r.check("pmc");
    ensure(!pmc.pass, "pmc check passed".into())?;
    ensure(
        (pmc.max - 0.054).abs() <= 0.005,
        format!("pmc residual {}", pmc.max),
    )?;
    let m = Model::new(1.0, 3);
    let f = common::torus_helix(r1, r2, slope);
    let oracle = [[0.4, 0.3], [2.0, 1.7], [5.1, 3.9]]
        .iter()
        .map(|uv| common::pmc_residual(&m, &f, *uv))
        .fold(0.0, f64::max);
    ensure(
        (pmc.max - oracle).abs() <= 1e-6,
        format!("pmc {} vs oracle {oracle}", pmc.max),
    )?;
    let class = classify_surface(&spec, &r).class;
    ensure(
        class == SurfaceClass::NotPmcHelix,
        format!("classified {class}"),
    )?;
    Ok(format!(
        "pmc {:.6} (oracle {oracle:.6}), class {class}",
        pmc.max
    ))
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1.0);
    diff / scale
}

fn test_curves() -> Vec<CurveSpec> {
    let mut out = Vec::new();
    for (c, kappa) in [(1.0, 0.7), (-1.0, 1.5)] {
        let sf = SpaceForm::new(c, 2).unwrap();
        let pa = ProductAmbient::new(sf);
        let p = AmbientPoint::new(pa.canonical_point());
        let circle = spaceform_circle(&sf, &p, &axis(&p, 1), &axis(&p, 2), kappa).unwrap();
        out.push(circle.clone());
        if let CurveKind::Circle(cp) = circle.kind() {
            out.push(CurveSpec::new(
                pa,
                CurveKind::SlantHelix {
                    circle: cp.clone(),
                    slope: 0.5,
                },
                (0.0, 3.0),
                true,
            ));
        }
    }
    let s3 = ProductAmbient::with(1.0, 3).unwrap();
    out.push(CurveSpec::new(
        s3,
        CurveKind::TorusLoop {
            r1: 0.6,
            r2: 0.8,
            loop_radius: 0.3,
        },
        (0.0, 1.8),
        true,
    ));
    out
}

fn ac6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let surfaces: Vec<(ImmersionSpec, Model)> = vec![
        (
            build_control(Control::GraphStrip { c: 1.0, n: 2 }).unwrap(),
            Model::new(1.0, 2),
        ),
        (
            build_control(Control::GraphStrip { c: -1.0, n: 2 }).unwrap(),
            Model::new(-1.0, 2),
        ),
        (
            build_control(Control::TorusHelix {
                c: 1.0,
                r1: 0.6,
                r2: 0.8,
                slope: 0.3,
            })
            .unwrap(),
            Model::new(1.0, 3),
        ),
        (
            build_control(Control::CmcTorusInS3 {
                c: 1.0,
                r1: 0.6,
                r2: 0.8,
            })
            .unwrap(),
            Model::new(1.0, 3),
        ),
        (build_case3(-1.0, 2, 0.6).unwrap(), Model::new(-1.0, 2)),
    ];
    let curves = test_curves();
    let (mut worst_sigma, mut worst_dh, mut worst_k) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let (spec, m) = &surfaces[rng.gen_range(0..surfaces.len())];
        let dom = spec.domain();
        let uv = [0, 1].map(|i| {
            let (a, b) = (dom[i][0] + 0.2, dom[i][1] - 0.2);
            rng.gen_range(a..b)
        });
        let f = |w: [f64; 2]| spec.position(w).unwrap();
        let fd = fundamental_data(spec, uv).map_err(|e| e.to_string())?;
        let e = [
            common::coords_of(m, &f, uv, &fd.e1),
            common::coords_of(m, &f, uv, &fd.e2),
        ];
        for a in 0..2 {
            for b in 0..2 {
                let want = common::sigma(m, &f, uv, e[a], e[b]);
                worst_sigma = worst_sigma.max(rel(&fd.sigma[a][b], &want));
            }
        }
        let dh = mean_curvature_derivative(spec, uv).map_err(|e| e.to_string())?;
        for a in 0..2 {
            let want = common::nabla_perp_h(m, &f, uv, e[a]);
            worst_dh = worst_dh.max(rel(&dh[a], &want));
        }
        let curve = &curves[rng.gen_range(0..curves.len())];
        let (lo, hi) = curve.interval();
        let s = rng.gen_range(lo + 0.2..hi - 0.2);
        let cm = Model::new(curve.ambient().c(), curve.ambient().n());
        let (k1, k2) = common::frenet_curvatures(&cm, &|t| curve.position(t).unwrap(), s);
        let got = frenet_apparatus(curve, s, 3)
            .map_err(|e| e.to_string())?
            .curvatures;
        let g1 = got.first().copied().unwrap_or(0.0);
        let g2 = got.get(1).copied().unwrap_or(0.0);
        worst_k = worst_k.max(rel(&[g1], &[k1])).max(rel(&[g2], &[k2]));
    }
    let worst = worst_sigma.max(worst_dh).max(worst_k);
    ensure(
        worst <= 1e-5,
        format!("σ {worst_sigma:.1e}, ∇⊥H {worst_dh:.1e}, κ {worst_k:.1e}"),
    )?;
    Ok(format!(
        "100 probes: σ {worst_sigma:.1e}, ∇⊥H {worst_dh:.1e}, κ {worst_k:.1e}"
    ))
}

fn ac7() -> Outcome {
    let data = case5_data(1.0, 0.5, 0.6).map_err(|e| e.to_string())?;
    let s0 = initial_state(&data);
    let mut ratios = Vec::new();
    for a in 0..2 {
        let exact = common::exact_flow(&data, &s0, a, TAU);
        let step = TAU / 32.0 * (1.0 + 1e-12);
        let e1 = common::state_distance(&flow(&data, &s0, a, TAU, step), &exact);
        let e2 = common::state_distance(&flow(&data, &s0, a, TAU, step / 2.0), &exact);
        let ratio = e1 / e2;
        ensure(
            ratio >= 12.0,
            format!(
                "E{} step-halving ratio {ratio:.2} ({e1:.2e} → {e2:.2e})",
                a + 1
            ),
        )?;
        ratios.push(ratio);
    }
    let mut drift: f64 = 0.0;
    for a in 0..2 {
        for len in [TAU, -TAU] {
            drift = drift.max(flow(&data, &s0, a, len, DEFAULT_STEP).gram_drift(&data.ambient));
        }
    }
    ensure(drift <= 1e-8, format!("Gram drift {drift:e} over 2π"))?;
    let spec = build_case5(1.0, 0.5, 0.6, &default_grid(5)).map_err(|e| e.to_string())?;
    let grid_drift = spec.sampled_grid().unwrap().provenance().frame_drift;
    let [su, sv] = spec.domain().map(|r| r[1] - r[0]);
    ensure(
        grid_drift <= 1e-8,
        format!("grid frame drift {grid_drift:e}"),
    )?;
    ensure(
        su >= TAU - 1e-9 && sv >= TAU - 1e-9,
        format!("spans {su} × {sv}"),
    )?;
    Ok(format!(
        "ratios {:.1}, {:.1}; drift {drift:.1e}; grid drift {grid_drift:.1e} over {:.4}×{:.4}",
        ratios[0], ratios[1], su, sv
    ))
}

fn ac8() -> Outcome {
    let mut parts = Vec::new();
    let specs = [
        build_case4(-1.0, 0.8, HnSign::Plus, &default_grid(4)),
        build_case5(1.0, 0.5, 0.6, &default_grid(5)),
    ];
    for spec in specs {
        let spec = spec.map_err(|e| e.to_string())?;
        let r = report(&spec)?;
        let total = r.grid.nu * r.grid.nv;
        let mut worst: f64 = 0.0;
        for name in IDENTITY_CHECKS {
            let e = r.check(name);
            ensure(
                e.points == total,
                format!("{}: {name} on {}/{total} points", spec.label(), e.points),
            )?;
            ensure(
                e.max <= 1e-5,
                format!("{}: {name} = {:e}", spec.label(), e.max),
            )?;
            worst = worst.max(e.max);
        }
        parts.push(format!("{} {worst:.1e}", spec.label()));
    }
    Ok(parts.join(", "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1 structure equations", ac1),
        ("AC2 case3 generator", ac2),
        ("AC3 case4 invariants", ac3),
        ("AC4 case5 invariants and curves", ac4),
        ("AC5 torus-helix exclusion", ac5),
        ("AC6 oracle equivalence", ac6),
        ("AC7 integrator convergence", ac7),
        ("AC8 identity suite", ac8),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
