use pmc_helix::ambient::{axis, spaceform_circle, AmbientPoint, ProductAmbient, SpaceForm};
use pmc_helix::frenet::{classify_curve, frenet_residuals, sample_parameters, CurveClass};
use pmc_helix::reconstruct::{
    build_case3, build_case4, build_case5, build_control, case4_data, case5_data,
    compatibility_check, Control, GridSpec, HnSign,
};
use pmc_helix::surface::{fundamental_data, Affine2, ImmersionSpec};
use pmc_helix::verify::{classify_surface, verify, ProbeGrid, Tolerances};
use proptest::prelude::*;

const SMALL: ProbeGrid = ProbeGrid { nu: 6, nv: 6 };

fn model_point(pa: &ProductAmbient, raw: &[f64]) -> Vec<f64> {
    let d = pa.dim();
    let mut p = raw[..d].to_vec();
    let c = pa.c();
    if c > 0.0 {
        let r = 1.0 / c.sqrt();
        let norm = p[..d - 1]
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
            .max(1e-3);
        for x in &mut p[..d - 1] {
            *x *= r / norm;
        }
    } else if c < 0.0 {
        let r = 1.0 / (-c).sqrt();
        let s: f64 = p[1..d - 1].iter().map(|x| x * x).sum();
        p[0] = (r * r + s).sqrt();
    }
    p
}

fn tangent(pa: &ProductAmbient, p: &[f64], raw: &[f64]) -> Vec<f64> {
    pa.tangent_project_raw(p, &raw[..pa.dim()])
}

fn closed_forms() -> Vec<ImmersionSpec> {
    vec![
        build_control(Control::Slice { c: -1.0, n: 3 }).unwrap(),
        build_control(Control::GraphStrip { c: 1.0, n: 2 }).unwrap(),
        build_control(Control::GraphStrip { c: -1.0, n: 3 }).unwrap(),
        build_control(Control::TorusHelix {
            c: 1.0,
            r1: 0.6,
            r2: 0.8,
            slope: 0.4,
        })
        .unwrap(),
        build_control(Control::CmcTorusInS3 {
            c: 2.0,
            r1: 0.4,
            r2: 0.34f64.sqrt(),
        })
        .unwrap(),
        build_control(Control::GeodesicSphereInSmallSphere { c: 1.0, rho: 0.7 }).unwrap(),
        build_case3(1.0, 3, 0.4).unwrap(),
        build_case3(-1.0, 2, 0.9).unwrap(),
    ]
}

fn point_in(spec: &ImmersionSpec, a: f64, b: f64) -> [f64; 2] {
    let d = spec.domain();
    [
        d[0][0] + (d[0][1] - d[0][0]) * (0.05 + 0.9 * a),
        d[1][0] + (d[1][1] - d[1][0]) * (0.05 + 0.9 * b),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ambient_curvature_symmetries(
        c in prop::sample::select(vec![1.0, -1.0, 0.4, -2.0, 0.0]),
        n in 2usize..5,
        raw in prop::collection::vec(-1.0f64..1.0, 30),
    ) {
        let pa = ProductAmbient::with(c, n).unwrap();
        let d = pa.dim();
        let p = model_point(&pa, &raw);
        let [x, y, z, w] = [1, 2, 3, 4].map(|k| tangent(&pa, &p, &raw[k * d % 24..]));
        let rxy = pa.curvature_raw(&x, &y, &z);
        let ryx = pa.curvature_raw(&y, &x, &z);
        for (a, b) in rxy.iter().zip(&ryx) {
            prop_assert!((a + b).abs() <= 1e-12);
        }
        let lhs = pa.inner(&rxy, &w);
        prop_assert!((lhs + pa.inner(&pa.curvature_raw(&x, &y, &w), &z)).abs() <= 1e-12);
        let b = [pa.curvature_raw(&y, &z, &x), pa.curvature_raw(&z, &x, &y)];
        for i in 0..d {
            prop_assert!((rxy[i] + b[0][i] + b[1][i]).abs() <= 1e-12);
        }
        let proj = c * (pa.m_inner(&y, &z) * pa.m_inner(&x, &w) - pa.m_inner(&x, &z) * pa.m_inner(&y, &w));
        prop_assert!((lhs - proj).abs() <= 1e-12);
    }

    #[test]
    fn circles_have_unit_speed_and_constant_curvature(
        sphere in any::<bool>(), kappa in 0.1f64..3.0,
    ) {
        let (c, kappa) = if sphere { (1.0, kappa) } else { (-1.0, 1.05 + kappa) };
        let sf = SpaceForm::new(c, 2).unwrap();
        let pa = ProductAmbient::new(sf);
        let p = AmbientPoint::new(pa.canonical_point());
        let curve = spaceform_circle(&sf, &p, &axis(&p, 1), &axis(&p, 2), kappa).unwrap();
        let cc = classify_curve(&curve, 32).unwrap();
        prop_assert_eq!(cc.class, CurveClass::Circle);
        prop_assert!((cc.mean_curvatures[0] - kappa).abs() <= 1e-6 * kappa);
        prop_assert!(cc.spreads[0] <= 1e-8);
        for s in sample_parameters(&curve, 8) {
            let (ortho, eqs) = frenet_residuals(&curve, s, 4).unwrap();
            prop_assert!(ortho <= 1e-8 && eqs <= 1e-6);
        }
    }

    #[test]
    fn frame_invariants(which in 0usize..8, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let spec = &closed_forms()[which];
        let pa = spec.ambient();
        let uv = point_in(spec, a, b);
        let fd = fundamental_data(spec, uv).unwrap();
        let mut frame = vec![fd.e1.clone(), fd.e2.clone()];
        frame.extend(fd.normals.iter().cloned());
        for (i, x) in frame.iter().enumerate() {
            for (j, y) in frame.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((pa.inner(x, y) - want).abs() <= 1e-9);
            }
        }
        for (s, t) in fd.sigma[0][1].iter().zip(&fd.sigma[1][0]) {
            prop_assert!((s - t).abs() <= 1e-10);
        }
        // Weingarten duality.
        for (al, nu) in fd.normals.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((fd.shape[al][i][j] - pa.inner(&fd.sigma[i][j], nu)).abs() <= 1e-9);
                }
            }
        }
        prop_assert!((fd.t_norm.powi(2) + fd.n_norm.powi(2) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn classification_survives_affine_reparametrization(
        which in 0usize..8,
        sx in 0.3f64..3.0, sy in -3.0f64..-0.3, ox in -2.0f64..2.0, oy in -2.0f64..2.0, swap in any::<bool>(),
    ) {
        let spec = &closed_forms()[which];
        let tol = Tolerances::closed_form();
        let before = verify(spec, &SMALL, &tol).unwrap();
        let moved = spec.reparametrized(Affine2 { scale: [sx, sy], offset: [ox, oy], swap }).unwrap();
        let after = verify(&moved, &SMALL, &tol).unwrap();
        prop_assert_eq!(classify_surface(spec, &before).class, classify_surface(&moved, &after).class);
        for key in ["T", "H", "K"] {
            let (x, y) = (before.scalar(key), after.scalar(key));
            prop_assert!((x.min - y.min).abs() <= 1e-3 + 1e-3 * x.min.abs() || x.std > 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn passing_data_integrates_to_passing_surfaces(
        c in 0.3f64..2.5, h in 0.1f64..1.5, t in 0.1f64..0.9, neg in any::<bool>(),
    ) {
        let grid = GridSpec::centered(0.6, 0.6);
        let spec = if neg {
            let sign = if h > 0.8 { HnSign::Minus } else { HnSign::Plus };
            prop_assert!(compatibility_check(&case4_data(-c, t, sign).unwrap()).max() <= 1e-10);
            build_case4(-c, t, sign, &grid).unwrap()
        } else {
            prop_assert!(compatibility_check(&case5_data(c, h, t).unwrap()).max() <= 1e-10);
            build_case5(c, h, t, &grid).unwrap()
        };
        let r = verify(&spec, &SMALL, &Tolerances::reconstructed()).unwrap();
        for k in ["gauss", "codazzi", "ricci", "pmc", "helix"] {
            prop_assert!(r.check(k).pass, "{} = {:e}", k, r.check(k).max);
        }
        prop_assert!((r.scalar("T").mean - t).abs() <= 1e-6);
    }
}
