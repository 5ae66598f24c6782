use std::f64::consts::PI;
use ymh_core::bps::profile_h;
use ymh_core::currents::{degree, TriSurface};
use ymh_core::forms::{DerivScheme, Form, Grid};
use ymh_core::gauge::{curvature, energy, z_density, Pair};
use ymh_core::quat::ImQuaternion;
use ymh_core::recovery::{
    distance_field, eta_cap, modulus_defect, recovery_pair, Cell, CutoffProfile, EtaCap, GaussMap, PolyCurrent,
    RecoveryOptions,
};
use ymh_core::Error;

fn dipole() -> PolyCurrent {
    PolyCurrent::dipole([0.5, 0.0, 0.0], [-0.5, 0.0, 0.0])
}

fn options() -> RecoveryOptions {
    RecoveryOptions { delta_exponent: 0.5, ..Default::default() }
}

fn norm3(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Straight unit-multiplicity segment on the `x_3` axis, closed far away.
fn segment_loop() -> PolyCurrent {
    let far = 50.0;
    PolyCurrent::new(
        4,
        vec![Cell::segment(&[0.0, 0.0, 0.0, -1.0], &[0.0, 0.0, 0.0, 1.0], 1)],
        vec![
            Cell::segment(&[0.0, 0.0, 0.0, 1.0], &[far, 0.0, 0.0, 1.0], 1),
            Cell::segment(&[far, 0.0, 0.0, 1.0], &[far, 0.0, 0.0, -1.0], 1),
            Cell::segment(&[far, 0.0, 0.0, -1.0], &[0.0, 0.0, 0.0, -1.0], 1),
        ],
        vec![],
    )
    .unwrap()
}

fn unit_values(g: &GaussMap, s: &TriSurface) -> Vec<ImQuaternion> {
    s.points.iter().map(|p| ImQuaternion::from_array(g.unit(&[p[0], p[1], p[2], 0.0]))).collect()
}

#[test]
fn distance_examples() {
    let p = dipole();
    assert_eq!(distance_field(&p, &[0.5, 0.0, 0.0]), 0.0);
    assert!((distance_field(&p, &[0.5, 0.3, 0.4]) - 0.5).abs() < 1e-15);
    assert!((distance_field(&p, &[0.0, 1.0, 0.0]) - 1.25f64.sqrt()).abs() < 1e-15);
    let seg = Cell::segment(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0], 1);
    assert!((seg.distance(&[0.5, 0.3, 0.0, 0.0], 4) - 0.3).abs() < 1e-15);
    assert!((seg.distance(&[2.0, 0.0, 0.0, 0.0], 4) - 1.0).abs() < 1e-15);
    assert_eq!(seg.distance(&[0.25, 0.0, 0.0, 0.0], 4), 0.0);
    let mut with_k = dipole();
    with_k.skeleton.push([0.0, 0.0, 0.2, 0.0]);
    assert!((distance_field(&with_k, &[0.0, 0.0, 0.0]) - 0.2).abs() < 1e-15);
}

#[test]
fn current_validation() {
    assert!(PolyCurrent::new(3, vec![Cell::point(&[0.0; 3], 1)], vec![], vec![]).is_err());
    assert!(PolyCurrent::new(3, vec![Cell::point(&[0.0; 3], 2), Cell::point(&[1.0, 0.0, 0.0], -2)], vec![], vec![]).is_err());
    let open = vec![Cell::segment(&[0.0; 4], &[0.0, 0.0, 0.0, 1.0], 1)];
    assert!(PolyCurrent::new(4, open, vec![], vec![]).is_err());
    assert!(PolyCurrent::new(5, vec![], vec![], vec![]).is_err());
    assert!((dipole().mass() - 2.0).abs() < 1e-15);
    assert!((segment_loop().mass() - 2.0).abs() < 1e-15);
}

#[test]
fn text_roundtrip() {
    let mut p = segment_loop();
    p.skeleton.push([0.1, 0.2, 0.3, 0.4]);
    let back = PolyCurrent::parse(&p.to_text()).unwrap();
    assert_eq!(back, p);
    let d = PolyCurrent::parse("# dipole\ncell 0 1 0.5 0 0\ncell 0 -1 -0.5 0 0\n").unwrap();
    assert_eq!(d, dipole());
    assert!(matches!(PolyCurrent::parse("cell 0 1 0 0\n"), Err(Error::Parse { line: 1, .. })));
    assert!(matches!(PolyCurrent::parse("cell 0 1 0 0 0\nwire 1 2\n"), Err(Error::Parse { line: 2, .. })));
    assert!(PolyCurrent::parse("cell 0 1 0 0 0\n").is_err());
}

#[test]
fn cutoff_profile_bounds() {
    let c = CutoffProfile::new(0.2, 0.5).unwrap();
    assert_eq!(c.eval(0.1), 1.0);
    assert_eq!(c.eval(0.6), 0.0);
    let mut prev = 1.0;
    for k in 0..=300 {
        let r = 0.2 + 0.3 * k as f64 / 300.0;
        let v = c.eval(r);
        assert!((0.0..=1.0).contains(&v) && v <= prev);
        assert!((prev - v) <= c.lipschitz() * 0.001 + 1e-12);
        prev = v;
    }
    assert!(CutoffProfile::new(0.5, 0.5).is_err());
}

#[test]
fn dipole_gauss_map_degrees_and_derivative_bound() {
    let p = dipole();
    let g = GaussMap::new(&p).unwrap();
    let near_plus = TriSurface::sphere([0.5, 0.0, 0.0], 0.1, 4);
    let near_minus = TriSurface::sphere([-0.5, 0.0, 0.0], 0.1, 4);
    let enclosing = TriSurface::sphere([0.0; 3], 1.9, 4);
    assert_eq!(degree(&unit_values(&g, &near_plus), &near_plus).unwrap().degree, 1);
    assert_eq!(degree(&unit_values(&g, &near_minus), &near_minus).unwrap().degree, -1);
    assert_eq!(degree(&unit_values(&g, &enclosing), &enclosing).unwrap().degree, 0);
    let v: [f64; 3] = g.unit(&[0.51, 0.0, 0.0, 0.0]);
    assert!((v[0] - 1.0).abs() < 1e-3);
    let cert = g.certify(&p, &Grid::cube(3, 2.0, 0.1).unwrap()).unwrap();
    assert!(cert.samples > 0 && cert.min_margin > 1.0);
    assert!(cert.dv_constant <= 10.0, "C = {}", cert.dv_constant);
}

#[test]
fn field_zeros_are_rejected() {
    let quad = PolyCurrent::new(
        3,
        vec![
            Cell::point(&[0.5, 0.0, 0.0], 1),
            Cell::point(&[-0.5, 0.0, 0.0], 1),
            Cell::point(&[0.0, 0.5, 0.0], -1),
            Cell::point(&[0.0, -0.5, 0.0], -1),
        ],
        vec![],
        vec![],
    )
    .unwrap();
    let g = GaussMap::new(&quad).unwrap();
    let err = g.certify(&quad, &Grid::cube(3, 1.0, 0.1).unwrap()).unwrap_err();
    let Error::SingularSetInDomain(x) = err else { panic!("{err:?}") };
    assert!(norm3(&x[..2]) < 0.05, "zero reported at {x:?}");
    let opts = options();
    assert!(recovery_pair(&quad, 0.05, Grid::cube(3, 1.0, 0.1).unwrap(), &opts).is_err());
}

#[test]
fn epsilon_must_fit_the_tube() {
    let g = Grid::cube(3, 2.0, 0.1).unwrap();
    let err = recovery_pair(&dipole(), 0.6, g, &options()).unwrap_err();
    assert!(matches!(err, Error::EpsilonTooLarge { .. } | Error::Invalid(_)), "{err:?}");
    let err = recovery_pair(&dipole(), 0.1, g, &RecoveryOptions::default()).unwrap_err();
    assert!(matches!(err, Error::EpsilonTooLarge { .. }), "{err:?}");
}

#[test]
fn tube_core_is_the_monopole_and_far_region_is_pure_gauge() {
    let eps = 0.1;
    let opts = options();
    let g = Grid::cube(3, 2.0, 0.1).unwrap();
    let p = recovery_pair(&dipole(), eps, g, &opts).unwrap();
    let field = p.field().unwrap().clone();
    let tube = opts.c_small * opts.delta(eps);
    for (center, s) in [([0.5, 0.0, 0.0], 1.0), ([-0.5, 0.0, 0.0], -1.0)] {
        for d in [[0.3, 0.2, -0.1], [-0.05, 0.1, 0.2], [0.0, 0.0, -0.3]] {
            let scale = 0.4 * tube / norm3(&d);
            let y = [d[0] * scale, d[1] * scale, d[2] * scale];
            let r = norm3(&y);
            let (phi, _) = field.value(&[center[0] + y[0], center[1] + y[1], center[2] + y[2], 0.0]);
            let want = ImQuaternion::new(y[0], y[1], y[2]) * (s * profile_h(r / eps) / r);
            assert!((phi - want).norm() < 1e-12, "{phi:?} vs {want:?}");
        }
    }
    let f = curvature(&p);
    let mut checked = 0;
    for node in 0..g.len() {
        let x = g.point(node);
        if distance_field(&dipole(), &x[..3]) < 2.5 * tube {
            continue;
        }
        let j = p.jet(node);
        let m = j.phi.norm();
        let v = j.phi * (1.0 / m);
        for a in 0..3 {
            let alpha = j.dphi[a] + j.a[a].cross(j.phi) * 2.0;
            let tangential = alpha - v * alpha.dot(v);
            assert!(tangential.norm() < 1e-10 * (1.0 + alpha.norm()), "node {node}");
        }
        let dv: Vec<ImQuaternion> = (0..3).map(|a| (j.dphi[a] - v * v.dot(j.dphi[a])) * (1.0 / m)).collect();
        for (c, (a, b)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            let want = dv[a].cross(dv[b]) * -0.5;
            assert!((f.components()[c][node] - want).norm() < 1e-9 * (1.0 + want.norm()));
        }
        checked += 1;
        if checked > 40 {
            break;
        }
    }
    assert!(checked > 40);
}

#[test]
fn modulus_is_bounded_and_z_concentrates_on_the_charges() {
    let eps = 0.05;
    let opts = options();
    for (center, mult) in [([0.5, 0.0, 0.0], 1.0), ([-0.5, 0.0, 0.0], -1.0)] {
        let lo = [center[0] - 0.4, -0.4, -0.4];
        let g = Grid::new(&[33; 3], &lo, &[center[0] + 0.4, 0.4, 0.4]).unwrap();
        let p = recovery_pair(&dipole(), eps, g, &opts).unwrap();
        assert!(p.phi.components()[0].iter().all(|v| v.norm() <= 1.0));
        let z: f64 = ymh_core::forms::integrate(&z_density(&p)).unwrap();
        let want = -4.0 * PI * mult;
        assert!((z - want).abs() < 0.1 * 4.0 * PI, "charge {mult}: {z}");
    }
}

#[test]
fn segment_tube_core_is_the_translated_monopole() {
    let eps = 0.1;
    let opts = options();
    let g = Grid::new(&[13, 13, 13, 11], &[-0.6, -0.6, -0.6, -0.5], &[0.6, 0.6, 0.6, 0.5]).unwrap();
    let p = recovery_pair(&segment_loop(), eps, g, &opts).unwrap();
    let field = p.field().unwrap().clone();
    let tube = opts.c_small * opts.delta(eps);
    let frame = segment_loop().cells[0].normal_frame(4);
    for w in [-0.02, 0.0, 0.03] {
        for d in [[0.3, 0.2, -0.1], [0.0, 0.1, 0.0], [-0.2, 0.0, 0.25]] {
            let scale = 0.4 * tube / norm3(&d);
            let x = [d[0] * scale, d[1] * scale, d[2] * scale, w];
            let r = norm3(&x[..3]);
            let (phi, a) = field.value(&x);
            let y = frame.apply(&x, &[0.0, 0.0, 0.0, w], 4);
            let want = ImQuaternion::from_array(y) * (profile_h(r / eps) / r);
            assert!((phi - want).norm() < 1e-12, "{phi:?} vs {want:?}");
            assert!(a[3].norm() < 1e-12);
        }
    }
}

#[test]
fn eta_cap_profile() {
    for eta in [0.05, 0.1, 0.2, 0.45] {
        let cap = EtaCap::new(eta).unwrap();
        assert_eq!(cap.factor(1.0 - eta), 1.0);
        assert_eq!(cap.modulus(1.0), 1.0);
        let mut prev = 0.0;
        for k in 0..=2000 {
            let t = 1.5 * k as f64 / 2000.0;
            let m = cap.modulus(t);
            assert!(m >= prev - 1e-15 && m <= 1.0);
            prev = m;
            if t > 1e-9 {
                assert!(cap.factor(t) <= 1.0 + 2.0 * eta * eta + 1e-12);
            }
            if t >= 1.0 - eta * eta {
                assert!((cap.factor(t) - 1.0 / t).abs() < 1e-14);
            }
        }
    }
    assert!(EtaCap::new(0.0).is_err() && EtaCap::new(0.5).is_err());
}

#[test]
fn eta_cap_identity_cases() {
    let eps = 0.5;
    let g = Grid::cube(3, 0.5, 0.125).unwrap();
    let spec = ymh_core::bps::BpsSpec::new(3, &[0.0; 3], 1, eps).unwrap();
    let p = ymh_core::bps::bps_pair(&spec, g, DerivScheme::Analytic).unwrap();
    let top = p.phi.components()[0].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let eta = 0.9 * (1.0 - top);
    let q = eta_cap(&p, eta.min(0.45)).unwrap();
    assert_eq!(q.phi.components(), p.phi.components());
    assert_eq!(q.a.components(), p.a.components());
    assert_eq!(energy(&q).total, energy(&p).total);

    let unit = Form::from_fn(g, 0, |x, _| ImQuaternion::new(x[1].cos(), x[1].sin(), 0.0)).unwrap();
    let flat = Pair::from_samples(unit, Form::zeros(g, 1).unwrap(), 1.0, DerivScheme::Central2).unwrap();
    let q = eta_cap(&flat, 0.1).unwrap();
    assert!(q.phi.components()[0].iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));
}

#[test]
fn capped_defect_scales_with_epsilon_squared() {
    let opts = options();
    let g = Grid::cube(3, 2.0, 0.05).unwrap();
    let ratios: Vec<f64> = [0.2, 0.1]
        .iter()
        .map(|&eps| {
            let p = recovery_pair(&dipole(), eps, g, &opts).unwrap();
            let q = eta_cap(&p, 0.1).unwrap();
            assert!(modulus_defect(&q) <= modulus_defect(&p));
            modulus_defect(&q) / (eps * eps)
        })
        .collect();
    let mass = dipole().mass();
    assert!(ratios.iter().all(|r| *r <= 5.0 * mass), "{ratios:?}");
    assert!(ratios[1] <= 1.5 * ratios[0], "{ratios:?}");
}
