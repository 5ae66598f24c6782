use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;
use ymh_core::bps::{bps_pair, box_energy_oracle, fixture, BpsSpec};
use ymh_core::currents::{omega_flux, TriSurface};
use ymh_core::fields::{Hedgehog, RandomGauge, RandomPair, RandomVector, VectorField, ZeroCovector};
use ymh_core::forms::{d, integrate, DerivScheme, Form, Grid};
use ymh_core::gauge::{
    beta_form, cap_modulus, cov_deriv, curvature, el_residual, energy, energy_densities, gauge_transform,
    gauge_transform_field, inequality_violations, omega_form, pure_gauge_pair, theta_pairing, z_form, AutoDiff, Pair,
    PureGauge,
};
use ymh_core::quat::{exp_im, ImQuaternion, Quaternion};

fn cube(half: f64, h: f64) -> Grid {
    Grid::cube(3, half, h).unwrap()
}

fn constant_phi(g: Grid, v: ImQuaternion) -> Form<ImQuaternion> {
    Form::from_fn(g, 0, |_, _| v).unwrap()
}

fn random_pair(seed: u64, g: Grid, eps: f64) -> Pair {
    Pair::from_field(Arc::new(AutoDiff(RandomPair::new(seed, g.dim(), 2.0, 0.8))), g, eps, DerivScheme::Analytic).unwrap()
}

fn smooth_alpha(g: Grid) -> Form<f64> {
    Form::from_fn(g, 1, |x, c| match c {
        0 => (x[1] * 1.3).sin() * x[2],
        1 => (x[0] - 0.4 * x[2]).cos(),
        _ => x[0] * x[1] + (0.7 * x[2]).sin(),
    })
    .unwrap()
}

/// `Phi = i`, `A = i alpha`.
fn abelian(g: Grid) -> Pair {
    let alpha = smooth_alpha(g);
    pure_gauge_pair(&constant_phi(g, ImQuaternion::I), &alpha, 1.0, DerivScheme::Central2).unwrap()
}

fn vacuum(g: Grid) -> Pair {
    let a = Form::zeros(g, 1).unwrap();
    Pair::from_samples(constant_phi(g, ImQuaternion::new(0.3, -0.5, 0.2)), a, 0.7, DerivScheme::Central2).unwrap()
}

fn max_gap(a: &Form<ImQuaternion>, b: &Form<ImQuaternion>) -> f64 {
    a.sub(b).unwrap().max_abs()
}

#[test]
fn covariant_derivative_examples() {
    let g = cube(1.0, 0.25);
    let p = random_pair(3, g, 1.0).sampled_only();
    let flat = Pair::from_samples(p.phi.clone(), Form::zeros(g, 1).unwrap(), 1.0, DerivScheme::Central2).unwrap();
    assert_eq!(max_gap(&cov_deriv(&flat), &d(&p.phi, DerivScheme::Central2).unwrap()), 0.0);

    let a = Form::from_fn(g, 1, |_, c| if c == 0 { ImQuaternion::J } else { ImQuaternion::ZERO }).unwrap();
    let p = Pair::from_samples(constant_phi(g, ImQuaternion::I), a, 1.0, DerivScheme::Central2).unwrap();
    let da = cov_deriv(&p);
    assert!(da.components()[0].iter().all(|&v| v == ImQuaternion::K * -2.0));
    assert!(da.components()[1].iter().chain(&da.components()[2]).all(|&v| v == ImQuaternion::ZERO));
}

#[test]
fn hedgehog_pure_gauge_pair() {
    let g = Grid::new(&[11; 3], &[0.5, 0.4, 0.6], &[1.5, 1.4, 1.6]).unwrap();
    let field = AutoDiff(PureGauge { phi: Hedgehog { n: 3, center: [0.0; 4], sign: 1.0 }, alpha: ZeroCovector });
    let p = Pair::from_field(Arc::new(field), g, 1.0, DerivScheme::Analytic).unwrap();
    assert!(cov_deriv(&p).max_abs() < 1e-14);
    let f = curvature(&p);
    for node in 0..g.len() {
        let j = p.jet(node);
        for (c, (a, b)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            let want = j.dphi[a].cross(j.dphi[b]) * -0.5;
            assert!((f.components()[c][node] - want).norm() < 1e-13);
        }
    }
    let shell = AutoDiff(PureGauge { phi: Hedgehog { n: 3, center: [0.0; 4], sign: 1.0 }, alpha: ZeroCovector });
    let flux = omega_flux(&shell, &TriSurface::sphere([0.0; 3], 1.0, 5));
    assert!((flux + 1.0).abs() < 1e-3, "{flux}");
}

#[test]
fn pure_gauge_examples() {
    let g = cube(1.0, 0.25);
    let zero = Form::<f64>::zeros(g, 1).unwrap();
    let p = pure_gauge_pair(&constant_phi(g, ImQuaternion::I), &zero, 1.0, DerivScheme::Central2).unwrap();
    assert_eq!(p.a.max_abs(), 0.0);
    assert_eq!(curvature(&p).max_abs(), 0.0);

    let x_dy = Form::from_fn(g, 1, |x, c| if c == 1 { x[0] } else { 0.0 }).unwrap();
    let p = pure_gauge_pair(&constant_phi(g, ImQuaternion::I), &x_dy, 1.0, DerivScheme::Central2).unwrap();
    let f = curvature(&p);
    assert!(f.component(0b011).iter().all(|v| (*v - ImQuaternion::I).norm() < 1e-12));
    assert!(f.component(0b101).iter().chain(f.component(0b110)).all(|v| v.norm() < 1e-12));

    let bad = constant_phi(g, ImQuaternion::I * 2.0);
    assert!(pure_gauge_pair(&bad, &zero, 1.0, DerivScheme::Central2).is_err());
}

#[test]
fn abelian_pair_forms() {
    let g = cube(1.0, 0.1);
    let p = abelian(g);
    let dalpha = d(&smooth_alpha(g), DerivScheme::Central2).unwrap();
    let f = curvature(&p);
    let want = dalpha.map(|v| ImQuaternion::I * v);
    assert!(max_gap(&f, &want) < 1e-13);
    assert!(cov_deriv(&p).max_abs() < 1e-15);
    assert!(z_form(&p).max_abs() < 1e-14);
    assert!(beta_form(&p).sub(&dalpha).unwrap().max_abs() < 1e-13);
    assert!(omega_form(&p).unwrap().sub(&dalpha.scale(2.0)).unwrap().max_abs() < 1e-12);
}

#[test]
fn vacuum_is_trivial() {
    let g = cube(1.0, 0.25);
    let p = vacuum(g);
    let e = energy(&p);
    assert!(e.total < 1e-25 && e.dirichlet < 1e-25 && e.yang_mills == 0.0);
    assert_eq!(curvature(&p).max_abs(), 0.0);
    assert_eq!(beta_form(&p).max_abs(), 0.0);
    let flat_i = Pair::from_samples(constant_phi(g, ImQuaternion::I), Form::zeros(g, 1).unwrap(), 1.0, DerivScheme::Central2).unwrap();
    assert_eq!(omega_form(&flat_i).unwrap().max_abs(), 0.0);
    let r = el_residual(&p).unwrap();
    assert!(r.higgs < 1e-12 && r.yang_mills < 1e-12);
    let one = Form::from_fn(g, 0, |_, _| 1.0).unwrap();
    let t = theta_pairing(&p, &one).unwrap();
    assert!(t.pairing.abs() < 1e-25 && t.dirichlet_twice < 1e-25 && t.residual < 1e-12);
    assert!(theta_pairing(&p, &Form::zeros(g, 1).unwrap()).is_err());
}

#[test]
fn energy_is_scale_covariant() {
    let spec = |eps| BpsSpec::new(3, &[0.0; 3], 1, eps).unwrap();
    let small = energy(&bps_pair(&spec(0.5), cube(2.0, 0.05), DerivScheme::Analytic).unwrap());
    let unit = energy(&bps_pair(&spec(1.0), cube(4.0, 0.1), DerivScheme::Analytic).unwrap());
    assert!((small.total - unit.total).abs() < 1e-10 * unit.total, "{} {}", small.total, unit.total);
    assert!((small.dirichlet - small.yang_mills).abs() < 1e-10 * small.total);
}

#[test]
fn z_integral_around_a_monopole() {
    let fx = fixture();
    let (half, eps) = (2.0, 0.25);
    let oracle = box_energy_oracle(half / eps).unwrap();
    for (sign, charge) in [(1i8, fx.z_charge_for_plus), (-1, fx.z_charge_for_minus)] {
        let p = bps_pair(&BpsSpec::new(3, &[0.0; 3], sign, eps).unwrap(), cube(half, 0.05), DerivScheme::Analytic).unwrap();
        let z = integrate(&z_form(&p)).unwrap();
        assert!((z - charge * oracle).abs() < 0.01 * oracle, "sign {sign}: {z} vs {}", charge * oracle);
        assert!((oracle / (4.0 * PI) - 1.0).abs() < 0.1);
    }
}

#[test]
fn bps_solves_the_field_equations_to_second_order() {
    let spec = BpsSpec::new(3, &[0.05, -0.03, 0.02], 1, 1.0).unwrap();
    let res = |h: f64| el_residual(&bps_pair(&spec, cube(3.0, h), DerivScheme::Central2).unwrap().sampled_only()).unwrap();
    let (coarse, fine) = (res(0.2), res(0.1));
    for (a, b) in [(coarse.higgs, fine.higgs), (coarse.yang_mills, fine.yang_mills)] {
        assert!((3.0..=5.0).contains(&(a / b)), "{a} {b}");
    }
    let random = el_residual(&random_pair(9, cube(1.0, 0.1), 1.0)).unwrap();
    assert!(random.higgs > 1e-3 && random.yang_mills > 1e-3);
}

#[test]
fn analytic_gauge_transform_is_exactly_invariant() {
    let g = cube(1.0, 0.1);
    let p = random_pair(21, g, 0.6);
    let q = gauge_transform_field(&p, Arc::new(AutoDiff(RandomGauge::new(4, 3, 2.0, 0.9)))).unwrap();
    let (d0, y0) = energy_densities(&p);
    let (d1, y1) = energy_densities(&q);
    for i in 0..g.len() {
        assert!((d0[i] - d1[i]).abs() <= 1e-11 * (1.0 + d0[i]));
        assert!((y0[i] - y1[i]).abs() <= 1e-11 * (1.0 + y0[i]));
    }
    let gap = z_form(&p).sub(&z_form(&q)).unwrap().max_abs();
    assert!(gap < 1e-10 * (1.0 + z_form(&p).max_abs()));
}

fn sampled_gauge(g: Grid, seed: u64) -> Form<Quaternion> {
    let u = RandomVector::new(seed, 3, 2.0, 0.9);
    Form::from_fn(g, 0, |x, _| exp_im(ImQuaternion::from_array(u.eval(x)))).unwrap()
}

#[test]
fn sampled_gauge_transform_is_invariant_to_second_order() {
    let gap = |h: f64| {
        let g = cube(1.0, h);
        let p = random_pair(8, g, 1.0).sampled_only();
        let q = gauge_transform(&p, &sampled_gauge(g, 12)).unwrap();
        let (e0, e1) = (energy(&p).total, energy(&q).total);
        (e1 - e0).abs() / e0
    };
    let (coarse, fine) = (gap(0.1), gap(0.05));
    assert!(coarse < 0.01 && coarse / fine >= 3.5, "{coarse} {fine}");

    let g = cube(1.0, 0.25);
    let p = vacuum(g);
    let id = Form::from_fn(g, 0, |_, _| Quaternion::ONE).unwrap();
    let q = gauge_transform(&p, &id).unwrap();
    assert!(max_gap(&q.phi, &p.phi) < 1e-15 && max_gap(&q.a, &p.a) < 1e-15);
    let scaled = id.scale(1.5);
    assert!(gauge_transform(&p, &scaled).is_err());
}

#[test]
fn cap_modulus_examples() {
    let g = cube(1.0, 0.25);
    let p = vacuum(g);
    let c = cap_modulus(&p);
    assert_eq!(max_gap(&c.phi, &p.phi), 0.0);
    let big = Pair::from_samples(constant_phi(g, ImQuaternion::I * 2.0), Form::zeros(g, 1).unwrap(), 1.0, DerivScheme::Central2).unwrap();
    let c = cap_modulus(&big);
    assert!(c.phi.components()[0].iter().all(|&v| v == ImQuaternion::I));
    assert_eq!(energy(&c).total, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pointwise_energy_inequality(seed in any::<u64>(), eps in 0.05..3.0f64) {
        let p = random_pair(seed, cube(1.0, 0.25), eps);
        prop_assert_eq!(inequality_violations(&p), 0);
        prop_assert_eq!(inequality_violations(&p.sampled_only()), 0);
    }

    #[test]
    fn capping_never_raises_energy_and_is_idempotent(seed in any::<u64>()) {
        let p = Pair::from_field(
            Arc::new(AutoDiff(RandomPair::new(seed, 3, 2.0, 1.5))), cube(1.0, 0.25), 0.5, DerivScheme::Analytic,
        ).unwrap();
        let c = cap_modulus(&p);
        let (d0, y0) = energy_densities(&p);
        let (d1, y1) = energy_densities(&c);
        for i in 0..d0.len() {
            prop_assert!(d1[i] <= d0[i] * (1.0 + 1e-12) + 1e-14);
            prop_assert_eq!(y0[i], y1[i]);
        }
        prop_assert!(c.phi.components()[0].iter().all(|v| v.norm() <= 1.0 + 1e-15));
        let cc = cap_modulus(&c);
        prop_assert!(max_gap(&cc.phi, &c.phi) < 1e-15);
    }

    #[test]
    fn random_pairs_violate_the_monopole_equation(seed in any::<u64>()) {
        let g = cube(1.0, 0.25);
        let p = random_pair(seed, g, 1.0);
        let one = Form::from_fn(g, 0, |_, _| 1.0).unwrap();
        prop_assert!(theta_pairing(&p, &one).unwrap().residual > 1e-6);
    }
}
