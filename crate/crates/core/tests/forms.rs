use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use ymh_core::forms::{
    basis, d, integrate, io, norm2_pointwise, re_part, star, wedge, AutoDiffForm, ClosedForm, DerivScheme, Form, Grid,
    MAX_DIM,
};
use ymh_core::quat::{ImQuaternion, Quaternion};
use ymh_core::{Error, Scalar};

fn unit_cube(n: usize, m: usize) -> Grid {
    Grid::new(&vec![m; n], &vec![0.0; n], &vec![1.0; n]).unwrap()
}

fn random_form<V: ymh_core::forms::Coeff>(grid: Grid, k: usize, seed: u64) -> Form<V> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps = (0..basis::count(grid.dim(), k))
        .map(|_| {
            (0..grid.len())
                .map(|_| V::from_parts(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
                .collect()
        })
        .collect();
    Form::from_components(grid, k, comps).unwrap()
}

/// Smooth trigonometric coefficients with a per-component phase.
struct Waves {
    n: usize,
    comps: usize,
    width: usize,
    phase: f64,
}

impl ClosedForm for Waves {
    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM], out: &mut [D]) {
        for c in 0..self.comps {
            for w in 0..self.width {
                let s = (c * self.width + w) as f64;
                let mut v = D::from(0.3 * s + self.phase);
                for a in 0..self.n {
                    v += x[a] * (1.0 + 0.37 * ((a as f64 + s) % 3.0));
                }
                out[c * self.width + w] = v.sin() + (x[0] * x[1 % self.n] * (0.5 + self.phase) + x[2] * x[2]).cos() * 0.2;
            }
        }
    }
}

fn smooth_form(grid: Grid, k: usize, phase: f64) -> Form<ImQuaternion> {
    let comps = basis::count(grid.dim(), k);
    let src = AutoDiffForm::<_, ImQuaternion>::new(Waves { n: grid.dim(), comps, width: 3, phase }, comps);
    Form::from_source(grid, k, Arc::new(src)).unwrap()
}

fn sampled(grid: Grid, k: usize, f: impl Fn(&[f64; MAX_DIM], usize) -> ImQuaternion) -> Form<ImQuaternion> {
    Form::from_fn(grid, k, f).unwrap()
}

fn interior_max(f: &Form<f64>, depth: usize) -> f64 {
    let g = f.grid();
    (0..g.len())
        .filter(|&i| g.is_interior(i, depth))
        .flat_map(|i| f.at(i))
        .fold(0.0, |m, v| m.max(v.abs()))
}

#[test]
fn derivative_of_constant_vanishes() {
    let g = unit_cube(3, 9);
    let f = Form::from_fn(g, 0, |_, _| 2.5).unwrap();
    for s in [DerivScheme::Central2, DerivScheme::Central4] {
        assert!(d(&f, s).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn derivative_of_coordinate_is_exact_on_affine_data() {
    let g = unit_cube(3, 9);
    let f = Form::from_fn(g, 0, |x, _| x[0]).unwrap();
    let df = d(&f, DerivScheme::Central2).unwrap();
    for (c, comp) in df.components().iter().enumerate() {
        let want = if c == 0 { 1.0 } else { 0.0 };
        assert!(comp.iter().all(|v| (v - want).abs() < 1e-12));
    }
}

#[test]
fn top_degree_derivative_is_an_error() {
    let g = unit_cube(3, 6);
    let f = Form::<f64>::zeros(g, 3).unwrap();
    assert!(matches!(d(&f, DerivScheme::Central2), Err(Error::TopDegree)));
}

#[test]
fn dd_vanishes_on_interior_nodes() {
    for n in [3, 4] {
        let g = unit_cube(n, 7);
        for k in 0..n - 1 {
            for s in [DerivScheme::Central2, DerivScheme::Central4] {
                let depth = if s == DerivScheme::Central2 { 1 } else { 2 };
                let f: Form<f64> = random_form(g, k, 11 + k as u64);
                let dd = d(&d(&f, s).unwrap(), s).unwrap();
                assert!(interior_max(&dd, depth) < 1e-9, "n={n} k={k} {s:?}");
            }
        }
    }
}

#[test]
fn wedge_examples() {
    let g = unit_cube(3, 5);
    let dx = Form::from_fn(g, 1, |_, c| if c == 0 { 1.0 } else { 0.0 }).unwrap();
    let dy = Form::from_fn(g, 1, |_, c| if c == 1 { 1.0 } else { 0.0 }).unwrap();
    let xy: Form<f64> = wedge(&dx, &dy).unwrap();
    let yx: Form<f64> = wedge(&dy, &dx).unwrap();
    assert_eq!(xy.add(&yx).unwrap().max_abs(), 0.0);
    assert_eq!(xy.component(0b011)[0], 1.0);

    let a = sampled(g, 1, |_, c| match c {
        0 => ImQuaternion::I,
        1 => ImQuaternion::J,
        _ => ImQuaternion::ZERO,
    });
    let aa: Form<Quaternion> = wedge(&a, &a).unwrap();
    for (mask, comp) in aa.masks().iter().zip(aa.components()) {
        let want = if *mask == 0b011 { Quaternion::new(0.0, 0.0, 0.0, 2.0) } else { Quaternion::default() };
        assert!(comp.iter().all(|v| *v == want), "{mask:b}");
    }

    let one = Form::from_fn(g, 0, |_, _| 1.0).unwrap();
    let f: Form<f64> = random_form(g, 2, 3);
    let fw: Form<f64> = wedge(&f, &one).unwrap();
    assert_eq!(fw.sub(&f).unwrap().max_abs(), 0.0);
    assert!(matches!(wedge::<f64, f64, f64>(&f, &f), Err(Error::DegreeOverflow(4, 3))));
}

#[test]
fn star_examples() {
    let g = unit_cube(3, 5);
    let one = Form::from_fn(g, 0, |_, _| 1.0).unwrap();
    let vol = star(&one);
    assert_eq!(vol.degree(), 3);
    assert!(vol.components()[0].iter().all(|&v| v == 1.0));
    let dx = Form::from_fn(g, 1, |_, c| if c == 0 { 1.0 } else { 0.0 }).unwrap();
    let s = star(&dx);
    assert!(s.component(0b110).iter().all(|&v| v == 1.0));
    assert_eq!(s.component(0b011).iter().chain(s.component(0b101)).fold(0.0f64, |m, v| m.max(v.abs())), 0.0);
}

#[test]
fn star_squared_sign_on_basis_covectors() {
    for n in [3usize, 4] {
        let g = unit_cube(n, 5);
        for k in 0..=n {
            for mask in basis::basis(n, k) {
                let f = Form::from_fn(g, k, |_, c| if basis::basis(n, k)[c] == mask { 1.0 } else { 0.0 }).unwrap();
                let ss = star(&star(&f));
                let sign = if (k * (n - k)) % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(ss.sub(&f.scale(sign)).unwrap().max_abs(), 0.0, "n={n} mask={mask:b}");
            }
        }
    }
}

#[test]
fn real_part_examples() {
    let g = unit_cube(3, 5);
    let idx = sampled(g, 1, |_, c| if c == 0 { ImQuaternion::I } else { ImQuaternion::ZERO });
    assert_eq!(re_part(&idx).max_abs(), 0.0);
    let q = Form::from_fn(g, 1, |_, c| if c == 0 { Quaternion::new(1.0, 1.0, 0.0, 0.0) } else { Quaternion::default() }).unwrap();
    let r = re_part(&q);
    assert!(r.components()[0].iter().all(|&v| v == 1.0));
}

#[test]
fn norms_and_integrals() {
    let g = unit_cube(3, 11);
    let f = sampled(g, 1, |_, c| match c {
        0 => ImQuaternion::I,
        1 => ImQuaternion::J,
        _ => ImQuaternion::ZERO,
    });
    assert!(norm2_pointwise(&f).iter().all(|&v| v == 2.0));
    let one = Form::from_fn(g, 0, |_, _| 1.0).unwrap();
    assert_abs_diff_eq!(integrate(&one).unwrap(), 1.0, epsilon = 1e-12);
    let x = Form::from_fn(g, 0, |p, _| p[0]).unwrap();
    assert_abs_diff_eq!(integrate(&x).unwrap(), 0.5, epsilon = 1e-12);
    let x2 = Form::from_fn(g, 0, |p, _| p[0] * p[0]).unwrap();
    let h = g.h();
    assert_abs_diff_eq!(integrate(&x2).unwrap(), 1.0 / 3.0 + h * h / 6.0, epsilon = 1e-12);
    let two = Form::<f64>::zeros(g, 2).unwrap();
    assert!(integrate(&two).is_err());
}

#[test]
fn central_schemes_converge_to_the_analytic_derivative() {
    let mut ratios = Vec::new();
    for (scheme, order) in [(DerivScheme::Central2, 4.0), (DerivScheme::Central4, 16.0)] {
        let err = |m: usize| {
            let f = smooth_form(unit_cube(3, m), 1, 0.0);
            let exact = d(&f, DerivScheme::Analytic).unwrap();
            let fd = d(&f.clone().drop_source(), scheme).unwrap();
            fd.sub(&exact).unwrap().max_abs()
        };
        let ratio = err(17) / err(33);
        ratios.push(ratio);
        assert!((ratio / order - 1.0).abs() < 0.15, "{scheme:?}: ratio {ratio}");
    }
}

/// `d_A w = dw + A ^ w - (-1)^k w ^ A` for `Im(H)`-valued `w` and connection `A`.
fn cov_ext(a: &Form<ImQuaternion>, w: &Form<ImQuaternion>, scheme: DerivScheme) -> Form<Quaternion> {
    let dw = d(w, scheme).unwrap().map(Quaternion::from);
    let aw: Form<Quaternion> = wedge(a, w).unwrap();
    let wa: Form<Quaternion> = wedge(w, a).unwrap();
    let sign = if w.degree() % 2 == 0 { -1.0 } else { 1.0 };
    dw.add(&aw).unwrap().add(&wa.scale(sign)).unwrap()
}

/// Max gap of `d Re(w ^ z) = Re(d_A w ^ z) + (-1)^k Re(w ^ d_A z)`.
fn d_re_gap(m: usize) -> f64 {
    let g = unit_cube(3, m);
    let a = smooth_form(g, 1, 0.0).drop_source();
    let w = smooth_form(g, 1, 0.9).drop_source();
    let z = smooth_form(g, 1, 2.1).drop_source();
    let s = DerivScheme::Central2;
    let wz: Form<Quaternion> = wedge(&w, &z).unwrap();
    let lhs = d(&re_part(&wz), s).unwrap();
    let r1: Form<Quaternion> = wedge(&cov_ext(&a, &w, s), &z.map(Quaternion::from)).unwrap();
    let r2: Form<Quaternion> = wedge(&w.map(Quaternion::from), &cov_ext(&a, &z, s)).unwrap();
    let rhs = re_part(&r1).sub(&re_part(&r2)).unwrap();
    lhs.sub(&rhs).unwrap().max_abs()
}

#[test]
fn d_re_identity_is_second_order() {
    let (coarse, fine) = (d_re_gap(17), d_re_gap(33));
    let ratio = coarse / fine;
    assert!((3.5..=4.5).contains(&ratio), "gaps {coarse} {fine}");
}

#[test]
fn binary_and_csv_layouts() {
    let g = unit_cube(4, 5);
    let f: Form<ImQuaternion> = random_form(g, 2, 5);
    let mut buf = Vec::new();
    io::write_binary(&f, &mut buf).unwrap();
    let back: Form<ImQuaternion> = io::read_binary(buf.as_slice()).unwrap();
    assert_eq!(back.grid(), f.grid());
    assert_eq!(back.sub(&f).unwrap().max_abs(), 0.0);
    assert!(io::read_binary::<f64, _>(buf.as_slice()).is_err());
    let mut csv = Vec::new();
    io::write_csv(&f, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), g.len() + 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wedge_real_part_is_graded_symmetric(k in 0usize..4, l in 0usize..4, seed in any::<u64>()) {
        prop_assume!(k + l <= 3);
        let g = unit_cube(3, 5);
        let w: Form<ImQuaternion> = random_form(g, k, seed);
        let z: Form<ImQuaternion> = random_form(g, l, seed ^ 0x5a5a);
        let wz: Form<Quaternion> = wedge(&w, &z).unwrap();
        let zw: Form<Quaternion> = wedge(&z, &w).unwrap();
        let sign = if (k * l) % 2 == 0 { 1.0 } else { -1.0 };
        let gap = re_part(&wz).sub(&re_part(&zw).scale(sign)).unwrap().max_abs();
        prop_assert!(gap < 1e-15, "gap {}", gap);
    }

    #[test]
    fn star_is_an_isometry(n in 3usize..5, k in 0usize..5, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let g = unit_cube(n, 5);
        let f: Form<ImQuaternion> = random_form(g, k, seed);
        let a = norm2_pointwise(&f);
        let b = norm2_pointwise(&star(&f));
        prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-14));
        let sign = if (k * (n - k)) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(star(&star(&f)).sub(&f.scale(sign)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn dd_vanishes_for_random_data(seed in any::<u64>(), k in 0usize..2) {
        let g = unit_cube(3, 6);
        let f: Form<f64> = random_form(g, k, seed);
        let dd = d(&d(&f, DerivScheme::Central2).unwrap(), DerivScheme::Central2).unwrap();
        prop_assert!(interior_max(&dd, 1) < 1e-9);
    }
}
