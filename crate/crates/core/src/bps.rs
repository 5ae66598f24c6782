//! The charge-one BPS monopole, its profile functions and energy oracles.
//!
//! At unit coupling `Phi_0 = sign h(r) x/r` and `A_0 = g(r) sum_i (x/r x e_i) dx_i` with
//! `h(r) = r f(r)`, `g(r) = r a(r)`. The rescaled pair is `(Phi_0(x/eps), eps^-1 A_0(x/eps))`.

use crate::error::{Error, Result};
use crate::forms::{DerivScheme, Grid, MAX_DIM};
use crate::gauge::{AutoDiff, ClosedPair, Pair};
use crate::Scalar;
use gauss_quad::GaussLegendre;
use num_dual::Dual64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::Arc;

/// Radius below which the profiles use their Taylor series.
pub const SERIES_RADIUS: f64 = 1e-2;
/// Beyond this radius `1/sinh(2r)` is below round-off and dropped.
const FAR_RADIUS: f64 = 20.0;

const FIXTURE: &str = include_str!("../fixtures/bps_sign.json");

/// Pinned conventions: which branch satisfies which Bogomolnyi equation, and the calc-lemma constant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BpsFixture {
    /// For `sign = s`: `*d_A Phi = bogomolnyi_sign(s) * eps * F_A`.
    pub bogomolnyi_sign_for_minus: f64,
    pub bogomolnyi_sign_for_plus: f64,
    /// Degree of `Phi/|Phi|` on spheres around the center, for each sign.
    pub degree_for_minus: i32,
    pub degree_for_plus: i32,
    /// `int Z / 4 pi` for each sign.
    pub z_charge_for_minus: f64,
    pub z_charge_for_plus: f64,
    pub calc_lemma_c: f64,
}

pub fn fixture() -> BpsFixture {
    serde_json::from_str(FIXTURE).expect("bundled fixture parses")
}

/// `f` as a function of `u = r^2`.
pub fn f_of_sq<D: Scalar>(u: D) -> D {
    if u < SERIES_RADIUS * SERIES_RADIUS {
        let u2 = u * u;
        D::from(2.0 / 3.0) - u * (8.0 / 45.0) + u2 * (64.0 / 945.0) - u2 * u * (128.0 / 4725.0)
    } else if u < FAR_RADIUS * FAR_RADIUS {
        let s = u.sqrt();
        (s * (s * 2.0).tanh()).recip() - (u * 2.0).recip()
    } else {
        u.sqrt().recip() - (u * 2.0).recip()
    }
}

/// `a` as a function of `u = r^2`.
pub fn a_of_sq<D: Scalar>(u: D) -> D {
    if u < SERIES_RADIUS * SERIES_RADIUS {
        let u2 = u * u;
        D::from(-1.0 / 3.0) + u * (7.0 / 45.0) - u2 * (62.0 / 945.0) + u2 * u * (127.0 / 4725.0)
    } else if u < FAR_RADIUS * FAR_RADIUS {
        let s = u.sqrt();
        (s * (s * 2.0).sinh()).recip() - (u * 2.0).recip()
    } else {
        -(u * 2.0).recip()
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r < 0.0 || !r.is_finite() {
        return Err(Error::Invalid(format!("radius must be non-negative, got {r}")));
    }
    Ok(())
}

/// `f(r) = 1/(r tanh 2r) - 1/(2r^2)`.
pub fn profile_f(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(f_of_sq(r * r))
}

/// `a(r) = 1/(r sinh 2r) - 1/(2r^2)`.
pub fn profile_a(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(a_of_sq(r * r))
}

/// `|Phi_0| = h(r) = r f(r)`.
pub fn profile_h<D: Scalar>(r: D) -> D {
    r * f_of_sq(r * r)
}

/// `g(r) = r a(r)`.
pub fn profile_g<D: Scalar>(r: D) -> D {
    r * a_of_sq(r * r)
}

/// Orthonormal rows mapping ambient coordinates to monopole coordinates `y = R (x - c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub rows: [[f64; MAX_DIM]; 3],
}

impl Frame {
    pub fn identity() -> Self {
        let mut rows = [[0.0; MAX_DIM]; 3];
        for (i, r) in rows.iter_mut().enumerate() {
            r[i] = 1.0;
        }
        Frame { rows }
    }

    pub fn negated(&self) -> Self {
        let mut rows = self.rows;
        for r in rows.iter_mut() {
            for v in r.iter_mut() {
                *v = -*v;
            }
        }
        Frame { rows }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        for i in 0..3 {
            if self.rows[i][n..].iter().any(|&v| v != 0.0) {
                return Err(Error::Invalid("frame has entries beyond the ambient dimension".into()));
            }
            for j in 0..3 {
                let dot: f64 = (0..n).map(|b| self.rows[i][b] * self.rows[j][b]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-10 {
                    return Err(Error::Invalid("frame rows are not orthonormal".into()));
                }
            }
        }
        Ok(())
    }

    pub fn apply<D: Scalar>(&self, x: &[D; MAX_DIM], center: &[f64; MAX_DIM], n: usize) -> [D; 3] {
        let mut y = [D::from(0.0); 3];
        for (i, yi) in y.iter_mut().enumerate() {
            for b in 0..n {
                let r = self.rows[i][b];
                if r != 0.0 {
                    *yi += (x[b] - center[b]) * r;
                }
            }
        }
        y
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BpsSpec {
    pub dim: usize,
    pub center: [f64; MAX_DIM],
    /// `+1` or `-1`: the branch `Phi = sign h(r) x/r`.
    pub sign: i8,
    pub epsilon: f64,
    pub frame: Frame,
}

impl BpsSpec {
    pub fn new(dim: usize, center: &[f64], sign: i8, epsilon: f64) -> Result<Self> {
        let mut c = [0.0; MAX_DIM];
        c[..center.len().min(MAX_DIM)].copy_from_slice(&center[..center.len().min(MAX_DIM)]);
        let spec = BpsSpec { dim, center: c, sign, epsilon, frame: Frame::identity() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_frame(mut self, frame: Frame) -> Result<Self> {
        self.frame = frame;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(3..=4).contains(&self.dim) {
            return Err(Error::Invalid(format!("BPS pair needs n = 3 or 4, got {}", self.dim)));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::Invalid("sign must be +1 or -1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Invalid("epsilon must be positive".into()));
        }
        self.frame.check(self.dim)
    }
}

/// Closed-form BPS pair.
#[derive(Clone, Debug)]
pub struct BpsField {
    pub spec: BpsSpec,
}

/// `t x e_i` for `i = 0, 1, 2`.
pub(crate) fn cross_basis<D: Scalar>(t: &[D; 3], i: usize) -> [D; 3] {
    let z = D::from(0.0);
    match i {
        0 => [z, t[2], -t[1]],
        1 => [-t[2], z, t[0]],
        _ => [t[1], -t[0], z],
    }
}

impl ClosedPair for BpsField {
    fn dim(&self) -> usize {
        self.spec.dim
    }

    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> ([D; 3], [[D; 3]; MAX_DIM]) {
        let s = &self.spec;
        let inv = 1.0 / s.epsilon;
        let y = s.frame.apply(x, &s.center, s.dim);
        let t = [y[0] * inv, y[1] * inv, y[2] * inv];
        let u = t[0] * t[0] + t[1] * t[1] + t[2] * t[2];
        let f = f_of_sq(u) * f64::from(s.sign);
        let a = a_of_sq(u) * inv;
        let phi = [t[0] * f, t[1] * f, t[2] * f];
        let z = D::from(0.0);
        let mut conn = [[z; 3]; MAX_DIM];
        for i in 0..3 {
            let c = cross_basis(&t, i);
            for (b, cb) in conn.iter_mut().enumerate().take(s.dim) {
                let r = s.frame.rows[i][b];
                if r != 0.0 {
                    for k in 0..3 {
                        cb[k] += c[k] * a * r;
                    }
                }
            }
        }
        (phi, conn)
    }
}

/// Samples the BPS pair on `grid` with its exact derivatives attached.
pub fn bps_pair(spec: &BpsSpec, grid: Grid, scheme: DerivScheme) -> Result<Pair> {
    spec.validate()?;
    if grid.dim() != spec.dim {
        return Err(Error::InvalidGrid(format!("spec is {}-dimensional, grid {}-dimensional", spec.dim, grid.dim())));
    }
    Pair::from_field(Arc::new(AutoDiff(BpsField { spec: spec.clone() })), grid, spec.epsilon, scheme)
}

/// BPS energy density `|d_A Phi|^2 + |F|^2` at unit coupling as a function of radius.
pub fn radial_density(r: f64) -> f64 {
    let rd = Dual64::new(r, 1.0);
    let h = profile_h(rd);
    let g = profile_g(rd);
    let (hv, hp, gv, gp) = (h.re, h.eps, g.re, g.eps);
    let f = f_of_sq(r * r);
    let a = a_of_sq(r * r);
    let tangential_higgs = f + 2.0 * hv * gv;
    let radial_curv = 2.0 * a + 2.0 * gv * gv;
    let tangential_curv = gp + a;
    hp * hp + 2.0 * tangential_higgs * tangential_higgs + radial_curv * radial_curv + 2.0 * tangential_curv * tangential_curv
}

fn gl(points: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(points).expect("positive order"))
}

fn panels(a: f64, b: f64, count: usize, rule: &GaussLegendre, f: &mut impl FnMut(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let w = (b - a) / count as f64;
    (0..count).map(|k| rule.integrate(a + k as f64 * w, a + (k + 1) as f64 * w, &mut *f)).sum()
}

/// Energy of the BPS pair inside the ball of radius `R` (in units of `eps`): `4 pi int_0^R r^2 e(r) dr`.
pub fn radial_energy_oracle(radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::Invalid("oracle radius must be positive".into()));
    }
    let rule = gl(20);
    let mut f = |r: f64| r * r * radial_density(r);
    let near = radius.min(8.0);
    let mut total = panels(0.0, near, 64, &rule, &mut f);
    if radius > near {
        // geometric panels for the algebraic tail
        let mut a = near;
        while a < radius {
            let b = (a * 1.25).min(radius);
            total += panels(a, b, 2, &rule, &mut f);
            a = b;
        }
    }
    Ok(4.0 * PI * total)
}

/// Closed-form ball energy `4 pi h(R) (1 - K^2)` with `K = 2R/sinh 2R`, used to cross-check the quadrature.
pub fn ball_energy_closed_form(radius: f64) -> f64 {
    let h = profile_h(radius);
    let k = if radius > FAR_RADIUS { 0.0 } else { 2.0 * radius / (2.0 * radius).sinh() };
    4.0 * PI * h * (1.0 - k * k)
}

/// Far-field energy deficit of the ball of radius `R`: `4 pi - E(B_R) = 4 pi / (2R) + O(e^{-4R})`.
pub fn tail(radius: f64) -> f64 {
    1.0 / (2.0 * radius)
}

/// Angular measure of the circle of radius `rho` inside the square `[-L, L]^2`.
fn square_arc(rho: f64, half: f64) -> f64 {
    if rho <= half {
        2.0 * PI
    } else if rho <= std::f64::consts::SQRT_2 * half {
        2.0 * PI - 8.0 * (half / rho).acos()
    } else {
        0.0
    }
}

/// Area of the sphere of radius `r` lying inside the cube `[-L, L]^3`.
pub fn sphere_area_in_cube(r: f64, half: f64, rule: &GaussLegendre) -> f64 {
    let zmax = r.min(half);
    let z1 = (r * r - 2.0 * half * half).max(0.0).sqrt().min(zmax);
    let z2 = (r * r - half * half).max(0.0).sqrt().min(zmax);
    let mut arc = |z: f64| square_arc((r * r - z * z).max(0.0).sqrt(), half);
    let curved = panels(z1, z2, 8, rule, &mut arc);
    2.0 * r * (curved + 2.0 * PI * (zmax - z2))
}

/// BPS energy inside the cube `[-L, L]^3` centered on the monopole, at unit coupling.
pub fn box_energy_oracle(half: f64) -> Result<f64> {
    if !(half > 0.0) {
        return Err(Error::Invalid("box half-width must be positive".into()));
    }
    let rule = gl(20);
    let inner = gl(16);
    let mut f = |r: f64| radial_density(r) * sphere_area_in_cube(r, half, &inner);
    let s2 = std::f64::consts::SQRT_2 * half;
    let s3 = 3f64.sqrt() * half;
    let near = half.min(8.0);
    let mut total = panels(0.0, near, 64, &rule, &mut f);
    let mut a = near;
    while a < half {
        let b = (a * 1.25).min(half);
        total += panels(a, b, 2, &rule, &mut f);
        a = b;
    }
    total += panels(half, s2, 16, &rule, &mut f);
    total += panels(s2, s3, 16, &rule, &mut f);
    Ok(total)
}

/// Violations of the calc-lemma bounds on a log grid of `points` values in `(lo, hi)`.
///
/// Checks `|coth t - 1/t| <= 1`, `|csch t - 1/t| <= C min(t, 1/t)` and
/// `|csch^2 t - 1/t^2| <= C min(1, 1/t^2)`.
pub fn calc_lemma_violations(c: f64, points: usize, lo: f64, hi: f64) -> usize {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (l0 + (l1 - l0) * (k as f64 + 0.5) / points as f64).exp())
        .filter(|&t| {
            let (e1, e2, e3) = calc_lemma_terms(t);
            e1 > 1.0 || e2 > c * t.min(1.0 / t) || e3 > c * (1.0f64).min(1.0 / (t * t))
        })
        .count()
}

/// `(|coth t - 1/t|, |csch t - 1/t|, |csch^2 t - 1/t^2|)` with series for small `t`.
pub fn calc_lemma_terms(t: f64) -> (f64, f64, f64) {
    if t < 1e-3 {
        let t2 = t * t;
        let e1 = t / 3.0 - t * t2 / 45.0;
        let e2 = t / 6.0 - 7.0 * t * t2 / 360.0;
        let e3 = 1.0 / 3.0 - t2 / 15.0;
        (e1.abs(), e2.abs(), e3.abs())
    } else {
        let coth = 1.0 / t.tanh();
        let csch = if t > 700.0 { 0.0 } else { 1.0 / t.sinh() };
        ((coth - 1.0 / t).abs(), (csch - 1.0 / t).abs(), (csch * csch - 1.0 / (t * t)).abs())
    }
}

/// Smallest constant making the last two calc-lemma bounds hold on the grid.
pub fn calc_lemma_constant(points: usize, lo: f64, hi: f64) -> f64 {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (l0 + (l1 - l0) * (k as f64 + 0.5) / points as f64).exp())
        .map(|t| {
            let (_, e2, e3) = calc_lemma_terms(t);
            (e2 / t.min(1.0 / t)).max(e3 / (1.0f64).min(1.0 / (t * t)))
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_closed_form_at_switch() {
        let r = SERIES_RADIUS;
        let s = r * (1.0 + 1e-9);
        let closed_f = 1.0 / (s * (2.0 * s).tanh()) - 1.0 / (2.0 * s * s);
        let closed_a = 1.0 / (s * (2.0 * s).sinh()) - 1.0 / (2.0 * s * s);
        let series_f = f_of_sq(r * r * (1.0 - 1e-9));
        let series_a = a_of_sq(r * r * (1.0 - 1e-9));
        // the closed forms lose ~1e-12 to cancellation at r0
        assert!((closed_f - series_f).abs() < 1e-10);
        assert!((closed_a - series_a).abs() < 1e-10);
    }

    #[test]
    fn negative_radius_rejected() {
        assert!(profile_f(-1.0).is_err());
        assert!(profile_a(-0.1).is_err());
    }

    #[test]
    fn far_field_law() {
        let defect = 1.0 - profile_h(5.0f64);
        assert!((defect - 0.1).abs() <= 1e-6);
    }
}
