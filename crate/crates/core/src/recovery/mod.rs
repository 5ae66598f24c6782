//! Recovery pairs for polyhedral currents: rescaled BPS monopoles in tubes around the
//! current, glued through cut-offs to the pure-gauge pair of a Gauss map.

mod current;
mod gauss;

pub use current::{distance_field, Cell, PolyCurrent};
pub use gauss::{Certificate, GaussMap, GaussSource};

use crate::bps::{profile_g, profile_h, BpsField, BpsSpec};
use crate::error::{Error, Result};
use crate::fields::{cross3, dot3, vector_partial, VectorField};
use crate::forms::{DerivScheme, Form, Grid, MAX_DIM};
use crate::gauge::{reshape_modulus, AutoDiff, ClosedPair, Pair};
use crate::quat::ImQuaternion;
use crate::Scalar;
use current::{norm_diff, re_point};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// `s(t) = t^3 (10 - 15 t + 6 t^2)` clamped to `[0, 1]`; twice continuously differentiable.
pub fn smoothstep<D: Scalar>(t: D) -> D {
    if t.re() <= 0.0 {
        D::from(0.0)
    } else if t.re() >= 1.0 {
        D::from(1.0)
    } else {
        t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
    }
}

/// Cut-off equal to one below `inner` and zero beyond `outer`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub inner: f64,
    pub outer: f64,
}

impl CutoffProfile {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(0.0 <= inner && inner < outer) {
            return Err(Error::Invalid(format!("cut-off needs 0 <= inner < outer, got {inner}, {outer}")));
        }
        Ok(CutoffProfile { inner, outer })
    }

    pub fn eval<D: Scalar>(&self, r: D) -> D {
        D::from(1.0) - smoothstep((r - self.inner) / (self.outer - self.inner))
    }

    /// `sup |s'| / (outer - inner)`.
    pub fn lipschitz(&self) -> f64 {
        1.875 / (self.outer - self.inner)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    /// `delta = delta_scale * eps^delta_exponent`.
    pub delta_exponent: f64,
    pub delta_scale: f64,
    /// Tube cut-off `psi` transitions over `[c delta / 2, c delta]`.
    pub c_small: f64,
    /// `chi_K` transitions over `[C delta, (C + 1) delta]`.
    pub c_big: f64,
    pub scheme: DerivScheme,
    /// Run the zero-free certification of the Gauss map on the grid box.
    pub certify: bool,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            delta_exponent: 15.0 / 16.0,
            delta_scale: 1.0,
            c_small: 0.5,
            c_big: 2.0,
            scheme: DerivScheme::Analytic,
            certify: true,
        }
    }
}

impl RecoveryOptions {
    pub fn delta(&self, epsilon: f64) -> f64 {
        self.delta_scale * epsilon.powf(self.delta_exponent)
    }
}

/// Unit field that is exactly radial in tubes around the current and equals the Gauss map
/// away from them.
#[derive(Clone, Debug)]
struct TubeRadial<'a> {
    field: &'a RecoveryField,
}

impl RecoveryField {
    /// `(nearest cell index, rho, chi_K)` at `x`.
    fn locate<D: Scalar>(&self, x: &[D; MAX_DIM]) -> Option<(usize, D, D)> {
        let xr = re_point(x);
        let n = self.current.n;
        let (i, _) = self.current.nearest_cell(&xr)?;
        let cell = self.current.all_cells().nth(i).expect("index from nearest_cell");
        let rho = cell.distance_generic(x, n);
        Some((i, rho, self.chi_k(x)))
    }

    fn chi_k<D: Scalar>(&self, x: &[D; MAX_DIM]) -> D {
        let n = self.current.n;
        let xr = re_point(x);
        let nearest = self.k_points.iter().min_by(|a, b| current::dist(a, &xr, n).total_cmp(&current::dist(b, &xr, n)));
        match nearest {
            Some(k) => D::from(1.0) - self.chi.eval(norm_diff(x, k, n)),
            None => D::from(1.0),
        }
    }

    /// Radial unit vector `R (x - foot)` of cell `i`, not normalized.
    fn radial<D: Scalar>(&self, i: usize, x: &[D; MAX_DIM]) -> [D; 3] {
        let n = self.current.n;
        let cell = self.current.all_cells().nth(i).expect("cell index");
        let foot = cell.foot(&re_point(x), n);
        self.frames[i].spec.frame.apply(x, &foot, n)
    }
}

impl VectorField for TubeRadial<'_> {
    fn dim(&self) -> usize {
        self.field.current.n
    }

    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> [D; 3] {
        let f = self.field;
        let v = f.gauss.unit(x);
        let Some((i, rho, chi)) = f.locate(x) else { return v };
        let lam = f.blend.eval(rho) * chi;
        if lam.re() == 0.0 {
            return v;
        }
        let y = f.radial(i, x);
        let yn = dot3(&y, &y).sqrt();
        let one = D::from(1.0);
        let w: [D; 3] = std::array::from_fn(|k| y[k] / yn * lam + v[k] * (one - lam));
        let wn = dot3(&w, &w).sqrt();
        [w[0] / wn, w[1] / wn, w[2] / wn]
    }
}

/// The recovery pair in closed form.
#[derive(Clone, Debug)]
pub struct RecoveryField {
    pub current: PolyCurrent,
    pub gauss: GaussMap,
    pub epsilon: f64,
    pub delta: f64,
    psi: CutoffProfile,
    blend: CutoffProfile,
    chi: CutoffProfile,
    /// One unit-sign BPS pair per cell, in the cell's oriented normal frame.
    frames: Vec<BpsField>,
    k_points: Vec<[f64; MAX_DIM]>,
}

/// Distance below which a point counts as lying on the current.
const ON_CURRENT: f64 = 1e-12;

impl RecoveryField {
    pub fn new(current: &PolyCurrent, epsilon: f64, opts: &RecoveryOptions) -> Result<Self> {
        current.validate()?;
        if !(epsilon > 0.0) {
            return Err(Error::Invalid("epsilon must be positive".into()));
        }
        if !(opts.c_small > 0.0 && opts.c_big > 0.0 && opts.delta_scale > 0.0 && opts.delta_exponent > 0.0) {
            return Err(Error::Invalid("recovery constants must be positive".into()));
        }
        let delta = opts.delta(epsilon);
        let tube = opts.c_small * delta;
        if tube < epsilon {
            return Err(Error::EpsilonTooLarge { eps: epsilon, tube });
        }
        let n = current.n;
        if n == 3 {
            let pts: Vec<_> = current.all_cells().map(|c| c.vertices[0]).collect();
            for (i, p) in pts.iter().enumerate() {
                for q in &pts[i + 1..] {
                    let sep = current::dist(p, q, 3);
                    if 4.0 * tube >= sep {
                        return Err(Error::Invalid(format!(
                            "tubes of radius {:.4} overlap: charges {sep:.4} apart",
                            2.0 * tube
                        )));
                    }
                }
            }
        }
        let frames = current
            .all_cells()
            .map(|c| {
                let spec = BpsSpec { dim: n, center: c.vertices[0], sign: 1, epsilon, frame: c.normal_frame(n) };
                spec.validate().map(|_| BpsField { spec })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RecoveryField {
            current: current.clone(),
            gauss: GaussMap::new(current)?,
            epsilon,
            delta,
            psi: CutoffProfile::new(tube / 2.0, tube)?,
            blend: CutoffProfile::new(tube, 2.0 * tube)?,
            chi: CutoffProfile::new(opts.c_big * delta, (opts.c_big + 1.0) * delta)?,
            frames,
            k_points: current.k_points(),
        })
    }

    /// Checks that the Gauss map points outward from every cell across the blending shell.
    fn check_blend(&self) -> Result<()> {
        let n = self.current.n;
        let tube = self.blend.inner;
        let dirs = fibonacci_sphere(64);
        for (i, cell) in self.current.all_cells().enumerate() {
            let fr = &self.frames[i].spec.frame;
            let bases: Vec<[f64; MAX_DIM]> = match cell.vertices.len() {
                1 => vec![cell.vertices[0]],
                _ => (1..4)
                    .map(|k| {
                        let s = k as f64 / 4.0;
                        std::array::from_fn(|a| cell.vertices[0][a] * (1.0 - s) + cell.vertices[1][a] * s)
                    })
                    .collect(),
            };
            for base in &bases {
                for &r in &[tube, 1.5 * tube, 2.0 * tube] {
                    for d in &dirs {
                        // Lift the normal direction through the orthonormal rows.
                        let mut x = *base;
                        for b in 0..n {
                            x[b] += r * (0..3).map(|k| fr.rows[k][b] * d[k]).sum::<f64>();
                        }
                        if self.chi_k(&x) == 0.0 {
                            continue;
                        }
                        let v = self.gauss.unit(&x);
                        if dot3(&v, d) < 0.1 {
                            return Err(Error::Numerical(format!(
                                "Gauss map is not outward at distance {r:.4} from cell {i}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn tube_radial(&self) -> TubeRadial<'_> {
        TubeRadial { field: self }
    }
}

fn fibonacci_sphere(m: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            [r * th.cos(), r * th.sin(), z]
        })
        .collect()
}

impl ClosedPair for RecoveryField {
    fn dim(&self) -> usize {
        self.current.n
    }

    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> ([D; 3], [[D; 3]; MAX_DIM]) {
        let n = self.current.n;
        let z = D::from(0.0);
        let mut conn = [[z; 3]; MAX_DIM];
        let Some((i, rho, chi)) = self.locate(x) else {
            let v = self.gauss.unit(x);
            return (v, conn);
        };
        let psi = self.psi.eval(rho);
        if psi.re() == 1.0 && chi.re() == 1.0 {
            return self.frames[i].eval(x);
        }
        if rho.re() < ON_CURRENT {
            return ([z; 3], conn);
        }
        let tv = self.tube_radial();
        let v = tv.eval(x);
        let s = rho / self.epsilon;
        let hh = profile_h(s);
        let phi = [v[0] * hh, v[1] * hh, v[2] * hh];
        if chi.re() == 0.0 {
            return (phi, conn);
        }
        let one = D::from(1.0);
        let gg = profile_g(s) / self.epsilon;
        let rows = &self.frames[i].spec.frame.rows;
        for (b, cb) in conn.iter_mut().enumerate().take(n) {
            let dv = vector_partial(&tv, x, b);
            let pure = cross3(&v, &dv);
            let mut tilde = [z; 3];
            if psi.re() > 0.0 {
                for (k, row) in rows.iter().enumerate() {
                    if row[b] != 0.0 {
                        let c = crate::bps::cross_basis(&v, k);
                        for m in 0..3 {
                            tilde[m] += c[m] * gg * row[b];
                        }
                    }
                }
            }
            for m in 0..3 {
                cb[m] = (tilde[m] * psi + pure[m] * (-0.5) * (one - psi)) * chi;
            }
        }
        (phi, conn)
    }
}

/// Builds and certifies the recovery field for `current` at scale `epsilon` on `grid`'s box.
pub fn recovery_field(current: &PolyCurrent, epsilon: f64, grid: &Grid, opts: &RecoveryOptions) -> Result<RecoveryField> {
    if grid.dim() != current.n {
        return Err(Error::InvalidGrid(format!("current is {}-dimensional, grid {}", current.n, grid.dim())));
    }
    let field = RecoveryField::new(current, epsilon, opts)?;
    if opts.certify && !current.is_empty() {
        field.gauss.certify(current, grid)?;
    }
    field.check_blend()?;
    Ok(field)
}

/// Samples the recovery pair of `current` at scale `epsilon` on `grid`.
pub fn recovery_pair(current: &PolyCurrent, epsilon: f64, grid: Grid, opts: &RecoveryOptions) -> Result<Pair> {
    let field = recovery_field(current, epsilon, &grid, opts)?;
    let pair = Pair::from_field(Arc::new(AutoDiff(field)), grid, epsilon, opts.scheme)?;
    let bad = pair.phi.components()[0].iter().filter(|v| !v.norm2().is_finite()).count()
        + pair.a.components().iter().flatten().filter(|v| !v.norm2().is_finite()).count();
    if bad > 0 {
        return Err(Error::Numerical(format!("recovery pair is not finite at {bad} samples")));
    }
    Ok(pair)
}

/// The modulus map of the eta-cap: identity up to `1 - eta`, one from `1 - eta^2` on, and a
/// monotone `C^1` bridge whose slope is kept close to `eta / (eta - eta^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaCap {
    pub eta: f64,
    t0: f64,
    t1: f64,
    ramp: f64,
    slope: f64,
}

impl EtaCap {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 0.5) {
            return Err(Error::Invalid(format!("eta must lie in (0, 1/2), got {eta}")));
        }
        let t0 = 1.0 - eta;
        let t1 = 1.0 - eta * eta;
        let len = t1 - t0;
        let ramp = len / 100.0;
        let slope = (eta - ramp / 2.0) / (len - ramp);
        Ok(EtaCap { eta, t0, t1, ramp, slope })
    }

    /// `m(t)`; the cap sends `Phi` to `m(|Phi|) Phi / |Phi|`.
    pub fn modulus(&self, t: f64) -> f64 {
        let EtaCap { t0, t1, ramp, slope, .. } = *self;
        if t <= t0 {
            return t;
        }
        if t >= t1 {
            return 1.0;
        }
        let up = |s: f64| s + (slope - 1.0) * s * s / (2.0 * ramp);
        if t <= t0 + ramp {
            return t0 + up(t - t0);
        }
        let flat_start = t0 + up(ramp);
        if t <= t1 - ramp {
            return flat_start + slope * (t - t0 - ramp);
        }
        let s = t1 - t;
        1.0 - slope * s * s / (2.0 * ramp)
    }

    /// `m'(t)`.
    pub fn slope(&self, t: f64) -> f64 {
        let EtaCap { t0, t1, ramp, slope, .. } = *self;
        if t <= t0 {
            1.0
        } else if t >= t1 {
            0.0
        } else if t <= t0 + ramp {
            1.0 + (slope - 1.0) * (t - t0) / ramp
        } else if t <= t1 - ramp {
            slope
        } else {
            slope * (t1 - t) / ramp
        }
    }

    /// `phi_eta(t) = m(t) / t`.
    pub fn factor(&self, t: f64) -> f64 {
        if t <= self.t0 {
            1.0
        } else {
            self.modulus(t) / t
        }
    }

    /// Lipschitz constant of `Phi -> m(|Phi|) Phi/|Phi|`.
    pub fn lipschitz(&self) -> f64 {
        self.slope.max(1.0 / self.t1)
    }

    pub fn apply(&self, v: ImQuaternion) -> ImQuaternion {
        v * self.factor(v.norm())
    }
}

/// `(phi_eta(|Phi|) Phi, A)`.
pub fn eta_cap(p: &Pair, eta: f64) -> Result<Pair> {
    let cap = EtaCap::new(eta)?;
    reshape_modulus(p, Arc::new(move |t| (cap.modulus(t), cap.slope(t))))
}

/// `int (1 - |Phi|)^2` with trapezoid weights.
pub fn modulus_defect(p: &Pair) -> f64 {
    let d: Vec<f64> = p.phi.components()[0].iter().map(|v| (1.0 - v.norm()).powi(2)).collect();
    crate::forms::integrate_density(p.grid(), &d)
}

/// `rho` sampled on a grid.
pub fn distance_form(p: &PolyCurrent, grid: Grid) -> Result<Form<f64>> {
    Form::from_fn(grid, 0, |x, _| distance_field(p, &x[..grid.dim()]))
}
