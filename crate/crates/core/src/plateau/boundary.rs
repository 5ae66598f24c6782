use super::lattice::{offset, LatticeState};
use crate::bps::{bps_pair, BpsSpec};
use crate::error::{Error, Result};
use crate::fields::exp_im_generic;
use crate::forms::{partial_at, DerivScheme, Grid, MAX_DIM};
use crate::gauge::{transform_samples, AutoDiff, Pair, PairField};
use crate::quat::{exp_im, ImQuaternion, Quaternion};
use crate::recovery::{recovery_field, smoothstep, PolyCurrent, RecoveryOptions};
use num_dual::Dual64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Dirichlet data on the faces of the grid box: `Phi` and the tangential part of `A`.
///
/// Values and mask are stored in the packed node layout of [`LatticeState`]; entries outside
/// the mask are ignored.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

/// A face of the grid box: the normal axis and which end of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub axis: usize,
    pub high: bool,
}

impl BoundaryData {
    /// Constrained degrees of freedom: `Phi` on boundary nodes, `A_a` on edges lying in a face
    /// whose normal is not `a`, and the unused edge slots at the end of each axis.
    pub fn mask_for(grid: &Grid) -> Vec<bool> {
        let n = grid.dim();
        let mut mask = vec![false; grid.len() * LatticeState::stride(n)];
        for i in 0..grid.len() {
            let m = grid.multi(i);
            let on = |b: usize| m[b] == 0 || m[b] + 1 == grid.nodes()[b];
            if !(0..n).any(on) {
                continue;
            }
            for k in 0..3 {
                mask[offset(n, i, 0, k)] = true;
            }
            for a in 0..n {
                if m[a] + 1 == grid.nodes()[a] || (0..n).any(|b| b != a && on(b)) {
                    for k in 0..3 {
                        mask[offset(n, i, a + 1, k)] = true;
                    }
                }
            }
        }
        mask
    }

    /// Restriction of `p` to the boundary.
    pub fn from_pair(p: &Pair) -> Self {
        let st = LatticeState::from_pair(p);
        BoundaryData { grid: st.grid, mask: Self::mask_for(&st.grid), values: st.x }
    }

    /// `Phi = phi`, `A = 0` on every face.
    pub fn constant(grid: Grid, phi: ImQuaternion) -> Self {
        let n = grid.dim();
        let mut values = vec![0.0; grid.len() * LatticeState::stride(n)];
        for i in 0..grid.len() {
            values[offset(n, i, 0, 0)..offset(n, i, 0, 3)].copy_from_slice(&phi.to_array());
        }
        BoundaryData { grid, mask: Self::mask_for(&grid), values }
    }

    pub fn constrained(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Overwrites constrained entries of `x` with the boundary values.
    pub fn impose(&self, x: &mut [f64]) {
        for ((xi, &m), &v) in x.iter_mut().zip(&self.mask).zip(&self.values) {
            if m {
                *xi = v;
            }
        }
    }

    /// Zeroes constrained entries of a gradient.
    pub fn project(&self, g: &mut [f64]) {
        for (gi, &m) in g.iter_mut().zip(&self.mask) {
            if m {
                *gi = 0.0;
            }
        }
    }

    /// Largest `|Phi|` over boundary nodes.
    pub fn max_phi_modulus(&self) -> f64 {
        let n = self.grid.dim();
        (0..self.grid.len())
            .filter(|&i| self.grid.on_boundary(i))
            .map(|i| {
                let o = offset(n, i, 0, 0);
                (self.values[o].powi(2) + self.values[o + 1].powi(2) + self.values[o + 2].powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Tolerance for a point to count as lying on a face.
const FACE_TOL: f64 = 1e-9;

fn inside(grid: &Grid, x: &[f64; MAX_DIM], margin: f64) -> bool {
    (0..grid.dim()).all(|a| x[a] > grid.lo()[a] + margin && x[a] < grid.hi(a) - margin)
}

fn on_face(grid: &Grid, x: &[f64; MAX_DIM]) -> Option<usize> {
    let within = (0..grid.dim()).all(|a| x[a] >= grid.lo()[a] - FACE_TOL && x[a] <= grid.hi(a) + FACE_TOL);
    if !within {
        return None;
    }
    (0..grid.dim()).find(|&a| (x[a] - grid.lo()[a]).abs() <= FACE_TOL || (x[a] - grid.hi(a)).abs() <= FACE_TOL)
}

/// Checks that `P`'s fill-in lies in the box, meets the faces only at its ends and crosses
/// them transversally, while the closing cells stay outside.
fn check_transverse(p: &PolyCurrent, grid: &Grid) -> Result<()> {
    let n = grid.dim();
    let h = grid.h();
    for c in &p.cells {
        for v in &c.vertices {
            let ok = inside(grid, v, 0.0) || on_face(grid, v).is_some();
            if !ok {
                return Err(Error::NonTransverse);
            }
        }
        if c.vertices.len() == 2 {
            let (a, b) = (c.vertices[0], c.vertices[1]);
            let len = (0..n).map(|k| (b[k] - a[k]).powi(2)).sum::<f64>().sqrt();
            for v in [a, b] {
                if let Some(axis) = on_face(grid, &v) {
                    if ((b[axis] - a[axis]) / len).abs() < 1e-3 {
                        return Err(Error::NonTransverse);
                    }
                }
            }
        }
    }
    for c in &p.boundary {
        let (a, b) = (c.vertices[0], *c.vertices.last().unwrap_or(&c.vertices[0]));
        for s in 0..=64 {
            let t = s as f64 / 64.0;
            let x: [f64; MAX_DIM] = std::array::from_fn(|k| a[k] + t * (b[k] - a[k]));
            if inside(grid, &x, 0.5 * h) {
                return Err(Error::NonTransverse);
            }
        }
    }
    Ok(())
}

/// Boundary data sampled from the recovery pair of the fill-in `P` on the faces of `grid`,
/// with `A` taken at edge midpoints.
pub fn boundary_data_from_recovery(p: &PolyCurrent, epsilon: f64, grid: Grid, opts: &RecoveryOptions) -> Result<BoundaryData> {
    if p.is_empty() {
        return Ok(BoundaryData::constant(grid, ImQuaternion::new(1.0, 0.0, 0.0)));
    }
    if p.n != grid.dim() {
        return Err(Error::InvalidGrid(format!("current is {}-dimensional, grid {}", p.n, grid.dim())));
    }
    check_transverse(p, &grid)?;
    let field = AutoDiff(recovery_field(p, epsilon, &grid, opts)?);
    let n = grid.dim();
    let s = LatticeState::stride(n);
    let mask = BoundaryData::mask_for(&grid);
    let rows: Vec<(usize, Vec<f64>)> = (0..grid.len())
        .into_par_iter()
        .filter(|&i| grid.on_boundary(i))
        .map(|i| {
            let x = grid.point(i);
            let mut row = field.value(&x).0.to_array().to_vec();
            for a in 0..n {
                if grid.multi(i)[a] + 1 < grid.nodes()[a] {
                    let mut mid = x;
                    mid[a] += 0.5 * grid.h();
                    row.extend_from_slice(&field.value(&mid).1[a].to_array());
                } else {
                    row.extend_from_slice(&[0.0; 3]);
                }
            }
            (i, row)
        })
        .collect();
    let mut values = vec![0.0; grid.len() * s];
    for (i, row) in rows {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("recovery boundary data is not finite at node {i}")));
        }
        values[i * s..(i + 1) * s].copy_from_slice(&row);
    }
    Ok(BoundaryData { grid, values, mask })
}

/// Translation-invariant reduction: the BPS pair of the given sign centered at `center`,
/// restricted to the faces of a 3D box.
pub fn reduction_boundary_data(epsilon: f64, grid: Grid, center: &[f64], sign: i8) -> Result<(BoundaryData, Pair)> {
    if grid.dim() != 3 {
        return Err(Error::InvalidGrid("the reduction lives on a 3D grid".into()));
    }
    let pair = bps_pair(&BpsSpec::new(3, center, sign, epsilon)?, grid, DerivScheme::Analytic)?;
    Ok((BoundaryData::from_pair(&pair), pair))
}

/// `chi(t) = t (1 - s(t / collar))`: vanishes on the face, unit normal slope there, zero beyond the collar.
fn collar_profile(t: Dual64, collar: f64) -> Dual64 {
    t * (Dual64::from(1.0) - smoothstep(t / collar))
}

/// Gauge `g = exp(chi(t) phi(P x))` with `phi = -<A, nu>` on `face`, `nu` the outer normal and
/// `t` the distance to the face; afterwards `A(nu) = 0` on the face. Nodes farther than
/// `collar` from the face are unchanged.
pub fn normal_gauge(p: &Pair, face: Face, collar: f64) -> Result<Pair> {
    let g = *p.grid();
    let n = g.dim();
    if face.axis >= n {
        return Err(Error::Invalid(format!("face axis {} out of range", face.axis)));
    }
    if !(collar > 0.0) {
        return Err(Error::Invalid("collar width must be positive".into()));
    }
    let ax = face.axis;
    let end = if face.high { g.nodes()[ax] - 1 } else { 0 };
    let nu = if face.high { 1.0 } else { -1.0 };
    let project = |i: usize| {
        let mut m = g.multi(i);
        m[ax] = end;
        g.index(&m[..n])
    };
    let phi_face: Vec<ImQuaternion> = (0..g.len()).map(|i| p.a_at(project(i), ax) * (-nu)).collect();
    let scheme = p.fd_scheme();
    let dt = -nu;
    let jets: Vec<(Quaternion, [Quaternion; MAX_DIM])> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let x = g.coord(ax, g.multi(i)[ax]);
            let t = if face.high { g.hi(ax) - x } else { x - g.lo()[ax] };
            let mut ds = [Quaternion::default(); MAX_DIM];
            if t >= collar {
                return (exp_im(ImQuaternion::ZERO), ds);
            }
            let chi = collar_profile(Dual64::new(t, 1.0), collar);
            let ph = phi_face[i].to_array();
            let s = exp_im(phi_face[i] * chi.re);
            for (b, dsb) in ds.iter_mut().enumerate().take(n) {
                let du: [f64; 3] = if b == ax {
                    ph.map(|v| chi.eps * dt * v)
                } else {
                    partial_at(&g, &phi_face, i, b, scheme).to_array().map(|v| chi.re * v)
                };
                let u: [Dual64; 3] = std::array::from_fn(|k| Dual64::new(chi.re * ph[k], du[k]));
                let e = exp_im_generic(&u);
                *dsb = Quaternion::from_array(e.map(|v| v.eps));
            }
            (s, ds)
        })
        .collect();
    let s: Vec<Quaternion> = jets.iter().map(|j| j.0).collect();
    let ds: Vec<Vec<Quaternion>> = (0..n).map(|b| jets.iter().map(|j| j.1[b]).collect()).collect();
    transform_samples(p, &s, &ds)
}
