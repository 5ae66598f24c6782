use super::current::{dist, PolyCurrent};
use crate::error::{Error, Result};
use crate::fields::{dot3, VectorField};
use crate::forms::{Grid, MAX_DIM};
use crate::Scalar;
use num_dual::Dual64;
use serde::{Deserialize, Serialize};

/// Source of the Gauss map: point charges in `R^3` or current segments in `R^4`.
#[derive(Clone, Debug)]
pub enum GaussSource {
    Coulomb(Vec<([f64; MAX_DIM], f64)>),
    BiotSavart(Vec<([f64; MAX_DIM], [f64; MAX_DIM], f64)>),
}

/// `v = E/|E|` for the Coulomb field of the charges, or the self-dual part of the
/// Biot-Savart 2-form of the circuit.
#[derive(Clone, Debug)]
pub struct GaussMap {
    pub n: usize,
    pub source: GaussSource,
}

/// Outcome of the zero-free certification pass.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub samples: usize,
    /// Smallest `|E| / (|dE| s)` over certified samples, `s` the sample half-diagonal.
    pub min_margin: f64,
    /// Largest sampled `rho |dv|`.
    pub dv_constant: f64,
}

/// `F(u) = u / (2 d^2 (d^2 + u^2)) + atan(u/d) / (2 d^3)`, an antiderivative of `(d^2 + u^2)^-2`.
fn segment_kernel<D: Scalar>(d2: D, u0: D, u1: D) -> D {
    let d = d2.sqrt();
    let rational = u0 / ((d2 + u0 * u0) * d2 * 2.0) - u1 / ((d2 + u1 * u1) * d2 * 2.0);
    let angle = if (u0 * u1).re() > 0.0 {
        (d * (u0 - u1) / (d2 + u0 * u1)).atan()
    } else {
        (u0 / d).atan() - (u1 / d).atan()
    };
    rational + angle / (d2 * d * 2.0)
}

impl GaussMap {
    pub fn new(p: &PolyCurrent) -> Result<Self> {
        p.validate()?;
        let source = if p.n == 3 {
            GaussSource::Coulomb(p.all_cells().map(|c| (c.vertices[0], f64::from(c.mult))).collect())
        } else {
            GaussSource::BiotSavart(p.all_cells().map(|c| (c.vertices[0], c.vertices[1], f64::from(c.mult))).collect())
        };
        Ok(GaussMap { n: p.n, source })
    }

    fn is_trivial(&self) -> bool {
        match &self.source {
            GaussSource::Coulomb(c) => c.is_empty(),
            GaussSource::BiotSavart(s) => s.is_empty(),
        }
    }

    /// The unnormalized field, as an `Im(H)` triple.
    pub fn field<D: Scalar>(&self, x: &[D; MAX_DIM]) -> [D; 3] {
        let z = D::from(0.0);
        let mut e = [z; 3];
        if self.is_trivial() {
            e[0] = D::from(1.0);
            return e;
        }
        match &self.source {
            GaussSource::Coulomb(charges) => {
                for (p, q) in charges {
                    let y = [x[0] - p[0], x[1] - p[1], x[2] - p[2]];
                    let r2 = dot3(&y, &y);
                    let w = (r2 * r2.sqrt()).recip() * *q;
                    for k in 0..3 {
                        e[k] += y[k] * w;
                    }
                }
            }
            GaussSource::BiotSavart(segs) => {
                for (p, q, m) in segs {
                    let l = dist(p, q, 4);
                    let t: [f64; 4] = std::array::from_fn(|a| (q[a] - p[a]) / l);
                    let y: [D; 4] = std::array::from_fn(|a| x[a] - p[a]);
                    let mut along = z;
                    for a in 0..4 {
                        along += y[a] * t[a];
                    }
                    let mut d2 = z;
                    for a in 0..4 {
                        let c = y[a] - along * t[a];
                        d2 += c * c;
                    }
                    let j = segment_kernel(d2, along, along - l) * *m;
                    let b = |i: usize, k: usize| y[i] * t[k] - y[k] * t[i];
                    e[0] += (b(0, 3) + b(1, 2)) * j;
                    e[1] += (b(1, 3) - b(0, 2)) * j;
                    e[2] += (b(2, 3) + b(0, 1)) * j;
                }
            }
        }
        e
    }

    pub fn unit<D: Scalar>(&self, x: &[D; MAX_DIM]) -> [D; 3] {
        let e = self.field(x);
        let r = dot3(&e, &e).sqrt();
        [e[0] / r, e[1] / r, e[2] / r]
    }

    /// Field value and its Jacobian `J[a] = d_a E` at `x`.
    fn field_jacobian(&self, x: &[f64; MAX_DIM]) -> ([f64; 3], [[f64; 3]; MAX_DIM]) {
        let mut jac = [[0.0; 3]; MAX_DIM];
        let mut val = [0.0; 3];
        for a in 0..self.n {
            let xd: [Dual64; MAX_DIM] = std::array::from_fn(|c| Dual64::new(x[c], if c == a { 1.0 } else { 0.0 }));
            let e = self.field(&xd);
            val = [e[0].re, e[1].re, e[2].re];
            jac[a] = [e[0].eps, e[1].eps, e[2].eps];
        }
        (val, jac)
    }

    /// Samples the grid box on a lattice and rejects the map if the field may vanish away
    /// from the current. A sample box passes when the value dominates the gradient times the
    /// box half-diagonal; failing boxes are subdivided a few times before giving up.
    pub fn certify(&self, p: &PolyCurrent, grid: &Grid) -> Result<Certificate> {
        let n = self.n;
        let per_axis: usize = if n == 3 { 40 } else { 16 };
        let steps: Vec<f64> = (0..n).map(|a| (grid.hi(a) - grid.lo()[a]) / per_axis as f64).collect();
        let mut cert = Certificate { samples: 0, min_margin: f64::INFINITY, dv_constant: 0.0 };
        for idx in 0..per_axis.pow(n as u32) {
            let mut x = [0.0; MAX_DIM];
            let mut rem = idx;
            for a in 0..n {
                x[a] = grid.lo()[a] + steps[a] * ((rem % per_axis) as f64 + 0.5);
                rem /= per_axis;
            }
            let half: [f64; MAX_DIM] = std::array::from_fn(|a| if a < n { steps[a] / 2.0 } else { 0.0 });
            self.certify_box(p, &x, &half, 0, &mut cert)?;
        }
        Ok(cert)
    }

    fn certify_box(
        &self,
        p: &PolyCurrent,
        x: &[f64; MAX_DIM],
        half: &[f64; MAX_DIM],
        depth: usize,
        cert: &mut Certificate,
    ) -> Result<()> {
        const MAX_DEPTH: usize = 5;
        let n = self.n;
        let diag = half.iter().map(|s| s * s).sum::<f64>().sqrt();
        let rho = super::current::distance_field(p, &x[..n]);
        if rho <= 3.0 * diag {
            // The current itself lies in this box; near it the field is dominated by the cell.
            return if depth < MAX_DEPTH { self.split(p, x, half, depth, cert) } else { Ok(()) };
        }
        let (e, jac) = self.field_jacobian(x);
        let emag = dot3(&e, &e).sqrt();
        let jnorm = jac.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        let margin = emag / (jnorm * diag);
        cert.samples += 1;
        if !(margin > 1.0) {
            if depth < MAX_DEPTH {
                return self.split(p, x, half, depth, cert);
            }
            return Err(Error::SingularSetInDomain(x[..n].to_vec()));
        }
        cert.min_margin = cert.min_margin.min(margin);
        // |dv| for v = E/|E| is the tangential part of dE over |E|.
        let mut dv2 = 0.0;
        for row in jac.iter().take(n) {
            let radial = dot3(row, &e) / (emag * emag);
            for k in 0..3 {
                let t = (row[k] - radial * e[k]) / emag;
                dv2 += t * t;
            }
        }
        cert.dv_constant = cert.dv_constant.max(rho * dv2.sqrt());
        Ok(())
    }

    fn split(
        &self,
        p: &PolyCurrent,
        x: &[f64; MAX_DIM],
        half: &[f64; MAX_DIM],
        depth: usize,
        cert: &mut Certificate,
    ) -> Result<()> {
        let n = self.n;
        let h2: [f64; MAX_DIM] = std::array::from_fn(|a| half[a] / 2.0);
        for corner in 0..(1usize << n) {
            let c: [f64; MAX_DIM] =
                std::array::from_fn(|a| if a < n { x[a] + if corner >> a & 1 == 1 { h2[a] } else { -h2[a] } } else { 0.0 });
            self.certify_box(p, &c, &h2, depth + 1, cert)?;
        }
        Ok(())
    }
}

impl VectorField for GaussMap {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> [D; 3] {
        self.unit(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recovery::Cell;

    #[test]
    fn straight_segment_field_is_radial_in_the_normal_frame() {
        let p = PolyCurrent {
            n: 4,
            cells: vec![Cell::segment(&[0.0, 0.0, 0.0, -50.0], &[0.0, 0.0, 0.0, 50.0], 1)],
            boundary: vec![
                Cell::segment(&[0.0, 0.0, 0.0, 50.0], &[1e4, 0.0, 0.0, 50.0], 1),
                Cell::segment(&[1e4, 0.0, 0.0, 50.0], &[1e4, 0.0, 0.0, -50.0], 1),
                Cell::segment(&[1e4, 0.0, 0.0, -50.0], &[0.0, 0.0, 0.0, -50.0], 1),
            ],
            skeleton: vec![],
        };
        let g = GaussMap::new(&p).unwrap();
        let v = g.unit(&[0.01, -0.02, 0.015, 0.3]);
        let y = [0.01f64, -0.02, 0.015];
        let r = dot3(&y, &y).sqrt();
        for k in 0..3 {
            assert!((v[k] - y[k] / r).abs() < 1e-3, "{v:?}");
        }
    }

    #[test]
    fn kernel_matches_quadrature() {
        let (d2, u0, u1) = (0.09f64, 2.0, 0.7);
        let n = 20000;
        let h = (u0 - u1) / n as f64;
        let q: f64 = (0..n).map(|i| 1.0 / (d2 + (u1 + (i as f64 + 0.5) * h).powi(2)).powi(2) * h).sum();
        assert!((segment_kernel(d2, u0, u1) - q).abs() < 1e-6 * q);
    }
}
