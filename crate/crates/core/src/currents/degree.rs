use crate::error::{Error, Result};
use crate::gauge::{pointwise, PairField};
use crate::quat::ImQuaternion;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Lower bound on `|Phi|` for the degree to be meaningful.
pub const MIN_MODULUS: f64 = 0.75;
/// Largest accepted distance of the raw degree from an integer.
pub const ROUNDING_TOL: f64 = 0.2;

/// A closed oriented triangulated surface in `R^3`; triangles are counter-clockwise seen
/// from outside.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TriSurface {
    pub points: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

fn normalize(p: [f64; 3]) -> [f64; 3] {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / r, p[1] / r, p[2] / r]
}

impl TriSurface {
    /// Geodesic sphere: an icosahedron refined `level` times and projected.
    pub fn sphere(center: [f64; 3], radius: f64, level: usize) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let raw = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ];
        let tris = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        let mut s = TriSurface { points: raw.iter().map(|p| normalize(*p)).collect(), triangles: tris };
        for _ in 0..level {
            s = s.refined();
            for p in s.points.iter_mut() {
                *p = normalize(*p);
            }
        }
        for p in s.points.iter_mut() {
            *p = [center[0] + radius * p[0], center[1] + radius * p[1], center[2] + radius * p[2]];
        }
        s
    }

    /// Splits every triangle into four at edge midpoints.
    pub fn refined(&self) -> Self {
        let mut points = self.points.clone();
        let mut mids = std::collections::HashMap::new();
        let mut mid = |a: usize, b: usize, points: &mut Vec<[f64; 3]>| {
            let key = (a.min(b), a.max(b));
            *mids.entry(key).or_insert_with(|| {
                let (p, q) = (points[a], points[b]);
                points.push([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]);
                points.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(self.triangles.len() * 4);
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut points);
            let bc = mid(b, c, &mut points);
            let ca = mid(c, a, &mut points);
            triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        TriSurface { points, triangles }
    }

    pub fn map_points(&self, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        TriSurface { points: self.points.iter().map(|p| f(*p)).collect(), triangles: self.triangles.clone() }
    }

    /// `int_S w` for a 2-form given by its `(01, 02, 12)` components, with the centroid rule.
    pub fn integrate_2form(&self, w: impl Fn([f64; 3]) -> [f64; 3]) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                let (p, q, r) = (self.points[a], self.points[b], self.points[c]);
                let u = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
                let v = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
                let cen = [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0, (p[2] + q[2] + r[2]) / 3.0];
                let c = w(cen);
                let area = |i: usize, j: usize| u[i] * v[j] - u[j] * v[i];
                0.5 * (c[0] * area(0, 1) + c[1] * area(0, 2) + c[2] * area(1, 2))
            })
            .sum()
    }
}

/// Signed solid angle of the spherical triangle with unit vertices `a`, `b`, `c`.
pub fn solid_angle(a: ImQuaternion, b: ImQuaternion, c: ImQuaternion) -> f64 {
    let num = a.dot(b.cross(c));
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub degree: i32,
    /// Sum of signed image areas over `4 pi`, before rounding.
    pub raw: f64,
    pub residual: f64,
    pub min_modulus: f64,
}

/// Degree of `Phi / |Phi|` on `surface` from samples at its points.
pub fn degree(values: &[ImQuaternion], surface: &TriSurface) -> Result<DegreeReport> {
    if values.len() != surface.points.len() {
        return Err(Error::Invalid(format!("{} samples for {} surface points", values.len(), surface.points.len())));
    }
    let min_modulus = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if !(min_modulus >= MIN_MODULUS) {
        return Err(Error::LowModulus(min_modulus));
    }
    let unit: Vec<ImQuaternion> = values.iter().map(|v| *v * (1.0 / v.norm())).collect();
    let total: f64 = surface.triangles.iter().map(|&[a, b, c]| solid_angle(unit[a], unit[b], unit[c])).sum();
    let raw = total / (4.0 * PI);
    let degree = raw.round();
    let residual = (raw - degree).abs();
    if residual > ROUNDING_TOL {
        return Err(Error::DegreeIllDefined(residual));
    }
    Ok(DegreeReport { degree: degree as i32, raw, residual, min_modulus })
}

/// `(1 / 4 pi) int_S omega` for a closed-form pair; `omega` is evaluated from exact jets.
pub fn omega_flux(field: &dyn PairField, surface: &TriSurface) -> f64 {
    let total = surface.integrate_2form(|x| {
        let j = field.jet(&[x[0], x[1], x[2], 0.0]);
        let w = pointwise::omega(j.phi, &pointwise::cov(&j, 3), &pointwise::curvature(&j, 3));
        [w[0], w[1], w[2]]
    });
    total / (4.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(s: &TriSurface, f: impl Fn([f64; 3]) -> [f64; 3]) -> Vec<ImQuaternion> {
        s.points.iter().map(|p| ImQuaternion::from_array(f(*p))).collect()
    }

    #[test]
    fn identity_antipodal_and_constant() {
        let s = TriSurface::sphere([0.0; 3], 1.0, 2);
        assert_eq!(degree(&sample(&s, |p| p), &s).unwrap().degree, 1);
        assert_eq!(degree(&sample(&s, |p| [-p[0], -p[1], -p[2]]), &s).unwrap().degree, -1);
        assert_eq!(degree(&sample(&s, |_| [0.0, 0.0, 1.0]), &s).unwrap().degree, 0);
    }

    #[test]
    fn sphere_area_and_flux() {
        let s = TriSurface::sphere([0.3, 0.0, -0.2], 2.0, 4);
        // Flux of the area form of the unit sphere scaled: w = x dy^dz / r^3 style check via Gauss.
        let c = [0.3, 0.0, -0.2];
        let flux = s.integrate_2form(|p| {
            let y = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
            let r3 = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).powf(1.5);
            [y[2] / r3, -y[1] / r3, y[0] / r3]
        });
        assert!((flux - 4.0 * PI).abs() < 1e-2, "{flux}");
    }

    #[test]
    fn low_modulus_is_rejected() {
        let s = TriSurface::sphere([0.0; 3], 1.0, 1);
        let v = sample(&s, |p| [0.5 * p[0], 0.5 * p[1], 0.5 * p[2]]);
        assert!(matches!(degree(&v, &s), Err(Error::LowModulus(_))));
    }
}
