//! Quaternion arithmetic on `H = R + Im(H)`.
//!
//! `Im(H)` is identified with `su(2)`; the inner product is `<u, v> = Re(conj(u) v)`,
//! so the basis `i, j, k` is orthonormal and `uv = -u.v + u x v` for imaginary `u, v`.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Threshold below which `exp_im` switches to its Taylor series.
pub const EXP_SERIES_CUTOFF: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// A purely imaginary quaternion `x i + y j + z k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ImQuaternion {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm2(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn re(self) -> f64 {
        self.w
    }

    pub fn im(self) -> ImQuaternion {
        ImQuaternion::new(self.x, self.y, self.z)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// Multiplicative inverse `conj(q) / |q|^2`.
    pub fn inverse(self) -> Self {
        let n2 = self.norm2();
        let c = self.conj();
        Self::new(c.w / n2, c.x / n2, c.y / n2, c.z / n2)
    }
}

impl ImQuaternion {
    pub const ZERO: ImQuaternion = ImQuaternion { x: 0.0, y: 0.0, z: 0.0 };
    pub const I: ImQuaternion = ImQuaternion { x: 1.0, y: 0.0, z: 0.0 };
    pub const J: ImQuaternion = ImQuaternion { x: 0.0, y: 1.0, z: 0.0 };
    pub const K: ImQuaternion = ImQuaternion { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn basis(i: usize) -> Self {
        match i {
            0 => Self::I,
            1 => Self::J,
            2 => Self::K,
            _ => panic!("imaginary basis index {i} out of range"),
        }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    /// `conj(u) = -u` for imaginary quaternions.
    pub fn conj(self) -> Self {
        -self
    }

    pub fn to_quaternion(self) -> Quaternion {
        Quaternion::new(0.0, self.x, self.y, self.z)
    }
}

impl From<ImQuaternion> for Quaternion {
    fn from(u: ImQuaternion) -> Self {
        u.to_quaternion()
    }
}

/// Hamilton product.
pub fn qmul(p: Quaternion, q: Quaternion) -> Quaternion {
    Quaternion::new(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )
}

/// Commutator `[u, v] = uv - vu = 2 u x v` on `Im(H)`.
pub fn bracket(u: ImQuaternion, v: ImQuaternion) -> ImQuaternion {
    let c = u.cross(v);
    ImQuaternion::new(2.0 * c.x, 2.0 * c.y, 2.0 * c.z)
}

/// `<u, v> = Re(conj(u) v)`.
pub fn inner(u: Quaternion, v: Quaternion) -> f64 {
    qmul(u.conj(), v).w
}

/// Exponential map `Im(H) -> S^3`.
pub fn exp_im(u: ImQuaternion) -> Quaternion {
    let t2 = u.norm2();
    let (c, s) = if t2.sqrt() < EXP_SERIES_CUTOFF {
        (1.0 - t2 / 2.0 + t2 * t2 / 24.0, 1.0 - t2 / 6.0 + t2 * t2 / 120.0)
    } else {
        let t = t2.sqrt();
        (t.cos(), t.sin() / t)
    };
    Quaternion::new(c, s * u.x, s * u.y, s * u.z)
}

/// Rotation `v -> q v conj(q)` for unit `q`, as an imaginary quaternion.
pub fn conjugate_by(q: Quaternion, v: ImQuaternion) -> ImQuaternion {
    qmul(qmul(q, v.into()), q.conj()).im()
}

macro_rules! linear_ops {
    ($t:ident { $($f:ident),* }) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t { $t { $($f: self.$f + o.$f),* } }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t { $t { $($f: self.$f - o.$f),* } }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t { $t { $($f: -self.$f),* } }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t { $t { $($f: self.$f * s),* } }
        }
        impl Mul<$t> for f64 {
            type Output = $t;
            fn mul(self, v: $t) -> $t { v * self }
        }
        impl AddAssign for $t {
            fn add_assign(&mut self, o: $t) { $(self.$f += o.$f;)* }
        }
        impl SubAssign for $t {
            fn sub_assign(&mut self, o: $t) { $(self.$f -= o.$f;)* }
        }
    };
}

linear_ops!(Quaternion { w, x, y, z });
linear_ops!(ImQuaternion { x, y, z });

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        qmul(self, o)
    }
}

impl Mul for ImQuaternion {
    type Output = Quaternion;
    fn mul(self, o: ImQuaternion) -> Quaternion {
        let c = self.cross(o);
        Quaternion::new(-self.dot(o), c.x, c.y, c.z)
    }
}

impl Mul<ImQuaternion> for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: ImQuaternion) -> Quaternion {
        qmul(self, o.into())
    }
}

impl Mul<Quaternion> for ImQuaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        qmul(self.into(), o)
    }
}

impl Add<ImQuaternion> for Quaternion {
    type Output = Quaternion;
    fn add(self, o: ImQuaternion) -> Quaternion {
        Quaternion::new(self.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Quaternion, b: Quaternion) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn basis_relations() {
        let (i, j, k) = (ImQuaternion::I, ImQuaternion::J, ImQuaternion::K);
        assert!(close(i * j, k.into()));
        assert!(close(j * k, i.into()));
        assert!(close(k * i, j.into()));
        assert!(close(i * i, Quaternion::new(-1.0, 0.0, 0.0, 0.0)));
        assert_eq!(bracket(i, j), ImQuaternion::new(0.0, 0.0, 2.0));
    }

    #[test]
    fn exp_im_small_and_large() {
        let tiny = ImQuaternion::new(1e-6, 0.0, 0.0);
        let e = exp_im(tiny);
        assert!((e.w - 1e-6f64.cos()).abs() < 1e-16 && (e.x - 1e-6f64.sin()).abs() < 1e-21);
        let u = ImQuaternion::new(0.0, 0.0, std::f64::consts::FRAC_PI_2);
        assert!(close(exp_im(u), Quaternion::new(0.0, 0.0, 0.0, 1.0)));
        // continuity across the series cutoff
        let a = exp_im(ImQuaternion::new(EXP_SERIES_CUTOFF * (1.0 - 1e-9), 0.0, 0.0));
        let b = exp_im(ImQuaternion::new(EXP_SERIES_CUTOFF * (1.0 + 1e-9), 0.0, 0.0));
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn inner_matches_euclidean() {
        let p = Quaternion::new(1.0, -2.0, 0.5, 3.0);
        let q = Quaternion::new(0.3, 0.1, -1.0, 2.0);
        let e = p.w * q.w + p.x * q.x + p.y * q.y + p.z * q.z;
        assert!((inner(p, q) - e).abs() < 1e-14);
    }
}
