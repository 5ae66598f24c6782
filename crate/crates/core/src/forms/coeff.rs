use crate::quat::{ImQuaternion, Quaternion};
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Value type of a form's coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueKind {
    Real,
    Imaginary,
    Quaternion,
}

impl ValueKind {
    pub fn width(self) -> usize {
        match self {
            ValueKind::Real => 1,
            ValueKind::Imaginary => 3,
            ValueKind::Quaternion => 4,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            ValueKind::Real => 0,
            ValueKind::Imaginary => 1,
            ValueKind::Quaternion => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(ValueKind::Real),
            1 => Some(ValueKind::Imaginary),
            2 => Some(ValueKind::Quaternion),
            _ => None,
        }
    }

    pub fn part_names(self) -> &'static [&'static str] {
        match self {
            ValueKind::Real => &["re"],
            ValueKind::Imaginary => &["i", "j", "k"],
            ValueKind::Quaternion => &["1", "i", "j", "k"],
        }
    }
}

pub trait Coeff:
    Copy
    + Default
    + Send
    + Sync
    + std::fmt::Debug
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + SubAssign
{
    const KIND: ValueKind;
    fn norm2(self) -> f64;
    fn real(self) -> f64;
    /// Real components; the first `KIND.width()` entries are meaningful.
    fn parts(self) -> [f64; 4];
    fn from_parts(p: &[f64]) -> Self;
}

impl Coeff for f64 {
    const KIND: ValueKind = ValueKind::Real;
    fn norm2(self) -> f64 {
        self * self
    }
    fn real(self) -> f64 {
        self
    }
    fn parts(self) -> [f64; 4] {
        [self, 0.0, 0.0, 0.0]
    }
    fn from_parts(p: &[f64]) -> Self {
        p[0]
    }
}

impl Coeff for ImQuaternion {
    const KIND: ValueKind = ValueKind::Imaginary;
    fn norm2(self) -> f64 {
        ImQuaternion::norm2(self)
    }
    fn real(self) -> f64 {
        0.0
    }
    fn parts(self) -> [f64; 4] {
        [self.x, self.y, self.z, 0.0]
    }
    fn from_parts(p: &[f64]) -> Self {
        ImQuaternion::new(p[0], p[1], p[2])
    }
}

impl Coeff for Quaternion {
    const KIND: ValueKind = ValueKind::Quaternion;
    fn norm2(self) -> f64 {
        Quaternion::norm2(self)
    }
    fn real(self) -> f64 {
        self.w
    }
    fn parts(self) -> [f64; 4] {
        self.to_array()
    }
    fn from_parts(p: &[f64]) -> Self {
        Quaternion::new(p[0], p[1], p[2], p[3])
    }
}
