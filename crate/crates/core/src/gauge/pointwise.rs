//! Pointwise algebra on jets: covariant derivative, curvature and the forms built from them.

use super::PairJet;
use crate::forms::{basis, Mask, MAX_DIM};
use crate::quat::{bracket, ImQuaternion};

/// Components of the covariant derivative `d_A Phi = d Phi + [A, Phi]`.
pub fn cov(jet: &PairJet, n: usize) -> [ImQuaternion; MAX_DIM] {
    let mut out = [ImQuaternion::ZERO; MAX_DIM];
    for a in 0..n {
        out[a] = jet.dphi[a] + bracket(jet.a[a], jet.phi);
    }
    out
}

/// `F_ab = d_a A_b - d_b A_a + [A_a, A_b]` for the masks of `basis(n, 2)`.
pub fn curvature(jet: &PairJet, n: usize) -> Vec<(Mask, ImQuaternion)> {
    basis::basis(n, 2)
        .into_iter()
        .map(|m| {
            let mut it = basis::indices(m);
            let (a, b) = (it.next().unwrap(), it.next().unwrap());
            (m, jet.da[a][b] - jet.da[b][a] + bracket(jet.a[a], jet.a[b]))
        })
        .collect()
}

fn two_form_entry(f: &[(Mask, ImQuaternion)], a: usize, b: usize) -> ImQuaternion {
    let m: Mask = (1 << a) | (1 << b);
    let v = f.iter().find(|(k, _)| *k == m).map(|(_, v)| *v).unwrap_or_default();
    if a < b {
        v
    } else {
        -v
    }
}

/// `Z = 2 Re(conj(d_A Phi) ^ F)` on `basis(n, 3)`.
pub fn z(alpha: &[ImQuaternion; MAX_DIM], f: &[(Mask, ImQuaternion)], n: usize) -> Vec<f64> {
    basis::basis(n, 3)
        .into_iter()
        .map(|m| {
            let idx: Vec<usize> = basis::indices(m).collect();
            let (a, b, c) = (idx[0], idx[1], idx[2]);
            2.0 * (alpha[a].dot(two_form_entry(f, b, c)) - alpha[b].dot(two_form_entry(f, a, c))
                + alpha[c].dot(two_form_entry(f, a, b)))
        })
        .collect()
}

/// `beta = Re(conj(Phi) F)` on `basis(n, 2)`.
pub fn beta(phi: ImQuaternion, f: &[(Mask, ImQuaternion)]) -> Vec<f64> {
    f.iter().map(|(_, v)| phi.dot(*v)).collect()
}

/// `omega = |Phi|^-1 (2 beta - |Phi|^-2 Re(conj(Phi) d_A Phi ^ d_A Phi) / 2)` on `basis(n, 2)`.
pub fn omega(phi: ImQuaternion, alpha: &[ImQuaternion; MAX_DIM], f: &[(Mask, ImQuaternion)]) -> Vec<f64> {
    let m2 = phi.norm2();
    let m = m2.sqrt();
    f.iter()
        .map(|(mask, v)| {
            let mut it = basis::indices(*mask);
            let (a, b) = (it.next().unwrap(), it.next().unwrap());
            (2.0 * phi.dot(*v) - phi.dot(alpha[a].cross(alpha[b])) / m2) / m
        })
        .collect()
}

/// `(|d_A Phi|^2, |F|^2)` at a jet.
pub fn norms(jet: &PairJet, n: usize) -> (f64, f64) {
    let alpha = cov(jet, n);
    let da: f64 = alpha[..n].iter().map(|v| v.norm2()).sum();
    let ff: f64 = curvature(jet, n).iter().map(|(_, v)| v.norm2()).sum();
    (da, ff)
}
