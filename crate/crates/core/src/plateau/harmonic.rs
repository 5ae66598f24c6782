use super::lattice::{energy_and_gradient, offset, pack_edges, LatticeState, Terms};
use crate::error::{Error, Result};
use crate::forms::{partial, Form};
use crate::gauge::{cov_deriv, Pair};
use crate::quat::ImQuaternion;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgOptions {
    /// Relative residual `|r| / |b|` at which the solve stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions { tolerance: 1e-12, max_iterations: 20_000 }
    }
}

#[derive(Clone, Debug)]
pub struct HarmonicSection {
    pub phi: Form<ImQuaternion>,
    pub residual: f64,
    pub iterations: usize,
    pub max_interior: f64,
    pub max_boundary: f64,
}

/// Minimizer of the lattice `int |d_A Phi|^2` for fixed `A` with `Phi` prescribed on the
/// boundary nodes, by conjugate gradients on the free values.
pub fn harmonic_section(a: &Form<ImQuaternion>, boundary: &Form<ImQuaternion>, opts: &CgOptions) -> Result<HarmonicSection> {
    if a.degree() != 1 || boundary.degree() != 0 {
        return Err(Error::Invalid("need a 1-form connection and 0-form boundary values".into()));
    }
    a.grid().check_same(boundary.grid())?;
    if !(opts.tolerance > 0.0) || opts.max_iterations == 0 {
        return Err(Error::Invalid("solver tolerance and cap must be positive".into()));
    }
    let g = *a.grid();
    let n = g.dim();
    let len = g.len();
    let bdry: Vec<bool> = (0..len).map(|i| g.on_boundary(i)).collect();
    let mut x = vec![0.0; len * LatticeState::stride(n)];
    pack_edges(&g, a.components(), &mut x);
    let set_phi = |x: &mut [f64], v: &[f64]| {
        for i in 0..len {
            x[offset(n, i, 0, 0)..offset(n, i, 0, 3)].copy_from_slice(&v[3 * i..3 * i + 3]);
        }
    };
    let phi_grad = |x: &[f64]| -> Vec<f64> {
        let (_, gr) = energy_and_gradient(&g, x, 1.0, Terms::Dirichlet);
        let mut out = vec![0.0; 3 * len];
        for i in 0..len {
            if !bdry[i] {
                out[3 * i..3 * i + 3].copy_from_slice(&gr[offset(n, i, 0, 0)..offset(n, i, 0, 3)]);
            }
        }
        out
    };
    let mut work = x.clone();
    let mut apply = |v: &[f64]| -> Vec<f64> {
        set_phi(&mut work, v);
        phi_grad(&work)
    };
    let mut bvals = vec![0.0; 3 * len];
    for i in 0..len {
        if bdry[i] {
            bvals[3 * i..3 * i + 3].copy_from_slice(&boundary.components()[0][i].to_array());
        }
    }
    let rhs: Vec<f64> = apply(&bvals).iter().map(|v| -v).collect();
    let dotv = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
    let bnorm = dotv(&rhs, &rhs).sqrt();
    let mut sol = vec![0.0; 3 * len];
    let mut r = rhs.clone();
    let mut d = r.clone();
    let mut rr = dotv(&r, &r);
    let mut iterations = 0;
    let mut residual = if bnorm > 0.0 { rr.sqrt() / bnorm } else { 0.0 };
    while residual > opts.tolerance {
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence { residual, iterations });
        }
        let kd = apply(&d);
        let dkd = dotv(&d, &kd);
        if !(dkd > 0.0) {
            return Err(Error::Numerical(format!("operator is not positive definite (d.Kd = {dkd:e})")));
        }
        let alpha = rr / dkd;
        for k in 0..sol.len() {
            sol[k] += alpha * d[k];
            r[k] -= alpha * kd[k];
        }
        let rr_new = dotv(&r, &r);
        for k in 0..d.len() {
            d[k] = r[k] + rr_new / rr * d[k];
        }
        rr = rr_new;
        iterations += 1;
        residual = rr.sqrt() / bnorm;
    }
    // Report the true residual of the returned solution.
    let full: Vec<f64> = sol.iter().zip(&bvals).map(|(s, b)| s + b).collect();
    let true_res = apply(&full);
    if bnorm > 0.0 {
        residual = dotv(&true_res, &true_res).sqrt() / bnorm;
    }
    let phi: Vec<ImQuaternion> = (0..len).map(|i| ImQuaternion::from_array([full[3 * i], full[3 * i + 1], full[3 * i + 2]])).collect();
    let max_boundary = (0..len).filter(|&i| bdry[i]).map(|i| phi[i].norm()).fold(0.0, f64::max);
    let max_interior = (0..len).filter(|&i| !bdry[i]).map(|i| phi[i].norm()).fold(0.0, f64::max);
    if max_interior > max_boundary + 1e-8 {
        return Err(Error::Numerical(format!(
            "maximum principle violated: interior {max_interior} > boundary {max_boundary}"
        )));
    }
    Ok(HarmonicSection { phi: Form::from_components(g, 0, vec![phi])?, residual, iterations, max_interior, max_boundary })
}

/// `int |d^*d (1 - |Phi|^2) - 2 |d_A Phi|^2|` over nodes at least `depth` layers inside,
/// with `d^*d = -Laplacian` by repeated finite differences.
pub fn pde_identity_residual(p: &Pair, depth: usize) -> f64 {
    let g = p.grid();
    let scheme = p.fd_scheme();
    let m2: Vec<f64> = p.phi.components()[0].iter().map(|v| v.norm2()).collect();
    let mut lap = vec![0.0; g.len()];
    for a in 0..g.dim() {
        let d1 = partial(g, &m2, a, scheme);
        let d2 = partial(g, &d1, a, scheme);
        lap.iter_mut().zip(&d2).for_each(|(l, v)| *l += v);
    }
    let da = cov_deriv(p);
    (0..g.len())
        .filter(|&i| g.is_interior(i, depth))
        .map(|i| {
            let dd: f64 = da.components().iter().map(|c| c[i].norm2()).sum();
            (lap[i] - 2.0 * dd).abs() * g.h().powi(g.dim() as i32)
        })
        .sum()
}
