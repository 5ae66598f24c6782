use super::{cov_deriv, curvature, energy, pointwise, z_form, Pair};
use crate::error::{Error, Result};
use crate::forms::{basis, d, integrate, norm2_pointwise, star, wedge, DerivScheme, Form};
use crate::quat::{bracket, ImQuaternion};
use serde::{Deserialize, Serialize};

/// `d_A w = dw + [A ^ w]` for an `Im(H)`-valued form `w`.
pub fn cov_ext(a: &Form<ImQuaternion>, w: &Form<ImQuaternion>, scheme: DerivScheme) -> Result<Form<ImQuaternion>> {
    let mut out = d(w, scheme)?;
    let n = w.grid().dim();
    let masks = w.masks();
    let len = w.grid().len();
    for (ci, &m) in masks.iter().enumerate() {
        for ax in 0..n {
            if m & (1 << ax) != 0 {
                continue;
            }
            let target = basis::position(n, m | (1 << ax));
            let sign = basis::insert_sign(ax, m);
            let (aa, ww) = (&a.components()[ax], &w.components()[ci]);
            let comp = &mut out.components_mut()[target];
            for node in 0..len {
                comp[node] += bracket(aa[node], ww[node]) * sign;
            }
        }
    }
    Ok(out)
}

/// `d_A^* w = (-1)^{n(k+1)+1} * d_A * w`.
pub fn cov_codiff(a: &Form<ImQuaternion>, w: &Form<ImQuaternion>, scheme: DerivScheme) -> Result<Form<ImQuaternion>> {
    let n = w.grid().dim();
    let k = w.degree();
    let sign = if (n * (k + 1) + 1) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(star(&cov_ext(a, &star(w), scheme)?).scale(sign))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElResidual {
    /// `|| d_A^* d_A Phi ||_{L^2}` over interior nodes.
    pub higgs: f64,
    /// `|| eps^2 d_A^* F + [Phi, d_A Phi] ||_{L^2}` over interior nodes.
    pub yang_mills: f64,
    /// `|| d_A Phi ||_{L^2}` over the same nodes, for scale.
    pub scale: f64,
}

fn interior_l2(form: &Form<ImQuaternion>, depth: usize) -> f64 {
    let g = form.grid();
    let n2 = norm2_pointwise(form);
    let w = g.h().powi(g.dim() as i32);
    (0..g.len()).filter(|&i| g.is_interior(i, depth)).map(|i| w * n2[i]).sum::<f64>().sqrt()
}

/// Euler-Lagrange residuals of `E_eps`; the outer derivatives are finite differences.
pub fn el_residual(p: &Pair) -> Result<ElResidual> {
    let outer = match p.scheme {
        DerivScheme::Analytic => DerivScheme::Central4,
        s => s,
    };
    let alpha = cov_deriv(p);
    let f = curvature(p);
    let higgs = cov_codiff(&p.a, &alpha, outer)?;
    let mut ym = cov_codiff(&p.a, &f, outer)?.scale(p.epsilon * p.epsilon);
    let phi = &p.phi.components()[0];
    for (ax, comp) in ym.components_mut().iter_mut().enumerate() {
        for (node, v) in comp.iter_mut().enumerate() {
            *v += bracket(phi[node], alpha.components()[ax][node]);
        }
    }
    Ok(ElResidual { higgs: interior_l2(&higgs, 2), yang_mills: interior_l2(&ym, 2), scale: interior_l2(&alpha, 2) })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThetaReport {
    /// `int Z ^ Theta`
    pub pairing: f64,
    /// `2 eps^-1 int |d_A Phi|^2`
    pub dirichlet_twice: f64,
    pub energy: f64,
    /// `|| *(d_A Phi) - eps F ^ Theta ||_{L^2}`
    pub residual: f64,
}

impl ThetaReport {
    pub fn relative_gap(&self) -> f64 {
        (self.pairing - self.dirichlet_twice).abs() / self.energy
    }
}

/// Calibration pairing against a closed `(n-3)`-form `Theta`.
pub fn theta_pairing(p: &Pair, theta: &Form<f64>) -> Result<ThetaReport> {
    let n = p.dim();
    if theta.degree() + 3 != n {
        return Err(Error::WrongDegree { expected: n - 3, got: theta.degree() });
    }
    p.grid().check_same(theta.grid())?;
    let pairing = integrate(&wedge::<f64, f64, f64>(&z_form(p), theta)?)?;
    let e = energy(p);
    let alpha = cov_deriv(p);
    let lhs = star(&alpha);
    let rhs: Form<ImQuaternion> = wedge(&curvature(p), theta)?;
    let diff = lhs.sub(&rhs.scale(p.epsilon))?;
    let res2 = crate::forms::integrate_density(p.grid(), &norm2_pointwise(&diff));
    Ok(ThetaReport { pairing, dirichlet_twice: 2.0 * e.dirichlet, energy: e.total, residual: res2.sqrt() })
}
/// `max |*(d_A Phi) - s eps F_A|` over nodes at least `depth` layers inside an `R^3` grid.
pub fn bogomolnyi_residual(p: &Pair, sign: f64, depth: usize) -> Result<f64> {
    if p.dim() != 3 {
        return Err(Error::Invalid("the Bogomolnyi equation is three-dimensional".into()));
    }
    let lhs = star(&cov_deriv(p));
    let diff = lhs.sub(&curvature(p).scale(sign * p.epsilon))?;
    let g = p.grid();
    let n2 = norm2_pointwise(&diff);
    Ok((0..g.len()).filter(|&i| g.is_interior(i, depth)).map(|i| n2[i].sqrt()).fold(0.0, f64::max))
}

/// Nodes where `|Z| <= 2 |d_A Phi| |F_A| <= eps^-1 |d_A Phi|^2 + eps |F_A|^2` fails beyond
/// relative round-off.
pub fn inequality_violations(p: &Pair) -> usize {
    let n = p.dim();
    let eps = p.epsilon;
    p.map_jets(|_, j| {
        let alpha = pointwise::cov(j, n);
        let f = pointwise::curvature(j, n);
        let z = pointwise::z(&alpha, &f, n).iter().map(|v| v * v).sum::<f64>().sqrt();
        let da = alpha[..n].iter().map(|v| v.norm2()).sum::<f64>().sqrt();
        let ff = f.iter().map(|(_, v)| v.norm2()).sum::<f64>().sqrt();
        let mid = 2.0 * da * ff;
        let top = da * da / eps + eps * ff * ff;
        let tol = 1e-12 * top.max(f64::MIN_POSITIVE);
        usize::from(z > mid + tol || mid > top + tol)
    })
    .into_iter()
    .sum()
}

