//! Yang-Mills-Higgs pairs, their energy and the concentration forms `Z`, `beta`, `omega`.

mod pair;
pub mod pointwise;
mod residual;
mod transform;

pub use pair::{AutoDiff, ClosedPair, Pair, PairField, PairJet};
pub use residual::{bogomolnyi_residual, el_residual, inequality_violations, theta_pairing, ElResidual, ThetaReport};
pub use transform::{
    cap_modulus, gauge_transform, gauge_transform_field, pure_gauge_pair, reshape_modulus, ClosedGauge, GaugeField,
    GaugeJet, GaugedField, ModulusProfile, PureGauge, RadialCap,
};
pub(crate) use transform::transform_samples;

use crate::error::{Error, Result};
use crate::forms::{basis, integrate_density, Form, Grid};
use crate::quat::ImQuaternion;
use serde::{Deserialize, Serialize};

/// Modulus below which `omega` is undefined.
pub const PHI_MIN: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total: f64,
    /// `eps^-1 int |d_A Phi|^2`
    pub dirichlet: f64,
    /// `eps int |F_A|^2`
    pub yang_mills: f64,
    #[serde(skip)]
    pub density: Vec<f64>,
}

impl EnergyReport {
    pub fn from_density(grid: &Grid, dirichlet_density: &[f64], ym_density: &[f64]) -> Self {
        let dirichlet = integrate_density(grid, dirichlet_density);
        let yang_mills = integrate_density(grid, ym_density);
        let density = dirichlet_density.iter().zip(ym_density).map(|(a, b)| a + b).collect();
        EnergyReport { total: dirichlet + yang_mills, dirichlet, yang_mills, density }
    }
}

/// `d_A Phi` as an `Im(H)`-valued 1-form.
pub fn cov_deriv(p: &Pair) -> Form<ImQuaternion> {
    let n = p.dim();
    let rows = p.map_jets(|_, j| pointwise::cov(j, n));
    let comps = (0..n).map(|a| rows.iter().map(|r| r[a]).collect()).collect();
    Form::from_components(*p.grid(), 1, comps).expect("shape of covariant derivative")
}

/// `F_A = dA + A ^ A` as an `Im(H)`-valued 2-form.
pub fn curvature(p: &Pair) -> Form<ImQuaternion> {
    let n = p.dim();
    let rows = p.map_jets(|_, j| pointwise::curvature(j, n));
    let nc = basis::count(n, 2);
    let comps = (0..nc).map(|c| rows.iter().map(|r| r[c].1).collect()).collect();
    Form::from_components(*p.grid(), 2, comps).expect("shape of curvature")
}

/// Energy densities `eps^-1 |d_A Phi|^2` and `eps |F|^2` at every node.
pub fn energy_densities(p: &Pair) -> (Vec<f64>, Vec<f64>) {
    let n = p.dim();
    let e = p.epsilon;
    let rows = p.map_jets(|_, j| pointwise::norms(j, n));
    rows.into_iter().map(|(da, ff)| (da / e, ff * e)).unzip()
}

/// `E_eps(Phi, A) = int eps^-1 |d_A Phi|^2 + eps |F_A|^2`.
pub fn energy(p: &Pair) -> EnergyReport {
    let (dd, yy) = energy_densities(p);
    EnergyReport::from_density(p.grid(), &dd, &yy)
}

/// `Z = 2 Re(conj(d_A Phi) ^ F_A)` assembled with the forms calculus.
pub fn z_form(p: &Pair) -> Form<f64> {
    let alpha = cov_deriv(p).map(|v| v.conj());
    let f = curvature(p);
    let w: Form<crate::quat::Quaternion> = crate::forms::wedge(&alpha, &f).expect("1-form ^ 2-form fits");
    crate::forms::re_part(&w).scale(2.0)
}

/// `Z` computed pointwise from jets without intermediate forms.
pub fn z_density(p: &Pair) -> Form<f64> {
    let n = p.dim();
    let rows = p.map_jets(|_, j| pointwise::z(&pointwise::cov(j, n), &pointwise::curvature(j, n), n));
    let nc = basis::count(n, 3);
    let comps = (0..nc).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    Form::from_components(*p.grid(), 3, comps).expect("shape of Z")
}

/// `beta = Re(conj(Phi) F_A)`.
pub fn beta_form(p: &Pair) -> Form<f64> {
    let n = p.dim();
    let rows = p.map_jets(|_, j| pointwise::beta(j.phi, &pointwise::curvature(j, n)));
    let nc = basis::count(n, 2);
    let comps = (0..nc).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    Form::from_components(*p.grid(), 2, comps).expect("shape of beta")
}

/// The 2-form `omega`; fails where `|Phi| < PHI_MIN`.
pub fn omega_form(p: &Pair) -> Result<Form<f64>> {
    let small = p.phi.components()[0].iter().filter(|v| v.norm() < PHI_MIN).count();
    if small > 0 {
        return Err(Error::SmallHiggs { count: small, threshold: PHI_MIN });
    }
    let n = p.dim();
    let rows = p.map_jets(|_, j| pointwise::omega(j.phi, &pointwise::cov(j, n), &pointwise::curvature(j, n)));
    let nc = basis::count(n, 2);
    let comps = (0..nc).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    Form::from_components(*p.grid(), 2, comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::DerivScheme;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pair(seed: u64) -> Pair {
        let g = Grid::cube(3, 1.0, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<ImQuaternion> = (0..g.len())
            .map(|_| ImQuaternion::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let phi = Form::from_components(g, 0, vec![values]).unwrap();
        let a = Form::from_fn(g, 1, |_, _| ImQuaternion::new(0.3, -0.2, 0.1)).unwrap();
        Pair::from_samples(phi, a, 0.7, DerivScheme::Central2).unwrap()
    }

    #[test]
    fn z_pointwise_matches_forms_calculus() {
        let p = random_pair(3);
        let z1 = z_form(&p);
        let z2 = z_density(&p);
        for (a, b) in z1.components()[0].iter().zip(&z2.components()[0]) {
            assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn omega_rejects_vanishing_higgs() {
        let mut p = random_pair(4);
        p.phi.components_mut()[0][10] = ImQuaternion::ZERO;
        assert!(matches!(omega_form(&p), Err(Error::SmallHiggs { count: 1, .. })));
    }
}
