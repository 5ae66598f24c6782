use super::pair::{AutoDiff, ClosedPair, Pair, PairField, PairJet};
use crate::error::{Error, Result};
use crate::fields::{cross3, vector_partial, CovectorField, VectorField};
use crate::forms::{d, DerivScheme, Form, Grid, MAX_DIM};
use crate::quat::{conjugate_by, qmul, ImQuaternion, Quaternion};
use crate::Scalar;
use num_dual::{Dual, Dual64};
use rayon::prelude::*;
use std::sync::Arc;

/// Tolerance on `| |sigma| - 1 |` for gauge fields.
pub const UNIT_TOL: f64 = 1e-10;

/// Second-order jet of a gauge field; `dds[a][b] = d_a d_b sigma`.
#[derive(Clone, Copy, Debug, Default)]
pub struct GaugeJet {
    pub s: Quaternion,
    pub ds: [Quaternion; MAX_DIM],
    pub dds: [[Quaternion; MAX_DIM]; MAX_DIM],
}

/// A unit-quaternion gauge field in closed form.
pub trait GaugeField: Send + Sync {
    fn dim(&self) -> usize;
    fn jet2(&self, x: &[f64; MAX_DIM]) -> GaugeJet;
}

/// Gauge field written over generic scalars; [`AutoDiff`] supplies its jets.
pub trait ClosedGauge: Send + Sync {
    fn dim(&self) -> usize;
    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> [D; 4];
}

impl<T: ClosedGauge> GaugeField for AutoDiff<T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn jet2(&self, x: &[f64; MAX_DIM]) -> GaugeJet {
        let n = self.0.dim();
        let q = |v: [f64; 4]| Quaternion::from_array(v);
        let mut jet = GaugeJet { s: q(self.0.eval(x)), ..Default::default() };
        for a in 0..n {
            for b in a..n {
                let mut xd = [Dual::new(Dual64::from(0.0), Dual64::from(0.0)); MAX_DIM];
                for c in 0..MAX_DIM {
                    let inner = Dual64::new(x[c], if c == b { 1.0 } else { 0.0 });
                    xd[c] = Dual::new(inner, Dual64::from(if c == a { 1.0 } else { 0.0 }));
                }
                let v = self.0.eval(&xd);
                let dd = q([v[0].eps.eps, v[1].eps.eps, v[2].eps.eps, v[3].eps.eps]);
                jet.dds[a][b] = dd;
                jet.dds[b][a] = dd;
                if a == b {
                    jet.ds[a] = q([v[0].eps.re, v[1].eps.re, v[2].eps.re, v[3].eps.re]);
                }
            }
        }
        jet
    }
}

/// The transformed pair `(sigma Phi sigma^-1, -(d sigma) sigma^-1 + sigma A sigma^-1)` in closed form.
pub struct GaugedField {
    pub inner: Arc<dyn PairField>,
    pub gauge: Arc<dyn GaugeField>,
}

fn im(q: Quaternion) -> ImQuaternion {
    q.im()
}

impl PairField for GaugedField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64; MAX_DIM]) -> (ImQuaternion, [ImQuaternion; MAX_DIM]) {
        let j = self.jet(x);
        (j.phi, j.a)
    }

    fn jet(&self, x: &[f64; MAX_DIM]) -> PairJet {
        let n = self.dim();
        let p = self.inner.jet(x);
        let g = self.gauge.jet2(x);
        let s = g.s;
        let sb = s.conj();
        let phi: Quaternion = p.phi.into();
        let mut out = PairJet { phi: conjugate_by(s, p.phi), ..Default::default() };
        for a in 0..n {
            let dsa = g.ds[a];
            let dsab = dsa.conj();
            out.dphi[a] = im(qmul(qmul(dsa, phi), sb) + qmul(qmul(s, p.dphi[a].into()), sb) + qmul(qmul(s, phi), dsab));
            let ab: Quaternion = p.a[a].into();
            out.a[a] = im(-qmul(dsa, sb) + qmul(qmul(s, ab), sb));
        }
        for pa in 0..n {
            let dp = g.ds[pa];
            let dpb = dp.conj();
            for b in 0..n {
                let ab: Quaternion = p.a[b].into();
                let dab: Quaternion = p.da[pa][b].into();
                let v = -qmul(g.dds[pa][b], sb) - qmul(g.ds[b], dpb)
                    + qmul(qmul(dp, ab), sb)
                    + qmul(qmul(s, dab), sb)
                    + qmul(qmul(s, ab), dpb);
                out.da[pa][b] = im(v);
            }
        }
        out
    }
}

fn check_unit(values: &[Quaternion]) -> Result<()> {
    let dev = values.iter().fold(0.0f64, |m, q| m.max((q.norm() - 1.0).abs()));
    if dev > UNIT_TOL {
        return Err(Error::NonUnitGauge(dev));
    }
    Ok(())
}

pub(crate) fn transform_samples(p: &Pair, s: &[Quaternion], ds: &[Vec<Quaternion>]) -> Result<Pair> {
    let g = *p.grid();
    let n = g.dim();
    let phi: Vec<ImQuaternion> = (0..g.len()).map(|i| conjugate_by(s[i], p.phi_at(i))).collect();
    let a: Vec<Vec<ImQuaternion>> = (0..n)
        .map(|b| {
            (0..g.len())
                .map(|i| {
                    let sb = s[i].conj();
                    im(-qmul(ds[b][i], sb) + qmul(qmul(s[i], p.a_at(i, b).into()), sb))
                })
                .collect()
        })
        .collect();
    Pair::from_samples(Form::from_components(g, 0, vec![phi])?, Form::from_components(g, 1, a)?, p.epsilon, p.scheme)
}

/// Gauge transform by sampled `sigma`; `d sigma` is exact when `sigma` carries a closed-form source.
pub fn gauge_transform(p: &Pair, sigma: &Form<Quaternion>) -> Result<Pair> {
    if sigma.degree() != 0 {
        return Err(Error::WrongDegree { expected: 0, got: sigma.degree() });
    }
    p.grid().check_same(sigma.grid())?;
    check_unit(&sigma.components()[0])?;
    let scheme = if sigma.source().is_some() { DerivScheme::Analytic } else { p.fd_scheme() };
    let ds = d(sigma, scheme)?;
    transform_samples(p, &sigma.components()[0], ds.components())
}

/// Gauge transform by a closed-form gauge; stays analytic when `p` is.
pub fn gauge_transform_field(p: &Pair, gauge: Arc<dyn GaugeField>) -> Result<Pair> {
    let g: Grid = *p.grid();
    let jets: Vec<GaugeJet> = (0..g.len()).into_par_iter().map(|i| gauge.jet2(&g.point(i))).collect();
    let s: Vec<Quaternion> = jets.iter().map(|j| j.s).collect();
    check_unit(&s)?;
    if let Some(inner) = p.field() {
        let field = Arc::new(GaugedField { inner: inner.clone(), gauge });
        return Pair::from_field(field, g, p.epsilon, p.scheme);
    }
    let ds: Vec<Vec<Quaternion>> = (0..g.dim()).map(|a| jets.iter().map(|j| j.ds[a]).collect()).collect();
    transform_samples(p, &s, &ds)
}

/// Pure-gauge pair `A = -1/2 Phi dPhi + Phi alpha` for unit `Phi` and real `alpha`, in closed form.
pub struct PureGauge<P, Q> {
    pub phi: P,
    pub alpha: Q,
}

impl<P: VectorField, Q: CovectorField> ClosedPair for PureGauge<P, Q> {
    fn dim(&self) -> usize {
        self.phi.dim()
    }

    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> ([D; 3], [[D; 3]; MAX_DIM]) {
        let phi = self.phi.eval(x);
        let alpha = self.alpha.eval(x);
        let zero = D::from(0.0);
        let mut a = [[zero; 3]; MAX_DIM];
        for b in 0..self.dim() {
            let dphi = vector_partial(&self.phi, x, b);
            let c = cross3(&phi, &dphi);
            for k in 0..3 {
                a[b][k] = c[k] * (-0.5) + phi[k] * alpha[b];
            }
        }
        (phi, a)
    }
}

/// Pure-gauge pair from sampled unit `Phi` and real 1-form `alpha`; `dPhi` uses the given scheme.
pub fn pure_gauge_pair(phi_unit: &Form<ImQuaternion>, alpha: &Form<f64>, epsilon: f64, scheme: DerivScheme) -> Result<Pair> {
    if phi_unit.degree() != 0 {
        return Err(Error::WrongDegree { expected: 0, got: phi_unit.degree() });
    }
    if alpha.degree() != 1 {
        return Err(Error::WrongDegree { expected: 1, got: alpha.degree() });
    }
    phi_unit.grid().check_same(alpha.grid())?;
    let dev = phi_unit.components()[0].iter().fold(0.0f64, |m, v| m.max((v.norm() - 1.0).abs()));
    if dev > 1e-8 {
        return Err(Error::Invalid(format!("Phi is not unit (max deviation {dev:e})")));
    }
    let g = *phi_unit.grid();
    let dphi = d(phi_unit, scheme)?;
    let phi = &phi_unit.components()[0];
    let a: Vec<Vec<ImQuaternion>> = (0..g.dim())
        .map(|b| {
            (0..g.len())
                .map(|i| {
                    let c = phi[i].cross(dphi.components()[b][i]);
                    c * (-0.5) + phi[i] * alpha.components()[b][i]
                })
                .collect()
        })
        .collect();
    Pair::from_samples(phi_unit.clone(), Form::from_components(g, 1, a)?, epsilon, scheme)
}

/// Profile `t -> (m(t), m'(t))` of a radial reshaping of `Phi`.
pub type ModulusProfile = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// `Phi -> m(|Phi|) Phi / |Phi|` applied to a closed-form pair, `A` untouched. `m` must be the
/// identity near zero.
pub struct RadialCap {
    pub inner: Arc<dyn PairField>,
    pub profile: ModulusProfile,
}

impl RadialCap {
    fn factor(&self, t: f64) -> (f64, f64) {
        if t == 0.0 {
            return (1.0, 0.0);
        }
        let (m, dm) = (self.profile)(t);
        (m / t, (dm * t - m) / (t * t))
    }
}

impl PairField for RadialCap {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64; MAX_DIM]) -> (ImQuaternion, [ImQuaternion; MAX_DIM]) {
        let (phi, a) = self.inner.value(x);
        (phi * self.factor(phi.norm()).0, a)
    }

    fn jet(&self, x: &[f64; MAX_DIM]) -> PairJet {
        let mut j = self.inner.jet(x);
        let t = j.phi.norm();
        let (g, dg) = self.factor(t);
        if t > 0.0 {
            for p in 0..self.dim() {
                let dt = j.phi.dot(j.dphi[p]) / t;
                j.dphi[p] = j.dphi[p] * g + j.phi * (dg * dt);
            }
        }
        j.phi = j.phi * g;
        j
    }
}

/// Applies a radial reshaping, keeping closed forms closed.
pub fn reshape_modulus(p: &Pair, profile: ModulusProfile) -> Result<Pair> {
    match p.field() {
        Some(field) => {
            let cap = RadialCap { inner: field.clone(), profile };
            Pair::from_field(Arc::new(cap), *p.grid(), p.epsilon, p.scheme)
        }
        None => {
            let phi = p.phi.map(|v| {
                let t = v.norm();
                if t == 0.0 {
                    v
                } else {
                    v * (profile(t).0 / t)
                }
            });
            Pair::from_samples(phi, p.a.clone(), p.epsilon, p.scheme)
        }
    }
}

/// Radially caps the Higgs field at modulus one; the connection is untouched.
pub fn cap_modulus(p: &Pair) -> Pair {
    let profile: ModulusProfile = Arc::new(|t: f64| if t > 1.0 { (1.0, 0.0) } else { (t, 1.0) });
    reshape_modulus(p, profile).expect("capping keeps the pair's shape")
}
