use crate::error::{Error, Result};
use crate::forms::{partial_at, DerivScheme, Form, Grid, MAX_DIM};
use crate::quat::ImQuaternion;
use crate::Scalar;
use num_dual::Dual64;
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

/// First-order jet of a pair at a point.
///
/// `da[p][b]` is `d_p A_b`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairJet {
    pub phi: ImQuaternion,
    pub dphi: [ImQuaternion; MAX_DIM],
    pub a: [ImQuaternion; MAX_DIM],
    pub da: [[ImQuaternion; MAX_DIM]; MAX_DIM],
}

/// A pair given in closed form, able to report exact first derivatives anywhere.
pub trait PairField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64; MAX_DIM]) -> (ImQuaternion, [ImQuaternion; MAX_DIM]);
    fn jet(&self, x: &[f64; MAX_DIM]) -> PairJet;
}

/// A pair written once over generic scalars; [`AutoDiff`] turns it into a [`PairField`].
pub trait ClosedPair: Send + Sync {
    fn dim(&self) -> usize;
    /// `(Phi, [A_0, .., A_{n-1}])` at `x` as real triples.
    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> ([D; 3], [[D; 3]; MAX_DIM]);
}

/// Forward-mode differentiation wrapper for closed-form pairs.
#[derive(Clone, Debug)]
pub struct AutoDiff<T>(pub T);

pub(crate) fn im_of<D: Scalar>(v: &[D; 3]) -> ImQuaternion {
    ImQuaternion::new(v[0].re(), v[1].re(), v[2].re())
}

impl<T: ClosedPair> PairField for AutoDiff<T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn value(&self, x: &[f64; MAX_DIM]) -> (ImQuaternion, [ImQuaternion; MAX_DIM]) {
        let (phi, a) = self.0.eval(x);
        let mut out = [ImQuaternion::ZERO; MAX_DIM];
        for b in 0..self.0.dim() {
            out[b] = ImQuaternion::from_array(a[b]);
        }
        (ImQuaternion::from_array(phi), out)
    }

    fn jet(&self, x: &[f64; MAX_DIM]) -> PairJet {
        let n = self.0.dim();
        let mut jet = PairJet::default();
        for p in 0..n {
            let mut xd = [Dual64::from(0.0); MAX_DIM];
            for c in 0..MAX_DIM {
                xd[c] = Dual64::new(x[c], if c == p { 1.0 } else { 0.0 });
            }
            let (phi, a) = self.0.eval(&xd);
            if p == 0 {
                jet.phi = im_of(&phi);
                for b in 0..n {
                    jet.a[b] = im_of(&a[b]);
                }
            }
            jet.dphi[p] = ImQuaternion::new(phi[0].eps, phi[1].eps, phi[2].eps);
            for b in 0..n {
                jet.da[p][b] = ImQuaternion::new(a[b][0].eps, a[b][1].eps, a[b][2].eps);
            }
        }
        jet
    }
}

/// A configuration `(Phi, A)` at coupling `epsilon` on a grid.
#[derive(Clone)]
pub struct Pair {
    pub phi: Form<ImQuaternion>,
    pub a: Form<ImQuaternion>,
    pub epsilon: f64,
    pub scheme: DerivScheme,
    field: Option<Arc<dyn PairField>>,
}

impl fmt::Debug for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pair")
            .field("grid", self.phi.grid())
            .field("epsilon", &self.epsilon)
            .field("scheme", &self.scheme)
            .field("analytic", &self.field.is_some())
            .finish()
    }
}

impl Pair {
    /// Pair from sampled node data.
    pub fn from_samples(phi: Form<ImQuaternion>, a: Form<ImQuaternion>, epsilon: f64, scheme: DerivScheme) -> Result<Self> {
        if phi.degree() != 0 {
            return Err(Error::WrongDegree { expected: 0, got: phi.degree() });
        }
        if a.degree() != 1 {
            return Err(Error::WrongDegree { expected: 1, got: a.degree() });
        }
        phi.grid().check_same(a.grid())?;
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Pair { phi: phi.drop_source(), a: a.drop_source(), epsilon, scheme, field: None })
    }

    /// Samples a closed-form pair on `grid`, keeping the field for exact derivatives.
    pub fn from_field(field: Arc<dyn PairField>, grid: Grid, epsilon: f64, scheme: DerivScheme) -> Result<Self> {
        if field.dim() != grid.dim() {
            return Err(Error::InvalidGrid(format!(
                "field lives in R^{} but grid in R^{}",
                field.dim(),
                grid.dim()
            )));
        }
        let n = grid.dim();
        let samples: Vec<(ImQuaternion, [ImQuaternion; MAX_DIM])> =
            (0..grid.len()).into_par_iter().map(|node| field.value(&grid.point(node))).collect();
        let phi = samples.iter().map(|s| s.0).collect();
        let a = (0..n).map(|b| samples.iter().map(|s| s.1[b]).collect()).collect();
        drop(samples);
        let mut p = Pair::from_samples(
            Form::from_components(grid, 0, vec![phi])?,
            Form::from_components(grid, 1, a)?,
            epsilon,
            scheme,
        )?;
        p.field = Some(field);
        Ok(p)
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    pub fn field(&self) -> Option<&Arc<dyn PairField>> {
        self.field.as_ref()
    }

    pub fn is_analytic(&self) -> bool {
        self.scheme == DerivScheme::Analytic && self.field.is_some()
    }

    /// Finite-difference scheme used when derivatives come from samples.
    pub fn fd_scheme(&self) -> DerivScheme {
        match self.scheme {
            DerivScheme::Analytic => DerivScheme::Central2,
            s => s,
        }
    }

    /// Same samples with a different scheme (the closed form, if any, is kept).
    pub fn with_scheme(&self, scheme: DerivScheme) -> Pair {
        let mut p = self.clone();
        p.scheme = scheme;
        p
    }

    /// Drops the closed form so only samples remain.
    pub fn sampled_only(&self) -> Pair {
        let mut p = self.clone();
        p.field = None;
        p
    }

    pub fn phi_at(&self, node: usize) -> ImQuaternion {
        self.phi.components()[0][node]
    }

    pub fn a_at(&self, node: usize, axis: usize) -> ImQuaternion {
        self.a.components()[axis][node]
    }

    /// Jet at a node: exact for analytic pairs, stencil-based otherwise.
    pub fn jet(&self, node: usize) -> PairJet {
        let g = self.grid();
        if self.is_analytic() {
            return self.field.as_ref().expect("analytic pair has a field").jet(&g.point(node));
        }
        let n = g.dim();
        let s = self.fd_scheme();
        let mut jet = PairJet { phi: self.phi_at(node), ..Default::default() };
        let phi = &self.phi.components()[0];
        for p in 0..n {
            jet.a[p] = self.a_at(node, p);
            jet.dphi[p] = partial_at(g, phi, node, p, s);
            for b in 0..n {
                jet.da[p][b] = partial_at(g, &self.a.components()[b], node, p, s);
            }
        }
        jet
    }

    /// Evaluates `f` on the jet of every node, in node order.
    pub fn map_jets<T: Send>(&self, f: impl Fn(usize, &PairJet) -> T + Sync + Send) -> Vec<T> {
        (0..self.grid().len()).into_par_iter().map(|node| f(node, &self.jet(node))).collect()
    }
}
