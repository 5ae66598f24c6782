//! Discrete differential forms on uniform grids.
//!
//! A `k`-form stores one node-collocated array per multi-index `I`, in lexicographic
//! order. Coefficients are real, imaginary-quaternion or quaternion valued.

pub mod basis;
mod closed;
mod coeff;
mod grid;
pub mod io;

pub use basis::Mask;
pub use closed::{AutoDiffForm, ClosedForm};
pub use coeff::{Coeff, ValueKind};
pub use grid::{Grid, MAX_DIM};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Mul;
use std::sync::Arc;

/// How partial derivatives are taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DerivScheme {
    /// Exact derivatives of a registered closed-form source; sampled-only data falls back to `Central2`.
    #[default]
    Analytic,
    Central2,
    Central4,
}

impl std::str::FromStr for DerivScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "analytic" => Ok(DerivScheme::Analytic),
            "central2" => Ok(DerivScheme::Central2),
            "central4" => Ok(DerivScheme::Central4),
            _ => Err(Error::Invalid(format!("unknown derivative scheme '{s}'"))),
        }
    }
}

/// Closed-form coefficients of a form together with their first partial derivatives.
pub trait FormSource<V>: Send + Sync {
    /// Component values at `x`, one per multi-index.
    fn values(&self, x: &[f64; MAX_DIM], out: &mut [V]);
    /// `d/dx_axis` of every component at `x`.
    fn partials(&self, x: &[f64; MAX_DIM], axis: usize, out: &mut [V]);
}

#[derive(Clone)]
pub struct Form<V> {
    grid: Grid,
    degree: usize,
    comps: Vec<Vec<V>>,
    source: Option<Arc<dyn FormSource<V>>>,
}

impl<V: Coeff> fmt::Debug for Form<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Form")
            .field("grid", &self.grid)
            .field("degree", &self.degree)
            .field("kind", &V::KIND)
            .field("analytic", &self.source.is_some())
            .finish()
    }
}

impl<V: Coeff> Form<V> {
    pub fn zeros(grid: Grid, degree: usize) -> Result<Self> {
        if degree > grid.dim() {
            return Err(Error::DegreeOverflow(degree, grid.dim()));
        }
        let nc = basis::count(grid.dim(), degree);
        Ok(Form { grid, degree, comps: vec![vec![V::default(); grid.len()]; nc], source: None })
    }

    /// Samples `f(x, component)` at every node.
    pub fn from_fn(grid: Grid, degree: usize, f: impl Fn(&[f64; MAX_DIM], usize) -> V) -> Result<Self> {
        let mut form = Self::zeros(grid, degree)?;
        for (c, comp) in form.comps.iter_mut().enumerate() {
            for (node, v) in comp.iter_mut().enumerate() {
                *v = f(&grid.point(node), c);
            }
        }
        Ok(form)
    }

    /// Samples a closed-form source and keeps it for exact differentiation.
    pub fn from_source(grid: Grid, degree: usize, source: Arc<dyn FormSource<V>>) -> Result<Self> {
        let mut form = Self::zeros(grid, degree)?;
        let nc = form.comps.len();
        let mut buf = vec![V::default(); nc];
        for node in 0..grid.len() {
            source.values(&grid.point(node), &mut buf);
            for c in 0..nc {
                form.comps[c][node] = buf[c];
            }
        }
        form.source = Some(source);
        Ok(form)
    }

    pub fn from_components(grid: Grid, degree: usize, comps: Vec<Vec<V>>) -> Result<Self> {
        if degree > grid.dim() {
            return Err(Error::DegreeOverflow(degree, grid.dim()));
        }
        if comps.len() != basis::count(grid.dim(), degree) || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Invalid("component arrays do not match grid and degree".into()));
        }
        Ok(Form { grid, degree, comps, source: None })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn masks(&self) -> Vec<Mask> {
        basis::basis(self.grid.dim(), self.degree)
    }

    pub fn components(&self) -> &[Vec<V>] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Vec<V>] {
        self.source = None;
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<Vec<V>> {
        self.comps
    }

    pub fn component(&self, mask: Mask) -> &[V] {
        &self.comps[basis::position(self.grid.dim(), mask)]
    }

    pub fn source(&self) -> Option<&Arc<dyn FormSource<V>>> {
        self.source.as_ref()
    }

    pub fn drop_source(mut self) -> Self {
        self.source = None;
        self
    }

    /// Value of every component at one node.
    pub fn at(&self, node: usize) -> Vec<V> {
        self.comps.iter().map(|c| c[node]).collect()
    }

    pub fn map<W: Coeff>(&self, f: impl Fn(V) -> W) -> Form<W> {
        Form {
            grid: self.grid,
            degree: self.degree,
            comps: self.comps.iter().map(|c| c.iter().map(|&v| f(v)).collect()).collect(),
            source: None,
        }
    }

    pub fn zip_with(&self, other: &Form<V>, f: impl Fn(V, V) -> V) -> Result<Form<V>> {
        self.grid.check_same(&other.grid)?;
        if self.degree != other.degree {
            return Err(Error::WrongDegree { expected: self.degree, got: other.degree });
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        Ok(Form { grid: self.grid, degree: self.degree, comps, source: None })
    }

    pub fn add(&self, other: &Form<V>) -> Result<Form<V>> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Form<V>) -> Result<Form<V>> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Form<V> {
        self.map(|v| v * s)
    }

    pub fn max_abs(&self) -> f64 {
        norm2_pointwise(self).into_iter().fold(0.0, |m, v| m.max(v.sqrt()))
    }
}

/// Finite-difference stencil `(offset, coefficient)` for `d/dx` at index `i` of `m` nodes, before dividing by `h`.
pub(crate) fn stencil(scheme: DerivScheme, i: usize, m: usize) -> &'static [(isize, f64)] {
    const C2_LEFT: [(isize, f64); 3] = [(0, -1.5), (1, 2.0), (2, -0.5)];
    const C2_MID: [(isize, f64); 2] = [(-1, -0.5), (1, 0.5)];
    const C2_RIGHT: [(isize, f64); 3] = [(0, 1.5), (-1, -2.0), (-2, 0.5)];
    const T: f64 = 1.0 / 12.0;
    const C4_0: [(isize, f64); 5] = [(0, -25.0 * T), (1, 48.0 * T), (2, -36.0 * T), (3, 16.0 * T), (4, -3.0 * T)];
    const C4_1: [(isize, f64); 5] = [(-1, -3.0 * T), (0, -10.0 * T), (1, 18.0 * T), (2, -6.0 * T), (3, T)];
    const C4_MID: [(isize, f64); 4] = [(-2, T), (-1, -8.0 * T), (1, 8.0 * T), (2, -T)];
    const C4_M1: [(isize, f64); 5] = [(1, 3.0 * T), (0, 10.0 * T), (-1, -18.0 * T), (-2, 6.0 * T), (-3, -T)];
    const C4_M0: [(isize, f64); 5] = [(0, 25.0 * T), (-1, -48.0 * T), (-2, 36.0 * T), (-3, -16.0 * T), (-4, 3.0 * T)];
    match scheme {
        DerivScheme::Analytic | DerivScheme::Central2 => {
            if i == 0 {
                &C2_LEFT
            } else if i + 1 == m {
                &C2_RIGHT
            } else {
                &C2_MID
            }
        }
        DerivScheme::Central4 => {
            if i == 0 {
                &C4_0
            } else if i == 1 {
                &C4_1
            } else if i + 2 == m {
                &C4_M1
            } else if i + 1 == m {
                &C4_M0
            } else {
                &C4_MID
            }
        }
    }
}

/// Finite-difference `d/dx_axis` of node data at one node.
pub fn partial_at<V: Coeff>(grid: &Grid, data: &[V], node: usize, axis: usize, scheme: DerivScheme) -> V {
    let i = grid.multi(node)[axis];
    let stride = grid.stride(axis) as isize;
    let mut acc = V::default();
    for &(off, c) in stencil(scheme, i, grid.nodes()[axis]) {
        acc += data[(node as isize + off * stride) as usize] * c;
    }
    acc * (1.0 / grid.h())
}

/// Finite-difference `d/dx_axis` of node data.
pub fn partial<V: Coeff>(grid: &Grid, data: &[V], axis: usize, scheme: DerivScheme) -> Vec<V> {
    (0..grid.len()).map(|node| partial_at(grid, data, node, axis, scheme)).collect()
}

/// Partials `d_axis f_I` of every component at every node, honouring the scheme and any closed-form source.
fn all_partials<V: Coeff>(f: &Form<V>, scheme: DerivScheme) -> Vec<Vec<Vec<V>>> {
    let g = f.grid;
    let n = g.dim();
    let nc = f.comps.len();
    let mut out = vec![vec![vec![V::default(); g.len()]; nc]; n];
    match (&f.source, scheme) {
        (Some(src), DerivScheme::Analytic) => {
            let mut buf = vec![V::default(); nc];
            for node in 0..g.len() {
                let x = g.point(node);
                for (a, out_a) in out.iter_mut().enumerate() {
                    src.partials(&x, a, &mut buf);
                    for c in 0..nc {
                        out_a[c][node] = buf[c];
                    }
                }
            }
        }
        _ => {
            let fd = if scheme == DerivScheme::Analytic { DerivScheme::Central2 } else { scheme };
            for (a, out_a) in out.iter_mut().enumerate() {
                for c in 0..nc {
                    out_a[c] = partial(&g, &f.comps[c], a, fd);
                }
            }
        }
    }
    out
}

/// Exterior derivative, `d(f dx_I) = sum_a d_a f dx_a ^ dx_I`.
pub fn d<V: Coeff>(f: &Form<V>, scheme: DerivScheme) -> Result<Form<V>> {
    let n = f.grid.dim();
    if f.degree >= n {
        return Err(Error::TopDegree);
    }
    let parts = all_partials(f, scheme);
    let mut out = Form::zeros(f.grid, f.degree + 1)?;
    for (ci, &mask) in f.masks().iter().enumerate() {
        for (a, parts_a) in parts.iter().enumerate() {
            if mask & (1 << a) != 0 {
                continue;
            }
            let target = basis::position(n, mask | (1 << a));
            let sign = basis::insert_sign(a, mask);
            for (o, &p) in out.comps[target].iter_mut().zip(&parts_a[ci]) {
                *o += p * sign;
            }
        }
    }
    Ok(out)
}

/// Wedge product with coefficients multiplied in order (`a` on the left).
pub fn wedge<A, B, C>(a: &Form<A>, b: &Form<B>) -> Result<Form<C>>
where
    A: Coeff + Mul<B, Output = C>,
    B: Coeff,
    C: Coeff,
{
    a.grid.check_same(&b.grid)?;
    let n = a.grid.dim();
    let k = a.degree + b.degree;
    if k > n {
        return Err(Error::DegreeOverflow(k, n));
    }
    let mut out = Form::<C>::zeros(a.grid, k)?;
    for (ia, &ma) in a.masks().iter().enumerate() {
        for (ib, &mb) in b.masks().iter().enumerate() {
            if ma & mb != 0 {
                continue;
            }
            let target = basis::position(n, ma | mb);
            let sign = basis::shuffle_sign(ma, mb);
            let (xa, xb) = (&a.comps[ia], &b.comps[ib]);
            for (node, o) in out.comps[target].iter_mut().enumerate() {
                *o += (xa[node] * xb[node]) * sign;
            }
        }
    }
    Ok(out)
}

/// Hodge star of flat oriented `R^n`: `*dx_I = sign(I, I^c) dx_{I^c}`.
pub fn star<V: Coeff>(f: &Form<V>) -> Form<V> {
    let n = f.grid.dim();
    let mut comps = vec![Vec::new(); basis::count(n, n - f.degree)];
    for (ci, &mask) in f.masks().iter().enumerate() {
        let (c, sign) = basis::hodge(n, mask);
        comps[basis::position(n, c)] = f.comps[ci].iter().map(|&v| v * sign).collect();
    }
    Form { grid: f.grid, degree: n - f.degree, comps, source: None }
}

/// Pointwise real part.
pub fn re_part<V: Coeff>(f: &Form<V>) -> Form<f64> {
    f.map(|v| v.real())
}

/// Pointwise squared norm `sum_I |f_I|^2`.
pub fn norm2_pointwise<V: Coeff>(f: &Form<V>) -> Vec<f64> {
    let mut out = vec![0.0; f.grid.len()];
    for c in &f.comps {
        for (o, v) in out.iter_mut().zip(c) {
            *o += v.norm2();
        }
    }
    out
}

/// Trapezoid integral of node data over the grid box.
pub fn integrate_density(grid: &Grid, density: &[f64]) -> f64 {
    density.iter().enumerate().map(|(node, v)| grid.weight(node) * v).sum()
}

/// Integral of a top-degree (or 0-degree density) real form over the grid box.
pub fn integrate(f: &Form<f64>) -> Result<f64> {
    let n = f.grid.dim();
    if f.degree != n && f.degree != 0 {
        return Err(Error::WrongDegree { expected: n, got: f.degree });
    }
    Ok(integrate_density(&f.grid, &f.comps[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::ImQuaternion;

    fn grid3(m: usize) -> Grid {
        Grid::new(&[m, m, m], &[-1.0; 3], &[1.0; 3]).unwrap()
    }

    #[test]
    fn d_of_coordinate_function() {
        let g = grid3(9);
        let f = Form::<f64>::from_fn(g, 0, |x, _| 2.0 * x[0] - x[2]).unwrap();
        let df = d(&f, DerivScheme::Central2).unwrap();
        for node in 0..g.len() {
            assert!((df.components()[0][node] - 2.0).abs() < 1e-12);
            assert!(df.components()[1][node].abs() < 1e-12);
            assert!((df.components()[2][node] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn top_degree_and_overflow_errors() {
        let g = grid3(5);
        let top = Form::<f64>::zeros(g, 3).unwrap();
        assert!(matches!(d(&top, DerivScheme::Central2), Err(Error::TopDegree)));
        let one = Form::<f64>::zeros(g, 1).unwrap();
        let three = Form::<f64>::zeros(g, 3).unwrap();
        assert!(matches!(wedge::<f64, f64, f64>(&one, &three), Err(Error::DegreeOverflow(4, 3))));
        let other = Form::<f64>::zeros(grid3(6), 1).unwrap();
        assert!(matches!(wedge::<f64, f64, f64>(&one, &other), Err(Error::GridMismatch)));
    }

    #[test]
    fn wedge_of_imaginary_one_forms() {
        let g = grid3(5);
        let a = Form::from_fn(g, 1, |_, c| if c == 0 { ImQuaternion::I } else { ImQuaternion::ZERO }).unwrap();
        let b = Form::from_fn(g, 1, |_, c| if c == 1 { ImQuaternion::J } else { ImQuaternion::ZERO }).unwrap();
        let w = wedge(&a, &b).unwrap();
        // (i dx0) ^ (j dx1) = k dx0^dx1
        assert_eq!(w.component(0b011)[0], crate::quat::Quaternion::new(0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn integrate_polynomial_exactly() {
        let g = grid3(11);
        let f = Form::<f64>::from_fn(g, 3, |x, _| 1.0 + x[0] + x[1] * x[2]).unwrap();
        assert!((integrate(&f).unwrap() - 8.0).abs() < 1e-12);
    }
}
