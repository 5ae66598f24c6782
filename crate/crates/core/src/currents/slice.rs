use crate::error::{Error, Result};
use crate::forms::{Form, MAX_DIM};
use crate::gauge::{Pair, PairField, PairJet};
use crate::quat::ImQuaternion;
use std::sync::Arc;

/// Restriction of a 4D closed-form pair to the hyperplane `x_axis = y`.
pub struct SliceField {
    pub inner: Arc<dyn PairField>,
    pub axis: usize,
    pub y: f64,
}

impl SliceField {
    fn lift(&self, x: &[f64; MAX_DIM]) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        let mut k = 0;
        for (a, o) in out.iter_mut().enumerate() {
            if a == self.axis {
                *o = self.y;
            } else {
                *o = x[k];
                k += 1;
            }
        }
        out
    }

    fn kept(&self) -> impl Iterator<Item = usize> + '_ {
        (0..MAX_DIM).filter(move |&a| a != self.axis)
    }
}

impl PairField for SliceField {
    fn dim(&self) -> usize {
        3
    }

    fn value(&self, x: &[f64; MAX_DIM]) -> (ImQuaternion, [ImQuaternion; MAX_DIM]) {
        let (phi, a) = self.inner.value(&self.lift(x));
        let mut out = [ImQuaternion::ZERO; MAX_DIM];
        for (k, b) in self.kept().enumerate() {
            out[k] = a[b];
        }
        (phi, out)
    }

    fn jet(&self, x: &[f64; MAX_DIM]) -> PairJet {
        let j = self.inner.jet(&self.lift(x));
        let mut out = PairJet { phi: j.phi, ..Default::default() };
        for (k, p) in self.kept().enumerate() {
            out.dphi[k] = j.dphi[p];
            out.a[k] = j.a[p];
            for (l, b) in self.kept().enumerate() {
                out.da[k][l] = j.da[p][b];
            }
        }
        out
    }
}

/// A 3D slice of a 4D pair.
pub struct Slice {
    pub pair: Pair,
    /// The grid plane actually used.
    pub y: f64,
    /// Whether the requested `y` was moved to the nearest grid plane.
    pub snapped: bool,
}

/// Restricts `p` to `x_axis = y`: `Phi` is restricted and `A` keeps the three sliced components.
pub fn slice(p: &Pair, y: f64, axis: usize) -> Result<Slice> {
    let g = *p.grid();
    if g.dim() != 4 {
        return Err(Error::InvalidGrid("slicing needs a 4D pair".into()));
    }
    if axis >= 4 {
        return Err(Error::Invalid(format!("slicing axis {axis} out of range")));
    }
    let k = ((y - g.lo()[axis]) / g.h()).round().clamp(0.0, (g.nodes()[axis] - 1) as f64) as usize;
    let plane = g.coord(axis, k);
    let snapped = (plane - y).abs() > 1e-9 * g.h();
    let g3 = g.drop_axis(axis)?;
    if let Some(field) = p.field() {
        let sf = Arc::new(SliceField { inner: field.clone(), axis, y: plane });
        let pair = Pair::from_field(sf, g3, p.epsilon, p.scheme)?;
        return Ok(Slice { pair, y: plane, snapped });
    }
    let lift = |node3: usize| {
        let m3 = g3.multi(node3);
        let mut m = [0usize; MAX_DIM];
        let mut j = 0;
        for (a, v) in m.iter_mut().enumerate() {
            if a == axis {
                *v = k;
            } else {
                *v = m3[j];
                j += 1;
            }
        }
        g.index(&m)
    };
    let nodes: Vec<usize> = (0..g3.len()).map(lift).collect();
    let phi = nodes.iter().map(|&i| p.phi_at(i)).collect();
    let a = (0..4).filter(|&b| b != axis).map(|b| nodes.iter().map(|&i| p.a_at(i, b)).collect()).collect();
    let pair = Pair::from_samples(Form::from_components(g3, 0, vec![phi])?, Form::from_components(g3, 1, a)?, p.epsilon, p.scheme)?;
    Ok(Slice { pair, y: plane, snapped })
}
