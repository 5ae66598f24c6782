use super::{Coeff, FormSource, MAX_DIM};
use crate::Scalar;
use num_dual::Dual64;
use std::marker::PhantomData;

/// Closed-form coefficients, written once over any scalar so derivatives come from dual numbers.
///
/// `out` holds `components * width` reals, component-major.
pub trait ClosedForm: Send + Sync {
    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM], out: &mut [D]);
}

/// Adapts a [`ClosedForm`] into a [`FormSource`] with exact first partials.
pub struct AutoDiffForm<F, V> {
    inner: F,
    components: usize,
    _v: PhantomData<fn() -> V>,
}

impl<F: ClosedForm, V: Coeff> AutoDiffForm<F, V> {
    pub fn new(inner: F, components: usize) -> Self {
        AutoDiffForm { inner, components, _v: PhantomData }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }
}

impl<F: ClosedForm, V: Coeff> FormSource<V> for AutoDiffForm<F, V> {
    fn values(&self, x: &[f64; MAX_DIM], out: &mut [V]) {
        let w = V::KIND.width();
        let mut buf = vec![0.0; self.components * w];
        self.inner.eval(x, &mut buf);
        for (c, o) in out.iter_mut().enumerate() {
            *o = V::from_parts(&buf[c * w..(c + 1) * w]);
        }
    }

    fn partials(&self, x: &[f64; MAX_DIM], axis: usize, out: &mut [V]) {
        let w = V::KIND.width();
        let mut xd = [Dual64::from(0.0); MAX_DIM];
        for a in 0..MAX_DIM {
            xd[a] = Dual64::new(x[a], if a == axis { 1.0 } else { 0.0 });
        }
        let mut buf = vec![Dual64::from(0.0); self.components * w];
        self.inner.eval(&xd, &mut buf);
        let mut parts = [0.0; 4];
        for (c, o) in out.iter_mut().enumerate() {
            for k in 0..w {
                parts[k] = buf[c * w + k].eps;
            }
            *o = V::from_parts(&parts[..w]);
        }
    }
}
