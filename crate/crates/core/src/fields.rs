//! Closed-form test fields: smooth random pairs and gauges, the hedgehog map and helpers
//! for differentiating generic-scalar fields.

use crate::forms::MAX_DIM;
use crate::gauge::{ClosedGauge, ClosedPair};
use crate::Scalar;
use num_dual::Dual;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// An `R^3`-valued field written over generic scalars.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> [D; 3];
}

/// A real 1-form written over generic scalars.
pub trait CovectorField: Send + Sync {
    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> [D; MAX_DIM];
}

pub(crate) fn konst<D: Scalar>(v: f64) -> D {
    D::from(v)
}

/// `d/dx_axis` of a vector field at `x`, computed with one more dual layer.
pub fn vector_partial<D: Scalar, F: VectorField>(f: &F, x: &[D; MAX_DIM], axis: usize) -> [D; 3] {
    let mut xd = [Dual::new(konst::<D>(0.0), konst::<D>(0.0)); MAX_DIM];
    for c in 0..MAX_DIM {
        xd[c] = Dual::new(x[c], konst::<D>(if c == axis { 1.0 } else { 0.0 }));
    }
    let v = f.eval(&xd);
    [v[0].eps, v[1].eps, v[2].eps]
}

pub fn dot3<D: Scalar>(a: &[D; 3], b: &[D; 3]) -> D {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3<D: Scalar>(a: &[D; 3], b: &[D; 3]) -> [D; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Unit quaternion `exp(u)` for imaginary `u`, with the small-argument series.
pub fn exp_im_generic<D: Scalar>(u: &[D; 3]) -> [D; 4] {
    let t2 = dot3(u, u);
    let (c, s) = if t2.re() < crate::quat::EXP_SERIES_CUTOFF * crate::quat::EXP_SERIES_CUTOFF {
        let t4 = t2 * t2;
        (
            konst::<D>(1.0) - t2 * 0.5 + t4 * (1.0 / 24.0),
            konst::<D>(1.0) - t2 * (1.0 / 6.0) + t4 * (1.0 / 120.0),
        )
    } else {
        let t = t2.sqrt();
        (t.cos(), t.sin() / t)
    };
    [c, u[0] * s, u[1] * s, u[2] * s]
}

/// Smooth scalar `sum_k c_k sin(k . x + phase_k)`.
#[derive(Clone, Debug)]
pub struct Trig {
    modes: Vec<([f64; MAX_DIM], f64, f64)>,
    offset: f64,
}

impl Trig {
    pub fn random(rng: &mut impl Rng, n: usize, modes: usize, max_k: f64, amplitude: f64) -> Self {
        let modes = (0..modes)
            .map(|_| {
                let mut k = [0.0; MAX_DIM];
                for kv in k.iter_mut().take(n) {
                    *kv = rng.gen_range(-max_k..max_k);
                }
                (k, rng.gen_range(-amplitude..amplitude), rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        Trig { modes, offset: rng.gen_range(-amplitude..amplitude) }
    }

    pub fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> D {
        let mut acc = konst::<D>(self.offset);
        for (k, c, ph) in &self.modes {
            let mut arg = konst::<D>(*ph);
            for a in 0..MAX_DIM {
                if k[a] != 0.0 {
                    arg += x[a] * k[a];
                }
            }
            acc += arg.sin() * *c;
        }
        acc
    }
}

/// A smooth random pair: every component of `Phi` and `A` is a [`Trig`] sum.
#[derive(Clone, Debug)]
pub struct RandomPair {
    n: usize,
    phi: [Trig; 3],
    a: Vec<[Trig; 3]>,
}

impl RandomPair {
    pub fn new(seed: u64, n: usize, max_k: f64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let triple = |rng: &mut ChaCha8Rng| {
            [
                Trig::random(rng, n, 3, max_k, amplitude),
                Trig::random(rng, n, 3, max_k, amplitude),
                Trig::random(rng, n, 3, max_k, amplitude),
            ]
        };
        let phi = triple(&mut rng);
        let a = (0..n).map(|_| triple(&mut rng)).collect();
        RandomPair { n, phi, a }
    }
}

impl ClosedPair for RandomPair {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> ([D; 3], [[D; 3]; MAX_DIM]) {
        let phi = [self.phi[0].eval(x), self.phi[1].eval(x), self.phi[2].eval(x)];
        let zero = konst::<D>(0.0);
        let mut a = [[zero; 3]; MAX_DIM];
        for (b, t) in self.a.iter().enumerate() {
            a[b] = [t[0].eval(x), t[1].eval(x), t[2].eval(x)];
        }
        (phi, a)
    }
}

/// Smooth random vector field with [`Trig`] components.
#[derive(Clone, Debug)]
pub struct RandomVector {
    n: usize,
    c: [Trig; 3],
}

impl RandomVector {
    pub fn new(seed: u64, n: usize, max_k: f64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = [
            Trig::random(&mut rng, n, 3, max_k, amplitude),
            Trig::random(&mut rng, n, 3, max_k, amplitude),
            Trig::random(&mut rng, n, 3, max_k, amplitude),
        ];
        RandomVector { n, c }
    }
}

impl VectorField for RandomVector {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> [D; 3] {
        [self.c[0].eval(x), self.c[1].eval(x), self.c[2].eval(x)]
    }
}

/// Smooth random gauge `sigma = exp(u)`.
#[derive(Clone, Debug)]
pub struct RandomGauge(pub RandomVector);

impl RandomGauge {
    pub fn new(seed: u64, n: usize, max_k: f64, amplitude: f64) -> Self {
        RandomGauge(RandomVector::new(seed, n, max_k, amplitude))
    }
}

impl ClosedGauge for RandomGauge {
    fn dim(&self) -> usize {
        self.0.n
    }
    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> [D; 4] {
        exp_im_generic(&self.0.eval(x))
    }
}

/// `x |-> s (x - c) / |x - c|` on the first three axes.
#[derive(Clone, Debug)]
pub struct Hedgehog {
    pub n: usize,
    pub center: [f64; MAX_DIM],
    pub sign: f64,
}

impl VectorField for Hedgehog {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> [D; 3] {
        let y = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
        let r = dot3(&y, &y).sqrt();
        [y[0] * self.sign / r, y[1] * self.sign / r, y[2] * self.sign / r]
    }
}

/// Smooth random real 1-form.
#[derive(Clone, Debug)]
pub struct RandomCovector {
    c: Vec<Trig>,
}

impl RandomCovector {
    pub fn new(seed: u64, n: usize, max_k: f64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RandomCovector { c: (0..n).map(|_| Trig::random(&mut rng, n, 3, max_k, amplitude)).collect() }
    }
}

impl CovectorField for RandomCovector {
    fn eval<D: Scalar>(&self, x: &[D; MAX_DIM]) -> [D; MAX_DIM] {
        let mut out = [konst::<D>(0.0); MAX_DIM];
        for (a, t) in self.c.iter().enumerate() {
            out[a] = t.eval(x);
        }
        out
    }
}

/// The zero 1-form.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroCovector;

impl CovectorField for ZeroCovector {
    fn eval<D: Scalar>(&self, _x: &[D; MAX_DIM]) -> [D; MAX_DIM] {
        [konst::<D>(0.0); MAX_DIM]
    }
}
