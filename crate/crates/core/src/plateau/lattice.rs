//! Discrete energy on the node lattice.
//!
//! `Phi` lives on nodes and `A_a` on the edges `x -> x + h e_a`, stored at the edge's lower
//! node. Edges carry the Cayley transport of the connection, weighted by `1 + |k|^2` so that
//! `(1 + |k|^2) R(k)` is polynomial in `k` and large connections are not free; plaquettes carry
//! the curvature from edge differences and edge averages. The energy is an exact function of
//! the packed values, so its gradient can be assembled in closed form.

use crate::forms::{Form, Grid};
use crate::gauge::{EnergyReport, Pair};
use crate::quat::ImQuaternion;
use crate::Scalar;
use num_dual::Dual64;
use rayon::prelude::*;

type V3 = [f64; 3];

fn cross(a: &V3, b: &V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `R(k) v = v - 2 (k x v - k x (k x v)) / (1 + |k|^2)`, the rotation by the Cayley map of `2k`.
pub fn transport<D: Scalar>(k: &[D; 3], v: &[D; 3]) -> [D; 3] {
    let c = |a: &[D; 3], b: &[D; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let kv = c(k, v);
    let kkv = c(k, &kv);
    let s = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + 1.0).recip() * 2.0;
    [v[0] - (kv[0] - kkv[0]) * s, v[1] - (kv[1] - kkv[1]) * s, v[2] - (kv[2] - kkv[2]) * s]
}

fn transport_f(k: &V3, v: &V3) -> V3 {
    transport(k, v)
}

/// Packed lattice values `[Phi, A_0, .., A_{n-1}]` per node; `A_a` at a node is the value on the
/// edge leaving it along `a` and is unused on the last node of that axis.
#[derive(Clone, Debug)]
pub struct LatticeState {
    pub grid: Grid,
    pub x: Vec<f64>,
}

impl LatticeState {
    pub fn stride(n: usize) -> usize {
        3 * (n + 1)
    }

    /// Node samples of `Phi`; edge values of `A` at edge midpoints, exact for analytic pairs and
    /// edge averages otherwise.
    pub fn from_pair(p: &Pair) -> Self {
        let g = *p.grid();
        let n = g.dim();
        let s = Self::stride(n);
        let mut x = vec![0.0; g.len() * s];
        for i in 0..g.len() {
            x[i * s..i * s + 3].copy_from_slice(&p.phi_at(i).to_array());
        }
        match p.field() {
            Some(f) => {
                for i in 0..g.len() {
                    for a in (0..n).filter(|&a| has_edge(&g, i, a)) {
                        let mut mid = g.point(i);
                        mid[a] += 0.5 * g.h();
                        x[offset(n, i, a + 1, 0)..offset(n, i, a + 1, 3)].copy_from_slice(&f.value(&mid).1[a].to_array());
                    }
                }
            }
            None => pack_edges(&g, p.a.components(), &mut x),
        }
        LatticeState { grid: g, x }
    }

    /// Node samples of the pair: `A_a` at a node is the mean of its two edges along `a`, linearly
    /// extrapolated at the ends.
    pub fn to_pair(&self, epsilon: f64, scheme: crate::forms::DerivScheme) -> crate::Result<Pair> {
        let g = self.grid;
        let n = g.dim();
        let s = Self::stride(n);
        let v = |i: usize, slot: usize| ImQuaternion::from_array([self.x[i * s + 3 * slot], self.x[i * s + 3 * slot + 1], self.x[i * s + 3 * slot + 2]]);
        let phi = (0..g.len()).map(|i| v(i, 0)).collect();
        let a = (0..n)
            .map(|b| {
                let st = g.stride(b);
                let last = g.nodes()[b] - 1;
                (0..g.len())
                    .map(|i| match g.multi(i)[b] {
                        0 => v(i, b + 1) * 1.5 - v(i + st, b + 1) * 0.5,
                        m if m == last => v(i - st, b + 1) * 1.5 - v(i - 2 * st, b + 1) * 0.5,
                        _ => (v(i - st, b + 1) + v(i, b + 1)) * 0.5,
                    })
                    .collect()
            })
            .collect();
        Pair::from_samples(Form::from_components(g, 0, vec![phi])?, Form::from_components(g, 1, a)?, epsilon, scheme)
    }
}

fn has_edge(g: &Grid, i: usize, a: usize) -> bool {
    g.multi(i)[a] + 1 < g.nodes()[a]
}

/// Writes edge averages of node samples of `A` into the packed layout.
pub(crate) fn pack_edges(g: &Grid, comps: &[Vec<ImQuaternion>], x: &mut [f64]) {
    let n = g.dim();
    for (a, c) in comps.iter().enumerate().take(n) {
        for i in (0..g.len()).filter(|&i| has_edge(g, i, a)) {
            let e = (c[i] + c[i + g.stride(a)]) * 0.5;
            x[offset(n, i, a + 1, 0)..offset(n, i, a + 1, 3)].copy_from_slice(&e.to_array());
        }
    }
}

/// Dirichlet and Yang-Mills parts of the lattice energy.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LatticeEnergy {
    pub dirichlet: f64,
    pub yang_mills: f64,
}

impl LatticeEnergy {
    pub fn total(&self) -> f64 {
        self.dirichlet + self.yang_mills
    }

    pub fn report(&self) -> EnergyReport {
        EnergyReport { total: self.total(), dirichlet: self.dirichlet, yang_mills: self.yang_mills, density: Vec::new() }
    }
}

/// Which terms the lattice functional contains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terms {
    Full,
    /// `int |d_A Phi|^2` only, without the `1/eps` factor.
    Dirichlet,
}

struct Ctx<'a> {
    grid: &'a Grid,
    x: &'a [f64],
    n: usize,
    s: usize,
    eps: f64,
    terms: Terms,
}

impl Ctx<'_> {
    fn get(&self, node: usize, slot: usize) -> V3 {
        let o = node * self.s + 3 * slot;
        [self.x[o], self.x[o + 1], self.x[o + 2]]
    }

    fn node_terms(&self, i: usize, grad: Option<&mut [f64]>) -> LatticeEnergy {
        let g = self.grid;
        let n = self.n;
        let h = g.h();
        let hn = h.powi(n as i32);
        let m = g.multi(i);
        let mut out = LatticeEnergy::default();
        let want = grad.is_some();
        let mut grad = grad;
        let mut add = |node: usize, slot: usize, v: V3| {
            if let Some(gr) = grad.as_deref_mut() {
                let o = node * self.s + 3 * slot;
                for k in 0..3 {
                    gr[o + k] += v[k];
                }
            }
        };
        let tf = |skip: &[usize]| -> f64 {
            (0..n).filter(|c| !skip.contains(c)).map(|c| g.trapezoid_factor(c, m[c])).product::<f64>()
        };
        let has = |a: usize| m[a] + 1 < g.nodes()[a];
        let dscale = match self.terms {
            Terms::Full => 1.0 / self.eps,
            Terms::Dirichlet => 1.0,
        };
        for a in 0..n {
            if !has(a) {
                continue;
            }
            let j = i + g.stride(a);
            let c = dscale * hn * tf(&[a]) / (h * h);
            let (pi, pj) = (self.get(i, 0), self.get(j, 0));
            let k: V3 = self.get(i, a + 1).map(|v| h * v);
            let rp = transport_f(&k, &pi);
            let diff: V3 = std::array::from_fn(|q| pj[q] - rp[q]);
            let w = 1.0 + dot(&k, &k);
            let d2 = dot(&diff, &diff);
            out.dirichlet += c * w * d2;
            if want {
                let gd: V3 = diff.map(|v| 2.0 * c * w * v);
                add(j, 0, gd);
                let back = transport_f(&k.map(|v| -v), &gd);
                add(i, 0, back.map(|v| -v));
                if self.terms == Terms::Full {
                    let mut gk = [0.0; 3];
                    for (q, gkq) in gk.iter_mut().enumerate() {
                        let kd: [Dual64; 3] = std::array::from_fn(|r| Dual64::new(k[r], if r == q { 1.0 } else { 0.0 }));
                        let pd: [Dual64; 3] = pi.map(Dual64::from);
                        let dr = transport(&kd, &pd);
                        *gkq = 2.0 * c * d2 * k[q] - (0..3).map(|r| dr[r].eps * gd[r]).sum::<f64>();
                    }
                    add(i, a + 1, gk.map(|v| h * v));
                }
            }
        }
        if self.terms == Terms::Dirichlet {
            return out;
        }
        for a in 0..n {
            for b in a + 1..n {
                if !has(a) || !has(b) {
                    continue;
                }
                let c = self.eps * hn * tf(&[a, b]);
                let (ia, ib) = (i + g.stride(a), i + g.stride(b));
                let (a0, a1) = (self.get(i, a + 1), self.get(ib, a + 1));
                let (b0, b1) = (self.get(i, b + 1), self.get(ia, b + 1));
                let ca: V3 = std::array::from_fn(|q| 0.5 * (a0[q] + a1[q]));
                let cb: V3 = std::array::from_fn(|q| 0.5 * (b0[q] + b1[q]));
                let cc = cross(&ca, &cb);
                let f: V3 = std::array::from_fn(|q| (b1[q] - b0[q]) / h - (a1[q] - a0[q]) / h + 2.0 * cc[q]);
                out.yang_mills += c * dot(&f, &f);
                if want {
                    let gf = f.map(|v| 2.0 * c * v);
                    let d = gf.map(|v| v / h);
                    let gca = cross(&cb, &gf);
                    let gcb = cross(&gf, &ca);
                    add(ia, b + 1, std::array::from_fn(|r| d[r] + gcb[r]));
                    add(i, b + 1, std::array::from_fn(|r| -d[r] + gcb[r]));
                    add(ib, a + 1, std::array::from_fn(|r| -d[r] + gca[r]));
                    add(i, a + 1, std::array::from_fn(|r| d[r] + gca[r]));
                }
            }
        }
        out
    }
}

fn chunks(len: usize) -> Vec<(usize, usize)> {
    let parts = rayon::current_num_threads().max(1).min(len.max(1));
    (0..parts).map(|t| (t * len / parts, (t + 1) * len / parts)).collect()
}

/// Lattice energy of packed node values.
pub fn energy_of(grid: &Grid, x: &[f64], epsilon: f64, terms: Terms) -> LatticeEnergy {
    let n = grid.dim();
    let ctx = Ctx { grid, x, n, s: LatticeState::stride(n), eps: epsilon, terms };
    let parts: Vec<LatticeEnergy> = chunks(grid.len())
        .into_par_iter()
        .map(|(lo, hi)| {
            (lo..hi).fold(LatticeEnergy::default(), |acc, i| {
                let e = ctx.node_terms(i, None);
                LatticeEnergy { dirichlet: acc.dirichlet + e.dirichlet, yang_mills: acc.yang_mills + e.yang_mills }
            })
        })
        .collect();
    parts.iter().fold(LatticeEnergy::default(), |acc, e| LatticeEnergy {
        dirichlet: acc.dirichlet + e.dirichlet,
        yang_mills: acc.yang_mills + e.yang_mills,
    })
}

/// Lattice energy and its exact gradient with respect to every packed node value.
pub fn energy_and_gradient(grid: &Grid, x: &[f64], epsilon: f64, terms: Terms) -> (LatticeEnergy, Vec<f64>) {
    let n = grid.dim();
    let ctx = Ctx { grid, x, n, s: LatticeState::stride(n), eps: epsilon, terms };
    let parts: Vec<(LatticeEnergy, Vec<f64>)> = chunks(grid.len())
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut g = vec![0.0; x.len()];
            let mut e = LatticeEnergy::default();
            for i in lo..hi {
                let t = ctx.node_terms(i, Some(&mut g));
                e.dirichlet += t.dirichlet;
                e.yang_mills += t.yang_mills;
            }
            (e, g)
        })
        .collect();
    let mut it = parts.into_iter();
    let (mut e, mut g) = it.next().unwrap_or_default();
    for (pe, pg) in it {
        e.dirichlet += pe.dirichlet;
        e.yang_mills += pe.yang_mills;
        for (a, b) in g.iter_mut().zip(&pg) {
            *a += b;
        }
    }
    if g.is_empty() {
        g = vec![0.0; x.len()];
    }
    (e, g)
}

/// Lattice energy of a pair.
pub fn lattice_energy(p: &Pair) -> LatticeEnergy {
    let st = LatticeState::from_pair(p);
    energy_of(&st.grid, &st.x, p.epsilon, Terms::Full)
}

/// Packed-value offset of component `k` of slot `slot` at `node`.
pub fn offset(n: usize, node: usize, slot: usize, k: usize) -> usize {
    node * LatticeState::stride(n) + 3 * slot + k
}

