use crate::error::{Error, Result};
use crate::forms::MAX_DIM;
use crate::recovery::PolyCurrent;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: [f64; MAX_DIM],
    pub weight: f64,
}

/// A finite sum of weighted Dirac masses.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscreteZeroCurrent {
    /// Number of meaningful coordinates per location (3 or 4).
    pub dim: usize,
    pub atoms: Vec<Atom>,
}

impl DiscreteZeroCurrent {
    pub fn new(dim: usize) -> Self {
        DiscreteZeroCurrent { dim, atoms: Vec::new() }
    }

    pub fn push(&mut self, location: &[f64], weight: f64) {
        let mut l = [0.0; MAX_DIM];
        l[..location.len()].copy_from_slice(location);
        self.atoms.push(Atom { location: l, weight });
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let atoms = self.atoms.iter().map(|a| Atom { weight: a.weight * s, ..*a }).collect();
        DiscreteZeroCurrent { dim: self.dim, atoms }
    }

    /// Atom-wise difference of two currents carried by the same locations.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.atoms.len() != other.atoms.len() || self.atoms.iter().zip(&other.atoms).any(|(a, b)| a.location != b.location) {
            return Err(Error::Invalid("currents are not carried by the same atoms".into()));
        }
        let atoms = self.atoms.iter().zip(&other.atoms).map(|(a, b)| Atom { weight: a.weight - b.weight, ..*a }).collect();
        Ok(DiscreteZeroCurrent { dim: self.dim, atoms })
    }

    /// Points of a polyhedral 0-current with weight `scale * mult`.
    pub fn from_poly(p: &PolyCurrent, scale: f64) -> Result<Self> {
        if p.n != 3 {
            return Err(Error::Invalid("only point currents convert to atoms".into()));
        }
        let mut out = DiscreteZeroCurrent::new(3);
        for c in &p.cells {
            out.push(&c.vertices[0][..3], scale * f64::from(c.mult));
        }
        Ok(out)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let names = ["x", "y", "z", "w"];
        writeln!(w, "{},weight", names[..self.dim].join(","))?;
        for a in &self.atoms {
            let coords: Vec<String> = a.location[..self.dim].iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{},{:?}", coords.join(","), a.weight)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })??;
        let dim = header.split(',').count() - 1;
        if !(3..=4).contains(&dim) {
            return Err(Error::Parse { line: 1, msg: format!("expected 3 or 4 coordinates, found {dim}") });
        }
        let mut out = DiscreteZeroCurrent::new(dim);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Parse { line: i + 2, msg: e.to_string() })?;
            if vals.len() != dim + 1 {
                return Err(Error::Parse { line: i + 2, msg: format!("expected {} fields", dim + 1) });
            }
            out.push(&vals[..dim], vals[dim]);
        }
        Ok(out)
    }
}

/// `beta_p(t) = t^p (1 - t^2)^2` on `[-1, 1]`.
fn beta(p: u8, t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        t.powi(i32::from(p)) * (1.0 - t * t).powi(2)
    }
}

/// `sup |beta_p|` and `sup |beta_p'|`, sampled.
fn beta_sups(p: u8) -> (f64, f64) {
    let m = 4000;
    let mut s0 = 0.0f64;
    let mut s1 = 0.0f64;
    for i in 0..=m {
        let t = -1.0 + 2.0 * i as f64 / m as f64;
        s0 = s0.max(beta(p, t).abs());
        let pi = i32::from(p);
        let d = if p == 0 { 0.0 } else { f64::from(p) * t.powi(pi - 1) * (1.0 - t * t).powi(2) }
            - 4.0 * t.powi(pi + 1) * (1.0 - t * t);
        s1 = s1.max(d.abs());
    }
    (s0, s1)
}

/// Tensor-product polynomial bump `prod_a beta_{p_a}((x_a - c_a) / r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; MAX_DIM],
    pub radius: f64,
    pub powers: [u8; MAX_DIM],
    /// `max(sup |w|, sup |dw|)`.
    pub norm: f64,
}

impl Bump {
    pub fn new(dim: usize, center: &[f64], radius: f64, powers: &[u8]) -> Self {
        let mut c = [0.0; MAX_DIM];
        c[..dim].copy_from_slice(&center[..dim]);
        let mut p = [0u8; MAX_DIM];
        p[..dim].copy_from_slice(&powers[..dim]);
        let sups: Vec<(f64, f64)> = (0..dim).map(|a| beta_sups(p[a])).collect();
        let s0: f64 = sups.iter().map(|s| s.0).product();
        let grad2: f64 = (0..dim)
            .map(|a| {
                let others: f64 = (0..dim).filter(|&b| b != a).map(|b| sups[b].0).product();
                (sups[a].1 / radius * others).powi(2)
            })
            .sum();
        Bump { center: c, radius, powers: p, norm: s0.max(grad2.sqrt()) }
    }

    pub fn eval(&self, x: &[f64; MAX_DIM], dim: usize) -> f64 {
        (0..dim).map(|a| beta(self.powers[a], (x[a] - self.center[a]) / self.radius)).product()
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TestDictionary {
    pub dim: usize,
    pub bumps: Vec<Bump>,
}

impl TestDictionary {
    /// Bumps of radius `radius` centered on a lattice of spacing `radius` covering `[lo, hi]`,
    /// with all power tuples of total degree at most `max_degree`.
    pub fn lattice(dim: usize, lo: &[f64], hi: &[f64], radius: f64, max_degree: u8) -> Self {
        let counts: Vec<usize> = (0..dim).map(|a| ((hi[a] - lo[a]) / radius).round().max(0.0) as usize + 1).collect();
        let mut powers = Vec::new();
        let total = (max_degree as usize + 1).pow(dim as u32);
        for k in 0..total {
            let mut rem = k;
            let mut p = [0u8; MAX_DIM];
            for pa in p.iter_mut().take(dim) {
                *pa = (rem % (max_degree as usize + 1)) as u8;
                rem /= max_degree as usize + 1;
            }
            if p.iter().map(|&v| u32::from(v)).sum::<u32>() <= u32::from(max_degree) {
                powers.push(p);
            }
        }
        let mut bumps = Vec::new();
        let ncenters: usize = counts.iter().product();
        for k in 0..ncenters {
            let mut rem = k;
            let mut c = [0.0; MAX_DIM];
            for a in 0..dim {
                c[a] = lo[a] + radius * (rem % counts[a]) as f64;
                rem /= counts[a];
            }
            for p in &powers {
                bumps.push(Bump::new(dim, &c, radius, p));
            }
        }
        TestDictionary { dim, bumps }
    }
}

/// `max_w |<T1 - T2, w>| / max(|w|_inf, |dw|_inf)` over the dictionary.
pub fn weak_star_distance(t1: &DiscreteZeroCurrent, t2: &DiscreteZeroCurrent, dict: &TestDictionary) -> Result<f64> {
    if dict.bumps.is_empty() {
        return Err(Error::Invalid("empty test-form dictionary".into()));
    }
    let dim = dict.dim;
    let pair = |b: &Bump, t: &DiscreteZeroCurrent| t.atoms.iter().map(|a| a.weight * b.eval(&a.location, dim)).sum::<f64>();
    Ok(dict.bumps.iter().map(|b| (pair(b, t1) - pair(b, t2)).abs() / b.norm).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip() {
        let mut t = DiscreteZeroCurrent::new(3);
        t.push(&[0.5, 0.0, 0.25], -12.5);
        t.push(&[-0.5, 1.0, 0.0], 3.0);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(DiscreteZeroCurrent::read_csv(&buf[..]).unwrap(), t);
    }

    #[test]
    fn bump_norm_dominates_sampled_gradient() {
        let b = Bump::new(3, &[0.0; 3], 0.7, &[1, 0, 2]);
        let h = 1e-6;
        for i in 0..500 {
            let x = [((i * 37) % 100) as f64 / 80.0 - 0.6, ((i * 13) % 100) as f64 / 80.0 - 0.6, ((i * 7) % 100) as f64 / 80.0 - 0.6, 0.0];
            assert!(b.eval(&x, 3).abs() <= b.norm + 1e-12);
            let g: f64 = (0..3)
                .map(|a| {
                    let mut xp = x;
                    xp[a] += h;
                    ((b.eval(&xp, 3) - b.eval(&x, 3)) / h).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            assert!(g <= b.norm * (1.0 + 1e-3));
        }
    }
}
