use crate::currents::{cell_current, slice, weak_star_distance, CellPartition, DiscreteZeroCurrent, TestDictionary};
use crate::error::{Error, Result};
use crate::forms::{Grid, MAX_DIM};
use crate::gauge::Pair;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The Euclidean minimizer: a straight segment between two boundary points. In three
/// dimensions it stands for a line along the missing axis, seen as the point `a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: [f64; MAX_DIM],
    pub b: [f64; MAX_DIM],
}

impl Segment {
    pub fn length(&self, n: usize) -> f64 {
        (0..n).map(|k| (self.b[k] - self.a[k]).powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlateauComparison {
    pub epsilon: f64,
    pub mass: f64,
    /// `mass / (4 pi |segment|)`, per unit length in the reduced problem.
    pub mass_ratio: f64,
    pub weak_distance: f64,
    /// Largest single atom weight.
    pub peak_weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlateauReport {
    pub entries: Vec<PlateauComparison>,
}

fn whole_box(grid: Grid) -> Result<CellPartition> {
    let side = (0..3).map(|a| grid.hi(a) - grid.lo()[a]).fold(f64::INFINITY, f64::min);
    CellPartition::new(grid, side, &[0.0; 3])
}

/// Cell current of the whole grid box (3D) or of each interior slice transverse to the
/// segment, weighted by the slice spacing (4D).
fn extracted(p: &Pair, seg: &Segment) -> Result<DiscreteZeroCurrent> {
    let g = p.grid();
    if g.dim() == 3 {
        return cell_current(p, &whole_box(*g)?);
    }
    let axis = (0..4)
        .max_by(|&i, &j| (seg.b[i] - seg.a[i]).abs().total_cmp(&(seg.b[j] - seg.a[j]).abs()))
        .unwrap_or(3);
    let len = seg.length(4);
    if ((seg.b[axis] - seg.a[axis]).abs() - len).abs() > 1e-9 * len.max(1.0) {
        return Err(Error::Invalid("slicing needs a segment parallel to a grid axis".into()));
    }
    let mut out = DiscreteZeroCurrent::new(4);
    for k in 1..g.nodes()[axis] - 1 {
        let y = g.coord(axis, k);
        let s = slice(p, y, axis)?;
        let t = cell_current(&s.pair, &whole_box(*s.pair.grid())?)?;
        for atom in &t.atoms {
            let mut loc = [0.0; 4];
            let mut c = 0;
            for (q, l) in loc.iter_mut().enumerate() {
                if q == axis {
                    *l = y;
                } else {
                    *l = atom.location[c];
                    c += 1;
                }
            }
            out.push(&loc, atom.weight * g.h());
        }
    }
    Ok(out)
}

fn reference(seg: &Segment, n: usize, weight: f64, samples: usize) -> DiscreteZeroCurrent {
    let mut r = DiscreteZeroCurrent::new(n);
    if n == 3 {
        r.push(&seg.a[..3], weight);
        return r;
    }
    let len = seg.length(n);
    for k in 0..samples {
        let t = (k as f64 + 0.5) / samples as f64;
        let x: Vec<f64> = (0..n).map(|q| seg.a[q] + t * (seg.b[q] - seg.a[q])).collect();
        r.push(&x, weight * len / samples as f64);
    }
    r
}

/// Concentration currents of minimized pairs and their distance to `4 pi` times the segment.
///
/// The sign of the reference is taken from the extracted current.
pub fn extract_plateau(pairs: &[Pair], seg: &Segment) -> Result<(Vec<DiscreteZeroCurrent>, PlateauReport)> {
    let mut currents = Vec::with_capacity(pairs.len());
    let mut entries = Vec::with_capacity(pairs.len());
    for p in pairs {
        let g = *p.grid();
        let n = g.dim();
        let t = extracted(p, seg)?;
        let total = t.total();
        let sign = if total < 0.0 { -1.0 } else { 1.0 };
        let length = if n == 3 { 1.0 } else { seg.length(n) };
        let r = reference(seg, n, sign * 4.0 * PI, 256);
        let lo: Vec<f64> = g.lo()[..n].to_vec();
        let hi: Vec<f64> = (0..n).map(|a| g.hi(a)).collect();
        let radius = 0.5 * (0..n).map(|a| hi[a] - lo[a]).fold(f64::INFINITY, f64::min);
        let dict = TestDictionary::lattice(n, &lo, &hi, radius, 1);
        let weak_distance = if t.atoms.is_empty() && r.atoms.is_empty() { 0.0 } else { weak_star_distance(&t, &r, &dict)? };
        let mass = t.mass();
        entries.push(PlateauComparison {
            epsilon: p.epsilon,
            mass,
            mass_ratio: mass / (4.0 * PI * length),
            weak_distance,
            peak_weight: t.atoms.iter().map(|a| a.weight.abs()).fold(0.0, f64::max),
        });
        currents.push(t);
    }
    Ok((currents, PlateauReport { entries }))
}
