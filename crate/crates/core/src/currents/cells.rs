use super::degree::{degree, DegreeReport, TriSurface};
use super::weak::DiscreteZeroCurrent;
use crate::error::{Error, Result};
use crate::forms::{Grid, MAX_DIM};
use crate::gauge::{energy_densities, z_form, Pair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Fewest grid intervals per cell side.
pub const MIN_CELL_INTERVALS: usize = 8;

/// A cube of the partition, by the node index of its low corner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellBox {
    pub lo: [usize; MAX_DIM],
    pub center: [f64; MAX_DIM],
}

/// Grid-aligned cubes of side `ell` tiling a sub-box of a 3D grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellPartition {
    pub grid: Grid,
    pub ell: f64,
    /// Grid intervals per cell side.
    pub intervals: usize,
    /// Offset of the first cell corner from the grid's low corner, snapped to nodes.
    pub offset: [f64; MAX_DIM],
    pub counts: [usize; MAX_DIM],
    pub cells: Vec<CellBox>,
}

impl CellPartition {
    pub fn new(grid: Grid, ell: f64, offset: &[f64]) -> Result<Self> {
        if grid.dim() != 3 {
            return Err(Error::InvalidGrid("cell partitions live on 3D grids".into()));
        }
        let h = grid.h();
        let m = (ell / h).round() as usize;
        if m < MIN_CELL_INTERVALS {
            return Err(Error::Invalid(format!(
                "cell side {ell} spans {m} grid intervals; at least {MIN_CELL_INTERVALS} are needed"
            )));
        }
        let mut start = [0usize; MAX_DIM];
        let mut counts = [0usize; MAX_DIM];
        let mut snapped = [0.0; MAX_DIM];
        for a in 0..3 {
            let o = offset.get(a).copied().unwrap_or(0.0);
            start[a] = ((o / h).round().rem_euclid(m as f64)) as usize;
            snapped[a] = start[a] as f64 * h;
            let avail = grid.nodes()[a] - 1;
            counts[a] = if avail >= start[a] { (avail - start[a]) / m } else { 0 };
            if counts[a] == 0 {
                return Err(Error::Invalid(format!("no cell of side {ell} fits along axis {a}")));
            }
        }
        let mut cells = Vec::with_capacity(counts[..3].iter().product());
        for k in 0..counts[2] {
            for j in 0..counts[1] {
                for i in 0..counts[0] {
                    let lo = [start[0] + i * m, start[1] + j * m, start[2] + k * m, 0];
                    let center = std::array::from_fn(|a| if a < 3 { grid.coord(a, lo[a]) + 0.5 * m as f64 * h } else { 0.0 });
                    cells.push(CellBox { lo, center });
                }
            }
        }
        Ok(CellPartition { grid, ell: m as f64 * h, intervals: m, offset: snapped, counts, cells })
    }

    /// Node-index range `[start, end]` of the tiled sub-box along `axis`.
    pub fn span(&self, axis: usize) -> (usize, usize) {
        let s = (self.offset[axis] / self.grid.h()).round() as usize;
        (s, s + self.counts[axis] * self.intervals)
    }

    /// Boundary of a cell, two triangles per grid square, with the grid node of each point.
    pub fn cell_surface(&self, cell: &CellBox) -> (TriSurface, Vec<usize>) {
        let g = &self.grid;
        let m = self.intervals;
        let mut index = std::collections::HashMap::new();
        let mut surf = TriSurface::default();
        let mut nodes = Vec::new();
        let mut id = |idx: [usize; 3], surf: &mut TriSurface, nodes: &mut Vec<usize>| -> usize {
            let node = g.index(&idx);
            *index.entry(node).or_insert_with(|| {
                let p = g.point(node);
                surf.points.push([p[0], p[1], p[2]]);
                nodes.push(node);
                surf.points.len() - 1
            })
        };
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            for side in 0..2 {
                for i in 0..m {
                    for j in 0..m {
                        let at = |di: usize, dj: usize| {
                            let mut idx = [0usize; 3];
                            idx[a] = cell.lo[a] + side * m;
                            idx[b] = cell.lo[b] + i + di;
                            idx[c] = cell.lo[c] + j + dj;
                            idx
                        };
                        let v00 = id(at(0, 0), &mut surf, &mut nodes);
                        let v10 = id(at(1, 0), &mut surf, &mut nodes);
                        let v11 = id(at(1, 1), &mut surf, &mut nodes);
                        let v01 = id(at(0, 1), &mut surf, &mut nodes);
                        if side == 1 {
                            surf.triangles.extend([[v00, v10, v11], [v00, v11, v01]]);
                        } else {
                            surf.triangles.extend([[v00, v11, v10], [v00, v01, v11]]);
                        }
                    }
                }
            }
        }
        (surf, nodes)
    }

    /// Cell-local trapezoid weight of a node inside `cell`.
    fn cell_weights(&self, cell: &CellBox) -> impl Iterator<Item = (usize, f64)> + '_ {
        let m = self.intervals;
        let h3 = self.grid.h().powi(3);
        let lo = cell.lo;
        (0..(m + 1).pow(3)).map(move |k| {
            let off = [k % (m + 1), (k / (m + 1)) % (m + 1), k / (m + 1) / (m + 1)];
            let f: f64 = off.iter().map(|&o| if o == 0 || o == m { 0.5 } else { 1.0 }).product();
            (self.grid.index(&[lo[0] + off[0], lo[1] + off[1], lo[2] + off[2]]), f * h3)
        })
    }
}

/// `T = sum_Q (int_Q Z) delta_{x_Q}`.
pub fn cell_current(p: &Pair, part: &CellPartition) -> Result<DiscreteZeroCurrent> {
    if p.dim() != 3 {
        return Err(Error::InvalidGrid("cell currents need a 3D pair (slice 4D pairs first)".into()));
    }
    p.grid().check_same(&part.grid)?;
    let z = z_form(p);
    let z = &z.components()[0];
    let weights: Vec<f64> =
        part.cells.par_iter().map(|c| part.cell_weights(c).map(|(node, w)| w * z[node]).sum()).collect();
    let mut out = DiscreteZeroCurrent::new(3);
    for (c, w) in part.cells.iter().zip(weights) {
        out.push(&c.center[..3], w);
    }
    Ok(out)
}

/// Degrees of `Phi/|Phi|` on every cell boundary.
pub fn cell_degrees(p: &Pair, part: &CellPartition) -> Result<Vec<DegreeReport>> {
    p.grid().check_same(&part.grid)?;
    let phi = &p.phi.components()[0];
    let results: Vec<Result<DegreeReport>> = part
        .cells
        .par_iter()
        .map(|c| {
            let (surf, nodes) = part.cell_surface(c);
            let vals: Vec<_> = nodes.iter().map(|&n| phi[n]).collect();
            degree(&vals, &surf)
        })
        .collect();
    let low: Vec<usize> =
        results.iter().enumerate().filter(|(_, r)| matches!(r, Err(Error::LowModulus(_)))).map(|(i, _)| i).collect();
    if !low.is_empty() {
        return Err(Error::LowModulusCells(low));
    }
    results.into_iter().collect()
}

/// `S = sum_Q -deg(Phi/|Phi| on dQ) delta_{x_Q}`.
pub fn degree_current(p: &Pair, part: &CellPartition) -> Result<DiscreteZeroCurrent> {
    let degs = cell_degrees(p, part)?;
    let mut out = DiscreteZeroCurrent::new(3);
    for (c, d) in part.cells.iter().zip(degs) {
        out.push(&c.center[..3], -f64::from(d.degree));
    }
    Ok(out)
}

/// `M(T - 4 pi S)`.
pub fn quantization_gap(p: &Pair, part: &CellPartition) -> Result<f64> {
    let t = cell_current(p, part)?;
    let s = degree_current(p, part)?;
    Ok(t.difference(&s.scaled(4.0 * PI))?.mass())
}

/// `int_{S_2} e_eps + eps^-1 int_{S_2} (1 - |Phi|)^2` over the faces of the partition.
pub fn skeleton_energy(p: &Pair, part: &CellPartition, density: &[f64]) -> f64 {
    let g = &part.grid;
    let h2 = g.h() * g.h();
    let spans: Vec<(usize, usize)> = (0..3).map(|a| part.span(a)).collect();
    let mut total = 0.0;
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        for k in 0..=part.counts[a] {
            let plane = spans[a].0 + k * part.intervals;
            for i in spans[b].0..=spans[b].1 {
                for j in spans[c].0..=spans[c].1 {
                    let fb = if i == spans[b].0 || i == spans[b].1 { 0.5 } else { 1.0 };
                    let fc = if j == spans[c].0 || j == spans[c].1 { 0.5 } else { 1.0 };
                    let mut idx = [0usize; 3];
                    idx[a] = plane;
                    idx[b] = i;
                    idx[c] = j;
                    let node = g.index(&idx);
                    let defect = (1.0 - p.phi_at(node).norm()).powi(2) / p.epsilon;
                    total += fb * fc * h2 * (density[node] + defect);
                }
            }
        }
    }
    total
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkeletonChoice {
    pub partition: CellPartition,
    pub energy: f64,
    /// Every distinct offset tried with its skeleton energy.
    pub trials: Vec<([f64; 3], f64)>,
}

impl SkeletonChoice {
    pub fn median(&self) -> f64 {
        let mut e: Vec<f64> = self.trials.iter().map(|t| t.1).collect();
        e.sort_by(f64::total_cmp);
        let m = e.len();
        if m % 2 == 1 {
            e[m / 2]
        } else {
            0.5 * (e[m / 2 - 1] + e[m / 2])
        }
    }
}

/// Among `trials` random grid-snapped offsets, the partition with the least skeleton energy.
pub fn select_skeleton(p: &Pair, ell: f64, trials: usize, seed: u64) -> Result<SkeletonChoice> {
    if trials == 0 {
        return Err(Error::Invalid("at least one trial is needed".into()));
    }
    let (dd, yy) = energy_densities(p);
    let density: Vec<f64> = dd.iter().zip(&yy).map(|(a, b)| a + b).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tried: Vec<([f64; 3], f64, CellPartition)> = Vec::new();
    for _ in 0..trials {
        let o = [rng.gen_range(0.0..ell), rng.gen_range(0.0..ell), rng.gen_range(0.0..ell)];
        let part = CellPartition::new(*p.grid(), ell, &o)?;
        let key = [part.offset[0], part.offset[1], part.offset[2]];
        if tried.iter().any(|t| t.0 == key) {
            continue;
        }
        let e = skeleton_energy(p, &part, &density);
        tried.push((key, e, part));
    }
    let emin = tried.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let best = tried
        .iter()
        .enumerate()
        .filter(|(_, t)| t.1 <= emin + 1e-12 * emin.abs())
        .min_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).expect("finite offsets"))
        .map(|(i, _)| i)
        .expect("at least one trial");
    let trials = tried.iter().map(|t| (t.0, t.1)).collect();
    let (_, energy, partition) = tried.swap_remove(best);
    Ok(SkeletonChoice { partition, energy, trials })
}
