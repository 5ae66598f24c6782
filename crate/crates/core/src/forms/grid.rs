use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Maximum ambient dimension handled by the crate.
pub const MAX_DIM: usize = 4;

/// Uniform tensor grid on a box in `R^n`, `n` in {3, 4}, equal spacing on every axis.
///
/// Nodes are stored with axis 0 varying fastest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    nodes: [usize; MAX_DIM],
    lo: [f64; MAX_DIM],
    h: f64,
}

impl Grid {
    /// Builds a grid from per-axis node counts and box corners.
    pub fn new(nodes: &[usize], lo: &[f64], hi: &[f64]) -> Result<Self> {
        let n = nodes.len();
        if !(3..=MAX_DIM).contains(&n) || lo.len() != n || hi.len() != n {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 3 or 4 with matching corners (got {n} axes)"
            )));
        }
        if let Some(a) = nodes.iter().position(|&m| m < 5) {
            return Err(Error::InvalidGrid(format!("axis {a} has fewer than 5 nodes")));
        }
        let h = (hi[0] - lo[0]) / (nodes[0] - 1) as f64;
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidGrid("non-positive spacing".into()));
        }
        for a in 1..n {
            let ha = (hi[a] - lo[a]) / (nodes[a] - 1) as f64;
            if (ha - h).abs() > 1e-9 * h {
                return Err(Error::InvalidGrid(format!(
                    "unequal spacing: axis 0 has h={h}, axis {a} has h={ha}"
                )));
            }
        }
        let mut g = Grid { n, nodes: [1; MAX_DIM], lo: [0.0; MAX_DIM], h };
        g.nodes[..n].copy_from_slice(nodes);
        g.lo[..n].copy_from_slice(lo);
        Ok(g)
    }

    /// Grid with spacing `h` starting at `lo` with the given node counts.
    pub fn with_spacing(nodes: &[usize], lo: &[f64], h: f64) -> Result<Self> {
        let hi: Vec<f64> = lo.iter().zip(nodes).map(|(l, &m)| l + h * (m - 1) as f64).collect();
        Self::new(nodes, lo, &hi)
    }

    /// Cube `[-half, half]^n` with spacing `h`; `2 half / h` must be an integer.
    pub fn cube(n: usize, half: f64, h: f64) -> Result<Self> {
        let m = (2.0 * half / h).round() as usize + 1;
        Self::new(&vec![m; n], &vec![-half; n], &vec![half; n])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes[..self.n]
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo[..self.n]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.lo[axis] + self.h * (self.nodes[axis] - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nodes().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.nodes[..axis].iter().product()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for a in (0..self.n).rev() {
            idx = idx * self.nodes[a] + multi[a];
        }
        idx
    }

    pub fn multi(&self, mut node: usize) -> [usize; MAX_DIM] {
        let mut m = [0; MAX_DIM];
        for a in 0..self.n {
            m[a] = node % self.nodes[a];
            node /= self.nodes[a];
        }
        m
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + self.h * i as f64
    }

    /// Coordinates of a node; unused trailing entries are zero.
    pub fn point(&self, node: usize) -> [f64; MAX_DIM] {
        let m = self.multi(node);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.n {
            x[a] = self.coord(a, m[a]);
        }
        x
    }

    /// One-dimensional trapezoid weight factor (without `h`).
    pub fn trapezoid_factor(&self, axis: usize, i: usize) -> f64 {
        if i == 0 || i + 1 == self.nodes[axis] {
            0.5
        } else {
            1.0
        }
    }

    /// Trapezoid quadrature weight of a node for volume integrals.
    pub fn weight(&self, node: usize) -> f64 {
        let m = self.multi(node);
        (0..self.n).map(|a| self.trapezoid_factor(a, m[a])).product::<f64>() * self.h.powi(self.n as i32)
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    pub fn on_boundary(&self, node: usize) -> bool {
        let m = self.multi(node);
        (0..self.n).any(|a| m[a] == 0 || m[a] + 1 == self.nodes[a])
    }

    /// Nodes at least `depth` layers away from every face.
    pub fn is_interior(&self, node: usize, depth: usize) -> bool {
        let m = self.multi(node);
        (0..self.n).all(|a| m[a] >= depth && m[a] + depth < self.nodes[a])
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n
            && self.nodes == other.nodes
            && (self.h - other.h).abs() <= 1e-12 * self.h
            && (0..self.n).all(|a| (self.lo[a] - other.lo[a]).abs() <= 1e-12 * self.h.max(1.0))
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Grid with `h` halved on the same box.
    pub fn refined(&self) -> Grid {
        let nodes: Vec<usize> = self.nodes().iter().map(|m| 2 * m - 1).collect();
        Grid::with_spacing(&nodes, self.lo(), self.h / 2.0).expect("refinement of a valid grid")
    }

    /// Nearest node index to `x` (clamped to the box).
    pub fn nearest(&self, x: &[f64]) -> usize {
        let mut m = [0usize; MAX_DIM];
        for a in 0..self.n {
            let t = ((x[a] - self.lo[a]) / self.h).round();
            m[a] = t.clamp(0.0, (self.nodes[a] - 1) as f64) as usize;
        }
        self.index(&m[..self.n])
    }

    /// The hyperplane grid obtained by dropping `axis`, with the remaining axes in order.
    pub fn drop_axis(&self, axis: usize) -> Result<Grid> {
        let nodes: Vec<usize> = (0..self.n).filter(|&a| a != axis).map(|a| self.nodes[a]).collect();
        let lo: Vec<f64> = (0..self.n).filter(|&a| a != axis).map(|a| self.lo[a]).collect();
        Grid::with_spacing(&nodes, &lo, self.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(&[5, 5], &[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(Grid::new(&[4, 5, 5], &[0.0; 3], &[1.0; 3]).is_err());
        assert!(Grid::new(&[5, 5, 5], &[0.0; 3], &[1.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn index_roundtrip_and_weights() {
        let g = Grid::new(&[5, 6, 7], &[0.0, 0.0, 0.0], &[1.0, 1.25, 1.5]).unwrap();
        for node in 0..g.len() {
            assert_eq!(g.index(&g.multi(node)[..3]), node);
        }
        let vol: f64 = g.weights().iter().sum();
        assert!((vol - 1.875).abs() < 1e-12);
    }
}
