use crate::bps::Frame;
use crate::error::{Error, Result};
use crate::forms::MAX_DIM;
use crate::Scalar;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Vertices closer than this are identified when checking closedness.
const VERTEX_TOL: f64 = 1e-9;

/// An oriented simplex of dimension `n - 3` with multiplicity `+-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub mult: i32,
    /// One vertex for points, two (start, end) for segments.
    pub vertices: Vec<[f64; MAX_DIM]>,
}

impl Cell {
    pub fn point(p: &[f64], mult: i32) -> Self {
        Cell { mult, vertices: vec![pad(p)] }
    }

    pub fn segment(p: &[f64], q: &[f64], mult: i32) -> Self {
        Cell { mult, vertices: vec![pad(p), pad(q)] }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn measure(&self, n: usize) -> f64 {
        match self.vertices.len() {
            1 => 1.0,
            _ => dist(&self.vertices[0], &self.vertices[1], n),
        }
    }

    /// Closest point of the cell to `x`.
    pub fn foot(&self, x: &[f64; MAX_DIM], n: usize) -> [f64; MAX_DIM] {
        match self.vertices.len() {
            1 => self.vertices[0],
            _ => {
                let (p, q) = (&self.vertices[0], &self.vertices[1]);
                let mut dd = 0.0;
                let mut dot = 0.0;
                for a in 0..n {
                    dd += (q[a] - p[a]).powi(2);
                    dot += (x[a] - p[a]) * (q[a] - p[a]);
                }
                let t = if dd > 0.0 { (dot / dd).clamp(0.0, 1.0) } else { 0.0 };
                let mut f = [0.0; MAX_DIM];
                for a in 0..n {
                    f[a] = p[a] + t * (q[a] - p[a]);
                }
                f
            }
        }
    }

    pub fn distance(&self, x: &[f64; MAX_DIM], n: usize) -> f64 {
        dist(x, &self.foot(x, n), n)
    }

    /// Distance over generic scalars; the foot point is chosen from the real part.
    pub fn distance_generic<D: Scalar>(&self, x: &[D; MAX_DIM], n: usize) -> D {
        let xr = re_point(x);
        match self.vertices.len() {
            1 => norm_diff(x, &self.vertices[0], n),
            _ => {
                let (p, q) = (&self.vertices[0], &self.vertices[1]);
                let dd: f64 = (0..n).map(|a| (q[a] - p[a]).powi(2)).sum();
                let dot: f64 = (0..n).map(|a| (xr[a] - p[a]) * (q[a] - p[a])).sum();
                let t = dot / dd;
                if t <= 0.0 {
                    norm_diff(x, p, n)
                } else if t >= 1.0 {
                    norm_diff(x, q, n)
                } else {
                    let mut along = D::from(0.0);
                    for a in 0..n {
                        along += (x[a] - p[a]) * ((q[a] - p[a]) / dd.sqrt());
                    }
                    let mut r2 = D::from(0.0);
                    for a in 0..n {
                        let c = x[a] - p[a] - along * ((q[a] - p[a]) / dd.sqrt());
                        r2 += c * c;
                    }
                    r2.sqrt()
                }
            }
        }
    }

    /// Orthonormal map from ambient coordinates onto the oriented normal 3-space, scaled by the
    /// multiplicity sign.
    ///
    /// For a segment with unit direction `t` the rows are the self-dual contractions
    /// `y -> (y ^ t)_{03} + (y ^ t)_{12}`, `(y ^ t)_{13} - (y ^ t)_{02}`, `(y ^ t)_{23} + (y ^ t)_{01}`.
    pub fn normal_frame(&self, n: usize) -> Frame {
        let mut frame = match self.vertices.len() {
            1 => Frame::identity(),
            _ => {
                let (p, q) = (&self.vertices[0], &self.vertices[1]);
                let l = dist(p, q, n);
                let t: Vec<f64> = (0..MAX_DIM).map(|a| (q[a] - p[a]) / l).collect();
                Frame {
                    rows: [
                        [t[3], t[2], -t[1], -t[0]],
                        [-t[2], t[3], t[0], -t[1]],
                        [t[1], -t[0], t[3], -t[2]],
                    ],
                }
            }
        };
        if self.mult < 0 {
            frame = frame.negated();
        }
        frame
    }
}

fn pad(p: &[f64]) -> [f64; MAX_DIM] {
    let mut out = [0.0; MAX_DIM];
    let m = p.len().min(MAX_DIM);
    out[..m].copy_from_slice(&p[..m]);
    out
}

pub(crate) fn dist(x: &[f64; MAX_DIM], y: &[f64; MAX_DIM], n: usize) -> f64 {
    (0..n).map(|a| (x[a] - y[a]).powi(2)).sum::<f64>().sqrt()
}

pub(crate) fn re_point<D: Scalar>(x: &[D; MAX_DIM]) -> [f64; MAX_DIM] {
    [x[0].re(), x[1].re(), x[2].re(), x[3].re()]
}

pub(crate) fn norm_diff<D: Scalar>(x: &[D; MAX_DIM], p: &[f64; MAX_DIM], n: usize) -> D {
    let mut r2 = D::from(0.0);
    for a in 0..n {
        let c = x[a] - p[a];
        r2 += c * c;
    }
    r2.sqrt()
}

/// A polyhedral `(n-3)`-current: points in `R^3` or segments in `R^4`.
///
/// `boundary` cells lie outside the computational domain and close the current up
/// (compensating charges, return paths). `skeleton` lists the points of `K`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolyCurrent {
    pub n: usize,
    pub cells: Vec<Cell>,
    pub boundary: Vec<Cell>,
    pub skeleton: Vec<[f64; MAX_DIM]>,
}

impl PolyCurrent {
    pub fn new(n: usize, cells: Vec<Cell>, boundary: Vec<Cell>, skeleton: Vec<[f64; MAX_DIM]>) -> Result<Self> {
        let p = PolyCurrent { n, cells, boundary, skeleton };
        p.validate()?;
        Ok(p)
    }

    /// Charges `+1` at `plus` and `-1` at `minus`.
    pub fn dipole(plus: [f64; 3], minus: [f64; 3]) -> Self {
        PolyCurrent {
            n: 3,
            cells: vec![Cell::point(&plus, 1), Cell::point(&minus, -1)],
            boundary: vec![],
            skeleton: vec![],
        }
    }

    pub fn empty(n: usize) -> Self {
        PolyCurrent { n, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(3..=4).contains(&self.n) {
            return Err(Error::Invalid(format!("ambient dimension must be 3 or 4, got {}", self.n)));
        }
        for c in self.cells.iter().chain(&self.boundary) {
            if c.dim() + 3 != self.n {
                return Err(Error::Invalid(format!("cell of dimension {} in ambient dimension {}", c.dim(), self.n)));
            }
            if c.mult.abs() != 1 {
                return Err(Error::Invalid(format!("multiplicity must be +-1, got {}", c.mult)));
            }
            if c.vertices.len() == 2 && c.measure(self.n) <= VERTEX_TOL {
                return Err(Error::Invalid("degenerate segment".into()));
            }
        }
        if self.n == 3 {
            let total: i32 = self.all_cells().map(|c| c.mult).sum();
            if total != 0 {
                return Err(Error::Invalid(format!("total charge must vanish, got {total}")));
            }
        } else if let Some(v) = self.open_vertex() {
            return Err(Error::Invalid(format!("current is not closed at {:?}", &v[..self.n])));
        }
        Ok(())
    }

    fn open_vertex(&self) -> Option<[f64; MAX_DIM]> {
        let mut tally: Vec<([f64; MAX_DIM], i32)> = Vec::new();
        for c in self.all_cells() {
            for (v, s) in [(c.vertices[0], -c.mult), (c.vertices[1], c.mult)] {
                match tally.iter_mut().find(|(w, _)| dist(w, &v, self.n) < VERTEX_TOL) {
                    Some(e) => e.1 += s,
                    None => tally.push((v, s)),
                }
            }
        }
        tally.into_iter().find(|(_, s)| *s != 0).map(|(v, _)| v)
    }

    pub fn all_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().chain(&self.boundary)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty() && self.boundary.is_empty()
    }

    /// `sum |mult| * measure` over the interior cells.
    pub fn mass(&self) -> f64 {
        self.cells.iter().map(|c| c.mult.unsigned_abs() as f64 * c.measure(self.n)).sum()
    }

    /// Points of `K`: declared skeleton plus, for segments, every vertex.
    pub fn k_points(&self) -> Vec<[f64; MAX_DIM]> {
        let mut pts = self.skeleton.clone();
        if self.n == 4 {
            for c in self.all_cells() {
                for v in &c.vertices {
                    if !pts.iter().any(|w| dist(w, v, 4) < VERTEX_TOL) {
                        pts.push(*v);
                    }
                }
            }
        }
        pts
    }

    /// Index into [`all_cells`](Self::all_cells) of the nearest cell and its distance.
    pub fn nearest_cell(&self, x: &[f64; MAX_DIM]) -> Option<(usize, f64)> {
        self.all_cells()
            .enumerate()
            .map(|(i, c)| (i, c.distance(x, self.n)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut rows: Vec<(usize, &str, Vec<f64>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let key = words.next().unwrap_or("");
            let nums = words
                .map(|w| w.parse::<f64>().map_err(|_| Error::Parse { line: i + 1, msg: format!("bad number '{w}'") }))
                .collect::<Result<Vec<f64>>>()?;
            match key {
                "ambient" => {
                    if nums.len() != 1 {
                        return Err(Error::Parse { line: i + 1, msg: "ambient takes one value".into() });
                    }
                    n = Some(nums[0] as usize);
                }
                "cell" | "boundary" | "skeleton" => rows.push((i + 1, key, nums)),
                other => return Err(Error::Parse { line: i + 1, msg: format!("unknown keyword '{other}'") }),
            }
        }
        let n = match n {
            Some(n) => n,
            None => rows
                .iter()
                .find(|r| r.1 != "skeleton")
                .map(|r| {
                    let dim = r.2.first().copied().unwrap_or(0.0) as usize;
                    dim + 3
                })
                .unwrap_or(3),
        };
        let mut out = PolyCurrent::empty(n);
        for (line, key, nums) in rows {
            if key == "skeleton" {
                if nums.len() != n {
                    return Err(Error::Parse { line, msg: format!("skeleton point needs {n} coordinates") });
                }
                out.skeleton.push(pad(&nums));
                continue;
            }
            if nums.len() < 2 {
                return Err(Error::Parse { line, msg: "expected '<dim> <mult> <coords>'".into() });
            }
            let dim = nums[0] as usize;
            let mult = nums[1] as i32;
            if nums[0].fract() != 0.0 || nums[1].fract() != 0.0 {
                return Err(Error::Parse { line, msg: "dimension and multiplicity must be integers".into() });
            }
            let coords = &nums[2..];
            if coords.len() != (dim + 1) * n {
                return Err(Error::Parse { line, msg: format!("{}-cell needs {} coordinates", dim, (dim + 1) * n) });
            }
            let cell = Cell { mult, vertices: coords.chunks(n).map(pad).collect() };
            if key == "cell" {
                out.cells.push(cell);
            } else {
                out.boundary.push(cell);
            }
        }
        out.validate()?;
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("ambient {}\n", self.n);
        let mut emit = |key: &str, c: &Cell| {
            let _ = write!(s, "{key} {} {}", c.dim(), c.mult);
            for v in &c.vertices {
                for x in &v[..self.n] {
                    let _ = write!(s, " {x:?}");
                }
            }
            s.push('\n');
        };
        for c in &self.cells {
            emit("cell", c);
        }
        for c in &self.boundary {
            emit("boundary", c);
        }
        for p in &self.skeleton {
            s.push_str("skeleton");
            for x in &p[..self.n] {
                let _ = write!(s, " {x:?}");
            }
            s.push('\n');
        }
        s
    }
}

/// `rho(x) = dist(x, P u S)`, with `S` the declared skeleton points.
pub fn distance_field(p: &PolyCurrent, x: &[f64]) -> f64 {
    let x = pad(x);
    let cells = p.all_cells().map(|c| c.distance(&x, p.n));
    let skel = p.skeleton.iter().map(|s| dist(&x, s, p.n));
    cells.chain(skel).fold(f64::INFINITY, f64::min)
}
