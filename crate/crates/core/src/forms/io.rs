//! Binary and CSV serialization of forms.
//!
//! Binary layout (little endian): magic `YMHF`, `n: u32`, `k: u32`, `nodes: [u64; n]`,
//! `lo: [f64; n]`, `hi: [f64; n]`, `value_kind: u8`, then each component array in
//! lexicographic multi-index order, each node value as `width` consecutive `f64`.

use super::{basis, Coeff, Form, Grid};
use crate::error::{Error, Result};
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"YMHF";

pub fn write_binary<V: Coeff, W: Write>(f: &Form<V>, mut w: W) -> Result<()> {
    let g = f.grid();
    let n = g.dim();
    w.write_all(MAGIC)?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&(f.degree() as u32).to_le_bytes())?;
    for &m in g.nodes() {
        w.write_all(&(m as u64).to_le_bytes())?;
    }
    for a in 0..n {
        w.write_all(&g.lo()[a].to_le_bytes())?;
    }
    for a in 0..n {
        w.write_all(&g.hi(a).to_le_bytes())?;
    }
    w.write_all(&[V::KIND.code()])?;
    let width = V::KIND.width();
    for comp in f.components() {
        for v in comp {
            for p in &v.parts()[..width] {
                w.write_all(&p.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_binary<V: Coeff, R: Read>(mut r: R) -> Result<Form<V>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Invalid("not a form file".into()));
    }
    let n = read_u32(&mut r)? as usize;
    let k = read_u32(&mut r)? as usize;
    if !(3..=4).contains(&n) {
        return Err(Error::Invalid(format!("stored dimension {n} unsupported")));
    }
    let nodes = (0..n).map(|_| read_u64(&mut r).map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let lo = (0..n).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let hi = (0..n).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let mut kind = [0u8; 1];
    r.read_exact(&mut kind)?;
    if kind[0] != V::KIND.code() {
        return Err(Error::Invalid(format!("value kind {} does not match requested {:?}", kind[0], V::KIND)));
    }
    let grid = Grid::new(&nodes, &lo, &hi)?;
    let width = V::KIND.width();
    let mut parts = [0.0; 4];
    let mut comps = Vec::new();
    for _ in 0..basis::count(n, k) {
        let mut comp = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            for p in parts.iter_mut().take(width) {
                *p = read_f64(&mut r)?;
            }
            comp.push(V::from_parts(&parts[..width]));
        }
        comps.push(comp);
    }
    Form::from_components(grid, k, comps)
}

/// CSV with node coordinates followed by one column per component part.
pub fn write_csv<V: Coeff, W: Write>(f: &Form<V>, mut w: W) -> Result<()> {
    let g = f.grid();
    let n = g.dim();
    let mut header: Vec<String> = (0..n).map(|a| format!("x{a}")).collect();
    for mask in f.masks() {
        for part in V::KIND.part_names() {
            header.push(format!("{}.{}", basis::label(mask), part));
        }
    }
    writeln!(w, "{}", header.join(","))?;
    let width = V::KIND.width();
    for node in 0..g.len() {
        let x = g.point(node);
        let mut row: Vec<String> = x[..n].iter().map(|v| format!("{v}")).collect();
        for comp in f.components() {
            for p in &comp[node].parts()[..width] {
                row.push(format!("{p:e}"));
            }
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
