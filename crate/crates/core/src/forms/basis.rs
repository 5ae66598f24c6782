//! Multi-indices `I = (i_1 < ... < i_k)` stored as bitmasks.

pub type Mask = u8;

pub fn degree_of(mask: Mask) -> usize {
    mask.count_ones() as usize
}

/// Increasing index tuple of a mask.
pub fn indices(mask: Mask) -> impl Iterator<Item = usize> {
    (0..8).filter(move |i| mask & (1 << i) != 0)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn count(n: usize, k: usize) -> usize {
    binomial(n, k)
}

/// All `k`-subsets of `{0..n}` in lexicographic order of their increasing tuples.
pub fn basis(n: usize, k: usize) -> Vec<Mask> {
    let mut out = Vec::with_capacity(binomial(n, k));
    fn rec(n: usize, k: usize, start: usize, acc: Mask, out: &mut Vec<Mask>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..n {
            rec(n, k - 1, i + 1, acc | (1 << i), out);
        }
    }
    rec(n, k, 0, 0, &mut out);
    out
}

/// Position of `mask` inside `basis(n, degree_of(mask))`.
pub fn position(n: usize, mask: Mask) -> usize {
    basis(n, degree_of(mask))
        .iter()
        .position(|&m| m == mask)
        .expect("mask within ambient dimension")
}

/// Sign of `dx_I ^ dx_J = sign dx_{I u J}` for disjoint `I, J`.
pub fn shuffle_sign(i: Mask, j: Mask) -> f64 {
    debug_assert_eq!(i & j, 0);
    let inversions: u32 = indices(j).map(|b| (i >> (b + 1)).count_ones()).sum();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of `dx_a ^ dx_I = sign dx_{I u a}`, i.e. `(-1)^{#{i in I : i < a}}`.
pub fn insert_sign(a: usize, i: Mask) -> f64 {
    shuffle_sign(1 << a, i)
}

/// Hodge dual data: `*dx_I = sign dx_{I^c}` on oriented `R^n`.
pub fn hodge(n: usize, i: Mask) -> (Mask, f64) {
    let full: Mask = ((1u16 << n) - 1) as Mask;
    let c = full & !i;
    (c, shuffle_sign(i, c))
}

pub fn label(mask: Mask) -> String {
    if mask == 0 {
        return "1".into();
    }
    indices(mask).map(|i| format!("dx{i}")).collect::<Vec<_>>().join("^")
}
