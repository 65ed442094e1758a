//! Deterministic parallel reductions over index ranges.
//!
//! Indices are cut into fixed-size blocks. Each block is folded sequentially in
//! index order, and the block results are combined by a pairwise tree. Block
//! boundaries do not depend on the number of worker threads, so sums are
//! bit-identical however the work is scheduled.

use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::ComplexMatrix;

pub const BLOCK: usize = 32;

/// Reduce `map(0) ⊕ map(1) ⊕ … ⊕ map(n-1)`; `None` when `n == 0`.
pub fn tree_reduce<T, M, C>(n: usize, map: M, combine: C) -> Result<Option<T>>
where
    T: Send,
    M: Fn(usize) -> Result<T> + Sync,
    C: Fn(T, T) -> T + Sync,
{
    let blocks: Vec<T> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n);
            let mut acc = map(lo)?;
            for i in lo + 1..hi {
                acc = combine(acc, map(i)?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(pairwise(blocks, &combine))
}

fn pairwise<T, C: Fn(T, T) -> T>(mut level: Vec<T>, combine: &C) -> Option<T> {
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        level = next;
    }
    level.pop()
}

/// Uniform average `(1/n) Σ map(i)` of matrices.
pub fn mean_matrix<M>(n: usize, map: M) -> Result<Option<ComplexMatrix>>
where
    M: Fn(usize) -> Result<ComplexMatrix> + Sync,
{
    let sum = tree_reduce(n, map, |mut a, b| {
        a += &b;
        a
    })?;
    Ok(sum.map(|s| s.scale_real(1.0 / n as f64)))
}
