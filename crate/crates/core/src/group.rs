//! Finite groups of *-automorphisms: inner conjugations and site permutations,
//! increasing chains `G_1 ⊂ G_2 ⊂ …`, enumeration and sampling of `S_N`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, ProductState, TensorAlgebra};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Unitarity tolerance for inner automorphisms; also used to identify
/// implementing unitaries when building composition tables.
pub const UNITARY_TOL: f64 = 1e-12;

/// A bijection of `{0..L-1}`, stored as its image array `σ(0), σ(1), …`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection")));
            }
        }
        Ok(Permutation(images))
    }

    pub fn identity(len: usize) -> Self {
        Permutation((0..len).collect())
    }

    pub fn transposition(len: usize, i: usize, j: usize) -> Result<Self> {
        if i >= len || j >= len {
            return Err(Error::InvalidPermutation(format!("transposition ({i} {j}) on {len} sites")));
        }
        let mut p = Self::identity(len);
        p.0.swap(i, j);
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self, n: usize) -> usize {
        self.0[n]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(n, &s)| n == s)
    }

    /// `(self ∘ other)(n) = self(other(n))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        Ok(Permutation(other.0.iter().map(|&k| self.0[k]).collect()))
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (n, &s) in self.0.iter().enumerate() {
            inv[s] = n;
        }
        Permutation(inv)
    }

    /// `Λ_σ`: the moved sites, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(n, &s)| *n != s).map(|(n, _)| n).collect()
    }

    /// Extend to `len` sites, fixing the new ones.
    pub fn extend(&self, len: usize) -> Result<Self> {
        if len < self.len() {
            return Err(Error::InvalidPermutation(format!("cannot shrink {} sites to {len}", self.len())));
        }
        let mut v = self.0.clone();
        v.extend(self.len()..len);
        Ok(Permutation(v))
    }

    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut cycles = 0;
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.0[k];
            }
        }
        cycles
    }

    /// Basis relabelling `i ↦ p(i)` with `p(i)_{σ(n)} = i_n`.
    pub fn basis_map(&self, alg: &TensorAlgebra) -> Result<Vec<usize>> {
        if self.len() != alg.num_sites() {
            return Err(Error::DimensionMismatch { expected: alg.num_sites(), got: self.len() });
        }
        let mut out = Vec::with_capacity(alg.total_dim());
        let mut target = vec![0; self.len()];
        for i in 0..alg.total_dim() {
            for (n, digit) in alg.digits(i).into_iter().enumerate() {
                target[self.0[n]] = digit;
            }
            out.push(alg.index_of(&target));
        }
        Ok(out)
    }

    /// Packed key for fast table lookup (≤ 16 sites).
    fn key(&self) -> Option<u64> {
        (self.len() <= 16).then(|| self.0.iter().enumerate().fold(0u64, |k, (n, &s)| k | ((s as u64) << (4 * n))))
    }
}

/// Conjugate `a` by the permutation operator given as a basis map.
pub fn permute_matrix(a: &ComplexMatrix, map: &[usize]) -> ComplexMatrix {
    let n = map.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = a[(i, j)];
        }
    }
    out
}

/// A *-automorphism of the truncated algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Automorphism {
    /// `a ↦ u a u*`.
    InnerUnitary(ComplexMatrix),
    /// `∏ j_n(b_n) ↦ ∏ j_{σ(n)}(b_n)`.
    SitePermutation(Permutation),
}

impl Automorphism {
    pub fn inner(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NonSquare(u.rows(), u.cols()));
        }
        let dev = (&u.adjoint() * &u).max_abs_diff(&ComplexMatrix::identity(u.rows()));
        if dev > UNITARY_TOL {
            return Err(Error::ConfigInvalid(format!("implementing matrix is not unitary (deviation {dev:.3e})")));
        }
        Ok(Automorphism::InnerUnitary(u))
    }

    pub fn permutation(p: Permutation) -> Self {
        Automorphism::SitePermutation(p)
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        let alg = a.algebra();
        alg.element(self.apply_matrix(a.matrix(), &alg)?)
    }

    pub fn apply_matrix(&self, a: &ComplexMatrix, alg: &TensorAlgebra) -> Result<ComplexMatrix> {
        if a.rows() != alg.total_dim() || !a.is_square() {
            return Err(Error::DimensionMismatch { expected: alg.total_dim(), got: a.rows() });
        }
        match self {
            Automorphism::InnerUnitary(u) => {
                if u.rows() != alg.total_dim() {
                    return Err(Error::DimensionMismatch { expected: alg.total_dim(), got: u.rows() });
                }
                Ok(&(u * a) * &u.adjoint())
            }
            Automorphism::SitePermutation(p) => Ok(permute_matrix(a, &p.basis_map(alg)?)),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            Automorphism::InnerUnitary(u) => Automorphism::InnerUnitary(u.adjoint()),
            Automorphism::SitePermutation(p) => Automorphism::SitePermutation(p.inverse()),
        }
    }

    /// `(self ∘ other)(a) = self(other(a))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Automorphism::InnerUnitary(u), Automorphism::InnerUnitary(v)) => {
                Ok(Automorphism::InnerUnitary(u.try_mul(v)?))
            }
            (Automorphism::SitePermutation(p), Automorphism::SitePermutation(q)) => {
                Ok(Automorphism::SitePermutation(p.compose(q)?))
            }
            _ => Err(Error::NotAGroup("cannot compose inner and permutation automorphisms".into())),
        }
    }

    /// The unitary `V` with `g(a) = V a V*`.
    pub fn implementing_unitary(&self, alg: &TensorAlgebra) -> Result<ComplexMatrix> {
        match self {
            Automorphism::InnerUnitary(u) => Ok(u.clone()),
            Automorphism::SitePermutation(p) => {
                let map = p.basis_map(alg)?;
                let mut m = ComplexMatrix::zeros(map.len(), map.len());
                for (i, &pi) in map.iter().enumerate() {
                    m[(pi, i)] = C64::new(1.0, 0.0);
                }
                Ok(m)
            }
        }
    }

    /// Trace of `a ↦ g(a)` as a linear map on the full matrix algebra.
    pub fn superoperator_trace(&self, alg: &TensorAlgebra) -> f64 {
        match self {
            Automorphism::InnerUnitary(u) => u.trace().norm_sqr(),
            Automorphism::SitePermutation(p) => (alg.site_dim() as f64).powi(2 * p.cycle_count() as i32),
        }
    }

    fn same_as(&self, other: &Self) -> bool {
        match (self, other) {
            (Automorphism::InnerUnitary(u), Automorphism::InnerUnitary(v)) => {
                u.rows() == v.rows() && u.max_abs_diff(v) <= UNITARY_TOL
            }
            (Automorphism::SitePermutation(p), Automorphism::SitePermutation(q)) => p == q,
            _ => false,
        }
    }
}

/// A finite group of automorphisms with uniform Haar weights `1/|G|`.
#[derive(Clone, Debug)]
pub struct FiniteAutomorphismGroup {
    label: String,
    elements: Vec<Automorphism>,
    names: Vec<String>,
    table: Vec<u32>,
    inverses: Vec<usize>,
}

struct Lookup<'a> {
    keyed: Option<HashMap<u64, usize>>,
    elements: &'a [Automorphism],
}

impl<'a> Lookup<'a> {
    fn new(elements: &'a [Automorphism]) -> Self {
        let keyed = elements
            .iter()
            .enumerate()
            .map(|(i, g)| match g {
                Automorphism::SitePermutation(p) => p.key().map(|k| (k, i)),
                Automorphism::InnerUnitary(_) => None,
            })
            .collect::<Option<HashMap<_, _>>>();
        Lookup { keyed, elements }
    }

    fn product(&self, g: &Automorphism, h: &Automorphism) -> Result<Option<usize>> {
        if let (Some(keyed), Automorphism::SitePermutation(p), Automorphism::SitePermutation(q)) = (&self.keyed, g, h) {
            if p.len() != q.len() {
                return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
            }
            let key = q.0.iter().enumerate().fold(0u64, |k, (n, &s)| k | ((p.0[s] as u64) << (4 * n)));
            return Ok(keyed.get(&key).copied());
        }
        let gh = g.compose(h)?;
        Ok(self.elements.iter().position(|e| e.same_as(&gh)))
    }
}

impl FiniteAutomorphismGroup {
    /// Build from a full element list; the first element must be the identity.
    /// Closure is verified by completing the composition table.
    pub fn new(label: impl Into<String>, elements: Vec<Automorphism>, names: Vec<String>) -> Result<Self> {
        let label = label.into();
        let n = elements.len();
        if n == 0 {
            return Err(Error::NotAGroup("empty element list".into()));
        }
        if names.len() != n {
            return Err(Error::NotAGroup(format!("{} names for {n} elements", names.len())));
        }
        if n > u32::MAX as usize {
            return Err(Error::BudgetExceeded(format!("group order {n}")));
        }
        let lookup = Lookup::new(&elements);
        let rows: Vec<Vec<u32>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::with_capacity(n);
                let mut seen = vec![false; n];
                for j in 0..n {
                    let k = lookup
                        .product(&elements[i], &elements[j])?
                        .ok_or_else(|| Error::NotAGroup(format!("{} ∘ {} is not in {label}", names[i], names[j])))?;
                    if std::mem::replace(&mut seen[k], true) {
                        return Err(Error::NotAGroup(format!("row {} of the table repeats an element", names[i])));
                    }
                    row.push(k as u32);
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        if (0..n).any(|j| rows[0][j] as usize != j) || (0..n).any(|i| rows[i][0] as usize != i) {
            return Err(Error::NotAGroup("first element is not the identity".into()));
        }
        let table: Vec<u32> = rows.into_iter().flatten().collect();
        let inverses = (0..n)
            .map(|i| (0..n).find(|&j| table[i * n + j] == 0).expect("Latin square row contains identity"))
            .collect();
        Ok(FiniteAutomorphismGroup { label, elements, names, table, inverses })
    }

    pub fn trivial(num_sites: usize) -> Self {
        Self::new("trivial", vec![Automorphism::permutation(Permutation::identity(num_sites))], vec!["id".into()])
            .expect("trivial group")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Automorphism] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Automorphism {
        &self.elements[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Index of `g_i ∘ g_j`.
    pub fn compose_index(&self, i: usize, j: usize) -> usize {
        self.table[i * self.order() + j] as usize
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        self.inverses[i]
    }

    pub fn index_of(&self, g: &Automorphism) -> Option<usize> {
        self.elements.iter().position(|e| e.same_as(g))
    }

    /// Uniform average `(1/|G|) Σ g(a)`.
    pub fn average(&self, a: &ComplexMatrix, alg: &TensorAlgebra) -> Result<ComplexMatrix> {
        Ok(crate::reduce::mean_matrix(self.order(), |i| self.elements[i].apply_matrix(a, alg))?
            .expect("groups are nonempty"))
    }
}

/// An increasing chain `G_1 ⊂ … ⊂ G_K` with explicit inclusion maps.
#[derive(Clone, Debug)]
pub struct GroupChain {
    groups: Vec<FiniteAutomorphismGroup>,
    levels: Vec<usize>,
    inclusions: Vec<Vec<usize>>,
}

impl GroupChain {
    /// `inclusions[k][i]` is the index in `groups[k+1]` of element `i` of `groups[k]`.
    /// `levels` are the labels `N` of the groups.
    pub fn new(groups: Vec<FiniteAutomorphismGroup>, levels: Vec<usize>, inclusions: Vec<Vec<usize>>) -> Result<Self> {
        if groups.is_empty() || levels.len() != groups.len() || inclusions.len() + 1 != groups.len() {
            return Err(Error::InvalidChain("group, level and inclusion counts disagree".into()));
        }
        for (k, inc) in inclusions.iter().enumerate() {
            let (small, big) = (&groups[k], &groups[k + 1]);
            if inc.len() != small.order() {
                return Err(Error::InvalidChain(format!("inclusion {k} has the wrong length")));
            }
            let mut seen = vec![false; big.order()];
            for &j in inc {
                if j >= big.order() || std::mem::replace(&mut seen[j], true) {
                    return Err(Error::InvalidChain(format!("inclusion {k} is not injective")));
                }
            }
            let ok = (0..small.order()).into_par_iter().all(|i| {
                (0..small.order()).all(|j| inc[small.compose_index(i, j)] == big.compose_index(inc[i], inc[j]))
            });
            if !ok {
                return Err(Error::InvalidChain(format!("inclusion {k} does not preserve composition")));
            }
        }
        Ok(GroupChain { groups, levels, inclusions })
    }

    /// A one-level chain.
    pub fn single(group: FiniteAutomorphismGroup) -> Self {
        GroupChain { groups: vec![group], levels: vec![1], inclusions: vec![] }
    }

    pub fn groups(&self) -> &[FiniteAutomorphismGroup] {
        &self.groups
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn inclusion(&self, k: usize) -> &[usize] {
        &self.inclusions[k]
    }

    pub fn top(&self) -> &FiniteAutomorphismGroup {
        self.groups.last().expect("chains are nonempty")
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// All permutations of sites `0..n` (fixing `n..num_sites`), lexicographic,
/// identity first.
pub fn enumerate_symmetric(n: usize, num_sites: usize) -> Result<Vec<Permutation>> {
    if n > num_sites {
        return Err(Error::InvalidRange(format!("N = {n} exceeds {num_sites} sites")));
    }
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    loop {
        out.push(Permutation(cur.iter().copied().chain(n..num_sites).collect()));
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot has a successor");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    Ok(out)
}

fn factorial_checked(n: usize) -> Option<usize> {
    (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k))
}

/// `S_N` acting on the first `n` of `num_sites` sites.
pub fn symmetric_group(n: usize, num_sites: usize, max_enumeration: usize) -> Result<FiniteAutomorphismGroup> {
    match factorial_checked(n) {
        Some(order) if order <= max_enumeration => {}
        _ => return Err(Error::BudgetExceeded(format!("|S_{n}| exceeds the enumeration cap {max_enumeration}"))),
    }
    let perms = enumerate_symmetric(n, num_sites)?;
    let names = perms.iter().map(|p| format!("{:?}", p.images())).collect();
    FiniteAutomorphismGroup::new(
        format!("S_{n}"),
        perms.into_iter().map(Automorphism::SitePermutation).collect(),
        names,
    )
}

/// `S_1 ⊂ S_2 ⊂ … ⊂ S_nmax` on `num_sites` sites.
pub fn symmetric_group_chain(num_sites: usize, nmax: usize, max_enumeration: usize) -> Result<GroupChain> {
    if nmax == 0 || nmax > num_sites {
        return Err(Error::InvalidRange(format!("max N = {nmax} must lie in 1..={num_sites}")));
    }
    let groups = (1..=nmax).map(|n| symmetric_group(n, num_sites, max_enumeration)).collect::<Result<Vec<_>>>()?;
    let inclusions = groups
        .windows(2)
        .map(|w| {
            let lookup: HashMap<Vec<usize>, usize> = w[1]
                .elements()
                .iter()
                .enumerate()
                .map(|(i, g)| match g {
                    Automorphism::SitePermutation(p) => (p.images().to_vec(), i),
                    Automorphism::InnerUnitary(_) => unreachable!("symmetric groups hold permutations"),
                })
                .collect();
            w[0].elements()
                .iter()
                .map(|g| match g {
                    Automorphism::SitePermutation(p) => lookup
                        .get(p.images())
                        .copied()
                        .ok_or_else(|| Error::InvalidChain("permutation missing from the next level".into())),
                    Automorphism::InnerUnitary(_) => unreachable!("symmetric groups hold permutations"),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    GroupChain::new(groups, (1..=nmax).collect(), inclusions)
}

/// `count` uniform samples from `S_n` (acting on the first `n` of
/// `num_sites` sites), by Fisher–Yates shuffles of one seeded stream.
pub fn sample_permutation(n: usize, num_sites: usize, seed: u64, count: usize) -> Result<Vec<Permutation>> {
    if n > num_sites {
        return Err(Error::InvalidRange(format!("N = {n} exceeds {num_sites} sites")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let mut head: Vec<usize> = (0..n).collect();
            head.shuffle(&mut rng);
            Permutation(head.into_iter().chain(n..num_sites).collect())
        })
        .collect())
}

/// `σ(B) ∩ B = ∅` for `B = {0..m0}`, i.e. `σ(k) > m0` and `σ⁻¹(k) > m0` for all `k ≤ m0`.
pub fn is_outer(p: &Permutation, m0: usize) -> bool {
    (0..=m0.min(p.len().saturating_sub(1))).all(|k| p.image(k) > m0)
}

/// `|S_N^{(m0)}|`, counted by enumeration for `N ≤ 8` and by
/// `(N-b)!² / (N-2b)!` with `b = m0 + 1` beyond.
pub fn outer_count(n: usize, m0: usize) -> Result<u128> {
    if n == 0 || m0 >= n {
        return Err(Error::InvalidRange(format!("need m0 < N, got m0 = {m0}, N = {n}")));
    }
    if n <= 8 {
        return Ok(enumerate_symmetric(n, n)?.iter().filter(|p| is_outer(p, m0)).count() as u128);
    }
    let b = m0 + 1;
    if n < 2 * b {
        return Ok(0);
    }
    let fact = |k: usize| (1..=k as u128).try_fold(1u128, |acc, x| acc.checked_mul(x));
    let overflow = || Error::BudgetExceeded(format!("outer count for N = {n} overflows"));
    let rest = fact(n - b).ok_or_else(overflow)?;
    let injections =
        ((n - 2 * b + 1)..=(n - b)).try_fold(1u128, |acc, x| acc.checked_mul(x as u128)).ok_or_else(overflow)?;
    rest.checked_mul(injections).ok_or_else(overflow)
}

/// `f_N = |S_N^{(m0)}| / N!`.
pub fn outer_fraction(n: usize, m0: usize) -> Result<f64> {
    if n == 0 || m0 >= n {
        return Err(Error::InvalidRange(format!("need m0 < N, got m0 = {m0}, N = {n}")));
    }
    if n <= 8 {
        let total = factorial_checked(n).expect("8! fits") as f64;
        return Ok(outer_count(n, m0)? as f64 / total);
    }
    let b = m0 + 1;
    if n < 2 * b {
        return Ok(0.0);
    }
    Ok((0..b).map(|i| (n - b - i) as f64 / (n - i) as f64).product())
}

/// `R_θ` for `θ = k·π/2`, with exact entries.
fn quarter_rotation(k: usize) -> ComplexMatrix {
    let (c, s) = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][k % 4];
    ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]])
}

/// `{g_θ : θ = 0, π/2, π, 3π/2}` with `g_θ(a) = R_{-θ} a R_θ` on `M_2`.
/// `g_π` acts trivially but is kept as a distinct labelled element.
pub fn build_rotation_group() -> FiniteAutomorphismGroup {
    let elements = (0..4).map(|k| Automorphism::InnerUnitary(quarter_rotation(4 - k))).collect();
    let names = ["g_0", "g_pi/2", "g_pi", "g_3pi/2"].iter().map(|s| s.to_string()).collect();
    FiniteAutomorphismGroup::new("rotation", elements, names).expect("quarter rotations form a group")
}

/// Rotation angle of element `k` of [`build_rotation_group`].
pub fn rotation_angle(k: usize) -> f64 {
    k as f64 * PI / 2.0
}

/// The rotation example: `ρ = diag(e^β, 1)/(1 + e^β)` on `M_2` and its
/// four-element rotation group.
pub fn rotation_example(beta: f64) -> Result<(ProductState, FiniteAutomorphismGroup)> {
    if !beta.is_finite() {
        return Err(Error::ConfigInvalid(format!("beta must be finite, got {beta}")));
    }
    let alg = TensorAlgebra::new(2, 1)?;
    // ρ11 = 1/(1 + e^{-β}) avoids overflow for large β.
    let p = 1.0 / (1.0 + (-beta).exp());
    let rho = ComplexMatrix::from_diag(&[p, 1.0 - p]);
    // ‖ρ‖ = max(p, 1 - p) ∈ [1/2, 1], so C = 2 always satisfies the uniform bound.
    Ok((ProductState::uniform(alg, rho, 2.0)?, build_rotation_group()))
}

/// Chain config: `{"type": "symmetric", "num_sites": L, "max_N": n}` or
/// `{"type": "rotation_example", "beta": b}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChainConfig {
    Symmetric {
        num_sites: usize,
        #[serde(rename = "max_N")]
        max_n: usize,
    },
    RotationExample {
        beta: f64,
    },
}

impl ChainConfig {
    pub fn build(&self, max_enumeration: usize) -> Result<GroupChain> {
        match *self {
            ChainConfig::Symmetric { num_sites, max_n } => symmetric_group_chain(num_sites, max_n, max_enumeration),
            ChainConfig::RotationExample { .. } => Ok(GroupChain::single(build_rotation_group())),
        }
    }
}
