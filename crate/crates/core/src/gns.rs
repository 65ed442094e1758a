//! GNS representation of `(A, φ)` for a faithful density `ρ`: the unitaries
//! `U_g`, the projection `P_G`, the operator `K_G`, the vector `Φ_G`, the
//! invariant state `ψ_G`, and Hypothesis-(H) diagnostics along a chain.
//!
//! A vector is stored as the algebra element `a` whose class it is. Dense
//! coordinates use the isometry `a ↦ a ρ^{1/2}` flattened row-major, so the
//! basis vector with coordinate index `k·D + l` is the class of `e_kl ρ^{-1/2}`.

use std::collections::{HashMap, HashSet};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{ProductState, TensorAlgebra};
use crate::error::{Error, Result};
use crate::group::{is_outer, Automorphism, FiniteAutomorphismGroup, GroupChain};
use crate::linalg::{eigh, inverse, min_singular_value, psd_sqrt, ComplexMatrix, DEFAULT_PSD_TOL};
use crate::reduce::{mean_matrix, tree_reduce};
use crate::sqi::{max_pairwise_commutator, RnCocycle};

/// Default cap on the GNS dimension `D²` for dense operators.
pub const DEFAULT_DENSE_CAP: usize = 4096;
/// Commutator tolerance for products `(x_g x_h)^{1/2}`.
pub const COCYCLE_COMMUTATION_TOL: f64 = 1e-10;
/// Largest number of distinct witness pairs evaluated for `ε₀`.
pub const DEFAULT_PAIR_BUDGET: usize = 50_000_000;

/// The GNS triple `(H, π, Φ)` of a faithful state with density `ρ`.
#[derive(Clone, Debug)]
pub struct GnsSpace {
    algebra: TensorAlgebra,
    rho: ComplexMatrix,
    rho_sqrt: ComplexMatrix,
    rho_inv_sqrt: ComplexMatrix,
    dense_cap: usize,
}

/// The class of an algebra element in the GNS space.
#[derive(Clone, Debug, PartialEq)]
pub struct GnsVector(pub ComplexMatrix);

impl GnsVector {
    pub fn element(&self) -> &ComplexMatrix {
        &self.0
    }
}

pub fn gns_build(phi: &ProductState) -> Result<GnsSpace> {
    gns_build_with_cap(phi, DEFAULT_DENSE_CAP)
}

pub fn gns_build_with_cap(phi: &ProductState, dense_cap: usize) -> Result<GnsSpace> {
    let rho = phi.rho().clone();
    let e = eigh(&rho, DEFAULT_PSD_TOL)?;
    let min = e.min_value();
    if !(min > 0.0) {
        return Err(Error::StateSingular(min));
    }
    let rho_sqrt = e.map(f64::sqrt);
    let rho_inv_sqrt = e.map(|v| 1.0 / v.sqrt());
    Ok(GnsSpace { algebra: phi.algebra(), rho, rho_sqrt, rho_inv_sqrt, dense_cap })
}

fn right_mul(a: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    if m.is_diagonal() {
        a.mul_diag_right(&m.diagonal())
    } else {
        a * m
    }
}

impl GnsSpace {
    pub fn algebra(&self) -> TensorAlgebra {
        self.algebra
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn rho_sqrt(&self) -> &ComplexMatrix {
        &self.rho_sqrt
    }

    pub fn hilbert_dim(&self) -> usize {
        self.algebra.total_dim().pow(2)
    }

    pub fn dense_cap(&self) -> usize {
        self.dense_cap
    }

    /// `Φ`: the class of the identity.
    pub fn cyclic_vector(&self) -> GnsVector {
        GnsVector(ComplexMatrix::identity(self.algebra.total_dim()))
    }

    /// `π(a)Φ`.
    pub fn vector(&self, a: ComplexMatrix) -> Result<GnsVector> {
        let d = self.algebra.total_dim();
        if !a.is_square() || a.rows() != d {
            return Err(Error::DimensionMismatch { expected: d, got: a.rows() });
        }
        Ok(GnsVector(a))
    }

    /// Isometric coordinates `a ρ^{1/2}`, row-major.
    pub fn coords(&self, v: &GnsVector) -> Vec<C64> {
        right_mul(&v.0, &self.rho_sqrt).into_vec()
    }

    pub fn from_coords(&self, c: Vec<C64>) -> Result<GnsVector> {
        let d = self.algebra.total_dim();
        let m = ComplexMatrix::from_vec(d, d, c)?;
        Ok(GnsVector(right_mul(&m, &self.rho_inv_sqrt)))
    }

    /// Orthonormal basis vector `e_kl ρ^{-1/2}` with index `k·D + l`.
    pub fn basis_vector(&self, index: usize) -> GnsVector {
        let d = self.algebra.total_dim();
        let e = ComplexMatrix::unit(d, index / d, index % d);
        GnsVector(right_mul(&e, &self.rho_inv_sqrt))
    }

    /// `⟨a, b⟩ = tr(ρ a* b)`.
    pub fn inner(&self, a: &GnsVector, b: &GnsVector) -> C64 {
        self.coords(a).iter().zip(self.coords(b)).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn norm_sq(&self, a: &GnsVector) -> f64 {
        self.coords(a).iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self, a: &GnsVector) -> f64 {
        self.norm_sq(a).sqrt()
    }

    pub fn distance(&self, a: &GnsVector, b: &GnsVector) -> f64 {
        self.norm(&GnsVector(&a.0 - &b.0))
    }

    /// `⟨Φ, π(a)Φ⟩ = φ(a)`.
    pub fn state(&self, a: &ComplexMatrix) -> C64 {
        self.rho.trace_product(a)
    }

    fn check_dense(&self) -> Result<()> {
        let dim = self.hilbert_dim();
        if dim > self.dense_cap {
            Err(Error::DenseCapExceeded { dim, cap: self.dense_cap })
        } else {
            Ok(())
        }
    }
}

/// `U_g: b ↦ g(b) x_{g⁻¹}^{1/2}`.
#[derive(Clone, Debug)]
pub struct UnitaryOp {
    automorphism: Automorphism,
    x_inv_sqrt: ComplexMatrix,
    basis_map: Option<Vec<usize>>,
    x_diag: Option<Vec<C64>>,
}

impl UnitaryOp {
    pub fn new(alg: &TensorAlgebra, automorphism: Automorphism, x_inv_sqrt: ComplexMatrix) -> Result<Self> {
        let basis_map = match &automorphism {
            Automorphism::SitePermutation(p) => Some(p.basis_map(alg)?),
            Automorphism::InnerUnitary(_) => None,
        };
        let x_diag = x_inv_sqrt.is_diagonal().then(|| x_inv_sqrt.diagonal());
        Ok(UnitaryOp { automorphism, x_inv_sqrt, basis_map, x_diag })
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.automorphism
    }

    pub fn x_inv_sqrt(&self) -> &ComplexMatrix {
        &self.x_inv_sqrt
    }

    fn apply(&self, alg: &TensorAlgebra, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let gb = match &self.basis_map {
            Some(map) => crate::group::permute_matrix(b, map),
            None => self.automorphism.apply_matrix(b, alg)?,
        };
        Ok(match &self.x_diag {
            Some(d) => gb.mul_diag_right(d),
            None => &gb * &self.x_inv_sqrt,
        })
    }
}

/// Operators on the GNS space, applied matrix-free unless `Dense`.
#[derive(Clone, Debug)]
pub enum GnsOperator {
    /// `π(a)`.
    LeftMult(ComplexMatrix),
    /// `U_g`.
    Unitary(Box<UnitaryOp>),
    /// Uniform average of the listed operators.
    Average(Vec<GnsOperator>),
    /// Matrix in the isometric coordinates.
    Dense(ComplexMatrix),
}

impl GnsOperator {
    pub fn identity(space: &GnsSpace) -> Self {
        GnsOperator::LeftMult(ComplexMatrix::identity(space.algebra.total_dim()))
    }

    pub fn apply(&self, space: &GnsSpace, v: &GnsVector) -> Result<GnsVector> {
        match self {
            GnsOperator::LeftMult(a) => Ok(GnsVector(a.try_mul(&v.0)?)),
            GnsOperator::Unitary(u) => Ok(GnsVector(u.apply(&space.algebra, &v.0)?)),
            GnsOperator::Average(ops) => {
                let m = mean_matrix(ops.len(), |i| Ok(ops[i].apply(space, v)?.0))?
                    .ok_or_else(|| Error::ConsistencyFailure("empty average".into()))?;
                Ok(GnsVector(m))
            }
            GnsOperator::Dense(m) => {
                let c = space.coords(v);
                let out: Vec<C64> = (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)] * c[j]).sum()).collect();
                space.from_coords(out)
            }
        }
    }

    /// Dense matrix in the isometric coordinates; needs `D² ≤` the dense cap.
    pub fn to_dense(&self, space: &GnsSpace) -> Result<ComplexMatrix> {
        space.check_dense()?;
        if let GnsOperator::Dense(m) = self {
            return Ok(m.clone());
        }
        let n = space.hilbert_dim();
        let cols = (0..n)
            .map(|j| Ok(space.coords(&self.apply(space, &space.basis_vector(j))?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]))
    }

    /// `GnsOperator::Dense` form of `self ∘ other`.
    pub fn compose_dense(&self, other: &GnsOperator, space: &GnsSpace) -> Result<GnsOperator> {
        Ok(GnsOperator::Dense(&self.to_dense(space)? * &other.to_dense(space)?))
    }
}

/// `U_g` for element `i` of `group`.
pub fn unitary_u(
    space: &GnsSpace,
    group: &FiniteAutomorphismGroup,
    cocycle: &RnCocycle,
    i: usize,
) -> Result<GnsOperator> {
    let inv = group.inverse_index(i);
    let x = cocycle.x_sqrt(inv)?.clone();
    Ok(GnsOperator::Unitary(Box::new(UnitaryOp::new(&space.algebra, group.element(i).clone(), x)?)))
}

/// `P_G = (1/|G|) Σ U_g`.
pub fn projection_p(space: &GnsSpace, group: &FiniteAutomorphismGroup, cocycle: &RnCocycle) -> Result<GnsOperator> {
    let ops = (0..group.order()).map(|i| unitary_u(space, group, cocycle, i)).collect::<Result<Vec<_>>>()?;
    Ok(GnsOperator::Average(ops))
}

/// `K_G = π((1/|G|) Σ x_g^{1/2})` with its invertibility certificate.
#[derive(Clone, Debug)]
pub struct KOperator {
    pub matrix: ComplexMatrix,
    pub min_singular_value: f64,
}

impl KOperator {
    pub fn operator(&self) -> GnsOperator {
        GnsOperator::LeftMult(self.matrix.clone())
    }

    /// Bounded inverse certified when the smallest singular value exceeds `tol`.
    pub fn certified(&self, tol: f64) -> bool {
        self.min_singular_value > tol
    }
}

pub fn average_sqrt_derivative(cocycle: &RnCocycle) -> Result<ComplexMatrix> {
    let xs = cocycle.sqrt_derivatives();
    mean_matrix(xs.len(), |i| Ok(xs[i].clone()))?.ok_or(Error::MissingDerivative(0))
}

pub fn k_operator(cocycle: &RnCocycle) -> Result<KOperator> {
    let matrix = average_sqrt_derivative(cocycle)?;
    let min_singular_value = min_singular_value(&matrix)?;
    Ok(KOperator { matrix, min_singular_value })
}

/// `Φ_G = K_G Φ`, cross-checked against `P_G Φ` and `U_g Φ_G = Φ_G`.
pub fn phi_g_vector(
    space: &GnsSpace,
    group: &FiniteAutomorphismGroup,
    cocycle: &RnCocycle,
    tol: f64,
) -> Result<GnsVector> {
    let phi = space.cyclic_vector();
    let k = k_operator(cocycle)?;
    let by_k = k.operator().apply(space, &phi)?;
    let by_p = projection_p(space, group, cocycle)?.apply(space, &phi)?;
    let gap = space.distance(&by_k, &by_p);
    if gap > tol {
        return Err(Error::ConsistencyFailure(format!("|P_G Φ − K_G Φ| = {gap:.3e}")));
    }
    for i in 0..group.order() {
        let moved = unitary_u(space, group, cocycle, i)?.apply(space, &by_k)?;
        let dev = space.distance(&moved, &by_k);
        if dev > tol {
            return Err(Error::ConsistencyFailure(format!("U_{} Φ_G differs from Φ_G by {dev:.3e}", group.name(i))));
        }
    }
    Ok(by_k)
}

/// `ψ_G(x) = ⟨Φ_G, x Φ_G⟩ / ‖Φ_G‖²`.
#[derive(Clone, Debug)]
pub struct InvariantState {
    phi_g: GnsVector,
    norm_sq: f64,
}

impl InvariantState {
    /// Fails with `HypothesisHViolated` unless `‖Φ_G‖² > tol`.
    pub fn new(space: &GnsSpace, phi_g: GnsVector, tol: f64) -> Result<Self> {
        let norm_sq = space.norm_sq(&phi_g);
        if !(norm_sq > tol) {
            return Err(Error::HypothesisHViolated(norm_sq));
        }
        Ok(InvariantState { phi_g, norm_sq })
    }

    pub fn phi_g(&self) -> &GnsVector {
        &self.phi_g
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `ψ_G(π(a)) = tr(ρ Φ_G* a Φ_G) / ‖Φ_G‖²`.
    pub fn eval_element(&self, space: &GnsSpace, a: &ComplexMatrix) -> Result<C64> {
        let v = &self.phi_g.0;
        let inner = v.adjoint().try_mul(&a.try_mul(v)?)?;
        Ok(space.rho.trace_product(&inner) / self.norm_sq)
    }

    pub fn eval(&self, space: &GnsSpace, x: &GnsOperator) -> Result<C64> {
        let xv = x.apply(space, &self.phi_g)?;
        Ok(space.inner(&self.phi_g, &xv) / self.norm_sq)
    }
}

pub fn psi_state(space: &GnsSpace, phi_g: &GnsVector, x: &GnsOperator, tol: f64) -> Result<C64> {
    InvariantState::new(space, phi_g.clone(), tol)?.eval(space, x)
}

/// Orthonormal basis (coordinate vectors) of `Fix_G(H)`, from the dense `P_G`.
pub fn fixed_subspace_basis(
    space: &GnsSpace,
    group: &FiniteAutomorphismGroup,
    cocycle: &RnCocycle,
) -> Result<Vec<Vec<C64>>> {
    let p = projection_p(space, group, cocycle)?.to_dense(space)?;
    let e = eigh(&p.hermitian_part(), f64::INFINITY)?;
    let n = p.rows();
    Ok(e.values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.5)
        .map(|(k, _)| (0..n).map(|i| e.vectors[(i, k)]).collect())
        .collect())
}

/// A basis diagonalizing every cocycle element at once.
#[derive(Clone, Debug)]
pub struct CommonEigenbasis {
    vectors: Option<ComplexMatrix>,
    weights: Vec<f64>,
}

impl CommonEigenbasis {
    /// Fails with `NonCommutingCocycle` when the elements do not commute.
    pub fn new(rho: &ComplexMatrix, xs: &[ComplexMatrix]) -> Result<Self> {
        if xs.iter().all(ComplexMatrix::is_diagonal) {
            return Ok(CommonEigenbasis { vectors: None, weights: rho.diagonal().iter().map(|z| z.re).collect() });
        }
        let worst = max_pairwise_commutator(xs);
        if worst > COCYCLE_COMMUTATION_TOL {
            return Err(Error::NonCommutingCocycle(worst));
        }
        // A generic real combination separates the joint eigenspaces.
        let d = rho.rows();
        let mut combo = ComplexMatrix::zeros(d, d);
        for (k, x) in xs.iter().enumerate() {
            let c = 0.5 + ((k as f64 + 1.0) * std::f64::consts::SQRT_2).fract();
            combo += &x.scale_real(c);
        }
        let v = eigh(&combo, f64::INFINITY)?.vectors;
        let basis = CommonEigenbasis { weights: diag_real(&(&(&v.adjoint() * rho) * &v)), vectors: Some(v) };
        for x in xs {
            let rotated = basis.rotate(x);
            let off = (0..d)
                .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| rotated[(i, j)].norm())
                .fold(0.0, f64::max);
            if off > COCYCLE_COMMUTATION_TOL * x.max_abs().max(1.0) {
                return Err(Error::NonCommutingCocycle(off));
            }
        }
        Ok(basis)
    }

    fn rotate(&self, x: &ComplexMatrix) -> ComplexMatrix {
        match &self.vectors {
            Some(v) => &(&v.adjoint() * x) * v,
            None => x.clone(),
        }
    }

    /// Eigenvalues of `x` in this basis.
    pub fn eigenvalues(&self, x: &ComplexMatrix) -> Vec<f64> {
        diag_real(&self.rotate(x))
    }

    /// `φ(f) = Σ_i w_i f_i` for `f` diagonal in this basis.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn diag_real(m: &ComplexMatrix) -> Vec<f64> {
    m.diagonal().iter().map(|z| z.re).collect()
}

/// Witness sets `A_N` for the Hypothesis-(H) lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessSet {
    WholeGroup,
    /// Permutations with `σ(B) ∩ B = ∅`, `B = {0..m0}`.
    Outer {
        m0: usize,
    },
}

impl WitnessSet {
    fn contains(&self, g: &Automorphism) -> bool {
        match (self, g) {
            (WitnessSet::WholeGroup, _) => true,
            (WitnessSet::Outer { m0 }, Automorphism::SitePermutation(p)) => is_outer(p, *m0),
            (WitnessSet::Outer { .. }, Automorphism::InnerUnitary(_)) => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HLevel {
    #[serde(rename = "N")]
    pub n: usize,
    pub phi_norm_sq: f64,
    pub eps0: Option<f64>,
    pub delta0: f64,
    pub lower_bound: f64,
    pub k_min_sv: f64,
    pub cauchy_increment: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HReport {
    pub levels: Vec<HLevel>,
    pub holds: bool,
}

/// `φ((x_g x_h)^{1/2})` for every pair of distinct derivative values, as the
/// minimum over pairs; `None` when no element is supplied.
fn min_pair_value(basis: &CommonEigenbasis, sqrt_spectra: &[&Vec<f64>], pair_budget: usize) -> Result<Option<f64>> {
    let n = sqrt_spectra.len();
    if n == 0 {
        return Ok(None);
    }
    if n.saturating_mul(n + 1) / 2 > pair_budget {
        return Err(Error::BudgetExceeded(format!("{n} distinct witnesses exceed the pair budget {pair_budget}")));
    }
    let w = basis.weights();
    let best = tree_reduce(
        n,
        |i| {
            let mut m = f64::INFINITY;
            for j in i..n {
                let v: f64 = (0..w.len()).map(|k| w[k] * sqrt_spectra[i][k] * sqrt_spectra[j][k]).sum();
                m = m.min(v);
            }
            Ok(m)
        },
        f64::min,
    )?;
    Ok(best)
}

/// Hypothesis-(H) diagnostics along a chain. `cocycles[k]` belongs to level `k`.
pub fn hypothesis_h_report(
    space: &GnsSpace,
    chain: &GroupChain,
    cocycles: &[RnCocycle],
    witness: WitnessSet,
    tol: f64,
) -> Result<HReport> {
    hypothesis_h_report_with_budget(space, chain, cocycles, witness, tol, DEFAULT_PAIR_BUDGET)
}

pub fn hypothesis_h_report_with_budget(
    space: &GnsSpace,
    chain: &GroupChain,
    cocycles: &[RnCocycle],
    witness: WitnessSet,
    tol: f64,
    pair_budget: usize,
) -> Result<HReport> {
    if cocycles.len() < chain.len() {
        return Err(Error::MissingDerivative(cocycles.len()));
    }
    let mut levels = Vec::with_capacity(chain.len());
    let mut prev_phi: Option<GnsVector> = None;
    for (k, group) in chain.groups().iter().enumerate() {
        let c = &cocycles[k];
        if c.len() < group.order() {
            return Err(Error::MissingDerivative(c.len()));
        }
        let basis = CommonEigenbasis::new(space.rho(), c.derivatives())?;

        // Spectra of x_g^{1/2}, deduplicated by exact value.
        let mut distinct: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut spectra: Vec<Vec<f64>> = Vec::new();
        let mut witnesses: Vec<usize> = Vec::new();
        let mut witness_ids: HashSet<usize> = HashSet::new();
        let mut witness_count = 0usize;
        let mut mean_sqrt = vec![0.0; space.algebra.total_dim()];
        for (i, g) in group.elements().iter().enumerate() {
            let lam: Vec<f64> = basis.eigenvalues(c.x(i)?).into_iter().map(|v| v.max(0.0).sqrt()).collect();
            for (m, v) in mean_sqrt.iter_mut().zip(&lam) {
                *m += v;
            }
            let key: Vec<u64> = lam.iter().map(|v| v.to_bits()).collect();
            let id = *distinct.entry(key).or_insert_with(|| {
                spectra.push(lam);
                spectra.len() - 1
            });
            if witness.contains(g) {
                witness_count += 1;
                if witness_ids.insert(id) {
                    witnesses.push(id);
                }
            }
        }
        let order = group.order() as f64;
        // avg_{g,h} φ((x_g x_h)^{1/2}) = Σ_i w_i (avg_g λ_{g,i}^{1/2})².
        let phi_norm_sq: f64 = basis.weights().iter().zip(&mean_sqrt).map(|(w, s)| w * (s / order).powi(2)).sum();

        let k_op = k_operator(c)?;
        let phi_n = GnsVector(k_op.matrix.clone());
        let via_k = space.norm_sq(&phi_n);
        if (via_k - phi_norm_sq).abs() > tol.max(1e-10) {
            return Err(Error::ConsistencyFailure(format!(
                "|K_N Φ|² = {via_k} but the pair average gives {phi_norm_sq}"
            )));
        }

        let refs: Vec<&Vec<f64>> = witnesses.iter().map(|&i| &spectra[i]).collect();
        let eps0 = min_pair_value(&basis, &refs, pair_budget)?;
        let delta0 = witness_count as f64 / order;
        let lower_bound = eps0.map_or(0.0, |e| e * delta0 * delta0);
        let cauchy_increment = prev_phi.as_ref().map(|p| space.distance(&phi_n, p));
        levels.push(HLevel {
            n: chain.levels()[k],
            phi_norm_sq,
            eps0,
            delta0,
            lower_bound,
            k_min_sv: k_op.min_singular_value,
            cauchy_increment,
        });
        prev_phi = Some(phi_n);
    }
    let last = levels.last().expect("chains are nonempty");
    let first_positive = levels.iter().position(|l| l.lower_bound > 0.0);
    let stays_positive = first_positive.is_some_and(|f| levels[f..].iter().all(|l| l.lower_bound > 0.0));
    let holds = last.phi_norm_sq > tol && stays_positive;
    Ok(HReport { levels, holds })
}

/// `K_G⁻¹` applied on both sides: `⟨Φ_G, K_G⁻¹ π(a) K_G⁻¹ Φ_G⟩`.
pub fn reconstruct_state(space: &GnsSpace, k: &KOperator, phi_g: &GnsVector, a: &ComplexMatrix) -> Result<C64> {
    let k_inv = inverse(&k.matrix, 0.0)?;
    let v = GnsVector(k_inv.try_mul(&phi_g.0)?);
    let av = GnsVector(a.try_mul(&v.0)?);
    Ok(space.inner(&v, &av))
}

/// `x_g^{1/2}` when only the derivative is at hand.
pub fn sqrt_derivative(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    psd_sqrt(x, DEFAULT_PSD_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{rotation_example, symmetric_group};
    use crate::sqi::compute_cocycle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn rotation(beta: f64) -> (GnsSpace, FiniteAutomorphismGroup, RnCocycle) {
        let (phi, g) = rotation_example(beta).unwrap();
        let c = compute_cocycle(&phi, &g, 1e-10).unwrap();
        (gns_build(&phi).unwrap(), g, c)
    }

    #[test]
    fn isometric_coordinates() {
        let (space, _, _) = rotation(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = ComplexMatrix::random(&mut rng, 2, 2);
            let b = ComplexMatrix::random(&mut rng, 2, 2);
            let lhs = space.inner(&GnsVector(a.clone()), &GnsVector(b.clone()));
            let rhs = space.state(&(&a.adjoint() * &b));
            assert!((lhs - rhs).norm() < 1e-12);
            let back = space.from_coords(space.coords(&GnsVector(a.clone()))).unwrap();
            assert!(back.0.max_abs_diff(&a) < 1e-12);
            assert!((space.inner(&space.cyclic_vector(), &GnsVector(a.clone())) - space.state(&a)).norm() < 1e-12);
        }
        assert!((space.norm(&space.cyclic_vector()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gns_examples() {
        let alg = TensorAlgebra::new(2, 1).unwrap();
        let tracial = ProductState::uniform(alg, ComplexMatrix::identity(2).scale_real(0.5), 2.0).unwrap();
        let space = gns_build(&tracial).unwrap();
        assert!((space.norm_sq(&GnsVector(ComplexMatrix::unit(2, 0, 0))) - 0.5).abs() < 1e-15);
        let (space, _, _) = rotation(4f64.ln());
        assert!((space.norm_sq(&GnsVector(ComplexMatrix::unit(2, 0, 0))) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn rotation_unitary_on_cyclic_vector() {
        let (space, g, c) = rotation(4f64.ln());
        let u = unitary_u(&space, &g, &c, 1).unwrap();
        let out = u.apply(&space, &space.cyclic_vector()).unwrap();
        assert!(out.0.max_abs_diff(&ComplexMatrix::from_diag(&[0.5, 2.0])) < 1e-12);
        let dense = u.to_dense(&space).unwrap();
        let gram = &dense.adjoint() * &dense;
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn rotation_k_and_phi_g() {
        let (space, g, c) = rotation(4f64.ln());
        let k = k_operator(&c).unwrap();
        assert!(k.matrix.max_abs_diff(&ComplexMatrix::from_diag(&[0.75, 1.5])) < 1e-12);
        assert!((k.min_singular_value - 0.75).abs() < 1e-12);
        let v = phi_g_vector(&space, &g, &c, 1e-10).unwrap();
        assert!((space.norm_sq(&v) - 0.9).abs() < 1e-12);
        let psi = InvariantState::new(&space, v.clone(), 1e-12).unwrap();
        assert!((psi.eval_element(&space, &ComplexMatrix::unit(2, 0, 0)).unwrap() - 0.5).norm() < 1e-12);
        assert!(psi.eval_element(&space, &ComplexMatrix::unit(2, 0, 1)).unwrap().norm() < 1e-12);
        let p = projection_p(&space, &g, &c).unwrap().to_dense(&space).unwrap();
        let kd = k.operator().to_dense(&space).unwrap();
        assert!((&p - &kd).operator_norm() > 0.01);
        assert!((&p * &p).max_abs_diff(&p) < 1e-12);
        assert!(p.hermitian_deviation() < 1e-12);
    }

    #[test]
    fn trivial_group_is_identity() {
        let (space, _, _) = rotation(1.0);
        let alg = space.algebra();
        let (phi, _) = rotation_example(1.0).unwrap();
        let t = FiniteAutomorphismGroup::new(
            "trivial",
            vec![Automorphism::InnerUnitary(ComplexMatrix::identity(alg.total_dim()))],
            vec!["id".into()],
        )
        .unwrap();
        let c = compute_cocycle(&phi, &t, 1e-10).unwrap();
        let p = projection_p(&space, &t, &c).unwrap().to_dense(&space).unwrap();
        assert!(p.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        let v = phi_g_vector(&space, &t, &c, 1e-10).unwrap();
        assert_eq!(v, space.cyclic_vector());
    }

    #[test]
    fn dense_cap_is_enforced() {
        let alg = TensorAlgebra::new(2, 7).unwrap();
        let phi = ProductState::uniform(alg, ComplexMatrix::identity(2).scale_real(0.5), 2.0).unwrap();
        let space = gns_build(&phi).unwrap();
        let r = GnsOperator::identity(&space).to_dense(&space);
        assert!(matches!(r, Err(Error::DenseCapExceeded { dim: 16384, cap: 4096 })));
    }

    #[test]
    fn s2_k_operator_is_two_term_average() {
        let alg = TensorAlgebra::new(2, 2).unwrap();
        let mut special = BTreeMap::new();
        special.insert(0, ComplexMatrix::from_diag(&[0.75, 0.25]));
        let phi = ProductState::new(alg, ComplexMatrix::from_diag(&[0.5, 0.5]), special, 2.0).unwrap();
        let s2 = symmetric_group(2, 2, 5040).unwrap();
        let c = compute_cocycle(&phi, &s2, 1e-10).unwrap();
        let t = crate::group::Permutation::transposition(2, 0, 1).unwrap();
        let x = crate::sqi::perm_model_rn(&phi, &t).unwrap();
        let expect = (&ComplexMatrix::identity(4) + &sqrt_derivative(x.matrix()).unwrap()).scale_real(0.5);
        assert!(k_operator(&c).unwrap().matrix.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn hypothesis_report_for_equal_densities() {
        let alg = TensorAlgebra::new(2, 3).unwrap();
        let phi = ProductState::uniform(alg, ComplexMatrix::from_diag(&[0.7, 0.3]), 4.0).unwrap();
        let chain = crate::group::symmetric_group_chain(3, 3, 5040).unwrap();
        let space = gns_build(&phi).unwrap();
        let cocycles: Vec<_> = chain.groups().iter().map(|g| compute_cocycle(&phi, g, 1e-10).unwrap()).collect();
        let r = hypothesis_h_report(&space, &chain, &cocycles, WitnessSet::WholeGroup, 1e-10).unwrap();
        assert!(r.holds);
        for l in &r.levels {
            assert!((l.phi_norm_sq - 1.0).abs() < 1e-12);
            assert!((l.lower_bound - 1.0).abs() < 1e-12);
        }
        assert_eq!(r.levels[0].cauchy_increment, None);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["levels"][2]["N"], 3);
    }

    #[test]
    fn non_commuting_cocycle_is_rejected() {
        let rho = ComplexMatrix::from_diag(&[0.5, 0.5]);
        let x = ComplexMatrix::from_diag(&[2.0, 0.5]);
        let y = ComplexMatrix::from_real_rows(&[&[1.0, 0.5], &[0.5, 1.0]]);
        assert!(matches!(CommonEigenbasis::new(&rho, &[x.clone(), y]), Err(Error::NonCommutingCocycle(_))));
        let z = ComplexMatrix::from_real_rows(&[&[1.0, 0.5], &[0.5, 1.0]]);
        let w = &z * &z;
        let b = CommonEigenbasis::new(&rho, &[z, w]).unwrap();
        assert!((b.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
