//! Finite truncations `B(ℂ^d)^{⊗L}` of the infinite tensor-product algebra,
//! site embeddings `j_n`, and faithful product states `φ = ⊗ tr(W_n ·)`.
//!
//! Basis index convention: site 0 is the most significant digit, matching
//! `j_n(b) = 𝟙^{⊗n} ⊗ b ⊗ 𝟙^{⊗(L-n-1)}`.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, kron, kron_with_limit, ComplexMatrix};

/// Default cap on `d^L`.
pub const DEFAULT_MAX_TOTAL_DIM: usize = 256;

/// Commutator tolerance for site densities.
pub const DENSITY_COMMUTATION_TOL: f64 = 1e-12;

const DENSITY_HERMITIAN_TOL: f64 = 1e-12;
const DENSITY_TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue still counted as strictly positive.
const FAITHFUL_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorAlgebra {
    site_dim: usize,
    num_sites: usize,
    total_dim: usize,
}

impl TensorAlgebra {
    pub fn new(site_dim: usize, num_sites: usize) -> Result<Self> {
        Self::with_limit(site_dim, num_sites, DEFAULT_MAX_TOTAL_DIM)
    }

    pub fn with_limit(site_dim: usize, num_sites: usize, max_total_dim: usize) -> Result<Self> {
        if site_dim == 0 || num_sites == 0 {
            return Err(Error::ConfigInvalid("site_dim and num_sites must be positive".into()));
        }
        let total_dim = u32::try_from(num_sites)
            .ok()
            .and_then(|l| site_dim.checked_pow(l))
            .filter(|&t| t <= max_total_dim)
            .ok_or(Error::DimensionOverflow { dim: usize::MAX, max: max_total_dim })
            .map_err(|e| match site_dim.checked_pow(num_sites as u32) {
                Some(dim) => Error::DimensionOverflow { dim, max: max_total_dim },
                None => e,
            })?;
        Ok(TensorAlgebra { site_dim, num_sites, total_dim })
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn identity(&self) -> AlgebraElement {
        AlgebraElement { algebra: *self, matrix: ComplexMatrix::identity(self.total_dim) }
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement { algebra: *self, matrix: ComplexMatrix::zeros(self.total_dim, self.total_dim) }
    }

    /// Wrap a `d^L × d^L` matrix.
    pub fn element(&self, matrix: ComplexMatrix) -> Result<AlgebraElement> {
        if !matrix.is_square() {
            return Err(Error::NonSquare(matrix.rows(), matrix.cols()));
        }
        if matrix.rows() != self.total_dim {
            return Err(Error::DimensionMismatch { expected: self.total_dim, got: matrix.rows() });
        }
        Ok(AlgebraElement { algebra: *self, matrix })
    }

    /// Per-site digits of a basis index, site 0 first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.num_sites];
        for slot in out.iter_mut().rev() {
            *slot = index % self.site_dim;
            index /= self.site_dim;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &x| acc * self.site_dim + x)
    }
}

/// An element of the truncated algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    algebra: TensorAlgebra,
    matrix: ComplexMatrix,
}

impl AlgebraElement {
    pub fn algebra(&self) -> TensorAlgebra {
        self.algebra
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    fn same_algebra(&self, other: &Self) -> Result<()> {
        if self.algebra == other.algebra {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_algebra(other)?;
        Ok(AlgebraElement { algebra: self.algebra, matrix: &self.matrix * &other.matrix })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_algebra(other)?;
        Ok(AlgebraElement { algebra: self.algebra, matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_algebra(other)?;
        Ok(AlgebraElement { algebra: self.algebra, matrix: &self.matrix - &other.matrix })
    }

    pub fn scale(&self, s: C64) -> Self {
        AlgebraElement { algebra: self.algebra, matrix: self.matrix.scale(s) }
    }

    pub fn adjoint(&self) -> Self {
        AlgebraElement { algebra: self.algebra, matrix: self.matrix.adjoint() }
    }

    /// Frobenius distance.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.same_algebra(other)?;
        Ok(self.matrix.distance(&other.matrix))
    }

    /// C*-norm (largest singular value).
    pub fn norm(&self) -> f64 {
        self.matrix.operator_norm()
    }
}

/// `j_n(b) = 𝟙^{⊗n} ⊗ b ⊗ 𝟙^{⊗(L-n-1)}`.
pub fn embed_site(b: &ComplexMatrix, n: usize, alg: &TensorAlgebra) -> Result<AlgebraElement> {
    if n >= alg.num_sites {
        return Err(Error::SiteOutOfRange { site: n, num_sites: alg.num_sites });
    }
    if !b.is_square() || b.rows() != alg.site_dim {
        return Err(Error::WrongBlockDim { expected: alg.site_dim, got: b.rows().max(b.cols()) });
    }
    let d = alg.site_dim;
    let left = ComplexMatrix::identity(d.pow(n as u32));
    let right = ComplexMatrix::identity(d.pow((alg.num_sites - n - 1) as u32));
    let m = kron_with_limit(&kron_with_limit(&left, b, alg.total_dim)?, &right, alg.total_dim)?;
    Ok(AlgebraElement { algebra: *alg, matrix: m })
}

/// An elementary tensor `∏_n j_n(b_n)` with `b_n = 𝟙` off the listed sites.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<SiteFactor>", into = "Vec<SiteFactor>")]
pub struct ElementaryTensor {
    factors: BTreeMap<usize, ComplexMatrix>,
}

/// Observable wire form: `{"site": n, "matrix": <matrix>}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SiteFactor {
    pub site: usize,
    pub matrix: ComplexMatrix,
}

impl From<Vec<SiteFactor>> for ElementaryTensor {
    fn from(v: Vec<SiteFactor>) -> Self {
        let mut t = ElementaryTensor::default();
        for f in v {
            t = t.with(f.site, f.matrix);
        }
        t
    }
}

impl From<ElementaryTensor> for Vec<SiteFactor> {
    fn from(t: ElementaryTensor) -> Self {
        t.factors.into_iter().map(|(site, matrix)| SiteFactor { site, matrix }).collect()
    }
}

impl ElementaryTensor {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Multiply the factor at `site` by `b` on the right.
    pub fn with(mut self, site: usize, b: ComplexMatrix) -> Self {
        let merged = match self.factors.remove(&site) {
            Some(prev) if prev.rows() == b.rows() => &prev * &b,
            _ => b,
        };
        self.factors.insert(site, merged);
        self
    }

    pub fn factors(&self) -> &BTreeMap<usize, ComplexMatrix> {
        &self.factors
    }

    pub fn factor(&self, site: usize) -> Option<&ComplexMatrix> {
        self.factors.get(&site)
    }

    /// Sites carrying a factor.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.keys().copied()
    }

    /// `k₀`: one past the largest site carrying a factor.
    pub fn support_bound(&self) -> usize {
        self.factors.keys().next_back().map_or(0, |&n| n + 1)
    }

    /// `max_n |b_n|`, counting the identity factors (so at least 1).
    pub fn max_factor_norm(&self) -> f64 {
        self.factors.values().map(|b| b.operator_norm()).fold(1.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        ElementaryTensor { factors: self.factors.iter().map(|(&n, b)| (n, b.adjoint())).collect() }
    }

    pub fn to_element(&self, alg: &TensorAlgebra) -> Result<AlgebraElement> {
        let d = alg.site_dim;
        let mut m = ComplexMatrix::identity(1);
        for n in 0..alg.num_sites {
            let block = match self.factors.get(&n) {
                Some(b) => {
                    if !b.is_square() || b.rows() != d {
                        return Err(Error::WrongBlockDim { expected: d, got: b.rows().max(b.cols()) });
                    }
                    b.clone()
                }
                None => ComplexMatrix::identity(d),
            };
            m = kron_with_limit(&m, &block, alg.total_dim)?;
        }
        if let Some(&n) = self.factors.keys().find(|&&n| n >= alg.num_sites) {
            return Err(Error::SiteOutOfRange { site: n, num_sites: alg.num_sites });
        }
        Ok(AlgebraElement { algebra: *alg, matrix: m })
    }
}

/// Faithful product state `φ = ⊗_n tr(W_n ·)` on a truncated algebra.
#[derive(Clone, Debug)]
pub struct ProductState {
    algebra: TensorAlgebra,
    densities: Vec<ComplexMatrix>,
    tail_density: ComplexMatrix,
    special_sites: BTreeMap<usize, ComplexMatrix>,
    bound_c: f64,
    rho: ComplexMatrix,
}

impl ProductState {
    /// `W_n = special[n]` for listed sites, `W` everywhere else.
    pub fn new(
        algebra: TensorAlgebra,
        tail_density: ComplexMatrix,
        special_sites: BTreeMap<usize, ComplexMatrix>,
        bound_c: f64,
    ) -> Result<Self> {
        if !(bound_c > 1.0) || !bound_c.is_finite() {
            return Err(Error::ConfigInvalid(format!("bound C must exceed 1, got {bound_c}")));
        }
        if let Some(&n) = special_sites.keys().find(|&&n| n >= algebra.num_sites) {
            return Err(Error::SiteOutOfRange { site: n, num_sites: algebra.num_sites });
        }
        // Sentinel site index for the tail density in error messages.
        let tail_site = algebra.num_sites;
        validate_density(&tail_density, tail_site, algebra.site_dim, bound_c)?;
        for (&n, w) in &special_sites {
            validate_density(w, n, algebra.site_dim, bound_c)?;
        }
        let mut distinct: Vec<(usize, &ComplexMatrix)> = vec![(tail_site, &tail_density)];
        distinct.extend(special_sites.iter().map(|(&n, w)| (n, w)));
        for (i, (n, a)) in distinct.iter().enumerate() {
            for (m, b) in &distinct[i + 1..] {
                let c = a.commutator_norm(b);
                if c > DENSITY_COMMUTATION_TOL {
                    return Err(Error::NonCommutingDensities(*n, *m, c));
                }
            }
        }
        let densities: Vec<ComplexMatrix> =
            (0..algebra.num_sites).map(|n| special_sites.get(&n).unwrap_or(&tail_density).clone()).collect();
        let mut rho = ComplexMatrix::identity(1);
        for w in &densities {
            rho = kron_with_limit(&rho, w, algebra.total_dim)?;
        }
        Ok(ProductState { algebra, densities, tail_density, special_sites, bound_c, rho })
    }

    /// Every site carries the same density `w`.
    pub fn uniform(algebra: TensorAlgebra, w: ComplexMatrix, bound_c: f64) -> Result<Self> {
        Self::new(algebra, w, BTreeMap::new(), bound_c)
    }

    pub fn algebra(&self) -> TensorAlgebra {
        self.algebra
    }

    pub fn densities(&self) -> &[ComplexMatrix] {
        &self.densities
    }

    pub fn density(&self, site: usize) -> &ComplexMatrix {
        &self.densities[site]
    }

    pub fn tail_density(&self) -> &ComplexMatrix {
        &self.tail_density
    }

    pub fn special_sites(&self) -> &BTreeMap<usize, ComplexMatrix> {
        &self.special_sites
    }

    pub fn bound_c(&self) -> f64 {
        self.bound_c
    }

    /// `ρ = W_0 ⊗ … ⊗ W_{L-1}`.
    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    /// `φ(a) = tr(ρ a)`.
    pub fn eval(&self, a: &AlgebraElement) -> Result<C64> {
        if a.algebra != self.algebra {
            return Err(Error::AlgebraMismatch);
        }
        Ok(self.rho.trace_product(&a.matrix))
    }

    /// `φ(a) = tr(ρ a)` for a raw `d^L × d^L` matrix.
    pub fn eval_matrix(&self, a: &ComplexMatrix) -> C64 {
        self.rho.trace_product(a)
    }

    /// `∏_n tr(W_n b_n)` for an elementary tensor.
    pub fn eval_elementary(&self, t: &ElementaryTensor) -> C64 {
        t.factors()
            .iter()
            .filter(|(&n, _)| n < self.algebra.num_sites)
            .map(|(&n, b)| self.densities[n].trace_product(b))
            .product()
    }
}

fn validate_density(w: &ComplexMatrix, site: usize, d: usize, bound_c: f64) -> Result<()> {
    let bad = |reason: String| Error::InvalidDensity { site, reason };
    if !w.is_square() || w.rows() != d {
        return Err(Error::WrongBlockDim { expected: d, got: w.rows().max(w.cols()) });
    }
    let herm = w.hermitian_deviation();
    if herm > DENSITY_HERMITIAN_TOL {
        return Err(bad(format!("not Hermitian (deviation {herm:.3e})")));
    }
    let tr = w.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TRACE_TOL {
        return Err(bad(format!("trace {tr} is not 1")));
    }
    let e = eigh(w, DENSITY_HERMITIAN_TOL)?;
    let min = e.min_value();
    if !(min > FAITHFUL_FLOOR) {
        return Err(Error::StateSingular(min));
    }
    let norm = e.values.iter().copied().fold(0.0, f64::max);
    if norm < 1.0 / bound_c || norm > bound_c {
        return Err(bad(format!("norm {norm} outside [1/C, C] with C = {bound_c}")));
    }
    Ok(())
}

/// `φ(a) = tr((⊗W_n) a)`.
pub fn state_eval(phi: &ProductState, a: &AlgebraElement) -> Result<C64> {
    phi.eval(a)
}

/// `W_0 ⊗ … ⊗ W_{L-1}`, recomputed from the site densities.
pub fn total_density(phi: &ProductState) -> Result<ComplexMatrix> {
    let mut rho = ComplexMatrix::identity(1);
    for w in &phi.densities {
        rho = kron(&rho, w)?;
    }
    Ok(rho)
}

/// JSON form of a product state:
/// `{"site_dim", "num_sites", "tail_density", "special_sites": {"<n>": m}, "bound_C"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductStateJson {
    pub site_dim: usize,
    pub num_sites: usize,
    pub tail_density: ComplexMatrix,
    #[serde(default)]
    pub special_sites: BTreeMap<String, ComplexMatrix>,
    #[serde(rename = "bound_C")]
    pub bound_c: f64,
}

impl ProductStateJson {
    pub fn build(&self) -> Result<ProductState> {
        self.build_with_limit(DEFAULT_MAX_TOTAL_DIM)
    }

    pub fn build_with_limit(&self, max_total_dim: usize) -> Result<ProductState> {
        let alg = TensorAlgebra::with_limit(self.site_dim, self.num_sites, max_total_dim)?;
        let mut special = BTreeMap::new();
        for (k, m) in &self.special_sites {
            let n: usize =
                k.parse().map_err(|_| Error::ConfigInvalid(format!("special site key {k:?} is not an index")))?;
            special.insert(n, m.clone());
        }
        ProductState::new(alg, self.tail_density.clone(), special, self.bound_c)
    }
}

impl From<&ProductState> for ProductStateJson {
    fn from(s: &ProductState) -> Self {
        ProductStateJson {
            site_dim: s.algebra.site_dim,
            num_sites: s.algebra.num_sites,
            tail_density: s.tail_density.clone(),
            special_sites: s.special_sites.iter().map(|(n, m)| (n.to_string(), m.clone())).collect(),
            bound_c: s.bound_c,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_site_state() -> ProductState {
        let alg = TensorAlgebra::new(2, 2).unwrap();
        let mut special = BTreeMap::new();
        special.insert(0, ComplexMatrix::from_diag(&[0.75, 0.25]));
        ProductState::new(alg, ComplexMatrix::from_diag(&[0.5, 0.5]), special, 2.0).unwrap()
    }

    #[test]
    fn algebra_limits() {
        assert_eq!(TensorAlgebra::new(2, 8).unwrap().total_dim(), 256);
        assert!(matches!(TensorAlgebra::new(2, 9), Err(Error::DimensionOverflow { dim: 512, max: 256 })));
        assert!(TensorAlgebra::new(0, 2).is_err());
        let alg = TensorAlgebra::new(3, 3).unwrap();
        assert_eq!(alg.digits(alg.index_of(&[2, 0, 1])), vec![2, 0, 1]);
    }

    #[test]
    fn embed_site_examples() {
        let alg = TensorAlgebra::new(2, 2).unwrap();
        let id = embed_site(&ComplexMatrix::identity(2), 0, &alg).unwrap();
        assert_eq!(id.matrix(), &ComplexMatrix::identity(4));

        let b = ComplexMatrix::from_diag(&[0.75, 0.25]);
        let e = embed_site(&b, 1, &alg).unwrap();
        assert_eq!(e.matrix(), &kron(&ComplexMatrix::identity(2), &b).unwrap());
        assert_eq!(e.matrix(), &ComplexMatrix::from_diag(&[0.75, 0.25, 0.75, 0.25]));

        let e12 = ComplexMatrix::unit(2, 0, 1);
        let e = embed_site(&e12, 0, &alg).unwrap();
        assert_eq!(e.matrix(), &kron(&e12, &ComplexMatrix::identity(2)).unwrap());

        assert!(matches!(embed_site(&b, 2, &alg), Err(Error::SiteOutOfRange { site: 2, num_sites: 2 })));
        assert!(matches!(embed_site(&ComplexMatrix::identity(3), 0, &alg), Err(Error::WrongBlockDim { .. })));
    }

    #[test]
    fn embeddings_at_distinct_sites_commute() {
        let alg = TensorAlgebra::new(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = embed_site(&ComplexMatrix::random(&mut rng, 2, 2), 0, &alg).unwrap();
        let b = embed_site(&ComplexMatrix::random(&mut rng, 2, 2), 2, &alg).unwrap();
        assert!(a.mul(&b).unwrap().distance(&b.mul(&a).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn state_eval_examples() {
        let phi = two_site_state();
        let alg = phi.algebra();
        assert!((state_eval(&phi, &alg.identity()).unwrap() - 1.0).norm() < 1e-15);

        let e11 = ComplexMatrix::unit(2, 0, 0);
        let e22 = ComplexMatrix::unit(2, 1, 1);
        let a = embed_site(&e11, 0, &alg).unwrap();
        assert!((state_eval(&phi, &a).unwrap().re - 0.75).abs() < 1e-15);

        let t = ElementaryTensor::identity().with(0, e11.clone()).with(1, e22.clone());
        let ab = embed_site(&e11, 0, &alg).unwrap().mul(&embed_site(&e22, 1, &alg).unwrap()).unwrap();
        assert_eq!(t.to_element(&alg).unwrap(), ab);
        let oracle = phi.eval_elementary(&t);
        assert!((oracle.re - 0.375).abs() < 1e-15);
        assert!((state_eval(&phi, &ab).unwrap() - oracle).norm() < 1e-15);

        let other = TensorAlgebra::new(2, 3).unwrap();
        assert_eq!(state_eval(&phi, &other.identity()), Err(Error::AlgebraMismatch));
    }

    #[test]
    fn total_density_examples() {
        let alg = TensorAlgebra::new(2, 3).unwrap();
        let phi = ProductState::uniform(alg, ComplexMatrix::identity(2).scale_real(0.5), 2.0).unwrap();
        assert!(total_density(&phi).unwrap().max_abs_diff(&ComplexMatrix::identity(8).scale_real(0.125)) < 1e-16);

        let phi = two_site_state();
        let rho = total_density(&phi).unwrap();
        assert_eq!(rho, ComplexMatrix::from_diag(&[0.375, 0.375, 0.125, 0.125]));
        assert_eq!(&rho, phi.rho());
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn construction_guards() {
        let alg = TensorAlgebra::new(2, 2).unwrap();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        let mut special = BTreeMap::new();
        special.insert(0, ComplexMatrix::from_diag(&[1.0, 0.0]));
        assert!(matches!(ProductState::new(alg, half.clone(), special, 2.0), Err(Error::StateSingular(_))));

        let mut special = BTreeMap::new();
        special.insert(0, ComplexMatrix::from_real_rows(&[&[0.5, 0.25], &[0.25, 0.5]]));
        let w = ComplexMatrix::from_diag(&[0.75, 0.25]);
        assert!(matches!(ProductState::new(alg, w.clone(), special, 2.0), Err(Error::NonCommutingDensities(..))));

        assert!(matches!(ProductState::uniform(alg, half.clone(), 1.0), Err(Error::ConfigInvalid(_))));
        assert!(matches!(ProductState::uniform(alg, w.scale_real(2.0), 4.0), Err(Error::InvalidDensity { .. })));

        let mut special = BTreeMap::new();
        special.insert(5, w);
        assert!(matches!(ProductState::new(alg, half, special, 2.0), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn json_round_trip() {
        let phi = two_site_state();
        let json = serde_json::to_string(&ProductStateJson::from(&phi)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["bound_C"], 2.0);
        assert!(v["special_sites"]["0"].is_object());
        let back: ProductStateJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build().unwrap().rho(), phi.rho());
    }

    #[test]
    fn observable_json() {
        let json = r#"[{"site": 0, "matrix": {"rows": 2, "cols": 2, "entries": [[1,0],[0,0],[0,0],[0,0]]}}]"#;
        let t: ElementaryTensor = serde_json::from_str(json).unwrap();
        assert_eq!(t.factor(0), Some(&ComplexMatrix::unit(2, 0, 0)));
        assert_eq!(t.support_bound(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn state_is_positive_and_normalized(seed in any::<u64>()) {
            let phi = two_site_state();
            let alg = phi.algebra();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = alg.element(ComplexMatrix::random(&mut rng, 4, 4)).unwrap();
            let v = phi.eval(&a.adjoint().mul(&a).unwrap()).unwrap();
            prop_assert!(v.re >= -1e-12);
            prop_assert!(v.im.abs() < 1e-12);
            // Faithful: φ(a*a) ≥ λ_min(ρ) |a|_F².
            prop_assert!(v.re >= 0.125 * a.matrix().frobenius_norm().powi(2) - 1e-12);
        }

        #[test]
        fn multiplicative_on_elementary_tensors(seed in any::<u64>()) {
            let alg = TensorAlgebra::new(2, 3).unwrap();
            let mut special = BTreeMap::new();
            special.insert(1, ComplexMatrix::from_diag(&[0.6, 0.4]));
            let phi = ProductState::new(alg, ComplexMatrix::from_diag(&[0.3, 0.7]), special, 4.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = (0..3).fold(ElementaryTensor::identity(), |t, n| t.with(n, ComplexMatrix::random(&mut rng, 2, 2)));
            let v = phi.eval(&t.to_element(&alg).unwrap()).unwrap();
            prop_assert!((v - phi.eval_elementary(&t)).norm() < 1e-12);
        }
    }
}
