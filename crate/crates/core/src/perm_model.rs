//! The site-permutation model: a product state `⊗ tr(W_n ·)` with `W_n = W`
//! off a finite set `F`, acted on by `S_N`. Closed forms for `x_σ`, `K_N` and
//! the weak limit `K_G`, convergence experiments, Monte Carlo estimates of
//! `K_N`, and the product-state check of `ψ_G`.

use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, ElementaryTensor, ProductState, TensorAlgebra};
use crate::error::{Error, Result};
use crate::gns::{GnsSpace, GnsVector, HReport, InvariantState};
use crate::group::{enumerate_symmetric, outer_fraction, sample_permutation, Permutation};
use crate::linalg::{inverse, kron_with_limit, psd_sqrt, ComplexMatrix, DEFAULT_PSD_TOL};
use crate::reduce::mean_matrix;

/// Errors at or below this level count as exact zeros when comparing runs.
pub const ROUNDOFF_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct PermutationModel {
    state: ProductState,
    m0: usize,
}

impl PermutationModel {
    /// Requires `F ⊆ {0..m0}` and `m0 < L`.
    pub fn new(state: ProductState, m0: usize) -> Result<Self> {
        let l = state.algebra().num_sites();
        if m0 >= l {
            return Err(Error::InvalidRange(format!("m0 = {m0} must be below L = {l}")));
        }
        if let Some(&n) = state.special_sites().keys().find(|&&n| n > m0) {
            return Err(Error::InvalidRange(format!("special site {n} lies beyond m0 = {m0}")));
        }
        Ok(PermutationModel { state, m0 })
    }

    /// `m0 = max F` (0 when `F` is empty).
    pub fn from_state(state: ProductState) -> Result<Self> {
        let m0 = state.special_sites().keys().next_back().copied().unwrap_or(0);
        Self::new(state, m0)
    }

    /// `d = 2`, `F = {0}`, `W = 𝟙/2`, `W_0 = diag(3/4, 1/4)`, `C = 2`, on `num_sites` sites.
    pub fn default_with_sites(num_sites: usize) -> Result<Self> {
        let alg = TensorAlgebra::new(2, num_sites)?;
        let mut special = BTreeMap::new();
        special.insert(0, ComplexMatrix::from_diag(&[0.75, 0.25]));
        let state = ProductState::new(alg, ComplexMatrix::from_diag(&[0.5, 0.5]), special, 2.0)?;
        Self::new(state, 0)
    }

    /// The default model on 7 sites.
    pub fn default_model() -> Result<Self> {
        Self::default_with_sites(7)
    }

    pub fn state(&self) -> &ProductState {
        &self.state
    }

    pub fn algebra(&self) -> TensorAlgebra {
        self.state.algebra()
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    /// `F`, ascending.
    pub fn special_set(&self) -> Vec<usize> {
        self.state.special_sites().keys().copied().collect()
    }

    /// `∏_{n ∈ F} tr(W_n^{1/2} W^{1/2})`.
    pub fn overlap_scalar(&self) -> Result<f64> {
        let w_sqrt = psd_sqrt(self.state.tail_density(), DEFAULT_PSD_TOL)?;
        let mut s = 1.0;
        for w in self.state.special_sites().values() {
            s *= psd_sqrt(w, DEFAULT_PSD_TOL)?.trace_product(&w_sqrt).re;
        }
        Ok(s)
    }

    /// `x_σ^{1/2} = ∏_{n ∈ Λ_σ} j_n((W_{σ(n)} W_n⁻¹)^{1/2})`.
    pub fn x_sigma_sqrt(&self, sigma: &Permutation) -> Result<ComplexMatrix> {
        let alg = self.algebra();
        let sigma = sigma.extend(alg.num_sites())?;
        let d = alg.site_dim();
        let mut m = ComplexMatrix::identity(1);
        for n in 0..alg.num_sites() {
            let block = if self.state.density(sigma.image(n)) == self.state.density(n) {
                ComplexMatrix::identity(d)
            } else {
                let ratio = self.state.density(sigma.image(n)) * &inverse(self.state.density(n), 0.0)?;
                psd_sqrt(&ratio.hermitian_part(), DEFAULT_PSD_TOL)?
            };
            m = kron_with_limit(&m, &block, alg.total_dim())?;
        }
        Ok(m)
    }

    /// `K_N = (1/N!) Σ_{σ ∈ S_N} x_σ^{1/2}` by enumeration.
    pub fn k_n_exact(&self, n: usize, max_enumeration: usize) -> Result<ComplexMatrix> {
        check_enumerable(n, max_enumeration)?;
        let perms = enumerate_symmetric(n, self.algebra().num_sites())?;
        Ok(mean_matrix(perms.len(), |i| self.x_sigma_sqrt(&perms[i]))?.expect("S_N is nonempty"))
    }
}

fn check_enumerable(n: usize, max_enumeration: usize) -> Result<()> {
    let order = (1..=n).try_fold(1usize, |a, k| a.checked_mul(k));
    match order {
        Some(o) if o <= max_enumeration => Ok(()),
        _ => Err(Error::BudgetExceeded(format!("enumerating S_{n} exceeds the cap {max_enumeration}"))),
    }
}

/// `K_G = (∏_{n∈F} tr(W_n^{1/2} W^{1/2})) · ∏_{n∈F} j_n((W W_n⁻¹)^{1/2})`.
pub fn k_limit_closed_form(model: &PermutationModel) -> Result<AlgebraElement> {
    let s = model.overlap_scalar()?;
    let w = model.state.tail_density();
    let mut t = ElementaryTensor::identity();
    for (&n, wn) in model.state.special_sites() {
        let ratio = w * &inverse(wn, 0.0)?;
        t = t.with(n, psd_sqrt(&ratio.hermitian_part(), DEFAULT_PSD_TOL)?);
    }
    Ok(t.to_element(&model.algebra())?.scale(C64::new(s, 0.0)))
}

/// `⟨π(a)Φ, X π(b)Φ⟩ = tr(ρ a* X b)`.
fn matrix_element(rho: &ComplexMatrix, a: &ComplexMatrix, x: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    rho.trace_product(&(&(&a.adjoint() * x) * b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    #[serde(rename = "N")]
    pub n: usize,
    pub f_outer: f64,
    pub matel: C64,
    pub target: C64,
    pub abs_err: f64,
    pub bound: f64,
    pub method: Method,
    /// Half-width of the 95% interval of `matel` (Monte Carlo records only).
    pub ci95: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceResult {
    pub records: Vec<ConvergenceRecord>,
    /// `m0` used in the bound.
    pub m0: usize,
    /// `M = max(|a_n|, |b_n|)`, at least 1.
    pub max_factor_norm: f64,
    /// `k₀`: one past the largest site in the support of `a` and `b`.
    pub support_bound: usize,
    /// Every exact record satisfies `abs_err ≤ bound + 1e-9`.
    pub all_within_bound: bool,
    /// Error at the largest exact `N` is below the error at the smallest
    /// (or both are round-off zeros).
    pub error_decreased: bool,
}

impl ConvergenceResult {
    /// CSV `N,f_outer,matel_re,matel_im,target_re,target_im,abs_err,bound,method,ci95`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,f_outer,matel_re,matel_im,target_re,target_im,abs_err,bound,method,ci95\n");
        for r in &self.records {
            let method = match r.method {
                Method::Exact => "exact",
                Method::MonteCarlo => "mc",
            };
            let ci = r.ci95.map(|c| format!("{c:?}")).unwrap_or_default();
            // `{:?}` is the shortest round-trip form and switches to exponents for tiny values.
            out.push_str(&format!(
                "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{}\n",
                r.n, r.f_outer, r.matel.re, r.matel.im, r.target.re, r.target.im, r.abs_err, r.bound, method, ci
            ));
        }
        out
    }
}

/// Monte Carlo settings for records beyond the enumeration cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSettings {
    pub samples: usize,
    pub seed: u64,
}

/// Compare `⟨π(a)Φ, K_N π(b)Φ⟩` with `⟨π(a)Φ, K_G π(b)Φ⟩` for each `N`.
/// `N` within the enumeration cap is exact; beyond it `mc` is required.
pub fn convergence_experiment(
    model: &PermutationModel,
    a: &ElementaryTensor,
    b: &ElementaryTensor,
    n_range: RangeInclusive<usize>,
    max_enumeration: usize,
    mc: Option<McSettings>,
) -> Result<ConvergenceResult> {
    let alg = model.algebra();
    let (lo, hi) = (*n_range.start(), *n_range.end());
    if lo == 0 || lo > hi || hi > alg.num_sites() {
        return Err(Error::InvalidRange(format!("N range {lo}..={hi} must lie in 1..={}", alg.num_sites())));
    }
    let support_bound = a.support_bound().max(b.support_bound());
    if support_bound > alg.num_sites() {
        return Err(Error::SiteOutOfRange { site: support_bound - 1, num_sites: alg.num_sites() });
    }
    let special = model.special_set();
    let m0 = special.iter().copied().chain(support_bound.checked_sub(1)).fold(model.m0, usize::max);
    let max_factor_norm = a.max_factor_norm().max(b.max_factor_norm());
    let c4 = model.state.bound_c().powi(4 * special.len() as i32);
    let mk = max_factor_norm.powi(2 * support_bound as i32);

    let am = a.to_element(&alg)?.into_matrix();
    let bm = b.to_element(&alg)?.into_matrix();
    let rho = model.state.rho();
    let target = matrix_element(rho, &am, k_limit_closed_form(model)?.matrix(), &bm);

    let mut records = Vec::new();
    for n in n_range {
        let f_outer = if n > m0 { outer_fraction(n, m0)? } else { 0.0 };
        let bound = (1.0 - f_outer) * c4 * mk;
        let (matel, method, ci95) = if check_enumerable(n, max_enumeration).is_ok() {
            (matrix_element(rho, &am, &model.k_n_exact(n, max_enumeration)?, &bm), Method::Exact, None)
        } else {
            let Some(mc) = mc else {
                return Err(Error::BudgetExceeded(format!(
                    "S_{n} is beyond the enumeration cap and no sampling was requested"
                )));
            };
            let est = mc_k_estimate(model, n, mc.samples, mc.seed)?;
            let (v, half) = est.matrix_element(rho, &am, &bm);
            (v, Method::MonteCarlo, Some(half))
        };
        records.push(ConvergenceRecord {
            n,
            f_outer,
            matel,
            target,
            abs_err: (matel - target).norm(),
            bound,
            method,
            ci95,
        });
    }
    let exact: Vec<&ConvergenceRecord> = records.iter().filter(|r| r.method == Method::Exact).collect();
    let all_within_bound = exact.iter().all(|r| r.abs_err <= r.bound + 1e-9);
    let error_decreased = match (exact.first(), exact.last()) {
        (Some(f), Some(l)) => l.abs_err < f.abs_err || (f.abs_err <= ROUNDOFF_FLOOR && l.abs_err <= ROUNDOFF_FLOOR),
        _ => false,
    };
    Ok(ConvergenceResult { records, m0, max_factor_norm, support_bound, all_within_bound, error_decreased })
}

/// Sample mean of `x_σ^{1/2}` with per-entry standard errors.
#[derive(Clone, Debug)]
pub struct McEstimate {
    pub mean: ComplexMatrix,
    /// Standard error of each entry (complex modulus), row-major.
    pub std_error: Vec<f64>,
    pub samples: usize,
    /// Per-sample values, deduplicated: `(weight, x_σ^{1/2})`.
    atoms: Vec<(usize, ComplexMatrix)>,
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

impl McEstimate {
    /// `95%` half-widths, row-major.
    pub fn ci95(&self) -> Vec<f64> {
        self.std_error.iter().map(|s| Z95 * s).collect()
    }

    /// `⟨π(a)Φ, K̂ π(b)Φ⟩` and the half-width of its 95% interval.
    pub fn matrix_element(&self, rho: &ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix) -> (C64, f64) {
        let mean = matrix_element(rho, a, &self.mean, b);
        if self.samples < 2 {
            return (mean, 0.0);
        }
        let var: f64 =
            self.atoms.iter().map(|(w, x)| *w as f64 * (matrix_element(rho, a, x, b) - mean).norm_sqr()).sum::<f64>()
                / (self.samples - 1) as f64;
        (mean, Z95 * (var / self.samples as f64).sqrt().max(f64::EPSILON * mean.norm()))
    }
}

/// Estimate of `K_N` from `samples` uniform permutations (seeded).
pub fn mc_k_estimate(model: &PermutationModel, n: usize, samples: usize, seed: u64) -> Result<McEstimate> {
    let perms = sample_permutation(n, model.algebra().num_sites(), seed, samples)?;
    mc_mean_over(model, &perms)
}

/// Sample statistics of `x_σ^{1/2}` over an explicit list of permutations.
/// Repeated permutations (and permutations with equal `x_σ^{1/2}`) are
/// evaluated once and weighted by multiplicity, in lexicographic order.
pub fn mc_mean_over(model: &PermutationModel, perms: &[Permutation]) -> Result<McEstimate> {
    let dim = model.algebra().total_dim();
    let samples = perms.len();
    if samples == 0 {
        return Err(Error::InvalidRange("no samples".into()));
    }
    let mut counts: HashMap<&[usize], usize> = HashMap::new();
    for p in perms {
        *counts.entry(p.images()).or_default() += 1;
    }
    let mut distinct: Vec<(&[usize], usize)> = counts.into_iter().collect();
    distinct.sort_unstable();
    // Merge permutations with bit-identical x_σ^{1/2}, keeping first-seen order.
    let mut atoms: Vec<(usize, ComplexMatrix)> = Vec::new();
    let mut by_value: HashMap<Vec<u64>, usize> = HashMap::new();
    for &(img, w) in &distinct {
        let x = model.x_sigma_sqrt(&Permutation::new(img.to_vec())?)?;
        let key: Vec<u64> = x.as_slice().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect();
        match by_value.get(&key) {
            Some(&i) => atoms[i].0 += w,
            None => {
                by_value.insert(key, atoms.len());
                atoms.push((w, x));
            }
        }
    }
    let weighted = crate::reduce::tree_reduce(
        atoms.len(),
        |i| Ok(atoms[i].1.scale_real(atoms[i].0 as f64)),
        |mut x, y| {
            x += &y;
            x
        },
    )?
    .expect("at least one atom");
    let mean = weighted.scale_real(1.0 / samples as f64);
    let std_error = if samples < 2 {
        vec![0.0; dim * dim]
    } else {
        let sq = crate::reduce::tree_reduce(
            atoms.len(),
            |i| {
                let (w, x) = &atoms[i];
                Ok(x.as_slice()
                    .iter()
                    .zip(mean.as_slice())
                    .map(|(z, m)| *w as f64 * (z - m).norm_sqr())
                    .collect::<Vec<f64>>())
            },
            |mut x, y| {
                for (a, b) in x.iter_mut().zip(y) {
                    *a += b;
                }
                x
            },
        )?
        .expect("at least one atom");
        // The mean of identical-up-to-rounding values is only known to about
        // one ulp, so the reported error never drops below that resolution.
        sq.into_iter()
            .zip(mean.as_slice())
            .map(|(s, m)| (s / (samples - 1) as f64 / samples as f64).sqrt().max(f64::EPSILON * m.norm()))
            .collect()
    };
    Ok(McEstimate { mean, std_error, samples, atoms })
}

/// `ψ_G(π(a))` against the product formula `∏ tr(W a_n)`, and `‖Φ_G‖²`
/// against `(∏_{n∈F} tr(W_n^{1/2} W^{1/2}))²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductCheck {
    /// `ψ` computed from the top chain level `K_N Φ`.
    pub chain_value: C64,
    /// `ψ_G` computed from the closed-form `Φ_G = K_G Φ`.
    pub value: C64,
    /// `∏_n tr(W a_n)`.
    pub target: C64,
    pub value_discrepancy: f64,
    pub chain_discrepancy: f64,
    /// `‖K_G Φ‖²`.
    pub norm_sq: f64,
    pub norm_sq_target: f64,
    pub norm_discrepancy: f64,
}

pub fn phi_g_product_check(
    model: &PermutationModel,
    space: &GnsSpace,
    h_report: &HReport,
    top_k: &ComplexMatrix,
    a: &ElementaryTensor,
    tol: f64,
) -> Result<ProductCheck> {
    if !h_report.holds {
        let last = h_report.levels.last().map_or(0.0, |l| l.phi_norm_sq);
        return Err(Error::HypothesisHViolated(last));
    }
    let alg = model.algebra();
    let am = a.to_element(&alg)?.into_matrix();
    let k_g = k_limit_closed_form(model)?.into_matrix();
    let psi = InvariantState::new(space, GnsVector(k_g), tol)?;
    let value = psi.eval_element(space, &am)?;
    let chain_psi = InvariantState::new(space, GnsVector(top_k.clone()), tol)?;
    let chain_value = chain_psi.eval_element(space, &am)?;
    let w = model.state.tail_density();
    let target: C64 = a.factors().values().map(|b| w.trace_product(b)).product();
    let norm_sq_target = model.overlap_scalar()?.powi(2);
    Ok(ProductCheck {
        chain_value,
        value,
        target,
        value_discrepancy: (value - target).norm(),
        chain_discrepancy: (chain_value - target).norm(),
        norm_sq: psi.norm_sq(),
        norm_sq_target,
        norm_discrepancy: (psi.norm_sq() - norm_sq_target).abs(),
    })
}

/// Lemma-type pair value `φ((x_σ x_τ)^{1/2})` from the closed forms, for
/// commuting diagonal derivatives.
pub fn pair_value(model: &PermutationModel, sigma: &Permutation, tau: &Permutation) -> Result<f64> {
    let a = model.x_sigma_sqrt(sigma)?;
    let b = model.x_sigma_sqrt(tau)?;
    Ok(model.state.rho().trace_product(&(&a * &b)).re)
}
