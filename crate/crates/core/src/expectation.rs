//! Group-averaged conditional expectations `E_N`, Umegaki checks, and
//! decreasing martingales `x_N = E_N(x)` along a chain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::TensorAlgebra;
use crate::error::{Error, Result};
use crate::gns::{unitary_u, GnsOperator, GnsSpace, InvariantState};
use crate::group::{FiniteAutomorphismGroup, GroupChain};
use crate::linalg::{eigh, singular_values, ComplexMatrix};
use crate::reduce::mean_matrix;
use crate::sqi::RnCocycle;

/// Contractivity slack: `‖E(x)‖ ≤ ‖x‖ + 1e-12`.
pub const CONTRACTIVITY_SLACK: f64 = 1e-12;
/// Positivity slack: `E(x*x)` may have eigenvalues down to `-1e-10`.
pub const POSITIVITY_SLACK: f64 = 1e-10;
/// Pass threshold of the Umegaki deviations.
pub const UMEGAKI_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `a ↦ (1/|G|) Σ g(a)` on algebra elements.
    AlgebraLevel,
    /// `X ↦ (1/|G|) Σ U_g X U_g*` on GNS operators.
    GnsLevel,
}

/// Argument and result of [`ConditionalExpectation::expect`].
#[derive(Clone, Debug)]
pub enum Observable {
    Element(ComplexMatrix),
    Operator(GnsOperator),
}

/// `E = ∫ u_g dg` for a finite group.
#[derive(Clone, Copy, Debug)]
pub struct ConditionalExpectation<'a> {
    group: &'a FiniteAutomorphismGroup,
    algebra: TensorAlgebra,
    gns: Option<(&'a GnsSpace, &'a RnCocycle)>,
}

impl<'a> ConditionalExpectation<'a> {
    pub fn algebra_level(group: &'a FiniteAutomorphismGroup, algebra: TensorAlgebra) -> Self {
        ConditionalExpectation { group, algebra, gns: None }
    }

    pub fn gns_level(group: &'a FiniteAutomorphismGroup, space: &'a GnsSpace, cocycle: &'a RnCocycle) -> Self {
        ConditionalExpectation { group, algebra: space.algebra(), gns: Some((space, cocycle)) }
    }

    pub fn mode(&self) -> Mode {
        if self.gns.is_some() {
            Mode::GnsLevel
        } else {
            Mode::AlgebraLevel
        }
    }

    pub fn group(&self) -> &FiniteAutomorphismGroup {
        self.group
    }

    pub fn expect(&self, x: &Observable) -> Result<Observable> {
        match (x, self.gns) {
            (Observable::Element(a), None) => Ok(Observable::Element(self.expect_element(a)?)),
            (Observable::Operator(op), Some((space, cocycle))) => {
                let xd = op.to_dense(space)?;
                let m = mean_matrix(self.group.order(), |i| {
                    let u = unitary_u(space, self.group, cocycle, i)?.to_dense(space)?;
                    Ok(&(&u * &xd) * &u.adjoint())
                })?
                .expect("groups are nonempty");
                Ok(Observable::Operator(GnsOperator::Dense(m)))
            }
            _ => Err(Error::ModeMismatch),
        }
    }

    /// `(1/|G|) Σ g(a)`.
    pub fn expect_element(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.group.average(a, &self.algebra)
    }

    /// `max_g ‖g(a) − a‖` (C*-norm).
    pub fn fixed_deviation(&self, a: &ComplexMatrix) -> Result<f64> {
        let mut worst = 0.0f64;
        for g in self.group.elements() {
            worst = worst.max(op_norm(&(&g.apply_matrix(a, &self.algebra)? - a)));
        }
        Ok(worst)
    }
}

fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.max_abs() == 0.0 {
        0.0
    } else {
        singular_values(m).into_iter().fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UmegakiReport {
    /// `max ‖E(y x y') − y E(x) y'‖`.
    pub module: f64,
    /// `max |ψ(E(x)) − ψ(x)|`.
    pub psi_invariance: f64,
    /// `max ‖E(E(x)) − E(x)‖`.
    pub idempotence: f64,
    /// `max (‖E(x)‖ − ‖x‖)`, clipped at 0.
    pub contractivity_excess: f64,
    /// `min λ_min(E(x* x))`.
    pub positivity_min_eig: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Check the Umegaki properties of an algebra-level expectation on seeded
/// random elements; `y, y'` are drawn as images `E(r)` of random `r`.
pub fn verify_umegaki(
    e: &ConditionalExpectation<'_>,
    space: &GnsSpace,
    psi: &InvariantState,
    sample_count: usize,
    seed: u64,
) -> Result<UmegakiReport> {
    if e.mode() != Mode::AlgebraLevel {
        return Err(Error::ModeMismatch);
    }
    if !(psi.norm_sq() > 0.0) {
        return Err(Error::HypothesisHViolated(psi.norm_sq()));
    }
    let d = e.algebra.total_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = UmegakiReport {
        module: 0.0,
        psi_invariance: 0.0,
        idempotence: 0.0,
        contractivity_excess: 0.0,
        positivity_min_eig: f64::INFINITY,
        samples: sample_count,
        pass: false,
    };
    for _ in 0..sample_count {
        let x = ComplexMatrix::random(&mut rng, d, d);
        let y = e.expect_element(&ComplexMatrix::random(&mut rng, d, d))?;
        let y2 = e.expect_element(&ComplexMatrix::random(&mut rng, d, d))?;
        let ex = e.expect_element(&x)?;

        let lhs = e.expect_element(&(&(&y * &x) * &y2))?;
        let rhs = &(&y * &ex) * &y2;
        r.module = r.module.max(op_norm(&(&lhs - &rhs)));

        let dpsi = (psi.eval_element(space, &ex)? - psi.eval_element(space, &x)?).norm();
        r.psi_invariance = r.psi_invariance.max(dpsi);

        r.idempotence = r.idempotence.max(op_norm(&(&e.expect_element(&ex)? - &ex)));
        r.contractivity_excess = r.contractivity_excess.max(op_norm(&ex) - op_norm(&x)).max(0.0);

        let exx = e.expect_element(&(&x.adjoint() * &x))?;
        r.positivity_min_eig = r.positivity_min_eig.min(eigh(&exx.hermitian_part(), f64::INFINITY)?.min_value());
    }
    r.pass = r.module <= UMEGAKI_TOL
        && r.psi_invariance <= UMEGAKI_TOL
        && r.idempotence <= UMEGAKI_TOL
        && r.contractivity_excess <= CONTRACTIVITY_SLACK
        && (sample_count == 0 || r.positivity_min_eig >= -POSITIVITY_SLACK);
    Ok(r)
}

/// `dim Fix(u_G)` at algebra level: the trace of the averaging
/// superoperator, which is a projection.
pub fn fixed_dimension(group: &FiniteAutomorphismGroup, alg: &TensorAlgebra) -> usize {
    let t: f64 = group.elements().iter().map(|g| g.superoperator_trace(alg)).sum::<f64>() / group.order() as f64;
    t.round() as usize
}

/// `dim Fix(u_G)` as the numerical rank of the dense averaging
/// superoperator; requires `D² ≤ dense_cap`.
pub fn fixed_dimension_by_rank(
    group: &FiniteAutomorphismGroup,
    alg: &TensorAlgebra,
    dense_cap: usize,
) -> Result<usize> {
    let d = alg.total_dim();
    let n = d * d;
    if n > dense_cap {
        return Err(Error::DenseCapExceeded { dim: n, cap: dense_cap });
    }
    let cols = (0..n).map(|c| group.average(&ComplexMatrix::unit(d, c / d, c % d), alg)).collect::<Result<Vec<_>>>()?;
    let m = ComplexMatrix::from_fn(n, n, |i, j| cols[j].as_slice()[i]);
    Ok(singular_values(&m).into_iter().filter(|&s| s > 0.5).count())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleLevel {
    #[serde(rename = "N")]
    pub n: usize,
    pub group_order: usize,
    /// `‖x_N − x_{N−1}‖`, with `x_0 := x`.
    pub increment_norm: f64,
    /// `max_{M ≤ N} max(‖E_N(x_M) − x_N‖, ‖E_M(x_N) − x_N‖)`.
    pub martingale_max_dev: f64,
    /// `|ψ(x_N) − ψ(x)|`.
    pub psi_invariance_dev: f64,
    /// `max_{g ∈ G_N} ‖g(x_N) − x_N‖`.
    pub fixed_dev: f64,
    pub fixed_dim: usize,
}

#[derive(Clone, Debug)]
pub struct MartingaleRun {
    pub levels: Vec<MartingaleLevel>,
    pub values: Vec<ComplexMatrix>,
    /// Last increment at or below the convergence tolerance.
    pub converged: bool,
    /// `ψ_G` faithfulness certified (bounded inverse of `K`).
    pub certified: bool,
}

impl MartingaleRun {
    pub fn limit(&self) -> &ComplexMatrix {
        self.values.last().expect("runs have at least one level")
    }

    pub fn max_martingale_dev(&self) -> f64 {
        self.levels.iter().map(|l| l.martingale_max_dev).fold(0.0, f64::max)
    }

    /// CSV with columns `N,group_order,increment_norm,martingale_max_dev,psi_invariance_dev,fixed_dim`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,group_order,increment_norm,martingale_max_dev,psi_invariance_dev,fixed_dim\n");
        for l in &self.levels {
            out.push_str(&format!(
                "{},{},{:?},{:?},{:?},{}\n",
                l.n, l.group_order, l.increment_norm, l.martingale_max_dev, l.psi_invariance_dev, l.fixed_dim
            ));
        }
        out
    }
}

/// Options for [`martingale_run`].
#[derive(Clone, Copy, Debug)]
pub struct MartingaleOptions {
    pub convergence_tol: f64,
    /// Smallest singular value of `K` at the top level, if known.
    pub k_min_sv: Option<f64>,
    pub certificate_tol: f64,
    pub dense_cap: usize,
}

impl Default for MartingaleOptions {
    fn default() -> Self {
        MartingaleOptions { convergence_tol: 1e-8, k_min_sv: None, certificate_tol: 1e-10, dense_cap: 4096 }
    }
}

/// `x_N = E_N(x)` for every level of `chain`, with the martingale identities.
pub fn martingale_run(
    chain: &GroupChain,
    alg: &TensorAlgebra,
    x: &ComplexMatrix,
    space: &GnsSpace,
    psi: &InvariantState,
    opts: MartingaleOptions,
) -> Result<MartingaleRun> {
    let psi_x = psi.eval_element(space, x)?;
    let mut values: Vec<ComplexMatrix> = Vec::with_capacity(chain.len());
    let mut levels = Vec::with_capacity(chain.len());
    for (k, group) in chain.groups().iter().enumerate() {
        let e = ConditionalExpectation::algebra_level(group, *alg);
        let xn = e.expect_element(x)?;
        let increment_norm = op_norm(&(&xn - values.last().unwrap_or(x)));
        let mut dev = 0.0f64;
        for (m, xm) in values.iter().enumerate() {
            dev = dev.max(op_norm(&(&e.expect_element(xm)? - &xn)));
            let em = ConditionalExpectation::algebra_level(&chain.groups()[m], *alg);
            dev = dev.max(op_norm(&(&em.expect_element(&xn)? - &xn)));
        }
        dev = dev.max(op_norm(&(&e.expect_element(&xn)? - &xn)));
        let psi_invariance_dev = (psi.eval_element(space, &xn)? - psi_x).norm();
        let fixed_dev = e.fixed_deviation(&xn)?;
        let fixed_dim = fixed_dimension(group, alg);
        if alg.total_dim().pow(2) <= opts.dense_cap.min(256) {
            let by_rank = fixed_dimension_by_rank(group, alg, opts.dense_cap)?;
            if by_rank != fixed_dim {
                return Err(Error::ConsistencyFailure(format!(
                    "fixed dimension {fixed_dim} from the trace but {by_rank} from the rank"
                )));
            }
        }
        levels.push(MartingaleLevel {
            n: chain.levels()[k],
            group_order: group.order(),
            increment_norm,
            martingale_max_dev: dev,
            psi_invariance_dev,
            fixed_dev,
            fixed_dim,
        });
        values.push(xn);
    }
    let converged = levels.last().is_some_and(|l| l.increment_norm <= opts.convergence_tol);
    let certified = opts.k_min_sv.is_some_and(|s| s > opts.certificate_tol);
    Ok(MartingaleRun { levels, values, converged, certified })
}

/// `max ‖E_N(E_M(x)) − E_N(x)‖` and `‖E_M(E_N(x)) − E_N(x)‖` over the matrix
/// units `x` and all chain levels `M ≤ N`.
pub fn martingale_identity_deviation(chain: &GroupChain, alg: &TensorAlgebra) -> Result<f64> {
    let d = alg.total_dim();
    martingale_identity_deviation_by(chain, alg, d * d, |u| Ok(ComplexMatrix::unit(d, u / d, u % d)))
}

/// Same deviation over an explicit list of elements, for algebras too large
/// for a sweep over matrix units.
pub fn martingale_identity_deviation_on(chain: &GroupChain, alg: &TensorAlgebra, xs: &[ComplexMatrix]) -> Result<f64> {
    martingale_identity_deviation_by(chain, alg, xs.len(), |i| Ok(xs[i].clone()))
}

fn martingale_identity_deviation_by(
    chain: &GroupChain,
    alg: &TensorAlgebra,
    count: usize,
    element: impl Fn(usize) -> Result<ComplexMatrix> + Sync,
) -> Result<f64> {
    let exps: Vec<_> = chain.groups().iter().map(|g| ConditionalExpectation::algebra_level(g, *alg)).collect();
    let per_element = crate::reduce::tree_reduce(
        count,
        |u| {
            let x = element(u)?;
            let images = exps.iter().map(|e| e.expect_element(&x)).collect::<Result<Vec<_>>>()?;
            let mut worst = 0.0f64;
            for n in 0..exps.len() {
                for m in 0..=n {
                    worst = worst.max(exps[n].expect_element(&images[m])?.max_abs_diff(&images[n]));
                    worst = worst.max(exps[m].expect_element(&images[n])?.max_abs_diff(&images[n]));
                }
            }
            Ok(worst)
        },
        f64::max,
    )?;
    Ok(per_element.unwrap_or(0.0))
}

/// `E_∞(x)`: the top-level average of a run.
#[derive(Clone, Debug)]
pub struct EInfinity {
    pub value: ComplexMatrix,
    pub converged: bool,
    /// `max_g ‖g(E_∞(x)) − E_∞(x)‖` over the top group.
    pub fixed_dev: f64,
}

pub fn e_infinity(run: &MartingaleRun, chain: &GroupChain, alg: &TensorAlgebra) -> Result<EInfinity> {
    let value = run.limit().clone();
    let fixed_dev = ConditionalExpectation::algebra_level(chain.top(), *alg).fixed_deviation(&value)?;
    Ok(EInfinity { value, converged: run.converged, fixed_dev })
}
