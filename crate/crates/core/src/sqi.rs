//! Radon–Nikodym cocycles `g ↦ x_g` with `φ(g(a)) = φ(x_g a)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, ElementaryTensor, ProductState, TensorAlgebra};
use crate::error::{Error, Result};
use crate::group::{Automorphism, FiniteAutomorphismGroup, Permutation};
use crate::linalg::{eigh, inverse, psd_sqrt, ComplexMatrix, DEFAULT_PSD_TOL};

/// Default absolute tolerance of every cocycle check.
pub const DEFAULT_SQI_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as strictly positive.
pub const POSITIVITY_FLOOR: f64 = 1e-12;
/// Pass threshold of the cocycle identity.
pub const COCYCLE_TOL: f64 = 1e-9;

/// Deviations measured while solving for one `x_g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementChecks {
    /// `max_kl |φ(g(e_kl)) − φ(x_g e_kl)|`.
    pub defining_identity: f64,
    /// `max |x_g − x_g*|`.
    pub self_adjoint: f64,
    pub min_eigenvalue: f64,
    /// `max_kl |φ(x_g e_kl) − φ(e_kl x_g)|`.
    pub centralizer: f64,
}

/// `x_g` and `x_g^{1/2}` for every element of a group, indexed like the group.
#[derive(Clone, Debug)]
pub struct RnCocycle {
    group_label: String,
    algebra: TensorAlgebra,
    derivatives: Vec<ComplexMatrix>,
    sqrt_derivatives: Vec<ComplexMatrix>,
    checks: Vec<ElementChecks>,
}

impl RnCocycle {
    pub fn group_label(&self) -> &str {
        &self.group_label
    }

    pub fn algebra(&self) -> TensorAlgebra {
        self.algebra
    }

    pub fn len(&self) -> usize {
        self.derivatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.derivatives.is_empty()
    }

    pub fn x(&self, i: usize) -> Result<&ComplexMatrix> {
        self.derivatives.get(i).ok_or(Error::MissingDerivative(i))
    }

    pub fn x_sqrt(&self, i: usize) -> Result<&ComplexMatrix> {
        self.sqrt_derivatives.get(i).ok_or(Error::MissingDerivative(i))
    }

    pub fn derivatives(&self) -> &[ComplexMatrix] {
        &self.derivatives
    }

    pub fn sqrt_derivatives(&self) -> &[ComplexMatrix] {
        &self.sqrt_derivatives
    }

    pub fn checks(&self) -> &[ElementChecks] {
        &self.checks
    }

    /// Keep only the listed elements, in order (restriction to a subgroup).
    pub fn restrict(&self, label: impl Into<String>, indices: &[usize]) -> Result<RnCocycle> {
        let pick = |v: &Vec<ComplexMatrix>| -> Result<Vec<ComplexMatrix>> {
            indices.iter().map(|&i| v.get(i).cloned().ok_or(Error::MissingDerivative(i))).collect()
        };
        Ok(RnCocycle {
            group_label: label.into(),
            algebra: self.algebra,
            derivatives: pick(&self.derivatives)?,
            sqrt_derivatives: pick(&self.sqrt_derivatives)?,
            checks: indices.iter().map(|&i| self.checks[i]).collect(),
        })
    }
}

/// `M[l, k] = φ(g(e_kl))`, evaluated without forming `g(e_kl)`.
fn unit_values(phi: &ProductState, g: &Automorphism) -> Result<ComplexMatrix> {
    let alg = phi.algebra();
    let rho = phi.rho();
    match g {
        Automorphism::SitePermutation(p) => {
            // g(e_kl) = e_{p(k) p(l)}, so φ(g(e_kl)) = ρ[p(l), p(k)].
            let map = p.basis_map(&alg)?;
            Ok(ComplexMatrix::from_fn(alg.total_dim(), alg.total_dim(), |l, k| rho[(map[l], map[k])]))
        }
        Automorphism::InnerUnitary(u) => {
            // g(e_kl) = u_k u_l*, so φ(g(e_kl)) = u_l* ρ u_k.
            if u.rows() != alg.total_dim() {
                return Err(Error::DimensionMismatch { expected: alg.total_dim(), got: u.rows() });
            }
            Ok(&(&u.adjoint() * rho) * u)
        }
    }
}

fn element_name(g: &Automorphism) -> String {
    match g {
        Automorphism::SitePermutation(p) => format!("{:?}", p.images()),
        Automorphism::InnerUnitary(_) => "inner".into(),
    }
}

/// `x_g = ρ⁻¹ g⁻¹(ρ)` together with its checks.
fn solve_checked(phi: &ProductState, g: &Automorphism, tol: f64) -> Result<(ComplexMatrix, ElementChecks)> {
    let alg = phi.algebra();
    let rho = phi.rho();
    let rho_inv = inverse(rho, 0.0).map_err(|e| match e {
        Error::Singular(s) => Error::StateSingular(s),
        other => other,
    })?;
    let moved = g.inverse().apply_matrix(rho, &alg)?;
    let x = &rho_inv * &moved;
    let fail = |reason: String| Error::NotQuasiInvariant { element: element_name(g), reason };

    let self_adjoint = x.hermitian_deviation();
    if self_adjoint > tol {
        return Err(fail(format!("ρ⁻¹g⁻¹(ρ) is not self-adjoint (deviation {self_adjoint:.3e})")));
    }
    let x = x.hermitian_part();
    let min_eigenvalue = eigh(&x, tol)?.min_value();
    if !(min_eigenvalue > POSITIVITY_FLOOR) {
        return Err(fail(format!("derivative is not strictly positive (min eigenvalue {min_eigenvalue:.3e})")));
    }
    // φ(x e_kl) = (ρx)[l, k]; φ(e_kl x) = (xρ)[l, k].
    let rho_x = rho * &x;
    let defining_identity = unit_values(phi, g)?.max_abs_diff(&rho_x);
    if defining_identity > tol {
        return Err(fail(format!("φ(g(a)) ≠ φ(x_g a) on matrix units (deviation {defining_identity:.3e})")));
    }
    let centralizer = rho_x.max_abs_diff(&(&x * rho));
    Ok((x, ElementChecks { defining_identity, self_adjoint, min_eigenvalue, centralizer }))
}

/// `x_g = ρ⁻¹ g⁻¹(ρ)`, returned only if it is self-adjoint, strictly
/// positive and satisfies `φ(g(e_kl)) = φ(x_g e_kl)` on all matrix units.
pub fn solve_rn_derivative(phi: &ProductState, g: &Automorphism) -> Result<AlgebraElement> {
    solve_rn_derivative_with(phi, g, DEFAULT_SQI_TOL)
}

pub fn solve_rn_derivative_with(phi: &ProductState, g: &Automorphism, tol: f64) -> Result<AlgebraElement> {
    let (x, _) = solve_checked(phi, g, tol)?;
    phi.algebra().element(x)
}

/// Closed form `x_σ = ∏_{n ∈ Λ_σ} j_n(W_{σ(n)} W_n⁻¹)` for a site permutation.
/// Shorter permutations are extended by fixed sites.
pub fn perm_model_rn(phi: &ProductState, sigma: &Permutation) -> Result<AlgebraElement> {
    let alg = phi.algebra();
    if sigma.len() > alg.num_sites() {
        return Err(Error::SiteOutOfRange { site: sigma.len() - 1, num_sites: alg.num_sites() });
    }
    let sigma = sigma.extend(alg.num_sites())?;
    let mut t = ElementaryTensor::identity();
    for n in sigma.support() {
        if phi.density(sigma.image(n)) == phi.density(n) {
            continue;
        }
        let w_inv = inverse(phi.density(n), 0.0)?;
        t = t.with(n, phi.density(sigma.image(n)) * &w_inv);
    }
    t.to_element(&alg)
}

/// Solve and check `x_g` for every element of `group`.
pub fn compute_cocycle(phi: &ProductState, group: &FiniteAutomorphismGroup, tol: f64) -> Result<RnCocycle> {
    let solved = group
        .elements()
        .par_iter()
        .map(|g| {
            let (x, checks) = solve_checked(phi, g, tol)?;
            let s = psd_sqrt(&x, DEFAULT_PSD_TOL.max(tol))?;
            Ok((x, s, checks))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut derivatives = Vec::with_capacity(solved.len());
    let mut sqrt_derivatives = Vec::with_capacity(solved.len());
    let mut checks = Vec::with_capacity(solved.len());
    for (x, s, c) in solved {
        derivatives.push(x);
        sqrt_derivatives.push(s);
        checks.push(c);
    }
    Ok(RnCocycle {
        group_label: group.label().to_string(),
        algebra: phi.algebra(),
        derivatives,
        sqrt_derivatives,
        checks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub max_deviation: f64,
    pub pass: bool,
}

/// `max_g ‖x_g⁻¹ − g⁻¹(x_{g⁻¹})‖` (Frobenius); passes at `1e-9`.
pub fn verify_cocycle_identity(c: &RnCocycle, group: &FiniteAutomorphismGroup) -> Result<CheckResult> {
    if c.len() < group.order() {
        return Err(Error::MissingDerivative(c.len()));
    }
    let alg = c.algebra;
    let devs = (0..group.order())
        .into_par_iter()
        .map(|i| {
            let gi = group.inverse_index(i);
            let lhs = inverse(c.x(i)?, 0.0)?;
            let rhs = group.element(gi).apply_matrix(c.x(gi)?, &alg)?;
            Ok(lhs.distance(&rhs))
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_deviation = devs.into_iter().fold(0.0, f64::max);
    Ok(CheckResult { max_deviation, pass: max_deviation <= COCYCLE_TOL })
}

/// Centralizer check: `max |φ(x_g a) − φ(a x_g)|` over elements and matrix
/// units, together with the pairwise commutators `‖[x_g, x_h]‖`.
pub fn verify_centralizer(phi: &ProductState, c: &RnCocycle) -> Result<CheckResult> {
    verify_centralizer_with(phi, c, DEFAULT_SQI_TOL)
}

pub fn verify_centralizer_with(phi: &ProductState, c: &RnCocycle, tol: f64) -> Result<CheckResult> {
    if c.algebra != phi.algebra() {
        return Err(Error::AlgebraMismatch);
    }
    let rho = phi.rho();
    let central = c.derivatives.par_iter().map(|x| (rho * x).max_abs_diff(&(x * rho))).reduce(|| 0.0, f64::max);
    let commuting = max_pairwise_commutator(&c.derivatives);
    let max_deviation = central.max(commuting);
    Ok(CheckResult { max_deviation, pass: max_deviation <= tol })
}

/// `max_{g,h} ‖[x_g, x_h]‖`; zero without pairwise work when all are diagonal.
pub fn max_pairwise_commutator(xs: &[ComplexMatrix]) -> f64 {
    if xs.iter().all(ComplexMatrix::is_diagonal) {
        return 0.0;
    }
    (0..xs.len())
        .into_par_iter()
        .map(|i| xs[i + 1..].iter().map(|y| xs[i].commutator_norm(y)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqiChecks {
    pub defining_identity: f64,
    pub self_adjoint: f64,
    pub positivity: f64,
    pub cocycle: f64,
    pub centralizer: f64,
}

/// Verification report `{"group", "checks": {...}, "pass"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqiReport {
    pub group: String,
    pub checks: SqiChecks,
    pub pass: bool,
}

pub fn verification_report(
    phi: &ProductState,
    group: &FiniteAutomorphismGroup,
    c: &RnCocycle,
    tol: f64,
) -> Result<SqiReport> {
    let fold = |f: fn(&ElementChecks) -> f64| c.checks.iter().map(f).fold(0.0, f64::max);
    let defining_identity = fold(|e| e.defining_identity);
    let self_adjoint = fold(|e| e.self_adjoint);
    let positivity = c.checks.iter().map(|e| e.min_eigenvalue).fold(f64::INFINITY, f64::min);
    let cocycle = verify_cocycle_identity(c, group)?;
    let centralizer = verify_centralizer_with(phi, c, tol)?;
    let pass = defining_identity <= tol
        && self_adjoint <= tol
        && positivity > POSITIVITY_FLOOR
        && cocycle.pass
        && centralizer.pass;
    Ok(SqiReport {
        group: group.label().to_string(),
        checks: SqiChecks {
            defining_identity,
            self_adjoint,
            positivity,
            cocycle: cocycle.max_deviation,
            centralizer: centralizer.max_deviation,
        },
        pass,
    })
}
