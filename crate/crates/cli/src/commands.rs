//! The four subcommands. Each returns a serializable report whose `pass`
//! flag decides the exit status.

use std::ops::RangeInclusive;

use anyhow::Result;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qistate_core::algebra::{ElementaryTensor, TensorAlgebra};
use qistate_core::error::Error;
use qistate_core::expectation::{
    e_infinity, martingale_identity_deviation, martingale_identity_deviation_on, martingale_run, verify_umegaki,
    ConditionalExpectation, MartingaleLevel, MartingaleOptions, UmegakiReport,
};
use qistate_core::gns::{
    gns_build_with_cap, hypothesis_h_report, k_operator, phi_g_vector, projection_p, unitary_u, GnsSpace, GnsVector,
    HReport, InvariantState, WitnessSet,
};
use qistate_core::group::{rotation_example, FiniteAutomorphismGroup, GroupChain};
use qistate_core::linalg::ComplexMatrix;
use qistate_core::perm_model::{convergence_experiment, ConvergenceResult, McSettings, PermutationModel};
use qistate_core::sqi::{compute_cocycle, verification_report, RnCocycle, SqiReport, POSITIVITY_FLOOR};

use crate::model::{dense_cap_override, Model};

/// Samples for the Umegaki suite.
const UMEGAKI_SAMPLES: usize = 100;
/// Random vectors for the representation and projection suites.
const SUITE_VECTORS: usize = 4;
/// Pairs `(g, h)` checked per vector when the group is too large for all pairs.
const PAIR_SAMPLES: usize = 600;
/// Random elements for the martingale identity when matrix units are too many.
const MARTINGALE_SAMPLES: usize = 64;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `"le"`: pass when `value ≤ threshold`; `"gt"`: when `value > threshold`.
    pub relation: &'static str,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, relation: "le", pass: value <= threshold }
    }

    fn above(name: &str, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, relation: "gt", pass: value > threshold }
    }
}

fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

fn cocycles(model: &Model, chain: &GroupChain) -> Result<Vec<RnCocycle>> {
    Ok(chain
        .groups()
        .iter()
        .map(|g| compute_cocycle(&model.state, g, model.tolerances.exact))
        .collect::<qistate_core::error::Result<Vec<_>>>()?)
}

fn witness(model: &Model) -> WitnessSet {
    if model.is_rotation() {
        WitnessSet::WholeGroup
    } else {
        WitnessSet::Outer { m0: model_m0(model) }
    }
}

fn model_m0(model: &Model) -> usize {
    model.m0.unwrap_or_else(|| model.state.special_sites().keys().next_back().copied().unwrap_or(0))
}

fn random_vector(space: &GnsSpace, rng: &mut ChaCha8Rng) -> GnsVector {
    let d = space.algebra().total_dim();
    GnsVector(ComplexMatrix::random(rng, d, d))
}

/// Relative homomorphism and unitarity defects of `g ↦ U_g` on random vectors.
fn representation_defects(
    space: &GnsSpace,
    group: &FiniteAutomorphismGroup,
    c: &RnCocycle,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let us =
        (0..group.order()).map(|i| unitary_u(space, group, c, i)).collect::<qistate_core::error::Result<Vec<_>>>()?;
    let n = group.order();
    let pairs: Vec<(usize, usize)> = if n * n <= PAIR_SAMPLES {
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
    } else {
        (0..PAIR_SAMPLES).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect()
    };
    let (mut hom, mut unit) = (0.0f64, 0.0f64);
    for _ in 0..SUITE_VECTORS {
        let v = random_vector(space, rng);
        let w = random_vector(space, rng);
        let scale = space.norm(&v);
        let images = us.iter().map(|u| u.apply(space, &v)).collect::<qistate_core::error::Result<Vec<_>>>()?;
        for &(i, j) in &pairs {
            let lhs = us[i].apply(space, &images[j])?;
            hom = hom.max(space.distance(&lhs, &images[group.compose_index(i, j)]) / scale);
        }
        let before = space.inner(&v, &w);
        for (u, uv) in us.iter().zip(&images) {
            let after = space.inner(uv, &u.apply(space, &w)?);
            unit = unit.max((after - before).norm() / (scale * space.norm(&w)));
        }
    }
    Ok((hom, unit))
}

/// `max ‖P_N P_M v − P_N v‖, ‖P_M P_N v − P_N v‖` over chain levels, relative.
fn projection_chain_defect(
    space: &GnsSpace,
    chain: &GroupChain,
    cs: &[RnCocycle],
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let ps = chain
        .groups()
        .iter()
        .zip(cs)
        .map(|(g, c)| projection_p(space, g, c))
        .collect::<qistate_core::error::Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for _ in 0..SUITE_VECTORS {
        let v = random_vector(space, rng);
        let scale = space.norm(&v);
        let images = ps.iter().map(|p| p.apply(space, &v)).collect::<qistate_core::error::Result<Vec<_>>>()?;
        for n in 0..ps.len() {
            for m in 0..=n {
                worst = worst.max(space.distance(&ps[n].apply(space, &images[m])?, &images[n]) / scale);
                worst = worst.max(space.distance(&ps[m].apply(space, &images[n])?, &images[n]) / scale);
            }
        }
    }
    Ok(worst)
}

fn build_space(model: &Model) -> Result<GnsSpace> {
    Ok(gns_build_with_cap(&model.state, model.budget.max_dense_dim)?)
}

#[derive(Debug, Serialize)]
pub struct Example2Report {
    pub command: &'static str,
    pub beta: f64,
    pub x_quarter_turn: ComplexMatrix,
    pub k_g: ComplexMatrix,
    pub k_min_singular_value: f64,
    pub phi_g_norm_sq: f64,
    pub psi_g_e11: C64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// The rotation example against its closed forms.
pub fn example2(beta: f64, seed: u64) -> Result<Example2Report> {
    let (state, group) = rotation_example(beta)?;
    let cap = dense_cap_override()?.unwrap_or(qistate_core::gns::DEFAULT_DENSE_CAP);
    let space = gns_build_with_cap(&state, cap)?;
    let c = compute_cocycle(&state, &group, 1e-10)?;
    let h = (beta / 2.0).exp();
    let mut checks = Vec::new();

    // Odd quarter turns swap the diagonal of ρ; even ones fix it.
    let swap = ComplexMatrix::from_diag(&[(-beta).exp(), beta.exp()]);
    let one = ComplexMatrix::identity(2);
    let x_dev = (0..group.order())
        .map(|i| Ok(c.x(i)?.max_abs_diff(if i % 2 == 1 { &swap } else { &one })))
        .collect::<qistate_core::error::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::at_most("derivatives_closed_form", x_dev, 1e-12));

    let k = k_operator(&c)?;
    let k_oracle = ComplexMatrix::from_diag(&[0.5 * (1.0 + 1.0 / h), 0.5 * (1.0 + h)]);
    checks.push(Check::at_most("k_g_closed_form", k.matrix.max_abs_diff(&k_oracle), 1e-12));

    let p = projection_p(&space, &group, &c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p_dev = 0.0f64;
    let half = C64::new(0.5, 0.0);
    for _ in 0..10 {
        let a = ComplexMatrix::random(&mut rng, 2, 2);
        let got = p.apply(&space, &GnsVector(a.clone()))?;
        let oracle = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                half * (a[(0, 0)] + a[(1, 1)] / h),
                half * (a[(0, 1)] - a[(1, 0)] * h),
                half * (a[(1, 0)] - a[(0, 1)] / h),
                half * (a[(1, 1)] + a[(0, 0)] * h),
            ],
        )?;
        p_dev = p_dev.max(space.distance(&got, &GnsVector(oracle)));
    }
    checks.push(Check::at_most("projection_closed_form", p_dev, 1e-10));

    let (hom, unit) = representation_defects(&space, &group, &c, &mut rng)?;
    checks.push(Check::at_most("representation", hom, 1e-10));
    checks.push(Check::at_most("unitarity", unit, 1e-10));

    let phi_g = phi_g_vector(&space, &group, &c, 1e-10)?;
    let psi = InvariantState::new(&space, phi_g, 1e-10)?;
    let rho11 = 1.0 / (1.0 + (-beta).exp());
    let norm_oracle = 0.25 * (rho11 * (1.0 + 1.0 / h).powi(2) + (1.0 - rho11) * (1.0 + h).powi(2));
    checks.push(Check::at_most("phi_g_norm_closed_form", (psi.norm_sq() - norm_oracle).abs(), 1e-10));

    let alg = space.algebra();
    let mut inv = 0.0f64;
    for _ in 0..20 {
        let a = ComplexMatrix::random(&mut rng, 2, 2);
        let base = psi.eval_element(&space, &a)?;
        for g in group.elements() {
            inv = inv.max((psi.eval_element(&space, &g.apply_matrix(&a, &alg)?)? - base).norm());
        }
    }
    checks.push(Check::at_most("psi_g_invariance", inv, 1e-10));

    let psi_g_e11 = psi.eval_element(&space, &ComplexMatrix::unit(2, 0, 0))?;
    let pass = all_pass(&checks);
    Ok(Example2Report {
        command: "example2",
        beta,
        x_quarter_turn: c.x(1)?.clone(),
        k_g: k.matrix.clone(),
        k_min_singular_value: k.min_singular_value,
        phi_g_norm_sq: psi.norm_sq(),
        psi_g_e11,
        checks,
        pass,
    })
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub groups: Vec<String>,
    pub cocycles: Vec<SqiReport>,
    pub umegaki: Option<UmegakiReport>,
    pub hypothesis_h: HReport,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Cocycle, representation, projection, Umegaki and martingale suites.
pub fn verify(model: &Model, seed: u64) -> Result<VerifyReport> {
    let tol = model.tolerances.exact;
    let chain = model.chain()?;
    let cs = cocycles(model, &chain)?;
    let space = build_space(model)?;
    let alg = space.algebra();
    let top = chain.top();
    let top_c = cs.last().expect("chains are nonempty");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let reports = chain
        .groups()
        .iter()
        .zip(&cs)
        .map(|(g, c)| verification_report(&model.state, g, c, tol))
        .collect::<qistate_core::error::Result<Vec<_>>>()?;
    let worst = |f: fn(&SqiReport) -> f64| reports.iter().map(f).fold(0.0, f64::max);
    checks.push(Check::at_most("defining_identity", worst(|r| r.checks.defining_identity), tol));
    checks.push(Check::at_most("self_adjoint", worst(|r| r.checks.self_adjoint), tol));
    checks.push(Check::at_most("cocycle_identity", worst(|r| r.checks.cocycle), qistate_core::sqi::COCYCLE_TOL));
    checks.push(Check::at_most("centralizer", worst(|r| r.checks.centralizer), tol));
    let positivity = reports.iter().map(|r| r.checks.positivity).fold(f64::INFINITY, f64::min);
    checks.push(Check::above("derivative_positivity", positivity, POSITIVITY_FLOOR));

    let (hom, unit) = representation_defects(&space, top, top_c, &mut rng)?;
    checks.push(Check::at_most("representation", hom, tol));
    checks.push(Check::at_most("unitarity", unit, tol));
    checks.push(Check::at_most("projection_chain", projection_chain_defect(&space, &chain, &cs, &mut rng)?, tol));

    let d = alg.total_dim();
    let martingale = if d * d <= model.budget.max_dense_dim {
        martingale_identity_deviation(&chain, &alg)?
    } else {
        let xs: Vec<ComplexMatrix> = (0..MARTINGALE_SAMPLES).map(|_| ComplexMatrix::random(&mut rng, d, d)).collect();
        martingale_identity_deviation_on(&chain, &alg, &xs)?
    };
    checks.push(Check::at_most("martingale_identity", martingale, tol));

    let hypothesis_h = hypothesis_h_report(&space, &chain, &cs, witness(model), tol)?;
    checks.push(Check::above("hypothesis_h_norm", hypothesis_h.levels.last().map_or(0.0, |l| l.phi_norm_sq), tol));

    let umegaki = match invariant_state(&space, top, top_c, tol) {
        Ok(psi) => {
            let e = ConditionalExpectation::algebra_level(top, alg);
            let r = verify_umegaki(&e, &space, &psi, UMEGAKI_SAMPLES, seed)?;
            let worst = r.module.max(r.psi_invariance).max(r.idempotence);
            let mut check = Check::at_most("umegaki", worst, qistate_core::expectation::UMEGAKI_TOL);
            // Contractivity and positivity are folded into the report's own verdict.
            check.pass = r.pass;
            checks.push(check);
            Some(r)
        }
        Err(Error::HypothesisHViolated(v)) => {
            checks.push(Check::above("umegaki_requires_phi_g", v, tol));
            None
        }
        Err(e) => return Err(e.into()),
    };

    let pass = all_pass(&checks) && reports.iter().all(|r| r.pass);
    Ok(VerifyReport {
        command: "verify",
        groups: chain.groups().iter().map(|g| g.label().to_string()).collect(),
        cocycles: reports,
        umegaki,
        hypothesis_h,
        checks,
        pass,
    })
}

fn invariant_state(
    space: &GnsSpace,
    group: &FiniteAutomorphismGroup,
    c: &RnCocycle,
    tol: f64,
) -> qistate_core::error::Result<InvariantState> {
    let phi_g = phi_g_vector(space, group, c, tol)?;
    InvariantState::new(space, phi_g, tol)
}

#[derive(Debug, Serialize)]
pub struct MartingaleReport {
    pub command: &'static str,
    pub nmax: usize,
    pub levels: Vec<MartingaleLevel>,
    /// `x_nmax`, the truncated `E_∞(x)`.
    pub limit: ComplexMatrix,
    pub limit_fixed_dev: f64,
    pub converged: bool,
    pub certified: bool,
    pub hypothesis_h: HReport,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(skip)]
    pub csv: String,
}

/// `x_N = E_N(x)` along `S_1 ⊂ … ⊂ S_nmax`.
pub fn martingale(model: &Model, observable: &ElementaryTensor, nmax: usize) -> Result<MartingaleReport> {
    let tol = model.tolerances.exact;
    let alg: TensorAlgebra = model.state.algebra();
    if nmax == 0 || nmax > alg.num_sites() {
        return Err(Error::InvalidRange(format!("nmax must lie in 1..={}, got {nmax}", alg.num_sites())).into());
    }
    let chain = model.chain_up_to(nmax)?;
    let cs = cocycles(model, &chain)?;
    let space = build_space(model)?;
    let top_c = cs.last().expect("chains are nonempty");
    let psi = invariant_state(&space, chain.top(), top_c, tol)?;
    let x = observable.to_element(&alg)?.into_matrix();
    let opts = MartingaleOptions {
        convergence_tol: model.tolerances.convergence,
        k_min_sv: Some(k_operator(top_c)?.min_singular_value),
        certificate_tol: tol,
        dense_cap: model.budget.max_dense_dim,
    };
    let run = martingale_run(&chain, &alg, &x, &space, &psi, opts)?;
    let lim = e_infinity(&run, &chain, &alg)?;
    let hypothesis_h = hypothesis_h_report(&space, &chain, &cs, witness(model), tol)?;
    let fold = |f: fn(&MartingaleLevel) -> f64| run.levels.iter().map(f).fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("martingale_identity", run.max_martingale_dev(), tol),
        Check::at_most("fixed_point", fold(|l| l.fixed_dev), tol),
        Check::at_most("psi_invariance", fold(|l| l.psi_invariance_dev), tol),
    ];
    let pass = all_pass(&checks);
    Ok(MartingaleReport {
        command: "martingale",
        nmax,
        csv: run.to_csv(),
        levels: run.levels,
        limit: lim.value,
        limit_fixed_dev: lim.fixed_dev,
        converged: run.converged,
        certified: run.certified,
        hypothesis_h,
        checks,
        pass,
    })
}

#[derive(Debug, Serialize)]
pub struct ConvergenceReport {
    pub command: &'static str,
    pub result: ConvergenceResult,
    pub pass: bool,
    #[serde(skip)]
    pub csv: String,
}

/// `⟨π(a)Φ, K_N π(b)Φ⟩` against the closed-form limit for each `N`.
pub fn convergence(
    model: &Model,
    a: &ElementaryTensor,
    b: &ElementaryTensor,
    n_range: RangeInclusive<usize>,
    mc: Option<McSettings>,
) -> Result<ConvergenceReport> {
    if model.is_rotation() {
        return Err(
            Error::ConfigInvalid("convergence needs a permutation model, not the rotation example".into()).into()
        );
    }
    let pm = PermutationModel::new(model.state.clone(), model_m0(model))?;
    let result = convergence_experiment(&pm, a, b, n_range, model.budget.max_enumeration, mc)?;
    let pass = result.all_within_bound;
    Ok(ConvergenceReport { command: "convergence", csv: result.to_csv(), result, pass })
}
