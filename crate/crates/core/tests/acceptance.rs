//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! line per criterion with its runtime, and exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qistate_core::algebra::ElementaryTensor;
use qistate_core::error::Result;
use qistate_core::expectation::{martingale_identity_deviation, verify_umegaki, ConditionalExpectation};
use qistate_core::gns::{
    gns_build, hypothesis_h_report, k_operator, phi_g_vector, projection_p, unitary_u, GnsOperator, GnsSpace,
    GnsVector, InvariantState, WitnessSet,
};
use qistate_core::group::{
    enumerate_symmetric, outer_count, outer_fraction, rotation_example, symmetric_group, symmetric_group_chain,
    FiniteAutomorphismGroup,
};
use qistate_core::linalg::ComplexMatrix;
use qistate_core::perm_model::{
    convergence_experiment, k_limit_closed_form, mc_k_estimate, mc_mean_over, phi_g_product_check, PermutationModel,
};
use qistate_core::sqi::{compute_cocycle, RnCocycle, DEFAULT_SQI_TOL};

const MAX_ENUM: usize = 5040;
const BETAS: [f64; 3] = [0.0, 1.0, std::f64::consts::LN_2 * 2.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn rotation_setup(beta: f64) -> Result<(GnsSpace, FiniteAutomorphismGroup, RnCocycle)> {
    let (state, group) = rotation_example(beta)?;
    let space = gns_build(&state)?;
    let c = compute_cocycle(&state, &group, DEFAULT_SQI_TOL)?;
    Ok((space, group, c))
}

/// Default model on `num_sites` sites with `S_n` as the group.
fn symmetric_setup(
    num_sites: usize,
    n: usize,
) -> Result<(PermutationModel, GnsSpace, FiniteAutomorphismGroup, RnCocycle)> {
    let model = PermutationModel::default_with_sites(num_sites)?;
    let space = gns_build(model.state())?;
    let group = symmetric_group(n, num_sites, MAX_ENUM)?;
    let c = compute_cocycle(model.state(), &group, DEFAULT_SQI_TOL)?;
    Ok((model, space, group, c))
}

fn invariant_state(space: &GnsSpace, group: &FiniteAutomorphismGroup, c: &RnCocycle) -> Result<InvariantState> {
    let phi_g = phi_g_vector(space, group, c, 1e-10)?;
    InvariantState::new(space, phi_g, 1e-10)
}

fn criterion_1() -> Result<Outcome> {
    let mut worst_x = 0.0f64;
    let mut worst_k = 0.0f64;
    let mut worst_p = 0.0f64;
    for beta in BETAS {
        let (space, group, c) = rotation_setup(beta)?;
        // Elements are listed by angle, so index 1 is the quarter turn.
        let x = c.x(1)?;
        let x_oracle = ComplexMatrix::from_diag(&[(-beta).exp(), beta.exp()]);
        worst_x = worst_x.max(x.max_abs_diff(&x_oracle));

        let k = k_operator(&c)?;
        let h = (beta / 2.0).exp();
        let k_oracle = ComplexMatrix::from_diag(&[0.5 * (1.0 + 1.0 / h), 0.5 * (1.0 + h)]);
        worst_k = worst_k.max(k.matrix.max_abs_diff(&k_oracle));

        let p = projection_p(&space, &group, &c)?;
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + beta.to_bits() % 1000);
        for _ in 0..10 {
            let a = ComplexMatrix::random(&mut rng, 2, 2);
            let got = p.apply(&space, &space.vector(a.clone())?)?;
            let at = |i: usize, j: usize| a[(i, j)];
            let half = C64::new(0.5, 0.0);
            let oracle = ComplexMatrix::from_vec(
                2,
                2,
                vec![
                    half * (at(0, 0) + at(1, 1) / h),
                    half * (at(0, 1) - at(1, 0) * h),
                    half * (at(1, 0) - at(0, 1) / h),
                    half * (at(1, 1) + at(0, 0) * h),
                ],
            )?;
            worst_p = worst_p.max(got.0.max_abs_diff(&oracle)).max(space.distance(&got, &GnsVector(oracle)));
        }
    }
    outcome(
        worst_x <= 1e-12 && worst_k <= 1e-12 && worst_p <= 1e-10,
        format!("x dev {worst_x:.2e}, K dev {worst_k:.2e}, P dev {worst_p:.2e}"),
    )
}

fn criterion_2() -> Result<Outcome> {
    let (space, group, c) = rotation_setup(BETAS[2])?;
    let p = projection_p(&space, &group, &c)?.to_dense(&space)?;
    let k = k_operator(&c)?;
    let kd = k.operator().to_dense(&space)?;
    let separation = (&p - &kd).operator_norm();
    let phi = space.cyclic_vector();
    let gap = space.distance(&GnsOperator::Dense(p).apply(&space, &phi)?, &k.operator().apply(&space, &phi)?);
    outcome(separation > 0.01 && gap <= 1e-10, format!("‖P − K‖ = {separation:.4}, ‖PΦ − KΦ‖ = {gap:.2e}"))
}

/// Max over basis vectors of ‖U_g U_h e − U_{gh} e‖, and max ‖U_g* U_g − 𝟙‖.
fn representation_defects(space: &GnsSpace, group: &FiniteAutomorphismGroup, c: &RnCocycle) -> Result<(f64, f64)> {
    let us = (0..group.order()).map(|i| unitary_u(space, group, c, i)).collect::<Result<Vec<_>>>()?;
    let dim = space.hilbert_dim();
    let mut hom = 0.0f64;
    for b in 0..dim {
        let e = space.basis_vector(b);
        let images = us.iter().map(|u| u.apply(space, &e)).collect::<Result<Vec<_>>>()?;
        for (i, u) in us.iter().enumerate() {
            for (j, img) in images.iter().enumerate() {
                let lhs = u.apply(space, img)?;
                let rhs = &images[group.compose_index(i, j)];
                hom = hom.max(space.distance(&lhs, rhs));
            }
        }
    }
    let mut unit = 0.0f64;
    for u in &us {
        let m = u.to_dense(space)?;
        let gram = &m.adjoint() * &m;
        unit = unit.max(gram.max_abs_diff(&ComplexMatrix::identity(dim)));
    }
    Ok((hom, unit))
}

fn criterion_3() -> Result<Outcome> {
    let mut hom = 0.0f64;
    let mut unit = 0.0f64;
    for beta in BETAS {
        let (space, group, c) = rotation_setup(beta)?;
        let (h, u) = representation_defects(&space, &group, &c)?;
        hom = hom.max(h);
        unit = unit.max(u);
    }
    for n in 1..=4 {
        let (_, space, group, c) = symmetric_setup(4, n)?;
        let (h, u) = representation_defects(&space, &group, &c)?;
        hom = hom.max(h);
        unit = unit.max(u);
    }
    outcome(hom <= 1e-10 && unit <= 1e-10, format!("homomorphism dev {hom:.2e}, unitarity dev {unit:.2e}"))
}

fn criterion_4() -> Result<Outcome> {
    let model = PermutationModel::default_with_sites(4)?;
    let space = gns_build(model.state())?;
    let chain = symmetric_group_chain(4, 4, MAX_ENUM)?;
    let ps = chain
        .groups()
        .iter()
        .map(|g| projection_p(&space, g, &compute_cocycle(model.state(), g, DEFAULT_SQI_TOL)?))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for b in 0..space.hilbert_dim() {
        let e = space.basis_vector(b);
        let images = ps.iter().map(|p| p.apply(&space, &e)).collect::<Result<Vec<_>>>()?;
        for n in 0..ps.len() {
            for m in 0..=n {
                worst = worst.max(space.distance(&ps[n].apply(&space, &images[m])?, &images[n]));
                worst = worst.max(space.distance(&ps[m].apply(&space, &images[n])?, &images[n]));
            }
        }
    }
    outcome(worst <= 1e-10, format!("max ‖P_N P_M e − P_N e‖, ‖P_M P_N e − P_N e‖ = {worst:.2e}"))
}

fn criterion_5() -> Result<Outcome> {
    let alg = PermutationModel::default_with_sites(4)?.algebra();
    let chain = symmetric_group_chain(4, 4, MAX_ENUM)?;
    let dev = martingale_identity_deviation(&chain, &alg)?;
    outcome(dev <= 1e-10, format!("martingale identity dev {dev:.2e}"))
}

/// Max over elements and samples of |ψ(u_g(π(a))) − ψ(π(a))|, with
/// `u_g(X) = U_g X U_g*` applied matrix-free, and of |ψ(π(g(a))) − ψ(π(a))|.
fn invariance_defect(
    space: &GnsSpace,
    group: &FiniteAutomorphismGroup,
    c: &RnCocycle,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let psi = invariant_state(space, group, c)?;
    let alg = space.algebra();
    let d = alg.total_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let pulled = (0..group.order())
        .map(|i| unitary_u(space, group, c, group.inverse_index(i))?.apply(space, psi.phi_g()))
        .collect::<Result<Vec<_>>>()?;
    for _ in 0..samples {
        let a = ComplexMatrix::random(&mut rng, d, d);
        let base = psi.eval_element(space, &a)?;
        for (i, v) in pulled.iter().enumerate() {
            let conj = space.inner(v, &GnsVector(a.try_mul(&v.0)?)) / psi.norm_sq();
            let moved = psi.eval_element(space, &group.element(i).apply_matrix(&a, &alg)?)?;
            worst = worst.max((conj - base).norm()).max((moved - base).norm());
        }
    }
    Ok(worst)
}

fn criterion_6() -> Result<Outcome> {
    let mut rot = 0.0f64;
    for beta in BETAS {
        let (space, group, c) = rotation_setup(beta)?;
        rot = rot.max(invariance_defect(&space, &group, &c, 50, 6)?);
    }
    let (_, space, group, c) = symmetric_setup(4, 4)?;
    let sym = invariance_defect(&space, &group, &c, 50, 6)?;
    outcome(rot <= 1e-10 && sym <= 1e-10, format!("rotation {rot:.2e}, S_4 {sym:.2e}"))
}

fn criterion_7() -> Result<Outcome> {
    let mut lines = Vec::new();
    let mut pass = true;
    let (space, group, c) = rotation_setup(BETAS[2])?;
    let psi = invariant_state(&space, &group, &c)?;
    let e = ConditionalExpectation::algebra_level(&group, space.algebra());
    let r = verify_umegaki(&e, &space, &psi, 100, 7)?;
    pass &= r.pass;
    lines.push(format!(
        "rotation module {:.1e} ψ {:.1e} idem {:.1e} contr {:.1e} pos {:.1e}",
        r.module, r.psi_invariance, r.idempotence, r.contractivity_excess, r.positivity_min_eig
    ));
    let (_, space, group, c) = symmetric_setup(4, 4)?;
    let psi = invariant_state(&space, &group, &c)?;
    let e = ConditionalExpectation::algebra_level(&group, space.algebra());
    let r = verify_umegaki(&e, &space, &psi, 100, 7)?;
    pass &= r.pass;
    lines.push(format!(
        "S_4 module {:.1e} ψ {:.1e} idem {:.1e} contr {:.1e} pos {:.1e}",
        r.module, r.psi_invariance, r.idempotence, r.contractivity_excess, r.positivity_min_eig
    ));
    outcome(pass, lines.join("; "))
}

fn criterion_8() -> Result<Outcome> {
    let model = PermutationModel::default_model()?;
    let one = ElementaryTensor::identity();
    let res = convergence_experiment(&model, &one, &one, 3..=6, MAX_ENUM, None)?;
    let bounded = res.records.iter().all(|r| r.abs_err <= r.bound);
    let first = res.records.first().map_or(f64::NAN, |r| r.abs_err);
    let last = res.records.last().map_or(f64::NAN, |r| r.abs_err);
    let errs: Vec<String> = res.records.iter().map(|r| format!("N={} {:.4e}≤{:.4}", r.n, r.abs_err, r.bound)).collect();
    outcome(bounded && last < first && res.records.len() == 4, errs.join(", "))
}

fn criterion_9() -> Result<Outcome> {
    let model = PermutationModel::default_model()?;
    let space = gns_build(model.state())?;
    let k_g = k_limit_closed_form(&model)?.into_matrix();
    let norm_sq = space.norm_sq(&GnsVector(k_g));
    let oracle = (2.0 + 3f64.sqrt()) / 4.0;
    let norm_dev = (norm_sq - oracle).abs();

    let chain = symmetric_group_chain(7, 5, MAX_ENUM)?;
    let cocycles = chain
        .groups()
        .iter()
        .map(|g| compute_cocycle(model.state(), g, DEFAULT_SQI_TOL))
        .collect::<Result<Vec<_>>>()?;
    let report = hypothesis_h_report(&space, &chain, &cocycles, WitnessSet::Outer { m0: 0 }, 1e-10)?;
    let floor = model.state().bound_c().powi(-2 * model.special_set().len() as i32);
    let top = report.levels.last().expect("non-empty chain");
    let eps_ok = report.levels.iter().filter_map(|l| l.eps0).all(|e| e >= floor);
    let pass = norm_dev <= 1e-10 && report.holds && top.lower_bound > 0.0 && eps_ok && top.eps0.is_some();
    outcome(
        pass,
        format!(
            "‖Φ_G‖² = {norm_sq:.6} (dev {norm_dev:.1e}), top ε₀ = {:.6} ≥ {floor}, ε₀δ₀² = {:.4e}",
            top.eps0.unwrap_or(f64::NAN),
            top.lower_bound
        ),
    )
}

fn criterion_10() -> Result<Outcome> {
    let model = PermutationModel::default_model()?;
    let space = gns_build(model.state())?;
    let chain = symmetric_group_chain(7, 4, MAX_ENUM)?;
    let cocycles = chain
        .groups()
        .iter()
        .map(|g| compute_cocycle(model.state(), g, DEFAULT_SQI_TOL))
        .collect::<Result<Vec<_>>>()?;
    let report = hypothesis_h_report(&space, &chain, &cocycles, WitnessSet::Outer { m0: 0 }, 1e-10)?;
    let top_k = k_operator(cocycles.last().expect("non-empty chain"))?.matrix;

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut tensors = vec![
        ElementaryTensor::identity().with(0, ComplexMatrix::unit(2, 0, 0)),
        ElementaryTensor::identity().with(1, ComplexMatrix::unit(2, 1, 1)),
        ElementaryTensor::identity().with(0, ComplexMatrix::unit(2, 0, 1)).with(1, ComplexMatrix::unit(2, 1, 0)),
    ];
    for _ in 0..10 {
        tensors.push(
            ElementaryTensor::identity()
                .with(0, ComplexMatrix::random(&mut rng, 2, 2))
                .with(1, ComplexMatrix::random(&mut rng, 2, 2)),
        );
    }
    let mut worst = 0.0f64;
    for t in &tensors {
        worst = worst.max(phi_g_product_check(&model, &space, &report, &top_k, t, 1e-10)?.value_discrepancy);
    }
    outcome(worst <= 1e-10, format!("{} tensors, max |ψ_G(a) − ∏ tr(W aₙ)| = {worst:.2e}", tensors.len()))
}

/// Brute-force count of bijections of `0..n` moving site 0, by filtering all maps.
fn brute_outer(n: usize) -> usize {
    let mut count = 0;
    for code in 0..n.pow(n as u32) {
        let mut img = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            img.push(c % n);
            c /= n;
        }
        let mut seen = vec![false; n];
        let bijective = img.iter().all(|&v| !std::mem::replace(&mut seen[v], true));
        if bijective && img[0] != 0 {
            count += 1;
        }
    }
    count
}

fn criterion_11() -> Result<Outcome> {
    let brute = brute_outer(4);
    let lib = outer_count(4, 0)?;
    let mut frac_dev = 0.0f64;
    for n in 1..=7 {
        let perms = enumerate_symmetric(n, 7)?;
        let enumerated = perms.iter().filter(|p| p.image(0) != 0).count() as f64 / perms.len() as f64;
        let f = outer_fraction(n, 0)?;
        let closed = (n as f64 - 1.0) / n as f64;
        frac_dev = frac_dev.max((f - enumerated).abs()).max((f - closed).abs());
    }
    let trend: Vec<f64> = [8, 16, 64, 256, 1024].iter().map(|&n| outer_fraction(n, 0)).collect::<Result<_>>()?;
    let monotone = trend.windows(2).all(|w| w[1] > w[0]);
    let near_one = 1.0 - trend.last().copied().unwrap_or(0.0) < 1e-3;
    outcome(
        brute == 18 && lib == 18 && frac_dev <= 1e-15 && monotone && near_one,
        format!("|S_4^(0)| brute {brute}, library {lib}; fraction dev {frac_dev:.1e}; f(1024) = {:.6}", trend[4]),
    )
}

fn criterion_12() -> Result<Outcome> {
    let model = PermutationModel::default_model()?;
    let all5 = enumerate_symmetric(5, 7)?;
    let mean5 = mc_mean_over(&model, &all5)?.mean;
    let dev5 = mean5.max_abs_diff(&model.k_n_exact(5, MAX_ENUM)?);

    let est = mc_k_estimate(&model, 6, 20_000, 42)?;
    let exact6 = model.k_n_exact(6, MAX_ENUM)?;
    let mut outside = 0;
    let mut worst_z = 0.0f64;
    for (i, (m, e)) in est.mean.as_slice().iter().zip(exact6.as_slice()).enumerate() {
        let err = (m - e).norm();
        let se = est.std_error[i];
        if err > 3.0 * se {
            outside += 1;
        }
        if se > 0.0 {
            worst_z = worst_z.max(err / se);
        }
    }
    outcome(
        dev5 <= 1e-14 && outside == 0,
        format!("N=5 enumeration dev {dev5:.1e}; N=6 entries outside 3σ: {outside}, max |err|/se = {worst_z:.2}"),
    )
}

fn cauchy_increments() -> Result<Outcome> {
    let model = PermutationModel::default_model()?;
    let space = gns_build(model.state())?;
    let chain = symmetric_group_chain(7, 6, MAX_ENUM)?;
    let cocycles = chain
        .groups()
        .iter()
        .map(|g| compute_cocycle(model.state(), g, DEFAULT_SQI_TOL))
        .collect::<Result<Vec<_>>>()?;
    let report = hypothesis_h_report(&space, &chain, &cocycles, WitnessSet::Outer { m0: 0 }, 1e-10)?;
    let inc: Vec<f64> = report.levels.iter().filter_map(|l| l.cauchy_increment).collect();
    let nonincreasing = inc.windows(2).all(|w| w[1] <= w[0]);
    let shown: Vec<String> = inc.iter().map(|v| format!("{v:.4e}")).collect();
    outcome(nonincreasing && inc.len() + 1 == chain.len(), format!("‖Φ_N − Φ_(N−1)‖ = [{}]", shown.join(", ")))
}

type Criterion = (&'static str, &'static str, u64, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 13] = [
        ("1", "rotation example exactness", 1, criterion_1),
        ("2", "P_G vs K_G separation", 1, criterion_2),
        ("3", "unitary representation", 10, criterion_3),
        ("4", "projection chain", 30, criterion_4),
        ("5", "martingale identity", 60, criterion_5),
        ("6", "invariant state", 30, criterion_6),
        ("7", "Umegaki suite", 60, criterion_7),
        ("8", "weak-limit convergence", 120, criterion_8),
        ("9", "closed-form norm and hypothesis H", 60, criterion_9),
        ("10", "product limit", 30, criterion_10),
        ("11", "combinatorics", 10, criterion_11),
        ("12", "Monte Carlo soundness", 120, criterion_12),
        ("C", "Cauchy increments nonincreasing", 120, cauchy_increments),
    ];
    let mut failures = 0;
    for (id, name, limit_s, f) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f));
        let elapsed = start.elapsed();
        let limit = Duration::from_secs(limit_s);
        let (pass, detail) = match result {
            Ok(Ok(o)) => (o.pass, o.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        let in_time = elapsed < limit;
        let ok = pass && in_time;
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] criterion {id:>2} {name}: {detail} ({:.3} s, limit {limit_s} s{})",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over time" }
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
