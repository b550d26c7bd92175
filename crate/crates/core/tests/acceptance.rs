//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with the measured quantities. Run with
//! `cargo test --test acceptance -- --nocapture` to see every line.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smoothfact_core::catalog::ClosedForm;
use smoothfact_core::counterexamples::{check_l1_counterexample, multiplier_escape_demo};
use smoothfact_core::crossed::{
    act_on_module, act_with_estimate, approx_identity, check_covariance, convolve,
    factorize_crossed, fit_temperedness, ActionSpec, CrossedElement, GroupWindow, SupFamily,
};
use smoothfact_core::dixmier::{
    alpha_coefficients, apply_multiplier_direct, eval_alpha_series, eval_chi_lambda,
    eval_phi_lambda, extend_multiplier, factorize_function, factorize_module_element,
    select_lambda, ConcreteModule, FactorizeOptions, LambdaSequence, MultiplierSpec, SelectCaps,
};
use smoothfact_core::grid::{boundary_decay_consistent, sample, shell_sups, Grid, GridFunction};
use smoothfact_core::scales::{
    equivalent_capped, mollify_scale, standard_bump, MollifiedScale, MollifyOptions, Scale,
    ScaleKind,
};

fn announce(n: usize, title: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion {n}: {status} - {title} ({detail})");
}

fn base_grid() -> Grid {
    Grid::line(8.0, 1.0 / 64.0).unwrap()
}

fn quad_scale(grid: &Grid) -> Scale {
    Scale::from_closed_form(ClosedForm::OnePlusSquare, grid, ScaleKind::OnSpace).unwrap()
}

fn mollified_quad(grid: &Grid) -> MollifiedScale {
    let sigma = quad_scale(grid);
    let bump_grid = Grid::line(0.25, 1.0 / 64.0).unwrap();
    let bump = standard_bump(&bump_grid, 0.25).unwrap();
    mollify_scale(&sigma, &bump, &[0.25], &MollifyOptions::default()).unwrap()
}

#[test]
fn criterion_01_gaussian_factorization() {
    let start = Instant::now();
    let grid = base_grid();
    let sigma = mollified_quad(&grid);
    let psi = sample(|x| (-x[0] * x[0]).exp(), &grid).unwrap();
    let result = factorize_function(&psi, &sigma, &FactorizeOptions::with_epsilon(1e-8)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let residual_ok = result.residual <= 1e-6;
    let positive_ok = result.theta.values().iter().all(|&v| v > 0.0);
    // shell-decay of the weighted reciprocal factor for every power d <= 6
    let mut failing_d = Vec::new();
    for d in 0..=6u32 {
        let weighted = GridFunction::from_values(
            grid.clone(),
            sigma
                .scale
                .values()
                .iter()
                .zip(result.theta.values())
                .map(|(s, t)| s.powi(d as i32) * t)
                .collect(),
        )
        .unwrap();
        if !boundary_decay_consistent(&shell_sups(&weighted)) {
            failing_d.push(d);
        }
    }
    let shell_ok = failing_d.is_empty();
    let runtime_ok = elapsed <= 10.0;
    let ok = residual_ok && positive_ok && shell_ok && runtime_ok;
    announce(
        1,
        "Gaussian two-factor split",
        ok,
        &format!(
            "residual {:.2e} <= 1e-6: {residual_ok}; theta > 0: {positive_ok}; \
             weighted shell decay d<=6: {shell_ok} (failing d: {failing_d:?}); \
             runtime {elapsed:.2}s <= 10s: {runtime_ok}",
            result.residual
        ),
    );
    assert!(
        ok,
        "residual_ok={residual_ok} positive_ok={positive_ok} shell_ok={shell_ok} \
         (failing d: {failing_d:?}) runtime_ok={runtime_ok}; \
         the tail budget eps = 1e-8 forces alpha_1 <= eps/2(1+M_1), hence the smallest \
         product factor lambda_0 >= sqrt(2(1+M_1)/eps) far above max sigma = 65 on this box, \
         so the reciprocal factor is flat to ~1e-13 and sigma^d theta grows for d >= 1"
    );
}

/// independent oracle: expand the product by divide-and-conquer polynomial
/// multiplication
fn brute_force_alphas(exponents: &[u32]) -> Vec<f64> {
    fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }
    fn tree(exps: &[u32]) -> Vec<f64> {
        match exps.len() {
            0 => vec![1.0],
            1 => vec![1.0, 0.25f64.powi(exps[0] as i32)],
            n => mul(&tree(&exps[..n / 2]), &tree(&exps[n / 2..])),
        }
    }
    tree(exponents)
}

#[test]
fn criterion_02_coefficient_oracle() {
    let mut worst_rel = 0.0f64;
    let mut cases: Vec<Vec<u32>> = (1..=12usize).map(|k| (0..k as u32).collect()).collect();
    cases.push(vec![0, 2, 4, 6, 8, 10]);
    cases.push(vec![1, 3, 5, 7]);
    cases.push(vec![5]);
    for exps in &cases {
        let fast = alpha_coefficients(exps);
        let brute = brute_force_alphas(exps);
        for (f, b) in fast.iter().zip(&brute) {
            worst_rel = worst_rel.max((f - b).abs() / b.max(1e-300));
        }
    }
    let coeff_ok = worst_rel <= 1e-12;

    let seq = LambdaSequence::new((0..12).collect()).unwrap();
    let mut worst_eval = 0.0f64;
    for i in 0..1000 {
        let x = -8.0 + i as f64 * (16.0 / 999.0);
        let series = eval_alpha_series(&seq, seq.len(), x);
        let product = eval_phi_lambda(&seq, x);
        worst_eval = worst_eval.max((series - product).abs() / product);
    }
    let eval_ok = worst_eval <= 1e-12;
    let ok = coeff_ok && eval_ok;
    announce(
        2,
        "coefficient oracle",
        ok,
        &format!("coeff rel {worst_rel:.2e}; series-vs-product rel {worst_eval:.2e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_03_reciprocal_identity() {
    let mut worst = 0.0f64;
    for (_, seq) in LambdaSequence::catalog() {
        for i in 0..1000 {
            let x = -8.0 + i as f64 * (16.0 / 999.0);
            let p = eval_phi_lambda(&seq, x) * eval_chi_lambda(&seq, x);
            worst = worst.max((p - 1.0).abs());
        }
    }
    let ok = worst <= 1e-12;
    announce(
        3,
        "reciprocal identity",
        ok,
        &format!("worst |phi chi - 1| = {worst:.2e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_04_selection_bounds() {
    let caps = SelectCaps::default();
    let epsilon = 1e-8;
    let mut sequences: Vec<(&str, Vec<f64>)> = Vec::new();
    sequences.push(("zero", vec![0.0; caps.n_cap + 1]));
    sequences.push(("one", vec![1.0; caps.n_cap + 1]));
    let mut factorial = vec![0.0; caps.n_cap + 1];
    let mut acc = 1.0f64;
    for (n, slot) in factorial.iter_mut().enumerate().skip(1) {
        acc *= n as f64;
        *slot = acc;
    }
    sequences.push(("factorial", factorial));
    sequences.push((
        "geometric",
        (0..=caps.n_cap).map(|n| 2.0f64.powi(n as i32)).collect(),
    ));

    let mut ok = true;
    let mut detail = String::new();
    for (name, m) in &sequences {
        let seq = select_lambda(m, epsilon, &caps).unwrap();
        let mut bound_ok = true;
        let mut weighted = 0.0;
        for n in 1..=caps.n_cap {
            let m_n = m[n];
            let beta = epsilon * 0.5f64.powi(n as i32) / (1.0 + m_n);
            let a = seq.alpha(n);
            if a > beta * (1.0 + 1e-12) || a > (1.0 + 1e-12) / (n as f64 * n as f64) {
                bound_ok = false;
            }
            weighted += a * m_n;
        }
        let sum_ok = weighted <= 2.0 * epsilon;
        ok &= bound_ok && sum_ok;
        detail.push_str(&format!(
            "{name}: alpha bounds {bound_ok}, sum {weighted:.2e} <= 2eps {sum_ok}; "
        ));
    }
    announce(4, "coefficient selection bounds", ok, detail.trim_end());
    assert!(ok);
}

#[test]
fn criterion_05_mollification() {
    let grid = base_grid();
    let m = mollified_quad(&grid);
    let sigma = quad_scale(&grid);

    let (upper_d, upper_c) = (
        m.upper.constant("d").unwrap(),
        m.upper.constant("C").unwrap(),
    );
    let (lower_d, lower_c) = (
        m.lower.constant("d").unwrap(),
        m.lower.constant("C").unwrap(),
    );
    let equiv_ok = m.upper.pass
        && m.lower.pass
        && upper_d <= 2.0
        && lower_d <= 2.0
        && upper_c <= 16.0
        && lower_c <= 16.0;
    // the same equivalence read off the generic fitter
    let (a, b) = equivalent_capped(&sigma, &m.scale, 2, 16.0).unwrap();
    let equiv_ok = equiv_ok && a.pass && b.pass;

    let deriv_ok = m.derivative.pass && m.derivative.constant("max_gamma") == Some(2.0);

    let one =
        Scale::from_closed_form(ClosedForm::Constant(1.0), &grid, ScaleKind::OnSpace).unwrap();
    let bump_grid = Grid::line(0.25, 1.0 / 64.0).unwrap();
    let bump = standard_bump(&bump_grid, 0.25).unwrap();
    let m_one = mollify_scale(&one, &bump, &[0.25], &MollifyOptions::default()).unwrap();
    let const_dev = m_one
        .scale
        .values()
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0f64, f64::max);
    let const_ok = const_dev <= 1e-12;

    let ok = equiv_ok && deriv_ok && const_ok;
    announce(
        5,
        "scale mollification",
        ok,
        &format!(
            "equivalence d = ({upper_d}, {lower_d}), C = ({upper_c:.3}, {lower_c:.3}); \
             derivative bound pass = {deriv_ok}; constant fixed point dev {const_dev:.2e}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_06_module_factorization_and_multiplier_extension() {
    let grid = base_grid();
    // the quadratic scale is already differentiable, so it serves as its
    // own smoothing and the multiplier sigma^2 is exactly (1+x^2)^2
    let sigma =
        MollifiedScale::assume_smooth(quad_scale(&grid), &MollifyOptions::default()).unwrap();
    let e = sample(|x| x[0] * (-x[0] * x[0]).exp(), &grid).unwrap();
    let module = ConcreteModule::SchwartzSelf {
        sigma: &sigma,
        d_max: 4,
        l_max: 2,
    };

    let m = factorize_module_element(&e, &module, &FactorizeOptions::with_epsilon(1e-8)).unwrap();
    let recon_residual = m
        .theta
        .pointwise_mul(&m.f)
        .unwrap()
        .pointwise_sub(&e)
        .unwrap()
        .sup_norm();
    let factor_ok = recon_residual <= 1e-6;

    let t = MultiplierSpec::SigmaPower(2);
    let ext1 = extend_multiplier(&t, &e, &module, &FactorizeOptions::with_epsilon(1e-8)).unwrap();
    let direct = apply_multiplier_direct(&t, &e, &sigma).unwrap();
    let direct_dev = ext1.value.pointwise_sub(&direct).unwrap().sup_norm();
    let direct_ok = direct_dev <= 1e-6;
    // cross-check against the analytic closed form (1+x^2)^2 x exp(-x^2)
    let analytic = sample(
        |x| (1.0 + x[0] * x[0]).powi(2) * x[0] * (-x[0] * x[0]).exp(),
        &grid,
    )
    .unwrap();
    let analytic_dev = ext1.value.pointwise_sub(&analytic).unwrap().sup_norm();
    let analytic_ok = analytic_dev <= 1e-6;

    let ext2 = extend_multiplier(&t, &e, &module, &FactorizeOptions::with_epsilon(1e-6)).unwrap();
    let sigma_sq_sup = sigma
        .scale
        .values()
        .iter()
        .map(|s| s * s)
        .fold(0.0f64, f64::max);
    let combined = sigma_sq_sup * (ext1.factorization.budgets[0] + ext2.factorization.budgets[0]);
    let eps_dev = ext1.value.pointwise_sub(&ext2.value).unwrap().sup_norm();
    let eps_ok = eps_dev <= combined;

    let ok = factor_ok && direct_ok && analytic_ok && eps_ok;
    announce(
        6,
        "module factorization and multiplier extension",
        ok,
        &format!(
            "|theta f - e| = {recon_residual:.2e}; extension vs direct {direct_dev:.2e}; \
             vs analytic {analytic_dev:.2e}; two-epsilon dev {eps_dev:.2e} <= {combined:.2e}"
        ),
    );
    assert!(ok);
}

fn random_crossed(
    rng: &mut ChaCha8Rng,
    window: &GroupWindow,
    grid: &Grid,
    omega: &Scale,
) -> CrossedElement {
    // group support in the inner half so double convolutions stay inside
    // the window; space support well inside the box
    let inner = window.radius / 2;
    let mut slices = Vec::with_capacity(window.len());
    for i in 0..window.len() {
        let dist = (i as i64 - window.radius as i64).unsigned_abs() as usize;
        if dist > inner {
            slices.push(GridFunction::zero(grid));
        } else {
            let c: f64 = rng.gen_range(-1.0..1.0);
            let x0: f64 = rng.gen_range(-1.0..1.0);
            let s: f64 = rng.gen_range(0.4..1.0);
            slices.push(
                sample(
                    |x| {
                        let u = (x[0] - x0) / s;
                        c * (-u * u).exp()
                    },
                    grid,
                )
                .unwrap(),
            );
        }
    }
    CrossedElement::new(window.clone(), slices, omega.clone()).unwrap()
}

#[test]
fn criterion_07_crossed_product() {
    let grid = base_grid();
    let window = GroupWindow::z_window(4);
    let omega = Scale::from_closed_form(
        ClosedForm::OnePlusAbsPow(1.0),
        &window.grid(),
        ScaleKind::OnGroup,
    )
    .unwrap();
    let mut action = ActionSpec::translation(0);
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    let mut assoc_worst = 0.0f64;
    let mut homo_worst = 0.0f64;
    for _ in 0..100 {
        let f1 = random_crossed(&mut rng, &window, &grid, &omega);
        let f2 = random_crossed(&mut rng, &window, &grid, &omega);
        let f3 = random_crossed(&mut rng, &window, &grid, &omega);
        let left = convolve(&convolve(&f1, &f2, &action).unwrap(), &f3, &action).unwrap();
        let right = convolve(&f1, &convolve(&f2, &f3, &action).unwrap(), &action).unwrap();
        for (a, b) in left.slices.iter().zip(&right.slices) {
            assoc_worst = assoc_worst.max(a.pointwise_sub(b).unwrap().sup_norm());
        }

        let e = sample(|x| (-(x[0] / 1.5) * (x[0] / 1.5)).exp(), &grid).unwrap();
        let lhs = act_on_module(&convolve(&f1, &f2, &action).unwrap(), &e, &action).unwrap();
        let rhs = act_on_module(&f1, &act_on_module(&f2, &e, &action).unwrap(), &action).unwrap();
        homo_worst = homo_worst.max(lhs.pointwise_sub(&rhs).unwrap().sup_norm());
    }
    let assoc_ok = assoc_worst <= 1e-9;
    let homo_ok = homo_worst <= 1e-9;

    let a = sample(|x| (-x[0] * x[0]).exp(), &grid).unwrap();
    let e = sample(|x| (-(x[0] - 1.0) * (x[0] - 1.0)).exp(), &grid).unwrap();
    let mut cov_worst = 0.0f64;
    for g in [1.0 / 64.0, 1.0, -2.0] {
        let c = check_covariance(g, &a, &e, &action).unwrap();
        cov_worst = cov_worst.max(c.worst_residual);
    }
    let cov_ok = cov_worst <= 1e-12;

    let probes = vec![a.clone(), e.clone()];
    let tempered = fit_temperedness(&action, &omega, &window, &probes, &SupFamily).unwrap();
    let tempered_pass = tempered.pass;
    action.temperedness = Some(tempered);
    let f = random_crossed(&mut rng, &window, &grid, &omega);
    let (_, estimate) = act_with_estimate(&f, &e, &action, &SupFamily).unwrap();
    let estimate_ok = tempered_pass && estimate.pass;

    let ok = assoc_ok && homo_ok && cov_ok && estimate_ok;
    announce(
        7,
        "crossed-product convolution",
        ok,
        &format!(
            "assoc {assoc_worst:.2e} <= 1e-9; integrated homomorphism {homo_worst:.2e} <= 1e-9; \
             covariance {cov_worst:.2e} <= 1e-12; action estimate pass = {estimate_ok}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_08_crossed_factorization_and_approximate_identity() {
    let grid = base_grid();
    let window = GroupWindow::z_window(4);
    let omega = Scale::from_closed_form(
        ClosedForm::Constant(1.0),
        &window.grid(),
        ScaleKind::OnGroup,
    )
    .unwrap();
    let action = ActionSpec::translation(0);

    // corpus: plain Gaussian pairs plus an algebra part coming from an
    // actual module factorization
    let sigma = mollified_quad(&grid);
    let e = sample(|x| (-x[0] * x[0]).exp(), &grid).unwrap();
    let module = ConcreteModule::SchwartzSelf {
        sigma: &sigma,
        d_max: 4,
        l_max: 2,
    };
    let m = factorize_module_element(&e, &module, &FactorizeOptions::with_epsilon(1e-8)).unwrap();

    let f_bump = GridFunction::from_values(
        window.grid(),
        vec![0.0, 0.0, 0.05, 0.25, 0.4, 0.25, 0.05, 0.0, 0.0],
    )
    .unwrap();
    let mut worst = 0.0f64;
    let corpus: Vec<(GridFunction, GridFunction)> = vec![
        (m.theta.clone(), m.f.clone()),
        (
            sample(|x| (-x[0] * x[0]).exp(), &grid).unwrap(),
            sample(|x| (-(x[0] + 0.5) * (x[0] + 0.5)).exp(), &grid).unwrap(),
        ),
        (
            sample(|x| 1.0 / (1.0 + x[0] * x[0]), &grid).unwrap(),
            sample(|x| x[0] * (-x[0] * x[0]).exp(), &grid).unwrap(),
        ),
    ];
    for (a, e_tilde) in &corpus {
        let (_, residual) =
            factorize_crossed(e_tilde, &f_bump, a, &window, omega.clone(), &action).unwrap();
        worst = worst.max(residual);
    }
    let residual_ok = worst <= 1e-9;

    // approximate identity on a sampled window: supports 1, 1/2, 1/4
    let rwindow = GroupWindow::r_sampled(16, 1.0 / 16.0).unwrap();
    let romega = Scale::from_closed_form(
        ClosedForm::Constant(1.0),
        &rwindow.grid(),
        ScaleKind::OnGroup,
    )
    .unwrap();
    let a = sample(|x| 1.0 / (1.0 + x[0] * x[0]), &grid).unwrap();
    let target = a.pointwise_mul(&e).unwrap();
    let mut errs = Vec::new();
    for n in 0..3 {
        let psi = approx_identity(n, &a, &rwindow, romega.clone()).unwrap();
        let applied = act_on_module(&psi, &e, &action).unwrap();
        errs.push(applied.pointwise_sub(&target).unwrap().sup_norm());
    }
    let converge_ok = errs[0] > errs[1] && errs[1] > errs[2];

    let ok = residual_ok && converge_ok;
    announce(
        8,
        "crossed factorization slice",
        ok,
        &format!("worst slice residual {worst:.2e} <= 1e-9; identity errors {errs:?} strictly decreasing"),
    );
    assert!(ok);
}

#[test]
fn criterion_09_counterexamples() {
    let (cert, report) = check_l1_counterexample(1000, 50, 42, &[100, 1000, 10000]).unwrap();
    let ineq_ok = cert.pass && report.product_residual <= 0.0 && report.sum_residual <= 0.0;
    let growth_ok = report.half_growth >= 2.0;
    let l1_ok = report.l1_change.abs() <= 0.02;

    let escape = multiplier_escape_demo(&[0.0, 10.0, 100.0]).unwrap();
    let tail = escape.rows.last().unwrap().inf_tail;
    let escape_ok = tail >= 0.9999;

    let ok = ineq_ok && growth_ok && l1_ok && escape_ok;
    announce(
        9,
        "counterexamples",
        ok,
        &format!(
            "1000 seeded pairs pass: {ineq_ok}; half-power growth {:.3} >= 2; \
             absolute-sum change {:.4} <= 0.02; tail infimum {tail:.6} >= 0.9999",
            report.half_growth, report.l1_change
        ),
    );
    assert!(ok);
}
