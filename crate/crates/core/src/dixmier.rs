//! The factorization engine: truncated even infinite products and their
//! reciprocals, coefficient selection with certified tail bounds, the
//! two-factor splitting `psi = theta * phi` of a rapidly vanishing
//! function, module-element factorization and multiplier extension.
//!
//! The product `prod_k (1 + x^2 / lambda_k^2)` over a subsequence of powers
//! of two is kept as a finite truncation; its power-series coefficients are
//! the elementary symmetric functions of the inverse squares, computed by
//! the stable one-factor-at-a-time update (all terms positive, no
//! cancellation). Certificates separate three error sources: the dropped
//! series tail, the dropped product tail, and float rounding.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, MultiIndex};
use crate::scales::MollifiedScale;
use crate::schwartz::{compose_scale, decay_report, seminorm_sigma, Profile, SeminormIndex};
use serde::{Deserialize, Serialize};

/// A strictly increasing subsequence of powers of two, stored through its
/// exponents, together with the truncated-product expansion coefficients
/// and the tail mass of the implied continuation.
///
/// The continuation convention: after the last stored exponent `k` the
/// sequence continues with every power of two, so the dropped factors
/// satisfy `sum_{j >= K} lambda_j^{-2} = 4^{-k} / 3`, and the infinite
/// product exceeds the stored one by at most `exp(x^2 * tail_mass)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSequence {
    exponents: Vec<u32>,
    alphas: Vec<f64>,
    tail_mass: f64,
}

/// Elementary symmetric functions of `{lambda_j^{-2}}` via the stable
/// one-factor-at-a-time polynomial update.
pub fn alpha_coefficients(exponents: &[u32]) -> Vec<f64> {
    let mut alphas = vec![1.0f64];
    for &k in exponents {
        let inv = 0.25f64.powi(k as i32);
        let mut next = vec![0.0; alphas.len() + 1];
        for (n, &a) in alphas.iter().enumerate() {
            next[n] += a;
            next[n + 1] += a * inv;
        }
        alphas = next;
    }
    alphas
}

impl LambdaSequence {
    pub fn new(exponents: Vec<u32>) -> Result<LambdaSequence> {
        if exponents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse(
                "lambda exponents must be strictly increasing".into(),
            ));
        }
        let alphas = alpha_coefficients(&exponents);
        let tail_mass = match exponents.last() {
            Some(&k) => 0.25f64.powi(k as i32) / 3.0,
            None => 4.0 / 3.0,
        };
        Ok(LambdaSequence {
            exponents,
            alphas,
            tail_mass,
        })
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn lambda(&self, j: usize) -> f64 {
        2.0f64.powi(self.exponents[j] as i32)
    }

    /// Expansion coefficients; `alpha(n) = 0` beyond the stored factors.
    pub fn alpha(&self, n: usize) -> f64 {
        self.alphas.get(n).copied().unwrap_or(0.0)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Named sequences used by tests and demos.
    pub fn catalog() -> Vec<(&'static str, LambdaSequence)> {
        vec![
            ("dyadic_8", LambdaSequence::new((0..8).collect()).unwrap()),
            (
                "dyadic_offset_1",
                LambdaSequence::new((1..9).collect()).unwrap(),
            ),
            (
                "even_exponents",
                LambdaSequence::new(vec![0, 2, 4, 6]).unwrap(),
            ),
            ("single_8", LambdaSequence::new(vec![3]).unwrap()),
            ("dyadic_20", LambdaSequence::new((0..20).collect()).unwrap()),
        ]
    }
}

/// Truncated product value at x. Always >= 1 and even in x.
pub fn eval_phi_lambda(seq: &LambdaSequence, x: f64) -> f64 {
    let x2 = x * x;
    let mut p = 1.0f64;
    for j in 0..seq.len() {
        let l = seq.lambda(j);
        p *= 1.0 + x2 / (l * l);
    }
    p
}

/// Multiplicative bound on the dropped factors: the infinite product lies
/// in `[value, value * tail_factor]`.
pub fn phi_tail_factor(seq: &LambdaSequence, x: f64) -> f64 {
    (x * x * seq.tail_mass).exp()
}

/// Truncated product with its tail certificate.
pub fn eval_phi_lambda_certified(seq: &LambdaSequence, x: f64) -> (f64, f64) {
    (eval_phi_lambda(seq, x), phi_tail_factor(seq, x))
}

/// Reciprocal of the truncated product; lies in (0, 1].
pub fn eval_chi_lambda(seq: &LambdaSequence, x: f64) -> f64 {
    1.0 / eval_phi_lambda(seq, x)
}

/// Caps for the coefficient selection.
#[derive(Debug, Clone)]
pub struct SelectCaps {
    pub k_factors: usize,
    pub n_cap: usize,
    pub t_cap: u32,
}

impl Default for SelectCaps {
    fn default() -> Self {
        SelectCaps {
            k_factors: 40,
            n_cap: 64,
            t_cap: 600,
        }
    }
}

/// Choose a subsequence of powers of two so that the expansion
/// coefficients obey `alpha_n <= min(eps 2^-n / (1 + M_n), n^-2)` for every
/// n >= 1 up to the cap, which makes `sum_{n>=1} alpha_n M_n <= eps`.
///
/// Greedy rule: with offset t the candidate is `lambda_j = 2^(j+t)`, whose
/// inverse-square sum S shrinks by 4 per offset step. Since
/// `alpha_n <= S^n / n!`, it suffices to check that bound against the
/// targets (in the log domain, so huge M_n and tiny S cannot overflow);
/// the first offset that clears every n <= n_cap wins.
pub fn select_lambda(m_values: &[f64], epsilon: f64, caps: &SelectCaps) -> Result<LambdaSequence> {
    if !(epsilon > 0.0) {
        return Err(Error::Parse(format!("epsilon {epsilon} must be positive")));
    }
    for (n, m) in m_values.iter().enumerate() {
        if !m.is_finite() || *m < 0.0 {
            return Err(Error::SeminormDiverged(format!(
                "M[{n}] = {m} is not a finite nonnegative bound"
            )));
        }
    }
    let n_cap = caps.n_cap.min(m_values.len().saturating_sub(1)).max(1);
    let ln_eps = epsilon.ln();
    let ln2 = std::f64::consts::LN_2;
    let mut last_violation = 1usize;
    't_loop: for t in 0..=caps.t_cap {
        // S = sum_{j < K} 4^{-(j+t)} < 4^{-t} * 4/3
        let mut s = 0.0f64;
        for j in (0..caps.k_factors).rev() {
            s += 0.25f64.powi((j + t as usize) as i32);
        }
        let ln_s = s.ln();
        let mut ln_factorial = 0.0f64;
        for n in 1..=n_cap {
            ln_factorial += (n as f64).ln();
            let m_n = m_values.get(n).copied().unwrap_or(0.0);
            // S^n / n! * (1 + M_n) <= eps * 2^-n
            let lhs = ln_s * n as f64 - ln_factorial + (1.0 + m_n).ln();
            let target = ln_eps - n as f64 * ln2;
            if lhs > target {
                last_violation = n;
                continue 't_loop;
            }
            // S^n / n! <= 1/n^2
            if ln_s * n as f64 - ln_factorial > -2.0 * (n as f64).ln() {
                last_violation = n;
                continue 't_loop;
            }
        }
        let exponents: Vec<u32> = (0..caps.k_factors).map(|j| j as u32 + t).collect();
        return LambdaSequence::new(exponents);
    }
    Err(Error::LambdaSelectionFailed {
        n: last_violation,
        t_cap: caps.t_cap,
    })
}

/// Options for the factorization engine.
#[derive(Debug, Clone)]
pub struct FactorizeOptions {
    pub d_max: u32,
    pub l_max: usize,
    pub epsilon: f64,
    pub caps: SelectCaps,
}

impl FactorizeOptions {
    pub fn with_epsilon(epsilon: f64) -> FactorizeOptions {
        FactorizeOptions {
            d_max: 4,
            l_max: 2,
            epsilon,
            caps: SelectCaps::default(),
        }
    }
}

/// Seminorm majorant table `M[d][l][n] = max_{|gamma| <= l} sup
/// sigma^((d+1)l + 2n) |X^gamma psi|`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MTable {
    pub d_max: u32,
    pub l_max: usize,
    pub n_cap: usize,
    values: Vec<f64>,
}

impl MTable {
    pub fn get(&self, d: u32, l: usize, n: usize) -> f64 {
        let ld = self.l_max + 1;
        let nd = self.n_cap + 1;
        self.values[(d as usize * ld + l) * nd + n]
    }

    /// max over (d, l) for fixed n
    pub fn max_over_indices(&self, n: usize) -> f64 {
        let mut m = 0.0f64;
        for d in 0..=self.d_max {
            for l in 0..=self.l_max {
                m = m.max(self.get(d, l, n));
            }
        }
        m
    }
}

/// Pointwise `sigma^e * f` with a log-domain fallback when the plain power
/// would overflow. Exponents reach `(d_max+1) l_max + 2 n_cap`, so on wide
/// boxes `sigma^e` alone can exceed f64 range even though the product with
/// a decaying f stays finite.
fn weighted_values(sigma_vals: &[f64], exponent: i64, f_vals: &[f64]) -> Vec<f64> {
    let max_sigma = sigma_vals.iter().cloned().fold(1.0f64, f64::max);
    let safe = exponent == 0 || (exponent as f64) * max_sigma.ln() < 690.0;
    sigma_vals
        .iter()
        .zip(f_vals)
        .map(|(s, f)| {
            if safe {
                s.powi(exponent as i32) * f
            } else if *f == 0.0 {
                0.0
            } else {
                let sign = f.signum();
                sign * ((exponent as f64) * s.ln() + f.abs().ln()).exp()
            }
        })
        .collect()
}

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Error budget of a factorization, reported per source.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualBudget {
    /// sup-norm majorant of the dropped series terms
    pub series_tail_sup: f64,
    /// float rounding allowance
    pub float_budget: f64,
    /// multiplicative product-truncation certificate at the largest scale
    /// value on the box (both factors share the truncation, so this does
    /// not enter the residual; reported for auditability)
    pub product_tail_factor: f64,
}

impl ResidualBudget {
    pub fn total(&self) -> f64 {
        self.series_tail_sup + self.float_budget
    }
}

/// Result of `factorize_function`: `psi = theta * phi` with
/// `theta = chi_lambda o sigma` and `phi` a truncated series in even scale
/// powers against psi.
#[derive(Debug, Clone)]
pub struct FactorizationResult {
    pub theta: GridFunction,
    pub phi: GridFunction,
    pub lambda: LambdaSequence,
    pub n_series: usize,
    pub residual: f64,
    /// seminorm-level majorant of the dropped series tail
    pub tail_bound: f64,
    pub m_table: MTable,
    pub budget: ResidualBudget,
}

fn leibniz_slack(sigma: &MollifiedScale) -> Result<f64> {
    // constants from the derivative-bound certificate enter the series
    // majorant as (2n+1)^l max(1, C)^l
    let mut c_star = 1.0f64;
    for (k, v) in sigma.derivative.constants.iter() {
        if k.starts_with("C[") {
            c_star = c_star.max(*v);
        }
    }
    Ok(c_star)
}

fn m_table(
    psi: &GridFunction,
    sigma: &MollifiedScale,
    d_max: u32,
    l_max: usize,
    n_cap: usize,
) -> Result<MTable> {
    let dim = psi.grid().dim();
    let mut per_gamma: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
    for gamma in MultiIndex::all_up_to(dim, l_max) {
        let df = psi.finite_diff(&gamma)?;
        let s = sigma.scale.restrict(df.grid())?;
        per_gamma.push((gamma.total(), df.values().to_vec(), s.values().to_vec()));
    }
    let mut values = Vec::with_capacity((d_max as usize + 1) * (l_max + 1) * (n_cap + 1));
    for d in 0..=d_max {
        for l in 0..=l_max {
            for n in 0..=n_cap {
                let exponent = ((d as i64 + 1) * l as i64) + 2 * n as i64;
                let mut m = 0.0f64;
                for (total, df, sv) in &per_gamma {
                    if *total > l {
                        continue;
                    }
                    m = m.max(sup(&weighted_values(sv, exponent, df)));
                }
                if !m.is_finite() {
                    return Err(Error::SeminormDiverged(format!(
                        "M[{d}][{l}][{n}] is not finite"
                    )));
                }
                values.push(m);
            }
        }
    }
    Ok(MTable {
        d_max,
        l_max,
        n_cap,
        values,
    })
}

/// Evaluate the truncated series `sum_{n <= N} alpha_n s^{2n}` by Horner in
/// `s^2`; all coefficients are positive, so the evaluation is stable.
pub fn eval_alpha_series(seq: &LambdaSequence, upto: usize, s: f64) -> f64 {
    let s2 = s * s;
    let top = upto.min(seq.alphas().len().saturating_sub(1));
    let mut acc = seq.alpha(top);
    for n in (0..top).rev() {
        acc = acc * s2 + seq.alpha(n);
    }
    acc
}

/// Split a rapidly vanishing function as `psi = theta * phi`.
///
/// Preconditions: the scale carries a passing derivative-bound certificate
/// and psi passes the decay proxy at the requested index range. The dropped
/// series tail is certified against the majorant table; the residual is
/// checked against the combined budget before returning.
pub fn factorize_function(
    psi: &GridFunction,
    sigma: &MollifiedScale,
    opts: &FactorizeOptions,
) -> Result<FactorizationResult> {
    if !sigma.derivative.pass {
        return Err(Error::MissingDerivativeCertificate);
    }
    if psi.grid() != sigma.scale.grid() {
        return Err(Error::GridMismatch {
            context: "factorize_function",
        });
    }
    let report = decay_report(psi, &sigma.scale, opts.d_max, opts.l_max)?;
    if !report.consistent() {
        let (d, gamma) = report.witness.unwrap();
        return Err(Error::DecayInconsistent { d, gamma });
    }

    let n_cap = opts.caps.n_cap;
    let table = m_table(psi, sigma, opts.d_max, opts.l_max, n_cap)?;
    let m_hat: Vec<f64> = (0..=n_cap).map(|n| table.max_over_indices(n)).collect();
    let lambda = select_lambda(&m_hat, opts.epsilon, &opts.caps)?;

    // Series cutoff: smallest N whose dropped tail, measured in the
    // strongest tracked seminorm majorant with Leibniz slack, is <= eps.
    let c_star = leibniz_slack(sigma)?;
    let term_bound = |n: usize| -> f64 {
        let lei = (2.0 * n as f64 + 1.0).powi(table.l_max as i32) * c_star.powi(table.l_max as i32);
        lambda.alpha(n) * lei * table.max_over_indices(n)
    };
    let k = lambda.len();
    let mut n_series = k.min(n_cap);
    let mut tail = 0.0;
    for n in (0..k.min(n_cap)).rev() {
        let t = tail + term_bound(n + 1);
        if t <= opts.epsilon {
            tail = t;
            n_series = n;
        } else {
            break;
        }
    }
    let tail_bound = tail;

    // phi = (series in sigma^2 up to N) * psi, theta = chi_lambda o sigma
    let svals = sigma.scale.values();
    let mut phi_vals = Vec::with_capacity(svals.len());
    for (s, p) in svals.iter().zip(psi.values()) {
        phi_vals.push(eval_alpha_series(&lambda, n_series, *s) * p);
    }
    let phi = GridFunction::from_values(psi.grid().clone(), phi_vals)?;
    let theta = compose_scale(
        &Profile::ChiLambda {
            lambda: lambda.clone(),
        },
        &sigma.scale,
    )?;

    let recon = theta.pointwise_mul(&phi)?.pointwise_sub(psi)?;
    let residual = sup(recon.values());
    let series_tail_sup: f64 = (n_series + 1..=k.min(n_cap))
        .map(|n| lambda.alpha(n) * table.get(0, 0, n))
        .sum();
    let float_budget = 1e-12 * (k + n_series + 1) as f64 * (1.0 + sup(psi.values()));
    let budget = ResidualBudget {
        series_tail_sup,
        float_budget,
        product_tail_factor: phi_tail_factor(&lambda, svals.iter().cloned().fold(0.0, f64::max)),
    };
    if residual > budget.total() {
        return Err(Error::BudgetExceeded {
            residual,
            budget: budget.total(),
        });
    }

    Ok(FactorizationResult {
        theta,
        phi,
        lambda,
        n_series,
        residual,
        tail_bound,
        m_table: table,
        budget,
    })
}

/// Concrete differentiable-module carriers for element factorization.
pub enum ConcreteModule<'a> {
    /// The rapidly vanishing functions acting on themselves by pointwise
    /// multiplication; seminorms are the increasing family
    /// `m -> max_{d <= min(m, d_max), |gamma| <= min(m, l_max)}`.
    SchwartzSelf {
        sigma: &'a MollifiedScale,
        d_max: u32,
        l_max: usize,
    },
    /// Continuous-vanishing proxy under pointwise action: the sup norm is
    /// the only seminorm.
    C0Pointwise { sigma: &'a MollifiedScale },
}

impl<'a> ConcreteModule<'a> {
    pub fn sigma(&self) -> &'a MollifiedScale {
        match self {
            ConcreteModule::SchwartzSelf { sigma, .. } => sigma,
            ConcreteModule::C0Pointwise { sigma } => sigma,
        }
    }

    pub fn seminorm_count(&self) -> usize {
        match self {
            ConcreteModule::SchwartzSelf { d_max, l_max, .. } => *d_max as usize + *l_max + 1,
            ConcreteModule::C0Pointwise { .. } => 1,
        }
    }

    /// m-th seminorm of an element; increasing in m.
    pub fn seminorm(&self, m: usize, e: &GridFunction) -> Result<f64> {
        match self {
            ConcreteModule::C0Pointwise { .. } => Ok(sup(e.values())),
            ConcreteModule::SchwartzSelf {
                sigma,
                d_max,
                l_max,
            } => {
                let mut v = 0.0f64;
                for d in 0..=(*d_max).min(m as u32) {
                    for gamma in MultiIndex::all_up_to(e.grid().dim(), (*l_max).min(m)) {
                        v = v.max(seminorm_sigma(
                            e,
                            &sigma.scale,
                            &SeminormIndex::new(d, gamma.clone()),
                        )?);
                    }
                }
                Ok(v)
            }
        }
    }

    /// Order of derivatives entering the m-th seminorm, for float budgets.
    fn derivative_order(&self, m: usize) -> usize {
        match self {
            ConcreteModule::C0Pointwise { .. } => 0,
            ConcreteModule::SchwartzSelf { l_max, .. } => (*l_max).min(m),
        }
    }
}

/// Result of factorizing a module element `e = theta * f`.
#[derive(Debug, Clone)]
pub struct ModuleFactorization {
    pub theta: GridFunction,
    pub f: GridFunction,
    pub lambda: LambdaSequence,
    pub n_series: usize,
    /// per-seminorm residuals of `theta f - e`
    pub residuals: Vec<f64>,
    /// per-seminorm budgets the residuals were checked against
    pub budgets: Vec<f64>,
    pub tail_bound: f64,
}

impl ModuleFactorization {
    pub fn sup_residual(&self) -> f64 {
        self.residuals[0]
    }
}

/// Factorize a module element over a concrete carrier: `f` is the truncated
/// even-power series applied to `e`, `theta` the reciprocal product
/// composed with the scale. Tail bounds use the plain majorants
/// `M[m][n] = |sigma^{2n} e|_m`.
pub fn factorize_module_element(
    e: &GridFunction,
    module: &ConcreteModule,
    opts: &FactorizeOptions,
) -> Result<ModuleFactorization> {
    let sigma = module.sigma();
    if !sigma.derivative.pass {
        return Err(Error::MissingDerivativeCertificate);
    }
    if e.grid() != sigma.scale.grid() {
        return Err(Error::GridMismatch {
            context: "factorize_module_element",
        });
    }
    let n_cap = opts.caps.n_cap;
    let svals = sigma.scale.values();
    let m_count = module.seminorm_count();

    // M[m][n] = m-th seminorm of sigma^{2n} e
    let mut m_rows: Vec<Vec<f64>> = vec![Vec::with_capacity(n_cap + 1); m_count];
    for n in 0..=n_cap {
        let powered = GridFunction::from_values(
            e.grid().clone(),
            weighted_values(svals, 2 * n as i64, e.values()),
        )
        .map_err(|_| Error::SeminormDiverged(format!("sigma^{} e is not finite", 2 * n)))?;
        for (m, row) in m_rows.iter_mut().enumerate() {
            let v = module.seminorm(m, &powered)?;
            if !v.is_finite() {
                return Err(Error::SeminormDiverged(format!("M[{m}][{n}] diverged")));
            }
            row.push(v);
        }
    }
    let m_hat: Vec<f64> = (0..=n_cap)
        .map(|n| m_rows.iter().map(|r| r[n]).fold(0.0f64, f64::max))
        .collect();
    let lambda = select_lambda(&m_hat, opts.epsilon, &opts.caps)?;

    let k = lambda.len();
    let mut n_series = k.min(n_cap);
    let mut tail = 0.0;
    for n in (0..k.min(n_cap)).rev() {
        let t = tail + lambda.alpha(n + 1) * m_hat[n + 1];
        if t <= opts.epsilon {
            tail = t;
            n_series = n;
        } else {
            break;
        }
    }

    let mut f_vals = Vec::with_capacity(svals.len());
    for (s, ev) in svals.iter().zip(e.values()) {
        f_vals.push(eval_alpha_series(&lambda, n_series, *s) * ev);
    }
    let f = GridFunction::from_values(e.grid().clone(), f_vals)?;
    let theta = compose_scale(
        &Profile::ChiLambda {
            lambda: lambda.clone(),
        },
        &sigma.scale,
    )?;

    let diff = theta.pointwise_mul(&f)?.pointwise_sub(e)?;
    let h_min = e
        .grid()
        .axes()
        .iter()
        .map(|a| a.spacing)
        .fold(f64::INFINITY, f64::min);
    let mut residuals = Vec::with_capacity(m_count);
    let mut budgets = Vec::with_capacity(m_count);
    for m in 0..m_count {
        let r = module.seminorm(m, &diff)?;
        // derivative seminorms amplify float noise by the stencil scale
        let order = module.derivative_order(m);
        let float_amp = (3.0 / h_min).powi(order as i32);
        let budget = tail * (2.0 * (n_series as f64) + 1.0).powi(order as i32)
            + 1e-11 * (k + n_series + 1) as f64 * (1.0 + m_rows[m][0]) * float_amp;
        if r > budget {
            return Err(Error::BudgetExceeded {
                residual: r,
                budget,
            });
        }
        residuals.push(r);
        budgets.push(budget);
    }

    Ok(ModuleFactorization {
        theta,
        f,
        lambda,
        n_series,
        residuals,
        budgets,
        tail_bound: tail,
    })
}

/// Multipliers whose direct action on grid carriers exists, used both to
/// extend through a factorization and to cross-check the extension.
#[derive(Debug, Clone)]
pub enum MultiplierSpec {
    /// multiplication by `sigma^k`
    SigmaPower(u32),
    /// multiplication by `profile o sigma`
    Profile(Profile),
}

impl MultiplierSpec {
    fn apply_values(&self, sigma: &MollifiedScale, target: &GridFunction) -> Result<GridFunction> {
        match self {
            MultiplierSpec::SigmaPower(k) => {
                let vals: Vec<f64> = sigma
                    .scale
                    .values()
                    .iter()
                    .zip(target.values())
                    .map(|(s, v)| s.powi(*k as i32) * v)
                    .collect();
                GridFunction::from_values(target.grid().clone(), vals)
            }
            MultiplierSpec::Profile(p) => {
                let composed = compose_scale(p, &sigma.scale)?;
                composed.pointwise_mul(target)
            }
        }
    }
}

/// Direct pointwise action of a multiplier (exists on grid carriers).
pub fn apply_multiplier_direct(
    t: &MultiplierSpec,
    e: &GridFunction,
    sigma: &MollifiedScale,
) -> Result<GridFunction> {
    t.apply_values(sigma, e)
}

/// Extension of a multiplier through the factorization route.
#[derive(Debug, Clone)]
pub struct ExtendedAction {
    pub value: GridFunction,
    /// the factorization the extension was computed through
    pub factorization: ModuleFactorization,
}

/// Act on a module element by factoring `e = theta f` and returning
/// `(T theta) f`. The factorization used is recorded so two runs can be
/// compared within their combined budgets.
pub fn extend_multiplier(
    t: &MultiplierSpec,
    e: &GridFunction,
    module: &ConcreteModule,
    opts: &FactorizeOptions,
) -> Result<ExtendedAction> {
    let factorization = factorize_module_element(e, module, opts)?;
    let t_theta = t.apply_values(module.sigma(), &factorization.theta)?;
    let value = t_theta.pointwise_mul(&factorization.f)?;
    Ok(ExtendedAction {
        value,
        factorization,
    })
}
