//! Weighted seminorms, membership diagnostics, the scale-multiplier bound
//! and composition of rapidly decaying profiles with a scale.

use crate::cert::Certificate;
use crate::dixmier::LambdaSequence;
use crate::error::{Error, Result};
use crate::grid::{boundary_decay_consistent, shell_sups, GridFunction, MultiIndex};
use crate::scales::{MollifiedScale, Scale};
use serde::{Deserialize, Serialize};

/// Index of one seminorm: sup of `scale^d |X^gamma f|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormIndex {
    pub d: u32,
    pub gamma: MultiIndex,
}

impl SeminormIndex {
    pub fn new(d: u32, gamma: MultiIndex) -> SeminormIndex {
        SeminormIndex { d, gamma }
    }

    pub fn flat(d: u32, dim: usize) -> SeminormIndex {
        SeminormIndex {
            d,
            gamma: MultiIndex::zero(dim),
        }
    }
}

/// `sup sigma^d |X^gamma f|` over the stencil-shrunken domain.
pub fn seminorm_sigma(f: &GridFunction, sigma: &Scale, idx: &SeminormIndex) -> Result<f64> {
    if f.grid() != sigma.grid() {
        return Err(Error::GridMismatch {
            context: "seminorm_sigma",
        });
    }
    let df = f.finite_diff(&idx.gamma)?;
    let s = sigma.restrict(df.grid())?;
    let mut sup = 0.0f64;
    for (v, sv) in df.values().iter().zip(s.values()) {
        let w = sv.powi(idx.d as i32) * v.abs();
        if w > sup {
            sup = w;
        }
    }
    Ok(sup)
}

/// Classical one-dimensional Schwartz seminorm `sup |r^d phi^(k)(r)|`.
pub fn seminorm_schwartz(phi: &GridFunction, d: u32, k: usize) -> Result<f64> {
    if phi.grid().dim() != 1 {
        return Err(Error::GridMismatch {
            context: "seminorm_schwartz needs dim 1",
        });
    }
    let df = phi.finite_diff(&MultiIndex::new(vec![k]))?;
    let mut sup = 0.0f64;
    for (flat, v) in df.values().iter().enumerate() {
        let r = df.grid().coords(flat)[0];
        let w = r.abs().powi(d as i32) * v.abs();
        if w > sup {
            sup = w;
        }
    }
    Ok(sup)
}

/// Multiply by the scale and certify, for each requested index, that the
/// seminorm of `sigma f` is bounded by the Leibniz combination of seminorms
/// of `f` with constants from the scale's derivative-bound certificate.
pub fn multiplier_sigma(
    f: &GridFunction,
    sigma: &MollifiedScale,
    indices: &[SeminormIndex],
) -> Result<(GridFunction, Certificate)> {
    if !sigma.derivative.pass {
        return Err(Error::MissingDerivativeCertificate);
    }
    let d_tilde = sigma
        .derivative
        .constant("d")
        .ok_or(Error::MissingDerivativeCertificate)? as u32;
    let scale = &sigma.scale;
    let product = f.pointwise_mul(scale.as_grid_function())?;

    let mut worst = f64::NEG_INFINITY;
    let mut cert = Certificate::new("multiplier_bound", f.grid().descriptor())
        .with_constant("d_tilde", d_tilde as f64);
    for (i, idx) in indices.iter().enumerate() {
        let lhs = seminorm_sigma(&product, scale, idx)?;
        // Leibniz: X^gamma(sigma f) = sum_beta C(gamma,beta) X^beta(sigma) X^(gamma-beta)(f)
        let mut rhs = seminorm_sigma(f, scale, &SeminormIndex::new(idx.d + 1, idx.gamma.clone()))?;
        for beta in MultiIndex::all_up_to(f.grid().dim(), idx.gamma.total()) {
            if beta.is_zero() || !idx.gamma.contains(&beta) {
                continue;
            }
            let c_beta = sigma
                .derivative
                .constant(&format!("C[{}]", beta.label()))
                .ok_or(Error::MissingDerivativeCertificate)?;
            let coeff = idx.gamma.binomial(&beta);
            rhs += coeff
                * c_beta
                * seminorm_sigma(
                    f,
                    scale,
                    &SeminormIndex::new(idx.d + d_tilde, idx.gamma.sub(&beta)),
                )?;
        }
        cert = cert
            .with_constant(format!("lhs[{i}]"), lhs)
            .with_constant(format!("rhs[{i}]"), rhs);
        if lhs - rhs > worst {
            worst = lhs - rhs;
        }
    }
    if indices.is_empty() {
        worst = 0.0;
    }
    let cert = cert.finish(worst, None);
    Ok((product, cert))
}

/// Rapidly decaying profiles that can be composed with a proper scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "profile")]
pub enum Profile {
    /// exp(-t^2)
    GaussianDecay,
    /// 1 / t on t >= 1
    Reciprocal,
    /// constant
    Constant { value: f64 },
    /// reciprocal of a truncated even product: chi(t) = 1 / prod(1 + t^2/lambda_k^2)
    ChiLambda { lambda: LambdaSequence },
    /// user samples with linear interpolation; arguments outside the sample
    /// range are rejected
    Sampled { ts: Vec<f64>, values: Vec<f64> },
    /// pointwise product of two profiles
    Product {
        left: Box<Profile>,
        right: Box<Profile>,
    },
}

impl Profile {
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Profile::GaussianDecay => Ok((-t * t).exp()),
            Profile::Reciprocal => {
                if t <= 0.0 {
                    return Err(Error::ProfileDomainExceeded { value: t });
                }
                Ok(1.0 / t)
            }
            Profile::Constant { value } => Ok(*value),
            Profile::ChiLambda { lambda } => Ok(crate::dixmier::eval_chi_lambda(lambda, t)),
            Profile::Sampled { ts, values } => {
                let first = *ts
                    .first()
                    .ok_or(Error::ProfileDomainExceeded { value: t })?;
                let last = *ts.last().unwrap();
                if t < first || t > last {
                    return Err(Error::ProfileDomainExceeded { value: t });
                }
                let pos = ts.partition_point(|&x| x <= t);
                if pos == 0 {
                    return Ok(values[0]);
                }
                if pos >= ts.len() {
                    return Ok(values[values.len() - 1]);
                }
                let (t0, t1) = (ts[pos - 1], ts[pos]);
                let (v0, v1) = (values[pos - 1], values[pos]);
                let u = (t - t0) / (t1 - t0);
                Ok(v0 + u * (v1 - v0))
            }
            Profile::Product { left, right } => Ok(left.eval(t)? * right.eval(t)?),
        }
    }

    /// Analytic derivative where a closed form exists.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        match self {
            Profile::GaussianDecay => Ok(-2.0 * t * (-t * t).exp()),
            Profile::Reciprocal => {
                if t <= 0.0 {
                    return Err(Error::ProfileDomainExceeded { value: t });
                }
                Ok(-1.0 / (t * t))
            }
            Profile::Constant { .. } => Ok(0.0),
            Profile::ChiLambda { lambda } => {
                // chi' = -phi'/phi^2 with phi'/phi = sum 2t/(lambda_k^2 + t^2)
                let chi = crate::dixmier::eval_chi_lambda(lambda, t);
                let log_deriv: f64 = (0..lambda.len())
                    .map(|j| {
                        let l2 = lambda.lambda(j) * lambda.lambda(j);
                        2.0 * t / (l2 + t * t)
                    })
                    .sum();
                Ok(-chi * log_deriv)
            }
            Profile::Product { left, right } => {
                Ok(left.derivative(t)? * right.eval(t)? + left.eval(t)? * right.derivative(t)?)
            }
            Profile::Sampled { .. } => Err(Error::ProfileDomainExceeded { value: t }),
        }
    }
}

/// Pointwise composition `(profile o scale)(m) = profile(scale(m))`.
///
/// Meaningful as a map into the rapidly vanishing space only for proper
/// scales (see `check_proper`); the composition itself just needs the
/// profile defined on the scale's range.
pub fn compose_scale(profile: &Profile, sigma: &Scale) -> Result<GridFunction> {
    let mut values = Vec::with_capacity(sigma.values().len());
    for &s in sigma.values() {
        values.push(profile.eval(s)?);
    }
    GridFunction::from_values(sigma.grid().clone(), values)
}

/// Optional chain-rule certificate for the composition: the finite
/// difference of `profile o scale` against `(profile' o scale) * X scale`,
/// checked on the stencil-shrunken domain with a caller-supplied budget.
pub fn chain_rule_certificate(
    profile: &Profile,
    sigma: &Scale,
    axis: usize,
    budget: f64,
) -> Result<Certificate> {
    let composed = compose_scale(profile, sigma)?;
    let mut gamma = vec![0usize; sigma.grid().dim()];
    gamma[axis] = 1;
    let gamma = MultiIndex::new(gamma);
    let lhs = composed.finite_diff(&gamma)?;
    let dsigma = sigma.as_grid_function().finite_diff(&gamma)?;
    let s_small = sigma.restrict(lhs.grid())?;
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for (i, ((l, ds), sv)) in lhs
        .values()
        .iter()
        .zip(dsigma.values())
        .zip(s_small.values())
        .enumerate()
    {
        let rhs = profile.derivative(*sv)? * ds;
        let r = (l - rhs).abs() - budget;
        if r > worst {
            worst = r;
            witness = Some(lhs.grid().coords(i));
        }
    }
    Ok(Certificate::new("chain_rule", sigma.grid().descriptor())
        .with_constant("budget", budget)
        .finish(worst, witness))
}

/// One row of a decay report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayEntry {
    pub d: u32,
    pub gamma: Vec<usize>,
    pub value: f64,
    pub boundary_consistent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

/// Seminorm table with a membership verdict for the rapid-vanishing space:
/// an entry is flagged when the shell sups of `sigma^d X^gamma f` grow
/// toward the truncation boundary. Vanishing at infinity itself is not
/// observable on a box, so the verdict is a proxy and says so.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub entries: Vec<DecayEntry>,
    /// least-squares slope of log(shell sup) against log|x| per axis,
    /// fitted on the outer half of the base entry (d = 0, gamma = 0)
    pub decay_exponents: Vec<f64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<(u32, Vec<usize>)>,
    pub notes: Vec<String>,
}

impl DecayReport {
    pub fn consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }

    /// CSV table `d,gamma,value,boundary_consistent` for plotting.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "d,gamma,value,boundary_consistent")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{:?},{}",
                e.d,
                e.gamma
                    .iter()
                    .map(|o| o.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
                e.value,
                e.boundary_consistent
            )?;
        }
        Ok(())
    }
}

pub fn decay_report(
    f: &GridFunction,
    sigma: &Scale,
    d_max: u32,
    l_max: usize,
) -> Result<DecayReport> {
    if f.grid() != sigma.grid() {
        return Err(Error::GridMismatch {
            context: "decay_report",
        });
    }
    let dim = f.grid().dim();
    let mut entries = Vec::new();
    let mut witness = None;
    for gamma in MultiIndex::all_up_to(dim, l_max) {
        let df = f.finite_diff(&gamma)?;
        let s = sigma.restrict(df.grid())?;
        for d in 0..=d_max {
            let weighted = GridFunction::from_values(
                df.grid().clone(),
                df.values()
                    .iter()
                    .zip(s.values())
                    .map(|(v, sv)| v * sv.powi(d as i32))
                    .collect(),
            )?;
            let sups = shell_sups(&weighted);
            let consistent = boundary_decay_consistent(&sups);
            if !consistent && witness.is_none() {
                witness = Some((d, gamma.orders().to_vec()));
            }
            entries.push(DecayEntry {
                d,
                gamma: gamma.orders().to_vec(),
                value: weighted.sup_norm(),
                boundary_consistent: consistent,
            });
        }
    }
    entries.sort_by(|a, b| (a.d, &a.gamma).cmp(&(b.d, &b.gamma)));

    // decay exponent per axis from the base entry
    let mut decay_exponents = Vec::with_capacity(dim);
    let sups = shell_sups(f);
    for axis in 0..dim {
        let ax = &f.grid().axes()[axis];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (j, &p) in sups.iter().enumerate() {
            let x = j as f64 * ax.spacing;
            if j > sups.len() / 2 && p > 0.0 && x > 0.0 {
                xs.push(x.ln());
                ys.push(p.ln());
            }
        }
        decay_exponents.push(slope(&xs, &ys));
    }

    Ok(DecayReport {
        verdict: if witness.is_none() {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        },
        witness,
        entries,
        decay_exponents,
        notes: vec!["boundary decay is a truncated-domain proxy for vanishing at infinity".into()],
    })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        f64::NAN
    } else {
        num / den
    }
}
