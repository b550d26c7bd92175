//! Executable negative results: the summable-sequence algebra whose
//! products land in a strictly smaller half-power class (so factorization
//! must fail), and a multiplier whose action escapes the vanishing-at-
//! infinity module.

use crate::cert::Certificate;
use crate::error::Result;
use crate::grid::{Grid, GridDescriptor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Finitely supported real sequence on an integer window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub start: i64,
    pub values: Vec<f64>,
}

impl Sequence {
    pub fn new(start: i64, values: Vec<f64>) -> Sequence {
        Sequence { start, values }
    }

    pub fn delta(at: i64) -> Sequence {
        Sequence {
            start: at,
            values: vec![1.0],
        }
    }

    pub fn get(&self, k: i64) -> f64 {
        if k < self.start {
            return 0.0;
        }
        let i = (k - self.start) as usize;
        self.values.get(i).copied().unwrap_or(0.0)
    }

    fn span(&self, other: &Sequence) -> (i64, i64) {
        let lo = self.start.min(other.start);
        let hi =
            (self.start + self.values.len() as i64).max(other.start + other.values.len() as i64);
        (lo, hi)
    }

    /// Pointwise product (the algebra multiplication).
    pub fn pointwise_mul(&self, other: &Sequence) -> Sequence {
        let (lo, hi) = self.span(other);
        let values = (lo..hi).map(|k| self.get(k) * other.get(k)).collect();
        Sequence { start: lo, values }
    }

    pub fn pointwise_add(&self, other: &Sequence) -> Sequence {
        let (lo, hi) = self.span(other);
        let values = (lo..hi).map(|k| self.get(k) + other.get(k)).collect();
        Sequence { start: lo, values }
    }
}

/// Sum of square roots of absolute values (the half-power sum).
pub fn half_norm(s: &Sequence) -> f64 {
    s.values.iter().map(|v| v.abs().sqrt()).sum()
}

/// Sum of absolute values.
pub fn l1_norm(s: &Sequence) -> f64 {
    s.values.iter().map(|v| v.abs()).sum()
}

/// Partial-sum table of the witness sequence `s_k = 1/k^2` across nested
/// windows: the absolute sums stay bounded while the half-power sums are
/// the harmonic numbers and keep growing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessRow {
    pub window: usize,
    pub l1_partial: f64,
    pub half_partial: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub trials: usize,
    pub length: usize,
    pub seed: u64,
    /// worst residual of half(phi psi) <= l1(phi) l1(psi)
    pub product_residual: f64,
    /// worst residual of half(phi + psi) <= 2 (half(phi) + half(psi))
    pub sum_residual: f64,
    pub witness: Vec<WitnessRow>,
    pub half_growth: f64,
    pub l1_change: f64,
}

fn desk_descriptor() -> GridDescriptor {
    // certificates carry a grid descriptor; sequence checks run on an
    // abstract integer window, summarized by a unit lattice
    Grid::line(1.0, 1.0).unwrap().descriptor()
}

/// Random-pair verification of the two half-power inequalities plus the
/// divergence witness across nested windows.
pub fn check_l1_counterexample(
    trials: usize,
    length: usize,
    seed: u64,
    windows: &[usize],
) -> Result<(Certificate, CounterexampleReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut product_residual = f64::NEG_INFINITY;
    let mut sum_residual = f64::NEG_INFINITY;
    for _ in 0..trials {
        let phi = Sequence::new(0, (0..length).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let psi = Sequence::new(0, (0..length).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let pr = half_norm(&phi.pointwise_mul(&psi)) - l1_norm(&phi) * l1_norm(&psi);
        let sr = half_norm(&phi.pointwise_add(&psi)) - 2.0 * (half_norm(&phi) + half_norm(&psi));
        product_residual = product_residual.max(pr);
        sum_residual = sum_residual.max(sr);
    }
    if trials == 0 {
        product_residual = 0.0;
        sum_residual = 0.0;
    }

    let mut witness = Vec::with_capacity(windows.len());
    for &w in windows {
        let mut l1 = 0.0;
        let mut half = 0.0;
        for k in 1..=w {
            let v = 1.0 / (k as f64 * k as f64);
            l1 += v;
            half += v.sqrt();
        }
        witness.push(WitnessRow {
            window: w,
            l1_partial: l1,
            half_partial: half,
        });
    }
    let half_growth = match (witness.first(), witness.last()) {
        (Some(a), Some(b)) => b.half_partial - a.half_partial,
        _ => 0.0,
    };
    let l1_change = match (witness.first(), witness.last()) {
        (Some(a), Some(b)) => b.l1_partial - a.l1_partial,
        _ => 0.0,
    };

    let report = CounterexampleReport {
        trials,
        length,
        seed,
        product_residual,
        sum_residual,
        witness,
        half_growth,
        l1_change,
    };
    let worst = product_residual.max(sum_residual);
    let cert = Certificate::new("l1_pointwise_counterexample", desk_descriptor())
        .with_constant("trials", trials as f64)
        .with_constant("length", length as f64)
        .with_constant("seed", seed as f64)
        .with_constant("half_growth", report.half_growth)
        .with_constant("l1_change", report.l1_change)
        .with_note("products land in the half-power class; the witness escapes it")
        .finish(worst, None);
    Ok((cert, report))
}

/// One row of the multiplier-escape table: the infimum of `|T f|` with
/// `T = r^2` and `f = 1/(1+r^2)` over `|r| >= R`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EscapeRow {
    pub r: f64,
    pub inf_tail: f64,
    /// closed form R^2 / (1 + R^2) of the same infimum
    pub formula: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EscapeReport {
    pub rows: Vec<EscapeRow>,
    /// sup |f (1 + r^2) - 1| on the widest grid used
    pub identity_residual: f64,
}

/// Multiplication by `r^2` pushes `f = 1/(1+r^2)` out of the vanishing
/// module: the tail infimum of `|T f|` climbs to 1 instead of dropping to 0.
pub fn multiplier_escape_demo(r_values: &[f64]) -> Result<EscapeReport> {
    let mut rows = Vec::with_capacity(r_values.len());
    let mut identity_residual = 0.0f64;
    for &r in r_values {
        // grid wide enough to see past R, with R itself a lattice point
        let h = if r == 0.0 { 0.25 } else { r / 64.0 };
        let l = if r == 0.0 { 8.0 } else { 2.0 * r };
        let grid = Grid::line(l, h)?;
        let mut inf_tail = f64::INFINITY;
        for flat in 0..grid.len() {
            let x = grid.coords(flat)[0];
            let f = 1.0 / (1.0 + x * x);
            identity_residual = identity_residual.max((f * (1.0 + x * x) - 1.0).abs());
            if x.abs() >= r {
                inf_tail = inf_tail.min(x * x * f);
            }
        }
        rows.push(EscapeRow {
            r,
            inf_tail,
            formula: r * r / (1.0 + r * r),
        });
    }
    Ok(EscapeReport {
        rows,
        identity_residual,
    })
}
