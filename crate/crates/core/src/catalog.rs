//! Closed-form catalog for scales and test functions.
//!
//! Scales built from a closed form can be resampled exactly at shifted
//! points, which keeps translation-type certificates free of interpolation
//! error. The catalog is deliberately small: radial polynomials, power and
//! exponential growth, and constants, plus a few rapidly decaying test
//! functions for the command line.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

fn radius2(coords: &[f64]) -> f64 {
    coords.iter().map(|x| x * x).sum()
}

/// Exactly resampleable scale profiles (all with values >= 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "form", content = "param")]
pub enum ClosedForm {
    /// Constant c >= 1.
    Constant(f64),
    /// 1 + |x|^2 (the radial quadratic scale).
    OnePlusSquare,
    /// 1 + |x|^p for p > 0.
    OnePlusAbsPow(f64),
    /// exp(|x|).
    ExpAbs,
    /// 1 + |sin x_1| (one-dimensional; oscillating, never proper).
    OnePlusAbsSin,
}

impl ClosedForm {
    pub fn eval(&self, coords: &[f64]) -> f64 {
        match self {
            ClosedForm::Constant(c) => *c,
            ClosedForm::OnePlusSquare => 1.0 + radius2(coords),
            ClosedForm::OnePlusAbsPow(p) => 1.0 + radius2(coords).sqrt().powf(*p),
            ClosedForm::ExpAbs => radius2(coords).sqrt().exp(),
            ClosedForm::OnePlusAbsSin => 1.0 + coords[0].sin().abs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ClosedForm::Constant(c) = self {
            if !(*c >= 1.0 && c.is_finite()) {
                return Err(Error::ScaleBelowOne { min: *c });
            }
        }
        if let ClosedForm::OnePlusAbsPow(p) = self {
            if !(*p > 0.0 && p.is_finite()) {
                return Err(Error::Parse(format!("power {p} must be positive")));
            }
        }
        Ok(())
    }
}

impl FromStr for ClosedForm {
    type Err = Error;

    /// Parse catalog names like `one_plus_square`, `constant:2`,
    /// `one_plus_abs_pow:1`, `exp_abs`, `one_plus_abs_sin`.
    fn from_str(s: &str) -> Result<ClosedForm> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let parse_arg = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::Parse(format!("`{s}` needs a numeric parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
        };
        let form = match name {
            "constant" => ClosedForm::Constant(parse_arg(arg)?),
            "one_plus_square" => ClosedForm::OnePlusSquare,
            "one_plus_abs_pow" => ClosedForm::OnePlusAbsPow(parse_arg(arg)?),
            "exp_abs" => ClosedForm::ExpAbs,
            "one_plus_abs_sin" => ClosedForm::OnePlusAbsSin,
            other => return Err(Error::Parse(format!("unknown scale form `{other}`"))),
        };
        form.validate()?;
        Ok(form)
    }
}

/// Named rapidly decaying test functions for jobs and demos.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// exp(-|x|^2)
    Gaussian,
    /// x_1 exp(-|x|^2)
    XGaussian,
    /// 1 / (1 + |x|^2)
    Rational,
    /// constant one
    One,
    /// constant zero
    Zero,
}

impl TestFunction {
    pub fn eval(&self, coords: &[f64]) -> f64 {
        let r2 = radius2(coords);
        match self {
            TestFunction::Gaussian => (-r2).exp(),
            TestFunction::XGaussian => coords[0] * (-r2).exp(),
            TestFunction::Rational => 1.0 / (1.0 + r2),
            TestFunction::One => 1.0,
            TestFunction::Zero => 0.0,
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<TestFunction> {
        Ok(match s {
            "gaussian" => TestFunction::Gaussian,
            "x_gaussian" => TestFunction::XGaussian,
            "rational" => TestFunction::Rational,
            "one" => TestFunction::One,
            "zero" => TestFunction::Zero,
            other => return Err(Error::Parse(format!("unknown test function `{other}`"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_parse_and_eval() {
        let f: ClosedForm = "one_plus_square".parse().unwrap();
        assert_eq!(f.eval(&[2.0]), 5.0);
        let f: ClosedForm = "constant:2".parse().unwrap();
        assert_eq!(f.eval(&[7.0]), 2.0);
        let f: ClosedForm = "one_plus_abs_pow:1".parse().unwrap();
        assert_eq!(f.eval(&[-3.0]), 4.0);
        assert!("constant:0.5".parse::<ClosedForm>().is_err());
        assert!("nope".parse::<ClosedForm>().is_err());
    }

    #[test]
    fn radial_in_two_dims() {
        let f = ClosedForm::OnePlusSquare;
        assert_eq!(f.eval(&[3.0, 4.0]), 26.0);
        assert_eq!(ClosedForm::ExpAbs.eval(&[3.0, 4.0]), 5.0f64.exp());
    }
}
