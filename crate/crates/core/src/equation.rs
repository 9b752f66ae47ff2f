//! The object of every analysis: `x'' + p(t) x' + q(t) x = 0` on a domain
//! interval, with parameter bindings for the coefficient expressions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{CoeffExpr, EvalError, Params};
use crate::interval::Interval;

#[derive(Debug, Clone, Error)]
pub enum EquationError {
    #[error("coefficient `{which}` failed to evaluate at t = {t}: {source}")]
    CoefficientEval {
        which: &'static str,
        t: f64,
        source: EvalError,
    },
}

/// A second order linear homogeneous equation `x'' + p x' + q x = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Equation {
    pub p: CoeffExpr,
    pub q: CoeffExpr,
    pub domain: Interval,
    #[serde(default)]
    pub params: Params,
    /// Declared discontinuity points of piecewise-continuous coefficients;
    /// integration restarts there. No automatic detection is attempted.
    #[serde(default)]
    pub breakpoints: Vec<f64>,
}

impl Equation {
    pub fn new(p: CoeffExpr, q: CoeffExpr, domain: Interval) -> Self {
        Equation {
            p,
            q,
            domain,
            params: Params::new(),
            breakpoints: Vec::new(),
        }
    }

    /// Parse both coefficients from text. The domain defaults to the real
    /// line.
    pub fn parse(p_src: &str, q_src: &str) -> Result<Self, crate::expr::ParseError> {
        Ok(Equation::new(
            CoeffExpr::parse(p_src)?,
            CoeffExpr::parse(q_src)?,
            Interval::real_line(),
        ))
    }

    pub fn with_domain(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    pub fn p_at(&self, t: f64) -> Result<f64, EquationError> {
        self.p
            .eval(t, &self.params)
            .map_err(|source| EquationError::CoefficientEval {
                which: "p",
                t,
                source,
            })
    }

    pub fn q_at(&self, t: f64) -> Result<f64, EquationError> {
        self.q
            .eval(t, &self.params)
            .map_err(|source| EquationError::CoefficientEval {
                which: "q",
                t,
                source,
            })
    }

    /// Check that both coefficients evaluate on a sampling grid of the
    /// interior of `iv` (defaults to the domain truncated to `[-50, 50]`).
    pub fn validate_on(&self, iv: Interval, n: usize) -> Result<(), EquationError> {
        let lo = iv.lo.max(-50.0);
        let hi = iv.hi.min(50.0);
        let n = n.max(2);
        for i in 0..=n {
            // stay strictly interior: singular endpoints are legal
            let frac = (i as f64 + 0.5) / (n as f64 + 1.0);
            let t = lo + frac * (hi - lo);
            self.p_at(t)?;
            self.q_at(t)?;
        }
        Ok(())
    }
}
