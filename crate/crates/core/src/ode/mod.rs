//! Numerical integration of the equation, dense-output trajectories, zero
//! location, Wronskian identities, and the action of the operator
//! `L = d^2/dt^2 + p d/dt + q` on test functions.

pub mod rk45;
mod zeros;

pub use rk45::{endpoint_fixed_rk4, DenseSolution, DenseStep, DEFAULT_MAX_STEPS};
pub use zeros::{scan_zeros_fn, Zero, ZeroKind, ZeroList};

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equation::{Equation, EquationError};
use crate::expr::{CoeffExpr, DiffError, EvalError, Params};
use crate::interval::Interval;
use crate::quad::{self, QuadError};

#[derive(Debug, Clone, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (coefficient blow-up?)")]
    StepSizeUnderflow { t: f64 },
    #[error("maximum number of steps exceeded near t = {t}")]
    MaxStepsExceeded { t: f64 },
    #[error(transparent)]
    Coefficient(#[from] EquationError),
    #[error("forcing term failed to evaluate at t = {t}: {source}")]
    Forcing { t: f64, source: EvalError },
    #[error("quadrature failure: {0}")]
    Quadrature(#[from] QuadError),
    #[error("test function is not twice differentiable: {0}")]
    NotDifferentiable(#[from] DiffError),
    #[error("integration span [{t0}, {t1}] leaves the equation domain {domain}")]
    OutsideDomain { t0: f64, t1: f64, domain: String },
}

/// Relative/absolute error tolerances for the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel: 1e-10,
            abs: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tolerances { rel, abs }
    }

    pub fn tighter(self, factor: f64) -> Self {
        Tolerances {
            rel: (self.rel / factor).max(5e-15),
            abs: (self.abs / factor).max(1e-300),
        }
    }
}

/// A dense-output numerical solution `(x, x')` of the equation on a finite
/// span. Immutable after construction; queries are pure.
#[derive(Debug, Clone)]
pub struct Trajectory {
    sol: DenseSolution<2>,
}

impl Trajectory {
    pub(crate) fn from_solution(sol: DenseSolution<2>) -> Self {
        Trajectory { sol }
    }

    /// Assemble a trajectory from grid samples `(t, x, x', x'')` as cubic
    /// Hermite segments for both components.
    pub(crate) fn from_grid(points: &[(f64, f64, f64, f64)], tol: Tolerances) -> Self {
        assert!(points.len() >= 2);
        let mut steps = Vec::with_capacity(points.len() - 1);
        for w in points.windows(2) {
            let (t0, x0, v0, a0) = w[0];
            let (t1, x1, v1, a1) = w[1];
            steps.push(DenseStep::hermite(
                t0,
                t1,
                [x0, v0],
                [x1, v1],
                [v0, a0],
                [v1, a1],
            ));
        }
        let first = points[0];
        let last = points[points.len() - 1];
        Trajectory {
            sol: DenseSolution {
                steps,
                t_start: first.0,
                t_end: last.0,
                y_start: [first.1, first.2],
                y_end: [last.1, last.2],
                tol,
                n_accepted: points.len() - 1,
                n_rejected: 0,
            },
        }
    }

    /// Span as `(lo, hi)` regardless of integration direction.
    pub fn span(&self) -> (f64, f64) {
        self.sol.span()
    }

    pub fn t_start(&self) -> f64 {
        self.sol.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.sol.t_end
    }

    pub fn x(&self, t: f64) -> f64 {
        self.sol.eval(t)[0]
    }

    pub fn dx(&self, t: f64) -> f64 {
        self.sol.eval(t)[1]
    }

    pub fn state(&self, t: f64) -> (f64, f64) {
        let y = self.sol.eval(t);
        (y[0], y[1])
    }

    /// Derivative of the dense interpolant itself (one order less accurate
    /// than the state; used for residual spot checks).
    pub fn interpolant_derivative(&self, t: f64) -> (f64, f64) {
        let d = self.sol.eval_derivative(t);
        (d[0], d[1])
    }

    pub fn end_state(&self) -> (f64, f64) {
        (self.sol.y_end[0], self.sol.y_end[1])
    }

    pub fn tol(&self) -> Tolerances {
        self.sol.tol
    }

    pub fn n_steps(&self) -> usize {
        self.sol.steps.len()
    }

    pub(crate) fn dense(&self) -> &DenseSolution<2> {
        &self.sol
    }

    /// Largest |x| over the step nodes; the natural scale of the solution.
    pub fn amplitude(&self) -> f64 {
        self.sol
            .nodes()
            .iter()
            .map(|(_, y)| y[0].abs())
            .fold(0.0, f64::max)
    }

    /// CSV export `t,x,dx` at node points, with a `#`-prefixed metadata line
    /// echoing the tolerances.
    pub fn export_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# tol_rel={} tol_abs={}", self.sol.tol.rel, self.sol.tol.abs)?;
        writeln!(w, "t,x,dx")?;
        for (t, y) in self.sol.nodes() {
            writeln!(w, "{},{},{}", t, y[0], y[1])?;
        }
        Ok(())
    }

    /// Spot check that the dense output satisfies the equation: compares the
    /// interpolant derivative of `x'` against `-(p x' + q x)` at `n` interior
    /// points. Returns the maximum scaled residual.
    pub fn residual_check(&self, eq: &Equation, n: usize) -> Result<f64, OdeError> {
        let (lo, hi) = self.span();
        let scale = self.amplitude().max(1.0);
        let mut worst = 0.0f64;
        for i in 1..=n {
            let t = lo + (hi - lo) * i as f64 / (n as f64 + 1.0);
            let (x, v) = self.state(t);
            let (_, dv) = self.interpolant_derivative(t);
            let rhs = -(eq.p_at(t)? * v + eq.q_at(t)? * x);
            let denom = scale + rhs.abs();
            worst = worst.max((dv - rhs).abs() / denom);
        }
        Ok(worst)
    }
}

fn rhs_homogeneous<'a>(
    eq: &'a Equation,
) -> impl FnMut(f64, &[f64; 2]) -> Result<[f64; 2], OdeError> + 'a {
    move |t, y| {
        let p = eq.p_at(t)?;
        let q = eq.q_at(t)?;
        Ok([y[1], -(p * y[1] + q * y[0])])
    }
}

fn check_span(eq: &Equation, t0: f64, t1: f64) -> Result<(), OdeError> {
    let lo = t0.min(t1);
    let hi = t0.max(t1);
    // endpoints of the domain itself are allowed even when open (the margin
    // policy for singular endpoints lives in the callers)
    if lo < eq.domain.lo || hi > eq.domain.hi {
        return Err(OdeError::OutsideDomain {
            t0,
            t1,
            domain: eq.domain.to_string(),
        });
    }
    Ok(())
}

/// Split an integration span at the equation's declared breakpoints.
fn segments(eq: &Equation, t0: f64, t1: f64) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = eq
        .breakpoints
        .iter()
        .copied()
        .filter(|&b| (b - t0) * (b - t1) < 0.0)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if t1 < t0 {
        cuts.reverse();
    }
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut prev = t0;
    for c in cuts {
        out.push((prev, c));
        prev = c;
    }
    out.push((prev, t1));
    out
}

/// Integrate the homogeneous initial value problem from `(x0, v0)` at `t0`
/// to `t1` (backward when `t1 < t0`).
pub fn integrate_ivp(
    eq: &Equation,
    t0: f64,
    x0: f64,
    v0: f64,
    t1: f64,
    tol: Tolerances,
) -> Result<Trajectory, OdeError> {
    check_span(eq, t0, t1)?;
    let mut all_steps: Vec<DenseStep<2>> = Vec::new();
    let mut state = [x0, v0];
    let mut accepted = 0;
    let mut rejected = 0;
    for (a, b) in segments(eq, t0, t1) {
        let sol = rk45::integrate(rhs_homogeneous(eq), a, state, b, tol, DEFAULT_MAX_STEPS)?;
        state = sol.y_end;
        accepted += sol.n_accepted;
        rejected += sol.n_rejected;
        all_steps.extend(sol.steps);
    }
    Ok(Trajectory::from_solution(DenseSolution {
        steps: all_steps,
        t_start: t0,
        t_end: t1,
        y_start: [x0, v0],
        y_end: state,
        tol,
        n_accepted: accepted,
        n_rejected: rejected,
    }))
}

/// Integrate the forced problem `x'' + p x' + q x = f`.
pub fn integrate_ivp_forced(
    eq: &Equation,
    f: &CoeffExpr,
    t0: f64,
    x0: f64,
    v0: f64,
    t1: f64,
    tol: Tolerances,
) -> Result<Trajectory, OdeError> {
    check_span(eq, t0, t1)?;
    let params = eq.params.clone();
    let rhs = |t: f64, y: &[f64; 2]| -> Result<[f64; 2], OdeError> {
        let p = eq.p_at(t)?;
        let q = eq.q_at(t)?;
        let force = f
            .eval(t, &params)
            .map_err(|source| OdeError::Forcing { t, source })?;
        Ok([y[1], force - (p * y[1] + q * y[0])])
    };
    let sol = rk45::integrate(rhs, t0, [x0, v0], t1, tol, DEFAULT_MAX_STEPS)?;
    Ok(Trajectory::from_solution(sol))
}

/// Cauchy function trajectory `C(., s)`: value 0 and slope 1 at `s`.
pub fn cauchy(eq: &Equation, s: f64, t1: f64, tol: Tolerances) -> Result<Trajectory, OdeError> {
    integrate_ivp(eq, s, 0.0, 1.0, t1, tol)
}

/// All zeros of the dense output inside `window`, bracketed by sign changes
/// and refined by bisection; near-tangencies are flagged suspect.
pub fn find_zeros(traj: &Trajectory, window: Interval, t_tol: f64) -> ZeroList {
    zeros::find_zeros(traj, window, t_tol)
}

/// Wronskian ratio `W(t)/W(a)` computed two independent ways.
#[derive(Debug, Clone, Serialize)]
pub struct WronskianReport {
    /// From Abel's formula `exp(-int_a^t p)`. This is the returned value.
    pub abel: f64,
    /// From the determinant of two independently integrated solutions.
    pub determinant: f64,
}

impl WronskianReport {
    pub fn value(&self) -> f64 {
        self.abel
    }

    pub fn relative_disagreement(&self) -> f64 {
        (self.abel - self.determinant).abs() / (1.0 + self.abel.abs())
    }
}

/// Compute `W(t)/W(a)` via Abel's identity and cross-check against two
/// integrated solutions.
pub fn wronskian_ratio(
    eq: &Equation,
    a: f64,
    t: f64,
    tol: Tolerances,
) -> Result<WronskianReport, OdeError> {
    check_span(eq, a, t)?;
    let integral = quad::integrate(
        |s| {
            eq.p_at(s).map_err(|e| QuadError::Integrand {
                t: s,
                message: e.to_string(),
            })
        },
        a,
        t,
        1e-12,
    )?;
    let abel = (-integral).exp();
    let determinant = if a == t {
        1.0
    } else {
        let u = integrate_ivp(eq, a, 1.0, 0.0, t, tol)?;
        let w = integrate_ivp(eq, a, 0.0, 1.0, t, tol)?;
        let (u1, du1) = u.end_state();
        let (w1, dw1) = w.end_state();
        u1 * dw1 - du1 * w1 // W(a) = 1 for this basis
    };
    Ok(WronskianReport { abel, determinant })
}

/// The image `L u = u'' + p u' + q u` of a twice-differentiable test
/// function, with the derivatives taken symbolically.
#[derive(Debug, Clone)]
pub struct LImage {
    u: CoeffExpr,
    du: CoeffExpr,
    ddu: CoeffExpr,
    p: CoeffExpr,
    q: CoeffExpr,
    params: Params,
}

impl LImage {
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        let u = self.u.eval(t, &self.params)?;
        let du = self.du.eval(t, &self.params)?;
        let ddu = self.ddu.eval(t, &self.params)?;
        let p = self.p.eval(t, &self.params)?;
        let q = self.q.eval(t, &self.params)?;
        Ok(ddu + p * du + q * u)
    }

    pub fn u_value(&self, t: f64) -> Result<f64, EvalError> {
        self.u.eval(t, &self.params)
    }

    pub fn u_derivatives(&self, t: f64) -> Result<(f64, f64, f64), EvalError> {
        Ok((
            self.u.eval(t, &self.params)?,
            self.du.eval(t, &self.params)?,
            self.ddu.eval(t, &self.params)?,
        ))
    }
}

/// Build the residual function `t -> (Lu)(t)` for a symbolic test function.
pub fn apply_l(eq: &Equation, u: &CoeffExpr) -> Result<LImage, OdeError> {
    let du = u.differentiate()?;
    let ddu = du.differentiate()?;
    Ok(LImage {
        u: u.clone(),
        du,
        ddu,
        p: eq.p.clone(),
        q: eq.q.clone(),
        params: eq.params.clone(),
    })
}
