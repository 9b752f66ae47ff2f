//! Positive-factor decomposition of the operator on a disconjugacy
//! interval: `L x = h2 (d/dt) h1 (d/dt) h0 x` with `h0 = 1/y`,
//! `h1 = y^2/w`, `h2 = w/y`, all positive and `h0 h1 h2 = 1`. The follow-up
//! is a zero-counting form of the generalized Rolle theorem: `m` zeros of a
//! test function force at least `m - 2` zeros of its image under `L`.

use serde::Serialize;
use thiserror::Error;

use crate::conjugacy::{self, ConjugacyError};
use crate::equation::Equation;
use crate::expr::CoeffExpr;
use crate::interval::Interval;
use crate::ode::{self, scan_zeros_fn, OdeError, Tolerances, Trajectory};

#[derive(Debug, Clone, Error)]
pub enum FactorizationError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Conjugacy(#[from] ConjugacyError),
    #[error("factor `{which}` is not positive at t = {t} (value {value})")]
    FactorNotPositive {
        which: &'static str,
        t: f64,
        value: f64,
    },
    #[error("product identity violated at t = {t}: h0 h1 h2 = {value}")]
    ProductIdentity { t: f64, value: f64 },
}

/// The three positive factors backed by trajectories: `y` a positive
/// solution, `u` an independent companion, `w` their Wronskian via Abel's
/// identity anchored at the left endpoint.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub iv: Interval,
    y: Trajectory,
    u: Trajectory,
    /// Cumulative integral of p from `iv.lo`.
    p_cumulative: Trajectory,
    w_at_lo: f64,
    eq: Equation,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorizationChecks {
    pub product_worst: f64,
    pub min_h0: f64,
    pub min_h1: f64,
    pub min_h2: f64,
}

impl Factorization {
    pub fn y(&self) -> &Trajectory {
        &self.y
    }

    pub fn u(&self) -> &Trajectory {
        &self.u
    }

    /// `w(t) = w(lo) exp(-int_lo^t p)`.
    pub fn w(&self, t: f64) -> f64 {
        self.w_at_lo * (-(self.p_cumulative.x(t))).exp()
    }

    pub fn h0(&self, t: f64) -> f64 {
        1.0 / self.y.x(t)
    }

    pub fn h1(&self, t: f64) -> f64 {
        let y = self.y.x(t);
        y * y / self.w(t)
    }

    pub fn h2(&self, t: f64) -> f64 {
        self.w(t) / self.y.x(t)
    }

    /// Evaluate the factored operator on a symbolic test function using the
    /// defining identities of the factors (`y'' = -(p y' + q y)`,
    /// `w' = -p w`) rather than finite differences of trajectories.
    ///
    /// Writing `B = (u' y - u y') / y^2` for the inner derivative,
    /// `h1 B = (u' y - u y') / w`, and the outer derivative expands to
    /// `(h1 B)' = h1' B + h1 B'` with `h1' = (2 y y' + p y^2) / w` and
    /// `B' = (u'' y^2 + p u y' y + q u y^2 - 2 u' y' y + 2 u y'^2) / y^3`.
    pub fn apply_to(&self, u_test: &CoeffExpr, t: f64) -> Result<f64, FactorizationError> {
        let image = ode::apply_l(&self.eq, u_test)?;
        let (uv, du, ddu) = image
            .u_derivatives(t)
            .map_err(|e| OdeError::Forcing { t, source: e })?;
        let (y, dy) = self.y.state(t);
        let w = self.w(t);
        let p = self.eq.p_at(t).map_err(OdeError::from)?;
        let q = self.eq.q_at(t).map_err(OdeError::from)?;

        let b = (du * y - uv * dy) / (y * y);
        let h1 = y * y / w;
        let dh1 = (2.0 * y * dy + p * y * y) / w;
        let db = (ddu * y * y + p * uv * dy * y + q * uv * y * y - 2.0 * du * dy * y
            + 2.0 * uv * dy * dy)
            / (y * y * y);
        let inner = dh1 * b + h1 * db;
        Ok(self.h2(t) * inner)
    }

    /// Grid verification of `h_i > 0` and `h0 h1 h2 = 1`.
    pub fn verify(&self, n: usize) -> Result<FactorizationChecks, FactorizationError> {
        let (lo, hi) = (self.iv.lo, self.iv.hi);
        let mut product_worst = 0.0f64;
        let mut min_h0 = f64::INFINITY;
        let mut min_h1 = f64::INFINITY;
        let mut min_h2 = f64::INFINITY;
        for i in 0..=n {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            let (h0, h1, h2) = (self.h0(t), self.h1(t), self.h2(t));
            for (which, v) in [("h0", h0), ("h1", h1), ("h2", h2)] {
                if v <= 0.0 {
                    return Err(FactorizationError::FactorNotPositive { which, t, value: v });
                }
            }
            min_h0 = min_h0.min(h0);
            min_h1 = min_h1.min(h1);
            min_h2 = min_h2.min(h2);
            let product = h0 * h1 * h2;
            let dev = (product - 1.0).abs();
            if dev > 1e-8 {
                return Err(FactorizationError::ProductIdentity { t, value: product });
            }
            product_worst = product_worst.max(dev);
        }
        Ok(FactorizationChecks {
            product_worst,
            min_h0,
            min_h1,
            min_h2,
        })
    }

    /// CSV export `t,h0,h1,h2,product` over an `n`-point grid.
    pub fn export_csv<W: std::io::Write>(&self, n: usize, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# factorization lo={} hi={}", self.iv.lo, self.iv.hi)?;
        writeln!(w, "t,h0,h1,h2,product")?;
        for i in 0..=n {
            let t = self.iv.lo + self.iv.len() * i as f64 / n as f64;
            let (h0, h1, h2) = (self.h0(t), self.h1(t), self.h2(t));
            writeln!(w, "{},{},{},{},{}", t, h0, h1, h2, h0 * h1 * h2)?;
        }
        Ok(())
    }
}

/// Build the factorization on a disconjugacy interval: `y` from the
/// positive-solution construction; the companion `u` is shot with `(1, 0)`
/// from the left endpoint, falling back to `(0, 1)` when that pair is
/// numerically dependent there, and negated if the Wronskian comes out
/// negative.
pub fn build_factorization(
    eq: &Equation,
    iv: Interval,
    tol: Tolerances,
) -> Result<Factorization, FactorizationError> {
    let y = conjugacy::find_positive_solution(eq, iv, tol)?;
    let (lo, hi) = y.span();
    let (y_lo, dy_lo) = y.state(lo);
    let scale = y_lo.abs().max(dy_lo.abs()).max(1e-300);

    // w(lo) = y u' - y' u at lo
    let mut u_init = (1.0, 0.0);
    let mut w_at_lo = -dy_lo;
    if w_at_lo.abs() <= 1e-8 * scale {
        u_init = (0.0, 1.0);
        w_at_lo = y_lo;
    }
    if w_at_lo < 0.0 {
        u_init = (-u_init.0, -u_init.1);
        w_at_lo = -w_at_lo;
    }
    if w_at_lo <= 1e-8 * scale {
        return Err(FactorizationError::FactorNotPositive {
            which: "w",
            t: lo,
            value: w_at_lo,
        });
    }
    let u = ode::integrate_ivp(eq, lo, u_init.0, u_init.1, hi, tol)?;
    let p_cumulative = {
        let rhs =
            |t: f64, _y: &[f64; 2]| -> Result<[f64; 2], OdeError> { Ok([eq.p_at(t)?, 0.0]) };
        let sol = ode::rk45::integrate(rhs, lo, [0.0, 0.0], hi, tol, ode::DEFAULT_MAX_STEPS)?;
        Trajectory::from_solution(sol)
    };
    let fact = Factorization {
        iv: Interval::closed(lo, hi),
        y,
        u,
        p_cumulative,
        w_at_lo,
        eq: eq.clone(),
    };
    fact.verify(512)?;
    Ok(fact)
}

/// Maximum relative deviation between the factored form and the direct
/// `L u` over a grid, for a symbolic test function.
pub fn verify_factorization(
    eq: &Equation,
    fact: &Factorization,
    u_test: &CoeffExpr,
    n: usize,
) -> Result<f64, FactorizationError> {
    let image = ode::apply_l(eq, u_test)?;
    let (lo, hi) = (fact.iv.lo, fact.iv.hi);
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for i in 0..=n {
        let t = lo + (hi - lo) * i as f64 / n as f64;
        let direct = image
            .eval(t)
            .map_err(|e| OdeError::Forcing { t, source: e })?;
        let factored = fact.apply_to(u_test, t)?;
        scale = scale.max(direct.abs());
        worst = worst.max((factored - direct).abs());
    }
    Ok(worst / scale)
}

/// Zero counts for the generalized Rolle inequality.
#[derive(Debug, Clone, Serialize)]
pub struct RolleReport {
    /// Geometrically distinct zeros of the test function in the interval.
    pub m: usize,
    /// Geometrically distinct zeros of `L u` there.
    pub k: usize,
    /// Whether `k >= m - 2`.
    pub holds: bool,
    pub zeros_u: Vec<f64>,
    pub zeros_lu: Vec<f64>,
}

/// Count zeros of a twice-differentiable test function and of its image
/// under `L` on a disconjugacy interval.
pub fn generalized_rolle_check(
    eq: &Equation,
    iv: Interval,
    u_test: &CoeffExpr,
    tol: Tolerances,
) -> Result<RolleReport, FactorizationError> {
    let verdict = conjugacy::is_disconjugate(eq, iv, tol)?;
    if !verdict.is_disconjugate() {
        return Err(ConjugacyError::NotDisconjugate { iv: iv.to_string() }.into());
    }
    let image = ode::apply_l(eq, u_test)?;
    let params = eq.params.clone();
    let cluster = 1e-7;
    let n_samples = 4096;
    let zeros_u = scan_zeros_fn(
        |t| u_test.eval(t, &params).unwrap_or(f64::NAN),
        iv.lo,
        iv.hi,
        n_samples,
        cluster,
    );
    let zeros_lu = scan_zeros_fn(
        |t| image.eval(t).unwrap_or(f64::NAN),
        iv.lo,
        iv.hi,
        n_samples,
        cluster,
    );
    let m = zeros_u.len();
    let k = zeros_lu.len();
    Ok(RolleReport {
        m,
        k,
        holds: k + 2 >= m,
        zeros_u,
        zeros_lu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn double_integrator_unit_factors() {
        // x'' = 0 on [0,1]: y = t + (1-t) = 1, companion falls back to
        // u = t, w = 1, so all three factors are identically 1
        let eq = Equation::parse("0", "0").unwrap();
        let fact = build_factorization(&eq, Interval::closed(0.0, 1.0), tol()).unwrap();
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert!((fact.h0(t) - 1.0).abs() < 1e-9);
            assert!((fact.h1(t) - 1.0).abs() < 1e-9);
            assert!((fact.h2(t) - 1.0).abs() < 1e-9);
        }
        // the factored operator is then the plain second derivative
        let u = CoeffExpr::parse("t^2").unwrap();
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            assert!((fact.apply_to(&u, t).unwrap() - 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn harmonic_factorization() {
        // x'' + x = 0 on [0, pi/2]: y = sin + cos; w stays constant (p = 0)
        let eq = Equation::parse("0", "1").unwrap();
        let fact = build_factorization(&eq, Interval::closed(0.0, PI / 2.0), tol()).unwrap();
        let checks = fact.verify(512).unwrap();
        assert!(checks.product_worst < 1e-8);
        assert!(checks.min_h0 > 0.0 && checks.min_h1 > 0.0 && checks.min_h2 > 0.0);
        assert!((fact.w(0.3) - fact.w(1.2)).abs() < 1e-9);
    }

    #[test]
    fn factored_form_matches_direct_operator() {
        let eq = Equation::parse("0", "1").unwrap();
        let fact = build_factorization(&eq, Interval::closed(0.0, PI / 2.0), tol()).unwrap();
        // L(e^t) = 2 e^t
        let u = CoeffExpr::parse("exp(t)").unwrap();
        for k in 0..=8 {
            let t = PI / 2.0 * k as f64 / 8.0;
            let got = fact.apply_to(&u, t).unwrap();
            let want = 2.0 * t.exp();
            assert!((got - want).abs() < 1e-6 * want, "t = {t}: {got} vs {want}");
        }
        let worst = verify_factorization(&eq, &fact, &u, 64).unwrap();
        assert!(worst < 1e-6, "relative residual {worst}");
    }

    #[test]
    fn solution_maps_to_zero() {
        let eq = Equation::parse("0", "1").unwrap();
        let fact = build_factorization(&eq, Interval::closed(0.0, PI / 2.0), tol()).unwrap();
        let u = CoeffExpr::parse("sin(t)").unwrap();
        for k in 0..=8 {
            let t = PI / 2.0 * k as f64 / 8.0;
            assert!(fact.apply_to(&u, t).unwrap().abs() < 1e-7);
        }
    }

    #[test]
    fn variable_q_factorization() {
        // q = sin t/(2 + sin t) with p = 0 on [0, 2 pi]
        let eq = Equation::parse("0", "sin(t)/(2+sin(t))").unwrap();
        let fact = build_factorization(&eq, Interval::closed(0.0, 2.0 * PI), tol()).unwrap();
        let checks = fact.verify(512).unwrap();
        assert!(checks.product_worst < 1e-8);
        let u = CoeffExpr::parse("t^2-3*t").unwrap();
        let worst = verify_factorization(&eq, &fact, &u, 64).unwrap();
        assert!(worst < 1e-6, "relative residual {worst}");
    }

    #[test]
    fn nonzero_p_wronskian_decays() {
        let eq = Equation::parse("1", "-0.5").unwrap();
        let fact = build_factorization(&eq, Interval::closed(0.0, 2.0), tol()).unwrap();
        let ratio = fact.w(2.0) / fact.w(0.0);
        assert!((ratio - (-2.0f64).exp()).abs() < 1e-9);
        fact.verify(256).unwrap();
    }

    #[test]
    fn rolle_on_harmonic_with_formula_zeros() {
        // u = sin 2t on [0, 3] has zeros {0, pi/2} (pi lies outside);
        // L u = -3 sin 2t has the same zeros
        let eq = Equation::parse("0", "1").unwrap();
        let report = generalized_rolle_check(
            &eq,
            Interval::closed(0.0, 3.0),
            &CoeffExpr::parse("sin(2*t)").unwrap(),
            tol(),
        )
        .unwrap();
        assert_eq!(report.m, 2, "{report:?}");
        assert_eq!(report.k, 2);
        assert!((report.zeros_u[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!(report.holds);
    }

    #[test]
    fn rolle_no_zeros_is_trivial() {
        let eq = Equation::parse("0", "1").unwrap();
        let report = generalized_rolle_check(
            &eq,
            Interval::closed(0.0, 3.0),
            &CoeffExpr::parse("2+sin(t)").unwrap(),
            tol(),
        )
        .unwrap();
        assert_eq!(report.m, 0);
        assert!(report.holds);
    }

    #[test]
    fn rolle_tight_case_cubic() {
        // x'' = 0 (disconjugate everywhere), u = (t-1)(t-2)(t-3): m = 3,
        // L u = u'' = 6t - 12 has exactly one zero: k = 1 = m - 2
        let eq = Equation::parse("0", "0").unwrap();
        let report = generalized_rolle_check(
            &eq,
            Interval::closed(0.0, 4.0),
            &CoeffExpr::parse("(t-1)*(t-2)*(t-3)").unwrap(),
            tol(),
        )
        .unwrap();
        assert_eq!(report.m, 3);
        assert_eq!(report.k, 1);
        assert!(report.holds);
    }

    #[test]
    fn rolle_rejects_non_disconjugate_interval() {
        let eq = Equation::parse("0", "1").unwrap();
        let err = generalized_rolle_check(
            &eq,
            Interval::closed(0.0, 5.0),
            &CoeffExpr::parse("t").unwrap(),
            tol(),
        );
        assert!(err.is_err());
    }
}
