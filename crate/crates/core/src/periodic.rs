//! Period maps for equations with periodic coefficients and the decision
//! whether nontrivial `T`-periodic solutions exist. A nontrivial periodic
//! solution exists exactly when 1 is an eigenvalue of the monodromy matrix;
//! for sign-definite periodic `q` on a disconjugate equation the answer is
//! always negative, and the period map confirms it.

use serde::Serialize;
use thiserror::Error;

use crate::conjugacy::{self, ConjugacyError};
use crate::criteria::{self, CriteriaError};
use crate::equation::Equation;
use crate::expr::{CoeffExpr, Params};
use crate::interval::Interval;
use crate::ode::{self, OdeError, Tolerances};
use crate::quad::{self, QuadError};

#[derive(Debug, Clone, Error)]
pub enum PeriodicError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Conjugacy(#[from] ConjugacyError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("determinant {got} disagrees with the Liouville value {expected}")]
    LiouvilleCheck { got: f64, expected: f64 },
    #[error("criteria failure: {0}")]
    Criteria(String),
}

impl From<CriteriaError> for PeriodicError {
    fn from(e: CriteriaError) -> Self {
        PeriodicError::Criteria(e.to_string())
    }
}

/// Real-or-conjugate-pair eigenvalues of a 2x2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

impl ComplexPair {
    pub fn distance_to_one(&self) -> f64 {
        ((self.re - 1.0) * (self.re - 1.0) + self.im * self.im).sqrt()
    }

    pub fn abs(&self) -> f64 {
        (self.re * self.re + self.im * self.im).sqrt()
    }
}

/// The period map over `[a, a + T]`, its spectrum, and the Liouville
/// determinant check.
#[derive(Debug, Clone, Serialize)]
pub struct MonodromyReport {
    pub base_point: f64,
    pub period: f64,
    /// Row-major fundamental matrix: columns are the time-T states of the
    /// solutions with initial data (1, 0) and (0, 1).
    pub matrix: [[f64; 2]; 2],
    pub eigenvalues: [ComplexPair; 2],
    pub det_expected: f64,
    pub det: f64,
    pub unit_eigen_distance: f64,
}

impl MonodromyReport {
    pub fn trace(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    /// Residual of the characteristic polynomial at each reported
    /// eigenvalue.
    pub fn eigen_residual(&self) -> f64 {
        let tr = self.trace();
        let det = self.det;
        self.eigenvalues
            .iter()
            .map(|l| {
                // |l^2 - tr l + det| over the complexes
                let re = l.re * l.re - l.im * l.im - tr * l.re + det;
                let im = 2.0 * l.re * l.im - tr * l.im;
                (re * re + im * im).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [ComplexPair; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        [
            ComplexPair {
                re: tr / 2.0 + root,
                im: 0.0,
            },
            ComplexPair {
                re: tr / 2.0 - root,
                im: 0.0,
            },
        ]
    } else {
        let root = (-disc).sqrt();
        [
            ComplexPair {
                re: tr / 2.0,
                im: root,
            },
            ComplexPair {
                re: tr / 2.0,
                im: -root,
            },
        ]
    }
}

/// Fixed step count for the compensated endpoint integrator: enough to push
/// the period-map truncation error near the round-off floor on periods of a
/// few tens.
fn monodromy_steps(span: f64) -> usize {
    ((span.abs() / 6e-5).ceil() as usize).clamp(50_000, 2_000_000)
}

/// Compute the period map over `[a, a + T]`. The two basis solutions are
/// integrated by fixed-step compensated RK4, which resolves eigenvalues of
/// defective period maps (a periodic solution with a secular companion) far
/// better than the step-size floor of the adaptive pair allows.
pub fn monodromy(eq: &Equation, a: f64, period: f64, _tol: Tolerances) -> Result<MonodromyReport, PeriodicError> {
    assert!(period > 0.0, "period must be positive");
    let rhs = |t: f64, y: &[f64; 2]| -> Result<[f64; 2], OdeError> {
        let p = eq.p_at(t)?;
        let q = eq.q_at(t)?;
        Ok([y[1], -(p * y[1] + q * y[0])])
    };
    let steps = monodromy_steps(period);
    let col1 = ode::endpoint_fixed_rk4(rhs, a, [1.0, 0.0], a + period, steps)?;
    let col2 = ode::endpoint_fixed_rk4(rhs, a, [0.0, 1.0], a + period, steps)?;
    let matrix = [[col1[0], col2[0]], [col1[1], col2[1]]];
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    let det_expected = {
        let integral = quad::integrate(
            |s| {
                eq.p_at(s).map_err(|e| QuadError::Integrand {
                    t: s,
                    message: e.to_string(),
                })
            },
            a,
            a + period,
            1e-13,
        )?;
        (-integral).exp()
    };
    if (det - det_expected).abs() > 1e-7 * (1.0 + det_expected.abs()) {
        return Err(PeriodicError::LiouvilleCheck {
            got: det,
            expected: det_expected,
        });
    }
    let eigenvalues = eigenvalues_2x2(&matrix);
    let unit_eigen_distance = eigenvalues
        .iter()
        .map(|l| l.distance_to_one())
        .fold(f64::INFINITY, f64::min);
    Ok(MonodromyReport {
        base_point: a,
        period,
        matrix,
        eigenvalues,
        det_expected,
        det,
        unit_eigen_distance,
    })
}

/// Whether `e(t + T) = e(t)` holds over a sampling grid of `[0, T]` shifted
/// across three periods.
pub fn check_periodicity(e: &CoeffExpr, params: &Params, period: f64, n: usize) -> bool {
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    for i in 0..=n {
        let t = period * i as f64 / n as f64 - period;
        let (Ok(v0), Ok(v1)) = (e.eval(t, params), e.eval(t + period, params)) else {
            return false;
        };
        scale = scale.max(v0.abs()).max(v1.abs());
        worst = worst.max((v1 - v0).abs());
    }
    worst <= 1e-9 * (1.0 + scale)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum PeriodicKind {
    NoNontrivialPeriodic,
    HasPeriodic { witness: [f64; 2] },
    Borderline,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub q_sign_ok: bool,
    pub periodicity_ok: bool,
    pub disconjugacy_ok: bool,
    /// True when disconjugacy was certified by a criterion covering the
    /// real line, false when only the truncation-window oracle vouches.
    pub disconjugacy_global: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicVerdict {
    #[serde(flatten)]
    pub kind: PeriodicKind,
    pub hypothesis_report: HypothesisReport,
    pub monodromy: MonodromyReport,
    /// Same classification computed at a second base point.
    pub spot_check_distance: f64,
}

/// Classification bands on `min |lambda - 1|`. A defective period map (unit
/// eigenvalue with a secular companion) splits its eigenvalue pair by the
/// square root of the matrix error; with the compensated integrator the
/// characteristic value at 1 lands at round-off (~1e-15), which still floors
/// the measured distance near 5e-8. The lower band sits above that floor
/// and every HasPeriodic verdict is confirmed by a witness round trip.
const HAS_PERIODIC_BAND: f64 = 2e-7;
const BORDERLINE_BAND: f64 = 1e-6;

/// Evaluate the sign/periodicity/disconjugacy hypotheses and decide
/// existence of nontrivial `T`-periodic solutions through the period map.
pub fn check_theorem_periodic(
    eq: &Equation,
    period: f64,
    window: Interval,
    tol: Tolerances,
) -> Result<PeriodicVerdict, PeriodicError> {
    assert!(window.is_finite());
    // hypothesis 1: q sign-definite and not identically zero
    let n = 512;
    let mut q_min = f64::INFINITY;
    let mut q_max = f64::NEG_INFINITY;
    for i in 0..=n {
        let t = window.lo + window.len() * i as f64 / n as f64;
        let q = eq.q_at(t).map_err(OdeError::from)?;
        q_min = q_min.min(q);
        q_max = q_max.max(q);
    }
    let tiny = 1e-12 * (1.0 + q_max.abs().max(q_min.abs()));
    let not_identically_zero = q_max.abs().max(q_min.abs()) > tiny;
    let q_sign_ok = not_identically_zero && (q_min >= -tiny || q_max <= tiny);

    // hypothesis 2: both coefficients T-periodic
    let periodicity_ok = check_periodicity(&eq.p, &eq.params, period, 256)
        && check_periodicity(&eq.q, &eq.params, period, 256);

    // hypothesis 3: disconjugacy on the line, preferably by a criterion
    let curve = criteria::check_curve(
        eq,
        &criteria::CurveOptions {
            window,
            r: None,
        },
    )?;
    let (disconjugacy_ok, disconjugacy_global) = if curve.verdict.is_disconjugate() {
        (true, true)
    } else {
        let oracle = conjugacy::is_disconjugate(eq, window, tol)?;
        (oracle.is_disconjugate(), false)
    };

    let monodromy_report = monodromy(eq, 0.0, period, tol)?;
    let spot = monodromy(eq, period / 3.0, period, tol)?;

    let hypothesis_report = HypothesisReport {
        q_sign_ok,
        periodicity_ok,
        disconjugacy_ok,
        disconjugacy_global,
    };

    let kind = if q_sign_ok && periodicity_ok && disconjugacy_ok {
        // the theorem asserts no nontrivial periodic solution; the period
        // map must stay away from 1
        if monodromy_report.unit_eigen_distance <= BORDERLINE_BAND {
            return Err(PeriodicError::Criteria(format!(
                "hypotheses hold but the period map has an eigenvalue {} from 1",
                monodromy_report.unit_eigen_distance
            )));
        }
        PeriodicKind::NoNontrivialPeriodic
    } else if monodromy_report.unit_eigen_distance < HAS_PERIODIC_BAND {
        // eigenvector of the (near-)unit eigenvalue as witness initial data
        let m = &monodromy_report.matrix;
        let v1 = (m[0][1], 1.0 - m[0][0]);
        let v2 = (1.0 - m[1][1], m[1][0]);
        let witness = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) {
            v1
        } else {
            v2
        };
        let norm = witness.0.hypot(witness.1).max(1e-300);
        let witness = [witness.0 / norm, witness.1 / norm];
        // the verdict stands only if the witness actually returns
        if witness_roundtrip(eq, 0.0, period, witness, tol)? <= 1e-6 {
            PeriodicKind::HasPeriodic { witness }
        } else {
            PeriodicKind::Borderline
        }
    } else if monodromy_report.unit_eigen_distance <= BORDERLINE_BAND {
        PeriodicKind::Borderline
    } else {
        PeriodicKind::NoNontrivialPeriodic
    };

    Ok(PeriodicVerdict {
        kind,
        hypothesis_report,
        spot_check_distance: spot.unit_eigen_distance,
        monodromy: monodromy_report,
    })
}

/// Integrate witness initial data over one period and report the relative
/// return distance.
pub fn witness_roundtrip(
    eq: &Equation,
    a: f64,
    period: f64,
    witness: [f64; 2],
    _tol: Tolerances,
) -> Result<f64, PeriodicError> {
    let rhs = |t: f64, y: &[f64; 2]| -> Result<[f64; 2], OdeError> {
        let p = eq.p_at(t)?;
        let q = eq.q_at(t)?;
        Ok([y[1], -(p * y[1] + q * y[0])])
    };
    let out = ode::endpoint_fixed_rk4(rhs, a, witness, a + period, monodromy_steps(period))?;
    let norm = witness[0].hypot(witness[1]).max(1e-300);
    Ok(((out[0] - witness[0]).hypot(out[1] - witness[1])) / norm)
}
