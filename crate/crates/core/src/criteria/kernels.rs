//! Kernel-weighted criteria built from an auxiliary disconjugate equation:
//! the general constant-coefficient form, its first-order special case, and
//! the variable-p form with a one-pass cumulative construction.

use serde_json::json;

use super::{certificate, grid_max, slack, Checked, CriteriaError};
use crate::equation::Equation;
use crate::interval::Interval;
use crate::ode::{self, OdeError, Tolerances};
use crate::quad::{self, QuadError};

/// Cauchy kernel of `x'' + P x' + Q x = 0` and its derivative, as functions
/// of the elapsed time.
#[derive(Debug, Clone, Copy)]
struct ConstKernel {
    lambda1: f64,
    lambda2: f64,
    distinct: bool,
}

impl ConstKernel {
    fn new(p_aux: f64, q_aux: f64) -> Option<Self> {
        let disc = p_aux * p_aux - 4.0 * q_aux;
        if disc < 0.0 {
            return None;
        }
        let root = disc.sqrt();
        Some(ConstKernel {
            lambda1: (-p_aux + root) / 2.0,
            lambda2: (-p_aux - root) / 2.0,
            distinct: root > 1e-12 * (1.0 + p_aux.abs()),
        })
    }

    fn c(&self, tau: f64) -> f64 {
        if self.distinct {
            ((self.lambda1 * tau).exp() - (self.lambda2 * tau).exp()) / (self.lambda1 - self.lambda2)
        } else {
            // double root (covers the pure double-integrator, lambda = 0)
            tau * (self.lambda1 * tau).exp()
        }
    }

    fn c_dt(&self, tau: f64) -> f64 {
        if self.distinct {
            (self.lambda1 * (self.lambda1 * tau).exp() - self.lambda2 * (self.lambda2 * tau).exp())
                / (self.lambda1 - self.lambda2)
        } else {
            (self.lambda1 * tau).exp() * (1.0 + self.lambda1 * tau)
        }
    }
}

/// General auxiliary-equation criterion: with `x'' + P x' + Q x = 0`
/// disconjugate on `[a, b)`, test
/// `(p - P) int dM/dt + (q - Q) int M <= 1` on the interior.
pub fn check_xa1(
    eq: &Equation,
    a: f64,
    b: f64,
    p_aux: f64,
    q_aux: f64,
) -> Result<Checked, CriteriaError> {
    let name = "XA1";
    let kernel = match ConstKernel::new(p_aux, q_aux) {
        Some(k) => k,
        None => {
            return Ok(Checked::inconclusive(
                name,
                certificate(&[(
                    "reason",
                    json!("auxiliary equation has complex roots (not disconjugate)"),
                )]),
            ))
        }
    };
    let c_ba = kernel.c(b - a);
    if c_ba.abs() < 1e-14 {
        return Ok(Checked::inconclusive(
            name,
            certificate(&[("reason", json!("degenerate auxiliary kernel"))]),
        ));
    }
    let kernel_scale = (1.0 + kernel.c(b - a).abs()).max(1.0 + kernel.c_dt(b - a).abs());
    let qtol = 1e-11 * kernel_scale;
    let n_t = 257;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_t = a;
    let mut scale = 0.0f64;
    for i in 1..n_t {
        let t = a + (b - a) * i as f64 / n_t as f64;
        // int_a^b M(t, s) ds split at the diagonal
        let m_left = quad::integrate(|s| Ok(kernel.c(s - a)), a, t, qtol)? * kernel.c(b - t) / c_ba;
        let m_right = quad::integrate(|s| Ok(kernel.c(b - s)), t, b, qtol)? * kernel.c(t - a) / c_ba;
        let dm_left =
            quad::integrate(|s| Ok(kernel.c(s - a)), a, t, qtol)? * (-kernel.c_dt(b - t)) / c_ba;
        let dm_right =
            quad::integrate(|s| Ok(kernel.c(b - s)), t, b, qtol)? * kernel.c_dt(t - a) / c_ba;
        let p = eq.p_at(t)?;
        let q = eq.q_at(t)?;
        let lhs = (p - p_aux) * (dm_left + dm_right) + (q - q_aux) * (m_left + m_right);
        scale = scale.max(lhs.abs());
        if lhs > worst {
            worst = lhs;
            worst_t = t;
        }
    }
    let cert = certificate(&[
        ("P", json!(p_aux)),
        ("Q", json!(q_aux)),
        ("max_lhs", json!(worst)),
        ("at", json!(worst_t)),
        ("t_grid", json!(n_t)),
    ]);
    if worst <= 1.0 + slack(scale.max(1.0)) {
        Ok(Checked::fired(name, cert, Interval::half_open_right(a, b)))
    } else {
        Ok(Checked::inconclusive(name, cert))
    }
}

/// Bound factors of the first-order special case (`Q = 0`); they depend only
/// on `P` and the interval.
pub fn xa2_factors(p_aux: f64, a: f64, b: f64) -> (f64, f64) {
    let len = b - a;
    let f1 = (p_aux * len + (-p_aux * len).exp() - 1.0).abs() / (p_aux * (1.0 - (-p_aux * len).exp()));
    let half = 0.5 * len;
    let f2 = 2.0 * (half - (1.0 - (-p_aux * half).exp()) / p_aux) / (p_aux * (1.0 + (-p_aux * half).exp()));
    (f1, f2)
}

/// First-order auxiliary criterion: `|p - P| F1 + |q| F2 <= 1` with the two
/// displayed bound factors.
pub fn check_xa2(eq: &Equation, a: f64, b: f64, p_aux: f64) -> Result<Checked, CriteriaError> {
    let name = "XA2";
    if p_aux == 0.0 {
        return Ok(Checked::inconclusive(
            name,
            certificate(&[("reason", json!("P must be nonzero (use the parabola test)"))]),
        ));
    }
    let (f1, f2) = xa2_factors(p_aux, a, b);
    let check = grid_max(
        |t| {
            let p = eq.p_at(t)?;
            let q = eq.q_at(t)?;
            Ok((p - p_aux).abs() * f1 + q.abs() * f2 - 1.0)
        },
        a,
        b,
        super::GRID_N,
    )?;
    let cert = certificate(&[
        ("P", json!(p_aux)),
        ("factor_p", json!(f1)),
        ("factor_q", json!(f2)),
        ("max_excess", json!(check.max)),
        ("at", json!(check.argmax)),
    ]);
    if check.max <= slack(check.scale.max(1.0)) {
        Ok(Checked::fired(name, cert, Interval::half_open_right(a, b)))
    } else {
        Ok(Checked::inconclusive(name, cert))
    }
}

/// Variable-p kernel criterion: `q(t) int_a^b M(t,s) ds <= 1` where
/// `int M ds` is the positive solution of the auxiliary Dirichlet problem
/// `v'' + p v' = -1, v(a) = v(b) = 0`. One dense integration pass builds the
/// weight `w = exp(-int p)` together with its running integrals.
///
/// The product form of the kernel with the weight taken at `t` instead of
/// `s` fails to solve the auxiliary problem whenever `p` is not identically
/// zero (same weight issue as the Green product identity) and can fire on
/// oscillatory equations, so the construction here uses the `w(s)` weight;
/// the certificate reports how far the two kernels drift apart.
pub fn check_xa3(eq: &Equation, a: f64, b: f64, tol: Tolerances) -> Result<Checked, CriteriaError> {
    let name = "XA3";
    // components: w' = -p w, E' = w, K' = 1/w, J' = E/w
    let rhs = |t: f64, y: &[f64; 4]| -> Result<[f64; 4], OdeError> {
        let p = eq.p_at(t)?;
        let w = y[0];
        if w <= 0.0 {
            return Err(OdeError::Quadrature(QuadError::Integrand {
                t,
                message: "weight collapsed to zero".into(),
            }));
        }
        Ok([-p * w, w, 1.0 / w, y[1] / w])
    };
    let sol = ode::rk45::integrate(
        rhs,
        a,
        [1.0, 0.0, 0.0, 0.0],
        b,
        Tolerances::new(tol.rel.max(1e-12), tol.abs.max(1e-14)),
        ode::DEFAULT_MAX_STEPS,
    )?;
    let end = sol.y_end;
    let (e_b, k_b, j_b) = (end[1], end[2], end[3]);
    if e_b <= 0.0 {
        return Ok(Checked::inconclusive(
            name,
            certificate(&[("reason", json!("degenerate weight integral"))]),
        ));
    }
    // v(t) = (E(b)-E(t)) J(t)/E(b) + E(t) (E(b)(K(b)-K(t)) - (J(b)-J(t)))/E(b)
    let int_m = |t: f64| -> Result<f64, CriteriaError> {
        let y = sol.eval(t);
        let (e, k, j) = (y[1], y[2], y[3]);
        Ok(((e_b - e) * j + e * (e_b * (k_b - k) - (j_b - j))) / e_b)
    };
    let check = grid_max(|t| Ok(eq.q_at(t)? * int_m(t)? - 1.0), a, b, super::GRID_N)?;
    // drift of the w(t)-weighted product kernel from the true solution
    let mut product_form_drift = 0.0f64;
    let drift_tol = 1e-9 * (1.0 + e_b.abs() * (b - a));
    for i in 1..32 {
        let t = a + (b - a) * i as f64 / 32.0;
        let y = sol.eval(t);
        let (w, e, j) = (y[0], y[1], y[3]);
        let left_product =
            (e_b - e) / (w * e_b) * quad::integrate(|s| Ok(sol.eval(s)[1]), a, t, drift_tol)?;
        let left_true = (e_b - e) * j / e_b;
        product_form_drift = product_form_drift.max((left_product - left_true).abs());
    }
    let cert = certificate(&[
        ("max_excess", json!(check.max)),
        ("at", json!(check.argmax)),
        ("note", json!("q taken literally, not its positive part")),
        ("product_form_drift", json!(product_form_drift)),
    ]);
    if check.max <= slack(check.scale.max(1.0)) {
        Ok(Checked::fired(name, cert, Interval::half_open_right(a, b)))
    } else {
        Ok(Checked::inconclusive(name, cert))
    }
}
