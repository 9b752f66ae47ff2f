//! A catalog of worked equations with machine-checkable expectations:
//! closed-form conjugate-point maps, known solutions, expected oracle
//! verdicts, firing criteria, and periodic behavior. The catalog doubles as
//! an executable regression suite (`run_entry` / `run_all`).

use serde::Serialize;

use thiserror::Error;

use crate::conjugacy::{self, ConjugacyError};
use crate::criteria::{self, CriteriaError, CurveOptions};
use crate::equation::Equation;
use crate::expr::{CoeffExpr, Params};
use crate::interval::Interval;
use crate::ode::{self, Tolerances};
use crate::periodic::{self, PeriodicError};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error(transparent)]
    Conjugacy(#[from] ConjugacyError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Periodic(#[from] PeriodicError),
    #[error(transparent)]
    Quadrature(#[from] crate::quad::QuadError),
}

/// A machine-checkable expectation about a catalog equation.
#[derive(Debug, Clone, Serialize)]
pub enum KnownFact {
    /// `rho_+` matches a closed-form expression of the base point on a
    /// range of base points, and is a `+inf` sentinel beyond a threshold.
    RhoPlusClosedForm {
        /// Expression in `t` (the base point) for the conjugate point.
        formula: String,
        base_points: Vec<f64>,
        rel_tol: f64,
        window: f64,
        /// Base points at and beyond which the sentinel is expected.
        sentinel_from: Option<f64>,
        source: String,
    },
    /// A twice-differentiable expression solves the equation identically.
    KnownSolution { expr: String, source: String },
    /// Oracle verdict on a finite interval.
    ExpectedVerdict {
        interval: (f64, f64),
        disconjugate: bool,
        source: String,
    },
    /// The curve criterion fires with this condition tag.
    CurveConditionFires { condition: u8, source: String },
    /// A positive test function certifies disconjugacy on the interval.
    TestFunctionCertifies {
        v: String,
        interval: (f64, f64),
        source: String,
    },
    /// The equation has a nontrivial periodic solution with this period.
    PeriodicSolutionExists { period: f64, source: String },
    /// All periodic-theorem hypotheses hold and no periodic solution
    /// exists; the period-map spectrum keeps this distance from 1.
    NoPeriodicSolution {
        period: f64,
        min_unit_distance: f64,
        source: String,
    },
    /// Integral of q over [0, 1] lands within `rel_tol` of `target`.
    IntegralOfQ {
        target: f64,
        rel_tol: f64,
        source: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub id: String,
    pub description: String,
    pub equation: Equation,
    pub known_facts: Vec<KnownFact>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactOutcome {
    pub entry: String,
    pub fact: String,
    pub pass: bool,
    pub detail: String,
}

fn fact_name(fact: &KnownFact) -> &'static str {
    match fact {
        KnownFact::RhoPlusClosedForm { .. } => "rho-plus-closed-form",
        KnownFact::KnownSolution { .. } => "known-solution",
        KnownFact::ExpectedVerdict { .. } => "expected-verdict",
        KnownFact::CurveConditionFires { .. } => "curve-condition-fires",
        KnownFact::TestFunctionCertifies { .. } => "test-function-certifies",
        KnownFact::PeriodicSolutionExists { .. } => "periodic-solution-exists",
        KnownFact::NoPeriodicSolution { .. } => "no-periodic-solution",
        KnownFact::IntegralOfQ { .. } => "integral-of-q",
    }
}

/// Build the default catalog. Parameterized entries take their parameter
/// values from `params` when present (`A`, `b`, `phat`, `delta`, `R`, `c`,
/// `choice`).
pub fn catalog_list(params: &Params) -> Vec<CatalogEntry> {
    let get = |name: &str, default: f64| params.get(name).copied().unwrap_or(default);
    let mut entries = Vec::new();

    {
        let a_param = get("A", 2.0);
        entries.push(CatalogEntry {
            id: "eq3a".into(),
            description: "hyperbolic-coefficient equation with explicit conjugate-point map"
                .into(),
            equation: Equation::parse("-(A*sinh(t))/(A*cosh(t)-1)", "1/(A*cosh(t)-1)")
                .unwrap()
                .with_param("A", a_param),
            known_facts: vec![KnownFact::RhoPlusClosedForm {
                formula: "ln((A-exp(t))/(1-A*exp(t)))".into(),
                base_points: vec![-3.0, -2.5, -2.0, -1.6, -1.3, -1.1, -0.95, -0.85, -0.78, -0.75],
                rel_tol: 1e-6,
                window: 50.0,
                sentinel_from: Some(-(a_param.ln()) + 0.05),
                source: "explicit solution with value 0 and unit slope at the base point".into(),
            }],
        });
    }

    {
        let b = get("b", 1.0);
        entries.push(CatalogEntry {
            id: "eq3b".into(),
            description: "rational-coefficient equation with conjugate-point map b(t-b)/(2t-b)"
                .into(),
            equation: Equation::parse("-(2*(2*t-b))/(t^2+(t-b)^2)", "4/(t^2+(t-b)^2)")
                .unwrap()
                .with_param("b", b),
            known_facts: vec![
                KnownFact::RhoPlusClosedForm {
                    formula: "b*(t-b)/(2*t-b)".into(),
                    base_points: (0..20).map(|k| -2.0 + 0.1289 * k as f64).collect(),
                    rel_tol: 1e-6,
                    window: 200.0,
                    sentinel_from: Some(b / 2.0),
                    source: "the solutions are spanned by t(t-b) and 2t-b".into(),
                },
                KnownFact::KnownSolution {
                    expr: "t*(t-b)".into(),
                    source: "direct substitution".into(),
                },
            ],
        });
    }

    entries.push(CatalogEntry {
        id: "harmonic".into(),
        description: "x'' + x = 0; conjugate points exactly pi apart".into(),
        equation: Equation::parse("0", "1").unwrap(),
        known_facts: vec![
            KnownFact::RhoPlusClosedForm {
                formula: "t+pi".into(),
                base_points: vec![0.0, 0.5, 1.0, 2.0],
                rel_tol: 1e-8,
                window: 10.0,
                sentinel_from: None,
                source: "solutions are shifted sines".into(),
            },
            KnownFact::ExpectedVerdict {
                interval: (0.0, std::f64::consts::PI - 1e-3),
                disconjugate: true,
                source: "first conjugate point of 0 is pi".into(),
            },
            KnownFact::ExpectedVerdict {
                interval: (0.0, std::f64::consts::PI + 1e-3),
                disconjugate: false,
                source: "sin has zeros 0 and pi".into(),
            },
        ],
    });

    {
        let p_hat = get("phat", 3.0);
        entries.push(CatalogEntry {
            id: "euler".into(),
            description: "Euler-type equation at the comparison boundary".into(),
            equation: Equation::parse("phat/t", "(phat-1)^2/(4*t^2)")
                .unwrap()
                .with_param("phat", p_hat)
                .with_domain(Interval::open(0.0, f64::INFINITY)),
            known_facts: vec![
                KnownFact::KnownSolution {
                    expr: "t^((1-phat)/2)".into(),
                    source: "power solution of the boundary equation".into(),
                },
                KnownFact::ExpectedVerdict {
                    interval: (0.5, 40.0),
                    disconjugate: true,
                    source: "the power solution never vanishes on (0, inf)".into(),
                },
            ],
        });
    }

    {
        let delta = get("delta", 0.05);
        let family = criteria::lyapunov_sharpness_family(delta)
            .expect("sharpness family construction is infallible for delta in (0, 1/2)");
        entries.push(CatalogEntry {
            id: "lyapunov_sharpness".into(),
            description: "two-zero bump family showing the integral bound constant is sharp"
                .into(),
            equation: family.equation.clone(),
            known_facts: vec![
                KnownFact::IntegralOfQ {
                    target: family.ideal,
                    rel_tol: 0.02,
                    source: "boundary terms of -v''/v integrate to 4/(1-2 delta)".into(),
                },
                KnownFact::ExpectedVerdict {
                    interval: (0.0, 1.0),
                    disconjugate: false,
                    source: "the bump solution vanishes at both 0 and 1".into(),
                },
            ],
        });
    }

    entries.push(CatalogEntry {
        id: "ord2_11".into(),
        description: "q = sin t/(2 + sin t): disconjugate on the line yet periodic".into(),
        equation: Equation::parse("0", "sin(t)/(2+sin(t))").unwrap(),
        known_facts: vec![
            KnownFact::KnownSolution {
                expr: "2+sin(t)".into(),
                source: "direct substitution".into(),
            },
            KnownFact::TestFunctionCertifies {
                v: "2+sin(t)".into(),
                interval: (-20.0, 20.0),
                source: "the positive solution is its own certificate".into(),
            },
            KnownFact::ExpectedVerdict {
                interval: (-20.0, 20.0),
                disconjugate: true,
                source: "certified by the positive solution".into(),
            },
            KnownFact::PeriodicSolutionExists {
                period: 2.0 * std::f64::consts::PI,
                source: "2 + sin t is periodic".into(),
            },
        ],
    });

    {
        let choice = get("choice", 0.0) as usize;
        let p_src = ["t", "2*t", "t+0.5*sin(t)"][choice.min(2)];
        let dp = CoeffExpr::parse(p_src).unwrap().differentiate().unwrap();
        let q_src = format!("({p_src})^2/4+({dp})/2");
        entries.push(CatalogEntry {
            id: "ord2_12".into(),
            description: "family q = p^2/4 + p'/2 with increasing p".into(),
            equation: Equation::parse(p_src, &q_src).unwrap(),
            known_facts: vec![KnownFact::CurveConditionFires {
                condition: 5,
                source: "the bound holds as an identity".into(),
            }],
        });
    }

    entries.push(CatalogEntry {
        id: "gauss_bell".into(),
        description: "p = t, q = t^2/4 + 1/2: bell-shaped positive solution".into(),
        equation: Equation::parse("t", "t^2/4+1/2").unwrap(),
        known_facts: vec![
            KnownFact::KnownSolution {
                expr: "exp(-t^2/4)".into(),
                source: "direct substitution".into(),
            },
            KnownFact::CurveConditionFires {
                condition: 5,
                source: "equality case of the slope-corrected bound".into(),
            },
            KnownFact::ExpectedVerdict {
                interval: (-20.0, 20.0),
                disconjugate: true,
                source: "the bell solution never vanishes".into(),
            },
        ],
    });

    entries.push(CatalogEntry {
        id: "osc_counterexample".into(),
        description: "p = -t/2, q = t^2/16: curve on the parabola yet oscillatory".into(),
        equation: Equation::parse("-t/2", "t^2/16").unwrap(),
        known_facts: vec![
            KnownFact::KnownSolution {
                expr: "exp(t^2/8)*sin(t/2)".into(),
                source: "direct substitution".into(),
            },
            KnownFact::ExpectedVerdict {
                interval: (0.0, 2.0 * std::f64::consts::PI + 0.1),
                disconjugate: false,
                source: "the growing oscillation has zeros every 2 pi".into(),
            },
        ],
    });

    {
        let r_cap = get("R", 1.0);
        let c = get("c", 1.0);
        entries.push(CatalogEntry {
            id: "condition6_identity".into(),
            description: "logistic p making the quadratic branch of condition 6 an identity"
                .into(),
            equation: Equation::parse(
                "R*(1-c^2*exp(R*t/2))/(1+c^2*exp(R*t/2))",
                "(R*(1-c^2*exp(R*t/2))/(1+c^2*exp(R*t/2)))^2/4-R^2",
            )
            .unwrap()
            .with_param("R", r_cap)
            .with_param("c", c),
            known_facts: vec![
                KnownFact::ExpectedVerdict {
                    interval: (-20.0, 20.0),
                    disconjugate: true,
                    source: "exponential-integral solution stays positive".into(),
                },
                KnownFact::CurveConditionFires {
                    condition: 3,
                    source: "q < 0 everywhere, so the zero-slope half-plane already fires"
                        .into(),
                },
            ],
        });
    }

    entries.push(CatalogEntry {
        id: "damped".into(),
        description: "x'' + x' + 0.2 x = 0: all periodic-theorem hypotheses hold".into(),
        equation: Equation::parse("1", "0.2").unwrap(),
        known_facts: vec![
            KnownFact::CurveConditionFires {
                condition: 1,
                source: "real characteristic roots".into(),
            },
            KnownFact::NoPeriodicSolution {
                period: 2.0 * std::f64::consts::PI,
                min_unit_distance: 0.1,
                source: "spectrum e^{2 pi lambda} with both lambda negative real".into(),
            },
        ],
    });

    entries
}

/// Execute one fact and report the outcome.
pub fn run_fact(
    entry: &CatalogEntry,
    fact: &KnownFact,
    tol: Tolerances,
) -> Result<FactOutcome, CatalogError> {
    let eq = &entry.equation;
    let outcome = |pass: bool, detail: String| FactOutcome {
        entry: entry.id.clone(),
        fact: fact_name(fact).to_string(),
        pass,
        detail,
    };
    Ok(match fact {
        KnownFact::RhoPlusClosedForm {
            formula,
            base_points,
            rel_tol,
            window,
            sentinel_from,
            ..
        } => {
            let formula = CoeffExpr::parse(formula).expect("catalog formula parses");
            let mut worst = 0.0f64;
            let mut pass = true;
            let mut detail = String::new();
            for &a in base_points {
                let rho = conjugacy::rho_plus(eq, a, a + window, tol)?;
                let want = formula
                    .eval(a, &eq.params)
                    .expect("closed form evaluates at catalog base points");
                let err = (rho.value - want).abs() / want.abs().max(1e-12);
                worst = worst.max(err);
                if !rho.is_finite() || err > *rel_tol {
                    pass = false;
                    detail = format!("at base {a}: got {}, want {want}", rho.value);
                    break;
                }
            }
            if pass {
                if let Some(threshold) = sentinel_from {
                    let rho = conjugacy::rho_plus(eq, *threshold, threshold + window, tol)?;
                    if rho.is_finite() {
                        pass = false;
                        detail = format!(
                            "expected sentinel at base {threshold}, got {}",
                            rho.value
                        );
                    }
                }
            }
            if pass {
                detail = format!("worst relative error {worst:.3e}");
            }
            outcome(pass, detail)
        }
        KnownFact::KnownSolution { expr, .. } => {
            let u = CoeffExpr::parse(expr).expect("catalog solution parses");
            let image = ode::apply_l(eq, &u).expect("catalog solution differentiates");
            let mut worst = 0.0f64;
            let (lo, hi) = if eq.domain.is_finite() {
                (eq.domain.lo, eq.domain.hi)
            } else if eq.domain.lo.is_finite() {
                (eq.domain.lo + 0.01, eq.domain.lo + 20.0)
            } else {
                (-10.0, 10.0)
            };
            let mut scale = 1.0f64;
            for i in 0..=256 {
                let t = lo + (hi - lo) * i as f64 / 256.0;
                let r = image.eval(t).map(|v| v.abs()).unwrap_or(f64::INFINITY);
                let u_val = image.u_value(t).map(|v| v.abs()).unwrap_or(1.0);
                scale = scale.max(u_val);
                worst = worst.max(r);
            }
            let pass = worst <= 1e-8 * scale;
            outcome(pass, format!("max residual {worst:.3e} at scale {scale:.3e}"))
        }
        KnownFact::ExpectedVerdict {
            interval,
            disconjugate,
            ..
        } => {
            let v = conjugacy::is_disconjugate(eq, Interval::closed(interval.0, interval.1), tol)?;
            let pass = v.is_disconjugate() == *disconjugate;
            outcome(pass, format!("oracle: {:?}", v.kind))
        }
        KnownFact::CurveConditionFires { condition, .. } => {
            let checked = criteria::check_curve(
                eq,
                &CurveOptions {
                    window: Interval::closed(-20.0, 20.0),
                    r: None,
                },
            )
?;
            let got = checked
                .certificate
                .get("condition")
                .and_then(|v| v.as_u64())
                .unwrap_or(0);
            let pass = checked.verdict.is_disconjugate() && got == *condition as u64;
            outcome(pass, format!("fired condition {got}"))
        }
        KnownFact::TestFunctionCertifies { v, interval, .. } => {
            let vf = CoeffExpr::parse(v).expect("catalog test function parses");
            let checked = criteria::check_vallee_poussin(
                eq,
                Interval::closed(interval.0, interval.1),
                &vf,
            )
?;
            outcome(
                checked.verdict.is_disconjugate(),
                format!("verdict {:?}", checked.verdict.kind),
            )
        }
        KnownFact::PeriodicSolutionExists { period, .. } => {
            let verdict = periodic::check_theorem_periodic(
                eq,
                *period,
                Interval::closed(-20.0, 20.0),
                tol,
            )
?;
            let pass = matches!(verdict.kind, periodic::PeriodicKind::HasPeriodic { .. });
            outcome(pass, format!("{:?}", verdict.kind))
        }
        KnownFact::NoPeriodicSolution {
            period,
            min_unit_distance,
            ..
        } => {
            let verdict = periodic::check_theorem_periodic(
                eq,
                *period,
                Interval::closed(-20.0, 20.0),
                tol,
            )
?;
            let h = &verdict.hypothesis_report;
            let pass = matches!(verdict.kind, periodic::PeriodicKind::NoNontrivialPeriodic)
                && h.q_sign_ok
                && h.periodicity_ok
                && h.disconjugacy_ok
                && verdict.monodromy.unit_eigen_distance >= *min_unit_distance;
            outcome(
                pass,
                format!(
                    "{:?}, unit distance {:.3}",
                    verdict.kind, verdict.monodromy.unit_eigen_distance
                ),
            )
        }
        KnownFact::IntegralOfQ {
            target, rel_tol, ..
        } => {
            let integral = crate::quad::integrate(
                |t| {
                    eq.q_at(t).map_err(|e| crate::quad::QuadError::Integrand {
                        t,
                        message: e.to_string(),
                    })
                },
                0.0,
                1.0,
                1e-10,
            )?;
            let rel = (integral - target).abs() / target.abs();
            outcome(
                rel <= *rel_tol,
                format!("integral {integral:.6}, target {target:.6}, rel {rel:.4}"),
            )
        }
    })
}

/// Run every fact of one entry.
pub fn run_entry(entry: &CatalogEntry, tol: Tolerances) -> Result<Vec<FactOutcome>, CatalogError> {
    entry
        .known_facts
        .iter()
        .map(|fact| run_fact(entry, fact, tol))
        .collect()
}

/// Run the whole catalog.
pub fn run_all(params: &Params, tol: Tolerances) -> Result<Vec<FactOutcome>, CatalogError> {
    let mut out = Vec::new();
    for entry in catalog_list(params) {
        out.extend(run_entry(&entry, tol)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_the_expected_entries() {
        let ids: Vec<String> = catalog_list(&Params::new())
            .into_iter()
            .map(|e| e.id)
            .collect();
        for want in [
            "eq3a",
            "eq3b",
            "harmonic",
            "euler",
            "lyapunov_sharpness",
            "ord2_11",
            "ord2_12",
            "gauss_bell",
            "osc_counterexample",
            "condition6_identity",
        ] {
            assert!(ids.iter().any(|id| id == want), "missing {want}");
        }
    }

    #[test]
    fn known_solutions_hold() {
        let tol = Tolerances::default();
        for entry in catalog_list(&Params::new()) {
            for fact in &entry.known_facts {
                if matches!(fact, KnownFact::KnownSolution { .. }) {
                    let outcome = run_fact(&entry, fact, tol).unwrap();
                    assert!(outcome.pass, "{outcome:?}");
                }
            }
        }
    }

    #[test]
    fn harmonic_entry_facts_pass() {
        let tol = Tolerances::default();
        let entries = catalog_list(&Params::new());
        let harmonic = entries.iter().find(|e| e.id == "harmonic").unwrap();
        for outcome in run_entry(harmonic, tol).unwrap() {
            assert!(outcome.pass, "{outcome:?}");
        }
    }
}
