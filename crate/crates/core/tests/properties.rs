//! Property suites beyond the acceptance gate: expression round trips,
//! derivative cross-checks, interval nesting, kernel positivity, region
//! geometry, and the periodic-equation consistency sweep.

mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use disconj::conjugacy::{self, is_disconjugate};
use disconj::criteria;
use disconj::ode;
use disconj::periodic;
use disconj::{CoeffExpr, Equation, Interval, Params, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

// -- expression invariants ---------------------------------------------------

/// Random expression trees for the round-trip property; constants stay
/// nonnegative (the parser spells negation with a unary minus node).
fn arb_expr() -> impl Strategy<Value = disconj::expr::Expr> {
    use disconj::expr::{Expr, Func};
    let leaf = prop_oneof![
        (0.0..100.0f64).prop_map(Expr::Const),
        Just(Expr::Var),
        "[a-zA-Z][a-z0-9]{0,3}".prop_filter("reserved words", |s| {
            !matches!(
                s.as_str(),
                "t" | "pi" | "sin" | "cos" | "tan" | "cot" | "exp" | "ln" | "sinh" | "cosh"
                    | "tanh" | "abs" | "sqrt" | "min" | "max"
            )
        })
        .prop_map(Expr::Param),
    ];
    leaf.prop_recursive(5, 64, 8, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Pow(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Min(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Max(Box::new(a), Box::new(b))),
            inner
                .clone()
                .prop_map(|a| Expr::Fn1(Func::Sin, Box::new(a))),
            inner.prop_map(|a| Expr::Fn1(Func::Exp, Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn serialize_parse_roundtrip_is_identity(root in arb_expr()) {
        let expr = CoeffExpr::new(root);
        let text = expr.serialize();
        let reparsed = CoeffExpr::parse(&text).unwrap();
        prop_assert_eq!(expr, reparsed);
    }
}

#[test]
fn symbolic_derivative_matches_finite_differences() {
    // catalog-flavored differentiable expressions and random points
    let sources = [
        "t^2/4",
        "sin(t)/(2+sin(t))",
        "exp(-t^2/4)",
        "R*(1-c^2*exp(R*t/2))/(1+c^2*exp(R*t/2))",
        "1/(A*cosh(t)-1)",
        "t^3-2*t+sinh(t/3)",
        "ln(2+cos(t))",
        "sqrt(4+t^2)",
        "tanh(t)*exp(t/5)",
        "cot(t+4)",
    ];
    let params: Params = [("R".to_string(), 1.0), ("c".to_string(), 1.0), ("A".to_string(), 2.0)]
        .into_iter()
        .collect();
    let mut rng = StdRng::seed_from_u64(7);
    for src in sources {
        let e = CoeffExpr::parse(src).unwrap();
        let d = e.differentiate().unwrap();
        for _ in 0..100 {
            let t = rng.random_range(-2.0..2.0);
            // keep a respectful distance from poles: central differences
            // lose accuracy faster than the tolerance scales there
            match e.eval(t, &params) {
                Ok(v) if v.abs() < 100.0 => {}
                _ => continue,
            }
            let exact = match d.eval(t, &params) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let h = 1e-5;
            let (Ok(fp), Ok(fm)) = (e.eval(t + h, &params), e.eval(t - h, &params)) else {
                continue;
            };
            let fd = (fp - fm) / (2.0 * h);
            assert!(
                (exact - fd).abs() <= 1e-6 * (1.0 + exact.abs()),
                "{src} at {t}: symbolic {exact} vs fd {fd}"
            );
        }
    }
}

// -- oracle structure --------------------------------------------------------

#[test]
fn disconjugacy_is_inherited_by_subintervals() {
    let mut rng = StdRng::seed_from_u64(41);
    let mut exercised = 0;
    while exercised < 25 {
        let eq = common::random_equation(&mut rng, 1.0, 2.5);
        let iv = common::random_interval(&mut rng, 1.0, 2.0);
        if !is_disconjugate(&eq, iv, tol()).unwrap().is_disconjugate() {
            continue;
        }
        exercised += 1;
        for _ in 0..4 {
            let lo = rng.random_range(iv.lo..iv.hi - 0.1);
            let hi = rng.random_range(lo + 0.05..iv.hi);
            let sub = Interval::closed(lo, hi);
            assert!(
                is_disconjugate(&eq, sub, tol()).unwrap().is_disconjugate(),
                "nesting failed: disconjugate on {iv} but not on {sub}"
            );
        }
    }
}

#[test]
fn cauchy_kernel_positive_on_disconjugacy_triangle() {
    let instances = [
        (Equation::parse("0", "1").unwrap(), 0.0, 1.5),
        (Equation::parse("t", "t^2/4+1/2").unwrap(), -2.0, 2.0),
        (Equation::parse("0", "sin(t)/(2+sin(t))").unwrap(), 0.0, 3.0),
    ];
    for (eq, a, b) in instances {
        assert!(is_disconjugate(&eq, Interval::closed(a, b), tol())
            .unwrap()
            .is_disconjugate());
        for i in 0..8 {
            let s = a + (b - a) * i as f64 / 8.0;
            let traj = ode::cauchy(&eq, s, b, tol()).unwrap();
            for j in 1..=8 {
                let t = s + (b - s) * j as f64 / 8.0;
                if t - s < 1e-6 {
                    continue;
                }
                assert!(
                    traj.x(t) > 0.0,
                    "C({t}, {s}) = {} not positive",
                    traj.x(t)
                );
            }
        }
    }
}

#[test]
fn zero_simplicity_of_nontrivial_solutions() {
    let mut rng = StdRng::seed_from_u64(43);
    for _ in 0..30 {
        let base = rng.random_range(1.0..6.0);
        let q = CoeffExpr::parse(&format!("{base}+0.3*sin(t)")).unwrap();
        let eq = Equation::new(common::random_trig(&mut rng, 0.5), q, Interval::real_line());
        let traj = ode::integrate_ivp(&eq, 0.0, 0.0, 1.0, 10.0, tol()).unwrap();
        let zeros = ode::find_zeros(&traj, Interval::closed(0.1, 10.0), 1e-12);
        for z in zeros.simple_zeros() {
            let slope = traj.dx(z).abs();
            assert!(
                slope > 1e-6 * traj.amplitude(),
                "vanishing slope {slope} at zero {z}"
            );
        }
    }
}

// -- criteria geometry -------------------------------------------------------

#[test]
fn half_plane_membership_implies_closed_root_region() {
    // if the gamma search succeeds, the curve lies under a tangent of the
    // parabola, hence inside the closed-root region
    let mut rng = StdRng::seed_from_u64(47);
    let mut exercised = 0;
    while exercised < 25 {
        let eq = common::random_equation(&mut rng, 1.5, 2.0);
        let window = Interval::closed(-5.0, 5.0);
        let cert = criteria::check_curve_condition(&eq, window, 3, None).unwrap();
        if cert.is_none() {
            continue;
        }
        exercised += 1;
        for k in 0..=512 {
            let t = -5.0 + 10.0 * k as f64 / 512.0;
            let p = eq.p_at(t).unwrap();
            let q = eq.q_at(t).unwrap();
            assert!(
                p * p - 4.0 * q >= -1e-9,
                "gamma found but ({p}, {q}) outside the region at t = {t}"
            );
        }
    }
}

#[test]
fn characteristic_test_consistent_with_half_plane_search() {
    // whenever the nu search certifies an instance, the half-plane search
    // with gamma = |nu| sees the same test function family; both must fire
    // on instances whose curve sits below the corresponding tangent line
    let mut rng = StdRng::seed_from_u64(53);
    let mut exercised = 0;
    while exercised < 20 {
        // constants with real roots, slightly perturbed
        let p0 = rng.random_range(-3.0..3.0);
        let margin = rng.random_range(0.1..2.0);
        let q0 = p0 * p0 / 4.0 - margin;
        let wobble = rng.random_range(0.0..0.2);
        let eq = Equation::parse(
            &format!("{p0}"),
            &format!("{q0}-{wobble}*sin(t)^2"),
        )
        .unwrap();
        let window = Interval::closed(-10.0, 10.0);
        let d = criteria::check_d(&eq, window).unwrap();
        if !d.verdict.is_disconjugate() {
            continue;
        }
        exercised += 1;
        let nu = d.certificate["nu"].as_f64().unwrap();
        // P(t, nu) <= 0 means q(t) <= -nu^2 - p nu: the curve lies in the
        // half plane of gamma = |nu| with the matching sign, so the
        // half-plane search must also succeed (possibly with another gamma)
        for k in 0..=512 {
            let t = -10.0 + 20.0 * k as f64 / 512.0;
            let p = eq.p_at(t).unwrap();
            let q = eq.q_at(t).unwrap();
            let membership = q + nu * nu + nu * p; // q <= -nu^2 - p nu
            assert!(
                membership <= 1e-6,
                "nu fired but the half-plane bound fails at t = {t}: {membership}"
            );
        }
        let c3 = criteria::check_curve_condition(&eq, window, 3, None).unwrap();
        assert!(c3.is_some(), "half-plane search must also succeed");
    }
}

#[test]
fn first_order_kernel_factors_approach_parabola_constants() {
    // the auxiliary-P bounds collapse to the parabola-test constants as P
    // goes to 0
    let (f1, f2) = criteria::xa2_factors(1e-4, 0.0, 1.0);
    assert!((f1 - 0.5).abs() < 1e-3);
    assert!((f2 - 0.125).abs() < 1e-3);
    // and the verdicts agree with the parabola test at the boundary
    let eq = Equation::parse("0", "7.9").unwrap();
    let c = criteria::check_c(&eq, 0.0, 1.0).unwrap();
    let xa2 = criteria::check_xa2(&eq, 0.0, 1.0, 1e-4).unwrap();
    assert_eq!(
        c.verdict.is_disconjugate(),
        xa2.verdict.is_disconjugate(),
        "verdicts diverge in the small-P limit"
    );
}

// -- periodic consistency ----------------------------------------------------

#[test]
fn liouville_determinant_on_random_periodic_instances() {
    let mut rng = StdRng::seed_from_u64(59);
    for _ in 0..50 {
        let a = rng.random_range(-1.0..1.0);
        let b = rng.random_range(-1.0..1.0);
        let c = rng.random_range(-2.0..2.0);
        let eq = Equation::parse(&format!("{a}+{b}*sin(t)"), &format!("{c}*cos(t)")).unwrap();
        let report = periodic::monodromy(&eq, 0.0, 2.0 * PI, tol()).unwrap();
        assert!(
            (report.det - report.det_expected).abs()
                <= 1e-7 * (1.0 + report.det_expected.abs()),
            "Liouville residual {}",
            (report.det - report.det_expected).abs()
        );
        assert!(report.eigen_residual() < 1e-10);
    }
}

#[test]
fn sign_definite_periodic_disconjugate_instances_have_no_unit_eigenvalue() {
    // within-hypotheses instances built from the slope-corrected bound with
    // sign-definite periodic q
    let mut rng = StdRng::seed_from_u64(61);
    for _ in 0..50 {
        let c: f64 = rng.random_range(1.5..4.0);
        let d = rng.random_range(0.0..0.3);
        let budget = (c - d) * (c - d) / 4.0 - d / 2.0;
        let q0 = rng.random_range(0.2..budget.min(2.0)).max(0.05);
        let q1 = rng.random_range(0.0..q0.min(budget - q0).max(1e-3));
        let eq = Equation::parse(
            &format!("{c}+{d}*sin(t)"),
            &format!("{q0}+{q1}*cos(t)"),
        )
        .unwrap();
        let verdict = periodic::check_theorem_periodic(
            &eq,
            2.0 * PI,
            Interval::closed(-20.0, 20.0),
            tol(),
        )
        .unwrap();
        let h = &verdict.hypothesis_report;
        assert!(
            h.q_sign_ok && h.periodicity_ok && h.disconjugacy_ok,
            "constructed instance must satisfy the hypotheses: {h:?}"
        );
        assert!(
            matches!(verdict.kind, periodic::PeriodicKind::NoNontrivialPeriodic),
            "{:?}",
            verdict.kind
        );
        assert!(
            verdict.monodromy.unit_eigen_distance > 1e-6,
            "unit distance {}",
            verdict.monodromy.unit_eigen_distance
        );
    }
}

#[test]
fn periodic_witness_roundtrips_for_shifted_families() {
    // q = sin t / (c + sin t) keeps c + sin t as a periodic solution
    for c in [2.0, 2.5, 3.0] {
        let eq = Equation::parse("0", &format!("sin(t)/({c}+sin(t))")).unwrap();
        let verdict = periodic::check_theorem_periodic(
            &eq,
            2.0 * PI,
            Interval::closed(-20.0, 20.0),
            tol(),
        )
        .unwrap();
        match verdict.kind {
            periodic::PeriodicKind::HasPeriodic { witness } => {
                let r = periodic::witness_roundtrip(&eq, 0.0, 2.0 * PI, witness, tol()).unwrap();
                assert!(r <= 1e-6, "roundtrip {r} for c = {c}");
            }
            other => panic!("expected periodic witness for c = {c}, got {other:?}"),
        }
    }
}

// -- substitution ------------------------------------------------------------

#[test]
fn genuine_substitution_always_agrees_with_original() {
    // the genuine change of variables maps zeros bijectively, so its
    // disconjugacy verdict must match the original on matching windows
    let cases = [
        ("0", "1/(1+t)"),
        ("1/(1+t)", "0.3"),
        ("0", "-1"),
    ];
    for (p, q) in cases {
        let eq = Equation::parse(p, q)
            .unwrap()
            .with_domain(Interval::open(0.0, f64::INFINITY));
        let cmp = criteria::compare_substitution(&eq, 0.0, 2.0, tol()).unwrap();
        assert!(
            cmp.genuine_agrees_with_original,
            "{p}, {q}: genuine reading disagrees: {cmp:?}"
        );
    }
}

// -- brute force vs oracle over random instances ------------------------------

#[test]
fn angle_sweep_agrees_with_single_shot() {
    let mut rng = StdRng::seed_from_u64(67);
    for _ in 0..25 {
        let eq = common::random_equation(&mut rng, 1.0, 3.0);
        let iv = common::random_interval(&mut rng, 0.8, 2.2);
        let report = conjugacy::crosscheck_bruteforce(&eq, iv, 16, tol()).unwrap();
        assert!(report.agrees, "disagreement on {iv}: {report:?}");
    }
}
