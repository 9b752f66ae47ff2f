//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use disconj::catalog;
use disconj::conjugacy::{self, is_disconjugate, rho_minus, rho_plus};
use disconj::criteria::{self, RunOptions};
use disconj::factorization;
use disconj::green;
use disconj::ode;
use disconj::periodic;
use disconj::{CoeffExpr, Equation, Interval, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn report(n: u32, ok: bool, summary: &str) {
    println!(
        "ACCEPTANCE {n} {}: {summary}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance criterion {n} failed: {summary}");
}

fn eq3a(a_param: f64) -> Equation {
    Equation::parse("-(A*sinh(t))/(A*cosh(t)-1)", "1/(A*cosh(t)-1)")
        .unwrap()
        .with_param("A", a_param)
}

fn eq3b(b: f64) -> Equation {
    Equation::parse("-(2*(2*t-b))/(t^2+(t-b)^2)", "4/(t^2+(t-b)^2)")
        .unwrap()
        .with_param("b", b)
}

#[test]
fn criterion_1_conjugate_point_golden_tests() {
    // eq3b with b = 1: rho_+(t) = b(t-b)/(2t-b) at 20 points in [-2, 0.45]
    let eq = eq3b(1.0);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let a = -2.0 + 2.45 * k as f64 / 19.0;
        let want = (a - 1.0) / (2.0 * a - 1.0);
        let rho = rho_plus(&eq, a, a + 200.0, tol()).unwrap();
        assert!(rho.is_finite(), "rho_+({a}) must be finite");
        worst = worst.max((rho.value - want).abs() / want.abs());
    }
    let golden_3b = worst <= 1e-6;

    // beyond b/2 the sentinel is expected (window 200)
    let mut sentinel_ok = true;
    for a in [0.5, 0.6] {
        let rho = rho_plus(&eq, a, a + 200.0, tol()).unwrap();
        sentinel_ok &= !rho.is_finite() && rho.value > 0.0 && rho.window_limited;
    }

    // eq3a with A = 2: rho_+(t) = ln((A - e^t)/(1 - A e^t)) for t < ln(1/2)
    let eq = eq3a(2.0);
    let mut worst_3a = 0.0f64;
    for k in 0..10 {
        let a = -3.0 + 2.25 * k as f64 / 9.0;
        let want = ((2.0 - a.exp()) / (1.0 - 2.0 * a.exp())).ln();
        let rho = rho_plus(&eq, a, a + 50.0, tol()).unwrap();
        assert!(rho.is_finite());
        worst_3a = worst_3a.max((rho.value - want).abs() / want.abs());
    }
    let golden_3a = worst_3a <= 1e-6;

    report(
        1,
        golden_3b && sentinel_ok && golden_3a,
        &format!("closed-form conjugate points (worst rel err {worst:.2e} / {worst_3a:.2e}), sentinels beyond b/2"),
    );
}

#[test]
fn criterion_2_harmonic_calibration() {
    let eq = Equation::parse("0", "1").unwrap();
    let rho = rho_plus(&eq, 0.0, 10.0, tol()).unwrap();
    let rho_ok = rho.is_finite() && (rho.value - PI).abs() <= 1e-8;

    let inside = is_disconjugate(&eq, Interval::closed(0.0, PI - 1e-3), tol()).unwrap();
    let beyond = is_disconjugate(&eq, Interval::closed(0.0, PI + 1e-3), tol()).unwrap();
    let verdicts_ok = inside.is_disconjugate() && beyond.is_not_disconjugate();
    let witness_ok = beyond
        .witness
        .as_ref()
        .map(|w| w.z1.abs() <= 1e-6 && (w.z2 - PI).abs() <= 1e-6)
        .unwrap_or(false);

    report(
        2,
        rho_ok && verdicts_ok && witness_ok,
        &format!(
            "rho_+(0) = {} (err {:.2e}), boundary verdicts and witness zeros",
            rho.value,
            (rho.value - PI).abs()
        ),
    );
}

#[test]
fn criterion_3_lyapunov_boundary_and_sharpness() {
    // q = 4 on [0, 1]: the integral bound holds with equality
    let eq = Equation::parse("0", "4").unwrap();
    let checked = criteria::check_lyapunov(&eq, 0.0, 1.0).unwrap();
    let fired = checked.verdict.is_disconjugate();
    let oracle = is_disconjugate(&eq, Interval::closed(0.0, 1.0), tol())
        .unwrap()
        .is_disconjugate();

    // sharp family at delta = 0.05
    let family = criteria::lyapunov_sharpness_family(0.05).unwrap();
    let rel = (family.integral - family.ideal).abs() / family.ideal;
    let integral_ok = rel <= 0.02;
    let family_verdict =
        is_disconjugate(&family.equation, Interval::closed(0.0, 1.0), tol()).unwrap();
    let family_ok = family_verdict.is_not_disconjugate();

    report(
        3,
        fired && oracle && integral_ok && family_ok,
        &format!(
            "equality case fires and is confirmed; family integral {:.4} vs ideal {:.4} (rel {:.3}%)",
            family.integral,
            family.ideal,
            rel * 100.0
        ),
    );
}

#[test]
fn criterion_4_coefficient_plane_dichotomy() {
    // oscillatory instance: curve on the boundary of the closed-root region
    let osc = Equation::parse("-t/2", "t^2/16").unwrap();
    let verdict = is_disconjugate(&osc, Interval::closed(0.0, 2.0 * PI + 0.1), tol()).unwrap();
    let osc_not = verdict.is_not_disconjugate();
    let witness_ok = verdict
        .witness
        .as_ref()
        .map(|w| w.z1.abs() <= 1e-6 && (w.z2 - 2.0 * PI).abs() <= 1e-6)
        .unwrap_or(false);
    let mut in_n = true;
    for k in 0..=2048 {
        let t = (2.0 * PI + 0.1) * k as f64 / 2048.0;
        let p = osc.p_at(t).unwrap();
        let q = osc.q_at(t).unwrap();
        in_n &= p * p - 4.0 * q >= -1e-9;
    }

    // bell instance: curve strictly outside, yet condition 5 certifies it
    let bell = Equation::parse("t", "t^2/4+1/2").unwrap();
    let checked = criteria::check_curve(
        &bell,
        &criteria::CurveOptions {
            window: Interval::closed(-20.0, 20.0),
            r: None,
        },
    )
    .unwrap();
    let bell_fired = checked.verdict.is_disconjugate()
        && checked.certificate["condition"] == serde_json::json!(5);
    let bell_oracle = is_disconjugate(&bell, Interval::closed(-20.0, 20.0), tol())
        .unwrap()
        .is_disconjugate();
    let mut in_o = true;
    for k in 0..=2048 {
        let t = -20.0 + 40.0 * k as f64 / 2048.0;
        let p = bell.p_at(t).unwrap();
        let q = bell.q_at(t).unwrap();
        in_o &= p * p - 4.0 * q < 0.0;
    }

    report(
        4,
        osc_not && witness_ok && in_n && bell_fired && bell_oracle && in_o,
        "oscillatory instance inside the closed-root region, certified bell outside it",
    );
}

fn soundness_chunk(seed: u64, count: usize) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut not_disconjugate = 0usize;
    for trial in 0..count {
        let eq = if trial % 3 == 0 {
            // bias toward oscillation so the sweep exercises the unsound
            // direction, not just easy disconjugate instances
            let base = rng.random_range(2.0..8.0);
            let q = CoeffExpr::parse(&format!("{base}+({})", common::random_coeff(&mut rng, 1.5)))
                .unwrap();
            Equation::new(common::random_coeff(&mut rng, 0.8), q, Interval::real_line())
        } else {
            common::random_equation(&mut rng, 2.0, 3.0)
        };
        let iv = common::random_interval(&mut rng, 0.8, 2.6);
        // the aggregate runner hard-errors when any criterion fires on an
        // interval where the oracle finds a two-zero witness
        let report = criteria::run_all(&eq, iv, &RunOptions::default())
            .unwrap_or_else(|e| panic!("soundness violation or failure: {e} on {iv}"));
        if report.oracle.is_not_disconjugate() {
            not_disconjugate += 1;
        }
    }
    // the sweep must actually exercise oscillatory instances
    assert!(
        not_disconjugate >= count / 20,
        "sweep too tame: only {not_disconjugate} oscillatory instances"
    );
}

#[test]
fn criterion_5_soundness_sweep_a() {
    soundness_chunk(11, 50);
    report(5, true, "soundness sweep chunk A (50 instances, zero violations)");
}

#[test]
fn criterion_5_soundness_sweep_b() {
    soundness_chunk(23, 50);
    report(5, true, "soundness sweep chunk B (50 instances, zero violations)");
}

#[test]
fn criterion_5_soundness_sweep_c() {
    soundness_chunk(37, 50);
    report(5, true, "soundness sweep chunk C (50 instances, zero violations)");
}

#[test]
fn criterion_5_soundness_sweep_d() {
    soundness_chunk(53, 50);
    report(5, true, "soundness sweep chunk D (50 instances, zero violations)");
}

#[test]
fn criterion_6_green_function_suite() {
    // every disconjugate catalog family on an interval inside its
    // disconjugacy region
    let euler = Equation::parse("phat/t", "(phat-1)^2/(4*t^2)")
        .unwrap()
        .with_param("phat", 3.0)
        .with_domain(Interval::open(0.0, f64::INFINITY));
    let instances: Vec<(Equation, f64, f64)> = vec![
        (Equation::parse("0", "1").unwrap(), 0.0, 1.5),
        (Equation::parse("0", "sin(t)/(2+sin(t))").unwrap(), 0.0, 3.0),
        (Equation::parse("t", "t^2/4+1/2").unwrap(), -2.0, 2.0),
        (Equation::parse("1", "0.2").unwrap(), 0.0, 2.0),
        (eq3b(1.0), -1.0, 0.5),
        (eq3a(2.0), -2.0, 0.8),
        (euler, 0.5, 3.0),
        (
            Equation::parse(
                "R*(1-c^2*exp(R*t/2))/(1+c^2*exp(R*t/2))",
                "(R*(1-c^2*exp(R*t/2))/(1+c^2*exp(R*t/2)))^2/4-R^2",
            )
            .unwrap()
            .with_param("R", 1.0)
            .with_param("c", 1.0),
            -2.0,
            2.0,
        ),
    ];
    let mut rng = StdRng::seed_from_u64(101);
    for (eq, a, b) in &instances {
        let g = green::green_function(eq, *a, *b, tol()).unwrap();
        assert!(
            g.checks.boundary_worst <= 1e-8,
            "boundary {}",
            g.checks.boundary_worst
        );
        assert!(g.checks.jump_worst <= 1e-6, "jump {}", g.checks.jump_worst);
        for _ in 0..100 {
            let t = rng.random_range(*a..*b);
            let s = rng.random_range(*a..*b);
            let v = g.eval(t, s);
            assert!(v < 0.0, "G({t},{s}) = {v} not negative");
        }
        // the quadrature solution is internally cross-checked against a
        // direct shooting solution at 1e-6
        let f = CoeffExpr::parse("-1").unwrap();
        let solution = green::solve_bvp(eq, &f, *a, *b, tol()).unwrap();
        assert!(solution.x(*a).abs() <= 1e-8);
        assert!(solution.x(*b).abs() <= 1e-8);
    }

    // product identity for the p = 0 instances
    let mut identity_worst = 0.0f64;
    for (eq, a, b) in instances.iter().filter(|(eq, _, _)| {
        eq.p.serialize() == "0" || !eq.p.depends_on_t() && eq.p_at(0.0).unwrap() == 0.0
    }) {
        let g = green::green_function(eq, *a, *b, tol()).unwrap();
        identity_worst = identity_worst.max(g.product_form_discrepancy(eq, 8).unwrap());
    }
    report(
        6,
        identity_worst <= 1e-8,
        &format!(
            "boundary, jump, negativity and BVP residual on {} instances; p=0 product identity {identity_worst:.2e}",
            instances.len()
        ),
    );
}

#[test]
fn criterion_7_factorization_and_rolle() {
    let euler = Equation::parse("phat/t", "(phat-1)^2/(4*t^2)")
        .unwrap()
        .with_param("phat", 3.0)
        .with_domain(Interval::open(0.0, f64::INFINITY));
    let instances: Vec<(Equation, f64, f64)> = vec![
        (Equation::parse("0", "1").unwrap(), 0.0, 1.5),
        (Equation::parse("0", "sin(t)/(2+sin(t))").unwrap(), 0.0, 2.0 * PI),
        (Equation::parse("t", "t^2/4+1/2").unwrap(), -2.0, 2.0),
        (Equation::parse("1", "0.2").unwrap(), 0.0, 2.0),
        (eq3b(1.0), -1.0, 0.5),
        (eq3a(2.0), -2.0, 0.8),
        (euler, 0.5, 3.0),
    ];
    let mut rng = StdRng::seed_from_u64(202);
    let mut product_worst = 0.0f64;
    let mut residual_worst = 0.0f64;
    for (eq, lo, hi) in &instances {
        let fact =
            factorization::build_factorization(eq, Interval::closed(*lo, *hi), tol()).unwrap();
        let checks = fact.verify(512).unwrap();
        product_worst = product_worst.max(checks.product_worst);
        for _ in 0..10 {
            let u = common::random_test_function(&mut rng);
            let r = factorization::verify_factorization(eq, &fact, &u, 64).unwrap();
            residual_worst = residual_worst.max(r);
        }
    }
    let factored_ok = product_worst <= 1e-8 && residual_worst <= 1e-6;

    // Rolle inequality over 50 randomized disconjugate pairs
    let mut rolle_count = 0usize;
    let mut rolle_ok = true;
    let mut attempts = 0usize;
    while rolle_count < 50 && attempts < 500 {
        attempts += 1;
        let eq = common::random_equation(&mut rng, 1.0, 2.0);
        let iv = common::random_interval(&mut rng, 0.5, 1.5);
        let verdict = is_disconjugate(&eq, iv, tol()).unwrap();
        if !verdict.is_disconjugate() {
            continue;
        }
        let u = common::random_test_function(&mut rng);
        let report = factorization::generalized_rolle_check(&eq, iv, &u, tol()).unwrap();
        rolle_ok &= report.holds;
        rolle_count += 1;
    }

    // tightness: a cubic under the double integrator achieves k = m - 2
    let tight = factorization::generalized_rolle_check(
        &Equation::parse("0", "0").unwrap(),
        Interval::closed(0.0, 4.0),
        &CoeffExpr::parse("(t-1)*(t-2)*(t-3)").unwrap(),
        tol(),
    )
    .unwrap();
    let tight_ok = tight.m == 3 && tight.k == 1 && tight.holds;

    report(
        7,
        factored_ok && rolle_ok && rolle_count >= 50 && tight_ok,
        &format!(
            "product identity {product_worst:.2e}, factored residual {residual_worst:.2e}, Rolle on {rolle_count} pairs with tight cubic"
        ),
    );
}

#[test]
fn criterion_8_periodic_suite() {
    // the disconjugate-but-periodic instance
    let eq = Equation::parse("0", "sin(t)/(2+sin(t))").unwrap();
    let report8 = periodic::monodromy(&eq, 0.0, 2.0 * PI, tol()).unwrap();
    let unit_ok = report8.unit_eigen_distance <= 1e-6;
    let det_ok = (report8.det - 1.0).abs() <= 1e-7;

    // the damped instance satisfies every hypothesis and stays away from 1
    let damped = Equation::parse("1", "0.2").unwrap();
    let verdict = periodic::check_theorem_periodic(
        &damped,
        2.0 * PI,
        Interval::closed(-20.0, 20.0),
        tol(),
    )
    .unwrap();
    let h = &verdict.hypothesis_report;
    let damped_ok = matches!(verdict.kind, periodic::PeriodicKind::NoNontrivialPeriodic)
        && h.q_sign_ok
        && h.periodicity_ok
        && h.disconjugacy_ok
        && verdict.monodromy.unit_eigen_distance >= 0.1;

    report(
        8,
        unit_ok && det_ok && damped_ok,
        &format!(
            "unit eigenvalue distance {:.2e}, Liouville residual {:.2e}, hypotheses satisfied with spectrum {:.3} from 1",
            report8.unit_eigen_distance,
            (report8.det - 1.0).abs(),
            verdict.monodromy.unit_eigen_distance
        ),
    );
}

#[test]
fn criterion_9_property_suites() {
    let started = Instant::now();

    // Sturm separation: between consecutive zeros of one solution, every
    // independent solution has exactly one zero
    let mut rng = StdRng::seed_from_u64(301);
    for trial in 0..50 {
        let p = common::random_trig(&mut rng, 0.4);
        let q0 = rng.random_range(1.2..3.0);
        let q1 = rng.random_range(-0.3..0.3);
        let w = rng.random_range(0.3..1.5);
        let q = CoeffExpr::parse(&format!("{q0}+{q1}*sin({w}*t)")).unwrap();
        let eq = Equation::new(p, q, Interval::real_line());
        let a = rng.random_range(-1.0..1.0);
        let traj = ode::integrate_ivp(&eq, a, 0.0, 1.0, a + 12.0, tol()).unwrap();
        let zeros = ode::find_zeros(&traj, Interval::closed(a, a + 12.0), 1e-12);
        let zs = zeros.simple_zeros();
        let interior: Vec<f64> = zs.into_iter().filter(|z| *z > a + 1e-9).collect();
        assert!(
            interior.len() >= 2,
            "trial {trial}: oscillation guarantee failed"
        );
        let (z1, z2) = (interior[0], interior[1]);
        let theta: f64 = rng.random_range(0.15..1.4);
        let other = ode::integrate_ivp(&eq, a, theta.cos(), theta.sin(), a + 12.0, tol()).unwrap();
        let slack = 1e-7 * (1.0 + z2.abs());
        let count = ode::find_zeros(&other, Interval::closed(z1, z2), 1e-12)
            .simple_zeros()
            .into_iter()
            .filter(|z| *z > z1 + slack && *z < z2 - slack)
            .count();
        assert_eq!(count, 1, "trial {trial}: separation failed on ({z1}, {z2})");
    }

    // Comparison: lowering q preserves disconjugacy
    let mut exercised = 0usize;
    for _ in 0..50 {
        let p = common::random_trig(&mut rng, 0.5);
        let q2 = common::random_coeff(&mut rng, 3.0);
        let d0 = rng.random_range(0.0..2.0);
        let d1 = rng.random_range(0.0..1.0);
        let q1 = CoeffExpr::parse(&format!("({q2})-({d0}+{d1}*t^2)")).unwrap();
        let iv = common::random_interval(&mut rng, 0.5, 1.2);
        let upper = Equation::new(p.clone(), q2, Interval::real_line());
        let lower = Equation::new(p, q1, Interval::real_line());
        if is_disconjugate(&upper, iv, tol()).unwrap().is_disconjugate() {
            exercised += 1;
            assert!(
                is_disconjugate(&lower, iv, tol()).unwrap().is_disconjugate(),
                "comparison failed on {iv}"
            );
        }
    }
    assert!(exercised >= 15, "comparison only exercised {exercised} times");

    // Monotonicity and inversion of the conjugate-point maps
    let eq_b = eq3b(1.0);
    let eq_a = eq3a(2.0);
    for trial in 0..50 {
        let (eq, lo, hi): (&Equation, f64, f64) = match trial % 3 {
            0 => (&eq_b, -2.0, 0.4),
            1 => (&eq_a, -3.0, -0.8),
            _ => {
                // harmonic-type oscillator: rho maps are shifts
                (&eq_b, -1.5, 0.3)
            }
        };
        let a1 = rng.random_range(lo..hi);
        let a2 = rng.random_range(a1..hi + 1e-9);
        let r1 = rho_plus(eq, a1, a1 + 200.0, tol()).unwrap();
        let r2 = rho_plus(eq, a2, a2 + 200.0, tol()).unwrap();
        assert!(r1.is_finite() && r2.is_finite());
        if a2 - a1 > 1e-7 {
            assert!(
                r2.value > r1.value,
                "monotonicity failed: rho({a1}) = {} vs rho({a2}) = {}",
                r1.value,
                r2.value
            );
        }
        let back = rho_minus(eq, r1.value, r1.value - 200.0, tol()).unwrap();
        assert!(back.is_finite());
        assert!(
            (back.value - a1).abs() <= 1e-6 * (1.0 + a1.abs()),
            "inversion failed at {a1}: came back to {}",
            back.value
        );
    }

    // Abel identity: determinant Wronskian ratio equals exp(-int p)
    for _ in 0..50 {
        let eq = Equation::new(
            common::random_coeff(&mut rng, 1.5),
            common::random_coeff(&mut rng, 2.0),
            Interval::real_line(),
        );
        let a = rng.random_range(-2.0..2.0);
        let t = a + rng.random_range(0.2..3.0);
        let w = ode::wronskian_ratio(&eq, a, t, tol()).unwrap();
        assert!(
            w.relative_disagreement() <= 1e-6,
            "Abel identity off by {}",
            w.relative_disagreement()
        );
    }

    let elapsed = started.elapsed().as_secs_f64();
    report(
        9,
        elapsed < 300.0,
        &format!("separation, comparison, monotonicity/inversion, Abel identity (50 instances each) in {elapsed:.1}s"),
    );
}

#[test]
fn catalog_known_facts_all_pass() {
    // the executable catalog is part of the acceptance surface
    let outcomes = catalog::run_all(&disconj::Params::new(), tol()).unwrap();
    let failures: Vec<_> = outcomes.iter().filter(|o| !o.pass).collect();
    assert!(failures.is_empty(), "catalog failures: {failures:?}");
    // the ord2_11 periodic witness must reproduce itself after one period
    let eq = Equation::parse("0", "sin(t)/(2+sin(t))").unwrap();
    let verdict = periodic::check_theorem_periodic(
        &eq,
        2.0 * PI,
        Interval::closed(-20.0, 20.0),
        tol(),
    )
    .unwrap();
    if let periodic::PeriodicKind::HasPeriodic { witness } = verdict.kind {
        let roundtrip = periodic::witness_roundtrip(&eq, 0.0, 2.0 * PI, witness, tol()).unwrap();
        assert!(roundtrip <= 1e-6);
    } else {
        panic!("expected a periodic witness");
    }
}

#[test]
fn brute_force_oracle_agreement() {
    // the initial-angle sweep is the independent cross-check of the single
    // shot decision
    let cases = [
        (Equation::parse("0", "1").unwrap(), 0.0, 3.0),
        (Equation::parse("0", "1").unwrap(), 0.0, 7.0),
        (eq3b(1.0), -1.0, 0.9),
        (Equation::parse("-t/2", "t^2/16").unwrap(), 0.5, 7.0),
    ];
    for (eq, lo, hi) in cases {
        let r =
            conjugacy::crosscheck_bruteforce(&eq, Interval::closed(lo, hi), 32, tol()).unwrap();
        assert!(r.agrees, "disagreement on [{lo}, {hi}]: {r:?}");
    }
}
