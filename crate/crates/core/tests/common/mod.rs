//! Shared instance generators for the acceptance and property suites.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use disconj::{CoeffExpr, Equation, Interval};

/// Random polynomial of degree <= 2 with coefficients in [-scale, scale],
/// built as expression text.
pub fn random_poly(rng: &mut StdRng, scale: f64) -> CoeffExpr {
    let c0 = rng.random_range(-scale..scale);
    let c1 = rng.random_range(-scale..scale);
    let c2 = rng.random_range(-scale..scale);
    CoeffExpr::parse(&format!("{c0}+{c1}*t+{c2}*t^2")).unwrap()
}

/// Random single-frequency trigonometric expression.
pub fn random_trig(rng: &mut StdRng, scale: f64) -> CoeffExpr {
    let a = rng.random_range(-scale..scale);
    let b = rng.random_range(-scale..scale);
    let w = rng.random_range(0.3..2.5);
    CoeffExpr::parse(&format!("{a}+{b}*sin({w}*t)")).unwrap()
}

/// Random smooth coefficient: polynomial or trigonometric, even odds.
pub fn random_coeff(rng: &mut StdRng, scale: f64) -> CoeffExpr {
    if rng.random_bool(0.5) {
        random_poly(rng, scale)
    } else {
        random_trig(rng, scale)
    }
}

/// Random equation with smooth coefficients.
pub fn random_equation(rng: &mut StdRng, p_scale: f64, q_scale: f64) -> Equation {
    Equation::new(
        random_coeff(rng, p_scale),
        random_coeff(rng, q_scale),
        Interval::real_line(),
    )
}

/// Random finite interval with the given length range.
pub fn random_interval(rng: &mut StdRng, min_len: f64, max_len: f64) -> Interval {
    let lo = rng.random_range(-2.0..2.0);
    let len = rng.random_range(min_len..max_len);
    Interval::closed(lo, lo + len)
}

/// Random smooth twice-differentiable test function.
pub fn random_test_function(rng: &mut StdRng) -> CoeffExpr {
    let k = rng.random_range(0u8..3);
    match k {
        0 => random_poly(rng, 2.0),
        1 => random_trig(rng, 2.0),
        _ => {
            let a = rng.random_range(-1.0..1.0);
            let b = rng.random_range(0.2..1.5);
            CoeffExpr::parse(&format!("exp({a}*t)*sin({b}*t)+t")).unwrap()
        }
    }
}
