//! Coefficient expressions: parsing, evaluation, and exact symbolic
//! differentiation of functions of one real variable `t`.
//!
//! Expressions may contain named parameters (`A`, `b`, `gamma`, ...) that are
//! bound to numeric values at analysis time through a [`Params`] map. An
//! unbound parameter is an evaluation error, not a silent NaN.

mod parse;

pub use parse::ParseError;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Parameter bindings used when evaluating a [`CoeffExpr`].
pub type Params = BTreeMap<String, f64>;

/// Unary function nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Cot,
    Exp,
    Ln,
    Sinh,
    Cosh,
    Tanh,
    Abs,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Cot => "cot",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "cot" => Func::Cot,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Expression tree node. Binary arithmetic is explicit; implicit
/// multiplication is rejected by the parser.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// The independent variable `t`.
    Var,
    /// A named parameter bound at evaluation time.
    Param(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// `^` is right-associative.
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Fn1(Func, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

/// Evaluation failure. Division by zero, logarithms of non-positive numbers
/// and similar domain violations are reported explicitly.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero at t = {t}")]
    DivisionByZero { t: f64 },
    #[error("ln of non-positive value {value} at t = {t}")]
    LnNonPositive { t: f64, value: f64 },
    #[error("sqrt of negative value {value} at t = {t}")]
    SqrtNegative { t: f64, value: f64 },
    #[error("negative base {base} raised to non-integer exponent {exponent} at t = {t}")]
    PowDomain { t: f64, base: f64, exponent: f64 },
    #[error("unbound parameter `{name}`")]
    UnboundParam { name: String },
    #[error("non-finite result at t = {t}")]
    NonFinite { t: f64 },
}

/// Differentiation failure: only smooth node kinds are differentiable.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum DiffError {
    #[error("expression contains non-differentiable node `{node}`")]
    NonDifferentiable { node: &'static str },
}

/// A parsed coefficient expression in the variable `t`.
///
/// Values are immutable after construction and evaluation is a pure
/// function, so expressions may be shared freely between concurrent
/// analyses.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffExpr {
    root: Expr,
}

impl CoeffExpr {
    pub fn new(root: Expr) -> Self {
        CoeffExpr { root }
    }

    /// Parse an infix expression. `^` is right-associative, `pi` is the
    /// circle constant, and any identifier that is not `t`, `pi` or a known
    /// function name becomes a named parameter.
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        parse::parse(src).map(CoeffExpr::new)
    }

    pub fn constant(c: f64) -> Self {
        CoeffExpr::new(Expr::Const(c))
    }

    pub fn var() -> Self {
        CoeffExpr::new(Expr::Var)
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    /// IEEE double-precision evaluation at `t` with the given parameter map.
    pub fn eval(&self, t: f64, params: &Params) -> Result<f64, EvalError> {
        eval_node(&self.root, t, params)
    }

    /// Exact symbolic derivative with respect to `t`. `abs`, `min` and `max`
    /// nodes are rejected.
    pub fn differentiate(&self) -> Result<CoeffExpr, DiffError> {
        diff_node(&self.root).map(CoeffExpr::new)
    }

    /// Whether any node depends on the variable `t`.
    pub fn depends_on_t(&self) -> bool {
        depends_on_t(&self.root)
    }

    /// Names of all parameters appearing in the tree.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        collect_params(&self.root, &mut names);
        names.sort();
        names.dedup();
        names
    }

    /// Canonical text form with full parenthesization; re-parsing it yields
    /// a structurally identical tree.
    pub fn serialize(&self) -> String {
        self.to_string()
    }

    /// Replace every occurrence of the variable `t` by `replacement`.
    pub fn substitute_var(&self, replacement: &Expr) -> CoeffExpr {
        CoeffExpr::new(subst(&self.root, replacement))
    }
}

fn subst(node: &Expr, replacement: &Expr) -> Expr {
    match node {
        Expr::Var => replacement.clone(),
        Expr::Const(_) | Expr::Param(_) => node.clone(),
        Expr::Add(a, b) => Expr::Add(bx(subst(a, replacement)), bx(subst(b, replacement))),
        Expr::Sub(a, b) => Expr::Sub(bx(subst(a, replacement)), bx(subst(b, replacement))),
        Expr::Mul(a, b) => Expr::Mul(bx(subst(a, replacement)), bx(subst(b, replacement))),
        Expr::Div(a, b) => Expr::Div(bx(subst(a, replacement)), bx(subst(b, replacement))),
        Expr::Pow(a, b) => Expr::Pow(bx(subst(a, replacement)), bx(subst(b, replacement))),
        Expr::Neg(a) => Expr::Neg(bx(subst(a, replacement))),
        Expr::Fn1(f, a) => Expr::Fn1(*f, bx(subst(a, replacement))),
        Expr::Min(a, b) => Expr::Min(bx(subst(a, replacement)), bx(subst(b, replacement))),
        Expr::Max(a, b) => Expr::Max(bx(subst(a, replacement)), bx(subst(b, replacement))),
    }
}

impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(&self.root, f)
    }
}

impl Serialize for CoeffExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CoeffExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let src = String::deserialize(d)?;
        CoeffExpr::parse(&src).map_err(serde::de::Error::custom)
    }
}

fn eval_node(node: &Expr, t: f64, params: &Params) -> Result<f64, EvalError> {
    let finite = |v: f64| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { t })
        }
    };
    match node {
        Expr::Const(c) => Ok(*c),
        Expr::Var => Ok(t),
        Expr::Param(name) => params
            .get(name)
            .copied()
            .ok_or_else(|| EvalError::UnboundParam { name: name.clone() }),
        Expr::Add(a, b) => finite(eval_node(a, t, params)? + eval_node(b, t, params)?),
        Expr::Sub(a, b) => finite(eval_node(a, t, params)? - eval_node(b, t, params)?),
        Expr::Mul(a, b) => finite(eval_node(a, t, params)? * eval_node(b, t, params)?),
        Expr::Div(a, b) => {
            let num = eval_node(a, t, params)?;
            let den = eval_node(b, t, params)?;
            if den == 0.0 {
                return Err(EvalError::DivisionByZero { t });
            }
            finite(num / den)
        }
        Expr::Pow(base, expo) => {
            let b = eval_node(base, t, params)?;
            let e = eval_node(expo, t, params)?;
            if b < 0.0 && e.fract() != 0.0 {
                return Err(EvalError::PowDomain {
                    t,
                    base: b,
                    exponent: e,
                });
            }
            if b == 0.0 && e < 0.0 {
                return Err(EvalError::DivisionByZero { t });
            }
            finite(b.powf(e))
        }
        Expr::Neg(a) => Ok(-eval_node(a, t, params)?),
        Expr::Fn1(func, a) => {
            let x = eval_node(a, t, params)?;
            match func {
                Func::Sin => finite(x.sin()),
                Func::Cos => finite(x.cos()),
                Func::Tan => finite(x.tan()),
                Func::Cot => {
                    let s = x.sin();
                    if s == 0.0 {
                        return Err(EvalError::DivisionByZero { t });
                    }
                    finite(x.cos() / s)
                }
                Func::Exp => finite(x.exp()),
                Func::Ln => {
                    if x <= 0.0 {
                        return Err(EvalError::LnNonPositive { t, value: x });
                    }
                    finite(x.ln())
                }
                Func::Sinh => finite(x.sinh()),
                Func::Cosh => finite(x.cosh()),
                Func::Tanh => finite(x.tanh()),
                Func::Abs => finite(x.abs()),
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(EvalError::SqrtNegative { t, value: x });
                    }
                    finite(x.sqrt())
                }
            }
        }
        Expr::Min(a, b) => Ok(eval_node(a, t, params)?.min(eval_node(b, t, params)?)),
        Expr::Max(a, b) => Ok(eval_node(a, t, params)?.max(eval_node(b, t, params)?)),
    }
}

fn depends_on_t(node: &Expr) -> bool {
    match node {
        Expr::Const(_) | Expr::Param(_) => false,
        Expr::Var => true,
        Expr::Add(a, b)
        | Expr::Sub(a, b)
        | Expr::Mul(a, b)
        | Expr::Div(a, b)
        | Expr::Pow(a, b)
        | Expr::Min(a, b)
        | Expr::Max(a, b) => depends_on_t(a) || depends_on_t(b),
        Expr::Neg(a) | Expr::Fn1(_, a) => depends_on_t(a),
    }
}

fn collect_params(node: &Expr, out: &mut Vec<String>) {
    match node {
        Expr::Param(name) => out.push(name.clone()),
        Expr::Const(_) | Expr::Var => {}
        Expr::Add(a, b)
        | Expr::Sub(a, b)
        | Expr::Mul(a, b)
        | Expr::Div(a, b)
        | Expr::Pow(a, b)
        | Expr::Min(a, b)
        | Expr::Max(a, b) => {
            collect_params(a, out);
            collect_params(b, out);
        }
        Expr::Neg(a) | Expr::Fn1(_, a) => collect_params(a, out),
    }
}

fn bx(e: Expr) -> Box<Expr> {
    Box::new(e)
}

fn diff_node(node: &Expr) -> Result<Expr, DiffError> {
    Ok(match node {
        Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
        Expr::Var => Expr::Const(1.0),
        Expr::Add(a, b) => Expr::Add(bx(diff_node(a)?), bx(diff_node(b)?)),
        Expr::Sub(a, b) => Expr::Sub(bx(diff_node(a)?), bx(diff_node(b)?)),
        Expr::Mul(a, b) => {
            // (ab)' = a'b + ab'
            let da = diff_node(a)?;
            let db = diff_node(b)?;
            Expr::Add(
                bx(Expr::Mul(bx(da), b.clone())),
                bx(Expr::Mul(a.clone(), bx(db))),
            )
        }
        Expr::Div(a, b) => {
            // (a/b)' = (a'b - ab')/b^2
            let da = diff_node(a)?;
            let db = diff_node(b)?;
            Expr::Div(
                bx(Expr::Sub(
                    bx(Expr::Mul(bx(da), b.clone())),
                    bx(Expr::Mul(a.clone(), bx(db))),
                )),
                bx(Expr::Pow(b.clone(), bx(Expr::Const(2.0)))),
            )
        }
        Expr::Pow(base, expo) => {
            let dbase = diff_node(base)?;
            if !depends_on_t(expo) {
                // d/dt f^n = n f^(n-1) f'  (n constant in t)
                Expr::Mul(
                    bx(Expr::Mul(
                        expo.clone(),
                        bx(Expr::Pow(
                            base.clone(),
                            bx(Expr::Sub(expo.clone(), bx(Expr::Const(1.0)))),
                        )),
                    )),
                    bx(dbase),
                )
            } else {
                // d/dt f^g = f^g (g' ln f + g f'/f)
                let dexpo = diff_node(expo)?;
                Expr::Mul(
                    bx(node.clone()),
                    bx(Expr::Add(
                        bx(Expr::Mul(bx(dexpo), bx(Expr::Fn1(Func::Ln, base.clone())))),
                        bx(Expr::Div(
                            bx(Expr::Mul(expo.clone(), bx(dbase))),
                            base.clone(),
                        )),
                    )),
                )
            }
        }
        Expr::Neg(a) => Expr::Neg(bx(diff_node(a)?)),
        Expr::Fn1(func, a) => {
            let da = diff_node(a)?;
            let outer = match func {
                Func::Sin => Expr::Fn1(Func::Cos, a.clone()),
                Func::Cos => Expr::Neg(bx(Expr::Fn1(Func::Sin, a.clone()))),
                Func::Tan => Expr::Div(
                    bx(Expr::Const(1.0)),
                    bx(Expr::Pow(
                        bx(Expr::Fn1(Func::Cos, a.clone())),
                        bx(Expr::Const(2.0)),
                    )),
                ),
                Func::Cot => Expr::Neg(bx(Expr::Div(
                    bx(Expr::Const(1.0)),
                    bx(Expr::Pow(
                        bx(Expr::Fn1(Func::Sin, a.clone())),
                        bx(Expr::Const(2.0)),
                    )),
                ))),
                Func::Exp => Expr::Fn1(Func::Exp, a.clone()),
                Func::Ln => Expr::Div(bx(Expr::Const(1.0)), a.clone()),
                Func::Sinh => Expr::Fn1(Func::Cosh, a.clone()),
                Func::Cosh => Expr::Fn1(Func::Sinh, a.clone()),
                Func::Tanh => Expr::Div(
                    bx(Expr::Const(1.0)),
                    bx(Expr::Pow(
                        bx(Expr::Fn1(Func::Cosh, a.clone())),
                        bx(Expr::Const(2.0)),
                    )),
                ),
                Func::Sqrt => Expr::Div(
                    bx(Expr::Const(1.0)),
                    bx(Expr::Mul(
                        bx(Expr::Const(2.0)),
                        bx(Expr::Fn1(Func::Sqrt, a.clone())),
                    )),
                ),
                Func::Abs => return Err(DiffError::NonDifferentiable { node: "abs" }),
            };
            Expr::Mul(bx(outer), bx(da))
        }
        Expr::Min(_, _) => return Err(DiffError::NonDifferentiable { node: "min" }),
        Expr::Max(_, _) => return Err(DiffError::NonDifferentiable { node: "max" }),
    })
}

fn fmt_node(node: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Expr::Const(c) => {
            if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                // keep the canonical text re-parseable; the parser itself
                // never produces negative constants
                write!(f, "(0-{})", -c)
            } else {
                write!(f, "{}", c)
            }
        }
        Expr::Var => write!(f, "t"),
        Expr::Param(name) => write!(f, "{}", name),
        Expr::Add(a, b) => fmt_binary(f, a, "+", b),
        Expr::Sub(a, b) => fmt_binary(f, a, "-", b),
        Expr::Mul(a, b) => fmt_binary(f, a, "*", b),
        Expr::Div(a, b) => fmt_binary(f, a, "/", b),
        Expr::Pow(a, b) => fmt_binary(f, a, "^", b),
        Expr::Neg(a) => {
            write!(f, "(-")?;
            fmt_node(a, f)?;
            write!(f, ")")
        }
        Expr::Fn1(func, a) => {
            write!(f, "{}(", func.name())?;
            fmt_node(a, f)?;
            write!(f, ")")
        }
        Expr::Min(a, b) => fmt_call2(f, "min", a, b),
        Expr::Max(a, b) => fmt_call2(f, "max", a, b),
    }
}

fn fmt_binary(f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr) -> fmt::Result {
    write!(f, "(")?;
    fmt_node(a, f)?;
    write!(f, "{}", op)?;
    fmt_node(b, f)?;
    write!(f, ")")
}

fn fmt_call2(f: &mut fmt::Formatter<'_>, name: &str, a: &Expr, b: &Expr) -> fmt::Result {
    write!(f, "{}(", name)?;
    fmt_node(a, f)?;
    write!(f, ",")?;
    fmt_node(b, f)?;
    write!(f, ")")
}
