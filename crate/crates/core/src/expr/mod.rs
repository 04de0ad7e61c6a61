//! Expression trees over chart coordinates `z_k`, their conjugates and real parameters.
//!
//! Trees are built by [`parse_expr`], printed by their `Display` impl, differentiated
//! with [`wirtinger`] and evaluated with [`Expr::eval`].

mod diff;
mod eval;
pub(crate) mod parse;
mod print;
mod simplify;

pub use diff::{wirtinger, Wrt};
pub use eval::EvalEnv;
pub use parse::{parse_expr, ParseError};
pub use simplify::simplify;

use num_complex::Complex64;

/// Unary functions of the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Exp,
    Log,
    Re,
    Im,
    Abs2,
    Conj,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Re => "re",
            Func::Im => "im",
            Func::Abs2 => "abs2",
            Func::Conj => "conj",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "re" => Func::Re,
            "im" => Func::Im,
            "abs2" => Func::Abs2,
            "conj" => Func::Conj,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Non-negative real literal as written in source.
    Num(f64),
    /// Complex constant; only produced by simplification.
    Const(Complex64),
    /// Imaginary unit `i`.
    I,
    /// Coordinate `z<k+1>` (`conj == false`) or `zb<k+1>`.
    Var { k: usize, conj: bool },
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        if x < 0.0 {
            Expr::Neg(Box::new(Expr::Num(-x)))
        } else {
            Expr::Num(x)
        }
    }
    pub fn z(k: usize) -> Expr {
        Expr::Var { k, conj: false }
    }
    pub fn zb(k: usize) -> Expr {
        Expr::Var { k, conj: true }
    }
    pub fn call(f: Func, e: Expr) -> Expr {
        Expr::Call(f, Box::new(e))
    }
    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
    pub fn add(self, o: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(o))
    }
    pub fn sub(self, o: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(o))
    }
    pub fn mul(self, o: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(o))
    }
    pub fn div(self, o: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(o))
    }
    pub fn pow(self, p: i32) -> Expr {
        Expr::Pow(Box::new(self), p)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Expr::Num(x) => *x == 0.0,
            Expr::Const(c) => c.re == 0.0 && c.im == 0.0,
            _ => false,
        }
    }

    /// Formal complex conjugate, pushed down to the leaves.
    pub fn conjugate(&self) -> Expr {
        match self {
            Expr::Num(x) => Expr::Num(*x),
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::I => Expr::I.neg(),
            Expr::Var { k, conj } => Expr::Var { k: *k, conj: !conj },
            Expr::Param(p) => Expr::Param(p.clone()),
            Expr::Neg(a) => a.conjugate().neg(),
            Expr::Add(a, b) => a.conjugate().add(b.conjugate()),
            Expr::Sub(a, b) => a.conjugate().sub(b.conjugate()),
            Expr::Mul(a, b) => a.conjugate().mul(b.conjugate()),
            Expr::Div(a, b) => a.conjugate().div(b.conjugate()),
            Expr::Pow(a, p) => a.conjugate().pow(*p),
            Expr::Call(f, a) => match f {
                Func::Exp | Func::Log => Expr::call(*f, a.conjugate()),
                Func::Re | Func::Im | Func::Abs2 => self.clone(),
                Func::Conj => (**a).clone(),
            },
        }
    }

    /// Highest coordinate index referenced plus one.
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Var { k, .. } => k + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
            _ => 0,
        }
    }

    pub fn params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(p) => {
                if !out.contains(p) {
                    out.push(p.clone())
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.params(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.params(out);
                b.params(out)
            }
            _ => {}
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
            _ => 1,
        }
    }
}
