use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{Expr, Func};

/// Values for coordinates and parameters.
pub struct EvalEnv<'a> {
    pub z: &'a [Complex64],
    pub params: &'a BTreeMap<String, f64>,
}

impl Expr {
    /// Evaluate at a point. Unbound parameters and out-of-range coordinates give NaN.
    pub fn eval(&self, env: &EvalEnv<'_>) -> Complex64 {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        match self {
            Expr::Num(x) => Complex64::new(*x, 0.0),
            Expr::Const(c) => *c,
            Expr::I => Complex64::i(),
            Expr::Var { k, conj } => match env.z.get(*k) {
                Some(v) if *conj => v.conj(),
                Some(v) => *v,
                None => nan,
            },
            Expr::Param(p) => env.params.get(p).map_or(nan, |v| Complex64::new(*v, 0.0)),
            Expr::Neg(a) => -a.eval(env),
            Expr::Add(a, b) => a.eval(env) + b.eval(env),
            Expr::Sub(a, b) => a.eval(env) - b.eval(env),
            Expr::Mul(a, b) => a.eval(env) * b.eval(env),
            Expr::Div(a, b) => a.eval(env) / b.eval(env),
            Expr::Pow(a, p) => a.eval(env).powi(*p),
            Expr::Call(f, a) => {
                let v = a.eval(env);
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Re => Complex64::new(v.re, 0.0),
                    Func::Im => Complex64::new(v.im, 0.0),
                    Func::Abs2 => Complex64::new(v.norm_sqr(), 0.0),
                    Func::Conj => v.conj(),
                }
            }
        }
    }
}
