use num_complex::Complex64;

use super::{Expr, Func};

fn constant(e: &Expr) -> Option<Complex64> {
    match e {
        Expr::Num(x) => Some(Complex64::new(*x, 0.0)),
        Expr::Const(c) => Some(*c),
        Expr::I => Some(Complex64::i()),
        Expr::Neg(a) => constant(a).map(|c| -c),
        _ => None,
    }
}

fn from_const(c: Complex64) -> Expr {
    if c.im == 0.0 {
        Expr::num(c.re)
    } else {
        Expr::Const(c)
    }
}

fn is_one(e: &Expr) -> bool {
    constant(e) == Some(Complex64::new(1.0, 0.0))
}

fn is_zero(e: &Expr) -> bool {
    constant(e) == Some(Complex64::new(0.0, 0.0))
}

pub(crate) fn mk_neg(a: Expr) -> Expr {
    if let Some(c) = constant(&a) {
        return from_const(-c);
    }
    match a {
        Expr::Neg(x) => *x,
        a => a.neg(),
    }
}

pub(crate) fn mk_add(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (constant(&a), constant(&b)) {
        return from_const(x + y);
    }
    if is_zero(&a) {
        return b;
    }
    if is_zero(&b) {
        return a;
    }
    match b {
        Expr::Neg(y) => mk_sub(a, *y),
        b => a.add(b),
    }
}

pub(crate) fn mk_sub(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (constant(&a), constant(&b)) {
        return from_const(x - y);
    }
    if is_zero(&b) {
        return a;
    }
    if is_zero(&a) {
        return mk_neg(b);
    }
    match b {
        Expr::Neg(y) => a.add(*y),
        b => a.sub(b),
    }
}

pub(crate) fn mk_mul(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (constant(&a), constant(&b)) {
        return from_const(x * y);
    }
    if is_zero(&a) || is_zero(&b) {
        return Expr::Num(0.0);
    }
    if is_one(&a) {
        return b;
    }
    if is_one(&b) {
        return a;
    }
    if constant(&a) == Some(Complex64::new(-1.0, 0.0)) {
        return mk_neg(b);
    }
    if constant(&b) == Some(Complex64::new(-1.0, 0.0)) {
        return mk_neg(a);
    }
    match (a, b) {
        (Expr::Neg(x), Expr::Neg(y)) => mk_mul(*x, *y),
        (Expr::Neg(x), y) | (y, Expr::Neg(x)) if constant(&x).is_none() => mk_neg(mk_mul(*x, y)),
        (a, b) => a.mul(b),
    }
}

pub(crate) fn mk_div(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (constant(&a), constant(&b)) {
        if y != Complex64::new(0.0, 0.0) {
            return from_const(x / y);
        }
    }
    if is_zero(&a) {
        return Expr::Num(0.0);
    }
    if is_one(&b) {
        return a;
    }
    a.div(b)
}

pub(crate) fn mk_pow(a: Expr, p: i32) -> Expr {
    if p == 0 {
        return Expr::Num(1.0);
    }
    if p == 1 {
        return a;
    }
    if let Some(c) = constant(&a) {
        if p > 0 || c != Complex64::new(0.0, 0.0) {
            return from_const(c.powi(p));
        }
    }
    match a {
        Expr::Pow(x, q) => mk_pow(*x, q * p),
        a => a.pow(p),
    }
}

pub(crate) fn mk_call(f: Func, a: Expr) -> Expr {
    if let Some(c) = constant(&a) {
        let v = match f {
            Func::Exp => c.exp(),
            Func::Log if c.re > 0.0 && c.im == 0.0 => Complex64::new(c.re.ln(), 0.0),
            Func::Log => return Expr::call(f, a),
            Func::Re => Complex64::new(c.re, 0.0),
            Func::Im => Complex64::new(c.im, 0.0),
            Func::Abs2 => Complex64::new(c.norm_sqr(), 0.0),
            Func::Conj => c.conj(),
        };
        return from_const(v);
    }
    match (f, a) {
        (Func::Conj, Expr::Var { k, conj }) => Expr::Var { k, conj: !conj },
        (Func::Conj, Expr::Call(Func::Conj, x)) => *x,
        (Func::Conj, x @ Expr::Call(Func::Re | Func::Im | Func::Abs2, _)) => x,
        (Func::Re | Func::Im | Func::Abs2 | Func::Conj, Expr::Neg(x)) => {
            let inner = mk_call(f, *x);
            if f == Func::Abs2 {
                inner
            } else {
                mk_neg(inner)
            }
        }
        (f, a) => Expr::call(f, a),
    }
}

/// Bottom-up algebraic cleanup: constant folding and identity elements.
pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::I | Expr::Var { .. } | Expr::Param(_) => e.clone(),
        Expr::Const(c) => from_const(*c),
        Expr::Neg(a) => mk_neg(simplify(a)),
        Expr::Add(a, b) => mk_add(simplify(a), simplify(b)),
        Expr::Sub(a, b) => mk_sub(simplify(a), simplify(b)),
        Expr::Mul(a, b) => mk_mul(simplify(a), simplify(b)),
        Expr::Div(a, b) => mk_div(simplify(a), simplify(b)),
        Expr::Pow(a, p) => mk_pow(simplify(a), *p),
        Expr::Call(f, a) => mk_call(*f, simplify(a)),
    }
}
