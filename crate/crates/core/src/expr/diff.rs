use super::simplify::{mk_add, mk_call, mk_div, mk_mul, mk_neg, mk_pow, mk_sub, simplify};
use super::{Expr, Func};

/// Differentiation variable: `∂/∂z_k` or, with `conj`, `∂/∂z̄_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wrt {
    pub k: usize,
    pub conj: bool,
}

impl Wrt {
    pub fn z(k: usize) -> Wrt {
        Wrt { k, conj: false }
    }
    pub fn zb(k: usize) -> Wrt {
        Wrt { k, conj: true }
    }
    fn flip(self) -> Wrt {
        Wrt { k: self.k, conj: !self.conj }
    }
}

fn conj(e: Expr) -> Expr {
    mk_call(Func::Conj, e)
}

fn d(e: &Expr, w: Wrt) -> Expr {
    match e {
        Expr::Num(_) | Expr::Const(_) | Expr::I | Expr::Param(_) => Expr::Num(0.0),
        Expr::Var { k, conj } => Expr::Num(if *k == w.k && *conj == w.conj { 1.0 } else { 0.0 }),
        Expr::Neg(a) => mk_neg(d(a, w)),
        Expr::Add(a, b) => mk_add(d(a, w), d(b, w)),
        Expr::Sub(a, b) => mk_sub(d(a, w), d(b, w)),
        Expr::Mul(a, b) => mk_add(
            mk_mul(d(a, w), simplify(b)),
            mk_mul(simplify(a), d(b, w)),
        ),
        Expr::Div(a, b) => {
            let da = d(a, w);
            let db = d(b, w);
            let (a, b) = (simplify(a), simplify(b));
            if db.is_zero() {
                mk_div(da, b)
            } else {
                mk_div(mk_sub(mk_mul(da, b.clone()), mk_mul(a, db)), mk_pow(b, 2))
            }
        }
        Expr::Pow(a, p) => mk_mul(
            mk_mul(Expr::num(*p as f64), mk_pow(simplify(a), p - 1)),
            d(a, w),
        ),
        Expr::Call(f, a) => {
            let da = d(a, w);
            match f {
                Func::Exp => mk_mul(mk_call(Func::Exp, simplify(a)), da),
                Func::Log => mk_div(da, simplify(a)),
                Func::Conj => conj(d(a, w.flip())),
                Func::Re => mk_mul(Expr::Num(0.5), mk_add(da, conj(d(a, w.flip())))),
                Func::Im => mk_mul(
                    Expr::Const(num_complex::Complex64::new(0.0, -0.5)),
                    mk_sub(da, conj(d(a, w.flip()))),
                ),
                Func::Abs2 => {
                    let dflip = d(a, w.flip());
                    let a = simplify(a);
                    mk_add(mk_mul(da, conj(a.clone())), mk_mul(a, conj(dflip)))
                }
            }
        }
    }
}

/// Exact Wirtinger derivative. Treats `z_k` and `z̄_k` as independent variables.
pub fn wirtinger(e: &Expr, w: Wrt) -> Expr {
    simplify(&d(e, w))
}
