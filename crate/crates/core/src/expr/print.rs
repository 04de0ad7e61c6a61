use std::fmt;

use super::Expr;

fn write_num(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    write!(f, "{:?}", x)
}

fn write_prec(e: &Expr, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
    let (prec, open) = match e {
        Expr::Add(..) | Expr::Sub(..) => (1, ctx > 1),
        Expr::Mul(..) | Expr::Div(..) => (2, ctx > 2),
        _ => (4, false),
    };
    if open {
        write!(f, "(")?;
    }
    match e {
        Expr::Num(x) => write_num(f, *x)?,
        Expr::Const(c) => {
            write!(f, "(")?;
            if c.re < 0.0 {
                write!(f, "-")?;
            }
            write_num(f, c.re.abs())?;
            write!(f, " {} ", if c.im < 0.0 { "-" } else { "+" })?;
            write_num(f, c.im.abs())?;
            write!(f, "*i)")?;
        }
        Expr::I => write!(f, "i")?,
        Expr::Var { k, conj } => write!(f, "{}{}", if *conj { "zb" } else { "z" }, k + 1)?,
        Expr::Param(p) => write!(f, "{p}")?,
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_prec(a, f, 3)?;
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            write_prec(a, f, prec)?;
            write!(f, " {} ", if matches!(e, Expr::Add(..)) { "+" } else { "-" })?;
            write_prec(b, f, prec + 1)?;
        }
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            write_prec(a, f, prec)?;
            write!(f, "{}", if matches!(e, Expr::Mul(..)) { "*" } else { "/" })?;
            write_prec(b, f, prec + 1)?;
        }
        Expr::Pow(a, p) => {
            write!(f, "pow(")?;
            write_prec(a, f, 0)?;
            write!(f, ", {p})")?;
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_prec(a, f, 0)?;
            write!(f, ")")?;
        }
    }
    if open {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, f, 0)
    }
}
