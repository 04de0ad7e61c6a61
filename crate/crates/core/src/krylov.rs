//! Matrix-free Krylov solvers: restarted GMRES and CGLS.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KrylovStats {
    pub iterations: usize,
    /// Final `‖b − Ax‖ / ‖b‖` (CGLS: `‖Aᵀ(b − Ax)‖ / ‖Aᵀb‖`).
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub type Precond<'a> = &'a dyn Fn(&[f64]) -> Vec<f64>;

/// Restarted GMRES with optional right preconditioning (`precond` ≈ `A⁻¹`).
pub fn gmres(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: Option<&[f64]>,
    precond: Option<Precond<'_>>,
    restart: usize,
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, KrylovStats) {
    let n = b.len();
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let precond = |v: &[f64]| -> Vec<f64> {
        match precond {
            Some(m) => m(v),
            None => v.to_vec(),
        }
    };
    let mut total = 0;
    let mut rel;
    loop {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel < tol || total >= max_iter {
            break;
        }
        let m = restart.min(max_iter - total).max(1);
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut hm = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let z = precond(&v[k]);
            let mut w = apply(&z);
            for j in 0..=k {
                hm[j][k] = dot(&w, &v[j]);
                axpy(&mut w, -hm[j][k], &v[j]);
            }
            hm[k + 1][k] = norm(&w);
            for j in 0..k {
                let t = cs[j] * hm[j][k] + sn[j] * hm[j + 1][k];
                hm[j + 1][k] = -sn[j] * hm[j][k] + cs[j] * hm[j + 1][k];
                hm[j][k] = t;
            }
            let d = hm[k][k].hypot(hm[k + 1][k]);
            if d == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = hm[k][k] / d;
            sn[k] = hm[k + 1][k] / d;
            let hk1 = hm[k + 1][k];
            hm[k][k] = d;
            hm[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            if (g[k + 1].abs() / bnorm) < tol || hk1 == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / hk1).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| hm[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / hm[i][i];
        }
        let mut dx = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            axpy(&mut dx, *yj, &v[j]);
        }
        let dx = precond(&dx);
        axpy(&mut x, 1.0, &dx);
        if k_used == 0 {
            break;
        }
    }
    (x, KrylovStats { iterations: total, relative_residual: rel, converged: rel < tol })
}

/// CGLS for `min ‖Ax − b‖`; from a zero start it returns the minimum-norm solution.
pub fn cgls(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    mut apply_t: impl FnMut(&[f64]) -> Vec<f64>,
    b: &[f64],
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, KrylovStats) {
    let mut r = b.to_vec();
    let mut s = apply_t(&r);
    let mut x = vec![0.0; s.len()];
    let s0 = norm(&s).max(f64::MIN_POSITIVE);
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let mut it = 0;
    let mut rel = gamma.sqrt() / s0;
    while it < max_iter && rel >= tol {
        let q = apply(&p);
        let qq = dot(&q, &q);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &q);
        s = apply_t(&r);
        let gnew = dot(&s, &s);
        it += 1;
        rel = gnew.sqrt() / s0;
        let beta = gnew / gamma;
        gamma = gnew;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
    }
    (x, KrylovStats { iterations: it, relative_residual: rel, converged: rel < tol })
}
