//! `exp(-iτA) v` for a Hermitian operator given only by its action.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::nambu::C64;

const MAX_KRYLOV: usize = 40;

/// Lanczos with full reorthogonalization. Stops once the tail coefficient of
/// the small-space solution falls below `tol`.
pub(crate) fn expm_apply<F>(apply: F, v: &DVector<C64>, tau: f64, tol: f64) -> DVector<C64>
where
    F: Fn(&DVector<C64>, &mut DVector<C64>),
{
    let beta0 = v.norm();
    if beta0 == 0.0 {
        return v.clone();
    }
    let n = v.len();
    let mut q: Vec<DVector<C64>> = vec![v / C64::new(beta0, 0.0)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = DVector::<C64>::zeros(n);
    let mut coeffs;
    loop {
        let j = q.len() - 1;
        apply(&q[j], &mut w);
        let a = q[j].dotc(&w).re;
        alpha.push(a);
        for qk in &q {
            let p = qk.dotc(&w);
            w.axpy(-p, qk, C64::new(1.0, 0.0));
        }
        let b = w.norm();
        coeffs = small_exp(&alpha, &beta, tau);
        let m = alpha.len();
        let tail = b * coeffs[m - 1].norm() * tau.abs();
        if tail < tol || b < 1e-14 || m >= MAX_KRYLOV.min(n) {
            break;
        }
        beta.push(b);
        q.push(&w / C64::new(b, 0.0));
    }
    let mut out = DVector::<C64>::zeros(n);
    for (k, qk) in q.iter().enumerate().take(coeffs.len()) {
        out.axpy(coeffs[k] * beta0, qk, C64::new(1.0, 0.0));
    }
    out
}

/// First column of `exp(-iτT)` for the tridiagonal `T`.
fn small_exp(alpha: &[f64], beta: &[f64], tau: f64) -> Vec<C64> {
    let m = alpha.len();
    let t = DMatrix::<f64>::from_fn(m, m, |r, c| {
        if r == c {
            alpha[r]
        } else if r == c + 1 {
            beta[c]
        } else if c == r + 1 {
            beta[r]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    (0..m)
        .map(|r| {
            (0..m)
                .map(|k| {
                    let u = eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)];
                    C64::from_polar(u, -tau * eig.eigenvalues[k])
                })
                .sum()
        })
        .collect()
}
