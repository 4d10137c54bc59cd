//! Lanczos approximation of `exp(-iHt) v` for Hermitian `H`.
//!
//! The time interval is split into substeps. Each substep builds an
//! orthonormal Krylov basis `V_m` (full reorthogonalization), diagonalizes
//! the real tridiagonal projection `T_m`, and applies `V_m exp(-iT_m τ) e_1`.
//! A substep is accepted when the a-posteriori estimate
//! `β_{m+1} |e_m^T exp(-iT_m τ) e_1|` falls below the tolerance, otherwise
//! `τ` is halved.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

type C64 = Complex64;

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    /// Maximum Krylov dimension per substep.
    pub dim: usize,
    /// Target error relative to `|v|`, accumulated over the whole interval.
    pub tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { dim: 30, tol: 1e-12 }
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Lanczos basis and tridiagonal coefficients started from `v / |v|`.
struct Lanczos {
    basis: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Norm of the residual after the last vector; zero on breakdown.
    residual: f64,
}

fn lanczos<A>(apply: &A, v: &[C64], beta0: f64, dim: usize) -> Lanczos
where
    A: Fn(&[C64], &mut [C64]),
{
    let n = v.len();
    let mut basis: Vec<Vec<C64>> = vec![v.iter().map(|x| x / beta0).collect()];
    let mut alpha = Vec::with_capacity(dim);
    let mut beta = Vec::with_capacity(dim);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut residual = 0.0;
    let mut scale = 1e-300_f64;
    for j in 0..dim.min(n) {
        apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        // Two passes of classical Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let proj = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= proj * qi;
                }
            }
        }
        let b = norm(&w);
        if j + 1 == dim.min(n) {
            residual = b;
            break;
        }
        scale = scale.max(a.abs() + b);
        if b <= 1e-13 * scale {
            residual = 0.0;
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Lanczos {
        basis,
        alpha,
        beta,
        residual,
    }
}

/// Returns `exp(-i H t) v`, with `apply(x, y)` writing `H x` into `y`.
pub fn expm_multiply<A>(apply: A, v: &[C64], t: f64, opts: KrylovOptions) -> Vec<C64>
where
    A: Fn(&[C64], &mut [C64]),
{
    let mut x = v.to_vec();
    let total = t;
    let mut done = 0.0;
    let mut tau = total;
    let rate = opts.tol * norm(v) / total.abs().max(f64::MIN_POSITIVE);
    while (total - done).abs() > 0.0 {
        let beta0 = norm(&x);
        if beta0 == 0.0 {
            return x;
        }
        let lz = lanczos(&apply, &x, beta0, opts.dim);
        let m = lz.alpha.len();
        let mut tri = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            tri[(i, i)] = lz.alpha[i];
            if i + 1 < m {
                tri[(i, i + 1)] = lz.beta[i];
                tri[(i + 1, i)] = lz.beta[i];
            }
        }
        let eig = SymmetricEigen::new(tri);
        let remaining = total - done;
        if tau.abs() > remaining.abs() {
            tau = remaining;
        }
        loop {
            // y = exp(-i T tau) e_1
            let coeffs: Vec<C64> = (0..m)
                .map(|i| {
                    (0..m)
                        .map(|k| {
                            let vk = &eig.eigenvectors;
                            C64::from_polar(vk[(i, k)] * vk[(0, k)], -eig.eigenvalues[k] * tau)
                        })
                        .sum()
                })
                .collect();
            let err = lz.residual * coeffs[m - 1].norm() * beta0;
            // The estimate itself carries rounding of order m ε β_{m+1} |v|.
            let floor = 4.0 * m as f64 * f64::EPSILON * (1.0 + lz.residual) * beta0;
            let share = (rate * tau.abs()).max(floor);
            if err <= share || tau.abs() < 1e-12 * total.abs() {
                let mut next = vec![C64::new(0.0, 0.0); x.len()];
                for (q, c) in lz.basis.iter().zip(&coeffs) {
                    let s = c * beta0;
                    for (ni, qi) in next.iter_mut().zip(q) {
                        *ni += s * qi;
                    }
                }
                x = next;
                done += tau;
                if err < share * 1e-3 {
                    tau *= 2.0;
                }
                break;
            }
            tau *= 0.5;
        }
    }
    x
}
