//! Krylov solvers for the linear systems of one pressure-correction step.

use std::fmt;

use crate::error::{check_len, Error, Result};
use crate::fem::NodalField;
use crate::real::{axpy, dot, norm2, Real};
use crate::sparse::CsrMatrix;

/// Square linear map `y = A x`.
pub trait LinearOperator<T> {
    fn size(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
}

impl<T: Real> LinearOperator<T> for CsrMatrix<T> {
    fn size(&self) -> usize {
        self.n_rows()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.spmv_unchecked(x, y);
    }
}

/// Approximate inverse `z = P⁻¹ r`.
pub trait Preconditioner<T> {
    fn apply(&self, r: &[T], z: &mut [T]);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl<T: Real> Preconditioner<T> for Identity {
    fn apply(&self, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
    }
}

/// Diagonal scaling; zero diagonal entries pass the residual through.
#[derive(Debug, Clone)]
pub struct Jacobi<T> {
    inv_diag: Vec<T>,
}

impl<T: Real> Jacobi<T> {
    pub fn new(diag: &[T]) -> Self {
        let inv_diag = diag
            .iter()
            .map(|&d| if d != T::zero() { T::one() / d } else { T::one() })
            .collect();
        Self { inv_diag }
    }

    pub fn from_matrix(a: &CsrMatrix<T>) -> Self {
        Self::new(&a.diagonal())
    }
}

impl<T: Real> Preconditioner<T> for Jacobi<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        for ((zi, ri), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = *ri * *d;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_iter: 2000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidArgument(format!(
                "solver tolerances must be positive and max_iter >= 1: {self:?}"
            )));
        }
        Ok(())
    }

    fn threshold(&self, b_norm: f64) -> f64 {
        (self.rel_tol * b_norm).max(self.abs_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} after {} iterations, residual {:.3e}",
            if self.converged { "converged" } else { "not converged" },
            self.iterations,
            self.residual
        )
    }
}

fn residual<T: Real>(a: &impl LinearOperator<T>, b: &[T], x: &[T], r: &mut [T]) {
    a.apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = *bi - *ri;
    }
}

/// Preconditioned conjugate gradients for symmetric positive (semi)definite systems.
///
/// `x` holds the initial guess on entry and the iterate on return.
/// Non-convergence is reported through [`SolveReport::converged`].
pub fn cg<T: Real>(
    a: &impl LinearOperator<T>,
    b: &[T],
    x: &mut [T],
    cfg: &SolverConfig,
    precond: &dyn Preconditioner<T>,
) -> Result<SolveReport> {
    let n = a.size();
    check_len(n, b.len())?;
    check_len(n, x.len())?;
    cfg.validate()?;
    let tol = cfg.threshold(norm2(b).as_f64());

    let mut r = vec![T::zero(); n];
    residual(a, b, x, &mut r);
    let mut res = norm2(&r).as_f64();
    if res <= tol {
        return Ok(SolveReport {
            iterations: 0,
            residual: res,
            converged: true,
        });
    }
    let mut z = vec![T::zero(); n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut q = vec![T::zero(); n];
    let mut rz = dot(&r, &z);

    for it in 1..=cfg.max_iter {
        a.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq.as_f64() > 0.0) {
            return Ok(SolveReport {
                iterations: it,
                residual: res,
                converged: false,
            });
        }
        let alpha = rz / pq;
        axpy(alpha, &p, x);
        axpy(-alpha, &q, &mut r);
        res = norm2(&r).as_f64();
        if res <= tol {
            return Ok(SolveReport {
                iterations: it,
                residual: res,
                converged: true,
            });
        }
        if !res.is_finite() {
            break;
        }
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = *zi + beta * *pi;
        }
    }
    Ok(SolveReport {
        iterations: cfg.max_iter,
        residual: res,
        converged: false,
    })
}

/// Right-preconditioned BiCGStab for general square systems.
///
/// Breakdown (`ρ = 0` or `ω = 0`) ends the iteration with a non-converged report.
pub fn bicgstab<T: Real>(
    a: &impl LinearOperator<T>,
    b: &[T],
    x: &mut [T],
    cfg: &SolverConfig,
    precond: &dyn Preconditioner<T>,
) -> Result<SolveReport> {
    let n = a.size();
    check_len(n, b.len())?;
    check_len(n, x.len())?;
    cfg.validate()?;
    let tol = cfg.threshold(norm2(b).as_f64());

    let mut r = vec![T::zero(); n];
    residual(a, b, x, &mut r);
    let mut res = norm2(&r).as_f64();
    if res <= tol {
        return Ok(SolveReport {
            iterations: 0,
            residual: res,
            converged: true,
        });
    }
    let r_hat = r.clone();
    let mut p = vec![T::zero(); n];
    let mut v = vec![T::zero(); n];
    let mut p_hat = vec![T::zero(); n];
    let mut s_hat = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    let (mut rho, mut alpha, mut omega) = (T::one(), T::one(), T::one());

    let fail = |it, res| {
        Ok(SolveReport {
            iterations: it,
            residual: res,
            converged: false,
        })
    };

    for it in 1..=cfg.max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == T::zero() || !rho_new.is_finite() {
            return fail(it, res);
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for ((pi, ri), vi) in p.iter_mut().zip(&r).zip(&v) {
            *pi = *ri + beta * (*pi - omega * *vi);
        }
        precond.apply(&p, &mut p_hat);
        a.apply(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == T::zero() {
            return fail(it, res);
        }
        alpha = rho / rv;
        // r now holds s = r - alpha v
        axpy(-alpha, &v, &mut r);
        let s_norm = norm2(&r).as_f64();
        if s_norm <= tol {
            axpy(alpha, &p_hat, x);
            return Ok(SolveReport {
                iterations: it,
                residual: s_norm,
                converged: true,
            });
        }
        precond.apply(&r, &mut s_hat);
        a.apply(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == T::zero() {
            return fail(it, s_norm);
        }
        omega = dot(&t, &r) / tt;
        axpy(alpha, &p_hat, x);
        axpy(omega, &s_hat, x);
        axpy(-omega, &t, &mut r);
        res = norm2(&r).as_f64();
        if res <= tol {
            return Ok(SolveReport {
                iterations: it,
                residual: res,
                converged: true,
            });
        }
        if omega == T::zero() || !res.is_finite() {
            return fail(it, res);
        }
    }
    fail(cfg.max_iter, res)
}

/// Weighted mean of `values`.
pub fn weighted_mean<T: Real>(values: &[T], weights: &[T]) -> T {
    let (mut num, mut den) = (T::zero(), T::zero());
    for (v, w) in values.iter().zip(weights) {
        num += *w * *v;
        den += *w;
    }
    num / den
}

/// Removes the weighted mean in place.
pub fn remove_mean<T: Real>(values: &mut [T], weights: &[T]) {
    let m = weighted_mean(values, weights);
    values.iter_mut().for_each(|v| *v -= m);
}

/// Removes the plain (unweighted) mean, making `values` orthogonal to constants.
pub fn remove_plain_mean<T: Real>(values: &mut [T]) {
    if values.is_empty() {
        return;
    }
    let m = values.iter().copied().sum::<T>() / T::from_usize_lossy(values.len());
    values.iter_mut().for_each(|v| *v -= m);
}

/// `p - (Σ wᵢ pᵢ / Σ wᵢ)`.
pub fn project_zero_mean<T: Real>(p: &NodalField<T>, weights: &[T]) -> Result<NodalField<T>> {
    check_len(p.len(), weights.len())?;
    let total: T = weights.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::InvalidArgument("weights must have positive sum".into()));
    }
    let mut out = p.clone();
    remove_mean(&mut out, weights);
    Ok(out)
}
