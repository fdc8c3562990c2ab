//! Exact inverses of Q1 operators that factor as Kronecker products on
//! uniform grids.
//!
//! On a uniform lattice the Q1 mass matrix is `M₁ ⊗ M₁ (⊗ M₁)` and the
//! stiffness matrix is `K₁ ⊗ M₁ ⊗ M₁ + M₁ ⊗ K₁ ⊗ M₁ + M₁ ⊗ M₁ ⊗ K₁`, with
//! the 1D factors
//!
//! ```text
//! M₁ = h/6 · tridiag(1, 4, 1)   (end diagonals 2)
//! K₁ = 1/h · tridiag(-1, 2, -1) (end diagonals 1)
//! ```
//!
//! Both are used as preconditioners: the Krylov solvers keep the residual
//! contract while converging in one or two iterations.

use crate::grid::StructuredGrid;
use crate::krylov::Preconditioner;
use crate::real::Real;

/// Applies a dense `len × len` matrix along one lattice axis.
///
/// With `transpose = false`: `out[.., j, ..] = Σ_i mat[i][j] · data[.., i, ..]`,
/// otherwise `out[.., i, ..] = Σ_j mat[i][j] · data[.., j, ..]`.
fn apply_along_axis<T: Real>(
    data: &[T],
    out: &mut [T],
    dims: [usize; 3],
    axis: usize,
    mat: &[T],
    transpose: bool,
) {
    let len = dims[axis];
    let inner: usize = dims[..axis].iter().product();
    let outer: usize = dims[axis + 1..].iter().product();
    out.iter_mut().for_each(|v| *v = T::zero());
    for o in 0..outer {
        let base = o * len * inner;
        for j in 0..len {
            let dst = base + j * inner;
            for i in 0..len {
                let c = if transpose { mat[j * len + i] } else { mat[i * len + j] };
                if c == T::zero() {
                    continue;
                }
                let src = base + i * inner;
                for t in 0..inner {
                    out[dst + t] += c * data[src + t];
                }
            }
        }
    }
}

/// Exact inverse of the consistent mass matrix restricted to interior nodes.
///
/// Boundary entries are passed through unchanged, matching operators whose
/// Dirichlet rows are identity rows. The result is multiplied by `scale`.
#[derive(Debug, Clone)]
pub struct TensorMassInverse<T> {
    dims: [usize; 3],
    dim: usize,
    // forward-elimination factors of the interior 1D tridiagonal
    diag_inv: Vec<T>,
    upper: Vec<T>,
    off: T,
    scale: T,
}

impl<T: Real> TensorMassInverse<T> {
    pub fn new(grid: &StructuredGrid<T>) -> Self {
        let h = grid.h();
        let m = grid.n_per_axis().saturating_sub(1);
        let d = T::lit(2.0 / 3.0) * h;
        let off = h / T::lit(6.0);
        // Thomas factorisation of tridiag(off, d, off) of size m
        let mut diag_inv = vec![T::zero(); m];
        let mut upper = vec![T::zero(); m];
        for i in 0..m {
            let piv = if i == 0 { d } else { d - off * upper[i - 1] };
            diag_inv[i] = T::one() / piv;
            upper[i] = off / piv;
        }
        Self {
            dims: grid.nodes_per_axis(),
            dim: grid.dim(),
            diag_inv,
            upper,
            off,
            scale: T::one(),
        }
    }

    pub fn with_scale(mut self, scale: T) -> Self {
        self.scale = scale;
        self
    }

    /// In-place solve along every interior line of one axis.
    fn solve_axis(&self, z: &mut [T], axis: usize) {
        let dims = self.dims;
        let m = self.diag_inv.len();
        let stride: usize = dims[..axis].iter().product();
        let (a1, a2) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let interior = |a: usize| -> std::ops::Range<usize> {
            if a < self.dim {
                1..dims[a] - 1
            } else {
                0..1
            }
        };
        let mut line = vec![T::zero(); m];
        for c2 in interior(a2) {
            for c1 in interior(a1) {
                let mut c = [0usize; 3];
                c[a1] = c1;
                c[a2] = c2;
                c[axis] = 1;
                let start = c[0] + dims[0] * (c[1] + dims[1] * c[2]);
                for (i, l) in line.iter_mut().enumerate() {
                    *l = z[start + i * stride];
                }
                // forward sweep
                line[0] *= self.diag_inv[0];
                for i in 1..m {
                    line[i] = (line[i] - self.off * line[i - 1]) * self.diag_inv[i];
                }
                // back substitution
                for i in (0..m.saturating_sub(1)).rev() {
                    let next = line[i + 1];
                    line[i] -= self.upper[i] * next;
                }
                for (i, l) in line.iter().enumerate() {
                    z[start + i * stride] = *l;
                }
            }
        }
    }
}

impl<T: Real> Preconditioner<T> for TensorMassInverse<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
        if self.diag_inv.is_empty() {
            return;
        }
        for axis in 0..self.dim {
            self.solve_axis(z, axis);
        }
        let np = self.dims;
        for k in 0..np[2] {
            for j in 0..np[1] {
                for i in 0..np[0] {
                    let c = [i, j, k];
                    let idx = i + np[0] * (j + np[1] * k);
                    let boundary = (0..self.dim).any(|a| c[a] == 0 || c[a] == np[a] - 1);
                    if boundary {
                        z[idx] = r[idx];
                    } else {
                        z[idx] *= self.scale;
                    }
                }
            }
        }
    }
}

/// Pseudo-inverse of the pure-Neumann Q1 stiffness matrix by fast
/// diagonalisation.
///
/// The generalised 1D eigenvectors `K₁ v = λ M₁ v` are the discrete cosines
/// `v_j(i) = cos(jπ i / n)` with `λ_j = 6 (1 - cos θ_j) / (h² (2 + cos θ_j))`,
/// `θ_j = jπ/n`. The constant mode is dropped, so the output always has zero
/// lumped-mass mean.
#[derive(Debug, Clone)]
pub struct NeumannPoissonInverse<T> {
    dims: [usize; 3],
    dim: usize,
    /// `M₁`-orthonormal eigenvectors, row-major `vecs[i * len + j] = v_j(i)`.
    vecs: Vec<T>,
    eig: Vec<T>,
}

impl<T: Real> NeumannPoissonInverse<T> {
    pub fn new(grid: &StructuredGrid<T>) -> Self {
        let n = grid.n_per_axis();
        let len = n + 1;
        let h = grid.h().as_f64();
        let mut vecs = vec![T::zero(); len * len];
        let mut eig = vec![T::zero(); len];
        for j in 0..len {
            let theta = std::f64::consts::PI * j as f64 / n as f64;
            let v: Vec<f64> = (0..len).map(|i| (theta * i as f64).cos()).collect();
            // vᵀ M₁ v
            let mut norm = 0.0;
            for i in 0..len {
                let diag = if i == 0 || i == n { 2.0 } else { 4.0 };
                let mut mv = diag * v[i];
                if i > 0 {
                    mv += v[i - 1];
                }
                if i < n {
                    mv += v[i + 1];
                }
                norm += v[i] * mv * h / 6.0;
            }
            let s = 1.0 / norm.sqrt();
            for i in 0..len {
                vecs[i * len + j] = T::lit(v[i] * s);
            }
            eig[j] = T::lit(6.0 * (1.0 - theta.cos()) / (h * h * (2.0 + theta.cos())));
        }
        Self {
            dims: grid.nodes_per_axis(),
            dim: grid.dim(),
            vecs,
            eig,
        }
    }
}

impl<T: Real> Preconditioner<T> for NeumannPoissonInverse<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        let mut a = r.to_vec();
        let mut b = vec![T::zero(); r.len()];
        for axis in 0..self.dim {
            apply_along_axis(&a, &mut b, self.dims, axis, &self.vecs, false);
            std::mem::swap(&mut a, &mut b);
        }
        let d = self.dims;
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    let idx = i + d[0] * (j + d[1] * k);
                    let mut lam = self.eig[i] + self.eig[j];
                    if self.dim == 3 {
                        lam += self.eig[k];
                    }
                    a[idx] = if lam > T::zero() { a[idx] / lam } else { T::zero() };
                }
            }
        }
        for axis in 0..self.dim {
            apply_along_axis(&a, &mut b, self.dims, axis, &self.vecs, true);
            std::mem::swap(&mut a, &mut b);
        }
        z.copy_from_slice(&a);
    }
}
