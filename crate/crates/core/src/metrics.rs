//! Error norms against manufactured solutions, composite time norms and
//! observed convergence rates.
//!
//! Spatial norms use the 3-point Gauss rule per axis against the analytic
//! solution. Per-step series start at step 1; the interpolated initial data
//! is not part of the scheme error.

use crate::error::{check_len, Error, Result};
use crate::fem::ShapeTable;
use crate::grid::StructuredGrid;
use crate::mms::{ManufacturedCase, TensorSampler};
use crate::operators::FieldVector;
use crate::real::Real;
use crate::scheme::SchemeKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceNorm {
    L2,
    H1Seminorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeNorm {
    L2,
    Linf,
}

/// Walks the `q = 3` lattice and hands `(cell, q_axes, values, grads)` of
/// the Q1 interpolant with the given nodal coefficients to `visit`.
fn for_each_point<T: Real>(
    grid: &StructuredGrid<T>,
    table: &ShapeTable<T>,
    fields: &[&[T]],
    mut visit: impl FnMut([usize; 3], [usize; 3], T, &[T], &[[T; 3]]),
) {
    let dim = grid.dim();
    let h = grid.h();
    let vol = h.powi(dim as i32);
    let nf = fields.len();
    let mut vals = vec![T::zero(); nf];
    let mut grads = vec![[T::zero(); 3]; nf];
    let mut local = vec![[T::zero(); 8]; nf];
    for cell in 0..grid.n_cells() {
        let (nodes, nloc) = grid.cell_nodes(cell);
        let cc = grid.cell_coords(cell);
        for (f, loc) in fields.iter().zip(local.iter_mut()) {
            for a in 0..nloc {
                loc[a] = f[nodes[a]];
            }
        }
        for (q, (s, &w)) in table.shapes.iter().zip(&table.rule.weights).enumerate() {
            for j in 0..nf {
                let mut v = T::zero();
                let mut g = [T::zero(); 3];
                for a in 0..nloc {
                    let c = local[j][a];
                    v += c * s.values[a];
                    for d in 0..dim {
                        g[d] += c * s.grads[a][d];
                    }
                }
                vals[j] = v;
                grads[j] = [g[0] / h, g[1] / h, g[2] / h];
            }
            visit(cc, table.rule.point_axes(q), w * vol, &vals, &grads);
        }
    }
}

/// `‖f - u_h‖_{L²}` or `|f - u_h|_{H¹}` for a scalar nodal field, where
/// `exact` returns the value and gradient of `f`.
pub fn spatial_error<T: Real>(
    grid: &StructuredGrid<T>,
    u_h: &[T],
    exact: impl Fn([T; 3]) -> (T, [T; 3]),
    which: SpaceNorm,
) -> Result<T> {
    check_len(grid.n_nodes(), u_h.len())?;
    let table = ShapeTable::gauss(3, grid.dim())?;
    let h = grid.h();
    let dim = grid.dim();
    let mut acc = T::zero();
    for_each_point(grid, &table, &[u_h], |cell, qa, w, v, g| {
        let x: [T; 3] = std::array::from_fn(|d| {
            if d < dim {
                (T::from_usize_lossy(cell[d]) + table.rule.nodes_1d[qa[d]]) * h
            } else {
                T::zero()
            }
        });
        let (fv, fg) = exact(x);
        acc += w * match which {
            SpaceNorm::L2 => (fv - v[0]).powi(2),
            SpaceNorm::H1Seminorm => (0..dim).map(|d| (fg[d] - g[0][d]).powi(2)).sum(),
        };
    });
    Ok(acc.sqrt())
}

/// `(‖u - u_h‖_{L²}, |u - u_h|_{H¹})` against a manufactured velocity.
pub fn velocity_errors<T: Real>(
    grid: &StructuredGrid<T>,
    case: &ManufacturedCase<T>,
    u_h: &FieldVector<T>,
    t: T,
) -> Result<(T, T)> {
    check_len(grid.n_nodes(), u_h.n_nodes())?;
    check_len(grid.dim(), u_h.dim())?;
    let dim = grid.dim();
    let table = ShapeTable::gauss(3, dim)?;
    let sampler = TensorSampler::new(case, grid, &table.rule.nodes_1d, t);
    let blocks: Vec<&[T]> = (0..dim).map(|l| u_h.block(l)).collect();
    let mut l2 = T::zero();
    let mut h1 = T::zero();
    for_each_point(grid, &table, &blocks, |cell, qa, w, v, g| {
        let ex = sampler.eval(cell, qa);
        for l in 0..dim {
            l2 += w * (ex.u[l] - v[l]).powi(2);
            for d in 0..dim {
                h1 += w * (ex.grad_u[l][d] - g[l][d]).powi(2);
            }
        }
    });
    Ok((l2.sqrt(), h1.sqrt()))
}

/// L² distance of the zero-mean representatives of the exact and discrete
/// pressures, `(∫e² - (∫e)²/|Ω|)^{1/2}` with `e = p - p_h` on the unit domain.
pub fn pressure_error<T: Real>(grid: &StructuredGrid<T>, case: &ManufacturedCase<T>, p_h: &[T], t: T) -> Result<T> {
    check_len(grid.n_nodes(), p_h.len())?;
    let table = ShapeTable::gauss(3, grid.dim())?;
    let sampler = TensorSampler::new(case, grid, &table.rule.nodes_1d, t);
    let mut e2 = T::zero();
    let mut e1 = T::zero();
    for_each_point(grid, &table, &[p_h], |cell, qa, w, v, _| {
        let e = sampler.eval(cell, qa).p - v[0];
        e1 += w * e;
        e2 += w * e * e;
    });
    Ok((e2 - e1 * e1).max(T::zero()).sqrt())
}

/// `(Σ k (eⁱ)²)^{1/2}` or `max eⁱ` over the given per-step values.
pub fn composite_norm(values: &[f64], k: f64, mode: TimeNorm) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(match mode {
        TimeNorm::L2 => (k * values.iter().map(|e| e * e).sum::<f64>()).sqrt(),
        TimeNorm::Linf => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Observed order `log₂(e_coarse / e_fine)` for a refinement by 2.
pub fn convergence_rate(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "convergence rate needs positive errors, got {e_coarse} and {e_fine}"
        )));
    }
    Ok((e_coarse / e_fine).log2())
}

/// Errors after one time step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepErrors {
    pub step: usize,
    pub t: f64,
    pub l2_pred: f64,
    pub h1_pred: f64,
    pub l2_end: f64,
    pub l2_pres: f64,
}

/// Per-step errors of one run together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub scheme: SchemeKind,
    pub dim: usize,
    pub s: usize,
    pub l: usize,
    pub nu: f64,
    pub t_end: f64,
    pub k: f64,
    pub h: f64,
    pub steps: Vec<StepErrors>,
}

impl ErrorReport {
    fn series(&self, f: impl Fn(&StepErrors) -> f64, mode: TimeNorm) -> f64 {
        let v: Vec<f64> = self.steps.iter().map(f).collect();
        composite_norm(&v, self.k, mode).unwrap_or(f64::NAN)
    }

    /// `‖u - ũ_h‖_{L²(0,T;L²)}`
    pub fn l2l2_pred(&self) -> f64 {
        self.series(|s| s.l2_pred, TimeNorm::L2)
    }

    /// `‖u - ũ_h‖_{L²(0,T;H¹)}` (seminorm in space)
    pub fn l2h1_pred(&self) -> f64 {
        self.series(|s| s.h1_pred, TimeNorm::L2)
    }

    /// `‖u - ũ_h‖_{L∞(0,T;L²)}`
    pub fn linfl2_pred(&self) -> f64 {
        self.series(|s| s.l2_pred, TimeNorm::Linf)
    }

    pub fn l2l2_end(&self) -> f64 {
        self.series(|s| s.l2_end, TimeNorm::L2)
    }

    pub fn l2l2_pres(&self) -> f64 {
        self.series(|s| s.l2_pres, TimeNorm::L2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::nodal_interpolate;

    #[test]
    fn linear_function_against_zero() {
        let grid = StructuredGrid::<f64>::new(4, 2).unwrap();
        let zero = vec![0.0; grid.n_nodes()];
        let e = spatial_error(&grid, &zero, |x| (x[0], [1.0, 0.0, 0.0]), SpaceNorm::L2).unwrap();
        assert!((e - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let g = spatial_error(&grid, &zero, |x| (x[0], [1.0, 0.0, 0.0]), SpaceNorm::H1Seminorm).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_is_reproduced() {
        let grid = StructuredGrid::<f64>::new(3, 3).unwrap();
        let c = vec![2.5; grid.n_nodes()];
        for which in [SpaceNorm::L2, SpaceNorm::H1Seminorm] {
            let e = spatial_error(&grid, &c, |_| (2.5, [0.0; 3]), which).unwrap();
            assert!(e < 1e-15);
        }
    }

    #[test]
    fn interpolation_error_is_second_order() {
        let f = |x: [f64; 3]| {
            (
                (3.0 * x[0]).sin() * (2.0 * x[1]).cos(),
                [3.0 * (3.0 * x[0]).cos() * (2.0 * x[1]).cos(), -2.0 * (3.0 * x[0]).sin() * (2.0 * x[1]).sin(), 0.0],
            )
        };
        let err = |n| {
            let grid = StructuredGrid::<f64>::new(n, 2).unwrap();
            let ih = nodal_interpolate(|x, _| f(x).0, &grid, 0.0);
            spatial_error(&grid, &ih, f, SpaceNorm::L2).unwrap()
        };
        let ratio = err(16) / err(32);
        assert!((3.6..=4.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn exact_interpolant_errors_vanish_for_bilinear_velocity() {
        let grid = StructuredGrid::<f64>::new(4, 2).unwrap();
        let case = ManufacturedCase::zero(2, 1.0);
        let u = FieldVector::zeros(2, grid.n_nodes());
        let (l2, h1) = velocity_errors(&grid, &case, &u, 0.3).unwrap();
        assert_eq!((l2, h1), (0.0, 0.0));
    }

    #[test]
    fn pressure_error_ignores_constants() {
        let grid = StructuredGrid::<f64>::new(8, 2).unwrap();
        let case = ManufacturedCase::zero(2, 1.0);
        let p = vec![3.0; grid.n_nodes()];
        assert!(pressure_error(&grid, &case, &p, 0.0).unwrap() < 1e-7);
    }

    #[test]
    fn composite_norm_examples() {
        let e = composite_norm(&[0.1; 64], 1.0 / 64.0, TimeNorm::L2).unwrap();
        assert!((e - 0.1).abs() < 1e-15);
        assert_eq!(composite_norm(&[1.0, 3.0, 2.0], 0.1, TimeNorm::Linf).unwrap(), 3.0);
        let e = composite_norm(&[2.0], 0.5, TimeNorm::L2).unwrap();
        assert!((e - 2.0 * 0.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(composite_norm(&[], 0.1, TimeNorm::L2), Err(Error::EmptyInput)));
    }

    #[test]
    fn composite_norm_is_homogeneous() {
        let v = [0.3, 1.7, 0.2, 0.9];
        let c = 3.5;
        let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
        for mode in [TimeNorm::L2, TimeNorm::Linf] {
            let a = composite_norm(&v, 0.25, mode).unwrap();
            let b = composite_norm(&scaled, 0.25, mode).unwrap();
            assert!((b - c * a).abs() < 1e-14);
        }
    }

    #[test]
    fn rates() {
        assert!((convergence_rate(4e-4, 1e-4).unwrap() - 2.0).abs() < 1e-14);
        assert!((convergence_rate(2.03e-3, 1.04e-3).unwrap() - 0.965).abs() < 1e-3);
        assert!((convergence_rate(1.37e-4, 3.38e-5).unwrap() - 2.02).abs() < 1e-2);
        assert!(convergence_rate(0.0, 1.0).is_err());
        assert!(convergence_rate(1.0, -1.0).is_err());
    }
}
