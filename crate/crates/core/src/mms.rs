//! Manufactured solutions with closed-form forcing.
//!
//! Every case is evaluated from per-axis "features" (sines and cosines of a
//! single coordinate) combined with per-time constants. Quadrature loops on
//! the structured grid precompute the features once per axis and time level
//! through [`TensorSampler`], which removes almost all transcendental calls
//! from the inner loops. The pointwise API goes through the same code path.

use crate::grid::StructuredGrid;
use crate::real::Real;

/// Exact fields and forcing at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointValues<T> {
    pub u: [T; 3],
    /// `grad_u[i][j] = ∂_j u_i`
    pub grad_u: [[T; 3]; 3],
    pub p: T,
    pub grad_p: [T; 3],
    pub f: [T; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    /// The 3D trigonometric flow on the unit cube with ν = 1e-3 by default.
    Trig3d,
    /// Stream-function flow `ψ = sin²(πx) sin²(πy) cos t` on the unit square,
    /// vanishing on the whole boundary.
    StreamFunction2d,
    /// Identically zero data, used for fixed-point checks.
    Zero { dim: usize },
}

type AxisFeatures<T> = [T; 6];
type TimeFeatures<T> = [T; 4];

/// A manufactured solution of the incompressible Navier–Stokes equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase<T> {
    pub kind: CaseKind,
    pub nu: T,
}

impl<T: Real> ManufacturedCase<T> {
    pub fn trig_3d(nu: T) -> Self {
        Self {
            kind: CaseKind::Trig3d,
            nu,
        }
    }

    pub fn stream_function_2d(nu: T) -> Self {
        Self {
            kind: CaseKind::StreamFunction2d,
            nu,
        }
    }

    pub fn zero(dim: usize, nu: T) -> Self {
        Self {
            kind: CaseKind::Zero { dim },
            nu,
        }
    }

    /// The default case for a spatial dimension.
    pub fn for_dim(dim: usize, nu: T) -> Self {
        if dim == 2 {
            Self::stream_function_2d(nu)
        } else {
            Self::trig_3d(nu)
        }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            CaseKind::Trig3d => 3,
            CaseKind::StreamFunction2d => 2,
            CaseKind::Zero { dim } => dim,
        }
    }

    fn axis_features(&self, s: T, t: T) -> AxisFeatures<T> {
        let z = T::zero();
        match self.kind {
            CaseKind::Trig3d => [(s + t).sin(), (s + t).cos(), s.sin(), s.cos(), z, z],
            CaseKind::StreamFunction2d => {
                let pi = T::PI();
                let sp = (pi * s).sin();
                let (s2, c2) = ((T::lit(2.0) * pi * s).sin(), (T::lit(2.0) * pi * s).cos());
                [
                    sp * sp,
                    pi * s2,
                    T::lit(2.0) * pi * pi * c2,
                    -T::lit(4.0) * pi * pi * pi * s2,
                    s.cos(),
                    s.sin(),
                ]
            }
            CaseKind::Zero { .. } => [z; 6],
        }
    }

    fn time_features(&self, t: T) -> TimeFeatures<T> {
        let half = T::lit(0.5);
        match self.kind {
            // additive constant 8 sin³(1/2) sin(1/2 - t)
            CaseKind::Trig3d => [t.cos(), t.sin(), T::lit(8.0) * half.sin().powi(3) * (half - t).sin(), T::zero()],
            // mean of sin(x - y + t) over the unit square is 4 sin²(1/2) sin t
            CaseKind::StreamFunction2d => [t.cos(), t.sin(), -T::lit(4.0) * half.sin().powi(2) * t.sin(), T::zero()],
            CaseKind::Zero { .. } => [T::zero(); 4],
        }
    }

    fn combine(&self, fx: &AxisFeatures<T>, fy: &AxisFeatures<T>, fz: &AxisFeatures<T>, tf: &TimeFeatures<T>) -> PointValues<T> {
        match self.kind {
            CaseKind::Trig3d => self.combine_trig_3d(fx, fy, fz, tf),
            CaseKind::StreamFunction2d => self.combine_stream_2d(fx, fy, tf),
            CaseKind::Zero { .. } => PointValues::default(),
        }
    }

    fn combine_trig_3d(&self, fx: &AxisFeatures<T>, fy: &AxisFeatures<T>, fz: &AxisFeatures<T>, tf: &TimeFeatures<T>) -> PointValues<T> {
        let (sx, cx) = (fx[0], fx[1]);
        let (sy, cy) = (fy[0], fy[1]);
        let (sz, cz) = (fz[0], fz[1]);
        let u = [sx * (cz - sy), -cx * cy - sy * cz, sz * (cy - cx)];
        let g = [
            [cx * (cz - sy), -sx * cy, -sx * sz],
            [sx * cy, cx * sy - cy * cz, sy * sz],
            [sz * sx, -sz * sy, cz * (cy - cx)],
        ];
        // e^{i(x - y - z + t)} from unit complex numbers
        let (re1, im1) = (fx[3], fx[2]);
        let (re2, im2) = (fy[3], -fy[2]);
        let (re3, im3) = (fz[3], -fz[2]);
        let (re4, im4) = (tf[0], tf[1]);
        let (ra, ia) = (re1 * re2 - im1 * im2, re1 * im2 + im1 * re2);
        let (rb, ib) = (ra * re3 - ia * im3, ra * im3 + ia * re3);
        let (rc, ic) = (rb * re4 - ib * im4, rb * im4 + ib * re4);
        let p = ic + tf[2];
        let grad_p = [rc, -rc, -rc];
        // all dependence on t is through x+t, y+t, z+t: ∂_t u_i = Σ_j ∂_j u_i; Δu = -2u
        let two_nu = T::lit(2.0) * self.nu;
        let mut f = [T::zero(); 3];
        for i in 0..3 {
            let dt = g[i][0] + g[i][1] + g[i][2];
            let adv = g[i][0] * u[0] + g[i][1] * u[1] + g[i][2] * u[2];
            f[i] = dt + two_nu * u[i] + adv + grad_p[i];
        }
        PointValues {
            u,
            grad_u: g,
            p,
            grad_p,
            f,
        }
    }

    fn combine_stream_2d(&self, fx: &AxisFeatures<T>, fy: &AxisFeatures<T>, tf: &TimeFeatures<T>) -> PointValues<T> {
        let z = T::zero();
        let (ax, dax, ddax, dddax) = (fx[0], fx[1], fx[2], fx[3]);
        let (ay, day, dday, ddday) = (fy[0], fy[1], fy[2], fy[3]);
        let (ct, st) = (tf[0], tf[1]);
        let u = [ax * day * ct, -dax * ay * ct, z];
        let g = [
            [dax * day * ct, ax * dday * ct, z],
            [-ddax * ay * ct, -dax * day * ct, z],
            [z; 3],
        ];
        let dt = [-ax * day * st, dax * ay * st];
        let lap = [
            (ddax * day + ax * ddday) * ct,
            -(dddax * ay + dax * dday) * ct,
        ];
        // e^{i(x - y + t)}
        let (re1, im1) = (fx[4], fx[5]);
        let (re2, im2) = (fy[4], -fy[5]);
        let (ra, ia) = (re1 * re2 - im1 * im2, re1 * im2 + im1 * re2);
        let (rb, ib) = (ra * ct - ia * st, ra * st + ia * ct);
        let p = ib + tf[2];
        let grad_p = [rb, -rb, z];
        let mut f = [z; 3];
        for i in 0..2 {
            let adv = g[i][0] * u[0] + g[i][1] * u[1];
            f[i] = dt[i] - self.nu * lap[i] + adv + grad_p[i];
        }
        PointValues {
            u,
            grad_u: g,
            p,
            grad_p,
            f,
        }
    }

    /// All exact fields at `x`, time `t`.
    pub fn eval(&self, x: [T; 3], t: T) -> PointValues<T> {
        let tf = self.time_features(t);
        let f0 = self.axis_features(x[0], t);
        let f1 = self.axis_features(x[1], t);
        let f2 = self.axis_features(x[2], t);
        self.combine(&f0, &f1, &f2, &tf)
    }

    pub fn exact_velocity(&self, x: [T; 3], t: T) -> [T; 3] {
        self.eval(x, t).u
    }

    pub fn exact_pressure(&self, x: [T; 3], t: T) -> T {
        self.eval(x, t).p
    }

    pub fn velocity_gradient(&self, x: [T; 3], t: T) -> [[T; 3]; 3] {
        self.eval(x, t).grad_u
    }

    pub fn pressure_gradient(&self, x: [T; 3], t: T) -> [T; 3] {
        self.eval(x, t).grad_p
    }

    /// `f = ∂_t u - νΔu + div(u ⊗ u) + ∇p`.
    pub fn forcing(&self, x: [T; 3], t: T) -> [T; 3] {
        self.eval(x, t).f
    }
}

/// Exact fields sampled on the tensor lattice `(cell + ξ_q) h` of a grid
/// for one time level.
#[derive(Debug, Clone)]
pub struct TensorSampler<'a, T> {
    case: &'a ManufacturedCase<T>,
    per_cell: usize,
    time: TimeFeatures<T>,
    axes: [Vec<AxisFeatures<T>>; 3],
    zero: AxisFeatures<T>,
}

impl<'a, T: Real> TensorSampler<'a, T> {
    /// `nodes_1d` are the reference coordinates in `[0,1]` sampled in every cell.
    pub fn new(case: &'a ManufacturedCase<T>, grid: &StructuredGrid<T>, nodes_1d: &[T], t: T) -> Self {
        let h = grid.h();
        let cells = grid.cells_per_axis();
        let axes = std::array::from_fn(|a| {
            let mut v = Vec::with_capacity(cells[a] * nodes_1d.len());
            for c in 0..cells[a] {
                for &xi in nodes_1d {
                    let s = (T::from_usize_lossy(c) + xi) * h;
                    v.push(case.axis_features(s, t));
                }
            }
            v
        });
        Self {
            case,
            per_cell: nodes_1d.len(),
            time: case.time_features(t),
            axes,
            zero: case.axis_features(T::zero(), t),
        }
    }

    /// Exact values at lattice point `(cell, q_axes)`.
    #[inline]
    pub fn eval(&self, cell: [usize; 3], q_axes: [usize; 3]) -> PointValues<T> {
        let m = self.per_cell;
        let pick = |a: usize| -> &AxisFeatures<T> {
            let v = &self.axes[a];
            if v.is_empty() {
                &self.zero
            } else {
                &v[cell[a] * m + q_axes[a]]
            }
        };
        self.case.combine(pick(0), pick(1), pick(2), &self.time)
    }
}
