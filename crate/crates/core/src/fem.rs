//! Multilinear (Q1) scalar finite elements on the reference cell `[0,1]^d`,
//! tensor Gauss–Legendre rules and nodal interpolation.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};
use crate::grid::{local_offset, StructuredGrid};
use crate::real::Real;

/// Values and reference gradients of the `2^d` Q1 shape functions at one point.
#[derive(Debug, Clone, Copy)]
pub struct ShapeValues<T> {
    pub values: [T; 8],
    pub grads: [[T; 3]; 8],
    pub count: usize,
}

/// Evaluates the Q1 basis at a reference point in `[0,1]^dim`.
///
/// Gradients are with respect to reference coordinates; divide by `h` for
/// physical gradients.
pub fn shape_eval<T: Real>(dim: usize, p: [T; 3]) -> ShapeValues<T> {
    let count = 1 << dim;
    let mut values = [T::zero(); 8];
    let mut grads = [[T::zero(); 3]; 8];
    for a in 0..count {
        let o = local_offset(a);
        let mut f = [T::one(); 3];
        let mut df = [T::zero(); 3];
        for d in 0..dim {
            if o[d] == 1 {
                f[d] = p[d];
                df[d] = T::one();
            } else {
                f[d] = T::one() - p[d];
                df[d] = -T::one();
            }
        }
        values[a] = f[0] * f[1] * f[2];
        grads[a] = [df[0] * f[1] * f[2], f[0] * df[1] * f[2], f[0] * f[1] * df[2]];
        for g in grads[a].iter_mut().skip(dim) {
            *g = T::zero();
        }
    }
    ShapeValues {
        values,
        grads,
        count,
    }
}

/// Tensor-product quadrature on the reference cell `[0,1]^dim`.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    pub dim: usize,
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
    /// 1D nodes in `[0,1]` the tensor rule is built from.
    pub nodes_1d: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Tensor index `(i, j, k)` of point `q` into `nodes_1d`.
    #[inline]
    pub fn point_axes(&self, q: usize) -> [usize; 3] {
        let m = self.nodes_1d.len();
        if self.dim == 3 {
            [q % m, (q / m) % m, q / (m * m)]
        } else {
            [q % m, q / m, 0]
        }
    }
}

/// Gauss–Legendre rule with `q` points per direction, mapped to `[0,1]^dim`.
pub fn gauss_rule<T: Real>(q: usize, dim: usize) -> Result<QuadratureRule<T>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let (xs, ws): (Vec<f64>, Vec<f64>) = match q {
        2 => {
            let a = 0.5 / 3f64.sqrt();
            (vec![0.5 - a, 0.5 + a], vec![0.5, 0.5])
        }
        3 => {
            let a = 0.5 * (0.6f64).sqrt();
            (
                vec![0.5 - a, 0.5, 0.5 + a],
                vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
            )
        }
        _ => return Err(Error::UnsupportedQuadrature(q)),
    };
    let nodes_1d: Vec<T> = xs.iter().map(|&x| T::lit(x)).collect();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let nz = if dim == 3 { q } else { 1 };
    let ny = if dim >= 2 { q } else { 1 };
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..q {
                let mut w = ws[i];
                let mut p = [T::zero(); 3];
                p[0] = nodes_1d[i];
                if dim >= 2 {
                    w *= ws[j];
                    p[1] = nodes_1d[j];
                }
                if dim == 3 {
                    w *= ws[k];
                    p[2] = nodes_1d[k];
                }
                points.push(p);
                weights.push(T::lit(w));
            }
        }
    }
    Ok(QuadratureRule {
        dim,
        points,
        weights,
        nodes_1d,
    })
}

/// Shape function values and gradients tabulated at every point of a rule.
#[derive(Debug, Clone)]
pub struct ShapeTable<T> {
    pub rule: QuadratureRule<T>,
    pub shapes: Vec<ShapeValues<T>>,
}

impl<T: Real> ShapeTable<T> {
    pub fn new(rule: QuadratureRule<T>) -> Self {
        let shapes = rule
            .points
            .iter()
            .map(|&p| shape_eval(rule.dim, p))
            .collect();
        Self { rule, shapes }
    }

    pub fn gauss(q: usize, dim: usize) -> Result<Self> {
        Ok(Self::new(gauss_rule(q, dim)?))
    }
}

/// Scalar Q1 coefficient vector, one value per grid node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodalField<T>(pub Vec<T>);

impl<T: Real> NodalField<T> {
    pub fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n])
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> Deref for NodalField<T> {
    type Target = Vec<T>;
    fn deref(&self) -> &Vec<T> {
        &self.0
    }
}

impl<T> DerefMut for NodalField<T> {
    fn deref_mut(&mut self) -> &mut Vec<T> {
        &mut self.0
    }
}

impl<T> From<Vec<T>> for NodalField<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

/// Nodal interpolant `I_h f` of a scalar function at time `t`.
pub fn nodal_interpolate<T: Real>(
    f: impl Fn([T; 3], T) -> T,
    grid: &StructuredGrid<T>,
    t: T,
) -> NodalField<T> {
    NodalField(
        (0..grid.n_nodes())
            .map(|i| f(grid.node_position(i), t))
            .collect(),
    )
}
