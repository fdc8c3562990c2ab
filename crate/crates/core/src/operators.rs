//! Sparse operators of the pressure-correction schemes.
//!
//! Everything is assembled once per grid on a shared 3^d-point sparsity
//! pattern: the scalar mass `M`, its lumped diagonal, the stiffness `A`
//! (which doubles as the pure-Neumann pressure Laplacian `L`) and the
//! directional matrices `M_k` with entries `(φ_j, ∂_k φ_i)`. The `M_k`
//! realise the pressure coupling, the divergence (through their transpose)
//! and the interpolated convective term. Dirichlet conditions are left to the
//! time-stepping schemes.

use std::ops::{Index, IndexMut};
use std::sync::Arc;

use crate::error::{check_len, Result};
use crate::fem::{NodalField, ShapeTable};
use crate::grid::StructuredGrid;
use crate::mms::{ManufacturedCase, TensorSampler};
use crate::real::Real;
use crate::sparse::{CsrMatrix, SparsityPattern};

/// Velocity coefficients, component-major: `d` blocks of `n_nodes` values.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector<T> {
    dim: usize,
    n_nodes: usize,
    data: Vec<T>,
}

impl<T: Real> FieldVector<T> {
    pub fn zeros(dim: usize, n_nodes: usize) -> Self {
        Self {
            dim,
            n_nodes,
            data: vec![T::zero(); dim * n_nodes],
        }
    }

    pub fn from_blocks(blocks: Vec<Vec<T>>) -> Result<Self> {
        let n_nodes = blocks.first().map_or(0, |b| b.len());
        for b in &blocks {
            check_len(n_nodes, b.len())?;
        }
        Ok(Self {
            dim: blocks.len(),
            n_nodes,
            data: blocks.concat(),
        })
    }

    /// Builds a field from a node-wise vector function.
    pub fn from_fn(dim: usize, n_nodes: usize, mut f: impl FnMut(usize) -> [T; 3]) -> Self {
        let mut v = Self::zeros(dim, n_nodes);
        for i in 0..n_nodes {
            let val = f(i);
            for l in 0..dim {
                v.data[l * n_nodes + i] = val[l];
            }
        }
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn block(&self, l: usize) -> &[T] {
        &self.data[l * self.n_nodes..(l + 1) * self.n_nodes]
    }

    pub fn block_mut(&mut self, l: usize) -> &mut [T] {
        &mut self.data[l * self.n_nodes..(l + 1) * self.n_nodes]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Nodal vector `(v¹_i, …, v^d_i)`.
    pub fn node(&self, i: usize) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for (l, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = self.data[l * self.n_nodes + i];
        }
        out
    }

    /// Largest Euclidean norm of a nodal vector.
    pub fn max_norm(&self) -> T {
        (0..self.n_nodes)
            .map(|i| self.node(i).iter().map(|v| *v * *v).sum::<T>().sqrt())
            .fold(T::zero(), |m, v| m.max(v))
    }

    pub fn dot(&self, other: &Self) -> T {
        crate::real::dot(&self.data, &other.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T> Index<usize> for FieldVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}

impl<T> IndexMut<usize> for FieldVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.data[i]
    }
}

/// Storage position of `(row, col)` in the Q1 pattern, computed from lattice
/// offsets (`col - row` must be in `{-1,0,1}^d`).
#[inline]
fn q1_slot(n: usize, dim: usize, row: [usize; 3], col: [usize; 3]) -> usize {
    let mut pos = 0;
    let mut stride = 1;
    for a in 0..dim {
        let lo = usize::from(row[a] > 0);
        let count = 1 + lo + usize::from(row[a] < n);
        // col[a] - row[a] + lo, without going negative
        pos += (col[a] + lo - row[a]) * stride;
        stride *= count;
    }
    pos
}

/// The 3^d-neighbour pattern of Q1 on a structured grid.
pub fn q1_pattern<T: Real>(grid: &StructuredGrid<T>) -> SparsityPattern {
    let np = grid.nodes_per_axis();
    let dim = grid.dim();
    let n_nodes = grid.n_nodes();
    let mut row_ptr = Vec::with_capacity(n_nodes + 1);
    let mut col_idx = Vec::with_capacity(n_nodes * 3usize.pow(dim as u32));
    row_ptr.push(0);
    for r in 0..n_nodes {
        let c = grid.node_coords(r);
        let range = |a: usize| -> std::ops::Range<usize> {
            if a < dim {
                c[a].saturating_sub(1)..(c[a] + 2).min(np[a])
            } else {
                0..1
            }
        };
        for k in range(2) {
            for j in range(1) {
                for i in range(0) {
                    col_idx.push(grid.node_index([i, j, k]) as u32);
                }
            }
        }
        row_ptr.push(col_idx.len());
    }
    SparsityPattern::new_unchecked(n_nodes, n_nodes, row_ptr, col_idx)
}

/// Reference-cell element matrices on a uniform grid.
#[derive(Debug, Clone)]
struct ElementMatrices<T> {
    mass: [[T; 8]; 8],
    stiffness: [[T; 8]; 8],
    /// `directional[k][a][b] = (φ_b, ∂_k φ_a)` on one cell
    directional: [[[T; 8]; 8]; 3],
}

impl<T: Real> ElementMatrices<T> {
    fn new(table: &ShapeTable<T>, h: T, dim: usize) -> Self {
        let vol = h.powi(dim as i32);
        let mut e = Self {
            mass: [[T::zero(); 8]; 8],
            stiffness: [[T::zero(); 8]; 8],
            directional: [[[T::zero(); 8]; 8]; 3],
        };
        let nloc = 1 << dim;
        for (s, &w) in table.shapes.iter().zip(&table.rule.weights) {
            let wv = w * vol;
            for a in 0..nloc {
                for b in 0..nloc {
                    e.mass[a][b] += wv * s.values[a] * s.values[b];
                    let mut g = T::zero();
                    for d in 0..dim {
                        g += s.grads[a][d] * s.grads[b][d];
                    }
                    e.stiffness[a][b] += wv * g / (h * h);
                    for k in 0..dim {
                        e.directional[k][a][b] += wv * s.values[b] * s.grads[a][k] / h;
                    }
                }
            }
        }
        e
    }
}

/// Every operator the three pressure-correction schemes need on one grid.
#[derive(Debug, Clone)]
pub struct OperatorSet<T> {
    grid: StructuredGrid<T>,
    nu: T,
    pattern: Arc<SparsityPattern>,
    mass: CsrMatrix<T>,
    lumped: Vec<T>,
    stiffness: CsrMatrix<T>,
    directional: Vec<CsrMatrix<T>>,
    table: ShapeTable<T>,
    element: ElementMatrices<T>,
    boundary: Vec<bool>,
}

impl<T: Real> OperatorSet<T> {
    /// Assembles `M`, `M_L`, `A = L` and `M_k` with the 2-point Gauss rule.
    pub fn assemble(grid: &StructuredGrid<T>, nu: T) -> Result<Self> {
        if !(nu > T::zero()) {
            return Err(crate::error::Error::InvalidArgument("viscosity must be positive".into()));
        }
        let dim = grid.dim();
        let table = ShapeTable::gauss(2, dim)?;
        let element = ElementMatrices::new(&table, grid.h(), dim);
        let pattern = Arc::new(q1_pattern(grid));
        let mut ops = Self {
            grid: grid.clone(),
            nu,
            mass: CsrMatrix::zeros(pattern.clone()),
            lumped: Vec::new(),
            stiffness: CsrMatrix::zeros(pattern.clone()),
            directional: (0..dim).map(|_| CsrMatrix::zeros(pattern.clone())).collect(),
            pattern,
            table,
            element,
            boundary: grid.boundary_mask(),
        };
        let e = ops.element.clone();
        ops.mass = ops.assemble_constant(&e.mass);
        ops.stiffness = ops.assemble_constant(&e.stiffness);
        ops.directional = (0..dim).map(|k| ops.assemble_constant(&e.directional[k])).collect();
        ops.lumped = lump(&ops.mass);
        Ok(ops)
    }

    /// Storage slots of the `2^d × 2^d` element couplings of a cell.
    #[inline]
    fn cell_slots(&self, cell: usize) -> ([usize; 8], [[usize; 8]; 8], usize) {
        let (nodes, nloc) = self.grid.cell_nodes(cell);
        let n = self.grid.n_per_axis();
        let dim = self.grid.dim();
        let rp = self.pattern.row_ptr();
        let mut slots = [[0usize; 8]; 8];
        let coords: [[usize; 3]; 8] = std::array::from_fn(|a| {
            if a < nloc {
                self.grid.node_coords(nodes[a])
            } else {
                [0; 3]
            }
        });
        for a in 0..nloc {
            for b in 0..nloc {
                slots[a][b] = rp[nodes[a]] + q1_slot(n, dim, coords[a], coords[b]);
            }
        }
        (nodes, slots, nloc)
    }

    fn assemble_constant(&self, elem: &[[T; 8]; 8]) -> CsrMatrix<T> {
        let mut m = CsrMatrix::zeros(self.pattern.clone());
        let vals = m.values_mut();
        for cell in 0..self.grid.n_cells() {
            let (_, slots, nloc) = self.cell_slots(cell);
            for a in 0..nloc {
                for b in 0..nloc {
                    vals[slots[a][b]] += elem[a][b];
                }
            }
        }
        m
    }

    pub fn grid(&self) -> &StructuredGrid<T> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes()
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    /// Consistent scalar mass matrix `(φ_j, φ_i)`.
    pub fn mass(&self) -> &CsrMatrix<T> {
        &self.mass
    }

    /// Row sums of the mass matrix.
    pub fn lumped_mass(&self) -> &[T] {
        &self.lumped
    }

    /// Scalar stiffness `(∇φ_j, ∇φ_i)`.
    pub fn stiffness(&self) -> &CsrMatrix<T> {
        &self.stiffness
    }

    /// Pure-Neumann pressure Laplacian; identical to the stiffness matrix
    /// because the pressure space equals the velocity component space.
    pub fn laplacian(&self) -> &CsrMatrix<T> {
        &self.stiffness
    }

    /// `M_k` with entries `(φ_j, ∂_k φ_i)`.
    pub fn directional(&self, k: usize) -> &CsrMatrix<T> {
        &self.directional[k]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    /// `(div v_h, φ_i) = Σ_l (M_lᵀ v^l)_i`.
    pub fn divergence_rhs(&self, v: &FieldVector<T>) -> Result<NodalField<T>> {
        self.check_field(v)?;
        let mut out = vec![T::zero(); self.n_nodes()];
        for l in 0..self.dim() {
            self.directional[l].spmv_transpose_add_unchecked(T::one(), v.block(l), &mut out);
        }
        Ok(NodalField(out))
    }

    /// `(p_h, div χ_i^l) = (M_l p)_i` for every component `l`.
    pub fn pressure_gradient_term(&self, p: &[T]) -> Result<FieldVector<T>> {
        check_len(self.n_nodes(), p.len())?;
        let mut out = FieldVector::zeros(self.dim(), self.n_nodes());
        for l in 0..self.dim() {
            self.directional[l].spmv_unchecked(p, out.block_mut(l));
        }
        Ok(out)
    }

    /// Scalar convection matrix `N(w)` with
    /// `N_ij = c(w_h, φ_j, φ_i) = -(w_h φ_j, ∇φ_i) - ½((div w_h) φ_j, φ_i)`.
    ///
    /// The convective form does not couple velocity components, so the
    /// `d × d` block operator is block diagonal with `N(w)` in every block.
    pub fn convection_matrix(&self, w: &FieldVector<T>) -> Result<CsrMatrix<T>> {
        self.check_field(w)?;
        let mut m = CsrMatrix::zeros(self.pattern.clone());
        self.add_convection(w, T::one(), m.values_mut());
        Ok(m)
    }

    /// Adds `scale · N(w)` into a value array on the shared pattern.
    pub(crate) fn add_convection(&self, w: &FieldVector<T>, scale: T, vals: &mut [T]) {
        let dim = self.dim();
        let h = self.grid.h();
        let vol = h.powi(dim as i32);
        let half = T::lit(0.5);
        for cell in 0..self.grid.n_cells() {
            let (nodes, slots, nloc) = self.cell_slots(cell);
            let mut wl = [[T::zero(); 8]; 3];
            for l in 0..dim {
                let b = w.block(l);
                for a in 0..nloc {
                    wl[l][a] = b[nodes[a]];
                }
            }
            let mut elem = [[T::zero(); 8]; 8];
            for (s, &qw) in self.table.shapes.iter().zip(&self.table.rule.weights) {
                let wq = qw * vol * scale;
                let mut wv = [T::zero(); 3];
                let mut div = T::zero();
                for l in 0..dim {
                    for a in 0..nloc {
                        wv[l] += wl[l][a] * s.values[a];
                        div += wl[l][a] * s.grads[a][l];
                    }
                }
                div /= h;
                for a in 0..nloc {
                    let mut wgrad = T::zero();
                    for k in 0..dim {
                        wgrad += wv[k] * s.grads[a][k];
                    }
                    wgrad /= h;
                    let ca = -wq * (wgrad + half * div * s.values[a]);
                    for b in 0..nloc {
                        elem[a][b] += ca * s.values[b];
                    }
                }
            }
            for a in 0..nloc {
                for b in 0..nloc {
                    vals[slots[a][b]] += elem[a][b];
                }
            }
        }
    }

    /// `c(w_h, w_h, e_l φ_i)` by 2-point Gauss quadrature.
    pub fn convection_residual(&self, w: &FieldVector<T>) -> Result<FieldVector<T>> {
        self.check_field(w)?;
        let dim = self.dim();
        let h = self.grid.h();
        let vol = h.powi(dim as i32);
        let half = T::lit(0.5);
        let mut out = FieldVector::zeros(dim, self.n_nodes());
        let n_nodes = self.n_nodes();
        for cell in 0..self.grid.n_cells() {
            let (nodes, nloc) = self.grid.cell_nodes(cell);
            let mut wl = [[T::zero(); 8]; 3];
            for l in 0..dim {
                let b = w.block(l);
                for a in 0..nloc {
                    wl[l][a] = b[nodes[a]];
                }
            }
            let mut elem = [[T::zero(); 8]; 3];
            for (s, &qw) in self.table.shapes.iter().zip(&self.table.rule.weights) {
                let wq = qw * vol;
                let mut wv = [T::zero(); 3];
                let mut div = T::zero();
                for l in 0..dim {
                    for a in 0..nloc {
                        wv[l] += wl[l][a] * s.values[a];
                        div += wl[l][a] * s.grads[a][l];
                    }
                }
                div /= h;
                for a in 0..nloc {
                    let mut wgrad = T::zero();
                    for k in 0..dim {
                        wgrad += wv[k] * s.grads[a][k];
                    }
                    wgrad /= h;
                    let ca = -wq * (wgrad + half * div * s.values[a]);
                    for l in 0..dim {
                        elem[l][a] += ca * wv[l];
                    }
                }
            }
            for l in 0..dim {
                for a in 0..nloc {
                    out[l * n_nodes + nodes[a]] += elem[l][a];
                }
            }
        }
        Ok(out)
    }

    /// Interpolated convection `c*(w, w, e_l φ_i) = -(I_h(w ⊗ w), ∇(e_l φ_i))`,
    /// evaluated as `-Σ_k M_k (w^k ∘ w^l)` from `d(d+1)/2` entrywise products.
    pub fn convection_residual_fast(&self, w: &FieldVector<T>) -> Result<FieldVector<T>> {
        self.check_field(w)?;
        let dim = self.dim();
        let n = self.n_nodes();
        let mut out = FieldVector::zeros(dim, n);
        let mut prod = vec![T::zero(); n];
        for k in 0..dim {
            for l in k..dim {
                for ((p, a), b) in prod.iter_mut().zip(w.block(k)).zip(w.block(l)) {
                    *p = *a * *b;
                }
                self.directional[k].spmv_add_unchecked(-T::one(), &prod, out.block_mut(l));
                if l != k {
                    self.directional[l].spmv_add_unchecked(-T::one(), &prod, out.block_mut(k));
                }
            }
        }
        Ok(out)
    }

    /// `(f(·, t), e_l φ_i)` by 3-point Gauss quadrature for a general vector function.
    pub fn forcing_vector(&self, f: impl Fn([T; 3], T) -> [T; 3], t: T) -> Result<FieldVector<T>> {
        let table = ShapeTable::gauss(3, self.dim())?;
        let h = self.grid.h();
        Ok(self.integrate_against_basis(&table, |cell, q, _| {
            let c = self.grid.cell_coords(cell);
            let p = table.rule.points[q];
            let x = [
                (T::from_usize_lossy(c[0]) + p[0]) * h,
                (T::from_usize_lossy(c[1]) + p[1]) * h,
                (T::from_usize_lossy(c[2]) + p[2]) * h,
            ];
            f(x, t)
        }))
    }

    /// Forcing vector of a manufactured case, sampled through per-axis tables.
    pub fn mms_forcing_vector(&self, case: &ManufacturedCase<T>, t: T) -> Result<FieldVector<T>> {
        let table = ShapeTable::gauss(3, self.dim())?;
        let sampler = TensorSampler::new(case, &self.grid, &table.rule.nodes_1d, t);
        Ok(self.integrate_against_basis(&table, |_, q, cell| sampler.eval(cell, table.rule.point_axes(q)).f))
    }

    fn integrate_against_basis(
        &self,
        table: &ShapeTable<T>,
        f: impl Fn(usize, usize, [usize; 3]) -> [T; 3],
    ) -> FieldVector<T> {
        let dim = self.dim();
        let n = self.n_nodes();
        let vol = self.grid.h().powi(dim as i32);
        let mut out = FieldVector::zeros(dim, n);
        for cell in 0..self.grid.n_cells() {
            let (nodes, nloc) = self.grid.cell_nodes(cell);
            let cc = self.grid.cell_coords(cell);
            let mut elem = [[T::zero(); 8]; 3];
            for (q, (s, &w)) in table.shapes.iter().zip(&table.rule.weights).enumerate() {
                let fv = f(cell, q, cc);
                for a in 0..nloc {
                    let wa = w * vol * s.values[a];
                    for l in 0..dim {
                        elem[l][a] += wa * fv[l];
                    }
                }
            }
            for l in 0..dim {
                for a in 0..nloc {
                    out[l * n + nodes[a]] += elem[l][a];
                }
            }
        }
        out
    }

    /// Applies a scalar matrix to every velocity component.
    pub fn apply_blockwise(&self, a: &CsrMatrix<T>, v: &FieldVector<T>) -> Result<FieldVector<T>> {
        self.check_field(v)?;
        let mut out = FieldVector::zeros(v.dim(), v.n_nodes());
        for l in 0..v.dim() {
            a.spmv_unchecked(v.block(l), out.block_mut(l));
        }
        Ok(out)
    }

    fn check_field(&self, v: &FieldVector<T>) -> Result<()> {
        check_len(self.dim(), v.dim())?;
        check_len(self.n_nodes(), v.n_nodes())
    }
}

/// Row sums of a square matrix.
pub fn lump<T: Real>(m: &CsrMatrix<T>) -> Vec<T> {
    m.row_sums()
}
