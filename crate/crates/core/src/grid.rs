//! Uniform structured meshes of the unit square and unit cube.
//!
//! Nodes are numbered lexicographically with `x` running fastest. A 2D grid
//! is stored as a 3D grid with a single node layer in `z`, so every loop in
//! the crate works on `[usize; 3]` lattice coordinates.

use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::real::Real;

/// Uniform quadrilateral (`dim = 2`) or hexahedral (`dim = 3`) mesh of `(0,1)^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredGrid<T> {
    dim: usize,
    n: usize,
    h: T,
    _scalar: PhantomData<T>,
}

impl<T: Real> StructuredGrid<T> {
    /// Builds a grid with `n_per_axis` cells along every axis.
    pub fn new(n_per_axis: usize, dim: usize) -> Result<Self> {
        if n_per_axis == 0 {
            return Err(Error::EmptyGrid);
        }
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(Self {
            dim,
            n: n_per_axis,
            h: T::one() / T::from_usize_lossy(n_per_axis),
            _scalar: PhantomData,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    /// Mesh size `1 / n_per_axis`.
    pub fn h(&self) -> T {
        self.h
    }

    /// Cells along each lattice axis (0 for the collapsed `z` axis of a 2D grid).
    pub fn cells_per_axis(&self) -> [usize; 3] {
        if self.dim == 3 {
            [self.n; 3]
        } else {
            [self.n, self.n, 0]
        }
    }

    /// Nodes along each lattice axis (1 for the collapsed `z` axis of a 2D grid).
    pub fn nodes_per_axis(&self) -> [usize; 3] {
        let c = self.cells_per_axis();
        [c[0] + 1, c[1] + 1, c[2] + 1]
    }

    pub fn n_nodes(&self) -> usize {
        (self.n + 1).pow(self.dim as u32)
    }

    pub fn n_cells(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Nodes per cell, `2^dim`.
    pub fn nodes_per_cell(&self) -> usize {
        1 << self.dim
    }

    #[inline]
    pub fn node_index(&self, c: [usize; 3]) -> usize {
        let np = self.n + 1;
        c[0] + np * (c[1] + np * c[2])
    }

    #[inline]
    pub fn node_coords(&self, node: usize) -> [usize; 3] {
        let np = self.n + 1;
        [node % np, (node / np) % np, node / (np * np)]
    }

    #[inline]
    pub fn cell_index(&self, c: [usize; 3]) -> usize {
        c[0] + self.n * (c[1] + self.n * c[2])
    }

    #[inline]
    pub fn cell_coords(&self, cell: usize) -> [usize; 3] {
        let n = self.n;
        if self.dim == 3 {
            [cell % n, (cell / n) % n, cell / (n * n)]
        } else {
            [cell % n, cell / n, 0]
        }
    }

    /// Physical position of a node.
    #[inline]
    pub fn node_position(&self, node: usize) -> [T; 3] {
        let c = self.node_coords(node);
        [
            T::from_usize_lossy(c[0]) * self.h,
            T::from_usize_lossy(c[1]) * self.h,
            T::from_usize_lossy(c[2]) * self.h,
        ]
    }

    /// Global node indices of a cell, local index `a = a0 + 2 a1 + 4 a2`.
    pub fn cell_nodes(&self, cell: usize) -> ([usize; 8], usize) {
        let c = self.cell_coords(cell);
        let mut out = [0usize; 8];
        let nloc = self.nodes_per_cell();
        for (a, slot) in out.iter_mut().enumerate().take(nloc) {
            let o = local_offset(a);
            *slot = self.node_index([c[0] + o[0], c[1] + o[1], c[2] + o[2]]);
        }
        (out, nloc)
    }

    #[inline]
    pub fn is_boundary_node(&self, node: usize) -> bool {
        let c = self.node_coords(node);
        (0..self.dim).any(|a| c[a] == 0 || c[a] == self.n)
    }

    /// Sorted indices of all nodes on `∂Ω`.
    pub fn boundary_node_indices(&self) -> Vec<usize> {
        (0..self.n_nodes())
            .filter(|&i| self.is_boundary_node(i))
            .collect()
    }

    /// Boolean mask over nodes, `true` on `∂Ω`.
    pub fn boundary_mask(&self) -> Vec<bool> {
        (0..self.n_nodes())
            .map(|i| self.is_boundary_node(i))
            .collect()
    }

    pub fn n_interior_nodes(&self) -> usize {
        (self.n - 1).pow(self.dim as u32)
    }
}

/// Lattice offset of local node `a` inside its cell.
#[inline]
pub fn local_offset(a: usize) -> [usize; 3] {
    [a & 1, (a >> 1) & 1, (a >> 2) & 1]
}
