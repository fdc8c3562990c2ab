//! Dense reference finite element code for small grids.
//!
//! Written independently of the library: its own hat functions, its own Gauss
//! tables and plain `Vec<Vec<f64>>` matrices. Only the node numbering
//! (x fastest, then y, then z) is shared, since results are compared entrywise.

#![allow(dead_code)]

pub mod steps;

pub type Dense = Vec<Vec<f64>>;

pub struct DenseFem {
    pub n: usize,
    pub dim: usize,
    pub h: f64,
}

/// Gauss-Legendre nodes and weights mapped to [0, 1].
pub fn gauss(q: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w): (Vec<f64>, Vec<f64>) = match q {
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (0.6f64).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let s = (6.0f64 / 5.0).sqrt() * 2.0;
            let a = ((3.0 - s) / 7.0).sqrt();
            let b = ((3.0 + s) / 7.0).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        _ => panic!("no rule"),
    };
    (x.iter().map(|v| 0.5 * (v + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
}

/// Quadrature point data handed to integrands.
pub struct Point<'a> {
    pub x: [f64; 3],
    pub weight: f64,
    /// `(global node, value, physical gradient)` of the cell's basis functions
    pub basis: &'a [(usize, f64, [f64; 3])],
}

impl DenseFem {
    pub fn new(n: usize, dim: usize) -> Self {
        Self { n, dim, h: 1.0 / n as f64 }
    }

    pub fn nodes_per_axis(&self) -> [usize; 3] {
        let m = self.n + 1;
        if self.dim == 2 {
            [m, m, 1]
        } else {
            [m, m, m]
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes_per_axis().iter().product()
    }

    pub fn index(&self, c: [usize; 3]) -> usize {
        let m = self.nodes_per_axis();
        c[0] + m[0] * (c[1] + m[1] * c[2])
    }

    pub fn coords(&self, i: usize) -> [usize; 3] {
        let m = self.nodes_per_axis();
        [i % m[0], (i / m[0]) % m[1], i / (m[0] * m[1])]
    }

    pub fn position(&self, i: usize) -> [f64; 3] {
        let c = self.coords(i);
        [c[0] as f64 * self.h, c[1] as f64 * self.h, c[2] as f64 * self.h]
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        let c = self.coords(i);
        (0..self.dim).any(|a| c[a] == 0 || c[a] == self.n)
    }

    fn hat(&self, node: f64, x: f64) -> (f64, f64) {
        let r = (x - node) / self.h;
        if r.abs() >= 1.0 {
            (0.0, 0.0)
        } else if r < 0.0 {
            (1.0 + r, 1.0 / self.h)
        } else {
            (1.0 - r, -1.0 / self.h)
        }
    }

    /// Value and gradient of the global basis function of node `i` at `x`,
    /// with the one-sided derivative taken from the cell `cell`.
    fn basis(&self, i: usize, x: [f64; 3], cell: [usize; 3]) -> (f64, [f64; 3]) {
        let p = self.position(i);
        let mut v = [1.0; 3];
        let mut d = [0.0; 3];
        for a in 0..self.dim {
            // inside the cell the hat restricted to this cell is linear
            let lo = cell[a] as f64 * self.h;
            let at_right = (p[a] - lo - self.h).abs() < 1e-12;
            let (val, _) = self.hat(p[a], x[a]);
            v[a] = val;
            d[a] = if at_right { 1.0 / self.h } else { -1.0 / self.h };
        }
        let mut g = [0.0; 3];
        for a in 0..self.dim {
            g[a] = d[a] * (0..self.dim).filter(|&b| b != a).map(|b| v[b]).product::<f64>();
        }
        (v.iter().product(), g)
    }

    /// Visits every quadrature point of a `q`-point tensor rule.
    pub fn integrate(&self, q: usize, mut f: impl FnMut(&Point)) {
        let (xs, ws) = gauss(q);
        let cells = [self.n, self.n, if self.dim == 3 { self.n } else { 1 }];
        let qz = if self.dim == 3 { q } else { 1 };
        let mut basis = Vec::with_capacity(8);
        for cz in 0..cells[2] {
            for cy in 0..cells[1] {
                for cx in 0..cells[0] {
                    let cell = [cx, cy, cz];
                    let mut nodes = Vec::new();
                    for oz in 0..(if self.dim == 3 { 2 } else { 1 }) {
                        for oy in 0..2 {
                            for ox in 0..2 {
                                nodes.push(self.index([cx + ox, cy + oy, cz + oz]));
                            }
                        }
                    }
                    for k in 0..qz {
                        for j in 0..q {
                            for i in 0..q {
                                let x = [
                                    (cx as f64 + xs[i]) * self.h,
                                    (cy as f64 + xs[j]) * self.h,
                                    if self.dim == 3 { (cz as f64 + xs[k]) * self.h } else { 0.0 },
                                ];
                                let mut w = ws[i] * ws[j] * self.h * self.h;
                                if self.dim == 3 {
                                    w *= ws[k] * self.h;
                                }
                                basis.clear();
                                for &nd in &nodes {
                                    let (v, g) = self.basis(nd, x, cell);
                                    basis.push((nd, v, g));
                                }
                                f(&Point { x, weight: w, basis: &basis });
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn zeros(&self) -> Dense {
        vec![vec![0.0; self.n_nodes()]; self.n_nodes()]
    }

    pub fn mass(&self) -> Dense {
        let mut m = self.zeros();
        self.integrate(3, |p| {
            for &(i, vi, _) in p.basis {
                for &(j, vj, _) in p.basis {
                    m[i][j] += p.weight * vi * vj;
                }
            }
        });
        m
    }

    pub fn stiffness(&self) -> Dense {
        let mut m = self.zeros();
        self.integrate(3, |p| {
            for &(i, _, gi) in p.basis {
                for &(j, _, gj) in p.basis {
                    m[i][j] += p.weight * (0..3).map(|d| gi[d] * gj[d]).sum::<f64>();
                }
            }
        });
        m
    }

    /// `m_{k,ij} = (φ_j, ∂_k φ_i)`
    pub fn directional(&self, k: usize) -> Dense {
        let mut m = self.zeros();
        self.integrate(3, |p| {
            for &(i, _, gi) in p.basis {
                for &(j, vj, _) in p.basis {
                    m[i][j] += p.weight * vj * gi[k];
                }
            }
        });
        m
    }

    /// Interpolant value and gradient of a nodal field at a quadrature point.
    pub fn eval(p: &Point, field: &[f64]) -> (f64, [f64; 3]) {
        let mut v = 0.0;
        let mut g = [0.0; 3];
        for &(i, vi, gi) in p.basis {
            v += field[i] * vi;
            for d in 0..3 {
                g[d] += field[i] * gi[d];
            }
        }
        (v, g)
    }

    /// `N_ij = -(w φ_j, ∇φ_i) - ½ ((div w) φ_j, φ_i)`
    pub fn convection(&self, w: &[Vec<f64>]) -> Dense {
        let mut m = self.zeros();
        self.integrate(3, |p| {
            let mut wv = [0.0; 3];
            let mut div = 0.0;
            for l in 0..self.dim {
                let (v, g) = Self::eval(p, &w[l]);
                wv[l] = v;
                div += g[l];
            }
            for &(i, vi, gi) in p.basis {
                let wg: f64 = (0..3).map(|d| wv[d] * gi[d]).sum();
                for &(j, vj, _) in p.basis {
                    m[i][j] += p.weight * (-wg * vj - 0.5 * div * vj * vi);
                }
            }
        });
        m
    }

    /// `-(I_h(w ⊗ w), ∇(e_l φ_i))` by quadrature, one vector per component.
    pub fn interpolated_convection(&self, w: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let nn = self.n_nodes();
        let mut out = vec![vec![0.0; nn]; self.dim];
        self.integrate(3, |p| {
            let mut t = [[0.0; 3]; 3];
            for a in 0..self.dim {
                for b in 0..self.dim {
                    for &(j, vj, _) in p.basis {
                        t[a][b] += w[a][j] * w[b][j] * vj;
                    }
                }
            }
            for &(i, _, gi) in p.basis {
                for l in 0..self.dim {
                    let s: f64 = (0..self.dim).map(|k| t[l][k] * gi[k]).sum();
                    out[l][i] -= p.weight * s;
                }
            }
        });
        out
    }

    /// `(f, e_l φ_i)` with a `q`-point rule.
    pub fn load(&self, q: usize, f: impl Fn([f64; 3]) -> [f64; 3]) -> Vec<Vec<f64>> {
        let nn = self.n_nodes();
        let mut out = vec![vec![0.0; nn]; self.dim];
        self.integrate(q, |p| {
            let fv = f(p.x);
            for &(i, vi, _) in p.basis {
                for l in 0..self.dim {
                    out[l][i] += p.weight * fv[l] * vi;
                }
            }
        });
        out
    }
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn transpose(a: &Dense) -> Dense {
    let n = a.len();
    let m = a[0].len();
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn solve(mut a: Dense, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f == 0.0 {
                continue;
            }
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

pub fn dense_max_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter().zip(b).map(|(x, y)| max_diff(x, y)).fold(0.0, f64::max)
}
