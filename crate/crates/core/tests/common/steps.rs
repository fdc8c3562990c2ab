//! Dense-oracle checks of single scheme stages on random data.
//!
//! Each function returns the largest nodal difference between the library
//! stage and a direct dense solve.

use navier_pc::fem::NodalField;
use navier_pc::grid::StructuredGrid;
use navier_pc::mms::ManufacturedCase;
use navier_pc::operators::{FieldVector, OperatorSet};
use navier_pc::scheme::{SchemeKind, SchemeOptions, SchemeState, Stepper};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{matvec, max_diff, solve, transpose, Dense, DenseFem};

pub const NU: f64 = 0.05;

pub fn setup(n: usize, dim: usize) -> (OperatorSet<f64>, ManufacturedCase<f64>, DenseFem) {
    let grid = StructuredGrid::new(n, dim).unwrap();
    (
        OperatorSet::assemble(&grid, NU).unwrap(),
        ManufacturedCase::for_dim(dim, NU),
        DenseFem::new(n, dim),
    )
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_field(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> FieldVector<f64> {
    FieldVector::from_blocks((0..dim).map(|_| random_vec(rng, n)).collect()).unwrap()
}

pub fn random_state(rng: &mut ChaCha8Rng, ops: &OperatorSet<f64>, k: f64) -> SchemeState<f64> {
    let (d, n) = (ops.dim(), ops.n_nodes());
    SchemeState {
        u: random_field(rng, d, n),
        u_tilde: random_field(rng, d, n),
        p: NodalField(random_vec(rng, n)),
        t: 0.0,
        step: 0,
        k,
    }
}

pub fn lumped_mean_free(mut v: Vec<f64>, m: &Dense) -> Vec<f64> {
    let w: Vec<f64> = m.iter().map(|r| r.iter().sum()).collect();
    let mean = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
    v.iter_mut().for_each(|x| *x -= mean);
    v
}

/// `(p, ∂_l φ_i)` for every block.
pub fn dense_gradient(fem: &DenseFem, p: &[f64]) -> Vec<Vec<f64>> {
    (0..fem.dim).map(|l| matvec(&fem.directional(l), p)).collect()
}

/// One implicit predictor with random state, forcing and boundary data.
pub fn implicit_step(n: usize, dim: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let (ops, case, fem) = setup(n, dim);
    let k = 0.05;
    let state = random_state(&mut rng, &ops, k);
    let forcing = random_field(&mut rng, dim, ops.n_nodes());
    let g = random_field(&mut rng, dim, ops.n_nodes());
    let mut st = Stepper::new(&ops, &case, SchemeOptions::new(SchemeKind::Implicit)).unwrap();
    let (got, _) = st.momentum_implicit(&state, &forcing, &g).unwrap();

    let m = fem.mass();
    let a = fem.stiffness();
    let nw = fem.convection(&(0..dim).map(|l| state.u_tilde.block(l).to_vec()).collect::<Vec<_>>());
    let gp = dense_gradient(&fem, &state.p);
    let nn = fem.n_nodes();
    for l in 0..dim {
        let mu = matvec(&m, state.u.block(l));
        let mut sys = vec![vec![0.0; nn]; nn];
        let mut rhs = vec![0.0; nn];
        for i in 0..nn {
            if fem.is_boundary(i) {
                sys[i][i] = 1.0;
                rhs[i] = g.block(l)[i];
            } else {
                for j in 0..nn {
                    sys[i][j] = m[i][j] / k + NU * a[i][j] + nw[i][j];
                }
                rhs[i] = mu[i] / k + forcing.block(l)[i] + gp[l][i];
            }
        }
        let want = solve(sys, rhs);
        worst = worst.max(max_diff(got.block(l), &want));
    }
    worst
}

/// One pressure update against the bordered Neumann system.
pub fn pressure_update(n: usize, dim: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let (ops, case, fem) = setup(n, dim);
    let k = 0.1;
    let state = random_state(&mut rng, &ops, k);
    let ut = random_field(&mut rng, dim, ops.n_nodes());
    let st = Stepper::new(&ops, &case, SchemeOptions::new(SchemeKind::Implicit)).unwrap();
    let (p, dp, _) = st.pressure_update(&state, &ut).unwrap();

    // (div v, φ_i) = Σ_l (M_lᵀ v^l)_i
    let nn = fem.n_nodes();
    let mut b = vec![0.0; nn];
    for l in 0..dim {
        let d = matvec(&transpose(&fem.directional(l)), ut.block(l));
        for i in 0..nn {
            b[i] -= d[i] / k;
        }
    }
    let mean = b.iter().sum::<f64>() / nn as f64;
    b.iter_mut().for_each(|v| *v -= mean);
    // bordered system [L 1; 1ᵀ 0]
    let a = fem.stiffness();
    let mut sys = vec![vec![0.0; nn + 1]; nn + 1];
    for i in 0..nn {
        sys[i][..nn].copy_from_slice(&a[i]);
        sys[i][nn] = 1.0;
        sys[nn][i] = 1.0;
    }
    b.push(0.0);
    let mut x = solve(sys, b);
    x.pop();
    let m = fem.mass();
    let want = lumped_mean_free(x, &m);
    worst = worst.max(max_diff(&dp, &want));
    let p_want = lumped_mean_free(state.p.iter().zip(&want).map(|(a, b)| a + b).collect(), &m);
    worst = worst.max(max_diff(&p, &p_want));
    worst
}

/// One correction for every scheme against the interior mass solve.
pub fn correction(n: usize, dim: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let (ops, case, fem) = setup(n, dim);
    let k = 0.1;
    let state = random_state(&mut rng, &ops, k);
    let ut = random_field(&mut rng, dim, ops.n_nodes());
    let dp = random_vec(&mut rng, ops.n_nodes());
    let m = fem.mass();
    let gp = dense_gradient(&fem, &dp);
    let interior: Vec<usize> = (0..fem.n_nodes()).filter(|&i| !fem.is_boundary(i)).collect();
    for kind in SchemeKind::ALL {
        let st = Stepper::new(&ops, &case, SchemeOptions::new(kind)).unwrap();
        let (got, _) = st.velocity_correction(&state, &ut, &dp, kind).unwrap();
        for l in 0..dim {
            let mii: Dense = interior
                .iter()
                .map(|&i| {
                    if kind.lumped() {
                        interior.iter().map(|&j| if i == j { m[i].iter().sum() } else { 0.0 }).collect()
                    } else {
                        interior.iter().map(|&j| m[i][j]).collect()
                    }
                })
                .collect();
            let rhs: Vec<f64> = interior.iter().map(|&i| k * gp[l][i]).collect();
            let delta = solve(mii, rhs);
            let mut want = ut.block(l).to_vec();
            for (c, &i) in interior.iter().enumerate() {
                want[i] += delta[c];
            }
            worst = worst.max(max_diff(got.block(l), &want));
        }
    }
    worst
}
