mod common;

use common::{dense_max_diff, max_abs, max_diff, DenseFem};
use navier_pc::operators::{FieldVector, OperatorSet};
use navier_pc::grid::StructuredGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pair(n: usize, dim: usize) -> (OperatorSet<f64>, DenseFem) {
    let grid = StructuredGrid::new(n, dim).unwrap();
    (OperatorSet::assemble(&grid, 1e-2).unwrap(), DenseFem::new(n, dim))
}

fn random_field(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> FieldVector<f64> {
    FieldVector::from_fn(dim, n, |_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
}

fn blocks(v: &FieldVector<f64>) -> Vec<Vec<f64>> {
    (0..v.dim()).map(|l| v.block(l).to_vec()).collect()
}

#[test]
fn constant_matrices_match_dense_quadrature() {
    for (n, dim) in [(2, 2), (3, 2), (2, 3), (3, 3)] {
        let (ops, fem) = pair(n, dim);
        let m = fem.mass();
        let a = fem.stiffness();
        let scale_m = fem.h.powi(dim as i32);
        let scale_a = fem.h.powi(dim as i32 - 2);
        assert!(dense_max_diff(&ops.mass().to_dense(), &m) < 1e-14 * scale_m);
        assert!(dense_max_diff(&ops.stiffness().to_dense(), &a) < 1e-14 * scale_a);
        for k in 0..dim {
            let mk = fem.directional(k);
            assert!(dense_max_diff(&ops.directional(k).to_dense(), &mk) < 1e-14 * scale_a * fem.h);
        }
        let rows: Vec<f64> = m.iter().map(|r| r.iter().sum()).collect();
        assert!(max_diff(ops.lumped_mass(), &rows) < 1e-15);
    }
}

#[test]
fn convection_matrix_matches_dense_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (n, dim) in [(3, 2), (2, 3)] {
        let (ops, fem) = pair(n, dim);
        for _ in 0..3 {
            let w = random_field(&mut rng, dim, ops.n_nodes());
            let oracle = fem.convection(&blocks(&w));
            let got = ops.convection_matrix(&w).unwrap().to_dense();
            assert!(dense_max_diff(&got, &oracle) < 1e-14);
        }
    }
}

#[test]
fn fast_convection_matches_interpolated_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for (n, dim) in [(3, 2), (2, 3)] {
        let (ops, fem) = pair(n, dim);
        for _ in 0..10 {
            let w = random_field(&mut rng, dim, ops.n_nodes());
            let oracle = fem.interpolated_convection(&blocks(&w));
            let got = ops.convection_residual_fast(&w).unwrap();
            for l in 0..dim {
                assert!(max_diff(got.block(l), &oracle[l]) < 1e-13);
            }
        }
    }
}

#[test]
fn divergence_and_pressure_terms_match_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (ops, fem) = pair(3, 3);
    let nn = ops.n_nodes();
    let v = random_field(&mut rng, 3, nn);
    let p: Vec<f64> = (0..nn).map(|_| rng.gen_range(-1.0..1.0)).collect();
    // (div v, φ_i) and (p, ∂_l φ_i) by direct quadrature
    let mut div = vec![0.0; nn];
    let mut grad = vec![vec![0.0; nn]; 3];
    let vb = blocks(&v);
    fem.integrate(3, |pt| {
        let d: f64 = (0..3).map(|l| DenseFem::eval(pt, &vb[l]).1[l]).sum();
        let (pv, _) = DenseFem::eval(pt, &p);
        for &(i, vi, gi) in pt.basis {
            div[i] += pt.weight * d * vi;
            for l in 0..3 {
                grad[l][i] += pt.weight * pv * gi[l];
            }
        }
    });
    assert!(max_diff(&ops.divergence_rhs(&v).unwrap(), &div) < 1e-15);
    let g = ops.pressure_gradient_term(&p).unwrap();
    for l in 0..3 {
        assert!(max_diff(g.block(l), &grad[l]) < 1e-15);
    }
}

#[test]
fn forcing_vector_is_exact_for_cubic_data() {
    // degree <= 3 per axis times Q1 is integrated exactly by both rules
    let f = |x: [f64; 3]| [x[0].powi(3) - x[1] * x[2], x[1] * x[1] * x[0], 1.0 + x[2].powi(3)];
    for (n, dim) in [(3, 2), (2, 3)] {
        let (ops, fem) = pair(n, dim);
        let got = ops.forcing_vector(|x, _| f(x), 0.0).unwrap();
        let oracle = fem.load(4, f);
        for l in 0..dim {
            assert!(max_diff(got.block(l), &oracle[l]) < 1e-15);
        }
    }
}

#[test]
fn manufactured_forcing_converges_to_four_point_rule() {
    use navier_pc::mms::ManufacturedCase;
    let case = ManufacturedCase::<f64>::trig_3d(1e-3);
    let (ops, fem) = pair(2, 3);
    let got = ops.mms_forcing_vector(&case, 0.3).unwrap();
    let oracle = fem.load(4, |x| case.forcing(x, 0.3));
    for l in 0..3 {
        // 3-point vs 4-point rule on smooth data, h = 1/2
        assert!(max_diff(got.block(l), &oracle[l]) < 1e-6 * (1.0 + max_abs(&oracle[l])));
    }
}

#[test]
fn skew_symmetry_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let (ops, _) = pair(4, 3);
    let nn = ops.n_nodes();
    for _ in 0..20 {
        let w = random_field(&mut rng, 3, nn);
        let nw = ops.convection_matrix(&w).unwrap();
        let v: Vec<f64> = (0..nn)
            .map(|i| if ops.boundary_mask()[i] { 0.0 } else { rng.gen_range(-1.0..1.0) })
            .collect();
        let mut y = vec![0.0; nn];
        nw.spmv(&v, &mut y).unwrap();
        let vy: f64 = v.iter().zip(&y).map(|(a, b)| a * b).sum();
        let scale: f64 = v.iter().zip(&y).map(|(a, b)| (a * b).abs()).sum();
        assert!(vy.abs() <= 1e-12 * scale.max(1e-300));
    }
}

#[test]
fn assembly_is_deterministic() {
    let (a, _) = pair(3, 3);
    let (b, _) = pair(3, 3);
    assert_eq!(a.mass().values(), b.mass().values());
    assert_eq!(a.directional(2).values(), b.directional(2).values());
}

#[test]
fn single_precision_operators_track_double() {
    let g32 = StructuredGrid::<f32>::new(3, 3).unwrap();
    let o32 = OperatorSet::assemble(&g32, 1e-2f32).unwrap();
    let (o64, _) = pair(3, 3);
    for (a, b) in o32.mass().values().iter().zip(o64.mass().values()) {
        assert!((*a as f64 - b).abs() < 1e-7 * 1e-1);
    }
}
