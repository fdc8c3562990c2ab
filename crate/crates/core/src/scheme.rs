//! Incremental pressure-correction time stepping.
//!
//! One step from `t_{n-1}` to `t_n = n k`:
//!
//! 1. momentum predictor `ũⁿ` (implicit, explicit, or explicit*),
//! 2. pressure increment `δp` from `L δp = -(1/k) (div ũⁿ, φ)`, `pⁿ = p^{n-1} + δp`,
//! 3. correction `(uⁿ, χ) = (ũⁿ, χ) + k (δp, div χ)` for `χ` vanishing on `∂Ω`.
//!
//! Velocity Dirichlet data is imposed strongly on `ũⁿ`; the correction only
//! moves interior degrees of freedom.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};
use crate::fem::{nodal_interpolate, NodalField};
use crate::krylov::{
    bicgstab, cg, remove_mean, remove_plain_mean, Jacobi, LinearOperator, Preconditioner, SolveReport,
    SolverConfig,
};
use crate::mms::ManufacturedCase;
use crate::operators::{FieldVector, OperatorSet};
use crate::real::{dot, Real};
use crate::sparse::CsrMatrix;
use crate::tensor::{NeumannPoissonInverse, TensorMassInverse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeKind {
    Implicit,
    Explicit,
    ExplicitStar,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::Implicit, SchemeKind::Explicit, SchemeKind::ExplicitStar];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Implicit => "implicit",
            SchemeKind::Explicit => "explicit",
            SchemeKind::ExplicitStar => "explicit-star",
        }
    }

    /// Whether mass solves use the lumped diagonal.
    pub fn lumped(self) -> bool {
        self == SchemeKind::ExplicitStar
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "implicit" => Ok(SchemeKind::Implicit),
            "explicit" => Ok(SchemeKind::Explicit),
            "explicit-star" | "explicit*" => Ok(SchemeKind::ExplicitStar),
            other => Err(Error::config("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

/// Preconditioning of the mass, momentum and pressure systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerChoice {
    Jacobi,
    /// Exact tensor-product inverses of the uniform-grid mass and Neumann
    /// Laplacian (see [`crate::tensor`]).
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOptions {
    pub kind: SchemeKind,
    pub momentum_solver: SolverConfig,
    pub pressure_solver: SolverConfig,
    pub mass_solver: SolverConfig,
    /// Inverse-inequality constant entering the viscous diagnostic.
    pub c_inv: f64,
    pub preconditioner: PreconditionerChoice,
}

impl SchemeOptions {
    pub fn new(kind: SchemeKind) -> Self {
        Self {
            kind,
            momentum_solver: SolverConfig::default(),
            pressure_solver: SolverConfig::default(),
            mass_solver: SolverConfig::default(),
            c_inv: 1.0,
            preconditioner: PreconditionerChoice::Structured,
        }
    }
}

/// State of one trajectory at `t = step · k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeState<T> {
    /// End-step velocity `uⁿ`.
    pub u: FieldVector<T>,
    /// Predictor `ũⁿ`.
    pub u_tilde: FieldVector<T>,
    /// Pressure `pⁿ`, zero lumped-mass mean.
    pub p: NodalField<T>,
    pub t: T,
    pub step: usize,
    pub k: T,
}

/// Time-step restriction terms evaluated on `ũ^{n-1}`, plus solver reports.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    /// `k ν c_inv² / h²`
    pub theta_visc: f64,
    /// `k ‖ũ^{n-1}‖²_∞ / (4ν)`
    pub theta_conv: f64,
    /// `k ‖ũ^{n-1}‖_∞ / h`
    pub cfl_adv: f64,
    pub max_velocity: f64,
    pub momentum: Option<SolveReport>,
    pub pressure: SolveReport,
    pub correction: Option<SolveReport>,
}

impl StepDiagnostics {
    /// Total iterations of the momentum stage (predictor mass/system solves).
    pub fn momentum_iterations(&self) -> usize {
        self.momentum.map_or(0, |r| r.iterations)
    }
}

/// Evaluates the diagnostic terms for a given predictor magnitude.
pub fn restriction_terms(k: f64, h: f64, nu: f64, c_inv: f64, max_velocity: f64) -> (f64, f64, f64) {
    (
        k * nu * c_inv * c_inv / (h * h),
        k * max_velocity * max_velocity / (4.0 * nu),
        k * max_velocity / h,
    )
}

/// Mass matrix restricted to interior rows and columns, identity on the boundary.
struct DirichletOperator<'a, T> {
    matrix: &'a CsrMatrix<T>,
    boundary: &'a [bool],
}

impl<T: Real> LinearOperator<T> for DirichletOperator<'_, T> {
    fn size(&self) -> usize {
        self.matrix.n_rows()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let rp = self.matrix.row_ptr();
        let ci = self.matrix.col_idx();
        let v = self.matrix.values();
        for (r, yr) in y.iter_mut().enumerate() {
            if self.boundary[r] {
                *yr = x[r];
                continue;
            }
            let mut s = T::zero();
            for k in rp[r]..rp[r + 1] {
                let c = ci[k] as usize;
                if !self.boundary[c] {
                    s += v[k] * x[c];
                }
            }
            *yr = s;
        }
    }
}

/// Terms of the energy identity obtained by testing the correction with the
/// end-step velocity in its exact representation `ũ - k∇δp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionEnergy<T> {
    /// `‖ũ‖²`
    pub predictor: T,
    /// `‖ũ - k∇δp‖² + ‖k∇δp‖² - ‖ũ‖²`
    pub defect: T,
    /// `‖k∇δp‖²`
    pub increment: T,
}

/// Evaluates the correction energy identity from the assembled matrices.
///
/// Uses `(ũ, ∇δp) = Σ_l δp · M_l ũ^l` and `‖∇δp‖² = δp · L δp`.
pub fn correction_energy<T: Real>(
    ops: &OperatorSet<T>,
    u_tilde: &FieldVector<T>,
    dp: &[T],
    k: T,
) -> Result<CorrectionEnergy<T>> {
    check_len(ops.n_nodes(), dp.len())?;
    let n = ops.n_nodes();
    let mut tmp = vec![T::zero(); n];
    let mut predictor = T::zero();
    let mut coupling = T::zero();
    for l in 0..ops.dim() {
        ops.mass().spmv(u_tilde.block(l), &mut tmp)?;
        predictor += dot(u_tilde.block(l), &tmp);
        ops.directional(l).spmv(u_tilde.block(l), &mut tmp)?;
        coupling += dot(dp, &tmp);
    }
    ops.laplacian().spmv(dp, &mut tmp)?;
    let grad2 = dot(dp, &tmp);
    let two = T::lit(2.0);
    Ok(CorrectionEnergy {
        predictor,
        defect: two * k * (k * grad2 - coupling),
        increment: k * k * grad2,
    })
}

/// Pressure-correction stepper bound to one operator set and data case.
pub struct Stepper<'a, T> {
    ops: &'a OperatorSet<T>,
    case: &'a ManufacturedCase<T>,
    opts: SchemeOptions,
    boundary_nodes: Vec<usize>,
    mass_precond: Box<dyn Preconditioner<T> + 'a>,
    momentum_precond_scale: Option<TensorMassInverse<T>>,
    pressure_precond: Box<dyn Preconditioner<T> + 'a>,
    system: Option<CsrMatrix<T>>,
}

impl<'a, T: Real> Stepper<'a, T> {
    pub fn new(ops: &'a OperatorSet<T>, case: &'a ManufacturedCase<T>, opts: SchemeOptions) -> Result<Self> {
        check_len(ops.dim(), case.dim())?;
        opts.momentum_solver.validate()?;
        opts.pressure_solver.validate()?;
        opts.mass_solver.validate()?;
        let grid = ops.grid();
        let boundary = ops.boundary_mask();
        let (mass_precond, pressure_precond): (Box<dyn Preconditioner<T>>, Box<dyn Preconditioner<T>>) =
            match opts.preconditioner {
                PreconditionerChoice::Structured => (
                    Box::new(TensorMassInverse::new(grid)),
                    Box::new(NeumannPoissonInverse::new(grid)),
                ),
                PreconditionerChoice::Jacobi => {
                    let diag: Vec<T> = ops
                        .mass()
                        .diagonal()
                        .iter()
                        .zip(boundary)
                        .map(|(&d, &b)| if b { T::one() } else { d })
                        .collect();
                    (Box::new(Jacobi::new(&diag)), Box::new(Jacobi::from_matrix(ops.laplacian())))
                }
            };
        Ok(Self {
            ops,
            case,
            opts,
            boundary_nodes: grid.boundary_node_indices(),
            mass_precond,
            momentum_precond_scale: None,
            pressure_precond,
            system: None,
        })
    }

    pub fn options(&self) -> &SchemeOptions {
        &self.opts
    }

    pub fn kind(&self) -> SchemeKind {
        self.opts.kind
    }

    pub fn operators(&self) -> &OperatorSet<T> {
        self.ops
    }

    /// `u⁰ = ũ⁰ = I_h u(·, 0)`, `p⁰` = zero-mean projection of `I_h p(·, 0)`.
    pub fn initialize(&self, k: T) -> SchemeState<T> {
        let grid = self.ops.grid();
        let u = FieldVector::from_fn(grid.dim(), grid.n_nodes(), |i| {
            self.case.exact_velocity(grid.node_position(i), T::zero())
        });
        let mut p = nodal_interpolate(|x, t| self.case.exact_pressure(x, t), grid, T::zero());
        remove_mean(&mut p, self.ops.lumped_mass());
        SchemeState {
            u_tilde: u.clone(),
            u,
            p,
            t: T::zero(),
            step: 0,
            k,
        }
    }

    /// Exact velocity at the boundary nodes at time `t` (interior entries zero).
    pub fn dirichlet_data(&self, t: T) -> FieldVector<T> {
        let grid = self.ops.grid();
        let mut g = FieldVector::zeros(grid.dim(), grid.n_nodes());
        let n = grid.n_nodes();
        for &i in &self.boundary_nodes {
            let v = self.case.exact_velocity(grid.node_position(i), t);
            for l in 0..grid.dim() {
                g[l * n + i] = v[l];
            }
        }
        g
    }

    /// Step diagnostics evaluated on the current predictor.
    pub fn diagnostics(&self, state: &SchemeState<T>) -> StepDiagnostics {
        let maxv = state.u_tilde.max_norm().as_f64();
        let (theta_visc, theta_conv, cfl_adv) = restriction_terms(
            state.k.as_f64(),
            self.ops.grid().h().as_f64(),
            self.ops.nu().as_f64(),
            self.opts.c_inv,
            maxv,
        );
        StepDiagnostics {
            step: state.step + 1,
            t: (T::from_usize_lossy(state.step + 1) * state.k).as_f64(),
            theta_visc,
            theta_conv,
            cfl_adv,
            max_velocity: maxv,
            ..Default::default()
        }
    }

    fn set_boundary(&self, v: &mut [T], g: &[T]) {
        for &i in &self.boundary_nodes {
            v[i] = g[i];
        }
    }

    fn fail(&self, stage: &'static str, state: &SchemeState<T>, report: SolveReport) -> Error {
        Error::SolverFailure {
            stage,
            step: state.step + 1,
            report,
        }
    }

    /// Implicit predictor:
    /// `[(1/k)M + νA + N(ũ^{n-1})] ũⁿ = (1/k) M u^{n-1} + F + (p^{n-1}, div χ)`
    /// with Dirichlet rows replaced by identity rows and exact boundary values.
    pub fn momentum_implicit(
        &mut self,
        state: &SchemeState<T>,
        forcing: &FieldVector<T>,
        dirichlet: &FieldVector<T>,
    ) -> Result<(FieldVector<T>, SolveReport)> {
        let ops = self.ops;
        let k = state.k;
        let inv_k = T::one() / k;
        let nu = ops.nu();
        let mut system = match self.system.take() {
            Some(s) => s,
            None => CsrMatrix::zeros(ops.pattern().clone()),
        };
        {
            let vals = system.values_mut();
            for ((v, m), a) in vals.iter_mut().zip(ops.mass().values()).zip(ops.stiffness().values()) {
                *v = inv_k * *m + nu * *a;
            }
            ops.add_convection(&state.u_tilde, T::one(), vals);
        }
        let rp = ops.pattern().row_ptr().to_vec();
        let ci = ops.pattern().col_idx();
        for &i in &self.boundary_nodes {
            let vals = system.values_mut();
            for kk in rp[i]..rp[i + 1] {
                vals[kk] = if ci[kk] as usize == i { T::one() } else { T::zero() };
            }
        }

        let gradp = ops.pressure_gradient_term(&state.p)?;
        let n = ops.n_nodes();
        let mut out = FieldVector::zeros(ops.dim(), n);
        let mut rhs = vec![T::zero(); n];
        let mut total = SolveReport {
            converged: true,
            ..Default::default()
        };
        let scaled = self
            .momentum_precond_scale
            .take()
            .unwrap_or_else(|| TensorMassInverse::new(ops.grid()).with_scale(k));
        let jacobi;
        let precond: &dyn Preconditioner<T> = match self.opts.preconditioner {
            PreconditionerChoice::Structured => &scaled,
            PreconditionerChoice::Jacobi => {
                jacobi = Jacobi::from_matrix(&system);
                &jacobi
            }
        };
        for l in 0..ops.dim() {
            ops.mass().spmv(state.u.block(l), &mut rhs)?;
            for ((r, f), g) in rhs.iter_mut().zip(forcing.block(l)).zip(gradp.block(l)) {
                *r = inv_k * *r + *f + *g;
            }
            self.set_boundary(&mut rhs, dirichlet.block(l));
            let x = out.block_mut(l);
            x.copy_from_slice(state.u_tilde.block(l));
            for &i in &self.boundary_nodes {
                x[i] = dirichlet.block(l)[i];
            }
            let rep = bicgstab(&system, &rhs, x, &self.opts.momentum_solver, precond)?;
            total.iterations += rep.iterations;
            total.residual = total.residual.max(rep.residual);
            total.converged &= rep.converged;
        }
        self.system = Some(system);
        self.momentum_precond_scale = Some(scaled);
        if !total.converged {
            return Err(self.fail("momentum", state, total));
        }
        Ok((out, total))
    }

    /// Explicit predictor with
    /// `r = M u^{n-1} + k [F - ν A ũ^{n-1} - C(ũ^{n-1}) + (p^{n-1}, div χ)]`.
    ///
    /// [`SchemeKind::Explicit`] solves `M ũⁿ = r` on interior nodes.
    /// [`SchemeKind::ExplicitStar`] lumps the whole time-derivative term,
    /// `M_L (ũⁿ - u^{n-1}) = r - M u^{n-1}`, and uses the interpolated
    /// convection, so no linear system is solved.
    pub fn momentum_explicit(
        &self,
        state: &SchemeState<T>,
        forcing: &FieldVector<T>,
        dirichlet: &FieldVector<T>,
        variant: SchemeKind,
    ) -> Result<(FieldVector<T>, Option<SolveReport>)> {
        let ops = self.ops;
        let k = state.k;
        let nu = ops.nu();
        let conv = match variant {
            SchemeKind::ExplicitStar => ops.convection_residual_fast(&state.u_tilde)?,
            SchemeKind::Explicit => ops.convection_residual(&state.u_tilde)?,
            SchemeKind::Implicit => {
                return Err(Error::InvalidArgument("implicit scheme has no explicit predictor".into()))
            }
        };
        let gradp = ops.pressure_gradient_term(&state.p)?;
        let n = ops.n_nodes();
        let mut out = FieldVector::zeros(ops.dim(), n);
        let mut au = vec![T::zero(); n];
        let mut r = vec![T::zero(); n];
        let mut mu = vec![T::zero(); n];
        let mut total = SolveReport {
            converged: true,
            ..Default::default()
        };
        for l in 0..ops.dim() {
            ops.mass().spmv(state.u.block(l), &mut mu)?;
            ops.stiffness().spmv(state.u_tilde.block(l), &mut au)?;
            for i in 0..n {
                r[i] = mu[i] + k * (forcing.block(l)[i] - nu * au[i] - conv.block(l)[i] + gradp.block(l)[i]);
            }
            let g = dirichlet.block(l);
            match variant {
                SchemeKind::ExplicitStar => {
                    let x = out.block_mut(l);
                    // M_L (ũ - u^{n-1}) = r - M u^{n-1}
                    for (((xi, ri), mi), (ui, m)) in x
                        .iter_mut()
                        .zip(&r)
                        .zip(&mu)
                        .zip(state.u.block(l).iter().zip(ops.lumped_mass()))
                    {
                        *xi = *ui + (*ri - *mi) / *m;
                    }
                    self.set_boundary(x, g);
                }
                _ => {
                    let rep = self.solve_interior_mass(&mut r, g, state.u_tilde.block(l), out.block_mut(l))?;
                    total.iterations += rep.iterations;
                    total.residual = total.residual.max(rep.residual);
                    total.converged &= rep.converged;
                }
            }
        }
        if variant == SchemeKind::ExplicitStar {
            return Ok((out, None));
        }
        if !total.converged {
            return Err(self.fail("mass", state, total));
        }
        Ok((out, Some(total)))
    }

    /// Solves `M_II x_I = r_I - M_IB g_B`, `x_B = g_B`. `r` is overwritten.
    fn solve_interior_mass(&self, r: &mut [T], g: &[T], guess: &[T], x: &mut [T]) -> Result<SolveReport> {
        let ops = self.ops;
        let boundary = ops.boundary_mask();
        let n = ops.n_nodes();
        let mut gb = vec![T::zero(); n];
        for &i in &self.boundary_nodes {
            gb[i] = g[i];
        }
        let mut mg = vec![T::zero(); n];
        ops.mass().spmv(&gb, &mut mg)?;
        for i in 0..n {
            r[i] = if boundary[i] { g[i] } else { r[i] - mg[i] };
        }
        x.copy_from_slice(guess);
        self.set_boundary(x, g);
        let op = DirichletOperator {
            matrix: ops.mass(),
            boundary,
        };
        cg(&op, r, x, &self.opts.mass_solver, self.mass_precond.as_ref())
    }

    /// Step 2: `L δp = -(1/k) (div ũⁿ, φ)`, `pⁿ = p^{n-1} + δp`, both zero-mean.
    ///
    /// Returns `(pⁿ, δp, report)`.
    pub fn pressure_update(
        &self,
        state: &SchemeState<T>,
        u_tilde: &FieldVector<T>,
    ) -> Result<(NodalField<T>, NodalField<T>, SolveReport)> {
        let ops = self.ops;
        let mut b = ops.divergence_rhs(u_tilde)?.into_inner();
        let scale = -T::one() / state.k;
        b.iter_mut().for_each(|v| *v *= scale);
        remove_plain_mean(&mut b);
        let mut dp = vec![T::zero(); ops.n_nodes()];
        let rep = cg(
            ops.laplacian(),
            &b,
            &mut dp,
            &self.opts.pressure_solver,
            self.pressure_precond.as_ref(),
        )?;
        if !rep.converged {
            return Err(self.fail("pressure", state, rep));
        }
        remove_mean(&mut dp, ops.lumped_mass());
        let mut p: Vec<T> = state.p.iter().zip(&dp).map(|(a, b)| *a + *b).collect();
        remove_mean(&mut p, ops.lumped_mass());
        Ok((NodalField(p), NodalField(dp), rep))
    }

    /// Step 3: `M (uⁿ - ũⁿ) = k (δp, div χ)` on interior nodes; boundary
    /// values of `ũⁿ` are kept.
    pub fn velocity_correction(
        &self,
        state: &SchemeState<T>,
        u_tilde: &FieldVector<T>,
        dp: &[T],
        variant: SchemeKind,
    ) -> Result<(FieldVector<T>, Option<SolveReport>)> {
        let ops = self.ops;
        let n = ops.n_nodes();
        let mut rhs = ops.pressure_gradient_term(dp)?;
        rhs.as_mut_slice().iter_mut().for_each(|v| *v *= state.k);
        let mut out = u_tilde.clone();
        let zeros = vec![T::zero(); n];
        let mut delta = vec![T::zero(); n];
        let mut total = SolveReport {
            converged: true,
            ..Default::default()
        };
        for l in 0..ops.dim() {
            if variant.lumped() {
                for ((d, r), m) in delta.iter_mut().zip(rhs.block(l)).zip(ops.lumped_mass()) {
                    *d = *r / *m;
                }
                for &i in &self.boundary_nodes {
                    delta[i] = T::zero();
                }
            } else {
                let rep = self.solve_interior_mass(rhs.block_mut(l), &zeros, &zeros, &mut delta)?;
                total.iterations += rep.iterations;
                total.residual = total.residual.max(rep.residual);
                total.converged &= rep.converged;
            }
            for (u, d) in out.block_mut(l).iter_mut().zip(&delta) {
                *u += *d;
            }
        }
        if variant.lumped() {
            return Ok((out, None));
        }
        if !total.converged {
            return Err(self.fail("correction", state, total));
        }
        Ok((out, Some(total)))
    }

    /// Advances `state` by one step and returns the diagnostics, which are
    /// evaluated on `ũ^{n-1}` before the momentum step.
    pub fn advance(&mut self, state: &mut SchemeState<T>) -> Result<StepDiagnostics> {
        let mut diag = self.diagnostics(state);
        let t_new = T::from_usize_lossy(state.step + 1) * state.k;
        let g = self.dirichlet_data(t_new);
        let forcing = self.ops.mms_forcing_vector(self.case, t_new)?;
        let kind = self.opts.kind;
        let (u_tilde, mom) = match kind {
            SchemeKind::Implicit => {
                let (u, r) = self.momentum_implicit(state, &forcing, &g)?;
                (u, Some(r))
            }
            _ => self.momentum_explicit(state, &forcing, &g, kind)?,
        };
        let (p, dp, prep) = self.pressure_update(state, &u_tilde)?;
        let (u, crep) = self.velocity_correction(state, &u_tilde, &dp, kind)?;
        diag.momentum = mom;
        diag.pressure = prep;
        diag.correction = crep;
        state.u = u;
        state.u_tilde = u_tilde;
        state.p = p;
        state.step += 1;
        state.t = t_new;
        Ok(diag)
    }
}
