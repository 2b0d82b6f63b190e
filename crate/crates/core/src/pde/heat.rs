use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::RingGrid;

use super::field::{ScalarField, Scheme, SpaceTimeSolution};
use super::operator::Operator;

/// Iteration cap for every conjugate-gradient solve.
pub const MAX_CG_ITERATIONS: usize = 10_000;

/// Leading Crank-Nicolson steps replaced by two backward-Euler half steps.
pub const RANNACHER_STEPS: usize = 2;

/// Tolerance on the boundary data carried by initial fields.
pub const BOUNDARY_COMPAT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, serde::Serialize)]
pub struct HeatParams {
    pub dt: f64,
    pub t_end: f64,
    pub save_stride: usize,
    pub cg_tol: f64,
    pub scheme: Scheme,
    pub outer_value: f64,
    pub inner_value: f64,
}

impl Default for HeatParams {
    fn default() -> Self {
        HeatParams {
            dt: 1e-3,
            t_end: 0.5,
            save_stride: 10,
            cg_tol: 1e-10,
            scheme: Scheme::BackwardEuler,
            outer_value: 0.0,
            inner_value: 1.0,
        }
    }
}

impl HeatParams {
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }
}

/// Time-steps the heat equation from `u0` with Dirichlet data on both
/// boundaries. The initial slice and every `save_stride`-th step are kept,
/// as is the final step.
pub fn solve_heat(u0: &ScalarField, params: &HeatParams) -> Result<SpaceTimeSolution> {
    let op = Operator::new(u0.grid().clone());
    solve_heat_with(&op, u0, params)
}

/// As [`solve_heat`] with a prebuilt operator.
pub fn solve_heat_with(op: &Operator, u0: &ScalarField, params: &HeatParams) -> Result<SpaceTimeSolution> {
    let grid = op.grid();
    if !Arc::ptr_eq(grid, u0.grid()) && grid.mask_hash() != u0.grid().mask_hash() {
        return Err(Error::invalid("initial data lives on a different mask"));
    }
    if !(params.dt > 0.0) || !(params.t_end > 0.0) {
        return Err(Error::invalid("dt and t_end must be positive"));
    }
    if params.dt > grid.spacing() {
        return Err(Error::invalid(format!(
            "time step {} exceeds grid spacing {}",
            params.dt,
            grid.spacing()
        )));
    }
    if params.save_stride == 0 {
        return Err(Error::invalid("save_stride must be at least 1"));
    }
    if (u0.outer_value() - params.outer_value).abs() > BOUNDARY_COMPAT_TOL
        || (u0.inner_value() - params.inner_value).abs() > BOUNDARY_COMPAT_TOL
    {
        return Err(Error::invalid(format!(
            "initial data has boundary values ({}, {}), solve expects ({}, {})",
            u0.outer_value(),
            u0.inner_value(),
            params.outer_value,
            params.inner_value
        )));
    }
    let steps = params.steps();
    let dt = params.dt;
    let b = op.boundary_rhs(params.outer_value, params.inner_value);
    let mut u = u0.unknowns();
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("initial data is not finite"));
    }
    let mut rhs = vec![0.0; u.len()];
    let mut au = vec![0.0; u.len()];
    let mut times = vec![0.0];
    let mut slices = vec![ScalarField::from_unknowns(
        grid.clone(),
        &u,
        params.outer_value,
        params.inner_value,
    )];
    for step in 1..=steps {
        match params.scheme {
            Scheme::CrankNicolson if step <= RANNACHER_STEPS => {
                // damp the stiff modes excited by incompatible data before switching to CN
                for _ in 0..2 {
                    for i in 0..u.len() {
                        rhs[i] = u[i] + 0.5 * dt * b[i];
                    }
                    op.solve(1.0, 0.5 * dt, &rhs, &mut u, params.cg_tol, MAX_CG_ITERATIONS)?;
                }
            }
            Scheme::BackwardEuler => {
                for i in 0..u.len() {
                    rhs[i] = u[i] + dt * b[i];
                }
                op.solve(1.0, dt, &rhs, &mut u, params.cg_tol, MAX_CG_ITERATIONS)?;
            }
            Scheme::CrankNicolson => {
                op.apply(&u, &mut au);
                for i in 0..u.len() {
                    rhs[i] = u[i] - 0.5 * dt * au[i] + dt * b[i];
                }
                op.solve(1.0, 0.5 * dt, &rhs, &mut u, params.cg_tol, MAX_CG_ITERATIONS)?;
            }
        }
        if step % params.save_stride == 0 || step == steps {
            times.push(step as f64 * dt);
            slices.push(ScalarField::from_unknowns(
                grid.clone(),
                &u,
                params.outer_value,
                params.inner_value,
            ));
        }
    }
    Ok(SpaceTimeSolution {
        dt,
        scheme: params.scheme,
        times,
        slices,
    })
}

/// Discrete harmonic function with the given boundary values.
pub fn solve_laplace(grid: &Arc<RingGrid>, outer_value: f64, inner_value: f64, cg_tol: f64) -> Result<ScalarField> {
    solve_poisson(grid, 0.0, outer_value, inner_value, cg_tol)
}

/// Solves `Δu = source` with Dirichlet data.
pub fn solve_poisson(
    grid: &Arc<RingGrid>,
    source: f64,
    outer_value: f64,
    inner_value: f64,
    cg_tol: f64,
) -> Result<ScalarField> {
    let op = Operator::new(grid.clone());
    let rhs: Vec<f64> = op
        .boundary_rhs(outer_value, inner_value)
        .into_iter()
        .map(|b| b - source)
        .collect();
    let mut x = vec![0.5 * (outer_value + inner_value); op.size()];
    op.solve(0.0, 1.0, &rhs, &mut x, cg_tol, MAX_CG_ITERATIONS)?;
    Ok(ScalarField::from_unknowns(grid.clone(), &x, outer_value, inner_value))
}

/// Admissible initial data: `Δu₀ = c > 0` with `u₀ = 0` outside and `1` on
/// the inner body.
pub fn make_initial_poisson(grid: &Arc<RingGrid>, c: f64, cg_tol: f64) -> Result<ScalarField> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid(format!("source {c} must be positive")));
    }
    solve_poisson(grid, c, 0.0, 1.0, cg_tol)
}
