//! Fully implicit finite differences on the log-transformed grid.
//!
//! With `y = log(x / (beta l_t))` and `tau = T - t`, the moving insolvency
//! boundary sits at `y = 0` for all time, so every slice shares one uniform
//! grid. Each step solves a tridiagonal system; the `max{1, u}` term of the
//! staggered equation is handled by Newton iteration.

mod grid;
mod step;
mod surface;
mod tridiag;

pub use grid::{transformed_drift, FarField, Grid, SolverOptions, TimeMesh};
pub use step::{build_step, newton_semilinear_step, solve_tridiagonal, NewtonOutcome, StepCoefficients};
pub use surface::ValueSurface;
pub use tridiag::{Band, TridiagonalSystem};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Far-field value after an implicit step of length `dtau` from `far`, for
/// an equation whose zero-order rate is `growth`. The asymptotic rule grows
/// like a spatially constant solution of the scheme, `1 / (1 - growth dtau)`
/// per step, which tracks `e^{growth tau}` to first order.
pub fn farfield_step(rule: FarField, growth: f64, far: f64, dtau: f64) -> f64 {
    match rule {
        FarField::Asymptotic => far / (1.0 - growth * dtau),
        FarField::Zero => 0.0,
    }
}

/// Full terminal slice `min{1, x / (1 + l_T)}` on the grid.
pub fn terminal_slice(params: &ModelParams, grid: &Grid) -> Vec<f64> {
    let anchor = params.boundary_ratio(params.horizon);
    (0..=grid.n_y)
        .map(|j| params.terminal_value(anchor * grid.y(j).exp()))
        .collect()
}

/// Advances a full slice by one step: the interior is solved by Newton and
/// the boundary nodes are overwritten with `boundary`.
pub(crate) fn advance(
    coeffs: &StepCoefficients,
    prev: &[f64],
    boundary: (f64, f64),
    options: &SolverOptions,
    slice: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = prev.len() - 1;
    let out = newton_semilinear_step(coeffs, &prev[1..n], boundary, options.newton_tol, options.max_iter)
        .map_err(|e| match e {
            Error::NonConvergence {
                iterations,
                last_increment,
                ..
            } => Error::NonConvergence {
                iterations,
                last_increment,
                slice: Some(slice),
            },
            other => other,
        })?;
    let mut full = Vec::with_capacity(n + 1);
    full.push(boundary.0);
    full.extend_from_slice(&out.values);
    full.push(boundary.1);
    Ok((full, out.iterations))
}
