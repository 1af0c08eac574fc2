//! One fully implicit time step of the transformed equation
//!
//! ```text
//! u_tau = 1/2 sigma^2 u_yy + (r_V - r_L - sigma^2/2) u_y
//!         + (growth - zeta) u + eta max{1, u} + kappa
//! ```
//!
//! on the interior nodes `j = 1..n_y-1`.

use crate::beliefs::{theta, BeliefSpec};
use crate::error::{Error, Result};
use crate::fd::grid::Grid;
use crate::fd::tridiag::{Band, TridiagonalSystem};
use crate::model::ModelParams;

/// Coefficients of `A u - eta max{1, u} = kappa_bar` on the interior nodes.
/// Vectors are indexed by interior row, so entry `i` belongs to node `j = i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCoefficients {
    /// Time-to-maturity at the new level.
    pub tau: f64,
    pub dtau: f64,
    pub a: Vec<f64>,
    /// Super-diagonal (couples node `j` to `j + 1`).
    pub b: f64,
    /// Sub-diagonal (couples node `j` to `j - 1`).
    pub c: f64,
    pub zeta: Vec<f64>,
    pub eta: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl StepCoefficients {
    /// Assembles the operator from interior killing, semilinear and source
    /// terms. `growth` is the zero-order rate (`r_S - r` for creditor values).
    pub fn assemble(
        params: &ModelParams,
        grid: &Grid,
        tau: f64,
        dtau: f64,
        growth: f64,
        zeta: Vec<f64>,
        eta: Vec<f64>,
        kappa: Vec<f64>,
    ) -> Result<Self> {
        let m = grid.n_y - 1;
        if zeta.len() != m || eta.len() != m || kappa.len() != m {
            return Err(Error::Domain(format!(
                "coefficient vectors must have {m} interior entries"
            )));
        }
        if !(dtau > 0.0) {
            return Err(Error::Domain(format!("time step {dtau} must be > 0")));
        }
        let dy = grid.dy();
        let diff = params.sigma * params.sigma / (dy * dy);
        let (b, c) = grid.off_diagonals(params);
        let a = zeta.iter().map(|z| 1.0 / dtau + diff - (growth - z)).collect();
        Ok(Self {
            tau,
            dtau,
            a,
            b,
            c,
            zeta,
            eta,
            kappa,
        })
    }

    pub fn interior_len(&self) -> usize {
        self.a.len()
    }

    /// The linear part `A`.
    pub fn matrix(&self) -> TridiagonalSystem<'_> {
        TridiagonalSystem::new(Band::Constant(self.c), &self.a, Band::Constant(self.b))
    }

    /// `kappa_bar = u_prev / dtau + kappa`, with the boundary values moved to
    /// the right-hand side on the first and last rows.
    pub fn rhs(&self, u_prev: &[f64], boundary: (f64, f64)) -> Vec<f64> {
        let m = self.interior_len();
        let mut r: Vec<f64> = u_prev
            .iter()
            .zip(&self.kappa)
            .map(|(u, k)| u / self.dtau + k)
            .collect();
        r[0] -= self.c * boundary.0;
        r[m - 1] -= self.b * boundary.1;
        r
    }

    /// Residual `A v - eta max{1, v} - kappa_bar` of a candidate interior slice.
    pub fn residual(&self, v: &[f64], u_prev: &[f64], boundary: (f64, f64)) -> Vec<f64> {
        let av = self.matrix().apply(v);
        let rhs = self.rhs(u_prev, boundary);
        av.iter()
            .zip(v)
            .zip(self.eta.iter().zip(&rhs))
            .map(|((av, v), (e, r))| av - e * v.max(1.0) - r)
            .collect()
    }
}

/// Coefficients of the creditor-value equation at time-to-maturity `tau`
/// over a step of length `dtau`, with run intensity `intensity(x)`.
///
/// Nodes are mapped back to ratios by `x_j = beta l_{T - tau} e^{j dy}`.
pub fn build_step(
    params: &ModelParams,
    beliefs: &BeliefSpec,
    intensity: impl Fn(f64) -> f64,
    grid: &Grid,
    tau: f64,
    dtau: f64,
) -> Result<StepCoefficients> {
    if !(tau >= -1e-12 && tau <= params.horizon + 1e-9) {
        return Err(Error::Domain(format!(
            "tau={tau} outside [0, {}]",
            params.horizon
        )));
    }
    let t = (params.horizon - tau).max(0.0);
    let l = params.ratio_at(t);
    let anchor = params.beta * l;
    let dy = grid.dy();
    let m = grid.n_y - 1;
    let mut zeta = Vec::with_capacity(m);
    let mut eta = Vec::with_capacity(m);
    let mut kappa = Vec::with_capacity(m);
    for j in 1..grid.n_y {
        let x = anchor * (j as f64 * dy).exp();
        let g = intensity(x);
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::Domain(format!("run intensity {g} at x={x} must be finite and >= 0")));
        }
        let th = theta(params, beliefs, x);
        zeta.push(g);
        eta.push(g * th);
        kappa.push(g * (1.0 - th) * (params.alpha * x / (1.0 + l)).min(1.0));
    }
    StepCoefficients::assemble(params, grid, tau, dtau, params.r_s - params.r, zeta, eta, kappa)
}

/// Solves `A v = rhs` for the linear part of a step.
pub fn solve_tridiagonal(coeffs: &StepCoefficients, rhs: &[f64]) -> Result<Vec<f64>> {
    coeffs.matrix().solve(rhs)
}

/// Converged interior slice and the number of linear solves it took.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub last_increment: f64,
}

/// Newton iteration for `A u - eta max{1, u} = kappa_bar`, started from
/// `u_prev` (interior nodes only).
///
/// The Jacobian `B = A - diag(eta 1{v > 1})` turns each update into a linear
/// solve `B v' = kappa_bar + eta 1{v <= 1}`. The iteration stops when the
/// sup-norm increment falls below `tol` or when the active set `{v > 1}`
/// repeats, in which case the last solve is exact.
pub fn newton_semilinear_step(
    coeffs: &StepCoefficients,
    u_prev: &[f64],
    boundary: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome> {
    let m = coeffs.interior_len();
    if u_prev.len() != m {
        return Err(Error::Domain(format!(
            "previous slice has {} interior values, expected {m}",
            u_prev.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("newton tolerance {tol} must be > 0")));
    }
    if u_prev.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("previous slice contains non-finite values".into()));
    }
    let base = coeffs.rhs(u_prev, boundary);
    let linear = coeffs.eta.iter().all(|&e| e == 0.0);
    let mut v = u_prev.to_vec();
    let mut diag = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let mut last = f64::INFINITY;
    for it in 1..=max_iter.max(1) {
        for i in 0..m {
            let active = v[i] > 1.0;
            diag[i] = coeffs.a[i] - if active { coeffs.eta[i] } else { 0.0 };
            rhs[i] = base[i] + if active { 0.0 } else { coeffs.eta[i] };
        }
        let sys = TridiagonalSystem::new(Band::Constant(coeffs.c), &diag, Band::Constant(coeffs.b));
        let next = sys.solve(&rhs)?;
        last = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let same_set = next.iter().zip(&v).all(|(a, b)| (*a > 1.0) == (*b > 1.0));
        v = next;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonConvergence {
                iterations: it,
                last_increment: f64::NAN,
                slice: None,
            });
        }
        if linear || last < tol || same_set {
            return Ok(NewtonOutcome {
                values: v,
                iterations: it,
                last_increment: last,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        last_increment: last,
        slice: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> ModelParams {
        ModelParams::reference()
    }

    #[test]
    fn diagonal_entry_by_substitution() {
        let p = fig3();
        // dy = 0.05, dtau = 0.01, r_S - r = 0.02, zeta = 0.4
        let grid = Grid::new(0.05 * 120.0, 120, 1000).unwrap();
        let c = build_step(&p, &BeliefSpec::Uniform, |_| 0.4, &grid, 5.0, 0.01).unwrap();
        for a in &c.a {
            assert!((a - 164.38).abs() < 1e-9, "{a}");
        }
    }

    #[test]
    fn zero_intensity_kills_semilinear_terms() {
        let p = fig3();
        let grid = Grid::new(6.0, 60, 100).unwrap();
        let c = build_step(&p, &BeliefSpec::Uniform, |_| 0.0, &grid, 3.0, 0.1).unwrap();
        assert!(c.eta.iter().all(|&e| e == 0.0));
        assert!(c.kappa.iter().all(|&k| k == 0.0));
    }

    #[test]
    fn off_diagonals_constant_across_time() {
        let p = fig3();
        let grid = Grid::new(6.0, 60, 100).unwrap();
        let c1 = build_step(&p, &BeliefSpec::Uniform, |x| 0.1 * x, &grid, 1.0, 0.1).unwrap();
        let c2 = build_step(&p, &BeliefSpec::Uniform, |x| 0.1 * x, &grid, 7.0, 0.1).unwrap();
        assert_eq!((c1.b, c1.c), (c2.b, c2.c));
        assert_ne!(c1.kappa, c2.kappa);
    }

    #[test]
    fn linear_slice_takes_one_iteration() {
        let p = fig3();
        let grid = Grid::new(6.0, 60, 100).unwrap();
        let c = build_step(&p, &BeliefSpec::Uniform, |_| 0.0, &grid, 0.1, 0.1).unwrap();
        let prev = vec![0.5; 59];
        let out = newton_semilinear_step(&c, &prev, (0.2, 1.0), 1e-10, 50).unwrap();
        assert_eq!(out.iterations, 1);
        let direct = solve_tridiagonal(&c, &c.rhs(&prev, (0.2, 1.0))).unwrap();
        assert_eq!(out.values, direct);
    }

    #[test]
    fn all_active_equals_shifted_linear_solve() {
        let p = fig3();
        let grid = Grid::new(6.0, 60, 100).unwrap();
        let c = build_step(&p, &BeliefSpec::Uniform, |_| 0.4, &grid, 0.1, 0.1).unwrap();
        let prev = vec![1.5; 59];
        let bnd = (1.5, 1.5);
        let out = newton_semilinear_step(&c, &prev, bnd, 1e-12, 50).unwrap();
        assert!(out.values.iter().all(|&v| v > 1.0));
        let shifted: Vec<f64> = c.a.iter().zip(&c.eta).map(|(a, e)| a - e).collect();
        let sys = TridiagonalSystem::new(Band::Constant(c.c), &shifted, Band::Constant(c.b));
        let direct = sys.solve(&c.rhs(&prev, bnd)).unwrap();
        for (x, y) in out.values.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn newton_agrees_with_picard_on_kinked_slice() {
        let p = fig3();
        let grid = Grid::new(6.0, 200, 1000).unwrap();
        let dtau = 0.01;
        let c = build_step(&p, &BeliefSpec::Uniform, |_| 0.4, &grid, dtau, dtau).unwrap();
        let l_t = p.ratio_at(p.horizon);
        let prev: Vec<f64> = (1..grid.n_y)
            .map(|j| p.terminal_value(p.beta * l_t * grid.y(j).exp()))
            .collect();
        let bnd = (p.boundary_value(p.horizon - dtau), ((p.r_s - p.r) * dtau).exp());
        let out = newton_semilinear_step(&c, &prev, bnd, 1e-10, 50).unwrap();
        assert!(out.iterations <= 5, "{} iterations", out.iterations);

        // Picard oracle: A v_{k+1} = kappa_bar + eta max{1, v_k}.
        let base = c.rhs(&prev, bnd);
        let mut v = prev.clone();
        for _ in 0..500 {
            let r: Vec<f64> = base
                .iter()
                .zip(&c.eta)
                .zip(&v)
                .map(|((b, e), v)| b + e * v.max(1.0))
                .collect();
            let next = solve_tridiagonal(&c, &r).unwrap();
            let d = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = next;
            if d < 1e-14 {
                break;
            }
        }
        for (a, b) in out.values.iter().zip(&v) {
            assert!((a - b).abs() < 1e-8);
        }
        let res = c.residual(&out.values, &prev, bnd);
        assert!(res.iter().all(|r| r.abs() < 1e-8));
    }

    #[test]
    fn max_iter_exceeded_reports_increment() {
        let p = fig3();
        let grid = Grid::new(6.0, 200, 1000).unwrap();
        let c = build_step(&p, &BeliefSpec::Uniform, |_| 5.0, &grid, 0.01, 0.01).unwrap();
        // Every node starts inactive; the high far-field value pushes the
        // last nodes above 1 after one solve, so the active set changes.
        let prev = vec![0.99; grid.n_y - 1];
        match newton_semilinear_step(&c, &prev, (0.2, 2.0), 1e-300, 1) {
            Err(Error::NonConvergence { iterations, last_increment, .. }) => {
                assert_eq!(iterations, 1);
                assert!(last_increment > 0.0);
            }
            other => panic!("expected nonconvergence, got {other:?}"),
        }
    }
}
