use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Space grid in `y = log(x / (beta l_t))` and the nominal time resolution.
///
/// Node `j = 0` sits on the moving insolvency boundary, node `j = n_y` on the
/// far-field truncation `y_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grid {
    pub y_max: f64,
    pub n_y: usize,
    pub n_tau: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            y_max: 6.0,
            n_y: 600,
            n_tau: 2000,
        }
    }
}

impl Grid {
    pub fn new(y_max: f64, n_y: usize, n_tau: usize) -> Result<Self> {
        let g = Self { y_max, n_y, n_tau };
        g.validate()?;
        Ok(g)
    }

    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        if !(self.y_max > 0.0 && self.y_max.is_finite()) {
            out.push(Error::param("y_max", "must be finite and > 0"));
        }
        if self.n_y < 8 {
            out.push(Error::param("n_y", "must be >= 8"));
        }
        if self.n_tau < 1 {
            out.push(Error::param("n_tau", "must be >= 1"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        self.y_max / self.n_y as f64
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy()
    }

    pub fn nominal_dtau(&self, horizon: f64) -> f64 {
        horizon / self.n_tau as f64
    }

    /// Same grid with both resolutions doubled.
    pub fn refined(&self) -> Self {
        Self {
            n_y: 2 * self.n_y,
            n_tau: 2 * self.n_tau,
            ..*self
        }
    }

    /// Off-diagonals `(b, c)` of the implicit operator: `b` couples to
    /// `j + 1`, `c` to `j - 1`.
    pub fn off_diagonals(&self, params: &ModelParams) -> (f64, f64) {
        let dy = self.dy();
        let diff = 0.5 * params.sigma * params.sigma / (dy * dy);
        let adv = transformed_drift(params) / (2.0 * dy);
        (-diff - adv, -diff + adv)
    }

    /// Rejects time steps for which the Newton matrices can lose strict
    /// diagonal dominance. `growth` is the zero-order growth rate of the
    /// equation (`r_S - r` for creditor values). Semilinear weights never
    /// exceed the killing intensity, so the worst row is `a_j - eta_j` with
    /// `zeta_j = eta_j`.
    pub fn check_dominance(&self, params: &ModelParams, dtau: f64, growth: f64) -> Result<()> {
        let dy = self.dy();
        let (b, c) = self.off_diagonals(params);
        let diff = params.sigma * params.sigma / (dy * dy);
        let worst = 1.0 / dtau + diff - growth;
        let off = b.abs() + c.abs();
        if worst > off {
            return Ok(());
        }
        let need = off - diff + growth;
        let horizon = params.horizon;
        let min_n_tau = (horizon * need).floor() as usize + 1;
        Err(Error::Configuration(format!(
            "time step dtau={dtau:.4e} with dy={dy:.4e} breaks diagonal dominance \
             (diagonal {worst:.4e} <= off-diagonal {off:.4e}); use n_tau >= {min_n_tau}"
        )))
    }
}

/// Drift of `y = log(x / (beta l_t))`: `r_V - r_L - sigma^2 / 2`.
#[inline]
pub fn transformed_drift(params: &ModelParams) -> f64 {
    params.r_v - params.r_l - 0.5 * params.sigma * params.sigma
}

/// Boundary rule at `y = y_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FarField {
    /// Large-ratio limit of the equation (never defaults, always rolls over).
    #[default]
    Asymptotic,
    /// Literal zero Dirichlet condition.
    Zero,
}

/// Newton and boundary options shared by the marching solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub farfield: FarField,
    pub newton_tol: f64,
    pub max_iter: usize,
    /// After a discontinuity in the marched data, internal substeps are kept
    /// below `grading * dtau` times the elapsed time, `dtau` being the stored
    /// step; `None` marches the stored mesh only.
    pub grading: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            farfield: FarField::Asymptotic,
            newton_tol: 1e-10,
            max_iter: 50,
            grading: Some(10.0),
        }
    }
}

/// Time levels `0 = tau_0 < ... < tau_K = T` of a backward sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMesh {
    pub taus: Vec<f64>,
}

impl TimeMesh {
    pub fn uniform(horizon: f64, n: usize) -> Self {
        let n = n.max(1);
        Self {
            taus: (0..=n).map(|k| horizon * k as f64 / n as f64).collect(),
        }
    }

    /// Mesh containing every breakpoint exactly, uniform within each gap with
    /// step at most `horizon / n_nominal`. Returns the mesh and, for each
    /// breakpoint, its slice index.
    pub fn with_breakpoints(horizon: f64, n_nominal: usize, breaks: &[f64]) -> (Self, Vec<usize>) {
        let target = horizon / n_nominal.max(1) as f64;
        let mut knots: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|&b| b > 0.0 && b < horizon)
            .collect();
        knots.push(0.0);
        knots.push(horizon);
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        let mut taus = vec![0.0];
        for w in knots.windows(2) {
            let len = w[1] - w[0];
            let steps = ((len / target) - 1e-9).ceil().max(1.0) as usize;
            for k in 1..steps {
                taus.push(w[0] + len * k as f64 / steps as f64);
            }
            taus.push(w[1]);
        }
        let idx = breaks
            .iter()
            .map(|&b| {
                taus.iter()
                    .enumerate()
                    .min_by(|x, y| (x.1 - b).abs().total_cmp(&(y.1 - b).abs()))
                    .map(|(i, _)| i)
                    .unwrap_or(0)
            })
            .collect();
        (Self { taus }, idx)
    }

    /// Substep ends covering `(tau0, tau1]` when the data was discontinuous
    /// at `tau0 - elapsed`: each substep is at most `grading * (tau1 - tau0)`
    /// times the time elapsed since then, and never below a thousandth of
    /// `tau1 - tau0`.
    pub fn graded_steps(tau0: f64, tau1: f64, elapsed: f64, grading: Option<f64>) -> Vec<f64> {
        let Some(g) = grading else {
            return vec![tau1];
        };
        let ratio = g * (tau1 - tau0);
        let floor = 1e-3 * (tau1 - tau0);
        let origin = tau0 - elapsed;
        let mut out = Vec::new();
        let mut s = tau0;
        loop {
            let h = (ratio * (s - origin)).max(floor);
            if s + h >= tau1 - 1e-3 * floor {
                break;
            }
            s += h;
            out.push(s);
        }
        out.push(tau1);
        out
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(6.0, 7, 10).is_err());
        assert!(Grid::new(0.0, 100, 10).is_err());
        assert!(Grid::new(6.0, 100, 0).is_err());
        assert!(Grid::new(6.0, 8, 1).is_ok());
    }

    #[test]
    fn graded_steps_refine_near_the_discontinuity() {
        assert_eq!(TimeMesh::graded_steps(0.0, 0.1, 0.0, None), vec![0.1]);
        let s = TimeMesh::graded_steps(0.0, 0.1, 0.0, Some(0.5));
        assert_eq!(*s.last().unwrap(), 0.1);
        assert!((s[0] - 1e-4).abs() < 1e-18);
        let mut prev = 0.0;
        for &t in &s[..s.len() - 1] {
            assert!(t - prev <= (0.05 * prev).max(1e-4) * (1.0 + 1e-12));
            prev = t;
        }
        // Far from the discontinuity the stored step is used as is.
        assert_eq!(TimeMesh::graded_steps(1.0, 1.1, 5.0, Some(0.5)), vec![1.1]);
    }

    #[test]
    fn breakpoints_are_exact_mesh_times() {
        let (mesh, idx) = TimeMesh::with_breakpoints(10.0, 7, &[2.0, 4.0, 6.0, 8.0]);
        for (&b, &i) in [2.0, 4.0, 6.0, 8.0].iter().zip(&idx) {
            assert_eq!(mesh.taus[i], b);
        }
        assert_eq!(*mesh.taus.last().unwrap(), 10.0);
        assert!(mesh.taus.windows(2).all(|w| w[1] - w[0] <= 10.0 / 7.0 + 1e-12));
    }

    #[test]
    fn dominance_check_proposes_n_tau() {
        let p = ModelParams::reference();
        // Coarse in space, huge time step, large growth: violation.
        let g = Grid::new(6.0, 8, 1).unwrap();
        let err = g.check_dominance(&p, 10.0, 5.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n_tau >="), "{msg}");
        assert!(g.check_dominance(&p, 0.01, p.r_s - p.r).is_ok());
    }
}
