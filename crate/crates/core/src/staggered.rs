//! Staggered tenor structure: maturities arrive at the jump times of a Cox
//! process with intensity `g(X_t)`. The creditor value solves a semilinear
//! equation whose continuation/run split around `U = 1` is the free boundary
//! `x*(t)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::barrier::{read_points, slice_root, write_points, BarrierPoint, RootKind, RunThreshold};
use crate::beliefs::BeliefSpec;
use crate::error::{Error, Result};
use crate::fd::{advance, build_step, farfield_step, terminal_slice, Grid, SolverOptions, TimeMesh, ValueSurface};
use crate::model::ModelParams;
use crate::sim::SimPath;

/// Run intensity as a function of the ratio `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntensitySpec {
    Constant { g: f64 },
    /// Piecewise-linear in `x` through the table, flat beyond its ends.
    Tabulated { x: Vec<f64>, g: Vec<f64> },
}

impl IntensitySpec {
    pub fn constant(g: f64) -> Result<Self> {
        let s = IntensitySpec::Constant { g };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            IntensitySpec::Constant { g } => {
                if !(*g >= 0.0 && g.is_finite()) {
                    return Err(Error::param("intensity.g", "must be finite and >= 0"));
                }
            }
            IntensitySpec::Tabulated { x, g } => {
                if x.is_empty() || x.len() != g.len() {
                    return Err(Error::param(
                        "intensity",
                        "table needs matching, non-empty `x` and `g` columns",
                    ));
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::param("intensity.x", "must be finite and strictly increasing"));
                }
                if g.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(Error::param("intensity.g", "must be finite and >= 0"));
                }
            }
        }
        Ok(())
    }

    pub fn rate(&self, x: f64) -> f64 {
        match self {
            IntensitySpec::Constant { g } => *g,
            IntensitySpec::Tabulated { x: xs, g } => {
                let n = xs.len();
                if x <= xs[0] {
                    return g[0];
                }
                if x >= xs[n - 1] {
                    return g[n - 1];
                }
                let k = xs.partition_point(|&v| v <= x) - 1;
                let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
                (1.0 - w) * g[k] + w * g[k + 1]
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            IntensitySpec::Constant { g } => *g == 0.0,
            IntensitySpec::Tabulated { g, .. } => g.iter().all(|&v| v == 0.0),
        }
    }
}

/// Newton effort of a semilinear solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NewtonStats {
    /// Time steps taken, internal substeps included.
    pub steps: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
}

/// Solves the semilinear creditor-value equation on a uniform time mesh,
/// one Newton solve per step.
pub fn solve_staggered_value(
    params: &ModelParams,
    beliefs: &BeliefSpec,
    intensity: &IntensitySpec,
    grid: &Grid,
    options: &SolverOptions,
) -> Result<ValueSurface> {
    solve_staggered_value_with_stats(params, beliefs, intensity, grid, options).map(|(s, _)| s)
}

/// [`solve_staggered_value`] together with its Newton iteration counts.
pub fn solve_staggered_value_with_stats(
    params: &ModelParams,
    beliefs: &BeliefSpec,
    intensity: &IntensitySpec,
    grid: &Grid,
    options: &SolverOptions,
) -> Result<(ValueSurface, NewtonStats)> {
    params.validate()?;
    beliefs.validate()?;
    intensity.validate()?;
    grid.validate()?;
    let horizon = params.horizon;
    let growth = params.r_s - params.r;
    let mesh = TimeMesh::uniform(horizon, grid.n_tau);
    let dtau = horizon / grid.n_tau as f64;
    grid.check_dominance(params, dtau, growth)?;

    let mut stats = NewtonStats::default();
    let mut surface = ValueSurface::new(*grid, horizon);
    let mut current = terminal_slice(params, grid);
    let mut far = current[grid.n_y];
    surface.push(0.0, params.boundary_ratio(horizon), current.clone())?;
    for k in 0..mesh.len() - 1 {
        let (tau0, tau1) = (mesh.taus[k], mesh.taus[k + 1]);
        let mut start = tau0;
        for end in TimeMesh::graded_steps(tau0, tau1, tau0, options.grading) {
            let coeffs = build_step(params, beliefs, |x| intensity.rate(x), grid, end, end - start)?;
            let t = (horizon - end).max(0.0);
            far = farfield_step(options.farfield, growth, far, end - start);
            let boundary = (params.boundary_value(t), far);
            let (next, iterations) = advance(&coeffs, &current, boundary, options, k + 1)?;
            current = next;
            stats.steps += 1;
            stats.total_iterations += iterations;
            stats.max_iterations = stats.max_iterations.max(iterations);
            start = end;
        }
        let t1 = (horizon - tau1).max(0.0);
        surface.push(tau1, params.boundary_ratio(t1), current.clone())?;
    }
    Ok((surface, stats))
}

/// One sample of the free boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub point: BarrierPoint,
    pub kind: RootKind,
    /// At `t = T` the terminal payoff caps the value at 1; the sample
    /// repeats the root of the first continuation slice.
    pub terminal_dominated: bool,
    pub smooth_pasting_gap: Option<f64>,
    pub crossings: usize,
}

/// Free boundary `x*(t)` and the derived barriers, ascending in `t`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BarrierCurve {
    pub samples: Vec<CurveSample>,
    pub warnings: Vec<String>,
}

impl BarrierCurve {
    pub fn points(&self) -> Vec<BarrierPoint> {
        self.samples.iter().map(|s| s.point).collect()
    }

    pub fn start(&self) -> f64 {
        self.samples.first().map_or(f64::NAN, |s| s.point.t)
    }

    pub fn end(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.point.t)
    }

    /// `x*(t)` by linear interpolation in `t`; `None` outside the curve.
    pub fn x_star_at(&self, t: f64) -> Option<f64> {
        let s = &self.samples;
        if s.is_empty() || t < s[0].point.t - 1e-9 || t > s[s.len() - 1].point.t + 1e-9 {
            return None;
        }
        let k = s.partition_point(|p| p.point.t <= t);
        if k == 0 {
            return Some(s[0].point.x_star);
        }
        if k == s.len() {
            return Some(s[k - 1].point.x_star);
        }
        let (a, b) = (&s[k - 1].point, &s[k].point);
        if a.x_star.is_infinite() || b.x_star.is_infinite() {
            return Some(a.x_star.max(b.x_star));
        }
        let w = (t - a.t) / (b.t - a.t);
        Some((1.0 - w) * a.x_star + w * b.x_star)
    }

    /// Illiquidity threshold `min{x*(t), (1 + l_t) / psi}` in ratio units.
    pub fn x_ill_at(&self, params: &ModelParams, t: f64) -> Option<f64> {
        self.x_star_at(t).map(|x| x.min(params.illiquidity_cap_ratio(t)))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_points(w, "t", &self.points())
    }

    pub fn read_csv(text: &str) -> Result<Self> {
        let mut pts = read_points(text, "t")?;
        if pts.is_empty() {
            return Err(Error::Dependency("barrier curve file has no samples".into()));
        }
        pts.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(Self {
            samples: pts
                .into_iter()
                .map(|point| CurveSample {
                    point,
                    kind: if point.x_star.is_infinite() {
                        RootKind::Never
                    } else {
                        RootKind::Interior
                    },
                    terminal_dominated: false,
                    smooth_pasting_gap: None,
                    crossings: 1,
                })
                .collect(),
            warnings: Vec::new(),
        })
    }

    /// Largest smooth-pasting gap over interior roots away from `t = T`.
    pub fn max_smooth_pasting_gap(&self) -> f64 {
        self.samples
            .iter()
            .filter(|s| !s.terminal_dominated && s.kind == RootKind::Interior)
            .filter_map(|s| s.smooth_pasting_gap)
            .fold(0.0, f64::max)
    }
}

impl RunThreshold for BarrierCurve {
    fn threshold(&self, t: f64) -> Option<f64> {
        self.x_star_at(t)
    }
}

/// Root of `U(t, .) = 1` on every slice of a staggered surface.
pub fn extract_free_boundary(surface: &ValueSurface, params: &ModelParams) -> Result<BarrierCurve> {
    let n = surface.n_slices();
    if n < 2 {
        return Err(Error::Dependency("surface needs at least two slices".into()));
    }
    let mut curve = BarrierCurve::default();
    let mut noisy = 0usize;
    for k in (0..n).rev() {
        let terminal = k == 0;
        let root = slice_root(surface, if terminal { 1 } else { k });
        if root.crossings > 1 {
            noisy += 1;
        }
        if root.kind == RootKind::Never && !terminal {
            curve.warnings.push(format!(
                "t={:.6}: value below 1 on the whole grid, creditor always runs",
                surface.time(k)
            ));
        }
        let t = surface.time(k).max(0.0);
        // Same ratio-space root re-anchored at t = T when terminal.
        let x_star = if terminal && root.kind == RootKind::Boundary {
            params.boundary_ratio(t)
        } else {
            root.x_star
        };
        curve.samples.push(CurveSample {
            point: BarrierPoint::from_ratio(params, t, x_star),
            kind: root.kind,
            terminal_dominated: terminal,
            smooth_pasting_gap: root.smooth_pasting_gap,
            crossings: root.crossings,
        });
    }
    if noisy > 0 {
        curve
            .warnings
            .push(format!("{noisy} slices with several crossings of U = 1, largest kept"));
    }
    Ok(curve)
}

/// First Cox arrival at which the ratio is at or below `x*`; `T` if none.
pub fn run_stopping_time(path: &SimPath, barrier: &BarrierCurve, horizon: f64) -> f64 {
    path.decisions
        .iter()
        .find(|d| barrier.x_star_at(d.t).is_some_and(|x| d.x <= x))
        .map_or(horizon, |d| d.t)
}
