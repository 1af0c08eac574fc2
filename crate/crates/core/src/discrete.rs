//! Discrete tenor structure: all short-term debt matures at common dates
//! `T_1 < ... < T_N < T`. Between dates the creditor value solves a linear
//! Dirichlet problem; at each date the run decision enters through the jump
//!
//! ```text
//! W_{n-1}(T_n, x) = theta(x) max{1, W_n(T_n, x)} + (1 - theta(x)) alpha x / (1 + l_{T_n}).
//! ```

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::barrier::{read_points, slice_root, write_points, BarrierPoint, RootKind, RunThreshold};
use crate::beliefs::{theta, BeliefSpec};
use crate::error::{Error, Result};
use crate::fd::{advance, farfield_step, terminal_slice, Grid, SolverOptions, StepCoefficients, TimeMesh, ValueSurface};
use crate::model::ModelParams;

/// Matching tolerance between a requested date and a stored mesh time.
const DATE_EPS: f64 = 1e-9;

/// Rollover dates of the discrete tenor structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscreteTenor {
    dates: Vec<f64>,
}

impl DiscreteTenor {
    /// Dates must be strictly increasing and lie in `(0, horizon)`.
    pub fn new(dates: Vec<f64>, horizon: f64) -> Result<Self> {
        let t = Self { dates };
        t.validate(horizon)?;
        Ok(t)
    }

    /// `N` dates splitting `[0, horizon]` into `N + 1` equal periods.
    pub fn equally_spaced(count: usize, horizon: f64) -> Self {
        let step = horizon / (count + 1) as f64;
        Self {
            dates: (1..=count).map(|k| k as f64 * step).collect(),
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        if let Some(d) = self.dates.iter().find(|d| !(**d > 0.0 && **d < horizon)) {
            return Err(Error::param(
                "dates",
                format!("rollover date {d} must lie in (0, {horizon})"),
            ));
        }
        if self.dates.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("dates", "rollover dates must be strictly increasing"));
        }
        Ok(())
    }

    pub fn dates(&self) -> &[f64] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Applies the rollover jump at calendar time `t` to a full continuation
/// slice; the two boundary nodes are left to the caller.
pub fn jump_slice(params: &ModelParams, beliefs: &BeliefSpec, t: f64, grid: &Grid, continuation: &[f64]) -> Vec<f64> {
    let l = params.ratio_at(t);
    let anchor = params.beta * l;
    continuation
        .iter()
        .enumerate()
        .map(|(j, &u)| {
            let x = anchor * grid.y(j).exp();
            let th = theta(params, beliefs, x);
            th * u.max(1.0) + (1.0 - th) * (params.alpha * x / (1.0 + l)).min(1.0)
        })
        .collect()
}

/// Backward sweep over the concatenated interval problems.
///
/// The slice stored at each rollover date is the continuation value
/// `W_n(T_n, .)`, i.e. `U(T_n, .)`; the jump is applied only to the data
/// handed to the next interval. Rollover dates are inserted into the time
/// mesh exactly.
pub fn solve_discrete_value(
    params: &ModelParams,
    beliefs: &BeliefSpec,
    tenor: &DiscreteTenor,
    grid: &Grid,
    options: &SolverOptions,
) -> Result<ValueSurface> {
    params.validate()?;
    beliefs.validate()?;
    grid.validate()?;
    tenor.validate(params.horizon)?;
    let horizon = params.horizon;
    let growth = params.r_s - params.r;
    let date_taus: Vec<f64> = tenor.dates.iter().map(|d| horizon - d).collect();
    let (mesh, date_idx) = TimeMesh::with_breakpoints(horizon, grid.n_tau, &date_taus);
    let max_dtau = mesh.taus.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    grid.check_dominance(params, max_dtau, growth)?;

    let mut is_date = vec![false; mesh.len()];
    for &k in &date_idx {
        is_date[k] = true;
    }

    let m = grid.n_y - 1;
    let zeros = vec![0.0; m];
    let mut cached: Option<StepCoefficients> = None;
    let mut surface = ValueSurface::new(*grid, horizon);
    let mut current = terminal_slice(params, grid);
    let mut far = current[grid.n_y];
    surface.push(0.0, params.boundary_ratio(horizon), current.clone())?;
    let mut last_jump = 0.0;

    for k in 0..mesh.len() - 1 {
        let (tau0, tau1) = (mesh.taus[k], mesh.taus[k + 1]);
        if is_date[k] {
            let t = horizon - tau0;
            let mut jumped = jump_slice(params, beliefs, t, grid, &current);
            jumped[0] = current[0];
            jumped[grid.n_y] = current[grid.n_y];
            current = jumped;
            last_jump = tau0;
        }
        let mut start = tau0;
        for end in TimeMesh::graded_steps(tau0, tau1, tau0 - last_jump, options.grading) {
            let dtau = end - start;
            let reuse = cached.as_ref().is_some_and(|c| (c.dtau - dtau).abs() <= 1e-15 * dtau);
            if !reuse {
                cached = Some(StepCoefficients::assemble(
                    params,
                    grid,
                    end,
                    dtau,
                    growth,
                    zeros.clone(),
                    zeros.clone(),
                    zeros.clone(),
                )?);
            }
            let coeffs = cached.as_ref().expect("assembled above");
            let t = (horizon - end).max(0.0);
            far = farfield_step(options.farfield, growth, far, end - start);
            let boundary = (params.boundary_value(t), far);
            current = advance(coeffs, &current, boundary, options, k + 1)?.0;
            start = end;
        }
        let t1 = (horizon - tau1).max(0.0);
        surface.push(tau1, params.boundary_ratio(t1), current.clone())?;
    }
    Ok(surface)
}

/// One row of a discrete barrier set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteBarrier {
    pub point: BarrierPoint,
    pub kind: RootKind,
    /// The `t = 0` row: reported for completeness, no debt matures then.
    pub inception: bool,
}

/// Barriers at `T_0 = 0` and at every rollover date.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteBarrierSet {
    pub rows: Vec<DiscreteBarrier>,
    pub warnings: Vec<String>,
}

impl DiscreteBarrierSet {
    pub fn points(&self) -> Vec<BarrierPoint> {
        self.rows.iter().map(|r| r.point).collect()
    }

    /// Rows at actual rollover dates (inception excluded).
    pub fn rollover_rows(&self) -> impl Iterator<Item = &DiscreteBarrier> {
        self.rows.iter().filter(|r| !r.inception)
    }

    pub fn at_date(&self, t: f64) -> Option<&DiscreteBarrier> {
        self.rows.iter().find(|r| (r.point.t - t).abs() < DATE_EPS)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_points(w, "T_n", &self.points())
    }

    /// Reads a CSV written by [`DiscreteBarrierSet::write_csv`]; a `t = 0`
    /// row is taken as the inception row.
    pub fn read_csv(text: &str) -> Result<Self> {
        let rows = read_points(text, "T_n")?
            .into_iter()
            .map(|point| DiscreteBarrier {
                point,
                kind: if point.x_star.is_infinite() {
                    RootKind::Never
                } else {
                    RootKind::Interior
                },
                inception: point.t == 0.0,
            })
            .collect();
        Ok(Self {
            rows,
            warnings: Vec::new(),
        })
    }
}

impl RunThreshold for DiscreteBarrierSet {
    fn threshold(&self, t: f64) -> Option<f64> {
        self.at_date(t).map(|r| r.point.x_star)
    }
}

/// Debt-run threshold at each rollover date from the continuation slices of
/// a discrete-tenor surface. An inception row at `t = 0` is added when the
/// tenor has at least one date.
pub fn extract_discrete_barriers(
    surface: &ValueSurface,
    params: &ModelParams,
    tenor: &DiscreteTenor,
) -> Result<DiscreteBarrierSet> {
    let mut set = DiscreteBarrierSet::default();
    if tenor.is_empty() {
        set.warnings
            .push("no rollover dates: only the insolvency barrier applies".into());
        return Ok(set);
    }
    let dates = std::iter::once((0.0, true)).chain(tenor.dates().iter().map(|&d| (d, false)));
    for (t, inception) in dates {
        let n = surface.slice_at_time(t).ok_or_else(|| {
            Error::Dependency(format!("surface has no slice at rollover date {t}"))
        })?;
        let root = slice_root(surface, n);
        match root.kind {
            RootKind::Never => set
                .warnings
                .push(format!("t={t}: value below 1 on the whole grid, creditor always runs")),
            _ if root.crossings > 1 => set.warnings.push(format!(
                "t={t}: {} crossings of U = 1, largest kept",
                root.crossings
            )),
            _ => {}
        }
        set.rows.push(DiscreteBarrier {
            point: BarrierPoint::from_ratio(params, t, root.x_star),
            kind: root.kind,
            inception,
        });
    }
    Ok(set)
}
