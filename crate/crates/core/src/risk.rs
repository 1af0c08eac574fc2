//! Default probabilities: the insolvency-only first-passage baseline, the
//! survival equation of the staggered structure, and Monte Carlo estimates
//! split into insolvency and illiquidity defaults.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beliefs::norm_cdf;
use crate::discrete::DiscreteBarrierSet;
use crate::error::{Error, Result};
use crate::fd::{advance, farfield_step, transformed_drift, FarField, Grid, SolverOptions, StepCoefficients, TimeMesh, ValueSurface};
use crate::model::ModelParams;
use crate::sim::{path_rng, walk_path, Arrivals, Control, Event, SimMesh};
use crate::staggered::{BarrierCurve, IntensitySpec};

/// Probability that the ratio reaches the insolvency boundary within
/// `horizon` when rollover risk is ignored:
///
/// ```text
/// Phi((-y0 - nu h) / (sigma sqrt h)) + e^{-2 nu y0 / sigma^2} Phi((-y0 + nu h) / (sigma sqrt h))
/// ```
///
/// with `y0 = log(V0 / D^Ins_0)` and `nu = r_V - r_L - sigma^2/2`.
pub fn blackcox_pd(params: &ModelParams, v0: f64, horizon: f64) -> Result<f64> {
    if !(horizon >= 0.0) {
        return Err(Error::Domain(format!("horizon {horizon} must be >= 0")));
    }
    if !(v0 > 0.0) {
        return Err(Error::Domain(format!("V0={v0} must be > 0")));
    }
    let y0 = (v0 / (params.beta * params.l0)).ln();
    if y0 <= 0.0 {
        return Ok(1.0);
    }
    if horizon == 0.0 {
        return Ok(0.0);
    }
    let nu = transformed_drift(params);
    let sd = params.sigma * horizon.sqrt();
    let a = norm_cdf((-y0 - nu * horizon) / sd);
    let log_w = -2.0 * nu * y0 / (params.sigma * params.sigma);
    let b = norm_cdf((-y0 + nu * horizon) / sd);
    // Guard e^{big} * 0 when the second term underflows.
    let second = if b == 0.0 { 0.0 } else { (log_w + b.ln()).exp() };
    Ok((a + second).clamp(0.0, 1.0))
}

/// Reading of the survival equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivalVariant {
    /// Killing only; `P` is a probability.
    #[default]
    Corrected,
    /// Keeps the `(r_S - r)` zero-order term; `P` can exceed 1.
    Discounted,
}

impl SurvivalVariant {
    fn growth(&self, params: &ModelParams) -> f64 {
        match self {
            SurvivalVariant::Corrected => 0.0,
            SurvivalVariant::Discounted => params.r_s - params.r,
        }
    }
}

/// Survival probability `P(t, x)` on the transformed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSurface {
    pub surface: ValueSurface,
    pub variant: SurvivalVariant,
}

impl SurvivalSurface {
    pub fn survival(&self, t: f64, x: f64) -> Result<f64> {
        self.surface.value_at(t, x)
    }

    /// `1 - P(0, V0 / S0)`.
    pub fn pd(&self, params: &ModelParams, v0: f64) -> Result<f64> {
        let x = v0 / params.s0;
        if x <= params.boundary_ratio(0.0) {
            return Ok(1.0);
        }
        Ok(1.0 - self.survival(0.0, x)?)
    }
}

/// Survival probability under the staggered structure: killed at the
/// boundary, and at rate `g(x)` wherever `x < x_ill(t)`. The indicator is
/// frozen per slice so every step is a single linear solve.
pub fn solve_survival_staggered(
    params: &ModelParams,
    intensity: &IntensitySpec,
    illiquidity: Option<&BarrierCurve>,
    grid: &Grid,
    variant: SurvivalVariant,
) -> Result<SurvivalSurface> {
    params.validate()?;
    intensity.validate()?;
    grid.validate()?;
    let curve = illiquidity.ok_or_else(|| Error::Dependency("survival needs an illiquidity barrier curve".into()))?;
    let horizon = params.horizon;
    if !(curve.start() <= 1e-9 && curve.end() >= horizon - 1e-9) {
        return Err(Error::Dependency(format!(
            "barrier curve covers [{}, {}], need [0, {horizon}]",
            curve.start(),
            curve.end()
        )));
    }
    let growth = variant.growth(params);
    let dtau = horizon / grid.n_tau as f64;
    grid.check_dominance(params, dtau, growth)?;
    let mesh = TimeMesh::uniform(horizon, grid.n_tau);
    let options = SolverOptions::default();
    let m = grid.n_y - 1;

    let mut surface = ValueSurface::new(*grid, horizon);
    let mut current = vec![1.0; grid.n_y + 1];
    current[0] = 0.0;
    let mut far = current[grid.n_y];
    surface.push(0.0, params.boundary_ratio(horizon), current.clone())?;
    for k in 0..mesh.len() - 1 {
        let (tau0, tau1) = (mesh.taus[k], mesh.taus[k + 1]);
        let mut start = tau0;
        for end in TimeMesh::graded_steps(tau0, tau1, tau0, options.grading) {
            let t = (horizon - end).max(0.0);
            let anchor = params.boundary_ratio(t);
            let x_ill = curve
                .x_ill_at(params, t)
                .ok_or_else(|| Error::Dependency(format!("barrier curve misses t={t}")))?;
            let zeta: Vec<f64> = (1..grid.n_y)
                .map(|j| {
                    let x = anchor * grid.y(j).exp();
                    if x < x_ill {
                        intensity.rate(x)
                    } else {
                        0.0
                    }
                })
                .collect();
            let coeffs = StepCoefficients::assemble(params, grid, end, end - start, growth, zeta, vec![0.0; m], vec![0.0; m])?;
            far = farfield_step(FarField::Asymptotic, growth, far, end - start);
            let boundary = (0.0, far);
            current = advance(&coeffs, &current, boundary, &options, k + 1)?.0;
            start = end;
        }
        let t1 = (horizon - tau1).max(0.0);
        surface.push(tau1, params.boundary_ratio(t1), current.clone())?;
    }
    Ok(SurvivalSurface { surface, variant })
}

/// Monte Carlo default probability split by cause.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefaultDecomposition {
    pub pd_total: f64,
    pub pd_insolvency: f64,
    pub pd_illiquidity: f64,
    pub pd_baseline_blackcox: f64,
    /// Standard error of `pd_total`.
    pub std_error: f64,
    /// 95% confidence half-width of `pd_total`.
    pub mc_halfwidth: f64,
    pub n_paths: usize,
}

impl DefaultDecomposition {
    fn from_counts(params: &ModelParams, v0: f64, ins: usize, ill: usize, n: usize) -> Result<Self> {
        let nf = n as f64;
        let total = (ins + ill) as f64 / nf;
        let se = (total * (1.0 - total) / nf).sqrt();
        Ok(Self {
            pd_total: total,
            pd_insolvency: ins as f64 / nf,
            pd_illiquidity: ill as f64 / nf,
            pd_baseline_blackcox: blackcox_pd(params, v0, params.horizon)?,
            std_error: se,
            mc_halfwidth: 1.96 * se,
            n_paths: n,
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fate {
    Insolvent,
    Illiquid,
    Survived,
}

fn tally(fates: &[Fate]) -> (usize, usize) {
    let ins = fates.iter().filter(|&&f| f == Fate::Insolvent).count();
    let ill = fates.iter().filter(|&&f| f == Fate::Illiquid).count();
    (ins, ill)
}

fn check_paths(n_paths: usize) -> Result<()> {
    if n_paths < 1000 {
        return Err(Error::param("n_paths", "must be >= 1000"));
    }
    Ok(())
}

/// Default probability under the discrete structure: insolvency is
/// monitored continuously; at each rollover date the firm defaults when
/// `V <= D^Ill`.
pub fn mc_default_discrete(
    params: &ModelParams,
    barriers: &DiscreteBarrierSet,
    v0: f64,
    n_paths: usize,
    seed: u64,
    dt: f64,
) -> Result<DefaultDecomposition> {
    params.validate()?;
    check_paths(n_paths)?;
    let dates: Vec<f64> = barriers.rollover_rows().map(|r| r.point.t).collect();
    let mesh = SimMesh::new(params.horizon, dt, &dates)?;
    let fates: Vec<Fate> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            let mut fate = Fate::Survived;
            walk_path(params, Arrivals::Dates, v0, &mesh, &mut rng, |e| match e {
                Event::Decision(d) => {
                    let ill = barriers
                        .at_date(d.t)
                        .map_or(false, |r| d.x * params.short_debt(d.t) <= r.point.d_ill);
                    if ill {
                        fate = Fate::Illiquid;
                        Control::Stop
                    } else {
                        Control::Continue
                    }
                }
                Event::Insolvency { .. } => {
                    fate = Fate::Insolvent;
                    Control::Stop
                }
                _ => Control::Continue,
            });
            fate
        })
        .collect();
    let (ins, ill) = tally(&fates);
    DefaultDecomposition::from_counts(params, v0, ins, ill, n_paths)
}

/// Default probability under the staggered structure: at each Cox arrival
/// the firm defaults when `X <= x_ill(t)`.
pub fn mc_default_staggered(
    params: &ModelParams,
    intensity: &IntensitySpec,
    barrier: &BarrierCurve,
    v0: f64,
    n_paths: usize,
    seed: u64,
    dt: f64,
) -> Result<DefaultDecomposition> {
    params.validate()?;
    intensity.validate()?;
    check_paths(n_paths)?;
    if barrier.samples.is_empty() {
        return Err(Error::Dependency("empty barrier curve".into()));
    }
    let mesh = SimMesh::new(params.horizon, dt, &[])?;
    let fates: Vec<Fate> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            let mut fate = Fate::Survived;
            walk_path(params, Arrivals::Cox(intensity), v0, &mesh, &mut rng, |e| match e {
                Event::Decision(d) => {
                    if barrier.x_ill_at(params, d.t).is_some_and(|x| d.x <= x) {
                        fate = Fate::Illiquid;
                        Control::Stop
                    } else {
                        Control::Continue
                    }
                }
                Event::Insolvency { .. } => {
                    fate = Fate::Insolvent;
                    Control::Stop
                }
                _ => Control::Continue,
            });
            fate
        })
        .collect();
    let (ins, ill) = tally(&fates);
    DefaultDecomposition::from_counts(params, v0, ins, ill, n_paths)
}

/// Monte Carlo first-passage probability without rollover risk.
pub fn mc_first_passage(params: &ModelParams, v0: f64, n_paths: usize, seed: u64, dt: f64) -> Result<(f64, f64)> {
    let mesh = SimMesh::new(params.horizon, dt, &[])?;
    let hits: usize = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            let mut hit = 0usize;
            walk_path(params, Arrivals::None, v0, &mesh, &mut rng, |e| {
                if let Event::Insolvency { .. } = e {
                    hit = 1;
                }
                Control::Continue
            });
            hit
        })
        .sum();
    let p = hits as f64 / n_paths as f64;
    Ok((p, (p * (1.0 - p) / n_paths as f64).sqrt()))
}
