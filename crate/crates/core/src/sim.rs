//! Monte Carlo paths of the ratio `X = V / S`, Cox arrivals by the canonical
//! construction, scenario classification and the creditor strategy payoff.
//!
//! Paths are simulated in `y = log(X / (beta l_t))`, which has constant drift
//! `r_V - r_L - sigma^2/2` and a flat insolvency barrier at `y = 0`. Between
//! mesh points the barrier crossing is resolved exactly by the Brownian
//! bridge probability `exp(-2 y_a y_b / (sigma^2 h))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barrier::RunThreshold;
use crate::beliefs::{theta, BeliefSpec};
use crate::error::{Error, Result};
use crate::fd::transformed_drift;
use crate::model::ModelParams;
use crate::staggered::IntensitySpec;

/// Per-path generator: one ChaCha stream per path index under a common seed.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Simulation times on `[0, T]`: uniform steps of at most `dt` inside each
/// gap between forced times (the discrete rollover dates).
#[derive(Debug, Clone, PartialEq)]
pub struct SimMesh {
    pub times: Vec<f64>,
    /// `forced[k]` is true when `times[k]` is a rollover date.
    pub forced: Vec<bool>,
}

impl SimMesh {
    pub fn new(horizon: f64, dt: f64, forced_times: &[f64]) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", "must be finite and > 0"));
        }
        let mut knots: Vec<f64> = forced_times.iter().copied().filter(|&t| t > 0.0 && t < horizon).collect();
        knots.sort_by(f64::total_cmp);
        let mut times = vec![0.0];
        let mut forced = vec![false];
        let mut prev = 0.0;
        for (i, &k) in knots.iter().chain(std::iter::once(&horizon)).enumerate() {
            let len = k - prev;
            if len <= 0.0 {
                continue;
            }
            let steps = ((len / dt) - 1e-9).ceil().max(1.0) as usize;
            for s in 1..steps {
                times.push(prev + len * s as f64 / steps as f64);
                forced.push(false);
            }
            times.push(k);
            forced.push(i < knots.len());
            prev = k;
        }
        Ok(Self { times, forced })
    }
}

/// A decision opportunity: a Cox arrival or a rollover date. `u` is a
/// uniform draw attached to the event, used to resolve whether the other
/// creditors' run brings the firm down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub t: f64,
    pub x: f64,
    pub u: f64,
}

/// Events produced by the path walker, in chronological order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    /// End of a mesh step.
    Step { t: f64, x: f64 },
    Decision(Decision),
    /// First passage through the insolvency boundary; the walk ends.
    Insolvency { t: f64 },
    /// Reached `T` without insolvency; the walk ends.
    Horizon { x: f64 },
}

/// Whether the walker should keep going.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Where decisions come from.
#[derive(Debug, Clone, Copy)]
pub enum Arrivals<'a> {
    /// The forced mesh times are the decision dates.
    Dates,
    /// Cox process with the given intensity.
    Cox(&'a IntensitySpec),
    None,
}

fn bridge_point<R: Rng>(rng: &mut R, ya: f64, yb: f64, h: f64, s: f64, sigma: f64) -> f64 {
    let mean = ya + (s / h) * (yb - ya);
    let var = sigma * sigma * s * (h - s) / h;
    let z: f64 = rng.sample(StandardNormal);
    mean + var.max(0.0).sqrt() * z
}

/// Crossing of `y = 0` on `[t, t + h]` with endpoints `ya > 0` and `yb`.
fn crossing<R: Rng>(rng: &mut R, ya: f64, yb: f64, h: f64, sigma: f64) -> Option<f64> {
    if yb <= 0.0 {
        return Some(h * ya / (ya - yb));
    }
    let p = (-2.0 * ya * yb / (sigma * sigma * h)).exp();
    let u: f64 = rng.random();
    (u < p).then_some(0.5 * h)
}

/// Walks one path from `X_0 = v0 / S0`, reporting events to `visit` until it
/// returns [`Control::Stop`], the path becomes insolvent, or `T` is reached.
///
/// The sequence of random draws does not depend on the visitor, so visitors
/// that stop at different times see the same path (common random numbers).
pub fn walk_path<R: Rng>(
    params: &ModelParams,
    arrivals: Arrivals<'_>,
    v0: f64,
    mesh: &SimMesh,
    rng: &mut R,
    mut visit: impl FnMut(Event) -> Control,
) {
    let nu = transformed_drift(params);
    let sigma = params.sigma;
    let anchor = |t: f64| params.boundary_ratio(t);
    let x_of = |t: f64, y: f64| anchor(t) * y.exp();
    let mut y = (v0 / params.s0 / anchor(0.0)).ln();
    if y <= 0.0 {
        visit(Event::Insolvency { t: 0.0 });
        return;
    }
    let rate = |t: f64, y: f64| match arrivals {
        Arrivals::Cox(g) => g.rate(x_of(t, y)),
        _ => 0.0,
    };
    let mut threshold: f64 = rng.sample(Exp1);
    let mut accumulated = 0.0;

    for k in 1..mesh.times.len() {
        let (t0, t1) = (mesh.times[k - 1], mesh.times[k]);
        let h = t1 - t0;
        let z: f64 = rng.sample(StandardNormal);
        let y1 = y + nu * h + sigma * h.sqrt() * z;

        // Sub-steps split at arrivals: [a, b] with endpoint values (ya, yb).
        let (mut a, mut ya) = (t0, y);
        let mut ga = rate(a, ya);
        loop {
            let gb = rate(t1, y1);
            let span = t1 - a;
            let inc = 0.5 * (ga + gb) * span;
            if matches!(arrivals, Arrivals::Cox(_)) && accumulated + inc >= threshold && inc > 0.0 {
                let s = span * (threshold - accumulated) / inc;
                let ys = bridge_point(rng, ya, y1, span, s, sigma);
                let u: f64 = rng.random();
                threshold = rng.sample(Exp1);
                accumulated = 0.0;
                if let Some(c) = crossing(rng, ya, ys, s, sigma) {
                    visit(Event::Insolvency { t: a + c });
                    return;
                }
                let td = a + s;
                if visit(Event::Decision(Decision { t: td, x: x_of(td, ys), u })) == Control::Stop {
                    return;
                }
                a = td;
                ya = ys;
                ga = rate(a, ya);
                continue;
            }
            accumulated += inc;
            if let Some(c) = crossing(rng, ya, y1, span, sigma) {
                visit(Event::Insolvency { t: a + c });
                return;
            }
            break;
        }
        y = y1;
        let x1 = x_of(t1, y1);
        if visit(Event::Step { t: t1, x: x1 }) == Control::Stop {
            return;
        }
        if mesh.forced[k] && matches!(arrivals, Arrivals::Dates) {
            let u: f64 = rng.random();
            if visit(Event::Decision(Decision { t: t1, x: x1, u })) == Control::Stop {
                return;
            }
        }
    }
    visit(Event::Horizon {
        x: x_of(params.horizon, y),
    });
}

/// A recorded path.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPath {
    pub times: Vec<f64>,
    pub x_values: Vec<f64>,
    /// Cox arrivals or rollover dates reached before insolvency.
    pub decisions: Vec<Decision>,
    pub tau_ins: Option<f64>,
    /// Per mesh step: whether the insolvency boundary was crossed in it.
    pub crossed: Vec<bool>,
}

impl SimPath {
    pub fn arrivals(&self) -> Vec<f64> {
        self.decisions.iter().map(|d| d.t).collect()
    }

    /// Ratio at time `t` by linear interpolation of the recorded mesh.
    pub fn x_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.x_values[0];
        }
        if k >= self.times.len() {
            return *self.x_values.last().expect("non-empty path");
        }
        let w = (t - self.times[k - 1]) / (self.times[k] - self.times[k - 1]);
        (1.0 - w) * self.x_values[k - 1] + w * self.x_values[k]
    }
}

/// Records a full path until insolvency or `T`.
pub fn simulate_path<R: Rng>(
    params: &ModelParams,
    arrivals: Arrivals<'_>,
    v0: f64,
    mesh: &SimMesh,
    rng: &mut R,
) -> Result<SimPath> {
    if !(v0 > 0.0) {
        return Err(Error::Domain(format!("V0={v0} must be > 0")));
    }
    let mut path = SimPath {
        times: vec![0.0],
        x_values: vec![v0 / params.s0],
        decisions: Vec::new(),
        tau_ins: None,
        crossed: Vec::new(),
    };
    walk_path(params, arrivals, v0, mesh, rng, |e| {
        match e {
            Event::Step { t, x } => {
                path.times.push(t);
                path.x_values.push(x);
                path.crossed.push(false);
            }
            Event::Decision(d) => path.decisions.push(d),
            Event::Insolvency { t } => {
                path.tau_ins = Some(t);
                path.crossed.push(true);
                path.times.push(t);
                path.x_values.push(params.boundary_ratio(t));
            }
            Event::Horizon { .. } => {}
        }
        Control::Continue
    });
    Ok(path)
}

/// Outcome classes of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    InsolvencyDefault,
    IlliquidityDefault,
    /// Survived to `T` after at least one run that the firm withstood.
    UnsuccessfulRun,
    Survival,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [
        Outcome::InsolvencyDefault,
        Outcome::IlliquidityDefault,
        Outcome::UnsuccessfulRun,
        Outcome::Survival,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::InsolvencyDefault => "insolvency_default",
            Outcome::IlliquidityDefault => "illiquidity_default",
            Outcome::UnsuccessfulRun => "unsuccessful_run",
            Outcome::Survival => "survival",
        }
    }
}

/// Classified path.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRecord {
    pub outcome: Outcome,
    /// Default time, first unsuccessful run, or `T`.
    pub event_time: f64,
    /// Representative creditor's payoff discounted by `e^{(r_S - r) t}`:
    /// recovery at default, 1 at the first withdrawal, the terminal payoff
    /// otherwise.
    pub payoff: f64,
    pub unsuccessful_runs: Vec<f64>,
}

/// Walks the decisions of a recorded path against a run barrier: a run
/// happens when `X <= x*(t)` and defaults the firm when `X <= x_ill(t)`.
/// Debt levels are unaffected by an unsuccessful run.
pub fn classify_scenario(path: &SimPath, barrier: &dyn RunThreshold, params: &ModelParams) -> Result<ScenarioRecord> {
    let growth = params.r_s - params.r;
    let disc = |t: f64| (growth * t).exp();
    let mut runs = Vec::new();
    let mut withdrawal: Option<f64> = None;
    for d in &path.decisions {
        if path.tau_ins.is_some_and(|ti| ti <= d.t) {
            break;
        }
        let x_star = barrier
            .threshold(d.t)
            .ok_or_else(|| Error::Dependency(format!("barrier does not cover decision time {}", d.t)))?;
        if d.x > x_star {
            continue;
        }
        let x_ill = x_star.min(params.illiquidity_cap_ratio(d.t));
        if d.x <= x_ill {
            let payoff = withdrawal.map_or_else(|| disc(d.t) * params.recovery_before_horizon(d.t, d.x), disc);
            return Ok(ScenarioRecord {
                outcome: Outcome::IlliquidityDefault,
                event_time: d.t,
                payoff,
                unsuccessful_runs: runs,
            });
        }
        runs.push(d.t);
        withdrawal.get_or_insert(d.t);
    }
    if let Some(ti) = path.tau_ins {
        let payoff = withdrawal.map_or_else(|| disc(ti) * params.boundary_value(ti), disc);
        return Ok(ScenarioRecord {
            outcome: Outcome::InsolvencyDefault,
            event_time: ti,
            payoff,
            unsuccessful_runs: runs,
        });
    }
    let horizon = params.horizon;
    let x_t = *path.x_values.last().expect("non-empty path");
    let (outcome, event_time) = match runs.first() {
        Some(&t) => (Outcome::UnsuccessfulRun, t),
        None => (Outcome::Survival, horizon),
    };
    let payoff = withdrawal.map_or_else(|| disc(horizon) * params.terminal_value(x_t), disc);
    Ok(ScenarioRecord {
        outcome,
        event_time,
        payoff,
        unsuccessful_runs: runs,
    })
}

/// Mean with a 95% normal confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub half_width: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                half_width: f64::NAN,
                n,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let se = (var / n as f64).sqrt();
        Self {
            mean,
            std_error: se,
            half_width: 1.96 * se,
            n,
        }
    }
}

/// Which tenor drives the creditor's decision dates.
#[derive(Debug, Clone, Copy)]
pub enum TenorRef<'a> {
    Discrete(&'a [f64]),
    Staggered(&'a IntensitySpec),
}

/// Discounted payoff of one path under `strategy`.
///
/// At each decision the firm first fails with probability `1 - theta(X)`
/// (the other creditors' run succeeds) and the creditor recovers
/// `min{1, alpha X / (1 + l_t)}`; otherwise the creditor withdraws and receives 1 if
/// `X` is at or below the strategy threshold.
fn path_payoff<R: Rng>(
    params: &ModelParams,
    beliefs: &BeliefSpec,
    arrivals: Arrivals<'_>,
    strategy: &dyn RunThreshold,
    v0: f64,
    mesh: &SimMesh,
    rng: &mut R,
) -> f64 {
    let growth = params.r_s - params.r;
    let mut payoff = f64::NAN;
    walk_path(params, arrivals, v0, mesh, rng, |e| match e {
        Event::Step { .. } => Control::Continue,
        Event::Decision(d) => {
            if d.u < 1.0 - theta(params, beliefs, d.x) {
                payoff = (growth * d.t).exp() * params.recovery_before_horizon(d.t, d.x);
                return Control::Stop;
            }
            match strategy.threshold(d.t) {
                Some(x) if d.x <= x => {
                    payoff = (growth * d.t).exp();
                    Control::Stop
                }
                _ => Control::Continue,
            }
        }
        Event::Insolvency { t } => {
            payoff = (growth * t).exp() * params.boundary_value(t);
            Control::Stop
        }
        Event::Horizon { x } => {
            payoff = (growth * params.horizon).exp() * params.terminal_value(x);
            Control::Stop
        }
    });
    payoff
}

/// Mean discounted payoff of a creditor following `strategy`, over
/// `n_paths` paths keyed by `(seed, path index)`.
pub fn strategy_payoff(
    params: &ModelParams,
    beliefs: &BeliefSpec,
    tenor: TenorRef<'_>,
    strategy: &dyn RunThreshold,
    v0: f64,
    n_paths: usize,
    seed: u64,
    dt: f64,
) -> Result<Estimate> {
    params.validate()?;
    if !(v0 > 0.0) {
        return Err(Error::Domain(format!("V0={v0} must be > 0")));
    }
    let (mesh, arrivals) = match tenor {
        TenorRef::Discrete(dates) => (SimMesh::new(params.horizon, dt, dates)?, Arrivals::Dates),
        TenorRef::Staggered(g) => (SimMesh::new(params.horizon, dt, &[])?, Arrivals::Cox(g)),
    };
    let values: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            path_payoff(params, beliefs, arrivals, strategy, v0, &mesh, &mut rng)
        })
        .collect();
    Ok(Estimate::from_samples(&values))
}

/// Kolmogorov-Smirnov statistic of `samples` against `Exp(rate)` and the
/// asymptotic 1% critical value `1.6276 / sqrt(n)`.
pub fn ks_exponential(samples: &[f64], rate: f64) -> (f64, f64) {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-rate * x).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    (d, 1.6276 / n.sqrt())
}
