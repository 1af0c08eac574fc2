//! Locating the indifference level `U(t, x*) = 1` on a solved slice.

use std::io::Write;

use crate::error::Result;
use crate::fd::ValueSurface;
use crate::model::ModelParams;

/// Debt-run, illiquidity and insolvency barriers at one time, the first two
/// derived from the ratio threshold `x_star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierPoint {
    pub t: f64,
    pub x_star: f64,
    pub d_run: f64,
    pub d_ill: f64,
    pub d_ins: f64,
}

impl BarrierPoint {
    pub fn from_ratio(params: &ModelParams, t: f64, x_star: f64) -> Self {
        let s = params.short_debt(t);
        let d_run = x_star * s;
        Self {
            t,
            x_star,
            d_run,
            d_ill: crate::model::illiquidity_barrier(params, t, d_run),
            d_ins: s * params.boundary_ratio(t),
        }
    }

    /// Illiquidity threshold in ratio units.
    pub fn x_ill(&self, params: &ModelParams) -> f64 {
        self.x_star.min(params.illiquidity_cap_ratio(self.t))
    }

    pub fn is_ordered(&self) -> bool {
        self.d_ins <= self.d_ill && self.d_ill <= self.d_run
    }
}

/// Writes rows `first,x_star,D_run,D_ill,D_ins` under the given time header.
pub(crate) fn write_points<W: Write>(mut w: W, time_header: &str, points: &[BarrierPoint]) -> Result<()> {
    writeln!(w, "{time_header},x_star,D_run,D_ill,D_ins")?;
    for p in points {
        writeln!(w, "{},{},{},{},{}", p.t, p.x_star, p.d_run, p.d_ill, p.d_ins)?;
    }
    Ok(())
}

/// Reads rows written by [`write_points`].
pub(crate) fn read_points(text: &str, time_header: &str) -> Result<Vec<BarrierPoint>> {
    use crate::error::Error;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty barrier file".into()))?;
    let expected = format!("{time_header},x_star,D_run,D_ill,D_ins");
    if header.trim() != expected {
        return Err(Error::Parse(format!("unexpected barrier header `{header}`")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("barrier row {}: {e}", i + 2)))?;
            if v.len() != 5 {
                return Err(Error::Parse(format!("barrier row {} has {} fields", i + 2, v.len())));
            }
            Ok(BarrierPoint {
                t: v[0],
                x_star: v[1],
                d_run: v[2],
                d_ill: v[3],
                d_ins: v[4],
            })
        })
        .collect()
}

/// A rule deciding, at decision time `t`, the ratio at or below which a
/// creditor withdraws. `None` means the rule does not cover `t`.
pub trait RunThreshold: Sync {
    fn threshold(&self, t: f64) -> Option<f64>;
}

/// The creditor never withdraws.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeverRun;

impl RunThreshold for NeverRun {
    fn threshold(&self, _t: f64) -> Option<f64> {
        Some(0.0)
    }
}

/// Threshold of `inner` multiplied by `factor`.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<'a, S: ?Sized> {
    pub inner: &'a S,
    pub factor: f64,
}

impl<S: RunThreshold + ?Sized> RunThreshold for Scaled<'_, S> {
    fn threshold(&self, t: f64) -> Option<f64> {
        self.inner.threshold(t).map(|x| x * self.factor)
    }
}

/// Threshold of `inner` read at `t + shift`, clamped to `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct TimeShifted<'a, S: ?Sized> {
    pub inner: &'a S,
    pub shift: f64,
    pub lo: f64,
    pub hi: f64,
}

impl<S: RunThreshold + ?Sized> RunThreshold for TimeShifted<'_, S> {
    fn threshold(&self, t: f64) -> Option<f64> {
        self.inner.threshold((t + self.shift).clamp(self.lo, self.hi))
    }
}

/// How the root on a slice was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    /// Upward crossing strictly inside the grid.
    Interior,
    /// Every interior node already exceeds 1: the creditor rolls over down
    /// to the insolvency boundary, so `x* = beta l_t`.
    Boundary,
    /// No node reaches 1: the creditor always runs.
    Never,
}

/// Root of `u(., y) = 1` on one slice, in ratio units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceRoot {
    pub x_star: f64,
    pub kind: RootKind,
    /// Number of upward crossings found; more than one signals
    /// discretization noise and the largest one is kept.
    pub crossings: usize,
    /// `|dU/dx(x*+) - dU/dx(x*-)|` from one-sided differences, when both
    /// sides have two nodes.
    pub smooth_pasting_gap: Option<f64>,
}

/// Largest upward crossing of 1 on slice `n`, located on the piecewise
/// linear interpolant in `y`.
pub fn slice_root(surface: &ValueSurface, n: usize) -> SliceRoot {
    let u = surface.slice(n);
    let anchor = surface.anchors[n];
    let dy = surface.grid.dy();
    let last = u.len() - 1;
    let up: Vec<usize> = (0..last).filter(|&j| u[j] < 1.0 && u[j + 1] >= 1.0).collect();
    let crossings = up.len();
    let Some(&j) = up.last() else {
        let kind = if u[1..].iter().all(|&v| v >= 1.0) {
            RootKind::Boundary
        } else {
            RootKind::Never
        };
        let x_star = match kind {
            RootKind::Boundary => anchor,
            _ => f64::INFINITY,
        };
        return SliceRoot {
            x_star,
            kind,
            crossings,
            smooth_pasting_gap: None,
        };
    };
    if j == 0 {
        return SliceRoot {
            x_star: anchor,
            kind: RootKind::Boundary,
            crossings,
            smooth_pasting_gap: None,
        };
    }
    let w = (1.0 - u[j]) / (u[j + 1] - u[j]);
    let y_star = (j as f64 + w) * dy;
    let x = |k: usize| anchor * (k as f64 * dy).exp();
    let gap = (j + 2 <= last).then(|| {
        let left = (u[j] - u[j - 1]) / (x(j) - x(j - 1));
        let right = (u[j + 2] - u[j + 1]) / (x(j + 2) - x(j + 1));
        (right - left).abs()
    });
    SliceRoot {
        x_star: anchor * y_star.exp(),
        kind: RootKind::Interior,
        crossings,
        smooth_pasting_gap: gap,
    }
}
