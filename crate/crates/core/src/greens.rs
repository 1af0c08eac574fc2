//! Image-method Green's function of the creditor-value operator on the
//! normalized half-line `x_bar = x / (beta l_t) >= 1`, and the resulting
//! representation of the value on one interval of a discrete tenor:
//!
//! ```text
//! U(t, x_bar) = int_1^inf Phi(xi) G(t, x_bar; T_end, xi) dxi
//!             + 1/2 sigma^2 int_t^T_end P(s) d/dxi{xi^2 G(t, x_bar; s, xi)}|_{xi=1} ds
//! ```
//!
//! with `Phi` the terminal data at `T_end` and `P` the boundary data.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fd::transformed_drift;
use crate::model::ModelParams;
use crate::quadrature::Quadrature;

/// Half-width, in standard deviations, of the terminal integration window;
/// the Gaussian factor beyond it is below `1e-14`.
const WINDOW_SD: f64 = 8.1;

fn check_args(x_bar: f64, xi: f64, tau: f64) -> Result<()> {
    if !(x_bar >= 1.0) || !(xi >= 1.0) {
        return Err(Error::Domain(format!(
            "kernel needs x_bar >= 1 and xi >= 1 (got {x_bar}, {xi})"
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("kernel needs t < end (tau = {tau})")));
    }
    Ok(())
}

/// `G(t, x_bar; end, xi)`: discounted transition density of the killed
/// normalized ratio from `x_bar` at `t` to `xi` at `end`.
pub fn greens_kernel(params: &ModelParams, t: f64, x_bar: f64, end: f64, xi: f64) -> Result<f64> {
    let tau = end - t;
    check_args(x_bar, xi, tau)?;
    let nu = transformed_drift(params);
    let s2 = params.sigma * params.sigma * tau;
    let w = (x_bar / xi).ln() + nu * tau;
    let image = (2.0 * (1.0 / xi).ln() * x_bar.ln() / s2).exp();
    Ok(((params.r_s - params.r) * tau).exp() / (xi * (2.0 * PI * s2).sqrt())
        * (-w * w / (2.0 * s2)).exp()
        * (1.0 - image))
}

/// `d/dxi {xi^2 G}` at any `xi >= 1`, from the analytic derivative.
pub fn greens_kernel_xi_derivative(params: &ModelParams, t: f64, x_bar: f64, end: f64, xi: f64) -> Result<f64> {
    let tau = end - t;
    check_args(x_bar, xi, tau)?;
    let nu = transformed_drift(params);
    let s2 = params.sigma * params.sigma * tau;
    let z0 = x_bar.ln();
    let w = (x_bar / xi).ln() + nu * tau;
    let k = ((params.r_s - params.r) * tau).exp() / (2.0 * PI * s2).sqrt();
    let e = (-w * w / (2.0 * s2)).exp();
    let q = (-2.0 * xi.ln() * z0 / s2).exp();
    // xi^2 G = k xi e (1 - q); de/dxi = e w / (xi s2); dq/dxi = -2 z0 q / (xi s2).
    Ok(k * e * ((1.0 - q) * (1.0 + w / s2) + 2.0 * z0 * q / s2))
}

/// `1/2 sigma^2 d/dxi {xi^2 G}|_{xi = 1}`: the discounted first-passage
/// density of the normalized ratio through the boundary.
pub fn greens_boundary_flux(params: &ModelParams, t: f64, x_bar: f64, s: f64) -> Result<f64> {
    let tau = s - t;
    check_args(x_bar, 1.0, tau)?;
    let nu = transformed_drift(params);
    let sigma = params.sigma;
    let z0 = x_bar.ln();
    let w = z0 + nu * tau;
    Ok(((params.r_s - params.r) * tau).exp() * z0 / (sigma * (2.0 * PI * tau.powi(3)).sqrt())
        * (-w * w / (2.0 * sigma * sigma * tau)).exp())
}

/// Value at `(t, x)` on the interval `[start, end]` from boundary data
/// `boundary(s)` (calendar time) and terminal data `terminal(x)` (ratio at
/// `end`), both integrals by adaptive quadrature.
pub fn greens_value(
    params: &ModelParams,
    boundary: impl Fn(f64) -> f64,
    terminal: impl Fn(f64) -> f64,
    interval: (f64, f64),
    t: f64,
    x: f64,
    quad: &Quadrature,
) -> Result<f64> {
    let (start, end) = interval;
    if !(t >= start - 1e-12 && t < end) {
        return Err(Error::Domain(format!("t={t} outside [{start}, {end})")));
    }
    let anchor_t = params.boundary_ratio(t);
    if !(x >= anchor_t * (1.0 - 1e-12)) {
        return Err(Error::Domain(format!(
            "x={x} below the insolvency boundary {anchor_t}"
        )));
    }
    let x_bar = (x / anchor_t).max(1.0);
    if x_bar == 1.0 {
        return Ok(boundary(t));
    }
    let tau = end - t;
    let nu = transformed_drift(params);
    let sd = params.sigma * tau.sqrt();
    let z0 = x_bar.ln();
    let growth = ((params.r_s - params.r) * tau).exp();
    let anchor_end = params.boundary_ratio(end);

    // Terminal part in z = log xi, where xi G dxi is a Gaussian with image.
    let center = z0 + nu * tau;
    let lo = (center - WINDOW_SD * sd).max(0.0);
    let hi = (center + WINDOW_SD * sd).max(lo);
    let terminal_part = if hi > lo {
        let s2 = sd * sd;
        let f = |z: f64| {
            let w = z0 - z + nu * tau;
            let image = (-2.0 * z * z0 / s2).exp();
            growth / (2.0 * PI * s2).sqrt()
                * (-w * w / (2.0 * s2)).exp()
                * (1.0 - image)
                * terminal(anchor_end * z.exp())
        };
        let mut pts = vec![lo, hi];
        if center > lo && center < hi {
            pts.insert(1, center);
        }
        quad.integrate_with_breaks(f, &pts)?.value
    } else {
        0.0
    };

    // Boundary part in s - t; the density peaks near z0^2 / (3 sigma^2).
    let peak = z0 * z0 / (3.0 * params.sigma * params.sigma);
    let mut pts = vec![0.0];
    for p in [0.25 * peak, peak, 4.0 * peak] {
        if p > 0.0 && p < tau {
            pts.push(p);
        }
    }
    pts.push(tau);
    let g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        greens_boundary_flux(params, t, x_bar, t + u).unwrap_or(0.0) * boundary(t + u)
    };
    let boundary_part = quad.integrate_with_breaks(g, &pts)?.value;
    Ok(terminal_part + boundary_part)
}
