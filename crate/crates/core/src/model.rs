//! Capital structure, deterministic debt processes, recovery and the
//! insolvency barrier.
//!
//! Short- and long-term debt accrue at constant rates, so every deterministic
//! quantity has a closed form:
//!
//! ```text
//! S_t = S0 e^{r_S t},  L_t = L0 e^{r_L t},  l_t = L_t / S_t,
//! D^Ins_t = beta * l_t * S_t = beta * L0 e^{r_L t}.
//! ```
//!
//! The state variable of every solver is the ratio `x = V / S` of asset
//! value to short-term debt.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when checking `0 <= t <= T` against accumulated mesh times.
const TIME_EPS: f64 = 1e-9;

/// Market and contract constants of the firm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
/// Fields missing from a serialized form take their [`ModelParams::reference`] values.
#[serde(deny_unknown_fields, default = "ModelParams::reference")]
pub struct ModelParams {
    /// Market interest rate used for discounting.
    pub r: f64,
    /// Short-term debt rate.
    pub r_s: f64,
    /// Long-term debt rate.
    pub r_l: f64,
    /// Expected return of the firm's assets.
    pub r_v: f64,
    /// Asset volatility.
    pub sigma: f64,
    /// Fraction of asset value retained after bankruptcy costs.
    pub alpha: f64,
    /// Safety-covenant coefficient of the insolvency barrier.
    pub beta: f64,
    /// Firesale rate.
    pub psi: f64,
    /// Initial short-term debt.
    pub s0: f64,
    /// Initial long-term debt.
    pub l0: f64,
    /// Horizon, the maturity of long-term debt (years).
    pub horizon: f64,
}

/// Debt levels at a point in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebtState {
    pub t: f64,
    pub short: f64,
    pub long: f64,
    /// `long / short`.
    pub ratio: f64,
}

impl ModelParams {
    /// Reference parameter set: sigma 0.4, r_V -2%, r 1%,
    /// r_S 3%, r_L 5%, S0 = L0 = 2, beta 0.4, alpha 0.6, psi 0.6, T = 10.
    pub fn reference() -> Self {
        Self {
            r: 0.01,
            r_s: 0.03,
            r_l: 0.05,
            r_v: -0.02,
            sigma: 0.4,
            alpha: 0.6,
            beta: 0.4,
            psi: 0.6,
            s0: 2.0,
            l0: 2.0,
            horizon: 10.0,
        }
    }

    /// Returns every violated invariant. Empty means the set is admissible.
    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        let finite = [
            ("r", self.r),
            ("r_s", self.r_s),
            ("r_l", self.r_l),
            ("r_v", self.r_v),
            ("sigma", self.sigma),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("psi", self.psi),
            ("s0", self.s0),
            ("l0", self.l0),
            ("horizon", self.horizon),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                out.push(Error::param(name, "must be finite"));
            }
        }
        if !out.is_empty() {
            return out;
        }
        if !(self.r_l > self.r_s && self.r_s > self.r) {
            out.push(Error::param(
                "r_l",
                format!(
                    "rates must satisfy r_l > r_s > r (got r_l={}, r_s={}, r={})",
                    self.r_l, self.r_s, self.r
                ),
            ));
        }
        if !(self.sigma > 0.0) {
            out.push(Error::param("sigma", "must be > 0"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            out.push(Error::param("alpha", "must lie in (0, 1)"));
        }
        if !(self.psi > 0.0 && self.psi < 1.0) {
            out.push(Error::param("psi", "must lie in (0, 1)"));
        }
        if !(self.horizon > 0.0) {
            out.push(Error::param("horizon", "must be > 0"));
        }
        if !(self.s0 > 0.0) {
            out.push(Error::param("s0", "must be > 0"));
        }
        if !(self.l0 > 0.0) {
            out.push(Error::param("l0", "must be > 0"));
        }
        if !(self.beta > 0.0) {
            out.push(Error::param("beta", "must be > 0"));
        } else if self.s0 > 0.0 && self.l0 > 0.0 && self.horizon > 0.0 {
            // l_t is monotone in t, so the covenant bound binds at an endpoint.
            for t in [0.0, self.horizon] {
                let bound = 1.0 / self.ratio_at(t) + 1.0;
                if self.beta > bound {
                    out.push(Error::param(
                        "beta",
                        format!("beta={} exceeds 1/l_t + 1 = {bound} at t={t}", self.beta),
                    ));
                }
            }
        }
        out
    }

    /// Validates all invariants, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Validated copy.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if t.is_finite() && t >= -TIME_EPS && t <= self.horizon + TIME_EPS {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "time {t} outside [0, {}]",
                self.horizon
            )))
        }
    }

    #[inline]
    pub fn short_debt(&self, t: f64) -> f64 {
        self.s0 * (self.r_s * t).exp()
    }

    #[inline]
    pub fn long_debt(&self, t: f64) -> f64 {
        self.l0 * (self.r_l * t).exp()
    }

    /// `l_t` without range checking; used on hot paths.
    #[inline]
    pub fn ratio_at(&self, t: f64) -> f64 {
        self.l0 / self.s0 * ((self.r_l - self.r_s) * t).exp()
    }

    pub fn debt_state(&self, t: f64) -> Result<DebtState> {
        self.check_time(t)?;
        Ok(DebtState {
            t,
            short: self.short_debt(t),
            long: self.long_debt(t),
            ratio: self.ratio_at(t),
        })
    }

    /// Insolvency boundary in ratio space, `beta * l_t`.
    #[inline]
    pub fn boundary_ratio(&self, t: f64) -> f64 {
        self.beta * self.ratio_at(t)
    }

    /// Creditor value on the insolvency boundary, `alpha beta l_t / (1 + l_t)`.
    #[inline]
    pub fn boundary_value(&self, t: f64) -> f64 {
        let l = self.ratio_at(t);
        self.alpha * self.beta * l / (1.0 + l)
    }

    /// Terminal payoff `min{1, x / (1 + l_T)}`.
    #[inline]
    pub fn terminal_value(&self, x: f64) -> f64 {
        (x / (1.0 + self.ratio_at(self.horizon))).min(1.0)
    }

    /// Recovery before the horizon, `min{1, alpha x / (1 + l_t)}`, unchecked.
    #[inline]
    pub fn recovery_before_horizon(&self, t: f64, x: f64) -> f64 {
        (self.alpha * x / (1.0 + self.ratio_at(t))).min(1.0)
    }

    /// Illiquidity cap in ratio space, `(1 + l_t) / psi`.
    #[inline]
    pub fn illiquidity_cap_ratio(&self, t: f64) -> f64 {
        (1.0 + self.ratio_at(t)) / self.psi
    }
}

/// Long- to short-term debt ratio `l_t = (L0/S0) e^{(r_L - r_S) t}`.
pub fn l_of_t(params: &ModelParams, t: f64) -> Result<f64> {
    params.check_time(t)?;
    Ok(params.ratio_at(t))
}

/// Recovery rate of a creditor at default time `t` with ratio `x`.
///
/// Before the horizon bankruptcy costs apply, `min{1, alpha x/(1+l_t)}`; at
/// `t = T` the final workout pays `min{1, x/(1+l_T)}`.
pub fn recovery_rate(params: &ModelParams, t: f64, x: f64) -> Result<f64> {
    params.check_time(t)?;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("ratio x={x} must be > 0")));
    }
    if (t - params.horizon).abs() <= TIME_EPS {
        Ok(params.terminal_value(x))
    } else {
        Ok(params.recovery_before_horizon(t, x))
    }
}

/// Insolvency barrier in firm-value space, `D^Ins_t = beta L0 e^{r_L t}`.
pub fn insolvency_barrier(params: &ModelParams, t: f64) -> Result<f64> {
    params.check_time(t)?;
    if !(params.beta > 0.0) {
        return Err(Error::Domain(format!("beta={} must be > 0", params.beta)));
    }
    Ok(params.short_debt(t) * params.boundary_ratio(t))
}

/// Illiquidity barrier given a debt-run barrier, both in firm-value space.
pub fn illiquidity_barrier(params: &ModelParams, t: f64, d_run: f64) -> f64 {
    let cap = (params.short_debt(t) + params.long_debt(t)) / params.psi;
    d_run.min(cap)
}
