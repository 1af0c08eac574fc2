//! Creditor beliefs about the run proportion and the induced survival
//! probability of a run, `theta(x) = P(xi <= min{1, psi x})`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::model::ModelParams;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF.
#[inline]
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn norm_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Probability that a standard normal lands in `[a, b]`, evaluated on the
/// tail that avoids cancellation.
#[inline]
pub fn normal_mass(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        norm_cdf(-a) - norm_cdf(-b)
    } else {
        norm_cdf(b) - norm_cdf(a)
    }
}

/// Distribution of the proportion of creditors that do not roll over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BeliefSpec {
    Uniform,
    /// Normal `N(mu, var)` truncated to `[0, 1]`; `var` is the variance of
    /// the untruncated law.
    TruncatedNormal { mu: f64, var: f64 },
}

impl Default for BeliefSpec {
    fn default() -> Self {
        BeliefSpec::Uniform
    }
}

impl BeliefSpec {
    pub fn truncated_normal(mu: f64, var: f64) -> Result<Self> {
        let spec = BeliefSpec::TruncatedNormal { mu, var };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BeliefSpec::Uniform => Ok(()),
            BeliefSpec::TruncatedNormal { mu, var } => {
                if !mu.is_finite() {
                    return Err(Error::param("mu", "must be finite"));
                }
                if !(var > 0.0) || !var.is_finite() {
                    return Err(Error::param("var", "must be finite and > 0"));
                }
                let (lo, hi) = self.standardized_bounds();
                if normal_mass(lo, hi) <= 0.0 {
                    return Err(Error::param("mu", "normal law puts no mass on [0, 1]"));
                }
                Ok(())
            }
        }
    }

    fn standardized_bounds(&self) -> (f64, f64) {
        match *self {
            BeliefSpec::Uniform => (0.0, 1.0),
            BeliefSpec::TruncatedNormal { mu, var } => {
                let s = var.sqrt();
                ((0.0 - mu) / s, (1.0 - mu) / s)
            }
        }
    }

    /// Density `f` on `[0, 1]` (zero outside).
    pub fn density(&self, u: f64) -> f64 {
        if !(0.0..=1.0).contains(&u) {
            return 0.0;
        }
        match *self {
            BeliefSpec::Uniform => 1.0,
            BeliefSpec::TruncatedNormal { mu, var } => {
                let s = var.sqrt();
                let (lo, hi) = self.standardized_bounds();
                norm_pdf((u - mu) / s) / s / normal_mass(lo, hi)
            }
        }
    }

    /// Distribution function `F(u) = int_0^u f`.
    pub fn cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        match *self {
            BeliefSpec::Uniform => u,
            BeliefSpec::TruncatedNormal { mu, var } => {
                let s = var.sqrt();
                let (lo, hi) = self.standardized_bounds();
                (normal_mass(lo, (u - mu) / s) / normal_mass(lo, hi)).clamp(0.0, 1.0)
            }
        }
    }

    /// Mean and variance of the (truncated) law.
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            BeliefSpec::Uniform => (0.5, 1.0 / 12.0),
            BeliefSpec::TruncatedNormal { mu, var } => {
                let s = var.sqrt();
                let (a, b) = self.standardized_bounds();
                let z = normal_mass(a, b);
                let (pa, pb) = (norm_pdf(a), norm_pdf(b));
                let shift = (pa - pb) / z;
                let mean = mu + s * shift;
                let variance = var * (1.0 + (a * pa - b * pb) / z - shift * shift);
                (mean, variance)
            }
        }
    }

    /// Truncated normal with location `mu` whose truncated variance is
    /// `target_var` to within `tol`.
    ///
    /// The truncated variance is increasing in the untruncated one and
    /// bounded by the variance of the uniform law as the latter grows, so the
    /// search runs over `log var` by bisection.
    pub fn truncated_normal_with_variance(mu: f64, target_var: f64, tol: f64) -> Result<Self> {
        let tv = |v: f64| BeliefSpec::TruncatedNormal { mu, var: v }.moments().1;
        let (mut lo, mut hi) = (1e-8_f64.ln(), 1e8_f64.ln());
        if tv(hi.exp()) < target_var - tol || tv(lo.exp()) > target_var + tol {
            return Err(Error::param(
                "var",
                format!("truncated variance {target_var} not attainable for mu={mu}"),
            ));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = tv(mid.exp());
            if (v - target_var).abs() <= tol {
                return BeliefSpec::truncated_normal(mu, mid.exp());
            }
            if v < target_var {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::param("var", "moment matching did not converge"))
    }
}

/// Creditor's belief that the firm survives a run at ratio `x`.
#[inline]
pub fn theta(params: &ModelParams, beliefs: &BeliefSpec, x: f64) -> f64 {
    beliefs.cdf((params.psi * x).min(1.0))
}
