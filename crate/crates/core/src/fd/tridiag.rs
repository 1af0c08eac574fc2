//! Thomas algorithm for strictly diagonally dominant tridiagonal systems.

use crate::error::{Error, Result};

/// Off-diagonal band: either constant along the matrix or given per row.
#[derive(Debug, Clone, Copy)]
pub enum Band<'a> {
    Constant(f64),
    Varying(&'a [f64]),
}

impl Band<'_> {
    #[inline]
    fn at(&self, i: usize) -> f64 {
        match self {
            Band::Constant(v) => *v,
            Band::Varying(v) => v[i],
        }
    }
}

/// `lower[i]` couples row `i` to column `i-1` (unused for `i = 0`);
/// `upper[i]` couples row `i` to column `i+1` (unused for the last row).
#[derive(Debug, Clone, Copy)]
pub struct TridiagonalSystem<'a> {
    pub lower: Band<'a>,
    pub diag: &'a [f64],
    pub upper: Band<'a>,
}

impl<'a> TridiagonalSystem<'a> {
    pub fn new(lower: Band<'a>, diag: &'a [f64], upper: Band<'a>) -> Self {
        Self { lower, diag, upper }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// First row violating strict diagonal dominance, if any.
    pub fn dominance_violation(&self) -> Option<usize> {
        let n = self.len();
        (0..n).find(|&i| {
            let off = if i > 0 { self.lower.at(i).abs() } else { 0.0 }
                + if i + 1 < n { self.upper.at(i).abs() } else { 0.0 };
            !(self.diag[i].abs() > off)
        })
    }

    /// `A v` for this matrix.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.lower.at(i) * v[i - 1];
                }
                if i + 1 < n {
                    s += self.upper.at(i) * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `A v = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::Domain(format!(
                "right-hand side has length {}, system has {n} rows",
                rhs.len()
            )));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        if let Some(row) = self.dominance_violation() {
            return Err(Error::Configuration(format!(
                "tridiagonal system loses diagonal dominance at row {row} (diag {:.6e})",
                self.diag[row]
            )));
        }
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        c_prime[0] = if n > 1 { self.upper.at(0) / self.diag[0] } else { 0.0 };
        d_prime[0] = rhs[0] / self.diag[0];
        for i in 1..n {
            let l = self.lower.at(i);
            let denom = self.diag[i] - l * c_prime[i - 1];
            if i + 1 < n {
                c_prime[i] = self.upper.at(i) / denom;
            }
            d_prime[i] = (rhs[i] - l * d_prime[i - 1]) / denom;
        }
        let mut x = d_prime;
        for i in (0..n - 1).rev() {
            x[i] -= c_prime[i] * x[i + 1];
        }
        Ok(x)
    }
}
