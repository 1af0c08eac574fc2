use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::fd::grid::Grid;

const MAGIC: &[u8; 4] = b"DRVS";
const VERSION: u32 = 1;

/// Discretized value `u(tau_n, y_j)` on the transformed grid.
///
/// Slice `n` lives at time-to-maturity `taus[n]` (calendar time
/// `horizon - taus[n]`); node `j` maps to the ratio `anchors[n] * e^{y_j}`
/// with `anchors[n] = beta l_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSurface {
    pub grid: Grid,
    pub horizon: f64,
    pub taus: Vec<f64>,
    pub anchors: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl ValueSurface {
    pub fn new(grid: Grid, horizon: f64) -> Self {
        Self {
            grid,
            horizon,
            taus: Vec::new(),
            anchors: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, tau: f64, anchor: f64, slice: Vec<f64>) -> Result<()> {
        if slice.len() != self.grid.n_y + 1 {
            return Err(Error::Domain(format!(
                "slice has {} nodes, grid has {}",
                slice.len(),
                self.grid.n_y + 1
            )));
        }
        if let Some(j) = slice.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value at tau={tau}, node {j}"
            )));
        }
        self.taus.push(tau);
        self.anchors.push(anchor);
        self.values.push(slice);
        Ok(())
    }

    pub fn n_slices(&self) -> usize {
        self.taus.len()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.horizon - self.taus[n]
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        &self.values[n]
    }

    pub fn ratio(&self, n: usize, j: usize) -> f64 {
        self.anchors[n] * self.grid.y(j).exp()
    }

    /// Index of the slice stored at calendar time `t`, if any.
    pub fn slice_at_time(&self, t: f64) -> Option<usize> {
        let tau = self.horizon - t;
        self.taus.iter().position(|&s| (s - tau).abs() < 1e-9)
    }

    /// Slice whose time-to-maturity is closest to `horizon - t`.
    pub fn nearest_slice(&self, t: f64) -> usize {
        let tau = self.horizon - t;
        self.taus
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - tau).abs().total_cmp(&(b.1 - tau).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Linear interpolation in `y` on slice `n`. Ratios at or below the
    /// insolvency boundary return the boundary value; ratios beyond the grid
    /// return the far-field value.
    pub fn value_on_slice(&self, n: usize, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("ratio x={x} must be > 0")));
        }
        let u = &self.values[n];
        let y = (x / self.anchors[n]).ln();
        if y <= 0.0 {
            return Ok(u[0]);
        }
        let pos = y / self.grid.dy();
        let j = pos.floor() as usize;
        if j >= self.grid.n_y {
            return Ok(u[self.grid.n_y]);
        }
        let w = pos - j as f64;
        Ok((1.0 - w) * u[j] + w * u[j + 1])
    }

    /// Value at calendar time `t` and ratio `x`, interpolating linearly
    /// between the two bracketing slices when `t` is not a mesh time.
    pub fn value_at(&self, t: f64, x: f64) -> Result<f64> {
        if self.taus.is_empty() {
            return Err(Error::Dependency("surface has no slices".into()));
        }
        let tau = self.horizon - t;
        let lo = self.taus[0].min(self.taus[self.taus.len() - 1]);
        let hi = self.taus[0].max(self.taus[self.taus.len() - 1]);
        if tau < lo - 1e-9 || tau > hi + 1e-9 {
            return Err(Error::Domain(format!("time {t} not covered by the surface")));
        }
        if let Some(n) = self.slice_at_time(t) {
            return self.value_on_slice(n, x);
        }
        let k = self
            .taus
            .windows(2)
            .position(|w| (w[0] - tau) * (w[1] - tau) <= 0.0)
            .ok_or_else(|| Error::Domain(format!("time {t} not bracketed")))?;
        let (t0, t1) = (self.taus[k], self.taus[k + 1]);
        let w = (tau - t0) / (t1 - t0);
        Ok((1.0 - w) * self.value_on_slice(k, x)? + w * self.value_on_slice(k + 1, x)?)
    }

    /// Writes `tau,y,u` rows, one per node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "tau,y,u")?;
        for (n, slice) in self.values.iter().enumerate() {
            for (j, u) in slice.iter().enumerate() {
                writeln!(w, "{},{},{}", self.taus[n], self.grid.y(j), u)?;
            }
        }
        Ok(())
    }

    /// Little-endian dump: magic `DRVS`, version `u32`, `y_max f64`,
    /// `n_y u64`, `n_tau u64`, `horizon f64`, slice count `u64`, then per
    /// slice `tau f64`, `anchor f64` and `n_y + 1` values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.grid.y_max.to_le_bytes())?;
        w.write_all(&(self.grid.n_y as u64).to_le_bytes())?;
        w.write_all(&(self.grid.n_tau as u64).to_le_bytes())?;
        w.write_all(&self.horizon.to_le_bytes())?;
        w.write_all(&(self.n_slices() as u64).to_le_bytes())?;
        for n in 0..self.n_slices() {
            w.write_all(&self.taus[n].to_le_bytes())?;
            w.write_all(&self.anchors[n].to_le_bytes())?;
            for v in &self.values[n] {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse("not a value-surface dump".into()));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::Parse(format!("unsupported surface version {version}")));
        }
        let y_max = read_f64(&mut r)?;
        let n_y = read_u64(&mut r)? as usize;
        let n_tau = read_u64(&mut r)? as usize;
        let grid = Grid::new(y_max, n_y, n_tau).map_err(|e| Error::Parse(e.to_string()))?;
        let horizon = read_f64(&mut r)?;
        let count = read_u64(&mut r)? as usize;
        let mut s = ValueSurface::new(grid, horizon);
        for _ in 0..count {
            let tau = read_f64(&mut r)?;
            let anchor = read_f64(&mut r)?;
            let slice = (0..=n_y).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
            s.push(tau, anchor, slice).map_err(|e| Error::Parse(e.to_string()))?;
        }
        Ok(s)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> ValueSurface {
        let grid = Grid::new(1.0, 8, 2).unwrap();
        let mut s = ValueSurface::new(grid, 2.0);
        for n in 0..3 {
            let slice = (0..=8).map(|j| n as f64 + 0.1 * j as f64).collect();
            s.push(n as f64, 0.5, slice).unwrap();
        }
        s
    }

    #[test]
    fn binary_round_trip() {
        let s = toy();
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        let back = ValueSurface::read_binary(buf.as_slice()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(
            ValueSurface::read_binary(&b"NOPE0000"[..]),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn csv_header_and_rows() {
        let mut buf = Vec::new();
        toy().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("tau,y,u"));
        assert_eq!(text.lines().count(), 1 + 3 * 9);
    }

    #[test]
    fn interpolation() {
        let s = toy();
        // Slice 1 is u = 1 + 0.1 j, dy = 0.125 so u = 1 + 0.8 y.
        let x = 0.5 * (0.3f64).exp();
        assert!((s.value_on_slice(1, x).unwrap() - 1.24).abs() < 1e-12);
        assert_eq!(s.value_on_slice(1, 0.1).unwrap(), 1.0);
        assert!((s.value_on_slice(1, 1e6).unwrap() - 1.8).abs() < 1e-12);
        // Halfway between slices 0 and 1 (t = 1.5).
        assert!((s.value_at(1.5, x).unwrap() - 0.74).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite_slice() {
        let mut s = ValueSurface::new(Grid::new(1.0, 8, 1).unwrap(), 1.0);
        let mut slice = vec![0.0; 9];
        slice[3] = f64::NAN;
        assert!(s.push(0.0, 1.0, slice).is_err());
    }
}
