//! Structured sampling grids in cylindrical coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform axis with both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Axis> {
        if count < 2 {
            return Err(Error::InvalidConfig(format!(
                "axis needs at least 2 points, got {count}"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidConfig(format!(
                "degenerate axis [{lo}, {hi}]"
            )));
        }
        Ok(Axis { lo, hi, count })
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    pub fn at(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }
}

/// Box `ρ × φ × z`, sampled row-major with `z` fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rho: Axis,
    pub phi: Axis,
    pub z: Axis,
}

impl GridSpec {
    /// `counts = [N_ρ, N_φ, N_z]`, `extent = [ρ₀, ρ₁, φ₀, φ₁, z₀, z₁]`.
    pub fn new(counts: [usize; 3], extent: [f64; 6]) -> Result<GridSpec> {
        let rho = Axis::new(extent[0], extent[1], counts[0])?;
        if !(rho.lo > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "rho range must be positive, got {}",
                rho.lo
            )));
        }
        Ok(GridSpec {
            rho,
            phi: Axis::new(extent[2], extent[3], counts[1])?,
            z: Axis::new(extent[4], extent[5], counts[2])?,
        })
    }

    pub fn counts(&self) -> [usize; 3] {
        [self.rho.count, self.phi.count, self.z.count]
    }

    pub fn extent(&self) -> [f64; 6] {
        [
            self.rho.lo,
            self.rho.hi,
            self.phi.lo,
            self.phi.hi,
            self.z.lo,
            self.z.hi,
        ]
    }

    pub fn spacing(&self) -> [f64; 3] {
        [self.rho.spacing(), self.phi.spacing(), self.z.spacing()]
    }

    pub fn len(&self) -> usize {
        self.rho.count * self.phi.count * self.z.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.phi.count + j) * self.z.count + l
    }

    pub fn point(&self, i: usize, j: usize, l: usize) -> (f64, f64, f64) {
        (self.rho.at(i), self.phi.at(j), self.z.at(l))
    }
}

/// Parses `"A,B,C"` into three counts.
pub fn parse_counts(text: &str) -> Result<[usize; 3]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::InvalidConfig(format!(
            "expected three counts, got `{text}`"
        )));
    }
    let mut out = [0usize; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad count `{p}`")))?;
    }
    Ok(out)
}

/// Parses six comma-separated bounds.
pub fn parse_extent(text: &str) -> Result<[f64; 6]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(Error::InvalidConfig(format!(
            "expected six bounds, got `{text}`"
        )));
    }
    let mut out = [0.0; 6];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad bound `{p}`")))?;
    }
    Ok(out)
}
