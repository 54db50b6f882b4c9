//! Point evaluators for the flow in cylindrical coordinates `(ρ, φ, z)`.
//!
//! Velocity components are stored in the `(e_ρ, e_z, e_φ)` order used by
//! the construction: `u = (1/x)t_y e_ρ + (kh − xt_x)/(x²+k²) e_z +
//! (xh + kt_x)/(x²+k²) e_φ`, with `p = t/(1+k²)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::HelixConfig;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::quadrature::gauss8;
use crate::section::{CrossSectionMap, SectionCoefficients, XSlice};

/// Default lower bound on `t` for the Beltrami variant.
pub const DEFAULT_T_FLOOR: f64 = 1e-6;

/// Panels of the cumulative pressure table over `[ε, 2ε]`.
const PRESSURE_PANELS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Raw,
    Cutoff,
    Beltrami,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Raw => "raw",
            Variant::Cutoff => "cutoff",
            Variant::Beltrami => "beltrami",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Variant::Raw),
            "cutoff" => Ok(Variant::Cutoff),
            "beltrami" => Ok(Variant::Beltrami),
            _ => Err(Error::InvalidConfig(format!("unknown variant `{s}`"))),
        }
    }
}

/// One evaluated point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub rho: f64,
    pub phi: f64,
    pub z: f64,
    pub u_rho: f64,
    pub u_z: f64,
    pub u_phi: f64,
    pub p: f64,
    pub t: f64,
    pub in_support: bool,
}

impl FlowSample {
    pub fn speed_sq(&self) -> f64 {
        self.u_rho * self.u_rho + self.u_z * self.u_z + self.u_phi * self.u_phi
    }

    /// Velocity as Cartesian `(v_X, v_Y, v_Z)`.
    pub fn cartesian_velocity(&self) -> [f64; 3] {
        let (s, c) = self.phi.sin_cos();
        [
            self.u_rho * c - self.u_phi * s,
            self.u_rho * s + self.u_phi * c,
            self.u_z,
        ]
    }

    /// Cartesian position `(X, Y, Z)`.
    pub fn cartesian_position(&self) -> [f64; 3] {
        let (s, c) = self.phi.sin_cos();
        [self.rho * c, self.rho * s, self.z]
    }

    fn zero(rho: f64, phi: f64, z: f64, p: f64, t: f64, in_support: bool) -> FlowSample {
        FlowSample {
            rho,
            phi,
            z,
            u_rho: 0.0,
            u_z: 0.0,
            u_phi: 0.0,
            p,
            t,
            in_support,
        }
    }
}

/// Beltrami-variant point: `ũ = p^{−5/6}u`, `p̃ = −(3/2)p^{−2/3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeltramiSample {
    pub rho: f64,
    pub phi: f64,
    pub z: f64,
    pub u_rho: f64,
    pub u_z: f64,
    pub u_phi: f64,
    pub p: f64,
    pub t: f64,
    /// `ψ = t^{1/6}`.
    pub psi: f64,
    /// `χ = (1/6)t^{−5/6}h(t)`.
    pub chi: f64,
    /// `−dχ/dψ = 5h/(6t) − h'(t)`.
    pub lambda: f64,
}

impl BeltramiSample {
    pub fn velocity(&self) -> [f64; 3] {
        [self.u_rho, self.u_z, self.u_phi]
    }

    pub fn to_flow_sample(&self) -> FlowSample {
        FlowSample {
            rho: self.rho,
            phi: self.phi,
            z: self.z,
            u_rho: self.u_rho,
            u_z: self.u_z,
            u_phi: self.u_phi,
            p: self.p,
            t: self.t,
            in_support: true,
        }
    }
}

/// `(x, y) = (ρ, z − kφ)` with `y` reduced into `(−πk, πk]` for `k > 0`.
pub fn helical_coords(rho: f64, phi: f64, z: f64, k: f64) -> (f64, f64) {
    let mut y = z - k * phi;
    if k > 0.0 {
        let period = 2.0 * PI * k;
        let wraps = (y / period).round();
        if wraps != 0.0 {
            y -= wraps * period;
        }
        if y <= -0.5 * period {
            y += period;
        }
    }
    (rho, y)
}

/// `a = ξ/|ξ|²` with `ξ = ρe_φ + ke_z`, as `[a_ρ, a_z, a_φ]`.
pub fn reference_field_a(rho: f64, k: f64) -> Result<[f64; 3]> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho = {rho} must be positive")));
    }
    let n = rho * rho + k * k;
    Ok([0.0, k / n, rho / n])
}

/// Raw velocity `[u_ρ, u_z, u_φ]` from the section data at a point with
/// transverse coordinate of sign `y_sign`.
pub fn raw_velocity(k: f64, y_sign: f64, co: &SectionCoefficients) -> [f64; 3] {
    let x = co.x;
    let xk = x * x + k * k;
    let t_y = y_sign * co.g.max(0.0).sqrt();
    [
        t_y / x,
        (k * co.h - x * co.f) / xk,
        (x * co.h + k * co.f) / xk,
    ]
}

fn sign_of(y: f64) -> f64 {
    if y > 0.0 {
        1.0
    } else if y < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Bump `ω` on `[ε, 2ε]` and the accumulated pressure `P(t) = ∫₀ᵗ ω²/(1+k²)`.
#[derive(Debug, Clone)]
pub struct CutoffSpec {
    pub eps: f64,
    k2p1: f64,
    /// `P` at the panel knots `ε + jε/M`.
    table: Vec<f64>,
}

impl CutoffSpec {
    pub fn new(eps: f64, k: f64) -> Result<CutoffSpec> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "eps = {eps} must be positive"
            )));
        }
        let mut spec = CutoffSpec {
            eps,
            k2p1: 1.0 + k * k,
            table: Vec::with_capacity(PRESSURE_PANELS + 1),
        };
        let mut acc = 0.0;
        spec.table.push(0.0);
        for j in 0..PRESSURE_PANELS {
            acc += spec.panel_integral(spec.knot(j), spec.knot(j + 1));
            spec.table.push(acc);
        }
        Ok(spec)
    }

    fn knot(&self, j: usize) -> f64 {
        self.eps * (1.0 + j as f64 / PRESSURE_PANELS as f64)
    }

    fn panel_integral(&self, a: f64, b: f64) -> f64 {
        gauss8().integrate(a, b, |t| {
            let w = self.omega(t);
            w * w
        }) / self.k2p1
    }

    /// `exp(4 − 1/τ − 1/(1−τ))` with `τ = (t − ε)/ε`; peak 1 at `t = 1.5ε`.
    pub fn omega(&self, t: f64) -> f64 {
        let tau = (t - self.eps) / self.eps;
        if !(tau > 0.0 && tau < 1.0) {
            return 0.0;
        }
        (4.0 - 1.0 / tau - 1.0 / (1.0 - tau)).exp()
    }

    pub fn in_support(&self, t: f64) -> bool {
        t > self.eps && t < 2.0 * self.eps
    }

    /// `P(2ε)`, the constant pressure above the window.
    pub fn pressure_total(&self) -> f64 {
        self.table[PRESSURE_PANELS]
    }

    pub fn pressure(&self, t: f64) -> f64 {
        if t <= self.eps {
            return 0.0;
        }
        if t >= 2.0 * self.eps {
            return self.pressure_total();
        }
        let pos = (t - self.eps) / self.eps * PRESSURE_PANELS as f64;
        let j = (pos.floor() as usize).min(PRESSURE_PANELS - 1);
        self.table[j] + self.panel_integral(self.knot(j), t)
    }
}

/// Evaluates one variant of the flow over a shared cross-section map.
#[derive(Debug, Clone)]
pub struct FlowSampler {
    map: Arc<CrossSectionMap>,
    variant: Variant,
    cutoff: Option<CutoffSpec>,
    /// Lower bound on `t` anywhere outside the representable region.
    outside_t: f64,
    t_floor: f64,
}

impl FlowSampler {
    pub fn raw(map: Arc<CrossSectionMap>) -> FlowSampler {
        FlowSampler {
            map,
            variant: Variant::Raw,
            cutoff: None,
            outside_t: f64::NAN,
            t_floor: DEFAULT_T_FLOOR,
        }
    }

    /// Compactly supported variant; checks that `{t ≤ 2ε}` lies inside the
    /// representable region so the zero extension is exact.
    pub fn cutoff(map: Arc<CrossSectionMap>, eps: f64) -> Result<FlowSampler> {
        let spec = CutoffSpec::new(eps, map.k)?;
        let mut outside = map.t_limit;
        for x in [1.0 - map.delta, 1.0 + map.delta] {
            match map.t_min_of(x) {
                Ok(t) => outside = outside.min(t),
                Err(Error::NoBoundaryRoot { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        if !(2.0 * eps < outside) {
            return Err(Error::SupportContainment(format!(
                "window top 2ε = {:e} is not below the region bound t = {outside:e}",
                2.0 * eps
            )));
        }
        Ok(FlowSampler {
            map,
            variant: Variant::Cutoff,
            cutoff: Some(spec),
            outside_t: outside,
            t_floor: DEFAULT_T_FLOOR,
        })
    }

    pub fn beltrami(map: Arc<CrossSectionMap>, t_floor: f64) -> Result<FlowSampler> {
        if !(t_floor > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "t_floor = {t_floor} must be positive"
            )));
        }
        Ok(FlowSampler {
            map,
            variant: Variant::Beltrami,
            cutoff: None,
            outside_t: f64::NAN,
            t_floor,
        })
    }

    /// Builds the map for `config` and the requested variant.
    pub fn from_config(config: &HelixConfig, variant: Variant) -> Result<FlowSampler> {
        config.validate()?;
        let map = Arc::new(CrossSectionMap::new(config)?);
        match variant {
            Variant::Raw => Ok(FlowSampler::raw(map)),
            Variant::Cutoff => FlowSampler::cutoff(map, config.eps),
            Variant::Beltrami => FlowSampler::beltrami(map, DEFAULT_T_FLOOR),
        }
    }

    pub fn map(&self) -> &Arc<CrossSectionMap> {
        &self.map
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn cutoff_spec(&self) -> Option<&CutoffSpec> {
        self.cutoff.as_ref()
    }

    pub fn t_floor(&self) -> f64 {
        self.t_floor
    }

    fn region_slice(&self, x: f64, y: f64) -> Result<XSlice<'_>> {
        if !self.map.in_band(x) {
            return Err(Error::OutsideRegion { x, y });
        }
        match self.map.slice(x) {
            Err(Error::NoBoundaryRoot { .. }) => Err(Error::OutsideRegion { x, y }),
            other => other,
        }
    }

    /// Stream value and section data at a cylindrical point.
    pub fn locate(&self, rho: f64, phi: f64, z: f64) -> Result<(f64, SectionCoefficients)> {
        let (x, y) = helical_coords(rho, phi, z, self.map.k);
        let slice = self.region_slice(x, y)?;
        self.locate_in(&slice, y)
    }

    fn locate_in(&self, slice: &XSlice<'_>, y: f64) -> Result<(f64, SectionCoefficients)> {
        let t = slice.t_from_y(y)?;
        let co = self.map.section_coefficients(slice.x, t)?;
        Ok((sign_of(y), co))
    }

    /// Raw flow at a point of the representable region.
    pub fn sample_raw(&self, rho: f64, phi: f64, z: f64) -> Result<FlowSample> {
        let (x, y) = helical_coords(rho, phi, z, self.map.k);
        let slice = self.region_slice(x, y)?;
        self.raw_in(&slice, rho, phi, z, y)
    }

    fn raw_in(&self, slice: &XSlice<'_>, rho: f64, phi: f64, z: f64, y: f64) -> Result<FlowSample> {
        let (sign, co) = self.locate_in(slice, y)?;
        let [u_rho, u_z, u_phi] = raw_velocity(self.map.k, sign, &co);
        Ok(FlowSample {
            rho,
            phi,
            z,
            u_rho,
            u_z,
            u_phi,
            p: co.t / (1.0 + self.map.k * self.map.k),
            t: co.t,
            in_support: true,
        })
    }

    /// Compactly supported flow; total on any point with `ρ > 0`.
    pub fn sample_cutoff(&self, rho: f64, phi: f64, z: f64) -> Result<FlowSample> {
        let (x, y) = helical_coords(rho, phi, z, self.map.k);
        let slice = match self.region_slice(x, y) {
            Ok(s) => Some(s),
            Err(Error::OutsideRegion { .. }) => None,
            Err(e) => return Err(e),
        };
        self.cutoff_in(slice.as_ref(), rho, phi, z, y)
    }

    fn cutoff_in(
        &self,
        slice: Option<&XSlice<'_>>,
        rho: f64,
        phi: f64,
        z: f64,
        y: f64,
    ) -> Result<FlowSample> {
        let spec = self
            .cutoff
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("sampler has no cutoff window".into()))?;
        let outside =
            || FlowSample::zero(rho, phi, z, spec.pressure_total(), self.outside_t, false);
        let Some(slice) = slice else {
            return Ok(outside());
        };
        let raw = match self.raw_in(slice, rho, phi, z, y) {
            Ok(s) => s,
            Err(Error::OutsideRegion { .. }) => return Ok(outside()),
            Err(e) => return Err(e),
        };
        let t = raw.t;
        let p = spec.pressure(t);
        if !spec.in_support(t) {
            return Ok(FlowSample::zero(rho, phi, z, p, t, false));
        }
        let w = spec.omega(t);
        Ok(FlowSample {
            u_rho: w * raw.u_rho,
            u_z: w * raw.u_z,
            u_phi: w * raw.u_phi,
            p,
            in_support: true,
            ..raw
        })
    }

    /// Beltrami flow; requires `t > t_floor`.
    pub fn sample_beltrami(&self, rho: f64, phi: f64, z: f64) -> Result<BeltramiSample> {
        let (x, y) = helical_coords(rho, phi, z, self.map.k);
        let slice = self.region_slice(x, y)?;
        self.beltrami_in(&slice, rho, phi, z, y)
    }

    fn beltrami_in(
        &self,
        slice: &XSlice<'_>,
        rho: f64,
        phi: f64,
        z: f64,
        y: f64,
    ) -> Result<BeltramiSample> {
        let raw = self.raw_in(slice, rho, phi, z, y)?;
        let t = raw.t;
        if !(t > self.t_floor) {
            return Err(Error::BelowFloor {
                t,
                floor: self.t_floor,
            });
        }
        let co = self.map.section_coefficients(slice.x, t)?;
        let p = raw.p;
        let w = p.powf(-5.0 / 6.0);
        let t56 = t.powf(-5.0 / 6.0);
        Ok(BeltramiSample {
            rho,
            phi,
            z,
            u_rho: w * raw.u_rho,
            u_z: w * raw.u_z,
            u_phi: w * raw.u_phi,
            p: -1.5 * p.powf(-2.0 / 3.0),
            t,
            psi: t.powf(1.0 / 6.0),
            chi: t56 * co.h / 6.0,
            lambda: 5.0 * co.h / (6.0 * t) - co.dh,
        })
    }

    /// The configured variant at one point.
    pub fn sample(&self, rho: f64, phi: f64, z: f64) -> Result<FlowSample> {
        match self.variant {
            Variant::Raw => self.sample_raw(rho, phi, z),
            Variant::Cutoff => self.sample_cutoff(rho, phi, z),
            Variant::Beltrami => Ok(self.sample_beltrami(rho, phi, z)?.to_flow_sample()),
        }
    }

    /// Boundary data for the row `x = ρ`; `None` when the row lies outside
    /// the band and the variant is total there (cutoff).
    pub fn slice_for(&self, rho: f64) -> Result<Option<XSlice<'_>>> {
        match self.region_slice(rho, 0.0) {
            Ok(s) => Ok(Some(s)),
            Err(Error::OutsideRegion { .. }) if self.variant == Variant::Cutoff => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// The configured variant at a point whose row data is `slice`
    /// (as returned by [`FlowSampler::slice_for`] for the same `ρ`).
    pub fn sample_at(
        &self,
        slice: Option<&XSlice<'_>>,
        rho: f64,
        phi: f64,
        z: f64,
    ) -> Result<FlowSample> {
        let (_, y) = helical_coords(rho, phi, z, self.map.k);
        match (self.variant, slice) {
            (Variant::Cutoff, s) => self.cutoff_in(s, rho, phi, z, y),
            (Variant::Raw, Some(s)) => self.raw_in(s, rho, phi, z, y),
            (Variant::Beltrami, Some(s)) => {
                Ok(self.beltrami_in(s, rho, phi, z, y)?.to_flow_sample())
            }
            (_, None) => Err(Error::OutsideRegion { x: rho, y }),
        }
    }

    /// Beltrami sample at a point whose row data is `slice`.
    pub fn beltrami_at(
        &self,
        slice: &XSlice<'_>,
        rho: f64,
        phi: f64,
        z: f64,
    ) -> Result<BeltramiSample> {
        let (_, y) = helical_coords(rho, phi, z, self.map.k);
        self.beltrami_in(slice, rho, phi, z, y)
    }

    /// All samples at fixed `ρ`, sharing one boundary computation.
    pub fn sample_row(&self, rho: f64, points: &[(f64, f64)]) -> Result<Vec<FlowSample>> {
        let slice = self.slice_for(rho)?;
        points
            .iter()
            .map(|&(phi, z)| self.sample_at(slice.as_ref(), rho, phi, z))
            .collect()
    }

    /// Samples every grid point in row-major `(ρ, φ, z)` order.
    pub fn sample_grid(&self, grid: &GridSpec) -> Result<Vec<FlowSample>> {
        let plane: Vec<(f64, f64)> = (0..grid.phi.count)
            .flat_map(|j| (0..grid.z.count).map(move |l| (grid.phi.at(j), grid.z.at(l))))
            .collect();
        let rows: Vec<Result<Vec<FlowSample>>> = (0..grid.rho.count)
            .into_par_iter()
            .map(|i| self.sample_row(grid.rho.at(i), &plane))
            .collect();
        let mut out = Vec::with_capacity(grid.len());
        for row in rows {
            out.extend(row?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Branch;
    use std::sync::OnceLock;

    fn map() -> Arc<CrossSectionMap> {
        static MAP: OnceLock<Arc<CrossSectionMap>> = OnceLock::new();
        MAP.get_or_init(|| {
            let cfg = HelixConfig::new(1.0, Branch::Positive, 1e-3, 1e-10).unwrap();
            Arc::new(CrossSectionMap::new(&cfg).unwrap())
        })
        .clone()
    }

    #[test]
    fn helix_point_is_at_rest() {
        let s = FlowSampler::raw(map());
        let p = s.sample_raw(1.0, 0.0, 0.0).unwrap();
        assert_eq!(
            (p.u_rho, p.u_z, p.u_phi, p.p, p.t),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
        // on the helix away from φ = 0 as well
        let q = s.sample_raw(1.0, 0.3, 0.3).unwrap();
        assert_eq!(q.t, 0.0);
    }

    #[test]
    fn speed_matches_pressure() {
        let s = FlowSampler::raw(map());
        for (rho, z) in [(1.01, 0.004), (0.98, -0.02), (1.03, 0.05), (1.0, 0.01)] {
            let p = s.sample_raw(rho, 0.0, z).unwrap();
            let rel = (p.speed_sq() - 3.0 * p.p).abs() / (3.0 * p.p);
            assert!(rel < 1e-12, "rho={rho} z={z}: {rel:e}");
        }
    }

    #[test]
    fn reflection_in_y() {
        let s = FlowSampler::raw(map());
        let a = s.sample_raw(1.02, 0.0, 0.013).unwrap();
        let b = s.sample_raw(1.02, 0.0, -0.013).unwrap();
        assert_eq!(a.u_rho, -b.u_rho);
        assert_eq!((a.u_z, a.u_phi, a.p), (b.u_z, b.u_phi, b.p));
    }

    #[test]
    fn helical_invariance() {
        let s = FlowSampler::raw(map());
        let a = s.sample_raw(1.01, 0.1, 0.11).unwrap();
        let d = 0.37;
        let b = s.sample_raw(1.01, 0.1 + d, 0.11 + d).unwrap();
        let close = |u: f64, v: f64| (u - v).abs() <= 1e-12 * u.abs().max(1e-12);
        assert!(close(a.u_rho, b.u_rho) && close(a.u_z, b.u_z) && close(a.u_phi, b.u_phi));
        assert!(close(a.t, b.t));
    }

    #[test]
    fn helical_coords_wrap() {
        let (_, y) = helical_coords(1.0, 2.0 * PI, 0.01, 1.0);
        assert!((y - 0.01).abs() < 1e-14);
        assert_eq!(helical_coords(1.0, 0.2, 0.5, 0.0), (1.0, 0.5));
        let (_, y) = helical_coords(1.0, -PI, 0.0, 1.0);
        assert!((y - PI).abs() < 1e-15);
    }

    #[test]
    fn reference_field_values() {
        let a = reference_field_a(1.0, 1.0).unwrap();
        assert_eq!(a, [0.0, 0.5, 0.5]);
        let a = reference_field_a(2.0, 3.0).unwrap();
        assert_eq!(a, [0.0, 3.0 / 13.0, 2.0 / 13.0]);
        assert!(reference_field_a(0.0, 1.0).is_err());
    }

    #[test]
    fn bump_shape() {
        let c = CutoffSpec::new(1e-3, 1.0).unwrap();
        assert_eq!(c.omega(1e-3), 0.0);
        assert_eq!(c.omega(2e-3), 0.0);
        assert_eq!(c.omega(5e-4), 0.0);
        assert!((c.omega(1.5e-3) - 1.0).abs() < 1e-15);
        assert!(c.omega(1.2e-3) > 0.0 && c.omega(1.2e-3) < 1.0);
        assert!((c.omega(1.2e-3) - c.omega(1.8e-3)).abs() < 1e-14);
    }

    #[test]
    fn pressure_accumulates() {
        let c = CutoffSpec::new(1e-3, 1.0).unwrap();
        assert_eq!(c.pressure(0.0), 0.0);
        assert_eq!(c.pressure(1e-3), 0.0);
        assert_eq!(c.pressure(3e-3), c.pressure_total());
        // reference integral with many more nodes
        let fine = crate::quadrature::GaussLegendre::new(64);
        let mut reference = 0.0;
        let n = 64;
        for i in 0..n {
            let a = 1e-3 * (1.0 + i as f64 / n as f64);
            let b = 1e-3 * (1.0 + (i + 1) as f64 / n as f64);
            reference += fine.integrate(a, b, |t| c.omega(t).powi(2)) / 2.0;
        }
        assert!((c.pressure_total() - reference).abs() < 1e-14 * reference);
        let mut prev = 0.0;
        for i in 1..200 {
            let p = c.pressure(1e-3 * (1.0 + i as f64 / 200.0));
            assert!(p >= prev);
            prev = p;
        }
        // P' = ω²/(1+k²)
        let t = 1.37e-3;
        let h = 1e-8;
        let d = (c.pressure(t + h) - c.pressure(t - h)) / (2.0 * h);
        assert!((d - c.omega(t).powi(2) / 2.0).abs() < 1e-6);
    }

    #[test]
    fn cutoff_composes_with_raw() {
        let m = map();
        let raw = FlowSampler::raw(m.clone());
        let cut = FlowSampler::cutoff(m.clone(), 1e-3).unwrap();
        let slice = m.slice(1.0).unwrap();
        let y = slice.y_from_t(1.5e-3).unwrap();
        let r = raw.sample_raw(1.0, 0.0, y).unwrap();
        let c = cut.sample_cutoff(1.0, 0.0, y).unwrap();
        let w = cut.cutoff_spec().unwrap().omega(r.t);
        assert!(c.in_support);
        assert_eq!(
            [c.u_rho, c.u_z, c.u_phi],
            [w * r.u_rho, w * r.u_z, w * r.u_phi]
        );
        let below = cut.sample_cutoff(1.0, 0.0, 0.5 * y).unwrap();
        assert!(!below.in_support && below.speed_sq() == 0.0 && below.p == 0.0);
        let above = cut.sample_cutoff(1.0, 0.0, 3.0 * y).unwrap();
        assert!(!above.in_support && above.speed_sq() == 0.0);
        assert_eq!(above.p, cut.cutoff_spec().unwrap().pressure_total());
        let far = cut.sample_cutoff(1.5, 0.0, 0.0).unwrap();
        assert!(!far.in_support && far.speed_sq() == 0.0 && far.t > 2e-3);
    }

    #[test]
    fn cutoff_rejects_wide_window() {
        assert!(matches!(
            FlowSampler::cutoff(map(), 0.05),
            Err(Error::SupportContainment(_))
        ));
    }

    #[test]
    fn beltrami_bernoulli() {
        let b = FlowSampler::beltrami(map(), DEFAULT_T_FLOOR).unwrap();
        let s = b.sample_beltrami(1.02, 0.0, 0.03).unwrap();
        let speed = s.u_rho.powi(2) + s.u_z.powi(2) + s.u_phi.powi(2);
        assert!((0.5 * speed + s.p).abs() < 1e-12 * s.p.abs());
        assert_eq!(s.psi, s.t.powf(1.0 / 6.0));
        assert!(s.lambda.is_finite());
        assert!(matches!(
            b.sample_beltrami(1.0, 0.0, 0.0),
            Err(Error::BelowFloor { .. })
        ));
    }

    #[test]
    fn outside_region_is_an_error_for_raw() {
        let s = FlowSampler::raw(map());
        assert!(matches!(
            s.sample_raw(1.5, 0.0, 0.0),
            Err(Error::OutsideRegion { .. })
        ));
    }
}
