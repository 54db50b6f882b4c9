//! Cross-section geometry in the helical variables `x = ρ`, `y = z − kφ`.
//!
//! With `t_x = F(x, t)` and `t_y² = G(x, t)`:
//!
//! ```text
//! F = kh/x + (x²+k²)(x²−c) / (2x(1+k²))
//! G = x²·(3t/(1+k²) − (F²+h²)/(x²+k²))
//! ```
//!
//! The admissible region at fixed `x` is `t ≥ t_min(x)`, where `t_min` is the
//! first zero of `G`. The transverse coordinate is
//! `y(x, t) = ∫_{t_min}^{t} dτ/√G(x, τ)` and `t(x, y)` is its even inverse.

use std::sync::Arc;

use crate::config::{Branch, HelixConfig};
use crate::error::{Error, Result};
use crate::profile::{Profile, ProfileState};
use crate::quadrature::gauss20;
use crate::roots::brent;

/// Default half-width `Δ` of the representable band `|x − 1| ≤ Δ`.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Profile continuation target used when a map builds its own profile.
pub const DEFAULT_PROFILE_T_MAX: f64 = 0.25;

/// Fraction of the branch's `t_cap` treated as representable.
const T_LIMIT_FRACTION: f64 = 0.98;

/// Relative distance `σ²/t_min` below which `G` is linearized at the boundary.
const LINEAR_ZONE: f64 = 1e-9;

/// Largest quadrature panel measured in `σ = √(t − t_min)`.
const PANEL_WIDTH: f64 = 0.02;

/// `F`, `G` and their partial derivatives at one `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionCoefficients {
    pub x: f64,
    pub t: f64,
    pub h: f64,
    pub c: f64,
    pub s_fn: f64,
    /// `dh/dt`, `dc/dt` (NaN at `t = 0`).
    pub dh: f64,
    pub dc: f64,
    pub f: f64,
    pub g: f64,
    pub f_x: f64,
    pub f_t: f64,
    pub g_x: f64,
    pub g_t: f64,
}

/// `F`, `G` and derivatives from profile values; valid for any `(h, c)`.
pub fn coefficients_from_state(k: f64, x: f64, st: &ProfileState) -> SectionCoefficients {
    let k2 = k * k;
    let k2p1 = 1.0 + k2;
    let xk = x * x + k2;
    let ProfileState {
        t,
        h,
        c,
        s_fn,
        dh,
        dc,
    } = *st;
    let f = k * h / x + xk * (x * x - c) / (2.0 * x * k2p1);
    let bracket = 3.0 * t / k2p1 - (f * f + h * h) / xk;
    let g = x * x * bracket;
    let f_x = -k * h / (x * x) + (3.0 * x * x + k2 - c + k2 * c / (x * x)) / (2.0 * k2p1);
    let f_t = k * dh / x - xk * dc / (2.0 * x * k2p1);
    let g_t = x * x * (3.0 / k2p1 - 2.0 * (f * f_t + h * dh) / xk);
    let g_x =
        2.0 * x * bracket + x * x * (-2.0 * f * f_x / xk + 2.0 * x * (f * f + h * h) / (xk * xk));
    SectionCoefficients {
        x,
        t,
        h,
        c,
        s_fn,
        dh,
        dc,
        f,
        g,
        f_x,
        f_t,
        g_x,
        g_t,
    }
}

fn g_only(k: f64, x: f64, t: f64, h: f64, c: f64) -> f64 {
    let k2 = k * k;
    let xk = x * x + k2;
    let f = k * h / x + xk * (x * x - c) / (2.0 * x * (1.0 + k2));
    x * x * (3.0 * t / (1.0 + k2) - (f * f + h * h) / xk)
}

/// Left side of the polynomial form of `G ≥ 0`:
/// `x⁶ + (k²−2c)x⁴ + [4(1+k²)(kh−3t) + c² − 2k²c]x² + 4(1+k²)(hk²−kc+h)h + k²c² ≤ 0`.
pub fn boundary_polynomial(k: f64, x: f64, t: f64, h: f64, c: f64) -> f64 {
    let k2 = k * k;
    let x2 = x * x;
    x2 * x2 * x2
        + (k2 - 2.0 * c) * x2 * x2
        + (4.0 * (1.0 + k2) * (k * h - 3.0 * t) + c * c - 2.0 * k2 * c) * x2
        + 4.0 * (1.0 + k2) * (h * k2 - k * c + h) * h
        + k2 * c * c
}

/// Cross-section of one branch of the flow.
#[derive(Debug, Clone)]
pub struct CrossSectionMap {
    pub k: f64,
    pub branch: Branch,
    /// Half-width of the representable band in `x`.
    pub delta: f64,
    /// Largest representable stream value.
    pub t_limit: f64,
    profile: Arc<Profile>,
}

impl CrossSectionMap {
    /// Builds the profile (both branches) and the map for `config.branch`.
    pub fn new(config: &HelixConfig) -> Result<CrossSectionMap> {
        let profile = Arc::new(Profile::build(config, DEFAULT_PROFILE_T_MAX)?);
        Ok(CrossSectionMap::from_profile(
            profile,
            config.branch,
            DEFAULT_DELTA,
        ))
    }

    pub fn from_profile(profile: Arc<Profile>, branch: Branch, delta: f64) -> CrossSectionMap {
        let t_limit = T_LIMIT_FRACTION * profile.t_cap(branch);
        CrossSectionMap {
            k: profile.k,
            branch,
            delta,
            t_limit,
            profile,
        }
    }

    /// Map of the opposite branch sharing the same profile.
    pub fn mirror(&self) -> CrossSectionMap {
        CrossSectionMap::from_profile(self.profile.clone(), self.branch.opposite(), self.delta)
    }

    pub fn profile(&self) -> &Arc<Profile> {
        &self.profile
    }

    pub fn in_band(&self, x: f64) -> bool {
        (x - 1.0).abs() <= self.delta
    }

    fn values(&self, t: f64) -> Result<(f64, f64)> {
        if t > self.t_limit {
            return Err(Error::OutOfRange {
                t,
                lo: 0.0,
                hi: self.t_limit,
            });
        }
        self.profile.values(t, self.branch)
    }

    /// `G(x, t)` alone.
    pub fn g(&self, x: f64, t: f64) -> Result<f64> {
        let (h, c) = self.values(t)?;
        Ok(g_only(self.k, x, t, h, c))
    }

    /// `F`, `G` and derivatives at `(x, t)` on this branch.
    pub fn section_coefficients(&self, x: f64, t: f64) -> Result<SectionCoefficients> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!(
                "radial variable x = {x} must be positive"
            )));
        }
        if t > self.t_limit {
            return Err(Error::OutOfRange {
                t,
                lo: 0.0,
                hi: self.t_limit,
            });
        }
        let st = self.profile.state(t, self.branch)?;
        Ok(coefficients_from_state(self.k, x, &st))
    }

    /// Smallest `t ≥ 0` with `G(x, t) = 0` and `∂G/∂t > 0`.
    pub fn t_min_of(&self, x: f64) -> Result<f64> {
        Ok(self.slice(x)?.t_min)
    }

    pub fn y_from_t(&self, x: f64, t: f64) -> Result<f64> {
        self.slice(x)?.y_from_t(t)
    }

    pub fn t_from_y(&self, x: f64, y: f64) -> Result<f64> {
        self.slice(x)?.t_from_y(y)
    }

    /// Precomputes the boundary data for one value of `x`.
    pub fn slice(&self, x: f64) -> Result<XSlice<'_>> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!(
                "radial variable x = {x} must be positive"
            )));
        }
        let (t_min, g_t_min) = if x == 1.0 {
            (0.0, f64::NAN)
        } else {
            let t_min = self.boundary_root(x)?;
            let g_t = self.section_coefficients(x, t_min)?.g_t;
            if !(g_t > 0.0) {
                return Err(Error::NonSimpleBoundaryZero { x, slope: g_t });
            }
            (t_min, g_t)
        };
        let mut slice = XSlice {
            map: self,
            x,
            t_min,
            a: t_min.sqrt(),
            g_t_min,
            sigma_max: (self.t_limit - t_min).max(0.0).sqrt(),
            y_max: 0.0,
        };
        slice.y_max = slice.y_of_sigma(slice.sigma_max)?;
        Ok(slice)
    }

    fn boundary_root(&self, x: f64) -> Result<f64> {
        let k = self.k;
        let g_of_sigma = |sigma: f64| -> f64 {
            let t = sigma * sigma;
            match self.values(t) {
                Ok((h, c)) => g_only(k, x, t, h, c),
                Err(_) => f64::NAN,
            }
        };
        let sigma_cap = self.t_limit.sqrt();
        let guess = (x - 1.0).abs() / std::f64::consts::SQRT_2;
        const STEPS: [f64; 16] = [
            0.5, 0.7, 0.85, 1.0, 1.15, 1.3, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0,
        ];
        let mut lo = 0.0;
        for m in STEPS {
            let hi = (guess * m).min(sigma_cap);
            let g = g_of_sigma(hi);
            if g.is_nan() {
                break;
            }
            if g >= 0.0 {
                let root = brent(g_of_sigma, lo, hi, 0.0).ok_or(Error::NoBoundaryRoot { x })?;
                return Ok(root * root);
            }
            lo = hi;
            if hi >= sigma_cap {
                break;
            }
        }
        Err(Error::NoBoundaryRoot { x })
    }
}

/// Boundary data at fixed `x`, reused across many `y`/`t` conversions.
#[derive(Debug, Clone, Copy)]
pub struct XSlice<'a> {
    map: &'a CrossSectionMap,
    pub x: f64,
    pub t_min: f64,
    /// `√t_min`.
    pub a: f64,
    /// `∂G/∂t` at the boundary (NaN at `x = 1`).
    pub g_t_min: f64,
    sigma_max: f64,
    /// Largest `|y|` represented at this `x`.
    pub y_max: f64,
}

impl XSlice<'_> {
    pub fn map(&self) -> &CrossSectionMap {
        self.map
    }

    fn integrand_at_tau(&self, tau: f64) -> Result<f64> {
        let g = self.map.g(self.x, tau)?;
        if !(g > 0.0) {
            return Err(Error::Domain(format!(
                "G(x = {}, t = {tau:e}) = {g:e} is not positive inside the region",
                self.x
            )));
        }
        Ok(1.0 / g.sqrt())
    }

    /// `2σ/√G(t_min + σ²)`. Within a relative `LINEAR_ZONE` of the
    /// boundary `G` is below its own rounding noise, and the linear model
    /// `G ≈ G_t(t_min)σ²` is used instead.
    fn integrand_at_sigma(&self, sigma: f64) -> Result<f64> {
        if self.a > 0.0 && sigma * sigma <= LINEAR_ZONE * self.t_min && self.g_t_min > 0.0 {
            return Ok(2.0 / self.g_t_min.sqrt());
        }
        Ok(2.0 * sigma * self.integrand_at_tau(self.t_min + sigma * sigma)?)
    }

    /// `∫_{t_min}^{t_min+σ_e²} dτ/√G` in regularized variables.
    fn y_of_sigma(&self, sigma_e: f64) -> Result<f64> {
        if sigma_e == 0.0 {
            return Ok(0.0);
        }
        let rule = gauss20();
        let mut total = 0.0;
        if self.a == 0.0 {
            // τ = σ²: integrand 2σ/√G(σ²) is finite at σ = 0.
            let n = (sigma_e / PANEL_WIDTH).ceil().max(1.0) as usize;
            for i in 0..n {
                let lo = sigma_e * i as f64 / n as f64;
                let hi = sigma_e * (i + 1) as f64 / n as f64;
                total += rule.try_integrate(lo, hi, |sig| self.integrand_at_sigma(sig))?;
            }
        } else {
            // τ = t_min + σ², σ = a·sinh w, so √τ = a·cosh w.
            let a = self.a;
            let w_end = (sigma_e / a).asinh();
            let mut w = 0.0;
            while w < w_end {
                let dw = (PANEL_WIDTH / (a * w.cosh())).min(1.0);
                let w1 = if w + dw >= w_end { w_end } else { w + dw };
                total += rule.try_integrate(w, w1, |w| {
                    let (sh, ch) = (w.sinh(), w.cosh());
                    let sigma = a * sh;
                    Ok::<_, Error>(a * ch * self.integrand_at_sigma(sigma)?)
                })?;
                w = w1;
            }
        }
        Ok(total)
    }

    /// `∫ dτ/√G` between `t_min + σ₀²` and `t_min + σ₁²` on one panel.
    fn sigma_panel(&self, s0: f64, s1: f64) -> Result<f64> {
        gauss20().try_integrate(s0, s1, |sig| self.integrand_at_sigma(sig))
    }

    /// `y(x, t) ≥ 0`, measured from the boundary `t = t_min(x)`.
    pub fn y_from_t(&self, t: f64) -> Result<f64> {
        if t < self.t_min {
            return Err(Error::Domain(format!(
                "t = {t:e} below t_min({}) = {:e}",
                self.x, self.t_min
            )));
        }
        self.y_of_sigma((t - self.t_min).sqrt())
    }

    /// Inverse of [`XSlice::y_from_t`], even in `y`.
    pub fn t_from_y(&self, y: f64) -> Result<f64> {
        let target = y.abs();
        if target == 0.0 {
            return Ok(self.t_min);
        }
        let sigma_max = self.sigma_max;
        if target > self.y_max {
            return Err(Error::OutsideRegion { x: self.x, y });
        }
        let k2p1 = 1.0 + self.map.k * self.map.k;
        let q = 0.5 * (self.x - 1.0).powi(2) + target * target / (2.0 * k2p1);
        let mut sigma = if q > self.t_min {
            (q - self.t_min).sqrt()
        } else if self.g_t_min.is_finite() {
            0.5 * target * self.g_t_min.sqrt()
        } else {
            target / (2.0 * k2p1).sqrt()
        };
        sigma = sigma.clamp(f64::MIN_POSITIVE, sigma_max);
        let mut y_cur = self.y_of_sigma(sigma)?;
        let mut y_is_full = true;
        let (mut lo, mut hi) = (0.0f64, sigma_max);
        for _ in 0..60 {
            let value = y_cur - target;
            if value == 0.0 {
                break;
            }
            if value < 0.0 {
                lo = lo.max(sigma);
            } else {
                hi = hi.min(sigma);
            }
            let slope = self.integrand_at_sigma(sigma).unwrap_or(f64::NAN);
            let mut next = sigma - value / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let step = (next - sigma).abs();
            if step <= 1e-9 * sigma && y_is_full {
                // one more Newton correction is below the quadrature noise
                sigma = next;
                break;
            }
            // Moderate moves only add the local panel (the nearest
            // singularity of the integrand sits at distance √(σ² + a²)).
            // The profile interpolant is piecewise, so near convergence the
            // full rule is used to keep t(y) consistent with y(t).
            y_is_full = step <= 1e-7 * sigma || step > 0.25 * sigma.hypot(self.a);
            y_cur = if y_is_full {
                self.y_of_sigma(next)?
            } else {
                y_cur + self.sigma_panel(sigma, next)?
            };
            sigma = next;
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        Ok(self.t_min + sigma * sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn map_k1() -> &'static CrossSectionMap {
        static MAP: OnceLock<CrossSectionMap> = OnceLock::new();
        MAP.get_or_init(|| {
            let cfg = HelixConfig::new(1.0, Branch::Positive, 1e-3, 1e-12).unwrap();
            CrossSectionMap::new(&cfg).unwrap()
        })
    }

    #[test]
    fn origin_coefficients_vanish() {
        let m = map_k1();
        let c = m.section_coefficients(1.0, 0.0).unwrap();
        assert_eq!((c.f, c.g, c.s_fn), (0.0, 0.0, 0.0));
    }

    #[test]
    fn zero_t_coefficients() {
        let m = map_k1();
        let k = 1.0;
        for x in [0.9, 0.97, 1.02, 1.1] {
            let c = m.section_coefficients(x, 0.0).unwrap();
            let f = (x * x + k * k) * (x * x - 1.0) / (2.0 * x * (1.0 + k * k));
            assert!((c.f - f).abs() < 1e-15);
            let g = -x * x * f * f / (x * x + k * k);
            assert!((c.g - g).abs() < 1e-16);
            assert!(c.g <= 0.0);
        }
    }

    #[test]
    fn rejects_nonpositive_x() {
        let m = map_k1();
        assert!(matches!(
            m.section_coefficients(0.0, 1e-3),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            m.section_coefficients(-1.0, 1e-3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn coefficients_at_sample_point() {
        // h, c from the k = 1 series at s = 0.1 substituted by hand
        let m = map_k1();
        let c = m.section_coefficients(1.0, 0.01).unwrap();
        let h = c.h;
        let cc = c.c;
        assert!((h - 0.11249).abs() < 1e-4 && (cc - 1.19941).abs() < 1e-4);
        let f = h + (1.0 - cc) / 2.0;
        let g = 3.0 * 0.01 / 2.0 - (f * f + h * h) / 2.0;
        assert!((c.f - f).abs() < 1e-15 && (c.g - g).abs() < 1e-15);
        assert!((c.f - 0.0128).abs() < 5e-5 && (c.g - 0.0086).abs() < 5e-5);
    }

    #[test]
    fn t_min_at_helix_is_zero() {
        assert_eq!(map_k1().t_min_of(1.0).unwrap(), 0.0);
    }

    #[test]
    fn t_min_is_half_x_squared() {
        let m = map_k1();
        for dx in [1e-3, -1e-3, 3e-3, -5e-3] {
            let t = m.t_min_of(1.0 + dx).unwrap();
            let lead = 0.5 * dx * dx;
            // t_min = X²/2 + O(|X|³) on a single branch
            assert!(
                (t - lead).abs() < 5.0 * dx.abs().powi(3),
                "X={dx}: {t} vs {lead}"
            );
        }
    }

    #[test]
    fn t_min_is_a_simple_boundary_root() {
        let m = map_k1();
        for x in [0.92, 0.97, 0.999, 1.001, 1.04, 1.09] {
            let s = m.slice(x).unwrap();
            let g0 = m.g(x, s.t_min).unwrap();
            let scale = s.t_min.max(1e-300);
            assert!(g0.abs() < 1e-13 * scale, "x={x}: G(t_min)={g0}");
            let dt = 1e-6 * s.t_min;
            assert!(m.g(x, s.t_min + dt).unwrap() > 0.0);
            assert!(s.g_t_min > 0.0);
        }
    }

    #[test]
    fn y_vanishes_on_boundary_and_increases() {
        let m = map_k1();
        for x in [0.95, 1.0, 1.03] {
            let s = m.slice(x).unwrap();
            assert_eq!(s.y_from_t(s.t_min).unwrap(), 0.0);
            let mut prev = 0.0;
            for i in 1..10 {
                let t = s.t_min + 1e-4 * i as f64;
                let y = s.y_from_t(t).unwrap();
                assert!(y > prev);
                prev = y;
            }
            assert!(s.y_from_t(s.t_min * 0.5 - 1e-9).is_err());
        }
    }

    #[test]
    fn y_near_helix_matches_asymptotic() {
        let m = map_k1();
        let s = m.slice(1.0).unwrap();
        for t in [1e-8, 1e-6] {
            let y = s.y_from_t(t).unwrap();
            let lead = (2.0 * 2.0 * t).sqrt();
            assert!(
                ((y - lead) / lead).abs() < 10.0 * t.sqrt(),
                "t={t}: {y} vs {lead}"
            );
        }
    }

    #[test]
    fn t_from_y_round_trip_and_evenness() {
        let m = map_k1();
        for x in [0.93, 0.99, 1.0, 1.0004, 1.06] {
            let s = m.slice(x).unwrap();
            for t in [s.t_min + 1e-7, s.t_min + 1e-4, s.t_min + 3e-3] {
                let y = s.y_from_t(t).unwrap();
                let back = s.t_from_y(y).unwrap();
                // F carries the cancellation in x² − c, so G is only good to ~1e-12
                assert!((back - t).abs() <= 1e-10 * t, "x={x} t={t} back={back}");
                assert_eq!(s.t_from_y(-y).unwrap(), back);
            }
            assert_eq!(s.t_from_y(0.0).unwrap(), s.t_min);
        }
    }

    #[test]
    fn t_from_y_out_of_range() {
        let m = map_k1();
        assert!(matches!(
            m.t_from_y(1.0, 10.0),
            Err(Error::OutsideRegion { .. })
        ));
    }

    #[test]
    fn boundary_polynomial_factors_at_zero_t() {
        for k in [0.0, 0.7, 1.0, 2.0] {
            for x in [0.8, 0.95, 1.0, 1.2] {
                let lhs = boundary_polynomial(k, x, 0.0, 0.0, 1.0);
                let rhs = (x * x - 1.0f64).powi(2) * (x * x + k * k);
                assert!((lhs - rhs).abs() < 1e-14, "k={k} x={x}");
            }
        }
    }
}
