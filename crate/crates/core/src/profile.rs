//! Numerical continuation of the profile functions `h(t)`, `c(t)`.
//!
//! ```text
//! dh/dt = [(k²+c)S + 6t(1+k²)(kh+6t)] / [2(1+k²)(hS + 18kt²)]
//! dc/dt = [kS + 6th(1+k²)] / (hS + 18kt²)
//! S     = h²(1+k²) − 3t(c+k²)
//! ```
//!
//! The system is singular at `t = 0`, so integration starts from series data
//! at a handoff point `t₀ = s₀²` and proceeds until the requested endpoint or
//! until the denominator collapses.

use serde::{Deserialize, Serialize};

use crate::config::{Branch, HelixConfig};
use crate::error::{Error, Result};
use crate::rk::{self, DenseStep, Outcome, StepControl};
use crate::series::{expand_profile_series, SeriesPair, DEFAULT_ORDER};

/// Default `|s₀|` for the series/ODE handoff.
pub const DEFAULT_HANDOFF: f64 = 1e-3;

/// Steps are capped at this multiple of `t`: the solution is singular at
/// `t = 0`, and longer steps leave the radius in which the embedded error
/// estimate means anything.
pub const MAX_STEP_RATIO: f64 = 0.1;

/// Integration stops once `|hS + 18kt²|` drops below this fraction of
/// `(1+k²)t^{3/2}`, the size of the denominator near the origin.
pub const DENOMINATOR_GUARD: f64 = 1e-3;

/// `S = h²(1+k²) − 3t(c+k²)`.
pub fn s_function(k: f64, t: f64, h: f64, c: f64) -> f64 {
    h * h * (1.0 + k * k) - 3.0 * t * (c + k * k)
}

/// `hS + 18kt²`.
pub fn denominator(k: f64, t: f64, h: f64, c: f64) -> f64 {
    h * s_function(k, t, h, c) + 18.0 * k * t * t
}

/// Right-hand side `(dh/dt, dc/dt)`; `None` where the denominator vanishes.
pub fn profile_rhs(k: f64, t: f64, h: f64, c: f64) -> Option<(f64, f64)> {
    let k2p1 = 1.0 + k * k;
    let s = s_function(k, t, h, c);
    let d = h * s + 18.0 * k * t * t;
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let dh = ((k * k + c) * s + 6.0 * t * k2p1 * (k * h + 6.0 * t)) / (2.0 * k2p1 * d);
    let dc = (k * s + 6.0 * t * h * k2p1) / d;
    Some((dh, dc))
}

fn guard_ok(k: f64, t: f64, h: f64, c: f64) -> bool {
    let scale = (1.0 + k * k) * t.powf(1.5);
    denominator(k, t, h, c).abs() > DENOMINATOR_GUARD * scale
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileNode {
    pub t: f64,
    pub h: f64,
    pub c: f64,
    pub dh: f64,
    pub dc: f64,
}

/// Profile functions and their `t`-derivatives at one stream value.
/// At `t = 0` the derivatives are infinite and reported as NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileState {
    pub t: f64,
    pub h: f64,
    pub c: f64,
    pub s_fn: f64,
    pub dh: f64,
    pub dc: f64,
}

impl ProfileState {
    fn from_values(k: f64, t: f64, h: f64, c: f64) -> ProfileState {
        let (dh, dc) = if t > 0.0 {
            profile_rhs(k, t, h, c).unwrap_or((f64::NAN, f64::NAN))
        } else {
            (f64::NAN, f64::NAN)
        };
        ProfileState {
            t,
            h,
            c,
            s_fn: s_function(k, t, h, c),
            dh,
            dc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// The requested endpoint was reached.
    Reached,
    /// `|hS + 18kt²|` fell below the guard.
    Denominator,
    StepUnderflow,
    MaxSteps,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Reached => "reached requested t_max",
            StopReason::Denominator => "denominator hS + 18kt^2 approached zero",
            StopReason::StepUnderflow => "step size underflow",
            StopReason::MaxSteps => "step budget exhausted",
        })
    }
}

/// Continued solution on `[t_start, t_cap]` with dense output.
#[derive(Debug, Clone)]
pub struct ProfileCurve {
    pub k: f64,
    pub branch: Branch,
    pub t_start: f64,
    pub t_cap: f64,
    pub tol: f64,
    pub stop: StopReason,
    pub nodes: Vec<ProfileNode>,
    steps: Vec<DenseStep<2>>,
}

/// Integrates the profile equations from series data at `s0` toward `t_max`.
pub fn continue_profile(
    config: &HelixConfig,
    series: &SeriesPair<f64>,
    s0: f64,
    t_max: f64,
) -> Result<ProfileCurve> {
    config.validate()?;
    if s0 == 0.0 || !s0.is_finite() {
        return Err(Error::InvalidConfig(
            "handoff abscissa s0 must be nonzero".into(),
        ));
    }
    if Branch::of(s0) != config.branch {
        return Err(Error::InvalidConfig(format!(
            "sign of s0 = {s0} disagrees with branch {}",
            config.branch
        )));
    }
    if series.order() < 4 {
        return Err(Error::InvalidConfig(format!(
            "series order {} too low for handoff (need >= 4)",
            series.order()
        )));
    }
    if (series.k - config.k).abs() > 1e-12 * (1.0 + config.k) {
        return Err(Error::InvalidConfig(format!(
            "series slope {} differs from config slope {}",
            series.k, config.k
        )));
    }
    let k = config.k;
    let t0 = s0 * s0;
    let v = series.eval(s0);
    if !guard_ok(k, t0, v.h, v.c) {
        return Err(Error::HandoffTooClose {
            t: t0,
            denominator: denominator(k, t0, v.h, v.c),
        });
    }
    if !(t_max >= t0) {
        return Err(Error::EmptyInterval { t_start: t0, t_max });
    }

    let node = |t: f64, y: [f64; 2]| {
        let (dh, dc) = profile_rhs(k, t, y[0], y[1]).unwrap_or((f64::NAN, f64::NAN));
        ProfileNode {
            t,
            h: y[0],
            c: y[1],
            dh,
            dc,
        }
    };

    let run = rk::integrate(
        |t, y: &[f64; 2]| {
            let (dh, dc) = profile_rhs(k, t, y[0], y[1])?;
            (dh.is_finite() && dc.is_finite()).then_some([dh, dc])
        },
        t0,
        [v.h, v.c],
        t_max,
        StepControl {
            singularity: Some(0.0),
            max_step_ratio: MAX_STEP_RATIO,
            ..StepControl::with_tol(config.tol)
        },
        |t, y| guard_ok(k, t, y[0], y[1]),
    );

    let mut nodes = Vec::with_capacity(run.steps.len() + 1);
    nodes.push(node(t0, [v.h, v.c]));
    for step in &run.steps {
        let y = step.eval(step.t1());
        nodes.push(node(step.t1(), y));
    }
    let stop = match run.outcome {
        Outcome::Completed => StopReason::Reached,
        Outcome::Rejected => StopReason::Denominator,
        Outcome::StepUnderflow => {
            if guard_ok(k, run.t_end, run.y_end[0], run.y_end[1]) {
                StopReason::StepUnderflow
            } else {
                StopReason::Denominator
            }
        }
        Outcome::MaxSteps => StopReason::MaxSteps,
    };
    Ok(ProfileCurve {
        k,
        branch: config.branch,
        t_start: t0,
        t_cap: nodes.last().map(|n| n.t).unwrap_or(t0),
        tol: config.tol,
        stop,
        nodes,
        steps: run.steps,
    })
}

impl ProfileCurve {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t <= self.t_cap
    }

    /// Dense evaluation; derivatives come from the right-hand side at the
    /// interpolated state.
    pub fn at(&self, t: f64) -> Result<ProfileState> {
        if !self.contains(t) {
            return Err(Error::OutOfRange {
                t,
                lo: self.t_start,
                hi: self.t_cap,
            });
        }
        let idx = self.nodes.partition_point(|n| n.t < t);
        if let Some(n) = self.nodes.get(idx) {
            if n.t == t {
                return Ok(ProfileState {
                    t,
                    h: n.h,
                    c: n.c,
                    s_fn: s_function(self.k, t, n.h, n.c),
                    dh: n.dh,
                    dc: n.dc,
                });
            }
        }
        // nodes[idx - 1].t < t < nodes[idx].t, covered by steps[idx - 1]
        let step = &self.steps[idx - 1];
        let y = step.eval(t);
        Ok(ProfileState::from_values(self.k, t, y[0], y[1]))
    }

    /// `(h, c)` without the derivative evaluation.
    pub fn values(&self, t: f64) -> Result<(f64, f64)> {
        if !self.contains(t) {
            return Err(Error::OutOfRange {
                t,
                lo: self.t_start,
                hi: self.t_cap,
            });
        }
        let idx = self.nodes.partition_point(|n| n.t < t);
        if let Some(n) = self.nodes.get(idx) {
            if n.t == t {
                return Ok((n.h, n.c));
            }
        }
        let y = self.steps[idx - 1].eval(t);
        Ok((y[0], y[1]))
    }

    /// Largest residual of the profile equations at the stored nodes.
    pub fn node_residual(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| match profile_rhs(self.k, n.t, n.h, n.c) {
                Some((dh, dc)) => (dh - n.dh).abs().max((dc - n.dc).abs()),
                None => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }
}

/// `profile_at` under its descriptive name.
pub fn profile_at(curve: &ProfileCurve, t: f64) -> Result<ProfileState> {
    curve.at(t)
}

/// Profile functions on both branches: the series below the handoff point,
/// the continued curves above it.
#[derive(Debug, Clone)]
pub struct Profile {
    pub k: f64,
    pub series: SeriesPair<f64>,
    /// `|s₀|`; the series is used for `|s| < s0`.
    pub s0: f64,
    positive: ProfileCurve,
    negative: ProfileCurve,
}

impl Profile {
    /// Default order and handoff, both branches continued to `t_max`.
    pub fn build(config: &HelixConfig, t_max: f64) -> Result<Profile> {
        Profile::with_options(config, DEFAULT_ORDER, DEFAULT_HANDOFF, t_max)
    }

    pub fn with_options(
        config: &HelixConfig,
        order: usize,
        s0: f64,
        t_max: f64,
    ) -> Result<Profile> {
        let s0 = s0.abs();
        let series = expand_profile_series(config.k, order)?;
        let positive = continue_profile(&config.with_branch(Branch::Positive), &series, s0, t_max)?;
        let negative =
            continue_profile(&config.with_branch(Branch::Negative), &series, -s0, t_max)?;
        Ok(Profile {
            k: config.k,
            series,
            s0,
            positive,
            negative,
        })
    }

    pub fn curve(&self, branch: Branch) -> &ProfileCurve {
        match branch {
            Branch::Positive => &self.positive,
            Branch::Negative => &self.negative,
        }
    }

    pub fn t_cap(&self, branch: Branch) -> f64 {
        self.curve(branch).t_cap
    }

    /// State at stream value `t ≥ 0` on the given branch.
    pub fn state(&self, t: f64, branch: Branch) -> Result<ProfileState> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("stream value t = {t} is negative")));
        }
        let s = branch.sign() * t.sqrt();
        if s.abs() < self.s0 {
            let v = self.series.eval(s);
            Ok(ProfileState::from_values(self.k, t, v.h, v.c))
        } else {
            self.curve(branch).at(t)
        }
    }

    /// `(h, c)` at `t ≥ 0` without derivatives.
    pub fn values(&self, t: f64, branch: Branch) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("stream value t = {t} is negative")));
        }
        let s = branch.sign() * t.sqrt();
        if s.abs() < self.s0 {
            let v = self.series.eval(s);
            Ok((v.h, v.c))
        } else {
            self.curve(branch).values(t)
        }
    }

    /// State at the signed abscissa `s = ±√t`.
    pub fn state_signed(&self, s: f64) -> Result<ProfileState> {
        self.state(s * s, Branch::of(s))
    }
}

/// `6tc'' + 3t(c')³ − 2c(c')² − 6c'`.
pub fn circle_second_order_residual(t: f64, c: f64, dc: f64, d2c: f64) -> f64 {
    6.0 * t * d2c + 3.0 * t * dc * dc * dc - 2.0 * c * dc * dc - 6.0 * dc
}

/// Residuals of the circle (`k = 0`) reductions at one state:
/// `[second-order equation, dh²/dt reduction, dc/dt reduction]`.
pub fn circle_limit_terms(state: &ProfileState) -> [f64; 3] {
    let ProfileState {
        t, h, c, dh, dc, ..
    } = *state;
    let s = h * h - 3.0 * t * c;
    // c' = 6t/S along the solution, so c'' = 6/S − 6tS'/S²
    let ds = 2.0 * h * dh - 3.0 * c - 3.0 * t * dc;
    let d2c = 6.0 / s - 6.0 * t * ds / (s * s);
    let second = circle_second_order_residual(t, c, dc, d2c);
    let dh2 = (2.0 * h * dh - (c + 36.0 * t * t / s)).abs();
    let dcr = (dc - 6.0 * t / s).abs();
    [second.abs(), dh2, dcr]
}

/// Largest circle-limit residual over the samples; requires `k = 0`.
pub fn circle_limit_residual(curve: &ProfileCurve, t_samples: &[f64]) -> Result<f64> {
    if curve.k != 0.0 {
        return Err(Error::NotCircle { k: curve.k });
    }
    if t_samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut worst = 0.0f64;
    for &t in t_samples {
        let state = curve.at(t)?;
        for r in circle_limit_terms(&state) {
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(k: f64, branch: Branch, tol: f64) -> HelixConfig {
        HelixConfig::new(k, branch, 1e-3, tol).unwrap()
    }

    #[test]
    fn zero_length_curve_is_series_value() {
        let cfg = config(1.0, Branch::Positive, 1e-10);
        let series = expand_profile_series(1.0, 12).unwrap();
        let curve = continue_profile(&cfg, &series, 1e-3, 1e-6).unwrap();
        assert_eq!(curve.nodes.len(), 1);
        let v = series.eval(1e-3);
        assert_eq!(curve.nodes[0].h, v.h);
        assert_eq!(curve.nodes[0].c, v.c);
        assert_eq!(curve.stop, StopReason::Reached);
        let st = curve.at(1e-6).unwrap();
        assert_eq!((st.h, st.c), (v.h, v.c));
    }

    #[test]
    fn contract_errors() {
        let cfg = config(1.0, Branch::Positive, 1e-10);
        let series = expand_profile_series(1.0, 12).unwrap();
        assert!(matches!(
            continue_profile(&cfg, &series, 1e-3, 1e-7),
            Err(Error::EmptyInterval { .. })
        ));
        assert!(continue_profile(&cfg, &series, -1e-3, 1e-2).is_err());
        assert!(continue_profile(&cfg, &series, 0.0, 1e-2).is_err());
        assert!(continue_profile(&cfg, &series.truncated(3), 1e-3, 1e-2).is_err());
    }

    #[test]
    fn overlap_with_series_at_s_point_one() {
        let cfg = config(1.0, Branch::Positive, 1e-11);
        let series = expand_profile_series(1.0, 12).unwrap();
        let curve = continue_profile(&cfg, &series, 1e-3, 1e-2).unwrap();
        assert_eq!(curve.stop, StopReason::Reached);
        let end = curve.at(1e-2).unwrap();
        let v = series.eval(0.1);
        assert!((end.h - v.h).abs() < 1e-8, "{} vs {}", end.h, v.h);
        assert!((end.c - v.c).abs() < 1e-8, "{} vs {}", end.c, v.c);
    }

    #[test]
    fn negative_branch_is_distinct() {
        let cfg = config(1.0, Branch::Negative, 1e-10);
        let series = expand_profile_series(1.0, 12).unwrap();
        let neg = continue_profile(&cfg, &series, -1e-3, 1e-2).unwrap();
        let pos =
            continue_profile(&cfg.with_branch(Branch::Positive), &series, 1e-3, 1e-2).unwrap();
        let t = 2e-6;
        let a = neg.at(t).unwrap();
        let b = pos.at(t).unwrap();
        assert!(a.h < 0.0);
        // c₊ − c₋ ≈ 4k√t
        let diff = b.c - a.c;
        assert!((diff - 4.0 * t.sqrt()).abs() < 0.01 * diff, "{diff}");
    }

    #[test]
    fn circle_branches_coincide_in_c() {
        let cfg = config(0.0, Branch::Positive, 1e-10);
        let p = Profile::build(&cfg, 1e-2).unwrap();
        for t in [1e-5, 1e-4, 5e-3] {
            let a = p.state(t, Branch::Positive).unwrap();
            let b = p.state(t, Branch::Negative).unwrap();
            assert!((a.c - b.c).abs() < 1e-12);
            assert!((a.h + b.h).abs() < 1e-12);
        }
    }

    #[test]
    fn nodes_are_reproduced_exactly_and_satisfy_rhs() {
        let cfg = config(1.0, Branch::Positive, 1e-9);
        let series = expand_profile_series(1.0, 12).unwrap();
        let curve = continue_profile(&cfg, &series, 1e-3, 1e-2).unwrap();
        assert!(curve.nodes.windows(2).all(|w| w[0].t < w[1].t));
        for n in &curve.nodes {
            let st = curve.at(n.t).unwrap();
            assert_eq!((st.h, st.c, st.dh, st.dc), (n.h, n.c, n.dh, n.dc));
            assert!(denominator(1.0, n.t, n.h, n.c) != 0.0);
        }
        assert!(curve.node_residual() < cfg.tol);
    }

    #[test]
    fn midpoint_matches_reintegration() {
        let cfg = config(1.0, Branch::Positive, 1e-10);
        let series = expand_profile_series(1.0, 12).unwrap();
        let curve = continue_profile(&cfg, &series, 1e-3, 1e-2).unwrap();
        for w in curve.nodes.windows(2).step_by(7).take(20) {
            let mid = 0.5 * (w[0].t + w[1].t);
            let st = curve.at(mid).unwrap();
            let run = rk::integrate(
                |t, y: &[f64; 2]| profile_rhs(1.0, t, y[0], y[1]).map(|(a, b)| [a, b]),
                w[0].t,
                [w[0].h, w[0].c],
                mid,
                StepControl::with_tol(1e-13),
                |_, _| true,
            );
            assert!((run.y_end[0] - st.h).abs() < 10.0 * cfg.tol);
            assert!((run.y_end[1] - st.c).abs() < 10.0 * cfg.tol);
        }
    }

    #[test]
    fn out_of_range_is_error() {
        let cfg = config(1.0, Branch::Positive, 1e-9);
        let series = expand_profile_series(1.0, 12).unwrap();
        let curve = continue_profile(&cfg, &series, 1e-3, 1e-3).unwrap();
        assert!(matches!(curve.at(2e-3), Err(Error::OutOfRange { .. })));
        assert!(matches!(curve.at(1e-7), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn positive_branch_terminates_on_denominator() {
        let cfg = config(1.0, Branch::Positive, 1e-9);
        let series = expand_profile_series(1.0, 12).unwrap();
        let curve = continue_profile(&cfg, &series, 1e-3, 1.0).unwrap();
        assert_ne!(curve.stop, StopReason::Reached);
        assert!(
            curve.t_cap > 0.05 && curve.t_cap < 0.2,
            "t_cap {}",
            curve.t_cap
        );
    }

    #[test]
    fn constant_c_has_zero_circle_residual() {
        assert_eq!(circle_second_order_residual(0.3, 1.7, 0.0, 0.0), 0.0);
    }

    #[test]
    fn circle_limit_requires_k_zero() {
        let cfg = config(1.0, Branch::Positive, 1e-9);
        let series = expand_profile_series(1.0, 12).unwrap();
        let curve = continue_profile(&cfg, &series, 1e-3, 1e-3).unwrap();
        assert!(matches!(
            circle_limit_residual(&curve, &[1e-4]),
            Err(Error::NotCircle { .. })
        ));
    }

    #[test]
    fn circle_limit_holds_on_k0_curve() {
        let cfg = config(0.0, Branch::Positive, 1e-10);
        let series = expand_profile_series(0.0, 12).unwrap();
        let curve = continue_profile(&cfg, &series, 1e-3, 1e-2).unwrap();
        let ts: Vec<f64> = (0..=40)
            .map(|i| 1e-4 * 100f64.powf(i as f64 / 40.0))
            .collect();
        let r = circle_limit_residual(&curve, &ts).unwrap();
        assert!(r < 1e-8, "{r}");
    }
}
