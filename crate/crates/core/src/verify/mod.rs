//! Residual suites measuring how well the constructed fields satisfy the
//! equations they were built from.
//!
//! Single-equation suites report the raw residual against its tolerance.
//! Suites bundling several checks with different tolerances (`fd`,
//! `beltrami_gs`) report the worst component as a multiple of its own
//! tolerance, so their headline tolerance is `1`; the per-check numbers are
//! kept in [`ResidualReport::components`].

mod asymptotic;
mod beltrami;
mod fd;
mod identities;
pub mod poly;
mod profile_checks;
mod reduced;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::{Branch, HelixConfig};
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::section::{CrossSectionMap, DEFAULT_DELTA, DEFAULT_PROFILE_T_MAX};

pub use asymptotic::{asymptotic_and_symmetry_check, AsymptoticOptions};
pub use beltrami::{beltrami_gs_residuals, BeltramiOptions, GsPart};
pub use fd::{
    cutoff_containment, cylindrical_fd_residuals, fd_point_residuals, CutoffFdOptions, FdOptions,
    FdResiduals,
};
pub use identities::{killing_identity_residual, vector_identity_residuals};
pub use profile_checks::{ode_suite, series_suite};
pub use reduced::{reduced_euler_residuals, reduced_terms, ReducedTerms};

/// A suite fails when more than this fraction of requested points is skipped.
pub const MAX_SKIP_FRACTION: f64 = 0.2;

/// ODE tolerance used for the profile behind finite-difference suites.
/// Dense output of a coarser integration has slope jumps between steps that
/// do not shrink with the stencil and mask the convergence order.
pub const FD_PROFILE_TOL: f64 = 1e-14;

/// Sampling layout behind a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub kind: String,
    pub counts: Vec<usize>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub spacing: Vec<f64>,
}

impl GridInfo {
    pub fn samples(kind: &str, n: usize) -> GridInfo {
        GridInfo {
            kind: kind.to_string(),
            counts: vec![n],
            ..GridInfo::default()
        }
    }
}

/// One named check inside a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub max: f64,
    pub mean: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Component {
    pub fn new(name: &str, stats: &Stats, tolerance: f64) -> Component {
        Component {
            name: name.to_string(),
            max: stats.max(),
            mean: stats.mean(),
            tolerance,
            passed: stats.max() <= tolerance,
        }
    }

    /// A single measured value (e.g. a convergence-ratio deviation).
    pub fn value(name: &str, value: f64, tolerance: f64) -> Component {
        Component {
            name: name.to_string(),
            max: value,
            mean: value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    pub fn score(&self) -> f64 {
        if self.tolerance == 0.0 {
            if self.max == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.max / self.tolerance
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub suite: String,
    pub grid: GridInfo,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub skipped_points: usize,
    #[serde(default)]
    pub requested_points: usize,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub components: Vec<Component>,
}

impl ResidualReport {
    /// Report over raw residual values.
    pub fn from_stats(
        suite: &str,
        grid: GridInfo,
        stats: &Stats,
        tolerance: f64,
        skipped: usize,
        requested: usize,
    ) -> ResidualReport {
        let mut r = ResidualReport {
            suite: suite.to_string(),
            grid,
            max_residual: stats.max(),
            mean_residual: stats.mean(),
            tolerance,
            passed: false,
            skipped_points: skipped,
            requested_points: requested,
            notes: Vec::new(),
            components: Vec::new(),
        };
        r.settle();
        r
    }

    /// Report whose headline is the worst component score (tolerance 1).
    pub fn from_components(
        suite: &str,
        grid: GridInfo,
        components: Vec<Component>,
        skipped: usize,
        requested: usize,
    ) -> ResidualReport {
        let mut stats = Stats::default();
        for c in &components {
            stats.push(c.score());
        }
        let mut r = ResidualReport::from_stats(suite, grid, &stats, 1.0, skipped, requested);
        r.components = components;
        r.settle();
        r
    }

    /// Attaches extra checks; every component must pass as well.
    pub fn with_components(mut self, components: Vec<Component>) -> ResidualReport {
        self.components = components;
        self.settle();
        self
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn skip_fraction(&self) -> f64 {
        if self.requested_points == 0 {
            0.0
        } else {
            self.skipped_points as f64 / self.requested_points as f64
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn settle(&mut self) {
        let too_many_skipped = self.skip_fraction() > MAX_SKIP_FRACTION;
        self.passed = self.max_residual <= self.tolerance
            && self.components.iter().all(|c| c.passed)
            && !too_many_skipped;
        if too_many_skipped && !self.notes.iter().any(|n| n.starts_with("skipped")) {
            self.notes.push(format!(
                "skipped {} of {} points (more than {:.0}%)",
                self.skipped_points,
                self.requested_points,
                100.0 * MAX_SKIP_FRACTION
            ));
        }
    }
}

/// Order-independent max/mean accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    max: f64,
    sum: f64,
    n: usize,
}

impl Stats {
    pub fn push(&mut self, v: f64) {
        let v = v.abs();
        if v.is_nan() {
            self.max = f64::INFINITY;
        } else {
            self.max = self.max.max(v);
        }
        self.sum += v;
        self.n += 1;
    }

    pub fn merge(&mut self, other: &Stats) {
        self.max = self.max.max(other.max);
        self.sum += other.sum;
        self.n += other.n;
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    pub fn count(&self) -> usize {
        self.n
    }
}

impl FromIterator<f64> for Stats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Stats {
        let mut s = Stats::default();
        for v in iter {
            s.push(v);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Series,
    Ode,
    Reduced,
    Fd,
    Beltrami,
    Gs,
    Identities,
    Asymptotic,
}

impl Suite {
    pub const NAMES: [&'static str; 9] = [
        "all",
        "series",
        "ode",
        "reduced",
        "fd",
        "beltrami",
        "gs",
        "identities",
        "asymptotic",
    ];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = *self as usize;
        f.write_str(Suite::NAMES[i])
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        const ALL: [Suite; 9] = [
            Suite::All,
            Suite::Series,
            Suite::Ode,
            Suite::Reduced,
            Suite::Fd,
            Suite::Beltrami,
            Suite::Gs,
            Suite::Identities,
            Suite::Asymptotic,
        ];
        Suite::NAMES
            .iter()
            .position(|n| *n == s)
            .map(|i| ALL[i])
            .ok_or_else(|| Error::InvalidConfig(format!("unknown suite `{s}`")))
    }
}

/// Sizes and seeds for every suite.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub reduced_samples: usize,
    pub fd: FdOptions,
    pub cutoff: CutoffFdOptions,
    pub beltrami: BeltramiOptions,
    pub asymptotic: AsymptoticOptions,
    pub identity_pairs: usize,
    pub identity_points: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 20_240_601,
            reduced_samples: 1000,
            fd: FdOptions::default(),
            cutoff: CutoffFdOptions::default(),
            beltrami: BeltramiOptions::default(),
            asymptotic: AsymptoticOptions::default(),
            identity_pairs: 100,
            identity_points: 10,
        }
    }
}

impl VerifyOptions {
    /// Small grids for smoke runs; same checks, looser sampling.
    pub fn quick() -> Self {
        VerifyOptions {
            reduced_samples: 200,
            fd: FdOptions::quick(),
            cutoff: CutoffFdOptions::quick(),
            beltrami: BeltramiOptions::quick(),
            identity_pairs: 20,
            ..VerifyOptions::default()
        }
    }
}

/// Shared profile data for one configuration.
pub struct Workspace {
    pub config: HelixConfig,
    pub profile: Arc<Profile>,
    fd_profile: std::sync::OnceLock<Result<Arc<Profile>, String>>,
}

impl Workspace {
    pub fn new(config: &HelixConfig) -> Result<Workspace> {
        config.validate()?;
        Ok(Workspace {
            config: *config,
            profile: Arc::new(Profile::build(config, DEFAULT_PROFILE_T_MAX)?),
            fd_profile: std::sync::OnceLock::new(),
        })
    }

    pub fn map(&self, branch: Branch) -> CrossSectionMap {
        CrossSectionMap::from_profile(self.profile.clone(), branch, DEFAULT_DELTA)
    }

    /// Map built at [`FD_PROFILE_TOL`] (or the configured tolerance if tighter).
    pub fn fd_map(&self, branch: Branch) -> Result<CrossSectionMap> {
        let profile = self
            .fd_profile
            .get_or_init(|| {
                let mut cfg = self.config;
                cfg.tol = cfg.tol.min(FD_PROFILE_TOL);
                Profile::build(&cfg, DEFAULT_PROFILE_T_MAX)
                    .map(Arc::new)
                    .map_err(|e| e.to_string())
            })
            .clone()
            .map_err(Error::Domain)?;
        Ok(CrossSectionMap::from_profile(
            profile,
            branch,
            DEFAULT_DELTA,
        ))
    }

    pub fn fd_tol(&self) -> f64 {
        self.config.tol.min(FD_PROFILE_TOL)
    }
}

/// Runs one suite (or all five verifier suites) for `config`.
pub fn run_suite(
    config: &HelixConfig,
    suite: Suite,
    options: &VerifyOptions,
) -> Result<Vec<ResidualReport>> {
    let ws = Workspace::new(config)?;
    Ok(match suite {
        Suite::All => vec![
            reduced_euler_residuals(&ws, options)?,
            cylindrical_fd_residuals(&ws, options)?,
            beltrami_gs_residuals(&ws, options, GsPart::Both)?,
            vector_identity_residuals(
                options.seed,
                options.identity_pairs,
                options.identity_points,
            ),
            asymptotic_and_symmetry_check(&ws, &options.asymptotic)?,
        ],
        Suite::Series => vec![series_suite(&ws)?],
        Suite::Ode => vec![ode_suite(&ws)?],
        Suite::Reduced => vec![reduced_euler_residuals(&ws, options)?],
        Suite::Fd => vec![cylindrical_fd_residuals(&ws, options)?],
        Suite::Beltrami => vec![beltrami_gs_residuals(&ws, options, GsPart::Beltrami)?],
        Suite::Gs => vec![beltrami_gs_residuals(&ws, options, GsPart::GradShafranov)?],
        Suite::Identities => vec![vector_identity_residuals(
            options.seed,
            options.identity_pairs,
            options.identity_points,
        )],
        Suite::Asymptotic => vec![asymptotic_and_symmetry_check(&ws, &options.asymptotic)?],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_basics() {
        let s: Stats = [1.0, -3.0, 2.0].into_iter().collect();
        assert_eq!(s.max(), 3.0);
        assert_eq!(s.mean(), 2.0);
        assert_eq!(Stats::default().mean(), 0.0);
        let n: Stats = [1.0, f64::NAN].into_iter().collect();
        assert_eq!(n.max(), f64::INFINITY);
    }

    #[test]
    fn report_pass_rule() {
        let s: Stats = [1e-9, 2e-9].into_iter().collect();
        let r = ResidualReport::from_stats("x", GridInfo::default(), &s, 1e-8, 0, 2);
        assert!(r.passed);
        let r = ResidualReport::from_stats("x", GridInfo::default(), &s, 1e-9, 0, 2);
        assert!(!r.passed);
        let r = ResidualReport::from_stats("x", GridInfo::default(), &s, 1e-8, 3, 10);
        assert!(!r.passed);
        assert!(r.notes[0].starts_with("skipped"));
    }

    #[test]
    fn component_scores() {
        let r = ResidualReport::from_components(
            "x",
            GridInfo::default(),
            vec![
                Component::value("a", 0.5, 1.0),
                Component::value("b", 3e-5, 1e-4),
            ],
            0,
            0,
        );
        assert!(r.passed);
        assert_eq!(r.max_residual, 0.5);
        let r = ResidualReport::from_components(
            "x",
            GridInfo::default(),
            vec![Component::value("a", 2e-4, 1e-4)],
            0,
            0,
        );
        assert!(!r.passed);
        assert_eq!(r.max_residual, 2.0);
    }

    #[test]
    fn suite_names_round_trip() {
        for n in Suite::NAMES {
            assert_eq!(n.parse::<Suite>().unwrap().to_string(), n);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }
}
