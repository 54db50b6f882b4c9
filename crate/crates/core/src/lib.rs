//! Construction and verification of a steady, smooth, helically symmetric
//! Euler flow supported near the helix `ρ = 1, z = kφ`.
//!
//! The pipeline runs bottom-up:
//!
//! * [`series`] expands the profile functions `h(t)`, `c(t)` in `s = ±√t`
//!   about the singular initial point `h(0) = 0, c(0) = 1`;
//! * [`profile`] continues them numerically to larger `t`;
//! * [`section`] builds the cross-section geometry `t(x, y)` from the
//!   profile functions `F`, `G`;
//! * [`field`] assembles the velocity/pressure fields (raw, compactly
//!   supported, Beltrami) in cylindrical coordinates;
//! * [`verify`] measures every checkable identity of the construction;
//! * [`io`] writes samples (CSV, legacy VTK) and JSON verification reports.

// `!(a > b)` is used on purpose so that NaN lands in the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod profile;
pub mod quadrature;
pub mod rk;
pub mod roots;
pub mod section;
pub mod series;
pub mod verify;

pub use config::{Branch, HelixConfig};
pub use error::{Error, Result};
pub use field::{
    helical_coords, reference_field_a, BeltramiSample, CutoffSpec, FlowSample, FlowSampler, Variant,
};
pub use grid::GridSpec;
pub use profile::{
    circle_limit_residual, continue_profile, Profile, ProfileCurve, ProfileNode, ProfileState,
    StopReason,
};
pub use section::{CrossSectionMap, SectionCoefficients, XSlice};
pub use series::{expand_profile_series, series_ode_residual, SeriesPair, SeriesValue};
pub use verify::ResidualReport;
