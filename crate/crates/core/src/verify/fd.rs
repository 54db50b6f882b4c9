//! Finite-difference residuals of the incompressible Euler system in
//! cylindrical coordinates, for the raw and the compactly supported flow.

use std::sync::Arc;

use rayon::prelude::*;

use super::{Component, GridInfo, ResidualReport, Stats, VerifyOptions, Workspace};
use crate::error::{Error, Result};
use crate::field::{FlowSample, FlowSampler};
use crate::grid::GridSpec;
use crate::section::XSlice;

/// Allowed relative deviation of a convergence ratio from 4.
const RATIO_TOL: f64 = 0.2;
const SPEED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FdOptions {
    pub counts: [usize; 3],
    pub extent: [f64; 6],
    /// Stencil spacings `h` and `h/2`.
    pub hsteps: [f64; 2],
    /// Points with `t` below this are excluded (the profile is a series
    /// in `√t`, so the field is only Lipschitz on the helix itself).
    pub core_t: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions {
            counts: [64, 64, 64],
            extent: [0.96, 1.04, -0.04, 0.04, -0.04, 0.04],
            hsteps: [1e-3, 5e-4],
            core_t: 5e-5,
        }
    }
}

impl FdOptions {
    pub fn quick() -> Self {
        FdOptions {
            counts: [12, 12, 12],
            ..FdOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffFdOptions {
    /// Stencil centres covering the support annulus.
    pub counts: [usize; 3],
    pub extent: [f64; 6],
    pub hsteps: [f64; 2],
    /// Grid on which support containment is checked.
    pub containment_counts: [usize; 3],
    pub containment_extent: [f64; 6],
}

impl Default for CutoffFdOptions {
    fn default() -> Self {
        CutoffFdOptions {
            counts: [40, 3, 40],
            extent: [0.93, 1.07, -0.01, 0.01, -0.1, 0.1],
            hsteps: [5e-5, 2.5e-5],
            containment_counts: [47, 47, 47],
            containment_extent: [0.9, 1.1, -0.1, 0.1, -0.15, 0.15],
        }
    }
}

impl CutoffFdOptions {
    pub fn quick() -> Self {
        CutoffFdOptions {
            counts: [16, 2, 16],
            containment_counts: [21, 21, 21],
            ..CutoffFdOptions::default()
        }
    }
}

/// Central-difference residuals at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FdResiduals {
    pub div: f64,
    pub m_rho: f64,
    pub m_phi: f64,
    pub m_z: f64,
    /// `u·∇p`.
    pub u_grad_p: f64,
}

impl FdResiduals {
    pub const NAMES: [&'static str; 5] = ["div", "m_rho", "m_phi", "m_z", "u_grad_p"];

    pub fn to_array(self) -> [f64; 5] {
        [self.div, self.m_rho, self.m_phi, self.m_z, self.u_grad_p]
    }
}

/// Second-order residuals from the centre sample and its six neighbours
/// `[ρ+h, ρ−h, φ+h, φ−h, z+h, z−h]`.
fn stencil_residuals(c: &FlowSample, n: &[FlowSample; 6], h: f64) -> FdResiduals {
    let rho = c.rho;
    let d = |i: usize, f: fn(&FlowSample) -> f64| (f(&n[2 * i]) - f(&n[2 * i + 1])) / (2.0 * h);
    let ur = |s: &FlowSample| s.u_rho;
    let uf = |s: &FlowSample| s.u_phi;
    let uz = |s: &FlowSample| s.u_z;
    let pr = |s: &FlowSample| s.p;
    let adv =
        |f: fn(&FlowSample) -> f64| c.u_rho * d(0, f) + c.u_phi / rho * d(1, f) + c.u_z * d(2, f);
    FdResiduals {
        div: d(0, ur) + c.u_rho / rho + d(1, uf) / rho + d(2, uz),
        m_rho: adv(ur) - c.u_phi * c.u_phi / rho + d(0, pr),
        m_phi: adv(uf) + c.u_rho * c.u_phi / rho + d(1, pr) / rho,
        m_z: adv(uz) + d(2, pr),
        u_grad_p: adv(pr),
    }
}

/// Residuals at `(ρ, φ, z)` with spacing `h`, sampling through `sampler`.
pub fn fd_point_residuals(
    sampler: &FlowSampler,
    rho: f64,
    phi: f64,
    z: f64,
    h: f64,
) -> Result<FdResiduals> {
    let c = sampler.sample(rho, phi, z)?;
    let n = [
        sampler.sample(rho + h, phi, z)?,
        sampler.sample(rho - h, phi, z)?,
        sampler.sample(rho, phi + h, z)?,
        sampler.sample(rho, phi - h, z)?,
        sampler.sample(rho, phi, z + h)?,
        sampler.sample(rho, phi, z - h)?,
    ];
    Ok(stencil_residuals(&c, &n, h))
}

/// Row data for the centre `ρ` and `ρ ± h` at each spacing.
struct RowSlices<'a> {
    center: Option<XSlice<'a>>,
    /// `[(ρ+h, ρ−h)]` per spacing.
    sides: Vec<(Option<XSlice<'a>>, Option<XSlice<'a>>)>,
}

impl<'a> RowSlices<'a> {
    fn new(sampler: &'a FlowSampler, rho: f64, hsteps: &[f64]) -> Result<RowSlices<'a>> {
        Ok(RowSlices {
            center: sampler.slice_for(rho)?,
            sides: hsteps
                .iter()
                .map(|h| Ok((sampler.slice_for(rho + h)?, sampler.slice_for(rho - h)?)))
                .collect::<Result<_>>()?,
        })
    }
}

fn stencil_at(
    sampler: &FlowSampler,
    rows: &RowSlices<'_>,
    which: usize,
    c: &FlowSample,
    h: f64,
) -> Result<[FlowSample; 6]> {
    let (rho, phi, z) = (c.rho, c.phi, c.z);
    let (plus, minus) = &rows.sides[which];
    let here = rows.center.as_ref();
    Ok([
        sampler.sample_at(plus.as_ref(), rho + h, phi, z)?,
        sampler.sample_at(minus.as_ref(), rho - h, phi, z)?,
        sampler.sample_at(here, rho, phi + h, z)?,
        sampler.sample_at(here, rho, phi - h, z)?,
        sampler.sample_at(here, rho, phi, z + h)?,
        sampler.sample_at(here, rho, phi, z - h)?,
    ])
}

/// Outcome at one stencil centre.
enum PointResult {
    Skipped,
    Done {
        centre: FlowSample,
        coarse: FdResiduals,
        fine: FdResiduals,
        /// The coarse stencil mixes in-support and out-of-support samples.
        straddles: bool,
    },
}

fn tolerated(e: &Error) -> bool {
    matches!(
        e,
        Error::OutsideRegion { .. } | Error::OutOfRange { .. } | Error::NoBoundaryRoot { .. }
    )
}

fn sweep(
    sampler: &FlowSampler,
    grid: &GridSpec,
    hsteps: [f64; 2],
    core_t: f64,
) -> Result<Vec<PointResult>> {
    let rows: Vec<Result<Vec<PointResult>>> = (0..grid.rho.count)
        .into_par_iter()
        .map(|i| {
            let rho = grid.rho.at(i);
            let slices = match RowSlices::new(sampler, rho, &hsteps) {
                Ok(s) => s,
                Err(e) if tolerated(&e) => {
                    return Ok((0..grid.phi.count * grid.z.count)
                        .map(|_| PointResult::Skipped)
                        .collect())
                }
                Err(e) => return Err(e),
            };
            let mut out = Vec::with_capacity(grid.phi.count * grid.z.count);
            for j in 0..grid.phi.count {
                for l in 0..grid.z.count {
                    let (_, phi, z) = grid.point(i, j, l);
                    out.push(point(sampler, &slices, rho, phi, z, hsteps, core_t)?);
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(grid.len());
    for r in rows {
        all.extend(r?);
    }
    Ok(all)
}

fn point(
    sampler: &FlowSampler,
    slices: &RowSlices<'_>,
    rho: f64,
    phi: f64,
    z: f64,
    hsteps: [f64; 2],
    core_t: f64,
) -> Result<PointResult> {
    let attempt = || -> Result<PointResult> {
        let centre = sampler.sample_at(slices.center.as_ref(), rho, phi, z)?;
        if centre.t < core_t {
            return Ok(PointResult::Skipped);
        }
        let n0 = stencil_at(sampler, slices, 0, &centre, hsteps[0])?;
        let n1 = stencil_at(sampler, slices, 1, &centre, hsteps[1])?;
        let inside = n0.iter().filter(|s| s.in_support).count() + centre.in_support as usize;
        Ok(PointResult::Done {
            coarse: stencil_residuals(&centre, &n0, hsteps[0]),
            fine: stencil_residuals(&centre, &n1, hsteps[1]),
            centre,
            straddles: inside > 0 && inside < 7,
        })
    };
    match attempt() {
        Err(e) if tolerated(&e) => Ok(PointResult::Skipped),
        other => other,
    }
}

#[derive(Default)]
struct Tally {
    coarse: [Stats; 5],
    fine: [Stats; 5],
    skipped: usize,
}

impl Tally {
    fn push(&mut self, coarse: &FdResiduals, fine: &FdResiduals) {
        for (s, v) in self.coarse.iter_mut().zip(coarse.to_array()) {
            s.push(v);
        }
        for (s, v) in self.fine.iter_mut().zip(fine.to_array()) {
            s.push(v);
        }
    }

    fn ratio(&self, q: usize) -> f64 {
        self.coarse[q].max() / self.fine[q].max()
    }

    fn ratio_components(&self, prefix: &str, notes: &mut Vec<String>) -> Vec<Component> {
        FdResiduals::NAMES
            .iter()
            .enumerate()
            .map(|(q, name)| {
                let r = self.ratio(q);
                notes.push(format!(
                    "{prefix}{name}: max {:.3e} -> {:.3e}, ratio {r:.3}; mean {:.3e} -> {:.3e}",
                    self.coarse[q].max(),
                    self.fine[q].max(),
                    self.coarse[q].mean(),
                    self.fine[q].mean()
                ));
                let deviation = (r - 4.0).abs() / 4.0;
                Component::value(
                    &format!("{prefix}{name}_ratio"),
                    if deviation.is_nan() {
                        f64::INFINITY
                    } else {
                        deviation
                    },
                    RATIO_TOL,
                )
            })
            .collect()
    }
}

/// Samples of the cutoff flow on `grid` whose velocity is nonzero but whose
/// `t` lies outside `(ε, 2ε)`, and the number of nonzero samples.
pub fn cutoff_containment(sampler: &FlowSampler, grid: &GridSpec) -> Result<(usize, usize)> {
    let spec = sampler
        .cutoff_spec()
        .ok_or_else(|| Error::InvalidConfig("containment needs the cutoff variant".into()))?;
    let samples = sampler.sample_grid(grid)?;
    let mut violations = 0;
    let mut nonzero = 0;
    for s in &samples {
        let moving = s.u_rho != 0.0 || s.u_z != 0.0 || s.u_phi != 0.0;
        if moving {
            nonzero += 1;
            if !(s.t > spec.eps && s.t < 2.0 * spec.eps) || !s.in_support {
                violations += 1;
            }
        }
    }
    Ok((violations, nonzero))
}

/// Raw and cutoff FD suites: second-order convergence of every residual,
/// the speed/pressure constraint on raw samples, and support containment.
pub fn cylindrical_fd_residuals(ws: &Workspace, options: &VerifyOptions) -> Result<ResidualReport> {
    let map = Arc::new(ws.fd_map(ws.config.branch)?);
    let mut notes = vec![format!("profile tolerance {:e}", ws.fd_tol())];

    // raw field
    let fd = &options.fd;
    let grid = GridSpec::new(fd.counts, fd.extent)?;
    let raw = FlowSampler::raw(map.clone());
    let mut tally = Tally::default();
    let mut speed = Stats::default();
    for r in sweep(&raw, &grid, fd.hsteps, fd.core_t)? {
        match r {
            PointResult::Skipped => tally.skipped += 1,
            PointResult::Done {
                centre,
                coarse,
                fine,
                ..
            } => {
                tally.push(&coarse, &fine);
                speed.push((centre.speed_sq() - 3.0 * centre.p) / (3.0 * centre.p));
            }
        }
    }
    let mut components = tally.ratio_components("", &mut notes);
    components.push(Component::new("speed_pressure", &speed, SPEED_TOL));
    notes.push(format!(
        "raw: {} of {} centres skipped (t < {:e} or stencil outside the region)",
        tally.skipped,
        grid.len(),
        fd.core_t
    ));

    // cutoff field
    let co = &options.cutoff;
    let cut = FlowSampler::cutoff(map, ws.config.eps)?;
    let cgrid = GridSpec::new(co.counts, co.extent)?;
    let mut ctally = Tally::default();
    let mut straddle = Tally::default();
    let mut outside = Stats::default();
    for r in sweep(&cut, &cgrid, co.hsteps, f64::NEG_INFINITY)? {
        match r {
            PointResult::Skipped => ctally.skipped += 1,
            PointResult::Done {
                centre,
                coarse,
                fine,
                straddles,
            } => {
                let silent = !centre.in_support && !straddles;
                if silent {
                    // a constant state around the whole stencil
                    for v in coarse.to_array().into_iter().chain(fine.to_array()) {
                        outside.push(v);
                    }
                    continue;
                }
                ctally.push(&coarse, &fine);
                if straddles {
                    straddle.push(&coarse, &fine);
                }
            }
        }
    }
    components.extend(ctally.ratio_components("cutoff_", &mut notes));
    // stencils across the support edge must not be worse than the interior
    let spike = (0..5)
        .map(|q| straddle.coarse[q].max() / ctally.coarse[q].max())
        .fold(0.0, f64::max);
    let straddle_count = straddle.coarse[0].count();
    notes.push(format!(
        "cutoff: {} active centres, {straddle_count} straddling the support boundary; \
         straddling max / overall max = {spike:.3e}",
        ctally.coarse[0].count()
    ));
    components.push(Component::value(
        "cutoff_straddle_spike",
        if straddle_count == 0 || spike.is_nan() {
            f64::INFINITY
        } else {
            spike
        },
        1.0,
    ));
    components.push(Component::new("cutoff_outside_support", &outside, 0.0));

    let cgrid_c = GridSpec::new(co.containment_counts, co.containment_extent)?;
    let (violations, nonzero) = cutoff_containment(&cut, &cgrid_c)?;
    notes.push(format!(
        "containment: {violations} violations among {nonzero} nonzero of {} samples",
        cgrid_c.len()
    ));
    components.push(Component::value(
        "cutoff_containment",
        violations as f64,
        0.0,
    ));
    components.push(Component::value(
        "cutoff_support_nonempty",
        if nonzero > 0 { 0.0 } else { 1.0 },
        0.0,
    ));

    let info = GridInfo {
        kind: "cylindrical box (rho, phi, z), stencil centres".into(),
        counts: fd.counts.to_vec(),
        lo: vec![fd.extent[0], fd.extent[2], fd.extent[4]],
        hi: vec![fd.extent[1], fd.extent[3], fd.extent[5]],
        spacing: fd.hsteps.to_vec(),
    };
    let requested = grid.len() + cgrid.len();
    let mut report = ResidualReport::from_components(
        "fd",
        info,
        components,
        tally.skipped + ctally.skipped,
        requested,
    );
    report.notes.splice(0..0, notes);
    Ok(report)
}
