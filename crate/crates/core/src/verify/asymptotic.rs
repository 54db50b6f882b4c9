//! Leading-order behaviour of `t(x, y)` near the helix, reflection symmetry
//! and the difference between the two branches.

use std::f64::consts::PI;

use super::{Component, GridInfo, ResidualReport, Workspace};
use crate::config::Branch;
use crate::error::Result;

/// Largest allowed `max C / min C` across radii for `k > 0`.
const C_VARIATION: f64 = 2.0;
/// Relative branch difference below which two `t` values count as equal.
const DISTINCT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticOptions {
    pub radii: Vec<f64>,
    pub angles: usize,
    /// Points checked for `t(x, y) = t(x, −y)`.
    pub mirror_points: Vec<(f64, f64)>,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        AsymptoticOptions {
            radii: vec![1e-3, 3e-3, 1e-2],
            angles: 32,
            mirror_points: vec![(1.05, 0.02), (0.97, 0.013), (1.0, 0.04), (1.02, 1e-3)],
        }
    }
}

/// `C(r) = max |t − q|/r³` on each circle, the mirror symmetry and the
/// branch comparison.
pub fn asymptotic_and_symmetry_check(
    ws: &Workspace,
    options: &AsymptoticOptions,
) -> Result<ResidualReport> {
    let k = ws.config.k;
    let k2p1 = 1.0 + k * k;
    let mut notes = Vec::new();
    let mut components = Vec::new();
    let mut skipped = 0;
    let mut requested = 0;

    let maps = [ws.map(Branch::Positive), ws.map(Branch::Negative)];
    for map in &maps {
        let mut cs = Vec::new();
        for &r in &options.radii {
            let mut c: f64 = 0.0;
            for i in 0..options.angles {
                requested += 1;
                let theta = 2.0 * PI * (i as f64 + 0.5) / options.angles as f64;
                let (x, y) = (1.0 + r * theta.cos(), r * theta.sin());
                match map.t_from_y(x, y) {
                    Ok(t) => {
                        let q = 0.5 * (x - 1.0).powi(2) + y * y / (2.0 * k2p1);
                        c = c.max((t - q).abs() / r.powi(3));
                    }
                    Err(_) => skipped += 1,
                }
            }
            cs.push(c);
        }
        let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = cs.iter().cloned().fold(0.0, f64::max);
        let variation = hi / lo;
        let listed: Vec<String> = options
            .radii
            .iter()
            .zip(&cs)
            .map(|(r, c)| format!("C({r:e}) = {c:.4}"))
            .collect();
        notes.push(format!(
            "branch {}: {}; variation {variation:.3}",
            map.branch,
            listed.join(", ")
        ));
        if k > 0.0 {
            components.push(Component::value(
                &format!("c_variation_{}", branch_tag(map.branch)),
                if variation.is_nan() {
                    f64::INFINITY
                } else {
                    variation
                },
                C_VARIATION,
            ));
        }
    }

    // reflection y → −y
    let mut mirror: f64 = 0.0;
    for map in &maps {
        for &(x, y) in &options.mirror_points {
            let a = map.t_from_y(x, y)?;
            let b = map.t_from_y(x, -y)?;
            mirror = mirror.max((a - b).abs());
        }
    }
    components.push(Component::value("mirror_symmetry", mirror, 0.0));

    // branch comparison away from the symmetry line
    let mut diff: f64 = 0.0;
    let mut least: f64 = f64::INFINITY;
    for &(x, y) in &options.mirror_points {
        let tp = maps[0].t_from_y(x, y)?;
        let tm = maps[1].t_from_y(x, y)?;
        let d = (tp - tm).abs() / tp.abs().max(tm.abs());
        diff = diff.max(d);
        least = least.min(d);
    }
    if k > 0.0 {
        notes.push(format!(
            "branches differ: relative |t+ - t-| at least {least:.3e}"
        ));
        components.push(Component::value("branches_distinct", DISTINCT / least, 1.0));
    } else {
        notes.push(format!(
            "branches coincide: relative |t+ - t-| at most {diff:.3e}"
        ));
        components.push(Component::value(
            "branches_coincide",
            diff,
            100.0 * ws.config.tol,
        ));
    }

    let grid = GridInfo {
        kind: "circles around (x, y) = (1, 0)".into(),
        counts: vec![options.radii.len(), options.angles],
        lo: vec![options.radii.iter().cloned().fold(f64::INFINITY, f64::min)],
        hi: vec![options.radii.iter().cloned().fold(0.0, f64::max)],
        spacing: vec![],
    };
    let mut report =
        ResidualReport::from_components("asymptotic", grid, components, skipped, requested);
    report.notes.splice(0..0, notes);
    Ok(report)
}

fn branch_tag(b: Branch) -> &'static str {
    match b {
        Branch::Positive => "plus",
        Branch::Negative => "minus",
    }
}
