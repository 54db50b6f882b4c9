//! Checks on the profile functions themselves: the series and its numerical
//! continuation.

use super::{Component, GridInfo, ResidualReport, Stats, Workspace};
use crate::config::Branch;
use crate::error::Result;
use crate::profile::circle_limit_residual;
use crate::series::series_ode_residual;

const SERIES_SAMPLES: [f64; 8] = [1e-3, -1e-3, 3e-3, -3e-3, 1e-2, -1e-2, 3e-2, -3e-2];
const CIRCLE_TOL: f64 = 1e-8;

/// Cleared-equation residual of the stored series on both branches.
pub fn series_suite(ws: &Workspace) -> Result<ResidualReport> {
    let series = &ws.profile.series;
    let mut stats = Stats::default();
    for s in SERIES_SAMPLES {
        stats.push(series_ode_residual(series, &[s])?);
    }
    let mut report = ResidualReport::from_stats(
        "series",
        GridInfo {
            kind: "signed abscissae s".into(),
            counts: vec![SERIES_SAMPLES.len()],
            lo: vec![-3e-2],
            hi: vec![3e-2],
            spacing: vec![],
        },
        &stats,
        ws.config.tol,
        0,
        SERIES_SAMPLES.len(),
    );
    report.note(format!("order {}", series.order()));
    let low = series_ode_residual(&series.truncated(1), &[0.1])?;
    let mid = series_ode_residual(&series.truncated(4), &[0.1])?;
    let full = series_ode_residual(series, &[0.1])?;
    report.note(format!(
        "residual at s = 0.1 by order: N=1 {low:.3e}, N=4 {mid:.3e}, N={} {full:.3e}",
        series.order()
    ));
    Ok(report)
}

/// Series/continuation overlap, node consistency and (at `k = 0`) the
/// circle-limit equation.
pub fn ode_suite(ws: &Workspace) -> Result<ResidualReport> {
    let profile = &ws.profile;
    let tol = ws.config.tol;
    let mut overlap = Stats::default();
    let mut nodes = Stats::default();
    let mut notes = Vec::new();
    for branch in [Branch::Positive, Branch::Negative] {
        let curve = profile.curve(branch);
        let t0 = curve.t_start;
        for i in 0..=20 {
            let t = t0 * 4f64.powf(i as f64 / 20.0);
            if !curve.contains(t) {
                continue;
            }
            let st = curve.at(t)?;
            let v = profile.series.eval(branch.sign() * t.sqrt());
            overlap.push(st.h - v.h);
            overlap.push(st.c - v.c);
        }
        nodes.push(curve.node_residual());
        notes.push(format!(
            "branch {branch}: t_cap = {:.6e} ({}), {} nodes",
            curve.t_cap,
            curve.stop,
            curve.nodes.len()
        ));
    }
    let mut components = vec![
        Component::new("series_overlap", &overlap, 10.0 * tol),
        Component::new("node_consistency", &nodes, tol),
    ];
    if ws.config.k == 0.0 {
        let curve = profile.curve(Branch::Positive);
        let hi = 1e-2f64.min(curve.t_cap);
        let samples: Vec<f64> = (0..=40)
            .map(|i| 1e-4 * (hi / 1e-4).powf(i as f64 / 40.0))
            .collect();
        let r = circle_limit_residual(curve, &samples)?;
        components.push(Component::value("circle_limit", r, CIRCLE_TOL));
    }
    let mut report = ResidualReport::from_components(
        "ode",
        GridInfo::samples("t on [t0, 4 t0] per branch", overlap.count() / 2),
        components,
        0,
        0,
    );
    report.notes.extend(notes);
    report.note(format!("integrator tolerance {tol:e}"));
    Ok(report)
}
