//! Residuals of the two-dimensional reduced equations evaluated analytically
//! from `F`, `G` and the profile derivatives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Component, GridInfo, ResidualReport, Stats, VerifyOptions, Workspace};
use crate::config::Branch;
use crate::error::Result;
use crate::field::raw_velocity;
use crate::profile::ProfileState;
use crate::section::{boundary_polynomial, coefficients_from_state, SectionCoefficients};

const X_HALF_WIDTH: f64 = 0.05;
const T_LO: f64 = 1e-4;
const T_HI: f64 = 1e-2;
const TOL: f64 = 1e-8;
const ROUNDOFF_TOL: f64 = 1e-12;

/// Signed residuals at one `(x, t)` with `t_y = sign·√G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedTerms {
    /// `G/x² + (F²+h²)/(x²+k²) − 3t/(1+k²)`.
    pub speed_relation: f64,
    pub momentum_x: f64,
    pub momentum_y: f64,
    /// `G_x + F·G_t − 2G·F_t`.
    pub compatibility: f64,
    /// `F_x − (x²−k²)F/(x(x²+k²)) + 2kh/(x²+k²) − (x²+k²)/(1+k²)`.
    pub f_equation: f64,
    /// `|u|² − 3p` from the assembled velocity.
    pub speed: f64,
}

pub fn reduced_terms(k: f64, sign: f64, co: &SectionCoefficients) -> ReducedTerms {
    let SectionCoefficients {
        x,
        t,
        h,
        f,
        g,
        f_x,
        f_t,
        g_x,
        g_t,
        ..
    } = *co;
    let k2 = k * k;
    let k2p1 = 1.0 + k2;
    let xk = x * x + k2;
    let t_y = sign * g.max(0.0).sqrt();
    // t_x = F, t_xx = F_x + F F_t, t_xy = t_y F_t, t_y² = G, t_yy = G_t / 2
    let t_xx = f_x + f * f_t;
    let t_xy = t_y * f_t;
    let t_yy = 0.5 * g_t;
    let swirl = (x * h + k * f) / xk;
    let speed_relation = g / (x * x) + (f * f + h * h) / xk - 3.0 * t / k2p1;
    let momentum_x = (t_y * t_xy - f * t_yy) - g / x - x * swirl * swirl + x * x * f / k2p1;
    let momentum_y = (t_y * t_xx - f * t_xy) - f * t_y * (x * x - k2) / (x * xk)
        + 2.0 * k * h * t_y / xk
        - xk * t_y / k2p1;
    let compatibility = g_x + f * g_t - 2.0 * g * f_t;
    let f_equation = f_x - (x * x - k2) * f / (x * xk) + 2.0 * k * h / xk - xk / k2p1;
    let u = raw_velocity(k, sign, co);
    let speed = u[0] * u[0] + u[1] * u[1] + u[2] * u[2] - 3.0 * t / k2p1;
    ReducedTerms {
        speed_relation,
        momentum_x,
        momentum_y,
        compatibility,
        f_equation,
        speed,
    }
}

/// Reduced residuals on seeded `(x, t)` samples, both branches.
pub fn reduced_euler_residuals(ws: &Workspace, options: &VerifyOptions) -> Result<ResidualReport> {
    let k = ws.config.k;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let names = [
        "speed_relation",
        "momentum_x",
        "momentum_y",
        "compatibility",
    ];
    let mut stats = [Stats::default(); 4];
    let mut consistency = Stats::default();
    let mut skipped = 0;
    let mut requested = 0;
    for branch in [Branch::Positive, Branch::Negative] {
        let map = ws.map(branch);
        let t_hi = T_HI.min(map.t_limit);
        for _ in 0..options.reduced_samples {
            requested += 1;
            let x = 1.0 + rng.gen_range(-X_HALF_WIDTH..=X_HALF_WIDTH);
            let u: f64 = rng.gen();
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let t_lo = match map.t_min_of(x) {
                Ok(tm) => T_LO.max(tm * (1.0 + 1e-9)),
                Err(_) => {
                    skipped += 1;
                    continue;
                }
            };
            if !(t_lo < t_hi) {
                skipped += 1;
                continue;
            }
            let t = t_lo * (t_hi / t_lo).powf(u);
            let co = match map.section_coefficients(x, t) {
                Ok(co) if co.g > 0.0 => co,
                _ => {
                    skipped += 1;
                    continue;
                }
            };
            let r = reduced_terms(k, sign, &co);
            for (s, v) in stats.iter_mut().zip([
                r.speed_relation,
                r.momentum_x,
                r.momentum_y,
                r.compatibility,
            ]) {
                s.push(v);
            }
            consistency.push(r.speed_relation - r.speed);
        }
    }

    // the F equation holds for any profile pair, and G and the boundary
    // polynomial are proportional with factor −4(1+k²)².
    let mut f_equation = Stats::default();
    let mut poly = Stats::default();
    for _ in 0..options.reduced_samples {
        let x = rng.gen_range(0.8..1.2);
        let st = ProfileState {
            t: rng.gen_range(0.0..0.05),
            h: rng.gen_range(-0.5..0.5),
            c: rng.gen_range(0.5..1.5),
            s_fn: f64::NAN,
            dh: rng.gen_range(-2.0..2.0),
            dc: rng.gen_range(-2.0..2.0),
        };
        let co = coefficients_from_state(k, x, &st);
        f_equation.push(reduced_terms(k, 1.0, &co).f_equation);
        let p = boundary_polynomial(k, x, st.t, st.h, st.c);
        let scale = 4.0 * (1.0 + k * k).powi(2);
        // G is a difference of O(1) terms; measure against their size
        let k2p1 = 1.0 + k * k;
        let xk = x * x + k * k;
        let f_size = (k * st.h / x).abs() + xk * (x * x + st.c.abs()) / (2.0 * x * k2p1);
        let g_size = x * x * (3.0 * st.t / k2p1 + (f_size * f_size + st.h * st.h) / xk);
        poly.push((p + scale * co.g) / (scale * g_size));
    }

    let mut components: Vec<Component> = names
        .iter()
        .zip(&stats)
        .map(|(n, s)| Component::new(n, s, TOL))
        .collect();
    components.push(Component::new(
        "speed_relation_vs_velocity",
        &consistency,
        ROUNDOFF_TOL,
    ));
    components.push(Component::new(
        "f_equation_arbitrary_profile",
        &f_equation,
        ROUNDOFF_TOL,
    ));
    components.push(Component::new(
        "boundary_polynomial_proportionality",
        &poly,
        ROUNDOFF_TOL,
    ));

    let mut all = Stats::default();
    for s in &stats {
        all.merge(s);
    }
    let grid = GridInfo {
        kind: "random (x, t): x uniform, t log-uniform".into(),
        counts: vec![requested],
        lo: vec![1.0 - X_HALF_WIDTH, T_LO],
        hi: vec![1.0 + X_HALF_WIDTH, T_HI],
        spacing: vec![],
    };
    let mut report = ResidualReport::from_stats("reduced", grid, &all, TOL, skipped, requested)
        .with_components(components);
    for (n, s) in names.iter().zip(&stats) {
        report.note(format!("{n}: max {:.3e}, mean {:.3e}", s.max(), s.mean()));
    }
    report.note(format!("profile tolerance {:e}", ws.config.tol));
    Ok(report)
}
