//! Beltrami structure of `ũ = p^{−5/6}u` and the helical Grad–Shafranov
//! equation for `ψ = t^{1/6}`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Component, GridInfo, ResidualReport, Stats, VerifyOptions, Workspace};
use crate::config::HelixConfig;
use crate::error::{Error, Result};
use crate::field::{
    helical_coords, reference_field_a, BeltramiSample, FlowSampler, DEFAULT_T_FLOOR,
};
use crate::section::{CrossSectionMap, SectionCoefficients};

const ALIGNMENT_TOL: f64 = 1e-4;
const MIN_RATIO: f64 = 8.0;
const DECOMPOSITION_TOL: f64 = 1e-12;
const GS_TOL: f64 = 1e-6;
const LAPLACIAN_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsPart {
    Both,
    Beltrami,
    GradShafranov,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeltramiOptions {
    /// Stencil spacings `h` and `h/2` for the fourth-order curl.
    pub hsteps: [f64; 2],
    pub points: usize,
    /// Lower end of the sampled `t` range; the upper end is `t_cap/2`.
    pub t_lo: f64,
    pub t_floor: f64,
    pub gs_counts: [usize; 2],
    /// `[x_lo, x_hi, y_lo, y_hi]`.
    pub gs_extent: [f64; 4],
    pub laplacian_points: usize,
    /// Spacing of the 3D Laplacian cross-check; `t(x, y)` carries ~1e-12
    /// relative noise from the quadrature inversion, amplified by `1/h²`.
    pub laplacian_h: f64,
}

impl Default for BeltramiOptions {
    fn default() -> Self {
        BeltramiOptions {
            hsteps: [1e-3, 5e-4],
            points: 300,
            t_lo: 1e-3,
            t_floor: DEFAULT_T_FLOOR,
            gs_counts: [41, 41],
            gs_extent: [0.96, 1.04, -0.06, 0.06],
            laplacian_points: 20,
            laplacian_h: 2e-3,
        }
    }
}

impl BeltramiOptions {
    pub fn quick() -> Self {
        BeltramiOptions {
            points: 60,
            gs_counts: [21, 21],
            laplacian_points: 8,
            ..BeltramiOptions::default()
        }
    }
}

/// Cross product in the right-handed `(ρ, φ, z)` frame, on vectors stored
/// as `[ρ, z, φ]`.
fn cross_rzf(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    let (ar, az, af) = (a[0], a[1], a[2]);
    let (br, bz, bf) = (b[0], b[1], b[2]);
    [af * bz - az * bf, ar * bf - af * br, az * br - ar * bz]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Fourth-order FD curl of `ũ` at a point, stored as `[ρ, z, φ]`.
fn fd_curl(sampler: &FlowSampler, rho: f64, phi: f64, z: f64, h: f64) -> Result<[f64; 3]> {
    let at = |dr: f64, dp: f64, dz: f64| -> Result<[f64; 3]> {
        Ok(sampler
            .sample_beltrami(rho + dr, phi + dp, z + dz)?
            .velocity())
    };
    // d[axis][component], axis order ρ, φ, z
    let mut d = [[0.0; 3]; 3];
    for (axis, row) in d.iter_mut().enumerate() {
        let shift = |s: f64| match axis {
            0 => (s, 0.0, 0.0),
            1 => (0.0, s, 0.0),
            _ => (0.0, 0.0, s),
        };
        let mut vals = [[0.0; 3]; 4];
        for (v, s) in vals.iter_mut().zip([2.0 * h, h, -h, -2.0 * h]) {
            let (a, b, c) = shift(s);
            *v = at(a, b, c)?;
        }
        for (comp, out) in row.iter_mut().enumerate() {
            *out = (-vals[0][comp] + 8.0 * vals[1][comp] - 8.0 * vals[2][comp] + vals[3][comp])
                / (12.0 * h);
        }
    }
    let u = at(0.0, 0.0, 0.0)?;
    let (r, f, zz) = (0, 1, 2);
    let (ur, uz, uf) = (0, 1, 2);
    Ok([
        d[f][uz] / rho - d[zz][uf],
        d[r][uf] + u[uf] / rho - d[f][ur] / rho,
        d[zz][ur] - d[r][uz],
    ])
}

struct Alignment {
    alignment: f64,
    lambda_fd: f64,
}

fn alignment_at(sampler: &FlowSampler, s: &BeltramiSample, h: f64) -> Result<Alignment> {
    let w = fd_curl(sampler, s.rho, s.phi, s.z, h)?;
    let u = s.velocity();
    Ok(Alignment {
        alignment: norm(cross_rzf(w, u)) / (norm(w) * norm(u)),
        lambda_fd: dot(w, u) / dot(u, u),
    })
}

/// `|ũ − 6(1+k²)^{5/6}(a×∇ψ + χa)| / |ũ|` with `∇ψ` from the section data.
fn decomposition_residual(k: f64, s: &BeltramiSample, co: &SectionCoefficients) -> Result<f64> {
    let x = s.rho;
    let a = reference_field_a(x, k)?;
    let (_, y) = helical_coords(s.rho, s.phi, s.z, k);
    let t_y = y.signum() * co.g.max(0.0).sqrt();
    let scale = s.t.powf(-5.0 / 6.0) / 6.0;
    let grad_psi = [scale * co.f, scale * t_y, -k * scale * t_y / x];
    let c = cross_rzf(a, grad_psi);
    let factor = 6.0 * (1.0 + k * k).powf(5.0 / 6.0);
    let model = [
        factor * (c[0] + s.chi * a[0]),
        factor * (c[1] + s.chi * a[1]),
        factor * (c[2] + s.chi * a[2]),
    ];
    let u = s.velocity();
    Ok(norm([u[0] - model[0], u[1] - model[1], u[2] - model[2]]) / norm(u))
}

/// Terms of the helical Grad–Shafranov equation at `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsTerms {
    pub laplacian: f64,
    /// `2(∇log|ξ|, ∇ψ) = 2xψ_x/(x²+k²)`.
    pub log_gradient: f64,
    /// `2kχ/|ξ|²`.
    pub twist: f64,
    /// `χ·dχ/dψ = −χλ`.
    pub source: f64,
    /// `2ψ_x/x`, the axisymmetric gradient term.
    pub axisymmetric: f64,
}

impl GsTerms {
    pub fn residual(&self) -> f64 {
        self.laplacian - self.log_gradient + self.twist + self.source
    }

    pub fn axisymmetric_residual(&self) -> f64 {
        self.laplacian - self.axisymmetric + self.source
    }

    pub fn scale(&self) -> f64 {
        [self.laplacian, self.log_gradient, self.twist, self.source]
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

/// `ψ_xx + ψ_x/x + (1+k²/x²)ψ_yy` and the remaining terms, from the
/// analytic `t` derivatives.
pub fn gs_terms(k: f64, co: &SectionCoefficients) -> GsTerms {
    let SectionCoefficients {
        x,
        t,
        h,
        dh,
        f,
        g,
        f_x,
        f_t,
        g_t,
        ..
    } = *co;
    let t56 = t.powf(-5.0 / 6.0);
    let t116 = t56 / t;
    let psi_x = t56 * f / 6.0;
    let psi_xx = (-(5.0 / 6.0) * t116 * f * f + t56 * (f_x + f * f_t)) / 6.0;
    let psi_yy = (-(5.0 / 6.0) * t116 * g + t56 * 0.5 * g_t) / 6.0;
    let chi = t56 * h / 6.0;
    let lambda = 5.0 * h / (6.0 * t) - dh;
    let xk = x * x + k * k;
    GsTerms {
        laplacian: psi_xx + psi_x / x + (1.0 + k * k / (x * x)) * psi_yy,
        log_gradient: 2.0 * (psi_x / (x + k * k / x)),
        twist: 2.0 * k * chi / xk,
        source: -chi * lambda,
        axisymmetric: 2.0 * (psi_x / x),
    }
}

fn sample_points(
    map: &CrossSectionMap,
    options: &BeltramiOptions,
    rng: &mut ChaCha8Rng,
    t_hi: f64,
) -> (Vec<(f64, f64, f64)>, usize) {
    let k = map.k;
    let mut out = Vec::with_capacity(options.points);
    let mut skipped = 0;
    for _ in 0..options.points {
        let x = rng.gen_range(0.96..1.04);
        let u: f64 = rng.gen();
        let phi = rng.gen_range(-0.05..0.05);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let located = map.t_min_of(x).and_then(|tm| {
            let lo = options.t_lo.max(1.5 * tm);
            if !(lo < t_hi) {
                return Err(Error::OutsideRegion { x, y: f64::NAN });
            }
            let t = lo * (t_hi / lo).powf(u);
            map.y_from_t(x, t)
        });
        match located {
            Ok(y) => out.push((x, phi, sign * y + k * phi)),
            Err(_) => skipped += 1,
        }
    }
    (out, skipped)
}

fn beltrami_components(
    ws: &Workspace,
    options: &BeltramiOptions,
    seed: u64,
    notes: &mut Vec<String>,
) -> Result<(Vec<Component>, usize, usize)> {
    let k = ws.config.k;
    let map = Arc::new(ws.fd_map(ws.config.branch)?);
    let sampler = FlowSampler::beltrami(map.clone(), options.t_floor)?;
    let t_hi = 0.5 * ws.profile.t_cap(ws.config.branch);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbe17);
    let (points, mut skipped) = sample_points(&map, options, &mut rng, t_hi);
    let [h0, h1] = options.hsteps;

    let mut coarse = Stats::default();
    let mut fine = Stats::default();
    let mut lambda = Stats::default();
    let mut decomposition = Stats::default();
    for &(rho, phi, z) in &points {
        let eval = || -> Result<(Alignment, Alignment, f64, f64)> {
            let s = sampler.sample_beltrami(rho, phi, z)?;
            let a0 = alignment_at(&sampler, &s, h0)?;
            let a1 = alignment_at(&sampler, &s, h1)?;
            let co = map.section_coefficients(rho, s.t)?;
            let dec = decomposition_residual(k, &s, &co)?;
            Ok((a0, a1, s.lambda, dec))
        };
        match eval() {
            Ok((a0, a1, lam, dec)) => {
                coarse.push(a0.alignment);
                fine.push(a1.alignment);
                lambda.push((a0.lambda_fd - lam) / lam);
                decomposition.push(dec);
            }
            Err(
                Error::OutsideRegion { .. } | Error::BelowFloor { .. } | Error::OutOfRange { .. },
            ) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let ratio = coarse.max() / fine.max();
    notes.push(format!(
        "alignment max {:.3e} (h = {h0:e}) -> {:.3e} (h = {h1:e}), ratio {ratio:.2}; t in [{:e}, {t_hi:.4e}]",
        coarse.max(),
        fine.max(),
        options.t_lo
    ));

    // λ_FD along one level set of t
    let mut level = Vec::new();
    let t_level = (options.t_lo * t_hi).sqrt();
    for i in 0..9 {
        let x = 0.98 + 0.005 * i as f64;
        let Ok(y) = map.y_from_t(x, t_level) else {
            continue;
        };
        let Ok(s) = sampler.sample_beltrami(x, 0.0, y) else {
            continue;
        };
        if let Ok(a) = alignment_at(&sampler, &s, h0) {
            level.push(a.lambda_fd);
        }
    }
    let spread = if level.len() >= 2 {
        let lo = level.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = level.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / hi.abs().max(lo.abs())
    } else {
        f64::INFINITY
    };
    notes.push(format!(
        "lambda_FD on t = {t_level:.3e}: {} points, relative spread {spread:.3e}",
        level.len()
    ));
    notes.push(format!(
        "decomposition factor 6(1+k^2)^(5/6) = {:.15}",
        6.0 * (1.0 + k * k).powf(5.0 / 6.0)
    ));

    let components = vec![
        Component::new("alignment", &coarse, ALIGNMENT_TOL),
        Component::new("alignment_fine", &fine, ALIGNMENT_TOL),
        Component::value(
            "alignment_ratio_shortfall",
            (MIN_RATIO / ratio).max(0.0),
            1.0,
        ),
        Component::new("lambda", &lambda, ALIGNMENT_TOL),
        Component::value("lambda_level_set", spread, ALIGNMENT_TOL),
        Component::new("decomposition", &decomposition, DECOMPOSITION_TOL),
    ];
    Ok((components, skipped, options.points))
}

/// GS residual relative to its largest term on an `(x, y)` grid.
fn gs_grid(
    map: &CrossSectionMap,
    options: &BeltramiOptions,
    mut visit: impl FnMut(&SectionCoefficients, GsTerms),
) -> Result<usize> {
    let [nx, ny] = options.gs_counts;
    let [x0, x1, y0, y1] = options.gs_extent;
    let mut skipped = 0;
    for i in 0..nx {
        let x = x0 + (x1 - x0) * i as f64 / (nx - 1) as f64;
        let slice = match map.slice(x) {
            Ok(s) => s,
            Err(Error::NoBoundaryRoot { .. }) => {
                skipped += ny;
                continue;
            }
            Err(e) => return Err(e),
        };
        for j in 0..ny {
            let y = y0 + (y1 - y0) * j as f64 / (ny - 1) as f64;
            let co = slice
                .t_from_y(y)
                .and_then(|t| map.section_coefficients(x, t));
            match co {
                Ok(co) if co.t > options.t_floor => visit(&co, gs_terms(map.k, &co)),
                Ok(_) | Err(Error::OutsideRegion { .. } | Error::OutOfRange { .. }) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(skipped)
}

/// Fourth-order 3D FD Laplacian of `ψ = t^{1/6}` in cylindrical coordinates.
fn fd_laplacian(sampler: &FlowSampler, rho: f64, phi: f64, z: f64, h: f64) -> Result<f64> {
    let psi =
        |r: f64, p: f64, zz: f64| -> Result<f64> { Ok(sampler.sample_beltrami(r, p, zz)?.psi) };
    let c = psi(rho, phi, z)?;
    let mut second = [0.0; 3];
    let mut first_rho = 0.0;
    for (axis, d2) in second.iter_mut().enumerate() {
        let at = |s: f64| match axis {
            0 => psi(rho + s, phi, z),
            1 => psi(rho, phi + s, z),
            _ => psi(rho, phi, z + s),
        };
        let (p2, p1, m1, m2) = (at(2.0 * h)?, at(h)?, at(-h)?, at(-2.0 * h)?);
        *d2 = (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h);
        if axis == 0 {
            first_rho = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
        }
    }
    Ok(second[0] + first_rho / rho + second[1] / (rho * rho) + second[2])
}

fn gs_components(
    ws: &Workspace,
    options: &BeltramiOptions,
    seed: u64,
    notes: &mut Vec<String>,
) -> Result<(Vec<Component>, usize, usize)> {
    let k = ws.config.k;
    let map = ws.map(ws.config.branch);
    let mut gs = Stats::default();
    let skipped = gs_grid(&map, options, |_, terms| {
        gs.push(terms.residual() / terms.scale());
    })?;
    let requested = options.gs_counts[0] * options.gs_counts[1];
    notes.push(format!(
        "GS relative residual on {}x{} grid: max {:.3e}, mean {:.3e}",
        options.gs_counts[0],
        options.gs_counts[1],
        gs.max(),
        gs.mean()
    ));

    // reduced Laplacian against a 3D stencil
    let fd_map = Arc::new(ws.fd_map(ws.config.branch)?);
    let sampler = FlowSampler::beltrami(fd_map.clone(), options.t_floor)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6a5);
    let t_hi = 0.5 * ws.profile.t_cap(ws.config.branch);
    let lap_opts = BeltramiOptions {
        points: options.laplacian_points,
        t_lo: options.t_lo.max(1e-3),
        ..options.clone()
    };
    let (points, _) = sample_points(&fd_map, &lap_opts, &mut rng, t_hi);
    let mut lap = Stats::default();
    for (rho, phi, z) in points {
        let Ok(s) = sampler.sample_beltrami(rho, phi, z) else {
            continue;
        };
        let Ok(fd) = fd_laplacian(&sampler, rho, phi, z, options.laplacian_h) else {
            continue;
        };
        let co = fd_map.section_coefficients(rho, s.t)?;
        let reduced = gs_terms(k, &co).laplacian;
        lap.push((fd - reduced) / reduced.abs().max(f64::MIN_POSITIVE));
    }
    notes.push(format!(
        "3D FD Laplacian vs reduced form at {} points (h = {:e}): max relative {:.3e}",
        lap.count(),
        options.laplacian_h,
        lap.max()
    ));

    // circle case: the helical equation collapses term by term onto the
    // axisymmetric one
    let circle_cfg = HelixConfig {
        k: 0.0,
        ..ws.config
    };
    let circle = Workspace::new(&circle_cfg)?;
    let circle_map = circle.map(circle_cfg.branch);
    let mut diff = Stats::default();
    let mut twist = Stats::default();
    gs_grid(&circle_map, options, |_, terms| {
        diff.push(terms.log_gradient - terms.axisymmetric);
        twist.push(terms.twist);
        diff.push(terms.residual() - terms.axisymmetric_residual());
    })?;
    notes.push(format!(
        "k = 0 term comparison on {} points: max difference {:e}",
        diff.count() / 2,
        diff.max()
    ));

    let components = vec![
        Component::new("gs", &gs, GS_TOL),
        Component::new(
            "laplacian_3d",
            &if lap.count() == 0 {
                [f64::INFINITY].into_iter().collect()
            } else {
                lap
            },
            LAPLACIAN_TOL,
        ),
        Component::new("circle_gradient_term", &diff, 0.0),
        Component::new("circle_twist_term", &twist, 0.0),
    ];
    Ok((components, skipped, requested))
}

/// Alignment, λ and decomposition checks (`Beltrami`), the Grad–Shafranov
/// residual with its cross-checks (`GradShafranov`), or both.
pub fn beltrami_gs_residuals(
    ws: &Workspace,
    options: &VerifyOptions,
    part: GsPart,
) -> Result<ResidualReport> {
    let opts = &options.beltrami;
    let mut notes = Vec::new();
    let mut components = Vec::new();
    let mut skipped = 0;
    let mut requested = 0;
    if part != GsPart::GradShafranov {
        let (c, s, r) = beltrami_components(ws, opts, options.seed, &mut notes)?;
        components.extend(c);
        skipped += s;
        requested += r;
    }
    if part != GsPart::Beltrami {
        let (c, s, r) = gs_components(ws, opts, options.seed, &mut notes)?;
        components.extend(c);
        skipped += s;
        requested += r;
    }
    let name = match part {
        GsPart::Both => "beltrami_gs",
        GsPart::Beltrami => "beltrami",
        GsPart::GradShafranov => "gs",
    };
    let [x0, x1, y0, y1] = opts.gs_extent;
    let grid = GridInfo {
        kind: "random 3D points (alignment); (x, y) grid (GS)".into(),
        counts: vec![opts.points, opts.gs_counts[0], opts.gs_counts[1]],
        lo: vec![x0, y0],
        hi: vec![x1, y1],
        spacing: opts.hsteps.to_vec(),
    };
    let mut report = ResidualReport::from_components(name, grid, components, skipped, requested);
    report.notes.splice(0..0, notes);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_product_is_right_handed() {
        // e_ρ × e_φ = e_z, stored as [ρ, z, φ]
        assert_eq!(cross_rzf([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]), [0.0, 1.0, 0.0]);
        // e_φ × e_z = e_ρ
        assert_eq!(cross_rzf([0.0, 0.0, 1.0], [0.0, 1.0, 0.0]), [1.0, 0.0, 0.0]);
        // e_z × e_ρ = e_φ
        assert_eq!(cross_rzf([0.0, 1.0, 0.0], [1.0, 0.0, 0.0]), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn circle_terms_coincide() {
        let co = SectionCoefficients {
            x: 1.02,
            t: 1e-3,
            h: 0.03,
            c: 1.01,
            s_fn: 0.0,
            dh: 1.2,
            dc: 0.3,
            f: 0.01,
            g: 0.002,
            f_x: 1.1,
            f_t: 0.2,
            g_x: 0.1,
            g_t: 1.4,
        };
        let t = gs_terms(0.0, &co);
        assert_eq!(t.residual(), t.axisymmetric_residual());
        assert_eq!(t.twist, 0.0);
        let t1 = gs_terms(1.0, &co);
        assert_ne!(t1.residual(), t1.axisymmetric_residual());
    }
}
