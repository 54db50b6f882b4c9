//! Vector-calculus identities on polynomial test fields, where every
//! derivative is exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{
    cross, curl, div, dot, eval_field, grad, jacobian, random_field, Poly, PolyField,
};
use super::{Component, GridInfo, ResidualReport, Stats};

const DEGREE: u32 = 3;
const TOL: f64 = 1e-12;

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// `(a·∇)b` from the Jacobian of `b`.
fn advect(a: [f64; 3], jb: &[[f64; 3]; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, row) in out.iter_mut().zip(jb) {
        *o = row[0] * a[0] + row[1] * a[1] + row[2] * a[2];
    }
    out
}

/// `‖lhs − rhs‖` over the largest term norm; zero when every term vanishes.
fn relative(diff: [f64; 3], terms: &[[f64; 3]]) -> f64 {
    let d = norm(diff);
    if d == 0.0 {
        return 0.0;
    }
    d / terms.iter().map(|t| norm(*t)).fold(0.0, f64::max)
}

/// `½∇|u|²` against `u × curl u + (u·∇)u` at `p`.
pub fn advection_identity_residual(u: &PolyField, p: [f64; 3]) -> f64 {
    let lhs = eval_field(&grad(&dot(u, u)), p).map(|v| 0.5 * v);
    let uv = eval_field(u, p);
    let w = eval_field(&curl(u), p);
    let uxw = [
        uv[1] * w[2] - uv[2] * w[1],
        uv[2] * w[0] - uv[0] * w[2],
        uv[0] * w[1] - uv[1] * w[0],
    ];
    let adv = advect(uv, &jacobian(u, p));
    let rhs = [uxw[0] + adv[0], uxw[1] + adv[1], uxw[2] + adv[2]];
    relative(sub(lhs, rhs), &[lhs, uxw, adv])
}

/// `curl(A × B)` against `(div B)A − (div A)B − [A, B]` at `p`, with
/// `[A, B] = (A·∇)B − (B·∇)A`.
pub fn curl_cross_residual(a: &PolyField, b: &PolyField, p: [f64; 3]) -> f64 {
    let lhs = eval_field(&curl(&cross(a, b)), p);
    let av = eval_field(a, p);
    let bv = eval_field(b, p);
    let da = div(a).eval(p);
    let db = div(b).eval(p);
    let a_grad_b = advect(av, &jacobian(b, p));
    let b_grad_a = advect(bv, &jacobian(a, p));
    let t1 = av.map(|v| db * v);
    let t2 = bv.map(|v| da * v);
    let bracket = sub(a_grad_b, b_grad_a);
    let rhs = sub(sub(t1, t2), bracket);
    relative(sub(lhs, rhs), &[lhs, t1, t2, a_grad_b, b_grad_a])
}

/// The helical Killing field `ξ = (−Y, X, k)`.
pub fn killing_field(k: f64) -> PolyField {
    [-&Poly::var(1), Poly::var(0), Poly::constant(k)]
}

/// Largest `|ξ × curl ξ − ∇|ξ|²|` component at `points`; exactly zero.
pub fn killing_identity_residual(k: f64, points: &[[f64; 3]]) -> f64 {
    let xi = killing_field(k);
    let lhs = cross(&xi, &curl(&xi));
    let rhs = grad(&dot(&xi, &xi));
    points
        .iter()
        .flat_map(|&p| {
            let d = sub(eval_field(&lhs, p), eval_field(&rhs, p));
            d.into_iter().map(f64::abs)
        })
        .fold(0.0, f64::max)
}

/// Both identities on `pairs` seeded random degree-3 fields at `points`
/// random locations in `[−1, 1]³`, plus the Killing identity and the
/// constant-field case.
pub fn vector_identity_residuals(seed: u64, pairs: usize, points: usize) -> ResidualReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adv = Stats::default();
    let mut cc = Stats::default();
    let mut locations = Vec::new();
    for _ in 0..pairs {
        let a = random_field(&mut rng, DEGREE);
        let b = random_field(&mut rng, DEGREE);
        for _ in 0..points {
            let p: [f64; 3] = [
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-1.0..=1.0),
            ];
            adv.push(advection_identity_residual(&a, p));
            adv.push(advection_identity_residual(&b, p));
            cc.push(curl_cross_residual(&a, &b, p));
            locations.push(p);
        }
    }

    let mut killing = 0.0f64;
    for k in [0.0, 0.5, 1.0, 2.0] {
        killing = killing.max(killing_identity_residual(k, &locations));
    }
    let constant = [
        Poly::constant(0.3),
        Poly::constant(-1.2),
        Poly::constant(2.0),
    ];
    let mut constant_lhs = 0.0f64;
    for p in locations.iter().take(10) {
        let g = eval_field(&grad(&dot(&constant, &constant)), *p);
        let uv = eval_field(&constant, *p);
        let w = eval_field(&curl(&constant), *p);
        let a = advect(uv, &jacobian(&constant, *p));
        constant_lhs = constant_lhs.max(norm(g)).max(norm(w)).max(norm(a));
    }

    let mut all = adv;
    all.merge(&cc);
    let grid = GridInfo {
        kind: "random points in [-1, 1]^3 per polynomial pair".into(),
        counts: vec![pairs, points],
        lo: vec![-1.0; 3],
        hi: vec![1.0; 3],
        spacing: vec![],
    };
    let mut report = ResidualReport::from_stats("identities", grid, &all, TOL, 0, pairs * points)
        .with_components(vec![
            Component::new("advection_identity", &adv, TOL),
            Component::new("curl_of_cross", &cc, TOL),
            Component::value("killing_exact", killing, 0.0),
            Component::value("constant_field_terms", constant_lhs, 0.0),
        ]);
    report.note(format!(
        "degree {DEGREE} fields, seed {seed}; advection max {:.3e}, curl-of-cross max {:.3e}",
        adv.max(),
        cc.max()
    ));
    report
}
