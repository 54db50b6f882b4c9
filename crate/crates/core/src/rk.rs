//! Dormand-Prince 5(4) with Hairer's continuous extension.

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
    /// Point where the solution is singular; steps are capped at
    /// `max_step_ratio` times the distance to it.
    pub singularity: Option<f64>,
    pub max_step_ratio: f64,
}

impl StepControl {
    pub fn with_tol(tol: f64) -> Self {
        StepControl {
            rtol: tol,
            atol: tol,
            h_init: None,
            h_min: 0.0,
            max_steps: 1_000_000,
            singularity: None,
            max_step_ratio: f64::INFINITY,
        }
    }
}

/// Why an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    /// The acceptance predicate rejected the next state.
    Rejected,
    StepUnderflow,
    MaxSteps,
}

/// One accepted step with the coefficients of its quartic interpolant.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub dt: f64,
    t_end: f64,
    pub y_end: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t_end
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        if t == self.t1() {
            return self.y_end;
        }
        let theta = (t - self.t0) / self.dt;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])))
        })
    }
}

#[derive(Debug, Clone)]
pub struct Integration<const N: usize> {
    pub steps: Vec<DenseStep<N>>,
    pub t_end: f64,
    pub y_end: [f64; N],
    pub outcome: Outcome,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

fn error_norm<const N: usize>(
    y0: &[f64; N],
    y1: &[f64; N],
    err: &[f64; N],
    ctl: &StepControl,
) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let sc = ctl.atol + ctl.rtol * y0[i].abs().max(y1[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(
    f: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    ctl: &StepControl,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
{
    let sc: [f64; N] = std::array::from_fn(|i| ctl.atol + ctl.rtol * y0[i].abs());
    let norm =
        |v: &[f64; N]| ((0..N).map(|i| (v[i] / sc[i]).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d0 = norm(y0);
    let d1 = norm(f0);
    let mut h = if d0 < 1e-10 || d1 < 1e-10 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = axpy(y0, dir * h, &[(1.0, f0)]);
    let d2 = match f(t0 + dir * h, &y1) {
        Some(f1) => {
            let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
            norm(&diff) / h
        }
        None => return h * 1e-3,
    };
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    h = (100.0 * h).min(h1);
    h
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`. `f` returns `None` where
/// the right-hand side is undefined; such steps are retried with a smaller
/// size. `accept` sees every candidate state and may end the integration
/// before that state is recorded.
pub fn integrate<const N: usize, F, A>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    ctl: StepControl,
    mut accept: A,
) -> Integration<N>
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
    A: FnMut(f64, &[f64; N]) -> bool,
{
    let mut steps = Vec::new();
    let mut t = t0;
    let mut y = y0;
    let finish = |steps, t, y, outcome| Integration {
        steps,
        t_end: t,
        y_end: y,
        outcome,
    };
    if t_end == t0 {
        return finish(steps, t, y, Outcome::Completed);
    }
    let dir = (t_end - t0).signum();
    let Some(mut k1) = f(t, &y) else {
        return finish(steps, t, y, Outcome::StepUnderflow);
    };
    let mut h = ctl
        .h_init
        .unwrap_or_else(|| initial_step(&mut f, t0, &y0, &k1, dir, &ctl));
    let span = (t_end - t0).abs();
    let h_floor = ctl.h_min.max(16.0 * f64::EPSILON * t0.abs().max(span));
    let mut last_rejected = false;

    for _ in 0..ctl.max_steps {
        let remaining = (t_end - t).abs();
        if remaining <= 1e-15 * t_end.abs().max(span) {
            return finish(steps, t_end, y, Outcome::Completed);
        }
        if let Some(ts) = ctl.singularity {
            h = h.min(ctl.max_step_ratio * (t - ts).abs());
        }
        if h >= remaining {
            h = remaining;
        }
        if h < h_floor {
            return finish(steps, t, y, Outcome::StepUnderflow);
        }
        let hs = dir * h;
        let stages = (|| {
            let k2 = f(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]))?;
            let k3 = f(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(
                t + C4 * hs,
                &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            )?;
            let k5 = f(
                t + C5 * hs,
                &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = f(
                t + hs,
                &axpy(
                    &y,
                    hs,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            )?;
            let y1 = axpy(
                &y,
                hs,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(t + hs, &y1)?;
            Some((k2, k3, k4, k5, k6, k7, y1))
        })();
        let Some((_k2, k3, k4, k5, k6, k7, y1)) = stages else {
            h *= 0.25;
            last_rejected = true;
            continue;
        };
        let err: [f64; N] = std::array::from_fn(|i| {
            hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let en = error_norm(&y, &y1, &err, &ctl);
        if !en.is_finite() {
            h *= 0.25;
            last_rejected = true;
            continue;
        }
        if en <= 1.0 {
            let t1 = if h == remaining { t_end } else { t + hs };
            if !accept(t1, &y1) {
                return finish(steps, t, y, Outcome::Rejected);
            }
            let rc1 = y;
            let rc2: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
            let rc3: [f64; N] = std::array::from_fn(|i| hs * k1[i] - rc2[i]);
            let rc4: [f64; N] = std::array::from_fn(|i| rc2[i] - hs * k7[i] - rc3[i]);
            let rc5: [f64; N] = std::array::from_fn(|i| {
                hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
            });
            steps.push(DenseStep {
                t0: t,
                dt: t1 - t,
                t_end: t1,
                y_end: y1,
                rcont: [rc1, rc2, rc3, rc4, rc5],
            });
            t = t1;
            y = y1;
            k1 = k7;
            let mut fac = 0.9 * en.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
        } else {
            h *= (0.9 * en.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    finish(steps, t, y, Outcome::MaxSteps)
}
