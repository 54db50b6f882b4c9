//! Puiseux expansion of the profile functions `h`, `c` about the singular
//! point `t = 0`.
//!
//! Both functions are power series in `s = ±√t`. Substituting `t = s²` and
//! `d/dt = (2s)⁻¹ d/ds` into the profile equations and clearing the vanishing
//! denominator `hS + 18kt²` gives two polynomial identities in `s`:
//!
//! ```text
//! E₁ = h'(s)·2(1+k²)(hS + 18kt²) − 2s·[(k²+c)S + 6t(1+k²)(kh + 6t)] = 0
//! E₂ = c'(s)·(hS + 18kt²)        − 2s·[kS + 6th(1+k²)]              = 0
//! S  = h²(1+k²) − 3t(c + k²)
//! ```
//!
//! The coefficient of `s³` fixes the leading balance `a₁² = 1`, `a₁c₁ = 2k`.
//! For `n ≥ 2` the coefficient of `s^{n+2}` in `(E₁, E₂)` is affine in the
//! unknown pair `(aₙ, cₙ)`, so each order is a 2×2 linear solve.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Truncation order used when callers do not ask for a specific one.
pub const DEFAULT_ORDER: usize = 12;

/// Field in which series coefficients are computed.
pub trait Coefficient:
    Clone + PartialEq + Num + Neg<Output = Self> + fmt::Display + fmt::Debug
{
    fn from_int(v: i64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coefficient for f64 {
    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coefficient for BigRational {
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Truncated coefficients `h = Σ aᵢ sⁱ`, `c = Σ cᵢ sⁱ` for `i = 0..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPair<T = f64> {
    pub k: T,
    pub h_coeffs: Vec<T>,
    pub c_coeffs: Vec<T>,
}

/// Values of the profile functions at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub h: f64,
    pub c: f64,
    /// `S = h²(1+k²) − 3t(c+k²)` with `t = s²`.
    pub s_fn: f64,
}

impl<T> SeriesPair<T> {
    pub fn order(&self) -> usize {
        self.h_coeffs.len() - 1
    }
}

impl<T: Coefficient> SeriesPair<T> {
    pub fn to_f64(&self) -> SeriesPair<f64> {
        SeriesPair {
            k: self.k.to_f64(),
            h_coeffs: self.h_coeffs.iter().map(Coefficient::to_f64).collect(),
            c_coeffs: self.c_coeffs.iter().map(Coefficient::to_f64).collect(),
        }
    }

    /// Copy truncated to a lower order.
    pub fn truncated(&self, order: usize) -> SeriesPair<T> {
        let len = (order + 1).min(self.h_coeffs.len());
        SeriesPair {
            k: self.k.clone(),
            h_coeffs: self.h_coeffs[..len].to_vec(),
            c_coeffs: self.c_coeffs[..len].to_vec(),
        }
    }
}

fn mul_trunc<T: Coefficient>(a: &[T], b: &[T], len: usize) -> Vec<T> {
    let mut out = vec![T::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

/// Multiplies a truncated series by `s^shift`.
fn shift<T: Coefficient>(a: &[T], shift: usize, len: usize) -> Vec<T> {
    let mut out = vec![T::zero(); len];
    for (i, x) in a.iter().enumerate() {
        if i + shift < len {
            out[i + shift] = x.clone();
        }
    }
    out
}

fn derivative<T: Coefficient>(a: &[T], len: usize) -> Vec<T> {
    let mut out = vec![T::zero(); len];
    for (i, slot) in out.iter_mut().enumerate() {
        if let Some(x) = a.get(i + 1) {
            *slot = x.clone() * T::from_int(i as i64 + 1);
        }
    }
    out
}

fn padded<T: Coefficient>(a: &[T], len: usize) -> Vec<T> {
    let mut out: Vec<T> = a.iter().take(len).cloned().collect();
    out.resize(len, T::zero());
    out
}

/// Coefficients of `s⁰..s^{len-1}` in the cleared equations `(E₁, E₂)`.
pub(crate) fn cleared_series<T: Coefficient>(
    k: &T,
    h: &[T],
    c: &[T],
    len: usize,
) -> (Vec<T>, Vec<T>) {
    let one = T::one();
    let k2 = k.clone() * k.clone();
    let k2p1 = one.clone() + k2.clone();
    let h = padded(h, len);
    let c = padded(c, len);

    // t = s², t² = s⁴
    let h2 = mul_trunc(&h, &h, len);
    let c_plus_k2: Vec<T> = c
        .iter()
        .enumerate()
        .map(|(i, x)| {
            if i == 0 {
                x.clone() + k2.clone()
            } else {
                x.clone()
            }
        })
        .collect();
    let three_t_ck2 = shift(&c_plus_k2, 2, len);
    let s_fn: Vec<T> = h2
        .iter()
        .zip(&three_t_ck2)
        .map(|(a, b)| k2p1.clone() * a.clone() - T::from_int(3) * b.clone())
        .collect();

    let mut denom = mul_trunc(&h, &s_fn, len);
    if len > 4 {
        denom[4] = denom[4].clone() + T::from_int(18) * k.clone();
    }

    // (k²+c)S + 6t(1+k²)(kh + 6t)
    let kh_6t: Vec<T> = h
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let v = k.clone() * x.clone();
            if i == 2 {
                v + T::from_int(6)
            } else {
                v
            }
        })
        .collect();
    let first = mul_trunc(&c_plus_k2, &s_fn, len);
    let second = shift(&kh_6t, 2, len);
    let num_h: Vec<T> = first
        .iter()
        .zip(&second)
        .map(|(a, b)| a.clone() + T::from_int(6) * k2p1.clone() * b.clone())
        .collect();

    // kS + 6th(1+k²)
    let th = shift(&h, 2, len);
    let num_c: Vec<T> = s_fn
        .iter()
        .zip(&th)
        .map(|(a, b)| k.clone() * a.clone() + T::from_int(6) * k2p1.clone() * b.clone())
        .collect();

    let dh = derivative(&h, len);
    let dc = derivative(&c, len);
    let lhs_h = mul_trunc(&dh, &denom, len);
    let lhs_c = mul_trunc(&dc, &denom, len);
    let rhs_h = shift(&num_h, 1, len);
    let rhs_c = shift(&num_c, 1, len);

    let two = T::from_int(2);
    let e1 = lhs_h
        .iter()
        .zip(&rhs_h)
        .map(|(l, r)| two.clone() * k2p1.clone() * l.clone() - two.clone() * r.clone())
        .collect();
    let e2 = lhs_c
        .iter()
        .zip(&rhs_c)
        .map(|(l, r)| l.clone() - two.clone() * r.clone())
        .collect();
    (e1, e2)
}

/// Puiseux coefficients of the profile functions through `order`, normalized
/// by `a₁ = +1`. The `a₁ = −1` family is the same series evaluated at `−s`.
pub fn expand_profile_series<T: Coefficient>(k: T, order: usize) -> Result<SeriesPair<T>> {
    if order < 1 {
        return Err(Error::InvalidConfig("series order must be >= 1".into()));
    }
    if k.to_f64() < 0.0 {
        return Err(Error::InvalidConfig(format!("k must be >= 0, got {k}")));
    }
    let mut h = vec![T::zero(); order + 1];
    let mut c = vec![T::zero(); order + 1];
    c[0] = T::one();
    h[1] = T::one();

    // Order 1: E₁ at s³ must vanish for a₁ = 1; E₂ at s³ is affine in c₁.
    let probe_c1 = |c1: T| {
        let mut cc = c.clone();
        cc[1] = c1;
        cleared_series(&k, &h, &cc, 4)
    };
    let (e1_0, e2_0) = probe_c1(T::zero());
    let scale = e2_0
        .iter()
        .chain(&e1_0)
        .map(|x| x.to_f64().abs())
        .fold(1.0, f64::max);
    if e1_0[3].to_f64().abs() > 1e-12 * scale {
        return Err(Error::DegenerateLeadingBalance);
    }
    let (_, e2_1) = probe_c1(T::one());
    let slope = e2_1[3].clone() - e2_0[3].clone();
    if slope.is_zero() {
        return Err(Error::SingularSystem { order: 1 });
    }
    c[1] = -(e2_0[3].clone()) / slope;

    for n in 2..=order {
        let len = n + 3;
        let probe = |an: T, cn: T| {
            let mut hh = h[..=n].to_vec();
            let mut cc = c[..=n].to_vec();
            hh[n] = an;
            cc[n] = cn;
            let (e1, e2) = cleared_series(&k, &hh, &cc, len);
            (e1[n + 2].clone(), e2[n + 2].clone())
        };
        let (f1, f2) = probe(T::zero(), T::zero());
        let (a1, a2) = probe(T::one(), T::zero());
        let (b1, b2) = probe(T::zero(), T::one());
        // [m11 m12; m21 m22]·(aₙ, cₙ) = −(f1, f2)
        let m11 = a1 - f1.clone();
        let m21 = a2 - f2.clone();
        let m12 = b1 - f1.clone();
        let m22 = b2 - f2.clone();
        let det = m11.clone() * m22.clone() - m12.clone() * m21.clone();
        if det.is_zero() || !det.to_f64().is_finite() {
            return Err(Error::SingularSystem { order: n });
        }
        h[n] = (m12 * f2.clone() - m22 * f1.clone()) / det.clone();
        c[n] = (m21 * f1 - m11 * f2) / det;
    }

    Ok(SeriesPair {
        k,
        h_coeffs: h,
        c_coeffs: c,
    })
}

fn horner(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

fn horner_derivative(coeffs: &[f64], s: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, &a)| acc * s + a * i as f64)
}

impl SeriesPair<f64> {
    /// Horner evaluation of both truncated series at the signed abscissa `s`.
    pub fn eval(&self, s: f64) -> SeriesValue {
        let h = horner(&self.h_coeffs, s);
        let c = horner(&self.c_coeffs, s);
        let k = self.k;
        let t = s * s;
        SeriesValue {
            h,
            c,
            s_fn: h * h * (1.0 + k * k) - 3.0 * t * (c + k * k),
        }
    }

    /// `(dh/ds, dc/ds)` of the truncated series.
    pub fn eval_ds(&self, s: f64) -> (f64, f64) {
        (
            horner_derivative(&self.h_coeffs, s),
            horner_derivative(&self.c_coeffs, s),
        )
    }

    /// Raw values of the cleared equations `(E₁, E₂)` and their clearing
    /// factors `(2(1+k²)D, D)` with `D = hS + 18kt²`.
    pub fn cleared_residuals(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        let k = self.k;
        let k2p1 = 1.0 + k * k;
        let t = s * s;
        let SeriesValue { h, c, s_fn } = self.eval(s);
        let (dh, dc) = self.eval_ds(s);
        let denom = h * s_fn + 18.0 * k * t * t;
        let num_h = (k * k + c) * s_fn + 6.0 * t * k2p1 * (k * h + 6.0 * t);
        let num_c = k * s_fn + 6.0 * t * h * k2p1;
        let e1 = dh * 2.0 * k2p1 * denom - 2.0 * s * num_h;
        let e2 = dc * denom - 2.0 * s * num_c;
        ([e1, e2], [2.0 * k2p1 * denom, denom])
    }
}

/// Largest residual of the profile equations, written for `dh/ds` and
/// `dc/ds`, over the sample abscissae. This is each cleared equation divided
/// by its clearing factor and scales as `O(s^N)` for truncation order `N`.
pub fn series_ode_residual(series: &SeriesPair<f64>, s_samples: &[f64]) -> Result<f64> {
    if s_samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut worst = 0.0f64;
    for &s in s_samples {
        if s == 0.0 || !s.is_finite() {
            return Err(Error::Domain(format!(
                "series residual sample s = {s} is the singular point or non-finite"
            )));
        }
        let (e, factor) = series.cleared_residuals(s);
        for i in 0..2 {
            worst = worst.max((e[i] / factor[i]).abs());
        }
    }
    Ok(worst)
}

/// Parses `"p/q"`, an integer, or a decimal such as `"0.25"` / `"2.5e-1"`
/// into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::InvalidConfig(format!("cannot read {text:?} as an exact rational"));
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (
            &text[..pos],
            text[pos + 1..].parse::<i32>().map_err(|_| bad())?,
        ),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|ch| ch.is_ascii_digit())
    {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}
