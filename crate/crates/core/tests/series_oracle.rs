//! Independent exact oracle for the Puiseux coefficients: substitute the
//! truncated series into the cleared profile equations with polynomial
//! arithmetic over the rationals and inspect the low-order coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use helixflow::series::{expand_profile_series, parse_rational};

type Poly = Vec<BigRational>;

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn add(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            a.get(i).cloned().unwrap_or_else(BigRational::zero)
                + b.get(i).cloned().unwrap_or_else(BigRational::zero)
        })
        .collect()
}

fn scale(a: &Poly, c: &BigRational) -> Poly {
    a.iter().map(|v| v * c).collect()
}

fn sub(a: &Poly, b: &Poly) -> Poly {
    add(a, &scale(b, &int(-1)))
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn deriv(a: &Poly) -> Poly {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, v)| v * int(i as i64))
        .collect()
}

/// `c·s^n`
fn mono(c: BigRational, n: usize) -> Poly {
    let mut p = vec![BigRational::zero(); n + 1];
    p[n] = c;
    p
}

/// Residual polynomials of the profile equations written in `s` with
/// `t = s²`, cleared of denominators:
/// `2(1+k²)(hS + 18k s⁴) h' − 2s[(k²+c)S + 6s²(1+k²)(kh + 6s²)]` and
/// `(hS + 18k s⁴) c' − 2s[kS + 6s²(1+k²)h]`, with `S = h²(1+k²) − 3s²(c+k²)`.
fn cleared_residuals(k: &BigRational, h: &Poly, c: &Poly) -> (Poly, Poly) {
    let k2 = k * k;
    let q = BigRational::one() + &k2;
    let s = mono(BigRational::one(), 1);
    let s2 = mono(BigRational::one(), 2);
    let s4 = mono(BigRational::one(), 4);
    let big_s = sub(
        &scale(&mul(h, h), &q),
        &scale(&mul(&s2, &add(c, &vec![k2.clone()])), &int(3)),
    );
    let denom = add(&mul(h, &big_s), &scale(&s4, &(int(18) * k)));
    let num_h = add(
        &mul(&add(c, &vec![k2.clone()]), &big_s),
        &scale(
            &mul(&s2, &add(&scale(h, k), &scale(&s2, &int(6)))),
            &(int(6) * &q),
        ),
    );
    let e1 = sub(
        &scale(&mul(&denom, &deriv(h)), &(int(2) * &q)),
        &scale(&mul(&s, &num_h), &int(2)),
    );
    let num_c = add(&scale(&big_s, k), &scale(&mul(&s2, h), &(int(6) * &q)));
    let e2 = sub(&mul(&denom, &deriv(c)), &scale(&mul(&s, &num_c), &int(2)));
    (e1, e2)
}

fn lowest_nonzero(p: &Poly) -> Option<usize> {
    p.iter().position(|v| !v.is_zero())
}

const KS: [&str; 6] = ["0", "1", "1/2", "2", "3", "2/7"];

#[test]
fn truncated_series_solves_the_equations_through_order_n_plus_two() {
    for k_text in KS {
        let k = parse_rational(k_text).unwrap();
        for n in [2usize, 4, 6, 8] {
            let series = expand_profile_series(k.clone(), n).unwrap();
            let (e1, e2) = cleared_residuals(&k, &series.h_coeffs, &series.c_coeffs);
            for (name, e) in [("h", &e1), ("c", &e2)] {
                let low = lowest_nonzero(e).unwrap_or(usize::MAX);
                assert!(
                    low >= n + 3,
                    "k={k_text} N={n}: {name} residual has s^{low} coefficient {}",
                    e[low]
                );
            }
        }
    }
}

#[test]
fn oracle_detects_a_wrong_coefficient() {
    let k = int(1);
    for j in 1..=4 {
        let series = expand_profile_series(k.clone(), 4).unwrap();
        let mut h = series.h_coeffs.clone();
        h[j] += BigRational::new(BigInt::from(1), BigInt::from(1000));
        let (e1, e2) = cleared_residuals(&k, &h, &series.c_coeffs);
        let low = lowest_nonzero(&e1).min(lowest_nonzero(&e2)).unwrap();
        assert!(low < 4 + 3, "perturbing h_{j} went unnoticed");
        let mut c = series.c_coeffs.clone();
        c[j] -= BigRational::new(BigInt::from(1), BigInt::from(1000));
        let (e1, e2) = cleared_residuals(&k, &series.h_coeffs, &c);
        let low = lowest_nonzero(&e1).min(lowest_nonzero(&e2)).unwrap();
        assert!(low < 4 + 3, "perturbing c_{j} went unnoticed");
    }
}

#[test]
fn higher_order_derivation_extends_lower_order() {
    for k_text in KS {
        let k = parse_rational(k_text).unwrap();
        let short = expand_profile_series(k.clone(), 4).unwrap();
        let long = expand_profile_series(k, 6).unwrap();
        assert_eq!(short.h_coeffs[..], long.h_coeffs[..5], "k={k_text}");
        assert_eq!(short.c_coeffs[..], long.c_coeffs[..5], "k={k_text}");
    }
}

#[test]
fn float_residual_scales_with_truncation_order() {
    // residual ~ s^N: one decade in s gains N decades
    for k in [0.0, 0.5, 1.0, 3.0] {
        let full = expand_profile_series(k, 12).unwrap();
        for n in [2usize, 4] {
            let s = full.truncated(n);
            let r2 = helixflow::series_ode_residual(&s, &[1e-2]).unwrap();
            let r3 = helixflow::series_ode_residual(&s, &[1e-3]).unwrap();
            let slope = (r2 / r3).log10();
            assert!((slope - n as f64).abs() < 0.1, "k={k} N={n}: slope {slope}");
        }
    }
}
