//! Sparse polynomials in three Cartesian variables, with exact derivatives.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<[u32; 3], f64>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: f64) -> Poly {
        Poly::monomial(c, [0, 0, 0])
    }

    /// The coordinate `X`, `Y` or `Z`.
    pub fn var(axis: usize) -> Poly {
        let mut e = [0; 3];
        e[axis] = 1;
        Poly::monomial(1.0, e)
    }

    pub fn monomial(c: f64, exponents: [u32; 3]) -> Poly {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(exponents, c);
        }
        Poly { terms }
    }

    /// All monomials of total degree `≤ degree`, coefficients uniform in `[−1, 1]`.
    pub fn random<R: Rng>(rng: &mut R, degree: u32) -> Poly {
        let mut terms = BTreeMap::new();
        for a in 0..=degree {
            for b in 0..=degree - a {
                for c in 0..=degree - a - b {
                    terms.insert([a, b, c], rng.gen_range(-1.0..=1.0));
                }
            }
        }
        Poly { terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e[0] + e[1] + e[2])
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|&c| c == 0.0)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
        }
    }

    /// `∂/∂(axis)`.
    pub fn deriv(&self, axis: usize) -> Poly {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[axis] == 0 {
                continue;
            }
            let mut f = *e;
            f[axis] -= 1;
            *terms.entry(f).or_insert(0.0) += c * e[axis] as f64;
        }
        Poly { terms }
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32) * p[2].powi(e[2] as i32)
            })
            .sum()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (e, c) in &rhs.terms {
            *terms.entry(*e).or_insert(0.0) += c;
        }
        Poly { terms }
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut terms = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                *terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        Poly { terms }
    }
}

/// Polynomial vector field in Cartesian components.
pub type PolyField = [Poly; 3];

pub fn random_field<R: Rng>(rng: &mut R, degree: u32) -> PolyField {
    [
        Poly::random(rng, degree),
        Poly::random(rng, degree),
        Poly::random(rng, degree),
    ]
}

pub fn dot(a: &PolyField, b: &PolyField) -> Poly {
    &(&(&a[0] * &b[0]) + &(&a[1] * &b[1])) + &(&a[2] * &b[2])
}

pub fn cross(a: &PolyField, b: &PolyField) -> PolyField {
    [
        &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
        &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
        &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
    ]
}

pub fn grad(f: &Poly) -> PolyField {
    [f.deriv(0), f.deriv(1), f.deriv(2)]
}

pub fn curl(a: &PolyField) -> PolyField {
    [
        &a[2].deriv(1) - &a[1].deriv(2),
        &a[0].deriv(2) - &a[2].deriv(0),
        &a[1].deriv(0) - &a[0].deriv(1),
    ]
}

pub fn div(a: &PolyField) -> Poly {
    &(&a[0].deriv(0) + &a[1].deriv(1)) + &a[2].deriv(2)
}

pub fn eval_field(a: &PolyField, p: [f64; 3]) -> [f64; 3] {
    [a[0].eval(p), a[1].eval(p), a[2].eval(p)]
}

/// `J[i][j] = ∂a_i/∂x_j` at `p`.
pub fn jacobian(a: &PolyField, p: [f64; 3]) -> [[f64; 3]; 3] {
    let mut j = [[0.0; 3]; 3];
    for (row, comp) in j.iter_mut().zip(a) {
        for (axis, v) in row.iter_mut().enumerate() {
            *v = comp.deriv(axis).eval(p);
        }
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn arithmetic() {
        let x = Poly::var(0);
        let y = Poly::var(1);
        let p = &(&x * &x) + &(&y.scale(3.0) * &x);
        assert_eq!(p.eval([2.0, 5.0, 7.0]), 4.0 + 30.0);
        assert_eq!(p.deriv(0).eval([2.0, 5.0, 0.0]), 4.0 + 15.0);
        assert_eq!(p.deriv(1).eval([2.0, 5.0, 0.0]), 6.0);
        assert!(p.deriv(2).is_zero());
        assert_eq!(p.degree(), 2);
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn random_has_all_monomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Poly::random(&mut rng, 3);
        assert_eq!(p.terms.len(), 20);
        assert!(p.terms.values().all(|c| (-1.0..=1.0).contains(c)));
    }

    #[test]
    fn vector_calculus() {
        // a = (−Y, X, 0): curl a = (0, 0, 2), div a = 0
        let a = [-&Poly::var(1), Poly::var(0), Poly::zero()];
        let c = curl(&a);
        assert_eq!(eval_field(&c, [0.3, -0.2, 0.9]), [0.0, 0.0, 2.0]);
        assert!(div(&a).is_zero());
        let g = grad(&dot(&a, &a));
        assert_eq!(eval_field(&g, [0.5, 0.25, 0.0]), [1.0, 0.5, 0.0]);
        let j = jacobian(&a, [1.0, 1.0, 1.0]);
        assert_eq!(j, [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        let x = cross(&a, &c);
        assert_eq!(eval_field(&x, [0.5, 0.25, 0.0]), [1.0, 0.5, 0.0]);
    }
}
