//! The base field K = ℚ(ζ)(t₁, …, tₙ) as reduced quotients of polynomials.

use std::fmt;

use crate::gcd::gcd;
use crate::poly::{Field, Mono, Ring, ScalarPoly};
use crate::scalar::Scalar;

/// `num / den` with `gcd(num, den) = 1` and `den` monic, so equality is structural.
#[derive(Clone, PartialEq)]
pub struct RatFun {
    pub num: ScalarPoly,
    pub den: ScalarPoly,
}

impl RatFun {
    pub fn zero() -> Self {
        RatFun { num: ScalarPoly::zero(), den: ScalarPoly::from_int(1) }
    }

    pub fn one() -> Self {
        Self::from_scalar(Scalar::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_scalar(Scalar::from_int(n))
    }

    pub fn from_scalar(c: Scalar) -> Self {
        RatFun { num: ScalarPoly::constant(c), den: ScalarPoly::from_int(1) }
    }

    pub fn from_poly(p: ScalarPoly) -> Self {
        RatFun { num: p, den: ScalarPoly::from_int(1) }
    }

    /// The variable tᵢ (zero-based index).
    pub fn var(i: usize) -> Self {
        Self::from_poly(ScalarPoly::var_s(i))
    }

    pub fn zeta() -> Self {
        Self::from_scalar(Scalar::zeta())
    }

    /// Builds and reduces `num / den`; `None` when `den` is zero.
    pub fn new(num: ScalarPoly, den: ScalarPoly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(Self::reduce(num, den))
    }

    fn reduce(num: ScalarPoly, den: ScalarPoly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if den.is_constant() {
            let c = den.lc().unwrap().inv().unwrap();
            return RatFun { num: num.scale(&c), den: ScalarPoly::from_int(1) };
        }
        let (num, den) = if den.len() == 1 {
            let m = den.terms[0].0.gcd(&num.monomial_content());
            (num.div_mono(&m), den.div_mono(&m))
        } else {
            let g = gcd(&num, &den);
            if g.is_constant() {
                (num, den)
            } else {
                (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
            }
        };
        let c = den.lc().unwrap().inv().unwrap();
        RatFun { num: num.scale(&c), den: den.scale(&c) }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_constant() && self.num.is_constant() && self.num.lc().is_some_and(|c| c.is_one())
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_constant()
    }

    /// The value when this is a constant of ℚ(ζ).
    pub fn as_scalar(&self) -> Option<Scalar> {
        if self.num.is_zero() {
            return Some(Scalar::zero());
        }
        if self.num.is_constant() && self.den.is_constant() {
            Some(self.num.lc().unwrap().clone())
        } else {
            None
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            if self.den.is_constant() {
                return RatFun { num: self.num.add(&o.num), den: self.den.clone() };
            }
            return Self::reduce(self.num.add(&o.num), self.den.clone());
        }
        // a/1 + c/d = (ad + c)/d is already reduced
        if self.den.is_constant() {
            return RatFun { num: self.num.mul(&o.den).add(&o.num), den: o.den.clone() };
        }
        if o.den.is_constant() {
            return RatFun { num: o.num.mul(&self.den).add(&self.num), den: self.den.clone() };
        }
        let g = gcd(&self.den, &o.den);
        if g.is_constant() {
            // coprime denominators: no common factor can appear
            let num = self.num.mul(&o.den).add(&o.num.mul(&self.den));
            let den = self.den.mul(&o.den);
            return RatFun { num, den };
        }
        let bg = self.den.div_exact(&g).unwrap();
        let dg = o.den.div_exact(&g).unwrap();
        let num = self.num.mul(&dg).add(&o.num.mul(&bg));
        Self::reduce(num, self.den.mul(&dg))
    }

    pub fn neg(&self) -> Self {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        if self.den.is_constant() && o.den.is_constant() {
            return RatFun { num: self.num.mul(&o.num), den: self.den.clone() };
        }
        let (a, d) = cancel(&self.num, &o.den);
        let (c, b) = cancel(&o.num, &self.den);
        RatFun { num: a.mul(&c), den: b.mul(&d) }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RatFun { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let c = self.num.lc().unwrap().inv().unwrap();
        Some(RatFun { num: self.den.scale(&c), den: self.num.scale(&c) })
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.mul(&i))
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inv().expect("inverse of zero") } else { self.clone() };
        let e = e.unsigned_abs() as u32;
        RatFun {
            num: base.num.pow(e, &Scalar::one()),
            den: base.den.pow(e, &Scalar::one()),
        }
    }

    pub fn total_degree(&self) -> i64 {
        self.num.total_degree() - self.den.total_degree()
    }

    /// Degree of numerator minus degree of denominator in the grading where
    /// variable `heavy` has weight `w` and the others weight one.
    pub fn weighted_degree(&self, heavy: usize, w: i64) -> i64 {
        weighted(&self.num, heavy, w) - weighted(&self.den, heavy, w)
    }

    /// Evaluates at a point of ℚ(ζ)ⁿ; `None` when the denominator vanishes there.
    pub fn eval(&self, pt: &[Scalar]) -> Option<Scalar> {
        let d = self.den.eval(pt);
        if d.is_zero() {
            return None;
        }
        self.num.eval(pt).div(&d)
    }

    /// Replaces ζ by ζ² in all coefficients.
    pub fn conj(&self) -> Self {
        Self::reduce(self.num.conj(), self.den.conj())
    }

    /// Substitutes rational functions for the variables.
    pub fn substitute(&self, vals: &[RatFun]) -> RatFun {
        let n = eval_poly_rat(&self.num, vals);
        let d = eval_poly_rat(&self.den, vals);
        n.div(&d).expect("substituted denominator vanishes")
    }

    pub fn arity(&self) -> usize {
        self.num.arity().max(self.den.arity())
    }
}

fn weighted(p: &ScalarPoly, heavy: usize, w: i64) -> i64 {
    p.terms
        .iter()
        .map(|(m, _)| m.degree() as i64 + (w - 1) * m.0[heavy] as i64)
        .max()
        .unwrap_or(0)
}

fn eval_poly_rat(p: &ScalarPoly, vals: &[RatFun]) -> RatFun {
    let mut acc = RatFun::zero();
    for (m, c) in &p.terms {
        let mut t = RatFun::from_scalar(c.clone());
        for (v, &e) in m.0.iter().enumerate() {
            if e > 0 {
                t = t.mul(&vals[v].pow(e as i64));
            }
        }
        acc = acc.add(&t);
    }
    acc
}

/// Removes the common factor of `a` and `b`.
fn cancel(a: &ScalarPoly, b: &ScalarPoly) -> (ScalarPoly, ScalarPoly) {
    if b.is_constant() || a.is_constant() {
        return (a.clone(), b.clone());
    }
    if b.len() == 1 || a.len() == 1 {
        let m: Mono = a.monomial_content().gcd(&b.monomial_content());
        return (a.div_mono(&m), b.div_mono(&m));
    }
    let g = gcd(a, b);
    if g.is_constant() {
        (a.clone(), b.clone())
    } else {
        (a.div_exact(&g).unwrap(), b.div_exact(&g).unwrap())
    }
}

impl Ring for RatFun {
    fn zero_like(&self) -> Self {
        RatFun::zero()
    }
    fn one_like(&self) -> Self {
        RatFun::one()
    }
    fn is_zero(&self) -> bool {
        RatFun::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        RatFun::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        RatFun::sub(self, o)
    }
    fn neg(&self) -> Self {
        RatFun::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        RatFun::mul(self, o)
    }
    fn mul_int(&self, n: i64) -> Self {
        self.scale(&Scalar::from_int(n))
    }
    fn is_one(&self) -> bool {
        RatFun::is_one(self)
    }
}

impl Field for RatFun {
    fn inv(&self) -> Option<Self> {
        RatFun::inv(self)
    }
    fn cost(&self) -> usize {
        self.num.len() + self.den.len()
    }
}

fn fmt_poly(p: &ScalarPoly, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    for (i, (m, c)) in p.terms.iter().enumerate() {
        let neg = c.is_rational() && c.re < num_rational::BigRational::from_integer(0.into());
        let c_abs = if neg { c.neg() } else { c.clone() };
        if i > 0 {
            write!(f, "{}", if neg { " - " } else { " + " })?;
        } else if neg {
            write!(f, "-")?;
        }
        let mut first = true;
        if !c_abs.is_one() || m.is_one() {
            write!(f, "{}", c_abs)?;
            first = false;
        }
        for (v, &e) in m.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "t{}", v + 1)?;
            } else {
                write!(f, "t{}^{}", v + 1, e)?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() {
            return fmt_poly(&self.num, f);
        }
        write!(f, "(")?;
        fmt_poly(&self.num, f)?;
        write!(f, ")/(")?;
        fmt_poly(&self.den, f)?;
        write!(f, ")")
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(i: usize) -> RatFun {
        RatFun::var(i)
    }

    #[test]
    fn reduces_to_lowest_terms() {
        let num = t(0).mul(&t(0)).sub(&t(1).mul(&t(1)));
        let q = num.div(&t(0).sub(&t(1))).unwrap();
        assert_eq!(q, t(0).add(&t(1)));
        assert!(q.is_poly());
    }

    #[test]
    fn field_axioms_on_sample() {
        let a = t(0).add(&RatFun::zeta()).div(&t(1).sub(&RatFun::from_int(2))).unwrap();
        let b = t(1).mul(&t(0)).add(&RatFun::one()).div(&t(0)).unwrap();
        assert_eq!(a.mul(&a.inv().unwrap()), RatFun::one());
        assert_eq!(a.add(&b).sub(&b), a);
        assert_eq!(a.mul(&b).div(&b).unwrap(), a);
        assert!(a.div(&RatFun::zero()).is_none());
    }

    #[test]
    fn display() {
        let a = t(0).sub(&RatFun::one()).div(&t(1).scale(&Scalar::from_int(27))).unwrap();
        assert_eq!(a.to_string(), "(1/27*t1 - 1/27)/(t2)");
    }
}
