//! Elements of the cyclotomic field ℚ(ζ), ζ a primitive cube root of unity.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// `re + zeta·ζ` with ζ² = −1 − ζ.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    pub re: BigRational,
    pub zeta: BigRational,
}

impl Scalar {
    pub fn new(re: BigRational, zeta: BigRational) -> Self {
        Scalar { re, zeta }
    }

    pub fn zero() -> Self {
        Scalar { re: BigRational::zero(), zeta: BigRational::zero() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar { re: BigRational::from_integer(BigInt::from(n)), zeta: BigRational::zero() }
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Scalar {
            re: BigRational::new(BigInt::from(n), BigInt::from(d)),
            zeta: BigRational::zero(),
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar { re: r, zeta: BigRational::zero() }
    }

    /// The primitive cube root of unity ζ.
    pub fn zeta() -> Self {
        Scalar { re: BigRational::zero(), zeta: BigRational::one() }
    }

    /// ζ^k for any integer k.
    pub fn zeta_pow(k: i64) -> Self {
        match k.rem_euclid(3) {
            0 => Self::one(),
            1 => Self::zeta(),
            _ => Scalar { re: -BigRational::one(), zeta: -BigRational::one() },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.zeta.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.zeta.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.zeta.is_zero()
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        Scalar { re: &self.re + &o.re, zeta: &self.zeta + &o.zeta }
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        Scalar { re: &self.re - &o.re, zeta: &self.zeta - &o.zeta }
    }

    pub fn neg(&self) -> Scalar {
        Scalar { re: -&self.re, zeta: -&self.zeta }
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        if self.zeta.is_zero() && o.zeta.is_zero() {
            return Scalar { re: &self.re * &o.re, zeta: BigRational::zero() };
        }
        if self.zeta.is_zero() {
            return Scalar { re: &self.re * &o.re, zeta: &self.re * &o.zeta };
        }
        if o.zeta.is_zero() {
            return Scalar { re: &self.re * &o.re, zeta: &self.zeta * &o.re };
        }
        // (a + bζ)(c + dζ) = (ac − bd) + (ad + bc − bd)ζ
        let bd = &self.zeta * &o.zeta;
        Scalar {
            re: &self.re * &o.re - &bd,
            zeta: &self.re * &o.zeta + &self.zeta * &o.re - bd,
        }
    }

    pub fn scale(&self, r: &BigRational) -> Scalar {
        Scalar { re: &self.re * r, zeta: &self.zeta * r }
    }

    /// Field norm to ℚ: a² − ab + b².
    pub fn norm(&self) -> BigRational {
        &self.re * &self.re - &self.re * &self.zeta + &self.zeta * &self.zeta
    }

    /// Image under ζ ↦ ζ².
    pub fn conj(&self) -> Scalar {
        // a + bζ² = (a − b) − bζ
        Scalar { re: &self.re - &self.zeta, zeta: -&self.zeta }
    }

    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        if self.zeta.is_zero() {
            return Some(Scalar { re: self.re.recip(), zeta: BigRational::zero() });
        }
        let n = self.norm().recip();
        Some(self.conj().scale(&n))
    }

    pub fn div(&self, o: &Scalar) -> Option<Scalar> {
        o.inv().map(|i| self.mul(&i))
    }

    pub fn pow(&self, mut e: u32) -> Scalar {
        let mut base = self.clone();
        let mut acc = Scalar::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// An exact cube root in ℚ(ζ), if one exists.
    ///
    /// A root y has rational norm n = ∛N(s) and trace T solving T³ − 3nT = Tr(s);
    /// y is then recovered from Y² − TY + n.
    pub fn cube_root(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(Scalar::zero());
        }
        if self.is_rational() {
            if let Some(r) = rational_root(&self.re, 3) {
                return Some(Scalar::from_rational(r));
            }
        }
        let n = rational_root(&self.norm(), 3)?;
        let tr = self.trace();
        let three_n = &n * BigRational::from_integer(BigInt::from(3));
        for t in rational_cubic_roots(&-three_n, &-tr) {
            for y in from_trace_norm(&t, &n) {
                if y.pow(3) == *self {
                    return Some(y);
                }
            }
        }
        None
    }

    /// An exact square root in ℚ(ζ), if one exists.
    pub fn sqrt(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(Scalar::zero());
        }
        let n0 = rational_root(&self.norm(), 2)?;
        let tr = self.trace();
        let two = BigRational::from_integer(BigInt::from(2));
        for n in [n0.clone(), -n0] {
            let Some(t) = rational_root(&(&tr + &two * &n), 2) else { continue };
            for y in from_trace_norm(&t, &n) {
                if y.mul(&y) == *self {
                    return Some(y);
                }
            }
        }
        None
    }

    /// Field trace to ℚ: 2a − b.
    pub fn trace(&self) -> BigRational {
        &self.re + &self.re - &self.zeta
    }

    /// A positive-leading normalization key: compares by (re, zeta).
    pub fn cmp_key(&self) -> (BigRational, BigRational) {
        (self.re.clone(), self.zeta.clone())
    }
}

/// Elements y with y + ȳ = t and y·ȳ = n.
fn from_trace_norm(t: &BigRational, n: &BigRational) -> Vec<Scalar> {
    // y = (t ± r·√−3)/2 where t² − 4n = −3r², and √−3 = 1 + 2ζ
    let four = BigRational::from_integer(BigInt::from(4));
    let disc = t * t - &four * n;
    let Some(r) = rational_root(&(disc / BigRational::from_integer(BigInt::from(-3))), 2) else {
        return Vec::new();
    };
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let sqrt_m3 = Scalar::new(BigRational::one(), BigRational::from_integer(BigInt::from(2)));
    let base = Scalar::from_rational(t * &half);
    let off = sqrt_m3.scale(&(r * half));
    vec![base.add(&off), base.sub(&off)]
}

/// Rational roots of T³ + aT + b.
fn rational_cubic_roots(a: &BigRational, b: &BigRational) -> Vec<BigRational> {
    // T = S/D with D clearing denominators turns this into a monic integer cubic in S
    let d = num_integer::Integer::lcm(a.denom(), b.denom());
    let ai = (a * BigRational::from_integer(&d * &d)).to_integer();
    let bi = (b * BigRational::from_integer(&d * &d * &d)).to_integer();
    let f = |s: &BigInt| s * s * s + &ai * s + &bi;
    let bound = ai.abs() + bi.abs() + BigInt::one();
    // monotone pieces split at the critical points ±√(−a/3)
    let mut windows = Vec::new();
    if ai.is_negative() {
        let c = (-&ai / BigInt::from(3)).sqrt();
        windows.push((-bound.clone(), -&c - BigInt::one()));
        windows.push((-c.clone(), c.clone()));
        windows.push((c + BigInt::one(), bound));
    } else {
        windows.push((-bound.clone(), bound));
    }
    let mut roots: Vec<BigInt> = Vec::new();
    for (mut lo, mut hi) in windows {
        if lo > hi {
            continue;
        }
        let increasing = f(&hi) >= f(&lo);
        while lo <= hi {
            let mid: BigInt = (&lo + &hi) >> 1;
            let v = f(&mid);
            if v.is_zero() {
                roots.push(mid);
                break;
            }
            if v.is_positive() == increasing {
                hi = mid - BigInt::one();
            } else {
                lo = mid + BigInt::one();
            }
        }
    }
    roots.sort();
    roots.dedup();
    roots.into_iter().map(|s| BigRational::new(s, d.clone())).collect()
}

/// Exact `n`-th root of a rational number, if it exists.
pub fn rational_root(r: &BigRational, n: u32) -> Option<BigRational> {
    if r.is_zero() {
        return Some(BigRational::zero());
    }
    if n % 2 == 0 && r.is_negative() {
        return None;
    }
    let neg = r.is_negative();
    let num = integer_root(&r.numer().abs(), n)?;
    let den = integer_root(&r.denom().abs(), n)?;
    let root = BigRational::new(num, den);
    Some(if neg { -root } else { root })
}

fn integer_root(a: &BigInt, n: u32) -> Option<BigInt> {
    let r = a.nth_root(n);
    if num_traits::pow(r.clone(), n as usize) == *a {
        Some(r)
    } else {
        None
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zeta.is_zero() {
            write!(f, "{}", fmt_rat(&self.re))
        } else if self.re.is_zero() {
            write!(f, "{}*zeta", fmt_rat(&self.zeta))
        } else {
            write!(f, "({} + {}*zeta)", fmt_rat(&self.re), fmt_rat(&self.zeta))
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Prints a rational as `p/q` (or `p` when q = 1); the inverse of [`parse_rational`].
pub fn rational_to_string(r: &BigRational) -> String {
    fmt_rat(r)
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).ok()?;
            let d = BigInt::from_str(d.trim()).ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => BigInt::from_str(s).ok().map(BigRational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_minimal_polynomial() {
        let z = Scalar::zeta();
        let s = z.mul(&z).add(&z).add(&Scalar::one());
        assert!(s.is_zero());
        assert!(z.pow(3).is_one());
    }

    #[test]
    fn inverse_of_one_plus_zeta() {
        let a = Scalar::one().add(&Scalar::zeta());
        let inv = a.inv().unwrap();
        assert_eq!(inv, Scalar::zeta().neg());
        assert!(a.mul(&inv).is_one());
    }

    #[test]
    fn roots() {
        assert_eq!(Scalar::from_int(8).cube_root(), Some(Scalar::from_int(2)));
        assert_eq!(Scalar::from_ratio(-1, 27).cube_root(), Some(Scalar::from_ratio(-1, 3)));
        assert_eq!(Scalar::from_int(2).cube_root(), None);
        assert_eq!(Scalar::zeta().cube_root(), None);
        let s = Scalar::from_int(-12).sqrt().unwrap();
        assert_eq!(s.mul(&s), Scalar::from_int(-12));
        let w = Scalar::new(BigRational::from_integer(3.into()), BigRational::from_integer((-5).into()));
        let c = w.pow(3).cube_root().unwrap();
        assert_eq!(c.pow(3), w.pow(3));
        let q = w.mul(&w).sqrt().unwrap();
        assert_eq!(q.mul(&q), w.mul(&w));
        assert_eq!(w.cube_root(), None);
    }

    #[test]
    fn rational_parse_round_trip() {
        let r = parse_rational("-7/21").unwrap();
        assert_eq!(rational_to_string(&r), "-1/3");
    }
}
