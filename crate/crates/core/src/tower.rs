//! Radical towers K[ⁿ√a₁][ⁿ√a₂]… over K = ℚ(ζ)(t₁, …, tₙ).
//!
//! Every radicand lies in K, so the tower is a Kummer extension and an element is a
//! coordinate vector over K in the monomial basis ∏ rᵢ^eᵢ, 0 ≤ eᵢ < dᵢ. The first
//! radical varies fastest; the last radical is the top floor.

use std::fmt;
use std::sync::{Arc, Mutex};


use crate::error::{Error, Result};
use crate::gcd::gcd;
use crate::poly::{Field, Mono, Ring, ScalarPoly};
use crate::ratfun::RatFun;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct Radical {
    pub name: String,
    pub degree: u8,
    pub radicand: RatFun,
}

pub struct Tower {
    pub nvars: usize,
    pub radicals: Vec<Radical>,
    strides: Vec<usize>,
    dim: usize,
    // table[i][j] = (k, m): basis_i · basis_j = (m / den) · basis_k, with m a polynomial
    table: Vec<Vec<(usize, Option<ScalarPoly>)>>,
    // product of the radicand denominators
    den: ScalarPoly,
}

impl PartialEq for Tower {
    fn eq(&self, o: &Self) -> bool {
        self.nvars == o.nvars
            && self.radicals.len() == o.radicals.len()
            && self
                .radicals
                .iter()
                .zip(&o.radicals)
                .all(|(a, b)| a.degree == b.degree && a.radicand == b.radicand)
    }
}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K(n={})", self.nvars)?;
        for r in &self.radicals {
            let op = if r.degree == 3 { "cbrt" } else { "sqrt" };
            write!(f, "[{}({})]", op, r.radicand)?;
        }
        Ok(())
    }
}

impl Tower {
    /// The base field K with `nvars` transcendentals.
    pub fn base(nvars: usize) -> Arc<Tower> {
        Self::new(nvars, Vec::new()).expect("base field")
    }

    pub fn new(nvars: usize, radicals: Vec<Radical>) -> Result<Arc<Tower>> {
        for r in &radicals {
            if r.degree != 2 && r.degree != 3 {
                return Err(Error::BadExtension(format!("radical degree {}", r.degree)));
            }
            if r.radicand.is_zero() {
                return Err(Error::DegenerateTower(format!("radicand of {} is zero", r.name)));
            }
        }
        let mut strides = Vec::with_capacity(radicals.len());
        let mut dim = 1usize;
        for r in &radicals {
            strides.push(dim);
            dim *= r.degree as usize;
        }
        let den = radicals.iter().fold(ScalarPoly::from_int(1), |d, r| d.mul(&r.radicand.den));
        let mut t = Tower { nvars, radicals, strides, dim, table: Vec::new(), den };
        t.table = (0..dim)
            .map(|i| (0..dim).map(|j| t.basis_product(i, j)).collect())
            .collect();
        Ok(Arc::new(t))
    }

    /// Appends a radical on top of this tower.
    pub fn extend(&self, name: &str, degree: u8, radicand: RatFun) -> Result<Arc<Tower>> {
        let mut rs = self.radicals.clone();
        rs.push(Radical { name: name.to_string(), degree, radicand });
        Tower::new(self.nvars, rs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exps(&self, idx: usize) -> Vec<u8> {
        self.radicals
            .iter()
            .zip(&self.strides)
            .map(|(r, s)| ((idx / s) % r.degree as usize) as u8)
            .collect()
    }

    pub fn index(&self, exps: &[u8]) -> usize {
        exps.iter().zip(&self.strides).map(|(&e, s)| e as usize * s).sum()
    }

    fn basis_product(&self, i: usize, j: usize) -> (usize, Option<ScalarPoly>) {
        let (ei, ej) = (self.exps(i), self.exps(j));
        let mut out = Vec::with_capacity(ei.len());
        // carried radicals contribute their numerator, the others their denominator
        let mut m = ScalarPoly::from_int(1);
        for (k, r) in self.radicals.iter().enumerate() {
            let mut e = ei[k] + ej[k];
            if e >= r.degree {
                e -= r.degree;
                m = m.mul(&r.radicand.num);
            } else {
                m = m.mul(&r.radicand.den);
            }
            out.push(e);
        }
        let one = m.is_constant() && m.lc().is_some_and(|c| c.is_one());
        (self.index(&out), if one { None } else { Some(m) })
    }

    pub fn radical_index(&self, name: &str) -> Option<usize> {
        self.radicals.iter().position(|r| r.name == name)
    }

    /// Position in this tower of a radical equal (degree and radicand) to `r`.
    pub fn find_radical(&self, r: &Radical) -> Option<usize> {
        self.radicals.iter().position(|s| s.degree == r.degree && s.radicand == r.radicand)
    }

    /// The generator acting on radical `i` alone.
    pub fn generator(&self, i: usize) -> GaloisAction {
        GaloisAction::single(&self.radicals[i].name, 1)
    }

    /// One generator per radical.
    pub fn galois_generators(&self) -> Vec<GaloisAction> {
        (0..self.radicals.len()).map(|i| self.generator(i)).collect()
    }

    /// The smallest tower containing the radicals of both, `a`'s radicals first.
    ///
    /// Radicals are matched by degree and radicand; a clashing name gets primes appended.
    /// Results are interned so repeated mixing of the same towers shares one table.
    pub fn compositum(a: &Arc<Tower>, b: &Arc<Tower>) -> Arc<Tower> {
        if b.is_subtower_of(a) {
            return a.clone();
        }
        if a.is_subtower_of(b) && a.radicals.iter().enumerate().all(|(i, r)| b.find_radical(r) == Some(i)) {
            return b.clone();
        }
        let mut rs = a.radicals.clone();
        for r in &b.radicals {
            if a.find_radical(r).is_some() {
                continue;
            }
            let mut r = r.clone();
            while rs.iter().any(|s| s.name == r.name) {
                r.name.push('\'');
            }
            rs.push(r);
        }
        let nvars = a.nvars.max(b.nvars);
        static CACHE: Mutex<Vec<Arc<Tower>>> = Mutex::new(Vec::new());
        let mut cache = CACHE.lock().unwrap();
        let same = |t: &Tower| {
            t.nvars == nvars
                && t.radicals.len() == rs.len()
                && t.radicals.iter().zip(&rs).all(|(x, y)| x.name == y.name && x.degree == y.degree && x.radicand == y.radicand)
        };
        if let Some(t) = cache.iter().find(|t| same(t)) {
            return t.clone();
        }
        let t = Tower::new(nvars, rs).expect("radicals already validated");
        if cache.len() > 64 {
            cache.remove(0);
        }
        cache.push(t.clone());
        t
    }

    /// True when every radical of `self` occurs in `o`.
    pub fn is_subtower_of(&self, o: &Tower) -> bool {
        self.nvars <= o.nvars && self.radicals.iter().all(|r| o.find_radical(r).is_some())
    }
}

/// A Galois automorphism r ↦ ωᵏ·r on named radicals (ω = ζ or −1); K is fixed pointwise
/// and unnamed radicals are fixed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaloisAction {
    pub images: Vec<(String, u8)>,
}

impl GaloisAction {
    pub fn identity() -> Self {
        GaloisAction { images: Vec::new() }
    }

    pub fn single(name: &str, k: u8) -> Self {
        GaloisAction { images: vec![(name.to_string(), k)] }
    }

    pub fn from_exps(tower: &Tower, exps: &[u8]) -> Self {
        GaloisAction {
            images: tower
                .radicals
                .iter()
                .zip(exps)
                .filter(|(_, &k)| k != 0)
                .map(|(r, &k)| (r.name.clone(), k))
                .collect(),
        }
    }

    /// The exponent vector on `tower`.
    pub fn resolve(&self, tower: &Tower) -> Result<Vec<u8>> {
        let mut e = vec![0u8; tower.radicals.len()];
        for (name, k) in &self.images {
            let i = tower.radical_index(name).ok_or_else(|| Error::ActionMismatch(name.clone()))?;
            e[i] = k % tower.radicals[i].degree;
        }
        Ok(e)
    }

    pub fn exponent_of(&self, name: &str) -> u8 {
        self.images.iter().find(|(n, _)| n == name).map_or(0, |(_, k)| *k)
    }
}

/// An element of a tower field.
#[derive(Clone)]
pub struct Elem {
    pub tower: Arc<Tower>,
    pub coords: Vec<RatFun>,
}

impl PartialEq for Elem {
    fn eq(&self, o: &Self) -> bool {
        if Arc::ptr_eq(&self.tower, &o.tower) || *self.tower == *o.tower {
            return self.coords == o.coords;
        }
        let (a, b) = self.unify(o);
        a.coords == b.coords
    }
}

impl Elem {
    pub fn zero(tower: &Arc<Tower>) -> Self {
        Elem { tower: tower.clone(), coords: vec![RatFun::zero(); tower.dim] }
    }

    pub fn one(tower: &Arc<Tower>) -> Self {
        Self::from_k(tower, RatFun::one())
    }

    pub fn from_k(tower: &Arc<Tower>, c: RatFun) -> Self {
        let mut e = Self::zero(tower);
        e.coords[0] = c;
        e
    }

    pub fn from_int(tower: &Arc<Tower>, n: i64) -> Self {
        Self::from_k(tower, RatFun::from_int(n))
    }

    pub fn from_scalar(tower: &Arc<Tower>, s: Scalar) -> Self {
        Self::from_k(tower, RatFun::from_scalar(s))
    }

    pub fn zeta(tower: &Arc<Tower>) -> Self {
        Self::from_scalar(tower, Scalar::zeta())
    }

    /// The transcendental tᵢ (zero-based).
    pub fn var(tower: &Arc<Tower>, i: usize) -> Self {
        Self::from_k(tower, RatFun::var(i))
    }

    /// The radical with index `i`.
    pub fn radical(tower: &Arc<Tower>, i: usize) -> Self {
        let mut e = Self::zero(tower);
        e.coords[tower.strides[i]] = RatFun::one();
        e
    }

    /// The radical with the given name.
    pub fn named(tower: &Arc<Tower>, name: &str) -> Option<Self> {
        tower.radical_index(name).map(|i| Self::radical(tower, i))
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coords[0].is_one() && self.coords[1..].iter().all(|c| c.is_zero())
    }

    /// The value in K, if this element lies there.
    pub fn in_base(&self) -> Option<&RatFun> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coords[0])
        } else {
            None
        }
    }

    fn unify(&self, o: &Self) -> (Elem, Elem) {
        if Arc::ptr_eq(&self.tower, &o.tower) || *self.tower == *o.tower {
            return (self.clone(), o.with_tower(&self.tower));
        }
        if self.tower.is_subtower_of(&o.tower) {
            return (self.embed(&o.tower).unwrap(), o.clone());
        }
        if o.tower.is_subtower_of(&self.tower) {
            return (self.clone(), o.embed(&self.tower).unwrap());
        }
        let t = Tower::compositum(&self.tower, &o.tower);
        (self.embed(&t).unwrap(), o.embed(&t).unwrap())
    }

    fn with_tower(&self, t: &Arc<Tower>) -> Elem {
        Elem { tower: t.clone(), coords: self.coords.clone() }
    }

    fn same(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.tower, &o.tower)
    }

    /// Re-expresses this element in a tower containing all of its radicals.
    pub fn embed(&self, target: &Arc<Tower>) -> Result<Elem> {
        if Arc::ptr_eq(&self.tower, target) {
            return Ok(self.clone());
        }
        let map: Vec<usize> = self
            .tower
            .radicals
            .iter()
            .map(|r| target.find_radical(r).ok_or(Error::TowerMismatch))
            .collect::<Result<_>>()?;
        let mut out = Elem::zero(target);
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = self.tower.exps(i);
            let mut te = vec![0u8; target.radicals.len()];
            for (k, &m) in map.iter().enumerate() {
                te[m] = e[k];
            }
            out.coords[target.index(&te)] = c.clone();
        }
        Ok(out)
    }

    pub fn add(&self, o: &Self) -> Self {
        if !self.same(o) {
            let (a, b) = self.unify(o);
            return a.add(&b);
        }
        Elem {
            tower: self.tower.clone(),
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        if !self.same(o) {
            let (a, b) = self.unify(o);
            return a.sub(&b);
        }
        Elem {
            tower: self.tower.clone(),
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Elem { tower: self.tower.clone(), coords: self.coords.iter().map(|a| a.neg()).collect() }
    }

    pub fn scale(&self, c: &RatFun) -> Self {
        Elem { tower: self.tower.clone(), coords: self.coords.iter().map(|a| a.mul(c)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if !self.same(o) {
            let (a, b) = self.unify(o);
            return a.mul(&b);
        }
        if let Some(c) = o.in_base() {
            return self.scale(c);
        }
        if let Some(c) = self.in_base() {
            return o.scale(c);
        }
        let (an, ad) = self.split_den();
        let (bn, bd) = o.split_den();
        let t = &self.tower;
        let mut out = vec![ScalarPoly::zero(); t.dim];
        for (i, a) in an.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in bn.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let (k, m) = &t.table[i][j];
                let p = a.mul(b);
                let p = match m {
                    None => p,
                    Some(m) => p.mul(m),
                };
                out[*k] = out[*k].add(&p);
            }
        }
        Self::from_split(t, out, ad.mul(&bd).mul(&t.den))
    }

    /// Polynomial coordinates over a common denominator.
    pub fn split_den(&self) -> (Vec<ScalarPoly>, ScalarPoly) {
        let mut d = ScalarPoly::from_int(1);
        for c in &self.coords {
            if c.is_zero() || c.den.is_constant() || c.den == d {
                continue;
            }
            if d.is_constant() {
                d = c.den.clone();
                continue;
            }
            let g = gcd(&d, &c.den);
            d = d.mul(&c.den.div_exact(&g).unwrap());
        }
        let nums = self
            .coords
            .iter()
            .map(|c| {
                if c.den == d {
                    c.num.clone()
                } else {
                    c.num.mul(&d.div_exact(&c.den).unwrap())
                }
            })
            .collect();
        (nums, d)
    }

    fn from_split(t: &Arc<Tower>, nums: Vec<ScalarPoly>, den: ScalarPoly) -> Elem {
        let coords = nums
            .into_iter()
            .map(|n| RatFun::new(n, den.clone()).expect("nonzero denominator"))
            .collect();
        Elem { tower: t.clone(), coords }
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Elem::one(&self.tower);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Applies the automorphism with exponent vector `exps`.
    pub fn apply_exps(&self, exps: &[u8]) -> Elem {
        if exps.iter().all(|&k| k == 0) {
            return self.clone();
        }
        let t = &self.tower;
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if c.is_zero() {
                    return c.clone();
                }
                let e = t.exps(i);
                let mut zpow = 0i64;
                let mut sign = false;
                for (j, r) in t.radicals.iter().enumerate() {
                    let k = exps[j] as i64 * e[j] as i64;
                    if r.degree == 3 {
                        zpow += k;
                    } else if k % 2 == 1 {
                        sign = !sign;
                    }
                }
                let mut f = Scalar::zeta_pow(zpow);
                if sign {
                    f = f.neg();
                }
                if f.is_one() {
                    c.clone()
                } else {
                    c.scale(&f)
                }
            })
            .collect();
        Elem { tower: self.tower.clone(), coords }
    }

    pub fn apply_galois(&self, g: &GaloisAction) -> Result<Elem> {
        Ok(self.apply_exps(&g.resolve(&self.tower)?))
    }

    /// Inverse, clearing radicals floor by floor with Galois conjugates.
    pub fn inv(&self) -> Result<Elem> {
        let t = self.tower.clone();
        if let Some(c) = self.in_base() {
            return Ok(Elem::from_k(&t, c.inv().ok_or(Error::ZeroInverse)?));
        }
        // (A/d)⁻¹ = d·A⁻¹ keeps the conjugate products polynomial
        let (nums, d) = self.split_den();
        let mut a = Self::from_split(&t, nums, ScalarPoly::from_int(1));
        let mut acc = Elem::one(&t);
        for j in (0..t.radicals.len()).rev() {
            let involves = a.coords.iter().enumerate().any(|(i, c)| !c.is_zero() && t.exps(i)[j] != 0);
            if !involves {
                continue;
            }
            let mut conj = Elem::one(&t);
            for k in 1..t.radicals[j].degree {
                let mut e = vec![0u8; t.radicals.len()];
                e[j] = k;
                conj = conj.mul(&a.apply_exps(&e));
            }
            acc = acc.mul(&conj);
            a = a.mul(&conj);
        }
        let base = a.in_base().expect("conjugate product lies in the base field");
        let inv = base.inv().ok_or(Error::ZeroInverse)?;
        Ok(acc.scale(&inv.mul(&RatFun::from_poly(d))))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    /// a · g(a) · g²(a) for a generator `g` of order 3; must land in K.
    pub fn norm(&self, g: &GaloisAction) -> Result<RatFun> {
        let e = g.resolve(&self.tower)?;
        let e2: Vec<u8> = e.iter().zip(&self.tower.radicals).map(|(k, r)| (2 * k) % r.degree).collect();
        let p = self.mul(&self.apply_exps(&e)).mul(&self.apply_exps(&e2));
        p.in_base().cloned().ok_or(Error::NotInExtension)
    }

    /// Radical indices whose exponent appears in some nonzero coordinate.
    pub fn support(&self) -> Vec<usize> {
        let t = &self.tower;
        let mut used = vec![false; t.radicals.len()];
        for (i, c) in self.coords.iter().enumerate() {
            if !c.is_zero() {
                for (j, &e) in t.exps(i).iter().enumerate() {
                    if e != 0 {
                        used[j] = true;
                    }
                }
            }
        }
        (0..used.len()).filter(|&j| used[j]).collect()
    }

    /// Evaluates coordinates at a point of ℚ(ζ)ⁿ, keeping the radical basis symbolic.
    pub fn specialize(&self, pt: &[Scalar]) -> Option<Vec<Scalar>> {
        self.coords.iter().map(|c| c.eval(pt)).collect()
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let e = self.tower.exps(i);
            let mut basis = String::new();
            for (j, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = &self.tower.radicals[j].name;
                if k == 1 {
                    basis.push_str(&format!("*{}", name));
                } else {
                    basis.push_str(&format!("*{}^{}", name, k));
                }
            }
            if basis.is_empty() {
                write!(f, "{}", c)?;
            } else {
                write!(f, "({}){}", c, basis)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Ring for Elem {
    fn zero_like(&self) -> Self {
        Elem::zero(&self.tower)
    }
    fn one_like(&self) -> Self {
        Elem::one(&self.tower)
    }
    fn is_zero(&self) -> bool {
        Elem::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        Elem::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Elem::sub(self, o)
    }
    fn neg(&self) -> Self {
        Elem::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        Elem::mul(self, o)
    }
    fn mul_int(&self, n: i64) -> Self {
        self.scale(&RatFun::from_int(n))
    }
    fn is_one(&self) -> bool {
        Elem::is_one(self)
    }
}

impl Field for Elem {
    fn inv(&self) -> Option<Self> {
        Elem::inv(self).ok()
    }
    fn cost(&self) -> usize {
        let n = self.coords.iter().filter(|c| !c.is_zero()).count();
        let terms: usize = self.coords.iter().map(|c| c.num.len() + c.den.len()).sum();
        // elements of K invert without conjugates
        if n <= 1 { terms } else { 1000 * n + terms }
    }
}

/// A small random element of K: a quotient of low-degree polynomials with small
/// coefficients in ℚ(ζ).
pub fn random_k(rng: &mut impl rand::Rng, nvars: usize, with_den: bool) -> RatFun {
    let num = random_poly(rng, nvars, 2);
    if num.is_zero() {
        return RatFun::one();
    }
    if with_den && rng.gen_bool(0.5) {
        let den = random_poly(rng, nvars, 1);
        if !den.is_zero() {
            return RatFun::new(num, den).unwrap();
        }
    }
    RatFun::from_poly(num)
}

fn random_poly(rng: &mut impl rand::Rng, nvars: usize, max_deg: u16) -> ScalarPoly {
    let nterms = rng.gen_range(1..=3);
    let mut terms = Vec::new();
    for _ in 0..nterms {
        let mut e = [0u16; crate::poly::MAX_VARS];
        let mut budget = rng.gen_range(0..=max_deg);
        for slot in e.iter_mut().take(nvars) {
            let k = rng.gen_range(0..=budget);
            *slot = k;
            budget -= k;
        }
        let re = rng.gen_range(-4i64..=4);
        let z = if rng.gen_bool(0.3) { rng.gen_range(-2i64..=2) } else { 0 };
        let c = Scalar::from_int(re).add(&Scalar::zeta().mul(&Scalar::from_int(z)));
        terms.push((Mono(e), c));
    }
    ScalarPoly::from_terms(terms)
}

/// A random nonzero element of the tower with at most `max_coords` nonzero coordinates.
pub fn random_elem(rng: &mut impl rand::Rng, tower: &Arc<Tower>, max_coords: usize) -> Elem {
    let mut e = Elem::zero(tower);
    let k = rng.gen_range(1..=max_coords.min(tower.dim));
    for _ in 0..k {
        let i = rng.gen_range(0..tower.dim);
        e.coords[i] = random_k(rng, tower.nvars, tower.dim <= 3);
    }
    if e.is_zero() {
        e.coords[0] = RatFun::one();
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn l_tower() -> Arc<Tower> {
        Tower::base(2).extend("a", 3, RatFun::var(0)).unwrap()
    }

    fn big_tower() -> Arc<Tower> {
        l_tower().extend("b", 3, RatFun::var(1)).unwrap()
    }

    fn mixed_tower() -> Arc<Tower> {
        l_tower().extend("s", 2, RatFun::var(1).add(&RatFun::one())).unwrap()
    }

    #[test]
    fn radical_cubes_to_radicand() {
        let t = l_tower();
        let a = Elem::radical(&t, 0);
        assert_eq!(a.pow(3).unwrap(), Elem::var(&t, 0));
    }

    #[test]
    fn inverse_of_radical() {
        let t = l_tower();
        let a = Elem::radical(&t, 0);
        let expect = a.mul(&a).scale(&RatFun::var(0).inv().unwrap());
        assert_eq!(a.inv().unwrap(), expect);
        assert_eq!(Elem::zero(&t).inv(), Err(Error::ZeroInverse));
        let one_zeta = Elem::one(&t).add(&Elem::zeta(&t));
        assert_eq!(one_zeta.inv().unwrap(), Elem::zeta(&t).neg());
    }

    #[test]
    fn galois_on_radical() {
        let t = l_tower();
        let g = t.generator(0);
        let a = Elem::radical(&t, 0);
        assert_eq!(a.apply_galois(&g).unwrap(), Elem::zeta(&t).mul(&a));
        let c = Elem::var(&t, 1);
        assert_eq!(c.apply_galois(&g).unwrap(), c);
        let bad = GaloisAction::single("missing", 1);
        assert!(matches!(a.apply_galois(&bad), Err(Error::ActionMismatch(_))));
    }

    #[test]
    fn norms() {
        let t = l_tower();
        let g = t.generator(0);
        assert_eq!(Elem::radical(&t, 0).norm(&g).unwrap(), RatFun::var(0));
        let c = RatFun::var(1).add(&RatFun::from_int(2));
        assert_eq!(Elem::from_k(&t, c.clone()).norm(&g).unwrap(), c.pow(3));
        let q = Tower::base(0).extend("c", 3, RatFun::from_int(2)).unwrap();
        let e = Elem::one(&q).add(&Elem::radical(&q, 0));
        assert_eq!(e.norm(&q.generator(0)).unwrap(), RatFun::from_int(3));
    }

    #[test]
    fn embedding_preserves_arithmetic() {
        let small = Tower::base(2).extend("b", 3, RatFun::var(1)).unwrap();
        let big = big_tower().extend("s", 2, RatFun::var(1).add(&RatFun::one())).unwrap();
        let b = Elem::radical(&small, 0);
        let e = b.embed(&big).unwrap();
        assert_eq!(e, Elem::radical(&big, 1));
        assert_eq!(b.mul(&Elem::radical(&big, 0)), Elem::radical(&big, 0).mul(&e));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn norm_is_multiplicative(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = l_tower();
            let g = t.generator(0);
            let a = random_elem(&mut rng, &t, 3);
            let b = random_elem(&mut rng, &t, 3);
            prop_assert_eq!(a.mul(&b).norm(&g).unwrap(), a.norm(&g).unwrap().mul(&b.norm(&g).unwrap()));
        }

        #[test]
        fn galois_is_a_ring_map_of_order_three(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = if seed % 2 == 0 { big_tower() } else { mixed_tower() };
            let g = GaloisAction::from_exps(&t, &[1, 1]);
            let a = random_elem(&mut rng, &t, 3);
            let b = random_elem(&mut rng, &t, 3);
            let ga = a.apply_galois(&g).unwrap();
            let gb = b.apply_galois(&g).unwrap();
            prop_assert_eq!(a.add(&b).apply_galois(&g).unwrap(), ga.add(&gb));
            prop_assert_eq!(a.sub(&b).apply_galois(&g).unwrap(), ga.sub(&gb));
            prop_assert_eq!(a.mul(&b).apply_galois(&g).unwrap(), ga.mul(&gb));
            if !b.is_zero() {
                prop_assert_eq!(a.div(&b).unwrap().apply_galois(&g).unwrap(), ga.div(&gb).unwrap());
            }
            let h = t.generator(0);
            let h3 = a.apply_galois(&h).unwrap().apply_galois(&h).unwrap().apply_galois(&h).unwrap();
            prop_assert_eq!(h3, a);
        }

        #[test]
        fn inverse_is_two_sided(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = if seed % 2 == 0 { l_tower() } else { mixed_tower() };
            let a = random_elem(&mut rng, &t, 3);
            let i = a.inv().unwrap();
            prop_assert!(a.mul(&i).is_one());
            prop_assert!(i.mul(&a).is_one());
        }

        // inverting an inverse blows up denominators, so keep these sparse
        #[test]
        fn double_inverse(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_elem(&mut rng, &l_tower(), 2);
            prop_assert_eq!(a.inv().unwrap().inv().unwrap(), a);
        }
    }
}

/// A reproducible generator: the seed comes from `SBK_SEED` (default 0), mixed with a
/// per-call-site stream so that independent computations do not share draws.
pub fn seeded_rng(stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let seed = std::env::var("SBK_SEED").ok().and_then(|s| s.parse::<u64>().ok()).unwrap_or(0);
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}
