//! Sparse multivariate polynomials over a generic coefficient ring.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::scalar::Scalar;

/// Maximum number of variables in a single polynomial ring.
pub const MAX_VARS: usize = 8;

/// Exponent vector; ordered graded-lexicographically with variable 0 largest.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Mono(pub [u16; MAX_VARS]);

impl Mono {
    pub fn one() -> Self {
        Mono([0; MAX_VARS])
    }

    pub fn var(i: usize) -> Self {
        let mut m = [0; MAX_VARS];
        m[i] = 1;
        Mono(m)
    }

    pub fn from_exps(e: &[u16]) -> Self {
        let mut m = [0; MAX_VARS];
        m[..e.len()].copy_from_slice(e);
        Mono(m)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut m = self.0;
        for (a, b) in m.iter_mut().zip(o.0.iter()) {
            *a += *b;
        }
        Mono(m)
    }

    pub fn divides(&self, o: &Mono) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn div(&self, o: &Mono) -> Option<Mono> {
        let mut m = self.0;
        for (a, b) in m.iter_mut().zip(o.0.iter()) {
            if *a < *b {
                return None;
            }
            *a -= *b;
        }
        Some(Mono(m))
    }

    pub fn gcd(&self, o: &Mono) -> Mono {
        let mut m = self.0;
        for (a, b) in m.iter_mut().zip(o.0.iter()) {
            *a = (*a).min(*b);
        }
        Mono(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Highest index with a nonzero exponent, plus one.
    pub fn arity(&self) -> usize {
        self.0.iter().rposition(|&e| e != 0).map_or(0, |i| i + 1)
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.0[..self.arity()])
    }
}

/// Commutative ring operations needed by [`Poly`].
///
/// Elements may carry context (for example the field they live in), so zero and
/// one are produced from an existing element.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn mul_int(&self, n: i64) -> Self;

    fn is_one(&self) -> bool {
        *self == self.one_like()
    }
}

/// A ring in which every nonzero element is invertible.
pub trait Field: Ring {
    fn inv(&self) -> Option<Self>;

    /// A rough size, used to prefer cheap pivots in elimination.
    fn cost(&self) -> usize {
        0
    }
}

impl Ring for Scalar {
    fn zero_like(&self) -> Self {
        Scalar::zero()
    }
    fn one_like(&self) -> Self {
        Scalar::one()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        Scalar::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Scalar::sub(self, o)
    }
    fn neg(&self) -> Self {
        Scalar::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        Scalar::mul(self, o)
    }
    fn mul_int(&self, n: i64) -> Self {
        Scalar::mul(self, &Scalar::from_int(n))
    }
    fn is_one(&self) -> bool {
        Scalar::is_one(self)
    }
}

impl Field for Scalar {
    fn inv(&self) -> Option<Self> {
        Scalar::inv(self)
    }
}

/// Terms are kept sorted by decreasing monomial with no zero coefficients.
#[derive(Clone, PartialEq)]
pub struct Poly<R> {
    pub terms: Vec<(Mono, R)>,
}

impl<R: Ring> Poly<R> {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn constant(c: R) -> Self {
        Self::monomial(Mono::one(), c)
    }

    pub fn monomial(m: Mono, c: R) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// The variable `i` with coefficient `one`.
    pub fn var(i: usize, one: R) -> Self {
        Self::monomial(Mono::var(i), one)
    }

    pub fn from_terms(terms: Vec<(Mono, R)>) -> Self {
        let mut acc: HashMap<Mono, R> = HashMap::with_capacity(terms.len());
        for (m, c) in terms {
            accumulate(&mut acc, m, c);
        }
        Self::from_map(acc)
    }

    fn from_map(acc: HashMap<Mono, R>) -> Self {
        let mut terms: Vec<(Mono, R)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    /// The constant term (if the polynomial is constant, its value).
    pub fn constant_term(&self) -> Option<&R> {
        self.terms.last().filter(|(m, _)| m.is_one()).map(|(_, c)| c)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<&(Mono, R)> {
        self.terms.first()
    }

    pub fn lc(&self) -> Option<&R> {
        self.terms.first().map(|(_, c)| c)
    }

    pub fn total_degree(&self) -> i64 {
        self.terms.iter().map(|(m, _)| m.degree() as i64).max().unwrap_or(-1)
    }

    pub fn degree_in(&self, v: usize) -> i64 {
        self.terms.iter().map(|(m, _)| m.0[v] as i64).max().unwrap_or(-1)
    }

    pub fn arity(&self) -> usize {
        self.terms.iter().map(|(m, _)| m.arity()).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some((m, _)) => {
                let d = m.degree();
                self.terms.iter().all(|(m, _)| m.degree() == d)
            }
        }
    }

    pub fn coeff(&self, m: &Mono) -> Option<&R> {
        self.terms
            .binary_search_by(|(t, _)| m.cmp(t))
            .ok()
            .map(|i| &self.terms[i].1)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < o.terms.len() {
            let (ma, ca) = &self.terms[i];
            let (mb, cb) = &o.terms[j];
            match ma.cmp(mb) {
                Ordering::Greater => {
                    out.push((*ma, ca.clone()));
                    i += 1;
                }
                Ordering::Less => {
                    out.push((*mb, cb.clone()));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = ca.add(cb);
                    if !c.is_zero() {
                        out.push((*ma, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&o.terms[j..]);
        Poly { terms: out }
    }

    pub fn neg(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &R) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (*m, a.mul(c)))
                .filter(|(_, a)| !a.is_zero())
                .collect(),
        }
    }

    pub fn mul_term(&self, m: &Mono, c: &R) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(t, a)| (t.mul(m), a.mul(c)))
                .filter(|(_, a)| !a.is_zero())
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return o.mul_term(m, c);
        }
        if o.terms.len() == 1 {
            let (m, c) = &o.terms[0];
            return self.mul_term(m, c);
        }
        let mut acc: HashMap<Mono, R> = HashMap::with_capacity(self.terms.len() * o.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                accumulate(&mut acc, ma.mul(mb), ca.mul(cb));
            }
        }
        Self::from_map(acc)
    }

    pub fn pow(&self, e: u32, one: &R) -> Self {
        let mut acc = Self::constant(one.clone());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, v: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.0[v] > 0)
            .map(|(m, c)| {
                let mut e = *m;
                let k = e.0[v];
                e.0[v] -= 1;
                (e, c.mul_int(k as i64))
            })
            .filter(|(_, c)| !c.is_zero())
            .collect();
        // lowering one exponent preserves the relative order within a variable-v slice only,
        // so resort
        let mut p = Poly { terms };
        p.terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        p
    }

    pub fn map_coeffs<S: Ring>(&self, f: impl Fn(&R) -> S) -> Poly<S> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (*m, f(c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Poly { terms }
    }

    /// Evaluates at a point given as one value per variable.
    pub fn eval(&self, pt: &[R]) -> R {
        let one = match self.terms.first() {
            None => return pt.first().map(|p| p.zero_like()).expect("evaluation point"),
            Some((_, c)) => c.one_like(),
        };
        let mut powers: Vec<Vec<R>> = Vec::with_capacity(pt.len());
        for (v, x) in pt.iter().enumerate() {
            let d = self.degree_in(v).max(0) as usize;
            let mut p = Vec::with_capacity(d + 1);
            p.push(one.clone());
            for k in 1..=d {
                let next = p[k - 1].mul(x);
                p.push(next);
            }
            powers.push(p);
        }
        let mut acc = one.zero_like();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&powers[v][e as usize]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Substitutes polynomials for the variables.
    pub fn compose(&self, subs: &[Poly<R>]) -> Poly<R> {
        let one = match self.terms.first() {
            None => return Self::zero(),
            Some((_, c)) => c.one_like(),
        };
        let mut cache: Vec<Vec<Poly<R>>> = subs.iter().map(|_| Vec::new()).collect();
        let mut acc = Self::zero();
        for (m, c) in &self.terms {
            let mut t = Self::constant(c.clone());
            for (v, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = &mut cache[v];
                if pw.is_empty() {
                    pw.push(Self::constant(one.clone()));
                }
                while pw.len() <= e as usize {
                    let next = pw[pw.len() - 1].mul(&subs[v]);
                    pw.push(next);
                }
                t = t.mul(&pw[e as usize]);
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Coefficients with respect to variable `v`, as polynomials in the remaining variables.
    pub fn coeffs_in(&self, v: usize) -> Vec<Poly<R>> {
        let d = self.degree_in(v);
        if d < 0 {
            return Vec::new();
        }
        let mut parts: Vec<Vec<(Mono, R)>> = vec![Vec::new(); d as usize + 1];
        for (m, c) in &self.terms {
            let k = m.0[v] as usize;
            let mut r = *m;
            r.0[v] = 0;
            parts[k].push((r, c.clone()));
        }
        parts
            .into_iter()
            .map(|mut t| {
                t.sort_unstable_by(|a, b| b.0.cmp(&a.0));
                Poly { terms: t }
            })
            .collect()
    }

    /// Inverse of [`Poly::coeffs_in`].
    pub fn from_coeffs_in(v: usize, cs: &[Poly<R>]) -> Self {
        let mut terms = Vec::new();
        for (k, c) in cs.iter().enumerate() {
            for (m, a) in &c.terms {
                let mut r = *m;
                r.0[v] += k as u16;
                terms.push((r, a.clone()));
            }
        }
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    /// Greatest monomial dividing every term.
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.iter();
        match it.next() {
            None => Mono::one(),
            Some((m, _)) => it.fold(*m, |g, (m, _)| g.gcd(m)),
        }
    }

    /// Divides every term by a monomial that must divide all of them.
    pub fn div_mono(&self, m: &Mono) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.div(m).expect("monomial divides"), c.clone()))
                .collect(),
        }
    }

    /// Renames variables: variable i becomes `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = [0u16; MAX_VARS];
                for (i, &p) in perm.iter().enumerate() {
                    e[p] += m.0[i];
                }
                (Mono(e), c.clone())
            })
            .collect();
        Self::from_terms(terms)
    }
}

impl<R: Field> Poly<R> {
    pub fn make_monic(&self) -> Self {
        match self.lc() {
            None => Self::zero(),
            Some(c) => self.scale(&c.inv().expect("nonzero leading coefficient")),
        }
    }

    /// Multivariate division by `d`; returns the quotient when the division is exact.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(d);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    /// Division with remainder against the leading term of `d`.
    ///
    /// Terms of the dividend not divisible by the leading monomial are moved to the
    /// remainder.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let (lm, lc) = d.leading().expect("division by zero polynomial").clone();
        let lc_inv = lc.inv().expect("leading coefficient invertible");
        if d.terms.len() == 1 {
            let mut q = Vec::new();
            let mut r = Vec::new();
            for (m, c) in &self.terms {
                match m.div(&lm) {
                    Some(qm) => q.push((qm, c.mul(&lc_inv))),
                    None => r.push((*m, c.clone())),
                }
            }
            return (Poly { terms: q }, Poly { terms: r });
        }
        let tail = Poly { terms: d.terms[1..].to_vec() };
        let mut p = self.clone();
        let mut q: Vec<(Mono, R)> = Vec::new();
        let mut r: Vec<(Mono, R)> = Vec::new();
        while let Some((m, c)) = p.terms.first().cloned() {
            match m.div(&lm) {
                Some(qm) => {
                    let qc = c.mul(&lc_inv);
                    p.terms.remove(0);
                    p = p.sub(&tail.mul_term(&qm, &qc));
                    q.push((qm, qc));
                }
                None => {
                    p.terms.remove(0);
                    r.push((m, c));
                }
            }
        }
        (Poly::from_terms(q), Poly::from_terms(r))
    }
}

fn accumulate<R: Ring>(acc: &mut HashMap<Mono, R>, m: Mono, c: R) {
    match acc.get_mut(&m) {
        Some(e) => *e = e.add(&c),
        None => {
            acc.insert(m, c);
        }
    }
}

impl<R: Ring> fmt::Debug for Poly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{:?}", c)?;
            for (v, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*v{}", v)?,
                    _ => write!(f, "*v{}^{}", v, e)?,
                }
            }
        }
        Ok(())
    }
}

/// Polynomials with coefficients in ℚ(ζ).
pub type ScalarPoly = Poly<Scalar>;

impl ScalarPoly {
    pub fn var_s(i: usize) -> Self {
        Poly::var(i, Scalar::one())
    }

    pub fn from_int(n: i64) -> Self {
        Poly::constant(Scalar::from_int(n))
    }

    /// Rewrites ζ ↦ ζ² in every coefficient.
    pub fn conj(&self) -> Self {
        self.map_coeffs(|c| c.conj())
    }
}
