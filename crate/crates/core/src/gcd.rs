//! Multivariate gcd and squarefree decomposition over ℚ(ζ).
//!
//! The gcd evaluates the last variable at small integers, recurses, and rebuilds the
//! result by Newton interpolation; images with a larger leading monomial are unlucky and
//! discarded. Candidates are confirmed by exact division.

use std::collections::HashMap;

use crate::poly::{Mono, ScalarPoly, MAX_VARS};
use crate::scalar::Scalar;

/// Monic greatest common divisor; `gcd(0, 0) = 0`.
pub fn gcd(a: &ScalarPoly, b: &ScalarPoly) -> ScalarPoly {
    if a.is_zero() {
        return b.make_monic();
    }
    if b.is_zero() {
        return a.make_monic();
    }
    if a.is_constant() || b.is_constant() {
        return ScalarPoly::from_int(1);
    }
    // monomial factors first: cheap and very common
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.gcd(&mb);
    let a = a.div_mono(&ma);
    let b = b.div_mono(&mb);
    let g = if a.len() == 1 || b.len() == 1 {
        ScalarPoly::from_int(1)
    } else if a == b {
        a.clone()
    } else {
        let nv = a.arity().max(b.arity());
        brown(&a, &b, nv)
    };
    g.mul_term(&mg, &Scalar::one()).make_monic()
}

type Uni = Vec<Scalar>;

fn uni_trim(mut a: Uni) -> Uni {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn uni_eval(a: &Uni, x: &Scalar) -> Scalar {
    let mut acc = Scalar::zero();
    for c in a.iter().rev() {
        acc = acc.mul(x).add(c);
    }
    acc
}

fn uni_monic(a: &Uni) -> Uni {
    match a.last() {
        None => Vec::new(),
        Some(l) => {
            let i = l.inv().unwrap();
            a.iter().map(|c| c.mul(&i)).collect()
        }
    }
}

fn uni_rem(a: &Uni, b: &Uni) -> Uni {
    let mut r = a.clone();
    let db = b.len() - 1;
    let li = b[db].inv().unwrap();
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let q = r[dr].mul(&li);
        for (i, bc) in b.iter().enumerate() {
            let k = dr - db + i;
            r[k] = r[k].sub(&q.mul(bc));
        }
        r.pop();
        r = uni_trim(r);
    }
    r
}

fn uni_divexact(a: &Uni, b: &Uni) -> Uni {
    let db = b.len() - 1;
    if a.len() <= db {
        return Vec::new();
    }
    let mut r = a.clone();
    let li = b[db].inv().unwrap();
    let mut q = vec![Scalar::zero(); a.len() - db];
    for dr in (db..a.len()).rev() {
        let c = r[dr].mul(&li);
        if c.is_zero() {
            continue;
        }
        for (i, bc) in b.iter().enumerate() {
            let k = dr - db + i;
            r[k] = r[k].sub(&c.mul(bc));
        }
        q[dr - db] = c;
    }
    uni_trim(q)
}

fn uni_gcd(a: &Uni, b: &Uni) -> Uni {
    let (mut a, mut b) = (uni_trim(a.clone()), uni_trim(b.clone()));
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    if b.is_empty() {
        return uni_monic(&a);
    }
    let divides = |c: &[Scalar]| {
        let c = c.to_vec();
        uni_rem(&a, &c).is_empty() && uni_rem(&b, &c).is_empty()
    };
    if let Some(g) = modp::gcd(&a, &b, divides) {
        return g;
    }
    while !b.is_empty() {
        let r = uni_rem(&a, &b);
        a = b;
        b = uni_monic(&r);
    }
    uni_monic(&a)
}

/// Univariate gcd by images modulo word-sized primes p ≡ 1 (mod 3).
///
/// Each prime gives two images of ζ (the two primitive cube roots of unity mod p), which
/// together determine both rational parts of every coefficient modulo p.
mod modp {
    use std::sync::OnceLock;

    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_rational::BigRational;
    use num_traits::{One, Signed, ToPrimitive, Zero};

    use crate::scalar::Scalar;

    fn mul(a: u64, b: u64, p: u64) -> u64 {
        ((a as u128 * b as u128) % p as u128) as u64
    }

    fn pow(mut a: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a, p);
            }
            a = mul(a, a, p);
            e >>= 1;
        }
        r
    }

    fn inv(a: u64, p: u64) -> u64 {
        pow(a, p - 2, p)
    }

    fn is_prime(n: u64) -> bool {
        if n < 2 || n % 2 == 0 {
            return n == 2;
        }
        let (mut d, mut s) = (n - 1, 0);
        while d % 2 == 0 {
            d /= 2;
            s += 1;
        }
        'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            let mut x = pow(a % n, d, n);
            if x == 1 || x == n - 1 || x == 0 {
                continue;
            }
            for _ in 1..s {
                x = mul(x, x, n);
                if x == n - 1 {
                    continue 'witness;
                }
            }
            return false;
        }
        true
    }

    /// (p, ω) pairs with ω a primitive cube root of unity mod p.
    fn primes() -> &'static [(u64, u64)] {
        static PS: OnceLock<Vec<(u64, u64)>> = OnceLock::new();
        PS.get_or_init(|| {
            let mut out = Vec::new();
            let mut n: u64 = (1 << 61) - 1;
            while out.len() < 48 {
                if n % 3 == 1 && is_prime(n) {
                    let w = (2..).map(|g| pow(g, (n - 1) / 3, n)).find(|&w| w != 1).unwrap();
                    out.push((n, w));
                }
                n -= 2;
            }
            out
        })
    }

    fn reduce(n: &BigInt, p: u64) -> u64 {
        let r = n.mod_floor(&BigInt::from(p));
        r.to_u64().unwrap()
    }

    fn rat_image(q: &BigRational, p: u64) -> Option<u64> {
        let d = reduce(q.denom(), p);
        if d == 0 {
            return None;
        }
        Some(mul(reduce(q.numer(), p), inv(d, p), p))
    }

    fn image(u: &[Scalar], p: u64, w: u64) -> Option<Vec<u64>> {
        u.iter()
            .map(|s| {
                let a = rat_image(&s.re, p)?;
                let b = rat_image(&s.zeta, p)?;
                Some((a + mul(b, w, p)) % p)
            })
            .collect()
    }

    fn rem(a: &mut Vec<u64>, b: &[u64], p: u64) {
        let db = b.len() - 1;
        let li = inv(b[db], p);
        while a.len() > db {
            let dr = a.len() - 1;
            let q = mul(a[dr], li, p);
            for (i, &bc) in b.iter().enumerate() {
                let k = dr - db + i;
                a[k] = (a[k] + p - mul(q, bc, p)) % p;
            }
            a.pop();
            while a.last() == Some(&0) {
                a.pop();
            }
        }
    }

    fn monic_gcd(mut x: Vec<u64>, mut y: Vec<u64>, p: u64) -> Vec<u64> {
        while !y.is_empty() {
            rem(&mut x, &y, p);
            std::mem::swap(&mut x, &mut y);
        }
        let li = inv(*x.last().unwrap(), p);
        x.iter().map(|&c| mul(c, li, p)).collect()
    }

    /// Rational r/s ≡ u (mod m) with |r|, |s| below √(m/2).
    fn reconstruct(u: &BigInt, m: &BigInt) -> Option<BigRational> {
        let bound = (m >> 1u32).sqrt();
        let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
        let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
        while r1 > bound {
            let q = &r0 / &r1;
            let r2 = &r0 - &q * &r1;
            let s2 = &s0 - &q * &s1;
            r0 = std::mem::replace(&mut r1, r2);
            s0 = std::mem::replace(&mut s1, s2);
        }
        if s1.is_zero() || s1.abs() > bound {
            return None;
        }
        Some(BigRational::new(r1, s1))
    }

    /// The monic gcd, or `None` when the images do not settle it.
    pub fn gcd(a: &[Scalar], b: &[Scalar], check: impl Fn(&[Scalar]) -> bool) -> Option<Vec<Scalar>> {
        let mut deg = usize::MAX;
        // residues of the two rational parts of each coefficient
        let mut acc: Vec<(BigInt, BigInt)> = Vec::new();
        let mut modulus = BigInt::one();
        let mut last: Option<Vec<Scalar>> = None;
        for &(p, w) in primes() {
            let w2 = mul(w, w, p);
            let (Some(a1), Some(b1), Some(a2), Some(b2)) =
                (image(a, p, w), image(b, p, w), image(a, p, w2), image(b, p, w2))
            else {
                continue;
            };
            if a1.last() == Some(&0) || b1.last() == Some(&0) || a2.last() == Some(&0) || b2.last() == Some(&0) {
                continue;
            }
            let g1 = monic_gcd(a1, b1, p);
            if g1.len() == 1 {
                return Some(vec![Scalar::one()]);
            }
            let g2 = monic_gcd(a2, b2, p);
            if g2.len() != g1.len() || g1.len() - 1 > deg {
                continue;
            }
            // c = x + yζ with images c1 = x + yω, c2 = x + yω²
            let d = inv((w + p - w2) % p, p);
            let parts: Vec<(u64, u64)> = g1
                .iter()
                .zip(&g2)
                .map(|(&c1, &c2)| {
                    let y = mul((c1 + p - c2) % p, d, p);
                    let x = (c1 + p - mul(y, w, p)) % p;
                    (x, y)
                })
                .collect();
            if g1.len() - 1 < deg {
                deg = g1.len() - 1;
                acc = parts.iter().map(|&(x, y)| (BigInt::from(x), BigInt::from(y))).collect();
                modulus = BigInt::from(p);
                last = None;
            } else {
                let pb = BigInt::from(p);
                let minv = BigInt::from(inv(reduce(&modulus, p), p));
                for ((ax, ay), &(x, y)) in acc.iter_mut().zip(&parts) {
                    for (r, v) in [(ax, x), (ay, y)] {
                        // r + m·((v − r)·m⁻¹ mod p)
                        let t = ((BigInt::from(v) - &*r) * &minv).mod_floor(&pb);
                        *r = &*r + &modulus * t;
                    }
                }
                modulus *= &pb;
            }
            let cand: Option<Vec<Scalar>> = acc
                .iter()
                .map(|(x, y)| Some(Scalar::new(reconstruct(x, &modulus)?, reconstruct(y, &modulus)?)))
                .collect();
            if let Some(c) = cand {
                if last.as_ref() == Some(&c) && check(&c) {
                    return Some(c);
                }
                if last.is_none() && check(&c) {
                    return Some(c);
                }
                last = Some(c);
            }
        }
        None
    }
}

fn uni_is_one(a: &Uni) -> bool {
    a.len() == 1
}

fn uni_to_poly(a: &Uni, v: usize) -> ScalarPoly {
    let terms = a
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| {
            let mut m = Mono::one();
            m.0[v] = k as u16;
            (m, c.clone())
        })
        .collect();
    ScalarPoly::from_terms(terms)
}

/// Coefficients of `p` in the variables before `v`, each a univariate polynomial in `v`.
fn split_last(p: &ScalarPoly, v: usize) -> HashMap<Mono, Uni> {
    let mut out: HashMap<Mono, Uni> = HashMap::new();
    for (m, c) in &p.terms {
        let mut key = *m;
        let e = key.0[v] as usize;
        key.0[v] = 0;
        let u = out.entry(key).or_default();
        if u.len() <= e {
            u.resize(e + 1, Scalar::zero());
        }
        u[e] = c.clone();
    }
    out
}

fn lex_key(m: &Mono, v: usize) -> [u16; MAX_VARS] {
    let mut k = m.0;
    for e in k.iter_mut().skip(v) {
        *e = 0;
    }
    k
}

/// Leading coefficient with respect to lex order on the variables before `v`.
fn lex_lead(parts: &HashMap<Mono, Uni>, v: usize) -> (Mono, Uni) {
    let (m, u) = parts.iter().max_by(|a, b| lex_key(a.0, v).cmp(&lex_key(b.0, v))).unwrap();
    (*m, u.clone())
}

fn eval_last(p: &ScalarPoly, v: usize, x: &Scalar) -> ScalarPoly {
    let d = p.degree_in(v).max(0) as usize;
    let mut pw = vec![Scalar::one()];
    for k in 1..=d {
        pw.push(pw[k - 1].mul(x));
    }
    let terms = p
        .terms
        .iter()
        .map(|(m, c)| {
            let mut r = *m;
            let e = r.0[v] as usize;
            r.0[v] = 0;
            (r, c.mul(&pw[e]))
        })
        .collect();
    ScalarPoly::from_terms(terms)
}

fn content_last(parts: &HashMap<Mono, Uni>) -> Uni {
    let mut g: Uni = Vec::new();
    let mut us: Vec<&Uni> = parts.values().collect();
    us.sort_by_key(|u| u.len());
    for u in us {
        g = uni_gcd(&g, u);
        if uni_is_one(&g) {
            break;
        }
    }
    g
}

fn divide_content(p: &ScalarPoly, c: &Uni, v: usize) -> ScalarPoly {
    if uni_is_one(c) {
        return p.clone();
    }
    let mut terms = Vec::new();
    for (m, u) in split_last(p, v) {
        for (k, s) in uni_divexact(&u, c).into_iter().enumerate() {
            if !s.is_zero() {
                let mut r = m;
                r.0[v] = k as u16;
                terms.push((r, s));
            }
        }
    }
    ScalarPoly::from_terms(terms)
}

/// Gcd (up to a constant) of nonzero `a`, `b` in the first `nv` variables.
fn brown(a: &ScalarPoly, b: &ScalarPoly, nv: usize) -> ScalarPoly {
    if nv == 0 {
        return ScalarPoly::from_int(1);
    }
    let v = nv - 1;
    let (da, db) = (a.degree_in(v), b.degree_in(v));
    if da == 0 && db == 0 {
        return brown(a, b, nv - 1);
    }
    if nv == 1 {
        let ua = split_last(a, 0).remove(&Mono::one()).unwrap();
        let ub = split_last(b, 0).remove(&Mono::one()).unwrap();
        return uni_to_poly(&uni_gcd(&ua, &ub), 0);
    }
    let pa = split_last(a, v);
    let pb = split_last(b, v);
    let ca = content_last(&pa);
    let cb = content_last(&pb);
    let c = uni_gcd(&ca, &cb);
    let a = divide_content(a, &ca, v);
    let b = divide_content(b, &cb, v);
    let pa = split_last(&a, v);
    let pb = split_last(&b, v);
    let content_poly = uni_to_poly(&c, v);
    let (_, lca) = lex_lead(&pa, v);
    let (_, lcb) = lex_lead(&pb, v);
    let gamma = uni_gcd(&lca, &lcb);
    // the interpolated gcd has v-degree at most this
    let bound = gamma.len() as i64 - 1 + a.degree_in(v).min(b.degree_in(v));

    let mut h = ScalarPoly::zero();
    let mut h_lead: Option<[u16; MAX_VARS]> = None;
    let mut q: Uni = vec![Scalar::one()];
    let mut npts = 0i64;
    let mut x = 0i64;
    loop {
        x += 1;
        let xs = Scalar::from_int(x);
        let ga = uni_eval(&gamma, &xs);
        if ga.is_zero() || uni_eval(&lca, &xs).is_zero() || uni_eval(&lcb, &xs).is_zero() {
            continue;
        }
        let ea = eval_last(&a, v, &xs);
        let eb = eval_last(&b, v, &xs);
        let g = brown(&ea, &eb, nv - 1);
        if g.is_constant() {
            return content_poly;
        }
        let gp = split_last(&g, v);
        let (gm, glc) = lex_lead(&gp, v);
        let key = lex_key(&gm, v);
        let g = g.scale(&ga.mul(&glc[0].inv().unwrap()));
        match h_lead {
            Some(hk) if key > hk => continue,
            Some(hk) if key == hk => {
                let hx = eval_last(&h, v, &xs);
                let diff = g.sub(&hx);
                if diff.is_zero() && npts > 0 {
                    let cand = primitive_last(&h, v);
                    if a.div_exact(&cand).is_some() && b.div_exact(&cand).is_some() {
                        return cand.mul(&content_poly);
                    }
                }
                let qx = uni_eval(&q, &xs).inv().unwrap();
                h = h.add(&diff.mul(&uni_to_poly(&q, v)).scale(&qx));
            }
            _ => {
                // first image, or every earlier image was unlucky
                h = g;
                h_lead = Some(key);
                q = vec![Scalar::one()];
                npts = 0;
            }
        }
        q = uni_mul_linear(&q, &xs);
        npts += 1;
        if npts > bound + 1 {
            let cand = primitive_last(&h, v);
            if a.div_exact(&cand).is_some() && b.div_exact(&cand).is_some() {
                return cand.mul(&content_poly);
            }
        }
    }
}

fn uni_mul_linear(q: &Uni, x: &Scalar) -> Uni {
    // q · (X − x)
    let mut out = vec![Scalar::zero(); q.len() + 1];
    for (i, c) in q.iter().enumerate() {
        out[i + 1] = out[i + 1].add(c);
        out[i] = out[i].sub(&c.mul(x));
    }
    out
}

fn primitive_last(p: &ScalarPoly, v: usize) -> ScalarPoly {
    let c = content_last(&split_last(p, v));
    divide_content(p, &c, v)
}

/// Gcd of the coefficients of `p` viewed as a polynomial in variable `v`.
pub fn content(p: &ScalarPoly, v: usize) -> ScalarPoly {
    let cs = p.coeffs_in(v);
    let mut g = ScalarPoly::zero();
    let mut cs: Vec<&ScalarPoly> = cs.iter().filter(|c| !c.is_zero()).collect();
    cs.sort_by_key(|c| (c.total_degree(), c.len()));
    for c in cs {
        g = gcd(&g, c);
        if g.is_constant() {
            break;
        }
    }
    g.make_monic()
}

/// Squarefree decomposition: pairs `(f, k)` of pairwise coprime squarefree monic
/// factors with multiplicity, and the leading constant, so that `p = c · ∏ f^k`.
pub fn squarefree(p: &ScalarPoly) -> (Scalar, Vec<(ScalarPoly, u32)>) {
    let c = p.lc().expect("nonzero polynomial").clone();
    let mut out: Vec<(ScalarPoly, u32)> = Vec::new();
    let monic = p.make_monic();
    let mc = monic.monomial_content();
    for (v, &e) in mc.0.iter().enumerate() {
        if e > 0 {
            out.push((ScalarPoly::var_s(v), e as u32));
        }
    }
    let rest = monic.div_mono(&mc);
    sqf_rec(&rest, &mut out);
    (c, merge(out))
}

fn sqf_rec(p: &ScalarPoly, out: &mut Vec<(ScalarPoly, u32)>) {
    if p.is_constant() {
        return;
    }
    let v = (0..p.arity()).find(|&v| p.degree_in(v) > 0).unwrap();
    let cont = content(p, v);
    let pp = p.div_exact(&cont).expect("content divides").make_monic();
    yun(&pp, v, out);
    sqf_rec(&cont, out);
}

/// Yun's algorithm with respect to `v`, for `p` primitive in `v`.
fn yun(p: &ScalarPoly, v: usize, out: &mut Vec<(ScalarPoly, u32)>) {
    let dp = p.derivative(v);
    let a0 = gcd(p, &dp);
    let mut b = p.div_exact(&a0).expect("gcd divides");
    let c = dp.div_exact(&a0).expect("gcd divides");
    let mut d = c.sub(&b.derivative(v));
    let mut i = 1;
    while !b.is_constant() {
        let a = gcd(&b, &d);
        if !a.is_constant() {
            out.push((a.make_monic(), i));
        }
        b = b.div_exact(&a).expect("gcd divides");
        let c = d.div_exact(&a).expect("gcd divides");
        d = c.sub(&b.derivative(v));
        i += 1;
    }
}

fn merge(fs: Vec<(ScalarPoly, u32)>) -> Vec<(ScalarPoly, u32)> {
    let mut out: Vec<(ScalarPoly, u32)> = Vec::new();
    for (f, k) in fs {
        match out.iter_mut().find(|(_, j)| *j == k) {
            Some(e) => e.0 = e.0.mul(&f),
            None => out.push((f, k)),
        }
    }
    out.sort_by_key(|(_, k)| *k);
    out
}
