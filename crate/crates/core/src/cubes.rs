//! Decidable fragments of "is this a cube (square, norm)?" over K, and canonical
//! representatives of radicand classes modulo n-th powers.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::gcd::{gcd, squarefree};
use crate::poly::ScalarPoly;
use crate::ratfun::RatFun;
use crate::scalar::Scalar;
use crate::tower::{Elem, Tower};

/// Evidence that a value is not an n-th power (or not a norm).
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// A constant of ℚ(ζ) without an n-th root in ℚ(ζ).
    Constant { value: Scalar, n: u32 },
    /// Total degree of the numerator (`numerator = true`) or denominator is not divisible by n.
    Degree { numerator: bool, degree: i64, n: u32 },
    /// A squarefree factor occurring with multiplicity prime to n.
    Multiplicity { factor: ScalarPoly, multiplicity: u32, n: u32 },
    /// For L = K[∛tᵢ]: every norm has weighted degree ≡ 0 mod 3 when tᵢ weighs 3.
    WeightedDegree { var: usize, degree: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Answer<W> {
    Yes(W),
    No(Certificate),
    Unknown,
}

impl<W> Answer<W> {
    pub fn label(&self) -> &'static str {
        match self {
            Answer::Yes(_) => "yes",
            Answer::No(_) => "no",
            Answer::Unknown => "unknown",
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, Answer::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Answer::No(_))
    }
}

impl std::fmt::Display for Certificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Certificate::Constant { value, n } => write!(f, "constant {} has no {}-th root in Q(zeta)", value, n),
            Certificate::Degree { numerator, degree, n } => {
                let part = if *numerator { "numerator" } else { "denominator" };
                write!(f, "{} has total degree {} (not divisible by {})", part, degree, n)
            }
            Certificate::Multiplicity { factor, multiplicity, n } => write!(
                f,
                "squarefree factor {} has multiplicity {} (not divisible by {})",
                RatFun::from_poly(factor.clone()),
                multiplicity,
                n
            ),
            Certificate::WeightedDegree { var, degree } => {
                write!(f, "weighted degree {} with t{} of weight 3 is not divisible by 3", degree, var + 1)
            }
        }
    }
}

fn scalar_root(c: &Scalar, n: u32) -> Option<Scalar> {
    match n {
        2 => c.sqrt(),
        3 => c.cube_root(),
        _ => None,
    }
}

/// Decides whether `c ∈ K*` is an n-th power (n = 2 or 3).
///
/// Exact: a reduced quotient P/Q is an n-th power iff every squarefree part of P and Q
/// has multiplicity divisible by n and the leftover constant is an n-th power.
pub fn is_power(c: &RatFun, n: u32) -> Answer<RatFun> {
    assert!(!c.is_zero(), "is_power of zero");
    for (numerator, p) in [(true, &c.num), (false, &c.den)] {
        let d = p.total_degree();
        if d % n as i64 != 0 {
            return Answer::No(Certificate::Degree { numerator, degree: d, n });
        }
    }
    let mut root = RatFun::one();
    let mut constant = Scalar::one();
    for (numerator, p) in [(true, &c.num), (false, &c.den)] {
        let (lc, fs) = squarefree(p);
        for (f, k) in fs {
            if k % n != 0 {
                return Answer::No(Certificate::Multiplicity { factor: f, multiplicity: k, n });
            }
            let part = RatFun::from_poly(f.pow(k / n, &Scalar::one()));
            root = if numerator { root.mul(&part) } else { root.div(&part).unwrap() };
        }
        constant = if numerator { constant.mul(&lc) } else { constant.div(&lc).unwrap() };
    }
    match scalar_root(&constant, n) {
        Some(r) => Answer::Yes(root.scale(&r)),
        None => Answer::No(Certificate::Constant { value: constant, n }),
    }
}

pub fn is_cube(c: &RatFun) -> Answer<RatFun> {
    is_power(c, 3)
}

pub fn is_square(c: &RatFun) -> Answer<RatFun> {
    is_power(c, 2)
}

/// Re-checks a "no" certificate for `is_power(c, n)` from scratch.
pub fn check_power_certificate(c: &RatFun, cert: &Certificate) -> bool {
    match cert {
        Certificate::Constant { value, n } => {
            // the constant is c divided by an n-th power; recompute it
            let (lc_n, _) = squarefree(&c.num);
            let (lc_d, _) = squarefree(&c.den);
            lc_n.div(&lc_d).as_ref() == Some(value) && scalar_root(value, *n).is_none()
        }
        Certificate::Degree { numerator, degree, n } => {
            let p = if *numerator { &c.num } else { &c.den };
            p.total_degree() == *degree && degree % *n as i64 != 0
        }
        Certificate::Multiplicity { factor, multiplicity, n } => {
            if multiplicity % n == 0 || factor.is_constant() {
                return false;
            }
            // factor^k divides exactly one side, and factor^(k+1) does not, with the
            // cofactor coprime to factor
            [&c.num, &c.den].iter().any(|p| {
                let fk = factor.pow(*multiplicity, &Scalar::one());
                match p.div_exact(&fk) {
                    Some(q) => gcd(&q, factor).is_constant(),
                    None => false,
                }
            })
        }
        Certificate::WeightedDegree { .. } => false,
    }
}

/// The single cubic radical of a degree-3 extension, as (index, variable if the radicand is tᵢ).
fn cubic_radical(l: &Tower) -> Option<(usize, Option<usize>)> {
    if l.radicals.len() != 1 || l.radicals[0].degree != 3 {
        return None;
    }
    let r = &l.radicals[0].radicand;
    let var = (0..l.nvars).find(|&i| *r == RatFun::var(i));
    Some((0, var))
}

/// Decides (partially) whether ξ ∈ K* is a norm from the cubic extension `l` = K[∛λ].
///
/// Yes when ξ/λᵏ is a cube c³ in K (witness c·(∛λ)ᵏ, re-verified); no when λ = tᵢ and ξ
/// has weighted degree prime to 3 with tᵢ of weight 3.
pub fn is_norm(l: &Arc<Tower>, xi: &RatFun) -> Answer<Elem> {
    assert!(!xi.is_zero(), "is_norm of zero");
    let Some((ri, var)) = cubic_radical(l) else {
        return Answer::Unknown;
    };
    let lambda = &l.radicals[ri].radicand;
    let r = Elem::radical(l, ri);
    for k in 0..3i64 {
        let q = xi.div(&lambda.pow(k)).unwrap();
        if let Answer::Yes(c) = is_cube(&q) {
            let w = Elem::from_k(l, c).mul(&r.pow(k).unwrap());
            let g = l.generator(ri);
            if w.norm(&g).ok().as_ref() == Some(xi) {
                return Answer::Yes(w);
            }
        }
    }
    if let Some(v) = var {
        let d = xi.weighted_degree(v, 3);
        if d % 3 != 0 {
            return Answer::No(Certificate::WeightedDegree { var: v, degree: d });
        }
    }
    Answer::Unknown
}

/// Re-checks a "no" certificate of [`is_norm`].
///
/// A norm N(a) of a ∈ K[∛tᵢ] has weighted degree 3·deg(a) when tᵢ weighs 3 and ∛tᵢ
/// weighs 1, so a weighted degree prime to 3 rules ξ out.
pub fn check_norm_certificate(l: &Tower, xi: &RatFun, cert: &Certificate) -> bool {
    match cert {
        Certificate::WeightedDegree { var, degree } => {
            cubic_radical(l).and_then(|(_, v)| v) == Some(*var)
                && xi.weighted_degree(*var, 3) == *degree
                && degree % 3 != 0
        }
        _ => false,
    }
}

/// Canonical representative of the class of `c` in K*/(K*)ⁿ, constants dropped:
/// the monic polynomial ∏ fᵏ over squarefree parts f of c with exponents reduced into
/// [0, n) (denominator parts enter with negated exponent).
pub fn canonical_class(c: &RatFun, n: u32) -> ScalarPoly {
    let mut out = ScalarPoly::from_int(1);
    for (numerator, p) in [(true, &c.num), (false, &c.den)] {
        if p.is_constant() {
            continue;
        }
        let (_, fs) = squarefree(p);
        for (f, k) in fs {
            let e = if numerator { k % n } else { (n - k % n) % n };
            if e > 0 {
                out = out.mul(&f.pow(e, &Scalar::one()));
            }
        }
    }
    out
}

/// A total order on polynomials used to pick canonical representatives.
pub fn poly_order(a: &ScalarPoly, b: &ScalarPoly) -> Ordering {
    (a.total_degree(), a.len())
        .cmp(&(b.total_degree(), b.len()))
        .then_with(|| format!("{:?}", a).cmp(&format!("{:?}", b)))
}

/// Canonical generator of the cyclic subgroup generated by the class of `c`:
/// the lesser of the canonical forms of c and c⁻¹ (for n = 3).
pub fn canonical_cyclic(c: &RatFun, n: u32) -> ScalarPoly {
    let a = canonical_class(c, n);
    if n == 2 {
        return a;
    }
    let b = canonical_class(&c.inv().unwrap(), n);
    if poly_order(&a, &b) == Ordering::Greater {
        b
    } else {
        a
    }
}

/// Refines polynomials into a coprime set of squarefree nonconstant factors such that
/// every input is a constant times a product of powers of them.
pub fn coprime_base(inputs: &[ScalarPoly]) -> Vec<ScalarPoly> {
    let mut base: Vec<ScalarPoly> = Vec::new();
    for p in inputs {
        if p.is_zero() || p.is_constant() {
            continue;
        }
        for (f, _) in squarefree(p).1 {
            let mut todo = vec![f];
            while let Some(f) = todo.pop() {
                if f.is_constant() {
                    continue;
                }
                let hit = base.iter().position(|b| !gcd(b, &f).is_constant());
                match hit {
                    None => base.push(f.make_monic()),
                    Some(i) => {
                        let b = base.swap_remove(i);
                        let g = gcd(&b, &f);
                        todo.push(g.clone());
                        todo.push(b.div_exact(&g).unwrap());
                        todo.push(f.div_exact(&g).unwrap());
                    }
                }
            }
        }
    }
    // duplicate factors may have been pushed from both sides of a split
    base.sort_by(poly_order);
    base.dedup();
    base
}

fn exponent(p: &ScalarPoly, f: &ScalarPoly) -> i64 {
    let mut p = p.clone();
    let mut k = 0;
    while let Some(q) = p.div_exact(f) {
        p = q;
        k += 1;
    }
    k
}

/// Exponent vectors of the radicands over a common coprime base, reduced mod n.
pub fn class_exponents(radicands: &[RatFun], n: u32) -> Vec<Vec<i64>> {
    let polys: Vec<ScalarPoly> = radicands.iter().flat_map(|r| [r.num.clone(), r.den.clone()]).collect();
    let base = coprime_base(&polys);
    radicands
        .iter()
        .map(|r| {
            base.iter()
                .map(|f| (exponent(&r.num, f) - exponent(&r.den, f)).rem_euclid(n as i64))
                .collect()
        })
        .collect()
}

/// Rank over 𝔽_p (p prime) of integer row vectors.
pub fn rank_mod(rows: &[Vec<i64>], p: i64) -> usize {
    let mut m: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|x| x.rem_euclid(p)).collect()).collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][col] != 0) else { continue };
        m.swap(rank, piv);
        let inv = (1..p).find(|x| x * m[rank][col] % p == 1).unwrap();
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..m.len() {
            if i != rank && m[i][col] != 0 {
                let f = m[i][col];
                for j in 0..ncols {
                    m[i][j] = (m[i][j] - f * m[rank][j]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Certifies that the radicands are multiplicatively independent modulo n-th powers,
/// using nonconstant factors only. `false` means "not certified", not "dependent".
pub fn certified_independent(radicands: &[RatFun], n: u32) -> bool {
    let rows = class_exponents(radicands, n);
    rank_mod(&rows, n as i64) == radicands.len()
}
