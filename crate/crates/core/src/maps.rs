//! Rational maps given by homogeneous forms over a tower, their composition and
//! projective comparison, Galois equivariance, and the 3-links and 6-links built
//! from closed points.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::galois::{act_form, monomials, subst_a, Form, MapAction, TwistGroup};
use crate::linalg::{adj3, det3, kernel, kernel_k, mat_vec, rank, Mat};
use crate::poly::{Mono, ScalarPoly};
use crate::ratfun::RatFun;
use crate::scalar::Scalar;
use crate::severi_brauer::{
    make_closed_point, normalize_3point, normalize_point, opposite, ClosedPoint, Surface,
};
use crate::tower::{seeded_rng, Elem, Tower};

/// A rational map given by forms of equal degree in `nsrc` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    pub coords: Vec<Form>,
    pub nsrc: usize,
    pub tower: Arc<Tower>,
}

fn common_tower(forms: &[Form], nvars: usize) -> Arc<Tower> {
    let mut t = Tower::base(nvars);
    for f in forms {
        for (_, c) in &f.terms {
            if !Arc::ptr_eq(&t, &c.tower) {
                t = Tower::compositum(&t, &c.tower);
            }
        }
    }
    t
}

fn embed_form(f: &Form, t: &Arc<Tower>) -> Form {
    f.map_coeffs(|c| if Arc::ptr_eq(&c.tower, t) { c.clone() } else { c.embed(t).expect("subtower") })
}

impl RationalMap {
    /// Checks homogeneity and equal degrees; no reduction is done.
    pub fn new(coords: Vec<Form>, nsrc: usize, nvars: usize) -> Result<RationalMap> {
        if coords.iter().all(|f| f.is_zero()) {
            return Err(Error::IdenticallyZero);
        }
        let mut deg = None;
        for f in coords.iter().filter(|f| !f.is_zero()) {
            if !f.is_homogeneous() || f.arity() > nsrc {
                return Err(Error::DegenerateConfiguration("coordinates must be forms in the source variables".into()));
            }
            match deg {
                None => deg = Some(f.total_degree()),
                Some(d) if d != f.total_degree() => {
                    return Err(Error::DegenerateConfiguration("coordinates have different degrees".into()))
                }
                _ => {}
            }
        }
        let tower = common_tower(&coords, nvars);
        let coords = coords.iter().map(|f| embed_form(f, &tower)).collect();
        Ok(RationalMap { coords, nsrc, tower })
    }

    pub fn identity(t: &Arc<Tower>, n: usize) -> RationalMap {
        let coords = (0..n).map(|i| Form::var(i, Elem::one(t))).collect();
        RationalMap { coords, nsrc: n, tower: t.clone() }
    }

    /// The linear map y = M·x.
    pub fn from_matrix(m: &Mat<Elem>) -> RationalMap {
        let coords = m
            .iter()
            .map(|r| Form::from_terms(r.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(j, c)| (Mono::var(j), c.clone())).collect()))
            .collect();
        let nv = m[0][0].tower.nvars;
        RationalMap::new(coords, m[0].len(), nv).expect("nonzero matrix")
    }

    /// The standard quadratic involution [yz : xz : xy].
    pub fn sigma(t: &Arc<Tower>) -> RationalMap {
        let one = Elem::one(t);
        let m = |e: [u16; 3]| Form::monomial(Mono::from_exps(&e), one.clone());
        RationalMap { coords: vec![m([0, 1, 1]), m([1, 0, 1]), m([1, 1, 0])], nsrc: 3, tower: t.clone() }
    }

    pub fn degree(&self) -> i64 {
        self.coords.iter().find(|f| !f.is_zero()).map(|f| f.total_degree()).unwrap_or(0)
    }

    pub fn embed(&self, t: &Arc<Tower>) -> RationalMap {
        let t = Tower::compositum(t, &self.tower);
        RationalMap { coords: self.coords.iter().map(|f| embed_form(f, &t)).collect(), nsrc: self.nsrc, tower: t }
    }

    pub fn eval(&self, p: &[Elem]) -> Vec<Elem> {
        self.coords.iter().map(|f| if f.is_zero() { Elem::zero(&self.tower) } else { f.eval(p) }).collect()
    }

    /// The map with σ applied to its coefficients.
    pub fn conjugate(&self, exps: &[u8], big: &Tower) -> RationalMap {
        RationalMap { coords: self.coords.iter().map(|f| act_form(exps, big, f)).collect(), ..self.clone() }
    }

    /// Linear map after this one: y ↦ M·f(y).
    pub fn then_matrix(&self, m: &Mat<Elem>) -> RationalMap {
        let coords = m
            .iter()
            .map(|r| {
                let mut acc = Form::zero();
                for (c, f) in r.iter().zip(&self.coords) {
                    if !c.is_zero() {
                        acc = acc.add(&f.scale(c));
                    }
                }
                acc
            })
            .collect();
        RationalMap::new(coords, self.nsrc, self.tower.nvars).expect("invertible matrix keeps the map nonzero")
    }

    /// Scales to polynomial coordinates with trivial content; the first coefficient of
    /// the leading term of the first nonzero coordinate gets leading coefficient 1.
    pub fn normalized(&self) -> RationalMap {
        let mut flat = Vec::new();
        for f in &self.coords {
            for (_, c) in &f.terms {
                flat.extend(c.coords.iter().cloned());
            }
        }
        let prim = crate::linalg::primitive(&flat);
        let mut it = prim.into_iter();
        let coords = self
            .coords
            .iter()
            .map(|f| {
                Form::from_terms(
                    f.terms
                        .iter()
                        .map(|(m, c)| {
                            let coords: Vec<RatFun> = (0..c.coords.len()).map(|_| it.next().unwrap()).collect();
                            (*m, Elem { tower: c.tower.clone(), coords })
                        })
                        .collect(),
                )
            })
            .collect();
        RationalMap { coords, ..self.clone() }
    }

    /// True when all coefficients lie in K.
    pub fn over_base(&self) -> bool {
        self.coords.iter().all(|f| f.terms.iter().all(|(_, c)| c.in_base().is_some()))
    }
}

impl std::fmt::Display for RationalMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names = ["x", "y", "z", "w"];
        let names: &[&str] = if self.nsrc == 4 { &["w", "x", "y", "z"] } else { &names[..self.nsrc.min(4)] };
        let parts: Vec<String> = self.coords.iter().map(|p| crate::expr::format_form(p, names)).collect();
        write!(f, "[{}]", parts.join(" : "))
    }
}

/// f∘h without removing common factors.
pub fn compose_raw(f: &RationalMap, h: &RationalMap) -> Result<RationalMap> {
    if f.nsrc != h.coords.len() {
        return Err(Error::DegenerateConfiguration(format!(
            "cannot compose a map of {} variables after one with {} coordinates",
            f.nsrc,
            h.coords.len()
        )));
    }
    let t = Tower::compositum(&f.tower, &h.tower);
    let (f, h) = (f.embed(&t), h.embed(&t));
    let coords: Vec<Form> = crate::par::map(&f.coords, |p| p.compose(&h.coords));
    if coords.iter().all(|p| p.is_zero()) {
        return Err(Error::IdenticallyZero);
    }
    Ok(RationalMap { coords, nsrc: h.nsrc, tower: t })
}

/// f∘h with the common factor of the coordinates removed.
pub fn compose(f: &RationalMap, h: &RationalMap) -> Result<RationalMap> {
    reduce(&compose_raw(f, h)?)
}

/// Removes the gcd of the coordinates and normalizes.
pub fn reduce(g: &RationalMap) -> Result<RationalMap> {
    let mono = g
        .coords
        .iter()
        .filter(|f| !f.is_zero())
        .map(|f| f.monomial_content())
        .reduce(|a, b| a.gcd(&b))
        .ok_or(Error::IdenticallyZero)?;
    let g = RationalMap { coords: g.coords.iter().map(|f| f.div_mono(&mono)).collect(), ..g.clone() };
    if g.degree() <= 1 {
        return Ok(g.normalized());
    }
    if g.over_base() {
        return Ok(reduce_over_base(&g).normalized());
    }
    Ok(reduce_over_tower(&g)?.normalized())
}

/// Coordinates over K as polynomials in (source variables, t₁, …, tₙ).
fn to_joint(g: &RationalMap) -> Vec<ScalarPoly> {
    let nsrc = g.nsrc;
    let mut den = ScalarPoly::from_int(1);
    for f in &g.coords {
        for (_, c) in &f.terms {
            let d = &c.in_base().unwrap().den;
            den = den.mul(&d.div_exact(&crate::gcd::gcd(&den, d)).unwrap());
        }
    }
    g.coords
        .iter()
        .map(|f| {
            let mut terms = Vec::new();
            for (m, c) in &f.terms {
                let c = c.in_base().unwrap();
                let p = c.num.mul(&den.div_exact(&c.den).unwrap());
                for (tm, tc) in &p.terms {
                    let mut e = m.0;
                    for i in 0..crate::poly::MAX_VARS - nsrc {
                        e[nsrc + i] = tm.0[i];
                    }
                    terms.push((Mono(e), tc.clone()));
                }
            }
            ScalarPoly::from_terms(terms)
        })
        .collect()
}

fn from_joint(p: &ScalarPoly, nsrc: usize, t: &Arc<Tower>) -> Form {
    let mut grouped: std::collections::BTreeMap<Mono, Vec<(Mono, Scalar)>> = Default::default();
    for (m, c) in &p.terms {
        let mut src = Mono::one();
        let mut rest = Mono::one();
        for i in 0..crate::poly::MAX_VARS {
            if i < nsrc {
                src.0[i] = m.0[i];
            } else {
                rest.0[i - nsrc] = m.0[i];
            }
        }
        grouped.entry(src).or_default().push((rest, c.clone()));
    }
    Form::from_terms(
        grouped
            .into_iter()
            .map(|(m, ts)| (m, Elem::from_k(t, RatFun::from_poly(ScalarPoly::from_terms(ts)))))
            .collect(),
    )
}

fn reduce_over_base(g: &RationalMap) -> RationalMap {
    assert!(g.nsrc + g.tower.nvars <= crate::poly::MAX_VARS, "too many variables");
    let joint = to_joint(g);
    let mut d: Option<ScalarPoly> = None;
    for p in joint.iter().filter(|p| !p.is_zero()) {
        d = Some(match d {
            None => p.clone(),
            Some(d) => crate::gcd::gcd(&d, p),
        });
    }
    let d = d.unwrap();
    let coords = joint
        .iter()
        .map(|p| if p.is_zero() { Form::zero() } else { from_joint(&p.div_exact(&d).unwrap(), g.nsrc, &g.tower) })
        .collect();
    RationalMap { coords, ..g.clone() }
}

/// Monomials of degree d in n variables.
pub fn monomials_n(n: usize, d: u32) -> Vec<Mono> {
    if n == 3 {
        return monomials(d);
    }
    let mut out = Vec::new();
    fn go(n: usize, e: &mut Vec<u16>, left: u32, out: &mut Vec<Mono>) {
        if e.len() == n - 1 {
            e.push(left as u16);
            out.push(Mono::from_exps(e));
            e.pop();
            return;
        }
        for a in (0..=left).rev() {
            e.push(a as u16);
            go(n, e, left - a, out);
            e.pop();
        }
    }
    go(n, &mut Vec::new(), d, &mut out);
    out
}

fn random_point(rng: &mut impl Rng, t: &Arc<Tower>, n: usize) -> Vec<Elem> {
    (0..n).map(|_| Elem::from_int(t, rng.gen_range(-9..=9))).collect()
}

/// An upper bound for the degree of the common factor of the coordinates over the tower.
///
/// A common factor D specializes (t ↦ a point of ℚ(ζ)ⁿ, radicals kept symbolic) to a
/// common factor whose norm, of degree dim·deg D, divides every specialized norm. `None`
/// when no usable specialization was found.
pub fn common_factor_bound(g: &RationalMap) -> Option<i64> {
    let t = &g.tower;
    let mut rng = seeded_rng(19);
    'trial: for _ in 0..8 {
        let pt: Vec<Scalar> = (0..t.nvars).map(|_| Scalar::from_int(rng.gen_range(2..=40) * if rng.gen() { 1 } else { -1 })).collect();
        let mut rads = Vec::new();
        for r in &t.radicals {
            match r.radicand.eval(&pt) {
                Some(c) if !c.is_zero() => {
                    rads.push(crate::tower::Radical { name: r.name.clone(), degree: r.degree, radicand: RatFun::from_scalar(c) })
                }
                _ => continue 'trial,
            }
        }
        let special = Tower::new(0, rads).ok()?;
        let mut forms = Vec::new();
        for f in g.coords.iter().filter(|f| !f.is_zero()) {
            let mut terms = Vec::new();
            for (m, c) in &f.terms {
                let Some(v) = c.specialize(&pt) else { continue 'trial };
                terms.push((*m, Elem { tower: special.clone(), coords: v.into_iter().map(RatFun::from_scalar).collect() }));
            }
            forms.push(Form::from_terms(terms));
        }
        let group = crate::galois::group_elements(&special);
        let norms: Vec<ScalarPoly> = crate::par::map(&forms, |f| {
            let n = group.iter().skip(1).fold(f.clone(), |acc, e| acc.mul(&act_form(e, &special, f)));
            n.map_coeffs(|c| c.in_base().and_then(|r| r.as_scalar()).expect("norms lie in the base"))
        });
        let nonzero: Vec<&ScalarPoly> = norms.iter().filter(|p| !p.is_zero()).collect();
        if nonzero.is_empty() {
            continue;
        }
        let mut d = nonzero[0].clone();
        for p in &nonzero[1..] {
            if d.is_constant() {
                break;
            }
            d = crate::gcd::gcd(&d, p);
        }
        return Some(d.total_degree() / t.dim() as i64);
    }
    None
}

/// Divides every coordinate by each factor as often as all coordinates allow.
pub fn divide_out(g: &RationalMap, factors: &[Form]) -> RationalMap {
    let t = factors.iter().fold(g.tower.clone(), |t, f| Tower::compositum(&t, &common_tower(std::slice::from_ref(f), t.nvars)));
    let mut coords: Vec<Form> = g.coords.iter().map(|c| embed_form(c, &t)).collect();
    for f in factors.iter().filter(|f| !f.is_constant()) {
        let f = embed_form(f, &t);
        loop {
            let q: Option<Vec<Form>> =
                coords.iter().map(|c| if c.is_zero() { Some(Form::zero()) } else { c.div_exact(&f) }).collect();
            match q {
                Some(q) => coords = q,
                None => break,
            }
        }
    }
    RationalMap::new(coords, g.nsrc, g.tower.nvars).expect("nonzero quotient")
}

/// Over a tower, finds the forms H of least degree with Hᵢ·Gⱼ = Hⱼ·Gᵢ: linear conditions
/// imposed at random points and solved over K, then checked symbolically.
fn reduce_over_tower(g: &RationalMap) -> Result<RationalMap> {
    let n = g.coords.len();
    let t = g.tower.clone();
    let dim = t.dim();
    let mut rng = seeded_rng(11);
    let bound = common_factor_bound(g).unwrap_or(g.degree() - 1);
    if bound == 0 {
        return Ok(g.clone());
    }
    for e in (g.degree() - bound).max(1)..g.degree() {
        let monos = monomials_n(g.nsrc, e as u32);
        let nunk = n * monos.len() * dim;
        let npts = n * monos.len() / 2 + 3;
        let mut rows: Vec<Vec<RatFun>> = Vec::new();
        for _ in 0..npts {
            let p = random_point(&mut rng, &t, g.nsrc);
            let gv = g.eval(&p);
            let mv: Vec<Elem> = monos.iter().map(|m| Form::monomial(*m, Elem::one(&t)).eval(&p)).collect();
            for i in 0..n {
                for j in i + 1..n {
                    // Σ c_{i,m}·m(P)·Gⱼ(P) − c_{j,m}·m(P)·Gᵢ(P), expanded over the basis of T
                    let mut block = vec![vec![RatFun::zero(); nunk]; dim];
                    for (mi, v) in mv.iter().enumerate() {
                        for (slot, other, sign) in [(i, &gv[j], 1i64), (j, &gv[i], -1)] {
                            let base = v.mul(other);
                            for b in 0..dim {
                                let mut unit = Elem::zero(&t);
                                unit.coords[b] = RatFun::from_int(sign);
                                let val = base.mul(&unit);
                                let col = (slot * monos.len() + mi) * dim + b;
                                for r in 0..dim {
                                    block[r][col] = val.coords[r].clone();
                                }
                            }
                        }
                    }
                    rows.extend(block);
                }
            }
        }
        let ker = kernel_k(&rows, nunk);
        let Some(v) = ker.first() else { continue };
        let coords: Vec<Form> = (0..n)
            .map(|slot| {
                Form::from_terms(
                    monos
                        .iter()
                        .enumerate()
                        .map(|(mi, m)| {
                            let base = (slot * monos.len() + mi) * dim;
                            (*m, Elem { tower: t.clone(), coords: v[base..base + dim].to_vec() })
                        })
                        .filter(|(_, c)| !c.is_zero())
                        .collect(),
                )
            })
            .collect();
        let h = RationalMap { coords, nsrc: g.nsrc, tower: t.clone() };
        if h.coords.iter().any(|f| !f.is_zero()) && equals(&h, g) {
            return Ok(h);
        }
    }
    Ok(g.clone())
}

/// Projective equality: all 2×2 cross products vanish.
pub fn equals(f: &RationalMap, h: &RationalMap) -> bool {
    if f.coords.len() != h.coords.len() || f.nsrc != h.nsrc {
        return false;
    }
    let t = Tower::compositum(&f.tower, &h.tower);
    let (f, h) = (f.embed(&t), h.embed(&t));
    let n = f.coords.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    // cheap rejection on the zero pattern
    for i in 0..n {
        if f.coords[i].is_zero() != h.coords[i].is_zero() {
            return false;
        }
    }
    crate::par::map(&pairs, |&(i, j)| f.coords[i].mul(&h.coords[j]) == f.coords[j].mul(&h.coords[i]))
        .into_iter()
        .all(|b| b)
}

/// Exact test that `lhs` and `rhs`, polynomial maps of plane points of total degree at
/// most `bound` together, agree projectively: each cross product is a form of degree
/// ≤ bound, so it vanishes once it vanishes on a (bound+1)² grid of the chart z = 1.
pub fn agree_on_grid(
    lhs: impl Fn(&[Elem]) -> Vec<Elem> + Sync,
    rhs: impl Fn(&[Elem]) -> Vec<Elem> + Sync,
    bound: usize,
    t: &Arc<Tower>,
) -> bool {
    let side = bound + 1;
    let ok = crate::par::map_range(side * side, |idx| {
        let (a, b) = ((idx / side) as i64, (idx % side) as i64);
        let p = [Elem::from_int(t, a), Elem::from_int(t, b), Elem::one(t)];
        let (u, v) = (lhs(&p), rhs(&p));
        (0..u.len()).all(|i| (i + 1..u.len()).all(|j| u[i].mul(&v[j]) == u[j].mul(&v[i])))
    });
    ok.into_iter().all(|b| b)
}

/// True when h∘f is the identity, checked exactly: symbolically when the composition is
/// sparse enough, on a grid otherwise.
pub fn is_inverse_pair(h: &RationalMap, f: &RationalMap) -> bool {
    let d = (h.degree() * f.degree()) as usize;
    // a bound on the number of products formed by the symbolic composition
    let fmax = f.coords.iter().map(|c| c.len()).max().unwrap_or(0) as f64;
    let hterms: usize = h.coords.iter().map(|c| c.len()).sum();
    if hterms as f64 * fmax.powi(h.degree() as i32) < 1e7 {
        let Ok(c) = compose_raw(h, f) else { return false };
        return equals(&c, &RationalMap::identity(&c.tower, f.nsrc));
    }
    let t = Tower::compositum(&h.tower, &f.tower);
    agree_on_grid(|p| h.eval(&f.eval(p)), |p| p.to_vec(), d + 1, &t)
}

/// f∘(Aᵏ∘σ) = (A′ᵏ∘σ)∘f projectively, for each generator σ of the Galois group of
/// the compositum of L with the coefficients of f.
pub fn is_equivariant(f: &RationalMap, src: &Surface, tgt: &Surface) -> bool {
    if f.coords.len() != 3 || f.nsrc != 3 || !src.same_extension(tgt) {
        return false;
    }
    let group = TwistGroup::new(src, &f.tower);
    group.generators().iter().all(|e| {
        let k = group.k(e);
        let lhs: Vec<Form> = f.coords.iter().map(|p| subst_a(p, &src.xi, k)).collect();
        let mut rhs: Vec<Form> = f.coords.iter().map(|p| act_form(e, &group.tower, p)).collect();
        for _ in 0..k {
            rhs = vec![rhs[2].map_coeffs(|c| c.scale(&tgt.xi)), rhs[0].clone(), rhs[1].clone()];
        }
        let nv = src.nvars();
        match (RationalMap::new(lhs, 3, nv), RationalMap::new(rhs, 3, nv)) {
            (Ok(a), Ok(b)) => equals(&a, &b),
            _ => false,
        }
    })
}

/// Order of vanishing of all coordinates at a point.
pub fn multiplicity(f: &RationalMap, p: &[Elem]) -> usize {
    let mut layer: Vec<Form> = f.coords.iter().filter(|c| !c.is_zero()).cloned().collect();
    let mut m = 0;
    loop {
        if layer.iter().any(|g| !g.is_zero() && !g.eval(p).is_zero()) {
            return m;
        }
        m += 1;
        let next: Vec<Form> =
            layer.iter().flat_map(|g| (0..f.nsrc).map(move |v| g.derivative(v))).filter(|g| !g.is_zero()).collect();
        if next.is_empty() {
            return m;
        }
        layer = next;
    }
}

/// A base point with its multiplicity.
#[derive(Clone, Debug)]
pub struct BasePoint {
    pub point: Vec<Elem>,
    pub multiplicity: usize,
}

/// Certifies the base locus of a birational plane map of degree d: every candidate is a
/// base point, and the multiplicities satisfy Σmᵢ = 3(d−1) and Σmᵢ² = d²−1, so no other
/// base points (proper or infinitely near) remain.
pub fn base_points(f: &RationalMap, candidates: &[Vec<Elem>]) -> Result<Vec<BasePoint>> {
    if has_common_factor(f) {
        return Err(Error::NonFiniteBaseLocus);
    }
    let d = f.degree() as usize;
    let mut out = Vec::new();
    for c in candidates {
        let m = multiplicity(f, c);
        if m == 0 {
            return Err(Error::IdentityFails { check: "candidate is a base point".into(), residue: format!("{:?}", f.eval(c)) });
        }
        out.push(BasePoint { point: normalize_point(c), multiplicity: m });
    }
    let s1: usize = out.iter().map(|b| b.multiplicity).sum();
    let s2: usize = out.iter().map(|b| b.multiplicity * b.multiplicity).sum();
    if d >= 1 && (s1 != 3 * (d - 1) || s2 + 1 != d * d) {
        return Err(Error::IdentityFails {
            check: "base locus is complete (Σm = 3(d-1), Σm² = d²-1)".into(),
            residue: format!("Σm = {}, Σm² = {}, d = {}", s1, s2, d),
        });
    }
    Ok(out)
}

/// True when the coordinates share a factor of positive degree in the source variables.
pub fn has_common_factor(f: &RationalMap) -> bool {
    let nz: Vec<&Form> = f.coords.iter().filter(|c| !c.is_zero()).collect();
    if nz.iter().map(|c| c.monomial_content()).reduce(|a, b| a.gcd(&b)).is_some_and(|m| !m.is_one()) {
        return true;
    }
    if f.over_base() {
        return reduce_over_base(f).degree() < f.degree();
    }
    false
}

/// A rational map that commutes with the twisted Galois actions of its surfaces.
#[derive(Clone, Debug)]
pub struct TwistedMap {
    pub map: RationalMap,
    pub source: Surface,
    pub target: Surface,
}

impl TwistedMap {
    pub fn is_equivariant(&self) -> bool {
        is_equivariant(&self.map, &self.source, &self.target)
    }
}

/// A Sarkisov link of type II between S_ξ and S_{1/ξ}, blowing up a point of degree 3
/// or 6.
#[derive(Clone, Debug)]
pub struct Link {
    pub forward: TwistedMap,
    pub backward: TwistedMap,
    pub base_point: ClosedPoint,
    pub inverse_base_point: ClosedPoint,
    pub degree_class: u8,
    /// Rank of the linear conditions cutting out the linear system of the forward map.
    pub condition_rank: usize,
}

impl Link {
    /// The same link read backwards.
    pub fn inverse(&self) -> Link {
        Link {
            forward: self.backward.clone(),
            backward: self.forward.clone(),
            base_point: self.inverse_base_point.clone(),
            inverse_base_point: self.base_point.clone(),
            degree_class: self.degree_class,
            condition_rank: self.condition_rank,
        }
    }

    /// Checks the round trip, equivariance and matching splitting fields.
    pub fn verify(&self) -> Result<()> {
        if !is_inverse_pair(&self.backward.map, &self.forward.map) {
            return Err(Error::IdentityFails { check: "backward∘forward = id".into(), residue: "nonzero cross product".into() });
        }
        if !self.forward.is_equivariant() || !self.backward.is_equivariant() {
            return Err(Error::IdentityFails { check: "link equivariance".into(), residue: "maps do not commute with g".into() });
        }
        if self.base_point.splitting != self.inverse_base_point.splitting {
            return Err(Error::SplittingFieldMismatch);
        }
        Ok(())
    }
}

fn components_matrix(p: &ClosedPoint) -> Mat<Elem> {
    (0..3).map(|i| (0..3).map(|j| p.components[j][i].clone()).collect()).collect()
}

/// Coefficient rows of forms on the monomials of degree d.
fn coefficient_rows(forms: &[Form], d: u32, t: &Arc<Tower>) -> Mat<Elem> {
    let monos = monomials(d);
    forms
        .iter()
        .map(|f| monos.iter().map(|m| f.coeff(m).cloned().map(|c| c.embed(t).unwrap()).unwrap_or_else(|| Elem::zero(t))).collect())
        .collect()
}

/// A K-combination of invariant solutions whose three coordinates are independent.
fn pick_independent(sols: &[Vec<Form>], d: u32, nvars: usize) -> Option<RationalMap> {
    for trial in 0..24i64 {
        let v: Vec<RatFun> = (0..sols.len())
            .map(|j| if trial == 0 { RatFun::from_int((j == 0) as i64) } else { RatFun::from_int((trial + 1).pow(j as u32 % 8) % 97 - 48) })
            .collect();
        let f = crate::galois::combine(sols, &v);
        if f.iter().any(|p| p.is_zero()) {
            continue;
        }
        let Ok(m) = RationalMap::new(f, 3, nvars) else { continue };
        if rank(&coefficient_rows(&m.coords, d, &m.tower)) == 3 {
            return Some(m);
        }
    }
    None
}

/// The forward map of a 3-link at p, from S to S^op.
fn three_link_forward(s: &Surface, p: &ClosedPoint) -> Result<RationalMap> {
    let tgt = opposite(s);
    if p.splitting == crate::galois::Descriptor::of_tower(&s.l) {
        let (phi, _) = normalize_3point(p)?;
        let f = compose_raw(&RationalMap::sigma(&Tower::base(s.nvars())), &RationalMap::from_matrix(&phi))?.normalized();
        if is_equivariant(&f, s, &tgt) {
            return Ok(f);
        }
    }
    let act = MapAction::new(s, &tgt, 2, &p.group_tower)?;
    let p1: Vec<Elem> = p.components[0].iter().map(|x| x.embed(&act.coeff).unwrap()).collect();
    let sols = act.solve(|f| f.iter().map(|fi| if fi.is_zero() { Elem::zero(&act.coeff) } else { fi.eval(&p1) }).collect());
    let f = pick_independent(&sols, 2, s.nvars())
        .ok_or_else(|| Error::EquivariantBasisNotFound("no invariant net of conics through the point".into()))?;
    Ok(f.normalized())
}

/// The 3-link blowing up the degree-3 point p.
pub fn link_from_3point(s: &Surface, p: &ClosedPoint) -> Result<Link> {
    if p.degree() != 3 {
        return Err(Error::BadDegree(p.degree()));
    }
    let m = components_matrix(p);
    if det3(&m).is_zero() {
        return Err(Error::Collinear);
    }
    let tgt = opposite(s);
    let f = three_link_forward(s, p)?;
    // f = N·σ∘M⁻¹; recover N from the coefficients of q = σ∘adj(M)
    let q = compose_raw(&RationalMap::sigma(&p.tower), &RationalMap::from_matrix(&adj3(&m)))?;
    let t = Tower::compositum(&f.tower, &q.tower);
    let fr = coefficient_rows(&f.coords, 2, &t);
    let qr = coefficient_rows(&q.coords, 2, &t);
    let n = (0..6)
        .flat_map(|a| (a + 1..6).flat_map(move |b| (b + 1..6).map(move |c| [a, b, c])))
        .find_map(|cols| {
            let qc: Mat<Elem> = qr.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
            if det3(&qc).is_zero() {
                return None;
            }
            let fc: Mat<Elem> = fr.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
            Some(crate::linalg::mat_mul(&fc, &adj3(&qc)))
        })
        .ok_or(Error::Collinear)?;
    // backward = M∘σ∘adj(N)
    let b = compose_raw(&RationalMap::sigma(&t), &RationalMap::from_matrix(&adj3(&n)))?.then_matrix(&m).normalized();
    let q_comps: Vec<Vec<Elem>> = (0..3).map(|j| (0..3).map(|i| n[i][j].clone()).collect()).collect();
    let qp = make_closed_point(&tgt, &q_comps)?;
    let link = Link {
        forward: TwistedMap { map: f, source: s.clone(), target: tgt.clone() },
        backward: TwistedMap { map: b, source: tgt, target: s.clone() },
        base_point: p.clone(),
        inverse_base_point: qp,
        degree_class: 3,
        condition_rank: 3,
    };
    link.verify()?;
    Ok(link)
}

fn six_general_position(p: &ClosedPoint) -> Result<()> {
    six_in_general_position(&p.components, &p.tower)
}

/// No three of the six points are collinear and they do not lie on a conic.
pub(crate) fn six_in_general_position(c: &[Vec<Elem>], t: &Arc<Tower>) -> Result<()> {
    for i in 0..6 {
        for j in i + 1..6 {
            for k in j + 1..6 {
                let m: Mat<Elem> = vec![c[i].clone(), c[j].clone(), c[k].clone()];
                if det3(&m).is_zero() {
                    return Err(Error::SpecialPosition(format!("components {}, {}, {} are collinear", i, j, k)));
                }
            }
        }
    }
    let conic_rows: Mat<Elem> = c.iter().map(|v| monomials(2).iter().map(|m| Form::monomial(*m, Elem::one(t)).eval(v)).collect()).collect();
    if rank(&conic_rows) < 6 {
        return Err(Error::SpecialPosition("the six components lie on a conic".into()));
    }
    Ok(())
}

/// The forward map of a 6-link at p and the rank of the double-point conditions.
fn six_link_forward(s: &Surface, p: &ClosedPoint) -> Result<(RationalMap, usize)> {
    let tgt = opposite(s);
    let act = MapAction::new(s, &tgt, 5, &p.group_tower)?;
    let p1: Vec<Elem> = p.components[0].iter().map(|x| x.embed(&act.coeff).unwrap()).collect();
    let sols = act.solve(|f| {
        f.iter()
            .flat_map(|fi| (0..3).map(move |v| fi.derivative(v)))
            .map(|d| if d.is_zero() { Elem::zero(&act.coeff) } else { d.eval(&p1) })
            .collect()
    });
    // the invariant triples form a K-structure on W³, W the quintics double at p
    if sols.len() % 3 != 0 || sols.len() / 3 != 3 {
        return Err(Error::SpecialPosition(format!("quintics double at the point form a space of dimension {}", sols.len() as f64 / 3.0)));
    }
    let rank = 21 - sols.len() / 3;
    let f = pick_independent(&sols, 5, s.nvars())
        .ok_or_else(|| Error::EquivariantBasisNotFound("no invariant web of quintics".into()))?;
    Ok((f.normalized(), rank))
}

/// The image of the conic through all components but the j-th.
fn contracted_conic_image(f: &RationalMap, p: &ClosedPoint, j: usize) -> Result<Vec<Elem>> {
    let t = &p.tower;
    let others: Vec<&Vec<Elem>> = p.components.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, c)| c).collect();
    let monos = monomials(2);
    let rows: Mat<Elem> = others.iter().map(|v| monos.iter().map(|m| Form::monomial(*m, Elem::one(t)).eval(v)).collect()).collect();
    let ker = kernel(&rows, 6, &Elem::zero(t));
    if ker.len() != 1 {
        return Err(Error::SpecialPosition("five components do not determine a unique conic".into()));
    }
    let q = Form::from_terms(monos.iter().zip(&ker[0]).filter(|(_, c)| !c.is_zero()).map(|(m, c)| (*m, c.clone())).collect());
    let grad: Vec<Form> = (0..3).map(|v| q.derivative(v)).collect();
    let pk = others[0];
    for d in [[1i64, 2, 3], [1, -1, 2], [2, 5, -3], [3, 1, 7], [1, 4, -2]] {
        let d: Vec<Elem> = d.iter().map(|&x| Elem::from_int(t, x)).collect();
        let qd = q.eval(&d);
        let gd = grad.iter().zip(&d).fold(Elem::zero(t), |a, (g, x)| a.add(&g.eval(pk).mul(x)));
        if qd.is_zero() || gd.is_zero() {
            continue;
        }
        // second intersection of the line pk + u·d with the conic
        let r: Vec<Elem> = (0..3).map(|i| pk[i].mul(&qd).sub(&gd.mul(&d[i]))).collect();
        let img = f.eval(&r);
        if img.iter().any(|x| !x.is_zero()) {
            return Ok(normalize_point(&img));
        }
    }
    Err(Error::SpecialPosition("could not find a general point on a contracted conic".into()))
}

/// The linear map sending the frame P₁..P₄ to Q₁..Q₄ (projectively).
pub(crate) fn frame_map(ps: &[Vec<Elem>], qs: &[Vec<Elem>]) -> Option<Mat<Elem>> {
    let cols = |v: &[Vec<Elem>]| -> Mat<Elem> { (0..3).map(|i| (0..3).map(|j| v[j][i].clone()).collect()).collect() };
    let mp = cols(ps);
    let mq = cols(qs);
    if det3(&mp).is_zero() || det3(&mq).is_zero() {
        return None;
    }
    let a = mat_vec(&adj3(&mp), &ps[3]);
    let b = mat_vec(&adj3(&mq), &qs[3]);
    if a.iter().chain(&b).any(|x| x.is_zero()) {
        return None;
    }
    // diag(bᵢ/aᵢ) scaled by a₀a₁a₂
    let d: Vec<Elem> = (0..3).map(|i| b[i].mul(&a[(i + 1) % 3]).mul(&a[(i + 2) % 3])).collect();
    let scaled: Mat<Elem> = mq.iter().map(|r| r.iter().zip(&d).map(|(x, y)| x.mul(y)).collect()).collect();
    Some(crate::linalg::mat_mul(&scaled, &adj3(&mp)))
}

/// The 6-link blowing up the degree-6 point p.
pub fn link_from_6point(s: &Surface, p: &ClosedPoint) -> Result<Link> {
    if p.degree() != 6 {
        return Err(Error::BadDegree(p.degree()));
    }
    six_general_position(p)?;
    let tgt = opposite(s);
    let (f, rank) = six_link_forward(s, p)?;
    let q_comps = (0..6).map(|j| contracted_conic_image(&f, p, j)).collect::<Result<Vec<_>>>()?;
    let q = make_closed_point(&tgt, &q_comps)?;
    if q.degree() != 6 {
        return Err(Error::SpecialPosition("contracted conics do not map to six points".into()));
    }
    six_general_position(&q)?;
    let (b0, _) = six_link_forward(&tgt, &q)?;
    // b0∘f is an automorphism α of S; fold α⁻¹ into the backward map
    let t = Tower::compositum(&f.tower, &b0.tower);
    let mut rng = seeded_rng(13);
    let mut frame = Some([[1i64, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]);
    let alpha = loop {
        // the standard frame keeps values small; random frames are the fallback
        let ps: Vec<Vec<Elem>> = match frame.take() {
            Some(fr) => fr.iter().map(|v| v.iter().map(|&x| Elem::from_int(&t, x)).collect()).collect(),
            None => (0..4).map(|_| random_point(&mut rng, &t, 3)).collect(),
        };
        let qs: Vec<Vec<Elem>> = ps.iter().map(|x| b0.eval(&f.eval(x))).collect();
        if let Some(a) = frame_map(&ps, &qs) {
            break a;
        }
    };
    let b = b0.then_matrix(&adj3(&alpha)).normalized();
    let link = Link {
        forward: TwistedMap { map: f, source: s.clone(), target: tgt.clone() },
        backward: TwistedMap { map: b, source: tgt, target: s.clone() },
        base_point: p.clone(),
        inverse_base_point: q,
        degree_class: 6,
        condition_rank: rank,
    };
    link.verify()?;
    Ok(link)
}

/// Dispatches on the degree of the point.
pub fn link_from_point(s: &Surface, p: &ClosedPoint) -> Result<Link> {
    match p.degree() {
        3 => link_from_3point(s, p),
        6 => link_from_6point(s, p),
        d => Err(Error::BadDegree(d)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::severi_brauer::{coordinate_point, cyclic_extension, make_surface, orbit, second_3point, sixpoint_from_sqrt};

    fn s_t2() -> Surface {
        let (l, g) = cyclic_extension(2, &RatFun::var(0), "a");
        make_surface(&l, &g, &RatFun::var(1)).unwrap()
    }

    fn k() -> Arc<Tower> {
        Tower::base(2)
    }

    fn form(t: &Arc<Tower>, terms: &[(i64, [u16; 3])]) -> Form {
        Form::from_terms(terms.iter().map(|(c, e)| (Mono::from_exps(e), Elem::from_int(t, *c))).collect())
    }

    fn map(t: &Arc<Tower>, cs: &[&[(i64, [u16; 3])]]) -> RationalMap {
        RationalMap::new(cs.iter().map(|c| form(t, c)).collect(), 3, 2).unwrap()
    }

    #[test]
    fn sigma_is_an_involution() {
        let t = k();
        let s = RationalMap::sigma(&t);
        let id = RationalMap::identity(&t, 3);
        assert!(equals(&compose(&s, &s).unwrap(), &id));
        assert_eq!(compose(&s, &id).unwrap(), s.normalized());
    }

    #[test]
    fn projective_equality() {
        let t = k();
        let id = RationalMap::identity(&t, 3);
        let twice = map(&t, &[&[(2, [1, 0, 0])], &[(2, [0, 1, 0])], &[(2, [0, 0, 1])]]);
        assert!(equals(&id, &twice));
        assert!(!equals(&id, &RationalMap::sigma(&t)));
    }

    #[test]
    fn gcd_removed_over_k() {
        let t = k();
        // (x+y)·[x : y : z] with a parameter in the coefficients
        let tt = Elem::var(&t, 0);
        let f = |e: [u16; 3]| Form::monomial(Mono::from_exps(&e), tt.clone());
        let g = RationalMap::new(
            vec![f([2, 0, 0]).add(&f([1, 1, 0])), f([1, 1, 0]).add(&f([0, 2, 0])), f([1, 0, 1]).add(&f([0, 1, 1]))],
            3,
            2,
        )
        .unwrap();
        assert_eq!(reduce(&g).unwrap().degree(), 1);
        assert!(equals(&reduce(&g).unwrap(), &RationalMap::identity(&t, 3)));
    }

    #[test]
    fn gcd_removed_over_tower() {
        let s = s_t2();
        let a = Elem::radical(&s.l, 0);
        let one = Elem::one(&s.l);
        // (x + a·y)·[x : y : z]
        let lin = Form::var(0, one.clone()).add(&Form::var(1, a.clone()));
        let g = RationalMap::new((0..3).map(|i| lin.mul(&Form::var(i, one.clone()))).collect(), 3, 2).unwrap();
        let r = reduce(&g).unwrap();
        assert_eq!(r.degree(), 1);
        assert!(equals(&r, &RationalMap::identity(&s.l, 3)));
    }

    #[test]
    fn common_factor_is_reported() {
        let t = k();
        let f = map(&t, &[&[(1, [2, 0, 0])], &[(1, [1, 1, 0])], &[(1, [1, 0, 1])]]);
        assert_eq!(base_points(&f, &[]).unwrap_err(), Error::NonFiniteBaseLocus);
    }

    #[test]
    fn equivariance() {
        let s = s_t2();
        let t = k();
        assert!(is_equivariant(&RationalMap::sigma(&t), &s, &opposite(&s)));
        assert!(!is_equivariant(&RationalMap::identity(&t, 3), &s, &opposite(&s)));
        assert!(is_equivariant(&RationalMap::identity(&t, 3), &s, &s));
    }

    #[test]
    fn sigma_base_points() {
        let t = k();
        let e = |i: usize| (0..3).map(|j| Elem::from_int(&t, (i == j) as i64)).collect::<Vec<_>>();
        let bp = base_points(&RationalMap::sigma(&t), &[e(0), e(1), e(2)]).unwrap();
        assert!(bp.iter().all(|b| b.multiplicity == 1));
        assert!(base_points(&RationalMap::sigma(&t), &[e(0), e(1)]).is_err());
    }

    #[test]
    fn three_link_at_coordinate_points() {
        let s = s_t2();
        let link = link_from_3point(&s, &coordinate_point(&s)).unwrap();
        assert!(equals(&link.forward.map, &RationalMap::sigma(&k())));
        assert_eq!(link.forward.target, opposite(&s));
        assert_eq!(link.base_point.splitting, link.inverse_base_point.splitting);
        assert_eq!(link.forward.map.degree(), 2);
    }

    #[test]
    fn three_link_at_ones_orbit() {
        let s = s_t2();
        let t = k();
        let p = make_closed_point(&s, &orbit(&s, &[Elem::one(&t), Elem::one(&t), Elem::one(&t)])).unwrap();
        let link = link_from_3point(&s, &p).unwrap();
        let bp = base_points(&link.forward.map, &p.components).unwrap();
        assert_eq!(bp.len(), 3);
        base_points(&link.backward.map, &link.inverse_base_point.components).unwrap();
    }

    #[test]
    fn three_link_with_other_splitting_field() {
        let s = s_t2();
        let p = second_3point(&s).unwrap();
        let link = link_from_3point(&s, &p).unwrap();
        assert_eq!(link.inverse_base_point.splitting, p.splitting);
    }

    #[test]
    fn six_link_over_sqrt() {
        let s = s_t2();
        let p = sixpoint_from_sqrt(&s, &RatFun::var(1)).unwrap();
        let link = link_from_6point(&s, &p).unwrap();
        assert_eq!(link.forward.map.degree(), 5);
        assert_eq!(link.condition_rank, 18);
        base_points(&link.forward.map, &p.components).unwrap();
    }
}
