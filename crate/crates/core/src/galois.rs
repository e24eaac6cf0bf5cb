//! The twisted Galois action of a surface on points and on plane maps, Galois descent
//! for equivariant maps, and canonical descriptors of fixed fields.
//!
//! For a surface with twist matrix A (A³ = ξ) over L = K[∛λ] with generator g, an
//! automorphism σ of a Kummer tower T ⊇ L acts on points by x ↦ Aᵏ·σ(x), where σ|_L = gᵏ.
//! A map f of degree d from S_ξ to S_ξ′ is equivariant iff it is fixed by
//! Ψ_σ(f) = c⁻ᵏ·A′⁻ᵏ·f^{σ⁻¹}(Aᵏ·y), with c³ = ξᵈ/ξ′; this Ψ is a genuine semilinear
//! action, so equivariant maps are found by averaging and by linear algebra over K.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cubes::{canonical_cyclic, is_cube, Answer};
use crate::error::{Error, Result};
use crate::linalg::kernel_k;
use crate::poly::{Mono, Poly};
use crate::ratfun::RatFun;
use crate::severi_brauer::Surface;
use crate::tower::{Elem, Tower};

/// A homogeneous form in x, y, z (variables 0, 1, 2) over a tower.
pub type Form = Poly<Elem>;

/// All exponent vectors of the Galois group of a Kummer tower.
pub fn group_elements(t: &Tower) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for r in &t.radicals {
        out = out
            .into_iter()
            .flat_map(|e| {
                (0..r.degree).map(move |k| {
                    let mut e = e.clone();
                    e.push(k);
                    e
                })
            })
            .collect();
    }
    out
}

/// Restricts an automorphism of `big` to a subtower `small`.
pub fn restrict(exps: &[u8], big: &Tower, small: &Tower) -> Vec<u8> {
    small
        .radicals
        .iter()
        .map(|r| exps[big.find_radical(r).expect("subtower radical")])
        .collect()
}

pub fn inverse(exps: &[u8], t: &Tower) -> Vec<u8> {
    exps.iter().zip(&t.radicals).map(|(&e, r)| (r.degree - e) % r.degree).collect()
}

/// Applies σ (given on `big`) to an element of any subtower of `big`.
pub fn act(exps: &[u8], big: &Tower, x: &Elem) -> Elem {
    if std::ptr::eq(big, &*x.tower) {
        return x.apply_exps(exps);
    }
    x.apply_exps(&restrict(exps, big, &x.tower))
}

/// The Galois group of the compositum of a surface's L with a coefficient tower.
#[derive(Clone)]
pub struct TwistGroup {
    pub tower: Arc<Tower>,
    pub elems: Vec<Vec<u8>>,
    lrad: usize,
    gexp: u8,
}

impl TwistGroup {
    pub fn new(s: &Surface, coeff: &Arc<Tower>) -> TwistGroup {
        let tower = Tower::compositum(&s.l, coeff);
        let lrad = tower.find_radical(&s.l.radicals[0]).unwrap();
        TwistGroup { elems: group_elements(&tower), tower, lrad, gexp: s.gexp() }
    }

    /// The power of g that σ restricts to on L.
    pub fn k(&self, exps: &[u8]) -> u8 {
        (exps[self.lrad] * self.gexp) % 3
    }

    /// One generator per radical.
    pub fn generators(&self) -> Vec<Vec<u8>> {
        (0..self.tower.radicals.len())
            .map(|i| {
                let mut e = vec![0u8; self.tower.radicals.len()];
                e[i] = 1;
                e
            })
            .collect()
    }

    /// x ↦ Aᵏ·σ(x) on a point (no normalization).
    pub fn act_point(&self, s: &Surface, exps: &[u8], p: &[Elem]) -> Vec<Elem> {
        let q: Vec<Elem> = p.iter().map(|x| act(exps, &self.tower, x)).collect();
        apply_a_point(&s.xi, self.k(exps), &q)
    }
}

/// Aᵏ·v for A = [[0,0,ξ],[1,0,0],[0,1,0]].
pub fn apply_a_point(xi: &RatFun, k: u8, v: &[Elem]) -> Vec<Elem> {
    let mut v = v.to_vec();
    for _ in 0..k {
        v = vec![v[2].scale(xi), v[0].clone(), v[1].clone()];
    }
    v
}

/// The form p(Aᵏ·y): x ↦ ξz, y ↦ x, z ↦ y applied k times.
pub fn subst_a(p: &Form, xi: &RatFun, k: u8) -> Form {
    let mut p = p.clone();
    for _ in 0..k {
        let terms = p
            .terms
            .iter()
            .map(|(m, c)| {
                let [a, b, cc] = [m.0[0], m.0[1], m.0[2]];
                let mut e = m.0;
                e[0] = b;
                e[1] = cc;
                e[2] = a;
                (Mono(e), c.scale(&xi.pow(a as i64)))
            })
            .collect();
        p = Poly::from_terms(terms);
    }
    p
}

/// A⁻ᵏ·(u, v, w) on a triple of forms: A⁻¹(u, v, w) = (v, w, u/ξ).
pub fn apply_a_inv(xi: &RatFun, k: u8, f: &[Form]) -> Vec<Form> {
    let inv = xi.inv().unwrap();
    let mut f = f.to_vec();
    for _ in 0..k {
        f = vec![f[1].clone(), f[2].clone(), f[0].map_coeffs(|c| c.scale(&inv))];
    }
    f
}

pub fn act_form(exps: &[u8], big: &Tower, p: &Form) -> Form {
    if exps.iter().all(|&e| e == 0) {
        return p.clone();
    }
    p.map_coeffs(|c| act(exps, big, c))
}

/// Twisted action on maps of a fixed degree between two surfaces over the same L.
#[derive(Clone)]
pub struct MapAction {
    pub group: TwistGroup,
    pub xi_src: RatFun,
    pub xi_tgt: RatFun,
    pub degree: u32,
    /// c with c³ = ξ_srcᵈ/ξ_tgt
    pub c: RatFun,
    pub coeff: Arc<Tower>,
}

impl MapAction {
    pub fn new(src: &Surface, tgt: &Surface, degree: u32, coeff: &Arc<Tower>) -> Result<MapAction> {
        if !src.same_extension(tgt) {
            return Err(Error::ExtensionMismatch);
        }
        let q = src.xi.pow(degree as i64).div(&tgt.xi).unwrap();
        let Answer::Yes(c) = is_cube(&q) else {
            return Err(Error::EquivariantBasisNotFound(format!(
                "no equivariant maps of degree {} from S_({}) to S_({})",
                degree, src.xi, tgt.xi
            )));
        };
        let coeff = Tower::compositum(coeff, &Tower::base(src.l.nvars));
        Ok(MapAction {
            group: TwistGroup::new(src, &coeff),
            xi_src: src.xi.clone(),
            xi_tgt: tgt.xi.clone(),
            degree,
            c,
            coeff,
        })
    }

    /// Ψ_σ(f) = c⁻ᵏ·A′⁻ᵏ·f^{σ⁻¹}(Aᵏ·y).
    pub fn act(&self, exps: &[u8], f: &[Form]) -> Vec<Form> {
        let k = self.group.k(exps);
        let inv = inverse(exps, &self.group.tower);
        let g: Vec<Form> = f.iter().map(|p| subst_a(&act_form(&inv, &self.group.tower, p), &self.xi_src, k)).collect();
        let g = apply_a_inv(&self.xi_tgt, k, &g);
        if k == 0 {
            return g;
        }
        let s = self.c.pow(-(k as i64));
        g.iter().map(|p| p.map_coeffs(|x| x.scale(&s))).collect()
    }

    pub fn average(&self, f: &[Form]) -> Vec<Form> {
        let mut acc = vec![Form::zero(); 3];
        for e in &self.group.elems {
            let g = self.act(e, f);
            for (a, b) in acc.iter_mut().zip(&g) {
                *a = a.add(b);
            }
        }
        acc
    }

    /// A K-basis of the invariant triples of forms of this degree with coefficients in
    /// the coefficient tower.
    pub fn invariant_basis(&self) -> Vec<Vec<Form>> {
        let monos = monomials(self.degree);
        let mut covered: BTreeSet<(usize, Mono)> = BTreeSet::new();
        let mut out = Vec::new();
        let dim = self.coeff.dim();
        for i in 0..3 {
            for m in &monos {
                if covered.contains(&(i, *m)) {
                    continue;
                }
                for j in 0..dim {
                    let mut b = Elem::zero(&self.coeff);
                    b.coords[j] = RatFun::one();
                    let mut f = vec![Form::zero(); 3];
                    f[i] = Form::monomial(*m, b);
                    let v = self.average(&f);
                    if v.iter().any(|p| !p.is_zero()) {
                        out.push(v);
                    }
                }
                // the orbit of the slot under the twist
                let mut f = vec![Form::zero(); 3];
                f[i] = Form::monomial(*m, Elem::one(&self.coeff));
                for e in &self.group.elems {
                    for (ii, p) in self.act(e, &f).iter().enumerate() {
                        for (mm, _) in &p.terms {
                            covered.insert((ii, *mm));
                        }
                    }
                }
            }
        }
        out
    }

    /// Invariant triples satisfying the given tower-linear conditions, as a K-basis.
    ///
    /// `conditions` maps a triple to a list of values that must vanish; it must be
    /// linear in the triple.
    pub fn solve(&self, conditions: impl Fn(&[Form]) -> Vec<Elem> + Sync) -> Vec<Vec<Form>> {
        let basis = self.invariant_basis();
        let cols: Vec<Vec<RatFun>> = crate::par::map(&basis, |b| {
            conditions(b).iter().flat_map(|e| e.coords.clone()).collect()
        });
        let nrows = cols.iter().map(|c| c.len()).max().unwrap_or(0);
        let rows: Vec<Vec<RatFun>> = (0..nrows)
            .map(|r| cols.iter().map(|c| c.get(r).cloned().unwrap_or_else(RatFun::zero)).collect())
            .collect();
        let ker = kernel_k(&rows, basis.len());
        ker.iter().map(|v| combine(&basis, v)).collect()
    }
}

/// Σ vᵢ·basisᵢ.
pub fn combine(basis: &[Vec<Form>], v: &[RatFun]) -> Vec<Form> {
    let mut acc = vec![Form::zero(); 3];
    for (b, c) in basis.iter().zip(v) {
        if c.is_zero() {
            continue;
        }
        for (a, p) in acc.iter_mut().zip(b) {
            *a = a.add(&p.map_coeffs(|x| x.scale(c)));
        }
    }
    acc
}

/// Monomials of degree d in x, y, z, in decreasing grlex order.
pub fn monomials(d: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            out.push(Mono::from_exps(&[a as u16, b as u16, (d - a - b) as u16]));
        }
    }
    out
}

/// Canonical description of a subfield of a Kummer tower: the cyclic cubic and quadratic
/// subextensions it contains, each named by a canonical radicand modulo n-th powers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Descriptor {
    pub cubic: Vec<String>,
    pub quadratic: Vec<String>,
    /// A minimal generating set, for display.
    pub basis: Vec<(u8, String)>,
}

impl Descriptor {
    pub fn base() -> Descriptor {
        Descriptor { cubic: Vec::new(), quadratic: Vec::new(), basis: Vec::new() }
    }

    /// Degree over K.
    pub fn degree(&self) -> usize {
        // a group with k cyclic subgroups of order 3 has order 2k+1
        (2 * self.cubic.len() + 1) * (self.quadratic.len() + 1)
    }

    /// The descriptor of a whole tower.
    pub fn of_tower(t: &Tower) -> Descriptor {
        fixed_field(t, &[])
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K")?;
        for (d, r) in &self.basis {
            let op = if *d == 3 { "cbrt" } else { "sqrt" };
            write!(f, "[{}({})]", op, r)?;
        }
        Ok(())
    }
}

/// The descriptor of the subfield of `t` fixed by the subgroup generated by `gens`.
///
/// Characters of the group are exponent vectors m, with χ_m(σ) = ∏ ωᵢ^{mᵢσᵢ}; the
/// fixed field is spanned by the monomials whose characters kill every generator.
pub fn fixed_field(t: &Tower, gens: &[Vec<u8>]) -> Descriptor {
    let trivial = |m: &[u8]| {
        gens.iter().all(|h| {
            // Σ mᵢhᵢ/dᵢ must be an integer; use the common denominator 6
            let s: u32 = m
                .iter()
                .zip(h)
                .zip(&t.radicals)
                .map(|((&a, &b), r)| (a as u32 * b as u32) * (6 / r.degree as u32))
                .sum();
            s % 6 == 0
        })
    };
    let chars: Vec<Vec<u8>> = group_elements(t).into_iter().filter(|m| trivial(m)).collect();
    let class = |m: &[u8], n: u8| {
        let mut c = RatFun::one();
        for (r, &e) in t.radicals.iter().zip(m) {
            if e != 0 {
                c = c.mul(&r.radicand.pow(e as i64));
            }
        }
        let p = canonical_cyclic(&c, n as u32);
        (!p.is_constant()).then(|| RatFun::from_poly(p).to_string())
    };
    let mut cubic = BTreeSet::new();
    let mut quadratic = BTreeSet::new();
    let mut basis: Vec<(u8, String)> = Vec::new();
    let mut span: Vec<Vec<u8>> = vec![vec![0; t.radicals.len()]];
    // characters sorted so that the display basis is deterministic
    let mut ordered: Vec<(u8, String, Vec<u8>)> = Vec::new();
    for m in &chars {
        let only = |deg: u8| m.iter().zip(&t.radicals).all(|(&e, r)| e == 0 || r.degree == deg);
        if m.iter().all(|&e| e == 0) {
            continue;
        }
        for n in [3u8, 2] {
            if only(n) {
                if let Some(s) = class(m, n) {
                    if n == 3 {
                        cubic.insert(s.clone());
                    } else {
                        quadratic.insert(s.clone());
                    }
                    ordered.push((n, s, m.clone()));
                }
            }
        }
    }
    ordered.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.len().cmp(&b.1.len())).then_with(|| a.1.cmp(&b.1)));
    for (n, s, m) in ordered {
        if span.contains(&m) {
            continue;
        }
        basis.push((n, s));
        let mut next = span.clone();
        for k in 1..n {
            for v in &span {
                let w: Vec<u8> =
                    v.iter().zip(&m).zip(&t.radicals).map(|((&a, &b), r)| (a + k * b) % r.degree).collect();
                if !next.contains(&w) {
                    next.push(w);
                }
            }
        }
        span = next;
    }
    Descriptor { cubic: cubic.into_iter().collect(), quadratic: quadratic.into_iter().collect(), basis }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::severi_brauer::{cyclic_extension, make_surface, opposite};

    fn surface() -> Surface {
        let (l, g) = cyclic_extension(2, &RatFun::var(0), "a");
        make_surface(&l, &g, &RatFun::var(1)).unwrap()
    }

    fn mono(t: &Arc<Tower>, e: [u16; 3]) -> Form {
        Form::monomial(Mono::from_exps(&e), Elem::one(t))
    }

    #[test]
    fn standard_quadratic_map_is_invariant() {
        let s = surface();
        let k = Tower::base(2);
        let act = MapAction::new(&s, &opposite(&s), 2, &k).unwrap();
        assert_eq!(act.c, RatFun::var(1));
        let sigma = vec![mono(&k, [0, 1, 1]), mono(&k, [1, 0, 1]), mono(&k, [1, 1, 0])];
        for e in &act.group.elems {
            assert_eq!(act.act(e, &sigma), sigma);
        }
        // a non-equivariant triple is moved
        let bad = vec![mono(&k, [2, 0, 0]), mono(&k, [1, 0, 1]), mono(&k, [1, 1, 0])];
        assert!(act.group.elems.iter().any(|e| act.act(e, &bad) != bad));
    }

    #[test]
    fn action_composes() {
        let s = surface();
        let (l, _) = cyclic_extension(2, &RatFun::var(1), "b");
        let act = MapAction::new(&s, &s, 1, &l).unwrap();
        let b = Elem::named(&act.coeff, "b").unwrap();
        let f = vec![Form::monomial(Mono::var(0), b.clone()), mono(&act.coeff, [0, 1, 0]), Form::zero()];
        for e1 in &act.group.elems {
            for e2 in &act.group.elems {
                let e12: Vec<u8> =
                    e1.iter().zip(e2).zip(&act.group.tower.radicals).map(|((a, b), r)| (a + b) % r.degree).collect();
                assert_eq!(act.act(e1, &act.act(e2, &f)), act.act(&e12, &f));
            }
        }
    }

    #[test]
    fn invariant_basis_has_full_dimension() {
        let s = surface();
        let k = Tower::base(2);
        let act = MapAction::new(&s, &opposite(&s), 2, &k).unwrap();
        // over K each orbit of slots contributes one invariant
        assert_eq!(act.invariant_basis().len(), monomials(2).len());
        // over L the invariants descend the whole space
        let act = MapAction::new(&s, &opposite(&s), 2, &s.l).unwrap();
        let basis = act.invariant_basis();
        assert_eq!(basis.len(), 3 * monomials(2).len());
        for b in &basis {
            for e in act.group.generators() {
                assert_eq!(&act.act(&e, b), b);
            }
        }
    }

    #[test]
    fn no_maps_when_ratio_is_not_a_cube() {
        let s = surface();
        let k = Tower::base(2);
        assert!(matches!(MapAction::new(&s, &s, 2, &k), Err(Error::EquivariantBasisNotFound(_))));
    }

    #[test]
    fn solve_finds_maps_through_coordinate_points() {
        let s = surface();
        let k = Tower::base(2);
        let act = MapAction::new(&s, &opposite(&s), 2, &k).unwrap();
        let e1 = vec![Elem::one(&k), Elem::zero(&k), Elem::zero(&k)];
        let sols = act.solve(|f| f.iter().map(|p| p.eval(&e1)).collect());
        // triples of conics through the three coordinate points, fixed by the twist
        assert_eq!(sols.len(), 3);
    }

    #[test]
    fn descriptors() {
        let (l, _) = cyclic_extension(2, &RatFun::var(0), "a");
        assert_eq!(Descriptor::of_tower(&l).to_string(), "K[cbrt(t1)]");
        assert_eq!(fixed_field(&l, &[vec![1]]), Descriptor::base());
        let t = l.extend("b", 3, RatFun::var(1)).unwrap().extend("s", 2, RatFun::var(0)).unwrap();
        let d = Descriptor::of_tower(&t);
        assert_eq!(d.degree(), 18);
        assert_eq!(d.cubic.len(), 4);
        let sub = fixed_field(&t, &[vec![1, 1, 0]]);
        assert_eq!(sub.degree(), 6);
        assert_eq!(sub.cubic, vec![RatFun::var(0).mul(&RatFun::var(1).pow(2)).to_string()]);
    }
}
