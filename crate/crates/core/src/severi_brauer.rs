//! Severi–Brauer surfaces S_ξ as twists of the plane, their closed points of degree 3
//! and 6, and automorphisms moving one degree-3 point to another.
//!
//! S_ξ is presented over L = K[∛λ] with generator g: ∛λ ↦ ζ^e·∛λ. Its points over a
//! tower T ⊇ L are plane points, with σ ∈ Gal(T/K) acting by x ↦ Aᵏ·σ(x) where
//! σ|_L = gᵏ and A = [[0,0,ξ],[1,0,0],[0,1,0]].

use std::sync::Arc;

use crate::cubes::{is_cube, is_norm, is_square, Answer};
use crate::error::{Error, Result};
use crate::galois::{fixed_field, Descriptor, MapAction, TwistGroup};
use crate::linalg::{adj3, det3, mat_mul, mat_vec, proportional, Mat};
use crate::poly::{Mono, Poly};
use crate::ratfun::RatFun;
use crate::tower::{Elem, GaloisAction, Tower};

#[derive(Clone, Debug, PartialEq)]
pub struct Surface {
    /// The cubic extension L = K[∛λ] (a single radical of degree 3).
    pub l: Arc<Tower>,
    pub g: GaloisAction,
    pub xi: RatFun,
}

/// Builds S_ξ over L with generator `g` and checks the cocycle condition.
pub fn make_surface(l: &Arc<Tower>, g: &GaloisAction, xi: &RatFun) -> Result<Surface> {
    if xi.is_zero() {
        return Err(Error::ZeroXi);
    }
    if l.radicals.len() != 1 || l.radicals[0].degree != 3 {
        return Err(Error::BadExtension(format!("{:?}", l)));
    }
    let e = g.resolve(l)?;
    if e[0] == 0 {
        return Err(Error::BadExtension("the generator acts trivially".into()));
    }
    let s = Surface { l: l.clone(), g: g.clone(), xi: xi.clone() };
    if !s.cocycle_is_scalar() {
        return Err(Error::IdentityFails { check: "cocycle".into(), residue: "non-scalar product".into() });
    }
    Ok(s)
}

/// The extension K[∛λ] with generator ∛λ ↦ ζ·∛λ.
pub fn cyclic_extension(nvars: usize, lambda: &RatFun, name: &str) -> (Arc<Tower>, GaloisAction) {
    let l = Tower::base(nvars).extend(name, 3, lambda.clone()).expect("nonzero radicand");
    let g = l.generator(0);
    (l, g)
}

impl Surface {
    pub fn nvars(&self) -> usize {
        self.l.nvars
    }

    pub fn lambda(&self) -> &RatFun {
        &self.l.radicals[0].radicand
    }

    /// The exponent e with g(∛λ) = ζ^e·∛λ.
    pub fn gexp(&self) -> u8 {
        self.g.resolve(&self.l).unwrap()[0]
    }

    pub fn same_extension(&self, o: &Surface) -> bool {
        *self.l == *o.l && self.gexp() == o.gexp()
    }

    /// The twist matrix A over the given tower.
    pub fn a_matrix(&self, t: &Arc<Tower>) -> Mat<Elem> {
        twist_matrix(t, &self.xi)
    }

    /// ν·g(ν)·g²(ν), which must be scalar.
    pub fn cocycle_product(&self) -> Mat<Elem> {
        let nu = self.a_matrix(&self.l);
        let e = self.g.resolve(&self.l).unwrap();
        let e2: Vec<u8> = e.iter().map(|k| (2 * k) % 3).collect();
        let app = |m: &Mat<Elem>, e: &[u8]| -> Mat<Elem> {
            m.iter().map(|r| r.iter().map(|x| x.apply_exps(e)).collect()).collect()
        };
        mat_mul(&mat_mul(&nu, &app(&nu, &e)), &app(&nu, &e2))
    }

    pub fn cocycle_is_scalar(&self) -> bool {
        let p = self.cocycle_product();
        (0..3).all(|i| (0..3).all(|j| if i == j { p[i][i] == p[0][0] } else { p[i][j].is_zero() }))
            && !p[0][0].is_zero()
    }

    /// An isomorphic copy with a different ξ on the same extension.
    pub fn with_xi(&self, xi: &RatFun) -> Surface {
        Surface { l: self.l.clone(), g: self.g.clone(), xi: xi.clone() }
    }
}

pub fn twist_matrix(t: &Arc<Tower>, xi: &RatFun) -> Mat<Elem> {
    let z = Elem::zero(t);
    let o = Elem::one(t);
    vec![
        vec![z.clone(), z.clone(), Elem::from_k(t, xi.clone())],
        vec![o.clone(), z.clone(), z.clone()],
        vec![z.clone(), o, z],
    ]
}

/// Decides whether S has a K-point; on yes returns the point [a : 1 : 1/g(a)] with
/// N(a) = ξ, fixed by the twisted action.
pub fn has_rational_point(s: &Surface) -> Answer<Vec<Elem>> {
    match is_norm(&s.l, &s.xi) {
        Answer::Yes(a) => {
            let e = s.g.resolve(&s.l).unwrap();
            let ga = a.apply_exps(&e);
            let p = normalize_point(&[a.clone(), Elem::one(&s.l), ga.inv().unwrap()]);
            Answer::Yes(p)
        }
        Answer::No(c) => Answer::No(c),
        Answer::Unknown => Answer::Unknown,
    }
}

/// S ≅ S′ iff ξ/ξ′ is a norm.
pub fn is_isomorphic(s: &Surface, o: &Surface) -> Result<Answer<Elem>> {
    if !s.same_extension(o) {
        return Err(Error::ExtensionMismatch);
    }
    Ok(is_norm(&s.l, &s.xi.div(&o.xi).unwrap()))
}

/// S_ξ^op = S_{1/ξ}.
pub fn opposite(s: &Surface) -> Surface {
    s.with_xi(&s.xi.inv().unwrap())
}

/// Scales a nonzero vector so that its last nonzero coordinate is 1.
pub fn normalize_point(p: &[Elem]) -> Vec<Elem> {
    let last = p.iter().rev().find(|x| !x.is_zero()).expect("nonzero point");
    if last.is_one() {
        return p.to_vec();
    }
    let inv = last.inv().unwrap();
    p.iter().map(|x| if x.is_zero() { x.clone() } else { x.mul(&inv) }).collect()
}

/// A Galois orbit of plane points on a surface.
#[derive(Clone, Debug)]
pub struct ClosedPoint {
    pub surface: Surface,
    /// Normalized components, all over `tower`, in orbit order from the first.
    pub components: Vec<Vec<Elem>>,
    /// The tower holding the coordinates.
    pub tower: Arc<Tower>,
    /// The splitting field, as a subfield of the compositum of L and `tower`.
    pub splitting: Descriptor,
    /// Compositum of L and `tower`, on which the Galois group acts.
    pub group_tower: Arc<Tower>,
}

impl ClosedPoint {
    pub fn degree(&self) -> usize {
        self.components.len()
    }

    pub fn group(&self) -> TwistGroup {
        TwistGroup::new(&self.surface, &self.tower)
    }

    pub fn contains(&self, p: &[Elem]) -> bool {
        self.components.iter().any(|c| proportional(c, p))
    }
}

/// Validates that `components` form one orbit of the twisted Galois action and returns
/// the closed point, with its splitting field.
pub fn make_closed_point(s: &Surface, components: &[Vec<Elem>]) -> Result<ClosedPoint> {
    let n = components.len();
    if n == 0 || n % 3 != 0 {
        return Err(Error::BadDegree(n));
    }
    // a common tower for all coordinates
    let mut tower = Tower::base(s.nvars());
    for c in components {
        if c.len() != 3 || c.iter().all(|x| x.is_zero()) {
            return Err(Error::NotAnOrbit("components must be nonzero triples".into()));
        }
        for x in c {
            tower = Tower::compositum(&tower, &x.tower);
        }
    }
    let comps: Vec<Vec<Elem>> =
        components.iter().map(|c| normalize_point(&c.iter().map(|x| x.embed(&tower).unwrap()).collect::<Vec<_>>())).collect();
    for i in 0..n {
        for j in 0..i {
            if proportional(&comps[i], &comps[j]) {
                return Err(Error::NotAnOrbit("repeated component".into()));
            }
        }
    }
    let group = TwistGroup::new(s, &tower);
    let find = |p: &[Elem]| comps.iter().position(|c| proportional(c, p));
    // each generator must permute the components
    let gens = group.generators();
    let mut perms = Vec::new();
    for g in &gens {
        let mut perm = Vec::with_capacity(n);
        for c in &comps {
            match find(&group.act_point(s, g, c)) {
                Some(j) => perm.push(j),
                None => return Err(Error::NotAnOrbit("the set is not stable under the twisted action".into())),
            }
        }
        perms.push(perm);
    }
    // transitivity, recording an orbit order from the first component
    let mut order = vec![0usize];
    let mut i = 0;
    while i < order.len() {
        let c = order[i];
        for p in &perms {
            if !order.contains(&p[c]) {
                order.push(p[c]);
            }
        }
        i += 1;
    }
    if order.len() != n {
        return Err(Error::NotAnOrbit(format!("orbit of the first component has {} of {} points", order.len(), n)));
    }
    // for degree 3, follow the cycle of an element acting by g on L
    if n == 3 {
        if let Some(e) = group.elems.iter().find(|e| group.k(e) == 1 && find(&group.act_point(s, e, &comps[0])) != Some(0)) {
            let second = find(&group.act_point(s, e, &comps[0])).unwrap();
            order = vec![0, second, 3 - second];
        }
    }
    let comps: Vec<Vec<Elem>> = order.iter().map(|&i| comps[i].clone()).collect();
    let stabilizer: Vec<Vec<u8>> = group
        .elems
        .iter()
        .filter(|e| comps.iter().all(|c| proportional(&group.act_point(s, e, c), c)))
        .cloned()
        .collect();
    let splitting = fixed_field(&group.tower, &stabilizer);
    Ok(ClosedPoint { surface: s.clone(), components: comps, tower, splitting, group_tower: group.tower.clone() })
}

/// The coordinate points [1:0:0], [0:1:0], [0:0:1], a degree-3 point with splitting field L.
pub fn coordinate_point(s: &Surface) -> ClosedPoint {
    let t = Tower::base(s.nvars());
    let e = |i: usize| (0..3).map(|j| if i == j { Elem::one(&t) } else { Elem::zero(&t) }).collect::<Vec<_>>();
    make_closed_point(s, &[e(0), e(1), e(2)]).expect("coordinate points form an orbit")
}

/// The orbit of a point under the twisted action.
pub fn orbit(s: &Surface, p: &[Elem]) -> Vec<Vec<Elem>> {
    let mut t = Tower::base(s.nvars());
    for x in p {
        t = Tower::compositum(&t, &x.tower);
    }
    let p: Vec<Elem> = p.iter().map(|x| x.embed(&t).unwrap()).collect();
    let group = TwistGroup::new(s, &t);
    let mut out = vec![normalize_point(&p)];
    let mut i = 0;
    while i < out.len() {
        for g in group.generators() {
            let q = normalize_point(&group.act_point(s, &g, &out[i]));
            if !out.iter().any(|c| proportional(c, &q)) {
                out.push(q);
            }
        }
        i += 1;
    }
    out
}

/// A twisted automorphism: an invertible matrix commuting with the twist.
#[derive(Clone, Debug)]
pub struct TwistedAutomorphism {
    pub matrix: Mat<Elem>,
    pub surface: Surface,
}

impl TwistedAutomorphism {
    pub fn apply(&self, p: &[Elem]) -> Vec<Elem> {
        normalize_point(&mat_vec(&self.matrix, p))
    }

    /// True when the matrix commutes projectively with every twisted generator.
    pub fn commutes(&self) -> bool {
        let mut t = Tower::base(self.surface.nvars());
        for r in &self.matrix {
            for x in r {
                t = Tower::compositum(&t, &x.tower);
            }
        }
        matrix_commutes(&self.surface, &self.surface, &self.matrix, &t)
    }
}

/// M·Aᵏ ∝ A′ᵏ·σ(M) for every generator σ.
pub fn matrix_commutes(src: &Surface, tgt: &Surface, m: &Mat<Elem>, coeff: &Arc<Tower>) -> bool {
    let group = TwistGroup::new(src, coeff);
    let t = &group.tower;
    let a = src.a_matrix(t);
    let a2 = tgt.a_matrix(t);
    group.generators().iter().all(|e| {
        let k = group.k(e);
        let sm: Mat<Elem> = m.iter().map(|r| r.iter().map(|x| crate::galois::act(e, t, x)).collect()).collect();
        let mut lhs = m.clone();
        let mut rhs = sm;
        for _ in 0..k {
            lhs = mat_mul(&lhs, &a);
            rhs = mat_mul(&a2, &rhs);
        }
        proportional_matrices(&lhs, &rhs)
    })
}

pub fn proportional_matrices(a: &Mat<Elem>, b: &Mat<Elem>) -> bool {
    let fa: Vec<Elem> = a.iter().flatten().cloned().collect();
    let fb: Vec<Elem> = b.iter().flatten().cloned().collect();
    let Some(i) = fa.iter().position(|x| !x.is_zero()) else {
        return fb.iter().all(|x| x.is_zero());
    };
    if fb[i].is_zero() {
        return false;
    }
    (0..9).all(|j| fa[j].mul(&fb[i]) == fb[j].mul(&fa[i]))
}

/// The columns v, A·σ₀(v), A·σ₀(A·σ₀(v)) for the first component v, where σ₀ acts by g
/// on L; these satisfy M·A = A·σ₀(M) exactly.
fn orbit_matrix(p: &ClosedPoint) -> Result<Mat<Elem>> {
    let s = &p.surface;
    let group = p.group();
    let t = &group.tower;
    let v: Vec<Elem> = p.components[0].iter().map(|x| x.embed(t).unwrap()).collect();
    // σ₀ of order 3 with σ₀|_L = g that moves the first component
    let sigma = group
        .elems
        .iter()
        .filter(|e| group.k(e) == 1)
        .filter(|e| e.iter().zip(&t.radicals).all(|(&k, r)| r.degree == 3 || k == 0))
        .find(|e| !proportional(&group.act_point(s, e, &v), &v))
        .ok_or_else(|| Error::DegenerateConfiguration("no element of the group moves the first component".into()))?
        .clone();
    let v2 = group.act_point(s, &sigma, &v);
    let v3 = group.act_point(s, &sigma, &v2);
    let m: Mat<Elem> = (0..3).map(|i| vec![v[i].clone(), v2[i].clone(), v3[i].clone()]).collect();
    if det3(&m).is_zero() {
        return Err(Error::Collinear);
    }
    Ok(m)
}

/// A change of coordinates φ sending p to the coordinate points, and ξ′ with
/// φ∘(A∘g)∘φ⁻¹ = A_{ξ′}∘g.
pub fn normalize_3point(p: &ClosedPoint) -> Result<(Mat<Elem>, RatFun)> {
    if p.degree() != 3 {
        return Err(Error::BadDegree(p.degree()));
    }
    let s = &p.surface;
    if p.splitting != Descriptor::of_tower(&s.l) {
        return Err(Error::SplittingFieldMismatch);
    }
    let m = orbit_matrix(p)?;
    let phi = adj3(&m);
    // B = M⁻¹·A·σ₀(M) has the shape of a twist matrix; read ξ′ off its corner
    let t = m[0][0].tower.clone();
    let d = det3(&m);
    let am = mat_mul(&s.a_matrix(&t), &m);
    // A·σ₀(M) = M·A, so B = M⁻¹·M·A; verify rather than assume
    let b = mat_mul(&phi, &am);
    let shift = mat_mul(&phi, &mat_mul(&m, &s.a_matrix(&t)));
    if !proportional_matrices(&b, &shift) {
        return Err(Error::IdentityFails { check: "normalize_3point twist shape".into(), residue: "B differs from A".into() });
    }
    let xi2 = b[0][2].div(&d)?;
    let xi2 = xi2.in_base().cloned().ok_or(Error::NotInExtension)?;
    let phi_m = TwistedAutomorphism { matrix: m.clone(), surface: s.clone() };
    if !phi_m.commutes() {
        return Err(Error::IdentityFails { check: "normalize_3point commutation".into(), residue: "M·A ≠ A·g(M)".into() });
    }
    Ok((phi, xi2))
}

/// An automorphism α of S with α(p) = q, for degree-3 points with equal splitting fields.
pub fn auto_between_3points(p: &ClosedPoint, q: &ClosedPoint) -> Result<TwistedAutomorphism> {
    if p.degree() != 3 || q.degree() != 3 {
        return Err(Error::BadDegree(if p.degree() != 3 { p.degree() } else { q.degree() }));
    }
    if p.splitting != q.splitting {
        return Err(Error::SplittingFieldMismatch);
    }
    let s = &p.surface;
    let mp = orbit_matrix(p)?;
    let mq = orbit_matrix(q)?;
    let mut x = mat_mul(&mq, &adj3(&mp));
    let t = Tower::compositum(&mp[0][0].tower, &mq[0][0].tower);
    if !matrix_commutes(s, s, &x, &t) {
        // the orbit orders disagree on part of the group: average into an invariant
        x = make_invariant_matrix(s, &x, &t)?;
    }
    let x = scale_matrix(&x);
    let alpha = TwistedAutomorphism { matrix: x, surface: s.clone() };
    if det3(&alpha.matrix).is_zero() {
        return Err(Error::DegenerateConfiguration("singular transport matrix".into()));
    }
    for c in &p.components {
        if !q.contains(&alpha.apply(c)) {
            return Err(Error::DegenerateConfiguration("transport does not map p onto q".into()));
        }
    }
    if !alpha.commutes() {
        return Err(Error::IdentityFails { check: "auto_between_3points commutation".into(), residue: "X·A ≠ A·g(X)".into() });
    }
    Ok(alpha)
}

fn matrix_to_forms(m: &Mat<Elem>) -> Vec<Poly<Elem>> {
    m.iter()
        .map(|r| Poly::from_terms((0..3).filter(|&j| !r[j].is_zero()).map(|j| (Mono::var(j), r[j].clone())).collect()))
        .collect()
}

fn forms_to_matrix(f: &[Poly<Elem>], t: &Arc<Tower>) -> Mat<Elem> {
    f.iter()
        .map(|p| (0..3).map(|j| p.coeff(&Mono::var(j)).cloned().unwrap_or_else(|| Elem::zero(t))).collect())
        .collect()
}

/// Scales a projectively equivariant linear map to an exactly invariant one (Hilbert 90).
fn make_invariant_matrix(s: &Surface, x: &Mat<Elem>, t: &Arc<Tower>) -> Result<Mat<Elem>> {
    let act = MapAction::new(s, s, 1, t)?;
    let f = matrix_to_forms(x);
    for j in 0..act.coeff.dim() {
        let mut b = Elem::zero(&act.coeff);
        b.coords[j] = RatFun::one();
        let g: Vec<Poly<Elem>> = f.iter().map(|p| p.map_coeffs(|c| c.mul(&b))).collect();
        let avg = act.average(&g);
        if avg.iter().any(|p| !p.is_zero()) {
            return Ok(forms_to_matrix(&avg, &act.coeff));
        }
    }
    Err(Error::DegenerateConfiguration("averaging the transport vanished".into()))
}

/// Divides a matrix by its first nonzero entry when that entry lies in K, keeping
/// representatives small.
fn scale_matrix(m: &Mat<Elem>) -> Mat<Elem> {
    let flat: Vec<&Elem> = m.iter().flatten().collect();
    let entries: Vec<RatFun> = flat.iter().filter_map(|x| x.in_base().cloned()).collect();
    if entries.len() != 9 {
        return m.clone();
    }
    let v = crate::linalg::primitive(&entries);
    let t = flat[0].tower.clone();
    (0..3).map(|i| (0..3).map(|j| Elem::from_k(&t, v[3 * i + j].clone())).collect()).collect()
}

/// The degree-3 point {[ξᵢ : 1 : ξᵢ⁻¹]} with ξᵢ = ζⁱ·∛ξ, whose splitting field is K[∛ξ].
pub fn second_3point(s: &Surface) -> Result<ClosedPoint> {
    if is_cube(&s.xi).is_yes() {
        return Err(Error::XiIsCube);
    }
    let (rad, factor) = polynomial_radicand(&s.xi, 3);
    let name = fresh_name(&s.l, "c");
    let t = Tower::base(s.nvars()).extend(&name, 3, rad)?;
    let c = Elem::radical(&t, 0).scale(&factor);
    let comps: Vec<Vec<Elem>> = (0..3)
        .map(|i| {
            let xi_i = c.mul(&Elem::zeta(&t).pow(i as i64).unwrap());
            vec![xi_i.clone(), Elem::one(&t), xi_i.inv().unwrap()]
        })
        .collect();
    let p = make_closed_point(s, &comps)?;
    // the twist fixes each component: A·pᵢ = pᵢ
    let a = s.a_matrix(&p.tower);
    for c in &p.components {
        if !proportional(&mat_vec(&a, c), c) {
            return Err(Error::IdentityFails { check: "A fixes each component".into(), residue: format!("{:?}", c) });
        }
    }
    if p.splitting == Descriptor::of_tower(&s.l) {
        return Err(Error::IdentityFails { check: "distinct splitting fields".into(), residue: p.splitting.to_string() });
    }
    Ok(p)
}

/// The degree-6 orbit of [0 : 1 : √α], with splitting field L[√α].
pub fn sixpoint_from_sqrt(s: &Surface, alpha: &RatFun) -> Result<ClosedPoint> {
    // a square root in L would generate a quadratic subfield of a cubic extension
    if alpha.is_zero() || is_square(alpha).is_yes() {
        return Err(Error::AlphaIsSquare);
    }
    let (rad, factor) = polynomial_radicand(alpha, 2);
    let name = fresh_name(&s.l, "s");
    let t = Tower::base(s.nvars()).extend(&name, 2, rad)?;
    let r = Elem::radical(&t, 0).scale(&factor);
    let comps = orbit(s, &[Elem::zero(&t), Elem::one(&t), r]);
    let p = make_closed_point(s, &comps)?;
    if p.degree() != 6 {
        return Err(Error::BadDegree(p.degree()));
    }
    Ok(p)
}

fn fresh_name(l: &Tower, base: &str) -> String {
    let mut n = base.to_string();
    while l.radical_index(&n).is_some() {
        n.push('\'');
    }
    n
}

/// Rewrites ⁿ√c as f·ⁿ√r with r a polynomial free of n-th power factors.
pub fn polynomial_radicand(c: &RatFun, n: u32) -> (RatFun, RatFun) {
    // c = P/Q = P·Q^{n-1} / Qⁿ
    let p = c.num.mul(&c.den.pow(n - 1, &crate::scalar::Scalar::one()));
    let mut factor = RatFun::from_poly(c.den.clone()).inv().unwrap();
    let (lc, fs) = crate::gcd::squarefree(&p);
    let mut rad = Poly::constant(lc);
    for (f, k) in fs {
        rad = rad.mul(&f.pow(k % n, &crate::scalar::Scalar::one()));
        if k / n > 0 {
            factor = factor.mul(&RatFun::from_poly(f.pow(k / n, &crate::scalar::Scalar::one())));
        }
    }
    // pull out a constant n-th power
    let lc = rad.lc().unwrap().clone();
    let root = if n == 3 { lc.cube_root() } else { lc.sqrt() };
    if let Some(r) = root {
        if !r.is_one() {
            rad = rad.scale(&lc.inv().unwrap());
            factor = factor.scale(&r);
        }
    }
    (RatFun::from_poly(rad), factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn t(i: usize) -> RatFun {
        RatFun::var(i)
    }

    pub(crate) fn s_t2() -> Surface {
        let (l, g) = cyclic_extension(2, &t(0), "a");
        make_surface(&l, &g, &t(1)).unwrap()
    }

    #[test]
    fn cocycle_of_t2() {
        let s = s_t2();
        let p = s.cocycle_product();
        assert_eq!(p[0][0], Elem::var(&s.l, 1));
        assert!(s.cocycle_is_scalar());
        assert_eq!(s.a_matrix(&s.l)[0][2], Elem::var(&s.l, 1));
    }

    #[test]
    fn trivial_twist_is_a_permutation() {
        let (l, g) = cyclic_extension(2, &t(0), "a");
        let s = make_surface(&l, &g, &RatFun::one()).unwrap();
        let a = s.a_matrix(&l);
        assert!(a[0][2].is_one() && a[1][0].is_one() && a[2][1].is_one());
    }

    #[test]
    fn zero_xi_rejected() {
        let (l, g) = cyclic_extension(2, &t(0), "a");
        assert_eq!(make_surface(&l, &g, &RatFun::zero()), Err(Error::ZeroXi));
    }

    #[test]
    fn rational_points() {
        let s = s_t2();
        assert!(has_rational_point(&s).is_no());
        let one = s.with_xi(&RatFun::one());
        let Answer::Yes(p) = has_rational_point(&one) else { panic!() };
        assert!(p.iter().all(|x| x.is_one()));
        let lam = s.with_xi(&t(0));
        let Answer::Yes(p) = has_rational_point(&lam) else { panic!() };
        // the point is fixed by the twisted action
        let group = TwistGroup::new(&lam, &lam.l);
        for g in group.generators() {
            assert!(proportional(&group.act_point(&lam, &g, &p), &p));
        }
    }

    #[test]
    fn isomorphism_classes() {
        let s = s_t2();
        assert!(is_isomorphic(&s, &s).unwrap().is_yes());
        assert!(is_isomorphic(&s, &opposite(&s)).unwrap().is_no());
        let twisted = s.with_xi(&t(1).mul(&t(0)).mul(&RatFun::from_int(8)));
        assert!(is_isomorphic(&s, &twisted).unwrap().is_yes());
        assert_eq!(opposite(&opposite(&s)), s);
    }

    #[test]
    fn coordinate_points_split_over_l() {
        let s = s_t2();
        let p = coordinate_point(&s);
        assert_eq!(p.degree(), 3);
        assert_eq!(p.splitting, Descriptor::of_tower(&s.l));
        assert_eq!(p.splitting.to_string(), "K[cbrt(t1)]");
    }

    #[test]
    fn bad_point_sets() {
        let s = s_t2();
        let k = Tower::base(2);
        let pt = |a: i64, b: i64, c: i64| vec![Elem::from_int(&k, a), Elem::from_int(&k, b), Elem::from_int(&k, c)];
        assert_eq!(make_closed_point(&s, &[pt(1, 0, 0), pt(0, 1, 0)]).unwrap_err(), Error::BadDegree(2));
        assert!(matches!(make_closed_point(&s, &[pt(1, 0, 0), pt(0, 1, 0), pt(1, 1, 1)]), Err(Error::NotAnOrbit(_))));
    }

    #[test]
    fn normalize_coordinate_points() {
        let s = s_t2();
        let (phi, xi) = normalize_3point(&coordinate_point(&s)).unwrap();
        assert_eq!(xi, t(1));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(phi[i][j].is_zero(), i != j);
            }
        }
    }

    fn ones_orbit(s: &Surface) -> ClosedPoint {
        let k = Tower::base(2);
        make_closed_point(s, &orbit(s, &[Elem::one(&k), Elem::one(&k), Elem::one(&k)])).unwrap()
    }

    #[test]
    fn normalize_ones_orbit() {
        let s = s_t2();
        let p = ones_orbit(&s);
        let (_, xi) = normalize_3point(&p).unwrap();
        let e = s.g.resolve(&s.l).unwrap();
        assert_eq!(Elem::from_k(&s.l, xi.clone()).apply_exps(&e), Elem::from_k(&s.l, xi));
    }

    #[test]
    fn transport_to_ones_orbit() {
        let s = s_t2();
        let p = coordinate_point(&s);
        let q = ones_orbit(&s);
        let a = auto_between_3points(&p, &q).unwrap();
        let k = Tower::base(2);
        let t2 = Elem::var(&k, 1);
        let one = Elem::one(&k);
        let want = vec![
            vec![one.clone(), t2.clone(), t2.clone()],
            vec![one.clone(), one.clone(), t2.clone()],
            vec![one.clone(), one.clone(), one.clone()],
        ];
        assert!(proportional_matrices(&a.matrix, &want), "{:?}", a.matrix);
        // identity when p = q
        let id = auto_between_3points(&p, &p).unwrap();
        assert!(proportional_matrices(&id.matrix, &crate::linalg::identity(3, &one)));
    }

    #[test]
    fn second_point_has_other_splitting_field() {
        let s = s_t2();
        let q = second_3point(&s).unwrap();
        assert_eq!(q.splitting.to_string(), "K[cbrt(t2)]");
        assert_ne!(q.splitting, coordinate_point(&s).splitting);
        assert_eq!(auto_between_3points(&coordinate_point(&s), &q).unwrap_err(), Error::SplittingFieldMismatch);
        let cube = s.with_xi(&t(0).pow(3));
        assert_eq!(second_3point(&cube).unwrap_err(), Error::XiIsCube);
    }

    #[test]
    fn sixpoint_over_sqrt_t2() {
        let s = s_t2();
        let p = sixpoint_from_sqrt(&s, &t(1)).unwrap();
        assert_eq!(p.degree(), 6);
        assert_eq!(p.splitting.degree(), 6);
        assert_eq!(p.splitting.to_string(), "K[cbrt(t1)][sqrt(t2)]");
        assert_eq!(sixpoint_from_sqrt(&s, &t(1).pow(2)).unwrap_err(), Error::AlphaIsSquare);
    }

    #[test]
    fn radicand_cleared_to_polynomial() {
        let c = t(1).sub(&RatFun::one()).div(&t(0).scale(&Scalar::from_int(27))).unwrap();
        let (r, f) = polynomial_radicand(&c, 3);
        assert!(r.is_poly());
        assert_eq!(r.mul(&f.pow(3)), c);
    }
}
