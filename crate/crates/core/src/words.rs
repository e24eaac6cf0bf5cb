//! Words in ⊕_{P₃} ℤ/3 ∗ (∗_{P₆} ℤ), the homomorphism Ψ sending links to generators,
//! projection away from one degree-3 class, and the hexagon relation between two
//! degree-3 points.
//!
//! Degree-3 syllables commute with each other and have exponents in ℤ/3 (stored as −1
//! or 1); degree-6 syllables generate free factors. A word in normal form alternates
//! between sorted runs of degree-3 syllables and single degree-6 syllables.

use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::galois::Descriptor;
use crate::linalg::{adj3, Mat};
use crate::maps::{compose, compose_raw, equals, link_from_3point, six_in_general_position, Link, RationalMap, TwistedMap};
use crate::severi_brauer::{coordinate_point, is_isomorphic, make_closed_point, matrix_commutes, ClosedPoint, Surface};
use crate::tower::{Elem, Tower};

/// The equivalence class of a link, named by the splitting field of its base point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkClass {
    pub degree: u8,
    pub splitting: Descriptor,
    /// Degree-6 classes are identified by their splitting field, an invariant that is
    /// not known to be complete.
    pub invariant_only: bool,
}

impl Serialize for LinkClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LinkClass", 3)?;
        st.serialize_field("degree", &self.degree)?;
        st.serialize_field("splitting", &self.splitting.to_string())?;
        st.serialize_field("invariant_only", &self.invariant_only)?;
        st.end()
    }
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.degree, self.splitting)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Syllable {
    pub class: LinkClass,
    pub exp: i64,
}

impl Syllable {
    pub fn new(class: LinkClass, exp: i64) -> Syllable {
        Syllable { class, exp }
    }

    fn torsion(&self) -> bool {
        self.class.degree == 3
    }
}

/// A reduced word; build it with [`reduce`].
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct GroupWord {
    pub syllables: Vec<Syllable>,
}

fn balanced_mod3(e: i64) -> i64 {
    match e.rem_euclid(3) {
        2 => -1,
        r => r,
    }
}

impl GroupWord {
    pub fn empty() -> GroupWord {
        GroupWord::default()
    }

    pub fn generator(class: LinkClass) -> GroupWord {
        reduce(&[Syllable::new(class, 1)])
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn inverse(&self) -> GroupWord {
        let rev: Vec<Syllable> = self.syllables.iter().rev().map(|s| Syllable::new(s.class.clone(), -s.exp)).collect();
        reduce(&rev)
    }

    pub fn concat(&self, o: &GroupWord) -> GroupWord {
        let mut all = self.syllables.clone();
        all.extend(o.syllables.iter().cloned());
        reduce(&all)
    }

    /// True when some syllable uses a class identified only by an invariant.
    pub fn invariant_level(&self) -> bool {
        self.syllables.iter().any(|s| s.class.invariant_only)
    }

    fn push(&mut self, s: Syllable) {
        if s.torsion() {
            // merge into the trailing run of commuting syllables
            let start = self.syllables.iter().rposition(|x| !x.torsion()).map_or(0, |i| i + 1);
            let run = &mut self.syllables[start..];
            match run.binary_search_by(|x| x.class.cmp(&s.class)) {
                Ok(i) => {
                    let e = balanced_mod3(run[i].exp + s.exp);
                    if e == 0 {
                        self.syllables.remove(start + i);
                    } else {
                        self.syllables[start + i].exp = e;
                    }
                }
                Err(i) => {
                    let e = balanced_mod3(s.exp);
                    if e != 0 {
                        self.syllables.insert(start + i, Syllable::new(s.class, e));
                    }
                }
            }
            return;
        }
        if s.exp == 0 {
            return;
        }
        match self.syllables.last_mut() {
            Some(last) if last.class == s.class => {
                last.exp += s.exp;
                if last.exp == 0 {
                    self.syllables.pop();
                }
            }
            _ => self.syllables.push(s),
        }
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.syllables.iter().map(|s| format!("{}·[{}]", s.exp, s.class)).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Normal form of a syllable sequence.
pub fn reduce(syllables: &[Syllable]) -> GroupWord {
    let mut w = GroupWord::empty();
    for s in syllables {
        w.push(s.clone());
    }
    w
}

/// The class of a degree-3 or degree-6 point.
pub fn class_of_point(p: &ClosedPoint) -> Result<LinkClass> {
    match p.degree() {
        3 => Ok(LinkClass { degree: 3, splitting: p.splitting.clone(), invariant_only: false }),
        6 => Ok(LinkClass { degree: 6, splitting: p.splitting.clone(), invariant_only: true }),
        d => Err(Error::UnclassifiablePoint(format!("degree {}", d))),
    }
}

fn isomorphic(a: &Surface, b: &Surface) -> bool {
    if a.same_extension(b) && a.xi == b.xi {
        return true;
    }
    matches!(is_isomorphic(a, b), Ok(ans) if ans.is_yes())
}

/// +1 on the class of the base point for a link S ⇢ S^op, −1 on the class of the
/// inverse's base point for a link S^op ⇢ S.
pub fn psi_link(link: &Link, s: &Surface) -> Result<GroupWord> {
    if isomorphic(&link.forward.source, s) {
        Ok(GroupWord::generator(class_of_point(&link.base_point)?))
    } else if isomorphic(&link.forward.target, s) {
        Ok(GroupWord::generator(class_of_point(&link.inverse_base_point)?).inverse())
    } else {
        Err(Error::NotComposable(0))
    }
}

/// A step of a chain of birational maps.
#[derive(Clone, Debug)]
pub enum ChainItem {
    Link(Link),
    Iso(TwistedMap),
}

impl ChainItem {
    fn source(&self) -> &Surface {
        match self {
            ChainItem::Link(l) => &l.forward.source,
            ChainItem::Iso(m) => &m.source,
        }
    }

    fn target(&self) -> &Surface {
        match self {
            ChainItem::Link(l) => &l.forward.target,
            ChainItem::Iso(m) => &m.target,
        }
    }
}

/// Ψ of a composable chain, read from the first item to the last.
pub fn psi_compose(chain: &[ChainItem], s: &Surface) -> Result<GroupWord> {
    for i in 1..chain.len() {
        if !isomorphic(chain[i - 1].target(), chain[i].source()) {
            return Err(Error::NotComposable(i));
        }
    }
    let mut w = GroupWord::empty();
    for (i, item) in chain.iter().enumerate() {
        if let ChainItem::Link(l) = item {
            let part = psi_link(l, s).map_err(|_| Error::NotComposable(i))?;
            w = w.concat(&part);
        }
    }
    Ok(w)
}

/// Deletes the syllables of class p.
pub fn project_basepoint(w: &GroupWord, p: &LinkClass) -> GroupWord {
    let kept: Vec<Syllable> = w.syllables.iter().filter(|s| s.class != *p).cloned().collect();
    reduce(&kept)
}

/// The class of the coordinate points, the default class to project away.
pub fn default_projection_class(s: &Surface) -> LinkClass {
    class_of_point(&coordinate_point(s)).expect("degree 3")
}

/// The six links of the relation attached to two degree-3 points, and its checks.
#[derive(Clone, Debug)]
pub struct Hexagon {
    pub links: Vec<Link>,
    /// The composite of the six links as first built is this automorphism of S; it
    /// is folded into the last link.
    pub fold: Mat<Elem>,
    pub composite_is_identity: bool,
    pub descriptors: Vec<Descriptor>,
    pub pattern_holds: bool,
    pub word: GroupWord,
}

fn transport(f: &RationalMap, p: &ClosedPoint) -> Result<Vec<Vec<Elem>>> {
    let t = Tower::compositum(&f.tower, &p.tower);
    let f = f.embed(&t);
    p.components
        .iter()
        .map(|c| {
            let img = f.eval(&c.iter().map(|x| x.embed(&t).unwrap()).collect::<Vec<_>>());
            if img.iter().all(|x| x.is_zero()) {
                Err(Error::DegeneratePair("a point to transport is a base point".into()))
            } else {
                Ok(img)
            }
        })
        .collect()
}

fn linear_matrix(f: &RationalMap) -> Mat<Elem> {
    let t = &f.tower;
    f.coords
        .iter()
        .map(|c| (0..3).map(|j| c.coeff(&crate::poly::Mono::var(j)).cloned().unwrap_or_else(|| Elem::zero(t))).collect())
        .collect()
}

/// Builds χ₁, …, χ₆ alternating between S and S^op: χ₁ blows up p, χ₂ the image of p′,
/// and each later link the image of the point contracted two steps before.
pub fn hexagon(s: &Surface, p: &ClosedPoint, q: &ClosedPoint) -> Result<Hexagon> {
    if p.degree() != 3 || q.degree() != 3 {
        return Err(Error::BadDegree(if p.degree() != 3 { p.degree() } else { q.degree() }));
    }
    if p.components.iter().any(|c| q.contains(c)) {
        return Err(Error::DegeneratePair("the points share a component".into()));
    }
    let t = Tower::compositum(&p.tower, &q.tower);
    let six: Vec<Vec<Elem>> =
        p.components.iter().chain(&q.components).map(|c| c.iter().map(|x| x.embed(&t).unwrap()).collect()).collect();
    six_in_general_position(&six, &t).map_err(|e| Error::DegeneratePair(e.to_string()))?;
    let mut links = vec![link_from_3point(s, p)?];
    let mut pending = q.clone();
    for _ in 1..6 {
        let last = links.last().unwrap();
        let next = make_closed_point(&last.forward.target, &transport(&last.forward.map, &pending)?)?;
        pending = last.inverse_base_point.clone();
        let link = link_from_3point(&last.forward.target, &next)?;
        links.push(link);
    }
    let mut first_five = links[0].forward.map.clone();
    for l in &links[1..5] {
        first_five = compose(&l.forward.map, &first_five)?;
    }
    let composite = compose(&links[5].forward.map, &first_five)?;
    if composite.degree() != 1 {
        return Err(Error::IdentityFails {
            check: "the hexagon closes up to an automorphism".into(),
            residue: format!("composite of degree {}", composite.degree()),
        });
    }
    let alpha = linear_matrix(&composite);
    if !matrix_commutes(s, s, &alpha, &composite.tower) {
        return Err(Error::IdentityFails { check: "the closing map is an automorphism of S".into(), residue: composite.to_string() });
    }
    let last = fold_automorphism(&links[5], &alpha)?;
    links[5] = last;
    let closed = compose_raw(&links[5].forward.map, &first_five)?;
    let composite_is_identity = equals(&closed, &RationalMap::identity(&closed.tower, 3));
    let descriptors: Vec<Descriptor> = links.iter().map(|l| l.base_point.splitting.clone()).collect();
    let pattern_holds = (0..6).all(|i| descriptors[i] == if i % 2 == 0 { p.splitting.clone() } else { q.splitting.clone() });
    let chain: Vec<ChainItem> = links.iter().cloned().map(ChainItem::Link).collect();
    let word = psi_compose(&chain, s)?;
    Ok(Hexagon { links, fold: alpha, composite_is_identity, descriptors, pattern_holds, word })
}

/// The link α⁻¹∘χ, for α an automorphism of the target of χ.
fn fold_automorphism(link: &Link, alpha: &Mat<Elem>) -> Result<Link> {
    let inv = adj3(alpha);
    let forward = link.forward.map.then_matrix(&inv).normalized();
    let backward = compose_raw(&link.backward.map, &RationalMap::from_matrix(alpha))?.normalized();
    let comps: Vec<Vec<Elem>> = link
        .inverse_base_point
        .components
        .iter()
        .map(|c| {
            let t: Arc<Tower> = Tower::compositum(&inv[0][0].tower, &c[0].tower);
            let m: Mat<Elem> = inv.iter().map(|r| r.iter().map(|x| x.embed(&t).unwrap()).collect()).collect();
            crate::linalg::mat_vec(&m, &c.iter().map(|x| x.embed(&t).unwrap()).collect::<Vec<_>>())
        })
        .collect();
    let out = Link {
        forward: TwistedMap { map: forward, ..link.forward.clone() },
        backward: TwistedMap { map: backward, ..link.backward.clone() },
        base_point: link.base_point.clone(),
        inverse_base_point: make_closed_point(&link.forward.target, &comps)?,
        degree_class: link.degree_class,
        condition_rank: link.condition_rank,
    };
    out.verify()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::RatFun;
    use crate::severi_brauer::{auto_between_3points, cyclic_extension, make_surface, orbit, second_3point, sixpoint_from_sqrt};
    use proptest::prelude::*;

    fn s_t2() -> Surface {
        let (l, g) = cyclic_extension(2, &RatFun::var(0), "a");
        make_surface(&l, &g, &RatFun::var(1)).unwrap()
    }

    fn class(name: &str, degree: u8) -> LinkClass {
        LinkClass {
            degree,
            splitting: Descriptor { cubic: vec![name.into()], quadratic: vec![], basis: vec![(3, name.into())] },
            invariant_only: degree == 6,
        }
    }

    fn k_point(s: &Surface, c: [i64; 3]) -> ClosedPoint {
        let t = Tower::base(2);
        make_closed_point(s, &orbit(s, &c.map(|x| Elem::from_int(&t, x)))).unwrap()
    }

    #[test]
    fn torsion_cancels() {
        let p = class("p", 3);
        assert!(reduce(&[Syllable::new(p.clone(), 1), Syllable::new(p.clone(), 1), Syllable::new(p, 1)]).is_empty());
    }

    #[test]
    fn free_syllables_cancel() {
        let q = class("q", 6);
        assert!(reduce(&[Syllable::new(q.clone(), 1), Syllable::new(q, -1)]).is_empty());
    }

    #[test]
    fn relation_image_is_trivial() {
        let (a, b) = (class("a", 3), class("b", 3));
        assert!(reduce(&[Syllable::new(a, 3), Syllable::new(b, -3)]).is_empty());
    }

    #[test]
    fn torsion_commutes_but_not_past_free() {
        let (a, b, q) = (class("a", 3), class("b", 3), class("q", 6));
        let ab = reduce(&[Syllable::new(a.clone(), 1), Syllable::new(b.clone(), 1)]);
        let ba = reduce(&[Syllable::new(b.clone(), 1), Syllable::new(a.clone(), 1)]);
        assert_eq!(ab, ba);
        let aq = reduce(&[Syllable::new(a.clone(), 1), Syllable::new(q.clone(), 1)]);
        let qa = reduce(&[Syllable::new(q, 1), Syllable::new(a, 1)]);
        assert_ne!(aq, qa);
    }

    #[test]
    fn projection() {
        let (p, q) = (class("p", 3), class("q", 3));
        assert!(project_basepoint(&GroupWord::generator(p.clone()), &p).is_empty());
        let w = reduce(&[Syllable::new(p.clone(), 1), Syllable::new(q.clone(), -1)]);
        assert_eq!(project_basepoint(&w, &p), GroupWord::generator(q.clone()).inverse());
        assert!(project_basepoint(&GroupWord::empty(), &p).is_empty());
    }

    #[test]
    fn classes_of_points() {
        let s = s_t2();
        let c = class_of_point(&coordinate_point(&s)).unwrap();
        assert_eq!((c.degree, c.splitting.to_string()), (3, "K[cbrt(t1)]".to_string()));
        let c = class_of_point(&second_3point(&s).unwrap()).unwrap();
        assert_eq!(c.splitting.to_string(), "K[cbrt(t2)]");
        let c = class_of_point(&sixpoint_from_sqrt(&s, &RatFun::var(1)).unwrap()).unwrap();
        assert_eq!((c.degree, c.invariant_only), (6, true));
        assert_eq!(c.splitting.to_string(), "K[cbrt(t1)][sqrt(t2)]");
    }

    #[test]
    fn class_equality_matches_automorphisms() {
        let s = s_t2();
        let (p, q, r) = (coordinate_point(&s), k_point(&s, [1, 1, 1]), second_3point(&s).unwrap());
        assert_eq!(class_of_point(&p).unwrap(), class_of_point(&q).unwrap());
        assert!(auto_between_3points(&p, &q).is_ok());
        assert_ne!(class_of_point(&p).unwrap(), class_of_point(&r).unwrap());
        assert!(auto_between_3points(&p, &r).is_err());
    }

    #[test]
    fn psi_of_links() {
        let s = s_t2();
        let link = link_from_3point(&s, &coordinate_point(&s)).unwrap();
        let one = GroupWord::generator(default_projection_class(&s));
        assert_eq!(psi_link(&link, &s).unwrap(), one);
        assert_eq!(psi_link(&link.inverse(), &s).unwrap(), one.inverse());
        let id = TwistedMap { map: RationalMap::identity(&s.l, 3), source: s.clone(), target: s.clone() };
        assert!(psi_compose(&[ChainItem::Iso(id)], &s).unwrap().is_empty());
        let back = [ChainItem::Link(link.clone()), ChainItem::Link(link.inverse())];
        assert!(psi_compose(&back, &s).unwrap().is_empty());
        assert_eq!(psi_compose(&[ChainItem::Link(link.clone()), ChainItem::Link(link)], &s).unwrap_err(), Error::NotComposable(1));
    }

    #[test]
    fn two_classes_give_two_generators() {
        let s = s_t2();
        let chi_p = link_from_3point(&s, &coordinate_point(&s)).unwrap();
        let chi_q = link_from_3point(&s, &second_3point(&s).unwrap()).unwrap();
        let w = psi_compose(&[ChainItem::Link(chi_p), ChainItem::Link(chi_q.inverse())], &s).unwrap();
        assert_eq!(w.syllables.len(), 2);
        let p = default_projection_class(&s);
        assert_eq!(project_basepoint(&w, &p).syllables.len(), 1);
    }

    #[test]
    fn hexagon_closes() {
        let s = s_t2();
        let h = hexagon(&s, &coordinate_point(&s), &k_point(&s, [1, 2, 3])).unwrap();
        assert!(h.composite_is_identity);
        assert!(h.pattern_holds);
        assert!(h.word.is_empty());
    }

    #[test]
    fn hexagon_with_two_classes() {
        let s = s_t2();
        let (p, q) = (coordinate_point(&s), second_3point(&s).unwrap());
        let h = hexagon(&s, &p, &q).unwrap();
        assert!(h.composite_is_identity);
        assert!(h.pattern_holds);
        assert_ne!(h.descriptors[0], h.descriptors[1]);
        assert!(h.word.is_empty());
    }

    #[test]
    fn order3_map_has_two_classes() {
        let m = crate::cubic_models::build_smooth_model(
            &RatFun::var(0),
            &RatFun::var(1).sub(&RatFun::one()).div(&RatFun::var(0).mul(&RatFun::from_int(27))).unwrap(),
            &RatFun::one(),
            2,
        )
        .unwrap();
        let o = crate::cubic_models::order3_selfmap(&m).unwrap();
        let chain = [ChainItem::Link(o.chi1.clone()), ChainItem::Link(o.chi2.clone())];
        let w = psi_compose(&chain, &o.chi1.forward.source).unwrap();
        assert_eq!(w.syllables.len(), 2);
        assert!(w.syllables.iter().all(|x| x.class.degree == 3));
        assert_ne!(w.syllables[0].class, w.syllables[1].class);
    }

    #[test]
    fn hexagon_needs_distinct_points() {
        let s = s_t2();
        let p = coordinate_point(&s);
        assert!(matches!(hexagon(&s, &p, &p), Err(Error::DegeneratePair(_))));
        // (1,1,1) and its conjugate (ξ,1,1) span the line y = z through (1,0,0)
        assert!(matches!(hexagon(&s, &p, &k_point(&s, [1, 1, 1])), Err(Error::DegeneratePair(_))));
    }

    fn syllable() -> impl Strategy<Value = Syllable> {
        (0usize..5, -4i64..5).prop_map(|(c, e)| {
            let names = ["a", "b", "c", "q", "r"];
            Syllable::new(class(names[c], if c < 3 { 3 } else { 6 }), e)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn reduce_is_a_normal_form(u in prop::collection::vec(syllable(), 0..12), v in prop::collection::vec(syllable(), 0..12)) {
            let mut uv = u.clone();
            uv.extend(v.iter().cloned());
            let w = reduce(&uv);
            prop_assert_eq!(reduce(&w.syllables), w.clone());
            prop_assert_eq!(reduce(&u).concat(&reduce(&v)), w.clone());
            prop_assert!(w.concat(&w.inverse()).is_empty());
        }
    }
}
