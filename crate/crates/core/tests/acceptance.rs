//! The acceptance suite. Runs without the libtest harness so that every criterion
//! prints one line; exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use sbk::cubes::{check_norm_certificate, is_cube, is_norm, Answer, Certificate};
use sbk::cubic_models::{build_singular_model, build_smooth_model, order3_selfmap, verify_singular_model, verify_smooth_model};
use sbk::error::Error;
use sbk::expr::parse_k;
use sbk::genus::{covgen_from_min_degree, covgen_lower_bound};
use sbk::maps::{compose, equals, is_equivariant, link_from_3point, link_from_6point, Link, RationalMap};
use sbk::poly::Mono;
use sbk::ratfun::RatFun;
use sbk::scalar::Scalar;
use sbk::severi_brauer::{
    auto_between_3points, coordinate_point, make_closed_point, opposite, orbit, second_3point, sixpoint_from_sqrt, ClosedPoint, Surface,
};
use sbk::tower::{Elem, Tower};
use sbk::words::{class_of_point, hexagon, project_basepoint, psi_compose, reduce, ChainItem, GroupWord, LinkClass, Syllable};

type Outcome = Result<String, String>;

fn ensure(ok: bool, what: &str) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

fn k_orbit(s: &Surface, c: [i64; 3]) -> Result<ClosedPoint, Error> {
    let t = Tower::base(2);
    make_closed_point(s, &orbit(s, &c.map(|x| Elem::from_int(&t, x))))
}

fn norm_certificate() -> Outcome {
    let s = s_t2();
    let Answer::No(cert) = is_norm(&s.l, &t(1)) else { return Err("t2 not reported as a non-norm".into()) };
    ensure(check_norm_certificate(&s.l, &t(1), &cert), "certificate re-check")?;
    // t1 weighs 3, so t2 has weighted degree 1, prime to 3
    ensure(t(1).weighted_degree(0, 3) == 1, "oracle degree")?;
    ensure(matches!(cert, Certificate::WeightedDegree { degree: 1, .. }), "certificate degree")?;
    Ok(format!("is_norm = no, certificate: {}", cert))
}

fn random_monomial(rng: &mut impl Rng) -> RatFun {
    let c = Scalar::from_ratio(rng.gen_range(1..=12) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=7));
    RatFun::from_scalar(c).mul(&t(0).pow(rng.gen_range(-3..=3))).mul(&t(1).pow(rng.gen_range(-3..=3)))
}

fn cocycle() -> Outcome {
    let mut rng = rng(2);
    for _ in 0..20 {
        let xi = random_monomial(&mut rng);
        let s = surface(&t(0), &xi);
        ensure(s.cocycle_is_scalar(), "cocycle_is_scalar")?;
        // A is defined over K and A³ = ξ·I
        let m = s.cocycle_product();
        for (i, row) in m.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let want = if i == j { Elem::from_k(&x.tower, xi.clone()) } else { Elem::zero(&x.tower) };
                ensure(*x == want, &format!("entry ({i},{j}) for xi = {xi}"))?;
            }
        }
    }
    Ok("20 random monomial xi, product = xi*I".into())
}

fn opposite_conjugation() -> Outcome {
    let mut rng = rng(3);
    for _ in 0..10 {
        let xi = random_monomial(&mut rng);
        let s = surface(&t(0), &xi);
        let op = opposite(&s);
        ensure(is_equivariant(&RationalMap::sigma(&s.l), &s, &op), "is_equivariant")?;
        let g = s.l.generator(0);
        let inv = xi.inv().unwrap();
        for _ in 0..3 {
            let p = random_tower_point(&mut rng, &s.l);
            let gp: Vec<Elem> = p.iter().map(|x| x.apply_galois(&g).unwrap()).collect();
            let lhs = sigma(&a_xi(&xi, &gp));
            let gsp: Vec<Elem> = sigma(&p).iter().map(|x| x.apply_galois(&g).unwrap()).collect();
            ensure(proportional(&lhs, &a_xi(&inv, &gsp)), "pointwise twisted actions")?;
        }
    }
    Ok("10 random xi, symbolic and pointwise".into())
}

fn automorphism_transport() -> Outcome {
    let s = s_t2();
    let (p, q) = (coordinate_point(&s), k_orbit(&s, [1, 1, 1]).map_err(|e| e.to_string())?);
    let m = auto_between_3points(&p, &q).map_err(|e| e.to_string())?;
    let tw = m.matrix.iter().flatten().fold(s.l.clone(), |a, x| join(&a, &x.tower));
    let g = s.l.generator(0);
    let gexps = g.resolve(&tw).map_err(|e| e.to_string())?;
    let mm: Vec<Vec<Elem>> = m.matrix.iter().map(|r| lift(r, &tw)).collect();
    let gm: Vec<Vec<Elem>> = mm.iter().map(|r| r.iter().map(|x| x.apply_exps(&gexps)).collect()).collect();
    // M·A = A·g(M) as matrices, compared on the basis vectors up to one common scalar
    let basis: Vec<Vec<Elem>> = (0..3).map(|i| (0..3).map(|j| if i == j { Elem::one(&tw) } else { Elem::zero(&tw) }).collect()).collect();
    let lhs: Vec<Vec<Elem>> = basis.iter().map(|e| mat_vec(&mm, &a_xi(&s.xi, e))).collect();
    let rhs: Vec<Vec<Elem>> = basis.iter().map(|e| a_xi(&s.xi, &mat_vec(&gm, e))).collect();
    let flat = |v: &Vec<Vec<Elem>>| v.iter().flatten().cloned().collect::<Vec<_>>();
    ensure(proportional(&flat(&lhs), &flat(&rhs)), "M·A_g ∝ A_g·g(M)")?;
    let mut hit = vec![false; 3];
    for c in &p.components {
        let img = mat_vec(&mm, &lift(c, &tw));
        let j = q.components.iter().position(|d| proportional(&img, d)).ok_or("component image not in q")?;
        ensure(!hit[j], "not injective")?;
        hit[j] = true;
    }
    Ok("M commutes with the twist and maps p onto q".into())
}

fn two_splitting_fields() -> Outcome {
    let s = s_t2();
    let q = second_3point(&s).map_err(|e| e.to_string())?;
    ensure(q.splitting != coordinate_point(&s).splitting, "descriptor equals K[cbrt(t1)]")?;
    // closure of the components under x ↦ A^k·h(x) for each generator h
    let tw = &q.group_tower;
    let comps: Vec<Vec<Elem>> = q.components.iter().map(|c| lift(c, tw)).collect();
    let lpos = tw.find_radical(&s.l.radicals[0]).ok_or("L not in the point tower")?;
    for i in 0..tw.radicals.len() {
        let mut e = vec![0u8; tw.radicals.len()];
        e[i] = 1;
        let k = if i == lpos { 1 } else { 0 };
        for c in &comps {
            let mut v: Vec<Elem> = c.iter().map(|x| x.apply_exps(&e)).collect();
            for _ in 0..k {
                v = a_xi(&s.xi, &v);
            }
            ensure(q.components.iter().any(|d| proportional(&v, d)), "not an orbit")?;
        }
    }
    Ok(format!("splitting field {}", q.splitting))
}

fn identity_map(l: &Link) -> RationalMap {
    RationalMap::identity(&l.forward.map.tower, 3)
}

fn link_round_trip() -> Outcome {
    let s = s_t2();
    let mut rng = rng(6);
    let mut done = 0;
    while done < 5 {
        let c = [rng.gen_range(-9..=9), rng.gen_range(-9..=9), rng.gen_range(-9..=9)];
        let Ok(p) = k_orbit(&s, c) else { continue };
        let Ok(l) = link_from_3point(&s, &p) else { continue };
        ensure(l.forward.map.degree() == 2, "forward degree")?;
        let rt = compose(&l.backward.map, &l.forward.map).map_err(|e| e.to_string())?;
        ensure(rt.degree() == 1 && equals(&rt, &identity_map(&l)), "round trip reduces to the identity")?;
        ensure(pointwise_identity(&[&l.forward.map, &l.backward.map], &mut rng, 3), "pointwise round trip")?;
        done += 1;
    }
    let six = sixpoint_from_sqrt(&s, &t(1)).map_err(|e| e.to_string())?;
    let l = link_from_6point(&s, &six).map_err(|e| e.to_string())?;
    ensure(l.forward.map.degree() == 5, "six-link degree")?;
    ensure(l.condition_rank == 18, "quintic condition rank")?;
    l.verify().map_err(|e| e.to_string())?;
    ensure(pointwise_identity(&[&l.forward.map, &l.backward.map], &mut rng, 2), "six-link pointwise round trip")?;
    Ok("5 random degree-3 links and one degree-6 link (degree 5, rank 18)".into())
}

fn check_hexagon(s: &Surface, p: &ClosedPoint, q: &ClosedPoint) -> Result<(), String> {
    let h = hexagon(s, p, q).map_err(|e| e.to_string())?;
    ensure(h.composite_is_identity, "composite is the identity")?;
    ensure(h.pattern_holds, "descriptor pattern")?;
    ensure(h.descriptors[0] == p.splitting && h.descriptors[1] == q.splitting, "descriptors")?;
    ensure(h.word.is_empty(), "psi of the chain")?;
    let maps: Vec<&RationalMap> = h.links.iter().map(|l| &l.forward.map).collect();
    ensure(pointwise_identity(&maps, &mut rng(7), 2), "pointwise six-fold composite")
}

fn hexagon_relation() -> Outcome {
    let s = s_t2();
    let p = coordinate_point(&s);
    // the literal pair is degenerate: (1,1,1) and (ξ,1,1) lie on y = z with (1,0,0)
    let literal = k_orbit(&s, [1, 1, 1]).map_err(|e| e.to_string())?;
    ensure(matches!(hexagon(&s, &p, &literal), Err(Error::DegeneratePair(_))), "literal pair should be degenerate")?;
    check_hexagon(&s, &p, &k_orbit(&s, [1, 2, 3]).map_err(|e| e.to_string())?)?;
    check_hexagon(&s, &p, &second_3point(&s).map_err(|e| e.to_string())?)?;
    Ok("[1:1:1] orbit rejected as degenerate (see README); verified with [1:2:3] and with the second splitting field".into())
}

fn singular_model() -> Outcome {
    let m = build_singular_model(&t(0), &t(1), 2).map_err(|e| e.to_string())?;
    let done = verify_singular_model(&m).map_err(|e| e.to_string())?;
    let mut rng = rng(8);
    let tw = m.tower.clone();
    let lam = t(0);
    for _ in 0..5 {
        let v = random_k_point(&mut rng, &tw, 4);
        let prod = m.factors.iter().fold(Elem::one(&tw), |acc, f| acc.mul(&f.eval(&v)));
        let (x, y, z) = (&v[1], &v[2], &v[3]);
        let want = x.mul(x).mul(x).scale(&lam).add(&y.mul(y).mul(y)).add(&z.mul(z).mul(z).scale(&lam.inv().unwrap()))
            .sub(&x.mul(y).mul(z).scale(&RatFun::from_int(3)));
        ensure(prod == want, "pointwise factorization")?;
    }
    for p in &m.singular_points {
        ensure(m.equation.eval(p).is_zero(), "singular point on X")?;
        for i in 0..4 {
            ensure(m.equation.derivative(i).eval(p).is_zero(), "gradient vanishes")?;
        }
    }
    let mut bad = m.clone();
    bad.factors[0] = bad.factors[0].add(&sbk::poly::Poly::monomial(Mono::var(1), Elem::one(&tw)));
    ensure(verify_singular_model(&bad).is_err(), "perturbed factor accepted")?;
    let mut bad = m.clone();
    bad.psi.coords.swap(0, 1);
    ensure(verify_singular_model(&bad).is_err(), "perturbed psi accepted")?;
    Ok(format!("{} identities, {} singular points, negative controls rejected", done.len(), m.singular_points.len()))
}

fn smooth_model() -> Outcome {
    let mu = t(1).sub(&RatFun::one()).div(&t(0).mul(&RatFun::from_int(27))).unwrap();
    let m = build_smooth_model(&t(0), &mu, &RatFun::one(), 2).map_err(|e| e.to_string())?;
    ensure(m.xi == t(1), "xi = t2")?;
    let lhs = m.a[0].mul(&m.a[1]).mul(&m.a[2]).scale(&Elem::from_k(&m.lhat, m.xi.clone())).sub(&m.b[0].mul(&m.b[1]).mul(&m.b[2]));
    ensure(lhs.sub(&m.equation).is_zero(), "symbolic identity")?;
    let mut rng = rng(9);
    for _ in 0..5 {
        let v = random_k_point(&mut rng, &m.lhat, 4);
        let (w, x, y, z) = (&v[0], &v[1], &v[2], &v[3]);
        let cube = |e: &Elem| e.mul(e).mul(e);
        let want = cube(w).scale(&m.xi).sub(&cube(x).scale(&m.lambda)).sub(&cube(y).scale(&m.mu)).sub(&cube(z))
            .sub(&x.mul(y).mul(z).scale(&m.nu));
        ensure(lhs.eval(&v) == want, "pointwise identity")?;
    }
    ensure(m.incidence() == [[1, 1, 0, 0, 0, 0], [0, 1, 1, 1, 1, 1], [1, 0, 1, 1, 1, 1]], "incidence table")?;
    verify_smooth_model(&m).map_err(|e| e.to_string())?;
    let o = order3_selfmap(&m).map_err(|e| e.to_string())?;
    let r = &o.rho_hat.map;
    ensure(pointwise_identity(&[r, r, r], &mut rng, 2), "pointwise rho_hat^3")?;
    let base = Tower::base(2);
    for _ in 0..2 {
        let p = random_k_point(&mut rng, &base, 3);
        let a = eval_map(r, &p);
        let b = eval_map(&o.chi2.forward.map, &eval_map(&o.chi1.forward.map, &p));
        ensure(proportional(&a, &b), "rho_hat = chi2 o chi1 pointwise")?;
    }
    // each descriptor radicand r must satisfy r/λ (resp. r/μ) or r/λ² a cube
    let same_cubic = |d: &sbk::galois::Descriptor, c: &RatFun| {
        d.basis.len() == 1 && {
            let r = parse_k(&d.basis[0].1, 2).unwrap();
            is_cube(&r.div(c).unwrap()).is_yes() || is_cube(&r.div(&c.mul(c)).unwrap()).is_yes()
        }
    };
    ensure(same_cubic(&o.chi1.base_point.splitting, &m.lambda), "chi1 splits over K[cbrt(lambda)]")?;
    ensure(same_cubic(&o.chi2.base_point.splitting, &m.mu), "chi2 splits over K[cbrt(mu)]")?;
    Ok(format!("identity, incidence, rho_hat^3 = id, splitting {} and {}", o.chi1.base_point.splitting, o.chi2.base_point.splitting))
}

fn random_syllables(rng: &mut impl Rng, classes: &[LinkClass]) -> Vec<Syllable> {
    let n = rng.gen_range(0..10);
    (0..n).map(|_| Syllable::new(classes[rng.gen_range(0..classes.len())].clone(), rng.gen_range(-4..=4))).collect()
}

fn word_algebra() -> Outcome {
    let s = s_t2();
    let (cp, cq) = (coordinate_point(&s), second_3point(&s).map_err(|e| e.to_string())?);
    let six = sixpoint_from_sqrt(&s, &t(1)).map_err(|e| e.to_string())?;
    let op = opposite(&s);
    let from_s = [
        link_from_3point(&s, &cp),
        link_from_3point(&s, &cq),
        link_from_3point(&s, &k_orbit(&s, [1, 2, 3]).map_err(|e| e.to_string())?),
        link_from_6point(&s, &six),
    ]
    .into_iter()
    .collect::<Result<Vec<Link>, Error>>()
    .map_err(|e| e.to_string())?;
    let mut from_op: Vec<Link> = from_s.iter().map(|l| l.inverse()).collect();
    from_op.push(link_from_3point(&op, &coordinate_point(&op)).map_err(|e| e.to_string())?);
    let classes: Vec<LinkClass> = [&cp, &cq, &six].iter().map(|p| class_of_point(p).unwrap()).collect();
    let mut rng = rng(10);
    for _ in 0..1000 {
        let (u, v) = (random_syllables(&mut rng, &classes), random_syllables(&mut rng, &classes));
        let w = reduce(&[u.clone(), v.clone()].concat());
        ensure(reduce(&w.syllables) == w, "reduce is idempotent")?;
        ensure(reduce(&u).concat(&reduce(&v)) == w, "reduce is associative")?;
    }
    for _ in 0..100 {
        let len = rng.gen_range(1..=8);
        let mut on_s = rng.gen_bool(0.5);
        let chain: Vec<ChainItem> = (0..len)
            .map(|_| {
                let pool = if on_s { &from_s } else { &from_op };
                on_s = !on_s;
                ChainItem::Link(pool[rng.gen_range(0..pool.len())].clone())
            })
            .collect();
        let cut = rng.gen_range(0..=len);
        let whole = psi_compose(&chain, &s).map_err(|e| e.to_string())?;
        let (a, b) = (psi_compose(&chain[..cut], &s).unwrap(), psi_compose(&chain[cut..], &s).unwrap());
        ensure(whole == a.concat(&b), "psi is multiplicative")?;
    }
    for l in from_s.iter().chain(&from_op) {
        let pair = [ChainItem::Link(l.clone()), ChainItem::Link(l.inverse())];
        ensure(psi_compose(&pair, &s).unwrap().is_empty(), "psi of a trivial relation")?;
    }
    let (p, q) = (class_of_point(&cp).unwrap(), class_of_point(&cq).unwrap());
    let w = psi_compose(&[ChainItem::Link(from_s[0].clone()), ChainItem::Link(from_s[1].inverse())], &s).unwrap();
    ensure(w == reduce(&[Syllable::new(p.clone(), 1), Syllable::new(q.clone(), -1)]), "psi of chi_p chi_q^-1")?;
    ensure(project_basepoint(&w, &p) == GroupWord::generator(q).inverse(), "projection witness")?;
    Ok("1000 words, 100 chains, trivial relations, projection 1_p - 1_q -> -1_q".into())
}

fn bounds() -> Outcome {
    let b = covgen_lower_bound(2, 6, 2).map_err(|e| e.to_string())?;
    ensure(b.bound.to_string() == "5/2", "bound(2,6,2)")?;
    let mut rng = rng(11);
    for _ in 0..100 {
        let (m, d, n) = (rng.gen_range(2..12), rng.gen_range(1..30), rng.gen_range(2..20));
        let e = (m - 1) * d - n - 1;
        match covgen_lower_bound(m, d, n) {
            Ok(b) => ensure(b.bound == covgen_from_min_degree(e).unwrap(), "consistency")?,
            Err(err) => ensure(err == Error::SmallE(e) && e < 1, "SmallE")?,
        }
    }
    Ok("bound(2,6,2) = 5/2, 100 random triples consistent".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 11] = [
        ("norm certificate", norm_certificate, 1),
        ("cocycle validity", cocycle, 1),
        ("opposite-surface conjugation", opposite_conjugation, 5),
        ("automorphism transport", automorphism_transport, 5),
        ("two splitting fields", two_splitting_fields, 5),
        ("link round trip", link_round_trip, 60),
        ("hexagon relation", hexagon_relation, 60),
        ("singular cubic model", singular_model, 10),
        ("smooth cubic model", smooth_model, 120),
        ("word algebra", word_algebra, 10),
        ("covering-genus bounds", bounds, 1),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(d) if elapsed > Duration::from_secs(*limit) => Err(format!("over the {}s budget: {}", limit, d)),
            r => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => ("FAIL", e.clone()),
        };
        if result.is_err() {
            failures += 1;
        }
        println!("criterion {:>2} {} {} ({:.2}s): {}", i + 1, tag, name, elapsed.as_secs_f64(), detail);
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
