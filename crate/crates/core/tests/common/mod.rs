//! Independent oracles: pointwise evaluation, hand-written twisted actions and matrix
//! products. None of these go through symbolic composition or gcd reduction.

#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbk::maps::RationalMap;
use sbk::ratfun::RatFun;
use sbk::severi_brauer::{cyclic_extension, make_surface, Surface};
use sbk::tower::{Elem, Tower};

pub fn rng(stream: u64) -> ChaCha8Rng {
    let seed = std::env::var("SBK_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0u64);
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    r.set_stream(stream);
    r
}

pub fn t(i: usize) -> RatFun {
    RatFun::var(i)
}

pub fn surface(lambda: &RatFun, xi: &RatFun) -> Surface {
    let (l, g) = cyclic_extension(2, lambda, "l");
    make_surface(&l, &g, xi).unwrap()
}

pub fn s_t2() -> Surface {
    surface(&t(0), &t(1))
}

pub fn join(a: &Arc<Tower>, b: &Arc<Tower>) -> Arc<Tower> {
    Tower::compositum(a, b)
}

pub fn lift(p: &[Elem], t: &Arc<Tower>) -> Vec<Elem> {
    p.iter().map(|x| x.embed(t).unwrap()).collect()
}

/// All 2×2 minors vanish.
pub fn proportional(a: &[Elem], b: &[Elem]) -> bool {
    let t = join(&a[0].tower, &b[0].tower);
    let (a, b) = (lift(a, &t), lift(b, &t));
    if a.iter().all(|x| x.is_zero()) || b.iter().all(|x| x.is_zero()) {
        return false;
    }
    (0..a.len()).all(|i| (i + 1..a.len()).all(|j| a[i].mul(&b[j]).sub(&a[j].mul(&b[i])).is_zero()))
}

/// Evaluates the forms of `f` at `p`, one polynomial at a time.
pub fn eval_map(f: &RationalMap, p: &[Elem]) -> Vec<Elem> {
    let tw = join(&f.tower, &p[0].tower);
    let p = lift(p, &tw);
    f.coords.iter().map(|c| c.map_coeffs(|x| x.embed(&tw).unwrap()).eval(&p)).collect()
}

pub fn random_k_point(rng: &mut impl Rng, t: &Arc<Tower>, n: usize) -> Vec<Elem> {
    (0..n).map(|_| Elem::from_int(t, rng.gen_range(-20..=20))).collect()
}

/// A point with coordinates a + b·r + c·r² in the first radical of `t`.
pub fn random_tower_point(rng: &mut impl Rng, t: &Arc<Tower>) -> Vec<Elem> {
    let r = Elem::radical(t, 0);
    (0..3)
        .map(|_| {
            let (a, b, c) = (rng.gen_range(-9..=9), rng.gen_range(-9..=9), rng.gen_range(-9..=9));
            Elem::from_int(t, a).add(&r.scale(&RatFun::from_int(b))).add(&r.mul(&r).scale(&RatFun::from_int(c)))
        })
        .collect()
}

/// (x, y, z) ↦ (ξz, x, y).
pub fn a_xi(xi: &RatFun, v: &[Elem]) -> Vec<Elem> {
    vec![v[2].scale(xi), v[0].clone(), v[1].clone()]
}

pub fn sigma(v: &[Elem]) -> Vec<Elem> {
    vec![v[1].mul(&v[2]), v[0].mul(&v[2]), v[0].mul(&v[1])]
}

pub fn mat_vec(m: &[Vec<Elem>], v: &[Elem]) -> Vec<Elem> {
    m.iter().map(|r| r.iter().zip(v).fold(Elem::zero(&v[0].tower), |acc, (a, b)| acc.add(&a.mul(b)))).collect()
}

/// Checks that `f` sends a random point p back to p after the given pointwise maps,
/// retrying points that hit a base locus.
pub fn pointwise_identity(maps: &[&RationalMap], rng: &mut impl Rng, trials: usize) -> bool {
    let base = Tower::base(2);
    let mut done = 0;
    for _ in 0..trials * 5 {
        let p = random_k_point(rng, &base, 3);
        let mut q = p.clone();
        let mut hit_base = false;
        for f in maps {
            q = eval_map(f, &q);
            if q.iter().all(|x| x.is_zero()) {
                hit_base = true;
                break;
            }
        }
        if hit_base {
            continue;
        }
        if !proportional(&p, &q) {
            return false;
        }
        done += 1;
        if done == trials {
            return true;
        }
    }
    false
}
