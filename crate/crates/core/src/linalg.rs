//! Dense linear algebra over an exact field.

use crate::gcd::gcd;
use crate::par;
use crate::poly::{Field, ScalarPoly};
use crate::ratfun::RatFun;

pub type Mat<R> = Vec<Vec<R>>;

/// Reduced row echelon form in place; returns the pivot columns.
///
/// Among candidate pivots the cheapest (by [`Field::cost`]) is taken, so that tower
/// elements lying in the base field are preferred.
pub fn rref<R: Field>(m: &mut Mat<R>) -> Vec<usize> {
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).filter(|&i| !m[i][c].is_zero()).min_by_key(|&i| m[i][c].cost()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv().expect("nonzero pivot is invertible");
        let row: Vec<R> = m[r].iter().map(|x| if x.is_zero() { x.clone() } else { x.mul(&inv) }).collect();
        m[r] = row.clone();
        let (head, tail) = m.split_at_mut(r);
        let eliminate = |other: &mut Vec<R>| {
            let f = other[c].clone();
            if f.is_zero() {
                return;
            }
            for (j, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    other[j] = other[j].sub(&f.mul(x));
                }
            }
        };
        par::for_each_mut(head, eliminate);
        par::for_each_mut(&mut tail[1..], eliminate);
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<R: Field>(rows: &[Vec<R>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// A basis of the right kernel {v : rows·v = 0}; `zero` fixes the field for empty systems.
pub fn kernel<R: Field>(rows: &[Vec<R>], ncols: usize, zero: &R) -> Vec<Vec<R>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let one = zero.one_like();
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![zero.clone(); ncols];
            v[f] = one.clone();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = m[i][f].neg();
            }
            v
        })
        .collect()
}

/// Solves `a·x = b` for square invertible `a`.
pub fn solve<R: Field>(a: &Mat<R>, b: &[R]) -> Option<Vec<R>> {
    let n = a.len();
    let mut m: Mat<R> = a.iter().zip(b).map(|(r, x)| r.iter().cloned().chain([x.clone()]).collect()).collect();
    let pivots = rref(&mut m);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
        return None;
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

pub fn mat_mul<R: Field>(a: &Mat<R>, b: &Mat<R>) -> Mat<R> {
    let zero = a[0][0].zero_like();
    (0..a.len())
        .map(|i| {
            (0..b[0].len())
                .map(|j| (0..b.len()).fold(zero.clone(), |s, k| s.add(&a[i][k].mul(&b[k][j]))))
                .collect()
        })
        .collect()
}

pub fn mat_vec<R: Field>(a: &Mat<R>, v: &[R]) -> Vec<R> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(v[0].zero_like(), |s, (x, y)| s.add(&x.mul(y))))
        .collect()
}

pub fn identity<R: Field>(n: usize, one: &R) -> Mat<R> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { one.clone() } else { one.zero_like() }).collect())
        .collect()
}

pub fn transpose<R: Field>(a: &Mat<R>) -> Mat<R> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn det3<R: Field>(m: &Mat<R>) -> R {
    let c = |i: usize, j: usize, k: usize, l: usize| m[i][k].mul(&m[j][l]).sub(&m[i][l].mul(&m[j][k]));
    m[0][0].mul(&c(1, 2, 1, 2)).sub(&m[0][1].mul(&c(1, 2, 0, 2))).add(&m[0][2].mul(&c(1, 2, 0, 1)))
}

/// The adjugate: adj(m)·m = det(m)·I.
pub fn adj3<R: Field>(m: &Mat<R>) -> Mat<R> {
    let minor = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0].mul(&m[r1][c1]).sub(&m[r0][c1].mul(&m[r1][c0]));
    let others = |i: usize| match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    (0..3)
        .map(|i| {
            (0..3)
                .map(|j| {
                    // cofactor of entry (j, i)
                    let (r0, r1) = others(j);
                    let (c0, c1) = others(i);
                    let v = minor(r0, r1, c0, c1);
                    if (i + j) % 2 == 1 {
                        v.neg()
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect()
}

/// Cross product of two 3-vectors; zero exactly when they are proportional.
pub fn cross<R: Field>(a: &[R], b: &[R]) -> [R; 3] {
    [
        a[1].mul(&b[2]).sub(&a[2].mul(&b[1])),
        a[2].mul(&b[0]).sub(&a[0].mul(&b[2])),
        a[0].mul(&b[1]).sub(&a[1].mul(&b[0])),
    ]
}

pub fn proportional<R: Field>(a: &[R], b: &[R]) -> bool {
    cross(a, b).iter().all(|x| x.is_zero())
}

/// Fraction-free Gauss–Jordan elimination over ℚ(ζ)[t]: every division is exact.
/// Returns the pivot columns, or `None` if a division fails (which signals a bug).
fn bareiss(m: &mut Mat<ScalarPoly>) -> Option<Vec<usize>> {
    let ncols = m.first().map_or(0, |r| r.len());
    let mut prev = ScalarPoly::from_int(1);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).filter(|&i| !m[i][c].is_zero()).min_by_key(|&i| m[i][c].len()) else {
            continue;
        };
        m.swap(r, p);
        let pivot_row = m[r].clone();
        let piv = pivot_row[c].clone();
        let prev_ref = &prev;
        let ok = std::sync::atomic::AtomicBool::new(true);
        let step = |row: &mut Vec<ScalarPoly>| {
            let f = row[c].clone();
            for (j, x) in row.iter_mut().enumerate() {
                let num = if f.is_zero() { piv.mul(x) } else { piv.mul(x).sub(&f.mul(&pivot_row[j])) };
                match num.div_exact(prev_ref) {
                    Some(q) => *x = q,
                    None => ok.store(false, std::sync::atomic::Ordering::Relaxed),
                }
            }
        };
        let (head, tail) = m.split_at_mut(r);
        par::for_each_mut(head, step);
        par::for_each_mut(&mut tail[1..], step);
        if !ok.into_inner() {
            return None;
        }
        prev = piv;
        pivots.push(c);
        r += 1;
    }
    Some(pivots)
}

/// A basis of the kernel of a matrix over K, each vector scaled to polynomial entries
/// with trivial content.
pub fn kernel_k(rows: &[Vec<RatFun>], ncols: usize) -> Vec<Vec<RatFun>> {
    let mut m: Mat<ScalarPoly> = Vec::new();
    for row in rows {
        if row.iter().all(|x| x.is_zero()) {
            continue;
        }
        let mut den = ScalarPoly::from_int(1);
        for x in row {
            if !x.den.is_constant() {
                let g = gcd(&den, &x.den);
                den = den.mul(&x.den.div_exact(&g).unwrap());
            }
        }
        let polys: Vec<ScalarPoly> = row.iter().map(|x| x.num.mul(&den.div_exact(&x.den).unwrap())).collect();
        if !m.contains(&polys) {
            m.push(polys);
        }
    }
    let Some(pivots) = bareiss(&mut m) else {
        let zero = RatFun::zero();
        return kernel(rows, ncols, &zero).into_iter().map(|v| primitive(&v)).collect();
    };
    let d = pivots.last().map_or(ScalarPoly::from_int(1), |&c| m[pivots.len() - 1][c].clone());
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|f| {
            let mut v = vec![RatFun::zero(); ncols];
            v[f] = RatFun::from_poly(d.clone());
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = RatFun::from_poly(m[i][f].neg());
            }
            primitive(&v)
        })
        .collect()
}

/// Rescales a nonzero vector over K to coprime polynomial entries whose first nonzero
/// entry has leading coefficient one.
pub fn primitive(v: &[RatFun]) -> Vec<RatFun> {
    let mut den = ScalarPoly::from_int(1);
    for x in v {
        if !x.den.is_constant() {
            let g = gcd(&den, &x.den);
            den = den.mul(&x.den.div_exact(&g).unwrap());
        }
    }
    let nums: Vec<ScalarPoly> = v.iter().map(|x| x.num.mul(&den.div_exact(&x.den).unwrap())).collect();
    let mut g = ScalarPoly::zero();
    for n in &nums {
        if !n.is_zero() {
            g = gcd(&g, n);
            if g.is_constant() {
                break;
            }
        }
    }
    let Some(first) = nums.iter().find(|n| !n.is_zero()) else {
        return v.to_vec();
    };
    let g = g.scale(&first.div_exact(&g).unwrap().lc().unwrap().clone());
    nums.iter().map(|n| RatFun::from_poly(n.div_exact(&g).unwrap())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::RatFun;
    use crate::tower::{random_elem, Elem, Tower};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64) -> RatFun {
        RatFun::from_int(n)
    }

    #[test]
    fn kernel_of_rank_one() {
        let rows = vec![vec![r(1), r(2), r(3)], vec![r(2), r(4), r(6)]];
        let k = kernel(&rows, 3, &r(0));
        assert_eq!(k.len(), 2);
        for v in &k {
            let s = rows[0].iter().zip(v).fold(r(0), |s, (a, b)| s.add(&a.mul(b)));
            assert!(s.is_zero());
        }
    }

    #[test]
    fn adjugate_of_permutation() {
        let t = RatFun::var(1);
        let a = vec![vec![r(0), r(0), t.clone()], vec![r(1), r(0), r(0)], vec![r(0), r(1), r(0)]];
        assert_eq!(det3(&a), t);
        let p = mat_mul(&adj3(&a), &a);
        assert_eq!(p, identity(3, &r(1)).iter().map(|row| row.iter().map(|x| x.mul(&t)).collect::<Vec<_>>()).collect::<Vec<_>>());
    }

    #[test]
    fn fraction_free_kernel() {
        let t = RatFun::var(0);
        let rows = vec![
            vec![t.clone(), r(1), r(0), t.mul(&t)],
            vec![r(1), t.clone(), r(1), r(0)],
            vec![t.add(&r(1)), t.add(&r(1)), r(1), t.mul(&t)],
        ];
        let k = kernel_k(&rows, 4);
        assert_eq!(k.len(), 2);
        for v in &k {
            for row in &rows {
                let s = row.iter().zip(v).fold(r(0), |s, (a, b)| s.add(&a.mul(b)));
                assert!(s.is_zero());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn adjugate_identity_over_tower(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = Tower::base(2).extend("a", 3, RatFun::var(0)).unwrap();
            let m: Mat<Elem> = (0..3).map(|_| (0..3).map(|_| random_elem(&mut rng, &t, 1)).collect()).collect();
            let d = det3(&m);
            let p = mat_mul(&adj3(&m), &m);
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { d.clone() } else { Elem::zero(&t) };
                    prop_assert_eq!(&p[i][j], &want);
                }
            }
        }

        #[test]
        fn solve_recovers_vector(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = Tower::base(2).extend("a", 3, RatFun::var(0)).unwrap();
            // keep the entries polynomial: rational entries make elimination swell
            let m: Mat<Elem> = (0..3)
                .map(|_| (0..3).map(|_| Elem::from_int(&t, rng.gen_range(-3..=3)).add(&Elem::radical(&t, 0).scale(&RatFun::from_int(rng.gen_range(-2..=2))))).collect())
                .collect();
            prop_assume!(!det3(&m).is_zero());
            let x: Vec<Elem> = (0..3).map(|_| random_elem(&mut rng, &t, 1)).collect();
            let b = mat_vec(&m, &x);
            prop_assert_eq!(solve(&m, &b).unwrap(), x);
        }
    }
}
