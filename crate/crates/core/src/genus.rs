//! Lower bounds for the covering genus of cyclic covers and of varieties whose
//! canonical class is bounded below.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};

/// Cover of degree m of an n-dimensional space, branched along a hypersurface of
/// degree m·d, with e = (m−1)d − n − 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverParams {
    pub m: i64,
    pub d: i64,
    pub n: i64,
    pub e: i64,
}

impl CoverParams {
    pub fn new(m: i64, d: i64, n: i64) -> Result<CoverParams> {
        if m < 2 || d < 1 || n < 2 {
            return Err(Error::BadParameters(format!("need m >= 2, d >= 1, n >= 2, got m={m}, d={d}, n={n}")));
        }
        Ok(CoverParams { m, d, n, e: (m - 1) * d - n - 1 })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bound {
    pub params: CoverParams,
    #[serde(serialize_with = "ser_ratio")]
    pub bound: BigRational,
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// e/2 + 1.
pub fn covgen_lower_bound(m: i64, d: i64, n: i64) -> Result<Bound> {
    let params = CoverParams::new(m, d, n)?;
    if params.e < 1 {
        return Err(Error::SmallE(params.e));
    }
    let bound = covgen_from_min_degree(params.e)?;
    Ok(Bound { params, bound })
}

/// a/2 + 1.
pub fn covgen_from_min_degree(a: i64) -> Result<BigRational> {
    if a < 0 {
        return Err(Error::BadParameters(format!("need a >= 0, got {a}")));
    }
    Ok(BigRational::new(BigInt::from(a) + 2, BigInt::from(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn examples() {
        let b = covgen_lower_bound(2, 6, 2).unwrap();
        assert_eq!((b.params.e, b.bound), (3, q(5, 2)));
        assert_eq!(covgen_lower_bound(2, 3, 2).unwrap_err(), Error::SmallE(0));
        let b = covgen_lower_bound(3, 4, 3).unwrap();
        assert_eq!((b.params.e, b.bound), (4, q(3, 1)));
        assert_eq!(covgen_from_min_degree(4).unwrap(), q(3, 1));
        assert_eq!(covgen_from_min_degree(0).unwrap(), q(1, 1));
        assert_eq!(covgen_from_min_degree(10 - 2).unwrap(), q(5, 1));
        assert!(covgen_lower_bound(1, 6, 2).is_err());
    }

    proptest! {
        #[test]
        fn bounds_agree(m in 2i64..20, d in 1i64..50, n in 2i64..30) {
            let e = (m - 1) * d - n - 1;
            match covgen_lower_bound(m, d, n) {
                Ok(b) => prop_assert_eq!(b.bound, covgen_from_min_degree(e).unwrap()),
                Err(err) => prop_assert_eq!(err, Error::SmallE(e)),
            }
        }
    }
}
