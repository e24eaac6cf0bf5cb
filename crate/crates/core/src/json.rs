//! JSON encoding of field elements, polynomials, maps, surfaces and points.
//!
//! Every `*_to_json` has a `*_from_json` inverse; rationals are strings "p/q" and
//! monomials are exponent arrays of length nvars.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::maps::RationalMap;
use crate::galois::Form;
use crate::poly::{Mono, Poly, ScalarPoly};
use crate::ratfun::RatFun;
use crate::scalar::{parse_rational, rational_to_string, Scalar};
use crate::severi_brauer::{make_closed_point, make_surface, ClosedPoint, Surface};
use crate::tower::{Elem, GaloisAction, Radical, Tower};

fn bad(what: &str) -> Error {
    Error::Parse(format!("malformed JSON {}", what))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| bad(&format!("object: missing key `{}`", key)))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(what))
}

fn uint(v: &Value, what: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| bad(what))
}

pub fn scalar_to_json(c: &Scalar) -> Value {
    json!({"re": rational_to_string(&c.re), "zeta": rational_to_string(&c.zeta)})
}

pub fn scalar_from_json(v: &Value) -> Result<Scalar> {
    let part = |k: &str| {
        field(v, k)?.as_str().and_then(parse_rational).ok_or_else(|| bad("rational"))
    };
    Ok(Scalar::new(part("re")?, part("zeta")?))
}

fn mono_to_json(m: &Mono, nvars: usize) -> Value {
    Value::from(m.0[..nvars].to_vec())
}

fn mono_from_json(v: &Value) -> Result<Mono> {
    let es = array(v, "monomial")?;
    let mut m = Mono::one();
    if es.len() > m.0.len() {
        return Err(bad("monomial: too many variables"));
    }
    for (i, e) in es.iter().enumerate() {
        m.0[i] = u16::try_from(uint(e, "exponent")?).map_err(|_| bad("exponent"))?;
    }
    Ok(m)
}

pub fn poly_to_json(p: &ScalarPoly, nvars: usize) -> Value {
    p.terms.iter().map(|(m, c)| json!({"monomial": mono_to_json(m, nvars), "coeff": scalar_to_json(c)})).collect()
}

pub fn poly_from_json(v: &Value) -> Result<ScalarPoly> {
    let terms = array(v, "polynomial")?
        .iter()
        .map(|t| Ok((mono_from_json(field(t, "monomial")?)?, scalar_from_json(field(t, "coeff")?)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Poly::from_terms(terms))
}

pub fn ratfun_to_json(r: &RatFun, nvars: usize) -> Value {
    json!({"num": poly_to_json(&r.num, nvars), "den": poly_to_json(&r.den, nvars)})
}

pub fn ratfun_from_json(v: &Value) -> Result<RatFun> {
    RatFun::new(poly_from_json(field(v, "num")?)?, poly_from_json(field(v, "den")?)?).ok_or_else(|| bad("zero denominator"))
}

pub fn tower_to_json(t: &Tower) -> Value {
    let radicals: Vec<Value> = t
        .radicals
        .iter()
        .map(|r| json!({"name": r.name, "degree": r.degree, "radicand": ratfun_to_json(&r.radicand, t.nvars)}))
        .collect();
    json!({"nvars": t.nvars, "radicals": radicals})
}

pub fn tower_from_json(v: &Value) -> Result<Arc<Tower>> {
    let nvars = uint(field(v, "nvars")?, "nvars")? as usize;
    let radicals = array(field(v, "radicals")?, "radicals")?
        .iter()
        .map(|r| {
            Ok(Radical {
                name: field(r, "name")?.as_str().ok_or_else(|| bad("name"))?.to_string(),
                degree: u8::try_from(uint(field(r, "degree")?, "degree")?).map_err(|_| bad("degree"))?,
                radicand: ratfun_from_json(field(r, "radicand")?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Tower::new(nvars, radicals)
}

fn coords_to_json(e: &Elem) -> Value {
    e.coords.iter().map(|c| ratfun_to_json(c, e.tower.nvars)).collect()
}

fn coords_from_json(v: &Value, t: &Arc<Tower>) -> Result<Elem> {
    let coords = array(v, "coordinates")?.iter().map(ratfun_from_json).collect::<Result<Vec<_>>>()?;
    if coords.len() != t.dim() {
        return Err(bad("element: wrong number of coordinates"));
    }
    Ok(Elem { tower: t.clone(), coords })
}

pub fn elem_to_json(e: &Elem) -> Value {
    json!({"tower": tower_to_json(&e.tower), "coords": coords_to_json(e)})
}

pub fn elem_from_json(v: &Value) -> Result<Elem> {
    let t = tower_from_json(field(v, "tower")?)?;
    coords_from_json(field(v, "coords")?, &t)
}

fn form_to_json(f: &Form, nvars: usize) -> Value {
    f.terms.iter().map(|(m, c)| json!({"monomial": mono_to_json(m, nvars), "coeff": coords_to_json(c)})).collect()
}

fn form_from_json(v: &Value, t: &Arc<Tower>) -> Result<Form> {
    let terms = array(v, "form")?
        .iter()
        .map(|x| Ok((mono_from_json(field(x, "monomial")?)?, coords_from_json(field(x, "coeff")?, t)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Poly::from_terms(terms))
}

/// Coefficients of the forms are coordinate vectors over `tower`.
pub fn map_to_json(f: &RationalMap) -> Value {
    let coords: Vec<Value> = f.coords.iter().map(|c| form_to_json(c, f.nsrc)).collect();
    json!({"tower": tower_to_json(&f.tower), "nsrc": f.nsrc, "coords": coords})
}

pub fn map_from_json(v: &Value) -> Result<RationalMap> {
    let t = tower_from_json(field(v, "tower")?)?;
    let nsrc = uint(field(v, "nsrc")?, "nsrc")? as usize;
    let coords = array(field(v, "coords")?, "coords")?.iter().map(|c| form_from_json(c, &t)).collect::<Result<Vec<_>>>()?;
    let map = RationalMap::new(coords, nsrc, t.nvars)?;
    // keep the declared tower even if the coefficients live in a subfield
    Ok(RationalMap { tower: t.clone(), ..map.embed(&t) })
}

pub fn surface_to_json(s: &Surface) -> Value {
    let generator: Map<String, Value> = s.g.images.iter().map(|(n, e)| (n.clone(), Value::from(*e))).collect();
    json!({"xi": ratfun_to_json(&s.xi, s.nvars()), "extension": tower_to_json(&s.l), "generator": generator})
}

pub fn surface_from_json(v: &Value) -> Result<Surface> {
    let l = tower_from_json(field(v, "extension")?)?;
    let images = field(v, "generator")?
        .as_object()
        .ok_or_else(|| bad("generator"))?
        .iter()
        .map(|(n, e)| Ok((n.clone(), u8::try_from(uint(e, "exponent")?).map_err(|_| bad("exponent"))?)))
        .collect::<Result<Vec<_>>>()?;
    make_surface(&l, &GaloisAction { images }, &ratfun_from_json(field(v, "xi")?)?)
}

pub fn point_to_json(p: &ClosedPoint) -> Value {
    let comps: Vec<Value> = p.components.iter().map(|c| c.iter().map(coords_to_json).collect()).collect();
    json!({
        "surface": surface_to_json(&p.surface),
        "tower": tower_to_json(&p.tower),
        "components": comps,
        "splitting": p.splitting.to_string(),
    })
}

/// Re-validates the orbit; the splitting field is recomputed, not read.
pub fn point_from_json(v: &Value) -> Result<ClosedPoint> {
    let s = surface_from_json(field(v, "surface")?)?;
    let t = tower_from_json(field(v, "tower")?)?;
    let comps = array(field(v, "components")?, "components")?
        .iter()
        .map(|c| array(c, "component")?.iter().map(|x| coords_from_json(x, &t)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    make_closed_point(&s, &comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_elem, parse_k, Evaluator};
    use crate::maps::link_from_3point;
    use crate::severi_brauer::{coordinate_point, cyclic_extension, second_3point};

    fn s_t2() -> Surface {
        let (l, g) = cyclic_extension(2, &RatFun::var(0), "a");
        make_surface(&l, &g, &RatFun::var(1)).unwrap()
    }

    fn round_trip(v: &Value) -> Value {
        serde_json::from_str(&serde_json::to_string(v).unwrap()).unwrap()
    }

    #[test]
    fn scalars_and_functions() {
        let c = Scalar::from_ratio(-3, 7).add(&Scalar::zeta());
        assert_eq!(scalar_from_json(&round_trip(&scalar_to_json(&c))).unwrap(), c);
        let r = parse_k("(t1^2 - zeta*t2)/(3*t1*t2 + 1/2)", 2).unwrap();
        assert_eq!(ratfun_from_json(&round_trip(&ratfun_to_json(&r, 2))).unwrap(), r);
        let v = poly_to_json(&r.num, 2);
        assert_eq!(v[0]["monomial"], json!([2, 0]));
        // the denominator is made monic, so t1² carries 1/3
        assert_eq!(v[0]["coeff"], json!({"re": "1/3", "zeta": "0"}));
    }

    #[test]
    fn elements() {
        let mut ev = Evaluator::new(2);
        let e = parse_elem("cbrt(t1) + t2*sqrt(t1 + 1)^3 - zeta/cbrt(t1)", &mut ev).unwrap();
        let back = elem_from_json(&round_trip(&elem_to_json(&e))).unwrap();
        assert_eq!(back, e);
        assert_eq!(*back.tower, *e.tower);
    }

    #[test]
    fn maps_surfaces_points() {
        let s = s_t2();
        let link = link_from_3point(&s, &second_3point(&s).unwrap()).unwrap();
        let f = &link.forward.map;
        assert_eq!(&map_from_json(&round_trip(&map_to_json(f))).unwrap(), f);
        let back = surface_from_json(&round_trip(&surface_to_json(&s))).unwrap();
        assert_eq!((back.xi.clone(), &*back.l), (s.xi.clone(), &*s.l));
        let p = second_3point(&s).unwrap();
        let q = point_from_json(&round_trip(&point_to_json(&p))).unwrap();
        assert_eq!(q.components, p.components);
        assert_eq!(q.splitting, p.splitting);
        let c = coordinate_point(&s);
        assert_eq!(point_to_json(&c)["splitting"], json!("K[cbrt(t1)]"));
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(scalar_from_json(&json!({"re": "1/0", "zeta": "0"})), Err(Error::Parse(_))));
        assert!(matches!(ratfun_from_json(&json!({"num": []})), Err(Error::Parse(_))));
        assert!(matches!(ratfun_from_json(&json!({"num": [], "den": []})), Err(Error::Parse(_))));
    }
}
