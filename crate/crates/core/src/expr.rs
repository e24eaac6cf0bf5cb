//! A small expression language for field elements, and printing of forms.
//!
//! ```text
//! expr    = term , { ( "+" | "-" ) , term } ;
//! term    = unary , { ( "*" | "/" ) , unary } ;
//! unary   = "-" , unary | power ;
//! power   = atom , [ "^" , [ "-" ] , integer ] ;
//! atom    = integer | variable | "zeta"
//!         | ( "cbrt" | "sqrt" ) , "(" , expr , ")"
//!         | "(" , expr , ")" ;
//! variable = "t" , integer ;        (* t1 .. tn *)
//! integer = digit , { digit } ;
//! ```
//!
//! Rational constants are written as quotients, e.g. `1/27`. The argument of `cbrt` and
//! `sqrt` must lie in K; each new radical extends the tower built during evaluation.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cubes::{is_power, Answer};
use crate::error::{Error, Result};
use crate::galois::Form;
use crate::ratfun::RatFun;
use crate::scalar::Scalar;
use crate::severi_brauer::polynomial_radicand;
use crate::tower::{Elem, Tower};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(BigInt),
    Var(usize),
    Zeta,
    Root(u8, Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!("{} at offset {}", msg, self.pos)))
    }

    fn skip(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).unwrap().parse().unwrap())
    }

    fn word(&mut self) -> String {
        self.skip();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        String::from_utf8(self.s[start..self.pos].to_vec()).unwrap()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat(b'+') {
                e = Expr::Add(Box::new(e), Box::new(self.term()?));
            } else if self.eat(b'-') {
                e = Expr::Sub(Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat(b'*') {
                e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                e = Expr::Div(Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let a = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let n = self.integer()?;
            let n: i64 = n.try_into().map_err(|_| Error::Parse("exponent too large".into()))?;
            return Ok(Expr::Pow(Box::new(a), if neg { -n } else { n }));
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(Expr::Int(self.integer()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let w = self.word();
                match w.as_str() {
                    "zeta" => Ok(Expr::Zeta),
                    "cbrt" | "sqrt" => {
                        if !self.eat(b'(') {
                            return self.err("expected `(`");
                        }
                        let e = self.expr()?;
                        if !self.eat(b')') {
                            return self.err("expected `)`");
                        }
                        Ok(Expr::Root(if w == "cbrt" { 3 } else { 2 }, Box::new(e)))
                    }
                    "t" => {
                        let i = self.integer()?;
                        let i: usize = i.try_into().map_err(|_| Error::Parse("variable index too large".into()))?;
                        if i == 0 {
                            return self.err("variables are numbered from t1");
                        }
                        Ok(Expr::Var(i - 1))
                    }
                    _ => self.err(&format!("unknown name `{}`", w)),
                }
            }
            _ => self.err("expected a number, variable, function or `(`"),
        }
    }
}

pub fn parse(s: &str) -> Result<Expr> {
    let mut p = Parser { s: s.as_bytes(), pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

impl Expr {
    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Int(_) | Expr::Zeta => 0,
            Expr::Var(i) => i + 1,
            Expr::Root(_, a) | Expr::Neg(a) | Expr::Pow(a, _) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.arity().max(b.arity()),
        }
    }
}

/// Evaluation state: the tower grows as radicals appear.
pub struct Evaluator {
    pub tower: Arc<Tower>,
}

impl Evaluator {
    pub fn new(nvars: usize) -> Self {
        Evaluator { tower: Tower::base(nvars) }
    }

    pub fn over(tower: &Arc<Tower>) -> Self {
        Evaluator { tower: tower.clone() }
    }

    fn root(&mut self, n: u8, c: &RatFun) -> Result<Elem> {
        if c.is_zero() {
            return Ok(Elem::zero(&self.tower));
        }
        if let Answer::Yes(r) = is_power(c, n as u32) {
            return Ok(Elem::from_k(&self.tower, r));
        }
        let (rad, factor) = polynomial_radicand(c, n as u32);
        let existing = self.tower.radicals.iter().position(|r| r.degree == n && r.radicand == rad);
        let idx = match existing {
            Some(i) => i,
            None => {
                let name = format!("{}({})", if n == 3 { "cbrt" } else { "sqrt" }, rad);
                self.tower = self.tower.extend(&name, n, rad)?;
                self.tower.radicals.len() - 1
            }
        };
        Ok(Elem::radical(&self.tower, idx).scale(&factor))
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Elem> {
        if e.arity() > self.tower.nvars {
            return Err(Error::Parse(format!("variable t{} exceeds the {} declared variables", e.arity(), self.tower.nvars)));
        }
        let v = self.eval_inner(e)?;
        v.embed(&self.tower)
    }

    fn eval_inner(&mut self, e: &Expr) -> Result<Elem> {
        let t = self.tower.clone();
        Ok(match e {
            Expr::Int(n) => Elem::from_scalar(&t, Scalar::from_rational(BigRational::from_integer(n.clone()))),
            Expr::Var(i) => Elem::var(&t, *i),
            Expr::Zeta => Elem::zeta(&t),
            Expr::Root(n, a) => {
                let v = self.eval_inner(a)?;
                let c = v.in_base().cloned().ok_or_else(|| Error::Parse("radicands must lie in K".into()))?;
                self.root(*n, &c)?
            }
            Expr::Neg(a) => self.eval_inner(a)?.neg(),
            Expr::Pow(a, k) => self.eval_inner(a)?.pow(*k).map_err(|_| Error::Parse("zero to a negative power".into()))?,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let x = self.eval_inner(a)?;
                let y = self.eval_inner(b)?;
                let t = self.tower.clone();
                let (x, y) = (x.embed(&t)?, y.embed(&t)?);
                match e {
                    Expr::Add(..) => x.add(&y),
                    Expr::Sub(..) => x.sub(&y),
                    Expr::Mul(..) => x.mul(&y),
                    _ => x.div(&y).map_err(|_| Error::Parse("division by zero".into()))?,
                }
            }
        })
    }
}

/// Parses an element of K = ℚ(ζ)(t₁, …, tₙ).
pub fn parse_k(s: &str, nvars: usize) -> Result<RatFun> {
    let e = parse(s)?;
    let mut ev = Evaluator::new(nvars);
    let v = ev.eval(&e)?;
    v.in_base().cloned().ok_or_else(|| Error::Parse(format!("`{}` does not lie in K", s)))
}

/// Parses an element of a tower, extending it by any radicals that appear.
pub fn parse_elem(s: &str, ev: &mut Evaluator) -> Result<Elem> {
    ev.eval(&parse(s)?)
}

/// Prints a form with the given variable names, e.g. `t2*x^2 - y*z`.
pub fn format_form(p: &Form, names: &[&str]) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms.iter().enumerate() {
        let mono: Vec<String> = m.0[..names.len()]
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(v, &e)| if e == 1 { names[v].to_string() } else { format!("{}^{}", names[v], e) })
            .collect();
        let cs = c.to_string();
        let simple = c.in_base().is_some_and(|r| r.is_poly() && r.num.len() == 1);
        let (neg, body) = match cs.strip_prefix('-') {
            Some(rest) if simple => (true, rest.to_string()),
            _ => (false, cs.clone()),
        };
        if i > 0 {
            out.push_str(if neg { " - " } else { " + " });
        } else if neg {
            out.push('-');
        }
        let coeff = if body == "1" && !mono.is_empty() {
            String::new()
        } else if simple || mono.is_empty() {
            body
        } else {
            format!("({})", body)
        };
        match (coeff.is_empty(), mono.is_empty()) {
            (true, _) => out.push_str(&mono.join("*")),
            (false, true) => out.push_str(&coeff),
            (false, false) => out.push_str(&format!("{}*{}", coeff, mono.join("*"))),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Mono;

    #[test]
    fn parses_rational_functions() {
        let v = parse_k("(t2 - 1)/(27*t1)", 2).unwrap();
        assert_eq!(v, RatFun::var(1).sub(&RatFun::one()).div(&RatFun::var(0).scale(&Scalar::from_int(27))).unwrap());
        assert_eq!(parse_k("t1^-2 * t1^3", 2).unwrap(), RatFun::var(0));
        assert_eq!(parse_k("-zeta^3", 1).unwrap(), RatFun::from_int(-1));
        assert_eq!(parse_k("1/27", 0).unwrap(), RatFun::from_scalar(Scalar::from_ratio(1, 27)));
    }

    #[test]
    fn precedence() {
        assert_eq!(parse_k("2+3*4", 0).unwrap(), RatFun::from_int(14));
        assert_eq!(parse_k("-2^2", 0).unwrap(), RatFun::from_int(-4));
        assert_eq!(parse_k("2*(3-5)/4", 0).unwrap(), RatFun::from_scalar(Scalar::from_ratio(-1, 1)));
    }

    #[test]
    fn radicals_extend_the_tower() {
        let mut ev = Evaluator::new(2);
        let a = parse_elem("cbrt(t1)", &mut ev).unwrap();
        assert_eq!(a.pow(3).unwrap(), Elem::var(&ev.tower, 0));
        let b = parse_elem("cbrt(8*t1) + sqrt(t2)", &mut ev).unwrap();
        assert_eq!(ev.tower.radicals.len(), 2);
        let c = b.sub(&a.embed(&ev.tower).unwrap().scale(&RatFun::from_int(2)));
        assert_eq!(c.mul(&c), Elem::var(&ev.tower, 1));
        // perfect powers need no radical
        let mut ev = Evaluator::new(1);
        assert_eq!(parse_elem("sqrt(t1^2)", &mut ev).unwrap(), Elem::var(&ev.tower, 0));
        assert!(ev.tower.radicals.is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        for s in ["", "t0", "t3", "foo", "(t1", "t1 +", "cbrt t1", "1/0", "t1 t2"] {
            assert!(matches!(parse_k(s, 2), Err(Error::Parse(_))), "{}", s);
        }
        assert!(parse_k("cbrt(t1)", 2).is_err());
    }

    #[test]
    fn formats_forms() {
        let t = Tower::base(2);
        let f = Form::from_terms(vec![
            (Mono::from_exps(&[2, 0, 0]), Elem::var(&t, 1)),
            (Mono::from_exps(&[0, 1, 1]), Elem::from_int(&t, -1)),
        ]);
        assert_eq!(format_form(&f, &["x", "y", "z"]), "t2*x^2 - y*z");
    }

    #[test]
    fn display_round_trips() {
        for s in ["t1*t2 - 3", "(t1 + 1)/(t2^2 - 2*t1)", "zeta*t1"] {
            let v = parse_k(s, 2).unwrap();
            assert_eq!(parse_k(&v.to_string(), 2).unwrap(), v);
        }
    }
}
