//! Cubic surfaces in P³ (coordinates w, x, y, z) that are birational to S_ξ: a singular
//! model with three conjugate singular points, and a smooth model whose six disjoint
//! lines contract onto two degree-3 points, carrying an automorphism of order 3.
//!
//! Identities "on X" are checked by reducing modulo the defining cubic, replacing w³
//! by the rest of the equation divided by ξ; the remainder is unique, so zero on X
//! means remainder zero.

use std::sync::Arc;

use crate::cubes::{certified_independent, is_cube};
use crate::error::{Error, Result};
use crate::expr::format_form;
use crate::galois::{act_form, Descriptor, Form};
use crate::linalg::{adj3, kernel, rank, Mat};
use crate::maps::{
    compose_raw, divide_out, equals, frame_map, is_equivariant, is_inverse_pair, link_from_3point, reduce, Link,
    RationalMap, TwistedMap,
};
use crate::poly::Mono;
use crate::ratfun::RatFun;
use crate::severi_brauer::{
    coordinate_point, cyclic_extension, make_closed_point, make_surface, normalize_point, ClosedPoint, Surface,
};
use crate::tower::{Elem, Tower};

pub const NAMES: [&str; 4] = ["w", "x", "y", "z"];

fn var(t: &Arc<Tower>, i: usize) -> Form {
    Form::var(i, Elem::one(t))
}

/// Σ cᵢ·vᵢ over w, x, y, z.
fn linear(c: [Elem; 4]) -> Form {
    Form::from_terms(c.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (Mono::var(i), c)).collect())
}

fn monomial(t: &Arc<Tower>, c: &RatFun, e: [u16; 4]) -> Form {
    Form::monomial(Mono::from_exps(&e), Elem::from_k(t, c.clone()))
}

fn embed_form(f: &Form, t: &Arc<Tower>) -> Form {
    f.map_coeffs(|c| c.embed(t).expect("subtower"))
}

fn linear_coeffs(f: &Form, t: &Arc<Tower>) -> Vec<Elem> {
    (0..4).map(|i| f.coeff(&Mono::var(i)).map(|c| c.embed(t).unwrap()).unwrap_or_else(|| Elem::zero(t))).collect()
}

fn fail(check: &str, residue: &Form) -> Error {
    Error::IdentityFails { check: check.into(), residue: format_form(residue, &NAMES) }
}

fn expect_zero(check: &str, p: &Form) -> Result<()> {
    if p.is_zero() {
        Ok(())
    } else {
        Err(fail(check, p))
    }
}

/// Remainder of p modulo ξw³ − ξ·wcube, where `wcube` is free of w.
pub fn reduce_mod_cubic(p: &Form, wcube: &Form) -> Form {
    let mut p = p.clone();
    loop {
        let (high, low): (Vec<_>, Vec<_>) = p.terms.iter().cloned().partition(|(m, _)| m.0[0] >= 3);
        if high.is_empty() {
            return p;
        }
        let mut acc = Form::from_terms(low);
        for (m, c) in high {
            let mut e = m;
            e.0[0] -= 3;
            acc = acc.add(&wcube.mul_term(&e, &c));
        }
        p = acc;
    }
}

/// Checks g̃∘f∘g⁻¹ = f on X, with g̃[x:y:z] = [θ·g(z) : g(x) : g(y)]: the triple
/// (θ·f₂^g, f₀^g, f₁^g) must be proportional to f modulo the cubic.
fn equivariant_on_cubic(check: &str, f: &RationalMap, exps: &[u8], theta: &RatFun, wcube: &Form) -> Result<()> {
    let c: Vec<Form> = f.coords.iter().map(|p| act_form(exps, &f.tower, p)).collect();
    let lhs = [c[2].map_coeffs(|x| x.scale(theta)), c[0].clone(), c[1].clone()];
    for i in 0..3 {
        for j in i + 1..3 {
            let cross = lhs[i].mul(&f.coords[j]).sub(&lhs[j].mul(&f.coords[i]));
            expect_zero(check, &reduce_mod_cubic(&cross, wcube))?;
        }
    }
    Ok(())
}

/// ξw³ = λx³ + y³ + λ⁻¹z³ − 3xyz, singular at three conjugate points.
#[derive(Clone, Debug)]
pub struct SingularCubicModel {
    pub lambda: RatFun,
    pub xi: RatFun,
    /// L = K[∛λ], with g: ∛λ ↦ ζ·∛λ.
    pub tower: Arc<Tower>,
    /// ξw³ − λx³ − y³ − λ⁻¹z³ + 3xyz.
    pub equation: Form,
    /// Fᵢ = λᵢx + y + λᵢ⁻¹z with λᵢ = ζⁱ·∛λ.
    pub factors: [Form; 3],
    pub singular_points: Vec<Vec<Elem>>,
    /// [w² : wF₀ : F₀F₁], a birational map onto S_{1/ξ}.
    pub psi: RationalMap,
}

impl SingularCubicModel {
    /// w³ on X.
    pub fn wcube(&self) -> Form {
        let t = &self.tower;
        let inv = self.xi.inv().unwrap();
        let rest = monomial(t, &self.lambda, [0, 3, 0, 0])
            .add(&monomial(t, &RatFun::one(), [0, 0, 3, 0]))
            .add(&monomial(t, &self.lambda.inv().unwrap(), [0, 0, 0, 3]))
            .add(&monomial(t, &RatFun::from_int(-3), [0, 1, 1, 1]));
        rest.map_coeffs(|c| c.scale(&inv))
    }
}

pub fn build_singular_model(lambda: &RatFun, xi: &RatFun, nvars: usize) -> Result<SingularCubicModel> {
    if xi.is_zero() {
        return Err(Error::ZeroXi);
    }
    if lambda.is_zero() || is_cube(lambda).is_yes() {
        return Err(Error::LambdaIsCube);
    }
    let (t, _) = cyclic_extension(nvars, lambda, &format!("cbrt({})", lambda));
    let root = Elem::radical(&t, 0);
    let lambdas: Vec<Elem> = (0..3).map(|i| root.mul(&Elem::zeta(&t).pow(i).unwrap())).collect();
    let zero = Elem::zero(&t);
    let factors: Vec<Form> =
        lambdas.iter().map(|l| linear([zero.clone(), l.clone(), Elem::one(&t), l.inv().unwrap()])).collect();
    let factors: [Form; 3] = factors.try_into().unwrap();
    let rhs = monomial(&t, lambda, [0, 3, 0, 0])
        .add(&monomial(&t, &RatFun::one(), [0, 0, 3, 0]))
        .add(&monomial(&t, &lambda.inv().unwrap(), [0, 0, 0, 3]))
        .add(&monomial(&t, &RatFun::from_int(-3), [0, 1, 1, 1]));
    let product = factors[0].mul(&factors[1]).mul(&factors[2]);
    expect_zero("F₀F₁F₂ = λx³ + y³ + λ⁻¹z³ − 3xyz", &product.sub(&rhs))?;
    let equation = monomial(&t, xi, [3, 0, 0, 0]).sub(&rhs);
    let singular_points: Vec<Vec<Elem>> = lambdas
        .iter()
        .map(|l| vec![zero.clone(), Elem::one(&t), l.clone(), l.mul(l)])
        .collect();
    for p in &singular_points {
        let grad = (0..4).map(|v| equation.derivative(v));
        if !equation.eval(p).is_zero() || grad.into_iter().any(|d| !d.is_zero() && !d.eval(p).is_zero()) {
            return Err(Error::IdentityFails {
                check: "singular point".into(),
                residue: format!("{:?}", p),
            });
        }
    }
    let w = var(&t, 0);
    let psi = RationalMap::new(
        vec![w.mul(&w), w.mul(&factors[0]), factors[0].mul(&factors[1])],
        4,
        nvars,
    )?;
    Ok(SingularCubicModel { lambda: lambda.clone(), xi: xi.clone(), tower: t, equation, factors, singular_points, psi })
}

/// Checks the factorization, then that ψ conjugates g to the twist of S_{1/ξ} and σ∘ψ
/// conjugates it to the twist of S_ξ, on X. Returns the names of the checks.
pub fn verify_singular_model(m: &SingularCubicModel) -> Result<Vec<String>> {
    let rhs = m.equation.sub(&monomial(&m.tower, &m.xi, [3, 0, 0, 0])).neg();
    let product = m.factors[0].mul(&m.factors[1]).mul(&m.factors[2]);
    let mut done = Vec::new();
    let check = "F₀F₁F₂ = λx³ + y³ + λ⁻¹z³ − 3xyz";
    expect_zero(check, &product.sub(&rhs))?;
    done.push(check.to_string());
    let wcube = m.wcube();
    let g = m.tower.generator(0).resolve(&m.psi.tower)?;
    let check = "ψ = g̃∘ψ∘g⁻¹ with g̃ the twist by 1/ξ";
    equivariant_on_cubic(check, &m.psi, &g, &m.xi.inv().unwrap(), &wcube)?;
    done.push(check.to_string());
    let sp = compose_raw(&RationalMap::sigma(&m.psi.tower), &m.psi)?;
    let check = "σ∘ψ = g̃∘σ∘ψ∘g⁻¹ with g̃ the twist by ξ";
    equivariant_on_cubic(check, &sp, &g, &m.xi, &wcube)?;
    done.push(check.to_string());
    Ok(done)
}

/// A line of P³ as the common zeros of two linear forms.
#[derive(Clone, Debug)]
pub struct Line {
    pub name: String,
    pub forms: [Form; 2],
}

impl Line {
    fn new(name: &str, a: &Form, b: &Form) -> Line {
        Line { name: name.into(), forms: [a.clone(), b.clone()] }
    }

    fn rows(&self, t: &Arc<Tower>) -> Mat<Elem> {
        self.forms.iter().map(|f| linear_coeffs(f, t)).collect()
    }

    /// Two points spanning the line.
    pub fn points(&self, t: &Arc<Tower>) -> Vec<Vec<Elem>> {
        kernel(&self.rows(t), 4, &Elem::zero(t))
    }
}

/// Distinct lines meet iff their four forms are dependent.
pub fn lines_meet(a: &Line, b: &Line, t: &Arc<Tower>) -> bool {
    let mut rows = a.rows(t);
    rows.extend(b.rows(t));
    rank(&rows) < 4
}

pub fn same_line(a: &Line, b: &Line, t: &Arc<Tower>) -> bool {
    let mut rows = a.rows(t);
    rows.extend(b.rows(t));
    rank(&rows) == 2
}

/// The cubic restricted to the line is a binary cubic, zero iff it vanishes at four
/// points.
pub fn line_on_surface(l: &Line, equation: &Form, t: &Arc<Tower>) -> bool {
    let pts = l.points(t);
    if pts.len() != 2 {
        return false;
    }
    let eq = embed_form(equation, t);
    [(1, 0), (0, 1), (1, 1), (1, -1)].iter().all(|&(s, u)| {
        let p: Vec<Elem> = (0..4)
            .map(|i| pts[0][i].mul(&Elem::from_int(t, s)).add(&pts[1][i].mul(&Elem::from_int(t, u))))
            .collect();
        eq.eval(&p).is_zero()
    })
}

fn act_line(exps: &[u8], t: &Tower, l: &Line) -> Line {
    Line { name: l.name.clone(), forms: [act_form(exps, t, &l.forms[0]), act_form(exps, t, &l.forms[1])] }
}

/// Rows ℓ₀₁, 𝒞₀, 𝒞₁ against E₀..E₅.
pub const EXPECTED_INCIDENCE: [[u8; 6]; 3] = [[1, 1, 0, 0, 0, 0], [0, 1, 1, 1, 1, 1], [1, 0, 1, 1, 1, 1]];

/// ξw³ = λx³ + μy³ + z³ + νxyz with ξ = 27λμ + ν³.
#[derive(Clone, Debug)]
pub struct SmoothCubicModel {
    pub lambda: RatFun,
    pub mu: RatFun,
    pub nu: RatFun,
    pub xi: RatFun,
    /// L = K[∛λ].
    pub l: Arc<Tower>,
    /// L̂ = L[∛μ], with g acting on ∛λ and h on ∛μ.
    pub lhat: Arc<Tower>,
    /// ξw³ − λx³ − μy³ − z³ − νxyz.
    pub equation: Form,
    pub a: [Form; 3],
    pub b: [Form; 3],
    pub c: [Form; 3],
    pub d: [Form; 3],
    /// E₀..E₅.
    pub lines: Vec<Line>,
    /// E₀′..E₅′ = ρ⁻¹(E₀..E₅).
    pub lines_prime: Vec<Line>,
    /// ℓ₀₁, 𝒞₀, 𝒞₁.
    pub auxiliary: Vec<Line>,
    /// (ξA₁A₂ : B₀B₂ : A₁B₀), the contraction onto S_ξ.
    pub contraction: RationalMap,
    /// [ζw : x : y : z].
    pub rho: RationalMap,
    pub surface: Surface,
}

impl SmoothCubicModel {
    pub fn wcube(&self) -> Form {
        let t = &self.lhat;
        let inv = self.xi.inv().unwrap();
        let rest = monomial(t, &self.lambda, [0, 3, 0, 0])
            .add(&monomial(t, &self.mu, [0, 0, 3, 0]))
            .add(&monomial(t, &RatFun::one(), [0, 0, 0, 3]))
            .add(&monomial(t, &self.nu, [0, 1, 1, 1]));
        rest.map_coeffs(|c| c.scale(&inv))
    }

    /// Incidence of ℓ₀₁, 𝒞₀, 𝒞₁ with E₀..E₅.
    pub fn incidence(&self) -> [[u8; 6]; 3] {
        let mut out = [[0u8; 6]; 3];
        for (r, aux) in self.auxiliary.iter().enumerate() {
            for (c, e) in self.lines.iter().enumerate() {
                out[r][c] = lines_meet(aux, e, &self.lhat) as u8;
            }
        }
        out
    }
}

pub fn build_smooth_model(lambda: &RatFun, mu: &RatFun, nu: &RatFun, nvars: usize) -> Result<SmoothCubicModel> {
    if lambda.is_zero() || mu.is_zero() {
        return Err(Error::DegenerateTower("zero radicand".into()));
    }
    // ξ = 0 makes λμ a cube, so test it before independence
    let xi = RatFun::from_int(27).mul(lambda).mul(mu).add(&nu.pow(3));
    if xi.is_zero() {
        return Err(Error::XiZero);
    }
    if is_cube(lambda).is_yes() || is_cube(mu).is_yes() {
        return Err(Error::DegenerateTower("a radicand is a cube".into()));
    }
    if !certified_independent(&[lambda.clone(), mu.clone()], 3) {
        return Err(Error::DegenerateTower("independence of the radicands is not certified".into()));
    }
    let (l, g) = cyclic_extension(nvars, lambda, &format!("cbrt({})", lambda));
    let lhat = l.extend(&format!("cbrt({})", mu), 3, mu.clone())?;
    let surface = make_surface(&l, &g, &xi)?;
    let zeta = |t: &Arc<Tower>, i: usize| Elem::zeta(t).pow(i as i64).unwrap();
    let lam: Vec<Elem> = (0..3).map(|i| Elem::radical(&l, 0).mul(&zeta(&l, i))).collect();
    let mus: Vec<Elem> = (0..3).map(|i| Elem::radical(&lhat, 1).mul(&zeta(&lhat, i))).collect();
    let third = RatFun::from_int(3).inv().unwrap();
    let (one_l, zero_l) = (Elem::one(&l), Elem::zero(&l));
    let (one_h, zero_h) = (Elem::one(&lhat), Elem::zero(&lhat));
    // Aᵢ = w − y/(3λᵢ), Bᵢ = z + λᵢx − νy/(3λᵢ)
    let a: Vec<Form> = lam
        .iter()
        .map(|li| {
            let y = li.inv().unwrap().scale(&third).neg();
            linear([one_l.clone(), zero_l.clone(), y, zero_l.clone()])
        })
        .collect();
    let b: Vec<Form> = lam
        .iter()
        .map(|li| {
            let y = li.inv().unwrap().scale(&third.mul(nu)).neg();
            linear([zero_l.clone(), li.clone(), y, one_l.clone()])
        })
        .collect();
    // Cᵢ = w − x/(3μᵢ), Dᵢ = z + μᵢy − νx/(3μᵢ)
    let c: Vec<Form> = mus
        .iter()
        .map(|mi| {
            let x = mi.inv().unwrap().scale(&third).neg();
            linear([one_h.clone(), x, zero_h.clone(), zero_h.clone()])
        })
        .collect();
    let d: Vec<Form> = mus
        .iter()
        .map(|mi| {
            let x = mi.inv().unwrap().scale(&third.mul(nu)).neg();
            linear([zero_h.clone(), x, mi.clone(), one_h.clone()])
        })
        .collect();
    let t = &lhat;
    let equation = monomial(t, &xi, [3, 0, 0, 0])
        .sub(&monomial(t, lambda, [0, 3, 0, 0]))
        .sub(&monomial(t, mu, [0, 0, 3, 0]))
        .sub(&monomial(t, &RatFun::one(), [0, 0, 0, 3]))
        .sub(&monomial(t, nu, [0, 1, 1, 1]));
    let aaa = a[0].mul(&a[1]).mul(&a[2]);
    let bbb = b[0].mul(&b[1]).mul(&b[2]);
    let expected_a = monomial(&l, &RatFun::one(), [3, 0, 0, 0])
        .sub(&monomial(&l, &lambda.mul(&RatFun::from_int(27)).inv().unwrap(), [0, 0, 3, 0]));
    expect_zero("A₀A₁A₂ = w³ − y³/(27λ)", &aaa.sub(&expected_a))?;
    let fundamental = embed_form(&aaa.map_coeffs(|x| x.scale(&xi)).sub(&bbb), t).sub(&equation);
    expect_zero("ξA₀A₁A₂ − B₀B₁B₂ = ξw³ − λx³ − μy³ − z³ − νxyz", &fundamental)?;
    let mut lines: Vec<Line> = (0..3).map(|i| Line::new(&format!("E{}", i), &a[i], &b[i])).collect();
    lines.extend((3..6).map(|i| Line::new(&format!("E{}", i), &c[(i + 2) % 3], &d[i % 3])));
    let mut lines_prime: Vec<Line> = (0..3).map(|i| Line::new(&format!("E{}'", i), &a[(i + 1) % 3], &b[i])).collect();
    lines_prime.extend((3..6).map(|i| Line::new(&format!("E{}'", i), &c[i % 3], &d[i % 3])));
    let auxiliary = vec![
        Line::new("l01", &a[1], &b[0]),
        Line::new("C0", &a[1], &b[2]),
        Line::new("C1", &a[2], &b[0]),
    ];
    let contraction = RationalMap::new(
        vec![a[1].mul(&a[2]).map_coeffs(|x| x.scale(&xi)), b[0].mul(&b[2]), a[1].mul(&b[0])],
        4,
        nvars,
    )?;
    let k = Tower::base(nvars);
    let rho = RationalMap::new(
        vec![Form::var(0, Elem::zeta(&k)), var(&k, 1), var(&k, 2), var(&k, 3)],
        4,
        nvars,
    )?;
    let arr = |v: Vec<Form>| -> [Form; 3] { v.try_into().unwrap() };
    Ok(SmoothCubicModel {
        lambda: lambda.clone(),
        mu: mu.clone(),
        nu: nu.clone(),
        xi,
        l,
        lhat,
        equation,
        a: arr(a),
        b: arr(b),
        c: arr(c),
        d: arr(d),
        lines,
        lines_prime,
        auxiliary,
        contraction,
        rho,
        surface,
    })
}

fn identity_fails(check: &str, residue: impl Into<String>) -> Error {
    Error::IdentityFails { check: check.into(), residue: residue.into() }
}

/// Lines on X and disjoint, equivariance of the contraction, the orbit structure and
/// the incidence table. Returns the names of the checks.
pub fn verify_smooth_model(m: &SmoothCubicModel) -> Result<Vec<String>> {
    let t = &m.lhat;
    let mut done = Vec::new();
    for l in m.lines.iter().chain(&m.lines_prime).chain(&m.auxiliary) {
        if !line_on_surface(l, &m.equation, t) {
            return Err(identity_fails("lines lie on X", l.name.clone()));
        }
    }
    done.push("lines lie on X".to_string());
    for (set, label) in [(&m.lines, "E₀..E₅ pairwise disjoint"), (&m.lines_prime, "E₀′..E₅′ pairwise disjoint")] {
        for i in 0..6 {
            for j in i + 1..6 {
                if lines_meet(&set[i], &set[j], t) {
                    return Err(identity_fails(label, format!("{} meets {}", set[i].name, set[j].name)));
                }
            }
        }
        done.push(label.to_string());
    }
    // the forms of ρ(E′ᵢ) cut out Eᵢ: E′ᵢ = ρ⁻¹(Eᵢ)
    for (e, ep) in m.lines.iter().zip(&m.lines_prime) {
        let moved = Line { name: ep.name.clone(), forms: [compose_rho_inv(&ep.forms[0], t), compose_rho_inv(&ep.forms[1], t)] };
        if !same_line(&moved, e, t) {
            return Err(identity_fails("E′ᵢ = ρ⁻¹(Eᵢ)", ep.name.clone()));
        }
    }
    done.push("E′ᵢ = ρ⁻¹(Eᵢ)".to_string());
    let (g, h) = (vec![1u8, 0], vec![0u8, 1]);
    let image = |e: &[u8], i: usize| -> usize {
        match (e[0], i) {
            (1, i) if i < 3 => (i + 1) % 3,
            (0, i) if i >= 3 => 3 + (i - 2) % 3,
            (_, i) => i,
        }
    };
    for e in [&g, &h] {
        for i in 0..6 {
            let moved = act_line(e, t, &m.lines[i]);
            if !same_line(&moved, &m.lines[image(e, i)], t) {
                return Err(identity_fails("orbits {E₀,E₁,E₂} and {E₃,E₄,E₅}", m.lines[i].name.clone()));
            }
        }
    }
    done.push("orbits {E₀,E₁,E₂} and {E₃,E₄,E₅} under ⟨g,h⟩".to_string());
    let inc = m.incidence();
    if inc != EXPECTED_INCIDENCE {
        return Err(identity_fails("incidence table", format!("{:?}", inc)));
    }
    done.push("incidence of ℓ₀₁, 𝒞₀, 𝒞₁ with E₀..E₅".to_string());
    let f = m.contraction.embed(t);
    let wcube = m.wcube();
    equivariant_on_cubic("contraction = g̃∘contraction∘g⁻¹", &f, &g, &m.xi, &wcube)?;
    done.push("contraction = g̃∘contraction∘g⁻¹ with g̃ the twist by ξ".to_string());
    // E₀, E₁, E₂ go to the coordinate points
    for i in 0..3 {
        let img = contracted_image(&f, &m.lines[i], t)?;
        let mut unit = vec![Elem::zero(t); 3];
        unit[i] = Elem::one(t);
        if normalize_point(&img) != unit {
            return Err(identity_fails("E₀, E₁, E₂ contract to the coordinate points", m.lines[i].name.clone()));
        }
    }
    done.push("E₀, E₁, E₂ contract to the coordinate points".to_string());
    Ok(done)
}

/// p∘ρᵏ for a form p: w ↦ ζᵏw.
fn compose_rho(p: &Form, t: &Arc<Tower>, k: i64) -> Form {
    let z = Elem::zeta(t).pow(k).unwrap();
    Form::from_terms(
        p.terms
            .iter()
            .map(|(m, c)| (*m, c.embed(t).unwrap().mul(&z.pow(m.0[0] as i64).unwrap())))
            .collect(),
    )
}

fn compose_rho_inv(p: &Form, t: &Arc<Tower>) -> Form {
    compose_rho(p, t, 2)
}

/// The plane line or conic swept out by f on a line of P³; `None` if f contracts it.
fn image_curve(f: &RationalMap, l: &Line, t: &Arc<Tower>) -> Option<Form> {
    let pts = l.points(t);
    let param: Vec<Form> = (0..4)
        .map(|i| Form::var(0, pts[0][i].clone()).add(&Form::var(1, pts[1][i].clone())))
        .collect();
    let q: Vec<Form> = f.embed(t).coords.iter().map(|c| c.compose(&param)).collect();
    for e in 1..=2u32 {
        let monos = crate::galois::monomials(e);
        let images: Vec<Form> = monos.iter().map(|m| Form::monomial(*m, Elem::one(t)).compose(&q)).collect();
        let deg = e as u16 * f.degree() as u16;
        let rows: Mat<Elem> = (0..=deg)
            .map(|a| {
                let b = Mono::from_exps(&[a, deg - a]);
                images.iter().map(|p| p.coeff(&b).cloned().unwrap_or_else(|| Elem::zero(t))).collect()
            })
            .collect();
        let ker = kernel(&rows, monos.len(), &Elem::zero(t));
        match ker.len() {
            0 => continue,
            1 => {
                return Some(Form::from_terms(
                    monos.iter().zip(&ker[0]).filter(|(_, c)| !c.is_zero()).map(|(m, c)| (*m, c.clone())).collect(),
                ))
            }
            _ => return None,
        }
    }
    None
}

/// The point a line is contracted to.
fn contracted_image(f: &RationalMap, l: &Line, t: &Arc<Tower>) -> Result<Vec<Elem>> {
    let pts = l.points(t);
    let f = f.embed(t);
    for k in 1..8 {
        let p: Vec<Elem> = (0..4).map(|i| pts[0][i].add(&pts[1][i].mul(&Elem::from_int(t, k)))).collect();
        let img = f.eval(&p);
        if img.iter().any(|x| !x.is_zero()) {
            return Ok(img);
        }
    }
    Err(identity_fails("contracted image", l.name.clone()))
}

fn det3_forms(m: &[Vec<Form>]) -> Form {
    let t = |i: usize, j: usize, k: usize| m[0][i].mul(&m[1][j]).mul(&m[2][k]);
    t(0, 1, 2).add(&t(1, 2, 0)).add(&t(2, 0, 1)).sub(&t(2, 1, 0)).sub(&t(0, 2, 1)).sub(&t(1, 0, 2))
}

/// The common zero of three linear forms of P³ whose coefficients are forms in a, b, c:
/// the signed maximal minors.
fn meet_point(rows: &[Vec<Form>]) -> Vec<Form> {
    (0..4)
        .map(|k| {
            let minor: Vec<Vec<Form>> = rows.iter().map(|r| (0..4).filter(|&j| j != k).map(|j| r[j].clone()).collect()).collect();
            let d = det3_forms(&minor);
            if k % 2 == 0 {
                d
            } else {
                d.neg()
            }
        })
        .collect()
}

/// A section of the contraction over the plane [a : b : c].
///
/// The fibre over [a:b:c] lies on the line {c·ξA₂ = a·B₀, c·B₂ = b·A₁}, which meets X in
/// r₁ ∈ 𝒞₀ (A₁ = 0), r₂ ∈ 𝒞₁ (B₀ = 0) and the wanted point. On s·r₁ + u·r₂ the cubic is
/// s·u·(αs + βu), so the third point is β·r₁ − α·r₂.
pub fn contraction_section(m: &SmoothCubicModel) -> Result<RationalMap> {
    let t = &m.l;
    let nv = t.nvars;
    let constant_row = |f: &Form| -> Vec<Form> { linear_coeffs(f, t).into_iter().map(Form::constant).collect() };
    let plane = |i: usize| var(t, i);
    let xi = Elem::from_k(t, m.xi.clone());
    // c·ξA₂ − a·B₀ and c·B₂ − b·A₁
    let row3 = |u: &Form, uf: &Form, v: &Form, vf: &Form| -> Vec<Form> {
        let (uc, vc) = (linear_coeffs(uf, t), linear_coeffs(vf, t));
        (0..4).map(|k| u.scale(&uc[k]).sub(&v.scale(&vc[k]))).collect()
    };
    let xa2 = m.a[2].scale(&xi);
    let r1 = meet_point(&[constant_row(&m.a[1]), constant_row(&m.b[2]), row3(&plane(2), &xa2, &plane(0), &m.b[0])]);
    let r2 = meet_point(&[constant_row(&m.b[0]), constant_row(&m.a[2]), row3(&plane(2), &m.b[2], &plane(1), &m.a[1])]);
    let eq = embed_form(&m.equation, &m.lhat);
    let lift = |v: &[Form]| -> Vec<Form> { v.iter().map(|f| embed_form(f, &m.lhat)).collect() };
    let (r1h, r2h) = (lift(&r1), lift(&r2));
    if !eq.compose(&r1h).is_zero() || !eq.compose(&r2h).is_zero() {
        return Err(Error::SectionNotFound);
    }
    let plus: Vec<Form> = r1h.iter().zip(&r2h).map(|(p, q)| p.add(q)).collect();
    let minus: Vec<Form> = r1h.iter().zip(&r2h).map(|(p, q)| p.sub(q)).collect();
    let (gp, gm) = (eq.compose(&plus), eq.compose(&minus));
    // up to the factor 2: α = G(r₁+r₂) − G(r₁−r₂), β = G(r₁+r₂) + G(r₁−r₂)
    let (alpha, beta) = (gp.sub(&gm), gp.add(&gm));
    if alpha.is_zero() && beta.is_zero() {
        return Err(Error::SectionNotFound);
    }
    let coords: Vec<Form> = r1h.iter().zip(&r2h).map(|(p, q)| beta.mul(p).sub(&alpha.mul(q))).collect();
    let s = RationalMap::new(coords, 3, nv).map_err(|_| Error::SectionNotFound)?;
    let s = reduce(&s)?;
    // the section lands on X and inverts the contraction
    if s.coords.iter().all(|c| c.is_zero()) || !eq.compose(&s.embed(&m.lhat).coords).is_zero() {
        return Err(Error::SectionNotFound);
    }
    if !is_inverse_pair(&m.contraction, &s) {
        return Err(Error::SectionNotFound);
    }
    Ok(s)
}

/// ρ̂ = π∘ρ∘π⁻¹ with its decomposition into two 3-links.
#[derive(Clone, Debug)]
pub struct Order3 {
    pub rho_hat: TwistedMap,
    pub section: RationalMap,
    pub chi1: Link,
    pub chi2: Link,
}

/// ρ̂ as a plane map, χ₁ blowing up the image of {E₀,E₁,E₂} (splitting field K[∛λ]) and
/// χ₂ blowing up the image of {E₃,E₄,E₅} on the intermediate surface (splitting field
/// K[∛μ]), normalized so that ρ̂ = χ₂∘χ₁.
pub fn order3_selfmap(m: &SmoothCubicModel) -> Result<Order3> {
    let s = &m.surface;
    let section = contraction_section(m)?;
    let raw = compose_raw(&m.contraction, &compose_raw(&m.rho, &section)?)?;
    // the fixed part comes from the lines ρ⁻¹(ℓ₀₁), ρ⁻¹(𝒞₀), ρ⁻¹(𝒞₁) where f∘ρ is undefined
    let factors: Vec<Form> = m
        .auxiliary
        .iter()
        .filter_map(|l| {
            let moved = Line { name: l.name.clone(), forms: [compose_rho(&l.forms[0], &m.l, 1), compose_rho(&l.forms[1], &m.l, 1)] };
            image_curve(&m.contraction, &moved, &m.l)
        })
        .collect();
    let rho_hat = reduce(&divide_out(&raw, &factors))?;
    if !is_equivariant(&rho_hat, s, s) {
        return Err(identity_fails("ρ̂ is defined over K", rho_hat.to_string()));
    }
    let chi1 = link_from_3point(s, &coordinate_point(s))?;
    let mid = chi1.forward.target.clone();
    // π′ = χ₁∘π sends E₃, E₄, E₅ to the base point of χ₂
    let t = &m.lhat;
    let f1 = chi1.forward.map.embed(t);
    let comps = m.lines[3..]
        .iter()
        .map(|l| {
            let p: Vec<Elem> = contracted_image(&m.contraction, l, t)?.iter().map(|x| x.embed(&f1.tower).unwrap()).collect();
            Ok(normalize_point(&f1.eval(&p)))
        })
        .collect::<Result<Vec<_>>>()?;
    let q = make_closed_point(&mid, &comps)?;
    let raw2 = link_from_3point(&mid, &q)?;
    let chi2 = align_link(&raw2, &chi1, &rho_hat)?;
    if !equals(&compose_raw(&chi2.forward.map, &chi1.forward.map)?, &rho_hat) {
        return Err(identity_fails("ρ̂ = χ₂∘χ₁", "maps differ".to_string()));
    }
    // ρ̂³ = id iff ρ̂∘ρ̂ = ρ̂⁻¹ = χ₁⁻¹∘χ₂⁻¹
    let inverse = compose_raw(&chi1.backward.map, &chi2.backward.map)?;
    if !equals(&compose_raw(&rho_hat, &rho_hat)?, &inverse) {
        return Err(identity_fails("ρ̂³ = id", rho_hat.to_string()));
    }
    let lam_field = Descriptor::of_tower(&m.l);
    let mu_field = Descriptor::of_tower(&*Tower::base(t.nvars).extend("m", 3, m.mu.clone())?);
    if chi1.base_point.splitting != lam_field || chi2.base_point.splitting != mu_field {
        return Err(identity_fails(
            "splitting fields K[∛λ], K[∛μ]",
            format!("{}, {}", chi1.base_point.splitting, chi2.base_point.splitting),
        ));
    }
    Ok(Order3 { rho_hat: TwistedMap { map: rho_hat, source: s.clone(), target: s.clone() }, section, chi1, chi2 })
}

/// Composes `link` with the automorphism α of its target for which α∘link∘first = target.
fn align_link(link: &Link, first: &Link, target: &RationalMap) -> Result<Link> {
    let t = Tower::compositum(&Tower::compositum(&link.forward.map.tower, &first.forward.map.tower), &target.tower);
    let mut rng = crate::tower::seeded_rng(17);
    use rand::Rng;
    for _ in 0..16 {
        let ps: Vec<Vec<Elem>> = (0..4).map(|_| (0..3).map(|_| Elem::from_int(&t, rng.gen_range(-9..=9))).collect()).collect();
        let us: Vec<Vec<Elem>> = ps.iter().map(|p| link.forward.map.eval(&first.forward.map.eval(p))).collect();
        let vs: Vec<Vec<Elem>> = ps.iter().map(|p| target.eval(p)).collect();
        if us.iter().chain(&vs).any(|v| v.iter().all(|x| x.is_zero())) {
            continue;
        }
        let Some(alpha) = frame_map(&us, &vs) else { continue };
        let forward = link.forward.map.then_matrix(&alpha).normalized();
        let backward = compose_raw(&link.backward.map, &RationalMap::from_matrix(&adj3(&alpha)))?.normalized();
        let inv_comps: Vec<Vec<Elem>> = link
            .inverse_base_point
            .components
            .iter()
            .map(|c| {
                let tt = Tower::compositum(&alpha[0][0].tower, &c[0].tower);
                let a: Mat<Elem> = alpha.iter().map(|r| r.iter().map(|x| x.embed(&tt).unwrap()).collect()).collect();
                let c: Vec<Elem> = c.iter().map(|x| x.embed(&tt).unwrap()).collect();
                normalize_point(&crate::linalg::mat_vec(&a, &c))
            })
            .collect();
        let inverse_base_point: ClosedPoint = make_closed_point(&link.forward.target, &inv_comps)?;
        let out = Link {
            forward: TwistedMap { map: forward, ..link.forward.clone() },
            backward: TwistedMap { map: backward, ..link.backward.clone() },
            base_point: link.base_point.clone(),
            inverse_base_point,
            degree_class: link.degree_class,
            condition_rank: link.condition_rank,
        };
        out.verify()?;
        return Ok(out);
    }
    Err(identity_fails("alignment of the second link", "no frame found".to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(i: usize) -> RatFun {
        RatFun::var(i)
    }

    fn smooth() -> SmoothCubicModel {
        let mu = t(1).sub(&RatFun::one()).div(&t(0).mul(&RatFun::from_int(27))).unwrap();
        build_smooth_model(&t(0), &mu, &RatFun::one(), 2).unwrap()
    }

    #[test]
    fn singular_model_identities() {
        let m = build_singular_model(&t(0), &t(1), 2).unwrap();
        assert_eq!(m.singular_points.len(), 3);
        assert_eq!(verify_singular_model(&m).unwrap().len(), 3);
    }

    #[test]
    fn singular_model_equation_is_the_fibration() {
        let m = build_singular_model(&t(0), &t(1), 2).unwrap();
        assert_eq!(format_form(&m.equation, &NAMES), "t2*w^3 - t1*x^3 + 3*x*y*z - y^3 + ((-1)/(t1))*z^3");
    }

    #[test]
    fn cube_lambda_rejected() {
        assert_eq!(build_singular_model(&RatFun::from_int(8), &t(1), 2).unwrap_err(), Error::LambdaIsCube);
    }

    #[test]
    fn perturbed_factor_fails() {
        let mut m = build_singular_model(&t(0), &t(1), 2).unwrap();
        m.factors[1] = m.factors[1].add(&var(&m.tower, 1));
        assert!(matches!(verify_singular_model(&m), Err(Error::IdentityFails { .. })));
    }

    #[test]
    fn smooth_model_checks() {
        let m = smooth();
        assert_eq!(m.xi, t(1));
        assert_eq!(m.incidence(), EXPECTED_INCIDENCE);
        verify_smooth_model(&m).unwrap();
    }

    #[test]
    fn first_lines_are_disjoint() {
        let m = smooth();
        assert!(!lines_meet(&m.lines[0], &m.lines[1], &m.lhat));
        assert!(lines_meet(&m.auxiliary[0], &m.lines[0], &m.lhat));
    }

    #[test]
    fn xi_zero_and_dependent_radicands() {
        // 27·t1·μ + 1 = 0
        let mu = t(0).mul(&RatFun::from_int(-27)).inv().unwrap();
        assert_eq!(build_smooth_model(&t(0), &mu, &RatFun::one(), 2).unwrap_err(), Error::XiZero);
        assert!(matches!(build_smooth_model(&t(0), &t(0).pow(2), &RatFun::one(), 2), Err(Error::DegenerateTower(_))));
    }

    #[test]
    fn order3_decomposes() {
        let m = smooth();
        let o = order3_selfmap(&m).unwrap();
        assert_eq!(o.section.degree(), 3);
        assert_eq!(o.rho_hat.map.degree(), 4);
        assert!(o.rho_hat.map.over_base());
        assert_ne!(o.chi1.base_point.splitting, o.chi2.base_point.splitting);
        assert!(o.rho_hat.is_equivariant());
    }
}
