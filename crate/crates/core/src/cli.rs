//! The `sbk` command line: each subcommand runs named checks and prints one report per
//! check, as text or as one JSON object per line.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cubes::{check_norm_certificate, is_cube, is_norm, Answer};
use crate::cubic_models::{NAMES, build_singular_model, build_smooth_model, order3_selfmap, verify_singular_model, verify_smooth_model};
use crate::error::{Error, Result};
use crate::expr::{format_form, parse_k};
use crate::genus::{covgen_from_min_degree, covgen_lower_bound};
use crate::json::{elem_to_json, map_to_json};
use crate::maps::{is_equivariant, link_from_3point, link_from_6point, Link, RationalMap};
use crate::ratfun::RatFun;
use crate::scalar::Scalar;
use crate::severi_brauer::{
    coordinate_point, cyclic_extension, is_isomorphic, make_closed_point, make_surface, opposite, orbit, second_3point,
    sixpoint_from_sqrt, ClosedPoint, Surface,
};
use crate::tower::{seeded_rng, Elem, Tower};
use crate::words::{class_of_point, hexagon, project_basepoint, psi_compose, ChainItem};

pub const EXIT_FAIL: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_PARSE: i32 = 65;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub params: BTreeMap<String, String>,
    pub status: Status,
    pub payload: Value,
    /// Seconds.
    pub elapsed: f64,
}

#[derive(Parser, Debug)]
#[command(name = "sbk", version, about = "Checks on Severi-Brauer surfaces over radical towers of Q(zeta)(t1, ..., tn)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// One JSON object per line instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Number of transcendentals t1..tn.
    #[arg(long = "n-vars", global = true, default_value_t = 2)]
    n_vars: usize,
}

#[derive(Args, Debug)]
struct SurfaceArgs {
    #[arg(long, default_value = "t1")]
    lambda: String,
    #[arg(long, default_value = "t2")]
    xi: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Is ξ a norm from K[∛λ]?
    NormTest(SurfaceArgs),
    /// The cocycle condition, for ξ or for random monomials ξ when --xi is absent.
    Cocycle {
        #[arg(long, default_value = "t1")]
        lambda: String,
        #[arg(long)]
        xi: Option<String>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// σ conjugates S_ξ to S_{1/ξ}; with --other, decide S_ξ ≅ S_other.
    SurfaceIso {
        #[command(flatten)]
        s: SurfaceArgs,
        #[arg(long)]
        other: Option<String>,
    },
    /// Degree-3 points (and a degree-6 point with --alpha) and their splitting fields.
    Point {
        #[command(flatten)]
        s: SurfaceArgs,
        #[arg(long)]
        alpha: Option<String>,
    },
    /// The link blowing up a degree-3 point: `coordinate`, `second` or `a,b,c`.
    Link3 {
        #[command(flatten)]
        s: SurfaceArgs,
        #[arg(long, default_value = "coordinate")]
        point: String,
    },
    /// The link blowing up the degree-6 point built from √α.
    Link6 {
        #[command(flatten)]
        s: SurfaceArgs,
        #[arg(long, default_value = "t2")]
        alpha: String,
    },
    /// The six-link relation between two degree-3 points.
    Hexagon {
        #[command(flatten)]
        s: SurfaceArgs,
        #[arg(long, default_value = "coordinate")]
        p: String,
        #[arg(long, default_value = "1,2,3")]
        q: String,
    },
    /// Identities of the singular cubic model.
    ModelSingular(SurfaceArgs),
    /// Identities of the smooth cubic model.
    ModelSmooth(SmoothArgs),
    /// The order-3 birational map and its decomposition into two links.
    Order3(SmoothArgs),
    /// Ψ of a chain of links, e.g. `p,q^-1`, where p and q blow up the coordinate and
    /// the second degree-3 point.
    Psi {
        #[command(flatten)]
        s: SurfaceArgs,
        #[arg(long, default_value = "p,q^-1")]
        chain: String,
    },
    /// Covering-genus lower bounds: --m --d --n, or --a.
    Bound {
        #[arg(long)]
        m: Option<i64>,
        #[arg(long)]
        d: Option<i64>,
        #[arg(long)]
        n: Option<i64>,
        #[arg(long)]
        a: Option<i64>,
    },
}

#[derive(Args, Debug)]
struct SmoothArgs {
    #[arg(long, default_value = "t1")]
    lambda: String,
    #[arg(long, default_value = "(t2 - 1)/(27*t1)")]
    mu: String,
    #[arg(long, default_value = "1")]
    nu: String,
}

struct Ctx {
    n: usize,
    params: BTreeMap<String, String>,
    reports: Vec<Report>,
}

/// Errors that abort the run rather than fail a check.
enum Abort {
    Usage(String),
    Parse(String),
}

impl Ctx {
    fn k(&mut self, name: &str, s: &str) -> std::result::Result<RatFun, Abort> {
        self.params.insert(name.to_string(), s.to_string());
        parse_k(s, self.n).map_err(|e| Abort::Parse(format!("--{}: {}", name, e)))
    }

    /// Runs one check; library errors become failed reports.
    fn check(&mut self, name: &str, f: impl FnOnce() -> Result<(Status, Value)>) {
        let start = Instant::now();
        let (status, payload) = match f() {
            Ok(r) => r,
            Err(e) => (Status::Fail, json!({"error": e.to_string()})),
        };
        self.reports.push(Report {
            check: name.to_string(),
            params: self.params.clone(),
            status,
            payload,
            elapsed: start.elapsed().as_secs_f64(),
        });
    }
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn surface(n: usize, lambda: &RatFun, xi: &RatFun) -> Result<Surface> {
    if is_cube(lambda).is_yes() {
        return Err(Error::LambdaIsCube);
    }
    let (l, g) = cyclic_extension(n, lambda, "l");
    make_surface(&l, &g, xi)
}

fn k_point(s: &Surface, arg: &str, n: usize) -> std::result::Result<Result<ClosedPoint>, Abort> {
    Ok(match arg {
        "coordinate" => Ok(coordinate_point(s)),
        "second" => second_3point(s),
        _ => {
            let parts: Vec<&str> = arg.split(',').collect();
            if parts.len() != 3 {
                return Err(Abort::Usage(format!("a point is `coordinate`, `second` or `a,b,c`, got `{}`", arg)));
            }
            let t = Tower::base(n);
            let mut c = Vec::new();
            for p in parts {
                c.push(Elem::from_k(&t, parse_k(p, n).map_err(|e| Abort::Parse(e.to_string()))?));
            }
            make_closed_point(s, &orbit(s, &c))
        }
    })
}

fn link_payload(l: &Link) -> Value {
    json!({
        "forward_degree": l.forward.map.degree(),
        "backward_degree": l.backward.map.degree(),
        "base_point": l.base_point.splitting.to_string(),
        "inverse_base_point": l.inverse_base_point.splitting.to_string(),
        "condition_rank": l.condition_rank,
        "forward": l.forward.map.to_string(),
    })
}

fn random_monomial(rng: &mut impl Rng, n: usize) -> RatFun {
    let mut r = RatFun::from_scalar(Scalar::from_ratio(rng.gen_range(1..=9) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=5)));
    for i in 0..n {
        r = r.mul(&RatFun::var(i).pow(rng.gen_range(-2..=3)));
    }
    r
}

fn dispatch(cli: Cli, cx: &mut Ctx) -> std::result::Result<(), Abort> {
    let n = cli.n_vars;
    match cli.command {
        Command::NormTest(a) => {
            let (lambda, xi) = (cx.k("lambda", &a.lambda)?, cx.k("xi", &a.xi)?);
            cx.check("norm-test", || {
                let s = surface(n, &lambda, &RatFun::one())?;
                Ok(match is_norm(&s.l, &xi) {
                    Answer::Yes(w) => (Status::Pass, json!({"answer": "yes", "witness": elem_to_json(&w)})),
                    Answer::No(c) => {
                        let ok = check_norm_certificate(&s.l, &xi, &c);
                        (pass_if(ok), json!({"answer": "no", "certificate": c.to_string(), "recheck": ok}))
                    }
                    Answer::Unknown => (Status::Unknown, json!({"answer": "unknown"})),
                })
            });
        }
        Command::Cocycle { lambda, xi, samples } => {
            let lambda = cx.k("lambda", &lambda)?;
            match xi {
                Some(x) => {
                    let xi = cx.k("xi", &x)?;
                    cx.check("cocycle", || {
                        let s = surface(n, &lambda, &xi)?;
                        Ok((pass_if(s.cocycle_is_scalar()), json!({"product": format!("{:?}", s.cocycle_product()[0][0])})))
                    });
                }
                None => {
                    cx.params.insert("samples".into(), samples.to_string());
                    cx.check("cocycle-random", || {
                        let mut rng = seeded_rng(1);
                        let mut failed = Vec::new();
                        for _ in 0..samples {
                            let xi = random_monomial(&mut rng, n);
                            if !surface(n, &lambda, &xi)?.cocycle_is_scalar() {
                                failed.push(xi.to_string());
                            }
                        }
                        Ok((pass_if(failed.is_empty()), json!({"samples": samples, "failed": failed})))
                    });
                }
            }
        }
        Command::SurfaceIso { s: a, other } => {
            let (lambda, xi) = (cx.k("lambda", &a.lambda)?, cx.k("xi", &a.xi)?);
            let other = other.map(|o| cx.k("other", &o)).transpose()?;
            cx.check("surface-iso/opposite-conjugation", || {
                let s = surface(n, &lambda, &xi)?;
                let ok = is_equivariant(&RationalMap::sigma(&s.l), &s, &opposite(&s));
                Ok((pass_if(ok), json!({"sigma_equivariant": ok})))
            });
            if let Some(o) = other {
                cx.check("surface-iso/isomorphic", || {
                    let (s, t) = (surface(n, &lambda, &xi)?, surface(n, &lambda, &o)?);
                    Ok(match is_isomorphic(&s, &t)? {
                        Answer::Yes(w) => (Status::Pass, json!({"answer": "yes", "witness": elem_to_json(&w)})),
                        Answer::No(c) => (Status::Pass, json!({"answer": "no", "certificate": c.to_string()})),
                        Answer::Unknown => (Status::Unknown, json!({"answer": "unknown"})),
                    })
                });
            }
        }
        Command::Point { s: a, alpha } => {
            let (lambda, xi) = (cx.k("lambda", &a.lambda)?, cx.k("xi", &a.xi)?);
            let alpha = alpha.map(|x| cx.k("alpha", &x)).transpose()?;
            let describe = |p: &ClosedPoint| json!({"degree": p.degree(), "splitting": p.splitting.to_string()});
            cx.check("point/coordinate", || {
                let p = coordinate_point(&surface(n, &lambda, &xi)?);
                Ok((pass_if(p.degree() == 3), describe(&p)))
            });
            cx.check("point/second", || {
                let s = surface(n, &lambda, &xi)?;
                let (p, q) = (coordinate_point(&s), second_3point(&s)?);
                Ok((pass_if(q.degree() == 3 && q.splitting != p.splitting), describe(&q)))
            });
            if let Some(alpha) = alpha {
                cx.check("point/six", || {
                    let p = sixpoint_from_sqrt(&surface(n, &lambda, &xi)?, &alpha)?;
                    let c = class_of_point(&p)?;
                    Ok((pass_if(p.degree() == 6), json!({"degree": 6, "splitting": p.splitting.to_string(), "invariant_only": c.invariant_only})))
                });
            }
        }
        Command::Link3 { s: a, point } => {
            let (lambda, xi) = (cx.k("lambda", &a.lambda)?, cx.k("xi", &a.xi)?);
            cx.params.insert("point".into(), point.clone());
            let s = surface(n, &lambda, &xi);
            let p = match &s {
                Ok(s) => Some(k_point(s, &point, n)?),
                Err(_) => None,
            };
            cx.check("link3", || {
                let s = s?;
                let l = link_from_3point(&s, &p.expect("surface built")?)?;
                l.verify()?;
                Ok((pass_if(l.forward.map.degree() == 2 && l.backward.map.degree() == 2), link_payload(&l)))
            });
        }
        Command::Link6 { s: a, alpha } => {
            let (lambda, xi, alpha) = (cx.k("lambda", &a.lambda)?, cx.k("xi", &a.xi)?, cx.k("alpha", &alpha)?);
            cx.check("link6", || {
                let s = surface(n, &lambda, &xi)?;
                let l = link_from_6point(&s, &sixpoint_from_sqrt(&s, &alpha)?)?;
                l.verify()?;
                Ok((pass_if(l.forward.map.degree() == 5 && l.condition_rank == 18), link_payload(&l)))
            });
        }
        Command::Hexagon { s: a, p, q } => {
            let (lambda, xi) = (cx.k("lambda", &a.lambda)?, cx.k("xi", &a.xi)?);
            cx.params.insert("p".into(), p.clone());
            cx.params.insert("q".into(), q.clone());
            let s = surface(n, &lambda, &xi);
            let pts = match &s {
                Ok(s) => Some((k_point(s, &p, n)?, k_point(s, &q, n)?)),
                Err(_) => None,
            };
            let mut h = None;
            cx.check("hexagon/composite-identity", || {
                let s = s?;
                let (p, q) = pts.expect("surface built");
                let hex = hexagon(&s, &p?, &q?)?;
                let out = (pass_if(hex.composite_is_identity), json!({"links": hex.links.len()}));
                h = Some(hex);
                Ok(out)
            });
            if let Some(h) = h {
                let ds: Vec<String> = h.descriptors.iter().map(|d| d.to_string()).collect();
                cx.check("hexagon/descriptor-pattern", || Ok((pass_if(h.pattern_holds), json!({"descriptors": ds}))));
                cx.check("hexagon/psi-empty", || Ok((pass_if(h.word.is_empty()), json!({"word": h.word}))));
            }
        }
        Command::ModelSingular(a) => {
            let (lambda, xi) = (cx.k("lambda", &a.lambda)?, cx.k("xi", &a.xi)?);
            cx.check("model-singular", || {
                let m = build_singular_model(&lambda, &xi, n)?;
                let done = verify_singular_model(&m)?;
                Ok((Status::Pass, json!({"identities": done, "equation": format_form(&m.equation, &NAMES)})))
            });
        }
        Command::ModelSmooth(a) => {
            let (lambda, mu, nu) = (cx.k("lambda", &a.lambda)?, cx.k("mu", &a.mu)?, cx.k("nu", &a.nu)?);
            cx.check("model-smooth", || {
                let m = build_smooth_model(&lambda, &mu, &nu, n)?;
                let done = verify_smooth_model(&m)?;
                Ok((Status::Pass, json!({"identities": done, "xi": m.xi.to_string(), "incidence": m.incidence()})))
            });
        }
        Command::Order3(a) => {
            let (lambda, mu, nu) = (cx.k("lambda", &a.lambda)?, cx.k("mu", &a.mu)?, cx.k("nu", &a.nu)?);
            cx.check("order3", || {
                let m = build_smooth_model(&lambda, &mu, &nu, n)?;
                let o = order3_selfmap(&m)?;
                Ok((
                    Status::Pass,
                    json!({
                        "rho_hat": map_to_json(&o.rho_hat.map),
                        "degree": o.rho_hat.map.degree(),
                        "chi1": o.chi1.base_point.splitting.to_string(),
                        "chi2": o.chi2.base_point.splitting.to_string(),
                    }),
                ))
            });
        }
        Command::Psi { s: a, chain } => {
            let (lambda, xi) = (cx.k("lambda", &a.lambda)?, cx.k("xi", &a.xi)?);
            cx.params.insert("chain".into(), chain.clone());
            let mut items = Vec::new();
            for tok in chain.split(',').map(str::trim) {
                let (name, inv) = match tok.strip_suffix("^-1") {
                    Some(b) => (b, true),
                    None => (tok, false),
                };
                if name != "p" && name != "q" {
                    return Err(Abort::Usage(format!("chain items are p, q, p^-1, q^-1; got `{}`", tok)));
                }
                items.push((name == "p", inv));
            }
            cx.check("psi", || {
                let s = surface(n, &lambda, &xi)?;
                let (cp, cq) = (coordinate_point(&s), second_3point(&s)?);
                let (lp, lq) = (link_from_3point(&s, &cp)?, link_from_3point(&s, &cq)?);
                let chain: Vec<ChainItem> = items
                    .iter()
                    .map(|&(is_p, inv)| {
                        let l = if is_p { &lp } else { &lq };
                        ChainItem::Link(if inv { l.inverse() } else { l.clone() })
                    })
                    .collect();
                let w = psi_compose(&chain, &s)?;
                let projected = project_basepoint(&w, &class_of_point(&cp)?);
                Ok((Status::Pass, json!({"word": w, "projected": projected, "text": w.to_string()})))
            });
        }
        Command::Bound { m, d, n: dim, a } => {
            match (m, d, dim, a) {
                (Some(m), Some(d), Some(dim), None) => {
                    cx.params.extend([("m".into(), m.to_string()), ("d".into(), d.to_string()), ("n".into(), dim.to_string())]);
                    cx.check("bound", || {
                        let b = covgen_lower_bound(m, d, dim)?;
                        Ok((Status::Pass, json!({"e": b.params.e, "bound": b.bound.to_string()})))
                    });
                }
                (None, None, None, Some(a)) => {
                    cx.params.insert("a".into(), a.to_string());
                    cx.check("bound", || Ok((Status::Pass, json!({"bound": covgen_from_min_degree(a)?.to_string()}))));
                }
                _ => return Err(Abort::Usage("bound takes --m --d --n, or --a".into())),
            }
        }
    }
    Ok(())
}

fn summary(r: &Report) -> String {
    match &r.payload {
        Value::Object(o) => o
            .iter()
            .filter(|(k, _)| !matches!(k.as_str(), "forward" | "rho_hat" | "witness"))
            .map(|(k, v)| format!("{}={}", k, v))
            .collect::<Vec<_>>()
            .join(" "),
        v => v.to_string(),
    }
}

/// Runs the command line `args` (program name first), writing reports to `out`, and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let json_out = cli.json;
    let mut cx = Ctx { n: cli.n_vars, params: BTreeMap::new(), reports: Vec::new() };
    if cli.n_vars == 0 || cli.n_vars > 8 {
        eprintln!("--n-vars must be between 1 and 8");
        return EXIT_USAGE;
    }
    match dispatch(cli, &mut cx) {
        Ok(()) => {}
        Err(Abort::Usage(m)) => {
            eprintln!("usage error: {}", m);
            return EXIT_USAGE;
        }
        Err(Abort::Parse(m)) => {
            eprintln!("parse error: {}", m);
            return EXIT_PARSE;
        }
    }
    cx.reports.sort_by(|a, b| a.check.cmp(&b.check));
    for r in &cx.reports {
        let line = if json_out {
            serde_json::to_string(r).expect("serializable")
        } else {
            let tag = match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Unknown => "UNKNOWN",
            };
            format!("{:<8}{}  ({:.2}s)  {}", tag, r.check, r.elapsed, summary(r))
        };
        let _ = writeln!(out, "{}", line);
    }
    if cx.reports.iter().any(|r| r.status == Status::Fail) {
        EXIT_FAIL
    } else if cx.reports.iter().any(|r| r.status == Status::Unknown) {
        EXIT_UNKNOWN
    } else {
        0
    }
}
