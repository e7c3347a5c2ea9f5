//! Element-expression parser and the `morava` command line.
//!
//! Expression grammar, evaluated in `O_n` with noncommutative left-to-right products:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := base ('^' uint)?
//! base   := int | int '/' int | 'w' | 'S' | '(' expr ')' | '-' base
//! ```
//!
//! Unary minus belongs to `base`, so `-S^2` reads as `(-S)^2`.

use std::ffi::OsString;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grlie::{
    abelianization_report, check_bracket_vs_group, check_power_vs_group, commutator_span, gr_bracket, gr_power, trace_kernel,
    GrElem, GrSubspace,
};
use crate::homalg::{cyclic_cohomology, g1_exact_sequence, iwasawa_cohomology, ZpModuleWithOperator};
use crate::k1::{e2_page, homotopy_table, ko_table, psi_valuation_report};
use crate::order::OrderElem;
use crate::padic::{bigint_to_json, IntMatrix, PadicInt, PadicParams};
use crate::stabilizer::{
    commutator, default_order_bound, element_order, filtration_level, in_k, reduced_norm_padic, s1_split, StabElem,
};
use crate::witt::{make_ring, FqElem, WittElem, WittRing};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementExpr {
    Int(BigInt),
    Frac(BigInt, BigInt),
    W,
    S,
    Neg(Box<ElementExpr>),
    Add(Box<ElementExpr>, Box<ElementExpr>),
    Sub(Box<ElementExpr>, Box<ElementExpr>),
    Mul(Box<ElementExpr>, Box<ElementExpr>),
    Pow(Box<ElementExpr>, u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    W,
    S,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(v) => format!("integer {v}"),
        Tok::W => "'w'".into(),
        Tok::S => "'S'".into(),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Caret => "'^'".into(),
        Tok::Slash => "'/'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::End => "end of input".into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let tok = match c {
            ' ' | '\t' | '\n' => {
                i += 1;
                continue;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                out.push((start, Tok::Int(digits.parse().expect("digits"))));
                continue;
            }
            'w' => Tok::W,
            'S' => Tok::S,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            other => return Err(Error::Syntax { pos: i, msg: format!("unexpected character '{other}'") }),
        };
        out.push((i, tok));
        i += 1;
    }
    out.push((chars.len(), Tok::End));
    Ok(out)
}

struct Parser_ {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser_ {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<ElementExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = ElementExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = ElementExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ElementExpr> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = ElementExpr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<ElementExpr> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        match self.bump() {
            Tok::Int(e) => match u64::try_from(&e) {
                Ok(e) => Ok(ElementExpr::Pow(Box::new(base), e)),
                Err(_) => self.fail("exponent too large"),
            },
            other => {
                self.at -= usize::from(other != Tok::End);
                self.fail(format!("expected a non-negative integer exponent, found {}", describe(&other)))
            }
        }
    }

    fn base(&mut self) -> Result<ElementExpr> {
        match self.bump() {
            Tok::Int(a) => {
                if *self.peek() != Tok::Slash {
                    return Ok(ElementExpr::Int(a));
                }
                self.bump();
                match self.bump() {
                    Tok::Int(b) => Ok(ElementExpr::Frac(a, b)),
                    other => {
                        self.at -= usize::from(other != Tok::End);
                        self.fail(format!("expected an integer denominator, found {}", describe(&other)))
                    }
                }
            }
            Tok::W => Ok(ElementExpr::W),
            Tok::S => Ok(ElementExpr::S),
            Tok::Minus => Ok(ElementExpr::Neg(Box::new(self.base()?))),
            Tok::LParen => {
                let e = self.expr()?;
                match self.bump() {
                    Tok::RParen => Ok(e),
                    other => {
                        self.at -= usize::from(other != Tok::End);
                        self.fail(format!("expected ')', found {}", describe(&other)))
                    }
                }
            }
            other => {
                self.at -= usize::from(other != Tok::End);
                self.fail(format!("unexpected {}", describe(&other)))
            }
        }
    }
}

pub fn parse_expr(src: &str) -> Result<ElementExpr> {
    let mut p = Parser_ { toks: tokenize(src)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(format!("unexpected {}", describe(p.peek())));
    }
    Ok(e)
}

fn frac(params: &PadicParams, a: &BigInt, b: &BigInt) -> Result<BigInt> {
    if b.is_zero() || !params.is_unit(b) {
        return Err(Error::NonUnit(format!("denominator {b} is not a {}-adic unit", params.p())));
    }
    Ok(params.reduce(&(a * params.inverse(b)?)))
}

pub fn eval(e: &ElementExpr, ring: &Arc<WittRing>) -> Result<OrderElem> {
    Ok(match e {
        ElementExpr::Int(v) => OrderElem::from_int(ring, v.clone()),
        ElementExpr::Frac(a, b) => OrderElem::from_int(ring, frac(ring.params(), a, b)?),
        ElementExpr::W => OrderElem::omega(ring),
        ElementExpr::S => OrderElem::s(ring),
        ElementExpr::Neg(x) => eval(x, ring)?.negate(),
        ElementExpr::Add(a, b) => eval(a, ring)?.try_add(&eval(b, ring)?)?,
        ElementExpr::Sub(a, b) => eval(a, ring)?.try_sub(&eval(b, ring)?)?,
        ElementExpr::Mul(a, b) => eval(a, ring)?.order_mul(&eval(b, ring)?)?,
        ElementExpr::Pow(a, k) => eval(a, ring)?.pow(*k),
    })
}

/// Evaluates an expression without `w` or `S` in `Z_p`.
pub fn eval_padic(e: &ElementExpr, params: &Arc<PadicParams>) -> Result<PadicInt> {
    Ok(match e {
        ElementExpr::Int(v) => params.int(v.clone()),
        ElementExpr::Frac(a, b) => params.int(frac(params, a, b)?),
        ElementExpr::W | ElementExpr::S => {
            return Err(Error::InvalidInput("'w' and 'S' need a ring context (--n)".into()));
        }
        ElementExpr::Neg(x) => eval_padic(x, params)?.neg(),
        ElementExpr::Add(a, b) => eval_padic(a, params)?.add(&eval_padic(b, params)?),
        ElementExpr::Sub(a, b) => eval_padic(a, params)?.sub(&eval_padic(b, params)?),
        ElementExpr::Mul(a, b) => eval_padic(a, params)?.mul(&eval_padic(b, params)?),
        ElementExpr::Pow(a, k) => eval_padic(a, params)?.pow(*k),
    })
}

pub fn parse_element(src: &str, ring: &Arc<WittRing>) -> Result<OrderElem> {
    eval(&parse_expr(src)?, ring)
}

/// Parses an element of `W` (no `S`).
pub fn parse_witt(src: &str, ring: &Arc<WittRing>) -> Result<WittElem> {
    let x = parse_element(src, ring)?;
    if x.coeffs()[1..].iter().any(|c| !c.is_zero()) {
        return Err(Error::InvalidInput(format!("'{src}' is not in W (it involves S)")));
    }
    Ok(x.coeff(0).clone())
}

/// Parses a residue `ā ∈ F_q` written as an expression in `w`.
pub fn parse_residue(src: &str, ring: &Arc<WittRing>) -> Result<FqElem> {
    Ok(parse_witt(src, ring)?.residue())
}

/// `"a,b;c,d"` → 2×2 integer matrix.
pub fn parse_matrix(src: &str) -> Result<IntMatrix> {
    let mut offset = 0;
    let mut rows = Vec::new();
    for row in src.split(';') {
        let mut r = Vec::new();
        let mut col_off = offset;
        for entry in row.split(',') {
            let v: BigInt = entry
                .trim()
                .parse()
                .map_err(|_| Error::Syntax { pos: col_off, msg: format!("'{}' is not an integer", entry.trim()) })?;
            r.push(v);
            col_off += entry.len() + 1;
        }
        offset += row.len() + 1;
        rows.push(r);
    }
    Ok(rows)
}

#[derive(Parser, Debug)]
#[command(name = "morava", version, about = "Exact computations in Morava stabilizer groups and the K(1)-local sphere")]
pub struct Cli {
    /// The prime p
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Height n (degree of the residue field)
    #[arg(long, global = true, default_value_t = 1)]
    n: usize,
    /// Working precision M: p-adic precision p^M, order precision S^{nM}
    #[arg(long, global = true, default_value_t = 16)]
    prec: u32,
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Witt vector arithmetic in W(F_q)
    Witt {
        #[command(subcommand)]
        op: WittOp,
    },
    /// Arithmetic in the maximal order O_n
    Order {
        #[command(subcommand)]
        op: OrderOp,
    },
    /// The stabilizer group S_n
    Stab {
        #[command(subcommand)]
        op: StabOp,
    },
    /// The graded Lie algebra gr S_n
    Grlie {
        #[command(subcommand)]
        op: GrlieOp,
    },
    /// Cohomology of cyclic groups, Z_p and G_1
    Homalg {
        #[command(subcommand)]
        op: HomalgOp,
    },
    /// Homotopy of the K(1)-local sphere and KO
    K1 {
        #[command(subcommand)]
        op: K1Op,
    },
}

#[derive(Args, Debug)]
struct Elem {
    #[arg(allow_hyphen_values = true)]
    x: String,
}

#[derive(Args, Debug)]
struct Pair {
    #[arg(allow_hyphen_values = true)]
    x: String,
    #[arg(allow_hyphen_values = true)]
    y: String,
}

#[derive(Subcommand, Debug)]
enum WittOp {
    /// Trace W → Z_p
    Trace(Elem),
    /// σ^k(x)
    Frobenius {
        #[command(flatten)]
        e: Elem,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Teichmüller lift of the residue of x
    Teich(Elem),
}

#[derive(Subcommand, Debug)]
enum OrderOp {
    Mul(Pair),
    Inv(Elem),
    /// S-adic valuation
    Val(Elem),
    /// Teichmüller S-digits
    Digits {
        #[command(flatten)]
        e: Elem,
        #[arg(long)]
        count: Option<u32>,
    },
}

#[derive(Subcommand, Debug)]
enum StabOp {
    /// Order of x, searched up to a bound
    Order {
        #[command(flatten)]
        e: Elem,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Commutator x y x⁻¹ y⁻¹
    Comm(Pair),
    /// Filtration level v(x − 1)
    Level(Elem),
    /// Reduced norm
    Norm(Elem),
    /// x = x1 · z with N(x1) having trivial pro-p part
    Split(Elem),
    /// Membership in K ⊂ S_2^1 (p = 3, n = 2)
    #[command(name = "inK", alias = "in-k")]
    InK(Elem),
}

#[derive(Subcommand, Debug)]
enum GrlieOp {
    /// [ā, b̄] for ā at level k/n and b̄ at level l/n
    Bracket {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[command(flatten)]
        pair: Pair,
    },
    /// P(ā) for ā at level k/n
    Power {
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        e: Elem,
    },
    /// F_p-span of all brackets gr_k × gr_l → gr_{k+l}
    Span {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
    },
    /// Compare the graded formulas against the group (bracket if --l is given, else P)
    Check {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Graded abelianization through level L/n
    Abelianize {
        #[arg(long = "max-level")]
        max_level: u32,
    },
}

#[derive(Subcommand, Debug)]
enum HomalgOp {
    /// H^0, H^1 of Z_p acting through the operator
    Iwasawa {
        /// Operator matrix, rows separated by ';', e.g. "4,0;0,1"
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// H^s(C_m; M)
    Cyclic {
        #[arg(long)]
        order: u64,
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
        #[arg(long)]
        s: u32,
    },
    /// H^s(G_1, (E_1)_t)
    G1 {
        #[arg(long)]
        s: u32,
        #[arg(long, allow_hyphen_values = true)]
        t: i64,
    },
}

#[derive(Subcommand, Debug)]
enum K1Op {
    /// E_2 chart of the sphere
    E2 {
        #[arg(long = "s-max", default_value_t = 6)]
        s_max: u32,
        #[arg(long = "t-min", allow_hyphen_values = true, default_value_t = -8)]
        t_min: i64,
        #[arg(long = "t-max", allow_hyphen_values = true, default_value_t = 16)]
        t_max: i64,
    },
    /// π_*(L_K(1) S^0)
    Homotopy {
        #[arg(long, allow_hyphen_values = true, default_value_t = -4)]
        from: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 16)]
        to: i64,
    },
    /// π_*(KO Z_2)
    Ko {
        #[arg(long, allow_hyphen_values = true, default_value_t = -4)]
        from: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 16)]
        to: i64,
    },
    /// Valuations of ψ^t − 1
    Valuations {
        #[arg(long = "t-max", default_value_t = 20)]
        t_max: u64,
    },
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Report {
    text: String,
    json: Value,
}

fn report(text: impl Into<String>, json: Value) -> Result<Report> {
    Ok(Report { text: text.into(), json })
}

struct Ctx {
    p: Option<u64>,
    n: usize,
    prec: u32,
}

impl Ctx {
    fn p(&self) -> Result<u64> {
        self.p.ok_or_else(|| Error::InvalidInput("--p is required".into()))
    }

    fn ring(&self) -> Result<Arc<WittRing>> {
        make_ring(self.p()?, self.n, self.prec)
    }

    fn params(&self) -> Result<Arc<PadicParams>> {
        PadicParams::new(self.p()?, self.prec)
    }
}

fn witt_json(w: &WittElem) -> Value {
    json!({
        "p": w.ring().p(),
        "n": w.ring().n(),
        "M": w.ring().prec(),
        "coords": w.coords().iter().map(bigint_to_json).collect::<Vec<_>>(),
    })
}

fn padic_signed(x: &PadicInt) -> Value {
    bigint_to_json(&x.signed())
}

fn stab(src: &str, ring: &Arc<WittRing>) -> Result<StabElem> {
    StabElem::new(parse_element(src, ring)?)
}

fn run_witt(op: &WittOp, ctx: &Ctx) -> Result<Report> {
    let ring = ctx.ring()?;
    match op {
        WittOp::Trace(e) => {
            let tr = parse_witt(&e.x, &ring)?.trace()?;
            report(tr.signed().to_string(), json!({ "trace": padic_signed(&tr) }))
        }
        WittOp::Frobenius { e, k } => {
            let y = parse_witt(&e.x, &ring)?.frobenius_pow(*k);
            report(y.to_string(), witt_json(&y))
        }
        WittOp::Teich(e) => {
            let y = ring.teichmuller(&parse_residue(&e.x, &ring)?);
            report(y.to_string(), witt_json(&y))
        }
    }
}

fn run_order(op: &OrderOp, ctx: &Ctx) -> Result<Report> {
    let ring = ctx.ring()?;
    match op {
        OrderOp::Mul(pr) => {
            let z = parse_element(&pr.x, &ring)?.order_mul(&parse_element(&pr.y, &ring)?)?;
            report(z.to_string(), z.to_json())
        }
        OrderOp::Inv(e) => {
            let z = parse_element(&e.x, &ring)?.unit_inverse_order()?;
            report(z.to_string(), z.to_json())
        }
        OrderOp::Val(e) => {
            let v = parse_element(&e.x, &ring)?.s_valuation();
            report(v.to_string(), json!({ "k": v.k, "n": v.n, "zero_at_precision": v.is_zero_at_precision(), "bound": v.bound }))
        }
        OrderOp::Digits { e, count } => {
            let count = count.unwrap_or(2 * ctx.n as u32);
            let d: Vec<String> = parse_element(&e.x, &ring)?.s_digits(count).iter().map(|x| x.to_string()).collect();
            report(d.join(", "), json!({ "digits": d }))
        }
    }
}

fn run_stab(op: &StabOp, ctx: &Ctx) -> Result<Report> {
    let ring = ctx.ring()?;
    let precision = format!("S^{}", ring.n() as u32 * ring.prec());
    match op {
        StabOp::Order { e, bound } => {
            let x = stab(&e.x, &ring)?;
            let bound = bound.unwrap_or_else(|| default_order_bound(&ring));
            let ord = element_order(&x, bound);
            let text = match ord {
                Some(m) => format!("order {m} (at precision {precision})"),
                None => format!("no order ≤ {bound} (at precision {precision})"),
            };
            report(text, json!({ "order": ord, "bound": bound, "precision": precision }))
        }
        StabOp::Comm(pr) => {
            let c = commutator(&stab(&pr.x, &ring)?, &stab(&pr.y, &ring)?)?;
            let level = filtration_level(&c);
            report(
                format!("{c}\nlevel {level}"),
                json!({ "element": c.underlying().to_json(), "level": level.to_string() }),
            )
        }
        StabOp::Level(e) => {
            let level = filtration_level(&stab(&e.x, &ring)?);
            report(format!("level {level}"), json!({ "level": level.to_string(), "k": level.k, "n": level.n }))
        }
        StabOp::Norm(e) => {
            let nm = reduced_norm_padic(&parse_element(&e.x, &ring)?)?;
            report(nm.signed().to_string(), json!({ "norm": padic_signed(&nm) }))
        }
        StabOp::Split(e) => {
            let (x1, z) = s1_split(&stab(&e.x, &ring)?)?;
            report(
                format!("x1 = {x1}\nz = {}", z.signed()),
                json!({ "x1": x1.underlying().to_json(), "z": padic_signed(&z) }),
            )
        }
        StabOp::InK(e) => {
            let b = in_k(&stab(&e.x, &ring)?)?;
            report(b.to_string(), json!({ "in_K": b }))
        }
    }
}

fn span_text(span: &GrSubspace, ring: &WittRing) -> String {
    let fq = ring.residue_field();
    let ker = trace_kernel(fq, span.k);
    let relation = if span.dim() == fq.n() {
        ", equals F_q"
    } else if *span == ker {
        ", equals ker(tr)"
    } else if span.basis().iter().all(|b| ker.contains(b)) {
        ", contained in ker(tr)"
    } else {
        ""
    };
    format!("{span}{relation}")
}

fn run_grlie(op: &GrlieOp, ctx: &Ctx) -> Result<Report> {
    let ring = ctx.ring()?;
    let fq = ring.residue_field();
    let n = ring.n() as u32;
    let gr_json = |g: &GrElem| json!({ "k": g.k, "n": g.n, "level": g.level(), "residue": g.residue.to_string() });
    match op {
        GrlieOp::Bracket { k, l, pair } => {
            let a = GrElem::new(*k, n, parse_residue(&pair.x, &ring)?);
            let b = GrElem::new(*l, n, parse_residue(&pair.y, &ring)?);
            let g = gr_bracket(fq, &a, &b);
            report(g.to_string(), gr_json(&g))
        }
        GrlieOp::Power { k, e } => {
            let g = gr_power(fq, &GrElem::new(*k, n, parse_residue(&e.x, &ring)?));
            report(g.to_string(), gr_json(&g))
        }
        GrlieOp::Span { k, l } => {
            let span = commutator_span(fq, *k, *l)?;
            let text = span_text(&span, &ring);
            let basis: Vec<String> = span.basis().iter().map(|b| b.to_string()).collect();
            report(text.clone(), json!({ "level_numerator": k + l, "n": n, "dim": span.dim(), "basis": basis, "summary": text }))
        }
        GrlieOp::Check { k, l, trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let rep = match l {
                Some(l) => check_bracket_vs_group(&ring, *k, *l, *trials, &mut rng)?,
                None => check_power_vs_group(&ring, *k, *trials, &mut rng)?,
            };
            let text = format!("{} mismatches in {} trials ({} degenerate)", rep.mismatches, rep.trials, rep.degenerate);
            report(text, serde_json::to_value(&rep).expect("serializable"))
        }
        GrlieOp::Abelianize { max_level } => {
            let rep = abelianization_report(&ring, *max_level)?;
            let mut text = format!("H_1(S_n; Z_p) ≅ {}\nH_1(S_n; Z/p) ≅ {}\n", rep.assembled, rep.mod_p);
            text.push_str("level  dim D  dim Q  P target\n");
            for l in &rep.levels {
                text.push_str(&format!("{:>5}  {:>5}  {:>5}  {:>8}\n", l.level, l.commutator_dim, l.quotient_dim, l.p_target));
            }
            for c in &rep.chains {
                let lv: Vec<String> = c.levels.iter().map(|k| k.to_string()).collect();
                text.push_str(&format!("chain {}{}\n", lv.join(" → "), if c.free { " → …" } else { "" }));
            }
            report(text.trim_end(), serde_json::to_value(&rep).expect("serializable"))
        }
    }
}

fn run_homalg(op: &HomalgOp, ctx: &Ctx) -> Result<Report> {
    let params = ctx.params()?;
    match op {
        HomalgOp::Iwasawa { matrix } => {
            let m = ZpModuleWithOperator::new(&params, parse_matrix(matrix)?)?;
            let (h0, h1) = iwasawa_cohomology(&m);
            report(format!("H^0 = {}\nH^1 = {}", h0.decomp, h1.decomp), json!({ "H0": h0, "H1": h1 }))
        }
        HomalgOp::Cyclic { order, matrix, s } => {
            let m = ZpModuleWithOperator::new(&params, parse_matrix(matrix)?)?;
            let h = cyclic_cohomology(*order, &m, *s)?;
            report(format!("H^{s} = {}", h.decomp), serde_json::to_value(&h).expect("serializable"))
        }
        HomalgOp::G1 { s, t } => {
            let a = g1_exact_sequence(params.p(), *s, *t, ctx.prec)?;
            let text = format!(
                "H^{s}(G_1, (E_1)_{t}) = {}\n  from coker: {}\n  from ker:   {}",
                a.total.decomp, a.coker_prev, a.ker
            );
            report(text, serde_json::to_value(&a).expect("serializable"))
        }
    }
}

fn run_k1(op: &K1Op, ctx: &Ctx) -> Result<Report> {
    match op {
        K1Op::E2 { s_max, t_min, t_max } => {
            let c = e2_page(ctx.p()?, *s_max, *t_min, *t_max, ctx.prec)?;
            report(c.render_grid(*t_min, *t_max).trim_end(), c.to_json())
        }
        K1Op::Homotopy { from, to } => {
            let t = homotopy_table(ctx.p()?, *from, *to, ctx.prec)?;
            report(t.to_string().trim_end(), t.to_json())
        }
        K1Op::Ko { from, to } => {
            let t = ko_table(*from, *to, ctx.prec)?;
            report(t.to_string().trim_end(), t.to_json())
        }
        K1Op::Valuations { t_max } => {
            let p = ctx.p()?;
            let rows = psi_valuation_report(p, *t_max)?;
            let mut text = String::from("    t  ν  expected  c mod p\n");
            for r in &rows {
                text.push_str(&format!("{:>5}  {:>1}  {:>8}  {:>7}\n", r.t, r.valuation, r.expected, r.cofactor_mod_p));
            }
            report(text.trim_end(), json!({ "p": p, "rows": rows }))
        }
    }
}

fn is_usage_error(e: &Error) -> bool {
    matches!(e, Error::Syntax { .. } | Error::InvalidInput(_))
}

/// Runs the command line; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let ctx = Ctx { p: cli.p, n: cli.n, prec: cli.prec };
    let result = match &cli.cmd {
        Command::Witt { op } => run_witt(op, &ctx),
        Command::Order { op } => run_order(op, &ctx),
        Command::Stab { op } => run_stab(op, &ctx),
        Command::Grlie { op } => run_grlie(op, &ctx),
        Command::Homalg { op } => run_homalg(op, &ctx),
        Command::K1 { op } => run_k1(op, &ctx),
    };
    match result {
        Ok(r) => {
            let stdout = if cli.json {
                serde_json::to_string_pretty(&r.json).expect("serializable") + "\n"
            } else {
                r.text + "\n"
            };
            Outcome { code: 0, stdout, stderr: String::new() }
        }
        Err(e) => {
            let code = if is_usage_error(&e) { 2 } else { 1 };
            let stderr = if cli.json {
                json!({ "error": e.to_string() }).to_string() + "\n"
            } else {
                format!("error: {e}\n")
            };
            Outcome { code, stdout: String::new(), stderr }
        }
    }
}
