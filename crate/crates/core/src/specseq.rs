//! A bigraded chart engine for spectral sequences whose entries are cyclic
//! `Z_p`-modules labeled by monomials in `ζ, η, y, x, u`.
//!
//! Only differentials that are surjective onto a cyclic target are supported.
//! After page turns, bidegrees whose possible sources or targets lie outside
//! the chart are *untrusted* and excluded from collapse checks and stems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::padic::{CyclicDecomp, CyclicFactor};

/// Generators with their bidegrees `(s, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gen {
    Zeta,
    Eta,
    Y,
    X,
    U,
}

impl Gen {
    pub const ALL: [Gen; 5] = [Gen::Zeta, Gen::Eta, Gen::Y, Gen::X, Gen::U];

    pub fn bidegree(self) -> (i64, i64) {
        match self {
            Gen::Zeta => (1, 0),
            Gen::Eta => (1, 2),
            Gen::Y => (2, 0),
            Gen::X => (1, -2),
            Gen::U => (0, -2),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Gen::Zeta => "ζ",
            Gen::Eta => "η",
            Gen::Y => "y",
            Gen::X => "x",
            Gen::U => "u",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// `c · ζ^a η^b y^c x^d u^e` with `c` a power of `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub coeff: u128,
    exps: [i64; 5],
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { coeff: 1, exps: [0; 5] }
    }

    pub fn from_exps(pairs: &[(Gen, i64)]) -> Self {
        let mut m = Self::one();
        for &(g, e) in pairs {
            m.exps[g.index()] += e;
        }
        m
    }

    pub fn exp(&self, g: Gen) -> i64 {
        self.exps[g.index()]
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps;
        for (a, b) in exps.iter_mut().zip(other.exps) {
            *a += b;
        }
        Monomial { coeff: self.coeff * other.coeff, exps }
    }

    pub fn scaled(&self, factor: u128) -> Monomial {
        Monomial { coeff: self.coeff * factor, exps: self.exps }
    }

    /// Same generator exponents, ignoring the coefficient.
    pub fn same_shape(&self, other: &Monomial) -> bool {
        self.exps == other.exps
    }

    pub fn bidegree(&self) -> (i64, i64) {
        Gen::ALL.iter().fold((0, 0), |(s, t), &g| {
            let (gs, gt) = g.bidegree();
            (s + gs * self.exp(g), t + gt * self.exp(g))
        })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if self.coeff != 1 {
            out.push_str(&self.coeff.to_string());
        }
        for g in Gen::ALL {
            match self.exp(g) {
                0 => {}
                1 => out.push_str(g.symbol()),
                e => out.push_str(&format!("{}^{}", g.symbol(), e)),
            }
        }
        if out.is_empty() {
            out.push('1');
        }
        write!(f, "{out}")
    }
}

fn order_string(p: u64, o: CyclicFactor) -> String {
    CyclicDecomp::new(p, [o]).to_string()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summand {
    pub order: CyclicFactor,
    pub label: Monomial,
    pub s: u32,
    pub t: i64,
}

/// Constraint on one generator exponent in a rule's source pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    Exact(i64),
    AtLeast(i64),
    Congruent { modulus: i64, residue: i64 },
}

impl Constraint {
    fn admits(self, e: i64) -> bool {
        match self {
            Constraint::Exact(v) => e == v,
            Constraint::AtLeast(v) => e >= v,
            Constraint::Congruent { modulus, residue } => e.rem_euclid(modulus) == residue.rem_euclid(modulus),
        }
    }
}

/// `d_r(m) = m · multiplier` for every source label `m` matching `pattern`.
/// Generators absent from the pattern must have exponent 0 in the source.
#[derive(Clone, Debug)]
pub struct DifferentialRule {
    pub page: u32,
    pub pattern: Vec<(Gen, Constraint)>,
    pub multiplier: Monomial,
    pub anchor: String,
}

impl DifferentialRule {
    pub fn new(page: u32, pattern: Vec<(Gen, Constraint)>, multiplier: Monomial, anchor: &str) -> Result<Self> {
        let (ds, dt) = multiplier.bidegree();
        if (ds, dt) != (page as i64, page as i64 - 1) {
            return Err(Error::InconsistentDifferential(format!(
                "multiplier {multiplier} has bidegree ({ds}, {dt}), d_{page} needs ({page}, {})",
                page as i64 - 1
            )));
        }
        Ok(DifferentialRule { page, pattern, multiplier, anchor: anchor.to_string() })
    }

    pub fn matches(&self, m: &Monomial) -> bool {
        Gen::ALL.iter().all(|&g| {
            let e = m.exp(g);
            match self.pattern.iter().find(|(h, _)| *h == g) {
                Some((_, c)) => c.admits(e),
                None => e == 0,
            }
        })
    }
}

/// One entry of a page-turn log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LogEntry {
    pub page: u32,
    pub source: String,
    pub target: String,
    pub source_order: String,
    pub target_order: String,
    pub outcome: String,
    pub anchor: String,
    /// `log_p` of the order removed from the target.
    #[serde(skip)]
    pub target_log: Option<u32>,
    /// `log_p` of the index by which the source shrank.
    #[serde(skip)]
    pub source_log: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub p: u64,
    pub page: u32,
    pub s_max: u32,
    pub t_min: i64,
    pub t_max: i64,
    entries: BTreeMap<(u32, i64), Vec<Summand>>,
    pages_applied: Vec<u32>,
    pub log: Vec<LogEntry>,
}

impl Chart {
    pub fn new(p: u64, page: u32, s_max: u32, t_min: i64, t_max: i64) -> Self {
        Chart { p, page, s_max, t_min, t_max, entries: BTreeMap::new(), pages_applied: vec![], log: vec![] }
    }

    pub fn in_bounds(&self, s: i64, t: i64) -> bool {
        s >= 0 && s <= self.s_max as i64 && t >= self.t_min && t <= self.t_max
    }

    /// Adds a summand at the label's bidegree.
    pub fn add(&mut self, label: Monomial, order: CyclicFactor) -> Result<()> {
        let (s, t) = label.bidegree();
        if !self.in_bounds(s, t) {
            return Err(Error::InvalidInput(format!("{label} at ({s}, {t}) is outside the chart")));
        }
        if order == CyclicFactor::Finite(0) {
            return Ok(());
        }
        let cell = self.entries.entry((s as u32, t)).or_default();
        if cell.iter().any(|x| x.label.same_shape(&label)) {
            return Err(Error::InvalidInput(format!("duplicate label {label} at ({s}, {t})")));
        }
        cell.push(Summand { order, label, s: s as u32, t });
        Ok(())
    }

    pub fn at(&self, s: u32, t: i64) -> &[Summand] {
        self.entries.get(&(s, t)).map_or(&[], |v| v.as_slice())
    }

    pub fn group_at(&self, s: u32, t: i64) -> CyclicDecomp {
        CyclicDecomp::new(self.p, self.at(s, t).iter().map(|x| x.order))
    }

    pub fn summands(&self) -> impl Iterator<Item = &Summand> {
        self.entries.values().flatten()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.values().all(|v| v.is_empty())
    }

    pub fn pages_applied(&self) -> &[u32] {
        &self.pages_applied
    }

    /// Whether every differential into or out of `(s, t)` on an applied page was visible.
    pub fn is_trusted(&self, s: u32, t: i64) -> bool {
        if !self.in_bounds(s as i64, t) {
            return false;
        }
        self.pages_applied.iter().all(|&r| {
            let r = r as i64;
            let (s, t) = (s as i64, t);
            let out_ok = self.in_bounds(s + r, t + r - 1);
            let in_ok = s - r < 0 || self.in_bounds(s - r, t - r + 1);
            out_ok && in_ok
        })
    }

    /// Least `s0` such that every trusted bidegree with `s ≥ s0` is empty.
    pub fn vanishing_line(&self) -> u32 {
        self.entries
            .iter()
            .filter(|((s, t), v)| !v.is_empty() && self.is_trusted(*s, *t))
            .map(|((s, _), _)| s + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|((s, t), v)| {
                json!({
                    "s": s,
                    "t": t,
                    "trusted": self.is_trusted(*s, *t),
                    "summands": v.iter().map(|x| json!({
                        "label": x.label.to_string(),
                        "order": x.order,
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "p": self.p,
            "page": self.page,
            "s_max": self.s_max,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "entries": entries,
            "log": self.log,
        })
    }

    /// Aligned grid, `s` descending by row, `t` ascending by column, over `[t_lo, t_hi]`.
    pub fn render_grid(&self, t_lo: i64, t_hi: i64) -> String {
        let cols: Vec<i64> = (t_lo..=t_hi).collect();
        let cell = |s: u32, t: i64| -> String {
            self.at(s, t)
                .iter()
                .map(|x| format!("{}:{}", x.label, order_string(self.p, x.order)))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut widths: Vec<usize> = cols.iter().map(|t| t.to_string().chars().count()).collect();
        for s in 0..=self.s_max {
            for (w, &t) in widths.iter_mut().zip(&cols) {
                *w = (*w).max(cell(s, t).chars().count()).max(1);
            }
        }
        let pad = |x: &str, w: usize| format!("{}{}", " ".repeat(w - x.chars().count()), x);
        let mut out = String::new();
        for s in (0..=self.s_max).rev() {
            let row: Vec<String> = cols
                .iter()
                .zip(&widths)
                .map(|(&t, &w)| {
                    let c = cell(s, t);
                    pad(if c.is_empty() { "." } else { &c }, w)
                })
                .collect();
            out.push_str(&format!("s={s:<3}| {}\n", row.join("  ")));
        }
        let header: Vec<String> = cols.iter().zip(&widths).map(|(t, &w)| pad(&t.to_string(), w)).collect();
        out.push_str(&format!("t    | {}\n", header.join("  ")));
        out
    }
}

fn log_order(o: CyclicFactor) -> Option<u32> {
    match o {
        CyclicFactor::Free => None,
        CyclicFactor::Finite(e) => Some(e),
    }
}

/// Turns the page: applies all `d_r` rules (with `r = c.page`) simultaneously.
pub fn apply_differentials(c: &Chart, rules: &[DifferentialRule]) -> Result<Chart> {
    let r = c.page;
    if let Some(bad) = rules.iter().find(|x| x.page != r) {
        return Err(Error::InconsistentDifferential(format!("rule for d_{} applied on page {r}", bad.page)));
    }
    let mut next = c.clone();
    next.page = r + 1;
    if rules.is_empty() {
        return Ok(next);
    }
    next.pages_applied.push(r);

    struct Hit {
        src: (u32, i64, usize),
        tgt: Option<(u32, i64, usize)>,
        target_label: Monomial,
        anchor: String,
    }

    let mut hits = Vec::new();
    for (&(s, t), cell) in &c.entries {
        for (i, x) in cell.iter().enumerate() {
            let Some(rule) = rules.iter().find(|rule| rule.matches(&x.label)) else {
                continue;
            };
            let target_label = x.label.times(&rule.multiplier);
            let (ts, tt) = (s as i64 + r as i64, t + r as i64 - 1);
            let tgt = if c.in_bounds(ts, tt) {
                c.at(ts as u32, tt)
                    .iter()
                    .position(|y| y.label.same_shape(&target_label))
                    .map(|j| (ts as u32, tt, j))
            } else {
                None
            };
            hits.push(Hit { src: (s, t, i), tgt, target_label, anchor: rule.anchor.clone() });
        }
    }

    let sources: BTreeSet<(u32, i64, usize)> = hits.iter().map(|h| h.src).collect();
    let mut targets = BTreeSet::new();
    for h in &hits {
        if let Some(tg) = h.tgt {
            if sources.contains(&tg) || !targets.insert(tg) {
                return Err(Error::InconsistentDifferential(format!(
                    "{} is hit twice or both source and target",
                    h.target_label
                )));
            }
        }
    }

    let mut new_orders: BTreeMap<(u32, i64, usize), Option<(CyclicFactor, Monomial)>> = BTreeMap::new();
    for h in &hits {
        let (s, t, i) = h.src;
        let x = &c.entries[&(s, t)][i];
        let src_name = format!("{}@({s},{t})", x.label);
        let Some((ts, tt, j)) = h.tgt else {
            let (ts, tt) = (s as i64 + r as i64, t + r as i64 - 1);
            let outcome = if c.in_bounds(ts, tt) { "zero: target absent" } else { "outside chart" };
            next.log.push(LogEntry {
                page: r,
                source: src_name,
                target: format!("{}@({ts},{tt})", h.target_label),
                source_order: order_string(c.p, x.order),
                target_order: "0".into(),
                outcome: outcome.into(),
                anchor: h.anchor.clone(),
                target_log: Some(0),
                source_log: Some(0),
            });
            continue;
        };
        let y = &c.entries[&(ts, tt)][j];
        let (src_new, outcome, source_log) = match (x.order, y.order) {
            (a, b) if a == b => (None, "both removed".to_string(), log_order(a)),
            (CyclicFactor::Free, CyclicFactor::Finite(e)) => {
                let lbl = x.label.scaled((c.p as u128).pow(e));
                let msg = format!("source replaced by {lbl}");
                (Some((CyclicFactor::Free, lbl)), msg, Some(e))
            }
            (CyclicFactor::Finite(a), CyclicFactor::Finite(b)) if a > b => {
                let lbl = x.label.scaled((c.p as u128).pow(b));
                let msg = format!("source replaced by {lbl}");
                (Some((CyclicFactor::Finite(a - b), lbl)), msg, Some(b))
            }
            (a, b) => {
                return Err(Error::InconsistentDifferential(format!(
                    "d_{r}({src_name}) of order {} onto {} of order {}",
                    order_string(c.p, a),
                    y.label,
                    order_string(c.p, b)
                )))
            }
        };
        new_orders.insert(h.src, src_new);
        new_orders.insert((ts, tt, j), None);
        next.log.push(LogEntry {
            page: r,
            source: src_name,
            target: format!("{}@({ts},{tt})", y.label),
            source_order: order_string(c.p, x.order),
            target_order: order_string(c.p, y.order),
            outcome,
            anchor: h.anchor.clone(),
            target_log: log_order(y.order),
            source_log,
        });
    }

    for (&(s, t), cell) in &c.entries {
        let mut kept = Vec::new();
        for (i, x) in cell.iter().enumerate() {
            match new_orders.get(&(s, t, i)) {
                None => kept.push(x.clone()),
                Some(None) => {}
                Some(Some((o, lbl))) => kept.push(Summand { order: *o, label: lbl.clone(), s, t }),
            }
        }
        if kept.is_empty() {
            next.entries.remove(&(s, t));
        } else {
            next.entries.insert((s, t), kept);
        }
    }
    Ok(next)
}

/// No trusted nonzero bidegrees are joined by a `d_r` with `r ≥ r_from`.
pub fn collapse_check(c: &Chart, r_from: u32) -> bool {
    for (&(s, t), cell) in &c.entries {
        if cell.is_empty() || !c.is_trusted(s, t) {
            continue;
        }
        for r in r_from.max(2)..=c.s_max {
            let (ts, tt) = (s + r, t + r as i64 - 1);
            if ts > c.s_max {
                break;
            }
            if !c.at(ts, tt).is_empty() && c.is_trusted(ts, tt) {
                return false;
            }
        }
    }
    true
}

/// Stems in which the associated graded pieces assemble non-trivially.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionRule {
    pub modulus: i64,
    pub residue: i64,
    pub nontrivial: bool,
    pub anchor: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionConfig {
    pub rules: Vec<ExtensionRule>,
}

impl ExtensionConfig {
    /// At `p = 2`: stems `≡ 3 mod 8` extend to a single cyclic group, stems `≡ 1 mod 8` split.
    pub fn default_for(p: u64) -> Self {
        if p != 2 {
            return Self::default();
        }
        ExtensionConfig {
            rules: vec![
                ExtensionRule {
                    modulus: 8,
                    residue: 3,
                    nontrivial: true,
                    anchor: "extensions in dimensions ≡ 3 mod 8 are non-trivial".into(),
                },
                ExtensionRule {
                    modulus: 8,
                    residue: 1,
                    nontrivial: false,
                    anchor: "extensions in dimensions ≡ 1 mod 8 are trivial".into(),
                },
            ],
        }
    }

    pub fn rule_for(&self, stem: i64) -> Option<&ExtensionRule> {
        self.rules.iter().find(|r| stem.rem_euclid(r.modulus) == r.residue.rem_euclid(r.modulus))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StemEntry {
    pub group: CyclicDecomp,
    /// `label@(s,t): order` for each contributing summand.
    pub sources: Vec<String>,
    pub extension: Option<String>,
}

pub type StemTable = BTreeMap<i64, StemEntry>;

/// Reads off `π_i` for `i ∈ [from, to]` from a collapsed chart.
pub fn assemble_stems(c: &Chart, ext: &ExtensionConfig, from: i64, to: i64) -> Result<StemTable> {
    if !collapse_check(c, c.page) {
        return Err(Error::InvalidInput(format!("chart has possible differentials at page ≥ {}", c.page)));
    }
    let vl = c.vanishing_line();
    let mut out = BTreeMap::new();
    for i in from..=to {
        for s in 0..=vl.min(c.s_max) {
            if !c.is_trusted(s, i + s as i64) {
                return Err(Error::InvalidInput(format!(
                    "stem {i} needs bidegree ({s}, {}) which the chart does not determine",
                    i + s as i64
                )));
            }
        }
        let pieces: Vec<&Summand> = (0..vl).flat_map(|s| c.at(s, i + s as i64)).collect();
        let sources = pieces
            .iter()
            .map(|x| format!("{}@({},{}): {}", x.label, x.s, x.t, order_string(c.p, x.order)))
            .collect();
        let rule = ext.rule_for(i);
        let group = match rule {
            Some(r) if r.nontrivial && pieces.len() > 1 => {
                if pieces.iter().any(|x| x.order == CyclicFactor::Free) {
                    return Err(Error::InvalidInput(format!("extension in stem {i} involves a free summand")));
                }
                let e: u32 = pieces.iter().filter_map(|x| log_order(x.order)).sum();
                CyclicDecomp::cyclic(c.p, e)
            }
            _ => {
                let caveat = pieces.iter().any(|x| x.order == CyclicFactor::Free);
                CyclicDecomp::new(c.p, pieces.iter().map(|x| x.order)).with_precision_flag(caveat)
            }
        };
        let extension = rule.filter(|_| pieces.len() > 1).map(|r| r.anchor.clone());
        out.insert(i, StemEntry { group, sources, extension });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eta_u(m: i64, k: i64) -> Monomial {
        Monomial::from_exps(&[(Gen::Eta, m), (Gen::U, k)])
    }

    fn d3_rule() -> DifferentialRule {
        DifferentialRule::new(
            3,
            vec![(Gen::Eta, Constraint::AtLeast(0)), (Gen::U, Constraint::Congruent { modulus: 4, residue: 2 })],
            eta_u(3, 2),
            "d3(u^-2) = η^3",
        )
        .unwrap()
    }

    #[test]
    fn monomial_display_and_degree() {
        let m = Monomial::from_exps(&[(Gen::Zeta, 1), (Gen::Eta, 3), (Gen::U, -2)]);
        assert_eq!(m.to_string(), "ζη^3u^-2");
        assert_eq!(m.bidegree(), (4, 10));
        assert_eq!(Monomial::one().to_string(), "1");
        assert_eq!(eta_u(0, -2).scaled(2).to_string(), "2u^-2");
        // x = η u^2 and y = η^2 u^2
        assert_eq!(Monomial::from_exps(&[(Gen::X, 1)]).bidegree(), eta_u(1, 2).bidegree());
        assert_eq!(Monomial::from_exps(&[(Gen::Y, 1)]).bidegree(), eta_u(2, 2).bidegree());
    }

    #[test]
    fn rule_bidegree_checked() {
        assert!(DifferentialRule::new(3, vec![], eta_u(2, 2), "bad").is_err());
        assert!(DifferentialRule::new(3, vec![], eta_u(3, 2), "ok").is_ok());
    }

    #[test]
    fn ko_like_page_turn() {
        let mut c = Chart::new(2, 3, 6, -12, 20);
        c.add(eta_u(0, -2), CyclicFactor::Free).unwrap();
        c.add(eta_u(3, 0), CyclicFactor::Finite(1)).unwrap();
        c.add(eta_u(0, -4), CyclicFactor::Free).unwrap();
        let next = apply_differentials(&c, &[d3_rule()]).unwrap();
        assert_eq!(next.page, 4);
        assert!(next.at(3, 6).is_empty());
        let src = &next.at(0, 4)[0];
        assert_eq!((src.order, src.label.to_string()), (CyclicFactor::Free, "2u^-2".to_string()));
        // t = 8: u^-4 is not a source
        assert_eq!(next.at(0, 8)[0].label.to_string(), "u^-4");
        let bad_t = d3_rule();
        assert!(!bad_t.matches(&eta_u(0, -4)));
    }

    #[test]
    fn empty_rules_unchanged() {
        let mut c = Chart::new(2, 3, 6, -12, 20);
        c.add(eta_u(0, -2), CyclicFactor::Free).unwrap();
        let next = apply_differentials(&c, &[]).unwrap();
        assert_eq!(next.entries, c.entries);
    }

    #[test]
    fn smaller_source_is_inconsistent() {
        let mut c = Chart::new(2, 3, 6, -12, 20);
        c.add(Monomial::from_exps(&[(Gen::Zeta, 1), (Gen::U, -2)]), CyclicFactor::Finite(1)).unwrap();
        c.add(Monomial::from_exps(&[(Gen::Zeta, 1), (Gen::Eta, 3)]), CyclicFactor::Finite(2)).unwrap();
        let rule = DifferentialRule::new(
            3,
            vec![(Gen::Zeta, Constraint::Exact(1)), (Gen::Eta, Constraint::AtLeast(0)), (Gen::U, Constraint::Congruent { modulus: 4, residue: 2 })],
            eta_u(3, 2),
            "test",
        )
        .unwrap();
        assert!(matches!(apply_differentials(&c, &[rule]), Err(Error::InconsistentDifferential(_))));
    }

    #[test]
    fn finite_source_shrinks() {
        let mut c = Chart::new(2, 3, 6, -12, 20);
        c.add(Monomial::from_exps(&[(Gen::Zeta, 1), (Gen::U, -2)]), CyclicFactor::Finite(3)).unwrap();
        c.add(Monomial::from_exps(&[(Gen::Zeta, 1), (Gen::Eta, 3)]), CyclicFactor::Finite(1)).unwrap();
        let rule = DifferentialRule::new(
            3,
            vec![(Gen::Zeta, Constraint::Exact(1)), (Gen::Eta, Constraint::AtLeast(0)), (Gen::U, Constraint::Congruent { modulus: 4, residue: 2 })],
            eta_u(3, 2),
            "test",
        )
        .unwrap();
        let next = apply_differentials(&c, &[rule]).unwrap();
        let x = &next.at(1, 4)[0];
        assert_eq!((x.order, x.label.to_string()), (CyclicFactor::Finite(2), "2ζu^-2".to_string()));
        let e = &next.log[0];
        assert_eq!((e.target_log, e.source_log), (Some(1), Some(1)));
    }

    #[test]
    fn collapse_examples() {
        let mut c = Chart::new(2, 2, 6, -10, 10);
        c.add(Monomial::one(), CyclicFactor::Free).unwrap();
        c.add(eta_u(3, 2), CyclicFactor::Finite(1)).unwrap();
        assert_eq!(eta_u(3, 2).bidegree(), (3, 2));
        assert!(!collapse_check(&c, 3));
        assert!(collapse_check(&c, 4));
        let mut odd = Chart::new(3, 2, 4, -20, 20);
        odd.add(Monomial::one(), CyclicFactor::Free).unwrap();
        odd.add(Monomial::from_exps(&[(Gen::Zeta, 1), (Gen::U, -2)]), CyclicFactor::Finite(1)).unwrap();
        assert!(collapse_check(&odd, 2));
    }

    #[test]
    fn empty_chart_stems() {
        let c = Chart::new(2, 4, 4, -10, 10);
        let stems = assemble_stems(&c, &ExtensionConfig::default_for(2), -5, 5).unwrap();
        assert!(stems.values().all(|e| e.group.is_zero()));
    }

    #[test]
    fn extension_join() {
        let mut c = Chart::new(2, 4, 4, -10, 12);
        c.add(Monomial::from_exps(&[(Gen::Zeta, 1), (Gen::U, -2)]).scaled(2), CyclicFactor::Finite(2)).unwrap();
        c.add(eta_u(3, 0), CyclicFactor::Finite(1)).unwrap();
        c.add(eta_u(1, 0), CyclicFactor::Finite(1)).unwrap();
        c.add(Monomial::from_exps(&[(Gen::Zeta, 1), (Gen::Eta, 2)]), CyclicFactor::Finite(1)).unwrap();
        let stems = assemble_stems(&c, &ExtensionConfig::default_for(2), 0, 4).unwrap();
        assert_eq!(stems[&3].group.to_string(), "Z/8");
        assert_eq!(stems[&1].group.to_string(), "(Z/2)^2");
        assert!(stems[&3].extension.is_some());
    }

    #[test]
    fn grid_renders() {
        let mut c = Chart::new(2, 2, 2, -2, 2);
        c.add(Monomial::one(), CyclicFactor::Free).unwrap();
        c.add(eta_u(1, 0), CyclicFactor::Finite(1)).unwrap();
        let g = c.render_grid(-2, 2);
        assert!(g.contains("1:Z_2"));
        assert!(g.contains("η:Z/2"));
        assert_eq!(g.lines().count(), 4);
        let j = c.to_json();
        assert_eq!(j["entries"].as_array().unwrap().len(), 2);
    }
}
