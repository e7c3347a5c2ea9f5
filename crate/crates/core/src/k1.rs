//! Homotopy of the K(1)-local sphere and of `KO Z_2` from their homotopy fixed
//! point spectral sequences.
//!
//! E_2 terms come from [`crate::homalg`]; the `d_3` differentials are encoded as
//! rule families for [`crate::specseq`], and stems are read off the `E_4` page.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::homalg::{cyclic_cohomology, g1_cohomology_e1, ZpModuleWithOperator};
use crate::padic::{is_prime, nu_p, CyclicDecomp, CyclicFactor, PadicParams};
use crate::specseq::{
    apply_differentials, assemble_stems, collapse_check, Chart, Constraint, DifferentialRule, ExtensionConfig, Gen, Monomial,
    StemEntry,
};

pub const DEFAULT_PRECISION: u32 = 32;

/// Rows kept in the charts; rows above `S_MAX − 3` are not determined by `d_3`.
const S_MAX: u32 = 8;
const T_MARGIN: i64 = 6;

fn eta_u(m: i64, k: i64) -> Monomial {
    Monomial::from_exps(&[(Gen::Eta, m), (Gen::U, k)])
}

fn zeta_eta_u(m: i64, k: i64) -> Monomial {
    Monomial::from_exps(&[(Gen::Zeta, 1), (Gen::Eta, m), (Gen::U, k)])
}

/// Rewrites `y^a x^b u^k` using `x = ηu²` and `y = x²u⁻² = η²u²`.
fn rewrite_xy(m: &Monomial) -> Monomial {
    let (a, b) = (m.exp(Gen::Y), m.exp(Gen::X));
    let rest = Monomial::from_exps(&[(Gen::Zeta, m.exp(Gen::Zeta)), (Gen::Eta, m.exp(Gen::Eta)), (Gen::U, m.exp(Gen::U))]);
    rest.times(&eta_u(2 * a + b, 2 * a + 2 * b)).scaled(m.coeff)
}

/// Generator of `E_2^{s,t}` for the K(1)-local sphere.
fn sphere_label(p: u64, s: u32, t: i64) -> Monomial {
    let s = s as i64;
    match (s, t) {
        (0, _) => Monomial::one(),
        (1, _) if p != 2 || t % 4 == 0 => zeta_eta_u(0, -t / 2),
        _ => {
            // p = 2: E_2 is Z_2[u^{±2}, η, ζ]/(2η, ζ²) in positive degrees
            let k = s - t / 2;
            if k.rem_euclid(2) == 0 {
                eta_u(s, k)
            } else {
                zeta_eta_u(s - 1, k - 1)
            }
        }
    }
}

fn single_factor(g: &CyclicDecomp, s: u32, t: i64) -> Result<CyclicFactor> {
    match g.factors() {
        [f] => Ok(*f),
        other => Err(Error::FormulaViolation(format!("E_2^({s},{t}) has {} cyclic factors, expected one", other.len()))),
    }
}

/// `E_2^{s,t} = H^s(G_1, (E_1)_t)` for `0 ≤ s ≤ s_max`, `t_min ≤ t ≤ t_max`.
pub fn e2_page(p: u64, s_max: u32, t_min: i64, t_max: i64, prec: u32) -> Result<Chart> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let mut chart = Chart::new(p, 2, s_max, t_min, t_max);
    for s in 0..=s_max {
        for t in t_min..=t_max {
            if t.rem_euclid(2) == 1 {
                continue;
            }
            let g = g1_cohomology_e1(p, s, t, prec)?;
            if g.is_zero() {
                continue;
            }
            let label = sphere_label(p, s, t);
            debug_assert_eq!(label.bidegree(), (s as i64, t));
            chart.add(label, single_factor(&g.decomp, s, t)?)?;
        }
    }
    Ok(chart)
}

/// `E_2 = H^*(C_2; Z_2[u^{±1}])` for `KO Z_2`, relabeled in terms of `η` and `u^{±2}`.
pub fn ko_e2_page(s_max: u32, t_min: i64, t_max: i64, prec: u32) -> Result<Chart> {
    let params = PadicParams::new(2, prec)?;
    let mut chart = Chart::new(2, 2, s_max, t_min, t_max);
    for t in t_min..=t_max {
        if t.rem_euclid(2) == 1 {
            continue;
        }
        let k = -t / 2;
        let sign: i64 = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        let module = ZpModuleWithOperator::scalar(&params, sign);
        for s in 0..=s_max {
            let g = cyclic_cohomology(2, &module, s)?;
            if g.is_zero() {
                continue;
            }
            let sp = (s / 2) as i64;
            let raw = if s % 2 == 0 {
                Monomial::from_exps(&[(Gen::Y, sp), (Gen::U, k)])
            } else {
                Monomial::from_exps(&[(Gen::Y, sp), (Gen::X, 1), (Gen::U, k - 1)])
            };
            let label = rewrite_xy(&raw);
            debug_assert_eq!(label.bidegree(), (s as i64, t));
            chart.add(label, single_factor(&g.decomp, s, t)?)?;
        }
    }
    Ok(chart)
}

fn u_t_odd() -> (Gen, Constraint) {
    // u^{-2t} with t odd
    (Gen::U, Constraint::Congruent { modulus: 4, residue: 2 })
}

/// `d_3(η^m u^{−2t}) = η^{m+3} u^{−2t+2}` for `t` odd and `m ≥ 0`.
pub fn ko_rules() -> Vec<DifferentialRule> {
    vec![DifferentialRule::new(3, vec![(Gen::Eta, Constraint::AtLeast(0)), u_t_odd()], eta_u(3, 2), "d_3(u^-2) = η^3, extended η-linearly")
        .expect("bidegree (3, 2)")]
}

/// The two `d_3` families for the sphere at `p = 2`, linear over `η` and `ζ`.
pub fn sphere_rules() -> Vec<DifferentialRule> {
    vec![
        DifferentialRule::new(3, vec![(Gen::Eta, Constraint::AtLeast(1)), u_t_odd()], eta_u(3, 2), "d_3(η u^-2t) = η^4 u^(-2t+2), t odd")
            .expect("bidegree (3, 2)"),
        DifferentialRule::new(
            3,
            vec![(Gen::Zeta, Constraint::Exact(1)), (Gen::Eta, Constraint::AtLeast(0)), u_t_odd()],
            eta_u(3, 2),
            "d_3(ζ u^-2t) = ζη^3 u^(-2t+2), t odd",
        )
        .expect("bidegree (3, 2)"),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct HomotopyTable {
    pub p: u64,
    pub spectrum: String,
    pub stems: BTreeMap<i64, StemEntry>,
}

impl HomotopyTable {
    pub fn get(&self, stem: i64) -> Option<&CyclicDecomp> {
        self.stems.get(&stem).map(|e| &e.group)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "spectrum": self.spectrum,
            "stems": self.stems.iter().map(|(i, e)| json!({
                "stem": i,
                "group": e.group.to_string(),
                "factors": e.group.factors(),
                "at_precision": e.group.at_precision,
                "sources": e.sources,
                "extension": e.extension,
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for HomotopyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "π_*({}) at p = {}", self.spectrum, self.p)?;
        let w = self.stems.values().map(|e| e.group.to_string().chars().count()).max().unwrap_or(1);
        for (i, e) in &self.stems {
            let g = e.group.to_string();
            write!(f, "{i:>5}  {g}")?;
            if !e.sources.is_empty() {
                let pad = " ".repeat(w - g.chars().count());
                write!(f, "{pad}  [{}]", e.sources.join("; "))?;
            }
            if let Some(x) = &e.extension {
                write!(f, "  ext: {x}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn chart_bounds(from: i64, to: i64) -> (i64, i64) {
    (from - T_MARGIN, to + S_MAX as i64 + T_MARGIN)
}

/// Runs the spectral sequence for the sphere through `E_4` (p = 2) or `E_2` (odd p).
pub fn sphere_chart(p: u64, from: i64, to: i64, prec: u32) -> Result<Chart> {
    let (t_min, t_max) = chart_bounds(from, to);
    if p == 2 {
        let e2 = e2_page(2, S_MAX, t_min, t_max, prec)?;
        let e3 = apply_differentials(&e2, &[])?;
        apply_differentials(&e3, &sphere_rules())
    } else {
        let e2 = e2_page(p, 3, t_min, t_max, prec)?;
        if e2.summands().any(|x| x.s > 1) {
            return Err(Error::FormulaViolation("odd-p E_2 term has entries above s = 1".into()));
        }
        if !collapse_check(&e2, 2) {
            return Err(Error::FormulaViolation("odd-p E_2 term is not sparse".into()));
        }
        Ok(e2)
    }
}

/// `π_i(L_{K(1)} S^0)` for `from ≤ i ≤ to`.
pub fn homotopy_table(p: u64, from: i64, to: i64, prec: u32) -> Result<HomotopyTable> {
    let chart = sphere_chart(p, from, to, prec)?;
    let stems = assemble_stems(&chart, &ExtensionConfig::default_for(p), from, to)?;
    Ok(HomotopyTable { p, spectrum: "L_K(1) S^0".into(), stems })
}

pub fn ko_chart(from: i64, to: i64, prec: u32) -> Result<Chart> {
    let (t_min, t_max) = chart_bounds(from, to);
    let e2 = ko_e2_page(S_MAX, t_min, t_max, prec)?;
    let e3 = apply_differentials(&e2, &[])?;
    apply_differentials(&e3, &ko_rules())
}

/// `π_i(KO Z_2)` for `from ≤ i ≤ to`; no extension problems arise.
pub fn ko_table(from: i64, to: i64, prec: u32) -> Result<HomotopyTable> {
    let chart = ko_chart(from, to, prec)?;
    let stems = assemble_stems(&chart, &ExtensionConfig::default(), from, to)?;
    Ok(HomotopyTable { p: 2, spectrum: "KO Z_2".into(), stems })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiRow {
    pub t: u64,
    pub valuation: u32,
    pub expected: u32,
    /// `(λ_t − 1)/p^v mod p`.
    pub cofactor_mod_p: u64,
}

/// Exact valuations of `(p+1)^{t(p−1)} − 1` (odd `p`) or `3^{2t} − 1` (`p = 2`).
pub fn psi_valuation_report(p: u64, t_max: u64) -> Result<Vec<PsiRow>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if t_max == 0 {
        return Err(Error::InvalidInput("t_max must be at least 1".into()));
    }
    let (base, shift) = if p == 2 {
        (BigInt::from(9), 3)
    } else {
        (BigInt::from(p + 1).pow((p - 1) as u32), 1)
    };
    let pb = BigInt::from(p);
    let mut lambda = BigInt::one();
    let mut rows = Vec::with_capacity(t_max as usize);
    for t in 1..=t_max {
        lambda *= &base;
        let diff = &lambda - 1u32;
        let v = nu_p(&diff, p)?;
        let expected = nu_p(&BigInt::from(t), p)? + shift;
        let c = (&diff / pb.pow(v)).mod_floor(&pb).to_u64().expect("small");
        if v != expected || c == 0 {
            return Err(Error::FormulaViolation(format!("p={p}, t={t}: valuation {v}, expected {expected}")));
        }
        rows.push(PsiRow { t, valuation: v, expected, cofactor_mod_p: c });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e2_odd_p() {
        let c = e2_page(3, 3, -40, 40, 16).unwrap();
        for x in c.summands() {
            assert!(x.s <= 1);
            if x.s == 1 && x.t != 0 {
                assert_eq!(x.t % 4, 0);
            }
        }
        assert_eq!(c.group_at(1, 12).to_string(), "Z/9");
        assert_eq!(c.at(1, 12)[0].label.to_string(), "ζu^-6");
        assert_eq!(c.group_at(0, 0).to_string(), "Z_3");
    }

    #[test]
    fn e2_p2() {
        let c = e2_page(2, 6, -16, 16, 16).unwrap();
        assert_eq!(c.group_at(1, 2).to_string(), "Z/2");
        assert_eq!(c.at(1, 2)[0].label.to_string(), "η");
        assert_eq!(c.group_at(0, 0).to_string(), "Z_2");
        assert_eq!(c.group_at(1, 0).to_string(), "Z_2");
        assert_eq!(c.group_at(1, 4).to_string(), "Z/8");
        assert_eq!(c.group_at(1, 8).to_string(), "Z/16");
        assert_eq!(c.at(2, 2)[0].label.to_string(), "ζη");
        assert_eq!(c.at(3, 6)[0].label.to_string(), "η^3");
    }

    #[test]
    fn ko_matches_pattern() {
        let tbl = ko_table(-16, 16, 16).unwrap();
        let pattern = ["Z_2", "Z/2", "Z/2", "0", "Z_2", "0", "0", "0"];
        for i in -16..=16i64 {
            assert_eq!(tbl.get(i).unwrap().to_string(), pattern[i.rem_euclid(8) as usize], "stem {i}");
        }
    }

    #[test]
    fn sphere_p2_small_stems() {
        let tbl = homotopy_table(2, -9, 16, 16).unwrap();
        assert_eq!(tbl.get(0).unwrap().to_string(), "Z_2 ⊕ Z/2");
        assert_eq!(tbl.get(-1).unwrap().to_string(), "Z_2");
        assert_eq!(tbl.get(1).unwrap().to_string(), "(Z/2)^2");
        assert_eq!(tbl.get(2).unwrap().to_string(), "Z/2");
        assert_eq!(tbl.get(3).unwrap().to_string(), "Z/8");
        assert_eq!(tbl.get(7).unwrap().to_string(), "Z/16");
        assert_eq!(tbl.get(15).unwrap().to_string(), "Z/32");
        assert_eq!(tbl.get(-9).unwrap().to_string(), "Z/16");
        for i in [4, 5, 6, 12, 13, 14, -2, -3, -4] {
            assert!(tbl.get(i).unwrap().is_zero(), "stem {i}");
        }
    }

    #[test]
    fn sphere_p3() {
        let tbl = homotopy_table(3, -4, 40, 16).unwrap();
        assert_eq!(tbl.get(11).unwrap().to_string(), "Z/9");
        assert_eq!(tbl.get(3).unwrap().to_string(), "Z/3");
        assert_eq!(tbl.get(0).unwrap().to_string(), "Z_3");
        assert_eq!(tbl.get(-1).unwrap().to_string(), "Z_3");
        assert!(tbl.get(1).unwrap().is_zero());
    }

    #[test]
    fn psi_examples() {
        let r = psi_valuation_report(3, 1).unwrap();
        assert_eq!(r[0].valuation, 1);
        let r = psi_valuation_report(2, 4).unwrap();
        assert_eq!(r[0].valuation, 3);
        assert_eq!(r[3].valuation, 5);
        assert_eq!(r[3].cofactor_mod_p, 1);
        assert!(psi_valuation_report(2, 0).is_err());
    }

    #[test]
    fn rewrite_relations() {
        let x = Monomial::from_exps(&[(Gen::X, 1)]);
        assert_eq!(rewrite_xy(&x), eta_u(1, 2));
        let y = Monomial::from_exps(&[(Gen::Y, 1)]);
        assert_eq!(rewrite_xy(&y), eta_u(2, 2));
        // x^2 = y u^2
        let x2 = Monomial::from_exps(&[(Gen::X, 2)]);
        let yu2 = Monomial::from_exps(&[(Gen::Y, 1), (Gen::U, 2)]);
        assert_eq!(rewrite_xy(&x2), rewrite_xy(&yu2));
    }
}
