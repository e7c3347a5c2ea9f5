//! Cohomology of `Z_p`-lattices with a single operator: cyclic groups via the
//! 2-periodic resolution, `Z_p` via `0 → Λ →T→ Λ → Z_p`, and `H^s(G_1, (E_1)_t)`
//! assembled from the short exact sequences
//! `0 → H^{s−1}(F)_ψ → H^s(G_1) → H^s(F)^ψ → 0`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{identity, mat_mul, smith_normal_form, CyclicDecomp, CyclicFactor, IntMatrix, PadicParams};
use crate::witt::make_ring;

/// A free `Z_p`-module of finite rank with the action of one group element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZpModuleWithOperator {
    params: Arc<PadicParams>,
    operator: IntMatrix,
}

impl ZpModuleWithOperator {
    pub fn new(params: &Arc<PadicParams>, operator: IntMatrix) -> Result<Self> {
        let r = operator.len();
        if operator.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidInput("operator matrix must be square".into()));
        }
        let operator = operator.iter().map(|row| row.iter().map(|x| params.reduce(x)).collect()).collect();
        Ok(ZpModuleWithOperator { params: params.clone(), operator })
    }

    /// Rank one, acting by multiplication with `lambda`.
    pub fn scalar(params: &Arc<PadicParams>, lambda: impl Into<BigInt>) -> Self {
        Self::new(params, vec![vec![lambda.into()]]).expect("1x1 is square")
    }

    pub fn trivial(params: &Arc<PadicParams>, rank: usize) -> Self {
        Self::new(params, identity(rank)).expect("identity is square")
    }

    pub fn rank(&self) -> usize {
        self.operator.len()
    }

    pub fn params(&self) -> &Arc<PadicParams> {
        &self.params
    }

    pub fn operator(&self) -> &IntMatrix {
        &self.operator
    }

    fn minus_identity(&self) -> IntMatrix {
        let m = self.params.modulus();
        self.operator
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, x)| if i == j { (x - 1u32).mod_floor(m) } else { x.clone() })
                    .collect()
            })
            .collect()
    }

    fn power(&self, e: u64) -> IntMatrix {
        let m = self.params.modulus();
        let mut acc = identity(self.rank());
        for _ in 0..e {
            acc = mat_mul(&acc, &self.operator, m);
        }
        acc
    }

    /// `1 + g + … + g^{m−1}`.
    fn norm(&self, order: u64) -> IntMatrix {
        let m = self.params.modulus();
        let r = self.rank();
        let mut acc = vec![vec![BigInt::zero(); r]; r];
        let mut g = identity(r);
        for _ in 0..order {
            for (ar, gr) in acc.iter_mut().zip(&g) {
                for (a, x) in ar.iter_mut().zip(gr) {
                    *a = (&*a + x).mod_floor(m);
                }
            }
            g = mat_mul(&g, &self.operator, m);
        }
        acc
    }
}

/// A cohomology group with one label per cyclic factor, in the factor order of `decomp`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyGroup {
    pub decomp: CyclicDecomp,
    pub generator_labels: Vec<String>,
}

fn factor_order(a: &CyclicFactor, b: &CyclicFactor) -> Ordering {
    match (a, b) {
        (CyclicFactor::Free, CyclicFactor::Free) => Ordering::Equal,
        (CyclicFactor::Free, _) => Ordering::Less,
        (_, CyclicFactor::Free) => Ordering::Greater,
        (CyclicFactor::Finite(x), CyclicFactor::Finite(y)) => y.cmp(x),
    }
}

impl CohomologyGroup {
    pub fn zero(p: u64) -> Self {
        CohomologyGroup { decomp: CyclicDecomp::zero(p), generator_labels: vec![] }
    }

    /// Builds from labeled factors; trivial factors are dropped.
    pub fn from_parts(p: u64, parts: Vec<(CyclicFactor, String)>, at_precision: bool) -> Self {
        let mut parts: Vec<_> = parts.into_iter().filter(|(f, _)| *f != CyclicFactor::Finite(0)).collect();
        parts.sort_by(|a, b| factor_order(&a.0, &b.0));
        let decomp = CyclicDecomp::new(p, parts.iter().map(|(f, _)| *f)).with_precision_flag(at_precision);
        CohomologyGroup { decomp, generator_labels: parts.into_iter().map(|(_, l)| l).collect() }
    }

    fn labeled(decomp: &CyclicDecomp, prefix: &str) -> Self {
        let parts = decomp.factors().iter().enumerate().map(|(i, f)| (*f, format!("{prefix}[{i}]"))).collect();
        Self::from_parts(decomp.p, parts, decomp.at_precision)
    }

    pub fn is_zero(&self) -> bool {
        self.decomp.is_zero()
    }
}

impl fmt::Display for CohomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.decomp)?;
        if !self.generator_labels.is_empty() {
            write!(f, " {{{}}}", self.generator_labels.join(", "))?;
        }
        Ok(())
    }
}

/// `ker(b) / im(a)` for maps of free modules `Z_p^r →a→ Z_p^r →b→ Z_p^r` with `b·a = 0`.
fn homology(a: &IntMatrix, b: &IntMatrix, params: &PadicParams) -> CyclicDecomp {
    let m = params.modulus();
    let snf = smith_normal_form(b, params);
    let kcols = snf.kernel_columns();
    let caveat = snf.zero_count() > 0;
    if kcols.is_empty() {
        return CyclicDecomp::zero(params.p());
    }
    // coordinates of im(a) in the basis given by the columns of v
    let coords = mat_mul(&snf.v_inv, a, m);
    let restricted: IntMatrix = kcols.iter().map(|&i| coords[i].clone()).collect();
    let coker = smith_normal_form(&restricted, params).cokernel();
    let free = coker.free_rank() > 0;
    coker.with_precision_flag(caveat && free)
}

fn kernel(a: &IntMatrix, params: &PadicParams) -> CyclicDecomp {
    smith_normal_form(a, params).kernel()
}

/// `(H⁰, H¹)` of `Z_p` acting through the operator: kernel and cokernel of `g − 1`.
pub fn iwasawa_cohomology(m: &ZpModuleWithOperator) -> (CohomologyGroup, CohomologyGroup) {
    let a = m.minus_identity();
    let snf = smith_normal_form(&a, &m.params);
    (
        CohomologyGroup::labeled(&snf.kernel(), "ker(g-1)"),
        CohomologyGroup::labeled(&snf.cokernel(), "coker(g-1)"),
    )
}

/// `H^s(C_m; M)` through the periodic resolution `… →N→ Λ →g−1→ Λ →N→ Λ →g−1→ Λ`.
pub fn cyclic_cohomology(order: u64, m: &ZpModuleWithOperator, s: u32) -> Result<CohomologyGroup> {
    if order == 0 {
        return Err(Error::InvalidAction("group order must be positive".into()));
    }
    if m.power(order) != identity(m.rank()) {
        return Err(Error::InvalidAction(format!("operator^{order} is not the identity")));
    }
    let g1 = m.minus_identity();
    let nm = m.norm(order);
    let decomp = match s {
        0 => kernel(&g1, &m.params),
        s if s % 2 == 1 => homology(&g1, &nm, &m.params),
        _ => homology(&nm, &g1, &m.params),
    };
    Ok(CohomologyGroup::labeled(&decomp, &format!("H^{s}")))
}

/// The pieces of `0 → H^{s−1}(F)_ψ → H^s(G_1) → H^s(F)^ψ → 0` at one bidegree.
#[derive(Clone, Debug, Serialize)]
pub struct G1Assembly {
    pub p: u64,
    pub s: u32,
    pub t: i64,
    pub coker_prev: CyclicDecomp,
    pub ker: CyclicDecomp,
    pub total: CohomologyGroup,
}

fn generator_power(p: u64, k: i64, prec: u32) -> Result<BigInt> {
    let params = PadicParams::new(p, prec)?;
    let psi = if p == 2 { 3 } else { p + 1 };
    Ok(params.int(psi).pow_signed(k)?.value().clone())
}

/// A generator of `F = F_p^× ⊂ Z_p^×` (Teichmüller lift), raised to `k`; `−1` at `p = 2`.
fn finite_part_action(p: u64, k: i64, prec: u32) -> Result<BigInt> {
    let params = PadicParams::new(p, prec)?;
    if p == 2 {
        return Ok(if k.rem_euclid(2) == 0 { BigInt::one() } else { params.reduce(&BigInt::from(-1)) });
    }
    let ring = make_ring(p, 1, prec)?;
    let g = ring.teichmuller(&ring.residue_field().generator()).to_padic()?;
    Ok(g.pow_signed(k)?.value().clone())
}

/// `H^s(G_1, (E_1)_t)` with `(E_1)_t = Z_p·u^{−t/2}`, returned with its ker/coker provenance.
pub fn g1_exact_sequence(p: u64, s: u32, t: i64, prec: u32) -> Result<G1Assembly> {
    let params = PadicParams::new(p, prec)?;
    if t.rem_euclid(2) == 1 {
        let z = CyclicDecomp::zero(p);
        return Ok(G1Assembly { p, s, t, coker_prev: z.clone(), ker: z, total: CohomologyGroup::zero(p) });
    }
    let k = -t / 2;
    let f_order = if p == 2 { 2 } else { p - 1 };
    let fmod = ZpModuleWithOperator::scalar(&params, finite_part_action(p, k, prec)?);
    let h_f = |deg: u32| cyclic_cohomology(f_order, &fmod, deg);
    let psi = ZpModuleWithOperator::scalar(&params, generator_power(p, k, prec)?);

    // ψ acts on H^0(F) ⊆ Z_p u^k by ψ^k and trivially on the groups in positive degree.
    let psi_parts = |deg: u32| -> Result<(CyclicDecomp, CyclicDecomp)> {
        let h = h_f(deg)?;
        if deg == 0 && h.decomp.free_rank() == 1 {
            let (h0, h1) = iwasawa_cohomology(&psi);
            Ok((h0.decomp, h1.decomp))
        } else {
            Ok((h.decomp.clone(), h.decomp))
        }
    };

    let ker = psi_parts(s)?.0;
    let coker_prev = if s == 0 { CyclicDecomp::zero(p) } else { psi_parts(s - 1)?.1 };

    let mono = if k == 0 { "1".to_string() } else { format!("u^{k}") };
    let mut parts = Vec::new();
    for f in coker_prev.factors() {
        parts.push((*f, format!("coker(ψ−1) on H^{}(F)·{mono}", s.saturating_sub(1))));
    }
    for f in ker.factors() {
        parts.push((*f, format!("ker(ψ−1) on H^{s}(F)·{mono}")));
    }
    let caveat = coker_prev.at_precision || ker.at_precision;
    let free = parts.iter().any(|(f, _)| *f == CyclicFactor::Free);
    let total = CohomologyGroup::from_parts(p, parts, caveat && free);
    Ok(G1Assembly { p, s, t, coker_prev, ker, total })
}

pub fn g1_cohomology_e1(p: u64, s: u32, t: i64, prec: u32) -> Result<CohomologyGroup> {
    Ok(g1_exact_sequence(p, s, t, prec)?.total)
}
