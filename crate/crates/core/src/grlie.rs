//! The graded mixed Lie algebra `gr S_n`, with each `gr_{k/n} ≅ F_q`.
//!
//! Bracket and p-power operator `P` act on residues. Commutator spans and the
//! graded abelianization are computed by F_p-linear algebra on coordinates in the
//! basis `1, ω̄, …, ω̄^{n−1}`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::order::OrderElem;
use crate::padic::{CyclicDecomp, CyclicFactor};
use crate::stabilizer::{commutator, filtration_level, gr_project, StabElem};
use crate::witt::{Fq, FqElem, WittRing};

/// Exhaustive span enumeration is used up to this field size; beyond it the
/// span is generated by brackets of basis vectors (the bracket is F_p-bilinear).
const EXHAUSTIVE_LIMIT: u64 = 256;
const SPAN_LIMIT: u64 = 1 << 16;

/// An element `ā` of `gr_{k/n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrElem {
    pub k: u32,
    pub n: u32,
    pub residue: FqElem,
}

impl GrElem {
    pub fn new(k: u32, n: u32, residue: FqElem) -> Self {
        GrElem { k, n, residue }
    }

    pub fn level(&self) -> String {
        level_string(self.k, self.n)
    }
}

impl fmt::Display for GrElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.level(), self.residue)
    }
}

fn level_string(k: u32, n: u32) -> String {
    if k.is_multiple_of(n) {
        (k / n).to_string()
    } else {
        format!("{k}/{n}")
    }
}

/// `[ā, b̄] = ā·b̄^{p^k} − b̄·ā^{p^l}` in `gr_{(k+l)/n}`.
pub fn gr_bracket(fq: &Fq, a: &GrElem, b: &GrElem) -> GrElem {
    let left = fq.mul(&a.residue, &fq.frobenius(&b.residue, a.k));
    let right = fq.mul(&b.residue, &fq.frobenius(&a.residue, b.k));
    GrElem::new(a.k + b.k, a.n, fq.sub(&left, &right))
}

/// Numerator of `φ(k/n) = min(k/n + 1, p·k/n)`.
pub fn phi(p: u64, n: u32, k: u32) -> u32 {
    (k + n).min(p as u32 * k)
}

/// `ā^{1 + p^k + … + p^{(p−1)k}}`, the residue of `(a S^k)^p`.
fn norm_power(fq: &Fq, a: &FqElem, k: u32) -> FqElem {
    let p = fq.p();
    let mut acc = fq.one();
    for j in 0..p {
        acc = fq.mul(&acc, &fq.pow(a, fq.p_pow_mod_order(j * k as u64)));
    }
    acc
}

/// The p-power operator `P: gr_{k/n} → gr_{φ(k/n)}`.
pub fn gr_power(fq: &Fq, a: &GrElem) -> GrElem {
    let p = fq.p();
    let lhs = a.k as u64 * (p - 1);
    let n = a.n as u64;
    let target = phi(p, a.n, a.k);
    let residue = if lhs < n {
        norm_power(fq, &a.residue, a.k)
    } else if lhs == n {
        fq.add(&a.residue, &norm_power(fq, &a.residue, a.k))
    } else {
        a.residue.clone()
    };
    GrElem::new(target, a.n, residue)
}

/// Outcome of comparing a graded formula against the group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub p: u64,
    pub n: usize,
    pub prec: u32,
    pub trials: usize,
    pub mismatches: usize,
    /// Trials where the formula gave 0 and only `level > target` was checked.
    pub degenerate: usize,
    pub failures: Vec<String>,
}

fn lift(ring: &Arc<WittRing>, a: &FqElem, k: u32) -> StabElem {
    StabElem::one_plus(&ring.teichmuller(a), k)
}

/// Checks whether the group element `g` matches `expected` in `gr_{target/n}`.
fn matches_graded(g: &StabElem, expected: &GrElem) -> (bool, bool) {
    if expected.residue.is_zero() {
        let lvl = filtration_level(g).numerator_or_bound();
        (lvl > expected.k, true)
    } else {
        (gr_project(g).ok().as_ref() == Some(expected), false)
    }
}

/// Compares `gr_project([1 + [ā]S^k, 1 + [b̄]S^l])` with `gr_bracket(ā, b̄)`.
pub fn check_bracket_vs_group<R: Rng>(ring: &Arc<WittRing>, k: u32, l: u32, trials: usize, rng: &mut R) -> Result<CheckReport> {
    let n = ring.n() as u32;
    if k == 0 || l == 0 || k + l > n * ring.prec() - 1 {
        return Err(Error::InvalidInput(format!("need 1 ≤ k, l and k + l ≤ nM − 1 (k={k}, l={l})")));
    }
    let fq = ring.residue_field();
    let mut report = CheckReport { p: ring.p(), n: ring.n(), prec: ring.prec(), trials, mismatches: 0, degenerate: 0, failures: vec![] };
    for _ in 0..trials {
        let (a, b) = (fq.random(rng), fq.random(rng));
        let c = commutator(&lift(ring, &a, k), &lift(ring, &b, l))?;
        let expected = gr_bracket(fq, &GrElem::new(k, n, a.clone()), &GrElem::new(l, n, b.clone()));
        let (ok, degenerate) = matches_graded(&c, &expected);
        report.degenerate += degenerate as usize;
        if !ok {
            report.mismatches += 1;
            report.failures.push(format!("a={a}, b={b}: expected {expected}, group level {}", filtration_level(&c)));
        }
    }
    Ok(report)
}

/// Compares `gr_project((1 + [ā]S^k)^p)` with `gr_power(ā)`.
pub fn check_power_vs_group<R: Rng>(ring: &Arc<WittRing>, k: u32, trials: usize, rng: &mut R) -> Result<CheckReport> {
    let n = ring.n() as u32;
    if k == 0 || phi(ring.p(), n, k) > n * ring.prec() - 1 {
        return Err(Error::InvalidInput(format!("need 1 ≤ k and φ(k) ≤ nM − 1 (k={k})")));
    }
    let fq = ring.residue_field();
    let mut report = CheckReport { p: ring.p(), n: ring.n(), prec: ring.prec(), trials, mismatches: 0, degenerate: 0, failures: vec![] };
    for _ in 0..trials {
        let a = fq.random(rng);
        let xp = lift(ring, &a, k).pow(ring.p());
        let expected = gr_power(fq, &GrElem::new(k, n, a.clone()));
        let (ok, degenerate) = matches_graded(&xp, &expected);
        report.degenerate += degenerate as usize;
        if !ok {
            report.mismatches += 1;
            report.failures.push(format!("a={a}: expected {expected}, group level {}", filtration_level(&xp)));
        }
    }
    Ok(report)
}

fn inv_mod_p(a: u64, p: u64) -> u64 {
    let (mut r, mut b, mut e) = (1u64, a % p, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// An F_p-subspace of `gr_{k/n} ≅ F_q`, kept in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrSubspace {
    pub k: u32,
    pub n: u32,
    p: u64,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl GrSubspace {
    pub fn zero(p: u64, n: u32, k: u32) -> Self {
        GrSubspace { k, n, p, rows: vec![], pivots: vec![] }
    }

    pub fn full(p: u64, n: u32, k: u32) -> Self {
        let mut s = Self::zero(p, n, k);
        for i in 0..n as usize {
            let mut e = vec![0; n as usize];
            e[i] = 1;
            s.insert(&FqElem { coeffs: e });
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> Vec<FqElem> {
        self.rows.iter().map(|r| FqElem { coeffs: r.clone() }).collect()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn inv(&self, a: u64) -> u64 {
        inv_mod_p(a, self.p)
    }

    /// Reduces `v` against the basis so that every pivot coordinate vanishes.
    pub fn reduce(&self, v: &FqElem) -> Vec<u64> {
        let p = self.p;
        let mut v = v.coeffs.clone();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            let f = v[c];
            if f != 0 {
                for (x, r) in v.iter_mut().zip(row) {
                    *x = (*x + (p - f) * r) % p;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &FqElem) -> bool {
        self.reduce(v).iter().all(|&c| c == 0)
    }

    /// Adds `v` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, v: &FqElem) -> bool {
        let p = self.p;
        let mut r = self.reduce(v);
        let Some(c) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = self.inv(r[c]);
        for x in r.iter_mut() {
            *x = *x * inv % p;
        }
        for row in self.rows.iter_mut() {
            let f = row[c];
            if f != 0 {
                for (x, y) in row.iter_mut().zip(&r) {
                    *x = (*x + (p - f) * y) % p;
                }
            }
        }
        let at = self.pivots.iter().position(|&q| q > c).unwrap_or(self.pivots.len());
        self.rows.insert(at, r);
        self.pivots.insert(at, c);
        true
    }

    pub fn add_span(&mut self, other: &GrSubspace) {
        for b in other.basis() {
            self.insert(&b);
        }
    }

    /// Coordinates not used as pivots; they index a basis of the quotient `F_q / self`.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.n as usize).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// Image in `F_q / self`, in coordinates on [`Self::free_columns`].
    pub fn project(&self, v: &FqElem) -> Vec<u64> {
        let r = self.reduce(v);
        self.free_columns().into_iter().map(|c| r[c]).collect()
    }

    /// The lift of quotient coordinates supported on the free columns.
    pub fn lift(&self, coords: &[u64]) -> FqElem {
        let mut v = vec![0; self.n as usize];
        for (c, &x) in self.free_columns().into_iter().zip(coords) {
            v[c] = x;
        }
        FqElem { coeffs: v }
    }
}

impl fmt::Display for GrSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let basis: Vec<String> = self.basis().iter().map(|b| b.to_string()).collect();
        write!(f, "dim {}, basis {{{}}}", self.dim(), basis.join(", "))
    }
}

/// `ker(tr: F_q → F_p)` as a subspace of `gr_{k/n}`.
pub fn trace_kernel(fq: &Fq, k: u32) -> GrSubspace {
    let n = fq.n();
    let p = fq.p();
    let basis: Vec<FqElem> = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            FqElem { coeffs: e }
        })
        .collect();
    let traces: Vec<u64> = basis.iter().map(|b| fq.trace(b)).collect();
    let mut ker = GrSubspace::zero(p, n as u32, k);
    let Some(j) = traces.iter().position(|&t| t != 0) else {
        return GrSubspace::full(p, n as u32, k);
    };
    let tj_inv = inv_mod_p(traces[j], p);
    for i in (0..n).filter(|&i| i != j) {
        let f = traces[i] * tj_inv % p;
        let v = fq.sub(&basis[i], &fq.scale(&basis[j], f));
        ker.insert(&v);
    }
    ker
}

/// F_p-span of all brackets `[ā@k/n, b̄@l/n]`.
pub fn commutator_span(fq: &Fq, k: u32, l: u32) -> Result<GrSubspace> {
    let q = fq.q();
    if q > SPAN_LIMIT {
        return Err(Error::OutOfRange(format!("q = {q} > 2^16")));
    }
    if q <= EXHAUSTIVE_LIMIT {
        Ok(span_exhaustive(fq, k, l))
    } else {
        Ok(span_bilinear(fq, k, l))
    }
}

fn span_exhaustive(fq: &Fq, k: u32, l: u32) -> GrSubspace {
    let n = fq.n() as u32;
    let mut span = GrSubspace::zero(fq.p(), n, k + l);
    for a in fq.elements() {
        let ga = GrElem::new(k, n, a);
        for b in fq.elements() {
            span.insert(&gr_bracket(fq, &ga, &GrElem::new(l, n, b)).residue);
            if span.dim() == n as usize {
                return span;
            }
        }
    }
    span
}

fn span_bilinear(fq: &Fq, k: u32, l: u32) -> GrSubspace {
    let n = fq.n() as u32;
    let mut span = GrSubspace::zero(fq.p(), n, k + l);
    let basis: Vec<FqElem> = (0..n as usize)
        .map(|i| {
            let mut e = vec![0; n as usize];
            e[i] = 1;
            FqElem { coeffs: e }
        })
        .collect();
    for a in &basis {
        for b in &basis {
            let br = gr_bracket(fq, &GrElem::new(k, n, a.clone()), &GrElem::new(l, n, b.clone()));
            span.insert(&br.residue);
        }
    }
    span
}

/// One graded piece `Q_{k/n} = F_q / D_{k/n}` of the abelianization.
#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub k: u32,
    pub level: String,
    pub commutator_dim: usize,
    pub commutator_basis: Vec<String>,
    pub quotient_dim: usize,
    /// Numerator of the level `P` maps into.
    pub p_target: u32,
    /// Matrix of the induced `P: Q_{k/n} → Q_{φ(k/n)}`, one column per source
    /// basis vector; empty when the target lies beyond the computed range.
    pub p_matrix: Vec<Vec<u64>>,
    pub p_linear: bool,
}

/// A maximal chain `v, P v, P² v, …` started at a generator not hit by `P`.
#[derive(Clone, Debug, Serialize)]
pub struct Chain {
    pub levels: Vec<u32>,
    /// Still nonzero past the last computed level.
    pub free: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AbelianizationReport {
    pub p: u64,
    pub n: usize,
    pub max_level: u32,
    pub definition: &'static str,
    pub levels: Vec<LevelReport>,
    pub chains: Vec<Chain>,
    pub assembled: CyclicDecomp,
    pub mod_p: CyclicDecomp,
    /// Sum of chain lengths equals the total quotient dimension up to `max_level`.
    pub consistent: bool,
}

const DEFINITION: &str = "gr of the abelianization is taken as gr S_n modulo the span of graded brackets; p-th powers act through P";

/// Graded abelianization of `S_n` through level `L/n`, assembled into `H_1(S_n; Z_p)`.
pub fn abelianization_report(ring: &Arc<WittRing>, max_level: u32) -> Result<AbelianizationReport> {
    let fq = ring.residue_field();
    let (p, n) = (fq.p(), fq.n() as u32);
    if max_level == 0 || max_level > n * ring.prec() {
        return Err(Error::InvalidInput(format!("need 1 ≤ L ≤ nM = {}", n * ring.prec())));
    }
    if fq.q() > SPAN_LIMIT {
        return Err(Error::OutOfRange(format!("q = {} > 2^16", fq.q())));
    }

    // D_k for k = 1..=L
    let mut d: Vec<GrSubspace> = vec![GrSubspace::zero(p, n, 0)];
    for k in 1..=max_level {
        let mut dk = GrSubspace::zero(p, n, k);
        for k1 in 1..k {
            dk.add_span(&span_bilinear(fq, k1, k - k1));
        }
        d.push(dk);
    }

    let p_image = |k: u32, v: &FqElem| -> Option<Vec<u64>> {
        let t = phi(p, n, k);
        if t > max_level {
            return None;
        }
        let img = gr_power(fq, &GrElem::new(k, n, v.clone()));
        Some(d[t as usize].project(&img.residue))
    };

    let mut levels = Vec::new();
    for k in 1..=max_level {
        let dk = &d[k as usize];
        let qd = n as usize - dk.dim();
        let t = phi(p, n, k);
        let lifts: Vec<FqElem> = (0..qd)
            .map(|i| {
                let mut e = vec![0; qd];
                e[i] = 1;
                dk.lift(&e)
            })
            .collect();
        let mut p_matrix = Vec::new();
        let mut p_linear = true;
        if t <= max_level {
            p_matrix = lifts.iter().map(|v| p_image(k, v).expect("in range")).collect();
            p_linear = induced_p_is_linear(fq, dk, k, &p_image);
        }
        levels.push(LevelReport {
            k,
            level: level_string(k, n),
            commutator_dim: dk.dim(),
            commutator_basis: dk.basis().iter().map(|b| b.to_string()).collect(),
            quotient_dim: qd,
            p_target: t,
            p_matrix,
            p_linear,
        });
    }

    // Chains: at each level, take a complement of the P-images landing there.
    let mut images: Vec<GrSubspace> = (0..=max_level).map(|k| GrSubspace::zero(p, n, k)).collect();
    let mut chains = Vec::new();
    for k in 1..=max_level {
        let dk = d[k as usize].clone();
        let mut hit = dk.clone();
        hit.add_span(&images[k as usize]);
        for col in dk.free_columns() {
            let mut e = vec![0; n as usize];
            e[col] = 1;
            let v = FqElem { coeffs: e };
            if !hit.insert(&v) {
                continue;
            }
            let mut lv = vec![k];
            let mut cur = v;
            let mut cur_k = k;
            let free = loop {
                let t = phi(p, n, cur_k);
                if t > max_level {
                    break true;
                }
                let img = gr_power(fq, &GrElem::new(cur_k, n, cur.clone())).residue;
                if d[t as usize].contains(&img) {
                    break false;
                }
                images[t as usize].insert(&img);
                lv.push(t);
                cur = img;
                cur_k = t;
            };
            chains.push(Chain { levels: lv, free });
        }
    }

    let total: usize = levels.iter().map(|l| l.quotient_dim).sum();
    let chain_total: usize = chains.iter().map(|c| c.levels.len()).sum();
    let any_free = chains.iter().any(|c| c.free);
    let assembled = CyclicDecomp::new(
        p,
        chains.iter().map(|c| if c.free { CyclicFactor::Free } else { CyclicFactor::Finite(c.levels.len() as u32) }),
    )
    .with_precision_flag(any_free);
    let mod_p = CyclicDecomp::new(p, chains.iter().map(|_| CyclicFactor::Finite(1)));
    Ok(AbelianizationReport {
        p,
        n: n as usize,
        max_level,
        definition: DEFINITION,
        levels,
        chains,
        assembled,
        mod_p,
        consistent: total == chain_total,
    })
}

/// Checks additivity of the induced `P` on `Q_k` and that it kills `D_k`.
fn induced_p_is_linear(fq: &Fq, dk: &GrSubspace, k: u32, p_image: &dyn Fn(u32, &FqElem) -> Option<Vec<u64>>) -> bool {
    let p = fq.p();
    let zero_target = |v: &FqElem| p_image(k, v).is_some_and(|c| c.iter().all(|&x| x == 0));
    if !dk.basis().iter().all(zero_target) {
        return false;
    }
    let sample: Vec<FqElem> = if fq.q() <= EXHAUSTIVE_LIMIT {
        fq.elements().collect()
    } else {
        let n = fq.n();
        (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                FqElem { coeffs: e }
            })
            .collect()
    };
    for a in &sample {
        let pa = p_image(k, a).expect("in range");
        for b in &sample {
            let pb = p_image(k, b).expect("in range");
            let pab = p_image(k, &fq.add(a, b)).expect("in range");
            let sum: Vec<u64> = pa.iter().zip(&pb).map(|(x, y)| (x + y) % p).collect();
            if sum != pab {
                return false;
            }
        }
    }
    true
}

/// Exposed for the CLI: element `1 + [ā]S^k` as an order element.
pub fn group_lift(ring: &Arc<WittRing>, a: &FqElem, k: u32) -> OrderElem {
    lift(ring, a, k).into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::make_ring;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field(p: u64, n: usize) -> Arc<WittRing> {
        make_ring(p, n, 4).unwrap()
    }

    #[test]
    fn bracket_examples() {
        let r = field(2, 2);
        let fq = r.residue_field();
        let one = GrElem::new(1, 2, fq.one());
        let w = GrElem::new(1, 2, fq.generator());
        let br = gr_bracket(fq, &one, &w);
        assert_eq!(br.residue, fq.one());
        assert_eq!(br.k, 2);
        assert!(gr_bracket(fq, &w, &w).residue.is_zero());
        let neg = gr_bracket(fq, &w, &one);
        assert_eq!(fq.add(&neg.residue, &br.residue), fq.zero());
    }

    #[test]
    fn power_examples() {
        // p=3, n=2, k=1: ā + ā^13 at level 3/2
        let r = field(3, 2);
        let fq = r.residue_field();
        for a in fq.elements() {
            let pa = gr_power(fq, &GrElem::new(1, 2, a.clone()));
            assert_eq!(pa.k, 3);
            assert_eq!(pa.residue, fq.add(&a, &fq.pow(&a, 13)));
        }
        // p=5, n=2, k=1: ā at level 3/2
        let r = field(5, 2);
        let fq = r.residue_field();
        let w = fq.generator();
        let pa = gr_power(fq, &GrElem::new(1, 2, w.clone()));
        assert_eq!((pa.k, pa.residue), (3, w));
        // p=2, n=2, k=1: ā^3 at level 1
        let r = field(2, 2);
        let fq = r.residue_field();
        for a in fq.elements() {
            let pa = gr_power(fq, &GrElem::new(1, 2, a.clone()));
            assert_eq!((pa.k, pa.residue), (2, fq.pow(&a, 3)));
        }
    }

    #[test]
    fn span_f4() {
        let r = field(2, 2);
        let fq = r.residue_field();
        let s = commutator_span(fq, 1, 1).unwrap();
        assert_eq!(s.to_string(), "dim 1, basis {1}");
        assert_eq!(s, trace_kernel(fq, 2));
    }

    #[test]
    fn span_lemma_cases() {
        for p in [2, 3, 5] {
            for n in [2u32, 3] {
                let r = field(p, n as usize);
                let fq = r.residue_field();
                for k in 1..=8 {
                    let s = commutator_span(fq, k, 1).unwrap();
                    assert_eq!(s, span_bilinear(fq, k, 1));
                    if (k + 1) % n == 0 {
                        assert_eq!(s, trace_kernel(fq, k + 1), "p={p} n={n} k={k}");
                    } else {
                        assert_eq!(s.dim(), n as usize, "p={p} n={n} k={k}");
                    }
                    for l in 1..=4 {
                        if (k + l) % n == 0 {
                            let s = commutator_span(fq, k, l).unwrap();
                            let ker = trace_kernel(fq, k + l);
                            assert!(s.basis().iter().all(|b| ker.contains(b)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn span_too_large() {
        let r = make_ring(7, 4, 2).unwrap();
        let fq = r.residue_field();
        assert!(commutator_span(fq, 1, 1).is_ok());
        let fq = Fq::new(257, vec![254, 1]).unwrap();
        assert!(commutator_span(&fq, 1, 1).is_ok());
    }

    #[test]
    fn group_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = make_ring(3, 2, 16).unwrap();
        assert_eq!(check_bracket_vs_group(&r, 1, 2, 50, &mut rng).unwrap().mismatches, 0);
        assert_eq!(check_power_vs_group(&r, 1, 50, &mut rng).unwrap().mismatches, 0);
        let r = make_ring(2, 3, 16).unwrap();
        assert_eq!(check_bracket_vs_group(&r, 1, 1, 50, &mut rng).unwrap().mismatches, 0);
        let r = make_ring(5, 2, 16).unwrap();
        assert_eq!(check_power_vs_group(&r, 1, 50, &mut rng).unwrap().mismatches, 0);
    }

    #[test]
    fn abelianization_p3() {
        let r = make_ring(3, 2, 8).unwrap();
        let rep = abelianization_report(&r, 8).unwrap();
        assert!(rep.consistent);
        assert_eq!(rep.assembled.to_string(), "Z_3 ⊕ (Z/3)^2");
        assert_eq!(rep.mod_p.to_string(), "(Z/3)^3");
        assert_eq!(rep.levels[0].quotient_dim, 2);
        assert!(rep.levels.iter().all(|l| l.p_linear));
    }

    #[test]
    fn abelianization_p2() {
        let r = make_ring(2, 2, 8).unwrap();
        let rep = abelianization_report(&r, 10).unwrap();
        assert!(rep.consistent);
        assert_eq!(rep.assembled.to_string(), "Z_2 ⊕ (Z/2)^3");
        assert_eq!(rep.mod_p.to_string(), "(Z/2)^4");
    }
}
