//! The unit group `S_n = O_n^×`, its strict part `S_n = F_{1/n}`, and the
//! maps built on it: the filtration, graded projection, torsion, the reduced
//! norm and the splitting `S_n ≅ S_n^1 × P(Z_p^×)` for `p ∤ n`.
//!
//! "Equals 1" always means equal mod `S^{nM}`.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grlie::GrElem;
use crate::order::{OrderElem, SValuation};
use crate::padic::{nth_root_one_unit, unit_inverse, PadicInt};
use crate::witt::{FqElem, WittElem, WittRing};

pub type FiltrationLevel = SValuation;

/// A unit of `O_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabElem {
    x: OrderElem,
}

impl StabElem {
    pub fn new(x: OrderElem) -> Result<Self> {
        if !x.is_unit() {
            return Err(Error::NonUnitInOrder);
        }
        Ok(StabElem { x })
    }

    pub fn one(ring: &Arc<WittRing>) -> Self {
        StabElem { x: OrderElem::one(ring) }
    }

    /// `1 + w S^k` for `k ≥ 1`.
    pub fn one_plus(w: &WittElem, k: u32) -> Self {
        let ring = w.ring();
        assert!(k >= 1, "1 + w S^0 need not be a unit");
        StabElem {
            x: &OrderElem::one(ring) + &OrderElem::monomial(w, k),
        }
    }

    pub fn underlying(&self) -> &OrderElem {
        &self.x
    }

    pub fn into_inner(self) -> OrderElem {
        self.x
    }

    pub fn ring(&self) -> &Arc<WittRing> {
        self.x.ring()
    }

    /// Membership in the strict group: `x ≡ 1 mod S`.
    pub fn is_strict(&self) -> bool {
        let fq = self.ring().residue_field();
        self.x.residue() == fq.one()
    }

    pub fn is_one(&self) -> bool {
        self.x.is_one()
    }

    pub fn mul(&self, o: &StabElem) -> Result<StabElem> {
        Ok(StabElem { x: self.x.order_mul(&o.x)? })
    }

    pub fn inverse(&self) -> StabElem {
        StabElem {
            x: self.x.unit_inverse_order().expect("units invert"),
        }
    }

    pub fn pow(&self, e: u64) -> StabElem {
        StabElem { x: self.x.pow(e) }
    }

    pub fn random_strict<R: Rng>(ring: &Arc<WittRing>, rng: &mut R) -> Self {
        let y = OrderElem::random(ring, rng);
        StabElem {
            x: &OrderElem::one(ring) + &(&y * &OrderElem::s(ring)),
        }
    }

    /// Random unit `1 + y S^k`, i.e. a random element of `F_{k/n}`.
    pub fn random_in_level<R: Rng>(ring: &Arc<WittRing>, k: u32, rng: &mut R) -> Self {
        let y = OrderElem::random(ring, rng);
        StabElem {
            x: &OrderElem::one(ring) + &(&y * &OrderElem::s_pow(ring, k)),
        }
    }
}

impl fmt::Display for StabElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.x.fmt(f)
    }
}

/// `[x, y] = x y x⁻¹ y⁻¹`.
pub fn commutator(x: &StabElem, y: &StabElem) -> Result<StabElem> {
    let xy = x.mul(y)?;
    xy.mul(&x.inverse())?.mul(&y.inverse())
}

/// `v(x − 1)`; `x ∈ F_{k/n}` iff the level is at least `k/n`.
pub fn filtration_level(x: &StabElem) -> FiltrationLevel {
    (&x.x - &OrderElem::one(x.ring())).s_valuation()
}

/// Image of `x = 1 + a S^k + …` in `gr_{k/n} ≅ F_q`, namely `(k/n, ā)`.
pub fn gr_project(x: &StabElem) -> Result<GrElem> {
    let level = filtration_level(x);
    match level.k {
        None => Err(Error::TrivialElement),
        Some(0) => Err(Error::NotStrict),
        Some(k) => {
            let diff = &x.x - &OrderElem::one(x.ring());
            Ok(GrElem::new(k, level.n, diff.digit(k)))
        }
    }
}

/// Default search bound `lcm(q − 1, p^⌈log_p(nM)⌉)`, capped at 1000.
pub fn default_order_bound(ring: &WittRing) -> u64 {
    let target = ring.n() as u64 * ring.prec() as u64;
    let mut pk = 1u64;
    while pk < target {
        pk *= ring.p();
    }
    ((ring.q() - 1).max(1)).lcm(&pk).min(1000)
}

/// Least `m ≤ bound` with `x^m = 1` at precision `S^{nM}`.
pub fn element_order(x: &StabElem, bound: u64) -> Option<u64> {
    let mut cur = x.clone();
    for m in 1..=bound {
        if cur.is_one() {
            return Some(m);
        }
        cur = cur.mul(x).expect("same ring");
    }
    None
}

/// The element `a = −½(1 + ωS)` of order 3 in `S_2` at `p = 3`.
pub fn order3_element(ring: &Arc<WittRing>) -> Result<StabElem> {
    if ring.p() != 3 || ring.n() != 2 {
        return Err(Error::WrongParameters("p=3, n=2".into()));
    }
    let half = unit_inverse(&ring.params().int(2))?;
    let minus_half = OrderElem::from_witt(&ring.from_padic(&half.neg()));
    let base = &OrderElem::one(ring) + &(&OrderElem::omega(ring) * &OrderElem::s(ring));
    let a = StabElem::new(&minus_half * &base)?;
    if !a.pow(3).is_one() {
        return Err(Error::PrecisionFailure("a^3 ≠ 1".into()));
    }
    Ok(a)
}

/// Teichmüller lift `F_q^× → S_n`.
pub fn torus_embed(ring: &Arc<WittRing>, x: &FqElem) -> Result<StabElem> {
    if x.is_zero() {
        return Err(Error::NonUnit("0 is not in F_q^×".into()));
    }
    StabElem::new(OrderElem::from_witt(&ring.teichmuller(x)))
}

/// Matrix of right multiplication by `x` on the left `W`-basis `1, S, …, S^{n−1}`:
/// row `i` holds the coordinates of `S^i · x`.
pub fn right_mult_matrix(x: &OrderElem) -> Vec<Vec<WittElem>> {
    let ring = x.ring();
    (0..ring.n())
        .map(|i| (&OrderElem::s_pow(ring, i as u32) * x).coeffs().to_vec())
        .collect()
}

fn determinant(m: &[Vec<WittElem>], ring: &Arc<WittRing>) -> WittElem {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = ring.zero();
    permute(m, ring, &mut perm, 0, true, &mut total);
    total
}

fn permute(m: &[Vec<WittElem>], ring: &Arc<WittRing>, perm: &mut Vec<usize>, k: usize, even: bool, acc: &mut WittElem) {
    let n = perm.len();
    if k == n {
        let mut t = ring.one();
        for (i, &j) in perm.iter().enumerate() {
            if m[i][j].is_zero() {
                return;
            }
            t = t.mul(&m[i][j]);
        }
        *acc = if even { acc.add(&t) } else { acc.sub(&t) };
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permute(m, ring, perm, k + 1, if i == k { even } else { !even }, acc);
        perm.swap(k, i);
    }
}

/// Reduced norm: the determinant of right multiplication, which lands in `Z_p`.
pub fn reduced_norm(x: &OrderElem) -> Result<WittElem> {
    let det = determinant(&right_mult_matrix(x), x.ring());
    det.to_padic()?;
    Ok(det)
}

pub fn reduced_norm_padic(x: &OrderElem) -> Result<PadicInt> {
    reduced_norm(x)?.to_padic()
}

/// Splits a strict unit as `x = x1 · z` with `z` central in the pro-`p` part of
/// `Z_p^×` and `N(x1) = 1`.
pub fn s1_split(x: &StabElem) -> Result<(StabElem, PadicInt)> {
    let ring = x.ring().clone();
    if (ring.n() as u64).is_multiple_of(ring.p()) {
        return Err(Error::SplittingUndefined);
    }
    if !x.is_strict() {
        return Err(Error::NotStrict);
    }
    let norm = reduced_norm_padic(&x.x)?;
    let z = nth_root_one_unit(&norm, ring.n() as u64)?;
    let z_inv = OrderElem::from_witt(&ring.from_padic(&unit_inverse(&z)?));
    let x1 = StabElem::new(&x.x * &z_inv)?;
    Ok((x1, z))
}

/// Membership in `K = ker(S_2^1 → F_9 → F_9/F_3)` at `p = 3`, `n = 2`.
pub fn in_k(x: &StabElem) -> Result<bool> {
    let ring = x.ring();
    if ring.p() != 3 || ring.n() != 2 {
        return Err(Error::WrongParameters("p=3, n=2".into()));
    }
    if !x.is_strict() {
        return Err(Error::NotInS21);
    }
    let (_, z) = s1_split(x)?;
    if !z.value().eq(&1.into()) {
        return Err(Error::NotInS21);
    }
    let level = filtration_level(x);
    if level.k != Some(1) {
        return Ok(true);
    }
    let g = gr_project(x)?;
    Ok(ring.residue_field().is_in_prime_field(&g.residue))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::make_ring;
    use num_bigint::BigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn commutator_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = make_ring(3, 2, 8).unwrap();
        let x = StabElem::random_strict(&r, &mut rng);
        assert!(commutator(&x, &x).unwrap().is_one());
        assert!(commutator(&x, &StabElem::one(&r)).unwrap().is_one());
    }

    #[test]
    fn level_examples() {
        for (p, n) in [(3, 2), (2, 3), (5, 2)] {
            let r = make_ring(p, n, 8).unwrap();
            let x = StabElem::one_plus(&r.omega(), 1);
            assert_eq!(filtration_level(&x).k, Some(1));
            let y = StabElem::new(&OrderElem::one(&r) + &OrderElem::from_witt(&r.omega().scale(&BigInt::from(p)))).unwrap();
            assert_eq!(filtration_level(&y).k, Some(n as u32));
            assert_eq!(filtration_level(&y).to_string(), "1");
        }
        for n in 1..=4 {
            let r = make_ring(2, n, 8).unwrap();
            let minus_one = StabElem::new(OrderElem::from_int(&r, -1)).unwrap();
            assert_eq!(filtration_level(&minus_one).to_string(), "1");
            assert_eq!(minus_one, StabElem::new(&OrderElem::one(&r) - &OrderElem::s_pow(&r, n as u32)).unwrap());
            assert_eq!(element_order(&minus_one, 10), Some(2));
        }
    }

    #[test]
    fn gr_project_examples() {
        let r = make_ring(3, 2, 8).unwrap();
        let fq = r.residue_field();
        let g = gr_project(&StabElem::one_plus(&r.omega(), 1)).unwrap();
        assert_eq!((g.k, g.n, g.residue.clone()), (1, 2, fq.generator()));
        assert_eq!(gr_project(&StabElem::one(&r)), Err(Error::TrivialElement));
        assert_eq!(gr_project(&StabElem::new(OrderElem::omega(&r)).unwrap()), Err(Error::NotStrict));
    }

    #[test]
    fn gr_project_is_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (p, n) in [(3, 2), (2, 3), (5, 2), (2, 2)] {
            let r = make_ring(p, n, 8).unwrap();
            let fq = r.residue_field();
            for k in 1..=4 {
                for _ in 0..5 {
                    let x = StabElem::random_in_level(&r, k, &mut rng);
                    let y = StabElem::random_in_level(&r, k, &mut rng);
                    let gx = gr_project(&x).ok().filter(|g| g.k == k);
                    let gy = gr_project(&y).ok().filter(|g| g.k == k);
                    let (Some(gx), Some(gy)) = (gx, gy) else { continue };
                    let sum = fq.add(&gx.residue, &gy.residue);
                    let xy = x.mul(&y).unwrap();
                    if sum.is_zero() {
                        assert!(filtration_level(&xy).numerator_or_bound() > k);
                    } else {
                        let g = gr_project(&xy).unwrap();
                        assert_eq!((g.k, g.residue), (k, sum));
                    }
                }
            }
        }
    }

    #[test]
    fn order3() {
        let r = make_ring(3, 2, 16).unwrap();
        let a = order3_element(&r).unwrap();
        assert!(a.pow(3).is_one());
        assert!(!a.is_one());
        assert!(!a.pow(2).is_one());
        assert_eq!(element_order(&a, 100), Some(3));
        let g = gr_project(&a).unwrap();
        assert_eq!((g.k, g.n), (1, 2));
        assert_eq!(g.residue, r.residue_field().generator());
        assert!(order3_element(&make_ring(5, 2, 4).unwrap()).is_err());
    }

    #[test]
    fn torsion_free_at_p5_n2() {
        let r = make_ring(5, 2, 16).unwrap();
        let x = StabElem::one_plus(&r.omega(), 1);
        assert_eq!(element_order(&x, 24), None);
    }

    #[test]
    fn torus() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = make_ring(3, 2, 8).unwrap();
        let fq = r.residue_field();
        assert!(torus_embed(&r, &fq.one()).unwrap().is_one());
        assert!(torus_embed(&r, &fq.zero()).is_err());
        for _ in 0..10 {
            let (a, b) = (fq.random(&mut rng), fq.random(&mut rng));
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let ta = torus_embed(&r, &a).unwrap();
            assert!(ta.pow(r.q() - 1).is_one());
            assert_eq!(torus_embed(&r, &fq.mul(&a, &b)).unwrap(), ta.mul(&torus_embed(&r, &b).unwrap()).unwrap());
        }
    }

    #[test]
    fn norm_examples() {
        let r = make_ring(3, 2, 10).unwrap();
        let pp = r.params();
        // N(S) = det [[0,1],[p,0]] = -p
        assert_eq!(reduced_norm_padic(&OrderElem::s(&r)).unwrap(), pp.int(-3));
        // central z: N(z) = z^2
        let z = OrderElem::from_int(&r, 4);
        assert_eq!(reduced_norm_padic(&z).unwrap(), pp.int(16));
        let a = order3_element(&make_ring(3, 2, 16).unwrap()).unwrap();
        assert!(reduced_norm(a.underlying()).unwrap().is_one());
    }

    #[test]
    fn norm_matches_2x2_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = make_ring(5, 2, 10).unwrap();
        let p = BigInt::from(5);
        for _ in 0..10 {
            let x = OrderElem::random(&r, &mut rng);
            let (a, b) = (x.coeff(0), x.coeff(1));
            let expect = a.mul(&a.frobenius()).sub(&b.mul(&b.frobenius()).scale(&p));
            assert_eq!(reduced_norm(&x).unwrap(), expect);
        }
    }

    #[test]
    fn split_examples() {
        let r = make_ring(3, 2, 12).unwrap();
        let x = StabElem::new(OrderElem::from_int(&r, 4)).unwrap();
        let (x1, z) = s1_split(&x).unwrap();
        assert!(x1.is_one());
        assert_eq!(z, r.params().int(4));

        let r16 = make_ring(3, 2, 16).unwrap();
        let a = order3_element(&r16).unwrap();
        let (x1, z) = s1_split(&a).unwrap();
        assert_eq!(z, r16.params().int(1));
        assert_eq!(x1, a);

        assert_eq!(s1_split(&StabElem::one(&make_ring(2, 2, 4).unwrap())), Err(Error::SplittingUndefined));
    }

    #[test]
    fn in_k_examples() {
        let r = make_ring(3, 2, 16).unwrap();
        let a = order3_element(&r).unwrap();
        assert!(in_k(&StabElem::one(&r)).unwrap());
        assert!(!in_k(&a).unwrap());
        let w = StabElem::new(OrderElem::omega(&r)).unwrap();
        let b = commutator(&a, &w).unwrap();
        assert!(in_k(&b).unwrap());
        let c = commutator(&a, &b).unwrap();
        assert!(in_k(&c).unwrap());
        let central = StabElem::new(OrderElem::from_int(&r, 4)).unwrap();
        assert_eq!(in_k(&central), Err(Error::NotInS21));
    }

    #[test]
    fn default_bound() {
        let r = make_ring(3, 2, 16).unwrap();
        // nM = 32 ≤ 81: lcm(8, 81)
        assert_eq!(default_order_bound(&r), 648);
        let r = make_ring(7, 4, 16).unwrap();
        assert_eq!(default_order_bound(&r), 1000);
    }
}
