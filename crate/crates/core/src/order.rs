//! The maximal order `O_n = W(F_q)⟨S⟩ / (S^n = p, S w = σ(w) S)`, truncated at `S^{nM}`.
//!
//! Elements are stored as `Σ_{i<n} a_i S^i` with the Witt coefficients on the
//! left. Every coefficient is kept mod `p^M`, which makes the element exact
//! mod `S^{nM}`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::padic::{bigint_from_json, bigint_to_json};
use crate::witt::{make_ring, FqElem, WittElem, WittRing};

/// `v(x) = k/n`, or the marker for an element that vanishes mod `S^{nM}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SValuation {
    /// `None` means zero at precision (`v ≥ bound/n`).
    pub k: Option<u32>,
    pub n: u32,
    pub bound: u32,
}

impl SValuation {
    pub fn is_zero_at_precision(&self) -> bool {
        self.k.is_none()
    }

    /// Valuation numerator, with the precision bound standing in for zero.
    pub fn numerator_or_bound(&self) -> u32 {
        self.k.unwrap_or(self.bound)
    }
}

impl fmt::Display for SValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k {
            None => write!(f, "≥ {}/{} (zero at precision)", self.bound, self.n),
            Some(k) if k % self.n == 0 => write!(f, "{}", k / self.n),
            Some(k) => write!(f, "{}/{}", k, self.n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderElem {
    ring: Arc<WittRing>,
    a: Vec<WittElem>,
}

impl OrderElem {
    pub fn new(ring: &Arc<WittRing>, a: Vec<WittElem>) -> Self {
        assert_eq!(a.len(), ring.n());
        OrderElem { ring: ring.clone(), a }
    }

    pub fn zero(ring: &Arc<WittRing>) -> Self {
        Self::new(ring, vec![ring.zero(); ring.n()])
    }

    pub fn from_witt(w: &WittElem) -> Self {
        let ring = w.ring();
        let mut a = vec![ring.zero(); ring.n()];
        a[0] = w.clone();
        Self::new(ring, a)
    }

    pub fn from_int(ring: &Arc<WittRing>, c: impl Into<BigInt>) -> Self {
        Self::from_witt(&ring.from_int(c))
    }

    pub fn one(ring: &Arc<WittRing>) -> Self {
        Self::from_int(ring, 1)
    }

    pub fn omega(ring: &Arc<WittRing>) -> Self {
        Self::from_witt(&ring.omega())
    }

    /// The uniformizer `S`.
    pub fn s(ring: &Arc<WittRing>) -> Self {
        Self::s_pow(ring, 1)
    }

    /// `S^k = p^{k div n} S^{k mod n}`.
    pub fn s_pow(ring: &Arc<WittRing>, k: u32) -> Self {
        let n = ring.n() as u32;
        let mut a = vec![ring.zero(); ring.n()];
        a[(k % n) as usize] = ring.from_int(BigInt::from(ring.p()).pow(k / n));
        Self::new(ring, a)
    }

    /// `w S^k` for a Witt coefficient `w`.
    pub fn monomial(w: &WittElem, k: u32) -> Self {
        let ring = w.ring();
        let n = ring.n() as u32;
        let mut a = vec![ring.zero(); ring.n()];
        a[(k % n) as usize] = w.scale(&BigInt::from(ring.p()).pow(k / n));
        Self::new(ring, a)
    }

    pub fn ring(&self) -> &Arc<WittRing> {
        &self.ring
    }

    pub fn coeffs(&self) -> &[WittElem] {
        &self.a
    }

    pub fn coeff(&self, i: usize) -> &WittElem {
        &self.a[i]
    }

    /// Exponent `nM` of the truncation `S^{nM}`.
    pub fn precision(&self) -> u32 {
        self.ring.n() as u32 * self.ring.prec()
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|w| w.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.a[0].is_one() && self.a[1..].iter().all(|w| w.is_zero())
    }

    fn check(&self, o: &OrderElem) -> Result<()> {
        self.a[0].check_ring(&o.a[0])
    }

    pub fn try_add(&self, o: &OrderElem) -> Result<OrderElem> {
        self.check(o)?;
        Ok(Self::new(&self.ring, self.a.iter().zip(&o.a).map(|(x, y)| x.add(y)).collect()))
    }

    pub fn try_sub(&self, o: &OrderElem) -> Result<OrderElem> {
        self.check(o)?;
        Ok(Self::new(&self.ring, self.a.iter().zip(&o.a).map(|(x, y)| x.sub(y)).collect()))
    }

    pub fn negate(&self) -> OrderElem {
        Self::new(&self.ring, self.a.iter().map(|x| x.neg()).collect())
    }

    /// Product in `O_n`: `(a_i S^i)(b_j S^j) = a_i σ^i(b_j) S^{i+j}` with `S^n = p`.
    pub fn order_mul(&self, o: &OrderElem) -> Result<OrderElem> {
        self.check(o)?;
        let n = self.ring.n();
        let p = BigInt::from(self.ring.p());
        let mut c = vec![self.ring.zero(); n];
        for j in 0..n {
            if o.a[j].is_zero() {
                continue;
            }
            for i in 0..n {
                if self.a[i].is_zero() {
                    continue;
                }
                let mut t = self.a[i].mul(&o.a[j].frobenius_pow(i));
                if i + j >= n {
                    t = t.scale(&p);
                }
                let k = (i + j) % n;
                c[k] = c[k].add(&t);
            }
        }
        Ok(Self::new(&self.ring, c))
    }

    /// Left multiplication by a Witt scalar.
    pub fn scale_left(&self, w: &WittElem) -> OrderElem {
        Self::new(&self.ring, self.a.iter().map(|x| w.mul(x)).collect())
    }

    pub fn pow(&self, mut e: u64) -> OrderElem {
        let mut result = Self::one(&self.ring);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// `min_i (i + n·ν_p(a_i))`: the index of the first nonzero `S`-digit.
    pub fn s_valuation(&self) -> SValuation {
        let n = self.ring.n() as u32;
        let k = self
            .a
            .iter()
            .enumerate()
            .filter_map(|(i, w)| w.valuation().map(|v| i as u32 + n * v))
            .min();
        SValuation {
            k,
            n,
            bound: self.precision(),
        }
    }

    pub fn is_unit(&self) -> bool {
        self.s_valuation().k == Some(0)
    }

    /// Two-sided inverse of a unit, by Newton iteration `y ← y(2 − xy)`.
    pub fn unit_inverse_order(&self) -> Result<OrderElem> {
        if !self.is_unit() {
            return Err(Error::NonUnitInOrder);
        }
        let two = Self::from_int(&self.ring, 2);
        let mut y = Self::from_witt(&self.a[0].inverse()?);
        let max_steps = 34 - self.precision().leading_zeros();
        for _ in 0..=max_steps {
            let e = self * &y;
            if e.is_one() {
                break;
            }
            y = &y * &(&two - &e);
        }
        if !(self * &y).is_one() || !(&y * self).is_one() {
            return Err(Error::PrecisionFailure("Newton inversion did not converge".into()));
        }
        Ok(y)
    }

    /// Teichmüller `S`-digits: `x ≡ Σ_{j<count} [x_j] S^j mod S^count`, where
    /// digit `i + jn` is the `j`-th Teichmüller digit of `a_i`.
    pub fn s_digits(&self, count: u32) -> Vec<FqElem> {
        let n = self.ring.n() as u32;
        let count = count.min(self.precision());
        let per_coeff: Vec<Vec<FqElem>> = self.a.iter().map(|w| w.teich_digits(self.ring.prec())).collect();
        (0..count)
            .map(|k| per_coeff[(k % n) as usize][(k / n) as usize].clone())
            .collect()
    }

    pub fn from_s_digits(ring: &Arc<WittRing>, digits: &[FqElem]) -> OrderElem {
        let n = ring.n();
        let mut per_coeff: Vec<Vec<FqElem>> = vec![Vec::new(); n];
        for (k, d) in digits.iter().enumerate() {
            per_coeff[k % n].push(d.clone());
        }
        Self::new(
            ring,
            per_coeff.iter().map(|ds| WittElem::from_teich_digits(ring, ds)).collect(),
        )
    }

    /// The residue of the `S^k` digit, i.e. the image of `x S^{-k}` in `O_n/(S)`.
    pub fn digit(&self, k: u32) -> FqElem {
        let n = self.ring.n() as u32;
        let w = &self.a[(k % n) as usize];
        let j = k / n;
        if j >= self.ring.prec() {
            return self.ring.residue_field().zero();
        }
        w.teich_digits(j + 1).pop().expect("at least one digit")
    }

    /// `Σ a_i S^i ↦ Σ σ(a_i) S^i`, which equals conjugation by `S`.
    pub fn galois_sigma(&self) -> OrderElem {
        Self::new(&self.ring, self.a.iter().map(|w| w.frobenius()).collect())
    }

    /// Reduction mod `S`.
    pub fn residue(&self) -> FqElem {
        self.a[0].residue()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.ring.p(),
            "n": self.ring.n(),
            "M": self.ring.prec(),
            "coeffs": self.a.iter().map(|w| w.coords().iter().map(bigint_to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    /// Reads the element format `{"p","n","M","coeffs":[[..]..]}`; `coeffs[i][j]`
    /// is the coordinate of `ω^j` in `a_i`. A ring is built when none matching is given.
    pub fn from_json(v: &Value, ring: Option<&Arc<WittRing>>) -> Result<OrderElem> {
        let get = |k: &str| {
            v.get(k)
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::InvalidInput(format!("missing integer field {k:?}")))
        };
        let (p, n, m) = (get("p")?, get("n")? as usize, get("M")? as u32);
        let ring = match ring {
            Some(r) if r.p() == p && r.n() == n && r.prec() == m => r.clone(),
            Some(_) => return Err(Error::IncompatibleRings),
            None => make_ring(p, n, m)?,
        };
        let rows = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("missing coeffs".into()))?;
        if rows.len() != n {
            return Err(Error::InvalidInput(format!("expected {n} coefficient rows")));
        }
        let mut a = Vec::with_capacity(n);
        for row in rows {
            let row = row
                .as_array()
                .filter(|r| r.len() == n)
                .ok_or_else(|| Error::InvalidInput(format!("each coefficient row needs {n} entries")))?;
            let coords = row.iter().map(bigint_from_json).collect::<Result<Vec<_>>>()?;
            a.push(ring.elem(coords));
        }
        Ok(Self::new(&ring, a))
    }

    pub fn random<R: rand::Rng>(ring: &Arc<WittRing>, rng: &mut R) -> OrderElem {
        Self::new(ring, (0..ring.n()).map(|_| ring.random(rng)).collect())
    }
}

impl fmt::Display for OrderElem {
    /// Prints in the expression syntax accepted by the element parser.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, w) in self.a.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            terms.push(match i {
                0 => format!("({w})"),
                1 => format!("({w})*S"),
                _ => format!("({w})*S^{i}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Add for &OrderElem {
    type Output = OrderElem;
    fn add(self, o: &OrderElem) -> OrderElem {
        self.try_add(o).expect("incompatible rings")
    }
}

impl Sub for &OrderElem {
    type Output = OrderElem;
    fn sub(self, o: &OrderElem) -> OrderElem {
        self.try_sub(o).expect("incompatible rings")
    }
}

impl Mul for &OrderElem {
    type Output = OrderElem;
    fn mul(self, o: &OrderElem) -> OrderElem {
        self.order_mul(o).expect("incompatible rings")
    }
}

impl Neg for &OrderElem {
    type Output = OrderElem;
    fn neg(self) -> OrderElem {
        self.negate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rings(prec: u32) -> Vec<Arc<WittRing>> {
        let mut out = Vec::new();
        for p in [2, 3, 5] {
            for n in 1..=4 {
                out.push(make_ring(p, n, prec).unwrap());
            }
        }
        out
    }

    #[test]
    fn defining_relations() {
        let r = make_ring(3, 2, 8).unwrap();
        let s = OrderElem::s(&r);
        let w = OrderElem::omega(&r);
        let sw = &s * &w;
        // S ω = ω^3 S
        assert_eq!(sw.coeff(1), &r.omega().pow(3));
        assert!(sw.coeff(0).is_zero());
        for r in rings(8) {
            let s = OrderElem::s(&r);
            assert_eq!(s.pow(r.n() as u64), OrderElem::from_int(&r, r.p()));
        }
    }

    #[test]
    fn conjugation_by_s_is_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for r in rings(6) {
            let s = OrderElem::s(&r);
            for _ in 0..20 {
                let x = OrderElem::random(&r, &mut rng);
                assert!((&(&s * &x) - &(&x.galois_sigma() * &s)).is_zero());
            }
            assert_eq!(s.galois_sigma(), s);
            assert_eq!(OrderElem::omega(&r).galois_sigma(), OrderElem::from_witt(&r.omega().pow(r.p())));
        }
    }

    #[test]
    fn valuation_examples() {
        for r in rings(6) {
            let n = r.n() as u32;
            assert_eq!(OrderElem::s(&r).s_valuation().k, Some(1));
            assert_eq!(OrderElem::s(&r).s_valuation().n, n);
            assert_eq!(OrderElem::from_int(&r, r.p()).s_valuation().k, Some(n));
            assert_eq!(OrderElem::omega(&r).s_valuation().k, Some(0));
            assert!(OrderElem::zero(&r).s_valuation().is_zero_at_precision());
        }
        let r = make_ring(3, 2, 4).unwrap();
        assert_eq!(OrderElem::s(&r).s_valuation().to_string(), "1/2");
        assert_eq!(OrderElem::from_int(&r, 3).s_valuation().to_string(), "1");
    }

    #[test]
    fn inverse_examples() {
        let r = make_ring(3, 2, 8).unwrap();
        let one = OrderElem::one(&r);
        assert_eq!(one.unit_inverse_order().unwrap(), one);
        let x = &one - &(&OrderElem::omega(&r) * &OrderElem::s(&r));
        let y = x.unit_inverse_order().unwrap();
        assert!((&x * &y).is_one());
        assert!((&y * &x).is_one());
        let w = OrderElem::omega(&r);
        assert_eq!(w.unit_inverse_order().unwrap(), OrderElem::from_witt(&r.omega().pow(r.q() - 2)));
        assert_eq!(OrderElem::s(&r).unit_inverse_order(), Err(Error::NonUnitInOrder));
    }

    #[test]
    fn invertible_iff_valuation_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for r in rings(6) {
            for k in 0..4 {
                let x = &OrderElem::random(&r, &mut rng) * &OrderElem::s_pow(&r, k);
                let v = x.s_valuation().k;
                match x.unit_inverse_order() {
                    Ok(y) => {
                        assert_eq!(v, Some(0));
                        assert!((&x * &y).is_one());
                    }
                    Err(e) => {
                        assert_ne!(v, Some(0));
                        assert_eq!(e, Error::NonUnitInOrder);
                    }
                }
            }
        }
    }

    #[test]
    fn ring_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for r in rings(6) {
            for _ in 0..5 {
                let x = OrderElem::random(&r, &mut rng);
                let y = OrderElem::random(&r, &mut rng);
                let z = OrderElem::random(&r, &mut rng);
                assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
                assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
                assert_eq!(&OrderElem::one(&r) * &x, x);
                let sx = x.galois_sigma();
                assert_eq!((&x * &y).galois_sigma(), &sx * &y.galois_sigma());
                let mut t = x.clone();
                for _ in 0..r.n() {
                    t = t.galois_sigma();
                }
                assert_eq!(t, x);
            }
        }
    }

    #[test]
    fn valuation_is_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for r in rings(8) {
            for _ in 0..10 {
                let x = &OrderElem::random(&r, &mut rng) * &OrderElem::s_pow(&r, rng_k(&mut rng));
                let y = &OrderElem::random(&r, &mut rng) * &OrderElem::s_pow(&r, rng_k(&mut rng));
                let (vx, vy, vxy) = (x.s_valuation().k, y.s_valuation().k, (&x * &y).s_valuation().k);
                if let (Some(a), Some(b)) = (vx, vy) {
                    if a + b < x.precision() {
                        assert_eq!(vxy, Some(a + b));
                    }
                }
            }
        }
    }

    fn rng_k(rng: &mut ChaCha8Rng) -> u32 {
        use rand::Rng;
        rng.gen_range(0..5)
    }

    #[test]
    fn digit_examples() {
        let r = make_ring(3, 2, 4).unwrap();
        let fq = r.residue_field();
        let d = OrderElem::s(&r).s_digits(4);
        assert_eq!(d, vec![fq.zero(), fq.one(), fq.zero(), fq.zero()]);
        let d = OrderElem::from_int(&r, 3).s_digits(4);
        assert_eq!(d, vec![fq.zero(), fq.zero(), fq.one(), fq.zero()]);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for r in rings(5) {
            let x = OrderElem::random(&r, &mut rng);
            let digits = x.s_digits(x.precision());
            assert_eq!(OrderElem::from_s_digits(&r, &digits), x);
            for (k, d) in digits.iter().enumerate().step_by(3) {
                assert_eq!(&x.digit(k as u32), d);
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = make_ring(3, 2, 16).unwrap();
        let x = OrderElem::random(&r, &mut rng);
        let v = x.to_json();
        assert_eq!(v["p"], 3);
        assert_eq!(v["coeffs"].as_array().unwrap().len(), 2);
        assert_eq!(OrderElem::from_json(&v, Some(&r)).unwrap(), x);
        let fresh = OrderElem::from_json(&v, None).unwrap();
        assert_eq!(fresh.coeffs()[0].coords(), x.coeffs()[0].coords());
    }

    #[test]
    fn ring_mismatch() {
        let a = OrderElem::one(&make_ring(3, 2, 8).unwrap());
        let b = OrderElem::one(&make_ring(5, 2, 8).unwrap());
        assert_eq!(a.order_mul(&b), Err(Error::IncompatibleRings));
    }
}
