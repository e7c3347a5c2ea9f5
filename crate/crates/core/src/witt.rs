//! Truncated Witt vectors `W(F_q) / p^M` presented on the power basis of a
//! Teichmüller generator `ω`, together with the residue field `F_q`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::padic::{mod_inverse, nu_p, prime_factors, PadicInt, PadicParams};

/// Conway polynomials, coefficients from the constant term up (monic).
const CONWAY: &[(u64, &[u64])] = &[
    (2, &[1, 1]),
    (2, &[1, 1, 1]),
    (2, &[1, 1, 0, 1]),
    (2, &[1, 1, 0, 0, 1]),
    (2, &[1, 0, 1, 0, 0, 1]),
    (2, &[1, 1, 0, 1, 1, 0, 1]),
    (2, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (2, &[1, 0, 1, 1, 1, 0, 0, 0, 1]),
    (3, &[1, 1]),
    (3, &[2, 2, 1]),
    (3, &[1, 2, 0, 1]),
    (3, &[2, 0, 0, 2, 1]),
    (3, &[1, 2, 0, 0, 0, 1]),
    (5, &[3, 1]),
    (5, &[2, 4, 1]),
    (5, &[3, 3, 0, 1]),
    (5, &[2, 4, 4, 0, 1]),
    (7, &[4, 1]),
    (7, &[3, 6, 1]),
    (7, &[4, 0, 6, 1]),
    (7, &[3, 4, 5, 0, 1]),
    (11, &[9, 1]),
    (11, &[2, 7, 1]),
    (13, &[11, 1]),
    (13, &[2, 12, 1]),
];

pub fn conway_polynomial(p: u64, n: usize) -> Option<&'static [u64]> {
    CONWAY
        .iter()
        .find(|(q, c)| *q == p && c.len() == n + 1)
        .map(|(_, c)| *c)
}

/// Above this size the residue field skips its log tables.
const TABLE_LIMIT: u64 = 1 << 16;

/// An element of `F_q` in coordinates on the basis `1, ω̄, …, ω̄^{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElem {
    pub coeffs: Vec<u64>,
}

impl FqElem {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mono = match j {
                0 => String::new(),
                1 => "w".to_string(),
                _ => format!("w^{j}"),
            };
            terms.push(match (c, j) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}{mono}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join("+"))
        }
    }
}

/// The residue field `F_p[Y]/(g(Y))`, where `Y` maps to the generator `ω̄`.
#[derive(Debug)]
pub struct Fq {
    p: u64,
    n: usize,
    q: u64,
    /// Monic modulus, constant term first, length `n + 1`.
    modulus: Vec<u64>,
    exp: Vec<u64>,
    log: Vec<u64>,
}

impl Fq {
    /// Builds the field; fails unless `modulus` is irreducible with `Y` primitive.
    pub fn new(p: u64, modulus: Vec<u64>) -> Result<Self> {
        let n = modulus.len() - 1;
        if n == 0 || modulus[n] % p != 1 {
            return Err(Error::InvalidPolynomial("modulus must be monic of degree ≥ 1".into()));
        }
        let q = p.checked_pow(n as u32).ok_or_else(|| Error::OutOfRange(format!("{p}^{n}")))?;
        let mut f = Fq {
            p,
            n,
            q,
            modulus: modulus.iter().map(|c| c % p).collect(),
            exp: Vec::new(),
            log: Vec::new(),
        };
        let y = f.generator();
        // Y has order exactly q-1  <=>  modulus is irreducible and primitive
        if f.pow(&y, (q - 1) as u128) != f.one() {
            return Err(Error::InvalidPolynomial("reduction is not irreducible and primitive".into()));
        }
        for r in prime_factors(q - 1) {
            if f.pow(&y, ((q - 1) / r) as u128) == f.one() {
                return Err(Error::InvalidPolynomial("reduction is not primitive".into()));
            }
        }
        if q <= TABLE_LIMIT {
            let mut exp = Vec::with_capacity((q - 1) as usize);
            let mut log = vec![0u64; q as usize];
            let mut x = f.one();
            for e in 0..(q - 1) {
                let idx = f.index(&x);
                exp.push(idx);
                log[idx as usize] = e;
                x = f.mul_poly(&x, &y);
            }
            f.exp = exp;
            f.log = log;
        }
        Ok(f)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn zero(&self) -> FqElem {
        FqElem { coeffs: vec![0; self.n] }
    }

    pub fn one(&self) -> FqElem {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i64) -> FqElem {
        let mut z = self.zero();
        z.coeffs[0] = c.rem_euclid(self.p as i64) as u64;
        z
    }

    /// `ω̄`, the distinguished generator of `F_q^×`.
    pub fn generator(&self) -> FqElem {
        let mut z = self.zero();
        if self.n == 1 {
            z.coeffs[0] = (self.p - self.modulus[0] % self.p) % self.p;
        } else {
            z.coeffs[1] = 1;
        }
        z
    }

    pub fn elem(&self, coeffs: &[i64]) -> FqElem {
        let mut z = self.zero();
        for (i, c) in coeffs.iter().enumerate().take(self.n) {
            z.coeffs[i] = c.rem_euclid(self.p as i64) as u64;
        }
        z
    }

    /// Encodes an element as `Σ c_i p^i`.
    pub fn index(&self, x: &FqElem) -> u64 {
        x.coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn from_index(&self, mut idx: u64) -> FqElem {
        let mut z = self.zero();
        for c in z.coeffs.iter_mut() {
            *c = idx % self.p;
            idx /= self.p;
        }
        z
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.q).map(|i| self.from_index(i))
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FqElem {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x + y) % self.p).collect(),
        }
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FqElem {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| (x + self.p - y) % self.p)
                .collect(),
        }
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        self.sub(&self.zero(), a)
    }

    pub fn scale(&self, a: &FqElem, c: u64) -> FqElem {
        FqElem {
            coeffs: a.coeffs.iter().map(|x| (x * (c % self.p)) % self.p).collect(),
        }
    }

    fn mul_poly(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let n = self.n;
        let p = self.p;
        let mut prod = vec![0u64; 2 * n - 1];
        for i in 0..n {
            if a.coeffs[i] == 0 {
                continue;
            }
            for j in 0..n {
                prod[i + j] = (prod[i + j] + a.coeffs[i] * b.coeffs[j]) % p;
            }
        }
        for d in (n..2 * n - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            for i in 0..n {
                prod[d - n + i] = (prod[d - n + i] + c * (p - self.modulus[i])) % p;
            }
            prod[d] = 0;
        }
        prod.truncate(n);
        FqElem { coeffs: prod }
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        if self.exp.is_empty() {
            return self.mul_poly(a, b);
        }
        if a.is_zero() || b.is_zero() {
            return self.zero();
        }
        let la = self.log[self.index(a) as usize];
        let lb = self.log[self.index(b) as usize];
        self.from_index(self.exp[((la + lb) % (self.q - 1)) as usize])
    }

    pub fn pow(&self, a: &FqElem, e: u128) -> FqElem {
        if e == 0 {
            return self.one();
        }
        if a.is_zero() {
            return self.zero();
        }
        let e = ((e - 1) % (self.q - 1) as u128) as u64 + 1;
        if !self.exp.is_empty() {
            let la = self.log[self.index(a) as usize] as u128;
            return self.from_index(self.exp[((la * e as u128) % (self.q - 1) as u128) as usize]);
        }
        let mut result = self.one();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul_poly(&result, &base);
            }
            base = self.mul_poly(&base, &base);
            e >>= 1;
        }
        result
    }

    /// `a^(p^k)`.
    pub fn frobenius(&self, a: &FqElem, k: u32) -> FqElem {
        self.pow(a, self.p_pow_mod_order(k as u64))
    }

    /// `p^k` reduced to a positive exponent representative modulo `q - 1`.
    pub fn p_pow_mod_order(&self, k: u64) -> u128 {
        let m = (self.q - 1) as u128;
        if m == 0 {
            return 1;
        }
        let mut r = 1u128 % m;
        for _ in 0..k {
            r = (r * self.p as u128) % m;
        }
        if r == 0 {
            m
        } else {
            r
        }
    }

    pub fn inverse(&self, a: &FqElem) -> Result<FqElem> {
        if a.is_zero() {
            return Err(Error::NonUnit("0 in F_q".into()));
        }
        Ok(self.pow(a, (self.q - 2) as u128))
    }

    /// Discrete log to base `ω̄`.
    pub fn log(&self, a: &FqElem) -> Option<u64> {
        if a.is_zero() {
            return None;
        }
        if !self.log.is_empty() {
            return Some(self.log[self.index(a) as usize]);
        }
        let g = self.generator();
        let mut x = self.one();
        for e in 0..self.q - 1 {
            if &x == a {
                return Some(e);
            }
            x = self.mul_poly(&x, &g);
        }
        None
    }

    /// Field trace to `F_p`.
    pub fn trace(&self, a: &FqElem) -> u64 {
        let mut s = self.zero();
        let mut x = a.clone();
        for _ in 0..self.n {
            s = self.add(&s, &x);
            x = self.frobenius(&x, 1);
        }
        debug_assert!(s.coeffs[1..].iter().all(|&c| c == 0));
        s.coeffs[0]
    }

    pub fn is_in_prime_field(&self, a: &FqElem) -> bool {
        a.coeffs[1..].iter().all(|&c| c == 0)
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> FqElem {
        FqElem {
            coeffs: (0..self.n).map(|_| rng.gen_range(0..self.p)).collect(),
        }
    }
}

/// `W(F_{p^n}) / p^M` with its Teichmüller generator and Frobenius lift.
#[derive(Debug)]
pub struct WittRing {
    params: Arc<PadicParams>,
    n: usize,
    q: u64,
    /// The lifted Conway (or user) polynomial the ring was built from.
    defining_poly: Vec<BigInt>,
    /// Minimal polynomial of `ω` over `Z/p^M`, monic, constant term first.
    omega_poly: Vec<BigInt>,
    /// `frobenius_powers[i][j]`: coordinates of `σ^i(ω^j)`, for `0 ≤ i ≤ n`.
    frobenius_powers: Vec<Vec<Vec<BigInt>>>,
    residue_field: Fq,
    /// Coordinates of `ω^e`, `0 ≤ e < q - 1`, when `q` is small.
    teich_table: Vec<Vec<BigInt>>,
}

impl PartialEq for WittRing {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.n == other.n && self.omega_poly == other.omega_poly
    }
}

impl Eq for WittRing {}

/// Builds `W(F_{p^n}) / p^M` from the embedded Conway polynomial table.
pub fn make_ring(p: u64, n: usize, prec: u32) -> Result<Arc<WittRing>> {
    let params = PadicParams::new(p, prec)?;
    let poly = conway_polynomial(p, n).ok_or(Error::UnsupportedField { p, n })?;
    WittRing::with_polynomial(params, poly.iter().map(|&c| c as i64).collect())
}

fn poly_mulmod(a: &[BigInt], b: &[BigInt], modulus: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let n = modulus.len() - 1;
    let mut prod = vec![BigInt::zero(); 2 * n - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            prod[i + j] += x * y;
        }
    }
    for d in (n..2 * n - 1).rev() {
        let c = std::mem::take(&mut prod[d]);
        if c.is_zero() {
            continue;
        }
        for i in 0..n {
            prod[d - n + i] -= &c * &modulus[i];
        }
    }
    prod.truncate(n);
    prod.iter().map(|x| x.mod_floor(m)).collect()
}

fn poly_powmod(a: &[BigInt], mut e: BigInt, modulus: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let n = modulus.len() - 1;
    let mut result = vec![BigInt::zero(); n];
    result[0] = BigInt::one();
    let mut base = a.to_vec();
    while !e.is_zero() {
        if e.is_odd() {
            result = poly_mulmod(&result, &base, modulus, m);
        }
        base = poly_mulmod(&base, &base, modulus, m);
        e >>= 1;
    }
    result
}

/// Solves `A x = b` over `Z/p^M` for `A` invertible mod `p`.
#[allow(clippy::needless_range_loop)]
fn solve_unit_system(a: &[Vec<BigInt>], b: &[BigInt], m: &BigInt) -> Result<Vec<BigInt>> {
    let n = b.len();
    let mut aug: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| row.iter().cloned().chain(std::iter::once(bi.clone())).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| mod_inverse(&aug[r][col], m).is_some())
            .ok_or_else(|| Error::PrecisionFailure("singular basis change".into()))?;
        aug.swap(col, piv);
        let inv = mod_inverse(&aug[col][col], m).expect("unit pivot");
        for x in aug[col].iter_mut() {
            *x = (&*x * &inv).mod_floor(m);
        }
        for r in 0..n {
            if r == col || aug[r][col].is_zero() {
                continue;
            }
            let f = aug[r][col].clone();
            for c in 0..=n {
                let t = &f * &aug[col][c];
                aug[r][c] = (&aug[r][c] - t).mod_floor(m);
            }
        }
    }
    Ok(aug.into_iter().map(|row| row[n].clone()).collect())
}

impl WittRing {
    /// Builds the ring from a monic integer polynomial whose reduction mod `p`
    /// is irreducible and primitive (constant term first).
    pub fn with_polynomial(params: Arc<PadicParams>, poly: Vec<i64>) -> Result<Arc<WittRing>> {
        let p = params.p();
        let n = poly.len().checked_sub(1).filter(|&d| d >= 1).ok_or_else(|| {
            Error::InvalidPolynomial("degree must be at least 1".into())
        })?;
        if poly[n] != 1 {
            return Err(Error::InvalidPolynomial("polynomial must be monic".into()));
        }
        let reduced: Vec<u64> = poly.iter().map(|c| c.rem_euclid(p as i64) as u64).collect();
        // validates irreducibility and primitivity of the reduction
        let x_field = Fq::new(p, reduced)?;
        let q = x_field.q();
        let m = params.modulus().clone();
        let lifted: Vec<BigInt> = poly.iter().map(|&c| BigInt::from(c).mod_floor(&m)).collect();

        // ω = lim X^{q^k}: each step gains one p-adic digit of the Teichmüller lift.
        let mut x = vec![BigInt::zero(); n];
        if n == 1 {
            x[0] = (-&lifted[0]).mod_floor(&m);
        } else {
            x[1] = BigInt::one();
        }
        let qb = BigInt::from(q);
        let mut stable = false;
        for _ in 0..=params.prec() + 1 {
            let next = poly_powmod(&x, qb.clone(), &lifted, &m);
            if next == x {
                stable = true;
                break;
            }
            x = next;
        }
        if !stable {
            return Err(Error::PrecisionFailure("Teichmüller iteration did not stabilize".into()));
        }

        // basis change: columns ω^0..ω^{n-1} in the X-basis, then solve for ω^n
        let mut powers = Vec::with_capacity(n + 1);
        let mut cur = vec![BigInt::zero(); n];
        cur[0] = BigInt::one();
        for _ in 0..=n {
            powers.push(cur.clone());
            cur = poly_mulmod(&cur, &x, &lifted, &m);
        }
        let basis: Vec<Vec<BigInt>> = (0..n).map(|r| (0..n).map(|c| powers[c][r].clone()).collect()).collect();
        let c = solve_unit_system(&basis, &powers[n], &m)?;
        let mut omega_poly: Vec<BigInt> = c.iter().map(|ci| (-ci).mod_floor(&m)).collect();
        omega_poly.push(BigInt::one());

        let residue_field = Fq::new(p, omega_poly.iter().map(|c| (c % p).to_u64().unwrap()).collect())?;

        // σ^i(ω^j) = ω^{j p^i}
        let mut omega = vec![BigInt::zero(); n];
        if n == 1 {
            omega[0] = (-&omega_poly[0]).mod_floor(&m);
        } else {
            omega[1] = BigInt::one();
        }
        let mut frobenius_powers = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let step = poly_powmod(&omega, BigInt::from(p).pow(i as u32), &omega_poly, &m);
            let mut cols = Vec::with_capacity(n);
            let mut cur = vec![BigInt::zero(); n];
            cur[0] = BigInt::one();
            for _ in 0..n {
                cols.push(cur.clone());
                cur = poly_mulmod(&cur, &step, &omega_poly, &m);
            }
            frobenius_powers.push(cols);
        }

        let mut teich_table = Vec::new();
        if q <= TABLE_LIMIT {
            let mut cur = vec![BigInt::zero(); n];
            cur[0] = BigInt::one();
            for _ in 0..q - 1 {
                teich_table.push(cur.clone());
                cur = poly_mulmod(&cur, &omega, &omega_poly, &m);
            }
            if cur[0] != BigInt::one() || cur[1..].iter().any(|c| !c.is_zero()) {
                return Err(Error::PrecisionFailure("ω^(q-1) ≠ 1".into()));
            }
        }

        let ring = WittRing {
            params,
            n,
            q,
            defining_poly: lifted,
            omega_poly,
            frobenius_powers,
            residue_field,
            teich_table,
        };
        if ring.frobenius_powers[n] != ring.frobenius_powers[0] {
            return Err(Error::PrecisionFailure("σ^n ≠ id".into()));
        }
        Ok(Arc::new(ring))
    }

    pub fn params(&self) -> &Arc<PadicParams> {
        &self.params
    }

    pub fn p(&self) -> u64 {
        self.params.p()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prec(&self) -> u32 {
        self.params.prec()
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &BigInt {
        self.params.modulus()
    }

    pub fn defining_poly(&self) -> &[BigInt] {
        &self.defining_poly
    }

    pub fn omega_poly(&self) -> &[BigInt] {
        &self.omega_poly
    }

    /// Matrix of `σ^i` (column `j` holds `σ^i(ω^j)`).
    pub fn frobenius_matrix(&self, i: usize) -> &[Vec<BigInt>] {
        &self.frobenius_powers[i % self.n]
    }

    pub fn residue_field(&self) -> &Fq {
        &self.residue_field
    }

    pub fn elem(self: &Arc<Self>, coords: Vec<BigInt>) -> WittElem {
        assert_eq!(coords.len(), self.n, "expected {} coordinates", self.n);
        let m = self.modulus();
        WittElem {
            coords: coords.iter().map(|c| c.mod_floor(m)).collect(),
            ring: self.clone(),
        }
    }

    pub fn from_int(self: &Arc<Self>, c: impl Into<BigInt>) -> WittElem {
        let mut coords = vec![BigInt::zero(); self.n];
        coords[0] = c.into();
        self.elem(coords)
    }

    pub fn from_padic(self: &Arc<Self>, c: &PadicInt) -> WittElem {
        self.from_int(c.value().clone())
    }

    pub fn zero(self: &Arc<Self>) -> WittElem {
        self.from_int(0)
    }

    pub fn one(self: &Arc<Self>) -> WittElem {
        self.from_int(1)
    }

    pub fn omega(self: &Arc<Self>) -> WittElem {
        if self.n == 1 {
            return self.from_int(-&self.omega_poly[0]);
        }
        let mut coords = vec![BigInt::zero(); self.n];
        coords[1] = BigInt::one();
        self.elem(coords)
    }

    /// `ω^e` for any integer `e`.
    pub fn omega_pow(self: &Arc<Self>, e: i64) -> WittElem {
        let order = (self.q - 1) as i64;
        let e = e.rem_euclid(order.max(1)) as u64;
        if !self.teich_table.is_empty() {
            return self.elem(self.teich_table[e as usize].clone());
        }
        self.omega().pow(e)
    }

    pub fn teichmuller(self: &Arc<Self>, x: &FqElem) -> WittElem {
        if x.is_zero() {
            return self.zero();
        }
        match self.residue_field.log(x) {
            Some(e) => self.omega_pow(e as i64),
            None => unreachable!("nonzero residues have a discrete log"),
        }
    }

    /// Uniformly random element with each coordinate in `[0, p^M)`.
    pub fn random<R: Rng>(self: &Arc<Self>, rng: &mut R) -> WittElem {
        let p = BigInt::from(self.p());
        let coords = (0..self.n)
            .map(|_| {
                let mut v = BigInt::zero();
                for _ in 0..self.prec() {
                    v = v * &p + BigInt::from(rng.gen_range(0..self.p()));
                }
                v
            })
            .collect();
        self.elem(coords)
    }

    fn same(&self, other: &WittRing) -> bool {
        std::ptr::eq(self, other) || self == other
    }
}

/// An element of `W(F_q) / p^M`.
#[derive(Clone, Debug)]
pub struct WittElem {
    ring: Arc<WittRing>,
    coords: Vec<BigInt>,
}

impl PartialEq for WittElem {
    fn eq(&self, other: &Self) -> bool {
        self.ring.same(&other.ring) && self.coords == other.coords
    }
}

impl Eq for WittElem {}

impl fmt::Display for WittElem {
    /// Signed coordinates, in the element-expression syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (j, c) in self.signed_coords().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.sign() == num_bigint::Sign::Minus;
            let a = c.magnitude();
            let mono = match j {
                0 => String::new(),
                1 => "w".to_string(),
                _ => format!("w^{j}"),
            };
            let body = match (j, a.is_one()) {
                (0, _) => a.to_string(),
                (_, true) => mono,
                _ => format!("{a}*{mono}"),
            };
            if out.is_empty() {
                // unary minus binds tighter than ^, so "-w^2" would mean (−w)²
                out = match (neg, j >= 2 && a.is_one()) {
                    (false, _) => body,
                    (true, true) => format!("-1*{body}"),
                    (true, false) => format!("-{body}"),
                };
            } else {
                out.push_str(if neg { " - " } else { " + " });
                out.push_str(&body);
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        write!(f, "{out}")
    }
}

impl WittElem {
    pub fn ring(&self) -> &Arc<WittRing> {
        &self.ring
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn coord(&self, j: usize) -> PadicInt {
        PadicInt::new(self.coords[j].clone(), self.ring.params())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coords[0].is_one() && self.coords[1..].iter().all(|c| c.is_zero())
    }

    pub fn check_ring(&self, other: &WittElem) -> Result<()> {
        if self.ring.same(&other.ring) {
            Ok(())
        } else {
            Err(Error::IncompatibleRings)
        }
    }

    fn with_coords(&self, coords: Vec<BigInt>) -> WittElem {
        let m = self.ring.modulus();
        WittElem {
            coords: coords.into_iter().map(|c| c.mod_floor(m)).collect(),
            ring: self.ring.clone(),
        }
    }

    pub fn add(&self, o: &WittElem) -> WittElem {
        self.with_coords(self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &WittElem) -> WittElem {
        self.with_coords(self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> WittElem {
        self.with_coords(self.coords.iter().map(|a| -a).collect())
    }

    pub fn mul(&self, o: &WittElem) -> WittElem {
        WittElem {
            coords: poly_mulmod(&self.coords, &o.coords, &self.ring.omega_poly, self.ring.modulus()),
            ring: self.ring.clone(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> WittElem {
        self.with_coords(self.coords.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, e: u64) -> WittElem {
        WittElem {
            coords: poly_powmod(&self.coords, BigInt::from(e), &self.ring.omega_poly, self.ring.modulus()),
            ring: self.ring.clone(),
        }
    }

    /// `p`-adic valuation; `None` when zero at precision.
    pub fn valuation(&self) -> Option<u32> {
        self.coords
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| nu_p(c, self.ring.p()).expect("nonzero"))
            .min()
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    /// Exact division by `p^k`; the caller guarantees divisibility.
    pub fn div_p_pow(&self, k: u32) -> WittElem {
        let pk = BigInt::from(self.ring.p()).pow(k);
        debug_assert!(self.coords.iter().all(|c| (c % &pk).is_zero()));
        self.with_coords(self.coords.iter().map(|c| c / &pk).collect())
    }

    pub fn inverse(&self) -> Result<WittElem> {
        let fq = self.ring.residue_field();
        let r = self.residue();
        let r_inv = fq
            .inverse(&r)
            .map_err(|_| Error::NonUnit(format!("{self} has positive valuation")))?;
        let two = self.ring.from_int(2);
        let mut y = self.ring.teichmuller(&r_inv);
        // Newton: each step doubles the p-adic accuracy
        for _ in 0..=(32 - self.ring.prec().leading_zeros()) + 1 {
            let e = self.mul(&y);
            if e.is_one() {
                return Ok(y);
            }
            y = y.mul(&two.sub(&e));
        }
        debug_assert!(self.mul(&y).is_one());
        Ok(y)
    }

    pub fn frobenius(&self) -> WittElem {
        self.frobenius_pow(1)
    }

    /// `σ^i(w)`.
    pub fn frobenius_pow(&self, i: usize) -> WittElem {
        let i = i % self.ring.n;
        if i == 0 {
            return self.clone();
        }
        let mat = &self.ring.frobenius_powers[i];
        let n = self.ring.n;
        let mut out = vec![BigInt::zero(); n];
        for (j, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                *o += c * &mat[j][r];
            }
        }
        self.with_coords(out)
    }

    /// Projects a Galois-invariant element to `Z/p^M`.
    pub fn to_padic(&self) -> Result<PadicInt> {
        if self.coords[1..].iter().any(|c| !c.is_zero()) {
            return Err(Error::PrecisionFailure(format!("{self} is not in Z_p at precision")));
        }
        Ok(self.coord(0))
    }

    pub fn trace(&self) -> Result<PadicInt> {
        let mut s = self.ring.zero();
        for i in 0..self.ring.n {
            s = s.add(&self.frobenius_pow(i));
        }
        s.to_padic()
    }

    pub fn residue(&self) -> FqElem {
        let p = BigInt::from(self.ring.p());
        FqElem {
            coeffs: self
                .coords
                .iter()
                .map(|c| c.mod_floor(&p).to_u64().expect("residue fits"))
                .collect(),
        }
    }

    /// Teichmüller digits `x_0, …, x_{count-1}` with `w ≡ Σ [x_i] p^i mod p^count`.
    pub fn teich_digits(&self, count: u32) -> Vec<FqElem> {
        let count = count.min(self.ring.prec());
        let mut digits = Vec::with_capacity(count as usize);
        let mut w = self.clone();
        for _ in 0..count {
            let d = w.residue();
            let t = self.ring.teichmuller(&d);
            w = w.sub(&t).div_p_pow(1);
            digits.push(d);
        }
        digits
    }

    pub fn from_teich_digits(ring: &Arc<WittRing>, digits: &[FqElem]) -> WittElem {
        let p = BigInt::from(ring.p());
        let mut acc = ring.zero();
        let mut pk = BigInt::one();
        for d in digits {
            acc = acc.add(&ring.teichmuller(d).scale(&pk));
            pk *= &p;
        }
        acc
    }

    /// Symmetric integer coordinates, useful for display.
    pub fn signed_coords(&self) -> Vec<BigInt> {
        let m = self.ring.modulus();
        self.coords
            .iter()
            .map(|c| if c * 2 > *m { c - m } else { c.clone() })
            .collect()
    }

    pub fn is_negative_one(&self) -> bool {
        self.signed_coords()[0] == BigInt::from(-1) && self.coords[1..].iter().all(|c| c.is_zero())
    }
}
