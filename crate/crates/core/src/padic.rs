//! Exact arithmetic in `Z/p^M`, used as the finite-precision model of `Z_p`.
//!
//! Everything is carried on [`BigInt`]s so no intermediate product can
//! overflow regardless of `p` and `M`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 16;

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factors of `m`, without multiplicity.
pub fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Largest `e` with `p^e | x`.
pub fn nu_p(x: &BigInt, p: u64) -> Result<u32> {
    if x.is_zero() {
        return Err(Error::ValuationOfZero);
    }
    let p = BigInt::from(p);
    let mut e = 0;
    let mut y = x.abs();
    loop {
        let (q, r) = y.div_rem(&p);
        if !r.is_zero() {
            return Ok(e);
        }
        y = q;
        e += 1;
    }
}

pub fn mod_inverse(x: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = x.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// The prime `p` together with the working precision `M`.
#[derive(Debug, PartialEq, Eq)]
pub struct PadicParams {
    p: u64,
    prec: u32,
    modulus: BigInt,
}

impl PadicParams {
    pub fn new(p: u64, prec: u32) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if prec == 0 {
            return Err(Error::ZeroPrecision);
        }
        Ok(Arc::new(PadicParams {
            p,
            prec,
            modulus: BigInt::from(p).pow(prec),
        }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// `p^M`.
    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn reduce(&self, x: &BigInt) -> BigInt {
        x.mod_floor(&self.modulus)
    }

    /// Valuation of a residue mod `p^M`; `None` when it vanishes at precision.
    pub fn valuation(&self, x: &BigInt) -> Option<u32> {
        let r = self.reduce(x);
        if r.is_zero() {
            None
        } else {
            Some(nu_p(&r, self.p).expect("nonzero"))
        }
    }

    pub fn is_unit(&self, x: &BigInt) -> bool {
        !(x.mod_floor(&BigInt::from(self.p))).is_zero()
    }

    pub fn inverse(&self, x: &BigInt) -> Result<BigInt> {
        mod_inverse(x, &self.modulus).ok_or_else(|| Error::NonUnit(format!("{x} mod {}", self.p)))
    }

    pub fn int(self: &Arc<Self>, value: impl Into<BigInt>) -> PadicInt {
        PadicInt::new(value.into(), self)
    }
}

/// An element of `Z/p^M`.
#[derive(Clone, Debug)]
pub struct PadicInt {
    value: BigInt,
    params: Arc<PadicParams>,
}

impl PartialEq for PadicInt {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.value == other.value
    }
}

impl Eq for PadicInt {}

impl Serialize for PadicInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        bigint_to_json(&self.value).serialize(s)
    }
}

/// JSON number when it fits in 64 bits, decimal string otherwise.
pub fn bigint_to_json(x: &BigInt) -> serde_json::Value {
    if let Some(v) = x.to_i64() {
        serde_json::Value::from(v)
    } else if let Some(v) = x.to_u64() {
        serde_json::Value::from(v)
    } else {
        serde_json::Value::from(x.to_string())
    }
}

pub fn bigint_from_json(v: &serde_json::Value) -> Result<BigInt> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(Error::InvalidInput(format!("not an integer: {n}")))
            }
        }
        serde_json::Value::String(s) => s
            .parse()
            .map_err(|_| Error::InvalidInput(format!("not an integer: {s}"))),
        other => Err(Error::InvalidInput(format!("not an integer: {other}"))),
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl PadicInt {
    pub fn new(value: BigInt, params: &Arc<PadicParams>) -> Self {
        PadicInt {
            value: params.reduce(&value),
            params: params.clone(),
        }
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn params(&self) -> &Arc<PadicParams> {
        &self.params
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        self.params.is_unit(&self.value)
    }

    pub fn valuation(&self) -> Option<u32> {
        self.params.valuation(&self.value)
    }

    /// Symmetric representative in `(-p^M/2, p^M/2]`.
    pub fn signed(&self) -> BigInt {
        let m = self.params.modulus();
        if &self.value * 2 > *m {
            &self.value - m
        } else {
            self.value.clone()
        }
    }

    pub fn add(&self, o: &PadicInt) -> PadicInt {
        PadicInt::new(&self.value + &o.value, &self.params)
    }

    pub fn sub(&self, o: &PadicInt) -> PadicInt {
        PadicInt::new(&self.value - &o.value, &self.params)
    }

    pub fn mul(&self, o: &PadicInt) -> PadicInt {
        PadicInt::new(&self.value * &o.value, &self.params)
    }

    pub fn neg(&self) -> PadicInt {
        PadicInt::new(-&self.value, &self.params)
    }

    pub fn pow(&self, e: u64) -> PadicInt {
        PadicInt {
            value: self.value.modpow(&BigInt::from(e), self.params.modulus()),
            params: self.params.clone(),
        }
    }

    /// Power with a possibly negative exponent; negative exponents need a unit.
    pub fn pow_signed(&self, e: i64) -> Result<PadicInt> {
        let base = if e < 0 { unit_inverse(self)? } else { self.clone() };
        Ok(base.pow(e.unsigned_abs()))
    }
}

pub fn unit_inverse(x: &PadicInt) -> Result<PadicInt> {
    if !x.is_unit() {
        return Err(Error::NonUnit(format!("{} is divisible by {}", x.value, x.params.p)));
    }
    Ok(PadicInt {
        value: x.params.inverse(&x.value)?,
        params: x.params.clone(),
    })
}

/// The `n`-th root of `x` that lies in the pro-`p` part: `y ≡ 1 mod p` for odd `p`,
/// any unit root for `p = 2` (then `n` is odd and the root is unique).
pub fn nth_root_one_unit(x: &PadicInt, n: u64) -> Result<PadicInt> {
    let params = x.params.clone();
    let p = params.p();
    if n == 0 || n.is_multiple_of(p) {
        return Err(Error::RootUndefined(format!("p = {p} divides n = {n}")));
    }
    if p != 2 && !(&x.value - 1u32).mod_floor(&BigInt::from(p)).is_zero() {
        return Err(Error::RootUndefined(format!("{} is not congruent to 1 mod {p}", x.value)));
    }
    if !x.is_unit() {
        return Err(Error::NonUnit(format!("{}", x.value)));
    }
    // Newton: y <- y - (y^n - x) / (n y^(n-1)); every y ≡ 1 mod p satisfies the
    // Hensel bound since the derivative is a unit.
    let m = params.modulus();
    let nb = BigInt::from(n);
    let mut y = BigInt::one();
    for _ in 0..=(params.prec().next_power_of_two().trailing_zeros() + 2) {
        let yn1 = y.modpow(&BigInt::from(n - 1), m);
        let f = (&yn1 * &y - &x.value).mod_floor(m);
        if f.is_zero() {
            break;
        }
        let d = params.inverse(&(&nb * &yn1))?;
        y = (&y - f * d).mod_floor(m);
    }
    let r = PadicInt::new(y, &params);
    debug_assert_eq!(r.pow(n), *x);
    Ok(r)
}

/// One invariant factor: a free `Z_p` summand or `Z/p^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CyclicFactor {
    Free,
    Finite(u32),
}

impl Serialize for CyclicFactor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CyclicFactor::Free => s.serialize_str("INF"),
            CyclicFactor::Finite(e) => s.serialize_u32(*e),
        }
    }
}

/// Invariant-factor decomposition of a finitely generated `Z_p`-module.
///
/// Finite factors are stored by exponent; `Z/p^0` never appears. `at_precision`
/// records that a free factor was inferred from a full-precision zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicDecomp {
    pub p: u64,
    factors: Vec<CyclicFactor>,
    pub at_precision: bool,
}

impl CyclicDecomp {
    pub fn new(p: u64, factors: impl IntoIterator<Item = CyclicFactor>) -> Self {
        let mut factors: Vec<CyclicFactor> = factors
            .into_iter()
            .filter(|f| *f != CyclicFactor::Finite(0))
            .collect();
        factors.sort_by(|a, b| match (a, b) {
            (CyclicFactor::Free, CyclicFactor::Free) => std::cmp::Ordering::Equal,
            (CyclicFactor::Free, _) => std::cmp::Ordering::Less,
            (_, CyclicFactor::Free) => std::cmp::Ordering::Greater,
            (CyclicFactor::Finite(x), CyclicFactor::Finite(y)) => y.cmp(x),
        });
        CyclicDecomp {
            p,
            factors,
            at_precision: false,
        }
    }

    pub fn zero(p: u64) -> Self {
        Self::new(p, [])
    }

    pub fn free(p: u64, rank: usize) -> Self {
        Self::new(p, vec![CyclicFactor::Free; rank])
    }

    pub fn cyclic(p: u64, exp: u32) -> Self {
        Self::new(p, [CyclicFactor::Finite(exp)])
    }

    pub fn with_precision_flag(mut self, flag: bool) -> Self {
        self.at_precision |= flag;
        self
    }

    pub fn factors(&self) -> &[CyclicFactor] {
        &self.factors
    }

    pub fn is_zero(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn free_rank(&self) -> usize {
        self.factors.iter().filter(|f| **f == CyclicFactor::Free).count()
    }

    /// Exponents of the finite factors, descending.
    pub fn torsion_exponents(&self) -> Vec<u32> {
        self.factors
            .iter()
            .filter_map(|f| match f {
                CyclicFactor::Finite(e) => Some(*e),
                CyclicFactor::Free => None,
            })
            .collect()
    }

    /// Total exponent of the torsion subgroup's order.
    pub fn torsion_log_order(&self) -> u32 {
        self.torsion_exponents().iter().sum()
    }

    pub fn direct_sum(&self, other: &CyclicDecomp) -> CyclicDecomp {
        CyclicDecomp::new(self.p, self.factors.iter().chain(&other.factors).copied())
            .with_precision_flag(self.at_precision || other.at_precision)
    }

    /// Number of cyclic summands, i.e. the dimension of `M / p M`.
    pub fn mod_p_rank(&self) -> usize {
        self.factors.len()
    }
}

impl fmt::Display for CyclicDecomp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.factors.len() {
            let mut j = i;
            while j < self.factors.len() && self.factors[j] == self.factors[i] {
                j += 1;
            }
            let base = match self.factors[i] {
                CyclicFactor::Free => format!("Z_{}", self.p),
                CyclicFactor::Finite(e) => {
                    format!("Z/{}", BigInt::from(self.p).pow(e))
                }
            };
            let count = j - i;
            parts.push(if count == 1 {
                base
            } else if matches!(self.factors[i], CyclicFactor::Free) {
                format!("{base}^{count}")
            } else {
                format!("({base})^{count}")
            });
            i = j;
        }
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix, m: &BigInt) -> IntMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = BigInt::zero();
                    for k in 0..inner {
                        s += &row[k] * &b[k][j];
                    }
                    s.mod_floor(m)
                })
                .collect()
        })
        .collect()
}

/// Result of [`smith_normal_form`]: `u · a · v ≡ diag(d) mod p^M`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    /// Diagonal entries, each `p^e` or `0`; length `min(rows, cols)`.
    pub d: Vec<BigInt>,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithForm {
    /// Exponent of each diagonal entry, `None` for a zero at precision.
    pub fn exponents(&self) -> Vec<Option<u32>> {
        self.d
            .iter()
            .map(|x| if x.is_zero() { None } else { nu_p(x, self.p).ok() })
            .collect()
    }

    /// Number of diagonal entries that vanish at precision.
    pub fn zero_count(&self) -> usize {
        self.d.iter().filter(|x| x.is_zero()).count()
    }

    pub fn rank(&self) -> usize {
        self.d.len() - self.zero_count()
    }

    /// Cokernel `Z_p^rows / im(a)`. Diagonal zeros and missing rows are free summands.
    pub fn cokernel(&self) -> CyclicDecomp {
        let mut factors = Vec::new();
        let mut caveat = false;
        for i in 0..self.rows {
            match self.d.get(i) {
                Some(x) if x.is_zero() => {
                    caveat = true;
                    factors.push(CyclicFactor::Free);
                }
                Some(x) => factors.push(CyclicFactor::Finite(nu_p(x, self.p).expect("nonzero"))),
                None => factors.push(CyclicFactor::Free),
            }
        }
        CyclicDecomp::new(self.p, factors).with_precision_flag(caveat)
    }

    /// Kernel of `a` viewed as a map of free `Z_p`-modules: free of rank `cols - rank`.
    pub fn kernel(&self) -> CyclicDecomp {
        let caveat = self.zero_count() > 0;
        CyclicDecomp::free(self.p, self.cols - self.rank()).with_precision_flag(caveat)
    }

    /// Indices (into the columns of `v`) spanning the kernel.
    pub fn kernel_columns(&self) -> Vec<usize> {
        (0..self.cols)
            .filter(|&j| j >= self.d.len() || self.d[j].is_zero())
            .collect()
    }
}

/// Smith normal form over `Z/p^M`, which is a local principal ideal ring, so
/// pivoting on an entry of least valuation always clears its row and column.
#[allow(clippy::needless_range_loop)]
pub fn smith_normal_form(a: &IntMatrix, params: &PadicParams) -> SmithForm {
    let m = params.modulus().clone();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut a: IntMatrix = a.iter().map(|r| r.iter().map(|x| x.mod_floor(&m)).collect()).collect();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut v_inv = identity(cols);
    let p = params.p();
    let pb = BigInt::from(p);
    let steps = rows.min(cols);

    for k in 0..steps {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if a[i][j].is_zero() {
                    continue;
                }
                let e = nu_p(&a[i][j], p).expect("nonzero");
                if best.is_none_or(|(b, _, _)| e < b) {
                    best = Some((e, i, j));
                }
            }
        }
        let Some((e, pi, pj)) = best else { break };
        a.swap(k, pi);
        u.swap(k, pi);
        if pj != k {
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            for row in v.iter_mut() {
                row.swap(k, pj);
            }
            v_inv.swap(k, pj);
        }
        let pe = pb.pow(e);
        let unit = &a[k][k] / &pe;
        let unit_inv = mod_inverse(&unit, &m).expect("pivot cofactor is a unit");
        for x in a[k].iter_mut() {
            *x = (&*x * &unit_inv).mod_floor(&m);
        }
        for x in u[k].iter_mut() {
            *x = (&*x * &unit_inv).mod_floor(&m);
        }
        for i in 0..rows {
            if i == k || a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &pe;
            for j in 0..cols {
                let t = &f * &a[k][j];
                a[i][j] = (&a[i][j] - t).mod_floor(&m);
            }
            for j in 0..rows {
                let t = &f * &u[k][j];
                u[i][j] = (&u[i][j] - t).mod_floor(&m);
            }
        }
        for j in 0..cols {
            if j == k || a[k][j].is_zero() {
                continue;
            }
            let f = &a[k][j] / &pe;
            for i in 0..rows {
                let t = &f * &a[i][k];
                a[i][j] = (&a[i][j] - t).mod_floor(&m);
            }
            for i in 0..cols {
                let t = &f * &v[i][k];
                v[i][j] = (&v[i][j] - t).mod_floor(&m);
            }
            for i in 0..cols {
                let t = &f * &v_inv[j][i];
                v_inv[k][i] = (&v_inv[k][i] + t).mod_floor(&m);
            }
        }
    }

    SmithForm {
        p,
        rows,
        cols,
        d: (0..steps).map(|i| a[i][i].clone()).collect(),
        u,
        v,
        v_inv,
    }
}
