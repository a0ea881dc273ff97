//! Finite fields GF(p^k).
//!
//! Elements are stored as an index `idx = Σ cᵢ pⁱ`, where `c₀ + c₁x + …` is
//! the residue polynomial modulo the field's monic irreducible modulus. Index
//! 0 is zero and index 1 is one in every field. All canonical orderings in
//! the crate derive from this encoding.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Default cap on the field order.
pub const DEFAULT_Q_BOUND: u32 = 1 << 16;

/// Fields up to this order get precomputed addition and multiplication tables.
const TABLE_LIMIT: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NonPrime(u32),
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error("modulus is reducible over GF({0})")]
    ReduciblePolynomial(u32),
    #[error("modulus must be monic of degree {expected} with coefficients below {p}")]
    BadModulus { expected: u32, p: u32 },
    #[error("field order {q} exceeds the bound {bound}")]
    BoundExceeded { q: u64, bound: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero polynomial has no finite root set")]
    ZeroPolynomial,
    #[error("field element index {0} out of range")]
    OutOfRange(u32),
    #[error("cannot parse field spec `{0}`")]
    Parse(String),
}

/// A field element, encoded by its index in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn idx(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A prime-power field together with its modulus and (for small q) lookup tables.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    tables: Option<Tables>,
}

#[derive(Clone)]
struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldSpec({self})")
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^k` with `p` prime.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

// Dense polynomial helpers over GF(p), coefficients low degree first.

fn trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_rem_p(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut b = b.to_vec();
    trim(&mut b);
    let db = b.len() - 1;
    let lead_inv = pow_mod(b[db], p - 2, p);
    while r.len() > db {
        let dr = r.len() - 1;
        let factor = r[dr] * lead_inv % p;
        for (i, &bc) in b.iter().enumerate() {
            let j = dr - db + i;
            r[j] = (r[j] + p - factor * bc % p) % p;
        }
        trim(&mut r);
    }
    r
}

fn pow_mod(base: u32, mut exp: u32, p: u32) -> u32 {
    let m = p as u64;
    let (mut acc, mut b) = (1u64, base as u64 % m);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u32
}

/// Coefficient vector (low first) of the monic polynomial of degree `deg`
/// whose lower coefficients are given by `n` in base p, with c₀ most significant.
fn monic_from_rank(n: u32, deg: u32, p: u32) -> Vec<u32> {
    let mut coeffs = vec![0u32; deg as usize + 1];
    let mut rest = n;
    for i in (0..deg as usize).rev() {
        coeffs[i] = rest % p;
        rest /= p;
    }
    coeffs[deg as usize] = 1;
    coeffs
}

/// Exhaustive irreducibility test: no monic factor of degree 1..=deg/2.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let mut f = poly.to_vec();
    trim(&mut f);
    if f.len() < 2 {
        return false;
    }
    let deg = (f.len() - 1) as u32;
    for d in 1..=deg / 2 {
        let count = p.pow(d);
        for n in 0..count {
            let g = monic_from_rank(n, d, p);
            if poly_rem_p(&f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FieldSpec {
    /// Builds GF(p^k). Without an explicit modulus, the lexicographically
    /// smallest monic irreducible of degree k (comparing c₀ first) is used.
    pub fn new(p: u32, k: u32, modulus: Option<&[u32]>) -> Result<Self, FieldError> {
        Self::with_bound(p, k, modulus, DEFAULT_Q_BOUND)
    }

    pub fn with_bound(
        p: u32,
        k: u32,
        modulus: Option<&[u32]>,
        q_bound: u32,
    ) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NonPrime(p));
        }
        if k == 0 {
            return Err(FieldError::BadModulus { expected: k, p });
        }
        let q64 = (p as u64).checked_pow(k).unwrap_or(u64::MAX);
        if q64 > q_bound as u64 {
            return Err(FieldError::BoundExceeded {
                q: q64,
                bound: q_bound,
            });
        }
        let q = q64 as u32;
        let modulus = match modulus {
            Some(m) => {
                let mut m = m.to_vec();
                if m.len() != k as usize + 1 || m[k as usize] != 1 || m.iter().any(|&c| c >= p) {
                    return Err(FieldError::BadModulus { expected: k, p });
                }
                if k == 1 {
                    // Any monic linear modulus yields the same prime field.
                    m = vec![0, 1];
                } else if !is_irreducible(&m, p) {
                    return Err(FieldError::ReduciblePolynomial(p));
                }
                m
            }
            None if k == 1 => vec![0, 1],
            None => (0..p.pow(k))
                .map(|n| monic_from_rank(n, k, p))
                .find(|m| is_irreducible(m, p))
                .expect("an irreducible polynomial exists in every degree"),
        };
        let mut spec = FieldSpec {
            p,
            k,
            q,
            modulus,
            tables: None,
        };
        if q <= TABLE_LIMIT {
            spec.tables = Some(spec.build_tables());
        }
        Ok(spec)
    }

    /// Builds the default field of order `q`.
    pub fn of_order(q: u32) -> Result<Self, FieldError> {
        let (p, k) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        Self::new(p, k, None)
    }

    fn build_tables(&self) -> Tables {
        let q = self.q as usize;
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..self.q {
            for b in 0..self.q {
                add[a as usize * q + b as usize] = self.add_slow(a, b);
                mul[a as usize * q + b as usize] = self.mul_slow(a, b);
            }
        }
        let neg = (0..self.q).map(|a| self.neg_slow(a)).collect();
        let mut inv = vec![0; q];
        for a in 1..q {
            inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).unwrap() as u32;
        }
        Tables { add, mul, neg, inv }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Modulus coefficients, low degree first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    fn digits(&self, mut a: u32) -> Vec<u32> {
        let mut d = vec![0; self.k as usize];
        for c in d.iter_mut() {
            *c = a % self.p;
            a /= self.p;
        }
        d
    }

    fn digits_to_index(&self, d: &[u32]) -> u32 {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn add_slow(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            return (a + b) % self.p;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.digits_to_index(&s)
    }

    fn neg_slow(&self, a: u32) -> u32 {
        let d: Vec<u32> = self
            .digits(a)
            .iter()
            .map(|&x| (self.p - x) % self.p)
            .collect();
        self.digits_to_index(&d)
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u32; 2 * self.k as usize - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        let mut r = poly_rem_p(&prod, &self.modulus, self.p);
        r.resize(self.k as usize, 0);
        self.digits_to_index(&r)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        match &self.tables {
            Some(t) => Fe(t.add[(a.0 * self.q + b.0) as usize]),
            None => Fe(self.add_slow(a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        match &self.tables {
            Some(t) => Fe(t.neg[a.0 as usize]),
            None => Fe(self.neg_slow(a.0)),
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        match &self.tables {
            Some(t) => Fe(t.mul[(a.0 * self.q + b.0) as usize]),
            None => Fe(self.mul_slow(a.0, b.0)),
        }
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match &self.tables {
            Some(t) => Fe(t.inv[a.0 as usize]),
            None => self.pow(a, (self.q - 2) as u64),
        })
    }

    pub fn pow(&self, a: Fe, mut n: u64) -> Fe {
        let mut acc = Fe::ONE;
        let mut base = a;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// Checks that `idx` names an element of this field.
    pub fn elem(&self, idx: u32) -> Result<Fe, FieldError> {
        if idx < self.q {
            Ok(Fe(idx))
        } else {
            Err(FieldError::OutOfRange(idx))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.q).map(Fe)
    }

    pub fn units(&self) -> impl Iterator<Item = Fe> + Clone {
        (1..self.q).map(Fe)
    }

    /// Horner evaluation; coefficients low degree first.
    pub fn poly_eval(&self, coeffs: &[Fe], x: Fe) -> Fe {
        coeffs
            .iter()
            .rev()
            .fold(Fe::ZERO, |acc, &c| self.add(self.mul(acc, x), c))
    }

    /// All roots in GF(q), sorted, repeated according to multiplicity.
    pub fn poly_roots(&self, coeffs: &[Fe]) -> Result<Vec<Fe>, FieldError> {
        let mut f: Vec<Fe> = coeffs.to_vec();
        while f.last().is_some_and(|c| c.is_zero()) {
            f.pop();
        }
        if f.is_empty() {
            return Err(FieldError::ZeroPolynomial);
        }
        let mut roots = Vec::new();
        for r in self.elements() {
            while f.len() > 1 && self.poly_eval(&f, r).is_zero() {
                f = self.synthetic_div(&f, r);
                roots.push(r);
            }
        }
        Ok(roots)
    }

    /// Quotient of `f` by `(x − r)`, assuming `r` is a root.
    fn synthetic_div(&self, f: &[Fe], r: Fe) -> Vec<Fe> {
        let deg = f.len() - 1;
        let mut out = vec![Fe::ZERO; deg];
        let mut carry = Fe::ZERO;
        for i in (1..=deg).rev() {
            carry = self.add(f[i], self.mul(carry, r));
            out[i - 1] = carry;
        }
        out
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 1 {
            return write!(f, "GF({})", self.p);
        }
        let coeffs: Vec<String> = self.modulus.iter().map(u32::to_string).collect();
        write!(f, "GF({}^{};{})", self.p, self.k, coeffs.join(","))
    }
}

impl FromStr for FieldSpec {
    type Err = FieldError;

    /// Parses `GF(p)` or `GF(p^k;c0,c1,...,ck)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FieldError::Parse(s.to_string());
        let body = s
            .trim()
            .strip_prefix("GF(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (order, modulus) = match body.split_once(';') {
            Some((o, m)) => (o, Some(m)),
            None => (body, None),
        };
        let (p, k) = match order.split_once('^') {
            Some((p, k)) => (
                p.trim().parse().map_err(|_| bad())?,
                k.trim().parse().map_err(|_| bad())?,
            ),
            None => (order.trim().parse().map_err(|_| bad())?, 1),
        };
        let modulus = modulus
            .map(|m| {
                m.split(',')
                    .map(|c| c.trim().parse::<u32>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        FieldSpec::new(p, k, modulus.as_deref())
    }
}
