//! Finite fields GF(p^m) with elements encoded as base-p integers.
//!
//! An element's integer representation lists the coefficients of its
//! polynomial residue in base `p`, constant term as the least significant
//! digit. Multiplication goes through discrete log / antilog tables built from
//! a primitive element found at construction time, so fields are capped at
//! `q <= 2^16`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// A field element. Only meaningful together with the [`Field`] it came from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gf(pub u32);

impl Gf {
    pub const ZERO: Gf = Gf(0);
    pub const ONE: Gf = Gf(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Characteristic, degree and defining polynomial of a finite field.
///
/// `modulus` holds the `m + 1` coefficients of a monic irreducible polynomial,
/// constant term first. For prime fields it is `[0, 1]` (the polynomial `x`)
/// and plays no role in arithmetic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u32,
    m: u32,
    modulus: Vec<u32>,
}

// Conway polynomials for the small fields most likely to be used; anything
// else falls back to the first monic irreducible in lexicographic order.
const CONWAY: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 1, 1, 0, 1]),
    (2, 7, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (2, 8, &[1, 0, 1, 1, 1, 0, 0, 0, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (5, 2, &[2, 4, 1]),
    (7, 2, &[3, 6, 1]),
];

impl FieldSpec {
    /// Field of order `p^m` with the built-in default modulus.
    pub fn new(p: u32, m: u32) -> Result<Self> {
        check_order(p, m)?;
        let modulus = if m == 1 {
            vec![0, 1]
        } else if let Some((_, _, c)) = CONWAY.iter().find(|(cp, cm, _)| *cp == p && *cm == m) {
            c.to_vec()
        } else {
            first_irreducible(p, m)
        };
        Ok(FieldSpec { p, m, modulus })
    }

    /// Field of order `p^m` defined by an explicit modulus (constant first).
    pub fn with_modulus(p: u32, m: u32, modulus: Vec<u32>) -> Result<Self> {
        check_order(p, m)?;
        if m == 1 {
            return Ok(FieldSpec { p, m, modulus: vec![0, 1] });
        }
        if modulus.len() != m as usize + 1 || modulus[m as usize] != 1 {
            return Err(Error::Domain(format!(
                "modulus must be monic of degree {m} ({} coefficients, leading 1)",
                m + 1
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::Domain(format!("modulus coefficients must be < {p}")));
        }
        if !is_irreducible(p, &modulus) {
            return Err(Error::Domain(format!("modulus {modulus:?} is reducible over GF({p})")));
        }
        Ok(FieldSpec { p, m, modulus })
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.p.pow(self.m)
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    fn is_default_modulus(&self) -> bool {
        FieldSpec::new(self.p, self.m).map(|d| d.modulus == self.modulus).unwrap_or(false)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m == 1 || self.is_default_modulus() {
            write!(f, "GF({})", self.order())
        } else {
            let coeffs: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
            write!(f, "GF({}:{})", self.order(), coeffs.join(","))
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    /// Accepts `GF(q)`, `GF(p^m)` and either form followed by `:c0,c1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("bad field `{s}`, expected GF(p^m[:modulus-coeffs])"));
        let inner = s
            .trim()
            .strip_prefix("GF(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (order, modulus) = match inner.split_once(':') {
            Some((o, m)) => (o.trim(), Some(m)),
            None => (inner.trim(), None),
        };
        let (p, m) = match order.split_once('^') {
            Some((p, m)) => (
                p.trim().parse::<u32>().map_err(|_| bad())?,
                m.trim().parse::<u32>().map_err(|_| bad())?,
            ),
            None => prime_power(order.parse::<u32>().map_err(|_| bad())?).ok_or_else(|| {
                Error::Domain(format!("field order `{order}` is not a prime power"))
            })?,
        };
        match modulus {
            None => FieldSpec::new(p, m),
            Some(list) => {
                let coeffs = list
                    .split(',')
                    .map(|c| c.trim().parse::<u32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad())?;
                FieldSpec::with_modulus(p, m, coeffs)
            }
        }
    }
}

fn check_order(p: u32, m: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("characteristic {p} is not prime")));
    }
    if m == 0 {
        return Err(Error::Domain("extension degree must be at least 1".into()));
    }
    match p.checked_pow(m) {
        Some(q) if q <= MAX_ORDER => Ok(()),
        _ => Err(Error::Capacity(format!("GF({p}^{m}) exceeds the supported order {MAX_ORDER}"))),
    }
}

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut rest, mut m) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

// --- polynomials over GF(p), coefficient vectors constant first ---

fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let b = poly_trim(b.to_vec());
    let mut r = poly_trim(a.to_vec());
    let lead_inv = mod_inv(*b.last().expect("nonzero divisor"), p);
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let factor = (*r.last().unwrap() as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &bc) in b.iter().enumerate() {
            let sub = (factor as u64 * bc as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        r = poly_trim(r);
    }
    r
}

fn mod_inv(a: u32, p: u32) -> u32 {
    // p is prime: a^(p-2)
    let (mut base, mut exp, mut acc) = (a as u64 % p as u64, p - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    acc as u32
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
pub(crate) fn is_irreducible(p: u32, f: &[u32]) -> bool {
    let f = poly_trim(f.to_vec());
    let deg = f.len().saturating_sub(1) as u32;
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        for low in 0..p.pow(d) {
            let mut g = digits(low, p, d as usize);
            g.push(1);
            if poly_rem(p, &f, &g).is_empty() {
                return false;
            }
        }
    }
    true
}

fn first_irreducible(p: u32, m: u32) -> Vec<u32> {
    (0..p.pow(m))
        .map(|low| {
            let mut f = digits(low, p, m as usize);
            f.push(1);
            f
        })
        .find(|f| is_irreducible(p, f))
        .expect("irreducible polynomials exist in every degree")
}

fn digits(mut x: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(x % p);
        x /= p;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Multiplication via polynomial arithmetic, used only to build the tables.
fn slow_mul(spec: &FieldSpec, a: u32, b: u32) -> u32 {
    let p = spec.p;
    if spec.m == 1 {
        return (a as u64 * b as u64 % p as u64) as u32;
    }
    let m = spec.m as usize;
    let (da, db) = (digits(a, p, m), digits(b, p, m));
    let mut prod = vec![0u32; 2 * m - 1];
    for (i, &x) in da.iter().enumerate() {
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
        }
    }
    let mut r = poly_rem(p, &prod, &spec.modulus);
    r.resize(m, 0);
    undigits(&r, p)
}

struct Inner {
    spec: FieldSpec,
    q: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    add: Option<Vec<u32>>,
    neg: Vec<u32>,
}

/// A finite field with precomputed arithmetic tables. Cheap to clone.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl Field {
    pub fn new(spec: FieldSpec) -> Self {
        let q = spec.order();
        let p = spec.p;
        let m = spec.m as usize;
        let neg: Vec<u32> = (0..q)
            .map(|a| undigits(&digits(a, p, m).iter().map(|&d| (p - d) % p).collect::<Vec<_>>(), p))
            .collect();
        let add = (q <= 256 && p != 2 && m > 1).then(|| {
            let mut t = vec![0u32; (q * q) as usize];
            for a in 0..q {
                let da = digits(a, p, m);
                for b in 0..q {
                    let db = digits(b, p, m);
                    let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                    t[(a * q + b) as usize] = undigits(&s, p);
                }
            }
            t
        });

        // Find a primitive element and tabulate its powers.
        let mut exp = Vec::new();
        let mut log = vec![0u32; q as usize];
        for g in 1..q {
            exp.clear();
            let mut x = 1u32;
            let mut seen = vec![false; q as usize];
            let mut ok = true;
            for _ in 0..q - 1 {
                if seen[x as usize] {
                    ok = false;
                    break;
                }
                seen[x as usize] = true;
                exp.push(x);
                x = slow_mul(&spec, x, g);
            }
            if ok && x == 1 {
                break;
            }
        }
        for (i, &e) in exp.iter().enumerate() {
            log[e as usize] = i as u32;
        }
        Field(Arc::new(Inner { spec, q, exp, log, add, neg }))
    }

    /// Parse a textual field description such as `GF(2)` or `GF(4:1,1,1)`.
    pub fn parse(s: &str) -> Result<Self> {
        Ok(Field::new(s.parse()?))
    }

    /// Prime field GF(p) or extension with the default modulus.
    pub fn gf(p: u32, m: u32) -> Result<Self> {
        Ok(Field::new(FieldSpec::new(p, m)?))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn order(&self) -> u32 {
        self.0.q
    }

    pub fn characteristic(&self) -> u32 {
        self.0.spec.p
    }

    /// Checked conversion from a representation integer.
    pub fn elem(&self, repr: u32) -> Result<Gf> {
        if repr < self.0.q {
            Ok(Gf(repr))
        } else {
            Err(Error::Domain(format!("{repr} is not an element of {}", self.0.spec)))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Gf> {
        (0..self.0.q).map(Gf)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Gf> {
        (1..self.0.q).map(Gf)
    }

    #[inline]
    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        let inner = &*self.0;
        let p = inner.spec.p;
        if p == 2 {
            return Gf(a.0 ^ b.0);
        }
        if inner.spec.m == 1 {
            let s = a.0 + b.0;
            return Gf(if s >= p { s - p } else { s });
        }
        if let Some(t) = &inner.add {
            return Gf(t[(a.0 * inner.q + b.0) as usize]);
        }
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        Gf(out)
    }

    #[inline]
    pub fn neg(&self, a: Gf) -> Gf {
        Gf(self.0.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Gf, b: Gf) -> Gf {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a.0 == 0 || b.0 == 0 {
            return Gf::ZERO;
        }
        let inner = &*self.0;
        let n = inner.q - 1;
        let s = inner.log[a.0 as usize] + inner.log[b.0 as usize];
        Gf(inner.exp[(if s >= n { s - n } else { s }) as usize])
    }

    pub fn checked_inv(&self, a: Gf) -> Option<Gf> {
        if a.is_zero() {
            return None;
        }
        let inner = &*self.0;
        let n = inner.q - 1;
        Some(Gf(inner.exp[((n - inner.log[a.0 as usize]) % n) as usize]))
    }

    pub fn inv(&self, a: Gf) -> Result<Gf> {
        self.checked_inv(a)
            .ok_or_else(|| Error::Domain("inverse of zero".into()))
    }

    pub fn div(&self, a: Gf, b: Gf) -> Result<Gf> {
        Ok(self.mul(a, self.inv(b)?))
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.spec)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.spec)
    }
}
