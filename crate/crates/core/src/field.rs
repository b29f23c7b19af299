//! Exact scalar arithmetic over prime fields and the rationals.
//!
//! Bulk code is generic over the [`Field`] trait, whose element type carries
//! no field tag (`u64` residues for `F_p`, reduced [`BigRational`]s for `Q`).
//! [`FieldElement`] is the self-describing value used at API boundaries; its
//! operations reject operands from different fields.

use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::elim;

/// Largest supported modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 61;

/// Which field a matrix or scalar lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldSpec {
    Prime(u64),
    Rational,
}

impl FieldSpec {
    pub fn prime(p: u64) -> Result<Self> {
        if p < MAX_MODULUS && validate_prime(p) {
            Ok(FieldSpec::Prime(p))
        } else {
            Err(Error::InvalidModulus(p))
        }
    }
}

impl Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Prime(p) => write!(f, "Fp {p}"),
            FieldSpec::Rational => write!(f, "Q"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    /// Accepts `Q`, `Fp <p>`, `Fp<p>`, `Fp:<p>` (case-insensitive prefix).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("q") {
            return Ok(FieldSpec::Rational);
        }
        let lower = t.to_ascii_lowercase();
        let rest = lower
            .strip_prefix("fp")
            .ok_or_else(|| Error::parse(0, format!("unknown field `{t}`")))?;
        let digits = rest.trim_start_matches([':', ' ']).trim();
        let p: u64 = digits
            .parse()
            .map_err(|_| Error::parse(0, format!("bad modulus in `{t}`")))?;
        FieldSpec::prime(p)
    }
}

/// Deterministic Miller–Rabin; exact for every `u64`.
pub fn validate_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for q in SMALL {
        if p % q == 0 {
            return p == q;
        }
    }
    let mut d = p - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, p);
        if x == 1 || x == p - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, p);
            if x == p - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// A field with exact arithmetic on an untagged element type.
pub trait Field: Clone + Debug + PartialEq + Send + Sync + 'static {
    type Elem: Clone + Debug + PartialEq + Eq + Hash + Send + Sync;

    fn spec(&self) -> FieldSpec;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn parse_elem(&self, s: &str) -> Result<Self::Elem>;
    fn format_elem(&self, a: &Self::Elem) -> String;
    fn to_element(&self, a: &Self::Elem) -> FieldElement;
    fn from_element(&self, e: &FieldElement) -> Result<Self::Elem>;
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
    /// Rank of a row-major `rows x cols` matrix, or `limit` if the rank is at
    /// least `limit`; consumes the buffer.
    fn rank_capped(&self, rows: usize, cols: usize, data: Vec<Self::Elem>, limit: usize) -> usize;

    fn rank_dense(&self, rows: usize, cols: usize, data: Vec<Self::Elem>) -> usize {
        self.rank_capped(rows, cols, data, usize::MAX)
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        let inv = self.inv(b).ok_or(Error::DivisionByZero)?;
        Ok(self.mul(a, &inv))
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }
}

/// `F_p` with residues stored as `u64` in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        FieldSpec::prime(p)?;
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn spec(&self) -> FieldSpec {
        FieldSpec::Prime(self.p)
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.p)
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(pow_mod(*a, self.p - 2, self.p))
        }
    }
    fn from_i64(&self, v: i64) -> u64 {
        let r = (v as i128).rem_euclid(self.p as i128);
        r as u64
    }
    fn parse_elem(&self, s: &str) -> Result<u64> {
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n = self.parse_elem(n)?;
            let d = self.parse_elem(d)?;
            return self.div(&n, &d);
        }
        let v: i128 = t
            .parse()
            .map_err(|_| Error::parse(0, format!("bad residue `{t}`")))?;
        Ok(v.rem_euclid(self.p as i128) as u64)
    }
    fn format_elem(&self, a: &u64) -> String {
        a.to_string()
    }
    fn to_element(&self, a: &u64) -> FieldElement {
        FieldElement::Prime {
            modulus: self.p,
            value: *a,
        }
    }
    fn from_element(&self, e: &FieldElement) -> Result<u64> {
        match e {
            FieldElement::Prime { modulus, value } if *modulus == self.p => Ok(*value),
            other => Err(Error::FieldMismatch(self.spec(), other.field())),
        }
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }
    fn rank_capped(&self, rows: usize, cols: usize, data: Vec<u64>, limit: usize) -> usize {
        elim::prime_rank_capped(self.p, rows, cols, data, limit)
    }
}

/// The rationals, elements kept in lowest terms with positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn spec(&self) -> FieldSpec {
        FieldSpec::Rational
    }
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn parse_elem(&self, s: &str) -> Result<BigRational> {
        parse_rational(s)
    }
    fn format_elem(&self, a: &BigRational) -> String {
        format_rational(a)
    }
    fn to_element(&self, a: &BigRational) -> FieldElement {
        FieldElement::Rational(a.clone())
    }
    fn from_element(&self, e: &FieldElement) -> Result<BigRational> {
        match e {
            FieldElement::Rational(q) => Ok(q.clone()),
            other => Err(Error::FieldMismatch(FieldSpec::Rational, other.field())),
        }
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> BigRational {
        let num: i64 = rng.gen_range(-4..=4);
        let den: i64 = rng.gen_range(1..=3);
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn rank_capped(&self, rows: usize, cols: usize, data: Vec<BigRational>, limit: usize) -> usize {
        elim::bareiss_rank_rational_capped(rows, cols, data, limit)
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::parse(0, format!("bad rational `{t}`"));
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(BigRational::new(n, d))
}

pub fn format_rational(a: &BigRational) -> String {
    if a.denom().is_one() {
        a.numer().to_string()
    } else {
        format!("{}/{}", a.numer(), a.denom())
    }
}

/// Converts a finite `f64` to the exactly equal rational.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("non-finite value {x}")))
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// A scalar that knows which field it belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldElement {
    Prime { modulus: u64, value: u64 },
    Rational(BigRational),
}

impl FieldElement {
    pub fn from_i64(spec: FieldSpec, v: i64) -> Self {
        match spec {
            FieldSpec::Prime(p) => FieldElement::Prime {
                modulus: p,
                value: (v as i128).rem_euclid(p as i128) as u64,
            },
            FieldSpec::Rational => FieldElement::Rational(BigRational::from_integer(v.into())),
        }
    }

    pub fn parse(spec: FieldSpec, s: &str) -> Result<Self> {
        match spec {
            FieldSpec::Prime(p) => {
                let value = PrimeField::new(p)?.parse_elem(s)?;
                Ok(FieldElement::Prime { modulus: p, value })
            }
            FieldSpec::Rational => Ok(FieldElement::Rational(parse_rational(s)?)),
        }
    }

    pub fn field(&self) -> FieldSpec {
        match self {
            FieldElement::Prime { modulus, .. } => FieldSpec::Prime(*modulus),
            FieldElement::Rational(_) => FieldSpec::Rational,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElement::Prime { value, .. } => *value == 0,
            FieldElement::Rational(q) => q.is_zero(),
        }
    }

    /// Re-reduces the representative; a no-op on values built through this API.
    pub fn canonical(&self) -> Self {
        match self {
            FieldElement::Prime { modulus, value } => FieldElement::Prime {
                modulus: *modulus,
                value: value % modulus,
            },
            FieldElement::Rational(q) => {
                FieldElement::Rational(BigRational::new(q.numer().clone(), q.denom().clone()))
            }
        }
    }

    fn binary(
        &self,
        other: &Self,
        fp: impl Fn(&PrimeField, &u64, &u64) -> Result<u64>,
        q: impl Fn(&BigRational, &BigRational) -> Result<BigRational>,
    ) -> Result<Self> {
        match (self, other) {
            (
                FieldElement::Prime { modulus: p, value: a },
                FieldElement::Prime { modulus: p2, value: b },
            ) if p == p2 => {
                let f = PrimeField { p: *p };
                Ok(FieldElement::Prime {
                    modulus: *p,
                    value: fp(&f, a, b)?,
                })
            }
            (FieldElement::Rational(a), FieldElement::Rational(b)) => {
                Ok(FieldElement::Rational(q(a, b)?))
            }
            _ => Err(Error::FieldMismatch(self.field(), other.field())),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.binary(other, |f, a, b| Ok(f.add(a, b)), |a, b| Ok(a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.binary(other, |f, a, b| Ok(f.sub(a, b)), |a, b| Ok(a - b))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.binary(other, |f, a, b| Ok(f.mul(a, b)), |a, b| Ok(a * b))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.binary(
            other,
            |f, a, b| f.div(a, b),
            |a, b| {
                if b.is_zero() {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(a / b)
                }
            },
        )
    }

    pub fn inverse(&self) -> Result<Self> {
        let one = FieldElement::from_i64(self.field(), 1);
        one.checked_div(self)
    }
}

impl Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElement::Prime { value, .. } => write!(f, "{value}"),
            FieldElement::Rational(q) => f.write_str(&format_rational(q)),
        }
    }
}
