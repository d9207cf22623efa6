//! Exact scalar fields: the rationals and finite fields GF(p^k).
//!
//! A [`Field`] is a cheap, shareable handle. Scalars are plain values; every
//! arithmetic operation goes through the field that gives them meaning.
//! Finite-field elements are packed as the integer `c_0 + c_1 p + ... `
//! of their residue coefficients modulo the defining polynomial.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::AlgebraError;
use crate::numtheory::{is_prime, mod_pow, prime_factors};
use crate::poly;

/// Largest supported field order for GF(p^k).
pub const MAX_FIELD_ORDER: u64 = (1 << 31) - 1;
const LOG_TABLE_LIMIT: u64 = 1 << 16;

/// Serializable description of a field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldDescriptor {
    Rationals,
    Prime {
        p: u64,
    },
    Extension {
        p: u64,
        k: u32,
        /// Monic modulus coefficients `c_0..c_k`; chosen by the library when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modulus: Option<Vec<u64>>,
    },
}

/// An exact scalar. Its meaning depends on the [`Field`] it is used with.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Rational(BigRational),
    Finite(u32),
}

/// Scalar text as it appears in interchange documents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarText {
    Int(i64),
    Text(String),
    Coeffs(Vec<i64>),
}

#[derive(Debug)]
struct FiniteField {
    p: u64,
    k: u32,
    q: u64,
    /// Monic, length k + 1.
    modulus: Vec<u64>,
    /// Discrete log tables over a primitive element, when k > 1 and q is small.
    tables: Option<(Vec<u32>, Vec<u32>)>,
}

#[derive(Debug)]
enum Inner {
    Rationals,
    Finite(FiniteField),
}

#[derive(Clone, Debug)]
pub struct Field(Arc<Inner>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (&*self.0, &*other.0) {
            (Inner::Rationals, Inner::Rationals) => true,
            (Inner::Finite(a), Inner::Finite(b)) => a.p == b.p && a.modulus == b.modulus,
            _ => false,
        }
    }
}

impl Eq for Field {}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Inner::Rationals => write!(f, "Q"),
            Inner::Finite(ff) if ff.k == 1 => write!(f, "GF({})", ff.p),
            Inner::Finite(ff) => write!(f, "GF({}^{})", ff.p, ff.k),
        }
    }
}

impl Field {
    pub fn rationals() -> Field {
        Field(Arc::new(Inner::Rationals))
    }

    pub fn prime(p: u64) -> Result<Field, AlgebraError> {
        Field::new(&FieldDescriptor::Prime { p })
    }

    pub fn extension(p: u64, k: u32) -> Result<Field, AlgebraError> {
        Field::new(&FieldDescriptor::Extension {
            p,
            k,
            modulus: None,
        })
    }

    pub fn new(desc: &FieldDescriptor) -> Result<Field, AlgebraError> {
        match desc {
            FieldDescriptor::Rationals => Ok(Field::rationals()),
            FieldDescriptor::Prime { p } => Field::finite(*p, 1, Some(&[0, 1])),
            FieldDescriptor::Extension { p, k, modulus } => {
                Field::finite(*p, *k, modulus.as_deref())
            }
        }
    }

    fn finite(p: u64, k: u32, modulus: Option<&[u64]>) -> Result<Field, AlgebraError> {
        if !is_prime(p) {
            return Err(AlgebraError::NonPrimeModulus(p));
        }
        if k == 0 {
            return Err(AlgebraError::BadModulus("extension degree must be positive".into()));
        }
        let q = (p as u128).checked_pow(k).unwrap_or(u128::MAX);
        if q > u128::from(MAX_FIELD_ORDER) {
            return Err(AlgebraError::FieldTooLarge { p, k });
        }
        let q = q as u64;
        let modulus: Vec<u64> = if k == 1 {
            vec![0, 1]
        } else {
            match modulus {
                None => poly::least_irreducible(p, k),
                Some(m) => {
                    if m.len() != k as usize + 1 {
                        return Err(AlgebraError::BadModulus(format!(
                            "modulus must list {} coefficients c_0..c_{k}",
                            k + 1
                        )));
                    }
                    if m[k as usize] != 1 {
                        return Err(AlgebraError::BadModulus("modulus must be monic".into()));
                    }
                    if m.iter().any(|&c| c >= p) {
                        return Err(AlgebraError::BadModulus(format!(
                            "modulus coefficients must lie in [0, {p})"
                        )));
                    }
                    if !poly::is_irreducible(m, p) {
                        return Err(AlgebraError::ReducibleModulusPolynomial);
                    }
                    m.to_vec()
                }
            }
        };
        let mut ff = FiniteField {
            p,
            k,
            q,
            modulus,
            tables: None,
        };
        if k > 1 && q <= LOG_TABLE_LIMIT {
            ff.tables = Some(ff.build_tables());
        }
        Ok(Field(Arc::new(Inner::Finite(ff))))
    }

    /// The descriptor this field was built from, with the modulus made explicit.
    pub fn descriptor(&self) -> FieldDescriptor {
        match &*self.0 {
            Inner::Rationals => FieldDescriptor::Rationals,
            Inner::Finite(ff) if ff.k == 1 => FieldDescriptor::Prime { p: ff.p },
            Inner::Finite(ff) => FieldDescriptor::Extension {
                p: ff.p,
                k: ff.k,
                modulus: Some(ff.modulus.clone()),
            },
        }
    }

    pub fn characteristic(&self) -> u64 {
        match &*self.0 {
            Inner::Rationals => 0,
            Inner::Finite(ff) => ff.p,
        }
    }

    /// Number of elements, `None` for the rationals.
    pub fn order(&self) -> Option<u64> {
        match &*self.0 {
            Inner::Rationals => None,
            Inner::Finite(ff) => Some(ff.q),
        }
    }

    /// Extension degree over the prime field (1 for the rationals).
    pub fn degree(&self) -> u32 {
        match &*self.0 {
            Inner::Rationals => 1,
            Inner::Finite(ff) => ff.k,
        }
    }

    pub fn is_rationals(&self) -> bool {
        matches!(&*self.0, Inner::Rationals)
    }

    pub fn zero(&self) -> Scalar {
        match &*self.0 {
            Inner::Rationals => Scalar::Rational(BigRational::zero()),
            Inner::Finite(_) => Scalar::Finite(0),
        }
    }

    pub fn one(&self) -> Scalar {
        match &*self.0 {
            Inner::Rationals => Scalar::Rational(BigRational::one()),
            Inner::Finite(_) => Scalar::Finite(1),
        }
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match &*self.0 {
            Inner::Rationals => Scalar::Rational(BigRational::from_integer(BigInt::from(v))),
            Inner::Finite(ff) => Scalar::Finite(v.rem_euclid(ff.p as i64) as u32),
        }
    }

    /// Every element of a finite field in packed-code order.
    pub fn elements(&self) -> Option<impl Iterator<Item = Scalar>> {
        self.order().map(|q| (0..q).map(|c| Scalar::Finite(c as u32)))
    }

    /// Whether the scalar lies in the prime subfield.
    pub fn in_prime_field(&self, a: &Scalar) -> bool {
        match (&*self.0, a) {
            (Inner::Finite(ff), Scalar::Finite(c)) => u64::from(*c) < ff.p,
            (Inner::Rationals, _) => true,
            _ => false,
        }
    }

    pub fn is_zero(&self, a: &Scalar) -> bool {
        match a {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Finite(c) => *c == 0,
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (&*self.0, a, b) {
            (Inner::Rationals, Scalar::Rational(x), Scalar::Rational(y)) => Scalar::Rational(x + y),
            (Inner::Finite(ff), Scalar::Finite(x), Scalar::Finite(y)) => {
                Scalar::Finite(ff.add(u64::from(*x), u64::from(*y)) as u32)
            }
            _ => panic!("scalar does not belong to field {self}"),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match (&*self.0, a) {
            (Inner::Rationals, Scalar::Rational(x)) => Scalar::Rational(-x),
            (Inner::Finite(ff), Scalar::Finite(x)) => Scalar::Finite(ff.neg(u64::from(*x)) as u32),
            _ => panic!("scalar does not belong to field {self}"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (&*self.0, a, b) {
            (Inner::Rationals, Scalar::Rational(x), Scalar::Rational(y)) => Scalar::Rational(x - y),
            _ => self.add(a, &self.neg(b)),
        }
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (&*self.0, a, b) {
            (Inner::Rationals, Scalar::Rational(x), Scalar::Rational(y)) => Scalar::Rational(x * y),
            (Inner::Finite(ff), Scalar::Finite(x), Scalar::Finite(y)) => {
                Scalar::Finite(ff.mul(u64::from(*x), u64::from(*y)) as u32)
            }
            _ => panic!("scalar does not belong to field {self}"),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        if self.is_zero(a) {
            return None;
        }
        Some(match (&*self.0, a) {
            (Inner::Rationals, Scalar::Rational(x)) => Scalar::Rational(x.recip()),
            (Inner::Finite(ff), Scalar::Finite(x)) => Scalar::Finite(ff.inv(u64::from(*x)) as u32),
            _ => panic!("scalar does not belong to field {self}"),
        })
    }

    /// Residue coefficients `c_0..c_{k-1}` of a finite-field element.
    pub fn coeffs(&self, a: &Scalar) -> Option<Vec<u64>> {
        match (&*self.0, a) {
            (Inner::Finite(ff), Scalar::Finite(c)) => Some(ff.unpack(u64::from(*c))),
            _ => None,
        }
    }

    /// Element of a finite field from residue coefficients; entries must lie in [0, p).
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<Scalar, AlgebraError> {
        match &*self.0 {
            Inner::Rationals => Err(AlgebraError::InvalidScalar(
                "coefficient lists are only valid over finite fields".into(),
            )),
            Inner::Finite(ff) => {
                if coeffs.len() > ff.k as usize || coeffs.iter().any(|&c| c >= ff.p) {
                    return Err(AlgebraError::InvalidScalar(format!(
                        "expected at most {} coefficients in [0, {})",
                        ff.k, ff.p
                    )));
                }
                Ok(Scalar::Finite(ff.pack(coeffs) as u32))
            }
        }
    }

    /// Interpret interchange text as a scalar of this field.
    pub fn parse(&self, text: &ScalarText) -> Result<Scalar, AlgebraError> {
        match (&*self.0, text) {
            (Inner::Rationals, ScalarText::Int(v)) => Ok(self.from_i64(*v)),
            (Inner::Rationals, ScalarText::Text(s)) => parse_rational(s).map(Scalar::Rational),
            (Inner::Rationals, ScalarText::Coeffs(_)) => Err(AlgebraError::InvalidScalar(
                "coefficient lists are only valid over finite fields".into(),
            )),
            (Inner::Finite(ff), ScalarText::Int(v)) => {
                if *v < 0 || *v as u64 >= ff.p {
                    return Err(AlgebraError::InvalidScalar(format!(
                        "finite-field entry {v} outside [0, {})",
                        ff.p
                    )));
                }
                Ok(Scalar::Finite(*v as u32))
            }
            (Inner::Finite(_), ScalarText::Text(s)) => {
                let v: i64 = s.trim().parse().map_err(|_| {
                    AlgebraError::InvalidScalar(format!("'{s}' is not a finite-field entry"))
                })?;
                self.parse(&ScalarText::Int(v))
            }
            (Inner::Finite(_), ScalarText::Coeffs(cs)) => {
                if cs.iter().any(|&c| c < 0) {
                    return Err(AlgebraError::InvalidScalar(format!(
                        "negative coefficient in {cs:?}"
                    )));
                }
                let cs: Vec<u64> = cs.iter().map(|&c| c as u64).collect();
                self.from_coeffs(&cs)
            }
        }
    }

    /// Canonical interchange text for a scalar.
    pub fn format(&self, a: &Scalar) -> ScalarText {
        match (&*self.0, a) {
            (Inner::Rationals, Scalar::Rational(r)) => ScalarText::Text(format_rational(r)),
            (Inner::Finite(ff), Scalar::Finite(c)) if ff.k == 1 => ScalarText::Int(i64::from(*c)),
            (Inner::Finite(ff), Scalar::Finite(c)) => {
                ScalarText::Coeffs(ff.unpack(u64::from(*c)).into_iter().map(|x| x as i64).collect())
            }
            _ => panic!("scalar does not belong to field {self}"),
        }
    }

    /// Human-readable form of a scalar.
    pub fn render(&self, a: &Scalar) -> String {
        match self.format(a) {
            ScalarText::Int(v) => v.to_string(),
            ScalarText::Text(t) => t,
            ScalarText::Coeffs(c) => format!("{c:?}"),
        }
    }

    /// Integer value of a rational scalar, if it is one.
    pub fn as_integer(&self, a: &Scalar) -> Option<BigInt> {
        match a {
            Scalar::Rational(r) if r.is_integer() => Some(r.to_integer()),
            _ => None,
        }
    }

    /// Stable byte encoding used for canonical keys and digests.
    pub fn encode(&self, a: &Scalar, out: &mut Vec<u8>) {
        match a {
            Scalar::Rational(r) => {
                out.push(if r.is_negative() { 1 } else { 0 });
                for part in [r.numer(), r.denom()] {
                    let bytes = part.magnitude().to_bytes_le();
                    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
                    out.extend_from_slice(&bytes);
                }
            }
            Scalar::Finite(c) => out.extend_from_slice(&c.to_le_bytes()),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, AlgebraError> {
    let bad = || AlgebraError::InvalidScalar(format!("'{s}' is not a rational of the form a or a/b"));
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let valid = |x: &str, signed: bool| {
        let digits = if signed {
            x.strip_prefix(['+', '-']).unwrap_or(x)
        } else {
            x
        };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num, true) || !valid(den, false) {
        return Err(bad());
    }
    let n: BigInt = num.trim_start_matches('+').parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(AlgebraError::InvalidScalar(format!("'{s}' has a zero denominator")));
    }
    Ok(BigRational::new(n, d))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl FiniteField {
    fn unpack(&self, mut code: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.k as usize);
        for _ in 0..self.k {
            out.push(code % self.p);
            code /= self.p;
        }
        out
    }

    fn pack(&self, coeffs: &[u64]) -> u64 {
        coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn add(&self, x: u64, y: u64) -> u64 {
        if self.k == 1 {
            let s = x + y;
            return if s >= self.p { s - self.p } else { s };
        }
        let (mut x, mut y) = (x, y);
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.k {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        out
    }

    fn neg(&self, x: u64) -> u64 {
        if self.k == 1 {
            return if x == 0 { 0 } else { self.p - x };
        }
        let coeffs: Vec<u64> = self
            .unpack(x)
            .into_iter()
            .map(|c| (self.p - c) % self.p)
            .collect();
        self.pack(&coeffs)
    }

    fn mul_poly(&self, x: u64, y: u64) -> u64 {
        let prod = poly::mul_mod(&self.unpack(x), &self.unpack(y), &self.modulus, self.p);
        self.pack(&prod)
    }

    fn mul(&self, x: u64, y: u64) -> u64 {
        if x == 0 || y == 0 {
            return 0;
        }
        if self.k == 1 {
            return x * y % self.p;
        }
        match &self.tables {
            Some((log, exp)) => {
                let e = (u64::from(log[x as usize]) + u64::from(log[y as usize])) % (self.q - 1);
                u64::from(exp[e as usize])
            }
            None => self.mul_poly(x, y),
        }
    }

    fn pow(&self, x: u64, mut e: u64) -> u64 {
        let mut result = 1u64;
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(result, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        result
    }

    fn inv(&self, x: u64) -> u64 {
        if self.k == 1 {
            return mod_pow(x, self.p - 2, self.p);
        }
        match &self.tables {
            Some((log, exp)) => {
                let e = (self.q - 1 - u64::from(log[x as usize])) % (self.q - 1);
                u64::from(exp[e as usize])
            }
            None => self.pow(x, self.q - 2),
        }
    }

    fn build_tables(&self) -> (Vec<u32>, Vec<u32>) {
        let order = self.q - 1;
        let factors = prime_factors(order);
        let pow_poly = |x: u64, mut e: u64| {
            let mut result = 1u64;
            let mut b = x;
            while e > 0 {
                if e & 1 == 1 {
                    result = self.mul_poly(result, b);
                }
                b = self.mul_poly(b, b);
                e >>= 1;
            }
            result
        };
        let generator = (2..self.q)
            .find(|&g| factors.iter().all(|&f| pow_poly(g, order / f) != 1))
            .expect("multiplicative group of a finite field is cyclic");
        let mut log = vec![0u32; self.q as usize];
        let mut exp = vec![0u32; self.q as usize];
        let mut acc = 1u64;
        for i in 0..order {
            exp[i as usize] = acc as u32;
            log[acc as usize] = i as u32;
            acc = self.mul_poly(acc, generator);
        }
        (log, exp)
    }
}
