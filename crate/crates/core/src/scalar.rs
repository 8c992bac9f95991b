//! Exact scalars: rationals with an `i64` fast path and Gaussian rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Exact field element. Implemented by [`Q`] and [`G`].
pub trait Field:
    Sized
    + Clone
    + PartialEq
    + Eq
    + Hash
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + Neg<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(v: i64) -> Self;
    fn from_q(v: Q) -> Self;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;
    /// Complex conjugation (identity on rationals).
    fn conj(&self) -> Self;
    /// Real and imaginary parts.
    fn parts(&self) -> (Q, Q);
    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

/// Exact rational number in lowest terms, positive denominator.
///
/// Values whose numerator and denominator fit in an `i64` are kept inline;
/// larger values are boxed big rationals. The representation is canonical,
/// so derived equality and hashing are value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Q {
    S(i64, i64),
    B(Box<BigRational>),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn fits(v: i128) -> bool {
    v > i64::MIN as i128 && v <= i64::MAX as i128
}

impl Q {
    pub fn new(n: i64, d: i64) -> Q {
        assert!(d != 0, "zero denominator");
        Q::from_i128(n as i128, d as i128)
    }

    pub fn int(n: i64) -> Q {
        Q::from_i128(n as i128, 1)
    }

    fn from_i128(n: i128, d: i128) -> Q {
        let (mut n, mut d) = if d < 0 { (-n, -d) } else { (n, d) };
        if n == 0 {
            return Q::S(0, 1);
        }
        let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
        if g > 1 {
            n /= g;
            d /= g;
        }
        if fits(n) && fits(d) {
            Q::S(n as i64, d as i64)
        } else {
            Q::B(Box::new(BigRational::new_raw(BigInt::from(n), BigInt::from(d))))
        }
    }

    pub fn from_big(r: BigRational) -> Q {
        if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
            if n != i64::MIN && d != i64::MIN {
                return Q::S(n, d);
            }
        }
        Q::B(Box::new(r))
    }

    pub fn from_bigints(n: BigInt, d: BigInt) -> Q {
        assert!(!d.is_zero(), "zero denominator");
        Q::from_big(BigRational::new(n, d))
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Q::S(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Q::B(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Q::S(n, _) => BigInt::from(*n),
            Q::B(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Q::S(_, d) => BigInt::from(*d),
            Q::B(b) => b.denom().clone(),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Q::S(n, _) => n.signum() as i32,
            Q::B(b) => {
                if b.is_positive() {
                    1
                } else if b.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn abs(&self) -> Q {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Exact square root if `self` is the square of a rational.
    pub fn sqrt(&self) -> Option<Q> {
        if self.signum() < 0 {
            return None;
        }
        let n = self.numer();
        let d = self.denom();
        let rn = n.sqrt();
        let rd = d.sqrt();
        if &rn * &rn == n && &rd * &rd == d {
            Some(Q::from_bigints(rn, rd))
        } else {
            None
        }
    }

    pub fn pow(&self, e: u32) -> Q {
        let mut r = Q::int(1);
        for _ in 0..e {
            r = r * self;
        }
        r
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Q::S(n, d) => *n as f64 / *d as f64,
            Q::B(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Parse `"n"`, `"n/d"`.
    pub fn parse(s: &str) -> Option<Q> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Q::from_bigints(n, d))
    }

    fn big_op(&self, o: &Q, f: impl Fn(BigRational, BigRational) -> BigRational) -> Q {
        Q::from_big(f(self.to_big(), o.to_big()))
    }
}

impl Default for Q {
    fn default() -> Q {
        Q::S(0, 1)
    }
}

impl From<i64> for Q {
    fn from(v: i64) -> Q {
        Q::int(v)
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (self.numer(), self.denom());
        if d.is_one() {
            write!(f, "{n}")
        } else {
            write!(f, "{n}/{d}")
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Q) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Q {
    fn cmp(&self, other: &Q) -> Ordering {
        match (self, other) {
            (Q::S(a, b), Q::S(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl<'a> Add<&'a Q> for Q {
    type Output = Q;
    fn add(self, o: &Q) -> Q {
        match (&self, o) {
            (Q::S(a, b), Q::S(c, d)) => {
                if b == d {
                    Q::from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    Q::from_i128(
                        *a as i128 * *d as i128 + *c as i128 * *b as i128,
                        *b as i128 * *d as i128,
                    )
                }
            }
            _ => self.big_op(o, |x, y| x + y),
        }
    }
}

impl<'a> Sub<&'a Q> for Q {
    type Output = Q;
    fn sub(self, o: &Q) -> Q {
        match (&self, o) {
            (Q::S(a, b), Q::S(c, d)) => {
                if b == d {
                    Q::from_i128(*a as i128 - *c as i128, *b as i128)
                } else {
                    Q::from_i128(
                        *a as i128 * *d as i128 - *c as i128 * *b as i128,
                        *b as i128 * *d as i128,
                    )
                }
            }
            _ => self.big_op(o, |x, y| x - y),
        }
    }
}

impl<'a> Mul<&'a Q> for Q {
    type Output = Q;
    fn mul(self, o: &Q) -> Q {
        match (&self, o) {
            (Q::S(a, b), Q::S(c, d)) => {
                if *a == 0 || *c == 0 {
                    return Q::S(0, 1);
                }
                // cross-cancel first so the i128 products stay small
                let g1 = gcd_u128(a.unsigned_abs() as u128, *d as u128) as i128;
                let g2 = gcd_u128(c.unsigned_abs() as u128, *b as u128) as i128;
                let n = (*a as i128 / g1) * (*c as i128 / g2);
                let m = (*b as i128 / g2) * (*d as i128 / g1);
                if fits(n) && fits(m) {
                    Q::S(n as i64, m as i64)
                } else {
                    Q::B(Box::new(BigRational::new_raw(BigInt::from(n), BigInt::from(m))))
                }
            }
            _ => self.big_op(o, |x, y| x * y),
        }
    }
}

impl<'a> Div<&'a Q> for Q {
    type Output = Q;
    fn div(self, o: &Q) -> Q {
        let inv = o.inv().expect("division by zero");
        self * &inv
    }
}

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        match self {
            Q::S(n, d) => Q::S(-n, d),
            Q::B(b) => Q::from_big(-*b),
        }
    }
}

macro_rules! owned_ops {
    ($t:ty) => {
        impl Add<$t> for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                self + &o
            }
        }
        impl Sub<$t> for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                self - &o
            }
        }
        impl Mul<$t> for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                self * &o
            }
        }
        impl Div<$t> for $t {
            type Output = $t;
            fn div(self, o: $t) -> $t {
                self / &o
            }
        }
        impl<'a> AddAssign<&'a $t> for $t {
            fn add_assign(&mut self, o: &$t) {
                *self = std::mem::take(self) + o;
            }
        }
        impl<'a> SubAssign<&'a $t> for $t {
            fn sub_assign(&mut self, o: &$t) {
                *self = std::mem::take(self) - o;
            }
        }
        impl<'a> MulAssign<&'a $t> for $t {
            fn mul_assign(&mut self, o: &$t) {
                *self = std::mem::take(self) * o;
            }
        }
    };
}
owned_ops!(Q);
owned_ops!(G);

impl Field for Q {
    fn zero() -> Q {
        Q::S(0, 1)
    }
    fn one() -> Q {
        Q::S(1, 1)
    }
    fn is_zero(&self) -> bool {
        matches!(self, Q::S(0, _))
    }
    fn from_i64(v: i64) -> Q {
        Q::int(v)
    }
    fn from_q(v: Q) -> Q {
        v
    }
    fn inv(&self) -> Option<Q> {
        match self {
            Q::S(0, _) => None,
            Q::S(n, d) => Some(Q::from_i128(*d as i128, *n as i128)),
            Q::B(b) => Some(Q::from_big(b.recip())),
        }
    }
    fn conj(&self) -> Q {
        self.clone()
    }
    fn parts(&self) -> (Q, Q) {
        (self.clone(), Q::zero())
    }
}

/// Gaussian rational `re + i·im`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct G {
    pub re: Q,
    pub im: Q,
}

impl G {
    pub fn new(re: Q, im: Q) -> G {
        G { re, im }
    }
    pub fn i() -> G {
        G::new(Q::zero(), Q::one())
    }
    pub fn real(re: Q) -> G {
        G::new(re, Q::zero())
    }
    pub fn norm2(&self) -> Q {
        self.re.clone() * &self.re + &(self.im.clone() * &self.im)
    }
}

impl From<Q> for G {
    fn from(q: Q) -> G {
        G::real(q)
    }
}

impl fmt::Display for G {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.signum() < 0 {
            write!(f, "{}-{}i", self.re, -self.im.clone())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl fmt::Debug for G {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<'a> Add<&'a G> for G {
    type Output = G;
    fn add(self, o: &G) -> G {
        G::new(self.re + &o.re, self.im + &o.im)
    }
}

impl<'a> Sub<&'a G> for G {
    type Output = G;
    fn sub(self, o: &G) -> G {
        G::new(self.re - &o.re, self.im - &o.im)
    }
}

impl<'a> Mul<&'a G> for G {
    type Output = G;
    fn mul(self, o: &G) -> G {
        if o.im.is_zero() {
            return G::new(self.re * &o.re, self.im * &o.re);
        }
        if self.im.is_zero() {
            return G::new(o.re.clone() * &self.re, o.im.clone() * &self.re);
        }
        let re = self.re.clone() * &o.re - &(self.im.clone() * &o.im);
        let im = self.re * &o.im + &(self.im * &o.re);
        G::new(re, im)
    }
}

impl<'a> Div<&'a G> for G {
    type Output = G;
    fn div(self, o: &G) -> G {
        let inv = o.inv().expect("division by zero");
        self * &inv
    }
}

impl Neg for G {
    type Output = G;
    fn neg(self) -> G {
        G::new(-self.re, -self.im)
    }
}

impl Field for G {
    fn zero() -> G {
        G::default()
    }
    fn one() -> G {
        G::real(Q::one())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn from_i64(v: i64) -> G {
        G::real(Q::int(v))
    }
    fn from_q(v: Q) -> G {
        G::real(v)
    }
    fn inv(&self) -> Option<G> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm2();
        Some(G::new(self.re.clone() / &n, -self.im.clone() / &n))
    }
    fn conj(&self) -> G {
        G::new(self.re.clone(), -self.im.clone())
    }
    fn parts(&self) -> (Q, Q) {
        (self.re.clone(), self.im.clone())
    }
}

// JSON: a rational is `[num, den]`; integers that do not fit an i64 are
// written as decimal strings. A Gaussian rational is `[[n, d], [n, d]]`.

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntRepr {
    I(i64),
    S(String),
}

impl IntRepr {
    fn of(b: &BigInt) -> IntRepr {
        match b.to_i64() {
            Some(v) => IntRepr::I(v),
            None => IntRepr::S(b.to_string()),
        }
    }
    fn big<E: serde::de::Error>(self) -> Result<BigInt, E> {
        match self {
            IntRepr::I(v) => Ok(BigInt::from(v)),
            IntRepr::S(s) => s.parse().map_err(|_| E::custom(format!("bad integer {s:?}"))),
        }
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (IntRepr::of(&self.numer()), IntRepr::of(&self.denom())).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let (n, m): (IntRepr, IntRepr) = Deserialize::deserialize(d)?;
        let (n, m) = (n.big::<D::Error>()?, m.big::<D::Error>()?);
        if m.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Q::from_bigints(n, m))
    }
}

impl Serialize for G {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.re, &self.im).serialize(s)
    }
}

impl<'de> Deserialize<'de> for G {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<G, D::Error> {
        let (re, im): (Q, Q) = Deserialize::deserialize(d)?;
        Ok(G::new(re, im))
    }
}

/// Binomial coefficient `C(n, k)` as a rational, for any rational `n`.
pub fn binom(n: &Q, k: usize) -> Q {
    let mut r = Q::one();
    for j in 0..k {
        r = r * &(n.clone() - &Q::int(j as i64)) / &Q::int(j as i64 + 1);
    }
    r
}
