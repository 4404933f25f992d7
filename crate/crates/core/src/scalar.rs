//! Exact arithmetic over the Gaussian rationals Q(i).
//!
//! Rational parts are stored in a small `i64/i64` form whenever they fit and
//! promoted to arbitrary precision otherwise. The representation is canonical
//! (lowest terms, positive denominator, small form preferred), so derived
//! equality and hashing are semantic.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse scalar {0:?}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Rat {
    Small(i64, i64),
    Big(Box<BigRational>),
}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Rat::Small(n, d) => {
                n.hash(state);
                d.hash(state);
            }
            Rat::Big(b) => b.hash(state),
        }
    }
}

impl Rat {
    const ZERO: Rat = Rat::Small(0, 1);
    const ONE: Rat = Rat::Small(1, 1);

    fn from_i128(n: i128, d: i128) -> Rat {
        debug_assert!(d != 0);
        let g = gcd_i128(n, d);
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rat::Small(n, d),
            _ => Rat::from_big(BigRational::new(BigInt::from(n), BigInt::from(d))),
        }
    }

    fn from_big(b: BigRational) -> Rat {
        if let (Some(n), Some(d)) = (b.numer().to_i64(), b.denom().to_i64()) {
            Rat::Small(n, d)
        } else {
            Rat::Big(Box::new(b))
        }
    }

    fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Rat::Big(b) => (**b).clone(),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Rat::Small(0, _))
    }

    fn add(&self, o: &Rat) -> Rat {
        match (self, o) {
            (Rat::Small(0, _), _) => o.clone(),
            (_, Rat::Small(0, _)) => self.clone(),
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                if b == d {
                    return Rat::from_i128(a + c, b);
                }
                match (a * d).checked_add(c * b) {
                    Some(n) => Rat::from_i128(n, b * d),
                    None => Rat::from_big(self.to_big() + o.to_big()),
                }
            }
            _ => Rat::from_big(self.to_big() + o.to_big()),
        }
    }

    fn neg(&self) -> Rat {
        match self {
            Rat::Small(n, d) => match n.checked_neg() {
                Some(m) => Rat::Small(m, *d),
                None => Rat::from_big(-self.to_big()),
            },
            Rat::Big(b) => Rat::from_big(-(**b).clone()),
        }
    }

    fn sub(&self, o: &Rat) -> Rat {
        self.add(&o.neg())
    }

    fn mul(&self, o: &Rat) -> Rat {
        match (self, o) {
            (Rat::Small(0, _), _) | (_, Rat::Small(0, _)) => Rat::ZERO,
            (Rat::Small(1, 1), _) => o.clone(),
            (_, Rat::Small(1, 1)) => self.clone(),
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                Rat::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Rat::from_big(self.to_big() * o.to_big()),
        }
    }

    fn recip(&self) -> Rat {
        match self {
            Rat::Small(n, d) => Rat::from_i128(*d as i128, *n as i128),
            Rat::Big(b) => Rat::from_big(b.recip()),
        }
    }

    fn is_negative(&self) -> bool {
        match self {
            Rat::Small(n, _) => *n < 0,
            Rat::Big(b) => b.is_negative(),
        }
    }

    fn abs(&self) -> Rat {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    fn is_integer(&self) -> bool {
        match self {
            Rat::Small(_, d) => *d == 1,
            Rat::Big(b) => b.is_integer(),
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Small(n, 1) => write!(f, "{n}"),
            Rat::Small(n, d) => write!(f, "{n}/{d}"),
            Rat::Big(b) => write!(f, "{b}"),
        }
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    if a == 0 {
        1
    } else {
        a as i128
    }
}

fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let valid = |t: &str, signed: bool| {
        let digits = if signed { t.strip_prefix('-').unwrap_or(t) } else { t };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(n, true) || !valid(d, false) {
        return None;
    }
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rat::from_big(BigRational::new(n, d)))
}

/// An element `re + im*i` of Q(i).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    re: Rat,
    im: Rat,
}

impl Default for GaussianRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl GaussianRational {
    pub fn zero() -> Self {
        Self { re: Rat::ZERO, im: Rat::ZERO }
    }

    pub fn one() -> Self {
        Self { re: Rat::ONE, im: Rat::ZERO }
    }

    pub fn i() -> Self {
        Self { re: Rat::ZERO, im: Rat::ONE }
    }

    pub fn from_int(n: i64) -> Self {
        Self { re: Rat::Small(n, 1), im: Rat::ZERO }
    }

    /// The real rational `n/d`. Panics if `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Self { re: Rat::from_i128(n as i128, d as i128), im: Rat::ZERO }
    }

    /// `(a/b) + (c/d)i`. Panics on a zero denominator.
    pub fn complex(a: i64, b: i64, c: i64, d: i64) -> Self {
        assert!(b != 0 && d != 0, "zero denominator");
        Self {
            re: Rat::from_i128(a as i128, b as i128),
            im: Rat::from_i128(c as i128, d as i128),
        }
    }

    /// The purely imaginary value `n*i`.
    pub fn imag(n: i64) -> Self {
        Self { re: Rat::ZERO, im: Rat::Small(n, 1) }
    }

    pub fn from_parts(re: BigRational, im: BigRational) -> Self {
        Self { re: Rat::from_big(re), im: Rat::from_big(im) }
    }

    pub fn re(&self) -> BigRational {
        self.re.to_big()
    }

    pub fn im(&self) -> BigRational {
        self.im.to_big()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re == Rat::ONE && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_imaginary(&self) -> bool {
        self.re.is_zero()
    }

    /// True when both parts are integers.
    pub fn is_gaussian_integer(&self) -> bool {
        self.re.is_integer() && self.im.is_integer()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: self.im.neg() }
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        Self { re: self.im.neg(), im: self.re.clone() }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        let k = Rat::Small(n, 1);
        Self { re: self.re.mul(&k), im: self.im.mul(&k) }
    }

    pub fn norm_sqr(&self) -> BigRational {
        let r = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        r.to_big()
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.im.is_zero() {
            return Ok(Self { re: self.re.recip(), im: Rat::ZERO });
        }
        let n = self.re.mul(&self.re).add(&self.im.mul(&self.im)).recip();
        Ok(Self { re: self.re.mul(&n), im: self.im.neg().mul(&n) })
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self, ScalarError> {
        Ok(self * &o.inv()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..e {
            r = &r * self;
        }
        r
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im_str = |r: &Rat| -> String {
            match r {
                Rat::Small(1, 1) => "i".to_string(),
                Rat::Small(-1, 1) => "-i".to_string(),
                _ => format!("{r}*i"),
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}", im_str(&self.im)),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "{}-{}", self.re, im_str(&self.im.abs()))
                } else {
                    write!(f, "{}+{}", self.re, im_str(&self.im))
                }
            }
        }
    }
}

impl FromStr for GaussianRational {
    type Err = ScalarError;

    /// Accepts `a/b+c/d*i` with either part omitted, e.g. `3`, `i`, `-1/2*i`, `1-i`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ScalarError::Parse(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(err());
        }
        // Split at the last sign that is not leading.
        let split = t
            .char_indices()
            .filter(|&(k, c)| k > 0 && (c == '+' || c == '-'))
            .map(|(k, _)| k)
            .next_back();
        let (a, b) = match split {
            Some(k) => (&t[..k], &t[k..]),
            None => ("", &t[..]),
        };
        let parse_part = |p: &str| -> Option<(Rat, bool)> {
            let p = p.strip_prefix('+').unwrap_or(p);
            if let Some(body) = p.strip_suffix('i') {
                let body = body.strip_suffix('*').unwrap_or(body);
                let r = match body {
                    "" => Rat::ONE,
                    "-" => Rat::Small(-1, 1),
                    _ => parse_rat(body)?,
                };
                Some((r, true))
            } else {
                Some((parse_rat(p)?, false))
            }
        };
        let mut out = GaussianRational::zero();
        for part in [a, b] {
            if part.is_empty() {
                continue;
            }
            let (r, imag) = parse_part(part).ok_or_else(err)?;
            if imag {
                if !out.im.is_zero() {
                    return Err(err());
                }
                out.im = r;
            } else {
                if !out.re.is_zero() {
                    return Err(err());
                }
                out.re = r;
            }
        }
        if !a.is_empty() {
            // "a+b" must be one real and one imaginary part.
            let a_imag = a.ends_with('i');
            let b_imag = b.ends_with('i');
            if a_imag == b_imag {
                return Err(err());
            }
        }
        Ok(out)
    }
}

impl From<i64> for GaussianRational {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussianRational { re: self.re.mul(&o.re), im: Rat::ZERO };
        }
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        GaussianRational { re, im }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: self.re.neg(), im: self.im.neg() }
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        -&self
    }
}

/// Panics on division by zero; use [`GaussianRational::checked_div`] to handle it.
impl<'a> Div<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn div(self, o: &GaussianRational) -> GaussianRational {
        self.checked_div(o).expect("division by zero")
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: GaussianRational) -> GaussianRational {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: &GaussianRational) -> GaussianRational {
                (&self).$m(o)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, o: &GaussianRational) {
        self.re = self.re.add(&o.re);
        self.im = self.im.add(&o.im);
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, o: &GaussianRational) {
        self.re = self.re.sub(&o.re);
        self.im = self.im.sub(&o.im);
    }
}

impl MulAssign<&GaussianRational> for GaussianRational {
    fn mul_assign(&mut self, o: &GaussianRational) {
        *self = &*self * o;
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        GaussianRational::zero()
    }
    fn is_zero(&self) -> bool {
        GaussianRational::is_zero(self)
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        GaussianRational::one()
    }
}

/// Exact integer check helper used by tests and reports.
pub fn big_int_of(x: &GaussianRational) -> Option<BigInt> {
    if x.im.is_zero() && x.re.is_integer() {
        Some(x.re.to_big().to_integer())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gq(s: &str) -> GaussianRational {
        s.parse().unwrap()
    }

    #[test]
    fn basic_products() {
        assert_eq!(gq("1+i") * gq("1-i"), gq("2"));
        assert_eq!(GaussianRational::i() * GaussianRational::i(), gq("-1"));
        assert_eq!(gq("1/2*i") + gq("1/2*i"), GaussianRational::i());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(gq("3").checked_div(&gq("0")), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn text_forms() {
        for s in ["0", "3", "i", "-i", "-1/2*i", "1/2+3/4*i", "-7/3-i", "5*i"] {
            assert_eq!(gq(s).to_string(), s);
        }
        assert_eq!(gq("2/4"), gq("1/2"));
        assert_eq!(gq(" -1 / 2 * i "), gq("-1/2*i"));
        assert!("1/0".parse::<GaussianRational>().is_err());
        assert!("1+2".parse::<GaussianRational>().is_err());
        assert!("x".parse::<GaussianRational>().is_err());
    }

    #[test]
    fn overflow_promotes_to_big() {
        let big = GaussianRational::from_int(i64::MAX);
        let sq = &big * &big;
        let back = sq.checked_div(&big).unwrap();
        assert_eq!(back, big);
        let r = GaussianRational::ratio(1, i64::MAX) + GaussianRational::ratio(1, i64::MAX - 1);
        assert_eq!(r.clone() - GaussianRational::ratio(1, i64::MAX - 1), GaussianRational::ratio(1, i64::MAX));
        let s: GaussianRational = sq.to_string().parse().unwrap();
        assert_eq!(s, sq);
        assert_eq!(-GaussianRational::from_int(i64::MIN), &GaussianRational::from_int(i64::MAX) + &GaussianRational::one());
    }
}
