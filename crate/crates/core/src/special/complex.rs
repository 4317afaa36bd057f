//! Arbitrary precision complex numbers built on a pair of MPFR floats.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::error::{Error, Result};

/// A complex number `re + i·im` whose parts are MPFR floats.
///
/// The precision of a value is the smaller of the two part precisions, and
/// binary operations produce results at the smaller precision of their
/// operands.
#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    re: Float,
    im: Float,
}

#[inline]
fn fl(prec: u32) -> Float {
    Float::new(prec)
}

impl BigComplex {
    pub fn zero(prec: u32) -> Self {
        Self { re: fl(prec), im: fl(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_f64(1.0, 0.0, prec)
    }

    pub fn i(prec: u32) -> Self {
        Self::from_f64(0.0, 1.0, prec)
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Self {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_parts(re: Float, im: Float) -> Self {
        Self { re, im }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        Self { re, im: fl(prec) }
    }

    pub fn from_rationals(re: &Rational, im: &Rational, prec: u32) -> Self {
        Self {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    /// `e^{iθ}` for a real angle θ.
    pub fn cis(theta: &Float) -> Self {
        let (s, c) = theta.clone().sin_cos(fl(theta.prec()));
        Self { re: c, im: s }
    }

    pub fn re(&self) -> &Float {
        &self.re
    }

    pub fn im(&self) -> &Float {
        &self.im
    }

    pub fn into_parts(self) -> (Float, Float) {
        (self.re, self.im)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().min(self.im.prec())
    }

    /// Same value rounded (or padded) to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        Self {
            re: Float::with_val(prec, &self.re),
            im: Float::with_val(prec, &self.im),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    /// Principal argument in (−π, π].
    pub fn arg(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.im.atan2_ref(&self.re))
    }

    pub fn scale(&self, factor: &Float) -> Self {
        let p = self.prec().min(factor.prec());
        Self {
            re: Float::with_val(p, &self.re * factor),
            im: Float::with_val(p, &self.im * factor),
        }
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        Self {
            re: -self.im.clone(),
            im: self.re.clone(),
        }
    }

    pub fn recip(&self) -> Self {
        BigComplex::one(self.prec()) / self
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let m = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(fl(p));
        Self {
            re: Float::with_val(p, &m * &c),
            im: m * s,
        }
    }

    /// Principal logarithm; fails at zero.
    pub fn ln(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroArgument("log"));
        }
        Ok(Self {
            re: self.abs().ln(),
            im: self.arg(),
        })
    }

    /// Principal square root (branch cut on the negative real axis, `−x+0i`
    /// maps to the positive imaginary axis and `−x−0i` to the negative one).
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return Self::zero(p);
        }
        let r = self.abs();
        let two = Float::with_val(p, 2);
        if !self.re.is_sign_negative() {
            let t = (Float::with_val(p, &r + &self.re) / &two).sqrt();
            let im = Float::with_val(p, &self.im / &t) / &two;
            Self { re: t, im }
        } else {
            let t = (Float::with_val(p, &r - &self.re) / &two).sqrt();
            let re = Float::with_val(p, self.im.abs_ref()) / &t / &two;
            let im = if self.im.is_sign_negative() { -t } else { t };
            Self { re, im }
        }
    }

    /// Principal power `z^e = exp(e·Log z)` for a real exponent.
    pub fn pow_real(&self, e: &Float) -> Result<Self> {
        Ok(self.ln()?.scale(e).exp())
    }

    pub fn sin(&self) -> Self {
        let p = self.prec();
        let (s, c) = self.re.clone().sin_cos(fl(p));
        let (sh, ch) = self.im.clone().sinh_cosh(fl(p));
        Self {
            re: s * ch,
            im: c * sh,
        }
    }

    pub fn cos(&self) -> Self {
        let p = self.prec();
        let (s, c) = self.re.clone().sin_cos(fl(p));
        let (sh, ch) = self.im.clone().sinh_cosh(fl(p));
        Self {
            re: c * ch,
            im: -(s * sh),
        }
    }

    pub fn sinh(&self) -> Self {
        let p = self.prec();
        let (sh, ch) = self.re.clone().sinh_cosh(fl(p));
        let (s, c) = self.im.clone().sin_cos(fl(p));
        Self {
            re: sh * c,
            im: ch * s,
        }
    }

    /// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i/2`, `1/3+1/4i`, ... where
    /// each real literal is a decimal (optionally with exponent) or a ratio
    /// of decimals. Rational literals are converted exactly before rounding.
    pub fn parse(text: &str, prec: u32) -> Result<Self> {
        let (re, im) = parse_complex_rational(text)?;
        Ok(Self::from_rationals(&re, &im, prec))
    }

    /// Decimal rendering with `digits` significant digits, e.g. `0.5-1.25i`.
    pub fn to_string_digits(&self, digits: usize) -> String {
        let re = float_to_string(&self.re, digits);
        let im = float_to_string(&self.im, digits);
        if im.starts_with('-') {
            format!("{re}{im}i")
        } else {
            format!("{re}+{im}i")
        }
    }
}

/// Decimal string of a float with `digits` significant digits.
pub fn float_to_string(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits))
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

fn parse_decimal(text: &str) -> Result<Rational> {
    let err = || Error::Parse(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(err());
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(pos) => (&digits[..pos], &digits[pos + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer = rug::Integer::from_str_radix(if all.is_empty() { "0" } else { &all }, 10)
        .map_err(|_| err())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = rug::Integer::from(10);
    let mut value = Rational::from(numer);
    if scale >= 0 {
        value *= Rational::from(ten.pow(scale as u32));
    } else {
        value /= Rational::from(ten.pow((-scale) as u32));
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Parses a real literal: decimal or `decimal/decimal`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    match text.split_once('/') {
        Some((n, d)) => {
            let d = parse_decimal(d)?;
            if d == 0 {
                return Err(Error::Parse(text.to_string()));
            }
            Ok(parse_decimal(n)? / d)
        }
        None => parse_decimal(text),
    }
}

fn parse_complex_rational(text: &str) -> Result<(Rational, Rational)> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse(text.to_string()));
    }
    // Split into signed terms at '+'/'-' that do not follow an exponent marker.
    let bytes = s.as_bytes();
    let mut terms = Vec::new();
    let mut start = 0;
    for i in 1..bytes.len() {
        let c = bytes[i];
        if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'/') {
            terms.push(&s[start..i]);
            start = i;
        }
    }
    terms.push(&s[start..]);
    if terms.len() > 2 {
        return Err(Error::Parse(text.to_string()));
    }
    let mut re = Rational::new();
    let mut im = Rational::new();
    let (mut seen_re, mut seen_im) = (false, false);
    for term in terms {
        if term.contains('i') {
            if seen_im || term.matches('i').count() != 1 {
                return Err(Error::Parse(text.to_string()));
            }
            seen_im = true;
            let (sign, body) = match term.strip_prefix('-') {
                Some(rest) => (-1, rest),
                None => (1, term.strip_prefix('+').unwrap_or(term)),
            };
            // "i", "2i", "i/4", "1/4i", "0.5*i"
            let body = body.replace('*', "");
            let without_i = body.replacen('i', "", 1);
            let value = if without_i.is_empty() {
                Rational::from(1)
            } else if let Some(den) = without_i.strip_prefix('/') {
                Rational::from(1) / parse_decimal(den)?
            } else {
                parse_rational(&without_i)?
            };
            im = value * sign;
        } else {
            if seen_re {
                return Err(Error::Parse(text.to_string()));
            }
            seen_re = true;
            re = parse_rational(term)?;
        }
    }
    Ok((re, im))
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_digits(20))
    }
}

impl<'a> Add<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec().min(rhs.prec());
        BigComplex {
            re: Float::with_val(p, &self.re + &rhs.re),
            im: Float::with_val(p, &self.im + &rhs.im),
        }
    }
}

impl<'a> Sub<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec().min(rhs.prec());
        BigComplex {
            re: Float::with_val(p, &self.re - &rhs.re),
            im: Float::with_val(p, &self.im - &rhs.im),
        }
    }
}

impl<'a> Mul<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec().min(rhs.prec());
        let ac = Float::with_val(p, &self.re * &rhs.re);
        let bd = Float::with_val(p, &self.im * &rhs.im);
        let ad = Float::with_val(p, &self.re * &rhs.im);
        let bc = Float::with_val(p, &self.im * &rhs.re);
        BigComplex { re: ac - bd, im: ad + bc }
    }
}

impl<'a> Div<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn div(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec().min(rhs.prec());
        let denom = rhs.norm_sqr();
        let ac = Float::with_val(p, &self.re * &rhs.re);
        let bd = Float::with_val(p, &self.im * &rhs.im);
        let ad = Float::with_val(p, &self.re * &rhs.im);
        let bc = Float::with_val(p, &self.im * &rhs.re);
        BigComplex {
            re: (ac + bd) / &denom,
            im: (bc - ad) / &denom,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: BigComplex) -> BigComplex {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: &BigComplex) -> BigComplex {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<BigComplex> for &'a BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: BigComplex) -> BigComplex {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&BigComplex> for BigComplex {
    fn add_assign(&mut self, rhs: &BigComplex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl AddAssign<BigComplex> for BigComplex {
    fn add_assign(&mut self, rhs: BigComplex) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl SubAssign<&BigComplex> for BigComplex {
    fn sub_assign(&mut self, rhs: &BigComplex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&BigComplex> for BigComplex {
    fn mul_assign(&mut self, rhs: &BigComplex) {
        *self = &*self * rhs;
    }
}

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        -self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    fn close(a: &BigComplex, b: &BigComplex, tol: f64) -> bool {
        (a - b).abs().to_f64() <= tol
    }

    #[test]
    fn field_operations() {
        let a = BigComplex::from_f64(1.5, -2.0, P);
        let b = BigComplex::from_f64(-0.25, 3.0, P);
        let prod = &a * &b;
        assert_eq!(prod.to_f64(), (1.5 * -0.25 + 6.0, 4.5 + 0.5));
        let back = &prod / &b;
        assert!(close(&back, &a, 1e-35));
        assert!(close(&(&a - &a), &BigComplex::zero(P), 0.0));
    }

    #[test]
    fn principal_sqrt_and_log() {
        let m4 = BigComplex::from_f64(-4.0, 0.0, P);
        assert_eq!(m4.sqrt().to_f64(), (0.0, 2.0));
        let m4neg = BigComplex::from_parts(Float::with_val(P, -4), -Float::new(P));
        assert_eq!(m4neg.sqrt().to_f64(), (0.0, -2.0));
        let z = BigComplex::from_f64(0.3, -1.7, P);
        let r = z.sqrt();
        assert!(close(&(&r * &r), &z, 1e-35));
        assert!(r.re().to_f64() > 0.0);
        let l = z.ln().unwrap();
        assert!(close(&l.exp(), &z, 1e-35));
        assert!(BigComplex::zero(P).ln().is_err());
    }

    #[test]
    fn trig_identities() {
        let z = BigComplex::from_f64(0.7, -0.4, P);
        let s = z.sin();
        let c = z.cos();
        let one = &(&s * &s) + &(&c * &c);
        assert!(close(&one, &BigComplex::one(P), 1e-35));
        // sinh(iz) = i sin z
        assert!(close(&z.mul_i().sinh(), &s.mul_i(), 1e-35));
    }

    #[test]
    fn parse_forms() {
        let cases = [
            ("0.25-0.5i", (0.25, -0.5)),
            ("i", (0.0, 1.0)),
            ("-i", (0.0, -1.0)),
            ("-i/2", (0.0, -0.5)),
            ("1/3+1/4i", (1.0 / 3.0, 0.25)),
            ("1/5 - i/3", (0.2, -1.0 / 3.0)),
            ("10i", (0.0, 10.0)),
            ("2", (2.0, 0.0)),
            ("1e-1+2.5e1i", (0.1, 25.0)),
        ];
        for (text, (re, im)) in cases {
            let z = BigComplex::parse(text, P).unwrap();
            let (a, b) = z.to_f64();
            assert!((a - re).abs() < 1e-15 && (b - im).abs() < 1e-15, "{text}: {a} {b}");
        }
        for bad in ["", "1+2+3i", "ii", "abc", "1/0"] {
            assert!(BigComplex::parse(bad, P).is_err(), "{bad}");
        }
    }

    #[test]
    fn precision_is_minimum_of_operands() {
        let a = BigComplex::one(200);
        let b = BigComplex::one(100);
        assert_eq!((&a + &b).prec(), 100);
        assert_eq!((&a * &b).prec(), 100);
    }
}
