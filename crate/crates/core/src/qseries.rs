//! Exact truncated series in a fractional power of `q`.
//!
//! A [`FracPowSeries`] stores rational coefficients of `q^{j/Δ}` for
//! `min_exp ≤ j < trunc_order`. Coefficients at or beyond `trunc_order` are
//! unknown, and every operation returns the largest order it can guarantee.
//! The second half of the module builds the named series: `f`, `f₂`, the
//! outer expansions in `w = q⁻¹`, `ψ`, partial theta functions, and the
//! modulus-5 family `A±`, `Φ`, `Φ*`, `F±`.

use std::fmt;

use rug::{Assign, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, kronecker};
use crate::error::{Error, Result};
use crate::special::BigComplex;

/// Truncated series `Σ_{min_exp ≤ j < trunc_order} c_j q^{j/scale} + O(q^{trunc_order/scale})`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SeriesRecord", into = "SeriesRecord")]
pub struct FracPowSeries {
    scale: u32,
    min_exp: i64,
    trunc_order: i64,
    coeffs: Vec<Rational>,
}

/// Wire format: exact coefficients as `"p/q"` (or `"p"`) strings.
#[derive(Serialize, Deserialize)]
struct SeriesRecord {
    scale: u32,
    min_exp: i64,
    trunc_order: i64,
    coeffs: Vec<String>,
}

impl From<FracPowSeries> for SeriesRecord {
    fn from(s: FracPowSeries) -> Self {
        SeriesRecord {
            scale: s.scale,
            min_exp: s.min_exp,
            trunc_order: s.trunc_order,
            coeffs: s.coeffs.iter().map(|c| c.to_string()).collect(),
        }
    }
}

impl TryFrom<SeriesRecord> for FracPowSeries {
    type Error = Error;
    fn try_from(r: SeriesRecord) -> Result<Self> {
        let coeffs = r
            .coeffs
            .iter()
            .map(|c| Rational::from_str_radix(c, 10).map_err(|_| Error::Parse(c.clone())))
            .collect::<Result<Vec<_>>>()?;
        FracPowSeries::new(r.scale, r.min_exp, r.trunc_order, coeffs)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a as i64, b as i64) as u32 * b
}

impl FracPowSeries {
    pub fn new(scale: u32, min_exp: i64, trunc_order: i64, coeffs: Vec<Rational>) -> Result<Self> {
        if scale == 0 {
            return Err(Error::InvalidArgument("series scale must be at least 1".into()));
        }
        if trunc_order < min_exp || coeffs.len() as i64 != trunc_order - min_exp {
            return Err(Error::InvalidArgument(format!(
                "series with min_exp {min_exp} and order {trunc_order} needs {} coefficients, got {}",
                trunc_order - min_exp,
                coeffs.len()
            )));
        }
        Ok(Self { scale, min_exp, trunc_order, coeffs })
    }

    /// `0 + O(q^{order/scale})`.
    pub fn zero(scale: u32, order: i64) -> Self {
        let min_exp = order.min(0);
        Self {
            scale,
            min_exp,
            trunc_order: order,
            coeffs: vec![Rational::new(); (order - min_exp) as usize],
        }
    }

    /// `c·q^{exp/scale} + O(q^{order/scale})`.
    pub fn monomial(c: Rational, exp: i64, scale: u32, order: i64) -> Self {
        if exp >= order {
            return Self::zero(scale, order);
        }
        let mut coeffs = vec![Rational::new(); (order - exp) as usize];
        coeffs[0] = c;
        Self { scale, min_exp: exp, trunc_order: order, coeffs }
    }

    pub fn one(scale: u32, order: i64) -> Self {
        Self::monomial(Rational::from(1), 0, scale, order)
    }

    /// Builds `Σ c_j q^{e_j/scale}` from (exponent, coefficient) pairs below `order`.
    pub fn from_terms<I>(terms: I, scale: u32, order: i64) -> Self
    where
        I: IntoIterator<Item = (i64, Rational)>,
    {
        let terms: Vec<_> = terms.into_iter().filter(|(e, _)| *e < order).collect();
        let min_exp = terms.iter().map(|(e, _)| *e).min().unwrap_or(0).min(order);
        let mut coeffs = vec![Rational::new(); (order - min_exp) as usize];
        for (e, c) in terms {
            coeffs[(e - min_exp) as usize] += c;
        }
        Self { scale, min_exp, trunc_order: order, coeffs }
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn min_exp(&self) -> i64 {
        self.min_exp
    }

    pub fn trunc_order(&self) -> i64 {
        self.trunc_order
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `q^{j/scale}`; zero below `min_exp`, an error at or
    /// beyond the truncation order.
    pub fn coeff(&self, j: i64) -> Result<Rational> {
        if j >= self.trunc_order {
            return Err(Error::BeyondTruncation {
                requested: format!("{j}/{}", self.scale),
                order: format!("{}/{}", self.trunc_order, self.scale),
            });
        }
        if j < self.min_exp {
            return Ok(Rational::new());
        }
        Ok(self.coeffs[(j - self.min_exp) as usize].clone())
    }

    /// Nonzero terms as (exponent in lowest terms, coefficient).
    pub fn terms(&self) -> Vec<(Rational, Rational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| (Rational::from((self.min_exp + i as i64, self.scale as i64)), c.clone()))
            .collect()
    }

    /// Same series over the finer denominator `new_scale` (a multiple of `scale`).
    pub fn rescale(&self, new_scale: u32) -> Result<Self> {
        if new_scale % self.scale != 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot rescale from 1/{} to 1/{new_scale}",
                self.scale
            )));
        }
        let f = (new_scale / self.scale) as i64;
        if f == 1 {
            return Ok(self.clone());
        }
        let min_exp = self.min_exp * f;
        let trunc_order = self.trunc_order * f;
        let mut coeffs = vec![Rational::new(); (trunc_order - min_exp) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * f as usize] = c.clone();
        }
        Ok(Self { scale: new_scale, min_exp, trunc_order, coeffs })
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        let s = lcm(a.scale, b.scale);
        (a.rescale(s).expect("lcm rescale"), b.rescale(s).expect("lcm rescale"))
    }

    /// Drops every coefficient at or beyond `order` (in own units).
    pub fn truncate(&self, order: i64) -> Self {
        if order >= self.trunc_order {
            return self.clone();
        }
        let min_exp = self.min_exp.min(order);
        let mut coeffs = vec![Rational::new(); (order - min_exp) as usize];
        for j in self.min_exp..order {
            coeffs[(j - min_exp) as usize] = self.coeffs[(j - self.min_exp) as usize].clone();
        }
        Self { scale: self.scale, min_exp, trunc_order: order, coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = Self::common(self, other);
        let order = a.trunc_order.min(b.trunc_order);
        let min_exp = a.min_exp.min(b.min_exp).min(order);
        let mut coeffs = vec![Rational::new(); (order - min_exp) as usize];
        for s in [&a, &b] {
            for j in s.min_exp..order {
                coeffs[(j - min_exp) as usize] += &s.coeffs[(j - s.min_exp) as usize];
            }
        }
        Self { scale: a.scale, min_exp, trunc_order: order, coeffs }
    }

    /// Exact multiplication by `q^{e/scale}`.
    pub fn shifted(&self, e: i64) -> Self {
        Self {
            scale: self.scale,
            min_exp: self.min_exp + e,
            trunc_order: self.trunc_order + e,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = Rational::from(-&*c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        for x in &mut out.coeffs {
            *x *= c;
        }
        out
    }

    /// Cauchy product, known to order `min(N_a + m_b, N_b + m_a)`.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = Self::common(self, other);
        let min_exp = a.min_exp + b.min_exp;
        let order = (a.trunc_order + b.min_exp).min(b.trunc_order + a.min_exp);
        let len = (order - min_exp) as usize;
        let mut coeffs = vec![Rational::new(); len];
        let mut prod = Rational::new();
        for (i, ca) in a.coeffs.iter().enumerate().take(len) {
            if *ca == 0 {
                continue;
            }
            for (j, cb) in b.coeffs.iter().enumerate().take(len - i) {
                if *cb == 0 {
                    continue;
                }
                prod.assign(ca * cb);
                coeffs[i + j] += &prod;
            }
        }
        Self { scale: a.scale, min_exp, trunc_order: order, coeffs }
    }

    /// Multiplicative inverse, known to order `N − 2m`; the coefficient at
    /// `min_exp` must be nonzero.
    pub fn inv(&self) -> Result<Self> {
        let lead = self.coeffs.first().cloned().unwrap_or_default();
        if lead == 0 {
            return Err(Error::NonInvertible {
                exponent: format!("{}/{}", self.min_exp, self.scale),
            });
        }
        let m = self.min_exp;
        let len = (self.trunc_order - m) as usize;
        let lead_inv = lead.recip();
        let mut out: Vec<Rational> = Vec::with_capacity(len);
        let mut tmp = Rational::new();
        for i in 0..len {
            let mut acc = if i == 0 { Rational::from(1) } else { Rational::new() };
            for j in 1..=i {
                if self.coeffs[j] != 0 {
                    tmp.assign(&self.coeffs[j] * &out[i - j]);
                    acc -= &tmp;
                }
            }
            out.push(acc * &lead_inv);
        }
        Self::new(self.scale, -m, self.trunc_order - 2 * m, out)
    }

    /// In place multiplication by the exact binomial `1 − c·q^{e/scale}`.
    pub fn mul_binomial(&mut self, c: &Rational, e: i64) {
        if e <= 0 {
            let bin = binomial(c, e, self.scale);
            *self = self.mul(&bin);
            return;
        }
        let e = e as usize;
        let mut tmp = Rational::new();
        for i in (e..self.coeffs.len()).rev() {
            if self.coeffs[i - e] != 0 {
                tmp.assign(c * &self.coeffs[i - e]);
                self.coeffs[i] -= &tmp;
            }
        }
    }

    /// In place division by the exact binomial `1 − c·q^{e/scale}`.
    pub fn div_binomial(&mut self, c: &Rational, e: i64) -> Result<()> {
        if e <= 0 {
            let bin = binomial(c, e, self.scale).truncate_exact(self.trunc_order - self.min_exp + 2 * e);
            *self = self.mul(&bin.inv()?);
            return Ok(());
        }
        let e = e as usize;
        let mut tmp = Rational::new();
        for i in e..self.coeffs.len() {
            if self.coeffs[i - e] != 0 {
                tmp.assign(c * &self.coeffs[i - e]);
                self.coeffs[i] += &tmp;
            }
        }
        Ok(())
    }

    fn truncate_exact(mut self, order: i64) -> Self {
        let order = order.max(self.min_exp + 1);
        self.coeffs.resize((order - self.min_exp) as usize, Rational::new());
        self.trunc_order = order;
        self
    }

    /// Numeric value at `x`, where `x` stands for `q^{1/scale}`.
    pub fn evaluate(&self, x: &BigComplex) -> Result<BigComplex> {
        let p = x.prec();
        if x.is_zero() && self.min_exp < 0 {
            return Err(Error::ZeroArgument("series with negative exponents"));
        }
        let mut acc = BigComplex::zero(p);
        // Horner from the top coefficient down.
        for c in self.coeffs.iter().rev() {
            acc = &acc * x;
            if *c != 0 {
                acc += BigComplex::from_rationals(c, &Rational::new(), p);
            }
        }
        let shift = if self.min_exp >= 0 {
            pow_int(x, self.min_exp as u64)
        } else {
            pow_int(&x.recip(), (-self.min_exp) as u64)
        };
        Ok(&acc * &shift)
    }
}

fn pow_int(x: &BigComplex, mut e: u64) -> BigComplex {
    let mut base = x.clone();
    let mut acc = BigComplex::one(x.prec());
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

/// The exact polynomial `1 − c·q^{e/scale}` as a series of large order.
fn binomial(c: &Rational, e: i64, scale: u32) -> FracPowSeries {
    let order = e.max(0) + 1;
    FracPowSeries::from_terms([(0, Rational::from(1)), (e, Rational::from(-c))], scale, order)
}

impl fmt::Display for FracPowSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({c})*q^({e})")?;
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(q^({}))", Rational::from((self.trunc_order, self.scale as i64)))
    }
}

// ===========================================================================
// q-Pochhammer products
// ===========================================================================

/// Number of factors in a q-Pochhammer product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Count {
    Finite(u64),
    Infinite,
}

/// `∏_{j<n} (1 − coeff·q^{(a+jb)/scale}) + O(q^{order/scale})`.
///
/// An infinite product needs `a > 0` and `b > 0` so that only finitely many
/// factors are visible below the truncation order.
pub fn qpochhammer(coeff: &Rational, a: i64, b: i64, count: Count, order: i64, scale: u32) -> Result<FracPowSeries> {
    let mut out = FracPowSeries::one(scale, order);
    match count {
        Count::Infinite => {
            if a <= 0 || b <= 0 {
                return Err(Error::DivergentProduct);
            }
            let mut e = a;
            while e < order {
                out.mul_binomial(coeff, e);
                e += b;
            }
        }
        Count::Finite(n) => {
            for j in 0..n as i64 {
                let e = a + j * b;
                if e >= order && e > 0 && b >= 0 {
                    break;
                }
                out.mul_binomial(coeff, e);
            }
        }
    }
    Ok(out)
}

// ===========================================================================
// Identity checks
// ===========================================================================

/// First coefficient at which two series differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    /// Exponent in lowest terms, `"p/q"` or `"p"`.
    pub exponent: String,
    pub lhs: String,
    pub rhs: String,
}

/// Outcome of comparing two series on their common known range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesIdentityReport {
    /// Exponents below `checked_order / scale` were compared.
    pub checked_order: i64,
    pub scale: u32,
    pub equal: bool,
    pub first_mismatch: Option<Mismatch>,
}

/// Exact comparison of `lhs` and `rhs` below the smaller truncation order.
pub fn verify_identity(lhs: &FracPowSeries, rhs: &FracPowSeries) -> Result<SeriesIdentityReport> {
    let (a, b) = FracPowSeries::common(lhs, rhs);
    let order = a.trunc_order.min(b.trunc_order);
    let start = a.min_exp.min(b.min_exp);
    if a.min_exp.max(b.min_exp) >= order {
        return Err(Error::DisjointRanges);
    }
    let mut first_mismatch = None;
    for j in start..order {
        let (x, y) = (a.coeff(j)?, b.coeff(j)?);
        if x != y {
            first_mismatch = Some(Mismatch {
                exponent: Rational::from((j, a.scale as i64)).to_string(),
                lhs: x.to_string(),
                rhs: y.to_string(),
            });
            break;
        }
    }
    Ok(SeriesIdentityReport {
        checked_order: order,
        scale: a.scale,
        equal: first_mismatch.is_none(),
        first_mismatch,
    })
}

// ===========================================================================
// Named series
// ===========================================================================

fn r(n: i64) -> Rational {
    Rational::from(n)
}

fn require_order(n: i64) -> Result<()> {
    if n < 1 {
        return Err(Error::Domain { what: "order", requirement: "order >= 1" });
    }
    Ok(())
}

/// `f(q) = Σ_{n≥0} q^{n²}/(−q;q)_n²`.
pub fn series_f(order: i64) -> Result<FracPowSeries> {
    require_order(order)?;
    let mut total = FracPowSeries::zero(1, order);
    let minus_one = r(-1);
    let mut n = 0i64;
    while n * n < order {
        let mut term = FracPowSeries::monomial(r(1), n * n, 1, order);
        for j in 1..=n {
            term.div_binomial(&minus_one, j)?;
            term.div_binomial(&minus_one, j)?;
        }
        total = total.add(&term);
        n += 1;
    }
    Ok(total)
}

/// `f₂(q) = 1 + Σ_{n≥1} (−1)^{n−1} qⁿ/((1+q)…(1+qⁿ))`.
///
/// With the sign `(−1)ⁿ` instead the series would be `2 − f(q)`.
pub fn series_f2(order: i64) -> Result<FracPowSeries> {
    require_order(order)?;
    let minus_one = r(-1);
    let mut total = FracPowSeries::one(1, order);
    // 1/((1+q)…(1+qⁿ)), grown one factor at a time.
    let mut recip = FracPowSeries::one(1, order);
    for n in 1..order {
        recip.div_binomial(&minus_one, n)?;
        let sign = if n % 2 == 1 { 1 } else { -1 };
        let term = recip.shifted(n).scalar_mul(&r(sign));
        total = total.add(&term.truncate(order));
    }
    Ok(total)
}

/// The series of [`series_f2`] read for `|q| > 1`, in `w = q⁻¹`:
/// `qⁿ/((1+q)…(1+qⁿ)) = w^{n(n−1)/2}/((1+w)…(1+wⁿ))`, so this is
/// `1 + Σ_{n≥1} (−1)^{n−1} w^{n(n−1)/2}/((1+w)…(1+wⁿ))`.
pub fn series_f2_outer(order: i64) -> Result<FracPowSeries> {
    require_order(order)?;
    let minus_one = r(-1);
    let mut total = FracPowSeries::one(1, order);
    let mut recip = FracPowSeries::one(1, order);
    let mut n = 1i64;
    while n * (n - 1) / 2 < order {
        recip.div_binomial(&minus_one, n)?;
        let e = n * (n - 1) / 2;
        let sign = if n % 2 == 1 { 1 } else { -1 };
        let term = recip.shifted(e).scalar_mul(&r(sign));
        total = total.add(&term.truncate(order));
        n += 1;
    }
    Ok(total)
}

/// Outer expansion of `f` in `w = q⁻¹`: `1 + Σ_{n≥1} wⁿ/((1+w)²…(1+wⁿ)²)`.
pub fn series_f_outer(order: i64) -> Result<FracPowSeries> {
    require_order(order)?;
    let minus_one = r(-1);
    let mut total = FracPowSeries::one(1, order);
    let mut recip = FracPowSeries::one(1, order);
    for n in 1..order {
        recip.div_binomial(&minus_one, n)?;
        recip.div_binomial(&minus_one, n)?;
        let term = recip.shifted(n).scalar_mul(&r(1));
        total = total.add(&term.truncate(order));
    }
    Ok(total)
}

/// `ψ(w) = Σ_{n≥1} (−12/n) w^{(n²−1)/24}`.
pub fn series_psi(order: i64) -> Result<FracPowSeries> {
    require_order(order)?;
    let mut terms = Vec::new();
    let mut n = 1i64;
    while (n * n - 1) / 24 < order {
        if gcd(n, 6) == 1 {
            terms.push(((n * n - 1) / 24, r(kronecker(-12, n) as i64)));
        }
        n += 1;
    }
    Ok(FracPowSeries::from_terms(terms, 1, order))
}

/// Partial theta series `Σ_{n≥0, n²<N} ψ(n)·nᵛ·q^{n²}` for a character
/// table `ψ` on residues mod `modulus` and `ν ∈ {0, 1}`.
pub fn series_partial_theta(modulus: u64, table: &[i64], nu: u32, order: i64) -> Result<FracPowSeries> {
    require_order(order)?;
    if modulus == 0 || table.len() as u64 != modulus {
        return Err(Error::InvalidArgument(format!(
            "character table must have {modulus} entries, got {}",
            table.len()
        )));
    }
    if nu > 1 {
        return Err(Error::Domain { what: "nu", requirement: "nu in {0, 1}" });
    }
    let mut terms = Vec::new();
    let mut n = 0i64;
    while n * n < order {
        let chi = table[(n as u64 % modulus) as usize];
        let weight = if nu == 0 { 1 } else { n };
        terms.push((n * n, r(chi * weight)));
        n += 1;
    }
    Ok(FracPowSeries::from_terms(terms, 1, order))
}

/// Which residue class mod 5 (and which half-line) a modulus-5 series uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// `A±(q) = ±Σ_{n>0, n≡±1 (5)} (12/n) q^{(n²−1)/120}`.
///
/// The overall sign makes each coefficient `(12/n)·Re ε(n)` for the quartic
/// character `ε` mod 5 with `ε(2) = i`.
pub fn series_a_pm(sign: Sign, order: i64) -> Result<FracPowSeries> {
    require_order(order)?;
    let s = sign.value();
    let mut terms = Vec::new();
    let mut n = 1i64;
    while (n * n - 1) / 120 < order {
        if (n - s).rem_euclid(5) == 0 {
            let chi = kronecker(12, n) as i64;
            if chi != 0 {
                terms.push(((n * n - 1) / 120, r(s * chi)));
            }
        }
        n += 1;
    }
    Ok(FracPowSeries::from_terms(terms, 1, order))
}

/// `Φ(q) = −1 + Σ_{n≥0} q^{5n²}/((q;q⁵)_{n+1}(q⁴;q⁵)_n)`.
pub fn series_phi5(order: i64) -> Result<FracPowSeries> {
    require_order(order)?;
    let one = r(1);
    let mut total = FracPowSeries::monomial(r(-1), 0, 1, order);
    // recip = 1/((q;q⁵)_{n+1}(q⁴;q⁵)_n)
    let mut recip = FracPowSeries::one(1, order);
    recip.div_binomial(&one, 1)?;
    let mut n = 0i64;
    while 5 * n * n < order {
        if n > 0 {
            recip.div_binomial(&one, 5 * n + 1)?;
            recip.div_binomial(&one, 5 * n - 1)?;
        }
        let e = 5 * n * n;
        let term = recip.shifted(e).scalar_mul(&r(1));
        total = total.add(&term.truncate(order));
        n += 1;
    }
    Ok(total)
}

/// `Φ*(q) = −1 − Σ_{n≥0} q^{5n+1}/((q;q⁵)_{n+1}(q⁴;q⁵)_n)`, which equals `Φ(1/q)`.
pub fn series_phi5_star(order: i64) -> Result<FracPowSeries> {
    require_order(order)?;
    let one = r(1);
    let mut total = FracPowSeries::monomial(r(-1), 0, 1, order);
    let mut recip = FracPowSeries::one(1, order);
    recip.div_binomial(&one, 1)?;
    let mut n = 0i64;
    while 5 * n + 1 < order {
        if n > 0 {
            recip.div_binomial(&one, 5 * n + 1)?;
            recip.div_binomial(&one, 5 * n - 1)?;
        }
        let e = 5 * n + 1;
        let term = recip.shifted(e).scalar_mul(&r(-1));
        total = total.add(&term.truncate(order));
        n += 1;
    }
    Ok(total)
}

/// `F±(q) = Σ_{±(n−1/2)>0} (−1)ⁿ q^{(5n²−n)/2}`.
pub fn series_f_pm(sign: Sign, order: i64) -> Result<FracPowSeries> {
    require_order(order)?;
    let mut terms = Vec::new();
    let mut n = if sign == Sign::Plus { 1i64 } else { 0 };
    loop {
        let e = (5 * n * n - n) / 2;
        if e >= order {
            break;
        }
        terms.push((e, r(if n % 2 == 0 { 1 } else { -1 })));
        n += sign.value();
    }
    Ok(FracPowSeries::from_terms(terms, 1, order))
}

/// `1/((q⁴;q⁵)_∞(q;q⁵)_∞)`, the Rogers–Ramanujan type factor of the
/// modulus-5 identities.
pub fn rogers_ramanujan_recip(order: i64) -> Result<FracPowSeries> {
    let one = r(1);
    let mut recip = FracPowSeries::one(1, order);
    let mut e = 1;
    while e < order {
        recip.div_binomial(&one, e)?;
        e += 5;
    }
    let mut e = 4;
    while e < order {
        recip.div_binomial(&one, e)?;
        e += 5;
    }
    Ok(recip)
}

/// Right-hand side of the outer identity for `f`:
/// `2ψ(w) − Σ_{n≥0} (−1)ⁿ w^{n(n+1)/2} / (−w;w)²_∞`.
pub fn f_outer_rhs(order: i64) -> Result<FracPowSeries> {
    let psi2 = series_psi(order)?.scalar_mul(&r(2));
    let eta = qpochhammer(&r(-1), 1, 1, Count::Infinite, order, 1)?;
    let inv = eta.mul(&eta).inv()?;
    let mut terms = Vec::new();
    let mut n = 0i64;
    while n * (n + 1) / 2 < order {
        terms.push((n * (n + 1) / 2, r(if n % 2 == 0 { 1 } else { -1 })));
        n += 1;
    }
    let tri = FracPowSeries::from_terms(terms, 1, order);
    Ok(psi2.sub(&inv.mul(&tri)))
}

/// The two modulus-5 identities: `−Φ* = A₊ − R·F₊` and `−Φ* = A₋ + R·F₋`
/// with `R = 1/((q⁴;q⁵)_∞(q;q⁵)_∞)`.
pub fn wrt_identities(order: i64) -> Result<[SeriesIdentityReport; 2]> {
    let lhs = series_phi5_star(order)?.neg();
    let recip = rogers_ramanujan_recip(order)?;
    let plus = series_a_pm(Sign::Plus, order)?.sub(&recip.mul(&series_f_pm(Sign::Plus, order)?));
    let minus = series_a_pm(Sign::Minus, order)?.add(&recip.mul(&series_f_pm(Sign::Minus, order)?));
    Ok([verify_identity(&lhs, &plus)?, verify_identity(&lhs, &minus)?])
}

/// Integer coefficient of `qⁿ` as a rug integer, if it is one.
pub fn integer_coeff(s: &FracPowSeries, j: i64) -> Result<Integer> {
    let c = s.coeff(j)?;
    if *c.denom() != 1 {
        return Err(Error::InvalidArgument(format!("coefficient {c} is not an integer")));
    }
    Ok(c.numer().clone())
}
