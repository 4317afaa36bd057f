//! The harmonic Maass completion of `f`, unary theta functions and their
//! Eichler integrals, and radial limits of the modulus-5 partial theta
//! series at roots of unity.

use rug::{Float, Rational};

use crate::arith::{kronecker, Phase};
use crate::bilateral::{f_at, f_ref};
use crate::error::{Error, Result};
use crate::qseries::Sign;
use crate::special::{float_to_string, inc_gamma_half, pi, BigComplex};

// ===========================================================================
// Unary theta functions
// ===========================================================================

/// `Σ_{n∈ℤ, support(n)} coefficient(n) q^{n²/Δ}`.
#[derive(Clone, Copy, Debug)]
pub struct UnaryThetaSpec {
    pub name: &'static str,
    /// Exponent denominator `Δ`.
    pub delta: u32,
    pub coefficient: fn(i64) -> Rational,
    pub support: fn(i64) -> bool,
}

impl UnaryThetaSpec {
    /// Coefficient of `q^{m²/Δ}` after folding `n = ±m`.
    pub fn folded(&self, m: u64) -> Rational {
        let m = m as i64;
        let mut c = Rational::new();
        for n in [m, -m] {
            if (self.support)(n) {
                c += (self.coefficient)(n);
            }
            if m == 0 {
                break;
            }
        }
        c
    }

    /// Largest `m` whose term `e^{−2πm²y/Δ}` still matters at `prec` bits.
    fn cutoff(&self, y: &Float, prec: u32) -> u64 {
        let y = y.to_f64();
        let budget = (prec as f64 + 16.0) * std::f64::consts::LN_2;
        ((budget * self.delta as f64 / (2.0 * std::f64::consts::PI * y)).sqrt()).ceil() as u64 + 2
    }
}

/// The shadow of `f`: `g₃ = Σ_{n≡1 (6)} n q^{n²/24}`.
pub fn g3() -> UnaryThetaSpec {
    UnaryThetaSpec {
        name: "g3",
        delta: 24,
        coefficient: |n| Rational::from(n),
        support: |n| n.rem_euclid(6) == 1,
    }
}

/// `Re ε(n)` for the quartic character mod 5 with `ε(2) = i`.
pub fn quartic_real(n: i64) -> i64 {
    match n.rem_euclid(5) {
        1 => 1,
        4 => -1,
        _ => 0,
    }
}

/// `Θ = Σ_{n∈ℤ} n (12/n) Re ε(n) q^{n²/120}`.
pub fn theta_120() -> UnaryThetaSpec {
    UnaryThetaSpec {
        name: "Theta",
        delta: 120,
        coefficient: |n| Rational::from(n * kronecker(12, n) as i64 * quartic_real(n)),
        support: |_| true,
    }
}

fn require_upper(z: &BigComplex) -> Result<()> {
    if z.im().is_sign_positive() && !z.im().is_zero() {
        Ok(())
    } else {
        Err(Error::Domain { what: "z", requirement: "Im z > 0" })
    }
}

/// `e(x·z)` for real `x`.
fn e_scaled(z: &BigComplex, x: &Float) -> BigComplex {
    let p = z.prec();
    z.scale(x).mul_i().scale(&(pi(p) * 2u32)).exp()
}

/// The theta series itself at `z`.
pub fn theta_eval(spec: &UnaryThetaSpec, z: &BigComplex) -> Result<BigComplex> {
    require_upper(z)?;
    let p = z.prec();
    let mut sum = BigComplex::zero(p);
    for m in 0..=spec.cutoff(z.im(), p) {
        let c = spec.folded(m);
        if c == 0 {
            continue;
        }
        let e = Float::with_val(p, m * m) / spec.delta;
        sum += &e_scaled(z, &e).scale(&Float::with_val(p, &c));
    }
    Ok(sum)
}

/// `normalization · ∫_{−z̄}^{i∞} g(τ) dτ / √(−i(τ+z))`, termwise:
/// each `q^{m²/Δ}` integrates to `i (Δ/2π)^{1/2} m^{−1} Γ(1/2, 4πm²y/Δ) q^{−m²/Δ}`.
pub fn eichler_integral(spec: &UnaryThetaSpec, z: &BigComplex, normalization: &BigComplex) -> Result<BigComplex> {
    require_upper(z)?;
    let p = z.prec();
    let four_pi_y = Float::with_val(p, pi(p) * z.im()) * 4u32;
    let mut sum = BigComplex::zero(p);
    for m in 1..=spec.cutoff(z.im(), p) {
        let c = spec.folded(m);
        if c == 0 {
            continue;
        }
        let m2_delta = Float::with_val(p, m * m) / spec.delta;
        let gamma = inc_gamma_half(&Float::with_val(p, &four_pi_y * &m2_delta))?;
        let weight = Float::with_val(p, &c) / m * gamma;
        sum += &e_scaled(z, &(-m2_delta)).scale(&weight);
    }
    let root = (Float::with_val(p, spec.delta) / (pi(p) * 2u32)).sqrt();
    Ok(&sum.scale(&root).mul_i() * normalization)
}

/// `i/√3`, the factor taking the `g₃` integral to `R₃`.
pub fn r3_normalization(prec: u32) -> BigComplex {
    let s = Float::with_val(prec, 3).sqrt().recip();
    BigComplex::from_parts(Float::new(prec), s)
}

// ===========================================================================
// Completion of f
// ===========================================================================

/// `R₃(z) = −2π^{−1/2} Σ_{n≥1} (−12/n) Γ(1/2, πn²y/6) q^{−n²/24}`.
pub fn r3(z: &BigComplex) -> Result<BigComplex> {
    require_upper(z)?;
    let p = z.prec();
    let pi_y_6 = Float::with_val(p, pi(p) * z.im()) / 6u32;
    let mut sum = BigComplex::zero(p);
    for n in 1..=g3().cutoff(z.im(), p) as i64 {
        let chi = kronecker(-12, n);
        if chi == 0 {
            continue;
        }
        let n2 = Float::with_val(p, n * n);
        let gamma = inc_gamma_half(&Float::with_val(p, &pi_y_6 * &n2))?;
        let phase = e_scaled(z, &(-(n2 / 24u32)));
        sum += &phase.scale(&(gamma * chi));
    }
    let factor = Float::with_val(p, pi(p).sqrt().recip()) * -2i32;
    Ok(sum.scale(&factor))
}

/// `h₃(z) = q^{−1/24} f(q)`.
pub fn h3(z: &BigComplex) -> Result<BigComplex> {
    let p = z.prec();
    let shift = e_scaled(z, &(-Float::with_val(p, 24).recip()));
    Ok(&shift * &f_ref(z)?)
}

/// `ĥ₃ = h₃ + R₃`.
pub fn h3hat(z: &BigComplex) -> Result<BigComplex> {
    Ok(&h3(z)? + &r3(z)?)
}

/// A determinant-one integer matrix `[[a, b], [c, d]]`.
pub type Matrix = [[i64; 2]; 2];

/// Structural membership test for `Γ(2)`.
pub fn check_gamma2(g: &Matrix) -> Result<()> {
    let [[a, b], [c, d]] = *g;
    let det = a as i128 * d as i128 - b as i128 * c as i128;
    if det != 1 {
        return Err(Error::NotInGamma2(format!("determinant {det}")));
    }
    if a.rem_euclid(2) != 1 || d.rem_euclid(2) != 1 || b.rem_euclid(2) != 0 || c.rem_euclid(2) != 0 {
        return Err(Error::NotInGamma2(format!("[[{a},{b}],[{c},{d}]] is not ≡ I mod 2")));
    }
    Ok(())
}

/// `(az + b)/(cz + d)`.
pub fn mobius(g: &Matrix, z: &BigComplex) -> BigComplex {
    let p = z.prec();
    let f = |x: i64| Float::with_val(p, x);
    let [[a, b], [c, d]] = *g;
    let num = &z.scale(&f(a)) + &BigComplex::from_real(f(b));
    let den = &z.scale(&f(c)) + &BigComplex::from_real(f(d));
    &num / &den
}

/// `| |F(γz)| − |cz+d|^{1/2} |F(z)| | / |F(z)|` for a function `F`.
pub fn modulus_defect(func: impl Fn(&BigComplex) -> Result<BigComplex>, z: &BigComplex, g: &Matrix) -> Result<f64> {
    check_gamma2(g)?;
    require_upper(z)?;
    let p = z.prec();
    let [_, [c, d]] = *g;
    let j = &z.scale(&Float::with_val(p, c)) + &BigComplex::from_real(Float::with_val(p, d));
    let at_z = func(z)?.abs();
    let at_gz = func(&mobius(g, z))?.abs();
    let expected = Float::with_val(p, j.abs().sqrt() * &at_z);
    Ok((Float::with_val(p, at_gz - expected).abs() / at_z).to_f64())
}

/// The weight-1/2 modulus relation for `ĥ₃` under `γ ∈ Γ(2)`.
pub fn modularity_check(z: &BigComplex, g: &Matrix) -> Result<f64> {
    modulus_defect(h3hat, z, g)
}

// ===========================================================================
// Radial limits
// ===========================================================================

pub const DEFAULT_RADIAL_ORDER: usize = 4;
pub const DEFAULT_T0: f64 = 0.002;
pub const DEFAULT_LEVELS: usize = 8;

/// Samples of `F(ξe^{−t})` and their polynomial extrapolation to `t = 0`.
#[derive(Clone, Debug)]
pub struct RadialEstimate {
    pub xi: Phase,
    /// `(t, value)` with `t` strictly decreasing.
    pub samples: Vec<(f64, BigComplex)>,
    pub extrapolated: BigComplex,
    pub order: usize,
}

/// Neville's scheme at `t = 0` through the given points.
fn neville_at_zero(points: &[(Float, BigComplex)]) -> BigComplex {
    let mut p: Vec<BigComplex> = points.iter().map(|(_, v)| v.clone()).collect();
    let n = points.len();
    for width in 1..n {
        for i in 0..n - width {
            let (xi, xj) = (&points[i].0, &points[i + width].0);
            // P = (x_i P_{i+1..j} − x_j P_{i..j−1}) / (x_i − x_j)
            let num = &p[i + 1].scale(xi) - &p[i].scale(xj);
            let den = Float::with_val(xi.prec(), xi - xj);
            p[i] = num.scale(&den.recip());
        }
    }
    p.swap_remove(0)
}

/// Samples `evaluator` at `q = ξe^{−t0/2^j}` for `j < levels` and
/// extrapolates the last `order + 1` samples to `t = 0`.
pub fn radial_limit(
    evaluator: impl Fn(&BigComplex) -> Result<BigComplex>,
    xi: &Phase,
    t0: f64,
    levels: usize,
    order: usize,
    prec: u32,
) -> Result<RadialEstimate> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::Domain { what: "t0", requirement: "t0 > 0" });
    }
    if levels < 3 {
        return Err(Error::Domain { what: "levels", requirement: "levels >= 3" });
    }
    if order < 1 {
        return Err(Error::Domain { what: "order", requirement: "order >= 1" });
    }
    let order = order.min(levels - 1);
    let root = xi.to_complex(prec);
    let mut samples = Vec::with_capacity(levels);
    for j in 0..levels {
        let t = Float::with_val(prec, t0) >> j as i32;
        let q = root.scale(&Float::with_val(prec, -&t).exp());
        samples.push((t, evaluator(&q)?));
    }
    let extrapolated = neville_at_zero(&samples[levels - order - 1..]);
    Ok(RadialEstimate {
        xi: xi.clone(),
        samples: samples.into_iter().map(|(t, v)| (t.to_f64(), v)).collect(),
        extrapolated,
        order,
    })
}

/// `A±(q) = ±Σ_{n≡±1 (5)} (12/n) q^{(n²−1)/120}` for `|q| < 1`.
pub fn a_pm_at(sign: Sign, q: &BigComplex) -> Result<BigComplex> {
    let p = q.prec();
    let log_q = q.ln()?;
    let decay = -log_q.re().to_f64();
    if !(decay > 0.0) {
        return Err(Error::Domain { what: "q", requirement: "|q| < 1" });
    }
    let budget = (p as f64 + 16.0) * std::f64::consts::LN_2;
    let n_max = ((120.0 * budget / decay + 1.0).sqrt()).ceil() as i64 + 1;
    let s = sign.value();
    let mut sum = BigComplex::zero(p);
    let mut n = if s > 0 { 1 } else { 4 };
    while n <= n_max {
        let chi = kronecker(12, n);
        if chi != 0 {
            let e = Float::with_val(p, (n * n - 1) / 120);
            let term = log_q.scale(&e).exp();
            sum += &term.scale(&Float::with_val(p, s * chi as i64));
        }
        n += 5;
    }
    Ok(sum)
}

/// Radial limits of `A₊` and `A₋` toward the same root of unity.
#[derive(Clone, Debug)]
pub struct WrtRadial {
    pub plus: RadialEstimate,
    pub minus: RadialEstimate,
    /// `|lim A₊ − lim A₋|`.
    pub difference: f64,
}

impl WrtRadial {
    /// `1 − lim A₊`, the value matched with the quantum invariant.
    pub fn w_estimate(&self) -> BigComplex {
        let p = self.plus.extrapolated.prec();
        &BigComplex::one(p) - &self.plus.extrapolated
    }
}

pub fn wrt_radial(xi: &Phase, t0: f64, levels: usize, prec: u32) -> Result<WrtRadial> {
    let plus = radial_limit(|q| a_pm_at(Sign::Plus, q), xi, t0, levels, DEFAULT_RADIAL_ORDER, prec)?;
    let minus = radial_limit(|q| a_pm_at(Sign::Minus, q), xi, t0, levels, DEFAULT_RADIAL_ORDER, prec)?;
    let difference = (&plus.extrapolated - &minus.extrapolated).abs().to_f64();
    Ok(WrtRadial { plus, minus, difference })
}

// ===========================================================================
// Radial profile
// ===========================================================================

/// `f_outer(w) = 1 + Σ_{n≥1} wⁿ/(−w;w)ₙ²` for `|w| < 1`.
pub fn f_outer_at(w: &BigComplex) -> Result<BigComplex> {
    if w.abs() >= 1 {
        return Err(Error::Domain { what: "w", requirement: "|w| < 1" });
    }
    let p = w.prec();
    let one = BigComplex::one(p);
    let eps = Float::with_val(p, 1) >> (p as i32 + 4);
    let mut sum = one.clone();
    let mut term = one.clone();
    let mut wn = one.clone();
    let mut quiet = 0;
    for _ in 1..50_000_000u64 {
        wn = &wn * w;
        let d = &one + &wn;
        term = &(&term * w) / &(&d * &d);
        sum += &term;
        if term.abs() <= Float::with_val(p, sum.abs() * &eps) {
            quiet += 1;
            if quiet >= 4 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence("f_outer sum".into()))
}

/// One row of a radial profile: `f` at `ξe^{−t}` and `f_outer` at `ξ̄e^{−t}`.
#[derive(Clone, Debug)]
pub struct ProfileRow {
    pub t: f64,
    pub inside: BigComplex,
    pub outside: BigComplex,
}

/// `samples` rows on the grid `t = t0/2^j`, approaching `ξ` from inside and
/// outside the unit disc.
pub fn radial_profile(xi: &Phase, t0: f64, samples: usize, prec: u32) -> Result<Vec<ProfileRow>> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::Domain { what: "t0", requirement: "t0 > 0" });
    }
    let root = xi.to_complex(prec);
    let mirror = root.conj();
    (0..samples)
        .map(|j| {
            let t = Float::with_val(prec, t0) >> j as i32;
            let r = Float::with_val(prec, -&t).exp();
            Ok(ProfileRow {
                t: t.to_f64(),
                inside: f_at(&root.scale(&r))?,
                outside: f_outer_at(&mirror.scale(&r))?,
            })
        })
        .collect()
}

pub const PROFILE_CSV_HEADER: &str = "# unitheta radial_profile v1\nt,inside_re,inside_im,outside_re,outside_im\n";

pub fn profile_csv(rows: &[ProfileRow], digits: usize) -> String {
    let mut out = String::from(PROFILE_CSV_HEADER);
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.t,
            float_to_string(row.inside.re(), digits),
            float_to_string(row.inside.im(), digits),
            float_to_string(row.outside.re(), digits),
            float_to_string(row.outside.im(), digits),
        ));
    }
    out
}
