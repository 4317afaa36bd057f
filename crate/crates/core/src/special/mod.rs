//! High-precision scalar kernels.
//!
//! Order one-half Bessel functions in closed form, `Γ(1/2, x)` through an
//! in-house `erfc`, and the two kernels attached to a modulus `k`: the
//! Laurent kernel `a_k(s) = Σ b_m(k) s^{-m-1}` and its Borel partner
//! `B_k(t) = Σ b_m(k) t^m / m!`.

mod complex;

pub use complex::{float_to_string, parse_rational, pi, BigComplex};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Extra working bits used inside the scalar kernels.
const GUARD_BITS: u32 = 32;

// ===========================================================================
// Bessel functions of order 1/2
// ===========================================================================

/// `I_{1/2}(x) = √(2/(πx)) sinh x` on the principal branch of `√x`.
pub fn bessel_i_half(x: &BigComplex) -> Result<BigComplex> {
    if x.is_zero() {
        return Err(Error::ZeroArgument("bessel_i_half"));
    }
    Ok(&half_order_prefactor(x) * &x.sinh())
}

/// `J_{1/2}(x) = √(2/(πx)) sin x` on the principal branch of `√x`.
pub fn bessel_j_half(x: &BigComplex) -> Result<BigComplex> {
    if x.is_zero() {
        return Err(Error::ZeroArgument("bessel_j_half"));
    }
    Ok(&half_order_prefactor(x) * &x.sin())
}

fn half_order_prefactor(x: &BigComplex) -> BigComplex {
    let p = x.prec();
    let two_over_pi = Float::with_val(p, 2) / pi(p);
    (x.recip().scale(&two_over_pi)).sqrt()
}

// ===========================================================================
// erfc and Γ(1/2, x)
// ===========================================================================

/// Complementary error function for real arguments at the precision of `x`.
///
/// Positive-term Taylor series of `erf` below 2, Lentz continued fraction
/// above. Negative arguments use `erfc(−x) = 2 − erfc(x)`.
pub fn erfc(x: &Float) -> Float {
    let p = x.prec();
    if x.is_sign_negative() && !x.is_zero() {
        let pos = erfc(&Float::with_val(p, -x));
        return Float::with_val(p, 2 - pos);
    }
    if *x < 2 {
        // erfc = 1 − erf loses about x²·log2(e) bits.
        let work = p + GUARD_BITS + 8;
        let xw = Float::with_val(work, x);
        let one = Float::with_val(work, 1);
        Float::with_val(p, one - erf_series(&xw))
    } else {
        let work = p + GUARD_BITS;
        Float::with_val(p, erfc_continued_fraction(&Float::with_val(work, x)))
    }
}

/// Error function for real arguments.
pub fn erf(x: &Float) -> Float {
    let p = x.prec();
    if x.is_zero() {
        return Float::new(p);
    }
    let ax = Float::with_val(p + GUARD_BITS, x.abs_ref());
    let value = if ax < 2 {
        erf_series(&ax)
    } else {
        let one = Float::with_val(ax.prec(), 1);
        one - erfc_continued_fraction(&ax)
    };
    let value = Float::with_val(p, value);
    if x.is_sign_negative() {
        -value
    } else {
        value
    }
}

/// `erf x = 2/√π · e^{−x²} Σ 2ⁿ x^{2n+1} / (2n+1)!!`, all terms positive.
fn erf_series(x: &Float) -> Float {
    let p = x.prec();
    let x2 = Float::with_val(p, x.square_ref());
    let two_x2 = Float::with_val(p, &x2 * 2u32);
    let mut term = x.clone();
    let mut sum = x.clone();
    let mut n = 0u32;
    loop {
        n += 1;
        term *= &two_x2;
        term /= 2 * n + 1;
        if term.is_zero() || term.get_exp().unwrap_or(i32::MIN) < sum.get_exp().unwrap_or(0) - p as i32 - 2 {
            break;
        }
        sum += &term;
    }
    let scale = Float::with_val(p, Constant::Pi).sqrt().recip() * 2u32;
    let damp = (-x2).exp();
    sum * scale * damp
}

/// `erfc x = e^{−x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))`, x ≥ 2.
fn erfc_continued_fraction(x: &Float) -> Float {
    let p = x.prec();
    let tiny = Float::with_val(p, Float::parse("1e-300").unwrap());
    let eps = Float::with_val(p, 1) >> (p as i32 - 2);
    // Modified Lentz for b0 + a1/(b1 + a2/(b2 + …)) with b_j = x, a_j = j/2.
    let mut f = x.clone();
    let mut c = x.clone();
    let mut d = Float::new(p);
    let mut j = 1u32;
    loop {
        let a = Float::with_val(p, j) / 2u32;
        d = Float::with_val(p, &a * &d) + x;
        if d.is_zero() {
            d = tiny.clone();
        }
        c = Float::with_val(p, &a / &c) + x;
        if c.is_zero() {
            c = tiny.clone();
        }
        d.recip_mut();
        let delta = Float::with_val(p, &c * &d);
        f *= &delta;
        let dev = Float::with_val(p, &delta - 1u32).abs();
        if dev < eps || j > 1_000_000 {
            break;
        }
        j += 1;
    }
    let x2 = Float::with_val(p, x.square_ref());
    let sqrt_pi = Float::with_val(p, Constant::Pi).sqrt();
    (-x2).exp() / sqrt_pi / f
}

/// Upper incomplete gamma `Γ(1/2, x) = √π·erfc(√x)` for `x ≥ 0`.
pub fn inc_gamma_half(x: &Float) -> Result<Float> {
    if x.is_sign_negative() && !x.is_zero() {
        return Err(Error::NegativeArgument("inc_gamma_half"));
    }
    let p = x.prec();
    let root = Float::with_val(p, x.sqrt_ref());
    Ok(Float::with_val(p, Constant::Pi).sqrt() * erfc(&root))
}

// ===========================================================================
// Kernels attached to a modulus k
// ===========================================================================

/// Truncation controls for the Laurent kernel `a_k(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelParams {
    pub k: u64,
    pub epsilon: f64,
    pub max_terms: usize,
}

impl KernelParams {
    pub fn new(k: u64, epsilon: f64, max_terms: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain { what: "k", requirement: "k >= 1" });
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain { what: "epsilon", requirement: "0 < epsilon < 1" });
        }
        Ok(Self { k, epsilon, max_terms })
    }

    /// Tolerance tied to a working precision: `ε = 2^{−prec}`.
    pub fn for_precision(k: u64, prec: u32) -> Self {
        Self {
            k,
            epsilon: 2f64.powi(-(prec.min(1000) as i32)).max(f64::MIN_POSITIVE),
            max_terms: 100_000,
        }
    }
}

/// `c_k = π/(24k)`, the base of `b_m(k) = c_k^{2m+1/2} / Γ(m+3/2)`.
fn kernel_base(k: u64, prec: u32) -> Float {
    pi(prec) / Float::with_val(prec, 24u64 * k)
}

/// `b_m(k) = (π/(24k))^{2m+1/2} / Γ(m + 3/2)`.
///
/// These are the Taylor data of `B_k`, i.e. `B_k(t) = Σ b_m(k) t^m / m!`.
/// The half-integer gamma value uses `Γ(m+3/2) = (m+1/2)·Γ(m+1/2)` from
/// `Γ(3/2) = √π/2`.
pub fn kernel_coefficient(k: u64, m: u32, prec: u32) -> Float {
    let work = prec + GUARD_BITS;
    let base = kernel_base(k, work);
    let mut gamma = pi(work).sqrt() / 2u32;
    for j in 0..m {
        gamma *= Float::with_val(work, j) + 1.5;
    }
    let exponent = Float::with_val(work, 2 * m) + 0.5;
    let power = base.pow(&exponent);
    Float::with_val(prec, power / gamma)
}

/// `a_k(s) = Σ_{m≥0} b_m(k) / s^{m+1}`, stopping once a term drops below
/// `epsilon·|partial sum|`.
pub fn laurent_kernel(s: &BigComplex, params: &KernelParams) -> Result<BigComplex> {
    if s.is_zero() {
        return Err(Error::ZeroArgument("laurent_kernel"));
    }
    let p = s.prec();
    let c2 = kernel_base(params.k, p).square();
    let inv_s = s.recip();
    let mut term = inv_s.scale(&kernel_coefficient(params.k, 0, p));
    let mut sum = term.clone();
    let eps = Float::with_val(p, params.epsilon);
    for m in 0..params.max_terms {
        // b_{m+1}/b_m = c²/(m+3/2)
        let ratio = Float::with_val(p, &c2 / (Float::with_val(p, m) + 1.5));
        term = (&term * &inv_s).scale(&ratio);
        sum += &term;
        let bound = Float::with_val(p, sum.abs() * &eps);
        if term.abs() < bound {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence(format!(
        "a_k(s) for k={} did not reach relative {:e} within {} terms",
        params.k, params.epsilon, params.max_terms
    )))
}

/// `B_k(t) = t^{−1/4} I_{1/2}(π√t/(12k))` with principal branches.
///
/// The product is entire in `t`, so negative real `t` yields the real value
/// `|t|^{−1/4} J_{1/2}(π√|t|/(12k))`.
pub fn bessel_kernel(k: u64, t: &BigComplex) -> Result<BigComplex> {
    if t.is_zero() {
        return Err(Error::ZeroArgument("bessel_kernel"));
    }
    if k == 0 {
        return Err(Error::Domain { what: "k", requirement: "k >= 1" });
    }
    let p = t.prec();
    let work = p + GUARD_BITS;
    let tw = t.with_prec(work);
    let arg_scale = pi(work) / Float::with_val(work, 12u64 * k);
    let x = tw.sqrt().scale(&arg_scale);
    let quarter = Float::with_val(work, -0.25);
    let value = &tw.pow_real(&quarter)? * &bessel_i_half(&x)?;
    Ok(value.with_prec(p))
}

/// Real form of `B_k(u)` for real nonzero `u`: `sinh` for `u > 0`, `sin` for
/// `u < 0`, both scaled by `√(2/(πc))/√|u|` with `c = π/(12k)`.
pub fn bessel_kernel_real(k: u64, u: &Float) -> Result<Float> {
    if u.is_zero() {
        return Err(Error::ZeroArgument("bessel_kernel_real"));
    }
    let p = u.prec();
    let work = p + GUARD_BITS;
    let c = pi(work) / Float::with_val(work, 12u64 * k);
    let root = Float::with_val(work, u.abs_ref()).sqrt();
    let x = Float::with_val(work, &c * &root);
    let wave = if u.is_sign_negative() { x.sin() } else { x.sinh() };
    let pref = (Float::with_val(work, 2) / (pi(work) * c)).sqrt();
    Ok(Float::with_val(p, pref * wave / root))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn rel(a: &BigComplex, b: &BigComplex) -> f64 {
        ((a - b).abs() / b.abs()).to_f64()
    }

    /// Σ (x/2)^{2m+ν} (±1)^m / (m! Γ(m+ν+1)) with ν = 1/2.
    fn half_series(x: &BigComplex, alternating: bool) -> BigComplex {
        let p = x.prec() + 64;
        let xw = x.with_prec(p);
        let half = xw.scale(&Float::with_val(p, 0.5));
        let h2 = &half * &half;
        let lead = half.pow_real(&Float::with_val(p, 0.5)).unwrap();
        let gamma = pi(p).sqrt() / 2u32;
        let mut term = lead.scale(&Float::with_val(p, gamma.clone().recip()));
        let mut sum = term.clone();
        for m in 1..400u32 {
            let denom: Float = Float::with_val(p, m) * (Float::with_val(p, m) + 0.5);
            term = (&term * &h2).scale(&denom.recip());
            if alternating {
                term = -term;
            }
            sum += &term;
        }
        sum.with_prec(x.prec())
    }

    #[test]
    fn bessel_i_half_at_one() {
        let x = BigComplex::one(P);
        let v = bessel_i_half(&x).unwrap();
        let s = half_series(&x, false);
        assert!(rel(&v, &s) < 1e-70);
        assert!((v.re().to_f64() - 0.937_674_888_245_488).abs() < 1e-14);
    }

    #[test]
    fn closed_forms_match_power_series() {
        let points = [(3.7, 0.0), (0.2, -1.3), (-4.0, 2.5), (12.0, 40.0), (50.0, 0.0)];
        let tol = 2f64.powi(-(P as i32) + 16 + 60);
        for (re, im) in points {
            let x = BigComplex::from_f64(re, im, P);
            assert!(rel(&bessel_i_half(&x).unwrap(), &half_series(&x, false)) < tol.max(1e-60));
            assert!(rel(&bessel_j_half(&x).unwrap(), &half_series(&x, true)) < tol.max(1e-60));
        }
        assert!(bessel_i_half(&BigComplex::zero(P)).is_err());
        assert!(bessel_j_half(&BigComplex::zero(P)).is_err());
    }

    #[test]
    fn j_half_vanishes_at_pi() {
        let x = BigComplex::from_real(pi(P));
        assert!(bessel_j_half(&x).unwrap().abs().to_f64() < 1e-70);
    }

    #[test]
    fn reflection_between_i_and_j() {
        // I_{1/2}(ix) = i^{−1/2}(−1)^{1/2} J_{1/2}(x), principal branches.
        let x = BigComplex::from_f64(1.25, 0.0, P);
        let lhs = bessel_i_half(&x.mul_i()).unwrap();
        let i_pow = BigComplex::i(P).pow_real(&Float::with_val(P, -0.5)).unwrap();
        let rhs = &(&i_pow * &BigComplex::i(P)) * &bessel_j_half(&x).unwrap();
        assert!(rel(&lhs, &rhs) < 1e-70);
    }

    #[test]
    fn erfc_against_mpfr() {
        for x in [0.0, 0.3, 1.0, 1.999, 2.0, 2.5, 7.0, 25.0, -1.5] {
            let xf = Float::with_val(P, x);
            let ours = erfc(&xf);
            let theirs = Float::with_val(P, xf.erfc_ref());
            let err = Float::with_val(P, &ours - &theirs).abs() / theirs.abs();
            assert!(err.to_f64() < 2f64.powi(-(P as i32) + 8), "x={x} err={}", err.to_f64());
            let sum = Float::with_val(P, &ours + erf(&xf));
            assert!((sum - 1u32).abs().to_f64() < 2f64.powi(-(P as i32) + 8));
        }
    }

    #[test]
    fn incomplete_gamma_endpoints() {
        let g0 = inc_gamma_half(&Float::new(P)).unwrap();
        assert!((g0 - pi(P).sqrt()).abs().to_f64() < 1e-70);
        assert!(inc_gamma_half(&Float::with_val(P, -1)).is_err());
        let mut prev = pi(P).sqrt();
        for x in [0.5, 1.0, 4.0, 16.0, 64.0] {
            let g = inc_gamma_half(&Float::with_val(P, x)).unwrap();
            assert!(g < prev && g > 0);
            prev = g;
        }
    }

    /// ∫₁^∞ t^{−1/2} e^{−t} dt by the substitution t = 1 + e^{u − e^{−u}}
    /// and a fine trapezoid on a truncated u range.
    #[test]
    fn incomplete_gamma_against_quadrature() {
        let p = 160;
        let h = Float::with_val(p, 1) / 64u32;
        let mut sum = Float::new(p);
        for j in -64 * 8..=64 * 6 {
            let u = Float::with_val(p, j) * &h;
            let inner = Float::with_val(p, -u.clone()).exp();
            let e = (u.clone() - &inner).exp();
            let dt = Float::with_val(p, &e * (inner + 1u32));
            let t = e + 1u32;
            let f = Float::with_val(p, -t.clone()).exp() / t.sqrt();
            sum += f * dt;
        }
        sum *= &h;
        let g = inc_gamma_half(&Float::with_val(p, 1)).unwrap();
        assert!((sum - g).abs().to_f64() < 1e-25);
    }

    #[test]
    fn b0_closed_form() {
        for k in [1u64, 2, 7] {
            let b0 = kernel_coefficient(k, 0, P);
            let expect = (pi(P) / Float::with_val(P, 24 * k)).sqrt() * 2u32 / pi(P).sqrt();
            assert!((b0 - expect).abs().to_f64() < 1e-70);
        }
    }

    #[test]
    fn b_m_times_factorial_decays() {
        let mut prev = f64::INFINITY;
        let mut fact = Float::with_val(P, 1);
        for m in 0..40u32 {
            if m > 0 {
                fact *= m;
            }
            let v = (kernel_coefficient(1, m, P) * &fact).to_f64();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-40);
    }

    fn borel_series(k: u64, t: &BigComplex) -> BigComplex {
        let p = t.prec();
        let mut sum = BigComplex::zero(p);
        let mut pow = BigComplex::one(p);
        let mut fact = Float::with_val(p, 1);
        for m in 0..200u32 {
            if m > 0 {
                fact *= m;
                pow = &pow * t;
            }
            let coeff = kernel_coefficient(k, m, p) / &fact;
            sum += pow.scale(&coeff);
        }
        sum
    }

    #[test]
    fn bessel_kernel_matches_taylor_data() {
        for (k, t) in [(1u64, 23.0), (2, 73.0), (2, -73.0), (3, -5.0)] {
            let tc = BigComplex::from_f64(t, 0.0, P);
            let closed = bessel_kernel(k, &tc).unwrap();
            let series = borel_series(k, &tc);
            assert!(rel(&closed, &series) < 1e-25, "k={k} t={t}");
            assert!(closed.im().to_f64().abs() < 1e-60);
            let real = bessel_kernel_real(k, &Float::with_val(P, t)).unwrap();
            assert!((Float::with_val(P, closed.re() - &real).abs() / real.abs()).to_f64() < 1e-60);
        }
        assert!(bessel_kernel(1, &BigComplex::zero(P)).is_err());
    }

    #[test]
    fn bessel_kernel_negative_argument_is_j_half() {
        // B_k(−u) = u^{−1/4} J_{1/2}(π√u/(12k))
        let u = 24.0 * 3.0 + 1.0;
        let k = 2;
        let neg = bessel_kernel(k, &BigComplex::from_f64(-u, 0.0, P)).unwrap();
        let x = BigComplex::from_real(pi(P) * Float::with_val(P, u).sqrt() / 24u32);
        let j = bessel_j_half(&x).unwrap();
        let expect = j.scale(&Float::with_val(P, u).pow(-0.25f64));
        assert!(rel(&neg, &expect) < 1e-60);
    }

    #[test]
    fn laurent_kernel_large_s_and_brute_force() {
        let params = KernelParams::for_precision(1, P);
        let s = BigComplex::from_f64(1e6, 0.0, P);
        let v = laurent_kernel(&s, &params).unwrap();
        let lead = s.recip().scale(&kernel_coefficient(1, 0, P));
        assert!(rel(&v, &lead) < 1e-7);

        let s = BigComplex::from_f64(0.006, 0.008, P);
        let v = laurent_kernel(&s, &params).unwrap();
        let mut brute = BigComplex::zero(P);
        let inv = s.recip();
        let mut pow = inv.clone();
        for m in 0..200u32 {
            brute += pow.scale(&kernel_coefficient(1, m, P));
            pow = &pow * &inv;
        }
        assert!(rel(&v, &brute) < 1e-60);
    }

    #[test]
    fn laurent_kernel_reports_non_convergence() {
        let params = KernelParams::new(1, 1e-30, 2).unwrap();
        let s = BigComplex::from_f64(0.001, 0.0, P);
        assert!(matches!(laurent_kernel(&s, &params), Err(Error::NonConvergence(_))));
        assert!(KernelParams::new(1, 1.5, 10).is_err());
    }

    #[test]
    fn laurent_kernel_doubling_terms_is_stable() {
        let s = BigComplex::from_f64(-0.02, 0.03, P);
        let params = KernelParams::new(3, 1e-40, 60).unwrap();
        let a = laurent_kernel(&s, &params).unwrap();
        let b = laurent_kernel(&s, &KernelParams { max_terms: 120, ..params.clone() }).unwrap();
        assert!(rel(&a, &b) < params.epsilon);
    }

    /// (1/2πi)∮ a_k(s) e^{st} ds = B_k(t): trapezoid on |s| = r.
    #[test]
    fn contour_of_laurent_kernel_reproduces_bessel_kernel() {
        let (k, t) = (1u64, 23.0);
        let params = KernelParams::for_precision(k, P);
        for r in [0.5, 2.0] {
            let m = 256;
            let mut acc = BigComplex::zero(P);
            for j in 0..m {
                let theta = pi(P) * Float::with_val(P, 2 * j) / Float::with_val(P, m);
                let s = BigComplex::cis(&theta).scale(&Float::with_val(P, r));
                let g = &laurent_kernel(&s, &params).unwrap() * &s.scale(&Float::with_val(P, t)).exp();
                acc += &g * &s;
            }
            let val = acc.scale(&Float::with_val(P, m).recip());
            let expect = bessel_kernel(k, &BigComplex::from_f64(t, 0.0, P)).unwrap();
            assert!(rel(&val, &expect) < 1e-30, "r={r}");
        }
    }
}
