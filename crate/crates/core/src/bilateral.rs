//! The bilateral series `F(z)`: contour integrals `Φ_{d,k}`, the `k`-sum
//! that assembles them, and reference values on both sides of the unit
//! circle.
//!
//! For `gcd(d, 2k) = 1` and `q̃ = ζ_{2k}^d q`,
//!
//! ```text
//! Φ_{d,k}(z) = (1/2πi) ∮_{|s|=r} a_k(s) e^{23s} / (1 − q̃ e^{24s}) ds
//! F(z) = 1 + π Σ_k (ε_k/k) Σ_d ω_{−d,2k} e(−d(1+(−1)^k)/8) q̃ Φ_{d,k}(z)
//! ```
//!
//! `F` equals `f(q)` for `Im z > 0` and `2ψ(q⁻¹)` for `Im z < 0`.

use rayon::prelude::*;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, kronecker, multiplier_table, Phase};
use crate::error::{Error, Result};
use crate::rademacher::k_sign;
use crate::special::{laurent_kernel, pi, BigComplex, KernelParams};

/// Contour and refinement settings for `Φ_{d,k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureParams {
    /// Radius as a fraction of the distance from 0 to the nearest pole.
    pub radius_fraction: f64,
    pub initial_points: usize,
    /// Relative change between successive doublings that ends refinement.
    pub tol: f64,
    pub max_doublings: u32,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        Self { radius_fraction: 0.5, initial_points: 16, tol: 1e-30, max_doublings: 10 }
    }
}

impl QuadratureParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_fraction > 0.0 && self.radius_fraction < 1.0) {
            return Err(Error::Domain { what: "radius_fraction", requirement: "0 < radius_fraction < 1" });
        }
        if self.initial_points < 16 {
            return Err(Error::Domain { what: "initial_points", requirement: "initial_points >= 16" });
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain { what: "tol", requirement: "tol > 0" });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfPlane {
    Upper,
    Lower,
}

impl HalfPlane {
    pub fn as_str(self) -> &'static str {
        match self {
            HalfPlane::Upper => "upper",
            HalfPlane::Lower => "lower",
        }
    }

    pub fn of(z: &BigComplex) -> Result<Self> {
        if z.im().is_zero() {
            return Err(Error::OnNaturalBoundary);
        }
        Ok(if z.im().is_sign_positive() { HalfPlane::Upper } else { HalfPlane::Lower })
    }
}

/// `e(x) = e^{2πix}`.
fn e_of(x: &BigComplex) -> BigComplex {
    let p = x.prec();
    let two_pi = pi(p) * 2u32;
    x.mul_i().scale(&two_pi).exp()
}

/// `q = e(z)`.
pub fn nome(z: &BigComplex) -> BigComplex {
    e_of(z)
}

/// `q̃ = ζ_{2k}^d q = e(d/(2k) + z)`.
pub fn twisted_nome(z: &BigComplex, d: i64, k: u64) -> BigComplex {
    let p = z.prec();
    let turns = BigComplex::from_rationals(&Rational::from((d, 2 * k as i64)), &Rational::new(), p);
    e_of(&(&turns + z))
}

/// Distance from `s = 0` to the nearest zero of `1 − q̃e^{24s}`:
/// `(2π/24)·√(‖d/(2k) + x‖² + y²)` with `‖·‖` the distance to ℤ.
pub fn pole_distance(z: &BigComplex, d: i64, k: u64) -> Float {
    let p = z.prec();
    let shift = Float::with_val(p, &Rational::from((d, 2 * k as i64)));
    let t = Float::with_val(p, z.re() + &shift);
    let frac = Float::with_val(p, &t - Float::with_val(p, t.round_ref()));
    let dist = Float::with_val(p, frac.hypot_ref(z.im()));
    dist * pi(p) / 12u32
}

fn check_coprime(d: i64, k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain { what: "k", requirement: "k >= 1" });
    }
    if gcd(d, 2 * k as i64) != 1 {
        return Err(Error::UndefinedDedekind { h: -d, k: 2 * k });
    }
    Ok(())
}

/// Trapezoid nodes on `|s| = r` with the `d`-independent weights
/// `w_j = a_k(s_j) e^{23 s_j} s_j` and the factors `e^{24 s_j}`.
struct Nodes {
    weights: Vec<BigComplex>,
    growth: Vec<BigComplex>,
}

/// Nodes at angles `2πj/m` for `j` in `js`.
fn make_nodes(k: u64, radius: &Float, js: impl Iterator<Item = usize>, m: usize, prec: u32) -> Result<Nodes> {
    let params = KernelParams::for_precision(k, prec);
    let two_pi = pi(prec) * 2u32;
    let (c23, c24) = (Float::with_val(prec, 23), Float::with_val(prec, 24));
    let mut weights = Vec::new();
    let mut growth = Vec::new();
    for j in js {
        let theta = Float::with_val(prec, &two_pi * j as u64) / m as u64;
        let s = BigComplex::cis(&theta).scale(radius);
        let a = laurent_kernel(&s, &params)?;
        weights.push(&(&a * &s.scale(&c23).exp()) * &s);
        growth.push(s.scale(&c24).exp());
    }
    Ok(Nodes { weights, growth })
}

/// `Σ_j w_j / (1 − q̃ E_j)`.
fn node_sum(nodes: &Nodes, qt: &BigComplex) -> BigComplex {
    let p = qt.prec();
    let one = BigComplex::one(p);
    let mut acc = BigComplex::zero(p);
    for (w, e) in nodes.weights.iter().zip(&nodes.growth) {
        let denom = &one - &(qt * e);
        acc += &(w / &denom);
    }
    acc
}

/// `Φ_{d,k}(z)` by the trapezoidal rule on `|s| = ρ·(pole distance)`,
/// doubling the node count until the relative change drops below `tol`.
pub fn phi_dk(z: &BigComplex, d: i64, k: u64, params: &QuadratureParams) -> Result<BigComplex> {
    params.validate()?;
    check_coprime(d, k)?;
    let prec = z.prec();
    let dist = pole_distance(z, d, k);
    if dist.is_zero() {
        return Err(Error::SingularParameter { d, k });
    }
    let radius = Float::with_val(prec, &dist * params.radius_fraction);
    let qt = twisted_nome(z, d, k);
    phi_on_circle(&qt, k, &radius, params)
}

fn phi_on_circle(qt: &BigComplex, k: u64, radius: &Float, params: &QuadratureParams) -> Result<BigComplex> {
    let prec = qt.prec();
    let mut m = params.initial_points;
    // raw = Σ_{j<M} w_j/(1 − q̃E_j), so Φ ≈ raw/M
    let mut raw = node_sum(&make_nodes(k, radius, 0..m, m, prec)?, qt);
    for _ in 0..params.max_doublings {
        let fresh = node_sum(&make_nodes(k, radius, (0..m).map(|j| 2 * j + 1), 2 * m, prec)?, qt);
        // Φ_{2M} − Φ_M = (fresh − raw)/(2M)
        let change = (&fresh - &raw).abs();
        raw += &fresh;
        m *= 2;
        if change <= Float::with_val(prec, raw.abs() * params.tol) {
            return Ok(raw.scale(&Float::with_val(prec, m).recip()));
        }
    }
    Err(Error::NonConvergence(format!(
        "trapezoid for k={k} did not reach relative {:e} with {m} nodes",
        params.tol
    )))
}

// ===========================================================================
// Series oracles
// ===========================================================================

pub mod oracle {
    //! Direct Fourier expansions of `q̃·Φ_{d,k}(z)` on each side of `|q̃| = 1`.

    use super::*;
    use crate::special::bessel_kernel_real;

    /// `q̃Φ_{d,k} = Σ_{n≥1} B_k(24n−1) q̃ⁿ` for `|q̃| < 1`.
    pub fn inner(z: &BigComplex, d: i64, k: u64) -> Result<BigComplex> {
        check_coprime(d, k)?;
        let qt = twisted_nome(z, d, k);
        if qt.abs() >= 1 {
            return Err(Error::Domain { what: "z", requirement: "|q̃| < 1" });
        }
        sum_geometric(&qt, |n| bessel_kernel_real(k, &Float::with_val(z.prec(), 24 * n - 1)), 1)
    }

    /// `q̃Φ_{d,k} = −Σ_{n≥0} q̃^{−n} B_k(−(24n+1))` for `|q̃| > 1`.
    pub fn outer(z: &BigComplex, d: i64, k: u64) -> Result<BigComplex> {
        check_coprime(d, k)?;
        let qt = twisted_nome(z, d, k);
        if qt.abs() <= 1 {
            return Err(Error::Domain { what: "z", requirement: "|q̃| > 1" });
        }
        let w = qt.recip();
        Ok(-sum_geometric(&w, |n| bessel_kernel_real(k, &Float::with_val(z.prec(), -(24 * n + 1))), 0)?)
    }

    /// `Σ_{n≥start} c(n) xⁿ` for `|x| < 1` and subexponential `c`.
    fn sum_geometric(x: &BigComplex, c: impl Fn(i64) -> Result<Float>, start: i64) -> Result<BigComplex> {
        let p = x.prec();
        let mut pow = if start == 0 { BigComplex::one(p) } else { x.clone() };
        let mut acc = BigComplex::zero(p);
        let eps = Float::with_val(p, 1) >> (p as i32 + 8);
        let mut small_run = 0;
        let mut n = start;
        while n < 1_000_000 {
            let term = pow.scale(&c(n)?);
            acc += &term;
            if term.abs() <= Float::with_val(p, acc.abs() * &eps) {
                small_run += 1;
                if small_run >= 4 {
                    return Ok(acc);
                }
            } else {
                small_run = 0;
            }
            pow = &pow * x;
            n += 1;
        }
        Err(Error::NonConvergence("oracle series did not converge".into()))
    }
}

// ===========================================================================
// F(z)
// ===========================================================================

/// Settings for the `k`-sum of `F`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FParams {
    pub k_max: u64,
    pub first_block: u64,
    /// A block whose total contribution is below this ends the sum.
    pub tol: f64,
    pub quadrature: QuadratureParams,
}

pub const DEFAULT_F_K_MAX: u64 = 512;

impl Default for FParams {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_F_K_MAX,
            first_block: 16,
            tol: 1e-8,
            quadrature: QuadratureParams { tol: 1e-8, ..QuadratureParams::default() },
        }
    }
}

/// `F` at one point with its truncation record.
#[derive(Clone, Debug)]
pub struct FEvaluation {
    pub value: BigComplex,
    pub k_used: u64,
    pub block_tail: f64,
    pub stabilized: bool,
    /// `F_K` after every `K = 1..=k_used`.
    pub partial_sums: Vec<BigComplex>,
    pub diagnostic: Option<String>,
}

/// The `k`-th term `π ε_k/k Σ_d ω_{−d,2k} e(−d(1+(−1)^k)/8) q̃ Φ_{d,k}(z)`
/// with one contour radius shared by every `d`.
pub fn f_term(z: &BigComplex, k: u64, params: &QuadratureParams) -> Result<BigComplex> {
    let prec = z.prec();
    let modulus = 2 * k;
    let table = multiplier_table(modulus);
    let ds: Vec<i64> = table.residues.iter().map(|&d| d as i64).collect();

    let mut min_dist: Option<Float> = None;
    for &d in &ds {
        let dist = pole_distance(z, d, k);
        if dist.is_zero() {
            return Err(Error::SingularParameter { d, k });
        }
        min_dist = Some(match min_dist {
            Some(m) if m <= dist => m,
            _ => dist,
        });
    }
    let radius = Float::with_val(prec, min_dist.expect("at least one residue") * params.radius_fraction);

    // Exact phase per d: ω_{−d,2k}·e(−d(1+(−1)^k)/8), then q̃ = e(d/(2k))·q.
    let q = nome(z);
    let mut twisted = Vec::with_capacity(ds.len());
    let mut phases = Vec::with_capacity(ds.len());
    for (i, &d) in ds.iter().enumerate() {
        let omega = Rational::from((table.omega_numerator(i) as i64, 6 * modulus as i64));
        let mut r = omega;
        if k % 2 == 0 {
            r -= Rational::from((d, 2));
        }
        phases.push(Phase::new(r).to_complex(prec));
        twisted.push(&Phase::new(Rational::from((d, k as i64))).to_complex(prec) * &q);
    }

    let mut m = params.initial_points;
    let nodes = make_nodes(k, &radius, 0..m, m, prec)?;
    let mut raw: Vec<BigComplex> = twisted.iter().map(|qt| node_sum(&nodes, qt)).collect();
    let mut converged = false;
    for _ in 0..params.max_doublings {
        let fresh = make_nodes(k, &radius, (0..m).map(|j| 2 * j + 1), 2 * m, prec)?;
        let mut change = Float::new(prec);
        let mut size = Float::new(prec);
        for (s, qt) in raw.iter_mut().zip(&twisted) {
            let add = node_sum(&fresh, qt);
            change += (&add - &*s).abs();
            *s += &add;
            size += s.abs();
        }
        m *= 2;
        if change <= Float::with_val(prec, &size * params.tol) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "trapezoid for k={k} did not reach relative {:e} with {m} nodes",
            params.tol
        )));
    }
    let mut estimate = BigComplex::zero(prec);
    for ((s, ph), qt) in raw.iter().zip(&phases).zip(&twisted) {
        estimate += &(&(ph * qt) * s);
    }
    let estimate = estimate.scale(&Float::with_val(prec, m).recip());
    let scale = Float::with_val(prec, pi(prec) * k_sign(k)) / k;
    Ok(estimate.scale(&scale))
}

/// `F(z)` summed over `k` in geometric blocks up to `k_max`.
///
/// Terms inside a block are computed in parallel and added in increasing
/// `k`, so the value is reproducible bit for bit at a given precision.
pub fn f_eval(z: &BigComplex, params: &FParams) -> Result<FEvaluation> {
    HalfPlane::of(z)?;
    params.quadrature.validate()?;
    if params.k_max < 1 {
        return Err(Error::Domain { what: "k_max", requirement: "k_max >= 1" });
    }
    let prec = z.prec();
    let mut value = BigComplex::one(prec);
    let mut partial_sums = Vec::new();
    let mut lo = 0u64;
    let mut hi = params.first_block.max(1).min(params.k_max);
    loop {
        let terms: Vec<BigComplex> = ((lo + 1)..=hi)
            .into_par_iter()
            .map(|k| f_term(z, k, &params.quadrature))
            .collect::<Result<_>>()?;
        let before = value.clone();
        for t in &terms {
            value += t;
            partial_sums.push(value.clone());
        }
        let tail = (&value - &before).abs().to_f64();
        let done = tail < params.tol;
        if done || hi >= params.k_max {
            let diagnostic = (!done).then(|| {
                format!(
                    "last block ({lo}, {hi}] contributed {tail:.3e}, above tol {:.1e}; K cap {} reached",
                    params.tol, params.k_max
                )
            });
            return Ok(FEvaluation {
                value,
                k_used: hi,
                block_tail: tail,
                stabilized: done,
                partial_sums,
                diagnostic,
            });
        }
        lo = hi;
        hi = (hi * 2).min(params.k_max);
    }
}

// ===========================================================================
// Reference values
// ===========================================================================

fn stop(term: &BigComplex, sum: &BigComplex) -> bool {
    let p = sum.prec();
    let eps = Float::with_val(p, 1) >> (p as i32 + 4);
    term.abs() <= Float::with_val(p, sum.abs() * &eps)
}

/// `f(q) = Σ q^{n²}/(−q;q)_n²` for `Im z > 0`.
pub fn f_ref(z: &BigComplex) -> Result<BigComplex> {
    if !z.im().is_sign_positive() || z.im().is_zero() {
        return Err(Error::Domain { what: "z", requirement: "Im z > 0" });
    }
    f_at(&nome(z))
}

/// `f(q)` for `|q| < 1`.
pub fn f_at(q: &BigComplex) -> Result<BigComplex> {
    if q.abs() >= 1 {
        return Err(Error::Domain { what: "q", requirement: "|q| < 1" });
    }
    let p = q.prec();
    let q = q.clone();
    let one = BigComplex::one(p);
    let mut sum = one.clone();
    let mut term = one.clone();
    let mut qn = one.clone();
    for n in 1..100_000u64 {
        // term_n = term_{n−1} · q^{2n−1} / (1+qⁿ)²
        let prev = qn;
        qn = &prev * &q;
        let factor = &prev * &qn;
        let denom = &one + &qn;
        term = &(&term * &factor) / &(&denom * &denom);
        sum += &term;
        if stop(&term, &sum) && n > 2 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence("f(q) reference sum".into()))
}

/// `f₂(q) = 1 + Σ_{n≥1} (−1)^{n−1} qⁿ/((1+q)…(1+qⁿ))` for `Im z > 0`.
pub fn f2_ref(z: &BigComplex) -> Result<BigComplex> {
    if !z.im().is_sign_positive() || z.im().is_zero() {
        return Err(Error::Domain { what: "z", requirement: "Im z > 0" });
    }
    let p = z.prec();
    let q = nome(z);
    let one = BigComplex::one(p);
    let mut sum = one.clone();
    let mut term = -one.clone();
    let mut qn = one.clone();
    for n in 1..10_000_000u64 {
        qn = &qn * &q;
        term = -(&(&term * &q) / &(&one + &qn));
        sum += &term;
        if stop(&term, &sum) && n > 2 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence("f2(q) reference sum".into()))
}

/// `2ψ(q⁻¹) = 2 Σ_{n≥1} (−12/n) q^{−(n²−1)/24}` for `Im z < 0`.
pub fn psi_ref(z: &BigComplex) -> Result<BigComplex> {
    if !z.im().is_sign_negative() || z.im().is_zero() {
        return Err(Error::Domain { what: "z", requirement: "Im z < 0" });
    }
    let p = z.prec();
    let minus_z = -z.clone();
    let mut sum = BigComplex::zero(p);
    let mut quiet = 0;
    for n in 1..1_000_000i64 {
        let chi = kronecker(-12, n);
        if chi == 0 {
            continue;
        }
        let e = (n * n - 1) / 24;
        let arg = minus_z.scale(&Float::with_val(p, e));
        let term = e_of(&arg).scale(&Float::with_val(p, 2 * chi));
        sum += &term;
        if stop(&term, &sum) {
            quiet += 1;
            if quiet >= 2 {
                return Ok(sum);
            }
        }
    }
    Err(Error::NonConvergence("psi reference sum".into()))
}

/// Reference for `F`: `f(q)` above the real line, `2ψ(q⁻¹)` below.
pub fn reference(z: &BigComplex) -> Result<BigComplex> {
    match HalfPlane::of(z)? {
        HalfPlane::Upper => f_ref(z),
        HalfPlane::Lower => psi_ref(z),
    }
}

/// `F` against its reference at one point.
#[derive(Clone, Debug)]
pub struct EvalReport {
    pub z: BigComplex,
    pub half_plane: HalfPlane,
    pub f_value: BigComplex,
    pub reference: BigComplex,
    pub abs_err: f64,
    pub rel_err: f64,
    pub k_used: u64,
    pub stabilized: bool,
    /// `|F_K − reference|` for `K = 1..=k_used`.
    pub error_history: Vec<f64>,
}

impl EvalReport {
    pub fn new(z: BigComplex, eval: &FEvaluation, reference: BigComplex) -> Result<Self> {
        let half_plane = HalfPlane::of(&z)?;
        let abs_err = (&eval.value - &reference).abs().to_f64();
        let rel_err = abs_err / reference.abs().to_f64();
        let error_history = eval.partial_sums.iter().map(|v| (v - &reference).abs().to_f64()).collect();
        Ok(Self {
            z,
            half_plane,
            f_value: eval.value.clone(),
            reference,
            abs_err,
            rel_err,
            k_used: eval.k_used,
            stabilized: eval.stabilized,
            error_history,
        })
    }

    pub fn record(&self, digits: usize) -> EvalRecord {
        EvalRecord {
            z: self.z.to_string_digits(digits.min(20)),
            half_plane: self.half_plane,
            f_value: self.f_value.to_string_digits(digits),
            reference: self.reference.to_string_digits(digits),
            abs_err: self.abs_err,
            rel_err: self.rel_err,
            k_used: self.k_used,
            stabilized: self.stabilized,
        }
    }
}

/// Serializable view of an [`EvalReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub z: String,
    pub half_plane: HalfPlane,
    pub f_value: String,
    pub reference: String,
    pub abs_err: f64,
    pub rel_err: f64,
    pub k_used: u64,
    pub stabilized: bool,
}

/// Evaluates `F(z)` and compares it with the matching reference.
pub fn compare(z: &BigComplex, params: &FParams) -> Result<EvalReport> {
    let reference = reference(z)?;
    let eval = f_eval(z, params)?;
    EvalReport::new(z.clone(), &eval, reference)
}

/// Envelope of the error over dyadic blocks `(2^{j−1}, 2^j]` of `K`,
/// starting at the block ending in `first`.
pub fn dyadic_envelope(errors: &[f64], first: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut hi = first;
    while hi <= errors.len() {
        let lo = hi / 2;
        let worst = errors[lo..hi].iter().cloned().fold(0.0, f64::max);
        out.push((hi, worst));
        hi *= 2;
    }
    out
}

/// Least-squares slope of `log E` against `log₂ K` for an envelope.
pub fn envelope_slope(env: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = env.iter().map(|(k, e)| ((*k as f64).log2(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
