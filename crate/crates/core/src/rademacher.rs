//! Exact-formula coefficients of the mock theta function and of its
//! lower-half-plane partner.
//!
//! Both are partial sums over `k` of
//! `π·ε_k/k · A_{2k}(m_k) · (Bessel factor)` with `ε_k = (−1)^{⌊(k+1)/2⌋}`
//! and the shifted argument `m_k = ±n − k(1+(−1)^k)/4`:
//!
//! * `α(n)`, the coefficient of `qⁿ` in `f(q)`, uses
//!   `(24n−1)^{−1/4} I_{1/2}(π√(24n−1)/(12k))`;
//! * `α̃(n)` uses `(24n+1)^{−1/4} J_{1/2}(π√(24n+1)/(12k))` and `m_k = −n − …`.
//!
//! The `k`-sums converge slowly and with oscillation, so truncation is done
//! in geometric blocks and the size of the last block is reported.

use std::fmt;

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::arith::{kronecker, multiplier_table, RootTable};
use crate::error::{Error, Result};
use crate::qseries::{integer_coeff, series_f};
use crate::special::{bessel_i_half, bessel_j_half, float_to_string, pi, BigComplex};

/// Default stabilization tolerance for coefficient sums.
pub const DEFAULT_TOL: f64 = 1e-3;
/// Default cap on the `k`-sum.
pub const DEFAULT_K_MAX: u64 = 1024;
/// First block of the geometric schedule `K₀, 2K₀, 4K₀, …`.
pub const FIRST_BLOCK: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Alpha,
    AlphaTilde,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Alpha => "alpha",
            Target::AlphaTilde => "alpha_tilde",
        })
    }
}

impl std::str::FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Target::Alpha),
            "alpha_tilde" | "alpha-tilde" => Ok(Target::AlphaTilde),
            other => Err(Error::Parse(format!("unknown coefficient target {other:?}"))),
        }
    }
}

/// A partial sum of one coefficient formula with its truncation record.
#[derive(Clone, Debug)]
pub struct CoefficientEstimate {
    pub target: Target,
    pub n: i64,
    /// Real part of the partial sum.
    pub value: Float,
    pub k_used: u64,
    /// `|S_K − S_{K_prev}|`, the contribution of the final block.
    pub block_tail: f64,
    pub stabilized: bool,
    /// Largest `|Im|` seen across all partial sums (zero up to rounding).
    pub max_imag: f64,
    /// Partial sums at the block boundaries.
    pub history: Vec<(u64, f64)>,
    pub diagnostic: Option<String>,
}

impl CoefficientEstimate {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn record(&self, digits: usize) -> CoefficientRecord {
        CoefficientRecord {
            target: self.target,
            n: self.n,
            value: float_to_string(&self.value, digits),
            k_used: self.k_used,
            block_tail: self.block_tail,
            stabilized: self.stabilized,
            max_imag: self.max_imag,
            diagnostic: self.diagnostic.clone(),
        }
    }
}

/// Serializable view of a [`CoefficientEstimate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub target: Target,
    pub n: i64,
    pub value: String,
    pub k_used: u64,
    pub block_tail: f64,
    pub stabilized: bool,
    pub max_imag: f64,
    pub diagnostic: Option<String>,
}

/// Truncation settings for a coefficient sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepParams {
    pub tol: f64,
    pub k_max: u64,
    pub first_block: u64,
    pub prec: u32,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            k_max: DEFAULT_K_MAX,
            first_block: FIRST_BLOCK,
            prec: crate::DEFAULT_PRECISION,
        }
    }
}

/// `(−1)^{⌊(k+1)/2⌋}`: the pattern −, +, +, −, −, +, + …
pub fn k_sign(k: u64) -> i32 {
    if ((k + 1) / 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `k(1+(−1)^k)/4`: zero for odd `k`, `k/2` for even `k`.
pub fn k_shift(k: u64) -> i64 {
    if k % 2 == 0 {
        (k / 2) as i64
    } else {
        0
    }
}

/// Per-`n` data that does not depend on `k`.
struct Prepared {
    n: i64,
    /// `π·u^{−1/4}`
    pref: Float,
    /// `π√u/12`
    arg: Float,
}

fn prepare(target: Target, n: i64, prec: u32) -> Prepared {
    let u = match target {
        Target::Alpha => Float::with_val(prec, 24 * n - 1),
        Target::AlphaTilde => Float::with_val(prec, 24 * n + 1),
    };
    let root = u.sqrt();
    let pref = pi(prec) / Float::with_val(prec, root.sqrt_ref());
    let arg = pi(prec) * root / 12u32;
    Prepared { n, pref, arg }
}

/// Complex term `π ε_k/k · A_{2k}(m_k) · u^{−1/4} Z_{1/2}(π√u/(12k))` for
/// every prepared `n`, with `Z = I` or `J` by target.
fn terms_for_k(target: Target, k: u64, prepared: &[&Prepared], prec: u32) -> Result<Vec<BigComplex>> {
    let modulus = 2 * k;
    let table = multiplier_table(modulus);
    let roots = RootTable::new(modulus, prec);
    let mut counts = Vec::new();
    let mut out = Vec::with_capacity(prepared.len());
    for p in prepared {
        let m = match target {
            Target::Alpha => p.n - k_shift(k),
            Target::AlphaTilde => -p.n - k_shift(k),
        };
        table.phase_counts(m, &mut counts);
        let a = roots.lower(&counts, prec);
        let x = BigComplex::from_real(Float::with_val(prec, &p.arg / k));
        let bessel = match target {
            Target::Alpha => bessel_i_half(&x)?,
            Target::AlphaTilde => bessel_j_half(&x)?,
        };
        let scale = Float::with_val(prec, &p.pref * k_sign(k)) / k;
        out.push((&a * &bessel).scale(&scale));
    }
    Ok(out)
}

/// Block-adaptive evaluation of `target` at every `n` in `ns`.
///
/// The sum runs over blocks `(0, K₀], (K₀, 2K₀], …` capped at `k_max`; an
/// `n` leaves the active set once its latest block contributes less than
/// `tol`. Terms within a block are computed in parallel and summed in
/// increasing `k`, so results do not depend on the thread count.
pub fn sweep(target: Target, ns: &[i64], params: &SweepParams) -> Result<Vec<CoefficientEstimate>> {
    let prec = params.prec.max(crate::MIN_PRECISION);
    for &n in ns {
        match target {
            Target::Alpha if n < 1 => {
                return Err(Error::Domain { what: "n", requirement: "n >= 1 for alpha" })
            }
            Target::AlphaTilde if n < 0 => {
                return Err(Error::Domain { what: "n", requirement: "n >= 0 for alpha_tilde" })
            }
            _ => {}
        }
    }
    if params.k_max < 1 {
        return Err(Error::Domain { what: "k_max", requirement: "k_max >= 1" });
    }
    if !(params.tol > 0.0) {
        return Err(Error::Domain { what: "tol", requirement: "tol > 0" });
    }
    let prepared: Vec<Prepared> = ns.iter().map(|&n| prepare(target, n, prec)).collect();
    let mut sums: Vec<BigComplex> = vec![BigComplex::zero(prec); ns.len()];
    let mut results: Vec<Option<CoefficientEstimate>> = vec![None; ns.len()];
    let mut histories: Vec<Vec<(u64, f64)>> = vec![Vec::new(); ns.len()];
    let mut max_imag = vec![0f64; ns.len()];
    let mut active: Vec<usize> = (0..ns.len()).collect();

    let mut lo = 0u64;
    let mut hi = params.first_block.max(1).min(params.k_max);
    while !active.is_empty() {
        let sub: Vec<&Prepared> = active.iter().map(|&i| &prepared[i]).collect();
        let block: Vec<Vec<BigComplex>> = ((lo + 1)..=hi)
            .into_par_iter()
            .map(|k| terms_for_k(target, k, &sub, prec))
            .collect::<Result<_>>()?;
        let mut block_sum = vec![BigComplex::zero(prec); active.len()];
        for terms in &block {
            for (j, t) in terms.iter().enumerate() {
                block_sum[j] += t;
                let i = active[j];
                sums[i] += t;
                max_imag[i] = max_imag[i].max(sums[i].im().to_f64().abs());
            }
        }
        let mut still = Vec::new();
        for (j, &i) in active.iter().enumerate() {
            let tail = block_sum[j].abs().to_f64();
            histories[i].push((hi, sums[i].re().to_f64()));
            let done = tail < params.tol;
            if done || hi >= params.k_max {
                let diagnostic = (!done).then(|| {
                    format!(
                        "last block ({lo}, {hi}] contributed {tail:.3e}, above tol {:.1e}; K_max = {} reached",
                        params.tol, params.k_max
                    )
                });
                results[i] = Some(CoefficientEstimate {
                    target,
                    n: ns[i],
                    value: sums[i].re().clone(),
                    k_used: hi,
                    block_tail: tail,
                    stabilized: done,
                    max_imag: max_imag[i],
                    history: std::mem::take(&mut histories[i]),
                    diagnostic,
                });
            } else {
                still.push(i);
            }
        }
        active = still;
        lo = hi;
        hi = (hi * 2).min(params.k_max);
    }
    Ok(results.into_iter().map(|r| r.expect("every n finishes")).collect())
}

/// `α(n)` summed over `k ≤ K` exactly as written (single block).
pub fn alpha(n: i64, k_max: u64, prec: u32) -> Result<CoefficientEstimate> {
    fixed(Target::Alpha, n, k_max, prec)
}

/// `α̃(n)` summed over `k ≤ K` exactly as written (single block).
pub fn alpha_tilde(n: i64, k_max: u64, prec: u32) -> Result<CoefficientEstimate> {
    fixed(Target::AlphaTilde, n, k_max, prec)
}

fn fixed(target: Target, n: i64, k_max: u64, prec: u32) -> Result<CoefficientEstimate> {
    let params = SweepParams { tol: DEFAULT_TOL, k_max, first_block: k_max, prec };
    Ok(sweep(target, &[n], &params)?.remove(0))
}

/// Geometric-block truncation of one coefficient.
pub fn adaptive_truncation(target: Target, n: i64, tol: f64, k_max: u64, prec: u32) -> Result<CoefficientEstimate> {
    let params = SweepParams { tol, k_max, first_block: FIRST_BLOCK, prec };
    Ok(sweep(target, &[n], &params)?.remove(0))
}

/// Coefficient of `qⁿ` in `f(q)` from the exact series truncated at `q^N`.
pub fn alpha_exact(n: i64, order: i64) -> Result<i64> {
    if n >= order {
        return Err(Error::BeyondTruncation { requested: n.to_string(), order: order.to_string() });
    }
    if n < 0 {
        return Ok(0);
    }
    let c = integer_coeff(&series_f(order)?, n)?;
    c.to_i64().ok_or_else(|| Error::InvalidArgument(format!("coefficient {c} overflows i64")))
}

/// The closed form for `α̃(n)`: `1` at `n = 0`, `−2·(−12/m)` when
/// `24n+1 = m²`, and `0` otherwise.
pub fn alpha_tilde_expected(n: i64) -> i64 {
    if n == 0 {
        return 1;
    }
    match perfect_square_root(24 * n + 1) {
        Some(m) => -2 * kronecker(-12, m) as i64,
        None => 0,
    }
}

fn perfect_square_root(v: i64) -> Option<i64> {
    if v < 0 {
        return None;
    }
    let r = (v as f64).sqrt().round() as i64;
    (r - 1..=r + 1).find(|c| *c >= 0 && c * c == v)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    #[test]
    fn sign_and_shift_patterns() {
        let signs: Vec<i32> = (1..=8).map(k_sign).collect();
        assert_eq!(signs, vec![-1, -1, 1, 1, -1, -1, 1, 1]);
        assert_eq!((1..=6).map(k_shift).collect::<Vec<_>>(), vec![0, 1, 0, 2, 0, 3]);
    }

    #[test]
    fn exact_coefficients() {
        assert_eq!(alpha_exact(0, 10).unwrap(), 1);
        assert_eq!(alpha_exact(4, 10).unwrap(), -3);
        assert_eq!(alpha_exact(6, 10).unwrap(), -5);
        assert!(alpha_exact(10, 10).is_err());
    }

    #[test]
    fn expected_lower_coefficients() {
        assert_eq!(alpha_tilde_expected(0), 1);
        assert_eq!(alpha_tilde_expected(1), 2);
        assert_eq!(alpha_tilde_expected(2), -2);
        assert_eq!(alpha_tilde_expected(3), 0);
        assert_eq!(alpha_tilde_expected(4), 0);
    }

    #[test]
    fn support_is_odd_squares_prime_to_six() {
        for n in 1..=1000i64 {
            let v = 24 * n + 1;
            let brute = (1..=v).take_while(|m| m * m <= v).any(|m| m * m == v && m % 2 == 1 && m % 3 != 0);
            assert_eq!(alpha_tilde_expected(n) != 0, brute, "n={n}");
        }
    }

    #[test]
    fn first_coefficients_from_the_exact_formula() {
        let params = SweepParams { tol: DEFAULT_TOL, k_max: 256, first_block: FIRST_BLOCK, prec: P };
        let est = sweep(Target::Alpha, &[1, 2, 3], &params).unwrap();
        for (e, want) in est.iter().zip([1.0, -2.0, 3.0]) {
            assert!((e.to_f64() - want).abs() < 0.1, "n={} got {}", e.n, e.to_f64());
            assert!(e.max_imag < 1e-25);
        }
    }

    #[test]
    fn adaptive_alpha_one() {
        let e = adaptive_truncation(Target::Alpha, 1, 1e-3, 512, P).unwrap();
        assert!((e.to_f64() - 1.0).abs() < 0.1);
        assert!(e.history.len() >= 3);
        assert_eq!(e.stabilized, e.block_tail < 1e-3);
    }

    #[test]
    fn lower_coefficients_match_closed_form_off_zero() {
        let params = SweepParams { tol: DEFAULT_TOL, k_max: 512, first_block: FIRST_BLOCK, prec: P };
        let ns: Vec<i64> = (1..=4).collect();
        for e in sweep(Target::AlphaTilde, &ns, &params).unwrap() {
            assert!((e.to_f64() - alpha_tilde_expected(e.n) as f64).abs() < 0.05, "n={} {}", e.n, e.to_f64());
        }
    }

    #[test]
    fn forced_non_convergence() {
        let e = adaptive_truncation(Target::Alpha, 1, 1e-3, 1, P).unwrap();
        assert!(!e.stabilized);
        assert_eq!(e.k_used, 1);
        assert!(e.diagnostic.is_some());
    }

    #[test]
    fn fixed_and_blocked_sums_agree() {
        let a = alpha(5, 64, P).unwrap();
        let b = adaptive_truncation(Target::Alpha, 5, 1e-30, 64, P).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(b.history.iter().map(|h| h.0).collect::<Vec<_>>(), vec![16, 32, 64]);
    }

    #[test]
    fn domain_errors() {
        assert!(alpha(0, 8, P).is_err());
        assert!(alpha_tilde(-1, 8, P).is_err());
        assert!(adaptive_truncation(Target::Alpha, 1, 0.0, 8, P).is_err());
    }

    #[test]
    fn record_serializes() {
        let e = alpha(1, 4, P).unwrap();
        let json = serde_json::to_string(&e.record(20)).unwrap();
        assert!(json.contains("\"target\":\"alpha\""));
    }
}
