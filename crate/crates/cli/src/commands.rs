//! Command execution and rendering in text, JSON and CSV.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use log::warn;
use rug::Rational;
use serde_json::{json, Value};
use unitheta_core::arith::{self, Phase};
use unitheta_core::bilateral::{self, FParams};
use unitheta_core::maasswrt::{self, RadialEstimate};
use unitheta_core::qseries::{self, FracPowSeries, Sign};
use unitheta_core::rademacher::{self, CoefficientRecord, SweepParams, Target};
use unitheta_core::special::{float_to_string, parse_rational};
use unitheta_core::BigComplex;

use crate::cache::Cache;
use crate::cli::{parse_range, CacheAction, Cli, Command, SeriesName, Suite, WrtAction};
use crate::config::{Config, Format};
use crate::manifest::{Envelope, RunManifest};
use crate::suites::{self, Report};
use crate::CliError;

/// Rendered output and whether every check (if any) passed.
#[derive(Debug)]
pub struct Outcome {
    pub output: String,
    pub passed: bool,
}

/// A command's result in all three renderings.
struct Payload {
    command: String,
    parameters: Value,
    result: Value,
    text: String,
    csv: String,
    passed: bool,
}

pub const DEFAULT_SERIES_ORDER: i64 = 20;

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = cli.global.config();
    cfg.validate()?;
    let start = Instant::now();
    let payload = match &cli.command {
        Command::Series { name, var } => series(&cfg, *name, var)?,
        Command::Dedekind { h, k } => dedekind(*h, *k)?,
        Command::Kloosterman { k, n } => kloosterman(&cfg, *k, *n)?,
        Command::Coeff { target, n, n_range, k_max } => coeff(&cfg, *target, *n, n_range.as_deref(), *k_max)?,
        Command::Eval { z, k_max, .. } => eval(&cfg, z, *k_max)?,
        Command::Verify { suite } => verify(&cfg, suite)?,
        Command::Wrt { action } => wrt(&cfg, action)?,
        Command::Cache { action } => cache(&cfg, action)?,
    };
    let wall = cfg.timing.then(|| start.elapsed().as_millis() as u64);
    Ok(render(&cfg, payload, wall))
}

fn render(cfg: &Config, p: Payload, wall_time_ms: Option<u64>) -> Outcome {
    let manifest = RunManifest::new(&p.command, p.parameters, cfg.precision_bits, &p.result, wall_time_ms);
    let output = match cfg.format {
        Format::Json => {
            let env = Envelope { manifest, result: p.result };
            serde_json::to_string_pretty(&env).expect("envelope serializes") + "\n"
        }
        Format::Csv => format!("# manifest {}\n{}", compact(&manifest), p.csv),
        Format::Text => format!("{}# manifest {}\n", p.text, compact(&manifest)),
    };
    Outcome { output, passed: p.passed }
}

fn compact(m: &RunManifest) -> String {
    serde_json::to_string(m).expect("manifest serializes")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn parse_point(text: &str, prec: u32) -> Result<BigComplex, CliError> {
    BigComplex::parse(text, prec).map_err(|e| CliError::Usage(format!("bad point {text:?}: {e}")))
}

fn parse_turns(text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::Usage(format!("bad root of unity {text:?}: {e}")))
}

fn read_point_list(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: expected a JSON list of strings: {e}", path.display())))
}

// ===========================================================================
// series, dedekind, kloosterman
// ===========================================================================

pub fn build_series(name: SeriesName, order: i64) -> unitheta_core::Result<FracPowSeries> {
    match name {
        SeriesName::F => qseries::series_f(order),
        SeriesName::F2 => qseries::series_f2(order),
        SeriesName::FOuter => qseries::series_f_outer(order),
        SeriesName::F2Outer => qseries::series_f2_outer(order),
        SeriesName::Psi => qseries::series_psi(order),
        SeriesName::APlus => qseries::series_a_pm(Sign::Plus, order),
        SeriesName::AMinus => qseries::series_a_pm(Sign::Minus, order),
        SeriesName::Phi5 => qseries::series_phi5(order),
        SeriesName::Phi5Star => qseries::series_phi5_star(order),
        SeriesName::FPlus => qseries::series_f_pm(Sign::Plus, order),
        SeriesName::FMinus => qseries::series_f_pm(Sign::Minus, order),
    }
}

fn series(cfg: &Config, name: SeriesName, var: &str) -> Result<Payload, CliError> {
    let order = cfg.order.unwrap_or(DEFAULT_SERIES_ORDER);
    let s = build_series(name, order)?;
    let terms: Vec<(String, String)> = s.terms().iter().map(|(e, c)| (e.to_string(), c.to_string())).collect();
    let mut text = format!("{} = ", name.label());
    let mut csv = String::from("# unitheta series v1\nexponent,coefficient\n");
    for (i, (e, c)) in terms.iter().enumerate() {
        let sep = if i == 0 { "" } else { " + " };
        let _ = write!(text, "{sep}({c})*{var}^{e}");
        let _ = writeln!(csv, "{e},{c}");
    }
    let _ = writeln!(text, " + O({var}^{})", Rational::from((s.trunc_order(), s.scale())));
    let result = json!({
        "name": name.label(),
        "variable": var,
        "scale": s.scale(),
        "trunc_order": s.trunc_order(),
        "terms": terms.iter().map(|(e, c)| json!({"exponent": e, "coefficient": c})).collect::<Vec<_>>(),
    });
    Ok(Payload {
        command: "series".into(),
        parameters: json!({"name": name.label(), "order": order, "variable": var}),
        result,
        text,
        csv,
        passed: true,
    })
}

fn dedekind(h: i64, k: u64) -> Result<Payload, CliError> {
    let s = arith::dedekind_sum(h, k)?;
    let omega = arith::omega(h, k)?;
    let result = json!({"h": h, "k": k, "s": s.to_string(), "omega_pi_exponent": omega.exponent().to_string()});
    Ok(Payload {
        command: "dedekind".into(),
        parameters: json!({"h": h, "k": k}),
        text: format!("s({h}, {k}) = {s}\nomega = {omega}\n"),
        csv: format!("# unitheta dedekind v1\nh,k,s,omega_pi_exponent\n{h},{k},{s},{}\n", omega.exponent()),
        result,
        passed: true,
    })
}

fn kloosterman(cfg: &Config, k: u64, n: i64) -> Result<Payload, CliError> {
    let v = arith::kloosterman_a(k, n, cfg.precision_bits)?;
    let digits = cfg.digits();
    let (re, im) = (float_to_string(v.value.re(), digits), float_to_string(v.value.im(), digits));
    Ok(Payload {
        command: "kloosterman".into(),
        parameters: json!({"k": k, "n": n}),
        result: json!({"k": k, "n": n, "re": re, "im": im}),
        text: format!("A_{k}({n}) = {}\n", v.value.to_string_digits(digits)),
        csv: format!("# unitheta kloosterman v1\nk,n,re,im\n{k},{n},{re},{im}\n"),
        passed: true,
    })
}

// ===========================================================================
// coeff
// ===========================================================================

fn coeff_key(target: Target, n: i64, params: &SweepParams, digits: usize) -> String {
    format!(
        "coeff|{target}|n={n}|tol={:e}|k_max={}|first_block={}|prec={}|digits={digits}",
        params.tol, params.k_max, params.first_block, params.prec
    )
}

/// Coefficient records for `ns`, served from the cache where possible.
pub fn coefficient_records(
    cache: &Cache,
    target: Target,
    ns: &[i64],
    params: &SweepParams,
    digits: usize,
) -> Result<Vec<CoefficientRecord>, CliError> {
    let mut found: Vec<Option<CoefficientRecord>> =
        ns.iter().map(|&n| cache.get(&coeff_key(target, n, params, digits))).collect();
    let missing: Vec<i64> = ns.iter().zip(&found).filter(|(_, f)| f.is_none()).map(|(n, _)| *n).collect();
    if !missing.is_empty() {
        let fresh = rademacher::sweep(target, &missing, params)?;
        let mut fresh = fresh.into_iter();
        for (slot, &n) in found.iter_mut().zip(ns) {
            if slot.is_none() {
                let est = fresh.next().expect("one estimate per requested n");
                let rec = est.record(digits);
                cache.put(&coeff_key(target, n, params, digits), &rec);
                *slot = Some(rec);
            }
        }
    }
    Ok(found.into_iter().map(|r| r.expect("filled")).collect())
}

fn coeff(cfg: &Config, target: Target, n: Option<i64>, range: Option<&str>, k_max: u64) -> Result<Payload, CliError> {
    let ns: Vec<i64> = match (n, range) {
        (Some(n), _) => vec![n],
        (None, Some(r)) => {
            let (a, b) = parse_range(r).map_err(CliError::Usage)?;
            (a..=b).collect()
        }
        (None, None) => return Err(CliError::Usage("coeff needs --n or --n-range".into())),
    };
    if target == Target::Alpha && ns.iter().any(|&n| n < 1) {
        return Err(CliError::Usage("alpha(n) is defined for n >= 1".into()));
    }
    if target == Target::AlphaTilde && ns.iter().any(|&n| n < 0) {
        return Err(CliError::Usage("alpha_tilde(n) is defined for n >= 0".into()));
    }
    let params = SweepParams {
        tol: cfg.tol_or(rademacher::DEFAULT_TOL),
        k_max,
        prec: cfg.precision_bits,
        ..SweepParams::default()
    };
    let digits = cfg.digits();
    let cache = Cache::open(cfg.cache_dir.clone());
    let records = coefficient_records(&cache, target, &ns, &params, digits)?;
    let mut text = String::new();
    let mut csv = String::from("# unitheta coeff v1\ntarget,n,value,k_used,block_tail,stabilized,max_imag\n");
    for r in &records {
        if !r.stabilized {
            warn!("{}({}) not stabilized: {}", r.target, r.n, r.diagnostic.as_deref().unwrap_or(""));
        }
        let short: f64 = r.value.parse().unwrap_or(f64::NAN);
        let _ = writeln!(
            text,
            "{}({}) = {:.6}  K = {}  tail = {:.2e}  stabilized = {}",
            r.target, r.n, short, r.k_used, r.block_tail, r.stabilized
        );
        let _ = writeln!(
            csv,
            "{},{},{},{},{:e},{},{:e}",
            r.target, r.n, r.value, r.k_used, r.block_tail, r.stabilized, r.max_imag
        );
    }
    Ok(Payload {
        command: "coeff".into(),
        parameters: json!({"target": target.to_string(), "n": ns, "tol": params.tol, "k_max": k_max}),
        result: serde_json::to_value(&records).expect("records serialize"),
        text,
        csv,
        passed: true,
    })
}

// ===========================================================================
// eval, verify
// ===========================================================================

fn f_params(cfg: &Config, k_max: u64) -> FParams {
    let d = FParams::default();
    FParams { k_max, tol: cfg.tol_or(d.tol), ..d }
}

fn eval(cfg: &Config, z: &str, k_max: u64) -> Result<Payload, CliError> {
    let point = parse_point(z, cfg.precision_bits)?;
    let report = bilateral::compare(&point, &f_params(cfg, k_max))?;
    if !report.stabilized {
        warn!("F({z}) not stabilized by K = {}", report.k_used);
    }
    let rec = report.record(cfg.digits());
    let text = format!(
        "F({}) = {}\nreference = {}\nabs_err = {:.3e}  rel_err = {:.3e}  K = {}  stabilized = {}\n",
        rec.z, rec.f_value, rec.reference, rec.abs_err, rec.rel_err, rec.k_used, rec.stabilized
    );
    let csv = format!(
        "# unitheta eval v1\nz,half_plane,f_value,reference,abs_err,rel_err,K_used,stabilized\n{},{:?},{},{},{:e},{:e},{},{}\n",
        csv_field(&rec.z),
        rec.half_plane,
        csv_field(&rec.f_value),
        csv_field(&rec.reference),
        rec.abs_err,
        rec.rel_err,
        rec.k_used,
        rec.stabilized
    );
    Ok(Payload {
        command: "eval".into(),
        parameters: json!({"function": "F", "z": z, "k_max": k_max, "tol": f_params(cfg, k_max).tol}),
        result: serde_json::to_value(&rec).expect("record serializes"),
        text,
        csv,
        passed: true,
    })
}

fn report_payload(command: &str, parameters: Value, report: Report) -> Payload {
    let mut text = format!("suite {}: {}\n", report.suite, if report.passed { "PASS" } else { "FAIL" });
    let mut csv = String::from("# unitheta verify v1\nsuite,check,achieved,tolerance,passed,detail\n");
    for c in &report.checks {
        let mark = if c.passed { "pass" } else { "FAIL" };
        let bound = match (c.achieved, c.tolerance) {
            (Some(a), Some(t)) => format!("{a:.3e} < {t:.1e}"),
            _ => "exact".into(),
        };
        let _ = writeln!(text, "  [{mark}] {} ({bound}) {}", c.name, c.detail);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            report.suite,
            csv_field(&c.name),
            c.achieved.map(|a| format!("{a:e}")).unwrap_or_default(),
            c.tolerance.map(|t| format!("{t:e}")).unwrap_or_default(),
            c.passed,
            csv_field(&c.detail)
        );
    }
    if !report.points.is_empty() {
        csv = String::from("# unitheta theorem v1\nz,half_plane,rel_err,K_used,stabilized\n");
        for p in &report.points {
            let _ = writeln!(csv, "{},{},{:e},{},{}", csv_field(&p.z), p.half_plane.as_str(), p.rel_err, p.k_used, p.stabilized);
        }
    }
    let passed = report.passed;
    Payload {
        command: command.into(),
        parameters,
        result: serde_json::to_value(&report).expect("report serializes"),
        text,
        csv,
        passed,
    }
}

fn verify(cfg: &Config, suite: &Suite) -> Result<Payload, CliError> {
    let prec = cfg.precision_bits;
    let tol = cfg.tol_or(rademacher::DEFAULT_TOL);
    Ok(match suite {
        Suite::Identities => {
            let order = cfg.order.unwrap_or(suites::DEFAULT_IDENTITY_ORDER);
            report_payload("verify identities", json!({"order": order}), suites::identities(order)?)
        }
        Suite::Lemma { n_max, k_max } => report_payload(
            "verify lemma",
            json!({"n_max": n_max, "k_max": k_max, "tol": tol}),
            suites::lemma(*n_max, prec, tol, *k_max)?,
        ),
        Suite::Rademacher { n_max, k_max } => report_payload(
            "verify rademacher",
            json!({"n_max": n_max, "k_max": k_max, "tol": tol}),
            suites::rademacher(*n_max, prec, tol, *k_max)?,
        ),
        Suite::Theorem { points, grid, k_max } => {
            let labels: Vec<String> = match grid {
                Some(path) => read_point_list(path)?,
                None if points == "default" => suites::THEOREM_POINTS.iter().map(|s| s.to_string()).collect(),
                None => points.split(';').map(|s| s.trim().to_string()).collect(),
            };
            let zs = labels.iter().map(|t| parse_point(t, prec)).collect::<Result<Vec<_>, _>>()?;
            let params = f_params(cfg, *k_max);
            report_payload(
                "verify theorem",
                json!({"points": labels, "k_max": k_max, "tol": params.tol}),
                suites::theorem(&zs, &params, cfg.digits())?,
            )
        }
        Suite::Maass { z_list } => {
            let labels: Vec<String> = match z_list {
                Some(path) => read_point_list(path)?,
                None => suites::MAASS_POINTS.iter().map(|s| s.to_string()).collect(),
            };
            let zs = labels.iter().map(|t| parse_point(t, prec)).collect::<Result<Vec<_>, _>>()?;
            report_payload("verify maass", json!({"points": labels}), suites::maass(&zs)?)
        }
        Suite::Wrt { xi } => {
            let order = cfg.order.unwrap_or(suites::DEFAULT_WRT_ORDER);
            let xis = xi.iter().map(|x| parse_turns(x)).collect::<Result<Vec<_>, _>>()?;
            report_payload("verify wrt", json!({"order": order, "xi": xi}), suites::wrt(order, &xis, prec)?)
        }
    })
}

// ===========================================================================
// wrt, cache
// ===========================================================================

fn radial_json(est: &RadialEstimate, digits: usize) -> Value {
    let samples: Vec<Value> = est
        .samples
        .iter()
        .map(|(t, v)| {
            json!({"t": t, "re": float_to_string(v.re(), digits), "im": float_to_string(v.im(), digits)})
        })
        .collect();
    json!({
        "samples": samples,
        "order": est.order,
        "limit_re": float_to_string(est.extrapolated.re(), digits),
        "limit_im": float_to_string(est.extrapolated.im(), digits),
    })
}

fn wrt(cfg: &Config, action: &WrtAction) -> Result<Payload, CliError> {
    let prec = cfg.precision_bits;
    let digits = cfg.digits();
    match action {
        WrtAction::Identities => {
            let order = cfg.order.unwrap_or(suites::DEFAULT_WRT_ORDER);
            let checks = {
                let [plus, minus] = qseries::wrt_identities(order)?;
                suites::Report {
                    suite: "wrt identities".into(),
                    passed: plus.equal && minus.equal,
                    checks: vec![
                        identity_check("-Phi* = A+ - R F+", &plus),
                        identity_check("-Phi* = A- + R F-", &minus),
                    ],
                    points: Vec::new(),
                }
            };
            Ok(report_payload("wrt identities", json!({"order": order}), checks))
        }
        WrtAction::Radial { xi, t0, levels } => {
            let turns = parse_turns(xi)?;
            let w = maasswrt::wrt_radial(&Phase::from_turns(&turns), *t0, *levels, prec)?;
            let mut csv = String::from("# unitheta wrt_radial v1\nseries,kind,t,re,im\n");
            let mut text = format!("xi = e({turns})\n");
            for (label, est) in [("A+", &w.plus), ("A-", &w.minus)] {
                for (t, v) in &est.samples {
                    let (re, im) = (float_to_string(v.re(), digits), float_to_string(v.im(), digits));
                    let _ = writeln!(csv, "{label},sample,{t},{re},{im}");
                }
                let (re, im) = (
                    float_to_string(est.extrapolated.re(), digits),
                    float_to_string(est.extrapolated.im(), digits),
                );
                let _ = writeln!(csv, "{label},limit,0,{re},{im}");
                let _ = writeln!(text, "lim {label} = {}", est.extrapolated.to_string_digits(20));
            }
            let _ = writeln!(text, "|difference| = {:.3e}", w.difference);
            let _ = writeln!(text, "1 - lim A+ = {}", w.w_estimate().to_string_digits(20));
            Ok(Payload {
                command: "wrt radial".into(),
                parameters: json!({"xi": turns.to_string(), "t0": t0, "levels": levels}),
                result: json!({
                    "xi": turns.to_string(),
                    "plus": radial_json(&w.plus, digits),
                    "minus": radial_json(&w.minus, digits),
                    "difference": w.difference,
                }),
                text,
                csv,
                passed: true,
            })
        }
        WrtAction::Profile { xi, t0, samples } => {
            let turns = parse_turns(xi)?;
            let rows = maasswrt::radial_profile(&Phase::from_turns(&turns), *t0, *samples, prec)?;
            let csv = maasswrt::profile_csv(&rows, digits.min(30));
            let result: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "t": r.t,
                        "inside": r.inside.to_string_digits(digits.min(30)),
                        "outside": r.outside.to_string_digits(digits.min(30)),
                    })
                })
                .collect();
            Ok(Payload {
                command: "wrt profile".into(),
                parameters: json!({"xi": turns.to_string(), "t0": t0, "samples": samples}),
                result: Value::Array(result),
                text: csv.clone(),
                csv,
                passed: true,
            })
        }
    }
}

fn identity_check(name: &str, r: &qseries::SeriesIdentityReport) -> suites::Check {
    suites::Check {
        name: name.into(),
        achieved: None,
        tolerance: None,
        passed: r.equal,
        detail: match &r.first_mismatch {
            None => format!("exact through exponent below {}", r.checked_order),
            Some(m) => format!("first mismatch at q^{}: {} vs {}", m.exponent, m.lhs, m.rhs),
        },
    }
}

fn cache(cfg: &Config, action: &CacheAction) -> Result<Payload, CliError> {
    let cache = Cache::open(cfg.cache_dir.clone());
    let dir = cache.dir().map(|d| d.display().to_string()).unwrap_or_else(|| "<disabled>".into());
    match action {
        CacheAction::Show => {
            let entries = cache.entries()?;
            let mut text = format!("cache {dir}: {} entries\n", entries.len());
            let mut csv = String::from("# unitheta cache v1\nfile,key,current\n");
            for e in &entries {
                let _ = writeln!(text, "  {} {}{}", e.file, e.key, if e.current { "" } else { " (stale)" });
                let _ = writeln!(csv, "{},{},{}", e.file, csv_field(&e.key), e.current);
            }
            Ok(Payload {
                command: "cache show".into(),
                parameters: json!({}),
                result: json!({"dir": dir, "entries": entries}),
                text,
                csv,
                passed: true,
            })
        }
        CacheAction::Clear => {
            let removed = cache.clear()?;
            Ok(Payload {
                command: "cache clear".into(),
                parameters: json!({}),
                result: json!({"dir": dir, "removed": removed}),
                text: format!("removed {removed} entries from {dir}\n"),
                csv: format!("# unitheta cache v1\ndir,removed\n{},{removed}\n", csv_field(&dir)),
                passed: true,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn run_args(args: &[&str]) -> Result<Outcome, CliError> {
        let mut full = vec!["unitheta", "--no-cache"];
        full.extend_from_slice(args);
        run(&Cli::try_parse_from(full).unwrap())
    }

    #[test]
    fn series_f_coefficients() {
        let out = run_args(&["series", "f", "--order", "10", "--json"]).unwrap();
        let env: Envelope = serde_json::from_str(&out.output).unwrap();
        assert!(env.manifest.verify(&env.result));
        let coeffs: Vec<String> = env.result["terms"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| t["coefficient"].as_str().unwrap().to_string())
            .collect();
        assert_eq!(coeffs, ["1", "1", "-2", "3", "-3", "3", "-5", "7", "-6", "6"]);
    }

    #[test]
    fn series_psi_exponents() {
        let out = run_args(&["series", "psi", "--order", "6", "--csv"]).unwrap();
        let exps: Vec<&str> = out
            .output
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("exponent"))
            .map(|l| l.split(',').next().unwrap())
            .collect();
        assert_eq!(exps, ["0", "1", "2", "5"]);
    }

    #[test]
    fn zero_order_is_a_usage_error() {
        assert!(matches!(run_args(&["series", "f", "--order", "0"]), Err(CliError::Usage(_))));
    }

    #[test]
    fn dedekind_output() {
        let out = run_args(&["dedekind", "1", "3", "--json"]).unwrap();
        let env: Envelope = serde_json::from_str(&out.output).unwrap();
        assert_eq!(env.result["s"], "1/18");
    }

    #[test]
    fn bad_point_is_reported() {
        assert!(run_args(&["eval", "F", "--z", "nonsense"]).is_err());
        assert!(matches!(
            run_args(&["eval", "F", "--z", "0.3"]),
            Err(CliError::Eval(unitheta_core::Error::OnNaturalBoundary))
        ));
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
