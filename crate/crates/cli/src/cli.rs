//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use unitheta_core::rademacher::Target;

use crate::config::{default_cache_dir, Config, Format};

#[derive(Debug, Parser)]
#[command(name = "unitheta", version, about = "Mock and partial theta function toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Working precision in bits.
    #[arg(long, global = true, env = "UNITHETA_PREC", default_value_t = unitheta_core::DEFAULT_PRECISION)]
    pub prec: u32,
    /// Truncation tolerance (command-specific default).
    #[arg(long, global = true, env = "UNITHETA_TOL")]
    pub tol: Option<f64>,
    /// Series truncation order.
    #[arg(long, global = true, env = "UNITHETA_ORDER")]
    pub order: Option<i64>,
    #[arg(long, global = true, env = "UNITHETA_JSON", conflicts_with = "csv")]
    pub json: bool,
    #[arg(long, global = true, env = "UNITHETA_CSV")]
    pub csv: bool,
    /// Cache directory (default: $XDG_CACHE_HOME/unitheta or ~/.cache/unitheta).
    #[arg(long, global = true, env = "UNITHETA_CACHE")]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true, env = "UNITHETA_NO_CACHE")]
    pub no_cache: bool,
    /// Record wall time in the manifest.
    #[arg(long, global = true, env = "UNITHETA_TIMING")]
    pub timing: bool,
}

impl GlobalArgs {
    pub fn config(&self) -> Config {
        let format = if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else {
            Format::Text
        };
        let cache_dir = if self.no_cache { None } else { self.cache.clone().or_else(default_cache_dir) };
        Config {
            precision_bits: self.prec,
            tol: self.tol,
            order: self.order,
            format,
            cache_dir,
            timing: self.timing,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact coefficients of a named q-series.
    Series {
        #[arg(value_enum)]
        name: SeriesName,
        /// Label of the series variable in text output.
        #[arg(long, default_value = "q")]
        var: String,
    },
    /// The Dedekind sum s(h, k) and the multiplier exp(pi i s(h, k)).
    Dedekind { h: i64, k: u64 },
    /// The Kloosterman-type sum A_k(n).
    Kloosterman {
        k: u64,
        #[arg(allow_hyphen_values = true)]
        n: i64,
    },
    /// Rademacher-type coefficient estimates.
    Coeff {
        #[arg(value_parser = parse_target)]
        target: Target,
        #[arg(long, conflicts_with = "n_range", allow_hyphen_values = true)]
        n: Option<i64>,
        /// Inclusive range `a..b`.
        #[arg(long)]
        n_range: Option<String>,
        #[arg(long, default_value_t = unitheta_core::rademacher::DEFAULT_K_MAX)]
        k_max: u64,
    },
    /// Evaluate the bilateral series against its reference.
    Eval {
        #[arg(value_enum)]
        function: EvalFunction,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = unitheta_core::bilateral::DEFAULT_F_K_MAX)]
        k_max: u64,
    },
    /// Run a verification suite; exit 1 if any check fails.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Partial theta identities and radial limits at roots of unity.
    Wrt {
        #[command(subcommand)]
        action: WrtAction,
    },
    /// Inspect or empty the result cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SeriesName {
    #[value(name = "f")]
    F,
    #[value(name = "f2")]
    F2,
    #[value(name = "f_outer")]
    FOuter,
    #[value(name = "f2_outer")]
    F2Outer,
    #[value(name = "psi")]
    Psi,
    #[value(name = "A+")]
    APlus,
    #[value(name = "A-")]
    AMinus,
    #[value(name = "Phi5")]
    Phi5,
    #[value(name = "Phi5*")]
    Phi5Star,
    #[value(name = "F+")]
    FPlus,
    #[value(name = "F-")]
    FMinus,
}

impl SeriesName {
    pub fn label(self) -> &'static str {
        match self {
            SeriesName::F => "f",
            SeriesName::F2 => "f2",
            SeriesName::FOuter => "f_outer",
            SeriesName::F2Outer => "f2_outer",
            SeriesName::Psi => "psi",
            SeriesName::APlus => "A+",
            SeriesName::AMinus => "A-",
            SeriesName::Phi5 => "Phi5",
            SeriesName::Phi5Star => "Phi5*",
            SeriesName::FPlus => "F+",
            SeriesName::FMinus => "F-",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvalFunction {
    #[value(name = "F")]
    F,
}

#[derive(Debug, Subcommand)]
pub enum Suite {
    /// Exact series identities.
    Identities,
    /// Lower half-plane coefficients against their closed form.
    Lemma {
        #[arg(long, default_value_t = crate::suites::DEFAULT_N_MAX)]
        n_max: i64,
        #[arg(long, default_value_t = unitheta_core::rademacher::DEFAULT_K_MAX)]
        k_max: u64,
    },
    /// Coefficients of f(q) recovered from the exact formula.
    Rademacher {
        #[arg(long, default_value_t = crate::suites::DEFAULT_N_MAX)]
        n_max: i64,
        #[arg(long, default_value_t = unitheta_core::rademacher::DEFAULT_K_MAX)]
        k_max: u64,
    },
    /// F against f(q) and 2 psi(1/q) on a grid of points.
    Theorem {
        /// `default` for the built-in grid.
        #[arg(long, default_value = "default", conflicts_with = "grid")]
        points: String,
        /// JSON list of points such as ["i", "0.25-0.5i"].
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = unitheta_core::bilateral::DEFAULT_F_K_MAX)]
        k_max: u64,
    },
    /// Completion checks for the mock theta function.
    Maass {
        /// JSON list of points in the upper half-plane.
        #[arg(long)]
        z_list: Option<PathBuf>,
    },
    /// Partial theta identities and radial limit agreement.
    Wrt {
        /// Roots of unity e(x), given as rationals x.
        #[arg(long, value_delimiter = ',', default_values_t = crate::suites::RADIAL_POINTS.map(String::from))]
        xi: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum WrtAction {
    Identities,
    /// Radial limits of A+ and A- toward e(xi).
    Radial {
        #[arg(long, default_value = "0")]
        xi: String,
        #[arg(long, default_value_t = unitheta_core::maasswrt::DEFAULT_T0)]
        t0: f64,
        #[arg(long, default_value_t = unitheta_core::maasswrt::DEFAULT_LEVELS)]
        levels: usize,
    },
    /// f inside and f_outer outside the disc along a ray toward e(xi).
    Profile {
        #[arg(long, default_value = "0")]
        xi: String,
        #[arg(long, default_value_t = 0.5)]
        t0: f64,
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CacheAction {
    Show,
    Clear,
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse().map_err(|e: unitheta_core::Error| e.to_string())
}

/// Parses `a..b` (inclusive) into its endpoints.
pub fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}"));
    let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok((a, b))
}
