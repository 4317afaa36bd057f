//! Run configuration assembled from flags and `UNITHETA_*` variables.

use std::path::PathBuf;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub precision_bits: u32,
    /// Truncation tolerance; each command falls back to its own default.
    pub tol: Option<f64>,
    pub order: Option<i64>,
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
    /// Record wall time in the manifest (breaks byte-identical output).
    pub timing: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            precision_bits: unitheta_core::DEFAULT_PRECISION,
            tol: None,
            order: None,
            format: Format::Text,
            cache_dir: None,
            timing: false,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.precision_bits < unitheta_core::MIN_PRECISION {
            return Err(CliError::Usage(format!(
                "--prec must be at least {} bits, got {}",
                unitheta_core::MIN_PRECISION,
                self.precision_bits
            )));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
            }
        }
        if let Some(o) = self.order {
            if o < 1 {
                return Err(CliError::Usage(format!("--order must be at least 1, got {o}")));
            }
        }
        Ok(())
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    /// Significant digits worth printing at the working precision.
    pub fn digits(&self) -> usize {
        let d = (self.precision_bits as f64 * std::f64::consts::LOG10_2).floor() as usize;
        d.saturating_sub(5).max(10)
    }
}

/// `$XDG_CACHE_HOME/unitheta`, else `$HOME/.cache/unitheta`.
pub fn default_cache_dir() -> Option<PathBuf> {
    if let Some(x) = std::env::var_os("XDG_CACHE_HOME").filter(|v| !v.is_empty()) {
        return Some(PathBuf::from(x).join("unitheta"));
    }
    std::env::var_os("HOME").filter(|v| !v.is_empty()).map(|h| PathBuf::from(h).join(".cache").join("unitheta"))
}
