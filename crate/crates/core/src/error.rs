use thiserror::Error;

/// Errors raised by the formal and numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("non-invertible series: coefficient at exponent {exponent} is zero")]
    NonInvertible { exponent: String },

    #[error("divergent product: an infinite q-Pochhammer symbol needs positive start exponent and step")]
    DivergentProduct,

    #[error("exponent {requested} lies beyond the truncation order {order}")]
    BeyondTruncation { requested: String, order: String },

    #[error("disjoint exponent ranges: nothing to compare")]
    DisjointRanges,

    #[error("undefined Dedekind sum: gcd({h}, {k}) != 1")]
    UndefinedDedekind { h: i64, k: u64 },

    #[error("{0} is undefined at zero")]
    ZeroArgument(&'static str),

    #[error("{0} requires a nonnegative argument")]
    NegativeArgument(&'static str),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("singular parameter: zeta_(2k)^d q = 1 for d = {d}, k = {k}")]
    SingularParameter { d: i64, k: u64 },

    #[error("unit circle is the natural boundary: Im z must be nonzero")]
    OnNaturalBoundary,

    #[error("{what} requires {requirement}")]
    Domain {
        what: &'static str,
        requirement: &'static str,
    },

    #[error("matrix {0} is not in Gamma(2)")]
    NotInGamma2(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse {0:?}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
