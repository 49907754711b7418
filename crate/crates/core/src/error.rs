use thiserror::Error;

/// Errors reported by the exact-arithmetic and shell-algebra routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("malformed angular momentum pair j = {twice_j}/2, m = {twice_m}/2")]
    MalformedAngularMomentum { twice_j: i32, twice_m: i32 },

    #[error("{0} electrons exceed the capacity of an l = {1} shell")]
    CapacityExceeded(u32, u32),

    #[error("spin projection 2M_S = {twice_ms} is impossible for N = {n}")]
    ImpossibleProjection { n: u32, twice_ms: i32 },

    #[error("total spin 2S = {twice_s} is invalid for N = {n}")]
    InvalidSpin { n: u32, twice_s: i32 },

    #[error("no states with 2S = {twice_s} in l = {ell}, N = {n}")]
    EmptySpinLevel { ell: u32, n: u32, twice_s: i32 },

    #[error("rank k = {k} is not allowed for (l, l') = ({ell}, {ell_prime})")]
    RankNotAllowed { ell: u32, ell_prime: u32, k: u32 },

    #[error("parameter labels do not match the basis: {0}")]
    LabelMismatch(String),

    #[error("operation requires l = l' >= 1, got ({ell}, {ell_prime})")]
    EmptyLambdaRange { ell: u32, ell_prime: u32 },

    #[error(
        "term 2S+1 = {multiplicity}, L = {l} is forbidden for two equivalent l = {ell} electrons"
    )]
    ForbiddenTerm { ell: u32, multiplicity: i32, l: u32 },

    #[error("energy forms live in different bases")]
    BasisMismatch,

    #[error("l = {ell} exceeds the configured cap of {cap}")]
    ShellCapExceeded { ell: u32, cap: u32 },

    #[error("matrix dimension {dim} exceeds the configured cap of {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("invalid determinant: {0}")]
    InvalidDeterminant(String),

    #[error("determinants belong to different shells or electron counts")]
    ShellMismatch,

    #[error("identity check failed: {0}")]
    IdentityViolation(String),

    #[error("cannot parse {0:?} as an exact number")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
