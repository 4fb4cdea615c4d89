use alloc::string::String;

/// Errors raised by the core routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("matrix is not traceless (trace {trace:e})")]
    NotTraceless { trace: f64 },
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("hat family of order {k} would have {atoms} atoms (limit {limit})")]
    HatTooLarge { k: u32, atoms: u128, limit: usize },
    #[error("no anomaly of order ≤ {kmax}: some product at λ = 0 is not ±1")]
    NotAnAnomaly { kmax: u32 },
    #[error("degenerate anomaly: E(P) and Var(P) both vanish")]
    Degenerate,
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: &'static str, found: &'static str },
    #[error("phase polynomial E(p) vanishes on the circle (min |E(p)| = {0:e})")]
    ZeroCrossing(f64),
    #[error("not strictly diffusive: min E(p²) = {0:e}")]
    NonStrictlyDiffusive(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadratic coefficient is negative ({0:e})")]
    NegativeQuadratic(f64),
    #[error("matrix at λ = {lambda} has non-positive determinant")]
    NotInSl2 { lambda: f64 },
}
