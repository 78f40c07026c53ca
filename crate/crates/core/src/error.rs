use thiserror::Error;

pub type Result<T> = std::result::Result<T, LbError>;

/// Errors raised by the numerical core.
///
/// Quantities are carried as `f64` so the error type stays independent of
/// the scalar the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LbError {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("exponential overflow at r = {r}; |r| must stay below {bound}")]
    Range { r: f64, bound: f64 },

    #[error("phi'^2 = {value} < 0 at r = {at}, inside [{lo}, {hi}]: scalar field is not real")]
    NonRealScalar { value: f64, at: f64, lo: f64, hi: f64 },

    #[error("forbidden region at r = {r}: w = {w} exceeds E^2 = {e2}")]
    ForbiddenRegion { r: f64, w: f64, e2: f64 },

    #[error("arctanh argument {arg} outside (-1, 1) at r = {r}; admissible r < {bound}")]
    ArctanhDomain { r: f64, arg: f64, bound: f64 },

    #[error("pole: {0}")]
    Pole(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("special function evaluation failed: {0}")]
    SpecialFunction(String),
}
