use thiserror::Error;

/// Errors raised by the library. Check *failures* (a residual that is not
/// zero, a mismatch above tolerance) are reported through report structs,
/// not through this type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported type: {0}")]
    UnsupportedType(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),

    #[error("parameter on singular set: {0}")]
    SingularParameter(String),

    #[error("wall singularity: x lies on the wall of root {root}")]
    WallSingularity { root: usize },

    #[error("normalization singular: c~(rho(k), k) is {0}")]
    NormalizationSingular(&'static str),

    #[error("spectral parameter on pole hyperplane lambda(kappa^v)+1=0 at kappa = {kappa:?}")]
    PoleHyperplane { kappa: Vec<i64> },

    #[error("series not converged at cutoff {cutoff}, increase cutoff (last shells: {shells:?})")]
    IncreaseCutoff { cutoff: usize, shells: Vec<f64> },

    #[error("point is not in the open negative chamber")]
    OutsideChamber,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unstable parameter: {0}")]
    UnstableParameter(String),

    #[error("insufficient decay, enlarge T: {0}")]
    InsufficientDecay(String),

    #[error("underdetermined measure: {0}")]
    UnderdeterminedMeasure(String),

    #[error("grid point singular: {0}")]
    SingularGrid(String),

    #[error("hypergeometric evaluation failed for Weyl element {w}: {source}")]
    WeylTerm { w: usize, source: Box<Error> },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
