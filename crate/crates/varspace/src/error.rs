use thiserror::Error;

/// Errors surfaced by construction and estimation routines.
///
/// Contract violations (mismatched quadratures, length mismatches) panic
/// instead; these variants cover operational failures a caller can act on.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("quadrature request rejected: {0}")]
    QuadratureBudget(String),

    #[error("non-finite sample value {value} at node {node} ({coords:?})")]
    NonFiniteSample {
        node: usize,
        coords: Vec<f64>,
        value: f64,
    },

    #[error("invalid atom: {0}")]
    InvalidAtom(String),

    #[error("empty parameter grid: {0}")]
    EmptyGrid(String),

    #[error("offset window [{c1}, {c2}] rejected: {reason}")]
    OffsetWindow { c1: f64, c2: f64, reason: String },

    #[error("operation requires k = 1, got k = {0}")]
    RequiresK1(u32),

    #[error("dual certificate has zero correlation with the dictionary")]
    ZeroCertificate,

    #[error("input sequence does not converge to the target (last distance {last:e} > {tol:e})")]
    NonConvergent { last: f64, tol: f64 },

    #[error("estimated upper bound {upper} exceeds declared mass bound {bound}")]
    MassBoundExceeded { upper: f64, bound: f64 },

    #[error("zero-mass representation cannot be sampled")]
    ZeroMass,

    #[error("rate fit needs {needed} usable points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("normal-equations solve failed after regularization")]
    GramSolveFailed,

    #[error("profile function: {0}")]
    Profile(String),

    #[error("total-variation refinement did not converge after {0} doublings")]
    TvNonConvergent(usize),

    #[error("boundary node system is ill-conditioned (estimate {cond:e}) for offsets {nodes:?}")]
    IllConditioned { cond: f64, nodes: Vec<f64> },

    #[error("spectral tail bound {tail:e} exceeds {limit:e} of head {head:e}")]
    TailBound { tail: f64, head: f64, limit: f64 },

    #[error("Fourier inversion spot-check failed: max error {0:e}")]
    InversionCheck(f64),

    #[error("oscillatory quadrature did not converge (relative change {0:e})")]
    QuadratureNonConvergent(f64),

    #[error("variation upper bound {upper} exceeds certified value {certified} beyond tolerance")]
    EqualityGap { upper: f64, certified: f64 },

    #[error("solver did not reach the residual tolerance")]
    SolverFailed,

    #[error("{0}")]
    Config(String),
}
