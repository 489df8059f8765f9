//! Variation-space norms for shallow-network dictionaries.
//!
//! A dictionary here is a bounded family of functions in `L²(Ω)` — ridge
//! atoms `σ_k(ω·x + b)`, decaying Fourier modes `(1+|ξ|)^{-s} e^{2πi ξ·x}`,
//! or normalized ReLU units. The variation norm of a target `f` is the
//! gauge of the closed symmetric convex hull of the dictionary: the
//! smallest `ℓ¹` mass of a representation of `f`. This crate estimates that
//! gauge from above by sparse synthesis with conditional-gradient atom
//! selection and from below by dual certificates, and provides the
//! constructions tying the gauge to classical norms:
//!
//! - [`domain`]: box domains, tensor Gauss–Legendre and low-discrepancy
//!   quadrature, grid functions and their `L²` inner products.
//! - [`dictionaries`]: atom families, parameter grids, norm bounds, and the
//!   constructive maps between ReLU units and normalized (Barron) units.
//! - [`varnorm`]: the gauge estimator (upper bounds, dual lower bounds,
//!   quotient norms modulo polynomials, measure-style synthesis).
//! - [`greedy`]: random-sampling compression of representations at the
//!   `n^{-1/2}` rate, orthogonal greedy selection, and rate fitting.
//! - [`onedim`]: the one-dimensional bounded-variation characterization and
//!   the Peano-kernel constructive representation.
//! - [`spectral`]: spectral Barron integrals, Gaussian cutoff
//!   constructions, and the equality experiment against the Fourier
//!   dictionary.
//! - [`targets`]: deterministic built-in targets and benchmark
//!   combinations.

pub mod dictionaries;
pub mod domain;
pub mod error;
pub mod greedy;
pub mod onedim;
pub mod scalar;
pub mod spectral;
pub mod targets;
pub mod varnorm;

pub(crate) mod numfmt;

pub use dictionaries::{
    atom_norm_bound, decompose_barron_atom, embed_ridge_in_barron, gram_rank,
    sigmoid_heaviside_limit, validate_offsets, Atom, BarronAtom, DictionaryConfig, Family,
    OffsetValidation, RidgeAtom, RidgeConfig, SpectralAtom, SpectralConfig,
};
pub use domain::{build_quadrature, BoxDomain, GridFunction, QuadKind, Quadrature};
pub use error::Error;
pub use greedy::{maurey_rate_series, maurey_sample, orthogonal_greedy, rate_fit, RateSeries};
pub use onedim::{
    bv_norm, characterization_norm, equivalence_experiment, peano_synthesis, PiecewisePoly,
    Polynomial, ProfileFunction, SmoothFunction,
};
pub use scalar::Scalar;
pub use spectral::{
    build_cutoff, fs_equality_experiment, gaussian_factor_integral, spectral_barron_norm,
    CutoffReport, DecayEnvelope, FourierPair,
};
pub use varnorm::{
    converse_maurey_check, quotient_variation_upper, radon_style_synthesis, variation_lower,
    variation_upper, EstimateReport, SolverOptions, SparseCombination,
};
