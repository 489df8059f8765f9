//! Variation-norm estimation as the gauge of a symmetric convex hull.
//!
//! A finite signed combination of atoms doubles as a discrete representing
//! measure; its `ℓ¹` mass is the measure's total variation. The solver in
//! [`solver`] searches the continuum of atoms (grid scan plus local
//! refinement) for a combination matching the target within a residual
//! tolerance; the mass of any such combination is a certified upper bound
//! for the gauge, and dual certificates give lower bounds.

mod solver;

use std::sync::Arc;

pub use solver::{
    quotient_variation_upper, variation_lower, variation_upper, LowerBound, SolverOptions,
};
pub(crate) use solver::{refine_atom, scan_best_atom, GridCache};

use serde::Serialize;

use crate::dictionaries::{relu_k, Atom, Family, RidgeAtom};
use crate::domain::{GridFunction, Quadrature};
use crate::error::Error;
use crate::numfmt::f64_17;
use crate::scalar::Scalar;

/// Finitely many atoms with signed (or complex) coefficients.
///
/// Viewed as the discrete measure `μ = Σ aᵢ δ_{atomᵢ}`, so `‖μ‖` is the
/// `ℓ¹` mass.
#[derive(Clone, Debug)]
pub struct SparseCombination<A: Atom> {
    atoms: Vec<A>,
    coefficients: Vec<A::Value>,
}

impl<A: Atom> SparseCombination<A> {
    pub fn new(atoms: Vec<A>, coefficients: Vec<A::Value>) -> Self {
        assert_eq!(
            atoms.len(),
            coefficients.len(),
            "atom and coefficient counts must match"
        );
        Self {
            atoms,
            coefficients,
        }
    }

    pub fn empty() -> Self {
        Self {
            atoms: Vec::new(),
            coefficients: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[A] {
        &self.atoms
    }

    pub fn coefficients(&self) -> &[A::Value] {
        &self.coefficients
    }

    pub fn push(&mut self, atom: A, coefficient: A::Value) {
        self.atoms.push(atom);
        self.coefficients.push(coefficient);
    }

    /// `Σ |aᵢ|`, the total variation of the discrete measure.
    pub fn l1_mass(&self) -> f64 {
        self.coefficients.iter().map(|c| c.modulus()).sum()
    }

    /// Pointwise evaluation `Σ aᵢ atomᵢ(x)`.
    pub fn eval(&self, x: &[f64]) -> A::Value {
        let mut acc = A::Value::ZERO;
        for (atom, &c) in self.atoms.iter().zip(&self.coefficients) {
            acc += c * atom.eval(x);
        }
        acc
    }

    /// Synthesis on a quadrature: the represented element of `L²(Ω)`.
    pub fn synth(&self, quad: &Arc<Quadrature>) -> GridFunction<A::Value> {
        let mut out = GridFunction::zeros(quad);
        for (atom, &c) in self.atoms.iter().zip(&self.coefficients) {
            out.axpy(c, &atom.to_grid(quad));
        }
        out
    }
}

impl SparseCombination<RidgeAtom> {
    pub fn to_json(&self) -> String {
        let atoms: Vec<String> = self.atoms.iter().map(|a| a.to_json()).collect();
        let coeffs: Vec<String> = self.coefficients.iter().map(|&c| f64_17(c)).collect();
        format!(
            "{{\"family\":\"ridge\",\"atoms\":[{}],\"coefficients\":[{}]}}",
            atoms.join(","),
            coeffs.join(",")
        )
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad JSON: {e}")))?;
        if v["family"] != "ridge" {
            return Err(Error::Config(format!(
                "expected ridge combination, got family {}",
                v["family"]
            )));
        }
        let atoms_v = v["atoms"]
            .as_array()
            .ok_or_else(|| Error::Config("atoms must be an array".into()))?;
        let coeffs_v = v["coefficients"]
            .as_array()
            .ok_or_else(|| Error::Config("coefficients must be an array".into()))?;
        if atoms_v.len() != coeffs_v.len() {
            return Err(Error::Config("atom/coefficient length mismatch".into()));
        }
        let mut atoms = Vec::with_capacity(atoms_v.len());
        for a in atoms_v {
            let k = a["k"]
                .as_u64()
                .ok_or_else(|| Error::Config("atom k must be an integer".into()))?
                as u32;
            let omega: Option<Vec<f64>> = a["omega"]
                .as_array()
                .map(|ws| ws.iter().filter_map(|w| w.as_f64()).collect());
            let omega = omega.ok_or_else(|| Error::Config("atom omega must be numbers".into()))?;
            let b = a["b"]
                .as_f64()
                .ok_or_else(|| Error::Config("atom b must be a number".into()))?;
            atoms.push(RidgeAtom::new(k, omega, b)?);
        }
        let coefficients: Option<Vec<f64>> = coeffs_v.iter().map(|c| c.as_f64()).collect();
        let coefficients =
            coefficients.ok_or_else(|| Error::Config("coefficients must be numbers".into()))?;
        Ok(Self::new(atoms, coefficients))
    }
}

impl SparseCombination<crate::dictionaries::SpectralAtom> {
    pub fn to_json(&self) -> String {
        let atoms: Vec<String> = self.atoms.iter().map(|a| a.to_json()).collect();
        let coeffs: Vec<String> = self
            .coefficients
            .iter()
            .map(|c| format!("{{\"re\":{},\"im\":{}}}", f64_17(c.re), f64_17(c.im)))
            .collect();
        format!(
            "{{\"family\":\"spectral\",\"atoms\":[{}],\"coefficients\":[{}]}}",
            atoms.join(","),
            coeffs.join(",")
        )
    }
}

/// Free-function spelling of [`SparseCombination::synth`].
pub fn synth<A: Atom>(
    combination: &SparseCombination<A>,
    quad: &Arc<Quadrature>,
) -> GridFunction<A::Value> {
    combination.synth(quad)
}

/// One solver iteration for convergence traces.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub residual: f64,
    pub mass: f64,
}

/// Outcome of a gauge estimation run.
///
/// `upper` is the mass of a combination whose residual meets the tolerance,
/// hence an upper bound on the gauge by construction. When the budget runs
/// out first, `converged` is false and `upper` is only the best-so-far mass,
/// not a valid gauge estimate.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub upper: f64,
    pub residual: f64,
    /// Dual certificate value; 0 when no certificate was supplied.
    pub lower: f64,
    pub iterations: usize,
    pub atom_count: usize,
    pub wall_time_secs: f64,
    pub converged: bool,
    pub epsilon: f64,
    pub trace: Vec<TraceRow>,
}

impl EstimateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One CSV row per solver iteration.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,residual,mass\n");
        for row in &self.trace {
            out.push_str(&format!(
                "{},{},{}\n",
                row.iteration,
                f64_17(row.residual),
                f64_17(row.mass)
            ));
        }
        out
    }
}

/// Output of [`radon_style_synthesis`]: the represented function split into
/// the part carried by in-window offsets and the polynomial carried by
/// out-of-window offsets.
pub struct RadonSynthesis {
    pub total: GridFunction<f64>,
    pub in_range: GridFunction<f64>,
    pub polynomial: GridFunction<f64>,
    pub in_range_mass: f64,
    pub out_of_range_mass: f64,
}

/// Evaluates `(1/k!) Σ aᵢ [σ_k(ωᵢ·x + bᵢ) − (ωᵢ·x + bᵢ)^k]` for a measure on
/// the cylinder with unrestricted offsets.
///
/// An offset below the window makes the bracket `−(ω·x + b)^k` (a
/// polynomial on `Ω`); an offset above makes it vanish identically. Either
/// way the out-of-window atoms contribute only a degree-`k` polynomial, so
/// the in-window part determines the function modulo polynomials.
pub fn radon_style_synthesis(
    measure: &SparseCombination<RidgeAtom>,
    k: u32,
    c1: f64,
    c2: f64,
    quad: &Arc<Quadrature>,
) -> RadonSynthesis {
    let k_factorial: f64 = (1..=k.max(1)).map(|i| i as f64).product();
    let mut in_range = GridFunction::zeros(quad);
    let mut polynomial = GridFunction::zeros(quad);
    let mut in_mass = 0.0;
    let mut out_mass = 0.0;
    for (atom, &a) in measure.atoms().iter().zip(measure.coefficients()) {
        let scale = a / k_factorial;
        let bracket = GridFunction::from_values(
            quad,
            quad.nodes_iter()
                .map(|x| {
                    let t = atom
                        .omega()
                        .iter()
                        .zip(x)
                        .map(|(&w, &v)| w * v)
                        .sum::<f64>()
                        + atom.b();
                    relu_k(t, k) - t.powi(k as i32)
                })
                .collect(),
        );
        if atom.b() >= c1 && atom.b() <= c2 {
            in_range.axpy(scale, &bracket);
            in_mass += a.abs();
        } else {
            polynomial.axpy(scale, &bracket);
            out_mass += a.abs();
        }
    }
    let total = in_range.add(&polynomial);
    RadonSynthesis {
        total,
        in_range,
        polynomial,
        in_range_mass: in_mass,
        out_of_range_mass: out_mass,
    }
}

/// Checks the converse direction of the `n^{-1/2}` sampling theorem: a limit
/// of combinations with masses below `mass_bound` has gauge at most
/// `mass_bound`.
///
/// The last synthesis must sit within `convergence_tol` of `f`; the solver
/// estimate is then required to stay below `mass_bound` times the hull
/// safety factor. Returns `mass_bound` when everything holds.
pub fn converse_maurey_check<F: Family>(
    sequence: &[SparseCombination<F::A>],
    f: &GridFunction<<F::A as Atom>::Value>,
    family: &F,
    mass_bound: f64,
    convergence_tol: f64,
    options: &SolverOptions,
) -> Result<f64, Error> {
    if sequence.is_empty() {
        return Err(Error::NonConvergent {
            last: f64::INFINITY,
            tol: convergence_tol,
        });
    }
    for c in sequence {
        let mass = c.l1_mass();
        if mass > mass_bound * (1.0 + 1e-12) {
            return Err(Error::MassBoundExceeded {
                upper: mass,
                bound: mass_bound,
            });
        }
    }
    let quad = f.quadrature();
    let last = sequence.last().unwrap().synth(quad).distance(f);
    if !(last <= convergence_tol) {
        return Err(Error::NonConvergent {
            last,
            tol: convergence_tol,
        });
    }
    let (report, _) = variation_upper(f, family, options)?;
    let slack = crate::dictionaries::NORM_BOUND_SAFETY;
    if report.converged && report.upper > mass_bound * slack + 1e-12 {
        return Err(Error::MassBoundExceeded {
            upper: report.upper,
            bound: mass_bound * slack,
        });
    }
    Ok(mass_bound)
}
