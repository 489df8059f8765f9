//! Parameterized atom families and the constructive maps between them.
//!
//! Three families are provided: ridge atoms `σ_k(ω·x + b)` with unit
//! direction and offset window `[c1, c2]`, decaying Fourier modes
//! `(1+|ξ|)^{-s} e^{2πi ξ·x}`, and normalized ReLU units
//! `(|ω|₁ + |b|)^{-1} σ_1(ω·x + b)` with unconstrained parameters. The
//! ridge and Fourier families carry deterministic parameter grids so the
//! gauge solver can scan and locally refine them; the normalized units are
//! related to the ridge family by explicit decompositions with `ℓ¹` cost at
//! most 4.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::{BoxDomain, GridFunction, Quadrature};
use crate::error::Error;
use crate::numfmt::f64_17;
use crate::scalar::Scalar;
use crate::varnorm::SparseCombination;

/// Grid maxima underestimate suprema over the parameter continuum; reported
/// bounds carry this fixed safety factor.
pub const NORM_BOUND_SAFETY: f64 = 1.05;

/// `σ_k(t) = max(0, t)^k`, with `σ_0` the Heaviside step.
///
/// The tie at `t = 0` is broken upward (`σ_0(0) = 1`, right-continuous);
/// the set has measure zero but a fixed convention keeps pointwise tests
/// deterministic.
#[inline]
pub fn relu_k(t: f64, k: u32) -> f64 {
    if k == 0 {
        return if t >= 0.0 { 1.0 } else { 0.0 };
    }
    if t <= 0.0 {
        0.0
    } else {
        t.powi(k as i32)
    }
}

/// The logistic sigmoid used by the non-closedness demonstration.
#[inline]
pub fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// A single dictionary element with an evaluation rule.
pub trait Atom: Clone + Send + Sync + 'static {
    type Value: Scalar;

    fn eval(&self, x: &[f64]) -> Self::Value;

    fn to_grid(&self, quad: &Arc<Quadrature>) -> GridFunction<Self::Value> {
        let values = quad.nodes_iter().map(|x| self.eval(x)).collect();
        GridFunction::from_values(quad, values)
    }
}

/// Ridge atom `σ_k(ω·x + b)` with `ω ∈ S^{d-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeAtom {
    k: u32,
    omega: Vec<f64>,
    b: f64,
}

impl RidgeAtom {
    /// Normalizes the direction; rejects a zero direction.
    pub fn new(k: u32, omega: Vec<f64>, b: f64) -> Result<Self, Error> {
        let norm = omega.iter().map(|w| w * w).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::InvalidAtom("ridge direction must be nonzero".into()));
        }
        let omega = omega.into_iter().map(|w| w / norm).collect();
        Ok(Self { k, omega, b })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn to_json(&self) -> String {
        let omega: Vec<String> = self.omega.iter().map(|&w| f64_17(w)).collect();
        format!(
            "{{\"family\":\"ridge\",\"k\":{},\"omega\":[{}],\"b\":{}}}",
            self.k,
            omega.join(","),
            f64_17(self.b)
        )
    }
}

impl Atom for RidgeAtom {
    type Value = f64;

    #[inline]
    fn eval(&self, x: &[f64]) -> f64 {
        let t = self.omega.iter().zip(x).map(|(&w, &v)| w * v).sum::<f64>() + self.b;
        relu_k(t, self.k)
    }
}

/// Fourier mode `(1+|ξ|)^{-s} e^{2πi ξ·x}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralAtom {
    s: f64,
    xi: Vec<f64>,
}

impl SpectralAtom {
    pub fn new(s: f64, xi: Vec<f64>) -> Result<Self, Error> {
        if s < 0.0 || !s.is_finite() || xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidAtom("spectral atom needs finite xi, s >= 0".into()));
        }
        Ok(Self { s, xi })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn amplitude(&self) -> f64 {
        let r = self.xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        (1.0 + r).powf(-self.s)
    }

    pub fn to_json(&self) -> String {
        let xi: Vec<String> = self.xi.iter().map(|&v| f64_17(v)).collect();
        format!(
            "{{\"family\":\"spectral\",\"s\":{},\"xi\":[{}]}}",
            f64_17(self.s),
            xi.join(",")
        )
    }
}

impl Atom for SpectralAtom {
    type Value = Complex64;

    #[inline]
    fn eval(&self, x: &[f64]) -> Complex64 {
        let phase = 2.0 * PI * self.xi.iter().zip(x).map(|(&v, &p)| v * p).sum::<f64>();
        Complex64::from_polar(self.amplitude(), phase)
    }
}

/// Normalized ReLU unit `(|ω|₁ + |b|)^{-1} σ_1(ω·x + b)`, `(ω, b) ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BarronAtom {
    omega: Vec<f64>,
    b: f64,
}

impl BarronAtom {
    pub fn new(omega: Vec<f64>, b: f64) -> Result<Self, Error> {
        let scale = omega.iter().map(|w| w.abs()).sum::<f64>() + b.abs();
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::InvalidAtom(
                "normalized unit needs (omega, b) != (0, 0)".into(),
            ));
        }
        Ok(Self { omega, b })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `|ω|₁ + |b|`, the normalizer.
    pub fn scale(&self) -> f64 {
        self.omega.iter().map(|w| w.abs()).sum::<f64>() + self.b.abs()
    }

    pub fn to_json(&self) -> String {
        let omega: Vec<String> = self.omega.iter().map(|&w| f64_17(w)).collect();
        format!(
            "{{\"family\":\"barron\",\"omega\":[{}],\"b\":{}}}",
            omega.join(","),
            f64_17(self.b)
        )
    }
}

impl Atom for BarronAtom {
    type Value = f64;

    #[inline]
    fn eval(&self, x: &[f64]) -> f64 {
        let t = self.omega.iter().zip(x).map(|(&w, &v)| w * v).sum::<f64>() + self.b;
        relu_k(t, 1) / self.scale()
    }
}

/// Margins of the offset window against the extreme values of `x·ω`.
#[derive(Clone, Debug)]
pub struct OffsetValidation {
    pub pass: bool,
    /// `inf { x·ω : x ∈ Ω, ω ∈ S^{d-1} }`, equal to `-max_x |x|₂` for a box.
    pub inf_dot: f64,
    pub sup_dot: f64,
    /// `inf_dot - c1`; positive when the lower inequality is strict.
    pub lo_margin: f64,
    /// `c2 - sup_dot`.
    pub hi_margin: f64,
}

/// Checks `c1 < inf { x·ω } <= sup { x·ω } < c2` exactly for a box domain.
pub fn validate_offsets(domain: &BoxDomain, c1: f64, c2: f64) -> OffsetValidation {
    let sup = domain.max_point_norm();
    let inf = -sup;
    OffsetValidation {
        pass: c1 < inf && sup < c2,
        inf_dot: inf,
        sup_dot: sup,
        lo_margin: inf - c1,
        hi_margin: c2 - sup,
    }
}

/// A dictionary family the gauge solver can scan and refine: a deterministic
/// parameter grid, plus a flat parameter chart for gradient-free refinement.
pub trait Family: Send + Sync {
    type A: Atom;

    fn domain(&self) -> &BoxDomain;
    fn grid_atoms(&self) -> Result<Vec<Self::A>, Error>;
    /// Flat parameter vector of an atom (chart used by compass search).
    fn params(&self, atom: &Self::A) -> Vec<f64>;
    /// Rebuild an atom from perturbed parameters, applying the family's
    /// projection (sphere normalization, offset clamping). `None` when the
    /// parameters cannot be projected onto the family.
    fn atom_from_params(&self, p: &[f64]) -> Option<Self::A>;
    /// Initial compass-search step per parameter, on the order of the grid
    /// spacing.
    fn param_steps(&self) -> Vec<f64>;
}

/// Configuration of a ridge dictionary `P_k` over a box domain.
#[derive(Clone, Debug)]
pub struct RidgeConfig {
    pub domain: BoxDomain,
    pub k: u32,
    pub c1: f64,
    pub c2: f64,
    /// Requested direction count; rounded up to the next even number so the
    /// grid is closed under `ω → -ω` (d = 1 always uses both of ±1).
    pub directions: usize,
    pub offsets: usize,
}

impl RidgeConfig {
    pub fn new(
        domain: BoxDomain,
        k: u32,
        c1: f64,
        c2: f64,
        directions: usize,
        offsets: usize,
    ) -> Result<Self, Error> {
        let check = validate_offsets(&domain, c1, c2);
        if !check.pass {
            return Err(Error::OffsetWindow {
                c1,
                c2,
                reason: format!(
                    "need c1 < {} and {} < c2 strictly",
                    check.inf_dot, check.sup_dot
                ),
            });
        }
        if directions == 0 || offsets == 0 {
            return Err(Error::EmptyGrid(
                "direction and offset counts must be positive".into(),
            ));
        }
        Ok(Self {
            domain,
            k,
            c1,
            c2,
            directions,
            offsets,
        })
    }

    fn offset_values(&self) -> Vec<f64> {
        if self.offsets == 1 {
            return vec![0.5 * (self.c1 + self.c2)];
        }
        let step = (self.c2 - self.c1) / (self.offsets - 1) as f64;
        (0..self.offsets)
            .map(|i| self.c1 + step * i as f64)
            .collect()
    }

    fn offset_spacing(&self) -> f64 {
        if self.offsets <= 1 {
            0.5 * (self.c2 - self.c1)
        } else {
            (self.c2 - self.c1) / (self.offsets - 1) as f64
        }
    }
}

impl Family for RidgeConfig {
    type A = RidgeAtom;

    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn grid_atoms(&self) -> Result<Vec<RidgeAtom>, Error> {
        let dirs = sphere_directions(self.domain.dim(), self.directions);
        let offsets = self.offset_values();
        let mut atoms = Vec::with_capacity(dirs.len() * offsets.len());
        for dir in &dirs {
            for &b in &offsets {
                atoms.push(RidgeAtom {
                    k: self.k,
                    omega: dir.clone(),
                    b,
                });
            }
        }
        if atoms.is_empty() {
            return Err(Error::EmptyGrid("ridge grid came out empty".into()));
        }
        Ok(atoms)
    }

    fn params(&self, atom: &RidgeAtom) -> Vec<f64> {
        let mut p = atom.omega.clone();
        p.push(atom.b);
        p
    }

    fn atom_from_params(&self, p: &[f64]) -> Option<RidgeAtom> {
        let d = self.domain.dim();
        let omega = &p[..d];
        let norm = omega.iter().map(|w| w * w).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return None;
        }
        let omega = omega.iter().map(|w| w / norm).collect();
        let b = p[d].clamp(self.c1, self.c2);
        Some(RidgeAtom {
            k: self.k,
            omega,
            b,
        })
    }

    fn param_steps(&self) -> Vec<f64> {
        let d = self.domain.dim();
        let angular = if d == 1 {
            0.0
        } else {
            PI / self.directions.div_ceil(2).max(1) as f64
        };
        let mut steps = vec![angular; d];
        steps.push(self.offset_spacing());
        steps
    }
}

/// Configuration of a spectral dictionary `F_s` with a `ξ`-lattice grid.
#[derive(Clone, Debug)]
pub struct SpectralConfig {
    pub domain: BoxDomain,
    pub s: f64,
    pub xi_step: f64,
    pub xi_radius: f64,
}

impl SpectralConfig {
    pub fn new(domain: BoxDomain, s: f64, xi_step: f64, xi_radius: f64) -> Result<Self, Error> {
        if s < 0.0 || xi_step <= 0.0 || xi_radius < 0.0 {
            return Err(Error::Config(
                "spectral grid needs s >= 0, xi_step > 0, xi_radius >= 0".into(),
            ));
        }
        Ok(Self {
            domain,
            s,
            xi_step,
            xi_radius,
        })
    }
}

impl Family for SpectralConfig {
    type A = SpectralAtom;

    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn grid_atoms(&self) -> Result<Vec<SpectralAtom>, Error> {
        let d = self.domain.dim();
        let kmax = (self.xi_radius / self.xi_step + 1e-9).floor() as i64;
        let r2 = (self.xi_radius * (1.0 + 1e-12)).powi(2);
        let mut atoms = Vec::new();
        let mut idx = vec![-kmax; d];
        'outer: loop {
            let xi: Vec<f64> = idx.iter().map(|&i| i as f64 * self.xi_step).collect();
            if xi.iter().map(|v| v * v).sum::<f64>() <= r2 + 1e-12 {
                atoms.push(SpectralAtom { s: self.s, xi });
            }
            for ax in (0..d).rev() {
                idx[ax] += 1;
                if idx[ax] <= kmax {
                    continue 'outer;
                }
                idx[ax] = -kmax;
            }
            break;
        }
        if atoms.is_empty() {
            return Err(Error::EmptyGrid("xi lattice came out empty".into()));
        }
        Ok(atoms)
    }

    fn params(&self, atom: &SpectralAtom) -> Vec<f64> {
        atom.xi.clone()
    }

    fn atom_from_params(&self, p: &[f64]) -> Option<SpectralAtom> {
        Some(SpectralAtom {
            s: self.s,
            xi: p.to_vec(),
        })
    }

    fn param_steps(&self) -> Vec<f64> {
        vec![self.xi_step; self.domain.dim()]
    }
}

/// Family tag plus grid specification, as read from run configurations.
#[derive(Clone, Debug)]
pub enum DictionaryConfig {
    Ridge(RidgeConfig),
    Spectral(SpectralConfig),
}

impl DictionaryConfig {
    pub fn domain(&self) -> &BoxDomain {
        match self {
            DictionaryConfig::Ridge(c) => &c.domain,
            DictionaryConfig::Spectral(c) => &c.domain,
        }
    }

    /// Largest atom norm over the parameter grid times the safety factor.
    pub fn atom_norm_bound(&self, quad: &Arc<Quadrature>) -> f64 {
        match self {
            DictionaryConfig::Ridge(c) => atom_norm_bound(c, quad),
            DictionaryConfig::Spectral(c) => atom_norm_bound(c, quad),
        }
    }
}

/// `sup_h ‖h‖_{L²}` over the configured grid, inflated by
/// [`NORM_BOUND_SAFETY`] to cover the continuum.
pub fn atom_norm_bound<F: Family>(family: &F, quad: &Arc<Quadrature>) -> f64 {
    let atoms = family
        .grid_atoms()
        .expect("norm bound needs a nonempty grid");
    let max = atoms
        .iter()
        .map(|a| a.to_grid(quad).norm_l2())
        .fold(0.0f64, f64::max);
    max * NORM_BOUND_SAFETY
}

fn sphere_directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    match d {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => {
            let m = count.div_ceil(2).max(1);
            let mut dirs = Vec::with_capacity(2 * m);
            for j in 0..m {
                let theta = PI * j as f64 / m as f64;
                dirs.push(vec![theta.cos(), theta.sin()]);
            }
            for j in 0..m {
                let theta = PI * j as f64 / m as f64;
                dirs.push(vec![-theta.cos(), -theta.sin()]);
            }
            dirs
        }
        3 => {
            let m = count.div_ceil(2).max(1);
            let golden = PI * (3.0 - 5.0_f64.sqrt());
            let mut dirs = Vec::with_capacity(2 * m);
            for i in 0..m {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * i as f64;
                dirs.push(vec![r * phi.cos(), r * phi.sin(), z]);
            }
            for i in 0..m {
                let v = dirs[i].clone();
                dirs.push(v.into_iter().map(|c| -c).collect());
            }
            dirs
        }
        _ => {
            // Deterministic low-discrepancy directions: inverse-normal map
            // of Halton points, normalized, with antipodal closure.
            let m = count.div_ceil(2).max(1);
            let mut dirs = Vec::with_capacity(2 * m);
            let mut index = 1u64;
            while dirs.len() < m {
                let mut v: Vec<f64> = (0..d)
                    .map(|ax| inv_norm_cdf(halton(index, ax)))
                    .collect();
                index += 1;
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm < 1e-8 {
                    continue;
                }
                v.iter_mut().for_each(|c| *c /= norm);
                dirs.push(v);
            }
            for i in 0..m {
                let v = dirs[i].clone();
                dirs.push(v.into_iter().map(|c| -c).collect());
            }
            dirs
        }
    }
}

fn halton(index: u64, axis: usize) -> f64 {
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    let base = PRIMES[axis % PRIMES.len()];
    let mut inv = 0.0;
    let mut denom = 1.0;
    let mut i = index;
    while i > 0 {
        denom *= base as f64;
        inv += (i % base) as f64 / denom;
        i /= base;
    }
    inv
}

/// Acklam's rational approximation of the standard normal quantile,
/// accurate to ~1e-9 over (0, 1).
fn inv_norm_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Rewrites a normalized ReLU unit as a short ridge combination that
/// reproduces it exactly on `Ω`, with `ℓ¹` mass at most 4.
///
/// Writing `u = ω/|ω|₂` and `β = b/|ω|₂`: a unit whose hyperplane meets the
/// offset window becomes the single atom `(u, β)`; one active nowhere on
/// `Ω` becomes the empty combination; one affine on `Ω` splits into the
/// direction pair `σ_1(u·x) - σ_1(-u·x)` plus a constant built from the two
/// top offsets `c2` and `c2 - 1` (which stay in range by the required unit
/// slack). A pure-offset unit uses the constant pair alone.
pub fn decompose_barron_atom(
    atom: &BarronAtom,
    domain: &BoxDomain,
    c1: f64,
    c2: f64,
) -> Result<SparseCombination<RidgeAtom>, Error> {
    let check = validate_offsets(domain, c1, c2);
    if !check.pass {
        return Err(Error::OffsetWindow {
            c1,
            c2,
            reason: "offset window does not enclose the support interval".into(),
        });
    }
    if c2 <= check.sup_dot + 1.0 {
        return Err(Error::OffsetWindow {
            c1,
            c2,
            reason: format!(
                "constant pair needs c2 > sup(x.w) + 1 = {}",
                check.sup_dot + 1.0
            ),
        });
    }
    let d = domain.dim();
    let scale = atom.scale();
    let omega_norm = atom.omega.iter().map(|w| w * w).sum::<f64>().sqrt();

    let constant_pair = |amount: f64, dir: Vec<f64>| -> Vec<(RidgeAtom, f64)> {
        vec![
            (
                RidgeAtom {
                    k: 1,
                    omega: dir.clone(),
                    b: c2,
                },
                amount,
            ),
            (
                RidgeAtom {
                    k: 1,
                    omega: dir,
                    b: c2 - 1.0,
                },
                -amount,
            ),
        ]
    };

    let mut terms: Vec<(RidgeAtom, f64)> = Vec::new();
    if omega_norm < 1e-300 {
        // Pure offset: the unit is the constant sign(b)_+ after scaling.
        if atom.b > 0.0 {
            let mut e1 = vec![0.0; d];
            e1[0] = 1.0;
            terms = constant_pair(atom.b / scale, e1);
        }
    } else {
        let u: Vec<f64> = atom.omega.iter().map(|w| w / omega_norm).collect();
        let beta = atom.b / omega_norm;
        let coeff = omega_norm / scale;
        if beta < c1 {
            // sigma_1(u.x + beta) vanishes on the whole domain.
        } else if beta <= c2 {
            terms.push((
                RidgeAtom {
                    k: 1,
                    omega: u,
                    b: beta,
                },
                coeff,
            ));
        } else {
            // Affine on the domain: u.x + beta > 0 everywhere.
            let neg_u: Vec<f64> = u.iter().map(|w| -w).collect();
            terms.push((
                RidgeAtom {
                    k: 1,
                    omega: u.clone(),
                    b: 0.0,
                },
                coeff,
            ));
            terms.push((
                RidgeAtom {
                    k: 1,
                    omega: neg_u,
                    b: 0.0,
                },
                -coeff,
            ));
            terms.extend(constant_pair(coeff * beta, u));
        }
    }
    let (atoms, coefficients) = terms.into_iter().unzip();
    Ok(SparseCombination::new(atoms, coefficients))
}

/// Embeds a ReLU ridge atom into the normalized-unit family: returns the
/// unit with the same parameters and the coefficient `|ω|₁ + |b|`, bounded
/// by `√d + max(|c1|, |c2|)`.
pub fn embed_ridge_in_barron(atom: &RidgeAtom) -> Result<(BarronAtom, f64), Error> {
    if atom.k != 1 {
        return Err(Error::RequiresK1(atom.k));
    }
    let coeff = atom.omega.iter().map(|w| w.abs()).sum::<f64>() + atom.b.abs();
    let unit = BarronAtom::new(atom.omega.clone(), atom.b)?;
    Ok((unit, coeff))
}

/// Numerical rank of the Gram matrix `[⟨a_i, a_j⟩]`: the number of
/// eigenvalues above `tol` times the largest.
///
/// Polynomial activations collapse the rank to the dimension of the spanned
/// polynomial space; genuine ridge families keep it growing with the atom
/// count.
pub fn gram_rank<S: Scalar>(atoms: &[GridFunction<S>], tol: f64) -> usize {
    assert!(!atoms.is_empty(), "gram_rank needs at least one atom");
    let m = atoms.len();
    // Hermitian Gram embedded as the real symmetric [[A, -B], [B, A]];
    // every eigenvalue of the Gram shows up exactly twice.
    let mut e = nalgebra::DMatrix::<f64>::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in i..m {
            let g = atoms[i].inner(&atoms[j]);
            let (re, im) = (g.re(), g.im());
            e[(i, j)] = re;
            e[(j, i)] = re;
            e[(m + i, m + j)] = re;
            e[(m + j, m + i)] = re;
            e[(i, m + j)] = -im;
            e[(m + j, i)] = -im;
            e[(m + i, j)] = im;
            e[(j, m + i)] = im;
        }
    }
    let eigen = e.symmetric_eigenvalues();
    let max = eigen.iter().fold(0.0f64, |a, &b| a.max(b));
    if max <= 0.0 {
        return 0;
    }
    let count = eigen.iter().filter(|&&l| l > tol * max).count();
    count / 2
}

/// `‖σ_0(x_1) - logistic(r x_1)‖_{L²(Ω)}` for each requested steepness.
///
/// The distances decrease toward zero as `r` grows, which is what places a
/// discontinuous step in the closed hull of a smooth sigmoid family even
/// though no representing measure exists for it.
pub fn sigmoid_heaviside_limit(rs: &[f64], quad: &Arc<Quadrature>) -> Vec<f64> {
    let step = GridFunction::sample(quad, |x| relu_k(x[0], 0)).expect("step is finite");
    rs.iter()
        .map(|&r| {
            let smooth = GridFunction::sample(quad, |x| logistic(r * x[0])).expect("finite");
            step.distance(&smooth)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_quadrature, QuadKind};
    use approx::assert_relative_eq;

    fn unit_interval_quad(level: u32) -> Arc<Quadrature> {
        build_quadrature(
            &BoxDomain::symmetric_cube(1),
            level,
            QuadKind::TensorGauss,
        )
        .unwrap()
    }

    #[test]
    fn ridge_eval_examples() {
        let a = RidgeAtom::new(1, vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(a.eval(&[0.5, 9.0]), 0.5);
        let b = RidgeAtom::new(2, vec![1.0], 1.0).unwrap();
        assert_eq!(b.eval(&[-2.0]), 0.0);
        let h = RidgeAtom::new(0, vec![1.0], 0.0).unwrap();
        assert_eq!(h.eval(&[0.0]), 1.0);
        assert_eq!(h.eval(&[-1e-12]), 0.0);
    }

    #[test]
    fn spectral_eval_examples() {
        let flat = SpectralAtom::new(0.0, vec![0.0]).unwrap();
        assert_eq!(flat.eval(&[0.3]), Complex64::new(1.0, 0.0));
        let damped = SpectralAtom::new(1.0, vec![1.0]).unwrap();
        assert_relative_eq!(damped.eval(&[0.0]).re, 0.5, max_relative = 1e-14);
        let mode = SpectralAtom::new(0.0, vec![1.0, 0.0]).unwrap();
        let v = mode.eval(&[0.5, 2.0]);
        assert_relative_eq!(v.re, -1.0, max_relative = 1e-12);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn barron_eval_examples() {
        let a = BarronAtom::new(vec![1.0], 0.0).unwrap();
        assert_eq!(a.eval(&[1.0]), 1.0);
        let c = BarronAtom::new(vec![0.0], 1.0).unwrap();
        assert_eq!(c.eval(&[-0.7]), 1.0);
        let scaled = BarronAtom::new(vec![2.0], 0.0).unwrap();
        assert_eq!(scaled.eval(&[1.0]), 1.0);
        assert!(BarronAtom::new(vec![0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn barron_homogeneity_absorption() {
        // (omega, b) -> (c omega, c b) leaves the unit unchanged pointwise.
        let base = BarronAtom::new(vec![0.7, -0.4], 0.3).unwrap();
        for c in [0.25, 2.0, 17.0] {
            let scaled =
                BarronAtom::new(vec![0.7 * c, -0.4 * c], 0.3 * c).unwrap();
            for x in [[-1.0, -1.0], [0.2, -0.8], [1.0, 1.0], [0.0, 0.0]] {
                assert_relative_eq!(base.eval(&x), scaled.eval(&x), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn offset_validation_examples() {
        let line = BoxDomain::symmetric_cube(1);
        assert!(validate_offsets(&line, -2.0, 2.0).pass);
        let square = BoxDomain::symmetric_cube(2);
        let v = validate_offsets(&square, -1.0, 2.0);
        assert!(!v.pass);
        assert_relative_eq!(v.inf_dot, -2.0f64.sqrt(), max_relative = 1e-14);
        // Boundary is not strict.
        assert!(!validate_offsets(&line, -1.0, 2.0).pass);
    }

    #[test]
    fn grid_counts() {
        let line = BoxDomain::symmetric_cube(1);
        let cfg = RidgeConfig::new(line, 1, -2.0, 2.0, 7, 5).unwrap();
        let atoms = cfg.grid_atoms().unwrap();
        // S^0 has exactly the two signs.
        assert_eq!(atoms.len(), 10);
        assert!(atoms.iter().all(|a| a.omega()[0].abs() == 1.0));

        let square = BoxDomain::symmetric_cube(2);
        let cfg = RidgeConfig::new(square, 1, -2.0, 2.0, 8, 5).unwrap();
        assert_eq!(cfg.grid_atoms().unwrap().len(), 40);

        let line = BoxDomain::symmetric_cube(1);
        let fs = SpectralConfig::new(line, 0.0, 0.5, 2.0).unwrap();
        let lattice = fs.grid_atoms().unwrap();
        assert_eq!(lattice.len(), 9);
        assert_eq!(lattice[0].xi()[0], -2.0);
        assert_eq!(lattice[8].xi()[0], 2.0);
    }

    #[test]
    fn grid_is_antipodally_closed() {
        for (d, count) in [(2usize, 6usize), (3, 10), (4, 8)] {
            let dirs = sphere_directions(d, count);
            for dir in &dirs {
                let neg: Vec<f64> = dir.iter().map(|c| -c).collect();
                let found = dirs.iter().any(|o| {
                    o.iter()
                        .zip(&neg)
                        .all(|(&a, &b)| (a - b).abs() < 1e-12)
                });
                assert!(found, "missing antipode in d={d}");
                assert_relative_eq!(
                    dir.iter().map(|c| c * c).sum::<f64>(),
                    1.0,
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn norm_bound_spectral_is_volume_root() {
        let line = BoxDomain::symmetric_cube(1);
        let quad = build_quadrature(&line, 16, QuadKind::TensorGauss).unwrap();
        let fs = SpectralConfig::new(line, 1.0, 0.5, 2.0).unwrap();
        let bound = atom_norm_bound(&fs, &quad);
        let vol_root = 2.0f64.sqrt();
        assert!(bound >= vol_root - 1e-10);
        assert!(bound <= vol_root * NORM_BOUND_SAFETY + 1e-10);
    }

    #[test]
    fn norm_bound_heaviside_family() {
        let line = BoxDomain::symmetric_cube(1);
        let quad = unit_interval_quad(16);
        let cfg = RidgeConfig::new(line, 0, -2.0, 2.0, 2, 21).unwrap();
        let bound = atom_norm_bound(&cfg, &quad);
        assert!(bound <= 2.0f64.sqrt() * NORM_BOUND_SAFETY + 1e-10);
    }

    #[test]
    fn norm_bound_p1_matches_integration_oracle() {
        // Closed form for ||sigma_1(x + b)||^2 on [-1, 1]:
        // (1+b)^3/3 for |b| <= 1, ((1+b)^3 - (b-1)^3)/3 for b >= 1, 0 below.
        let closed_form = |b: f64| -> f64 {
            if b <= -1.0 {
                0.0
            } else if b < 1.0 {
                (1.0 + b).powi(3) / 3.0
            } else {
                ((1.0 + b).powi(3) - (b - 1.0).powi(3)) / 3.0
            }
        };
        let line = BoxDomain::symmetric_cube(1);
        let quad = unit_interval_quad(48);
        let cfg = RidgeConfig::new(line, 1, -3.0, 3.0, 2, 61).unwrap();
        let bound = atom_norm_bound(&cfg, &quad);
        let sup = closed_form(3.0).sqrt();
        assert!(bound >= sup * 0.999);
        assert!(bound <= sup * NORM_BOUND_SAFETY * 1.001);
        // Every grid atom stays below the reported bound.
        for atom in cfg.grid_atoms().unwrap() {
            assert!(atom.to_grid(&quad).norm_l2() <= bound + 1e-12);
        }
    }

    fn dense_sample(domain: &BoxDomain, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|j| {
                (0..domain.dim())
                    .map(|ax| {
                        let u = halton(j as u64 + 1, ax);
                        domain.lo()[ax] + u * (domain.hi()[ax] - domain.lo()[ax])
                    })
                    .collect()
            })
            .collect()
    }

    fn check_decomposition(atom: &BarronAtom, domain: &BoxDomain, c1: f64, c2: f64) -> f64 {
        let comb = decompose_barron_atom(atom, domain, c1, c2).unwrap();
        assert!(comb.l1_mass() <= 4.0 + 1e-12, "mass {}", comb.l1_mass());
        let mut worst = 0.0f64;
        for x in dense_sample(domain, 400) {
            let direct = atom.eval(&x);
            let rebuilt: f64 = comb
                .atoms()
                .iter()
                .zip(comb.coefficients())
                .map(|(a, &c)| c * a.eval(&x))
                .sum();
            worst = worst.max((direct - rebuilt).abs());
        }
        worst
    }

    #[test]
    fn decompose_single_atom_case() {
        let domain = BoxDomain::symmetric_cube(1);
        let atom = BarronAtom::new(vec![1.0], 0.0).unwrap();
        let comb = decompose_barron_atom(&atom, &domain, -2.0, 3.0).unwrap();
        assert_eq!(comb.len(), 1);
        assert_relative_eq!(comb.coefficients()[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(comb.l1_mass(), 1.0, max_relative = 1e-14);
        assert!(check_decomposition(&atom, &domain, -2.0, 3.0) < 1e-14);
    }

    #[test]
    fn decompose_vanishing_case() {
        let domain = BoxDomain::symmetric_cube(1);
        let atom = BarronAtom::new(vec![1.0], -3.0).unwrap();
        let comb = decompose_barron_atom(&atom, &domain, -2.0, 3.0).unwrap();
        assert!(comb.is_empty());
    }

    #[test]
    fn decompose_affine_case() {
        let domain = BoxDomain::symmetric_cube(1);
        // b/|omega| = 6 lies above c2 = 5, so the affine split kicks in.
        let atom = BarronAtom::new(vec![1.0], 6.0).unwrap();
        let comb = decompose_barron_atom(&atom, &domain, -2.0, 5.0).unwrap();
        assert_eq!(comb.len(), 4);
        assert!(comb.l1_mass() <= 4.0 + 1e-12);
        assert!(check_decomposition(&atom, &domain, -2.0, 5.0) < 1e-12);
    }

    #[test]
    fn decompose_requires_unit_slack() {
        let domain = BoxDomain::symmetric_cube(1);
        let atom = BarronAtom::new(vec![1.0], 0.0).unwrap();
        // sup + 1 = 2 is not strictly below c2 = 1.5.
        assert!(decompose_barron_atom(&atom, &domain, -2.0, 1.5).is_err());
    }

    #[test]
    fn embed_examples() {
        let a = RidgeAtom::new(1, vec![1.0], 0.0).unwrap();
        let (_, coeff) = embed_ridge_in_barron(&a).unwrap();
        assert_relative_eq!(coeff, 1.0, max_relative = 1e-14);

        let a = RidgeAtom::new(1, vec![0.5, 0.5, 0.5, 0.5], 1.0).unwrap();
        let (unit, coeff) = embed_ridge_in_barron(&a).unwrap();
        assert_relative_eq!(coeff, 3.0, max_relative = 1e-12);
        // coefficient * unit reproduces the ridge atom.
        for x in dense_sample(&BoxDomain::symmetric_cube(4), 64) {
            assert_relative_eq!(coeff * unit.eval(&x), a.eval(&x), epsilon = 1e-12);
        }

        let k2 = RidgeAtom::new(2, vec![1.0], 0.0).unwrap();
        assert!(embed_ridge_in_barron(&k2).is_err());
    }

    #[test]
    fn gram_rank_single_atom() {
        let quad = unit_interval_quad(8);
        let a = RidgeAtom::new(1, vec![1.0], 0.5).unwrap();
        assert_eq!(gram_rank(&[a.to_grid(&quad)], 1e-8), 1);
    }

    #[test]
    fn gram_rank_orthogonal_modes() {
        // Lattice exponentials with step 0.5 are orthogonal on [-1, 1];
        // the first 2^m Halton points in base 2 make the quadrature sums
        // exact, so the Gram is a scaled identity.
        let line = BoxDomain::symmetric_cube(1);
        let quad = build_quadrature(&line, 12, QuadKind::Qmc).unwrap();
        let atoms: Vec<GridFunction<Complex64>> = (0..50)
            .map(|j| {
                let xi = -12.0 + 0.5 * j as f64;
                SpectralAtom::new(0.0, vec![xi]).unwrap().to_grid(&quad)
            })
            .collect();
        for i in [0usize, 7, 23] {
            for j in [1usize, 11, 40] {
                let g = atoms[i].inner(&atoms[j]);
                if i == j {
                    assert_relative_eq!(g.re, 2.0, max_relative = 1e-10);
                } else {
                    assert!(g.norm() < 1e-9, "off-diagonal {i},{j}: {g}");
                }
            }
        }
        assert_eq!(gram_rank(&atoms, 1e-6), 50);
    }

    #[test]
    fn gram_rank_polynomial_activation_degenerates() {
        // sigma(x) = x^2 spans at most the six monomials of degree <= 2 in
        // two variables. Oracle: project each atom on that basis and check
        // the residual vanishes.
        use rand::Rng;
        use rand::SeedableRng;
        let square = BoxDomain::symmetric_cube(2);
        let quad = build_quadrature(&square, 12, QuadKind::TensorGauss).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let atoms: Vec<GridFunction<f64>> = (0..200)
            .map(|_| {
                let th: f64 = rng.random_range(0.0..PI * 2.0);
                let b: f64 = rng.random_range(-1.5..1.5);
                GridFunction::sample(&quad, |x| {
                    let t = th.cos() * x[0] + th.sin() * x[1] + b;
                    t * t
                })
                .unwrap()
            })
            .collect();
        assert!(gram_rank(&atoms, 1e-8) <= 6);

        // Monomial projection oracle on a few atoms.
        let basis: Vec<GridFunction<f64>> = [
            [0u32, 0u32],
            [1, 0],
            [0, 1],
            [2, 0],
            [1, 1],
            [0, 2],
        ]
        .iter()
        .map(|p| {
            GridFunction::sample(&quad, |x| x[0].powi(p[0] as i32) * x[1].powi(p[1] as i32))
                .unwrap()
        })
        .collect();
        // Orthonormalize the basis, then check the projection residual.
        let mut ortho: Vec<GridFunction<f64>> = Vec::new();
        for q in &basis {
            let mut v = q.clone();
            for o in &ortho {
                let c = v.inner(o);
                v.axpy(-c, o);
            }
            let n = v.norm_l2();
            ortho.push(v.scaled(1.0 / n));
        }
        for atom in atoms.iter().step_by(37) {
            let mut v = atom.clone();
            for o in &ortho {
                let c = v.inner(o);
                v.axpy(-c, o);
            }
            assert!(v.norm_l2() < 1e-9, "projection residual {}", v.norm_l2());
        }
    }

    #[test]
    fn gram_rank_relu_family_stays_rich() {
        use rand::Rng;
        use rand::SeedableRng;
        let square = BoxDomain::symmetric_cube(2);
        let quad = build_quadrature(&square, 32, QuadKind::TensorGauss).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let atoms: Vec<GridFunction<f64>> = (0..200)
            .map(|_| {
                let th: f64 = rng.random_range(0.0..PI * 2.0);
                let b: f64 = rng.random_range(-1.2..1.2);
                RidgeAtom::new(1, vec![th.cos(), th.sin()], b)
                    .unwrap()
                    .to_grid(&quad)
            })
            .collect();
        assert!(gram_rank(&atoms, 1e-8) >= 50);
    }

    #[test]
    fn sigmoid_step_distances_shrink() {
        let quad = unit_interval_quad(64);
        let dist = sigmoid_heaviside_limit(&[1.0, 10.0, 100.0], &quad);
        assert!(dist[0] > dist[1] && dist[1] > dist[2]);
        assert!(dist[2] <= 0.1);

        // Oracle: fine-grained trapezoid values of the same distances.
        let oracle = |r: f64| -> f64 {
            let n = 400_000;
            let h = 2.0 / n as f64;
            let mut acc = 0.0;
            for i in 0..=n {
                let x = -1.0 + h * i as f64;
                let d = relu_k(x, 0) - logistic(r * x);
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                acc += w * d * d * h;
            }
            acc.sqrt()
        };
        // The r = 100 transition is narrower than the node spacing at this
        // level, so only the bound is asserted there; at r = 10 the rule
        // resolves the integrand and must agree with the oracle.
        assert!(oracle(100.0) <= 0.1);
        let o10 = oracle(10.0);
        assert!(
            (dist[1] - o10).abs() <= 0.05 * o10,
            "quadrature {} vs oracle {}",
            dist[1],
            o10
        );
    }

    #[test]
    fn atom_json_round_trip_digits() {
        let a = RidgeAtom::new(1, vec![3.0f64.sqrt() / 3.0, -0.5], 1.0 / 3.0).unwrap();
        let json = a.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["family"], "ridge");
        assert_eq!(v["k"], 1);
        let back = v["omega"][0].as_f64().unwrap();
        assert_eq!(back.to_bits(), a.omega()[0].to_bits());
    }
}
