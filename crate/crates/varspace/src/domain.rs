//! Box domains, quadrature rules, and the discretized `L²(Ω)` machinery.
//!
//! Every function in this crate lives on a shared quadrature: tensor
//! Gauss–Legendre for `d ≤ 3` (exact for per-axis polynomial degree
//! `2·level − 1`), low-discrepancy Halton points with equal weights beyond.
//! Inner products are plain weighted sums with a fixed summation order, so
//! results are reproducible bit for bit.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Error;
use crate::scalar::Scalar;

/// Hard cap on total node count, independent of dimension.
const MAX_NODES: usize = 1 << 22;
/// Per-axis cap for the tensor Gauss rule.
const MAX_TENSOR_LEVEL: u32 = 64;

const HALTON_PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Axis-aligned box `Ω = Π_i [lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, Error> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidDomain(format!(
                "need matching nonempty bounds, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (i, (&a, &b)) in lo.iter().zip(&hi).enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidDomain(format!(
                    "axis {i}: need lo < hi, got [{a}, {b}]"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// The symmetric cube `[-1, 1]^d`.
    pub fn symmetric_cube(dim: usize) -> Self {
        Self::new(vec![-1.0; dim], vec![1.0; dim]).expect("unit cube is valid")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| b - a)
            .product()
    }

    /// Largest Euclidean norm over the box, attained at a corner.
    pub fn max_point_norm(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| a.abs().max(b.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `sup { x·ω : x ∈ Ω }` for a fixed direction, in closed form.
    pub fn support(&self, omega: &[f64]) -> f64 {
        assert_eq!(omega.len(), self.dim(), "direction dimension mismatch");
        omega
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&w, (&a, &b))| (a * w).max(b * w))
            .sum()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&v, (&a, &b))| v >= a - tol && v <= b + tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadKind {
    #[serde(alias = "tensor")]
    TensorGauss,
    Qmc,
}

/// Nodes and positive weights realizing integration over a box domain.
#[derive(Debug)]
pub struct Quadrature {
    domain: BoxDomain,
    kind: QuadKind,
    level: u32,
    /// Flat row-major storage: node `i` occupies `[i*d, (i+1)*d)`.
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PartialEq for Quadrature {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.level == other.level
            && self.weights.len() == other.weights.len()
            && self.domain == other.domain
    }
}

impl Quadrature {
    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn kind(&self) -> QuadKind {
        self.kind
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let d = self.domain.dim();
        &self.nodes[i * d..(i + 1) * d]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn nodes_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.domain.dim())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 1..=m {
        let mut z = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        loop {
            // Evaluate P_n and P_{n-1} at z.
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        // Recompute the derivative at the converged node for the weight.
        let mut p0 = 1.0;
        let mut p1 = 0.0;
        for j in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
        }
        let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i - 1] = -z;
        nodes[n - i] = z;
        weights[i - 1] = w;
        weights[n - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut inv = 0.0;
    let mut denom = 1.0;
    while index > 0 {
        denom *= base as f64;
        inv += (index % base) as f64 / denom;
        index /= base;
    }
    inv
}

/// Build a quadrature for `domain`.
///
/// Tensor Gauss is restricted to `d ≤ 3` with at most 64 nodes per axis;
/// the QMC rule places `2^level` Halton points with equal weights and works
/// in any dimension up to the node budget.
pub fn build_quadrature(
    domain: &BoxDomain,
    level: u32,
    kind: QuadKind,
) -> Result<Arc<Quadrature>, Error> {
    if level == 0 {
        return Err(Error::QuadratureBudget("level must be positive".into()));
    }
    let d = domain.dim();
    let (nodes, weights) = match kind {
        QuadKind::TensorGauss => {
            if d > 3 {
                return Err(Error::QuadratureBudget(format!(
                    "tensor Gauss limited to d <= 3, got d = {d}"
                )));
            }
            if level > MAX_TENSOR_LEVEL {
                return Err(Error::QuadratureBudget(format!(
                    "tensor Gauss limited to {MAX_TENSOR_LEVEL} nodes per axis, got {level}"
                )));
            }
            let total = (level as usize).pow(d as u32);
            if total > MAX_NODES {
                return Err(Error::QuadratureBudget(format!(
                    "{total} nodes exceed the {MAX_NODES} node budget"
                )));
            }
            let (ref_nodes, ref_weights) = gauss_legendre(level as usize);
            // Per-axis affine map [-1,1] -> [lo, hi].
            let mut axis_nodes = Vec::with_capacity(d);
            let mut axis_weights = Vec::with_capacity(d);
            for ax in 0..d {
                let (a, b) = (domain.lo[ax], domain.hi[ax]);
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                axis_nodes.push(ref_nodes.iter().map(|&t| mid + half * t).collect::<Vec<_>>());
                axis_weights.push(ref_weights.iter().map(|&w| w * half).collect::<Vec<_>>());
            }
            let mut nodes = Vec::with_capacity(total * d);
            let mut weights = Vec::with_capacity(total);
            let mut idx = vec![0usize; d];
            for _ in 0..total {
                let mut w = 1.0;
                for ax in 0..d {
                    nodes.push(axis_nodes[ax][idx[ax]]);
                    w *= axis_weights[ax][idx[ax]];
                }
                weights.push(w);
                // Odometer increment, last axis fastest.
                for ax in (0..d).rev() {
                    idx[ax] += 1;
                    if idx[ax] < level as usize {
                        break;
                    }
                    idx[ax] = 0;
                }
            }
            (nodes, weights)
        }
        QuadKind::Qmc => {
            if d > HALTON_PRIMES.len() {
                return Err(Error::QuadratureBudget(format!(
                    "QMC supports up to {} dimensions, got {d}",
                    HALTON_PRIMES.len()
                )));
            }
            let total = 1usize
                .checked_shl(level)
                .filter(|&t| t <= MAX_NODES)
                .ok_or_else(|| {
                    Error::QuadratureBudget(format!(
                        "2^{level} nodes exceed the {MAX_NODES} node budget"
                    ))
                })?;
            let w = domain.volume() / total as f64;
            let mut nodes = Vec::with_capacity(total * d);
            for j in 0..total as u64 {
                for (ax, &p) in HALTON_PRIMES[..d].iter().enumerate() {
                    let u = radical_inverse(j, p);
                    nodes.push(domain.lo[ax] + u * (domain.hi[ax] - domain.lo[ax]));
                }
            }
            (nodes, vec![w; total])
        }
    };
    finish(domain, kind, level, nodes, weights)
}

fn finish(
    domain: &BoxDomain,
    kind: QuadKind,
    level: u32,
    nodes: Vec<f64>,
    weights: Vec<f64>,
) -> Result<Arc<Quadrature>, Error> {
    Ok(Arc::new(Quadrature {
        domain: domain.clone(),
        kind,
        level,
        nodes,
        weights,
    }))
}

/// A function represented by its values on the nodes of a quadrature.
#[derive(Clone, Debug)]
pub struct GridFunction<S: Scalar> {
    quad: Arc<Quadrature>,
    values: Vec<S>,
}

impl<S: Scalar> GridFunction<S> {
    pub fn from_values(quad: &Arc<Quadrature>, values: Vec<S>) -> Self {
        assert_eq!(
            values.len(),
            quad.len(),
            "value count must match node count"
        );
        Self {
            quad: Arc::clone(quad),
            values,
        }
    }

    pub fn zeros(quad: &Arc<Quadrature>) -> Self {
        Self::from_values(quad, vec![S::ZERO; quad.len()])
    }

    /// Pointwise evaluation of `f` on every node.
    ///
    /// A non-finite value anywhere is reported together with the offending
    /// node.
    pub fn sample(quad: &Arc<Quadrature>, f: impl Fn(&[f64]) -> S) -> Result<Self, Error> {
        let mut values = Vec::with_capacity(quad.len());
        for (i, x) in quad.nodes_iter().enumerate() {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample {
                    node: i,
                    coords: x.to_vec(),
                    value: v.re(),
                });
            }
            values.push(v);
        }
        Ok(Self::from_values(quad, values))
    }

    pub fn quadrature(&self) -> &Arc<Quadrature> {
        &self.quad
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    fn assert_shared(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.quad, &other.quad) || self.quad == other.quad,
            "grid functions must share a quadrature"
        );
    }

    /// `⟨f, g⟩ = Σ_j w_j f(x_j) conj(g(x_j))`, conjugate-linear in `g`.
    pub fn inner(&self, other: &Self) -> S {
        self.assert_shared(other);
        let mut acc = S::ZERO;
        for ((&w, &f), &g) in self
            .quad
            .weights()
            .iter()
            .zip(&self.values)
            .zip(&other.values)
        {
            acc += (f * g.conj()).scale(w);
        }
        acc
    }

    /// `sqrt(⟨f, f⟩)`; the imaginary residue of the inner product is
    /// discarded (it sits at rounding level for Hermitian products).
    pub fn norm_l2(&self) -> f64 {
        let mut acc = 0.0;
        for (&w, &f) in self.quad.weights().iter().zip(&self.values) {
            acc += w * f.modulus_sq();
        }
        acc.max(0.0).sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.assert_shared(other);
        let mut acc = 0.0;
        for ((&w, &f), &g) in self
            .quad
            .weights()
            .iter()
            .zip(&self.values)
            .zip(&other.values)
        {
            acc += w * (f - g).modulus_sq();
        }
        acc.max(0.0).sqrt()
    }

    pub fn axpy(&mut self, c: S, other: &Self) {
        self.assert_shared(other);
        for (v, &o) in self.values.iter_mut().zip(&other.values) {
            *v += c * o;
        }
    }

    pub fn scaled(&self, c: S) -> Self {
        let values = self.values.iter().map(|&v| c * v).collect();
        Self::from_values(&self.quad, values)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_shared(other);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + b)
            .collect();
        Self::from_values(&self.quad, values)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_shared(other);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a - b)
            .collect();
        Self::from_values(&self.quad, values)
    }
}

impl GridFunction<f64> {
    /// View a real grid function as a complex one.
    pub fn to_complex(&self) -> GridFunction<num_complex::Complex64> {
        GridFunction::from_values(
            &self.quad,
            self.values
                .iter()
                .map(|&v| num_complex::Complex64::new(v, 0.0))
                .collect(),
        )
    }
}
