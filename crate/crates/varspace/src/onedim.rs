//! The one-dimensional characterization of the ridge variation space on
//! `[-1, 1]`: boundary derivative values plus the bounded variation of the
//! `k`-th derivative, and the constructive synthesis that certifies the
//! upper direction.
//!
//! The BV norm used throughout is `‖g‖ = |g(-1)| + TV(g)` with the
//! right-continuous representative at jumps; the boundary value carries the
//! order-`k` data the constructive expansion consumes. Total variation is
//! exact for piecewise polynomials (pieces split at their interior extrema)
//! and computed by dyadic refinement for smooth profiles.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dictionaries::RidgeAtom;
use crate::domain::{GridFunction, Quadrature};
use crate::error::Error;
use crate::numfmt::f64_17;
use crate::varnorm::{variation_upper, SolverOptions, SparseCombination};
use crate::RidgeConfig;

const MAX_PIECE_DEGREE: usize = 12;
const TV_REL_TOL: f64 = 1e-6;
const TV_MAX_DOUBLINGS: usize = 20;

/// Dense polynomial in the power basis, low degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::constant(0.0);
        }
        Polynomial {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(p, &c)| p as f64 * c)
                .collect(),
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

/// Exact total variation of a polynomial over `[a, b]`: the piece is split
/// at the sign changes of its derivative, so each segment is monotone.
fn poly_tv(p: &Polynomial, a: f64, b: f64) -> f64 {
    let dp = p.derivative();
    if dp.is_zero() {
        return 0.0;
    }
    let mut cuts = vec![a];
    let samples = 256;
    let h = (b - a) / samples as f64;
    let mut prev_x = a;
    let mut prev_v = dp.eval(a);
    for i in 1..=samples {
        let x = if i == samples { b } else { a + h * i as f64 };
        let v = dp.eval(x);
        if prev_v == 0.0 {
            cuts.push(prev_x);
        } else if v != 0.0 && v.signum() != prev_v.signum() {
            // Bisect the bracketed sign change.
            let (mut lo, mut hi) = (prev_x, x);
            let mut flo = prev_v;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = dp.eval(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
        prev_x = x;
        prev_v = v;
    }
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    cuts.windows(2)
        .map(|s| (p.eval(s[1]) - p.eval(s[0])).abs())
        .sum()
}

/// Piecewise polynomial on `[-1, 1]` with strictly increasing interior
/// breakpoints; values at breakpoints come from the right piece.
#[derive(Clone, Debug)]
pub struct PiecewisePoly {
    breakpoints: Vec<f64>,
    pieces: Vec<Polynomial>,
}

impl PiecewisePoly {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Polynomial>) -> Result<Self, Error> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::Profile(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        for w in breakpoints.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Profile(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
        }
        if breakpoints
            .iter()
            .any(|&t| !(t > -1.0 && t < 1.0) || !t.is_finite())
        {
            return Err(Error::Profile(
                "breakpoints must lie strictly inside (-1, 1)".into(),
            ));
        }
        if pieces.iter().any(|p| p.degree() > MAX_PIECE_DEGREE) {
            return Err(Error::Profile(format!(
                "piece degree exceeds the configured maximum {MAX_PIECE_DEGREE}"
            )));
        }
        Ok(Self {
            breakpoints,
            pieces,
        })
    }

    /// Single polynomial, no breakpoints.
    pub fn polynomial(p: Polynomial) -> Self {
        Self {
            breakpoints: Vec::new(),
            pieces: vec![p],
        }
    }

    /// The profile of `σ_k` on `[-1, 1]`: zero left of the origin, `x^k`
    /// right of it.
    pub fn relu_profile(k: u32) -> Self {
        let mut coeffs = vec![0.0; k as usize + 1];
        coeffs[k as usize] = 1.0;
        Self {
            breakpoints: vec![0.0],
            pieces: vec![Polynomial::constant(0.0), Polynomial::new(coeffs)],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    fn piece_index(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&t| t <= x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    pub fn derivative(&self) -> PiecewisePoly {
        PiecewisePoly {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(Polynomial::derivative).collect(),
        }
    }

    /// Jump `g(t⁺) − g(t⁻)` at each breakpoint.
    pub fn jumps(&self) -> Vec<f64> {
        self.breakpoints
            .iter()
            .enumerate()
            .map(|(i, &t)| self.pieces[i + 1].eval(t) - self.pieces[i].eval(t))
            .collect()
    }

    /// Exact total variation: monotone piece increments plus jumps.
    pub fn total_variation(&self) -> f64 {
        let mut ends = Vec::with_capacity(self.pieces.len() + 1);
        ends.push(-1.0);
        ends.extend_from_slice(&self.breakpoints);
        ends.push(1.0);
        let pieces_tv: f64 = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| poly_tv(p, ends[i], ends[i + 1]))
            .sum();
        let jumps_tv: f64 = self.jumps().iter().map(|j| j.abs()).sum();
        pieces_tv + jumps_tv
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Smooth profile given by callables for `f, f', f'', …`.
#[derive(Clone)]
pub struct SmoothFunction {
    derivs: Vec<ScalarFn>,
}

impl std::fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SmoothFunction(orders 0..{})", self.derivs.len())
    }
}

impl SmoothFunction {
    /// `derivs[j]` must evaluate the `j`-th derivative; consecutive pairs
    /// are spot-checked against central differences at fixed points with
    /// `1e-4` relative tolerance.
    pub fn new(derivs: Vec<ScalarFn>) -> Result<Self, Error> {
        if derivs.is_empty() {
            return Err(Error::Profile("need at least the function itself".into()));
        }
        let h = 1e-5;
        for j in 0..derivs.len() - 1 {
            for &x in &[-0.9, -0.37, 0.0, 0.41, 0.83] {
                let fd = (derivs[j](x + h) - derivs[j](x - h)) / (2.0 * h);
                let direct = derivs[j + 1](x);
                let scale = direct.abs().max(1.0);
                if (fd - direct).abs() > 1e-4 * scale {
                    return Err(Error::Profile(format!(
                        "derivative {} disagrees with finite differences at x = {x}: {fd} vs {direct}",
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { derivs })
    }

    pub fn orders(&self) -> usize {
        self.derivs.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivs[0](x)
    }

    pub fn deriv(&self, j: usize, x: f64) -> Option<f64> {
        self.derivs.get(j).map(|f| f(x))
    }

    fn shifted(&self, j: usize) -> Option<SmoothFunction> {
        if j >= self.derivs.len() {
            return None;
        }
        Some(SmoothFunction {
            derivs: self.derivs[j..].to_vec(),
        })
    }
}

/// A 1D function on `[-1, 1]`, either piecewise polynomial with exact
/// derivative bookkeeping or smooth with derivative callables.
#[derive(Clone, Debug)]
pub enum ProfileFunction {
    PiecewisePoly(PiecewisePoly),
    Smooth(SmoothFunction),
}

impl ProfileFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ProfileFunction::PiecewisePoly(p) => p.eval(x),
            ProfileFunction::Smooth(s) => s.eval(x),
        }
    }

    /// The `j`-th derivative as a profile, when the data supports it.
    pub fn derivative_profile(&self, j: usize) -> Result<ProfileFunction, Error> {
        match self {
            ProfileFunction::PiecewisePoly(p) => {
                let mut out = p.clone();
                for _ in 0..j {
                    out = out.derivative();
                }
                Ok(ProfileFunction::PiecewisePoly(out))
            }
            ProfileFunction::Smooth(s) => s
                .shifted(j)
                .map(ProfileFunction::Smooth)
                .ok_or_else(|| {
                    Error::Profile(format!(
                        "derivative order {j} exceeds available data ({} orders)",
                        s.orders()
                    ))
                }),
        }
    }

    pub fn sample(&self, quad: &Arc<Quadrature>) -> Result<GridFunction<f64>, Error> {
        assert_eq!(quad.domain().dim(), 1, "profiles live on [-1, 1]");
        GridFunction::sample(quad, |x| self.eval(x[0]))
    }
}

/// `‖g‖_BV = |g(-1)| + TV(g)` on `[-1, 1]`.
///
/// Piecewise polynomials get the exact value; smooth profiles refine the
/// dyadic increment sum until two levels agree to `1e-6` relative, failing
/// after 20 doublings.
pub fn bv_norm(g: &ProfileFunction) -> Result<f64, Error> {
    match g {
        ProfileFunction::PiecewisePoly(p) => Ok(p.eval(-1.0).abs() + p.total_variation()),
        ProfileFunction::Smooth(s) => {
            let mut intervals = 64usize;
            let mut prev = dyadic_tv(s, intervals);
            for _ in 0..TV_MAX_DOUBLINGS {
                intervals *= 2;
                let next = dyadic_tv(s, intervals);
                if (next - prev).abs() <= TV_REL_TOL * next.max(1e-300) {
                    return Ok(s.eval(-1.0).abs() + next);
                }
                prev = next;
            }
            Err(Error::TvNonConvergent(TV_MAX_DOUBLINGS))
        }
    }
}

fn dyadic_tv(s: &SmoothFunction, intervals: usize) -> f64 {
    let h = 2.0 / intervals as f64;
    let mut prev = s.eval(-1.0);
    let mut acc = 0.0;
    for i in 1..=intervals {
        let x = if i == intervals {
            1.0
        } else {
            -1.0 + h * i as f64
        };
        let v = s.eval(x);
        acc += (v - prev).abs();
        prev = v;
    }
    acc
}

/// `Σ_{j<k} |f^{(j)}(-1)| + ‖f^{(k)}‖_BV`, the 1D characterization norm.
pub fn characterization_norm(f: &ProfileFunction, k: u32) -> Result<f64, Error> {
    let mut acc = 0.0;
    for j in 0..k {
        let d = f.derivative_profile(j as usize)?;
        acc += d.eval(-1.0).abs();
    }
    let top = f.derivative_profile(k as usize)?;
    Ok(acc + bv_norm(&top)?)
}

/// Constructive ridge representation from the Peano kernel expansion.
pub struct PeanoSynthesis {
    pub combination: SparseCombination<RidgeAtom>,
    pub boundary_mass: f64,
    pub kernel_mass: f64,
    pub vandermonde_condition: f64,
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Solves for atom weights reproducing the boundary polynomial from the
/// affine-range atoms `σ_k(x + bᵢ) = (x + bᵢ)^k`, `bᵢ` equispaced in
/// `[1 + δ, c2]` with `δ = (c2 − 1)/10`.
fn boundary_atoms(
    poly_coeffs: &[f64],
    k: u32,
    c2: f64,
) -> Result<(Vec<(RidgeAtom, f64)>, f64), Error> {
    let delta = (c2 - 1.0) / 10.0;
    let lo = 1.0 + delta;
    let nodes: Vec<f64> = if k == 0 {
        vec![lo]
    } else {
        (0..=k)
            .map(|i| lo + (c2 - lo) * i as f64 / k as f64)
            .collect()
    };
    let n = k as usize + 1;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (col, &b) in nodes.iter().enumerate() {
        for l in 0..n {
            // Coefficient of x^l in (x + b)^k.
            a[(l, col)] = binomial(k, l as u32) * b.powi((k as usize - l) as i32);
        }
    }
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > 1e12 {
        return Err(Error::IllConditioned { cond, nodes });
    }
    let rhs = DVector::from_column_slice(poly_coeffs);
    let solved = a.lu().solve(&rhs).ok_or(Error::IllConditioned {
        cond,
        nodes: nodes.clone(),
    })?;
    let atoms = nodes
        .iter()
        .zip(solved.iter())
        .filter(|&(_, &w)| w != 0.0)
        .map(|(&b, &w)| (RidgeAtom::new(k, vec![1.0], b).expect("unit direction"), w))
        .collect();
    Ok((atoms, cond))
}

/// Builds a ridge combination reproducing `f` on `[-1, 1]`.
///
/// Smooth profiles get the boundary Taylor part re-expressed in affine-range
/// atoms plus the kernel integral `∫ f^{(k+1)}(b)/k! σ_k(x − b) db`
/// discretized on `b_quad`. Piecewise-polynomial profiles of degree at most
/// `k` with continuous lower derivatives get the exact representation with
/// one jump atom per breakpoint, so their residual is zero up to rounding.
pub fn peano_synthesis(
    f: &ProfileFunction,
    k: u32,
    b_quad: &Quadrature,
    c2: f64,
) -> Result<PeanoSynthesis, Error> {
    if c2 <= 1.0 {
        return Err(Error::Profile(format!(
            "affine-range boundary atoms need c2 > 1, got {c2}"
        )));
    }
    if b_quad.domain().dim() != 1
        || b_quad.domain().lo()[0] != -1.0
        || b_quad.domain().hi()[0] != 1.0
    {
        return Err(Error::Profile(
            "offset quadrature must live on [-1, 1]".into(),
        ));
    }
    let k_factorial: f64 = (1..=k).map(|i| i as f64).product::<f64>().max(1.0);

    match f {
        ProfileFunction::Smooth(s) => {
            if s.orders() < k as usize + 2 {
                return Err(Error::Profile(format!(
                    "need derivatives through order {} for the kernel part",
                    k + 1
                )));
            }
            // Boundary polynomial sum_{j<=k} f^(j)(-1)/j! (x+1)^j in the
            // power basis.
            let mut poly = vec![0.0; k as usize + 1];
            let mut jfact = 1.0;
            for j in 0..=k {
                if j > 0 {
                    jfact *= j as f64;
                }
                let fj = s.deriv(j as usize, -1.0).unwrap() / jfact;
                for l in 0..=j {
                    poly[l as usize] += fj * binomial(j, l);
                }
            }
            let (boundary, cond) = boundary_atoms(&poly, k, c2)?;
            let boundary_mass: f64 = boundary.iter().map(|(_, w)| w.abs()).sum();

            let mut atoms: Vec<RidgeAtom> = Vec::new();
            let mut coefficients: Vec<f64> = Vec::new();
            for (a, w) in boundary {
                atoms.push(a);
                coefficients.push(w);
            }
            let mut kernel_mass = 0.0;
            for (node, &w) in b_quad.nodes_iter().zip(b_quad.weights()) {
                let b = node[0];
                let coeff = w * s.deriv(k as usize + 1, b).unwrap() / k_factorial;
                if coeff != 0.0 {
                    atoms.push(RidgeAtom::new(k, vec![1.0], -b).expect("unit direction"));
                    coefficients.push(coeff);
                    kernel_mass += coeff.abs();
                }
            }
            Ok(PeanoSynthesis {
                combination: SparseCombination::new(atoms, coefficients),
                boundary_mass,
                kernel_mass,
                vandermonde_condition: cond,
            })
        }
        ProfileFunction::PiecewisePoly(p) => {
            if p.pieces().iter().any(|q| q.degree() > k as usize) {
                return Err(Error::Profile(format!(
                    "exact synthesis needs piece degree <= {k}"
                )));
            }
            // Lower-order derivative jumps cannot be carried by sigma_k
            // atoms (k >= 1); require continuity below the top order.
            let mut top = p.clone();
            for j in 0..k {
                if top.jumps().iter().any(|jv| jv.abs() > 1e-12) {
                    return Err(Error::Profile(format!(
                        "derivative order {j} jumps at a breakpoint; exact synthesis needs C^{} input",
                        k.saturating_sub(1)
                    )));
                }
                top = top.derivative();
            }
            // Boundary part: the first piece extended, in the power basis.
            let mut poly = p.pieces()[0].coeffs().to_vec();
            poly.resize(k as usize + 1, 0.0);
            let (boundary, cond) = boundary_atoms(&poly, k, c2)?;
            let boundary_mass: f64 = boundary.iter().map(|(_, w)| w.abs()).sum();
            let mut atoms: Vec<RidgeAtom> = Vec::new();
            let mut coefficients: Vec<f64> = Vec::new();
            for (a, w) in boundary {
                atoms.push(a);
                coefficients.push(w);
            }
            // One jump atom per breakpoint, scaled by the top-derivative
            // jump over k!.
            let mut kernel_mass = 0.0;
            for (&t, &jump) in p.breakpoints().iter().zip(top.jumps().iter()) {
                let coeff = jump / k_factorial;
                if coeff != 0.0 {
                    atoms.push(RidgeAtom::new(k, vec![1.0], -t).expect("unit direction"));
                    coefficients.push(coeff);
                    kernel_mass += coeff.abs();
                }
            }
            Ok(PeanoSynthesis {
                combination: SparseCombination::new(atoms, coefficients),
                boundary_mass,
                kernel_mass,
                vandermonde_condition: cond,
            })
        }
    }
}

/// `‖synth − f‖_{L²}` on the given quadrature.
pub fn peano_residual(
    f: &ProfileFunction,
    synthesis: &SparseCombination<RidgeAtom>,
    quad: &Arc<Quadrature>,
) -> Result<f64, Error> {
    let target = f.sample(quad)?;
    Ok(synthesis.synth(quad).distance(&target))
}

/// One function in an equivalence suite.
pub struct SuiteRow {
    pub id: String,
    pub profile: ProfileFunction,
    pub k: u32,
}

/// Per-function outcome of the two-sided comparison.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EquivalenceRow {
    pub id: String,
    pub k: u32,
    pub characterization: f64,
    pub variation_upper: f64,
    pub ratio: f64,
    /// Ratio at the doubled quadrature level over the base ratio.
    pub refinement_ratio: f64,
    pub converged: bool,
}

pub struct EquivalenceSettings {
    pub base_level: u32,
    pub c1: f64,
    pub c2: f64,
    pub offsets: usize,
    pub solver: SolverOptions,
}

impl Default for EquivalenceSettings {
    fn default() -> Self {
        Self {
            base_level: 24,
            c1: -3.0,
            c2: 3.0,
            offsets: 31,
            solver: SolverOptions::default(),
        }
    }
}

/// Runs both norms for every suite row at the base level and the doubled
/// level; solver failures flag the row instead of aborting the table.
pub fn equivalence_experiment(
    suite: &[SuiteRow],
    settings: &EquivalenceSettings,
) -> Result<Vec<EquivalenceRow>, Error> {
    use crate::domain::{build_quadrature, BoxDomain, QuadKind};
    let domain = BoxDomain::symmetric_cube(1);
    let mut rows = Vec::with_capacity(suite.len());
    for item in suite {
        let characterization = characterization_norm(&item.profile, item.k)?;
        let mut uppers = Vec::with_capacity(2);
        let mut ok = true;
        for level in [settings.base_level, settings.base_level * 2] {
            let quad = build_quadrature(&domain, level, QuadKind::TensorGauss)?;
            let cfg = RidgeConfig::new(
                domain.clone(),
                item.k,
                settings.c1,
                settings.c2,
                2,
                settings.offsets,
            )?;
            let f = item.profile.sample(&quad)?;
            let (report, _) = variation_upper(&f, &cfg, &settings.solver)?;
            ok &= report.converged;
            uppers.push(report.upper);
        }
        let ratio = uppers[0] / characterization;
        let ratio_fine = uppers[1] / characterization;
        rows.push(EquivalenceRow {
            id: item.id.clone(),
            k: item.k,
            characterization,
            variation_upper: uppers[0],
            ratio,
            refinement_ratio: ratio_fine / ratio,
            converged: ok,
        });
    }
    Ok(rows)
}

/// Columns: `function,k,characterization_norm,variation_upper,ratio,refinement_ratio,status`.
pub fn equivalence_csv(rows: &[EquivalenceRow]) -> String {
    let mut out = String::from(
        "function,k,characterization_norm,variation_upper,ratio,refinement_ratio,status\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.id,
            r.k,
            f64_17(r.characterization),
            f64_17(r.variation_upper),
            f64_17(r.ratio),
            f64_17(r.refinement_ratio),
            if r.converged { "ok" } else { "failed" }
        ));
    }
    out
}

/// The default comparison suite: ridge atoms, monomials, analytic profiles,
/// and a piecewise-linear function with three kinks, for `k ∈ {1, 2}`.
pub fn default_suite() -> Vec<SuiteRow> {
    let mut suite = Vec::new();
    suite.push(SuiteRow {
        id: "relu_atom".into(),
        profile: ProfileFunction::PiecewisePoly(PiecewisePoly::relu_profile(1)),
        k: 1,
    });
    suite.push(SuiteRow {
        id: "relu2_atom".into(),
        profile: ProfileFunction::PiecewisePoly(PiecewisePoly::relu_profile(2)),
        k: 2,
    });
    suite.push(SuiteRow {
        id: "coordinate".into(),
        profile: smooth_coordinate(),
        k: 1,
    });
    suite.push(SuiteRow {
        id: "quadratic".into(),
        profile: smooth_quadratic(3),
        k: 1,
    });
    suite.push(SuiteRow {
        id: "quadratic_k2".into(),
        profile: smooth_quadratic(4),
        k: 2,
    });
    suite.push(SuiteRow {
        id: "exp".into(),
        profile: smooth_exp(3),
        k: 1,
    });
    suite.push(SuiteRow {
        id: "exp_k2".into(),
        profile: smooth_exp(4),
        k: 2,
    });
    suite.push(SuiteRow {
        id: "log2p".into(),
        profile: smooth_log2p(),
        k: 1,
    });
    suite.push(SuiteRow {
        id: "pl3_kinks".into(),
        profile: ProfileFunction::PiecewisePoly(pl_three_kinks()),
        k: 1,
    });
    suite
}

/// The smooth subset of [`default_suite`], for synthesis experiments.
pub fn default_smooth_suite() -> Vec<SuiteRow> {
    default_suite()
        .into_iter()
        .filter(|row| matches!(row.profile, ProfileFunction::Smooth(_)))
        .collect()
}

fn smooth_coordinate() -> ProfileFunction {
    ProfileFunction::Smooth(
        SmoothFunction::new(vec![
            Arc::new(|x| x),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
        ])
        .expect("valid derivatives"),
    )
}

fn smooth_quadratic(orders: usize) -> ProfileFunction {
    let derivs: Vec<ScalarFn> = vec![
        Arc::new(|x| x * x),
        Arc::new(|x| 2.0 * x),
        Arc::new(|_| 2.0),
        Arc::new(|_| 0.0),
        Arc::new(|_| 0.0),
    ];
    ProfileFunction::Smooth(
        SmoothFunction::new(derivs.into_iter().take(orders.max(3)).collect())
            .expect("valid derivatives"),
    )
}

fn smooth_exp(orders: usize) -> ProfileFunction {
    let derivs: Vec<ScalarFn> = (0..orders.max(3)).map(|_| Arc::new(f64::exp) as ScalarFn).collect();
    ProfileFunction::Smooth(SmoothFunction::new(derivs).expect("valid derivatives"))
}

fn smooth_log2p() -> ProfileFunction {
    ProfileFunction::Smooth(
        SmoothFunction::new(vec![
            Arc::new(|x: f64| (2.0 + x).ln()),
            Arc::new(|x: f64| 1.0 / (2.0 + x)),
            Arc::new(|x: f64| -1.0 / (2.0 + x).powi(2)),
            Arc::new(|x: f64| 2.0 / (2.0 + x).powi(3)),
        ])
        .expect("valid derivatives"),
    )
}

fn pl_three_kinks() -> PiecewisePoly {
    PiecewisePoly::new(
        vec![-0.4, 0.1, 0.6],
        vec![
            Polynomial::new(vec![1.5, 1.0]),
            Polynomial::new(vec![0.3, -2.0]),
            Polynomial::new(vec![-0.05, 1.5]),
            Polynomial::new(vec![0.55, 0.5]),
        ],
    )
    .expect("continuous piecewise-linear profile")
}
