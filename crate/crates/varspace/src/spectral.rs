//! Fourier-side norms for the decaying-exponential dictionary: the weighted
//! spectral integral `∫ (1+|ξ|)^s |f̂(ξ)| dξ`, the Gaussian-plus-correction
//! cutoff construction whose weighted mass approaches 1, and the numerical
//! one-sided equality check against the dictionary gauge.
//!
//! Convention throughout: `f̂(ξ) = ∫ f(x) e^{-2πi ξ·x} dx`, with inverse
//! `f(x) = ∫ f̂(ξ) e^{2πi ξ·x} dξ`. Under it the Gaussian `e^{-x²/(2R)}`
//! transforms to `√(2πR) e^{-2π²Rξ²}`; every Gaussian constant here is
//! derived from that pair rather than quoted.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::{gauss_legendre, BoxDomain, GridFunction, Quadrature};
use crate::error::Error;
use crate::numfmt::f64_17;
use crate::onedim::Polynomial;
use crate::varnorm::{variation_upper, EstimateReport, SolverOptions, SparseCombination};
use crate::{SpectralAtom, SpectralConfig};

/// 8-node composite Gauss rule over `[a, b]` with the given panel count.
fn composite_gl(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_legendre(8);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for (&t, &w) in nodes.iter().zip(&weights) {
            acc += 0.5 * h * w * f(mid + 0.5 * h * t);
        }
    }
    acc
}

/// Declared decay of `|f̂|` beyond a radius, with computable tail mass.
#[derive(Clone, Debug)]
pub enum DecayEnvelope {
    /// `|f̂(ξ)| ≤ amplitude · e^{-rate ξ²}`.
    Gaussian { amplitude: f64, rate: f64 },
    /// `|f̂(ξ)| ≤ amplitude · e^{-rate |ξ|}`.
    Exponential { amplitude: f64, rate: f64 },
    /// `|f̂(ξ)| ≤ amplitude · (1+|ξ|)^{-exponent}`.
    Power { amplitude: f64, exponent: f64 },
}

impl DecayEnvelope {
    /// `∫_{|ξ| > r} (1+|ξ|)^s · envelope dξ` (1D); infinite when the
    /// weighted envelope is not integrable.
    pub fn tail_integral(&self, s: f64, r: f64) -> f64 {
        match *self {
            DecayEnvelope::Gaussian { amplitude, rate } => {
                let reach = r + 12.0 / rate.sqrt().max(1e-12);
                2.0 * composite_gl(r, reach, 256, |xi| {
                    amplitude * (1.0 + xi).powf(s) * (-rate * xi * xi).exp()
                })
            }
            DecayEnvelope::Exponential { amplitude, rate } => {
                let reach = r + 80.0 / rate.max(1e-12);
                2.0 * composite_gl(r, reach, 256, |xi| {
                    amplitude * (1.0 + xi).powf(s) * (-rate * xi).exp()
                })
            }
            DecayEnvelope::Power {
                amplitude,
                exponent,
            } => {
                if exponent <= s + 1.0 {
                    return f64::INFINITY;
                }
                2.0 * amplitude * (1.0 + r).powf(s - exponent + 1.0) / (exponent - s - 1.0)
            }
        }
    }
}

type SpatialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type TransformFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// A real target function together with its Fourier transform and declared
/// decay. Construction spot-checks Fourier inversion at five deterministic
/// points of the reference domain.
#[derive(Clone)]
pub struct FourierPair {
    dim: usize,
    spatial: SpatialFn,
    transform: TransformFn,
    pub envelope_radius: f64,
    pub envelope: DecayEnvelope,
}

impl std::fmt::Debug for FourierPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FourierPair(dim {})", self.dim)
    }
}

impl FourierPair {
    pub fn new(
        dim: usize,
        spatial: SpatialFn,
        transform: TransformFn,
        envelope_radius: f64,
        envelope: DecayEnvelope,
        check_domain: &BoxDomain,
        check_radius: f64,
    ) -> Result<Self, Error> {
        assert_eq!(dim, 1, "spectral quadrature is implemented for d = 1");
        let pair = Self {
            dim,
            spatial,
            transform,
            envelope_radius,
            envelope,
        };
        let mut worst = 0.0f64;
        for j in 0..5u64 {
            // Deterministic sample points from the base-2 radical inverse.
            let mut u = 0.0;
            let mut denom = 1.0;
            let mut idx = j + 1;
            while idx > 0 {
                denom *= 2.0;
                u += (idx % 2) as f64 / denom;
                idx /= 2;
            }
            let x = check_domain.lo()[0] + u * (check_domain.hi()[0] - check_domain.lo()[0]);
            let inverted = pair.inverse_at(x, check_radius);
            worst = worst.max((inverted - (pair.spatial)(&[x])).abs());
        }
        if worst > 1e-4 {
            return Err(Error::InversionCheck(worst));
        }
        Ok(pair)
    }

    fn inverse_at(&self, x: f64, radius: f64) -> f64 {
        let panels = ((2.0 * radius) * (4.0 + 2.0 * x.abs())).ceil() as usize + 8;
        let (nodes, weights) = gauss_legendre(8);
        let h = 2.0 * radius / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = -radius + h * p as f64;
            let mid = lo + 0.5 * h;
            for (&t, &w) in nodes.iter().zip(&weights) {
                let xi = mid + 0.5 * h * t;
                let phase = Complex64::from_polar(1.0, 2.0 * PI * xi * x);
                acc += (self.transform)(&[xi]) * phase * (0.5 * h * w);
            }
        }
        acc.re
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spatial(&self, x: &[f64]) -> f64 {
        (self.spatial)(x)
    }

    pub fn transform(&self, xi: &[f64]) -> Complex64 {
        (self.transform)(xi)
    }

    /// `e^{-x²/2}` with transform `√(2π) e^{-2π²ξ²}`.
    pub fn gaussian() -> Self {
        let domain = BoxDomain::symmetric_cube(1);
        Self::new(
            1,
            Arc::new(|x: &[f64]| (-x[0] * x[0] / 2.0).exp()),
            Arc::new(|xi: &[f64]| {
                Complex64::new((2.0 * PI).sqrt() * (-2.0 * PI * PI * xi[0] * xi[0]).exp(), 0.0)
            }),
            1.0,
            DecayEnvelope::Gaussian {
                amplitude: (2.0 * PI).sqrt(),
                rate: 2.0 * PI * PI,
            },
            &domain,
            4.0,
        )
        .expect("gaussian pair inverts")
    }

    /// `1/(1+x²)` with transform `π e^{-2π|ξ|}`.
    pub fn cauchy() -> Self {
        let domain = BoxDomain::symmetric_cube(1);
        Self::new(
            1,
            Arc::new(|x: &[f64]| 1.0 / (1.0 + x[0] * x[0])),
            Arc::new(|xi: &[f64]| Complex64::new(PI * (-2.0 * PI * xi[0].abs()).exp(), 0.0)),
            1.0,
            DecayEnvelope::Exponential {
                amplitude: PI,
                rate: 2.0 * PI,
            },
            &domain,
            6.0,
        )
        .expect("cauchy pair inverts")
    }

    /// `max(0, 1-|x|)` with transform `sinc²(ξ)`; power-law decay, so only
    /// small weights admit a finite tail.
    pub fn hat() -> Self {
        let domain = BoxDomain::symmetric_cube(1);
        Self::new(
            1,
            Arc::new(|x: &[f64]| (1.0 - x[0].abs()).max(0.0)),
            Arc::new(|xi: &[f64]| {
                let v = xi[0];
                let s = if v.abs() < 1e-8 {
                    1.0 - (PI * v).powi(2) / 3.0
                } else {
                    let t = (PI * v).sin() / (PI * v);
                    t * t
                };
                Complex64::new(s, 0.0)
            }),
            2.0,
            DecayEnvelope::Power {
                amplitude: 4.0 / (PI * PI),
                exponent: 2.0,
            },
            &domain,
            // sinc² tails shed mass like 1/R, so the inversion check needs
            // a wide truncation to clear its 1e-4 budget.
            4000.0,
        )
        .expect("hat pair inverts")
    }

    /// Named built-ins for run manifests.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "gaussian" => Some(Self::gaussian()),
            "cauchy" => Some(Self::cauchy()),
            "hat" => Some(Self::hat()),
            _ => None,
        }
    }
}

/// The weighted spectral integral of a given extension, with its truncation
/// accounting.
#[derive(Clone, Copy, Debug)]
pub struct SpectralNormValue {
    /// Head plus tail bound; the certified value.
    pub value: f64,
    pub head: f64,
    pub tail_bound: f64,
}

/// `∫_{|ξ| ≤ r_max} (1+|ξ|)^s |f̂(ξ)| dξ` plus the declared envelope tail.
///
/// The declared tail must stay below `1e-6` of the head; it is added to the
/// reported value as uncertainty rather than dropped.
pub fn spectral_barron_norm(
    pair: &FourierPair,
    s: f64,
    r_max: f64,
    level: u32,
) -> Result<SpectralNormValue, Error> {
    assert!(s >= 0.0 && r_max > 0.0 && level > 0);
    let panels_per_unit = (level as usize).max(4);
    let panels = (r_max * panels_per_unit as f64).ceil() as usize;
    let head = composite_gl(-r_max, r_max, 2 * panels, |xi| {
        (1.0 + xi.abs()).powf(s) * pair.transform(&[xi]).norm()
    });
    if r_max < pair.envelope_radius {
        return Err(Error::TailBound {
            tail: f64::INFINITY,
            head,
            limit: 1e-6 * head,
        });
    }
    let tail = pair.envelope.tail_integral(s, r_max);
    if !(tail <= 1e-6 * head) {
        return Err(Error::TailBound {
            tail,
            head,
            limit: 1e-6 * head,
        });
    }
    Ok(SpectralNormValue {
        value: head + tail,
        head,
        tail_bound: tail,
    })
}

/// `∫ (1+|ξ|)^s |ĝ_R(ξ)| dξ` for the Gaussian `g_R(x) = e^{-x²/(2R)}`,
/// with the transform `√(2πR) e^{-2π²Rξ²}` evaluated analytically.
///
/// Equals 1 exactly at `s = 0` (the transform has unit mass) and decreases
/// toward 1 as `R` grows for every fixed `s`.
pub fn gaussian_factor_integral(r_width: f64, s: f64) -> f64 {
    assert!(r_width > 0.0 && s >= 0.0);
    let amp = (2.0 * PI * r_width).sqrt();
    let rate = 2.0 * PI * PI * r_width;
    let reach = (60.0 / rate).sqrt();
    2.0 * composite_gl(0.0, reach, 64, |xi| {
        amp * (1.0 + xi).powf(s) * (-rate * xi * xi).exp()
    })
}

/// Report of one cutoff construction.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct CutoffReport {
    pub r: f64,
    pub s: f64,
    pub gaussian_integral: f64,
    pub correction_integral: f64,
    pub total: f64,
    pub on_domain_max_error: f64,
}

impl CutoffReport {
    pub fn csv_header() -> &'static str {
        "r,s,gaussian_integral,correction_integral,total,on_domain_max_error"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            f64_17(self.r),
            f64_17(self.s),
            f64_17(self.gaussian_integral),
            f64_17(self.correction_integral),
            f64_17(self.total),
            f64_17(self.on_domain_max_error)
        )
    }
}

/// Smooth step that is 0 at 0 and 1 at 1 with all derivatives vanishing at
/// both ends.
fn smoothstep(t: f64) -> f64 {
    let phi = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    let a = phi(t);
    let b = phi(1.0 - t);
    a / (a + b)
}

/// The correction profile `τ_R` and its ingredients.
struct Correction {
    l: f64,
    r_width: f64,
    /// Taylor polynomial of `1 - g_R` at `x = L`, in powers of `(x - L)`.
    taylor: Vec<f64>,
}

impl Correction {
    fn build(r_width: f64, l: f64, smoothness: u32) -> Self {
        // Derivatives of g(x) = e^{-x²/(2R)}: g^{(j)} = p_j(x) g(x) with
        // p_{j+1} = p_j' - (x/R) p_j.
        let mut p = Polynomial::constant(1.0);
        let g_l = (-l * l / (2.0 * r_width)).exp();
        let mut taylor = vec![1.0 - g_l];
        let mut factorial = 1.0;
        for j in 1..=smoothness {
            factorial *= j as f64;
            let dp = p.derivative();
            let mut shifted: Vec<f64> = vec![0.0; p.coeffs().len() + 1];
            for (i, &c) in p.coeffs().iter().enumerate() {
                shifted[i + 1] = -c / r_width;
            }
            let mut next = shifted;
            for (i, &c) in dp.coeffs().iter().enumerate() {
                next[i] += c;
            }
            p = Polynomial::new(next);
            taylor.push(-p.eval(l) * g_l / factorial);
        }
        Self {
            l,
            r_width,
            taylor,
        }
    }

    /// `τ_R(x)`: `1 - g_R` inside `[-L, L]`, the Taylor extension times a
    /// plateau cutoff on `L < |x| < L + 1`, zero beyond.
    fn eval(&self, x: f64) -> f64 {
        let u = x.abs();
        if u <= self.l {
            return 1.0 - (-x * x / (2.0 * self.r_width)).exp();
        }
        if u >= self.l + 1.0 {
            return 0.0;
        }
        let dx = u - self.l;
        let taylor: f64 = self
            .taylor
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * dx + c);
        let chi = if dx <= 0.5 {
            1.0
        } else {
            1.0 - smoothstep((dx - 0.5) * 2.0)
        };
        taylor * chi
    }

    /// `τ̂(ξ) = 2 ∫_0^{L+1} τ(x) cos(2πξx) dx` (τ is even, so the transform
    /// is real).
    fn transform(&self, xi: f64, oversample: usize) -> f64 {
        let freq = xi.abs().max(1.0);
        let seg = |a: f64, b: f64| -> f64 {
            let len = b - a;
            let panels = ((len * freq / 1.5).ceil() as usize + 2) * oversample;
            composite_gl(a, b, panels, |x| self.eval(x) * (2.0 * PI * xi * x).cos())
        };
        2.0 * (seg(0.0, self.l) + seg(self.l, self.l + 0.5) + seg(self.l + 0.5, self.l + 1.0))
    }
}

/// Builds the cutoff `φ_R = g_R + τ_R` from the Gaussian of width `R` and
/// the `C^k` correction that restores `φ_R ≡ 1` on `[-L, L]`, and measures
/// the weighted spectral mass of each part.
///
/// Requires integer smoothness `k > s + 2` so the corrected transform
/// decays fast enough for the weighted integral to vanish as `R → ∞`.
pub fn build_cutoff(r_width: f64, s: f64, l: f64, smoothness: u32) -> Result<CutoffReport, Error> {
    if !(smoothness as f64 > s + 2.0) {
        return Err(Error::Config(format!(
            "cutoff smoothness must exceed s + 2 = {}",
            s + 2.0
        )));
    }
    if r_width <= 0.0 || l <= 0.0 {
        return Err(Error::Config("cutoff needs R > 0 and L > 0".into()));
    }
    let correction = Correction::build(r_width, l, smoothness);

    // Weighted integral grid over xi >= 0: fine near the Gaussian peak,
    // coarse past it, truncated where the C^k decay has taken over.
    let xi_max = 60.0;
    let sigma = 1.0 / (2.0 * PI * r_width.sqrt());
    let integrate = |oversample: usize| -> (f64, f64) {
        let fine_step = (sigma / 8.0).min(2e-3) / oversample as f64;
        let coarse_step = 0.02 / oversample as f64;
        let mut grid = Vec::new();
        let mut x = 0.0;
        while x < 1.0 {
            grid.push(x);
            x += fine_step;
        }
        while x < xi_max {
            grid.push(x);
            x += coarse_step;
        }
        grid.push(xi_max);
        let amp = (2.0 * PI * r_width).sqrt();
        let rate = 2.0 * PI * PI * r_width;
        let mut corr = 0.0;
        let mut total = 0.0;
        let mut prev: Option<(f64, f64, f64)> = None;
        for &xi in &grid {
            let tau_hat = correction.transform(xi, oversample);
            let g_hat = amp * (-rate * xi * xi).exp();
            let weight = (1.0 + xi).powf(s);
            let c_val = weight * tau_hat.abs();
            let t_val = weight * (g_hat + tau_hat).abs();
            if let Some((x0, c0, t0)) = prev {
                let h = xi - x0;
                corr += 0.5 * h * (c0 + c_val);
                total += 0.5 * h * (t0 + t_val);
            }
            prev = Some((xi, c_val, t_val));
        }
        (2.0 * corr, 2.0 * total)
    };
    let (corr1, _) = integrate(1);
    let (corr2, total2) = integrate(2);
    let denom = corr2.abs().max(1e-12);
    let rel = (corr2 - corr1).abs() / denom;
    if rel > 1e-3 {
        return Err(Error::QuadratureNonConvergent(rel));
    }

    // The construction is the identity on [-L, L] by definition; sampling
    // documents it.
    let mut on_domain = 0.0f64;
    for i in 0..=2000 {
        let x = -l + 2.0 * l * i as f64 / 2000.0;
        let phi = (-x * x / (2.0 * r_width)).exp() + correction.eval(x);
        on_domain = on_domain.max((phi - 1.0).abs());
    }

    Ok(CutoffReport {
        r: r_width,
        s,
        gaussian_integral: gaussian_factor_integral(r_width, s),
        correction_integral: corr2,
        total: total2,
        on_domain_max_error: on_domain,
    })
}

/// Outcome of the one-sided equality experiment.
#[derive(Clone, Debug)]
pub struct FsEqualityOutcome {
    pub report: EstimateReport,
    pub combination: SparseCombination<SpectralAtom>,
    pub spectral: SpectralNormValue,
    /// `variation_upper − spectral value`; may be negative (the supplied
    /// extension need not be the minimizer).
    pub gap: f64,
}

/// Runs the gauge solver for `f|_Ω` over the Fourier dictionary and checks
/// it does not materially exceed the weighted spectral integral of the
/// supplied extension (one feasible extension certifies the one-sided
/// inequality; the infimum over extensions is not searched).
pub fn fs_equality_experiment(
    pair: &FourierPair,
    config: &SpectralConfig,
    quad: &Arc<Quadrature>,
    r_max: f64,
    level: u32,
    options: &SolverOptions,
) -> Result<FsEqualityOutcome, Error> {
    let spectral = spectral_barron_norm(pair, config.s, r_max, level)?;
    let f = GridFunction::sample(quad, |x| Complex64::new(pair.spatial(x), 0.0))?;
    let (report, combination) = variation_upper(&f, config, options)?;
    if !report.converged {
        return Err(Error::SolverFailed);
    }
    let gap = report.upper - spectral.value;
    if report.upper > spectral.value * 1.1 {
        return Err(Error::EqualityGap {
            upper: report.upper,
            certified: spectral.value,
        });
    }
    Ok(FsEqualityOutcome {
        report,
        combination,
        spectral,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionaries::Atom;
    use crate::domain::{build_quadrature, QuadKind};
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_factor_unit_mass() {
        for r in [0.5, 1.0, 10.0, 100.0] {
            assert_relative_eq!(gaussian_factor_integral(r, 0.0), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn gaussian_factor_decreases_with_width() {
        let values: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&r| gaussian_factor_integral(r, 1.0))
            .collect();
        assert!(values[0] > values[1] && values[1] > values[2]);
        assert!(values[2] <= 1.1, "R = 100 value {}", values[2]);
        // Oracle: closed form 1 + sqrt(2πR)/(2π²R) for s = 1.
        for (&r, &v) in [1.0, 10.0, 100.0].iter().zip(&values) {
            let oracle = 1.0 + (2.0 * PI * r).sqrt() / (2.0 * PI * PI * r);
            assert_relative_eq!(v, oracle, max_relative = 1e-10);
        }
    }

    #[test]
    fn spectral_norm_gaussian_examples() {
        let pair = FourierPair::gaussian();
        let v0 = spectral_barron_norm(&pair, 0.0, 4.0, 32).unwrap();
        assert_relative_eq!(v0.value, 1.0, epsilon = 1e-6);

        // Oracle for s = 1: dense trapezoid of (1+|ξ|)√(2π)e^{-2π²ξ²}.
        let n = 2_000_000usize;
        let hi = 4.0;
        let h = hi / n as f64;
        let mut oracle = 0.0;
        for i in 0..=n {
            let xi = h * i as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            oracle += w * h * (1.0 + xi) * (2.0 * PI).sqrt() * (-2.0 * PI * PI * xi * xi).exp();
        }
        oracle *= 2.0;
        let v1 = spectral_barron_norm(&pair, 1.0, 4.0, 32).unwrap();
        assert!((v1.value - oracle).abs() <= 1e-4, "{} vs {oracle}", v1.value);
    }

    #[test]
    fn spectral_norm_monotone_in_s() {
        let pair = FourierPair::gaussian();
        let mut prev = 0.0;
        for s in [0.0, 0.5, 1.0, 2.0] {
            let v = spectral_barron_norm(&pair, s, 4.0, 32).unwrap().value;
            assert!(v >= prev - 1e-12, "s = {s}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn tail_precondition_rejects_power_decay() {
        // sinc² decays like ξ^{-2}; at s = 0 the 1e-6 head fraction needs a
        // gigantic radius, and s = 1 is not even integrable.
        let pair = FourierPair::hat();
        assert!(matches!(
            spectral_barron_norm(&pair, 0.0, 40.0, 16),
            Err(Error::TailBound { .. })
        ));
        assert!(matches!(
            spectral_barron_norm(&pair, 1.0, 40.0, 16),
            Err(Error::TailBound { .. })
        ));
    }

    #[test]
    fn cauchy_pair_spectral_norm() {
        // ∫ π e^{-2π|ξ|} dξ = 1; with weight (1+|ξ|) the closed form is
        // 1 + 2π∫_0^∞ ξ e^{-2πξ} dξ = 1 + 1/(2π).
        let pair = FourierPair::cauchy();
        let v0 = spectral_barron_norm(&pair, 0.0, 8.0, 32).unwrap();
        assert_relative_eq!(v0.value, 1.0, epsilon = 1e-6);
        let v1 = spectral_barron_norm(&pair, 1.0, 8.0, 32).unwrap();
        assert_relative_eq!(v1.value, 1.0 + 1.0 / (2.0 * PI), epsilon = 1e-6);
    }

    #[test]
    fn submultiplicative_weight() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for s in [0.0, 0.5, 1.0, 2.0] {
            for _ in 0..200 {
                let xi: f64 = rng.random_range(-20.0..20.0);
                let nu: f64 = rng.random_range(-20.0..20.0);
                let lhs = (1.0 + xi.abs()).powf(s);
                let rhs = (1.0 + nu.abs()).powf(s) * (1.0 + (xi - nu).abs()).powf(s);
                assert!(lhs <= rhs * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn cutoff_identity_and_decay() {
        let mut prev_total = f64::INFINITY;
        let mut prev_corr = f64::INFINITY;
        for r in [1.0, 10.0, 100.0] {
            let rep = build_cutoff(r, 1.0, 1.0, 4).unwrap();
            assert!(rep.on_domain_max_error <= 1e-10, "{}", rep.on_domain_max_error);
            assert!(
                rep.total <= rep.gaussian_integral + rep.correction_integral + 1e-12,
                "triangle inequality"
            );
            assert!(rep.total < prev_total, "total {} !< {}", rep.total, prev_total);
            assert!(rep.correction_integral < prev_corr);
            prev_total = rep.total;
            prev_corr = rep.correction_integral;
        }
        assert!(build_cutoff(1.0, 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn fs_equality_gaussian_s0() {
        let domain = BoxDomain::symmetric_cube(1);
        let quad = build_quadrature(&domain, 48, QuadKind::TensorGauss).unwrap();
        let pair = FourierPair::gaussian();
        let config = SpectralConfig::new(domain, 0.0, 0.25, 2.0).unwrap();
        let out = fs_equality_experiment(&pair, &config, &quad, 4.0, 32, &SolverOptions::default())
            .unwrap();
        assert!(out.report.upper <= out.spectral.value * 1.1);
        assert_relative_eq!(out.spectral.value, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn fs_atom_targets() {
        let domain = BoxDomain::symmetric_cube(1);
        let quad = build_quadrature(&domain, 48, QuadKind::TensorGauss).unwrap();
        for s in [0.0, 1.0] {
            let config = SpectralConfig::new(domain.clone(), s, 0.5, 2.0).unwrap();
            // A dictionary atom itself.
            let atom = SpectralAtom::new(s, vec![1.0]).unwrap();
            let f = atom.to_grid(&quad);
            let (report, _) = variation_upper(&f, &config, &SolverOptions::default()).unwrap();
            assert!(report.converged);
            assert!(report.upper <= 1.05, "s = {s}: atom upper {}", report.upper);

            // A raw mode costs the inverse amplitude.
            let mode = GridFunction::sample(&quad, |x| {
                Complex64::from_polar(1.0, 2.0 * PI * x[0])
            })
            .unwrap();
            let (report, _) = variation_upper(&mode, &config, &SolverOptions::default()).unwrap();
            assert!(report.converged);
            let scaling = 2.0f64.powf(s);
            assert!(
                report.upper <= scaling * 1.05,
                "s = {s}: mode upper {} vs {}",
                report.upper,
                scaling
            );
        }
    }

    #[test]
    fn inversion_check_rejects_mismatched_pairs() {
        let domain = BoxDomain::symmetric_cube(1);
        let bad = FourierPair::new(
            1,
            Arc::new(|x: &[f64]| (-x[0] * x[0] / 2.0).exp()),
            // Off by a factor of 2.
            Arc::new(|xi: &[f64]| {
                Complex64::new(
                    2.0 * (2.0 * PI).sqrt() * (-2.0 * PI * PI * xi[0] * xi[0]).exp(),
                    0.0,
                )
            }),
            1.0,
            DecayEnvelope::Gaussian {
                amplitude: 2.0 * (2.0 * PI).sqrt(),
                rate: 2.0 * PI * PI,
            },
            &domain,
            4.0,
        );
        assert!(matches!(bad, Err(Error::InversionCheck(_))));
    }
}
