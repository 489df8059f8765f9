//! Random-sampling compression of representations and orthogonal greedy
//! selection, with rate measurement against the `K_D · M · n^{-1/2}` bound.
//!
//! Sampling draws atoms i.i.d. from the normalized coefficient law of a
//! known representation and reweights them to `±M/n`, which keeps the mass
//! exactly `M` and matches the target in expectation. Averaged over seeds
//! the error decays like `n^{-1/2}`; the orthogonal greedy variant projects
//! fully at every step and does at least as well on shared benchmarks.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dictionaries::{Atom, Family};
use crate::domain::{GridFunction, Quadrature};
use crate::error::Error;
use crate::numfmt::f64_17;
use crate::scalar::Scalar;
use crate::varnorm::{refine_atom, scan_best_atom, GridCache, SparseCombination};

/// Draws `n` atoms i.i.d. from the law `|aᵢ|/M` with deterministic seeding
/// and returns the combination with coefficients `uᵢ · M/n`, where `uᵢ` is
/// the unit phase (sign) of the drawn coefficient.
///
/// The output mass is exactly `M` for every `n` and seed, and the output
/// equals the input representation in expectation.
pub fn maurey_sample<A: Atom>(
    representation: &SparseCombination<A>,
    n: usize,
    seed: u64,
) -> Result<SparseCombination<A>, Error> {
    assert!(n >= 1, "sample size must be positive");
    let mass = representation.l1_mass();
    if mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    // Cumulative law over |a_i| / M.
    let mut cumulative = Vec::with_capacity(representation.len());
    let mut acc = 0.0;
    for c in representation.coefficients() {
        acc += c.modulus();
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = mass / n as f64;
    let mut atoms = Vec::with_capacity(n);
    let mut coefficients = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random::<f64>() * acc;
        let idx = cumulative.partition_point(|&c| c <= u).min(representation.len() - 1);
        let coeff = representation.coefficients()[idx];
        let phase = coeff.scale(1.0 / coeff.modulus());
        atoms.push(representation.atoms()[idx].clone());
        coefficients.push(phase.scale(weight));
    }
    Ok(SparseCombination::new(atoms, coefficients))
}

/// Per-step output of the orthogonal greedy loop.
pub struct GreedyResult<A: Atom> {
    pub combination: SparseCombination<A>,
    /// `L²` error after each step; nonincreasing by the projection property.
    pub errors: Vec<f64>,
}

/// Orthogonal greedy selection: pick the grid atom (with local refinement)
/// best correlated with the residual, then replace all coefficients by the
/// least-squares projection of `f` onto the span of the selected atoms.
///
/// The normal equations carry a diagonal regularization of `1e-12` times
/// the Gram trace; a failed solve after regularization is an error.
pub fn orthogonal_greedy<F: Family>(
    f: &GridFunction<<F::A as Atom>::Value>,
    family: &F,
    n: usize,
    refine_steps: usize,
) -> Result<GreedyResult<F::A>, Error> {
    let quad = Arc::clone(f.quadrature());
    let w = quad.weights();
    let cache = GridCache::build(family, &quad)?;
    let mut atoms: Vec<F::A> = Vec::new();
    let mut values: Vec<Vec<<F::A as Atom>::Value>> = Vec::new();
    let mut coef: Vec<<F::A as Atom>::Value> = Vec::new();
    let mut errors = Vec::with_capacity(n);
    let mut residual: Vec<<F::A as Atom>::Value> =
        f.values().iter().map(|&v| -v).collect();

    for _ in 0..n {
        let wr: Vec<_> = residual
            .iter()
            .zip(w)
            .map(|(&r, &wj)| r.scale(wj))
            .collect();
        let Some(scan) = scan_best_atom(&cache, &wr) else {
            break;
        };
        let score = |atom: &F::A| -> f64 {
            let mut dot = <F::A as Atom>::Value::ZERO;
            let mut norm_sq = 0.0;
            for ((x, &wrj), &wj) in quad.nodes_iter().zip(&wr).zip(w) {
                let h = atom.eval(x);
                dot += wrj * h.conj();
                norm_sq += wj * h.modulus_sq();
            }
            if norm_sq.sqrt() < 1e-14 {
                f64::NEG_INFINITY
            } else {
                dot.modulus() / norm_sq.sqrt()
            }
        };
        let refined = refine_atom(family, cache.atoms[scan.index].clone(), score, refine_steps);
        values.push(quad.nodes_iter().map(|x| refined.eval(x)).collect());
        atoms.push(refined);

        coef = project(w, &values, f.values())?;

        // Residual = sum a_i h_i - f on the grid.
        residual = f.values().iter().map(|&v| -v).collect();
        for (vi, &a) in values.iter().zip(&coef) {
            for (rj, &hj) in residual.iter_mut().zip(vi) {
                *rj += a * hj;
            }
        }
        let err = residual
            .iter()
            .zip(w)
            .map(|(&r, &wj)| wj * r.modulus_sq())
            .sum::<f64>()
            .max(0.0)
            .sqrt();
        errors.push(err);
    }
    Ok(GreedyResult {
        combination: SparseCombination::new(atoms, coef),
        errors,
    })
}

/// Least-squares coefficients via regularized normal equations, solved in
/// the real embedding so the same path serves real and complex atoms.
fn project<S: Scalar>(
    w: &[f64],
    values: &[Vec<S>],
    target: &[S],
) -> Result<Vec<S>, Error> {
    let m = values.len();
    let mut gram = vec![vec![S::ZERO; m]; m];
    let mut rhs = vec![S::ZERO; m];
    let mut trace = 0.0;
    for i in 0..m {
        for j in i..m {
            let mut g = S::ZERO;
            for ((&wj, &a), &b) in w.iter().zip(&values[i]).zip(&values[j]) {
                g += (a * b.conj()).scale(wj);
            }
            gram[i][j] = g;
            gram[j][i] = g.conj();
            if i == j {
                trace += g.re();
            }
        }
        let mut b = S::ZERO;
        for ((&wj, &h), &t) in w.iter().zip(&values[i]).zip(target) {
            b += (h * t.conj()).scale(wj);
        }
        rhs[i] = b;
    }
    let reg = 1e-12 * trace;
    // Solve M y = b in the embedding [[A, -B], [B, A]]; coefficients are
    // the conjugates of y.
    let mut e = DMatrix::<f64>::zeros(2 * m, 2 * m);
    let mut rv = DVector::<f64>::zeros(2 * m);
    for i in 0..m {
        for j in 0..m {
            let g = gram[i][j];
            e[(i, j)] = g.re();
            e[(m + i, m + j)] = g.re();
            e[(i, m + j)] = -g.im();
            e[(m + i, j)] = g.im();
        }
        e[(i, i)] += reg;
        e[(m + i, m + i)] += reg;
        rv[i] = rhs[i].re();
        rv[m + i] = rhs[i].im();
    }
    let solved = e.lu().solve(&rv).ok_or(Error::GramSolveFailed)?;
    // Coefficients are the conjugates of the solve output.
    Ok((0..m)
        .map(|i| S::from_parts(solved[i], -solved[m + i]))
        .collect())
}

/// Measured decay of sampling errors across atom counts.
#[derive(Clone, Debug)]
pub struct RateSeries {
    pub n: Vec<usize>,
    pub mean_error: Vec<f64>,
    pub std_error: Vec<f64>,
    /// `K_D · M · n^{-1/2}` per row.
    pub bound: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// True when zero errors forced the fit onto a prefix.
    pub truncated: bool,
}

impl RateSeries {
    /// Columns: `n, mean_error, std_error, bound, slope`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,mean_error,std_error,bound,slope\n");
        for i in 0..self.n.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.n[i],
                f64_17(self.mean_error[i]),
                f64_17(self.std_error[i]),
                f64_17(self.bound[i]),
                f64_17(self.slope)
            ));
        }
        out
    }
}

/// Least-squares slope of `log error` against `log n`.
#[derive(Clone, Copy, Debug)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub truncated: bool,
}

/// Fits the log-log decay rate. Zero errors (exact recovery) truncate the
/// fit to the strictly positive prefix and flag the result.
pub fn rate_fit(n: &[usize], errors: &[f64]) -> Result<RateFit, Error> {
    assert_eq!(n.len(), errors.len(), "length mismatch");
    if n.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: n.len(),
        });
    }
    let usable = errors.iter().take_while(|&&e| e > 0.0).count();
    if usable < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: usable,
        });
    }
    let xs: Vec<f64> = n[..usable].iter().map(|&v| (v as f64).ln()).collect();
    let ys: Vec<f64> = errors[..usable].iter().map(|&e| e.ln()).collect();
    let k = usable as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = k * sxx - sx * sx;
    let slope = (k * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / k;
    Ok(RateFit {
        slope,
        intercept,
        truncated: usable < n.len(),
    })
}

/// Full sampling pipeline: for each atom count, draws one sample per seed,
/// measures `‖f − f_n‖`, and fits the log-log slope of the seed means.
///
/// Trials run in parallel but reduce in fixed seed order, so the series is
/// identical across thread counts.
pub fn maurey_rate_series<A: Atom>(
    representation: &SparseCombination<A>,
    quad: &Arc<Quadrature>,
    kd: f64,
    ns: &[usize],
    seeds: &[u64],
) -> Result<RateSeries, Error> {
    assert!(!seeds.is_empty(), "need at least one seed");
    let f = representation.synth(quad);
    let mass = representation.l1_mass();
    let mut mean_error = Vec::with_capacity(ns.len());
    let mut std_error = Vec::with_capacity(ns.len());
    let mut bound = Vec::with_capacity(ns.len());
    for &n in ns {
        let errs: Vec<f64> = seeds
            .par_iter()
            .map(|&seed| {
                let sample = maurey_sample(representation, n, seed)?;
                Ok(sample.synth(quad).distance(&f))
            })
            .collect::<Result<Vec<f64>, Error>>()?;
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let var = if errs.len() > 1 {
            errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (errs.len() - 1) as f64
        } else {
            0.0
        };
        mean_error.push(mean);
        std_error.push(var.sqrt());
        bound.push(kd * mass / (n as f64).sqrt());
    }
    let fit = rate_fit(ns, &mean_error)?;
    Ok(RateSeries {
        n: ns.to_vec(),
        mean_error,
        std_error,
        bound,
        slope: fit.slope,
        intercept: fit.intercept,
        truncated: fit.truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionaries::{atom_norm_bound, RidgeAtom, RidgeConfig};
    use crate::domain::{build_quadrature, BoxDomain, QuadKind};
    use approx::assert_relative_eq;

    fn line_setup() -> (Arc<Quadrature>, RidgeConfig) {
        let domain = BoxDomain::symmetric_cube(1);
        let quad = build_quadrature(&domain, 24, QuadKind::TensorGauss).unwrap();
        let cfg = RidgeConfig::new(domain, 1, -3.0, 3.0, 2, 21).unwrap();
        (quad, cfg)
    }

    fn small_benchmark(quad: &Arc<Quadrature>, cfg: &RidgeConfig) -> SparseCombination<RidgeAtom> {
        let grid = cfg.grid_atoms().unwrap();
        let picks = [2usize, 7, 13, 19, 25, 31, 36, 40];
        let coeffs = [1.0, -0.6, 0.4, 0.9, -0.3, 0.5, -0.8, 0.2];
        let _ = quad;
        SparseCombination::new(
            picks.iter().map(|&i| grid[i].clone()).collect(),
            coeffs.to_vec(),
        )
    }

    #[test]
    fn sample_of_single_atom_is_exact() {
        let (quad, cfg) = line_setup();
        let atom = cfg.grid_atoms().unwrap()[5].clone();
        let rep = SparseCombination::new(vec![atom], vec![-0.7]);
        let f = rep.synth(&quad);
        for n in [1usize, 3, 16] {
            let s = maurey_sample(&rep, n, 42).unwrap();
            assert_relative_eq!(s.l1_mass(), 0.7, max_relative = 1e-14);
            assert!(s.synth(&quad).distance(&f) < 1e-14);
        }
    }

    #[test]
    fn sample_mass_is_exact_and_seeded() {
        let (quad, cfg) = line_setup();
        let rep = small_benchmark(&quad, &cfg);
        let mass = rep.l1_mass();
        for seed in [0u64, 1, 99] {
            for n in [2usize, 5, 64] {
                let s = maurey_sample(&rep, n, seed).unwrap();
                assert_eq!(s.len(), n);
                assert_relative_eq!(s.l1_mass(), mass, max_relative = 1e-12);
            }
        }
        let a = maurey_sample(&rep, 32, 7).unwrap();
        let b = maurey_sample(&rep, 32, 7).unwrap();
        for (x, y) in a.coefficients().iter().zip(b.coefficients()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in a.atoms().iter().zip(b.atoms()) {
            assert_eq!(x.b().to_bits(), y.b().to_bits());
        }
        assert!(matches!(
            maurey_sample(&SparseCombination::<RidgeAtom>::empty(), 4, 0),
            Err(Error::ZeroMass)
        ));
    }

    #[test]
    fn sample_errors_beat_the_bound() {
        let (quad, cfg) = line_setup();
        let rep = small_benchmark(&quad, &cfg);
        let kd = atom_norm_bound(&cfg, &quad);
        let seeds: Vec<u64> = (0..20).collect();
        let series = maurey_rate_series(&rep, &quad, kd, &[4, 16, 64, 256], &seeds).unwrap();
        for i in 0..series.n.len() {
            assert!(
                series.mean_error[i] <= series.bound[i],
                "n = {}: {} > {}",
                series.n[i],
                series.mean_error[i],
                series.bound[i]
            );
        }
        assert!(series.slope <= -0.4, "slope {}", series.slope);
    }

    #[test]
    fn sample_average_converges_to_target() {
        let (quad, cfg) = line_setup();
        let rep = small_benchmark(&quad, &cfg);
        let f = rep.synth(&quad);
        let kd = atom_norm_bound(&cfg, &quad);
        let mass = rep.l1_mass();
        let trials = 200usize;
        let n = 64usize;
        let mut mean = GridFunction::zeros(&quad);
        for seed in 0..trials as u64 {
            let s = maurey_sample(&rep, n, seed).unwrap();
            mean.axpy(1.0 / trials as f64, &s.synth(&quad));
        }
        let limit = 3.0 * kd * mass / ((trials * n) as f64).sqrt();
        assert!(mean.distance(&f) <= limit, "{} > {}", mean.distance(&f), limit);
    }

    #[test]
    fn greedy_recovers_grid_atom_in_one_step() {
        let (quad, cfg) = line_setup();
        let atom = cfg.grid_atoms().unwrap()[9].clone();
        let f = atom.to_grid(&quad);
        let out = orthogonal_greedy(&f, &cfg, 3, 20).unwrap();
        assert!(out.errors[0] < 1e-10, "first error {}", out.errors[0]);
    }

    #[test]
    fn greedy_errors_nonincreasing() {
        let (quad, cfg) = line_setup();
        let f = GridFunction::sample(&quad, |x| (3.0 * x[0]).sin() + 0.4 * x[0]).unwrap();
        let out = orthogonal_greedy(&f, &cfg, 12, 20).unwrap();
        for pair in out.errors.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-10), "{:?}", pair);
        }
    }

    #[test]
    fn greedy_beats_maurey_bound_on_known_mass() {
        let (quad, cfg) = line_setup();
        let rep = small_benchmark(&quad, &cfg);
        let f = rep.synth(&quad);
        let kd = atom_norm_bound(&cfg, &quad);
        let mass = rep.l1_mass();
        let out = orthogonal_greedy(&f, &cfg, 8, 20).unwrap();
        for (i, &err) in out.errors.iter().enumerate() {
            let n = i + 1;
            assert!(
                err <= kd * mass / (n as f64).sqrt(),
                "step {n}: {err}"
            );
        }
    }

    #[test]
    fn rate_fit_examples() {
        let ns = [4usize, 16, 64, 256];
        let exact: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powf(-0.5)).collect();
        let fit = rate_fit(&ns, &exact).unwrap();
        assert_relative_eq!(fit.slope, -0.5, epsilon = 1e-12);
        assert!(!fit.truncated);

        let flat = [2.0, 2.0, 2.0, 2.0];
        let fit = rate_fit(&ns, &flat).unwrap();
        assert_relative_eq!(fit.slope, 0.0, epsilon = 1e-12);

        let truncated = [1.0, 0.5, 0.0, 0.0];
        let fit = rate_fit(&ns, &truncated).unwrap();
        assert!(fit.truncated);
        assert!(fit.slope < 0.0);

        assert!(rate_fit(&[4, 8], &[1.0, 0.5]).is_err());
        assert!(rate_fit(&ns, &[0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn rate_csv_shape() {
        let (quad, cfg) = line_setup();
        let rep = small_benchmark(&quad, &cfg);
        let kd = atom_norm_bound(&cfg, &quad);
        let series = maurey_rate_series(&rep, &quad, kd, &[4, 16, 64], &[0, 1, 2]).unwrap();
        let csv = series.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "n,mean_error,std_error,bound,slope");
        assert_eq!(csv.lines().count(), 4);
    }
}
