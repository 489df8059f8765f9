//! Acceptance suite: every numbered criterion runs as its own test at its
//! stated tolerance and prints one pass/fail line. Tolerances are pinned
//! here, not configurable.

use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;

use varspace::dictionaries::Atom;
use varspace::domain::{build_quadrature, GridFunction, QuadKind, Quadrature};
use varspace::onedim::{
    default_smooth_suite, default_suite, equivalence_experiment, peano_residual,
    EquivalenceSettings,
};
use varspace::targets;
use varspace::{
    atom_norm_bound, build_cutoff, decompose_barron_atom, embed_ridge_in_barron,
    fs_equality_experiment, gaussian_factor_integral, gram_rank, maurey_rate_series,
    peano_synthesis, quotient_variation_upper, radon_style_synthesis, validate_offsets,
    variation_lower, variation_upper, BoxDomain, FourierPair, RidgeAtom, RidgeConfig,
    SolverOptions, SparseCombination, SpectralConfig,
};

fn line_quad(level: u32) -> Arc<Quadrature> {
    build_quadrature(&BoxDomain::symmetric_cube(1), level, QuadKind::TensorGauss).unwrap()
}

fn square_quad(level: u32) -> Arc<Quadrature> {
    build_quadrature(&BoxDomain::symmetric_cube(2), level, QuadKind::TensorGauss).unwrap()
}

fn line_config(offsets: usize) -> RidgeConfig {
    RidgeConfig::new(BoxDomain::symmetric_cube(1), 1, -3.0, 3.0, 2, offsets).unwrap()
}

fn square_config(directions: usize, offsets: usize) -> RidgeConfig {
    RidgeConfig::new(BoxDomain::symmetric_cube(2), 1, -3.0, 3.0, directions, offsets).unwrap()
}

#[test]
fn criterion_01_maurey_rate() {
    let start = Instant::now();
    let (domain, representation) = targets::benchmark_fifty();
    let quad = build_quadrature(&domain, 16, QuadKind::TensorGauss).unwrap();
    let config = square_config(32, 33);
    let kd = atom_norm_bound(&config, &quad);
    let seeds: Vec<u64> = (0..20).collect();
    let ns = [4usize, 16, 64, 256];
    let series = maurey_rate_series(&representation, &quad, kd, &ns, &seeds).unwrap();
    for i in 0..ns.len() {
        assert!(
            series.mean_error[i] <= series.bound[i],
            "n = {}: mean {} exceeds bound {}",
            ns[i],
            series.mean_error[i],
            series.bound[i]
        );
    }
    assert!(series.slope <= -0.4, "fitted slope {}", series.slope);
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 60.0, "runtime {elapsed:.1}s exceeds 60s");
    println!(
        "criterion 01 maurey rate: PASS (slope {:.3}, worst mean/bound {:.3}, {:.1}s)",
        series.slope,
        series
            .mean_error
            .iter()
            .zip(&series.bound)
            .map(|(m, b)| m / b)
            .fold(0.0f64, f64::max),
        elapsed
    );
}

#[test]
fn criterion_02_gauge_sandwich() {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let mut checked = 0usize;

    // Twenty targets with known representations, half on the line and half
    // on the square.
    let quad1 = line_quad(24);
    let cfg1 = line_config(41);
    let domain1 = BoxDomain::symmetric_cube(1);
    for seed in 0..10u64 {
        let count = 1 + (seed as usize % 7);
        let rep = targets::random_p1_combination(&domain1, count, 100 + seed);
        let mass = rep.l1_mass();
        let f = rep.synth(&quad1);
        let (report, _) = variation_upper(&f, &cfg1, &opts).unwrap();
        assert!(report.converged, "seed {seed} did not converge");
        assert!(
            report.upper <= mass * 1.05,
            "seed {seed}: upper {} vs mass {mass}",
            report.upper
        );
        let lower = variation_lower(&f, &cfg1, &f).unwrap().value;
        assert!(lower <= report.upper + 1e-9, "seed {seed}: lower {lower}");
        checked += 1;
    }
    let quad2 = square_quad(16);
    let cfg2 = square_config(24, 25);
    let domain2 = BoxDomain::symmetric_cube(2);
    for seed in 0..10u64 {
        let count = 2 + (seed as usize % 5);
        let rep = targets::random_p1_combination(&domain2, count, 200 + seed);
        let mass = rep.l1_mass();
        let f = rep.synth(&quad2);
        let (report, _) = variation_upper(&f, &cfg2, &opts).unwrap();
        assert!(report.converged, "2d seed {seed} did not converge");
        assert!(
            report.upper <= mass * 1.05,
            "2d seed {seed}: upper {} vs mass {mass}",
            report.upper
        );
        let lower = variation_lower(&f, &cfg2, &f).unwrap().value;
        assert!(lower <= report.upper + 1e-9);
        checked += 1;
    }
    assert_eq!(checked, 20);

    // Homogeneity within 5% relative.
    let rep = targets::random_p1_combination(&domain1, 4, 42);
    let f = rep.synth(&quad1);
    let (base, _) = variation_upper(&f, &cfg1, &opts).unwrap();
    for c in [0.1, 2.0, 10.0] {
        let (scaled, _) = variation_upper(&f.scaled(c), &cfg1, &opts).unwrap();
        let expected = c * base.upper;
        assert!(
            (scaled.upper - expected).abs() <= 0.05 * expected,
            "homogeneity at c = {c}: {} vs {expected}",
            scaled.upper
        );
    }

    // Triangle inequality within 5% relative slack.
    for (sa, sb) in [(300u64, 301u64), (302, 303)] {
        let fa = targets::random_p1_combination(&domain1, 3, sa).synth(&quad1);
        let fb = targets::random_p1_combination(&domain1, 3, sb).synth(&quad1);
        let (ua, _) = variation_upper(&fa, &cfg1, &opts).unwrap();
        let (ub, _) = variation_upper(&fb, &cfg1, &opts).unwrap();
        let (uab, _) = variation_upper(&fa.add(&fb), &cfg1, &opts).unwrap();
        assert!(
            uab.upper <= (ua.upper + ub.upper) * 1.05,
            "triangle: {} vs {} + {}",
            uab.upper,
            ua.upper,
            ub.upper
        );
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 120.0, "runtime {elapsed:.1}s exceeds 120s");
    println!("criterion 02 gauge sandwich: PASS (20 targets, {elapsed:.1}s)");
}

#[test]
fn criterion_03_onedim_equivalence() {
    let start = Instant::now();
    let suite = default_suite();
    assert!(suite.len() >= 8, "suite has {} functions", suite.len());
    let settings = EquivalenceSettings {
        base_level: 24,
        c1: -3.0,
        c2: 3.0,
        offsets: 31,
        solver: SolverOptions::default(),
    };
    let rows = equivalence_experiment(&suite, &settings).unwrap();
    for row in &rows {
        assert!(row.converged, "{}: solver failed", row.id);
        assert!(
            row.ratio >= 0.1 && row.ratio <= 10.0,
            "{}: ratio {} outside [0.1, 10]",
            row.id,
            row.ratio
        );
        if row.id.ends_with("_atom") {
            assert!(
                row.ratio <= 1.05,
                "{}: atom ratio {} exceeds 1.05",
                row.id,
                row.ratio
            );
        }
        assert!(
            (row.refinement_ratio - 1.0).abs() < 0.2,
            "{}: ratio moved {}x under refinement",
            row.id,
            row.refinement_ratio
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 180.0, "runtime {elapsed:.1}s exceeds 180s");
    println!(
        "criterion 03 onedim equivalence: PASS ({} rows, ratios {:.3}..{:.3}, {elapsed:.1}s)",
        rows.len(),
        rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min),
        rows.iter().map(|r| r.ratio).fold(0.0f64, f64::max)
    );
}

/// Mass bound constant for the whole smooth suite (one C, pinned).
const PEANO_MASS_C: f64 = 4.0;

#[test]
fn criterion_04_peano_feasibility() {
    let b_quad = line_quad(32);
    let check_quad = line_quad(64);
    let mut failures = Vec::new();
    let mut worst_mass_ratio = 0.0f64;
    for row in default_smooth_suite() {
        let synthesis = peano_synthesis(&row.profile, row.k, &b_quad, 3.0).unwrap();
        let residual = peano_residual(&row.profile, &synthesis.combination, &check_quad).unwrap();
        let characterization =
            varspace::characterization_norm(&row.profile, row.k).unwrap();
        let mass = synthesis.combination.l1_mass();
        let ratio = mass / characterization;
        worst_mass_ratio = worst_mass_ratio.max(ratio);
        println!(
            "criterion 04 row {:<14} k={}: residual {residual:.3e}, mass/char {ratio:.3}",
            row.id, row.k
        );
        assert!(
            ratio <= PEANO_MASS_C,
            "{}: mass ratio {ratio} exceeds C = {PEANO_MASS_C}",
            row.id
        );
        if residual > 1e-6 {
            failures.push(format!("{} (k={}): residual {residual:.3e}", row.id, row.k));
        }
    }
    if failures.is_empty() {
        println!(
            "criterion 04 peano feasibility: PASS (mass C = {worst_mass_ratio:.2} <= {PEANO_MASS_C})"
        );
    } else {
        println!(
            "criterion 04 peano feasibility: FAIL (residual 1e-6 unattainable at level 32; mass side passed with C = {worst_mass_ratio:.2}): {}",
            failures.join("; ")
        );
    }
    assert!(
        failures.is_empty(),
        "residual tolerance 1e-6 not met at level 32: {}",
        failures.join("; ")
    );
}

#[test]
fn criterion_05_spectral_equality() {
    let start = Instant::now();
    let domain = BoxDomain::symmetric_cube(1);
    let quad = line_quad(48);
    let pair = FourierPair::gaussian();
    for s in [0.0, 1.0] {
        let config = SpectralConfig::new(domain.clone(), s, 0.25, 2.0).unwrap();
        // Errors out when the upper bound exceeds 1.1x the certified value.
        let out = fs_equality_experiment(&pair, &config, &quad, 4.0, 32, &SolverOptions::default())
            .unwrap();
        println!(
            "criterion 05 gaussian s={s}: upper {:.5} vs spectral {:.5}",
            out.report.upper, out.spectral.value
        );
    }
    for s in [0.0, 1.0] {
        let config = SpectralConfig::new(domain.clone(), s, 0.5, 2.0).unwrap();
        let atom = varspace::SpectralAtom::new(s, vec![1.0]).unwrap();
        let f = atom.to_grid(&quad);
        let (report, _) = variation_upper(&f, &config, &SolverOptions::default()).unwrap();
        assert!(report.converged && report.upper <= 1.05, "atom s={s}: {}", report.upper);
        let mode =
            GridFunction::sample(&quad, |x| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x[0]))
                .unwrap();
        let (report, _) = variation_upper(&mode, &config, &SolverOptions::default()).unwrap();
        let scaling = 2.0f64.powf(s);
        assert!(
            report.converged && report.upper <= scaling * 1.05,
            "mode s={s}: {} vs {scaling}",
            report.upper
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 60.0, "runtime {elapsed:.1}s exceeds 60s");
    println!("criterion 05 spectral equality: PASS ({elapsed:.1}s)");
}

#[test]
fn criterion_06_cutoff_lemma() {
    for r in [1.0, 10.0, 100.0] {
        let unit = gaussian_factor_integral(r, 0.0);
        assert!((unit - 1.0).abs() <= 1e-8, "s=0, R={r}: {unit}");
    }
    let s1: Vec<f64> = [1.0, 10.0, 100.0]
        .iter()
        .map(|&r| gaussian_factor_integral(r, 1.0))
        .collect();
    assert!(s1[0] > s1[1] && s1[1] > s1[2], "s=1 values not decreasing: {s1:?}");
    assert!(s1[2] <= 1.1, "s=1, R=100: {}", s1[2]);

    let mut prev_total = f64::INFINITY;
    for r in [1.0, 10.0, 100.0] {
        let report = build_cutoff(r, 1.0, 1.0, 4).unwrap();
        assert!(
            report.on_domain_max_error <= 1e-10,
            "R={r}: on-domain error {}",
            report.on_domain_max_error
        );
        assert!(
            report.total < prev_total,
            "R={r}: total {} not below {prev_total}",
            report.total
        );
        prev_total = report.total;
    }
    println!("criterion 06 cutoff lemma: PASS (s=1 values {s1:?})");
}

#[test]
fn criterion_07_barron_constructions() {
    use rand::SeedableRng;
    let mut decomposed = 0usize;
    let mut embedded = 0usize;
    for dim in [1usize, 2, 4, 8] {
        let domain = BoxDomain::symmetric_cube(dim);
        let reach = domain.max_point_norm();
        let (c1, c2) = (-(reach + 0.5), reach + 1.5);
        assert!(validate_offsets(&domain, c1, c2).pass);
        let sample = build_quadrature(&domain, 9, QuadKind::Qmc).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(40 + dim as u64);
        for _ in 0..250 {
            let atom = targets::random_barron_atom(dim, &mut rng);
            let comb = decompose_barron_atom(&atom, &domain, c1, c2).unwrap();
            assert!(comb.l1_mass() <= 4.0 + 1e-12, "mass {}", comb.l1_mass());
            let mut worst = 0.0f64;
            for x in sample.nodes_iter() {
                worst = worst.max((atom.eval(x) - comb.eval(x)).abs());
            }
            assert!(worst <= 1e-10, "dim {dim}: reconstruction error {worst}");
            decomposed += 1;
        }
        let bound = (dim as f64).sqrt() + c1.abs().max(c2.abs());
        for _ in 0..250 {
            let ridge = targets::random_ridge_atom(dim, 1, c1, c2, &mut rng);
            let (unit, coeff) = embed_ridge_in_barron(&ridge).unwrap();
            assert!(coeff <= bound + 1e-12, "coefficient {coeff} vs {bound}");
            let mut worst = 0.0f64;
            for x in sample.nodes_iter() {
                worst = worst.max((ridge.eval(x) - coeff * unit.eval(x)).abs());
            }
            assert!(worst <= 1e-10, "dim {dim}: embedding error {worst}");
            embedded += 1;
        }
    }
    assert_eq!(decomposed, 1000);
    assert_eq!(embedded, 1000);
    println!("criterion 07 barron constructions: PASS (1000 decompositions, 1000 embeddings)");
}

#[test]
fn criterion_08_polynomial_degeneracy() {
    use rand::Rng;
    use rand::SeedableRng;
    let quad = square_quad(32);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let params: Vec<(f64, f64)> = (0..200)
        .map(|_| {
            (
                rng.random_range(0.0..2.0 * std::f64::consts::PI),
                rng.random_range(-1.2..1.2),
            )
        })
        .collect();
    let squared: Vec<GridFunction<f64>> = params
        .iter()
        .map(|&(theta, b)| {
            GridFunction::sample(&quad, |x| {
                let t = theta.cos() * x[0] + theta.sin() * x[1] + b;
                t * t
            })
            .unwrap()
        })
        .collect();
    let rank_sq = gram_rank(&squared, 1e-8);
    assert!(rank_sq <= 6, "squared activation rank {rank_sq}");

    let relu: Vec<GridFunction<f64>> = params
        .iter()
        .map(|&(theta, b)| {
            RidgeAtom::new(1, vec![theta.cos(), theta.sin()], b)
                .unwrap()
                .to_grid(&quad)
        })
        .collect();
    let rank_relu = gram_rank(&relu, 1e-8);
    assert!(rank_relu >= 50, "relu rank {rank_relu}");
    println!("criterion 08 polynomial degeneracy: PASS (ranks {rank_sq} vs {rank_relu})");
}

#[test]
fn criterion_09_quotient_norm() {
    let quad = line_quad(24);
    let cfg = line_config(31);
    let opts = SolverOptions::default();

    // Degree-k polynomials collapse to the epsilon level.
    let poly1 = GridFunction::sample(&quad, |x| 0.3 - 1.7 * x[0]).unwrap();
    let (q1, _) = quotient_variation_upper(&poly1, &cfg, 1, &opts).unwrap();
    assert!(q1.converged && q1.upper <= 1e-8, "degree-1: {}", q1.upper);
    let cfg2 = RidgeConfig::new(BoxDomain::symmetric_cube(1), 2, -3.0, 3.0, 2, 31).unwrap();
    let poly2 = GridFunction::sample(&quad, |x| 0.5 + x[0] - 0.8 * x[0] * x[0]).unwrap();
    let (q2, _) = quotient_variation_upper(&poly2, &cfg2, 2, &opts).unwrap();
    assert!(q2.converged && q2.upper <= 1e-8, "degree-2: {}", q2.upper);

    // Quotient never above plain on tested targets.
    let atom = RidgeAtom::new(1, vec![1.0], 0.4).unwrap();
    let targets: Vec<GridFunction<f64>> = vec![
        atom.to_grid(&quad),
        atom.to_grid(&quad)
            .add(&GridFunction::sample(&quad, |x| 0.5 + 0.25 * x[0]).unwrap()),
        GridFunction::sample(&quad, |x| x[0]).unwrap(),
    ];
    for (i, f) in targets.iter().enumerate() {
        let (plain, _) = variation_upper(f, &cfg, &opts).unwrap();
        let (quot, _) = quotient_variation_upper(f, &cfg, 1, &opts).unwrap();
        assert!(plain.converged && quot.converged, "target {i}");
        assert!(
            quot.upper <= plain.upper,
            "target {i}: quotient {} above plain {}",
            quot.upper,
            plain.upper
        );
    }

    // Out-of-window offsets leave an empty in-range part and a polynomial
    // remainder.
    let measure = SparseCombination::new(
        vec![
            RidgeAtom::new(1, vec![1.0], -4.0).unwrap(),
            RidgeAtom::new(1, vec![-1.0], -3.5).unwrap(),
            RidgeAtom::new(1, vec![1.0], 5.0).unwrap(),
        ],
        vec![1.5, -0.7, 0.4],
    );
    let out = radon_style_synthesis(&measure, 1, -3.0, 3.0, &quad);
    assert_eq!(out.in_range_mass, 0.0);
    assert!(out.in_range.norm_l2() < 1e-14);
    // Least-squares degree-1 fit against an orthonormal basis.
    let one = GridFunction::sample(&quad, |_| 1.0).unwrap();
    let x = GridFunction::sample(&quad, |p| p[0]).unwrap();
    let e0 = one.scaled(1.0 / one.norm_l2());
    let mut e1 = x.clone();
    e1.axpy(-x.inner(&e0), &e0);
    let e1 = e1.scaled(1.0 / e1.norm_l2());
    let mut fit = GridFunction::zeros(&quad);
    fit.axpy(out.polynomial.inner(&e0), &e0);
    fit.axpy(out.polynomial.inner(&e1), &e1);
    assert!(
        out.polynomial.distance(&fit) <= 1e-8,
        "remainder is not a degree-1 polynomial: {}",
        out.polynomial.distance(&fit)
    );
    println!("criterion 09 quotient norm: PASS");
}

#[test]
fn criterion_10_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_varspace");
    let config_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let workdir = tempfile::tempdir().unwrap();
    let experiments = [
        ("estimate-norm", "estimate_norm.toml", vec!["iterations.csv"]),
        ("maurey-rate", "maurey_rate.toml", vec!["rate.csv"]),
        ("onedim-equiv", "onedim_equiv.toml", vec!["equivalence.csv"]),
        ("spectral-equiv", "spectral_equiv.toml", vec!["spectral.csv"]),
        ("cutoff", "cutoff.toml", vec!["cutoff.csv"]),
        ("barron-decomp", "barron_decomp.toml", vec!["decomp.csv"]),
    ];
    for (subcommand, config, csvs) in experiments {
        let mut contents: Vec<Vec<Vec<u8>>> = Vec::new();
        for run in 0..2 {
            let out = workdir.path().join(format!("{subcommand}-{run}"));
            let status = Command::new(bin)
                .args([
                    subcommand,
                    "--config",
                    config_dir.join(config).to_str().unwrap(),
                    "--out",
                    out.to_str().unwrap(),
                    "--seed",
                    "11",
                    "--quiet",
                ])
                .status()
                .unwrap();
            assert!(status.success(), "{subcommand} run {run} failed");
            contents.push(
                csvs.iter()
                    .map(|name| std::fs::read(out.join(name)).unwrap())
                    .collect(),
            );
            // Every emitted CSV is listed in the manifest.
            let manifest: serde_json::Value = serde_json::from_str(
                &std::fs::read_to_string(out.join("run_manifest.json")).unwrap(),
            )
            .unwrap();
            assert_eq!(manifest["status"], "success");
            for name in &csvs {
                assert!(
                    manifest["outputs"]
                        .as_array()
                        .unwrap()
                        .iter()
                        .any(|v| v == name),
                    "{subcommand}: {name} missing from manifest"
                );
            }
        }
        for (a, b) in contents[0].iter().zip(&contents[1]) {
            assert_eq!(a, b, "{subcommand}: CSV bytes differ between reruns");
        }
    }
    println!("criterion 10 cli determinism: PASS (6 experiments, byte-identical CSVs)");
}
