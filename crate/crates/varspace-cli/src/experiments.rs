//! One function per experiment subcommand. Each writes its artifacts into
//! the output directory and returns their names for the manifest.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use varspace::dictionaries::Atom;
use varspace::domain::{build_quadrature, GridFunction, Quadrature};
use varspace::onedim::{default_suite, equivalence_csv, equivalence_experiment, EquivalenceSettings};
use varspace::spectral::CutoffReport;
use varspace::targets;
use varspace::{
    atom_norm_bound, build_cutoff, decompose_barron_atom, fs_equality_experiment,
    maurey_rate_series, validate_offsets, variation_lower, variation_upper, BoxDomain,
    DictionaryConfig, Error, FourierPair, RidgeAtom, SolverOptions, SparseCombination,
    SpectralConfig,
};

use crate::config::Config;
use crate::{f17, write_artifact, RunError, RunErrorKind};

pub fn dispatch(
    name: &str,
    cfg: &Config,
    out_dir: &Path,
    quiet: bool,
) -> Result<Vec<String>, RunError> {
    match name {
        "estimate-norm" => estimate_norm(cfg, out_dir, quiet),
        "maurey-rate" => maurey_rate(cfg, out_dir, quiet),
        "onedim-equiv" => onedim_equiv(cfg, out_dir, quiet),
        "spectral-equiv" => spectral_equiv(cfg, out_dir, quiet),
        "cutoff" => cutoff(cfg, out_dir, quiet),
        "barron-decomp" => barron_decomp(cfg, out_dir, quiet),
        other => Err(RunError::config(format!("unknown experiment '{other}'"))),
    }
}

fn build_quad(cfg: &Config, domain: &BoxDomain) -> Result<Arc<Quadrature>, RunError> {
    let (kind, level) = cfg.quadrature_spec()?;
    build_quadrature(domain, level, kind).map_err(|e| RunError::config(format!("quadrature: {e}")))
}

fn real_target(
    cfg: &Config,
    domain: &BoxDomain,
    quad: &Arc<Quadrature>,
) -> Result<(GridFunction<f64>, Option<SparseCombination<RidgeAtom>>), RunError> {
    let section = cfg
        .target
        .as_ref()
        .ok_or_else(|| RunError::config("missing [target] section".into()))?;
    match section.kind.as_str() {
        "p1-atom" => {
            let b = section.offset.unwrap_or(0.0);
            let mut omega = vec![0.0; domain.dim()];
            omega[0] = 1.0;
            let atom = RidgeAtom::new(1, omega, b)
                .map_err(|e| RunError::config(format!("target: {e}")))?;
            let comb = SparseCombination::new(vec![atom], vec![1.0]);
            Ok((comb.synth(quad), Some(comb)))
        }
        "p1-random" => {
            let count = section
                .count
                .ok_or_else(|| RunError::config("target.count is required".into()))?;
            let seed = cfg.seed.or(section.seed).unwrap_or(0);
            let comb = targets::random_p1_combination(domain, count, seed);
            Ok((comb.synth(quad), Some(comb)))
        }
        "coordinate" => {
            let axis = section.axis.unwrap_or(0);
            if axis >= domain.dim() {
                return Err(RunError::config(format!(
                    "target.axis {axis} out of range for dimension {}",
                    domain.dim()
                )));
            }
            let f = GridFunction::sample(quad, |x| x[axis])?;
            Ok((f, None))
        }
        "gaussian" => {
            let f = GridFunction::sample(quad, |x| {
                (-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp()
            })?;
            Ok((f, None))
        }
        "combination-file" => {
            let path = section
                .path
                .as_ref()
                .ok_or_else(|| RunError::config("target.path is required".into()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::config(format!("cannot read {path}: {e}")))?;
            let comb = SparseCombination::<RidgeAtom>::from_json(&text)
                .map_err(|e| RunError::config(format!("target file: {e}")))?;
            Ok((comb.synth(quad), Some(comb)))
        }
        other => Err(RunError::config(format!("unknown target kind '{other}'"))),
    }
}

fn complex_target(
    cfg: &Config,
    config: &SpectralConfig,
    quad: &Arc<Quadrature>,
) -> Result<GridFunction<Complex64>, RunError> {
    let section = cfg
        .target
        .as_ref()
        .ok_or_else(|| RunError::config("missing [target] section".into()))?;
    match section.kind.as_str() {
        "gaussian" => Ok(GridFunction::sample(quad, |x| {
            Complex64::new((-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp(), 0.0)
        })?),
        "fourier-atom" => {
            let xi = section
                .xi
                .clone()
                .ok_or_else(|| RunError::config("target.xi is required".into()))?;
            let atom = varspace::SpectralAtom::new(config.s, xi)
                .map_err(|e| RunError::config(format!("target: {e}")))?;
            Ok(atom.to_grid(quad))
        }
        other => Err(RunError::config(format!(
            "target kind '{other}' is not available for the spectral dictionary"
        ))),
    }
}

fn estimate_norm(cfg: &Config, out_dir: &Path, quiet: bool) -> Result<Vec<String>, RunError> {
    let domain = cfg.domain()?;
    let quad = build_quad(cfg, &domain)?;
    let dictionary = cfg.dictionary(&domain)?;
    let mut outputs = Vec::new();
    let report = match &dictionary {
        DictionaryConfig::Ridge(ridge) => {
            let (f, comb) = real_target(cfg, &domain, &quad)?;
            let options = cfg.solver_options(f.norm_l2());
            let (mut report, solution) = variation_upper(&f, ridge, &options)?;
            if f.norm_l2() > 0.0 {
                report.lower = variation_lower(&f, ridge, &f)?.value;
            }
            write_artifact(out_dir, "combination.json", &solution.to_json(), &mut outputs)?;
            if let Some(known) = comb {
                write_artifact(out_dir, "target.json", &known.to_json(), &mut outputs)?;
            }
            report
        }
        DictionaryConfig::Spectral(spectral) => {
            let f = complex_target(cfg, spectral, &quad)?;
            let options = cfg.solver_options(f.norm_l2());
            let (mut report, solution) = variation_upper(&f, spectral, &options)?;
            if f.norm_l2() > 0.0 {
                report.lower = variation_lower(&f, spectral, &f)?.value;
            }
            write_artifact(out_dir, "combination.json", &solution.to_json(), &mut outputs)?;
            report
        }
    };
    write_artifact(out_dir, "report.json", &report.to_json(), &mut outputs)?;
    write_artifact(out_dir, "iterations.csv", &report.trace_csv(), &mut outputs)?;
    if !quiet {
        eprintln!(
            "[estimate-norm] upper {:.6}, lower {:.6}, residual {:.3e}, converged {}",
            report.upper, report.lower, report.residual, report.converged
        );
    }
    if !report.converged {
        return Err(RunError {
            kind: RunErrorKind::Run,
            message: format!(
                "solver exhausted its budget at residual {:.3e} (tolerance {:.3e})",
                report.residual, report.epsilon
            ),
        });
    }
    Ok(outputs)
}

fn maurey_rate(cfg: &Config, out_dir: &Path, quiet: bool) -> Result<Vec<String>, RunError> {
    let section = cfg
        .maurey
        .as_ref()
        .ok_or_else(|| RunError::config("missing [maurey] section".into()))?;
    let domain = cfg.domain()?;
    let quad = build_quad(cfg, &domain)?;
    let dictionary = cfg.dictionary(&domain)?;
    let DictionaryConfig::Ridge(ridge) = &dictionary else {
        return Err(RunError::config(
            "maurey-rate needs a ridge dictionary".into(),
        ));
    };
    let kd = atom_norm_bound(ridge, &quad);
    let representation = targets::random_p1_combination(&domain, section.target_count, section.target_seed);
    let seed_base = cfg.seed.or(section.seed_base).unwrap_or(0);
    let seeds: Vec<u64> = (0..section.seeds as u64).map(|i| seed_base + i).collect();
    let series = maurey_rate_series(&representation, &quad, kd, &section.n_values, &seeds)?;
    let mut outputs = Vec::new();
    write_artifact(out_dir, "rate.csv", &series.to_csv(), &mut outputs)?;
    let summary = serde_json::json!({
        "slope": series.slope,
        "intercept": series.intercept,
        "truncated": series.truncated,
        "kd": kd,
        "mass": representation.l1_mass(),
        "atoms": representation.len(),
    });
    write_artifact(
        out_dir,
        "rate.json",
        &serde_json::to_string_pretty(&summary).unwrap(),
        &mut outputs,
    )?;
    if !quiet {
        eprintln!(
            "[maurey-rate] slope {:.4}, K_D {:.4}, mass {:.4}",
            series.slope,
            kd,
            representation.l1_mass()
        );
    }
    Ok(outputs)
}

fn onedim_equiv(cfg: &Config, out_dir: &Path, quiet: bool) -> Result<Vec<String>, RunError> {
    let section = cfg
        .onedim
        .as_ref()
        .ok_or_else(|| RunError::config("missing [onedim] section".into()))?;
    let mut settings = EquivalenceSettings {
        base_level: section.level,
        c1: section.c1,
        c2: section.c2,
        offsets: section.offsets,
        solver: SolverOptions::default(),
    };
    if let Some(budget) = section.budget {
        settings.solver.budget = budget;
    }
    let rows = equivalence_experiment(&default_suite(), &settings)?;
    let mut outputs = Vec::new();
    write_artifact(out_dir, "equivalence.csv", &equivalence_csv(&rows), &mut outputs)?;
    if !quiet {
        for row in &rows {
            eprintln!(
                "[onedim-equiv] {:<14} k={} ratio {:.4} ({})",
                row.id,
                row.k,
                row.ratio,
                if row.converged { "ok" } else { "failed" }
            );
        }
    }
    Ok(outputs)
}

fn spectral_equiv(cfg: &Config, out_dir: &Path, quiet: bool) -> Result<Vec<String>, RunError> {
    let section = cfg
        .spectral_equiv
        .as_ref()
        .ok_or_else(|| RunError::config("missing [spectral_equiv] section".into()))?;
    let domain = cfg.domain()?;
    let quad = build_quad(cfg, &domain)?;
    let pair = FourierPair::by_name(&section.pair)
        .ok_or_else(|| RunError::config(format!("unknown Fourier pair '{}'", section.pair)))?;
    let mut csv = String::from("pair,s,variation_upper,spectral_value,gap,status\n");
    for &s in &section.s_values {
        let config = SpectralConfig::new(domain.clone(), s, section.xi_step, section.xi_radius)
            .map_err(|e| RunError::config(format!("spectral grid: {e}")))?;
        let row = fs_equality_experiment(
            &pair,
            &config,
            &quad,
            section.r_max,
            section.level,
            &SolverOptions::default(),
        );
        match row {
            Ok(out) => {
                csv.push_str(&format!(
                    "{},{},{},{},{},ok\n",
                    section.pair,
                    f17(s),
                    f17(out.report.upper),
                    f17(out.spectral.value),
                    f17(out.gap)
                ));
                if !quiet {
                    eprintln!(
                        "[spectral-equiv] s={s}: upper {:.6} vs spectral {:.6}",
                        out.report.upper, out.spectral.value
                    );
                }
            }
            Err(Error::EqualityGap { upper, certified }) => {
                csv.push_str(&format!(
                    "{},{},{},{},{},failed\n",
                    section.pair,
                    f17(s),
                    f17(upper),
                    f17(certified),
                    f17(upper - certified)
                ));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut outputs = Vec::new();
    write_artifact(out_dir, "spectral.csv", &csv, &mut outputs)?;
    Ok(outputs)
}

fn cutoff(cfg: &Config, out_dir: &Path, quiet: bool) -> Result<Vec<String>, RunError> {
    let section = cfg
        .cutoff
        .as_ref()
        .ok_or_else(|| RunError::config("missing [cutoff] section".into()))?;
    let mut csv = String::from(CutoffReport::csv_header());
    csv.push('\n');
    for &r in &section.r_values {
        let report = build_cutoff(r, section.s, section.l, section.smoothness)?;
        csv.push_str(&report.to_csv_row());
        csv.push('\n');
        if !quiet {
            eprintln!(
                "[cutoff] R={r}: gaussian {:.6}, correction {:.6}, total {:.6}",
                report.gaussian_integral, report.correction_integral, report.total
            );
        }
    }
    let mut outputs = Vec::new();
    write_artifact(out_dir, "cutoff.csv", &csv, &mut outputs)?;
    Ok(outputs)
}

fn barron_decomp(cfg: &Config, out_dir: &Path, quiet: bool) -> Result<Vec<String>, RunError> {
    use rand::SeedableRng;
    let section = cfg
        .barron
        .as_ref()
        .ok_or_else(|| RunError::config("missing [barron] section".into()))?;
    let seed = cfg.seed.unwrap_or(section.seed);
    let sample_level = section.sample_level.unwrap_or(9);
    let mut csv = String::from("dim,index,atoms,l1_mass,max_error\n");
    for &dim in &section.dims {
        let domain = BoxDomain::symmetric_cube(dim);
        let reach = domain.max_point_norm();
        let (c1, c2) = (-(reach + 0.5), reach + 1.5);
        let check = validate_offsets(&domain, c1, c2);
        if !check.pass {
            return Err(RunError::config(format!(
                "offset window invalid for dim {dim}"
            )));
        }
        let sample = build_quadrature(&domain, sample_level, varspace::QuadKind::Qmc)
            .map_err(|e| RunError::config(format!("sample grid: {e}")))?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(dim as u64));
        for index in 0..section.per_dim {
            let atom = targets::random_barron_atom(dim, &mut rng);
            let comb = decompose_barron_atom(&atom, &domain, c1, c2)?;
            let mut max_error = 0.0f64;
            for x in sample.nodes_iter() {
                let direct = atom.eval(x);
                let rebuilt = comb.eval(x);
                max_error = max_error.max((direct - rebuilt).abs());
            }
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                dim,
                index,
                comb.len(),
                f17(comb.l1_mass()),
                f17(max_error)
            ));
        }
        if !quiet {
            eprintln!("[barron-decomp] dim {dim}: {} atoms decomposed", section.per_dim);
        }
    }
    let mut outputs = Vec::new();
    write_artifact(out_dir, "decomp.csv", &csv, &mut outputs)?;
    Ok(outputs)
}
