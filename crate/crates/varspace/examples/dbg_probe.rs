use varspace::domain::{build_quadrature, BoxDomain, QuadKind};
use varspace::targets;
use varspace::varnorm::{variation_upper, SolverOptions};
use varspace::RidgeConfig;

fn main() {
    let domain = BoxDomain::symmetric_cube(1);
    let quad = build_quadrature(&domain, 24, QuadKind::TensorGauss).unwrap();
    let cfg = RidgeConfig::new(domain.clone(), 1, -3.0, 3.0, 2, 41).unwrap();
    let rep = targets::random_p1_combination(&domain, 5, 104);
    for (a, c) in rep.atoms().iter().zip(rep.coefficients()) {
        println!("target: dir={:+.0} b={:+.4} coeff={:+.4}", a.omega()[0], a.b(), c);
    }
    let f = rep.synth(&quad);
    let (report, comb) = variation_upper(&f, &cfg, &SolverOptions::default()).unwrap();
    println!("upper={:.6} mass_true={:.6} conv={} resid={:.3e} eps={:.3e}",
        report.upper, rep.l1_mass(), report.converged, report.residual, report.epsilon);
    println!("final atoms: {}", comb.len());
}
