use std::sync::Arc;
use ymh_cli::output::Check;
use ymh_cli::{run, Experiment, ExperimentConfig, RunError};
use ymh_core::bps::{bps_pair, calc_lemma_violations, fixture, BpsSpec};
use ymh_core::fields::RandomPair;
use ymh_core::forms::{d, integrate_density, DerivScheme, Form, Grid};
use ymh_core::gauge::{beta_form, cap_modulus, energy_densities, z_form, AutoDiff, Pair};
use ymh_core::plateau::{harmonic_section, pde_identity_residual, CgOptions};
use ymh_core::quat::ImQuaternion;
use ymh_core::recovery::{eta_cap, EtaCap};

struct Outcome {
    label: &'static str,
    pass: bool,
    detail: String,
}

fn summarize(checks: &[Check]) -> String {
    checks.iter().map(|c| format!("{}={:.3e}{}", c.name, c.value, if c.pass { "" } else { "!" })).collect::<Vec<_>>().join(" ")
}

fn experiment(label: &'static str, exp: Experiment) -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = ExperimentConfig::build(exp, &[], dir.path().join(exp.name())).expect("default config");
    match run(&cfg) {
        Ok(checks) => Outcome { label, pass: true, detail: summarize(&checks) },
        Err(RunError::Failed(checks)) => Outcome { label, pass: false, detail: summarize(&checks) },
        Err(e) => Outcome { label, pass: false, detail: e.to_string() },
    }
}

/// `int |Z - 2 d beta|` with `beta` differentiated by central differences.
fn exactness_gap(p: &Pair) -> f64 {
    let g = *p.grid();
    let beta = beta_form(p).drop_source();
    let dbeta = d(&beta, DerivScheme::Central2).unwrap();
    let gap = z_form(p).sub(&dbeta.scale(2.0)).unwrap();
    let density: Vec<f64> = (0..g.len()).map(|i| gap.components().iter().map(|c| c[i].abs()).sum()).collect();
    integrate_density(&g, &density)
}

fn exactness() -> Outcome {
    let ratio = |make: &dyn Fn(Grid) -> Pair, half: f64, h: f64| {
        exactness_gap(&make(Grid::cube(3, half, h).unwrap())) / exactness_gap(&make(Grid::cube(3, half, h / 2.0).unwrap()))
    };
    let bps = |g: Grid| bps_pair(&BpsSpec::new(3, &[0.03, -0.02, 0.01], 1, 1.0).unwrap(), g, DerivScheme::Analytic).unwrap();
    let mut ratios = vec![ratio(&bps, 2.0, 0.1)];
    for seed in 0..10 {
        let random = move |g: Grid| {
            Pair::from_field(Arc::new(AutoDiff(RandomPair::new(seed, 3, 2.0, 0.8))), g, 1.0, DerivScheme::Analytic).unwrap()
        };
        ratios.push(ratio(&random, 1.0, 0.1));
    }
    let pass = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    let (lo, hi) = ratios.iter().fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r), b.max(r)));
    Outcome { label: "Z = 2 d beta, L1 gap ratio under h halving", pass, detail: format!("ratios in [{lo:.3}, {hi:.3}]") }
}

fn harmonic() -> Outcome {
    let a_of = |g: Grid| {
        Form::from_fn(g, 1, |x, c| {
            ImQuaternion::new((x[1] + 0.3 * c as f64).sin() * 0.5, x[0] * x[2] * 0.4, (0.7 * x[0]).cos() * 0.3)
        })
        .unwrap()
    };
    let b_of = |g: Grid| Form::from_fn(g, 0, |x, _| ImQuaternion::new(1.0 + 0.3 * x[0], 0.5 * x[1] * x[2], x[2].sin())).unwrap();
    let mut worst_solver: f64 = 0.0;
    let mut max_ok = true;
    let mut identity = Vec::new();
    for h in [0.1, 0.05, 0.025] {
        let g = Grid::cube(3, 1.0, h).unwrap();
        let a = a_of(g);
        let s = harmonic_section(&a, &b_of(g), &CgOptions::default()).unwrap();
        worst_solver = worst_solver.max(s.residual);
        max_ok &= s.max_interior <= s.max_boundary * (1.0 + 1e-9);
        let p = Pair::from_samples(s.phi, a, 1.0, DerivScheme::Central2).unwrap();
        identity.push(pde_identity_residual(&p, 2));
    }
    let orders: Vec<f64> = identity.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = worst_solver <= 1e-8 && max_ok && orders.iter().all(|r| *r >= 1.6);
    Outcome {
        label: "harmonic section, identity order, maximum modulus",
        pass,
        detail: format!("solver {worst_solver:.2e}, identity ratios {orders:.3?}, max modulus {max_ok}"),
    }
}

fn capping() -> Outcome {
    let g = Grid::cube(3, 1.0, 0.25).unwrap();
    let eta = 0.1;
    let lip2 = EtaCap::new(eta).unwrap().lipschitz().powi(2);
    let mut violations = 0usize;
    let mut worst_inflation: f64 = 0.0;
    for seed in 0..100u64 {
        let p = Pair::from_field(Arc::new(AutoDiff(RandomPair::new(seed, 3, 2.0, 1.5))), g, 0.5, DerivScheme::Analytic).unwrap();
        let (d0, y0) = energy_densities(&p);
        let (d1, y1) = energy_densities(&cap_modulus(&p));
        let e0: f64 = integrate_density(&g, &d0) + integrate_density(&g, &y0);
        let e1: f64 = integrate_density(&g, &d1) + integrate_density(&g, &y1);
        violations += usize::from(e1 > e0 * (1.0 + 1e-12));
        violations += d0.iter().zip(&d1).filter(|(a, b)| **b > **a * (1.0 + 1e-12) + 1e-14).count();

        let (d2, _) = energy_densities(&eta_cap(&p, eta).unwrap());
        for (a, b) in d0.iter().zip(&d2) {
            if *a > 1e-12 {
                worst_inflation = worst_inflation.max(b / a);
            }
            violations += usize::from(*b > (1.0 + 3.0 * eta) * a * (1.0 + 1e-12) + 1e-14);
        }
    }
    Outcome {
        label: "cap_modulus monotonicity, eta_cap inflation",
        pass: violations == 0 && lip2 <= 1.0 + 3.0 * eta,
        detail: format!("violations {violations}, max inflation {worst_inflation:.4} (bound {:.2})", 1.0 + 3.0 * eta),
    }
}

fn calc_lemma() -> Outcome {
    let v = calc_lemma_violations(fixture().calc_lemma_c, 10_000, 1e-6, 1e3);
    Outcome { label: "calc-lemma bounds on a log grid", pass: v == 0, detail: format!("violations {v}") }
}

#[test]
fn acceptance_suite() {
    let outcomes = vec![
        experiment("BPS energy quantization", Experiment::BpsEnergy),
        experiment("Bogomolnyi residual and FD order", Experiment::BogomolnyiResidual),
        experiment("pointwise energy inequality", Experiment::InequalityAudit),
        exactness(),
        experiment("degree quantization", Experiment::Quantization),
        experiment("recovery energy ladder", Experiment::RecoveryGamma),
        experiment("liminf cell gaps", Experiment::LiminfCells),
        experiment("slicing", Experiment::Slices),
        experiment("theta pairing", Experiment::ThetaMonopole),
        experiment("plateau minimization", Experiment::Plateau),
        harmonic(),
        capping(),
        calc_lemma(),
    ];
    for (i, o) in outcomes.iter().enumerate() {
        println!("{} {:>2} {}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.label, o.detail);
    }
    let failed: Vec<usize> = outcomes.iter().enumerate().filter(|(_, o)| !o.pass).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
