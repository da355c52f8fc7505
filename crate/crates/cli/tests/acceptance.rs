//! One pass/fail line per acceptance criterion. Exits non-zero if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

use madelung_cli::bundled::scenario_dir;
use madelung_cli::runner::{run_suite, RunOptions};
use madelung_core::hydro::equivalence_report;
use madelung_core::observables::{
    fisher_information, local_fields, mean_kinetic, mean_momentum, mean_quantum_potential, mean_total_energy,
    EnergyMethod, FisherMethod, KineticMethod, MomentumMethod,
};
use madelung_core::states::periodized_gaussian;
use madelung_core::verify::{
    classical_limit_sweep, cross_validate, dispersion_check, recover_potential, residuals, temporal_convergence,
    tunneling_probe, SweepConfig,
};
use madelung_core::{evolve, Grid, PotentialSpec, Scheme, StateSpec, WaveField};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

fn ho_ground(g: &Grid) -> WaveField {
    StateSpec::HoEigenstate { n: 0, omega: 1.0 }.sample(g).unwrap()
}

fn three_routes() -> Outcome {
    let g = Grid::natural(512, 40.0).unwrap();
    let strategy = (17.0..23.0f64, 0.8..2.5f64, -3.0..3.0f64);
    let mut runner = TestRunner::deterministic();
    let (mut worst_p, mut worst_k) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let (x0, sigma0, k0) = strategy.new_tree(&mut runner).unwrap().current();
        let psi = StateSpec::GaussianPacket { x0, sigma0, k0 }.sample(&g).unwrap();
        let p: Vec<f64> = [MomentumMethod::FourierSum, MomentumMethod::RealSpace, MomentumMethod::PhaseForm]
            .iter()
            .map(|&m| mean_momentum(&psi, m).unwrap().value)
            .collect();
        let k: Vec<f64> = [KineticMethod::FourierSum, KineticMethod::RealSpace, KineticMethod::MadelungForm]
            .iter()
            .map(|&m| mean_kinetic(&psi, m).unwrap().value)
            .collect();
        worst_p = worst_p.max(spread(&p));
        worst_k = worst_k.max(spread(&k));
    }
    outcome(
        worst_p < 1e-9 && worst_k < 1e-8,
        format!("max spread <p> {worst_p:.3e} (< 1e-9), <E_kin> {worst_k:.3e} (< 1e-8)"),
    )
}

fn local_energy_balance() -> Outcome {
    let g = Grid::natural(256, 20.0).unwrap();
    let v = PotentialSpec::Harmonic { omega: 1.0, center: None };
    let f = local_fields(&ho_ground(&g), &v, 0.0).unwrap();
    let (mut energy, mut kinetic, mut q) = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in (0..g.n_points()).filter(|&i| f.valid_mask[i]) {
        let x = g.position(i) - g.center();
        let oracle = (1.0 - x * x) / 2.0;
        energy = energy.max((f.total_energy[i] - 0.5).abs());
        kinetic = kinetic.max((f.kinetic[i] - oracle).abs());
        q = q.max((f.quantum_potential[i] - oracle).abs());
    }
    outcome(
        energy < 1e-6 && kinetic < 1e-6 && q < 1e-6,
        format!("max |E(x) - 0.5| {energy:.3e}, |kinetic - oracle| {kinetic:.3e}, |Q - oracle| {q:.3e} (< 1e-6)"),
    )
}

fn fisher_identity() -> Outcome {
    let g = Grid::natural(256, 20.0).unwrap();
    let mut states = vec![ho_ground(&g)];
    for (x0, sigma0, k0) in [(9.0, 1.0, 0.5), (10.5, 1.4, -1.0), (10.0, 0.7, 2.0)] {
        states.push(StateSpec::GaussianPacket { x0, sigma0, k0 }.sample(&g).unwrap());
    }
    let (mut forms, mut identity) = (0.0_f64, 0.0_f64);
    for psi in &states {
        let a = fisher_information(psi, FisherMethod::LogGradient).unwrap().value;
        let b = fisher_information(psi, FisherMethod::LaplacianForm).unwrap().value;
        let q = mean_quantum_potential(psi).unwrap().value;
        forms = forms.max((a - b).abs() / a);
        identity = identity.max((a - 8.0 * q).abs() / a);
    }
    let ground = fisher_information(&states[0], FisherMethod::LogGradient).unwrap().value;
    outcome(
        forms < 1e-7 && identity < 1e-8 && (ground - 2.0).abs() < 1e-6,
        format!(
            "forms {forms:.3e} (< 1e-7), 8M<Q>/hbar^2 {identity:.3e} (< 1e-8), ground FI - 2 = {:.3e} (< 1e-6)",
            ground - 2.0
        ),
    )
}

fn derivation_residuals() -> Outcome {
    let mut worst = (0.0_f64, 0.0_f64);
    let (ring, wide) = (Grid::natural(512, 20.0).unwrap(), Grid::natural(1024, 40.0).unwrap());
    let harmonic = PotentialSpec::Harmonic { omega: 1.0, center: None };
    let cases = [
        (ring, StateSpec::HoCoherent { omega: 1.0, displacement: 2.0, momentum: 0.0 }, harmonic.clone()),
        (ring, StateSpec::HoCoherent { omega: 1.0, displacement: -1.0, momentum: 1.0 }, harmonic),
        (wide, StateSpec::GaussianPacket { x0: 18.0, sigma0: 1.5, k0: 1.0 }, PotentialSpec::Zero),
    ];
    for (g, state, v) in cases {
        let traj =
            evolve(&state.sample(&g).unwrap(), &v, 0.0, 2.0 * PI, 2.0 * PI / 2000.0, Scheme::Split, 100).unwrap();
        let r = residuals(&traj, &v).unwrap();
        worst = (worst.0.max(r.max_continuity()), worst.1.max(r.max_qhj()));
    }
    outcome(worst.0 < 1e-9 && worst.1 < 1e-9, format!("max continuity {:.3e}, qhj {:.3e} (< 1e-9)", worst.0, worst.1))
}

fn madelung_equivalence() -> Outcome {
    let g = Grid::natural(512, 10.0).unwrap();
    let half_period = 15.7;
    let omega = PI / half_period;
    let v = PotentialSpec::Harmonic { omega, center: None };
    let psi0 = periodized_gaussian(&g, g.center() + 1.0, (1.0 / (2.0 * omega)).sqrt(), 0.0).unwrap();
    let mut d = Vec::new();
    for dt in [1e-4, 5e-5, 2.5e-5] {
        let steps = (half_period / dt).round() as usize;
        match equivalence_report(&psi0, &v, half_period, dt, steps) {
            Ok(e) => d.push(*e.density_l2.last().unwrap()),
            Err(err) => return outcome(false, format!("dt = {dt}: {err}")),
        }
    }
    let shrink = d[0] / d[2];
    outcome(
        d[0] < 1e-5 && shrink >= 8.0,
        format!("density L2 {:.3e} / {:.3e} / {:.3e}; < 1e-5 at dt 1e-4, shrink {shrink:.2} (>= 8)", d[0], d[1], d[2]),
    )
}

fn dispersion() -> Outcome {
    let g = Grid::natural(64, 8.0 * PI).unwrap();
    let mut worst = 0.0_f64;
    for k0 in [0.5, 1.0, 2.0] {
        for v0 in [0.0, 0.25, -0.5] {
            let d = dispersion_check(&g, k0, v0, 2.0, 0.01).unwrap();
            worst = worst.max(d.error());
        }
    }
    outcome(worst < 1e-10, format!("max |hbar omega - (hbar k)^2/2M - V| {worst:.3e} (< 1e-10)"))
}

fn potential_recovery() -> Outcome {
    let g = Grid::natural(256, 20.0).unwrap();
    let cases = [
        (
            StateSpec::GaussianPacket { x0: 10.0, sigma0: 1.5, k0: 1.0 }.sample(&g).unwrap(),
            PotentialSpec::Constant { value: 0.3 },
        ),
        (
            StateSpec::HoCoherent { omega: 1.0, displacement: 1.0, momentum: 0.5 }.sample(&g).unwrap(),
            PotentialSpec::Harmonic { omega: 1.0, center: None },
        ),
        (
            periodized_gaussian(&g, 10.0, 3.0, g.fundamental_wavenumber()).unwrap(),
            PotentialSpec::Barrier { height: 2.0, x_a: 9.0, x_b: 11.0 },
        ),
    ];
    let (mut dev, mut imag) = (0.0_f64, 0.0_f64);
    for (psi, v) in &cases {
        let rec = recover_potential(psi, v, 0.0).unwrap();
        dev = dev.max(rec.max_deviation(&v.sample(&g, 0.0), false));
        imag = imag.max(rec.max_imag);
    }
    outcome(dev < 1e-8 && imag < 1e-8, format!("max deviation {dev:.3e}, max imaginary {imag:.3e} (< 1e-8)"))
}

fn unitarity() -> Outcome {
    let g = Grid::natural(256, 20.0).unwrap();
    let v = PotentialSpec::Harmonic { omega: 1.0, center: None };
    let psi0 = StateSpec::HoCoherent { omega: 1.0, displacement: 2.0, momentum: 0.5 }.sample(&g).unwrap();
    let traj = evolve(&psi0, &v, 0.0, 1.0, 1e-4, Scheme::Split, 1000).unwrap();
    let e0 = mean_total_energy(&psi0, &v, 0.0, EnergyMethod::Hamiltonian).unwrap().value;
    let drift = traj
        .snapshots
        .iter()
        .zip(&traj.times)
        .map(|(psi, &t)| (mean_total_energy(psi, &v, t, EnergyMethod::Hamiltonian).unwrap().value - e0).abs() / e0)
        .fold(0.0, f64::max);
    let step = traj.max_step_norm_change;
    outcome(
        traj.steps == 10_000 && step < 1e-13 && drift < 1e-8,
        format!(
            "max per-step norm change {step:.3e} (< 1e-13), relative energy drift {drift:.3e} (< 1e-8) over {} steps",
            traj.steps
        ),
    )
}

fn classical_limit() -> Outcome {
    let config = SweepConfig {
        n_points: 1024,
        length: 8.0,
        mass: 1.0,
        x0: 5.0,
        p0: 1.0,
        sigma0: 0.2,
        t_end: 2.0,
        dt: 1e-3,
        snapshot_every: 50,
    };
    let v = PotentialSpec::Quartic { coefficient: 1.0, center: None };
    let run = classical_limit_sweep(&v, &config, &[0.1, 0.05, 0.025, 0.0125]).unwrap();
    let errors: Vec<String> =
        run.points.iter().map(|p| p.packet_center_error.map_or("unresolved".into(), |e| format!("{e:.3e}"))).collect();
    let slope = run.share_slope().unwrap_or(f64::NAN);
    outcome(
        run.unresolved() == 0 && run.center_error_decreasing(0.0) && (slope - 2.0).abs() <= 0.2,
        format!("centre errors [{}], share slope {slope:.4} (2 +/- 0.2)", errors.join(", ")),
    )
}

fn tunneling() -> Outcome {
    let g = Grid::natural(1024, 100.0).unwrap();
    let barrier = PotentialSpec::Barrier { height: 1.0, x_a: 49.5, x_b: 50.5 };
    let packet = StateSpec::GaussianPacket { x0: 25.0, sigma0: 2.0, k0: 1.0 };
    let r = tunneling_probe(&g, &barrier, &packet, 40.0, 0.01, 100).unwrap();
    let min_kinetic = r.min_kinetic_in_barrier.unwrap_or(f64::NAN);
    outcome(
        r.mean_energy < r.barrier_height && r.transmitted > 0.0 && min_kinetic < 0.0,
        format!(
            "<E> {:.4} < V_b {:.4}, transmitted {:.3e} (> 0), min kinetic in barrier {min_kinetic:.3e} (< 0)",
            r.mean_energy, r.barrier_height, r.transmitted
        ),
    )
}

fn convergence() -> Outcome {
    let g = Grid::natural(256, 20.0).unwrap();
    let v = PotentialSpec::Harmonic { omega: 1.0, center: None };
    let psi0 = StateSpec::HoCoherent { omega: 1.0, displacement: 1.5, momentum: 0.0 }.sample(&g).unwrap();
    let split = temporal_convergence(&psi0, &v, 1.0, 0.02, Scheme::Split).unwrap();
    let cn = temporal_convergence(&psi0, &v, 1.0, 0.02, Scheme::CrankNicolson).unwrap();
    let cv = cross_validate(&psi0, &v, 1.0, 0.02, 50).unwrap();
    let ok = (split.order - 2.0).abs() <= 0.2 && (cn.order - 2.0).abs() <= 0.2 && cv.within_bound();
    outcome(
        ok,
        format!(
            "orders split {:.4}, cn {:.4} (2 +/- 0.2); scheme difference {:.3e} <= bound {:.3e}",
            split.order, cn.order, cv.difference, cv.bound
        ),
    )
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let key = path.strip_prefix(root).unwrap().display().to_string();
                files.insert(key, fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut passed = true;
    for dir in [&a, &b] {
        let o =
            run_suite(&scenario_dir(), true, &RunOptions { scheme: None, out_dir: Some(dir.path().into()) }).unwrap();
        passed &= o.passed();
    }
    let (ta, tb) = (read_tree(a.path()), read_tree(b.path()));
    let identical = ta == tb;
    outcome(
        identical && passed && !ta.is_empty(),
        format!(
            "{} files, byte-identical: {identical}, suite verdict: {}",
            ta.len(),
            if passed { "PASS" } else { "FAIL" }
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("three-route expectations", three_routes),
        ("local energy balance", local_energy_balance),
        ("fisher identity", fisher_identity),
        ("derivation residuals", derivation_residuals),
        ("madelung equivalence", madelung_equivalence),
        ("dispersion", dispersion),
        ("potential recovery", potential_recovery),
        ("unitarity and energy", unitarity),
        ("classical limit", classical_limit),
        ("tunneling", tunneling),
        ("convergence orders", convergence),
        ("determinism", determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (number, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let message = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {message}"))
        });
        failures += usize::from(!result.passed);
        println!(
            "criterion {:>2} {} {name}: {} [{:.1} s]",
            number + 1,
            if result.passed { "PASS" } else { "FAIL" },
            result.detail,
            started.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
