//! Executes scenarios and writes their reports and series.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use madelung_core::hydro::equivalence_report;
use madelung_core::observables::{
    fisher_information, local_fields, mean_kinetic, mean_momentum, mean_quantum_potential, mean_total_energy,
    EnergyMethod, FisherMethod, KineticMethod, MomentumMethod, DEFAULT_EIGEN_TRUNCATION,
};
use madelung_core::verify::{
    classical_limit_sweep, classical_trajectory, cross_validate, dispersion_check, recover_potential, residuals,
    tunneling_probe, SweepConfig,
};
use madelung_core::{
    evolve, integrate, Check, EvolutionResult, PotentialSpec, Provenance, ScenarioReport, Scheme, StateSpec, WaveField,
};

use crate::scenario::{parse_scenario, CheckKind, CheckSpec, InitialState, ParseError, Scenario};
use crate::series::render_series;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("scenario {scenario}: {source}")]
    Simulation { scenario: String, source: madelung_core::Error },
    #[error("scenario {scenario}: check {check} is not applicable: {reason}")]
    NotApplicable { scenario: String, check: &'static str, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("duplicate scenario name `{0}`")]
    DuplicateName(String),
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the propagator named in the scenario.
    pub scheme: Option<Scheme>,
    /// Output root; each scenario writes into `<out>/<name>/`.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ScenarioReport,
    pub files: Vec<PathBuf>,
}

struct Context<'a> {
    scenario: &'a Scenario,
    psi0: WaveField,
    trajectory: EvolutionResult,
}

impl Context<'_> {
    fn sim<T>(&self, r: madelung_core::Result<T>) -> Result<T, RunError> {
        r.map_err(|source| RunError::Simulation { scenario: self.scenario.name.clone(), source })
    }

    fn not_applicable<T>(&self, check: CheckKind, reason: &str) -> Result<T, RunError> {
        Err(RunError::NotApplicable {
            scenario: self.scenario.name.clone(),
            check: check.name(),
            reason: reason.into(),
        })
    }

    fn snapshots(&self) -> impl Iterator<Item = (&WaveField, f64)> {
        self.trajectory.snapshots.iter().zip(self.trajectory.times.iter().copied())
    }

    fn span(&self) -> f64 {
        self.scenario.schedule.t1 - self.scenario.schedule.t0
    }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

fn mean_position(psi: &WaveField) -> madelung_core::Result<f64> {
    let grid = psi.grid();
    let weighted: Vec<f64> = psi.density().iter().zip(grid.positions()).map(|(r, x)| r * x).collect();
    integrate(&weighted, grid)
}

fn evaluate(ctx: &Context, spec: CheckSpec) -> Result<Vec<Check>, RunError> {
    let tol = spec.tolerance;
    let s = ctx.scenario;
    let grid = &s.grid;
    let v = &s.potential;
    let name = spec.kind.name();
    let checks = match spec.kind {
        CheckKind::NormDrift => vec![Check::below(name, ctx.trajectory.max_step_norm_change, tol)],
        CheckKind::EnergyDrift => {
            let energies = ctx
                .snapshots()
                .map(|(psi, t)| Ok(mean_total_energy(psi, v, t, EnergyMethod::Hamiltonian)?.value))
                .collect::<madelung_core::Result<Vec<f64>>>();
            let energies = ctx.sim(energies)?;
            let e0 = energies[0];
            let drift = energies.iter().map(|e| (e - e0).abs() / e0.abs()).fold(0.0, f64::max);
            vec![Check::below(name, drift, tol).with_detail(format!("E0 = {e0:.16e}"))]
        }
        CheckKind::Stationarity => {
            let overlap = ctx.sim(ctx.trajectory.last().inner(&ctx.psi0))?.norm();
            vec![Check::below(name, 1.0 - overlap, tol)]
        }
        CheckKind::MomentumRoutes => {
            let mut worst = 0.0_f64;
            for (psi, _) in ctx.snapshots() {
                let routes = [MomentumMethod::FourierSum, MomentumMethod::RealSpace, MomentumMethod::PhaseForm]
                    .map(|m| mean_momentum(psi, m).map(|e| e.value));
                let values = ctx.sim(routes.into_iter().collect::<madelung_core::Result<Vec<f64>>>())?;
                worst = worst.max(spread(&values));
            }
            vec![Check::below(name, worst, tol)]
        }
        CheckKind::KineticRoutes => {
            let mut worst = 0.0_f64;
            for (psi, _) in ctx.snapshots() {
                let routes = [KineticMethod::FourierSum, KineticMethod::RealSpace, KineticMethod::MadelungForm]
                    .map(|m| mean_kinetic(psi, m).map(|e| e.value));
                let values = ctx.sim(routes.into_iter().collect::<madelung_core::Result<Vec<f64>>>())?;
                worst = worst.max(spread(&values));
            }
            vec![Check::below(name, worst, tol)]
        }
        CheckKind::EnergyRoutes => {
            let t0 = s.schedule.t0;
            let mut values = vec![
                ctx.sim(mean_total_energy(&ctx.psi0, v, t0, EnergyMethod::Hamiltonian))?.value,
                ctx.sim(mean_total_energy(&ctx.psi0, v, t0, EnergyMethod::TimeDerivative))?.value,
            ];
            let mut detail = String::from("routes: hamiltonian, time_derivative");
            if v.centered_harmonic_omega(grid).is_some() {
                let n_max = DEFAULT_EIGEN_TRUNCATION;
                let eigen = ctx.sim(mean_total_energy(&ctx.psi0, v, t0, EnergyMethod::EigenExpansion { n_max }))?;
                values.push(eigen.value);
                detail = format!(
                    "routes: hamiltonian, time_derivative, eigen_expansion (truncation {:.3e}); E = {:.16e}",
                    eigen.truncation.unwrap_or(0.0),
                    values[0]
                );
            }
            vec![Check::below(name, spread(&values), tol).with_detail(detail)]
        }
        CheckKind::Fisher => {
            let (mut forms, mut identity) = (0.0_f64, 0.0_f64);
            let c = 8.0 * grid.mass() / (grid.hbar() * grid.hbar());
            for (psi, _) in ctx.snapshots() {
                let a = ctx.sim(fisher_information(psi, FisherMethod::LogGradient))?.value;
                let b = ctx.sim(fisher_information(psi, FisherMethod::LaplacianForm))?.value;
                let q = ctx.sim(mean_quantum_potential(psi))?.value;
                forms = forms.max((a - b).abs() / a.abs());
                identity = identity.max((a - c * q).abs() / a.abs());
            }
            vec![Check::below("fisher_forms", forms, tol), Check::below("fisher_quantum_potential", identity, tol)]
        }
        CheckKind::LocalEnergy => {
            let fields = ctx.sim(local_fields(&ctx.psi0, v, s.schedule.t0))?;
            let values: Vec<f64> =
                fields.total_energy.iter().zip(&fields.valid_mask).filter(|(_, &ok)| ok).map(|(&e, _)| e).collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            vec![Check::below(name, spread(&values), tol).with_detail(format!("mean = {mean:.16e}"))]
        }
        CheckKind::Residuals => {
            let r = ctx.sim(residuals(&ctx.trajectory, v))?;
            vec![
                Check::below("continuity_residual", r.max_continuity(), tol),
                Check::below("qhj_residual", r.max_qhj(), tol),
            ]
        }
        CheckKind::RecoverPotential => {
            let (mut deviation, mut imag) = (0.0_f64, 0.0_f64);
            for (psi, t) in ctx.snapshots() {
                let rec = ctx.sim(recover_potential(psi, v, t))?;
                deviation = deviation.max(rec.max_deviation(&v.sample(grid, t), false));
                imag = imag.max(rec.max_imag);
            }
            vec![Check::below("recovered_potential", deviation, tol), Check::below("recovered_imaginary", imag, tol)]
        }
        CheckKind::Dispersion => {
            let InitialState::Spec(StateSpec::PlaneWave { k0 }) = s.state else {
                return ctx.not_applicable(spec.kind, "needs a plane-wave state");
            };
            let v0 = match v {
                PotentialSpec::Zero => 0.0,
                PotentialSpec::Constant { value } => *value,
                _ => return ctx.not_applicable(spec.kind, "needs a zero or constant potential"),
            };
            let d = ctx.sim(dispersion_check(grid, k0, v0, ctx.span(), s.schedule.dt))?;
            vec![Check::below(name, d.error(), tol)
                .with_detail(format!("omega = {:.16e} predicted = {:.16e}", d.measured, d.predicted))]
        }
        CheckKind::HydroEquivalence => {
            let e = ctx.sim(equivalence_report(&ctx.psi0, v, ctx.span(), s.schedule.dt, s.schedule.snapshot_every))?;
            vec![
                Check::below("hydro_density_l2", e.max_density_l2(), tol).with_detail(format!(
                    "velocity_l2 = {:.16e} phase_rms = {:.16e}",
                    e.max_velocity_l2(),
                    e.max_phase_rms()
                )),
                Check::below("hydro_mass_correction", e.max_mass_correction, madelung_core::hydro::MAX_MASS_CORRECTION),
            ]
        }
        CheckKind::Tunneling => {
            let InitialState::Spec(packet) = &s.state else {
                return ctx.not_applicable(spec.kind, "needs an analytic initial state");
            };
            let r = ctx.sim(tunneling_probe(grid, v, packet, ctx.span(), s.schedule.dt, s.schedule.snapshot_every))?;
            if !r.applicable {
                vec![Check::flag(name, false, "zero-height barrier")]
            } else {
                vec![
                    Check::above("tunneling_transmitted", r.transmitted, tol)
                        .with_detail(format!("mean energy {:.16e} barrier {:.16e}", r.mean_energy, r.barrier_height)),
                    Check::below("tunneling_min_kinetic", r.min_kinetic_in_barrier.unwrap_or(f64::NAN), 0.0),
                ]
            }
        }
        CheckKind::ClassicalLimit => {
            let InitialState::Spec(StateSpec::GaussianPacket { x0, sigma0, k0 }) = s.state else {
                return ctx.not_applicable(spec.kind, "needs a gaussian state");
            };
            let config = SweepConfig {
                n_points: grid.n_points(),
                length: grid.length(),
                mass: grid.mass(),
                x0,
                p0: grid.hbar() * k0,
                sigma0,
                t_end: ctx.span(),
                dt: s.schedule.dt,
                snapshot_every: s.schedule.snapshot_every,
            };
            let run = ctx.sim(classical_limit_sweep(v, &config, &s.sweep))?;
            if run.ehrenfest_exact {
                vec![Check::flag(name, true, "force linear in x: centroid exact at every hbar")]
            } else {
                let slope = run.share_slope().unwrap_or(f64::NAN);
                let reduction = run.center_error_reduction().unwrap_or(f64::NAN);
                vec![
                    Check::flag(
                        "classical_center_error_decreasing",
                        run.center_error_decreasing(0.1) && run.unresolved() == 0,
                        format!("reduction {reduction:.6e} over the sweep"),
                    ),
                    Check::near("classical_share_slope", slope, 2.0, tol),
                ]
            }
        }
        CheckKind::SchemeAgreement => {
            let cv = ctx.sim(cross_validate(&ctx.psi0, v, ctx.span(), s.schedule.dt, 50))?;
            vec![
                Check::near("split_order", cv.split.order, 2.0, tol),
                Check::near("cn_order", cv.cn.order, 2.0, tol),
                Check::below("scheme_difference", cv.difference, cv.bound),
            ]
        }
        CheckKind::CoherentCentroid => {
            if !matches!(v, PotentialSpec::Harmonic { .. }) {
                return ctx.not_applicable(spec.kind, "needs a harmonic potential");
            }
            let x0 = ctx.sim(mean_position(&ctx.psi0))?;
            let p0 = ctx.sim(mean_momentum(&ctx.psi0, MomentumMethod::FourierSum))?.value;
            let path =
                ctx.sim(classical_trajectory(v, grid, x0, p0, ctx.span(), s.schedule.dt, s.schedule.snapshot_every))?;
            let mut worst = 0.0_f64;
            for ((psi, _), x_cl) in ctx.snapshots().zip(&path.positions) {
                worst = worst.max((ctx.sim(mean_position(psi))? - x_cl).abs());
            }
            vec![Check::below(name, worst, tol)]
        }
    };
    Ok(checks)
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, RunError> {
    fs::write(&path, contents).map_err(|source| RunError::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Runs one scenario: propagation, then every requested check, then the
/// requested series and the report.
pub fn run(scenario: &Scenario, options: &RunOptions) -> Result<RunOutcome, RunError> {
    let started = Instant::now();
    let schedule = scenario.schedule;
    let scheme = options.scheme.unwrap_or(schedule.scheme);
    let sim = |r| RunError::Simulation { scenario: scenario.name.clone(), source: r };
    let psi0 = scenario.state.sample(&scenario.grid).map_err(sim)?;
    let trajectory =
        evolve(&psi0, &scenario.potential, schedule.t0, schedule.t1, schedule.dt, scheme, schedule.snapshot_every)
            .map_err(sim)?;
    let ctx = Context { scenario, psi0, trajectory };

    let mut checks = Vec::new();
    for spec in &scenario.checks {
        checks.extend(evaluate(&ctx, *spec)?);
    }
    let grid = &scenario.grid;
    let provenance = Provenance {
        n_points: grid.n_points(),
        length: grid.length(),
        hbar: grid.hbar(),
        mass: grid.mass(),
        scheme: scheme.name().into(),
        dt: schedule.dt,
        wall_clock: 0.0,
    };
    let mut report = ScenarioReport::new(scenario.name.clone(), provenance);
    checks.into_iter().for_each(|c| report.push(c));

    let mut files = Vec::new();
    if let Some(root) = &options.out_dir {
        let dir = root.join(&scenario.name);
        fs::create_dir_all(&dir).map_err(|source| RunError::Io { path: dir.clone(), source })?;
        for kind in &scenario.outputs {
            let text = render_series(*kind, &ctx.trajectory.snapshots, &ctx.trajectory.times, &scenario.potential)
                .map_err(sim)?;
            files.push(write_file(dir.join(format!("{}.tsv", kind.name())), &text)?);
        }
        files.push(write_file(dir.join("report.txt"), &report.render())?);
    }
    report.provenance.wall_clock = started.elapsed().as_secs_f64();
    Ok(RunOutcome { report, files })
}

/// Reads and parses a scenario file.
pub fn load(path: &Path, strict: bool) -> Result<(Scenario, Vec<ParseError>), RunError> {
    let text = fs::read_to_string(path).map_err(|source| RunError::Io { path: path.to_path_buf(), source })?;
    let (scenario, warnings) =
        parse_scenario(&text, strict).map_err(|source| RunError::Parse { path: path.display().to_string(), source })?;
    Ok((scenario, warnings.0))
}

/// Per-scenario results of a suite run, sorted by scenario name.
#[derive(Debug)]
pub struct SuiteOutcome {
    pub results: Vec<(String, Result<RunOutcome, RunError>)>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|(_, r)| matches!(r, Ok(o) if o.report.passed()))
    }

    /// Summary line per scenario followed by every report.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("suite verdict {}\n", if self.passed() { "PASS" } else { "FAIL" }));
        for (name, r) in &self.results {
            let verdict = match r {
                Ok(o) if o.report.passed() => "PASS".to_string(),
                Ok(_) => "FAIL".to_string(),
                Err(e) => format!("ERROR {e}"),
            };
            out.push_str(&format!("{name}\t{verdict}\n"));
        }
        for (_, r) in &self.results {
            if let Ok(o) = r {
                out.push('\n');
                out.push_str(&o.report.render());
            }
        }
        out
    }
}

/// Scenario files (`*.scn`) in `dir`, sorted by path.
pub fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let entries = fs::read_dir(dir).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs already-parsed scenarios in parallel. Names must be unique.
pub fn run_all(scenarios: Vec<Scenario>, options: &RunOptions) -> Result<SuiteOutcome, RunError> {
    let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(RunError::DuplicateName(w[0].to_string()));
    }
    let mut results: Vec<(String, Result<RunOutcome, RunError>)> =
        scenarios.par_iter().map(|s| (s.name.clone(), run(s, options))).collect();
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let outcome = SuiteOutcome { results };
    if let Some(root) = &options.out_dir {
        write_file(root.join("suite_report.txt"), &outcome.render())?;
    }
    Ok(outcome)
}

/// Parses every scenario in `dir` and runs them with [`run_all`].
pub fn run_suite(dir: &Path, strict: bool, options: &RunOptions) -> Result<SuiteOutcome, RunError> {
    let scenarios =
        scenario_files(dir)?.iter().map(|p| load(p, strict).map(|(s, _)| s)).collect::<Result<Vec<_>, _>>()?;
    if let Some(root) = &options.out_dir {
        fs::create_dir_all(root).map_err(|source| RunError::Io { path: root.clone(), source })?;
    }
    run_all(scenarios, options)
}
