//! ℏ sweeps comparing the packet centroid against a classical trajectory.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{integrate, Grid};
use crate::observables::{mean_kinetic, mean_quantum_potential, KineticMethod};
use crate::potential::PotentialSpec;
use crate::propagators::{evolve, step_count, Scheme};
use crate::states::StateSpec;

use super::fit_slope;

/// Time samples of a classical trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalPath {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub momenta: Vec<f64>,
}

/// Fourth-order Runge–Kutta on ẋ = p/M, ṗ = −∂V/∂x, recording every
/// `snapshot_every`-th step plus the endpoints. Uses the closed-form force
/// of `potential` and nothing from the wave solvers.
pub fn classical_trajectory(
    potential: &PotentialSpec,
    grid: &Grid,
    x0: f64,
    p0: f64,
    t_end: f64,
    dt: f64,
    snapshot_every: usize,
) -> Result<ClassicalPath> {
    if snapshot_every == 0 {
        return Err(Error::Configuration("snapshot_every must be at least 1".into()));
    }
    let steps = step_count(0.0, t_end, dt)?;
    let m = grid.mass();
    let force = |t: f64, x: f64| {
        potential
            .force(t, x, grid)
            .ok_or_else(|| Error::UnsupportedMethod("classical oracle needs a closed-form force".into()))
    };
    let (mut x, mut p) = (x0, p0);
    let mut path = ClassicalPath { times: vec![0.0], positions: vec![x0], momenta: vec![p0] };
    for step in 0..steps {
        let t = step as f64 * dt;
        let (k1x, k1p) = (p / m, force(t, x)?);
        let (k2x, k2p) = ((p + 0.5 * dt * k1p) / m, force(t + 0.5 * dt, x + 0.5 * dt * k1x)?);
        let (k3x, k3p) = ((p + 0.5 * dt * k2p) / m, force(t + 0.5 * dt, x + 0.5 * dt * k2x)?);
        let (k4x, k4p) = ((p + dt * k3p) / m, force(t + dt, x + dt * k3x)?);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        p += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        let done = step + 1;
        if done % snapshot_every == 0 || done == steps {
            path.times.push(if done == steps { t_end } else { done as f64 * dt });
            path.positions.push(x);
            path.momenta.push(p);
        }
    }
    Ok(path)
}

/// Everything except ℏ that defines one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_points: usize,
    pub length: f64,
    pub mass: f64,
    pub x0: f64,
    pub p0: f64,
    pub sigma0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub snapshot_every: usize,
}

/// Outcome at one ℏ. The measurements are `None` when the packet is not
/// resolved on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalPoint {
    pub hbar: f64,
    /// max over snapshots of |⟨x⟩ − x_classical|.
    pub packet_center_error: Option<f64>,
    /// ⟨Q⟩/⟨E_kin⟩ at t = 0.
    pub quantum_potential_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalRun {
    pub points: Vec<ClassicalPoint>,
    /// Set for potentials with a force linear in x, where the centroid
    /// follows the classical path at every ℏ and the sweep says nothing.
    pub ehrenfest_exact: bool,
}

impl ClassicalRun {
    pub fn hbar_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.hbar).collect()
    }

    /// True when, over resolved points in sweep order, no centre error
    /// exceeds its predecessor by more than the factor `1 + slack`.
    pub fn center_error_decreasing(&self, slack: f64) -> bool {
        let errors: Vec<f64> = self.points.iter().filter_map(|p| p.packet_center_error).collect();
        errors.windows(2).all(|w| w[1] <= (1.0 + slack) * w[0])
    }

    /// First over last resolved centre error.
    pub fn center_error_reduction(&self) -> Option<f64> {
        let errors: Vec<f64> = self.points.iter().filter_map(|p| p.packet_center_error).collect();
        match (errors.first(), errors.last()) {
            (Some(a), Some(b)) if errors.len() > 1 => Some(a / b),
            _ => None,
        }
    }

    /// Least-squares slope of ln(⟨Q⟩/⟨E_kin⟩) against ln ℏ.
    pub fn share_slope(&self) -> Option<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) =
            self.points.iter().filter_map(|p| p.quantum_potential_share.map(|s| (p.hbar.ln(), s.ln()))).unzip();
        fit_slope(&x, &y)
    }

    pub fn unresolved(&self) -> usize {
        self.points.iter().filter(|p| p.packet_center_error.is_none()).count()
    }
}

/// Largest wavenumber the packet is expected to reach: the classical
/// momentum at the bottom of the well plus ten momentum-space widths.
fn required_wavenumber(potential: &PotentialSpec, config: &SweepConfig, grid: &Grid) -> f64 {
    let v_min = potential.sample(grid, 0.0).into_iter().fold(f64::INFINITY, f64::min);
    let energy = config.p0 * config.p0 / (2.0 * config.mass) + potential.value(0.0, config.x0, grid);
    let p_max = (2.0 * config.mass * (energy - v_min)).max(0.0).sqrt();
    p_max / grid.hbar() + 10.0 / (2.0 * config.sigma0)
}

/// Evolves the same Gaussian packet (fixed σ₀, momentum p₀) for each ℏ
/// and compares its centroid with [`classical_trajectory`].
pub fn classical_limit_sweep(
    potential: &PotentialSpec,
    config: &SweepConfig,
    hbar_values: &[f64],
) -> Result<ClassicalRun> {
    if hbar_values.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Configuration("ℏ sweep must be strictly decreasing".into()));
    }
    let base = Grid::new(config.n_points, config.length, 1.0, config.mass)?;
    let path =
        classical_trajectory(potential, &base, config.x0, config.p0, config.t_end, config.dt, config.snapshot_every)?;
    let mut points = Vec::with_capacity(hbar_values.len());
    for &hbar in hbar_values {
        let grid = base.with_hbar(hbar)?;
        let spec = StateSpec::GaussianPacket { x0: config.x0, sigma0: config.sigma0, k0: config.p0 / hbar };
        let resolved = required_wavenumber(potential, config, &grid) < PI / grid.spacing();
        let psi0 = match spec.sample(&grid) {
            Ok(psi) if resolved => psi,
            _ => {
                points.push(ClassicalPoint { hbar, packet_center_error: None, quantum_potential_share: None });
                continue;
            }
        };
        let share = mean_quantum_potential(&psi0)?.value / mean_kinetic(&psi0, KineticMethod::FourierSum)?.value;
        let run = evolve(&psi0, potential, 0.0, config.t_end, config.dt, Scheme::Split, config.snapshot_every)?;
        let positions = grid.positions();
        let mut error = 0.0_f64;
        for (psi, &x_cl) in run.snapshots.iter().zip(&path.positions) {
            let weighted: Vec<f64> = psi.density().iter().zip(&positions).map(|(r, x)| r * x).collect();
            error = error.max((integrate(&weighted, &grid)? - x_cl).abs());
        }
        points.push(ClassicalPoint { hbar, packet_center_error: Some(error), quantum_potential_share: Some(share) });
    }
    let ehrenfest_exact =
        matches!(potential, PotentialSpec::Zero | PotentialSpec::Constant { .. } | PotentialSpec::Harmonic { .. });
    Ok(ClassicalRun { points, ehrenfest_exact })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic_config() -> SweepConfig {
        SweepConfig {
            n_points: 1024,
            length: 8.0,
            mass: 1.0,
            x0: 5.0,
            p0: 1.0,
            sigma0: 0.2,
            t_end: 2.0,
            dt: 1e-3,
            snapshot_every: 50,
        }
    }

    #[test]
    fn oracle_matches_harmonic_motion_over_a_period() {
        let g = Grid::natural(64, 10.0).unwrap();
        let v = PotentialSpec::Harmonic { omega: 1.0, center: Some(0.0) };
        let path = classical_trajectory(&v, &g, 1.0, 0.5, 2.0 * PI, 2.0 * PI / 62_832.0, 1000).unwrap();
        for ((&t, &x), &p) in path.times.iter().zip(&path.positions).zip(&path.momenta) {
            assert!((x - (t.cos() + 0.5 * t.sin())).abs() < 1e-10, "t = {t}");
            assert!((p - (0.5 * t.cos() - t.sin())).abs() < 1e-10, "t = {t}");
        }
        assert_eq!(*path.times.last().unwrap(), 2.0 * PI);
    }

    #[test]
    fn oracle_needs_a_closed_form_force() {
        let g = Grid::natural(64, 10.0).unwrap();
        let v = PotentialSpec::Barrier { height: 1.0, x_a: 4.0, x_b: 6.0 };
        assert!(matches!(classical_trajectory(&v, &g, 1.0, 0.0, 1.0, 0.1, 1), Err(Error::UnsupportedMethod(_))));
    }

    #[test]
    fn harmonic_sweep_is_reported_as_degenerate() {
        let mut c = quartic_config();
        c.n_points = 256;
        c.t_end = 1.0;
        let v = PotentialSpec::Harmonic { omega: 1.0, center: None };
        let run = classical_limit_sweep(&v, &c, &[0.1, 0.05]).unwrap();
        assert!(run.ehrenfest_exact);
        assert!(run.points.iter().all(|p| p.packet_center_error.unwrap() < 1e-6), "{run:?}");
    }

    #[test]
    fn single_point_sweep_is_trivially_monotone() {
        let mut c = quartic_config();
        c.n_points = 256;
        c.t_end = 0.1;
        let v = PotentialSpec::Quartic { coefficient: 1.0, center: None };
        let run = classical_limit_sweep(&v, &c, &[0.1]).unwrap();
        assert!(run.center_error_decreasing(0.1));
        assert_eq!(run.center_error_reduction(), None);
        assert_eq!(run.share_slope(), None);
    }

    #[test]
    fn unresolved_points_are_marked() {
        let mut c = quartic_config();
        c.n_points = 256;
        c.t_end = 0.1;
        let v = PotentialSpec::Quartic { coefficient: 1.0, center: None };
        let run = classical_limit_sweep(&v, &c, &[0.1, 0.001]).unwrap();
        assert!(run.points[0].packet_center_error.is_some());
        assert!(run.points[1].packet_center_error.is_none());
        assert_eq!(run.unresolved(), 1);
    }

    #[test]
    fn sweep_must_decrease() {
        let v = PotentialSpec::Zero;
        assert!(classical_limit_sweep(&v, &quartic_config(), &[0.1, 0.2]).is_err());
    }
}
