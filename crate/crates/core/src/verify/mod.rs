//! Numerical checks of the Madelung derivation along Schrödinger
//! trajectories: continuity and quantum Hamilton–Jacobi residuals, potential
//! recovery, plane-wave dispersion, the classical limit and tunneling.

mod classical;
mod convergence;
mod tunneling;

pub use classical::{
    classical_limit_sweep, classical_trajectory, ClassicalPath, ClassicalPoint, ClassicalRun, SweepConfig,
};
pub use convergence::{cross_validate, temporal_convergence, ConvergenceStudy, CrossValidation};
pub use tunneling::{tunneling_probe, TunnelingReport};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{
    current_kernel, integrate, spectral_gradient, spectral_laplacian, unwrap_phase, validity_mask, Grid, MaskedField,
    WaveField, DEFAULT_DENSITY_FLOOR,
};
use crate::potential::PotentialSpec;
use crate::propagators::{evolve, time_derivative, EvolutionResult, Scheme};
use crate::states::StateSpec;

/// Residuals of the continuity and quantum Hamilton–Jacobi equations per
/// snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub times: Vec<f64>,
    /// ‖∂ₜρ + ∇·j‖₂.
    pub continuity_residual: Vec<f64>,
    /// (∫ ρ r² dx)^½ over the valid mask with
    /// r = ℏ∂ₜS + (ℏ²/2M)((∇S)² − ∇²|Ψ|/|Ψ|) + V.
    pub qhj_residual: Vec<f64>,
    /// Probability mass below the density floor.
    pub mask_fraction: Vec<f64>,
}

impl ResidualSeries {
    pub fn max_continuity(&self) -> f64 {
        self.continuity_residual.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_qhj(&self) -> f64 {
        self.qhj_residual.iter().copied().fold(0.0, f64::max)
    }
}

/// Both residuals for one snapshot, with ∂ₜΨ taken from the Schrödinger
/// right-hand side so only spatial discretization error remains.
fn snapshot_residuals(psi: &WaveField, potential: &PotentialSpec, t: f64) -> Result<(f64, f64, f64)> {
    let grid = psi.grid();
    let (hbar, mass) = (grid.hbar(), grid.mass());
    let values = psi.values();
    let d_psi = time_derivative(psi, potential, t)?;
    let density = psi.density();
    let total: f64 = integrate(&density, grid)?;

    let kernel = current_kernel(psi)?;
    let flux: Vec<f64> = kernel.iter().map(|k| hbar * k / mass).collect();
    let div = spectral_gradient(&flux, grid)?;
    let continuity: Vec<f64> = values
        .iter()
        .zip(d_psi.values())
        .zip(&div)
        .map(|((p, d), j)| {
            let r = 2.0 * (p.conj() * d).re + j;
            r * r
        })
        .collect();
    let continuity = integrate(&continuity, grid)?.sqrt();

    let valid = validity_mask(&density, DEFAULT_DENSITY_FLOOR);
    let modulus = psi.modulus();
    let curvature = spectral_laplacian(&modulus, grid)?;
    let v = potential.sample(grid, t);
    let c = hbar * hbar / (2.0 * mass);
    let mut weighted = vec![0.0; density.len()];
    let mut excluded = vec![0.0; density.len()];
    for i in 0..density.len() {
        if !valid[i] {
            excluded[i] = density[i];
            continue;
        }
        let d_s = (d_psi.values()[i] / values[i]).im;
        let grad_s = kernel[i] / density[i];
        let r = hbar * d_s + c * (grad_s * grad_s - curvature[i] / modulus[i]) + v[i];
        weighted[i] = density[i] * r * r;
    }
    let qhj = integrate(&weighted, grid)?.sqrt();
    let fraction = integrate(&excluded, grid)? / total;
    Ok((continuity, qhj, fraction))
}

/// Continuity and Hamilton–Jacobi residuals at every snapshot of a
/// trajectory evolved under `potential`.
pub fn residuals(trajectory: &EvolutionResult, potential: &PotentialSpec) -> Result<ResidualSeries> {
    residuals_at(&trajectory.snapshots, &trajectory.times, potential)
}

/// [`residuals`] for loose snapshots.
pub fn residuals_at(snapshots: &[WaveField], times: &[f64], potential: &PotentialSpec) -> Result<ResidualSeries> {
    let mut series = ResidualSeries {
        times: times.to_vec(),
        continuity_residual: Vec::with_capacity(times.len()),
        qhj_residual: Vec::with_capacity(times.len()),
        mask_fraction: Vec::with_capacity(times.len()),
    };
    for (psi, &t) in snapshots.iter().zip(times) {
        let (c, q, f) = snapshot_residuals(psi, potential, t)?;
        series.continuity_residual.push(c);
        series.qhj_residual.push(q);
        series.mask_fraction.push(f);
    }
    Ok(series)
}

/// Potential recovered from a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredPotential {
    /// Re[(iℏ∂ₜΨ + (ℏ²/2M)∇²Ψ)/Ψ] on the valid mask.
    pub values: MaskedField,
    /// max |Im| of the same quotient over the mask.
    pub max_imag: f64,
}

impl RecoveredPotential {
    /// max |V_rec − V_ref| over the mask, optionally after removing the
    /// mean offset.
    pub fn max_deviation(&self, reference: &[f64], remove_offset: bool) -> f64 {
        let diffs: Vec<f64> = self.values.valid_values().map(|(i, v)| v - reference[i]).collect();
        if diffs.is_empty() {
            return 0.0;
        }
        let offset = if remove_offset { diffs.iter().sum::<f64>() / diffs.len() as f64 } else { 0.0 };
        diffs.iter().map(|d| (d - offset).abs()).fold(0.0, f64::max)
    }
}

/// Relative density floor below which the quotient in
/// [`recover_potential`] is not evaluated. It is stricter than the default
/// floor because the quotient amplifies round-off in ∇²Ψ by 1/|Ψ|.
pub const RECOVERY_DENSITY_FLOOR: f64 = 1e-8;

/// Solves the Schrödinger equation for V at one instant, with ∂ₜΨ from
/// the right-hand side under `v_true`.
pub fn recover_potential(psi: &WaveField, v_true: &PotentialSpec, t: f64) -> Result<RecoveredPotential> {
    let grid = psi.grid();
    let c = grid.hbar() * grid.hbar() / (2.0 * grid.mass());
    let d_psi = time_derivative(psi, v_true, t)?;
    let lap = crate::grid::spectral_laplacian_complex(psi.values(), grid)?;
    let valid = validity_mask(&psi.density(), RECOVERY_DENSITY_FLOOR);
    let ih = Complex64::new(0.0, grid.hbar());
    let mut values = vec![0.0; valid.len()];
    let mut max_imag = 0.0_f64;
    for i in 0..valid.len() {
        if valid[i] {
            let q = (ih * d_psi.values()[i] + c * lap[i]) / psi.values()[i];
            values[i] = q.re;
            max_imag = max_imag.max(q.im.abs());
        }
    }
    Ok(RecoveredPotential { values: MaskedField { values, valid }, max_imag })
}

/// Measured and predicted global phase rate of an evolved plane wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    pub measured: f64,
    pub predicted: f64,
}

impl Dispersion {
    pub fn error(&self) -> f64 {
        (self.measured - self.predicted).abs()
    }
}

/// Evolves the plane wave e^{ik₀x} under the constant potential `v0` with
/// the split scheme and fits ω from arg⟨Ψ(0)|Ψ(t)⟩ = −ωt.
pub fn dispersion_check(grid: &Grid, k0: f64, v0: f64, t_end: f64, dt: f64) -> Result<Dispersion> {
    let psi0 = StateSpec::PlaneWave { k0 }.sample(grid)?;
    let potential = PotentialSpec::Constant { value: v0 };
    let predicted = grid.hbar() * k0 * k0 / (2.0 * grid.mass()) + v0 / grid.hbar();
    // keep the phase advance between snapshots well inside (−π, π]
    let per_step = (predicted * dt).abs();
    let every = if per_step > 0.0 { ((0.25 * PI / per_step).floor() as usize).max(1) } else { 1 };
    let run = evolve(&psi0, &potential, 0.0, t_end, dt, Scheme::Split, every)?;
    let wrapped = run.snapshots.iter().map(|s| Ok(psi0.inner(s)?.arg())).collect::<Result<Vec<f64>>>()?;
    let phases = unwrap_phase(&wrapped, 0);
    let slope = fit_slope(&run.times, &phases)
        .ok_or_else(|| Error::Configuration("dispersion fit needs at least two snapshots".into()))?;
    Ok(Dispersion { measured: -slope, predicted })
}

/// Least-squares slope of y against x.
pub(crate) fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
