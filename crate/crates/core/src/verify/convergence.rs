//! Observed temporal order of the propagators and split/CN
//! cross-validation.

use crate::error::Result;
use crate::grid::{spectral_laplacian_complex, WaveField};
use crate::potential::PotentialSpec;
use crate::propagators::{evolve, Scheme};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub scheme: Scheme,
    /// Δt, Δt/2, Δt/4.
    pub dts: [f64; 3],
    /// ‖Ψ_Δt − Ψ_Δt/2‖ and ‖Ψ_Δt/2 − Ψ_Δt/4‖ at the final time.
    pub differences: [f64; 2],
    /// log₂ of the ratio of successive differences.
    pub order: f64,
    /// Richardson estimate of the Δt/4 temporal error,
    /// d₂ / (2^p − 1) with the observed order p.
    pub error_estimate: f64,
    pub finest: WaveField,
}

/// Runs `scheme` over `[0, t1]` at Δt, Δt/2 and Δt/4 and compares the
/// final states, which cancels any Δt-independent spatial error.
pub fn temporal_convergence(
    psi0: &WaveField,
    potential: &PotentialSpec,
    t1: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<ConvergenceStudy> {
    let dts = [dt, dt / 2.0, dt / 4.0];
    let finals = dts
        .iter()
        .map(|&h| Ok(evolve(psi0, potential, 0.0, t1, h, scheme, usize::MAX)?.last().clone()))
        .collect::<Result<Vec<WaveField>>>()?;
    let differences = [finals[0].distance(&finals[1])?, finals[1].distance(&finals[2])?];
    let order = (differences[0] / differences[1]).log2();
    let error_estimate = differences[1] / (2f64.powf(order) - 1.0);
    let finest = finals.into_iter().nth(2).expect("three runs");
    Ok(ConvergenceStudy { scheme, dts, differences, order, error_estimate, finest })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub split: ConvergenceStudy,
    pub cn: ConvergenceStudy,
    /// ‖Ψ_split − Ψ_CN‖ at Δt/4.
    pub difference: f64,
    /// ∫₀ᵀ ‖(Ĥ_fd − Ĥ_spectral)Ψ‖ / ℏ dt along the split trajectory: a
    /// bound on the drift caused by the finite-difference kinetic term.
    pub spatial_bound: f64,
    /// Sum of both temporal estimates and the spatial bound.
    pub bound: f64,
}

impl CrossValidation {
    pub fn within_bound(&self) -> bool {
        self.difference <= self.bound
    }
}

/// ‖(∇²_fd − ∇²_spectral)Ψ‖ · ℏ/2M.
fn kinetic_defect(psi: &WaveField) -> Result<f64> {
    let grid = psi.grid();
    let v = psi.values();
    let n = v.len();
    let spectral = spectral_laplacian_complex(v, grid)?;
    let h2 = grid.spacing() * grid.spacing();
    let defect: f64 = (0..n)
        .map(|i| {
            let fd = (v[(i + 1) % n] - 2.0 * v[i] + v[(i + n - 1) % n]) / h2;
            (fd - spectral[i]).norm_sqr()
        })
        .sum();
    Ok((defect * grid.spacing()).sqrt() * grid.hbar() / (2.0 * grid.mass()))
}

/// Convergence studies for both schemes and the split/CN distance against
/// the combined truncation bound.
pub fn cross_validate(
    psi0: &WaveField,
    potential: &PotentialSpec,
    t1: f64,
    dt: f64,
    defect_samples: usize,
) -> Result<CrossValidation> {
    let split = temporal_convergence(psi0, potential, t1, dt, Scheme::Split)?;
    let cn = temporal_convergence(psi0, potential, t1, dt, Scheme::CrankNicolson)?;
    let difference = split.finest.distance(&cn.finest)?;

    let fine = dt / 4.0;
    let steps = (t1 / fine).round() as usize;
    let every = (steps / defect_samples.max(1)).max(1);
    let run = evolve(psi0, potential, 0.0, t1, fine, Scheme::Split, every)?;
    let defects = run.snapshots.iter().map(kinetic_defect).collect::<Result<Vec<f64>>>()?;
    let spatial_bound: f64 =
        run.times.windows(2).zip(defects.windows(2)).map(|(t, d)| 0.5 * (t[1] - t[0]) * (d[0] + d[1])).sum();
    let bound = split.error_estimate + cn.error_estimate + spatial_bound;
    Ok(CrossValidation { split, cn, difference, spatial_bound, bound })
}
