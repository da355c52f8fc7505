//! Expectation values and local fields, each available through several
//! independent formulas: momentum-space sums, real-space derivatives of Ψ,
//! and density/phase (Madelung) forms.
//!
//! Phase-dependent quantities are only defined where the density is above
//! [`DEFAULT_DENSITY_FLOOR`]; integrals over them skip the remaining points
//! and report the probability mass that was left out.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{
    current_kernel, integrate, phase_gradient, spectral_gradient, spectral_gradient_complex, spectral_laplacian,
    to_momentum, validity_mask, Grid, MaskedField, WaveField, DEFAULT_DENSITY_FLOOR,
};
use crate::potential::PotentialSpec;
use crate::propagators::{apply_hamiltonian, time_derivative};
use crate::states::{ho_basis, ho_energy};

/// Basis size used by [`EnergyMethod::EigenExpansion`] unless overridden.
pub const DEFAULT_EIGEN_TRUNCATION: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentumMethod {
    /// Σ ℏk |Ψ_k|².
    FourierSum,
    /// ℏ ∫ Im(Ψ* ∇Ψ).
    RealSpace,
    /// ℏ ∫ ρ ∇S over the valid mask.
    PhaseForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KineticMethod {
    /// Σ (ℏ²k²/2M) |Ψ_k|².
    FourierSum,
    /// −(ℏ²/2M) ∫ Re(Ψ* ∇²Ψ).
    RealSpace,
    /// (ℏ²/2M) ∫ ρ ((∇S)² − ∇²|Ψ|/|Ψ|) over the valid mask.
    MadelungForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyMethod {
    /// Re ⟨Ψ|Ĥ|Ψ⟩.
    Hamiltonian,
    /// −ℏ ∫ Im(Ψ* ∂ₜΨ) with ∂ₜΨ taken from the Schrödinger right-hand side.
    TimeDerivative,
    /// Σ E_n |⟨φ_n|Ψ⟩|² over oscillator eigenstates n ≤ `n_max`; only for a
    /// harmonic potential centered on the domain.
    EigenExpansion { n_max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FisherMethod {
    /// ∫ ρ (∇ ln ρ)².
    LogGradient,
    /// −4 ∫ ρ ∇²|Ψ| / |Ψ|.
    LaplacianForm,
}

/// A scalar observable with its masking metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectation {
    pub value: f64,
    /// Probability mass below the density floor that the formula skipped.
    pub excluded_mass: f64,
    /// Set when the valid region is split by nodes, so that phase-based
    /// integrals cover disconnected pieces.
    pub warning: bool,
    /// 1 − Σ|C_n|² for the eigen-expansion route.
    pub truncation: Option<f64>,
}

impl Expectation {
    fn exact(value: f64) -> Self {
        Self { value, excluded_mass: 0.0, warning: false, truncation: None }
    }

    fn masked(value: f64, mask: &Mask) -> Self {
        Self { value, excluded_mass: mask.excluded_mass, warning: mask.has_nodes, truncation: None }
    }
}

/// Pointwise Madelung-frame quantities. Invalid points hold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFields {
    pub density: Vec<f64>,
    /// p(x) = ℏ∇S.
    pub momentum: Vec<f64>,
    /// p²/2M + Q.
    pub kinetic: Vec<f64>,
    /// Q(x) = −ℏ²∇²|Ψ| / 2M|Ψ|.
    pub quantum_potential: Vec<f64>,
    /// j = ρu.
    pub current: Vec<f64>,
    /// j = (iℏ/2M)(Ψ∇Ψ* − Ψ*∇Ψ), computed from the complex gradient at every
    /// point.
    pub current_flux: Vec<f64>,
    /// u(x) = ℏ∇S/M.
    pub velocity: Vec<f64>,
    /// E(x) = −ℏ ∂S/∂t = −ℏ Im(∂ₜΨ/Ψ).
    pub total_energy: Vec<f64>,
    pub valid_mask: Vec<bool>,
    pub excluded_mass: f64,
}

struct Mask {
    valid: Vec<bool>,
    excluded_mass: f64,
    has_nodes: bool,
}

impl Mask {
    fn of(psi: &WaveField) -> Result<Self> {
        let density = psi.density();
        let valid = validity_mask(&density, DEFAULT_DENSITY_FLOOR);
        let excluded: Vec<f64> = density.iter().zip(&valid).map(|(&d, &ok)| if ok { 0.0 } else { d }).collect();
        let excluded_mass = integrate(&excluded, psi.grid())?;
        let has_nodes = periodic_runs(&valid) > 1;
        Ok(Self { valid, excluded_mass, has_nodes })
    }

    fn integrate(&self, f: impl Fn(usize) -> f64, grid: &Grid) -> Result<f64> {
        let masked: Vec<f64> = (0..self.valid.len()).map(|i| if self.valid[i] { f(i) } else { 0.0 }).collect();
        integrate(&masked, grid)
    }
}

/// Number of maximal runs of `true` on a ring.
pub fn periodic_runs(mask: &[bool]) -> usize {
    let n = mask.len();
    if mask.iter().all(|&v| v) {
        return 1;
    }
    (0..n).filter(|&i| mask[i] && !mask[(i + n - 1) % n]).count()
}

fn check_normalized(psi: &WaveField) -> Result<()> {
    let norm = psi.norm_squared();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Configuration(format!("wave field must be normalized, ‖Ψ‖² = {norm}")));
    }
    Ok(())
}

/// Σ f(k_j) |Ψ_k|² over the transform modes.
fn momentum_sum(psi: &WaveField, f: impl Fn(usize, f64) -> f64) -> f64 {
    let k = psi.grid().wavenumbers();
    to_momentum(psi).iter().enumerate().map(|(j, a)| f(j, k[j]) * a.norm_sqr()).sum()
}

/// ∇²|Ψ| / |Ψ| on valid points.
fn modulus_curvature(psi: &WaveField, mask: &Mask) -> Result<Vec<f64>> {
    let modulus = psi.modulus();
    let lap = spectral_laplacian(&modulus, psi.grid())?;
    Ok((0..modulus.len()).map(|i| if mask.valid[i] { lap[i] / modulus[i] } else { 0.0 }).collect())
}

pub fn mean_momentum(psi: &WaveField, method: MomentumMethod) -> Result<Expectation> {
    check_normalized(psi)?;
    let grid = psi.grid();
    let hbar = grid.hbar();
    match method {
        MomentumMethod::FourierSum => {
            // the Nyquist mode has no definite sign of k and carries no momentum
            let nyquist = grid.n_points() / 2;
            let p = momentum_sum(psi, |j, k| if j == nyquist { 0.0 } else { hbar * k });
            Ok(Expectation::exact(p))
        }
        MomentumMethod::RealSpace => Ok(Expectation::exact(hbar * integrate(&current_kernel(psi)?, grid)?)),
        MomentumMethod::PhaseForm => {
            let mask = Mask::of(psi)?;
            let grad = phase_gradient(psi, DEFAULT_DENSITY_FLOOR)?;
            let density = psi.density();
            let p = mask.integrate(|i| density[i] * hbar * grad.values[i], grid)?;
            Ok(Expectation::masked(p, &mask))
        }
    }
}

pub fn mean_kinetic(psi: &WaveField, method: KineticMethod) -> Result<Expectation> {
    check_normalized(psi)?;
    let grid = psi.grid();
    let c = grid.hbar() * grid.hbar() / (2.0 * grid.mass());
    match method {
        KineticMethod::FourierSum => Ok(Expectation::exact(momentum_sum(psi, |_, k| c * k * k))),
        KineticMethod::RealSpace => {
            let lap = crate::grid::spectral_laplacian_complex(psi.values(), grid)?;
            let integrand: Vec<f64> = psi.values().iter().zip(&lap).map(|(p, l)| -c * (p.conj() * l).re).collect();
            Ok(Expectation::exact(integrate(&integrand, grid)?))
        }
        KineticMethod::MadelungForm => {
            let mask = Mask::of(psi)?;
            let grad = phase_gradient(psi, DEFAULT_DENSITY_FLOOR)?;
            let curvature = modulus_curvature(psi, &mask)?;
            let density = psi.density();
            let value = mask.integrate(|i| c * density[i] * (grad.values[i] * grad.values[i] - curvature[i]), grid)?;
            Ok(Expectation::masked(value, &mask))
        }
    }
}

pub fn mean_total_energy(
    psi: &WaveField,
    potential: &PotentialSpec,
    t: f64,
    method: EnergyMethod,
) -> Result<Expectation> {
    check_normalized(psi)?;
    let grid = psi.grid();
    match method {
        EnergyMethod::Hamiltonian => {
            let h = apply_hamiltonian(psi, potential, t)?;
            Ok(Expectation::exact(psi.inner(&h)?.re))
        }
        EnergyMethod::TimeDerivative => {
            let dt_psi = time_derivative(psi, potential, t)?;
            let integrand: Vec<f64> =
                psi.values().iter().zip(dt_psi.values()).map(|(p, d)| -grid.hbar() * (p.conj() * d).im).collect();
            Ok(Expectation::exact(integrate(&integrand, grid)?))
        }
        EnergyMethod::EigenExpansion { n_max } => {
            let omega = potential.centered_harmonic_omega(grid).ok_or_else(|| {
                Error::UnsupportedMethod("eigen expansion needs a harmonic potential centered on the domain".into())
            })?;
            let mut energy = 0.0;
            let mut weight = 0.0;
            for (n, phi) in ho_basis(grid, omega, n_max).iter().enumerate() {
                let w = phi.inner(psi)?.norm_sqr();
                energy += ho_energy(n, omega, grid) * w;
                weight += w;
            }
            Ok(Expectation { value: energy, excluded_mass: 0.0, warning: false, truncation: Some(1.0 - weight) })
        }
    }
}

/// Q(x) = −ℏ²∇²|Ψ| / 2M|Ψ| where the density is above the floor.
///
/// Homogeneous of degree zero in Ψ, so the input need not be normalized.
pub fn quantum_potential(psi: &WaveField) -> Result<MaskedField> {
    let mask = Mask::of(psi)?;
    let grid = psi.grid();
    let c = grid.hbar() * grid.hbar() / (2.0 * grid.mass());
    let values = modulus_curvature(psi, &mask)?.into_iter().map(|v| -c * v).collect();
    Ok(MaskedField { values, valid: mask.valid })
}

pub fn fisher_information(psi: &WaveField, method: FisherMethod) -> Result<Expectation> {
    check_normalized(psi)?;
    let grid = psi.grid();
    let mask = Mask::of(psi)?;
    let density = psi.density();
    let value = match method {
        FisherMethod::LogGradient => {
            let grad = spectral_gradient(&density, grid)?;
            mask.integrate(|i| grad[i] * grad[i] / density[i], grid)?
        }
        FisherMethod::LaplacianForm => {
            let curvature = modulus_curvature(psi, &mask)?;
            -4.0 * mask.integrate(|i| density[i] * curvature[i], grid)?
        }
    };
    Ok(Expectation::masked(value, &mask))
}

/// ⟨Q⟩ = ∫ ρ Q over the valid mask.
pub fn mean_quantum_potential(psi: &WaveField) -> Result<Expectation> {
    check_normalized(psi)?;
    let mask = Mask::of(psi)?;
    let q = quantum_potential(psi)?;
    let density = psi.density();
    let value = mask.integrate(|i| density[i] * q.values[i], psi.grid())?;
    Ok(Expectation::masked(value, &mask))
}

pub fn local_fields(psi: &WaveField, potential: &PotentialSpec, t: f64) -> Result<LocalFields> {
    check_normalized(psi)?;
    let grid = psi.grid();
    let (hbar, mass) = (grid.hbar(), grid.mass());
    let mask = Mask::of(psi)?;
    let density = psi.density();
    let masked =
        |v: Vec<f64>| -> Vec<f64> { v.into_iter().zip(&mask.valid).map(|(x, &ok)| if ok { x } else { 0.0 }).collect() };

    let grad = phase_gradient(psi, DEFAULT_DENSITY_FLOOR)?;
    let momentum: Vec<f64> = grad.values.iter().map(|g| hbar * g).collect();
    let velocity: Vec<f64> = momentum.iter().map(|p| p / mass).collect();
    let quantum_potential = quantum_potential(psi)?.values;
    let kinetic = masked(momentum.iter().zip(&quantum_potential).map(|(p, q)| p * p / (2.0 * mass) + q).collect());
    let current = masked(density.iter().zip(&velocity).map(|(r, u)| r * u).collect());

    let d_psi = spectral_gradient_complex(psi.values(), grid)?;
    let flux_factor = Complex64::new(0.0, hbar / (2.0 * mass));
    let current_flux =
        psi.values().iter().zip(&d_psi).map(|(p, d)| (flux_factor * (p * d.conj() - p.conj() * d)).re).collect();

    let dt_psi = time_derivative(psi, potential, t)?;
    let total_energy = masked(psi.values().iter().zip(dt_psi.values()).map(|(p, d)| -hbar * (d / p).im).collect());

    Ok(LocalFields {
        density,
        momentum,
        kinetic,
        quantum_potential,
        current,
        current_flux,
        velocity,
        total_energy,
        valid_mask: mask.valid,
        excluded_mass: mask.excluded_mass,
    })
}
