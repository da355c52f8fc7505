//! Analytic reference wave functions with closed-form properties.
//!
//! Oscillator states are centered on the domain midpoint, matching the
//! default center of [`PotentialSpec::Harmonic`](crate::PotentialSpec).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, WaveField};

/// Largest probability mass an analytic state may have outside `[0, L)`.
pub const MAX_TAIL_MASS: f64 = 1e-10;

/// Smallest allowed packet width in units of Δx.
pub const MIN_WIDTH_IN_SPACINGS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    /// e^{ik₀x}/√L; k₀ must sit on the grid's wavenumber lattice.
    PlaneWave { k0: f64 },
    /// exp(−(x−x₀)²/4σ₀²)·e^{ik₀x}, σ₀ the standard deviation of |Ψ|².
    GaussianPacket { x0: f64, sigma0: f64, k0: f64 },
    /// n-th eigenstate of ½Mω²(x − L/2)².
    HoEigenstate { n: usize, omega: f64 },
    /// Oscillator ground state displaced by `displacement` and boosted to
    /// mean momentum `momentum`.
    HoCoherent { omega: f64, displacement: f64, momentum: f64 },
    /// Σ cᵢ Ψᵢ over normalized components, renormalized.
    Superposition { components: Vec<(Complex64, StateSpec)> },
}

/// Oscillator length ℓ = √(ℏ / Mω).
pub fn oscillator_length(omega: f64, grid: &Grid) -> f64 {
    (grid.hbar() / (grid.mass() * omega)).sqrt()
}

/// Normalized Hermite functions φ₀(ξ) … φ_{n_max}(ξ) by the three-term
/// recurrence, which stays finite where raw polynomials overflow.
pub fn hermite_functions(n_max: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let phi0 = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    out.push(phi0);
    if n_max >= 1 {
        out.push(2f64.sqrt() * xi * phi0);
    }
    for n in 1..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * xi * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Eigenstates φ₀ … φ_{n_max} of the centered oscillator, sampled without
/// the extent guard (used as a projection basis).
pub fn ho_basis(grid: &Grid, omega: f64, n_max: usize) -> Vec<WaveField> {
    let ell = oscillator_length(omega, grid);
    let scale = ell.sqrt().recip();
    let columns: Vec<Vec<f64>> =
        grid.positions().iter().map(|x| hermite_functions(n_max, (x - grid.center()) / ell)).collect();
    (0..=n_max)
        .map(|n| {
            let values = columns.iter().map(|c| Complex64::new(c[n] * scale, 0.0)).collect();
            WaveField::new(*grid, values).expect("basis length matches grid")
        })
        .collect()
}

/// Mass of a normal density N(x₀, σ²) lying outside `[0, L)`.
fn gaussian_tail_mass(x0: f64, sigma: f64, length: f64) -> f64 {
    let s = sigma * 2f64.sqrt();
    0.5 * libm::erfc(x0 / s) + 0.5 * libm::erfc((length - x0) / s)
}

/// 2∫_{d}^{∞} φ_n(ξ)² dξ by composite Simpson over a window wide enough for
/// the Gaussian factor to underflow.
fn hermite_tail_mass(n: usize, d: f64) -> f64 {
    let upper = d + 40.0;
    let steps = 8000;
    let h = (upper - d) / steps as f64;
    let f = |xi: f64| hermite_functions(n, xi)[n].powi(2);
    let mut s = f(d) + f(upper);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(d + i as f64 * h);
    }
    2.0 * s * h / 3.0
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Configuration(format!("{name} must be positive, got {v}")))
    }
}

fn guard_width(width: f64, grid: &Grid) -> Result<()> {
    if !(4.0 * width < grid.length()) {
        return Err(Error::Configuration(format!(
            "packet too wide for the domain: 4σ = {} ≥ L = {}",
            4.0 * width,
            grid.length()
        )));
    }
    if !(width > MIN_WIDTH_IN_SPACINGS * grid.spacing()) {
        return Err(Error::Configuration(format!(
            "packet under-resolved: σ = {width} ≤ {MIN_WIDTH_IN_SPACINGS}Δx = {}",
            MIN_WIDTH_IN_SPACINGS * grid.spacing()
        )));
    }
    Ok(())
}

fn guard_tails(mass: f64) -> Result<()> {
    if mass < MAX_TAIL_MASS {
        Ok(())
    } else {
        Err(Error::Configuration(format!(
            "state leaks {mass:e} of its norm past the periodic boundary (limit {MAX_TAIL_MASS:e})"
        )))
    }
}

impl StateSpec {
    /// Checks parameter ranges and the resolution/extent guards.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        match self {
            StateSpec::PlaneWave { k0 } => grid
                .wavenumber_index(*k0)
                .map(|_| ())
                .ok_or_else(|| Error::Configuration(format!("k0 = {k0} is not on the wavenumber lattice 2πj/L"))),
            StateSpec::GaussianPacket { x0, sigma0, k0 } => {
                check_positive("sigma0", *sigma0)?;
                if !(k0.is_finite() && x0.is_finite()) {
                    return Err(Error::Configuration("x0 and k0 must be finite".into()));
                }
                guard_width(*sigma0, grid)?;
                guard_tails(gaussian_tail_mass(*x0, *sigma0, grid.length()))
            }
            StateSpec::HoEigenstate { n, omega } => {
                check_positive("omega", *omega)?;
                let ell = oscillator_length(*omega, grid);
                let nf = *n as f64;
                // spread of |φ_n|², and the momentum-space extent of φ_n
                // (itself a Hermite function) against the Nyquist wavenumber
                guard_width(ell * (nf + 0.5).sqrt(), grid)?;
                let k_extent = ((2.0 * nf + 1.0).sqrt() + 8.0) / ell;
                if !(k_extent < PI / grid.spacing()) {
                    return Err(Error::Configuration(format!("oscillator state n = {n} under-resolved on this grid")));
                }
                guard_tails(hermite_tail_mass(*n, grid.center() / ell))
            }
            StateSpec::HoCoherent { omega, displacement, momentum } => {
                check_positive("omega", *omega)?;
                if !(displacement.is_finite() && momentum.is_finite()) {
                    return Err(Error::Configuration("displacement and momentum must be finite".into()));
                }
                let sigma = oscillator_length(*omega, grid) / 2f64.sqrt();
                guard_width(sigma, grid)?;
                guard_tails(gaussian_tail_mass(grid.center() + displacement, sigma, grid.length()))
            }
            StateSpec::Superposition { components } => {
                if components.is_empty() || components.iter().all(|(c, _)| c.norm() == 0.0) {
                    return Err(Error::Configuration("superposition weights are all zero".into()));
                }
                components.iter().try_for_each(|(_, s)| s.validate(grid))
            }
        }
    }

    /// Samples the state on `grid` and normalizes it.
    pub fn sample(&self, grid: &Grid) -> Result<WaveField> {
        self.validate(grid)?;
        self.sample_unchecked(grid)
    }

    fn sample_unchecked(&self, grid: &Grid) -> Result<WaveField> {
        let field = match self {
            StateSpec::PlaneWave { k0 } => {
                let amp = grid.length().sqrt().recip();
                WaveField::from_fn(*grid, |x| Complex64::from_polar(amp, k0 * x))
            }
            StateSpec::GaussianPacket { x0, sigma0, k0 } => gaussian(grid, *x0, *sigma0, *k0),
            StateSpec::HoEigenstate { n, omega } => {
                let ell = oscillator_length(*omega, grid);
                let scale = ell.sqrt().recip();
                WaveField::from_fn(*grid, |x| {
                    Complex64::new(hermite_functions(*n, (x - grid.center()) / ell)[*n] * scale, 0.0)
                })
            }
            StateSpec::HoCoherent { omega, displacement, momentum } => {
                let sigma = oscillator_length(*omega, grid) / 2f64.sqrt();
                gaussian(grid, grid.center() + displacement, sigma, momentum / grid.hbar())
            }
            StateSpec::Superposition { components } => {
                let parts =
                    components.iter().map(|(c, s)| Ok((*c, s.sample_unchecked(grid)?))).collect::<Result<Vec<_>>>()?;
                let terms: Vec<(Complex64, &WaveField)> = parts.iter().map(|(c, f)| (*c, f)).collect();
                WaveField::linear_combination(&terms)?
            }
        };
        field.normalized()
    }
}

fn gaussian(grid: &Grid, x0: f64, sigma: f64, k0: f64) -> WaveField {
    WaveField::from_fn(*grid, |x| {
        let d = x - x0;
        Complex64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), k0 * x)
    })
}

/// Normalized sum of the Gaussian packet and its periodic images,
/// `Σ_m exp(−(x − x₀ − mL)²/4σ²)·e^{ik₀x}`, which is smooth on the ring for
/// any width. Unlike [`StateSpec::GaussianPacket`] no tail guard applies,
/// so the density can be kept bounded away from zero. `k0` must lie on the
/// wavenumber lattice.
pub fn periodized_gaussian(grid: &Grid, x0: f64, sigma: f64, k0: f64) -> Result<WaveField> {
    check_positive("sigma", sigma)?;
    if !(sigma > MIN_WIDTH_IN_SPACINGS * grid.spacing()) {
        return Err(Error::Configuration(format!("packet under-resolved: σ = {sigma}")));
    }
    if grid.wavenumber_index(k0).is_none() {
        return Err(Error::Configuration(format!("k0 = {k0} is not on the wavenumber lattice 2πj/L")));
    }
    let images = (10.0 * sigma / grid.length()).ceil() as i64 + 1;
    WaveField::from_fn(*grid, |x| {
        let envelope: f64 = (-images..=images)
            .map(|m| {
                let d = x - x0 - m as f64 * grid.length();
                (-d * d / (4.0 * sigma * sigma)).exp()
            })
            .sum();
        Complex64::from_polar(envelope, k0 * x)
    })
    .normalized()
}

/// Position spread of a free Gaussian packet at time t:
/// σ(t) = σ₀ √(1 + (ℏt / 2Mσ₀²)²).
pub fn free_packet_width(sigma0: f64, t: f64, grid: &Grid) -> f64 {
    let tau = grid.hbar() * t / (2.0 * grid.mass() * sigma0 * sigma0);
    sigma0 * (1.0 + tau * tau).sqrt()
}

/// ℏω(n + ½).
pub fn ho_energy(n: usize, omega: f64, grid: &Grid) -> f64 {
    grid.hbar() * omega * (n as f64 + 0.5)
}
