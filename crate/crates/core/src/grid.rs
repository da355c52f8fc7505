//! Uniform periodic lattice, spectral transforms and derivatives, quadrature,
//! and the amplitude/phase split of a wave function.
//!
//! Fourier amplitudes use the convention `Ψ_k = (Δx / √L) Σ_i Ψ_i e^{-i k x_i}`,
//! which makes `Σ_k |Ψ_k|² = Σ_i |Ψ_i|² Δx` hold exactly (Parseval) and gives a
//! normalized plane wave `e^{ik₁x}/√L` unit weight at `k₁`.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};
use std::iter::Sum;
use std::ops::Mul;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{check_len, Error, Result};

/// Default phase-validity floor, relative to the peak density.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static SCRATCH: RefCell<Vec<Complex64>> = const { RefCell::new(Vec::new()) };
}

fn run_fft(buf: &mut [Complex64], inverse: bool) {
    let fft = PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        }
    });
    SCRATCH.with(|s| {
        let mut scratch = s.borrow_mut();
        let needed = fft.get_inplace_scratch_len();
        if scratch.len() < needed {
            scratch.resize(needed, Complex64::default());
        }
        fft.process_with_scratch(buf, &mut scratch[..needed]);
    });
}

/// In-place unnormalized forward DFT.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    run_fft(buf, false);
}

/// In-place inverse DFT, scaled by `1/n` so it inverts [`fft_forward`].
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    run_fft(buf, true);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
}

/// Uniform periodic 1-D lattice on `[0, L)` together with the physical
/// constants ℏ and M.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    length: f64,
    hbar: f64,
    mass: f64,
}

impl Grid {
    pub fn new(n_points: usize, length: f64, hbar: f64, mass: f64) -> Result<Self> {
        if n_points < 4 || n_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n_points must be even and at least 4, got {n_points}")));
        }
        for (name, v) in [("length", length), ("hbar", hbar), ("mass", mass)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} must be finite and positive, got {v}")));
            }
        }
        Ok(Self { n_points, length, hbar, mass })
    }

    /// Grid in natural units, ℏ = M = 1.
    pub fn natural(n_points: usize, length: f64) -> Result<Self> {
        Self::new(n_points, length, 1.0, 1.0)
    }

    /// Same lattice with a different ℏ.
    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        Self::new(self.n_points, self.length, hbar, self.mass)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Δx = L / n.
    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn position(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.position(i)).collect()
    }

    /// Midpoint of the domain, the default center of the analytic states.
    pub fn center(&self) -> f64 {
        0.5 * self.length
    }

    /// 2π / L.
    pub fn fundamental_wavenumber(&self) -> f64 {
        TAU / self.length
    }

    /// Lattice wavenumbers in transform order: `k_j = 2πj/L` for
    /// `j = 0, 1, …, n/2−1, −n/2, …, −1`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points as isize;
        let dk = self.fundamental_wavenumber();
        (0..n).map(|j| if j < n / 2 { j as f64 * dk } else { (j - n) as f64 * dk }).collect()
    }

    /// Transform-order index of `k` if it lies on the lattice.
    pub fn wavenumber_index(&self, k: f64) -> Option<usize> {
        let j = k / self.fundamental_wavenumber();
        let jr = j.round();
        let half = (self.n_points / 2) as f64;
        if (j - jr).abs() > 1e-9 || jr < -half || jr >= half {
            return None;
        }
        let n = self.n_points as isize;
        Some((jr as isize).rem_euclid(n) as usize)
    }

    /// Multipliers `i k` for the first derivative; the unpaired Nyquist
    /// mode is dropped so real fields stay real.
    fn gradient_multipliers(&self) -> Vec<Complex64> {
        let nyquist = self.n_points / 2;
        self.wavenumbers()
            .into_iter()
            .enumerate()
            .map(|(j, k)| if j == nyquist { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, k) })
            .collect()
    }

    pub(crate) fn check(&self, len: usize) -> Result<()> {
        check_len(self.n_points, len)
    }
}

/// Periodic Riemann sum `Σ f_i Δx`; exact for band-limited integrands.
pub fn integrate<T>(f: &[T], grid: &Grid) -> Result<T>
where
    T: Copy + Sum<T> + Mul<f64, Output = T>,
{
    grid.check(f.len())?;
    Ok(f.iter().copied().sum::<T>() * grid.spacing())
}

fn apply_multiplier(values: &[Complex64], multiplier: impl Fn(usize) -> Complex64) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    fft_forward(&mut buf);
    buf.iter_mut().enumerate().for_each(|(j, v)| *v *= multiplier(j));
    fft_inverse(&mut buf);
    buf
}

/// ∂ₓ of complex samples by multiplication with `i k` in Fourier space.
pub fn spectral_gradient_complex(f: &[Complex64], grid: &Grid) -> Result<Vec<Complex64>> {
    grid.check(f.len())?;
    let m = grid.gradient_multipliers();
    Ok(apply_multiplier(f, |j| m[j]))
}

/// ∂ₓ² of complex samples by multiplication with `−k²`.
pub fn spectral_laplacian_complex(f: &[Complex64], grid: &Grid) -> Result<Vec<Complex64>> {
    grid.check(f.len())?;
    let k = grid.wavenumbers();
    Ok(apply_multiplier(f, |j| Complex64::new(-k[j] * k[j], 0.0)))
}

fn lift(f: &[f64]) -> Vec<Complex64> {
    f.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Spectral first derivative of a real periodic field.
pub fn spectral_gradient(f: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    Ok(spectral_gradient_complex(&lift(f), grid)?.into_iter().map(|c| c.re).collect())
}

/// Spectral second derivative of a real periodic field.
pub fn spectral_laplacian(f: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    Ok(spectral_laplacian_complex(&lift(f), grid)?.into_iter().map(|c| c.re).collect())
}

/// Removes the winding ramp `2πm·x/L` from an unwrapped phase, returning
/// the periodic remainder and the ramp slope.
pub(crate) fn detrend_phase(phase: &[f64], grid: &Grid) -> Result<(Vec<f64>, f64)> {
    grid.check(phase.len())?;
    let n = phase.len();
    let last = phase[n - 1];
    let continuation = last + wrap_to_pi(phase[0] - last);
    let winding = (continuation - phase[0]) / TAU;
    let slope = winding.round() * TAU / grid.length();
    let detrended = phase.iter().enumerate().map(|(i, &s)| s - slope * grid.position(i)).collect();
    Ok((detrended, slope))
}

/// Derivative of an unwrapped phase whose periodic continuation winds by
/// `2πm`: the linear winding ramp is removed before differentiating
/// spectrally and its slope added back.
pub fn unwrapped_phase_gradient(phase: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    let (detrended, slope) = detrend_phase(phase, grid)?;
    let mut grad = spectral_gradient(&detrended, grid)?;
    grad.iter_mut().for_each(|g| *g += slope);
    Ok(grad)
}

/// `(∂ₓf, ∂ₓ²g)` for two real fields through a single complex transform
/// pair, packing `f + ig` and separating the spectra by Hermitian symmetry.
pub fn spectral_gradient_and_laplacian(f: &[f64], g: &[f64], grid: &Grid) -> Result<(Vec<f64>, Vec<f64>)> {
    grid.check(f.len())?;
    grid.check(g.len())?;
    let n = f.len();
    let mut buf: Vec<Complex64> = f.iter().zip(g).map(|(&a, &b)| Complex64::new(a, b)).collect();
    fft_forward(&mut buf);
    let k = grid.wavenumbers();
    let nyquist = n / 2;
    let half = Complex64::new(0.5, 0.0);
    let mut out: Vec<Complex64> = (0..n)
        .map(|j| {
            let z = buf[j];
            let zm = buf[(n - j) % n].conj();
            let f_hat = (z + zm) * half;
            let g_hat = (z - zm) * Complex64::new(0.0, -0.5);
            let grad = if j == nyquist { Complex64::default() } else { Complex64::new(0.0, k[j]) * f_hat };
            grad + Complex64::new(0.0, -k[j] * k[j]) * g_hat
        })
        .collect();
    fft_inverse(&mut out);
    Ok((out.iter().map(|c| c.re).collect(), out.iter().map(|c| c.im).collect()))
}

/// Principal value in `(−π, π]`.
pub fn wrap_to_pi(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Sequential unwrap of principal-value phases, anchored at `anchor`:
/// the anchor keeps its principal value and each neighbour, walking away
/// from it in both directions, is shifted by the multiple of 2π that keeps
/// the step within `(−π, π]`.
pub fn unwrap_phase(wrapped: &[f64], anchor: usize) -> Vec<f64> {
    let mut out = wrapped.to_vec();
    if out.is_empty() {
        return out;
    }
    for i in anchor + 1..out.len() {
        out[i] = out[i - 1] + wrap_to_pi(wrapped[i] - out[i - 1]);
    }
    for i in (0..anchor).rev() {
        out[i] = out[i + 1] + wrap_to_pi(wrapped[i] - out[i + 1]);
    }
    out
}

/// Points whose density is at least `floor × max density`.
pub fn validity_mask(density: &[f64], floor: f64) -> Vec<bool> {
    let peak = density.iter().copied().fold(0.0_f64, f64::max);
    let threshold = floor * peak;
    density.iter().map(|&d| d > 0.0 && d >= threshold).collect()
}

/// Real field with a per-point validity flag. Invalid entries hold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedField {
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl MaskedField {
    /// Iterator over `(index, value)` of valid points.
    pub fn valid_values(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().zip(&self.valid).enumerate().filter(|(_, (_, &ok))| ok).map(|(i, (&v, _))| (i, v))
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

/// Complex samples of Ψ on a [`Grid`] at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl WaveField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        grid.check(values.len())?;
        Ok(Self { grid, values })
    }

    /// Samples `f(x_i)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n_points()).map(|i| f(grid.position(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// |Ψ_i|² at each node.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// |Ψ_i| at each node.
    pub fn modulus(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// ∫|Ψ|² dx.
    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// Rescaled so that ∫|Ψ|² dx = 1.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_squared();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::DegenerateState(format!("cannot normalize field with norm {norm}")));
        }
        let scale = norm.sqrt().recip();
        self.values.iter_mut().for_each(|v| *v *= scale);
        Ok(self)
    }

    /// ⟨self|other⟩ = ∫ self* · other dx.
    pub fn inner(&self, other: &WaveField) -> Result<Complex64> {
        self.grid.check(other.values.len())?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.spacing())
    }

    /// `c · Ψ`.
    pub fn scaled(&self, c: Complex64) -> WaveField {
        WaveField { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    /// `Σ a_i Ψ_i` for fields sharing one grid.
    pub fn linear_combination(terms: &[(Complex64, &WaveField)]) -> Result<WaveField> {
        let (_, first) = terms.first().ok_or_else(|| Error::Configuration("empty linear combination".into()))?;
        let grid = first.grid;
        let mut values = vec![Complex64::new(0.0, 0.0); grid.n_points()];
        for (c, field) in terms {
            grid.check(field.values.len())?;
            values.iter_mut().zip(&field.values).for_each(|(acc, v)| *acc += c * v);
        }
        Ok(WaveField { grid, values })
    }

    /// L² distance ‖self − other‖.
    pub fn distance(&self, other: &WaveField) -> Result<f64> {
        self.grid.check(other.values.len())?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.grid.spacing()).sqrt())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Momentum amplitudes Ψ_k in transform order (see [`Grid::wavenumbers`]).
pub fn to_momentum(psi: &WaveField) -> Vec<Complex64> {
    let grid = psi.grid();
    let mut buf = psi.values().to_vec();
    fft_forward(&mut buf);
    let scale = grid.spacing() / grid.length().sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Inverse of [`to_momentum`].
pub fn from_momentum(grid: &Grid, amplitudes: &[Complex64]) -> Result<WaveField> {
    grid.check(amplitudes.len())?;
    let mut buf = amplitudes.to_vec();
    fft_inverse(&mut buf);
    let scale = grid.length().sqrt() / grid.spacing();
    buf.iter_mut().for_each(|v| *v *= scale);
    WaveField::new(*grid, buf)
}

/// Density ρ = |Ψ|² and phase S of Ψ = |Ψ|e^{iS}.
#[derive(Debug, Clone, PartialEq)]
pub struct MadelungField {
    grid: Grid,
    density: Vec<f64>,
    phase: Vec<f64>,
    valid: Vec<bool>,
}

impl MadelungField {
    /// Builds a field from explicit density and phase; every point counts
    /// as valid where the density is positive.
    pub fn new(grid: Grid, density: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        grid.check(density.len())?;
        grid.check(phase.len())?;
        if let Some((index, &value)) = density.iter().enumerate().find(|(_, d)| !(**d >= 0.0)) {
            return Err(Error::NegativeDensity { index, value });
        }
        let valid = density.iter().map(|&d| d > 0.0).collect();
        Ok(Self { grid, density, phase, valid })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// Points where the phase is meaningful (density above the floor).
    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.density, self.phase)
    }
}

/// Splits Ψ into density and unwrapped phase. `floor` is relative to the
/// peak density; points below it are flagged as phase-unreliable.
pub fn decompose(psi: &WaveField, floor: f64) -> Result<MadelungField> {
    if !(floor > 0.0) {
        return Err(Error::Configuration(format!("density floor must be positive, got {floor}")));
    }
    let density = psi.density();
    if density.iter().all(|&d| d == 0.0) {
        return Err(Error::DegenerateState("all-zero wave field has no phase".into()));
    }
    let valid = validity_mask(&density, floor);
    let wrapped: Vec<f64> = psi.values().iter().map(|v| v.arg()).collect();
    let anchor = valid.iter().position(|&v| v).unwrap_or(0);
    let phase = unwrap_phase(&wrapped, anchor);
    Ok(MadelungField { grid: *psi.grid(), density, phase, valid })
}

/// Inverse of [`decompose`]: Ψ_i = √ρ_i · e^{iS_i}.
pub fn compose(m: &MadelungField) -> Result<WaveField> {
    if let Some((index, &value)) = m.density.iter().enumerate().find(|(_, d)| !(**d >= 0.0)) {
        return Err(Error::NegativeDensity { index, value });
    }
    let values = m.density.iter().zip(&m.phase).map(|(&d, &s)| Complex64::from_polar(d.sqrt(), s)).collect();
    WaveField::new(m.grid, values)
}

/// `Im(Ψ*∇Ψ) = Re Ψ ∇Im Ψ − Im Ψ ∇Re Ψ` with the real and imaginary
/// parts differentiated separately, so a real Ψ gives exactly zero.
pub fn current_kernel(psi: &WaveField) -> Result<Vec<f64>> {
    let grid = psi.grid();
    let re: Vec<f64> = psi.values().iter().map(|v| v.re).collect();
    let im: Vec<f64> = psi.values().iter().map(|v| v.im).collect();
    let d_re = spectral_gradient(&re, grid)?;
    let d_im = spectral_gradient(&im, grid)?;
    Ok((0..re.len()).map(|i| re[i] * d_im[i] - im[i] * d_re[i]).collect())
}

/// ∇S = Im(Ψ*∇Ψ)/|Ψ|², i.e. `(i/2|Ψ|²)(Ψ∇Ψ* − Ψ*∇Ψ)`, without any
/// unwrapping. Points below `floor` (relative) are flagged invalid.
pub fn phase_gradient(psi: &WaveField, floor: f64) -> Result<MaskedField> {
    let kernel = current_kernel(psi)?;
    let density = psi.density();
    let valid = validity_mask(&density, floor);
    let values =
        kernel.iter().zip(density.iter().zip(&valid)).map(|(&j, (&rho, &ok))| if ok { j / rho } else { 0.0 }).collect();
    Ok(MaskedField { values, valid })
}
