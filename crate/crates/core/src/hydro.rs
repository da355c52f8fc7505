//! Direct time integration of the Madelung pair: the quantum
//! Hamilton–Jacobi equation for the phase S and the continuity equation for
//! the density ρ, advanced with classical fourth-order Runge–Kutta.
//!
//! The quantum potential is singular at nodes, so the solver only accepts
//! states whose density stays above [`HARD_DENSITY_FLOOR`] times its
//! maximum and aborts otherwise.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{
    decompose, fft_forward, fft_inverse, integrate, unwrapped_phase_gradient, wrap_to_pi, Grid, MadelungField,
    WaveField,
};
use crate::potential::PotentialSpec;
use crate::propagators::{evolve, step_count, Scheme};

/// Smallest admissible ρ_min / ρ_max.
pub const HARD_DENSITY_FLOOR: f64 = 1e-9;

/// Largest allowed per-step change of ∫ρ before renormalization.
pub const MAX_MASS_CORRECTION: f64 = 1e-9;

/// Density and unwrapped phase at a time. S is never reduced modulo 2π.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroState {
    pub field: MadelungField,
    pub time: f64,
}

impl HydroState {
    /// Madelung split of a nodeless wave field.
    pub fn from_wave(psi: &WaveField, time: f64) -> Result<Self> {
        check_nodeless(&psi.density(), time)?;
        Ok(Self { field: decompose(psi, HARD_DENSITY_FLOOR)?, time })
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    /// Velocity u = ℏ∇S/M.
    pub fn velocity(&self) -> Result<Vec<f64>> {
        let g = self.grid();
        let grad = unwrapped_phase_gradient(self.field.phase(), g)?;
        Ok(grad.into_iter().map(|s| g.hbar() * s / g.mass()).collect())
    }
}

fn check_nodeless(density: &[f64], time: f64) -> Result<()> {
    let max = density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = density.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = min / max;
    if !(ratio >= HARD_DENSITY_FLOOR) {
        return Err(Error::NodelessViolation { time, ratio, floor: HARD_DENSITY_FLOOR });
    }
    Ok(())
}

/// Evaluates the Madelung right-hand side with reusable buffers.
///
/// ∂ₜρ = −∇·(ρℏ∇S/M) and
/// ∂ₜS = −(ℏ/2M)(∇S)² + (ℏ/2M)∇²√ρ/√ρ − V/ℏ,
/// with ∇S and ∇²√ρ obtained from one packed transform pair.
struct Rates<'a> {
    grid: Grid,
    potential: &'a PotentialSpec,
    k: Vec<f64>,
    k_sq: Vec<f64>,
    positions: Vec<f64>,
    static_v: Option<Vec<f64>>,
    buf: Vec<Complex64>,
    spec: Vec<Complex64>,
    amplitude: Vec<f64>,
}

impl<'a> Rates<'a> {
    fn new(grid: Grid, potential: &'a PotentialSpec) -> Self {
        let n = grid.n_points();
        let mut k = grid.wavenumbers();
        let k_sq = k.iter().map(|k| k * k).collect();
        // the unpaired Nyquist mode is dropped from first derivatives only
        k[n / 2] = 0.0;
        let static_v = (!potential.is_time_dependent()).then(|| potential.sample(&grid, 0.0));
        Self {
            grid,
            potential,
            k,
            k_sq,
            positions: grid.positions(),
            static_v,
            buf: vec![Complex64::default(); n],
            spec: vec![Complex64::default(); n],
            amplitude: vec![0.0; n],
        }
    }

    fn eval(&mut self, density: &[f64], phase: &[f64], t: f64, d_rho: &mut [f64], d_s: &mut [f64]) -> Result<()> {
        check_nodeless(density, t)?;
        let n = density.len();
        let (hbar, mass) = (self.grid.hbar(), self.grid.mass());
        let slope = winding_slope(phase, &self.grid);
        for i in 0..n {
            self.amplitude[i] = density[i].sqrt();
            self.buf[i] = Complex64::new(phase[i] - slope * self.positions[i], self.amplitude[i]);
        }
        fft_forward(&mut self.buf);
        for j in 0..n {
            let z = self.buf[j];
            let zm = self.buf[if j == 0 { 0 } else { n - j }].conj();
            let f_hat = (z + zm) * 0.5;
            let g_hat = (z - zm) * Complex64::new(0.0, -0.5);
            self.spec[j] = Complex64::new(0.0, self.k[j]) * f_hat + Complex64::new(0.0, -self.k_sq[j]) * g_hat;
        }
        fft_inverse(&mut self.spec);
        // spec now holds ∇S_detrended + i∇²√ρ
        let sampled;
        let v = match &self.static_v {
            Some(v) => v,
            None => {
                sampled = self.potential.sample(&self.grid, t);
                &sampled
            }
        };
        let c = hbar / (2.0 * mass);
        for i in 0..n {
            let grad_s = self.spec[i].re + slope;
            d_s[i] = -c * grad_s * grad_s + c * self.spec[i].im / self.amplitude[i] - v[i] / hbar;
            self.buf[i] = Complex64::new(density[i] * hbar * grad_s / mass, 0.0);
        }
        fft_forward(&mut self.buf);
        for j in 0..n {
            self.buf[j] *= Complex64::new(0.0, self.k[j]);
        }
        fft_inverse(&mut self.buf);
        for i in 0..n {
            d_rho[i] = -self.buf[i].re;
        }
        Ok(())
    }
}

fn winding_slope(phase: &[f64], grid: &Grid) -> f64 {
    let n = phase.len();
    let last = phase[n - 1];
    let continuation = last + wrap_to_pi(phase[0] - last);
    ((continuation - phase[0]) / TAU).round() * TAU / grid.length()
}

/// `(∂ₜρ, ∂ₜS)` for a hydro state.
pub fn madelung_rhs(h: &HydroState, potential: &PotentialSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = h.grid().n_points();
    let (mut d_rho, mut d_s) = (vec![0.0; n], vec![0.0; n]);
    Rates::new(*h.grid(), potential).eval(h.field.density(), h.field.phase(), h.time, &mut d_rho, &mut d_s)?;
    Ok((d_rho, d_s))
}

/// One Runge–Kutta step followed by renormalization of ρ. Returns the new
/// state and |∫ρ − 1| before renormalization.
pub fn hydro_step(h: &HydroState, potential: &PotentialSpec, dt: f64) -> Result<(HydroState, f64)> {
    Stepper::new(*h.grid(), potential).step(h, dt)
}

struct Stepper<'a> {
    rates: Rates<'a>,
    k: [(Vec<f64>, Vec<f64>); 4],
    stage: (Vec<f64>, Vec<f64>),
}

impl<'a> Stepper<'a> {
    fn new(grid: Grid, potential: &'a PotentialSpec) -> Self {
        let n = grid.n_points();
        let pair = || (vec![0.0; n], vec![0.0; n]);
        Self { rates: Rates::new(grid, potential), k: [pair(), pair(), pair(), pair()], stage: pair() }
    }

    fn step(&mut self, h: &HydroState, dt: f64) -> Result<(HydroState, f64)> {
        if !dt.is_finite() {
            return Err(Error::Configuration(format!("time step must be finite, got {dt}")));
        }
        if dt == 0.0 {
            return Ok((h.clone(), 0.0));
        }
        let grid = *h.grid();
        let (rho, s) = (h.field.density(), h.field.phase());
        let t = h.time;
        let offsets = [0.0, 0.5 * dt, 0.5 * dt, dt];
        for stage in 0..4 {
            let (sr, ss) = &mut self.stage;
            if stage == 0 {
                sr.copy_from_slice(rho);
                ss.copy_from_slice(s);
            } else {
                let (pr, ps) = &self.k[stage - 1];
                let w = offsets[stage];
                for i in 0..rho.len() {
                    sr[i] = rho[i] + w * pr[i];
                    ss[i] = s[i] + w * ps[i];
                }
            }
            let (kr, ks) = &mut self.k[stage];
            self.rates.eval(sr, ss, t + offsets[stage], kr, ks)?;
        }
        let [(k1r, k1s), (k2r, k2s), (k3r, k3s), (k4r, k4s)] = &self.k;
        let w = dt / 6.0;
        let mut new_rho: Vec<f64> =
            (0..rho.len()).map(|i| rho[i] + w * (k1r[i] + 2.0 * k2r[i] + 2.0 * k3r[i] + k4r[i])).collect();
        let new_s: Vec<f64> =
            (0..s.len()).map(|i| s[i] + w * (k1s[i] + 2.0 * k2s[i] + 2.0 * k3s[i] + k4s[i])).collect();
        check_nodeless(&new_rho, t + dt)?;
        let mass = integrate(&new_rho, &grid)?;
        new_rho.iter_mut().for_each(|r| *r /= mass);
        let field = MadelungField::new(grid, new_rho, new_s)?;
        Ok((HydroState { field, time: t + dt }, (mass - 1.0).abs()))
    }
}

/// Snapshots of a hydro run.
#[derive(Debug, Clone)]
pub struct HydroTrajectory {
    pub states: Vec<HydroState>,
    pub max_mass_correction: f64,
    pub steps: usize,
}

impl HydroTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time).collect()
    }
}

/// Repeated [`hydro_step`] from ψ₀ at `t0` to `t1`, keeping every
/// `snapshot_every`-th state plus the first and last.
pub fn hydro_evolve(
    psi0: &WaveField,
    potential: &PotentialSpec,
    t0: f64,
    t1: f64,
    dt: f64,
    snapshot_every: usize,
) -> Result<HydroTrajectory> {
    if snapshot_every == 0 {
        return Err(Error::Configuration("snapshot_every must be at least 1".into()));
    }
    let steps = step_count(t0, t1, dt)?;
    let mut state = HydroState::from_wave(psi0, t0)?;
    let mut states = vec![state.clone()];
    let mut max_mass_correction = 0.0_f64;
    let mut stepper = Stepper::new(*psi0.grid(), potential);
    for step in 0..steps {
        state.time = t0 + step as f64 * dt;
        let (next, correction) = stepper.step(&state, dt)?;
        if next.field.density().iter().chain(next.field.phase()).any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: step + 1, time: next.time });
        }
        max_mass_correction = max_mass_correction.max(correction);
        state = next;
        let done = step + 1;
        if done == steps {
            state.time = t1;
        }
        if done % snapshot_every == 0 || done == steps {
            states.push(state.clone());
        }
    }
    Ok(HydroTrajectory { states, max_mass_correction, steps })
}

/// Hydro and split-step trajectories compared at common snapshot times.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceSeries {
    pub times: Vec<f64>,
    /// ‖ρ_hydro − |Ψ|²‖₂.
    pub density_l2: Vec<f64>,
    /// ‖u_hydro − u_Ψ‖₂.
    pub velocity_l2: Vec<f64>,
    /// Density-weighted RMS of S_hydro − arg Ψ after removing the best
    /// global constant, each difference folded into (−π, π].
    pub phase_rms: Vec<f64>,
    pub max_mass_correction: f64,
}

impl EquivalenceSeries {
    pub fn max_density_l2(&self) -> f64 {
        self.density_l2.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_velocity_l2(&self) -> f64 {
        self.velocity_l2.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_phase_rms(&self) -> f64 {
        self.phase_rms.iter().copied().fold(0.0, f64::max)
    }
}

fn l2_distance(a: &[f64], b: &[f64], grid: &Grid) -> Result<f64> {
    let sq: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
    Ok(integrate(&sq, grid)?.sqrt())
}

fn phase_rms(density: &[f64], s_a: &[f64], s_b: &[f64]) -> f64 {
    let (mut re, mut im, mut total) = (0.0, 0.0, 0.0);
    for i in 0..density.len() {
        let d = s_a[i] - s_b[i];
        re += density[i] * d.cos();
        im += density[i] * d.sin();
        total += density[i];
    }
    let offset = im.atan2(re);
    let sum: f64 = (0..density.len()).map(|i| density[i] * wrap_to_pi(s_a[i] - s_b[i] - offset).powi(2)).sum();
    (sum / total).sqrt()
}

/// Runs the hydro solver and the split-step propagator from the same ψ₀
/// over `[0, t1]` and measures how far apart the trajectories drift.
pub fn equivalence_report(
    psi0: &WaveField,
    potential: &PotentialSpec,
    t1: f64,
    dt: f64,
    snapshot_every: usize,
) -> Result<EquivalenceSeries> {
    let hydro = hydro_evolve(psi0, potential, 0.0, t1, dt, snapshot_every)?;
    let quantum = evolve(psi0, potential, 0.0, t1, dt, Scheme::Split, snapshot_every)?;
    let grid = psi0.grid();
    let mut series = EquivalenceSeries {
        times: Vec::with_capacity(hydro.states.len()),
        density_l2: Vec::new(),
        velocity_l2: Vec::new(),
        phase_rms: Vec::new(),
        max_mass_correction: hydro.max_mass_correction,
    };
    for (h, (psi, &t)) in hydro.states.iter().zip(quantum.snapshots.iter().zip(&quantum.times)) {
        let m = decompose(psi, HARD_DENSITY_FLOOR)?;
        let u_h = h.velocity()?;
        let u_q = HydroState { field: m.clone(), time: t }.velocity()?;
        series.times.push(t);
        series.density_l2.push(l2_distance(h.field.density(), m.density(), grid)?);
        series.velocity_l2.push(l2_distance(&u_h, &u_q, grid)?);
        series.phase_rms.push(phase_rms(m.density(), h.field.phase(), m.phase()));
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::periodized_gaussian;

    fn plane_wave_state(g: &Grid, k0: f64) -> HydroState {
        let rho = vec![1.0 / g.length(); g.n_points()];
        let s = g.positions().iter().map(|x| k0 * x).collect();
        HydroState { field: MadelungField::new(*g, rho, s).unwrap(), time: 0.0 }
    }

    #[test]
    fn uniform_state_is_a_fixed_point() {
        let g = Grid::natural(32, 4.0).unwrap();
        let h = plane_wave_state(&g, 0.0);
        let (dr, ds) = madelung_rhs(&h, &PotentialSpec::Zero).unwrap();
        assert!(dr.iter().chain(&ds).all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn plane_wave_rates() {
        let g = Grid::natural(64, 6.0).unwrap();
        let k0 = 3.0 * g.fundamental_wavenumber();
        let h = plane_wave_state(&g, k0);
        let (dr, ds) = madelung_rhs(&h, &PotentialSpec::Constant { value: 0.4 }).unwrap();
        for (r, s) in dr.iter().zip(&ds) {
            assert!(r.abs() < 1e-12);
            assert!((s + k0 * k0 / 2.0 + 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn oscillator_ground_state_rates_away_from_the_seam() {
        // L = 9 keeps ρ_min/ρ_max ≈ 1.6e-9 above the hard floor
        let g = Grid::natural(256, 9.0).unwrap();
        let psi = periodized_gaussian(&g, g.center(), std::f64::consts::FRAC_1_SQRT_2, 0.0).unwrap();
        let h = HydroState::from_wave(&psi, 0.0).unwrap();
        let (dr, ds) = madelung_rhs(&h, &PotentialSpec::Harmonic { omega: 1.0, center: None }).unwrap();
        for i in 0..g.n_points() {
            let x = g.position(i) - g.center();
            if x.abs() < 2.0 {
                assert!(dr[i].abs() < 1e-10, "x = {x}: {}", dr[i]);
                assert!((ds[i] + 0.5).abs() < 1e-7, "x = {x}: {}", ds[i]);
            }
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let g = Grid::natural(64, 6.0).unwrap();
        let h = plane_wave_state(&g, g.fundamental_wavenumber());
        let (next, corr) = hydro_step(&h, &PotentialSpec::Zero, 0.0).unwrap();
        assert_eq!(next, h);
        assert_eq!(corr, 0.0);
    }

    #[test]
    fn plane_wave_phase_advances_linearly() {
        let g = Grid::natural(64, 6.0).unwrap();
        let k0 = 2.0 * g.fundamental_wavenumber();
        let h = plane_wave_state(&g, k0);
        let v = PotentialSpec::Constant { value: 0.25 };
        let mut state = h.clone();
        for _ in 0..100 {
            let (next, corr) = hydro_step(&state, &v, 1e-3).unwrap();
            assert!(corr < 1e-14);
            state = next;
        }
        let rate = -0.1 * (k0 * k0 / 2.0 + 0.25);
        for (s1, s0) in state.field.phase().iter().zip(h.field.phase()) {
            assert!((s1 - s0 - rate).abs() < 1e-11);
        }
    }

    #[test]
    fn nodes_are_refused() {
        let g = Grid::natural(64, 6.0).unwrap();
        let mut values = vec![Complex64::new(1.0, 0.0); 64];
        values[10] = Complex64::new(1e-6, 0.0);
        let psi = WaveField::new(g, values).unwrap().normalized().unwrap();
        assert!(matches!(HydroState::from_wave(&psi, 0.5), Err(Error::NodelessViolation { time, .. }) if time == 0.5));
    }

    #[test]
    fn equivalence_at_time_zero_is_exact() {
        let g = Grid::natural(128, 9.0).unwrap();
        let psi = periodized_gaussian(&g, g.center() + 0.3, 0.8, 0.0).unwrap();
        let v = PotentialSpec::Harmonic { omega: 1.0, center: None };
        let series = equivalence_report(&psi, &v, 0.0, 0.01, 1).unwrap();
        assert_eq!(series.times, vec![0.0]);
        assert_eq!(series.density_l2, vec![0.0]);
        assert_eq!(series.velocity_l2, vec![0.0]);
        assert_eq!(series.phase_rms, vec![0.0]);
    }

    #[test]
    fn mass_correction_is_tiny() {
        let g = Grid::natural(128, 9.0).unwrap();
        let psi = periodized_gaussian(&g, g.center() + 0.5, 1.5, g.fundamental_wavenumber()).unwrap();
        let v = PotentialSpec::Harmonic { omega: 1.0, center: None };
        let traj = hydro_evolve(&psi, &v, 0.0, 0.1, 1e-3, 50).unwrap();
        assert_eq!(traj.states.len(), 3);
        assert!(traj.max_mass_correction < MAX_MASS_CORRECTION, "{}", traj.max_mass_correction);
    }
}
