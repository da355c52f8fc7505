//! Time evolution under iℏ∂ₜΨ = ĤΨ by two independent discretizations:
//! Strang splitting with an exact spectral kinetic phase, and
//! Crank–Nicolson with a second-order finite-difference Laplacian.
//!
//! Time-dependent potentials are sampled at the step midpoint in both
//! schemes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{fft_forward, fft_inverse, spectral_laplacian_complex, Grid, WaveField};
use crate::potential::PotentialSpec;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Split,
    CrankNicolson,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Split => "split",
            Scheme::CrankNicolson => "cn",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split" => Ok(Scheme::Split),
            "cn" => Ok(Scheme::CrankNicolson),
            other => Err(Error::Configuration(format!("unknown scheme {other:?}, expected split or cn"))),
        }
    }
}

/// ĤΨ with a spectral kinetic term and pointwise potential.
pub fn apply_hamiltonian(psi: &WaveField, potential: &PotentialSpec, t: f64) -> Result<WaveField> {
    let grid = psi.grid();
    let lap = spectral_laplacian_complex(psi.values(), grid)?;
    let v = potential.sample(grid, t);
    let c = grid.hbar() * grid.hbar() / (2.0 * grid.mass());
    let values = psi.values().iter().zip(&lap).zip(&v).map(|((p, l), v)| -c * l + v * p).collect();
    WaveField::new(*grid, values)
}

/// ∂ₜΨ = −iĤΨ/ℏ, the right-hand side of the Schrödinger equation.
pub fn time_derivative(psi: &WaveField, potential: &PotentialSpec, t: f64) -> Result<WaveField> {
    let h = apply_hamiltonian(psi, potential, t)?;
    let factor = -I / psi.grid().hbar();
    Ok(h.scaled(factor))
}

/// Reusable Strang stepper; caches the kinetic phases and, for static
/// potentials, the potential half-step phases.
pub(crate) struct SplitStepper<'a> {
    grid: Grid,
    potential: &'a PotentialSpec,
    dt: f64,
    kinetic: Vec<Complex64>,
    static_half: Option<Vec<Complex64>>,
    buf: Vec<Complex64>,
}

impl<'a> SplitStepper<'a> {
    pub(crate) fn new(grid: Grid, potential: &'a PotentialSpec, dt: f64) -> Self {
        let factor = grid.hbar() * dt / (2.0 * grid.mass());
        let kinetic = grid.wavenumbers().iter().map(|k| Complex64::from_polar(1.0, -factor * k * k)).collect();
        let static_half = (!potential.is_time_dependent()).then(|| half_potential_phases(&grid, potential, 0.0, dt));
        Self { grid, potential, dt, kinetic, static_half, buf: vec![Complex64::default(); grid.n_points()] }
    }

    pub(crate) fn step(&mut self, values: &mut [Complex64], t: f64) {
        let dynamic;
        let half = match &self.static_half {
            Some(h) => h,
            None => {
                dynamic = half_potential_phases(&self.grid, self.potential, t + 0.5 * self.dt, self.dt);
                &dynamic
            }
        };
        self.buf.iter_mut().zip(values.iter()).zip(half).for_each(|((b, v), h)| *b = v * h);
        fft_forward(&mut self.buf);
        self.buf.iter_mut().zip(&self.kinetic).for_each(|(b, k)| *b *= k);
        fft_inverse(&mut self.buf);
        values.iter_mut().zip(&self.buf).zip(half).for_each(|((v, b), h)| *v = b * h);
    }
}

fn half_potential_phases(grid: &Grid, potential: &PotentialSpec, t: f64, dt: f64) -> Vec<Complex64> {
    let factor = -0.5 * dt / grid.hbar();
    potential.sample(grid, t).into_iter().map(|v| Complex64::from_polar(1.0, factor * v)).collect()
}

/// One Strang step: half potential phase, full kinetic phase in Fourier
/// space, half potential phase, with V evaluated at t + Δt/2.
pub fn step_split(psi: &WaveField, potential: &PotentialSpec, t: f64, dt: f64) -> Result<WaveField> {
    check_dt(dt)?;
    let mut values = psi.values().to_vec();
    SplitStepper::new(*psi.grid(), potential, dt).step(&mut values, t);
    WaveField::new(*psi.grid(), values)
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() {
        Ok(())
    } else {
        Err(Error::Configuration(format!("time step must be finite, got {dt}")))
    }
}

/// Crank–Nicolson stepper:
/// `(1 + iΔtĤ/2ℏ)Ψ' = (1 − iΔtĤ/2ℏ)Ψ` with a three-point Laplacian,
/// solved as a cyclic tridiagonal system.
pub(crate) struct CnStepper<'a> {
    grid: Grid,
    potential: &'a PotentialSpec,
    dt: f64,
    static_v: Option<Vec<f64>>,
}

impl<'a> CnStepper<'a> {
    pub(crate) fn new(grid: Grid, potential: &'a PotentialSpec, dt: f64) -> Self {
        let static_v = (!potential.is_time_dependent()).then(|| potential.sample(&grid, 0.0));
        Self { grid, potential, dt, static_v }
    }

    pub(crate) fn step(&self, values: &mut [Complex64], t: f64) -> Result<()> {
        if self.dt == 0.0 {
            return Ok(());
        }
        let dynamic;
        let v = match &self.static_v {
            Some(v) => v,
            None => {
                dynamic = self.potential.sample(&self.grid, t + 0.5 * self.dt);
                &dynamic
            }
        };
        let g = &self.grid;
        let n = g.n_points();
        let dx2 = g.spacing() * g.spacing();
        let kin = g.hbar() * g.hbar() / (2.0 * g.mass() * dx2);
        let mu = I * (self.dt / (2.0 * g.hbar()));
        let off = mu * (-kin);
        let diag: Vec<Complex64> = v.iter().map(|&vi| 1.0 + mu * (2.0 * kin + vi)).collect();
        let rhs: Vec<Complex64> = (0..n)
            .map(|i| {
                let l = values[(i + n - 1) % n];
                let r = values[(i + 1) % n];
                let hpsi = -kin * (l + r) + (2.0 * kin + v[i]) * values[i];
                values[i] - mu * hpsi
            })
            .collect();
        let sol = solve_cyclic_tridiagonal(off, &diag, off, &rhs)?;
        values.copy_from_slice(&sol);
        Ok(())
    }
}

/// One Crank–Nicolson step with V evaluated at t + Δt/2.
pub fn step_cn(psi: &WaveField, potential: &PotentialSpec, t: f64, dt: f64) -> Result<WaveField> {
    check_dt(dt)?;
    let mut values = psi.values().to_vec();
    CnStepper::new(*psi.grid(), potential, dt).step(&mut values, t)?;
    WaveField::new(*psi.grid(), values)
}

/// Thomas algorithm for constant off-diagonals `sub`/`sup`.
fn solve_tridiagonal(sub: Complex64, diag: &[Complex64], sup: Complex64, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = diag.len();
    let mut c_prime = vec![Complex64::default(); n];
    let mut d_prime = vec![Complex64::default(); n];
    let mut pivot = diag[0];
    for i in 0..n {
        if i > 0 {
            pivot = diag[i] - sub * c_prime[i - 1];
        }
        if !(pivot.norm() > 1e-300) || !pivot.re.is_finite() {
            return Err(Error::LinearSolve(format!("vanishing pivot {pivot} at row {i} of {n}")));
        }
        c_prime[i] = sup / pivot;
        let prev = if i > 0 { d_prime[i - 1] } else { Complex64::default() };
        d_prime[i] = (rhs[i] - sub * prev) / pivot;
    }
    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c_prime[i] * next;
    }
    Ok(x)
}

/// Periodic tridiagonal solve by the Sherman–Morrison correction; the
/// corner entries equal the off-diagonals.
fn solve_cyclic_tridiagonal(
    sub: Complex64,
    diag: &[Complex64],
    sup: Complex64,
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    let alpha = sup; // A[n-1][0]
    let beta = sub; // A[0][n-1]
    let gamma = -diag[0];
    let mut modified = diag.to_vec();
    modified[0] = diag[0] - gamma;
    modified[n - 1] = diag[n - 1] - alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &modified, sup, rhs)?;
    let mut u = vec![Complex64::default(); n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &modified, sup, &u)?;
    let denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
    if !(denom.norm() > 1e-300) {
        return Err(Error::LinearSolve(format!("singular Sherman–Morrison update (denominator {denom})")));
    }
    let fact = (x[0] + beta * x[n - 1] / gamma) / denom;
    let out: Vec<Complex64> = x.iter().zip(&z).map(|(x, z)| x - fact * z).collect();
    if out.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::LinearSolve("non-finite solution of the Crank–Nicolson system".into()));
    }
    Ok(out)
}

/// Trajectory produced by [`evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub snapshots: Vec<WaveField>,
    pub times: Vec<f64>,
    /// max over steps of |‖Ψ‖² − 1|.
    pub norm_drift: f64,
    /// Largest single-step change of ‖Ψ‖².
    pub max_step_norm_change: f64,
    pub scheme: Scheme,
    pub steps: usize,
}

impl EvolutionResult {
    pub fn last(&self) -> &WaveField {
        self.snapshots.last().expect("evolution keeps at least one snapshot")
    }
}

/// Number of Δt steps spanning `[t0, t1]`, requiring Δt to divide the
/// interval within rounding.
pub fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(0);
    }
    if !(dt.is_finite() && dt != 0.0) || span.signum() != dt.signum() {
        return Err(Error::Configuration(format!("time step {dt} does not advance from t0 = {t0} towards t1 = {t1}")));
    }
    let steps = (span / dt).round();
    if (steps * dt - span).abs() > 1e-9 * span.abs().max(1.0) {
        return Err(Error::Configuration(format!("dt = {dt} does not divide t1 − t0 = {span}")));
    }
    Ok(steps as usize)
}

/// Repeated stepping from `t0` to `t1` with a snapshot every
/// `snapshot_every` steps (plus the initial and final states).
///
/// Δt may be negative to run backwards, in which case `t1 < t0`.
pub fn evolve(
    psi0: &WaveField,
    potential: &PotentialSpec,
    t0: f64,
    t1: f64,
    dt: f64,
    scheme: Scheme,
    snapshot_every: usize,
) -> Result<EvolutionResult> {
    if snapshot_every == 0 {
        return Err(Error::Configuration("snapshot_every must be at least 1".into()));
    }
    let steps = step_count(t0, t1, dt)?;
    let grid = *psi0.grid();
    let mut values = psi0.values().to_vec();
    let mut snapshots = vec![psi0.clone()];
    let mut times = vec![t0];
    let norm_of = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.spacing();
    let mut prev_norm = norm_of(&values);
    let mut norm_drift = (prev_norm - 1.0).abs();
    let mut max_step_norm_change = 0.0_f64;

    let mut split = (scheme == Scheme::Split).then(|| SplitStepper::new(grid, potential, dt));
    let cn = (scheme == Scheme::CrankNicolson).then(|| CnStepper::new(grid, potential, dt));

    for step in 0..steps {
        let t = t0 + step as f64 * dt;
        match (&mut split, &cn) {
            (Some(s), _) => s.step(&mut values, t),
            (_, Some(c)) => c.step(&mut values, t).map_err(|e| match e {
                Error::LinearSolve(msg) => Error::LinearSolve(format!("step {step}, t = {t}: {msg}")),
                other => other,
            })?,
            _ => unreachable!(),
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Divergence { step: step + 1, time: t + dt });
        }
        let norm = norm_of(&values);
        max_step_norm_change = max_step_norm_change.max((norm - prev_norm).abs());
        norm_drift = norm_drift.max((norm - 1.0).abs());
        prev_norm = norm;
        let done = step + 1;
        if done % snapshot_every == 0 || done == steps {
            snapshots.push(WaveField::new(grid, values.clone())?);
            times.push(if done == steps { t1 } else { t0 + done as f64 * dt });
        }
    }
    Ok(EvolutionResult { snapshots, times, norm_drift, max_step_norm_change, scheme, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{ho_energy, StateSpec};

    fn ho_grid() -> Grid {
        Grid::natural(256, 20.0).unwrap()
    }

    fn harmonic() -> PotentialSpec {
        PotentialSpec::Harmonic { omega: 1.0, center: None }
    }

    #[test]
    fn hamiltonian_eigen_residual() {
        let g = ho_grid();
        for n in 0..4 {
            let psi = StateSpec::HoEigenstate { n, omega: 1.0 }.sample(&g).unwrap();
            let h = apply_hamiltonian(&psi, &harmonic(), 0.0).unwrap();
            let e = ho_energy(n, 1.0, &g);
            let residual = h.distance(&psi.scaled(Complex64::new(e, 0.0))).unwrap();
            assert!(residual < 1e-6, "n = {n}: {residual}");
        }
    }

    #[test]
    fn free_plane_wave_is_eigenvector() {
        let g = Grid::natural(64, 6.0).unwrap();
        let k = 2.0 * g.fundamental_wavenumber();
        let psi = StateSpec::PlaneWave { k0: k }.sample(&g).unwrap();
        let h = apply_hamiltonian(&psi, &PotentialSpec::Zero, 0.0).unwrap();
        let expected = psi.scaled(Complex64::new(k * k / 2.0, 0.0));
        let d = h.distance(&expected).unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn hamiltonian_is_linear_and_hermitian() {
        let g = ho_grid();
        let a = StateSpec::GaussianPacket { x0: 9.0, sigma0: 1.0, k0: 1.0 }.sample(&g).unwrap();
        let b = StateSpec::HoEigenstate { n: 2, omega: 1.0 }.sample(&g).unwrap();
        let v = harmonic();
        let (ca, cb) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let combo = WaveField::linear_combination(&[(ca, &a), (cb, &b)]).unwrap();
        let lhs = apply_hamiltonian(&combo, &v, 0.0).unwrap();
        let ha = apply_hamiltonian(&a, &v, 0.0).unwrap();
        let hb = apply_hamiltonian(&b, &v, 0.0).unwrap();
        let rhs = WaveField::linear_combination(&[(ca, &ha), (cb, &hb)]).unwrap();
        assert!(lhs.distance(&rhs).unwrap() < 1e-12);
        let left = b.inner(&ha).unwrap();
        let right = hb.inner(&a).unwrap();
        assert!((left - right).norm() < 1e-12);
    }

    #[test]
    fn split_step_plane_wave_phase_is_exact() {
        let g = Grid::natural(64, 6.0).unwrap();
        let k = 3.0 * g.fundamental_wavenumber();
        let psi = StateSpec::PlaneWave { k0: k }.sample(&g).unwrap();
        let dt = 0.37;
        let next = step_split(&psi, &PotentialSpec::Zero, 0.0, dt).unwrap();
        let expected = psi.scaled(Complex64::from_polar(1.0, -k * k * dt / 2.0));
        assert!(next.distance(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn cn_zero_step_is_identity() {
        let g = ho_grid();
        let psi = StateSpec::HoCoherent { omega: 1.0, displacement: 1.0, momentum: 0.5 }.sample(&g).unwrap();
        assert_eq!(step_cn(&psi, &harmonic(), 0.0, 0.0).unwrap(), psi);
    }

    #[test]
    fn cyclic_solver_matches_dense_product() {
        let n = 7;
        let sub = Complex64::new(0.2, -0.4);
        let sup = Complex64::new(-0.1, 0.3);
        let diag: Vec<Complex64> = (0..n).map(|i| Complex64::new(2.0 + i as f64 * 0.1, 0.5)).collect();
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let rhs: Vec<Complex64> =
            (0..n).map(|i| diag[i] * x[i] + sub * x[(i + n - 1) % n] + sup * x[(i + 1) % n]).collect();
        let solved = solve_cyclic_tridiagonal(sub, &diag, sup, &rhs).unwrap();
        for (a, b) in solved.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn both_schemes_preserve_norm() {
        let g = ho_grid();
        let psi = StateSpec::HoCoherent { omega: 1.0, displacement: 1.5, momentum: 0.0 }.sample(&g).unwrap();
        for scheme in [Scheme::Split, Scheme::CrankNicolson] {
            let r = evolve(&psi, &harmonic(), 0.0, 1.0, 1e-2, scheme, 10).unwrap();
            assert!(r.max_step_norm_change < 1e-13, "{scheme:?}: {}", r.max_step_norm_change);
            assert_eq!(r.snapshots.len(), 11);
            assert!(r.times.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn evolve_zero_steps_returns_initial_state() {
        let g = ho_grid();
        let psi = StateSpec::HoEigenstate { n: 0, omega: 1.0 }.sample(&g).unwrap();
        let r = evolve(&psi, &harmonic(), 2.0, 2.0, 1e-3, Scheme::Split, 5).unwrap();
        assert_eq!(r.snapshots, vec![psi]);
        assert_eq!(r.times, vec![2.0]);
    }

    #[test]
    fn evolve_validates_schedule() {
        let g = ho_grid();
        let psi = StateSpec::HoEigenstate { n: 0, omega: 1.0 }.sample(&g).unwrap();
        let v = harmonic();
        assert!(evolve(&psi, &v, 0.0, 1.0, 0.3, Scheme::Split, 1).is_err());
        assert!(evolve(&psi, &v, 0.0, 1.0, -0.1, Scheme::Split, 1).is_err());
        assert!(evolve(&psi, &v, 0.0, 1.0, 0.1, Scheme::Split, 0).is_err());
    }

    #[test]
    fn ramp_with_zero_rate_gives_bitwise_identical_trajectory() {
        let g = ho_grid();
        let psi = StateSpec::HoCoherent { omega: 1.0, displacement: 1.0, momentum: 0.0 }.sample(&g).unwrap();
        let ramped = PotentialSpec::TimeRamped { inner: Box::new(harmonic()), rate: 0.0 };
        for scheme in [Scheme::Split, Scheme::CrankNicolson] {
            let a = evolve(&psi, &harmonic(), 0.0, 0.5, 1e-2, scheme, 5).unwrap();
            let b = evolve(&psi, &ramped, 0.0, 0.5, 1e-2, scheme, 5).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn split_evolution_is_reversible() {
        let g = ho_grid();
        let psi = StateSpec::HoCoherent { omega: 1.0, displacement: 1.0, momentum: 0.7 }.sample(&g).unwrap();
        let v = PotentialSpec::Quartic { coefficient: 0.2, center: None };
        let fwd = evolve(&psi, &v, 0.0, 2.0, 1e-3, Scheme::Split, 2000).unwrap();
        let back = evolve(fwd.last(), &v, 2.0, 0.0, -1e-3, Scheme::Split, 2000).unwrap();
        assert!(back.last().distance(&psi).unwrap() < 1e-9);
    }

    #[test]
    fn divergence_is_reported_with_step() {
        let g = Grid::natural(16, 1.0).unwrap();
        let mut values = vec![Complex64::new(1.0, 0.0); 16];
        values[3] = Complex64::new(f64::NAN, 0.0);
        let psi = WaveField::new(g, values).unwrap();
        let err = evolve(&psi, &PotentialSpec::Zero, 0.0, 0.1, 0.05, Scheme::Split, 1).unwrap_err();
        assert_eq!(err, Error::Divergence { step: 1, time: 0.05 });
    }
}
