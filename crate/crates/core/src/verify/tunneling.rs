//! Sub-barrier packet transmission and the sign of the local kinetic
//! energy inside the barrier.

use crate::error::{Error, Result};
use crate::grid::{integrate, Grid};
use crate::observables::{local_fields, mean_total_energy, EnergyMethod};
use crate::potential::PotentialSpec;
use crate::propagators::{evolve, Scheme};
use crate::states::StateSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct TunnelingReport {
    /// ⟨E⟩ of the initial packet.
    pub mean_energy: f64,
    pub barrier_height: f64,
    /// ∫ρ over x > x_b at the final time.
    pub transmitted: f64,
    /// Smallest p²/2M + Q over valid points in [x_a, x_b] across all
    /// snapshots.
    pub min_kinetic_in_barrier: Option<f64>,
    /// False for a zero-height barrier.
    pub applicable: bool,
}

impl TunnelingReport {
    pub fn tunnels(&self) -> bool {
        self.applicable && self.transmitted > 0.0 && self.min_kinetic_in_barrier.is_some_and(|k| k < 0.0)
    }
}

/// Sends `packet` at a rectangular `barrier` that lies to its right and
/// measures what gets through. Requires ⟨E⟩ below the barrier height.
pub fn tunneling_probe(
    grid: &Grid,
    barrier: &PotentialSpec,
    packet: &StateSpec,
    t_end: f64,
    dt: f64,
    snapshot_every: usize,
) -> Result<TunnelingReport> {
    let PotentialSpec::Barrier { height, x_a, x_b } = *barrier else {
        return Err(Error::Configuration("tunneling probe needs a barrier potential".into()));
    };
    barrier.validate(grid)?;
    let psi0 = packet.sample(grid)?;
    let mean_energy = mean_total_energy(&psi0, barrier, 0.0, EnergyMethod::Hamiltonian)?.value;
    let applicable = height != 0.0;
    if applicable && !(mean_energy < height) {
        return Err(Error::Configuration(format!(
            "packet energy {mean_energy} is not below the barrier height {height}"
        )));
    }
    let run = evolve(&psi0, barrier, 0.0, t_end, dt, Scheme::Split, snapshot_every)?;
    let positions = grid.positions();
    let mut min_kinetic: Option<f64> = None;
    for (psi, &t) in run.snapshots.iter().zip(&run.times) {
        let fields = local_fields(psi, barrier, t)?;
        for (i, &x) in positions.iter().enumerate() {
            if fields.valid_mask[i] && (x_a..=x_b).contains(&x) {
                let k = fields.kinetic[i];
                min_kinetic = Some(min_kinetic.map_or(k, |m| m.min(k)));
            }
        }
    }
    let beyond: Vec<f64> =
        run.last().density().iter().zip(&positions).map(|(&r, &x)| if x > x_b { r } else { 0.0 }).collect();
    Ok(TunnelingReport {
        mean_energy,
        barrier_height: height,
        transmitted: integrate(&beyond, grid)?,
        min_kinetic_in_barrier: min_kinetic,
        applicable,
    })
}
