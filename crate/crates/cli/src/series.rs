//! Plain-text columnar output, one header line naming columns and units.

use std::fmt::Write as _;

use madelung_core::observables::{
    local_fields, mean_kinetic, mean_momentum, mean_quantum_potential, mean_total_energy, quantum_potential,
    EnergyMethod, KineticMethod, MomentumMethod,
};
use madelung_core::report::fmt17;
use madelung_core::verify::residuals_at;
use madelung_core::{integrate, PotentialSpec, Result, WaveField};

use crate::scenario::SeriesKind;

fn header(kind: SeriesKind) -> &'static str {
    match kind {
        SeriesKind::Density => "# t[time]\tx[length]\tdensity[1/length]",
        SeriesKind::Phase => "# t[time]\tx[length]\tphase[rad]",
        SeriesKind::Velocity => "# t[time]\tx[length]\tvelocity[length/time]\tvalid[0/1]",
        SeriesKind::QuantumPotential => "# t[time]\tx[length]\tquantum_potential[energy]\tvalid[0/1]",
        SeriesKind::Observables => {
            "# t[time]\tnorm[1]\tmean_x[length]\tmean_p[momentum]\tmean_kinetic[energy]\tmean_energy[energy]\tmean_quantum_potential[energy]"
        }
        SeriesKind::Residuals => "# t[time]\tcontinuity[1/(length^1/2 time)]\tqhj[energy]\tmask_fraction[1]",
    }
}

fn row(out: &mut String, cells: &[f64]) {
    let line: Vec<String> = cells.iter().map(|&c| fmt17(c)).collect();
    let _ = writeln!(out, "{}", line.join("\t"));
}

fn per_point(
    out: &mut String,
    snapshots: &[WaveField],
    times: &[f64],
    field: impl Fn(&WaveField) -> Result<Vec<Vec<f64>>>,
) -> Result<()> {
    for (psi, &t) in snapshots.iter().zip(times) {
        let columns = field(psi)?;
        let grid = psi.grid();
        for i in 0..grid.n_points() {
            let mut cells = vec![t, grid.position(i)];
            cells.extend(columns.iter().map(|c| c[i]));
            row(out, &cells);
        }
    }
    Ok(())
}

fn flags(valid: &[bool]) -> Vec<f64> {
    valid.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect()
}

/// Renders one series for the given snapshots. An empty snapshot list
/// gives the header alone.
pub fn render_series(
    kind: SeriesKind,
    snapshots: &[WaveField],
    times: &[f64],
    potential: &PotentialSpec,
) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{}", header(kind));
    match kind {
        SeriesKind::Density => per_point(&mut out, snapshots, times, |psi| Ok(vec![psi.density()]))?,
        SeriesKind::Phase => {
            per_point(&mut out, snapshots, times, |psi| Ok(vec![psi.values().iter().map(|v| v.arg()).collect()]))?
        }
        SeriesKind::Velocity => {
            for (psi, &t) in snapshots.iter().zip(times) {
                let fields = local_fields(psi, potential, t)?;
                per_point(&mut out, std::slice::from_ref(psi), &[t], |_| {
                    Ok(vec![fields.velocity.clone(), flags(&fields.valid_mask)])
                })?;
            }
        }
        SeriesKind::QuantumPotential => per_point(&mut out, snapshots, times, |psi| {
            let q = quantum_potential(psi)?;
            Ok(vec![q.values, flags(&q.valid)])
        })?,
        SeriesKind::Observables => {
            for (psi, &t) in snapshots.iter().zip(times) {
                let grid = psi.grid();
                let x_rho: Vec<f64> = psi.density().iter().zip(grid.positions()).map(|(r, x)| r * x).collect();
                row(
                    &mut out,
                    &[
                        t,
                        psi.norm_squared(),
                        integrate(&x_rho, grid)?,
                        mean_momentum(psi, MomentumMethod::FourierSum)?.value,
                        mean_kinetic(psi, KineticMethod::FourierSum)?.value,
                        mean_total_energy(psi, potential, t, EnergyMethod::Hamiltonian)?.value,
                        mean_quantum_potential(psi)?.value,
                    ],
                );
            }
        }
        SeriesKind::Residuals => {
            let r = residuals_at(snapshots, times, potential)?;
            for i in 0..r.times.len() {
                row(&mut out, &[r.times[i], r.continuity_residual[i], r.qhj_residual[i], r.mask_fraction[i]]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use madelung_core::{Grid, StateSpec};

    fn snapshots() -> (Vec<WaveField>, Vec<f64>) {
        let g = Grid::natural(8, 8.0).unwrap();
        let psi = StateSpec::PlaneWave { k0: g.fundamental_wavenumber() }.sample(&g).unwrap();
        (vec![psi.clone(), psi.clone(), psi], vec![0.0, 0.5, 1.0])
    }

    #[test]
    fn density_layout_has_a_row_per_time_and_point() {
        let (s, t) = snapshots();
        let text = render_series(SeriesKind::Density, &s, &t, &PotentialSpec::Zero).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 25);
        assert!(lines[0].starts_with("# t[time]"));
        assert_eq!(lines[1].split('\t').count(), 3);
        assert_eq!(lines[9].split('\t').next().unwrap(), fmt17(0.5));
    }

    #[test]
    fn empty_selection_gives_header_only() {
        for kind in SeriesKind::ALL {
            let text = render_series(kind, &[], &[], &PotentialSpec::Zero).unwrap();
            assert_eq!(text.lines().count(), 1, "{kind:?}");
        }
    }

    #[test]
    fn per_time_series_have_one_row_per_snapshot() {
        let (s, t) = snapshots();
        for kind in [SeriesKind::Observables, SeriesKind::Residuals] {
            let text = render_series(kind, &s, &t, &PotentialSpec::Zero).unwrap();
            assert_eq!(text.lines().count(), 4, "{kind:?}");
        }
    }

    #[test]
    fn rendering_is_repeatable() {
        let (s, t) = snapshots();
        for kind in SeriesKind::ALL {
            let a = render_series(kind, &s, &t, &PotentialSpec::Zero).unwrap();
            let b = render_series(kind, &s, &t, &PotentialSpec::Zero).unwrap();
            assert_eq!(a, b);
        }
    }
}
