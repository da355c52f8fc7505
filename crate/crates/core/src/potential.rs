//! Symbolic potentials V(t, x), sampleable on any grid at any time.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Real potential energy V(t, x) in natural units.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    Constant {
        value: f64,
    },
    /// ½ M ω² (x − center)²; `center = None` means the domain midpoint.
    Harmonic {
        omega: f64,
        center: Option<f64>,
    },
    /// `height` on `[x_a, x_b]`, zero elsewhere.
    Barrier {
        height: f64,
        x_a: f64,
        x_b: f64,
    },
    /// `−depth` on `[x_a, x_b]`, zero elsewhere.
    Well {
        depth: f64,
        x_a: f64,
        x_b: f64,
    },
    /// c (x − center)⁴ / 4; `center = None` means the domain midpoint.
    Quartic {
        coefficient: f64,
        center: Option<f64>,
    },
    /// Piecewise-linear interpolation through `(positions[i], values[i])`,
    /// held constant beyond the end points.
    Tabulated {
        positions: Vec<f64>,
        values: Vec<f64>,
    },
    /// (1 + rate·t) · inner.
    TimeRamped {
        inner: Box<PotentialSpec>,
        rate: f64,
    },
}

impl PotentialSpec {
    /// Checks parameter ranges against the grid the potential will be
    /// sampled on.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Configuration(format!("potential parameter {name} must be finite")))
            }
        };
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::Constant { value } => finite("value", *value),
            PotentialSpec::Harmonic { omega, center } | PotentialSpec::Quartic { coefficient: omega, center } => {
                finite("omega/coefficient", *omega)?;
                if *omega <= 0.0 {
                    return Err(Error::Configuration("oscillator parameter must be positive".into()));
                }
                if let Some(c) = center {
                    finite("center", *c)?;
                }
                Ok(())
            }
            PotentialSpec::Barrier { height: h, x_a, x_b } | PotentialSpec::Well { depth: h, x_a, x_b } => {
                finite("height", *h)?;
                if !(0.0 < *x_a && x_a < x_b && *x_b < grid.length()) {
                    return Err(Error::Configuration(format!(
                        "edges must satisfy 0 < x_a < x_b < L, got x_a = {x_a}, x_b = {x_b}, L = {}",
                        grid.length()
                    )));
                }
                Ok(())
            }
            PotentialSpec::Tabulated { positions, values } => {
                if positions.is_empty() || positions.len() != values.len() {
                    return Err(Error::Configuration("tabulated potential needs matching, non-empty columns".into()));
                }
                if positions.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::Configuration("tabulated positions must be strictly increasing".into()));
                }
                positions.iter().chain(values).try_for_each(|&v| finite("table entry", v))
            }
            PotentialSpec::TimeRamped { inner, rate } => {
                finite("rate", *rate)?;
                if matches!(**inner, PotentialSpec::TimeRamped { .. }) {
                    return Err(Error::Configuration("nested ramps are not supported".into()));
                }
                inner.validate(grid)
            }
        }
    }

    /// V(t, x).
    pub fn value(&self, t: f64, x: f64, grid: &Grid) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Constant { value } => *value,
            PotentialSpec::Harmonic { omega, center } => {
                let d = x - center.unwrap_or(grid.center());
                0.5 * grid.mass() * omega * omega * d * d
            }
            PotentialSpec::Barrier { height, x_a, x_b } => {
                if (*x_a..=*x_b).contains(&x) {
                    *height
                } else {
                    0.0
                }
            }
            PotentialSpec::Well { depth, x_a, x_b } => {
                if (*x_a..=*x_b).contains(&x) {
                    -*depth
                } else {
                    0.0
                }
            }
            PotentialSpec::Quartic { coefficient, center } => {
                let d = x - center.unwrap_or(grid.center());
                0.25 * coefficient * d.powi(4)
            }
            PotentialSpec::Tabulated { positions, values } => interpolate(positions, values, x),
            PotentialSpec::TimeRamped { inner, rate } => (1.0 + rate * t) * inner.value(t, x, grid),
        }
    }

    /// V(t, x_i) at every grid node.
    pub fn sample(&self, grid: &Grid, t: f64) -> Vec<f64> {
        (0..grid.n_points()).map(|i| self.value(t, grid.position(i), grid)).collect()
    }

    /// Analytic force −∂V/∂x, where one exists in closed form.
    pub fn force(&self, t: f64, x: f64, grid: &Grid) -> Option<f64> {
        match self {
            PotentialSpec::Zero | PotentialSpec::Constant { .. } => Some(0.0),
            PotentialSpec::Harmonic { omega, center } => {
                Some(-grid.mass() * omega * omega * (x - center.unwrap_or(grid.center())))
            }
            PotentialSpec::Quartic { coefficient, center } => {
                Some(-coefficient * (x - center.unwrap_or(grid.center())).powi(3))
            }
            PotentialSpec::TimeRamped { inner, rate } => inner.force(t, x, grid).map(|f| (1.0 + rate * t) * f),
            PotentialSpec::Barrier { .. } | PotentialSpec::Well { .. } | PotentialSpec::Tabulated { .. } => None,
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self, PotentialSpec::TimeRamped { rate, .. } if *rate != 0.0)
    }

    /// ω of a harmonic potential centered on the domain midpoint, the only
    /// case with a known eigenbasis.
    pub fn centered_harmonic_omega(&self, grid: &Grid) -> Option<f64> {
        match self {
            PotentialSpec::Harmonic { omega, center } => {
                let c = center.unwrap_or(grid.center());
                ((c - grid.center()).abs() < 1e-12 * grid.length()).then_some(*omega)
            }
            _ => None,
        }
    }

    /// Largest |V| over the grid at time t.
    pub fn max_abs(&self, grid: &Grid, t: f64) -> f64 {
        self.sample(grid, t).into_iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let hi = xs.partition_point(|&p| p <= x);
    let lo = hi - 1;
    let w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + w * (ys[hi] - ys[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::natural(64, 10.0).unwrap()
    }

    #[test]
    fn harmonic_centered_on_midpoint() {
        let g = grid();
        let v = PotentialSpec::Harmonic { omega: 2.0, center: None };
        assert_eq!(v.value(0.0, 5.0, &g), 0.0);
        assert!((v.value(0.0, 6.0, &g) - 2.0).abs() < 1e-15);
        assert_eq!(v.force(0.0, 6.0, &g), Some(-4.0));
        assert_eq!(v.centered_harmonic_omega(&g), Some(2.0));
        let off = PotentialSpec::Harmonic { omega: 2.0, center: Some(4.0) };
        assert_eq!(off.centered_harmonic_omega(&g), None);
    }

    #[test]
    fn barrier_edges_validated() {
        let g = grid();
        let ok = PotentialSpec::Barrier { height: 1.0, x_a: 4.0, x_b: 5.0 };
        ok.validate(&g).unwrap();
        assert_eq!(ok.value(0.0, 4.5, &g), 1.0);
        assert_eq!(ok.value(0.0, 5.5, &g), 0.0);
        let swapped = PotentialSpec::Barrier { height: 1.0, x_a: 5.0, x_b: 4.0 };
        assert!(swapped.validate(&g).is_err());
        let outside = PotentialSpec::Well { depth: 1.0, x_a: 4.0, x_b: 11.0 };
        assert!(outside.validate(&g).is_err());
    }

    #[test]
    fn ramp_with_zero_rate_is_bitwise_inner() {
        let g = grid();
        let inner = PotentialSpec::Harmonic { omega: 1.3, center: None };
        let ramp = PotentialSpec::TimeRamped { inner: Box::new(inner.clone()), rate: 0.0 };
        assert!(!ramp.is_time_dependent());
        assert_eq!(ramp.sample(&g, 7.5), inner.sample(&g, 0.0));
        let live = PotentialSpec::TimeRamped { inner: Box::new(inner.clone()), rate: 0.5 };
        assert!(live.is_time_dependent());
        assert!((live.value(2.0, 6.0, &g) - 2.0 * inner.value(0.0, 6.0, &g)).abs() < 1e-15);
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let g = grid();
        let v = PotentialSpec::Tabulated { positions: vec![1.0, 2.0, 4.0], values: vec![0.0, 1.0, -1.0] };
        v.validate(&g).unwrap();
        assert_eq!(v.value(0.0, 0.0, &g), 0.0);
        assert_eq!(v.value(0.0, 1.5, &g), 0.5);
        assert_eq!(v.value(0.0, 3.0, &g), 0.0);
        assert_eq!(v.value(0.0, 9.0, &g), -1.0);
        let bad = PotentialSpec::Tabulated { positions: vec![1.0, 1.0], values: vec![0.0, 1.0] };
        assert!(bad.validate(&g).is_err());
    }

    #[test]
    fn quartic_force_is_minus_gradient() {
        let g = grid();
        let v = PotentialSpec::Quartic { coefficient: 1.0, center: None };
        let x = 6.3;
        let h = 1e-5;
        let fd = -(v.value(0.0, x + h, &g) - v.value(0.0, x - h, &g)) / (2.0 * h);
        assert!((v.force(0.0, x, &g).unwrap() - fd).abs() < 1e-8);
    }
}
