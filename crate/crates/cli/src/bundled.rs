//! Scenario files shipped with the binary.

/// `(name, file contents)`, sorted by name.
pub const SCENARIOS: [(&str, &str); 12] = [
    ("classical_limit_quartic", include_str!("../scenarios/classical_limit_quartic.scn")),
    ("coherent_residuals", include_str!("../scenarios/coherent_residuals.scn")),
    ("dispersion_k1_v0", include_str!("../scenarios/dispersion_k1_v0.scn")),
    ("dispersion_k2_v025", include_str!("../scenarios/dispersion_k2_v025.scn")),
    ("free_packet_three_routes", include_str!("../scenarios/free_packet_three_routes.scn")),
    ("ho_ground_stationarity", include_str!("../scenarios/ho_ground_stationarity.scn")),
    ("hydro_equivalence_coherent", include_str!("../scenarios/hydro_equivalence_coherent.scn")),
    ("recover_barrier", include_str!("../scenarios/recover_barrier.scn")),
    ("recover_harmonic", include_str!("../scenarios/recover_harmonic.scn")),
    ("scheme_crosscheck", include_str!("../scenarios/scheme_crosscheck.scn")),
    ("superposition_energy", include_str!("../scenarios/superposition_energy.scn")),
    ("tunneling_basic", include_str!("../scenarios/tunneling_basic.scn")),
];

/// Directory holding the bundled scenario files in a source checkout.
pub fn scenario_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn every_bundled_scenario_parses_strictly_under_its_file_name() {
        for (name, text) in SCENARIOS {
            let (s, warnings) = parse_scenario(text, true).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name, name);
            assert!(warnings.0.is_empty());
        }
        assert!(SCENARIOS.windows(2).all(|w| w[0].0 < w[1].0));
    }
}
