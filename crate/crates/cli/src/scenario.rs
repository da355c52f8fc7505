//! Scenario files: a versioned header line followed by `key = value` pairs
//! grouped in `[section]`s.
//!
//! ```text
//! madelung-scenario v1
//! name = ho_ground_stationarity
//!
//! [grid]
//! n = 256
//! length = 20
//!
//! [state]
//! kind = ho_eigenstate
//! n = 0
//! omega = 1
//!
//! [potential]
//! kind = harmonic
//! omega = 1
//!
//! [schedule]
//! t1 = 6.283185307179586
//! dt = 0.001
//! snapshot_every = 500
//!
//! [checks]
//! stationarity = 1e-8
//! ```
//!
//! Top level keys: `name` (required), `description`.
//!
//! `[grid]`: `n`, `length` (required), `hbar`, `mass` (default 1).
//!
//! `[state]`: `kind` is one of
//! - `plane_wave`: `k0`
//! - `gaussian`: `x0`, `sigma0`, `k0` (default 0)
//! - `periodized_gaussian`: same keys, sums the periodic images
//! - `ho_eigenstate`: `n`, `omega`
//! - `ho_coherent`: `omega`, `displacement`, `momentum` (default 0)
//! - `superposition`: one or more `term = <re> <im> <kind> key=value ...`
//!
//! `[potential]`: `kind` is one of `zero`, `constant` (`value`),
//! `harmonic` (`omega`, `center`), `barrier` (`height`, `x_a`, `x_b`),
//! `well` (`depth`, `x_a`, `x_b`), `quartic` (`coefficient`, `center`),
//! `tabulated` (`positions`, `values` as comma lists). Any kind accepts
//! `ramp_rate`, which multiplies it by 1 + rate·t.
//!
//! `[schedule]`: `t0` (default 0), `t1`, `dt`, `snapshot_every`
//! (default 1), `scheme` = `split` | `cn` (default split).
//!
//! `[checks]`: `check = tolerance`, see [`CheckKind`].
//!
//! `[sweep]`: `hbar` as a comma list, used by `classical_limit`.
//!
//! `[outputs]`: `series` as a comma list of [`SeriesKind`] names.
//!
//! Lines starting with `#` are comments.

use std::collections::BTreeSet;
use std::fmt;

use madelung_core::propagators::step_count;
use madelung_core::states::periodized_gaussian;
use madelung_core::{Complex64, Grid, PotentialSpec, Scheme, StateSpec, WaveField};

pub const HEADER: &str = "madelung-scenario v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line, 0 when the problem is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Spec(StateSpec),
    Periodized { x0: f64, sigma0: f64, k0: f64 },
}

impl InitialState {
    pub fn sample(&self, grid: &Grid) -> madelung_core::Result<WaveField> {
        match self {
            InitialState::Spec(s) => s.sample(grid),
            InitialState::Periodized { x0, sigma0, k0 } => periodized_gaussian(grid, *x0, *sigma0, *k0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub snapshot_every: usize,
    pub scheme: Scheme,
}

/// Verification operations a scenario can request. Each carries one
/// tolerance from the `[checks]` section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckKind {
    /// Largest per-step change of ‖Ψ‖².
    NormDrift,
    /// max |⟨E⟩(t) − ⟨E⟩(t₀)| / |⟨E⟩(t₀)|.
    EnergyDrift,
    /// 1 − |⟨Ψ(t₁)|Ψ(t₀)⟩|.
    Stationarity,
    /// Spread of the three ⟨p⟩ routes over snapshots.
    MomentumRoutes,
    /// Spread of the three ⟨E_kin⟩ routes over snapshots.
    KineticRoutes,
    /// Spread of the available ⟨E⟩ routes at t₀.
    EnergyRoutes,
    /// Fisher forms against each other and against 8M⟨Q⟩/ℏ², relative.
    Fisher,
    /// max − min of the local total energy at t₀.
    LocalEnergy,
    /// Continuity and Hamilton–Jacobi residuals along the trajectory.
    Residuals,
    /// Recovered V against the true V, and its imaginary part.
    RecoverPotential,
    /// Plane-wave phase rate against ℏk²/2M + V/ℏ.
    Dispersion,
    /// Hydro/Schrödinger L² density difference.
    HydroEquivalence,
    /// Transmitted mass must exceed the tolerance; local kinetic energy in
    /// the barrier must go negative.
    Tunneling,
    /// |slope − 2| of ⟨Q⟩/⟨E_kin⟩ against ℏ; centre errors must decrease.
    ClassicalLimit,
    /// |order − 2| for both schemes; split and CN within their bound.
    SchemeAgreement,
    /// max |⟨x⟩(t) − x_classical(t)| for a harmonic potential.
    CoherentCentroid,
}

impl CheckKind {
    pub const ALL: [CheckKind; 16] = [
        CheckKind::NormDrift,
        CheckKind::EnergyDrift,
        CheckKind::Stationarity,
        CheckKind::MomentumRoutes,
        CheckKind::KineticRoutes,
        CheckKind::EnergyRoutes,
        CheckKind::Fisher,
        CheckKind::LocalEnergy,
        CheckKind::Residuals,
        CheckKind::RecoverPotential,
        CheckKind::Dispersion,
        CheckKind::HydroEquivalence,
        CheckKind::Tunneling,
        CheckKind::ClassicalLimit,
        CheckKind::SchemeAgreement,
        CheckKind::CoherentCentroid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::NormDrift => "norm_drift",
            CheckKind::EnergyDrift => "energy_drift",
            CheckKind::Stationarity => "stationarity",
            CheckKind::MomentumRoutes => "momentum_routes",
            CheckKind::KineticRoutes => "kinetic_routes",
            CheckKind::EnergyRoutes => "energy_routes",
            CheckKind::Fisher => "fisher",
            CheckKind::LocalEnergy => "local_energy",
            CheckKind::Residuals => "residuals",
            CheckKind::RecoverPotential => "recover_potential",
            CheckKind::Dispersion => "dispersion",
            CheckKind::HydroEquivalence => "hydro_equivalence",
            CheckKind::Tunneling => "tunneling",
            CheckKind::ClassicalLimit => "classical_limit",
            CheckKind::SchemeAgreement => "scheme_agreement",
            CheckKind::CoherentCentroid => "coherent_centroid",
        }
    }

    fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSpec {
    pub kind: CheckKind,
    pub tolerance: f64,
}

/// Columnar output files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SeriesKind {
    Density,
    Phase,
    Velocity,
    QuantumPotential,
    Observables,
    Residuals,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 6] = [
        SeriesKind::Density,
        SeriesKind::Phase,
        SeriesKind::Velocity,
        SeriesKind::QuantumPotential,
        SeriesKind::Observables,
        SeriesKind::Residuals,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::Density => "density",
            SeriesKind::Phase => "phase",
            SeriesKind::Velocity => "velocity",
            SeriesKind::QuantumPotential => "quantum_potential",
            SeriesKind::Observables => "observables",
            SeriesKind::Residuals => "residuals",
        }
    }

    fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub grid: Grid,
    pub state: InitialState,
    pub potential: PotentialSpec,
    pub schedule: Schedule,
    pub checks: Vec<CheckSpec>,
    pub sweep: Vec<f64>,
    pub outputs: Vec<SeriesKind>,
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    used: bool,
}

#[derive(Debug, Default)]
struct Section {
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.iter_mut().find(|e| e.key == key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn take_all(&mut self, key: &str) -> Vec<(String, usize)> {
        self.entries
            .iter_mut()
            .filter(|e| e.key == key)
            .map(|e| {
                e.used = true;
                (e.value.clone(), e.line)
            })
            .collect()
    }

    fn required(&mut self, key: &str, section: &str) -> Result<(String, usize), ParseError> {
        self.take(key).ok_or_else(|| ParseError { line: self.line, message: format!("[{section}] needs `{key}`") })
    }

    fn real(&mut self, key: &str, section: &str) -> Result<f64, ParseError> {
        let (v, line) = self.required(key, section)?;
        parse_real(&v, line)
    }

    fn real_or(&mut self, key: &str, default: f64) -> Result<f64, ParseError> {
        match self.take(key) {
            Some((v, line)) => parse_real(&v, line),
            None => Ok(default),
        }
    }

    fn optional_real(&mut self, key: &str) -> Result<Option<f64>, ParseError> {
        self.take(key).map(|(v, line)| parse_real(&v, line)).transpose()
    }

    fn count(&mut self, key: &str, section: &str) -> Result<usize, ParseError> {
        let (v, line) = self.required(key, section)?;
        parse_count(&v, line)
    }

    fn unused(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| !e.used)
    }
}

fn parse_real(v: &str, line: usize) -> Result<f64, ParseError> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(line, format!("expected a finite number, got `{v}`")),
    }
}

fn parse_count(v: &str, line: usize) -> Result<usize, ParseError> {
    v.trim().parse::<usize>().or_else(|_| err(line, format!("expected a non-negative integer, got `{v}`")))
}

fn parse_list(v: &str, line: usize) -> Result<Vec<f64>, ParseError> {
    v.split(',').map(|s| parse_real(s, line)).collect()
}

const SECTIONS: [&str; 8] = ["", "grid", "state", "potential", "schedule", "checks", "sweep", "outputs"];

/// Unrecognized keys, reported instead of rejected when parsing is not
/// strict.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Warnings(pub Vec<ParseError>);

/// Parses and validates a scenario. With `strict` unknown keys are errors;
/// otherwise they are returned as warnings.
pub fn parse_scenario(text: &str, strict: bool) -> Result<(Scenario, Warnings), ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut header_found = false;
    for (number, line) in lines.by_ref() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line != HEADER {
            return err(number, format!("expected header `{HEADER}`, got `{line}`"));
        }
        header_found = true;
        break;
    }
    if !header_found {
        return err(0, format!("missing header `{HEADER}`"));
    }

    let mut sections: Vec<(String, Section)> = vec![(String::new(), Section { line: 1, entries: Vec::new() })];
    for (number, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return err(number, format!("malformed section header `{line}`"));
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) || name.is_empty() {
                return err(number, format!("unknown section [{name}]"));
            }
            if sections.iter().any(|(s, _)| s == name) {
                return err(number, format!("duplicate section [{name}]"));
            }
            sections.push((name.to_string(), Section { line: number, entries: Vec::new() }));
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(number, format!("expected `key = value`, got `{line}`"));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return err(number, "empty key or value");
        }
        let (_, section) = sections.last_mut().expect("top-level section");
        if key != "term" && section.entries.iter().any(|e| e.key == key) {
            return err(number, format!("duplicate key `{key}`"));
        }
        section.entries.push(Entry { key: key.to_string(), value: value.to_string(), line: number, used: false });
    }

    let mut get = |name: &str| -> Option<Section> {
        sections.iter().position(|(s, _)| s == name).map(|i| std::mem::take(&mut sections[i].1))
    };
    let mut top = get("").expect("top-level section");
    let mut grid_s = get("grid").ok_or_else(|| ParseError { line: 0, message: "missing [grid] section".into() })?;
    let mut state_s = get("state").ok_or_else(|| ParseError { line: 0, message: "missing [state] section".into() })?;
    let mut potential_s = get("potential").unwrap_or_default();
    let mut schedule_s =
        get("schedule").ok_or_else(|| ParseError { line: 0, message: "missing [schedule] section".into() })?;
    let mut checks_s = get("checks").unwrap_or_default();
    let mut sweep_s = get("sweep").unwrap_or_default();
    let mut outputs_s = get("outputs").unwrap_or_default();

    let (name, name_line) = top.required("name", "top level")?;
    if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return err(name_line, format!("scenario name `{name}` may only contain letters, digits, `_` and `-`"));
    }
    let description = top.take("description").map(|(d, _)| d).unwrap_or_default();

    let grid = parse_grid(&mut grid_s)?;
    let state = parse_state(&mut state_s, &grid)?;
    let potential = parse_potential(&mut potential_s, &grid)?;
    let schedule = parse_schedule(&mut schedule_s)?;

    let mut checks = Vec::new();
    for e in checks_s.entries.iter_mut() {
        let kind = match CheckKind::parse(&e.key) {
            Some(k) => k,
            None => continue,
        };
        e.used = true;
        let tolerance = parse_real(&e.value, e.line)?;
        if tolerance <= 0.0 {
            return err(e.line, format!("tolerance for `{}` must be positive", e.key));
        }
        checks.push(CheckSpec { kind, tolerance });
    }
    checks.sort_by_key(|c| c.kind);

    let sweep = match sweep_s.take("hbar") {
        Some((v, line)) => {
            let values = parse_list(&v, line)?;
            if values.iter().any(|&h| h <= 0.0) || values.windows(2).any(|w| w[1] >= w[0]) {
                return err(line, "ℏ sweep must be positive and strictly decreasing");
            }
            values
        }
        None => Vec::new(),
    };
    if checks.iter().any(|c| c.kind == CheckKind::ClassicalLimit) && sweep.is_empty() {
        return err(checks_s.line, "classical_limit needs a [sweep] section with `hbar`");
    }

    let mut outputs = BTreeSet::new();
    if let Some((v, line)) = outputs_s.take("series") {
        for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let kind = SeriesKind::parse(item)
                .ok_or_else(|| ParseError { line, message: format!("unknown series `{item}`") })?;
            outputs.insert(kind);
        }
    }

    let mut warnings = Vec::new();
    for (section_name, section) in [
        ("top level", &top),
        ("grid", &grid_s),
        ("state", &state_s),
        ("potential", &potential_s),
        ("schedule", &schedule_s),
        ("checks", &checks_s),
        ("sweep", &sweep_s),
        ("outputs", &outputs_s),
    ] {
        for e in section.unused() {
            let problem = ParseError { line: e.line, message: format!("unknown key `{}` in {section_name}", e.key) };
            if strict {
                return Err(problem);
            }
            warnings.push(problem);
        }
    }

    let scenario = Scenario {
        name,
        description,
        grid,
        state,
        potential,
        schedule,
        checks,
        sweep,
        outputs: outputs.into_iter().collect(),
    };
    Ok((scenario, Warnings(warnings)))
}

fn parse_grid(s: &mut Section) -> Result<Grid, ParseError> {
    let n = s.count("n", "grid")?;
    let length = s.real("length", "grid")?;
    let hbar = s.real_or("hbar", 1.0)?;
    let mass = s.real_or("mass", 1.0)?;
    Grid::new(n, length, hbar, mass).or_else(|e| err(s.line, e.to_string()))
}

fn state_from_pairs(kind: &str, s: &mut Section, line: usize) -> Result<InitialState, ParseError> {
    let spec = match kind {
        "plane_wave" => StateSpec::PlaneWave { k0: s.real("k0", "state")? },
        "gaussian" => StateSpec::GaussianPacket {
            x0: s.real("x0", "state")?,
            sigma0: s.real("sigma0", "state")?,
            k0: s.real_or("k0", 0.0)?,
        },
        "periodized_gaussian" => {
            return Ok(InitialState::Periodized {
                x0: s.real("x0", "state")?,
                sigma0: s.real("sigma0", "state")?,
                k0: s.real_or("k0", 0.0)?,
            })
        }
        "ho_eigenstate" => StateSpec::HoEigenstate { n: s.count("n", "state")?, omega: s.real("omega", "state")? },
        "ho_coherent" => StateSpec::HoCoherent {
            omega: s.real("omega", "state")?,
            displacement: s.real("displacement", "state")?,
            momentum: s.real_or("momentum", 0.0)?,
        },
        other => return err(line, format!("unknown state kind `{other}`")),
    };
    Ok(InitialState::Spec(spec))
}

fn parse_state(s: &mut Section, grid: &Grid) -> Result<InitialState, ParseError> {
    let (kind, line) = s.required("kind", "state")?;
    let state = if kind == "superposition" {
        let terms = s.take_all("term");
        if terms.is_empty() {
            return err(line, "superposition needs at least one `term`");
        }
        let mut components = Vec::new();
        for (value, term_line) in terms {
            let mut words = value.split_whitespace();
            let (Some(re), Some(im), Some(kind)) = (words.next(), words.next(), words.next()) else {
                return err(term_line, "term needs `<re> <im> <kind> key=value ...`");
            };
            let weight = Complex64::new(parse_real(re, term_line)?, parse_real(im, term_line)?);
            let mut inner = Section { line: term_line, entries: Vec::new() };
            for pair in words {
                let Some((k, v)) = pair.split_once('=') else {
                    return err(term_line, format!("expected key=value in term, got `{pair}`"));
                };
                inner.entries.push(Entry { key: k.into(), value: v.into(), line: term_line, used: false });
            }
            let InitialState::Spec(spec) = state_from_pairs(kind, &mut inner, term_line)? else {
                return err(term_line, "periodized_gaussian cannot be a superposition term");
            };
            if let Some(e) = inner.unused().next() {
                return err(term_line, format!("unknown key `{}` in term", e.key));
            }
            components.push((weight, spec));
        }
        InitialState::Spec(StateSpec::Superposition { components })
    } else {
        state_from_pairs(&kind, s, line)?
    };
    state.sample(grid).map(|_| state).or_else(|e| err(line, e.to_string()))
}

fn parse_potential(s: &mut Section, grid: &Grid) -> Result<PotentialSpec, ParseError> {
    let Some((kind, line)) = s.take("kind") else {
        return if s.entries.is_empty() { Ok(PotentialSpec::Zero) } else { err(s.line, "[potential] needs `kind`") };
    };
    let spec = match kind.as_str() {
        "zero" => PotentialSpec::Zero,
        "constant" => PotentialSpec::Constant { value: s.real("value", "potential")? },
        "harmonic" => {
            PotentialSpec::Harmonic { omega: s.real("omega", "potential")?, center: s.optional_real("center")? }
        }
        "barrier" => PotentialSpec::Barrier {
            height: s.real("height", "potential")?,
            x_a: s.real("x_a", "potential")?,
            x_b: s.real("x_b", "potential")?,
        },
        "well" => PotentialSpec::Well {
            depth: s.real("depth", "potential")?,
            x_a: s.real("x_a", "potential")?,
            x_b: s.real("x_b", "potential")?,
        },
        "quartic" => PotentialSpec::Quartic {
            coefficient: s.real("coefficient", "potential")?,
            center: s.optional_real("center")?,
        },
        "tabulated" => {
            let (p, pl) = s.required("positions", "potential")?;
            let (v, vl) = s.required("values", "potential")?;
            PotentialSpec::Tabulated { positions: parse_list(&p, pl)?, values: parse_list(&v, vl)? }
        }
        other => return err(line, format!("unknown potential kind `{other}`")),
    };
    let spec = match s.optional_real("ramp_rate")? {
        Some(rate) => PotentialSpec::TimeRamped { inner: Box::new(spec), rate },
        None => spec,
    };
    spec.validate(grid).map(|_| spec).or_else(|e| err(line, e.to_string()))
}

fn parse_schedule(s: &mut Section) -> Result<Schedule, ParseError> {
    let t0 = s.real_or("t0", 0.0)?;
    let t1 = s.real("t1", "schedule")?;
    let (dt_text, dt_line) = s.required("dt", "schedule")?;
    let dt = parse_real(&dt_text, dt_line)?;
    if t1 <= t0 {
        return err(s.line, format!("schedule needs t1 > t0, got t0 = {t0}, t1 = {t1}"));
    }
    if dt <= 0.0 {
        return err(dt_line, "dt must be positive");
    }
    step_count(t0, t1, dt).or_else(|e| err(dt_line, e.to_string()))?;
    let snapshot_every = match s.take("snapshot_every") {
        Some((v, line)) => match parse_count(&v, line)? {
            0 => return err(line, "snapshot_every must be at least 1"),
            k => k,
        },
        None => 1,
    };
    let scheme = match s.take("scheme") {
        Some((v, line)) => v.parse::<Scheme>().or_else(|e| err(line, e.to_string()))?,
        None => Scheme::Split,
    };
    Ok(Schedule { t0, t1, dt, snapshot_every, scheme })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "madelung-scenario v1
name = free
[grid]
n = 256
length = 20
[state]
kind = gaussian
x0 = 10
sigma0 = 1
[potential]
kind = zero
[schedule]
t1 = 1
dt = 0.01
";

    #[test]
    fn minimal_free_particle() {
        let (s, w) = parse_scenario(MINIMAL, true).unwrap();
        assert!(w.0.is_empty());
        assert_eq!(s.name, "free");
        assert_eq!(s.grid.n_points(), 256);
        assert_eq!(s.state, InitialState::Spec(StateSpec::GaussianPacket { x0: 10.0, sigma0: 1.0, k0: 0.0 }));
        assert_eq!(s.potential, PotentialSpec::Zero);
        assert_eq!(s.schedule.snapshot_every, 1);
        assert_eq!(s.schedule.scheme, Scheme::Split);
        assert!(s.checks.is_empty() && s.outputs.is_empty());
    }

    #[test]
    fn misspelled_key_names_its_line() {
        let text = MINIMAL.replace("length = 20", "length = 20\nhbarr = 1");
        let e = parse_scenario(&text, true).unwrap_err();
        assert_eq!(e.line, 6);
        assert!(e.message.contains("hbarr"), "{e}");
        let (_, w) = parse_scenario(&text, false).unwrap();
        assert_eq!(w.0.len(), 1);
        assert_eq!(w.0[0].line, 6);
    }

    #[test]
    fn reversed_barrier_is_rejected() {
        let text = MINIMAL.replace("kind = zero", "kind = barrier\nheight = 1\nx_a = 12\nx_b = 8");
        let e = parse_scenario(&text, true).unwrap_err();
        assert_eq!(e.line, 11);
    }

    #[test]
    fn header_is_required_and_versioned() {
        let e = parse_scenario(&MINIMAL.replace("v1", "v2"), true).unwrap_err();
        assert_eq!(e.line, 1);
        assert!(parse_scenario("# nothing\n", true).is_err());
    }

    #[test]
    fn malformed_values() {
        for (from, to, line) in [
            ("n = 256", "n = sixty", 4),
            ("dt = 0.01", "dt = 0.03", 14),
            ("dt = 0.01", "dt = -0.01", 14),
            ("sigma0 = 1", "sigma0 = nan", 9),
            ("sigma0 = 1", "sigma0 = 0.01", 7),
            ("[potential]", "[potentials]", 10),
            ("t1 = 1", "t1 = 1\nt1 = 2", 14),
            ("t1 = 1", "t1 1", 13),
        ] {
            let e = parse_scenario(&MINIMAL.replace(from, to), true).unwrap_err();
            assert_eq!(e.line, line, "{to}: {e}");
        }
    }

    #[test]
    fn checks_sweep_and_outputs() {
        let text = format!(
            "{MINIMAL}[checks]\nnorm_drift = 1e-13\nresiduals = 1e-9\n[outputs]\nseries = observables, density\n"
        );
        let (s, _) = parse_scenario(&text, true).unwrap();
        assert_eq!(s.checks.len(), 2);
        assert_eq!(s.checks[0], CheckSpec { kind: CheckKind::NormDrift, tolerance: 1e-13 });
        assert_eq!(s.outputs, vec![SeriesKind::Density, SeriesKind::Observables]);

        let e = parse_scenario(&format!("{MINIMAL}[checks]\nresiduals = 0\n"), true).unwrap_err();
        assert_eq!(e.line, 16);
        let e = parse_scenario(&format!("{MINIMAL}[checks]\nclassical_limit = 0.2\n"), true).unwrap_err();
        assert!(e.message.contains("sweep"));
        let e = parse_scenario(&format!("{MINIMAL}[sweep]\nhbar = 0.1, 0.2\n"), true).unwrap_err();
        assert_eq!(e.line, 16);
        let e = parse_scenario(&format!("{MINIMAL}[outputs]\nseries = denisty\n"), true).unwrap_err();
        assert_eq!(e.line, 16);
    }

    #[test]
    fn superposition_and_ramp() {
        let text = MINIMAL
            .replace(
                "kind = gaussian\nx0 = 10\nsigma0 = 1",
                "kind = superposition\nterm = 1 0 ho_eigenstate n=0 omega=1\nterm = 0 1 ho_eigenstate n=1 omega=1",
            )
            .replace("kind = zero", "kind = harmonic\nomega = 1\nramp_rate = 0.5");
        let (s, _) = parse_scenario(&text, true).unwrap();
        let InitialState::Spec(StateSpec::Superposition { components }) = &s.state else { panic!() };
        assert_eq!(components.len(), 2);
        assert_eq!(components[1].0, Complex64::new(0.0, 1.0));
        assert!(matches!(s.potential, PotentialSpec::TimeRamped { rate, .. } if rate == 0.5));

        let bad = text.replace("n=1 omega=1", "n=1 omega=1 extra=2");
        assert_eq!(parse_scenario(&bad, true).unwrap_err().line, 9);
    }
}
