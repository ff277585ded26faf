//! Sectioned key-value run configuration (TOML syntax).
//!
//! Frequencies ν = ω/2π and rates (κ, K, ε) are given in MHz, durations in ns.

use std::collections::BTreeMap;

use kerrbit::dispersive::DriveContext;
use kerrbit::qubit::{explicit_spec, transmon_spectrum, tune_to_frequency, QubitSpec, TransmonParams};
use kerrbit::units::mhz;
use toml::{Table, Value};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("configuration syntax: {0}")]
    Syntax(String),
    #[error("missing required keys: {}", .0.join(", "))]
    MissingKey(Vec<String>),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {reason}")]
    UnitError { key: String, reason: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

const REQUIRED_SECTIONS: [&str; 3] = ["qubit", "resonator", "drive"];

fn schema(section: &str) -> Option<&'static [&'static str]> {
    Some(match section {
        "qubit" => &[
            "mode",
            "EC_MHz",
            "EJ_MHz",
            "EJ_ref_MHz",
            "g_ref_MHz",
            "f01_MHz",
            "levels",
            "charge_basis",
            "freqs_MHz",
            "couplings_MHz",
        ],
        "resonator" => &["nu_r_MHz", "lock_detuning_MHz", "K_MHz", "kappa_MHz"],
        "drive" => &["label", "nu_d_MHz", "eps_d_MHz"],
        "simulation" => &["M", "N", "rel_tol", "abs_tol", "t_final_ns", "T1_ns"],
        "experiment" => &[
            "nu_d_start_MHz",
            "nu_d_stop_MHz",
            "nu_d_step_MHz",
            "guard_MHz",
            "n_fit",
            "eps_d_start_MHz",
            "eps_d_stop_MHz",
            "eps_d_step_MHz",
            "init_levels",
            "t_s_ns",
            "sigma_ns",
            "d_eps_MHz",
            "eps_s_MHz",
            "t_hold_ns",
            "T1_ns",
        ],
        "output" => &["directory"],
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum QubitSection {
    Transmon { params: TransmonParams, f01_mhz: Option<f64> },
    Explicit { freqs_mhz: Vec<f64>, couplings_mhz: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResonatorRule {
    Fixed { nu_r_mhz: f64 },
    Locked { detuning_mhz: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonatorSection {
    pub rule: ResonatorRule,
    pub kerr_mhz: f64,
    pub kappa_mhz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveSection {
    pub label: String,
    pub nu_d_mhz: f64,
    pub eps_d_mhz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSection {
    pub levels: usize,
    pub fock: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_final_ns: f64,
    /// Qubit T₁ in ns; infinite disables qubit decay.
    pub t1_ns: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self { levels: 4, fock: 90, rel_tol: 1e-7, abs_tol: 1e-9, t_final_ns: 2000.0, t1_ns: f64::INFINITY }
    }
}

/// Inclusive arithmetic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSection {
    pub nu_d: Option<Range>,
    pub guard_mhz: f64,
    pub n_fit: usize,
    pub eps_d: Option<Range>,
    pub init_levels: Vec<usize>,
    pub t_s_ns: Vec<f64>,
    pub sigma_ns: Vec<f64>,
    pub d_eps_mhz: Vec<f64>,
    pub eps_s_mhz: Vec<f64>,
    pub t_hold_ns: f64,
    pub t1_ns: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub qubit: QubitSection,
    pub qubit_levels: usize,
    pub resonator: ResonatorSection,
    pub drive: DriveSection,
    pub simulation: SimulationSection,
    pub experiment: ExperimentSection,
    pub output_dir: Option<String>,
}

struct Section<'a> {
    name: &'a str,
    table: Option<&'a Table>,
    missing: &'a mut Vec<String>,
}

impl Section<'_> {
    fn key(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn unit_error(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::UnitError { key: self.key(key), reason: reason.into() }
    }

    fn number_value(&self, key: &str, v: &Value) -> Result<f64> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(self.unit_error(key, "expected a number")),
        }
    }

    fn opt_number(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| self.number_value(key, v)).transpose()
    }

    /// Finite number, recording it as missing when absent.
    fn number(&mut self, key: &str) -> Result<f64> {
        match self.opt_number(key)? {
            Some(v) if v.is_finite() => Ok(v),
            Some(_) => Err(self.unit_error(key, "must be finite")),
            None => {
                self.missing.push(self.key(key));
                Ok(f64::NAN)
            }
        }
    }

    fn positive(&self, key: &str, v: f64) -> Result<f64> {
        if v.is_nan() || v > 0.0 {
            Ok(v)
        } else {
            Err(self.unit_error(key, "must be positive"))
        }
    }

    fn opt_count(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(self.unit_error(key, "expected a non-negative integer")),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items.iter().map(|v| self.number_value(key, v)).collect::<Result<_>>().map(Some),
            Some(v) => Ok(Some(vec![self.number_value(key, v)?])),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.unit_error(key, "expected a string")),
        }
    }

    fn range(&self, prefix: &str, unit: &str) -> Result<Option<Range>> {
        let keys = [format!("{prefix}_start_{unit}"), format!("{prefix}_stop_{unit}"), format!("{prefix}_step_{unit}")];
        let values: Vec<Option<f64>> = keys.iter().map(|k| self.opt_number(k)).collect::<Result<_>>()?;
        match values.as_slice() {
            [None, None, None] => Ok(None),
            [Some(start), Some(stop), Some(step)] => {
                if !(step.is_finite() && *step > 0.0) {
                    return Err(self.unit_error(&keys[2], "step must be positive"));
                }
                if !(start.is_finite() && stop.is_finite() && stop >= start) {
                    return Err(self.unit_error(&keys[1], "stop must not precede start"));
                }
                Ok(Some(Range { start: *start, stop: *stop, step: *step }))
            }
            _ => Err(ConfigError::MissingKey(
                keys.iter().zip(&values).filter(|(_, v)| v.is_none()).map(|(k, _)| self.key(k)).collect(),
            )),
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    for (name, value) in &doc {
        let allowed = schema(name).ok_or_else(|| ConfigError::UnknownKey(name.clone()))?;
        let table = value
            .as_table()
            .ok_or_else(|| ConfigError::UnitError { key: name.clone(), reason: "expected a section".into() })?;
        if let Some(key) = table.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(format!("{name}.{key}")));
        }
    }
    let absent: Vec<String> =
        REQUIRED_SECTIONS.iter().filter(|s| !doc.contains_key(**s)).map(|s| format!("[{s}]")).collect();
    if !absent.is_empty() {
        return Err(ConfigError::MissingKey(absent));
    }

    let mut missing = Vec::new();
    let tables: BTreeMap<&str, &Table> = doc.iter().filter_map(|(k, v)| v.as_table().map(|t| (k.as_str(), t))).collect();

    let (qubit, qubit_levels) = {
        let mut s = Section { name: "qubit", table: tables.get("qubit").copied(), missing: &mut missing };
        parse_qubit(&mut s)?
    };
    let resonator = {
        let mut s = Section { name: "resonator", table: tables.get("resonator").copied(), missing: &mut missing };
        parse_resonator(&mut s)?
    };
    let drive = {
        let mut s = Section { name: "drive", table: tables.get("drive").copied(), missing: &mut missing };
        let nu_d_mhz = s.number("nu_d_MHz")?;
        let eps_d_mhz = s.opt_number("eps_d_MHz")?.unwrap_or(0.0);
        if !(eps_d_mhz >= 0.0 && eps_d_mhz.is_finite()) {
            return Err(s.unit_error("eps_d_MHz", "must be finite and non-negative"));
        }
        DriveSection { label: s.string("label")?.unwrap_or_else(|| "run".into()), nu_d_mhz: s.positive("nu_d_MHz", nu_d_mhz)?, eps_d_mhz }
    };
    let simulation = {
        let s = Section { name: "simulation", table: tables.get("simulation").copied(), missing: &mut missing };
        parse_simulation(&s)?
    };
    let experiment = {
        let s = Section { name: "experiment", table: tables.get("experiment").copied(), missing: &mut missing };
        parse_experiment(&s)?
    };
    let output_dir = {
        let s = Section { name: "output", table: tables.get("output").copied(), missing: &mut missing };
        s.string("directory")?
    };
    if !missing.is_empty() {
        return Err(ConfigError::MissingKey(missing));
    }
    if simulation.levels > qubit_levels {
        return Err(ConfigError::UnitError {
            key: "simulation.M".into(),
            reason: format!("exceeds the {qubit_levels} qubit levels"),
        });
    }
    Ok(RunConfig { qubit, qubit_levels, resonator, drive, simulation, experiment, output_dir })
}

fn parse_qubit(s: &mut Section) -> Result<(QubitSection, usize)> {
    let mode = s.string("mode")?.unwrap_or_else(|| "transmon".into());
    match mode.as_str() {
        "transmon" => {
            let ec = s.number("EC_MHz")?;
            let g_ref = s.number("g_ref_MHz")?;
            let ej = s.opt_number("EJ_MHz")?;
            let f01 = s.opt_number("f01_MHz")?;
            let ej_ref = s.opt_number("EJ_ref_MHz")?;
            let levels = s.opt_count("levels")?.unwrap_or(5);
            if levels < 2 {
                return Err(s.unit_error("levels", "need at least two levels"));
            }
            let ej = match (ej, f01, ej_ref) {
                (Some(ej), _, _) => ej,
                (None, Some(_), Some(r)) => r,
                (None, Some(_), None) => {
                    s.missing.push(s.key("EJ_ref_MHz"));
                    f64::NAN
                }
                (None, None, _) => {
                    s.missing.push(s.key("EJ_MHz"));
                    s.missing.push(s.key("f01_MHz"));
                    f64::NAN
                }
            };
            for (key, v) in [("EC_MHz", ec), ("g_ref_MHz", g_ref), ("EJ_MHz", ej)] {
                s.positive(key, v)?;
            }
            let mut params = TransmonParams::new(ec, ej, g_ref, levels);
            if let Some(r) = ej_ref {
                params.ej_ref_mhz = s.positive("EJ_ref_MHz", r)?;
            }
            if let Some(b) = s.opt_count("charge_basis")? {
                params = params.with_charge_basis(b);
            }
            if let Some(f) = f01 {
                s.positive("f01_MHz", f)?;
            }
            Ok((QubitSection::Transmon { params, f01_mhz: f01 }, levels))
        }
        "explicit" => {
            let freqs = s.list("freqs_MHz")?;
            let couplings = s.list("couplings_MHz")?;
            match (freqs, couplings) {
                (Some(f), Some(g)) => {
                    let m = f.len();
                    Ok((QubitSection::Explicit { freqs_mhz: f, couplings_mhz: g }, m))
                }
                (f, g) => {
                    if f.is_none() {
                        s.missing.push(s.key("freqs_MHz"));
                    }
                    if g.is_none() {
                        s.missing.push(s.key("couplings_MHz"));
                    }
                    Ok((QubitSection::Explicit { freqs_mhz: vec![], couplings_mhz: vec![] }, usize::MAX))
                }
            }
        }
        other => Err(s.unit_error("mode", format!("`{other}` is neither `transmon` nor `explicit`"))),
    }
}

fn parse_resonator(s: &mut Section) -> Result<ResonatorSection> {
    let rule = match (s.opt_number("nu_r_MHz")?, s.opt_number("lock_detuning_MHz")?) {
        (Some(_), Some(_)) => {
            return Err(s.unit_error("nu_r_MHz", "give either nu_r_MHz or lock_detuning_MHz, not both"));
        }
        (Some(nu), None) => ResonatorRule::Fixed { nu_r_mhz: s.positive("nu_r_MHz", nu)? },
        (None, Some(d)) if d.is_finite() => ResonatorRule::Locked { detuning_mhz: d },
        (None, Some(_)) => return Err(s.unit_error("lock_detuning_MHz", "must be finite")),
        (None, None) => {
            s.missing.push(s.key("nu_r_MHz or resonator.lock_detuning_MHz"));
            ResonatorRule::Locked { detuning_mhz: f64::NAN }
        }
    };
    let kerr_mhz = s.number("K_MHz")?;
    let kappa_mhz = s.number("kappa_MHz")?;
    Ok(ResonatorSection { rule, kerr_mhz, kappa_mhz: s.positive("kappa_MHz", kappa_mhz)? })
}

fn t1_value(s: &Section, key: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(s.unit_error(key, "T1 must be positive (inf disables decay)"))
    }
}

fn parse_simulation(s: &Section) -> Result<SimulationSection> {
    let d = SimulationSection::default();
    let levels = s.opt_count("M")?.unwrap_or(d.levels);
    let fock = s.opt_count("N")?.unwrap_or(d.fock);
    let rel_tol = s.opt_number("rel_tol")?.unwrap_or(d.rel_tol);
    let abs_tol = s.opt_number("abs_tol")?.unwrap_or(d.abs_tol);
    for (key, v) in [("rel_tol", rel_tol), ("abs_tol", abs_tol)] {
        if !(1e-12..=1e-4).contains(&v) {
            return Err(s.unit_error(key, "tolerance outside [1e-12, 1e-4]"));
        }
    }
    let t_final_ns = s.positive("t_final_ns", s.opt_number("t_final_ns")?.unwrap_or(d.t_final_ns))?;
    let t1_ns = t1_value(s, "T1_ns", s.opt_number("T1_ns")?.unwrap_or(d.t1_ns))?;
    Ok(SimulationSection { levels, fock, rel_tol, abs_tol, t_final_ns, t1_ns })
}

fn parse_experiment(s: &Section) -> Result<ExperimentSection> {
    let non_negative = |key: &str, values: Vec<f64>| -> Result<Vec<f64>> {
        if values.iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(values)
        } else {
            Err(s.unit_error(key, "values must be finite and non-negative"))
        }
    };
    let init_levels = match s.list("init_levels")? {
        None => vec![0, 1],
        Some(v) if v.iter().all(|x| *x >= 0.0 && x.fract() == 0.0) => v.iter().map(|x| *x as usize).collect(),
        Some(_) => return Err(s.unit_error("init_levels", "expected level indices")),
    };
    let t1_ns = s.list("T1_ns")?.unwrap_or_else(|| vec![f64::INFINITY]);
    for v in &t1_ns {
        t1_value(s, "T1_ns", *v)?;
    }
    let guard_mhz = s.positive("guard_MHz", s.opt_number("guard_MHz")?.unwrap_or(1.0))?;
    let t_hold_ns = s.positive("t_hold_ns", s.opt_number("t_hold_ns")?.unwrap_or(500.0))?;
    Ok(ExperimentSection {
        nu_d: s.range("nu_d", "MHz")?,
        guard_mhz,
        n_fit: s.opt_count("n_fit")?.unwrap_or(kerrbit::oracle::DEFAULT_N_FIT),
        eps_d: s.range("eps_d", "MHz")?,
        init_levels,
        t_s_ns: non_negative("t_s_ns", s.list("t_s_ns")?.unwrap_or_default())?,
        sigma_ns: non_negative("sigma_ns", s.list("sigma_ns")?.unwrap_or_default())?,
        d_eps_mhz: non_negative("d_eps_MHz", s.list("d_eps_MHz")?.unwrap_or_default())?,
        eps_s_mhz: non_negative("eps_s_MHz", s.list("eps_s_MHz")?.unwrap_or_default())?,
        t_hold_ns,
        t1_ns,
    })
}

impl RunConfig {
    /// Qubit spectrum with `qubit_levels` levels.
    pub fn qubit_spec(&self) -> kerrbit::Result<QubitSpec> {
        match &self.qubit {
            QubitSection::Transmon { params, f01_mhz } => {
                let params = match f01_mhz {
                    Some(f) => tune_to_frequency(params, *f)?,
                    None => params.clone(),
                };
                transmon_spectrum(&params)
            }
            QubitSection::Explicit { freqs_mhz, couplings_mhz } => {
                let f: Vec<f64> = freqs_mhz.iter().map(|v| mhz(*v)).collect();
                let g: Vec<f64> = couplings_mhz.iter().map(|v| mhz(*v)).collect();
                explicit_spec(&f, &g)
            }
        }
    }

    /// Resonator frequency (MHz) for a drive frequency (MHz).
    pub fn nu_r_mhz(&self, nu_d_mhz: f64) -> f64 {
        match self.resonator.rule {
            ResonatorRule::Fixed { nu_r_mhz } => nu_r_mhz,
            ResonatorRule::Locked { detuning_mhz } => nu_d_mhz + detuning_mhz,
        }
    }

    pub fn drive_context(&self, nu_d_mhz: f64, eps_d_mhz: f64) -> DriveContext {
        DriveContext {
            omega_d: mhz(nu_d_mhz),
            omega_r: mhz(self.nu_r_mhz(nu_d_mhz)),
            kappa: mhz(self.resonator.kappa_mhz),
            kerr: mhz(self.resonator.kerr_mhz),
            eps_d: mhz(eps_d_mhz),
        }
    }

    /// Drive frequencies of the experiment grid, or the operating point alone.
    pub fn nu_d_grid(&self) -> Vec<f64> {
        self.experiment.nu_d.map_or_else(|| vec![self.drive.nu_d_mhz], |r| r.values())
    }
}
