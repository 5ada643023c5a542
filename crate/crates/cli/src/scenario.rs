//! Scenario files: flat `key = value` pairs grouped under `[section]`
//! headers. `#` and `;` start comments. Every key is optional; unknown
//! sections or keys are errors.

use rydfm::analysis::{AllanEstimator, OperatingPoint};
use rydfm::constants::{A0, AMU, E_CHARGE};
use rydfm::fm::{beta_from_dbm, FmConfig, RamParams, DEFAULT_V_PI};
use rydfm::noise::{NoiseBudget, NoiseKind};
use rydfm::quantum::{cesium_number_density, DopplerOptions, FieldDrive, LadderSystem};
use rydfm::servo::{DriftModel, PidGains};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::PathBuf;
use thiserror::Error;

const MHZ: f64 = 2.0 * PI * 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {second}: duplicate key '{key}' (first set on line {first})")]
    DuplicateKey { key: String, first: usize, second: usize },
    #[error("line {line}: unknown key '{key}' in section [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("{}invalid value for '{key}': {reason}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    InvariantViolation { line: Option<usize>, key: String, reason: String },
}

/// Recognised keys per section.
pub const KEYS: &[(&str, &[&str])] = &[
    (
        "system",
        &[
            "lambda_probe_nm",
            "lambda_coupling_nm",
            "gamma2_mhz",
            "gamma3_khz",
            "gamma4_khz",
            "t2_us",
            "mu12_cm",
            "mu_rf_ea0",
            "temperature_k",
            "density_m3",
            "cell_length_m",
            "mass_amu",
        ],
    ),
    ("drive", &["omega_p_mhz", "omega_c_mhz", "delta_p_mhz", "delta_c_mhz", "delta_rf_mhz", "e_rf_uv_cm"]),
    ("fm", &["f_m_mhz", "drive_dbm", "v_pi", "beta", "n_max", "lo_phases_deg", "apply_ram"]),
    (
        "ram",
        &[
            "alpha_rad",
            "beta_angle_rad",
            "m_index",
            "dphi_n_rad",
            "dphi_dc_rad",
            "e0_sq",
            "dt_s",
            "kp",
            "ki",
            "kd",
            "output_clamp_rad",
            "integrator_clamp_rad",
            "duration_s",
            "error_noise",
            "drift",
            "drift_offset_rad",
            "drift_rate_rad_s",
            "drift_amplitude_rad",
            "drift_frequency_hz",
            "drift_sigma_rad_rts",
        ],
    ),
    (
        "noise",
        &[
            "seed",
            "kind",
            "coefficient",
            "h_white_pm",
            "h_flicker_pm",
            "h_white_fm",
            "h_flicker_fm",
            "h_rw_fm",
            "photocurrent_a",
            "n",
            "dt_s",
            "input",
            "estimator",
        ],
    ),
    (
        "scan",
        &[
            "quantity",
            "start_mhz",
            "stop_mhz",
            "step_mhz",
            "field_start_mv_cm",
            "field_stop_mv_cm",
            "field_step_mv_cm",
            "weak_field_uv_cm",
            "kernel_fwhm_mhz",
            "noise_snr",
            "input",
        ],
    ),
    ("sensitivity", &["e_op_uv_cm", "detected_power_uw", "signal_fraction", "eta", "probe_atoms", "noise_samples"]),
    ("output", &["dir", "prefix"]),
];

/// Detuning axis swept by a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanQuantity {
    Probe,
    Coupling,
    Rf,
}

impl ScanQuantity {
    pub fn label(self) -> &'static str {
        match self {
            Self::Probe => "probe",
            Self::Coupling => "coupling",
            Self::Rf => "rf",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    pub quantity: ScanQuantity,
    /// Grid in rad/s.
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Field grid for `atcal` (V/m).
    pub fields: Vec<f64>,
    /// RF field of the simulated weak-field scan for `matched` (V/m).
    pub weak_field: f64,
    /// Matched-filter kernel FWHM (rad/s); fitted to the clean line when absent.
    pub kernel_fwhm: Option<f64>,
    /// Peak signal over noise standard deviation of the simulated scan.
    pub noise_snr: f64,
    pub input: Option<PathBuf>,
}

impl ScanSettings {
    /// Grid points `start + k step` up to `stop`. When `start` is a whole
    /// number of steps the points are exact multiples of `step`, so a grid
    /// symmetric about zero is exactly symmetric.
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        let k0 = (self.start / self.step).round();
        if (self.start / self.step - k0).abs() < 1e-9 {
            (0..=n).map(|k| (k0 + k as f64) * self.step).collect()
        } else {
            (0..=n).map(|k| self.start + k as f64 * self.step).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSettings {
    pub kind: NoiseKind,
    pub coefficient: f64,
    pub budget: NoiseBudget,
    pub photocurrent: f64,
    pub n: usize,
    pub dt: f64,
    pub input: Option<PathBuf>,
    pub estimator: AllanEstimator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServoSettings {
    pub ram: RamParams,
    pub gains: PidGains,
    pub drift: DriftModel,
    pub duration: f64,
    pub error_noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub system: LadderSystem,
    /// Drive with `omega_rf` set from `e_rf`.
    pub drive: FieldDrive,
    /// RF field amplitude (V/m).
    pub e_rf: f64,
    pub fm: FmConfig,
    pub lo_phases: Vec<f64>,
    pub apply_ram: bool,
    pub servo: ServoSettings,
    pub noise: NoiseSettings,
    pub scan: ScanSettings,
    pub sensitivity: OperatingPoint,
    pub noise_samples: usize,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub prefix: Option<String>,
}

impl Default for Scenario {
    fn default() -> Self {
        parse_scenario("").expect("defaults are valid")
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Table {
    entries: BTreeMap<(String, String), Entry>,
}

fn invariant(line: Option<usize>, key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvariantViolation { line, key: key.to_string(), reason: reason.into() }
}

impl Table {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<(String, String), Entry> = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Parse { line, message: "unterminated section header".into() })?
                    .trim();
                if !KEYS.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::Parse { line, message: format!("unknown section [{name}]") });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Parse { line, message: "expected 'key = value'".into() })?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .clone()
                .ok_or_else(|| ConfigError::Parse { line, message: "key outside of any [section]".into() })?;
            if key.is_empty() {
                return Err(ConfigError::Parse { line, message: "empty key".into() });
            }
            let known = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !known.contains(&key) {
                return Err(ConfigError::UnknownKey { line, section: sec, key: key.to_string() });
            }
            let id = (sec.clone(), key.to_string());
            if let Some(prev) = entries.get(&id) {
                return Err(ConfigError::DuplicateKey { key: format!("{sec}.{key}"), first: prev.line, second: line });
            }
            let value = value.trim_matches('"').to_string();
            entries.insert(id, Entry { value, line });
        }
        Ok(Self { entries })
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn line(&self, section: &str, key: &str) -> Option<usize> {
        self.entry(section, key).map(|e| e.line)
    }

    fn opt_f64(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => match e.value.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                _ => Err(ConfigError::Parse { line: e.line, message: format!("'{key}' expects a finite number") }),
            },
        }
    }

    fn f64(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.opt_f64(section, key)?.unwrap_or(default))
    }

    /// Number that must satisfy `ok`, else an invariant violation naming the key.
    fn checked(
        &self,
        section: &str,
        key: &str,
        default: f64,
        ok: fn(f64) -> bool,
        reason: &str,
    ) -> Result<f64, ConfigError> {
        let v = self.f64(section, key, default)?;
        if ok(v) {
            Ok(v)
        } else {
            Err(invariant(self.line(section, key), key, reason))
        }
    }

    fn positive(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.checked(section, key, default, |v| v > 0.0, "must be positive")
    }

    fn non_negative(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.checked(section, key, default, |v| v >= 0.0, "must be non-negative")
    }

    /// Value in file units times `unit`; an absent key yields `default_si` untouched.
    fn si(
        &self,
        section: &str,
        key: &str,
        default_si: f64,
        unit: f64,
        ok: fn(f64) -> bool,
        reason: &str,
    ) -> Result<f64, ConfigError> {
        match self.opt_f64(section, key)? {
            None => Ok(default_si),
            Some(v) if ok(v) => Ok(v * unit),
            Some(_) => Err(invariant(self.line(section, key), key, reason)),
        }
    }

    fn positive_si(&self, section: &str, key: &str, default_si: f64, unit: f64) -> Result<f64, ConfigError> {
        self.si(section, key, default_si, unit, |v| v > 0.0, "must be positive")
    }

    fn non_negative_si(&self, section: &str, key: &str, default_si: f64, unit: f64) -> Result<f64, ConfigError> {
        self.si(section, key, default_si, unit, |v| v >= 0.0, "must be non-negative")
    }

    fn usize(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.entry(section, key) {
            None => Ok(default),
            Some(e) => e.value.parse::<usize>().map_err(|_| ConfigError::Parse {
                line: e.line,
                message: format!("'{key}' expects a non-negative integer"),
            }),
        }
    }

    fn bool(&self, section: &str, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.entry(section, key) {
            None => Ok(default),
            Some(e) => match e.value.as_str() {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(ConfigError::Parse { line: e.line, message: format!("'{key}' expects true or false") }),
            },
        }
    }

    fn str(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.entry(section, key).map(|e| (e.value.as_str(), e.line))
    }

    fn list(&self, section: &str, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.entry(section, key) {
            None => Ok(default.to_vec()),
            Some(e) => e
                .value
                .split(',')
                .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<Vec<_>>>()
                .filter(|v| !v.is_empty())
                .ok_or_else(|| ConfigError::Parse {
                    line: e.line,
                    message: format!("'{key}' expects a comma-separated list of numbers"),
                }),
        }
    }
}

/// Map a core parameter error onto the scenario key that sets it.
fn core_invariant(table: &Table, section: &str, err: rydfm::Error, keys: &[(&str, &str)]) -> ConfigError {
    if let rydfm::Error::InvalidParameter { name, reason } = &err {
        if let Some((_, key)) = keys.iter().find(|(n, _)| n == name) {
            return invariant(table.line(section, key), key, *reason);
        }
    }
    invariant(None, section, err.to_string())
}

/// Parse and validate a scenario. The first problem found is reported.
pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let t = Table::parse(text)?;
    let d = LadderSystem::default();

    let temperature = t.non_negative("system", "temperature_k", d.temperature)?;
    let default_density = if t.entry("system", "temperature_k").is_some() && temperature > 0.0 {
        cesium_number_density(temperature)
    } else {
        d.n_atoms
    };
    let system = LadderSystem {
        lambda_probe: t.positive_si("system", "lambda_probe_nm", d.lambda_probe, 1e-9)?,
        lambda_coupling: t.positive_si("system", "lambda_coupling_nm", d.lambda_coupling, 1e-9)?,
        gamma2: t.non_negative_si("system", "gamma2_mhz", d.gamma2, MHZ)?,
        gamma3: t.non_negative_si("system", "gamma3_khz", d.gamma3, MHZ * 1e-3)?,
        gamma4: t.non_negative_si("system", "gamma4_khz", d.gamma4, MHZ * 1e-3)?,
        gamma_deph: 1.0 / t.positive_si("system", "t2_us", 1.0 / d.gamma_deph, 1e-6)?,
        mu12: t.positive("system", "mu12_cm", d.mu12)?,
        mu_rf: t.positive_si("system", "mu_rf_ea0", d.mu_rf, E_CHARGE * A0)?,
        n_atoms: t.non_negative("system", "density_m3", default_density)?,
        temperature,
        atom_mass: t.positive_si("system", "mass_amu", d.atom_mass, AMU)?,
        cell_length: t.positive("system", "cell_length_m", d.cell_length)?,
    };

    let e_rf = t.non_negative("drive", "e_rf_uv_cm", 0.0)? * 1e-4;
    let drive = FieldDrive {
        omega_p: t.positive("drive", "omega_p_mhz", 6.7)? * MHZ,
        omega_c: t.non_negative("drive", "omega_c_mhz", 7.0)? * MHZ,
        omega_rf: system.rf_rabi(e_rf),
        delta_p: t.f64("drive", "delta_p_mhz", 0.0)? * MHZ,
        delta_c: t.f64("drive", "delta_c_mhz", 1.0)? * MHZ,
        delta_rf: t.f64("drive", "delta_rf_mhz", 0.0)? * MHZ,
    };

    let v_pi = t.positive("fm", "v_pi", DEFAULT_V_PI)?;
    let dbm = t.f64("fm", "drive_dbm", 8.0)?;
    let beta = match t.opt_f64("fm", "beta")? {
        Some(b) => b,
        None => beta_from_dbm(dbm, v_pi),
    };
    let fm = FmConfig {
        omega_m: t.positive("fm", "f_m_mhz", 10.0)? * MHZ,
        beta,
        n_max: t.usize("fm", "n_max", rydfm::fm::MAX_ORDER)?,
        lo_phase: 0.5 * PI,
    };
    fm.validate().map_err(|e| {
        let key = if t.entry("fm", "beta").is_some() { "beta" } else { "drive_dbm" };
        match e {
            rydfm::Error::Truncation { .. } => {
                invariant(t.line("fm", key).or(t.line("fm", "n_max")), key, e.to_string())
            }
            e => core_invariant(&t, "fm", e, &[("n_max", "n_max"), ("omega_m", "f_m_mhz")]),
        }
    })?;
    let lo_phases: Vec<f64> = t.list("fm", "lo_phases_deg", &[0.0, 90.0])?.iter().map(|d| d.to_radians()).collect();
    let apply_ram = t.bool("fm", "apply_ram", false)?;

    let rd = RamParams::default();
    let ram = RamParams {
        alpha: t.f64("ram", "alpha_rad", rd.alpha)?,
        beta_angle: t.f64("ram", "beta_angle_rad", rd.beta_angle)?,
        m_index: t.f64("ram", "m_index", rd.m_index)?,
        dphi_n: t.f64("ram", "dphi_n_rad", rd.dphi_n)?,
        dphi_dc: t.f64("ram", "dphi_dc_rad", rd.dphi_dc)?,
        e0_sq: t.positive("ram", "e0_sq", rd.e0_sq)?,
    };
    ram.validate()
        .map_err(|e| core_invariant(&t, "ram", e, &[("alpha", "alpha_rad"), ("beta_angle", "beta_angle_rad")]))?;
    let g = ram.harmonic_gain(1).abs();
    if g == 0.0 && t.entry("ram", "kp").is_none() {
        return Err(invariant(
            t.line("ram", "alpha_rad").or(t.line("ram", "beta_angle_rad")).or(t.line("ram", "m_index")),
            "alpha_rad",
            "RAM geometry gives no error signal; set kp and ki explicitly",
        ));
    }
    let dt = t.positive("ram", "dt_s", 0.01)?;
    let zn =
        if g > 0.0 { PidGains::ziegler_nichols(g, dt) } else { PidGains { kp: 0.0, ki: 0.0, ..PidGains::default() } };
    let gains = PidGains {
        kp: t.f64("ram", "kp", zn.kp)?,
        ki: t.f64("ram", "ki", zn.ki)?,
        kd: t.f64("ram", "kd", zn.kd)?,
        dt,
        output_clamp: t.positive("ram", "output_clamp_rad", zn.output_clamp)?,
        integrator_clamp: t.positive("ram", "integrator_clamp_rad", zn.integrator_clamp)?,
    };
    let duration = t.positive("ram", "duration_s", 327.68)?;
    if duration <= 10.0 * dt {
        return Err(invariant(t.line("ram", "duration_s"), "duration_s", "must exceed ten control periods"));
    }
    let error_noise = t.non_negative("ram", "error_noise", 1e-3 * g)?;
    let seed = t.usize("noise", "seed", 1)? as u64;
    let offset = t.f64("ram", "drift_offset_rad", 0.0)?;
    let drift = match t.str("ram", "drift").unwrap_or(("sinusoid", 0)) {
        ("constant", _) => DriftModel::Constant(offset),
        ("ramp", _) => DriftModel::Ramp { offset, rate: t.f64("ram", "drift_rate_rad_s", 0.01)? },
        ("sinusoid", _) => DriftModel::Sinusoid {
            offset,
            amplitude: t.f64("ram", "drift_amplitude_rad", 0.5)?,
            frequency: t.non_negative("ram", "drift_frequency_hz", 5e-4)?,
        },
        ("random_walk", _) => {
            DriftModel::RandomWalk { offset, sigma: t.non_negative("ram", "drift_sigma_rad_rts", 0.05)?, seed: 0 }
        }
        (other, line) => {
            return Err(ConfigError::Parse {
                line,
                message: format!("unknown drift model '{other}' (constant, ramp, sinusoid, random_walk)"),
            })
        }
    };
    let servo = ServoSettings { ram, gains, drift, duration, error_noise };

    let kind = match t.str("noise", "kind") {
        None => NoiseKind::WhiteFm,
        Some((s, line)) => {
            s.parse().map_err(|_| ConfigError::Parse { line, message: format!("unknown noise kind '{s}'") })?
        }
    };
    let budget = NoiseBudget {
        white_pm: t.non_negative("noise", "h_white_pm", 0.0)?,
        flicker_pm: t.non_negative("noise", "h_flicker_pm", 0.0)?,
        white_fm: t.non_negative("noise", "h_white_fm", 1e-20)?,
        flicker_fm: t.non_negative("noise", "h_flicker_fm", 0.0)?,
        rw_fm: t.non_negative("noise", "h_rw_fm", 0.0)?,
    };
    let n = t.usize("noise", "n", 1 << 16)?;
    if n < 2 || !n.is_power_of_two() {
        return Err(invariant(t.line("noise", "n"), "n", "must be a power of two, at least 2"));
    }
    let estimator = match t.str("noise", "estimator").unwrap_or(("overlapping", 0)) {
        ("overlapping", _) => AllanEstimator::Overlapping,
        ("nonoverlapping", _) => AllanEstimator::NonOverlapping,
        (other, line) => {
            return Err(ConfigError::Parse { line, message: format!("unknown estimator '{other}'") });
        }
    };
    let noise = NoiseSettings {
        kind,
        coefficient: t.non_negative("noise", "coefficient", 1e-20)?,
        budget,
        photocurrent: t.non_negative("noise", "photocurrent_a", 1e-6)?,
        n,
        dt: t.positive("noise", "dt_s", 1e-3)?,
        input: t.str("noise", "input").map(|(s, _)| PathBuf::from(s)),
        estimator,
    };

    let quantity = match t.str("scan", "quantity").unwrap_or(("probe", 0)) {
        ("probe", _) => ScanQuantity::Probe,
        ("coupling", _) => ScanQuantity::Coupling,
        ("rf", _) => ScanQuantity::Rf,
        (other, line) => {
            return Err(ConfigError::Parse { line, message: format!("unknown scan quantity '{other}'") });
        }
    };
    let start = t.f64("scan", "start_mhz", -40.0)? * MHZ;
    let stop = t.f64("scan", "stop_mhz", 40.0)? * MHZ;
    let step = t.positive("scan", "step_mhz", 0.5)? * MHZ;
    if stop <= start {
        return Err(invariant(t.line("scan", "stop_mhz"), "stop_mhz", "must exceed start_mhz"));
    }
    if (stop - start) / step > 1e6 {
        return Err(invariant(t.line("scan", "step_mhz"), "step_mhz", "grid would exceed 1e6 points"));
    }
    let f_start = t.positive("scan", "field_start_mv_cm", 2.0)?;
    let f_stop = t.positive("scan", "field_stop_mv_cm", 10.0)?;
    let f_step = t.positive("scan", "field_step_mv_cm", 1.0)?;
    if f_stop < f_start {
        return Err(invariant(
            t.line("scan", "field_stop_mv_cm"),
            "field_stop_mv_cm",
            "must not be below field_start_mv_cm",
        ));
    }
    let nf = ((f_stop - f_start) / f_step + 1e-9).floor() as usize;
    let fields = (0..=nf).map(|k| (f_start + k as f64 * f_step) * 0.1).collect();
    let scan = ScanSettings {
        quantity,
        start,
        stop,
        step,
        fields,
        weak_field: t.positive("scan", "weak_field_uv_cm", 5.0)? * 1e-4,
        kernel_fwhm: t.opt_f64("scan", "kernel_fwhm_mhz")?.map(|v| v * MHZ),
        noise_snr: t.positive("scan", "noise_snr", 1.0)?,
        input: t.str("scan", "input").map(|(s, _)| PathBuf::from(s)),
    };
    if let Some(w) = scan.kernel_fwhm {
        if w <= 0.0 {
            return Err(invariant(t.line("scan", "kernel_fwhm_mhz"), "kernel_fwhm_mhz", "must be positive"));
        }
    }

    let od = OperatingPoint::default();
    let sensitivity = OperatingPoint {
        system,
        drive: FieldDrive { omega_rf: 0.0, ..drive },
        fm,
        e_field: t.non_negative("sensitivity", "e_op_uv_cm", od.e_field * 1e4)? * 1e-4,
        detected_power: t.positive("sensitivity", "detected_power_uw", od.detected_power * 1e6)? * 1e-6,
        signal_fraction: t.checked(
            "sensitivity",
            "signal_fraction",
            od.signal_fraction,
            |v| v > 0.0 && v <= 1.0,
            "must lie in (0, 1]",
        )?,
        eta: t.checked("sensitivity", "eta", od.eta, |v| v > 0.0 && v <= 1.0, "must lie in (0, 1]")?,
        probe_atoms: t.positive("sensitivity", "probe_atoms", od.probe_atoms)?,
        doppler: DopplerOptions::default(),
    };
    let noise_samples = t.usize("sensitivity", "noise_samples", 1 << 16)?;
    if noise_samples < 2 {
        return Err(invariant(t.line("sensitivity", "noise_samples"), "noise_samples", "must be at least 2"));
    }

    system.validate().map_err(|e| core_invariant(&t, "system", e, &[]))?;
    drive.validate().map_err(|e| core_invariant(&t, "drive", e, &[]))?;

    Ok(Scenario {
        system,
        drive,
        e_rf,
        fm,
        lo_phases,
        apply_ram,
        servo,
        noise,
        scan,
        sensitivity,
        noise_samples,
        seed,
        out_dir: t.str("output", "dir").map(|(s, _)| PathBuf::from(s)),
        prefix: t.str("output", "prefix").map(|(s, _)| s.to_string()),
    })
}

/// Every `section.key` accepted by [`parse_scenario`].
pub fn known_keys() -> BTreeSet<String> {
    KEYS.iter().flat_map(|(s, ks)| ks.iter().map(move |k| format!("{s}.{k}"))).collect()
}
