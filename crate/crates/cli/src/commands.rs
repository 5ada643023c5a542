//! The subcommands. Each renders its outputs in memory; [`run`] resolves the
//! output directory and writes them atomically alongside a manifest.

use crate::output::{self, num, read_numeric_csv, Artifact, RunInfo, RunManifest, Table};
use crate::scenario::{parse_scenario, ConfigError, ScanQuantity, Scenario};
use rydfm::analysis::{
    allan_deviation, classify_noise, lorentzian_fit, matched_filter, sensitivity_estimate, shot_noise_floor,
    AllanEstimator, AllanResult, LorentzParams,
};
use rydfm::fm::{apply_ram, dc_power, demodulate, propagate, sidebands};
use rydfm::noise::{gen_powerlaw, shot_noise_series, shot_noise_snr, sub_seed, white_gaussian, NoiseKind, TimeSeries};
use rydfm::quantum::{susceptibility, FieldDrive};
use rydfm::servo::{run_servo, DriftModel, ServoConfig};
use rydfm::spectroscopy::{
    at_splitting, axis_scale, field_from_splitting, scan_probe, splitting_from_field, MediumSpectrum,
};
use rydfm::C64;
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};
use thiserror::Error;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "RYDFM_OUT_DIR";

const MHZ: f64 = 2.0 * PI * 1e6;
/// Independent random streams derived from the run seed.
const STREAM_SERVO_NOISE: u64 = 1;
const STREAM_DRIFT: u64 = 2;
const STREAM_MATCHED: u64 = 3;
const STREAM_SHOT: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Scan,
    Fmscan,
    Atcal,
    Servo,
    Noise,
    Allan,
    Matched,
    Sensitivity,
}

impl Subcommand {
    pub const ALL: [Subcommand; 8] = [
        Self::Scan,
        Self::Fmscan,
        Self::Atcal,
        Self::Servo,
        Self::Noise,
        Self::Allan,
        Self::Matched,
        Self::Sensitivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Scan => "scan",
            Self::Fmscan => "fmscan",
            Self::Atcal => "atcal",
            Self::Servo => "servo",
            Self::Noise => "noise",
            Self::Allan => "allan",
            Self::Matched => "matched",
            Self::Sensitivity => "sensitivity",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("numerical failure: {0}")]
    Numeric(#[from] rydfm::Error),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl CliError {
    /// 2 configuration, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 2,
            Self::Numeric(_) => 3,
            Self::Io { .. } => 4,
        }
    }

    fn io(path: &Path, message: impl ToString) -> Self {
        Self::Io { path: path.to_path_buf(), message: message.to_string() }
    }
}

/// Everything taken from the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub command: Subcommand,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Parse the config, run the subcommand and write its files plus a manifest.
/// The output directory is `--out`, else `$RYDFM_OUT_DIR`, else `[output] dir`,
/// else `out`.
pub fn run(inv: &Invocation) -> Result<RunManifest, CliError> {
    run_with_env(inv, std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
}

pub fn run_with_env(inv: &Invocation, env_out: Option<PathBuf>) -> Result<RunManifest, CliError> {
    let started = unix_now();
    let text = match &inv.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
        None => String::new(),
    };
    let label = inv.config.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "(defaults)".into());
    let mut scenario = parse_scenario(&text).map_err(|source| CliError::Config { path: label, source })?;
    if let Some(seed) = inv.seed {
        scenario.seed = seed;
    }
    let info =
        RunInfo { subcommand: inv.command.name().to_string(), config_sha256: config_hash(&text), seed: scenario.seed };
    let artifacts = execute(inv.command, &scenario, &info)?;

    let out_dir =
        inv.out.clone().or(env_out).or_else(|| scenario.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let prefix = scenario.prefix.clone().unwrap_or_default();
    let mut files = Vec::new();
    for a in &artifacts {
        let path = out_dir.join(format!("{prefix}{}", a.name));
        output::write_atomic(&path, &a.contents).map_err(|e| CliError::io(&path, e))?;
        files.push(path);
    }
    let mut manifest = RunManifest {
        info,
        config_path: inv.config.clone(),
        out_dir: out_dir.clone(),
        started_unix: started,
        finished_unix: 0.0,
        files,
    };
    manifest.finished_unix = unix_now();
    let path = out_dir.join(format!("{prefix}{}.manifest", inv.command.name()));
    output::write_atomic(&path, manifest.render().as_bytes()).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

pub fn config_hash(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Run one subcommand and render its outputs.
pub fn execute(cmd: Subcommand, sc: &Scenario, info: &RunInfo) -> Result<Vec<Artifact>, CliError> {
    match cmd {
        Subcommand::Scan => scan(sc, info),
        Subcommand::Fmscan => fmscan(sc, info),
        Subcommand::Atcal => atcal(sc, info),
        Subcommand::Servo => servo(sc, info),
        Subcommand::Noise => noise(sc, info),
        Subcommand::Allan => allan(sc, info),
        Subcommand::Matched => matched(sc, info),
        Subcommand::Sensitivity => sensitivity(sc, info),
    }
}

fn artifact(name: &str, contents: Vec<u8>) -> Artifact {
    Artifact { name: name.to_string(), contents }
}

/// Susceptibility along the configured scan axis.
pub fn medium_scan(sc: &Scenario, quantity: ScanQuantity, grid: &[f64]) -> rydfm::Result<MediumSpectrum> {
    let (sys, drive) = (&sc.system, &sc.drive);
    if quantity == ScanQuantity::Probe {
        return scan_probe(sys, drive, grid);
    }
    let chi = grid
        .iter()
        .map(|&x| {
            let d = match quantity {
                ScanQuantity::Coupling => FieldDrive { delta_c: x, ..*drive },
                _ => FieldDrive { delta_rf: x, ..*drive },
            };
            susceptibility(sys, &d)
        })
        .collect::<rydfm::Result<Vec<C64>>>()?;
    MediumSpectrum::from_chi(grid.to_vec(), chi, sys.k_probe(), sys.cell_length, 1.0)
}

fn scan(sc: &Scenario, info: &RunInfo) -> Result<Vec<Artifact>, CliError> {
    let q = sc.scan.quantity;
    let spec = medium_scan(sc, q, &sc.scan.grid())?;
    let mut t = Table::new(&["detuning_mhz", "transmission", "phase_rad", "chi_re", "chi_im"]);
    t.note("quantity", q.label())
        .note("detuning", "ordinary frequency in MHz; transmission is the power transmission")
        .note("e_rf_uv_cm", num(sc.e_rf * 1e4));
    if q == ScanQuantity::Probe {
        let at = at_splitting(&spec);
        t.note("at_splitting_mhz", at.split_hz.map(|s| num(s / 1e6)).unwrap_or_else(|| "unresolved".into()));
    }
    let tr = spec.power_transmission();
    for (((g, tr), ph), chi) in spec.grid.iter().zip(&tr).zip(&spec.phase).zip(&spec.chi) {
        t.push(vec![num(g / MHZ), num(*tr), num(*ph), num(chi.re), num(chi.im)]);
    }
    Ok(vec![artifact("scan.csv", t.render(info))])
}

/// FM signal at each carrier detuning for each LO phase, plus the DC power.
pub fn fm_trace(sc: &Scenario, carriers: &[f64]) -> rydfm::Result<Vec<(f64, Vec<f64>)>> {
    let fm = &sc.fm;
    let mut sb = sidebands(fm.beta, fm.n_max)?;
    if sc.apply_ram {
        sb = apply_ram(&sb, &sc.servo.ram);
    }
    let step = sc.scan.step;
    let reach = sb.n_max as f64 * fm.omega_m + step;
    let lo = carriers.first().copied().unwrap_or(0.0) - reach;
    let hi = carriers.last().copied().unwrap_or(0.0) + reach;
    let n = ((hi - lo) / step).ceil() as usize;
    let medium_grid: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
    let spec = scan_probe(&sc.system, &sc.drive, &medium_grid)?;
    carriers
        .iter()
        .map(|&d| {
            let out = propagate(&sb, &spec, d, fm.omega_m)?;
            Ok((dc_power(&out), sc.lo_phases.iter().map(|&th| demodulate(&out, th)).collect()))
        })
        .collect()
}

fn fmscan(sc: &Scenario, info: &RunInfo) -> Result<Vec<Artifact>, CliError> {
    let carriers = sc.scan.grid();
    let rows = fm_trace(sc, &carriers)?;
    let mut cols = vec!["detuning_mhz".to_string(), "dc_power".to_string()];
    cols.extend(sc.lo_phases.iter().map(|p| format!("signal_lo_{}deg", p.to_degrees().round() as i64)));
    let mut t = Table { columns: cols, ..Default::default() };
    t.note("axis", "probe carrier detuning, ordinary frequency in MHz")
        .note("signal", "lock-in output 2<I(t) cos(w_m t + theta)> per unit input power")
        .note("beta", num(sc.fm.beta))
        .note("f_m_mhz", num(sc.fm.omega_m / MHZ))
        .note("n_max", sc.fm.n_max)
        .note("lo_phases_deg", sc.lo_phases.iter().map(|p| num(p.to_degrees())).collect::<Vec<_>>().join(" "))
        .note("ram_applied", sc.apply_ram);
    for (d, (dc, s)) in carriers.iter().zip(rows) {
        let mut r = vec![num(d / MHZ), num(dc)];
        r.extend(s.into_iter().map(num));
        t.push(r);
    }
    Ok(vec![artifact("fmscan.csv", t.render(info))])
}

/// One row of the splitting/field table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtRow {
    pub e_field: f64,
    pub split_theory_hz: f64,
    pub split_measured_hz: Option<f64>,
}

pub fn at_table(sc: &Scenario) -> rydfm::Result<Vec<AtRow>> {
    let grid = sc.scan.grid();
    sc.scan
        .fields
        .iter()
        .map(|&e| {
            let drive = FieldDrive { omega_rf: sc.system.rf_rabi(e), ..sc.drive };
            let at = at_splitting(&scan_probe(&sc.system, &drive, &grid)?);
            Ok(AtRow {
                e_field: e,
                split_theory_hz: splitting_from_field(e, sc.system.mu_rf)?,
                split_measured_hz: at.split_hz,
            })
        })
        .collect()
}

/// Least-squares slope and intercept.
pub fn line_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| (sxy / sxx, my - sxy / sxx * mx))
}

fn atcal(sc: &Scenario, info: &RunInfo) -> Result<Vec<Artifact>, CliError> {
    let rows = at_table(sc)?;
    let resolved: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.split_measured_hz.map(|s| (r.e_field, s))).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = resolved.into_iter().unzip();
    let theory = sc.system.mu_rf / rydfm::constants::H;
    let mut t = Table::new(&["e_rf_mv_cm", "split_theory_mhz", "split_measured_mhz", "e_recovered_mv_cm", "resolved"]);
    t.note("splitting", "dressed-state splitting in MHz after probe-axis rescaling")
        .note("axis_scale", num(axis_scale(&sc.system)))
        .note("slope_theory_hz_per_v_m", num(theory));
    match line_fit(&xs, &ys) {
        Some((slope, icpt)) => {
            t.note("slope_fit_hz_per_v_m", num(slope))
                .note("intercept_fit_hz", num(icpt))
                .note("slope_rel_error", num(slope / theory - 1.0));
        }
        None => {
            t.note("slope_fit_hz_per_v_m", "fewer than two resolved rows");
        }
    }
    for r in &rows {
        let (m, e) = match r.split_measured_hz {
            Some(s) => (num(s / 1e6), num(field_from_splitting(s, sc.system.mu_rf)? * 10.0)),
            None => (num(f64::NAN), num(f64::NAN)),
        };
        t.push(vec![
            num(r.e_field * 10.0),
            num(r.split_theory_hz / 1e6),
            m,
            e,
            u8::from(r.split_measured_hz.is_some()).to_string(),
        ]);
    }
    Ok(vec![artifact("atcal.csv", t.render(info))])
}

/// Octave taus `dt 2^k` leaving at least three averaging bins.
pub fn octave_taus(dt: f64, n: usize) -> Vec<f64> {
    (0..63).map(|k| 1usize << k).take_while(|&m| 3 * m <= n).map(|m| m as f64 * dt).collect()
}

fn servo(sc: &Scenario, info: &RunInfo) -> Result<Vec<Artifact>, CliError> {
    let s = &sc.servo;
    let drift = match s.drift {
        DriftModel::RandomWalk { offset, sigma, .. } => {
            DriftModel::RandomWalk { offset, sigma, seed: sub_seed(sc.seed, STREAM_DRIFT) }
        }
        d => d,
    };
    let cfg = ServoConfig {
        ram: s.ram,
        gains: s.gains,
        duration: s.duration,
        locked: true,
        error_noise: s.error_noise,
        noise_seed: sub_seed(sc.seed, STREAM_SERVO_NOISE),
    };
    let locked = run_servo(&drift, &cfg)?;
    let unlocked = run_servo(&drift, &ServoConfig { locked: false, ..cfg })?;
    let dt = s.gains.dt;
    let mut out = Vec::new();
    for (name, tr) in [("servo_locked.csv", &locked), ("servo_unlocked.csv", &unlocked)] {
        let mut t = Table::new(&["time_s", "dphi_n_rad", "dphi_dc_rad", "error", "residual"]);
        t.note("gains", format!("kp={} ki={} kd={} dt={}", num(s.gains.kp), num(s.gains.ki), num(s.gains.kd), num(dt)))
            .note("drift", format!("{drift:?}"))
            .note("residual", "sin(dphi_n + dphi_dc)");
        let res = tr.residual();
        for (k, r) in res.iter().enumerate() {
            t.push(vec![num(tr.time[k]), num(tr.dphi_n[k]), num(tr.dphi_dc[k]), num(tr.error[k]), num(*r)]);
        }
        out.push(artifact(name, t.render(info)));
    }
    let taus = octave_taus(dt, locked.len());
    let adev = |err: &[f64]| -> Result<AllanResult, CliError> {
        let ts = TimeSeries::new(dt, err.to_vec(), sc.seed, NoiseKind::Composite)?;
        Ok(allan_deviation(&ts, &taus, AllanEstimator::Overlapping)?)
    };
    let (on, off) = (adev(&locked.error)?, adev(&unlocked.error)?);
    let mut t = Table::new(&["tau_s", "sigma_locked", "sigma_unlocked", "n_bins"]);
    t.note("series", "demodulated error reading").note("estimator", AllanEstimator::Overlapping.label());
    for (i, tau) in taus.iter().enumerate() {
        t.push(vec![num(*tau), num(on.sigma[i]), num(off.sigma[i]), on.counts[i].to_string()]);
    }
    out.push(artifact("servo_allan.csv", t.render(info)));
    Ok(out)
}

/// The configured synthetic series.
pub fn synth_series(sc: &Scenario) -> rydfm::Result<TimeSeries> {
    let n = &sc.noise;
    match n.kind {
        NoiseKind::Shot => shot_noise_series(n.photocurrent, n.dt, n.n, sc.seed),
        NoiseKind::Composite => n.budget.generate(n.n, n.dt, sc.seed),
        k => gen_powerlaw(k, n.coefficient, n.n, n.dt, sc.seed),
    }
}

fn noise(sc: &Scenario, info: &RunInfo) -> Result<Vec<Artifact>, CliError> {
    let ts = synth_series(sc)?;
    let mut t = Table::new(&["time_s", "value"]);
    t.note("kind", ts.kind.label()).note("convention", "one-sided S_y(f) = h f^alpha");
    match ts.kind {
        NoiseKind::Shot => t.note("photocurrent_a", num(sc.noise.photocurrent)),
        NoiseKind::Composite => t.note(
            "budget",
            sc.noise
                .budget
                .terms()
                .iter()
                .map(|(k, h)| format!("{}={}", k.label(), num(*h)))
                .collect::<Vec<_>>()
                .join(" "),
        ),
        _ => t.note("coefficient", num(sc.noise.coefficient)),
    };
    for (k, v) in ts.values.iter().enumerate() {
        t.push(vec![num(k as f64 * ts.dt), num(*v)]);
    }
    Ok(vec![artifact("noise.csv", t.render(info))])
}

/// Read a `time_s, value` series; the time axis must be uniform.
pub fn read_series(path: &Path) -> Result<TimeSeries, CliError> {
    let csv = read_numeric_csv(path).map_err(|e| CliError::io(path, e))?;
    let (time, values) = match (csv.column("time_s"), csv.column("value")) {
        (Some(t), Some(v)) => (t, v),
        _ => return Err(CliError::io(path, "expected columns time_s and value")),
    };
    if time.len() < 2 {
        return Err(CliError::io(path, "need at least two samples"));
    }
    let dt = time[1] - time[0];
    let uniform = time.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt.abs());
    if dt <= 0.0 || dt.is_nan() || !uniform {
        return Err(CliError::io(path, "time_s must be uniform and increasing"));
    }
    Ok(TimeSeries::new(dt, values, 0, NoiseKind::Composite)?)
}

fn allan(sc: &Scenario, info: &RunInfo) -> Result<Vec<Artifact>, CliError> {
    let ts = match &sc.noise.input {
        Some(p) => read_series(p)?,
        None => synth_series(sc)?,
    };
    let taus = octave_taus(ts.dt, ts.len());
    let res = allan_deviation(&ts, &taus, sc.noise.estimator)?;
    let classes = classify_noise(&res);
    let mut t = Table::new(&["tau_s", "sigma_y", "n_bins", "slope", "class"]);
    t.note("estimator", res.estimator.label())
        .note(
            "source",
            sc.noise.input.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| ts.kind.label().into()),
        )
        .note(
            "classes",
            "slope -1 white_or_flicker_pm, -0.5 white_fm, 0 flicker_fm, +0.5 rw_fm, +1 drift; tolerance 0.15",
        );
    for (i, c) in classes.iter().enumerate() {
        t.push(vec![
            num(res.taus[i]),
            num(res.sigma[i]),
            res.counts[i].to_string(),
            num(c.slope.unwrap_or(f64::NAN)),
            c.class.label().to_string(),
        ]);
    }
    Ok(vec![artifact("allan.csv", t.render(info))])
}

/// Weak-field line versus RF detuning: change of the probe power
/// transmission relative to the field-free medium.
pub fn weak_field_line(sc: &Scenario, e_field: f64, grid: &[f64]) -> rydfm::Result<Vec<f64>> {
    let base = FieldDrive { omega_rf: 0.0, ..sc.drive };
    let t0 = (-sc.system.k_probe() * sc.system.cell_length * susceptibility(&sc.system, &base)?.im).exp();
    let with_rf = Scenario { drive: FieldDrive { omega_rf: sc.system.rf_rabi(e_field), ..sc.drive }, ..sc.clone() };
    let spec = medium_scan(&with_rf, ScanQuantity::Rf, grid)?;
    Ok(spec.power_transmission().iter().map(|t| t - t0).collect())
}

/// Clean, noisy and filtered weak-field scan.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedRun {
    /// RF detuning (Hz).
    pub grid: Vec<f64>,
    pub clean: Option<Vec<f64>>,
    pub noisy: Vec<f64>,
    pub noise_sigma: Option<f64>,
    pub kernel: LorentzParams,
    pub filtered: rydfm::analysis::FilteredScan,
}

pub fn matched_run(sc: &Scenario) -> Result<MatchedRun, CliError> {
    let (grid, clean, noisy, sigma) = match &sc.scan.input {
        Some(p) => {
            let csv = read_numeric_csv(p).map_err(|e| CliError::io(p, e))?;
            match (csv.column("detuning_mhz"), csv.column("value")) {
                (Some(x), Some(v)) => (x.iter().map(|x| x * 1e6).collect::<Vec<_>>(), None, v, None),
                _ => return Err(CliError::io(p, "expected columns detuning_mhz and value")),
            }
        }
        None => {
            let grid = sc.scan.grid();
            let clean = weak_field_line(sc, sc.scan.weak_field, &grid)?;
            let peak = clean.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let sigma = peak / sc.scan.noise_snr;
            let noise = white_gaussian(grid.len(), sub_seed(sc.seed, STREAM_MATCHED));
            let noisy = clean.iter().zip(&noise).map(|(c, w)| c + sigma * w).collect();
            (grid.iter().map(|g| g / (2.0 * PI)).collect(), Some(clean), noisy, Some(sigma))
        }
    };
    let kernel = match sc.scan.kernel_fwhm {
        Some(w) => LorentzParams { amplitude: 1.0, sigma: 0.5 * w / (2.0 * PI), center: 0.0 },
        None => lorentzian_fit(&grid, clean.as_deref().unwrap_or(&noisy))?.params,
    };
    let filtered = matched_filter(&grid, &noisy, &kernel)?;
    Ok(MatchedRun { grid, clean, noisy, noise_sigma: sigma, kernel, filtered })
}

fn matched(sc: &Scenario, info: &RunInfo) -> Result<Vec<Artifact>, CliError> {
    let m = matched_run(sc)?;
    let mut t = Table::new(&["detuning_mhz", "clean", "noisy", "filtered", "valid"]);
    t.note("axis", "RF detuning, ordinary frequency in MHz")
        .note("kernel_convention", "Lorentzian A sigma / ((nu - nu_c)^2 + sigma^2); sigma is the HWHM, FWHM = 2 sigma")
        .note("kernel_hwhm_mhz", num(m.kernel.sigma / 1e6))
        .note("kernel_fwhm_mhz", num(m.kernel.fwhm() / 1e6))
        .note("kernel_norm", "unit energy, so filtered white noise keeps its standard deviation");
    if let Some(s) = m.noise_sigma {
        let v = &m.filtered.valid;
        let raw = m.noisy.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let filt = m.filtered.values[v.clone()].iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        t.note("e_rf_uv_cm", num(sc.scan.weak_field * 1e4))
            .note("noise_sigma", num(s))
            .note("raw_peak_over_sigma", num(raw / s))
            .note("filtered_peak_over_sigma", num(filt / s));
    }
    for i in 0..m.grid.len() {
        t.push(vec![
            num(m.grid[i] / 1e6),
            m.clean.as_ref().map(|c| num(c[i])).unwrap_or_else(|| num(f64::NAN)),
            num(m.noisy[i]),
            num(m.filtered.values[i]),
            u8::from(m.filtered.valid.contains(&i)).to_string(),
        ]);
    }
    Ok(vec![artifact("matched.csv", t.render(info))])
}

fn sensitivity(sc: &Scenario, info: &RunInfo) -> Result<Vec<Artifact>, CliError> {
    let op = &sc.sensitivity;
    let floor = shot_noise_floor(op, sc.noise_samples, sub_seed(sc.seed, STREAM_SHOT))?;
    let r = sensitivity_estimate(op, floor)?;
    let snr = shot_noise_snr(op.eta, op.detected_power, op.system.lambda_probe, 1.0);
    let kv = |k: &str, v: String| (k.to_string(), v);
    let pairs = vec![
        kv("e_op_v_m", num(op.e_field)),
        kv("detected_power_w", num(op.detected_power)),
        kv("responsivity_a_per_v_m", num(r.responsivity)),
        kv("noise_floor_a_rthz", num(r.noise_floor)),
        kv("e_min_v_m_rthz", num(r.e_min)),
        kv("e_min_uv_cm_rthz", num(r.e_min * 1e4)),
        kv("projection_limit_v_m_rthz", num(r.projection_limit)),
        kv("projection_limit_nv_cm_rthz", num(r.projection_limit * 1e7)),
        kv("shot_snr_1hz", num(snr)),
    ];
    let notes = vec![
        kv("noise_floor", "shot noise of the total photocurrent through the lock-in".into()),
        kv("units", "all sensitivities per sqrt(Hz)".into()),
    ];
    Ok(vec![artifact("sensitivity.txt", output::render_kv(info, &notes, &pairs))])
}
