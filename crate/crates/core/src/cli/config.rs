use std::f64::consts::PI;
use std::path::PathBuf;

use crate::dephasing::{AmplitudeForm, BathKind, PrefactorMode};

use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gamma_p_tilde: f64,
    pub s: f64,
    pub bath: BathKind,
    pub tau_s_tilde: Option<f64>,
    pub pulse_times: Option<Vec<f64>>,
    pub t_max_tilde: f64,
    pub n_samples: usize,
    pub n_modes: usize,
    pub cutoff_widths: f64,
    pub form: AmplitudeForm,
    pub prefactor: PrefactorMode,
    pub output_path: Option<PathBuf>,
    pub omega_0: f64,
    /// Interval list for `sweep`.
    pub tau_list: Vec<f64>,
    /// Total coupling weight given to the oracle's few modes.
    pub oracle_s: f64,
    pub oracle_modes: usize,
    pub oracle_n_max: usize,
    pub oracle_t_max: f64,
    pub oracle_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gamma_p_tilde: 0.1,
            s: 5.0,
            bath: BathKind::Common,
            tau_s_tilde: None,
            pulse_times: None,
            t_max_tilde: 40.0,
            n_samples: 2001,
            n_modes: 2001,
            cutoff_widths: 6.0,
            form: AmplitudeForm::Derived,
            prefactor: PrefactorMode::Paper,
            output_path: None,
            omega_0: 1.0,
            tau_list: Vec::new(),
            oracle_s: 0.5,
            oracle_modes: 2,
            oracle_n_max: 12,
            oracle_t_max: 4.0 * PI,
            oracle_samples: 201,
        }
    }
}

/// A real number, or `[k]pi[/d]` such as `pi/5`, `pi`, `2pi`, `0.5pi`.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let t = text.trim();
    if let Some(idx) = t.find("pi") {
        let coef = match &t[..idx] {
            "" => 1.0,
            "-" => -1.0,
            c => c
                .trim_end_matches('*')
                .parse::<f64>()
                .map_err(|_| format!("bad multiple of pi: {t:?}"))?,
        };
        let rest = &t[idx + 2..];
        let den = if rest.is_empty() {
            1.0
        } else {
            rest.strip_prefix('/')
                .and_then(|d| d.parse::<f64>().ok())
                .filter(|d| *d != 0.0)
                .ok_or_else(|| format!("bad pi fraction: {t:?}"))?
        };
        return Ok(coef * PI / den);
    }
    let v: f64 = t.parse().map_err(|_| format!("not a number: {t:?}"))?;
    if !v.is_finite() {
        return Err(format!("not a finite number: {t:?}"));
    }
    Ok(v)
}

pub fn parse_real_list(text: &str) -> Result<Vec<f64>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(parse_real).collect()
}

pub fn parse_form(text: &str) -> Result<AmplitudeForm, String> {
    match text.trim() {
        "derived" => Ok(AmplitudeForm::Derived),
        "verbatim" => Ok(AmplitudeForm::Verbatim),
        other => Err(format!("form must be derived or verbatim, got {other:?}")),
    }
}

pub fn parse_prefactor(text: &str) -> Result<PrefactorMode, String> {
    match text.trim() {
        "paper" => Ok(PrefactorMode::Paper),
        "physical" => Ok(PrefactorMode::Physical),
        other => Err(format!(
            "prefactor must be paper or physical, got {other:?}"
        )),
    }
}

fn parse_bath(text: &str) -> Result<BathKind, String> {
    match text {
        "common" => Ok(BathKind::Common),
        "individual" => Ok(BathKind::Individual),
        other => Err(format!("bath must be common or individual, got {other:?}")),
    }
}

fn parse_count(text: &str) -> Result<usize, String> {
    text.parse()
        .map_err(|_| format!("not a non-negative integer: {text:?}"))
}

/// Parses `key=value` lines; `#` starts a comment line. Defaults fill the rest.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    let mut tau_line = None;
    let mut times_line = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |message: String| CliError::Config(format!("line {lineno}: {message}"));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at(format!("expected key=value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let real = || parse_real(value).map_err(at);
        let count = || parse_count(value).map_err(at);
        match key {
            "gamma_p_tilde" => cfg.gamma_p_tilde = real()?,
            "s" => cfg.s = real()?,
            "bath" => cfg.bath = parse_bath(value).map_err(at)?,
            "tau_s_tilde" => {
                cfg.tau_s_tilde = Some(real()?);
                tau_line = Some(lineno);
            }
            "pulse_times" => {
                cfg.pulse_times = Some(parse_real_list(value).map_err(at)?);
                times_line = Some(lineno);
            }
            "t_max_tilde" => cfg.t_max_tilde = real()?,
            "n_samples" => cfg.n_samples = count()?,
            "n_modes" => cfg.n_modes = count()?,
            "cutoff_widths" => cfg.cutoff_widths = real()?,
            "form" => cfg.form = parse_form(value).map_err(at)?,
            "prefactor" => cfg.prefactor = parse_prefactor(value).map_err(at)?,
            "output_path" => cfg.output_path = Some(PathBuf::from(value)),
            "omega_0" => cfg.omega_0 = real()?,
            "tau_list" => cfg.tau_list = parse_real_list(value).map_err(at)?,
            "oracle_s" => cfg.oracle_s = real()?,
            "oracle_modes" => cfg.oracle_modes = count()?,
            "oracle_n_max" => cfg.oracle_n_max = count()?,
            "oracle_t_max" => cfg.oracle_t_max = real()?,
            "oracle_samples" => cfg.oracle_samples = count()?,
            other => return Err(at(format!("unknown key {other:?}"))),
        }
    }
    if let (Some(a), Some(b)) = (tau_line, times_line) {
        return Err(CliError::Config(format!(
            "line {}: tau_s_tilde (line {a}) and pulse_times (line {b}) are mutually exclusive",
            a.max(b)
        )));
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.tau_s_tilde.is_some() && self.pulse_times.is_some() {
            return bad("tau_s_tilde and pulse_times are mutually exclusive".into());
        }
        if self.n_samples < 2 {
            return bad(format!(
                "n_samples must be at least 2 (got {})",
                self.n_samples
            ));
        }
        if !(self.t_max_tilde > 0.0) {
            return bad(format!(
                "t_max_tilde must be positive (got {})",
                self.t_max_tilde
            ));
        }
        for (name, v) in [
            ("gamma_p_tilde", self.gamma_p_tilde),
            ("s", self.s),
            ("cutoff_widths", self.cutoff_widths),
            ("oracle_s", self.oracle_s),
            ("oracle_t_max", self.oracle_t_max),
        ] {
            if !(v > 0.0) {
                return bad(format!("{name} must be positive (got {v})"));
            }
        }
        if let Some(tau) = self.tau_s_tilde {
            if !(tau > 0.0) {
                return bad(format!("tau_s_tilde must be positive (got {tau})"));
            }
        }
        if let Some(&tau) = self.tau_list.iter().find(|t| !(**t > 0.0)) {
            return bad(format!("tau_list entries must be positive (got {tau})"));
        }
        if self.n_modes == 0 || self.oracle_modes == 0 {
            return bad("n_modes and oracle_modes must be at least 1".into());
        }
        if self.oracle_samples < 2 {
            return bad("oracle_samples must be at least 2".into());
        }
        Ok(())
    }
}
