use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dephasing::{self, BathKind, DephasingError, ModelParams, SpectrumEvaluation};
use crate::fmt_f64;
use crate::oracle::{self, AdjudicationReport, FockConfig, OracleError};
use crate::schedule::PulseSchedule;
use crate::spectral::GaussianSpectrum;

use super::{CliError, RunConfig};

fn spectrum(cfg: &RunConfig, s: f64) -> Result<GaussianSpectrum, CliError> {
    GaussianSpectrum::scaled(s, cfg.gamma_p_tilde).map_err(|e| CliError::Config(e.to_string()))
}

fn model(cfg: &RunConfig, spec: GaussianSpectrum, bath: BathKind) -> ModelParams {
    let params = match bath {
        BathKind::Common => ModelParams::common(spec),
        BathKind::Individual => ModelParams::individual(spec, spec),
    };
    params
        .with_prefactor(cfg.prefactor)
        .with_form(cfg.form)
        .with_omega_0(cfg.omega_0)
        .with_evaluation(SpectrumEvaluation::Discrete {
            n_modes: cfg.n_modes,
            cutoff_widths: cfg.cutoff_widths,
        })
}

fn schedule(cfg: &RunConfig, horizon: f64) -> Result<PulseSchedule, CliError> {
    let sched = match (&cfg.tau_s_tilde, &cfg.pulse_times) {
        (Some(tau), _) => PulseSchedule::uniform(*tau, horizon),
        (None, Some(times)) => PulseSchedule::from_times(times.clone()),
        (None, None) => Ok(PulseSchedule::free()),
    };
    sched.map_err(|e| CliError::Config(e.to_string()))
}

fn dephasing_error(e: DephasingError) -> CliError {
    match e {
        DephasingError::NonUniformSchedule | DephasingError::Spectral(_) => {
            CliError::Config(e.to_string())
        }
        other => CliError::Runtime(other.to_string()),
    }
}

fn series_csv(
    params: &ModelParams,
    sched: &PulseSchedule,
    grid: &[f64],
) -> Result<String, CliError> {
    let series = dephasing::concurrence_series(params, sched, grid).map_err(dephasing_error)?;
    let mut out = String::from("t_tilde,gamma,concurrence\n");
    for i in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(series.t_grid[i]),
            fmt_f64(series.gamma[i]),
            fmt_f64(series.concurrence[i])
        );
    }
    Ok(out)
}

/// `t_tilde,gamma,concurrence` on `n_samples` points over `[0, t_max_tilde]`.
pub fn run_simulate(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let params = model(cfg, spectrum(cfg, cfg.s)?, cfg.bath);
    let sched = schedule(cfg, cfg.t_max_tilde)?;
    series_csv(
        &params,
        &sched,
        &dephasing::time_grid(cfg.t_max_tilde, cfg.n_samples),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub name: &'static str,
    pub bath: BathKind,
    pub tau_s_tilde: Option<f64>,
}

/// a/d free, b/e τ̃ = π/5, c/f τ̃ = 2π; a–c common, d–f individual.
pub fn figure2_panels() -> [Panel; 6] {
    let p = |name, bath, tau_s_tilde| Panel {
        name,
        bath,
        tau_s_tilde,
    };
    [
        p("fig2a", BathKind::Common, None),
        p("fig2b", BathKind::Common, Some(PI / 5.0)),
        p("fig2c", BathKind::Common, Some(2.0 * PI)),
        p("fig2d", BathKind::Individual, None),
        p("fig2e", BathKind::Individual, Some(PI / 5.0)),
        p("fig2f", BathKind::Individual, Some(2.0 * PI)),
    ]
}

/// Six `(file name, csv)` pairs at γ̃ = 0.1, s = 5. Grid, discretization,
/// form and prefactor come from `cfg`; its schedule and bath are ignored.
pub fn run_figure2(cfg: &RunConfig) -> Result<Vec<(String, String)>, CliError> {
    let base = RunConfig {
        gamma_p_tilde: 0.1,
        s: 5.0,
        tau_s_tilde: None,
        pulse_times: None,
        ..cfg.clone()
    };
    base.validate()?;
    figure2_panels()
        .par_iter()
        .map(|panel| {
            let panel_cfg = RunConfig {
                bath: panel.bath,
                tau_s_tilde: panel.tau_s_tilde,
                ..base.clone()
            };
            Ok((format!("{}.csv", panel.name), run_simulate(&panel_cfg)?))
        })
        .collect()
}

/// `tau_s_tilde,gamma,concurrence` at `t_max_tilde`, one row per interval.
pub fn run_sweep(cfg: &RunConfig, taus: &[f64]) -> Result<String, CliError> {
    cfg.validate()?;
    if taus.is_empty() {
        return Err(CliError::Config(
            "sweep needs at least one tau_s_tilde value".into(),
        ));
    }
    let params = model(cfg, spectrum(cfg, cfg.s)?, cfg.bath);
    let rows: Vec<(f64, f64, f64)> = taus
        .par_iter()
        .map(|&tau| {
            let sched = PulseSchedule::uniform(tau, cfg.t_max_tilde)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let series = dephasing::concurrence_series(&params, &sched, &[cfg.t_max_tilde])
                .map_err(dephasing_error)?;
            Ok((tau, series.gamma[0], series.concurrence[0]))
        })
        .collect::<Result<_, CliError>>()?;
    let mut out = String::from("tau_s_tilde,gamma,concurrence\n");
    for (tau, g, c) in rows {
        let _ = writeln!(out, "{},{},{}", fmt_f64(tau), fmt_f64(g), fmt_f64(c));
    }
    Ok(out)
}

/// `omega,weight` of the discretized spectrum.
pub fn run_spectrum(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let disc = spectrum(cfg, cfg.s)?
        .discretize(cfg.n_modes, cfg.cutoff_widths)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = String::from("omega,weight\n");
    for m in disc.modes() {
        let _ = writeln!(out, "{},{}", fmt_f64(m.omega), fmt_f64(m.weight));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub report: AdjudicationReport,
    /// `(n_max, max change from the previous n_max)` for each doubling.
    pub convergence: Vec<(usize, f64)>,
    pub converged: bool,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        !self.report.matching().is_empty()
    }

    pub fn summary(&self) -> String {
        let steps: Vec<String> = self
            .convergence
            .iter()
            .skip(1)
            .map(|(n, d)| format!("{n}:{d:.1e}"))
            .collect();
        let state = if self.converged {
            "converged"
        } else {
            "NOT converged"
        };
        format!(
            "{} | n_max sweep [{}] {}",
            self.report.summary(),
            steps.join(" "),
            state
        )
    }
}

fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::DimensionOverflow { .. }
        | OracleError::NoOccupation
        | OracleError::Spectral(_)
        | OracleError::Dephasing(DephasingError::Spectral(_)) => CliError::Config(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

/// Adjudicates both analytic branches against the truncated-Fock oracle on
/// `oracle_modes` modes around the peak carrying weight `oracle_s`. The
/// occupation cutoff starts at `oracle_n_max` and is doubled until Γ stops
/// moving by more than the convergence tolerance.
pub fn oracle_check(cfg: &RunConfig) -> Result<OracleCheck, CliError> {
    cfg.validate()?;
    let spec = spectrum(cfg, cfg.oracle_s)?;
    let fock = FockConfig::around_peak(&spec, cfg.oracle_modes, cfg.oracle_n_max, cfg.bath)
        .map_err(oracle_error)?;
    let sched = schedule(cfg, cfg.oracle_t_max)?;
    let grid = dephasing::time_grid(cfg.oracle_t_max, cfg.oracle_samples);
    let sweep = oracle::converge_n_max(&fock, &sched, &grid, oracle::CONVERGENCE_TOL)
        .map_err(oracle_error)?;
    let n_max = sweep
        .converged
        .unwrap_or_else(|| sweep.steps.last().map_or(cfg.oracle_n_max, |s| s.0));
    let report =
        oracle::adjudicate(&fock.with_n_max(n_max), &sched, &grid).map_err(oracle_error)?;
    Ok(OracleCheck {
        report,
        convergence: sweep.steps,
        converged: sweep.converged.is_some(),
    })
}

/// Generic matplotlib helper written next to the figure CSVs on request.
pub const PLOT_SCRIPT: &str = r#"import csv, glob, os, sys
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
files = sorted(glob.glob(os.path.join(here, "fig2*.csv")))
fig, axes = plt.subplots(2, 3, figsize=(12, 6), sharex=True, sharey=True)
for ax, path in zip(axes.flat, files):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    ax.plot([float(r["t_tilde"]) for r in rows], [float(r["concurrence"]) for r in rows])
    ax.set_title(os.path.basename(path)[:-4])
for ax in axes[1]:
    ax.set_xlabel("t")
for ax in axes[:, 0]:
    ax.set_ylabel("C")
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "fig2.png"), dpi=150)
"#;
