//! Pulse-modulated dephasing amplitudes, decoherence exponents and
//! concurrence time series.
//!
//! For a bath mode of frequency `ω` and coupling `h_k`, the displacement
//! amplitude is `α_k(t) = h_k·a(ω_k, t)`. Between pulses the sign of the
//! spin-bath coupling is toggled, so `a` is a signed sum over the segments
//! `[t_j, t_{j+1}]` of the free amplitude `e^{iωt_{j+1}} − e^{iωt_j}`
//! (the [`AmplitudeForm::Derived`] form). An alternative closed form for a
//! uniform train is kept as [`AmplitudeForm::Verbatim`] so that the two can
//! be compared against the exact propagation in [`crate::oracle`].
//!
//! The decoherence exponent is `Γ(t) = 2 Σ_k |h_k|² |a(ω_k,t)|²` for a
//! common bath and `Σ_n ½ Σ_{k_n} |h_{k_n}|² |a(ω_{k_n},t)|²` for
//! individual baths; concurrence is `prefactor·e^{−Γ(t)}`.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::schedule::PulseSchedule;
use crate::spectral::quadrature::{self, QuadratureError, Tolerance};
use crate::spectral::{DiscreteSpectrum, GaussianSpectrum, SpectralError};

/// Concurrence values below this are reported as exactly zero.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

const MODE_CHUNK: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DephasingError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("the verbatim amplitude form needs a uniform pulse train")]
    NonUniformSchedule,
    #[error("time grid entry #{index} = {time} must be finite, non-negative and non-decreasing")]
    BadTimeGrid { index: usize, time: f64 },
    #[error("operation requires a {expected} bath")]
    WrongBath { expected: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeForm {
    /// Segment sum, continuous at pulse instants.
    #[default]
    Derived,
    /// Alternative uniform-train bracket; discontinuous at the second and later pulses.
    Verbatim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrefactorMode {
    /// `C(0) = 1/2`.
    #[default]
    Paper,
    /// `C(0) = 1`, for the normalized Bell pair.
    Physical,
}

impl PrefactorMode {
    pub fn value(self) -> f64 {
        match self {
            PrefactorMode::Paper => 0.5,
            PrefactorMode::Physical => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathKind {
    Common,
    Individual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bath {
    Common(GaussianSpectrum),
    Individual([GaussianSpectrum; 2]),
}

impl Bath {
    pub fn kind(&self) -> BathKind {
        match self {
            Bath::Common(_) => BathKind::Common,
            Bath::Individual(_) => BathKind::Individual,
        }
    }
}

/// How mode sums `Σ_k |h_k|² f(ω_k)` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumEvaluation {
    /// Midpoint discretization with `n_modes` cells over `±cutoff_widths` widths.
    Discrete { n_modes: usize, cutoff_widths: f64 },
    /// Adaptive quadrature of the continuous density over `±cutoff_widths` widths.
    Quadrature { cutoff_widths: f64 },
}

impl Default for SpectrumEvaluation {
    fn default() -> Self {
        SpectrumEvaluation::Discrete {
            n_modes: 2001,
            cutoff_widths: 6.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub bath: Bath,
    /// Qubit splitting. It commutes with the dephasing dynamics and never
    /// enters an output.
    pub omega_0: f64,
    pub prefactor: PrefactorMode,
    pub form: AmplitudeForm,
    pub evaluation: SpectrumEvaluation,
}

impl ModelParams {
    pub fn common(spectrum: GaussianSpectrum) -> Self {
        Self::with_bath(Bath::Common(spectrum))
    }

    pub fn individual(first: GaussianSpectrum, second: GaussianSpectrum) -> Self {
        Self::with_bath(Bath::Individual([first, second]))
    }

    fn with_bath(bath: Bath) -> Self {
        Self {
            bath,
            omega_0: 1.0,
            prefactor: PrefactorMode::default(),
            form: AmplitudeForm::default(),
            evaluation: SpectrumEvaluation::default(),
        }
    }

    pub fn with_prefactor(mut self, prefactor: PrefactorMode) -> Self {
        self.prefactor = prefactor;
        self
    }

    pub fn with_form(mut self, form: AmplitudeForm) -> Self {
        self.form = form;
        self
    }

    pub fn with_omega_0(mut self, omega_0: f64) -> Self {
        self.omega_0 = omega_0;
        self
    }

    pub fn with_evaluation(mut self, evaluation: SpectrumEvaluation) -> Self {
        self.evaluation = evaluation;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceSeries {
    pub t_grid: Vec<f64>,
    pub gamma: Vec<f64>,
    pub concurrence: Vec<f64>,
    pub prefactor: f64,
}

impl ConcurrenceSeries {
    fn from_gamma(t_grid: Vec<f64>, gamma: Vec<f64>, prefactor: PrefactorMode) -> Self {
        let prefactor = prefactor.value();
        let concurrence = gamma
            .iter()
            .map(|&g| concurrence_from_exponent(prefactor, g))
            .collect();
        Self {
            t_grid,
            gamma,
            concurrence,
            prefactor,
        }
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }
}

/// `prefactor·e^{−Γ}`, flushed to zero below [`UNDERFLOW_FLOOR`].
pub fn concurrence_from_exponent(prefactor: f64, gamma: f64) -> f64 {
    let c = prefactor * (-gamma).exp();
    if c < UNDERFLOW_FLOOR {
        0.0
    } else {
        c
    }
}

/// `n_samples` equally spaced times on `[0, t_max]`, last point exactly `t_max`.
pub fn time_grid(t_max: f64, n_samples: usize) -> Vec<f64> {
    match n_samples {
        0 => Vec::new(),
        1 => vec![0.0],
        n => {
            let last = (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        t_max
                    } else {
                        t_max * (i as f64 / last)
                    }
                })
                .collect()
        }
    }
}

// e^{iθ} − 1 without cancellation for small θ.
fn expm1_i(theta: f64) -> Complex64 {
    let half = (0.5 * theta).sin();
    Complex64::new(-2.0 * half * half, theta.sin())
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Incremental evaluation of the segment-sum amplitude over increasing times.
struct DerivedWalker<'a> {
    omega: f64,
    pulses: &'a [f64],
    applied: usize,
    completed: Complex64,
    sign: f64,
    last: f64,
}

impl<'a> DerivedWalker<'a> {
    fn new(omega: f64, pulses: &'a [f64]) -> Self {
        Self {
            omega,
            pulses,
            applied: 0,
            completed: Complex64::new(0.0, 0.0),
            sign: 1.0,
            last: 0.0,
        }
    }

    fn at(&mut self, t: f64) -> Complex64 {
        while self.applied < self.pulses.len() && self.pulses[self.applied] <= t {
            let p = self.pulses[self.applied];
            self.completed += self.segment(p);
            self.last = p;
            self.sign = -self.sign;
            self.applied += 1;
        }
        self.completed + self.segment(t)
    }

    fn segment(&self, end: f64) -> Complex64 {
        self.sign * cis(self.omega * self.last) * expm1_i(self.omega * (end - self.last))
    }
}

/// Same as [`DerivedWalker`] for the alternative uniform-train bracket.
struct VerbatimWalker<'a> {
    omega: f64,
    tau: f64,
    pulses: &'a [f64],
    applied: usize,
    sum: Complex64,
}

impl<'a> VerbatimWalker<'a> {
    fn new(omega: f64, tau: f64, pulses: &'a [f64]) -> Self {
        Self {
            omega,
            tau,
            pulses,
            applied: 0,
            sum: Complex64::new(0.0, 0.0),
        }
    }

    fn at(&mut self, t: f64) -> Complex64 {
        while self.applied < self.pulses.len() && self.pulses[self.applied] <= t {
            self.applied += 1;
            self.sum += verbatim_term(self.omega, self.tau, self.applied);
        }
        verbatim_close(self.omega, t, self.tau, self.applied, self.sum)
    }
}

// (−1)^m e^{−imωτ}(1 − e^{−iωτ})
fn verbatim_term(omega: f64, tau: f64, m: usize) -> Complex64 {
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    -sign * cis(-(m as f64) * omega * tau) * expm1_i(-omega * tau)
}

fn verbatim_close(omega: f64, t: f64, tau: f64, n: usize, sum: Complex64) -> Complex64 {
    let u = t - n as f64 * tau;
    cis(-omega * u) * (-expm1_i(omega * u) + sum)
}

/// Segment-sum amplitude `a(ω, t)`:
/// `Σ_{j<N} (−1)^j (e^{iωt_{j+1}} − e^{iωt_j}) + (−1)^N (e^{iωt} − e^{iωt_N})`
/// with `t_0 = 0` and `t_1..t_N` the pulses applied by `t`.
pub fn alpha_derived(omega: f64, t: f64, sched: &PulseSchedule) -> Complex64 {
    DerivedWalker::new(omega, sched.times()).at(t)
}

/// The alternative uniform-train bracket
/// `e^{−iωu}[(1 − e^{iωu}) + Σ_{m=1}^{N} (−1)^m e^{−imωτ}(1 − e^{−iωτ})]`
/// with `u = t − Nτ`. Meaningful for `t ≥ n_pulses·tau_s`.
pub fn alpha_verbatim(omega: f64, t: f64, tau_s: f64, n_pulses: usize) -> Complex64 {
    let sum = (1..=n_pulses)
        .map(|m| verbatim_term(omega, tau_s, m))
        .fold(Complex64::new(0.0, 0.0), |acc, z| acc + z);
    verbatim_close(omega, t, tau_s, n_pulses, sum)
}

/// Amplitude in the requested form; the verbatim form takes `N` from the
/// schedule and rejects non-uniform trains.
pub fn alpha(
    form: AmplitudeForm,
    omega: f64,
    t: f64,
    sched: &PulseSchedule,
) -> Result<Complex64, DephasingError> {
    match form {
        AmplitudeForm::Derived => Ok(alpha_derived(omega, t, sched)),
        AmplitudeForm::Verbatim => {
            let tau = verbatim_interval(sched)?;
            Ok(VerbatimWalker::new(omega, tau, sched.times()).at(t))
        }
    }
}

fn verbatim_interval(sched: &PulseSchedule) -> Result<f64, DephasingError> {
    match sched.uniform_interval() {
        Some(tau) => Ok(tau),
        None if sched.is_empty() => Ok(0.0),
        None => Err(DephasingError::NonUniformSchedule),
    }
}

fn check_grid(t_grid: &[f64]) -> Result<(), DephasingError> {
    let mut previous = 0.0;
    for (index, &time) in t_grid.iter().enumerate() {
        if !time.is_finite() || time < previous {
            return Err(DephasingError::BadTimeGrid { index, time });
        }
        previous = time;
    }
    Ok(())
}

fn mode_chunk_sums(
    modes: &[crate::spectral::Mode],
    sched: &PulseSchedule,
    t_grid: &[f64],
    form: AmplitudeForm,
    tau: f64,
) -> Vec<f64> {
    let mut acc = vec![0.0; t_grid.len()];
    for m in modes {
        match form {
            AmplitudeForm::Derived => {
                let mut walk = DerivedWalker::new(m.omega, sched.times());
                for (slot, &t) in acc.iter_mut().zip(t_grid) {
                    *slot += m.weight * walk.at(t).norm_sqr();
                }
            }
            AmplitudeForm::Verbatim => {
                let mut walk = VerbatimWalker::new(m.omega, tau, sched.times());
                for (slot, &t) in acc.iter_mut().zip(t_grid) {
                    *slot += m.weight * walk.at(t).norm_sqr();
                }
            }
        }
    }
    acc
}

/// `Σ_k |h_k|² |a(ω_k, t)|²` at every grid time.
///
/// Modes are summed in fixed-size chunks whose partial sums are combined in
/// order, so the result does not depend on the thread count.
pub fn mode_sum_series(
    spectrum: &DiscreteSpectrum,
    sched: &PulseSchedule,
    t_grid: &[f64],
    form: AmplitudeForm,
) -> Result<Vec<f64>, DephasingError> {
    check_grid(t_grid)?;
    let tau = match form {
        AmplitudeForm::Derived => 0.0,
        AmplitudeForm::Verbatim => verbatim_interval(sched)?,
    };
    let partials: Vec<Vec<f64>> = spectrum
        .modes()
        .par_chunks(MODE_CHUNK)
        .map(|chunk| mode_chunk_sums(chunk, sched, t_grid, form, tau))
        .collect();
    let mut total = vec![0.0; t_grid.len()];
    for part in &partials {
        for (slot, v) in total.iter_mut().zip(part) {
            *slot += v;
        }
    }
    Ok(total)
}

/// `∫ h(ω) |a(ω, t)|² dω` over `±cutoff_widths` widths by adaptive quadrature.
pub fn mode_integral_series(
    spectrum: &GaussianSpectrum,
    cutoff_widths: f64,
    sched: &PulseSchedule,
    t_grid: &[f64],
    form: AmplitudeForm,
) -> Result<Vec<f64>, DephasingError> {
    check_grid(t_grid)?;
    if form == AmplitudeForm::Verbatim {
        verbatim_interval(sched)?;
    }
    let (lo, hi) = spectrum.support(cutoff_widths);
    let tol = Tolerance {
        abs: 1e-14,
        rel: 1e-12,
        max_intervals: 100_000,
    };
    t_grid
        .par_iter()
        .map(|&t| {
            let integrand = |w: f64| {
                let a = alpha(form, w, t, sched).expect("schedule checked above");
                spectrum.density(w) * a.norm_sqr()
            };
            Ok(quadrature::integrate(integrand, lo, hi, tol)?.value)
        })
        .collect()
}

fn bath_mode_sums(
    spectrum: &GaussianSpectrum,
    evaluation: SpectrumEvaluation,
    form: AmplitudeForm,
    sched: &PulseSchedule,
    t_grid: &[f64],
) -> Result<Vec<f64>, DephasingError> {
    match evaluation {
        SpectrumEvaluation::Discrete {
            n_modes,
            cutoff_widths,
        } => {
            let discrete = spectrum.discretize(n_modes, cutoff_widths)?;
            mode_sum_series(&discrete, sched, t_grid, form)
        }
        SpectrumEvaluation::Quadrature { cutoff_widths } => {
            mode_integral_series(spectrum, cutoff_widths, sched, t_grid, form)
        }
    }
}

fn common_spectrum(params: &ModelParams) -> Result<&GaussianSpectrum, DephasingError> {
    match &params.bath {
        Bath::Common(spec) => Ok(spec),
        Bath::Individual(_) => Err(DephasingError::WrongBath { expected: "common" }),
    }
}

fn gamma_common_series(
    params: &ModelParams,
    sched: &PulseSchedule,
    t_grid: &[f64],
) -> Result<Vec<f64>, DephasingError> {
    let spec = common_spectrum(params)?;
    let sums = bath_mode_sums(spec, params.evaluation, params.form, sched, t_grid)?;
    Ok(sums.into_iter().map(|s| 2.0 * s).collect())
}

fn gamma_individual_series(
    params: &ModelParams,
    sched: &PulseSchedule,
    t_grid: &[f64],
) -> Result<Vec<f64>, DephasingError> {
    let [first, second] = match &params.bath {
        Bath::Individual(pair) => pair,
        Bath::Common(_) => {
            return Err(DephasingError::WrongBath {
                expected: "individual",
            })
        }
    };
    let a = bath_mode_sums(first, params.evaluation, params.form, sched, t_grid)?;
    let b = if second == first {
        a.clone()
    } else {
        bath_mode_sums(second, params.evaluation, params.form, sched, t_grid)?
    };
    Ok(a.iter().zip(&b).map(|(x, y)| 0.5 * x + 0.5 * y).collect())
}

/// Common-bath exponent `Γ(t) = 2 Σ_k |h_k|² |a(ω_k,t)|²`.
pub fn gamma_common(
    params: &ModelParams,
    sched: &PulseSchedule,
    t: f64,
) -> Result<f64, DephasingError> {
    Ok(gamma_common_series(params, sched, &[t])?[0])
}

pub fn concurrence_common(
    params: &ModelParams,
    sched: &PulseSchedule,
    t_grid: &[f64],
) -> Result<ConcurrenceSeries, DephasingError> {
    let gamma = gamma_common_series(params, sched, t_grid)?;
    Ok(ConcurrenceSeries::from_gamma(
        t_grid.to_vec(),
        gamma,
        params.prefactor,
    ))
}

pub fn concurrence_individual(
    params: &ModelParams,
    sched: &PulseSchedule,
    t_grid: &[f64],
) -> Result<ConcurrenceSeries, DephasingError> {
    let gamma = gamma_individual_series(params, sched, t_grid)?;
    Ok(ConcurrenceSeries::from_gamma(
        t_grid.to_vec(),
        gamma,
        params.prefactor,
    ))
}

/// Dispatches on the bath kind.
pub fn concurrence_series(
    params: &ModelParams,
    sched: &PulseSchedule,
    t_grid: &[f64],
) -> Result<ConcurrenceSeries, DephasingError> {
    match params.bath.kind() {
        BathKind::Common => concurrence_common(params, sched, t_grid),
        BathKind::Individual => concurrence_individual(params, sched, t_grid),
    }
}

/// Pulse-free common-bath exponent `4s(1 − cos(ω_p t)·e^{−γ_p² t²/4})`.
pub fn gamma_free_closed_form(spec: &GaussianSpectrum, t: f64) -> f64 {
    let x = 0.25 * spec.gamma_p() * spec.gamma_p() * t * t;
    let half = (0.5 * spec.omega_p() * t).sin();
    // 1 − cos·e^{−x} = (1 − e^{−x}) + e^{−x}(1 − cos)
    4.0 * spec.s() * (-(-x).exp_m1() + (-x).exp() * 2.0 * half * half)
}
