//! Bath coupling functions and their discrete-mode approximations.
//!
//! The coupling function is the spectral weight `h(ω) = Σ_k |h_k|² δ(ω − ω_k)`.
//! For the Gaussian bath it reads
//!
//! ```text
//! h(ω) = s / (√π γ_p) · exp(−(ω − ω_p)² / γ_p²)
//! ```
//!
//! so that `∫ h(ω) dω = s`, the mean number of bosons seen by one spin.
//! Frequencies are in units of `ω_p` throughout (`ω_p = 1` for the scaled
//! presets), and times are scaled as `t̃ = t·ω_p`.

pub mod quadrature;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("{name} must be positive and finite (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("n_modes must be at least 1")]
    NoModes,
    #[error("discretization grid [{lo}, {hi}] is empty after clipping at ω = 0")]
    EmptyGrid { lo: f64, hi: f64 },
    #[error("mode {index}: frequency {omega} must be positive and strictly increasing")]
    BadFrequency { index: usize, omega: f64 },
    #[error("mode {index}: weight {weight} must be finite and non-negative")]
    BadWeight { index: usize, weight: f64 },
}

/// A continuous coupling function `h(ω)` that can be sampled on a grid.
///
/// Only the Gaussian shape is provided; other shapes plug into
/// [`discretize_on`] through this trait.
pub trait CouplingFunction {
    fn density(&self, omega: f64) -> f64;
}

/// Gaussian coupling function with weight `s`, center `omega_p` and width `gamma_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpectrum {
    s: f64,
    omega_p: f64,
    gamma_p: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64, SpectralError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(SpectralError::NonPositive { name, value })
    }
}

impl GaussianSpectrum {
    pub fn new(s: f64, omega_p: f64, gamma_p: f64) -> Result<Self, SpectralError> {
        Ok(Self {
            s: positive("s", s)?,
            omega_p: positive("omega_p", omega_p)?,
            gamma_p: positive("gamma_p", gamma_p)?,
        })
    }

    /// Spectrum in scaled units: `ω_p = 1`, `γ̃ = γ_p/ω_p`.
    pub fn scaled(s: f64, gamma_tilde: f64) -> Result<Self, SpectralError> {
        Self::new(s, 1.0, gamma_tilde)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }

    pub fn gamma_p(&self) -> f64 {
        self.gamma_p
    }

    /// `h(ω)`; maximal at `ω_p` where it equals `s/(√π γ_p)`.
    pub fn density(&self, omega: f64) -> f64 {
        let x = (omega - self.omega_p) / self.gamma_p;
        self.s / (std::f64::consts::PI.sqrt() * self.gamma_p) * (-x * x).exp()
    }

    /// Closed-form Fourier transform `∫ h(ω) e^{iωt} dω = s·e^{iω_p t}·e^{−γ_p² t²/4}`.
    pub fn overlap(&self, t: f64) -> Complex64 {
        let envelope = self.s * (-0.25 * self.gamma_p * self.gamma_p * t * t).exp();
        Complex64::from_polar(envelope, self.omega_p * t)
    }

    /// Exact integral of `h` over `[lo, hi]`.
    pub fn integral_between(&self, lo: f64, hi: f64) -> f64 {
        let a = (lo - self.omega_p) / self.gamma_p;
        let b = (hi - self.omega_p) / self.gamma_p;
        0.5 * self.s * (libm::erf(b) - libm::erf(a))
    }

    /// Mass of `h` sitting at `ω ≤ 0`.
    pub fn negative_frequency_mass(&self) -> f64 {
        0.5 * self.s * libm::erfc(self.omega_p / self.gamma_p)
    }

    /// Grid support `[ω_p − c·γ_p, ω_p + c·γ_p]`, clipped at `ω = 0`.
    pub fn support(&self, cutoff_widths: f64) -> (f64, f64) {
        let lo = (self.omega_p - cutoff_widths * self.gamma_p).max(0.0);
        (lo, self.omega_p + cutoff_widths * self.gamma_p)
    }

    /// Midpoint discretization on `n_modes` equal cells spanning
    /// `cutoff_widths` widths either side of the center. Each mode carries
    /// `h(ω_k)·Δω`. Mass removed by clipping at `ω = 0` is reported in
    /// [`DiscreteSpectrum::clipped_mass`], never folded back in.
    pub fn discretize(
        &self,
        n_modes: usize,
        cutoff_widths: f64,
    ) -> Result<DiscreteSpectrum, SpectralError> {
        positive("cutoff_widths", cutoff_widths)?;
        let (lo, hi) = self.support(cutoff_widths);
        let mut spectrum = discretize_on(self, lo, hi, n_modes)?;
        let unclipped_lo = self.omega_p - cutoff_widths * self.gamma_p;
        if unclipped_lo < 0.0 {
            spectrum.clipped_mass = self.integral_between(unclipped_lo, 0.0);
        }
        Ok(spectrum)
    }
}

impl CouplingFunction for GaussianSpectrum {
    fn density(&self, omega: f64) -> f64 {
        GaussianSpectrum::density(self, omega)
    }
}

/// Midpoint rule for any coupling function on `[lo, hi]`.
pub fn discretize_on<F: CouplingFunction + ?Sized>(
    f: &F,
    lo: f64,
    hi: f64,
    n_modes: usize,
) -> Result<DiscreteSpectrum, SpectralError> {
    if n_modes == 0 {
        return Err(SpectralError::NoModes);
    }
    if !(hi > lo) || hi <= 0.0 {
        return Err(SpectralError::EmptyGrid { lo, hi });
    }
    let width = (hi - lo) / n_modes as f64;
    let modes = (0..n_modes)
        .map(|k| {
            let omega = lo + (k as f64 + 0.5) * width;
            Mode {
                omega,
                weight: f.density(omega) * width,
            }
        })
        .collect();
    DiscreteSpectrum::new(modes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub omega: f64,
    /// `|h_k|²`
    pub weight: f64,
}

/// A finite set of bath modes, sorted by frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectrum {
    modes: Vec<Mode>,
    clipped_mass: f64,
}

impl DiscreteSpectrum {
    pub fn new(modes: Vec<Mode>) -> Result<Self, SpectralError> {
        let mut previous = 0.0;
        for (index, m) in modes.iter().enumerate() {
            if !m.omega.is_finite() || m.omega <= previous {
                return Err(SpectralError::BadFrequency {
                    index,
                    omega: m.omega,
                });
            }
            if !m.weight.is_finite() || m.weight < 0.0 {
                return Err(SpectralError::BadWeight {
                    index,
                    weight: m.weight,
                });
            }
            previous = m.omega;
        }
        if modes.is_empty() {
            return Err(SpectralError::NoModes);
        }
        Ok(Self {
            modes,
            clipped_mass: 0.0,
        })
    }

    pub fn single(omega: f64, weight: f64) -> Result<Self, SpectralError> {
        Self::new(vec![Mode { omega, weight }])
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.weight).sum()
    }

    pub fn clipped_mass(&self) -> f64 {
        self.clipped_mass
    }

    /// `Σ_k |h_k|² f(ω_k)`
    pub fn mode_sum<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.modes.iter().map(|m| m.weight * f(m.omega)).sum()
    }

    /// Discrete counterpart of [`GaussianSpectrum::overlap`].
    pub fn overlap(&self, t: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|m| Complex64::from_polar(m.weight, m.omega * t))
            .sum()
    }
}
