//! Wootters concurrence of two-qubit density matrices.
//!
//! Basis order is fixed as `(|11⟩, |10⟩, |01⟩, |00⟩)`, so the Bell pair
//! `(|11⟩ + |00⟩)/√2` has its coherence in the corners `ρ[0][3]`, `ρ[3][0]`.

use std::fmt::Write as _;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub type Matrix4c = Matrix4<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const EIGEN_FLOOR: f64 = -1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntanglementError {
    #[error("matrix is not Hermitian (max |ρ − ρ†| = {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("eigenvalue {0:e} is below the PSD floor")]
    NotPositive(f64),
    #[error("entry is not finite")]
    NonFinite,
    #[error("eigenvalue {0:e} of √ρ·ρ̃·√ρ is below the PSD floor")]
    NegativeProduct(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// 4×4 Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitDensityMatrix(Matrix4c);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

// σ_y ⊗ σ_y in the (|11⟩, |10⟩, |01⟩, |00⟩) basis; real and anti-diagonal.
fn sigma_yy() -> Matrix4c {
    let mut y = Matrix4c::zeros();
    y[(0, 3)] = c(-1.0);
    y[(1, 2)] = c(1.0);
    y[(2, 1)] = c(1.0);
    y[(3, 0)] = c(-1.0);
    y
}

fn hermitian_part(m: &Matrix4c) -> Matrix4c {
    (m + m.adjoint()) * c(0.5)
}

fn eigen_psd(m: &Matrix4c) -> SymmetricEigen<Complex64, nalgebra::U4> {
    SymmetricEigen::new(hermitian_part(m))
}

impl TwoQubitDensityMatrix {
    pub fn new(m: Matrix4c) -> Result<Self, EntanglementError> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(EntanglementError::NonFinite);
        }
        let asym = (m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if asym > HERMITIAN_TOL {
            return Err(EntanglementError::NotHermitian(asym));
        }
        let trace = m.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(EntanglementError::BadTrace(trace));
        }
        let lowest = eigen_psd(&m).eigenvalues.min();
        if lowest < EIGEN_FLOOR {
            return Err(EntanglementError::NotPositive(lowest));
        }
        Ok(Self(m))
    }

    /// `|ψ⟩⟨ψ|` for a state vector, normalized here.
    pub fn from_pure(psi: [Complex64; 4]) -> Result<Self, EntanglementError> {
        let v = nalgebra::Vector4::from(psi);
        let v = v / c(v.norm());
        Self::new(v * v.adjoint())
    }

    /// `(|11⟩ + |00⟩)/√2`
    pub fn bell() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_pure([c(h), c(0.0), c(0.0), c(h)]).expect("valid state")
    }

    /// `|00⟩⟨00|`
    pub fn ground() -> Self {
        Self::from_pure([c(0.0), c(0.0), c(0.0), c(1.0)]).expect("valid state")
    }

    /// `p·|Φ⟩⟨Φ| + (1 − p)·I/4` around [`Self::bell`].
    pub fn werner(p: f64) -> Result<Self, EntanglementError> {
        let m = Self::bell().0 * c(p) + Matrix4c::identity() * c((1.0 - p) / 4.0);
        Self::new(m)
    }

    /// Dephased Bell state: populations `1/2` on `|11⟩`, `|00⟩` and corner coherence `coherence`.
    pub fn dephased_bell(coherence: Complex64) -> Result<Self, EntanglementError> {
        let mut m = Matrix4c::zeros();
        m[(0, 0)] = c(0.5);
        m[(3, 3)] = c(0.5);
        m[(0, 3)] = coherence;
        m[(3, 0)] = coherence.conj();
        Self::new(m)
    }

    pub fn matrix(&self) -> &Matrix4c {
        &self.0
    }

    /// Applies `U ρ U†`. `U` is assumed unitary.
    pub fn conjugate_by(&self, u: &Matrix4c) -> Result<Self, EntanglementError> {
        Self::new(u * self.0 * u.adjoint())
    }

    /// Plain-text form: four lines of four whitespace-separated `re,im` pairs.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..4 {
            let row: Vec<String> = (0..4)
                .map(|j| {
                    let z = self.0[(i, j)];
                    format!("{:.16e},{:.16e}", z.re, z.im)
                })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, EntanglementError> {
        let rows: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        if rows.len() != 4 {
            return Err(EntanglementError::Parse {
                line: rows.last().map_or(0, |r| r.0),
                message: format!("expected 4 rows, found {}", rows.len()),
            });
        }
        let mut m = Matrix4c::zeros();
        for (i, (line, row)) in rows.iter().enumerate() {
            let entries: Vec<&str> = row.split_whitespace().collect();
            if entries.len() != 4 {
                return Err(EntanglementError::Parse {
                    line: *line,
                    message: format!("expected 4 entries, found {}", entries.len()),
                });
            }
            for (j, entry) in entries.iter().enumerate() {
                let parse_err = || EntanglementError::Parse {
                    line: *line,
                    message: format!("bad complex entry `{entry}` (want re,im)"),
                };
                let (re, im) = entry.split_once(',').ok_or_else(parse_err)?;
                let re: f64 = re.trim().parse().map_err(|_| parse_err())?;
                let im: f64 = im.trim().parse().map_err(|_| parse_err())?;
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        Self::new(m)
    }

    fn sqrt(&self) -> Matrix4c {
        let eig = eigen_psd(&self.0);
        let roots = eig.eigenvalues.map(|mu| c(mu.max(0.0).sqrt()));
        let v = &eig.eigenvectors;
        v * Matrix4c::from_diagonal(&roots) * v.adjoint()
    }
}

/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`
pub fn spin_flip(rho: &TwoQubitDensityMatrix) -> TwoQubitDensityMatrix {
    let y = sigma_yy();
    TwoQubitDensityMatrix(y * rho.0.conjugate() * y)
}

/// Eigenvalues of `R = √(√ρ ρ̃ √ρ)` in decreasing order.
///
/// They are computed as the singular values of `√ρ·(σ_y⊗σ_y)·√ρ*`, whose
/// Gram matrix is `√ρ ρ̃ √ρ`; this keeps near-zero roots at rounding level
/// instead of the square root of rounding level. The Hermitian product is
/// still diagonalized to enforce the PSD floor.
pub fn wootters_lambdas(rho: &TwoQubitDensityMatrix) -> Result<[f64; 4], EntanglementError> {
    let root = rho.sqrt();
    let product = root * spin_flip(rho).0 * root;
    let lowest = eigen_psd(&product).eigenvalues.min();
    if lowest < EIGEN_FLOOR {
        return Err(EntanglementError::NegativeProduct(lowest));
    }
    let a = root * sigma_yy() * root.conjugate();
    let mut lambdas: [f64; 4] = a.singular_values().into();
    lambdas.sort_by(|x, y| y.total_cmp(x));
    Ok(lambdas)
}

/// `max(0, λ₁ − λ₂ − λ₃ − λ₄)`, always in `[0, 1]`.
pub fn concurrence(rho: &TwoQubitDensityMatrix) -> Result<f64, EntanglementError> {
    let l = wootters_lambdas(rho)?;
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// `max(0, 2λ_max − Tr R)` from the same eigenvalues.
pub fn concurrence_trace_form(lambdas: &[f64; 4]) -> f64 {
    let max = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let trace: f64 = lambdas.iter().sum();
    (2.0 * max - trace).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_rho(rng: &mut StdRng, rank: usize) -> TwoQubitDensityMatrix {
        let g = nalgebra::Matrix4xX::<Complex64>::from_fn(rank, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &g * g.adjoint();
        let m = m / c(m.trace().re);
        TwoQubitDensityMatrix::new(m).unwrap()
    }

    #[test]
    fn spin_flip_examples() {
        let bell = TwoQubitDensityMatrix::bell();
        let flipped = spin_flip(&bell);
        assert!((flipped.matrix() - bell.matrix()).norm() < 1e-15);

        let ground = TwoQubitDensityMatrix::ground();
        let mut top = Matrix4c::zeros();
        top[(0, 0)] = c(1.0);
        assert!((spin_flip(&ground).matrix() - top).norm() < 1e-15);
    }

    #[test]
    fn spin_flip_is_an_involution_and_stays_valid() {
        let mut rng = StdRng::seed_from_u64(7);
        for rank in 1..=4 {
            let rho = random_rho(&mut rng, rank);
            let once = spin_flip(&rho);
            assert!(TwoQubitDensityMatrix::new(once.matrix().clone_owned()).is_ok());
            let twice = spin_flip(&once);
            assert!((twice.matrix() - rho.matrix()).norm() < 1e-14);
        }
    }

    #[test]
    fn concurrence_of_basic_states() {
        assert!((concurrence(&TwoQubitDensityMatrix::bell()).unwrap() - 1.0).abs() < 1e-10);
        assert!(concurrence(&TwoQubitDensityMatrix::ground()).unwrap().abs() < 1e-10);
    }

    #[test]
    fn werner_curve() {
        for p in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0] {
            let rho = TwoQubitDensityMatrix::werner(p).unwrap();
            let expected = ((3.0 * p - 1.0) / 2.0).max(0.0);
            assert!(
                (concurrence(&rho).unwrap() - expected).abs() < 1e-10,
                "p={p}"
            );
        }
        assert!(
            (concurrence(&TwoQubitDensityMatrix::werner(0.5).unwrap()).unwrap() - 0.25).abs()
                < 1e-10
        );
    }

    #[test]
    fn x_state_concurrence_is_twice_the_coherence() {
        for &(re, im) in &[(0.5, 0.0), (0.3, 0.1), (0.0, -0.2), (1e-7, 0.0), (0.0, 0.0)] {
            let coh = Complex64::new(re, im);
            let rho = TwoQubitDensityMatrix::dephased_bell(coh).unwrap();
            assert!((concurrence(&rho).unwrap() - 2.0 * coh.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn trace_form_matches_sorted_form() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let rank = rng.random_range(1..=4);
            let rho = random_rho(&mut rng, rank);
            let l = wootters_lambdas(&rho).unwrap();
            let sorted = (l[0] - l[1] - l[2] - l[3]).max(0.0);
            assert!((concurrence_trace_form(&l) - sorted).abs() < 1e-10);
        }
    }

    #[test]
    fn lambdas_square_to_product_eigenvalues() {
        let mut rng = StdRng::seed_from_u64(5);
        let rho = random_rho(&mut rng, 4);
        let root = rho.sqrt();
        let product = root * spin_flip(&rho).matrix() * root;
        let mut eig: Vec<f64> = eigen_psd(&product).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        let l = wootters_lambdas(&rho).unwrap();
        for (mu, lam) in eig.iter().zip(&l) {
            assert!((mu - lam * lam).abs() < 1e-12);
        }
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..100 {
            let rank = rng.random_range(1..=4);
            let rho = random_rho(&mut rng, rank);
            let u = crate::entanglement::test_support::random_local_unitary(&mut rng);
            let before = concurrence(&rho).unwrap();
            let after = concurrence(&rho.conjugate_by(&u).unwrap()).unwrap();
            assert!((before - after).abs() < 1e-9);
            assert!((0.0..=1.0).contains(&before));
        }
    }

    #[test]
    fn validation_errors() {
        let mut m = *TwoQubitDensityMatrix::bell().matrix();
        m[(0, 3)] = Complex64::new(0.5, 0.1);
        assert!(matches!(
            TwoQubitDensityMatrix::new(m),
            Err(EntanglementError::NotHermitian(_))
        ));
        let m = Matrix4c::identity() * c(0.3);
        assert!(matches!(
            TwoQubitDensityMatrix::new(m),
            Err(EntanglementError::BadTrace(_))
        ));
        let m = Matrix4c::from_diagonal(&nalgebra::Vector4::new(c(1.2), c(-0.2), c(0.0), c(0.0)));
        assert!(matches!(
            TwoQubitDensityMatrix::new(m),
            Err(EntanglementError::NotPositive(_))
        ));
        assert!(TwoQubitDensityMatrix::dephased_bell(Complex64::new(0.6, 0.0)).is_err());
    }

    #[test]
    fn text_round_trip_and_errors() {
        let mut rng = StdRng::seed_from_u64(3);
        let rho = random_rho(&mut rng, 3);
        let back = TwoQubitDensityMatrix::parse_text(&rho.to_text()).unwrap();
        assert_eq!(back, rho);

        let err = TwoQubitDensityMatrix::parse_text("1,0 0,0 0,0 0,0\n").unwrap_err();
        assert!(matches!(err, EntanglementError::Parse { .. }));
        let text = "0.5,0 0,0 0,0 0.5,0\n0,0 0,0 0,0 0,0\n0,0 0,0 x 0,0\n0.5,0 0,0 0,0 0.5,0\n";
        assert!(matches!(
            TwoQubitDensityMatrix::parse_text(text),
            Err(EntanglementError::Parse { line: 3, .. })
        ));
        let text = "0.5,0 0,0 0,0 0.5,0\n0,0 0,0 0,0 0,0\n0,0 0,0 0,0 0,0\n0.5,0 0,0 0,0 0.5,0\n";
        let bell = TwoQubitDensityMatrix::parse_text(text).unwrap();
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-10);
    }
}
