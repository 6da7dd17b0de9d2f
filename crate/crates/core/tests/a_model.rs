// Cross-module properties: closed forms against the Wootters measure and the
// truncated-Fock propagator.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use dephasure::dephasing::{self, time_grid};
use dephasure::entanglement;
use dephasure::oracle::{self, FockConfig};
use dephasure::{
    BathKind, DiscreteSpectrum, GaussianSpectrum, ModelParams, PrefactorMode, PulseSchedule,
    SpectrumEvaluation, TwoQubitDensityMatrix,
};

fn small_params(bath: BathKind) -> ModelParams {
    let spec = GaussianSpectrum::scaled(5.0, 0.1).unwrap();
    let p = match bath {
        BathKind::Common => ModelParams::common(spec),
        BathKind::Individual => ModelParams::individual(spec, spec),
    };
    p.with_evaluation(SpectrumEvaluation::Discrete {
        n_modes: 301,
        cutoff_widths: 6.0,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // C = e^{−Γ} in physical mode is the Wootters concurrence of the Bell
    // state whose corner coherence decayed by the same factor.
    #[test]
    fn concurrence_is_wootters_of_dephased_bell(tau in 0.2f64..7.0, t in 0.0f64..20.0) {
        let sched = PulseSchedule::uniform(tau, 20.0).unwrap();
        let params = small_params(BathKind::Common).with_prefactor(PrefactorMode::Physical);
        let s = dephasing::concurrence_series(&params, &sched, &[t]).unwrap();
        let rho = TwoQubitDensityMatrix::dephased_bell(Complex64::new(0.5 * (-s.gamma[0]).exp(), 0.0)).unwrap();
        let c = entanglement::concurrence(&rho).unwrap();
        prop_assert!((c - s.concurrence[0]).abs() < 1e-12);
    }

    #[test]
    fn individual_never_below_common(tau in 0.2f64..7.0, t in 0.0f64..20.0) {
        let sched = PulseSchedule::uniform(tau, 20.0).unwrap();
        let com = dephasing::concurrence_series(&small_params(BathKind::Common), &sched, &[t]).unwrap();
        let ind = dephasing::concurrence_series(&small_params(BathKind::Individual), &sched, &[t]).unwrap();
        prop_assert!(com.concurrence[0] <= ind.concurrence[0]);
        prop_assert!((ind.gamma[0] - 0.5 * com.gamma[0]).abs() <= 1e-12 * com.gamma[0].max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn oracle_agrees_with_segment_sum(
        omega in 0.6f64..1.6,
        weight in 0.01f64..0.15,
        times in prop::collection::vec(0.1f64..1.5, 0..5),
    ) {
        // cumulative gaps give strictly increasing pulse times
        let pulses: Vec<f64> = times
            .iter()
            .scan(0.0, |acc, dt| { *acc += dt; Some(*acc) })
            .collect();
        let sched = PulseSchedule::from_times(pulses).unwrap();
        let cfg = FockConfig::new(DiscreteSpectrum::single(omega, weight).unwrap(), 20, BathKind::Common);
        let grid = time_grid(2.0 * PI, 25);
        let report = oracle::adjudicate(&cfg, &sched, &grid).unwrap();
        prop_assert!(report.max_dev_derived <= 1e-6, "{}", report.summary());
    }
}
