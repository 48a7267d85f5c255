use proptest::prelude::*;

use holonoise::fidelity::state_fidelity;
use holonoise::linalg::{c, expm_hermitian, unitarity_defect, Mat4};
use holonoise::model::{ControlField, Gate, LoopSchedule};
use holonoise::noise::{sample_trajectory, NoiseChannel, NoiseSpec};
use holonoise::propagate::{propagator, QuantumState};
use holonoise::rng::derive_seed;

fn channel() -> impl Strategy<Value = NoiseChannel> {
    prop_oneof![
        Just(NoiseChannel::None),
        Just(NoiseChannel::Intensity),
        Just(NoiseChannel::Phase),
        Just(NoiseChannel::Both),
    ]
}

fn state() -> impl Strategy<Value = QuantumState> {
    prop::array::uniform8(-1.0f64..1.0)
        .prop_filter("non-zero", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|a| {
            let n = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            QuantumState::from_slice([0, 1, 2, 3].map(|k| c(a[2 * k] / n, a[2 * k + 1] / n)))
                .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_propagator_matches_spectral_exponential(
        re in prop::array::uniform3(-0.05f64..0.05),
        im in prop::array::uniform3(-0.05f64..0.05),
        h in 0.01f64..5.0,
    ) {
        let f = ControlField::new(c(re[0], im[0]), c(re[1], im[1]), c(re[2], im[2]));
        let closed = f.step_propagator(h);
        let spectral = expm_hermitian(&f.hamiltonian(), h);
        let diff: f64 = (closed - spectral).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-12, "{diff}");
        prop_assert!(unitarity_defect(&closed) < 1e-13);
    }

    #[test]
    fn noisy_propagators_stay_unitary(
        ch in channel(),
        sigma in 0.0f64..0.3,
        n_r in 1usize..60,
        seed in any::<u64>(),
    ) {
        let s = LoopSchedule::mixing(0.02, 3000.0, std::f64::consts::FRAC_PI_2).unwrap();
        let spec = NoiseSpec::new(&s, ch, sigma, n_r, seed).unwrap();
        let traj = sample_trajectory(&spec);
        let u = propagator(&s, Some(&traj), 3000usize.div_ceil(n_r)).unwrap();
        prop_assert!(u.unitarity_defect() <= 1e-10);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in state(), b in state()) {
        let f = state_fidelity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert_eq!(f, state_fidelity(&b, &a).unwrap());
        prop_assert!((state_fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fidelity_invariant_under_common_unitary(a in state(), b in state(), t in 0.0f64..100.0) {
        let u = ControlField::real(0.03, -0.01, 0.02).step_propagator(t);
        let apply = |psi: &QuantumState| QuantumState::new(u * psi.amplitudes()).unwrap();
        let before = state_fidelity(&a, &b).unwrap();
        let after = state_fidelity(&apply(&a), &apply(&b)).unwrap();
        prop_assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn seeds_distinct_across_units(base in any::<u64>(), i in 0u64..18, r in 0u64..64) {
        let s = derive_seed(base, i, r);
        prop_assert_eq!(s, derive_seed(base, i, r));
        prop_assert_ne!(s, derive_seed(base, i, r + 1));
        prop_assert_ne!(s, derive_seed(base, (i + 1) % 18, r));
    }

    #[test]
    fn trajectories_are_piecewise_constant_and_masked(
        ch in channel(),
        n_r in 1usize..40,
        seed in any::<u64>(),
    ) {
        let s = LoopSchedule::phase_shift(0.02, 7500.0, 0.7).unwrap();
        let traj = sample_trajectory(&NoiseSpec::new(&s, ch, 0.1, n_r, seed).unwrap());
        prop_assert_eq!(traj.len(), n_r);
        let tn = traj.noise_time();
        for k in 0..n_r {
            let t0 = k as f64 * tn;
            let a = traj.perturb(&s.control_field(t0 + 0.25 * tn).unwrap(), t0 + 0.25 * tn).unwrap();
            let b = traj.perturb(&s.control_field(t0 + 0.25 * tn).unwrap(), t0 + 0.75 * tn).unwrap();
            prop_assert_eq!(a, b);
            prop_assert_eq!(a.minus, c(0.0, 0.0));
        }
    }
}

#[test]
fn identity_hamiltonian_gives_identity() {
    let u = ControlField::ZERO.step_propagator(10.0);
    assert_eq!(u, Mat4::identity());
    assert!(Gate::Mixing.is_holonomic());
}
