//! Gate fidelity under noise, averaged over a fixed Bloch-sphere sample of
//! logical input states and several noise realizations per state.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_3, PI};

use crate::error::{Error, Result};
use crate::linalg::{c, Vec4, C64};
use crate::model::LoopSchedule;
use crate::noise::{sample_trajectory, NoiseChannel, NoiseSpec};
use crate::propagate::{default_steps_per_interval, leakage_populations, propagator, QuantumState};
use crate::rng::derive_seed;

pub const BLOCH_STATE_COUNT: usize = 18;
pub const DEFAULT_REALIZATIONS: usize = 5;
const RING_AZIMUTHS: usize = 8;

/// Logical input states `cos(θ/2)|a> + e^{iφ} sin(θ/2)|b>`.
///
/// Order: north pole |a>, south pole |b>, then the ring θ = π/3 and the
/// ring θ = 2π/3, each at φ = 2πj/8 for j = 0..8.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSample {
    pair: (usize, usize),
    states: Vec<QuantumState>,
}

pub fn bloch_sample() -> StateSample {
    bloch_sample_on((crate::model::E_PLUS, crate::model::E_MINUS))
}

pub fn bloch_sample_on(pair: (usize, usize)) -> StateSample {
    let (a, b) = pair;
    let point = |theta: f64, phi: f64| {
        let mut v = Vec4::zeros();
        v[a] = c((0.5 * theta).cos(), 0.0);
        v[b] = C64::from_polar((0.5 * theta).sin(), phi);
        QuantumState::new(v).expect("Bloch points are normalized")
    };
    let mut states = vec![QuantumState::basis(a), QuantumState::basis(b)];
    for theta in [FRAC_PI_3, 2.0 * FRAC_PI_3] {
        for j in 0..RING_AZIMUTHS {
            states.push(point(theta, 2.0 * PI * j as f64 / RING_AZIMUTHS as f64));
        }
    }
    StateSample { pair, states }
}

impl StateSample {
    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }

    pub fn states(&self) -> &[QuantumState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// First `n` states of the sample.
    pub fn truncated(mut self, n: usize) -> Self {
        self.states.truncate(n);
        self
    }
}

/// |<ψ_ideal|ψ_noisy>|, the square root of <ψ_ideal|ρ|ψ_ideal> for a pure ρ.
pub fn state_fidelity(ideal: &QuantumState, noisy: &QuantumState) -> Result<f64> {
    for psi in [ideal, noisy] {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "state norm is {n}, expected 1"
            )));
        }
    }
    Ok(ideal.inner(noisy).norm().min(1.0))
}

/// How noise is drawn and averaged for one gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityProtocol {
    pub channel: NoiseChannel,
    pub sigma: f64,
    pub realizations: usize,
    pub base_seed: u64,
    /// Number of Bloch states used, from the front of the sample.
    pub states: usize,
    /// Overrides the default step count per hold interval.
    pub steps_per_interval: Option<usize>,
}

impl FidelityProtocol {
    pub fn new(channel: NoiseChannel, sigma: f64, base_seed: u64) -> Self {
        Self {
            channel,
            sigma,
            realizations: DEFAULT_REALIZATIONS,
            base_seed,
            states: BLOCH_STATE_COUNT,
            steps_per_interval: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityRecord {
    pub extractions: usize,
    /// Realization-averaged fidelity per input state.
    pub per_state: Vec<f64>,
    /// Standard deviation over realizations per input state.
    pub per_state_std: Vec<f64>,
    pub mean_fidelity: f64,
    /// Standard deviation over every (state, realization) run.
    pub std_fidelity: f64,
    /// Standard error of `mean_fidelity`.
    pub std_error: f64,
    pub leakage_g: f64,
    pub leakage_e0: f64,
    /// Seeds in (state, realization) order.
    pub seeds: Vec<u64>,
}

struct Unit {
    fidelity: f64,
    leakage: (f64, f64),
}

/// Noisy vs noiseless fidelity at `extractions` hold intervals.
///
/// The reference for every input state is the noiseless evolution on the
/// same step grid, so the result isolates the noise from the finite-time
/// adiabatic error.
pub fn gate_fidelity(
    schedule: &LoopSchedule,
    protocol: &FidelityProtocol,
    extractions: usize,
) -> Result<FidelityRecord> {
    if protocol.realizations == 0 {
        return Err(Error::Parameter(
            "at least one realization is required".into(),
        ));
    }
    if protocol.states == 0 || protocol.states > BLOCH_STATE_COUNT {
        return Err(Error::Parameter(format!(
            "state count must be in 1..={BLOCH_STATE_COUNT}, got {}",
            protocol.states
        )));
    }
    let sample = bloch_sample_on(schedule.gate().logical_pair()).truncated(protocol.states);
    let steps = protocol
        .steps_per_interval
        .unwrap_or_else(|| default_steps_per_interval(schedule, extractions));

    let clean = sample_trajectory(&NoiseSpec::noiseless(schedule, extractions)?);
    let reference = propagator(schedule, Some(&clean), steps)?;
    let references: Vec<QuantumState> =
        sample.states().iter().map(|s| reference.apply(s)).collect();

    let n_real = protocol.realizations;
    let seeds: Vec<u64> = (0..sample.len())
        .flat_map(|i| (0..n_real).map(move |r| derive_seed(protocol.base_seed, i as u64, r as u64)))
        .collect();

    let units: Vec<Unit> = seeds
        .par_iter()
        .enumerate()
        .map(|(u, &seed)| {
            let i = u / n_real;
            let spec = NoiseSpec::new(
                schedule,
                protocol.channel,
                protocol.sigma,
                extractions,
                seed,
            )?;
            let traj = sample_trajectory(&spec);
            let out = propagator(schedule, Some(&traj), steps)?.apply(&sample.states()[i]);
            Ok(Unit {
                fidelity: state_fidelity(&references[i], &out)?,
                leakage: leakage_populations(&out),
            })
        })
        .collect::<Result<_>>()?;

    Ok(aggregate(extractions, n_real, &units, seeds))
}

fn aggregate(extractions: usize, n_real: usize, units: &[Unit], seeds: Vec<u64>) -> FidelityRecord {
    let mut per_state = Vec::new();
    let mut per_state_std = Vec::new();
    for chunk in units.chunks(n_real) {
        let fs: Vec<f64> = chunk.iter().map(|u| u.fidelity).collect();
        let (m, s) = mean_std(&fs);
        per_state.push(m);
        per_state_std.push(s);
    }
    let all: Vec<f64> = units.iter().map(|u| u.fidelity).collect();
    let (_, std_fidelity) = mean_std(&all);
    let n = units.len() as f64;
    FidelityRecord {
        extractions,
        mean_fidelity: per_state.iter().sum::<f64>() / per_state.len() as f64,
        per_state,
        per_state_std,
        std_fidelity,
        std_error: std_fidelity / n.sqrt(),
        leakage_g: units.iter().map(|u| u.leakage.0).sum::<f64>() / n,
        leakage_e0: units.iter().map(|u| u.leakage.1).sum::<f64>() / n,
        seeds,
    }
}

/// Mean and sample standard deviation (0 for a single value).
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
