//! Piecewise-constant stochastic perturbations of the control fields.
//!
//! The loop time is split into `n_r` equal hold intervals of length
//! `T_n = T_ad / n_r`. At the start of every interval three intensity
//! offsets `δΩ_i ~ N(0, (σΩ)²)` and three phases `ξ_i ~ N(0, σ²)` are
//! drawn, always in the order
//! `δΩ+, δΩ-, δΩ0, ξ+, ξ-, ξ0`, whatever the channel. Channels only select
//! which of the draws are applied, so the intensity and combined channels
//! see identical intensity offsets for the same seed.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::{ControlField, LoopSchedule};
use crate::rng::GaussianStream;

/// Relative tolerance for `T_ad = n_r T_n`.
const DIVISIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseChannel {
    None,
    Intensity,
    Phase,
    Both,
}

impl NoiseChannel {
    pub fn has_intensity(self) -> bool {
        matches!(self, NoiseChannel::Intensity | NoiseChannel::Both)
    }

    pub fn has_phase(self) -> bool {
        matches!(self, NoiseChannel::Phase | NoiseChannel::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub channel: NoiseChannel,
    /// Relative intensity std-dev δΩ/Ω; also the phase std-dev in radians.
    pub sigma: f64,
    /// Hold time T_n in fs.
    pub noise_time: f64,
    /// n_r = T_ad / T_n.
    pub extractions: usize,
    pub seed: u64,
    /// Field scale that converts `sigma` into an absolute offset (fs^-1).
    pub omega: f64,
    /// Components that receive noise (undriven lasers stay off).
    pub driven: [bool; 3],
}

impl NoiseSpec {
    /// Spec with `extractions` hold intervals over the schedule.
    pub fn new(
        schedule: &LoopSchedule,
        channel: NoiseChannel,
        sigma: f64,
        extractions: usize,
        seed: u64,
    ) -> Result<Self> {
        if extractions == 0 {
            return Err(Error::Config(
                "the number of extractions must be at least 1".into(),
            ));
        }
        let spec = Self {
            channel,
            sigma,
            noise_time: schedule.adiabatic_time() / extractions as f64,
            extractions,
            seed,
            omega: schedule.omega(),
            driven: schedule.gate().driven_components(),
        };
        spec.validate(schedule.adiabatic_time())?;
        Ok(spec)
    }

    /// Spec from a physical hold time; `T_ad` must be a multiple of it.
    pub fn with_noise_time(
        schedule: &LoopSchedule,
        channel: NoiseChannel,
        sigma: f64,
        noise_time: f64,
        seed: u64,
    ) -> Result<Self> {
        let n = extractions_for(schedule.adiabatic_time(), noise_time)?;
        Self::new(schedule, channel, sigma, n, seed)
    }

    /// Channel `None` over the same interval grid.
    pub fn noiseless(schedule: &LoopSchedule, extractions: usize) -> Result<Self> {
        Self::new(schedule, NoiseChannel::None, 0.0, extractions, 0)
    }

    pub fn validate(&self, t_ad: f64) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!(
                "sigma must be finite and non-negative, got {}",
                self.sigma
            )));
        }
        if self.extractions == 0 {
            return Err(Error::Config(
                "the number of extractions must be at least 1".into(),
            ));
        }
        let total = self.noise_time * self.extractions as f64;
        if (total - t_ad).abs() > DIVISIBILITY_TOL * t_ad {
            return Err(Error::Config(format!(
                "T_ad = {t_ad} fs is not n_r·T_n = {} x {} fs",
                self.extractions, self.noise_time
            )));
        }
        Ok(())
    }
}

/// n_r = T_ad / T_n, required to be an integer.
pub fn extractions_for(t_ad: f64, noise_time: f64) -> Result<usize> {
    if !(noise_time > 0.0 && noise_time.is_finite()) {
        return Err(Error::Config(format!(
            "noise time must be positive, got {noise_time}"
        )));
    }
    let ratio = t_ad / noise_time;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > DIVISIBILITY_TOL * ratio.max(1.0) {
        return Err(Error::Config(format!(
            "T_ad = {t_ad} fs is not an integer multiple of T_n = {noise_time} fs (ratio {ratio})"
        )));
    }
    Ok(n as usize)
}

/// Offsets held constant over one interval, ordered (+, -, 0).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntervalNoise {
    /// δΩ_i in fs^-1.
    pub intensity: [f64; 3],
    /// ξ_i in rad.
    pub phase: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrajectory {
    channel: NoiseChannel,
    noise_time: f64,
    intervals: Vec<IntervalNoise>,
}

pub fn sample_trajectory(spec: &NoiseSpec) -> NoiseTrajectory {
    let mut stream = GaussianStream::new(spec.seed);
    let intensity_std = spec.sigma * spec.omega;
    let mut intervals = Vec::with_capacity(spec.extractions);
    for _ in 0..spec.extractions {
        let mut iv = IntervalNoise::default();
        for k in 0..3 {
            iv.intensity[k] = stream.normal(intensity_std);
        }
        for k in 0..3 {
            iv.phase[k] = stream.normal(spec.sigma);
        }
        for k in 0..3 {
            if !spec.driven[k] || !spec.channel.has_intensity() {
                iv.intensity[k] = 0.0;
            }
            if !spec.driven[k] || !spec.channel.has_phase() {
                iv.phase[k] = 0.0;
            }
        }
        intervals.push(iv);
    }
    NoiseTrajectory {
        channel: spec.channel,
        noise_time: spec.noise_time,
        intervals,
    }
}

impl NoiseTrajectory {
    pub fn channel(&self) -> NoiseChannel {
        self.channel
    }

    pub fn noise_time(&self) -> f64 {
        self.noise_time
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[IntervalNoise] {
        &self.intervals
    }

    pub fn end_time(&self) -> f64 {
        self.noise_time * self.intervals.len() as f64
    }

    /// Interval holding time t, i.e. floor(t / T_n).
    pub fn interval_index(&self, t: f64) -> Result<usize> {
        let end = self.end_time();
        if !(0.0..end).contains(&t) {
            return Err(Error::TimeOutOfRange { t, t_ad: end });
        }
        Ok(((t / self.noise_time).floor() as usize).min(self.intervals.len() - 1))
    }

    /// Noisy field at time t.
    pub fn perturb(&self, clean: &ControlField, t: f64) -> Result<ControlField> {
        Ok(self.perturb_interval(clean, self.interval_index(t)?))
    }

    /// Phase factors first, then additive intensity offsets.
    pub fn perturb_interval(&self, clean: &ControlField, index: usize) -> ControlField {
        if self.channel == NoiseChannel::None {
            return *clean;
        }
        let iv = &self.intervals[index];
        let mut out = clean.components();
        for (k, z) in out.iter_mut().enumerate() {
            if self.channel.has_phase() {
                *z *= C64::from_polar(1.0, iv.phase[k]);
            }
            if self.channel.has_intensity() {
                *z += iv.intensity[k];
            }
        }
        ControlField::from_components(out)
    }

    /// Audit dump, one row per interval.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "interval,dOmegaPlus,dOmegaMinus,dOmegaZero,xiPlus,xiMinus,xiZero"
        )?;
        for (k, iv) in self.intervals.iter().enumerate() {
            writeln!(
                w,
                "{k},{:e},{:e},{:e},{:e},{:e},{:e}",
                iv.intensity[0],
                iv.intensity[1],
                iv.intensity[2],
                iv.phase[0],
                iv.phase[1],
                iv.phase[2]
            )?;
        }
        Ok(())
    }
}
