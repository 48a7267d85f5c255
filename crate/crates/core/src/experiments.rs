//! Sweep engine behind the CLI.
//!
//! A sweep evaluates the gate fidelity at every n_r of a config and writes a
//! CSV table plus a JSON manifest next to it. Output columns:
//!
//! ```text
//! n_r,mean_fidelity,std_fidelity,leakage_G,leakage_E0,f_state_00,...
//! ```
//!
//! The manifest records the schema version, the effective config, its
//! SHA-256 hash, the software version and the wall time.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fidelity::{
    gate_fidelity, FidelityProtocol, FidelityRecord, BLOCH_STATE_COUNT, DEFAULT_REALIZATIONS,
};
use crate::holonomy::{ideal_gate, wilczek_zee_holonomy};
use crate::linalg::{max_abs, Mat2};
use crate::model::{pi_pulse_duration, Gate, LoopSchedule};
use crate::noise::{extractions_for, sample_trajectory, NoiseChannel, NoiseSpec, NoiseTrajectory};
use crate::propagate::{default_steps_per_interval, leakage_populations, propagator, QuantumState};

pub const SCHEMA_VERSION: &str = "holonoise-sweep/1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Slow and intermediate regimes.
pub const SLOW_GRID: [usize; 12] = [1, 2, 3, 5, 7, 10, 15, 20, 30, 50, 70, 100];
/// Intermediate and fast regimes.
pub const FAST_GRID: [usize; 7] = [50, 100, 200, 500, 1000, 2000, 5000];

/// Holonomic extractions per dynamical extraction at a shared hold time.
pub const DYNAMICAL_RATIO: usize = 100;

/// Ω_i = δ / 15 when the single-photon Rabi energy is not given.
const TWO_QUBIT_DETUNING_RATIO: f64 = 15.0;
const WZ_POINTS: usize = 10_000;

fn default_channel() -> NoiseChannel {
    NoiseChannel::Intensity
}
fn default_omega() -> f64 {
    0.02
}
fn default_t_ad() -> f64 {
    7500.0
}
fn default_realizations() -> usize {
    DEFAULT_REALIZATIONS
}
fn default_states() -> usize {
    BLOCH_STATE_COUNT
}
fn default_target() -> f64 {
    FRAC_PI_2
}

/// Flat key-value run config, read from TOML.
///
/// Exactly one of `n_r` (extraction counts) or `t_n_fs` (hold times, each
/// of which must divide `t_ad_fs`) gives the sweep grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub gate: Gate,
    #[serde(default = "default_channel")]
    pub channel: NoiseChannel,
    pub sigma: f64,
    /// Loop radius Ω in fs^-1 (unused by the two-qubit gate).
    #[serde(default = "default_omega")]
    pub omega_inv_fs: f64,
    /// Loop duration; ignored by the dynamical gate, whose duration is fixed by Ω.
    #[serde(default = "default_t_ad")]
    pub t_ad_fs: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_r: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_n_fs: Option<Vec<f64>>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
    /// Solid angle (mixing) or geometric phase (phase gates).
    #[serde(default = "default_target")]
    pub target_angle: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_mev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_single_mev: Option<f64>,
    #[serde(default = "default_states")]
    pub states: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_interval: Option<usize>,
    /// Output directory; not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn new(gate: Gate, channel: NoiseChannel, sigma: f64, n_r: Vec<usize>) -> Self {
        Self {
            gate,
            channel,
            sigma,
            omega_inv_fs: default_omega(),
            t_ad_fs: default_t_ad(),
            n_r,
            t_n_fs: None,
            realizations: default_realizations(),
            seed: 0,
            target_angle: default_target(),
            delta_mev: None,
            omega_single_mev: None,
            states: default_states(),
            steps_per_interval: None,
            output: None,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Gate schedule described by the config.
    pub fn schedule(&self) -> Result<LoopSchedule> {
        match self.gate {
            Gate::Mixing => {
                LoopSchedule::mixing(self.omega_inv_fs, self.t_ad_fs, self.target_angle)
            }
            Gate::PhaseShift => {
                LoopSchedule::phase_shift(self.omega_inv_fs, self.t_ad_fs, self.target_angle)
            }
            Gate::TwoQubitPhase => {
                let delta = self
                    .delta_mev
                    .ok_or_else(|| Error::Config("the two-qubit gate needs delta_mev".into()))?;
                let omega_single = self
                    .omega_single_mev
                    .unwrap_or(delta / TWO_QUBIT_DETUNING_RATIO);
                LoopSchedule::two_qubit_phase(delta, omega_single, self.t_ad_fs, self.target_angle)
            }
            Gate::DynamicalPi => LoopSchedule::dynamical_pi_pulse(self.omega_inv_fs),
        }
    }

    /// Resolved, validated n_r grid.
    pub fn extractions(&self) -> Result<Vec<usize>> {
        let grid = match (&self.t_n_fs, self.n_r.is_empty()) {
            (Some(_), false) => {
                return Err(Error::Config("give either n_r or t_n_fs, not both".into()))
            }
            (None, true) => return Err(Error::Config("the n_r list is empty".into())),
            (Some(tns), true) => {
                let t_ad = self.schedule()?.adiabatic_time();
                tns.iter()
                    .map(|&tn| extractions_for(t_ad, tn))
                    .collect::<Result<Vec<_>>>()?
            }
            (None, false) => self.n_r.clone(),
        };
        if grid.is_empty() {
            return Err(Error::Config("the n_r list is empty".into()));
        }
        if grid.contains(&0) {
            return Err(Error::Config("n_r values must be at least 1".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "n_r values must be strictly increasing, got {grid:?}"
            )));
        }
        Ok(grid)
    }

    pub fn protocol(&self) -> FidelityProtocol {
        FidelityProtocol {
            channel: self.channel,
            sigma: self.sigma,
            realizations: self.realizations,
            base_seed: self.seed,
            states: self.states,
            steps_per_interval: self.steps_per_interval,
        }
    }

    /// Check everything a sweep needs before any evolution runs.
    pub fn validate(&self) -> Result<(LoopSchedule, Vec<usize>)> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!(
                "sigma must be finite and non-negative, got {}",
                self.sigma
            )));
        }
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        if self.states == 0 || self.states > BLOCH_STATE_COUNT {
            return Err(Error::Config(format!(
                "states must be in 1..={BLOCH_STATE_COUNT}"
            )));
        }
        let schedule = self.schedule().map_err(|e| Error::Config(e.to_string()))?;
        let grid = self.extractions()?;
        for &n in &grid {
            NoiseSpec::new(&schedule, self.channel, self.sigma, n, self.seed)?;
        }
        Ok((schedule, grid))
    }

    /// SHA-256 of the canonical JSON of the config without `output`.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub config_hash: String,
    pub version: String,
    pub wall_time_s: f64,
    /// Loop radius actually driven, fs^-1 (Ω_eff for the two-qubit gate).
    pub omega_inv_fs: f64,
    pub omega_t_ad: f64,
    pub records: Vec<FidelityRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub version: String,
    pub config_hash: String,
    pub config: SweepConfig,
    pub wall_time_s: f64,
    pub omega_inv_fs: f64,
    pub omega_t_ad: f64,
    pub rows: usize,
    pub columns: Vec<String>,
    pub notes: Vec<String>,
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    let (schedule, grid) = config.validate()?;
    let protocol = config.protocol();
    let start = Instant::now();
    let mut records = Vec::with_capacity(grid.len());
    for (i, &n) in grid.iter().enumerate() {
        let rec = gate_fidelity(&schedule, &protocol, n)?;
        log::info!(
            "[{}/{}] n_r = {n}: F = {:.4} ± {:.4}",
            i + 1,
            grid.len(),
            rec.mean_fidelity,
            rec.std_error
        );
        records.push(rec);
    }
    Ok(SweepResult {
        config: config.clone(),
        config_hash: config.hash(),
        version: VERSION.to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        omega_inv_fs: schedule.omega(),
        omega_t_ad: schedule.omega() * schedule.adiabatic_time(),
        records,
    })
}

impl SweepResult {
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = [
            "n_r",
            "mean_fidelity",
            "std_fidelity",
            "leakage_G",
            "leakage_E0",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        cols.extend((0..self.config.states).map(|i| format!("f_state_{i:02}")));
        cols
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.columns().join(","))?;
        for r in &self.records {
            write!(
                w,
                "{},{},{},{},{}",
                r.extractions, r.mean_fidelity, r.std_fidelity, r.leakage_g, r.leakage_e0
            )?;
            for f in &r.per_state {
                write!(w, ",{f}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn manifest(&self) -> Manifest {
        let mut notes = Vec::new();
        if self.config.gate == Gate::TwoQubitPhase {
            notes.push("noise acts on the effective two-photon coupling".to_string());
        }
        Manifest {
            schema: SCHEMA_VERSION.to_string(),
            version: self.version.clone(),
            config_hash: self.config_hash.clone(),
            config: self.config.clone(),
            wall_time_s: self.wall_time_s,
            omega_inv_fs: self.omega_inv_fs,
            omega_t_ad: self.omega_t_ad,
            rows: self.records.len(),
            columns: self.columns(),
            notes,
        }
    }

    /// Write `<stem>.csv` and `<stem>.manifest.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{stem}.csv"));
        let manifest = dir.join(format!("{stem}.manifest.json"));
        self.write_csv(std::io::BufWriter::new(fs::File::create(&csv)?))?;
        fs::write(&manifest, serde_json::to_string_pretty(&self.manifest())?)?;
        Ok((csv, manifest))
    }
}

/// One sample of the control vector, normalized by the loop radius.
///
/// Coordinates are `(Ω+, Ω-, Ω0)` real parts for the mixing and dynamical
/// gates and `(Re Ω+, Im Ω+, Re Ω0)` for the phase gates, so the clean loop
/// lies on the unit sphere in both cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopPoint {
    pub t: f64,
    pub clean: [f64; 3],
    pub noisy: [f64; 3],
}

impl LoopPoint {
    pub fn deviation(&self) -> f64 {
        (0..3)
            .map(|k| (self.noisy[k] - self.clean[k]).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

fn sphere_coords(gate: Gate, omega: f64, field: &crate::model::ControlField) -> [f64; 3] {
    let [p, m, z] = field.components();
    let v = match gate {
        Gate::PhaseShift | Gate::TwoQubitPhase => [p.re, p.im, z.re],
        Gate::Mixing | Gate::DynamicalPi => [p.re, m.re, z.re],
    };
    v.map(|x| x / omega)
}

/// Clean and noisy control vectors at `samples_per_interval` midpoints of
/// every hold interval of the trajectory.
pub fn dump_loop_trajectory(
    schedule: &LoopSchedule,
    trajectory: &NoiseTrajectory,
    samples_per_interval: usize,
) -> Result<Vec<LoopPoint>> {
    let s = samples_per_interval.max(1);
    let (gate, omega) = (schedule.gate(), schedule.omega());
    let tn = trajectory.noise_time();
    let mut out = Vec::with_capacity(trajectory.len() * s);
    for k in 0..trajectory.len() {
        for j in 0..s {
            let t = (k as f64 + (j as f64 + 0.5) / s as f64) * tn;
            let clean = schedule.control_field(t)?;
            let noisy = trajectory.perturb_interval(&clean, k);
            out.push(LoopPoint {
                t,
                clean: sphere_coords(gate, omega, &clean),
                noisy: sphere_coords(gate, omega, &noisy),
            });
        }
    }
    Ok(out)
}

pub fn write_loop_csv<W: Write>(points: &[LoopPoint], mut w: W) -> Result<()> {
    writeln!(w, "t_fs,clean_x,clean_y,clean_z,noisy_x,noisy_y,noisy_z")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.t, p.clean[0], p.clean[1], p.clean[2], p.noisy[0], p.noisy[1], p.noisy[2]
        )?;
    }
    Ok(())
}

/// Extraction count for the π pulse sharing the hold time of a holonomic
/// run with `n_r_ad` extractions.
pub fn dynamical_extractions(n_r_ad: usize) -> usize {
    n_r_ad.div_ceil(DYNAMICAL_RATIO).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub t_n_fs: f64,
    pub n_r_ad: usize,
    pub n_r_dyn: usize,
    pub t_ad_over_t_n: f64,
    pub t_dyn_over_t_n: f64,
    pub holonomic: FidelityRecord,
    pub dynamical: FidelityRecord,
}

impl ComparisonRow {
    pub fn gap(&self) -> f64 {
        (self.holonomic.mean_fidelity - self.dynamical.mean_fidelity).abs()
    }
}

/// Holonomic sweep of `config` paired with a π pulse of the same Ω, σ and
/// channel at every hold time of the grid.
pub fn compare_dynamical(config: &SweepConfig) -> Result<Vec<ComparisonRow>> {
    if !config.gate.is_holonomic() {
        return Err(Error::Config(
            "compare-dynamical needs a holonomic gate in the config".into(),
        ));
    }
    let (holo, grid) = config.validate()?;
    let pulse = LoopSchedule::dynamical_pi_pulse(holo.omega())?;
    let t_dyn = pi_pulse_duration(holo.omega())?;
    let mut protocol = config.protocol();
    let mut rows = Vec::with_capacity(grid.len());
    for &n in &grid {
        let t_n = holo.adiabatic_time() / n as f64;
        let n_dyn = dynamical_extractions(n);
        protocol.steps_per_interval = config.steps_per_interval;
        let holonomic = gate_fidelity(&holo, &protocol, n)?;
        protocol.steps_per_interval = None;
        let dynamical = gate_fidelity(&pulse, &protocol, n_dyn)?;
        log::info!(
            "n_r = {n} (dyn {n_dyn}): holonomic {:.4}, dynamical {:.4}",
            holonomic.mean_fidelity,
            dynamical.mean_fidelity
        );
        rows.push(ComparisonRow {
            t_n_fs: t_n,
            n_r_ad: n,
            n_r_dyn: n_dyn,
            t_ad_over_t_n: n as f64,
            t_dyn_over_t_n: t_dyn / t_n,
            holonomic,
            dynamical,
        });
    }
    Ok(rows)
}

pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], mut w: W) -> Result<()> {
    writeln!(
        w,
        "t_n_fs,n_r_ad,t_ad_over_t_n,n_r_dyn,t_dyn_over_t_n,holo_mean,holo_std,dyn_mean,dyn_std,abs_gap"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t_n_fs,
            r.n_r_ad,
            r.t_ad_over_t_n,
            r.n_r_dyn,
            r.t_dyn_over_t_n,
            r.holonomic.mean_fidelity,
            r.holonomic.std_fidelity,
            r.dynamical.mean_fidelity,
            r.dynamical.std_fidelity,
            r.gap()
        )?;
    }
    Ok(())
}

/// Analytic, Wilczek–Zee and evolved gates on the logical pair.
#[derive(Debug, Clone)]
pub struct IdealGateReport {
    pub gate: Gate,
    pub geom_phase: f64,
    pub analytic: Mat2,
    pub wilczek_zee: Mat2,
    pub evolved: Mat2,
    pub wz_error: f64,
    /// |<U_ideal e_k | U_evolved e_k>| for the two logical basis states.
    pub overlaps: [f64; 2],
    /// Largest population left outside the logical pair.
    pub leakage: f64,
}

pub fn ideal_gate_report(schedule: &LoopSchedule, steps: Option<usize>) -> Result<IdealGateReport> {
    let ideal = ideal_gate(schedule)?;
    let wz = wilczek_zee_holonomy(schedule, WZ_POINTS)?;
    let steps = steps.unwrap_or_else(|| default_steps_per_interval(schedule, 1));
    let u = propagator(schedule, None, steps)?;
    let pair = schedule.gate().logical_pair();
    let idx = [pair.0, pair.1];
    let mut overlaps = [0.0; 2];
    let mut leakage: f64 = 0.0;
    for (k, &col) in idx.iter().enumerate() {
        let out = u.apply(&QuantumState::basis(col));
        let amp = ideal.logical_unitary[(0, k)].conj() * out.amplitudes()[idx[0]]
            + ideal.logical_unitary[(1, k)].conj() * out.amplitudes()[idx[1]];
        overlaps[k] = amp.norm();
        let (pg, pe0) = leakage_populations(&out);
        leakage = leakage.max(pg + pe0);
    }
    Ok(IdealGateReport {
        gate: schedule.gate(),
        geom_phase: ideal.geom_phase,
        wz_error: max_abs(&(wz - ideal.logical_unitary)),
        analytic: ideal.logical_unitary,
        wilczek_zee: wz,
        evolved: u.block(pair),
        overlaps,
        leakage,
    })
}

impl fmt::Display for IdealGateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |m: &Mat2, i: usize| {
            format!(
                "{:+.6}{:+.6}i  {:+.6}{:+.6}i",
                m[(i, 0)].re,
                m[(i, 0)].im,
                m[(i, 1)].re,
                m[(i, 1)].im
            )
        };
        writeln!(
            f,
            "gate {:?}, geometric phase {:.9}",
            self.gate, self.geom_phase
        )?;
        for (name, m) in [
            ("analytic", &self.analytic),
            ("wilczek-zee", &self.wilczek_zee),
            ("evolved", &self.evolved),
        ] {
            writeln!(f, "{name:>12}  {}", row(m, 0))?;
            writeln!(f, "{:>12}  {}", "", row(m, 1))?;
        }
        writeln!(f, "max |WZ - analytic|     {:.3e}", self.wz_error)?;
        writeln!(f, "overlap basis 0         {:.6}", self.overlaps[0])?;
        writeln!(f, "overlap basis 1         {:.6}", self.overlaps[1])?;
        write!(f, "leakage                 {:.3e}", self.leakage)
    }
}

/// Noise trajectory for the first n_r of the config, seeded by the config.
pub fn config_trajectory(config: &SweepConfig) -> Result<(LoopSchedule, NoiseTrajectory)> {
    let (schedule, grid) = config.validate()?;
    let spec = NoiseSpec::new(
        &schedule,
        config.channel,
        config.sigma,
        grid[0],
        config.seed,
    )?;
    Ok((schedule, sample_trajectory(&spec)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(gate: Gate, sigma: f64, n_r: Vec<usize>) -> SweepConfig {
        let mut c = SweepConfig::new(gate, NoiseChannel::Intensity, sigma, n_r);
        c.states = 2;
        c.realizations = 1;
        c.seed = 7;
        c
    }

    #[test]
    fn toml_round_trip_and_defaults() {
        let c =
            SweepConfig::from_toml_str("gate = \"mixing\"\nsigma = 0.1\nn_r = [1, 10]\n").unwrap();
        assert_eq!(c.channel, NoiseChannel::Intensity);
        assert_eq!(c.omega_inv_fs, 0.02);
        assert_eq!(c.t_ad_fs, 7500.0);
        assert_eq!(c.states, 18);
        assert_eq!(c.realizations, 5);
        let back = SweepConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn unknown_keys_and_bad_grids_rejected() {
        assert!(SweepConfig::from_toml_str(
            "gate = \"mixing\"\nsigma = 0.1\nn_r = [1]\nbogus = 1\n"
        )
        .is_err());
        for grid in [vec![], vec![0, 1], vec![3, 2], vec![2, 2]] {
            let err = tiny(Gate::Mixing, 0.1, grid).validate().unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{err}");
        }
        let mut c = tiny(Gate::Mixing, 0.1, vec![]);
        c.t_n_fs = Some(vec![7.0]);
        assert!(matches!(c.validate().unwrap_err(), Error::Config(_)));
        c.t_n_fs = Some(vec![750.0, 75.0]);
        assert_eq!(c.validate().unwrap().1, vec![10, 100]);
        c.n_r = vec![10];
        assert!(c.validate().is_err());
        let mut tq = tiny(Gate::TwoQubitPhase, 0.1, vec![1]);
        assert!(matches!(tq.validate().unwrap_err(), Error::Config(_)));
        tq.delta_mev = Some(5.0);
        tq.t_ad_fs = 8e5;
        assert!(tq.validate().is_ok());
    }

    #[test]
    fn hash_ignores_output_but_not_seed() {
        let a = tiny(Gate::Mixing, 0.1, vec![1]);
        let mut b = a.clone();
        b.output = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn zero_noise_sweep_is_unity() {
        let r = run_sweep(&tiny(Gate::Mixing, 0.0, vec![1, 10])).unwrap();
        assert_eq!(r.records.len(), 2);
        for rec in &r.records {
            assert!((rec.mean_fidelity - 1.0).abs() <= 1e-12);
        }
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "n_r,mean_fidelity,std_fidelity,leakage_G,leakage_E0,f_state_00,f_state_01\n"
        ));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn two_qubit_manifest_reports_effective_area() {
        let mut c = tiny(Gate::TwoQubitPhase, 0.0, vec![1]);
        c.delta_mev = Some(5.0);
        c.t_ad_fs = 8.0e5;
        let m = run_sweep(&c).unwrap().manifest();
        assert!(
            (m.omega_t_ad - 54.018_398_151).abs() < 1e-6,
            "{}",
            m.omega_t_ad
        );
        assert_eq!(m.notes.len(), 1);
    }

    #[test]
    fn clean_loop_is_on_unit_sphere() {
        for gate in [Gate::Mixing, Gate::PhaseShift] {
            let c = tiny(gate, 0.0, vec![4]);
            let (s, traj) = config_trajectory(&c).unwrap();
            for p in dump_loop_trajectory(&s, &traj, 50).unwrap() {
                let r: f64 = p.clean.iter().map(|x| x * x).sum();
                assert!((r - 1.0).abs() < 1e-12);
                assert_eq!(p.clean, p.noisy);
            }
        }
    }

    #[test]
    fn noisy_loop_has_one_plateau_per_interval() {
        let c = tiny(Gate::Mixing, 0.1, vec![2]);
        let (s, traj) = config_trajectory(&c).unwrap();
        let pts = dump_loop_trajectory(&s, &traj, 20).unwrap();
        let offsets: Vec<[f64; 3]> = pts
            .iter()
            .map(|p| [0, 1, 2].map(|k| p.noisy[k] - p.clean[k]))
            .collect();
        let mut distinct: Vec<[f64; 3]> = Vec::new();
        for o in offsets {
            if !distinct
                .iter()
                .any(|d| (0..3).all(|k| (d[k] - o[k]).abs() < 1e-12))
            {
                distinct.push(o);
            }
        }
        assert_eq!(distinct.len(), 2);
    }

    #[test]
    fn radial_deviation_matches_three_gaussians() {
        let c = tiny(Gate::Mixing, 0.1, vec![70]);
        let (s, traj) = config_trajectory(&c).unwrap();
        let pts = dump_loop_trajectory(&s, &traj, 1).unwrap();
        let rms =
            (pts.iter().map(|p| p.deviation().powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
        assert!((rms - 3f64.sqrt() * 0.1).abs() < 0.05, "{rms}");
    }

    #[test]
    fn dynamical_extraction_scaling() {
        assert_eq!(dynamical_extractions(1), 1);
        assert_eq!(dynamical_extractions(100), 1);
        assert_eq!(dynamical_extractions(101), 2);
        assert_eq!(dynamical_extractions(1000), 10);
        assert_eq!(dynamical_extractions(5000), 50);
    }

    #[test]
    fn comparison_at_zero_noise() {
        let rows = compare_dynamical(&tiny(Gate::Mixing, 0.0, vec![50, 200])).unwrap();
        assert_eq!(rows[0].n_r_dyn, 1);
        assert_eq!(rows[1].n_r_dyn, 2);
        for r in &rows {
            assert!((r.holonomic.mean_fidelity - 1.0).abs() < 1e-12);
            assert!((r.dynamical.mean_fidelity - 1.0).abs() < 1e-12);
            assert!(
                (r.t_dyn_over_t_n - r.n_r_ad as f64 * 78.539_816_339_744_83 / 7500.0).abs() < 1e-9
            );
        }
        assert!(compare_dynamical(&tiny(Gate::DynamicalPi, 0.0, vec![1])).is_err());
    }

    #[test]
    fn report_for_default_mixing_gate() {
        let s = LoopSchedule::mixing(0.02, 7500.0, FRAC_PI_2).unwrap();
        let r = ideal_gate_report(&s, None).unwrap();
        assert!(r.wz_error <= 1e-3);
        assert!(r.overlaps.iter().all(|&o| o >= 0.99), "{:?}", r.overlaps);
        assert!(r.to_string().contains("wilczek-zee"));
    }
}
