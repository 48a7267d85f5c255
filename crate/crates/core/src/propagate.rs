//! Time evolution under a (possibly noisy) loop schedule.
//!
//! Each step freezes the Hamiltonian at the step midpoint and applies its
//! exact exponential (second-order Magnus). Steps are laid out per noise
//! interval so no step straddles a jump of the noisy field.

use std::io::Write;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{unitarity_defect, Mat2, Mat4, Vec4, C64};
use crate::model::{LoopSchedule, E_ZERO, G};
use crate::noise::{sample_trajectory, NoiseSpec, NoiseTrajectory};

/// Hard limit on Ω·h.
pub const MAX_OMEGA_STEP: f64 = 0.1;
/// Ω·h used when the caller does not choose the step count.
pub const DEFAULT_OMEGA_STEP: f64 = 0.02;

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec4,
}

impl QuantumState {
    pub fn new(amplitudes: Vec4) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm.is_nan() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm is {norm}, expected 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn from_slice(amps: [C64; 4]) -> Result<Self> {
        Self::new(Vec4::from(amps))
    }

    pub fn basis(index: usize) -> Self {
        let mut amplitudes = Vec4::zeros();
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &Vec4 {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn population(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// <self|other>
    pub fn inner(&self, other: &QuantumState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub matrix: Mat4,
    pub t_start: f64,
    pub t_end: f64,
}

impl Propagator {
    pub fn identity(t: f64) -> Self {
        Self {
            matrix: Mat4::identity(),
            t_start: t,
            t_end: t,
        }
    }

    /// `later ∘ self`; the spans must be contiguous.
    pub fn then(&self, later: &Propagator) -> Result<Propagator> {
        let gap = (later.t_start - self.t_end).abs();
        if gap > 1e-9 * self.t_end.abs().max(1.0) {
            return Err(Error::Parameter(format!(
                "cannot compose propagators ending at {} and starting at {}",
                self.t_end, later.t_start
            )));
        }
        Ok(Propagator {
            matrix: later.matrix * self.matrix,
            t_start: self.t_start,
            t_end: later.t_end,
        })
    }

    pub fn apply(&self, psi: &QuantumState) -> QuantumState {
        QuantumState {
            amplitudes: self.matrix * psi.amplitudes,
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }

    /// Restriction to the span of basis states (a, b).
    pub fn block(&self, (a, b): (usize, usize)) -> Mat2 {
        let m = &self.matrix;
        Mat2::new(m[(a, a)], m[(a, b)], m[(b, a)], m[(b, b)])
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: QuantumState,
    pub propagator: Propagator,
}

/// Steps per interval that keep Ω·h at or below `DEFAULT_OMEGA_STEP`.
pub fn default_steps_per_interval(schedule: &LoopSchedule, intervals: usize) -> usize {
    let tn = schedule.adiabatic_time() / intervals.max(1) as f64;
    ((schedule.omega() * tn / DEFAULT_OMEGA_STEP).ceil() as usize).max(1)
}

struct Grid<'a> {
    trajectory: Option<&'a NoiseTrajectory>,
    interval_time: f64,
    intervals: usize,
}

impl<'a> Grid<'a> {
    fn new(schedule: &LoopSchedule, trajectory: Option<&'a NoiseTrajectory>) -> Result<Self> {
        let t_ad = schedule.adiabatic_time();
        match trajectory {
            Some(traj) => {
                if traj.is_empty() || (traj.end_time() - t_ad).abs() > 1e-9 * t_ad {
                    return Err(Error::Config(format!(
                        "noise trajectory covers {} fs but the schedule lasts {t_ad} fs",
                        traj.end_time()
                    )));
                }
                Ok(Self {
                    trajectory,
                    interval_time: traj.noise_time(),
                    intervals: traj.len(),
                })
            }
            None => Ok(Self {
                trajectory: None,
                interval_time: t_ad,
                intervals: 1,
            }),
        }
    }
}

/// Propagator over the whole schedule.
pub fn propagator(
    schedule: &LoopSchedule,
    trajectory: Option<&NoiseTrajectory>,
    steps_per_interval: usize,
) -> Result<Propagator> {
    let grid = Grid::new(schedule, trajectory)?;
    propagator_over(schedule, trajectory, steps_per_interval, 0..grid.intervals)
}

/// Propagator over a contiguous range of hold intervals (a single interval
/// spanning the loop when there is no trajectory).
pub fn propagator_over(
    schedule: &LoopSchedule,
    trajectory: Option<&NoiseTrajectory>,
    steps_per_interval: usize,
    intervals: Range<usize>,
) -> Result<Propagator> {
    let grid = Grid::new(schedule, trajectory)?;
    if intervals.start > intervals.end || intervals.end > grid.intervals {
        return Err(Error::Parameter(format!(
            "interval range {intervals:?} outside 0..{}",
            grid.intervals
        )));
    }
    if steps_per_interval == 0 {
        return Err(Error::Parameter(
            "steps per interval must be at least 1".into(),
        ));
    }
    let h = grid.interval_time / steps_per_interval as f64;
    let omega_h = schedule.omega() * h;
    if omega_h > MAX_OMEGA_STEP {
        return Err(Error::StepSize {
            omega_h,
            limit: MAX_OMEGA_STEP,
        });
    }

    let mut u = Mat4::identity();
    for k in intervals.clone() {
        let t0 = k as f64 * grid.interval_time;
        for j in 0..steps_per_interval {
            let t_mid = t0 + (j as f64 + 0.5) * h;
            let clean = schedule.control_field(t_mid)?;
            let field = match grid.trajectory {
                Some(traj) => traj.perturb_interval(&clean, k),
                None => clean,
            };
            u = field.step_propagator(h) * u;
        }
    }
    Ok(Propagator {
        matrix: u,
        t_start: intervals.start as f64 * grid.interval_time,
        t_end: intervals.end as f64 * grid.interval_time,
    })
}

/// Final state and propagator; `noise = None` evolves the clean schedule
/// as a single interval of `steps_per_interval` steps.
pub fn evolve(
    schedule: &LoopSchedule,
    noise: Option<&NoiseSpec>,
    psi0: &QuantumState,
    steps_per_interval: usize,
) -> Result<Evolution> {
    let trajectory = noise
        .map(|spec| {
            spec.validate(schedule.adiabatic_time())?;
            Ok::<_, Error>(sample_trajectory(spec))
        })
        .transpose()?;
    evolve_trajectory(schedule, trajectory.as_ref(), psi0, steps_per_interval)
}

pub fn evolve_trajectory(
    schedule: &LoopSchedule,
    trajectory: Option<&NoiseTrajectory>,
    psi0: &QuantumState,
    steps_per_interval: usize,
) -> Result<Evolution> {
    QuantumState::new(*psi0.amplitudes())?;
    let propagator = propagator(schedule, trajectory, steps_per_interval)?;
    Ok(Evolution {
        state: propagator.apply(psi0),
        propagator,
    })
}

/// (|<G|ψ>|², |<E0|ψ>|²)
pub fn leakage_populations(psi: &QuantumState) -> (f64, f64) {
    (psi.population(G), psi.population(E_ZERO))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub populations: [f64; 4],
    pub field_norm: f64,
}

/// Populations and |Ω⃗| sampled every `every` steps (plus the final time).
pub fn trace(
    schedule: &LoopSchedule,
    trajectory: Option<&NoiseTrajectory>,
    psi0: &QuantumState,
    steps_per_interval: usize,
    every: usize,
) -> Result<Vec<TraceRow>> {
    let grid = Grid::new(schedule, trajectory)?;
    let every = every.max(1);
    let h = grid.interval_time / steps_per_interval.max(1) as f64;
    if schedule.omega() * h > MAX_OMEGA_STEP {
        return Err(Error::StepSize {
            omega_h: schedule.omega() * h,
            limit: MAX_OMEGA_STEP,
        });
    }
    let field_at = |t: f64, k: usize| -> Result<f64> {
        let clean = schedule.control_field(t)?;
        Ok(match grid.trajectory {
            Some(traj) => traj.perturb_interval(&clean, k),
            None => clean,
        }
        .norm())
    };
    let pops = |v: &Vec4| [0, 1, 2, 3].map(|i| v[i].norm_sqr());

    let mut psi = *psi0.amplitudes();
    let mut rows = vec![TraceRow {
        t: 0.0,
        populations: pops(&psi),
        field_norm: field_at(0.0, 0)?,
    }];
    let mut step = 0usize;
    for k in 0..grid.intervals {
        let t0 = k as f64 * grid.interval_time;
        for j in 0..steps_per_interval {
            let t_mid = t0 + (j as f64 + 0.5) * h;
            let clean = schedule.control_field(t_mid)?;
            let field = match grid.trajectory {
                Some(traj) => traj.perturb_interval(&clean, k),
                None => clean,
            };
            psi = field.step_propagator(h) * psi;
            step += 1;
            if step.is_multiple_of(every) {
                let t = t0 + (j + 1) as f64 * h;
                rows.push(TraceRow {
                    t,
                    populations: pops(&psi),
                    field_norm: field.norm(),
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut w: W) -> Result<()> {
    writeln!(w, "t_fs,p0,p1,p2,p3,field_norm")?;
    for r in rows {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e},{:e}",
            r.t,
            r.populations[0],
            r.populations[1],
            r.populations[2],
            r.populations[3],
            r.field_norm
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs};
    use crate::model::{ControlField, Gate, Leg, E_MINUS, E_PLUS};
    use crate::noise::NoiseChannel;
    use std::f64::consts::{FRAC_PI_2, PI};

    const OMEGA: f64 = 0.02;

    fn constant(gate: Gate, theta: f64, phi: f64, duration: f64) -> LoopSchedule {
        let legs = vec![Leg {
            theta: (theta, theta),
            phi: (phi, phi),
            duration,
        }];
        LoopSchedule::from_legs(gate, OMEGA, legs, 0.0).unwrap()
    }

    #[test]
    fn ancilla_rabi_transfer() {
        // field (0, 0, Ω) is θ = 0 on the mixing chart
        let t = PI / (2.0 * OMEGA);
        let s = constant(Gate::Mixing, 0.0, 0.0, t);
        assert_eq!(
            s.control_field(0.0).unwrap(),
            ControlField::real(0.0, 0.0, OMEGA)
        );
        let ev = evolve(&s, None, &QuantumState::basis(G), 1000).unwrap();
        assert!((ev.state.population(E_ZERO) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn pi_pulse_inverts_and_half_pulse_splits() {
        let s = LoopSchedule::dynamical_pi_pulse(OMEGA).unwrap();
        let ev = evolve(&s, None, &QuantumState::basis(G), 200).unwrap();
        assert!((ev.state.population(E_PLUS) - 1.0).abs() < 1e-10);

        let half = LoopSchedule::dynamical_pulse(OMEGA, PI / (4.0 * OMEGA)).unwrap();
        let ev = evolve(&half, None, &QuantumState::basis(G), 200).unwrap();
        assert!((ev.state.population(G) - 0.5).abs() < 1e-10);
        assert!((ev.state.population(E_PLUS) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn non_normalized_input_is_rejected() {
        let bad = Vec4::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(
            QuantumState::new(bad),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn coarse_steps_are_refused() {
        let s = LoopSchedule::mixing(OMEGA, 7500.0, FRAC_PI_2).unwrap();
        // Ω·h = 0.02 * 7500 / 100 = 1.5
        let err = evolve(&s, None, &QuantumState::basis(E_PLUS), 100).unwrap_err();
        assert!(matches!(err, Error::StepSize { .. }));
    }

    #[test]
    fn composition_over_interval_boundary() {
        let s = LoopSchedule::mixing(OMEGA, 7500.0, FRAC_PI_2).unwrap();
        let spec = NoiseSpec::new(&s, NoiseChannel::Both, 0.1, 10, 4).unwrap();
        let traj = sample_trajectory(&spec);
        let full = propagator(&s, Some(&traj), 200).unwrap();
        let first = propagator_over(&s, Some(&traj), 200, 0..5).unwrap();
        let second = propagator_over(&s, Some(&traj), 200, 5..10).unwrap();
        let composed = first.then(&second).unwrap();
        assert!(max_abs(&(composed.matrix - full.matrix)) < 1e-10);
        assert_eq!(composed.t_end, 7500.0);
        assert!(second.then(&first).is_err());
    }

    #[test]
    fn leakage_of_simple_states() {
        assert_eq!(
            leakage_populations(&QuantumState::basis(E_PLUS)),
            (0.0, 0.0)
        );
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let psi =
            QuantumState::from_slice([c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)]).unwrap();
        let (pg, pe0) = leakage_populations(&psi);
        assert!((pg - 0.5).abs() < 1e-15 && (pe0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn trace_ends_at_final_state() {
        let s = LoopSchedule::mixing(OMEGA, 7500.0, FRAC_PI_2).unwrap();
        let psi0 = QuantumState::basis(E_MINUS);
        let rows = trace(&s, None, &psi0, 7500, 100).unwrap();
        let ev = evolve(&s, None, &psi0, 7500).unwrap();
        let last = rows.last().unwrap();
        assert_eq!(last.t, 7500.0);
        for i in 0..4 {
            assert!((last.populations[i] - ev.state.population(i)).abs() < 1e-12);
        }
        let mut buf = Vec::new();
        write_trace_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().lines().count(),
            rows.len() + 1
        );
    }
}
