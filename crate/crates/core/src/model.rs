//! Driven four-level system: basis, control fields, Hamiltonian and loop
//! schedules in control-parameter space.
//!
//! Units: hbar = 1, times in fs, frequencies in fs^-1. The coupling is
//!
//! ```text
//! H = -(Ω+ |E+> + Ω- |E-> + Ω0 |E0>) <G| + h.c.
//! ```
//!
//! so `H[i][0] = -Ω_i` and `H[0][i] = -conj(Ω_i)` for the excited index `i`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, hermiticity_defect, Mat4, C64, I};

/// hbar in meV·fs.
pub const HBAR_MEV_FS: f64 = 658.211_956_9;

pub fn mev_to_inv_fs(energy_mev: f64) -> f64 {
    energy_mev / HBAR_MEV_FS
}

pub fn inv_fs_to_mev(rate: f64) -> f64 {
    rate * HBAR_MEV_FS
}

/// Basis indices. G is the coupled ground state, E0 the ancilla.
pub const G: usize = 0;
pub const E_PLUS: usize = 1;
pub const E_MINUS: usize = 2;
pub const E_ZERO: usize = 3;

/// Below this value of Ω·T_ad the loop is not considered adiabatic.
pub const ADIABATIC_WARNING: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gate {
    Mixing,
    PhaseShift,
    TwoQubitPhase,
    DynamicalPi,
}

impl Gate {
    pub fn is_holonomic(self) -> bool {
        !matches!(self, Gate::DynamicalPi)
    }

    pub fn basis(self) -> Basis {
        match self {
            Gate::TwoQubitPhase => Basis::TWO_QUBIT,
            _ => Basis::SINGLE_QUBIT,
        }
    }

    /// Basis indices spanning the computational subspace.
    pub fn logical_pair(self) -> (usize, usize) {
        match self {
            Gate::DynamicalPi => (G, E_PLUS),
            _ => (E_PLUS, E_MINUS),
        }
    }

    /// Which of (Ω+, Ω-, Ω0) are driven by a laser; only these receive noise.
    pub fn driven_components(self) -> [bool; 3] {
        match self {
            Gate::Mixing => [true, true, true],
            Gate::PhaseShift | Gate::TwoQubitPhase => [true, false, true],
            Gate::DynamicalPi => [true, false, false],
        }
    }

    /// Prefactor relating the enclosed chart area to the geometric phase.
    pub fn solid_angle_factor(self) -> f64 {
        match self {
            Gate::PhaseShift | Gate::TwoQubitPhase => 0.5,
            _ => 1.0,
        }
    }

    /// Rabi triple at chart angles (θ, φ) for a loop of radius `omega`.
    pub fn field_at(self, omega: f64, theta: f64, phi: f64) -> ControlField {
        match self {
            Gate::Mixing | Gate::DynamicalPi => {
                let (st, ct) = theta.sin_cos();
                let (sp, cp) = phi.sin_cos();
                ControlField::real(omega * st * sp, omega * st * cp, omega * ct)
            }
            Gate::PhaseShift | Gate::TwoQubitPhase => {
                let (sh, ch) = (0.5 * theta).sin_cos();
                ControlField {
                    plus: -omega * sh * C64::from_polar(1.0, phi),
                    minus: c(0.0, 0.0),
                    zero: c(omega * ch, 0.0),
                }
            }
        }
    }
}

/// Ordered labels of the working basis; G (or GG) is always index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    pub labels: [&'static str; 4],
}

impl Basis {
    pub const SINGLE_QUBIT: Basis = Basis {
        labels: ["G", "E+", "E-", "E0"],
    };
    /// Effective two-photon basis: ground, target logical pair state,
    /// spectator logical pair state, two-exciton ancilla.
    pub const TWO_QUBIT: Basis = Basis {
        labels: ["GG", "E+E+", "E-E-", "E0E0"],
    };
}

/// Complex Rabi frequencies (Ω+, Ω-, Ω0) in fs^-1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlField {
    pub plus: C64,
    pub minus: C64,
    pub zero: C64,
}

impl ControlField {
    pub const ZERO: ControlField = ControlField {
        plus: C64::new(0.0, 0.0),
        minus: C64::new(0.0, 0.0),
        zero: C64::new(0.0, 0.0),
    };

    pub fn new(plus: C64, minus: C64, zero: C64) -> Self {
        Self { plus, minus, zero }
    }

    pub fn real(plus: f64, minus: f64, zero: f64) -> Self {
        Self::new(c(plus, 0.0), c(minus, 0.0), c(zero, 0.0))
    }

    pub fn components(&self) -> [C64; 3] {
        [self.plus, self.minus, self.zero]
    }

    pub fn from_components(v: [C64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    /// |Ω⃗|
    pub fn norm(&self) -> f64 {
        self.components()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.components()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Hamiltonian matrix for this field.
    pub fn hamiltonian(&self) -> Mat4 {
        let mut h = Mat4::zeros();
        for (k, omega) in self.components().into_iter().enumerate() {
            h[(k + 1, 0)] = -omega;
            h[(0, k + 1)] = -omega.conj();
        }
        h
    }

    /// Exact `exp(-i H h)` for this (star-coupled) Hamiltonian.
    ///
    /// With `b = Σ Ω_i |E_i>`, `r = |b|` and `X = |b̂><G| + |G><b̂|`,
    /// `H = -r X` and `X^3 = X`, hence
    /// `exp(-i H h) = 1 + (cos rh - 1) X^2 + i sin(rh) X`.
    pub fn step_propagator(&self, h: f64) -> Mat4 {
        let r = self.norm();
        let mut u = Mat4::identity();
        if r == 0.0 {
            return u;
        }
        let b = self.components().map(|z| z / r);
        let (s, co) = (r * h).sin_cos();
        let is = I * s;
        u[(0, 0)] = c(co, 0.0);
        for j in 0..3 {
            u[(0, j + 1)] = is * b[j].conj();
            u[(j + 1, 0)] = is * b[j];
            for k in 0..3 {
                u[(j + 1, k + 1)] += (co - 1.0) * b[j] * b[k].conj();
            }
        }
        u
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianSample {
    pub matrix: Mat4,
    pub time: f64,
}

impl HamiltonianSample {
    pub fn new(field: &ControlField, time: f64) -> Result<Self> {
        if !field.is_finite() {
            return Err(Error::Parameter(format!(
                "non-finite control field {field:?}"
            )));
        }
        let matrix = field.hamiltonian();
        debug_assert!(hermiticity_defect(&matrix) == 0.0);
        Ok(Self { matrix, time })
    }
}

pub fn assemble_hamiltonian(field: &ControlField) -> Result<Mat4> {
    HamiltonianSample::new(field, 0.0).map(|s| s.matrix)
}

/// One constant-rate segment of a loop in the (θ, φ) chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub theta: (f64, f64),
    pub phi: (f64, f64),
    pub duration: f64,
}

impl Leg {
    fn at(&self, s: f64) -> (f64, f64) {
        if s >= 1.0 {
            return (self.theta.1, self.phi.1);
        }
        (
            self.theta.0 + (self.theta.1 - self.theta.0) * s,
            self.phi.0 + (self.phi.1 - self.phi.0) * s,
        )
    }
}

/// Deterministic path t -> (θ(t), φ(t)) for one gate.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSchedule {
    gate: Gate,
    omega: f64,
    adiabatic_time: f64,
    legs: Vec<Leg>,
    target_solid_angle: f64,
}

impl LoopSchedule {
    /// Arbitrary piecewise-linear path. Durations must be positive.
    pub fn from_legs(
        gate: Gate,
        omega: f64,
        legs: Vec<Leg>,
        target_solid_angle: f64,
    ) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Parameter(format!(
                "omega must be positive, got {omega}"
            )));
        }
        if legs.is_empty() {
            return Err(Error::Parameter("a schedule needs at least one leg".into()));
        }
        if legs
            .iter()
            .any(|l| !(l.duration > 0.0 && l.duration.is_finite()))
        {
            return Err(Error::Parameter("leg durations must be positive".into()));
        }
        let adiabatic_time = legs.iter().map(|l| l.duration).sum();
        Ok(Self {
            gate,
            omega,
            adiabatic_time,
            legs,
            target_solid_angle,
        })
    }

    /// Three-leg loop from the pole: θ 0→π/2 at φ=0, φ 0→φmax on the
    /// equator, θ π/2→0 at φ=φmax. Encloses a chart area of φmax.
    fn three_leg(gate: Gate, omega: f64, t_ad: f64, phi_max: f64, target: f64) -> Result<Self> {
        if !(t_ad > 0.0 && t_ad.is_finite()) {
            return Err(Error::Parameter(format!(
                "adiabatic time must be positive, got {t_ad}"
            )));
        }
        if !(0.0..=2.0 * PI).contains(&phi_max) {
            return Err(Error::Parameter(format!(
                "solid angle {target} is not reachable by the three-leg loop family"
            )));
        }
        if omega * t_ad < ADIABATIC_WARNING {
            log::warn!(
                "omega*T_ad = {:.1} is below {ADIABATIC_WARNING}; expect non-adiabatic leakage",
                omega * t_ad
            );
        }
        let d = t_ad / 3.0;
        let legs = vec![
            Leg {
                theta: (0.0, FRAC_PI_2),
                phi: (0.0, 0.0),
                duration: d,
            },
            Leg {
                theta: (FRAC_PI_2, FRAC_PI_2),
                phi: (0.0, phi_max),
                duration: d,
            },
            Leg {
                theta: (FRAC_PI_2, 0.0),
                phi: (phi_max, phi_max),
                duration: t_ad - 2.0 * d,
            },
        ];
        Self::from_legs(gate, omega, legs, target)
    }

    /// Mixing gate loop enclosing `target_angle` steradians; ideal gate
    /// `exp(i target σ_y)`.
    pub fn mixing(omega: f64, t_ad: f64, target_angle: f64) -> Result<Self> {
        Self::three_leg(Gate::Mixing, omega, t_ad, target_angle, target_angle)
    }

    /// Single-qubit phase gate with geometric phase `target_phase` on |E+>.
    /// The phase is half the enclosed area, so the equator leg spans
    /// 2·target_phase.
    pub fn phase_shift(omega: f64, t_ad: f64, target_phase: f64) -> Result<Self> {
        Self::three_leg(
            Gate::PhaseShift,
            omega,
            t_ad,
            2.0 * target_phase,
            target_phase,
        )
    }

    /// Two-qubit phase gate driven through the two-photon effective coupling
    /// Ω_eff = 2Ω²/δ, both given in energy units (meV) and converted with hbar.
    pub fn two_qubit_phase(
        delta_mev: f64,
        omega_single_mev: f64,
        t_ad: f64,
        target_phase: f64,
    ) -> Result<Self> {
        let omega_eff = effective_two_photon_rate(delta_mev, omega_single_mev)?;
        Self::three_leg(
            Gate::TwoQubitPhase,
            omega_eff,
            t_ad,
            2.0 * target_phase,
            target_phase,
        )
    }

    /// Resonant square pulse on |G> <-> |E+> of the given duration.
    pub fn dynamical_pulse(omega: f64, duration: f64) -> Result<Self> {
        let legs = vec![Leg {
            theta: (FRAC_PI_2, FRAC_PI_2),
            phi: (FRAC_PI_2, FRAC_PI_2),
            duration,
        }];
        Self::from_legs(Gate::DynamicalPi, omega, legs, 0.0)
    }

    /// Population-inverting π pulse, T_dyn = π / (2Ω).
    pub fn dynamical_pi_pulse(omega: f64) -> Result<Self> {
        Self::dynamical_pulse(omega, pi_pulse_duration(omega)?)
    }

    /// Traverse `self` and then `other` (same gate and radius).
    pub fn concatenate(&self, other: &LoopSchedule) -> Result<Self> {
        if self.gate != other.gate || self.omega != other.omega {
            return Err(Error::Parameter(
                "only loops of the same gate and radius concatenate".into(),
            ));
        }
        let mut legs = self.legs.clone();
        legs.extend_from_slice(&other.legs);
        Self::from_legs(
            self.gate,
            self.omega,
            legs,
            self.target_solid_angle + other.target_solid_angle,
        )
    }

    pub fn gate(&self) -> Gate {
        self.gate
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn adiabatic_time(&self) -> f64 {
        self.adiabatic_time
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn target_solid_angle(&self) -> f64 {
        self.target_solid_angle
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.adiabatic_time).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                t_ad: self.adiabatic_time,
            });
        }
        Ok(())
    }

    /// Chart angles (θ, φ) at time t.
    pub fn angles(&self, t: f64) -> Result<(f64, f64)> {
        self.check_time(t)?;
        if t >= self.adiabatic_time {
            let last = self.legs.last().expect("non-empty legs");
            return Ok((last.theta.1, last.phi.1));
        }
        let mut start = 0.0;
        for leg in &self.legs {
            let end = start + leg.duration;
            if t < end {
                return Ok(leg.at(((t - start) / leg.duration).clamp(0.0, 1.0)));
            }
            start = end;
        }
        let last = self.legs.last().expect("non-empty legs");
        Ok((last.theta.1, last.phi.1))
    }

    pub fn theta_of(&self, t: f64) -> Result<f64> {
        self.angles(t).map(|a| a.0)
    }

    pub fn phi_of(&self, t: f64) -> Result<f64> {
        self.angles(t).map(|a| a.1)
    }

    /// Noiseless Rabi triple at time t.
    pub fn control_field(&self, t: f64) -> Result<ControlField> {
        let (theta, phi) = self.angles(t)?;
        Ok(self.gate.field_at(self.omega, theta, phi))
    }

    pub fn hamiltonian(&self, t: f64) -> Result<HamiltonianSample> {
        HamiltonianSample::new(&self.control_field(t)?, t)
    }

    /// Distance between the start and end points of the path on the
    /// parameter sphere (chart-independent, so the pole is handled).
    pub fn closure_gap(&self) -> f64 {
        let a = self.control_field(0.0).expect("t = 0 is in range");
        let b = self
            .control_field(self.adiabatic_time)
            .expect("t = T_ad is in range");
        a.components()
            .iter()
            .zip(b.components())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / self.omega
    }
}

/// T_dyn = π / (2Ω) for the coupling convention above.
pub fn pi_pulse_duration(omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Parameter(format!(
            "omega must be positive, got {omega}"
        )));
    }
    Ok(PI / (2.0 * omega))
}

/// Ω_eff = 2Ω²/δ, returned in fs^-1.
pub fn effective_two_photon_rate(delta_mev: f64, omega_single_mev: f64) -> Result<f64> {
    if delta_mev == 0.0 {
        return Err(Error::Parameter(
            "detuning must be non-zero (singular two-photon coupling)".into(),
        ));
    }
    if !(delta_mev > 0.0 && delta_mev.is_finite()) {
        return Err(Error::Parameter(format!(
            "detuning must be positive, got {delta_mev} meV"
        )));
    }
    Ok(mev_to_inv_fs(
        2.0 * omega_single_mev * omega_single_mev / delta_mev,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use nalgebra::SymmetricEigen;

    const OMEGA: f64 = 0.02;
    const T_AD: f64 = 7500.0;

    fn eigenvalues(h: &Mat4) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(*h)
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    #[test]
    fn mixing_field_at_loop_start_is_pure_ancilla() {
        let s = LoopSchedule::mixing(OMEGA, T_AD, FRAC_PI_2).unwrap();
        assert_eq!(
            s.control_field(0.0).unwrap(),
            ControlField::real(0.0, 0.0, OMEGA)
        );
    }

    #[test]
    fn mixing_field_on_equator() {
        let f = Gate::Mixing.field_at(OMEGA, FRAC_PI_2, FRAC_PI_2);
        assert!((f.plus - c(OMEGA, 0.0)).norm() < 1e-15);
        assert!(f.minus.norm() < 1e-17);
        assert!(f.zero.norm() < 1e-17);
        for z in f.components() {
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn phase_shift_field_substitution() {
        let q = PI / 4.0;
        let f = Gate::PhaseShift.field_at(OMEGA, FRAC_PI_2, q);
        let expected_plus = -OMEGA * q.sin() * C64::from_polar(1.0, q);
        assert!((f.plus - expected_plus).norm() < 1e-16);
        assert_eq!(f.minus, c(0.0, 0.0));
        assert!((f.zero - c(OMEGA * q.cos(), 0.0)).norm() < 1e-16);
    }

    #[test]
    fn control_field_rejects_out_of_range_times() {
        let s = LoopSchedule::mixing(OMEGA, T_AD, FRAC_PI_2).unwrap();
        assert!(matches!(
            s.control_field(-1.0),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(matches!(
            s.control_field(T_AD + 1e-6),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(s.control_field(T_AD).is_ok());
    }

    #[test]
    fn zero_field_gives_zero_hamiltonian() {
        assert_eq!(
            assemble_hamiltonian(&ControlField::ZERO).unwrap(),
            Mat4::zeros()
        );
    }

    #[test]
    fn coupling_convention() {
        let f = ControlField::new(c(0.1, 0.2), c(-0.3, 0.0), c(0.0, 0.4));
        let h = assemble_hamiltonian(&f).unwrap();
        assert_eq!(h[(E_PLUS, G)], -f.plus);
        assert_eq!(h[(G, E_PLUS)], -f.plus.conj());
        assert_eq!(h[(E_ZERO, G)], -f.zero);
        for i in 1..4 {
            for j in 1..4 {
                assert_eq!(h[(i, j)], c(0.0, 0.0));
            }
        }
        assert_eq!(hermiticity_defect(&h), 0.0);
    }

    #[test]
    fn ancilla_only_field_spectrum() {
        let h = assemble_hamiltonian(&ControlField::real(0.0, 0.0, OMEGA)).unwrap();
        let ev = eigenvalues(&h);
        let expected = [-OMEGA, 0.0, 0.0, OMEGA];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_step_matches_spectral_exponential() {
        let fields = [
            ControlField::real(0.01, -0.015, 0.007),
            ControlField::new(c(0.01, 0.004), c(0.0, -0.02), c(0.003, 0.0)),
            ControlField::real(0.0, 0.0, 0.02),
        ];
        for f in fields {
            for h in [0.5, 3.0, 40.0] {
                let closed = f.step_propagator(h);
                let spectral = crate::linalg::expm_hermitian(&f.hamiltonian(), h);
                assert!(max_abs(&(closed - spectral)) < 1e-13, "field {f:?} h {h}");
            }
        }
        assert_eq!(ControlField::ZERO.step_propagator(1.0), Mat4::identity());
    }

    #[test]
    fn loop_closure_is_exact() {
        for s in [
            LoopSchedule::mixing(OMEGA, T_AD, FRAC_PI_2).unwrap(),
            LoopSchedule::phase_shift(OMEGA, T_AD, FRAC_PI_2).unwrap(),
            LoopSchedule::two_qubit_phase(5.0, 5.0 / 15.0, 8.0e5, FRAC_PI_2).unwrap(),
        ] {
            let h0 = s.hamiltonian(0.0).unwrap().matrix;
            let h1 = s.hamiltonian(s.adiabatic_time()).unwrap().matrix;
            assert_eq!(h0, h1, "{:?}", s.gate());
            assert_eq!(s.closure_gap(), 0.0);
        }
    }

    #[test]
    fn parametrization_keeps_radius() {
        for s in [
            LoopSchedule::mixing(OMEGA, T_AD, FRAC_PI_2).unwrap(),
            LoopSchedule::phase_shift(OMEGA, T_AD, FRAC_PI_2).unwrap(),
        ] {
            for k in 0..=1000 {
                let t = T_AD * k as f64 / 1000.0;
                let r = s.control_field(t).unwrap().norm();
                assert!((r - OMEGA).abs() <= 1e-12 * OMEGA, "t = {t}");
            }
        }
    }

    #[test]
    fn noiseless_spectrum_along_mixing_loop() {
        let s = LoopSchedule::mixing(OMEGA, T_AD, FRAC_PI_2).unwrap();
        for k in 0..=1000 {
            let t = T_AD * k as f64 / 1000.0;
            let ev = eigenvalues(&s.hamiltonian(t).unwrap().matrix);
            let expected = [-OMEGA, 0.0, 0.0, OMEGA];
            for (a, b) in ev.iter().zip(expected) {
                assert!((a - b).abs() < 1e-10, "t = {t}: {ev:?}");
            }
            // rank test for a two-dimensional null space
            let null = ev.iter().filter(|l| l.abs() < 1e-10).count();
            assert_eq!(null, 2);
        }
    }

    #[test]
    fn unreachable_angles_are_rejected() {
        assert!(matches!(
            LoopSchedule::mixing(OMEGA, T_AD, 7.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            LoopSchedule::mixing(OMEGA, T_AD, -0.1),
            Err(Error::Parameter(_))
        ));
        assert!(LoopSchedule::mixing(OMEGA, T_AD, 0.0).is_ok());
    }

    #[test]
    fn pi_pulse_duration_closed_form() {
        let d = pi_pulse_duration(OMEGA).unwrap();
        assert!((d - PI / 0.04).abs() < 1e-12);
        assert!((d - 78.539_816_339_744_83).abs() < 1e-9);
        // gating-time ratio with the adiabatic loop
        assert!((T_AD / d - 95.492_965_855_137_2).abs() < 1e-9);
        let s = LoopSchedule::dynamical_pi_pulse(OMEGA).unwrap();
        assert_eq!(s.gate(), Gate::DynamicalPi);
        assert_eq!(
            s.control_field(10.0).unwrap(),
            Gate::Mixing.field_at(OMEGA, FRAC_PI_2, FRAC_PI_2)
        );
    }

    #[test]
    fn two_qubit_effective_rate() {
        let delta = 5.0;
        let rate = effective_two_photon_rate(delta, delta / 15.0).unwrap();
        // 2 (δ/15)² / δ = 2δ/225 meV
        assert!((inv_fs_to_mev(rate) - 2.0 * delta / 225.0).abs() < 1e-15);
        let s = LoopSchedule::two_qubit_phase(delta, delta / 15.0, 8.0e5, FRAC_PI_2).unwrap();
        assert!((s.omega() * s.adiabatic_time() - 54.018_398_151).abs() < 1e-6);
        assert!(matches!(
            effective_two_photon_rate(0.0, 1.0),
            Err(Error::Parameter(_))
        ));
        let far = effective_two_photon_rate(1e12, 1.0).unwrap();
        assert!(far < 1e-14);
    }

    #[test]
    fn unit_conversion_round_trip() {
        for e in [1e-3, 0.333, 5.0, 1234.5] {
            assert!((inv_fs_to_mev(mev_to_inv_fs(e)) - e).abs() <= 1e-12 * e);
        }
    }
}
