//! Ideal holonomic gates, analytically from the enclosed solid angle and
//! numerically from the Wilczek–Zee connection.
//!
//! The numeric route tracks an orthonormal frame of the two-dimensional
//! dark space at `n` points of the loop. Between neighbouring points the
//! connection enters through the link `L_k = polar(D_{k+1}^† D_k)`, which
//! is `exp(-A_k Δλ)` to leading order and transforms covariantly,
//! `L_k -> g_{k+1}^† L_k g_k`, under frame changes `D_k -> D_k g_k`.
//! The ordered product of links around the loop, read back in the logical
//! basis, is the holonomy.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{c, exp_i_sigma_y, orthonormalize, polar_unitary, Frame, Mat2, Mat4, C64};
use crate::model::{Gate, LoopSchedule};
use crate::quadrature::GaussLegendre;
use crate::rng::GaussianStream;

/// Gauss–Legendre order per leg.
pub const QUADRATURE_ORDER: usize = 32;
/// Minimum number of loop points for the numeric holonomy.
pub const MIN_PATH_POINTS: usize = 100;
/// Relative eigenvalue threshold for the null-space rank test.
pub const DARK_RANK_TOL: f64 = 1e-10;
/// Links whose overlap drops below this are treated as tracking failures.
const MIN_LINK_SINGULAR_VALUE: f64 = 0.5;
const CLOSURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IdealGate {
    /// On the logical pair, ordered as `Gate::logical_pair`.
    pub logical_unitary: Mat2,
    pub geom_phase: f64,
}

/// u(2)-valued connection components in the (θ, φ) chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionSample {
    pub a_theta: Mat2,
    pub a_phi: Mat2,
}

impl ConnectionSample {
    pub fn anti_hermiticity_defect(&self) -> f64 {
        let d = |m: &Mat2| crate::linalg::max_abs(&(m + m.adjoint()));
        d(&self.a_theta).max(d(&self.a_phi))
    }
}

/// Geometric phase of the loop: the enclosed area `∮ sinθ dθ dφ`, computed
/// as the line integral `∮ (1 - cos θ) dφ`, times the gate's prefactor.
pub fn solid_angle(schedule: &LoopSchedule) -> Result<f64> {
    let gap = schedule.closure_gap();
    if gap > CLOSURE_TOL {
        return Err(Error::OpenLoop { gap });
    }
    let rule = GaussLegendre::new(QUADRATURE_ORDER);
    let area: f64 = schedule
        .legs()
        .iter()
        .map(|leg| {
            let dphi = leg.phi.1 - leg.phi.0;
            if dphi == 0.0 {
                return 0.0;
            }
            let dtheta = leg.theta.1 - leg.theta.0;
            dphi * rule.integrate(0.0, 1.0, |s| 1.0 - (leg.theta.0 + dtheta * s).cos())
        })
        .sum();
    Ok(schedule.gate().solid_angle_factor() * area)
}

pub fn ideal_gate(schedule: &LoopSchedule) -> Result<IdealGate> {
    let gate = schedule.gate();
    let geom_phase = match gate {
        Gate::DynamicalPi => return Err(Error::UnsupportedGate(gate)),
        _ => solid_angle(schedule)?,
    };
    Ok(IdealGate {
        logical_unitary: ideal_unitary(gate, geom_phase)?,
        geom_phase,
    })
}

/// Closed-form holonomy for a given geometric phase.
pub fn ideal_unitary(gate: Gate, geom_phase: f64) -> Result<Mat2> {
    match gate {
        Gate::Mixing => Ok(exp_i_sigma_y(geom_phase)),
        Gate::PhaseShift | Gate::TwoQubitPhase => Ok(Mat2::new(
            C64::from_polar(1.0, geom_phase),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
        )),
        Gate::DynamicalPi => Err(Error::UnsupportedGate(gate)),
    }
}

/// Projector onto the null space of `h` and its dimension.
pub fn dark_projector(h: &Mat4, scale: f64) -> (Mat4, usize) {
    let eig = SymmetricEigen::new(*h);
    let mut p = Mat4::zeros();
    let mut dim = 0;
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() <= DARK_RANK_TOL * scale {
            let v = eig.eigenvectors.column(k);
            p += v * v.adjoint();
            dim += 1;
        }
    }
    (p, dim)
}

fn logical_frame(gate: Gate) -> Frame {
    let (a, b) = gate.logical_pair();
    let mut f = Frame::zeros();
    f[(a, 0)] = c(1.0, 0.0);
    f[(b, 1)] = c(1.0, 0.0);
    f
}

fn dark_projector_at(gate: Gate, omega: f64, theta: f64, phi: f64) -> Result<Mat4> {
    let field = gate.field_at(omega, theta, phi);
    let (p, dim) = dark_projector(&field.hamiltonian(), omega);
    if dim != 2 {
        return Err(Error::DarkSpace {
            t: f64::NAN,
            dimension: dim,
        });
    }
    Ok(p)
}

/// Connection at (θ, φ) in the gauge `D(λ) = orth(P(λ) reference)`, by
/// central differences.
pub fn connection_sample(
    gate: Gate,
    omega: f64,
    theta: f64,
    phi: f64,
    reference: &Frame,
) -> Result<ConnectionSample> {
    let eps = 1e-5;
    let frame = |th: f64, ph: f64| -> Result<Frame> {
        let p = dark_projector_at(gate, omega, th, ph)?;
        orthonormalize(&(p * reference)).ok_or(Error::GaugeTracking {
            index: 0,
            singular_value: 0.0,
        })
    };
    let d0 = frame(theta, phi)?;
    let a_theta =
        d0.adjoint() * (frame(theta + eps, phi)? - frame(theta - eps, phi)?) / c(2.0 * eps, 0.0);
    let a_phi =
        d0.adjoint() * (frame(theta, phi + eps)? - frame(theta, phi - eps)?) / c(2.0 * eps, 0.0);
    Ok(ConnectionSample { a_theta, a_phi })
}

/// Numeric holonomy with the parallel-transport gauge.
pub fn wilczek_zee_holonomy(schedule: &LoopSchedule, n_points: usize) -> Result<Mat2> {
    wilczek_zee_holonomy_in_gauge(schedule, n_points, None)
}

/// Numeric holonomy; with `gauge_seed`, every tracked frame is additionally
/// rotated by an independent random U(2) before the links are formed.
pub fn wilczek_zee_holonomy_in_gauge(
    schedule: &LoopSchedule,
    n_points: usize,
    gauge_seed: Option<u64>,
) -> Result<Mat2> {
    let gate = schedule.gate();
    if !gate.is_holonomic() {
        return Err(Error::UnsupportedGate(gate));
    }
    if n_points < MIN_PATH_POINTS {
        return Err(Error::Parameter(format!(
            "need at least {MIN_PATH_POINTS} path points, got {n_points}"
        )));
    }
    let gap = schedule.closure_gap();
    if gap > CLOSURE_TOL {
        return Err(Error::OpenLoop { gap });
    }

    let t_ad = schedule.adiabatic_time();
    let logical = logical_frame(gate);
    let mut gauge = gauge_seed.map(GaussianStream::new);

    // Parallel-transport gauge: carry the previous frame into the current dark space.
    let mut frames = Vec::with_capacity(n_points);
    let mut prev = logical;
    for k in 0..n_points {
        let t = t_ad * k as f64 / n_points as f64;
        let h = schedule.hamiltonian(t)?.matrix;
        let (p, dim) = dark_projector(&h, schedule.omega());
        if dim != 2 {
            return Err(Error::DarkSpace { t, dimension: dim });
        }
        let projected = p * prev;
        let frame = orthonormalize(&projected).ok_or_else(|| Error::GaugeTracking {
            index: k,
            singular_value: projected.svd(false, false).singular_values.min(),
        })?;
        prev = frame;
        frames.push(match gauge.as_mut() {
            Some(g) => frame * random_unitary(g),
            None => frame,
        });
    }

    let mut w = Mat2::identity();
    for k in 0..n_points {
        let next = (k + 1) % n_points;
        let overlap = frames[next].adjoint() * frames[k];
        let (link, smin) = polar_unitary(&overlap);
        if smin < MIN_LINK_SINGULAR_VALUE {
            return Err(Error::GaugeTracking {
                index: k,
                singular_value: smin,
            });
        }
        w = link * w;
    }
    // back to the logical basis
    let basis_change = logical.adjoint() * frames[0];
    Ok(basis_change * w * basis_change.adjoint())
}

/// Random U(2): unitary polar factor of a complex Gaussian matrix.
fn random_unitary(g: &mut GaussianStream) -> Mat2 {
    let m = Mat2::from_fn(|_, _| c(g.standard(), g.standard()));
    polar_unitary(&m).0
}
