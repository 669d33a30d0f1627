//! Analytic gates on the two-mode subspace `S = span{γ1R, γ2L}` and the
//! exact three-level Λ model in the rotating frame.
//!
//! Three-level basis order is `(γ1R, γ2L, d)`. The bright state is
//! `|B⟩ = c1|γ1R⟩ + c2|γ2L⟩` and the dark state `|D⟩ = c2*|γ1R⟩ - c1|γ2L⟩`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nambu::C64;

const I: C64 = C64::new(0.0, 1.0);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate2(pub Matrix2<C64>);

impl Gate2 {
    pub fn identity() -> Self {
        Gate2(Matrix2::identity())
    }

    pub fn pauli_x() -> Self {
        Gate2(Matrix2::new(c(0.0), c(1.0), c(1.0), c(0.0)))
    }

    pub fn pauli_y() -> Self {
        Gate2(Matrix2::new(c(0.0), -I, I, c(0.0)))
    }

    pub fn pauli_z() -> Self {
        Gate2(Matrix2::new(c(1.0), c(0.0), c(0.0), c(-1.0)))
    }

    /// `a·σ` for a real 3-vector.
    pub fn pauli_dot(a: [f64; 3]) -> Self {
        Gate2(Self::pauli_x().0 * c(a[0]) + Self::pauli_y().0 * c(a[1]) + Self::pauli_z().0 * c(a[2]))
    }

    /// `exp(i angle a·σ)` for a unit vector `a`.
    pub fn exp_i(angle: f64, axis: [f64; 3]) -> Self {
        Gate2(Matrix2::identity() * c(angle.cos()) + Self::pauli_dot(axis).0 * (I * angle.sin()))
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Gate2(self.0.adjoint())
    }

    pub fn scale(&self, z: C64) -> Self {
        Gate2(self.0 * z)
    }

    pub fn determinant(&self) -> C64 {
        self.0.determinant()
    }

    /// Frobenius norm of `G†G - I`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.0.adjoint() * self.0 - Matrix2::identity()).norm()
    }

    /// Largest entrywise difference.
    pub fn max_diff(&self, other: &Gate2) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Mul for Gate2 {
    type Output = Gate2;
    fn mul(self, rhs: Gate2) -> Gate2 {
        Gate2(self.0 * rhs.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAxis {
    pub n: [f64; 3],
    pub v: [f64; 3],
}

impl BlochAxis {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { n: [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()], v: [-phi.sin(), phi.cos(), 0.0] }
    }
}

/// Loop-gate `n·σ`.
pub fn holonomic_gate(theta: f64, phi: f64) -> Gate2 {
    Gate2::pauli_dot(BlochAxis::new(theta, phi).n)
}

/// Half-loop gate `e^{iπ/4} exp(-iπ n·σ/4)`.
pub fn segment_gate(theta: f64, phi: f64) -> Gate2 {
    let n = BlochAxis::new(theta, phi).n;
    Gate2::exp_i(-FRAC_PI_4, n).scale(C64::from_polar(1.0, FRAC_PI_4))
}

/// Time order of the four half-loop segments of the composite gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CompositeOrder {
    /// Two θ segments, then two π−θ segments.
    #[default]
    ThetaFirst,
    /// Two π−θ segments, then two θ segments.
    ComplementFirst,
}

impl CompositeOrder {
    /// Segment angles in time order.
    pub fn thetas(self, theta: f64) -> [f64; 4] {
        let t2 = PI - theta;
        match self {
            CompositeOrder::ThetaFirst => [theta, theta, t2, t2],
            CompositeOrder::ComplementFirst => [t2, t2, theta, theta],
        }
    }
}

/// Product of four ideal half-loop gates; later segments act on the left.
pub fn composite_gate(theta: f64, phi: f64, order: CompositeOrder) -> Gate2 {
    order.thetas(theta).iter().fold(Gate2::identity(), |acc, &th| segment_gate(th, phi) * acc)
}

/// Closed form of [`composite_gate`] up to global phase:
/// `exp(∓i(π−2θ) v·σ)`, upper sign for [`CompositeOrder::ThetaFirst`].
pub fn composite_rotation(theta: f64, phi: f64, order: CompositeOrder) -> Gate2 {
    let v = BlochAxis::new(theta, phi).v;
    let a = PI - 2.0 * theta;
    match order {
        CompositeOrder::ThetaFirst => Gate2::exp_i(-a, v),
        CompositeOrder::ComplementFirst => Gate2::exp_i(a, v),
    }
}

/// `min_α ‖e^{iα} g - target‖_F / 2`.
pub fn gate_distance(g: &Gate2, target: &Gate2) -> f64 {
    let overlap = (g.0.adjoint() * target.0).trace();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    (g.0 * phase - target.0).norm() / 2.0
}

/// Effective drive strength and mixing angle of the bright state
/// `(1+ε1)c1|γ1R⟩ + (1+ε2)c2|γ2L⟩` after renormalization.
pub fn distorted_params(theta: f64, c1: C64, c2: C64, eps1: f64, eps2: f64) -> Result<(f64, f64)> {
    if !(eps1 > -1.0 && eps2 > -1.0) {
        return Err(Error::InvalidParameter(format!("coefficient errors must exceed -1, got ({eps1}, {eps2})")));
    }
    let a = 1.0 + eps1;
    let b = 1.0 + eps2;
    let scale = (a * a * c1.norm_sqr() + b * b * c2.norm_sqr()).sqrt();
    let theta_prime = 2.0 * ((b / a) * (theta / 2.0).tan()).atan();
    Ok((scale, theta_prime))
}

/// One constant-phase pulse of the three-level model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePulse {
    /// `∫Ω dt`.
    pub area: f64,
    /// Carrier phase φ0.
    pub phase: f64,
    /// Bright-state coefficients, not necessarily normalized.
    pub c1: C64,
    pub c2: C64,
}

impl OraclePulse {
    pub fn ideal(area: f64, phase: f64, theta: f64, phi: f64) -> Self {
        let (c1, c2) = bright_coefficients(theta, phi);
        Self { area, phase, c1, c2 }
    }
}

pub fn bright_coefficients(theta: f64, phi: f64) -> (C64, C64) {
    (c((theta / 2.0).cos()), C64::from_polar((theta / 2.0).sin(), phi))
}

pub fn bright_state(c1: C64, c2: C64) -> Vector3<C64> {
    Vector3::new(c1, c2, c(0.0))
}

pub fn dark_state(c1: C64, c2: C64) -> Vector3<C64> {
    Vector3::new(c2.conj(), -c1, c(0.0))
}

/// `e^{iφ0}|d⟩⟨B| + h.c.` for unit Ω.
pub fn rwa_hamiltonian(phase: f64, c1: C64, c2: C64) -> Matrix3<C64> {
    let b = bright_state(c1, c2);
    let d = Vector3::new(c(0.0), c(0.0), c(1.0));
    let k = d * b.adjoint() * C64::from_polar(1.0, phase);
    k + k.adjoint()
}

/// Exact propagator `exp(-i area K)` for `K` = [`rwa_hamiltonian`].
pub fn pulse_propagator(area: f64, phase: f64, c1: C64, c2: C64) -> Matrix3<C64> {
    let b = bright_state(c1, c2);
    let beta = b.norm();
    if beta == 0.0 {
        return Matrix3::identity();
    }
    let bh = b / c(beta);
    let d = Vector3::new(c(0.0), c(0.0), c(1.0));
    let x = area * beta;
    let proj = d * d.adjoint() + bh * bh.adjoint();
    let flip = d * bh.adjoint() * C64::from_polar(1.0, phase) + bh * d.adjoint() * C64::from_polar(1.0, -phase);
    Matrix3::identity() + proj * c(x.cos() - 1.0) - flip * (I * x.sin())
}

/// Time-ordered product of pulse propagators.
pub fn three_level_evolve(pulses: &[OraclePulse]) -> Matrix3<C64> {
    pulses.iter().fold(Matrix3::identity(), |acc, p| pulse_propagator(p.area, p.phase, p.c1, p.c2) * acc)
}

/// Restriction of a three-level operator to `S`.
pub fn project_to_s(u: &Matrix3<C64>) -> Gate2 {
    Gate2(u.fixed_view::<2, 2>(0, 0).into_owned())
}

/// Ideal pulse sequence of one composite half-loop segment: two π/2 pulses
/// with the carrier phase stepped by −π/2 between them.
pub fn segment_pulses(phi: f64, c1: C64, c2: C64, area_scale: f64) -> [OraclePulse; 2] {
    [
        OraclePulse { area: FRAC_PI_2 * area_scale, phase: phi, c1, c2 },
        OraclePulse { area: FRAC_PI_2 * area_scale, phase: phi - FRAC_PI_2, c1, c2 },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingScan {
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of `ln distance` against `ln ε`.
    pub slope: f64,
}

/// Gate error of the single loop or the composite gate under a common
/// coefficient error `ε1 = ε2 = ε`, evaluated with the three-level model.
///
/// The distorted bright state is renormalized through [`distorted_params`],
/// so each pulse carries area `A·s` and mixing angle `θ'`.
pub fn error_scaling_scan(theta: f64, phi: f64, eps: &[f64], composite: bool) -> Result<ScalingScan> {
    error_scaling_scan_along(theta, phi, eps, (1.0, 1.0), composite)
}

/// Like [`error_scaling_scan`] with `(ε1, ε2) = ε·direction`.
///
/// A common error only rescales the pulse area, which every loop absorbs to
/// first order; `direction = (1, 0)` also tilts the bright state.
pub fn error_scaling_scan_along(
    theta: f64,
    phi: f64,
    eps: &[f64],
    direction: (f64, f64),
    composite: bool,
) -> Result<ScalingScan> {
    let order = CompositeOrder::ThetaFirst;
    let ideal = if composite { composite_gate(theta, phi, order) } else { holonomic_gate(theta, phi) };
    let mut rows = Vec::with_capacity(eps.len());
    for &e in eps {
        let g = distorted_gate(theta, phi, e * direction.0, e * direction.1, composite, order)?;
        rows.push((e, gate_distance(&g, &ideal)));
    }
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|(e, d)| *e > 0.0 && *d > 0.0).map(|(e, d)| (e.ln(), d.ln())).collect();
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    Ok(ScalingScan { rows, slope })
}

/// Projected gate of the single loop or the composite sequence with
/// coefficient errors, using the renormalized `(Ω', θ')` description.
pub fn distorted_gate(
    theta: f64,
    phi: f64,
    eps1: f64,
    eps2: f64,
    composite: bool,
    order: CompositeOrder,
) -> Result<Gate2> {
    let thetas: Vec<f64> = if composite { order.thetas(theta).to_vec() } else { vec![theta] };
    let mut pulses = Vec::new();
    for th in thetas {
        let (c1, c2) = bright_coefficients(th, phi);
        let (s, thp) = distorted_params(th, c1, c2, eps1, eps2)?;
        let (d1, d2) = bright_coefficients(thp, phi);
        if composite {
            pulses.extend(segment_pulses(phi, d1, d2, s));
        } else {
            pulses.push(OraclePulse { area: PI * s, phase: 0.0, c1: d1, c2: d2 });
        }
    }
    Ok(project_to_s(&three_level_evolve(&pulses)))
}
