//! Pulse envelopes, carrier phase schedules and the time-dependent drive
//! that couples the defect to the two inner Majorana modes.
//!
//! The drive acts on the single-particle space as
//!
//! ```text
//! H_drive(t) = g(t) |e_d⟩⟨B| + g(t)* |B⟩⟨e_d|,   |B⟩ = c1|γ1R⟩ + c2|γ2L⟩
//! ```
//!
//! with `g(t) = 2Ω(t) cos(ωt - φ0(t))` in the lab frame, or
//! `g(t) = Ω(t) e^{iφ0(t)}` in the frame rotating at ω (counter-rotating
//! terms dropped). `|e_d⟩` is the particle component of the defect site. In
//! the rotating frame this is exactly the three-level model of
//! [`crate::gate`], so pulse areas measured there carry over one to one.
//!
//! [`DriveCoupling::ParticleHole`] adds the Ξ-image of the term, which makes
//! the drive matrix particle-hole odd.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{project_to_s, pulse_propagator, three_level_evolve, CompositeOrder, Gate2, OraclePulse};
use crate::imperfections::TruncationSpec;
use crate::lattice::{Chain, MajoranaModes, SystemSpec};
use crate::nambu::{particle_hole_conjugate, BdGMatrix, NambuVector, C64};

/// Ratio of the effective three-level pulse area to `∫Ω dt`.
///
/// The co-rotating matrix element between `|e_d⟩` and the unit-norm bright
/// vector is `Ω e^{iφ0}`, so the gain is one.
pub const EFFECTIVE_AREA_GAIN: f64 = 1.0;

/// Largest defect weight tolerated in a drive mode.
pub const MODE_DEFECT_TOLERANCE: f64 = 1e-10;

const CALIBRATION_TOLERANCE: f64 = 1e-8;
const QUADRATURE_INTERVALS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveCoefficients {
    pub theta: f64,
    pub phi: f64,
    pub c1: C64,
    pub c2: C64,
}

impl DriveCoefficients {
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (c1, c2) = crate::gate::bright_coefficients(theta, phi);
        Self { theta, phi, c1, c2 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeShape {
    /// `(π/T) sin²(2πt/T)`, unscaled area π/2.
    Sin2,
    /// `area_target / T`.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseEnvelope {
    pub shape: EnvelopeShape,
    pub duration: f64,
    pub area_target: f64,
    pub amplitude_scale: f64,
}

impl PulseEnvelope {
    pub fn new(shape: EnvelopeShape, duration: f64, area_target: f64) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::InvalidParameter(format!("pulse duration must be positive, got {duration}")));
        }
        if !(area_target >= 0.0) || !area_target.is_finite() {
            return Err(Error::InvalidParameter(format!("pulse area must be non-negative, got {area_target}")));
        }
        Ok(Self { shape, duration, area_target, amplitude_scale: 1.0 })
    }

    fn raw_value(&self, t: f64) -> f64 {
        match self.shape {
            EnvelopeShape::Sin2 => {
                let s = (2.0 * PI * t / self.duration).sin();
                PI / self.duration * s * s
            }
            EnvelopeShape::Constant => self.area_target / self.duration,
        }
    }

    /// `∫Ω dt` at the current scale, by composite Simpson quadrature.
    pub fn integral(&self) -> f64 {
        let n = QUADRATURE_INTERVALS;
        let h = self.duration / n as f64;
        let mut s = self.raw_value(0.0) + self.raw_value(self.duration);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * self.raw_value(k as f64 * h);
        }
        self.amplitude_scale * s * h / 3.0
    }

    /// Rotation angle of the three-level model driven by this envelope.
    pub fn effective_area(&self) -> f64 {
        self.integral() * EFFECTIVE_AREA_GAIN
    }
}

/// `Ω(t)` for `0 ≤ t ≤ T`.
pub fn envelope_value(env: &PulseEnvelope, t: f64) -> Result<f64> {
    let slack = 1e-12 * env.duration;
    if !(t >= -slack && t <= env.duration + slack) {
        return Err(Error::TimeOutOfRange { time: t, duration: env.duration });
    }
    Ok(env.amplitude_scale * env.raw_value(t.clamp(0.0, env.duration)))
}

/// Returns `env` with `amplitude_scale` chosen so the pulse rotates the
/// three-level model by `target_area`, i.e. maps `|B⟩` to
/// `cos A|B⟩ - i e^{-iφ0} sin A|d⟩` with `A = target_area`.
///
/// The rotation angle is read off the oracle propagator and the scale found
/// by bisection. Targets are limited to `[0, π]`.
pub fn calibrate_pulse_area(env: &PulseEnvelope, target_area: f64) -> Result<PulseEnvelope> {
    if !(0.0..=PI).contains(&target_area) {
        return Err(Error::InvalidParameter(format!("pulse area target must lie in [0, π], got {target_area}")));
    }
    let mut out = *env;
    out.area_target = target_area;
    if target_area == 0.0 {
        out.amplitude_scale = 0.0;
        return Ok(out);
    }
    let measure = |scale: f64| -> f64 {
        let probe = PulseEnvelope { amplitude_scale: scale, ..out };
        let u = pulse_propagator(probe.effective_area(), 0.0, C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let cos_a = u[(0, 0)].re;
        let sin_a = (C64::new(0.0, 1.0) * u[(2, 0)]).re;
        sin_a.atan2(cos_a).rem_euclid(2.0 * PI)
    };
    let unit = PulseEnvelope { amplitude_scale: 1.0, ..out }.integral();
    if !(unit > 0.0) {
        return Err(Error::InvalidParameter("envelope has no positive integral".into()));
    }
    let mut lo = 0.0;
    let mut hi = 1e-6 / unit;
    let mut grow = 0;
    while measure(hi) < target_area {
        lo = hi;
        hi *= 1.25;
        grow += 1;
        if grow > 400 {
            return Err(Error::CalibrationFailed { target: target_area, scale: hi });
        }
    }
    for _ in 0..200 {
        if hi - lo <= CALIBRATION_TOLERANCE * 1e-4 * hi {
            out.amplitude_scale = 0.5 * (lo + hi);
            return Ok(out);
        }
        let mid = 0.5 * (lo + hi);
        if measure(mid) < target_area {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::CalibrationFailed { target: target_area, scale: 0.5 * (lo + hi) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub base_phase: f64,
    pub step_time: f64,
    pub step_amount: f64,
    pub enabled: bool,
}

impl PhaseSchedule {
    pub fn constant(phase: f64) -> Self {
        Self { base_phase: phase, step_time: 0.0, step_amount: 0.0, enabled: false }
    }

    /// `φ0(t) = base - (π/2) Θ(t - step_time)`.
    pub fn stepped(base_phase: f64, step_time: f64) -> Self {
        Self { base_phase, step_time, step_amount: -FRAC_PI_2, enabled: true }
    }

    pub fn phase_at(&self, t: f64) -> f64 {
        if self.enabled && t >= self.step_time {
            self.base_phase + self.step_amount
        } else {
            self.base_phase
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DriveCoupling {
    /// Single-particle Λ coupling between `|e_d⟩` and `|B⟩`.
    #[default]
    DefectParticle,
    /// Λ coupling plus its particle-hole image; the drive matrix is PHS-odd.
    ParticleHole,
}

/// An envelope placed at `start` within its segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedEnvelope {
    pub start: f64,
    pub envelope: PulseEnvelope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub coefficients: DriveCoefficients,
    /// Contiguous pulses covering the segment, in time order.
    pub pulses: Vec<TimedEnvelope>,
    pub phase: PhaseSchedule,
    pub drive_frequency: f64,
    pub truncation: Option<TruncationSpec>,
    /// Per-site multipliers on the drive amplitude, keyed by global site.
    pub site_gains: BTreeMap<usize, f64>,
    pub rwa: bool,
    pub coupling: DriveCoupling,
}

impl Segment {
    pub fn new(
        coefficients: DriveCoefficients,
        envelopes: &[PulseEnvelope],
        phase: PhaseSchedule,
        drive_frequency: f64,
    ) -> Result<Self> {
        if envelopes.is_empty() {
            return Err(Error::InvalidParameter("segment needs at least one pulse".into()));
        }
        if !(drive_frequency >= 0.0) || !drive_frequency.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "drive frequency must be non-negative, got {drive_frequency}"
            )));
        }
        let mut start = 0.0;
        let mut pulses = Vec::with_capacity(envelopes.len());
        for e in envelopes {
            pulses.push(TimedEnvelope { start, envelope: *e });
            start += e.duration;
        }
        if phase.enabled && !(phase.step_time > 0.0 && phase.step_time < start) {
            return Err(Error::InvalidParameter(format!(
                "phase step at {} must lie inside (0, {start})",
                phase.step_time
            )));
        }
        Ok(Self {
            coefficients,
            pulses,
            phase,
            drive_frequency,
            truncation: None,
            site_gains: BTreeMap::new(),
            rwa: false,
            coupling: DriveCoupling::DefectParticle,
        })
    }

    pub fn duration(&self) -> f64 {
        self.pulses.last().map_or(0.0, |p| p.start + p.envelope.duration)
    }

    /// Times inside the segment where the drive is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.pulses.iter().map(|p| p.start).collect();
        b.push(self.duration());
        if self.phase.enabled {
            b.push(self.phase.step_time);
        }
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * self.duration());
        b
    }

    /// `Ω(t)` at segment-local time.
    pub fn envelope_at(&self, t: f64) -> Result<f64> {
        let idx = self.pulses.iter().rposition(|p| t >= p.start).unwrap_or(0);
        let p = &self.pulses[idx];
        envelope_value(&p.envelope, t - p.start)
    }

    /// Scalar drive amplitude `g` at segment-local `t` and protocol time
    /// `t_global` (the carrier runs continuously across segments).
    pub fn drive_scalar(&self, t: f64, t_global: f64) -> Result<C64> {
        let omega = self.envelope_at(t)?;
        let phi0 = self.phase.phase_at(t);
        Ok(if self.rwa {
            C64::from_polar(omega, phi0)
        } else {
            C64::new(2.0 * omega * (self.drive_frequency * t_global - phi0).cos(), 0.0)
        })
    }

    /// Bright vector `c1 γ1R + c2 γ2L` after truncation and site gains.
    pub fn coupling_vector(&self, modes: &MajoranaModes, spec: &SystemSpec) -> Result<NambuVector> {
        let m = spec.total_sites();
        let d = spec.defect_site();
        let r1 = &modes.gamma1r.vector;
        let r2 = &modes.gamma2l.vector;
        for v in [r1, r2] {
            if v.len() != 2 * m {
                return Err(Error::DimensionMismatch { expected: 2 * m, actual: v.len() });
            }
            let w = v[d].norm_sqr() + v[m + d].norm_sqr();
            if w > MODE_DEFECT_TOLERANCE {
                return Err(Error::ModeOnDefect { weight: w });
            }
        }
        if let Some(tr) = &self.truncation {
            tr.validate(spec)?;
        }
        let keep = |site: usize| -> f64 {
            let inside = match (&self.truncation, spec.chain_of_site(site)) {
                (_, None) => false,
                (None, Some(_)) => true,
                (Some(tr), Some(Chain::First)) => site + tr.radius >= d,
                (Some(tr), Some(Chain::Second)) => site <= d + tr.radius,
            };
            if inside {
                self.site_gains.get(&site).copied().unwrap_or(1.0)
            } else {
                0.0
            }
        };
        let c1 = self.coefficients.c1;
        let c2 = self.coefficients.c2;
        Ok(NambuVector::from_fn(2 * m, |k, _| {
            let site = if k < m { k } else { k - m };
            let w = keep(site);
            if w == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                (c1 * r1[k] + c2 * r2[k]) * w
            }
        }))
    }
}

/// Dense drive matrix at segment-local `t` and protocol time `t_global`.
pub fn build_drive_bdg(
    seg: &Segment,
    t: f64,
    t_global: f64,
    modes: &MajoranaModes,
    spec: &SystemSpec,
) -> Result<BdGMatrix> {
    let m = spec.total_sites();
    let b = seg.coupling_vector(modes, spec)?;
    let g = seg.drive_scalar(t, t_global)?;
    let mut ed = NambuVector::zeros(2 * m);
    ed[spec.defect_site()] = C64::new(1.0, 0.0);
    let mut h = &ed * b.adjoint() * g;
    h += &b * ed.adjoint() * g.conj();
    if seg.coupling == DriveCoupling::ParticleHole {
        let xe = particle_hole_conjugate(&ed);
        let xb = particle_hole_conjugate(&b);
        h -= &xe * xb.adjoint() * g.conj();
        h -= &xb * xe.adjoint() * g;
    }
    BdGMatrix::from_matrix(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveProtocol {
    pub segments: Vec<Segment>,
}

impl DriveProtocol {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter("protocol needs at least one segment".into()));
        }
        let rwa = segments[0].rwa;
        if segments.iter().any(|s| s.rwa != rwa) {
            return Err(Error::InvalidParameter("all segments must share the same frame (rwa flag)".into()));
        }
        Ok(Self { segments })
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    pub fn segment_starts(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let start = t;
                t += s.duration();
                start
            })
            .collect()
    }

    pub fn is_rwa(&self) -> bool {
        self.segments.iter().any(|s| s.rwa)
    }

    pub fn with_rwa(mut self, rwa: bool) -> Self {
        self.segments.iter_mut().for_each(|s| s.rwa = rwa);
        self
    }

    pub fn with_coupling(mut self, coupling: DriveCoupling) -> Self {
        self.segments.iter_mut().for_each(|s| s.coupling = coupling);
        self
    }

    pub fn with_drive_frequency(mut self, omega: f64) -> Self {
        self.segments.iter_mut().for_each(|s| s.drive_frequency = omega);
        self
    }

    /// Shifts every carrier phase by `delta`.
    pub fn with_phase_offset(mut self, delta: f64) -> Self {
        self.segments.iter_mut().for_each(|s| s.phase.base_phase += delta);
        self
    }

    /// Ratio `amplitude_scale` of the first pulse, as logged in manifests.
    pub fn calibration_factor(&self) -> f64 {
        self.segments[0].pulses[0].envelope.amplitude_scale
    }

    /// Three-level pulse list, one entry per envelope, with the
    /// effective area, carrier phase and (possibly distorted) coefficients.
    /// Truncation and site gains are not represented.
    pub fn oracle_pulses(&self) -> Vec<OraclePulse> {
        let mut out = Vec::new();
        for s in &self.segments {
            for p in &s.pulses {
                let mid = p.start + 0.5 * p.envelope.duration;
                out.push(OraclePulse {
                    area: p.envelope.effective_area(),
                    phase: s.phase.phase_at(mid),
                    c1: s.coefficients.c1,
                    c2: s.coefficients.c2,
                });
            }
        }
        out
    }

    /// Projected gate the three-level model predicts for this protocol.
    pub fn oracle_gate(&self) -> Gate2 {
        project_to_s(&three_level_evolve(&self.oracle_pulses()))
    }
}

fn sin2(duration: f64, area: f64) -> Result<PulseEnvelope> {
    calibrate_pulse_area(&PulseEnvelope::new(EnvelopeShape::Sin2, duration, area)?, area)
}

/// Single π-area loop with constant carrier phase 0.
pub fn make_braid_protocol(duration: f64, theta: f64, phi: f64, omega: f64) -> Result<DriveProtocol> {
    let seg = Segment::new(
        DriveCoefficients::from_angles(theta, phi),
        &[sin2(duration, PI)?],
        PhaseSchedule::constant(0.0),
        omega,
    )?;
    DriveProtocol::new(vec![seg])
}

/// Four segments of length `duration`, each two π/2 pulses split at
/// `t_prime` with a −π/2 carrier-phase step.
pub fn make_composite_protocol(
    duration: f64,
    t_prime: f64,
    theta: f64,
    phi: f64,
    omega: f64,
    order: CompositeOrder,
) -> Result<DriveProtocol> {
    if !(t_prime > 0.0 && t_prime < duration) {
        return Err(Error::InvalidParameter(format!("split time {t_prime} must lie inside (0, {duration})")));
    }
    let first = sin2(t_prime, FRAC_PI_2)?;
    let second = sin2(duration - t_prime, FRAC_PI_2)?;
    let segments = order
        .thetas(theta)
        .iter()
        .map(|&th| {
            Segment::new(
                DriveCoefficients::from_angles(th, phi),
                &[first, second],
                PhaseSchedule::stepped(phi, t_prime),
                omega,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    DriveProtocol::new(segments)
}

/// Composite protocol at θ = 3π/8, φ = 0.
pub fn make_pi8_protocol(duration: f64, t_prime: f64, omega: f64, order: CompositeOrder) -> Result<DriveProtocol> {
    make_composite_protocol(duration, t_prime, 3.0 * PI / 8.0, 0.0, omega, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin2_values() {
        let env = PulseEnvelope::new(EnvelopeShape::Sin2, 20.0, PI).unwrap();
        assert_eq!(envelope_value(&env, 0.0).unwrap(), 0.0);
        assert!((envelope_value(&env, 5.0).unwrap() - PI / 20.0).abs() < 1e-15);
        assert!(envelope_value(&env, 20.5).is_err());
        assert!(envelope_value(&env, -0.1).is_err());
        assert!((env.integral() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn calibration_scales() {
        let env = PulseEnvelope::new(EnvelopeShape::Sin2, 20.0, PI).unwrap();
        let cal = calibrate_pulse_area(&env, PI).unwrap();
        assert!((cal.amplitude_scale - 2.0).abs() < 1e-8);
        let half = calibrate_pulse_area(&env, FRAC_PI_2).unwrap();
        assert!((cal.amplitude_scale - 2.0 * half.amplitude_scale).abs() < 1e-8);
        let flat = PulseEnvelope::new(EnvelopeShape::Constant, 7.0, PI).unwrap();
        assert!((calibrate_pulse_area(&flat, PI).unwrap().amplitude_scale - 1.0).abs() < 1e-8);
        assert_eq!(calibrate_pulse_area(&env, 0.0).unwrap().amplitude_scale, 0.0);
        assert!(calibrate_pulse_area(&env, 4.0).is_err());
    }

    #[test]
    fn phase_step() {
        let p = PhaseSchedule::stepped(0.3, 10.0);
        assert_eq!(p.phase_at(9.999), 0.3);
        assert_eq!(p.phase_at(10.0), 0.3 - FRAC_PI_2);
        assert_eq!(PhaseSchedule::constant(0.3).phase_at(15.0), 0.3);
    }

    #[test]
    fn composite_layout() {
        let p = make_composite_protocol(20.0, 10.0, 0.7, 0.0, 3.0, CompositeOrder::ThetaFirst).unwrap();
        assert_eq!(p.segments.len(), 4);
        assert!((p.total_duration() - 80.0).abs() < 1e-12);
        assert_eq!(p.segment_starts(), vec![0.0, 20.0, 40.0, 60.0]);
        assert!((p.segments[2].coefficients.theta - (PI - 0.7)).abs() < 1e-15);
        assert_eq!(p.segments[0].breakpoints(), vec![0.0, 10.0, 20.0]);
        assert!(make_composite_protocol(20.0, 20.0, 0.7, 0.0, 3.0, CompositeOrder::ThetaFirst).is_err());
    }
}
