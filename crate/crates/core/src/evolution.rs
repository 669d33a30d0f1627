//! Time evolution of single-particle Nambu vectors under
//! `H_static + H_drive(t)`.
//!
//! The static Hamiltonian is block diagonal (two chains and a decoupled
//! defect), so it is diagonalized once per chain and the state is stepped
//! in its eigenbasis. The drive is a sum of at most four dyads, which keeps
//! each Krylov matrix-vector product linear in the system size.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use crate::drive::{DriveCoupling, DriveProtocol};
use crate::error::{Error, Result};
use crate::gate::Gate2;
use crate::lanczos::expm_apply;
use crate::lattice::{
    build_static_bdg, chain_block, embed_chain_vector, extract_majorana_modes, Chain, MajoranaMode, MajoranaModes,
    SystemSpec,
};
use crate::nambu::{particle_hole_conjugate, BdGMatrix, NambuVector, C64};

const KRYLOV_TOLERANCE: f64 = 1e-15;
const SQRT3_6: f64 = 0.288_675_134_594_812_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IntegratorMethod {
    /// `exp(-i H(t + dt/2) dt)` per step.
    #[default]
    MidpointExponential,
    /// Two-exponential commutator-free Magnus scheme of order four.
    FourthOrderMagnus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub method: IntegratorMethod,
    /// Largest tolerated `|‖ψ‖ - 1|` at any output sample.
    pub tolerance: f64,
    pub output_samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: 0.01, method: IntegratorMethod::MidpointExponential, tolerance: 1e-8, output_samples: 500 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self, protocol: &DriveProtocol) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        if self.output_samples < 2 {
            return Err(Error::InvalidParameter("need at least two output samples".into()));
        }
        for s in &protocol.segments {
            if !s.rwa && s.drive_frequency > 0.0 {
                let limit = 2.0 * PI / s.drive_frequency / 20.0;
                if self.dt > limit * (1.0 + 1e-12) {
                    return Err(Error::InvalidParameter(format!(
                        "dt = {} does not resolve the carrier (limit {limit})",
                        self.dt
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FidelitySeries {
    pub times: Vec<f64>,
    pub f_self: Vec<f64>,
    pub f_target: Vec<f64>,
    pub f_defect: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub series: FidelitySeries,
    /// Final state in the lab frame and site basis.
    pub final_state: NambuVector,
    /// Largest `|‖ψ‖ - 1|` over the output samples.
    pub norm_drift: f64,
    /// Final weight on chain eigenstates other than the zero modes.
    pub bulk_population: f64,
    pub steps: usize,
}

impl Evolution {
    pub fn final_f_target(&self) -> f64 {
        *self.series.f_target.last().unwrap_or(&0.0)
    }

    pub fn final_f_self(&self) -> f64 {
        *self.series.f_self.last().unwrap_or(&0.0)
    }

    pub fn final_f_defect(&self) -> f64 {
        *self.series.f_defect.last().unwrap_or(&0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedGate {
    pub gate: Gate2,
    /// `‖M†M - I‖_F`.
    pub leakage: f64,
}

impl ProjectedGate {
    pub fn check(&self, threshold: f64) -> Result<()> {
        if self.leakage > threshold {
            return Err(Error::Leakage { leakage: self.leakage, threshold });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BasisKind {
    Zero,
    Bulk,
    DefectParticle,
    DefectHole,
}

#[derive(Debug, Clone, Copy)]
enum Coef {
    G,
    GConj,
    NegG,
    NegGConj,
}

impl Coef {
    fn eval(self, g: C64) -> C64 {
        match self {
            Coef::G => g,
            Coef::GConj => g.conj(),
            Coef::NegG => -g,
            Coef::NegGConj => -g.conj(),
        }
    }
}

/// Low-rank drive of one segment in the static eigenbasis.
struct SegmentDrive {
    vecs: Vec<DVector<C64>>,
    terms: Vec<(usize, usize, Coef)>,
}

/// A prepared two-chain system: static eigenbasis and Majorana modes.
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: SystemSpec,
    static_h: BdGMatrix,
    modes: MajoranaModes,
    energies: Vec<f64>,
    basis: DMatrix<C64>,
    kinds: Vec<BasisKind>,
    defect_particle: usize,
    defect_hole: usize,
}

impl Simulator {
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        let static_h = build_static_bdg(spec)?;
        let modes = extract_majorana_modes(&static_h, spec)?;
        let dim = static_h.dim();
        let mut energies = Vec::with_capacity(dim);
        let mut columns: Vec<NambuVector> = Vec::with_capacity(dim);
        let mut kinds = Vec::with_capacity(dim);
        for which in [Chain::First, Chain::Second] {
            let block = chain_block(&static_h, spec, which)?;
            let (e, v) = block.eigh();
            let mut by_abs: Vec<usize> = (0..e.len()).collect();
            by_abs.sort_by(|&a, &b| e[a].abs().total_cmp(&e[b].abs()));
            for (k, &ek) in e.iter().enumerate() {
                energies.push(ek);
                columns.push(embed_chain_vector(spec, which, &v.column(k).into_owned()));
                kinds.push(if by_abs[..2].contains(&k) { BasisKind::Zero } else { BasisKind::Bulk });
            }
        }
        let m = spec.total_sites();
        let d = spec.defect_site();
        for (site, sign, kind) in [(d, 1.0, BasisKind::DefectParticle), (m + d, -1.0, BasisKind::DefectHole)] {
            let mut v = NambuVector::zeros(dim);
            v[site] = C64::new(1.0, 0.0);
            columns.push(v);
            energies.push(sign * spec.defect_energy);
            kinds.push(kind);
        }
        let basis = DMatrix::from_columns(&columns);
        Ok(Self {
            spec: spec.clone(),
            static_h,
            modes,
            energies,
            basis,
            kinds,
            defect_particle: dim - 2,
            defect_hole: dim - 1,
        })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn modes(&self) -> &MajoranaModes {
        &self.modes
    }

    pub fn static_hamiltonian(&self) -> &BdGMatrix {
        &self.static_h
    }

    fn to_eigen(&self, v: &NambuVector) -> DVector<C64> {
        self.basis.adjoint() * v
    }

    fn segment_drives(&self, protocol: &DriveProtocol) -> Result<Vec<SegmentDrive>> {
        let dim = self.static_h.dim();
        let mut ed = NambuVector::zeros(dim);
        ed[self.spec.defect_site()] = C64::new(1.0, 0.0);
        protocol
            .segments
            .iter()
            .map(|s| {
                let b = s.coupling_vector(&self.modes, &self.spec)?;
                let mut vecs = vec![self.to_eigen(&ed), self.to_eigen(&b)];
                let mut terms = vec![(0, 1, Coef::G), (1, 0, Coef::GConj)];
                if s.coupling == DriveCoupling::ParticleHole {
                    vecs.push(self.to_eigen(&particle_hole_conjugate(&ed)));
                    vecs.push(self.to_eigen(&particle_hole_conjugate(&b)));
                    terms.push((2, 3, Coef::NegGConj));
                    terms.push((3, 2, Coef::NegG));
                }
                Ok(SegmentDrive { vecs, terms })
            })
            .collect()
    }

    /// Diagonal of the static Hamiltonian in the frame used for stepping.
    fn frame_energies(&self, protocol: &DriveProtocol) -> Result<Vec<f64>> {
        let mut e = self.energies.clone();
        if protocol.is_rwa() {
            let w = protocol.segments[0].drive_frequency;
            if protocol.segments.iter().any(|s| s.drive_frequency != w) {
                return Err(Error::InvalidParameter(
                    "rotating frame needs one drive frequency for all segments".into(),
                ));
            }
            e[self.defect_particle] -= w;
            e[self.defect_hole] += w;
        }
        Ok(e)
    }

    /// `H ψ` at protocol time `t` via the eigenbasis path, in the site
    /// basis and the stepping frame.
    pub fn apply_hamiltonian(&self, protocol: &DriveProtocol, t: f64, psi: &NambuVector) -> Result<NambuVector> {
        let drives = self.segment_drives(protocol)?;
        let energies = self.frame_energies(protocol)?;
        let (idx, local) = locate(protocol, t);
        let g = protocol.segments[idx].drive_scalar(local, t)?;
        let x = self.to_eigen(psi);
        let mut y = DVector::zeros(x.len());
        apply_operator(&energies, 1.0, &drives[idx], g, &x, &mut y);
        Ok(&self.basis * y)
    }

    pub fn evolve(&self, protocol: &DriveProtocol, psi0: &NambuVector, cfg: &IntegratorConfig) -> Result<Evolution> {
        cfg.validate(protocol)?;
        if psi0.len() != self.static_h.dim() {
            return Err(Error::DimensionMismatch { expected: self.static_h.dim(), actual: psi0.len() });
        }
        if (psi0.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("initial state norm {} is not 1", psi0.norm())));
        }
        let drives = self.segment_drives(protocol)?;
        let energies = self.frame_energies(protocol)?;
        let total = protocol.total_duration();
        let grid = time_grid(protocol, cfg.output_samples);
        let g1 = self.to_eigen(&self.modes.gamma1r.vector);
        let g2 = self.to_eigen(&self.modes.gamma2l.vector);

        let mut psi = self.to_eigen(psi0);
        let mut series = FidelitySeries::default();
        let mut norm_drift: f64 = 0.0;
        let mut steps = 0;
        let mut record = |psi: &DVector<C64>, t: f64, series: &mut FidelitySeries| -> Result<()> {
            let norm = psi.norm();
            if !norm.is_finite() {
                return Err(Error::NonFinite { time: t });
            }
            let drift = (norm - 1.0).abs();
            norm_drift = norm_drift.max(drift);
            if drift > cfg.tolerance {
                return Err(Error::NormDrift { drift, tolerance: cfg.tolerance, time: t });
            }
            series.times.push(t);
            series.f_self.push(unit_clamp(g1.dotc(psi).norm_sqr()));
            series.f_target.push(unit_clamp(g2.dotc(psi).norm_sqr()));
            series.f_defect.push(unit_clamp(psi[self.defect_particle].norm_sqr() + psi[self.defect_hole].norm_sqr()));
            Ok(())
        };
        if grid[0].1 {
            record(&psi, 0.0, &mut series)?;
        }
        for w in grid.windows(2) {
            let (a, b) = (w[0].0, w[1].0);
            let n = ((b - a) / cfg.dt - 1e-9).ceil().max(1.0) as usize;
            let h = (b - a) / n as f64;
            for k in 0..n {
                let t0 = a + k as f64 * h;
                psi = self.step(protocol, &drives, &energies, cfg.method, &psi, t0, h, false)?;
                steps += 1;
            }
            if w[1].1 {
                record(&psi, b, &mut series)?;
            }
        }
        if protocol.is_rwa() {
            let w = protocol.segments[0].drive_frequency;
            psi[self.defect_particle] *= C64::from_polar(1.0, -w * total);
            psi[self.defect_hole] *= C64::from_polar(1.0, w * total);
        }
        let bulk_population =
            self.kinds.iter().enumerate().filter(|(_, k)| **k == BasisKind::Bulk).map(|(i, _)| psi[i].norm_sqr()).sum();
        Ok(Evolution { series, final_state: &self.basis * psi, norm_drift, bulk_population, steps })
    }

    /// Integrates backwards from the protocol's end to `t = 0`, i.e. applies
    /// the inverse propagator on the integration grid of `cfg`.
    pub fn evolve_backward(
        &self,
        protocol: &DriveProtocol,
        psi_end: &NambuVector,
        cfg: &IntegratorConfig,
    ) -> Result<NambuVector> {
        cfg.validate(protocol)?;
        let drives = self.segment_drives(protocol)?;
        let energies = self.frame_energies(protocol)?;
        let total = protocol.total_duration();
        let grid = time_grid(protocol, cfg.output_samples);
        let mut psi = self.to_eigen(psi_end);
        if protocol.is_rwa() {
            let w = protocol.segments[0].drive_frequency;
            psi[self.defect_particle] *= C64::from_polar(1.0, w * total);
            psi[self.defect_hole] *= C64::from_polar(1.0, -w * total);
        }
        for w in grid.windows(2).rev() {
            let (a, b) = (w[0].0, w[1].0);
            let n = ((b - a) / cfg.dt - 1e-9).ceil().max(1.0) as usize;
            let h = (b - a) / n as f64;
            for k in (0..n).rev() {
                let t0 = a + k as f64 * h;
                psi = self.step(protocol, &drives, &energies, cfg.method, &psi, t0, h, true)?;
            }
        }
        if !psi.norm().is_finite() {
            return Err(Error::NonFinite { time: 0.0 });
        }
        Ok(&self.basis * psi)
    }

    /// Evolves `γ1R` and `γ2L` and projects the result onto `S`.
    pub fn run_gate(
        &self,
        protocol: &DriveProtocol,
        cfg: &IntegratorConfig,
    ) -> Result<(Evolution, Evolution, ProjectedGate)> {
        let e1 = self.evolve(protocol, &self.modes.gamma1r.vector, cfg)?;
        let e2 = self.evolve(protocol, &self.modes.gamma2l.vector, cfg)?;
        let gate =
            project_gate([&e1.final_state, &e2.final_state], [&self.modes.gamma1r.vector, &self.modes.gamma2l.vector])?;
        Ok((e1, e2, gate))
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        protocol: &DriveProtocol,
        drives: &[SegmentDrive],
        energies: &[f64],
        method: IntegratorMethod,
        psi: &DVector<C64>,
        t0: f64,
        h: f64,
        inverse: bool,
    ) -> Result<DVector<C64>> {
        let (idx, _) = locate(protocol, t0 + 0.5 * h);
        let start = protocol.segment_starts()[idx];
        let seg = &protocol.segments[idx];
        let g_at = |t: f64| seg.drive_scalar(t - start, t);
        let drive = &drives[idx];
        let tau = if inverse { -h } else { h };
        let exp = |scale: f64, g: C64, v: &DVector<C64>| {
            expm_apply(|x, y| apply_operator(energies, scale, drive, g, x, y), v, tau, KRYLOV_TOLERANCE)
        };
        Ok(match method {
            IntegratorMethod::MidpointExponential => exp(1.0, g_at(t0 + 0.5 * h)?, psi),
            IntegratorMethod::FourthOrderMagnus => {
                let a1 = 0.25 + SQRT3_6;
                let a2 = 0.25 - SQRT3_6;
                let g1 = g_at(t0 + (0.5 - SQRT3_6) * h)?;
                let g2 = g_at(t0 + (0.5 + SQRT3_6) * h)?;
                let first = g1 * a1 + g2 * a2;
                let second = g1 * a2 + g2 * a1;
                if inverse {
                    exp(0.5, first, &exp(0.5, second, psi))
                } else {
                    exp(0.5, second, &exp(0.5, first, psi))
                }
            }
        })
    }
}

fn apply_operator(
    energies: &[f64],
    diag_scale: f64,
    drive: &SegmentDrive,
    g: C64,
    x: &DVector<C64>,
    y: &mut DVector<C64>,
) {
    for (k, yk) in y.iter_mut().enumerate() {
        *yk = x[k] * (diag_scale * energies[k]);
    }
    for &(a, b, coef) in &drive.terms {
        let c = coef.eval(g) * drive.vecs[b].dotc(x);
        if c != C64::new(0.0, 0.0) {
            y.axpy(c, &drive.vecs[a], C64::new(1.0, 0.0));
        }
    }
}

/// Segment index and segment-local time of protocol time `t`.
fn locate(protocol: &DriveProtocol, t: f64) -> (usize, f64) {
    let starts = protocol.segment_starts();
    let idx = starts.iter().rposition(|&s| t >= s).unwrap_or(0);
    (idx, t - starts[idx])
}

/// Breakpoints of the integration grid, flagged when they are output
/// samples. Drive discontinuities always fall on a breakpoint.
fn time_grid(protocol: &DriveProtocol, samples: usize) -> Vec<(f64, bool)> {
    let total = protocol.total_duration();
    let tol = 1e-9 * total;
    let mut points: Vec<(f64, bool)> = Vec::new();
    for (s, start) in protocol.segments.iter().zip(protocol.segment_starts()) {
        for b in s.breakpoints() {
            points.push((start + b, false));
        }
    }
    for k in 0..samples {
        let t = if k + 1 == samples { total } else { total * k as f64 / (samples - 1) as f64 };
        match points.iter_mut().find(|p| (p.0 - t).abs() <= tol) {
            Some(p) => p.1 = true,
            None => points.push((t, true)),
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points.dedup_by(|a, b| {
        if (a.0 - b.0).abs() <= tol {
            b.1 |= a.1;
            true
        } else {
            false
        }
    });
    points
}

/// Convenience wrapper: prepares the system and evolves one state.
pub fn evolve(
    spec: &SystemSpec,
    protocol: &DriveProtocol,
    psi0: &NambuVector,
    cfg: &IntegratorConfig,
) -> Result<Evolution> {
    Simulator::new(spec)?.evolve(protocol, psi0, cfg)
}

/// Rounding can push a squared overlap of unit vectors just past 1.
fn unit_clamp(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// `|⟨target, ψ⟩|²`, clamped to `[0, 1]`.
pub fn fidelity(psi: &NambuVector, target: &MajoranaMode) -> f64 {
    unit_clamp(target.vector.dotc(psi).norm_sqr())
}

/// `M_ij = ⟨γ_i, ψ_j(T)⟩` on the basis `(γ1R, γ2L)`.
pub fn project_gate(finals: [&NambuVector; 2], modes: [&NambuVector; 2]) -> Result<ProjectedGate> {
    for v in finals.iter().chain(modes.iter()) {
        if v.len() != finals[0].len() {
            return Err(Error::DimensionMismatch { expected: finals[0].len(), actual: v.len() });
        }
    }
    let m = Matrix2::from_fn(|i, j| modes[i].dotc(finals[j]));
    let leakage = (m.adjoint() * m - Matrix2::identity()).norm();
    Ok(ProjectedGate { gate: Gate2(m), leakage })
}
