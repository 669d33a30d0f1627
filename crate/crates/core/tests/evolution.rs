use std::f64::consts::{FRAC_PI_2, PI};

use nhbraid::drive::*;
use nhbraid::evolution::*;
use nhbraid::gate::{gate_distance, Gate2};
use nhbraid::imperfections::{apply_truncation, TruncationSpec};
use nhbraid::lattice::*;
use nhbraid::{NambuVector, C64};

fn nominal_sim(defect_energy: f64) -> Simulator {
    let c = ChainParams::new(100, 0.02, 0.1, 0.1).unwrap();
    Simulator::new(&SystemSpec::symmetric(c, defect_energy).unwrap()).unwrap()
}

fn braid() -> DriveProtocol {
    make_braid_protocol(20.0, FRAC_PI_2, FRAC_PI_2, 3.0).unwrap()
}

fn cfg(dt: f64) -> IntegratorConfig {
    IntegratorConfig { dt, ..Default::default() }
}

#[test]
fn zero_drive_keeps_mode_and_gate() {
    let sim = nominal_sim(3.0);
    let env = calibrate_pulse_area(&PulseEnvelope::new(EnvelopeShape::Sin2, 20.0, PI).unwrap(), 0.0).unwrap();
    let seg =
        Segment::new(DriveCoefficients::from_angles(1.0, 0.0), &[env], PhaseSchedule::constant(0.0), 3.0).unwrap();
    let p = DriveProtocol::new(vec![seg]).unwrap();
    let (e1, _, g) = sim.run_gate(&p, &cfg(0.01)).unwrap();
    assert!(e1.series.f_self.iter().all(|f| (f - 1.0).abs() < 1e-12));
    assert!(gate_distance(&g.gate, &Gate2::identity()) < 1e-10);
    assert!(g.gate.max_diff(&Gate2::identity()) < 1e-10);
}

#[test]
fn nominal_braid() {
    let sim = nominal_sim(3.0);
    let (e1, e2, g) = sim.run_gate(&braid(), &cfg(0.01)).unwrap();
    assert!(e1.final_f_target() >= 0.99);
    assert!(e1.final_f_self() <= 0.01);
    assert!(e1.final_f_defect() < 1e-3);
    assert!(e1.norm_drift < 1e-8 && e2.norm_drift < 1e-8);
    assert!(gate_distance(&g.gate, &Gate2::pauli_y()) < 0.02);
    assert!(gate_distance(&g.gate, &braid().oracle_gate()) < 0.02);
    assert_eq!(e1.series.times.len(), 500);
    assert_eq!(e1.series.times[0], 0.0);
    assert_eq!(*e1.series.times.last().unwrap(), 20.0);
    for s in [&e1.series.f_self, &e1.series.f_target, &e1.series.f_defect] {
        assert!(s.iter().all(|f| (0.0..=1.0 + 1e-9).contains(f)));
    }
    // Regression capture of the lab-frame braid.
    assert!((e1.final_f_target() - 0.999_994_408).abs() < 1e-8, "{}", e1.final_f_target());
}

#[test]
fn dt_halving_is_converged() {
    let sim = nominal_sim(3.0);
    let psi = sim.modes().gamma1r.vector.clone();
    let a = sim.evolve(&braid(), &psi, &cfg(0.01)).unwrap().final_f_target();
    let b = sim.evolve(&braid(), &psi, &cfg(0.005)).unwrap().final_f_target();
    assert!((a - b).abs() < 1e-6, "{a} {b}");
    let m = IntegratorConfig { method: IntegratorMethod::FourthOrderMagnus, ..cfg(0.01) };
    let c = sim.evolve(&braid(), &psi, &m).unwrap().final_f_target();
    assert!((c - b).abs() < 1e-6, "{c} {b}");
}

#[test]
fn rotating_frame_agrees_with_lab_frame() {
    let sim = nominal_sim(3.0);
    let psi = sim.modes().gamma1r.vector.clone();
    let lab = sim.evolve(&braid(), &psi, &cfg(0.01)).unwrap();
    let rwa_p = braid().with_rwa(true);
    let rwa = sim.evolve(&rwa_p, &psi, &cfg(0.01)).unwrap();
    assert!((lab.final_f_target() - rwa.final_f_target()).abs() < 1e-2);
    let (_, _, g) = sim.run_gate(&rwa_p, &cfg(0.01)).unwrap();
    assert!(gate_distance(&g.gate, &rwa_p.oracle_gate()) < 1e-6);
}

#[test]
fn backward_integration_recovers_initial_state() {
    let sim = nominal_sim(3.0);
    let psi0 = sim.modes().gamma1r.vector.clone();
    for p in [braid(), braid().with_rwa(true)] {
        let fwd = sim.evolve(&p, &psi0, &cfg(0.01)).unwrap();
        let back = sim.evolve_backward(&p, &fwd.final_state, &cfg(0.0071)).unwrap();
        let f = psi0.dotc(&back).norm_sqr();
        assert!(f > 1.0 - 1e-6, "{f}");
    }
}

#[test]
fn fidelity_examples() {
    let sim = nominal_sim(3.0);
    let m = sim.modes();
    assert!((fidelity(&m.gamma1r.vector, &m.gamma1r) - 1.0).abs() < 1e-14);
    assert!(fidelity(&m.gamma2l.vector, &m.gamma1r) < 1e-20);
    let half = (&m.gamma1r.vector + &m.gamma2l.vector) / C64::new(2f64.sqrt(), 0.0);
    assert!((fidelity(&half, &m.gamma1r) - 0.5).abs() < 1e-14);
}

#[test]
fn gate_projection_and_leakage() {
    let sim = nominal_sim(3.0);
    let m = sim.modes();
    let id = project_gate([&m.gamma1r.vector, &m.gamma2l.vector], [&m.gamma1r.vector, &m.gamma2l.vector]).unwrap();
    assert!(id.leakage < 1e-14);
    id.check(1e-6).unwrap();
    let lost = NambuVector::zeros(m.gamma1r.vector.len());
    let half = project_gate([&lost, &m.gamma2l.vector], [&m.gamma1r.vector, &m.gamma2l.vector]).unwrap();
    assert!((half.leakage - 1.0).abs() < 1e-12);
    assert!(half.check(0.5).is_err());
    let short = NambuVector::zeros(3);
    assert!(project_gate([&short, &lost], [&lost, &lost]).is_err());
}

#[test]
fn rejects_bad_inputs() {
    let sim = nominal_sim(3.0);
    let psi = sim.modes().gamma1r.vector.clone() * C64::new(2.0, 0.0);
    assert!(sim.evolve(&braid(), &psi, &cfg(0.01)).is_err());
    let short = NambuVector::zeros(4);
    assert!(sim.evolve(&braid(), &short, &cfg(0.01)).is_err());
    let coarse = IntegratorConfig { dt: 0.2, ..Default::default() };
    assert!(sim.evolve(&braid(), &sim.modes().gamma1r.vector, &coarse).is_err());
    let tight = IntegratorConfig { tolerance: 1e-18, ..cfg(0.01) };
    assert!(matches!(sim.evolve(&braid(), &sim.modes().gamma1r.vector, &tight), Err(nhbraid::Error::NormDrift { .. })));
}

#[test]
fn dark_mode_is_untouched() {
    let sim = nominal_sim(3.0);
    let p = make_braid_protocol(20.0, 0.0, 0.7, 3.0).unwrap();
    let e = sim.evolve(&p, &sim.modes().gamma2l.vector, &cfg(0.01)).unwrap();
    assert!(e.series.f_target.iter().all(|f| (f - 1.0).abs() < 1e-10));
}

#[test]
fn particle_hole_odd_drive_does_not_braid() {
    // Driving the Λ term together with its Ξ image runs two resonant loops,
    // on |B⟩ and on Ξ|B⟩; at θ = φ = π/2 these are orthogonal and the
    // projected gate is -1 instead of σ_y.
    let sim = nominal_sim(3.0);
    let p = braid().with_coupling(DriveCoupling::ParticleHole);
    let (_, _, g) = sim.run_gate(&p, &cfg(0.01)).unwrap();
    assert!(gate_distance(&g.gate, &Gate2::identity()) < 0.02);
    assert!(gate_distance(&g.gate, &Gate2::pauli_y()) > 0.9);
}

#[test]
fn bulk_excitation_does_not_depend_on_defect_energy() {
    // With a truncated drive the bright vector has a bulk component; in the
    // frame co-rotating with the defect the bulk sits at its own energy
    // relative to the zero modes whatever ε_d is, so moving ε_d out of the
    // band leaves the final bulk population essentially unchanged.
    let tr = TruncationSpec { radius: 1 };
    let pops: Vec<f64> = [0.2, 3.0]
        .iter()
        .map(|&ed| {
            let sim = nominal_sim(ed);
            let p = apply_truncation(&make_braid_protocol(20.0, FRAC_PI_2, FRAC_PI_2, ed).unwrap(), &tr).with_rwa(true);
            sim.evolve(&p, &sim.modes().gamma1r.vector, &cfg(0.01)).unwrap().bulk_population
        })
        .collect();
    let ratio = pops[0] / pops[1];
    assert!(pops[1] > 1e-3);
    assert!(ratio > 0.5 && ratio < 2.0, "{pops:?}");
}

#[test]
fn untruncated_drive_never_reaches_the_bulk() {
    let sim = nominal_sim(3.0);
    let e = sim.evolve(&braid(), &sim.modes().gamma1r.vector, &cfg(0.01)).unwrap();
    assert!(e.bulk_population < 1e-20);
}
