//! Control imperfections: systematic coefficient errors, frozen random
//! site errors on the defect's nearest neighbours, and truncation of the
//! drive support.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::drive::DriveProtocol;
use crate::error::{Error, Result};
use crate::lattice::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystematicCoeffError {
    pub eps1: f64,
    pub eps2: f64,
}

impl SystematicCoeffError {
    pub fn new(eps1: f64, eps2: f64) -> Result<Self> {
        if !(eps1 > -1.0 && eps2 > -1.0) {
            return Err(Error::InvalidParameter(format!("coefficient errors must exceed -1, got ({eps1}, {eps2})")));
        }
        Ok(Self { eps1, eps2 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSiteError {
    pub delta0: f64,
    pub seed: u64,
    pub realization: u64,
}

impl RandomSiteError {
    pub fn new(delta0: f64, seed: u64, realization: u64) -> Result<Self> {
        if !(delta0 >= 0.0) || !delta0.is_finite() {
            return Err(Error::InvalidParameter(format!("delta0 must be non-negative, got {delta0}")));
        }
        Ok(Self { delta0, seed, realization })
    }
}

/// Keeps the `radius` chain sites nearest the defect on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub radius: usize,
}

impl TruncationSpec {
    pub fn validate(&self, spec: &SystemSpec) -> Result<()> {
        let n = spec.chain1.n_sites.min(spec.chain2.n_sites);
        if self.radius > n {
            return Err(Error::InvalidParameter(format!("truncation radius {} exceeds chain length {n}", self.radius)));
        }
        Ok(())
    }
}

/// Scales `c1` and `c2` of every segment without renormalizing.
pub fn apply_systematic(protocol: &DriveProtocol, err: &SystematicCoeffError) -> DriveProtocol {
    let mut p = protocol.clone();
    for s in &mut p.segments {
        s.coefficients.c1 *= 1.0 + err.eps1;
        s.coefficients.c2 *= 1.0 + err.eps2;
    }
    p
}

/// The chain sites adjacent to the defect.
pub fn nearest_neighbor_sites(spec: &SystemSpec) -> [usize; 2] {
    let d = spec.defect_site();
    [d - 1, d + 1]
}

/// Multipliers `1 + δ_n`, `δ_n ~ U[-δ0, δ0]`, one per site.
///
/// Each draw comes from a ChaCha20 stream keyed by the seed, with the
/// realization as stream id and the site as block position, so the map is
/// a pure function of `(seed, realization, site)`.
pub fn sample_site_errors(err: &RandomSiteError, sites: &[usize]) -> BTreeMap<usize, f64> {
    sites
        .iter()
        .map(|&site| {
            if err.delta0 == 0.0 {
                return (site, 1.0);
            }
            let mut rng = ChaCha20Rng::seed_from_u64(err.seed);
            rng.set_stream(err.realization);
            rng.set_word_pos(16 * site as u128);
            (site, 1.0 + rng.random_range(-err.delta0..=err.delta0))
        })
        .collect()
}

/// Multiplies the per-site drive gains of every segment by `gains`.
pub fn apply_site_errors(protocol: &DriveProtocol, gains: &BTreeMap<usize, f64>) -> DriveProtocol {
    let mut p = protocol.clone();
    for s in &mut p.segments {
        for (&site, &g) in gains {
            *s.site_gains.entry(site).or_insert(1.0) *= g;
        }
    }
    p
}

/// Restricts every segment's drive support; a tighter existing truncation
/// is kept.
pub fn apply_truncation(protocol: &DriveProtocol, spec: &TruncationSpec) -> DriveProtocol {
    let mut p = protocol.clone();
    for s in &mut p.segments {
        let radius = s.truncation.map_or(spec.radius, |t| t.radius.min(spec.radius));
        s.truncation = Some(TruncationSpec { radius });
    }
    p
}
