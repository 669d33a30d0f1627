//! Turning a resolved configuration into simulations and result rows.

use std::collections::BTreeMap;

use nhbraid::drive::{make_braid_protocol, make_composite_protocol, DriveProtocol};
use nhbraid::evolution::{FidelitySeries, Simulator};
use nhbraid::gate::{composite_rotation, gate_distance, holonomic_gate, Gate2};
use nhbraid::imperfections::{
    apply_site_errors, apply_systematic, apply_truncation, nearest_neighbor_sites, sample_site_errors, RandomSiteError,
    TruncationSpec,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ResolvedConfig, RunConfig};
use crate::error::Result;

/// One line of `summary.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub sweep_value: f64,
    pub realization: u64,
    pub final_f_target: f64,
    pub final_f_self: f64,
    pub final_loss: f64,
    pub gate_distance: f64,
    pub leakage: f64,
}

#[derive(Clone, Debug)]
pub struct SeriesOutput {
    pub tag: String,
    pub series: FidelitySeries,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub series: Vec<SeriesOutput>,
    pub calibration_factor: f64,
    pub leakage_breaches: usize,
}

impl RunConfig {
    /// Loop angles of the single-loop protocol.
    fn single_angles(&self) -> (f64, f64) {
        if self.compare_composite {
            self.compare_angles
        } else {
            (self.theta, self.phi)
        }
    }

    /// The ideal protocol, before random site errors.
    pub fn protocol(&self, composite: bool) -> Result<DriveProtocol> {
        let omega = self.frequency;
        let mut p = if composite {
            make_composite_protocol(self.duration, self.split * self.duration, self.theta, self.phi, omega, self.order)?
        } else {
            let (theta, phi) = self.single_angles();
            make_braid_protocol(self.duration, theta, phi, omega)?
        };
        p = p.with_phase_offset(self.phase0).with_rwa(self.rwa).with_coupling(self.coupling);
        if let Some(radius) = self.truncation {
            p = apply_truncation(&p, &TruncationSpec { radius });
        }
        if self.systematic.eps1 != 0.0 || self.systematic.eps2 != 0.0 {
            p = apply_systematic(&p, &self.systematic);
        }
        Ok(p)
    }

    /// The gate the protocol is meant to implement on `{γ1R, γ2L}`.
    pub fn target_gate(&self, composite: bool) -> Gate2 {
        if composite {
            composite_rotation(self.theta, self.phi, self.order)
        } else {
            let (theta, phi) = self.single_angles();
            holonomic_gate(theta, phi)
        }
    }
}

struct Job {
    variant: usize,
    point: usize,
    realization: u64,
}

/// Runs every (variant, sweep point, realization) of a scenario.
///
/// Jobs run in parallel on the current rayon pool; rows come back sorted by
/// (scenario tag, sweep value, realization) whatever the schedule.
pub fn run_scenario(cfg: &ResolvedConfig) -> Result<RunOutput> {
    let points = cfg.points()?;
    let base = &points[0].1;
    let swept = cfg.sweep()?.is_some();
    let name = cfg.scenario.as_str();
    let variants: Vec<(String, bool)> = if base.compare_composite {
        vec![(format!("{name}-composite"), true), (format!("{name}-single"), false)]
    } else {
        vec![(name.to_string(), base.composite)]
    };

    let sims =
        points.par_iter().map(|(_, rc)| Simulator::new(&rc.system).map_err(Into::into)).collect::<Result<Vec<_>>>()?;

    let jobs: Vec<Job> = (0..variants.len())
        .flat_map(|variant| {
            points.iter().enumerate().flat_map(move |(point, (_, rc))| {
                (0..rc.realizations as u64).map(move |realization| Job { variant, point, realization })
            })
        })
        .collect();
    let single_job = jobs.len() == 1;

    let results = jobs
        .par_iter()
        .map(|job| {
            let (value, rc) = &points[job.point];
            let (tag, composite) = &variants[job.variant];
            let mut protocol = rc.protocol(*composite)?;
            if rc.delta0 > 0.0 {
                let err = RandomSiteError::new(rc.delta0, rc.seed, job.realization)?;
                let gains = sample_site_errors(&err, &nearest_neighbor_sites(&rc.system));
                protocol = apply_site_errors(&protocol, &gains);
            }
            let (e1, _, projected) = sims[job.point].run_gate(&protocol, &rc.integrator)?;
            let f_target = e1.final_f_target();
            let row = ResultRow {
                scenario: tag.clone(),
                sweep_value: *value,
                realization: job.realization,
                final_f_target: f_target,
                final_f_self: e1.final_f_self(),
                final_loss: 1.0 - f_target,
                gate_distance: gate_distance(&projected.gate, &rc.target_gate(*composite)),
                leakage: projected.leakage,
            };
            let series = rc.series.then(|| SeriesOutput {
                tag: if single_job {
                    tag.clone()
                } else if swept {
                    format!("{tag}_p{:03}_r{:03}", job.point, job.realization)
                } else {
                    format!("{tag}_r{:03}", job.realization)
                },
                series: e1.series,
            });
            let breach = projected.check(rc.leakage_threshold).is_err();
            Ok((row, series, breach))
        })
        .collect::<Result<Vec<_>>>()?;

    let leakage_breaches = results.iter().filter(|r| r.2).count();
    let mut rows = Vec::with_capacity(results.len());
    let mut series = Vec::new();
    for (row, s, _) in results {
        rows.push(row);
        series.extend(s);
    }
    sort_rows(&mut rows);
    series.sort_by(|a, b| a.tag.cmp(&b.tag));
    Ok(RunOutput {
        rows,
        series,
        calibration_factor: base.protocol(base.composite)?.calibration_factor(),
        leakage_breaches,
    })
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.scenario
            .cmp(&b.scenario)
            .then(a.sweep_value.total_cmp(&b.sweep_value))
            .then(a.realization.cmp(&b.realization))
    });
}

/// Mean and standard error of the loss per (scenario, sweep value).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub scenario: String,
    pub sweep_value: f64,
    pub realizations: usize,
    pub mean_loss: f64,
    pub stderr_loss: f64,
    pub mean_gate_distance: f64,
}

pub fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(String, u64), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.scenario.clone(), r.sweep_value.to_bits())).or_default().push(r);
    }
    let mut out: Vec<AggregateRow> = groups
        .into_values()
        .map(|g| {
            let n = g.len() as f64;
            let mean = g.iter().map(|r| r.final_loss).sum::<f64>() / n;
            let var = if g.len() > 1 {
                g.iter().map(|r| (r.final_loss - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            AggregateRow {
                scenario: g[0].scenario.clone(),
                sweep_value: g[0].sweep_value,
                realizations: g.len(),
                mean_loss: mean,
                stderr_loss: (var / n).sqrt(),
                mean_gate_distance: g.iter().map(|r| r.gate_distance).sum::<f64>() / n,
            }
        })
        .collect();
    out.sort_by(|a, b| a.scenario.cmp(&b.scenario).then(a.sweep_value.total_cmp(&b.sweep_value)));
    out
}
