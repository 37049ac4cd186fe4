//! Parameter sweeps over τ, a uniform budget and the chain length.

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiments::{echo, protocol_metrics, Outcome};
use crate::records::Record;

/// One grid point. `budget` of `None` keeps the configured schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub tau: f64,
    pub budget: Option<usize>,
    pub sites: usize,
}

/// A finished grid point: its record, Π_n and any invariant violations.
type PointResult = Result<(Record, f64, Vec<String>), CliError>;

/// Cartesian product in τ-major, then budget, then chain-length order.
pub fn grid(cfg: &ExperimentConfig) -> Vec<GridPoint> {
    let link = cfg.link.as_ref().expect("validated");
    let sweep = cfg.sweep.clone().unwrap_or_default();
    let taus = sweep.tau.unwrap_or_else(|| vec![link.tau]);
    let budgets: Vec<Option<usize>> = sweep.m_k.map_or(vec![None], |v| v.iter().map(|&m| Some(m as usize)).collect());
    let sites: Vec<usize> = sweep.sites.map_or(vec![link.sites as usize], |v| v.iter().map(|&s| s as usize).collect());
    let mut points = Vec::with_capacity(taus.len() * budgets.len() * sites.len());
    for &tau in &taus {
        for &budget in &budgets {
            for &s in &sites {
                points.push(GridPoint { tau, budget, sites: s });
            }
        }
    }
    points
}

/// Runs every grid point on `workers` threads. Records come back in grid
/// order regardless of scheduling, so output is independent of `workers`.
pub fn sweep(cfg: &ExperimentConfig, workers: usize) -> Result<Outcome, CliError> {
    let points = grid(cfg);
    if points.is_empty() {
        return Err(CliError::Config(vec!["sweep: the grid is empty".into()]));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Output(format!("cannot start worker pool: {e}")))?;
    let results: Vec<PointResult> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(index, p)| {
                let model = cfg.model(Some(p.sites), Some(p.tau))?;
                let schedule = cfg.schedule(p.budget)?;
                let mut b = echo(cfg);
                b.put("sweep.index", index);
                let mut violations = Vec::new();
                let pi = protocol_metrics(&model, &schedule, cfg, &mut b, &mut violations)?;
                Ok((b.finish(), pi, violations))
            })
            .collect()
    });
    let mut records = Vec::with_capacity(points.len());
    let mut pis = Vec::with_capacity(points.len());
    let mut violations = Vec::new();
    for r in results {
        let (rec, pi, v) = r?;
        records.push(rec);
        pis.push(pi);
        violations.extend(v);
    }
    flag_monotonicity(&points, &pis, &mut records);
    Ok(Outcome { records, violations })
}

/// Marks each record with whether Π_n is non-decreasing in the uniform
/// budget along its (τ, sites) line.
fn flag_monotonicity(points: &[GridPoint], pis: &[f64], records: &mut [Record]) {
    for (i, p) in points.iter().enumerate() {
        let Some(_) = p.budget else { continue };
        let mut line: Vec<(usize, f64)> = points
            .iter()
            .zip(pis)
            .filter(|(q, _)| q.tau == p.tau && q.sites == p.sites)
            .filter_map(|(q, &pi)| q.budget.map(|m| (m, pi)))
            .collect();
        line.sort_by_key(|&(m, _)| m);
        let monotone = line.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
        records[i].insert("pi_monotone_in_m".into(), monotone.into());
    }
}
