//! Fixed-point iteration of the Duhamel formulation on a short interval.

use serde::{Deserialize, Serialize};

use super::integrate::{forcing_at, EnergyLedger, LedgerRecord, Solution, SolverConfig};
use super::nonlinear::ForceEvaluator;
use super::partition::strichartz_exponents;
use crate::error::{Error, Result};
use crate::propagators::{duhamel_history, s_per};
use crate::spectral::{pair_sobolev_norm, time_norm, GridSamples, SpectralField, TimeGrid, Trajectory, WavePair};

/// Distances below this fraction of the iterate norm are round-off and do
/// not enter the contraction estimate.
const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Ratio of successive iterate distances above which an interval is
/// considered too long.
pub const MAX_CONTRACTION: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub start: f64,
    pub end: f64,
    /// Converged state at every node of the interval.
    pub states: Vec<WavePair>,
    pub iterations: usize,
    /// `||v^{k+1} - v^k||_X` per iteration.
    pub distances: Vec<f64>,
    /// Largest ratio of successive distances above round-off.
    pub contraction: f64,
}

impl PicardOutcome {
    pub fn endpoint(&self) -> &WavePair {
        self.states.last().expect("at least one node")
    }

    pub fn positions(&self) -> Vec<SpectralField> {
        self.states.iter().map(|p| p.position.clone()).collect()
    }
}

/// Report-friendly view of a [`PicardOutcome`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardSummary {
    pub start: f64,
    pub end: f64,
    pub iterations: usize,
    pub distances: Vec<f64>,
    pub contraction: f64,
}

impl From<&PicardOutcome> for PicardSummary {
    fn from(o: &PicardOutcome) -> Self {
        Self {
            start: o.start,
            end: o.end,
            iterations: o.iterations,
            distances: o.distances.clone(),
            contraction: o.contraction,
        }
    }
}

fn nodes_of(start: f64, end: f64, dt: f64) -> Result<usize> {
    if !(end > start) {
        return Err(Error::Interval(format!("empty interval [{start}, {end}]")));
    }
    let n = ((end - start) / dt).round() as usize;
    if n == 0 || ((n as f64) * dt - (end - start)).abs() > 1e-9 * (end - start).max(dt) {
        return Err(Error::Interval(format!("[{start}, {end}] is not a multiple of dt = {dt}")));
    }
    Ok(n)
}

/// `L^q_t L^r_x` norm of a sampled family of fields on a uniform grid.
pub fn x_norm(fields: &[SpectralField], times: &TimeGrid, q: f64, r: f64) -> Result<f64> {
    let profile: Vec<f64> = fields.iter().map(|f| GridSamples::of(f, 1).lp_norm(r)).collect();
    time_norm(times, &profile, q, times.start, times.end())
}

/// Picard iteration for `v` on `[start, end]` with `v(start) = v_init`,
/// starting from the free evolution of `v_init`.
pub fn picard_local(
    z: &Trajectory,
    interval: (f64, f64),
    v_init: &WavePair,
    cfg: &SolverConfig,
) -> Result<PicardOutcome> {
    picard_local_from(z, interval, v_init, None, cfg)
}

/// [`picard_local`] with an explicit initial iterate (one position per node).
pub fn picard_local_from(
    z: &Trajectory,
    interval: (f64, f64),
    v_init: &WavePair,
    initial: Option<Vec<SpectralField>>,
    cfg: &SolverConfig,
) -> Result<PicardOutcome> {
    let (start, end) = interval;
    let h = cfg.dt;
    let steps = nodes_of(start, end, h)?;
    let times = TimeGrid::new(start, h, steps + 1)?;
    let grid = v_init.grid();
    let dim = grid.dim;
    let (q, r) = strichartz_exponents(dim);
    let eval = ForceEvaluator::new(grid, cfg.policy_for(&grid));
    let zs: Vec<SpectralField> = (0..=steps).map(|j| forcing_at(z, times.time(j))).collect::<Result<_>>()?;
    let free: Vec<WavePair> = (0..=steps).map(|j| s_per(j as f64 * h, v_init)).collect();

    let mut current: Vec<SpectralField> = match initial {
        Some(v) if v.len() == steps + 1 => v,
        Some(v) => {
            return Err(Error::InvalidParameter(format!(
                "initial iterate has {} nodes, interval has {}",
                v.len(),
                steps + 1
            )))
        }
        None => free.iter().map(|p| p.position.clone()).collect(),
    };
    let mut distances = Vec::new();
    let mut contraction = 0.0f64;
    for iteration in 1..=cfg.picard_max_iter {
        let forces: Vec<SpectralField> =
            current.iter().zip(&zs).map(|(v, z)| eval.evaluate(&v.add(z).expect("same grid")).force).collect();
        let duhamel = duhamel_history(&forces, h);
        let next: Vec<WavePair> = free.iter().zip(duhamel).map(|(f, d)| f.add(&d).expect("same grid")).collect();
        let diffs: Vec<SpectralField> =
            next.iter().zip(&current).map(|(n, c)| n.position.sub(c).expect("same grid")).collect();
        let dist = x_norm(&diffs, &times, q, r)?;
        let positions: Vec<SpectralField> = next.iter().map(|p| p.position.clone()).collect();
        let size = x_norm(&positions, &times, q, r)?;
        if let Some(&prev) = distances.last() {
            if prev > ROUNDOFF_FLOOR * size && dist > ROUNDOFF_FLOOR * size {
                contraction = contraction.max(dist / prev);
            }
        }
        distances.push(dist);
        if contraction > MAX_CONTRACTION || !dist.is_finite() {
            return Err(Error::NoContraction {
                start,
                end,
                factor: contraction.max(if dist.is_finite() { 0.0 } else { f64::INFINITY }),
            });
        }
        if dist <= cfg.picard_tol * size || dist == 0.0 {
            return Ok(PicardOutcome { start, end, states: next, iterations: iteration, distances, contraction });
        }
        current = positions;
    }
    Err(Error::NoContraction { start, end, factor: contraction.max(MAX_CONTRACTION) })
}

/// Solves for `v` on `[0, t_end]` by Picard iteration on consecutive
/// windows, halving a window whenever the iteration fails to contract.
pub fn solve_perturbed_picard(z: &Trajectory, t_end: f64, cfg: &SolverConfig) -> Result<Solution> {
    let total = cfg.steps(t_end)?;
    let grid = z.grid().ok_or_else(|| Error::InvalidParameter("forcing trajectory must carry fields".into()))?;
    let eval = ForceEvaluator::new(grid, cfg.policy_for(&grid));
    let h = cfg.dt;
    let mut states = vec![WavePair::zeros(grid)];
    let mut a = 0usize;
    let mut window = total;
    while a < total {
        let b = (a + window).min(total);
        let init = states.last().unwrap().clone();
        match picard_local(z, (a as f64 * h, b as f64 * h), &init, cfg) {
            Ok(out) => {
                states.extend(out.states.into_iter().skip(1));
                a = b;
            }
            Err(Error::NoContraction { .. }) if b - a > 1 => window = (b - a) / 2,
            Err(e) => return Err(e),
        }
    }
    let records = states
        .iter()
        .enumerate()
        .map(|(i, p)| LedgerRecord {
            t: i as f64 * h,
            energy: eval.energy(p),
            h1_norm: pair_sobolev_norm(p, 1.0),
            rhs_bound: f64::NAN,
            z_l6: f64::NAN,
            z_linf: f64::NAN,
            v_l4: f64::NAN,
            z_l3l6: f64::NAN,
            z_l1linf: f64::NAN,
        })
        .collect();
    let stored: Vec<WavePair> = states.into_iter().step_by(cfg.sample_every).collect();
    let times = TimeGrid::new(0.0, h * cfg.sample_every as f64, stored.len())?;
    Ok(Solution {
        trajectory: Trajectory::from_pairs(times, stored)?,
        ledger: EnergyLedger { dim: grid.dim, dt: h, records },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{GridSpec, LinearFlow};

    #[test]
    fn zero_forcing_converges_immediately() {
        let grid = GridSpec::base(4, 8).unwrap();
        let z = Trajectory::linear(TimeGrid::spanning(0.0, 0.2, 10).unwrap(), WavePair::zeros(grid), LinearFlow::SPer);
        let cfg = SolverConfig::with_dt(0.02);
        let out = picard_local(&z, (0.0, 0.2), &WavePair::zeros(grid), &cfg).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.distances, vec![0.0]);
        assert_eq!(*out.endpoint(), WavePair::zeros(grid));
    }

    #[test]
    fn rejects_misaligned_interval() {
        let grid = GridSpec::base(4, 8).unwrap();
        let z = Trajectory::linear(TimeGrid::spanning(0.0, 0.2, 10).unwrap(), WavePair::zeros(grid), LinearFlow::SPer);
        let cfg = SolverConfig::with_dt(0.03);
        assert!(matches!(picard_local(&z, (0.0, 0.2), &WavePair::zeros(grid), &cfg), Err(Error::Interval(_))));
    }
}
