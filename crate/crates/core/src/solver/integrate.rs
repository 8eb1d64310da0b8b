//! Strang splitting between the exact linear flow and the nonlinear kick.

use serde::{Deserialize, Serialize};

use super::nonlinear::{Dealias, ForceEvaluator};
use super::picard;
use crate::error::{Error, Result};
use crate::propagators::{s_per, sigma};
use crate::spectral::{pair_sobolev_norm, SpectralField, States, TimeGrid, Trajectory, WavePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Strang,
    Picard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    /// `None` selects [`Dealias::default_for`] the grid.
    pub dealias: Option<Dealias>,
    pub integrator: Integrator,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Largest admissible grid maximum of the solution.
    pub blowup_ceiling: f64,
    /// Store every `sample_every`-th step in the returned trajectory.
    pub sample_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            dealias: None,
            integrator: Integrator::Strang,
            picard_tol: 1e-10,
            picard_max_iter: 60,
            blowup_ceiling: 1e6,
            sample_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    pub fn policy_for(&self, grid: &crate::spectral::GridSpec) -> Dealias {
        self.dealias.unwrap_or_else(|| Dealias::default_for(grid))
    }

    /// Number of steps covering `[0, t_end]`; `t_end` must be a multiple of `dt`.
    pub fn steps(&self, t_end: f64) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step {} must be positive", self.dt)));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidParameter(format!("final time {t_end} must be positive")));
        }
        let steps = (t_end / self.dt).round() as usize;
        if steps == 0 || ((steps as f64) * self.dt - t_end).abs() > 1e-9 * t_end {
            return Err(Error::InvalidParameter(format!("final time {t_end} is not a multiple of dt = {}", self.dt)));
        }
        if self.sample_every == 0 || steps % self.sample_every != 0 {
            return Err(Error::InvalidParameter(format!(
                "sample_every = {} does not divide {steps} steps",
                self.sample_every
            )));
        }
        Ok(steps)
    }

    fn validate_policy(&self, policy: Dealias, dim: usize) -> Result<()> {
        if dim == 3 && !matches!(policy, Dealias::ZeroPad3x | Dealias::TwoThirds) {
            return Err(Error::InvalidParameter(format!(
                "dimension 3 requires zero_pad_3x or two_thirds, got {policy}"
            )));
        }
        Ok(())
    }
}

/// One entry of the energy ledger, at a synchronized state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerRecord {
    pub t: f64,
    pub energy: f64,
    /// `||(v, v_t)||_{H^1 x L^2}`.
    pub h1_norm: f64,
    /// Right side of the energy differential inequality (dimension 4 only).
    pub rhs_bound: f64,
    /// `||z(t)||_{L^6}` and `||z(t)||_{L^inf}` on the evaluation grid.
    pub z_l6: f64,
    pub z_linf: f64,
    /// `||v(t)||_{L^4}` on the evaluation grid.
    pub v_l4: f64,
    /// Running `||z||_{L^3_{[0,t]} L^6}` and `||z||_{L^1_{[0,t]} L^inf}`.
    pub z_l3l6: f64,
    pub z_l1linf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub dim: usize,
    pub dt: f64,
    pub records: Vec<LedgerRecord>,
}

impl EnergyLedger {
    pub fn sup_energy(&self) -> f64 {
        self.records.iter().map(|r| r.energy).fold(0.0, f64::max)
    }

    /// `max_t |E(t) - E(0)| / E(0)`; zero when `E(0) = 0`.
    pub fn relative_drift(&self) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        if first.energy == 0.0 {
            return 0.0;
        }
        self.records.iter().map(|r| (r.energy - first.energy).abs()).fold(0.0, f64::max) / first.energy
    }
}

/// Solver output: the sampled trajectory and the per-step ledger.
#[derive(Debug, Clone)]
pub struct Solution {
    pub trajectory: Trajectory,
    pub ledger: EnergyLedger,
}

impl Solution {
    pub fn final_pair(&self) -> WavePair {
        let n = self.trajectory.len();
        self.trajectory.pair(n - 1).expect("solver stores pairs").into_owned()
    }
}

/// Precomputed multipliers of the exact linear flow over one step.
struct LinearStep {
    cos: Vec<f64>,
    sigma: Vec<f64>,
    ksin: Vec<f64>,
}

impl LinearStep {
    fn new(k: &[f64], h: f64) -> Self {
        let mut cos = Vec::with_capacity(k.len());
        let mut sig = Vec::with_capacity(k.len());
        let mut ksin = Vec::with_capacity(k.len());
        for &kn in k {
            let (s, c) = (h * kn).sin_cos();
            cos.push(c);
            sig.push(sigma(h, kn));
            ksin.push(kn * s);
        }
        Self { cos, sigma: sig, ksin }
    }

    fn apply(&self, pair: &mut WavePair) {
        let p = pair.position.coefficients_mut();
        let v = pair.velocity.coefficients_mut();
        for i in 0..p.len() {
            let (a, b) = (p[i], v[i]);
            p[i] = a * self.cos[i] + b * self.sigma[i];
            v[i] = b * self.cos[i] - a * self.ksin[i];
        }
    }
}

/// Exact position of the free evolution `z` at time `t`.
pub(crate) fn forcing_at(z: &Trajectory, t: f64) -> Result<SpectralField> {
    match z.states() {
        States::Linear { data, .. } => Ok(s_per(t, data).position),
        States::SpaceNorms { .. } => Err(Error::InvalidParameter("forcing trajectory must carry fields".into())),
        _ => {
            let i = z
                .times()
                .index_of(t)
                .ok_or_else(|| Error::Interval(format!("forcing has no node at t = {t} (step {})", z.times().step)))?;
            Ok(z.position(i).expect("field-valued").into_owned())
        }
    }
}

fn check_blowup(t: f64, samples: &[f64], ceiling: f64) -> Result<()> {
    let sup = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(sup <= ceiling) {
        return Err(Error::BlowupGuard { time: t, sup, ceiling });
    }
    Ok(())
}

struct Stepper<'a> {
    eval: ForceEvaluator,
    cfg: &'a SolverConfig,
    step: LinearStep,
}

/// What is added to the evolved field before the force is evaluated.
enum Background<'a> {
    None,
    Linear(&'a Trajectory),
}

impl Background<'_> {
    fn at(&self, t: f64) -> Result<Option<SpectralField>> {
        match self {
            Self::None => Ok(None),
            Self::Linear(z) => forcing_at(z, t).map(Some),
        }
    }
}

fn time_norm_increment(prev: f64, cur: f64, h: f64, q: f64) -> f64 {
    0.5 * h * (prev.powf(q) + cur.powf(q))
}

impl Stepper<'_> {
    fn run(&self, start: WavePair, t_end: f64, background: Background<'_>) -> Result<Solution> {
        let steps = self.cfg.steps(t_end)?;
        let h = self.cfg.dt;
        let dim = self.eval.grid().dim;
        let detailed = matches!(background, Background::Linear(_)) && dim == 4;
        let mut pair = start;
        let mut stored = vec![pair.clone()];
        let mut records = Vec::with_capacity(steps + 1);
        let mut acc_l3 = 0.0;
        let mut acc_l1 = 0.0;
        let mut prev: Option<(f64, f64)> = None;

        let mut record = |t: f64, pair: &WavePair, u_samples: &[f64], z: Option<&SpectralField>| -> LedgerRecord {
            let (energy, rhs, z_l6, z_linf, v_l4) = match z {
                None => (self.eval.energy_with_samples(pair, u_samples), f64::NAN, f64::NAN, f64::NAN, f64::NAN),
                Some(z) => {
                    let v_samples = self.eval.samples(&pair.position);
                    let energy = self.eval.energy_with_samples(pair, &v_samples);
                    if detailed {
                        let z_samples = self.eval.samples(z);
                        let z_l6 = self.eval.lp_from_samples(&z_samples, 6.0);
                        let z_linf = self.eval.lp_from_samples(&z_samples, f64::INFINITY);
                        let v_l4 = self.eval.lp_from_samples(&v_samples, 4.0);
                        let rhs = super::bounds::energy_rate_bound(energy, z_l6, z_linf, v_l4);
                        (energy, rhs, z_l6, z_linf, v_l4)
                    } else {
                        (energy, f64::NAN, f64::NAN, f64::NAN, f64::NAN)
                    }
                }
            };
            if detailed {
                if let Some((p6, pinf)) = prev {
                    acc_l3 += time_norm_increment(p6, z_l6, h, 3.0);
                    acc_l1 += time_norm_increment(pinf, z_linf, h, 1.0);
                }
                prev = Some((z_l6, z_linf));
            }
            LedgerRecord {
                t,
                energy,
                h1_norm: pair_sobolev_norm(pair, 1.0),
                rhs_bound: rhs,
                z_l6,
                z_linf,
                v_l4,
                z_l3l6: if detailed { acc_l3.cbrt() } else { f64::NAN },
                z_l1linf: if detailed { acc_l1 } else { f64::NAN },
            }
        };

        let argument = |pair: &WavePair, z: &Option<SpectralField>| -> SpectralField {
            match z {
                Some(z) => pair.position.add(z).expect("same grid"),
                None => pair.position.clone(),
            }
        };

        let z0 = background.at(0.0)?;
        let first = self.eval.evaluate(&argument(&pair, &z0));
        check_blowup(0.0, &first.samples, self.cfg.blowup_ceiling)?;
        records.push(record(0.0, &pair, &first.samples, z0.as_ref()));
        let mut force = first.force;

        for n in 1..=steps {
            let t = n as f64 * h;
            pair.velocity.add_assign_scaled(&force, -0.5 * h);
            self.step.apply(&mut pair);
            let z = background.at(t)?;
            let eval = self.eval.evaluate(&argument(&pair, &z));
            check_blowup(t, &eval.samples, self.cfg.blowup_ceiling)?;
            force = eval.force;
            pair.velocity.add_assign_scaled(&force, -0.5 * h);
            records.push(record(t, &pair, &eval.samples, z.as_ref()));
            if n % self.cfg.sample_every == 0 {
                stored.push(pair.clone());
            }
        }
        let times = TimeGrid::new(0.0, h * self.cfg.sample_every as f64, stored.len())?;
        Ok(Solution {
            trajectory: Trajectory::from_pairs(times, stored)?,
            ledger: EnergyLedger { dim, dt: h, records },
        })
    }
}

fn stepper<'a>(grid: crate::spectral::GridSpec, cfg: &'a SolverConfig) -> Result<Stepper<'a>> {
    let policy = cfg.policy_for(&grid);
    cfg.validate_policy(policy, grid.dim)?;
    Ok(Stepper { eval: ForceEvaluator::new(grid, policy), cfg, step: LinearStep::new(&grid.wavenumbers(), cfg.dt) })
}

/// Integrates `u_tt - Lap u + F(u) = 0` from `pair0` over `[0, t_end]`.
pub fn solve_full(pair0: &WavePair, t_end: f64, cfg: &SolverConfig) -> Result<Solution> {
    match cfg.integrator {
        Integrator::Strang => stepper(pair0.grid(), cfg)?.run(pair0.clone(), t_end, Background::None),
        Integrator::Picard => {
            let times = TimeGrid::new(0.0, cfg.dt, cfg.steps(t_end)? + 1)?;
            let z = Trajectory::linear(times, pair0.clone(), crate::spectral::LinearFlow::SPer);
            let v = picard::solve_perturbed_picard(&z, t_end, cfg)?;
            let pairs: Vec<WavePair> = (0..v.trajectory.len())
                .map(|i| {
                    let t = v.trajectory.times().time(i);
                    s_per(t, pair0).add(&v.trajectory.pair(i).unwrap()).expect("same grid")
                })
                .collect();
            let policy = cfg.policy_for(&pair0.grid());
            let eval = ForceEvaluator::new(pair0.grid(), policy);
            let records = pairs
                .iter()
                .enumerate()
                .map(|(i, p)| LedgerRecord {
                    t: v.trajectory.times().time(i),
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
            let dim = pair0.grid().dim;
            Ok(Solution {
                trajectory: Trajectory::from_pairs(*v.trajectory.times(), pairs)?,
                ledger: EnergyLedger { dim, dt: cfg.dt, records },
            })
        }
    }
}

/// Integrates `v_tt - Lap v + F(v + z) = 0` from `(v, v_t)(0) = (0, 0)`.
pub fn solve_perturbed(z: &Trajectory, t_end: f64, cfg: &SolverConfig) -> Result<Solution> {
    let grid = z.grid().ok_or_else(|| Error::InvalidParameter("forcing trajectory must carry fields".into()))?;
    if !z.times().covers(0.0, t_end) {
        return Err(Error::Interval(format!(
            "forcing covers [{}, {}], need [0, {t_end}]",
            z.times().start,
            z.times().end()
        )));
    }
    match cfg.integrator {
        Integrator::Strang => stepper(grid, cfg)?.run(WavePair::zeros(grid), t_end, Background::Linear(z)),
        Integrator::Picard => picard::solve_perturbed_picard(z, t_end, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{GridSpec, LinearFlow};

    #[test]
    fn zero_data_stays_zero() {
        let grid = GridSpec::base(4, 8).unwrap();
        let sol = solve_full(&WavePair::zeros(grid), 0.1, &SolverConfig::with_dt(0.01)).unwrap();
        assert_eq!(sol.trajectory.len(), 11);
        assert!(sol.ledger.records.iter().all(|r| r.energy == 0.0));
        assert_eq!(sol.final_pair(), WavePair::zeros(grid));
        let z = Trajectory::linear(TimeGrid::spanning(0.0, 0.1, 10).unwrap(), WavePair::zeros(grid), LinearFlow::SPer);
        let v = solve_perturbed(&z, 0.1, &SolverConfig::with_dt(0.01)).unwrap();
        assert_eq!(v.final_pair(), WavePair::zeros(grid));
    }

    #[test]
    fn rejects_incommensurate_horizon() {
        let grid = GridSpec::base(4, 8).unwrap();
        let cfg = SolverConfig::with_dt(0.03);
        assert!(matches!(solve_full(&WavePair::zeros(grid), 0.1, &cfg), Err(Error::InvalidParameter(_))));
        let cfg = SolverConfig { dealias: Some(Dealias::None), ..SolverConfig::with_dt(0.01) };
        let g3 = GridSpec::base(3, 8).unwrap();
        assert!(solve_full(&WavePair::zeros(g3), 0.1, &cfg).is_err());
    }

    #[test]
    fn blowup_guard_trips_on_large_data() {
        let grid = GridSpec::base(4, 8).unwrap();
        let pair = WavePair::new(SpectralField::constant(grid, 10.0), SpectralField::zeros(grid)).unwrap();
        let cfg = SolverConfig { blowup_ceiling: 5.0, ..SolverConfig::with_dt(0.01) };
        assert!(matches!(solve_full(&pair, 0.1, &cfg), Err(Error::BlowupGuard { .. })));
    }
}
