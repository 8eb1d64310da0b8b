//! Monte Carlo estimation of Strichartz-norm tail probabilities for
//! randomized data, sub-Gaussian fits of those tails, and sample statistics
//! of the energy of the nonlinear remainder.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::propagators::sigma;
use crate::randomization::{randomize_with_seed, DistributionKind, SeedSpec};
use crate::solver::{
    energy_inequality_check, partition_by_strichartz, partition_profile, solve_perturbed, strichartz_exponents,
    GronwallBound, SolverConfig,
};
use crate::spectral::{
    mixed_norm, pair_sobolev_norm, time_norm, GridSamples, GridSpec, LinearFlow, MixedNormSpec, SpectralField,
    TimeGrid, Trajectory, WavePair,
};
use rustfft::num_complex::Complex64;

/// Fewest samples accepted by [`estimate_tail`].
pub const MIN_TAIL_SAMPLES: usize = 1000;

/// Number of quantile abscissae of the automatic lambda grid.
pub const QUANTILE_POINTS: usize = 21;

/// Points needed inside the fit window.
pub const MIN_FIT_POINTS: usize = 4;

/// Confidence level of the per-point intervals.
pub const CONFIDENCE: f64 = 0.95;

/// Runs `task(0), ..., task(samples - 1)` on `workers` threads and returns
/// the results in index order.
pub fn run_parallel<T, F>(samples: usize, workers: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 || samples <= 1 {
        return (0..samples).map(task).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..samples).into_par_iter().map(&task).collect()),
        Err(_) => (0..samples).map(task).collect(),
    }
}

/// A Strichartz-type functional `||S(t) u^omega||_{L^q_t(I; L^r_x)}` of the
/// free evolution, sampled on `time_steps` uniform steps of `I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormFunctional {
    pub flow: LinearFlow,
    pub q: f64,
    pub r: f64,
    pub start: f64,
    pub end: f64,
    pub time_steps: usize,
}

impl NormFunctional {
    pub fn new(flow: LinearFlow, q: f64, r: f64, start: f64, end: f64, time_steps: usize) -> Result<Self> {
        MixedNormSpec::new(q, r, start, end)?;
        if time_steps == 0 {
            return Err(Error::InvalidParameter("norm functional needs at least one time step".into()));
        }
        Ok(Self { flow, q, r, start, end, time_steps })
    }

    fn spec(&self) -> Result<MixedNormSpec> {
        MixedNormSpec::new(self.q, self.r, self.start, self.end)
    }

    /// Value of the functional on one (already randomized) data pair.
    pub fn evaluate(&self, data: &WavePair) -> Result<f64> {
        let times = TimeGrid::spanning(self.start, self.end, self.time_steps)?;
        let traj = Trajectory::linear(times, data.clone(), self.flow);
        mixed_norm(&traj, &self.spec()?)
    }

    /// Evaluator with the flow multipliers of every time node precomputed
    /// for `grid`, for repeated evaluation on many samples.
    pub fn sampler(&self, grid: &GridSpec) -> Result<NormSampler> {
        let times = TimeGrid::spanning(self.start, self.end, self.time_steps)?;
        let k = grid.wavenumbers_shared();
        let multipliers = (0..times.len)
            .map(|j| {
                let t = times.time(j);
                k.iter()
                    .map(|&kn| {
                        let (s, c) = (t * kn).sin_cos();
                        match self.flow {
                            LinearFlow::SPer => (c, sigma(t, kn)),
                            LinearFlow::STilde => {
                                let jb = 1.0 + kn;
                                (-kn / jb * s, c / jb)
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(NormSampler { functional: *self, grid: *grid, times, multipliers })
    }
}

/// [`NormFunctional`] bound to a grid, with per-node flow multipliers.
#[derive(Debug, Clone)]
pub struct NormSampler {
    functional: NormFunctional,
    grid: GridSpec,
    times: TimeGrid,
    /// Per node and mode, the factors applied to the position and velocity
    /// coefficients of the data.
    multipliers: Vec<Vec<(f64, f64)>>,
}

impl NormSampler {
    pub fn evaluate(&self, data: &WavePair) -> Result<f64> {
        if data.grid() != self.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", data.grid(), self.grid)));
        }
        let f = &self.functional;
        let u0 = data.position.coefficients();
        let u1 = data.velocity.coefficients();
        let support: Vec<usize> =
            (0..u0.len()).filter(|&i| u0[i] != Complex64::default() || u1[i] != Complex64::default()).collect();
        let mut field = SpectralField::zeros(self.grid);
        let profile: Vec<f64> = self
            .multipliers
            .iter()
            .map(|m| {
                let out = field.coefficients_mut();
                for &i in &support {
                    let (a, b) = m[i];
                    out[i] = u0[i] * a + u1[i] * b;
                }
                GridSamples::of(&field, 1).lp_norm(f.r)
            })
            .collect();
        time_norm(&self.times, &profile, f.q, f.start, f.end)
    }
}

/// Functional values for samples `0..samples` of the randomized data.
pub fn sample_norms(
    functional: &NormFunctional,
    data: &WavePair,
    dist: DistributionKind,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<f64>> {
    let base = SeedSpec::new(seed);
    let sampler = functional.sampler(&data.grid())?;
    run_parallel(samples, workers, |i| {
        let randomized = randomize_with_seed(data, &base.with_sample(i as u64), dist);
        sampler.evaluate(&randomized)
    })
    .into_iter()
    .collect()
}

/// Empirical survival function with Clopper-Pearson intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub lambda: Vec<f64>,
    /// Fraction of samples with norm `> lambda` (`>= 0` at `lambda = 0`).
    pub p_hat: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    pub samples: usize,
}

impl TailCurve {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// Two-sided Clopper-Pearson interval for `successes` out of `trials`.
pub fn clopper_pearson(successes: usize, trials: usize, confidence: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let alpha = 1.0 - confidence;
    let (k, n) = (successes as f64, trials as f64);
    let lo =
        if successes == 0 { 0.0 } else { Beta::new(k, n - k + 1.0).map(|b| b.inverse_cdf(alpha / 2.0)).unwrap_or(0.0) };
    let hi = if successes >= trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k).map(|b| b.inverse_cdf(1.0 - alpha / 2.0)).unwrap_or(1.0)
    };
    (lo, hi)
}

/// Linear-interpolation quantile of sorted values.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() || frac == 0.0 {
        return sorted[lo];
    }
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Automatic abscissae: zero followed by the distinct positive sample
/// quantiles at levels evenly spaced from 0.5 to `1 - 10/M`.
pub fn lambda_grid(sorted: &[f64]) -> Vec<f64> {
    let mut grid = vec![0.0];
    if sorted.is_empty() {
        return grid;
    }
    let m = sorted.len() as f64;
    let top = (1.0 - 10.0 / m).max(0.5);
    for j in 0..QUANTILE_POINTS {
        let p = 0.5 + (top - 0.5) * j as f64 / (QUANTILE_POINTS - 1) as f64;
        let v = quantile(sorted, p);
        if v > *grid.last().unwrap() {
            grid.push(v);
        }
    }
    grid
}

/// Survival curve of `values` on the automatic grid.
pub fn tail_from_samples(values: &[f64]) -> Result<TailCurve> {
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidParameter(format!("norm sample {v} is not a finite nonnegative number")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let lambda = lambda_grid(&sorted);
    let mut curve =
        TailCurve { lambda: Vec::new(), p_hat: Vec::new(), ci_lo: Vec::new(), ci_hi: Vec::new(), samples: m };
    for &l in &lambda {
        let above = if l == 0.0 { m } else { m - sorted.partition_point(|&x| x <= l) };
        let (lo, hi) = clopper_pearson(above, m, CONFIDENCE);
        curve.lambda.push(l);
        curve.p_hat.push(if m == 0 { 1.0 } else { above as f64 / m as f64 });
        curve.ci_lo.push(lo);
        curve.ci_hi.push(hi);
    }
    Ok(curve)
}

/// Samples the functional on `samples` randomizations and tabulates its tail.
pub fn estimate_tail(
    functional: &NormFunctional,
    data: &WavePair,
    dist: DistributionKind,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<TailCurve> {
    if samples < MIN_TAIL_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "tail estimate needs at least {MIN_TAIL_SAMPLES} samples, got {samples}"
        )));
    }
    tail_from_samples(&sample_norms(functional, data, dist, samples, seed, workers)?)
}

/// Weighted least-squares fit `log P = intercept + slope * lambda^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubGaussianFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Range of `lambda` covered by the fitted points.
    pub window: (f64, f64),
    pub points: usize,
}

/// Fits the points with `10/M <= P <= 0.5`, weighting each by the inverse
/// binomial variance of `log P`, `M P / (1 - P)`.
pub fn fit_subgaussian(curve: &TailCurve) -> Result<SubGaussianFit> {
    let m = curve.samples as f64;
    let floor = 10.0 / m;
    let pts: Vec<(f64, f64, f64, f64)> = curve
        .lambda
        .iter()
        .zip(&curve.p_hat)
        .filter(|(_, &p)| p > 0.0 && p < 1.0 && p >= floor && p <= 0.5)
        .map(|(&l, &p)| (l, l * l, p.ln(), m * p / (1.0 - p)))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientTail { points: pts.len(), required: MIN_FIT_POINTS });
    }
    let sw: f64 = pts.iter().map(|p| p.3).sum();
    let mx = pts.iter().map(|p| p.3 * p.1).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.3 * p.2).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.3 * (p.1 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.3 * (p.1 - mx) * (p.2 - my)).sum();
    let syy: f64 = pts.iter().map(|p| p.3 * (p.2 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientTail { points: 1, required: MIN_FIT_POINTS });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| p.3 * (p.2 - intercept - slope * p.1).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(SubGaussianFit { slope, intercept, r_squared, window: (lo, hi), points: pts.len() })
}

/// Settings of an [`energy_statistics`] run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyStatsConfig {
    pub t_end: f64,
    pub samples: usize,
    pub seed: u64,
    pub dist: DistributionKind,
    pub solver: SolverConfig,
    /// Partition budget constant; `None` uses `||(u0, u1)||_{L^2 x H^-1}`.
    pub budget: Option<f64>,
}

/// Outcome for one noise sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEnergy {
    pub index: usize,
    /// `sup_t E(v(t))`.
    pub sup_energy: f64,
    /// Gronwall bound on `sup_t E(v)^{1/2}` (dimension 4 only).
    pub bound: Option<f64>,
    pub violates_bound: bool,
    /// `||z||_{L^3 L^6}` and `||z||_{L^1 L^inf}` (dimension 4 only).
    pub z_l3l6: Option<f64>,
    pub z_l1linf: Option<f64>,
    pub intervals: Option<usize>,
    /// Steps where the energy differential inequality failed (dimension 4 only).
    pub inequality_violations: Option<usize>,
    pub inequality_worst_ratio: Option<f64>,
    pub error: Option<String>,
}

/// Order statistics of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub median: f64,
    pub p90: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self { min: v[0], median: quantile(&v, 0.5), p90: quantile(&v, 0.9), max: v[v.len() - 1] })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySummary {
    pub samples: usize,
    pub failed: usize,
    pub violations: usize,
    pub violation_fraction: f64,
    pub inequality_violations: usize,
    pub sup_energy: Option<Quantiles>,
    /// `sup E^{1/2} / bound`.
    pub bound_ratio: Option<Quantiles>,
    pub intervals: Option<Quantiles>,
    pub budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub config: EnergyStatsConfig,
    pub per_sample: Vec<SampleEnergy>,
    pub summary: EnergySummary,
}

/// Solves for the remainder `v` of every randomized sample and compares its
/// energy with the Gronwall bound. Failed samples are flagged, not fatal.
pub fn energy_statistics(data: &WavePair, cfg: &EnergyStatsConfig, workers: usize) -> Result<EnergyReport> {
    let steps = cfg.solver.steps(cfg.t_end)?;
    let dim = data.grid().dim;
    let budget = cfg.budget.unwrap_or_else(|| pair_sobolev_norm(data, 0.0));
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::InvalidParameter(format!("partition budget {budget} must be finite and nonnegative")));
    }
    let times = TimeGrid::new(0.0, cfg.solver.dt, steps + 1)?;
    let base = SeedSpec::new(cfg.seed);
    let per_sample = run_parallel(cfg.samples, workers, |index| {
        let randomized = randomize_with_seed(data, &base.with_sample(index as u64), cfg.dist);
        let z = Trajectory::linear(times, randomized, LinearFlow::SPer);
        let mut out = SampleEnergy {
            index,
            sup_energy: f64::NAN,
            bound: None,
            violates_bound: false,
            z_l3l6: None,
            z_l1linf: None,
            intervals: None,
            inequality_violations: None,
            inequality_worst_ratio: None,
            error: None,
        };
        let solution = match solve_perturbed(&z, cfg.t_end, &cfg.solver) {
            Ok(s) => s,
            Err(e) => {
                out.error = Some(e.to_string());
                return out;
            }
        };
        let ledger = &solution.ledger;
        out.sup_energy = ledger.sup_energy();
        let detailed = dim == 4 && ledger.records.last().is_some_and(|r| r.z_l3l6.is_finite());
        if detailed {
            let last = ledger.records.last().expect("nonempty ledger");
            let bound = GronwallBound::from_norms(last.z_l3l6, last.z_l1linf);
            out.bound = Some(bound.value);
            out.violates_bound = !(out.sup_energy.sqrt() <= bound.value);
            out.z_l3l6 = Some(last.z_l3l6);
            out.z_l1linf = Some(last.z_l1linf);
            match energy_inequality_check(ledger) {
                Ok(r) => {
                    out.inequality_violations = Some(r.violations);
                    out.inequality_worst_ratio = Some(r.worst_ratio);
                }
                Err(e) => out.error = Some(e.to_string()),
            }
        }
        let partition = if budget == 0.0 {
            Ok(1)
        } else if detailed && strichartz_exponents(dim).1 == 6.0 {
            let profile: Vec<f64> = ledger.records.iter().map(|r| r.z_l6).collect();
            partition_profile(&times, &profile, dim, budget, cfg.t_end).map(|p| p.intervals())
        } else {
            partition_by_strichartz(&z, budget, cfg.t_end).map(|p| p.intervals())
        };
        match partition {
            Ok(n) => out.intervals = Some(n),
            Err(e) if out.error.is_none() => out.error = Some(format!("partition: {e}")),
            Err(_) => {}
        }
        out
    });
    let ok: Vec<&SampleEnergy> = per_sample.iter().filter(|s| s.sup_energy.is_finite()).collect();
    let violations = per_sample.iter().filter(|s| s.violates_bound).count();
    let sup: Vec<f64> = ok.iter().map(|s| s.sup_energy).collect();
    let ratios: Vec<f64> =
        ok.iter().filter_map(|s| s.bound.filter(|b| *b > 0.0).map(|b| s.sup_energy.sqrt() / b)).collect();
    let intervals: Vec<f64> = per_sample.iter().filter_map(|s| s.intervals.map(|n| n as f64)).collect();
    let summary = EnergySummary {
        samples: cfg.samples,
        failed: per_sample.iter().filter(|s| s.error.is_some()).count(),
        violations,
        violation_fraction: if cfg.samples == 0 { 0.0 } else { violations as f64 / cfg.samples as f64 },
        inequality_violations: per_sample.iter().filter_map(|s| s.inequality_violations).sum(),
        sup_energy: Quantiles::of(&sup),
        bound_ratio: Quantiles::of(&ratios),
        intervals: Quantiles::of(&intervals),
        budget,
    };
    Ok(EnergyReport { config: *cfg, per_sample, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_results_keep_index_order() {
        let seq = run_parallel(50, 1, |i| i * i);
        assert_eq!(seq, run_parallel(50, 4, |i| i * i));
        assert!(run_parallel(0, 8, |i| i).is_empty());
    }

    #[test]
    fn clopper_pearson_brackets_the_estimate() {
        let (lo, hi) = clopper_pearson(0, 100, 0.95);
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.01))).abs() < 1e-10);
        let (lo, hi) = clopper_pearson(50, 100, 0.95);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((lo - 0.398_321_1).abs() < 1e-6 && (hi - 0.601_678_9).abs() < 1e-6);
        assert_eq!(clopper_pearson(10, 10, 0.95).1, 1.0);
    }

    #[test]
    fn synthetic_gaussian_tail_is_fitted_exactly() {
        let lambda: Vec<f64> = (0..25).map(|i| 0.6 + 0.05 * i as f64).collect();
        let p_hat: Vec<f64> = lambda.iter().map(|l: &f64| (-2.0 * l * l).exp()).collect();
        let n = lambda.len();
        let curve = TailCurve { lambda, p_hat, ci_lo: vec![0.0; n], ci_hi: vec![1.0; n], samples: 10_000 };
        let fit = fit_subgaussian(&curve).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-10);
        assert!(fit.intercept.abs() < 1e-9);
    }

    #[test]
    fn too_few_tail_points_is_an_error() {
        let curve = TailCurve {
            lambda: vec![0.0, 1.0],
            p_hat: vec![1.0, 0.3],
            ci_lo: vec![0.0; 2],
            ci_hi: vec![1.0; 2],
            samples: 1000,
        };
        assert!(matches!(fit_subgaussian(&curve), Err(Error::InsufficientTail { points: 1, .. })));
    }

    #[test]
    fn tail_curve_is_monotone_and_starts_at_one() {
        let values: Vec<f64> = (0..2000).map(|i| ((i * 7919) % 2000) as f64 / 100.0).collect();
        let curve = tail_from_samples(&values).unwrap();
        assert_eq!(curve.lambda[0], 0.0);
        assert_eq!(curve.p_hat[0], 1.0);
        for w in curve.p_hat.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for w in curve.lambda.windows(2) {
            assert!(w[1] > w[0]);
        }
        for i in 0..curve.len() {
            assert!(curve.ci_lo[i] <= curve.p_hat[i] && curve.p_hat[i] <= curve.ci_hi[i]);
        }
        let empty = tail_from_samples(&[]).unwrap();
        assert_eq!(empty.p_hat, vec![1.0]);
    }

    #[test]
    fn zero_data_gives_zero_energy() {
        let grid = GridSpec::base(4, 8).unwrap();
        let cfg = EnergyStatsConfig {
            t_end: 0.1,
            samples: 3,
            seed: 1,
            dist: DistributionKind::Gaussian,
            solver: SolverConfig::with_dt(0.01),
            budget: None,
        };
        let report = energy_statistics(&WavePair::zeros(grid), &cfg, 1).unwrap();
        assert!(report.per_sample.iter().all(|s| s.sup_energy == 0.0 && !s.violates_bound));
        assert_eq!(report.summary.failed, 0);
    }

    #[test]
    fn single_mode_norm_is_a_multiple_of_the_generator() {
        let grid = GridSpec::base(3, 8).unwrap();
        let mut u = SpectralField::zeros(grid);
        u.set_mode(&[1, 0, 0], Complex64::new(1.0, 0.0)).unwrap();
        let data = WavePair::new(u, SpectralField::zeros(grid)).unwrap();
        let f = NormFunctional::new(LinearFlow::SPer, f64::INFINITY, 2.0, 0.0, 1.0, 8).unwrap();
        let seed = SeedSpec::new(3).with_sample(0);
        let randomized = randomize_with_seed(&data, &seed, DistributionKind::Gaussian);
        let g = randomized.position.coeff(&[1, 0, 0]).norm();
        let expect = (2.0f64 * (2.0 * std::f64::consts::PI).powi(3)).sqrt() * g;
        assert!((f.evaluate(&randomized).unwrap() - expect).abs() < 1e-12 * expect);
        assert!((f.sampler(&grid).unwrap().evaluate(&randomized).unwrap() - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn sampler_matches_direct_evaluation() {
        let grid = GridSpec::base(3, 8).unwrap();
        let data = WavePair::power_law(grid, 3.0, 1.5, 1.0);
        let randomized = randomize_with_seed(&data, &SeedSpec::new(5), DistributionKind::Uniform);
        for flow in [LinearFlow::SPer, LinearFlow::STilde] {
            for (q, r) in [(3.0, 6.0), (f64::INFINITY, 2.0), (2.0, 4.0)] {
                let f = NormFunctional::new(flow, q, r, 0.0, 1.0, 10).unwrap();
                let direct = f.evaluate(&randomized).unwrap();
                let fast = f.sampler(&grid).unwrap().evaluate(&randomized).unwrap();
                assert!((direct - fast).abs() <= 1e-12 * direct, "{flow:?} {q} {r}: {direct} vs {fast}");
            }
        }
    }
}
