//! Scenario drivers: emulation of the whole space by an extended torus and
//! finite speed of propagation, truncation sweeps, uniqueness of the
//! remainder by contraction, and the cutoff norm-equivalence checks.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagators::s_per;
use crate::randomization::{
    cutoff_embed, eta_axis, japanese_bracket, randomize_with_seed, required_period, smooth_step, DistributionKind,
    SeedSpec,
};
use crate::solver::{
    partition_by_strichartz, picard_local_from, solve_full, solve_perturbed, strichartz_exponents, x_norm,
    PartitionResult, PicardSummary, SolverConfig,
};
use crate::spectral::{
    lp_project, pair_sobolev_norm, sobolev_norm, GridSpec, LinearFlow, ProjectionMode, SpectralField, TimeGrid,
    Trajectory, WavePair,
};

/// Settings of a finite-speed-of-propagation comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FspConfig {
    pub base: GridSpec,
    /// Odd period multiplier of the extended torus.
    pub extension: usize,
    /// Scale of the spatial cutoff.
    pub cutoff: f64,
    /// Final comparison time, at most `cutoff`.
    pub horizon: f64,
    /// Extra grid cells removed from the comparison region beyond the light cone.
    pub margin_cells: usize,
    /// Compare every `output_every` solver steps.
    pub output_every: usize,
    /// Evolve with the free flow only.
    pub linear_only: bool,
    pub solver: SolverConfig,
}

impl FspConfig {
    pub fn new(base: GridSpec, extension: usize, cutoff: f64, horizon: f64, solver: SolverConfig) -> Self {
        Self { base, extension, cutoff, horizon, margin_cells: 2, output_every: 1, linear_only: false, solver }
    }

    /// `2 pi m >= 4 <T> + 2 + 2 horizon`, so that the support of the cutoff
    /// data and its domain of influence stay inside one extended cell.
    pub fn validate(&self) -> Result<GridSpec> {
        if !(self.horizon > 0.0) || self.horizon > self.cutoff {
            return Err(Error::InvalidParameter(format!(
                "horizon {} must lie in (0, cutoff = {}]",
                self.horizon, self.cutoff
            )));
        }
        if self.output_every == 0 {
            return Err(Error::InvalidParameter("output_every must be positive".into()));
        }
        let ext = self.base.extended(self.extension)?;
        let required = required_period(self.cutoff) + 2.0 * self.horizon;
        if ext.period() < required {
            return Err(Error::ExtensionTooSmall { required, available: ext.period() });
        }
        Ok(ext)
    }

    /// Half-width of the comparison cube at time `t`: the cutoff plateau
    /// `<T>`, less `margin_cells + ceil(t / dx)` cells, inside the central cell.
    pub fn region_half_width(&self, t: f64) -> f64 {
        let dx = self.base.spacing();
        let cone = (t / dx - 1e-9).ceil().max(0.0);
        let plateau = japanese_bracket(self.cutoff) - (self.margin_cells as f64 + cone) * dx;
        plateau.min(std::f64::consts::PI - 0.5 * dx)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FspRecord {
    pub t: f64,
    pub max_discrepancy: f64,
    /// Grid points in the comparison region.
    pub region_points: usize,
    /// Largest `|u_per|` in the region, for scale.
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FspReport {
    pub config: FspConfig,
    pub extended: GridSpec,
    pub records: Vec<FspRecord>,
    pub max_discrepancy: f64,
}

/// Largest `|a - b|` over extended-grid points in the comparison cube, with
/// `b` sampled on the base grid of the same spacing.
fn region_discrepancy(
    ext_samples: &[f64],
    ext: &GridSpec,
    base_samples: &[f64],
    base: &GridSpec,
    half: f64,
) -> (f64, usize, f64) {
    let (ne, nb, d) = (ext.modes, base.modes, ext.dim);
    let inside: Vec<Option<usize>> = (0..ne)
        .map(|j| {
            let x = ext.coordinate(j);
            (x.abs() <= half).then(|| base.position(ext.signed(j)).expect("region lies in the central cell"))
        })
        .collect();
    let axis: Vec<usize> = (0..ne).filter(|&j| inside[j].is_some()).collect();
    if axis.is_empty() {
        return (0.0, 0, 0.0);
    }
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut count = 0;
    let mut digits = vec![0usize; d];
    loop {
        let (mut ei, mut bi) = (0usize, 0usize);
        for &k in &digits {
            let j = axis[k];
            ei = ei * ne + j;
            bi = bi * nb + inside[j].unwrap();
        }
        worst = worst.max((ext_samples[ei] - base_samples[bi]).abs());
        scale = scale.max(base_samples[bi].abs());
        count += 1;
        let mut a = d;
        loop {
            if a == 0 {
                return (worst, count, scale);
            }
            a -= 1;
            digits[a] += 1;
            if digits[a] < axis.len() {
                break;
            }
            digits[a] = 0;
        }
    }
}

/// Evolves the cutoff of the randomized data on the extended torus and the
/// periodic data on the base torus, and compares them inside the light cone
/// of the cutoff plateau.
pub fn fsp_experiment(cfg: &FspConfig, data: &WavePair, dist: DistributionKind, seed: u64) -> Result<FspReport> {
    cfg.validate()?;
    if data.grid() != cfg.base {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", data.grid(), cfg.base)));
    }
    fsp_compare(cfg, &randomize_with_seed(data, &SeedSpec::new(seed), dist))
}

/// [`fsp_experiment`] for data that is already randomized (or deterministic).
pub fn fsp_compare(cfg: &FspConfig, randomized: &WavePair) -> Result<FspReport> {
    let ext = cfg.validate()?;
    if randomized.grid() != cfg.base {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", randomized.grid(), cfg.base)));
    }
    let steps = cfg.solver.steps(cfg.horizon)?;
    if steps % cfg.output_every != 0 {
        return Err(Error::InvalidParameter(format!(
            "output_every = {} does not divide {steps} steps",
            cfg.output_every
        )));
    }
    let embedded = WavePair::new(
        cutoff_embed(&randomized.position, cfg.cutoff, cfg.extension)?,
        cutoff_embed(&randomized.velocity, cfg.cutoff, cfg.extension)?,
    )?;
    let segment = cfg.solver.dt * cfg.output_every as f64;
    let segment_cfg = SolverConfig { sample_every: cfg.output_every, ..cfg.solver };
    let mut records = Vec::new();
    let mut big = embedded.clone();
    let mut small = randomized.clone();
    for k in 0..=steps / cfg.output_every {
        let t = k as f64 * segment;
        if k > 0 {
            if cfg.linear_only {
                big = s_per(t, &embedded);
                small = s_per(t, randomized);
            } else {
                big = solve_full(&big, segment, &segment_cfg)?.final_pair();
                small = solve_full(&small, segment, &segment_cfg)?.final_pair();
            }
        }
        let half = cfg.region_half_width(t);
        let (max_discrepancy, region_points, max_abs) =
            region_discrepancy(&big.position.synthesize(), &ext, &small.position.synthesize(), &cfg.base, half);
        records.push(FspRecord { t, max_discrepancy, region_points, max_abs });
    }
    let max_discrepancy = records.iter().map(|r| r.max_discrepancy).fold(0.0, f64::max);
    Ok(FspReport { config: *cfg, extended: ext, records, max_discrepancy })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: u64,
    /// `sup_t ||(v - v_N)(t)||_{H^1 x L^2}`.
    pub h1_err: f64,
    /// `||v - v_N||_{L^q_T L^{2q}_x}`, `q = (d+2)/(d-2)`.
    pub strichartz_err: f64,
    /// `sup_t ||(z - z_N)(t)||_{H^1 x L^2}` over the output nodes.
    pub z_h1_err: f64,
    /// `||P_{>N} (u0, u1)||_{H^1 x L^2}` of the randomized data.
    pub data_tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub grid: GridSpec,
    pub t_end: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Both error columns nonincreasing in the level, up to `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].h1_err <= w[0].h1_err + slack && w[1].strichartz_err <= w[0].strichartz_err + slack)
    }
}

fn truncated(pair: &WavePair, level: u64) -> Result<WavePair> {
    WavePair::new(
        lp_project(&pair.position, level, ProjectionMode::AtMost)?,
        lp_project(&pair.velocity, level, ProjectionMode::AtMost)?,
    )
}

/// Solves for the remainder with the randomized data and with its
/// truncations `P_{<= N_k}`, and tabulates the differences.
pub fn truncation_convergence(
    data: &WavePair,
    dist: DistributionKind,
    seed: u64,
    levels: &[u64],
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<ConvergenceTable> {
    let grid = data.grid();
    let top = (grid.modes as f64 / 2.0) * (grid.dim as f64).sqrt();
    if levels.is_empty() {
        return Err(Error::InvalidParameter("no truncation levels".into()));
    }
    for w in levels.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParameter(format!("levels must increase strictly, got {levels:?}")));
        }
    }
    if let Some(l) = levels.iter().find(|&&l| l == 0 || !l.is_power_of_two() || l as f64 > top + 1e-9) {
        return Err(Error::InvalidParameter(format!("level {l} is not a power of two up to {top}")));
    }
    let steps = cfg.steps(t_end)?;
    let (q, r) = strichartz_exponents(grid.dim);
    let times = TimeGrid::new(0.0, cfg.dt, steps + 1)?;
    let full_data = randomize_with_seed(data, &SeedSpec::new(seed), dist);
    let reference = solve_perturbed(&Trajectory::linear(times, full_data.clone(), LinearFlow::SPer), t_end, cfg)?;
    let out_times = *reference.trajectory.times();
    let mut rows = Vec::new();
    for &level in levels {
        let cut = truncated(&full_data, level)?;
        let tail = full_data.sub(&cut)?;
        let run = solve_perturbed(&Trajectory::linear(times, cut, LinearFlow::SPer), t_end, cfg)?;
        let mut h1_err = 0.0f64;
        let mut z_h1_err = 0.0f64;
        let mut diffs = Vec::with_capacity(out_times.len);
        for i in 0..out_times.len {
            let a = reference.trajectory.pair(i).expect("solver stores pairs");
            let b = run.trajectory.pair(i).expect("solver stores pairs");
            let diff = a.sub(&*b)?;
            h1_err = h1_err.max(pair_sobolev_norm(&diff, 1.0));
            z_h1_err = z_h1_err.max(pair_sobolev_norm(&s_per(out_times.time(i), &tail), 1.0));
            diffs.push(diff.position);
        }
        let strichartz_err = x_norm(&diffs, &out_times, q, r)?;
        rows.push(ConvergenceRow { level, h1_err, strichartz_err, z_h1_err, data_tail: pair_sobolev_norm(&tail, 1.0) });
    }
    Ok(ConvergenceTable { grid, t_end, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessInterval {
    pub start: f64,
    pub end: f64,
    pub from_free: PicardSummary,
    pub from_perturbed: PicardSummary,
    /// `||v_1 - v_2||_X` between the two limits over the interval.
    pub limit_distance: f64,
    /// `||v_1||_X`, for scale.
    pub limit_size: f64,
    /// Endpoint `||(v_1 - v_2)(end)||_{H^1 x L^2}`.
    pub endpoint_distance: f64,
    pub contraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub partition: PartitionResult,
    pub intervals: Vec<UniquenessInterval>,
    pub max_contraction: f64,
    /// Largest `limit_distance / max(limit_size, tiny)`.
    pub max_relative_distance: f64,
}

/// Runs the Picard scheme on every interval of the Strichartz partition of
/// `z`, once from the free evolution and once from an iterate perturbed by
/// a random field of `H^1` size `perturbation`, carrying the first limit
/// across intervals.
pub fn uniqueness_check(
    z: &Trajectory,
    t_end: f64,
    budget: f64,
    perturbation: f64,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<UniquenessReport> {
    let grid = z.grid().ok_or_else(|| Error::InvalidParameter("forcing trajectory must carry fields".into()))?;
    let partition = partition_by_strichartz(z, budget, t_end)?;
    let (q, r) = strichartz_exponents(grid.dim);
    let bump = {
        let shape = WavePair::power_law(grid, grid.modes as f64 / 4.0, 2.0, 1.0);
        let noise = randomize_with_seed(&shape, &SeedSpec::new(seed), DistributionKind::Gaussian).position;
        let size = sobolev_norm(&noise, 1.0);
        if size > 0.0 {
            noise.scaled(perturbation / size)
        } else {
            noise
        }
    };
    let mut v_init = WavePair::zeros(grid);
    let mut intervals = Vec::new();
    for w in partition.breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let first = picard_local_from(z, (a, b), &v_init, None, cfg)?;
        let nodes = first.states.len();
        let start: Vec<SpectralField> =
            (0..nodes).map(|j| s_per(j as f64 * cfg.dt, &v_init).position.add(&bump).expect("same grid")).collect();
        let second = picard_local_from(z, (a, b), &v_init, Some(start), cfg)?;
        let local = TimeGrid::new(a, cfg.dt, nodes)?;
        let diffs: Vec<SpectralField> = first
            .states
            .iter()
            .zip(&second.states)
            .map(|(x, y)| x.position.sub(&y.position).expect("same grid"))
            .collect();
        let limit_distance = x_norm(&diffs, &local, q, r)?;
        let limit_size = x_norm(&first.positions(), &local, q, r)?;
        let endpoint_distance = pair_sobolev_norm(&first.endpoint().sub(second.endpoint())?, 1.0);
        let contraction = first.contraction.max(second.contraction);
        v_init = first.endpoint().clone();
        intervals.push(UniquenessInterval {
            start: a,
            end: b,
            from_free: (&first).into(),
            from_perturbed: (&second).into(),
            limit_distance,
            limit_size,
            endpoint_distance,
            contraction,
        });
    }
    let max_contraction = intervals.iter().map(|i| i.contraction).fold(0.0, f64::max);
    let max_relative_distance = intervals
        .iter()
        .map(|i| if i.limit_distance == 0.0 { 0.0 } else { i.limit_distance / i.limit_size.max(f64::MIN_POSITIVE) })
        .fold(0.0, f64::max);
    Ok(UniquenessReport { partition, intervals, max_contraction, max_relative_distance })
}

/// Smallest odd period multiplier fitting the cutoff at scale `t`.
pub fn extension_for(t: f64) -> usize {
    let m = (required_period(t) / (2.0 * std::f64::consts::PI)).ceil() as usize;
    if m % 2 == 0 {
        m + 1
    } else {
        m.max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRatio {
    pub t: f64,
    pub s: f64,
    pub extension: usize,
    /// `||eta_T f||_{H^s}` on the extended torus.
    pub cutoff_norm: f64,
    /// `||f||_{H^s}` on the base torus.
    pub base_norm: f64,
    /// `cutoff_norm / (<T>^{d/2} base_norm)`.
    pub ratio: f64,
    /// For `s = 0`: quadrature of `||f||_{L^2}` over the cutoff plateau and
    /// of `||eta_T f||_{L^2}`, on the same extended-grid samples.
    pub plateau_l2: Option<f64>,
    pub cutoff_l2: Option<f64>,
}

impl NormRatio {
    /// `||f||_{L^2(plateau)} <= ||eta_T f||_{L^2}` where recorded.
    pub fn lower_bound_holds(&self) -> Option<bool> {
        Some(self.plateau_l2? <= self.cutoff_l2?)
    }
}

/// Compares `||eta_T f||_{H^s}` on the extended torus with
/// `<T>^{d/2} ||f||_{H^s}` on the base torus for each `T`. `extension`
/// overrides the automatic period multiplier.
pub fn norm_equivalence(f: &SpectralField, s: f64, ts: &[f64], extension: Option<usize>) -> Result<Vec<NormRatio>> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("smoothness {s} outside [0, 1)")));
    }
    let base_norm = sobolev_norm(f, s);
    let d = f.grid().dim as f64;
    ts.iter()
        .map(|&t| {
            let m = extension.unwrap_or_else(|| extension_for(t));
            let g = cutoff_embed(f, t, m)?;
            let cutoff_norm = sobolev_norm(&g, s);
            let scale = japanese_bracket(t).powf(d / 2.0) * base_norm;
            let (plateau_l2, cutoff_l2) = if s == 0.0 { plateau_comparison(f, t, &g) } else { (None, None) };
            Ok(NormRatio {
                t,
                s,
                extension: m,
                cutoff_norm,
                base_norm,
                ratio: if scale == 0.0 { 0.0 } else { cutoff_norm / scale },
                plateau_l2,
                cutoff_l2,
            })
        })
        .collect()
}

/// Quadratures of `|f|^2` over `[-<T>, <T>]^d` and of `|eta_T f|^2` over the
/// extended cell, from the same samples.
fn plateau_comparison(f: &SpectralField, t: f64, cutoff: &SpectralField) -> (Option<f64>, Option<f64>) {
    let ext = cutoff.grid();
    let base = f.grid();
    let half = japanese_bracket(t);
    let fs = f.synthesize();
    let eta = eta_axis(&ext, t);
    let (ne, nb, d) = (ext.modes, base.modes, ext.dim);
    let mut inner = 0.0;
    let mut outer = 0.0;
    for idx in 0..ext.len() {
        let mut rem = idx;
        let mut weight = 1.0;
        let mut in_cube = true;
        let mut bi = 0;
        let mut stride = 1;
        for _ in 0..d {
            let j = rem % ne;
            rem /= ne;
            weight *= eta[j];
            in_cube &= ext.coordinate(j).abs() <= half;
            bi += (j % nb) * stride;
            stride *= nb;
        }
        let v = fs[bi];
        let w = weight * v;
        outer += w * w;
        if in_cube {
            inner += v * v;
        }
    }
    let cell = ext.cell_volume();
    (Some((inner * cell).sqrt()), Some((outer * cell).sqrt()))
}

/// One-dimensional window `psi(x) = S(x + 1) - S(x)` with `S` the smooth
/// step: supported in `(-1, 1)`, and its integer translates sum to one.
pub fn modulation_window(x: f64) -> f64 {
    smooth_step(x + 1.0) - smooth_step(x)
}

/// `max |sum_n psi(xi - n) - 1|` over the frequencies of `grid`, per axis.
pub fn partition_of_unity_defect(grid: &GridSpec) -> f64 {
    let m = grid.period_multiplier as f64;
    (0..grid.modes)
        .map(|j| {
            let xi = grid.signed(j) as f64 / m;
            let lo = xi.floor() as i64 - 1;
            let sum: f64 = (lo..=lo + 3).map(|n| modulation_window(xi - n as f64)).sum();
            (sum - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Ratio bound between `modulation_norm(g, 0)` and `||g||_{L^2}` for `g`
/// with spectrum in one unit cube: at most `2^d` windows overlap.
pub fn overlap_constant(dim: usize) -> f64 {
    2f64.powf(dim as f64 / 2.0)
}

/// `sum_n <n>^s ||psi(D - n) g||_{L^2}` over lattice points `n` in `Z^d`.
pub fn modulation_norm(g: &SpectralField, s: f64) -> f64 {
    let grid = g.grid();
    let m = grid.period_multiplier as f64;
    let d = grid.dim;
    let mut pieces: HashMap<Vec<i64>, f64> = HashMap::new();
    let mut xi = vec![0.0; d];
    for (idx, c) in g.coefficients().iter().enumerate() {
        let mag = c.norm_sqr();
        if mag == 0.0 {
            continue;
        }
        let n = grid.lattice(idx);
        for a in 0..d {
            xi[a] = n[a] as f64 / m;
        }
        // Windows centered at floor(xi_a) and floor(xi_a) + 1 on each axis.
        for corner in 0..(1usize << d) {
            let mut weight = 1.0;
            let mut key = Vec::with_capacity(d);
            for a in 0..d {
                let center = xi[a].floor() as i64 + ((corner >> a) & 1) as i64;
                weight *= modulation_window(xi[a] - center as f64);
                key.push(center);
            }
            if weight != 0.0 {
                *pieces.entry(key).or_insert(0.0) += weight * weight * mag;
            }
        }
    }
    let vol = grid.volume();
    let mut keys: Vec<&Vec<i64>> = pieces.keys().collect();
    keys.sort();
    keys.iter()
        .map(|k| {
            let norm = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
            (1.0 + norm).powf(s) * (vol * pieces[*k]).sqrt()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::num_complex::Complex64;

    #[test]
    fn zero_data_has_zero_discrepancy() {
        let base = GridSpec::base(3, 8).unwrap();
        let mut cfg = FspConfig::new(base, 3, 1.0, 0.5, SolverConfig::with_dt(0.05));
        cfg.output_every = 5;
        let report = fsp_experiment(&cfg, &WavePair::zeros(base), DistributionKind::Gaussian, 1).unwrap();
        assert_eq!(report.records.len(), 3);
        assert_eq!(report.max_discrepancy, 0.0);
        cfg.linear_only = true;
        let report = fsp_experiment(&cfg, &WavePair::zeros(base), DistributionKind::Bernoulli, 1).unwrap();
        assert_eq!(report.max_discrepancy, 0.0);
    }

    #[test]
    fn fsp_rejects_short_extension_and_long_horizon() {
        let base = GridSpec::base(3, 8).unwrap();
        let cfg = FspConfig::new(base, 1, 1.0, 0.5, SolverConfig::with_dt(0.05));
        assert!(matches!(cfg.validate(), Err(Error::ExtensionTooSmall { .. })));
        let cfg = FspConfig::new(base, 3, 1.0, 1.5, SolverConfig::with_dt(0.05));
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter(_))));
        // 6 pi < 4 * 3.4 + 2 + 2 * 2.4.
        let cfg = FspConfig::new(base, 3, 2.4, 2.4, SolverConfig::with_dt(0.05));
        assert!(matches!(cfg.validate(), Err(Error::ExtensionTooSmall { .. })));
    }

    #[test]
    fn region_shrinks_with_time() {
        let base = GridSpec::base(3, 16).unwrap();
        let cfg = FspConfig::new(base, 3, 2.0, 1.0, SolverConfig::with_dt(0.01));
        let dx = base.spacing();
        assert!((cfg.region_half_width(0.0) - (3.0 - 2.0 * dx)).abs() < 1e-12);
        assert!((cfg.region_half_width(dx) - (3.0 - 3.0 * dx)).abs() < 1e-12);
        assert!(cfg.region_half_width(1.0) < cfg.region_half_width(0.5));
    }

    #[test]
    fn windows_form_a_partition_of_unity() {
        for m in [1, 3, 5] {
            let grid = GridSpec::new_unchecked_dim(3, 16 * m, m).unwrap();
            assert!(partition_of_unity_defect(&grid) <= 1e-12);
        }
        assert_eq!(modulation_window(1.0), 0.0);
        assert_eq!(modulation_window(-1.0), 0.0);
        assert!((modulation_window(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn modulation_norm_of_single_modes() {
        let grid = GridSpec::base(3, 8).unwrap();
        let vol = grid.volume();
        let c = SpectralField::constant(grid, 2.0);
        assert!((modulation_norm(&c, 0.5) - 2.0 * vol.sqrt()).abs() < 1e-12);
        // cos(x_1) splits into the lattice points (1,0,0) and (-1,0,0).
        let mut u = SpectralField::zeros(grid);
        u.set_mode(&[1, 0, 0], Complex64::new(0.5, 0.0)).unwrap();
        let expect = 2.0 * 2f64.powf(0.7) * 0.5 * vol.sqrt();
        assert!((modulation_norm(&u, 0.7) - expect).abs() < 1e-12);
        let l2 = sobolev_norm(&u, 0.0);
        assert!(modulation_norm(&u, 0.0) <= overlap_constant(3) * l2 * 2.0);
    }

    #[test]
    fn constant_function_ratio_and_plateau_bound() {
        let grid = GridSpec::base(3, 8).unwrap();
        let f = SpectralField::constant(grid, 1.0);
        let rows = norm_equivalence(&f, 0.0, &[1.0, 2.0], None).unwrap();
        for row in &rows {
            assert_eq!(row.extension, extension_for(row.t));
            assert!(row.ratio > 0.1 && row.ratio < 10.0, "{row:?}");
            assert_eq!(row.lower_bound_holds(), Some(true));
        }
        assert!(norm_equivalence(&f, 1.0, &[1.0], None).is_err());
    }

    #[test]
    fn extension_is_odd_and_sufficient() {
        for t in [0.0, 1.0, 2.0, 4.0, 7.5] {
            let m = extension_for(t);
            assert_eq!(m % 2, 1);
            assert!(2.0 * std::f64::consts::PI * m as f64 >= required_period(t));
        }
    }

    #[test]
    fn truncation_levels_are_validated() {
        let grid = GridSpec::base(4, 8).unwrap();
        let data = WavePair::power_law(grid, 2.0, 2.0, 0.1);
        let cfg = SolverConfig::with_dt(0.1);
        let dist = DistributionKind::Gaussian;
        assert!(truncation_convergence(&data, dist, 1, &[4, 2], 0.2, &cfg).is_err());
        assert!(truncation_convergence(&data, dist, 1, &[3], 0.2, &cfg).is_err());
        assert!(truncation_convergence(&data, dist, 1, &[16], 0.2, &cfg).is_err());
        let table = truncation_convergence(&data, dist, 1, &[1, 2, 8], 0.2, &cfg).unwrap();
        assert_eq!(table.rows.len(), 3);
        // |n| <= 8 covers every mode of the 8^4 grid.
        let last = table.rows.last().unwrap();
        assert_eq!((last.h1_err, last.strichartz_err, last.data_tail), (0.0, 0.0, 0.0));
    }
}
