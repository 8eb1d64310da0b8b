//! Random Fourier-multiplier sampling of initial data.
//!
//! Every coefficient draw is addressed by `(base seed, sample, slot, lattice
//! index)`: the sample selects a ChaCha key, the slot a stream, and the flat
//! lattice index a fixed word offset. Noise is therefore a pure function of
//! its address and independent of evaluation order or thread count.

mod cutoff;

pub use cutoff::{cutoff_embed, eta_axis, japanese_bracket, plateau, required_period, smooth_step};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, SpectralField, WavePair};

/// Membership in the half-lattice `union_k Z^k x Z_+ x {0}^{d-k-1}`:
/// the last nonzero coordinate is positive.
pub fn in_index_set(n: &[i64]) -> bool {
    n.iter().rev().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Gaussian,
    Bernoulli,
    Uniform,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 3] = [Self::Gaussian, Self::Bernoulli, Self::Uniform];

    /// Analytic moment-generating function of a component with variance `var`.
    pub fn mgf(self, gamma: f64, var: f64) -> f64 {
        let sd = var.sqrt();
        match self {
            Self::Gaussian => (0.5 * var * gamma * gamma).exp(),
            Self::Bernoulli => (sd * gamma).cosh(),
            Self::Uniform => {
                let a = 3f64.sqrt() * sd * gamma;
                if a == 0.0 {
                    1.0
                } else {
                    a.sinh() / a
                }
            }
        }
    }

    /// Constant `c` with `E exp(gamma X) <= exp(c gamma^2)` for a component of
    /// variance `var`. All three laws are sub-Gaussian with variance proxy `var`.
    pub fn moment_constant(self, var: f64) -> f64 {
        0.5 * var
    }

    /// Maps a uniform `u1 in (0, 1]` and `u2 in [0, 1)` to a pair of independent
    /// unit-variance draws.
    fn standard_pair(self, u1: f64, u2: f64) -> (f64, f64) {
        match self {
            Self::Gaussian => {
                let r = (-2.0 * u1.ln()).sqrt();
                let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
                (r * c, r * s)
            }
            Self::Bernoulli => {
                let sign = |u: f64| if u < 0.5 { 1.0 } else { -1.0 };
                (sign(1.0 - u1), sign(u2))
            }
            Self::Uniform => {
                let r3 = 3f64.sqrt();
                (r3 * (1.0 - 2.0 * u1), r3 * (2.0 * u2 - 1.0))
            }
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::Bernoulli => "bernoulli",
            Self::Uniform => "uniform",
        })
    }
}

impl FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "bernoulli" | "rademacher" => Ok(Self::Bernoulli),
            "uniform" => Ok(Self::Uniform),
            other => Err(Error::InvalidParameter(format!("unknown distribution `{other}`"))),
        }
    }
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Address of one Monte Carlo sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub sample: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64) -> Self {
        Self { base_seed, sample: 0 }
    }

    pub fn with_sample(self, sample: u64) -> Self {
        Self { sample, ..self }
    }

    /// Key of the sample's generator. Injective in `sample` for a fixed base.
    pub fn key(&self) -> u64 {
        mix64(self.base_seed.wrapping_add(self.sample.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    fn generator(&self, slot: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.key());
        rng.set_stream(slot);
        rng
    }
}

/// Words of the ChaCha stream reserved for each lattice index.
const WORDS_PER_INDEX: u128 = 4;

fn unit_open_closed(x: u64) -> f64 {
    1.0 - (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn unit_closed_open(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// How a lattice index enters the sampled noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    /// Complex generator with independent real and imaginary parts.
    Free,
    /// Real generator (the zero mode, or a self-conjugate Nyquist index).
    Real,
    /// Conjugate of another index's generator.
    Derived,
}

/// Role and conjugate index of every lattice index, computed once per grid.
fn roles(grid: &GridSpec) -> Arc<[(Role, usize)]> {
    static CACHE: OnceLock<Mutex<HashMap<GridSpec, Arc<[(Role, usize)]>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().expect("role cache poisoned").get(grid) {
        return Arc::clone(r);
    }
    let table: Arc<[(Role, usize)]> = (0..grid.len()).map(|i| (role(grid, i), grid.negated_index(i))).collect();
    cache.lock().expect("role cache poisoned").insert(*grid, Arc::clone(&table));
    table
}

fn role(grid: &GridSpec, idx: usize) -> Role {
    let neg = grid.negated_index(idx);
    if neg == idx {
        return Role::Real;
    }
    if grid.is_nyquist(idx) {
        return if idx < neg { Role::Free } else { Role::Derived };
    }
    if in_index_set(&grid.lattice(idx)) {
        Role::Free
    } else {
        Role::Derived
    }
}

struct SlotSampler {
    rng: ChaCha8Rng,
    next_idx: usize,
    dist: DistributionKind,
}

impl SlotSampler {
    fn new(seed: &SeedSpec, slot: u64, dist: DistributionKind) -> Self {
        Self { rng: seed.generator(slot), next_idx: 0, dist }
    }

    fn draw(&mut self, idx: usize) -> (f64, f64) {
        // Short forward gaps are cheaper to read through than to seek over.
        if idx > self.next_idx && idx - self.next_idx <= 8 {
            for _ in self.next_idx..idx {
                self.rng.next_u64();
                self.rng.next_u64();
            }
        } else if idx != self.next_idx {
            self.rng.set_word_pos(idx as u128 * WORDS_PER_INDEX);
        }
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        self.next_idx = idx + 1;
        self.dist.standard_pair(unit_open_closed(a), unit_closed_open(b))
    }

    fn generator_at(&mut self, idx: usize, role: Role) -> Complex64 {
        let (x, y) = self.draw(idx);
        match role {
            Role::Real => Complex64::new(x, 0.0),
            _ => Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2,
        }
    }
}

/// Multipliers `g_{n,j}` for both slots (`j = 0` position, `j = 1` velocity).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientNoise {
    pub grid: GridSpec,
    pub values: [Vec<Complex64>; 2],
    pub seed: Option<SeedSpec>,
    pub dist: Option<DistributionKind>,
}

impl CoefficientNoise {
    /// Deterministic realization `g = 1`.
    pub fn ones(grid: GridSpec) -> Self {
        let v = vec![Complex64::new(1.0, 0.0); grid.len()];
        Self { grid, values: [v.clone(), v], seed: None, dist: None }
    }

    /// Largest `|g_{-n,j} - conj(g_{n,j})|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for vals in &self.values {
            for (idx, g) in vals.iter().enumerate() {
                let neg = self.grid.negated_index(idx);
                worst = worst.max((vals[neg] - g.conj()).norm());
            }
        }
        worst
    }
}

fn sample_slot(
    seed: &SeedSpec,
    slot: u64,
    grid: &GridSpec,
    dist: DistributionKind,
    needed: impl Fn(usize) -> bool,
) -> Vec<Complex64> {
    let mut values = vec![Complex64::default(); grid.len()];
    let mut sampler = SlotSampler::new(seed, slot, dist);
    let table = roles(grid);
    for (idx, &(r, neg)) in table.iter().enumerate() {
        if r == Role::Derived {
            continue;
        }
        if !needed(idx) && !needed(neg) {
            continue;
        }
        let g = sampler.generator_at(idx, r);
        values[idx] = g;
        values[neg] = g.conj();
    }
    values
}

/// Draws the free generators independently and fills in their conjugates.
/// `E|g_n|^2 = 1` for `n != 0` and `E g_0^2 = 1`.
pub fn sample_noise(seed: &SeedSpec, grid: &GridSpec, dist: DistributionKind) -> CoefficientNoise {
    let values = [0, 1].map(|slot| sample_slot(seed, slot, grid, dist, |_| true));
    CoefficientNoise { grid: *grid, values, seed: Some(*seed), dist: Some(dist) }
}

/// Multiplies each Fourier coefficient of slot `j` by `g_{n,j}`.
pub fn randomize_pair(pair: &WavePair, noise: &CoefficientNoise) -> Result<WavePair> {
    if pair.grid() != noise.grid {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", pair.grid(), noise.grid)));
    }
    let apply = |f: &SpectralField, g: &[Complex64]| {
        let coeffs = f.coefficients().iter().zip(g).map(|(c, g)| c * g).collect();
        SpectralField::from_coefficients(f.grid(), coeffs)
    };
    Ok(WavePair {
        position: apply(&pair.position, &noise.values[0])?,
        velocity: apply(&pair.velocity, &noise.values[1])?,
    })
}

/// [`randomize_pair`] with noise drawn only on the Fourier support of `pair`.
/// Bit-identical to sampling the full noise first.
pub fn randomize_with_seed(pair: &WavePair, seed: &SeedSpec, dist: DistributionKind) -> WavePair {
    let grid = pair.grid();
    let fields = [&pair.position, &pair.velocity];
    let [p, v] = [0usize, 1].map(|slot| {
        let f = fields[slot];
        let c = f.coefficients();
        let g = sample_slot(seed, slot as u64, &grid, dist, |i| c[i] != Complex64::default());
        let coeffs: Vec<_> = c.iter().zip(&g).map(|(a, b)| a * b).collect();
        SpectralField::from_coefficients(grid, coeffs).expect("product of Hermitian factors")
    });
    WavePair { position: p, velocity: v }
}

/// Which generator a moment check samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    /// Real or imaginary part of `g_n`, `n != 0` (variance 1/2).
    Complex,
    /// The real zero-mode generator (variance 1).
    Zero,
}

impl Component {
    pub fn variance(self) -> f64 {
        match self {
            Self::Complex => 0.5,
            Self::Zero => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub gamma: f64,
    pub empirical: f64,
    pub analytic: f64,
    pub bound: f64,
    /// `empirical / bound`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub dist: DistributionKind,
    pub component: Component,
    pub constant: f64,
    pub samples: usize,
    pub rows: Vec<MomentRow>,
    pub worst_ratio: f64,
    /// Largest `analytic / bound` over the grid (at most 1 when the bound holds).
    pub worst_analytic_ratio: f64,
}

/// Draws `samples` scalar components of the given kind.
pub fn component_draws(dist: DistributionKind, component: Component, samples: usize, seed: &SeedSpec) -> Vec<f64> {
    let mut sampler = SlotSampler::new(seed, 2, dist);
    let sd = component.variance().sqrt();
    let mut out = Vec::with_capacity(samples);
    let mut idx = 0;
    while out.len() < samples {
        let (x, y) = sampler.draw(idx);
        idx += 1;
        out.push(sd * x);
        if out.len() < samples {
            out.push(sd * y);
        }
    }
    out
}

/// Empirical moment-generating function against `exp(c gamma^2)`.
pub fn moment_condition_check(
    dist: DistributionKind,
    component: Component,
    gammas: &[f64],
    samples: usize,
    seed: &SeedSpec,
) -> Result<MomentReport> {
    if samples < 1000 {
        return Err(Error::InvalidParameter(format!("moment check needs at least 1000 samples, got {samples}")));
    }
    if gammas.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter("gamma grid must be finite".into()));
    }
    let draws = component_draws(dist, component, samples, seed);
    let var = component.variance();
    let c = dist.moment_constant(var);
    let rows: Vec<MomentRow> = gammas
        .iter()
        .map(|&gamma| {
            let empirical =
                if gamma == 0.0 { 1.0 } else { draws.iter().map(|x| (gamma * x).exp()).sum::<f64>() / samples as f64 };
            let bound = (c * gamma * gamma).exp();
            MomentRow { gamma, empirical, analytic: dist.mgf(gamma, var), bound, ratio: empirical / bound }
        })
        .collect();
    let worst_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let worst_analytic_ratio = rows.iter().map(|r| r.analytic / r.bound).fold(0.0, f64::max);
    Ok(MomentReport { dist, component, constant: c, samples, rows, worst_ratio, worst_analytic_ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KhintchineRow {
    pub p: f64,
    pub moment: f64,
    /// `moment / (sqrt(p) ||c||)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KhintchineReport {
    pub dist: DistributionKind,
    pub samples: usize,
    pub l2_norm: f64,
    pub rows: Vec<KhintchineRow>,
    pub second_moment: f64,
    pub second_moment_std_error: f64,
}

/// `||c||_{l^2}` of the coefficient sequence (no volume factor).
pub fn sequence_l2(c: &SpectralField) -> f64 {
    c.coefficients().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Empirical `L^p(Omega)` norms of `sum_n g_n c_n`.
pub fn khintchine_check(
    c: &SpectralField,
    ps: &[f64],
    samples: usize,
    dist: DistributionKind,
    seed: &SeedSpec,
) -> Result<KhintchineReport> {
    if !c.is_real() {
        return Err(Error::Symmetry(c.max_asymmetry()));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter("khintchine check needs at least 2 samples".into()));
    }
    if let Some(p) = ps.iter().find(|p| !(**p >= 2.0) || !p.is_finite()) {
        return Err(Error::InvalidParameter(format!("moment order {p} must be finite and >= 2")));
    }
    let grid = c.grid();
    let coeffs = c.coefficients();
    let support: Vec<usize> = (0..grid.len()).filter(|&i| coeffs[i] != Complex64::default()).collect();
    let sums: Vec<f64> = (0..samples as u64)
        .map(|s| {
            let seed = seed.with_sample(s);
            let g = sample_slot(&seed, 0, &grid, dist, |i| coeffs[i] != Complex64::default());
            support.iter().map(|&i| (g[i] * coeffs[i]).re).sum()
        })
        .collect();
    let l2_norm = sequence_l2(c);
    let m = samples as f64;
    let squares: Vec<f64> = sums.iter().map(|s| s * s).collect();
    let second_moment = squares.iter().sum::<f64>() / m;
    let var = squares.iter().map(|q| (q - second_moment).powi(2)).sum::<f64>() / (m - 1.0);
    let rows = ps
        .iter()
        .map(|&p| {
            let moment = (sums.iter().map(|s| s.abs().powf(p)).sum::<f64>() / m).powf(1.0 / p);
            let ratio = if l2_norm == 0.0 { 0.0 } else { moment / (p.sqrt() * l2_norm) };
            KhintchineRow { p, moment, ratio }
        })
        .collect();
    Ok(KhintchineReport { dist, samples, l2_norm, rows, second_moment, second_moment_std_error: (var / m).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_set_examples() {
        assert!(!in_index_set(&[0, 0, 0]));
        assert!(!in_index_set(&[5, -2, 0]));
        assert!(in_index_set(&[-5, 2, 0]));
        assert!(in_index_set(&[-3, 0, 0]) == false && in_index_set(&[3, 0, 0]));
    }

    #[test]
    fn noise_is_conjugate_symmetric_and_deterministic() {
        let grid = GridSpec::base(3, 8).unwrap();
        let seed = SeedSpec::new(42).with_sample(7);
        for dist in DistributionKind::ALL {
            let a = sample_noise(&seed, &grid, dist);
            assert_eq!(a.max_asymmetry(), 0.0);
            assert_eq!(a.values[0][0].im, 0.0);
            assert_eq!(a, sample_noise(&seed, &grid, dist));
            assert_ne!(a.values[0], a.values[1]);
        }
        let other = sample_noise(&seed.with_sample(8), &grid, DistributionKind::Gaussian);
        assert_ne!(other.values[0], sample_noise(&seed, &grid, DistributionKind::Gaussian).values[0]);
    }

    #[test]
    fn sparse_draws_match_full_noise() {
        let grid = GridSpec::base(3, 8).unwrap();
        let pair = WavePair::power_law(grid, 2.5, 1.5, 1.0);
        let seed = SeedSpec::new(3).with_sample(11);
        for dist in DistributionKind::ALL {
            let full = randomize_pair(&pair, &sample_noise(&seed, &grid, dist)).unwrap();
            assert_eq!(full, randomize_with_seed(&pair, &seed, dist));
        }
    }

    #[test]
    fn unit_noise_is_identity() {
        let grid = GridSpec::base(3, 8).unwrap();
        let pair = WavePair::power_law(grid, 3.0, 1.0, 1.0);
        assert_eq!(randomize_pair(&pair, &CoefficientNoise::ones(grid)).unwrap(), pair);
        let zero = WavePair::zeros(grid);
        let noise = sample_noise(&SeedSpec::new(1), &grid, DistributionKind::Gaussian);
        assert_eq!(randomize_pair(&zero, &noise).unwrap(), zero);
        let other = GridSpec::base(3, 4).unwrap();
        assert!(matches!(randomize_pair(&WavePair::zeros(other), &noise), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn bernoulli_bound_and_gaussian_equality() {
        for g in [0.0f64, 0.5, 1.0, 3.0] {
            assert!(g.cosh() <= (g * g / 2.0).exp());
        }
        let seed = SeedSpec::new(9);
        let r = moment_condition_check(DistributionKind::Gaussian, Component::Complex, &[0.0, 1.0, 2.0], 4000, &seed)
            .unwrap();
        assert_eq!(r.rows[0].empirical, 1.0);
        assert_eq!(r.constant, 0.25);
        for row in &r.rows {
            assert!((row.analytic / row.bound - 1.0).abs() < 1e-15);
        }
        assert!(moment_condition_check(DistributionKind::Uniform, Component::Zero, &[1.0], 10, &seed).is_err());
    }

    #[test]
    fn khintchine_rejects_complex_sequences() {
        let grid = GridSpec::base(3, 4).unwrap();
        let mut coeffs = vec![Complex64::default(); grid.len()];
        coeffs[grid.flat_index(&[1, 0, 0]).unwrap()] = Complex64::new(1.0, 0.0);
        let c = SpectralField::complex_from_coefficients(grid, coeffs).unwrap();
        assert!(matches!(
            khintchine_check(&c, &[2.0], 100, DistributionKind::Gaussian, &SeedSpec::new(0)),
            Err(Error::Symmetry(_))
        ));
    }
}
