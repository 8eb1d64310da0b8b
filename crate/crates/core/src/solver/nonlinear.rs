//! The defocusing power nonlinearity `|u|^{4/(d-2)} u`, its potential, and
//! the conserved energy, evaluated on a dealiased collocation grid.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{homogeneous_sobolev_norm, sobolev_norm, weighted_lp, GridSpec, SpectralField, WavePair};

/// How products are formed on the collocation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    /// Native grid; the result keeps only modes with every `|n_a| <= N/3`.
    TwoThirds,
    /// Three-fold zero padding (alias-free for the quintic).
    ZeroPad3x,
    /// Two-fold padding with pointwise evaluation. Used for the fractional
    /// power in dimension 5, where no padding is exact.
    Pad2x,
    /// Native grid, no projection.
    None,
}

impl Dealias {
    /// Grid refinement factor of the physical-space evaluation.
    pub fn oversample(self) -> usize {
        match self {
            Self::ZeroPad3x => 3,
            Self::Pad2x => 2,
            Self::TwoThirds | Self::None => 1,
        }
    }

    /// Standard choice per dimension: 2/3 rule for the cubic, 3x padding
    /// for the quintic up to `N = 32`, 2x padding for the fractional power.
    pub fn default_for(grid: &GridSpec) -> Self {
        match grid.dim {
            3 if grid.modes <= 32 => Self::ZeroPad3x,
            5 => Self::Pad2x,
            _ => Self::TwoThirds,
        }
    }
}

impl fmt::Display for Dealias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TwoThirds => "two_thirds",
            Self::ZeroPad3x => "zero_pad_3x",
            Self::Pad2x => "pad_2x",
            Self::None => "none",
        })
    }
}

impl FromStr for Dealias {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_thirds" | "2/3" => Ok(Self::TwoThirds),
            "zero_pad_3x" | "pad3" => Ok(Self::ZeroPad3x),
            "pad_2x" | "pad2" => Ok(Self::Pad2x),
            "none" => Ok(Self::None),
            other => Err(Error::InvalidParameter(format!("unknown dealias policy `{other}`"))),
        }
    }
}

/// Exponent `p` of `|u|^{p-1} u`: 5, 3 or 7/3 for `d` = 3, 4, 5.
pub fn power_exponent(dim: usize) -> f64 {
    (dim as f64 + 2.0) / (dim as f64 - 2.0)
}

/// Pointwise `|u|^{4/(d-2)} u`.
pub fn pointwise_force(u: f64, dim: usize) -> f64 {
    match dim {
        3 => {
            let u2 = u * u;
            u2 * u2 * u
        }
        4 => u * u * u,
        _ => u.abs().powf(power_exponent(dim) - 1.0) * u,
    }
}

/// Pointwise potential density `((d-2)/(2d)) |u|^{2d/(d-2)}`.
pub fn pointwise_potential(u: f64, dim: usize) -> f64 {
    match dim {
        3 => {
            let u2 = u * u;
            u2 * u2 * u2 / 6.0
        }
        4 => {
            let u2 = u * u;
            u2 * u2 / 4.0
        }
        _ => {
            let d = dim as f64;
            (d - 2.0) / (2.0 * d) * u.abs().powf(2.0 * d / (d - 2.0))
        }
    }
}

/// Keeps modes with `|n_a| <= N/3` on every axis.
pub fn two_thirds_mask(grid: &GridSpec) -> Vec<bool> {
    let cut = grid.two_thirds_cutoff();
    (0..grid.len()).map(|i| grid.lattice(i).iter().all(|c| c.abs() <= cut)).collect()
}

/// Evaluates the nonlinearity with a fixed policy, reusing the 2/3 mask.
#[derive(Debug, Clone)]
pub struct ForceEvaluator {
    grid: GridSpec,
    policy: Dealias,
    mask: Option<Vec<bool>>,
}

/// Physical samples of the argument together with the resulting force.
#[derive(Debug, Clone)]
pub struct ForceEvaluation {
    pub force: SpectralField,
    pub samples: Vec<f64>,
}

impl ForceEvaluator {
    pub fn new(grid: GridSpec, policy: Dealias) -> Self {
        let mask = (policy == Dealias::TwoThirds).then(|| two_thirds_mask(&grid));
        Self { grid, policy, mask }
    }

    pub fn policy(&self) -> Dealias {
        self.policy
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Samples of `u` on the evaluation grid.
    pub fn samples(&self, u: &SpectralField) -> Vec<f64> {
        u.synthesize_oversampled(self.policy.oversample())
    }

    /// Quadrature cell volume on the evaluation grid.
    pub fn cell_volume(&self) -> f64 {
        self.grid.cell_volume() / (self.policy.oversample().pow(self.grid.dim as u32) as f64)
    }

    pub fn evaluate(&self, u: &SpectralField) -> ForceEvaluation {
        let samples = self.samples(u);
        let force = self.force_from_samples(&samples);
        ForceEvaluation { force, samples }
    }

    pub fn force_from_samples(&self, samples: &[f64]) -> SpectralField {
        let d = self.grid.dim;
        let values: Vec<f64> = samples.iter().map(|&u| pointwise_force(u, d)).collect();
        let out = SpectralField::analyze_oversampled(&values, self.grid, self.policy.oversample())
            .expect("evaluation grid matches");
        match &self.mask {
            Some(mask) => out.masked(|i| mask[i]),
            None => out,
        }
    }

    /// `int ((d-2)/(2d)) |u|^{2d/(d-2)}` by quadrature over `samples`.
    pub fn potential_from_samples(&self, samples: &[f64]) -> f64 {
        let d = self.grid.dim;
        let max = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max == 0.0 {
            return 0.0;
        }
        // Sum on a power-of-two scale so that scaling the field keeps exactness.
        let scale = crate::spectral::pow2_above(max);
        let inv = 1.0 / scale;
        let p = 2.0 * d as f64 / (d as f64 - 2.0);
        let sum: f64 = match d {
            3 => samples.iter().map(|&u| (u * inv).powi(6)).sum::<f64>() / 6.0,
            4 => samples.iter().map(|&u| (u * inv).powi(4)).sum::<f64>() / 4.0,
            _ => samples.iter().map(|&u| pointwise_potential(u * inv, d)).sum(),
        };
        sum * self.cell_volume() * scale.powf(p)
    }

    /// `E = int 1/2 u_t^2 + 1/2 |grad u|^2 + potential`.
    pub fn energy(&self, pair: &WavePair) -> f64 {
        let samples = self.samples(&pair.position);
        self.energy_with_samples(pair, &samples)
    }

    pub fn energy_with_samples(&self, pair: &WavePair, samples: &[f64]) -> f64 {
        let kinetic = sobolev_norm(&pair.velocity, 0.0).powi(2);
        let gradient = homogeneous_sobolev_norm(&pair.position, 1.0).powi(2);
        0.5 * (kinetic + gradient) + self.potential_from_samples(samples)
    }

    /// `L^r` norm of sampled values on the evaluation grid.
    pub fn lp_from_samples(&self, samples: &[f64], r: f64) -> f64 {
        weighted_lp(samples, self.cell_volume(), r)
    }
}

/// `F(u)` with the standard dealiasing for the grid.
pub fn nonlinearity(u: &SpectralField) -> SpectralField {
    nonlinearity_with(u, Dealias::default_for(&u.grid()))
}

pub fn nonlinearity_with(u: &SpectralField, policy: Dealias) -> SpectralField {
    ForceEvaluator::new(u.grid(), policy).evaluate(u).force
}

/// Conserved energy with the standard quadrature for the grid.
pub fn energy(pair: &WavePair) -> f64 {
    energy_with(pair, Dealias::default_for(&pair.grid()))
}

pub fn energy_with(pair: &WavePair, policy: Dealias) -> f64 {
    ForceEvaluator::new(pair.grid(), policy).energy(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn pointwise_values() {
        assert_eq!(pointwise_force(2.0, 3), 32.0);
        assert!((pointwise_force(8.0, 5) - 128.0).abs() < 1e-12);
        assert!((pointwise_force(-8.0, 5) + 128.0).abs() < 1e-12);
        assert_eq!(pointwise_force(-2.0, 4), -8.0);
        assert_eq!(pointwise_potential(2.0, 4), 4.0);
        assert!((pointwise_potential(1.0, 5) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn cubic_of_cosine_matches_trig_identity() {
        let grid = GridSpec::base(4, 8).unwrap();
        let mut u = SpectralField::zeros(grid);
        u.set_mode(&[1, 0, 0, 0], Complex64::new(0.5, 0.0)).unwrap();
        for policy in [Dealias::ZeroPad3x, Dealias::None, Dealias::Pad2x] {
            let f = nonlinearity_with(&u, policy);
            assert!((f.coeff(&[1, 0, 0, 0]).re - 0.375).abs() < 1e-14);
            assert!((f.coeff(&[3, 0, 0, 0]).re - 0.125).abs() < 1e-14);
        }
        // The 2/3 rule at N = 8 keeps |n| <= 2 and drops cos(3 x1).
        let f = nonlinearity_with(&u, Dealias::TwoThirds);
        assert!((f.coeff(&[1, 0, 0, 0]).re - 0.375).abs() < 1e-14);
        assert_eq!(f.coeff(&[3, 0, 0, 0]), Complex64::default());
    }

    #[test]
    fn energy_closed_forms() {
        let grid = GridSpec::base(4, 8).unwrap();
        assert_eq!(energy(&WavePair::zeros(grid)), 0.0);
        let mut u = SpectralField::zeros(grid);
        u.set_mode(&[1, 0, 0, 0], Complex64::new(0.5, 0.0)).unwrap();
        let pair = WavePair::new(u, SpectralField::zeros(grid)).unwrap();
        let expect = (2.0 * PI).powi(4) * 11.0 / 32.0;
        assert!((energy(&pair) - expect).abs() < 1e-12 * expect);

        let g3 = GridSpec::base(3, 8).unwrap();
        let c = 0.7;
        let pair = WavePair::new(SpectralField::zeros(g3), SpectralField::constant(g3, c)).unwrap();
        let vol = (2.0 * PI).powi(3);
        assert!((energy(&pair) - 0.5 * c * c * vol).abs() < 1e-12 * vol);
        let pair = WavePair::new(SpectralField::constant(g3, c), SpectralField::zeros(g3)).unwrap();
        assert!((energy(&pair) - c.powi(6) / 6.0 * vol).abs() < 1e-12 * vol);
    }

    #[test]
    fn policy_names_round_trip() {
        for p in [Dealias::TwoThirds, Dealias::ZeroPad3x, Dealias::Pad2x, Dealias::None] {
            assert_eq!(p.to_string().parse::<Dealias>().unwrap(), p);
        }
        assert_eq!(Dealias::default_for(&GridSpec::base(3, 64).unwrap()), Dealias::TwoThirds);
        assert_eq!(Dealias::default_for(&GridSpec::base(5, 8).unwrap()), Dealias::Pad2x);
    }
}
