//! Fourier representation of real periodic fields, collocation grids,
//! Sobolev and mixed space-time norms, and sharp Littlewood-Paley projections.

pub mod fft;
mod field;
mod grid;
mod norms;
mod trajectory;

pub use field::{SpectralField, WavePair, ASYMMETRY_TOLERANCE};
pub use grid::{GridSpec, MAX_EXTENDED_GRID_POINTS, MAX_GRID_POINTS};
pub use norms::{
    homogeneous_sobolev_norm, lebesgue_norm, lebesgue_norm_oversampled, sobolev_norm, weighted_lp, GridSamples,
};
pub use trajectory::{
    mixed_norm, mixed_norm_oversampled, time_norm, LinearFlow, MixedNormSpec, States, TimeGrid, Trajectory,
};

pub(crate) use norms::pow2_above;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `||(u, v)||_{H^s x H^{s-1}}`.
pub fn pair_sobolev_norm(pair: &WavePair, s: f64) -> f64 {
    let a = sobolev_norm(&pair.position, s);
    let b = sobolev_norm(&pair.velocity, s - 1.0);
    a.hypot(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionMode {
    /// `{N/2 < |n| <= N}` for `N >= 2`, `{|n| <= 1}` for `N = 1`.
    Single,
    /// `{|n| <= N}`.
    AtMost,
    /// `{|n| > N}`.
    Above,
}

/// Sharp dyadic Fourier cutoff at scale `n` (a power of two).
pub fn lp_project(field: &SpectralField, n: u64, mode: ProjectionMode) -> Result<SpectralField> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("dyadic scale {n} is not a power of two")));
    }
    let scale = n as f64;
    let k = field.grid().wavenumbers();
    let tol = 1e-12;
    let keep = |i: usize| -> bool {
        let kn = k[i];
        match mode {
            ProjectionMode::Single if n == 1 => kn <= 1.0 + tol,
            ProjectionMode::Single => kn > scale / 2.0 + tol && kn <= scale + tol,
            ProjectionMode::AtMost => kn <= scale + tol,
            ProjectionMode::Above => kn > scale + tol,
        }
    };
    Ok(field.masked(keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::num_complex::Complex64;

    fn cos_mode(grid: GridSpec, k: i64) -> SpectralField {
        let mut f = SpectralField::zeros(grid);
        f.set_mode(&[k, 0, 0], Complex64::new(0.5, 0.0)).unwrap();
        f
    }

    #[test]
    fn single_projection_examples() {
        let grid = GridSpec::base(3, 16).unwrap();
        let f = cos_mode(grid, 3);
        let p1 = lp_project(&f, 1, ProjectionMode::Single).unwrap();
        assert_eq!(p1.max_abs(), 0.0);
        let p4 = lp_project(&f, 4, ProjectionMode::Single).unwrap();
        assert_eq!(p4, f);
        assert!(lp_project(&f, 3, ProjectionMode::Single).is_err());
    }

    #[test]
    fn dyadic_pieces_telescope() {
        let grid = GridSpec::base(3, 16).unwrap();
        let f = SpectralField::from_fn(grid, |x| (x[0] + 2.0 * x[1]).sin() + (5.0 * x[2]).cos() * x[0].cos() + 0.2);
        let mut sum = SpectralField::zeros(grid);
        for j in 0..=3 {
            sum = sum.add(&lp_project(&f, 1 << j, ProjectionMode::Single).unwrap()).unwrap();
        }
        assert_eq!(sum, lp_project(&f, 8, ProjectionMode::AtMost).unwrap());
        let rest = lp_project(&f, 8, ProjectionMode::Above).unwrap();
        assert_eq!(sum.add(&rest).unwrap(), f);
    }

    #[test]
    fn pair_norm_combines_components() {
        let grid = GridSpec::base(3, 8).unwrap();
        let p = WavePair::new(SpectralField::constant(grid, 3.0), SpectralField::constant(grid, 4.0)).unwrap();
        let vol = grid.volume().sqrt();
        assert!((pair_sobolev_norm(&p, 1.0) - 5.0 * vol).abs() < 1e-12 * vol);
    }
}
