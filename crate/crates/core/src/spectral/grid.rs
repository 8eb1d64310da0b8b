use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on lattice points for a field on the base torus.
pub const MAX_GRID_POINTS: usize = 1 << 22;

/// Upper bound on lattice points for a field on an extended torus.
pub const MAX_EXTENDED_GRID_POINTS: usize = 1 << 23;

/// Uniform collocation grid on the torus `(R / 2 pi m Z)^d`.
///
/// `modes` counts points per axis. With `period_multiplier = 1` the lattice is
/// `{-N/2 <= n_k < N/2}`; for `m > 1` the same index range carries the
/// frequencies `n / m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub modes: usize,
    pub period_multiplier: usize,
}

impl GridSpec {
    pub fn new(dim: usize, modes: usize, period_multiplier: usize) -> Result<Self> {
        if !(3..=5).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 3..=5")));
        }
        Self::new_unchecked_dim(dim, modes, period_multiplier)
    }

    /// Like [`GridSpec::new`] but accepts any dimension from 1 upward. Low
    /// dimensions are convenient for quadrature checks.
    pub fn new_unchecked_dim(dim: usize, modes: usize, period_multiplier: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        if modes < 2 || modes % 2 != 0 {
            return Err(Error::InvalidGrid(format!("modes per axis {modes} must be even and >= 2")));
        }
        if period_multiplier == 0 || period_multiplier % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "period multiplier {period_multiplier} must be a positive odd integer"
            )));
        }
        let total = (modes as u128).pow(dim as u32);
        let limit = if period_multiplier == 1 { MAX_GRID_POINTS } else { MAX_EXTENDED_GRID_POINTS };
        if total > limit as u128 {
            return Err(Error::InvalidGrid(format!("{modes}^{dim} = {total} points exceeds the limit of {limit}")));
        }
        Ok(Self { dim, modes, period_multiplier })
    }

    pub fn base(dim: usize, modes: usize) -> Result<Self> {
        Self::new(dim, modes, 1)
    }

    pub fn len(&self) -> usize {
        self.modes.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.modes; self.dim]
    }

    /// Period of each axis, `2 pi m`.
    pub fn period(&self) -> f64 {
        2.0 * PI * self.period_multiplier as f64
    }

    /// Torus volume `(2 pi m)^d`.
    pub fn volume(&self) -> f64 {
        self.period().powi(self.dim as i32)
    }

    pub fn spacing(&self) -> f64 {
        self.period() / self.modes as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Signed integer lattice index for an FFT-ordered axis position.
    pub fn signed(&self, k: usize) -> i64 {
        if k < self.modes / 2 {
            k as i64
        } else {
            k as i64 - self.modes as i64
        }
    }

    /// FFT-ordered axis position of a signed lattice index, if representable.
    pub fn position(&self, n: i64) -> Option<usize> {
        let half = (self.modes / 2) as i64;
        if n < -half || n >= half {
            return None;
        }
        Some(if n >= 0 { n as usize } else { (n + self.modes as i64) as usize })
    }

    /// Signed lattice vector of a flat index (axis 0 slowest).
    pub fn lattice(&self, mut idx: usize) -> Vec<i64> {
        let mut n = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            n[a] = self.signed(idx % self.modes);
            idx /= self.modes;
        }
        n
    }

    pub fn flat_index(&self, n: &[i64]) -> Option<usize> {
        if n.len() != self.dim {
            return None;
        }
        let mut idx = 0;
        for &c in n {
            idx = idx * self.modes + self.position(c)?;
        }
        Some(idx)
    }

    /// Flat index of the lattice vector `-n`, with the Nyquist row mapped to itself.
    pub fn negated_index(&self, mut idx: usize) -> usize {
        let mut out = 0;
        let mut stride = 1;
        for _ in 0..self.dim {
            let k = idx % self.modes;
            idx /= self.modes;
            out += ((self.modes - k) % self.modes) * stride;
            stride *= self.modes;
        }
        out
    }

    /// Shared table of [`GridSpec::negated_index`] for every flat index.
    pub fn negated_shared(&self) -> Arc<[usize]> {
        static CACHE: OnceLock<Mutex<HashMap<GridSpec, Arc<[usize]>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().expect("negation cache poisoned").get(self) {
            return Arc::clone(t);
        }
        let table: Arc<[usize]> = (0..self.len()).map(|i| self.negated_index(i)).collect();
        cache.lock().expect("negation cache poisoned").insert(*self, Arc::clone(&table));
        table
    }

    /// True when some component of the lattice vector sits on `-N/2`.
    pub fn is_nyquist(&self, mut idx: usize) -> bool {
        let half = self.modes / 2;
        for _ in 0..self.dim {
            if idx % self.modes == half {
                return true;
            }
            idx /= self.modes;
        }
        false
    }

    /// Euclidean frequency magnitude `|n| / m` for every flat index.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let scale = 1.0 / self.period_multiplier as f64;
        let axis: Vec<f64> = (0..self.modes).map(|k| (self.signed(k) as f64 * scale).powi(2)).collect();
        let mut out = vec![0.0; self.len()];
        for (idx, v) in out.iter_mut().enumerate() {
            let mut rem = idx;
            let mut sq = 0.0;
            for _ in 0..self.dim {
                sq += axis[rem % self.modes];
                rem /= self.modes;
            }
            *v = sq.sqrt();
        }
        out
    }

    /// Shared copy of [`GridSpec::wavenumbers`], computed once per grid.
    pub fn wavenumbers_shared(&self) -> Arc<[f64]> {
        static CACHE: OnceLock<Mutex<HashMap<GridSpec, Arc<[f64]>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(k) = cache.lock().expect("wavenumber cache poisoned").get(self) {
            return Arc::clone(k);
        }
        let k: Arc<[f64]> = self.wavenumbers().into();
        cache.lock().expect("wavenumber cache poisoned").insert(*self, Arc::clone(&k));
        k
    }

    /// Largest integer-index magnitude kept by the two-thirds rule, per axis.
    pub fn two_thirds_cutoff(&self) -> i64 {
        (self.modes / 3) as i64
    }

    /// Physical coordinate of axis position `j`, wrapped to `[-pi m, pi m)`.
    pub fn coordinate(&self, j: usize) -> f64 {
        self.signed(j) as f64 * self.spacing()
    }

    /// Grid with `factor` times as many points per axis on the same torus.
    pub fn refined(&self, factor: usize) -> Self {
        Self { modes: self.modes * factor, ..*self }
    }

    /// Torus of period `2 pi m` with the same spacing as `self`.
    pub fn extended(&self, period_multiplier: usize) -> Result<Self> {
        if self.period_multiplier != 1 {
            return Err(Error::InvalidGrid("extension requires a base grid".into()));
        }
        Self::new_unchecked_dim(self.dim, self.modes * period_multiplier, period_multiplier)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_round_trip() {
        let g = GridSpec::base(3, 8).unwrap();
        for idx in 0..g.len() {
            let n = g.lattice(idx);
            assert_eq!(g.flat_index(&n), Some(idx));
            let neg = g.negated_index(idx);
            let m = g.lattice(neg);
            for a in 0..3 {
                if n[a] == -4 {
                    assert_eq!(m[a], -4);
                } else {
                    assert_eq!(m[a], -n[a]);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(2, 8, 1).is_err());
        assert!(GridSpec::new(3, 7, 1).is_err());
        assert!(GridSpec::new(3, 8, 2).is_err());
        assert!(GridSpec::new(5, 32, 1).is_err());
        assert!(GridSpec::new(4, 32, 1).is_ok());
    }

    #[test]
    fn extended_grid_keeps_spacing() {
        let g = GridSpec::base(3, 16).unwrap();
        let e = g.extended(3).unwrap();
        assert_eq!(e.modes, 48);
        assert!((e.spacing() - g.spacing()).abs() < 1e-15);
        let k = e.wavenumbers();
        assert!((k[e.flat_index(&[0, 0, 3]).unwrap()] - 1.0).abs() < 1e-15);
    }
}
