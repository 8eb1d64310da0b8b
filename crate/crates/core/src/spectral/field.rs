use rustfft::num_complex::Complex64;

use super::fft;
use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Tolerance on pre-symmetrization asymmetry accepted by [`SpectralField::analyze_complex`].
pub const ASYMMETRY_TOLERANCE: f64 = 1e-8;

/// Periodic field stored as Fourier coefficients on a truncated lattice.
///
/// Real fields satisfy `coeff(-n) = conj(coeff(n))`. Fields produced by the
/// half-wave propagators are complex-valued and carry `real = false`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, coeffs: vec![Complex64::default(); grid.len()], real: true }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// Builds a real field from coefficients, rejecting non-Hermitian input.
    pub fn from_coefficients(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.len()
            )));
        }
        let field = Self { grid, coeffs, real: true };
        let asym = field.max_asymmetry();
        let scale = field.max_abs().max(f64::MIN_POSITIVE);
        if asym > ASYMMETRY_TOLERANCE * scale {
            return Err(Error::Symmetry(asym));
        }
        Ok(field.symmetrized())
    }

    /// Wraps coefficients of a complex-valued field without symmetry checks.
    pub fn complex_from_coefficients(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coeffs, real: false })
    }

    /// Samples `f` on the collocation grid and analyzes it.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; grid.dim];
        let samples: Vec<f64> = (0..grid.len())
            .map(|idx| {
                let mut rem = idx;
                for a in (0..grid.dim).rev() {
                    x[a] = (rem % grid.modes) as f64 * grid.spacing();
                    rem /= grid.modes;
                }
                f(&x)
            })
            .collect();
        Self::analyze(&samples, grid).expect("sample count matches grid")
    }

    /// Sets `coeff(n) = c` and `coeff(-n) = conj(c)`.
    pub fn set_mode(&mut self, n: &[i64], c: Complex64) -> Result<()> {
        let idx = self
            .grid
            .flat_index(n)
            .ok_or_else(|| Error::InvalidParameter(format!("lattice vector {n:?} is off the grid")))?;
        let neg = self.grid.negated_index(idx);
        if neg == idx {
            self.coeffs[idx] = Complex64::new(c.re, 0.0);
        } else {
            self.coeffs[idx] = c;
            self.coeffs[neg] = c.conj();
        }
        Ok(())
    }

    pub fn coeff(&self, n: &[i64]) -> Complex64 {
        self.grid.flat_index(n).map(|i| self.coeffs[i]).unwrap_or_default()
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max_n |coeff(-n) - conj(coeff(n))|`.
    pub fn max_asymmetry(&self) -> f64 {
        let neg = self.grid.negated_shared();
        (0..self.coeffs.len()).map(|i| (self.coeffs[neg[i]] - self.coeffs[i].conj()).norm()).fold(0.0, f64::max)
    }

    fn symmetrized(mut self) -> Self {
        let orig = self.coeffs.clone();
        let neg = self.grid.negated_shared();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            let partner = orig[neg[i]];
            *c = (orig[i] + partner.conj()) * 0.5;
        }
        self.real = true;
        self
    }

    /// Physical values `sum_n coeff(n) e^{i n.x}` on the collocation grid.
    pub fn synthesize(&self) -> Vec<f64> {
        self.synthesize_oversampled(1)
    }

    /// Physical values on a grid with `factor` times more points per axis.
    pub fn synthesize_oversampled(&self, factor: usize) -> Vec<f64> {
        if self.real {
            let n = self.grid.modes;
            return fft::synthesize_real_padded(&self.coeffs, self.grid.dim, n, n * factor);
        }
        self.synthesize_complex(factor).into_iter().map(|c| c.re).collect()
    }

    pub fn synthesize_complex(&self, factor: usize) -> Vec<Complex64> {
        fft::synthesize_padded(&self.coeffs, self.grid.dim, self.grid.modes, self.grid.modes * factor)
    }

    /// Forward transform `coeff(n) = N^{-d} sum_x u(x) e^{-i n.x}` of real samples.
    pub fn analyze(samples: &[f64], grid: GridSpec) -> Result<Self> {
        Self::analyze_oversampled(samples, grid, 1)
    }

    /// Analysis of real samples taken on `grid.refined(factor)`, keeping only
    /// the modes of `grid`.
    pub fn analyze_oversampled(samples: &[f64], grid: GridSpec, factor: usize) -> Result<Self> {
        let fine = grid.modes * factor;
        let expected = fine.pow(grid.dim as u32);
        if samples.len() != expected {
            return Err(Error::GridMismatch(format!("{} samples for a grid of {expected} points", samples.len())));
        }
        let mut coeffs = fft::analyze_real_padded(samples, grid.dim, grid.modes, fine);
        let norm = 1.0 / expected as f64;
        coeffs.iter_mut().for_each(|c| *c *= norm);
        Ok(Self { grid, coeffs, real: true }.symmetrized())
    }

    /// Analysis of complex samples whose imaginary part should vanish; returns
    /// [`Error::Asymmetry`] when the coefficients are visibly non-Hermitian.
    pub fn analyze_complex(samples: &[Complex64], grid: GridSpec) -> Result<(Self, f64)> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} samples for a grid of {} points", samples.len(), grid.len())));
        }
        let mut coeffs = fft::analyze_padded(samples.to_vec(), grid.dim, grid.modes, grid.modes);
        let norm = 1.0 / grid.len() as f64;
        coeffs.iter_mut().for_each(|c| *c *= norm);
        let raw = Self { grid, coeffs, real: false };
        let asym = raw.max_asymmetry();
        let scale = raw.max_abs().max(1.0);
        if asym > ASYMMETRY_TOLERANCE * scale {
            return Err(Error::Asymmetry { asymmetry: asym, tolerance: ASYMMETRY_TOLERANCE * scale });
        }
        Ok((raw.symmetrized(), asym))
    }

    /// Multiplies each coefficient by `m(|xi|)`, where `|xi|` comes from `wavenumbers`.
    pub fn apply_radial(&self, wavenumbers: &[f64], m: impl Fn(f64) -> f64) -> Self {
        let coeffs = self.coeffs.iter().zip(wavenumbers).map(|(c, &k)| c * m(k)).collect();
        Self { grid: self.grid, coeffs, real: self.real }
    }

    /// The same function on a grid with `modes` points per axis, where one
    /// of the two point counts divides the other. Refining is exact;
    /// coarsening drops the modes the coarse grid cannot carry.
    pub fn resampled(&self, modes: usize) -> Result<Self> {
        let grid = GridSpec::new_unchecked_dim(self.grid.dim, modes, self.grid.period_multiplier)?;
        if !self.real {
            return Err(Error::Symmetry(self.max_asymmetry()));
        }
        if modes == self.grid.modes {
            Ok(self.clone())
        } else if modes % self.grid.modes == 0 {
            Self::analyze(&self.synthesize_oversampled(modes / self.grid.modes), grid)
        } else if self.grid.modes % modes == 0 {
            Self::analyze_oversampled(&self.synthesize(), grid, self.grid.modes / modes)
        } else {
            Err(Error::GridMismatch(format!("cannot resample {} points per axis to {modes}", self.grid.modes)))
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { grid: self.grid, coeffs: self.coeffs.iter().map(|c| c * s).collect(), real: self.real }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    /// `self + a * other`.
    pub fn combine(&self, other: &Self, a: f64) -> Result<Self> {
        check_grids(&self.grid, &other.grid)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + y * a).collect();
        Ok(Self { grid: self.grid, coeffs, real: self.real && other.real })
    }

    pub(crate) fn add_assign_scaled(&mut self, other: &Self, a: f64) {
        debug_assert_eq!(self.grid, other.grid);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        self.real &= other.real;
    }

    /// Keeps coefficients where `keep(flat_index)` holds.
    pub fn masked(&self, keep: impl Fn(usize) -> bool) -> Self {
        let coeffs =
            self.coeffs.iter().enumerate().map(|(i, &c)| if keep(i) { c } else { Complex64::default() }).collect();
        Self { grid: self.grid, coeffs, real: self.real }
    }

    /// L^2 inner product `Re int f conj(g)` via Parseval.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        check_grids(&self.grid, &other.grid)?;
        let s: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum();
        Ok(s * self.grid.volume())
    }
}

pub(crate) fn check_grids(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// Phase-space state `(u, d_t u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePair {
    pub position: SpectralField,
    pub velocity: SpectralField,
}

impl WavePair {
    pub fn new(position: SpectralField, velocity: SpectralField) -> Result<Self> {
        check_grids(&position.grid, &velocity.grid)?;
        Ok(Self { position, velocity })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { position: SpectralField::zeros(grid), velocity: SpectralField::zeros(grid) }
    }

    pub fn grid(&self) -> GridSpec {
        self.position.grid
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { position: self.position.scaled(s), velocity: self.velocity.scaled(s) }
    }

    pub fn resampled(&self, modes: usize) -> Result<Self> {
        Ok(Self { position: self.position.resampled(modes)?, velocity: self.velocity.resampled(modes)? })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self { position: self.position.add(&other.position)?, velocity: self.velocity.add(&other.velocity)? })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self { position: self.position.sub(&other.position)?, velocity: self.velocity.sub(&other.velocity)? })
    }

    pub fn masked(&self, keep: impl Fn(usize) -> bool + Copy) -> Self {
        Self { position: self.position.masked(keep), velocity: self.velocity.masked(keep) }
    }

    /// Pair whose position is `sum amplitude * <n>^{-decay} cos(n.x)` over the
    /// lattice ball `|n| <= radius` and whose velocity follows the same law
    /// one derivative rougher. Nyquist modes are left empty.
    pub fn power_law(grid: GridSpec, radius: f64, decay: f64, amplitude: f64) -> Self {
        let k = grid.wavenumbers();
        let build = |extra: f64| {
            let coeffs = (0..grid.len())
                .map(|i| {
                    if grid.is_nyquist(i) || k[i] > radius {
                        Complex64::default()
                    } else {
                        Complex64::new(amplitude * (1.0 + k[i]).powf(-(decay - extra)), 0.0)
                    }
                })
                .collect();
            SpectralField { grid, coeffs, real: true }
        };
        Self { position: build(0.0), velocity: build(1.0) }
    }
}

impl WavePair {
    /// Pair with position `sum amplitude * <n>^{-decay} cos(n.x)` over
    /// `1 <= |n| <= radius` and velocity `|n|` times the position mode by
    /// mode, so every mode carries equal kinetic and gradient energy.
    pub fn equipartition(grid: GridSpec, radius: f64, decay: f64, amplitude: f64) -> Self {
        let k = grid.wavenumbers();
        let position = Self::power_law(grid, radius, decay, amplitude).position.masked(|i| k[i] > 0.0);
        let velocity = position.apply_radial(&k, |x| x);
        Self { position, velocity }
    }
}
