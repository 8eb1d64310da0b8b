//! Sobolev and Lebesgue norms with the `(2 pi m)^d` volume convention.
//!
//! Every finite power sum is rescaled by a power of two before raising to the
//! `r`-th power, so `norm(2 f) == 2 norm(f)` holds bit for bit.

use super::field::SpectralField;

/// Smallest power of two strictly above `x` (for positive normal `x`).
pub(crate) fn pow2_above(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return 1.0;
    }
    let exp = ((x.to_bits() >> 52) & 0x7ff) as i64;
    if exp == 0 {
        return 1.0;
    }
    let e = exp - 1023 + 1;
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// `sum |v|^r` for values already scaled into `[0, 1)`.
fn power_sum(values: &[f64], inv_scale: f64, r: f64) -> f64 {
    let scaled = values.iter().map(|v| v.abs() * inv_scale);
    match r {
        2.0 => scaled.map(|x| x * x).sum(),
        3.0 => scaled.map(|x| x * x * x).sum(),
        4.0 => scaled.map(|x| (x * x) * (x * x)).sum(),
        6.0 => scaled
            .map(|x| {
                let x2 = x * x;
                x2 * x2 * x2
            })
            .sum(),
        10.0 => scaled
            .map(|x| {
                let x2 = x * x;
                let x4 = x2 * x2;
                x4 * x4 * x2
            })
            .sum(),
        _ if r.fract() == 0.0 && r <= 64.0 => scaled.map(|x| x.powi(r as i32)).sum(),
        _ => scaled.map(|x| x.powf(r)).sum(),
    }
}

/// `(weight * sum |v|^r)^{1/r}` for finite `r`, `max |v|` for infinite `r`.
pub fn weighted_lp(values: &[f64], weight: f64, r: f64) -> f64 {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if r.is_infinite() || max == 0.0 {
        return max;
    }
    let scale = pow2_above(max);
    let sum = power_sum(values, 1.0 / scale, r);
    scale * (weight * sum).powf(1.0 / r)
}

/// Physical samples of a field together with the quadrature cell volume.
#[derive(Debug, Clone)]
pub struct GridSamples {
    pub values: Vec<f64>,
    pub cell_volume: f64,
}

impl GridSamples {
    pub fn of(field: &SpectralField, oversample: usize) -> Self {
        let grid = field.grid();
        let cell = grid.cell_volume() / (oversample.pow(grid.dim as u32) as f64);
        Self { values: field.synthesize_oversampled(oversample), cell_volume: cell }
    }

    pub fn lp_norm(&self, r: f64) -> f64 {
        weighted_lp(&self.values, self.cell_volume, r)
    }

    pub fn sup(&self) -> f64 {
        self.lp_norm(f64::INFINITY)
    }
}

fn weighted_l2(field: &SpectralField, weight: impl Fn(f64) -> f64) -> f64 {
    let grid = field.grid();
    let k = grid.wavenumbers_shared();
    let max = field.max_abs();
    if max == 0.0 {
        return 0.0;
    }
    let scale = pow2_above(max);
    let sum: f64 = field
        .coefficients()
        .iter()
        .zip(k.iter())
        .map(|(c, &kn)| {
            let (a, b) = (c.re / scale, c.im / scale);
            weight(kn) * (a * a + b * b)
        })
        .sum();
    scale * (grid.volume() * sum).sqrt()
}

/// `((2 pi m)^d sum_n <n>^{2s} |coeff(n)|^2)^{1/2}` with `<n> = 1 + |n|`.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    if s == 0.0 {
        weighted_l2(field, |_| 1.0)
    } else if s == 1.0 {
        weighted_l2(field, |k| (1.0 + k) * (1.0 + k))
    } else if s == -1.0 {
        weighted_l2(field, |k| 1.0 / ((1.0 + k) * (1.0 + k)))
    } else {
        weighted_l2(field, |k| (1.0 + k).powf(2.0 * s))
    }
}

/// Homogeneous variant with weight `|n|^{2s}`; the zero mode never contributes.
pub fn homogeneous_sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    if s == 1.0 {
        return weighted_l2(field, |k| k * k);
    }
    weighted_l2(field, |k| if k == 0.0 { 0.0 } else { k.powf(2.0 * s) })
}

/// Grid quadrature `((2 pi m / N)^d sum_x |u(x)|^r)^{1/r}`; grid maximum for `r = inf`.
pub fn lebesgue_norm(field: &SpectralField, r: f64) -> f64 {
    GridSamples::of(field, 1).lp_norm(r)
}

/// Same quadrature evaluated on a `factor`-times oversampled grid. For
/// `r = inf` this tightens the grid maximum toward the true supremum.
pub fn lebesgue_norm_oversampled(field: &SpectralField, r: f64, factor: usize) -> f64 {
    GridSamples::of(field, factor).lp_norm(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use rustfft::num_complex::Complex64;
    use std::f64::consts::PI;

    fn cos_x1(grid: GridSpec, amp: f64) -> SpectralField {
        let mut f = SpectralField::zeros(grid);
        f.set_mode(&[1, 0, 0], Complex64::new(amp / 2.0, 0.0)).unwrap();
        f
    }

    #[test]
    fn sobolev_closed_forms() {
        let grid = GridSpec::base(3, 8).unwrap();
        let f = cos_x1(grid, 2.0);
        let expect = (8.0 * (2.0 * PI).powi(3)).sqrt();
        assert!((sobolev_norm(&f, 1.0) - expect).abs() < 1e-12 * expect);
        let c = SpectralField::constant(grid, -1.5);
        for s in [0.0, 0.7, 2.0] {
            let e = 1.5 * (2.0 * PI).powf(1.5);
            assert!((sobolev_norm(&c, s) - e).abs() < 1e-12 * e);
        }
        assert_eq!(homogeneous_sobolev_norm(&c, 1.0), 0.0);
        let h = (2.0 * (2.0 * PI).powi(3)).sqrt();
        assert!((homogeneous_sobolev_norm(&f, 1.0) - h).abs() < 1e-12 * h);
        assert!((homogeneous_sobolev_norm(&f, 0.0) - sobolev_norm(&f, 0.0)).abs() < 1e-12 * h);
    }

    #[test]
    fn extended_torus_volume_enters_constant_norm() {
        let grid = GridSpec::new(3, 24, 3).unwrap();
        let c = SpectralField::constant(grid, 2.0);
        let e = 2.0 * (6.0 * PI).powf(1.5);
        assert!((sobolev_norm(&c, 0.3) - e).abs() < 1e-12 * e);
    }

    #[test]
    fn lebesgue_closed_forms() {
        let grid = GridSpec::base(3, 8).unwrap();
        let one = SpectralField::constant(grid, 1.0);
        let e = (2.0 * PI).sqrt();
        assert!((lebesgue_norm(&one, 6.0) - e).abs() < 1e-12 * e);
        let f = cos_x1(grid, 1.0);
        assert!((lebesgue_norm(&f, f64::INFINITY) - 1.0).abs() < 1e-14);
        // int cos^4 = (3/8)(2 pi)^3, computed by 1-D quadrature independently.
        let n = 4096;
        let q: f64 = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos().powi(4)).sum::<f64>() * 2.0 * PI / n as f64;
        let oracle = (q * (2.0 * PI).powi(2)).powf(0.25);
        assert!((oracle - (0.375 * (2.0 * PI).powi(3)).powf(0.25)).abs() < 1e-12);
        assert!((lebesgue_norm(&f, 4.0) - oracle).abs() < 1e-12 * oracle);
    }

    #[test]
    fn oversampling_does_not_change_exact_quadrature() {
        let grid = GridSpec::base(3, 8).unwrap();
        let f = cos_x1(grid, 1.0);
        let a = lebesgue_norm(&f, 2.0);
        let b = lebesgue_norm_oversampled(&f, 2.0, 2);
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn homogeneity_is_bit_exact() {
        let grid = GridSpec::base(3, 8).unwrap();
        let f = SpectralField::from_fn(grid, |x| (x[0] + 0.3).sin() * (2.0 * x[1]).cos() + 0.1 * x[2].cos());
        let g = f.scaled(2.0);
        for r in [2.0, 3.5, 6.0, 10.0, f64::INFINITY] {
            assert_eq!(lebesgue_norm(&g, r), 2.0 * lebesgue_norm(&f, r));
        }
        assert_eq!(sobolev_norm(&g, 0.4), 2.0 * sobolev_norm(&f, 0.4));
    }

    #[test]
    fn pow2_above_is_a_power_of_two() {
        for x in [1e-300, 0.3, 1.0, 3.0, 1e10] {
            let p = pow2_above(x);
            assert!(p > x && p <= 2.0 * x);
            assert_eq!(p.log2().fract(), 0.0);
        }
    }
}
