//! Exact Fourier-space propagators of the linear wave equation and the
//! Duhamel integral operator.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, States, Trajectory, WavePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropagatorKind {
    SPer,
    STilde,
    HalfPlus,
    HalfMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfWaveSign {
    Plus,
    Minus,
}

/// `sin(t k) / k`, extended by its limit `t` at `k = 0`.
pub fn sigma(t: f64, k: f64) -> f64 {
    if k == 0.0 {
        t
    } else {
        (t * k).sin() / k
    }
}

/// Free evolution of `pair` by time `t`: position `cos(t|n|) u0 + sigma u1`,
/// velocity `-|n| sin(t|n|) u0 + cos(t|n|) u1`.
pub fn s_per(t: f64, pair: &WavePair) -> WavePair {
    let k = pair.grid().wavenumbers_shared();
    s_per_with(t, pair, &k)
}

/// [`s_per`] with precomputed wavenumbers.
pub fn s_per_with(t: f64, pair: &WavePair, k: &[f64]) -> WavePair {
    let mut pos = pair.position.clone();
    let mut vel = pair.velocity.clone();
    let (p, v) = (pos.coefficients_mut(), vel.coefficients_mut());
    for i in 0..k.len() {
        let (s, c) = (t * k[i]).sin_cos();
        let a = p[i];
        let b = v[i];
        p[i] = a * c + b * sigma(t, k[i]);
        v[i] = a * (-k[i] * s) + b * c;
    }
    WavePair { position: pos, velocity: vel }
}

/// `-(|n|/<n>) sin(t|n|) u0 + (cos(t|n|)/<n>) u1`.
pub fn s_tilde(t: f64, pair: &WavePair) -> SpectralField {
    let k = pair.grid().wavenumbers_shared();
    let mut out = pair.position.clone();
    let o = out.coefficients_mut();
    let v = pair.velocity.coefficients();
    for i in 0..k.len() {
        let (s, c) = (t * k[i]).sin_cos();
        let jb = 1.0 + k[i];
        o[i] = o[i] * (-k[i] / jb * s) + v[i] * (c / jb);
    }
    out
}

/// `e^{+- i t |n|}` applied to each coefficient; the result is complex-valued.
pub fn half_wave(sign: HalfWaveSign, t: f64, f: &SpectralField) -> SpectralField {
    let k = f.grid().wavenumbers_shared();
    let sgn = match sign {
        HalfWaveSign::Plus => 1.0,
        HalfWaveSign::Minus => -1.0,
    };
    let coeffs =
        f.coefficients().iter().zip(k.iter()).map(|(c, &kn)| c * Complex64::from_polar(1.0, sgn * t * kn)).collect();
    SpectralField::complex_from_coefficients(f.grid(), coeffs).expect("same grid")
}

fn forcing_fields(forcing: &Trajectory) -> Result<Vec<SpectralField>> {
    match forcing.states() {
        States::SpaceNorms { .. } => Err(Error::InvalidParameter("forcing must carry fields".into())),
        _ => Ok((0..forcing.len()).map(|i| forcing.position(i).unwrap().into_owned()).collect()),
    }
}

/// `-int_{t0}^{t} sigma(t - t', |n|) F(t') dt'` by composite trapezoid on the
/// forcing grid. Both endpoints must be forcing nodes.
pub fn duhamel(t0: f64, t: f64, forcing: &Trajectory) -> Result<SpectralField> {
    let times = forcing.times();
    let (i0, i1) = match (times.index_of(t0), times.index_of(t)) {
        (Some(a), Some(b)) if b >= a => (a, b),
        _ => {
            return Err(Error::Interval(format!(
                "[{t0}, {t}] is not spanned by forcing nodes on [{}, {}]",
                times.start,
                times.end()
            )))
        }
    };
    let fields = forcing_fields(forcing)?;
    let grid = fields[i0].grid();
    let k = grid.wavenumbers_shared();
    let mut out = SpectralField::zeros(grid);
    if i1 == i0 {
        return Ok(out);
    }
    let h = times.step;
    let tt = times.time(i1);
    for j in i0..=i1 {
        let w = if j == i0 || j == i1 { 0.5 * h } else { h };
        let lag = tt - times.time(j);
        let acc = out.coefficients_mut();
        for (i, c) in fields[j].coefficients().iter().enumerate() {
            acc[i] -= c * (w * sigma(lag, k[i]));
        }
    }
    Ok(out)
}

/// Duhamel states `(position, velocity)` at every node `t_i >= t_0` of a
/// forcing history, by cumulative trapezoid sums. Same quadrature as
/// [`duhamel`], evaluated in `O(len)` transforms instead of `O(len^2)`.
pub fn duhamel_history(fields: &[SpectralField], step: f64) -> Vec<WavePair> {
    let Some(first) = fields.first() else {
        return Vec::new();
    };
    let grid = first.grid();
    let k = grid.wavenumbers_shared();
    let n = grid.len();
    let zero = Complex64::default();
    // Running integrals of cos(t'k) F and sin(t'k) F (and F, t' F at k = 0).
    let mut a = vec![zero; n];
    let mut b = vec![zero; n];
    let mut prev_a = vec![zero; n];
    let mut prev_b = vec![zero; n];
    let mut out = Vec::with_capacity(fields.len());
    for (j, f) in fields.iter().enumerate() {
        let t = j as f64 * step;
        let mut pos = SpectralField::zeros(grid);
        let mut vel = SpectralField::zeros(grid);
        {
            let (p, v) = (pos.coefficients_mut(), vel.coefficients_mut());
            for i in 0..n {
                let c = f.coefficients()[i];
                let (ga, gb) = if k[i] == 0.0 {
                    (c, c * t)
                } else {
                    let (s, co) = (t * k[i]).sin_cos();
                    (c * co, c * s)
                };
                if j > 0 {
                    a[i] += (prev_a[i] + ga) * (0.5 * step);
                    b[i] += (prev_b[i] + gb) * (0.5 * step);
                }
                prev_a[i] = ga;
                prev_b[i] = gb;
                if k[i] == 0.0 {
                    p[i] = -(a[i] * t - b[i]);
                    v[i] = -a[i];
                } else {
                    let (s, co) = (t * k[i]).sin_cos();
                    p[i] = -(a[i] * s - b[i] * co) / k[i];
                    v[i] = -(a[i] * co + b[i] * s);
                }
            }
        }
        out.push(WavePair { position: pos, velocity: vel });
    }
    out
}
