//! Smooth compactly supported cutoffs built from the bump `exp(-1/(1-t^2))`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, SpectralField};

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn bump_integral(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let f = |t: f64| bump(t);
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, 1e-17, 40)
}

fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| 2.0 * bump_integral(-1.0, 0.0))
}

/// C^inf monotone step: 0 for `y <= 0`, 1 for `y >= 1`, `S(y) + S(1-y) = 1`.
pub fn smooth_step(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else if y > 0.5 {
        1.0 - smooth_step(1.0 - y)
    } else {
        bump_integral(-1.0, 2.0 * y - 1.0) / bump_mass()
    }
}

/// One-dimensional plateau: 1 on `[-1, 1]`, 0 outside `(-2, 2)`.
pub fn plateau(x: f64) -> f64 {
    1.0 - smooth_step(x.abs() - 1.0)
}

/// `<T> = 1 + |T|`.
pub fn japanese_bracket(t: f64) -> f64 {
    1.0 + t.abs()
}

/// Smallest period `2 pi m` admitting the scaled cutoff: `4<T> + 2`.
pub fn required_period(t: f64) -> f64 {
    4.0 * japanese_bracket(t) + 2.0
}

/// Values of `eta(x / <T>)` along one axis of `grid` (coordinates in `[-pi m, pi m)`).
pub fn eta_axis(grid: &GridSpec, t: f64) -> Vec<f64> {
    let scale = japanese_bracket(t);
    (0..grid.modes).map(|j| plateau(grid.coordinate(j) / scale)).collect()
}

/// Multiplies the periodization of `f` by the tensor-product cutoff
/// `eta_T(x) = prod_a eta(x_a / <T>)` on the torus of period `2 pi m`.
pub fn cutoff_embed(f: &SpectralField, t: f64, period_multiplier: usize) -> Result<SpectralField> {
    let base = f.grid();
    if base.period_multiplier != 1 {
        return Err(Error::InvalidGrid("cutoff_embed expects a field on the base torus".into()));
    }
    let ext = base.extended(period_multiplier)?;
    let required = required_period(t);
    if ext.period() < required {
        return Err(Error::ExtensionTooSmall { required, available: ext.period() });
    }
    let eta = eta_axis(&ext, t);
    let samples = f.synthesize();
    let (nb, ne, d) = (base.modes, ext.modes, base.dim);
    let mut out = vec![0.0; ext.len()];
    for (idx, v) in out.iter_mut().enumerate() {
        let mut rem = idx;
        let mut weight = 1.0;
        let mut base_idx = 0;
        let mut stride = 1;
        for _ in 0..d {
            let j = rem % ne;
            rem /= ne;
            weight *= eta[j];
            base_idx += (j % nb) * stride;
            stride *= nb;
        }
        if weight != 0.0 {
            *v = weight * samples[base_idx];
        }
    }
    SpectralField::analyze(&out, ext)
}
