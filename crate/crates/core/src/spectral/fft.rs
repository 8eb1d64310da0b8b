//! Axis-wise complex transforms over flat row-major arrays, including the
//! pruned zero-padding used for dealiased products and oversampled synthesis.
//!
//! Frequency axes use the usual FFT ordering: index `k < len/2` is the mode
//! `k`, index `k >= len/2` is the mode `k - len`.

use std::sync::{Arc, Mutex, OnceLock};

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = planner().lock().expect("fft planner poisoned");
    if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    }
}

fn real_planner() -> &'static Mutex<RealFftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<RealFftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(RealFftPlanner::new()))
}

fn plan_c2r(len: usize) -> Arc<dyn ComplexToReal<f64>> {
    real_planner().lock().expect("fft planner poisoned").plan_fft_inverse(len)
}

fn plan_r2c(len: usize) -> Arc<dyn RealToComplex<f64>> {
    real_planner().lock().expect("fft planner poisoned").plan_fft_forward(len)
}

fn split_shape(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

/// Unnormalized transform along one axis. `inverse` selects the `e^{+i k x}` sign.
pub fn transform_axis(data: &mut [Complex64], shape: &[usize], axis: usize, inverse: bool) {
    let (outer, len, inner) = split_shape(shape, axis);
    debug_assert_eq!(data.len(), outer * len * inner);
    if len == 1 {
        return;
    }
    let fft = plan(len, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    if inner == 1 {
        fft.process_with_scratch(data, &mut scratch);
        return;
    }
    // Gather a few columns at a time so the strided reads stay in cache.
    const TILE: usize = 16;
    let block = len * inner;
    let mut buf = vec![Complex64::default(); len * TILE.min(inner)];
    for chunk in data.chunks_exact_mut(block) {
        let mut c0 = 0;
        while c0 < inner {
            let width = TILE.min(inner - c0);
            for k in 0..len {
                let row = &chunk[k * inner + c0..k * inner + c0 + width];
                for (w, &v) in row.iter().enumerate() {
                    buf[w * len + k] = v;
                }
            }
            fft.process_with_scratch(&mut buf[..width * len], &mut scratch);
            for k in 0..len {
                let row = &mut chunk[k * inner + c0..k * inner + c0 + width];
                for (w, v) in row.iter_mut().enumerate() {
                    *v = buf[w * len + k];
                }
            }
            c0 += width;
        }
    }
}

/// Transform along every axis.
pub fn transform_all(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    for axis in 0..shape.len() {
        transform_axis(data, shape, axis, inverse);
    }
}

/// Embeds the frequencies of one axis into a longer axis, filling new modes
/// with zeros. The Nyquist coefficient of an even axis is split equally
/// between `-len/2` and `+len/2` so real fields stay real.
pub fn pad_axis(data: &[Complex64], shape: &[usize], axis: usize, new_len: usize) -> Vec<Complex64> {
    let (outer, len, inner) = split_shape(shape, axis);
    assert!(new_len >= len);
    let mut out = vec![Complex64::default(); outer * new_len * inner];
    let half = len / 2;
    for o in 0..outer {
        let src = &data[o * len * inner..(o + 1) * len * inner];
        let dst = &mut out[o * new_len * inner..(o + 1) * new_len * inner];
        for k in 0..len {
            let row = &src[k * inner..(k + 1) * inner];
            if len % 2 == 0 && k == half && new_len > len {
                let lo = new_len - half;
                for (j, &v) in row.iter().enumerate() {
                    dst[half * inner + j] = v * 0.5;
                    dst[lo * inner + j] = v * 0.5;
                }
            } else {
                let target = if k < half || (len % 2 == 1 && k == half) { k } else { new_len - (len - k) };
                dst[target * inner..(target + 1) * inner].copy_from_slice(row);
            }
        }
    }
    out
}

/// Inverse of [`pad_axis`] on the retained modes: drops frequencies outside
/// the shorter axis and folds the two Nyquist halves back together.
pub fn truncate_axis(data: &[Complex64], shape: &[usize], axis: usize, new_len: usize) -> Vec<Complex64> {
    let (outer, len, inner) = split_shape(shape, axis);
    assert!(new_len <= len);
    let mut out = vec![Complex64::default(); outer * new_len * inner];
    let half = new_len / 2;
    for o in 0..outer {
        let src = &data[o * len * inner..(o + 1) * len * inner];
        let dst = &mut out[o * new_len * inner..(o + 1) * new_len * inner];
        for k in 0..new_len {
            let row = &mut dst[k * inner..(k + 1) * inner];
            if new_len % 2 == 0 && k == half && len > new_len {
                let hi = &src[half * inner..(half + 1) * inner];
                let lo = &src[(len - half) * inner..(len - half + 1) * inner];
                for j in 0..inner {
                    row[j] = hi[j] + lo[j];
                }
            } else {
                let source = if k < half || (new_len % 2 == 1 && k == half) { k } else { len - (new_len - k) };
                row.copy_from_slice(&src[source * inner..(source + 1) * inner]);
            }
        }
    }
    out
}

/// Evaluates coefficients on a grid with `fine` points per axis, padding one
/// axis at a time so each transform only touches lines that carry data.
pub fn synthesize_padded(coeffs: &[Complex64], dim: usize, coarse: usize, fine: usize) -> Vec<Complex64> {
    let mut shape = vec![coarse; dim];
    let mut data = coeffs.to_vec();
    for axis in 0..dim {
        if fine != coarse {
            data = pad_axis(&data, &shape, axis, fine);
            shape[axis] = fine;
        }
        transform_axis(&mut data, &shape, axis, true);
    }
    data
}

/// Forward counterpart of [`synthesize_padded`]; the result is unnormalized.
pub fn analyze_padded(samples: Vec<Complex64>, dim: usize, coarse: usize, fine: usize) -> Vec<Complex64> {
    let mut shape = vec![fine; dim];
    let mut data = samples;
    for axis in (0..dim).rev() {
        transform_axis(&mut data, &shape, axis, false);
        if fine != coarse {
            data = truncate_axis(&data, &shape, axis, coarse);
            shape[axis] = coarse;
        }
    }
    data
}

/// Flat index of `-n'` for the multi-index `o` over `dims` axes of length `len`.
fn negated_outer(mut o: usize, dims: usize, len: usize) -> usize {
    let mut out = 0;
    let mut stride = 1;
    for _ in 0..dims {
        let i = o % len;
        o /= len;
        out += ((len - i) % len) * stride;
        stride *= len;
    }
    out
}

/// [`synthesize_padded`] for Hermitian coefficients, returning the real
/// samples. The last axis is handled by a complex-to-real transform, and the
/// other axes only carry the `coarse/2 + 1` non-negative modes of its spectrum.
pub fn synthesize_real_padded(coeffs: &[Complex64], dim: usize, coarse: usize, fine: usize) -> Vec<f64> {
    let hc = coarse / 2;
    let width = hc + 1;
    let hf = fine / 2 + 1;
    let outer = coarse.pow(dim as u32 - 1);
    let mut data = vec![Complex64::default(); outer * width];
    for o in 0..outer {
        let src = &coeffs[o * coarse..(o + 1) * coarse];
        let dst = &mut data[o * width..(o + 1) * width];
        dst[..hc].copy_from_slice(&src[..hc]);
        dst[hc] = if fine > coarse { src[hc] * 0.5 } else { src[hc] };
    }
    let mut shape = vec![coarse; dim];
    shape[dim - 1] = width;
    for axis in 0..dim - 1 {
        if fine != coarse {
            data = pad_axis(&data, &shape, axis, fine);
            shape[axis] = fine;
        }
        transform_axis(&mut data, &shape, axis, true);
    }
    let c2r = plan_c2r(fine);
    let mut scratch = vec![Complex64::default(); c2r.get_scratch_len()];
    let lines = data.len() / width;
    let mut out = vec![0.0; lines * fine];
    let mut line = vec![Complex64::default(); hf];
    for (src, dst) in data.chunks_exact(width).zip(out.chunks_exact_mut(fine)) {
        line[..width].copy_from_slice(src);
        line[width..].fill(Complex64::default());
        line[0].im = 0.0;
        line[hf - 1].im = 0.0;
        c2r.process_with_scratch(&mut line, dst, &mut scratch).expect("line lengths match the plan");
    }
    out
}

/// [`analyze_padded`] for real samples, returning the full (unnormalized)
/// coefficient array on the coarse grid.
pub fn analyze_real_padded(samples: &[f64], dim: usize, coarse: usize, fine: usize) -> Vec<Complex64> {
    let hc = coarse / 2;
    let width = hc + 1;
    let hf = fine / 2 + 1;
    let r2c = plan_r2c(fine);
    let mut scratch = vec![Complex64::default(); r2c.get_scratch_len()];
    let lines = samples.len() / fine;
    let mut data = vec![Complex64::default(); lines * width];
    let mut buf = vec![0.0; fine];
    let mut spectrum = vec![Complex64::default(); hf];
    for (src, dst) in samples.chunks_exact(fine).zip(data.chunks_exact_mut(width)) {
        buf.copy_from_slice(src);
        r2c.process_with_scratch(&mut buf, &mut spectrum, &mut scratch).expect("line lengths match the plan");
        dst.copy_from_slice(&spectrum[..width]);
    }
    let mut shape = vec![fine; dim];
    shape[dim - 1] = width;
    for axis in (0..dim - 1).rev() {
        transform_axis(&mut data, &shape, axis, false);
        if fine != coarse {
            data = truncate_axis(&data, &shape, axis, coarse);
            shape[axis] = coarse;
        }
    }
    let outer = coarse.pow(dim as u32 - 1);
    let mut out = vec![Complex64::default(); outer * coarse];
    for o in 0..outer {
        let neg = negated_outer(o, dim - 1, coarse);
        let row = &mut out[o * coarse..(o + 1) * coarse];
        let half = &data[o * width..(o + 1) * width];
        let mirror = &data[neg * width..(neg + 1) * width];
        row[..hc].copy_from_slice(&half[..hc]);
        for k in 1..hc {
            row[coarse - k] = mirror[k].conj();
        }
        row[hc] = if fine > coarse { half[hc] + mirror[hc].conj() } else { half[hc] };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let n = data.len();
        let sign = if inverse { 1.0 } else { -1.0 };
        (0..n)
            .map(|k| {
                data.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let phase = sign * 2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                        v * Complex64::from_polar(1.0, phase)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn middle_axis_matches_naive_dft() {
        let shape = [3, 8, 5];
        let data: Vec<Complex64> =
            (0..120).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let mut fast = data.clone();
        transform_axis(&mut fast, &shape, 1, false);
        for o in 0..3 {
            for j in 0..5 {
                let line: Vec<_> = (0..8).map(|k| data[o * 40 + k * 5 + j]).collect();
                let expect = naive_dft(&line, false);
                for k in 0..8 {
                    assert!((fast[o * 40 + k * 5 + j] - expect[k]).norm() < 1e-12);
                }
            }
        }
    }

    fn hermitian_coefficients(dim: usize, n: usize) -> Vec<Complex64> {
        let len = n.pow(dim as u32);
        let raw: Vec<Complex64> =
            (0..len).map(|i| Complex64::new((i as f64 * 0.731).sin(), (i as f64 * 0.419).cos())).collect();
        // Hermitian part: average with the conjugate at the negated index.
        (0..len)
            .map(|i| {
                let neg = negated_outer(i, dim, n);
                (raw[i] + raw[neg].conj()) * 0.5
            })
            .collect()
    }

    #[test]
    fn real_paths_match_complex_paths() {
        for (dim, coarse, fine) in [(1, 8, 8), (1, 8, 24), (2, 6, 12), (3, 4, 12), (3, 8, 8), (4, 4, 8)] {
            let c = hermitian_coefficients(dim, coarse);
            let full = synthesize_padded(&c, dim, coarse, fine);
            let real = synthesize_real_padded(&c, dim, coarse, fine);
            for (a, b) in full.iter().zip(&real) {
                assert!((a.re - b).abs() < 1e-12 && a.im.abs() < 1e-12, "dim {dim} {coarse}->{fine}");
            }
            let back_full = analyze_padded(full.iter().map(|v| Complex64::new(v.re, 0.0)).collect(), dim, coarse, fine);
            let back_real = analyze_real_padded(&real, dim, coarse, fine);
            for (a, b) in back_full.iter().zip(&back_real) {
                assert!((a - b).norm() < 1e-10, "dim {dim} {coarse}->{fine}");
            }
        }
    }

    #[test]
    fn pad_then_truncate_is_identity() {
        let shape = [6, 4];
        let data: Vec<Complex64> = (0..24).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let padded = pad_axis(&data, &shape, 0, 12);
        let back = truncate_axis(&padded, &[12, 4], 0, 6);
        assert_eq!(back, data);
    }

    #[test]
    fn padded_synthesis_interpolates_a_cosine() {
        // cos(x) on 4 points, evaluated on 12 points.
        let mut c = vec![Complex64::default(); 4];
        c[1] = Complex64::new(0.5, 0.0);
        c[3] = Complex64::new(0.5, 0.0);
        let fine = synthesize_padded(&c, 1, 4, 12);
        for (j, v) in fine.iter().enumerate() {
            let x = 2.0 * std::f64::consts::PI * j as f64 / 12.0;
            assert!((v.re - x.cos()).abs() < 1e-14 && v.im.abs() < 1e-14);
        }
        let back = analyze_padded(fine, 1, 4, 12);
        for (a, b) in back.iter().zip(&c) {
            assert!((a / 12.0 - b).norm() < 1e-15);
        }
    }
}
