use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::field::{SpectralField, WavePair};
use super::grid::GridSpec;
use super::norms::{pow2_above, GridSamples};
use crate::error::{Error, Result};
use crate::propagators;

/// Uniform time grid `start + i * step`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || len == 0 {
            return Err(Error::Interval(format!("invalid time grid step {step}, len {len}")));
        }
        Ok(Self { start, step, len })
    }

    /// Grid covering `[start, end]` with `steps` uniform intervals.
    pub fn spanning(start: f64, end: f64, steps: usize) -> Result<Self> {
        if !(end > start) || steps == 0 {
            return Err(Error::Interval(format!("cannot span [{start}, {end}] with {steps} steps")));
        }
        Self::new(start, (end - start) / steps as f64, steps + 1)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.time(i)).collect()
    }

    /// Index of the node at `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.start) / self.step;
        let i = x.round();
        if (x - i).abs() <= 1e-9 && i >= 0.0 && (i as usize) < self.len {
            Some(i as usize)
        } else {
            None
        }
    }

    pub fn covers(&self, a: f64, b: f64) -> bool {
        let slack = 1e-9 * self.step;
        a >= self.start - slack && b <= self.end() + slack && b >= a
    }
}

/// Which field a lazily evaluated linear trajectory reports as its position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearFlow {
    SPer,
    STilde,
}

#[derive(Debug, Clone)]
pub enum States {
    Pairs(Vec<WavePair>),
    Fields(Vec<SpectralField>),
    /// Free evolution of `data`, evaluated exactly at each node on demand.
    Linear {
        data: WavePair,
        flow: LinearFlow,
    },
    /// Precomputed `||u(t)||_{L^r_x}` samples.
    SpaceNorms {
        r: f64,
        values: Vec<f64>,
    },
}

/// Time-sampled evolution on a uniform grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: TimeGrid,
    states: States,
}

impl Trajectory {
    pub fn from_pairs(times: TimeGrid, pairs: Vec<WavePair>) -> Result<Self> {
        check_len(&times, pairs.len())?;
        Ok(Self { times, states: States::Pairs(pairs) })
    }

    pub fn from_fields(times: TimeGrid, fields: Vec<SpectralField>) -> Result<Self> {
        check_len(&times, fields.len())?;
        Ok(Self { times, states: States::Fields(fields) })
    }

    pub fn linear(times: TimeGrid, data: WavePair, flow: LinearFlow) -> Self {
        Self { times, states: States::Linear { data, flow } }
    }

    pub fn from_space_norms(times: TimeGrid, r: f64, values: Vec<f64>) -> Result<Self> {
        check_len(&times, values.len())?;
        Ok(Self { times, states: States::SpaceNorms { r, values } })
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn states(&self) -> &States {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len
    }

    pub fn is_empty(&self) -> bool {
        self.times.len == 0
    }

    pub fn grid(&self) -> Option<GridSpec> {
        match &self.states {
            States::Pairs(p) => p.first().map(WavePair::grid),
            States::Fields(f) => f.first().map(SpectralField::grid),
            States::Linear { data, .. } => Some(data.grid()),
            States::SpaceNorms { .. } => None,
        }
    }

    /// Position field at node `i`; `None` for norm-only trajectories.
    pub fn position(&self, i: usize) -> Option<Cow<'_, SpectralField>> {
        match &self.states {
            States::Pairs(p) => Some(Cow::Borrowed(&p[i].position)),
            States::Fields(f) => Some(Cow::Borrowed(&f[i])),
            States::Linear { data, flow: LinearFlow::SPer } => {
                Some(Cow::Owned(propagators::s_per(self.times.time(i), data).position))
            }
            States::Linear { data, flow: LinearFlow::STilde } => {
                Some(Cow::Owned(propagators::s_tilde(self.times.time(i), data)))
            }
            States::SpaceNorms { .. } => None,
        }
    }

    /// Full state at node `i` where one is available.
    pub fn pair(&self, i: usize) -> Option<Cow<'_, WavePair>> {
        match &self.states {
            States::Pairs(p) => Some(Cow::Borrowed(&p[i])),
            States::Linear { data, flow: LinearFlow::SPer } => {
                Some(Cow::Owned(propagators::s_per(self.times.time(i), data)))
            }
            _ => None,
        }
    }

    /// `||u(t_i)||_{L^r_x}` at every node.
    pub fn space_norm_profile(&self, r: f64, oversample: usize) -> Result<Vec<f64>> {
        if let States::SpaceNorms { r: stored, values } = &self.states {
            if *stored != r {
                return Err(Error::InvalidParameter(format!("trajectory stores L^{stored} samples, L^{r} requested")));
            }
            return Ok(values.clone());
        }
        Ok((0..self.len())
            .map(|i| {
                let u = self.position(i).expect("field-valued trajectory");
                GridSamples::of(&u, oversample).lp_norm(r)
            })
            .collect())
    }
}

fn check_len(times: &TimeGrid, n: usize) -> Result<()> {
    if times.len != n {
        return Err(Error::Interval(format!("{n} states for {} time nodes", times.len)));
    }
    Ok(())
}

/// Exponents and time interval of an `L^q_t L^r_x` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub q: f64,
    pub r: f64,
    pub start: f64,
    pub end: f64,
    /// Set by [`MixedNormSpec::tag_admissibility`].
    pub admissible: Option<bool>,
}

impl MixedNormSpec {
    pub fn new(q: f64, r: f64, start: f64, end: f64) -> Result<Self> {
        if !(q >= 1.0) || !(r >= 2.0) {
            return Err(Error::InvalidParameter(format!("exponents (q, r) = ({q}, {r}) out of range")));
        }
        if !(end > start) {
            return Err(Error::Interval(format!("empty interval [{start}, {end}]")));
        }
        Ok(Self { q, r, start, end, admissible: None })
    }

    /// Records whether `(q, r)` is an `s`-wave admissible pair in dimension `d`:
    /// `1/q + (d-1)/(2r) <= (d-1)/4` and `1/q + d/r = d/2 - s`.
    pub fn tag_admissibility(mut self, dim: usize, s: f64) -> Self {
        let d = dim as f64;
        let inv_q = 1.0 / self.q;
        let inv_r = 1.0 / self.r;
        let decay = inv_q + (d - 1.0) / 2.0 * inv_r <= (d - 1.0) / 4.0 + 1e-12;
        let scaling = (inv_q + d * inv_r - (d / 2.0 - s)).abs() < 1e-12;
        self.admissible = Some(decay && scaling);
        self
    }
}

/// `||u||_{L^q_t(I; L^r_x)}` with composite trapezoid in time over the
/// trajectory nodes (linear interpolation at off-node endpoints).
pub fn mixed_norm(traj: &Trajectory, spec: &MixedNormSpec) -> Result<f64> {
    mixed_norm_oversampled(traj, spec, 1)
}

pub fn mixed_norm_oversampled(traj: &Trajectory, spec: &MixedNormSpec, oversample: usize) -> Result<f64> {
    if !traj.times.covers(spec.start, spec.end) {
        return Err(Error::Interval(format!(
            "[{}, {}] exceeds trajectory range [{}, {}]",
            spec.start,
            spec.end,
            traj.times.start,
            traj.times.end()
        )));
    }
    let (lo, hi) = node_span(&traj.times, spec.start, spec.end);
    let profile = match &traj.states {
        States::SpaceNorms { .. } => traj.space_norm_profile(spec.r, 1)?,
        _ => (0..traj.len())
            .map(|i| {
                if i < lo || i > hi {
                    return 0.0;
                }
                let u = traj.position(i).expect("field-valued trajectory");
                GridSamples::of(&u, oversample).lp_norm(spec.r)
            })
            .collect(),
    };
    time_norm(&traj.times, &profile, spec.q, spec.start, spec.end)
}

/// Nodes whose cells intersect `[a, b]`.
fn node_span(times: &TimeGrid, a: f64, b: f64) -> (usize, usize) {
    let lo = ((a - times.start) / times.step + 1e-9).floor().max(0.0) as usize;
    let hi = (((b - times.start) / times.step - 1e-9).ceil().max(0.0) as usize).min(times.len - 1);
    (lo.min(hi), hi)
}

/// `(int_a^b g(t)^q dt)^{1/q}` for node samples `g`, trapezoid in `g^q`;
/// maximum over `[a, b]` of the piecewise-linear interpolant when `q = inf`.
pub fn time_norm(times: &TimeGrid, profile: &[f64], q: f64, a: f64, b: f64) -> Result<f64> {
    if profile.len() != times.len {
        return Err(Error::Interval("profile length differs from time grid".into()));
    }
    if !times.covers(a, b) {
        return Err(Error::Interval(format!("[{a}, {b}] outside [{}, {}]", times.start, times.end())));
    }
    let h = times.step;
    let pos = |t: f64| ((t - times.start) / h).clamp(0.0, (times.len - 1) as f64);
    let (pa, pb) = (pos(a), pos(b));
    let interp = |p: f64, vals: &dyn Fn(usize) -> f64| -> f64 {
        let i = (p.floor() as usize).min(times.len - 1);
        let frac = p - i as f64;
        if frac <= 1e-12 || i + 1 >= times.len {
            vals(i)
        } else {
            vals(i) * (1.0 - frac) + vals(i + 1) * frac
        }
    };
    let first = pa.ceil() as usize;
    let last = pb.floor() as usize;
    if q.is_infinite() {
        let g = |i: usize| profile[i];
        let mut m = interp(pa, &g).max(interp(pb, &g));
        for &v in profile.iter().take(last + 1).skip(first) {
            m = m.max(v);
        }
        return Ok(m);
    }
    let max = profile.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 || b == a {
        return Ok(0.0);
    }
    let scale = pow2_above(max);
    let h_of = |i: usize| (profile[i].abs() / scale).powf(q);
    // Breakpoints: a, interior nodes, b.
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(last.saturating_sub(first) + 3);
    pts.push((pa, interp(pa, &h_of)));
    for i in first..=last.min(times.len - 1) {
        let p = i as f64;
        if p > pa + 1e-12 && p < pb - 1e-12 {
            pts.push((p, h_of(i)));
        }
    }
    pts.push((pb, interp(pb, &h_of)));
    let integral: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * h * (w[0].1 + w[1].1)).sum();
    Ok(scale * integral.powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn constant_trajectory_norm() {
        let grid = GridSpec::base(3, 8).unwrap();
        let times = TimeGrid::spanning(0.0, 2.0, 8).unwrap();
        let fields = vec![SpectralField::constant(grid, 1.0); times.len];
        let traj = Trajectory::from_fields(times, fields).unwrap();
        let spec = MixedNormSpec::new(3.0, 6.0, 0.0, 2.0).unwrap();
        let v = mixed_norm(&traj, &spec).unwrap();
        let e = 2f64.powf(1.0 / 3.0) * (2.0 * PI).sqrt();
        assert!((v - e).abs() < 1e-12 * e);
    }

    #[test]
    fn zero_and_linear_in_time() {
        let grid = GridSpec::base(3, 8).unwrap();
        let times = TimeGrid::spanning(0.0, 1.0, 10).unwrap();
        let zero = Trajectory::from_fields(times, vec![SpectralField::zeros(grid); 11]).unwrap();
        let spec = MixedNormSpec::new(4.0, 4.0, 0.0, 1.0).unwrap();
        assert_eq!(mixed_norm(&zero, &spec).unwrap(), 0.0);

        let mut c = SpectralField::zeros(grid);
        c.set_mode(&[1, 0, 0], Complex64::new(0.5, 0.0)).unwrap();
        let fields = times.times().iter().map(|&t| c.scaled(t)).collect();
        let traj = Trajectory::from_fields(times, fields).unwrap();
        let inf = MixedNormSpec::new(f64::INFINITY, f64::INFINITY, 0.0, 1.0).unwrap();
        assert!((mixed_norm(&traj, &inf).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interval_outside_range_is_rejected() {
        let grid = GridSpec::base(3, 4).unwrap();
        let times = TimeGrid::spanning(0.0, 1.0, 4).unwrap();
        let traj = Trajectory::from_fields(times, vec![SpectralField::zeros(grid); 5]).unwrap();
        let spec = MixedNormSpec::new(2.0, 2.0, 0.5, 1.5).unwrap();
        assert!(matches!(mixed_norm(&traj, &spec), Err(Error::Interval(_))));
    }

    #[test]
    fn off_node_endpoints_interpolate() {
        let times = TimeGrid::spanning(0.0, 1.0, 4).unwrap();
        let profile = vec![1.0; 5];
        let v = time_norm(&times, &profile, 1.0, 0.1, 0.6).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        let ramp: Vec<f64> = times.times();
        let w = time_norm(&times, &ramp, f64::INFINITY, 0.0, 0.6).unwrap();
        assert!((w - 0.6).abs() < 1e-14);
    }

    #[test]
    fn admissibility_tags() {
        // (q, r) = (3, 6) in d = 4 is 1-wave admissible; (5, 10) in d = 3 as well.
        let a = MixedNormSpec::new(3.0, 6.0, 0.0, 1.0).unwrap().tag_admissibility(4, 1.0);
        assert_eq!(a.admissible, Some(true));
        let b = MixedNormSpec::new(5.0, 10.0, 0.0, 1.0).unwrap().tag_admissibility(3, 1.0);
        assert_eq!(b.admissible, Some(true));
        let c = MixedNormSpec::new(2.0, 2.0, 0.0, 1.0).unwrap().tag_admissibility(3, 1.0);
        assert_eq!(c.admissible, Some(false));
    }
}
