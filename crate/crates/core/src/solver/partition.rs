//! Greedy partitions of `[0, T]` into intervals on which a Strichartz norm
//! of the free evolution stays within a budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{time_norm, TimeGrid, Trajectory};

/// `(q, r) = ((d+2)/(d-2), 2(d+2)/(d-2))`.
pub fn strichartz_exponents(dim: usize) -> (f64, f64) {
    let d = dim as f64;
    let q = (d + 2.0) / (d - 2.0);
    (q, 2.0 * q)
}

/// `theta = (d-2) / (2(d+2))`.
pub fn budget_exponent(dim: usize) -> f64 {
    let d = dim as f64;
    (d - 2.0) / (2.0 * (d + 2.0))
}

/// Longest interval on which a constant space norm `sigma` meets the budget
/// `K |I|^theta`: `sigma |I|^{1/q} = K |I|^theta` gives `|I| = (K/sigma)^{2q}`.
pub fn constant_norm_interval(dim: usize, k: f64, sigma: f64) -> f64 {
    let (q, _) = strichartz_exponents(dim);
    (k / sigma).powf(2.0 * q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    /// `0 = t_0 < ... < t_J = T`.
    pub breakpoints: Vec<f64>,
    /// Node indices of the breakpoints in the trajectory's time grid.
    pub nodes: Vec<usize>,
    pub measured: Vec<f64>,
    pub budget: Vec<f64>,
    pub theta: f64,
    pub k: f64,
}

impl PartitionResult {
    pub fn intervals(&self) -> usize {
        self.measured.len()
    }
}

/// Splits nodes `0..=last` greedily: each interval is extended while
/// `accept(a, b)` holds. Fails when a single step is rejected.
pub fn greedy_nodes(
    times: &TimeGrid,
    last: usize,
    mut accept: impl FnMut(usize, usize) -> Result<bool>,
) -> Result<Vec<usize>> {
    let mut nodes = vec![0];
    let mut a = 0;
    while a < last {
        if !accept(a, a + 1)? {
            return Err(Error::DegenerateInterval { time: times.time(a) });
        }
        let mut b = a + 1;
        while b < last && accept(a, b + 1)? {
            b += 1;
        }
        nodes.push(b);
        a = b;
    }
    Ok(nodes)
}

/// Greedy partition with budget `K |I|^theta` on
/// `||z||_{L^q_I L^r_x}`, `(q, r)` the energy-critical Strichartz pair.
pub fn partition_by_strichartz(z: &Trajectory, k: f64, t_end: f64) -> Result<PartitionResult> {
    let grid = z.grid();
    let dim = match (grid, z.states()) {
        (Some(g), _) => g.dim,
        (None, _) => return Err(Error::InvalidParameter("partition needs a field-valued trajectory".into())),
    };
    let (_, r) = strichartz_exponents(dim);
    let profile = z.space_norm_profile(r, 1)?;
    partition_profile(z.times(), &profile, dim, k, t_end)
}

/// Same as [`partition_by_strichartz`] given precomputed `||z(t_i)||_{L^r}`.
pub fn partition_profile(times: &TimeGrid, profile: &[f64], dim: usize, k: f64, t_end: f64) -> Result<PartitionResult> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("budget constant K = {k} must be positive")));
    }
    let last = times.index_of(t_end).filter(|_| times.start.abs() < 1e-12).ok_or_else(|| {
        Error::Interval(format!("trajectory on [{}, {}] does not end at a node {t_end}", times.start, times.end()))
    })?;
    let (q, _) = strichartz_exponents(dim);
    let theta = budget_exponent(dim);
    let measure = |a: usize, b: usize| time_norm(times, profile, q, times.time(a), times.time(b));
    let budget = |a: usize, b: usize| k * (times.time(b) - times.time(a)).powf(theta);
    let nodes = greedy_nodes(times, last, |a, b| Ok(measure(a, b)? <= budget(a, b)))?;
    let mut measured = Vec::new();
    let mut budgets = Vec::new();
    for w in nodes.windows(2) {
        measured.push(measure(w[0], w[1])?);
        budgets.push(budget(w[0], w[1]));
    }
    Ok(PartitionResult {
        breakpoints: nodes.iter().map(|&i| times.time(i)).collect(),
        nodes,
        measured,
        budget: budgets,
        theta,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_values() {
        assert!((budget_exponent(3) - 0.1).abs() < 1e-15);
        assert!((budget_exponent(4) - 1.0 / 6.0).abs() < 1e-15);
        assert!((budget_exponent(5) - 3.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn zero_profile_is_one_interval() {
        let times = TimeGrid::spanning(0.0, 1.0, 20).unwrap();
        let p = partition_profile(&times, &vec![0.0; 21], 4, 1.0, 1.0).unwrap();
        assert_eq!(p.breakpoints, vec![0.0, 1.0]);
    }

    #[test]
    fn constant_profile_matches_closed_form() {
        let steps = 4000;
        let times = TimeGrid::spanning(0.0, 2.0, steps).unwrap();
        let (k, sigma) = (1.0, 1.5);
        for dim in [3, 4, 5] {
            let p = partition_profile(&times, &vec![sigma; steps + 1], dim, k, 2.0).unwrap();
            let ell = constant_norm_interval(dim, k, sigma);
            let first = p.breakpoints[1] - p.breakpoints[0];
            assert!((first - ell).abs() <= times.step * 1.0001, "d={dim}: {first} vs {ell}");
            for (m, b) in p.measured.iter().zip(&p.budget) {
                assert!(m <= b);
            }
        }
    }

    #[test]
    fn degenerate_budget_is_reported() {
        let times = TimeGrid::spanning(0.0, 1.0, 10).unwrap();
        let err = partition_profile(&times, &vec![1e6; 11], 4, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateInterval { time } if time == 0.0));
    }
}
