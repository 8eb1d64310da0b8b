//! A priori energy bounds for the nonlinear component in dimension 4.
//!
//! With `v_tt - Lap v + (v + z)^3 = 0`,
//!
//! ```text
//! dE(v)/dt = -int v_t (3 v^2 z + 3 v z^2 + z^3).
//! ```
//!
//! The middle term is split pointwise by `|v| z^2 <= (v^2 |z| + |z|^3) / 2`,
//! then Cauchy-Schwarz and Hoelder give
//!
//! ```text
//! |dE/dt| <= ||v_t||_2 ((5/2) ||z||_6^3 + (9/2) ||z||_inf ||v||_4^2)
//!         <= sqrt(2E) ((5/2) ||z||_6^3 + (9/2) ||z||_inf ||v||_4^2).
//! ```
//!
//! Using `||v||_4^2 <= 2 E^{1/2}` and dividing by `2 E^{1/2}`,
//! `d/dt E^{1/2} <= SOURCE ||z||_6^3 + GROWTH ||z||_inf E^{1/2}`, so with
//! `E(0) = 0`
//!
//! ```text
//! sup_t E^{1/2} <= SOURCE ||z||_{L^3 L^6}^3 exp(GROWTH ||z||_{L^1 L^inf}).
//! ```
//!
//! Every step holds for grid quadratures as well, since the discrete Hoelder
//! inequality and Parseval's identity are exact on the collocation grid.

use serde::{Deserialize, Serialize};

use super::integrate::EnergyLedger;
use crate::error::{Error, Result};
use crate::spectral::{mixed_norm_oversampled, MixedNormSpec, Trajectory};

/// Coefficient of `||z||_6^3` in the energy rate.
pub const RATE_SOURCE: f64 = 2.5;
/// Coefficient of `||z||_inf ||v||_4^2` in the energy rate.
pub const RATE_COUPLING: f64 = 4.5;
/// `SOURCE = (5/2) / sqrt(2)`.
pub const GRONWALL_SOURCE: f64 = 5.0 * std::f64::consts::SQRT_2 / 4.0;
/// `GROWTH = 2 (9/2) / sqrt(2)`.
pub const GRONWALL_GROWTH: f64 = 9.0 * std::f64::consts::SQRT_2 / 2.0;

/// Right side of the differential inequality for `|dE/dt|`.
pub fn energy_rate_bound(energy: f64, z_l6: f64, z_linf: f64, v_l4: f64) -> f64 {
    (2.0 * energy.max(0.0)).sqrt() * (RATE_SOURCE * z_l6.powi(3) + RATE_COUPLING * z_linf * v_l4 * v_l4)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GronwallBound {
    /// Bound on `sup_t E(v(t))^{1/2}`.
    pub value: f64,
    pub z_l3l6: f64,
    pub z_l1linf: f64,
    pub source_constant: f64,
    pub growth_constant: f64,
}

impl GronwallBound {
    pub fn from_norms(z_l3l6: f64, z_l1linf: f64) -> Self {
        let value = GRONWALL_SOURCE * z_l3l6.powi(3) * (GRONWALL_GROWTH * z_l1linf).exp();
        Self { value, z_l3l6, z_l1linf, source_constant: GRONWALL_SOURCE, growth_constant: GRONWALL_GROWTH }
    }

    /// Bound on `sup_t E(v(t))`.
    pub fn energy(&self) -> f64 {
        self.value * self.value
    }
}

/// Gronwall bound on `sup_{[0, t_end]} E(v)^{1/2}` from the norms of `z`
/// on the native grid. Dimension 4 only.
pub fn gronwall_bound(z: &Trajectory, t_end: f64) -> Result<GronwallBound> {
    gronwall_bound_oversampled(z, t_end, 1)
}

pub fn gronwall_bound_oversampled(z: &Trajectory, t_end: f64, oversample: usize) -> Result<GronwallBound> {
    let grid = z.grid().ok_or_else(|| Error::InvalidParameter("forcing trajectory must carry fields".into()))?;
    if grid.dim != 4 {
        return Err(Error::Dimension { expected: 4, actual: grid.dim });
    }
    let l3l6 = mixed_norm_oversampled(z, &MixedNormSpec::new(3.0, 6.0, 0.0, t_end)?, oversample)?;
    let l1linf = mixed_norm_oversampled(z, &MixedNormSpec::new(1.0, f64::INFINITY, 0.0, t_end)?, oversample)?;
    Ok(GronwallBound::from_norms(l3l6, l1linf))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub steps_checked: usize,
    pub violations: usize,
    /// Smallest `rhs + slack - |dE/dt|` over the checked steps.
    pub worst_margin: f64,
    /// Largest `|dE/dt| / (rhs + slack)` over steps with a positive denominator.
    pub worst_ratio: f64,
    pub worst_time: f64,
}

/// Checks `|dE/dt| <= rhs + slack` at every interior ledger step.
///
/// The rate is a centered difference of the ledger energies. Its truncation
/// error is bounded by `|E'''| dt^2 / 6` with `E'''` estimated from third
/// differences; a further `dt^2 max(rhs)` absorbs the second-order splitting
/// error of the integrator.
pub fn energy_inequality_check(ledger: &EnergyLedger) -> Result<InequalityReport> {
    if ledger.dim != 4 {
        return Err(Error::Dimension { expected: 4, actual: ledger.dim });
    }
    let rec = &ledger.records;
    let h = ledger.dt;
    let e: Vec<f64> = rec.iter().map(|r| r.energy).collect();
    let max_rhs = rec.iter().map(|r| r.rhs_bound).filter(|v| v.is_finite()).fold(0.0, f64::max);
    let mut report = InequalityReport {
        steps_checked: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        worst_ratio: 0.0,
        worst_time: 0.0,
    };
    if e.len() < 5 {
        report.worst_margin = 0.0;
        return Ok(report);
    }
    for n in 2..e.len() - 2 {
        let rate = (e[n + 1] - e[n - 1]) / (2.0 * h);
        let third_fwd = e[n + 2] - 3.0 * e[n + 1] + 3.0 * e[n] - e[n - 1];
        let third_bwd = e[n + 1] - 3.0 * e[n] + 3.0 * e[n - 1] - e[n - 2];
        let third = third_fwd.abs().max(third_bwd.abs()) / h.powi(3);
        let slack = third * h * h / 6.0 + h * h * max_rhs;
        let rhs = rec[n].rhs_bound;
        if !rhs.is_finite() {
            return Err(Error::InvalidParameter("ledger lacks the energy-rate bound".into()));
        }
        let allowed = rhs + slack;
        let margin = allowed - rate.abs();
        report.steps_checked += 1;
        if margin < 0.0 {
            report.violations += 1;
        }
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_time = rec[n].t;
        }
        if allowed > 0.0 {
            report.worst_ratio = report.worst_ratio.max(rate.abs() / allowed);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{GridSpec, LinearFlow, TimeGrid, WavePair};

    #[test]
    fn constants_follow_from_the_rate_coefficients() {
        assert!((GRONWALL_SOURCE - RATE_SOURCE / 2f64.sqrt()).abs() < 1e-15);
        assert!((GRONWALL_GROWTH - 2.0 * RATE_COUPLING / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_forcing_gives_zero_bound() {
        let grid = GridSpec::base(4, 8).unwrap();
        let z = Trajectory::linear(TimeGrid::spanning(0.0, 1.0, 10).unwrap(), WavePair::zeros(grid), LinearFlow::SPer);
        assert_eq!(gronwall_bound(&z, 1.0).unwrap().value, 0.0);
        let g3 = GridSpec::base(3, 8).unwrap();
        let z3 = Trajectory::linear(TimeGrid::spanning(0.0, 1.0, 10).unwrap(), WavePair::zeros(g3), LinearFlow::SPer);
        assert!(matches!(gronwall_bound(&z3, 1.0), Err(Error::Dimension { expected: 4, actual: 3 })));
    }

    #[test]
    fn constant_norms_give_closed_form() {
        let (sigma, mu, t) = (0.8f64, 1.3f64, 2.0f64);
        let b = GronwallBound::from_norms(t.cbrt() * sigma, t * mu);
        let expect = GRONWALL_SOURCE * t * sigma.powi(3) * (GRONWALL_GROWTH * t * mu).exp();
        assert!((b.value - expect).abs() < 1e-12 * expect);
    }
}
