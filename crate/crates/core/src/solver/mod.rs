//! Time integration of the energy-critical wave equation and of the equation
//! for the nonlinear remainder, with energy bookkeeping, a Picard solver,
//! Strichartz-budget partitions and Gronwall bounds.

mod bounds;
mod integrate;
mod nonlinear;
mod partition;
mod picard;

pub use bounds::{
    energy_inequality_check, energy_rate_bound, gronwall_bound, gronwall_bound_oversampled, GronwallBound,
    InequalityReport, GRONWALL_GROWTH, GRONWALL_SOURCE, RATE_COUPLING, RATE_SOURCE,
};
pub use integrate::{solve_full, solve_perturbed, EnergyLedger, Integrator, LedgerRecord, Solution, SolverConfig};
pub use nonlinear::{
    energy, energy_with, nonlinearity, nonlinearity_with, pointwise_force, pointwise_potential, power_exponent,
    two_thirds_mask, Dealias, ForceEvaluation, ForceEvaluator,
};
pub use partition::{
    budget_exponent, constant_norm_interval, greedy_nodes, partition_by_strichartz, partition_profile,
    strichartz_exponents, PartitionResult,
};
pub use picard::{
    picard_local, picard_local_from, solve_perturbed_picard, x_norm, PicardOutcome, PicardSummary, MAX_CONTRACTION,
};
