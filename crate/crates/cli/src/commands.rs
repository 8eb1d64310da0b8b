//! The subcommands: key specs, computation, tables and acceptance checks.

use serde_json::{json, Value};

use stochnlw::experiments::{fsp_experiment, norm_equivalence, truncation_convergence, uniqueness_check, FspConfig};
use stochnlw::montecarlo::{energy_statistics, estimate_tail, fit_subgaussian, EnergyStatsConfig, NormFunctional};
use stochnlw::randomization::{
    khintchine_check, moment_condition_check, randomize_with_seed, Component, DistributionKind, SeedSpec,
};
use stochnlw::solver::{energy_inequality_check, gronwall_bound_oversampled, solve_full, solve_perturbed, Solution};
use stochnlw::spectral::{LinearFlow, TimeGrid, Trajectory};

use crate::config::{KeySpec, RunConfig};
use crate::error::CliError;
use crate::report::{num, Acceptance, Table};

/// Result of a subcommand before emission.
pub struct Outcome {
    pub table: Table,
    pub report: Value,
    pub acceptance: Acceptance,
}

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: KeySpec,
    pub run: fn(&RunConfig, usize) -> Result<Outcome, CliError>,
}

/// Key list followed by the keys shared by every command that builds data.
macro_rules! with_data_keys {
    ($($key:expr),* $(,)?) => {
        &[
            $($key,)*
            ("data", Some("power_law")),
            ("radius", Some("6")),
            ("decay", Some("1.5")),
            ("amplitude", Some("1")),
            ("dist", Some("gaussian")),
            ("seed", None),
            ("out", Some(".")),
        ]
    };
}

pub const COMMANDS: &[Command] = &[
    Command {
        name: "tail",
        about: "Monte Carlo tail of a mixed Strichartz norm of the free evolution, with a sub-Gaussian fit",
        keys: with_data_keys![
            ("d", None),
            ("N", None),
            ("q", None),
            ("r", None),
            ("M", None),
            ("flow", Some("s_per")),
            ("T", Some("1")),
            ("steps", Some("32")),
        ],
        run: tail,
    },
    Command {
        name: "energy",
        about: "Energy of the nonlinear remainder against the Gronwall bound over noise samples",
        keys: with_data_keys![
            ("d", None),
            ("N", None),
            ("M", None),
            ("T", Some("1")),
            ("dt", Some("0.01")),
            ("K", Some("auto")),
            ("dealias", Some("auto")),
        ],
        run: energy,
    },
    Command {
        name: "solve",
        about: "Single run of the full equation or of the remainder, with its energy ledger",
        keys: with_data_keys![
            ("d", None),
            ("N", None),
            ("T", Some("1")),
            ("dt", Some("0.01")),
            ("mode", Some("full")),
            ("dealias", Some("auto")),
            ("oversample", Some("1")),
        ],
        run: solve,
    },
    Command {
        name: "fsp",
        about: "Finite speed of propagation: extended-torus cutoff evolution against the periodic one",
        keys: with_data_keys![
            ("d", None),
            ("N", None),
            ("m", Some("3")),
            ("T", Some("1")),
            ("horizon", Some("auto")),
            ("dt", Some("0.01")),
            ("every", Some("10")),
            ("margin", Some("2")),
            ("linear", Some("false")),
            ("dealias", Some("none")),
            ("tol", Some("1e-6")),
        ],
        run: fsp,
    },
    Command {
        name: "converge",
        about: "Errors of the remainder under truncation of the random data",
        keys: with_data_keys![
            ("d", None),
            ("N", None),
            ("levels", None),
            ("T", Some("1")),
            ("dt", Some("0.01")),
            ("dealias", Some("auto")),
        ],
        run: converge,
    },
    Command {
        name: "unique",
        about: "Picard contraction and start independence on every partition interval",
        keys: with_data_keys![
            ("d", None),
            ("N", None),
            ("K", None),
            ("T", Some("1")),
            ("dt", Some("0.01")),
            ("perturbation", Some("0.1")),
            ("dealias", Some("auto")),
            ("tol", Some("1e-8")),
        ],
        run: unique,
    },
    Command {
        name: "normcheck",
        about: "Cutoff norm equivalence ratios over random functions",
        keys: with_data_keys![
            ("d", None),
            ("N", None),
            ("m", Some("auto")),
            ("s_values", Some("0,0.5,0.9")),
            ("t_values", Some("1,2,4")),
            ("functions", Some("20")),
        ],
        run: normcheck,
    },
    Command {
        name: "khintchine",
        about: "Empirical moments of a randomized coefficient sum against the l^2 norm",
        keys: with_data_keys![("d", None), ("N", None), ("M", None), ("p_values", Some("2,4,6"))],
        run: khintchine,
    },
    Command {
        name: "momentcheck",
        about: "Empirical moment-generating function of the noise against exp(c gamma^2)",
        keys: &[
            ("M", None),
            ("dist", Some("gaussian")),
            ("component", Some("complex")),
            ("gammas", Some("0,0.5,1,1.5,2")),
            ("tol", Some("0.05")),
            ("seed", None),
            ("out", Some(".")),
        ],
        run: momentcheck,
    },
];

fn accept(passed: bool, detail: String) -> Acceptance {
    Acceptance { passed, detail }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn randomized(cfg: &RunConfig) -> Result<stochnlw::spectral::WavePair, CliError> {
    let grid = cfg.grid()?;
    let data = cfg.data(grid)?;
    Ok(randomize_with_seed(&data, &SeedSpec::new(cfg.u64("seed")?), cfg.dist()?))
}

fn tail(cfg: &RunConfig, workers: usize) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let data = cfg.data(grid)?;
    let functional =
        NormFunctional::new(cfg.flow()?, cfg.f64("q")?, cfg.f64("r")?, 0.0, cfg.positive("T")?, cfg.usize("steps")?)?;
    let curve = estimate_tail(&functional, &data, cfg.dist()?, cfg.usize("M")?, cfg.u64("seed")?, workers)?;
    let mut table = Table::new("lambda,p_hat,ci_lo,ci_hi");
    for i in 0..curve.len() {
        table.push(&[num(curve.lambda[i]), num(curve.p_hat[i]), num(curve.ci_lo[i]), num(curve.ci_hi[i])]);
    }
    let (report, acceptance) = match fit_subgaussian(&curve) {
        Ok(fit) => {
            let passed = fit.slope < 0.0 && fit.r_squared >= 0.9;
            let detail = format!("slope {} (< 0), r_squared {} (>= 0.9)", num(fit.slope), num(fit.r_squared));
            (json!({ "samples": curve.samples, "points": curve.len(), "fit": to_value(&fit) }), accept(passed, detail))
        }
        Err(e) => {
            (json!({ "samples": curve.samples, "points": curve.len(), "fit": null }), accept(false, e.to_string()))
        }
    };
    Ok(Outcome { table, report, acceptance })
}

fn energy(cfg: &RunConfig, workers: usize) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let data = cfg.data(grid)?;
    let stats = EnergyStatsConfig {
        t_end: cfg.positive("T")?,
        samples: cfg.usize("M")?,
        seed: cfg.u64("seed")?,
        dist: cfg.dist()?,
        solver: cfg.solver()?,
        budget: cfg.auto_f64("K")?,
    };
    let report = energy_statistics(&data, &stats, workers)?;
    let mut table = Table::new("sample,sup_energy,bound,violates_bound,intervals,inequality_violations");
    for s in &report.per_sample {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        table.push(&[
            s.index.to_string(),
            num(s.sup_energy),
            opt(s.bound),
            s.violates_bound.to_string(),
            s.intervals.map(|v| v.to_string()).unwrap_or_default(),
            s.inequality_violations.map(|v| v.to_string()).unwrap_or_default(),
        ]);
    }
    let sum = &report.summary;
    let passed = sum.failed == 0 && sum.violations == 0 && sum.inequality_violations == 0;
    let detail = format!(
        "{} failed samples, {} bound violations, {} inequality violations",
        sum.failed, sum.violations, sum.inequality_violations
    );
    Ok(Outcome { table, report: to_value(&report), acceptance: accept(passed, detail) })
}

fn ledger_table(solution: &Solution) -> Table {
    let mut table = Table::new("t,energy,h1_norm,rhs_bound");
    for r in &solution.ledger.records {
        table.push(&[num(r.t), num(r.energy), num(r.h1_norm), num(r.rhs_bound)]);
    }
    table
}

fn solve(cfg: &RunConfig, _workers: usize) -> Result<Outcome, CliError> {
    let data = randomized(cfg)?;
    let solver = cfg.solver()?;
    let t_end = cfg.positive("T")?;
    let oversample = cfg.usize("oversample")?;
    if oversample == 0 {
        return Err(CliError::Usage("oversample must be at least 1".into()));
    }
    let (solution, bound) = match cfg.str("mode") {
        "full" => (solve_full(&data, t_end, &solver)?, None),
        "perturbed" => {
            let times = TimeGrid::new(0.0, solver.dt, solver.steps(t_end)? + 1)?;
            let z = Trajectory::linear(times, data, LinearFlow::SPer);
            let solution = solve_perturbed(&z, t_end, &solver)?;
            let bound = (z.grid().map(|g| g.dim) == Some(4)).then(|| gronwall_bound_oversampled(&z, t_end, oversample));
            (solution, bound.transpose()?)
        }
        _ => {
            return Err(CliError::Usage(format!(
                "invalid value `{}` for key `mode`: expected full or perturbed",
                cfg.str("mode")
            )))
        }
    };
    let inequality = (solution.ledger.dim == 4).then(|| energy_inequality_check(&solution.ledger)).transpose()?;
    let drift = solution.ledger.relative_drift();
    let report = json!({
        "steps": solution.ledger.records.len().saturating_sub(1),
        "relative_drift": drift,
        "sup_energy": solution.ledger.sup_energy(),
        "gronwall": bound.map(|b| to_value(&b)),
        "inequality": inequality.as_ref().map(to_value),
    });
    let mut passed = true;
    let mut detail = format!("relative energy drift {}", num(drift));
    if let (Some(b), "perturbed") = (bound, cfg.str("mode")) {
        let ok = solution.ledger.sup_energy().sqrt() <= b.value;
        passed &= ok;
        detail.push_str(&format!("; sup E^(1/2) within Gronwall bound: {ok}"));
    }
    if let Some(ineq) = &inequality {
        if cfg.str("mode") == "perturbed" {
            passed &= ineq.violations == 0;
            detail.push_str(&format!("; {} inequality violations", ineq.violations));
        }
    }
    Ok(Outcome { table: ledger_table(&solution), report, acceptance: accept(passed, detail) })
}

fn fsp(cfg: &RunConfig, _workers: usize) -> Result<Outcome, CliError> {
    let base = cfg.grid()?;
    let data = cfg.data(base)?;
    let cutoff = cfg.positive("T")?;
    let mut fsp =
        FspConfig::new(base, cfg.usize("m")?, cutoff, cfg.auto_f64("horizon")?.unwrap_or(cutoff), cfg.solver()?);
    fsp.margin_cells = cfg.usize("margin")?;
    fsp.output_every = cfg.usize("every")?;
    fsp.linear_only = cfg.bool("linear")?;
    let tol = cfg.f64("tol")?;
    let report = fsp_experiment(&fsp, &data, cfg.dist()?, cfg.u64("seed")?)?;
    let mut table = Table::new("t,max_discrepancy,region_points,max_abs");
    for r in &report.records {
        table.push(&[num(r.t), num(r.max_discrepancy), r.region_points.to_string(), num(r.max_abs)]);
    }
    let passed = report.max_discrepancy <= tol;
    let detail = format!("max discrepancy {} (<= {})", num(report.max_discrepancy), num(tol));
    Ok(Outcome { table, report: to_value(&report), acceptance: accept(passed, detail) })
}

fn converge(cfg: &RunConfig, _workers: usize) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let data = cfg.data(grid)?;
    let levels = cfg.u64_list("levels")?;
    let table_data =
        truncation_convergence(&data, cfg.dist()?, cfg.u64("seed")?, &levels, cfg.positive("T")?, &cfg.solver()?)?;
    let mut table = Table::new("N,h1_err,strichartz_err");
    for r in &table_data.rows {
        table.push(&[r.level.to_string(), num(r.h1_err), num(r.strichartz_err)]);
    }
    let passed = table_data.is_monotone(0.0);
    let detail = format!("errors nonincreasing in the truncation level: {passed}");
    Ok(Outcome { table, report: to_value(&table_data), acceptance: accept(passed, detail) })
}

fn unique(cfg: &RunConfig, _workers: usize) -> Result<Outcome, CliError> {
    let data = randomized(cfg)?;
    let solver = cfg.solver()?;
    let t_end = cfg.positive("T")?;
    let times = TimeGrid::new(0.0, solver.dt, solver.steps(t_end)? + 1)?;
    let z = Trajectory::linear(times, data, LinearFlow::SPer);
    let tol = cfg.f64("tol")?;
    let report = uniqueness_check(
        &z,
        t_end,
        cfg.positive("K")?,
        cfg.f64("perturbation")?,
        cfg.u64("seed")?.wrapping_add(1),
        &solver,
    )?;
    let mut table = Table::new("start,end,contraction,limit_distance,limit_size,endpoint_distance");
    for i in &report.intervals {
        table.push(&[
            num(i.start),
            num(i.end),
            num(i.contraction),
            num(i.limit_distance),
            num(i.limit_size),
            num(i.endpoint_distance),
        ]);
    }
    let passed = report.max_contraction <= 0.5 && report.max_relative_distance <= tol;
    let detail = format!(
        "max contraction {} (<= 0.5), max relative limit distance {} (<= {})",
        num(report.max_contraction),
        num(report.max_relative_distance),
        num(tol)
    );
    Ok(Outcome { table, report: to_value(&report), acceptance: accept(passed, detail) })
}

/// Band `[1/C, C]` for the norm-equivalence ratios.
const RATIO_BAND: f64 = 10.0;

fn normcheck(cfg: &RunConfig, _workers: usize) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let shape = cfg.data(grid)?;
    let dist = cfg.dist()?;
    let seed = SeedSpec::new(cfg.u64("seed")?);
    let s_values = cfg.f64_list("s_values")?;
    let t_values = cfg.f64_list("t_values")?;
    let extension = cfg.auto_usize("m")?;
    let mut table = Table::new("function,s,T,m,ratio,cutoff_norm,base_norm,lower_bound");
    let mut rows = Vec::new();
    for f in 0..cfg.usize("functions")? {
        let field = randomize_with_seed(&shape, &seed.with_sample(f as u64), dist).position;
        for &s in &s_values {
            for r in norm_equivalence(&field, s, &t_values, extension)? {
                table.push(&[
                    f.to_string(),
                    num(r.s),
                    num(r.t),
                    r.extension.to_string(),
                    num(r.ratio),
                    num(r.cutoff_norm),
                    num(r.base_norm),
                    r.lower_bound_holds().map(|b| b.to_string()).unwrap_or_default(),
                ]);
                rows.push(r);
            }
        }
    }
    let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let lower_ok = rows.iter().all(|r| r.lower_bound_holds() != Some(false));
    let passed = !rows.is_empty() && lo >= 1.0 / RATIO_BAND && hi <= RATIO_BAND && lower_ok;
    let detail = format!("ratios in [{}, {}], band [0.1, 10]; lower bound holds: {lower_ok}", num(lo), num(hi));
    let report = json!({ "min_ratio": lo, "max_ratio": hi, "lower_bound_holds": lower_ok, "rows": rows.len() });
    Ok(Outcome { table, report, acceptance: accept(passed, detail) })
}

fn khintchine(cfg: &RunConfig, _workers: usize) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let c = cfg.data(grid)?.position;
    let report = khintchine_check(
        &c,
        &cfg.f64_list("p_values")?,
        cfg.usize("M")?,
        cfg.dist()?,
        &SeedSpec::new(cfg.u64("seed")?),
    )?;
    let mut table = Table::new("p,moment,ratio");
    for r in &report.rows {
        table.push(&[num(r.p), num(r.moment), num(r.ratio)]);
    }
    let target = report.l2_norm * report.l2_norm;
    let gap = (report.second_moment - target).abs();
    let passed = gap <= 3.0 * report.second_moment_std_error;
    let detail =
        format!("|E|S|^2 - ||c||^2| = {} vs 3 standard errors {}", num(gap), num(3.0 * report.second_moment_std_error));
    Ok(Outcome { table, report: to_value(&report), acceptance: accept(passed, detail) })
}

fn momentcheck(cfg: &RunConfig, _workers: usize) -> Result<Outcome, CliError> {
    let component = match cfg.str("component") {
        "complex" => Component::Complex,
        "zero" => Component::Zero,
        other => {
            return Err(CliError::Usage(format!(
                "invalid value `{other}` for key `component`: expected complex or zero"
            )))
        }
    };
    let dist: DistributionKind = cfg.dist()?;
    let tol = cfg.f64("tol")?;
    let report = moment_condition_check(
        dist,
        component,
        &cfg.f64_list("gammas")?,
        cfg.usize("M")?,
        &SeedSpec::new(cfg.u64("seed")?),
    )?;
    let mut table = Table::new("gamma,empirical,analytic,bound,ratio");
    for r in &report.rows {
        table.push(&[num(r.gamma), num(r.empirical), num(r.analytic), num(r.bound), num(r.ratio)]);
    }
    let passed = report.worst_analytic_ratio <= 1.0 + 1e-12 && report.worst_ratio <= 1.0 + tol;
    let detail = format!(
        "worst analytic ratio {} (<= 1), worst empirical ratio {} (<= 1 + {})",
        num(report.worst_analytic_ratio),
        num(report.worst_ratio),
        num(tol)
    );
    Ok(Outcome { table, report: to_value(&report), acceptance: accept(passed, detail) })
}
