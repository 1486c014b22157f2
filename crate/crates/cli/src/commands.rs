//! Command dispatch: each command returns its JSON result, CSV tables and
//! whether an invariant was violated.

use serde::Serialize;
use serde_json::{json, Value};
use subpressure::{
    estimate_pressure, maximize, phi_star, power_consistency, Error, IntegralMethod, Result,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{fmt_ext, fmt_f64, Table};
use crate::suite::run_suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Pressure,
    Entropy,
    Phistar,
    Varprinciple,
    Verify,
    Power,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Pressure => "pressure",
            Command::Entropy => "entropy",
            Command::Phistar => "phistar",
            Command::Varprinciple => "varprinciple",
            Command::Verify => "verify",
            Command::Power => "power",
        }
    }
}

pub struct CommandOutput {
    pub result: Value,
    /// `(file stem suffix, table)`; an empty suffix means `<command>.csv`.
    pub tables: Vec<(&'static str, Table)>,
    pub violation: bool,
    /// One-line summary for the terminal.
    pub summary: String,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

pub fn run(cmd: Command, cfg: &ExperimentConfig, exp: &Experiment, seed: u64, tolerance: Option<f64>) -> Result<CommandOutput> {
    match cmd {
        Command::Pressure => pressure(cfg, exp),
        Command::Entropy => entropy(cfg, exp),
        Command::Phistar => phistar(cfg, exp, seed),
        Command::Varprinciple => varprinciple(cfg, exp, seed),
        Command::Power => power(cfg, exp, tolerance),
        Command::Verify => verify(cfg, exp, seed, tolerance),
    }
}

fn pressure(cfg: &ExperimentConfig, exp: &Experiment) -> Result<CommandOutput> {
    let est = estimate_pressure(&exp.sys, &exp.pot, exp.depth(), &cfg.schedules.pressure)?;
    let mut t = Table::new(&["n", "log_partition", "value", "envelope"]);
    for (((n, a), v), e) in est
        .schedule
        .iter()
        .zip(&est.log_partition)
        .zip(&est.values)
        .zip(est.running_envelope())
    {
        t.push(vec![n.to_string(), fmt_ext(*a), fmt_ext(*v), fmt_ext(e)]);
    }
    Ok(CommandOutput {
        summary: format!("pressure {} (envelope {})", fmt_ext(est.reported), fmt_ext(est.upper_envelope)),
        result: json!({ "pressure": to_value(&est), "fekete_margin": fmt_f64(est.fekete_margin()) }),
        tables: vec![("", t)],
        violation: false,
    })
}

fn entropy(cfg: &ExperimentConfig, exp: &Experiment) -> Result<CommandOutput> {
    let mu = exp.measure_or_uniform()?;
    let h = mu.fiber_entropy();
    let mut t = Table::new(&["n", "value", "fiber_entropy", "excess"]);
    let mut values = Vec::new();
    for &n in &cfg.schedules.entropy {
        let v = mu.entropy_partition_limit(n)?;
        values.push(v);
        t.push(vec![n.to_string(), fmt_f64(v), fmt_f64(h), fmt_f64(v - h)]);
    }
    Ok(CommandOutput {
        summary: format!("fiber entropy {}", fmt_f64(h)),
        result: json!({
            "measure": to_value(&mu),
            "fiber_entropy": h,
            "schedule": cfg.schedules.entropy,
            "partition_entropy": values,
        }),
        tables: vec![("", t)],
        violation: false,
    })
}

fn phistar(cfg: &ExperimentConfig, exp: &Experiment, seed: u64) -> Result<CommandOutput> {
    let mu = exp.measure_or_uniform()?;
    let est = phi_star(&mu, &exp.pot, &cfg.schedules.phi_star, &cfg.phi_options(seed))?;
    let mut t = Table::new(&["n", "value", "envelope", "stderr", "method"]);
    let mut env: Option<subpressure::ExtReal<f64>> = None;
    for i in 0..est.schedule.len() {
        let v = est.values[i];
        let e = env.map_or(v, |e| e.min(v));
        env = Some(e);
        t.push(vec![
            est.schedule[i].to_string(),
            fmt_ext(v),
            fmt_ext(e),
            est.stderr[i].map_or_else(String::new, fmt_f64),
            match est.methods[i] {
                IntegralMethod::Exact => "exact".into(),
                IntegralMethod::MonteCarlo => "monte_carlo".into(),
            },
        ]);
    }
    Ok(CommandOutput {
        summary: format!("Phi_* {} (envelope {})", fmt_ext(est.reported), fmt_ext(est.envelope)),
        result: json!({ "measure": to_value(&mu), "phi_star": to_value(&est) }),
        tables: vec![("", t)],
        violation: false,
    })
}

fn varprinciple(cfg: &ExperimentConfig, exp: &Experiment, seed: u64) -> Result<CommandOutput> {
    let opts = cfg.variational_options(exp, seed);
    let r = maximize(&exp.sys, &exp.pot, &opts)?;
    let mut t = Table::new(&["iteration", "objective", "simplex_diameter"]);
    for row in &r.trace {
        t.push(vec![row.iteration.to_string(), fmt_f64(row.value), fmt_f64(row.diameter)]);
    }
    Ok(CommandOutput {
        summary: format!(
            "objective {} pressure {} gap {}",
            fmt_ext(r.objective),
            fmt_ext(r.pressure.reported),
            fmt_f64(r.gap)
        ),
        violation: !r.upper_bound_ok,
        result: to_value(&r),
        tables: vec![("", t)],
    })
}

fn power(cfg: &ExperimentConfig, exp: &Experiment, tolerance: Option<f64>) -> Result<CommandOutput> {
    let tol = tolerance.unwrap_or(cfg.verify.tolerance);
    let mu = exp.measure_or_uniform()?;
    let r = power_consistency(&exp.sys, &exp.pot, cfg.power.k, &cfg.power.schedule, Some(&mu), tol)?;
    let k = r.k as f64;
    let mut t = Table::new(&["quantity", "k_times_base", "power", "abs_error"]);
    for (name, base, pow, err) in [
        ("fiber_entropy", r.entropy, r.entropy_power, r.entropy_error),
        ("phi_star", r.phi_star, r.phi_star_power, r.phi_star_error),
        ("pressure", r.pressure, r.pressure_power, r.pressure_error),
    ] {
        t.push(vec![name.into(), fmt_f64(k * base), fmt_f64(pow), fmt_f64(err)]);
    }
    Ok(CommandOutput {
        summary: format!(
            "k = {}: pressure error {}, entropy error {}",
            r.k,
            fmt_f64(r.pressure_error),
            fmt_f64(r.entropy_error)
        ),
        violation: false,
        result: to_value(&r),
        tables: vec![("", t)],
    })
}

fn verify(cfg: &ExperimentConfig, exp: &Experiment, seed: u64, tolerance: Option<f64>) -> Result<CommandOutput> {
    let tol = tolerance.unwrap_or(cfg.verify.tolerance);
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::Domain("tolerance must be nonnegative".into()));
    }
    let r = run_suite(cfg, exp, seed, tol)?;
    let mut t = Table::new(&["check", "passed", "evaluated", "worst_margin"]);
    for c in &r.checks {
        t.push(vec![c.name.into(), c.passed.to_string(), c.evaluated.to_string(), fmt_f64(c.worst_margin)]);
    }
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    Ok(CommandOutput {
        summary: if failed.is_empty() {
            format!("all {} checks passed", r.checks.len())
        } else {
            format!("violations: {}", failed.join(", "))
        },
        violation: !r.passed,
        result: to_value(&r),
        tables: vec![("", t)],
    })
}
