//! Figure-style parameter sweeps. Grid points run in parallel; rows come back
//! in grid order, one per (point, user).

use cwf_core::analytic::{fixed_length_blocklength_in, AwgnScenario, QueueScenario};
use cwf_core::channel::{sinr_awgn, sinr_fading, ChannelField};
use cwf_core::montecarlo::{
    derive_seed, simulate_awgn_multiuser, simulate_block_fading_random, simulate_queue,
    StoppingOutcome,
};
use cwf_core::waterfill::FastFadingScenario;
use cwf_core::{
    full_interference_lengths, message_threshold, optimize_threshold, rayleigh_order_means,
    thm1_lengths, thm1_raw_lengths, thm2_lengths, thm3_coeffs, GainVector, PowerLevel, TrialPlan,
};
use rayon::prelude::*;

use crate::config::{ExperimentKind, ResolvedConfig};
use crate::error::{CliError, Result};
use crate::output::{fmt_g9, fmt_opt, Table};

const SIM_COLUMNS: [&str; 5] = ["sim_length", "sim_ci95", "sim_cap_hits", "sim_trials", "seed"];

pub fn run_sweep(cfg: &ResolvedConfig) -> Result<Table> {
    match cfg.kind {
        ExperimentKind::Thm1Sweep => run_thm1_sweep(cfg),
        ExperimentKind::QueueSweep => run_queue_sweep(cfg),
        ExperimentKind::FadingSweep => run_fading_sweep(cfg),
        ExperimentKind::WaterfillSweep => run_waterfill_sweep(cfg),
        ExperimentKind::Validate => Err(CliError::config("validate is not a sweep")),
    }
}

fn header(fixed: &[&'static str], simulate: bool) -> Vec<&'static str> {
    let mut h = fixed.to_vec();
    if simulate {
        h.extend(SIM_COLUMNS);
    }
    h
}

fn collect_rows(points: Vec<Result<Vec<Vec<String>>>>) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for p in points {
        rows.extend(p?);
    }
    Ok(rows)
}

fn plan_for(cfg: &ResolvedConfig, index: usize) -> Result<(TrialPlan, u64)> {
    let seed = derive_seed(cfg.seed.unwrap_or(0), index as u64);
    Ok((TrialPlan::new(cfg.trials, seed)?, seed))
}

/// Simulated columns for user `j`, scaled by `1 − ε` like the analytic length.
fn sim_cells(out: &StoppingOutcome<f64>, j: usize, epsilon: f64, seed: u64) -> Vec<String> {
    let scale = 1.0 - epsilon;
    vec![
        fmt_g9(scale * out.mean[j]),
        fmt_g9(scale * out.ci95(j)),
        out.cap_hits.to_string(),
        out.trials.to_string(),
        seed.to_string(),
    ]
}

/// Fixed-length blocklength, or `None` when `ε = 0` makes it unbounded.
fn fixed_n(bits: u32, snr: f64, epsilon: f64, field: ChannelField) -> Result<Option<f64>> {
    if epsilon == 0.0 {
        return Ok(None);
    }
    Ok(Some(fixed_length_blocklength_in(bits, snr, epsilon, field)? as f64))
}

fn savings(length: f64, n: Option<f64>) -> Option<f64> {
    n.map(|n| 1.0 - length / n)
}

/// Average lengths with interference cancellation against the fixed-length
/// code that runs all `S` users concurrently for its whole block.
pub fn run_thm1_sweep(cfg: &ResolvedConfig) -> Result<Table> {
    let mut table = Table::new(header(
        &[
            "power_db",
            "snr",
            "epsilon",
            "user",
            "payload_bits",
            "threshold_nats",
            "length",
            "raw_length",
            "full_interference_length",
            "fixed_length_n",
            "savings",
        ],
        cfg.simulate,
    ));
    let points: Vec<(f64, f64, f64)> = cfg
        .power_points()
        .into_iter()
        .flat_map(|(db, p)| cfg.epsilons.iter().map(move |&e| (db, p, e)))
        .collect();
    let results: Vec<Result<Vec<Vec<String>>>> = points
        .par_iter()
        .enumerate()
        .map(|(gi, &(db, p, eps))| {
            let power = PowerLevel::new(p)?;
            let sc = AwgnScenario::new(cfg.payload_bits.clone(), power, eps)?;
            let lengths = thm1_lengths(&sc)?;
            let raw = thm1_raw_lengths(&sc);
            let full = full_interference_lengths(&sc)?;
            let sinr = sinr_awgn(power, sc.s_count())?;
            let sim = if cfg.simulate {
                let (plan, seed) = plan_for(cfg, gi)?;
                Some((simulate_awgn_multiuser(&sc, &plan)?, seed))
            } else {
                None
            };
            let mut rows = Vec::new();
            for (j, (&bits, gamma)) in sc.payload_bits().iter().zip(sc.thresholds()).enumerate() {
                let n = fixed_n(bits, sinr, eps, ChannelField::RealAwgn)?;
                let mut row = vec![
                    fmt_g9(db),
                    fmt_g9(p),
                    fmt_g9(eps),
                    (j + 1).to_string(),
                    bits.to_string(),
                    fmt_g9(gamma),
                    fmt_g9(lengths[j]),
                    fmt_g9(raw[j]),
                    fmt_g9(full[j]),
                    fmt_opt(n),
                    fmt_opt(savings(lengths[j], n)),
                ];
                if let Some((out, seed)) = &sim {
                    row.extend(sim_cells(out, j, eps, *seed));
                }
                rows.push(row);
            }
            Ok(rows)
        })
        .collect();
    table.rows = collect_rows(results)?;
    Ok(table)
}

/// Periodic-arrival lengths over the interval grid. Rows are flagged
/// `diverging` when the closed form finds no per-interval progress or when
/// the simulated mean service time of some user exceeds `t_sub`, so its
/// backlog grows; neither aborts the sweep.
pub fn run_queue_sweep(cfg: &ResolvedConfig) -> Result<Table> {
    let mut table = Table::new(header(
        &[
            "power_db",
            "snr",
            "epsilon",
            "t_sub",
            "user",
            "payload_bits",
            "length",
            "congested",
            "intervals",
            "remainder_nats",
            "stop_phase",
            "info_per_interval",
            "fixed_length_n",
            "savings",
            "diverging",
        ],
        cfg.simulate,
    ));
    let points: Vec<(f64, f64, f64, f64)> = cfg
        .power_points()
        .into_iter()
        .flat_map(|(db, p)| {
            cfg.epsilons
                .iter()
                .flat_map(move |&e| cfg.t_sub.iter().map(move |&t| (db, p, e, t)))
        })
        .collect();
    let results: Vec<Result<Vec<Vec<String>>>> = points
        .par_iter()
        .enumerate()
        .map(|(gi, &(db, p, eps, t_sub))| {
            let power = PowerLevel::new(p)?;
            let sc = AwgnScenario::new(cfg.payload_bits.clone(), power, eps)?;
            let q = QueueScenario::new(sc.clone(), t_sub)?;
            let breakdown = thm2_lengths(&q).ok();
            let sinr = sinr_awgn(power, sc.s_count())?;
            let sim = if cfg.simulate {
                let (plan, seed) = plan_for(cfg, gi)?;
                Some((simulate_queue(&q, &plan)?, seed))
            } else {
                None
            };
            let diverging = breakdown.is_none() || sim.as_ref().is_some_and(|(o, _)| o.diverging);
            let mut rows = Vec::new();
            for (j, &bits) in sc.payload_bits().iter().enumerate() {
                let n = fixed_n(bits, sinr, eps, ChannelField::RealAwgn)?;
                let mut row = vec![
                    fmt_g9(db),
                    fmt_g9(p),
                    fmt_g9(eps),
                    fmt_g9(t_sub),
                    (j + 1).to_string(),
                    bits.to_string(),
                ];
                match &breakdown {
                    Some(b) => {
                        let u = &b.users[j];
                        let c = u.congestion;
                        row.extend([
                            fmt_g9(u.length),
                            c.is_some().to_string(),
                            c.map(|c| c.intervals.to_string()).unwrap_or_default(),
                            fmt_opt(c.map(|c| c.remainder)),
                            c.map(|c| c.stop_phase.to_string()).unwrap_or_default(),
                            fmt_opt(b.info_per_interval),
                            fmt_opt(n),
                            fmt_opt(savings(u.length, n)),
                        ]);
                    }
                    None => {
                        row.extend(["", "true", "", "", "", "", ""].map(String::from));
                        row.push(fmt_opt(n));
                        row.push(String::new());
                    }
                }
                row.push(diverging.to_string());
                if let Some((out, seed)) = &sim {
                    row.extend(sim_cells(out, j, eps, *seed));
                }
                rows.push(row);
            }
            Ok(rows)
        })
        .collect();
    table.rows = collect_rows(results)?;
    Ok(table)
}

/// Block fading at the typical gains (mean order statistics). The baseline
/// is a fixed-length code at the user's SINR with every user active.
pub fn run_fading_sweep(cfg: &ResolvedConfig) -> Result<Table> {
    let mut table = Table::new(header(
        &[
            "power_db",
            "snr",
            "s_count",
            "epsilon",
            "payload_bits",
            "user",
            "gain",
            "coefficient",
            "length",
            "fixed_length_n",
            "savings",
        ],
        cfg.simulate,
    ));
    let mut points = Vec::new();
    for (db, p) in cfg.power_points() {
        for &s in &cfg.s_counts {
            for &eps in &cfg.epsilons {
                for &bits in &cfg.payload_bits {
                    points.push((db, p, s, eps, bits));
                }
            }
        }
    }
    let results: Vec<Result<Vec<Vec<String>>>> = points
        .par_iter()
        .enumerate()
        .map(|(gi, &(db, p, s, eps, bits))| {
            let power = PowerLevel::new(p)?;
            let gains = GainVector::new(rayleigh_order_means(s))?;
            let coeffs = thm3_coeffs(&gains, power)?;
            let gamma: f64 = message_threshold(bits)?;
            let lengths = coeffs.lengths(gamma, eps);
            let sim = if cfg.simulate {
                let (plan, seed) = plan_for(cfg, gi)?;
                Some((simulate_block_fading_random(s, bits, power, &plan)?, seed))
            } else {
                None
            };
            let mut rows = Vec::new();
            for j in 0..s {
                let sinr = sinr_fading(power, &gains, 0, j)?;
                let n = fixed_n(bits, sinr, eps, ChannelField::ComplexFading)?;
                let mut row = vec![
                    fmt_g9(db),
                    fmt_g9(p),
                    s.to_string(),
                    fmt_g9(eps),
                    bits.to_string(),
                    (j + 1).to_string(),
                    fmt_g9(gains.as_slice()[j]),
                    fmt_g9(coeffs.a[j]),
                    fmt_g9(lengths[j]),
                    fmt_opt(n),
                    fmt_opt(savings(lengths[j], n)),
                ];
                if let Some((out, seed)) = &sim {
                    row.extend(sim_cells(out, j, eps, *seed));
                }
                rows.push(row);
            }
            Ok(rows)
        })
        .collect();
    table.rows = collect_rows(results)?;
    Ok(table)
}

/// Threshold search per `(p, S)`. A quadrature failure fills that row's
/// `status` with the diagnostic and leaves its numbers empty.
pub fn run_waterfill_sweep(cfg: &ResolvedConfig) -> Result<Table> {
    let mut table = Table::new(vec![
        "power_db",
        "snr",
        "s_count",
        "gamma_single",
        "gamma_multi",
        "cl_single",
        "cl_multi",
        "quadrature_disagreement",
        "mc_single",
        "mc_single_ci95",
        "mc_multi",
        "mc_multi_ci95",
        "samples",
        "seed",
        "status",
    ]);
    let points: Vec<(f64, f64, usize)> = cfg
        .power_points()
        .into_iter()
        .flat_map(|(db, p)| cfg.s_counts.iter().map(move |&s| (db, p, s)))
        .collect();
    let results: Vec<Result<Vec<Vec<String>>>> = points
        .par_iter()
        .enumerate()
        .map(|(gi, &(db, p, s))| {
            let sc = FastFadingScenario::new(s, PowerLevel::new(p)?)?;
            let seed = derive_seed(cfg.seed.unwrap_or(0), gi as u64);
            let plan = if cfg.samples > 0 {
                Some(TrialPlan::new(cfg.samples, seed)?)
            } else {
                None
            };
            let mut row = vec![fmt_g9(db), fmt_g9(p), s.to_string()];
            match optimize_threshold(&sc, plan.as_ref()) {
                Ok(r) => {
                    row.extend([
                        fmt_g9(r.gamma_single),
                        fmt_g9(r.gamma_multi),
                        fmt_g9(r.cl_at_single),
                        fmt_g9(r.cl_at_multi),
                        fmt_g9(r.max_disagreement),
                        fmt_opt(r.mc_capacity_single.map(|e| e.mean)),
                        fmt_opt(r.mc_capacity_single.map(|e| e.ci95())),
                        fmt_opt(r.mc_capacity_multi.map(|e| e.mean)),
                        fmt_opt(r.mc_capacity_multi.map(|e| e.ci95())),
                    ]);
                    row.push(cfg.samples.to_string());
                    row.push(if plan.is_some() { seed.to_string() } else { String::new() });
                    row.push("ok".into());
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 11));
                    row.push(e.to_string());
                }
            }
            Ok(vec![row])
        })
        .collect();
    table.rows = collect_rows(results)?;
    Ok(table)
}
