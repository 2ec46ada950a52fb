//! The acceptance suite behind `cwf validate`.
//!
//! Each criterion pairs a closed form with an independent oracle and returns
//! a verdict. Stochastic criteria draw from seeds derived from the root seed
//! and the criterion number, so a report is a pure function of
//! `(seed, tolerance_scale)`. Wall-clock budgets enter the verdict but never
//! the report text.

use std::time::{Duration, Instant};

use cwf_core::analytic::{AwgnScenario, QueueScenario};
use cwf_core::montecarlo::{
    derive_seed, simulate_awgn_multiuser, simulate_block_fading, simulate_error_probability,
    simulate_queue,
};
use cwf_core::waterfill::{capacity_lower_bound_cl_detailed, mc_capacity_eq41, FastFadingScenario};
use cwf_core::{
    full_interference_lengths, message_threshold, optimize_threshold, rayleigh_order_means,
    single_user_threshold, thm1_lengths, thm1_raw_lengths, thm2_lengths, thm3_coeffs, GainVector,
    PowerLevel, ThresholdSearchResult, TrialPlan,
};
use rayon::prelude::*;

use crate::config::DEFAULT_VALIDATE_SEED;
use crate::error::Result;
use crate::oracle;
use crate::output::{fmt_g9, render_csv, Table};

/// Trials behind the length criteria.
pub const LENGTH_TRIALS: usize = 10_000;
pub const ERROR_TRIALS: usize = 100_000;
pub const CAPACITY_SAMPLES: usize = 1_000_000;
pub const ORDER_DRAWS: usize = 1_000_000;
/// Interval lengths at which both users of the reference pair are congested.
pub const CONGESTED_T_SUB: [f64; 5] = [400.0, 800.0, 1300.0, 1600.0, 2000.0];
pub const WATERFILL_POWERS: [f64; 5] = [0.1, 0.5, 1.0, 10.0, 100.0];
pub const WATERFILL_USERS: [usize; 4] = [1, 2, 4, 8];

const REFERENCE_BITS: [u32; 2] = [300, 1000];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Multiplies every numeric tolerance; 0 turns them all into equalities.
    pub tolerance_scale: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_VALIDATE_SEED,
            tolerance_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub expected: String,
    pub observed: String,
    pub tolerance: String,
    pub passed: bool,
    pub elapsed: Duration,
}

impl CriterionOutcome {
    pub fn summary_line(&self) -> String {
        format!(
            "[{}] {:>2} {}: observed {} | expected {} | tolerance {} | {:.1}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.observed,
            self.expected,
            self.tolerance,
            self.elapsed.as_secs_f64()
        )
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "awgn_lengths_vs_simulation"),
    (2, "single_user_reduction"),
    (3, "cancellation_gain"),
    (4, "queue_consistency"),
    (5, "fading_lengths_vs_simulation"),
    (6, "error_probability_bound"),
    (7, "waterfill_thresholds"),
    (8, "quadrature_oracle"),
    (9, "order_statistics"),
    (10, "determinism"),
];

fn criterion_name(id: u8) -> &'static str {
    CRITERIA.iter().find(|(i, _)| *i == id).map(|(_, n)| *n).unwrap_or("unknown")
}

struct Verdict {
    expected: String,
    observed: String,
    tolerance: String,
    passed: bool,
}

fn pw(p: f64) -> PowerLevel<f64> {
    PowerLevel::new(p).expect("positive literal")
}

fn plan(opts: &ValidateOptions, id: u8, sub: u64, trials: usize) -> TrialPlan {
    let seed = derive_seed(derive_seed(opts.seed, id as u64), sub);
    TrialPlan::new(trials, seed).expect("non-zero trials")
}

fn reference_pair(eps: f64) -> AwgnScenario<f64> {
    AwgnScenario::new(REFERENCE_BITS.to_vec(), pw(1.0), eps).expect("valid reference scenario")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_g9(x)).collect::<Vec<_>>().join(";")
}

fn c1(opts: &ValidateOptions) -> Result<Verdict> {
    let sc = reference_pair(0.0);
    let l = thm1_lengths(&sc)?;
    let out = simulate_awgn_multiuser(&sc, &plan(opts, 1, 0, LENGTH_TRIALS))?;
    let errs: Vec<f64> = l.iter().zip(&out.mean).map(|(l, m)| rel(*m, *l)).collect();
    let tol = 0.05 * opts.tolerance_scale;
    Ok(Verdict {
        expected: format!("thm1 lengths {}", list(&l)),
        observed: format!("sim means {} rel err {}", list(&out.mean), list(&errs)),
        tolerance: format!("rel <= {}, <60s", fmt_g9(tol)),
        passed: errs.iter().all(|&e| e <= tol) && !out.cap_flagged,
    })
}

fn c2(opts: &ValidateOptions) -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for bits in [8u32, 300, 1000, 4000] {
        for p in [0.1, 1.0, 10.0] {
            for eps in [0.0, 1e-3, 0.1] {
                let sc = AwgnScenario::new(vec![bits], pw(p), eps)?;
                let l = thm1_lengths(&sc)?[0];
                let kappa = bits as f64 * std::f64::consts::LN_2;
                let gamma = kappa + kappa.ln();
                let c = 0.5 * (1.0 + p).ln();
                worst = worst.max(rel(l, (1.0 - eps) * gamma / c));
            }
        }
    }
    let tol = 1e-12 * opts.tolerance_scale;
    Ok(Verdict {
        expected: "(1-eps)*gamma/C".into(),
        observed: format!("max rel err {}", fmt_g9(worst)),
        tolerance: format!("rel <= {}", fmt_g9(tol)),
        passed: worst <= tol,
    })
}

fn c3(_opts: &ValidateOptions) -> Result<Verdict> {
    let sc = reference_pair(1e-3);
    let l = thm1_lengths(&sc)?[1];
    let full = full_interference_lengths(&sc)?[1];
    let gain = 1.0 - l / full;
    Ok(Verdict {
        expected: format!("l2 below full-interference {} by >= 10%", fmt_g9(full)),
        observed: format!("l2 {} gain {}", fmt_g9(l), fmt_g9(gain)),
        tolerance: "gain >= 0.1".into(),
        passed: gain >= 0.10,
    })
}

fn c4(opts: &ValidateOptions) -> Result<Verdict> {
    let sc = reference_pair(1e-3);
    let thm1 = thm1_lengths(&sc)?;
    let last_raw = *thm1_raw_lengths(&sc).last().expect("two users");
    let mut limit_err: f64 = 0.0;
    for factor in [1.0, 1.5, 10.0] {
        let q = QueueScenario::new(sc.clone(), last_raw * factor)?;
        for (a, b) in thm2_lengths(&q)?.lengths().iter().zip(&thm1) {
            limit_err = limit_err.max(rel(*a, *b));
        }
    }
    let raw = reference_pair(0.0);
    let ratios: Vec<Result<f64>> = CONGESTED_T_SUB
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let q = QueueScenario::new(raw.clone(), t)?;
            let bound = thm2_lengths(&q)?.lengths();
            let out = simulate_queue(&q, &plan(opts, 4, i as u64, LENGTH_TRIALS))?;
            Ok(out
                .mean
                .iter()
                .zip(&bound)
                .map(|(m, b)| m / b)
                .fold(0.0, f64::max))
        })
        .collect();
    let ratios = ratios.into_iter().collect::<Result<Vec<_>>>()?;
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let exact_tol = 1e-12 * opts.tolerance_scale;
    let slack = 1.0 + 0.05 * opts.tolerance_scale;
    Ok(Verdict {
        expected: "thm2 = thm1 when uncongested; sim <= thm2 bound when congested".into(),
        observed: format!(
            "limit rel err {}; sim/bound per t_sub {}",
            fmt_g9(limit_err),
            list(&ratios)
        ),
        tolerance: format!("rel <= {}; ratio <= {}", fmt_g9(exact_tol), fmt_g9(slack)),
        passed: limit_err <= exact_tol && worst <= slack,
    })
}

fn c5(opts: &ValidateOptions) -> Result<Verdict> {
    let gains = GainVector::new(rayleigh_order_means(2))?;
    let a = thm3_coeffs(&gains, pw(1.0))?;
    let gamma: f64 = message_threshold(1000)?;
    let l = a.lengths(gamma, 0.0);
    let out = simulate_block_fading(&gains, 1000, pw(1.0), &plan(opts, 5, 0, LENGTH_TRIALS))?;
    let errs: Vec<f64> = l.iter().zip(&out.mean).map(|(l, m)| rel(*m, *l)).collect();
    let tol = 0.05 * opts.tolerance_scale;
    Ok(Verdict {
        expected: format!("a_j*gamma {}", list(&l)),
        observed: format!("sim means {} rel err {}", list(&out.mean), list(&errs)),
        tolerance: format!("rel <= {}", fmt_g9(tol)),
        passed: errs.iter().all(|&e| e <= tol) && !out.cap_flagged,
    })
}

fn c6(opts: &ValidateOptions) -> Result<Verdict> {
    let bits = 8u32;
    let kappa = bits as f64 * std::f64::consts::LN_2;
    let gamma: f64 = message_threshold(bits)?;
    let union = 2f64.powi(bits as i32) * (-gamma).exp();
    let e = simulate_error_probability(bits, 1.0f64, &plan(opts, 6, 0, ERROR_TRIALS))?;
    Ok(Verdict {
        expected: format!("rate <= 1/kappa {}; upper95 <= M*exp(-gamma) {}", fmt_g9(1.0 / kappa), fmt_g9(union)),
        observed: format!("rate {} upper95 {} ({} errors)", fmt_g9(e.rate), fmt_g9(e.upper95), e.errors),
        tolerance: "95% Wilson upper bound".into(),
        passed: e.rate <= 1.0 / kappa && e.upper95 <= union && e.cap_hits == 0,
    })
}

type Search = (f64, usize, std::result::Result<ThresholdSearchResult<f64>, String>);

fn waterfill_grid() -> Vec<Search> {
    let points: Vec<(f64, usize)> = WATERFILL_POWERS
        .iter()
        .flat_map(|&p| WATERFILL_USERS.iter().map(move |&s| (p, s)))
        .collect();
    points
        .par_iter()
        .map(|&(p, s)| {
            let r = FastFadingScenario::new(s, pw(p))
                .and_then(|sc| optimize_threshold(&sc, None))
                .map_err(|e| e.to_string());
            (p, s, r)
        })
        .collect()
}

fn c7(opts: &ValidateOptions, grid: &[Search]) -> Result<Verdict> {
    let failures: Vec<String> = grid
        .iter()
        .filter_map(|(p, s, r)| r.as_ref().err().map(|e| format!("p={p} S={s}: {e}")))
        .collect();
    if !failures.is_empty() {
        return Ok(Verdict {
            expected: "all searches succeed".into(),
            observed: failures.join("; "),
            tolerance: "n/a".into(),
            passed: false,
        });
    }
    let mut residual: f64 = 0.0;
    let mut dominance = true;
    for (p, s, r) in grid {
        let r = r.as_ref().expect("checked above");
        let g = single_user_threshold(pw(*p), *s);
        residual = residual.max((g * g.exp() - (1.0 / p + *s as f64 - 1.0)).abs());
        dominance &= r.cl_at_multi >= r.cl_at_single;
    }
    let (_, _, focus) = grid
        .iter()
        .find(|(p, s, _)| *p == 10.0 && *s == 4)
        .expect("S=4, p=10 is on the grid");
    let focus = focus.as_ref().expect("checked above");
    let sc = FastFadingScenario::new(4, pw(10.0))?;
    let mc_plan = plan(opts, 7, 0, CAPACITY_SAMPLES);
    let single = mc_capacity_eq41(focus.gamma_single, &sc, &mc_plan)?;
    let multi = mc_capacity_eq41(focus.gamma_multi, &sc, &mc_plan)?;
    let tol = 1e-10 * opts.tolerance_scale;
    Ok(Verdict {
        expected: "gamma*e^gamma = 1/p+S-1; C_l(multi) >= C_l(single); MC(multi) > MC(single) at S=4 p=10".into(),
        observed: format!(
            "max residual {}; dominance {}; gamma {}/{} MC {} +- {} vs {} +- {}",
            fmt_g9(residual),
            dominance,
            fmt_g9(focus.gamma_single),
            fmt_g9(focus.gamma_multi),
            fmt_g9(single.mean),
            fmt_g9(single.ci95()),
            fmt_g9(multi.mean),
            fmt_g9(multi.ci95())
        ),
        tolerance: format!("residual < {}; disjoint 95% CIs; <120s", fmt_g9(tol)),
        passed: residual < tol && dominance && multi.lower95() > single.upper95(),
    })
}

fn c8(opts: &ValidateOptions, grid: &[Search]) -> Result<Verdict> {
    let mut oracle_err: f64 = 0.0;
    for p in [0.5, 1.0, 10.0] {
        let sc = FastFadingScenario::new(1, pw(p))?;
        let v = capacity_lower_bound_cl_detailed(0.0, &sc)?.value;
        oracle_err = oracle_err.max((v - oracle::rayleigh_log_mean(p)).abs());
    }
    let disagreement = grid
        .iter()
        .filter_map(|(_, _, r)| r.as_ref().ok().map(|r| r.max_disagreement))
        .fold(0.0, f64::max);
    let searches_ok = grid.iter().all(|(_, _, r)| r.is_ok());
    let tol = 1e-6 * opts.tolerance_scale;
    Ok(Verdict {
        expected: "C_l(S=1, 0) = e^{1/p}E1(1/p); Laguerre = Simpson".into(),
        observed: format!(
            "max oracle err {}; max quadrature disagreement {}",
            fmt_g9(oracle_err),
            fmt_g9(disagreement)
        ),
        tolerance: format!("<= {}", fmt_g9(tol)),
        passed: searches_ok && oracle_err <= tol && disagreement <= tol,
    })
}

fn c9(opts: &ValidateOptions) -> Result<Verdict> {
    let exact = oracle::exponential_order_means(3);
    let seed = derive_seed(opts.seed, 9);
    let sampled = oracle::sampled_order_means(3, ORDER_DRAWS, seed);
    let z: Vec<f64> = sampled
        .iter()
        .zip(&exact)
        .map(|((m, se), e)| (m - e).abs() / se)
        .collect();
    let means: Vec<f64> = sampled.iter().map(|(m, _)| *m).collect();
    let library = rayleigh_order_means::<f64>(3);
    let library_err = library.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let tol = 4.0 * opts.tolerance_scale;
    Ok(Verdict {
        expected: format!("means {}", list(&exact)),
        observed: format!("sampled {} |z| {}", list(&means), list(&z)),
        tolerance: format!("|z| <= {}", fmt_g9(tol)),
        passed: z.iter().all(|&z| z <= tol) && library_err < 1e-15,
    })
}

fn outcome(id: u8, started: Instant, v: Result<Verdict>, budget: Option<Duration>) -> CriterionOutcome {
    let elapsed = started.elapsed();
    let mut v = v.unwrap_or_else(|e| Verdict {
        expected: "criterion runs to completion".into(),
        observed: format!("error: {e}"),
        tolerance: "n/a".into(),
        passed: false,
    });
    if budget.is_some_and(|b| elapsed > b) {
        v.passed = false;
    }
    CriterionOutcome {
        id,
        name: criterion_name(id),
        expected: v.expected,
        observed: v.observed,
        tolerance: v.tolerance,
        passed: v.passed,
        elapsed,
    }
}

fn ensure_grid(grid: &mut Option<(Vec<Search>, Duration)>) {
    if grid.is_none() {
        let t = Instant::now();
        let g = waterfill_grid();
        *grid = Some((g, t.elapsed()));
    }
}

/// Runs the listed criteria (1 through 9) in order.
pub fn run_criteria(ids: &[u8], opts: &ValidateOptions) -> Vec<CriterionOutcome> {
    let mut grid: Option<(Vec<Search>, Duration)> = None;
    let mut out = Vec::new();
    for &id in ids {
        let started = Instant::now();
        let o = match id {
            1 => outcome(1, started, c1(opts), Some(Duration::from_secs(60))),
            2 => outcome(2, started, c2(opts), None),
            3 => outcome(3, started, c3(opts), None),
            4 => outcome(4, started, c4(opts), None),
            5 => outcome(5, started, c5(opts), None),
            6 => outcome(6, started, c6(opts), None),
            7 => {
                ensure_grid(&mut grid);
                let (g, search_time) = grid.as_ref().expect("filled");
                let v = c7(opts, g);
                // the shared threshold searches count against this budget
                let budget = Duration::from_secs(120).saturating_sub(*search_time);
                outcome(7, started, v, Some(budget))
            }
            8 => {
                ensure_grid(&mut grid);
                let (g, _) = grid.as_ref().expect("filled");
                outcome(8, started, c8(opts, g), None)
            }
            9 => outcome(9, started, c9(opts), None),
            other => outcome(
                other,
                started,
                Err(crate::error::CliError::config(format!("no criterion {other}"))),
                None,
            ),
        };
        out.push(o);
    }
    out
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub outcomes: Vec<CriterionOutcome>,
    pub metadata: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn to_table(&self) -> Table {
        report_table(&self.outcomes)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        render_csv(&self.metadata, &self.to_table())
    }
}

fn report_table(outcomes: &[CriterionOutcome]) -> Table {
    let mut t = Table::new(vec!["criterion", "name", "expected", "observed", "tolerance", "verdict"]);
    for o in outcomes {
        t.rows.push(vec![
            o.id.to_string(),
            o.name.to_string(),
            o.expected.clone(),
            o.observed.clone(),
            o.tolerance.clone(),
            if o.passed { "pass" } else { "fail" }.to_string(),
        ]);
    }
    t
}

pub fn report_metadata(opts: &ValidateOptions, config_hash: &str) -> Vec<String> {
    vec![
        format!("cwf {}", env!("CARGO_PKG_VERSION")),
        "kind: validate".into(),
        format!("config_sha256: {config_hash}"),
        format!("seed: {}", opts.seed),
        format!("tolerance_scale: {}", fmt_g9(opts.tolerance_scale)),
    ]
}

/// Runs criteria 1 to 9 twice and adds criterion 10, which compares the two
/// rendered reports byte for byte.
pub fn run_validate(opts: &ValidateOptions, config_hash: &str) -> Result<ValidationReport> {
    let metadata = report_metadata(opts, config_hash);
    let ids: Vec<u8> = (1..=9).collect();
    let started = Instant::now();
    let first = run_criteria(&ids, opts);
    let second = run_criteria(&ids, opts);
    let a = render_csv(&metadata, &report_table(&first))?;
    let b = render_csv(&metadata, &report_table(&second))?;
    let same = a == b;
    let mismatch = a.iter().zip(&b).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
    let determinism = outcome(
        10,
        started,
        Ok(Verdict {
            expected: "identical report bytes across two runs".into(),
            observed: if same {
                format!("identical ({} bytes)", a.len())
            } else {
                format!("differ at byte {mismatch}")
            },
            tolerance: "exact".into(),
            passed: same,
        }),
        None,
    );
    let mut outcomes = first;
    outcomes.push(determinism);
    Ok(ValidationReport { outcomes, metadata })
}
