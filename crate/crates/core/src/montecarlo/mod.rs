//! Monte Carlo oracles for the closed-form lengths.
//!
//! Each simulated user accumulates the information density of its own true
//! codeword; a user whose sum first exceeds its threshold stops transmitting
//! from the next symbol on, which lowers the interference seen by everybody
//! still active. False-codeword walks only matter for the error-probability
//! experiment, where all `M − 1` competitors are tracked explicitly.
//!
//! Trials run in parallel, each on its own counter-selected ChaCha stream, and
//! are reduced in trial order, so outcomes are bit-identical for a given seed.

pub mod rng;
pub mod stats;

use rand::Rng;
use rayon::prelude::*;

use crate::analytic::{
    full_interference_lengths, message_threshold, thm1_raw_lengths, thm2_lengths, AwgnScenario, QueueScenario,
};
use crate::channel::{capacity, ChannelField, GainVector, InfoDensity, PowerLevel};
use crate::error::{Error, Result};
use crate::Scalar;

pub use rng::{derive_seed, trial_rng};
pub use stats::{pairwise_sum, ratio_estimate, Estimate, Z95};

/// Cap hits above this fraction of trials flag the outcome.
pub const CAP_FLAG_RATE: f64 = 0.01;
/// Default symbol cap as a multiple of the analytic length prediction.
pub const DEFAULT_CAP_FACTOR: f64 = 50.0;
/// Largest payload the error-probability experiment tracks (`M = 2^12`).
pub const MAX_ERROR_SIM_BITS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialPlan {
    pub trials: usize,
    pub seed: u64,
    /// Hard per-trial symbol cap; `None` uses [`DEFAULT_CAP_FACTOR`] times the
    /// analytic prediction.
    pub max_symbols: Option<u64>,
}

impl TrialPlan {
    pub fn new(trials: usize, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::domain("a trial plan needs at least one trial"));
        }
        Ok(Self {
            trials,
            seed,
            max_symbols: None,
        })
    }

    pub fn with_max_symbols(mut self, cap: u64) -> Self {
        self.max_symbols = Some(cap.max(1));
        self
    }

    fn cap_for(&self, prediction: f64) -> u64 {
        self.max_symbols
            .unwrap_or_else(|| (DEFAULT_CAP_FACTOR * prediction.max(1.0)).ceil() as u64)
    }
}

/// Information rate of one user while a fixed number of users is active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRate<T> {
    /// 1-based user index.
    pub user: usize,
    pub active: usize,
    /// Accumulated nats per symbol spent in the phase.
    pub rate: Estimate<T>,
    pub mean_symbols: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingOutcome<T> {
    /// Per-user mean stopping time in symbols.
    pub mean: Vec<T>,
    pub std_err: Vec<T>,
    /// Trials in which at least one user reached the symbol cap.
    pub cap_hits: u64,
    pub trials: usize,
    /// Cap-hit rate exceeded [`CAP_FLAG_RATE`]; means are then censored.
    pub cap_flagged: bool,
    /// Queue runs only: some user's mean service time exceeds the arrival
    /// interval, so its backlog grows without bound.
    pub diverging: bool,
    pub phase_rates: Vec<PhaseRate<T>>,
}

impl<T: Scalar> StoppingOutcome<T> {
    pub fn estimate(&self, user: usize) -> Estimate<T> {
        Estimate {
            mean: self.mean[user],
            std_err: self.std_err[user],
            samples: self.trials,
        }
    }

    pub fn ci95(&self, user: usize) -> T {
        self.estimate(user).ci95()
    }
}

/// Whether a decoded user stops transmitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cancellation {
    Enabled,
    /// Control: decoded users keep transmitting and interfering.
    Disabled,
}

#[derive(Debug, Clone, Copy)]
struct WalkUser<T> {
    threshold: T,
    power: T,
}

#[derive(Debug, Clone, Copy)]
struct Link<T> {
    density: InfoDensity<T>,
    signal_sd: T,
    noise_sd: T,
}

impl<T: Scalar> Link<T> {
    fn new(power: T, noise_var: T) -> Self {
        Self {
            density: InfoDensity::new(power, noise_var).expect("noise variance is at least 1"),
            signal_sd: power.sqrt(),
            noise_sd: noise_var.sqrt(),
        }
    }

    /// One real dimension: returns the increment of the true codeword.
    #[inline]
    fn step<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let x = self.signal_sd * T::standard_normal(rng);
        let y = x + self.noise_sd * T::standard_normal(rng);
        self.density.increment(x, y)
    }
}

/// Links for every user given the set of transmitting users.
fn refresh_links<T: Scalar>(users: &[WalkUser<T>], transmitting: &[bool], links: &mut [Link<T>]) {
    let total = users
        .iter()
        .zip(transmitting)
        .filter(|(_, &on)| on)
        .fold(T::zero(), |acc, (u, _)| acc + u.power);
    for (j, u) in users.iter().enumerate() {
        let own = if transmitting[j] { u.power } else { T::zero() };
        links[j] = Link::new(u.power, T::one() + total - own);
    }
}

struct WalkTrial<T> {
    stop: Vec<u64>,
    capped: bool,
    /// `[user * S + (active - 1)]`
    phase_symbols: Vec<u64>,
    phase_nats: Vec<T>,
}

fn run_walk_trial<T: Scalar, R: Rng + ?Sized>(
    users: &[WalkUser<T>],
    dims: usize,
    cancellation: Cancellation,
    cap: u64,
    rng: &mut R,
) -> WalkTrial<T> {
    let s = users.len();
    let mut transmitting = vec![true; s];
    let mut decoded = vec![false; s];
    let mut acc = vec![T::zero(); s];
    let mut stop = vec![cap; s];
    let mut phase_symbols = vec![0u64; s * s];
    let mut phase_nats = vec![T::zero(); s * s];
    let mut links = vec![Link::new(T::one(), T::one()); s];
    let mut remaining = s;
    let mut dirty = true;
    let mut active = s;
    let mut n = 0u64;
    while remaining > 0 && n < cap {
        n += 1;
        if dirty {
            refresh_links(users, &transmitting, &mut links);
            active = transmitting.iter().filter(|&&on| on).count();
            dirty = false;
        }
        for j in 0..s {
            if decoded[j] {
                continue;
            }
            let mut inc = T::zero();
            for _ in 0..dims {
                inc = inc + links[j].step(rng);
            }
            acc[j] = acc[j] + inc;
            let slot = j * s + active - 1;
            phase_symbols[slot] += 1;
            phase_nats[slot] = phase_nats[slot] + inc;
        }
        for j in 0..s {
            if !decoded[j] && acc[j] > users[j].threshold {
                decoded[j] = true;
                stop[j] = n;
                remaining -= 1;
                if cancellation == Cancellation::Enabled {
                    transmitting[j] = false;
                    dirty = true;
                }
            }
        }
    }
    WalkTrial {
        stop,
        capped: remaining > 0,
        phase_symbols,
        phase_nats,
    }
}

fn summarize_walks<T: Scalar>(records: &[WalkTrial<T>], s: usize) -> StoppingOutcome<T> {
    let trials = records.len();
    let mut mean = Vec::with_capacity(s);
    let mut std_err = Vec::with_capacity(s);
    for j in 0..s {
        let xs: Vec<T> = records.iter().map(|r| T::lit(r.stop[j] as f64)).collect();
        let e = Estimate::from_samples(&xs);
        mean.push(e.mean);
        std_err.push(e.std_err);
    }
    let cap_hits = records.iter().filter(|r| r.capped).count() as u64;
    let mut phase_rates = Vec::new();
    for j in 0..s {
        for a in 1..=s {
            let slot = j * s + a - 1;
            let den: Vec<T> = records
                .iter()
                .map(|r| T::lit(r.phase_symbols[slot] as f64))
                .collect();
            if den.iter().all(|&d| d == T::zero()) {
                continue;
            }
            let num: Vec<T> = records.iter().map(|r| r.phase_nats[slot]).collect();
            phase_rates.push(PhaseRate {
                user: j + 1,
                active: a,
                rate: ratio_estimate(&num, &den),
                mean_symbols: Estimate::from_samples(&den).mean,
            });
        }
    }
    StoppingOutcome {
        mean,
        std_err,
        cap_hits,
        trials,
        cap_flagged: cap_hits as f64 > CAP_FLAG_RATE * trials as f64,
        diverging: false,
        phase_rates,
    }
}

fn simulate_walks<T: Scalar>(
    users: &[WalkUser<T>],
    dims: usize,
    cancellation: Cancellation,
    cap: u64,
    plan: &TrialPlan,
) -> StoppingOutcome<T> {
    let records: Vec<WalkTrial<T>> = (0..plan.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(plan.seed, i);
            run_walk_trial(users, dims, cancellation, cap, &mut rng)
        })
        .collect();
    summarize_walks(&records, users.len())
}

/// Coupled AWGN walks with dynamic interference cancellation.
///
/// Means are those of the raw stopping times; compare against the analytic
/// lengths at `ε = 0`.
pub fn simulate_awgn_multiuser<T: Scalar>(
    sc: &AwgnScenario<T>,
    plan: &TrialPlan,
) -> Result<StoppingOutcome<T>> {
    simulate_awgn_multiuser_with(sc, plan, Cancellation::Enabled)
}

pub fn simulate_awgn_multiuser_with<T: Scalar>(
    sc: &AwgnScenario<T>,
    plan: &TrialPlan,
    cancellation: Cancellation,
) -> Result<StoppingOutcome<T>> {
    let p = sc.power().get();
    let users: Vec<WalkUser<T>> = sc
        .thresholds()
        .into_iter()
        .map(|threshold| WalkUser { threshold, power: p })
        .collect();
    let prediction = thm1_raw_lengths(sc).last().copied().unwrap_or(T::one());
    let cap = plan.cap_for(prediction.as_f64());
    Ok(simulate_walks(&users, 1, cancellation, cap, plan))
}

fn fading_users<T: Scalar>(gains: &[T], threshold: T, p: T) -> Vec<WalkUser<T>> {
    gains
        .iter()
        .map(|&g| WalkUser {
            threshold,
            power: p * g,
        })
        .collect()
}

/// Worst-case length: every user suffers all the others for the whole run.
fn full_interference_prediction<T: Scalar>(gains: &[T], threshold: T, p: T) -> Result<f64> {
    let total: T = gains.iter().fold(T::zero(), |a, &g| a + p * g);
    let mut worst = 0.0f64;
    for &g in gains {
        let snr = p * g / (T::one() + total - p * g);
        let c = capacity(snr, ChannelField::ComplexFading)?;
        worst = worst.max((threshold / c).as_f64());
    }
    Ok(worst)
}

/// Block fading with the gains held fixed for the whole run. Each complex
/// symbol contributes two real-dimension increments.
pub fn simulate_block_fading<T: Scalar>(
    gains: &GainVector<T>,
    payload_bits: u32,
    p: PowerLevel<T>,
    plan: &TrialPlan,
) -> Result<StoppingOutcome<T>> {
    if gains.is_empty() || gains.as_slice().iter().any(|&g| !(g > T::zero())) {
        return Err(Error::domain("block fading needs at least one gain, all positive"));
    }
    let threshold = message_threshold(payload_bits)?;
    let users = fading_users(gains.as_slice(), threshold, p.get());
    let cap = plan.cap_for(full_interference_prediction(gains.as_slice(), threshold, p.get())?);
    Ok(simulate_walks(&users, 2, Cancellation::Enabled, cap, plan))
}

/// Block fading with fresh i.i.d. unit-mean exponential gains per trial.
/// Users are ranked by gain (strongest first) before the walk, so outcome
/// index `j` is the `j`-th largest gain.
pub fn simulate_block_fading_random<T: Scalar>(
    s_count: usize,
    payload_bits: u32,
    p: PowerLevel<T>,
    plan: &TrialPlan,
) -> Result<StoppingOutcome<T>> {
    if s_count == 0 {
        return Err(Error::domain("need at least one user"));
    }
    let threshold = message_threshold(payload_bits)?;
    let cap_override = plan.max_symbols;
    let records: Vec<WalkTrial<T>> = (0..plan.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(plan.seed, i);
            let mut g: Vec<T> = (0..s_count)
                .map(|_| T::standard_exp(&mut rng).max(T::min_positive_value()))
                .collect();
            g.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
            let users = fading_users(&g, threshold, p.get());
            let prediction = full_interference_prediction(&g, threshold, p.get()).unwrap_or(1e9);
            let cap = cap_override
                .unwrap_or_else(|| (DEFAULT_CAP_FACTOR * prediction.max(1.0)).ceil() as u64);
            run_walk_trial(&users, 2, Cancellation::Enabled, cap, &mut rng)
        })
        .collect();
    Ok(summarize_walks(&records, s_count))
}

fn run_queue_trial<T: Scalar, R: Rng + ?Sized>(
    users: &[WalkUser<T>],
    t_sub: T,
    cap: u64,
    rng: &mut R,
) -> (Vec<u64>, bool) {
    let s = users.len();
    let mut completed = vec![0u64; s];
    let mut acc = vec![T::zero(); s];
    let mut stop = vec![cap; s];
    let mut transmitting = vec![false; s];
    let mut links = vec![Link::new(T::one(), T::one()); s];
    let mut pending = s;
    let mut n = 0u64;
    while pending > 0 && n < cap {
        // messages k = 0, 1, ... arrive at k·t_sub
        let arrived = (T::lit(n as f64) / t_sub).floor().to_u64().unwrap_or(u64::MAX) + 1;
        let mut changed = false;
        for j in 0..s {
            let on = completed[j] < arrived;
            changed |= on != transmitting[j];
            transmitting[j] = on;
        }
        if changed || n == 0 {
            refresh_links(users, &transmitting, &mut links);
        }
        n += 1;
        for j in 0..s {
            if !transmitting[j] {
                continue;
            }
            acc[j] = acc[j] + links[j].step(rng);
            if acc[j] > users[j].threshold {
                acc[j] = T::zero();
                completed[j] += 1;
                if completed[j] == 1 {
                    stop[j] = n;
                    pending -= 1;
                }
            }
        }
    }
    (stop, pending > 0)
}

/// Periodic arrivals every `t_sub` symbols in every cell. The first message
/// of each user starts at an interval boundary; its completion time is
/// reported. Later messages queue behind it and keep their user transmitting,
/// so congested users interfere continuously.
pub fn simulate_queue<T: Scalar>(
    sc: &QueueScenario<T>,
    plan: &TrialPlan,
) -> Result<StoppingOutcome<T>> {
    let base = sc.base();
    let p = base.power().get();
    let users: Vec<WalkUser<T>> = base
        .thresholds()
        .into_iter()
        .map(|threshold| WalkUser { threshold, power: p })
        .collect();
    // Starved queues have no closed form; the first message still finishes
    // within the full-interference time.
    let raw = QueueScenario::new(base.with_epsilon(T::zero())?, sc.t_sub())?;
    let prediction = match thm2_lengths(&raw) {
        Ok(b) => b.lengths(),
        Err(_) => full_interference_lengths(raw.base())?,
    }
    .into_iter()
    .fold(T::zero(), |a, b| a.max(b));
    let cap = plan.cap_for(prediction.as_f64());
    let t_sub = sc.t_sub();
    let results: Vec<(Vec<u64>, bool)> = (0..plan.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(plan.seed, i);
            run_queue_trial(&users, t_sub, cap, &mut rng)
        })
        .collect();
    let s = users.len();
    let mut mean = Vec::with_capacity(s);
    let mut std_err = Vec::with_capacity(s);
    for j in 0..s {
        let xs: Vec<T> = results.iter().map(|(st, _)| T::lit(st[j] as f64)).collect();
        let e = Estimate::from_samples(&xs);
        mean.push(e.mean);
        std_err.push(e.std_err);
    }
    let cap_hits = results.iter().filter(|(_, capped)| *capped).count() as u64;
    let diverging = mean.iter().any(|&m| m > t_sub) || cap_hits > 0;
    Ok(StoppingOutcome {
        mean,
        std_err,
        cap_hits,
        trials: results.len(),
        cap_flagged: cap_hits as f64 > CAP_FLAG_RATE * results.len() as f64,
        diverging,
        phase_rates: Vec::new(),
    })
}

/// Empirical decoding-error rate of the threshold decoder with all `M − 1`
/// competing codewords tracked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRateEstimate<T> {
    pub errors: u64,
    pub trials: usize,
    pub rate: T,
    pub std_err: T,
    /// Upper end of the 95% Wilson score interval.
    pub upper95: T,
    pub cap_hits: u64,
    pub threshold: T,
    pub messages: u64,
}

/// Error rate at the threshold `message_threshold(payload_bits)`.
pub fn simulate_error_probability<T: Scalar>(
    payload_bits: u32,
    snr: T,
    plan: &TrialPlan,
) -> Result<ErrorRateEstimate<T>> {
    let threshold = message_threshold(payload_bits)?;
    simulate_error_probability_at(payload_bits, snr, threshold, plan)
}

/// An error occurs when some false codeword's walk crosses `threshold` no
/// later than the true codeword's walk.
pub fn simulate_error_probability_at<T: Scalar>(
    payload_bits: u32,
    snr: T,
    threshold: T,
    plan: &TrialPlan,
) -> Result<ErrorRateEstimate<T>> {
    if payload_bits > MAX_ERROR_SIM_BITS {
        return Err(Error::domain(format!(
            "error simulation tracks at most 2^{MAX_ERROR_SIM_BITS} codewords, got 2^{payload_bits}"
        )));
    }
    let p = PowerLevel::new(snr)?.get();
    let messages = 1u64 << payload_bits;
    let c = capacity(p, ChannelField::RealAwgn)?;
    let cap = plan.cap_for((threshold.max(T::one()) / c).as_f64());
    let link = Link::new(p, T::one());
    let false_walks = (messages - 1) as usize;
    let outcomes: Vec<(bool, bool)> = (0..plan.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(plan.seed, i);
            let mut sums = vec![T::zero(); false_walks];
            let mut truth = T::zero();
            for _ in 0..cap {
                let x = link.signal_sd * T::standard_normal(&mut rng);
                let y = x + link.noise_sd * T::standard_normal(&mut rng);
                truth = truth + link.density.increment(x, y);
                let mut wrong = false;
                for s in sums.iter_mut() {
                    let xf = link.signal_sd * T::standard_normal(&mut rng);
                    *s = *s + link.density.increment(xf, y);
                    wrong |= *s > threshold;
                }
                if wrong {
                    return (true, false);
                }
                if truth > threshold {
                    return (false, false);
                }
            }
            (false, true)
        })
        .collect();
    let trials = outcomes.len();
    let errors = outcomes.iter().filter(|o| o.0).count() as u64;
    let cap_hits = outcomes.iter().filter(|o| o.1).count() as u64;
    let n = trials as f64;
    let rate = errors as f64 / n;
    let z = Z95;
    let denom = 1.0 + z * z / n;
    let centre = rate + z * z / (2.0 * n);
    let spread = z * (rate * (1.0 - rate) / n + z * z / (4.0 * n * n)).sqrt();
    Ok(ErrorRateEstimate {
        errors,
        trials,
        rate: T::lit(rate),
        std_err: T::lit((rate * (1.0 - rate) / n).sqrt()),
        upper95: T::lit((centre + spread) / denom),
        cap_hits,
        threshold,
        messages,
    })
}
