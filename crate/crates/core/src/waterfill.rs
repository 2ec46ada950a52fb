//! Power allocation: classical water-filling baselines and the multi-user
//! constant-power threshold search for fast Rayleigh fading.
//!
//! Gains `γ` are received SNR-normalized fading powers with unit mean. A user
//! running the constant-power policy with threshold `γ_th` transmits at
//! `p/e^{-γ_th}` whenever `γ ≥ γ_th`, so its average power stays `p`.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::PowerLevel;
use crate::error::{Error, Result};
use crate::montecarlo::{trial_rng, Estimate, TrialPlan};
use crate::quadrature::{adaptive_simpson, laguerre_with_head};
use crate::Scalar;

/// Largest Gauss-Laguerre vs adaptive-Simpson disagreement tolerated in `C_l`.
pub const CL_AGREEMENT_TOL: f64 = 1e-6;
/// Width of the finite interval the Simpson cross-check integrates over.
pub const SIMPSON_SPAN: f64 = 40.0;
/// Coarse grid step of the threshold search.
pub const THRESHOLD_GRID_STEP: f64 = 0.01;
/// Golden-section stopping width of the threshold search.
pub const THRESHOLD_TOL: f64 = 1e-6;

const SIMPSON_TOL: f64 = 1e-12;

/// Result of classical water-filling over parallel Gaussian channels.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillAllocation<T> {
    pub level: T,
    pub powers: Vec<T>,
    pub capacity: T,
}

/// Finds the level `v` with `Σ (v − N_s)⁺ = P`.
///
/// Bisection locates the active set; the level is then recomputed exactly as
/// `(P + Σ_active N_s) / |active|`.
pub fn parallel_gaussian_waterfill<T: Scalar>(
    noise_vars: &[T],
    budget: T,
) -> Result<WaterfillAllocation<T>> {
    if noise_vars.is_empty() {
        return Err(Error::domain("water-filling needs at least one channel"));
    }
    if let Some(n) = noise_vars.iter().find(|n| !(**n > T::zero() && n.is_finite())) {
        return Err(Error::domain(format!("noise variances must be positive, got {n}")));
    }
    if !(budget > T::zero() && budget.is_finite()) {
        return Err(Error::domain(format!("power budget must be positive, got {budget}")));
    }
    let filled = |v: T| {
        noise_vars
            .iter()
            .fold(T::zero(), |acc, &n| acc + (v - n).max(T::zero()))
    };
    let min_n = noise_vars.iter().copied().fold(T::infinity(), T::min);
    let mut lo = min_n;
    let mut hi = min_n + budget;
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if filled(mid) < budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = (lo + hi) / T::lit(2.0);
    let (count, sum) = noise_vars
        .iter()
        .filter(|&&n| n < v)
        .fold((0usize, T::zero()), |(c, s), &n| (c + 1, s + n));
    let exact = (budget + sum) / T::lit(count.max(1) as f64);
    let level = if noise_vars.iter().filter(|&&n| n < exact).count() == count {
        exact
    } else {
        v
    };
    let powers: Vec<T> = noise_vars.iter().map(|&n| (level - n).max(T::zero())).collect();
    let capacity = powers
        .iter()
        .zip(noise_vars)
        .fold(T::zero(), |acc, (&p, &n)| acc + (p / n).ln_1p() / T::lit(2.0));
    Ok(WaterfillAllocation {
        level,
        powers,
        capacity,
    })
}

/// Distribution of a fading power gain.
pub trait GainDistribution<T: Scalar>: Sync {
    fn pdf(&self, g: T) -> T;
    /// `ℙ(γ ≥ g)`.
    fn ccdf(&self, g: T) -> T;
    /// A point past `from` beyond which the remaining mass is negligible.
    fn truncation(&self, from: T) -> T;
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T;
}

/// Rayleigh fading: `|h|²` is exponential with unit mean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UnitExponential;

impl<T: Scalar> GainDistribution<T> for UnitExponential {
    fn pdf(&self, g: T) -> T {
        if g < T::zero() {
            T::zero()
        } else {
            (-g).exp()
        }
    }

    fn ccdf(&self, g: T) -> T {
        if g <= T::zero() {
            T::one()
        } else {
            (-g).exp()
        }
    }

    fn truncation(&self, from: T) -> T {
        from.max(T::zero()) + T::lit(SIMPSON_SPAN)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        T::standard_exp(rng)
    }
}

/// Single-user water-filling over fading states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingWaterfill<T> {
    /// Cutoff `λ0`: transmit `1/λ0 − 1/γ` whenever `γ ≥ λ0`.
    pub level: T,
    /// `∫_{λ0}^∞ ln(γ/λ0) p(γ) dγ`, nats per complex use.
    pub capacity: T,
    /// `|budget(λ0) − p|`.
    pub residual: T,
}

fn fading_budget<T: Scalar, D: GainDistribution<T>>(dist: &D, lambda: T) -> Result<T> {
    let inv = T::one() / lambda;
    Ok(adaptive_simpson(
        |g: T| (inv - T::one() / g) * dist.pdf(g),
        lambda,
        dist.truncation(lambda),
        T::lit(SIMPSON_TOL),
    )?
    .value)
}

/// Solves `∫_{λ0}^∞ (1/λ0 − 1/γ) p(γ) dγ = p` for the cutoff by bisection.
pub fn fading_waterfill_threshold<T: Scalar, D: GainDistribution<T>>(
    p: PowerLevel<T>,
    dist: &D,
) -> Result<FadingWaterfill<T>> {
    let target = p.get();
    if !(target > T::zero()) {
        return Err(Error::domain("fading water-filling needs positive power"));
    }
    // budget falls from ∞ at λ→0 to 0 as λ→∞
    let mut hi = T::one();
    while fading_budget(dist, hi)? > target {
        hi = hi * T::lit(2.0);
    }
    let mut lo = hi / T::lit(2.0);
    while fading_budget(dist, lo)? < target {
        lo = lo / T::lit(2.0);
        if lo < T::lit(1e-30) {
            return Err(Error::numeric("fading water-filling bracket", target.as_f64()));
        }
    }
    let mut level = (lo + hi) / T::lit(2.0);
    for _ in 0..200 {
        level = (lo + hi) / T::lit(2.0);
        let b = fading_budget(dist, level)?;
        if (b - target).abs() < T::lit(1e-11) * target.max(T::one()) || level <= lo || level >= hi {
            break;
        }
        if b > target {
            lo = level;
        } else {
            hi = level;
        }
    }
    let residual = (fading_budget(dist, level)? - target).abs();
    if !(residual < T::lit(1e-8)) {
        return Err(Error::numeric("fading water-filling budget", residual.as_f64()));
    }
    let capacity = adaptive_simpson(
        |g: T| (g / level).ln() * dist.pdf(g),
        level,
        dist.truncation(level),
        T::lit(SIMPSON_TOL),
    )?
    .value;
    Ok(FadingWaterfill {
        level,
        capacity,
        residual,
    })
}

/// Transmit power of the constant-power policy at gain `gain`.
pub fn constant_power_policy<T: Scalar, D: GainDistribution<T>>(
    gain: T,
    gamma_th: T,
    p: PowerLevel<T>,
    dist: &D,
) -> T {
    if gain >= gamma_th {
        p.get() / dist.ccdf(gamma_th)
    } else {
        T::zero()
    }
}

/// Per-instant multiple-access water-filling: only the user with the largest
/// `γ_k/λ_k` transmits, at `1/λ_k − 1/γ_k`, provided `γ_k ≥ λ_k`. Ties go to
/// the lowest index.
pub fn mac_waterfill_policy<T: Scalar>(gains: &[T], thresholds: &[T]) -> Result<Vec<T>> {
    if gains.len() != thresholds.len() {
        return Err(Error::domain(format!(
            "{} gains but {} thresholds",
            gains.len(),
            thresholds.len()
        )));
    }
    if gains.iter().chain(thresholds).any(|&x| !(x > T::zero())) {
        return Err(Error::domain("gains and thresholds must be positive"));
    }
    let mut powers = vec![T::zero(); gains.len()];
    let mut winner: Option<(usize, T)> = None;
    for (k, (&g, &l)) in gains.iter().zip(thresholds).enumerate() {
        let score = g / l;
        if winner.is_none_or(|(_, best)| score > best) {
            winner = Some((k, score));
        }
    }
    if let Some((k, _)) = winner {
        if gains[k] >= thresholds[k] {
            powers[k] = T::one() / thresholds[k] - T::one() / gains[k];
        }
    }
    Ok(powers)
}

/// Root of `γ·e^γ = 1/p + S − 1`, the cutoff a user would pick if it treated
/// the others' average power as noise.
pub fn single_user_threshold<T: Scalar>(p: PowerLevel<T>, s_count: usize) -> T {
    let target = T::one() / p.get() + T::lit(s_count.max(1) as f64 - 1.0);
    let f = |g: T| g * g.exp() - target;
    let mut lo = T::zero();
    let mut hi = target.max(T::one()).ln().max(T::zero()) + T::one();
    while f(hi) < T::zero() {
        hi = hi * T::lit(2.0);
    }
    // bisect until the bracket collapses; the residual then sits at rounding
    // level, far inside the 1e-10 contract
    let mut mid = (lo + hi) / T::lit(2.0);
    for _ in 0..400 {
        mid = (lo + hi) / T::lit(2.0);
        let r = f(mid);
        if r == T::zero() || mid <= lo || mid >= hi {
            break;
        }
        if r < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// `S` users with the same average power over i.i.d. Rayleigh fading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastFadingScenario<T> {
    s_count: usize,
    power: PowerLevel<T>,
}

impl<T: Scalar> FastFadingScenario<T> {
    pub fn new(s_count: usize, power: PowerLevel<T>) -> Result<Self> {
        if s_count == 0 {
            return Err(Error::domain("fast-fading scenario needs at least one user"));
        }
        Ok(Self { s_count, power })
    }

    pub fn s_count(&self) -> usize {
        self.s_count
    }

    pub fn power(&self) -> PowerLevel<T> {
        self.power
    }

    /// Largest threshold the search considers, `ln(1000·S)`.
    pub fn gamma_cap(&self) -> T {
        T::lit(1000.0 * self.s_count as f64).ln()
    }
}

/// `∫_{γ_th}^∞ γ p(γ) dγ / ℙ(γ ≥ γ_th)²`: mean power of an active interferer
/// after the `1/ℙ` power boost, divided by `ℙ` once more.
pub fn scaled_conditional_gain<T: Scalar, D: GainDistribution<T>>(
    gamma_th: T,
    dist: &D,
) -> Result<T> {
    let on = dist.ccdf(gamma_th);
    let mass = adaptive_simpson(
        |g: T| g * dist.pdf(g),
        gamma_th,
        dist.truncation(gamma_th),
        T::lit(SIMPSON_TOL),
    )?
    .value;
    Ok(mass / (on * on))
}

/// Closed form of [`scaled_conditional_gain`] for Rayleigh fading.
pub fn scaled_conditional_gain_rayleigh<T: Scalar>(gamma_th: T) -> T {
    (T::one() + gamma_th) * gamma_th.exp()
}

/// `C_l` with the two quadratures it was computed by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClEvaluation<T> {
    pub value: T,
    /// Same sum with every integral done by adaptive Simpson.
    pub simpson: T,
    pub disagreement: T,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Binomial weights of the number of active interferers, `t = 0..S−1`.
pub fn interferer_weights<T: Scalar>(gamma_th: T, s_count: usize) -> Vec<T> {
    let on = (-gamma_th).exp();
    let off = T::one() - on;
    let n = s_count.saturating_sub(1);
    (0..=n)
        .map(|t| T::lit(binomial(n, t)) * off.powi((n - t) as i32) * on.powi(t as i32))
        .collect()
}

/// Lower bound `C_l(γ_th)` on user-1 capacity, nats per complex use.
pub fn capacity_lower_bound_cl<T: Scalar>(gamma_th: T, sc: &FastFadingScenario<T>) -> Result<T> {
    Ok(capacity_lower_bound_cl_detailed(gamma_th, sc)?.value)
}

/// [`capacity_lower_bound_cl`] together with its Simpson cross-check.
pub fn capacity_lower_bound_cl_detailed<T: Scalar>(
    gamma_th: T,
    sc: &FastFadingScenario<T>,
) -> Result<ClEvaluation<T>> {
    if !(gamma_th >= T::zero()) || !gamma_th.is_finite() {
        return Err(Error::domain(format!("threshold must be non-negative, got {gamma_th}")));
    }
    let on = (-gamma_th).exp();
    let p = sc.power().get();
    let mut value = T::zero();
    let mut simpson = T::zero();
    for (t, w) in interferer_weights(gamma_th, sc.s_count()).into_iter().enumerate() {
        let d = on / p + T::lit(t as f64) * (T::one() + gamma_th);
        let f = |g: T| (g / d).ln_1p();
        // the integrand's log singularity sits at γ = −d
        let gl = laguerre_with_head(gamma_th, gamma_th + d, f);
        let sp = adaptive_simpson(
            |g: T| f(g) * (-g).exp(),
            gamma_th,
            gamma_th + T::lit(SIMPSON_SPAN),
            T::lit(SIMPSON_TOL),
        )?
        .value;
        value = value + w * gl;
        simpson = simpson + w * sp;
    }
    let disagreement = (value - simpson).abs();
    if !(disagreement <= T::lit(CL_AGREEMENT_TOL)) {
        return Err(Error::numeric(
            format!("C_l quadratures disagree at threshold {gamma_th}"),
            disagreement.as_f64(),
        ));
    }
    Ok(ClEvaluation {
        value,
        simpson,
        disagreement,
    })
}

/// Monte Carlo estimate of user-1 capacity under the constant-power policy,
/// with every user using threshold `γ_th`.
pub fn mc_capacity_eq41<T: Scalar>(
    gamma_th: T,
    sc: &FastFadingScenario<T>,
    plan: &TrialPlan,
) -> Result<Estimate<T>> {
    if !(gamma_th >= T::zero()) {
        return Err(Error::domain(format!("threshold must be non-negative, got {gamma_th}")));
    }
    let on = (-gamma_th).exp();
    let inv_p = T::one() / sc.power().get();
    let s = sc.s_count();
    let samples: Vec<T> = (0..plan.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(plan.seed, i);
            let g1: T = UnitExponential.sample(&mut rng);
            let mut interference = T::zero();
            for _ in 1..s {
                let gi: T = UnitExponential.sample(&mut rng);
                if gi > gamma_th {
                    interference = interference + gi / on;
                }
            }
            if g1 > gamma_th {
                (g1 / on / (inv_p + interference)).ln_1p()
            } else {
                T::zero()
            }
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSearchResult<T> {
    pub gamma_single: T,
    pub gamma_multi: T,
    pub cl_at_single: T,
    pub cl_at_multi: T,
    pub mc_capacity_single: Option<Estimate<T>>,
    pub mc_capacity_multi: Option<Estimate<T>>,
    /// Largest quadrature disagreement seen during the search.
    pub max_disagreement: T,
}

/// Maximizes `C_l` over `[0, ln(1000·S)]`: a 0.01 grid, then golden section
/// around the best grid point. With a plan, both thresholds are also scored
/// by Monte Carlo using the same seed.
pub fn optimize_threshold<T: Scalar>(
    sc: &FastFadingScenario<T>,
    plan: Option<&TrialPlan>,
) -> Result<ThresholdSearchResult<T>> {
    if sc.s_count() == 0 {
        return Err(Error::domain("flat objective: no users"));
    }
    let mut worst = T::zero();
    let mut eval = |g: T| -> Result<T> {
        let e = capacity_lower_bound_cl_detailed(g, sc)?;
        worst = worst.max(e.disagreement);
        Ok(e.value)
    };
    let cap = sc.gamma_cap();
    let step = T::lit(THRESHOLD_GRID_STEP);
    let points = (cap / step).floor().to_usize().unwrap_or(0);
    let mut best = (T::zero(), eval(T::zero())?);
    for i in 1..=points {
        let g = step * T::lit(i as f64);
        let v = eval(g)?;
        if v > best.1 {
            best = (g, v);
        }
    }
    let mut a = (best.0 - step).max(T::zero());
    let mut b = (best.0 + step).min(cap);
    let ratio = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > T::lit(THRESHOLD_TOL) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = eval(d)?;
        }
    }
    let mid = (a + b) / T::lit(2.0);
    let fmid = eval(mid)?;
    let (gamma_multi, cl_at_multi) = if fmid >= best.1 { (mid, fmid) } else { best };
    let gamma_single = single_user_threshold(sc.power(), sc.s_count());
    let cl_at_single = eval(gamma_single)?;
    let (mc_capacity_single, mc_capacity_multi) = match plan {
        Some(plan) => (
            Some(mc_capacity_eq41(gamma_single, sc, plan)?),
            Some(mc_capacity_eq41(gamma_multi, sc, plan)?),
        ),
        None => (None, None),
    };
    Ok(ThresholdSearchResult {
        gamma_single,
        gamma_multi,
        cl_at_single,
        cl_at_multi,
        mc_capacity_single,
        mc_capacity_multi,
        max_disagreement: worst,
    })
}
