//! Closed-form average lengths of variable-length stop-feedback codes when
//! early termination cancels interference for the users still transmitting.
//!
//! Conventions: payloads are in bits at the boundary and converted to nats
//! (`κ = K·ln 2`); lengths are in channel uses; `C_u` is the capacity seen by a
//! user while `u` equal-power users are active. Lower-order remainders
//! (`O(1)`, `O(log K)`) are dropped everywhere.

use crate::channel::{
    capacity, dispersion_in, sinr_awgn, sinr_fading, ChannelField, GainVector, PowerLevel,
    SinrLadder,
};
use crate::error::{Error, Result};
use crate::special::q_inverse;
use crate::Scalar;

/// Payload in nats, `κ = K·ln 2`.
pub fn payload_nats<T: Scalar>(payload_bits: u32) -> T {
    T::lit(payload_bits as f64) * T::LN_2()
}

/// Decoding threshold `γ = κ + ln κ` for a `K`-bit message.
///
/// With `M = 2^K` messages the union bound `M·e^{-γ}` then equals `1/κ`.
pub fn message_threshold<T: Scalar>(payload_bits: u32) -> Result<T> {
    if payload_bits < 2 {
        return Err(Error::domain(format!(
            "payload must be at least 2 bits, got {payload_bits}"
        )));
    }
    let kappa: T = payload_nats(payload_bits);
    Ok(kappa + kappa.ln())
}

/// Smallest blocklength `n` of a fixed-length code meeting the normal
/// approximation `κ ≤ nC − sqrt(nV)·Q⁻¹(ε)` on a real AWGN channel.
pub fn fixed_length_blocklength<T: Scalar>(payload_bits: u32, snr: T, epsilon: T) -> Result<u64> {
    fixed_length_blocklength_in(payload_bits, snr, epsilon, ChannelField::RealAwgn)
}

/// [`fixed_length_blocklength`] for either channel field.
pub fn fixed_length_blocklength_in<T: Scalar>(
    payload_bits: u32,
    snr: T,
    epsilon: T,
    field: ChannelField,
) -> Result<u64> {
    if !(snr > T::zero()) || !snr.is_finite() {
        return Err(Error::domain(format!(
            "fixed-length code is unsatisfiable at snr {snr}"
        )));
    }
    let q = q_inverse(epsilon)?;
    let kappa: T = payload_nats(payload_bits);
    let c = capacity(snr, field)?;
    let v = dispersion_in(snr, field)?;
    let sv = v.sqrt();
    let feasible = |n: u64| {
        let nf = T::lit(n as f64);
        kappa <= nf * c - (nf * v).sqrt() * q
    };
    // nC - sqrt(nV)q - κ is a quadratic in x = sqrt(n)
    let two = T::lit(2.0);
    let x = (sv * q + (v * q * q + T::lit(4.0) * c * kappa).sqrt()) / (two * c);
    let mut n = (x * x).ceil().to_u64().unwrap_or(u64::MAX).max(1);
    while n > 1 && feasible(n - 1) {
        n -= 1;
    }
    while !feasible(n) {
        n += 1;
    }
    Ok(n)
}

/// Multi-cell AWGN setting: one user per cell, common power, increasing payloads.
#[derive(Debug, Clone, PartialEq)]
pub struct AwgnScenario<T> {
    payload_bits: Vec<u32>,
    power: PowerLevel<T>,
    epsilon: T,
}

impl<T: Scalar> AwgnScenario<T> {
    /// `epsilon` may be zero, which gives the lengths of the underlying
    /// stopping times without the idle-probability scaling.
    pub fn new(payload_bits: Vec<u32>, power: PowerLevel<T>, epsilon: T) -> Result<Self> {
        if payload_bits.is_empty() {
            return Err(Error::domain("scenario needs at least one cell"));
        }
        if payload_bits.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain(format!(
                "payloads must be strictly increasing, got {payload_bits:?}"
            )));
        }
        if !(epsilon >= T::zero() && epsilon < T::one()) {
            return Err(Error::domain(format!("target error must lie in [0, 1), got {epsilon}")));
        }
        for &k in &payload_bits {
            message_threshold::<T>(k)?;
        }
        Ok(Self {
            payload_bits,
            power,
            epsilon,
        })
    }

    pub fn s_count(&self) -> usize {
        self.payload_bits.len()
    }

    pub fn payload_bits(&self) -> &[u32] {
        &self.payload_bits
    }

    pub fn power(&self) -> PowerLevel<T> {
        self.power
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: T) -> Result<Self> {
        Self::new(self.payload_bits.clone(), self.power, epsilon)
    }

    /// Thresholds `γ^1..γ^S` in nats.
    pub fn thresholds(&self) -> Vec<T> {
        self.payload_bits
            .iter()
            .map(|&k| message_threshold(k).expect("validated at construction"))
            .collect()
    }

    /// `C_1..C_S`: capacity with `u` active users at index `u-1`.
    pub fn capacities(&self) -> Vec<T> {
        SinrLadder::awgn(self.power, self.s_count())
            .and_then(|l| l.capacities(ChannelField::RealAwgn))
            .expect("validated at construction")
    }

    /// Capacity with `u` active users.
    fn cap(caps: &[T], u: usize) -> T {
        caps[u - 1]
    }
}

/// Stopping-time means `ℓ'_s = Σ_{t≤s} (γ^t − γ^{t−1}) / C_{S−t+1}`.
pub fn thm1_raw_lengths<T: Scalar>(sc: &AwgnScenario<T>) -> Vec<T> {
    let s_count = sc.s_count();
    let caps = sc.capacities();
    let mut prev = T::zero();
    let mut acc = T::zero();
    sc.thresholds()
        .into_iter()
        .enumerate()
        .map(|(i, gamma)| {
            let t = i + 1;
            acc = acc + (gamma - prev) / AwgnScenario::cap(&caps, s_count - t + 1);
            prev = gamma;
            acc
        })
        .collect()
}

/// Average lengths `ℓ_s = (1−ε)·ℓ'_s` for every user.
pub fn thm1_lengths<T: Scalar>(sc: &AwgnScenario<T>) -> Result<Vec<T>> {
    let scale = T::one() - sc.epsilon();
    Ok(thm1_raw_lengths(sc).into_iter().map(|l| l * scale).collect())
}

/// AWGN scenario where each cell receives a new message every `t_sub` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueScenario<T> {
    base: AwgnScenario<T>,
    t_sub: T,
}

impl<T: Scalar> QueueScenario<T> {
    pub fn new(base: AwgnScenario<T>, t_sub: T) -> Result<Self> {
        if !(t_sub > T::zero()) || !t_sub.is_finite() {
            return Err(Error::domain(format!("interval length must be positive, got {t_sub}")));
        }
        Ok(Self { base, t_sub })
    }

    pub fn base(&self) -> &AwgnScenario<T> {
        &self.base
    }

    pub fn t_sub(&self) -> T {
        self.t_sub
    }
}

/// Multi-interval accounting of a user whose message does not fit in one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Congestion<T> {
    /// Complete intervals spent, `⌊γ^s / I⌋`.
    pub intervals: u64,
    /// Information still missing after those intervals, `γ^s − c·I`.
    pub remainder: T,
    /// Largest index with `γ^{r_s} < remainder` (0 if none).
    pub stop_phase: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueUserLength<T> {
    pub length: T,
    /// `None` for users that finish inside a single interval.
    pub congestion: Option<Congestion<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thm2Breakdown<T> {
    /// Number of leading users that are not congested.
    pub uncongested: usize,
    /// Average information a congested user accumulates per interval, nats.
    /// `None` when no user is congested.
    pub info_per_interval: Option<T>,
    pub users: Vec<QueueUserLength<T>>,
}

impl<T: Scalar> Thm2Breakdown<T> {
    pub fn lengths(&self) -> Vec<T> {
        self.users.iter().map(|u| u.length).collect()
    }
}

/// Average lengths in the periodic-arrival model.
///
/// Users whose stopping-time mean fits in `t_sub` keep their single-shot
/// length; the others accumulate `I` nats per interval and finish during
/// interval `c_s + 1` once the in-interval phase profile supplies the
/// remaining `b_s` nats.
pub fn thm2_lengths<T: Scalar>(sc: &QueueScenario<T>) -> Result<Thm2Breakdown<T>> {
    let base = sc.base();
    let s_count = base.s_count();
    let t_sub = sc.t_sub();
    let raw = thm1_raw_lengths(base);
    let gammas = base.thresholds();
    let caps = base.capacities();
    let scale = T::one() - base.epsilon();
    let cap = |u: usize| AwgnScenario::cap(&caps, u);
    let gamma_at = |i: usize| if i == 0 { T::zero() } else { gammas[i - 1] };
    let raw_at = |i: usize| if i == 0 { T::zero() } else { raw[i - 1] };

    let r = raw.iter().take_while(|&&l| l < t_sub).count();
    let mut users: Vec<QueueUserLength<T>> = raw
        .iter()
        .take(r)
        .map(|&l| QueueUserLength {
            length: l * scale,
            congestion: None,
        })
        .collect();
    if r == s_count {
        return Ok(Thm2Breakdown {
            uncongested: r,
            info_per_interval: None,
            users,
        });
    }

    // Per-interval information: phases t ≤ r at C_{S−t+1}, then C_{S−r} to the end.
    let c_tail = cap(s_count - r);
    let info = t_sub * c_tail
        - (1..=r)
            .map(|t| c_tail / cap(s_count - t + 1) * (gamma_at(t) - gamma_at(t - 1)))
            .fold(T::zero(), |a, b| a + b)
        + gamma_at(r);
    if !(info > T::zero()) {
        return Err(Error::domain(format!(
            "interval of {t_sub} symbols accumulates no information (I = {info})"
        )));
    }

    for s in (r + 1)..=s_count {
        let gamma = gamma_at(s);
        let mut c = (gamma / info).floor();
        let mut b = gamma - c * info;
        if b < T::zero() {
            c = c - T::one();
            b = gamma - c * info;
        }
        let r_s = (1..=r).take_while(|&j| gamma_at(j) < b).count();
        let length = c * t_sub + (b - gamma_at(r_s)) / cap(s_count - r_s) + raw_at(r_s);
        users.push(QueueUserLength {
            length: length * scale,
            congestion: Some(Congestion {
                intervals: c.to_u64().unwrap_or(u64::MAX),
                remainder: b,
                stop_phase: r_s,
            }),
        });
    }
    Ok(Thm2Breakdown {
        uncongested: r,
        info_per_interval: Some(info),
        users,
    })
}

/// Per-user coefficients `a_j` (symbols per nat of threshold) in block fading.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingCoeffs<T> {
    pub a: Vec<T>,
}

impl<T: Scalar> FadingCoeffs<T> {
    /// Average lengths `a_j·(1−ε)·γ`.
    pub fn lengths(&self, threshold: T, epsilon: T) -> Vec<T> {
        let scale = (T::one() - epsilon) * threshold;
        self.a.iter().map(|&a| a * scale).collect()
    }
}

/// `C_{s,j}`: complex-channel capacity of user `j` (1-based) while the last
/// `s` users are active.
pub fn fading_capacity<T: Scalar>(
    gains: &GainVector<T>,
    p: PowerLevel<T>,
    s: usize,
    j: usize,
) -> Result<T> {
    let s_count = gains.len();
    if s == 0 || s > s_count || j == 0 {
        return Err(Error::domain(format!("invalid active set s={s}, user j={j}")));
    }
    let snr = sinr_fading(p, gains, s_count - s, j - 1)?;
    capacity(snr, ChannelField::ComplexFading)
}

/// Block-fading coefficients with decoding in descending gain order.
///
/// `a_1 = 1/C_{S,1}`, `a_k = (1 + Σ_{t<k} a_t (C_{S−t,k} − C_{S−t+1,k})) / C_{S−k+1,k}`.
pub fn thm3_coeffs<T: Scalar>(gains: &GainVector<T>, p: PowerLevel<T>) -> Result<FadingCoeffs<T>> {
    let s_count = gains.len();
    if s_count == 0 {
        return Err(Error::domain("need at least one gain"));
    }
    if gains.as_slice().iter().any(|&g| !(g > T::zero())) {
        return Err(Error::domain("all gains must be positive"));
    }
    if !gains.is_sorted_desc() {
        return Err(Error::domain("gains must be sorted in descending order"));
    }
    let mut a: Vec<T> = Vec::with_capacity(s_count);
    for k in 1..=s_count {
        let mut acc = T::one();
        for t in 1..k {
            let gain = fading_capacity(gains, p, s_count - t, k)?
                - fading_capacity(gains, p, s_count - t + 1, k)?;
            acc = acc + a[t - 1] * gain;
        }
        a.push(acc / fading_capacity(gains, p, s_count - k + 1, k)?);
    }
    Ok(FadingCoeffs { a })
}

/// Means of the order statistics of `S` unit-mean exponentials, largest first.
///
/// The `j`-th largest has mean `Σ_{i=0}^{S−j} 1/(S−i)`.
pub fn rayleigh_order_means<T: Scalar>(s_count: usize) -> Vec<T> {
    let mut out = vec![T::zero(); s_count];
    let mut acc = T::zero();
    // smallest first: 1/S, 1/S + 1/(S-1), ...
    for (i, slot) in out.iter_mut().rev().enumerate() {
        acc = acc + T::one() / T::lit((s_count - i) as f64);
        *slot = acc;
    }
    out
}

/// Full-interference baseline `(1−ε)·γ^s / C_S` that ignores cancellation.
pub fn full_interference_lengths<T: Scalar>(sc: &AwgnScenario<T>) -> Result<Vec<T>> {
    let c_s = capacity(sinr_awgn(sc.power(), sc.s_count())?, ChannelField::RealAwgn)?;
    let scale = T::one() - sc.epsilon();
    Ok(sc.thresholds().into_iter().map(|g| scale * g / c_s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn pw(p: f64) -> PowerLevel<f64> {
        PowerLevel::new(p).unwrap()
    }

    fn scen(k: Vec<u32>, p: f64, eps: f64) -> AwgnScenario<f64> {
        AwgnScenario::new(k, pw(p), eps).unwrap()
    }

    #[test]
    fn threshold_values() {
        // frozen from a 40-digit evaluation
        let g: f64 = message_threshold(1000).unwrap();
        assert_abs_diff_eq!(g, 699.688_422_918_345_8, epsilon = 1e-9);
        let k8 = 8.0 * 2f64.ln();
        assert_abs_diff_eq!(message_threshold::<f64>(8).unwrap(), k8 + k8.ln(), epsilon = 1e-14);
        assert!(message_threshold::<f64>(1).is_err());
        for k in [2u32, 8, 300, 1000, 5000] {
            let kappa: f64 = payload_nats(k);
            let g: f64 = message_threshold(k).unwrap();
            assert_relative_eq!((kappa - g).exp(), 1.0 / kappa, max_relative = 1e-12);
        }
    }

    #[test]
    fn fixed_length_values() {
        // frozen from exhaustive search against a 40-digit Q-function
        assert_eq!(fixed_length_blocklength(1000, 0.5f64, 1e-3).unwrap(), 3923);
        assert_eq!(fixed_length_blocklength(1000, 1.0f64, 1e-3).unwrap(), 2260);
        // Q^-1(1/2) = 0 leaves the dispersion-free length
        let kappa: f64 = payload_nats(1000);
        let c = 0.5 * 1.5f64.ln();
        assert_eq!(fixed_length_blocklength(1000, 0.5f64, 0.5).unwrap(), (kappa / c).ceil() as u64);
        assert_eq!(fixed_length_blocklength(1000, 0.5f64, 0.5).unwrap(), 3420);
        assert!(fixed_length_blocklength(1000, 0.0f64, 1e-3).is_err());
        assert!(fixed_length_blocklength(1000, 1.0f64, 0.0).is_err());
    }

    #[test]
    fn fixed_length_is_minimal() {
        for (k, snr, eps) in [(200u32, 0.3, 1e-2), (1000, 2.0, 1e-5), (64, 5.0, 0.1)] {
            let n = fixed_length_blocklength(k, snr, eps).unwrap();
            let kappa: f64 = payload_nats(k);
            let c = 0.5 * (1.0f64 + snr).ln();
            let v = snr * (snr + 2.0) / (2.0 * (snr + 1.0) * (snr + 1.0));
            let q: f64 = q_inverse(eps).unwrap();
            let ok = |n: u64| kappa <= n as f64 * c - (n as f64 * v).sqrt() * q;
            assert!(ok(n) && !ok(n - 1));
        }
    }

    #[test]
    fn thm1_single_user_collapses() {
        let sc = scen(vec![1000], 1.0, 1e-3);
        let l = thm1_lengths(&sc).unwrap();
        let g: f64 = message_threshold(1000).unwrap();
        assert_relative_eq!(l[0], (1.0 - 1e-3) * g / (0.5 * 2f64.ln()), max_relative = 1e-14);
    }

    #[test]
    fn thm1_two_user_value() {
        let sc = scen(vec![300, 1000], 1.0, 0.0);
        let l = thm1_lengths(&sc).unwrap();
        assert_abs_diff_eq!(l[0], 1_052.033_427_572_573_5, epsilon = 1e-8);
        assert_abs_diff_eq!(l[1], 2_455.507_358_760_906, epsilon = 1e-8);
    }

    #[test]
    fn thm1_vanishes_as_epsilon_to_one() {
        let sc = scen(vec![300, 1000], 1.0, 1.0 - 1e-12);
        assert!(thm1_lengths(&sc).unwrap().iter().all(|&l| l < 1e-8));
    }

    #[test]
    fn scenario_validation() {
        assert!(AwgnScenario::new(vec![], pw(1.0), 0.1).is_err());
        assert!(AwgnScenario::new(vec![1000, 300], pw(1.0), 0.1).is_err());
        assert!(AwgnScenario::new(vec![300, 300], pw(1.0), 0.1).is_err());
        assert!(AwgnScenario::new(vec![300], pw(1.0), 1.0).is_err());
        assert!(AwgnScenario::new(vec![300], pw(1.0), -0.1).is_err());
        assert!(AwgnScenario::new(vec![1, 300], pw(1.0), 0.1).is_err());
        let base = scen(vec![300], 1.0, 0.0);
        assert!(QueueScenario::new(base.clone(), 0.0).is_err());
        assert!(QueueScenario::new(base, f64::NAN).is_err());
    }

    #[test]
    fn thm2_uncongested_matches_thm1() {
        let sc = scen(vec![300, 1000], 1.0, 1e-3);
        let thm1 = thm1_lengths(&sc).unwrap();
        let raw_s = thm1_raw_lengths(&sc)[1];
        for factor in [1.0, 1.0 + 1e-9, 2.0, 10.0] {
            let q = QueueScenario::new(sc.clone(), raw_s * factor).unwrap();
            let b = thm2_lengths(&q).unwrap();
            for (a, t) in b.lengths().iter().zip(&thm1) {
                assert_relative_eq!(*a, *t, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn thm2_fully_congested_runs_at_full_interference() {
        let sc = scen(vec![300, 1000], 1.0, 0.0);
        let q = QueueScenario::new(sc.clone(), 100.0).unwrap();
        let b = thm2_lengths(&q).unwrap();
        assert_eq!(b.uncongested, 0);
        let full = full_interference_lengths(&sc).unwrap();
        for (a, f) in b.lengths().iter().zip(&full) {
            assert_relative_eq!(*a, *f, max_relative = 1e-12);
        }
        let c2 = 0.5 * 1.5f64.ln();
        assert_relative_eq!(b.info_per_interval.unwrap(), 100.0 * c2, max_relative = 1e-14);
    }

    #[test]
    fn thm2_multi_interval_breakdown() {
        let sc = scen(vec![300, 1000], 1.0, 0.0);
        let q = QueueScenario::new(sc.clone(), 1500.0).unwrap();
        let b = thm2_lengths(&q).unwrap();
        assert_eq!(b.uncongested, 1);
        let g = sc.thresholds();
        let caps = sc.capacities();
        let raw = thm1_raw_lengths(&sc);
        let info = 1500.0 * caps[0] - caps[0] / caps[1] * g[0] + g[0];
        assert_relative_eq!(b.info_per_interval.unwrap(), info, max_relative = 1e-14);
        let cg = b.users[1].congestion.unwrap();
        assert_eq!(cg.intervals, (g[1] / info).floor() as u64);
        assert_relative_eq!(cg.remainder, g[1] - cg.intervals as f64 * info, max_relative = 1e-12);
        // remainder exceeds γ^1 here, so the user finishes in the tail phase
        assert!(cg.remainder > g[0]);
        assert_eq!(cg.stop_phase, 1);
        let want = cg.intervals as f64 * 1500.0 + (cg.remainder - g[0]) / caps[0] + raw[0];
        assert_relative_eq!(b.users[1].length, want, max_relative = 1e-12);
    }

    #[test]
    fn thm2_zero_remainder_boundary() {
        // t_sub = ℓ'_S gives I = γ^S exactly: one full interval, nothing left over
        let sc = scen(vec![300, 1000], 1.0, 0.0);
        let raw = thm1_raw_lengths(&sc);
        let q = QueueScenario::new(sc, raw[1]).unwrap();
        let b = thm2_lengths(&q).unwrap();
        let user = b.users[1];
        assert_relative_eq!(user.length, raw[1], max_relative = 1e-12);
        let cg = user.congestion.unwrap();
        if cg.intervals == 1 {
            assert!(cg.remainder.abs() < 1e-9);
            assert_eq!(cg.stop_phase, 0);
        }
    }

    #[test]
    fn thm3_single_user() {
        for (g, p) in [(1.0, 1.0), (0.4, 3.0), (2.5, 0.2)] {
            let gains = GainVector::new(vec![g]).unwrap();
            let a = thm3_coeffs(&gains, pw(p)).unwrap();
            assert_relative_eq!(a.a[0], 1.0 / (1.0 + p * g).ln(), max_relative = 1e-14);
        }
    }

    #[test]
    fn thm3_frozen_values() {
        // 40-digit independent evaluation of the recursion
        let gains = GainVector::new(vec![1.5, 0.5]).unwrap();
        let a = thm3_coeffs(&gains, pw(1.0)).unwrap().a;
        // first user sees SINR 1.5/(1 + 0.5) = 1, so a_1 = 1/ln 2
        assert_relative_eq!(a[0], std::f64::consts::LOG2_E, max_relative = 1e-14);
        assert_relative_eq!(a[1], 3.260_275_837_433_382, max_relative = 1e-14);
        let gains = GainVector::new(rayleigh_order_means(3)).unwrap();
        let a = thm3_coeffs(&gains, pw(1.0)).unwrap().a;
        assert_relative_eq!(a[0], 1.631_043_393_456_488_5, max_relative = 1e-13);
        assert_relative_eq!(a[1], 2.905_923_056_043_404, max_relative = 1e-13);
        assert_relative_eq!(a[2], 5.148_352_720_910_675, max_relative = 1e-13);
    }

    #[test]
    fn thm3_equal_gains() {
        let gains = GainVector::new(vec![1.0, 1.0]).unwrap();
        let a = thm3_coeffs(&gains, pw(1.0)).unwrap().a;
        let c = (1.5f64).ln();
        assert_relative_eq!(a[0], 1.0 / c, max_relative = 1e-14);
        assert_relative_eq!(a[1], 1.0 / c, max_relative = 1e-12);
    }

    #[test]
    fn thm3_rejects_bad_gains() {
        let p = pw(1.0);
        assert!(thm3_coeffs(&GainVector::new(vec![1.0, 0.0]).unwrap(), p).is_err());
        assert!(thm3_coeffs(&GainVector::new(vec![0.5, 1.0]).unwrap(), p).is_err());
        assert!(thm3_coeffs(&GainVector::new(vec![]).unwrap(), p).is_err());
    }

    #[test]
    fn thm3_telescoping_vanishes_without_interference_change() {
        // a lone strong user with negligible partners: removing users changes nothing
        let gains = GainVector::new(vec![1.0, 1e-300, 1e-300]).unwrap();
        let p = pw(2.0);
        let a = thm3_coeffs(&gains, p).unwrap().a;
        for (k, ak) in a.iter().enumerate() {
            let c = fading_capacity(&gains, p, 3 - k, k + 1).unwrap();
            assert_relative_eq!(*ak, 1.0 / c, max_relative = 1e-12);
        }
    }

    #[test]
    fn order_means_small_cases() {
        assert_eq!(rayleigh_order_means::<f64>(1), vec![1.0]);
        assert_eq!(rayleigh_order_means::<f64>(2), vec![1.5, 0.5]);
        let m = rayleigh_order_means::<f64>(3);
        assert_abs_diff_eq!(m[0], 11.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1], 5.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[2], 1.0 / 3.0, epsilon = 1e-15);
        assert!(rayleigh_order_means::<f64>(0).is_empty());
    }

    fn increasing_payloads() -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(1u32..400, 1..5).prop_map(|steps| {
            let mut acc = 8u32;
            steps
                .into_iter()
                .map(|d| {
                    acc += d;
                    acc
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn thm1_monotone_and_beats_full_interference(
            k in increasing_payloads(), p in 0.05f64..20.0, eps in 0.0f64..0.5
        ) {
            let sc = scen(k, p, eps);
            let l = thm1_lengths(&sc).unwrap();
            let full = full_interference_lengths(&sc).unwrap();
            for w in l.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            prop_assert!(l[0] <= full[0] * (1.0 + 1e-12));
            for s in 1..l.len() {
                prop_assert!(l[s] < full[s]);
            }
        }

        #[test]
        fn thm2_agrees_with_thm1_below_interval(
            k in increasing_payloads(), p in 0.1f64..10.0, t_frac in 0.05f64..1.5
        ) {
            let sc = scen(k, p, 1e-3);
            let raw = thm1_raw_lengths(&sc);
            let thm1 = thm1_lengths(&sc).unwrap();
            let t_sub = raw[raw.len() - 1] * t_frac;
            let b = thm2_lengths(&QueueScenario::new(sc, t_sub).unwrap()).unwrap();
            for s in 0..raw.len() {
                if raw[s] < t_sub {
                    prop_assert!((b.users[s].length - thm1[s]).abs() <= 1e-12 * thm1[s]);
                    prop_assert!(b.users[s].congestion.is_none());
                } else {
                    let c = b.users[s].congestion.unwrap();
                    prop_assert!(c.remainder >= 0.0);
                    prop_assert!(c.remainder < b.info_per_interval.unwrap());
                    prop_assert!(c.stop_phase <= b.uncongested);
                }
            }
        }

        #[test]
        fn thm2_non_increasing_in_interval(
            k in increasing_payloads(), p in 0.1f64..10.0, t1 in 0.02f64..1.5, dt in 0.0f64..1.0
        ) {
            let sc = scen(k, p, 0.0);
            let raw = thm1_raw_lengths(&sc);
            let top = raw[raw.len() - 1];
            let a = thm2_lengths(&QueueScenario::new(sc.clone(), top * t1).unwrap()).unwrap();
            let b = thm2_lengths(&QueueScenario::new(sc, top * (t1 + dt)).unwrap()).unwrap();
            for (x, y) in a.lengths().iter().zip(b.lengths()) {
                prop_assert!(y <= x * (1.0 + 1e-9), "{y} > {x}");
            }
        }

        #[test]
        fn thm3_invariant_under_gain_power_rescaling(
            g in prop::collection::vec(0.05f64..5.0, 1..5), p in 0.1f64..10.0, scale in 0.1f64..10.0
        ) {
            let gv = GainVector::sorted_desc(g.clone()).unwrap();
            let a = thm3_coeffs(&gv, pw(p)).unwrap().a;
            let gs = GainVector::sorted_desc(g.iter().map(|x| x * scale).collect()).unwrap();
            let b = thm3_coeffs(&gs, pw(p / scale)).unwrap().a;
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs());
            }
        }

        #[test]
        fn order_means_sum_to_count(s in 1usize..64) {
            let m = rayleigh_order_means::<f64>(s);
            let total: f64 = m.iter().sum();
            prop_assert!((total - s as f64).abs() < 1e-10);
            for w in m.windows(2) {
                prop_assert!(w[0] > w[1]);
            }
        }
    }
}
