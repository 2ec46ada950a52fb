//! Channel primitives: SINR ladders, capacity and dispersion, and the
//! per-symbol information density of a Gaussian-input Gaussian channel.
//!
//! Every information quantity is expressed in nats. Interference from other
//! users' Gaussian codeword symbols is folded into a single Gaussian noise
//! variance.

use crate::error::{Error, Result};
use crate::Scalar;

/// Linear transmit power ratio (dimensionless, strictly positive and finite).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PowerLevel<T>(T);

impl<T: Scalar> PowerLevel<T> {
    pub fn new(p: T) -> Result<Self> {
        if p.is_finite() && p > T::zero() {
            Ok(Self(p))
        } else {
            Err(Error::domain(format!("power must be positive and finite, got {p}")))
        }
    }

    /// Power from a level in decibels, `p = 10^(dB/10)`.
    pub fn from_db(db: T) -> Result<Self> {
        Self::new(T::lit(10.0).powf(db / T::lit(10.0)))
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }
}

/// Which field the channel lives in. Decides the capacity formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelField {
    /// Real AWGN: `½·ln(1+snr)` nats per symbol.
    RealAwgn,
    /// Circularly symmetric complex channel: `ln(1+snr)` nats per symbol.
    ComplexFading,
}

impl ChannelField {
    /// Real dimensions carried by one channel use.
    pub fn real_dims(self) -> usize {
        match self {
            ChannelField::RealAwgn => 1,
            ChannelField::ComplexFading => 2,
        }
    }
}

/// SINR seen by a user of power `p` when `s` equal-power users are active.
pub fn sinr_awgn<T: Scalar>(p: PowerLevel<T>, s: usize) -> Result<T> {
    if s < 1 {
        return Err(Error::domain("active-user count must be at least 1"));
    }
    let p = p.get();
    Ok(p / (T::one() + T::lit((s - 1) as f64) * p))
}

/// SINRs indexed by active-user count, `values[s-1] = p / (1 + (s-1)p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrLadder<T> {
    values: Vec<T>,
}

impl<T: Scalar> SinrLadder<T> {
    pub fn awgn(p: PowerLevel<T>, s_max: usize) -> Result<Self> {
        if s_max < 1 {
            return Err(Error::domain("SINR ladder needs at least one user"));
        }
        let values = (1..=s_max).map(|s| sinr_awgn(p, s)).collect::<Result<_>>()?;
        Ok(Self { values })
    }

    pub fn s_max(&self) -> usize {
        self.values.len()
    }

    /// SINR with `s` active users, `1 <= s <= s_max`.
    pub fn get(&self, s: usize) -> Option<T> {
        s.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Capacities `C_1..C_{s_max}` in nats per symbol.
    pub fn capacities(&self, field: ChannelField) -> Result<Vec<T>> {
        self.values.iter().map(|&snr| capacity(snr, field)).collect()
    }
}

/// Squared fading magnitudes `|h_j|²`, one per user.
#[derive(Debug, Clone, PartialEq)]
pub struct GainVector<T> {
    gains: Vec<T>,
}

impl<T: Scalar> GainVector<T> {
    pub fn new(gains: Vec<T>) -> Result<Self> {
        if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g >= T::zero())) {
            return Err(Error::domain(format!("gains must be finite and non-negative, got {g}")));
        }
        Ok(Self { gains })
    }

    /// Builds the vector and sorts it in descending order.
    pub fn sorted_desc(mut gains: Vec<T>) -> Result<Self> {
        gains.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self::new(gains)
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.gains
    }

    pub fn is_sorted_desc(&self) -> bool {
        self.gains.windows(2).all(|w| w[0] >= w[1])
    }
}

/// SINR of user `j` (0-based) when exactly users `active_from..S` transmit.
///
/// `P|h_j|² / (1 + Σ_{t active, t≠j} P|h_t|²)`.
pub fn sinr_fading<T: Scalar>(
    p: PowerLevel<T>,
    gains: &GainVector<T>,
    active_from: usize,
    j: usize,
) -> Result<T> {
    let g = gains.as_slice();
    if j < active_from || j >= g.len() {
        return Err(Error::domain(format!(
            "user {j} is not active (active users are {active_from}..{})",
            g.len()
        )));
    }
    let p = p.get();
    let interference = g[active_from..]
        .iter()
        .enumerate()
        .filter(|(t, _)| t + active_from != j)
        .map(|(_, &gt)| p * gt)
        .fold(T::zero(), |acc, x| acc + x);
    Ok(p * g[j] / (T::one() + interference))
}

pub fn capacity<T: Scalar>(snr: T, field: ChannelField) -> Result<T> {
    if !(snr >= T::zero()) {
        return Err(Error::domain(format!("snr must be non-negative, got {snr}")));
    }
    let c = snr.ln_1p();
    Ok(match field {
        ChannelField::RealAwgn => c / T::lit(2.0),
        ChannelField::ComplexFading => c,
    })
}

/// Real-AWGN channel dispersion `snr(snr+2) / (2(snr+1)²)` in nats² per symbol.
pub fn dispersion<T: Scalar>(snr: T) -> Result<T> {
    if !(snr >= T::zero()) {
        return Err(Error::domain(format!("snr must be non-negative, got {snr}")));
    }
    let one = T::one();
    Ok(snr * (snr + T::lit(2.0)) / (T::lit(2.0) * (snr + one) * (snr + one)))
}

/// Dispersion per channel use; a complex use is two independent real uses.
pub fn dispersion_in<T: Scalar>(snr: T, field: ChannelField) -> Result<T> {
    Ok(dispersion(snr)? * T::lit(field.real_dims() as f64))
}

/// Information density of one real symbol for input `x ~ N(0, p)` observed
/// as `y = x + w`, `w ~ N(0, noise_var)`.
pub fn info_density_increment<T: Scalar>(x: T, y: T, p: PowerLevel<T>, noise_var: T) -> Result<T> {
    Ok(InfoDensity::new(p.get(), noise_var)?.increment(x, y))
}

/// Precomputed form of [`info_density_increment`] for a fixed power and
/// noise variance; the simulators call it once per symbol per user.
#[derive(Debug, Clone, Copy)]
pub struct InfoDensity<T> {
    half_log_ratio: T,
    inv_two_total: T,
    inv_two_noise: T,
}

impl<T: Scalar> InfoDensity<T> {
    pub fn new(p: T, noise_var: T) -> Result<Self> {
        if !(noise_var > T::zero()) || !noise_var.is_finite() {
            return Err(Error::domain(format!("noise variance must be positive, got {noise_var}")));
        }
        if !(p >= T::zero()) {
            return Err(Error::domain(format!("signal power must be non-negative, got {p}")));
        }
        let two = T::lit(2.0);
        let total = p + noise_var;
        Ok(Self {
            half_log_ratio: (p / noise_var).ln_1p() / two,
            inv_two_total: T::one() / (two * total),
            inv_two_noise: T::one() / (two * noise_var),
        })
    }

    #[inline]
    pub fn increment(&self, x: T, y: T) -> T {
        let d = y - x;
        self.half_log_ratio + y * y * self.inv_two_total - d * d * self.inv_two_noise
    }
}
