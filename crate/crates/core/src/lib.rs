//! Coded water-filling: average lengths of variable-length stop-feedback codes
//! with interference cancellation, their Monte Carlo oracles, and the
//! power-allocation machinery for fading channels.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom of this file fix the scalar to `f64`.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod quadrature;
mod scalar;
pub mod special;
pub mod waterfill;

pub use analytic::{
    fixed_length_blocklength, full_interference_lengths, message_threshold, payload_nats,
    rayleigh_order_means, thm1_lengths, thm1_raw_lengths, thm2_lengths, thm3_coeffs,
};
pub use channel::{capacity, dispersion, ChannelField, GainVector, InfoDensity, PowerLevel, SinrLadder};
pub use error::{Error, Result};
pub use montecarlo::{Estimate, StoppingOutcome, TrialPlan};
pub use scalar::Scalar;
pub use waterfill::{
    capacity_lower_bound_cl, optimize_threshold, single_user_threshold, ThresholdSearchResult,
};

pub type PowerLevelF64 = PowerLevel<f64>;
pub type GainVectorF64 = GainVector<f64>;
pub type AwgnScenarioF64 = analytic::AwgnScenario<f64>;
pub type QueueScenarioF64 = analytic::QueueScenario<f64>;
pub type Thm2BreakdownF64 = analytic::Thm2Breakdown<f64>;
pub type FadingCoeffsF64 = analytic::FadingCoeffs<f64>;
pub type StoppingOutcomeF64 = StoppingOutcome<f64>;
pub type EstimateF64 = Estimate<f64>;
pub type FastFadingScenarioF64 = waterfill::FastFadingScenario<f64>;
pub type ThresholdSearchResultF64 = ThresholdSearchResult<f64>;
pub type WaterfillAllocationF64 = waterfill::WaterfillAllocation<f64>;
pub type AwgnScenarioF32 = analytic::AwgnScenario<f32>;
