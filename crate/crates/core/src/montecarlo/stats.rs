//! Order-fixed summary statistics over per-trial samples.

use crate::Scalar;

/// 97.5% standard normal quantile used for two-sided 95% intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum<T: Scalar>(xs: &[T]) -> T {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        xs.iter().fold(T::zero(), |a, &b| a + b)
    } else {
        let (l, r) = xs.split_at(xs.len() / 2);
        pairwise_sum(l) + pairwise_sum(r)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub mean: T,
    pub std_err: T,
    pub samples: usize,
}

impl<T: Scalar> Estimate<T> {
    pub fn from_samples(xs: &[T]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: T::nan(),
                std_err: T::nan(),
                samples: 0,
            };
        }
        let nf = T::lit(n as f64);
        let mean = pairwise_sum(xs) / nf;
        let dev: Vec<T> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
        let var = if n > 1 {
            pairwise_sum(&dev) / T::lit((n - 1) as f64)
        } else {
            T::zero()
        };
        Self {
            mean,
            std_err: (var / nf).sqrt(),
            samples: n,
        }
    }

    /// Half-width of the two-sided 95% normal interval.
    pub fn ci95(&self) -> T {
        T::lit(Z95) * self.std_err
    }

    pub fn lower95(&self) -> T {
        self.mean - self.ci95()
    }

    pub fn upper95(&self) -> T {
        self.mean + self.ci95()
    }
}

/// Ratio-of-means estimate `Σa / Σb` with a delta-method standard error.
pub fn ratio_estimate<T: Scalar>(num: &[T], den: &[T]) -> Estimate<T> {
    assert_eq!(num.len(), den.len());
    let n = num.len();
    let a = Estimate::from_samples(num);
    let b = Estimate::from_samples(den);
    let ratio = a.mean / b.mean;
    let resid: Vec<T> = num.iter().zip(den).map(|(&x, &y)| x - ratio * y).collect();
    let r = Estimate::from_samples(&resid);
    Estimate {
        mean: ratio,
        std_err: r.std_err / b.mean,
        samples: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_error() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        let var = (2.25 + 0.25 + 0.25 + 2.25) / 3.0;
        assert!((e.std_err - (var / 4.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&xs), 0.5 * 999.0 * 1000.0 / 2.0);
    }

    #[test]
    fn ratio_of_proportional_samples_has_zero_error() {
        let den = [1.0f64, 2.0, 3.0];
        let num = [2.0, 4.0, 6.0];
        let r = ratio_estimate(&num, &den);
        assert_eq!(r.mean, 2.0);
        assert!(r.std_err.abs() < 1e-15);
    }
}
