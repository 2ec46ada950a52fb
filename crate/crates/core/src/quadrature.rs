//! Quadrature rules: Gauss–Laguerre for exponentially weighted half-line
//! integrals, Gauss–Legendre panels, and adaptive Simpson on finite intervals.
//!
//! Node tables are computed once in `f64` and cast to the working scalar.

use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::Scalar;

/// Nodes used by the primary half-line rule.
pub const LAGUERRE_NODES: usize = 64;
const LEGENDRE_PANEL_NODES: usize = 32;

static LAGUERRE_64: Lazy<GaussRule> = Lazy::new(|| GaussRule::laguerre(LAGUERRE_NODES));
static LEGENDRE_32: Lazy<GaussRule> = Lazy::new(|| GaussRule::legendre(LEGENDRE_PANEL_NODES));

/// A Gauss rule as parallel node/weight tables.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss–Laguerre rule for `∫_0^∞ f(x) e^{-x} dx`.
    pub fn laguerre(n: usize) -> Self {
        assert!(n >= 1);
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let mut z = 0.0f64;
        for i in 0..n {
            // asymptotic starting guesses, refined by Newton on L_n
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
                }
            };
            let mut pp = 0.0;
            let mut p2 = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
                }
                pp = (nf * p1 - nf * p2) / z;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            weights[i] = -1.0 / (pp * nf * p2);
        }
        Self { nodes, weights }
    }

    /// Gauss–Legendre rule on `[-1, 1]`.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1);
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule to `f` on its native domain.
    pub fn apply<T: Scalar, F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + T::lit(w) * f(T::lit(x)))
    }

    /// Applies a `[-1, 1]` rule to `[a, b]` by affine map.
    pub fn apply_on<T: Scalar, F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        half * self.apply(|x: T| f(mid + half * x))
    }
}

/// `∫_lower^∞ f(x) e^{-x} dx` with the 64-node Gauss–Laguerre rule only.
pub fn laguerre_shifted<T: Scalar, F: FnMut(T) -> T>(lower: T, mut f: F) -> T {
    (-lower).exp() * LAGUERRE_64.apply(|u: T| f(lower + u))
}

/// `∫_lower^∞ f(x) e^{-x} dx` for an `f` that may have a singularity at
/// distance `gap` to the left of `lower`.
///
/// The unit head `[lower, lower+1]` is covered by Gauss–Legendre panels whose
/// widths grow geometrically away from the singularity; the tail from
/// `lower+1` uses the 64-node Gauss–Laguerre rule.
pub fn laguerre_with_head<T: Scalar, F: FnMut(T) -> T>(lower: T, gap: T, mut f: F) -> T {
    let one = T::one();
    let four = T::lit(4.0);
    let mut head = T::zero();
    let mut a = T::zero();
    let mut b = if gap > T::zero() { (gap * four).min(one) } else { one };
    loop {
        head = head
            + LEGENDRE_32.apply_on(a, b, |u: T| {
                let x = lower + u;
                f(x) * (-x).exp()
            });
        if b >= one {
            break;
        }
        a = b;
        b = (b * four).min(one);
    }
    head + laguerre_shifted(lower + one, f)
}

/// Result of an adaptive integration with its a-posteriori error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
}

/// Adaptive Simpson quadrature on `[a, b]` to absolute tolerance `tol`.
///
/// Fails with [`Error::Numeric`] when the recursion depth is exhausted before
/// the local error estimates meet the tolerance.
pub fn adaptive_simpson<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<Integral<T>> {
    const MAX_DEPTH: u32 = 48;
    let two = T::lit(2.0);
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) / two;
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut err = T::zero();
    let mut failed = false;
    let value = simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut err, &mut failed);
    if failed || !value.is_finite() {
        return Err(Error::numeric("adaptive Simpson", err.as_f64()));
    }
    Ok(Integral { value, error: err })
}

#[inline]
fn simpson<T: Scalar>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Scalar, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
    err: &mut T,
    failed: &mut bool,
) -> T {
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let fifteen = T::lit(15.0);
    // a tolerance below the rounding noise of the panel sum cannot be met
    let noise = T::epsilon() * T::lit(64.0) * (left.abs() + right.abs());
    if delta.abs() <= fifteen * tol || delta.abs() <= noise {
        *err = *err + delta.abs() / fifteen;
        return left + right + delta / fifteen;
    }
    if depth == 0 {
        *failed = true;
        *err = *err + delta.abs() / fifteen;
        return left + right + delta / fifteen;
    }
    let half_tol = tol / two;
    simpson_step(f, a, m, fa, flm, fm, left, half_tol, depth - 1, err, failed)
        + simpson_step(f, m, b, fm, frm, fb, right, half_tol, depth - 1, err, failed)
}
