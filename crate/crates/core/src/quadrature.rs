//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Intervals are kept in a max-heap keyed on their error estimate and the
//! worst one is bisected until the summed estimate drops below the absolute
//! tolerance. Callers split at known kinks and support endpoints through
//! [`integrate_with_breaks`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for KRONROD_NODES[1], [3], [5], [7].
const GAUSS_WEIGHTS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

pub const DEFAULT_MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);
    let mut kronrod = f_center * KRONROD_WEIGHTS[7];
    let mut gauss = f_center * GAUSS_WEIGHTS[3];
    for (i, (&node, &weight)) in KRONROD_NODES[..7].iter().zip(&KRONROD_WEIGHTS[..7]).enumerate() {
        let dx = half * node;
        let pair = f(center - dx) + f(center + dx);
        kronrod += weight * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    Segment { lo, hi, value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// Integrates `f` over `[lo, hi]` to the absolute tolerance `abs_tol`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, abs_tol: f64) -> Result<Integral> {
    integrate_with_breaks(f, &[lo, hi], abs_tol)
}

/// Integrates over `[breaks[0], breaks[last]]`, seeding the adaptive
/// bisection with the supplied break points. Break points must be
/// non-decreasing; zero-width pieces are skipped.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], abs_tol: f64) -> Result<Integral> {
    if breaks.len() < 2 {
        return Err(Error::Numeric("quadrature needs at least two break points".into()));
    }
    if breaks.iter().any(|b| !b.is_finite()) {
        return Err(Error::Numeric(format!("non-finite quadrature limits {breaks:?}")));
    }
    if breaks.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Numeric(format!("quadrature break points not sorted: {breaks:?}")));
    }

    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gauss_kronrod(&mut f, w[0], w[1]));
        }
    }
    if heap.is_empty() {
        return Ok(Integral { value: 0.0, abs_error: 0.0, intervals: 0 });
    }

    loop {
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if !error.is_finite() {
            return Err(Error::Numeric(format!(
                "integrand produced a non-finite value on [{}, {}]",
                breaks[0],
                breaks[breaks.len() - 1]
            )));
        }
        if error <= abs_tol {
            let value = heap.iter().map(|s| s.value).sum();
            return Ok(Integral { value, abs_error: error, intervals: heap.len() });
        }
        if heap.len() >= DEFAULT_MAX_INTERVALS {
            let worst = heap.peek().copied().expect("heap is non-empty");
            return Err(Error::Numeric(format!(
                "quadrature did not converge: error estimate {error:e} > tolerance {abs_tol:e} \
                 after {} intervals (worst segment [{}, {}], error {:e})",
                heap.len(),
                worst.lo,
                worst.hi,
                worst.error
            )));
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval collapsed to adjacent floats; accept what we have.
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        heap.push(gauss_kronrod(&mut f, worst.lo, mid));
        heap.push(gauss_kronrod(&mut f, mid, worst.hi));
    }
}

/// Like [`integrate_with_breaks`] for integrands that can fail; the first
/// error raised by `f` is returned.
pub fn try_integrate_with_breaks<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
) -> Result<Integral> {
    let mut failure = None;
    let result = integrate_with_breaks(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        breaks,
        abs_tol,
    );
    match failure {
        Some(e) => Err(e),
        None => result,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((r.value - 8.0).abs() < 1e-13);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        // d/dx of x^{3/2} has infinite curvature at 0
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn break_points_handle_kinks() {
        let f = |x: f64| (x - 0.3).abs();
        let r = integrate_with_breaks(f, &[0.0, 0.3, 1.0], 1e-14).unwrap();
        let exact = 0.5 * 0.09 + 0.5 * 0.49;
        assert!((r.value - exact).abs() < 1e-14);
    }

    #[test]
    fn zero_width_is_zero() {
        let r = integrate(|_| 1.0, 2.0, 2.0, 1e-9).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn unsorted_breaks_rejected() {
        assert!(integrate_with_breaks(|x| x, &[1.0, 0.0], 1e-9).is_err());
    }

    #[test]
    fn nan_integrand_is_numeric_error() {
        let err = integrate(|_| f64::NAN, 0.0, 1.0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn nonconvergence_reports_diagnostics() {
        let err = integrate(|x: f64| (1.0 / x).sin() / x, 1e-12, 1.0, 1e-15).unwrap_err();
        match err {
            Error::Numeric(msg) => assert!(msg.contains("did not converge"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
