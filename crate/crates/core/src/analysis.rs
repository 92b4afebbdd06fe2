//! Closed-form and quadrature evaluation of the multicast metrics:
//! coverage, UAV-pair transmission success, request success, mean delay and
//! mean area spectral efficiency.
//!
//! The Monte Carlo estimators at the bottom sample positions and fading
//! directly and share nothing with the quadrature path beyond the path-loss
//! model; they serve as the oracle for it.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{fading_margin, reception_success, LinkKind, RadioParams, REFERENCE_DISTANCE_M};
use crate::distributions::{pdf_a, pdf_d1, pdf_d2, ClusterGeometry, DistanceQuery};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::geometry::offspring_count;
use crate::quadrature::{integrate_with_breaks, try_integrate_with_breaks};
use crate::rng::{derive_seed, seeded};

const COVERAGE_TOLERANCE: f64 = 1e-9;
const INNER_TOLERANCE: f64 = 1e-11;
const OUTER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricInputs {
    pub geom: ClusterGeometry,
    pub radio: RadioParams,
    pub lambda_off: f64,
    pub packet_len_ms: f64,
    pub t_req_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricResults {
    pub p_cov: f64,
    pub p_suc: f64,
    pub p_req: f64,
    pub delay_aver_ms: f64,
    /// bits/s/Hz/m²
    pub ase_aver: f64,
}

fn ensure_probability(field: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::config(field, format!("probability must lie in [0, 1], got {p}")))
    }
}

/// Probability that a uniformly placed cluster member decodes the BS
/// broadcast, averaged over the conditional density of `d1`.
pub fn coverage_probability(geom: &ClusterGeometry, radio: &RadioParams) -> Result<f64> {
    let (lo, hi) = geom.d1_support();
    let integral = try_integrate_with_breaks(
        |d1| {
            let success = (-fading_margin(radio.p_bs_mw, d1, LinkKind::BsToUav, radio)).exp();
            Ok(success * pdf_d1(d1, geom)?)
        },
        &[lo, hi],
        COVERAGE_TOLERANCE,
    )?;
    Ok(integral.value.clamp(0.0, 1.0))
}

fn uav_link_success(d2: f64, radio: &RadioParams) -> f64 {
    (-fading_margin(radio.p_uav_mw, d2, LinkKind::UavToUav, radio)).exp()
}

/// Success probability of one UAV-to-UAV transmission between two
/// uniformly placed members of a cluster of radius `radius_r`.
pub fn transmission_success_probability(radius_r: f64, radio: &RadioParams) -> Result<f64> {
    ensure_positive("radius_r", radius_r)?;
    let mut failure = None;
    let outer = integrate_with_breaks(
        |a| {
            let hi = radius_r + a;
            let mut breaks = vec![0.0, REFERENCE_DISTANCE_M, radius_r - a, hi];
            breaks.retain(|&b| (0.0..=hi).contains(&b));
            breaks.sort_by(f64::total_cmp);
            let inner = try_integrate_with_breaks(
                |d2| Ok(uav_link_success(d2, radio) * pdf_d2(d2, a, radius_r)?),
                &breaks,
                INNER_TOLERANCE,
            );
            match inner {
                Ok(i) => i.value * pdf_a(a, radius_r),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &[0.0, radius_r],
        OUTER_TOLERANCE,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(outer?.value.clamp(0.0, 1.0))
}

/// `[1 − (1 − p_cov)^n] · p_suc` with `n = ⌊λ_off π r²⌋` cluster peers.
pub fn request_success_probability(p_cov: f64, p_suc: f64, lambda_off: f64, radius_r: f64) -> Result<f64> {
    ensure_probability("p_cov", p_cov)?;
    ensure_probability("p_suc", p_suc)?;
    ensure_positive("lambda_off", lambda_off)?;
    ensure_positive("radius_r", radius_r)?;
    let n = offspring_count(lambda_off, radius_r);
    if n == 0 {
        return Err(Error::config(
            "lambda_off",
            format!("floor(lambda_off * pi * r^2) = 0 for lambda_off={lambda_off}, r={radius_r}; no peers"),
        ));
    }
    let all_missed = (1.0 - p_cov).powi(n.min(i32::MAX as u64) as i32);
    Ok((1.0 - all_missed) * p_suc)
}

/// Mean per-UAV delay: one broadcast, plus a geometric number of
/// request/reply exchanges for UAVs that missed it.
pub fn average_delay(p_cov: f64, p_suc: f64, packet_len_ms: f64, t_req_ms: f64) -> Result<f64> {
    ensure_probability("p_cov", p_cov)?;
    ensure_probability("p_suc", p_suc)?;
    ensure_positive("packet_len_ms", packet_len_ms)?;
    ensure_finite("t_req_ms", t_req_ms)?;
    if t_req_ms < 0.0 {
        return Err(Error::config("t_req_ms", "must be >= 0"));
    }
    if p_suc == 0.0 {
        if p_cov == 1.0 {
            return Ok(packet_len_ms);
        }
        return Err(Error::Numeric("average delay diverges: p_suc = 0 with p_cov < 1".into()));
    }
    let recovery = packet_len_ms + (packet_len_ms + t_req_ms) / p_suc;
    Ok(p_cov * packet_len_ms + (1.0 - p_cov) * recovery)
}

/// Mean area spectral efficiency, bits/s/Hz/m².
pub fn average_ase(p_cov: f64, p_suc: f64, lambda_off: f64, snr_threshold: f64) -> Result<f64> {
    ensure_probability("p_cov", p_cov)?;
    ensure_probability("p_suc", p_suc)?;
    ensure_positive("snr_threshold", snr_threshold)?;
    ensure_finite("lambda_off", lambda_off)?;
    let peak = lambda_off * (1.0 + snr_threshold).log2();
    Ok(p_cov * peak + (1.0 - p_cov) * p_suc * peak)
}

pub fn evaluate_metrics(inputs: &MetricInputs) -> Result<MetricResults> {
    let p_cov = coverage_probability(&inputs.geom, &inputs.radio)?;
    let p_suc = transmission_success_probability(inputs.geom.radius_r, &inputs.radio)?;
    let p_req = request_success_probability(p_cov, p_suc, inputs.lambda_off, inputs.geom.radius_r)?;
    let delay_aver_ms = average_delay(p_cov, p_suc, inputs.packet_len_ms, inputs.t_req_ms)?;
    let ase_aver = average_ase(p_cov, p_suc, inputs.lambda_off, inputs.radio.snr_threshold)?;
    Ok(MetricResults { p_cov, p_suc, p_req, delay_aver_ms, ase_aver })
}

/// A Bernoulli-mean estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl Estimate {
    pub fn from_successes(successes: usize, trials: usize) -> Self {
        let mean = successes as f64 / trials as f64;
        Estimate { mean, std_error: (mean * (1.0 - mean) / trials as f64).sqrt(), trials }
    }
}

const MC_CHUNK: usize = 1 << 14;

/// Runs `trials` Bernoulli draws in fixed-size chunks, each chunk with its
/// own derived seed, so the result is independent of the thread count.
fn parallel_bernoulli<F>(trials: usize, seed: u64, draw: F) -> Estimate
where
    F: Fn(&mut crate::rng::SimRng) -> bool + Sync,
{
    let chunks = trials.div_ceil(MC_CHUNK);
    let successes: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seeded(derive_seed(seed, &[c as u64]));
            let n = MC_CHUNK.min(trials - c * MC_CHUNK);
            (0..n).filter(|_| draw(&mut rng)).count()
        })
        .sum();
    Estimate::from_successes(successes, trials)
}

/// Simulated coverage: uniform UAV in the cluster disk, fresh Rayleigh
/// fading per trial.
pub fn monte_carlo_coverage(geom: &ClusterGeometry, radio: &RadioParams, trials: usize, seed: u64) -> Estimate {
    let query = DistanceQuery::D1(*geom);
    parallel_bernoulli(trials, seed, |rng| {
        let d1 = query.sample_geometric(rng);
        reception_success(radio.p_bs_mw, d1, LinkKind::BsToUav, radio, rng)
    })
}

/// Simulated UAV-pair success: two independent uniform points in one disk.
pub fn monte_carlo_transmission_success(radius_r: f64, radio: &RadioParams, trials: usize, seed: u64) -> Estimate {
    parallel_bernoulli(trials, seed, |rng| {
        let rho = |rng: &mut crate::rng::SimRng| radius_r * rng.random::<f64>().sqrt();
        let theta = |rng: &mut crate::rng::SimRng| 2.0 * std::f64::consts::PI * rng.random::<f64>();
        let (r1, t1) = (rho(rng), theta(rng));
        let (r2, t2) = (rho(rng), theta(rng));
        let d2 = (r1 * t1.cos() - r2 * t2.cos()).hypot(r1 * t1.sin() - r2 * t2.sin());
        reception_success(radio.p_uav_mw, d2, LinkKind::UavToUav, radio, rng)
    })
}
