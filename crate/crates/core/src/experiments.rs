//! Seeded parameter sweeps over the analytic metrics and the protocol
//! simulator, collected into flat CSV tables.
//!
//! Within one simulated epoch every scheme sees the same topology and
//! starts from the same random stream, so the first BS transmission is
//! received by exactly the same UAVs under all schemes. Scheme comparisons
//! are therefore paired, and the ASE of the BS-driven schemes coincides by
//! construction.

use std::io::Write;

use rayon::prelude::*;

use crate::analysis::{
    average_ase, average_delay, coverage_probability, monte_carlo_coverage, monte_carlo_transmission_success,
    request_success_probability, transmission_success_probability,
};
use crate::config::{RadiusRule, ScenarioConfig};
use crate::distributions::ClusterGeometry;
use crate::error::{Error, Result};
use crate::geometry::build_topology;
use crate::protocol::{run_scheme, Scheme, SchemeOutcome};
use crate::rng::{derive_seed, seeded};

pub const COVERAGE_V_GRID: [f64; 6] = [200.0, 400.0, 600.0, 800.0, 1000.0, 1200.0];
pub const SUCCESS_R_GRID: [f64; 5] = [10.0, 25.0, 50.0, 75.0, 100.0];
pub const DESIGN_C_GRID: [usize; 5] = [2, 4, 6, 8, 10];
pub const DESIGN_V_GRID: [f64; 3] = [400.0, 800.0, 1200.0];
pub const DELAY_D0_GRID: [f64; 3] = [400.0, 800.0, 1200.0];
pub const DELAY_C_GRID: [usize; 3] = [2, 5, 10];

const THEORY: &str = "theory";
const MONTE_CARLO: &str = "monte_carlo";
const ANALYSIS: &str = "analysis";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub study: String,
    pub sweep_param: String,
    pub sweep_value: f64,
    pub scheme: String,
    pub metric: String,
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricTable {
    pub rows: Vec<MetricRow>,
}

impl MetricTable {
    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, study: &str, sweep_param: &str, sweep_value: f64, scheme: &str, metric: &str, stats: Stats) {
        self.rows.push(MetricRow {
            study: study.to_string(),
            sweep_param: sweep_param.to_string(),
            sweep_value,
            scheme: scheme.to_string(),
            metric: metric.to_string(),
            mean: stats.mean,
            std_error: stats.std_error,
            n: stats.n,
        });
    }

    pub fn find(&self, sweep_param: &str, sweep_value: f64, scheme: &str, metric: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| {
            r.sweep_param == sweep_param && r.sweep_value == sweep_value && r.scheme == scheme && r.metric == metric
        })
    }

    pub fn extend(&mut self, other: MetricTable) {
        self.rows.extend(other.rows);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["study", "sweep_param", "sweep_value", "scheme", "metric", "mean", "stderr", "n"])?;
        for r in &self.rows {
            w.write_record([
                r.study.clone(),
                r.sweep_param.clone(),
                r.sweep_value.to_string(),
                r.scheme.clone(),
                r.metric.clone(),
                r.mean.to_string(),
                r.std_error.to_string(),
                r.n.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

/// Sample mean with its standard error `s / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Stats {
    pub fn exact(value: f64) -> Self {
        Stats { mean: value, std_error: 0.0, n: 1 }
    }

    pub fn invalid() -> Self {
        Stats { mean: f64::NAN, std_error: f64::NAN, n: 0 }
    }

    pub fn of(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Stats::invalid();
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Stats { mean, std_error, n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationKind {
    CoverageVsV,
    SuccessVsR,
}

impl ValidationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValidationKind::CoverageVsV => "validation_coverage",
            ValidationKind::SuccessVsR => "validation_success",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    ValidationCoverage,
    ValidationSuccess,
    DesignInsight,
    Delay,
    Ase,
}

impl StudyKind {
    pub const ALL: [StudyKind; 5] = [
        StudyKind::ValidationCoverage,
        StudyKind::ValidationSuccess,
        StudyKind::DesignInsight,
        StudyKind::Delay,
        StudyKind::Ase,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StudyKind::ValidationCoverage => "validation_coverage",
            StudyKind::ValidationSuccess => "validation_success",
            StudyKind::DesignInsight => "design_insight",
            StudyKind::Delay => "delay",
            StudyKind::Ase => "ase",
        }
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl std::str::FromStr for StudyKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        StudyKind::ALL.into_iter().find(|k| k.as_str() == s.replace('-', "_")).ok_or_else(|| {
            let names: Vec<&str> = StudyKind::ALL.iter().map(|k| k.as_str()).collect();
            format!("expected one of {}, got {s:?}", names.join("|"))
        })
    }
}

fn ensure_increasing(field: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::config(field, "sweep needs at least one value"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(field, format!("sweep values must be strictly increasing: {values:?}")));
    }
    Ok(())
}

fn as_f64(values: &[usize]) -> Vec<f64> {
    values.iter().map(|&v| v as f64).collect()
}

/// Cluster radius and offspring density when `total_uavs` are split over
/// `clusters` clusters under the configured radius rule.
pub fn cluster_layout(config: &ScenarioConfig, clusters: usize) -> Result<(f64, f64)> {
    match config.radius_rule {
        RadiusRule::DensityPreserving => Ok((config.radius_for_clusters(clusters)?, config.lambda_off)),
        RadiusRule::Fixed => {
            if clusters == 0 {
                return Err(Error::config("num_clusters", "must be >= 1"));
            }
            let r = config.radius_r;
            let per_cluster = config.total_uavs as f64 / clusters as f64;
            Ok((r, per_cluster / (std::f64::consts::PI * r * r)))
        }
    }
}

/// Quadrature value next to a Monte Carlo estimate at each sweep point;
/// `config.replications` trials per point.
pub fn run_validation_study(kind: ValidationKind, config: &ScenarioConfig, sweep: &[f64]) -> Result<MetricTable> {
    let (param, metric, tag) = match kind {
        ValidationKind::CoverageVsV => ("v_norm", "p_cov", StudyKind::ValidationCoverage.tag()),
        ValidationKind::SuccessVsR => ("radius_r", "p_suc", StudyKind::ValidationSuccess.tag()),
    };
    ensure_increasing(param, sweep)?;
    config.radio.validate()?;
    let trials = config.replications;
    let mut table = MetricTable::default();
    for (i, &x) in sweep.iter().enumerate() {
        let seed = derive_seed(config.base_seed, &[tag, i as u64]);
        let (theory, mc) = match kind {
            ValidationKind::CoverageVsV => {
                let geom = ClusterGeometry::new(x, config.radius_r, config.h1, config.h2)?;
                (coverage_probability(&geom, &config.radio)?, monte_carlo_coverage(&geom, &config.radio, trials, seed))
            }
            ValidationKind::SuccessVsR => (
                transmission_success_probability(x, &config.radio)?,
                monte_carlo_transmission_success(x, &config.radio, trials, seed),
            ),
        };
        table.push(kind.as_str(), param, x, THEORY, metric, Stats::exact(theory));
        table.push(
            kind.as_str(),
            param,
            x,
            MONTE_CARLO,
            metric,
            Stats { mean: mc.mean, std_error: mc.std_error, n: mc.trials },
        );
    }
    Ok(table)
}

/// Request success probability over a (C, ‖v‖) grid, with the radius
/// derived from C. Points without peers or with ‖v‖ ≤ r are emitted with
/// `mean = NaN, n = 0`.
pub fn run_design_insight_study(config: &ScenarioConfig, c_values: &[usize], v_values: &[f64]) -> Result<MetricTable> {
    ensure_increasing("num_clusters", &as_f64(c_values))?;
    ensure_increasing("v_norm", v_values)?;
    config.radio.validate()?;
    let study = StudyKind::DesignInsight.as_str();
    let mut table = MetricTable::default();
    let layouts = c_values
        .iter()
        .map(|&c| {
            let (r, lambda_off) = cluster_layout(config, c)?;
            Ok((c, r, lambda_off, transmission_success_probability(r, &config.radio)?))
        })
        .collect::<Result<Vec<_>>>()?;
    for &v in v_values {
        let param = format!("num_clusters@v_norm={v}");
        for &(c, r, lambda_off, p_suc) in &layouts {
            let x = c as f64;
            let point = ClusterGeometry::new(v, r, config.h1, config.h2).and_then(|geom| {
                let p_cov = coverage_probability(&geom, &config.radio)?;
                let p_req = request_success_probability(p_cov, p_suc, lambda_off, r)?;
                Ok((p_cov, p_req))
            });
            match point {
                Ok((p_cov, p_req)) => {
                    table.push(study, &param, x, ANALYSIS, "radius_r", Stats::exact(r));
                    table.push(study, &param, x, ANALYSIS, "p_cov", Stats::exact(p_cov));
                    table.push(study, &param, x, ANALYSIS, "p_suc", Stats::exact(p_suc));
                    table.push(study, &param, x, ANALYSIS, "p_req", Stats::exact(p_req));
                }
                Err(Error::Config { .. }) => {
                    table.push(study, &param, x, ANALYSIS, "radius_r", Stats::exact(r));
                    table.push(study, &param, x, ANALYSIS, "p_req", Stats::invalid());
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(table)
}

/// Per-epoch summary of one scheme run.
#[derive(Debug, Clone, Copy)]
struct EpochSummary {
    mean_delay_ms: Option<f64>,
    delivery_ratio: f64,
    ase: f64,
}

/// Simulated area spectral efficiency of one epoch: peak efficiency times
/// the fraction covered by the first BS transmission, plus, for cluster
/// recovery, the uncovered fraction times the empirical peer success rate.
pub fn epoch_ase(outcome: &SchemeOutcome, lambda_off: f64, snr_threshold: f64) -> f64 {
    let peak = lambda_off * (1.0 + snr_threshold).log2();
    let p_cov = outcome.broadcast_coverage();
    match outcome.scheme {
        Scheme::Clustering => peak * (p_cov + (1.0 - p_cov) * outcome.peer_success_rate()),
        Scheme::Benchmark | Scheme::Rnc => peak * p_cov,
    }
}

struct PointResult {
    r: f64,
    lambda_off: f64,
    per_scheme: Vec<(Scheme, Vec<EpochSummary>)>,
}

fn simulate_point(config: &ScenarioConfig, tag: u64, point: [u64; 2], d0: f64, clusters: usize) -> Result<PointResult> {
    let (r, lambda_off) = cluster_layout(config, clusters)?;
    let mut cfg = config.clone();
    cfg.d0 = d0;
    cfg.num_clusters = clusters;
    cfg.validate()?;
    let epochs = cfg.replications;
    let summaries = (0..epochs as u64)
        .into_par_iter()
        .map(|epoch| {
            let topo_seed = derive_seed(cfg.base_seed, &[tag, point[0], point[1], epoch, 0]);
            let run_seed = derive_seed(cfg.base_seed, &[tag, point[0], point[1], epoch, 1]);
            let topology = build_topology(&cfg, &mut seeded(topo_seed))?;
            cfg.schemes
                .iter()
                .map(|&scheme| {
                    let out = run_scheme(scheme, &topology, &cfg.radio, &cfg.sim, &mut seeded(run_seed))?;
                    Ok(EpochSummary {
                        mean_delay_ms: out.mean_delay_ms(),
                        delivery_ratio: out.delivery_ratio(),
                        ase: epoch_ase(&out, lambda_off, cfg.radio.snr_threshold),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let per_scheme =
        cfg.schemes.iter().enumerate().map(|(i, &s)| (s, summaries.iter().map(|e| e[i]).collect())).collect();
    Ok(PointResult { r, lambda_off, per_scheme })
}

fn analytic_point(config: &ScenarioConfig, d0: f64, r: f64) -> Result<(f64, f64)> {
    let geom = ClusterGeometry::new(d0, r, config.h1, config.h2)?;
    let p_cov = coverage_probability(&geom, &config.radio)?;
    let p_suc = transmission_success_probability(r, &config.radio)?;
    Ok((p_cov, p_suc))
}

/// Simulated mean per-UAV delay for every enabled scheme over a (D0, C)
/// grid, next to the analytic delay. Epochs in which no UAV got the packet
/// are left out of the delay mean; the delivery ratio column counts them.
pub fn run_delay_study(config: &ScenarioConfig, d0_values: &[f64], c_values: &[usize]) -> Result<MetricTable> {
    ensure_increasing("d0", d0_values)?;
    ensure_increasing("num_clusters", &as_f64(c_values))?;
    let kind = StudyKind::Delay;
    let mut table = MetricTable::default();
    for (i, &d0) in d0_values.iter().enumerate() {
        let param = format!("num_clusters@d0={d0}");
        for (j, &c) in c_values.iter().enumerate() {
            let point = simulate_point(config, kind.tag(), [i as u64, j as u64], d0, c)?;
            let x = c as f64;
            for (scheme, epochs) in &point.per_scheme {
                let delays: Vec<f64> = epochs.iter().filter_map(|e| e.mean_delay_ms).collect();
                let ratios: Vec<f64> = epochs.iter().map(|e| e.delivery_ratio).collect();
                table.push(kind.as_str(), &param, x, scheme.as_str(), "delay_ms", Stats::of(&delays));
                table.push(kind.as_str(), &param, x, scheme.as_str(), "delivery_ratio", Stats::of(&ratios));
            }
            let (p_cov, p_suc) = analytic_point(config, d0, point.r)?;
            let delay = average_delay(p_cov, p_suc, config.sim.packet_len_ms, config.sim.t_req_ms)?;
            table.push(kind.as_str(), &param, x, ANALYSIS, "delay_ms", Stats::exact(delay));
        }
    }
    Ok(table)
}

/// Simulated area spectral efficiency for the clustering scheme and the
/// BS-driven baselines over a (D0, C) grid, next to the analytic value.
pub fn run_ase_study(config: &ScenarioConfig, d0_values: &[f64], c_values: &[usize]) -> Result<MetricTable> {
    ensure_increasing("d0", d0_values)?;
    ensure_increasing("num_clusters", &as_f64(c_values))?;
    let kind = StudyKind::Ase;
    let mut table = MetricTable::default();
    for (i, &d0) in d0_values.iter().enumerate() {
        let param = format!("num_clusters@d0={d0}");
        for (j, &c) in c_values.iter().enumerate() {
            let point = simulate_point(config, kind.tag(), [i as u64, j as u64], d0, c)?;
            let x = c as f64;
            for (scheme, epochs) in &point.per_scheme {
                let ase: Vec<f64> = epochs.iter().map(|e| e.ase).collect();
                table.push(kind.as_str(), &param, x, scheme.as_str(), "ase", Stats::of(&ase));
            }
            let (p_cov, p_suc) = analytic_point(config, d0, point.r)?;
            let ase = average_ase(p_cov, p_suc, point.lambda_off, config.radio.snr_threshold)?;
            table.push(kind.as_str(), &param, x, ANALYSIS, "ase", Stats::exact(ase));
        }
    }
    Ok(table)
}

/// Runs a study over its default sweep grid.
pub fn run_study(kind: StudyKind, config: &ScenarioConfig) -> Result<MetricTable> {
    match kind {
        StudyKind::ValidationCoverage => run_validation_study(ValidationKind::CoverageVsV, config, &COVERAGE_V_GRID),
        StudyKind::ValidationSuccess => run_validation_study(ValidationKind::SuccessVsR, config, &SUCCESS_R_GRID),
        StudyKind::DesignInsight => run_design_insight_study(config, &DESIGN_C_GRID, &DESIGN_V_GRID),
        StudyKind::Delay => run_delay_study(config, &DELAY_D0_GRID, &DELAY_C_GRID),
        StudyKind::Ase => run_ase_study(config, &DELAY_D0_GRID, &DELAY_C_GRID),
    }
}
