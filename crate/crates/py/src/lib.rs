//! Python bindings: scenario configuration, closed-form metrics, distance
//! densities, topology drops, protocol simulation and studies.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use uav_multicast::analysis;
use uav_multicast::distributions::{pdf_a as pdf_a_rs, pdf_d1 as pdf_d1_rs, pdf_d2 as pdf_d2_rs};
use uav_multicast::experiments::{run_study as run_study_rs, StudyKind};
use uav_multicast::rng::{derive_seed, seeded};
use uav_multicast::{ClusterGeometry, Error, MetricInputs, ScenarioConfig, Scheme};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Config { .. } => PyValueError::new_err(err.to_string()),
        Error::Io(_) | Error::Csv(_) => PyIOError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

/// Scenario configuration. Keyword arguments are applied as `key=value`
/// settings, e.g. `Scenario(d0=1200, **{"radio.p_bs_mw": 500})`.
#[pyclass(module = "uavmc", skip_from_py_object)]
#[derive(Clone)]
struct Scenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl Scenario {
    #[new]
    #[pyo3(signature = (**settings))]
    fn new(settings: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = ScenarioConfig::default();
        if let Some(settings) = settings {
            for (key, value) in settings.iter() {
                let key: String = key.extract()?;
                inner.set(&key, &value.str()?.to_cow()?).map_err(to_py)?;
            }
        }
        Ok(Scenario { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        ScenarioConfig::from_text(text).map(|inner| Scenario { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn keys() -> Vec<&'static str> {
        uav_multicast::config::KEYS.to_vec()
    }

    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        self.inner.set(key, &value.str()?.to_cow()?).map_err(to_py)
    }

    fn get(&self, key: &str) -> PyResult<String> {
        self.inner.get(key).map_err(to_py)
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(to_py)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(d0={}, v_norm={}, num_clusters={}, total_uavs={}, radius_r={})",
            self.inner.d0, self.inner.v_norm, self.inner.num_clusters, self.inner.total_uavs, self.inner.radius_r
        )
    }
}

fn scenario_or_default(scenario: Option<&Scenario>) -> ScenarioConfig {
    scenario.map(|s| s.inner.clone()).unwrap_or_default()
}

/// Probability that a UAV in a cluster `v_norm` meters from the BS decodes
/// the broadcast.
#[pyfunction]
#[pyo3(signature = (v_norm, radius_r, h1=10.0, h2=20.0, scenario=None))]
fn coverage_probability(v_norm: f64, radius_r: f64, h1: f64, h2: f64, scenario: Option<&Scenario>) -> PyResult<f64> {
    let geom = ClusterGeometry::new(v_norm, radius_r, h1, h2).map_err(to_py)?;
    analysis::coverage_probability(&geom, &scenario_or_default(scenario).radio).map_err(to_py)
}

/// Probability that a random intra-cluster UAV link succeeds.
#[pyfunction]
#[pyo3(signature = (radius_r, scenario=None))]
fn transmission_success_probability(radius_r: f64, scenario: Option<&Scenario>) -> PyResult<f64> {
    analysis::transmission_success_probability(radius_r, &scenario_or_default(scenario).radio).map_err(to_py)
}

#[pyfunction]
fn request_success_probability(p_cov: f64, p_suc: f64, lambda_off: f64, radius_r: f64) -> PyResult<f64> {
    analysis::request_success_probability(p_cov, p_suc, lambda_off, radius_r).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p_cov, p_suc, packet_len_ms=10.0, t_req_ms=1.0))]
fn average_delay(p_cov: f64, p_suc: f64, packet_len_ms: f64, t_req_ms: f64) -> PyResult<f64> {
    analysis::average_delay(p_cov, p_suc, packet_len_ms, t_req_ms).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p_cov, p_suc, lambda_off, snr_threshold=20.0))]
fn average_ase(p_cov: f64, p_suc: f64, lambda_off: f64, snr_threshold: f64) -> PyResult<f64> {
    analysis::average_ase(p_cov, p_suc, lambda_off, snr_threshold).map_err(to_py)
}

/// All closed-form metrics for a scenario, as a dict.
#[pyfunction]
#[pyo3(signature = (scenario=None))]
fn evaluate_metrics<'py>(py: Python<'py>, scenario: Option<&Scenario>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = scenario_or_default(scenario);
    cfg.validate().map_err(to_py)?;
    let inputs = MetricInputs {
        geom: ClusterGeometry::new(cfg.v_norm, cfg.radius_r, cfg.h1, cfg.h2).map_err(to_py)?,
        radio: cfg.radio,
        lambda_off: cfg.lambda_off,
        packet_len_ms: cfg.sim.packet_len_ms,
        t_req_ms: cfg.sim.t_req_ms,
    };
    let m = analysis::evaluate_metrics(&inputs).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("p_cov", m.p_cov)?;
    out.set_item("p_suc", m.p_suc)?;
    out.set_item("p_req", m.p_req)?;
    out.set_item("delay_aver_ms", m.delay_aver_ms)?;
    out.set_item("ase_aver", m.ase_aver)?;
    Ok(out)
}

/// Density of the BS-to-UAV distance.
#[pyfunction]
#[pyo3(signature = (d1, v_norm, radius_r, h1=10.0, h2=20.0))]
fn pdf_d1(d1: f64, v_norm: f64, radius_r: f64, h1: f64, h2: f64) -> PyResult<f64> {
    let geom = ClusterGeometry::new(v_norm, radius_r, h1, h2).map_err(to_py)?;
    pdf_d1_rs(d1, &geom).map_err(to_py)
}

/// Density of the distance from a UAV `a` off-center to a random peer.
#[pyfunction]
fn pdf_d2(d2: f64, a: f64, radius_r: f64) -> PyResult<f64> {
    pdf_d2_rs(d2, a, radius_r).map_err(to_py)
}

#[pyfunction]
fn pdf_a(a: f64, radius_r: f64) -> f64 {
    pdf_a_rs(a, radius_r)
}

/// `(cluster_id, uav_id, x, y, h)`
type UavRow = (usize, usize, f64, f64, f64);

/// One topology drop as a list of UAV rows.
#[pyfunction]
#[pyo3(signature = (scenario=None, seed=None))]
fn build_topology(scenario: Option<&Scenario>, seed: Option<u64>) -> PyResult<Vec<UavRow>> {
    let cfg = scenario_or_default(scenario);
    cfg.validate().map_err(to_py)?;
    let topo = uav_multicast::build_topology(&cfg, &mut seeded(seed.unwrap_or(cfg.base_seed))).map_err(to_py)?;
    let mut rows = Vec::with_capacity(topo.uav_count());
    let mut id = 0;
    for (c, cluster) in topo.clusters.iter().enumerate() {
        for m in &cluster.members {
            rows.push((c, id, m.planar.x, m.planar.y, m.height));
            id += 1;
        }
    }
    Ok(rows)
}

/// Runs `epochs` packet epochs of one scheme, each on a fresh topology
/// drop, and returns one summary dict per epoch.
#[pyfunction]
#[pyo3(signature = (scheme, scenario=None, epochs=1, seed=None))]
fn simulate<'py>(
    py: Python<'py>,
    scheme: &str,
    scenario: Option<&Scenario>,
    epochs: usize,
    seed: Option<u64>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let scheme: Scheme = scheme.parse().map_err(|e: String| PyValueError::new_err(e))?;
    let cfg = scenario_or_default(scenario);
    cfg.validate().map_err(to_py)?;
    let base = seed.unwrap_or(cfg.base_seed);
    (0..epochs)
        .map(|e| {
            let topo =
                uav_multicast::build_topology(&cfg, &mut seeded(derive_seed(base, &[e as u64, 0]))).map_err(to_py)?;
            let out = uav_multicast::run_scheme(
                scheme,
                &topo,
                &cfg.radio,
                &cfg.sim,
                &mut seeded(derive_seed(base, &[e as u64, 1])),
            )
            .map_err(to_py)?;
            let d = PyDict::new(py);
            d.set_item("scheme", scheme.as_str())?;
            d.set_item("epoch", e)?;
            d.set_item("uavs", out.uav_count())?;
            d.set_item("delivered", out.delivered())?;
            d.set_item("mean_delay_ms", out.mean_delay_ms())?;
            d.set_item("delivery_time_ms", out.delivery_time_ms.clone())?;
            d.set_item("bs_transmissions", out.bs_transmissions)?;
            d.set_item("uav_transmissions", out.uav_transmissions)?;
            d.set_item("control_messages", out.control_messages)?;
            d.set_item("collisions", out.collisions)?;
            d.set_item("end_time_ms", out.end_time_ms)?;
            Ok(d)
        })
        .collect()
}

/// Runs a named study over its default grid and returns the CSV text.
#[pyfunction]
#[pyo3(signature = (name, scenario=None))]
fn run_study(py: Python<'_>, name: &str, scenario: Option<&Scenario>) -> PyResult<String> {
    let kind: StudyKind = name.parse().map_err(|e: String| PyValueError::new_err(e))?;
    let cfg = scenario_or_default(scenario);
    cfg.validate().map_err(to_py)?;
    py.detach(|| run_study_rs(kind, &cfg).and_then(|t| t.to_csv_string())).map_err(to_py)
}

#[pymodule]
fn uavmc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_function(wrap_pyfunction!(coverage_probability, m)?)?;
    m.add_function(wrap_pyfunction!(transmission_success_probability, m)?)?;
    m.add_function(wrap_pyfunction!(request_success_probability, m)?)?;
    m.add_function(wrap_pyfunction!(average_delay, m)?)?;
    m.add_function(wrap_pyfunction!(average_ase, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(pdf_d1, m)?)?;
    m.add_function(wrap_pyfunction!(pdf_d2, m)?)?;
    m.add_function(wrap_pyfunction!(pdf_a, m)?)?;
    m.add_function(wrap_pyfunction!(build_topology, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    Ok(())
}
