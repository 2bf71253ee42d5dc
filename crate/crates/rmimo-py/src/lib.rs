//! Python bindings for the rmimo simulator: pattern evaluation, the power
//! and energy-efficiency model, scheduling and CDF helpers, and a small
//! end-to-end greedy pattern-search demo.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rmimo::channel::{place_dual_pol_ula, ChannelModelParams, ChannelRealization, Ue};
use rmimo::emr_search::{greedy_emr_search, SeObjective, SearchConfig};
use rmimo::harness::experiments;
use rmimo::patterns;
use rmimo::power_ee;
use rmimo::precoding::ArchSpec;

fn err<T>(r: rmimo::Result<T>) -> PyResult<T> {
    r.map_err(|e| PyValueError::new_err(e.to_string()))
}

fn direction(azimuth: f64, elevation: f64) -> PyResult<patterns::Direction> {
    err(patterns::Direction::new(azimuth, elevation))
}

fn arch(name: &str) -> PyResult<power_ee::Architecture> {
    err(name.parse())
}

/// A single radiation pattern.
#[pyclass(name = "PatternSpec", frozen)]
struct PyPatternSpec {
    inner: patterns::PatternSpec,
}

#[pymethods]
impl PyPatternSpec {
    /// Raised-cosine lobe peaking at `peak_azimuth` (radians).
    #[staticmethod]
    #[pyo3(signature = (peak_azimuth, sharpness=4.0, floor_gain=0.01, max_gain=1.0))]
    fn lobe(peak_azimuth: f64, sharpness: f64, floor_gain: f64, max_gain: f64) -> PyResult<Self> {
        Ok(Self {
            inner: err(patterns::PatternSpec::lobe(
                peak_azimuth,
                sharpness,
                floor_gain,
                max_gain,
            ))?,
        })
    }

    /// Hertz dipole along `axis` (3-vector, normalized internally).
    #[staticmethod]
    #[pyo3(signature = (axis, max_gain=1.5))]
    fn hertz_dipole(axis: [f64; 3], max_gain: f64) -> PyResult<Self> {
        Ok(Self {
            inner: err(patterns::PatternSpec::hertz_dipole(axis, max_gain))?,
        })
    }

    /// Linear power gain toward (azimuth, elevation) in radians.
    fn gain(&self, azimuth: f64, elevation: f64) -> PyResult<f64> {
        Ok(self.inner.gain(&direction(azimuth, elevation)?))
    }

    #[getter]
    fn max_gain(&self) -> f64 {
        self.inner.max_gain
    }

    #[getter]
    fn floor_gain(&self) -> f64 {
        self.inner.floor_gain
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// An ordered set of selectable patterns with a legacy member.
#[pyclass(name = "PatternSet", frozen)]
struct PyPatternSet {
    inner: patterns::PatternSet,
}

#[pymethods]
impl PyPatternSet {
    #[getter]
    fn cardinality(&self) -> usize {
        self.inner.cardinality()
    }

    #[getter]
    fn legacy_index(&self) -> usize {
        self.inner.legacy_index()
    }

    /// Gain of set member `index` toward (azimuth, elevation) in radians.
    fn gain(&self, index: usize, azimuth: f64, elevation: f64) -> PyResult<f64> {
        if index >= self.inner.cardinality() {
            return Err(PyValueError::new_err(format!(
                "pattern index {index} out of range"
            )));
        }
        Ok(self.inner.get(index).gain(&direction(azimuth, elevation)?))
    }

    fn pattern(&self, index: usize) -> PyResult<PyPatternSpec> {
        if index >= self.inner.cardinality() {
            return Err(PyValueError::new_err(format!(
                "pattern index {index} out of range"
            )));
        }
        Ok(PyPatternSpec {
            inner: self.inner.get(index).clone(),
        })
    }
}

/// The built-in four-pattern reconfigurable set (normal, +30, split +-56, -30).
#[pyfunction]
fn make_type_set() -> PyPatternSet {
    PyPatternSet {
        inner: patterns::make_type_set(),
    }
}

/// Dipole oriented so its main lobe points at (azimuth, elevation).
#[pyfunction]
fn rotated_dipole(azimuth: f64, elevation: f64) -> PyResult<PyPatternSpec> {
    Ok(PyPatternSpec {
        inner: patterns::rotate_dipole(&direction(azimuth, elevation)?),
    })
}

/// Precoder power consumption in milliwatts for "fda_t", "sca_t", or "sca_r".
#[pyfunction]
fn precoder_power(architecture: &str, n_t: usize, m_t: usize) -> PyResult<f64> {
    err(power_ee::precoder_power(
        arch(architecture)?,
        n_t,
        m_t,
        &power_ee::PowerModel::default(),
    ))
}

/// (se, total_power_w, ee) under the default power model.
#[pyfunction]
fn energy_efficiency(se: f64, architecture: &str, n_t: usize, m_t: usize) -> PyResult<(f64, f64, f64)> {
    let rec = err(power_ee::energy_efficiency(
        se,
        arch(architecture)?,
        n_t,
        m_t,
        &power_ee::PowerModel::default(),
    ))?;
    Ok((rec.se, rec.total_power_w, rec.ee))
}

/// Users served in the given TTI under round-robin scheduling.
#[pyfunction]
fn round_robin_schedule(pool_size: usize, users: usize, tti: usize) -> PyResult<Vec<usize>> {
    err(experiments::round_robin_schedule(pool_size, users, tti))
}

/// Empirical CDF of the samples as (value, cumulative probability) pairs.
#[pyfunction]
fn aggregate_cdf(samples: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
    err(experiments::aggregate_cdf(&samples))
}

/// Linear power attenuation of the urban-macro path-loss law at 3 GHz.
#[pyfunction]
#[pyo3(signature = (distance_m, indoor=false))]
fn path_loss(distance_m: f64, indoor: bool) -> PyResult<f64> {
    err(rmimo::channel::path_loss(
        distance_m,
        indoor,
        &ChannelModelParams::default(),
    ))
}

/// End-to-end demo on a small deterministic scenario: greedy per-antenna
/// pattern selection on a clustered channel, compared against the all-legacy
/// baseline. Returns a dict with the legacy SE, the searched SE, the
/// per-sweep SE trace, the evaluation count, and the pattern histogram.
#[pyfunction]
#[pyo3(signature = (seed=7, users=2))]
fn greedy_search_demo(py: Python<'_>, seed: u64, users: usize) -> PyResult<Py<PyDict>> {
    let params = ChannelModelParams {
        n_subcarriers: 4,
        n_clusters: 8,
        ..Default::default()
    };
    let set = patterns::make_type_set();
    let geom = err(place_dual_pol_ula(
        4,
        params.wavelength() / 2.0,
        4,
        params.wavelength(),
    ))?;
    let ues = vec![
        Ue { position: [110.0, 35.0, 0.0], indoor: false },
        Ue { position: [80.0, -60.0, 0.0], indoor: false },
        Ue { position: [190.0, 10.0, 0.0], indoor: true },
        Ue { position: [60.0, 95.0, 0.0], indoor: false },
    ];
    if users == 0 || users > ues.len() {
        return Err(PyValueError::new_err(format!(
            "users must be in 1..={}, got {users}",
            ues.len()
        )));
    }
    let chan = err(ChannelRealization::generate(&params, &geom, &set, &ues, seed))?;
    let scheduled: Vec<usize> = (0..users).collect();
    let obj = SeObjective {
        channel: &chan,
        scheduled: &scheduled,
        set: &set,
        arch: ArchSpec::SubConnected { phase_bits: Some(4) },
        geom: &geom,
        total_power: 0.05,
    };
    let legacy = err(obj.evaluate(&rmimo::channel::PatternAssignment::uniform(
        geom.n_elements(),
        set.legacy_index(),
    )))?;
    let result = err(greedy_emr_search(&obj, &SearchConfig::default()))?;

    let mut histogram = vec![0usize; set.cardinality()];
    for &p in result.assignment.indices() {
        histogram[p] += 1;
    }
    let out = PyDict::new(py);
    out.set_item("se_legacy", legacy)?;
    out.set_item("se_greedy", result.se)?;
    out.set_item("evaluations", result.evaluations)?;
    out.set_item("trace", result.iteration_trace)?;
    out.set_item("pattern_histogram", histogram)?;
    out.set_item("assignment", result.assignment.indices().to_vec())?;
    Ok(out.into())
}

#[pymodule]
fn rmimo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPatternSpec>()?;
    m.add_class::<PyPatternSet>()?;
    m.add_function(wrap_pyfunction!(make_type_set, m)?)?;
    m.add_function(wrap_pyfunction!(rotated_dipole, m)?)?;
    m.add_function(wrap_pyfunction!(precoder_power, m)?)?;
    m.add_function(wrap_pyfunction!(energy_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(round_robin_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(path_loss, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_search_demo, m)?)?;
    m.add("__version__", rmimo::VERSION)?;
    Ok(())
}
