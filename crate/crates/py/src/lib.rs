//! Python bindings. Configurations and specs cross the boundary as JSON
//! strings with the same schema as the CLI's spec files.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hybridlab_core::circuit::{self, CircuitConfig};
use hybridlab_core::clifford::{clifford2_table, CliffordIndex};
use hybridlab_core::harness::{self, Control, ExperimentSpec};
use hybridlab_core::observables;
use hybridlab_core::scaling::{self, CollapseOptions};
use hybridlab_core::stabilizer::StabilizerState;
use hybridlab_core::statmech;
use hybridlab_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Csv(_) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn config_from_json(text: &str) -> PyResult<CircuitConfig> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("config: {e}")))
}

/// Mixed stabilizer state with its own measurement RNG.
#[pyclass(name = "StabilizerState")]
struct PyState {
    state: StabilizerState,
    rng: ChaCha8Rng,
}

#[pymethods]
impl PyState {
    /// `|0…0⟩` on `n` sites, or the maximally mixed state with `mixed=True`.
    #[new]
    #[pyo3(signature = (n, seed=0, mixed=false))]
    fn new(n: usize, seed: u64, mixed: bool) -> Self {
        let state = if mixed {
            StabilizerState::maximally_mixed(n)
        } else {
            StabilizerState::zero_state(n)
        };
        Self {
            state,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[getter]
    fn num_sites(&self) -> usize {
        self.state.num_sites()
    }

    #[getter]
    fn num_generators(&self) -> usize {
        self.state.num_generators()
    }

    /// Applies two-qubit Clifford number `gate` (0..11520) to sites `a`, `b`.
    fn apply_gate(&mut self, gate: usize, a: usize, b: usize) -> PyResult<()> {
        let g = CliffordIndex::new(gate).map_err(py_err)?;
        self.state.apply_clifford2(&clifford2_table()[g.get()], a, b).map_err(py_err)
    }

    /// Z measurement; returns `(outcome, random)`.
    fn measure(&mut self, site: usize) -> PyResult<(bool, bool)> {
        let m = self.state.measure_z(site, &mut self.rng).map_err(py_err)?;
        Ok((m.outcome, m.kind != hybridlab_core::stabilizer::MeasurementKind::Deterministic))
    }

    fn reset(&mut self, site: usize) -> PyResult<()> {
        self.state.reset(site).map_err(py_err)
    }

    fn entropy(&self, region: Vec<usize>) -> PyResult<usize> {
        observables::entropy(&self.state, &region).map_err(py_err)
    }

    fn mutual_information(&self, a: Vec<usize>, b: Vec<usize>) -> PyResult<usize> {
        observables::mutual_information(&self.state, &a, &b).map_err(py_err)
    }

    /// Log negativity between `b` and the rest of the state.
    fn log_negativity(&self, b: Vec<usize>) -> PyResult<usize> {
        observables::log_negativity(&self.state, &b).map_err(py_err)
    }
}

/// Final observable values of one trajectory.
#[pyfunction]
fn run_trajectory(config_json: &str, index: u64) -> PyResult<BTreeMap<String, f64>> {
    let config = config_from_json(config_json)?;
    let rec = circuit::run_trajectory(&config, index).map_err(py_err)?;
    Ok(rec.finals.iter().map(|s| (s.kind.name().to_string(), s.value)).collect())
}

/// Runs every point of an experiment spec; returns the result CSV text.
#[pyfunction]
fn run_experiment(py: Python<'_>, spec_json: &str) -> PyResult<String> {
    let spec = ExperimentSpec::from_json(spec_json).map_err(py_err)?;
    let result = py
        .detach(|| harness::run_experiment(&spec, |_, _, _| {}))
        .map_err(py_err)?;
    let mut buf = Vec::new();
    harness::write_csv(&result.rows(), &mut buf).map_err(py_err)?;
    Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
}

#[pyfunction]
fn spec_hash(spec_json: &str) -> PyResult<String> {
    Ok(ExperimentSpec::from_json(spec_json).map_err(py_err)?.hash())
}

/// Data collapse of one observable in result CSV text; returns `p_c`, `nu`
/// and `quality`.
#[pyfunction]
#[pyo3(signature = (csv_text, observable, power=0.0, fix_nu=None, control="p"))]
fn collapse(csv_text: &str, observable: &str, power: f64, fix_nu: Option<f64>, control: &str) -> PyResult<BTreeMap<String, f64>> {
    let control = match control {
        "p" => Control::P,
        "p_m" => Control::PM,
        other => return Err(PyValueError::new_err(format!("control must be 'p' or 'p_m', got {other:?}"))),
    };
    let rows = harness::read_rows(csv_text.as_bytes()).map_err(py_err)?;
    let table = harness::sweep_table(&rows, observable, control).map_err(py_err)?;
    let opts = CollapseOptions {
        rescale_power: power,
        fix_nu,
        ..CollapseOptions::default()
    };
    let fit = scaling::collapse_fit_with(&table, &opts).map_err(py_err)?;
    Ok(BTreeMap::from([
        ("p_c".to_string(), fit.p_c),
        ("nu".to_string(), fit.nu),
        ("quality".to_string(), fit.quality),
    ]))
}

/// Mean-noise free-energy comparison; returns the dominant configuration
/// (`"all_C"` or `"wall"`) and both free energies.
#[pyfunction]
#[pyo3(signature = (config_json, s0=1.0, kpz=0.0))]
fn free_energy_compare(config_json: &str, s0: f64, kpz: f64) -> PyResult<(String, f64, f64)> {
    let config = config_from_json(config_json)?;
    let p = statmech::expected_free_energy_compare(&config, s0, kpz).map_err(py_err)?;
    Ok((p.dominant.to_string(), p.free_energy_all_c, p.free_energy_wall))
}

#[pymodule]
fn hybridlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(run_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(spec_hash, m)?)?;
    m.add_function(wrap_pyfunction!(collapse, m)?)?;
    m.add_function(wrap_pyfunction!(free_energy_compare, m)?)?;
    Ok(())
}
