//! Experiment specifications, sweep execution and flat-file results.
//!
//! A spec is a base [`CircuitConfig`] plus sweep axes. Every point of the
//! cross product gets its own seed derived from the master seed and the
//! point's parameters, and its trajectories run in parallel on the current
//! rayon pool. Results are merged in trajectory-index order, so the output
//! does not depend on the number of workers.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{run_paired_trajectory, run_trajectory, CircuitConfig, ObservableKind};
use crate::error::{Error, Result};
use crate::scaling::{mean_and_stderr, DynamicsCurve, DynamicsPoint, SweepRow, SweepTable};
use crate::xeb::PairSummary;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Names of the paired-run observables.
pub const XEB: &str = "XEB";
pub const FIDELITY: &str = "F";
pub const FIDELITY_OVER_XEB: &str = "F_over_XEB";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Independent hybrid trajectories.
    #[default]
    Trajectories,
    /// Noiseless/noisy pairs sharing gates, reporting XEB and fidelity.
    Paired,
}

/// Lists of values to sweep. Empty axes keep the base configuration's value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(rename = "L", default)]
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default)]
    pub p_m: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    /// Depth as a multiple of `L`.
    #[serde(rename = "T_over_L", default)]
    pub depth_ratio: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub mode: Mode,
    pub base: CircuitConfig,
    #[serde(default)]
    pub sweep: SweepAxes,
    /// Scrambling depth as a multiple of `T` (overrides `base.T_scr`).
    #[serde(rename = "T_scr_over_T", default, skip_serializing_if = "Option::is_none")]
    pub scramble_over_depth: Option<f64>,
    /// Scrambling depth as a multiple of `L` (overrides `base.T_scr`).
    #[serde(rename = "T_scr_over_L", default, skip_serializing_if = "Option::is_none")]
    pub scramble_over_size: Option<f64>,
    /// Output CSV of final-state rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Output CSV of time series (needs `base.sample_every`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics_output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON. Output
    /// paths and the worker count do not change results and are left out.
    pub fn hash(&self) -> String {
        let mut physics = self.clone();
        physics.output = None;
        physics.dynamics_output = None;
        physics.workers = None;
        let canonical = serde_json::to_string(&physics).expect("spec serializes");
        Sha256::digest(canonical.as_bytes())[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Every sweep point as a validated configuration with its own seed.
    pub fn points(&self) -> Result<Vec<CircuitConfig>> {
        let base = &self.base;
        let or = |axis: &[f64], v: f64| if axis.is_empty() { vec![v] } else { axis.to_vec() };
        let sizes = if self.sweep.sizes.is_empty() {
            vec![base.system_size]
        } else {
            self.sweep.sizes.clone()
        };
        let mut out = Vec::new();
        for &l in &sizes {
            let depths: Vec<Option<usize>> = if self.sweep.depth_ratio.is_empty() {
                vec![base.depth]
            } else {
                self.sweep
                    .depth_ratio
                    .iter()
                    .map(|r| Some(((r * l as f64).round() as usize).max(1)))
                    .collect()
            };
            for depth in depths {
                for &p_m in &or(&self.sweep.p_m, base.p_m) {
                    for &alpha in &or(&self.sweep.alpha, base.alpha) {
                        for &p in &or(&self.sweep.p, base.p) {
                            let mut c = base.clone();
                            c.system_size = l;
                            c.depth = depth;
                            c.p_m = p_m;
                            c.alpha = alpha;
                            c.p = p;
                            let t = c.depth();
                            if let Some(r) = self.scramble_over_depth {
                                c.scramble_depth = (r * t as f64).round() as usize;
                            }
                            if let Some(r) = self.scramble_over_size {
                                c.scramble_depth = (r * l as f64).round() as usize;
                            }
                            c.seed = point_seed(base.seed, &c);
                            out.push(c.validate()?);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one sweep point: the master seed mixed with a digest of
/// `(L, T, T_scr, p_m, p, alpha)`.
pub fn point_seed(master: u64, c: &CircuitConfig) -> u64 {
    let key = format!(
        "{}|{}|{}|{:e}|{:e}|{:e}",
        c.system_size,
        c.depth(),
        c.scramble_depth,
        c.p_m,
        c.p,
        c.alpha
    );
    let d = Sha256::digest(key.as_bytes());
    let h = u64::from_le_bytes(d[..8].try_into().expect("8 bytes"));
    splitmix64(master ^ h)
}

/// One row of the final-state CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub spec_hash: String,
    #[serde(rename = "L")]
    pub system_size: usize,
    #[serde(rename = "T")]
    pub depth: usize,
    #[serde(rename = "T_scr")]
    pub scramble_depth: usize,
    pub p_m: f64,
    pub p: f64,
    pub alpha: f64,
    pub observable: String,
    pub mean: f64,
    pub stderr: f64,
    pub n_traj: usize,
}

/// One row of the time-series CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsRow {
    pub spec_hash: String,
    #[serde(rename = "L")]
    pub system_size: usize,
    #[serde(rename = "T")]
    pub depth: usize,
    #[serde(rename = "T_scr")]
    pub scramble_depth: usize,
    pub p_m: f64,
    pub p: f64,
    pub alpha: f64,
    pub observable: String,
    pub t: usize,
    pub mean: f64,
    pub stderr: f64,
    pub n_traj: usize,
}

/// Per-trajectory final values and aggregated rows of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub config: CircuitConfig,
    /// Final values per observable name, in trajectory order.
    pub samples: BTreeMap<String, Vec<f64>>,
    pub rows: Vec<ResultRow>,
    pub dynamics: Vec<DynamicsRow>,
    pub wall_clock_seconds: f64,
}

impl PointResult {
    pub fn mean(&self, observable: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.observable == observable).map(|r| r.mean)
    }

    pub fn row(&self, observable: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.observable == observable)
    }
}

fn result_row(hash: &str, c: &CircuitConfig, observable: &str, mean: f64, stderr: f64, n: usize) -> ResultRow {
    ResultRow {
        spec_hash: hash.to_string(),
        system_size: c.system_size,
        depth: c.depth(),
        scramble_depth: c.scramble_depth,
        p_m: c.p_m,
        p: c.p,
        alpha: c.alpha,
        observable: observable.to_string(),
        mean,
        stderr,
        n_traj: n,
    }
}

/// `mean(F) / mean(XEB)` with a delta-method standard error.
fn ratio_of_means(f: &[f64], x: &[f64]) -> (f64, f64) {
    let n = f.len() as f64;
    let (mf, sf) = mean_and_stderr(f);
    let (mx, sx) = mean_and_stderr(x);
    let r = mf / mx;
    let cov = if f.len() > 1 {
        f.iter().zip(x).map(|(a, b)| (a - mf) * (b - mx)).sum::<f64>() / ((n - 1.0) * n)
    } else {
        0.0
    };
    let var = (sf * sf + r * r * sx * sx - 2.0 * r * cov) / (mx * mx);
    (r, var.max(0.0).sqrt())
}

/// Runs all trajectories of one (validated) configuration.
pub fn run_point(spec_hash: &str, config: &CircuitConfig, mode: Mode) -> Result<PointResult> {
    let config = config.validate()?;
    let start = Instant::now();
    let n = config.trajectories;
    let mut samples: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut rows = Vec::new();
    let mut dynamics = Vec::new();
    match mode {
        Mode::Trajectories => {
            let records = (0..n as u64)
                .into_par_iter()
                .map(|i| run_trajectory(&config, i))
                .collect::<Result<Vec<_>>>()?;
            for kind in config.observables() {
                let values: Vec<f64> = records
                    .iter()
                    .map(|r| r.final_value(kind).expect("observable recorded"))
                    .collect();
                let (mean, se) = mean_and_stderr(&values);
                rows.push(result_row(spec_hash, &config, kind.name(), mean, se, n));
                samples.insert(kind.name().to_string(), values);
                if config.sample_every.is_some() {
                    let mut by_time: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
                    for r in &records {
                        for (t, v) in r.series(kind) {
                            by_time.entry(t).or_default().push(v);
                        }
                    }
                    for (t, values) in by_time {
                        let (mean, se) = mean_and_stderr(&values);
                        dynamics.push(DynamicsRow {
                            spec_hash: spec_hash.to_string(),
                            system_size: config.system_size,
                            depth: config.depth(),
                            scramble_depth: config.scramble_depth,
                            p_m: config.p_m,
                            p: config.p,
                            alpha: config.alpha,
                            observable: kind.name().to_string(),
                            t,
                            mean,
                            stderr: se,
                            n_traj: values.len(),
                        });
                    }
                }
            }
        }
        Mode::Paired => {
            let pairs = (0..n as u64)
                .into_par_iter()
                .map(|i| {
                    let (pure, noisy) = run_paired_trajectory(&config, i)?;
                    PairSummary::compute(&pure.final_state, &noisy.final_state)
                })
                .collect::<Result<Vec<_>>>()?;
            let xs: Vec<f64> = pairs.iter().map(|s| s.xeb).collect();
            let fs: Vec<f64> = pairs.iter().map(|s| s.fidelity).collect();
            let (mx, sx) = mean_and_stderr(&xs);
            let (mf, sf) = mean_and_stderr(&fs);
            let (r, sr) = ratio_of_means(&fs, &xs);
            rows.push(result_row(spec_hash, &config, XEB, mx, sx, n));
            rows.push(result_row(spec_hash, &config, FIDELITY, mf, sf, n));
            rows.push(result_row(spec_hash, &config, FIDELITY_OVER_XEB, r, sr, n));
            samples.insert(XEB.to_string(), xs);
            samples.insert(FIDELITY.to_string(), fs);
        }
    }
    Ok(PointResult {
        config,
        samples,
        rows,
        dynamics,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Summary of a completed run, written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: ExperimentSpec,
    pub spec_hash: String,
    pub code_version: String,
    pub seed: u64,
    pub points: usize,
    pub total_trajectories: usize,
    pub workers: usize,
    pub point_wall_clock_seconds: Vec<f64>,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub points: Vec<PointResult>,
    pub manifest: Manifest,
}

impl ExperimentResult {
    pub fn rows(&self) -> Vec<ResultRow> {
        self.points.iter().flat_map(|p| p.rows.iter().cloned()).collect()
    }

    pub fn dynamics(&self) -> Vec<DynamicsRow> {
        self.points.iter().flat_map(|p| p.dynamics.iter().cloned()).collect()
    }
}

/// Runs every sweep point in order; `progress` is called after each.
pub fn run_experiment(spec: &ExperimentSpec, mut progress: impl FnMut(usize, usize, &PointResult)) -> Result<ExperimentResult> {
    let start = Instant::now();
    let hash = spec.hash();
    let configs = spec.points()?;
    log::info!("spec {hash}: {} sweep points", configs.len());
    let mut points = Vec::with_capacity(configs.len());
    for (i, c) in configs.iter().enumerate() {
        let r = run_point(&hash, c, spec.mode)?;
        progress(i + 1, configs.len(), &r);
        points.push(r);
    }
    let manifest = Manifest {
        spec: spec.clone(),
        spec_hash: hash,
        code_version: CODE_VERSION.to_string(),
        seed: spec.base.seed,
        points: points.len(),
        total_trajectories: configs.iter().map(|c| c.trajectories).sum(),
        workers: rayon::current_num_threads(),
        point_wall_clock_seconds: points.iter().map(|p| p.wall_clock_seconds).collect(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(ExperimentResult { points, manifest })
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(Error::from)
}

pub fn read_dynamics<R: Read>(reader: R) -> Result<Vec<DynamicsRow>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(Error::from)
}

/// Which column plays the role of the control parameter in a sweep table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    #[default]
    P,
    PM,
}

/// Sweep table of one observable, with `p` or `p_m` as control.
pub fn sweep_table(rows: &[ResultRow], observable: &str, control: Control) -> Result<SweepTable> {
    SweepTable::new(
        rows.iter()
            .filter(|r| r.observable == observable)
            .map(|r| {
                let x = match control {
                    Control::P => r.p,
                    Control::PM => r.p_m,
                };
                SweepRow::new(r.system_size, x, r.mean, r.stderr, r.n_traj)
            })
            .collect(),
    )
}

/// Same as [`sweep_table`] but keeps per-trajectory samples for bootstrapping.
pub fn sweep_table_from_points(points: &[PointResult], observable: &str, control: Control) -> Result<SweepTable> {
    SweepTable::new(
        points
            .iter()
            .filter_map(|pt| {
                let values = pt.samples.get(observable)?;
                let x = match control {
                    Control::P => pt.config.p,
                    Control::PM => pt.config.p_m,
                };
                let mut row = SweepRow::from_samples(pt.config.system_size, x, values.clone());
                if observable == FIDELITY_OVER_XEB {
                    let r = pt.row(observable)?;
                    row = SweepRow::new(pt.config.system_size, x, r.mean, r.stderr, r.n_traj);
                }
                Some(row)
            })
            .collect(),
    )
}

/// Groups time-series rows of one observable into curves keyed by `(L, p)`.
pub fn dynamics_curves(rows: &[DynamicsRow], observable: &str) -> Vec<DynamicsCurve> {
    let mut curves: Vec<DynamicsCurve> = Vec::new();
    for r in rows.iter().filter(|r| r.observable == observable) {
        let point = DynamicsPoint {
            t: r.t as f64,
            mean: r.mean,
            stderr: r.stderr,
        };
        match curves.iter_mut().find(|c| c.size == r.system_size && c.p == r.p) {
            Some(c) => c.points.push(point),
            None => curves.push(DynamicsCurve {
                size: r.system_size,
                p: r.p,
                points: vec![point],
            }),
        }
    }
    for c in &mut curves {
        c.points.sort_by(|a, b| a.t.total_cmp(&b.t));
    }
    curves
}

/// Observable names accepted in CSV files.
pub fn is_known_observable(name: &str) -> bool {
    ObservableKind::parse(name).is_some() || [XEB, FIDELITY, FIDELITY_OVER_XEB].contains(&name)
}
