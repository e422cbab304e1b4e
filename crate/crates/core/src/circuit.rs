//! Hybrid brick-wall circuits: random Clifford layers interleaved with
//! probabilistic Z measurements and reset noise, optional Bell-pair encoding
//! with a reference qubit, and paired noiseless/noisy runs.
//!
//! Randomness comes from one ChaCha8 stream per trajectory, keyed by the
//! configuration seed and the trajectory index. Within a hybrid layer draws
//! happen in a fixed order: one gate index per bond (first sublayer, then
//! second), one measurement coin per site, one noise coin per candidate site,
//! and finally any measurement outcome coins, in site order, as the
//! measurements are applied.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{clifford2_table, sample_uniform_clifford2, CliffordIndex, TwoQubitClifford};
use crate::error::{Error, Result};
use crate::observables::{entropy, info_retention, log_negativity, mutual_information, Region};
use crate::stabilizer::{MeasurementKind, StabilizerState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoisePlacement {
    #[default]
    Bulk,
    LeftBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    #[default]
    None,
    InitialBell,
    SteadyStateBell,
}

/// Observables recorded along a trajectory. Regions are the left and right
/// halves of the system; the reference qubit, when present, is excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObservableKind {
    #[serde(rename = "S_AB")]
    EntropyAB,
    #[serde(rename = "I_AB")]
    MutualInfoAB,
    #[serde(rename = "E_N")]
    Negativity,
    #[serde(rename = "I_ABR")]
    InfoRetention,
}

impl ObservableKind {
    pub fn name(self) -> &'static str {
        match self {
            ObservableKind::EntropyAB => "S_AB",
            ObservableKind::MutualInfoAB => "I_AB",
            ObservableKind::Negativity => "E_N",
            ObservableKind::InfoRetention => "I_ABR",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "S_AB" => Some(ObservableKind::EntropyAB),
            "I_AB" => Some(ObservableKind::MutualInfoAB),
            "E_N" => Some(ObservableKind::Negativity),
            "I_ABR" => Some(ObservableKind::InfoRetention),
            _ => None,
        }
    }
}

fn default_alpha() -> f64 {
    1.0
}

fn default_trajectories() -> usize {
    1
}

/// Every parameter of one circuit ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    /// System size `L` (even).
    #[serde(rename = "L")]
    pub system_size: usize,
    /// Hybrid depth `T`; defaults to `4L`.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// Unitary-only scrambling depth applied right after encoding.
    #[serde(rename = "T_scr", default)]
    pub scramble_depth: usize,
    /// Measurement probability per site per layer.
    #[serde(default)]
    pub p_m: f64,
    /// Noise prefactor; the per-site, per-layer reset probability is `p / L^alpha`.
    #[serde(default)]
    pub p: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub noise_placement: NoisePlacement,
    #[serde(default)]
    pub encoding: Encoding,
    #[serde(default)]
    pub encode_site: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    /// Record observables every `sample_every` layers; final state only when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
    /// Observables to record; empty means the defaults for the encoding mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observables: Vec<ObservableKind>,
}

impl CircuitConfig {
    pub fn new(system_size: usize) -> Self {
        Self {
            system_size,
            depth: None,
            scramble_depth: 0,
            p_m: 0.0,
            p: 0.0,
            alpha: 1.0,
            boundary: Boundary::Periodic,
            noise_placement: NoisePlacement::Bulk,
            encoding: Encoding::None,
            encode_site: 0,
            seed: 0,
            trajectories: 1,
            sample_every: None,
            observables: Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth.unwrap_or(4 * self.system_size)
    }

    /// Per-site, per-layer noise probability `q = p / L^alpha`.
    pub fn noise_probability(&self) -> f64 {
        self.p / (self.system_size as f64).powf(self.alpha)
    }

    pub fn has_reference(&self) -> bool {
        self.encoding != Encoding::None
    }

    /// Index of the reference qubit, stored after the system sites.
    pub fn reference_site(&self) -> Option<usize> {
        self.has_reference().then_some(self.system_size)
    }

    pub fn observables(&self) -> Vec<ObservableKind> {
        if !self.observables.is_empty() {
            return self.observables.clone();
        }
        let mut v = vec![
            ObservableKind::EntropyAB,
            ObservableKind::MutualInfoAB,
            ObservableKind::Negativity,
        ];
        if self.has_reference() {
            v.push(ObservableKind::InfoRetention);
        }
        v
    }

    /// Checks the configuration and returns a normalized copy: `T` filled in
    /// and open boundaries forced for left-boundary noise.
    pub fn validate(&self) -> Result<CircuitConfig> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let l = self.system_size;
        if l < 2 || l % 2 == 1 {
            return bad(format!("L must be even and at least 2, got {l}"));
        }
        if !(0.0..=1.0).contains(&self.p_m) {
            return bad(format!("p_m = {} outside [0, 1]", self.p_m));
        }
        if !(self.p >= 0.0) || !self.alpha.is_finite() {
            return bad(format!("invalid noise parameters p = {}, alpha = {}", self.p, self.alpha));
        }
        let q = self.noise_probability();
        if q > 1.0 + 1e-12 {
            return bad(format!(
                "noise probability q = p / L^alpha = {q} exceeds 1 (p = {}, L = {l}, alpha = {})",
                self.p, self.alpha
            ));
        }
        if self.encode_site >= l {
            return bad(format!("encode_site {} out of range for L = {l}", self.encode_site));
        }
        if self.scramble_depth > 0 && self.encoding == Encoding::None {
            return bad("T_scr requires an encoding mode".into());
        }
        if self.trajectories == 0 {
            return bad("trajectories must be positive".into());
        }
        if self.sample_every == Some(0) {
            return bad("sample_every must be positive".into());
        }
        if self.observables.contains(&ObservableKind::InfoRetention) && !self.has_reference() {
            return bad("I_ABR needs an encoding mode".into());
        }
        let mut out = self.clone();
        out.depth = Some(self.depth());
        if self.noise_placement == NoisePlacement::LeftBoundary {
            out.boundary = Boundary::Open;
        }
        Ok(out)
    }
}

/// The random stream of trajectory `index` under master seed `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Which part of the pipeline an event belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Scramble,
    Equilibrate,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Gate { a: usize, b: usize, gate: CliffordIndex },
    Measure { site: usize, outcome: bool, random: bool },
    Reset { site: usize },
    Encode { site: usize, reference: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub stage: Stage,
    pub layer: usize,
    pub kind: EventKind,
}

/// Gate pairs of one brick-wall layer: bonds `(2i+1, 2i+2)` then
/// `(2i+2, 2i+3)` mod `L`. Under open boundaries the wrapping bond is dropped.
pub fn brickwall_pairs(system_size: usize, boundary: Boundary) -> [Vec<(usize, usize)>; 2] {
    let l = system_size;
    let sub = |offset: usize| {
        (0..l / 2)
            .map(|i| ((2 * i + offset) % l, (2 * i + offset + 1) % l))
            .filter(|&(a, b)| boundary == Boundary::Periodic || a < b)
            .collect::<Vec<_>>()
    };
    [sub(1), sub(2)]
}

struct Recorder<'a> {
    events: Option<&'a mut Vec<Event>>,
    stage: Stage,
    layer: usize,
}

impl Recorder<'_> {
    fn push(&mut self, kind: EventKind) {
        if let Some(ev) = self.events.as_deref_mut() {
            ev.push(Event {
                stage: self.stage,
                layer: self.layer,
                kind,
            });
        }
    }
}

fn brickwall_layer<R: Rng + ?Sized>(
    state: &mut StabilizerState,
    pairs: &[Vec<(usize, usize)>; 2],
    rng: &mut R,
    rec: &mut Recorder<'_>,
) -> Result<()> {
    let table = clifford2_table();
    for sub in pairs {
        for &(a, b) in sub {
            let g = sample_uniform_clifford2(rng);
            state.apply_clifford2(&table[g.get()], a, b)?;
            rec.push(EventKind::Gate { a, b, gate: g });
        }
    }
    Ok(())
}

/// One layer of random two-qubit Cliffords in brick-wall order.
pub fn apply_brickwall_layer<R: Rng + ?Sized>(
    state: &mut StabilizerState,
    layer: usize,
    config: &CircuitConfig,
    rng: &mut R,
) -> Result<Vec<Event>> {
    let pairs = brickwall_pairs(config.system_size, config.validate()?.boundary);
    let mut events = Vec::new();
    let mut rec = Recorder {
        events: Some(&mut events),
        stage: Stage::Hybrid,
        layer,
    };
    brickwall_layer(state, &pairs, rng, &mut rec)?;
    Ok(events)
}

/// Draws the measurement and noise locations of one layer.
fn draw_locations<R: Rng + ?Sized>(config: &CircuitConfig, q: f64, rng: &mut R) -> (Vec<bool>, Vec<bool>) {
    let l = config.system_size;
    let measure: Vec<bool> = (0..l).map(|_| rng.random::<f64>() < config.p_m).collect();
    let noise = match config.noise_placement {
        NoisePlacement::Bulk => (0..l).map(|_| rng.random::<f64>() < q).collect(),
        NoisePlacement::LeftBoundary => {
            let mut v = vec![false; l];
            v[0] = rng.random::<f64>() < q;
            v
        }
    };
    (measure, noise)
}

fn measurement_and_noise<R: Rng + ?Sized>(
    state: &mut StabilizerState,
    config: &CircuitConfig,
    q: f64,
    rng: &mut R,
    rec: &mut Recorder<'_>,
) -> Result<()> {
    let (measure, noise) = draw_locations(config, q, rng);
    for site in 0..config.system_size {
        if measure[site] {
            let m = state.measure_z_with(site, || rng.random::<bool>())?;
            rec.push(EventKind::Measure {
                site,
                outcome: m.outcome,
                random: m.kind != MeasurementKind::Deterministic,
            });
        }
        if noise[site] {
            state.reset(site)?;
            rec.push(EventKind::Reset { site });
        }
    }
    Ok(())
}

/// Measurements (probability `p_m`) and resets (probability `q`) on every
/// site; at a site hit by both, the measurement comes first.
pub fn apply_noise_and_measurement_layer<R: Rng + ?Sized>(
    state: &mut StabilizerState,
    layer: usize,
    config: &CircuitConfig,
    rng: &mut R,
) -> Result<Vec<Event>> {
    let config = config.validate()?;
    let mut events = Vec::new();
    let mut rec = Recorder {
        events: Some(&mut events),
        stage: Stage::Hybrid,
        layer,
    };
    measurement_and_noise(state, &config, config.noise_probability(), rng, &mut rec)?;
    Ok(events)
}

/// Resets `encode_site` and `reference_site` and prepares them in `|Φ⁺⟩`.
pub fn encode_bell(state: &mut StabilizerState, encode_site: usize, reference_site: usize) -> Result<()> {
    state.reset(encode_site)?;
    state.reset(reference_site)?;
    state.apply_clifford2(&TwoQubitClifford::hadamard_first(), encode_site, reference_site)?;
    state.apply_clifford2(&TwoQubitClifford::cnot(), encode_site, reference_site)
}

/// One observable value at hybrid layer `time` (0 = start of the hybrid stage).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSample {
    pub kind: ObservableKind,
    pub time: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub index: u64,
    /// Time series at the sampling stride (empty when only final values are requested).
    pub samples: Vec<ObservableSample>,
    /// Observables of the final state.
    pub finals: Vec<ObservableSample>,
    pub final_state: StabilizerState,
    pub events: Option<Vec<Event>>,
}

impl TrajectoryRecord {
    pub fn final_value(&self, kind: ObservableKind) -> Option<f64> {
        self.finals.iter().find(|s| s.kind == kind).map(|s| s.value)
    }

    /// Time series of one observable as `(time, value)` pairs.
    pub fn series(&self, kind: ObservableKind) -> Vec<(usize, f64)> {
        self.samples
            .iter()
            .filter(|s| s.kind == kind)
            .map(|s| (s.time, s.value))
            .collect()
    }

    /// Reset events of the hybrid stage as `(site, layer)` pairs.
    pub fn noise_events(&self) -> Vec<(usize, usize)> {
        self.events
            .iter()
            .flatten()
            .filter_map(|e| match e.kind {
                EventKind::Reset { site } if e.stage == Stage::Hybrid => Some((site, e.layer)),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub record_events: bool,
}

/// Evaluates one observable on a state laid out as `L` system sites plus an
/// optional trailing reference.
pub fn evaluate(state: &StabilizerState, system_size: usize, kind: ObservableKind) -> Result<f64> {
    let a = Region::left_half(system_size);
    let b = Region::right_half(system_size);
    let has_reference = state.num_sites() > system_size;
    let v = match kind {
        ObservableKind::EntropyAB => entropy(state, &Region::all(system_size))?,
        ObservableKind::MutualInfoAB => mutual_information(state, &a, &b)?,
        ObservableKind::Negativity => {
            if has_reference {
                let mut reduced = state.clone();
                for r in system_size..state.num_sites() {
                    reduced.trace_out(r)?;
                }
                log_negativity(&reduced, &b)?
            } else {
                log_negativity(state, &b)?
            }
        }
        ObservableKind::InfoRetention => {
            if !has_reference {
                return Err(Error::NoReference);
            }
            info_retention(state, system_size)?
        }
    };
    Ok(v as f64)
}

struct Sampler {
    kinds: Vec<ObservableKind>,
    stride: Option<usize>,
    system_size: usize,
    samples: Vec<ObservableSample>,
}

impl Sampler {
    fn observe(&mut self, state: &StabilizerState, time: usize) -> Result<()> {
        if let Some(stride) = self.stride {
            if time % stride == 0 {
                for &k in &self.kinds {
                    let value = evaluate(state, self.system_size, k)?;
                    self.samples.push(ObservableSample { kind: k, time, value });
                }
            }
        }
        Ok(())
    }

    fn finals(&self, state: &StabilizerState, time: usize) -> Result<Vec<ObservableSample>> {
        self.kinds
            .iter()
            .map(|&k| {
                Ok(ObservableSample {
                    kind: k,
                    time,
                    value: evaluate(state, self.system_size, k)?,
                })
            })
            .collect()
    }
}

/// Runs trajectory `index` of `config`: optional steady-state equilibration,
/// optional encoding followed by unitary scrambling, then `T` hybrid layers.
pub fn run_trajectory(config: &CircuitConfig, index: u64) -> Result<TrajectoryRecord> {
    run_trajectory_with(config, index, RunOptions::default())
}

pub fn run_trajectory_with(config: &CircuitConfig, index: u64, options: RunOptions) -> Result<TrajectoryRecord> {
    let config = config.validate()?;
    let l = config.system_size;
    let depth = config.depth();
    let q = config.noise_probability();
    let pairs = brickwall_pairs(l, config.boundary);
    let mut rng = trajectory_rng(config.seed, index);
    let mut events = Vec::new();
    let mut rec = Recorder {
        events: options.record_events.then_some(&mut events),
        stage: Stage::Equilibrate,
        layer: 0,
    };

    let mut state = StabilizerState::zero_state(l);
    if config.encoding == Encoding::SteadyStateBell {
        for t in 0..4 * l {
            rec.layer = t;
            brickwall_layer(&mut state, &pairs, &mut rng, &mut rec)?;
            measurement_and_noise(&mut state, &config, q, &mut rng, &mut rec)?;
        }
    }
    if let Some(reference) = config.reference_site() {
        state.add_qubit();
        encode_bell(&mut state, config.encode_site, reference)?;
        rec.push(EventKind::Encode {
            site: config.encode_site,
            reference,
        });
        rec.stage = Stage::Scramble;
        for t in 0..config.scramble_depth {
            rec.layer = t;
            brickwall_layer(&mut state, &pairs, &mut rng, &mut rec)?;
        }
    }

    let mut sampler = Sampler {
        kinds: config.observables(),
        stride: config.sample_every,
        system_size: l,
        samples: Vec::new(),
    };
    sampler.observe(&state, 0)?;
    rec.stage = Stage::Hybrid;
    for t in 0..depth {
        rec.layer = t;
        brickwall_layer(&mut state, &pairs, &mut rng, &mut rec)?;
        measurement_and_noise(&mut state, &config, q, &mut rng, &mut rec)?;
        sampler.observe(&state, t + 1)?;
    }
    let finals = sampler.finals(&state, depth)?;
    Ok(TrajectoryRecord {
        seed: config.seed,
        index,
        samples: sampler.samples,
        finals,
        final_state: state,
        events: options.record_events.then_some(events),
    })
}

/// Runs a noiseless and a noisy copy under one gate sequence. Resets hit only
/// the noisy copy. Measurements and encodings are rejected.
pub fn run_paired_trajectory(config: &CircuitConfig, index: u64) -> Result<(TrajectoryRecord, TrajectoryRecord)> {
    let config = config.validate()?;
    if config.p_m != 0.0 {
        return Err(Error::InvalidConfig(
            "paired trajectories need p_m = 0 (measurement records would diverge)".into(),
        ));
    }
    if config.encoding != Encoding::None {
        return Err(Error::InvalidConfig("paired trajectories do not support encoding".into()));
    }
    let l = config.system_size;
    let depth = config.depth();
    let q = config.noise_probability();
    let pairs = brickwall_pairs(l, config.boundary);
    let table = clifford2_table();
    let mut rng = trajectory_rng(config.seed, index);
    let mut pure = StabilizerState::zero_state(l);
    let mut noisy = StabilizerState::zero_state(l);
    for _ in 0..depth {
        for sub in &pairs {
            for &(a, b) in sub {
                let g: CliffordIndex = sample_uniform_clifford2(&mut rng);
                pure.apply_clifford2(&table[g.get()], a, b)?;
                noisy.apply_clifford2(&table[g.get()], a, b)?;
            }
        }
        let (_, noise) = draw_locations(&config, q, &mut rng);
        for (site, hit) in noise.into_iter().enumerate() {
            if hit {
                noisy.reset(site)?;
            }
        }
    }
    let kinds = config.observables();
    let record = |state: StabilizerState| -> Result<TrajectoryRecord> {
        let finals = kinds
            .iter()
            .map(|&k| {
                Ok(ObservableSample {
                    kind: k,
                    time: depth,
                    value: evaluate(&state, l, k)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrajectoryRecord {
            seed: config.seed,
            index,
            samples: Vec::new(),
            finals,
            final_state: state,
            events: None,
        })
    };
    Ok((record(pure)?, record(noisy)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(l: usize) -> CircuitConfig {
        CircuitConfig::new(l)
    }

    #[test]
    fn brickwall_indexing() {
        let [a, b] = brickwall_pairs(6, Boundary::Periodic);
        assert_eq!(a, [(1, 2), (3, 4), (5, 0)]);
        assert_eq!(b, [(2, 3), (4, 5), (0, 1)]);
        let [a, b] = brickwall_pairs(6, Boundary::Open);
        assert_eq!(a, [(1, 2), (3, 4)]);
        assert_eq!(b, [(2, 3), (4, 5), (0, 1)]);
        let [a, b] = brickwall_pairs(2, Boundary::Open);
        assert!(a.is_empty());
        assert_eq!(b, [(0, 1)]);
    }

    #[test]
    fn validation() {
        assert!(cfg(5).validate().is_err());
        assert!(cfg(0).validate().is_err());
        let mut c = cfg(8);
        c.p = 9.0;
        assert!(c.validate().is_err());
        c.p = 8.0;
        assert!(c.validate().is_ok());
        c.alpha = 0.5;
        assert!(c.validate().is_err());
        let mut c = cfg(8);
        c.noise_placement = NoisePlacement::LeftBoundary;
        assert_eq!(c.validate().unwrap().boundary, Boundary::Open);
        let mut c = cfg(8);
        c.scramble_depth = 3;
        assert!(c.validate().is_err());
        c.encoding = Encoding::InitialBell;
        assert!(c.validate().is_ok());
        c.encode_site = 8;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_names() {
        let c: CircuitConfig = serde_json::from_str(
            r#"{"L": 8, "T": 16, "p_m": 0.2, "p": 0.1, "encoding": "initial_bell", "T_scr": 8, "seed": 3}"#,
        )
        .unwrap();
        assert_eq!(c.system_size, 8);
        assert_eq!(c.depth(), 16);
        assert_eq!(c.scramble_depth, 8);
        assert_eq!(c.alpha, 1.0);
        assert_eq!(c.encoding, Encoding::InitialBell);
        assert_eq!(CircuitConfig::new(8).depth(), 32);
    }

    #[test]
    fn unitary_circuit_stays_pure() {
        let mut c = cfg(8);
        c.seed = 11;
        let r = run_trajectory(&c, 0).unwrap();
        assert_eq!(r.final_value(ObservableKind::EntropyAB), Some(0.0));
        assert!(r.final_state.is_pure());
    }

    #[test]
    fn full_noise_resets_everything() {
        let mut c = cfg(6);
        c.p = 6.0;
        c.p_m = 0.3;
        let r = run_trajectory(&c, 2).unwrap();
        let zero = StabilizerState::zero_state(6);
        for g in zero.generators() {
            assert_eq!(r.final_state.group_sign_of(&g), Some(false));
        }
    }

    #[test]
    fn empty_layer_leaves_state() {
        let c = cfg(6);
        let mut rng = trajectory_rng(1, 1);
        let mut s = StabilizerState::zero_state(6);
        apply_brickwall_layer(&mut s, 0, &c, &mut rng).unwrap();
        let before = s.clone();
        let ev = apply_noise_and_measurement_layer(&mut s, 0, &c, &mut rng).unwrap();
        assert!(ev.is_empty());
        assert_eq!(s, before);
    }

    #[test]
    fn determinism() {
        let mut c = cfg(16);
        c.depth = Some(64);
        c.p_m = 0.2;
        c.p = 0.3;
        c.seed = 99;
        c.sample_every = Some(4);
        let a = run_trajectory(&c, 5).unwrap();
        let b = run_trajectory(&c, 5).unwrap();
        assert_eq!(a, b);
        let other = run_trajectory(&c, 6).unwrap();
        assert_ne!(a.samples, other.samples);
    }

    #[test]
    fn encoding_gives_two_bits() {
        let mut c = cfg(4);
        c.encoding = Encoding::InitialBell;
        c.depth = Some(0);
        let r = run_trajectory(&c, 0).unwrap();
        assert_eq!(r.final_value(ObservableKind::InfoRetention), Some(2.0));
        let mut s = StabilizerState::zero_state(5);
        encode_bell(&mut s, 1, 4).unwrap();
        let names: Vec<String> = s.generators().iter().map(|g| g.to_string()).collect();
        assert!(names.contains(&"+_X__X".to_string()));
        assert!(names.contains(&"+_Z__Z".to_string()));
        assert!(encode_bell(&mut s, 7, 4).is_err());
    }

    #[test]
    fn noiseless_encoding_is_conserved() {
        let mut c = cfg(8);
        c.encoding = Encoding::InitialBell;
        c.sample_every = Some(1);
        c.seed = 4;
        for i in 0..5 {
            let r = run_trajectory(&c, i).unwrap();
            for (_, v) in r.series(ObservableKind::InfoRetention) {
                assert_eq!(v, 2.0);
            }
        }
        // Measurements can purify the reference but never re-entangle it.
        c.p_m = 0.3;
        for i in 0..5 {
            let r = run_trajectory(&c, i).unwrap();
            let series: Vec<f64> = r.series(ObservableKind::InfoRetention).into_iter().map(|(_, v)| v).collect();
            assert_eq!(series[0], 2.0);
            assert!(series.windows(2).all(|w| w[1] <= w[0]));
            assert!(series.iter().all(|&v| v == 0.0 || v == 2.0));
        }
    }

    #[test]
    fn paired_rejects_measurements() {
        let mut c = cfg(4);
        c.p_m = 0.1;
        assert!(run_paired_trajectory(&c, 0).is_err());
        c.p_m = 0.0;
        let (a, b) = run_paired_trajectory(&c, 0).unwrap();
        assert_eq!(a.final_state, b.final_state);
    }
}
