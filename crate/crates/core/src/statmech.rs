//! Leading-order (large local dimension) spin model for noisy random circuits.
//!
//! Spins are permutations of `r` replicas. Weights are reported as integer
//! exponents of `d`. Free energies are in units of `|ℂ| log d`, so a single
//! noise event inside a ℂ domain costs 1 and a unit of domain wall costs `s0`.

use std::fmt;
use std::io::{Read, Write};

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Boundary, CircuitConfig, NoisePlacement};
use crate::error::{Error, Result};

/// Largest replica count for which `S_r` is enumerated.
pub const MAX_ENUMERATED_REPLICAS: usize = 8;

/// A permutation of `r` replicas, stored as `i -> map[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let r = map.len();
        let mut seen = vec![false; r];
        for &v in &map {
            if v >= r || seen[v] {
                return Err(Error::InvalidConfig(format!("{map:?} is not a permutation")));
            }
            seen[v] = true;
        }
        Ok(Self { map })
    }

    /// The identity `𝕀`.
    pub fn identity(r: usize) -> Self {
        Self { map: (0..r).collect() }
    }

    /// The cyclic permutation `ℂ: i -> i + 1 mod r`.
    pub fn cyclic(r: usize) -> Self {
        Self {
            map: (0..r).map(|i| (i + 1) % r).collect(),
        }
    }

    pub fn transposition(r: usize, a: usize, b: usize) -> Self {
        let mut map: Vec<usize> = (0..r).collect();
        map.swap(a, b);
        Self { map }
    }

    /// All `r!` elements of `S_r` in lexicographic order.
    pub fn all(r: usize) -> Result<Vec<Self>> {
        if r > MAX_ENUMERATED_REPLICAS {
            return Err(Error::ReplicaCountTooLarge(r));
        }
        Ok((0..r).permutations(r).map(|map| Self { map }).collect())
    }

    pub fn random<R: Rng + ?Sized>(r: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut map: Vec<usize> = (0..r).collect();
        map.shuffle(rng);
        Self { map }
    }

    pub fn replicas(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut map = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            map[v] = i;
        }
        Self { map }
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.replicas(), other.replicas());
        Self {
            map: other.map.iter().map(|&i| self.map[i]).collect(),
        }
    }

    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.map.len()];
        let mut cycles = 0;
        for start in 0..self.map.len() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.map[i];
            }
        }
        cycles
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.map.iter().join(" "))
    }
}

fn same_replicas(a: &Permutation, b: &Permutation) -> Result<()> {
    if a.replicas() == b.replicas() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "permutations of {} and {} replicas",
            a.replicas(),
            b.replicas()
        )))
    }
}

/// `|σ| = r − #cycles(σ)`, the minimal number of transpositions building `σ`.
pub fn perm_distance(sigma: &Permutation) -> usize {
    sigma.replicas() - sigma.cycle_count()
}

/// Exponent of `d` in `⟨σ|τ⟩ = d^{r − |σ⁻¹τ|}`.
pub fn diagonal_bond_weight_exponent(sigma: &Permutation, tau: &Permutation) -> Result<i64> {
    same_replicas(sigma, tau)?;
    let r = sigma.replicas() as i64;
    Ok(r - perm_distance(&sigma.inverse().compose(tau)) as i64)
}

/// Leading power of `d` in the triangle weight `W(s1, s2; s3)`:
/// `max_τ [−2|s3⁻¹τ| − |s1⁻¹τ| − |s2⁻¹τ|]`.
pub fn triangle_weight_leading_exponent(s1: &Permutation, s2: &Permutation, s3: &Permutation) -> Result<i64> {
    same_replicas(s1, s2)?;
    same_replicas(s1, s3)?;
    let (i1, i2, i3) = (s1.inverse(), s2.inverse(), s3.inverse());
    let best = Permutation::all(s1.replicas())?
        .iter()
        .map(|tau| {
            -2 * perm_distance(&i3.compose(tau)) as i64
                - perm_distance(&i1.compose(tau)) as i64
                - perm_distance(&i2.compose(tau)) as i64
        })
        .max()
        .expect("S_r is never empty");
    Ok(best)
}

/// A noise event pins towards `𝕀`; inside a `σ` domain it costs `d^{−|σ|}`.
pub fn noise_pinning_exponent(sigma: &Permutation) -> i64 {
    -(perm_distance(sigma) as i64)
}

/// Space-time locations `(x, t)` of reset events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoisePattern {
    system_size: usize,
    depth: usize,
    placement: NoisePlacement,
    boundary: Boundary,
    events: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PatternRow {
    x: usize,
    t: usize,
}

impl NoisePattern {
    /// Validates and sorts the events (by `t`, then `x`).
    pub fn new(
        system_size: usize,
        depth: usize,
        placement: NoisePlacement,
        events: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut events: Vec<(usize, usize)> = events.into_iter().collect();
        for &(x, t) in &events {
            if x >= system_size || t >= depth {
                return Err(Error::MalformedPattern(format!(
                    "event ({x}, {t}) outside {system_size} sites × {depth} layers"
                )));
            }
            if placement == NoisePlacement::LeftBoundary && x != 0 {
                return Err(Error::MalformedPattern(format!("boundary noise at site {x}")));
            }
        }
        events.sort_unstable_by_key(|&(x, t)| (t, x));
        if let Some(w) = events.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::MalformedPattern(format!("duplicate event {:?}", w[0])));
        }
        let boundary = match placement {
            NoisePlacement::Bulk => Boundary::Periodic,
            NoisePlacement::LeftBoundary => Boundary::Open,
        };
        Ok(Self {
            system_size,
            depth,
            placement,
            boundary,
            events,
        })
    }

    pub fn empty(system_size: usize, depth: usize) -> Self {
        Self::new(system_size, depth, NoisePlacement::Bulk, []).expect("empty pattern is valid")
    }

    /// Pattern with the geometry of `config` and the given events.
    pub fn for_config(config: &CircuitConfig, events: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let config = config.validate()?;
        let mut p = Self::new(config.system_size, config.depth(), config.noise_placement, events)?;
        p.boundary = config.boundary;
        Ok(p)
    }

    /// Independent Bernoulli(`q`) noise at every candidate site and layer.
    pub fn sample<R: Rng + ?Sized>(
        system_size: usize,
        depth: usize,
        q: f64,
        placement: NoisePlacement,
        rng: &mut R,
    ) -> Self {
        let width = match placement {
            NoisePlacement::Bulk => system_size,
            NoisePlacement::LeftBoundary => 1,
        };
        let mut events = Vec::new();
        for t in 0..depth {
            for x in 0..width {
                if rng.random::<f64>() < q {
                    events.push((x, t));
                }
            }
        }
        Self::new(system_size, depth, placement, events).expect("sampled events are in range")
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn system_size(&self) -> usize {
        self.system_size
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn placement(&self) -> NoisePlacement {
        self.placement
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn events(&self) -> &[(usize, usize)] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Reads `x,t` rows (with header).
    pub fn read_csv<R: Read>(
        reader: R,
        system_size: usize,
        depth: usize,
        placement: NoisePlacement,
    ) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut events = Vec::new();
        for row in rdr.deserialize::<PatternRow>() {
            let row = row.map_err(|e| Error::MalformedPattern(e.to_string()))?;
            events.push((row.x, row.t));
        }
        Self::new(system_size, depth, placement, events)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for &(x, t) in &self.events {
            w.serialize(PatternRow { x, t })?;
        }
        w.flush()?;
        Ok(())
    }

    fn distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        match self.boundary {
            Boundary::Periodic => d.min(self.system_size - d),
            Boundary::Open => d,
        }
    }
}

/// Upper envelope of the light cones `t_n − dist(x, x_n)` opened at each noise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainWall {
    /// Wall height per column; `None` where no cone reaches layer 0.
    front: Vec<Option<usize>>,
    apexes: Vec<(usize, usize)>,
}

impl DomainWall {
    pub fn front(&self) -> &[Option<usize>] {
        &self.front
    }

    pub fn height(&self, x: usize) -> Option<usize> {
        self.front[x]
    }

    /// Topmost noises, sorted by site.
    pub fn apexes(&self) -> &[(usize, usize)] {
        &self.apexes
    }

    /// Number of unit segments: columns the wall crosses.
    pub fn length(&self) -> usize {
        self.front.iter().filter(|h| h.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.apexes.is_empty()
    }
}

pub fn build_domain_wall(noise: &NoisePattern) -> DomainWall {
    let l = noise.system_size;
    let mut best: Vec<i64> = vec![-1; l];
    let mut achievers = vec![0usize; l];
    for &(xn, tn) in &noise.events {
        for (x, (b, c)) in best.iter_mut().zip(achievers.iter_mut()).enumerate() {
            let h = tn as i64 - noise.distance(x, xn) as i64;
            if h > *b {
                *b = h;
                *c = 1;
            } else if h == *b && h >= 0 {
                *c += 1;
            }
        }
    }
    let mut apexes: Vec<(usize, usize)> = noise
        .events
        .iter()
        .copied()
        .filter(|&(x, t)| best[x] == t as i64 && achievers[x] == 1)
        .collect();
    apexes.sort_unstable();
    DomainWall {
        front: best.into_iter().map(|h| (h >= 0).then_some(h as usize)).collect(),
        apexes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Configuration {
    #[serde(rename = "all_C")]
    AllC,
    #[serde(rename = "wall")]
    Wall,
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Configuration::AllC => "all_C",
            Configuration::Wall => "wall",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePrediction {
    pub dominant: Configuration,
    pub free_energy_all_c: f64,
    pub free_energy_wall: f64,
    /// `min(F_allC, F_wall)`.
    pub entropy: f64,
    /// Leading term of the observable the comparison predicts: `I(A:B)` for
    /// bulk comparisons, `I(AB:R)` (0 or 2) for boundary ones.
    pub observable: f64,
    /// `p_c` (bulk, α = 1) or `q_c` (boundary, `T ≥ L`); `None` without a transition.
    pub critical_point: Option<f64>,
}

fn pick(f_all_c: f64, f_wall: f64) -> Configuration {
    if f_wall < f_all_c {
        Configuration::Wall
    } else {
        Configuration::AllC
    }
}

fn kpz_term(config: &CircuitConfig, kpz_coefficient: f64) -> f64 {
    if config.p_m > 0.0 && config.p > 0.0 {
        kpz_coefficient * (config.system_size as f64 / config.p).powf(1.0 / 3.0)
    } else {
        0.0
    }
}

fn bulk_prediction(config: &CircuitConfig, s0: f64, f_all_c: f64, f_wall: f64) -> PhasePrediction {
    let l = config.system_size as f64;
    let t = config.depth() as f64;
    let expected_noise = config.noise_probability() * l * t;
    PhasePrediction {
        dominant: pick(f_all_c, f_wall),
        free_energy_all_c: f_all_c,
        free_energy_wall: f_wall,
        entropy: f_all_c.min(f_wall),
        observable: (s0 * l - expected_noise).max(0.0),
        critical_point: (config.alpha == 1.0).then(|| s0 * l / t),
    }
}

/// Compares the all-ℂ configuration (cost: one unit per noise) with the
/// light-cone wall of `noise` (cost `s0` per unit length plus the KPZ term
/// `kpz_coefficient (L/p)^{1/3}` when measurements are present).
pub fn free_energy_compare(
    config: &CircuitConfig,
    noise: &NoisePattern,
    s0: f64,
    kpz_coefficient: f64,
) -> Result<PhasePrediction> {
    let config = config.validate()?;
    if noise.system_size != config.system_size || noise.depth != config.depth() {
        return Err(Error::DimensionMismatch(format!(
            "pattern is {}×{}, config is {}×{}",
            noise.system_size,
            noise.depth,
            config.system_size,
            config.depth()
        )));
    }
    let f_all_c = noise.len() as f64;
    let f_wall = if noise.is_empty() {
        0.0
    } else {
        s0 * build_domain_wall(noise).length() as f64 + kpz_term(&config, kpz_coefficient)
    };
    Ok(bulk_prediction(&config, s0, f_all_c, f_wall))
}

/// Same comparison with the noise count replaced by its mean `qLT` and a wall
/// spanning the whole system. Valid for any `L`, including sizes far beyond
/// simulation.
pub fn expected_free_energy_compare(config: &CircuitConfig, s0: f64, kpz_coefficient: f64) -> Result<PhasePrediction> {
    let config = config.validate()?;
    let l = config.system_size as f64;
    let f_all_c = config.noise_probability() * l * config.depth() as f64;
    let f_wall = s0 * l + kpz_term(&config, kpz_coefficient);
    Ok(bulk_prediction(&config, s0, f_all_c, f_wall))
}

/// Large-d comparison for noise on the left boundary only. All-ℂ costs the
/// expected boundary-noise count `qT`. Walls: one leaving the boundary at
/// layer `t0 < T` and ending at the bottom, `q t0 + (T − t0)`, minimized over
/// `t0` when `t0` is `None`; for `T ≥ L` also the corner-to-boundary wall, `L`.
pub fn boundary_scenario_compare(config: &CircuitConfig, t0: Option<usize>) -> Result<PhasePrediction> {
    let config = config.validate()?;
    if config.noise_placement != NoisePlacement::LeftBoundary {
        return Err(Error::WrongPlacement("boundary comparison needs left_boundary noise".into()));
    }
    let l = config.system_size as f64;
    let depth = config.depth();
    let t = depth as f64;
    let q = config.noise_probability();
    let vertical = |t0: usize| q * t0 as f64 + (t - t0 as f64);
    let mut f_wall = match t0 {
        Some(t0) if t0 >= depth => {
            return Err(Error::InvalidConfig(format!("t0 = {t0} must be below T = {depth}")));
        }
        Some(t0) => vertical(t0),
        None => (0..depth).map(vertical).fold(f64::INFINITY, f64::min),
    };
    if depth >= config.system_size {
        f_wall = f_wall.min(l);
    }
    let f_all_c = q * t;
    let dominant = pick(f_all_c, f_wall);
    Ok(PhasePrediction {
        dominant,
        free_energy_all_c: f_all_c,
        free_energy_wall: f_wall,
        entropy: f_all_c.min(f_wall),
        observable: if dominant == Configuration::AllC { 2.0 } else { 0.0 },
        critical_point: (depth >= config.system_size).then(|| l / t),
    })
}
