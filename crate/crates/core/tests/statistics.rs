//! Sampling statistics checked at 3σ.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hybridlab_core::circuit::{
    apply_noise_and_measurement_layer, run_trajectory_with, CircuitConfig, EventKind, RunOptions,
};
use hybridlab_core::clifford::{clifford2_table, sample_uniform_clifford2};
use hybridlab_core::pauli::PauliOperator;
use hybridlab_core::stabilizer::{MeasurementKind, StabilizerState};

/// Pearson statistic against a uniform distribution; panics above `df + 3 sqrt(2 df)`.
fn assert_uniform(counts: &[u64]) {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let df = (counts.len() - 1) as f64;
    assert!(chi2 < df + 3.0 * (2.0 * df).sqrt(), "chi2 = {chi2} with {df} dof");
}

#[test]
fn clifford_sampling_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts = vec![0u64; 11520];
    for _ in 0..1_000_000 {
        counts[sample_uniform_clifford2(&mut rng).get()] += 1;
    }
    assert!(counts.iter().all(|&c| c > 0));
    assert_uniform(&counts);
}

#[test]
fn conjugated_z_is_uniform_over_paulis() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let table = clifford2_table();
    let z0 = PauliOperator::parse("Z_").unwrap();
    let mut counts = vec![0u64; 15];
    for _ in 0..10_000 {
        let image = table[sample_uniform_clifford2(&mut rng).get()].conjugate(&z0);
        let code = (0..2).fold(0, |acc, k| {
            let (x, z) = image.get(k).bits();
            acc * 4 + 2 * x as usize + z as usize
        });
        assert!(code > 0);
        counts[code - 1] += 1;
    }
    assert_uniform(&counts);
}

#[test]
fn event_counts_follow_rates() {
    let mut config = CircuitConfig::new(16);
    config.p_m = 0.2;
    config.p = 1.6;
    let l = config.system_size as f64;
    let q = config.noise_probability();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut state = StabilizerState::zero_state(16);
    let (mut measured, mut reset) = (0u64, 0u64);
    let layers = 10_000;
    for t in 0..layers {
        for e in apply_noise_and_measurement_layer(&mut state, t, &config, &mut rng).unwrap() {
            match e.kind {
                EventKind::Measure { .. } => measured += 1,
                EventKind::Reset { .. } => reset += 1,
                _ => unreachable!(),
            }
        }
    }
    for (count, rate) in [(measured, config.p_m), (reset, q)] {
        let n = layers as f64 * l;
        let sd = (n * rate * (1.0 - rate)).sqrt();
        assert!((count as f64 - n * rate).abs() < 3.0 * sd, "{count} vs {}", n * rate);
    }
}

#[test]
fn random_outcomes_follow_born_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut state = StabilizerState::zero_state(6);
    for _ in 0..30 {
        let g = sample_uniform_clifford2(&mut rng);
        let a = rand::Rng::random_range(&mut rng, 0..5);
        state.apply_clifford2(&clifford2_table()[g.get()], a, a + 1).unwrap();
    }
    let trials = 20_000;
    for site in 0..6 {
        let mut ones = 0u64;
        let mut kind = None;
        for _ in 0..trials {
            let mut s = state.clone();
            let m = s.measure_z(site, &mut rng).unwrap();
            kind = Some(m.kind);
            ones += m.outcome as u64;
        }
        let p = match kind.unwrap() {
            MeasurementKind::Deterministic => {
                assert!(ones == 0 || ones == trials);
                continue;
            }
            _ => 0.5,
        };
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((ones as f64 - trials as f64 * p).abs() < 3.0 * sd);
    }
}

#[test]
fn trajectory_streams_are_uncorrelated() {
    let mut config = CircuitConfig::new(8);
    config.p_m = 0.5;
    config.depth = Some(64);
    config.seed = 15;
    let outcomes: Vec<Vec<f64>> = (0..40)
        .map(|i| {
            let rec = run_trajectory_with(&config, i, RunOptions { record_events: true }).unwrap();
            rec.events
                .unwrap()
                .iter()
                .filter_map(|e| match e.kind {
                    EventKind::Measure { outcome, random: true, .. } => Some(if outcome { 1.0 } else { -1.0 }),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let (mut sum, mut n) = (0.0, 0usize);
    for i in 0..outcomes.len() {
        for j in i + 1..outcomes.len() {
            let k = outcomes[i].len().min(outcomes[j].len());
            sum += (0..k).map(|t| outcomes[i][t] * outcomes[j][t]).sum::<f64>();
            n += k;
        }
    }
    // Distinct pair products are uncorrelated for fair ±1 outcomes, so the
    // variance of the sum is the number of terms.
    let z = sum / (n as f64).sqrt();
    assert!(z.abs() < 3.0, "z = {z}");
}
