#![allow(dead_code)]

pub mod dense;
pub mod weingarten;

use hybridlab_core::circuit::{Event, EventKind, ObservableKind};
use hybridlab_core::clifford::TwoQubitClifford;

use dense::Dense;

/// Replays an event log on the dense simulator. Measurement outcomes are
/// taken from the log; returns the outcome probabilities seen on the way.
pub fn replay(dense: &mut Dense, events: &[Event]) -> Vec<(f64, bool)> {
    let mut probs = Vec::new();
    for e in events {
        match e.kind {
            EventKind::Gate { a, b, gate } => dense.apply_gate(&TwoQubitClifford::from_index(gate), a, b),
            EventKind::Measure { site, outcome, random } => {
                probs.push((dense.measure(site, outcome), random));
            }
            EventKind::Reset { site } => dense.reset(site),
            EventKind::Encode { site, reference } => {
                while dense.n <= reference {
                    dense.add_qubit();
                }
                dense.encode_bell(site, reference);
            }
        }
    }
    probs
}

/// Dense value of an engine observable for halves `A = [0, L/2)`, `B = [L/2, L)`
/// and reference qubit `L`.
pub fn dense_observable(dense: &Dense, l: usize, kind: ObservableKind) -> f64 {
    let system: Vec<usize> = (0..l).collect();
    let a: Vec<usize> = (0..l / 2).collect();
    let b: Vec<usize> = (l / 2..l).collect();
    match kind {
        ObservableKind::EntropyAB => dense.entropy(&system),
        ObservableKind::MutualInfoAB => dense.entropy(&a) + dense.entropy(&b) - dense.entropy(&system),
        ObservableKind::Negativity => dense.log_negativity(&system, &b),
        ObservableKind::InfoRetention => {
            let everything: Vec<usize> = (0..=l).collect();
            dense.entropy(&system) + dense.entropy(&[l]) - dense.entropy(&everything)
        }
    }
}
