//! Linear cross-entropy benchmark and state fidelity between a noiseless
//! stabilizer state and its noisy partner, both in polynomial time.
//!
//! The computational-basis distribution of a stabilizer state is uniform on
//! an affine subspace cut out by its Z-type stabilizers, so `Σ p(s) q(s)`
//! reduces to counting the solutions of a stacked linear system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::pauli::PauliOperator;
use crate::stabilizer::{SignedBasis, StabilizerState};

/// `⟨s|ρ|s⟩ = 2^{-(L-k)}` on `{s : C s = b}` and zero elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalDistribution {
    num_sites: usize,
    constraints: BitMatrix,
    offsets: Vec<bool>,
}

impl DiagonalDistribution {
    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    /// Dimension `k` of the Z-type subgroup.
    pub fn rank(&self) -> usize {
        self.offsets.len()
    }

    pub fn constraints(&self) -> &BitMatrix {
        &self.constraints
    }

    pub fn offsets(&self) -> &[bool] {
        &self.offsets
    }

    /// `log2` of the probability of each string in the support.
    pub fn log2_weight(&self) -> i64 {
        self.rank() as i64 - self.num_sites as i64
    }

    pub fn weight(&self) -> f64 {
        2f64.powi(self.log2_weight() as i32)
    }

    /// Probability of bitstring `s` (site 0 first).
    pub fn probability(&self, s: &[bool]) -> f64 {
        assert_eq!(s.len(), self.num_sites);
        let consistent = (0..self.rank()).all(|r| {
            let parity = (0..self.num_sites)
                .filter(|&j| self.constraints.get(r, j) && s[j])
                .count()
                % 2
                == 1;
            parity == self.offsets[r]
        });
        if consistent {
            self.weight()
        } else {
            0.0
        }
    }
}

/// Extracts the Z-type subgroup (kernel of the X block) with its signs.
pub fn diagonal_distribution(state: &StabilizerState) -> DiagonalDistribution {
    let n = state.num_sites();
    let rows = SignedBasis::new(state).z_type_rows();
    let mut constraints = BitMatrix::zeros(rows.len(), n);
    let mut offsets = Vec::with_capacity(rows.len());
    for (r, g) in rows.iter().enumerate() {
        let (_, z) = g.restrict(&(0..n).collect::<Vec<_>>());
        for (j, bit) in z.into_iter().enumerate() {
            constraints.set(r, j, bit);
        }
        // -Z…Z has eigenvalue +1 on strings of odd parity.
        offsets.push(g.is_negative());
    }
    DiagonalDistribution {
        num_sites: n,
        constraints,
        offsets,
    }
}

/// `XEB = 2^L Σ_s p(s) q(s) − 1`.
pub fn xeb(pure: &DiagonalDistribution, noisy: &DiagonalDistribution) -> Result<f64> {
    if pure.num_sites != noisy.num_sites {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} sites",
            pure.num_sites, noisy.num_sites
        )));
    }
    let n = pure.num_sites;
    let mut stacked = BitMatrix::zeros(pure.rank() + noisy.rank(), n);
    let mut rhs = Vec::with_capacity(pure.rank() + noisy.rank());
    for (src, offsets) in [(&pure.constraints, &pure.offsets), (&noisy.constraints, &noisy.offsets)] {
        let base = rhs.len();
        for r in 0..src.rows() {
            for j in 0..n {
                if src.get(r, j) {
                    stacked.set(base + r, j, true);
                }
            }
            rhs.push(offsets[r]);
        }
    }
    if stacked.solve(&rhs).is_none() {
        return Ok(-1.0);
    }
    let exponent = pure.rank() as i64 + noisy.rank() as i64 - stacked.rank() as i64;
    Ok(2f64.powi(exponent as i32) - 1.0)
}

/// `F = ⟨ψ|ρ|ψ⟩` for a pure stabilizer state `ψ` and a mixed state `ρ`.
pub fn fidelity(pure: &StabilizerState, noisy: &StabilizerState) -> Result<f64> {
    if !pure.is_pure() {
        return Err(Error::NotPure {
            generators: pure.num_generators(),
            sites: pure.num_sites(),
        });
    }
    if pure.num_sites() != noisy.num_sites() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} sites",
            pure.num_sites(),
            noisy.num_sites()
        )));
    }
    let n = pure.num_sites();
    let psi = pure.generators();
    let rho = noisy.generators();
    // Elements of S_ρ that commute with every generator of ψ lie in S_ψ up to sign.
    let mut anti = BitMatrix::zeros(psi.len(), rho.len());
    for (i, a) in psi.iter().enumerate() {
        for (j, b) in rho.iter().enumerate() {
            if !a.commutes_with(b) {
                anti.set(i, j, true);
            }
        }
    }
    let kernel = anti.kernel();
    let basis = SignedBasis::new(pure);
    for v in 0..kernel.rows() {
        let mut h = PauliOperator::identity(n);
        for (j, g) in rho.iter().enumerate() {
            if kernel.get(v, j) {
                h = h.mul(g);
            }
        }
        let in_psi = basis
            .sign_of(&h)
            .expect("commutant of a maximal stabilizer group lies in the group");
        if in_psi != h.is_negative() {
            return Ok(0.0);
        }
    }
    Ok(2f64.powi(kernel.rows() as i32 - n as i32))
}

/// XEB, fidelity and their ratio for one noiseless/noisy pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub xeb: f64,
    pub fidelity: f64,
    pub ratio: f64,
}

impl PairSummary {
    pub fn compute(pure: &StabilizerState, noisy: &StabilizerState) -> Result<Self> {
        let x = xeb(&diagonal_distribution(pure), &diagonal_distribution(noisy))?;
        let f = fidelity(pure, noisy)?;
        let ratio = if x != 0.0 { f / x } else { f64::NAN };
        Ok(Self {
            xeb: x,
            fidelity: f,
            ratio,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus_state(n: usize) -> StabilizerState {
        let gens: Vec<PauliOperator> = (0..n)
            .map(|i| PauliOperator::single(n, i, crate::pauli::Pauli::X))
            .collect();
        StabilizerState::from_generators(n, &gens).unwrap()
    }

    #[test]
    fn zero_state_distribution() {
        let d = diagonal_distribution(&StabilizerState::zero_state(4));
        assert_eq!(d.rank(), 4);
        assert_eq!(d.weight(), 1.0);
        assert_eq!(d.probability(&[false; 4]), 1.0);
        assert_eq!(d.probability(&[true, false, false, false]), 0.0);
        assert_eq!(xeb(&d, &d).unwrap(), 15.0);
    }

    #[test]
    fn plus_state_distribution() {
        let plus = plus_state(3);
        let d = diagonal_distribution(&plus);
        assert_eq!(d.rank(), 0);
        assert_eq!(d.weight(), 0.125);
        let z = diagonal_distribution(&StabilizerState::zero_state(3));
        assert_eq!(xeb(&d, &z).unwrap(), 0.0);
        assert_eq!(xeb(&z, &d).unwrap(), 0.0);
    }

    #[test]
    fn fidelity_examples() {
        let z = StabilizerState::zero_state(3);
        assert_eq!(fidelity(&z, &z).unwrap(), 1.0);
        let mut one = StabilizerState::zero_state(1);
        one.measure_z_with(0, || unreachable!()).unwrap();
        let flipped = StabilizerState::from_generators(1, &[PauliOperator::parse("-Z").unwrap()]).unwrap();
        assert_eq!(fidelity(&one, &flipped).unwrap(), 0.0);
        let mixed = StabilizerState::maximally_mixed(3);
        assert_eq!(fidelity(&z, &mixed).unwrap(), 0.125);
        assert!(matches!(fidelity(&mixed, &z), Err(Error::NotPure { .. })));
        assert!(fidelity(&z, &StabilizerState::zero_state(2)).is_err());
    }

    #[test]
    fn mismatched_sizes() {
        let a = diagonal_distribution(&StabilizerState::zero_state(2));
        let b = diagonal_distribution(&StabilizerState::zero_state(3));
        assert!(xeb(&a, &b).is_err());
    }
}
