//! Entanglement and information observables of stabilizer states, in bits.
//!
//! All of these are rank computations on restrictions of the generator
//! matrix; none of them modify the state.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::stabilizer::StabilizerState;

/// A set of sites, kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Region(Vec<usize>);

impl Region {
    pub fn new(sites: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = sites.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    /// Sites `0..L/2`.
    pub fn left_half(system_size: usize) -> Self {
        Self::new(0..system_size / 2)
    }

    /// Sites `L/2..L`.
    pub fn right_half(system_size: usize) -> Self {
        Self::new(system_size / 2..system_size)
    }

    pub fn all(system_size: usize) -> Self {
        Self::new(0..system_size)
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn union(&self, other: &Region) -> Region {
        Region::new(self.0.iter().chain(&other.0).copied())
    }

    pub fn complement(&self, num_sites: usize) -> Region {
        let mut inside = vec![false; num_sites];
        for &s in &self.0 {
            if s < num_sites {
                inside[s] = true;
            }
        }
        Region((0..num_sites).filter(|&s| !inside[s]).collect())
    }
}

impl Deref for Region {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<&[usize]> for Region {
    fn from(s: &[usize]) -> Self {
        Region::new(s.iter().copied())
    }
}

/// The symplectic form on `region`, pairing the X and Z columns of each site
/// in the interleaved layout of [`StabilizerState::restrict_generators`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    sites: usize,
}

impl SymplecticForm {
    pub fn new(sites: usize) -> Self {
        Self { sites }
    }

    pub fn dimension(&self) -> usize {
        2 * self.sites
    }

    pub fn matrix(&self) -> BitMatrix {
        let mut j = BitMatrix::zeros(self.dimension(), self.dimension());
        for k in 0..self.sites {
            j.set(2 * k, 2 * k + 1, true);
            j.set(2 * k + 1, 2 * k, true);
        }
        j
    }

    /// `G J Gᵀ`: entry `(i, j)` is 1 when rows `i` and `j` anticommute on the region.
    pub fn gram(&self, g: &BitMatrix) -> BitMatrix {
        assert_eq!(g.cols(), self.dimension());
        g.mul(&self.matrix()).mul(&g.transpose())
    }
}

fn check_region(state: &StabilizerState, region: &[usize]) -> Result<()> {
    match region.iter().find(|&&s| s >= state.num_sites()) {
        Some(&site) => Err(Error::SiteOutOfRange {
            site,
            num_sites: state.num_sites(),
        }),
        None => Ok(()),
    }
}

/// Von Neumann entropy of `region` in bits:
/// `|A| − (m − rank(G restricted to the complement))`.
pub fn entropy(state: &StabilizerState, region: &[usize]) -> Result<usize> {
    check_region(state, region)?;
    let region = Region::from(region);
    let complement = region.complement(state.num_sites());
    let rank_outside = state.restrict_generators(&complement)?.rank();
    let inside = state.num_generators() - rank_outside;
    Ok(region.len() - inside)
}

/// `I(A:B) = S_A + S_B − S_AB` for disjoint `A`, `B`.
pub fn mutual_information(state: &StabilizerState, a: &[usize], b: &[usize]) -> Result<usize> {
    let ra = Region::from(a);
    let rb = Region::from(b);
    if let Some(&s) = ra.iter().find(|s| rb.contains(s)) {
        return Err(Error::OverlappingRegions(s));
    }
    let sa = entropy(state, &ra)?;
    let sb = entropy(state, &rb)?;
    let sab = entropy(state, &ra.union(&rb))?;
    Ok(sa + sb - sab)
}

/// Logarithmic negativity (base 2) across the bipartition `B | rest`:
/// half the GF(2) rank of `G_B J G_Bᵀ`.
pub fn log_negativity(state: &StabilizerState, b: &[usize]) -> Result<usize> {
    check_region(state, b)?;
    let rb = Region::from(b);
    let g = state.restrict_generators(&rb)?;
    let k = SymplecticForm::new(rb.len()).gram(&g);
    let rank = k.rank();
    debug_assert!(rank % 2 == 0, "commutation matrix has odd rank");
    Ok(rank / 2)
}

/// `I(AB:R)` between every site other than `reference` and the reference.
pub fn info_retention(state: &StabilizerState, reference: usize) -> Result<usize> {
    if reference >= state.num_sites() {
        return Err(Error::NoReference);
    }
    let system: Vec<usize> = (0..state.num_sites()).filter(|&s| s != reference).collect();
    mutual_information(state, &system, &[reference])
}
