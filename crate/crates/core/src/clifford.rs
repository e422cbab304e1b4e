//! The two-qubit Clifford group, enumerated and indexed.
//!
//! Modulo global phase the group has 11,520 elements: 720 symplectic maps on
//! the four generators `X0, Z0, X1, Z1`, each combined with 16 sign choices.
//! Element `i` is symplectic map `i / 16` with sign bits `i % 16`, where the
//! symplectic maps are listed in lexicographic order of their images.

use std::fmt;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator};

pub const CLIFFORD2_ORDER: usize = 11_520;
const SYMPLECTIC_ORDER: usize = 720;

/// Index of an element of the two-qubit Clifford group, in `0..11520`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct CliffordIndex(u16);

impl TryFrom<u16> for CliffordIndex {
    type Error = Error;
    fn try_from(v: u16) -> Result<Self> {
        Self::new(v as usize)
    }
}

impl From<CliffordIndex> for u16 {
    fn from(c: CliffordIndex) -> u16 {
        c.0
    }
}

impl CliffordIndex {
    pub fn new(index: usize) -> Result<Self> {
        if index < CLIFFORD2_ORDER {
            Ok(Self(index as u16))
        } else {
            Err(Error::InvalidGate(index))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CliffordIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

// Local 4-bit code of a two-qubit Pauli: bit0 = x0, bit1 = z0, bit2 = x1, bit3 = z1.
#[inline]
fn symplectic_form(u: u8, v: u8) -> u8 {
    let cross = |a: u8, b: u8| ((a & 1) & ((b >> 1) & 1)) ^ (((a >> 1) & 1) & (b & 1));
    cross(u, v) ^ cross(u >> 2, v >> 2)
}

fn symplectic_maps() -> &'static [[u8; 4]] {
    static MAPS: OnceLock<Vec<[u8; 4]>> = OnceLock::new();
    MAPS.get_or_init(|| {
        let mut maps = Vec::with_capacity(SYMPLECTIC_ORDER);
        for a in 1..16u8 {
            for b in 1..16u8 {
                if symplectic_form(a, b) != 1 {
                    continue;
                }
                for c in 1..16u8 {
                    if symplectic_form(a, c) != 0 || symplectic_form(b, c) != 0 {
                        continue;
                    }
                    for d in 1..16u8 {
                        if symplectic_form(c, d) == 1
                            && symplectic_form(a, d) == 0
                            && symplectic_form(b, d) == 0
                        {
                            maps.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        assert_eq!(maps.len(), SYMPLECTIC_ORDER);
        maps
    })
}

fn local_to_pauli(code: u8) -> PauliOperator {
    let mut p = PauliOperator::identity(2);
    p.set(0, Pauli::from_bits(code & 1 != 0, code & 2 != 0));
    p.set(1, Pauli::from_bits(code & 4 != 0, code & 8 != 0));
    p
}

fn pauli_to_local(p: &PauliOperator) -> u8 {
    let (x0, z0) = p.get(0).bits();
    let (x1, z1) = p.get(1).bits();
    (x0 as u8) | (z0 as u8) << 1 | (x1 as u8) << 2 | (z1 as u8) << 3
}

/// A two-qubit Clifford unitary, stored as its conjugation action.
///
/// `table[code]` holds the image `U P U†` of every local Pauli `P` as a
/// 4-bit code plus a sign flag, so applying the gate to a stabilizer row is a
/// single lookup.
#[derive(Clone, PartialEq, Eq)]
pub struct TwoQubitClifford {
    index: CliffordIndex,
    table: [(u8, bool); 16],
}

impl TwoQubitClifford {
    pub fn from_index(index: CliffordIndex) -> Self {
        let i = index.get();
        let images = symplectic_maps()[i / 16];
        let signs = (i % 16) as u8;
        Self {
            index,
            table: build_table(images, signs),
        }
    }

    /// Builds the gate from the images of `X0, Z0, X1, Z1` (e.g. `["+XX", "+Z_", "+_X", "+ZZ"]`).
    pub fn from_images(images: [&str; 4]) -> Result<Self> {
        let mut codes = [0u8; 4];
        let mut signs = 0u8;
        for (k, s) in images.iter().enumerate() {
            let p = PauliOperator::parse(s)
                .filter(|p| p.num_sites() == 2)
                .ok_or_else(|| Error::InvalidConfig(format!("bad Pauli image {s:?}")))?;
            codes[k] = pauli_to_local(&p);
            if p.is_negative() {
                signs |= 1 << k;
            }
        }
        let sym = symplectic_maps()
            .binary_search(&codes)
            .map_err(|_| Error::InvalidConfig(format!("images {images:?} are not symplectic")))?;
        Ok(Self::from_index(CliffordIndex((sym * 16 + signs as usize) as u16)))
    }

    pub fn index(&self) -> CliffordIndex {
        self.index
    }

    /// Image of a local Pauli code under conjugation: `(code, negative)`.
    #[inline]
    pub fn conjugate_local(&self, code: u8) -> (u8, bool) {
        self.table[code as usize]
    }

    /// `U P U†` for a two-qubit Pauli `P`.
    pub fn conjugate(&self, p: &PauliOperator) -> PauliOperator {
        assert_eq!(p.num_sites(), 2);
        let (code, flip) = self.conjugate_local(pauli_to_local(p));
        let mut out = local_to_pauli(code);
        out.set_negative(p.is_negative() ^ flip);
        out
    }

    pub fn identity() -> Self {
        Self::from_images(["+X_", "+Z_", "+_X", "+_Z"]).unwrap()
    }

    /// CNOT with control on the first qubit.
    pub fn cnot() -> Self {
        Self::from_images(["+XX", "+Z_", "+_X", "+ZZ"]).unwrap()
    }

    /// Hadamard on the first qubit.
    pub fn hadamard_first() -> Self {
        Self::from_images(["+Z_", "+X_", "+_X", "+_Z"]).unwrap()
    }

    /// Phase gate on the first qubit.
    pub fn phase_first() -> Self {
        Self::from_images(["+Y_", "+Z_", "+_X", "+_Z"]).unwrap()
    }

    pub fn swap() -> Self {
        Self::from_images(["+_X", "+_Z", "+X_", "+Z_"]).unwrap()
    }
}

impl fmt::Debug for TwoQubitClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let img = |code: u8| {
            let (c, neg) = self.table[code as usize];
            let mut p = local_to_pauli(c);
            p.set_negative(neg);
            p.to_string()
        };
        f.debug_struct("TwoQubitClifford")
            .field("index", &self.index.get())
            .field("X0", &img(1))
            .field("Z0", &img(2))
            .field("X1", &img(4))
            .field("Z1", &img(8))
            .finish()
    }
}

fn build_table(images: [u8; 4], signs: u8) -> [(u8, bool); 16] {
    let gens: Vec<PauliOperator> = (0..4)
        .map(|k| {
            let mut p = local_to_pauli(images[k]);
            p.set_negative(signs >> k & 1 == 1);
            p
        })
        .collect();
    let mut table = [(0u8, false); 16];
    for code in 0..16u8 {
        // P = i^{x0 z0 + x1 z1} X0^x0 Z0^z0 X1^x1 Z1^z1 in the Hermitian convention.
        let mut k = ((code & 1) & (code >> 1 & 1)) as u32 + ((code >> 2 & 1) & (code >> 3 & 1)) as u32;
        let mut acc = PauliOperator::identity(2);
        for (bit, g) in gens.iter().enumerate() {
            if code >> bit & 1 == 1 {
                let (kk, p) = acc.mul_with_phase(g);
                k += kk;
                acc = p;
            }
        }
        debug_assert!(k % 2 == 0);
        table[code as usize] = (pauli_to_local(&acc), k % 4 == 2);
    }
    table
}

/// Draws a uniformly random element of the two-qubit Clifford group.
pub fn sample_uniform_clifford2<R: Rng + ?Sized>(rng: &mut R) -> CliffordIndex {
    CliffordIndex(rng.random_range(0..CLIFFORD2_ORDER as u16))
}

/// Shared table of all 11,520 gates, built on first use.
pub fn clifford2_table() -> &'static [TwoQubitClifford] {
    static ALL: OnceLock<Vec<TwoQubitClifford>> = OnceLock::new();
    ALL.get_or_init(|| {
        (0..CLIFFORD2_ORDER)
            .map(|i| TwoQubitClifford::from_index(CliffordIndex(i as u16)))
            .collect()
    })
}
