//! Signed Pauli strings in the symplectic (x|z) representation.
//!
//! A site with `x = z = 1` denotes the Hermitian `Y`, not `XZ`. Stored
//! operators are always Hermitian with a real sign; the `i` factors that show
//! up in products are tracked as an exponent mod 4 and must cancel.

use std::fmt;

use crate::gf2::{get_bit, set_bit, words_for};

/// Exponent `k` (mod 4) such that `P1 · P2 = i^k · P3`, where `P3` has the
/// XOR-ed bits and all three operators use the Hermitian site convention.
#[inline]
pub(crate) fn product_phase_exponent(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u32 {
    let mut plus = 0u32;
    let mut minus = 0u32;
    for w in 0..x1.len() {
        let (a, b, c, d) = (x1[w], z1[w], x2[w], z2[w]);
        // Y·Z = iX, Y·X = -iZ, X·Y = iZ, X·Z = -iY, Z·X = iY, Z·Y = -iX.
        let p = (a & b & d & !c) | (a & !b & c & d) | (!a & b & c & !d);
        let m = (a & b & c & !d) | (a & !b & d & !c) | (!a & b & c & d);
        plus += p.count_ones();
        minus += m.count_ones();
    }
    (plus + 4 * (minus / 4 + 1) - minus) % 4
}

/// Single-site Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// A Hermitian Pauli string on `num_sites` qubits with sign ±1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    num_sites: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    negative: bool,
}

impl PauliOperator {
    pub fn identity(num_sites: usize) -> Self {
        let w = words_for(num_sites).max(1);
        Self {
            num_sites,
            x: vec![0; w],
            z: vec![0; w],
            negative: false,
        }
    }

    /// A single-site Pauli `p` at `site`, identity elsewhere.
    pub fn single(num_sites: usize, site: usize, p: Pauli) -> Self {
        let mut op = Self::identity(num_sites);
        op.set(site, p);
        op
    }

    /// Parses strings like `"+XZI"`, `"-YY"` or `"ZZ"` (site 0 first).
    pub fn parse(s: &str) -> Option<Self> {
        let (negative, body) = match s.as_bytes().first()? {
            b'+' => (false, &s[1..]),
            b'-' => (true, &s[1..]),
            _ => (false, s),
        };
        let mut op = Self::identity(body.len());
        for (i, c) in body.chars().enumerate() {
            let p = match c {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return None,
            };
            op.set(i, p);
        }
        op.negative = negative;
        Some(op)
    }

    pub(crate) fn from_words(num_sites: usize, x: &[u64], z: &[u64], negative: bool) -> Self {
        Self {
            num_sites,
            x: x.to_vec(),
            z: z.to_vec(),
            negative,
        }
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// +1 or -1.
    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn set_negative(&mut self, negative: bool) {
        self.negative = negative;
    }

    pub fn get(&self, site: usize) -> Pauli {
        Pauli::from_bits(get_bit(&self.x, site), get_bit(&self.z, site))
    }

    pub fn set(&mut self, site: usize, p: Pauli) {
        assert!(site < self.num_sites, "site {site} out of range");
        let (x, z) = p.bits();
        set_bit(&mut self.x, site, x);
        set_bit(&mut self.z, site, z);
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// True when the symplectic product `a.x·b.z + a.z·b.x` is even.
    pub fn commutes_with(&self, other: &Self) -> bool {
        assert_eq!(self.num_sites, other.num_sites);
        let mut parity = 0u32;
        for w in 0..self.x.len() {
            parity ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones();
        }
        parity % 2 == 0
    }

    /// Product `self · other` as `(i^k, P)`, with `k` in `0..4` absorbing the
    /// signs of both factors (`k = 2` is a factor of −1).
    pub fn mul_with_phase(&self, other: &Self) -> (u32, Self) {
        assert_eq!(self.num_sites, other.num_sites);
        let mut k = product_phase_exponent(&self.x, &self.z, &other.x, &other.z);
        if self.negative {
            k += 2;
        }
        if other.negative {
            k += 2;
        }
        let x = self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect();
        let z = self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect();
        (
            k % 4,
            Self {
                num_sites: self.num_sites,
                x,
                z,
                negative: false,
            },
        )
    }

    /// Product of two commuting operators; the result is Hermitian with a real sign.
    ///
    /// Panics if the operators anticommute.
    pub fn mul(&self, other: &Self) -> Self {
        let (k, mut p) = self.mul_with_phase(other);
        assert!(k % 2 == 0, "product of anticommuting Paulis is not Hermitian");
        p.negative = k == 2;
        p
    }

    /// Restriction to a set of sites, as `(x bits, z bits)`.
    pub fn restrict(&self, sites: &[usize]) -> (Vec<bool>, Vec<bool>) {
        sites
            .iter()
            .map(|&s| (get_bit(&self.x, s), get_bit(&self.z, s)))
            .unzip()
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for i in 0..self.num_sites {
            let c = match self.get(i) {
                Pauli::I => '_',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
