//! Mixed stabilizer states without destabilizers.
//!
//! A state on `n` qubits is a list of `m <= n` independent, commuting, signed
//! Pauli generators; the density matrix is `2^{-n} Π (1 + g_i)`. Only the
//! stabilizer rows are kept, so measurement of a commuting observable falls
//! back to Gaussian elimination on a scratch copy.

use rand::Rng;

use crate::clifford::{clifford2_table, CliffordIndex, TwoQubitClifford};
use crate::error::{Error, Result};
use crate::gf2::{get_bit, set_bit, words_for, BitMatrix};
use crate::pauli::{product_phase_exponent, Pauli, PauliOperator};

/// Which branch a Z measurement took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementKind {
    /// Some generator anticommuted with `Z`: fair coin, `m` unchanged.
    Random,
    /// `±Z` was already in the group: outcome fixed, state unchanged.
    Deterministic,
    /// `Z` commuted with the group but was not in it: fair coin, `m + 1`.
    Purifying,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    /// `false` for eigenvalue +1 (bit 0), `true` for -1 (bit 1).
    pub outcome: bool,
    pub kind: MeasurementKind,
}

impl Measurement {
    pub fn bit(&self) -> u8 {
        self.outcome as u8
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct StabilizerState {
    num_sites: usize,
    words: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    negative: Vec<bool>,
}

impl std::fmt::Debug for StabilizerState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StabilizerState")
            .field("num_sites", &self.num_sites)
            .field("generators", &self.generators())
            .finish()
    }
}

impl StabilizerState {
    /// `|0…0⟩` on `num_sites` qubits.
    pub fn zero_state(num_sites: usize) -> Self {
        let mut s = Self::maximally_mixed(num_sites);
        for i in 0..num_sites {
            s.push_generator_words(&vec![0; s.words], &single_bit(s.words, i), false);
        }
        s
    }

    /// The maximally mixed state (no generators).
    pub fn maximally_mixed(num_sites: usize) -> Self {
        Self {
            num_sites,
            words: words_for(num_sites).max(1),
            xs: Vec::new(),
            zs: Vec::new(),
            negative: Vec::new(),
        }
    }

    /// Builds a state from explicit generators, checking commutation and independence.
    pub fn from_generators(num_sites: usize, generators: &[PauliOperator]) -> Result<Self> {
        let mut s = Self::maximally_mixed(num_sites);
        for g in generators {
            if g.num_sites() != num_sites {
                return Err(Error::InvalidGenerators(format!(
                    "generator {g} has {} sites, expected {num_sites}",
                    g.num_sites()
                )));
            }
            s.push_generator_words(g.x_words(), g.z_words(), g.is_negative());
        }
        s.check_invariants().map_err(Error::InvalidGenerators)?;
        Ok(s)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn num_generators(&self) -> usize {
        self.negative.len()
    }

    pub fn is_pure(&self) -> bool {
        self.num_generators() == self.num_sites
    }

    pub fn generator(&self, i: usize) -> PauliOperator {
        PauliOperator::from_words(self.num_sites, self.x_row(i), self.z_row(i), self.negative[i])
    }

    pub fn generators(&self) -> Vec<PauliOperator> {
        (0..self.num_generators()).map(|i| self.generator(i)).collect()
    }

    /// Appends a qubit in `|0⟩` as the last site.
    pub fn add_qubit(&mut self) {
        let n = self.num_sites + 1;
        let new_words = words_for(n).max(1);
        if new_words != self.words {
            let m = self.num_generators();
            let mut xs = vec![0; m * new_words];
            let mut zs = vec![0; m * new_words];
            for i in 0..m {
                xs[i * new_words..i * new_words + self.words].copy_from_slice(self.x_row(i));
                zs[i * new_words..i * new_words + self.words].copy_from_slice(self.z_row(i));
            }
            self.xs = xs;
            self.zs = zs;
            self.words = new_words;
        }
        self.num_sites = n;
        let zero = vec![0; self.words];
        self.push_generator_words(&zero, &single_bit(self.words, n - 1), false);
    }

    #[inline]
    pub(crate) fn x_row(&self, i: usize) -> &[u64] {
        &self.xs[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub(crate) fn z_row(&self, i: usize) -> &[u64] {
        &self.zs[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    fn x_bit(&self, row: usize, site: usize) -> bool {
        get_bit(self.x_row(row), site)
    }

    #[inline]
    fn z_bit(&self, row: usize, site: usize) -> bool {
        get_bit(self.z_row(row), site)
    }

    fn push_generator_words(&mut self, x: &[u64], z: &[u64], negative: bool) {
        self.xs.extend_from_slice(&x[..self.words]);
        self.zs.extend_from_slice(&z[..self.words]);
        self.negative.push(negative);
    }

    fn remove_generator(&mut self, row: usize) {
        let last = self.num_generators() - 1;
        if row != last {
            let w = self.words;
            for k in 0..w {
                self.xs.swap(row * w + k, last * w + k);
                self.zs.swap(row * w + k, last * w + k);
            }
            self.negative.swap(row, last);
        }
        self.xs.truncate(last * self.words);
        self.zs.truncate(last * self.words);
        self.negative.pop();
    }

    /// `g_dst ← g_dst · g_src` for two commuting generators.
    fn row_mul(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let w = self.words;
        let k = {
            let (xd, zd) = (&self.xs[dst * w..(dst + 1) * w], &self.zs[dst * w..(dst + 1) * w]);
            let (xs, zs) = (&self.xs[src * w..(src + 1) * w], &self.zs[src * w..(src + 1) * w]);
            product_phase_exponent(xd, zd, xs, zs)
        };
        debug_assert!(k % 2 == 0, "row product of anticommuting generators");
        let flip = (k == 2) ^ self.negative[src];
        self.negative[dst] ^= flip;
        for j in 0..w {
            let xv = self.xs[src * w + j];
            let zv = self.zs[src * w + j];
            self.xs[dst * w + j] ^= xv;
            self.zs[dst * w + j] ^= zv;
        }
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site < self.num_sites {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange {
                site,
                num_sites: self.num_sites,
            })
        }
    }

    /// Conjugates every generator by `gate` acting on `(a, b)`.
    pub fn apply_clifford2(&mut self, gate: &TwoQubitClifford, a: usize, b: usize) -> Result<()> {
        self.check_site(a)?;
        self.check_site(b)?;
        if a == b {
            return Err(Error::RepeatedSite(a));
        }
        let w = self.words;
        let (wa, ma) = (a / 64, 1u64 << (a % 64));
        let (wb, mb) = (b / 64, 1u64 << (b % 64));
        for i in 0..self.num_generators() {
            let base = i * w;
            let code = ((self.xs[base + wa] & ma != 0) as u8)
                | ((self.zs[base + wa] & ma != 0) as u8) << 1
                | ((self.xs[base + wb] & mb != 0) as u8) << 2
                | ((self.zs[base + wb] & mb != 0) as u8) << 3;
            if code == 0 {
                continue;
            }
            let (img, flip) = gate.conjugate_local(code);
            let put = |words: &mut Vec<u64>, idx: usize, mask: u64, on: bool| {
                if on {
                    words[idx] |= mask;
                } else {
                    words[idx] &= !mask;
                }
            };
            put(&mut self.xs, base + wa, ma, img & 1 != 0);
            put(&mut self.zs, base + wa, ma, img & 2 != 0);
            put(&mut self.xs, base + wb, mb, img & 4 != 0);
            put(&mut self.zs, base + wb, mb, img & 8 != 0);
            self.negative[i] ^= flip;
        }
        Ok(())
    }

    /// Applies element `gate` of the two-qubit Clifford group to `(a, b)`.
    pub fn apply_two_qubit_clifford(&mut self, gate: CliffordIndex, a: usize, b: usize) -> Result<()> {
        self.apply_clifford2(&clifford2_table()[gate.get()], a, b)
    }

    /// Measures `Z_site`, drawing a fair coin from `rng` when the outcome is random.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, site: usize, rng: &mut R) -> Result<Measurement> {
        self.measure_z_with(site, || rng.random::<bool>())
    }

    /// Measures `Z_site`; `coin` is called exactly once if and only if the
    /// outcome is random, and its value becomes the outcome.
    pub fn measure_z_with<F: FnOnce() -> bool>(&mut self, site: usize, coin: F) -> Result<Measurement> {
        self.check_site(site)?;
        let m = self.num_generators();
        let anticommuting: Vec<usize> = (0..m).filter(|&r| self.x_bit(r, site)).collect();
        if let Some((&pivot, rest)) = anticommuting.split_first() {
            for &r in rest {
                self.row_mul(r, pivot);
            }
            let outcome = coin();
            let w = self.words;
            self.xs[pivot * w..(pivot + 1) * w].fill(0);
            self.zs[pivot * w..(pivot + 1) * w].fill(0);
            set_bit(&mut self.zs[pivot * w..(pivot + 1) * w], site, true);
            self.negative[pivot] = outcome;
            return Ok(Measurement {
                outcome,
                kind: MeasurementKind::Random,
            });
        }
        let target = PauliOperator::single(self.num_sites, site, Pauli::Z);
        match self.group_sign_of(&target) {
            Some(negative) => Ok(Measurement {
                outcome: negative,
                kind: MeasurementKind::Deterministic,
            }),
            None => {
                let outcome = coin();
                let zero = vec![0; self.words];
                self.push_generator_words(&zero, &single_bit(self.words, site), outcome);
                Ok(Measurement {
                    outcome,
                    kind: MeasurementKind::Purifying,
                })
            }
        }
    }

    /// Applies the reset channel `ρ → tr_site(ρ) ⊗ |0⟩⟨0|`.
    pub fn reset(&mut self, site: usize) -> Result<()> {
        self.trace_out(site)?;
        let zero = vec![0; self.words];
        self.push_generator_words(&zero, &single_bit(self.words, site), false);
        Ok(())
    }

    /// Replaces `site` by the maximally mixed state, `ρ → tr_site(ρ) ⊗ 1/2`.
    /// The site stays in the register.
    pub fn trace_out(&mut self, site: usize) -> Result<()> {
        self.check_site(site)?;
        let m = self.num_generators();
        let mut remove = Vec::with_capacity(2);
        let with_x: Vec<usize> = (0..m).filter(|&r| self.x_bit(r, site)).collect();
        if let Some((&px, rest)) = with_x.split_first() {
            for &r in rest {
                self.row_mul(r, px);
            }
            remove.push(px);
        }
        let with_z: Vec<usize> = (0..m)
            .filter(|&r| !self.x_bit(r, site) && self.z_bit(r, site))
            .collect();
        if let Some((&pz, rest)) = with_z.split_first() {
            for &r in rest {
                self.row_mul(r, pz);
            }
            remove.push(pz);
        }
        remove.sort_unstable_by(|a, b| b.cmp(a));
        for r in remove {
            self.remove_generator(r);
        }
        Ok(())
    }

    /// If `±p` (ignoring the sign of `p`) belongs to the stabilizer group,
    /// returns whether the group element is `-p`.
    pub fn group_sign_of(&self, p: &PauliOperator) -> Option<bool> {
        SignedBasis::new(self).sign_of(p)
    }

    /// Row-reduces the generators in place (x columns first, then z) and
    /// returns the pivot column of each row. The group is unchanged.
    pub(crate) fn echelonize(&mut self) -> Vec<usize> {
        let n = self.num_sites;
        let m = self.num_generators();
        let mut pivots = Vec::with_capacity(m);
        let mut rank = 0;
        for col in 0..2 * n {
            if rank == m {
                break;
            }
            let bit = |s: &Self, r: usize| if col < n { s.x_bit(r, col) } else { s.z_bit(r, col - n) };
            let Some(p) = (rank..m).find(|&r| bit(self, r)) else {
                continue;
            };
            self.swap_generators(rank, p);
            for r in 0..m {
                if r != rank && bit(self, r) {
                    self.row_mul(r, rank);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        pivots
    }

    fn swap_generators(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words;
        for k in 0..w {
            self.xs.swap(a * w + k, b * w + k);
            self.zs.swap(a * w + k, b * w + k);
        }
        self.negative.swap(a, b);
    }

    /// Applies an arbitrary sequence of invertible row operations, as produced
    /// by re-deriving a generating set. Used to check invariance properties.
    pub fn regenerate<R: Rng + ?Sized>(&mut self, rng: &mut R, rounds: usize) {
        let m = self.num_generators();
        if m < 2 {
            return;
        }
        for _ in 0..rounds {
            let a = rng.random_range(0..m);
            let b = rng.random_range(0..m);
            if a == b {
                self.swap_generators(a, (a + 1) % m);
            } else {
                self.row_mul(a, b);
            }
        }
    }

    /// The `m × 2|region|` matrix of generator bits on `region`; column `2k`
    /// is the X bit and `2k + 1` the Z bit of `region[k]`. Signs are dropped.
    pub fn restrict_generators(&self, region: &[usize]) -> Result<BitMatrix> {
        for &s in region {
            self.check_site(s)?;
        }
        let mut out = BitMatrix::zeros(self.num_generators(), 2 * region.len());
        for r in 0..self.num_generators() {
            for (k, &s) in region.iter().enumerate() {
                if self.x_bit(r, s) {
                    out.set(r, 2 * k, true);
                }
                if self.z_bit(r, s) {
                    out.set(r, 2 * k + 1, true);
                }
            }
        }
        Ok(out)
    }

    /// Full `m × 2n` generator matrix, X block then Z block.
    pub fn generator_matrix(&self) -> BitMatrix {
        let n = self.num_sites;
        let mut out = BitMatrix::zeros(self.num_generators(), 2 * n);
        for r in 0..self.num_generators() {
            for s in 0..n {
                if self.x_bit(r, s) {
                    out.set(r, s, true);
                }
                if self.z_bit(r, s) {
                    out.set(r, n + s, true);
                }
            }
        }
        out
    }

    /// Verifies pairwise commutation, GF(2) independence and `m ≤ n`.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let m = self.num_generators();
        if m > self.num_sites {
            return Err(format!("{m} generators on {} sites", self.num_sites));
        }
        for i in 0..m {
            for j in i + 1..m {
                let mut parity = 0u32;
                for w in 0..self.words {
                    parity ^= ((self.x_row(i)[w] & self.z_row(j)[w]) ^ (self.z_row(i)[w] & self.x_row(j)[w]))
                        .count_ones();
                }
                if parity % 2 == 1 {
                    return Err(format!("generators {i} and {j} anticommute"));
                }
            }
        }
        let rank = self.generator_matrix().rank();
        if rank != m {
            return Err(format!("generators are dependent (rank {rank} < {m})"));
        }
        Ok(())
    }
}

/// A row-reduced copy of a stabilizer group that answers membership queries
/// with signs in `O(m · n / 64)` each.
pub struct SignedBasis {
    reduced: StabilizerState,
    pivots: Vec<usize>,
}

impl SignedBasis {
    pub fn new(state: &StabilizerState) -> Self {
        let mut reduced = state.clone();
        let pivots = reduced.echelonize();
        Self { reduced, pivots }
    }

    /// `Some(negative)` when `±p` is in the group, `None` otherwise.
    pub fn sign_of(&self, p: &PauliOperator) -> Option<bool> {
        let g = &self.reduced;
        assert_eq!(p.num_sites(), g.num_sites);
        let n = g.num_sites;
        let w = g.words;
        let mut rx = p.x_words().to_vec();
        let mut rz = p.z_words().to_vec();
        let mut acc_x = vec![0u64; w];
        let mut acc_z = vec![0u64; w];
        let mut acc_k = 0u32;
        for (row, &col) in self.pivots.iter().enumerate() {
            let hit = if col < n { get_bit(&rx, col) } else { get_bit(&rz, col - n) };
            if !hit {
                continue;
            }
            let (gx, gz) = (g.x_row(row), g.z_row(row));
            acc_k += product_phase_exponent(&acc_x, &acc_z, gx, gz);
            if g.negative[row] {
                acc_k += 2;
            }
            for j in 0..w {
                acc_x[j] ^= gx[j];
                acc_z[j] ^= gz[j];
                rx[j] ^= gx[j];
                rz[j] ^= gz[j];
            }
        }
        if rx.iter().chain(&rz).any(|&v| v != 0) {
            return None;
        }
        debug_assert!(acc_k % 2 == 0);
        Some(acc_k % 4 == 2)
    }

    /// Rows of the reduced basis whose X part vanishes, i.e. a basis of the
    /// Z-type subgroup (the x-column pivots come first).
    pub fn z_type_rows(&self) -> Vec<PauliOperator> {
        let n = self.reduced.num_sites;
        self.pivots
            .iter()
            .enumerate()
            .filter(|(_, &c)| c >= n)
            .map(|(r, _)| self.reduced.generator(r))
            .collect()
    }
}

fn single_bit(words: usize, index: usize) -> Vec<u64> {
    let mut v = vec![0; words];
    set_bit(&mut v, index, true);
    v
}
