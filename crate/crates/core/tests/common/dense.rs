//! Dense density-matrix simulator used as a reference. Site `k` is bit `k`
//! of the basis index.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

use hybridlab_core::clifford::TwoQubitClifford;
use hybridlab_core::pauli::{Pauli, PauliOperator};
use hybridlab_core::stabilizer::StabilizerState;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Matrix of a signed Pauli string (Hermitian `Y`).
pub fn pauli_matrix(p: &PauliOperator) -> DMatrix<C> {
    let n = p.num_sites();
    let dim = 1usize << n;
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for col in 0..dim {
        let mut row = col;
        let mut amp = if p.is_negative() { -ONE } else { ONE };
        for k in 0..n {
            let bit = (col >> k) & 1;
            match p.get(k) {
                Pauli::I => {}
                Pauli::X => row ^= 1 << k,
                Pauli::Z => {
                    if bit == 1 {
                        amp = -amp;
                    }
                }
                Pauli::Y => {
                    row ^= 1 << k;
                    amp *= if bit == 0 { I } else { -I };
                }
            }
        }
        m[(row, col)] = amp;
    }
    m
}

/// `2^{-n} Π (1 + g)` for the generators of `state`.
pub fn stabilizer_density(state: &StabilizerState) -> DMatrix<C> {
    let n = state.num_sites();
    let dim = 1usize << n;
    let mut rho = DMatrix::<C>::identity(dim, dim);
    for g in state.generators() {
        let pm = pauli_matrix(&g);
        rho = &rho * (DMatrix::<C>::identity(dim, dim) + pm);
    }
    rho / C::new(dim as f64, 0.0)
}

/// A 4×4 unitary realizing the conjugation table of `gate` (up to a global
/// phase). Local index is `bit_a + 2 bit_b`.
pub fn clifford_unitary(gate: &TwoQubitClifford) -> DMatrix<C> {
    let image = |s: &str| pauli_matrix(&gate.conjugate(&PauliOperator::parse(s).unwrap()));
    let (x0, z0, x1, z1) = (image("X_"), image("Z_"), image("_X"), image("_Z"));
    let id = DMatrix::<C>::identity(4, 4);
    let proj = (&id + &z0) * (&id + &z1) / C::new(4.0, 0.0);
    let mut phi = None;
    for k in 0..4 {
        let v = proj.column(k).into_owned();
        let norm = v.norm();
        if norm > 1e-6 {
            phi = Some(v / C::new(norm, 0.0));
            break;
        }
    }
    let phi = phi.expect("stabilizer projector has rank one");
    let mut u = DMatrix::from_element(4, 4, ZERO);
    for a in 0..2 {
        for b in 0..2 {
            let mut v = phi.clone();
            if a == 1 {
                v = &x0 * v;
            }
            if b == 1 {
                v = &x1 * v;
            }
            u.set_column(a + 2 * b, &v);
        }
    }
    u
}

/// `H ⊗ 1` on local bits `(a, b)`.
pub fn hadamard_first() -> DMatrix<C> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(4, 4, |i, j| {
        if (i >> 1) != (j >> 1) {
            ZERO
        } else if i & j & 1 == 1 {
            C::new(-s, 0.0)
        } else {
            C::new(s, 0.0)
        }
    })
}

/// CNOT with control `a` (local bit 0) and target `b`.
pub fn cnot() -> DMatrix<C> {
    let mut m = DMatrix::from_element(4, 4, ZERO);
    for col in 0..4 {
        let (a, b) = (col & 1, col >> 1);
        let row = a | ((b ^ a) << 1);
        m[(row, col)] = ONE;
    }
    m
}

#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub rho: DMatrix<C>,
}

impl Dense {
    pub fn zero(n: usize) -> Self {
        let dim = 1 << n;
        let mut rho = DMatrix::from_element(dim, dim, ZERO);
        rho[(0, 0)] = ONE;
        Self { n, rho }
    }

    pub fn from_stabilizer(state: &StabilizerState) -> Self {
        Self {
            n: state.num_sites(),
            rho: stabilizer_density(state),
        }
    }

    /// Appends a qubit in `|0⟩` as the new highest site.
    pub fn add_qubit(&mut self) {
        let dim = self.dim();
        let mut rho = DMatrix::from_element(2 * dim, 2 * dim, ZERO);
        rho.view_mut((0, 0), (dim, dim)).copy_from(&self.rho);
        self.rho = rho;
        self.n += 1;
    }

    fn dim(&self) -> usize {
        1 << self.n
    }

    /// `ρ → U ρ U†` for a 4×4 `u` on sites `(a, b)`.
    pub fn apply_local(&mut self, u: &DMatrix<C>, a: usize, b: usize) {
        let dim = self.dim();
        let (ma, mb) = (1usize << a, 1usize << b);
        let bases: Vec<usize> = (0..dim).filter(|i| i & (ma | mb) == 0).collect();
        let idx = |base: usize, k: usize| base | if k & 1 == 1 { ma } else { 0 } | if k & 2 == 2 { mb } else { 0 };
        let mut tmp = [ZERO; 4];
        for col in 0..dim {
            for &base in &bases {
                for (k, t) in tmp.iter_mut().enumerate() {
                    *t = (0..4).map(|l| u[(k, l)] * self.rho[(idx(base, l), col)]).sum();
                }
                for (k, t) in tmp.iter().enumerate() {
                    self.rho[(idx(base, k), col)] = *t;
                }
            }
        }
        for row in 0..dim {
            for &base in &bases {
                for (k, t) in tmp.iter_mut().enumerate() {
                    *t = (0..4).map(|l| self.rho[(row, idx(base, l))] * u[(k, l)].conj()).sum();
                }
                for (k, t) in tmp.iter().enumerate() {
                    self.rho[(row, idx(base, k))] = *t;
                }
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &TwoQubitClifford, a: usize, b: usize) {
        self.apply_local(&clifford_unitary(gate), a, b);
    }

    /// Probability of `outcome` for `Z_site`.
    pub fn probability(&self, site: usize, outcome: bool) -> f64 {
        (0..self.dim())
            .filter(|i| ((i >> site) & 1 == 1) == outcome)
            .map(|i| self.rho[(i, i)].re)
            .sum()
    }

    /// Projects onto `outcome` and renormalizes; returns its probability.
    pub fn measure(&mut self, site: usize, outcome: bool) -> f64 {
        let prob = self.probability(site, outcome);
        let dim = self.dim();
        let keep = |i: usize| ((i >> site) & 1 == 1) == outcome;
        for i in 0..dim {
            for j in 0..dim {
                if !keep(i) || !keep(j) {
                    self.rho[(i, j)] = ZERO;
                }
            }
        }
        self.rho /= C::new(prob, 0.0);
        prob
    }

    /// `ρ → tr_site ρ ⊗ |0⟩⟨0|`.
    pub fn reset(&mut self, site: usize) {
        let dim = self.dim();
        let m = 1usize << site;
        let mut out = DMatrix::from_element(dim, dim, ZERO);
        for i in (0..dim).filter(|i| i & m == 0) {
            for j in (0..dim).filter(|j| j & m == 0) {
                out[(i, j)] = self.rho[(i, j)] + self.rho[(i | m, j | m)];
            }
        }
        self.rho = out;
    }

    pub fn encode_bell(&mut self, site: usize, reference: usize) {
        self.reset(site);
        self.reset(reference);
        self.apply_local(&hadamard_first(), site, reference);
        self.apply_local(&cnot(), site, reference);
    }

    /// Reduced density matrix on `keep` (in the order given, first = low bit).
    pub fn reduced(&self, keep: &[usize]) -> DMatrix<C> {
        let k = keep.len();
        let mut out = DMatrix::from_element(1 << k, 1 << k, ZERO);
        let local = |i: usize| keep.iter().enumerate().fold(0, |acc, (pos, &s)| acc | (((i >> s) & 1) << pos));
        let mask: usize = keep.iter().map(|&s| 1usize << s).sum();
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                if i & !mask == j & !mask {
                    out[(local(i), local(j))] += self.rho[(i, j)];
                }
            }
        }
        out
    }

    pub fn entropy(&self, region: &[usize]) -> f64 {
        von_neumann(&self.reduced(region))
    }

    /// `log2 ‖ρ_S^{T_B}‖₁` where `ρ_S` is the state on `system` and `b ⊆ system`.
    pub fn log_negativity(&self, system: &[usize], b: &[usize]) -> f64 {
        let rho = self.reduced(system);
        let bmask: usize = b
            .iter()
            .map(|s| 1usize << system.iter().position(|x| x == s).unwrap())
            .sum();
        let dim = rho.nrows();
        let pt = DMatrix::from_fn(dim, dim, |i, j| {
            let (i2, j2) = ((i & !bmask) | (j & bmask), (j & !bmask) | (i & bmask));
            rho[(i2, j2)]
        });
        let norm: f64 = abs_eigenvalues(&pt).iter().sum();
        norm.log2()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.rho[(i, i)].re).collect()
    }

    pub fn max_abs_diff(&self, other: &DMatrix<C>) -> f64 {
        (&self.rho - other).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Absolute eigenvalues of a Hermitian matrix, as its singular values. The
/// Hermitian eigen solver returns non-finite values on some exactly
/// degenerate inputs; the SVD does not.
pub fn abs_eigenvalues(h: &DMatrix<C>) -> Vec<f64> {
    let sv: Vec<f64> = h.clone().singular_values().iter().copied().collect();
    assert!(sv.iter().all(|v| v.is_finite()), "SVD failed");
    sv
}

/// Entropy in bits; `rho` is positive semidefinite, so its singular values
/// are its eigenvalues.
pub fn von_neumann(rho: &DMatrix<C>) -> f64 {
    abs_eigenvalues(rho)
        .iter()
        .filter(|&&l| l > 1e-12)
        .map(|&l| -l * l.log2())
        .sum()
}

/// `tr(A B)`, real part.
pub fn trace_product(a: &DMatrix<C>, b: &DMatrix<C>) -> f64 {
    (a * b).trace().re
}
