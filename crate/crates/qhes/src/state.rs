//! Dense statevector representation, register bookkeeping, and primitive
//! gate application.
//!
//! Conventions (used everywhere in this crate):
//!
//! * Registers are named, disjoint, contiguous qubit groups in a fixed order.
//! * Within a group, index 0 is the highest-order qubit ("the first qubit").
//! * The basis index of a computational state is the big-endian concatenation
//!   of the group bit patterns in layout order, so global qubit `q` owns bit
//!   `total − 1 − q` of the basis index.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Tolerance for normalization checks.
pub const NORM_TOL: f64 = 1e-12;

/// Largest statevector the simulator will allocate (2^cap amplitudes).
pub const QUBIT_CAP: usize = 24;

/// Scale of the guaranteed per-basis-state overlap of [`random_init_state`]:
/// every computational amplitude of the drawn physical state satisfies
/// |λ|² ≥ 0.042 / 2^N.
pub const MIN_BASIS_OVERLAP_SCALE: f64 = 0.042;

/// Handle to a register group inside a [`RegisterLayout`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupId(usize);

/// Named, disjoint qubit groups covering qubits `0..total`.
#[derive(Clone, Debug)]
pub struct RegisterLayout {
    names: Vec<String>,
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl RegisterLayout {
    /// Build a layout from `(name, size)` pairs in register order.
    pub fn new(groups: &[(&str, usize)]) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Layout("layout needs at least one group".into()));
        }
        let mut names = Vec::new();
        let mut sizes = Vec::new();
        let mut offsets = Vec::new();
        let mut total = 0usize;
        for &(name, size) in groups {
            if size == 0 {
                return Err(Error::Layout(format!("group '{name}' has size 0")));
            }
            if names.iter().any(|n| n == name) {
                return Err(Error::Layout(format!("duplicate group name '{name}'")));
            }
            names.push(name.to_string());
            sizes.push(size);
            offsets.push(total);
            total += size;
        }
        if total > QUBIT_CAP {
            return Err(Error::Resource(format!(
                "layout needs {total} qubits, cap is {QUBIT_CAP}"
            )));
        }
        Ok(RegisterLayout {
            names,
            sizes,
            offsets,
            total,
        })
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn dim(&self) -> usize {
        1 << self.total
    }

    /// Look up a group by name.
    pub fn group(&self, name: &str) -> Result<GroupId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(GroupId)
            .ok_or_else(|| Error::Layout(format!("unknown group '{name}'")))
    }

    pub fn has_group(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    pub fn size(&self, g: GroupId) -> usize {
        self.sizes[g.0]
    }

    pub fn name(&self, g: GroupId) -> &str {
        &self.names[g.0]
    }

    /// Global index of qubit `i` of group `g` (i = 0 is the highest-order qubit).
    pub fn qubit(&self, g: GroupId, i: usize) -> Result<usize> {
        if i >= self.sizes[g.0] {
            return Err(Error::Layout(format!(
                "qubit {i} out of range for group '{}' of size {}",
                self.names[g.0], self.sizes[g.0]
            )));
        }
        Ok(self.offsets[g.0] + i)
    }

    /// Bit position (in basis-index space) of global qubit `q`.
    pub fn bit_of_qubit(&self, q: usize) -> usize {
        self.total - 1 - q
    }

    /// Right-shift that brings group `g`'s field to the low bits of an index.
    pub fn field_shift(&self, g: GroupId) -> usize {
        self.total - self.offsets[g.0] - self.sizes[g.0]
    }

    /// Mask of group `g`'s field, already shifted into place.
    pub fn field_mask(&self, g: GroupId) -> usize {
        ((1usize << self.sizes[g.0]) - 1) << self.field_shift(g)
    }

    /// Value of group `g`'s field in basis index `i`.
    pub fn field_of(&self, g: GroupId, i: usize) -> usize {
        (i >> self.field_shift(g)) & ((1 << self.sizes[g.0]) - 1)
    }

    /// Basis index `i` with group `g`'s field replaced by `x`.
    pub fn with_field(&self, g: GroupId, i: usize, x: usize) -> usize {
        (i & !self.field_mask(g)) | (x << self.field_shift(g))
    }

    /// `(mask, value)` selecting basis states where group `g` matches `pattern`
    /// ('0'/'1' string, first character = highest-order qubit).
    pub fn pattern_mask(&self, g: GroupId, pattern: &str) -> Result<(usize, usize)> {
        let bits = parse_bits(pattern)?;
        if bits.len() != self.sizes[g.0] {
            return Err(Error::Layout(format!(
                "pattern '{pattern}' has length {} but group '{}' has {} qubits",
                bits.len(),
                self.names[g.0],
                self.sizes[g.0]
            )));
        }
        let mut value = 0usize;
        for b in &bits {
            value = (value << 1) | usize::from(*b);
        }
        Ok((self.field_mask(g), value << self.field_shift(g)))
    }

    /// `(mask, value)` selecting basis states where every listed group is all-zeros.
    pub fn zeros_mask(&self, groups: &[GroupId]) -> (usize, usize) {
        let mut mask = 0usize;
        for &g in groups {
            mask |= self.field_mask(g);
        }
        (mask, 0)
    }

    /// `(mask, value)` fixing qubit `i` of group `g` to `bit`.
    pub fn qubit_mask(&self, g: GroupId, i: usize, bit: bool) -> Result<(usize, usize)> {
        let q = self.qubit(g, i)?;
        let m = 1usize << self.bit_of_qubit(q);
        Ok((m, if bit { m } else { 0 }))
    }
}

fn parse_bits(pattern: &str) -> Result<Vec<bool>> {
    pattern
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Layout(format!("invalid bit character '{other}'"))),
        })
        .collect()
}

/// Whether a state is exactly normalized or carries post-projection weight < 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormFlag {
    Normalized,
    SubNormalized,
}

/// Complex amplitude array over the full register space.
#[derive(Clone, Debug)]
pub struct StateVector {
    amps: Vec<Complex64>,
    n: usize,
    flag: NormFlag,
}

impl StateVector {
    /// |0…0⟩ on `n` qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n > QUBIT_CAP {
            return Err(Error::Resource(format!("{n} qubits exceed cap {QUBIT_CAP}")));
        }
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[0] = Complex64::ONE;
        Ok(StateVector {
            amps,
            n,
            flag: NormFlag::Normalized,
        })
    }

    /// Computational basis state given by `bits` over the whole layout
    /// (big-endian in layout order).
    pub fn basis_state(layout: &RegisterLayout, bits: &str) -> Result<Self> {
        let parsed = parse_bits(bits)?;
        if parsed.len() != layout.total() {
            return Err(Error::Layout(format!(
                "bit pattern length {} does not match layout total {}",
                parsed.len(),
                layout.total()
            )));
        }
        let mut index = 0usize;
        for b in &parsed {
            index = (index << 1) | usize::from(*b);
        }
        let mut state = StateVector::zero_state(layout.total())?;
        state.amps[0] = Complex64::ZERO;
        state.amps[index] = Complex64::ONE;
        Ok(state)
    }

    /// Wrap an amplitude vector (length must be a power of two).
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::Validation(format!(
                "amplitude array length {} is not a power of two",
                amps.len()
            )));
        }
        let n = amps.len().trailing_zeros() as usize;
        let mut state = StateVector {
            amps,
            n,
            flag: NormFlag::SubNormalized,
        };
        if (state.norm_sqr() - 1.0).abs() <= NORM_TOL {
            state.flag = NormFlag::Normalized;
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, i: usize) -> Complex64 {
        self.amps[i]
    }

    pub fn norm_flag(&self) -> NormFlag {
        self.flag
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sqr() <= NORM_TOL * NORM_TOL
    }

    /// Rescale to unit norm.
    pub fn renormalize(&mut self) -> Result<()> {
        let n2 = self.norm_sqr();
        if n2 <= NORM_TOL * NORM_TOL {
            return Err(Error::DegenerateInput(
                "cannot renormalize the zero vector".into(),
            ));
        }
        let inv = 1.0 / n2.sqrt();
        for a in &mut self.amps {
            *a *= inv;
        }
        self.flag = NormFlag::Normalized;
        Ok(())
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::Validation(format!(
                "dimension mismatch: {} vs {} qubits",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Apply a gate (unitary on its targets, restricted by its controls).
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.check_bounds(self.n)?;
        let k = gate.targets.len();
        let block = 1usize << k;
        // Bit position of each target; target 0 is the block's highest bit.
        let tbits: Vec<usize> = gate.targets.iter().map(|&q| self.n - 1 - q).collect();
        // Offset of each block sub-index in basis-index space.
        let mut offs = vec![0usize; block];
        for (sub, off) in offs.iter_mut().enumerate() {
            for (j, &tb) in tbits.iter().enumerate() {
                if (sub >> (k - 1 - j)) & 1 == 1 {
                    *off |= 1 << tb;
                }
            }
        }
        let (cmask, cval) = control_mask(&gate.controls, self.n);
        let mut sorted_tbits = tbits.clone();
        sorted_tbits.sort_unstable();
        let mut scratch = vec![Complex64::ZERO; block];
        let fibers = self.amps.len() >> k;
        for m in 0..fibers {
            // Insert a zero bit at each target position (ascending).
            let mut base = m;
            for &p in &sorted_tbits {
                let low = base & ((1 << p) - 1);
                base = ((base >> p) << (p + 1)) | low;
            }
            if base & cmask != cval {
                continue;
            }
            for (sub, off) in offs.iter().enumerate() {
                scratch[sub] = self.amps[base | off];
            }
            for (row, off) in offs.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                let mrow = &gate.matrix[row * block..(row + 1) * block];
                for (col, x) in scratch.iter().enumerate() {
                    acc += mrow[col] * x;
                }
                self.amps[base | off] = acc;
            }
        }
        Ok(())
    }

    /// Apply a dense unitary block to a whole register group, optionally under
    /// controls (control qubits must lie outside the group).
    pub fn apply_block_on_group(
        &mut self,
        layout: &RegisterLayout,
        group: GroupId,
        matrix: &[Complex64],
        controls: &[(usize, bool)],
    ) -> Result<()> {
        let w = layout.size(group);
        let len = 1usize << w;
        if matrix.len() != len * len {
            return Err(Error::Validation(format!(
                "block has {} entries, group '{}' needs {}",
                matrix.len(),
                layout.name(group),
                len * len
            )));
        }
        self.check_layout(layout)?;
        let fmask = layout.field_mask(group);
        let (cmask, cval) = control_mask(controls, self.n);
        if cmask & fmask != 0 {
            return Err(Error::Validation(
                "controls overlap the target group".into(),
            ));
        }
        let mut out = vec![Complex64::ZERO; len];
        self.for_each_fiber(layout, group, cmask, cval, |scratch| {
            for (row, o) in out.iter_mut().enumerate() {
                let mrow = &matrix[row * len..(row + 1) * len];
                let mut acc = Complex64::ZERO;
                for (col, x) in scratch.iter().enumerate() {
                    acc += mrow[col] * x;
                }
                *o = acc;
            }
            scratch.copy_from_slice(&out);
        });
        Ok(())
    }

    /// Gather/transform/scatter every fiber of `group`'s field whose
    /// surrounding bits match `(cmask, cval)`.
    pub(crate) fn for_each_fiber<F>(
        &mut self,
        layout: &RegisterLayout,
        group: GroupId,
        cmask: usize,
        cval: usize,
        mut f: F,
    ) where
        F: FnMut(&mut [Complex64]),
    {
        let s = layout.field_shift(group);
        let w = layout.size(group);
        let len = 1usize << w;
        let stride = 1usize << s;
        let highs = self.amps.len() >> (s + w);
        let mut scratch = vec![Complex64::ZERO; len];
        for high in 0..highs {
            let hbase = high << (s + w);
            for low in 0..stride {
                let base = hbase | low;
                if base & cmask != cval {
                    continue;
                }
                for x in 0..len {
                    scratch[x] = self.amps[base + (x << s)];
                }
                f(&mut scratch);
                for x in 0..len {
                    self.amps[base + (x << s)] = scratch[x];
                }
            }
        }
    }

    /// Permute `group`'s field value by `perm` on every fiber whose basis index
    /// satisfies `pred` (evaluated with the field bits zeroed).
    pub(crate) fn permute_field_where<P, Q>(
        &mut self,
        layout: &RegisterLayout,
        group: GroupId,
        pred: P,
        perm: Q,
    ) where
        P: Fn(usize) -> bool,
        Q: Fn(&mut [Complex64]),
    {
        let s = layout.field_shift(group);
        let w = layout.size(group);
        let len = 1usize << w;
        let stride = 1usize << s;
        let highs = self.amps.len() >> (s + w);
        let mut scratch = vec![Complex64::ZERO; len];
        for high in 0..highs {
            let hbase = high << (s + w);
            for low in 0..stride {
                let base = hbase | low;
                if !pred(base) {
                    continue;
                }
                for x in 0..len {
                    scratch[x] = self.amps[base + (x << s)];
                }
                perm(&mut scratch);
                for x in 0..len {
                    self.amps[base + (x << s)] = scratch[x];
                }
            }
        }
    }

    /// Σ|amplitude|² over basis states where `group` matches `pattern`.
    pub fn pattern_probability(
        &self,
        layout: &RegisterLayout,
        group: GroupId,
        pattern: &str,
    ) -> Result<f64> {
        self.check_layout(layout)?;
        let (mask, val) = layout.pattern_mask(group, pattern)?;
        Ok(self.masked_probability(mask, val))
    }

    pub fn masked_probability(&self, mask: usize, val: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == val)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Zero all amplitudes where `group` does not match `pattern`; returns the
    /// retained probability. The state becomes sub-normalized (possibly zero).
    pub fn project_pattern(
        &mut self,
        layout: &RegisterLayout,
        group: GroupId,
        pattern: &str,
    ) -> Result<f64> {
        self.check_layout(layout)?;
        let (mask, val) = layout.pattern_mask(group, pattern)?;
        Ok(self.project_mask(mask, val))
    }

    pub fn project_mask(&mut self, mask: usize, val: usize) -> f64 {
        let mut kept = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == val {
                kept += a.norm_sqr();
            } else {
                *a = Complex64::ZERO;
            }
        }
        self.flag = NormFlag::SubNormalized;
        kept
    }

    /// Multiply amplitudes of basis states matching `(mask, val)` by `phase`.
    pub fn phase_mask(&mut self, mask: usize, val: usize, phase: Complex64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == val {
                *a *= phase;
            }
        }
    }

    /// Extract the state of one group given that all other bits are fixed by
    /// `(mask, val)`; the amplitudes are taken verbatim (not renormalized).
    pub fn extract_field(
        &self,
        layout: &RegisterLayout,
        group: GroupId,
        mask: usize,
        val: usize,
    ) -> Result<StateVector> {
        self.check_layout(layout)?;
        let s = layout.field_shift(group);
        let w = layout.size(group);
        if mask & layout.field_mask(group) != 0 {
            return Err(Error::Layout("fixed mask overlaps extracted group".into()));
        }
        if mask | layout.field_mask(group) != (1 << self.n) - 1 {
            return Err(Error::Layout(
                "fixed mask must cover all qubits outside the extracted group".into(),
            ));
        }
        let amps: Vec<Complex64> = (0..1usize << w).map(|x| self.amps[val | (x << s)]).collect();
        StateVector::from_amplitudes(amps)
    }

    /// Seeded binomial draw of how many of `shots` measurements match `(mask, val)`.
    pub fn sample_mask(&self, mask: usize, val: usize, shots: u64, seed: u64) -> u64 {
        let p = self.masked_probability(mask, val).clamp(0.0, 1.0);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        Binomial::new(shots, p)
            .expect("probability in [0,1]")
            .sample(&mut rng)
    }

    fn check_layout(&self, layout: &RegisterLayout) -> Result<()> {
        if layout.total() != self.n {
            return Err(Error::Layout(format!(
                "layout has {} qubits, state has {}",
                layout.total(),
                self.n
            )));
        }
        Ok(())
    }
}

pub(crate) fn control_mask(controls: &[(usize, bool)], n: usize) -> (usize, usize) {
    let mut mask = 0usize;
    let mut val = 0usize;
    for &(q, bit) in controls {
        let b = 1usize << (n - 1 - q);
        mask |= b;
        if bit {
            val |= b;
        }
    }
    (mask, val)
}

/// A primitive gate: a unitary on one or more target qubits, restricted to the
/// subspace where every control qubit carries its required value.
#[derive(Clone, Debug)]
pub struct GateOp {
    controls: Vec<(usize, bool)>,
    targets: Vec<usize>,
    matrix: Vec<Complex64>,
}

impl GateOp {
    /// Unitary block on `targets` (row-major, dimension 2^targets).
    pub fn block(
        controls: Vec<(usize, bool)>,
        targets: Vec<usize>,
        matrix: Vec<Complex64>,
    ) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Validation("gate needs at least one target".into()));
        }
        let dim = 1usize << targets.len();
        if matrix.len() != dim * dim {
            return Err(Error::Validation(format!(
                "matrix has {} entries, expected {}",
                matrix.len(),
                dim * dim
            )));
        }
        let mut seen = targets.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != targets.len() {
            return Err(Error::Validation("duplicate target qubits".into()));
        }
        for &(c, _) in &controls {
            if targets.contains(&c) {
                return Err(Error::Validation(format!(
                    "control qubit {c} overlaps targets"
                )));
            }
        }
        check_unitary(dim, &matrix)?;
        Ok(GateOp {
            controls,
            targets,
            matrix,
        })
    }

    /// Single-qubit unitary.
    pub fn single(q: usize, m: [[Complex64; 2]; 2]) -> Result<Self> {
        GateOp::block(vec![], vec![q], vec![m[0][0], m[0][1], m[1][0], m[1][1]])
    }

    /// Controlled single-qubit unitary.
    pub fn controlled_single(
        controls: Vec<(usize, bool)>,
        q: usize,
        m: [[Complex64; 2]; 2],
    ) -> Result<Self> {
        GateOp::block(controls, vec![q], vec![m[0][0], m[0][1], m[1][0], m[1][1]])
    }

    /// Multi-controlled X: flips `target` when every control matches.
    pub fn mcx(controls: Vec<(usize, bool)>, target: usize) -> Result<Self> {
        GateOp::block(
            controls,
            vec![target],
            vec![
                Complex64::ZERO,
                Complex64::ONE,
                Complex64::ONE,
                Complex64::ZERO,
            ],
        )
    }

    pub fn x(q: usize) -> GateOp {
        GateOp::mcx(vec![], q).expect("X is unitary")
    }

    pub fn hadamard(q: usize) -> GateOp {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        GateOp::single(
            q,
            [
                [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
                [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
            ],
        )
        .expect("Hadamard is unitary")
    }

    /// Adjoint gate (same controls, conjugate-transposed matrix).
    pub fn inverse(&self) -> GateOp {
        let dim = 1usize << self.targets.len();
        let mut adj = vec![Complex64::ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                adj[c * dim + r] = self.matrix[r * dim + c].conj();
            }
        }
        GateOp {
            controls: self.controls.clone(),
            targets: self.targets.clone(),
            matrix: adj,
        }
    }

    pub fn controls(&self) -> &[(usize, bool)] {
        &self.controls
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    fn check_bounds(&self, n: usize) -> Result<()> {
        for &q in &self.targets {
            if q >= n {
                return Err(Error::Layout(format!("target qubit {q} out of range")));
            }
        }
        for &(q, _) in &self.controls {
            if q >= n {
                return Err(Error::Layout(format!("control qubit {q} out of range")));
            }
        }
        Ok(())
    }
}

fn check_unitary(dim: usize, m: &[Complex64]) -> Result<()> {
    // ‖U†U − I‖_max ≤ 1e-12
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = Complex64::ZERO;
            for k in 0..dim {
                acc += m[k * dim + r].conj() * m[k * dim + c];
            }
            let expect = if r == c { 1.0 } else { 0.0 };
            if (acc - expect).norm() > 1e-12 {
                return Err(Error::Validation(format!(
                    "matrix is not unitary (U†U deviates by {:.3e} at ({r},{c}))",
                    (acc - expect).norm()
                )));
            }
        }
    }
    Ok(())
}

/// Draw the physical-register amplitudes of the initializer U_I: a seeded,
/// approximately Haar-uniform state, redrawn until every computational-basis
/// overlap satisfies |λ|² ≥ 0.042/2^N so that downstream amplitude
/// amplification has a usable floor.
pub fn random_physical_amplitudes(n_phys: usize, seed: u64) -> Vec<Complex64> {
    let dim = 1usize << n_phys;
    let floor = MIN_BASIS_OVERLAP_SCALE / dim as f64;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        let n2: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        let inv = 1.0 / n2.sqrt();
        for a in &mut v {
            *a *= inv;
        }
        if v.iter().all(|a| a.norm_sqr() >= floor) {
            return v;
        }
    }
    unreachable!("overlap floor rejection did not terminate");
}

/// The initializer U_I applied to |0…0⟩: the physical group (the first group of
/// the layout) carries a seeded random state, every other group is |0…0⟩.
pub fn random_init_state(layout: &RegisterLayout, seed: u64) -> Result<StateVector> {
    let phys = layout.group("physical")?;
    if layout.field_shift(phys) + layout.size(phys) != layout.total() {
        return Err(Error::Layout("'physical' must be the first group".into()));
    }
    let v = random_physical_amplitudes(layout.size(phys), seed);
    let mut state = StateVector::zero_state(layout.total())?;
    state.amps[0] = Complex64::ZERO;
    let s = layout.field_shift(phys);
    for (x, a) in v.into_iter().enumerate() {
        state.amps[x << s] = a;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_qubit_layout() -> RegisterLayout {
        RegisterLayout::new(&[("physical", 2)]).unwrap()
    }

    #[test]
    fn basis_state_two_qubits() {
        let layout = two_qubit_layout();
        let s = StateVector::basis_state(&layout, "00").unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::ONE);
        assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn basis_state_big_endian() {
        let layout = RegisterLayout::new(&[("physical", 3)]).unwrap();
        let s = StateVector::basis_state(&layout, "110").unwrap();
        assert_eq!(s.amplitude(6), Complex64::ONE);
    }

    #[test]
    fn basis_state_wrong_length() {
        let layout = two_qubit_layout();
        assert!(matches!(
            StateVector::basis_state(&layout, "000"),
            Err(Error::Layout(_))
        ));
    }

    #[test]
    fn hadamard_on_zero() {
        let layout = RegisterLayout::new(&[("physical", 1)]).unwrap();
        let mut s = StateVector::basis_state(&layout, "0").unwrap();
        s.apply(&GateOp::hadamard(0)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.amplitude(0).re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitude(1).re, h, epsilon = 1e-15);
    }

    #[test]
    fn x_on_mark_qubit() {
        let layout = RegisterLayout::new(&[("physical", 2), ("mark", 1)]).unwrap();
        let mut s = StateVector::basis_state(&layout, "010").unwrap();
        let mark = layout.group("mark").unwrap();
        s.apply(&GateOp::x(layout.qubit(mark, 0).unwrap())).unwrap();
        assert_eq!(s.amplitude(0b011), Complex64::ONE);
    }

    #[test]
    fn controlled_x_semantics() {
        let layout = two_qubit_layout();
        let mut s = StateVector::basis_state(&layout, "10").unwrap();
        s.apply(&GateOp::mcx(vec![(0, true)], 1).unwrap()).unwrap();
        assert_eq!(s.amplitude(0b11), Complex64::ONE);

        // control unsatisfied: |00⟩ stays put
        let mut s = StateVector::basis_state(&layout, "00").unwrap();
        s.apply(&GateOp::mcx(vec![(0, true)], 1).unwrap()).unwrap();
        assert_eq!(s.amplitude(0b00), Complex64::ONE);
    }

    #[test]
    fn control_on_zero_polarity() {
        let layout = two_qubit_layout();
        let mut s = StateVector::basis_state(&layout, "00").unwrap();
        s.apply(&GateOp::mcx(vec![(0, false)], 1).unwrap()).unwrap();
        assert_eq!(s.amplitude(0b01), Complex64::ONE);
    }

    #[test]
    fn controlled_block_on_group() {
        // control required=1 on |1⟩⊗|ψ⟩ applies X on the block
        let layout = RegisterLayout::new(&[("ctrl", 1), ("tgt", 1)]).unwrap();
        let tgt = layout.group("tgt").unwrap();
        let x = vec![
            Complex64::ZERO,
            Complex64::ONE,
            Complex64::ONE,
            Complex64::ZERO,
        ];
        let mut s = StateVector::basis_state(&layout, "10").unwrap();
        s.apply_block_on_group(&layout, tgt, &x, &[(0, true)]).unwrap();
        assert_eq!(s.amplitude(0b11), Complex64::ONE);

        let mut s = StateVector::basis_state(&layout, "00").unwrap();
        s.apply_block_on_group(&layout, tgt, &x, &[(0, true)]).unwrap();
        assert_eq!(s.amplitude(0b00), Complex64::ONE);
    }

    #[test]
    fn non_unitary_matrix_rejected() {
        let m = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]];
        assert!(matches!(GateOp::single(0, m), Err(Error::Validation(_))));
    }

    #[test]
    fn pattern_probability_uniform() {
        let layout = two_qubit_layout();
        let g = layout.group("physical").unwrap();
        let mut s = StateVector::basis_state(&layout, "00").unwrap();
        s.apply(&GateOp::hadamard(0)).unwrap();
        s.apply(&GateOp::hadamard(1)).unwrap();
        assert_abs_diff_eq!(
            s.pattern_probability(&layout, g, "00").unwrap(),
            0.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn pattern_probability_basis_cases() {
        let layout = two_qubit_layout();
        let g = layout.group("physical").unwrap();
        let s = StateVector::basis_state(&layout, "10").unwrap();
        assert_eq!(s.pattern_probability(&layout, g, "10").unwrap(), 1.0);
        assert_eq!(s.pattern_probability(&layout, g, "01").unwrap(), 0.0);
    }

    #[test]
    fn project_bell_state_mark() {
        let layout = RegisterLayout::new(&[("physical", 1), ("mark", 1)]).unwrap();
        let mark = layout.group("mark").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // (|00⟩+|11⟩)/√2
        let mut s = StateVector::from_amplitudes(vec![
            c(h, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            c(h, 0.0),
        ])
        .unwrap();
        let kept = s.project_pattern(&layout, mark, "0").unwrap();
        assert_abs_diff_eq!(kept, 0.5, epsilon = 1e-12);
        assert_eq!(s.norm_flag(), NormFlag::SubNormalized);
        assert_abs_diff_eq!(s.amplitude(0).re, h, epsilon = 1e-15);
        assert_eq!(s.amplitude(3), Complex64::ZERO);
    }

    #[test]
    fn project_idempotent_and_orthogonal() {
        let layout = two_qubit_layout();
        let g = layout.group("physical").unwrap();
        let mut s = StateVector::basis_state(&layout, "10").unwrap();
        s.project_pattern(&layout, g, "10").unwrap();
        assert_eq!(s.amplitude(2), Complex64::ONE);

        let mut s = StateVector::basis_state(&layout, "10").unwrap();
        let kept = s.project_pattern(&layout, g, "01").unwrap();
        assert_eq!(kept, 0.0);
        assert!(s.is_zero());
        assert_eq!(s.norm_flag(), NormFlag::SubNormalized);
    }

    #[test]
    fn fidelity_cases() {
        let layout = RegisterLayout::new(&[("physical", 1)]).unwrap();
        let zero = StateVector::basis_state(&layout, "0").unwrap();
        let one = StateVector::basis_state(&layout, "1").unwrap();
        let mut plus = zero.clone();
        plus.apply(&GateOp::hadamard(0)).unwrap();
        assert_abs_diff_eq!(zero.fidelity(&zero).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(zero.fidelity(&one).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(zero.fidelity(&plus).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn random_init_deterministic_and_normalized() {
        let layout = RegisterLayout::new(&[("physical", 2), ("mark", 1)]).unwrap();
        let a = random_init_state(&layout, 7).unwrap();
        let b = random_init_state(&layout, 7).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        assert_abs_diff_eq!(a.norm_sqr(), 1.0, epsilon = 1e-12);
        // ancillas stay |0⟩: only indices with low bit 0 populated
        for (i, amp) in a.amplitudes().iter().enumerate() {
            if i & 1 == 1 {
                assert_eq!(amp.norm(), 0.0);
            }
        }
    }

    #[test]
    fn random_init_overlap_floor_monte_carlo() {
        // Derived oracle: brute-force per-basis overlaps across 100 seeds.
        // The draw enforces min |λ_j|² ≥ 0.042/χ = 0.0105 > 0.01 at N=2, so for
        // σᶻσᶻ-type (computational-eigenbasis) Hamiltonians every seed passes.
        let mut hits = 0;
        for seed in 0..100u64 {
            let v = random_physical_amplitudes(2, seed);
            if v.iter().all(|a| a.norm_sqr() > 0.01) {
                hits += 1;
            }
        }
        assert!(hits >= 95, "only {hits}/100 seeds met the overlap floor");
    }

    #[test]
    fn sample_mask_deterministic() {
        let layout = two_qubit_layout();
        let mut s = StateVector::basis_state(&layout, "00").unwrap();
        s.apply(&GateOp::hadamard(0)).unwrap();
        let a = s.sample_mask(0b10, 0, 10_000, 3);
        let b = s.sample_mask(0b10, 0, 10_000, 3);
        assert_eq!(a, b);
        assert!((a as f64 / 10_000.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn extract_field_slices_group() {
        let layout = RegisterLayout::new(&[("physical", 1), ("coin", 1)]).unwrap();
        let phys = layout.group("physical").unwrap();
        let coin = layout.group("coin").unwrap();
        let s = StateVector::from_amplitudes(vec![
            c(0.6, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.8),
            c(0.0, 0.0),
        ])
        .unwrap();
        let (mask, val) = layout.pattern_mask(coin, "0").unwrap();
        let sub = s.extract_field(&layout, phys, mask, val).unwrap();
        assert_eq!(sub.amplitude(0), c(0.6, 0.0));
        assert_eq!(sub.amplitude(1), c(0.0, 0.8));
    }

    // -- randomized invariants ------------------------------------------------

    fn arb_state(n: usize) -> impl Strategy<Value = StateVector> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map(
            "nonzero",
            move |parts| {
                let amps: Vec<Complex64> = parts.iter().map(|&(r, i)| c(r, i)).collect();
                let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                if n2 < 1e-6 {
                    return None;
                }
                let inv = 1.0 / n2.sqrt();
                Some(
                    StateVector::from_amplitudes(amps.iter().map(|a| a * inv).collect()).unwrap(),
                )
            },
        )
    }

    fn arb_unitary2() -> impl Strategy<Value = [[Complex64; 2]; 2]> {
        // Two complex gaussians, Gram-Schmidt into a 2x2 unitary.
        (
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
            0.0f64..std::f64::consts::TAU,
        )
            .prop_filter_map("nondegenerate", |(a, b, cc, d, phi)| {
                let u = c(a, b);
                let v = c(cc, d);
                let norm = (u.norm_sqr() + v.norm_sqr()).sqrt();
                if norm < 1e-3 {
                    return None;
                }
                let (u, v) = (u / norm, v / norm);
                let phase = Complex64::from_polar(1.0, phi);
                // second column orthogonal to (u, v): (-v*, u*) up to phase
                Some([[u, -v.conj() * phase], [v, u.conj() * phase]])
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gates_preserve_norm(s in arb_state(4), m in arb_unitary2(), q in 0usize..4) {
            let mut t = s.clone();
            t.apply(&GateOp::single(q, m).unwrap()).unwrap();
            prop_assert!((t.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn gate_then_inverse_is_identity(s in arb_state(4), m in arb_unitary2(), q in 0usize..4) {
            let g = GateOp::single(q, m).unwrap();
            let mut t = s.clone();
            t.apply(&g).unwrap();
            t.apply(&g.inverse()).unwrap();
            for (a, b) in t.amplitudes().iter().zip(s.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-10);
            }
        }

        #[test]
        fn pattern_probabilities_sum_to_one(s in arb_state(4)) {
            let layout = RegisterLayout::new(&[("physical", 2), ("mark", 2)]).unwrap();
            let mark = layout.group("mark").unwrap();
            let mut total = 0.0;
            for pat in ["00", "01", "10", "11"] {
                total += s.pattern_probability(&layout, mark, pat).unwrap();
            }
            prop_assert!((total - 1.0).abs() < 1e-10);
        }

        #[test]
        fn projection_matches_probability(s in arb_state(4)) {
            let layout = RegisterLayout::new(&[("physical", 2), ("mark", 2)]).unwrap();
            let mark = layout.group("mark").unwrap();
            let p = s.pattern_probability(&layout, mark, "01").unwrap();
            let mut t = s.clone();
            let kept = t.project_pattern(&layout, mark, "01").unwrap();
            prop_assert!((kept - p).abs() < 1e-12);
            prop_assert!((t.norm_sqr() - p).abs() < 1e-12);
        }
    }
}
