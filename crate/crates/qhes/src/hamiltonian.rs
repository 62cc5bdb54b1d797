//! Pauli-string Hamiltonians, spectrum normalization (shift/zoom), exact
//! unit-time evolution, and the shifted Hamiltonian set {H_w}.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::state::{GroupId, RegisterLayout, StateVector};

/// Qubit cap for dense matrix construction.
pub const DEFAULT_DENSE_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// One weighted Pauli string; `paulis[0]` acts on the first (highest-order)
/// physical qubit.
#[derive(Clone, Debug)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub paulis: Vec<Pauli>,
}

impl PauliTerm {
    pub fn parse(coefficient: f64, string: &str) -> Result<PauliTerm> {
        let paulis: Option<Vec<Pauli>> = string.chars().map(Pauli::from_char).collect();
        match paulis {
            Some(paulis) if !paulis.is_empty() => Ok(PauliTerm {
                coefficient,
                paulis,
            }),
            _ => Err(Error::Validation(format!(
                "malformed Pauli string '{string}'"
            ))),
        }
    }
}

/// H = Σ_l c_l P_l + offset·I with real coefficients (hence Hermitian).
#[derive(Clone, Debug)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    identity_offset: f64,
}

impl PauliHamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>, identity_offset: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Validation("hamiltonian needs n_qubits ≥ 1".into()));
        }
        for t in &terms {
            if t.paulis.len() != n_qubits {
                return Err(Error::Validation(format!(
                    "term has {} Paulis but n_qubits = {}",
                    t.paulis.len(),
                    n_qubits
                )));
            }
            if !t.coefficient.is_finite() {
                return Err(Error::Validation("non-finite coefficient".into()));
            }
        }
        Ok(PauliHamiltonian {
            n_qubits,
            terms,
            identity_offset,
        })
    }

    /// The Fig. 3 / Fig. 4 test model H = −(1/(N−1)) Σ σᶻ_n σᶻ_{n+1}.
    pub fn zz_chain(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Validation("zz chain needs N ≥ 2".into()));
        }
        let coeff = -1.0 / (n as f64 - 1.0);
        let mut terms = Vec::new();
        for i in 0..n - 1 {
            let mut paulis = vec![Pauli::I; n];
            paulis[i] = Pauli::Z;
            paulis[i + 1] = Pauli::Z;
            terms.push(PauliTerm {
                coefficient: coeff,
                paulis,
            });
        }
        PauliHamiltonian::new(n, terms, 0.0)
    }

    /// Diagonal Hamiltonian with the given eigenvalues on the computational
    /// basis of ⌈log₂ len⌉ qubits (handy for exact-eigenvalue tests).
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        if values.is_empty() || !values.len().is_power_of_two() {
            return Err(Error::Validation(
                "diagonal needs a power-of-two number of values".into(),
            ));
        }
        let n = values.len().trailing_zeros() as usize;
        if n == 0 {
            return Err(Error::Validation("diagonal needs at least 1 qubit".into()));
        }
        // Expand in the Z-string basis: coefficient of Z^{⊗mask} is
        // (1/2^N) Σ_b parity(mask & b) · v_b.
        let dim = values.len();
        let mut terms = Vec::new();
        let mut offset = 0.0;
        for mask in 0..dim {
            let mut c = 0.0;
            for (b, v) in values.iter().enumerate() {
                let sign = if ((mask & b).count_ones() & 1) == 1 {
                    -1.0
                } else {
                    1.0
                };
                c += sign * v;
            }
            c /= dim as f64;
            if c.abs() < 1e-15 {
                continue;
            }
            if mask == 0 {
                offset = c;
                continue;
            }
            let paulis = (0..n)
                .map(|q| {
                    // qubit q owns bit n-1-q of the basis index
                    if (mask >> (n - 1 - q)) & 1 == 1 {
                        Pauli::Z
                    } else {
                        Pauli::I
                    }
                })
                .collect();
            terms.push(PauliTerm {
                coefficient: c,
                paulis,
            });
        }
        PauliHamiltonian::new(n, terms, offset)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn identity_offset(&self) -> f64 {
        self.identity_offset
    }

    /// Σ|c_l| + |offset| — a sound crude bound on the spectral radius.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum::<f64>()
            + self.identity_offset.abs()
    }

    /// Crude spectrum bound [offset − Σ|c|, offset + Σ|c|].
    pub fn crude_bounds(&self) -> (f64, f64) {
        let s: f64 = self.terms.iter().map(|t| t.coefficient.abs()).sum();
        (self.identity_offset - s, self.identity_offset + s)
    }

    /// H + delta·I.
    pub fn shifted(&self, delta: f64) -> PauliHamiltonian {
        let mut h = self.clone();
        h.identity_offset += delta;
        h
    }

    /// a·H + b·I (the affine map applied to the operator).
    pub fn affine(&self, a: f64, b: f64) -> PauliHamiltonian {
        PauliHamiltonian {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm {
                    coefficient: a * t.coefficient,
                    paulis: t.paulis.clone(),
                })
                .collect(),
            identity_offset: a * self.identity_offset + b,
        }
    }

    /// Dense 2^N×2^N Hermitian matrix (N capped).
    pub fn dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.dense_matrix_capped(DEFAULT_DENSE_CAP)
    }

    pub fn dense_matrix_capped(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > cap {
            return Err(Error::Resource(format!(
                "dense matrix for N = {} exceeds cap {}",
                self.n_qubits, cap
            )));
        }
        let n = self.n_qubits;
        let dim = 1usize << n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for col in 0..dim {
            m[(col, col)] += Complex64::new(self.identity_offset, 0.0);
        }
        for term in &self.terms {
            for col in 0..dim {
                let mut row = col;
                let mut phase = Complex64::new(term.coefficient, 0.0);
                for (q, p) in term.paulis.iter().enumerate() {
                    let bitpos = n - 1 - q;
                    let bit = (col >> bitpos) & 1;
                    match p {
                        Pauli::I => {}
                        Pauli::X => row ^= 1 << bitpos,
                        Pauli::Y => {
                            row ^= 1 << bitpos;
                            phase *= if bit == 0 {
                                Complex64::new(0.0, 1.0)
                            } else {
                                Complex64::new(0.0, -1.0)
                            };
                        }
                        Pauli::Z => {
                            if bit == 1 {
                                phase = -phase;
                            }
                        }
                    }
                }
                m[(row, col)] += phase;
            }
        }
        Ok(m)
    }

    /// Parse the text format: `n_qubits <N>`, then `<coefficient> <pauli-string>`
    /// lines, optional `offset <value>`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n_qubits: Option<usize> = None;
        let mut terms = Vec::new();
        let mut offset = 0.0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let first = parts.next().unwrap();
            let second = parts
                .next()
                .ok_or_else(|| Error::parse(line_no, format!("expected two tokens, got '{line}'")))?;
            if parts.next().is_some() {
                return Err(Error::parse(line_no, format!("trailing tokens in '{line}'")));
            }
            match first {
                "n_qubits" => {
                    let n: usize = second.parse().map_err(|_| {
                        Error::parse(line_no, format!("invalid qubit count '{second}'"))
                    })?;
                    if n_qubits.replace(n).is_some() {
                        return Err(Error::parse(line_no, "duplicate n_qubits line"));
                    }
                }
                "offset" => {
                    offset = second.parse().map_err(|_| {
                        Error::parse(line_no, format!("invalid offset value '{second}'"))
                    })?;
                }
                coeff_tok => {
                    let n = n_qubits
                        .ok_or_else(|| Error::parse(line_no, "n_qubits must come first"))?;
                    let coeff: f64 = coeff_tok.parse().map_err(|_| {
                        Error::parse(line_no, format!("invalid coefficient '{coeff_tok}'"))
                    })?;
                    let term = PauliTerm::parse(coeff, second).map_err(|_| {
                        Error::parse(line_no, format!("malformed Pauli string '{second}'"))
                    })?;
                    if term.paulis.len() != n {
                        return Err(Error::parse(
                            line_no,
                            format!("Pauli string '{second}' does not have {n} letters"),
                        ));
                    }
                    terms.push(term);
                }
            }
        }
        let n = n_qubits.ok_or_else(|| Error::parse(0, "missing n_qubits line"))?;
        PauliHamiltonian::new(n, terms, offset)
    }
}

impl fmt::Display for PauliHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n_qubits {}", self.n_qubits)?;
        for t in &self.terms {
            let s: String = t.paulis.iter().map(|p| p.to_char()).collect();
            writeln!(f, "{} {}", t.coefficient, s)?;
        }
        if self.identity_offset != 0.0 {
            writeln!(f, "offset {}", self.identity_offset)?;
        }
        Ok(())
    }
}

/// Invertible, order-preserving spectrum map E ↦ scale·E + shift.
#[derive(Clone, Copy, Debug)]
pub struct AffineSpectrumMap {
    scale: f64,
    shift: f64,
}

impl AffineSpectrumMap {
    pub fn new(scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !shift.is_finite() {
            return Err(Error::Validation(format!(
                "spectrum map needs finite scale > 0, got scale={scale}, shift={shift}"
            )));
        }
        Ok(AffineSpectrumMap { scale, shift })
    }

    pub fn identity() -> Self {
        AffineSpectrumMap {
            scale: 1.0,
            shift: 0.0,
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn apply(&self, e: f64) -> f64 {
        self.scale * e + self.shift
    }

    pub fn invert(&self, y: f64) -> f64 {
        (y - self.shift) / self.scale
    }
}

const WINDOW_MARGIN_FRAC: f64 = 0.025;
const MAX_SCALE: f64 = 1e6;

/// Upper end of the judge's normalized window [0, 2π − 2π/2^R], before margins.
pub fn judge_window_top(r: usize) -> f64 {
    2.0 * PI - 2.0 * PI / (1u64 << r) as f64
}

/// Map the spectrum (given a sound raw bound) into `target`, shrunk to 95% of
/// its width and centered. Returns the mapped Hamiltonian and the map.
pub fn normalize_spectrum(
    h: &PauliHamiltonian,
    target: (f64, f64),
    bound: (f64, f64),
) -> Result<(PauliHamiltonian, AffineSpectrumMap)> {
    let (lo, hi) = bound;
    let (t_lo, t_hi) = target;
    if !(t_hi > t_lo) {
        return Err(Error::Validation("empty target interval".into()));
    }
    if !(hi > lo) {
        return Err(Error::Validation(
            "degenerate spectrum bound (zero-width operator range)".into(),
        ));
    }
    let a = 0.95 * (t_hi - t_lo) / (hi - lo);
    let b = 0.5 * (t_lo + t_hi) - a * 0.5 * (lo + hi);
    let map = AffineSpectrumMap::new(a, b)?;
    Ok((h.affine(a, b), map))
}

/// Judge normalization: spectrum into [0, 2π − 2π/2^R] with `threshold_raw ↦ π`,
/// leaving headroom for the shift set (shifts only move eigenvalues up by less
/// than π/2^{R−1}).
pub fn normalize_for_judge(
    h: &PauliHamiltonian,
    bound: (f64, f64),
    threshold_raw: f64,
    r: usize,
) -> Result<(PauliHamiltonian, AffineSpectrumMap)> {
    if r < 2 {
        return Err(Error::Config("judge normalization needs R ≥ 2".into()));
    }
    let (lo, hi) = bound;
    if threshold_raw < lo || threshold_raw > hi {
        return Err(Error::Config(format!(
            "threshold {threshold_raw} outside spectrum bound [{lo}, {hi}]"
        )));
    }
    let top = judge_window_top(r);
    let margin = top * WINDOW_MARGIN_FRAC;
    let max_shift = PI / (1u64 << (r - 1)) as f64;
    let w_lo = margin;
    let w_hi = top - margin - max_shift;
    if w_hi <= PI || w_lo >= PI {
        return Err(Error::Config(format!(
            "normalized window [{w_lo:.3}, {w_hi:.3}] does not bracket θ = π"
        )));
    }
    let tiny = 1e-12;
    let a_down = (PI - w_lo) / (threshold_raw - lo).max(tiny);
    let a_up = (w_hi - PI) / (hi - threshold_raw).max(tiny);
    let a = a_down.min(a_up).min(MAX_SCALE);
    let b = PI - a * threshold_raw;
    let map = AffineSpectrumMap::new(a, b)?;
    Ok((h.affine(a, b), map))
}

/// Selector normalization: spectrum into (−π/2, π/2) with `e_g ↦ 0`.
pub fn normalize_for_selector(
    h: &PauliHamiltonian,
    bound: (f64, f64),
    e_g: f64,
) -> Result<(PauliHamiltonian, AffineSpectrumMap)> {
    let (lo, hi) = bound;
    let tiny = 1e-12;
    let reach = (hi - e_g).max(e_g - lo).max(tiny);
    let a = (0.95 * PI / 2.0 / reach).min(MAX_SCALE);
    let b = -a * e_g;
    let map = AffineSpectrumMap::new(a, b)?;
    Ok((h.affine(a, b), map))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Exact unit-time evolution e^{±iH} via Hermitian eigendecomposition.
pub fn unit_evolution(h: &PauliHamiltonian, sign: Sign) -> Result<DMatrix<Complex64>> {
    let m = h.dense_matrix()?;
    let eig = m.symmetric_eigen();
    let dim = eig.eigenvalues.len();
    let mut u = DMatrix::<Complex64>::zeros(dim, dim);
    for j in 0..dim {
        let phase = Complex64::from_polar(1.0, sign.factor() * eig.eigenvalues[j]);
        let col = eig.eigenvectors.column(j);
        for r in 0..dim {
            for c in 0..dim {
                u[(r, c)] += col[r] * phase * col[c].conj();
            }
        }
    }
    Ok(u)
}

/// Row-major copy of a square nalgebra matrix (for gate application).
pub fn to_row_major(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let (rows, cols) = m.shape();
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push(m[(r, c)]);
        }
    }
    out
}

/// U_e: applies e^{+iH} on the physical register where the coin qubit is |0⟩
/// and e^{−iH} where it is |1⟩.
pub fn coin_controlled_evolution(
    state: &mut StateVector,
    layout: &RegisterLayout,
    h: &PauliHamiltonian,
    coin_qubit: usize,
) -> Result<()> {
    let phys = layout.group("physical")?;
    let plus = to_row_major(&unit_evolution(h, Sign::Plus)?);
    let minus = to_row_major(&unit_evolution(h, Sign::Minus)?);
    apply_coin_evolution(state, layout, phys, &plus, &minus, coin_qubit, &[])
}

/// U_e with precomputed e^{±iH} blocks and optional extra controls.
pub fn apply_coin_evolution(
    state: &mut StateVector,
    layout: &RegisterLayout,
    phys: GroupId,
    plus: &[Complex64],
    minus: &[Complex64],
    coin_qubit: usize,
    extra_controls: &[(usize, bool)],
) -> Result<()> {
    let mut on_zero = extra_controls.to_vec();
    on_zero.push((coin_qubit, false));
    state.apply_block_on_group(layout, phys, plus, &on_zero)?;
    let mut on_one = extra_controls.to_vec();
    on_one.push((coin_qubit, true));
    state.apply_block_on_group(layout, phys, minus, &on_one)
}

/// e^{±iH} applied k times on the physical register (repetition, not one
/// exponential of kH).
pub fn power_evolution(
    state: &mut StateVector,
    layout: &RegisterLayout,
    h: &PauliHamiltonian,
    k: usize,
    sign: Sign,
) -> Result<()> {
    let phys = layout.group("physical")?;
    let u = to_row_major(&unit_evolution(h, sign)?);
    for _ in 0..k {
        state.apply_block_on_group(layout, phys, &u, &[])?;
    }
    Ok(())
}

/// The shifted Hamiltonian set {H_w}: H_w = H_0 + (w/W)·(π/2^{R−1})·I,
/// w = 0..W−1.
pub fn hamiltonian_set(h0: &PauliHamiltonian, w_count: usize, r: usize) -> Vec<PauliHamiltonian> {
    let step = PI / (1u64 << (r - 1)) as f64;
    (0..w_count)
        .map(|w| h0.shifted(w as f64 / w_count as f64 * step))
        .collect()
}

/// Shift applied to eigenvalues by the w-th member of the set.
pub fn shift_amount(w: usize, w_count: usize, r: usize) -> f64 {
    w as f64 / w_count as f64 * PI / (1u64 << (r - 1)) as f64
}
