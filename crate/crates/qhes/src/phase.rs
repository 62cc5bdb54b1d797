//! Quantum Fourier transform, the phase-estimation circuit, and the analytic
//! amplitude function κ(E, x) used as a test oracle.
//!
//! Sign conventions follow the source equations exactly: the controlled
//! evolution kicks back e^{+ikE_j}, and the inverse Fourier transform carries
//! the e^{−2πikx/2^R} exponent, so QPE maps |E_j⟩|0^R⟩ to Σ_x κ(E_j,x)|E_j⟩|x⟩
//! with κ(E,x) = (1/2^R) Σ_k e^{ik(E − 2πx/2^R)}.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::hamiltonian::{to_row_major, unit_evolution, PauliHamiltonian, Sign};
use crate::state::{control_mask, GroupId, RegisterLayout, StateVector};

/// Representation-register size and direction for a QPE application.
#[derive(Clone, Copy, Debug)]
pub struct QpeConfig {
    pub r: usize,
    pub direction: QftDirection,
}

impl QpeConfig {
    pub fn forward(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::Config("QPE needs R ≥ 1".into()));
        }
        Ok(QpeConfig {
            r,
            direction: QftDirection::Forward,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QftDirection {
    Forward,
    Inverse,
}

fn fft_in_place(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    // bit-reversal permutation
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = (i.reverse_bits() >> (usize::BITS - bits)) & (n - 1);
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let wlen = Complex64::from_polar(1.0, sign * TAU / len as f64);
        for start in (0..n).step_by(len) {
            let mut w = Complex64::ONE;
            for off in 0..len / 2 {
                let u = buf[start + off];
                let v = buf[start + off + len / 2] * w;
                buf[start + off] = u + v;
                buf[start + off + len / 2] = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
    let norm = 1.0 / (n as f64).sqrt();
    for a in buf {
        *a *= norm;
    }
}

fn wht_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(h * 2) {
            for off in start..start + h {
                let a = buf[off];
                let b = buf[off + h];
                buf[off] = (a + b) * c;
                buf[off + h] = (a - b) * c;
            }
        }
        h <<= 1;
    }
}

fn check_controls_outside(
    state: &StateVector,
    layout: &RegisterLayout,
    group: GroupId,
    controls: &[(usize, bool)],
) -> Result<(usize, usize)> {
    let (cmask, cval) = control_mask(controls, state.n_qubits());
    if cmask & layout.field_mask(group) != 0 {
        return Err(Error::Validation(
            "controls overlap the transformed group".into(),
        ));
    }
    Ok((cmask, cval))
}

/// Exact discrete-Fourier action on a register group.
///
/// Forward: |k⟩ → (1/√2^R) Σ_x e^{+2πikx/2^R} |x⟩; Inverse uses e^{−…}.
pub fn qft(
    state: &mut StateVector,
    layout: &RegisterLayout,
    group: GroupId,
    direction: QftDirection,
    controls: &[(usize, bool)],
) -> Result<()> {
    let (cmask, cval) = check_controls_outside(state, layout, group, controls)?;
    let sign = match direction {
        QftDirection::Forward => 1.0,
        QftDirection::Inverse => -1.0,
    };
    state.for_each_fiber(layout, group, cmask, cval, |buf| fft_in_place(buf, sign));
    Ok(())
}

/// B^{⊗R} (Hadamard on every qubit of the group), optionally controlled.
pub fn hadamard_group(
    state: &mut StateVector,
    layout: &RegisterLayout,
    group: GroupId,
    controls: &[(usize, bool)],
) -> Result<()> {
    let (cmask, cval) = check_controls_outside(state, layout, group, controls)?;
    state.for_each_fiber(layout, group, cmask, cval, wht_in_place);
    Ok(())
}

/// Phase-estimation circuit for one Hamiltonian, with the binary-weighted
/// controlled evolutions precomputed: the qubit of weight 2^j triggers 2^j
/// repetitions of the unit evolution, folded into the matrix (e^{iH})^{2^j}
/// by repeated multiplication.
pub struct QpeOperator {
    r: usize,
    /// plus_powers[j] = (e^{+iH})^{2^j}, row-major.
    plus_powers: Vec<Vec<Complex64>>,
    minus_powers: Vec<Vec<Complex64>>,
}

impl QpeOperator {
    pub fn new(h: &PauliHamiltonian, r: usize) -> Result<Self> {
        Self::with_kickback(h, r, Sign::Plus)
    }

    /// `kick` chooses the evolution sign used for the forward circuit; the
    /// contract value is `Sign::Plus`. (`Sign::Minus` exists as a mutation
    /// canary for the verify suite.)
    pub fn with_kickback(h: &PauliHamiltonian, r: usize, kick: Sign) -> Result<Self> {
        if r == 0 {
            return Err(Error::Config("QPE needs R ≥ 1".into()));
        }
        let u_plus = unit_evolution(h, kick)?;
        let u_minus = unit_evolution(h, kick.flip())?;
        let mut plus_powers = Vec::with_capacity(r);
        let mut minus_powers = Vec::with_capacity(r);
        let mut p = u_plus.clone();
        let mut m = u_minus.clone();
        for j in 0..r {
            if j > 0 {
                p = &p * &p;
                m = &m * &m;
            }
            plus_powers.push(to_row_major(&p));
            minus_powers.push(to_row_major(&m));
        }
        Ok(QpeOperator {
            r,
            plus_powers,
            minus_powers,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Apply U_QPE (or its exact adjoint) on (physical ⊗ `rep`), restricted to
    /// the subspace selected by `controls`.
    pub fn apply(
        &self,
        state: &mut StateVector,
        layout: &RegisterLayout,
        rep: GroupId,
        controls: &[(usize, bool)],
        inverse: bool,
    ) -> Result<()> {
        let phys = layout.group("physical")?;
        if layout.size(rep) != self.r {
            return Err(Error::Layout(format!(
                "group '{}' has {} qubits, QPE was built for R = {}",
                layout.name(rep),
                layout.size(rep),
                self.r
            )));
        }
        if !inverse {
            hadamard_group(state, layout, rep, controls)?;
            for j in 0..self.r {
                let q = layout.qubit(rep, j)?;
                let mut ctrls = controls.to_vec();
                ctrls.push((q, true));
                // rep qubit j carries bit weight 2^{r−1−j}
                state.apply_block_on_group(layout, phys, &self.plus_powers[self.r - 1 - j], &ctrls)?;
            }
            qft(state, layout, rep, QftDirection::Inverse, controls)
        } else {
            qft(state, layout, rep, QftDirection::Forward, controls)?;
            for j in (0..self.r).rev() {
                let q = layout.qubit(rep, j)?;
                let mut ctrls = controls.to_vec();
                ctrls.push((q, true));
                state.apply_block_on_group(layout, phys, &self.minus_powers[self.r - 1 - j], &ctrls)?;
            }
            hadamard_group(state, layout, rep, controls)
        }
    }
}

/// U_QPE on the given representation group (nominally prepared in |0^R⟩).
pub fn qpe_apply(
    state: &mut StateVector,
    layout: &RegisterLayout,
    h: &PauliHamiltonian,
    rep: GroupId,
) -> Result<()> {
    QpeOperator::new(h, layout.size(rep))?.apply(state, layout, rep, &[], false)
}

/// Exact adjoint of [`qpe_apply`].
pub fn qpe_inverse_apply(
    state: &mut StateVector,
    layout: &RegisterLayout,
    h: &PauliHamiltonian,
    rep: GroupId,
) -> Result<()> {
    QpeOperator::new(h, layout.size(rep))?.apply(state, layout, rep, &[], true)
}

/// QPE (or its inverse) applied only where `controls` match.
pub fn controlled_qpe(
    state: &mut StateVector,
    layout: &RegisterLayout,
    h: &PauliHamiltonian,
    rep: GroupId,
    controls: &[(usize, bool)],
    inverse: bool,
) -> Result<()> {
    QpeOperator::new(h, layout.size(rep))?.apply(state, layout, rep, controls, inverse)
}

/// Exact QPE output amplitude κ(E, x) = (1/2^R) Σ_k e^{ik(E − 2πx/2^R)},
/// evaluated by the geometric-progression closed form away from the removable
/// singularity (where the value is exactly 1).
pub fn kappa_analytic(e: f64, x: u64, r: usize) -> Complex64 {
    let d = (1u64 << r) as f64;
    // singular ⟺ 2^{R−1}E/π − x is a multiple of 2^R
    let u = d * e / TAU - x as f64;
    let cycles = u / d;
    if (cycles - cycles.round()).abs() < 1e-12 {
        return Complex64::ONE;
    }
    let phi = e - TAU * x as f64 / d;
    let num = Complex64::ONE - Complex64::from_polar(1.0, d * phi);
    let den = Complex64::ONE - Complex64::from_polar(1.0, phi);
    num / den / d
}

/// Σ_{x ∈ range} |κ(E,x)|² — the per-round retention of a κ distribution on a
/// set of representation values.
pub fn kappa_mass(e: f64, range: std::ops::Range<u64>, r: usize) -> f64 {
    range.map(|x| kappa_analytic(e, x, r).norm_sqr()).sum()
}

/// The integer n minimizing |n/2^R − y| for y ∈ [0, 1 − 1/2^R], ties rounded
/// half-up. Guarantees |n/2^R − y| ≤ 1/2^{R+1}.
pub fn nearest_binary(y: f64, r: usize) -> Result<u64> {
    let d = (1u64 << r) as f64;
    if !(0.0..=1.0 - 1.0 / d).contains(&y) {
        return Err(Error::Domain(format!(
            "y = {y} outside [0, 1 − 1/2^{r}]"
        )));
    }
    Ok((d * y + 0.5).floor() as u64)
}

/// n(E/2π) for an eigenphase E in [0, 2π − 2π/2^R].
pub fn nearest_binary_of_phase(e: f64, r: usize) -> Result<u64> {
    nearest_binary(e / TAU, r)
}
