//! Grover iterate, fixed-point amplitude amplification, and the
//! oracle-conjugated reflections that turn the Dirac/Heaviside circuits into
//! projectors onto their qualified subspaces.
//!
//! The fixed-point schedule is the Chebyshev-phase recipe: with L = 2l+1,
//! γ⁻¹ = T_{1/L}(1/δ), the j-th generalized iterate applies the partial
//! phases α_j = −β_{l−j+1} = 2·acot(tan(2πj/L)·√(1−γ²)). The resulting
//! success probability has the closed form 1 − δ²·T_L(T_{1/L}(1/δ)·√(1−p))²,
//! which stays ≥ 1 − δ² whenever the initial overlap p is at least
//! p_min ≈ (ln(2/δ)/L)².

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::state::{RegisterLayout, StateVector};

/// A unitary circuit that entangles a qualification pattern with the input:
/// after one application, amplitudes matching `marked_mask` belong to the
/// qualified branch.
pub trait MarkedOracle {
    fn layout(&self) -> &RegisterLayout;
    fn apply(&self, state: &mut StateVector) -> Result<()>;
    fn apply_inverse(&self, state: &mut StateVector) -> Result<()>;
    /// `(mask, value)` of the qualification pattern in basis-index space.
    fn marked_mask(&self) -> (usize, usize);
}

/// Chebyshev polynomial of (possibly fractional) order: cos(ν·arccos x) for
/// |x| ≤ 1, cosh(ν·arccosh x) for x > 1.
pub fn chebyshev_t(nu: f64, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (nu * x.acos()).cos()
    } else if x > 1.0 {
        (nu * (x + (x * x - 1.0).sqrt()).ln()).cosh()
    } else {
        // x < −1 only reachable through roundoff in our usage
        let t = (-x + (x * x - 1.0).sqrt()).ln();
        (nu * t).cosh() * if (nu as i64) % 2 == 0 { 1.0 } else { -1.0 }
    }
}

/// Iteration budget and guarantee parameters for the fixed-point search.
#[derive(Clone, Copy, Debug)]
pub struct FixedPointConfig {
    /// Final success probability is guaranteed ≥ 1 − δ².
    pub delta: f64,
    /// Lower bound on the initial success probability the guarantee covers.
    pub p_min: f64,
    /// Iteration count l (the sequence makes L = 2l+1 queries).
    pub l: usize,
}

impl FixedPointConfig {
    /// Smallest iteration count honoring the guarantee for `p_min`.
    pub fn for_bound(delta: f64, p_min: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("δ must be in (0,1), got {delta}")));
        }
        if !(p_min > 0.0 && p_min <= 1.0) {
            return Err(Error::Config(format!(
                "p_min must be in (0,1], got {p_min}"
            )));
        }
        let l_floor = (((2.0 / delta).ln() / p_min.sqrt() - 1.0) / 2.0).ceil().max(0.0) as usize;
        let mut l = l_floor;
        // ensure the width condition 1 − γ² ≤ p_min actually holds
        loop {
            let big_l = (2 * l + 1) as f64;
            let gamma = 1.0 / chebyshev_t(1.0 / big_l, 1.0 / delta);
            if 1.0 - gamma * gamma <= p_min || l > l_floor + 64 {
                break;
            }
            l += 1;
        }
        Ok(FixedPointConfig { delta, p_min, l })
    }

    pub fn queries(&self) -> usize {
        2 * self.l + 1
    }
}

/// The per-iteration partial phases (α_j, β_j), j = 1..l.
pub fn fixed_point_phases(delta: f64, l: usize) -> (Vec<f64>, Vec<f64>) {
    let big_l = (2 * l + 1) as f64;
    let gamma = 1.0 / chebyshev_t(1.0 / big_l, 1.0 / delta);
    let s = (1.0 - gamma * gamma).max(0.0).sqrt();
    let alphas: Vec<f64> = (1..=l)
        .map(|j| 2.0 * f64::atan2(1.0, (TAU * j as f64 / big_l).tan() * s))
        .collect();
    let betas: Vec<f64> = (1..=l).map(|j| -alphas[l - j]).collect();
    (alphas, betas)
}

/// S_s(α) about the (full-register) initialized state: realized as
/// U_I · (selective phase on the all-zeros basis state) · U_I†, which for a
/// stored |ψ_init⟩ is the rank-1 update ψ ← ψ − (1−e^{iα})⟨init|ψ⟩·init.
pub fn reflect_initial(state: &mut StateVector, init: &StateVector, alpha: f64) -> Result<()> {
    let overlap = init.inner(state)?;
    let factor = (Complex64::ONE - Complex64::from_polar(1.0, alpha)) * overlap;
    let amps: Vec<Complex64> = state
        .amplitudes()
        .iter()
        .zip(init.amplitudes())
        .map(|(a, b)| a - factor * b)
        .collect();
    *state = StateVector::from_amplitudes(amps)?;
    Ok(())
}

/// S_t(β) about the oracle's qualified subspace: oracle, selective phase on
/// the qualification pattern, inverse oracle.
pub fn reflect_marked(state: &mut StateVector, oracle: &dyn MarkedOracle, beta: f64) -> Result<()> {
    oracle.apply(state)?;
    let (mask, val) = oracle.marked_mask();
    state.phase_mask(mask, val, Complex64::from_polar(1.0, beta));
    oracle.apply_inverse(state)
}

/// Probability of the oracle's qualification pattern in `state`.
pub fn marked_probability(state: &StateVector, oracle: &dyn MarkedOracle) -> f64 {
    let (mask, val) = oracle.marked_mask();
    state.masked_probability(mask, val)
}

/// Probability of the qualification pattern after applying the oracle once to
/// the initialized state (the quantity the fixed-point search amplifies).
pub fn initial_marked_probability(
    init: &StateVector,
    oracle: &dyn MarkedOracle,
) -> Result<f64> {
    let mut s = init.clone();
    oracle.apply(&mut s)?;
    Ok(marked_probability(&s, oracle))
}

/// Fixed-point amplitude amplification: returns a state whose overlap with the
/// marked subspace is ≥ 1 − δ² whenever the true initial overlap is ≥ p_min.
pub fn fixed_point_amplify(
    init: &StateVector,
    oracle: &dyn MarkedOracle,
    config: &FixedPointConfig,
) -> Result<StateVector> {
    let (alphas, betas) = fixed_point_phases(config.delta, config.l);
    let mut state = init.clone();
    for j in 0..config.l {
        reflect_marked(&mut state, oracle, betas[j])?;
        reflect_initial(&mut state, init, alphas[j])?;
    }
    Ok(state)
}

/// Textbook Grover with the classically optimal iteration count
/// ⌊π/(4·arcsin√p)⌋ for a known initial overlap p (test aid).
pub fn grover_known_p(
    init: &StateVector,
    oracle: &dyn MarkedOracle,
    p: f64,
) -> Result<(StateVector, usize)> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config(format!("known p must be in (0,1], got {p}")));
    }
    let theta = p.sqrt().asin();
    let k = (std::f64::consts::PI / (4.0 * theta)).floor() as usize;
    let mut state = init.clone();
    for _ in 0..k {
        reflect_marked(&mut state, oracle, std::f64::consts::PI)?;
        reflect_initial(&mut state, init, std::f64::consts::PI)?;
    }
    Ok((state, k))
}

/// Closed-form success probability of the fixed-point sequence,
/// 1 − δ²·T_L(T_{1/L}(1/δ)·√(1−p))² — the independent oracle the simulated
/// sequence is tested against.
pub fn fixed_point_success_probability(p: f64, delta: f64, l: usize) -> f64 {
    let big_l = (2 * l + 1) as f64;
    let arg = chebyshev_t(1.0 / big_l, 1.0 / delta) * (1.0 - p).max(0.0).sqrt();
    1.0 - delta * delta * chebyshev_t(big_l, arg).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Identity oracle marking a fixed basis pattern of the register.
    struct ToyOracle {
        layout: RegisterLayout,
        mask: usize,
        val: usize,
    }

    impl ToyOracle {
        fn marking(n: usize, target: usize) -> Self {
            let layout = RegisterLayout::new(&[("physical", n)]).unwrap();
            ToyOracle {
                mask: (1 << n) - 1,
                val: target,
                layout,
            }
        }
    }

    impl MarkedOracle for ToyOracle {
        fn layout(&self) -> &RegisterLayout {
            &self.layout
        }
        fn apply(&self, _state: &mut StateVector) -> Result<()> {
            Ok(())
        }
        fn apply_inverse(&self, _state: &mut StateVector) -> Result<()> {
            Ok(())
        }
        fn marked_mask(&self) -> (usize, usize) {
            (self.mask, self.val)
        }
    }

    fn two_level_init(p: f64) -> StateVector {
        StateVector::from_amplitudes(vec![
            Complex64::new((1.0 - p).sqrt(), 0.0),
            Complex64::new(p.sqrt(), 0.0),
        ])
        .unwrap()
    }

    fn uniform_init(n: usize) -> StateVector {
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        StateVector::from_amplitudes(vec![a; dim]).unwrap()
    }

    #[test]
    fn reflections_are_involutions() {
        let oracle = ToyOracle::marking(3, 5);
        let init = uniform_init(3);
        let mut s = two_level_state_random();
        let before = s.clone();
        reflect_marked(&mut s, &oracle, std::f64::consts::PI).unwrap();
        reflect_marked(&mut s, &oracle, std::f64::consts::PI).unwrap();
        for i in 0..s.dim() {
            assert!((s.amplitude(i) - before.amplitude(i)).norm() < 1e-10);
        }
        reflect_initial(&mut s, &init, std::f64::consts::PI).unwrap();
        reflect_initial(&mut s, &init, std::f64::consts::PI).unwrap();
        for i in 0..s.dim() {
            assert!((s.amplitude(i) - before.amplitude(i)).norm() < 1e-10);
        }
    }

    fn two_level_state_random() -> StateVector {
        let amps: Vec<Complex64> = (0..8)
            .map(|i| Complex64::new(0.1 + 0.05 * i as f64, 0.3 - 0.07 * i as f64))
            .collect();
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.renormalize().unwrap();
        s
    }

    #[test]
    fn reflect_initial_eigenvector_cases() {
        let init = uniform_init(2);
        // on |ψ_r⟩ itself with α = π → −|ψ_r⟩
        let mut s = init.clone();
        reflect_initial(&mut s, &init, std::f64::consts::PI).unwrap();
        for i in 0..4 {
            assert!((s.amplitude(i) + init.amplitude(i)).norm() < 1e-12);
        }
        // orthogonal state unchanged
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut orth = StateVector::from_amplitudes(vec![
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
        ])
        .unwrap();
        let before = orth.clone();
        reflect_initial(&mut orth, &init, std::f64::consts::PI).unwrap();
        for i in 0..4 {
            assert!((orth.amplitude(i) - before.amplitude(i)).norm() < 1e-12);
        }
    }

    #[test]
    fn known_p_quarter_single_iteration() {
        // p = 1/4 toy search: 1 iteration reaches probability ≥ 0.99
        let oracle = ToyOracle::marking(2, 3);
        let init = uniform_init(2);
        let (out, k) = grover_known_p(&init, &oracle, 0.25).unwrap();
        assert_eq!(k, 1);
        let p = marked_probability(&out, &oracle);
        assert!(p >= 0.99, "p = {p}");
        // exactly sin²(3·arcsin(1/2)) = 1
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn known_p_matches_grover_recurrence() {
        // sin²((2k+1)·arcsin√p) for the toy two-level system
        for &p in &[0.05, 0.1, 0.2, 0.3] {
            let oracle = ToyOracle::marking(1, 1);
            let init = two_level_init(p);
            let (out, k) = grover_known_p(&init, &oracle, p).unwrap();
            let theta = p.sqrt().asin();
            let expect = ((2 * k + 1) as f64 * theta).sin().powi(2);
            let got = marked_probability(&out, &oracle);
            assert!(
                (got - expect).abs() < 1e-9,
                "p={p}: got {got}, recurrence {expect}"
            );
        }
    }

    #[test]
    fn fixed_point_no_overcooking_at_p_one() {
        let oracle = ToyOracle::marking(1, 1);
        let init = two_level_init(1.0);
        for l in [1usize, 3, 7, 15] {
            let cfg = FixedPointConfig {
                delta: 0.1,
                p_min: 0.25,
                l,
            };
            let out = fixed_point_amplify(&init, &oracle, &cfg).unwrap();
            let p = marked_probability(&out, &oracle);
            assert!(p >= 1.0 - 1e-10, "l={l}: p={p}");
        }
    }

    #[test]
    fn fixed_point_guarantee_over_p_grid() {
        let oracle = ToyOracle::marking(1, 1);
        let delta = 0.1;
        let p_min = 0.05;
        let cfg = FixedPointConfig::for_bound(delta, p_min).unwrap();
        assert!(2 * cfg.l + 1 >= ((2.0f64 / delta).ln() / p_min.sqrt()) as usize);
        let mut p = p_min;
        while p <= 1.0 {
            let init = two_level_init(p);
            let out = fixed_point_amplify(&init, &oracle, &cfg).unwrap();
            let got = marked_probability(&out, &oracle);
            assert!(
                got >= 1.0 - delta * delta - 1e-9,
                "p={p}: amplified only to {got}"
            );
            p += p_min;
        }
    }

    #[test]
    fn fixed_point_matches_closed_form() {
        let oracle = ToyOracle::marking(1, 1);
        for &delta in &[0.1, 0.3] {
            for l in [1usize, 2, 5, 9] {
                for &p in &[0.01, 0.08, 0.3, 0.7, 0.97] {
                    let init = two_level_init(p);
                    let cfg = FixedPointConfig { delta, p_min: p, l };
                    let out = fixed_point_amplify(&init, &oracle, &cfg).unwrap();
                    let got = marked_probability(&out, &oracle);
                    let expect = fixed_point_success_probability(p, delta, l);
                    assert!(
                        (got - expect).abs() < 1e-9,
                        "δ={delta}, l={l}, p={p}: sim {got} vs closed form {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn fixed_point_degenerates_to_grover_as_delta_to_one() {
        // with δ → 1 the phases collapse to π and one iterate is plain Grover
        let p = 0.2;
        let oracle = ToyOracle::marking(1, 1);
        let init = two_level_init(p);
        let cfg = FixedPointConfig {
            delta: 1.0 - 1e-9,
            p_min: p,
            l: 1,
        };
        let out = fixed_point_amplify(&init, &oracle, &cfg).unwrap();
        let got = marked_probability(&out, &oracle);
        let expect = (3.0 * p.sqrt().asin()).sin().powi(2);
        assert!((got - expect).abs() < 1e-6, "got {got}, Grover {expect}");
    }

    #[test]
    fn amplification_preserves_norm() {
        let oracle = ToyOracle::marking(2, 1);
        let init = uniform_init(2);
        let cfg = FixedPointConfig {
            delta: 0.2,
            p_min: 0.25,
            l: 4,
        };
        let out = fixed_point_amplify(&init, &oracle, &cfg).unwrap();
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn config_validation() {
        assert!(FixedPointConfig::for_bound(0.0, 0.5).is_err());
        assert!(FixedPointConfig::for_bound(0.1, 0.0).is_err());
        assert!(FixedPointConfig::for_bound(0.1, 1.5).is_err());
    }
}
