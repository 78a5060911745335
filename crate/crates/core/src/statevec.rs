//! Dense statevector simulation.
//!
//! Qubit 0 is the least-significant bit of the basis-state index, so the
//! amplitude of `|q_{N-1} ... q_1 q_0>` lives at index `sum_j q_j 2^j`.
//!
//! Rotation conventions:
//!
//! * `RY(a) = exp(-i a Y / 2)`, `RZ(a) = exp(-i a Z / 2)`
//! * `MULTIZ(a)` on qubits `j_1..j_k` is `exp(-i a Z_{j_1} ... Z_{j_k})`, with
//!   no half factor. Its CNOT-ladder decomposition therefore uses `RZ(2a)`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these whenever std is linked
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{bail, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// Gate with all angles resolved to numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundGate {
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    /// Z-string rotation on the qubits set in `mask`.
    MultiZ { mask: u32, angle: f64 },
}

/// Bit mask for a list of qubit indices. Fails on duplicates, an empty list, or indices >= 32.
pub fn qubit_mask(qubits: &[usize]) -> Result<u32> {
    if qubits.is_empty() {
        bail!(Argument, "qubit list is empty");
    }
    let mut mask = 0u32;
    for &q in qubits {
        if q >= 32 {
            bail!(Argument, "qubit index {q} does not fit a 32-bit mask");
        }
        if mask & (1 << q) != 0 {
            bail!(Argument, "qubit {q} listed twice");
        }
        mask |= 1 << q;
    }
    Ok(mask)
}

/// Iterates the set bits of a mask in ascending order.
pub fn mask_indices(mask: u32) -> impl Iterator<Item = usize> + Clone {
    (0..32).filter(move |b| mask & (1u32 << b) != 0)
}

impl BoundGate {
    pub fn multi_z(qubits: &[usize], angle: f64) -> Result<Self> {
        Ok(BoundGate::MultiZ { mask: qubit_mask(qubits)?, angle })
    }

    /// Qubits touched by the gate, ascending for `MultiZ`, `[control, target]` for CNOT.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            BoundGate::Ry { qubit, .. } | BoundGate::Rz { qubit, .. } => vec![qubit],
            BoundGate::Cnot { control, target } => vec![control, target],
            BoundGate::MultiZ { mask, .. } => mask_indices(mask).collect(),
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            BoundGate::Ry { angle, .. }
            | BoundGate::Rz { angle, .. }
            | BoundGate::MultiZ { angle, .. } => Some(angle),
            BoundGate::Cnot { .. } => None,
        }
    }

    /// Checks qubit indices against a register of `num_qubits`.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        match *self {
            BoundGate::Ry { qubit, .. } | BoundGate::Rz { qubit, .. } => {
                if qubit >= num_qubits {
                    bail!(Argument, "qubit {qubit} out of range for {num_qubits} qubits");
                }
            }
            BoundGate::Cnot { control, target } => {
                if control >= num_qubits || target >= num_qubits {
                    bail!(Argument, "CNOT ({control},{target}) out of range for {num_qubits} qubits");
                }
                if control == target {
                    bail!(Argument, "CNOT control and target coincide ({control})");
                }
            }
            BoundGate::MultiZ { mask, .. } => {
                if mask == 0 {
                    bail!(Argument, "MULTIZ acts on no qubits");
                }
                if num_qubits < 32 && mask >> num_qubits != 0 {
                    bail!(Argument, "MULTIZ mask {mask:#b} out of range for {num_qubits} qubits");
                }
            }
        }
        Ok(())
    }

    /// Rewrites a `MultiZ` as a CNOT ladder around `RZ(2a)` on the highest qubit.
    /// Other gates are returned unchanged.
    pub fn decompose(&self) -> Vec<BoundGate> {
        match *self {
            BoundGate::MultiZ { mask, angle } => {
                let qs: Vec<usize> = mask_indices(mask).collect();
                let last = *qs.last().expect("validated mask is non-empty");
                let ladder: Vec<BoundGate> = qs
                    .windows(2)
                    .map(|w| BoundGate::Cnot { control: w[0], target: w[1] })
                    .collect();
                let mut out = ladder.clone();
                out.push(BoundGate::Rz { qubit: last, angle: 2.0 * angle });
                out.extend(ladder.into_iter().rev());
                out
            }
            g => vec![g],
        }
    }
}

/// Complex amplitudes of an `N`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The reference state `|0...0>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            bail!(Capacity, "{num_qubits} qubits requested, supported range is 1..={MAX_QUBITS}");
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two; no normalization is applied.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            bail!(Argument, "amplitude vector length {len} is not a power of two >= 2");
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            bail!(Capacity, "{num_qubits} qubits exceeds {MAX_QUBITS}");
        }
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Resets to `|0...0>` without reallocating.
    pub fn reset(&mut self) {
        for a in self.amps.iter_mut() {
            *a = Complex64::new(0.0, 0.0);
        }
        self.amps[0] = Complex64::new(1.0, 0.0);
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub(crate) fn copy_from(&mut self, other: &StateVector) {
        self.amps.copy_from_slice(&other.amps);
    }

    /// Applies one gate in place.
    pub fn apply(&mut self, gate: &BoundGate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    /// Applies a gate that is already known to be valid for this register.
    pub(crate) fn apply_unchecked(&mut self, gate: &BoundGate) {
        match *gate {
            BoundGate::Ry { qubit, angle } => {
                let (s, c) = (0.5 * angle).sin_cos();
                let bit = 1usize << qubit;
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        let a0 = self.amps[i];
                        let a1 = self.amps[i | bit];
                        self.amps[i] = a0 * c - a1 * s;
                        self.amps[i | bit] = a0 * s + a1 * c;
                    }
                }
            }
            BoundGate::Rz { qubit, angle } => {
                let (s, c) = (0.5 * angle).sin_cos();
                let minus = Complex64::new(c, -s);
                let plus = Complex64::new(c, s);
                let bit = 1usize << qubit;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if i & bit == 0 { minus } else { plus };
                }
            }
            BoundGate::Cnot { control, target } => {
                let cbit = 1usize << control;
                let tbit = 1usize << target;
                for i in 0..self.amps.len() {
                    if i & cbit != 0 && i & tbit == 0 {
                        self.amps.swap(i, i | tbit);
                    }
                }
            }
            BoundGate::MultiZ { mask, angle } => {
                let (s, c) = angle.sin_cos();
                // even parity: Z-string eigenvalue +1
                let even = Complex64::new(c, -s);
                let odd = Complex64::new(c, s);
                let mask = mask as usize;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if (i & mask).count_ones().is_multiple_of(2) { even } else { odd };
                }
            }
        }
    }

    /// Applies a gate, routing `MultiZ` through its CNOT-ladder decomposition.
    pub fn apply_decomposed(&mut self, gate: &BoundGate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        for g in gate.decompose() {
            self.apply_unchecked(&g);
        }
        Ok(())
    }

    /// `<Z_qubit>`, computed exactly from the amplitudes.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.num_qubits {
            bail!(Argument, "qubit {qubit} out of range for {} qubits", self.num_qubits);
        }
        Ok(self.expectation_z_unchecked(qubit))
    }

    pub(crate) fn expectation_z_unchecked(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    /// Applies `gates` left to right to a copy of this state.
    pub fn run(&self, gates: &[BoundGate]) -> Result<StateVector> {
        for g in gates {
            g.validate(self.num_qubits)?;
        }
        let mut out = self.clone();
        for g in gates {
            out.apply_unchecked(g);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_state() {
        let s = StateVector::zero(1).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = StateVector::zero(3).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| *a == c(0.0, 0.0)));
        assert_eq!(StateVector::zero(2).unwrap().expectation_z(0).unwrap(), 1.0);
    }

    #[test]
    fn zero_state_capacity() {
        assert!(matches!(StateVector::zero(0), Err(crate::Error::Capacity(_))));
        assert!(matches!(StateVector::zero(25), Err(crate::Error::Capacity(_))));
    }

    #[test]
    fn ry_rotations() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&BoundGate::Ry { qubit: 0, angle: PI }).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, 1.0, epsilon = 1e-15);

        let mut s = StateVector::zero(1).unwrap();
        s.apply(&BoundGate::Ry { qubit: 0, angle: PI / 2.0 }).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.expectation_z(0).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn multiz_phase_on_odd_parity() {
        // |01>: qubit 0 set, qubit 1 clear
        let phi = 0.37;
        let mut amps = vec![c(0.0, 0.0); 4];
        amps[1] = c(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.apply(&BoundGate::multi_z(&[0, 1], phi).unwrap()).unwrap();
        let a = s.amplitudes()[1];
        assert_abs_diff_eq!(a.re, phi.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(a.im, phi.sin(), epsilon = 1e-15);
    }

    #[test]
    fn expectation_of_basis_states() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&BoundGate::Ry { qubit: 0, angle: PI }).unwrap();
        assert_abs_diff_eq!(s.expectation_z(0).unwrap(), -1.0, epsilon = 1e-15);
        assert!(s.expectation_z(1).is_err());
    }

    #[test]
    fn expectation_after_ry_is_cosine() {
        for theta in [0.0, PI / 3.0, PI / 2.0] {
            let s = StateVector::zero(1)
                .unwrap()
                .run(&[BoundGate::Ry { qubit: 0, angle: theta }])
                .unwrap();
            // amplitudes (cos t/2, sin t/2) => cos^2 - sin^2 = cos t
            assert_abs_diff_eq!(s.expectation_z(0).unwrap(), theta.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn run_is_pure_and_composes() {
        let s0 = StateVector::zero(2).unwrap();
        assert_eq!(s0.run(&[]).unwrap(), s0);
        let g = BoundGate::Ry { qubit: 0, angle: PI };
        let s = s0.run(&[g, g]).unwrap();
        // RY(2pi) = -I
        assert_abs_diff_eq!(s.amplitudes()[0].re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.expectation_z(0).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(s0.amplitudes()[0], c(1.0, 0.0));
    }

    #[test]
    fn invalid_gates_rejected() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(s.apply(&BoundGate::Ry { qubit: 2, angle: 0.1 }).is_err());
        assert!(s.apply(&BoundGate::Cnot { control: 1, target: 1 }).is_err());
        assert!(s.apply(&BoundGate::MultiZ { mask: 0b100, angle: 0.1 }).is_err());
        assert!(BoundGate::multi_z(&[0, 0], 0.1).is_err());
        assert!(BoundGate::multi_z(&[], 0.1).is_err());
    }

    #[test]
    fn ladder_matches_direct_multiz() {
        let prep = [
            BoundGate::Ry { qubit: 0, angle: 0.3 },
            BoundGate::Ry { qubit: 1, angle: 1.1 },
            BoundGate::Ry { qubit: 2, angle: -0.7 },
            BoundGate::Ry { qubit: 3, angle: 2.2 },
        ];
        let base = StateVector::zero(4).unwrap().run(&prep).unwrap();
        for qs in [&[0usize, 1][..], &[1, 3], &[0, 2, 3], &[0, 1, 2]] {
            let g = BoundGate::multi_z(qs, 0.813).unwrap();
            let mut direct = base.clone();
            direct.apply(&g).unwrap();
            let mut ladder = base.clone();
            ladder.apply_decomposed(&g).unwrap();
            for (a, b) in direct.amplitudes().iter().zip(ladder.amplitudes()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
