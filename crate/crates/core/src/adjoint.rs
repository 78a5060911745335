//! Adjoint-mode differentiation of QNN outputs.
//!
//! One forward sweep and one backward sweep (un-computing the state with
//! inverse gates) give `df/da_k` for every gate argument `a_k`:
//! `df/da_k = Im <lambda_k| P_k |psi_k>` with `lambda_k = U_{>k}^dag Z_0 psi`.
//! Carrying forward-mode tangents along an input direction through both
//! sweeps yields a full column of mixed second derivatives per sweep.
//!
//! Results equal the shift rule up to round-off, at a cost independent of the
//! parameter count. Training uses this path; the shift rule stays the reference.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::circuit::{AngleSource, QnnTemplate};
use crate::error::Result;
use crate::gradients::GradientReport;
use crate::linalg::Matrix;
use crate::statevec::{BoundGate, StateVector};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn arg_scale(g: &BoundGate) -> f64 {
    match g {
        BoundGate::MultiZ { .. } => 2.0,
        _ => 1.0,
    }
}

fn inverse(g: &BoundGate) -> BoundGate {
    match *g {
        BoundGate::Ry { qubit, angle } => BoundGate::Ry { qubit, angle: -angle },
        BoundGate::Rz { qubit, angle } => BoundGate::Rz { qubit, angle: -angle },
        BoundGate::MultiZ { mask, angle } => BoundGate::MultiZ { mask, angle: -angle },
        g @ BoundGate::Cnot { .. } => g,
    }
}

/// `dst = P src` for the generator `P` of a rotation gate.
fn apply_generator(g: &BoundGate, src: &[Complex64], dst: &mut [Complex64]) {
    match *g {
        BoundGate::Ry { qubit, .. } => {
            let bit = 1usize << qubit;
            for i in 0..src.len() {
                if i & bit == 0 {
                    dst[i] = -I * src[i | bit];
                    dst[i | bit] = I * src[i];
                }
            }
        }
        BoundGate::Rz { qubit, .. } => {
            let bit = 1usize << qubit;
            for (i, (d, s)) in dst.iter_mut().zip(src).enumerate() {
                *d = if i & bit == 0 { *s } else { -*s };
            }
        }
        BoundGate::MultiZ { mask, .. } => {
            let mask = mask as usize;
            for (i, (d, s)) in dst.iter_mut().zip(src).enumerate() {
                *d = if (i & mask).count_ones().is_multiple_of(2) { *s } else { -*s };
            }
        }
        BoundGate::Cnot { .. } => dst.iter_mut().for_each(|d| *d = Complex64::new(0.0, 0.0)),
    }
}

/// `Im <a|b>`
fn im_inner(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.im - x.im * y.re).sum()
}

fn apply_z0(src: &[Complex64], dst: &mut [Complex64]) {
    for (i, (d, s)) in dst.iter_mut().zip(src).enumerate() {
        *d = if i & 1 == 0 { *s } else { -*s };
    }
}

/// Adjoint-mode evaluator bound to one template.
#[derive(Debug, Clone)]
pub struct AdjointEvaluator<'t> {
    template: &'t QnnTemplate,
    gates: Vec<BoundGate>,
    psi: StateVector,
    lam: StateVector,
    dpsi: StateVector,
    dlam: StateVector,
    tmp: Vec<Complex64>,
    sweeps: u64,
}

struct Sweep {
    value: f64,
    /// `df/dangle` per gate.
    gate_grad: Vec<f64>,
    /// Directional derivative of `gate_grad` along the tangent; empty without one.
    gate_grad_dot: Vec<f64>,
}

impl<'t> AdjointEvaluator<'t> {
    pub fn new(template: &'t QnnTemplate) -> Self {
        let zero = StateVector::zero(template.num_qubits()).expect("template qubit count validated at assembly");
        let len = zero.amplitudes().len();
        Self {
            template,
            gates: Vec::new(),
            psi: zero.clone(),
            lam: zero.clone(),
            dpsi: zero.clone(),
            dlam: zero,
            tmp: vec![Complex64::new(0.0, 0.0); len],
            sweeps: 0,
        }
    }

    /// Forward-plus-backward sweeps performed so far.
    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    /// `d angle_k / d y_j` for every gate.
    fn angle_tangent(&self, y: &[f64], j: usize) -> Vec<f64> {
        let mut t = vec![0.0; self.gates.len()];
        for &gi in self.template.input_gates() {
            if let Some(AngleSource::Input(expr)) = self.template.gates()[gi].angle() {
                t[gi] = expr.partial(y, j);
            }
        }
        t
    }

    fn sweep(&mut self, tangent: Option<&[f64]>) -> Sweep {
        self.sweeps += 1;
        let k_total = self.gates.len();
        self.psi.reset();
        let with_t = tangent.is_some();
        if with_t {
            self.dpsi.amplitudes_mut().iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        }
        for (k, g) in self.gates.iter().enumerate() {
            self.psi.apply_unchecked(g);
            if let Some(t) = tangent {
                self.dpsi.apply_unchecked(g);
                let adot = t[k] * arg_scale(g);
                if adot != 0.0 {
                    // d/da G psi = (-i P / 2) G psi
                    apply_generator(g, self.psi.amplitudes(), &mut self.tmp);
                    let c = -0.5 * adot * I;
                    for (d, p) in self.dpsi.amplitudes_mut().iter_mut().zip(&self.tmp) {
                        *d += c * p;
                    }
                }
            }
        }
        let value = self.psi.expectation_z_unchecked(0);
        apply_z0(self.psi.amplitudes(), self.lam.amplitudes_mut());
        if with_t {
            apply_z0(self.dpsi.amplitudes(), self.dlam.amplitudes_mut());
        }
        let mut gate_grad = vec![0.0; k_total];
        let mut gate_grad_dot = if with_t { vec![0.0; k_total] } else { Vec::new() };
        for k in (0..k_total).rev() {
            let g = self.gates[k];
            let scale = arg_scale(&g);
            let inv = inverse(&g);
            if !matches!(g, BoundGate::Cnot { .. }) {
                apply_generator(&g, self.psi.amplitudes(), &mut self.tmp);
                gate_grad[k] = scale * im_inner(self.lam.amplitudes(), &self.tmp);
                if with_t {
                    let mut gd = im_inner(self.dlam.amplitudes(), &self.tmp);
                    apply_generator(&g, self.dpsi.amplitudes(), &mut self.tmp);
                    gd += im_inner(self.lam.amplitudes(), &self.tmp);
                    gate_grad_dot[k] = scale * gd;
                }
            }
            let adot = tangent.map_or(0.0, |t| t[k] * scale);
            if adot != 0.0 {
                // dpsi_{k-1} = G^dag (dpsi_k - adot (-i P/2) psi_k)
                apply_generator(&g, self.psi.amplitudes(), &mut self.tmp);
                let c = 0.5 * adot * I;
                for (d, p) in self.dpsi.amplitudes_mut().iter_mut().zip(&self.tmp) {
                    *d += c * p;
                }
                // dlam_{k-1} = G^dag (dlam_k + adot (i P/2) lam_k)
                apply_generator(&g, self.lam.amplitudes(), &mut self.tmp);
                for (d, p) in self.dlam.amplitudes_mut().iter_mut().zip(&self.tmp) {
                    *d += c * p;
                }
            }
            self.psi.apply_unchecked(&inv);
            self.lam.apply_unchecked(&inv);
            if with_t {
                self.dpsi.apply_unchecked(&inv);
                self.dlam.apply_unchecked(&inv);
            }
        }
        Sweep { value, gate_grad, gate_grad_dot }
    }

    fn input_gradient(&self, y: &[f64], gate_grad: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.template.num_features()];
        for &gi in self.template.input_gates() {
            if let Some(AngleSource::Input(expr)) = self.template.gates()[gi].angle() {
                for j in expr.indices() {
                    grad[j] += gate_grad[gi] * expr.partial(y, j);
                }
            }
        }
        grad
    }

    pub fn grad_params(&mut self, y: &[f64], theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.template.bind_into(y, theta, &mut self.gates)?;
        let s = self.sweep(None);
        Ok((s.value, self.template.param_gates().iter().map(|&g| s.gate_grad[g]).collect()))
    }

    pub fn grad_inputs(&mut self, y: &[f64], theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.template.bind_into(y, theta, &mut self.gates)?;
        let s = self.sweep(None);
        Ok((s.value, self.input_gradient(y, &s.gate_grad)))
    }

    /// Value, gradients and optionally the `d x N` mixed Hessian (`1 + N` sweeps).
    pub fn report(&mut self, y: &[f64], theta: &[f64], with_hessian: bool) -> Result<GradientReport> {
        self.template.bind_into(y, theta, &mut self.gates)?;
        let s = self.sweep(None);
        let d_params = self.template.param_gates().iter().map(|&g| s.gate_grad[g]).collect();
        let d_inputs = self.input_gradient(y, &s.gate_grad);
        let mixed_hessian = if with_hessian {
            let n = self.template.num_features();
            let mut h = Matrix::zeros(self.template.num_params(), n);
            for j in 0..n {
                let t = self.angle_tangent(y, j);
                let sj = self.sweep(Some(&t));
                for (p, &g) in self.template.param_gates().iter().enumerate() {
                    h[(p, j)] = sj.gate_grad_dot[g];
                }
            }
            Some(h)
        } else {
            None
        };
        Ok(GradientReport { value: s.value, d_params, d_inputs, mixed_hessian })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{assemble_qnn, CouplingSpec, Entanglement};
    use crate::gradients::{HessianMode, QnnEvaluator};

    #[test]
    fn matches_shift_rule() {
        let spec = CouplingSpec::new(3, Entanglement::Full, vec![vec![0, 1, 2]]).unwrap();
        let t = assemble_qnn(&spec, &spec, 3).unwrap();
        let theta: Vec<f64> = (0..t.num_params()).map(|i| (0.37 * i as f64).sin() * 1.3).collect();
        let y = [0.4, -1.1, 2.3];
        let shift = QnnEvaluator::new(&t).report(&y, &theta, true).unwrap();
        let mut adj = AdjointEvaluator::new(&t);
        let r = adj.report(&y, &theta, true).unwrap();
        assert!((r.value - shift.value).abs() < 1e-13);
        for (a, b) in r.d_params.iter().zip(&shift.d_params) {
            assert!((a - b).abs() < 1e-11, "{a} {b}");
        }
        for (a, b) in r.d_inputs.iter().zip(&shift.d_inputs) {
            assert!((a - b).abs() < 1e-11, "{a} {b}");
        }
        let hs = QnnEvaluator::new(&t).mixed_hessian(&y, &theta, HessianMode::PerOccurrence).unwrap();
        assert!(r.mixed_hessian.unwrap().max_abs_diff(&hs) < 1e-10);
        assert_eq!(adj.sweeps(), 4);
    }
}
