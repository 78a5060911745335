//! Shift-rule differentiation of QNN outputs.
//!
//! Every parameterized gate is `exp(-i (a/2) P)` for a Pauli string `P` once
//! its angle is rewritten as a rotation argument `a`: `a = angle` for `RY`/`RZ`
//! and `a = 2 * angle` for `MULTIZ`. The derivative with respect to the gate
//! angle is then
//!
//! ```text
//! df/dangle = s/2 * [ f(a + pi/2) - f(a - pi/2) ]
//! ```
//!
//! with `s` the argument scale (1 or 2). Input features can appear in many
//! gates (re-uploading, product terms), so input derivatives shift each
//! occurrence independently and combine them with the product-rule
//! coefficient `prod_{k != j} y_k`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::circuit::{AngleSource, QnnTemplate};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::statevec::{BoundGate, StateVector};

/// Cap on cached prefix amplitudes; larger circuits replay from `|0>`.
const PREFIX_CACHE_LIMIT: usize = 1 << 22;

fn arg_scale(g: &BoundGate) -> f64 {
    match g {
        BoundGate::MultiZ { .. } => 2.0,
        _ => 1.0,
    }
}

fn with_angle(g: &BoundGate, angle: f64) -> BoundGate {
    match *g {
        BoundGate::Ry { qubit, .. } => BoundGate::Ry { qubit, angle },
        BoundGate::Rz { qubit, .. } => BoundGate::Rz { qubit, angle },
        BoundGate::MultiZ { mask, .. } => BoundGate::MultiZ { mask, angle },
        g @ BoundGate::Cnot { .. } => g,
    }
}

/// Value and derivatives of `f_theta(y)` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    pub value: f64,
    pub d_params: Vec<f64>,
    pub d_inputs: Vec<f64>,
    /// `d^2 f / d theta_mu d y_j`, shape `d x N`.
    pub mixed_hessian: Option<Matrix>,
}

/// How the mixed second derivative treats input features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HessianMode {
    /// Shift every encoding occurrence separately and apply chain coefficients. Exact.
    #[default]
    PerOccurrence,
    /// Shift the whole feature `y_j` by `+-pi/2` at once. Only exact when `y_j`
    /// enters a single `RY` gate; kept for comparison.
    WholeFeature,
}

/// Circuit evaluator bound to one template. Tracks how many circuits it has run.
#[derive(Debug, Clone)]
pub struct QnnEvaluator<'t> {
    template: &'t QnnTemplate,
    gates: Vec<BoundGate>,
    prefix: Vec<StateVector>,
    use_prefix: bool,
    scratch: StateVector,
    value: f64,
    circuit_runs: u64,
}

impl<'t> QnnEvaluator<'t> {
    pub fn new(template: &'t QnnTemplate) -> Self {
        let n = template.num_qubits();
        let scratch = StateVector::zero(n).expect("template qubit count validated at assembly");
        let use_prefix = (template.gates().len() + 1).saturating_mul(1 << n) <= PREFIX_CACHE_LIMIT;
        Self {
            template,
            gates: Vec::new(),
            prefix: Vec::new(),
            use_prefix,
            scratch,
            value: 0.0,
            circuit_runs: 0,
        }
    }

    pub fn template(&self) -> &'t QnnTemplate {
        self.template
    }

    /// Circuits simulated so far.
    pub fn circuit_runs(&self) -> u64 {
        self.circuit_runs
    }

    pub fn reset_counter(&mut self) {
        self.circuit_runs = 0;
    }

    /// Binds the point and runs the unshifted circuit. Returns `f_theta(y)`.
    fn prepare(&mut self, y: &[f64], theta: &[f64]) -> Result<f64> {
        self.template.bind_into(y, theta, &mut self.gates)?;
        self.scratch.reset();
        if self.use_prefix {
            self.prefix.clear();
            for g in &self.gates {
                self.prefix.push(self.scratch.clone());
                self.scratch.apply_unchecked(g);
            }
        } else {
            for g in &self.gates {
                self.scratch.apply_unchecked(g);
            }
        }
        self.circuit_runs += 1;
        self.value = self.scratch.expectation_z_unchecked(0);
        Ok(self.value)
    }

    /// Runs the prepared circuit with rotation arguments of the listed gates
    /// shifted by the given amounts. `shifts` must be sorted by gate index.
    fn shifted(&mut self, shifts: &[(usize, f64)]) -> f64 {
        let first = shifts[0].0;
        let start = if self.use_prefix {
            self.scratch.copy_from(&self.prefix[first]);
            first
        } else {
            self.scratch.reset();
            0
        };
        let mut next = 0;
        for (gi, g) in self.gates.iter().enumerate().skip(start) {
            if next < shifts.len() && shifts[next].0 == gi {
                let delta = shifts[next].1 / arg_scale(g);
                let shifted = with_angle(g, g.angle().unwrap_or(0.0) + delta);
                self.scratch.apply_unchecked(&shifted);
                next += 1;
            } else {
                self.scratch.apply_unchecked(g);
            }
        }
        self.circuit_runs += 1;
        self.scratch.expectation_z_unchecked(0)
    }

    /// `df/dangle` for one gate of the prepared circuit (two runs).
    fn gate_derivative(&mut self, gate: usize) -> f64 {
        let scale = arg_scale(&self.gates[gate]);
        let plus = self.shifted(&[(gate, FRAC_PI_2)]);
        let minus = self.shifted(&[(gate, -FRAC_PI_2)]);
        0.5 * scale * (plus - minus)
    }

    /// `d^2 f / dangle_a dangle_b` for two distinct gates (four runs).
    fn gate_second_derivative(&mut self, a: usize, b: usize) -> f64 {
        let scale = arg_scale(&self.gates[a]) * arg_scale(&self.gates[b]);
        let (lo, hi, flip) = if a < b { (a, b, false) } else { (b, a, true) };
        let mut run = |sa: f64, sb: f64| {
            let (s_lo, s_hi) = if flip { (sb, sa) } else { (sa, sb) };
            self.shifted(&[(lo, s_lo), (hi, s_hi)])
        };
        let pp = run(FRAC_PI_2, FRAC_PI_2);
        let pm = run(FRAC_PI_2, -FRAC_PI_2);
        let mp = run(-FRAC_PI_2, FRAC_PI_2);
        let mm = run(-FRAC_PI_2, -FRAC_PI_2);
        0.25 * scale * (pp - pm - mp + mm)
    }

    pub fn value(&mut self, y: &[f64], theta: &[f64]) -> Result<f64> {
        self.template.bind_into(y, theta, &mut self.gates)?;
        self.scratch.reset();
        for g in &self.gates {
            self.scratch.apply_unchecked(g);
        }
        self.circuit_runs += 1;
        Ok(self.scratch.expectation_z_unchecked(0))
    }

    /// Parameter gradient. Exactly `2d` shifted runs on top of the unshifted one.
    pub fn grad_params(&mut self, y: &[f64], theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let value = self.prepare(y, theta)?;
        let grad = self.param_gradient_prepared();
        Ok((value, grad))
    }

    fn param_gradient_prepared(&mut self) -> Vec<f64> {
        let template = self.template;
        template.param_gates().iter().map(|&g| self.gate_derivative(g)).collect()
    }

    fn input_gradient_prepared(&mut self, y: &[f64]) -> Vec<f64> {
        let template = self.template;
        let mut grad = vec![0.0; template.num_features()];
        for &gi in template.input_gates() {
            let Some(AngleSource::Input(expr)) = template.gates()[gi].angle() else {
                unreachable!("input gate list only holds input-driven gates")
            };
            let expr = *expr;
            let d = self.gate_derivative(gi);
            for j in expr.indices() {
                grad[j] += d * expr.partial(y, j);
            }
        }
        grad
    }

    /// Input gradient, shifting each encoding occurrence separately.
    pub fn grad_inputs(&mut self, y: &[f64], theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let value = self.prepare(y, theta)?;
        Ok((value, self.input_gradient_prepared(y)))
    }

    fn mixed_hessian_prepared(&mut self, y: &[f64]) -> Matrix {
        let template = self.template;
        let mut h = Matrix::zeros(template.num_params(), template.num_features());
        for (p, &pg) in template.param_gates().iter().enumerate() {
            for &eg in template.input_gates() {
                let Some(AngleSource::Input(expr)) = template.gates()[eg].angle() else {
                    unreachable!("input gate list only holds input-driven gates")
                };
                let expr = *expr;
                let d2 = self.gate_second_derivative(pg, eg);
                for j in expr.indices() {
                    h[(p, j)] += d2 * expr.partial(y, j);
                }
            }
        }
        h
    }

    /// `d^2 f / d theta_mu d y_j` as a `d x N` matrix.
    pub fn mixed_hessian(&mut self, y: &[f64], theta: &[f64], mode: HessianMode) -> Result<Matrix> {
        match mode {
            HessianMode::PerOccurrence => {
                self.prepare(y, theta)?;
                Ok(self.mixed_hessian_prepared(y))
            }
            HessianMode::WholeFeature => self.mixed_hessian_whole_feature(y, theta),
        }
    }

    fn mixed_hessian_whole_feature(&mut self, y: &[f64], theta: &[f64]) -> Result<Matrix> {
        let template = self.template;
        let n = template.num_features();
        let mut h = Matrix::zeros(template.num_params(), n);
        let mut shifted_y = y.to_vec();
        for j in 0..n {
            let mut column = [vec![0.0; template.num_params()], vec![0.0; template.num_params()]];
            for (slot, sign) in [(0usize, 1.0), (1, -1.0)] {
                shifted_y[j] = y[j] + sign * FRAC_PI_2;
                self.prepare(&shifted_y, theta)?;
                column[slot] = self.param_gradient_prepared();
            }
            shifted_y[j] = y[j];
            for p in 0..template.num_params() {
                h[(p, j)] = 0.5 * (column[0][p] - column[1][p]);
            }
        }
        Ok(h)
    }

    /// Value, both gradients, and optionally the mixed Hessian at one point.
    pub fn report(&mut self, y: &[f64], theta: &[f64], with_hessian: bool) -> Result<GradientReport> {
        let value = self.prepare(y, theta)?;
        let d_params = self.param_gradient_prepared();
        let d_inputs = self.input_gradient_prepared(y);
        let mixed_hessian = with_hessian.then(|| self.mixed_hessian_prepared(y));
        Ok(GradientReport { value, d_params, d_inputs, mixed_hessian })
    }
}

/// `f_theta(y) = <0| M^dag Z_0 M |0>`.
pub fn eval_qnn(template: &QnnTemplate, y: &[f64], theta: &[f64]) -> Result<f64> {
    QnnEvaluator::new(template).value(y, theta)
}

pub fn grad_params(template: &QnnTemplate, y: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
    Ok(QnnEvaluator::new(template).grad_params(y, theta)?.1)
}

pub fn grad_inputs(template: &QnnTemplate, y: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
    Ok(QnnEvaluator::new(template).grad_inputs(y, theta)?.1)
}

pub fn mixed_hessian(template: &QnnTemplate, y: &[f64], theta: &[f64]) -> Result<Matrix> {
    QnnEvaluator::new(template).mixed_hessian(y, theta, HessianMode::PerOccurrence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{assemble_qnn, CouplingSpec, Entanglement};
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;

    fn one_qubit(depth: usize) -> QnnTemplate {
        let spec = CouplingSpec::new(1, Entanglement::None, vec![]).unwrap();
        assemble_qnn(&spec, &spec, depth).unwrap()
    }

    #[test]
    fn identity_point_gives_plus_one() {
        let spec = CouplingSpec::new(3, Entanglement::Full, vec![vec![0, 1, 2]]).unwrap();
        let t = assemble_qnn(&spec, &spec, 2).unwrap();
        assert_abs_diff_eq!(eval_qnn(&t, &[0.0; 3], &vec![0.0; t.num_params()]).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn single_rotation_is_cosine() {
        // D=1 one qubit: RY(t0) RY(y) RY(t1); with y = 0 and t1 = 0 the output is cos(t0)
        let t = one_qubit(1);
        for theta in [0.0, 0.4, PI / 2.0, 2.5] {
            assert_abs_diff_eq!(eval_qnn(&t, &[0.0], &[theta, 0.0]).unwrap(), theta.cos(), epsilon = 1e-14);
        }
        let g = grad_params(&t, &[0.0], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-15);
        let g = grad_params(&t, &[0.0], &[PI / 2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g[0], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn mixed_derivative_of_cos_sum() {
        // f(theta, y) = cos(theta_0 + y + theta_1)
        let t = one_qubit(1);
        let h = mixed_hessian(&t, &[0.0], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(h[(0, 0)], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h[(1, 0)], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn evaluation_counts() {
        let spec = CouplingSpec::new(2, Entanglement::Linear, vec![]).unwrap();
        let t = assemble_qnn(&spec, &spec, 2).unwrap();
        let mut ev = QnnEvaluator::new(&t);
        let theta = vec![0.1; t.num_params()];
        ev.grad_params(&[0.2, 0.3], &theta).unwrap();
        assert_eq!(ev.circuit_runs(), 1 + 2 * t.num_params() as u64);
        ev.reset_counter();
        ev.grad_inputs(&[0.2, 0.3], &theta).unwrap();
        assert_eq!(ev.circuit_runs(), 1 + 2 * t.input_gates().len() as u64);
    }

    #[test]
    fn product_terms_vanish_with_zero_partner() {
        use crate::circuit::InputExpr;
        let e = InputExpr::new(&[0, 1]).unwrap();
        assert_eq!(e.partial(&[0.4, 0.0], 0), 0.0);
        assert_eq!(e.partial(&[0.4, 0.0], 1), 0.4);
        assert_eq!(e.partial(&[0.4, 0.0, 9.0], 2), 0.0);
    }

    #[test]
    fn whole_feature_shift_exact_for_single_occurrence() {
        let t = one_qubit(1);
        let theta = [0.3, -0.8];
        let mut ev = QnnEvaluator::new(&t);
        let exact = ev.mixed_hessian(&[0.6], &theta, HessianMode::PerOccurrence).unwrap();
        let literal = ev.mixed_hessian(&[0.6], &theta, HessianMode::WholeFeature).unwrap();
        assert!(exact.max_abs_diff(&literal) < 1e-13);
    }
}
