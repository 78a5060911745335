//! The QNN force field: descriptor pipeline, circuit, and label scaling.
//!
//! The circuit output `f` lives in `[-1, 1]`, so energies are mapped through
//! an affine label transform `E = scale * f + offset`. Training works in
//! scaled units (`(E - offset) / scale` for energies, `F / scale` for forces).

use alloc::string::String;
use alloc::vec::Vec;

use crate::adjoint::AdjointEvaluator;
use crate::circuit::QnnTemplate;
use crate::descriptors::DescriptorPipeline;
use crate::error::{bail, Result};
use crate::gradients::{GradientReport, QnnEvaluator};
use crate::linalg::Matrix;

/// Fraction of `[-1, 1]` the training energies are stretched over.
pub const DEFAULT_LABEL_BAND: f64 = 0.9;

/// Affine energy transform `E = scale * f + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelScaling {
    pub scale: f64,
    pub offset: f64,
}

impl LabelScaling {
    pub fn new(scale: f64, offset: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !offset.is_finite() {
            bail!(Argument, "label scale must be positive and finite, got scale={scale} offset={offset}");
        }
        Ok(Self { scale, offset })
    }

    /// Maps `[E_min, E_max]` onto `[-band, band]`.
    pub fn fit(energies: &[f64], band: f64) -> Result<Self> {
        if energies.is_empty() {
            bail!(Data, "no energies to fit label scaling");
        }
        if !(band > 0.0 && band <= 1.0) {
            bail!(Argument, "label band must lie in (0, 1], got {band}");
        }
        let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let half = 0.5 * (hi - lo);
        if !(half > 0.0) {
            bail!(DegenerateScaler, "all training energies equal {lo}");
        }
        Self::new(half / band, 0.5 * (hi + lo))
    }

    pub fn identity() -> Self {
        Self { scale: 1.0, offset: 0.0 }
    }

    pub fn to_scaled(&self, energy: f64) -> f64 {
        (energy - self.offset) / self.scale
    }

    pub fn from_scaled(&self, f: f64) -> f64 {
        self.scale * f + self.offset
    }
}

/// Anything that maps a Cartesian geometry to an energy (eV) and forces (eV/A).
pub trait Potential {
    fn energy(&self, cartesian: &[f64]) -> Result<f64>;

    fn energy_and_forces(&self, cartesian: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// What [`ScaledModel::evaluate`] should compute beyond the energy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalRequest {
    pub param_grad: bool,
    pub forces: bool,
    /// `d(force)/d(param)`; implies forces.
    pub force_param_grad: bool,
}

/// Model outputs in scaled units for one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub energy: f64,
    pub d_params: Option<Vec<f64>>,
    /// `-grad_C f`, length `3n`.
    pub forces: Option<Vec<f64>>,
    /// Shape `3n x d`.
    pub force_params: Option<Matrix>,
}

/// A trainable model seen in scaled units. Shared by the QNN and the classical baseline.
pub trait ScaledModel {
    fn num_params(&self) -> usize;

    fn params(&self) -> &[f64];

    fn set_params(&mut self, params: &[f64]) -> Result<()>;

    fn labels(&self) -> LabelScaling;

    /// Evaluates at one geometry. `circuit_runs` accumulates circuit
    /// simulations (shift-rule runs, or adjoint sweeps); classical models leave it alone.
    fn evaluate(&self, cartesian: &[f64], request: EvalRequest, circuit_runs: &mut u64) -> Result<Evaluation>;
}

/// How circuit derivatives are computed. Both are exact; they differ in cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffMethod {
    /// Parameter-shift rule: `2` runs per gate occurrence, `4` per Hessian entry.
    ShiftRule,
    /// Forward/backward statevector sweeps: `1 + N` sweeps for everything.
    #[default]
    Adjoint,
}

impl DiffMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DiffMethod::ShiftRule => "shift",
            DiffMethod::Adjoint => "adjoint",
        }
    }
}

impl core::str::FromStr for DiffMethod {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "shift" | "shift-rule" => DiffMethod::ShiftRule,
            "adjoint" => DiffMethod::Adjoint,
            other => bail!(Argument, "unknown differentiation method `{other}`"),
        })
    }
}

/// Provenance carried with a model.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelMeta {
    pub preset: String,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QffModel {
    template: QnnTemplate,
    pipeline: DescriptorPipeline,
    params: Vec<f64>,
    labels: LabelScaling,
    pub meta: ModelMeta,
    /// Not persisted; only affects cost.
    pub diff: DiffMethod,
}

impl QffModel {
    pub fn new(
        template: QnnTemplate,
        pipeline: DescriptorPipeline,
        params: Vec<f64>,
        labels: LabelScaling,
        meta: ModelMeta,
    ) -> Result<Self> {
        if template.num_features() != pipeline.num_features() {
            bail!(
                Argument,
                "circuit takes {} features but the pipeline produces {}",
                template.num_features(),
                pipeline.num_features()
            );
        }
        if params.len() != template.num_params() {
            bail!(Argument, "circuit has {} parameters, got {}", template.num_params(), params.len());
        }
        LabelScaling::new(labels.scale, labels.offset)?;
        Ok(Self { template, pipeline, params, labels, meta, diff: DiffMethod::default() })
    }

    pub fn template(&self) -> &QnnTemplate {
        &self.template
    }

    pub fn pipeline(&self) -> &DescriptorPipeline {
        &self.pipeline
    }

    /// Raw circuit output `f_theta(W(C))`.
    pub fn circuit_output(&self, cartesian: &[f64]) -> Result<f64> {
        let y = self.pipeline.apply(cartesian)?;
        QnnEvaluator::new(&self.template).value(&y, &self.params)
    }

    pub fn predict_energy(&self, cartesian: &[f64]) -> Result<f64> {
        Ok(self.labels.from_scaled(self.circuit_output(cartesian)?))
    }

    pub fn predict_forces(&self, cartesian: &[f64]) -> Result<Vec<f64>> {
        Ok(self.energy_and_forces(cartesian)?.1)
    }
}

impl Potential for QffModel {
    fn energy(&self, cartesian: &[f64]) -> Result<f64> {
        self.predict_energy(cartesian)
    }

    fn energy_and_forces(&self, cartesian: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut runs = 0;
        let req = EvalRequest { forces: true, ..Default::default() };
        let ev = self.evaluate(cartesian, req, &mut runs)?;
        let forces = ev.forces.expect("requested").into_iter().map(|f| f * self.labels.scale).collect();
        Ok((self.labels.from_scaled(ev.energy), forces))
    }
}

impl ScaledModel for QffModel {
    fn num_params(&self) -> usize {
        self.params.len()
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            bail!(Argument, "expected {} parameters, got {}", self.params.len(), params.len());
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn labels(&self) -> LabelScaling {
        self.labels
    }

    fn evaluate(&self, cartesian: &[f64], request: EvalRequest, circuit_runs: &mut u64) -> Result<Evaluation> {
        let want_forces = request.forces || request.force_param_grad;
        let out = self.pipeline.transform(cartesian, want_forces)?;
        let y = &out.features;
        let mut result = Evaluation { energy: 0.0, d_params: None, forces: None, force_params: None };
        let mut shift = QnnEvaluator::new(&self.template);
        let mut adjoint = AdjointEvaluator::new(&self.template);
        let adj = self.diff == DiffMethod::Adjoint;
        if want_forces {
            let jac = out.jacobian.as_ref().expect("requested");
            let report = if request.param_grad || request.force_param_grad {
                let with_h = request.force_param_grad;
                if adj {
                    adjoint.report(y, &self.params, with_h)?
                } else {
                    shift.report(y, &self.params, with_h)?
                }
            } else {
                let (value, d_inputs) =
                    if adj { adjoint.grad_inputs(y, &self.params)? } else { shift.grad_inputs(y, &self.params)? };
                GradientReport { value, d_params: Vec::new(), d_inputs, mixed_hessian: None }
            };
            result.energy = report.value;
            result.forces = Some(jac.vec_mul(&report.d_inputs).into_iter().map(|x| -x).collect());
            if request.param_grad {
                result.d_params = Some(report.d_params);
            }
            if let Some(h) = report.mixed_hessian {
                // dF_c/dtheta_p = -sum_j H[p][j] J[j][c]
                let mut fp = Matrix::zeros(cartesian.len(), self.params.len());
                for p in 0..self.params.len() {
                    let col = jac.vec_mul(h.row(p));
                    for (c, v) in col.into_iter().enumerate() {
                        fp[(c, p)] = -v;
                    }
                }
                result.force_params = Some(fp);
            }
        } else if request.param_grad {
            let (value, grad) =
                if adj { adjoint.grad_params(y, &self.params)? } else { shift.grad_params(y, &self.params)? };
            result.energy = value;
            result.d_params = Some(grad);
        } else {
            result.energy = shift.value(y, &self.params)?;
        }
        *circuit_runs += shift.circuit_runs() + adjoint.sweeps();
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_scaling_maps_range_to_band() {
        let l = LabelScaling::fit(&[-3.0, 1.0, 5.0], 0.9).unwrap();
        assert!((l.to_scaled(-3.0) + 0.9).abs() < 1e-15);
        assert!((l.to_scaled(5.0) - 0.9).abs() < 1e-15);
        assert!((l.from_scaled(l.to_scaled(2.5)) - 2.5).abs() < 1e-15);
        assert!(LabelScaling::fit(&[1.0, 1.0], 0.9).is_err());
        assert!(LabelScaling::new(-1.0, 0.0).is_err());
    }
}
