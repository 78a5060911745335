//! Fully connected tanh networks used as the classical comparison.
//!
//! Parameters are stored flat, layer by layer: the `out x in` weight matrix
//! (row-major) followed by the `out` biases. The output layer is linear.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these whenever std is linked
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::CouplingSpec;
use crate::descriptors::DescriptorPipeline;
use crate::error::{bail, Result};
use crate::linalg::Matrix;
use crate::model::{EvalRequest, Evaluation, LabelScaling, ModelMeta, Potential, ScaledModel};

/// Layer widths, input first. Output width is 1 and there is at least one hidden layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    widths: Vec<usize>,
    pub seed: u64,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>, seed: u64) -> Result<Self> {
        if widths.len() < 3 {
            bail!(Argument, "need input, at least one hidden layer and output, got {widths:?}");
        }
        if widths.last() != Some(&1) {
            bail!(Argument, "output width must be 1, got {widths:?}");
        }
        if widths.contains(&0) {
            bail!(Argument, "zero-width layer in {widths:?}");
        }
        Ok(Self { widths, seed })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    /// `sum(w_in * w_out + w_out)`.
    pub fn num_params(&self) -> usize {
        count_params(&self.widths)
    }

    /// Count excluding biases, the other convention in use.
    pub fn num_weights(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1]).sum()
    }
}

fn count_params(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

/// Value and exact derivatives of one forward/backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub value: f64,
    pub d_params: Vec<f64>,
    pub d_inputs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    spec: MlpSpec,
    params: Vec<f64>,
}

impl Mlp {
    /// Xavier-uniform weights `U(+-sqrt(6/(fan_in+fan_out)))`, zero biases.
    pub fn xavier(spec: &MlpSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut params = Vec::with_capacity(spec.num_params());
        for w in spec.widths.windows(2) {
            let bound = (6.0 / (w[0] + w[1]) as f64).sqrt();
            params.extend((0..w[0] * w[1]).map(|_| rng.gen_range(-bound..=bound)));
            params.extend(core::iter::repeat_n(0.0, w[1]));
        }
        Self { spec: spec.clone(), params }
    }

    pub fn from_params(spec: MlpSpec, params: Vec<f64>) -> Result<Self> {
        if params.len() != spec.num_params() {
            bail!(Argument, "spec {:?} has {} parameters, got {}", spec.widths, spec.num_params(), params.len());
        }
        Ok(Self { spec, params })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.input_width() {
            bail!(Argument, "network takes {} inputs, got {}", self.spec.input_width(), x.len());
        }
        Ok(())
    }

    /// Activations per layer, input included; the last entry is the linear output.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let widths = &self.spec.widths;
        let mut acts = vec![x.to_vec()];
        let mut offset = 0;
        for (l, w) in widths.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let (weights, rest) = self.params[offset..].split_at(n_in * n_out);
            let bias = &rest[..n_out];
            let prev = &acts[l];
            let last = l + 2 == widths.len();
            let next = (0..n_out)
                .map(|o| {
                    let z = bias[o] + weights[o * n_in..(o + 1) * n_in].iter().zip(prev).map(|(a, b)| a * b).sum::<f64>();
                    if last {
                        z
                    } else {
                        z.tanh()
                    }
                })
                .collect();
            acts.push(next);
            offset += n_in * n_out + n_out;
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.activations(x).last().expect("output layer")[0])
    }

    pub fn backward(&self, x: &[f64]) -> Result<MlpGradients> {
        self.check_input(x)?;
        Ok(self.pass(x, None).0)
    }

    /// Mixed second derivatives `d^2 f / d param d x . v` for each direction `v`
    /// in `directions`, as a `d x directions.len()` matrix.
    pub fn mixed_directional(&self, x: &[f64], directions: &[Vec<f64>]) -> Result<(MlpGradients, Matrix)> {
        self.check_input(x)?;
        let mut h = Matrix::zeros(self.params.len(), directions.len());
        let mut base = None;
        for (j, v) in directions.iter().enumerate() {
            if v.len() != x.len() {
                bail!(Argument, "direction has length {}, expected {}", v.len(), x.len());
            }
            let (g, dot) = self.pass(x, Some(v));
            for (p, d) in dot.into_iter().enumerate() {
                h[(p, j)] = d;
            }
            base.get_or_insert(g);
        }
        let base = match base {
            Some(b) => b,
            None => self.pass(x, None).0,
        };
        Ok((base, h))
    }

    /// Reverse pass, with an optional forward-mode input tangent carried through it.
    /// Returns the gradients and the tangent of the parameter gradient.
    fn pass(&self, x: &[f64], tangent: Option<&[f64]>) -> (MlpGradients, Vec<f64>) {
        let widths = &self.spec.widths;
        let layers = widths.len() - 1;
        let acts = self.activations(x);
        let mut offsets = Vec::with_capacity(layers);
        let mut off = 0;
        for w in widths.windows(2) {
            offsets.push(off);
            off += w[0] * w[1] + w[1];
        }

        // Forward tangents of the activations.
        let dacts: Option<Vec<Vec<f64>>> = tangent.map(|t| {
            let mut d = vec![t.to_vec()];
            for l in 0..layers {
                let (n_in, n_out) = (widths[l], widths[l + 1]);
                let weights = &self.params[offsets[l]..offsets[l] + n_in * n_out];
                let prev = &d[l];
                let next = (0..n_out)
                    .map(|o| {
                        let z = weights[o * n_in..(o + 1) * n_in].iter().zip(prev).map(|(a, b)| a * b).sum::<f64>();
                        if l + 1 == layers {
                            z
                        } else {
                            let a = acts[l + 1][o];
                            (1.0 - a * a) * z
                        }
                    })
                    .collect();
                d.push(next);
            }
            d
        });

        let mut d_params = vec![0.0; self.params.len()];
        let mut d_dot = if tangent.is_some() { vec![0.0; self.params.len()] } else { Vec::new() };
        // delta: d f / d z at the current layer; delta_dot its tangent.
        let mut delta = vec![1.0];
        let mut delta_dot = vec![0.0];
        for l in (0..layers).rev() {
            let (n_in, n_out) = (widths[l], widths[l + 1]);
            let off = offsets[l];
            let prev = &acts[l];
            for o in 0..n_out {
                for i in 0..n_in {
                    d_params[off + o * n_in + i] = delta[o] * prev[i];
                }
                d_params[off + n_in * n_out + o] = delta[o];
            }
            if let Some(da) = &dacts {
                let dprev = &da[l];
                for o in 0..n_out {
                    for i in 0..n_in {
                        d_dot[off + o * n_in + i] = delta_dot[o] * prev[i] + delta[o] * dprev[i];
                    }
                    d_dot[off + n_in * n_out + o] = delta_dot[o];
                }
            }
            let weights = &self.params[off..off + n_in * n_out];
            let mut g = vec![0.0; n_in];
            let mut g_dot = vec![0.0; n_in];
            for o in 0..n_out {
                for i in 0..n_in {
                    g[i] += weights[o * n_in + i] * delta[o];
                    g_dot[i] += weights[o * n_in + i] * delta_dot[o];
                }
            }
            if l == 0 {
                delta = g;
                break;
            }
            // Through tanh: a = tanh(z), da/dz = 1 - a^2.
            let a = &acts[l];
            delta = g.iter().zip(a).map(|(g, a)| g * (1.0 - a * a)).collect();
            delta_dot = match &dacts {
                Some(da) => (0..n_in).map(|i| g_dot[i] * (1.0 - a[i] * a[i]) - 2.0 * g[i] * a[i] * da[l][i]).collect(),
                None => vec![0.0; n_in],
            };
        }
        let value = acts[layers][0];
        (MlpGradients { value, d_params, d_inputs: delta }, d_dot)
    }
}

/// Network inputs built from descriptor features: each term is a product of features.
///
/// `raw` uses the features directly; `encoding` mirrors the angles fed to the
/// circuit's encoding block (singles, coupled pairs, higher-degree sets).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputExpansion {
    terms: Vec<Vec<usize>>,
    num_features: usize,
}

impl InputExpansion {
    pub fn raw(num_features: usize) -> Self {
        Self { terms: (0..num_features).map(|j| vec![j]).collect(), num_features }
    }

    pub fn encoding(spec: &CouplingSpec) -> Self {
        let n = spec.num_qubits;
        let mut terms: Vec<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
        terms.extend(spec.pairs().into_iter().map(|(a, b)| vec![a, b]));
        terms.extend(spec.degree_sets.iter().cloned());
        Self { terms, num_features: n }
    }

    pub fn new(terms: Vec<Vec<usize>>, num_features: usize) -> Result<Self> {
        if terms.is_empty() {
            bail!(Argument, "input expansion needs at least one term");
        }
        if let Some(t) = terms.iter().find(|t| t.is_empty() || t.iter().any(|&j| j >= num_features)) {
            bail!(Argument, "term {t:?} invalid for {num_features} features");
        }
        Ok(Self { terms, num_features })
    }

    pub fn terms(&self) -> &[Vec<usize>] {
        &self.terms
    }

    pub fn width(&self) -> usize {
        self.terms.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    /// Expanded inputs and their Jacobian w.r.t. the features (`width x num_features`).
    pub fn expand(&self, y: &[f64]) -> (Vec<f64>, Matrix) {
        let mut jac = Matrix::zeros(self.terms.len(), self.num_features);
        let values = self
            .terms
            .iter()
            .enumerate()
            .map(|(r, t)| {
                for (k, &j) in t.iter().enumerate() {
                    let others: f64 = t.iter().enumerate().filter(|&(m, _)| m != k).map(|(_, &i)| y[i]).product();
                    jac[(r, j)] += others;
                }
                t.iter().map(|&j| y[j]).product()
            })
            .collect();
        (values, jac)
    }
}

/// A network behind the descriptor pipeline, trained and evaluated like the QNN.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    mlp: Mlp,
    expansion: InputExpansion,
    pipeline: DescriptorPipeline,
    labels: LabelScaling,
    pub meta: ModelMeta,
}

impl MlpModel {
    pub fn new(
        mlp: Mlp,
        expansion: InputExpansion,
        pipeline: DescriptorPipeline,
        labels: LabelScaling,
        meta: ModelMeta,
    ) -> Result<Self> {
        if expansion.num_features() != pipeline.num_features() {
            bail!(
                Argument,
                "expansion reads {} features but the pipeline produces {}",
                expansion.num_features(),
                pipeline.num_features()
            );
        }
        if expansion.width() != mlp.spec().input_width() {
            bail!(Argument, "expansion has {} terms, network takes {}", expansion.width(), mlp.spec().input_width());
        }
        LabelScaling::new(labels.scale, labels.offset)?;
        Ok(Self { mlp, expansion, pipeline, labels, meta })
    }

    pub fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    pub fn expansion(&self) -> &InputExpansion {
        &self.expansion
    }

    pub fn pipeline(&self) -> &DescriptorPipeline {
        &self.pipeline
    }

    /// Raw network output for the expanded features of a geometry.
    pub fn network_output(&self, cartesian: &[f64]) -> Result<f64> {
        let y = self.pipeline.apply(cartesian)?;
        self.mlp.forward(&self.expansion.expand(&y).0)
    }
}

impl Potential for MlpModel {
    fn energy(&self, cartesian: &[f64]) -> Result<f64> {
        Ok(self.labels.from_scaled(self.network_output(cartesian)?))
    }

    fn energy_and_forces(&self, cartesian: &[f64]) -> Result<(f64, Vec<f64>)> {
        let req = EvalRequest { forces: true, ..Default::default() };
        let ev = self.evaluate(cartesian, req, &mut 0)?;
        let forces = ev.forces.expect("requested").into_iter().map(|f| f * self.labels.scale).collect();
        Ok((self.labels.from_scaled(ev.energy), forces))
    }
}

impl ScaledModel for MlpModel {
    fn num_params(&self) -> usize {
        self.mlp.params.len()
    }

    fn params(&self) -> &[f64] {
        &self.mlp.params
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.mlp.params.len() {
            bail!(Argument, "expected {} parameters, got {}", self.mlp.params.len(), params.len());
        }
        self.mlp.params.copy_from_slice(params);
        Ok(())
    }

    fn labels(&self) -> LabelScaling {
        self.labels
    }

    fn evaluate(&self, cartesian: &[f64], request: EvalRequest, _circuit_runs: &mut u64) -> Result<Evaluation> {
        let want_forces = request.forces || request.force_param_grad;
        let out = self.pipeline.transform(cartesian, want_forces)?;
        let (u, ju) = self.expansion.expand(&out.features);
        let mut result = Evaluation { energy: 0.0, d_params: None, forces: None, force_params: None };
        if !want_forces && !request.param_grad {
            result.energy = self.mlp.forward(&u)?;
            return Ok(result);
        }
        // Feature j moves the network input along column j of the expansion Jacobian.
        let (grads, mixed) = if request.force_param_grad {
            let dirs: Vec<Vec<f64>> =
                (0..ju.cols()).map(|j| (0..ju.rows()).map(|r| ju[(r, j)]).collect()).collect();
            let (g, h) = self.mlp.mixed_directional(&u, &dirs)?;
            (g, Some(h))
        } else {
            (self.mlp.backward(&u)?, None)
        };
        result.energy = grads.value;
        if want_forces {
            let jac = out.jacobian.as_ref().expect("requested");
            let d_features = ju.vec_mul(&grads.d_inputs);
            result.forces = Some(jac.vec_mul(&d_features).into_iter().map(|x| -x).collect());
            if let Some(h) = mixed {
                let mut fp = Matrix::zeros(cartesian.len(), self.mlp.params.len());
                for p in 0..self.mlp.params.len() {
                    for (c, v) in jac.vec_mul(h.row(p)).into_iter().enumerate() {
                        fp[(c, p)] = -v;
                    }
                }
                result.force_params = Some(fp);
            }
        }
        if request.param_grad {
            result.d_params = Some(grads.d_params);
        }
        Ok(result)
    }
}

/// Upper bound on hidden layers considered by the topology enumeration.
pub const MAX_HIDDEN_LAYERS: usize = 4;

/// Every hidden-layer layout (up to [`MAX_HIDDEN_LAYERS`] layers) whose parameter
/// count lies within `tolerance` of `budget`.
pub fn enumerate_topologies(budget: usize, input_width: usize, tolerance: usize) -> Vec<Vec<usize>> {
    fn recurse(
        widths: &mut Vec<usize>,
        used: usize,
        budget: usize,
        tolerance: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        let last = *widths.last().expect("input width present");
        // Closing with the linear output unit.
        let total = used + last + 1;
        if widths.len() > 1 && total.abs_diff(budget) <= tolerance {
            let mut w = widths.clone();
            w.push(1);
            out.push(w);
        }
        if widths.len() > MAX_HIDDEN_LAYERS {
            return;
        }
        for h in 1.. {
            // Adding a layer of width h costs last*h + h, then at least h + 1 to close.
            let cost = used + last * h + h + h + 1;
            if cost > budget + tolerance {
                break;
            }
            widths.push(h);
            recurse(widths, used + last * h + h, budget, tolerance, out);
            widths.pop();
        }
    }
    let mut out = Vec::new();
    if input_width > 0 {
        recurse(&mut vec![input_width], 0, budget, tolerance, &mut out);
    }
    out
}

/// Samples up to `trials` distinct layouts within `tolerance` of `budget` and keeps
/// the one `score` rates lowest (e.g. validation loss after a short run).
pub fn topology_search(
    budget: usize,
    input_width: usize,
    tolerance: usize,
    trials: usize,
    seed: u64,
    mut score: impl FnMut(&MlpSpec) -> Result<f64>,
) -> Result<(MlpSpec, f64)> {
    if trials == 0 {
        bail!(Argument, "topology search needs at least one trial");
    }
    let mut candidates = enumerate_topologies(budget, input_width, tolerance);
    if candidates.is_empty() {
        bail!(Search, "no layout with {input_width} inputs has {budget} +- {tolerance} parameters");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(MlpSpec, f64)> = None;
    for _ in 0..trials.min(candidates.len()) {
        let pick = candidates.swap_remove(rng.gen_range(0..candidates.len()));
        let spec = MlpSpec::new(pick, seed)?;
        let s = score(&spec)?;
        if best.as_ref().is_none_or(|(_, b)| s < *b) {
            best = Some((spec, s));
        }
    }
    Ok(best.expect("at least one trial ran"))
}
