//! Losses and optimizers.
//!
//! The loss lives in scaled units: `MSE(E) + chi * MSE(F)` with energies
//! mapped through the model's label scaling and forces divided by its scale.
//! Training is full batch.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these whenever std is linked
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::QnnTemplate;
use crate::data::Dataset;
use crate::error::{bail, Result};
use crate::model::{EvalRequest, ScaledModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    pub chi: f64,
}

impl LossSpec {
    pub fn new(chi: f64) -> Result<Self> {
        if !(chi >= 0.0) || !chi.is_finite() {
            bail!(Argument, "force weight chi must be finite and non-negative, got {chi}");
        }
        Ok(Self { chi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossValue {
    pub total: f64,
    pub energy: f64,
    pub forces: f64,
}

/// Evaluation counters accumulated over a loss or RMSE pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    pub circuit_runs: u64,
    /// Evaluations that differentiated with respect to parameters.
    pub param_gradients: u64,
}

fn loss_impl<M: ScaledModel + ?Sized>(
    model: &M,
    data: &Dataset,
    spec: LossSpec,
    want_grad: bool,
    counters: &mut Counters,
) -> Result<(LossValue, Option<Vec<f64>>)> {
    let use_forces = spec.chi > 0.0;
    if use_forces && !data.has_forces() {
        bail!(Data, "chi = {} needs force labels but the dataset has none", spec.chi);
    }
    let labels = model.labels();
    let d = model.num_params();
    let n_samples = data.len() as f64;
    let n_comp = (3 * data.num_atoms()) as f64 * n_samples;
    let request = EvalRequest { param_grad: want_grad, forces: use_forces, force_param_grad: want_grad && use_forces };
    let mut value = LossValue::default();
    let mut grad = want_grad.then(|| vec![0.0; d]);
    for s in data.samples() {
        let ev = model.evaluate(&s.cartesian, request, &mut counters.circuit_runs)?;
        if want_grad {
            counters.param_gradients += 1;
        }
        let de = ev.energy - labels.to_scaled(s.energy);
        value.energy += de * de / n_samples;
        if let Some(g) = grad.as_mut() {
            for (gi, dp) in g.iter_mut().zip(ev.d_params.as_ref().expect("requested")) {
                *gi += 2.0 * de * dp / n_samples;
            }
        }
        if use_forces {
            let pred = ev.forces.as_ref().expect("requested");
            let target = s.forces.as_ref().expect("checked");
            for (c, (p, t)) in pred.iter().zip(target).enumerate() {
                let df = p - t / labels.scale;
                value.forces += df * df / n_comp;
                if let Some(g) = grad.as_mut() {
                    let fp = ev.force_params.as_ref().expect("requested");
                    for (gi, dp) in g.iter_mut().zip(fp.row(c)) {
                        *gi += spec.chi * 2.0 * df * dp / n_comp;
                    }
                }
            }
        }
    }
    value.total = value.energy + spec.chi * value.forces;
    if !value.total.is_finite() {
        bail!(Numerical, "non-finite loss (energy term {}, force term {})", value.energy, value.forces);
    }
    Ok((value, grad))
}

pub fn loss_chi<M: ScaledModel + ?Sized>(model: &M, data: &Dataset, spec: LossSpec) -> Result<LossValue> {
    Ok(loss_impl(model, data, spec, false, &mut Counters::default())?.0)
}

/// Loss and its parameter gradient.
pub fn loss_and_gradient<M: ScaledModel + ?Sized>(
    model: &M,
    data: &Dataset,
    spec: LossSpec,
    counters: &mut Counters,
) -> Result<(LossValue, Vec<f64>)> {
    let (v, g) = loss_impl(model, data, spec, true, counters)?;
    Ok((v, g.expect("requested")))
}

/// Root-mean-square errors in scaled units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rmse {
    pub energy: f64,
    /// Over all `3n` components; `None` when the data has no forces.
    pub forces: Option<f64>,
}

pub fn rmse<M: ScaledModel + ?Sized>(model: &M, data: &Dataset, counters: &mut Counters) -> Result<Rmse> {
    let labels = model.labels();
    let with_forces = data.has_forces();
    let request = EvalRequest { forces: with_forces, ..Default::default() };
    let (mut se, mut sf) = (0.0, 0.0);
    for s in data.samples() {
        let ev = model.evaluate(&s.cartesian, request, &mut counters.circuit_runs)?;
        let de = ev.energy - labels.to_scaled(s.energy);
        se += de * de;
        if let (Some(p), Some(t)) = (&ev.forces, &s.forces) {
            sf += p.iter().zip(t).map(|(p, t)| (p - t / labels.scale).powi(2)).sum::<f64>();
        }
    }
    let n = data.len() as f64;
    let forces = with_forces.then(|| (sf / (n * 3.0 * data.num_atoms() as f64)).sqrt());
    Ok(Rmse { energy: (se / n).sqrt(), forces })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub max_steps: usize,
    /// Relative loss improvement below which a patience window counts as stalled.
    pub tolerance: f64,
    pub patience: usize,
    pub seed: u64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 0.01, beta1: 0.9, beta2: 0.999, eps: 1e-8, max_steps: 4000, tolerance: 1e-6, patience: 50, seed: 0 }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            bail!(Argument, "Adam betas must lie in (0, 1), got {} and {}", self.beta1, self.beta2);
        }
        if !(self.lr >= 0.0) || !(self.eps > 0.0) || !(self.tolerance >= 0.0) || self.patience == 0 {
            bail!(Argument, "invalid Adam settings {self:?}");
        }
        Ok(())
    }

    fn settings(&self) -> Vec<(String, String)> {
        [
            ("lr", alloc::format!("{}", self.lr)),
            ("beta1", alloc::format!("{}", self.beta1)),
            ("beta2", alloc::format!("{}", self.beta2)),
            ("eps", alloc::format!("{}", self.eps)),
            ("max_steps", alloc::format!("{}", self.max_steps)),
            ("tolerance", alloc::format!("{}", self.tolerance)),
            ("patience", alloc::format!("{}", self.patience)),
            ("seed", alloc::format!("{}", self.seed)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Adam moment state.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(config: AdamConfig, dim: usize) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, m: vec![0.0; dim], v: vec![0.0; dim], t: 0 })
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        let c = &self.config;
        self.t += 1;
        let b1t = 1.0 - c.beta1.powi(self.t);
        let b2t = 1.0 - c.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = c.beta1 * self.m[i] + (1.0 - c.beta1) * grad[i];
            self.v[i] = c.beta2 * self.v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
            let mh = self.m[i] / b1t;
            let vh = self.v[i] / b2t;
            params[i] -= c.lr * mh / (vh.sqrt() + c.eps);
        }
    }
}

/// Outcome of an optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimized {
    pub x: Vec<f64>,
    /// Objective per epoch (Adam: before each step; simplex: best so far).
    pub losses: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
    pub budget_exhausted: bool,
    pub evaluations: usize,
}

fn stalled(losses: &[f64], patience: usize, tolerance: f64) -> bool {
    let t = losses.len();
    if t == 0 {
        return false;
    }
    if losses[t - 1] == 0.0 {
        return true;
    }
    if t <= patience {
        return false;
    }
    // Best-so-far, so Adam's non-monotone steps do not end a run early.
    let best = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);
    let (old, new) = (best(&losses[..t - patience]), best(losses));
    old - new <= tolerance * old.abs()
}

/// Adam on an objective returning `(value, gradient)`.
pub fn adam_minimize(
    mut objective: impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    x0: Vec<f64>,
    config: &AdamConfig,
) -> Result<Minimized> {
    let mut adam = Adam::new(*config, x0.len())?;
    let mut x = x0;
    let mut losses = Vec::new();
    let mut converged = false;
    let mut evaluations = 0;
    while losses.len() < config.max_steps {
        let (value, grad) = objective(&x)?;
        evaluations += 1;
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            bail!(Numerical, "non-finite loss or gradient at epoch {}", losses.len());
        }
        losses.push(value);
        if stalled(&losses, config.patience, config.tolerance) {
            converged = true;
            break;
        }
        adam.step(&mut x, &grad);
    }
    let epochs = losses.len();
    Ok(Minimized { x, losses, epochs, converged, budget_exhausted: !converged, evaluations })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexConfig {
    pub max_evals: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Stop when the spread of simplex values falls below this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self { max_evals: 4000, initial_step: 0.1, tolerance: 1e-10, seed: 0 }
    }
}

/// Nelder-Mead simplex search. The seed only picks the signs of the initial
/// simplex edges, so runs are reproducible.
pub fn nelder_mead(
    mut objective: impl FnMut(&[f64]) -> Result<f64>,
    x0: Vec<f64>,
    config: &SimplexConfig,
) -> Result<Minimized> {
    let n = x0.len();
    if n == 0 || config.max_evals == 0 || !(config.initial_step > 0.0) {
        bail!(Argument, "simplex search needs parameters, a positive budget and a positive step");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut evals = 0usize;
    let mut losses = Vec::new();
    let mut best = f64::INFINITY;
    let mut eval = |x: &[f64], evals: &mut usize, best: &mut f64, losses: &mut Vec<f64>| -> Result<f64> {
        let v = objective(x)?;
        *evals += 1;
        let v = if v.is_nan() { f64::INFINITY } else { v };
        *best = best.min(v);
        losses.push(*best);
        Ok(v)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(&x0, &mut evals, &mut best, &mut losses)?;
    simplex.push((x0.clone(), f0));
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += if rng.gen::<bool>() { config.initial_step } else { -config.initial_step };
        let f = eval(&x, &mut evals, &mut best, &mut losses)?;
        simplex.push((x, f));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    while evals < config.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 <= config.tolerance {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (w - c)).collect()
        };
        let xr = along(-alpha);
        let fr = eval(&xr, &mut evals, &mut best, &mut losses)?;
        if fr < simplex[0].1 {
            let xe = along(-gamma);
            let fe = eval(&xe, &mut evals, &mut best, &mut losses)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(-rho);
                let fc = eval(&xc, &mut evals, &mut best, &mut losses)?;
                (xc, fc)
            } else {
                let xc = along(rho);
                let fc = eval(&xc, &mut evals, &mut best, &mut losses)?;
                (xc, fc)
            };
            if fc < fr.min(simplex[n].1) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for k in 1..=n {
                    if evals >= config.max_evals {
                        break;
                    }
                    let xs: Vec<f64> = x_best.iter().zip(&simplex[k].0).map(|(b, x)| b + sigma * (x - b)).collect();
                    let fs = eval(&xs, &mut evals, &mut best, &mut losses)?;
                    simplex[k] = (xs, fs);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, _) = simplex.swap_remove(0);
    let epochs = losses.len();
    Ok(Minimized { x, losses, epochs, converged, budget_exhausted: !converged, evaluations: evals })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub optimizer: String,
    /// Hyperparameters as `(key, value)` pairs.
    pub settings: Vec<(String, String)>,
    pub chi: f64,
    pub losses: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
    pub budget_exhausted: bool,
    pub train: Rmse,
    pub validation: Option<Rmse>,
    /// Multiply scaled RMSEs by this for eV and eV/A.
    pub label_scale: f64,
    /// Filled in by callers that have a clock.
    pub wall_time_s: f64,
    pub circuit_evaluations: u64,
    pub param_gradient_evaluations: u64,
}

#[allow(clippy::too_many_arguments)]
fn finish<M: ScaledModel + Clone>(
    model: &M,
    outcome: Minimized,
    optimizer: &str,
    settings: Vec<(String, String)>,
    spec: LossSpec,
    train: &Dataset,
    validation: Option<&Dataset>,
    mut counters: Counters,
) -> Result<(M, TrainReport)> {
    let mut fitted = model.clone();
    fitted.set_params(&outcome.x)?;
    let train_rmse = rmse(&fitted, train, &mut counters)?;
    let validation = validation.map(|v| rmse(&fitted, v, &mut counters)).transpose()?;
    let report = TrainReport {
        optimizer: optimizer.to_string(),
        settings,
        chi: spec.chi,
        losses: outcome.losses,
        epochs: outcome.epochs,
        converged: outcome.converged,
        budget_exhausted: outcome.budget_exhausted,
        train: train_rmse,
        validation,
        label_scale: fitted.labels().scale,
        wall_time_s: 0.0,
        circuit_evaluations: counters.circuit_runs,
        param_gradient_evaluations: counters.param_gradients,
    };
    Ok((fitted, report))
}

/// Full-batch Adam from the model's current parameters.
pub fn adam_fit<M: ScaledModel + Clone>(
    model: &M,
    train: &Dataset,
    validation: Option<&Dataset>,
    spec: LossSpec,
    config: &AdamConfig,
) -> Result<(M, TrainReport)> {
    let mut counters = Counters::default();
    let mut work = model.clone();
    let outcome = adam_minimize(
        |x| {
            work.set_params(x)?;
            let (v, g) = loss_and_gradient(&work, train, spec, &mut counters)?;
            Ok((v.total, g))
        },
        model.params().to_vec(),
        config,
    )?;
    finish(model, outcome, "adam", config.settings(), spec, train, validation, counters)
}

/// Derivative-free fit by simplex search; never differentiates with respect
/// to parameters.
pub fn gradient_free_fit<M: ScaledModel + Clone>(
    model: &M,
    train: &Dataset,
    validation: Option<&Dataset>,
    spec: LossSpec,
    config: &SimplexConfig,
) -> Result<(M, TrainReport)> {
    let mut counters = Counters::default();
    let mut work = model.clone();
    let outcome = nelder_mead(
        |x| {
            work.set_params(x)?;
            Ok(loss_impl(&work, train, spec, false, &mut counters)?.0.total)
        },
        model.params().to_vec(),
        config,
    )?;
    let settings = [
        ("max_evals", alloc::format!("{}", config.max_evals)),
        ("initial_step", alloc::format!("{}", config.initial_step)),
        ("tolerance", alloc::format!("{}", config.tolerance)),
        ("seed", alloc::format!("{}", config.seed)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    finish(model, outcome, "nelder-mead", settings, spec, train, validation, counters)
}

/// All-zero parameters: every trainable block is the identity.
pub fn zero_init(template: &QnnTemplate) -> Vec<f64> {
    vec![0.0; template.num_params()]
}
