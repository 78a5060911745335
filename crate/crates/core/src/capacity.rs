//! Fisher information and effective dimension.
//!
//! With the unit-variance Gaussian likelihood around the model output, the
//! Fisher matrix is `F = (1/K) sum_k g_k g_k^T` with `g_k = grad_theta f(x_k)`.
//! The effective dimension
//!
//! `d_n = 2 log( E_theta[ sqrt det(I + kappa F(theta)) ] ) / log kappa`,
//! `kappa = n / (2 pi ln n)`,
//!
//! is estimated by Monte Carlo over `theta` drawn uniformly from a box. Each
//! draw is reduced to the spectrum of `F`, so `log det(I + c F) = sum ln(1 + c lambda)`
//! and both normalization modes come from the same draws.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent f64 methods shadow these whenever std is linked
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adjoint::AdjointEvaluator;
use crate::baseline::{Mlp, MlpSpec};
use crate::circuit::QnnTemplate;
use crate::error::{bail, Result};
use crate::linalg::Matrix;

/// Eigenvalues above `-PSD_TOLERANCE * (1 + max |lambda|)` count as round-off.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// A model whose raw output can be differentiated w.r.t. its parameters at any parameter vector.
pub trait GradientModel {
    fn num_params(&self) -> usize;

    fn input_width(&self) -> usize;

    fn param_gradient(&self, input: &[f64], params: &[f64]) -> Result<Vec<f64>>;
}

impl GradientModel for QnnTemplate {
    fn num_params(&self) -> usize {
        QnnTemplate::num_params(self)
    }

    fn input_width(&self) -> usize {
        self.num_features()
    }

    fn param_gradient(&self, input: &[f64], params: &[f64]) -> Result<Vec<f64>> {
        Ok(AdjointEvaluator::new(self).grad_params(input, params)?.1)
    }
}

impl GradientModel for MlpSpec {
    fn num_params(&self) -> usize {
        MlpSpec::num_params(self)
    }

    fn input_width(&self) -> usize {
        MlpSpec::input_width(self)
    }

    fn param_gradient(&self, input: &[f64], params: &[f64]) -> Result<Vec<f64>> {
        Ok(Mlp::from_params(self.clone(), params.to_vec())?.backward(input)?.d_params)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherEstimate {
    pub matrix: Matrix,
    pub samples: usize,
    pub theta: Vec<f64>,
}

fn gradients<G: GradientModel + ?Sized>(model: &G, inputs: &[Vec<f64>], theta: &[f64]) -> Result<Vec<Vec<f64>>> {
    if inputs.is_empty() {
        bail!(Argument, "Fisher estimate needs at least one input");
    }
    if theta.len() != model.num_params() {
        bail!(Argument, "model has {} parameters, got {}", model.num_params(), theta.len());
    }
    inputs.iter().map(|x| model.param_gradient(x, theta)).collect()
}

/// `(1/K) sum_k g_k g_k^T`.
pub fn fisher_matrix<G: GradientModel + ?Sized>(model: &G, inputs: &[Vec<f64>], theta: &[f64]) -> Result<FisherEstimate> {
    let grads = gradients(model, inputs, theta)?;
    let mut matrix = Matrix::zeros(theta.len(), theta.len());
    let w = 1.0 / grads.len() as f64;
    for g in &grads {
        matrix.add_outer(g, w);
    }
    Ok(FisherEstimate { matrix, samples: grads.len(), theta: theta.to_vec() })
}

/// Eigenvalues of `F(theta)`, ascending, with round-off negatives set to zero.
///
/// Uses the `K x K` Gram matrix when `K < d`; the nonzero spectra coincide.
pub fn fisher_spectrum<G: GradientModel + ?Sized>(model: &G, inputs: &[Vec<f64>], theta: &[f64]) -> Result<Vec<f64>> {
    let grads = gradients(model, inputs, theta)?;
    let (k, d) = (grads.len(), theta.len());
    let w = 1.0 / k as f64;
    let m = if k < d {
        let mut gram = Matrix::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let v = w * grads[i].iter().zip(&grads[j]).map(|(a, b)| a * b).sum::<f64>();
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        gram
    } else {
        let mut f = Matrix::zeros(d, d);
        for g in &grads {
            f.add_outer(g, w);
        }
        f
    };
    let mut eig = m.symmetric_eigenvalues()?;
    let top = eig.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    for (i, l) in eig.iter_mut().enumerate() {
        if !l.is_finite() {
            bail!(Numerical, "non-finite Fisher eigenvalue at index {i} for theta {theta:?}");
        }
        if *l < -PSD_TOLERANCE * (1.0 + top) {
            bail!(Numerical, "Fisher matrix not positive semidefinite (eigenvalue {l}) for theta {theta:?}");
        }
        *l = l.max(0.0);
    }
    Ok(eig)
}

/// Uniform box `[-half_width, half_width]^d` for the parameter draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDomain {
    pub half_width: f64,
}

impl ParamDomain {
    /// Rotation angles: `[-pi, pi]^d`.
    pub const ANGLES: Self = Self { half_width: PI };
    /// Network weights: `[-1, 1]^d`.
    pub const UNIT: Self = Self { half_width: 1.0 };

    pub fn describe(&self, d: usize) -> String {
        format!("[-{0}, {0}]^{d}", self.half_width)
    }

    /// Draw `index` from an independent stream of `seed`; order-independent.
    pub fn draw(&self, d: usize, seed: u64, index: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        (0..d).map(|_| rng.gen_range(-self.half_width..=self.half_width)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FisherNormalization {
    /// `F` used as computed.
    #[default]
    AsPrinted,
    /// `F -> d F / E_theta[tr F]`.
    TraceNormalized,
}

impl FisherNormalization {
    pub fn name(&self) -> &'static str {
        match self {
            FisherNormalization::AsPrinted => "as-printed",
            FisherNormalization::TraceNormalized => "trace-normalized",
        }
    }
}

impl core::str::FromStr for FisherNormalization {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "as-printed" | "none" => FisherNormalization::AsPrinted,
            "trace-normalized" | "trace" => FisherNormalization::TraceNormalized,
            other => bail!(Argument, "unknown Fisher normalization `{other}`"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveDimensionReport {
    pub n: usize,
    pub num_params: usize,
    pub d_n: f64,
    /// `d_n / d`.
    pub normalized: f64,
    pub draws: usize,
    pub domain: String,
    pub normalization: FisherNormalization,
    /// Jackknife over draws; `None` for a single draw.
    pub std_error: Option<f64>,
}

/// `n / (2 pi ln n)`; must exceed 1 for `d_n` to be defined.
pub fn kappa(n: usize) -> Result<f64> {
    if n < 2 {
        bail!(Argument, "effective dimension needs n >= 2, got {n}");
    }
    let nf = n as f64;
    let k = nf / (2.0 * PI * nf.ln());
    if !(k > 1.0) {
        bail!(Argument, "n = {n} gives n/(2 pi ln n) = {k} <= 1; effective dimension undefined");
    }
    Ok(k)
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Combines per-draw Fisher spectra into `d_n`.
pub fn effective_dimension_from_spectra(
    spectra: &[Vec<f64>],
    num_params: usize,
    n: usize,
    domain: ParamDomain,
    normalization: FisherNormalization,
) -> Result<EffectiveDimensionReport> {
    if spectra.is_empty() {
        bail!(Argument, "effective dimension needs at least one parameter draw");
    }
    let kap = kappa(n)?;
    let scale = match normalization {
        FisherNormalization::AsPrinted => 1.0,
        FisherNormalization::TraceNormalized => {
            let mean_trace = spectra.iter().map(|s| s.iter().sum::<f64>()).sum::<f64>() / spectra.len() as f64;
            if !(mean_trace > 0.0) {
                bail!(Numerical, "Fisher trace vanishes on every draw; cannot trace-normalize");
            }
            num_params as f64 / mean_trace
        }
    };
    let half_logdets: Vec<f64> =
        spectra.iter().map(|s| 0.5 * s.iter().map(|l| (kap * scale * l).ln_1p()).sum::<f64>()).collect();
    if let Some(i) = half_logdets.iter().position(|v| !v.is_finite()) {
        bail!(Numerical, "non-finite log-determinant at draw {i}");
    }
    let estimate = |terms: &[f64], skip: Option<usize>| {
        let it = terms.iter().enumerate().filter(move |&(i, _)| Some(i) != skip).map(|(_, &v)| v);
        let count = terms.len() - skip.is_some() as usize;
        2.0 * (log_sum_exp(it) - (count as f64).ln()) / kap.ln()
    };
    let d_n = estimate(&half_logdets, None);
    let m = half_logdets.len();
    let std_error = (m > 1).then(|| {
        let loo: Vec<f64> = (0..m).map(|i| estimate(&half_logdets, Some(i))).collect();
        let mean = loo.iter().sum::<f64>() / m as f64;
        ((m - 1) as f64 / m as f64 * loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>()).sqrt()
    });
    Ok(EffectiveDimensionReport {
        n,
        num_params,
        d_n,
        normalized: d_n / num_params as f64,
        draws: m,
        domain: domain.describe(num_params),
        normalization,
        std_error,
    })
}

/// Monte Carlo effective dimension over `draws` uniform parameter vectors.
pub fn effective_dimension<G: GradientModel + ?Sized>(
    model: &G,
    inputs: &[Vec<f64>],
    n: usize,
    domain: ParamDomain,
    draws: usize,
    normalization: FisherNormalization,
    seed: u64,
) -> Result<EffectiveDimensionReport> {
    kappa(n)?;
    let d = model.num_params();
    let spectra = (0..draws as u64)
        .map(|i| fisher_spectrum(model, inputs, &domain.draw(d, seed, i)))
        .collect::<Result<Vec<_>>>()?;
    effective_dimension_from_spectra(&spectra, d, n, domain, normalization)
}
