//! Subcommand implementations. Each returns the summary printed on stdout;
//! files are only written where the run settings name them.

use std::collections::BTreeMap;
use std::path::Path;

use qff_core::baseline::{topology_search, InputExpansion, Mlp, MlpModel, MlpSpec};
use qff_core::capacity::{
    effective_dimension_from_spectra, fisher_spectrum, kappa, EffectiveDimensionReport, FisherNormalization,
    GradientModel, ParamDomain,
};
use qff_core::circuit::{assemble_qnn, degree_sets, CouplingSpec, Entanglement};
use qff_core::data::{
    bond_grid, hydronium_dataset, lih_dataset, mirror_augment, train_test_split, water_dataset, Dataset, HYDRONIUM,
    LIH_MORSE, WATER,
};
use qff_core::descriptors::{DescriptorPipeline, FeatureDef, InternalCoord, Nonlinearity};
use qff_core::dynamics::{
    atomic_mass, bond_force, diatomic_config, oscillation_spectrum, qnn_model_spectrum, velocity_verlet, MdConfig,
    Trajectory,
};
use qff_core::model::{LabelScaling, ModelMeta, QffModel, ScaledModel};
use qff_core::presets::{Molecule, OptimizerKind, Preset};
use qff_core::train::{adam_fit, gradient_free_fit, zero_init, AdamConfig, LossSpec, SimplexConfig, TrainReport};
use serde::Serialize;

use crate::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use crate::config::RunArgs;
use crate::dataset::{load_dataset, save_dataset, Converter, ExtendedXyz};
use crate::error::{read_text, usage, write_text, Error, Result};
use crate::output::{gnuplot_script, read_table, sibling, write_table};

/// Target band of the affine energy scaling.
pub const LABEL_BAND: f64 = 0.9;
/// Parameter slack allowed when matching an MLP to a budget.
pub const BUDGET_TOLERANCE: usize = 2;
/// Layouts tried by a topology search.
pub const SEARCH_TRIALS: usize = 8;
/// Adam steps used to score one candidate layout.
pub const SEARCH_STEPS: usize = 200;

/// Everything a model needs that a preset fixes, after flag overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub preset: String,
    pub coords: Vec<InternalCoord>,
    pub features: Vec<FeatureDef>,
    pub entanglement: Entanglement,
    pub degree: usize,
    pub depth: usize,
    pub chi: f64,
    pub optimizer: OptimizerKind,
    pub steps: usize,
    pub train_size: Option<usize>,
    pub mlp_widths: Option<Vec<usize>>,
}

fn parse<T: std::str::FromStr<Err = qff_core::Error>>(text: &str) -> Result<T> {
    Ok(text.parse::<T>()?)
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(';').map(str::trim).filter(|s| !s.is_empty())
}

impl Setup {
    pub fn from_args(args: &RunArgs) -> Result<Self> {
        let name = args.preset.as_deref().unwrap_or("lih");
        let mut s = if name == "custom" {
            let Some(coords) = &args.coords else {
                usage!("the custom preset needs --coords");
            };
            let coords = split_list(coords).map(parse::<InternalCoord>).collect::<Result<Vec<_>>>()?;
            let features = match &args.features {
                Some(f) => split_list(f).map(crate::checkpoint::parse_feature).collect::<qff_core::Result<Vec<_>>>()?,
                None => (0..coords.len()).map(|coord| FeatureDef { coord, map: Nonlinearity::Arcsin }).collect(),
            };
            Setup {
                preset: "custom".to_string(),
                coords,
                features,
                entanglement: Entanglement::Full,
                degree: 3,
                depth: 2,
                chi: 0.0,
                optimizer: OptimizerKind::Adam,
                steps: 1000,
                train_size: None,
                mlp_widths: None,
            }
        } else {
            let p = Preset::get(parse::<Molecule>(name)?);
            Setup {
                preset: p.molecule.name().to_string(),
                coords: p.coords,
                features: p.features,
                entanglement: p.entanglement,
                degree: p.degree,
                depth: p.depth,
                chi: p.chi,
                optimizer: p.optimizer,
                steps: p.steps,
                train_size: Some(p.train_size),
                mlp_widths: Some(p.mlp_widths),
            }
        };
        if let Some(e) = &args.entanglement {
            s.entanglement = parse(e)?;
        }
        if let Some(o) = &args.optimizer {
            s.optimizer = parse(o)?;
        }
        s.degree = args.degree.unwrap_or(s.degree);
        s.depth = args.depth.unwrap_or(s.depth);
        s.chi = args.chi.unwrap_or(s.chi);
        s.steps = args.steps.unwrap_or(s.steps);
        s.train_size = args.train_size.or(s.train_size);
        if let Some(w) = &args.widths {
            let widths = w
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Usage(format!("bad layer width `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            s.mlp_widths = Some(widths);
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.features.len()
    }

    pub fn coupling(&self) -> Result<CouplingSpec> {
        let n = self.num_qubits();
        Ok(CouplingSpec::new(n, self.entanglement, degree_sets(n, self.entanglement, self.degree))?)
    }

    /// Network inputs: the encoding's product terms when the first layer is
    /// that wide, the raw features otherwise.
    pub fn expansion(&self, input_width: usize) -> Result<InputExpansion> {
        let n = self.num_qubits();
        if input_width == n {
            return Ok(InputExpansion::raw(n));
        }
        let enc = InputExpansion::encoding(&self.coupling()?);
        if enc.width() != input_width {
            usage!("network input width {input_width} matches neither {n} features nor {} encoding terms", enc.width());
        }
        Ok(enc)
    }

    /// Seeded train/validation split; the whole file trains when the
    /// training size equals its length or is unset.
    pub fn split(&self, data: &Dataset, seed: u64) -> Result<(Dataset, Option<Dataset>)> {
        match self.train_size {
            None => Ok((data.clone(), None)),
            Some(n) if n == data.len() => Ok((data.clone(), None)),
            Some(n) => {
                let (train, test) = train_test_split(data, n, seed)?;
                Ok((train, Some(test)))
            }
        }
    }

    pub fn fit_pipeline(&self, train: &Dataset) -> Result<DescriptorPipeline> {
        Ok(DescriptorPipeline::fit(self.coords.clone(), self.features.clone(), train.geometries())?)
    }
}

fn family(args: &RunArgs) -> Result<&str> {
    match args.model.as_deref().unwrap_or("qnn") {
        f @ ("qnn" | "mlp") => Ok(f),
        other => usage!("unknown model family `{other}` (expected qnn or mlp)"),
    }
}

fn write_plot(args: &RunArgs, data: &Path, title: &str, xlabel: &str, ylabel: &str, x: usize, y: usize) -> Result<()> {
    if args.plot.unwrap_or(false) {
        write_text(&sibling(data, ".gp"), &gnuplot_script(data, title, xlabel, ylabel, x, y))?;
    }
    Ok(())
}

pub fn cmd_gen(args: &RunArgs) -> Result<String> {
    let Some(out) = &args.out else {
        usage!("--out is required");
    };
    let name = args.preset.as_deref().unwrap_or("lih");
    if name == "custom" {
        usage!("gen needs a preset with an analytic oracle (lih, h2o or h3o)");
    }
    let molecule = parse::<Molecule>(name)?;
    let preset = Preset::get(molecule);
    let count = args.count.unwrap_or(preset.train_size + preset.test_size);
    let seed = args.seed.unwrap_or(0);
    let mirror = args.mirror.unwrap_or(false);
    let data = match molecule {
        Molecule::LiH => {
            let (r_min, r_max) = (args.r_min.unwrap_or(0.9), args.r_max.unwrap_or(4.5));
            if mirror && !count.is_multiple_of(2) {
                usage!("a mirrored set doubles the grid, so --count must be even, got {count}");
            }
            let grid = bond_grid(r_min, r_max, if mirror { count / 2 } else { count })?;
            let base = lih_dataset(&LIH_MORSE, &grid)?;
            if mirror {
                mirror_augment(&base, r_max)?
            } else {
                base
            }
        }
        _ if mirror => usage!("--mirror applies to the diatomic preset only"),
        Molecule::H2O => water_dataset(&WATER, count, seed)?,
        Molecule::H3O => hydronium_dataset(&HYDRONIUM, count, seed)?,
    };
    let mut outputs = vec![out.as_path()];
    if let Some(ck) = &args.checkpoint {
        outputs.push(ck);
    }
    args.check_distinct(&[], &outputs)?;
    save_dataset(&data, out)?;
    if let Some(ck) = &args.checkpoint {
        save_checkpoint(&Checkpoint::Oracle(molecule), ck)?;
    }
    Ok(format!(
        "wrote {} samples of {} ({} atoms, forces: {}) to {}",
        data.len(),
        molecule,
        data.num_atoms(),
        data.has_forces(),
        out.display()
    ))
}

#[derive(Debug, Serialize)]
struct TrainSummary {
    family: String,
    preset: String,
    num_params: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    mlp_widths: Option<Vec<usize>>,
    optimizer: String,
    chi: f64,
    epochs: usize,
    converged: bool,
    budget_exhausted: bool,
    label_scale: f64,
    circuit_evaluations: u64,
    param_gradient_evaluations: u64,
    train_samples: usize,
    validation_samples: usize,
    rmse: BTreeMap<String, f64>,
    settings: BTreeMap<String, String>,
}

fn optimize<M: ScaledModel + Clone>(
    model: &M,
    train: &Dataset,
    validation: Option<&Dataset>,
    setup: &Setup,
    args: &RunArgs,
) -> Result<(M, TrainReport)> {
    let spec = LossSpec::new(setup.chi)?;
    let seed = args.seed.unwrap_or(0);
    Ok(match setup.optimizer {
        OptimizerKind::Adam => {
            let lr = args.lr.unwrap_or(AdamConfig::default().lr);
            let cfg = AdamConfig { max_steps: setup.steps, lr, seed, ..Default::default() };
            adam_fit(model, train, validation, spec, &cfg)?
        }
        OptimizerKind::GradientFree => {
            let cfg = SimplexConfig { max_evals: setup.steps, seed, ..Default::default() };
            gradient_free_fit(model, train, validation, spec, &cfg)?
        }
    })
}

fn mlp_model(
    setup: &Setup,
    args: &RunArgs,
    train: &Dataset,
    pipe: &DescriptorPipeline,
    labels: LabelScaling,
    meta: &ModelMeta,
) -> Result<MlpModel> {
    let seed = args.seed.unwrap_or(0);
    let build = |spec: &MlpSpec| -> Result<MlpModel> {
        let expansion = setup.expansion(spec.input_width())?;
        Ok(MlpModel::new(Mlp::xavier(spec), expansion, pipe.clone(), labels, meta.clone())?)
    };
    let spec = match (args.budget, &setup.mlp_widths) {
        (Some(budget), _) => {
            // Same input layer the preset would use; raw features otherwise.
            let width = setup.mlp_widths.as_ref().map_or(setup.num_qubits(), |w| w[0]);
            let short = AdamConfig { max_steps: SEARCH_STEPS.min(setup.steps), seed, ..Default::default() };
            let loss = LossSpec::new(setup.chi)?;
            let (spec, _) = topology_search(budget, width, BUDGET_TOLERANCE, SEARCH_TRIALS, seed, |spec| {
                let model = build(spec).map_err(|e| qff_core::Error::Argument(e.to_string()))?;
                let (_, report) = adam_fit(&model, train, None, loss, &short)?;
                Ok(report.losses.iter().copied().fold(f64::INFINITY, f64::min))
            })?;
            spec
        }
        (None, Some(widths)) => MlpSpec::new(widths.clone(), seed)?,
        (None, None) => usage!("the mlp family needs --widths or --budget for this preset"),
    };
    build(&spec)
}

pub fn cmd_train(args: &RunArgs) -> Result<String> {
    let data_path = args.require_data()?;
    let ck_path = args.require_checkpoint()?;
    let mut outputs = vec![ck_path];
    let loss_path = args.out.as_ref().map(|o| sibling(o, ".loss.dat"));
    if let (Some(o), Some(l)) = (&args.out, &loss_path) {
        outputs.extend([o.as_path(), l.as_path()]);
    }
    args.check_distinct(&[data_path], &outputs)?;
    let family = family(args)?;
    let setup = Setup::from_args(args)?;
    let data = load_dataset(data_path)?;
    let (train, validation) = setup.split(&data, args.seed.unwrap_or(0))?;
    let pipe = setup.fit_pipeline(&train)?;
    let labels = LabelScaling::fit(&train.energies(), LABEL_BAND)?;
    let meta = ModelMeta {
        preset: setup.preset.clone(),
        provenance: format!("{} on {} of {} samples from {}", family, train.len(), data.len(), data_path.display()),
    };
    let elements = data.elements().to_vec();
    let (checkpoint, report, widths) = if family == "qnn" {
        let coupling = setup.coupling()?;
        let template = assemble_qnn(&coupling, &coupling, setup.depth)?;
        let theta = zero_init(&template);
        let model = QffModel::new(template, pipe, theta, labels, meta)?;
        let (fit, report) = optimize(&model, &train, validation.as_ref(), &setup, args)?;
        (Checkpoint::Qnn { model: fit, elements }, report, None)
    } else {
        let model = mlp_model(&setup, args, &train, &pipe, labels, &meta)?;
        let widths = model.mlp().spec().widths().to_vec();
        let (fit, report) = optimize(&model, &train, validation.as_ref(), &setup, args)?;
        (Checkpoint::Mlp { model: fit, elements }, report, Some(widths))
    };
    save_checkpoint(&checkpoint, ck_path)?;

    let scale = report.label_scale;
    let mut rmse = BTreeMap::new();
    let mut put = |prefix: &str, r: &qff_core::train::Rmse| {
        rmse.insert(format!("{prefix}_energy_scaled"), r.energy);
        rmse.insert(format!("{prefix}_energy_ev"), r.energy * scale);
        if let Some(f) = r.forces {
            rmse.insert(format!("{prefix}_forces_scaled"), f);
            rmse.insert(format!("{prefix}_forces_ev_per_a"), f * scale);
        }
    };
    put("train", &report.train);
    if let Some(v) = &report.validation {
        put("validation", v);
    }
    let summary = TrainSummary {
        family: family.to_string(),
        preset: setup.preset.clone(),
        num_params: checkpoint.num_params(),
        mlp_widths: widths,
        optimizer: report.optimizer.clone(),
        chi: report.chi,
        epochs: report.epochs,
        converged: report.converged,
        budget_exhausted: report.budget_exhausted,
        label_scale: scale,
        circuit_evaluations: report.circuit_evaluations,
        param_gradient_evaluations: report.param_gradient_evaluations,
        train_samples: train.len(),
        validation_samples: validation.as_ref().map_or(0, Dataset::len),
        rmse,
        settings: report.settings.iter().cloned().collect(),
    };
    let text = toml::to_string(&summary).expect("summary serializes");
    if let (Some(out), Some(loss_path)) = (&args.out, &loss_path) {
        write_text(out, &text)?;
        let rows = report.losses.iter().enumerate().map(|(i, l)| vec![i as f64, *l]);
        write_table(loss_path, &["step", "loss"], rows)?;
        write_plot(args, loss_path, "training loss", "step", "loss", 1, 2)?;
    }
    Ok(text)
}

#[derive(Debug, Serialize)]
struct EvalSummary {
    family: String,
    samples: usize,
    rmse_energy_ev: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rmse_forces_ev_per_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rmse_energy_scaled: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rmse_forces_scaled: Option<f64>,
}

pub fn cmd_eval(args: &RunArgs) -> Result<String> {
    let ck_path = args.require_checkpoint()?;
    let data_path = args.require_data()?;
    if let Some(out) = &args.out {
        args.check_distinct(&[ck_path, data_path], &[out])?;
    }
    let ck = load_checkpoint(ck_path)?;
    let data = load_dataset(data_path)?;
    if data.num_atoms() != ck.elements().len() {
        return Err(qff_core::Error::Data(format!(
            "model expects {} atoms, {} has {}",
            ck.elements().len(),
            data_path.display(),
            data.num_atoms()
        ))
        .into());
    }
    let want_forces = args.forces.unwrap_or(false);
    if want_forces && !data.has_forces() {
        return Err(qff_core::Error::Data(format!(
            "force evaluation requested but {} has no force labels",
            data_path.display()
        ))
        .into());
    }
    let with_forces = data.has_forces();
    let pot = ck.potential();
    let (mut se, mut sf) = (0.0, 0.0);
    let mut rows = Vec::new();
    for (i, s) in data.samples().iter().enumerate() {
        let (e, f) = pot.energy_and_forces(&s.cartesian).map_err(|e| e.context(format!("sample {i}")))?;
        se += (e - s.energy).powi(2);
        rows.push(vec![0.0, i as f64, 0.0, s.energy, e]);
        if let (true, Some(labels)) = (with_forces, &s.forces) {
            for (k, (p, t)) in f.iter().zip(labels).enumerate() {
                sf += (p - t).powi(2);
                rows.push(vec![1.0, i as f64, k as f64, *t, *p]);
            }
        }
    }
    let n = data.len() as f64;
    let rmse_e = (se / n).sqrt();
    let rmse_f = with_forces.then(|| (sf / (n * 3.0 * data.num_atoms() as f64)).sqrt());
    let scale = ck.labels().map(|l| l.scale);
    let summary = EvalSummary {
        family: ck.family().to_string(),
        samples: data.len(),
        rmse_energy_ev: rmse_e,
        rmse_forces_ev_per_a: rmse_f,
        rmse_energy_scaled: scale.map(|s| rmse_e / s),
        rmse_forces_scaled: scale.and_then(|s| rmse_f.map(|f| f / s)),
    };
    if let Some(out) = &args.out {
        // kind 0 = energy (eV), 1 = force component (eV/A).
        write_table(out, &["kind", "sample", "component", "label", "prediction"], rows)?;
        write_plot(args, out, "prediction vs label", "label", "prediction", 4, 5)?;
    }
    Ok(toml::to_string(&summary).expect("summary serializes"))
}

/// Fisher spectra of `draws` parameter vectors, split over `threads` workers.
/// Draw `i` always uses stream `i`, so the result does not depend on `threads`.
pub fn parallel_spectra<G: GradientModel + Sync + ?Sized>(
    model: &G,
    inputs: &[Vec<f64>],
    domain: ParamDomain,
    draws: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<Vec<f64>>> {
    let d = model.num_params();
    let threads = threads.clamp(1, draws.max(1));
    let chunk = draws.div_ceil(threads);
    let parts: Vec<qff_core::Result<Vec<Vec<f64>>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let range = (t * chunk).min(draws)..((t + 1) * chunk).min(draws);
                s.spawn(move || {
                    range.map(|i| fisher_spectrum(model, inputs, &domain.draw(d, seed, i as u64))).collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("spectrum worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(draws);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct EffdimSummary {
    family: String,
    preset: String,
    inputs: usize,
    n: usize,
    num_params: usize,
    d_n: f64,
    normalized: f64,
    draws: usize,
    domain: String,
    normalization: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_error: Option<f64>,
}

pub fn cmd_effdim(args: &RunArgs) -> Result<String> {
    let data_path = args.require_data()?;
    if let Some(out) = &args.out {
        args.check_distinct(&[data_path], &[out])?;
    }
    let family = family(args)?;
    let setup = Setup::from_args(args)?;
    let seed = args.seed.unwrap_or(0);
    let n = args.n.unwrap_or(50);
    kappa(n)?;
    let draws = args.draws.unwrap_or(100);
    if draws == 0 {
        usage!("--draws must be positive");
    }
    let normalization: FisherNormalization = parse(args.normalization.as_deref().unwrap_or("as-printed"))?;
    let domain = match args.domain.as_deref().unwrap_or(if family == "qnn" { "angles" } else { "unit" }) {
        "angles" => ParamDomain::ANGLES,
        "unit" => ParamDomain::UNIT,
        other => usage!("unknown parameter domain `{other}` (expected angles or unit)"),
    };
    let threads = args.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let data = load_dataset(data_path)?;
    let (train, _) = setup.split(&data, seed)?;
    let pipe = setup.fit_pipeline(&train)?;
    let ys = train.geometries().map(|g| pipe.apply(g)).collect::<qff_core::Result<Vec<_>>>()?;
    let report: EffectiveDimensionReport = if family == "qnn" {
        let coupling = setup.coupling()?;
        let template = assemble_qnn(&coupling, &coupling, setup.depth)?;
        let spectra = parallel_spectra(&template, &ys, domain, draws, seed, threads)?;
        effective_dimension_from_spectra(&spectra, template.num_params(), n, domain, normalization)?
    } else {
        let widths = match (&setup.mlp_widths, args.budget) {
            (Some(w), None) => w.clone(),
            _ => usage!("effdim for the mlp family needs explicit --widths or a preset layout"),
        };
        let spec = MlpSpec::new(widths, seed)?;
        let expansion = setup.expansion(spec.input_width())?;
        let us: Vec<Vec<f64>> = ys.iter().map(|y| expansion.expand(y).0).collect();
        let spectra = parallel_spectra(&spec, &us, domain, draws, seed, threads)?;
        effective_dimension_from_spectra(&spectra, spec.num_params(), n, domain, normalization)?
    };
    let summary = EffdimSummary {
        family: family.to_string(),
        preset: setup.preset,
        inputs: ys.len(),
        n: report.n,
        num_params: report.num_params,
        d_n: report.d_n,
        normalized: report.normalized,
        draws: report.draws,
        domain: report.domain,
        normalization: report.normalization.name().to_string(),
        std_error: report.std_error,
    };
    let text = toml::to_string(&summary).expect("summary serializes");
    if let Some(out) = &args.out {
        write_text(out, &text)?;
    }
    Ok(text)
}

fn masses(elements: &[String]) -> Result<Vec<f64>> {
    elements
        .iter()
        .map(|e| atomic_mass(e).ok_or_else(|| Error::Usage(format!("no mass known for element `{e}`"))))
        .collect()
}

pub fn cmd_md(args: &RunArgs) -> Result<String> {
    let Some(out) = &args.out else {
        usage!("--out is required");
    };
    let mut inputs: Vec<&Path> = Vec::new();
    let ck = match &args.checkpoint {
        Some(p) => {
            inputs.push(p);
            load_checkpoint(p)?
        }
        None => Checkpoint::Oracle(parse(args.preset.as_deref().unwrap_or("lih"))?),
    };
    if let Some(d) = &args.data {
        inputs.push(d);
    }
    args.check_distinct(&inputs, &[out])?;
    let elements = ck.elements();
    let m = masses(&elements)?;
    let dt = args.dt.unwrap_or(0.1);
    let steps = args.steps.unwrap_or(10_000);
    let pot = ck.potential();
    let (traj, bond) = if elements.len() == 2 {
        let r0 = args.r0.unwrap_or(LIH_MORSE.r_e);
        let cfg = diatomic_config(m[0], m[1], r0, args.v0.unwrap_or(0.0), dt, steps);
        (velocity_verlet(bond_force(pot), &cfg)?, true)
    } else {
        let Some(data_path) = &args.data else {
            usage!("polyatomic MD starts from the first sample of --data");
        };
        let data = load_dataset(data_path)?;
        if data.num_atoms() != elements.len() {
            return Err(qff_core::Error::Data(format!(
                "model expects {} atoms, {} has {}",
                elements.len(),
                data_path.display(),
                data.num_atoms()
            ))
            .into());
        }
        let positions = data.samples()[0].cartesian.clone();
        let velocities = vec![0.0; positions.len()];
        let cfg = MdConfig { dt_fs: dt, steps, masses: m, positions, velocities };
        (velocity_verlet(|x: &[f64]| pot.energy_and_forces(x), &cfg)?, false)
    };
    write_trajectory(out, &traj, bond)?;
    write_plot(args, out, "trajectory", "time (fs)", if bond { "r (A)" } else { "x1 (A)" }, 1, 2)?;
    let mut summary = format!(
        "wrote {} frames to {}\nmax_relative_energy_drift = {:e}\n",
        traj.len(),
        out.display(),
        traj.max_relative_drift()
    );
    if bond {
        match oscillation_spectrum(&traj.coordinate(0), dt, 1).and_then(|s| s.dominant_frequency()) {
            Ok(f) => summary.push_str(&format!("dominant_frequency_per_fs = {f}\n")),
            Err(e) => summary.push_str(&format!("# no dominant frequency: {e}\n")),
        }
    }
    Ok(summary)
}

fn write_trajectory(path: &Path, traj: &Trajectory, bond: bool) -> Result<()> {
    let dof = traj.positions.first().map_or(0, Vec::len);
    let mut columns: Vec<String> = vec!["time_fs".into()];
    if bond {
        columns.extend(["r".into(), "v".into()]);
    } else {
        columns.extend((0..dof).map(|k| format!("x{k}")));
    }
    columns.extend(["potential".into(), "kinetic".into(), "total".into()]);
    let names: Vec<&str> = columns.iter().map(String::as_str).collect();
    let rows = (0..traj.len()).map(|i| {
        let mut row = vec![traj.times[i]];
        row.extend_from_slice(&traj.positions[i]);
        if bond {
            row.extend_from_slice(&traj.velocities[i]);
        }
        row.extend([traj.potential[i], traj.kinetic[i], traj.potential[i] + traj.kinetic[i]]);
        row
    });
    write_table(path, &names, rows)
}

pub fn cmd_spectrum(args: &RunArgs) -> Result<String> {
    let Some(out) = &args.out else {
        usage!("--out is required");
    };
    if let Some(ck_path) = &args.checkpoint {
        args.check_distinct(&[ck_path], &[out])?;
        let Checkpoint::Qnn { model, .. } = load_checkpoint(ck_path)? else {
            usage!("model spectra need a qnn checkpoint");
        };
        let t = model.template();
        let feature = args.feature.unwrap_or(0);
        let grid = args.grid.unwrap_or(64);
        let base = vec![0.0; t.num_features()];
        let c = qnn_model_spectrum(t, model.params(), &base, feature, grid)?;
        write_table(out, &["frequency", "amplitude"], c.iter().enumerate().map(|(k, a)| vec![k as f64, *a]))?;
        write_plot(args, out, "model spectrum", "integer frequency", "|c_n|", 1, 2)?;
        let support: Vec<String> = c.iter().enumerate().filter(|(_, a)| **a > 1e-10).map(|(k, _)| k.to_string()).collect();
        return Ok(format!("support = [{}]\n", support.join(", ")));
    }
    let data_path = args.require_data()?;
    args.check_distinct(&[data_path], &[out])?;
    let rows = read_table(data_path)?;
    let column = args.column.unwrap_or(1);
    if rows.len() < 2 || rows[0].len() <= column {
        return Err(qff_core::Error::Data(format!(
            "{} needs at least two rows and a column {column}",
            data_path.display()
        ))
        .into());
    }
    let dt = rows[1][0] - rows[0][0];
    let series: Vec<f64> = rows.iter().map(|r| r[column]).collect();
    let spectrum = oscillation_spectrum(&series, dt, args.repetitions.unwrap_or(1))?;
    let table = spectrum.frequencies.iter().zip(&spectrum.magnitudes).map(|(f, m)| vec![*f, *m]);
    write_table(out, &["frequency_per_fs", "magnitude"], table)?;
    write_plot(args, out, "oscillation spectrum", "frequency (1/fs)", "magnitude", 1, 2)?;
    Ok(format!("dominant_frequency_per_fs = {}\n", spectrum.dominant_frequency()?))
}

pub fn cmd_convert(args: &RunArgs) -> Result<String> {
    let data_path = args.require_data()?;
    let Some(out) = &args.out else {
        usage!("--out is required");
    };
    args.check_distinct(&[data_path], &[out])?;
    let data = ExtendedXyz.convert(&read_text(data_path)?, &data_path.display().to_string())?;
    save_dataset(&data, out)?;
    Ok(format!("wrote {} samples to {}", data.len(), out.display()))
}
