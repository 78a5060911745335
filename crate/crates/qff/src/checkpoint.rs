//! Versioned model checkpoints in TOML.
//!
//! Every checkpoint starts with `format`, `version` and `family`. QNN
//! checkpoints store the coupling layout, depth and the full gate list; the
//! gate list is checked against the circuit rebuilt from the layout on load.
//! Floats are written in shortest round-trip form, so reloaded models predict
//! bit for bit what the saved ones did.

use std::path::Path;

use qff_core::baseline::{InputExpansion, Mlp, MlpModel, MlpSpec};
use qff_core::circuit::{assemble_qnn, AngleSource, CouplingSpec, QnnTemplate, SymbolicGate};
use qff_core::data::{HYDRONIUM, LIH_MORSE, WATER};
use qff_core::descriptors::{DescriptorPipeline, FeatureDef, MinMaxScaler};
use qff_core::model::{LabelScaling, ModelMeta, Potential, QffModel, ScaledModel};
use qff_core::presets::Molecule;
use qff_core::statevec::mask_indices;
use serde::{Deserialize, Serialize};

use crate::error::{read_text, write_text, Error, Result};

pub const FORMAT_TAG: &str = "qff-checkpoint";
pub const VERSION: u32 = 1;

/// A model restored from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Qnn { model: QffModel, elements: Vec<String> },
    Mlp { model: MlpModel, elements: Vec<String> },
    /// The analytic surface a preset's data were labelled with.
    Oracle(Molecule),
}

impl Checkpoint {
    pub fn family(&self) -> &'static str {
        match self {
            Checkpoint::Qnn { .. } => "qnn",
            Checkpoint::Mlp { .. } => "mlp",
            Checkpoint::Oracle(_) => "oracle",
        }
    }

    pub fn elements(&self) -> Vec<String> {
        match self {
            Checkpoint::Qnn { elements, .. } | Checkpoint::Mlp { elements, .. } => elements.clone(),
            Checkpoint::Oracle(m) => oracle_elements(*m),
        }
    }

    pub fn potential(&self) -> &dyn Potential {
        match self {
            Checkpoint::Qnn { model, .. } => model,
            Checkpoint::Mlp { model, .. } => model,
            Checkpoint::Oracle(Molecule::LiH) => &LIH_MORSE,
            Checkpoint::Oracle(Molecule::H2O) => &WATER,
            Checkpoint::Oracle(Molecule::H3O) => &HYDRONIUM,
        }
    }

    /// Label scaling of learned models; oracles have none.
    pub fn labels(&self) -> Option<LabelScaling> {
        match self {
            Checkpoint::Qnn { model, .. } => Some(model.labels()),
            Checkpoint::Mlp { model, .. } => Some(model.labels()),
            Checkpoint::Oracle(_) => None,
        }
    }

    pub fn num_params(&self) -> usize {
        match self {
            Checkpoint::Qnn { model, .. } => model.num_params(),
            Checkpoint::Mlp { model, .. } => model.num_params(),
            Checkpoint::Oracle(_) => 0,
        }
    }
}

pub fn oracle_elements(m: Molecule) -> Vec<String> {
    let e: &[&str] = match m {
        Molecule::LiH => &["Li", "H"],
        Molecule::H2O => &["O", "H", "H"],
        Molecule::H3O => &["O", "H", "H", "H"],
    };
    e.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    format: String,
    version: u32,
    family: String,
    preset: String,
    provenance: String,
    elements: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Labels>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pipeline: Option<Pipeline>,
    #[serde(skip_serializing_if = "Option::is_none")]
    circuit: Option<Circuit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    network: Option<Network>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parameters: Option<Parameters>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Labels {
    scale: f64,
    offset: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Pipeline {
    /// `"bond 0 1"`, `"angle 1 0 2"`, ...
    coords: Vec<String>,
    /// `[min, max]` per coordinate.
    bounds: Vec<[f64; 2]>,
    /// `"arcsin 0"`: nonlinearity, then coordinate index.
    features: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Circuit {
    qubits: usize,
    entanglement: String,
    degree_sets: Vec<Vec<usize>>,
    depth: usize,
    gates: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Network {
    widths: Vec<usize>,
    seed: u64,
    features: usize,
    expansion: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Parameters {
    count: usize,
    values: Vec<f64>,
}

/// Text form of one gate, e.g. `ry 0 y0`, `z 0,1 y0*y1`, `z 0,2 p17`.
pub fn describe_gate(gate: &SymbolicGate) -> String {
    let angle = |a: &AngleSource| match a {
        AngleSource::Const(c) => c.to_string(),
        AngleSource::Input(e) => e.indices().map(|j| format!("y{j}")).collect::<Vec<_>>().join("*"),
        AngleSource::Param { index, .. } => format!("p{index}"),
    };
    match gate {
        SymbolicGate::Ry { qubit, angle: a } => format!("ry {qubit} {}", angle(a)),
        SymbolicGate::Rz { qubit, angle: a } => format!("rz {qubit} {}", angle(a)),
        SymbolicGate::Cnot { control, target } => format!("cnot {control} {target}"),
        SymbolicGate::MultiZ { mask, angle: a } => {
            let qs: Vec<String> = mask_indices(*mask).map(|q| q.to_string()).collect();
            format!("z {} {}", qs.join(","), angle(a))
        }
    }
}

fn pipeline_section(p: &DescriptorPipeline) -> Pipeline {
    Pipeline {
        coords: p.coords().iter().map(|c| c.to_string()).collect(),
        bounds: p.scalers().iter().map(|s| [s.min, s.max]).collect(),
        features: p.feature_defs().iter().map(|f| format!("{} {}", f.map.name(), f.coord)).collect(),
    }
}

fn labels_section(l: LabelScaling) -> Labels {
    Labels { scale: l.scale, offset: l.offset }
}

fn parameters_section(values: &[f64]) -> Parameters {
    Parameters { count: values.len(), values: values.to_vec() }
}

pub fn format_checkpoint(checkpoint: &Checkpoint) -> String {
    let (meta, elements) = match checkpoint {
        Checkpoint::Qnn { model, elements } => (model.meta.clone(), elements.clone()),
        Checkpoint::Mlp { model, elements } => (model.meta.clone(), elements.clone()),
        Checkpoint::Oracle(m) => {
            (ModelMeta { preset: m.name().to_string(), provenance: "analytic oracle".to_string() }, oracle_elements(*m))
        }
    };
    let mut file = File {
        format: FORMAT_TAG.to_string(),
        version: VERSION,
        family: checkpoint.family().to_string(),
        preset: meta.preset,
        provenance: meta.provenance,
        elements,
        oracle: None,
        labels: None,
        pipeline: None,
        circuit: None,
        network: None,
        parameters: None,
    };
    match checkpoint {
        Checkpoint::Qnn { model, .. } => {
            let t = model.template();
            let spec = t.encoding();
            file.labels = Some(labels_section(model.labels()));
            file.pipeline = Some(pipeline_section(model.pipeline()));
            file.circuit = Some(Circuit {
                qubits: spec.num_qubits,
                entanglement: spec.entanglement.name().to_string(),
                degree_sets: spec.degree_sets.clone(),
                depth: t.depth(),
                gates: t.gates().iter().map(describe_gate).collect(),
            });
            file.parameters = Some(parameters_section(model.params()));
        }
        Checkpoint::Mlp { model, .. } => {
            let spec = model.mlp().spec();
            file.labels = Some(labels_section(model.labels()));
            file.pipeline = Some(pipeline_section(model.pipeline()));
            file.network = Some(Network {
                widths: spec.widths().to_vec(),
                seed: spec.seed,
                features: model.expansion().num_features(),
                expansion: model.expansion().terms().to_vec(),
            });
            file.parameters = Some(parameters_section(model.params()));
        }
        Checkpoint::Oracle(m) => file.oracle = Some(m.name().to_string()),
    }
    toml::to_string(&file).expect("checkpoint sections always serialize")
}

pub fn parse_checkpoint(text: &str, source_name: &str) -> Result<Checkpoint> {
    let fail = |message: String| Error::Format { source_name: source_name.to_string(), message };
    let header: Header = toml::from_str(text).map_err(|e| fail(format!("not a checkpoint: {}", e.message())))?;
    if header.format != FORMAT_TAG {
        return Err(fail(format!("format tag `{}` is not `{FORMAT_TAG}`", header.format)));
    }
    if header.version != VERSION {
        return Err(fail(format!("checkpoint version {} is not supported (expected {VERSION})", header.version)));
    }
    let file: File = toml::from_str(text).map_err(|e| fail(format!("incomplete or malformed checkpoint: {}", e.message())))?;
    let core = |e: qff_core::Error| fail(e.to_string());
    let need = |what: &str| fail(format!("family `{}` needs a [{what}] section", file.family));
    let meta = ModelMeta { preset: file.preset.clone(), provenance: file.provenance.clone() };
    let learned = |file: &File| -> Result<(LabelScaling, DescriptorPipeline, Vec<f64>)> {
        let l = file.labels.as_ref().ok_or_else(|| need("labels"))?;
        let labels = LabelScaling::new(l.scale, l.offset).map_err(core)?;
        let pipeline = build_pipeline(file.pipeline.as_ref().ok_or_else(|| need("pipeline"))?).map_err(core)?;
        let p = file.parameters.as_ref().ok_or_else(|| need("parameters"))?;
        if p.values.len() != p.count {
            return Err(fail(format!("parameter count says {} but {} values are present", p.count, p.values.len())));
        }
        Ok((labels, pipeline, p.values.clone()))
    };
    match file.family.as_str() {
        "qnn" => {
            let (labels, pipeline, params) = learned(&file)?;
            let c = file.circuit.as_ref().ok_or_else(|| need("circuit"))?;
            let spec = CouplingSpec::new(c.qubits, c.entanglement.parse().map_err(core)?, c.degree_sets.clone())
                .map_err(core)?;
            let template = assemble_qnn(&spec, &spec, c.depth).map_err(core)?;
            check_gates(&template, &c.gates).map_err(fail)?;
            let model = QffModel::new(template, pipeline, params, labels, meta).map_err(core)?;
            Ok(Checkpoint::Qnn { model, elements: file.elements })
        }
        "mlp" => {
            let (labels, pipeline, params) = learned(&file)?;
            let n = file.network.as_ref().ok_or_else(|| need("network"))?;
            let mlp = Mlp::from_params(MlpSpec::new(n.widths.clone(), n.seed).map_err(core)?, params).map_err(core)?;
            let expansion = InputExpansion::new(n.expansion.clone(), n.features).map_err(core)?;
            let model = MlpModel::new(mlp, expansion, pipeline, labels, meta).map_err(core)?;
            Ok(Checkpoint::Mlp { model, elements: file.elements })
        }
        "oracle" => {
            let name = file.oracle.as_ref().ok_or_else(|| fail("oracle checkpoint names no oracle".to_string()))?;
            Ok(Checkpoint::Oracle(name.parse().map_err(core)?))
        }
        other => Err(fail(format!("unknown model family `{other}`"))),
    }
}

fn build_pipeline(p: &Pipeline) -> qff_core::Result<DescriptorPipeline> {
    let coords = p.coords.iter().map(|c| c.parse()).collect::<qff_core::Result<Vec<_>>>()?;
    let scalers = p.bounds.iter().map(|b| MinMaxScaler::new(b[0], b[1])).collect::<qff_core::Result<Vec<_>>>()?;
    let features = p
        .features
        .iter()
        .map(|f| parse_feature(f))
        .collect::<qff_core::Result<Vec<_>>>()?;
    DescriptorPipeline::new(coords, scalers, features)
}

/// `"<nonlinearity> <coordinate index>"`.
pub fn parse_feature(text: &str) -> qff_core::Result<FeatureDef> {
    let mut parts = text.split_whitespace();
    let (Some(map), Some(coord), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(qff_core::Error::Argument(format!("feature `{text}` is not `<map> <coord>`")));
    };
    let coord = coord.parse().map_err(|_| qff_core::Error::Argument(format!("bad coordinate index in `{text}`")))?;
    Ok(FeatureDef { coord, map: map.parse()? })
}

fn check_gates(template: &QnnTemplate, stored: &[String]) -> std::result::Result<(), String> {
    let rebuilt: Vec<String> = template.gates().iter().map(describe_gate).collect();
    if rebuilt.len() != stored.len() {
        return Err(format!("gate list has {} gates, the layout builds {}", stored.len(), rebuilt.len()));
    }
    match rebuilt.iter().zip(stored).position(|(a, b)| a != b) {
        Some(k) => Err(format!("gate {k} is `{}` but the layout builds `{}`", stored[k], rebuilt[k])),
        None => Ok(()),
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: &Path) -> Result<()> {
    write_text(path, &format_checkpoint(checkpoint))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    parse_checkpoint(&read_text(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use qff_core::data::{bond_grid, diatomic_geometry, lih_dataset};
    use qff_core::presets::Preset;

    fn lih_qnn() -> QffModel {
        let data = lih_dataset(&LIH_MORSE, &bond_grid(0.9, 4.5, 20).unwrap()).unwrap();
        let p = Preset::lih();
        let t = p.template().unwrap();
        let theta: Vec<f64> = (0..t.num_params()).map(|i| (i as f64 * 0.7311).sin() / 3.0).collect();
        let labels = LabelScaling::fit(&data.energies(), 0.9).unwrap();
        let meta = ModelMeta { preset: "lih".into(), provenance: "unit test".into() };
        QffModel::new(t, p.fit_pipeline(&data).unwrap(), theta, labels, meta).unwrap()
    }

    #[test]
    fn qnn_round_trip_predicts_bit_exactly() {
        let model = lih_qnn();
        let ck = Checkpoint::Qnn { model: model.clone(), elements: oracle_elements(Molecule::LiH) };
        let back = parse_checkpoint(&format_checkpoint(&ck), "mem").unwrap();
        assert_eq!(back, ck);
        let x = diatomic_geometry(2.1234);
        let Checkpoint::Qnn { model: loaded, .. } = back else { unreachable!() };
        assert_eq!(loaded.energy_and_forces(&x).unwrap(), model.energy_and_forces(&x).unwrap());
    }

    #[test]
    fn version_and_truncation_are_rejected() {
        let text = format_checkpoint(&Checkpoint::Qnn { model: lih_qnn(), elements: oracle_elements(Molecule::LiH) });
        let bumped = text.replace("version = 1", "version = 2");
        let err = parse_checkpoint(&bumped, "mem").unwrap_err();
        assert!(err.to_string().contains("version 2"), "{err}");
        // Checkpoints are ASCII, so any byte offset is a valid cut.
        for cut in [text.len() / 3, text.len() / 2, text.len() - 40] {
            assert!(matches!(parse_checkpoint(&text[..cut], "mem"), Err(Error::Format { .. })), "cut at {cut}");
        }
    }

    #[test]
    fn tampered_gate_list_is_rejected() {
        let text = format_checkpoint(&Checkpoint::Qnn { model: lih_qnn(), elements: oracle_elements(Molecule::LiH) });
        let tampered = text.replacen("\"ry 0 p0\"", "\"ry 1 p0\"", 1);
        assert_ne!(tampered, text);
        let err = parse_checkpoint(&tampered, "mem").unwrap_err();
        assert!(err.to_string().contains("gate 0"), "{err}");
    }

    #[test]
    fn oracle_checkpoint_round_trips() {
        for m in [Molecule::LiH, Molecule::H2O, Molecule::H3O] {
            let back = parse_checkpoint(&format_checkpoint(&Checkpoint::Oracle(m)), "mem").unwrap();
            assert_eq!(back, Checkpoint::Oracle(m));
        }
    }
}
