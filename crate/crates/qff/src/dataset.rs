//! Dataset text format.
//!
//! ```text
//! # preset: lih
//! # provenance: morse oracle
//! 2 Li H forces
//! <3n coordinates> <energy> <3n forces>
//! ```
//!
//! Leading `#` lines are comments; `# preset:` and `# provenance:` are read
//! back as metadata. The header gives the atom count, the element labels and
//! `forces` or `energy`. Each following non-blank line is one sample, space
//! delimited. Numbers are written in shortest round-trip form, so a save and
//! load reproduces every value bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use qff_core::data::{Dataset, Sample};

use crate::error::{read_text, write_text, Error, Result};

const PRESET_TAG: &str = "# preset:";
const PROVENANCE_TAG: &str = "# provenance:";

pub fn format_dataset(data: &Dataset) -> String {
    let mut out = String::new();
    writeln!(out, "{PRESET_TAG} {}", data.preset).unwrap();
    writeln!(out, "{PROVENANCE_TAG} {}", data.provenance.replace('\n', " ")).unwrap();
    let flag = if data.has_forces() { "forces" } else { "energy" };
    writeln!(out, "{} {} {flag}", data.num_atoms(), data.elements().join(" ")).unwrap();
    for s in data.samples() {
        let mut fields: Vec<String> = s.cartesian.iter().map(f64::to_string).collect();
        fields.push(s.energy.to_string());
        if data.has_forces() {
            fields.extend(s.forces.as_ref().expect("has_forces checked").iter().map(f64::to_string));
        }
        writeln!(out, "{}", fields.join(" ")).unwrap();
    }
    out
}

pub fn parse_dataset(text: &str, source_name: &str) -> Result<Dataset> {
    let err = |line: usize, message: String| Error::Parse { source_name: source_name.to_string(), line, message };
    let mut preset = String::new();
    let mut provenance = String::new();
    let mut header: Option<(Vec<String>, bool)> = None;
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(v) = line.strip_prefix(PRESET_TAG) {
                preset = v.trim().to_string();
            } else if let Some(v) = line.strip_prefix(PROVENANCE_TAG) {
                provenance = v.trim().to_string();
            }
            continue;
        }
        let Some((elements, with_forces)) = &header else {
            header = Some(parse_header(line).map_err(|m| err(line_no, m))?);
            continue;
        };
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(line_no, format!("`{t}` is not a number"))))
            .collect::<Result<Vec<f64>>>()?;
        let n3 = 3 * elements.len();
        let expected = n3 + 1 + if *with_forces { n3 } else { 0 };
        if values.len() != expected {
            return Err(err(line_no, format!("expected {expected} values, found {}", values.len())));
        }
        let forces = with_forces.then(|| values[n3 + 1..].to_vec());
        let sample = Sample::new(values[..n3].to_vec(), values[n3], forces).map_err(|e| err(line_no, e.to_string()))?;
        samples.push(sample);
    }
    let Some((elements, _)) = header else {
        return Err(err(text.lines().count().max(1), "missing header line".to_string()));
    };
    Dataset::new(elements, samples, &preset, &provenance).map_err(|e| Error::Format {
        source_name: source_name.to_string(),
        message: e.to_string(),
    })
}

fn parse_header(line: &str) -> std::result::Result<(Vec<String>, bool), String> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let n: usize = tokens
        .first()
        .and_then(|t| t.parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("header must start with a positive atom count, got `{line}`"))?;
    if tokens.len() != n + 2 {
        return Err(format!("header needs {n} element labels and a flag, got `{line}`"));
    }
    let with_forces = match tokens[n + 1] {
        "forces" => true,
        "energy" => false,
        other => return Err(format!("header flag must be `forces` or `energy`, got `{other}`")),
    };
    Ok((tokens[1..=n].iter().map(|s| s.to_string()).collect(), with_forces))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(&read_text(path)?, &path.display().to_string())
}

pub fn save_dataset(data: &Dataset, path: &Path) -> Result<()> {
    write_text(path, &format_dataset(data))
}

/// Turns an external dump into a [`Dataset`].
pub trait Converter {
    fn convert(&self, text: &str, source_name: &str) -> Result<Dataset>;
}

/// Extended XYZ frames: atom count, a comment line carrying `energy=<eV>`,
/// then `El x y z [fx fy fz]` per atom. Forces must be present in every
/// frame or in none.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExtendedXyz;

impl Converter for ExtendedXyz {
    fn convert(&self, text: &str, source_name: &str) -> Result<Dataset> {
        let err = |line: usize, message: String| Error::Parse { source_name: source_name.to_string(), line, message };
        let lines: Vec<&str> = text.lines().collect();
        let mut i = 0;
        let mut elements: Option<Vec<String>> = None;
        let mut samples = Vec::new();
        while i < lines.len() {
            if lines[i].trim().is_empty() {
                i += 1;
                continue;
            }
            let n: usize = lines[i].trim().parse().map_err(|_| err(i + 1, "expected an atom count".to_string()))?;
            if i + 2 + n > lines.len() {
                return Err(err(i + 1, format!("frame of {n} atoms is truncated")));
            }
            let energy = lines[i + 1]
                .split_whitespace()
                .find_map(|t| t.strip_prefix("energy="))
                .ok_or_else(|| err(i + 2, "comment line has no `energy=` field".to_string()))?
                .parse::<f64>()
                .map_err(|_| err(i + 2, "energy is not a number".to_string()))?;
            let mut frame_elements = Vec::with_capacity(n);
            let mut cartesian = Vec::with_capacity(3 * n);
            let mut forces = Vec::with_capacity(3 * n);
            for k in 0..n {
                let line_no = i + 3 + k;
                let tokens: Vec<&str> = lines[line_no - 1].split_whitespace().collect();
                if tokens.len() != 4 && tokens.len() != 7 {
                    return Err(err(line_no, format!("expected 4 or 7 fields, found {}", tokens.len())));
                }
                frame_elements.push(tokens[0].to_string());
                let nums = tokens[1..]
                    .iter()
                    .map(|t| t.parse::<f64>().map_err(|_| err(line_no, format!("`{t}` is not a number"))))
                    .collect::<Result<Vec<f64>>>()?;
                cartesian.extend_from_slice(&nums[..3]);
                forces.extend_from_slice(&nums[3..]);
            }
            match &elements {
                None => elements = Some(frame_elements),
                Some(e) if *e != frame_elements => {
                    return Err(err(i + 1, "element sequence differs from the first frame".to_string()));
                }
                Some(_) => {}
            }
            let forces = match forces.len() {
                0 => None,
                m if m == 3 * n => Some(forces),
                _ => return Err(err(i + 1, "forces given for only some atoms".to_string())),
            };
            samples.push(Sample::new(cartesian, energy, forces).map_err(|e| err(i + 1, e.to_string()))?);
            i += 2 + n;
        }
        let elements = elements.ok_or_else(|| err(1, "no frames".to_string()))?;
        if samples.iter().any(|s| s.forces.is_some()) && samples.iter().any(|s| s.forces.is_none()) {
            return Err(Error::Format {
                source_name: source_name.to_string(),
                message: "forces must be present in every frame or in none".to_string(),
            });
        }
        Dataset::new(elements, samples, "custom", &format!("converted from {source_name}"))
            .map_err(|e| Error::Format { source_name: source_name.to_string(), message: e.to_string() })
    }
}
