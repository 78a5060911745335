//! Experiment presets: molecule, descriptors, circuit shape and training budget.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::circuit::{assemble_qnn, degree_sets, CouplingSpec, Entanglement, QnnTemplate};
use crate::data::Dataset;
use crate::descriptors::{DescriptorPipeline, FeatureDef, InternalCoord, Nonlinearity};
use crate::error::{bail, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Molecule {
    LiH,
    H2O,
    H3O,
}

impl Molecule {
    pub fn name(&self) -> &'static str {
        match self {
            Molecule::LiH => "lih",
            Molecule::H2O => "h2o",
            Molecule::H3O => "h3o",
        }
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Molecule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "lih" => Molecule::LiH,
            "h2o" => Molecule::H2O,
            "h3o" | "h3o+" => Molecule::H3O,
            other => bail!(Argument, "unknown preset `{other}`"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Adam,
    GradientFree,
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::GradientFree => "gradient-free",
        }
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "adam" => OptimizerKind::Adam,
            "gradient-free" | "nelder-mead" | "cobyla" => OptimizerKind::GradientFree,
            other => bail!(Argument, "unknown optimizer `{other}`"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub molecule: Molecule,
    pub elements: Vec<String>,
    pub coords: Vec<InternalCoord>,
    pub features: Vec<FeatureDef>,
    pub entanglement: Entanglement,
    /// Highest Z-string degree `l` in both encoding and trainable blocks.
    pub degree: usize,
    pub depth: usize,
    pub chi: f64,
    pub optimizer: OptimizerKind,
    pub steps: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// Classical comparison topology, input layer first.
    pub mlp_widths: Vec<usize>,
}

fn arcsin_features(n: usize) -> Vec<FeatureDef> {
    (0..n).map(|coord| FeatureDef { coord, map: Nonlinearity::Arcsin }).collect()
}

impl Preset {
    pub fn get(molecule: Molecule) -> Self {
        match molecule {
            Molecule::LiH => Self::lih(),
            Molecule::H2O => Self::h2o(),
            Molecule::H3O => Self::h3o(),
        }
    }

    /// One bond expanded to `(pi s, arcsin s, arccos s)`, full coupling with a
    /// three-body term, ten layers.
    pub fn lih() -> Self {
        Self {
            molecule: Molecule::LiH,
            elements: vec!["Li".to_string(), "H".to_string()],
            coords: vec![InternalCoord::Bond(0, 1)],
            features: vec![
                FeatureDef { coord: 0, map: Nonlinearity::PiScale },
                FeatureDef { coord: 0, map: Nonlinearity::Arcsin },
                FeatureDef { coord: 0, map: Nonlinearity::Arccos },
            ],
            entanglement: Entanglement::Full,
            degree: 3,
            depth: 10,
            chi: 0.0,
            optimizer: OptimizerKind::Adam,
            steps: 4000,
            train_size: 50,
            test_size: 120,
            mlp_widths: vec![7, 4, 5, 2, 1],
        }
    }

    /// Two O-H bonds and the H-O-H angle, all through `arcsin`.
    pub fn h2o() -> Self {
        Self {
            molecule: Molecule::H2O,
            elements: vec!["O".to_string(), "H".to_string(), "H".to_string()],
            coords: vec![InternalCoord::Bond(0, 1), InternalCoord::Bond(0, 2), InternalCoord::Angle(1, 0, 2)],
            features: arcsin_features(3),
            entanglement: Entanglement::Full,
            degree: 3,
            depth: 12,
            chi: 1.0,
            optimizer: OptimizerKind::GradientFree,
            steps: 4000,
            train_size: 300,
            test_size: 650,
            mlp_widths: vec![7, 4, 6, 2, 2, 1],
        }
    }

    /// Three O-H bonds, two H-O-H angles and the umbrella dihedral.
    pub fn h3o() -> Self {
        Self {
            molecule: Molecule::H3O,
            elements: ["O", "H", "H", "H"].iter().map(|s| s.to_string()).collect(),
            coords: vec![
                InternalCoord::Bond(0, 1),
                InternalCoord::Bond(0, 2),
                InternalCoord::Bond(0, 3),
                InternalCoord::Angle(1, 0, 2),
                InternalCoord::Angle(1, 0, 3),
                InternalCoord::Dihedral(0, 3, 2, 1),
            ],
            features: arcsin_features(6),
            entanglement: Entanglement::Linear,
            degree: 3,
            depth: 10,
            chi: 0.0,
            optimizer: OptimizerKind::Adam,
            steps: 5000,
            train_size: 500,
            test_size: 500,
            mlp_widths: vec![6, 14, 2, 1],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.features.len()
    }

    /// Coupling used by both the encoding and the trainable blocks.
    pub fn coupling(&self) -> Result<CouplingSpec> {
        let n = self.num_qubits();
        CouplingSpec::new(n, self.entanglement, degree_sets(n, self.entanglement, self.degree))
    }

    pub fn template(&self) -> Result<QnnTemplate> {
        let spec = self.coupling()?;
        assemble_qnn(&spec, &spec, self.depth)
    }

    /// Descriptor pipeline with scalers fit on `train`.
    pub fn fit_pipeline(&self, train: &Dataset) -> Result<DescriptorPipeline> {
        if train.num_atoms() != self.elements.len() {
            bail!(Data, "preset {} needs {} atoms, dataset has {}", self.molecule, self.elements.len(), train.num_atoms());
        }
        DescriptorPipeline::fit(self.coords.clone(), self.features.clone(), train.geometries())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_parameter_counts() {
        assert_eq!(Preset::lih().template().unwrap().num_params(), 73);
        assert_eq!(Preset::h2o().template().unwrap().num_params(), 87);
        // 6 + 10 * (6 + 5 + 4)
        assert_eq!(Preset::h3o().template().unwrap().num_params(), 156);
    }

    #[test]
    fn names_round_trip() {
        for m in [Molecule::LiH, Molecule::H2O, Molecule::H3O] {
            assert_eq!(m.name().parse::<Molecule>().unwrap(), m);
            assert_eq!(Preset::get(m).molecule, m);
        }
        assert!("ch4".parse::<Molecule>().is_err());
        assert_eq!("cobyla".parse::<OptimizerKind>().unwrap(), OptimizerKind::GradientFree);
    }
}
