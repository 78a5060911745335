//! Symbolic circuit IR for re-uploading QNNs.
//!
//! A template is the gate program `U_0, Phi, U_1, Phi, ..., Phi, U_D` where every
//! encoding block `Phi` is identical and each trainable block `U_l` owns fresh
//! parameters. Angles stay symbolic (input products or parameter references)
//! until [`QnnTemplate::bind`] resolves them.
//!
//! Inside a block the order is fixed: single-qubit `RY` rotations, then pair
//! terms in lexicographic order, then higher-degree terms in the order given.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{bail, Error, Result};
use crate::statevec::{mask_indices, qubit_mask, BoundGate, MAX_QUBITS};

/// Qubit pair pattern for two-body `ZZ` terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entanglement {
    None,
    Linear,
    Circular,
    Full,
}

impl Entanglement {
    /// Pair set over `n` qubits, each pair as `(low, high)`, lexicographically sorted.
    pub fn pairs(&self, n: usize) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = match self {
            Entanglement::None => Vec::new(),
            Entanglement::Linear => (0..n.saturating_sub(1)).map(|j| (j, j + 1)).collect(),
            Entanglement::Circular => (0..n)
                .map(|j| (j, (j + 1) % n))
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect(),
            Entanglement::Full => (0..n)
                .flat_map(|j| (j + 1..n).map(move |k| (j, k)))
                .collect(),
        };
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    pub fn name(&self) -> &'static str {
        match self {
            Entanglement::None => "none",
            Entanglement::Linear => "linear",
            Entanglement::Circular => "circular",
            Entanglement::Full => "full",
        }
    }
}

impl fmt::Display for Entanglement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Entanglement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => Entanglement::None,
            "linear" => Entanglement::Linear,
            "circular" | "circ" => Entanglement::Circular,
            "full" => Entanglement::Full,
            other => bail!(Argument, "unknown entanglement pattern `{other}`"),
        })
    }
}

/// Interaction layout shared by encoding and trainable blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingSpec {
    pub num_qubits: usize,
    pub entanglement: Entanglement,
    /// Qubit tuples for degree >= 3 Z-string terms.
    pub degree_sets: Vec<Vec<usize>>,
}

pub type EncodingSpec = CouplingSpec;
pub type AnsatzSpec = CouplingSpec;

impl CouplingSpec {
    pub fn new(num_qubits: usize, entanglement: Entanglement, degree_sets: Vec<Vec<usize>>) -> Result<Self> {
        let spec = Self { num_qubits, entanglement, degree_sets };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 || self.num_qubits > MAX_QUBITS {
            bail!(Capacity, "{} qubits outside 1..={MAX_QUBITS}", self.num_qubits);
        }
        for set in &self.degree_sets {
            if set.len() < 3 {
                bail!(Argument, "degree set {set:?} has fewer than 3 qubits");
            }
            if let Some(&q) = set.iter().find(|&&q| q >= self.num_qubits) {
                bail!(Argument, "degree set {set:?} references qubit {q} >= {}", self.num_qubits);
            }
            qubit_mask(set)?;
        }
        Ok(())
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.entanglement.pairs(self.num_qubits)
    }

    /// Number of gates (equivalently, parameters) in one full block.
    pub fn terms_per_block(&self) -> usize {
        self.num_qubits + self.pairs().len() + self.degree_sets.len()
    }
}

/// Consecutive qubit triples `(j, j+1, j+2)`.
pub fn sliding_triples(n: usize) -> Vec<Vec<usize>> {
    (0..n.saturating_sub(2)).map(|j| vec![j, j + 1, j + 2]).collect()
}

/// Degree-`l` qubit tuples following an entanglement pattern. `l < 3` yields
/// nothing since one- and two-body terms are already covered.
///
/// `Full` takes every `l`-subset, `Linear` every window of `l` consecutive
/// qubits, `Circular` the windows wrapping around the register.
pub fn degree_sets(n: usize, entanglement: Entanglement, l: usize) -> Vec<Vec<usize>> {
    if l < 3 || l > n {
        return Vec::new();
    }
    match entanglement {
        Entanglement::None => Vec::new(),
        Entanglement::Linear => (0..=n - l).map(|j| (j..j + l).collect()).collect(),
        Entanglement::Circular if n == l => vec![(0..n).collect()],
        Entanglement::Circular => (0..n)
            .map(|j| {
                let mut set: Vec<usize> = (j..j + l).map(|q| q % n).collect();
                set.sort_unstable();
                set
            })
            .collect(),
        Entanglement::Full => {
            let mut out = Vec::new();
            let mut set: Vec<usize> = (0..l).collect();
            loop {
                out.push(set.clone());
                // advance to the next l-combination in lexicographic order
                let Some(i) = (0..l).rev().find(|&i| set[i] < n - l + i) else { break };
                set[i] += 1;
                for k in i + 1..l {
                    set[k] = set[k - 1] + 1;
                }
            }
            out
        }
    }
}

/// Product of input features `prod_{j in indices} y_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InputExpr {
    mask: u32,
}

impl InputExpr {
    pub fn new(indices: &[usize]) -> Result<Self> {
        Ok(Self { mask: qubit_mask(indices)? })
    }

    pub fn single(j: usize) -> Self {
        Self { mask: 1 << j }
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + Clone {
        mask_indices(self.mask)
    }

    pub fn contains(&self, j: usize) -> bool {
        j < 32 && self.mask & (1 << j) != 0
    }

    pub fn evaluate(&self, y: &[f64]) -> f64 {
        self.indices().map(|j| y[j]).product()
    }

    /// `d(prod y)/d y_j`: the product over the remaining indices, or 0 if `j` is absent.
    pub fn partial(&self, y: &[f64], j: usize) -> f64 {
        if !self.contains(j) {
            return 0.0;
        }
        self.indices().filter(|&k| k != j).map(|k| y[k]).product()
    }
}

/// Which coupling term of a trainable block a parameter drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Single(usize),
    Pair(usize, usize),
    /// Degree >= 3 term, qubits as a mask.
    Multi(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamRef {
    pub layer: usize,
    pub slot: Slot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleSource {
    Const(f64),
    Input(InputExpr),
    /// `index` is the position in the flat parameter vector.
    Param { index: usize, reference: ParamRef },
}

impl AngleSource {
    fn resolve(&self, y: &[f64], theta: &[f64]) -> f64 {
        match *self {
            AngleSource::Const(a) => a,
            AngleSource::Input(e) => e.evaluate(y),
            AngleSource::Param { index, .. } => theta[index],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolicGate {
    Ry { qubit: usize, angle: AngleSource },
    Rz { qubit: usize, angle: AngleSource },
    Cnot { control: usize, target: usize },
    MultiZ { mask: u32, angle: AngleSource },
}

impl SymbolicGate {
    pub fn angle(&self) -> Option<&AngleSource> {
        match self {
            SymbolicGate::Ry { angle, .. }
            | SymbolicGate::Rz { angle, .. }
            | SymbolicGate::MultiZ { angle, .. } => Some(angle),
            SymbolicGate::Cnot { .. } => None,
        }
    }

    fn angle_mut(&mut self) -> Option<&mut AngleSource> {
        match self {
            SymbolicGate::Ry { angle, .. }
            | SymbolicGate::Rz { angle, .. }
            | SymbolicGate::MultiZ { angle, .. } => Some(angle),
            SymbolicGate::Cnot { .. } => None,
        }
    }

    pub fn bind(&self, y: &[f64], theta: &[f64]) -> BoundGate {
        match *self {
            SymbolicGate::Ry { qubit, angle } => BoundGate::Ry { qubit, angle: angle.resolve(y, theta) },
            SymbolicGate::Rz { qubit, angle } => BoundGate::Rz { qubit, angle: angle.resolve(y, theta) },
            SymbolicGate::Cnot { control, target } => BoundGate::Cnot { control, target },
            SymbolicGate::MultiZ { mask, angle } => BoundGate::MultiZ { mask, angle: angle.resolve(y, theta) },
        }
    }
}

/// Encoding block `Phi(y) = E(y) S(y)`.
pub fn feature_map(spec: &EncodingSpec) -> Result<Vec<SymbolicGate>> {
    spec.validate()?;
    let mut gates = Vec::with_capacity(spec.terms_per_block());
    for j in 0..spec.num_qubits {
        gates.push(SymbolicGate::Ry { qubit: j, angle: AngleSource::Input(InputExpr::single(j)) });
    }
    for (j, k) in spec.pairs() {
        let mask = (1 << j) | (1 << k);
        gates.push(SymbolicGate::MultiZ { mask, angle: AngleSource::Input(InputExpr { mask }) });
    }
    for set in &spec.degree_sets {
        let mask = qubit_mask(set)?;
        gates.push(SymbolicGate::MultiZ { mask, angle: AngleSource::Input(InputExpr { mask }) });
    }
    Ok(gates)
}

/// Trainable block `U_l`. Layer 0 carries single-qubit rotations only.
/// Parameter indices are local to the block, starting at 0.
pub fn trainable_layer(spec: &AnsatzSpec, layer: usize) -> Result<Vec<SymbolicGate>> {
    spec.validate()?;
    let mut next = 0usize;
    let mut param = |slot: Slot| {
        let a = AngleSource::Param { index: next, reference: ParamRef { layer, slot } };
        next += 1;
        a
    };
    let mut gates = Vec::with_capacity(spec.terms_per_block());
    for j in 0..spec.num_qubits {
        gates.push(SymbolicGate::Ry { qubit: j, angle: param(Slot::Single(j)) });
    }
    if layer > 0 {
        for (j, k) in spec.pairs() {
            gates.push(SymbolicGate::MultiZ { mask: (1 << j) | (1 << k), angle: param(Slot::Pair(j, k)) });
        }
        for set in &spec.degree_sets {
            let mask = qubit_mask(set)?;
            gates.push(SymbolicGate::MultiZ { mask, angle: param(Slot::Multi(mask)) });
        }
    }
    Ok(gates)
}

/// A contiguous block of the gate list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Trainable { layer: usize, start: usize, end: usize },
    Encoding { upload: usize, start: usize, end: usize },
}

/// Assembled re-uploading circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct QnnTemplate {
    encoding: EncodingSpec,
    ansatz: AnsatzSpec,
    depth: usize,
    gates: Vec<SymbolicGate>,
    params: Vec<ParamRef>,
    param_gates: Vec<usize>,
    input_gates: Vec<usize>,
    stages: Vec<Stage>,
}

/// Builds `U_0, Phi, U_1, ..., Phi, U_D`.
pub fn assemble_qnn(encoding: &EncodingSpec, ansatz: &AnsatzSpec, depth: usize) -> Result<QnnTemplate> {
    if encoding.num_qubits != ansatz.num_qubits {
        bail!(
            Argument,
            "encoding has {} qubits but ansatz has {}",
            encoding.num_qubits,
            ansatz.num_qubits
        );
    }
    if depth == 0 {
        bail!(Argument, "depth must be at least 1");
    }
    let phi = feature_map(encoding)?;
    let mut gates = Vec::new();
    let mut stages = Vec::with_capacity(2 * depth + 1);
    let mut offset = 0usize;
    for layer in 0..=depth {
        if layer > 0 {
            let start = gates.len();
            gates.extend_from_slice(&phi);
            stages.push(Stage::Encoding { upload: layer - 1, start, end: gates.len() });
        }
        let start = gates.len();
        let mut block = trainable_layer(ansatz, layer)?;
        let count = block.len();
        for g in block.iter_mut() {
            if let Some(AngleSource::Param { index, .. }) = g.angle_mut() {
                *index += offset;
            }
        }
        offset += count;
        gates.extend(block);
        stages.push(Stage::Trainable { layer, start, end: gates.len() });
    }
    QnnTemplate::from_parts(encoding.clone(), ansatz.clone(), depth, gates, stages)
}

impl QnnTemplate {
    fn from_parts(
        encoding: EncodingSpec,
        ansatz: AnsatzSpec,
        depth: usize,
        gates: Vec<SymbolicGate>,
        stages: Vec<Stage>,
    ) -> Result<Self> {
        let mut params: Vec<Option<ParamRef>> = Vec::new();
        let mut param_gates: Vec<usize> = Vec::new();
        let mut input_gates = Vec::new();
        for (gi, g) in gates.iter().enumerate() {
            match g.angle() {
                Some(AngleSource::Param { index, reference }) => {
                    if *index >= params.len() {
                        params.resize(index + 1, None);
                        param_gates.resize(index + 1, usize::MAX);
                    }
                    if params[*index].is_some() {
                        bail!(Argument, "parameter {index} drives more than one gate");
                    }
                    params[*index] = Some(*reference);
                    param_gates[*index] = gi;
                }
                Some(AngleSource::Input(e)) => {
                    if let Some(j) = e.indices().find(|&j| j >= encoding.num_qubits) {
                        bail!(Argument, "input expression references feature {j}");
                    }
                    input_gates.push(gi);
                }
                _ => {}
            }
        }
        let params = params
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.ok_or_else(|| Error::Argument(alloc::format!("parameter {i} is unused"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { encoding, ansatz, depth, gates, params, param_gates, input_gates, stages })
    }

    pub fn encoding(&self) -> &EncodingSpec {
        &self.encoding
    }

    pub fn ansatz(&self) -> &AnsatzSpec {
        &self.ansatz
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_qubits(&self) -> usize {
        self.encoding.num_qubits
    }

    /// Feature dimension `N`; one feature per qubit.
    pub fn num_features(&self) -> usize {
        self.encoding.num_qubits
    }

    /// Parameter dimension `d`.
    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn gates(&self) -> &[SymbolicGate] {
        &self.gates
    }

    pub fn param_refs(&self) -> &[ParamRef] {
        &self.params
    }

    /// Gate index driven by each parameter.
    pub fn param_gates(&self) -> &[usize] {
        &self.param_gates
    }

    /// Indices of gates whose angle is an input expression.
    pub fn input_gates(&self) -> &[usize] {
        &self.input_gates
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    fn check_dims(&self, y: &[f64], theta: &[f64]) -> Result<()> {
        if y.len() != self.num_features() {
            bail!(Argument, "expected {} features, got {}", self.num_features(), y.len());
        }
        if theta.len() != self.num_params() {
            bail!(Argument, "expected {} parameters, got {}", self.num_params(), theta.len());
        }
        Ok(())
    }

    /// Resolves every angle.
    pub fn bind(&self, y: &[f64], theta: &[f64]) -> Result<Vec<BoundGate>> {
        let mut out = Vec::with_capacity(self.gates.len());
        self.bind_into(y, theta, &mut out)?;
        Ok(out)
    }

    pub fn bind_into(&self, y: &[f64], theta: &[f64], out: &mut Vec<BoundGate>) -> Result<()> {
        self.check_dims(y, theta)?;
        out.clear();
        out.extend(self.gates.iter().map(|g| g.bind(y, theta)));
        Ok(())
    }

    /// The encoding blocks alone, `Phi^D`, bound to `y`.
    pub fn bind_encoding_only(&self, y: &[f64]) -> Result<Vec<BoundGate>> {
        if y.len() != self.num_features() {
            bail!(Argument, "expected {} features, got {}", self.num_features(), y.len());
        }
        let mut out = Vec::new();
        for stage in &self.stages {
            if let Stage::Encoding { start, end, .. } = *stage {
                out.extend(self.gates[start..end].iter().map(|g| g.bind(y, &[])));
            }
        }
        Ok(out)
    }

    /// Human-readable label for parameter `index`, e.g. `theta[3].zz(0,2)`.
    pub fn param_label(&self, index: usize) -> String {
        let p = self.params[index];
        match p.slot {
            Slot::Single(j) => alloc::format!("theta[{}].y({j})", p.layer),
            Slot::Pair(j, k) => alloc::format!("theta[{}].zz({j},{k})", p.layer),
            Slot::Multi(mask) => {
                let qs: Vec<String> = mask_indices(mask).map(|q| alloc::format!("{q}")).collect();
                alloc::format!("theta[{}].z({})", p.layer, qs.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::StateVector;

    fn full3() -> CouplingSpec {
        CouplingSpec::new(3, Entanglement::Full, vec![vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn pair_sets() {
        assert_eq!(Entanglement::Linear.pairs(2), vec![(0, 1)]);
        assert_eq!(Entanglement::Circular.pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(Entanglement::Circular.pairs(4), vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert_eq!(Entanglement::Full.pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(Entanglement::Linear.pairs(1), vec![]);
        assert_eq!(Entanglement::Circular.pairs(1), vec![]);
    }

    #[test]
    fn degree_set_patterns() {
        assert_eq!(degree_sets(3, Entanglement::Full, 3), vec![vec![0, 1, 2]]);
        assert_eq!(degree_sets(6, Entanglement::Linear, 3), sliding_triples(6));
        assert_eq!(degree_sets(4, Entanglement::Full, 3).len(), 4);
        assert_eq!(degree_sets(4, Entanglement::Circular, 3)[3], vec![0, 1, 3]);
        assert!(degree_sets(3, Entanglement::Full, 2).is_empty());
        assert!(degree_sets(2, Entanglement::Full, 3).is_empty());
    }

    #[test]
    fn full_feature_map_gate_counts() {
        let phi = feature_map(&full3()).unwrap();
        let ry = phi.iter().filter(|g| matches!(g, SymbolicGate::Ry { .. })).count();
        let zz = phi
            .iter()
            .filter(|g| matches!(g, SymbolicGate::MultiZ { mask, .. } if mask.count_ones() == 2))
            .count();
        let zzz = phi
            .iter()
            .filter(|g| matches!(g, SymbolicGate::MultiZ { mask, .. } if mask.count_ones() == 3))
            .count();
        assert_eq!((ry, zz, zzz), (3, 3, 1));

        let bound: Vec<BoundGate> = phi.iter().map(|g| g.bind(&[0.1, 0.2, 0.3], &[])).collect();
        let decomposed: Vec<BoundGate> = bound.iter().flat_map(|g| g.decompose()).collect();
        let cnots = decomposed.iter().filter(|g| matches!(g, BoundGate::Cnot { .. })).count();
        let rz = decomposed.iter().filter(|g| matches!(g, BoundGate::Rz { .. })).count();
        assert_eq!((cnots, rz), (10, 4));
    }

    #[test]
    fn feature_map_rejects_out_of_range_degree_set() {
        let spec = CouplingSpec { num_qubits: 3, entanglement: Entanglement::Full, degree_sets: vec![vec![0, 1, 3]] };
        assert!(feature_map(&spec).is_err());
    }

    #[test]
    fn trainable_layer_parameter_counts() {
        assert_eq!(trainable_layer(&full3(), 1).unwrap().len(), 7);
        assert_eq!(trainable_layer(&full3(), 0).unwrap().len(), 3);
        let h3o = CouplingSpec::new(6, Entanglement::Linear, sliding_triples(6)).unwrap();
        assert_eq!(h3o.degree_sets, vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5]]);
        assert_eq!(trainable_layer(&h3o, 1).unwrap().len(), 15);
    }

    #[test]
    fn assembled_parameter_dimension() {
        assert_eq!(assemble_qnn(&full3(), &full3(), 10).unwrap().num_params(), 73);
        assert_eq!(assemble_qnn(&full3(), &full3(), 12).unwrap().num_params(), 87);
        let one = CouplingSpec::new(1, Entanglement::None, vec![]).unwrap();
        assert_eq!(assemble_qnn(&one, &one, 1).unwrap().num_params(), 2);
        for (n, ent, d) in [(2, Entanglement::Linear, 3), (4, Entanglement::Circular, 5), (5, Entanglement::Full, 2)] {
            let spec = CouplingSpec::new(n, ent, sliding_triples(n)).unwrap();
            let t = assemble_qnn(&spec, &spec, d).unwrap();
            assert_eq!(t.num_params(), n + d * spec.terms_per_block());
        }
    }

    #[test]
    fn assemble_rejects_mismatch_and_zero_depth() {
        let two = CouplingSpec::new(2, Entanglement::Linear, vec![]).unwrap();
        assert!(assemble_qnn(&full3(), &two, 2).is_err());
        assert!(assemble_qnn(&full3(), &full3(), 0).is_err());
    }

    #[test]
    fn encodings_identical_across_uploads() {
        let t = assemble_qnn(&full3(), &full3(), 4).unwrap();
        let blocks: Vec<&[SymbolicGate]> = t
            .stages()
            .iter()
            .filter_map(|s| match *s {
                Stage::Encoding { start, end, .. } => Some(&t.gates()[start..end]),
                _ => None,
            })
            .collect();
        assert_eq!(blocks.len(), 4);
        for b in &blocks[1..] {
            assert_eq!(*b, blocks[0]);
        }
    }

    #[test]
    fn binding_zero_inputs_and_params() {
        let t = assemble_qnn(&full3(), &full3(), 2).unwrap();
        let theta = vec![0.0; t.num_params()];
        let y = [0.0, 0.4, -0.3];
        let bound = t.bind(&y, &theta).unwrap();
        for &gi in t.param_gates() {
            assert_eq!(bound[gi].angle(), Some(0.0));
        }
        let bound = t.bind(&[0.0; 3], &theta).unwrap();
        for &gi in t.input_gates() {
            assert_eq!(bound[gi].angle(), Some(0.0));
        }
        assert!(t.bind(&[0.0; 2], &theta).is_err());
        assert!(t.bind(&[0.0; 3], &theta[1..]).is_err());
    }

    #[test]
    fn zero_params_equal_encoding_only() {
        let t = assemble_qnn(&full3(), &full3(), 3).unwrap();
        let y = [0.3, -1.2, 2.1];
        let full = StateVector::zero(3).unwrap().run(&t.bind(&y, &vec![0.0; t.num_params()]).unwrap()).unwrap();
        let enc = StateVector::zero(3).unwrap().run(&t.bind_encoding_only(&y).unwrap()).unwrap();
        for (a, b) in full.amplitudes().iter().zip(enc.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn param_labels() {
        let t = assemble_qnn(&full3(), &full3(), 1).unwrap();
        assert_eq!(t.param_label(0), "theta[0].y(0)");
        assert_eq!(t.param_label(6), "theta[1].zz(0,1)");
        assert_eq!(t.param_label(9), "theta[1].z(0,1,2)");
    }
}
