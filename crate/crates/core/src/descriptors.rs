//! Cartesian coordinates to QNN features.
//!
//! The pipeline is `internal coordinates -> min-max scaling to [-1, 1] ->
//! per-feature nonlinearity`, and every stage carries its derivative so the
//! full Jacobian `dy/dC` is available for force prediction.
//!
//! Cartesian coordinates are flat slices `[x0, y0, z0, x1, ...]` in Angstrom.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these whenever std is linked
use num_traits::Float;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::error::{bail, Error, Result};
use crate::linalg::{cross, dot3, norm3, scale3, sub3, Matrix};

/// Minimum separation between two atoms.
pub const MIN_SEPARATION: f64 = 1e-8;
/// Margin kept from `+-1` when differentiating `arcsin`/`arccos`.
pub const ARC_MARGIN: f64 = 1e-6;

/// Element labels plus Cartesian positions.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeGeometry {
    pub elements: Vec<String>,
    pub coords: Vec<f64>,
}

impl MoleculeGeometry {
    pub fn new(elements: Vec<String>, coords: Vec<f64>) -> Result<Self> {
        let g = Self { elements, coords };
        g.validate()?;
        Ok(g)
    }

    pub fn num_atoms(&self) -> usize {
        self.elements.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.elements.len();
        if n < 2 {
            bail!(Argument, "a molecule needs at least 2 atoms, got {n}");
        }
        if self.coords.len() != 3 * n {
            bail!(Argument, "{n} atoms need {} coordinates, got {}", 3 * n, self.coords.len());
        }
        if self.coords.iter().any(|c| !c.is_finite()) {
            bail!(Argument, "non-finite coordinate");
        }
        for i in 0..n {
            for j in i + 1..n {
                if norm3(sub3(atom(&self.coords, i), atom(&self.coords, j))) <= MIN_SEPARATION {
                    bail!(DegenerateGeometry, "atoms {i} and {j} coincide");
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn atom(coords: &[f64], i: usize) -> [f64; 3] {
    [coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]]
}

fn add_atom_grad(grad: &mut [f64], i: usize, g: [f64; 3]) {
    grad[3 * i] += g[0];
    grad[3 * i + 1] += g[1];
    grad[3 * i + 2] += g[2];
}

fn check_atoms(coords: &[f64], idx: &[usize]) -> Result<()> {
    if !coords.len().is_multiple_of(3) {
        bail!(Argument, "coordinate length {} is not a multiple of 3", coords.len());
    }
    let n = coords.len() / 3;
    for (a, &i) in idx.iter().enumerate() {
        if i >= n {
            bail!(Argument, "atom index {i} out of range for {n} atoms");
        }
        if idx[..a].contains(&i) {
            bail!(Argument, "atom index {i} repeated in {idx:?}");
        }
    }
    Ok(())
}

/// An internal coordinate value with its Cartesian gradient (length `3n`).
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateValue {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Set when the geometry is at a singular point of the coordinate
    /// (collinear bond-angle arms); the gradient is then zero.
    pub near_singular: bool,
}

/// Distance `|r_i - r_j|`.
pub fn bond_length(coords: &[f64], i: usize, j: usize) -> Result<CoordinateValue> {
    check_atoms(coords, &[i, j])?;
    let d = sub3(atom(coords, i), atom(coords, j));
    let r = norm3(d);
    if r <= MIN_SEPARATION {
        bail!(DegenerateGeometry, "atoms {i} and {j} coincide");
    }
    let u = scale3(d, 1.0 / r);
    let mut gradient = vec![0.0; coords.len()];
    add_atom_grad(&mut gradient, i, u);
    add_atom_grad(&mut gradient, j, scale3(u, -1.0));
    Ok(CoordinateValue { value: r, gradient, near_singular: false })
}

/// Angle at vertex `j` between arms `j->i` and `j->k`, in `[0, pi]`.
pub fn bond_angle(coords: &[f64], i: usize, j: usize, k: usize) -> Result<CoordinateValue> {
    check_atoms(coords, &[i, j, k])?;
    let u = sub3(atom(coords, i), atom(coords, j));
    let v = sub3(atom(coords, k), atom(coords, j));
    let (lu, lv) = (norm3(u), norm3(v));
    if lu <= MIN_SEPARATION || lv <= MIN_SEPARATION {
        bail!(DegenerateGeometry, "bond angle ({i},{j},{k}) has a zero-length arm");
    }
    let (uh, vh) = (scale3(u, 1.0 / lu), scale3(v, 1.0 / lv));
    let cos = dot3(uh, vh).clamp(-1.0, 1.0);
    let sin = norm3(cross(uh, vh));
    let value = sin.atan2(cos);
    let mut gradient = vec![0.0; coords.len()];
    let near_singular = cos.abs() >= 1.0 - 1e-10 || sin < 1e-10;
    if !near_singular {
        // component of the other arm perpendicular to this one, normalized
        let pu = scale3(sub3(vh, scale3(uh, cos)), 1.0 / sin);
        let pv = scale3(sub3(uh, scale3(vh, cos)), 1.0 / sin);
        let gi = scale3(pu, -1.0 / lu);
        let gk = scale3(pv, -1.0 / lv);
        add_atom_grad(&mut gradient, i, gi);
        add_atom_grad(&mut gradient, k, gk);
        add_atom_grad(&mut gradient, j, scale3([gi[0] + gk[0], gi[1] + gk[1], gi[2] + gk[2]], -1.0));
    }
    Ok(CoordinateValue { value, gradient, near_singular })
}

/// Signed dihedral of atoms `(i, j, k, l)` in `(-pi, pi]`.
///
/// With `r_ab = r_a - r_b`, `m = r_ij x r_kj` and `n = r_kj x r_kl`:
/// `d = sign(chi) * arccos(m.n / |m||n|)`, `chi = r_kj . (m x n)`, and
/// `sign(0) = +1` so planar trans geometries give `+pi`. The gradient uses
/// the singularity-free normal-vector form.
pub fn dihedral(coords: &[f64], i: usize, j: usize, k: usize, l: usize) -> Result<CoordinateValue> {
    check_atoms(coords, &[i, j, k, l])?;
    let (ri, rj, rk, rl) = (atom(coords, i), atom(coords, j), atom(coords, k), atom(coords, l));
    let r_ij = sub3(ri, rj);
    let r_kj = sub3(rk, rj);
    let r_kl = sub3(rk, rl);
    let m = cross(r_ij, r_kj);
    let n = cross(r_kj, r_kl);
    let (lm, ln) = (norm3(m), norm3(n));
    if lm <= 1e-10 || ln <= 1e-10 {
        bail!(DegenerateGeometry, "dihedral ({i},{j},{k},{l}) has a collinear triple");
    }
    // atan2 keeps full precision near 0 and pi, where acos of the cosine does not.
    let sin = dot3(r_kj, cross(m, n)) / norm3(r_kj);
    let sin = if sin == 0.0 { 0.0 } else { sin };
    let value = sin.atan2(dot3(m, n));

    // F = r_i - r_j, G = r_j - r_k, H = r_l - r_k; A = F x G, B = H x G.
    let f = r_ij;
    let g = scale3(r_kj, -1.0);
    let h = scale3(r_kl, -1.0);
    let a = cross(f, g);
    let b = cross(h, g);
    let (a2, b2) = (dot3(a, a), dot3(b, b));
    let lg = norm3(g);
    let fg = dot3(f, g) / (a2 * lg);
    let hg = dot3(h, g) / (b2 * lg);
    let gi = scale3(a, -lg / a2);
    let gl = scale3(b, lg / b2);
    let gj = [
        a[0] * (lg / a2 + fg) - b[0] * hg,
        a[1] * (lg / a2 + fg) - b[1] * hg,
        a[2] * (lg / a2 + fg) - b[2] * hg,
    ];
    let gk = [
        b[0] * (hg - lg / b2) - a[0] * fg,
        b[1] * (hg - lg / b2) - a[1] * fg,
        b[2] * (hg - lg / b2) - a[2] * fg,
    ];
    let mut gradient = vec![0.0; coords.len()];
    add_atom_grad(&mut gradient, i, gi);
    add_atom_grad(&mut gradient, j, gj);
    add_atom_grad(&mut gradient, k, gk);
    add_atom_grad(&mut gradient, l, gl);
    Ok(CoordinateValue { value, gradient, near_singular: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InternalCoord {
    Bond(usize, usize),
    /// Vertex is the middle index.
    Angle(usize, usize, usize),
    Dihedral(usize, usize, usize, usize),
}

impl InternalCoord {
    pub fn atoms(&self) -> Vec<usize> {
        match *self {
            InternalCoord::Bond(i, j) => vec![i, j],
            InternalCoord::Angle(i, j, k) => vec![i, j, k],
            InternalCoord::Dihedral(i, j, k, l) => vec![i, j, k, l],
        }
    }

    pub fn evaluate(&self, coords: &[f64]) -> Result<CoordinateValue> {
        match *self {
            InternalCoord::Bond(i, j) => bond_length(coords, i, j),
            InternalCoord::Angle(i, j, k) => bond_angle(coords, i, j, k),
            InternalCoord::Dihedral(i, j, k, l) => dihedral(coords, i, j, k, l),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            InternalCoord::Bond(..) => "bond",
            InternalCoord::Angle(..) => "angle",
            InternalCoord::Dihedral(..) => "dihedral",
        }
    }
}

impl fmt::Display for InternalCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind())?;
        for a in self.atoms() {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

impl FromStr for InternalCoord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let kind = parts.next().unwrap_or("");
        let idx = parts
            .map(|p| p.parse::<usize>().map_err(|_| Error::Argument(alloc::format!("bad atom index `{p}`"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(match (kind, idx.as_slice()) {
            ("bond", &[i, j]) => InternalCoord::Bond(i, j),
            ("angle", &[i, j, k]) => InternalCoord::Angle(i, j, k),
            ("dihedral", &[i, j, k, l]) => InternalCoord::Dihedral(i, j, k, l),
            _ => bail!(Argument, "cannot parse internal coordinate `{s}`"),
        })
    }
}

/// Affine map sending `[min, max]` onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMaxScaler {
    pub min: f64,
    pub max: f64,
}

impl MinMaxScaler {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || max <= min {
            bail!(DegenerateScaler, "need min < max, got [{min}, {max}]");
        }
        Ok(Self { min, max })
    }

    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            bail!(DegenerateScaler, "cannot fit a scaler on an empty column");
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(min, max)
    }

    pub fn apply(&self, x: f64) -> f64 {
        if x == self.min {
            -1.0
        } else if x == self.max {
            1.0
        } else {
            2.0 * (x - self.min) / (self.max - self.min) - 1.0
        }
    }

    pub fn derivative(&self) -> f64 {
        2.0 / (self.max - self.min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    /// `pi * s`
    PiScale,
    Arcsin,
    Arccos,
    Identity,
}

impl Nonlinearity {
    /// Value, derivative, and whether the input fell outside the safe
    /// `[-1 + ARC_MARGIN, 1 - ARC_MARGIN]` band of `arcsin`/`arccos`.
    ///
    /// Values use the input clamped to `[-1, 1]`. Derivatives use the input
    /// clamped to the safe band and vanish beyond `+-1`.
    pub fn apply(&self, s: f64) -> (f64, f64, bool) {
        match self {
            Nonlinearity::PiScale => (PI * s, PI, false),
            Nonlinearity::Identity => (s, 1.0, false),
            Nonlinearity::Arcsin | Nonlinearity::Arccos => {
                let flagged = s.abs() > 1.0 - ARC_MARGIN;
                let sv = s.clamp(-1.0, 1.0);
                let sd = s.clamp(-1.0 + ARC_MARGIN, 1.0 - ARC_MARGIN);
                let slope = if s.abs() > 1.0 { 0.0 } else { 1.0 / (1.0 - sd * sd).sqrt() };
                match self {
                    Nonlinearity::Arcsin => (sv.asin(), slope, flagged),
                    _ => (sv.acos(), -slope, flagged),
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::PiScale => "pi_scale",
            Nonlinearity::Arcsin => "arcsin",
            Nonlinearity::Arccos => "arccos",
            Nonlinearity::Identity => "identity",
        }
    }
}

impl FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pi_scale" => Nonlinearity::PiScale,
            "arcsin" => Nonlinearity::Arcsin,
            "arccos" => Nonlinearity::Arccos,
            "identity" => Nonlinearity::Identity,
            other => bail!(Argument, "unknown nonlinearity `{other}`"),
        })
    }
}

/// One output feature: a nonlinearity applied to one scaled coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureDef {
    pub coord: usize,
    pub map: Nonlinearity,
}

/// Features and optional Jacobian for one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub features: Vec<f64>,
    /// `dy/dC`, shape `N x 3n`.
    pub jacobian: Option<Matrix>,
    /// Features whose scaled input fell outside the safe arcsin/arccos band.
    pub clamped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorPipeline {
    coords: Vec<InternalCoord>,
    scalers: Vec<MinMaxScaler>,
    features: Vec<FeatureDef>,
}

impl DescriptorPipeline {
    pub fn new(coords: Vec<InternalCoord>, scalers: Vec<MinMaxScaler>, features: Vec<FeatureDef>) -> Result<Self> {
        if coords.is_empty() || features.is_empty() {
            bail!(Argument, "pipeline needs at least one coordinate and one feature");
        }
        if coords.len() != scalers.len() {
            bail!(Argument, "{} coordinates but {} scalers", coords.len(), scalers.len());
        }
        if let Some(f) = features.iter().find(|f| f.coord >= coords.len()) {
            bail!(Argument, "feature references coordinate {}", f.coord);
        }
        for c in &coords {
            let atoms = c.atoms();
            for (a, i) in atoms.iter().enumerate() {
                if atoms[..a].contains(i) {
                    bail!(Argument, "coordinate `{c}` repeats atom {i}");
                }
            }
        }
        Ok(Self { coords, scalers, features })
    }

    /// Fits the per-coordinate scalers on a set of training geometries.
    pub fn fit<'a>(
        coords: Vec<InternalCoord>,
        features: Vec<FeatureDef>,
        geometries: impl IntoIterator<Item = &'a [f64]>,
    ) -> Result<Self> {
        let mut columns = vec![Vec::new(); coords.len()];
        for g in geometries {
            for (c, col) in coords.iter().zip(columns.iter_mut()) {
                col.push(c.evaluate(g)?.value);
            }
        }
        let scalers = columns.iter().map(|c| MinMaxScaler::fit(c)).collect::<Result<Vec<_>>>()?;
        Self::new(coords, scalers, features)
    }

    pub fn coords(&self) -> &[InternalCoord] {
        &self.coords
    }

    pub fn scalers(&self) -> &[MinMaxScaler] {
        &self.scalers
    }

    pub fn feature_defs(&self) -> &[FeatureDef] {
        &self.features
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    /// Smallest atom count the coordinate set can address.
    pub fn min_atoms(&self) -> usize {
        self.coords.iter().flat_map(|c| c.atoms()).max().map_or(0, |m| m + 1)
    }

    pub fn internal_values(&self, cartesian: &[f64]) -> Result<Vec<f64>> {
        self.coords.iter().map(|c| Ok(c.evaluate(cartesian)?.value)).collect()
    }

    pub fn transform(&self, cartesian: &[f64], with_jacobian: bool) -> Result<PipelineOutput> {
        if cartesian.len() < 3 * self.min_atoms() {
            bail!(Argument, "geometry has {} coordinates, pipeline needs {} atoms", cartesian.len(), self.min_atoms());
        }
        let values = self.coords.iter().map(|c| c.evaluate(cartesian)).collect::<Result<Vec<_>>>()?;
        let mut features = Vec::with_capacity(self.features.len());
        let mut jacobian = with_jacobian.then(|| Matrix::zeros(self.features.len(), cartesian.len()));
        let mut clamped = 0;
        for (fi, f) in self.features.iter().enumerate() {
            let scaler = &self.scalers[f.coord];
            let s = scaler.apply(values[f.coord].value);
            let (y, dy_ds, flagged) = f.map.apply(s);
            clamped += flagged as usize;
            features.push(y);
            if let Some(jac) = jacobian.as_mut() {
                let factor = dy_ds * scaler.derivative();
                for (out, g) in jac.row_mut(fi).iter_mut().zip(&values[f.coord].gradient) {
                    *out = factor * g;
                }
            }
        }
        Ok(PipelineOutput { features, jacobian, clamped })
    }

    pub fn apply(&self, cartesian: &[f64]) -> Result<Vec<f64>> {
        Ok(self.transform(cartesian, false)?.features)
    }

    pub fn jacobian(&self, cartesian: &[f64]) -> Result<Matrix> {
        Ok(self.transform(cartesian, true)?.jacobian.expect("requested"))
    }
}
