//! Datasets, analytic potential-energy oracles and the mirroring augmentation.
//!
//! Units throughout: Angstrom, eV, eV/Angstrom. Cartesian vectors are flat,
//! `[x0, y0, z0, x1, ...]`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these whenever std is linked
use num_traits::Float;
use core::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::descriptors::{bond_angle, bond_length, dihedral, CoordinateValue};
use crate::error::{bail, Result};
use crate::model::Potential;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub cartesian: Vec<f64>,
    pub energy: f64,
    pub forces: Option<Vec<f64>>,
}

impl Sample {
    pub fn new(cartesian: Vec<f64>, energy: f64, forces: Option<Vec<f64>>) -> Result<Self> {
        let s = Self { cartesian, energy, forces };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cartesian.is_empty() || !self.cartesian.len().is_multiple_of(3) {
            bail!(Data, "cartesian length {} is not a positive multiple of 3", self.cartesian.len());
        }
        if !self.energy.is_finite() || self.cartesian.iter().any(|x| !x.is_finite()) {
            bail!(Data, "non-finite coordinate or energy");
        }
        if let Some(f) = &self.forces {
            if f.len() != self.cartesian.len() {
                bail!(Data, "{} force components for {} coordinates", f.len(), self.cartesian.len());
            }
            if f.iter().any(|x| !x.is_finite()) {
                bail!(Data, "non-finite force");
            }
        }
        Ok(())
    }
}

/// A homogeneous, non-empty set of labeled geometries.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    elements: Vec<String>,
    samples: Vec<Sample>,
    pub preset: String,
    pub provenance: String,
}

impl Dataset {
    pub fn new(elements: Vec<String>, samples: Vec<Sample>, preset: &str, provenance: &str) -> Result<Self> {
        if samples.is_empty() {
            bail!(Data, "dataset has no samples");
        }
        if elements.is_empty() {
            bail!(Data, "dataset has no atoms");
        }
        for (i, s) in samples.iter().enumerate() {
            s.validate().map_err(|e| crate::Error::Data(alloc::format!("sample {i}: {e}")))?;
            if s.cartesian.len() != 3 * elements.len() {
                bail!(Data, "sample {i} has {} coordinates, expected {}", s.cartesian.len(), 3 * elements.len());
            }
        }
        Ok(Self { elements, samples, preset: preset.to_string(), provenance: provenance.to_string() })
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn num_atoms(&self) -> usize {
        self.elements.len()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// True when every sample carries forces.
    pub fn has_forces(&self) -> bool {
        self.samples.iter().all(|s| s.forces.is_some())
    }

    pub fn energies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.energy).collect()
    }

    pub fn geometries(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.iter().map(|s| s.cartesian.as_slice())
    }

    fn with_samples(&self, samples: Vec<Sample>) -> Self {
        Self { elements: self.elements.clone(), samples, preset: self.preset.clone(), provenance: self.provenance.clone() }
    }
}

/// Morse diatomic `V(r) = D_e (1 - exp(-a (r - r_e)))^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Morse {
    pub d_e: f64,
    pub a: f64,
    pub r_e: f64,
}

/// LiH ground-state curve fitted to a Morse form: spectroscopic `D_e`,
/// `r_e` and `a` from the harmonic frequency (1405.65 cm^-1).
pub const LIH_MORSE: Morse = Morse { d_e: 2.515, a: 1.128, r_e: 1.5957 };

impl Morse {
    /// Energy and radial force `-dV/dr`.
    pub fn energy_force(&self, r: f64) -> (f64, f64) {
        let e = (-self.a * (r - self.r_e)).exp();
        let v = self.d_e * (1.0 - e) * (1.0 - e);
        let dv = 2.0 * self.d_e * self.a * (1.0 - e) * e;
        (v, -dv)
    }

    /// Harmonic force constant at the minimum, eV/A^2.
    pub fn stiffness(&self) -> f64 {
        2.0 * self.d_e * self.a * self.a
    }
}

impl Potential for Morse {
    /// Uses the distance between the first two atoms.
    fn energy(&self, cartesian: &[f64]) -> Result<f64> {
        Ok(self.energy_and_forces(cartesian)?.0)
    }

    fn energy_and_forces(&self, cartesian: &[f64]) -> Result<(f64, Vec<f64>)> {
        let r = bond_length(cartesian, 0, 1)?;
        let (v, f) = self.energy_force(r.value);
        Ok((v, r.gradient.iter().map(|g| f * g).collect()))
    }
}

/// Harmonic bonds plus harmonic angle for atoms `(center, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicTriatomic {
    pub k_bond: f64,
    pub r0: f64,
    pub k_angle: f64,
    pub theta0: f64,
}

/// Water-like parameters, atoms ordered O, H, H.
pub const WATER: HarmonicTriatomic =
    HarmonicTriatomic { k_bond: 48.0, r0: 0.9572, k_angle: 3.5, theta0: 104.52 * PI / 180.0 };

impl Potential for HarmonicTriatomic {
    fn energy(&self, cartesian: &[f64]) -> Result<f64> {
        Ok(self.energy_and_forces(cartesian)?.0)
    }

    fn energy_and_forces(&self, cartesian: &[f64]) -> Result<(f64, Vec<f64>)> {
        if cartesian.len() != 9 {
            bail!(Argument, "triatomic oracle needs 3 atoms, got {} coordinates", cartesian.len());
        }
        let mut acc = Accumulator::new(cartesian.len());
        acc.harmonic(bond_length(cartesian, 0, 1)?, self.k_bond, self.r0);
        acc.harmonic(bond_length(cartesian, 0, 2)?, self.k_bond, self.r0);
        acc.harmonic(bond_angle(cartesian, 1, 0, 2)?, self.k_angle, self.theta0);
        Ok(acc.finish())
    }
}

/// Hydronium-like surrogate, atoms O, H1, H2, H3: harmonic O-H bonds and
/// H-O-H angles plus a symmetric double well
/// `h ((phi / phi0)^2 - 1)^2` in the dihedral `(O, H3, H2, H1)`, which is 0
/// for the planar geometry and `+-phi0` at the two pyramidal minima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroniumSurrogate {
    pub k_bond: f64,
    pub r0: f64,
    pub k_angle: f64,
    pub theta0: f64,
    pub barrier: f64,
    pub phi0: f64,
}

pub const HYDRONIUM: HydroniumSurrogate = HydroniumSurrogate {
    k_bond: 45.0,
    r0: 0.98,
    k_angle: 3.0,
    theta0: 112.0 * PI / 180.0,
    barrier: 0.1,
    phi0: 0.45,
};

impl Potential for HydroniumSurrogate {
    fn energy(&self, cartesian: &[f64]) -> Result<f64> {
        Ok(self.energy_and_forces(cartesian)?.0)
    }

    fn energy_and_forces(&self, cartesian: &[f64]) -> Result<(f64, Vec<f64>)> {
        if cartesian.len() != 12 {
            bail!(Argument, "hydronium surrogate needs 4 atoms, got {} coordinates", cartesian.len());
        }
        let mut acc = Accumulator::new(cartesian.len());
        for h in 1..=3 {
            acc.harmonic(bond_length(cartesian, 0, h)?, self.k_bond, self.r0);
        }
        for (a, b) in [(1, 2), (1, 3), (2, 3)] {
            acc.harmonic(bond_angle(cartesian, a, 0, b)?, self.k_angle, self.theta0);
        }
        let phi = dihedral(cartesian, 0, 3, 2, 1)?;
        let u = phi.value / self.phi0;
        let w = u * u - 1.0;
        let dv = self.barrier * 4.0 * w * u / self.phi0;
        acc.add(self.barrier * w * w, dv, &phi.gradient);
        Ok(acc.finish())
    }
}

/// Sums energy terms `V(q)` with their chain-ruled Cartesian forces.
struct Accumulator {
    energy: f64,
    forces: Vec<f64>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self { energy: 0.0, forces: vec![0.0; len] }
    }

    fn add(&mut self, v: f64, dv_dq: f64, dq_dc: &[f64]) {
        self.energy += v;
        for (f, g) in self.forces.iter_mut().zip(dq_dc) {
            *f -= dv_dq * g;
        }
    }

    fn harmonic(&mut self, q: CoordinateValue, k: f64, q0: f64) {
        let dq = q.value - q0;
        self.add(0.5 * k * dq * dq, k * dq, &q.gradient);
    }

    fn finish(self) -> (f64, Vec<f64>) {
        (self.energy, self.forces)
    }
}

/// Central-difference forces `F_c = -(E(c + h) - E(c - h)) / 2h`.
pub fn finite_difference_forces(
    mut energy: impl FnMut(&[f64]) -> Result<f64>,
    cartesian: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        bail!(Argument, "finite-difference step must be positive, got {h}");
    }
    let mut x = cartesian.to_vec();
    let mut forces = Vec::with_capacity(x.len());
    for c in 0..x.len() {
        let x0 = x[c];
        x[c] = x0 + h;
        let ep = energy(&x)?;
        x[c] = x0 - h;
        let em = energy(&x)?;
        x[c] = x0;
        forces.push(-(ep - em) / (2.0 * h));
    }
    Ok(forces)
}

/// Labels geometries with an oracle. Forces are analytic unless `fd_step` is given.
pub fn label_geometries(
    oracle: &dyn Potential,
    elements: Vec<String>,
    geometries: Vec<Vec<f64>>,
    fd_step: Option<f64>,
    preset: &str,
    provenance: &str,
) -> Result<Dataset> {
    let mut samples = Vec::with_capacity(geometries.len());
    for g in geometries {
        let (energy, analytic) = oracle.energy_and_forces(&g)?;
        let forces = match fd_step {
            Some(h) => finite_difference_forces(|x| oracle.energy(x), &g, h)?,
            None => analytic,
        };
        samples.push(Sample::new(g, energy, Some(forces))?);
    }
    Dataset::new(elements, samples, preset, provenance)
}

fn elements(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Diatomic geometry with the second atom on the +x axis.
pub fn diatomic_geometry(r: f64) -> Vec<f64> {
    vec![0.0, 0.0, 0.0, r, 0.0, 0.0]
}

/// `count` equally spaced bond lengths on `[r_min, r_max)`.
pub fn bond_grid(r_min: f64, r_max: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 || !(r_max > r_min) || !(r_min > 0.0) {
        bail!(Argument, "bad grid [{r_min}, {r_max}) with {count} points");
    }
    let step = (r_max - r_min) / count as f64;
    Ok((0..count).map(|i| r_min + step * i as f64).collect())
}

/// LiH Morse dataset on a bond grid, atoms Li then H.
pub fn lih_dataset(morse: &Morse, grid: &[f64]) -> Result<Dataset> {
    let geoms = grid.iter().map(|&r| diatomic_geometry(r)).collect();
    label_geometries(morse, elements(&["Li", "H"]), geoms, None, "lih", "morse oracle")
}

/// Uniformly random rotation matrix (random unit quaternion).
fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (w, x, y, z) =
        (a * (2.0 * PI * u2).sin(), a * (2.0 * PI * u2).cos(), b * (2.0 * PI * u3).sin(), b * (2.0 * PI * u3).cos());
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// Applies `x -> R x + t` to every atom.
pub fn rigid_transform(cartesian: &[f64], rotation: &[[f64; 3]; 3], translation: [f64; 3]) -> Vec<f64> {
    cartesian
        .chunks_exact(3)
        .flat_map(|p| {
            (0..3).map(move |r| rotation[r][0] * p[0] + rotation[r][1] * p[1] + rotation[r][2] * p[2] + translation[r])
        })
        .collect()
}

/// Random rigid motion drawn from `seed`.
pub fn random_rigid_motion(seed: u64) -> ([[f64; 3]; 3], [f64; 3]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = random_rotation(&mut rng);
    let t = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
    (r, t)
}

/// Water-like geometries: bonds within `r0 +- 0.15`, angle within `theta0 +- 15 deg`,
/// randomly oriented.
pub fn water_dataset(oracle: &HarmonicTriatomic, count: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut geoms = Vec::with_capacity(count);
    for _ in 0..count {
        let r1 = oracle.r0 + rng.gen_range(-0.15..0.15);
        let r2 = oracle.r0 + rng.gen_range(-0.15..0.15);
        let th = oracle.theta0 + rng.gen_range(-15.0..15.0) * PI / 180.0;
        let g = [0.0, 0.0, 0.0, r1, 0.0, 0.0, r2 * th.cos(), r2 * th.sin(), 0.0];
        let rot = random_rotation(&mut rng);
        geoms.push(rigid_transform(&g, &rot, [0.0; 3]));
    }
    label_geometries(oracle, elements(&["O", "H", "H"]), geoms, None, "h2o", "harmonic triatomic oracle")
}

/// Hydronium-like geometries sweeping the umbrella coordinate so that the
/// dihedral covers roughly `[-0.78, 0.78]` rad.
pub fn hydronium_dataset(oracle: &HydroniumSurrogate, count: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut geoms = Vec::with_capacity(count);
    for _ in 0..count {
        // elevation of the H atoms above the plane through O
        let lift: f64 = rng.gen_range(-0.42..0.42);
        let mut g = vec![0.0; 3];
        for k in 0..3 {
            let r = oracle.r0 + rng.gen_range(-0.1..0.1);
            let az: f64 = 2.0 * PI * k as f64 / 3.0 + rng.gen_range(-0.12..0.12);
            let el: f64 = lift + rng.gen_range(-0.05..0.05);
            g.extend_from_slice(&[r * el.cos() * az.cos(), r * el.cos() * az.sin(), r * el.sin()]);
        }
        let rot = random_rotation(&mut rng);
        geoms.push(rigid_transform(&g, &rot, [0.0; 3]));
    }
    label_geometries(oracle, elements(&["O", "H", "H", "H"]), geoms, None, "h3o", "hydronium surrogate oracle")
}

/// Bond length of a diatomic sample with its unit axis from atom 0 to atom 1.
fn bond_axis(cartesian: &[f64]) -> Result<(f64, [f64; 3])> {
    let r = bond_length(cartesian, 0, 1)?;
    let u = [r.gradient[3], r.gradient[4], r.gradient[5]];
    Ok((r.value, u))
}

/// Reflects a diatomic sample through the bond length `r_m`: the second atom
/// moves to distance `2 r_m - r` along the same axis, the energy is kept and
/// the bond-axis force component changes sign.
pub fn mirror_sample(sample: &Sample, r_m: f64) -> Result<Sample> {
    if sample.cartesian.len() != 6 {
        bail!(Argument, "mirroring needs a diatomic sample");
    }
    let (r, u) = bond_axis(&sample.cartesian)?;
    let r_new = 2.0 * r_m - r;
    if !(r_new > 0.0) {
        bail!(Argument, "mirror image of r={r} about {r_m} is not a valid bond length");
    }
    let mut cartesian = sample.cartesian.clone();
    for a in 0..3 {
        cartesian[3 + a] = cartesian[a] + r_new * u[a];
    }
    let forces = sample.forces.as_ref().map(|f| {
        let mut out = f.clone();
        for atom in 0..2 {
            let fa = &mut out[3 * atom..3 * atom + 3];
            let along = fa[0] * u[0] + fa[1] * u[1] + fa[2] * u[2];
            for a in 0..3 {
                fa[a] -= 2.0 * along * u[a];
            }
        }
        out
    });
    Sample::new(cartesian, sample.energy, forces)
}

/// Appends the mirror image of every sample with `r < r_m`. Samples at
/// `r_m` (within 1e-12) are their own image and are not duplicated.
pub fn mirror_augment(dataset: &Dataset, r_m: f64) -> Result<Dataset> {
    if dataset.num_atoms() != 2 {
        bail!(Argument, "mirroring needs a diatomic dataset, got {} atoms", dataset.num_atoms());
    }
    let mut samples = dataset.samples.clone();
    for s in &dataset.samples {
        let (r, _) = bond_axis(&s.cartesian)?;
        if r > r_m + 1e-12 {
            bail!(Argument, "sample at r={r} lies beyond the mirror point {r_m}");
        }
        if (r - r_m).abs() > 1e-12 {
            samples.push(mirror_sample(s, r_m)?);
        }
    }
    let mut out = dataset.with_samples(samples);
    out.provenance = alloc::format!("{}; mirrored about {r_m}", dataset.provenance);
    Ok(out)
}

/// Seeded disjoint split into `n_train` training and the remaining test samples.
pub fn train_test_split(dataset: &Dataset, n_train: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if n_train == 0 || n_train >= dataset.len() {
        bail!(Argument, "cannot take {n_train} training samples from {}", dataset.len());
    }
    let mut idx: Vec<usize> = (0..dataset.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (tr, te) = idx.split_at(n_train);
    let pick = |ids: &[usize]| {
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        dataset.with_samples(ids.into_iter().map(|i| dataset.samples[i].clone()).collect())
    };
    Ok((pick(tr), pick(te)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn morse_minimum_and_limit() {
        let (v, f) = LIH_MORSE.energy_force(LIH_MORSE.r_e);
        assert_eq!((v, f), (0.0, 0.0));
        let (v, _) = LIH_MORSE.energy_force(100.0);
        assert!((v - LIH_MORSE.d_e).abs() < 1e-12);
    }

    #[test]
    fn morse_force_matches_fd() {
        let v = |r: f64| LIH_MORSE.energy_force(r).0;
        for r in [0.9, 1.3, 2.0, 3.7] {
            let h = 1e-3;
            // five-point stencil, O(h^4)
            let fd = -(8.0 * (v(r + h) - v(r - h)) - (v(r + 2.0 * h) - v(r - 2.0 * h))) / (12.0 * h);
            assert!((fd - LIH_MORSE.energy_force(r).1).abs() < 1e-9, "r={r}");
        }
    }

    #[test]
    fn fd_forces_converge_quadratically() {
        let g = diatomic_geometry(1.2);
        let exact = LIH_MORSE.energy_and_forces(&g).unwrap().1;
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&h| max_diff(&finite_difference_forces(|x| LIH_MORSE.energy(x), &g, h).unwrap(), &exact))
            .collect();
        assert!(errs[1] < errs[0] / 50.0 && errs[2] < errs[1] / 50.0, "{errs:?}");
    }

    #[test]
    fn fd_exact_for_quadratic() {
        let e = |x: &[f64]| Ok(x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * v * v).sum());
        let x = [0.3, -1.2, 2.0];
        let f = finite_difference_forces(e, &x, 1e-3).unwrap();
        let exact = [-0.6, 4.8, -12.0];
        assert!(max_diff(&f, &exact) < 1e-9);
    }

    #[test]
    fn oracle_forces_match_fd() {
        let water = water_dataset(&WATER, 5, 3).unwrap();
        for s in water.samples() {
            let fd = finite_difference_forces(|x| WATER.energy(x), &s.cartesian, 1e-5).unwrap();
            assert!(max_diff(&fd, s.forces.as_ref().unwrap()) < 1e-8);
        }
        let h3o = hydronium_dataset(&HYDRONIUM, 5, 3).unwrap();
        for s in h3o.samples() {
            let fd = finite_difference_forces(|x| HYDRONIUM.energy(x), &s.cartesian, 1e-5).unwrap();
            assert!(max_diff(&fd, s.forces.as_ref().unwrap()) < 1e-7);
        }
    }

    #[test]
    fn triatomic_equilibrium_and_invariance() {
        let th = WATER.theta0;
        let g = [0.0, 0.0, 0.0, WATER.r0, 0.0, 0.0, WATER.r0 * th.cos(), WATER.r0 * th.sin(), 0.0];
        let (e, f) = WATER.energy_and_forces(&g).unwrap();
        assert!(e.abs() < 1e-20 && f.iter().all(|x| x.abs() < 1e-12));
        let distorted = [0.0, 0.0, 0.0, 1.0, 0.1, 0.0, -0.3, 0.9, 0.2];
        let (r, t) = random_rigid_motion(11);
        let moved = rigid_transform(&distorted, &r, t);
        assert!((WATER.energy(&distorted).unwrap() - WATER.energy(&moved).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn symmetric_geometry_gives_symmetric_forces() {
        // H atoms reflected through the xz plane
        let c = (52.0f64).to_radians();
        let sym = [0.0, 0.0, 0.0, c.cos(), c.sin(), 0.0, c.cos(), -c.sin(), 0.0];
        let f = finite_difference_forces(|x| WATER.energy(x), &sym, 1e-4).unwrap();
        assert!((f[3] - f[6]).abs() < 1e-9 && (f[4] + f[7]).abs() < 1e-9);
    }

    #[test]
    fn dihedral_sweep_covers_paper_range() {
        let d = hydronium_dataset(&HYDRONIUM, 200, 1).unwrap();
        let phis: Vec<f64> = d.geometries().map(|g| dihedral(g, 0, 3, 2, 1).unwrap().value).collect();
        let lo = phis.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = phis.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo < -0.6 && hi > 0.6 && lo > -1.0 && hi < 1.0, "{lo} {hi}");
    }

    #[test]
    fn mirror_extends_grid_and_is_involution() {
        let grid = bond_grid(0.9, 4.5, 10).unwrap();
        let mut full = grid.clone();
        full.push(4.5);
        let d = lih_dataset(&LIH_MORSE, &full).unwrap();
        let m = mirror_augment(&d, 4.5).unwrap();
        assert_eq!(m.len(), 2 * d.len() - 1);
        let rmax = m.geometries().map(|g| bond_length(g, 0, 1).unwrap().value).fold(0.0, f64::max);
        assert!((rmax - 8.1).abs() < 1e-12);
        let at_mirror = &d.samples()[10];
        assert_eq!(mirror_sample(at_mirror, 4.5).unwrap().forces.unwrap()[3], -at_mirror.forces.as_ref().unwrap()[3]);
        for s in d.samples() {
            let back = mirror_sample(&mirror_sample(s, 4.5).unwrap(), 4.5).unwrap();
            assert!(max_diff(&back.cartesian, &s.cartesian) < 1e-12);
            assert!(max_diff(back.forces.as_ref().unwrap(), s.forces.as_ref().unwrap()) < 1e-12);
        }
        assert!(mirror_augment(&m, 4.5).is_err());
    }

    #[test]
    fn split_is_disjoint_and_seeded() {
        let d = lih_dataset(&LIH_MORSE, &bond_grid(0.9, 4.5, 85).unwrap()).unwrap();
        let m = mirror_augment(&d, 4.5).unwrap();
        assert_eq!(m.len(), 170);
        let (tr, te) = train_test_split(&m, 50, 7).unwrap();
        assert_eq!((tr.len(), te.len()), (50, 120));
        for s in tr.samples() {
            assert!(!te.samples().contains(s));
        }
        assert_eq!(train_test_split(&m, 50, 7).unwrap().0, tr);
        assert_ne!(train_test_split(&m, 50, 8).unwrap().0, tr);
        assert!(train_test_split(&m, 171, 7).is_err());
    }

    #[test]
    fn dataset_rejects_inhomogeneous_samples() {
        let a = Sample::new(diatomic_geometry(1.0), 0.0, None).unwrap();
        let b = Sample::new(vec![0.0; 9], 0.0, None).unwrap();
        assert!(Dataset::new(elements(&["Li", "H"]), vec![a, b], "lih", "").is_err());
        assert!(Sample::new(vec![0.0; 6], 0.0, Some(vec![0.0; 3])).is_err());
    }
}
