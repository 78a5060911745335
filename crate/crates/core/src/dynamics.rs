//! Velocity Verlet dynamics and frequency analysis.
//!
//! Units: positions in A, energies in eV, masses in amu, time in fs. Then
//! `a = F / m * EV_PER_AMU_A2_FS2` in A/fs^2.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent f64 methods shadow these whenever std is linked
use num_traits::Float;

use crate::circuit::QnnTemplate;
use crate::data::diatomic_geometry;
use crate::error::{bail, Result};
use crate::fft::dft_real;
use crate::gradients::QnnEvaluator;
use crate::model::Potential;

/// `1 eV / (amu A^2)` expressed in `fs^-2`.
pub const EV_PER_AMU_A2_FS2: f64 = 1.0 / 103.642_691_9;
/// One atomic unit of time in fs.
pub const AU_TIME_FS: f64 = 0.024_188_843_265_857;

/// Standard atomic weights (amu) for the elements used by the presets.
pub fn atomic_mass(element: &str) -> Option<f64> {
    Some(match element {
        "H" => 1.008,
        "Li" => 6.94,
        "O" => 15.999,
        "C" => 12.011,
        "N" => 14.007,
        _ => return None,
    })
}

pub fn reduced_mass(m1: f64, m2: f64) -> f64 {
    m1 * m2 / (m1 + m2)
}

/// Initial state and integration settings.
///
/// `positions.len()` must be a multiple of `masses.len()`; the quotient is the
/// number of coordinates per particle (3 for Cartesian, 1 for a bond coordinate).
#[derive(Debug, Clone, PartialEq)]
pub struct MdConfig {
    pub dt_fs: f64,
    pub steps: usize,
    pub masses: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl MdConfig {
    pub fn validate(&self) -> Result<usize> {
        if !(self.dt_fs > 0.0) || !self.dt_fs.is_finite() {
            bail!(Argument, "time step must be positive, got {}", self.dt_fs);
        }
        if self.masses.is_empty() || self.masses.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            bail!(Argument, "masses must be positive, got {:?}", self.masses);
        }
        if self.positions.is_empty() || !self.positions.len().is_multiple_of(self.masses.len()) {
            bail!(Argument, "{} coordinates do not split over {} particles", self.positions.len(), self.masses.len());
        }
        if self.velocities.len() != self.positions.len() {
            bail!(Argument, "{} velocities for {} coordinates", self.velocities.len(), self.positions.len());
        }
        if self.positions.iter().chain(&self.velocities).any(|x| !x.is_finite()) {
            bail!(Argument, "initial state is not finite");
        }
        Ok(self.positions.len() / self.masses.len())
    }
}

/// One row per time point, `steps + 1` rows including the initial state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub dt_fs: f64,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub potential: Vec<f64>,
    pub kinetic: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn total_energy(&self) -> Vec<f64> {
        self.potential.iter().zip(&self.kinetic).map(|(p, k)| p + k).collect()
    }

    /// Largest `|E(t) - E(0)| / |E(0)|`.
    pub fn max_relative_drift(&self) -> f64 {
        let e = self.total_energy();
        let e0 = e.first().copied().unwrap_or(0.0);
        e.iter().map(|x| (x - e0).abs() / e0.abs()).fold(0.0, f64::max)
    }

    /// Distance between two particles over time (Cartesian trajectories).
    pub fn distance(&self, i: usize, j: usize) -> Vec<f64> {
        self.positions
            .iter()
            .map(|x| (0..3).map(|c| (x[3 * i + c] - x[3 * j + c]).powi(2)).sum::<f64>().sqrt())
            .collect()
    }

    /// One coordinate over time.
    pub fn coordinate(&self, index: usize) -> Vec<f64> {
        self.positions.iter().map(|x| x[index]).collect()
    }
}

fn kinetic(masses: &[f64], dim: usize, v: &[f64]) -> f64 {
    v.chunks(dim).zip(masses).map(|(vi, m)| 0.5 * m * vi.iter().map(|x| x * x).sum::<f64>()).sum::<f64>()
        / EV_PER_AMU_A2_FS2
}

type ForceResult = Result<(f64, Vec<f64>)>;

/// Integrates with velocity Verlet. `forces` maps positions to `(energy, forces)`.
pub fn velocity_verlet(
    mut forces: impl FnMut(&[f64]) -> ForceResult,
    config: &MdConfig,
) -> Result<Trajectory> {
    let dim = config.validate()?;
    let dt = config.dt_fs;
    let accel = |f: &[f64]| -> Vec<f64> {
        f.iter().enumerate().map(|(k, fk)| fk / config.masses[k / dim] * EV_PER_AMU_A2_FS2).collect()
    };
    let mut x = config.positions.clone();
    let mut v = config.velocities.clone();
    let eval = |forces: &mut dyn FnMut(&[f64]) -> ForceResult, x: &[f64], step: usize| {
        let (e, f) = forces(x).map_err(|err| err.context(format!("force evaluation at step {step}")))?;
        if f.len() != x.len() {
            bail!(Argument, "force provider returned {} components for {} coordinates", f.len(), x.len());
        }
        if !e.is_finite() || f.iter().any(|c| !c.is_finite()) {
            bail!(Numerical, "non-finite energy or force at step {step}");
        }
        Ok((e, f))
    };
    let (mut e, f) = eval(&mut forces, &x, 0)?;
    let mut a = accel(&f);
    let mut traj = Trajectory { dt_fs: dt, ..Default::default() };
    let capacity = config.steps + 1;
    traj.times.reserve(capacity);
    traj.positions.reserve(capacity);
    for step in 0..=config.steps {
        traj.times.push(step as f64 * dt);
        traj.positions.push(x.clone());
        traj.velocities.push(v.clone());
        traj.potential.push(e);
        traj.kinetic.push(kinetic(&config.masses, dim, &v));
        if step == config.steps {
            break;
        }
        for k in 0..x.len() {
            x[k] += v[k] * dt + 0.5 * a[k] * dt * dt;
        }
        let (e_new, f_new) = eval(&mut forces, &x, step + 1)?;
        let a_new = accel(&f_new);
        for k in 0..v.len() {
            v[k] += 0.5 * (a[k] + a_new[k]) * dt;
        }
        e = e_new;
        a = a_new;
    }
    Ok(traj)
}

/// One-dimensional bond-coordinate view of a diatomic potential:
/// `(V(r), -dV/dr)` with the molecule laid along the x axis.
pub fn bond_force<P: Potential + ?Sized>(potential: &P) -> impl Fn(&[f64]) -> Result<(f64, Vec<f64>)> + '_ {
    move |x: &[f64]| {
        if x.len() != 1 {
            bail!(Argument, "bond coordinate is one-dimensional, got {} values", x.len());
        }
        let (e, f) = potential.energy_and_forces(&diatomic_geometry(x[0]))?;
        // Second atom sits at (r, 0, 0); its x force is -dV/dr.
        Ok((e, vec![f[3]]))
    }
}

/// Reduced-mass bond dynamics for a diatomic started from rest or with a bond velocity.
pub fn diatomic_config(m1: f64, m2: f64, r0: f64, v0: f64, dt_fs: f64, steps: usize) -> MdConfig {
    MdConfig { dt_fs, steps, masses: vec![reduced_mass(m1, m2)], positions: vec![r0], velocities: vec![v0] }
}

/// Symmetric Hamming window `0.54 - 0.46 cos(2 pi k / (n - 1))`.
pub fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n).map(|k| 0.54 - 0.46 * (2.0 * PI * k as f64 / (n - 1) as f64).cos()).collect()
}

/// Magnitudes at non-negative frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Cycles per fs.
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    /// Strongest non-DC peak, refined by a parabola through the neighbouring bins.
    pub fn dominant_frequency(&self) -> Result<f64> {
        let m = &self.magnitudes;
        if m.len() < 3 {
            bail!(Argument, "spectrum too short for peak search ({} bins)", m.len());
        }
        let k = (1..m.len()).max_by(|&a, &b| m[a].total_cmp(&m[b])).expect("non-empty range");
        let mut offset = 0.0;
        if k + 1 < m.len() {
            let (a, b, c) = (m[k - 1], m[k], m[k + 1]);
            let denom = a - 2.0 * b + c;
            if denom != 0.0 {
                offset = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
            }
        }
        Ok((k as f64 + offset) * self.bin_width())
    }
}

/// Mean-removed series tiled `repetitions` times, Hamming-windowed and transformed.
pub fn oscillation_spectrum(series: &[f64], dt_fs: f64, repetitions: usize) -> Result<Spectrum> {
    if series.is_empty() {
        bail!(Argument, "empty time series");
    }
    if repetitions == 0 || !(dt_fs > 0.0) {
        bail!(Argument, "need positive repetitions and time step");
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let n = series.len() * repetitions;
    let window = hamming(n);
    let signal: Vec<f64> = (0..n).map(|i| (series[i % series.len()] - mean) * window[i]).collect();
    let coeffs = dft_real(&signal);
    let half = n / 2 + 1;
    let df = 1.0 / (n as f64 * dt_fs);
    Ok(Spectrum {
        frequencies: (0..half).map(|k| k as f64 * df).collect(),
        magnitudes: coeffs[..half].iter().map(|c| c.norm()).collect(),
    })
}

/// `|c_n|` for `n = 0..=grid/2` of the circuit output swept over one `2 pi`
/// period of feature `feature`, other features fixed at `base`.
pub fn qnn_model_spectrum(
    template: &QnnTemplate,
    theta: &[f64],
    base: &[f64],
    feature: usize,
    grid: usize,
) -> Result<Vec<f64>> {
    if feature >= template.num_features() || base.len() != template.num_features() {
        bail!(Argument, "feature {feature} or base of length {} invalid for {} features", base.len(), template.num_features());
    }
    if grid < 2 {
        bail!(Argument, "grid needs at least 2 points");
    }
    let mut eval = QnnEvaluator::new(template);
    let mut y = base.to_vec();
    let mut values = Vec::with_capacity(grid);
    for k in 0..grid {
        y[feature] = 2.0 * PI * k as f64 / grid as f64;
        values.push(eval.value(&y, theta)?);
    }
    let coeffs = dft_real(&values);
    Ok(coeffs[..grid / 2 + 1].iter().map(|c| c.norm() / grid as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{assemble_qnn, CouplingSpec, Entanglement};
    use crate::data::{Morse, LIH_MORSE};
    use proptest::prelude::*;

    fn harmonic(k: f64) -> impl Fn(&[f64]) -> Result<(f64, Vec<f64>)> {
        move |x: &[f64]| Ok((0.5 * k * x[0] * x[0], vec![-k * x[0]]))
    }

    fn period(k: f64, m: f64) -> f64 {
        2.0 * PI * (m / (k * EV_PER_AMU_A2_FS2)).sqrt()
    }

    #[test]
    fn equilibrium_is_stationary() {
        let m = LIH_MORSE;
        let cfg = diatomic_config(6.94, 1.008, m.r_e, 0.0, 0.1, 1000);
        let t = velocity_verlet(bond_force(&m), &cfg).unwrap();
        assert!(t.coordinate(0).iter().all(|r| (r - m.r_e).abs() < 1e-10));
    }

    #[test]
    fn harmonic_period() {
        let (k, m) = (5.0, 2.0);
        let p = period(k, m);
        let dt = p / 1000.0;
        let cfg = MdConfig { dt_fs: dt, steps: 3000, masses: vec![m], positions: vec![0.1], velocities: vec![0.0] };
        let t = velocity_verlet(harmonic(k), &cfg).unwrap();
        // Upward zero crossings of x(t).
        let x = t.coordinate(0);
        let crossings: Vec<f64> = (1..x.len())
            .filter(|&i| x[i - 1] < 0.0 && x[i] >= 0.0)
            .map(|i| t.times[i - 1] + dt * x[i - 1] / (x[i - 1] - x[i]))
            .collect();
        let measured = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
        assert!((measured - p).abs() / p < 1e-3, "{measured} vs {p}");
    }

    #[test]
    fn morse_energy_conservation_and_bounded_motion() {
        let m = LIH_MORSE;
        let cfg = diatomic_config(6.94, 1.008, 1.05, 0.0, 0.02, 10_000);
        let t = velocity_verlet(bond_force(&m), &cfg).unwrap();
        assert!(t.max_relative_drift() < 1e-4, "{}", t.max_relative_drift());
        let r = t.coordinate(0);
        let (lo, hi) = r.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(lo > 1.0 && hi < 4.0 && lo < m.r_e && hi > m.r_e);
    }

    #[test]
    fn time_reversal() {
        let m = Morse { d_e: 2.0, a: 1.2, r_e: 1.6 };
        let cfg = diatomic_config(6.94, 1.008, 1.3, 0.0, 0.05, 2000);
        let fwd = velocity_verlet(bond_force(&m), &cfg).unwrap();
        let back_cfg = MdConfig {
            positions: fwd.positions.last().unwrap().clone(),
            velocities: fwd.velocities.last().unwrap().iter().map(|v| -v).collect(),
            ..cfg.clone()
        };
        let back = velocity_verlet(bond_force(&m), &back_cfg).unwrap();
        assert!((back.positions.last().unwrap()[0] - 1.3).abs() < 1e-8);
        assert!(back.velocities.last().unwrap()[0].abs() < 1e-8);
    }

    #[test]
    fn cartesian_and_reduced_mass_agree() {
        let m = LIH_MORSE;
        let (m1, m2) = (6.94, 1.008);
        let cart = MdConfig {
            dt_fs: 0.05,
            steps: 400,
            masses: vec![m1, m2],
            positions: diatomic_geometry(1.3),
            velocities: vec![0.0; 6],
        };
        let t3 = velocity_verlet(|x: &[f64]| m.energy_and_forces(x), &cart).unwrap();
        let t1 = velocity_verlet(bond_force(&m), &diatomic_config(m1, m2, 1.3, 0.0, 0.05, 400)).unwrap();
        for (a, b) in t3.distance(0, 1).iter().zip(t1.coordinate(0)) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn failures_carry_step_index() {
        let cfg = MdConfig { dt_fs: 0.1, steps: 10, masses: vec![1.0], positions: vec![0.0], velocities: vec![1.0] };
        let err = velocity_verlet(
            |x: &[f64]| if x[0] > 0.35 { Err(crate::Error::Numerical("boom".into())) } else { Ok((0.0, vec![0.0])) },
            &cfg,
        )
        .unwrap_err();
        assert!(alloc::format!("{err}").contains("step 4"), "{err}");
        assert!(MdConfig { dt_fs: 0.0, ..cfg.clone() }.validate().is_err());
        assert!(MdConfig { masses: vec![-1.0], ..cfg }.validate().is_err());
    }

    #[test]
    fn sinusoid_peak_and_resolution() {
        let dt = 0.5;
        let tone = |f0: f64| (0..400).map(|i| 1.5 + (2.0 * PI * f0 * i as f64 * dt).sin()).collect::<Vec<f64>>();
        let single = oscillation_spectrum(&tone(0.0371), dt, 1).unwrap();
        assert!((single.dominant_frequency().unwrap() - 0.0371).abs() < single.bin_width());
        // Whole cycles per tile, so tiling stays seamless.
        let f0 = 7.0 / (400.0 * dt);
        let x = tone(f0);
        let s1 = oscillation_spectrum(&x, dt, 2).unwrap();
        let s2 = oscillation_spectrum(&x, dt, 4).unwrap();
        assert!((s1.bin_width() - 2.0 * s2.bin_width()).abs() < 1e-15);
        assert!((s1.dominant_frequency().unwrap() - f0).abs() < s1.bin_width());
        assert!((s2.dominant_frequency().unwrap() - f0).abs() < s2.bin_width());
        assert!(oscillation_spectrum(&[], dt, 2).is_err());
    }

    fn one_qubit(depth: usize) -> QnnTemplate {
        let spec = CouplingSpec::new(1, Entanglement::None, Vec::new()).unwrap();
        assemble_qnn(&spec, &spec, depth).unwrap()
    }

    #[test]
    fn single_encoding_has_frequencies_zero_and_one() {
        let t = one_qubit(1);
        let theta = [0.4, -1.3];
        let c = qnn_model_spectrum(&t, &theta, &[0.0], 0, 64).unwrap();
        assert!(c[1] > 1e-3);
        assert!(c[2..].iter().all(|x| *x < 1e-12));
    }

    #[test]
    fn deeper_circuits_reach_higher_frequencies() {
        for depth in [2usize, 3, 4] {
            let t = one_qubit(depth);
            let found = (0..20u64).any(|s| {
                let theta = crate::capacity::ParamDomain::ANGLES.draw(t.num_params(), s, 0);
                qnn_model_spectrum(&t, &theta, &[0.0], 0, 64).unwrap()[depth] > 1e-3
            });
            assert!(found, "no draw reached frequency {depth}");
        }
    }

    proptest! {
        #[test]
        fn reuploading_support(depth in 1usize..5, seed in 0u64..1000) {
            let t = one_qubit(depth);
            let theta = crate::capacity::ParamDomain::ANGLES.draw(t.num_params(), seed, 0);
            let c = qnn_model_spectrum(&t, &theta, &[0.0], 0, 64).unwrap();
            prop_assert!(c[depth + 1..].iter().all(|x| *x <= 1e-10));
        }
    }
}
