//! Acceptance suite. Each test checks one criterion at its stated tolerance
//! and prints a single `acceptance <k>: PASS|FAIL ...` line before asserting.

use std::f64::consts::PI;
use std::io::Write as _;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use qff_core::baseline::{InputExpansion, MlpSpec};
use qff_core::capacity::{effective_dimension, FisherNormalization, ParamDomain};
use qff_core::circuit::{assemble_qnn, degree_sets, CouplingSpec, Entanglement, QnnTemplate};
use qff_core::data::*;
use qff_core::descriptors::{bond_angle, bond_length, dihedral, CoordinateValue, DescriptorPipeline, FeatureDef, InternalCoord, Nonlinearity};
use qff_core::dynamics::{atomic_mass, bond_force, diatomic_config, oscillation_spectrum, qnn_model_spectrum, velocity_verlet};
use qff_core::gradients::{eval_qnn, HessianMode, QnnEvaluator};
use qff_core::model::*;
use qff_core::presets::Preset;
use qff_core::statevec::StateVector;
use qff_core::train::{adam_fit, zero_init, AdamConfig, LossSpec, TrainReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Writes to the raw stderr handle, which the test harness does not capture,
/// so every criterion shows up in a plain `cargo test` log.
fn report(k: usize, pass: bool, detail: &str) {
    let line = format!("\nacceptance {k:>2}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    std::io::stderr().lock().write_all(line.as_bytes()).unwrap();
}

fn random_template(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> QnnTemplate {
    let ent = [Entanglement::None, Entanglement::Linear, Entanglement::Circular, Entanglement::Full][rng.gen_range(0..4)];
    let l = rng.gen_range(1..=3);
    let spec = CouplingSpec::new(n, ent, degree_sets(n, ent, l)).unwrap();
    assemble_qnn(&spec, &spec, depth).unwrap()
}

fn uniform(rng: &mut ChaCha8Rng, len: usize, half_width: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-half_width..half_width)).collect()
}

/// Central difference of a scalar function in every coordinate.
fn central_fd(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut x = x.to_vec();
    (0..x.len())
        .map(|i| {
            let x0 = x[i];
            x[i] = x0 + h;
            let up = f(&x);
            x[i] = x0 - h;
            let down = f(&x);
            x[i] = x0;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn a01_shift_rule_matches_finite_differences() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let t = random_template(&mut rng, 3, 3);
        let theta = uniform(&mut rng, t.num_params(), PI);
        let y = uniform(&mut rng, 3, 1.0);
        let mut ev = QnnEvaluator::new(&t);
        let (_, gp) = ev.grad_params(&y, &theta).unwrap();
        let (_, gy) = ev.grad_inputs(&y, &theta).unwrap();
        let fd_p = central_fd(&mut |th| eval_qnn(&t, &y, th).unwrap(), &theta, 1e-4);
        let fd_y = central_fd(&mut |yy| eval_qnn(&t, yy, &theta).unwrap(), &y, 1e-4);
        worst = worst.max(max_abs_diff(&gp, &fd_p)).max(max_abs_diff(&gy, &fd_y));
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-6 && elapsed <= Duration::from_secs(10);
    report(1, pass, &format!("max |shift - FD| = {worst:.2e} (<= 1e-6), {:.2} s (<= 10 s)", elapsed.as_secs_f64()));
    assert!(pass);
}

#[test]
fn a02_mixed_hessian_matches_fd_of_shift_gradient() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let t = random_template(&mut rng, 3, 3);
        let theta = uniform(&mut rng, t.num_params(), PI);
        let y = uniform(&mut rng, 3, 1.0);
        let mut ev = QnnEvaluator::new(&t);
        let h = ev.mixed_hessian(&y, &theta, HessianMode::PerOccurrence).unwrap();
        let step = 1e-4;
        for j in 0..3 {
            let mut yp = y.clone();
            yp[j] += step;
            let up = ev.grad_params(&yp, &theta).unwrap().1;
            yp[j] -= 2.0 * step;
            let down = ev.grad_params(&yp, &theta).unwrap().1;
            for p in 0..t.num_params() {
                worst = worst.max((h[(p, j)] - (up[p] - down[p]) / (2.0 * step)).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-5 && elapsed <= Duration::from_secs(60);
    report(2, pass, &format!("max |H - FD(grad)| = {worst:.2e} (<= 1e-5), {:.2} s (<= 60 s)", elapsed.as_secs_f64()));
    assert!(pass);
}

#[test]
fn a03_parameter_counts() {
    let lih = Preset::lih().template().unwrap().num_params();
    let h2o = Preset::h2o().template().unwrap().num_params();
    let h3o = Preset::h3o().template().unwrap().num_params();
    let pass = lih == 73 && h2o == 87;
    report(3, pass, &format!("LiH d = {lih} (73), H2O d = {h2o} (87), H3O+ d = {h3o} (from the template formula)"));
    assert!(pass);
}

#[test]
fn a04_zero_parameters_act_as_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst: f64 = 0.0;
    for preset in [Preset::lih(), Preset::h2o(), Preset::h3o()] {
        let t = preset.template().unwrap();
        let theta = zero_init(&t);
        for _ in 0..10 {
            let y = uniform(&mut rng, t.num_features(), PI);
            let full = eval_qnn(&t, &y, &theta).unwrap();
            let gates = t.bind_encoding_only(&y).unwrap();
            let enc = StateVector::zero(t.num_qubits()).unwrap().run(&gates).unwrap().expectation_z(0).unwrap();
            worst = worst.max((full - enc).abs());
        }
    }
    let pass = worst <= 1e-12;
    report(4, pass, &format!("max |f_0 - f_encoding| = {worst:.2e} (<= 1e-12)"));
    assert!(pass);
}

#[test]
fn a05_fourier_support_of_reuploading() {
    let spec = CouplingSpec::new(1, Entanglement::None, Vec::new()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst: f64 = 0.0;
    let mut present = true;
    for depth in [1usize, 2, 4] {
        let t = assemble_qnn(&spec, &spec, depth).unwrap();
        for _ in 0..5 {
            let theta = uniform(&mut rng, t.num_params(), PI);
            let c = qnn_model_spectrum(&t, &theta, &[0.0], 0, 128).unwrap();
            worst = worst.max(c[depth + 1..].iter().sum::<f64>());
            present &= c[..=depth].iter().any(|x| *x > 1e-6);
        }
    }
    let pass = worst <= 1e-10 && present;
    report(5, pass, &format!("spectral mass beyond D = {worst:.2e} (<= 1e-10) for D in {{1, 2, 4}}"));
    assert!(pass);
}

struct LihRun {
    model: QffModel,
    report: TrainReport,
    wall: Duration,
}

/// Mirrored Morse data, 50/120 split, preset circuit from zero, full Adam
/// budget. Trained once and shared by the criteria that need a trained model.
fn lih_run() -> &'static LihRun {
    static RUN: OnceLock<LihRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let preset = Preset::lih();
        let grid = bond_grid(0.9, 4.5, 85).unwrap();
        let data = mirror_augment(&lih_dataset(&LIH_MORSE, &grid).unwrap(), 4.5).unwrap();
        let (train, test) = train_test_split(&data, preset.train_size, 0).unwrap();
        assert_eq!((train.len(), test.len()), (50, 120));
        let pipe = preset.fit_pipeline(&train).unwrap();
        let t = preset.template().unwrap();
        let labels = LabelScaling::fit(&train.energies(), 0.9).unwrap();
        let model = QffModel::new(t.clone(), pipe, zero_init(&t), labels, ModelMeta::default()).unwrap();
        let cfg = AdamConfig { max_steps: preset.steps, ..Default::default() };
        let start = Instant::now();
        let (model, report) = adam_fit(&model, &train, Some(&test), LossSpec::new(preset.chi).unwrap(), &cfg).unwrap();
        LihRun { model, report, wall: start.elapsed() }
    })
}

#[test]
fn a06_lih_reproduction() {
    let run = lih_run();
    let val = run.report.validation.unwrap();
    let f = val.forces.unwrap();
    let pass = val.energy <= 1e-2 && f <= 0.1 && run.wall <= Duration::from_secs(1800);
    report(
        6,
        pass,
        &format!(
            "validation RMSE(E) = {:.3e} (<= 1e-2), RMSE(F) = {f:.3e} (<= 0.1) scaled; train RMSE(E) = {:.3e}; {} steps, {:.0} s",
            val.energy, run.report.train.energy, run.report.epochs, run.wall.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn a07_effective_dimension_ordering() {
    let start = Instant::now();
    let preset = Preset::lih();
    let qnn = preset.template().unwrap();
    let expansion = InputExpansion::encoding(&preset.coupling().unwrap());
    let grid = bond_grid(0.9, 4.5, 85).unwrap();
    let data = mirror_augment(&lih_dataset(&LIH_MORSE, &grid).unwrap(), 4.5).unwrap();
    let mut wins = 0;
    let mut lines = Vec::new();
    for trial in 0..10u64 {
        let (train, _) = train_test_split(&data, 50, trial).unwrap();
        let pipe = preset.fit_pipeline(&train).unwrap();
        let ys: Vec<Vec<f64>> = train.geometries().map(|g| pipe.apply(g).unwrap()).collect();
        let us: Vec<Vec<f64>> = ys.iter().map(|y| expansion.expand(y).0).collect();
        let mlp = MlpSpec::new(preset.mlp_widths.clone(), trial).unwrap();
        let norm = FisherNormalization::AsPrinted;
        let q = effective_dimension(&qnn, &ys, 50, ParamDomain::ANGLES, 100, norm, trial).unwrap();
        let c = effective_dimension(&mlp, &us, 50, ParamDomain::UNIT, 100, norm, trial).unwrap();
        wins += (q.normalized > c.normalized) as usize;
        lines.push(format!("{:.3}/{:.3}", q.normalized, c.normalized));
    }
    let elapsed = start.elapsed();
    let pass = wins >= 8 && elapsed <= Duration::from_secs(600);
    report(
        7,
        pass,
        &format!(
            "QNN > MLP normalized d_50 in {wins}/10 trials (>= 8) [{}], {:.1} s",
            lines.join(" "),
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn a08_trained_forces_are_energy_gradients() {
    let run = lih_run();
    let model = &run.model;
    let scaler = model.pipeline().scalers()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        // Bond lengths strictly inside the scaler range keep arcsin/arccos smooth.
        let s: f64 = rng.gen_range(-0.95..0.95);
        let r = scaler.min + (s + 1.0) / 2.0 * (scaler.max - scaler.min);
        let (rot, shift) = random_rigid_motion(8000 + i);
        let x = rigid_transform(&diatomic_geometry(r), &rot, shift);
        let forces = model.predict_forces(&x).unwrap();
        let grad = central_fd(&mut |c| model.predict_energy(c).unwrap(), &x, 1e-5);
        let minus_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        worst = worst.max(max_abs_diff(&forces, &minus_grad));
    }
    let pass = worst <= 1e-5;
    report(8, pass, &format!("max |F - (-FD grad E)| = {worst:.2e} eV/A (<= 1e-5) at 50 geometries"));
    assert!(pass);
}

#[test]
fn a09_molecular_dynamics() {
    let (m_li, m_h) = (atomic_mass("Li").unwrap(), atomic_mass("H").unwrap());
    let conservative = velocity_verlet(bond_force(&LIH_MORSE), &diatomic_config(m_li, m_h, 1.05, 0.0, 0.02, 10_000)).unwrap();
    let drift = conservative.max_relative_drift();

    // Long runs for frequency resolution; the start lies inside the training range.
    let (r0, dt, steps) = (1.3, 0.1, 20_000);
    let cfg = diatomic_config(m_li, m_h, r0, 0.0, dt, steps);
    let oracle = velocity_verlet(bond_force(&LIH_MORSE), &cfg).unwrap();
    let f_oracle = oscillation_spectrum(&oracle.coordinate(0), dt, 1).unwrap().dominant_frequency().unwrap();
    let qnn = velocity_verlet(bond_force(&lih_run().model), &cfg);
    let (f_qnn, rel) = match qnn.and_then(|t| oscillation_spectrum(&t.coordinate(0), dt, 1)?.dominant_frequency()) {
        Ok(f) => (f, ((f - f_oracle) / f_oracle).abs()),
        Err(_) => (f64::NAN, f64::INFINITY),
    };
    let pass = drift <= 1e-4 && rel <= 0.05;
    report(
        9,
        pass,
        &format!(
            "Morse drift = {drift:.2e} (<= 1e-4); dominant frequency QNN {f_qnn:.5} vs oracle {f_oracle:.5} 1/fs, rel. error {rel:.3} (<= 0.05)"
        ),
    );
    assert!(pass);
}

fn coordinate_fd(coord: &dyn Fn(&[f64]) -> CoordinateValue, x: &[f64]) -> f64 {
    let analytic = coord(x).gradient;
    let fd = central_fd(&mut |c| coord(c).value, x, 1e-5);
    max_abs_diff(&analytic, &fd)
}

#[test]
fn a10_descriptor_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut worst_jac: f64 = 0.0;
    let mut tested = 0;
    while tested < 200 {
        let x = uniform(&mut rng, 12, 1.5);
        let b = bond_length(&x, 0, 1).unwrap();
        let a = bond_angle(&x, 0, 1, 2).unwrap();
        let d = dihedral(&x, 0, 1, 2, 3).unwrap();
        // Near-collinear frames have unbounded curvature; FD is meaningless there.
        if b.near_singular || a.near_singular || d.near_singular || a.value < 0.2 || a.value > PI - 0.2 {
            continue;
        }
        let c = bond_angle(&x, 1, 2, 3).unwrap();
        if c.value < 0.2 || c.value > PI - 0.2 {
            continue;
        }
        worst_jac = worst_jac
            .max(coordinate_fd(&|c| bond_length(c, 0, 1).unwrap(), &x))
            .max(coordinate_fd(&|c| bond_angle(c, 0, 1, 2).unwrap(), &x))
            .max(coordinate_fd(&|c| dihedral(c, 0, 1, 2, 3).unwrap(), &x));
        tested += 1;
    }

    let cis = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.5, 0.0, 0.0, 2.5, 1.0, 0.0];
    let trans = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.5, 0.0, 0.0, 2.5, -1.0, 0.0];
    let phi_cis = dihedral(&cis, 0, 1, 2, 3).unwrap().value;
    let phi_trans = dihedral(&trans, 0, 1, 2, 3).unwrap().value;
    let cases = phi_cis.abs() <= 1e-12 && (phi_trans.abs() - PI).abs() <= 1e-12;

    let coords = vec![
        InternalCoord::Bond(0, 1),
        InternalCoord::Bond(0, 2),
        InternalCoord::Bond(0, 3),
        InternalCoord::Angle(1, 0, 2),
        InternalCoord::Angle(1, 0, 3),
        InternalCoord::Dihedral(0, 3, 2, 1),
    ];
    let features = (0..6).map(|coord| FeatureDef { coord, map: Nonlinearity::Identity }).collect();
    let data = hydronium_dataset(&HYDRONIUM, 20, 10).unwrap();
    let pipe = DescriptorPipeline::fit(coords, features, data.geometries()).unwrap();
    let mut worst_inv: f64 = 0.0;
    for (i, s) in data.samples().iter().enumerate() {
        let base = pipe.internal_values(&s.cartesian).unwrap();
        let (rot, shift) = random_rigid_motion(i as u64);
        let moved = pipe.internal_values(&rigid_transform(&s.cartesian, &rot, shift)).unwrap();
        worst_inv = worst_inv.max(max_abs_diff(&base, &moved));
    }

    let pass = worst_jac <= 1e-7 && cases && worst_inv <= 1e-9;
    report(
        10,
        pass,
        &format!(
            "Jacobian FD error {worst_jac:.2e} (<= 1e-7); cis {phi_cis:.1e}, trans {phi_trans:.6}; rigid-motion change {worst_inv:.2e} (<= 1e-9)"
        ),
    );
    assert!(pass);
}

#[test]
fn a11_mirroring() {
    let r_m = 4.5;
    let grid = bond_grid(0.9, r_m, 85).unwrap();
    let base = lih_dataset(&LIH_MORSE, &grid).unwrap();
    let aug = mirror_augment(&base, r_m).unwrap();
    let bond = |s: &Sample| bond_length(&s.cartesian, 0, 1).unwrap();
    let mut energies_equal = true;
    let mut worst_force: f64 = 0.0;
    let mut matched = 0;
    let mut on_mirror = 0;
    for s in base.samples() {
        let r = bond(s).value;
        if (r - r_m).abs() <= 1e-12 {
            on_mirror += 1;
            continue;
        }
        let image = aug.samples()[base.len()..]
            .iter()
            .find(|m| (bond(m).value - (2.0 * r_m - r)).abs() <= 1e-9)
            .expect("every interior sample has a mirror image");
        matched += 1;
        energies_equal &= image.energy == s.energy;
        let along = |smp: &Sample| {
            let b = bond(smp);
            smp.forces.as_ref().unwrap().iter().zip(&b.gradient).map(|(f, g)| f * g).sum::<f64>()
        };
        worst_force = worst_force.max((along(image) + along(s)).abs());
    }
    let count_ok = aug.len() == 2 * base.len() - on_mirror && matched == base.len() - on_mirror;
    let pass = energies_equal && worst_force <= 1e-12 && count_ok;
    report(
        11,
        pass,
        &format!(
            "{} samples -> {}; exact energy equality {energies_equal}; max bond-force antisymmetry error {worst_force:.1e}",
            base.len(),
            aug.len()
        ),
    );
    assert!(pass);
}
