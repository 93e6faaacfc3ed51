use dicke_core::fluctuations::{integrate_joint_from, vacuum};
use dicke_core::observables::{average_work, mean_energy, sr_entry_times};
use dicke_core::ode::uniform_samples;
use dicke_core::*;

fn driven() -> DriveProtocol {
    DriveProtocol::sinusoidal(1.0, 1.0, 0.5, 0.7, 0.3)
}

fn state(mf: &MeanField) -> nalgebra::Vector4<f64> {
    nalgebra::Vector4::from_row_slice(&mf.to_state())
}

#[test]
fn phi_is_the_derivative_of_the_flow_map() {
    let proto = driven();
    let cfg = IntegratorConfig::tight();
    let mf0 = MeanField::new(Complex64::new(0.12, -0.05), Complex64::new(0.2, 0.1));
    let t_end = 4.0;
    let base = integrate_joint(mf0, &vacuum(), &proto, &[t_end], &cfg).unwrap();
    let phi = base.samples.last().unwrap().fluct.phi;
    let h = 1e-6;
    for k in 0..4 {
        let mut plus = mf0.to_state();
        let mut minus = mf0.to_state();
        plus[k] += h;
        minus[k] -= h;
        let run = |s: [f64; 4]| {
            let tr =
                integrate_mean_field(MeanField::from_state(&s), &proto, &[t_end], &cfg).unwrap();
            state(&tr.samples.last().unwrap().1)
        };
        let column = (run(plus) - run(minus)) / (2.0 * h);
        let diff = (column - phi.column(k)).amax();
        assert!(diff < 1e-6, "column {k}: {diff}");
    }
}

#[test]
fn small_displacements_follow_the_linear_propagator() {
    let proto = driven();
    let cfg = IntegratorConfig::tight();
    let eps = 1e-7;
    let mf0 = MeanField::new(Complex64::new(eps, 0.0), Complex64::new(0.0, eps));
    let samples = uniform_samples(6.0, 6);
    let tr = integrate_mean_field(mf0, &proto, &samples, &cfg).unwrap();
    for (t, mf) in tr.samples.iter().skip(1) {
        let phi = fluctuations::linear_propagator(&proto, 0.0, *t, &cfg).unwrap();
        let predicted = phi * state(&mf0);
        let err = (state(mf) - predicted).amax();
        assert!(err < 1e-12, "t = {t}: {err}");
    }
}

#[test]
fn restarted_legs_compose() {
    let proto = driven();
    let cfg = IntegratorConfig::tight();
    let mf0 = MeanField::new(Complex64::new(0.05, 0.0), Complex64::new(0.0, 0.0));
    let whole = integrate_joint(mf0, &vacuum(), &proto, &[3.0, 7.0], &cfg).unwrap();
    let mid = whole.samples[1];
    let second =
        integrate_joint_from(3.0, mid.mean_field, &mid.fluct.w, &proto, &[7.0], &cfg).unwrap();
    let composed = second.samples[1].fluct.phi * mid.fluct.phi;
    let end = whole.samples[2].fluct.phi;
    assert!((composed - end).amax() < 1e-8 * end.amax().max(1.0));
    assert!((second.samples[1].fluct.w - whole.samples[2].fluct.w).amax() < 1e-8);
}

#[test]
fn unitary_evolution_stays_symplectic_and_pure() {
    let cfg = IntegratorConfig::tight();
    let mf0 = MeanField::coherent(0.1);
    let tr = integrate_joint(mf0, &vacuum(), &driven(), &uniform_samples(30.0, 30), &cfg).unwrap();
    assert!(tr.max_symplectic_defect() < 1e-9);
    assert!(tr.max_purity_defect() < 1e-9);
    for s in &tr.samples {
        assert!(fluctuations::uncertainty_min_eigenvalue(&s.fluct.w) > -1e-9);
    }
}

#[test]
fn work_equals_energy_change_without_mean_fields() {
    let proto = driven();
    let n = 1e4;
    let tr = integrate_joint(
        MeanField::zero(),
        &vacuum(),
        &proto,
        &uniform_samples(20.0, 40),
        &IntegratorConfig::tight(),
    )
    .unwrap();
    let start = tr.samples[0];
    for s in &tr.samples {
        let w = average_work(s, &start, &vacuum(), &proto, n).unwrap();
        assert!(!w.closed_form_flagged);
        let de = mean_energy(&s.mean_field, &s.fluct.w, &proto, s.t, n).unwrap()
            - mean_energy(&start.mean_field, &vacuum(), &proto, 0.0, n).unwrap();
        assert!((w.closed_form - de).abs() / de.abs().max(1.0) < 1e-8);
    }
}

#[test]
fn sr_windows_match_a_brute_force_scan() {
    // mu0 = 0.9 with lambda = 0.2: windows where mu(t) < 1
    let g = (1.0f64 / 3.6).sqrt();
    let proto = DriveProtocol::sinusoidal(1.0, 1.0, 0.2, 0.3, g);
    let periods = 3;
    let windows = sr_entry_times(&proto, periods).unwrap();
    let horizon = periods as f64 * 2.0 * std::f64::consts::PI / 0.3;
    let n = 200_000;
    let mut crossings = Vec::new();
    let below = |t: f64| proto.mu(t).unwrap() < 1.0;
    let mut prev = below(0.0);
    for k in 1..=n {
        let t = horizon * k as f64 / n as f64;
        let now = below(t);
        if now != prev {
            crossings.push(t);
        }
        prev = now;
    }
    let edges: Vec<f64> = windows
        .intervals
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|&t| t > 0.0 && t < horizon)
        .collect();
    assert_eq!(edges.len(), crossings.len());
    let step = horizon / n as f64;
    for (a, b) in edges.iter().zip(&crossings) {
        assert!((a - b).abs() <= step, "{a} vs {b}");
    }
}

#[test]
fn fig1_row_is_unstable_above_the_black_line() {
    let cfg = IntegratorConfig::default();
    let eta = 1.0 / 11.0;
    for g in [0.62, 0.7, 0.85, 1.0] {
        let f = floquet(&DriveProtocol::sinusoidal(1.0, 1.0, 0.5, eta, g), &cfg).unwrap();
        assert!(f.is_unstable(), "g = {g}");
    }
    // well inside the normal region and away from resonances
    for g in [0.05, 0.15, 0.25] {
        let f = floquet(&DriveProtocol::sinusoidal(1.0, 1.0, 0.5, eta, g), &cfg).unwrap();
        assert!(!f.is_unstable(), "g = {g}");
    }
}

#[test]
fn multipliers_pair_reciprocally_when_well_conditioned() {
    let cfg = IntegratorConfig::tight();
    for (eta, g) in [(0.3, 0.2), (1.0, 0.4), (2.0, 0.1), (0.5, 0.45)] {
        let f = floquet(&DriveProtocol::sinusoidal(1.0, 1.0, 0.5, eta, g), &cfg).unwrap();
        if f.monodromy.amax() < 1e3 {
            assert!(
                f.reciprocity_defect() < 1e-6,
                "({eta}, {g}): {}",
                f.reciprocity_defect()
            );
            assert!(f.det_defect() < 1e-8);
        }
    }
}
