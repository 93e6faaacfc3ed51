use approx::assert_abs_diff_eq;
use dicke_core::observables::{
    ground_state_energy_per_atom, optimal_squeezing, photon_variance_and_mandel, two_mode_squeezed,
};
use dicke_core::ode::uniform_samples;
use dicke_core::*;
use proptest::prelude::*;

fn static_params() -> impl Strategy<Value = Parameters> {
    (0.3f64..3.0, 0.3f64..3.0, 0.05f64..1.5).prop_map(|(wa, wb, g)| Parameters::new(wa, wb, g))
}

fn sr_params() -> impl Strategy<Value = Parameters> {
    (0.3f64..3.0, 0.3f64..3.0, 0.01f64..0.99).prop_map(|(wa, wb, mu)| {
        let g = (wa * wb / (4.0 * mu)).sqrt();
        Parameters::new(wa, wb, g)
    })
}

fn norm(d: (Complex64, Complex64)) -> f64 {
    (d.0.norm_sqr() + d.1.norm_sqr()).sqrt()
}

/// Leading-order energy per atom minimised over real fields: `alpha` is
/// eliminated exactly (the energy is quadratic in it) and `beta` is scanned
/// then refined by golden-section search.
fn brute_force_ground_state(p: &Parameters) -> f64 {
    let e = |b: f64| {
        let s = (1.0 - b * b).max(0.0).sqrt();
        let a = -2.0 * p.g * s * b / p.omega_a;
        p.omega_a * a * a + p.omega_b * (b * b - 0.5) + 4.0 * p.g * s * a * b
    };
    let n = 20_000;
    let (mut best, mut best_b) = (f64::INFINITY, 0.0);
    for k in 0..=n {
        let b = k as f64 / n as f64;
        if e(b) < best {
            best = e(b);
            best_b = b;
        }
    }
    let (mut lo, mut hi) = (
        (best_b - 1.0 / n as f64).max(0.0),
        (best_b + 1.0 / n as f64).min(1.0),
    );
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if e(x1) < e(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    e(0.5 * (lo + hi)).min(best)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sr_points_are_stationary(p in sr_params()) {
        for sp in p.stationary_points() {
            let mf = MeanField::new(sp.alpha, sp.beta);
            let proto = DriveProtocol::constant(p.omega_a, p.omega_b, p.g);
            let r = norm(mean_field_rhs(0.0, &mf, &proto).unwrap());
            prop_assert!(r < 1e-12, "residual {r} at {:?}", sp.kind);
        }
    }

    #[test]
    fn parity_maps_trajectories(
        p in static_params(),
        a in (-0.3f64..0.3, -0.3f64..0.3),
        b in (-0.3f64..0.3, -0.3f64..0.3),
    ) {
        let proto = DriveProtocol::sinusoidal(p.omega_a, 1.0, 0.4, 0.7, p.g);
        let mf = MeanField::new(Complex64::new(a.0, a.1), Complex64::new(b.0, b.1));
        let samples = uniform_samples(10.0, 5);
        let cfg = IntegratorConfig::default();
        let plus = integrate_mean_field(mf, &proto, &samples, &cfg).unwrap();
        let minus = integrate_mean_field(-mf, &proto, &samples, &cfg).unwrap();
        for (x, y) in plus.samples.iter().zip(&minus.samples) {
            prop_assert!((x.1.alpha + y.1.alpha).norm() < 1e-12);
            prop_assert!((x.1.beta + y.1.beta).norm() < 1e-12);
        }
    }

    #[test]
    fn static_flow_conserves_energy(
        p in static_params(),
        a in (-0.5f64..0.5, -0.5f64..0.5),
        b in (-0.5f64..0.5, -0.5f64..0.5),
    ) {
        let mf = MeanField::new(Complex64::new(a.0, a.1), Complex64::new(b.0, b.1));
        let proto = DriveProtocol::constant(p.omega_a, p.omega_b, p.g);
        let e0 = classical_hamiltonian(&mf, &p).unwrap();
        let tr = integrate_mean_field(mf, &proto, &uniform_samples(20.0, 10), &IntegratorConfig::tight()).unwrap();
        if tr.status == TrajectoryStatus::Completed {
            for (_, s) in &tr.samples {
                let e = classical_hamiltonian(s, &p).unwrap();
                prop_assert!((e - e0).abs() <= 1e-8 * e0.abs().max(1e-2));
            }
        }
    }

    #[test]
    fn ground_state_matches_minimisation(p in (0.3f64..3.0, 0.3f64..3.0, 0.1f64..5.0).prop_map(|(wa, wb, mu)| {
        Parameters::new(wa, wb, (wa * wb / (4.0 * mu)).sqrt())
    })) {
        let e = ground_state_energy_per_atom(&p).e_per_atom;
        let oracle = brute_force_ground_state(&p);
        prop_assert!((e - oracle).abs() < 1e-9, "{e} vs {oracle}");
    }

    #[test]
    fn coherent_state_is_poissonian(re in -2.0f64..2.0, im in -2.0f64..2.0) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let mf = MeanField::new(Complex64::new(re, im), Complex64::new(0.0, 0.0));
        let s = photon_variance_and_mandel(&mf, &(Mat4::identity() * 0.5), 1e6);
        prop_assert!((s.rho_infinity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn squeezing_round_trip(r in 0.0f64..5.0) {
        let fit = optimal_squeezing(&two_mode_squeezed(r));
        prop_assert!((fit.r_opt - r).abs() < 1e-6);
        prop_assert!(fit.fidelity > 1.0 - 1e-7);
    }

    #[test]
    fn monodromy_rate_matches_static_closed_form(p in static_params()) {
        let proto = DriveProtocol::constant_with_period(p.omega_a, p.omega_b, p.g, 3.0);
        let f = floquet(&proto, &IntegratorConfig::tight()).unwrap();
        let closed = gamma_star_static(&p);
        prop_assert!((f.max_real_exponent.max(0.0) - closed).abs() < 1e-6,
            "{} vs {closed}", f.max_real_exponent);
    }
}

#[test]
fn stated_static_rate() {
    assert_abs_diff_eq!(
        gamma_star_static(&Parameters::new(1.0, 1.0, 0.6)),
        0.2f64.sqrt(),
        epsilon = 1e-12
    );
    assert_eq!(gamma_star_static(&Parameters::new(1.0, 1.0, 0.5)), 0.0);
}
