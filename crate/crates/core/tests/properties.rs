//! Property tests for the bath sampler, the adiabatic frame and the
//! transition machinery.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sstp_core::bath::{discretize_ohmic, sample_wigner, wigner_variances, BathSpec};
use sstp_core::hopping::{approx_shift_along, exact_shift_along, Candidate, FilterMode, SchemeConfig};
use sstp_core::model::{LocalFrame, SpinBoson, SubsystemParams, Surface};
use sstp_core::trajectory::{PairState, SegmentState};

const SURFACES: [Surface; 2] = [Surface::Lower, Surface::Upper];

fn any_scheme() -> impl Strategy<Value = SchemeConfig> {
    prop_oneof![
        Just(SchemeConfig::primitive(2)),
        (0.0f64..1.0).prop_map(|c| SchemeConfig::generalized(c, FilterMode::Literal, 2)),
        (0.0f64..1.0).prop_map(|c| SchemeConfig::generalized(c, FilterMode::Residual, 2)),
    ]
}

proptest! {
    #[test]
    fn discretization_is_increasing_and_bounded(n in 1usize..400, xi in 0.0f64..3.0, wc in 0.5f64..3.0, wmax in 0.5f64..5.0) {
        let spec = BathSpec { n_modes: n, xi, omega_c: wc, omega_max: wmax, beta: 1.0 };
        let modes = discretize_ohmic(&spec).unwrap();
        prop_assert_eq!(modes.len(), n);
        prop_assert!((modes[n - 1].omega - wmax).abs() <= 1e-9 * wmax);
        for w in modes.windows(2) {
            prop_assert!(w[0].omega < w[1].omega);
        }
        prop_assert!(modes.iter().all(|m| m.coupling >= 0.0));
    }

    #[test]
    fn wigner_variances_exceed_ground_state(omega in 0.01f64..5.0, beta in 0.01f64..50.0) {
        let (vr, vp) = wigner_variances(omega, beta);
        prop_assert!(vr >= 0.5 / omega * (1.0 - 1e-12));
        prop_assert!(vp >= 0.5 * omega * (1.0 - 1e-12));
        // minimum-uncertainty relation at T = 0, larger above
        prop_assert!(vr * vp >= 0.25 * (1.0 - 1e-12));
    }

    #[test]
    fn trace_is_basis_independent(gamma in -50.0f64..50.0, omega in 1e-3f64..5.0) {
        let f = LocalFrame::new(gamma, omega);
        let mut trace = 0.0;
        for a in SURFACES {
            for b in SURFACES {
                trace += f.sigma_z(a, b) * f.rho_up(b, a);
            }
        }
        prop_assert!((trace - 1.0).abs() < 1e-12);
        let sum: f64 = SURFACES.iter().map(|&a| f.rho_up(a, a)).sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gap_is_negative_reverse_bohr_frequency(gamma in -50.0f64..50.0, omega in 1e-3f64..5.0) {
        let f = LocalFrame::new(gamma, omega);
        for a in SURFACES {
            for b in SURFACES {
                prop_assert_eq!(f.energy_gap(a, b), -f.bohr_frequency(b, a));
            }
        }
    }

    #[test]
    fn enumeration_reproduces_dyson_step(
        b in -20.0f64..20.0,
        a in -5.0f64..5.0,
        de in -3.0f64..3.0,
        dt in 1e-4f64..0.1,
        mass in 0.3f64..3.0,
        f_jump in -5.0f64..5.0,
        f_stay in -5.0f64..5.0,
        scheme in any_scheme(),
    ) {
        let c = Candidate::evaluate(Surface::Lower, b, dt, a, de, 1.0, &scheme, mass);
        let expectation = c.prob_jump * c.jump_weight() * f_jump + c.prob_stay * c.stay_weight() * f_stay;
        let dyson = f_stay + c.omega * dt * b * f_jump;
        prop_assert!((expectation - dyson).abs() <= 1e-12 * (1.0 + dyson.abs()));
        prop_assert!(c.omega == 0.0 || c.omega == 1.0);
        if c.omega == 0.0 {
            prop_assert_eq!(c.stay_weight(), 1.0);
            prop_assert_eq!(c.prob_jump, 0.0);
        }
    }

    #[test]
    fn unfiltered_generalized_is_primitive(b in -20.0f64..20.0, a in -5.0f64..5.0, de in -3.0f64..3.0, dt in 1e-4f64..0.1) {
        let p = Candidate::evaluate(Surface::Upper, b, dt, a, de, -1.0, &SchemeConfig::primitive(2), 1.0);
        let g = Candidate::evaluate(
            Surface::Upper, b, dt, a, de, -1.0,
            &SchemeConfig::generalized(f64::INFINITY, FilterMode::Literal, 2), 1.0,
        );
        prop_assert_eq!(p.prob_jump.to_bits(), g.prob_jump.to_bits());
        prop_assert_eq!(p.jump_weight().to_bits(), g.jump_weight().to_bits());
        prop_assert_eq!(p.stay_weight().to_bits(), g.stay_weight().to_bits());
    }

    #[test]
    fn exact_shift_balances_half_gap(a in prop::num::f64::NORMAL.prop_filter("range", |v| v.abs() > 1e-3 && v.abs() < 10.0), de in -3.0f64..3.0, mass in 0.3f64..3.0) {
        match exact_shift_along(a, de, mass) {
            Ok(shifted) => {
                let kinetic = (shifted * shifted - a * a) / (2.0 * mass);
                prop_assert!((kinetic - 0.5 * de).abs() < 1e-12 * (1.0 + a * a));
                prop_assert_eq!(shifted.signum(), a.signum());
            }
            Err(_) => prop_assert!(a * a + mass * de < 0.0),
        }
    }

    #[test]
    fn approx_shift_error_is_second_order(a in 1.0f64..5.0, de in 0.01f64..0.2) {
        let err = |de: f64| (exact_shift_along(a, de, 1.0).unwrap() - approx_shift_along(a, de, 1.0).unwrap()).abs();
        let ratio = err(de) / err(de / 2.0);
        prop_assert!((3.5..4.5).contains(&ratio), "ratio {}", ratio);
    }
}

#[test]
fn wigner_coordinates_are_uncorrelated() {
    let spec = BathSpec {
        n_modes: 8,
        ..BathSpec::default()
    };
    let modes = discretize_ohmic(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 200_000;
    let mut sums = vec![[0.0f64; 5]; modes.len()];
    for _ in 0..n {
        let x = sample_wigner(&modes, spec.beta, &mut rng);
        for k in 0..modes.len() {
            let s = &mut sums[k];
            s[0] += x.r[k];
            s[1] += x.p[k];
            s[2] += x.r[k] * x.r[k];
            s[3] += x.p[k] * x.p[k];
            s[4] += x.r[k] * x.p[k];
        }
    }
    let n = n as f64;
    for s in &sums {
        let (mr, mp) = (s[0] / n, s[1] / n);
        let cov = s[4] / n - mr * mp;
        let corr = cov / ((s[2] / n - mr * mr) * (s[3] / n - mp * mp)).sqrt();
        assert!(corr.abs() < 4.0 / n.sqrt(), "corr {corr}");
    }
}

#[test]
fn eigenvectors_stay_continuous_along_trajectories() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for (beta, omega, xi) in [(3.0, 1.0 / 3.0, 0.1), (0.25, 1.2, 2.0), (1.0, 0.4, 0.13)] {
        let spec = BathSpec {
            n_modes: 50,
            xi,
            beta,
            ..BathSpec::default()
        };
        let model = SpinBoson::new(discretize_ohmic(&spec).unwrap(), SubsystemParams { omega }).unwrap();
        for t in 0..334 {
            let x = sample_wigner(model.modes(), beta, &mut rng);
            let mut seg = SegmentState::new(x, PairState::ALL[t % 4], &model);
            let mut prev = seg.local().eigenvectors();
            for _ in 0..500 {
                seg.step(0.01, &model).unwrap();
                let v = seg.local().eigenvectors();
                for i in 0..2 {
                    for a in 0..2 {
                        worst = worst.max((v[i][a] - prev[i][a]).abs());
                    }
                }
                prev = v;
            }
        }
    }
    assert!(worst < 0.5, "largest component jump {worst}");
}
