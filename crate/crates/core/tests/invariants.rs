use num_complex::Complex64;
use proptest::prelude::*;
use pwl_core::analytic::{
    classify_regime, dpa_envelope_raw, gain_parameters, gain_rate, opa_envelope_raw, pump_threshold,
};
use pwl_core::integrator::{integrate_envelope, EnvelopeForm, EnvelopeSettings};
use pwl_core::model::{
    derived_detunings, hz_to_rad, Branch, InitialConditions, PumpConfig, Regime, Symmetry, SystemConfig, BASELINE_CHI,
};
use rand::{Rng, SeedableRng};
use std::f64::consts::TAU;

fn random_config(rng: &mut impl Rng) -> (SystemConfig, PumpConfig) {
    let wg = hz_to_rad(rng.gen_range(100.0..5000.0));
    let we = wg * rng.gen_range(1.01..3.0);
    let mut chi = || {
        let m = BASELINE_CHI * 10f64.powf(rng.gen_range(-2.0..1.0));
        if rng.gen_bool(0.5) {
            m
        } else {
            -m
        }
    };
    let cfg = SystemConfig::new(we, wg, chi(), chi()).unwrap();
    let pump = PumpConfig::new(rng.gen_range(0.0..5.0), rng.gen_range(0.1..3.0) * we, rng.gen_range(-3.0..3.0)).unwrap();
    (cfg, pump)
}

#[test]
fn gain_rate_identities_hold_over_random_configs() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..10_000 {
        let (cfg, pump) = random_config(&mut rng);
        let d = derived_detunings(&cfg, &pump);
        let p = gain_parameters(&cfg, &pump, Branch::Dpa);
        let om = p.gain_rate;
        let lhs = om * om + d.delta * d.delta - 4.0 * p.alpha * p.beta;
        let scale = (d.delta * d.delta) + 4.0 * (p.alpha * p.beta).norm();
        assert!(lhs.norm() <= 1e-12 * scale, "DPA identity {lhs} vs {scale}");
        let s = gain_parameters(&cfg, &pump, Branch::Opa);
        let om = s.gain_rate;
        let lhs = om * om + d.delta_s * d.delta_s - 4.0 * s.alpha * s.beta.conj();
        let scale = (d.delta_s * d.delta_s) + 4.0 * (s.alpha * s.beta.conj()).norm();
        assert!(lhs.norm() <= 1e-12 * scale, "OPA identity {lhs} vs {scale}");
    }
}

#[test]
fn branches_are_dual_under_symmetry_flip() {
    for sym in [Symmetry::Positive, Symmetry::Negative] {
        let cfg = SystemConfig::baseline(sym);
        let flipped = cfg.with_couplings(cfg.chi_e, -cfg.chi_g).unwrap();
        let opa = gain_rate(&cfg, &PumpConfig::resonant(&cfg, Branch::Opa, 1.0), Branch::Opa);
        let dpa = gain_rate(&flipped, &PumpConfig::resonant(&flipped, Branch::Dpa, 1.0), Branch::Dpa);
        assert!((opa - dpa).norm() < 1e-12 * opa.norm());
    }
}

#[test]
fn amplification_iff_sign_and_threshold() {
    let base = SystemConfig::baseline(Symmetry::Negative);
    for branch in [Branch::Dpa, Branch::Opa] {
        for &sym in &[Symmetry::Positive, Symmetry::Negative] {
            let cfg = SystemConfig::baseline(sym);
            for k in 0..41 {
                let offset = hz_to_rad(-10.0 + 0.5 * k as f64);
                for &a0 in &[0.2, 0.5, 1.0, 2.0] {
                    let pump = PumpConfig::new(a0, cfg.resonant_pump(branch) + offset, 0.3).unwrap();
                    let th = pump_threshold(&cfg, pump.nu, branch).unwrap();
                    let om = gain_rate(&cfg, &pump, branch);
                    let expected = sym == Symmetry::amplifying(branch) && a0 > th;
                    if (a0 - th).abs() > 1e-9 * th {
                        assert_eq!(om.re > 0.0, expected, "{branch:?} {sym:?} a0={a0} th={th}");
                    }
                }
            }
        }
    }
    let report = classify_regime(&base, &PumpConfig::resonant(&base, Branch::Dpa, 1.0));
    assert_eq!(report.regime, Regime::Amplify);
}

#[test]
fn swapping_mode_labels_maps_solutions() {
    // With Ẽ_e ↔ Ẽ_g, α ↔ β and Δ → −Δ the difference-pump system maps onto itself.
    let alpha = Complex64::new(0.3, 12.0);
    let beta = Complex64::new(-0.7, 9.0);
    let (e0, g0) = (Complex64::new(0.4, 0.1), Complex64::new(-0.2, 0.9));
    for &t in &[0.0, 0.013, 0.07, 0.21] {
        let (e, g) = dpa_envelope_raw(alpha, beta, 5.0, e0, g0, t);
        let (g2, e2) = dpa_envelope_raw(beta, alpha, -5.0, g0, e0, t);
        assert!((e - e2).norm() < 1e-12 * e.norm().max(1.0));
        assert!((g - g2).norm() < 1e-12 * g.norm().max(1.0));
        let (e, g) = opa_envelope_raw(alpha, beta, 5.0, e0, g0, t);
        let (g2, e2) = opa_envelope_raw(beta, alpha, 5.0, g0, e0, t);
        assert!((e - e2).norm() < 1e-12 * e.norm().max(1.0));
        assert!((g - g2).norm() < 1e-12 * g.norm().max(1.0));
    }
}

/// `(ω_e/χ_g)|ℰ_e|² ± (ω_g/χ_e)|ℰ_g|²`, `+` for the difference pump.
fn manley_rowe(cfg: &SystemConfig, e: Complex64, g: Complex64, branch: Branch) -> f64 {
    let sign = match branch {
        Branch::Dpa => 1.0,
        Branch::Opa => -1.0,
    };
    cfg.omega_e / cfg.chi_g * e.norm_sqr() + sign * cfg.omega_g / cfg.chi_e * g.norm_sqr()
}

#[test]
fn manley_rowe_analogs_are_conserved() {
    for branch in [Branch::Dpa, Branch::Opa] {
        for sym in [Symmetry::Positive, Symmetry::Negative] {
            let cfg = SystemConfig::baseline(sym);
            let pump = PumpConfig::new(1.0, cfg.resonant_pump(branch) + 3.0, 0.2).unwrap();
            let om = gain_rate(&cfg, &pump, branch);
            let period = TAU / om.re.max(om.im.abs());
            let init = InitialConditions::new(Complex64::new(1.0, 0.2), Complex64::new(0.3, -0.4)).unwrap();
            let form = match branch {
                Branch::Dpa => EnvelopeForm::Dpa,
                Branch::Opa => EnvelopeForm::Opa,
            };
            let env = integrate_envelope(&cfg, &pump, &init, &EnvelopeSettings::new(2.0 * period, period / 50.0), form)
                .unwrap();
            let c0 = manley_rowe(&cfg, env.e[0], env.g[0], branch);
            for i in 1..env.len() {
                let periods = (env.time(i) / period).max(1.0);
                let drift = (manley_rowe(&cfg, env.e[i], env.g[i], branch) - c0).abs() / c0.abs();
                assert!(drift < 1e-6 * periods, "{branch:?} {sym:?}: drift {drift:e} at t = {}", env.time(i));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn threshold_separates_regimes(a0 in 0.01f64..3.0, offset_hz in -20.0f64..20.0, neg in any::<bool>()) {
        let sym = if neg { Symmetry::Negative } else { Symmetry::Positive };
        let cfg = SystemConfig::baseline(sym);
        let branch = Branch::Dpa;
        let pump = PumpConfig::new(a0, cfg.resonant_pump(branch) + hz_to_rad(offset_hz), 0.0).unwrap();
        let th = pump_threshold(&cfg, pump.nu, branch).unwrap();
        prop_assume!((a0 - th).abs() > 1e-9);
        let re = gain_rate(&cfg, &pump, branch).re;
        prop_assert_eq!(re > 0.0, neg && a0 > th);
    }
}
