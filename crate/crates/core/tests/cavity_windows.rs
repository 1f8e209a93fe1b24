use proptest::prelude::*;
use pwl_core::cavity::{dpa_windows, effective_coupling, in_negative_region, negative_sign_intervals, sweep_antenna, CavityConfig};
use pwl_core::model::Branch;
use pwl_core::sweep::Metric;

fn inside(intervals: &[pwl_core::cavity::Interval], x: f64) -> bool {
    intervals.iter().any(|iv| iv.contains(x))
}

#[test]
fn bracketed_windows_are_exact_for_small_m() {
    let cav = CavityConfig::baseline(Branch::Dpa);
    let w = dpa_windows(&cav, 0..=3);
    let (_, lg) = cav.wavelengths();
    // fine-grid scan over the span of the four windows
    let n = 200_000;
    let span = w.bracketed.last().unwrap().hi + 0.1 * lg;
    for k in 0..n {
        let x = span * (k as f64 + 0.5) / n as f64;
        let negative = in_negative_region(&cav, x);
        assert_eq!(inside(&w.exact, x), negative, "exact intervals at x = {x}");
        if x < w.bracketed.last().unwrap().hi {
            assert_eq!(inside(&w.bracketed, x), negative, "bracketed windows at x = {x}");
        }
    }
}

#[test]
fn analytic_antenna_sweep_labels_match_windows() {
    for branch in [Branch::Dpa, Branch::Opa] {
        let cav = CavityConfig::baseline(branch);
        let (_, lg) = cav.wavelengths();
        let grid = sweep_antenna(&cav, (0.0, 2.0, 801), Metric::AnalyticReOmega, 0.5, 2).unwrap();
        let exact = negative_sign_intervals(&cav, 2.0 * lg);
        for c in &grid.cells {
            let x = c.x1 * lg;
            let (ce, cg) = effective_coupling(&cav.at(x));
            if (ce * cg).abs() < 1e-9 * cav.chi * cav.chi {
                continue;
            }
            let expect = match branch {
                Branch::Dpa => inside(&exact, x),
                Branch::Opa => !inside(&exact, x),
            };
            assert_eq!(c.metric > 0.0, expect, "{branch:?} at x/λ_g = {}", c.x1);
        }
    }
}

proptest! {
    #[test]
    fn negative_product_iff_inside_exact_interval(x in 0.0f64..0.02) {
        let cav = CavityConfig::baseline(Branch::Dpa);
        let exact = negative_sign_intervals(&cav, 0.03);
        let (ce, cg) = effective_coupling(&cav.at(x));
        prop_assume!((ce * cg).abs() > 1e-6 * cav.chi * cav.chi);
        prop_assert_eq!(ce * cg < 0.0, inside(&exact, x));
    }

    #[test]
    fn window_geometry_scales_with_wave_speed(c in 0.1f64..10.0) {
        let base = CavityConfig::baseline(Branch::Dpa);
        let scaled = CavityConfig { c, ..base };
        let a = dpa_windows(&base, 0..=3);
        let b = dpa_windows(&scaled, 0..=3);
        for (u, v) in a.bracketed.iter().zip(&b.bracketed) {
            prop_assert!((v.lo - c * u.lo).abs() < 1e-12 * v.lo);
            prop_assert!((v.hi - c * u.hi).abs() < 1e-12 * v.hi);
        }
    }
}
