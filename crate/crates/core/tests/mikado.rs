use mikado_core::mikado::*;
use mikado_core::torus::norm::{lp, lp_vec};
use mikado_core::torus::TorusGrid;
use mikado_core::Error;

fn grid(d: usize, n: usize) -> TorusGrid {
    TorusGrid::new(d, n).unwrap()
}

/// Metadata-only grid for scaling fits done on transverse slices.
fn big_grid(d: usize, n: usize) -> TorusGrid {
    TorusGrid::with_budget(d, n, u128::MAX).unwrap()
}

#[test]
fn family_identities_hold() {
    let fam = MikadoFamily::build(grid(3, 64), 1.5, 8.0).unwrap();
    let check = verify_family(&fam).unwrap();
    assert!(check.pass, "{check:?}");
    for (j, c) in check.cancellation.iter().enumerate() {
        for (a, v) in c.iter().enumerate() {
            let e = if a == j { 1.0 } else { 0.0 };
            assert!((v - e).abs() <= 1e-8, "pipe {j}: {c:?}");
        }
    }
    assert!(check.div_w.iter().all(|v| *v <= 1e-10));
    assert_eq!(check.overlaps, 0);
    assert!(check.product_l1_sum <= check.measured_m);
}

#[test]
fn family_identities_hold_in_four_dimensions() {
    let fam = MikadoFamily::build(grid(4, 72), 8.0 / 7.0, 9.0).unwrap();
    let check = verify_family(&fam).unwrap();
    assert!(check.pass, "{check:?}");
}

#[test]
fn concentration_must_exceed_twice_the_dimension() {
    assert_eq!(
        MikadoFamily::build(grid(3, 64), 1.5, 5.0).unwrap_err(),
        Error::ConcentrationTooSmall { mu: 5.0, two_d: 6 }
    );
    assert!(matches!(
        MikadoFamily::build(grid(3, 32), 1.5, 8.0),
        Err(Error::Unresolved { n: 32, .. })
    ));
    assert!(matches!(
        MikadoFamily::build(grid(2, 64), 1.5, 8.0),
        Err(Error::DimensionTooSmall(2))
    ));
}

#[test]
fn forced_failure_is_reported() {
    let fam = MikadoFamily::build(grid(3, 64), 1.5, 8.0).unwrap();
    let bad = fam.with_scaled_density(1, 2.0);
    let check = verify_family(&bad).unwrap();
    assert!(!check.pass);
    assert!((check.cancellation[1][1] - 2.0).abs() < 1e-8);
    assert!((check.cancellation[0][0] - 1.0).abs() < 1e-8);
}

#[test]
fn product_l1_is_independent_of_concentration() {
    let sums: Vec<f64> = [8.0, 16.0, 32.0]
        .iter()
        .map(|&mu| {
            let fam = MikadoFamily::build(big_grid(3, 256), 1.5, mu).unwrap();
            (0..3).map(|j| fam.product_l1(j).unwrap()).sum()
        })
        .collect();
    for s in &sums {
        assert!((s / sums[0] - 1.0).abs() <= 0.05, "{sums:?}");
    }
}

#[test]
fn pipe_norms_match_full_grid_quadrature() {
    let fam = MikadoFamily::build(grid(3, 64), 1.5, 7.0).unwrap();
    for j in 0..3 {
        let pn = fam.pipe_norms(j, 3.0).unwrap();
        let theta = fam.density(j, 1);
        assert!((pn.theta - lp(&theta, 3.0).unwrap()).abs() <= 1e-12 * pn.theta);
        let gt = lp_vec(&theta.gradient(), 3.0).unwrap();
        assert!((pn.grad_theta - gt).abs() <= 1e-10 * gt);
        assert!((fam.product_l1(j).unwrap() - lp(&fam.product(j, 1), 1.0).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn dilated_pipes_keep_their_integrals() {
    let fam = MikadoFamily::build(grid(3, 96), 1.5, 7.0).unwrap();
    // factors coprime to N permute the grid: discrete integrals are unchanged
    for lambda in [1, 5, 7] {
        let prod = fam.product(2, lambda);
        assert!((prod.mean() - 1.0).abs() < 1e-12, "lambda {lambda}: {}", prod.mean());
        assert!(fam.density(0, lambda).mean().abs() < 1e-12);
    }
    // lambda = 2 samples the pipe on a sublattice with ~7 cells per radius
    let prod = fam.product(2, 2);
    assert!((prod.mean() - 1.0).abs() < 2e-2, "{}", prod.mean());
    assert!(fam.density(0, 2).mean().abs() < 1e-12);
}

#[test]
fn gamma_and_exponent_formulas() {
    assert!((gamma(4, 8.0 / 7.0) - 0.125).abs() < 1e-14);
    assert!((gamma(3, 8.0 / 7.0) + 0.25).abs() < 1e-14);
    // gamma > 0 exactly below 2(d-1)/(d+1)
    for d in 3..7 {
        let pc = 2.0 * (d - 1) as f64 / (d + 1) as f64;
        assert!(gamma(d, pc * 0.99) > 0.0);
        assert!(gamma(d, pc * 1.01) < 0.0);
        assert!(gamma(d, pc).abs() < 1e-13);
    }
    assert!(theta_exponent(3, 1.5, 3.0, 0).abs() < 1e-14);
    assert!((w_exponent(3, 1.5, 1.0, 0) + 2.0 / 3.0).abs() < 1e-14);
    assert!((-gamma(4, 8.0 / 7.0) + 0.125).abs() < 1e-14);
}

#[test]
fn scaling_exponents_match_predictions() {
    let g = big_grid(3, 512);
    let mus = [8.0, 16.0, 32.0, 64.0];
    let rep = scaling_report(g, 1.5, 1.0, 0, &mus).unwrap();
    assert!((rep.w_predicted + 2.0 / 3.0).abs() < 1e-14);
    assert!((rep.w_fitted - rep.w_predicted).abs() <= 0.1, "{rep:?}");
    assert!((rep.theta_fitted - rep.theta_predicted).abs() <= 0.1, "{rep:?}");
    let rep = scaling_report(g, 1.5, 3.0, 0, &mus).unwrap();
    assert!(rep.theta_predicted.abs() < 1e-14);
    assert!((rep.theta_fitted - rep.theta_predicted).abs() <= 0.1, "{rep:?}");
    let rep = scaling_report(g, 1.5, 2.0, 1, &mus).unwrap();
    assert!((rep.theta_fitted - rep.theta_predicted).abs() <= 0.15, "{rep:?}");
    assert!((rep.w_fitted - rep.w_predicted).abs() <= 0.15, "{rep:?}");
    assert!(matches!(
        scaling_report(g, 1.5, 2.0, 0, &mus[..2]),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn h1_norm_trend_follows_the_sign_of_gamma() {
    let mus = [9.0, 16.0, 32.0];
    // d = 4, p = 8/7: gamma = 1/8 > 0, the H1 norm decays like mu^{-1/8}
    let rep = scaling_report(big_grid(4, 256), 8.0 / 7.0, 2.0, 0, &mus).unwrap();
    assert!((rep.h1_predicted + 0.125).abs() < 1e-14);
    assert!(rep.h1_norms.windows(2).all(|w| w[1] < w[0]), "{rep:?}");
    assert!((rep.h1_fitted - rep.h1_predicted).abs() <= 0.15, "{rep:?}");
    // d = 3, p = 3/2 > 1: gamma < 0, the H1 norm grows
    let rep = scaling_report(big_grid(3, 512), 1.5, 2.0, 0, &[8.0, 16.0, 32.0, 64.0]).unwrap();
    assert!(rep.h1_predicted > 0.0);
    assert!(rep.h1_norms.windows(2).all(|w| w[1] > w[0]), "{rep:?}");
}

#[test]
fn manifest_records_family_metadata() {
    let fam = MikadoFamily::build(grid(3, 64), 1.5, 8.0).unwrap();
    let m = fam.manifest();
    assert_eq!(m.d, 3);
    assert_eq!(m.offsets.len(), 3);
    assert!((m.gamma - gamma(3, 1.5)).abs() < 1e-15);
    assert!(m.measured_m > 0.0);
    let (at, aw) = fam.amplitudes();
    assert!((at * aw - 8f64.powi(2)).abs() < 1e-9);
}
