use std::f64::consts::PI;

use mikado_core::counterexample::*;
use mikado_core::quad::GaussLegendre;
use proptest::prelude::*;

#[test]
fn standard_pair_meets_constraints() {
    let pair = make_alpha_beta();
    assert!(pair.constraints_ok(), "{:?}", pair.constraint_residuals);
    // independent 1-d oracle in u = omega_3: int alpha^2 beta = 2 pi int u^2 beta(u) du
    let gl = GaussLegendre::new(8, -1.0, 1.0);
    let a2b = 2.0 * PI * gl.integrate(|u| u * u * (-15.0 / (8.0 * PI)) * (3.0 * u * u - 1.0));
    assert!((a2b + 2.0).abs() < 1e-13);
    let (north, _) = pair.beta.eval(1.0);
    assert!((north + 15.0 / (4.0 * PI)).abs() < 1e-14);
    let (half, _) = pair.beta.eval(0.5);
    assert!((half + 15.0 / (8.0 * PI) * (0.75 - 1.0)).abs() < 1e-14);
}

#[test]
fn sphere_rule_exactness() {
    let rule = SphereRule::new(16);
    assert!((rule.integrate(|_| 1.0) - 4.0 * PI).abs() < 1e-12);
    // moments 2 prod Gamma((a_i + 1)/2) / Gamma((sum a_i + 3)/2)
    let gamma_half = |k: u32| -> f64 {
        // Gamma(k/2) for odd k
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < k as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    };
    let exact = 2.0 * gamma_half(5) * gamma_half(5) * gamma_half(9) / gamma_half(19);
    let got = rule.integrate(|w| w[0].powi(4) * w[1].powi(4) * w[2].powi(8));
    assert!((got - exact).abs() < 1e-14, "{got} vs {exact}");
}

#[test]
fn fields_and_gradient_energy() {
    let set = build_fields(make_alpha_beta(), 32, 16).unwrap();
    assert!(set.boundary_values().iter().all(|v| v.abs() < 1e-15));
    assert!(set.b.iter().all(|b| b.iter().all(|c| c.is_finite())));
    let e = set.grad_energy();
    assert!((e - 64.0 * PI / 15.0).abs() <= 1e-5 * 64.0 * PI / 15.0, "{e}");
    // radial-spherical factorization: 16/9 |alpha|^2 + 32/45 |grad_S alpha|^2
    let rule = SphereRule::new(16);
    let a2 = rule.integrate(|w| w[2] * w[2]);
    let gs2 = rule.integrate(|w| 1.0 - w[2] * w[2]);
    assert!((e - (16.0 / 9.0 * a2 + 32.0 / 45.0 * gs2)).abs() < 1e-12);
}

#[test]
fn gradient_matches_finite_differences() {
    let pair = make_alpha_beta();
    let x = [0.3, -0.2, 0.45];
    let g = pair.grad_v_at(&x);
    let h = 1e-6;
    for i in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[i] += h;
        xm[i] -= h;
        let fd = (pair.v_at(&xp) - pair.v_at(&xm)) / (2.0 * h);
        assert!((fd - g[i]).abs() < 1e-8, "component {i}");
    }
}

#[test]
fn energy_defect_is_one_unit() {
    let set = build_fields(make_alpha_beta(), 32, 16).unwrap();
    let d = energy_defect(&set);
    assert!((d.defect.abs() - 1.0).abs() <= 1e-3, "{d:?}");
    assert!((d.drift_term - 1.0).abs() < 1e-10);
    let fine = energy_defect(&build_fields(make_alpha_beta(), 64, 32).unwrap());
    assert!((fine.defect - d.defect).abs() <= 1e-5);
}

#[test]
fn defect_vanishes_without_drift() {
    let alpha = make_alpha_beta().alpha;
    let pair = SphericalPair::new(alpha, Zonal::zero());
    let d = energy_defect(&build_fields(pair, 32, 16).unwrap());
    assert_eq!(d.defect, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn defect_is_quadratic_in_alpha(t in -5.0f64..5.0) {
        let base = make_alpha_beta();
        let pair = SphericalPair::new(base.alpha.scaled(t), base.beta.clone());
        let d = energy_defect(&build_fields(pair, 32, 16).unwrap());
        prop_assert!((d.defect + t * t).abs() <= 1e-10 * (1.0 + t * t));
    }
}

#[test]
fn flux_vanishes_on_spheres() {
    let set = build_fields(make_alpha_beta(), 32, 16).unwrap();
    for r in FLUX_RADII {
        assert!(set.flux(r).abs() <= 1e-9, "r = {r}");
    }
}

#[test]
fn drift_norms_blow_up_at_three_halves() {
    let pair = make_alpha_beta();
    let rows = lp_norms(&pair, &LP_EXPONENTS, &LP_CUTOFFS, 64).unwrap();
    for row in &rows {
        assert!(row.partial.windows(2).all(|w| w[1].1 > w[0].1), "p = {}", row.p);
        let e = 3.0 - 2.0 * row.p;
        let angular = row.total.unwrap() * e;
        for &(r0, v) in &row.partial {
            let exact = angular * (1.0 - r0.powf(e)) / e;
            assert!((v - exact).abs() <= 1e-10 * exact, "p = {} r0 = {r0}", row.p);
        }
    }
    let totals: Vec<f64> = rows.iter().map(|r| r.total.unwrap()).collect();
    assert!(totals.windows(2).all(|w| w[1] > w[0]), "{totals:?}");
    assert!(totals[totals.len() - 1] > 100.0 * totals[0]);
    let critical = lp_norms(&pair, &[1.5], &LP_CUTOFFS, 64).unwrap();
    assert!(critical[0].total.is_none());
    let c = &critical[0].partial;
    // logarithmic growth at p = 3/2
    let slope = (c[2].1 - c[1].1) / (c[1].1 - c[0].1);
    assert!((slope - 2.0).abs() < 1e-8, "{slope}");
}

#[test]
fn report_collects_everything() {
    let rep = run(32, 16).unwrap();
    assert!((rep.defect.abs() - 1.0).abs() <= 1e-3);
    assert_eq!(rep.flux.len(), 3);
    assert_eq!(rep.lp_norms.len(), LP_EXPONENTS.len());
    assert!(build_fields(make_alpha_beta(), 16, 16).is_err());
    assert!(build_fields(make_alpha_beta(), 32, 8).is_err());
    assert!(Zonal::new(vec![0.0; 10]).is_err());
}
