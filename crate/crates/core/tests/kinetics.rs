use fracchem_core::kinetics::{admissibility_report, power_law, KineticFunction};
use proptest::prelude::*;

#[test]
fn finite_differences_match_coded_derivatives() {
    let h = 1e-5;
    for r in [1.0, 1.25, 1.5, 1.75, 2.0] {
        let f = power_law(r).unwrap();
        for i in 0..=45 {
            let y = 0.5 + 0.1 * i as f64;
            for order in 0..3 {
                let fd = (f.eval(order, y + h) - f.eval(order, y - h)) / (2.0 * h);
                let exact = f.eval(order + 1, y);
                assert!(
                    (fd - exact).abs() <= 1e-7,
                    "r={r} y={y} order={order}: {fd} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn uniform_lower_bound_only_for_linear_kinetics() {
    for r in [1.0, 1.2, 1.5, 2.0] {
        let rep = admissibility_report(&power_law(r).unwrap(), 0.5, 3.0, 500).unwrap();
        if r == 1.0 {
            assert_eq!(rep.uniform_lower_c1, Some(1.0));
        } else {
            assert!(rep.uniform_lower_c1.is_none(), "r={r}");
        }
    }
}

#[test]
fn polynomial_kinetics_report() {
    let f: KineticFunction = "f=0,1,0.5".parse().unwrap();
    // f' = 1 + y, so y / f'(y) is increasing.
    let rep = admissibility_report(&f, 1.0, 3.0, 200).unwrap();
    assert!((rep.gamma_lower - 0.5).abs() < 1e-14);
    assert!((rep.gamma_upper - 0.75).abs() < 1e-14);
    assert_eq!(rep.uniform_lower_c1, Some(1.0));
    assert_eq!(rep.derivative_sup_norms, [4.0, 1.0, 0.0, 0.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_bounds_match_closed_form(r in 1.0..=2.0f64, a in 0.0..3.0f64, width in 0.1..5.0f64) {
        let b = a + width;
        let rep = admissibility_report(&power_law(r).unwrap(), a, b, 1000).unwrap();
        // y / f'(y) = y^{2-r}, monotone in y.
        let lo = a.max(1e-9).powf(2.0 - r);
        let hi = b.powf(2.0 - r);
        prop_assert!(rep.gamma_lower <= rep.gamma_upper);
        prop_assert!((rep.gamma_lower - lo.min(hi)).abs() <= 1e-9);
        prop_assert!((rep.gamma_upper - lo.max(hi)).abs() <= 1e-9);
        prop_assert!(rep.monotone);
    }
}
