use std::f64::consts::PI;

use bergman_core::geometry::{identity_residuals, inner, jacobian_real, mobius};
use bergman_core::quadrature::{integrate_weighted, j_numeric};
use bergman_core::special::{c_sigma, gamma, j_closed_form, log_gamma, theoretical_norm};
use bergman_core::{BallPoint, Complex64, KernelParams, QuadratureRule};
use proptest::prelude::*;

/// A point of modulus `radius` in `C^d`, direction taken from `raw`.
fn point(raw: &[f64], radius: f64) -> BallPoint {
    let p = BallPoint::from_real_parts(raw);
    let m = p.modulus();
    if m == 0.0 {
        BallPoint::basis(raw.len() / 2, 0).scale(radius)
    } else {
        p.scale(radius / m)
    }
}

fn ball_pair(max_radius: f64) -> impl Strategy<Value = (BallPoint, BallPoint)> {
    (1usize..=4).prop_flat_map(move |d| {
        (
            prop::collection::vec(-1.0f64..1.0, 2 * d),
            0.0..max_radius,
            prop::collection::vec(-1.0f64..1.0, 2 * d),
            0.0..max_radius,
        )
            .prop_map(|(a, ra, b, rb)| (point(&a, ra), point(&b, rb)))
    })
}

proptest! {
    #[test]
    fn automorphism_identities_hold((z, w) in ball_pair(0.999)) {
        let (a, b) = identity_residuals(&z, &w).unwrap();
        prop_assert!(a < 1e-12 && b < 1e-12, "residuals {a:e} {b:e}");
        let image = mobius(&z, &w).unwrap();
        prop_assert!(image.is_interior());
    }

    #[test]
    fn automorphism_is_an_involution((z, w) in ball_pair(0.99)) {
        let back = mobius(&z, &mobius(&z, &w).unwrap()).unwrap();
        for (x, y) in back.coords().iter().zip(w.coords()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn automorphism_swaps_origin_and_z((z, _w) in ball_pair(0.999)) {
        let o = BallPoint::origin(z.dim());
        let to_z = mobius(&z, &o).unwrap();
        let to_o = mobius(&z, &z).unwrap();
        for (x, y) in to_z.coords().iter().zip(z.coords()) {
            prop_assert!((x - y).norm() < 1e-14);
        }
        prop_assert!(to_o.modulus() < 1e-12);
    }

    #[test]
    fn jacobian_is_the_power_of_the_modulus_identity((z, w) in ball_pair(0.99)) {
        let jac = jacobian_real(&z, &w).unwrap();
        let image = mobius(&z, &w).unwrap();
        let ratio = (1.0 - image.norm_sqr()) / (1.0 - w.norm_sqr());
        let expected = ratio.powi(z.dim() as i32 + 1);
        prop_assert!(jac > 0.0);
        prop_assert!(((jac - expected) / expected).abs() < 1e-8);
    }

    #[test]
    fn inner_product_is_hermitian((z, w) in ball_pair(1.0)) {
        let a = inner(&z, &w).unwrap();
        let b = inner(&w, &z).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-15);
    }

    #[test]
    fn log_gamma_recurrence(x in 1e-3f64..150.0) {
        let lhs = log_gamma(x + 1.0).unwrap();
        let rhs = log_gamma(x).unwrap() + x.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn gamma_reflection(x in 0.01f64..0.99) {
        let prod = gamma(x).unwrap() * gamma(1.0 - x).unwrap();
        let expected = PI / (PI * x).sin();
        prop_assert!(((prod - expected) / expected).abs() < 1e-13);
    }

    #[test]
    fn gamma_duplication(x in 0.05f64..60.0) {
        let lhs = log_gamma(2.0 * x).unwrap();
        let rhs = (2.0 * x - 1.0) * 2f64.ln() + log_gamma(x).unwrap() + log_gamma(x + 0.5).unwrap()
            - 0.5 * PI.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn norm_is_linear_in_c(d in 1usize..6, sigma in -0.9f64..10.0, n in 1usize..6, c in 0.1f64..5.0) {
        let params = KernelParams::new(d, sigma, n).unwrap();
        let one = theoretical_norm(&params, 1.0).unwrap();
        let scaled = theoretical_norm(&params, c).unwrap();
        prop_assert!((scaled - c * one).abs() <= 1e-13 * scaled);
    }

    #[test]
    fn weight_constant_is_positive_and_one_at_origin(d in 1usize..8, sigma in -0.99f64..20.0) {
        prop_assert!(c_sigma(d, sigma).unwrap() > 0.0);
        prop_assert!((c_sigma(d, 0.0).unwrap() - 1.0).abs() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weighted_measure_is_a_probability(d in 1usize..=2, sigma in -0.9f64..6.0) {
        let params = KernelParams::new(d, sigma, 1).unwrap();
        let r = integrate_weighted(|_| Complex64::new(1.0, 0.0), &params, &QuadratureRule::coarse_for(d)).unwrap();
        prop_assert!((r.value - 1.0).norm() < 1e-10, "{:?}", r.value);
    }

    #[test]
    fn j_stays_below_its_supremum(c in -3.0f64..-0.2, t in -0.5f64..3.0, r in 0.0f64..0.95) {
        let z = BallPoint::basis(1, 0).scale(r);
        let numeric = j_numeric(c, t, &z, &QuadratureRule::coarse_for(1)).unwrap();
        let sup = j_closed_form(c, t, 1).unwrap();
        prop_assert!(numeric.re() <= sup * (1.0 + 1e-9) + 3.0 * numeric.error_estimate);
    }
}
