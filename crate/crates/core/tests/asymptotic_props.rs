//! Expansion identities, frozen high-precision values and tail-bound
//! properties over randomized inputs.

use airy_fredholm::asymptotics::{
    consistency_identities, f1, f2, logq_asymptotic, tw_tail_constant, u_asymptotic, ModelConstants,
};
use airy_fredholm::kpz_tails::{
    determinant_to_kpz, kpz_to_determinant, lower_bound_argument, lower_bound_log_prob, upper_bound_log_prob, G,
};
use proptest::prelude::*;

/// Values of `G(s, T)` and `F_1` evaluated in 40-digit arithmetic.
const G_1_1: f64 = 0.75340077024424165912;
const G_3_4: f64 = 2.1742359707237179793;
const G_001_1: f64 = -0.20242434173368947622;
const F1_1EM3: f64 = 8.3322919790365234009e-11;
const F1_02: f64 = 0.00065092416396757513495;
/// `log 2 / 24 + zeta'(-1)`.
const TW_CONSTANT: f64 = -0.1365400111771198746548683;

#[test]
fn frozen_values() {
    for (s, tt, g) in [(1.0, 1.0, G_1_1), (3.0, 4.0, G_3_4), (0.01, 1.0, G_001_1)] {
        let v = G(s, tt).unwrap();
        assert!((v - g).abs() < 1e-13 * g.abs().max(1.0), "G({s}, {tt}) = {v}");
    }
    assert!((f1(1e-3).unwrap() / F1_1EM3 - 1.0).abs() < 1e-13);
    assert!((f1(0.2).unwrap() / F1_02 - 1.0).abs() < 1e-13);
    assert!((tw_tail_constant() - TW_CONSTANT).abs() < 1e-15);
}

fn constants() -> impl Strategy<Value = ModelConstants> {
    (0.5f64..3.0, 0.2f64..5.0, -1.0f64..1.0).prop_map(|(c_plus, c_plus_prime, j)| ModelConstants {
        c_plus,
        c_plus_prime,
        j,
    })
}

proptest! {
    #[test]
    fn identities_hold_for_random_constants(x in 0.5f64..80.0, t in 0.01f64..10.0, c in constants()) {
        let r = consistency_identities(c.scaled(x, t), x, t, &c).unwrap();
        for v in r {
            prop_assert!(v.abs() < 1e-11, "{r:?}");
        }
    }

    #[test]
    fn inconsistent_scaling_is_rejected(x in 0.5f64..80.0, t in 0.01f64..10.0) {
        let c = ModelConstants::kpz();
        prop_assert!(consistency_identities(1.01 * c.scaled(x, t), x, t, &c).is_err());
    }

    #[test]
    fn f2_is_derivative_of_f1(y in 0.01f64..1e3) {
        let h = 1e-3 * y;
        let d = (-f1(y + 2.0 * h).unwrap() + 8.0 * f1(y + h).unwrap() - 8.0 * f1(y - h).unwrap()
            + f1(y - 2.0 * h).unwrap()) / (12.0 * h);
        let exact = f2(y).unwrap();
        prop_assert!(((d - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn term_breakdowns_sum(x in 1.0f64..50.0, t in 0.05f64..5.0, c in constants()) {
        for eval in [logq_asymptotic(x, t, &c).unwrap(), u_asymptotic(x, t, &c).unwrap()] {
            let sum: f64 = eval.terms.iter().map(|t| t.value).sum();
            prop_assert!((sum - eval.total).abs() <= 1e-12 * eval.total.abs().max(1.0));
        }
    }

    #[test]
    fn coordinate_round_trip(s in -20.0f64..20.0, tt in 0.01f64..1e4) {
        let (x, t) = kpz_to_determinant(s, tt).unwrap();
        let (s2, t2) = determinant_to_kpz(x, t).unwrap();
        prop_assert!((s2 - s).abs() <= 1e-12 * s.abs().max(1.0));
        prop_assert!((t2 - tt).abs() <= 1e-12 * tt);
    }

    #[test]
    fn g_increases_in_s(s in 0.1f64..50.0, tt in 0.5f64..100.0) {
        prop_assert!(G(s * 1.01, tt).unwrap() > G(s, tt).unwrap());
    }

    #[test]
    fn bounds_are_ordered(s in 1.0f64..20.0, tt in 1.0f64..100.0, frac in 0.0f64..1.0) {
        // any p in [1, s^{3+eps} + T^eps] keeps the upper bound above the lower one
        let q = lower_bound_argument(s, tt, 0.1).unwrap();
        let p = 1.0 + frac * (q - 1.0);
        let lo = lower_bound_log_prob(s, tt, 0.1, 0.0).unwrap();
        prop_assert!(lo <= upper_bound_log_prob(s, tt, p, 0.0).unwrap());
    }

    #[test]
    fn bound_constants_shift_linearly(s in 1.0f64..20.0, tt in 1.0f64..100.0, d in -5.0f64..5.0) {
        let up0 = upper_bound_log_prob(s, tt, 2.0, 0.0).unwrap();
        let lo0 = lower_bound_log_prob(s, tt, 0.1, 0.0).unwrap();
        prop_assert!((upper_bound_log_prob(s, tt, 2.0, d).unwrap() - up0 - d).abs() < 1e-9 * up0.abs().max(1.0));
        prop_assert!((lower_bound_log_prob(s, tt, 0.1, d).unwrap() - lo0 - d).abs() < 1e-9 * lo0.abs().max(1.0));
    }
}
