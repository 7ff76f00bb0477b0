//! Randomized invariants over the public API, kept at small case counts so
//! the whole file stays under a few seconds.

use heavytail::base::BaseDistribution;
use heavytail::fit::{pinball_loss, pinball_objective, QuantileGrid};
use heavytail::gof::{ks_measure, kuiper_measure};
use heavytail::tail::hill_estimator;
use heavytail::transform::TransformSpec;
use proptest::prelude::*;

const GAUSS: BaseDistribution = BaseDistribution::Gaussian;

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn eval_invert_round_trip(
        mu in -2.0..2.0f64,
        sigma in 0.2..2.0f64,
        u in 1.05..2.5f64,
        v in 1.05..2.5f64,
        x in -6.0..6.0f64,
    ) {
        let spec = TransformSpec::pgml(mu, sigma, u, v, 4.0).unwrap();
        let y = spec.eval(x).unwrap();
        let back = spec.invert(y).unwrap();
        prop_assert!(
            (back - x).abs() <= 1e-8 * (1.0 + x.abs()),
            "invert(eval({x})) = {back}"
        );
    }

    #[test]
    fn objective_matches_naive_recount(
        seed in 0u64..1000,
        mu in -1.0..1.0f64,
        sigma in 0.3..1.5f64,
    ) {
        let data = GAUSS.sample(60, seed).unwrap();
        let spec = TransformSpec::pgml(mu, sigma, 1.3, 1.4, 4.0).unwrap();
        let grid = QuantileGrid::equally_spaced(19).unwrap();
        let fast = pinball_objective(&spec, &GAUSS, &data, &grid).unwrap();
        let mut naive = 0.0;
        for &alpha in grid.levels() {
            let q = spec.eval(GAUSS.quantile(alpha).unwrap()).unwrap();
            let total: f64 = data.iter().map(|&y| pinball_loss(y, q, alpha)).sum();
            naive += total / data.len() as f64;
        }
        prop_assert!(
            (fast - naive).abs() <= 1e-9 * (1.0 + naive.abs()),
            "sorted-series objective {fast} vs naive {naive}"
        );
    }

    #[test]
    fn ks_and_kuiper_are_affine_invariant(
        seed in 0u64..1000,
        scale in 0.1..5.0f64,
        shift in -3.0..3.0f64,
    ) {
        let data = GAUSS.sample(80, seed).unwrap();
        let model = |y: f64| GAUSS.cdf((y - 0.3) / 1.2);
        let mapped: Vec<f64> = data.iter().map(|&y| scale * y + shift).collect();
        let mapped_model = |y: f64| GAUSS.cdf(((y - shift) / scale - 0.3) / 1.2);

        let (dp, dm, ks) = ks_measure(&data, model).unwrap();
        let (mdp, mdm, mks) = ks_measure(&mapped, mapped_model).unwrap();
        let k = kuiper_measure(&data, model).unwrap();
        let mk = kuiper_measure(&mapped, mapped_model).unwrap();

        prop_assert!((dp - mdp).abs() <= 1e-12);
        prop_assert!((dm - mdm).abs() <= 1e-12);
        prop_assert!((ks - mks).abs() <= 1e-12);
        prop_assert!((k - mk).abs() <= 1e-12);
    }

    #[test]
    fn base_quantile_cdf_round_trip(
        alpha in 0.001..0.999f64,
        dof in 2.5..30.0f64,
    ) {
        for base in [
            GAUSS,
            BaseDistribution::Exponential,
            BaseDistribution::student_t(dof).unwrap(),
        ] {
            let x = base.quantile(alpha).unwrap();
            prop_assert!(
                (base.cdf(x) - alpha).abs() < 1e-9,
                "{base:?} round trip at {alpha}"
            );
        }
    }

    #[test]
    fn hill_is_scale_equivariant(
        seed in 0u64..500,
        scale in 0.01..100.0f64,
    ) {
        let t2 = BaseDistribution::student_t(2.0).unwrap();
        let samples = t2.sample(2000, seed).unwrap();
        let scaled: Vec<f64> = samples.iter().map(|&x| scale * x).collect();
        let plain = hill_estimator(&samples, 40).unwrap();
        let moved = hill_estimator(&scaled, 40).unwrap();
        prop_assert!(
            (plain - moved).abs() <= 1e-9 * plain.abs(),
            "hill {plain} became {moved} under scale {scale}"
        );
    }
}
