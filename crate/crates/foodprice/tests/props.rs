//! Property tests for the cross-cutting invariants.

use proptest::prelude::*;

use foodprice::eval::{evaluate, Scale};
use foodprice::ingest::{split_indices, Scaler};
use foodprice::linalg::Matrix;
use foodprice::stats::{anderson_darling, f_score, kde, pearson, quantile};

proptest! {
    #[test]
    fn split_covers_every_row_exactly_once(
        n in 5usize..200,
        seed in any::<u64>(),
        fraction in 0.2f64..0.9,
    ) {
        let n_train = (fraction * n as f64).floor() as usize;
        prop_assume!(n_train >= 2 && n_train < n);
        let (train, test) = split_indices(n, fraction, seed).unwrap();
        prop_assert_eq!(train.len(), n_train);
        let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        // Pure function of (n, fraction, seed).
        prop_assert_eq!((train, test), split_indices(n, fraction, seed).unwrap());
    }

    #[test]
    fn scaling_round_trips_within_tolerance(
        rows in proptest::collection::vec(
            proptest::collection::vec(-1e6f64..1e6, 3),
            4..20,
        ),
    ) {
        let x = Matrix::from_rows(&rows);
        let Ok(scaler) = Scaler::fit(&x) else {
            return Ok(()); // constant column drawn
        };
        let back = scaler.inverse_transform(&scaler.transform(&x).unwrap()).unwrap();
        for i in 0..x.rows() {
            for j in 0..x.cols() {
                let rel = (back.get(i, j) - x.get(i, j)).abs() / x.get(i, j).abs().max(1.0);
                prop_assert!(rel < 1e-12);
            }
        }
    }

    #[test]
    fn ad_statistic_ignores_affine_maps(
        sample in proptest::collection::vec(-50.0f64..50.0, 12..64),
        scale in 0.01f64..100.0,
        shift in -1e3f64..1e3,
    ) {
        let Ok(base) = anderson_darling(&sample) else {
            return Ok(());
        };
        let moved: Vec<f64> = sample.iter().map(|v| scale * v + shift).collect();
        let shifted = anderson_darling(&moved).unwrap();
        prop_assert!((base.a_squared - shifted.a_squared).abs() < 1e-8);
    }

    #[test]
    fn f_score_follows_pearson(
        pairs in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 5..40),
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let (Ok(r), Ok(assoc)) = (pearson(&x, &y), f_score(&x, &y)) else {
            return Ok(());
        };
        prop_assert!((-1.0..=1.0).contains(&r));
        if assoc.f_value.is_finite() {
            let df = (x.len() - 2) as f64;
            let expected = r * r / (1.0 - r * r) * df;
            prop_assert!((assoc.f_value - expected).abs() <= 1e-9 * expected.abs().max(1.0));
            prop_assert!((0.0..=1.0).contains(&assoc.p_value));
        }
    }

    #[test]
    fn kde_mass_stays_near_one(
        sample in proptest::collection::vec(-100.0f64..100.0, 8..60),
    ) {
        let Ok(curve) = kde(&sample, 256) else {
            return Ok(());
        };
        let mut integral = 0.0;
        for w in curve.grid.windows(2).zip(curve.density.windows(2)) {
            integral += 0.5 * (w.1[0] + w.1[1]) * (w.0[1] - w.0[0]);
        }
        prop_assert!((0.99..=1.01).contains(&integral), "integral {}", integral);
    }

    #[test]
    fn quantiles_are_monotone_in_p(
        mut sample in proptest::collection::vec(-1e4f64..1e4, 2..50),
        p1 in 0.0f64..=1.0,
        p2 in 0.0f64..=1.0,
    ) {
        sample.sort_by(f64::total_cmp);
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(quantile(&sample, lo) <= quantile(&sample, hi));
    }

    #[test]
    fn rmse_dominates_mae(
        pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..50),
    ) {
        let truth: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let pred: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let Ok(report) = evaluate("prop", &truth, &pred, Scale::Raw) else {
            return Ok(());
        };
        prop_assert_eq!(report.rmse.to_bits(), report.mse.sqrt().to_bits());
        prop_assert!(report.rmse >= report.mae);
        prop_assert!(report.r2 <= 1.0);
    }
}
