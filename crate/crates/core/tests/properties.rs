//! Property tests over randomly generated tables and fixtures.

use std::collections::BTreeSet;

use chrono::Datelike;
use hotelcluster::classifiers::{
    logreg::loss_and_gradient, logreg_fit, nb_fit, LogRegParams, ProbabilisticClassifier,
};
use hotelcluster::data::schema::{DATE_TIME, IS_BOOKING};
use hotelcluster::data::{
    filter_bookings, merge_on_destination, read_destinations, read_events, sample_indices,
    split_by_year, write_csv_to, ColumnData, EventSchema, LATENT_COUNT,
};
use hotelcluster::ensembles::samme_alpha;
use hotelcluster::eval::{make_folds, synthesize_dataset};
use hotelcluster::features::{correlation_matrix, FeatureKind, FeatureMatrix, Standardizer};
use proptest::prelude::*;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max_rows, 1..=max_cols).prop_flat_map(|(n, d)| {
        prop::collection::vec(prop::collection::vec(-1e3..1e3f64, d), n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn csv_round_trip(n in 1usize..120, seed in any::<u64>()) {
        let (events, dest) = synthesize_dataset(n, 20, seed, 1.0).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&events, &mut buf).unwrap();
        prop_assert_eq!(read_events(buf.as_slice(), &EventSchema::default()).unwrap(), events);
        let mut buf = Vec::new();
        write_csv_to(&dest, &mut buf).unwrap();
        prop_assert_eq!(read_destinations(buf.as_slice()).unwrap(), dest);
    }

    #[test]
    fn filter_keeps_exactly_the_bookings(n in 1usize..300, seed in any::<u64>()) {
        let (events, _) = synthesize_dataset(n, 10, seed, 1.0).unwrap();
        let flags = &events.column(IS_BOOKING).unwrap().data;
        let bookings = (0..n).filter(|&i| flags.get_i64(i) == Some(1)).count();
        let once = filter_bookings(&events).unwrap();
        prop_assert_eq!(once.n_rows(), bookings);
        let kept = &once.column(IS_BOOKING).unwrap().data;
        prop_assert!((0..once.n_rows()).all(|i| kept.get_i64(i) == Some(1)));
        prop_assert_eq!(filter_bookings(&once).unwrap(), once);
    }

    #[test]
    fn merge_preserves_rows_and_fills_latents(n in 1usize..300, seed in any::<u64>()) {
        let (events, dest) = synthesize_dataset(n, 10, seed, 1.0).unwrap();
        let merged = merge_on_destination(&events, &dest).unwrap();
        prop_assert_eq!(merged.n_rows(), events.n_rows());
        prop_assert_eq!(merged.n_cols(), events.n_cols() + LATENT_COUNT);
        prop_assert!(merged.columns()[events.n_cols()..].iter().all(|c| !c.data.has_missing()));
    }

    #[test]
    fn year_split_partitions_rows(n in 1usize..300, seed in any::<u64>(), cutoff in 2012i32..2017) {
        let (events, _) = synthesize_dataset(n, 10, seed, 1.0).unwrap();
        let split = split_by_year(&events, cutoff).unwrap();
        prop_assert_eq!(split.train.n_rows() + split.test.n_rows(), n);
        let years = |d: &hotelcluster::Dataset| match &d.column(DATE_TIME).unwrap().data {
            ColumnData::Timestamp(v) => v.iter().map(|t| t.unwrap().year()).collect::<Vec<_>>(),
            _ => unreachable!(),
        };
        prop_assert!(years(&split.train).iter().all(|&y| y < cutoff));
        prop_assert!(years(&split.test).iter().all(|&y| y >= cutoff));
    }

    #[test]
    fn sample_is_a_sorted_subset(total in 0usize..500, frac in 0.0..=1.0f64, seed in any::<u64>()) {
        let n = (total as f64 * frac) as usize;
        let idx = sample_indices(total, n, seed).unwrap();
        prop_assert_eq!(idx.len(), n);
        prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(idx.iter().all(|&i| i < total));
        prop_assert!(sample_indices(total, total + 1, seed).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn folds_partition_rows(n in 2usize..=200, k_frac in 0.0..=1.0f64, seed in any::<u64>()) {
        let k = 2 + ((n - 2) as f64 * k_frac) as usize;
        let plan = make_folds(n, k, seed).unwrap();
        let mut seen = vec![0; n];
        for f in 0..k {
            let test = plan.test_rows(f);
            let train = plan.train_rows(f);
            prop_assert_eq!(test.len() + train.len(), n);
            let train_set: BTreeSet<usize> = train.into_iter().collect();
            for i in test {
                prop_assert!(!train_set.contains(&i));
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        let sizes = plan.fold_sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn standardized_columns_have_zero_mean_unit_variance(rows in matrix(60, 5)) {
        let fm = FeatureMatrix::from_rows(&rows).unwrap();
        let z = Standardizer::fit(&fm).apply(&fm).unwrap();
        let n = rows.len() as f64;
        for j in 0..fm.n_features() {
            let col = z.column(j);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-9);
            let constant = fm.column(j).iter().all(|&x| x == fm.get(0, j));
            let want = if constant { 0.0 } else { 1.0 };
            prop_assert!((var - want).abs() < 1e-9, "column {} variance {}", j, var);
        }
    }

    #[test]
    fn correlation_is_symmetric_and_bounded(rows in matrix(40, 6)) {
        let fm = FeatureMatrix::from_rows(&rows).unwrap();
        let c = correlation_matrix(&fm).unwrap();
        for a in 0..fm.n_features() {
            prop_assert_eq!(c.entries[a][a], 1.0);
            for b in 0..fm.n_features() {
                prop_assert_eq!(c.entries[a][b], c.entries[b][a]);
                prop_assert!(c.entries[a][b].abs() <= 1.0);
            }
        }
    }

    #[test]
    fn naive_bayes_posteriors_are_distributions(
        rows in prop::collection::vec(prop::collection::vec(0u8..4, 3), 2..40),
        label_seed in prop::collection::vec(0usize..3, 40),
        alpha in 0.1..3.0f64,
    ) {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let labels = &label_seed[..rows.len()];
        let fm = FeatureMatrix::from_rows(&rows).unwrap().with_kinds(vec![FeatureKind::Categorical; 3]).unwrap();
        let model = nb_fit(&fm, labels, alpha).unwrap();
        for p in model.predict_proba(&fm).unwrap() {
            prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences(
        rows in matrix(12, 4),
        ys in prop::collection::vec(0usize..3, 12),
        ws in prop::collection::vec(-1.0..1.0f64, 15),
        l2 in 0.0..0.5f64,
    ) {
        let fm = FeatureMatrix::from_rows(&rows).unwrap();
        let scaled = Standardizer::fit(&fm).apply(&fm).unwrap();
        let (k, d) = (3, fm.n_features());
        let y = &ys[..rows.len()];
        let w = &ws[..k * (d + 1)];
        let (_, grad) = loss_and_gradient(&scaled, y, k, w, l2);
        let h = 1e-5;
        for i in 0..w.len() {
            let (mut up, mut down) = (w.to_vec(), w.to_vec());
            up[i] += h;
            down[i] -= h;
            let fd = (loss_and_gradient(&scaled, y, k, &up, l2).0 - loss_and_gradient(&scaled, y, k, &down, l2).0) / (2.0 * h);
            prop_assert!((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-4) < 1e-5);
        }
    }

    #[test]
    fn binary_samme_alpha_is_the_log_odds(error in 1e-6..0.5f64) {
        prop_assert!((samme_alpha(error, 2) - ((1.0 - error) / error).ln()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn stronger_penalty_shrinks_weights(seed in any::<u64>()) {
        let (fm, y) = hotelcluster::eval::separable_fixture(150, 3, 3, seed).unwrap();
        let norms: Vec<f64> = [0.0, 0.01, 0.1, 1.0]
            .iter()
            .map(|&l2| {
                let m = logreg_fit(&fm, &y, LogRegParams { l2, epochs: 300, ..LogRegParams::default() }).unwrap();
                // the bias is not penalized
                let stride = m.dim + 1;
                m.weights.iter().enumerate().filter(|(i, _)| i % stride != m.dim).map(|(_, w)| w * w).sum::<f64>().sqrt()
            })
            .collect();
        prop_assert!(norms.windows(2).all(|w| w[1] <= w[0]), "{norms:?}");
    }
}
