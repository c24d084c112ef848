use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hotelcluster::classifiers::{knn_fit, logreg::loss_and_gradient, nb_fit, tree_fit, Classifier, TreeParams};
use hotelcluster::coarsen::{kmeans_fit, DEFAULT_MAX_ITER, DEFAULT_TOL};
use hotelcluster::ensembles::{adaboost_fit, bagging_fit};
use hotelcluster::eval::{separable_fixture, synthesize_dataset};
use hotelcluster::features::{FeatureMatrix, Standardizer};
use hotelcluster::pipeline::{prepare, PipelineOptions};

fn fixture() -> (FeatureMatrix, Vec<usize>) {
    let (x, y) = separable_fixture(2000, 20, 10, 1).unwrap();
    (Standardizer::fit(&x).apply(&x).unwrap(), y)
}

fn learners(c: &mut Criterion) {
    let (x, y) = fixture();
    let k = 10;
    let weights = vec![0.01; k * (x.n_features() + 1)];
    c.bench_function("softmax_loss_and_gradient_2000x20", |b| {
        b.iter(|| loss_and_gradient(black_box(&x), &y, k, &weights, 1e-4))
    });
    c.bench_function("naive_bayes_fit_2000x20", |b| b.iter(|| nb_fit(black_box(&x), &y, 1.0).unwrap()));
    c.bench_function("tree_fit_depth10_2000x20", |b| {
        b.iter(|| tree_fit(black_box(&x), &y, TreeParams::new(10), None).unwrap())
    });
    c.bench_function("bagging_fit_10x_depth6", |b| b.iter(|| bagging_fit(black_box(&x), &y, 10, 6, 0).unwrap()));
    c.bench_function("adaboost_fit_10x_depth3", |b| b.iter(|| adaboost_fit(black_box(&x), &y, 10, 3, 0).unwrap()));
    let knn = knn_fit(&x, &y, 5).unwrap();
    let queries = x.take_rows(&(0..200).collect::<Vec<_>>());
    c.bench_function("knn_predict_200_of_2000", |b| b.iter(|| knn.predict(black_box(&queries)).unwrap()));
    c.bench_function("kmeans_fit_k50", |b| b.iter(|| kmeans_fit(black_box(&x), 50, 0, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap()));
}

fn pipeline(c: &mut Criterion) {
    let (events, dest) = synthesize_dataset(5000, 100, 3, 1.0).unwrap();
    c.bench_function("prepare_5000_events", |b| {
        b.iter(|| prepare(black_box(&events), Some(&dest), &PipelineOptions::default()).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = learners, pipeline
}
criterion_main!(benches);
