//! End-to-end behaviour of the preparation pipeline, the experiment runner
//! and the ensembles.

use hotelcluster::classifiers::{tree_fit, Classifier, TreeParams};
use hotelcluster::data::schema::DATE_TIME;
use hotelcluster::data::ColumnData;
use hotelcluster::ensembles::{adaboost_fit, bagging_fit, BaggingModel};
use hotelcluster::eval::{
    accuracy, fit_cell, run_experiment_matrix, separable_fixture, stratified_split,
    synthesize_dataset, Algorithm, ExperimentConfig, Protocol,
};
use hotelcluster::model::{Artifact, ModelFile};
use hotelcluster::pipeline::{prepare, PipelineOptions};
use hotelcluster::Dataset;

fn rows_before(events: &Dataset, year: i32) -> Vec<usize> {
    use chrono::Datelike;
    match &events.column(DATE_TIME).unwrap().data {
        ColumnData::Timestamp(v) => (0..v.len()).filter(|&i| v[i].unwrap().year() < year).collect(),
        _ => unreachable!(),
    }
}

#[test]
fn held_out_rows_do_not_influence_the_model() {
    let (events, dest) = synthesize_dataset(1500, 30, 11, 1.0).unwrap();
    let opts = PipelineOptions::default();
    let full = prepare(&events, Some(&dest), &opts).unwrap();
    let trimmed_events = events.take_rows(&rows_before(&events, opts.cutoff_year.unwrap()));
    assert!(trimmed_events.n_rows() < events.n_rows());
    let trimmed = prepare(&trimmed_events, Some(&dest), &opts).unwrap();
    assert_eq!(full.features, trimmed.features);
    assert_eq!(full.labels, trimmed.labels);

    for alg in [Algorithm::naive_bayes(), Algorithm::decision_tree(5)] {
        let cfg = ExperimentConfig::new(alg, Some(5), Protocol::CrossValidation { folds: 3 }, 3);
        let a = ModelFile::new(Artifact::Classifier(fit_cell(&cfg, &full.features, &full.labels).unwrap()));
        let b = ModelFile::new(Artifact::Classifier(fit_cell(&cfg, &trimmed.features, &trimmed.labels).unwrap()));
        assert_eq!(a.to_bytes().unwrap(), b.to_bytes().unwrap());
    }
}

#[test]
fn report_is_independent_of_worker_count() {
    let (events, dest) = synthesize_dataset(800, 20, 5, 1.0).unwrap();
    let data = prepare(&events, Some(&dest), &PipelineOptions::default()).unwrap();
    let cv = Protocol::CrossValidation { folds: 3 };
    let grid = vec![
        ExperimentConfig::new(Algorithm::naive_bayes(), None, cv, 1),
        ExperimentConfig::new(Algorithm::logistic_regression(), Some(5), cv, 1),
        ExperimentConfig::new(Algorithm::Bagging { max_depth: 4, bags: 5 }, Some(5), cv, 1),
        ExperimentConfig::new(Algorithm::AdaBoost { max_depth: 2, rounds: 5 }, Some(10), cv, 1),
    ];
    let bytes = |workers| {
        let mut out = Vec::new();
        run_experiment_matrix(&grid, &data.features, &data.labels, workers)
            .unwrap()
            .write_csv(&mut out)
            .unwrap();
        out
    };
    assert_eq!(bytes(1), bytes(3));
}

#[test]
fn bagging_vote_ignores_tree_order_and_thread_count() {
    let (x, y) = separable_fixture(400, 3, 4, 2).unwrap();
    let fit = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| bagging_fit(&x, &y, 9, 5, 7).unwrap())
    };
    let model = fit(1);
    assert_eq!(model, fit(4));
    let reversed = BaggingModel {
        trees: model.trees.iter().rev().cloned().collect(),
        ..model.clone()
    };
    assert_eq!(model.predict(&x).unwrap(), reversed.predict(&x).unwrap());
}

#[test]
fn boosting_beats_its_base_tree_on_a_separable_fixture() {
    let (mut tree, mut boost) = (0.0, 0.0);
    for seed in 0..3 {
        let (x, y) = separable_fixture(600, 2, 4, seed).unwrap();
        let (train, test) = stratified_split(&y, 0.2, seed).unwrap();
        let yt: Vec<usize> = train.iter().map(|&i| y[i]).collect();
        let ys: Vec<usize> = test.iter().map(|&i| y[i]).collect();
        let (xt, xs) = (x.take_rows(&train), x.take_rows(&test));
        tree += accuracy(&tree_fit(&xt, &yt, TreeParams::new(3), None).unwrap().predict(&xs).unwrap(), &ys).unwrap();
        boost += accuracy(&adaboost_fit(&xt, &yt, 30, 3, seed).unwrap().predict(&xs).unwrap(), &ys).unwrap();
    }
    assert!(boost >= tree, "boosted {boost} < tree {tree}");
}

#[test]
fn saved_models_predict_like_the_fitted_ones() {
    let (events, dest) = synthesize_dataset(600, 20, 9, 1.0).unwrap();
    let data = prepare(&events, Some(&dest), &PipelineOptions::default()).unwrap();
    let cfg = ExperimentConfig::new(
        Algorithm::Knn { k: 3 },
        Some(5),
        Protocol::Holdout { test_fraction: 0.2 },
        4,
    );
    let model = fit_cell(&cfg, &data.features, &data.labels).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    ModelFile::new(Artifact::Classifier(model.clone())).save(&path).unwrap();
    let Artifact::Classifier(loaded) = ModelFile::load(&path).unwrap().artifact else {
        panic!("wrong artifact kind");
    };
    assert_eq!(loaded.predict(&data.features).unwrap(), model.predict(&data.features).unwrap());
}
