mod common;

use synthcal::data::{load_csv, stratified_split};

use common::{data_dir, diagnostic_config, original_config, prepared};

#[test]
fn original_dataset_shape() {
    let (t, s) = load_csv(
        &data_dir().join("breast-cancer-wisconsin.csv"),
        "class",
        "?",
    )
    .unwrap();
    assert_eq!(t.n_rows(), 699);
    assert_eq!(s.n_features(), 10);
    assert_eq!(s.n_classes(), 2);
    assert_eq!(t.n_missing(), 16);
}

#[test]
fn diagnostic_dataset_shape() {
    let (t, s) = load_csv(&data_dir().join("wdbc.csv"), "diagnosis", "").unwrap();
    assert_eq!(t.n_rows(), 569);
    assert_eq!(s.n_features(), 30);
    assert_eq!(s.n_classes(), 2);
    assert_eq!(t.n_missing(), 0);
}

#[test]
fn original_split_preserves_class_ratio() {
    let (t, s) = load_csv(
        &data_dir().join("breast-cancer-wisconsin.csv"),
        "class",
        "?",
    )
    .unwrap();
    let split = stratified_split(&t, s.n_classes(), 0.2, 42).unwrap();
    assert_eq!(split.test.n_rows(), 140);
    let total = t.class_counts(2);
    let test = split.test.class_counts(2);
    for c in 0..2 {
        assert!((test[c] as f64 - 0.2 * total[c] as f64).abs() <= 1.0);
    }
}

#[test]
fn prepared_training_features_in_unit_interval() {
    for config in [original_config(), diagnostic_config()] {
        let p = prepared(&config);
        let f = &p.split.train.features;
        assert!(f.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(p.split.train.n_missing() + p.split.test.n_missing(), 0);
        let back = p.norm.apply(&p.norm.invert(f));
        assert!(back.max_abs_diff(f) < 1e-12);
    }
}
