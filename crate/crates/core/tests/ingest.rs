mod common;

use faithful::ingest::{
    parse_csv, problem_from_json, problem_to_json, split_and_standardize, LabelColumn, SplitSpec,
};
use faithful::Error;

#[test]
fn pima_splits_614_154_and_standardizes() {
    let problem = common::load("pima").unwrap();
    assert_eq!(problem.len(), 768);
    let split = split_and_standardize(&problem, &SplitSpec::default()).unwrap();
    assert_eq!((split.train.len(), split.test.len()), (614, 154));
    let n = split.train.len() as f64;
    for j in 0..problem.num_features() {
        let col: Vec<f64> = split.train.features().iter().map(|r| r[j]).collect();
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-9);
        assert!((var.sqrt() - 1.0).abs() < 1e-9);
    }
    let again = split_and_standardize(&problem, &SplitSpec::default()).unwrap();
    assert_eq!(split.test_rows, again.test_rows);
    let other = split_and_standardize(&problem, &SplitSpec { seed: 7, ..SplitSpec::default() }).unwrap();
    assert_ne!(split.test_rows, other.test_rows);
}

#[test]
fn wdbc_has_thirty_features() {
    let problem = common::load("wdbc").unwrap();
    assert_eq!((problem.len(), problem.num_features()), (569, 30));
}

#[test]
fn parse_errors_name_the_cell() {
    let text = "a,b,label\n1,2,0\n3,x,1\n";
    match parse_csv(text.as_bytes(), &LabelColumn::Last) {
        Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 1)),
        other => panic!("unexpected {other:?}"),
    }
    let three = "a,label\n1,x\n2,y\n3,z\n";
    assert!(parse_csv(three.as_bytes(), &LabelColumn::Last).is_err());
}

#[test]
fn named_label_column_and_json_round_trip() {
    let text = "y,a,b\nyes,1.5,2\nno,0.25,-1\nyes,3,0\n";
    let p = parse_csv(text.as_bytes(), &LabelColumn::Named("y".into())).unwrap();
    assert_eq!(p.feature_names(), ["a", "b"]);
    assert_eq!(p.labels(), ["no", "yes"]);
    assert_eq!(p.targets(), [1, 0, 1]);
    let back = problem_from_json(&problem_to_json(&p).unwrap()).unwrap();
    assert_eq!(back, p);
}
