use mediation::prelude::*;

#[test]
fn scm_json_round_trip() {
    for scm in [
        thm1_counterexample(0.3, 0.8).unwrap(),
        thm2_counterexample(0.2, 0.3, 0.5, 0.9).unwrap(),
        random_fig2_scm(11).unwrap(),
        separable_scm(&random_separable_params(4)).unwrap(),
    ] {
        let back = Scm::from_json(&scm.to_json()).unwrap();
        assert_eq!(back, scm);
        let (t, u) = (scm.counterfactuals().unwrap(), back.counterfactuals().unwrap());
        assert_eq!(effect_report(&t).unwrap(), effect_report(&u).unwrap());
    }
}

#[test]
fn scm_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let scm = random_fig1_scm(3).unwrap();
    scm.save(&path).unwrap();
    assert_eq!(Scm::load(&path).unwrap(), scm);
}

#[test]
fn dataset_csv_round_trip() {
    let scm = random_fig2_scm(5).unwrap();
    let ds = draw_samples(&scm, 500, 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    ds.save_csv(&path).unwrap();
    let back = Dataset::load_csv(&path, Some(ds.exposure())).unwrap();
    assert_eq!(back.rows, ds.rows);
    assert_eq!(back.counts(), ds.counts());
}

#[test]
fn empirical_law_converges() {
    let scm = thm1_counterexample(0.5, 0.9).unwrap();
    let truth = scm.counterfactuals().unwrap().observational_law();
    let ds = draw_samples(&scm, 1_000_000, 2024).unwrap();
    let tv = empirical_law(&ds).unwrap().total_variation(&truth);
    assert!(tv < 0.01, "total variation {tv}");
    let resampled = draw_from_law(&truth, 1_000_000, 7).unwrap();
    let tv = empirical_law(&resampled).unwrap().total_variation(&truth);
    assert!(tv < 0.01, "total variation {tv}");
}
