use daisy_core::algebra::{fit_basis, EmbeddingSet};
use daisy_core::analysis::{
    confusion_from_predictions, cosine_matrix, project_2d, silhouette, variance_profile, variance_profile_of_set,
};
use daisy_core::linalg::Matrix;
use daisy_core::{rng, Emotion, EmotionLabel};
use proptest::prelude::*;
use rand::Rng;

fn labeled(rows: Vec<Vec<f64>>) -> EmbeddingSet {
    let labels = (0..rows.len()).map(|i| EmotionLabel::Primary(Emotion::ALL[i % 4])).collect();
    let n = rows.len();
    EmbeddingSet::new(Matrix::from_rows(&rows).unwrap(), labels, vec![String::new(); n]).unwrap()
}

fn isotropic(m: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::seeded(seed);
    (0..m).map(|_| (0..d).map(|_| rng::normal(&mut r)).collect()).collect()
}

#[test]
fn random_predictor_confusion_rows_are_near_uniform() {
    let per_class = 2000;
    let mut r = rng::seeded(21);
    let mut pairs = Vec::new();
    for e in Emotion::ALL {
        for _ in 0..per_class {
            pairs.push((e, Emotion::ALL[r.random_range(0..4)]));
        }
    }
    let c = confusion_from_predictions(&pairs).unwrap();
    let sigma = (0.25f64 * 0.75 / per_class as f64).sqrt();
    for row in c.values {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for p in row {
            assert!((p - 0.25).abs() < 3.0 * sigma, "{p} outside 3 sigma of 0.25");
        }
    }
}

#[test]
fn isotropic_data_has_near_uniform_variance() {
    let d = 8;
    let v = variance_profile_of_set(&labeled(isotropic(20_000, d, 4))).unwrap();
    assert_eq!(v.ratios.len(), d);
    for r in &v.ratios {
        assert!((r - 1.0 / d as f64).abs() < 0.02, "{r}");
    }
    assert!(v.entropy() > 0.99 * (d as f64).ln());
}

#[test]
fn planar_data_is_recovered_from_two_coordinates() {
    let mut r = rng::seeded(5);
    let (a, b) = ([1.0, 2.0, 0.0, -1.0, 0.5], [0.0, 1.0, 1.0, 1.0, -2.0]);
    let rows: Vec<Vec<f64>> = (0..30)
        .map(|_| {
            let (s, t) = (rng::normal(&mut r), rng::normal(&mut r));
            (0..5).map(|j| 3.0 + s * a[j] + t * b[j]).collect()
        })
        .collect();
    let set = labeled(rows);
    let map = project_2d(&set).unwrap();
    let basis = fit_basis(&set, 2).unwrap();
    assert_eq!(map.points.len(), 30);
    for (i, p) in map.points.iter().enumerate() {
        let w = basis.project_slice(set.row(i)).unwrap();
        assert_eq!(p.as_slice(), w.values());
        let u = basis.reconstruct(&w, 1.0).unwrap();
        let err = u.values().iter().zip(set.row(i)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6);
    }
}

#[test]
fn projection_contracts_class_mean_distances() {
    let set = labeled(isotropic(200, 6, 9));
    let map = project_2d(&set).unwrap();
    for a in Emotion::ALL {
        for b in Emotion::ALL {
            let (ma, mb) = (set.class_mean(a).unwrap(), set.class_mean(b).unwrap());
            let full: f64 = ma.iter().zip(&mb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let (pa, pb) = (map.class_means[a.index()], map.class_means[b.index()]);
            let flat = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
            assert!(flat <= full + 1e-12);
        }
    }
}

#[test]
fn too_few_rows_for_projection() {
    assert!(project_2d(&labeled(isotropic(2, 3, 1))).is_err());
}

#[test]
fn silhouette_of_mixed_labels_is_low() {
    let s = silhouette(&labeled(isotropic(200, 4, 2))).unwrap();
    assert!(s.abs() < 0.1, "{s}");
}

fn set_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..6).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), 8..24))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn similarity_is_symmetric_with_unit_diagonal(rows in set_strategy()) {
        let set = labeled(rows);
        if let Ok(s) = cosine_matrix(&set) {
            for i in 0..4 {
                prop_assert!((s.values[i][i] - 1.0).abs() < 1e-9);
                for j in 0..4 {
                    prop_assert_eq!(s.values[i][j], s.values[j][i]);
                    prop_assert!((-1.0..=1.0).contains(&s.values[i][j]));
                }
            }
        }
    }

    #[test]
    fn confusion_is_row_stochastic(preds in prop::collection::vec(0usize..4, 4..60)) {
        let pairs: Vec<(Emotion, Emotion)> =
            preds.iter().enumerate().map(|(i, &p)| (Emotion::ALL[i % 4], Emotion::ALL[p])).collect();
        let c = confusion_from_predictions(&pairs).unwrap();
        for row in c.values {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(row.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn variance_ratios_are_sorted_and_complete(rows in set_strategy()) {
        let set = labeled(rows);
        if let Ok(b) = fit_basis(&set, 1) {
            let v = variance_profile(&b).unwrap();
            prop_assert_eq!(v.ratios.len(), set.dim());
            prop_assert!(v.ratios.windows(2).all(|p| p[0] >= p[1]));
            prop_assert!(v.ratios.iter().all(|&r| r >= 0.0));
            prop_assert!((v.ratios.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!((v.cumulative.last().unwrap() - 1.0).abs() < 1e-9);
        }
    }
}
