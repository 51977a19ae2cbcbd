use daisy_core::algebra::{
    fit_basis, fit_emotion_stats, fuse_gaussians, mix_secondary, mix_weighted, negate, sample_around, sample_primary,
    EmbeddingSet, EmotionSpace, EmotionStats, WeightVector,
};
use daisy_core::linalg::Matrix;
use daisy_core::{rng, Emotion, EmotionLabel, Error};
use proptest::prelude::*;

fn set_of(rows: Vec<Vec<f64>>) -> EmbeddingSet {
    let labels = (0..rows.len()).map(|i| EmotionLabel::Primary(Emotion::ALL[i % 4])).collect();
    let speakers = vec![String::new(); rows.len()];
    EmbeddingSet::new(Matrix::from_rows(&rows).unwrap(), labels, speakers).unwrap()
}

fn gaussian_rows(m: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::seeded(seed);
    // Anisotropic so the spectrum is well spread.
    (0..m).map(|_| (0..d).map(|j| rng::normal(&mut r) * (1.0 + j as f64)).collect()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn four_point_example() {
    let set = set_of(vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 2.0], vec![0.0, -2.0]]);
    let b = fit_basis(&set, 2).unwrap();
    assert_eq!(b.mean, vec![0.0, 0.0]);
    assert!((b.eigenvalues[0] - 2.0).abs() < 1e-9 && (b.eigenvalues[1] - 0.5).abs() < 1e-9);
    assert!((b.vectors[0][0]).abs() < 1e-9 && (b.vectors[0][1] - 1.0).abs() < 1e-9);
    assert!((b.vectors[1][0] - 1.0).abs() < 1e-9 && (b.vectors[1][1]).abs() < 1e-9);
}

#[test]
fn identical_rows_are_degenerate() {
    let set = set_of(vec![vec![0.5, -1.0, 2.0]; 5]);
    assert_eq!(fit_basis(&set, 1), Err(Error::ZeroVariance));
    assert_eq!(Error::ZeroVariance.to_string(), "degenerate: zero variance");
}

#[test]
fn component_count_is_checked() {
    let set = set_of(gaussian_rows(5, 3, 1));
    assert!(matches!(fit_basis(&set, 0), Err(Error::ComponentsOutOfRange { .. })));
    assert!(matches!(fit_basis(&set, 4), Err(Error::ComponentsOutOfRange { n: 4, max: 3 })));
}

#[test]
fn mean_and_axis_projection() {
    let set = set_of(gaussian_rows(40, 5, 2));
    let b = fit_basis(&set, 3).unwrap();
    let w = b.project_slice(&b.mean).unwrap();
    assert!(w.values().iter().all(|&x| x == 0.0));
    let u: Vec<f64> = b.mean.iter().zip(&b.vectors[0]).map(|(m, v)| m + 3.0 * v).collect();
    let w = b.project_slice(&u).unwrap();
    assert!((w.values()[0] - 3.0).abs() < 1e-12);
    assert!(w.values()[1..].iter().all(|x| x.abs() < 1e-12));
    assert!(matches!(b.project_slice(&[0.0; 4]), Err(Error::DimensionMismatch { expected: 5, got: 4 })));
}

#[test]
fn complete_basis_reconstructs() {
    let set = set_of(gaussian_rows(30, 6, 3));
    let b = fit_basis(&set, 6).unwrap();
    for i in 0..set.len() {
        let u = b.reconstruct(&b.project_slice(set.row(i)).unwrap(), 1.0).unwrap();
        let err = u.values().iter().zip(set.row(i)).map(|(a, x)| (a - x).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "row {i}: {err}");
    }
}

#[test]
fn scaling_collapses_to_mean() {
    let set = set_of(gaussian_rows(20, 4, 4));
    let b = fit_basis(&set, 2).unwrap();
    let w = WeightVector::new(vec![1.3, -0.4]).unwrap();
    assert_eq!(b.reconstruct(&w, 0.0).unwrap().values(), b.mean.as_slice());
    assert_eq!(b.reconstruct(&WeightVector::zeros(2), 1.0).unwrap().values(), b.mean.as_slice());
    assert!(b.reconstruct(&w, f64::NAN).is_err());
}

#[test]
fn constant_class_projects_to_unit_weight() {
    // Classes at mean +/- v1 and +/- v2 of a known basis.
    let rows = vec![
        vec![1.0, 0.0],
        vec![1.0, 0.0],
        vec![-1.0, 0.0],
        vec![-1.0, 0.0],
        vec![0.0, 0.5],
        vec![0.0, 0.5],
        vec![0.0, -0.5],
        vec![0.0, -0.5],
    ];
    let labels = [0, 0, 1, 1, 2, 2, 3, 3].map(|i| EmotionLabel::Primary(Emotion::ALL[i])).to_vec();
    let set = EmbeddingSet::new(Matrix::from_rows(&rows).unwrap(), labels, vec![String::new(); 8]).unwrap();
    let b = fit_basis(&set, 2).unwrap();
    let stats = fit_emotion_stats(&set, &b).unwrap();
    assert_eq!(stats.mean(Emotion::Joy), &[1.0, 0.0]);
    assert_eq!(stats.mean(Emotion::Anger), &[0.0, 0.5]);
    // Linearity: class mean of weights = projection of class mean embedding.
    let direct = b.project_slice(&set.class_mean(Emotion::Sadness).unwrap()).unwrap();
    assert_eq!(direct.values(), stats.mean(Emotion::Sadness));
}

#[test]
fn missing_class_is_reported() {
    let rows = gaussian_rows(6, 3, 5);
    let labels = [0, 0, 1, 1, 2, 2].map(|i| EmotionLabel::Primary(Emotion::ALL[i])).to_vec();
    let set = EmbeddingSet::new(Matrix::from_rows(&rows).unwrap(), labels, vec![String::new(); 6]).unwrap();
    let b = fit_basis(&set, 2).unwrap();
    assert_eq!(fit_emotion_stats(&set, &b), Err(Error::MissingClass("surprise")));
}

#[test]
fn zero_variance_components_are_dropped() {
    // Rank-2 data in R^4.
    let mut r = rng::seeded(6);
    let rows: Vec<Vec<f64>> = (0..40)
        .map(|_| {
            let (a, b) = (rng::normal(&mut r), rng::normal(&mut r));
            vec![a, b, a + b, 0.0]
        })
        .collect();
    let space = EmotionSpace::fit(&set_of(rows), Some(4)).unwrap();
    assert_eq!(space.stats.dim(), 2);
    assert_eq!(space.basis.components(), 2);
    assert!(space.stats.variances.iter().all(|&v| v > 1e-12));
}

#[test]
fn sample_means_follow_the_clt_bound() {
    let stats = EmotionStats::new(
        [vec![1.0, -2.0, 0.5], vec![0.0; 3], vec![3.0, 3.0, 3.0], vec![-1.0, 0.0, 1.0]],
        vec![4.0, 1.0, 0.25],
    )
    .unwrap();
    let n = 1000;
    let mut sums = [0.0; 3];
    for seed in 0..n {
        let w = sample_primary(&stats, Emotion::Joy, seed).unwrap();
        sums.iter_mut().zip(w.values()).for_each(|(s, x)| *s += x);
    }
    for i in 0..3 {
        let mean = sums[i] / n as f64;
        let bound = 4.0 * stats.variances[i].sqrt() / (n as f64).sqrt();
        assert!((mean - stats.mean(Emotion::Joy)[i]).abs() < bound, "component {i}: {mean}");
    }
    assert_eq!(sample_primary(&stats, Emotion::Joy, 9), sample_primary(&stats, Emotion::Joy, 9));
}

#[test]
fn tiny_variance_sample_sits_on_the_mean() {
    let stats = EmotionStats::new(
        [vec![1.0, 2.0], vec![0.0, 0.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
        vec![1e-12, 1e-12],
    )
    .unwrap();
    let w = sample_primary(&stats, Emotion::Joy, 1).unwrap();
    assert!((w.values()[0] - 1.0).abs() < 1e-5 && (w.values()[1] - 2.0).abs() < 1e-5);
}

#[test]
fn weighted_mixture_is_an_extension() {
    let stats = EmotionStats::new(
        [vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
        vec![4.0, 1.0],
    )
    .unwrap();
    let (m, _) = mix_weighted(&stats, Emotion::Joy, Emotion::Sadness, 0.25, 1).unwrap();
    assert!(m.is_extension());
    assert_eq!(m.mean, vec![0.75, 0.25]);
    assert_eq!(m.variances, vec![2.0, 0.5]);
    let (half, w_half) = mix_weighted(&stats, Emotion::Joy, Emotion::Sadness, 0.5, 1).unwrap();
    let (fused, w_fused) = mix_secondary(&stats, Emotion::Joy, Emotion::Sadness, 1).unwrap();
    assert_eq!((half, w_half), (fused, w_fused));
    assert!(mix_weighted(&stats, Emotion::Joy, Emotion::Sadness, 1.5, 1).is_err());
}

#[test]
fn transfer_spread() {
    let stats = EmotionStats::new([vec![0.0; 2], vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]], vec![1.0, 1.0]).unwrap();
    let w = WeightVector::new(vec![0.3, -0.7]).unwrap();
    assert_eq!(sample_around(&w, &stats, 0.0, 5).unwrap(), w);
    assert_ne!(sample_around(&w, &stats, 0.1, 5).unwrap(), w);
    assert!(sample_around(&w, &stats, -1.0, 5).is_err());
}

// Top eigenvalue by power iteration, then deflate. O(k d^2) per sweep; only
// meant for small d.
fn power_oracle(cov: &[Vec<f64>], k: usize) -> Vec<f64> {
    let d = cov.len();
    let mut a: Vec<Vec<f64>> = cov.to_vec();
    let mut out = Vec::new();
    for c in 0..k {
        let mut v: Vec<f64> = (0..d).map(|i| 1.0 + ((i + c) % 3) as f64 * 0.1).collect();
        let mut lambda = 0.0;
        for _ in 0..20_000 {
            let av: Vec<f64> = a.iter().map(|row| dot(row, &v)).collect();
            let norm = dot(&av, &av).sqrt();
            if norm == 0.0 {
                break;
            }
            let next: Vec<f64> = av.iter().map(|x| x / norm).collect();
            let delta = next.iter().zip(&v).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            v = next;
            lambda = dot(&v, &a.iter().map(|row| dot(row, &v)).collect::<Vec<_>>());
            if delta < 1e-13 {
                break;
            }
        }
        out.push(lambda);
        for i in 0..d {
            for j in 0..d {
                a[i][j] -= lambda * v[i] * v[j];
            }
        }
    }
    out
}

fn oracle_covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (m, d) = (rows.len(), rows[0].len());
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / m as f64).collect();
    (0..d)
        .map(|i| (0..d).map(|j| rows.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / m as f64).collect())
        .collect()
}

#[test]
fn eigenvalues_match_power_iteration() {
    for seed in 0..5 {
        let rows = gaussian_rows(50, 6, 100 + seed);
        let oracle = power_oracle(&oracle_covariance(&rows), 6);
        let b = fit_basis(&set_of(rows), 6).unwrap();
        for (got, want) in b.eigenvalues.iter().zip(&oracle) {
            assert!((got - want).abs() <= 1e-6 * want.abs(), "seed {seed}: {got} vs {want}");
        }
    }
}

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (3usize..6).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), 8..20))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basis_is_orthonormal(rows in rows_strategy()) {
        let d = rows[0].len();
        let b = fit_basis(&set_of(rows), d).unwrap();
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot(&b.vectors[i], &b.vectors[j]) - want).abs() < 1e-8);
            }
        }
        prop_assert!(b.eigenvalues.windows(2).all(|p| p[0] >= p[1]) && b.eigenvalues.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn pythagoras(rows in rows_strategy(), probe in prop::collection::vec(-10.0f64..10.0, 5), n in 1usize..3) {
        let d = rows[0].len();
        let b = fit_basis(&set_of(rows), n).unwrap();
        let u = &probe[..d];
        let w = b.project_slice(u).unwrap();
        let centered: Vec<f64> = u.iter().zip(&b.mean).map(|(a, m)| a - m).collect();
        let recon = b.reconstruct(&w, 1.0).unwrap();
        let resid: Vec<f64> = u.iter().zip(recon.values()).map(|(a, r)| a - r).collect();
        let lhs = dot(&centered, &centered);
        let rhs = dot(w.values(), w.values()) + dot(&resid, &resid);
        prop_assert!((lhs - rhs).abs() < 1e-6 * (1.0 + lhs));
    }

    #[test]
    fn projected_variance_is_the_eigenvalue(rows in rows_strategy()) {
        let d = rows[0].len();
        let set = set_of(rows);
        let b = fit_basis(&set, d).unwrap();
        let ws: Vec<WeightVector> = (0..set.len()).map(|i| b.project_slice(set.row(i)).unwrap()).collect();
        for c in 0..d {
            let var = ws.iter().map(|w| w.values()[c].powi(2)).sum::<f64>() / set.len() as f64;
            prop_assert!((var - b.eigenvalues[c]).abs() < 1e-6 * (1.0 + b.eigenvalues[c]));
        }
    }

    #[test]
    fn equal_precision_fusion_halves(means in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..8),
                                     vars in prop::collection::vec(1e-3f64..10.0, 8)) {
        let n = means.len();
        let (m1, m2): (Vec<f64>, Vec<f64>) = means.into_iter().unzip();
        let (mean, var) = fuse_gaussians(&m1, &vars[..n], &m2, &vars[..n]).unwrap();
        for i in 0..n {
            prop_assert!((var[i] - vars[i] / 2.0).abs() <= 1e-12 * vars[i]);
            prop_assert!((mean[i] - (m1[i] + m2[i]) / 2.0).abs() <= 1e-12 * (1.0 + m1[i].abs() + m2[i].abs()));
        }
    }

    #[test]
    fn negation_is_an_involution(w in prop::collection::vec(-1e6f64..1e6, 0..10)) {
        let w = WeightVector::new(w).unwrap();
        prop_assert_eq!(negate(&negate(&w)), w.clone());
        prop_assert_eq!(negate(&WeightVector::zeros(w.len())), WeightVector::zeros(w.len()));
    }

    #[test]
    fn scaling_and_reflection_of_offsets(w in prop::collection::vec(-3.0f64..3.0, 3), alpha in -4.0f64..4.0) {
        let b = fit_basis(&set_of(gaussian_rows(20, 3, 8)), 3).unwrap();
        let w = WeightVector::new(w).unwrap();
        let unit = b.offset(&w, 1.0).unwrap();
        let scaled = b.offset(&w, alpha).unwrap();
        prop_assert!(scaled.iter().zip(&unit).all(|(s, u)| *s == alpha * u));
        let flipped = b.offset(&negate(&w), 1.0).unwrap();
        prop_assert!(flipped.iter().zip(&unit).all(|(f, u)| *f == -u));
    }
}
