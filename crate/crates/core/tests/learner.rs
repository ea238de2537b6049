//! SMO SVM, ROC, and l1 linear-model tests.

use pdfarmor_core::brute::naive_rbf_score;
use pdfarmor_core::learner::{
    compute_roc, selected_features, train_linear_l1, train_svm, LearnerError, SvmParams,
};
use pdfarmor_core::rng::rng_from;
use rand::Rng;

fn params(c: f64, gamma: f64) -> SvmParams {
    SvmParams {
        c,
        gamma,
        tol: 1e-3,
        max_passes: 10,
        rng_seed: 0,
    }
}

#[test]
fn xor_reaches_full_training_accuracy() {
    let xs = vec![
        vec![0.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
    ];
    let ys = vec![-1.0, 1.0, 1.0, -1.0];
    let trained = train_svm(&xs, &ys, &params(10.0, 1.0), "xor").unwrap();
    for (x, y) in xs.iter().zip(&ys) {
        let s = trained.model.score(x).unwrap();
        assert!(s * y > 0.0, "xor point {x:?} misclassified (score {s})");
    }
}

#[test]
fn score_matches_naive_kernel_sum() {
    let mut rng = rng_from(7);
    let xs: Vec<Vec<f64>> = (0..40)
        .map(|_| (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| if x.iter().sum::<f64>() > 0.0 { 1.0 } else { -1.0 })
        .collect();
    let trained = train_svm(&xs, &ys, &params(5.0, 0.5), "t").unwrap();
    for x in xs.iter().take(10) {
        let fast = trained.model.score(x).unwrap();
        let naive = naive_rbf_score(
            &trained.model.support_vectors,
            &trained.model.dual_coefs,
            trained.model.bias,
            trained.model.gamma,
            x,
        );
        assert!((fast - naive).abs() < 1e-9, "fast {fast} vs naive {naive}");
    }
}

/// KKT residual check at tolerance tol: alpha=0 -> y f(x) >= 1 - tol,
/// alpha=C -> y f(x) <= 1 + tol, else |y f(x) - 1| <= tol.
#[test]
fn kkt_conditions_hold_on_random_datasets() {
    for seed in 0..50u64 {
        let mut rng = rng_from(seed);
        let n = rng.gen_range(12..30);
        let dim = rng.gen_range(2..5);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| if x[0] + 0.3 * x[dim - 1] > 0.0 { 1.0 } else { -1.0 })
            .collect();
        if !ys.iter().any(|y| *y > 0.0) || !ys.iter().any(|y| *y < 0.0) {
            continue;
        }
        let p = params(4.0, 0.8);
        let trained = train_svm(&xs, &ys, &p, "kkt").unwrap();
        // recover per-point alphas from the stored (alpha_i * y_i)
        for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
            let alpha = trained.alphas[i];
            let margin = y * trained.model.score(x).unwrap();
            let tol = 10.0 * p.tol;
            if alpha <= 1e-9 {
                assert!(margin >= 1.0 - tol, "seed {seed} point {i}: alpha=0 but margin {margin}");
            } else if alpha >= p.c - 1e-9 {
                assert!(margin <= 1.0 + tol, "seed {seed} point {i}: alpha=C but margin {margin}");
            } else {
                assert!((margin - 1.0).abs() <= tol, "seed {seed} point {i}: free alpha margin {margin}");
            }
        }
        // recorded dual objective is nondecreasing
        for w in trained.dual_objective_history.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "dual objective decreased: {w:?}");
        }
    }
}

#[test]
fn degenerate_training_data_is_rejected() {
    let xs = vec![vec![0.0], vec![1.0]];
    assert!(matches!(
        train_svm(&xs, &[1.0, 1.0], &params(1.0, 1.0), "d"),
        Err(LearnerError::DegenerateData)
    ));
}

#[test]
fn score_dimension_mismatch() {
    let xs = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
    let trained = train_svm(&xs, &[-1.0, 1.0], &params(1.0, 1.0), "m").unwrap();
    assert!(matches!(
        trained.model.score(&[1.0]),
        Err(LearnerError::DimensionMismatch { .. })
    ));
}

#[test]
fn roc_endpoints_and_perfect_auc() {
    let scores = vec![-2.0, -1.0, 1.0, 2.0];
    let labels = vec![-1.0, -1.0, 1.0, 1.0];
    let roc = compute_roc(&scores, &labels).unwrap();
    assert!((roc.auc - 1.0).abs() < 1e-12);
    let first = roc.points.first().unwrap();
    let last = roc.points.last().unwrap();
    assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
    assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
}

#[test]
fn roc_hand_value_with_one_inversion() {
    // scores: malicious {0.9, 0.2}, benign {0.5, 0.1}; one inversion out of
    // four pairs -> AUC 0.75
    let scores = vec![0.9, 0.2, 0.5, 0.1];
    let labels = vec![1.0, 1.0, -1.0, -1.0];
    let roc = compute_roc(&scores, &labels).unwrap();
    assert!((roc.auc - 0.75).abs() < 1e-12, "auc {}", roc.auc);
}

#[test]
fn roc_ties_contribute_half() {
    let scores = vec![0.5, 0.5];
    let labels = vec![1.0, -1.0];
    let roc = compute_roc(&scores, &labels).unwrap();
    assert!((roc.auc - 0.5).abs() < 1e-12);
}

#[test]
fn roc_single_class_is_degenerate() {
    assert!(compute_roc(&[0.1, 0.2], &[1.0, 1.0]).is_err());
}

#[test]
fn l1_objective_nonincreasing_and_sparsity_grows_with_reg() {
    let mut rng = rng_from(3);
    let xs: Vec<Vec<f64>> = (0..60)
        .map(|_| (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    // only the first two coordinates matter
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| if 2.0 * x[0] - x[1] > 0.0 { 1.0 } else { -1.0 })
        .collect();
    let weak = train_linear_l1(&xs, &ys, 0.001, 500, 0.5).unwrap();
    let strong = train_linear_l1(&xs, &ys, 0.2, 500, 0.5).unwrap();
    assert!(
        selected_features(&strong).len() <= selected_features(&weak).len(),
        "stronger regularization must not select more features"
    );
    // the informative coordinate survives moderate regularization
    let mid = train_linear_l1(&xs, &ys, 0.05, 500, 0.5).unwrap();
    assert!(selected_features(&mid).contains(&0));
}

#[test]
fn l1_degenerate_data_rejected() {
    let xs = vec![vec![1.0], vec![2.0]];
    assert!(train_linear_l1(&xs, &[1.0, 1.0], 0.1, 10, 0.1).is_err());
}
