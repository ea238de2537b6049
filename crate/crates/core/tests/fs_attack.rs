//! Coordinate Greedy feature-space attack tests, checked against the
//! exhaustive brute-force minimizer.

use std::collections::BTreeSet;

use pdfarmor_core::brute::brute_force_q;
use pdfarmor_core::fs_attack::{
    batch_attack, coordinate_greedy, cost, grids_from_training, AttackMode, FsAttackConfig,
    FsAttackError,
};
use pdfarmor_core::learner::DecisionModel;
use pdfarmor_core::rng::rng_from;
use rand::Rng;

/// Hand-rolled RBF mixture so tests do not depend on the SVM trainer.
struct RbfMix {
    centers: Vec<Vec<f64>>,
    coefs: Vec<f64>,
    gamma: f64,
    bias: f64,
}

impl DecisionModel for RbfMix {
    fn decision(&self, x: &[f64]) -> f64 {
        let mut f = self.bias;
        for (c, w) in self.centers.iter().zip(&self.coefs) {
            let d2: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            f += w * (-self.gamma * d2).exp();
        }
        f
    }
}

fn random_model(rng: &mut impl Rng, dim: usize) -> RbfMix {
    let k = rng.gen_range(2..6);
    RbfMix {
        centers: (0..k)
            .map(|_| (0..dim).map(|_| f64::from(rng.gen_range(0..2u8))).collect())
            .collect(),
        coefs: (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        gamma: rng.gen_range(0.1..1.5),
        bias: rng.gen_range(-0.5..0.5),
    }
}

fn cfg(lambda: f64, seed: u64) -> FsAttackConfig {
    let mut c = FsAttackConfig::binary(lambda, seed);
    c.restarts = 20;
    c
}

#[test]
fn greedy_matches_brute_on_small_binary_models() {
    let mut rng = rng_from(0x42);
    let mut exact = 0;
    let trials = 60;
    for t in 0..trials {
        let dim = rng.gen_range(3..9);
        let model = random_model(&mut rng, dim);
        let x_m: Vec<f64> = (0..dim).map(|_| f64::from(rng.gen_range(0..2u8))).collect();
        let c = cfg(0.05, t);
        let greedy = coordinate_greedy(&model, &x_m, &c, f64::NEG_INFINITY).unwrap();
        let brute = brute_force_q(&model, &x_m, &c).unwrap();
        assert!(
            greedy.q_value >= brute.optimum - 1e-12,
            "greedy below the exhaustive optimum: {} < {}",
            greedy.q_value,
            brute.optimum
        );
        // greedy never does worse than the unmodified seed
        let q_seed = model.decision(&x_m) + 0.0;
        assert!(greedy.q_value <= q_seed + 1e-12);
        if (greedy.q_value - brute.optimum).abs() < 1e-9 {
            exact += 1;
        }
    }
    assert!(
        exact * 100 >= trials * 95,
        "greedy matched brute in only {exact}/{trials} trials"
    );
}

#[test]
fn result_is_one_flip_local_optimum() {
    let mut rng = rng_from(0x77);
    for t in 0..20u64 {
        let dim = rng.gen_range(3..8);
        let model = random_model(&mut rng, dim);
        let x_m: Vec<f64> = (0..dim).map(|_| f64::from(rng.gen_range(0..2u8))).collect();
        let c = cfg(0.05, t);
        // negative-infinity threshold keeps the search from early-returning
        // on seeds that already evade
        let res = coordinate_greedy(&model, &x_m, &c, f64::NEG_INFINITY).unwrap();
        for i in 0..dim {
            let mut y = res.x_star.clone();
            y[i] = 1.0 - y[i];
            let q = model.decision(&y) + c.lambda * cost(&x_m, &y).unwrap();
            assert!(
                q >= res.q_value - 1e-12,
                "trial {t}: flipping coordinate {i} improves Q ({q} < {})",
                res.q_value
            );
        }
    }
}

#[test]
fn conserved_coordinates_are_held_and_match_constrained_brute() {
    let mut rng = rng_from(0x13);
    for t in 0..30u64 {
        let dim = rng.gen_range(4..9);
        let model = random_model(&mut rng, dim);
        let x_m: Vec<f64> = (0..dim).map(|_| f64::from(rng.gen_range(0..2u8))).collect();
        let mut c = cfg(0.05, t);
        c.conserved = (0..dim).filter(|_| rng.gen::<f64>() < 0.4).collect();
        let res = coordinate_greedy(&model, &x_m, &c, f64::NEG_INFINITY).unwrap();
        for &i in &c.conserved {
            assert_eq!(res.x_star[i], x_m[i], "conserved coordinate {i} moved");
        }
        let brute = brute_force_q(&model, &x_m, &c).unwrap();
        assert!(res.q_value >= brute.optimum - 1e-12);
    }
}

#[test]
fn insertion_only_never_removes() {
    let mut rng = rng_from(0x99);
    for t in 0..20u64 {
        let dim = rng.gen_range(4..9);
        let model = random_model(&mut rng, dim);
        let x_m: Vec<f64> = (0..dim).map(|_| f64::from(rng.gen_range(0..2u8))).collect();
        let mut c = cfg(0.05, t);
        c.insertion_only = true;
        let res = coordinate_greedy(&model, &x_m, &c, f64::NEG_INFINITY).unwrap();
        for (i, (&a, &b)) in x_m.iter().zip(&res.x_star).enumerate() {
            assert!(b >= a, "coordinate {i} removed under insertion-only");
        }
        let brute = brute_force_q(&model, &x_m, &c).unwrap();
        assert!(res.q_value >= brute.optimum - 1e-12);
    }
}

#[test]
fn lambda_zero_ignores_cost_and_higher_lambda_moves_less() {
    let mut rng = rng_from(5);
    let model = random_model(&mut rng, 6);
    let x_m = vec![1.0, 1.0, 1.0, 0.0, 0.0, 1.0];
    let free = cfg(0.0, 1);
    let tight = cfg(5.0, 1);
    let r_free = coordinate_greedy(&model, &x_m, &free, 0.0).unwrap();
    let r_tight = coordinate_greedy(&model, &x_m, &tight, 0.0).unwrap();
    assert!(r_free.score <= r_tight.score + 1e-12);
    assert!(
        cost(&x_m, &r_tight.x_star).unwrap() <= cost(&x_m, &r_free.x_star).unwrap() + 1e-12,
        "heavier movement penalty must not move further"
    );
}

#[test]
fn already_evading_seed_returns_immediately() {
    let model = RbfMix {
        centers: vec![vec![1.0, 1.0]],
        coefs: vec![1.0],
        gamma: 1.0,
        bias: -2.0,
    };
    let res = coordinate_greedy(&model, &[0.0, 0.0], &cfg(0.05, 0), 0.0).unwrap();
    assert!(res.evaded);
    assert!(res.flips.is_empty());
    assert_eq!(res.x_star, vec![0.0, 0.0]);
}

#[test]
fn deterministic_given_seed() {
    let mut rng = rng_from(21);
    let model = random_model(&mut rng, 7);
    let x_m = vec![1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0];
    let a = coordinate_greedy(&model, &x_m, &cfg(0.05, 9), 0.0).unwrap();
    let b = coordinate_greedy(&model, &x_m, &cfg(0.05, 9), 0.0).unwrap();
    assert_eq!(a.x_star, b.x_star);
    assert_eq!(a.q_value, b.q_value);
    let c = coordinate_greedy(&model, &x_m, &cfg(0.05, 10), 0.0).unwrap();
    // a different seed may find a different argmin but the protocol is the
    // same search; only require both are valid local optima
    assert!(c.q_value.is_finite());
}

#[test]
fn batch_results_are_order_independent() {
    let mut rng = rng_from(33);
    let model = random_model(&mut rng, 6);
    let seeds: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..6).map(|_| f64::from(rng.gen_range(0..2u8))).collect())
        .collect();
    let c = cfg(0.05, 4);
    let all = batch_attack(&model, &seeds, &c, 0.0).unwrap();
    // the same seed alone at the same index produces the same result
    let solo = batch_attack(&model, &seeds[..1], &c, 0.0).unwrap();
    assert_eq!(all[0].x_star, solo[0].x_star);
}

#[test]
fn real_grid_mode_uses_training_span() {
    let train = vec![vec![0.0, 5.0], vec![2.0, 5.0]];
    let grids = grids_from_training(&train, 3);
    assert_eq!(grids[0], vec![0.0, 1.0, 2.0]);
    assert_eq!(grids[1], vec![5.0], "constant features collapse to one value");

    // the model scores high near (2, 5); greedy should walk x[0] away on the
    // grid while x[1] has nowhere to go
    let model = RbfMix {
        centers: vec![vec![2.0, 5.0]],
        coefs: vec![3.0],
        gamma: 1.0,
        bias: -0.5,
    };
    let mut c = cfg(0.01, 2);
    c.mode = AttackMode::RealGrid { grids };
    let res = coordinate_greedy(&model, &[2.0, 5.0], &c, 0.0).unwrap();
    assert!(res.evaded, "grid walk should cross the boundary");
    assert_eq!(res.x_star[1], 5.0);
    assert!(res.x_star[0] < 2.0);
    let brute = brute_force_q(&model, &[2.0, 5.0], &c).unwrap();
    assert!((res.q_value - brute.optimum).abs() < 1e-9);
}

#[test]
fn dimension_errors() {
    let model = RbfMix {
        centers: vec![vec![0.0, 0.0]],
        coefs: vec![1.0],
        gamma: 1.0,
        bias: 0.5,
    };
    let mut c = cfg(0.05, 0);
    c.conserved = BTreeSet::from([5]);
    assert_eq!(
        coordinate_greedy(&model, &[1.0, 1.0], &c, 0.0).unwrap_err(),
        FsAttackError::DimensionMismatch
    );
    assert!(cost(&[1.0], &[1.0, 2.0]).is_err());
}
