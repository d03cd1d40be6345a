use saddlepoint::adaptive::{run_adaptive, AdaptiveConfig, AdamHyper, AdamState, Optimizer, UnconstrainedProblem};

fn lin(t: &[f64]) -> Vec<f64> {
    vec![t[1], -t[0]]
}

#[test]
fn first_pass_ignores_second_moments() {
    let h = AdamHyper { beta1: 0.3, lr: 0.05, lr2: 0.05, ..AdamHyper::default() };
    let mut a = AdamState::new(vec![0.4, -1.2], h).unwrap();
    for _ in 0..5 {
        a.optimistic_adam_step(&lin).unwrap();
    }
    let mut b = a.clone();
    b.m2 = vec![9.0, -9.0];
    b.v2 = vec![100.0, 0.001];
    let (wa, wb) = (a.clone().optimistic_adam_step(&lin).unwrap(), b.optimistic_adam_step(&lin).unwrap());
    assert_eq!(wa, wb);
}

#[test]
fn second_pass_ignores_first_moments() {
    let h = AdamHyper { beta1: 0.3, lr: 0.05, lr2: 0.02, ..AdamHyper::default() };
    let mut s = AdamState::new(vec![0.4, -1.2], h).unwrap();
    s.optimistic_adam_step(&lin).unwrap();
    s.t += 1;
    let waiting = s.first_pass(&lin(&s.theta.clone()), false);
    let g2 = lin(&waiting);
    let mut perturbed = s.clone();
    perturbed.m = vec![5.0, 5.0];
    perturbed.v = vec![0.0, 7.0];
    assert_eq!(s.second_pass(&g2, false), perturbed.second_pass(&g2, false));
}

#[test]
fn degenerate_betas_give_normalized_extra_gradient() {
    // β1 = β2 = 0: each pass moves every coordinate by η·g/(|g| + ε)
    let eta = 0.01;
    let eps = 1e-8;
    let h = AdamHyper { beta1: 0.0, beta2: 0.0, eps, lr: eta, lr2: eta, paper_literal: false };
    let mut s = AdamState::new(vec![0.3, 0.7], h).unwrap();
    for _ in 0..50 {
        let theta = s.theta.clone();
        let g1 = lin(&theta);
        let waiting: Vec<f64> = theta.iter().zip(&g1).map(|(t, g)| t - eta * g / (g.abs() + eps)).collect();
        let g2 = lin(&waiting);
        let expected: Vec<f64> = theta.iter().zip(&g2).map(|(t, g)| t - eta * g / (g.abs() + eps)).collect();
        let got_waiting = s.optimistic_adam_step(&lin).unwrap();
        for i in 0..2 {
            assert!((got_waiting[i] - waiting[i]).abs() < 1e-15);
            assert!((s.theta[i] - expected[i]).abs() < 1e-15);
        }
    }
}

#[test]
fn evaluation_counts_per_optimizer() {
    let p = UnconstrainedProblem::quadratic_saddle();
    for o in Optimizer::ALL {
        let cfg = AdaptiveConfig::new(o, 25, vec![1.0, -1.0]).with_record_every(5);
        let rec = run_adaptive(&p, &cfg).unwrap();
        assert_eq!(rec.rows.len(), 5);
        assert_eq!(rec.rows.last().unwrap().queries, 25 * o.evaluations_per_step());
        assert_eq!(rec.has_half_steps(), o.is_optimistic());
    }
}

#[test]
fn zero_field_keeps_theta() {
    let p = UnconstrainedProblem::zero(2);
    for o in Optimizer::ALL {
        let rec = run_adaptive(&p, &AdaptiveConfig::new(o, 100, vec![1.0, 1.0])).unwrap();
        assert_eq!(rec.final_iterate(), &[1.0, 1.0]);
    }
}

#[test]
fn larger_rate_separates_optimistic_from_vanilla() {
    let p = UnconstrainedProblem::bilinear();
    let hyper = AdamHyper::default().with_lr(0.01);
    let norm = |o| {
        let rec = run_adaptive(&p, &AdaptiveConfig::new(o, 10_000, vec![1.0, 1.0]).with_hyper(hyper).with_record_every(10_000)).unwrap();
        rec.final_distances()[0]
    };
    let (vanilla, optimistic) = (norm(Optimizer::Adam), norm(Optimizer::OptimisticAdam));
    assert!(optimistic < 0.01, "{optimistic}");
    assert!(vanilla > 5.0 * optimistic);
}
