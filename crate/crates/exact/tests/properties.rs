//! Invariants of the exact engine on random models and random policies.

use maac_core::Policy;
use maac_exact::{
    default_max_iter, fixed_point, random_model, random_softmax_policies, Analysis,
    ChainStructure, PolicyTable, RandomModelConfig, DEFAULT_TOLERANCE,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_analysis(seed: u64, horizon: usize) -> Analysis {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = RandomModelConfig {
        horizon: Some(horizon),
        ..RandomModelConfig::default()
    };
    let model = random_model(&mut rng, &cfg);
    let chain = ChainStructure::build(&model, horizon).unwrap();
    let pis = random_softmax_policies(&chain, &mut rng, 2.0);
    let refs: Vec<&dyn Policy> = pis.iter().map(|p| p as &dyn Policy).collect();
    let policy = PolicyTable::new(&chain, &refs).unwrap();
    Analysis::new(chain, policy).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn critic_identities_hold(seed in any::<u64>(), horizon in 1usize..=3) {
        let an = random_analysis(seed, horizon);
        for i in 0..an.chain.num_agents() {
            let c = an.check(i);
            prop_assert!(c.marginal_residual < 1e-8, "marginal {}", c.marginal_residual);
            prop_assert!(c.gradient_residual < 1e-10, "gradient {}", c.gradient_residual);
            prop_assert!(c.min_variance_gap >= -1e-12, "variance gap {}", c.min_variance_gap);
        }
    }

    #[test]
    fn steady_state_is_a_distribution(seed in any::<u64>(), horizon in 1usize..=3) {
        let an = random_analysis(seed, horizon);
        let table = an.steady.pr_history_state(&an.chain);
        let total: f64 = table.iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(table.iter().all(|(_, p)| *p >= 0.0));
        for ((h, s), p) in table {
            let cond = an.steady.pr_state_given_joint(&an.chain, h)[s];
            prop_assert!((p - cond * an.steady.pr_joint(h)).abs() < 1e-9);
        }
    }

    #[test]
    fn operators_contract(seed in any::<u64>(), horizon in 1usize..=3) {
        let an = random_analysis(seed, horizon);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        for report in an.contraction(20, &mut rng).unwrap() {
            prop_assert!(report.passed(), "ratio {}", report.worst_ratio);
        }
    }

    #[test]
    fn fixed_point_ignores_initialization(seed in any::<u64>(), horizon in 1usize..=3) {
        let an = random_analysis(seed, horizon);
        let op = an.central_operator();
        let max_iter = default_max_iter(op.gamma(), DEFAULT_TOLERANCE);
        let a = fixed_point(&op, None, DEFAULT_TOLERANCE, max_iter).unwrap();
        let b = fixed_point(&op, Some(vec![100.0; op.len()]), DEFAULT_TOLERANCE, max_iter).unwrap();
        let gap = a.values.iter().zip(&b.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        prop_assert!(gap <= 2.0 * DEFAULT_TOLERANCE);
        let again = op.apply(&a.values).unwrap();
        let step = again.iter().zip(&a.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        prop_assert!(step <= DEFAULT_TOLERANCE);
    }
}

#[test]
fn infinite_horizon_chain_uses_linear_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = RandomModelConfig {
        horizon: None,
        ..RandomModelConfig::default()
    };
    let model = random_model(&mut rng, &cfg);
    let chain = ChainStructure::build(&model, 1).unwrap();
    let policy = PolicyTable::uniform(&chain);
    let an = Analysis::new(chain, policy).unwrap();
    assert_eq!(an.steady.method(), maac_exact::SolveMethod::DenseLu);
    assert!(an.steady.condition_estimate().unwrap().is_finite());
    let total: f64 = an.steady.node_mass().iter().sum();
    assert!((total - 1.0).abs() < 1e-9);
}
