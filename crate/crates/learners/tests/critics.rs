use std::sync::Arc;

use maac_core::{DecPomdpModel, GenerativeEnv, History, ModelEnv};
use maac_envs::{build_climb_game, build_dectiger_with, DecTigerParams};
use maac_exact::{Analysis, ChainStructure, PolicyTable};
use maac_learners::{Algorithm, Critics, TrainConfig, Trainer};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn frozen_trainer(model: &DecPomdpModel, algorithm: Algorithm, k: usize, updates: usize) -> Trainer {
    let mut env = ModelEnv::new(Arc::new(model.clone()), 100);
    let cfg = TrainConfig {
        algorithm,
        k,
        freeze_actors: true,
        batch_size: 256,
        ..TrainConfig::default()
    };
    let mut t = Trainer::new(env.info(), cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..updates {
        t.step(&mut env, &mut rng);
    }
    t
}

fn exact(model: &DecPomdpModel, k: usize) -> Analysis {
    let chain = ChainStructure::build(model, k).unwrap();
    let policy = PolicyTable::uniform(&chain);
    Analysis::new(chain, policy).unwrap()
}

#[test]
fn decentral_climb_critic_averages_over_teammate() {
    let model = build_climb_game();
    let t = frozen_trainer(&model, Algorithm::Iac, 1, 200);
    let Critics::Decentral(cs) = t.critics() else {
        panic!("IAC uses decentralized critics")
    };
    let h = History::empty();
    for (a, want) in [(0, -19.0 / 3.0), (1, -23.0 / 3.0), (2, 11.0 / 3.0)] {
        assert!((cs[0].get(&h, a) - want).abs() < 0.3, "action {a}");
    }
}

#[test]
fn learned_critics_match_exact_fixed_points_on_dectiger() {
    let model = build_dectiger_with(&DecTigerParams::default()).unwrap();
    let k = 3;
    let analysis = exact(&model, k);
    let chain = &analysis.chain;

    let iac = frozen_trainer(&model, Algorithm::Iac, k, 1000);
    let Critics::Decentral(cs) = iac.critics() else {
        panic!("IAC uses decentralized critics")
    };
    let mut checked = 0;
    for (i, c) in cs.iter().enumerate() {
        for (h, row) in c.iter() {
            let id = chain.local_id(i, h).expect("visited history is reachable");
            for (a, v) in row.iter().enumerate() {
                if c.visits(h, a) >= 10_000 {
                    let want = analysis.decentral[i].get(id, a);
                    assert!((v - want).abs() < 3.0, "agent {i} {h} a{a}: {v} vs {want}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked >= 6);

    let iacc = frozen_trainer(&model, Algorithm::Iacc, k, 1000);
    let Critics::Central(c) = iacc.critics() else {
        panic!("IACC uses a centralized critic")
    };
    let mut checked = 0;
    for (jh, row) in c.iter() {
        let id = chain.joint_id(jh).expect("visited joint history is reachable");
        for (a, v) in row.iter().enumerate() {
            if c.visits(jh, a) >= 10_000 {
                let want = analysis.central.get(id, a);
                assert!((v - want).abs() < 3.0, "joint a{a}: {v} vs {want}");
                checked += 1;
            }
        }
    }
    assert!(checked >= 9);
}
