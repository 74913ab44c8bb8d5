//! Batched actor-critic training for IAC, IACC and JAC.

use std::collections::BTreeMap;

use maac_core::{EnvInfo, GenerativeEnv, History, JointHistory, JointSpace};
use rand::RngCore;
use serde::Serialize;

use crate::config::{Algorithm, TrainConfig};
use crate::critic::{critic_update, CriticTable, Transition};
use crate::error::Result;
use crate::rollout::{evaluate, run_episode, Actors, Episode};

/// Sparse gradient of one rollout for one actor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientRecord {
    pub run: usize,
    pub update: usize,
    /// Agent index; the joint actor of JAC is agent 0.
    pub agent: usize,
    /// `(parameter index, value)` pairs sorted by index.
    pub entries: Vec<(usize, f64)>,
    /// Parameter indices `(row, action taken)` of each step in the rollout.
    pub taken: Vec<usize>,
    pub rollout_return: f64,
}

impl GradientRecord {
    pub fn value(&self, param: usize) -> f64 {
        self.entries
            .binary_search_by_key(&param, |(p, _)| *p)
            .map_or(0.0, |i| self.entries[i].1)
    }
}

#[derive(Clone, Debug)]
pub enum Critics {
    /// One `Q_i(h_i, a_i)` per agent.
    Decentral(Vec<CriticTable<History>>),
    /// `Q(h, a)` over joint histories and joint actions.
    Central(CriticTable<JointHistory>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub update: usize,
    pub env_steps: u64,
    pub metric: String,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct UpdateOutcome {
    pub episodes: Vec<Episode>,
    pub records: Vec<GradientRecord>,
}

impl UpdateOutcome {
    pub fn mean_return(&self) -> f64 {
        let n = self.episodes.len().max(1) as f64;
        self.episodes.iter().map(Episode::undiscounted_return).sum::<f64>() / n
    }
}

#[derive(Clone, Debug)]
pub struct Trainer {
    cfg: TrainConfig,
    info: EnvInfo,
    space: JointSpace,
    actors: Actors,
    critics: Critics,
    update: usize,
    env_steps: u64,
    run: usize,
}

impl Trainer {
    pub fn new(info: &EnvInfo, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let space = JointSpace::new(&info.num_actions);
        let actors = match cfg.algorithm {
            Algorithm::Jac => Actors::joint(&info.num_actions),
            _ => Actors::independent(&info.num_actions),
        };
        let critics = match cfg.algorithm {
            Algorithm::Iac => Critics::Decentral(
                info.num_actions
                    .iter()
                    .map(|&n| CriticTable::new(n, cfg.critic_init, cfg.critic_step))
                    .collect(),
            ),
            _ => Critics::Central(CriticTable::new(space.len(), cfg.critic_init, cfg.critic_step)),
        };
        Ok(Self {
            cfg,
            info: info.clone(),
            space,
            actors,
            critics,
            update: 0,
            env_steps: 0,
            run: 0,
        })
    }

    /// Tag emitted gradient records with a run id.
    pub fn with_run(mut self, run: usize) -> Self {
        self.run = run;
        self
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn actors(&self) -> &Actors {
        &self.actors
    }

    pub fn actors_mut(&mut self) -> &mut Actors {
        &mut self.actors
    }

    pub fn critics(&self) -> &Critics {
        &self.critics
    }

    pub fn critics_mut(&mut self) -> &mut Critics {
        &mut self.critics
    }

    pub fn updates(&self) -> usize {
        self.update
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    /// One actor update: collect a batch, update critics on every
    /// transition, then compute per-rollout gradients and step the actors.
    pub fn step(&mut self, env: &mut dyn GenerativeEnv, rng: &mut dyn RngCore) -> UpdateOutcome {
        let episodes: Vec<Episode> = (0..self.cfg.batch_size)
            .map(|_| run_episode(env, &self.actors, self.cfg.k, rng))
            .collect();
        self.env_steps += episodes.iter().map(|e| e.len() as u64).sum::<u64>();
        for ep in &episodes {
            self.critic_pass(ep);
        }
        let mut records = Vec::new();
        for ep in &episodes {
            records.extend(self.rollout_gradients(ep));
        }
        if !self.cfg.freeze_actors {
            self.apply(&records);
        }
        self.update += 1;
        UpdateOutcome { episodes, records }
    }

    /// SARSA-style TD(0) updates along one episode.
    pub fn critic_pass(&mut self, ep: &Episode) {
        let gamma = self.info.gamma;
        for (t, st) in ep.steps.iter().enumerate() {
            let next = ep.steps.get(t + 1).filter(|_| !st.done);
            match &mut self.critics {
                Critics::Decentral(cs) => {
                    for (i, c) in cs.iter_mut().enumerate() {
                        let tr = Transition {
                            key: &st.histories[i],
                            action: st.actions[i],
                            reward: st.reward,
                            next: next.map(|n| (&n.histories[i], n.actions[i])),
                        };
                        critic_update(c, tr, None, gamma);
                    }
                }
                Critics::Central(c) => {
                    let tr = Transition {
                        key: &st.histories,
                        action: st.joint_action,
                        reward: st.reward,
                        next: next.map(|n| (&n.histories, n.joint_action)),
                    };
                    critic_update(c, tr, None, gamma);
                }
            }
        }
    }

    /// Critic estimate used by the actor of `agent` at one step.
    fn q_hat(&self, agent: usize, st: &crate::rollout::EnvStep) -> f64 {
        match &self.critics {
            Critics::Decentral(cs) => cs[agent].get(&st.histories[agent], st.actions[agent]),
            Critics::Central(c) => c.get(&st.histories, st.joint_action),
        }
    }

    /// `sum_t w_t grad log pi(a_t | h_t) Q_t` for every actor, with
    /// `w_t = gamma^t` when discounting is on.
    pub fn rollout_gradients(&mut self, ep: &Episode) -> Vec<GradientRecord> {
        let gamma = if self.cfg.discounted_gradient {
            self.info.gamma
        } else {
            1.0
        };
        let ret = ep.undiscounted_return();
        let n_actors = match &self.actors {
            Actors::Independent(p) => p.len(),
            Actors::Joint(_) => 1,
        };
        let mut out = Vec::with_capacity(n_actors);
        for agent in 0..n_actors {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            let mut taken = Vec::with_capacity(ep.len());
            let mut w = 1.0;
            for st in &ep.steps {
                let q = self.q_hat(agent, st);
                let (row, na, grad, action) = match &mut self.actors {
                    Actors::Independent(pis) => {
                        let pi = &mut pis[agent];
                        let h = &st.histories[agent];
                        let row = pi.row_or_insert(h);
                        (row, pi.num_actions(), pi.grad_log_prob(h, st.actions[agent]), st.actions[agent])
                    }
                    Actors::Joint(pi) => {
                        let row = pi.row_or_insert(&st.histories);
                        (row, pi.num_actions(), pi.grad_log_prob(&st.histories, st.joint_action), st.joint_action)
                    }
                };
                for (b, g) in grad.iter().enumerate() {
                    *acc.entry(row * na + b).or_insert(0.0) += w * g * q;
                }
                taken.push(row * na + action);
                w *= gamma;
            }
            out.push(GradientRecord {
                run: self.run,
                update: self.update,
                agent,
                entries: acc.into_iter().collect(),
                taken,
                rollout_return: ret,
            });
        }
        out
    }

    /// Step each actor along the batch-mean gradient of `records`.
    pub fn apply(&mut self, records: &[GradientRecord]) {
        let batch = records
            .iter()
            .map(|r| (r.update, r.agent))
            .fold(BTreeMap::<usize, usize>::new(), |mut m, (_, a)| {
                *m.entry(a).or_default() += 1;
                m
            });
        let step = self.cfg.actor_step;
        let mut sums: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for r in records {
            let n = batch[&r.agent] as f64;
            for &(p, v) in &r.entries {
                *sums.entry((r.agent, p)).or_insert(0.0) += v / n;
            }
        }
        for ((agent, p), v) in sums {
            match &mut self.actors {
                Actors::Independent(pis) => {
                    let pi = &mut pis[agent];
                    let na = pi.num_actions();
                    let mut delta = vec![0.0; na];
                    delta[p % na] = v;
                    pi.add_to_row(p / na, &delta, step);
                }
                Actors::Joint(pi) => {
                    let na = pi.num_actions();
                    let mut delta = vec![0.0; na];
                    delta[p % na] = v;
                    pi.add_to_row(p / na, &delta, step);
                }
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        let critics = match &self.critics {
            Critics::Decentral(cs) => cs.iter().all(CriticTable::all_finite),
            Critics::Central(c) => c.all_finite(),
        };
        critics && self.actors.all_finite()
    }

    pub fn evaluate(
        &self,
        env: &mut dyn GenerativeEnv,
        episodes: usize,
        rng: &mut dyn RngCore,
    ) -> (f64, f64) {
        evaluate(env, &self.actors, self.cfg.k, episodes, rng)
    }

    pub fn space(&self) -> &JointSpace {
        &self.space
    }
}

#[derive(Clone, Debug)]
pub struct TrainResult {
    pub curve: Vec<CurvePoint>,
    pub gradients: Vec<GradientRecord>,
    pub trainer: Trainer,
    /// Diagnostic when the run stopped on non-finite parameters.
    pub aborted: Option<String>,
    /// Final evaluation `(undiscounted, discounted)` mean return.
    pub final_return: (f64, f64),
}

/// Train until `total_steps` environment steps have been used, evaluating
/// every `eval_interval` updates and once more at the end.
pub fn train(
    env: &mut dyn GenerativeEnv,
    cfg: &TrainConfig,
    rng: &mut dyn RngCore,
) -> Result<TrainResult> {
    train_run(env, cfg, 0, rng)
}

pub fn train_run(
    env: &mut dyn GenerativeEnv,
    cfg: &TrainConfig,
    run: usize,
    rng: &mut dyn RngCore,
) -> Result<TrainResult> {
    let mut trainer = Trainer::new(env.info(), cfg.clone())?.with_run(run);
    let mut curve = Vec::new();
    let mut gradients = Vec::new();
    let mut aborted = None;
    let mut record = |t: &Trainer, env: &mut dyn GenerativeEnv, rng: &mut dyn RngCore| {
        let (u, d) = t.evaluate(env, cfg.eval_episodes, rng);
        for (metric, value) in [("return", u), ("discounted_return", d)] {
            curve.push(CurvePoint {
                update: t.updates(),
                env_steps: t.env_steps(),
                metric: metric.to_string(),
                value,
            });
        }
        (u, d)
    };
    let mut last = record(&trainer, env, rng);
    let mut last_eval = 0;
    while trainer.env_steps() < cfg.total_steps {
        let out = trainer.step(env, rng);
        if cfg.log_gradients {
            gradients.extend(out.records);
        }
        if !trainer.all_finite() {
            aborted = Some(format!(
                "non-finite parameters after update {} ({} env steps)",
                trainer.updates(),
                trainer.env_steps()
            ));
            break;
        }
        if trainer.updates() % cfg.eval_interval == 0 {
            last = record(&trainer, env, rng);
            last_eval = trainer.updates();
        }
    }
    if aborted.is_none() && last_eval != trainer.updates() {
        last = record(&trainer, env, rng);
    }
    Ok(TrainResult {
        curve,
        gradients,
        trainer,
        aborted,
        final_return: last,
    })
}
