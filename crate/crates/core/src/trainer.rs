//! Self-learning loop: episode generation with the search policy, reward
//! assembly, replay memory and batched Adam updates.
//!
//! Each episode plays one full tour construction on an instance drawn
//! uniformly from the training set, labels every step with the length of
//! the tour remainder starting at the chosen city, pushes the tuples into
//! the replay ring, samples one i.i.d. batch and takes a single gradient
//! step. Everything is driven by one seeded RNG chain, so identical
//! dataset, config and seed produce bit-identical parameters.

use std::collections::VecDeque;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{PathState, Tour, TspInstance};
use crate::mcts::{CompletionEstimate, NetValue, SearchConfig, SearchError};
use crate::net::{adam_step, grad, loss, AdamState, EmbeddingParams, NetError, TrainSample};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("config error: key {key:?}: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// One replay tuple: the visited-sequence snapshot before the action, the
/// chosen city, and the reward in normalized length units.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub instance: usize,
    pub visited: Vec<usize>,
    pub action: usize,
    pub reward: f64,
}

/// Fixed-capacity ring of experiences; oldest evicted first.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    buffer: VecDeque<Experience>,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            buffer: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, exp: Experience) {
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(exp);
    }

    pub fn extend(&mut self, exps: impl IntoIterator<Item = Experience>) {
        for e in exps {
            self.push(e);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.buffer.iter()
    }

    /// Uniform with-replacement sample of `k` experiences.
    pub fn sample(&self, k: usize, rng: &mut impl Rng) -> Result<Vec<&Experience>, TrainError> {
        if self.buffer.len() < k {
            return Err(TrainError::InsufficientData(format!(
                "replay holds {} experiences, batch needs {k}",
                self.buffer.len()
            )));
        }
        Ok((0..k)
            .map(|_| &self.buffer[rng.random_range(0..self.buffer.len())])
            .collect())
    }
}

/// Training hyperparameters. Every field has a default; the key=value
/// config file may override any subset.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub max_episodes: usize,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2_coeff: f64,
    pub search: SearchConfig,
    /// Number of graphs drawn from the dataset directory for one run.
    pub graphs_per_run: usize,
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_episodes: 300,
            replay_capacity: 10_000,
            batch_size: 32,
            learning_rate: 1e-4,
            l2_coeff: 1e-4,
            search: SearchConfig::default(),
            graphs_per_run: 40,
            checkpoint_every: 50,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.replay_capacity == 0 || self.batch_size == 0 || self.graphs_per_run == 0 {
            return Err(TrainError::InvalidArgument(
                "counts must be positive".into(),
            ));
        }
        if self.checkpoint_every == 0 {
            return Err(TrainError::InvalidArgument(
                "checkpoint_every must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0) {
            return Err(TrainError::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.l2_coeff < 0.0 {
            return Err(TrainError::InvalidArgument(
                "l2 coefficient must be non-negative".into(),
            ));
        }
        self.search.validate()?;
        Ok(())
    }

    /// Parse the plain `key=value` config format; `#` starts a comment and
    /// every key is optional.
    pub fn parse(text: &str) -> Result<Self, TrainError> {
        let mut cfg = Self::default();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| TrainError::Config {
                key: line.to_string(),
                message: "expected key=value".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |message: String| TrainError::Config {
                key: key.to_string(),
                message,
            };
            match key {
                "max_episodes" => cfg.max_episodes = value.parse().map_err(|e| bad(format!("{e}")))?,
                "replay_capacity" => {
                    cfg.replay_capacity = value.parse().map_err(|e| bad(format!("{e}")))?
                }
                "batch_size" => cfg.batch_size = value.parse().map_err(|e| bad(format!("{e}")))?,
                "learning_rate" => {
                    cfg.learning_rate = value.parse().map_err(|e| bad(format!("{e}")))?
                }
                "l2_coeff" => cfg.l2_coeff = value.parse().map_err(|e| bad(format!("{e}")))?,
                "playouts" => cfg.search.playouts = value.parse().map_err(|e| bad(format!("{e}")))?,
                "c_p" => cfg.search.c_p = value.parse().map_err(|e| bad(format!("{e}")))?,
                "expansion_threshold" => {
                    cfg.search.expansion_threshold = value.parse().map_err(|e| bad(format!("{e}")))?
                }
                "graphs_per_run" => {
                    cfg.graphs_per_run = value.parse().map_err(|e| bad(format!("{e}")))?
                }
                "checkpoint_every" => {
                    cfg.checkpoint_every = value.parse().map_err(|e| bad(format!("{e}")))?
                }
                other => {
                    return Err(TrainError::Config {
                        key: other.to_string(),
                        message: "unknown key".into(),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Rewards over the positions of a complete tour, in plane units:
/// `r_t = f - g_t`, the length of the tour remainder (including the
/// closing edge) starting at position `t`. `r_0` is the full tour length;
/// `r_{n-1}` is the closing edge.
pub fn episode_rewards(inst: &TspInstance, visited: &[usize]) -> Result<Vec<f64>, TrainError> {
    let tour = Tour::new(visited.to_vec(), inst.n())
        .map_err(|e| TrainError::InvalidArgument(format!("not a complete tour: {e}")))?;
    let f = inst.tour_length(&tour);
    let mut rewards = Vec::with_capacity(visited.len());
    let mut g = 0.0;
    rewards.push(f);
    for w in visited.windows(2) {
        g += inst.edge_weight(w[0], w[1]);
        rewards.push(f - g);
    }
    Ok(rewards)
}

/// Play one full construction episode with the search policy and label
/// every step. Returns the `n - 1` experiences and the finished tour.
pub fn run_episode<E: CompletionEstimate>(
    inst: &TspInstance,
    instance_id: usize,
    est: &E,
    search: &SearchConfig,
    start: usize,
) -> Result<(Vec<Experience>, Tour), TrainError> {
    let mut state = PathState::new(inst, start)
        .map_err(|e| TrainError::InvalidArgument(e.to_string()))?;
    let mut experiences = Vec::with_capacity(inst.n() - 1);
    while !state.is_terminal() {
        let action = crate::mcts::search(&state, est, search)?;
        experiences.push(Experience {
            instance: instance_id,
            visited: state.visited().to_vec(),
            action,
            reward: f64::NAN, // filled below from the finished tour
        });
        state.push(action);
    }
    let tour = state.to_tour().expect("terminal state");
    let rewards = episode_rewards(inst, &tour.order)?;
    let unit = inst.length_unit();
    for (i, exp) in experiences.iter_mut().enumerate() {
        exp.reward = rewards[i + 1] / unit;
    }
    Ok((experiences, tour))
}

/// Per-episode log record (lengths in plane units, loss in normalized
/// units).
#[derive(Debug, Clone)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub instance: usize,
    pub tour_length: f64,
    pub probe_loss: f64,
}

impl EpisodeRecord {
    pub fn log_line(&self) -> String {
        format!(
            "episode={}\tinstance={}\ttour_length={:.6}\tprobe_loss={:.9}",
            self.episode, self.instance, self.tour_length, self.probe_loss
        )
    }
}

/// Everything a training run produces.
#[derive(Debug, Clone)]
pub struct TrainRun {
    pub initial_params: EmbeddingParams,
    pub params: EmbeddingParams,
    pub adam: AdamState,
    pub episodes: Vec<EpisodeRecord>,
}

/// Observer invoked after every episode; used for logging and periodic
/// checkpointing.
pub type EpisodeHook<'h> = dyn FnMut(&EpisodeRecord, &EmbeddingParams, &AdamState) + 'h;

/// The episode-0 network a training run with this seed starts from.
pub fn initial_params_for_seed(seed: u64) -> EmbeddingParams {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    EmbeddingParams::init_default(master.next_u64())
}

/// Train a fresh network on `dataset`. Fully deterministic per seed: one
/// ChaCha8 master stream derives the weight-init, instance-draw and
/// batch-sampling streams. Episodes all start at city 0; the update is
/// skipped while the replay holds fewer than `batch_size` experiences.
pub fn train(
    dataset: &[TspInstance],
    config: &TrainConfig,
    seed: u64,
) -> Result<TrainRun, TrainError> {
    train_with_hook(dataset, config, seed, &mut |_, _, _| {})
}

/// [`train`] with an episode observer.
pub fn train_with_hook(
    dataset: &[TspInstance],
    config: &TrainConfig,
    seed: u64,
    hook: &mut EpisodeHook<'_>,
) -> Result<TrainRun, TrainError> {
    if dataset.is_empty() {
        return Err(TrainError::InvalidArgument("empty dataset".into()));
    }
    config.validate()?;

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let init_seed = master.next_u64();
    let draw_seed = master.next_u64();
    let sample_seed = master.next_u64();
    let mut draw_rng = ChaCha8Rng::seed_from_u64(draw_seed);
    let mut sample_rng = ChaCha8Rng::seed_from_u64(sample_seed);

    let mut params = EmbeddingParams::init_default(init_seed);
    let initial_params = params.clone();
    let mut adam = AdamState::for_params(&params);
    let mut memory = ReplayMemory::new(config.replay_capacity);
    let mut probe: Vec<Experience> = Vec::new();
    let mut episodes = Vec::with_capacity(config.max_episodes);

    for episode in 0..config.max_episodes {
        let instance_id = draw_rng.random_range(0..dataset.len());
        let inst = &dataset[instance_id];
        let (experiences, tour) = {
            let est = NetValue::new(&params);
            run_episode(inst, instance_id, &est, &config.search, 0)?
        };
        if probe.is_empty() {
            // The first episode's tuples become the fixed probe batch used
            // to track the regression loss across the run.
            probe = experiences.clone();
        }
        memory.extend(experiences);

        if memory.len() >= config.batch_size {
            let batch = memory.sample(config.batch_size, &mut sample_rng)?;
            let samples = resolve_samples(dataset, batch.into_iter());
            let g = grad(&params, &samples, config.l2_coeff)?;
            adam_step(&mut params, &mut adam, &g, config.learning_rate)?;
        }

        let probe_loss = loss(
            &params,
            &resolve_samples(dataset, probe.iter()),
            config.l2_coeff,
        )?;
        let record = EpisodeRecord {
            episode,
            instance: instance_id,
            tour_length: inst.tour_length(&tour),
            probe_loss,
        };
        hook(&record, &params, &adam);
        episodes.push(record);
    }

    Ok(TrainRun {
        initial_params,
        params,
        adam,
        episodes,
    })
}

/// Resolve stored experiences against the dataset they were drawn from.
pub fn resolve_samples<'a>(
    dataset: &'a [TspInstance],
    experiences: impl Iterator<Item = &'a Experience>,
) -> Vec<TrainSample<'a>> {
    experiences
        .map(|e| TrainSample {
            inst: &dataset[e.instance],
            visited: &e.visited,
            action: e.action,
            reward: e.reward,
        })
        .collect()
}
