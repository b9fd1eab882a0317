//! Mini-batch training with Adam under teacher forcing.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{loss_and_grad, Dropout, Sample};
use super::params::{ModelConfig, Params};
use super::Seq2SeqError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Rate used once `decay_after_epoch` epochs have run.
    pub decayed_learning_rate: f64,
    pub decay_after_epoch: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Global gradient-norm ceiling.
    pub clip_norm: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 128,
            learning_rate: 1e-3,
            decayed_learning_rate: 1e-4,
            decay_after_epoch: 5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: Some(5.0),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        if epoch > self.decay_after_epoch {
            self.decayed_learning_rate
        } else {
            self.learning_rate
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub learning_rate: f64,
    pub train_loss: f64,
    pub valid_loss: Option<f64>,
    pub seconds: f64,
}

/// First and second moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Params<f32>,
    v: Params<f32>,
    t: i32,
}

impl Adam {
    pub fn new(params: &Params<f32>) -> Self {
        Adam { m: params.zeros_like(), v: params.zeros_like(), t: 0 }
    }

    pub fn step(&mut self, params: &mut Params<f32>, grads: &Params<f32>, lr: f64, tc: &TrainConfig) {
        self.t += 1;
        let (b1, b2) = (tc.beta1 as f32, tc.beta2 as f32);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let step = lr as f32 * c2.sqrt() / c1;
        let eps = tc.epsilon as f32;
        let ps = params.named_mut();
        let gs = grads.named();
        let ms = self.m.named_mut();
        let vs = self.v.named_mut();
        for (((p, g), m), v) in ps.into_iter().zip(gs).zip(ms).zip(vs) {
            for (((x, &gr), mm), vv) in p.1.data.iter_mut().zip(&g.1.data).zip(m.1.data.iter_mut()).zip(v.1.data.iter_mut())
            {
                *mm = b1 * *mm + (1.0 - b1) * gr;
                *vv = b2 * *vv + (1.0 - b2) * gr * gr;
                *x -= step * *mm / (vv.sqrt() + eps);
            }
        }
    }
}

fn batch_seed(seed: u64, epoch: usize, batch: usize) -> u64 {
    seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (batch as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
}

/// Mean per-token loss over a corpus without dropout.
pub fn corpus_loss(params: &Params<f32>, cfg: &ModelConfig, samples: &[Sample], batch_size: usize) -> f64 {
    let mut total = 0.0;
    let mut tokens = 0usize;
    for chunk in samples.chunks(batch_size.max(1)) {
        let refs: Vec<&Sample> = chunk.iter().collect();
        let (loss, n, _) = loss_and_grad(params, cfg, &refs, false, None);
        total += f64::from(loss) * n as f64;
        tokens += n;
    }
    if tokens == 0 {
        0.0
    } else {
        total / tokens as f64
    }
}

/// Runs up to `tc.epochs` epochs. `on_epoch` sees every epoch's statistics
/// and returns `false` to stop early.
pub fn train(
    params: &mut Params<f32>,
    cfg: &ModelConfig,
    tc: &TrainConfig,
    train_set: &[Sample],
    valid_set: &[Sample],
    mut on_epoch: impl FnMut(&EpochStats, &Params<f32>) -> bool,
) -> Result<Vec<EpochStats>, Seq2SeqError> {
    if train_set.is_empty() {
        return Err(Seq2SeqError::EmptyCorpus);
    }
    for s in train_set.iter().chain(valid_set) {
        if s.input.is_empty() {
            return Err(Seq2SeqError::EmptyInput);
        }
        if let Some(v) = s.input.iter().find(|v| v.len() != cfg.input_dim) {
            return Err(Seq2SeqError::DimensionMismatch { expected: cfg.input_dim, found: v.len() });
        }
        if let Some(&id) = s.target.iter().find(|&&id| id >= cfg.vocab_size) {
            return Err(Seq2SeqError::UnknownTokenId(id));
        }
    }
    let mut adam = Adam::new(params);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::new();
    for epoch in 1..=tc.epochs {
        let started = Instant::now();
        let lr = tc.learning_rate_at(epoch);
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(batch_seed(tc.seed, epoch, usize::MAX)));
        let mut total = 0.0;
        let mut tokens = 0usize;
        for (bi, idx) in order.chunks(tc.batch_size.max(1)).enumerate() {
            let batch: Vec<&Sample> = idx.iter().map(|&i| &train_set[i]).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(batch_seed(tc.seed, epoch, bi));
            let mut dropout = (cfg.dropout > 0.0).then_some(Dropout { p: cfg.dropout, rng: &mut rng });
            let (loss, n, grads) = loss_and_grad(params, cfg, &batch, true, dropout.as_mut());
            let mut grads = grads.expect("gradients requested");
            if !loss.is_finite() || !grads.all_finite() {
                return Err(Seq2SeqError::NonFiniteLoss { epoch, batch: bi, loss: f64::from(loss) });
            }
            if let Some(max) = tc.clip_norm {
                let norm = f64::from(grads.sq_norm()).sqrt();
                if norm > max {
                    grads.scale((max / norm) as f32);
                }
            }
            adam.step(params, &grads, lr, tc);
            total += f64::from(loss) * n as f64;
            tokens += n;
        }
        let stats = EpochStats {
            epoch,
            learning_rate: lr,
            train_loss: if tokens == 0 { 0.0 } else { total / tokens as f64 },
            valid_loss: (!valid_set.is_empty()).then(|| corpus_loss(params, cfg, valid_set, tc.batch_size)),
            seconds: started.elapsed().as_secs_f64(),
        };
        log::info!(
            "epoch {} lr {:.0e} train {:.4} valid {} ({:.1}s)",
            stats.epoch,
            stats.learning_rate,
            stats.train_loss,
            stats.valid_loss.map_or("-".to_string(), |v| format!("{v:.4}")),
            stats.seconds
        );
        let go_on = on_epoch(&stats, params);
        history.push(stats);
        if !go_on {
            break;
        }
    }
    Ok(history)
}
