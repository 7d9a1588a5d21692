//! Training loop: batch sampling, augmentation, target construction, loss
//! and Adam updates with separate encoder/decoder learning rates.
//!
//! The trainer owns the parameters exclusively and runs gradient steps
//! serially; all data generation is pure and could be farmed out to workers.
//! No gradient flows through target construction: targets are binary masks
//! computed from detached probability values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::augment;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::losses::{self, LossConfig};
use crate::scenegen::{self, PairConfig, SceneConfig, TwoViewPair};
use crate::targets::{self, ProbMap, TargetConfig, TargetMap, TopkScope};

use super::net::{to_prob, Gradients, ScoreNet, ENCODER_LAYERS};

/// Training hyperparameters. Desk-scale defaults; the reference recipe uses
/// 512 px images, 10000 pairs, batch 7, lr 1e-4 (decoder) / 2e-5 (encoder).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Total image pairs consumed over the run.
    pub pairs_total: usize,
    pub batch_size: usize,
    pub lr_decoder: f64,
    pub lr_encoder: f64,
    /// Square training resolution in pixels (must be divisible by 4).
    pub train_resolution: usize,
    /// Random-crop ablation: render at this larger size and crop
    /// `train_resolution` windows. Off by default.
    pub crop_from: Option<usize>,
    pub seed: u64,
    /// Number of evenly spaced checkpoints saved over the run.
    pub checkpoint_count: usize,
    pub target: TargetConfig,
    pub loss: LossConfig,
    pub aug_rot: bool,
    pub aug_flip: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            pairs_total: 10_000,
            batch_size: 7,
            lr_decoder: 1e-4,
            lr_encoder: 2e-5,
            train_resolution: 128,
            crop_from: None,
            seed: 0,
            checkpoint_count: 10,
            target: TargetConfig::default(),
            loss: LossConfig::default(),
            aug_rot: true,
            aug_flip: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.pairs_total < self.batch_size {
            return Err(Error::Config(
                "need pairs_total >= batch_size >= 1".into(),
            ));
        }
        if self.train_resolution % 4 != 0 {
            return Err(Error::Config(
                "train_resolution must be divisible by 4".into(),
            ));
        }
        if let Some(cf) = self.crop_from {
            if cf < self.train_resolution {
                return Err(Error::Config(
                    "crop_from must be >= train_resolution".into(),
                ));
            }
        }
        if self.checkpoint_count == 0 {
            return Err(Error::Config("checkpoint_count must be >= 1".into()));
        }
        self.target.validate()?;
        self.loss.validate()
    }

    /// Applies the v1-compat bundle: no train-time NMS, batch-scope top-k,
    /// no augmentation.
    pub fn apply_v1_compat(&mut self) {
        self.target.nms_window = 1;
        self.target.topk_scope = TopkScope::PerBatch;
        self.aug_rot = false;
        self.aug_flip = false;
    }
}

/// Source of training pairs. Implementations must be pure per index so that
/// training stays deterministic.
pub trait PairSource {
    fn num_pairs(&self) -> usize;
    fn pair(&self, idx: usize) -> Result<TwoViewPair>;
}

/// Lazily generated synthetic dataset: one fresh scene per pair index,
/// derived deterministically from `base_seed`.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub scene: SceneConfig,
    pub pairs: PairConfig,
    pub base_seed: u64,
    pub num_pairs: usize,
}

impl SyntheticDataset {
    pub fn new(scene: SceneConfig, pairs: PairConfig, base_seed: u64, num_pairs: usize) -> Self {
        Self {
            scene,
            pairs,
            base_seed,
            num_pairs,
        }
    }
}

impl PairSource for SyntheticDataset {
    fn num_pairs(&self) -> usize {
        self.num_pairs
    }

    fn pair(&self, idx: usize) -> Result<TwoViewPair> {
        let seed = self
            .base_seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(idx as u64);
        // Overlap-band sampling can fail for an unlucky scene; retry with
        // salted seeds, still a pure function of (base_seed, idx).
        let mut last = Error::SamplingExhausted { attempts: 0 };
        for salt in 0..8u64 {
            let scene = scenegen::generate_scene(&self.scene, seed ^ (salt << 56))?;
            match scenegen::sample_pair(&scene, &self.pairs, seed.wrapping_add(salt)) {
                Ok(pair) => return Ok(pair),
                Err(e @ Error::SamplingExhausted { .. }) | Err(e @ Error::EmptyPrior) => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }
}

/// Parameter snapshot plus enough bookkeeping to resume or audit a run.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub net: ScoreNet,
    pub step: usize,
    pub config_hash: String,
    /// Aug-RNG state at snapshot time: (seed, word position).
    pub rng_state: (u64, u128),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: usize,
    pub keypoint_ce: f64,
    pub coverage: f64,
    pub total: f64,
    pub skipped_pairs: usize,
    pub beta: f64,
}

/// Per-step data handed to observers (acceptance suites inspect the
/// posterior/target relation here).
pub struct StepRecord<'a> {
    pub step: usize,
    /// One entry per trained view: posterior map, its NMS mask and the
    /// binarized target.
    pub views: Vec<(&'a ProbMap, &'a Grid<bool>, &'a TargetMap)>,
    pub metrics: StepMetrics,
}

pub struct TrainOutput {
    pub checkpoints: Vec<Checkpoint>,
    pub metrics: Vec<StepMetrics>,
    pub skipped_pairs_total: usize,
}

struct Adam {
    m_w: Vec<Vec<f32>>,
    v_w: Vec<Vec<f32>>,
    m_b: Vec<Vec<f32>>,
    v_b: Vec<Vec<f32>>,
    t: i32,
}

impl Adam {
    fn new(net: &ScoreNet) -> Self {
        Self {
            m_w: net.layers.iter().map(|l| vec![0.0; l.weight.len()]).collect(),
            v_w: net.layers.iter().map(|l| vec![0.0; l.weight.len()]).collect(),
            m_b: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
            v_b: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, net: &mut ScoreNet, grads: &Gradients, lr_encoder: f64, lr_decoder: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let bc1 = 1.0 - B1.powi(self.t);
        let bc2 = 1.0 - B2.powi(self.t);
        for (li, layer) in net.layers.iter_mut().enumerate() {
            let lr = if li < ENCODER_LAYERS {
                lr_encoder
            } else {
                lr_decoder
            };
            let update = |p: &mut [f32], g: &[f32], m: &mut [f32], v: &mut [f32]| {
                for i in 0..p.len() {
                    let gi = g[i] as f64;
                    let mi = B1 * m[i] as f64 + (1.0 - B1) * gi;
                    let vi = B2 * v[i] as f64 + (1.0 - B2) * gi * gi;
                    m[i] = mi as f32;
                    v[i] = vi as f32;
                    let mhat = mi / bc1;
                    let vhat = vi / bc2;
                    p[i] -= (lr * mhat / (vhat.sqrt() + EPS)) as f32;
                }
            };
            update(
                &mut layer.weight,
                &grads.weights[li],
                &mut self.m_w[li],
                &mut self.v_w[li],
            );
            update(
                &mut layer.bias,
                &grads.biases[li],
                &mut self.m_b[li],
                &mut self.v_b[li],
            );
        }
    }
}

/// Trains a fresh net. See [`train_with_observer`] for the step hook.
pub fn train(config: &TrainConfig, dataset: &dyn PairSource) -> Result<TrainOutput> {
    train_with_observer(config, dataset, &mut |_| {})
}

/// One view of one pair prepared for the loss.
struct ViewWork {
    pass: super::net::ForwardPass,
    prob: ProbMap,
    posterior: targets::TargetIntermediates,
    mvs_mask: Grid<bool>,
}

pub fn train_with_observer(
    config: &TrainConfig,
    dataset: &dyn PairSource,
    observer: &mut dyn FnMut(&StepRecord),
) -> Result<TrainOutput> {
    config.validate()?;
    if dataset.num_pairs() < config.batch_size {
        return Err(Error::Config(format!(
            "dataset supplies {} pairs, need at least batch_size = {}",
            dataset.num_pairs(),
            config.batch_size
        )));
    }
    let steps = (config.pairs_total / config.batch_size).max(1);
    let mut net = ScoreNet::new(config.seed);
    let mut adam = Adam::new(&net);
    let mut aug_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xa06_0a06);
    let config_hash = crate::config::hash_of(config);

    let checkpoint_steps: Vec<usize> = (1..=config.checkpoint_count)
        .map(|i| (i * steps / config.checkpoint_count).max(1) - 1)
        .collect();

    let mut checkpoints = Vec::new();
    let mut metrics = Vec::new();
    let mut skipped_total = 0usize;

    for step in 0..steps {
        let progress = if steps > 1 {
            step as f64 / (steps - 1) as f64
        } else {
            0.0
        };
        let mut works: Vec<ViewWork> = Vec::with_capacity(config.batch_size * 2);
        let mut skipped = 0usize;
        for bi in 0..config.batch_size {
            let idx = (step * config.batch_size + bi) % dataset.num_pairs();
            let pair = dataset.pair(idx)?;
            let pair = self::prepare_pair(&pair, config, &mut aug_rng)?;
            match build_pair_work(&net, &pair, config, progress) {
                Ok((wa, wb)) => {
                    works.push(wa);
                    works.push(wb);
                }
                Err(Error::DegenerateTarget(_)) | Err(Error::EmptyPrior) => {
                    skipped += 1;
                }
                Err(e) => return Err(e),
            }
        }
        if works.is_empty() {
            skipped_total += skipped;
            continue;
        }

        // Binarize: per-pair independently or with one batch-wide threshold.
        let mut targets_per_view: Vec<Option<TargetMap>> = Vec::with_capacity(works.len());
        match config.target.topk_scope {
            TopkScope::PerPair => {
                for w in &works {
                    match targets::topk_binarize(
                        &w.posterior.posterior,
                        &w.posterior.nms,
                        config.target.k,
                    ) {
                        Ok(t) => targets_per_view.push(Some(t)),
                        Err(Error::DegenerateTarget(_)) => targets_per_view.push(None),
                        Err(e) => return Err(e),
                    }
                }
            }
            TopkScope::PerBatch => {
                let maps: Vec<(&ProbMap, &Grid<bool>)> = works
                    .iter()
                    .map(|w| (&w.posterior.posterior, &w.posterior.nms))
                    .collect();
                match targets::topk_binarize_batch(&maps, config.target.k) {
                    Ok(ts) => {
                        for t in ts {
                            // The batch threshold can starve a view entirely
                            // (the v1 defect); such views are skipped.
                            targets_per_view.push((t.k_effective > 0).then_some(t));
                        }
                    }
                    Err(Error::DegenerateTarget(_)) => {
                        targets_per_view.resize_with(works.len(), || None)
                    }
                    Err(e) => return Err(e),
                }
            }
        }

        let mut grads = Gradients::zeros_like(&net);
        let mut ce_sum = 0.0;
        let mut cov_sum = 0.0;
        let mut used_views = 0usize;
        for (w, target) in works.iter().zip(&targets_per_view) {
            let Some(target) = target else {
                skipped += 1;
                continue;
            };
            let breakdown = losses::total_loss(&w.prob, target, &w.mvs_mask, &config.loss)?;
            let grad_logits = losses::total_loss_grad(&w.prob, target, &w.mvs_mask, &config.loss)?;
            if !breakdown.total.is_finite() {
                return Err(Error::NonFiniteLoss {
                    step,
                    param_norm: net.param_norm(),
                });
            }
            ce_sum += breakdown.keypoint_ce;
            cov_sum += breakdown.coverage;
            used_views += 1;
            let grad_f32 = grad_logits.map(|&g| g as f32);
            net.backward(&w.pass, &grad_f32, &mut grads);
        }
        if used_views == 0 {
            skipped_total += skipped;
            continue;
        }
        grads.scale(1.0 / used_views as f32);
        adam.step(&mut net, &grads, config.lr_encoder, config.lr_decoder);

        let step_metrics = StepMetrics {
            step,
            keypoint_ce: ce_sum / used_views as f64,
            coverage: cov_sum / used_views as f64,
            total: (ce_sum + config.loss.coverage_weight * cov_sum) / used_views as f64,
            skipped_pairs: skipped,
            beta: config.target.strength_at(progress),
        };
        skipped_total += skipped;

        let views: Vec<(&ProbMap, &Grid<bool>, &TargetMap)> = works
            .iter()
            .zip(&targets_per_view)
            .filter_map(|(w, t)| {
                t.as_ref()
                    .map(|t| (&w.posterior.posterior, &w.posterior.nms, t))
            })
            .collect();
        observer(&StepRecord {
            step,
            views,
            metrics: step_metrics,
        });
        metrics.push(step_metrics);

        if checkpoint_steps.contains(&step) {
            checkpoints.push(Checkpoint {
                net: net.clone(),
                step,
                config_hash: config_hash.clone(),
                rng_state: (config.seed, aug_rng.get_word_pos()),
            });
        }
    }
    if checkpoints.last().map(|c| c.step) != Some(steps - 1) {
        checkpoints.push(Checkpoint {
            net: net.clone(),
            step: steps - 1,
            config_hash,
            rng_state: (config.seed, aug_rng.get_word_pos()),
        });
    }
    Ok(TrainOutput {
        checkpoints,
        metrics,
        skipped_pairs_total: skipped_total,
    })
}

/// Applies optional random crops and per-view augmentation. Views of a pair
/// are transformed independently (robustness to large relative rotations
/// needs inter-view mismatch).
fn prepare_pair(
    pair: &TwoViewPair,
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TwoViewPair> {
    let mut pair = pair.clone();
    if let Some(crop_from) = config.crop_from {
        let lo = 0;
        let hi = crop_from - config.train_resolution;
        if pair.view_a.width() != crop_from {
            return Err(Error::Config(format!(
                "crop_from = {crop_from} but rendered views are {}",
                pair.view_a.width()
            )));
        }
        for view in [&mut pair.view_a, &mut pair.view_b] {
            let ox = rng.gen_range(lo..=hi);
            let oy = rng.gen_range(lo..=hi);
            *view = crop_view(view, ox, oy, config.train_resolution);
        }
    }
    if config.aug_rot || config.aug_flip {
        let ta = augment::sample_transform(rng, config.aug_rot, config.aug_flip);
        let tb = augment::sample_transform(rng, config.aug_rot, config.aug_flip);
        pair.view_a = augment::apply_to_view(&pair.view_a, &ta)?;
        pair.view_b = augment::apply_to_view(&pair.view_b, &tb)?;
    }
    Ok(pair)
}

/// Crops a square window; intrinsics shift so geometry stays exact.
pub fn crop_view(view: &crate::geometry::CameraView, ox: usize, oy: usize, size: usize) -> crate::geometry::CameraView {
    let mut image = Grid::zeros_f32(size, size);
    let mut depth = Grid::zeros(size, size);
    let mut valid = Grid::filled(size, size, false);
    for y in 0..size {
        for x in 0..size {
            *image.get_mut(x, y) = *view.image.get(x + ox, y + oy);
            *depth.get_mut(x, y) = *view.depth.get(x + ox, y + oy);
            *valid.get_mut(x, y) = *view.depth_valid.get(x + ox, y + oy);
        }
    }
    let mut k = view.intrinsics;
    k.cx -= ox as f64;
    k.cy -= oy as f64;
    crate::geometry::CameraView {
        intrinsics: k,
        rotation: view.rotation,
        translation: view.translation,
        image,
        depth,
        depth_valid: valid,
    }
}

fn build_pair_work(
    net: &ScoreNet,
    pair: &TwoViewPair,
    config: &TrainConfig,
    progress: f64,
) -> Result<(ViewWork, ViewWork)> {
    let pass_a = net.forward_full(&pair.view_a.image)?;
    let pass_b = net.forward_full(&pair.view_b.image)?;
    let prob_a = to_prob(&pass_a.logits);
    let prob_b = to_prob(&pass_b.logits);
    let posteriors = targets::build_posteriors(pair, &prob_a, &prob_b, &config.target, progress)?;
    Ok((
        ViewWork {
            pass: pass_a,
            prob: prob_a,
            mvs_mask: pair.view_a.depth_valid.clone(),
            posterior: posteriors.a,
        },
        ViewWork {
            pass: pass_b,
            prob: prob_b,
            mvs_mask: pair.view_b.depth_valid.clone(),
            posterior: posteriors.b,
        },
    ))
}
