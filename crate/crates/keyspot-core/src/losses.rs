//! Training objectives: keypoint cross-entropy against the binarized target
//! and the coverage regularizer pulling the smoothed prediction toward the
//! smoothed MVS distribution.
//!
//! Gradients are computed analytically with respect to the detector logits
//! (the prediction is `softmax(logits)`); the target side is constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::targets::{self, ProbMap, TargetMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageMode {
    /// Cross-entropy against the smoothed, normalized MVS mask.
    GaussianMvs,
    /// Ablation: cross-entropy against the uniform distribution.
    Uniform,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossConfig {
    /// Coverage smoothing in pixels, quoted at `reference_resolution`; the
    /// effective sigma scales linearly with the actual map height.
    pub coverage_sigma: f64,
    /// Weight of the coverage term in the total loss.
    pub coverage_weight: f64,
    pub coverage_mode: CoverageMode,
    pub reference_resolution: usize,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            coverage_sigma: 12.5,
            coverage_weight: 1.0,
            coverage_mode: CoverageMode::GaussianMvs,
            reference_resolution: 512,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coverage_mode != CoverageMode::Off && self.coverage_sigma <= 0.0 {
            return Err(Error::Config(
                "coverage_sigma must be positive unless coverage is off".into(),
            ));
        }
        if self.coverage_weight < 0.0 {
            return Err(Error::Config("coverage_weight must be nonnegative".into()));
        }
        Ok(())
    }

    /// Sigma in pixels at the resolution of the given map height.
    pub fn effective_sigma(&self, height: usize) -> f64 {
        self.coverage_sigma * height as f64 / self.reference_resolution as f64
    }
}

/// `-(1/k) * sum_{i in target} log p_i`.
pub fn keypoint_ce(predicted: &ProbMap, target: &TargetMap) -> Result<f64> {
    if target.k_effective == 0 {
        return Err(Error::Contract("keypoint_ce: empty target".into()));
    }
    if !predicted.values.same_shape(&target.mask) {
        return Err(Error::Contract("keypoint_ce: dimension mismatch".into()));
    }
    let mut acc = 0.0;
    for (i, &set) in target.mask.data().iter().enumerate() {
        if set {
            acc -= predicted.values.data()[i].ln();
        }
    }
    Ok(acc / target.k_effective as f64)
}

/// Gradient of [`keypoint_ce`] with respect to the logits:
/// `p_j - 1[j in target] / k`.
pub fn keypoint_ce_grad(predicted: &ProbMap, target: &TargetMap) -> Grid<f64> {
    let k = target.k_effective as f64;
    let mut grad = predicted.values.clone();
    for (i, g) in grad.data_mut().iter_mut().enumerate() {
        if target.mask.data()[i] {
            *g -= 1.0 / k;
        }
    }
    grad
}

/// Coverage regularizer: `CE(smooth(p), smooth(p_mvs))` with the mask
/// normalized to a distribution; the uniform mode replaces the smoothed MVS
/// distribution with the uniform one; off returns 0.
pub fn coverage_loss(
    predicted: &ProbMap,
    mvs_mask: &Grid<bool>,
    config: &LossConfig,
) -> Result<f64> {
    match coverage_terms(predicted, mvs_mask, config)? {
        None => Ok(0.0),
        Some((q, p_smooth)) => {
            let mut acc = 0.0;
            for (i, &qi) in q.data().iter().enumerate() {
                if qi > 0.0 {
                    acc -= qi * p_smooth.data()[i].ln();
                }
            }
            Ok(acc)
        }
    }
}

/// Gradient of [`coverage_loss`] with respect to the logits.
pub fn coverage_loss_grad(
    predicted: &ProbMap,
    mvs_mask: &Grid<bool>,
    config: &LossConfig,
) -> Result<Grid<f64>> {
    let w = predicted.width();
    let h = predicted.height();
    match coverage_terms(predicted, mvs_mask, config)? {
        None => Ok(Grid::zeros(w, h)),
        Some((q, p_smooth)) => {
            // dL/dp = -S^T (q / p_smooth); chain through softmax.
            let mut ratio = Grid::zeros(w, h);
            for (i, r) in ratio.data_mut().iter_mut().enumerate() {
                let qi = q.data()[i];
                if qi > 0.0 {
                    *r = -qi / p_smooth.data()[i];
                }
            }
            let sigma = config.effective_sigma(h);
            let gp = targets::smooth_adjoint(&ratio, sigma);
            Ok(softmax_backward(predicted, &gp))
        }
    }
}

/// Pulls `dL/dp` back to `dL/dlogits` for `p = softmax(logits)`:
/// `p_j * (g_j - sum_m p_m g_m)`.
pub fn softmax_backward(predicted: &ProbMap, grad_p: &Grid<f64>) -> Grid<f64> {
    let dot: f64 = predicted
        .values
        .data()
        .iter()
        .zip(grad_p.data())
        .map(|(&p, &g)| p * g)
        .sum();
    let mut out = Grid::zeros(predicted.width(), predicted.height());
    for (i, o) in out.data_mut().iter_mut().enumerate() {
        *o = predicted.values.data()[i] * (grad_p.data()[i] - dot);
    }
    out
}

fn coverage_terms(
    predicted: &ProbMap,
    mvs_mask: &Grid<bool>,
    config: &LossConfig,
) -> Result<Option<(Grid<f64>, Grid<f64>)>> {
    config.validate()?;
    if config.coverage_mode == CoverageMode::Off {
        return Ok(None);
    }
    if !predicted.values.same_shape(mvs_mask) {
        return Err(Error::Contract("coverage_loss: dimension mismatch".into()));
    }
    let sigma = config.effective_sigma(predicted.height());
    let p_smooth = targets::smooth(predicted, sigma).values;
    let q = match config.coverage_mode {
        CoverageMode::GaussianMvs => {
            let valid = mvs_mask.data().iter().filter(|&&b| b).count();
            if valid == 0 {
                return Err(Error::Contract(
                    "coverage_loss: empty MVS mask in gaussian_mvs mode".into(),
                ));
            }
            let mass = 1.0 / valid as f64;
            let mvs = ProbMap {
                values: mvs_mask.map(|&b| if b { mass } else { 0.0 }),
                normalized: true,
            };
            targets::smooth(&mvs, sigma).values
        }
        CoverageMode::Uniform => {
            let n = (predicted.width() * predicted.height()) as f64;
            Grid::filled(predicted.width(), predicted.height(), 1.0 / n)
        }
        CoverageMode::Off => unreachable!(),
    };
    Ok(Some((q, p_smooth)))
}

/// Per-term loss breakdown for logging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub keypoint_ce: f64,
    pub coverage: f64,
    pub total: f64,
}

/// `keypoint_ce + coverage_weight * coverage_loss`.
pub fn total_loss(
    predicted: &ProbMap,
    target: &TargetMap,
    mvs_mask: &Grid<bool>,
    config: &LossConfig,
) -> Result<LossBreakdown> {
    let ce = keypoint_ce(predicted, target)?;
    let cov = coverage_loss(predicted, mvs_mask, config)?;
    Ok(LossBreakdown {
        keypoint_ce: ce,
        coverage: cov,
        total: ce + config.coverage_weight * cov,
    })
}

/// Gradient of [`total_loss`] with respect to the logits.
pub fn total_loss_grad(
    predicted: &ProbMap,
    target: &TargetMap,
    mvs_mask: &Grid<bool>,
    config: &LossConfig,
) -> Result<Grid<f64>> {
    let mut grad = keypoint_ce_grad(predicted, target);
    if config.coverage_weight > 0.0 && config.coverage_mode != CoverageMode::Off {
        let cov = coverage_loss_grad(predicted, mvs_mask, config)?;
        for (g, c) in grad.data_mut().iter_mut().zip(cov.data()) {
            *g += config.coverage_weight * c;
        }
    }
    Ok(grad)
}
