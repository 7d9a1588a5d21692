//! Construction of the binarized per-pair supervision targets.
//!
//! Pipeline per view: splat co-visible track projections (base prior) ->
//! Gaussian smoothing -> cross-view consistency product (the other view's
//! prior warped in) -> self-supervision with the detector's own prediction
//! -> h x h NMS on the posterior -> top-k binarization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Warp};
use crate::grid::Grid;
use crate::scenegen::TwoViewPair;

/// Per-pixel nonnegative map; `normalized` means it sums to 1 (within 1e-6).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    pub values: Grid<f64>,
    pub normalized: bool,
}

impl ProbMap {
    pub fn unnormalized(values: Grid<f64>) -> Self {
        Self {
            values,
            normalized: false,
        }
    }

    /// Normalizes to unit mass. Errors when the total mass is not positive.
    pub fn normalize(mut self) -> Result<Self> {
        let s = self.values.sum();
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::DegenerateTarget(format!(
                "cannot normalize map with mass {s}"
            )));
        }
        self.values.scale_in_place(1.0 / s);
        self.normalized = true;
        Ok(self)
    }

    pub fn uniform(width: usize, height: usize) -> Self {
        let v = 1.0 / (width * height) as f64;
        Self {
            values: Grid::filled(width, height, v),
            normalized: true,
        }
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }
}

/// Binarized supervision target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMap {
    pub mask: Grid<bool>,
    /// Number of set pixels: `min(k, NMS survivors with positive posterior)`.
    pub k_effective: usize,
}

impl TargetMap {
    pub fn set_indices(&self) -> Vec<usize> {
        self.mask
            .data()
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

/// Scope of the adaptive top-k threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopkScope {
    /// The threshold is the k-th largest value of each pair's own map.
    PerPair,
    /// v1 ablation: one threshold over the whole batch, so per-pair counts
    /// may vary.
    PerBatch,
}

/// Prior-strength schedule over training progress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrengthSchedule {
    Constant,
    /// beta(t) = beta0 * (1 - t/T) + 1 * (t/T).
    LinearDecay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetConfig {
    /// Gaussian smoothing of the track prior, in pixels.
    pub prior_sigma: f64,
    /// Prior strength beta; the prediction enters the posterior as
    /// `predicted^(1/beta)`.
    pub prior_strength: f64,
    /// NMS window side h (odd).
    pub nms_window: usize,
    /// Target budget k.
    pub k: usize,
    pub topk_scope: TopkScope,
    pub strength_schedule: StrengthSchedule,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            prior_sigma: 0.5,
            prior_strength: 50.0,
            nms_window: 3,
            k: 1024,
            topk_scope: TopkScope::PerPair,
            strength_schedule: StrengthSchedule::Constant,
        }
    }
}

impl TargetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nms_window % 2 == 0 || self.nms_window == 0 {
            return Err(Error::Config("nms_window must be odd and >= 1".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if self.prior_strength <= 0.0 {
            return Err(Error::Config("prior_strength must be positive".into()));
        }
        if self.prior_sigma <= 0.0 {
            return Err(Error::Config("prior_sigma must be positive".into()));
        }
        Ok(())
    }

    /// Effective prior strength at training progress `t` in [0, 1].
    pub fn strength_at(&self, progress: f64) -> f64 {
        match self.strength_schedule {
            StrengthSchedule::Constant => self.prior_strength,
            StrengthSchedule::LinearDecay => {
                let t = progress.clamp(0.0, 1.0);
                self.prior_strength * (1.0 - t) + t
            }
        }
    }
}

/// Which view of a pair a target is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewSide {
    A,
    B,
}

/// Delta map of the co-visible track projections, bilinearly splatted,
/// normalized to unit mass.
pub fn base_prior(pair: &TwoViewPair, side: ViewSide) -> Result<ProbMap> {
    if pair.tracks.is_empty() {
        return Err(Error::EmptyPrior);
    }
    let view = match side {
        ViewSide::A => &pair.view_a,
        ViewSide::B => &pair.view_b,
    };
    let projections = geometry::project(&pair.tracks.points, view);
    let w = view.width();
    let h = view.height();
    let mut values = Grid::zeros(w, h);
    let mass = 1.0 / pair.tracks.len() as f64;
    let mut deposited = false;
    for p in &projections {
        if !p.valid {
            continue;
        }
        let x0 = p.x.floor();
        let y0 = p.y.floor();
        let fx = p.x - x0;
        let fy = p.y - y0;
        let (x0, y0) = (x0 as i64, y0 as i64);
        for (dx, dy, wgt) in [
            (0, 0, (1.0 - fx) * (1.0 - fy)),
            (1, 0, fx * (1.0 - fy)),
            (0, 1, (1.0 - fx) * fy),
            (1, 1, fx * fy),
        ] {
            let xi = x0 + dx;
            let yi = y0 + dy;
            if wgt > 0.0 && xi >= 0 && yi >= 0 && (xi as usize) < w && (yi as usize) < h {
                *values.get_mut(xi as usize, yi as usize) += mass * wgt;
                deposited = true;
            }
        }
    }
    if !deposited {
        return Err(Error::EmptyPrior);
    }
    ProbMap::unnormalized(values).normalize()
}

/// Separable Gaussian smoothing with a truncated (+-3 sigma), renormalized
/// kernel and symmetric (edge-repeating) boundary. Preserves total mass.
pub fn smooth(map: &ProbMap, sigma: f64) -> ProbMap {
    assert!(sigma > 0.0, "smooth: sigma must be positive");
    let kernel = gaussian_kernel(sigma);
    let w = map.width();
    let h = map.height();
    let mut tmp = Grid::zeros(w, h);
    // Horizontal pass.
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &kv) in kernel.iter().enumerate() {
                let off = t as i64 - (kernel.len() / 2) as i64;
                let xi = reflect(x as i64 + off, w);
                acc += kv * map.values.get(xi, y);
            }
            *tmp.get_mut(x, y) = acc;
        }
    }
    // Vertical pass.
    let mut out = Grid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &kv) in kernel.iter().enumerate() {
                let off = t as i64 - (kernel.len() / 2) as i64;
                let yi = reflect(y as i64 + off, h);
                acc += kv * tmp.get(x, yi);
            }
            *out.get_mut(x, y) = acc;
        }
    }
    ProbMap {
        values: out,
        normalized: map.normalized,
    }
}

/// Adjoint of [`smooth`] (exact transpose of the linear operator), needed for
/// analytic loss gradients.
pub fn smooth_adjoint(grad: &Grid<f64>, sigma: f64) -> Grid<f64> {
    let kernel = gaussian_kernel(sigma);
    let w = grad.width();
    let h = grad.height();
    // Transpose of the vertical pass.
    let mut tmp = Grid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let g = *grad.get(x, y);
            for (t, &kv) in kernel.iter().enumerate() {
                let off = t as i64 - (kernel.len() / 2) as i64;
                let yi = reflect(y as i64 + off, h);
                *tmp.get_mut(x, yi) += kv * g;
            }
        }
    }
    // Transpose of the horizontal pass.
    let mut out = Grid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let g = *tmp.get(x, y);
            for (t, &kv) in kernel.iter().enumerate() {
                let off = t as i64 - (kernel.len() / 2) as i64;
                let xi = reflect(x as i64 + off, w);
                *out.get_mut(xi, y) += kv * g;
            }
        }
    }
    out
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    for v in &mut k {
        *v /= s;
    }
    k
}

/// Symmetric boundary index (edge repeated): ... 1 0 | 0 1 2 ... n-1 | n-1 ...
#[inline]
fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

/// Elementwise product of a view's own map with the other view's warped map,
/// masked and renormalized.
pub fn consistency_product(
    map_self: &ProbMap,
    map_other_warped: &ProbMap,
    mask: &Grid<bool>,
) -> Result<ProbMap> {
    if !map_self.values.same_shape(&map_other_warped.values) {
        return Err(Error::Contract(
            "consistency_product: dimension mismatch".into(),
        ));
    }
    let mut values = Grid::zeros(map_self.width(), map_self.height());
    for (x, y, v) in map_self.values.iter_pixels() {
        if *mask.get(x, y) {
            *values.get_mut(x, y) = v * map_other_warped.values.get(x, y);
        }
    }
    ProbMap::unnormalized(values)
        .normalize()
        .map_err(|_| Error::DegenerateTarget("cross-view product has zero mass".into()))
}

/// Self-supervision: posterior ∝ target * predicted^(1/beta). The predicted
/// map is treated as a constant (no gradient flows through the target path).
pub fn apply_self_supervision(
    target: &ProbMap,
    predicted: &ProbMap,
    beta_eff: f64,
) -> Result<ProbMap> {
    if !target.values.same_shape(&predicted.values) {
        return Err(Error::Contract(
            "apply_self_supervision: dimension mismatch".into(),
        ));
    }
    let inv_beta = 1.0 / beta_eff;
    let mut values = Grid::zeros(target.width(), target.height());
    for (x, y, &t) in target.values.iter_pixels() {
        let p = *predicted.values.get(x, y);
        if t > 0.0 && p > 0.0 {
            *values.get_mut(x, y) = t * p.powf(inv_beta);
        }
    }
    ProbMap::unnormalized(values)
        .normalize()
        .map_err(|_| Error::DegenerateTarget("self-supervised posterior has zero mass".into()))
}

/// h x h non-max suppression: a pixel survives iff it equals the maximum of
/// its window (ties retained). `h = 1` retains everything.
pub fn nms_mask(posterior: &ProbMap, h: usize) -> Grid<bool> {
    assert!(h % 2 == 1 && h >= 1, "nms window must be odd and >= 1");
    let r = (h / 2) as i64;
    let width = posterior.width();
    let height = posterior.height();
    let mut out = Grid::filled(width, height, false);
    for y in 0..height {
        for x in 0..width {
            let v = *posterior.values.get(x, y);
            let mut is_max = true;
            'win: for dy in -r..=r {
                for dx in -r..=r {
                    let xi = x as i64 + dx;
                    let yi = y as i64 + dy;
                    if xi < 0 || yi < 0 || xi >= width as i64 || yi >= height as i64 {
                        continue;
                    }
                    if *posterior.values.get(xi as usize, yi as usize) > v {
                        is_max = false;
                        break 'win;
                    }
                }
            }
            *out.get_mut(x, y) = is_max;
        }
    }
    out
}

/// Per-pair top-k binarization: the k largest NMS-surviving positive
/// posterior values, ties broken by row-major pixel index.
pub fn topk_binarize(posterior: &ProbMap, nms: &Grid<bool>, k: usize) -> Result<TargetMap> {
    assert!(k >= 1, "k must be >= 1");
    let mut candidates: Vec<(f64, usize)> = posterior
        .values
        .data()
        .iter()
        .enumerate()
        .filter(|&(i, &v)| v > 0.0 && nms.data()[i])
        .map(|(i, &v)| (v, i))
        .collect();
    if candidates.is_empty() {
        return Err(Error::DegenerateTarget(
            "no NMS-surviving candidate with positive posterior".into(),
        ));
    }
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let take = k.min(candidates.len());
    let mut mask = Grid::filled(posterior.width(), posterior.height(), false);
    for &(_, i) in &candidates[..take] {
        mask.data_mut()[i] = true;
    }
    Ok(TargetMap {
        mask,
        k_effective: take,
    })
}

/// v1-style batch-scope binarization: one adaptive threshold over the
/// concatenation of all maps, total budget `k * maps.len()`, so per-pair
/// counts may vary. This is the only cross-pair dependency in target
/// construction; callers must synchronize the whole batch before this step.
pub fn topk_binarize_batch(
    maps: &[(&ProbMap, &Grid<bool>)],
    k: usize,
) -> Result<Vec<TargetMap>> {
    assert!(k >= 1, "k must be >= 1");
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (mi, (posterior, nms)) in maps.iter().enumerate() {
        for (i, &v) in posterior.values.data().iter().enumerate() {
            if v > 0.0 && nms.data()[i] {
                candidates.push((v, mi, i));
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::DegenerateTarget(
            "no NMS-surviving candidate in the whole batch".into(),
        ));
    }
    candidates.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let take = (k * maps.len()).min(candidates.len());
    let mut out: Vec<TargetMap> = maps
        .iter()
        .map(|(p, _)| TargetMap {
            mask: Grid::filled(p.width(), p.height(), false),
            k_effective: 0,
        })
        .collect();
    for &(_, mi, i) in &candidates[..take] {
        out[mi].mask.data_mut()[i] = true;
        out[mi].k_effective += 1;
    }
    Ok(out)
}

/// All intermediates of the target pipeline for one view, kept inspectable
/// for tests and debug dumps.
#[derive(Debug, Clone)]
pub struct TargetIntermediates {
    pub prior: ProbMap,
    pub smoothed: ProbMap,
    pub consistent: ProbMap,
    pub posterior: ProbMap,
    pub nms: Grid<bool>,
}

/// Both views' posteriors, before binarization.
pub struct PairPosteriors {
    pub a: TargetIntermediates,
    pub b: TargetIntermediates,
}

/// Runs the target pipeline up to (and including) NMS for both views.
/// `progress` in [0, 1] drives the strength schedule.
pub fn build_posteriors(
    pair: &TwoViewPair,
    predicted_a: &ProbMap,
    predicted_b: &ProbMap,
    config: &TargetConfig,
    progress: f64,
) -> Result<PairPosteriors> {
    config.validate()?;
    let beta = config.strength_at(progress);
    let prior_a = base_prior(pair, ViewSide::A)?;
    let prior_b = base_prior(pair, ViewSide::B)?;
    let smooth_a = smooth(&prior_a, config.prior_sigma);
    let smooth_b = smooth(&prior_b, config.prior_sigma);

    let warp_ab = Warp::new(&pair.view_a, &pair.view_b);
    let warp_ba = warp_ab.inverse();
    // B's smoothed prior expressed on A's grid, and vice versa.
    let (b_on_a, mask_a) = geometry::warp_map(&smooth_b, &warp_ab)?;
    let (a_on_b, mask_b) = geometry::warp_map(&smooth_a, &warp_ba)?;

    let consistent_a = consistency_product(&smooth_a, &b_on_a, &mask_a)?;
    let consistent_b = consistency_product(&smooth_b, &a_on_b, &mask_b)?;

    let posterior_a = apply_self_supervision(&consistent_a, predicted_a, beta)?;
    let posterior_b = apply_self_supervision(&consistent_b, predicted_b, beta)?;

    let nms_a = nms_mask(&posterior_a, config.nms_window);
    let nms_b = nms_mask(&posterior_b, config.nms_window);

    Ok(PairPosteriors {
        a: TargetIntermediates {
            prior: prior_a,
            smoothed: smooth_a,
            consistent: consistent_a,
            posterior: posterior_a,
            nms: nms_a,
        },
        b: TargetIntermediates {
            prior: prior_b,
            smoothed: smooth_b,
            consistent: consistent_b,
            posterior: posterior_b,
            nms: nms_b,
        },
    })
}

/// Full per-pair pipeline (per-pair top-k scope). For `TopkScope::PerBatch`
/// use [`build_posteriors`] + [`topk_binarize_batch`] across the batch.
pub fn build_targets(
    pair: &TwoViewPair,
    predicted_a: &ProbMap,
    predicted_b: &ProbMap,
    config: &TargetConfig,
    progress: f64,
) -> Result<(TargetMap, TargetMap, PairPosteriors)> {
    let posteriors = build_posteriors(pair, predicted_a, predicted_b, config, progress)?;
    let ta = topk_binarize(&posteriors.a.posterior, &posteriors.a.nms, config.k)?;
    let tb = topk_binarize(&posteriors.b.posterior, &posteriors.b.nms, config.k)?;
    Ok((ta, tb, posteriors))
}
