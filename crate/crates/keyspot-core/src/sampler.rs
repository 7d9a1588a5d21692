//! Inference-time keypoint extraction from a score map.
//!
//! Scores are modulated by a local-density estimate, `s = p / density^alpha`,
//! before taking the top-`budget` pixels; `alpha` trades raw confidence
//! against spatial diversity. Selected pixels get an optional quadratic
//! sub-pixel refinement and are reported in normalized coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{pixel_to_normalized, Grid};
use crate::targets::ProbMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleConfig {
    /// Maximum keypoints returned.
    pub budget: usize,
    /// Density-modulation exponent; 0 reduces to plain top-k on scores.
    pub alpha: f64,
    /// Odd box-filter side length for the density estimate.
    pub density_window: usize,
    /// Apply a 3x3 hard NMS to the modulated score before selection.
    pub posthoc_nms: bool,
    /// Quadratic sub-pixel refinement of selected maxima.
    pub subpixel: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            budget: 5000,
            alpha: 0.5,
            density_window: 9,
            posthoc_nms: false,
            subpixel: true,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Config("sampler budget must be >= 1".into()));
        }
        if self.density_window % 2 == 0 || self.density_window == 0 {
            return Err(Error::Config("density_window must be odd".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config("alpha must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// A detected keypoint in normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    /// Normalized coordinates in [-1, 1].
    pub x: f64,
    pub y: f64,
    /// Modulated selection score.
    pub score: f64,
}

/// Keypoints sorted by descending score.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KeypointSet {
    pub width: usize,
    pub height: usize,
    pub points: Vec<Keypoint>,
}

impl KeypointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pixel coordinates of every keypoint.
    pub fn pixel_coords(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| {
                (
                    crate::grid::normalized_to_pixel(p.x, self.width),
                    crate::grid::normalized_to_pixel(p.y, self.height),
                )
            })
            .collect()
    }
}

/// Windowed sum of the probability mass around each pixel (box filter with
/// symmetric, edge-repeating boundary), floored at 1e-12 so the modulated
/// score stays finite on empty regions.
pub fn local_density(prob: &ProbMap, window: usize) -> Grid<f64> {
    assert!(window % 2 == 1, "density window must be odd");
    let w = prob.width();
    let h = prob.height();
    let r = (window / 2) as i64;
    let reflect = |i: i64, n: i64| -> usize {
        // Symmetric reflection about the edge samples' outer boundary:
        // -1 -> 0, n -> n-1, and so on.
        let m = 2 * n;
        let mut j = i.rem_euclid(m);
        if j >= n {
            j = m - 1 - j;
        }
        j as usize
    };
    // Horizontal pass.
    let mut horiz = Grid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dx in -r..=r {
                acc += *prob.values.get(reflect(x as i64 + dx, w as i64), y);
            }
            *horiz.get_mut(x, y) = acc;
        }
    }
    let mut out = Grid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dy in -r..=r {
                acc += *horiz.get(x, reflect(y as i64 + dy, h as i64));
            }
            *out.get_mut(x, y) = acc.max(1e-12);
        }
    }
    out
}

/// Selects up to `budget` keypoints from a probability map.
///
/// Selection score is `p / density^alpha`. Ties break on row-major pixel
/// order so runs are reproducible across platforms.
pub fn sample_keypoints(prob: &ProbMap, config: &SampleConfig) -> Result<KeypointSet> {
    config.validate()?;
    if !prob.normalized {
        return Err(Error::Contract(
            "sample_keypoints expects a normalized probability map".into(),
        ));
    }
    let w = prob.width();
    let h = prob.height();
    let density = local_density(prob, config.density_window);
    let mut score = Grid::zeros(w, h);
    for i in 0..w * h {
        let p = prob.values.data()[i];
        score.data_mut()[i] = if config.alpha == 0.0 {
            p
        } else {
            p / density.data()[i].powf(config.alpha)
        };
    }

    let keep: Vec<bool> = if config.posthoc_nms {
        let as_map = ProbMap {
            values: score.clone(),
            normalized: false,
        };
        crate::targets::nms_mask(&as_map, 3).data().to_vec()
    } else {
        vec![true; w * h]
    };

    let mut order: Vec<usize> = (0..w * h)
        .filter(|&i| keep[i] && score.data()[i] > 0.0)
        .collect();
    order.sort_by(|&a, &b| {
        score.data()[b]
            .partial_cmp(&score.data()[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    order.truncate(config.budget);

    let points = order
        .into_iter()
        .map(|i| {
            let (xi, yi) = (i % w, i / w);
            let (mut px, mut py) = (xi as f64, yi as f64);
            if config.subpixel {
                let (dx, dy) = subpixel_offset(&score, xi, yi);
                px += dx;
                py += dy;
            }
            Keypoint {
                x: pixel_to_normalized(px, w),
                y: pixel_to_normalized(py, h),
                score: score.data()[i],
            }
        })
        .collect();
    Ok(KeypointSet {
        width: w,
        height: h,
        points,
    })
}

/// One-dimensional quadratic fit per axis over the 3x3 neighbourhood,
/// clamped to +-0.5 px; border pixels are left unrefined.
fn subpixel_offset(score: &Grid<f64>, x: usize, y: usize) -> (f64, f64) {
    let w = score.width();
    let h = score.height();
    if x == 0 || y == 0 || x + 1 >= w || y + 1 >= h {
        return (0.0, 0.0);
    }
    let refine = |lo: f64, c: f64, hi: f64| -> f64 {
        let denom = lo - 2.0 * c + hi;
        if denom >= 0.0 {
            // Not a local maximum along this axis; leave in place.
            return 0.0;
        }
        (0.5 * (lo - hi) / denom).clamp(-0.5, 0.5)
    };
    (
        refine(*score.get(x - 1, y), *score.get(x, y), *score.get(x + 1, y)),
        refine(*score.get(x, y - 1), *score.get(x, y), *score.get(x, y + 1)),
    )
}
