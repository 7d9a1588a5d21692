//! Downstream evaluation: repeatability, ground-truth-oracle matching,
//! robust essential-matrix pose estimation, and pose-error AUC / mAA.
//!
//! The oracle matcher stands in for a learned dense matcher: keypoints are
//! associated across views using the exact ground-truth warp, which isolates
//! detector quality from descriptor quality.

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{warp_point, CameraView, Intrinsics, Warp, WarpResult};
use crate::grid::normalized_to_pixel;
use crate::sampler::{sample_keypoints, KeypointSet, SampleConfig};
use crate::scenegen::TwoViewPair;
use crate::targets::{self, ProbMap, ViewSide};

/// Robust-estimator settings. The 0.2 px inlier threshold follows the
/// reference protocol; it is converted to normalized units per camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RansacConfig {
    pub threshold_px: f64,
    pub max_iters: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            threshold_px: 0.2,
            max_iters: 1000,
            confidence: 0.999,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Pixel tolerance for repeatability and oracle matching.
    pub epsilon_px: f64,
    /// Ascending thresholds (degrees) for pose AUC.
    pub auc_thresholds: Vec<f64>,
    /// Upper integer threshold for mAA.
    pub maa_threshold: usize,
    pub ransac: RansacConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            epsilon_px: 2.0,
            auc_thresholds: vec![5.0, 10.0, 20.0],
            maa_threshold: 10,
            ransac: RansacConfig::default(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon_px <= 0.0 {
            return Err(Error::Config("epsilon_px must be positive".into()));
        }
        if self.auc_thresholds.is_empty()
            || self.auc_thresholds.windows(2).any(|w| w[0] >= w[1])
            || self.auc_thresholds[0] <= 0.0
        {
            return Err(Error::Config(
                "auc_thresholds must be positive and ascending".into(),
            ));
        }
        if self.maa_threshold == 0 {
            return Err(Error::Config("maa_threshold must be >= 1".into()));
        }
        if !(0.5..1.0).contains(&self.ransac.confidence)
            || self.ransac.max_iters == 0
            || self.ransac.threshold_px <= 0.0
        {
            return Err(Error::Config("invalid RANSAC settings".into()));
        }
        Ok(())
    }
}

/// One-to-one keypoint correspondences between two views.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchSet {
    /// (index into kps_a, index into kps_b).
    pub pairs: Vec<(usize, usize)>,
    /// Reprojection residual in target-view pixels, parallel to `pairs`.
    pub residuals: Vec<f64>,
}

impl MatchSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Relative pose estimate: `X_b = R X_a + t`, with `t` a unit direction.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseEstimate {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    /// Inlier flags parallel to the match set handed to the estimator.
    pub inliers: Vec<bool>,
}

/// Aggregated metrics over a set of evaluation pairs. Serialized (versioned)
/// for the plot command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format_version: u32,
    pub checkpoint_id: String,
    pub step: usize,
    /// Mean symmetric repeatability over pairs where it is defined.
    pub repeatability: Option<f64>,
    pub auc_thresholds: Vec<f64>,
    pub auc: Vec<f64>,
    pub maa: f64,
    /// Pose error in degrees per pair; None marks a failed estimate.
    pub per_pair_errors: Vec<Option<f64>>,
    pub mean_keypoints: f64,
    pub pairs_evaluated: usize,
    pub pairs_failed: usize,
}

impl MetricsReport {
    pub const FORMAT_VERSION: u32 = 1;

    pub fn auc_at(&self, threshold: f64) -> Option<f64> {
        self.auc_thresholds
            .iter()
            .position(|&t| (t - threshold).abs() < 1e-9)
            .map(|i| self.auc[i])
    }
}

/// Warps every keypoint of `kps` (given in the warp's source view) and
/// returns pixel landing positions; None marks occluded/invalid points.
fn warp_keypoints(kps: &KeypointSet, warp: &Warp) -> Vec<Option<(f64, f64)>> {
    let tw = warp.target.width() as f64;
    let th = warp.target.height() as f64;
    kps.pixel_coords()
        .iter()
        .map(|&(x, y)| match warp_point(x, y, warp) {
            WarpResult::Valid { x, y, .. }
                if x > -0.5 && x < tw - 0.5 && y > -0.5 && y < th - 0.5 =>
            {
                Some((x, y))
            }
            _ => None,
        })
        .collect()
}

/// One-directional mutual-nearest matching between warped source keypoints
/// and target keypoints; returns (source index, target index, distance).
fn mutual_nn(
    warped: &[Option<(f64, f64)>],
    targets: &[(f64, f64)],
    epsilon_px: f64,
) -> Vec<(usize, usize, f64)> {
    let dist2 = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
    let nearest_target: Vec<Option<(usize, f64)>> = warped
        .iter()
        .map(|w| {
            w.and_then(|wp| {
                targets
                    .iter()
                    .enumerate()
                    .map(|(j, &t)| (j, dist2(wp, t)))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
            })
        })
        .collect();
    let nearest_source: Vec<Option<usize>> = targets
        .iter()
        .map(|&t| {
            warped
                .iter()
                .enumerate()
                .filter_map(|(i, w)| w.map(|wp| (i, dist2(wp, t))))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
                .map(|(i, _)| i)
        })
        .collect();
    let eps2 = epsilon_px * epsilon_px;
    nearest_target
        .iter()
        .enumerate()
        .filter_map(|(i, nt)| {
            nt.and_then(|(j, d2)| {
                (d2 <= eps2 && nearest_source[j] == Some(i)).then(|| (i, j, d2.sqrt()))
            })
        })
        .collect()
}

/// Symmetric repeatability: fraction of co-visible keypoints re-detected
/// within `epsilon_px` under mutual-nearest assignment, averaged over both
/// directions. `None` when no keypoint of either view is co-visible.
pub fn repeatability(
    kps_a: &KeypointSet,
    kps_b: &KeypointSet,
    warp_ab: &Warp,
    epsilon_px: f64,
) -> Option<f64> {
    assert!(epsilon_px > 0.0, "repeatability: epsilon must be positive");
    let one_way = |src: &KeypointSet, dst: &KeypointSet, warp: &Warp| -> Option<f64> {
        let warped = warp_keypoints(src, warp);
        let covisible = warped.iter().flatten().count();
        if covisible == 0 || dst.is_empty() {
            return None;
        }
        let matched = mutual_nn(&warped, &dst.pixel_coords(), epsilon_px).len();
        Some(matched as f64 / covisible as f64)
    };
    let fwd = one_way(kps_a, kps_b, warp_ab);
    let bwd = one_way(kps_b, kps_a, &warp_ab.inverse());
    match (fwd, bwd) {
        (Some(f), Some(b)) => Some(0.5 * (f + b)),
        (Some(f), None) => Some(f),
        (None, Some(b)) => Some(b),
        (None, None) => None,
    }
}

/// Mutual-nearest one-to-one matching of keypoints across views under the
/// ground-truth warp within `epsilon_px`.
pub fn oracle_match(
    kps_a: &KeypointSet,
    kps_b: &KeypointSet,
    warp_ab: &Warp,
    epsilon_px: f64,
) -> MatchSet {
    let warped = warp_keypoints(kps_a, warp_ab);
    let matched = mutual_nn(&warped, &kps_b.pixel_coords(), epsilon_px);
    MatchSet {
        pairs: matched.iter().map(|&(i, j, _)| (i, j)).collect(),
        residuals: matched.iter().map(|&(_, _, d)| d).collect(),
    }
}

/// Camera-normalized coordinates of a keypoint.
fn normalized_coords(kp: &crate::sampler::Keypoint, set: &KeypointSet, k: &Intrinsics) -> (f64, f64) {
    let px = normalized_to_pixel(kp.x, set.width);
    let py = normalized_to_pixel(kp.y, set.height);
    ((px - k.cx) / k.fx, (py - k.cy) / k.fy)
}

/// Least-squares essential matrix from ≥ 8 normalized correspondences,
/// with the (sigma, sigma, 0) singular-value structure enforced.
fn eight_point(points: &[((f64, f64), (f64, f64))]) -> Option<Matrix3<f64>> {
    let n = points.len();
    let mut a = DMatrix::zeros(n, 9);
    for (r, &((x1, y1), (x2, y2))) in points.iter().enumerate() {
        // Row = kron(x2, x1) for the constraint x2^T E x1 = 0.
        let row = [x2 * x1, x2 * y1, x2, y2 * x1, y2 * y1, y2, x1, y1, 1.0];
        for (c, v) in row.iter().enumerate() {
            a[(r, c)] = *v;
        }
    }
    // Thin SVDs drop the null space for wide systems; the 9x9 normal matrix
    // always exposes it.
    let ata = a.transpose() * &a;
    let svd = ata.svd(false, true);
    let v_t = svd.v_t.as_ref()?;
    let min_idx = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)?;
    let e = v_t.row(min_idx);
    let e = Matrix3::new(e[0], e[1], e[2], e[3], e[4], e[5], e[6], e[7], e[8]);
    // Project onto the essential manifold.
    let svd3 = e.svd(true, true);
    let (u, vt) = (svd3.u?, svd3.v_t?);
    let s = 0.5 * (svd3.singular_values[0] + svd3.singular_values[1]);
    Some(u * Matrix3::from_diagonal(&Vector3::new(s, s, 0.0)) * vt)
}

/// First-order (Sampson) distance of a correspondence to an essential matrix,
/// in normalized units.
fn sampson_distance(e: &Matrix3<f64>, x1: (f64, f64), x2: (f64, f64)) -> f64 {
    let p1 = Vector3::new(x1.0, x1.1, 1.0);
    let p2 = Vector3::new(x2.0, x2.1, 1.0);
    let ep1 = e * p1;
    let etp2 = e.transpose() * p2;
    let num = p2.dot(&ep1);
    let den = ep1.x * ep1.x + ep1.y * ep1.y + etp2.x * etp2.x + etp2.y * etp2.y;
    if den <= 0.0 {
        return f64::INFINITY;
    }
    (num * num / den).sqrt()
}

/// Depths of a triangulated point in both cameras for candidate (R, t):
/// solves z2*x2 = R z1*x1 + t in least squares.
fn triangulate_depths(
    r: &Matrix3<f64>,
    t: &Vector3<f64>,
    x1: (f64, f64),
    x2: (f64, f64),
) -> (f64, f64) {
    let d1 = r * Vector3::new(x1.0, x1.1, 1.0);
    let d2 = Vector3::new(x2.0, x2.1, 1.0);
    // Columns [d1, -d2], normal equations for [z1, z2].
    let a11 = d1.dot(&d1);
    let a12 = -d1.dot(&d2);
    let a22 = d2.dot(&d2);
    let b1 = -d1.dot(t);
    let b2 = d2.dot(t);
    let det = a11 * a22 - a12 * a12;
    if det.abs() < 1e-15 {
        return (0.0, 0.0);
    }
    ((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det)
}

/// Decomposes an essential matrix and selects the (R, t) candidate by a
/// cheirality vote over the given correspondences.
fn decompose_essential(
    e: &Matrix3<f64>,
    points: &[((f64, f64), (f64, f64))],
) -> Option<(Matrix3<f64>, Vector3<f64>)> {
    let svd = e.svd(true, true);
    let mut u = svd.u?;
    let mut vt = svd.v_t?;
    // E is defined up to sign; make both factors proper rotations.
    if u.determinant() < 0.0 {
        u = -u;
    }
    if vt.determinant() < 0.0 {
        vt = -vt;
    }
    let w = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let r1 = u * w * vt;
    let r2 = u * w.transpose() * vt;
    let t = u.column(2).into_owned();
    let mut best: Option<((Matrix3<f64>, Vector3<f64>), usize)> = None;
    for r in [r1, r2] {
        for sign in [1.0, -1.0] {
            let tc = t * sign;
            let votes = points
                .iter()
                .filter(|&&(x1, x2)| {
                    let (z1, z2) = triangulate_depths(&r, &tc, x1, x2);
                    z1 > 0.0 && z2 > 0.0
                })
                .count();
            if best.as_ref().map_or(true, |(_, v)| votes > *v) {
                best = Some(((r, tc), votes));
            }
        }
    }
    best.map(|(cand, _)| cand)
}

/// Robust relative pose from matched keypoints: 8-point essential-matrix
/// hypotheses inside a RANSAC loop with Sampson scoring, inlier refit, and
/// a cheirality vote. Matches are canonicalized by sorting so the result is
/// invariant to input permutation.
pub fn estimate_pose(
    matches: &MatchSet,
    kps_a: &KeypointSet,
    kps_b: &KeypointSet,
    intrinsics_a: &Intrinsics,
    intrinsics_b: &Intrinsics,
    config: &RansacConfig,
) -> Result<PoseEstimate> {
    if matches.len() < 8 {
        return Err(Error::InsufficientMatches {
            needed: 8,
            got: matches.len(),
        });
    }
    // Canonical order: permutation-invariant sampling.
    let mut order: Vec<usize> = (0..matches.len()).collect();
    order.sort_by_key(|&i| matches.pairs[i]);
    let points: Vec<((f64, f64), (f64, f64))> = order
        .iter()
        .map(|&i| {
            let (ia, ib) = matches.pairs[i];
            (
                normalized_coords(&kps_a.points[ia], kps_a, intrinsics_a),
                normalized_coords(&kps_b.points[ib], kps_b, intrinsics_b),
            )
        })
        .collect();

    let focal = 0.25
        * (intrinsics_a.fx.abs()
            + intrinsics_a.fy.abs()
            + intrinsics_b.fx.abs()
            + intrinsics_b.fy.abs());
    let threshold = config.threshold_px / focal;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = points.len();
    let mut best_inliers: Vec<bool> = Vec::new();
    let mut best_count = 0usize;
    let mut max_iters = config.max_iters;
    let mut iter = 0;
    while iter < max_iters {
        iter += 1;
        // Minimal sample of 8 distinct indices.
        let mut sample = Vec::with_capacity(8);
        while sample.len() < 8 {
            let idx = rng.gen_range(0..n);
            if !sample.contains(&idx) {
                sample.push(idx);
            }
        }
        let sample_pts: Vec<_> = sample.iter().map(|&i| points[i]).collect();
        let Some(e) = eight_point(&sample_pts) else {
            continue;
        };
        let inliers: Vec<bool> = points
            .iter()
            .map(|&(x1, x2)| sampson_distance(&e, x1, x2) <= threshold)
            .collect();
        let count = inliers.iter().filter(|&&b| b).count();
        if count > best_count {
            best_count = count;
            best_inliers = inliers;
            // Adaptive early exit.
            let w = count as f64 / n as f64;
            let denom = (1.0 - w.powi(8)).max(1e-12).ln();
            let needed = ((1.0 - config.confidence).ln() / denom).ceil();
            if needed.is_finite() && needed >= 0.0 {
                max_iters = max_iters.min((needed as usize).max(iter));
            }
        }
    }
    if best_count < 8 {
        return Err(Error::InsufficientMatches {
            needed: 8,
            got: best_count,
        });
    }
    let inlier_pts: Vec<_> = points
        .iter()
        .zip(&best_inliers)
        .filter_map(|(&p, &keep)| keep.then_some(p))
        .collect();
    let e = eight_point(&inlier_pts)
        .ok_or_else(|| Error::DegenerateTarget("essential-matrix refit failed".into()))?;
    let (rotation, translation) = decompose_essential(&e, &inlier_pts)
        .ok_or_else(|| Error::DegenerateTarget("essential decomposition failed".into()))?;

    // Map inlier flags back to the caller's match order.
    let mut inliers = vec![false; matches.len()];
    for (slot, &orig) in order.iter().enumerate() {
        inliers[orig] = best_inliers[slot];
    }
    Ok(PoseEstimate {
        rotation,
        translation,
        inliers,
    })
}

/// Ground-truth relative pose between the two views of a pair:
/// `X_b = R X_a + t`.
pub fn relative_pose(view_a: &CameraView, view_b: &CameraView) -> (Matrix3<f64>, Vector3<f64>) {
    let r = view_b.rotation * view_a.rotation.transpose();
    let t = view_b.translation - r * view_a.translation;
    (r, t)
}

/// Pose error in degrees: max of geodesic rotation error and translation
/// direction angle. Translation error is 0 when the ground-truth baseline
/// is (numerically) zero.
pub fn pose_error(est: &PoseEstimate, gt_rotation: &Matrix3<f64>, gt_translation: &Vector3<f64>) -> f64 {
    let r_rel = est.rotation.transpose() * gt_rotation;
    let cos_r = ((r_rel.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let rot_err = cos_r.acos().to_degrees();
    let t_norm = gt_translation.norm();
    let trans_err = if t_norm < 1e-12 {
        0.0
    } else {
        let cos_t = (est.translation.dot(gt_translation) / (est.translation.norm() * t_norm))
            .clamp(-1.0, 1.0);
        cos_t.acos().to_degrees()
    };
    rot_err.max(trans_err)
}

/// Pose AUC at each threshold: area under the accuracy-vs-error curve up to
/// the threshold (trapezoid over sorted errors), normalized by the
/// threshold. Failures (None) count as infinite error.
pub fn auc(errors: &[Option<f64>], thresholds: &[f64]) -> Result<Vec<f64>> {
    if errors.is_empty() {
        return Err(Error::Contract("auc: empty error list".into()));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Contract("auc: thresholds must ascend".into()));
    }
    let n = errors.len() as f64;
    let mut sorted: Vec<f64> = errors
        .iter()
        .map(|e| e.unwrap_or(f64::INFINITY))
        .collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        // Piecewise-linear recall curve through (0, 0) and each
        // (error_i, (i+1)/n), truncated at the threshold.
        let mut area = 0.0;
        let mut prev_e = 0.0;
        let mut prev_r = 0.0;
        for (i, &e) in sorted.iter().enumerate() {
            if e > t {
                break;
            }
            let r = (i + 1) as f64 / n;
            area += 0.5 * (prev_r + r) * (e - prev_e);
            prev_e = e;
            prev_r = r;
        }
        area += prev_r * (t - prev_e);
        out.push(area / t);
    }
    Ok(out)
}

/// Mean accuracy over integer thresholds 1..=max_threshold degrees.
pub fn maa(errors: &[Option<f64>], max_threshold: usize) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::Contract("maa: empty error list".into()));
    }
    let n = errors.len() as f64;
    let mut acc = 0.0;
    for t in 1..=max_threshold {
        let below = errors
            .iter()
            .filter(|e| e.map_or(false, |v| v < t as f64))
            .count();
        acc += below as f64 / n;
    }
    Ok(acc / max_threshold as f64)
}

/// A score-map producer evaluated downstream. Implementations get the full
/// pair so oracle detectors can use ground-truth context.
pub trait Detector {
    fn score_map(&self, pair: &TwoViewPair, side: ViewSide) -> Result<ProbMap>;
    fn id(&self) -> String;
}

/// The trained net as a detector.
pub struct NetDetector<'a> {
    pub net: &'a crate::detector::ScoreNet,
    pub id: String,
    pub step: usize,
}

impl Detector for NetDetector<'_> {
    fn score_map(&self, pair: &TwoViewPair, side: ViewSide) -> Result<ProbMap> {
        let view = match side {
            ViewSide::A => &pair.view_a,
            ViewSide::B => &pair.view_b,
        };
        Ok(crate::detector::to_prob(&self.net.forward(&view.image)?))
    }

    fn id(&self) -> String {
        self.id.clone()
    }
}

/// Oracle detector: the smoothed track prior itself ("perfect target").
pub struct PriorDetector {
    pub sigma: f64,
}

impl Detector for PriorDetector {
    fn score_map(&self, pair: &TwoViewPair, side: ViewSide) -> Result<ProbMap> {
        let prior = targets::base_prior(pair, side)?;
        Ok(targets::smooth(&prior, self.sigma))
    }

    fn id(&self) -> String {
        "prior-oracle".into()
    }
}

/// Full per-pair pipeline over a test set; per-pair pose failures are
/// recorded, not fatal.
pub fn evaluate_detector(
    detector: &dyn Detector,
    step: usize,
    pairs: &[TwoViewPair],
    sample: &SampleConfig,
    config: &EvalConfig,
) -> Result<MetricsReport> {
    config.validate()?;
    sample.validate()?;
    let mut rep_sum = 0.0;
    let mut rep_count = 0usize;
    let mut errors: Vec<Option<f64>> = Vec::with_capacity(pairs.len());
    let mut kp_total = 0usize;
    for (pi, pair) in pairs.iter().enumerate() {
        let prob_a = detector.score_map(pair, ViewSide::A)?;
        let prob_b = detector.score_map(pair, ViewSide::B)?;
        let kps_a = sample_keypoints(&prob_a, sample)?;
        let kps_b = sample_keypoints(&prob_b, sample)?;
        kp_total += kps_a.len() + kps_b.len();
        let warp = Warp::new(&pair.view_a, &pair.view_b);
        if let Some(rep) = repeatability(&kps_a, &kps_b, &warp, config.epsilon_px) {
            rep_sum += rep;
            rep_count += 1;
        }
        let matches = oracle_match(&kps_a, &kps_b, &warp, config.epsilon_px);
        let mut ransac = config.ransac.clone();
        ransac.seed = config.ransac.seed.wrapping_add(pi as u64);
        let err = estimate_pose(
            &matches,
            &kps_a,
            &kps_b,
            &pair.view_a.intrinsics,
            &pair.view_b.intrinsics,
            &ransac,
        )
        .ok()
        .map(|est| {
            let (gt_r, gt_t) = relative_pose(&pair.view_a, &pair.view_b);
            pose_error(&est, &gt_r, &gt_t)
        });
        errors.push(err);
    }
    let auc_vals = auc(&errors, &config.auc_thresholds)?;
    let maa_val = maa(&errors, config.maa_threshold)?;
    Ok(MetricsReport {
        format_version: MetricsReport::FORMAT_VERSION,
        checkpoint_id: detector.id(),
        step,
        repeatability: (rep_count > 0).then(|| rep_sum / rep_count as f64),
        auc_thresholds: config.auc_thresholds.clone(),
        auc: auc_vals,
        maa: maa_val,
        pairs_failed: errors.iter().filter(|e| e.is_none()).count(),
        per_pair_errors: errors,
        mean_keypoints: kp_total as f64 / (2 * pairs.len().max(1)) as f64,
        pairs_evaluated: pairs.len(),
    })
}

/// Evaluates a training checkpoint on held-out pairs.
pub fn evaluate_checkpoint(
    checkpoint: &crate::detector::Checkpoint,
    pairs: &[TwoViewPair],
    sample: &SampleConfig,
    config: &EvalConfig,
) -> Result<MetricsReport> {
    let detector = NetDetector {
        net: &checkpoint.net,
        id: format!("{}@{}", &checkpoint.config_hash[..12.min(checkpoint.config_hash.len())], checkpoint.step),
        step: checkpoint.step,
    };
    evaluate_detector(&detector, checkpoint.step, pairs, sample, config)
}
