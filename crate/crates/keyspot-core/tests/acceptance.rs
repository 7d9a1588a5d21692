//! Acceptance suite: one test per pinned criterion, each printing a single
//! PASS/FAIL line. Oracles here are written independently of the library
//! implementations they check (inline math, brute force, finite
//! differences).
//!
//! The directional criteria (7-9) train real nets on a shared pregenerated
//! pair pool; those three tests together take most of an hour on one core.

use std::sync::OnceLock;

use nalgebra::{Matrix3, Point3, Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use keyspot_core::augment::{apply_to_view, AugTransform};
use keyspot_core::detector::{
    to_prob, train, train_with_observer, Checkpoint, PairSource, TrainConfig,
};
use keyspot_core::error::Result;
use keyspot_core::evalbench::{
    estimate_pose, evaluate_checkpoint, oracle_match, relative_pose, repeatability, EvalConfig,
    MatchSet, RansacConfig,
};
use keyspot_core::geometry::{project, warp_point, CameraView, Warp, WarpResult};
use keyspot_core::grid::pixel_to_normalized;
use keyspot_core::losses::{
    coverage_loss, coverage_loss_grad, keypoint_ce, keypoint_ce_grad, LossConfig,
};
use keyspot_core::sampler::{sample_keypoints, Keypoint, KeypointSet, SampleConfig};
use keyspot_core::scenegen::{generate_scene, sample_pair, PairConfig, SceneConfig, TwoViewPair};
use keyspot_core::targets::{
    nms_mask, topk_binarize, ProbMap, TargetMap, TopkScope,
};
use keyspot_core::Grid;

// ---------------------------------------------------------------------------
// Shared fixtures

fn report(criterion: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "[{}] criterion {criterion}: {name} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} ({name}) failed: {detail}");
}

fn gen_pair(size: usize, seed: u64) -> TwoViewPair {
    let scene_cfg = SceneConfig {
        image_size: size,
        focal: size as f64,
        ..Default::default()
    };
    for salt in 0..8u64 {
        if let Ok(scene) = generate_scene(&scene_cfg, seed ^ (salt << 56)) {
            if let Ok(pair) = sample_pair(&scene, &PairConfig::default(), seed.wrapping_add(salt)) {
                return pair;
            }
        }
    }
    panic!("no valid pair for seed {seed}")
}

/// Fixed pool of distinct 128 px training pairs, generated once.
fn pool() -> &'static Vec<TwoViewPair> {
    static POOL: OnceLock<Vec<TwoViewPair>> = OnceLock::new();
    POOL.get_or_init(|| (0..250).map(|i| gen_pair(128, 5000 + i)).collect())
}

struct Pool<'a>(&'a [TwoViewPair]);

impl PairSource for Pool<'_> {
    fn num_pairs(&self) -> usize {
        self.0.len()
    }
    fn pair(&self, idx: usize) -> Result<TwoViewPair> {
        Ok(self.0[idx % self.0.len()].clone())
    }
}

fn kpset(pixels: &[(f64, f64)], size: usize) -> KeypointSet {
    KeypointSet {
        width: size,
        height: size,
        points: pixels
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Keypoint {
                x: pixel_to_normalized(x, size),
                y: pixel_to_normalized(y, size),
                score: 1.0 - i as f64 * 1e-4,
            })
            .collect(),
    }
}

fn random_prob(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ProbMap {
    let g = Grid::from_vec(w, h, (0..w * h).map(|_| rng.gen_range(0.0..1.0)).collect());
    ProbMap::unnormalized(g).normalize().unwrap()
}

// ---------------------------------------------------------------------------
// Criterion 1: every target pixel is an h x h local maximum of the posterior
// over >= 100 training steps with the default target/loss config.

#[test]
fn c01_nms_target_invariant() {
    let config = TrainConfig {
        pairs_total: 700, // 100 steps of batch 7
        ..Default::default()
    };
    let h = config.target.nms_window as i64;
    let mut steps = 0usize;
    let mut views_checked = 0usize;
    let mut violations = 0usize;
    train_with_observer(&config, &Pool(pool()), &mut |rec| {
        steps += 1;
        for (posterior, _nms, target) in &rec.views {
            views_checked += 1;
            let w = posterior.width() as i64;
            let hh = posterior.height() as i64;
            for y in 0..hh {
                for x in 0..w {
                    if !*target.mask.get(x as usize, y as usize) {
                        continue;
                    }
                    let v = *posterior.values.get(x as usize, y as usize);
                    for dy in -(h / 2)..=h / 2 {
                        for dx in -(h / 2)..=h / 2 {
                            let (xi, yi) = (x + dx, y + dy);
                            if xi < 0 || yi < 0 || xi >= w || yi >= hh {
                                continue;
                            }
                            if *posterior.values.get(xi as usize, yi as usize) > v {
                                violations += 1;
                            }
                        }
                    }
                }
            }
        }
    })
    .unwrap();
    report(
        1,
        "NMS-target invariant",
        steps >= 100 && views_checked > 0 && violations == 0,
        &format!("{steps} steps, {views_checked} views, {violations} violations"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: per-pair scope gives every view exactly min(k, survivors)
// targets; batch scope produces unequal per-view counts in a 50-batch run.

#[test]
fn c02_per_pair_budget_invariant() {
    let mut per_pair_ok = true;
    let mut checked = 0usize;
    let config = TrainConfig {
        pairs_total: 350, // 50 steps
        ..Default::default()
    };
    let k = config.target.k;
    train_with_observer(&config, &Pool(pool()), &mut |rec| {
        for (posterior, nms, target) in &rec.views {
            let survivors = posterior
                .values
                .data()
                .iter()
                .zip(nms.data())
                .filter(|&(&v, &m)| m && v > 0.0)
                .count();
            let count = target.mask.data().iter().filter(|&&b| b).count();
            if count != k.min(survivors) || count != target.k_effective {
                per_pair_ok = false;
            }
            checked += 1;
        }
    })
    .unwrap();

    let mut batch_config = config.clone();
    batch_config.target.topk_scope = TopkScope::PerBatch;
    let mut unequal_batches = 0usize;
    train_with_observer(&batch_config, &Pool(pool()), &mut |rec| {
        let counts: Vec<usize> = rec.views.iter().map(|(_, _, t)| t.k_effective).collect();
        if counts.windows(2).any(|w| w[0] != w[1]) {
            unequal_batches += 1;
        }
    })
    .unwrap();

    report(
        2,
        "per-pair budget invariant",
        per_pair_ok && checked > 0 && unequal_batches >= 1,
        &format!(
            "{checked} per-pair views exact, {unequal_batches}/50 batch-scope batches unequal"
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: analytic loss gradients vs central finite differences on
// 8 x 8 maps, relative L2 error < 1e-4, 20 random trials per loss.

fn softmax8(logits: &Grid<f64>) -> ProbMap {
    let max = logits.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.data().iter().map(|&v| (v - max).exp()).collect();
    let s: f64 = exp.iter().sum();
    ProbMap {
        values: Grid::from_vec(logits.width(), logits.height(), exp.iter().map(|e| e / s).collect()),
        normalized: true,
    }
}

fn fd_check(
    logits: &Grid<f64>,
    loss: &dyn Fn(&ProbMap) -> f64,
    analytic: &Grid<f64>,
) -> f64 {
    let step = 1e-5;
    let mut num = Grid::zeros(8, 8);
    for i in 0..64 {
        let mut plus = logits.clone();
        plus.data_mut()[i] += step;
        let mut minus = logits.clone();
        minus.data_mut()[i] -= step;
        num.data_mut()[i] = (loss(&softmax8(&plus)) - loss(&softmax8(&minus))) / (2.0 * step);
    }
    let diff: f64 = num
        .data()
        .iter()
        .zip(analytic.data())
        .map(|(n, a)| (n - a).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = num.data().iter().map(|n| n * n).sum::<f64>().sqrt();
    diff / norm.max(1e-12)
}

#[test]
fn c03_loss_gradient_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut worst_ce = 0.0f64;
    let mut worst_cov = 0.0f64;
    let loss_cfg = LossConfig::default();
    for _ in 0..20 {
        let logits = Grid::from_vec(8, 8, (0..64).map(|_| rng.gen_range(-2.0..2.0)).collect());
        let p = softmax8(&logits);

        // keypoint CE against a random 5-pixel target
        let mut mask = Grid::filled(8, 8, false);
        while mask.data().iter().filter(|&&b| b).count() < 5 {
            mask.data_mut()[rng.gen_range(0..64)] = true;
        }
        let target = TargetMap {
            k_effective: mask.data().iter().filter(|&&b| b).count(),
            mask,
        };
        let analytic = keypoint_ce_grad(&p, &target);
        let rel = fd_check(&logits, &|p| keypoint_ce(p, &target).unwrap(), &analytic);
        worst_ce = worst_ce.max(rel);

        // coverage loss against a random MVS mask
        let mut mvs = Grid::filled(8, 8, false);
        while mvs.data().iter().filter(|&&b| b).count() < 10 {
            mvs.data_mut()[rng.gen_range(0..64)] = true;
        }
        let analytic = coverage_loss_grad(&p, &mvs, &loss_cfg).unwrap();
        let rel = fd_check(
            &logits,
            &|p| coverage_loss(p, &mvs, &loss_cfg).unwrap(),
            &analytic,
        );
        worst_cov = worst_cov.max(rel);
    }
    report(
        3,
        "loss gradient checks",
        worst_ce < 1e-4 && worst_cov < 1e-4,
        &format!("worst rel err: keypoint_ce {worst_ce:.2e}, coverage {worst_cov:.2e}"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: geometry and selection primitives vs independent oracles.

/// Inline reimplementation of the depth lookup (harmonic bilinear).
fn oracle_depth(view: &CameraView, x: f64, y: f64) -> Option<f64> {
    let (w, h) = (view.width() as i64, view.height() as i64);
    if !(x >= -0.5 && y >= -0.5 && x <= w as f64 - 0.5 && y <= h as f64 - 0.5) {
        return None;
    }
    let (x0, y0) = (x.floor() as i64, y.floor() as i64);
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let mut acc = 0.0;
    for (dx, dy, wgt) in [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ] {
        let xi = (x0 + dx).clamp(0, w - 1) as usize;
        let yi = (y0 + dy).clamp(0, h - 1) as usize;
        if wgt > 0.0 {
            if !*view.depth_valid.get(xi, yi) {
                return None;
            }
            acc += wgt / *view.depth.get(xi, yi);
        }
    }
    Some(1.0 / acc)
}

/// Inline warp of one source pixel: unproject, transform, project, occlusion
/// check — all written out against the camera fields directly.
enum OracleWarp {
    Valid(f64, f64),
    Blocked,
}

fn oracle_warp(x: f64, y: f64, src: &CameraView, tgt: &CameraView, rel_tol: f64) -> OracleWarp {
    let Some(d) = oracle_depth(src, x, y) else {
        return OracleWarp::Blocked;
    };
    let ks = &src.intrinsics;
    let pc_src = Vector3::new((x - ks.cx) / ks.fx * d, (y - ks.cy) / ks.fy * d, d);
    let world = src.rotation.transpose() * (pc_src - src.translation);
    let pc = tgt.rotation * world + tgt.translation;
    if pc.z <= 0.0 {
        return OracleWarp::Blocked;
    }
    let kt = &tgt.intrinsics;
    let tx = kt.fx * pc.x / pc.z + kt.cx;
    let ty = kt.fy * pc.y / pc.z + kt.cy;
    let (tw, th) = (tgt.width() as f64, tgt.height() as f64);
    if !(tx >= -0.5 && ty >= -0.5 && tx <= tw - 0.5 && ty <= th - 0.5) {
        return OracleWarp::Blocked;
    }
    let Some(dt) = oracle_depth(tgt, tx, ty) else {
        return OracleWarp::Blocked;
    };
    if (pc.z - dt).abs() > rel_tol * 0.5 * (pc.z + dt) {
        return OracleWarp::Blocked;
    }
    OracleWarp::Valid(tx, ty)
}

fn oracle_bilinear(g: &Grid<f64>, x: f64, y: f64) -> f64 {
    let (w, h) = (g.width() as i64, g.height() as i64);
    let (x0, y0) = (x.floor() as i64, y.floor() as i64);
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let at = |xi: i64, yi: i64| *g.get(xi.clamp(0, w - 1) as usize, yi.clamp(0, h - 1) as usize);
    at(x0, y0) * (1.0 - fx) * (1.0 - fy)
        + at(x0 + 1, y0) * fx * (1.0 - fy)
        + at(x0, y0 + 1) * (1.0 - fx) * fy
        + at(x0 + 1, y0 + 1) * fx * fy
}

/// Brute-force mutual-nearest matching used to check both `repeatability`
/// and `oracle_match`.
fn brute_mutual_nn(
    warped: &[Option<(f64, f64)>],
    targets: &[(f64, f64)],
    eps: f64,
) -> Vec<(usize, usize, f64)> {
    let d2 = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
    let mut out = Vec::new();
    for (i, w) in warped.iter().enumerate() {
        let Some(wp) = w else { continue };
        let mut best: Option<(usize, f64)> = None;
        for (j, &t) in targets.iter().enumerate() {
            let d = d2(*wp, t);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let Some((j, d)) = best else { continue };
        // mutual: j's nearest warped source must be i
        let mut back: Option<(usize, f64)> = None;
        for (i2, w2) in warped.iter().enumerate() {
            if let Some(wp2) = w2 {
                let dd = d2(*wp2, targets[j]);
                if back.map_or(true, |(_, bd)| dd < bd) {
                    back = Some((i2, dd));
                }
            }
        }
        if d <= eps * eps && back.map(|(i2, _)| i2) == Some(i) {
            out.push((i, j, d.sqrt()));
        }
    }
    out
}

#[test]
fn c04_geometry_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);

    // warp_map vs inline pointwise oracle, 50 pairs, <= 1e-6
    let mut worst = 0.0f64;
    let mut mask_mismatch = 0usize;
    for s in 0..50 {
        let pair = gen_pair(64, 20_000 + s);
        let map = random_prob(&mut rng, 64, 64);
        let warp = Warp::new(&pair.view_a, &pair.view_b);
        let (out, mask) = keyspot_core::geometry::warp_map(&map, &warp).unwrap();
        for y in 0..64 {
            for x in 0..64 {
                match oracle_warp(
                    x as f64,
                    y as f64,
                    &pair.view_a,
                    &pair.view_b,
                    warp.rel_depth_tol,
                ) {
                    OracleWarp::Valid(tx, ty) => {
                        if !*mask.get(x, y) {
                            mask_mismatch += 1;
                            continue;
                        }
                        let expect = oracle_bilinear(&map.values, tx, ty);
                        worst = worst.max((expect - *out.values.get(x, y)).abs());
                    }
                    OracleWarp::Blocked => {
                        if *mask.get(x, y) {
                            mask_mismatch += 1;
                        }
                        if *out.values.get(x, y) != 0.0 {
                            mask_mismatch += 1;
                        }
                    }
                }
            }
        }
    }
    let warp_ok = worst <= 1e-6 && mask_mismatch == 0;

    // nms_mask vs brute force, 50 instances
    let mut nms_ok = true;
    for i in 0..50 {
        let m = random_prob(&mut rng, 32, 32);
        let h = [1usize, 3, 5][i % 3];
        let got = nms_mask(&m, h);
        let r = (h / 2) as i64;
        for y in 0..32i64 {
            for x in 0..32i64 {
                let v = *m.values.get(x as usize, y as usize);
                let mut is_max = true;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let (xi, yi) = (x + dx, y + dy);
                        if (0..32).contains(&xi)
                            && (0..32).contains(&yi)
                            && *m.values.get(xi as usize, yi as usize) > v
                        {
                            is_max = false;
                        }
                    }
                }
                if *got.get(x as usize, y as usize) != is_max {
                    nms_ok = false;
                }
            }
        }
    }

    // topk_binarize vs brute force, 50 instances
    let mut topk_ok = true;
    for _ in 0..50 {
        let m = random_prob(&mut rng, 32, 32);
        let nms = nms_mask(&m, 3);
        let k = rng.gen_range(1..=60);
        let got = topk_binarize(&m, &nms, k).unwrap();
        let mut cand: Vec<(f64, usize)> = m
            .values
            .data()
            .iter()
            .enumerate()
            .filter(|&(i, &v)| v > 0.0 && nms.data()[i])
            .map(|(i, &v)| (v, i))
            .collect();
        cand.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        cand.truncate(k);
        let want: std::collections::BTreeSet<usize> = cand.iter().map(|&(_, i)| i).collect();
        let have: std::collections::BTreeSet<usize> =
            got.set_indices().into_iter().collect();
        if want != have || got.k_effective != want.len() {
            topk_ok = false;
        }
    }

    // repeatability and oracle_match vs brute force, 50 instances on real
    // warps (point warping itself is covered by the inline oracle above)
    let mut match_ok = true;
    let mut rep_ok = true;
    for s in 0..50 {
        let pair = gen_pair(64, 21_000 + s);
        let warp = Warp::new(&pair.view_a, &pair.view_b);
        let n = rng.gen_range(15..40);
        let pix = |rng: &mut ChaCha8Rng| -> Vec<(f64, f64)> {
            (0..n)
                .map(|_| (rng.gen_range(0.0..63.0), rng.gen_range(0.0..63.0)))
                .collect()
        };
        let (pa, pb) = (pix(&mut rng), pix(&mut rng));
        let (ka, kb) = (kpset(&pa, 64), kpset(&pb, 64));
        let eps = 2.0;

        let warp_pts = |pts: &[(f64, f64)], w: &Warp| -> Vec<Option<(f64, f64)>> {
            pts.iter()
                .map(|&(x, y)| match warp_point(x, y, w) {
                    WarpResult::Valid { x, y, .. }
                        if x > -0.5 && x < 63.5 && y > -0.5 && y < 63.5 =>
                    {
                        Some((x, y))
                    }
                    _ => None,
                })
                .collect()
        };
        let fwd = brute_mutual_nn(&warp_pts(&pa, &warp), &pb, eps);
        let got = oracle_match(&ka, &kb, &warp, eps);
        if got.pairs != fwd.iter().map(|&(i, j, _)| (i, j)).collect::<Vec<_>>() {
            match_ok = false;
        }

        let expect_rep = {
            let dir = |src: &[(f64, f64)], dst: &[(f64, f64)], w: &Warp| -> Option<f64> {
                let warped = warp_pts(src, w);
                let covis = warped.iter().flatten().count();
                if covis == 0 || dst.is_empty() {
                    return None;
                }
                Some(brute_mutual_nn(&warped, dst, eps).len() as f64 / covis as f64)
            };
            match (dir(&pa, &pb, &warp), dir(&pb, &pa, &warp.inverse())) {
                (Some(f), Some(b)) => Some(0.5 * (f + b)),
                (Some(f), None) => Some(f),
                (None, Some(b)) => Some(b),
                (None, None) => None,
            }
        };
        let got_rep = repeatability(&ka, &kb, &warp, eps);
        match (got_rep, expect_rep) {
            (Some(g), Some(e)) if (g - e).abs() < 1e-12 => {}
            (None, None) => {}
            _ => rep_ok = false,
        }
    }

    report(
        4,
        "geometry oracle equivalence",
        warp_ok && nms_ok && topk_ok && match_ok && rep_ok,
        &format!(
            "warp worst {worst:.2e} mask_mismatch {mask_mismatch}, nms {nms_ok}, topk {topk_ok}, match {match_ok}, rep {rep_ok}"
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: pose solver sanity.

fn posed_view(size: usize, rotation: Matrix3<f64>, translation: Vector3<f64>) -> CameraView {
    CameraView {
        intrinsics: keyspot_core::geometry::Intrinsics {
            fx: size as f64,
            fy: size as f64,
            cx: (size as f64 - 1.0) / 2.0,
            cy: (size as f64 - 1.0) / 2.0,
        },
        rotation,
        translation,
        image: Grid::filled(size, size, 0.0f32),
        depth: Grid::filled(size, size, 1.0),
        depth_valid: Grid::filled(size, size, true),
    }
}

fn rotation_error_deg(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    let r = a.transpose() * b;
    let c = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    c.acos().to_degrees()
}

/// Projected correspondences of random scene points under a random pose.
fn synth_matches(
    rng: &mut ChaCha8Rng,
    size: usize,
    n: usize,
) -> (CameraView, CameraView, Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let view_a = posed_view(size, Matrix3::identity(), Vector3::zeros());
    let axis = Unit::new_normalize(Vector3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    ));
    let r = Rotation3::from_axis_angle(&axis, rng.gen_range(0.05..0.25));
    let t = Vector3::new(
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.2..0.2),
    );
    let view_b = posed_view(size, *r.matrix(), t);
    let mut pa = Vec::new();
    let mut pb = Vec::new();
    while pa.len() < n {
        let p = Point3::new(
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(2.0..6.0),
        );
        let (qa, qb) = (
            project(&[p], &view_a).remove(0),
            project(&[p], &view_b).remove(0),
        );
        let inside = |q: &keyspot_core::geometry::Projection| {
            q.valid && view_a.contains(q.x, q.y)
        };
        if inside(&qa) && inside(&qb) {
            pa.push((qa.x, qa.y));
            pb.push((qb.x, qb.y));
        }
    }
    (view_a, view_b, pa, pb)
}

#[test]
fn c05_pose_solver_sanity() {
    let size = 256;
    let ransac = RansacConfig::default();

    // noiseless general position
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst_noiseless = 0.0f64;
    for _ in 0..5 {
        let (va, vb, pa, pb) = synth_matches(&mut rng, size, 60);
        let (ka, kb) = (kpset(&pa, size), kpset(&pb, size));
        let matches = MatchSet {
            pairs: (0..pa.len()).map(|i| (i, i)).collect(),
            residuals: vec![0.0; pa.len()],
        };
        let est = estimate_pose(&matches, &ka, &kb, &va.intrinsics, &vb.intrinsics, &ransac)
            .unwrap();
        let (gt_r, gt_t) = relative_pose(&va, &vb);
        worst_noiseless =
            worst_noiseless.max(keyspot_core::evalbench::pose_error(&est, &gt_r, &gt_t));
    }

    // 30% outliers, 0.1 px noise, 20 seeds, median rotation error < 1 deg
    let mut rot_errors = Vec::new();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(5600 + seed);
        let (va, vb, pa, mut pb) = synth_matches(&mut rng, size, 100);
        for p in pb.iter_mut() {
            p.0 += 0.1 * gauss(&mut rng);
            p.1 += 0.1 * gauss(&mut rng);
        }
        for _ in 0..30 {
            let i = rng.gen_range(0..pb.len());
            pb[i] = (
                rng.gen_range(0.0..size as f64 - 1.0),
                rng.gen_range(0.0..size as f64 - 1.0),
            );
        }
        let (ka, kb) = (kpset(&pa, size), kpset(&pb, size));
        let matches = MatchSet {
            pairs: (0..pa.len()).map(|i| (i, i)).collect(),
            residuals: vec![0.0; pa.len()],
        };
        let mut cfg = ransac.clone();
        cfg.seed = seed;
        let est =
            estimate_pose(&matches, &ka, &kb, &va.intrinsics, &vb.intrinsics, &cfg).unwrap();
        let (gt_r, _) = relative_pose(&va, &vb);
        rot_errors.push(rotation_error_deg(&est.rotation, &gt_r));
    }
    rot_errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = rot_errors[rot_errors.len() / 2];

    report(
        5,
        "pose solver sanity",
        worst_noiseless < 0.1 && median < 1.0,
        &format!("noiseless worst {worst_noiseless:.4}°, outlier median {median:.4}°"),
    );
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

// ---------------------------------------------------------------------------
// Criterion 6: augmentation group laws.

/// Grid contents bit-identical. Cameras are deliberately not compared
/// field-wise: the (K, R) realization of a group element is only unique up
/// to a joint sign flip, so camera agreement is checked functionally via
/// projection instead.
fn grids_bit_equal(a: &CameraView, b: &CameraView) -> bool {
    a.image.data().iter().zip(b.image.data()).all(|(x, y)| x.to_bits() == y.to_bits())
        && a.depth.data().iter().zip(b.depth.data()).all(|(x, y)| x.to_bits() == y.to_bits())
        && a.depth_valid.data() == b.depth_valid.data()
}

#[test]
fn c06_augmentation_group_laws() {
    let pair = gen_pair(64, 30_000);
    let view = &pair.view_a;
    let all = AugTransform::all();

    // 64 compositions bit-exact on grids, cameras equivalent under projection
    let probe: Vec<Point3<f64>> = pair
        .tracks
        .points
        .iter()
        .zip(&pair.tracks.visibility_a)
        .filter(|&(_, &v)| v)
        .map(|(p, _)| *p)
        .collect();
    let mut comp_ok = true;
    let mut cam_worst = 0.0f64;
    for t1 in &all {
        for t2 in &all {
            let seq = apply_to_view(&apply_to_view(view, t2).unwrap(), t1).unwrap();
            let composed = apply_to_view(view, &t1.compose(t2)).unwrap();
            if !grids_bit_equal(&seq, &composed) {
                comp_ok = false;
            }
            for (qa, qb) in project(&probe, &seq).iter().zip(project(&probe, &composed)) {
                if qa.valid && qb.valid {
                    cam_worst = cam_worst.max((qa.x - qb.x).abs().max((qa.y - qb.y).abs()));
                }
            }
        }
    }

    // project/transform commutation within 1e-6 px
    let mut worst = 0.0f64;
    let visible: Vec<Point3<f64>> = pair
        .tracks
        .points
        .iter()
        .zip(&pair.tracks.visibility_a)
        .filter(|&(_, &v)| v)
        .map(|(p, _)| *p)
        .collect();
    for t in &all {
        let tv = apply_to_view(view, t).unwrap();
        let before = project(&visible, view);
        let after = project(&visible, &tv);
        for (q0, q1) in before.iter().zip(&after) {
            if !q0.valid || !q1.valid {
                continue;
            }
            let (ex, ey) = t.apply_to_pixel(q0.x, q0.y, view.width());
            worst = worst.max((ex - q1.x).abs().max((ey - q1.y).abs()));
        }
    }

    report(
        6,
        "augmentation group laws",
        comp_ok && cam_worst < 1e-6 && worst < 1e-6,
        &format!(
            "64 compositions grid-bit-exact: {comp_ok}, camera agreement worst {cam_worst:.2e} px, projection commutation worst {worst:.2e} px"
        ),
    );
}

// ---------------------------------------------------------------------------
// Criteria 7-9: directional training experiments on a shared pair pool.

struct HeavyRuns {
    test_pairs: Vec<TwoViewPair>,
    v2_aug: Vec<Checkpoint>,
    v2_noaug: Vec<Checkpoint>,
    /// v1-compat arm matched to the v2 runs (same pair budget and learning
    /// rates), used by criterion 7.
    v1_short: Vec<Checkpoint>,
    /// 8 evenly spaced checkpoints per seed of the 8x-long v1-compat run at
    /// the default learning rates, used by criterion 8.
    v1_long: Vec<Vec<Checkpoint>>,
}

const HEAVY_SEEDS: [u64; 3] = [11, 12, 13];

fn heavy() -> &'static HeavyRuns {
    static HEAVY: OnceLock<HeavyRuns> = OnceLock::new();
    HEAVY.get_or_init(|| {
        let test_pairs: Vec<TwoViewPair> = (0..50).map(|i| gen_pair(128, 9000 + i)).collect();
        // Raised learning rates so 2000 pair presentations produce a
        // measurably specialized detector on one core; identical across the
        // arms being compared.
        let base = TrainConfig {
            pairs_total: 2000,
            lr_decoder: 1e-3,
            lr_encoder: 2.5e-4,
            checkpoint_count: 1,
            ..Default::default()
        };
        let mut v2_aug = Vec::new();
        let mut v2_noaug = Vec::new();
        let mut v1_short = Vec::new();
        let mut v1_long = Vec::new();
        for seed in HEAVY_SEEDS {
            let mut cfg = base.clone();
            cfg.seed = seed;
            v2_aug.push(train(&cfg, &Pool(pool())).unwrap().checkpoints.pop().unwrap());

            let mut cfg = base.clone();
            cfg.seed = seed;
            cfg.aug_rot = false;
            cfg.aug_flip = false;
            v2_noaug.push(train(&cfg, &Pool(pool())).unwrap().checkpoints.pop().unwrap());

            let mut cfg = base.clone();
            cfg.seed = seed;
            cfg.apply_v1_compat();
            v1_short.push(train(&cfg, &Pool(pool())).unwrap().checkpoints.pop().unwrap());

            // The long run keeps the default learning rates: at the raised
            // rates the 8x run overshoots into outright divergence, while the
            // default rates stay in the regime criterion 8 is about
            // (repeatability still climbing while pose quality does not).
            let mut cfg = TrainConfig {
                pairs_total: 16_000,
                checkpoint_count: 8,
                seed,
                ..Default::default()
            };
            cfg.apply_v1_compat();
            v1_long.push(train(&cfg, &Pool(pool())).unwrap().checkpoints);
        }
        HeavyRuns {
            test_pairs,
            v2_aug,
            v2_noaug,
            v1_short,
            v1_long,
        }
    })
}

fn eval_sample_cfg() -> SampleConfig {
    SampleConfig {
        budget: 500,
        ..Default::default()
    }
}

/// Eval config for the directional experiments. Keypoints land on the pixel
/// grid and mutual-NN matches carry ~0.5 px of quantization error at 128^2,
/// so the RANSAC inlier threshold sits above that floor (the 0.2 px default
/// targets sub-pixel refined detections at higher resolutions).
fn eval_cfg() -> EvalConfig {
    let mut cfg = EvalConfig::default();
    cfg.ransac.threshold_px = 1.0;
    cfg
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

/// Mean nearest-neighbor distance among the top-500 keypoints (plain top-k,
/// alpha = 0, so the raw clustering of the score map is what is measured),
/// averaged over the first 10 test views.
fn dispersion(ckpt: &Checkpoint, pairs: &[TwoViewPair]) -> f64 {
    let cfg = SampleConfig {
        alpha: 0.0,
        ..eval_sample_cfg()
    };
    let mut acc = 0.0;
    let mut n = 0usize;
    for pair in pairs.iter().take(10) {
        let prob = to_prob(&ckpt.net.forward(&pair.view_a.image).unwrap());
        let pts = sample_keypoints(&prob, &cfg).unwrap().pixel_coords();
        if pts.len() < 2 {
            continue;
        }
        let mut sum = 0.0;
        for (i, a) in pts.iter().enumerate() {
            let mut best = f64::INFINITY;
            for (j, b) in pts.iter().enumerate() {
                if i != j {
                    best = best.min(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt());
                }
            }
            sum += best;
        }
        acc += sum / pts.len() as f64;
        n += 1;
    }
    acc / n as f64
}

#[test]
fn c07_clustering_reduction() {
    let h = heavy();
    let scfg = eval_sample_cfg();
    let ecfg = eval_cfg();
    let mut disp_v2 = Vec::new();
    let mut disp_v1 = Vec::new();
    let mut auc_v2 = Vec::new();
    let mut auc_v1 = Vec::new();
    for i in 0..HEAVY_SEEDS.len() {
        disp_v2.push(dispersion(&h.v2_aug[i], &h.test_pairs));
        disp_v1.push(dispersion(&h.v1_short[i], &h.test_pairs));
        let r2 = evaluate_checkpoint(&h.v2_aug[i], &h.test_pairs, &scfg, &ecfg).unwrap();
        let r1 = evaluate_checkpoint(&h.v1_short[i], &h.test_pairs, &scfg, &ecfg).unwrap();
        auc_v2.push(r2.auc_at(10.0).unwrap());
        auc_v1.push(r1.auc_at(10.0).unwrap());
    }
    let (d2, d1) = (median(disp_v2), median(disp_v1));
    let (a2, a1) = (median(auc_v2), median(auc_v1));
    report(
        7,
        "clustering reduction",
        d2 > d1 && a2 >= a1,
        &format!("dispersion v2 {d2:.3} vs v1 {d1:.3}; AUC@10 v2 {a2:.3} vs v1 {a1:.3}"),
    );
}

#[test]
fn c08_repeatability_auc_tension() {
    let h = heavy();
    let scfg = eval_sample_cfg();
    let ecfg = eval_cfg();
    let mut rep_first = Vec::new();
    let mut rep_final = Vec::new();
    let mut auc_final = Vec::new();
    let mut auc_max_earlier = Vec::new();
    for ckpts in &h.v1_long {
        let reports: Vec<_> = ckpts
            .iter()
            .map(|c| evaluate_checkpoint(c, &h.test_pairs, &scfg, &ecfg).unwrap())
            .collect();
        rep_first.push(reports[0].repeatability.unwrap_or(0.0));
        rep_final.push(reports.last().unwrap().repeatability.unwrap_or(0.0));
        auc_final.push(reports.last().unwrap().auc_at(10.0).unwrap());
        auc_max_earlier.push(
            reports[..reports.len() - 1]
                .iter()
                .map(|r| r.auc_at(10.0).unwrap())
                .fold(f64::NEG_INFINITY, f64::max),
        );
    }
    let (rf, r0) = (median(rep_final), median(rep_first));
    let (af, ae) = (median(auc_final), median(auc_max_earlier));
    report(
        8,
        "repeatability-vs-AUC tension",
        rf >= r0 && af <= ae,
        &format!("repeatability final {rf:.4} vs 1/8 {r0:.4}; AUC@10 final {af:.3} vs max earlier {ae:.3}"),
    );
}

#[test]
fn c09_rotation_robustness() {
    let h = heavy();
    let rot = AugTransform {
        quarter_turns: 1,
        hflip: false,
    };
    let rot_pairs: Vec<TwoViewPair> = h
        .test_pairs
        .iter()
        .take(25)
        .map(|p| {
            let mut p = p.clone();
            p.view_b = apply_to_view(&p.view_b, &rot).unwrap();
            p
        })
        .collect();
    let cfg = eval_sample_cfg();
    let mean_rep = |ckpt: &Checkpoint| -> f64 {
        let mut acc = 0.0;
        let mut n = 0usize;
        for pair in &rot_pairs {
            let pa = to_prob(&ckpt.net.forward(&pair.view_a.image).unwrap());
            let pb = to_prob(&ckpt.net.forward(&pair.view_b.image).unwrap());
            let ka = sample_keypoints(&pa, &cfg).unwrap();
            let kb = sample_keypoints(&pb, &cfg).unwrap();
            let warp = Warp::new(&pair.view_a, &pair.view_b);
            if let Some(r) = repeatability(&ka, &kb, &warp, 2.0) {
                acc += r;
                n += 1;
            }
        }
        acc / n.max(1) as f64
    };
    let aug = median(h.v2_aug.iter().map(mean_rep).collect());
    let noaug = median(h.v2_noaug.iter().map(mean_rep).collect());
    report(
        9,
        "rotation robustness",
        aug > noaug,
        &format!("90° repeatability: aug {aug:.4} vs no-aug {noaug:.4}"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 10: alpha-diversity on a clustered-vs-isolated map family.

#[test]
fn c10_alpha_diversity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let size = 64;
    let mut values = Grid::zeros(size, size);
    // 5x5 cluster of the strongest peaks
    let cluster = (8..13usize, 8..13usize);
    for y in cluster.1.clone() {
        for x in cluster.0.clone() {
            *values.get_mut(x, y) = 1.0 + rng.gen_range(0.0..1e-3);
        }
    }
    // 20 isolated, slightly weaker peaks far from each other and the cluster
    let mut isolated = Vec::new();
    'place: while isolated.len() < 20 {
        let (x, y) = (rng.gen_range(0..size), rng.gen_range(0..size));
        if (2..19).contains(&x) && (2..19).contains(&y) {
            continue;
        }
        for &(ix, iy) in &isolated {
            let d2 = (x as i64 - ix as i64).pow(2) + (y as i64 - iy as i64).pow(2);
            if d2 < 100 {
                continue 'place;
            }
        }
        *values.get_mut(x, y) = 0.95 + rng.gen_range(0.0..1e-3);
        isolated.push((x, y));
    }
    let prob = ProbMap::unnormalized(values).normalize().unwrap();

    let in_cluster = |x: f64, y: f64| (7.5..12.5).contains(&x) && (7.5..12.5).contains(&y);
    let mut counts = Vec::new();
    for &alpha in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        let cfg = SampleConfig {
            budget: 20,
            alpha,
            subpixel: false,
            ..Default::default()
        };
        let kps = sample_keypoints(&prob, &cfg).unwrap();
        counts.push(
            kps.pixel_coords()
                .iter()
                .filter(|&&(x, y)| in_cluster(x, y))
                .count(),
        );
    }
    let monotone = counts.windows(2).all(|w| w[1] <= w[0]);
    let spans = counts[0] > counts[counts.len() - 1];

    // alpha = 0 equals plain top-k exactly
    let cfg = SampleConfig {
        budget: 20,
        alpha: 0.0,
        subpixel: false,
        ..Default::default()
    };
    let got: Vec<(usize, usize)> = sample_keypoints(&prob, &cfg)
        .unwrap()
        .pixel_coords()
        .iter()
        .map(|&(x, y)| (x.round() as usize, y.round() as usize))
        .collect();
    let mut order: Vec<usize> = (0..size * size)
        .filter(|&i| prob.values.data()[i] > 0.0)
        .collect();
    order.sort_by(|&a, &b| {
        prob.values.data()[b]
            .partial_cmp(&prob.values.data()[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    order.truncate(20);
    let want: Vec<(usize, usize)> = order.iter().map(|&i| (i % size, i / size)).collect();
    let topk_ok = got == want;

    report(
        10,
        "alpha-diversity",
        monotone && spans && topk_ok,
        &format!("cluster counts over alpha {counts:?}, alpha=0 == top-k: {topk_ok}"),
    );
}
