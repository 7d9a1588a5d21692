//! Synthetic two-view scene generation: textured planar patches and boxes,
//! exact ray-cast depth, rendered intensity images, and 3D tracks that act as
//! the detection prior.
//!
//! Everything is a pure function of `(config, seed)`, so datasets are
//! reproducible bit-for-bit and every downstream metric can be verified
//! against exact ground truth.

use nalgebra::{Matrix3, Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, CameraView, Intrinsics};
use crate::grid::Grid;

/// Procedural value-noise texture over a unit square patch.
#[derive(Debug, Clone)]
pub struct Texture {
    res: usize,
    values: Vec<f64>,
}

impl Texture {
    fn random(res: usize, rng: &mut impl Rng) -> Self {
        let values = (0..res * res).map(|_| rng.gen::<f64>()).collect();
        Self { res, values }
    }

    /// Bilinear lookup at `(u, v)` in `[0, 1]^2`.
    pub fn sample(&self, u: f64, v: f64) -> f64 {
        let n = self.res as f64;
        let x = (u.clamp(0.0, 1.0) * (n - 1.0)).clamp(0.0, n - 1.0);
        let y = (v.clamp(0.0, 1.0) * (n - 1.0)).clamp(0.0, n - 1.0);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.res - 1);
        let y1 = (y0 + 1).min(self.res - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let at = |xi: usize, yi: usize| self.values[yi * self.res + xi];
        at(x0, y0) * (1.0 - fx) * (1.0 - fy)
            + at(x1, y0) * fx * (1.0 - fy)
            + at(x0, y1) * (1.0 - fx) * fy
            + at(x1, y1) * fx * fy
    }

    /// Finite-difference gradient magnitude in texture space.
    pub fn gradient_mag(&self, u: f64, v: f64) -> f64 {
        let e = 0.5 / self.res as f64;
        let du = (self.sample(u + e, v) - self.sample(u - e, v)) / (2.0 * e);
        let dv = (self.sample(u, v + e) - self.sample(u, v - e)) / (2.0 * e);
        (du * du + dv * dv).sqrt()
    }
}

/// A finite textured rectangle: `origin + u * eu + v * ev`, `u, v` in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct PlanePatch {
    pub origin: Point3<f64>,
    pub eu: Vector3<f64>,
    pub ev: Vector3<f64>,
    pub texture: Texture,
}

impl PlanePatch {
    pub fn normal(&self) -> Vector3<f64> {
        self.eu.cross(&self.ev).normalize()
    }

    pub fn point_at(&self, u: f64, v: f64) -> Point3<f64> {
        self.origin + self.eu * u + self.ev * v
    }

    pub fn area(&self) -> f64 {
        self.eu.cross(&self.ev).norm()
    }

    /// Ray-patch intersection: returns `(t, u, v)` for `ro + t * rd` with
    /// `t > eps` and `(u, v)` inside the patch.
    pub fn intersect(&self, ro: &Point3<f64>, rd: &Vector3<f64>) -> Option<(f64, f64, f64)> {
        let n = self.eu.cross(&self.ev);
        let denom = rd.dot(&n);
        if denom.abs() < 1e-12 {
            return None;
        }
        let t = (self.origin - ro).dot(&n) / denom;
        if t <= 1e-9 {
            return None;
        }
        let hit = ro + rd * t;
        let rel = hit - self.origin;
        // Solve rel = u*eu + v*ev in the patch plane.
        let a = self.eu.dot(&self.eu);
        let b = self.eu.dot(&self.ev);
        let c = self.ev.dot(&self.ev);
        let det = a * c - b * b;
        if det.abs() < 1e-15 {
            return None;
        }
        let ru = rel.dot(&self.eu);
        let rv = rel.dot(&self.ev);
        let u = (c * ru - b * rv) / det;
        let v = (a * rv - b * ru) / det;
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return None;
        }
        Some((t, u, v))
    }

    /// Distance from a point to the (infinite) plane of this patch.
    pub fn plane_residual(&self, p: &Point3<f64>) -> f64 {
        (p - self.origin).dot(&self.normal()).abs()
    }
}

/// Scene generation knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    /// Free-standing planar patches (the first one is a frame-filling
    /// backdrop).
    pub planes: usize,
    /// Oriented boxes placed in front of the backdrop (each contributes six
    /// faces and creates occlusions).
    pub boxes: usize,
    /// Number of 3D track points.
    pub tracks: usize,
    /// Fraction of tracks placed at high-texture-gradient locations; the
    /// rest are uniform over the surfaces.
    pub gradient_fraction: f64,
    /// Value-noise resolution per patch.
    pub texture_res: usize,
    /// Square image side in pixels.
    pub image_size: usize,
    /// Focal length in pixels (fx = fy).
    pub focal: f64,
    /// Fraction of depth pixels invalidated in random blobs, emulating
    /// incomplete MVS coverage.
    pub hole_fraction: f64,
    /// Additive Gaussian pixel noise on rendered intensities.
    pub noise_sigma: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            planes: 3,
            boxes: 2,
            tracks: 600,
            gradient_fraction: 0.8,
            texture_res: 24,
            image_size: 128,
            focal: 128.0,
            hole_fraction: 0.15,
            noise_sigma: 0.01,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.planes + self.boxes == 0 {
            return Err(Error::Config("scene needs at least one surface".into()));
        }
        if self.tracks == 0 {
            return Err(Error::Config("scene needs at least one track".into()));
        }
        if self.image_size == 0 {
            return Err(Error::Config("image size must be positive".into()));
        }
        if self.focal <= 0.0 {
            return Err(Error::Config("focal length must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.gradient_fraction) {
            return Err(Error::Config("gradient_fraction must be in [0, 1]".into()));
        }
        if !(0.0..=0.9).contains(&self.hole_fraction) {
            return Err(Error::Config("hole_fraction must be in [0, 0.9]".into()));
        }
        Ok(())
    }
}

/// A generated scene: surfaces plus the 3D track points lying on them.
#[derive(Debug, Clone)]
pub struct Scene {
    pub patches: Vec<PlanePatch>,
    pub points3d: Vec<Point3<f64>>,
    pub seed: u64,
    pub config: SceneConfig,
}

impl Scene {
    /// Smallest plane residual over all patches for a point.
    pub fn surface_residual(&self, p: &Point3<f64>) -> f64 {
        self.patches
            .iter()
            .map(|patch| patch.plane_residual(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Nearest surface hit along a ray: `(t, patch index, u, v)`.
    pub fn raycast(
        &self,
        ro: &Point3<f64>,
        rd: &Vector3<f64>,
    ) -> Option<(f64, usize, f64, f64)> {
        let mut best: Option<(f64, usize, f64, f64)> = None;
        for (i, patch) in self.patches.iter().enumerate() {
            if let Some((t, u, v)) = patch.intersect(ro, rd) {
                if best.map_or(true, |(bt, _, _, _)| t < bt) {
                    best = Some((t, i, u, v));
                }
            }
        }
        best
    }
}

/// 3D points with per-view visibility flags.
#[derive(Debug, Clone, Default)]
pub struct TrackSet {
    pub points: Vec<Point3<f64>>,
    pub visibility_a: Vec<bool>,
    pub visibility_b: Vec<bool>,
}

impl TrackSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Two overlapping views of one scene, with co-visible tracks and the dense
/// overlap fraction.
#[derive(Debug, Clone)]
pub struct TwoViewPair {
    pub view_a: CameraView,
    pub view_b: CameraView,
    /// Restricted to tracks visible (in bounds, positive depth, unoccluded)
    /// in both views.
    pub tracks: TrackSet,
    /// Fraction of valid pixels of A whose reprojection lands inside B.
    pub overlap: f64,
}

/// Pair-sampling knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairConfig {
    pub min_overlap: f64,
    pub max_overlap: f64,
    pub max_attempts: usize,
    /// Camera position jitter radius around the base viewpoint.
    pub baseline_scale: f64,
    /// Maximum in-plane roll in degrees.
    pub max_roll_deg: f64,
    /// Maximum look-at target jitter.
    pub target_jitter: f64,
}

impl PairConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_overlap)
            || !(self.min_overlap..=1.0).contains(&self.max_overlap)
        {
            return Err(Error::Config(
                "overlap band must satisfy 0 <= min <= max <= 1".into(),
            ));
        }
        if self.max_attempts == 0 {
            return Err(Error::Config("max_attempts must be >= 1".into()));
        }
        if self.baseline_scale < 0.0 || self.target_jitter < 0.0 || self.max_roll_deg < 0.0 {
            return Err(Error::Config(
                "pair sampling scales must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            min_overlap: 0.3,
            max_overlap: 1.0,
            max_attempts: 100,
            baseline_scale: 1.0,
            max_roll_deg: 15.0,
            target_jitter: 0.8,
        }
    }
}

/// Deterministic scene construction.
pub fn generate_scene(config: &SceneConfig, seed: u64) -> Result<Scene> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ce9e_5eed);
    let mut patches = Vec::new();

    // Frame-filling backdrop so every pixel has depth before holes.
    patches.push(PlanePatch {
        origin: Point3::new(-6.0, -6.0, 6.0),
        eu: Vector3::new(12.0, 0.0, 0.0),
        ev: Vector3::new(0.0, 12.0, 0.0),
        texture: Texture::random(config.texture_res, &mut rng),
    });

    for _ in 1..config.planes {
        let center = Point3::new(
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(3.5..5.5),
        );
        let extent = rng.gen_range(1.2..2.5);
        let (eu, ev) = random_tilted_frame(&mut rng, extent);
        patches.push(PlanePatch {
            origin: center - eu * 0.5 - ev * 0.5,
            eu,
            ev,
            texture: Texture::random(config.texture_res, &mut rng),
        });
    }

    for _ in 0..config.boxes {
        let center = Point3::new(
            rng.gen_range(-1.2..1.2),
            rng.gen_range(-1.2..1.2),
            rng.gen_range(2.8..4.2),
        );
        let half = Vector3::new(
            rng.gen_range(0.25..0.6),
            rng.gen_range(0.25..0.6),
            rng.gen_range(0.25..0.6),
        );
        let rot = random_rotation(&mut rng);
        patches.extend(box_faces(&center, &half, &rot, config.texture_res, &mut rng));
    }

    // Track placement: area-weighted patch choice, gradient-biased in-patch.
    let areas: Vec<f64> = patches.iter().map(|p| p.area()).collect();
    let total_area: f64 = areas.iter().sum();
    let mut points3d = Vec::with_capacity(config.tracks);
    for _ in 0..config.tracks {
        let mut pick = rng.gen_range(0.0..total_area);
        let mut pi = 0;
        for (i, a) in areas.iter().enumerate() {
            if pick < *a {
                pi = i;
                break;
            }
            pick -= a;
        }
        let patch = &patches[pi];
        let (u, v) = if rng.gen::<f64>() < config.gradient_fraction {
            // Best-of-8 texture-gradient candidate, mimicking corner-seeded
            // SfM tracks.
            let mut best = (rng.gen::<f64>(), rng.gen::<f64>());
            let mut best_g = patch.texture.gradient_mag(best.0, best.1);
            for _ in 0..7 {
                let cand = (rng.gen::<f64>(), rng.gen::<f64>());
                let g = patch.texture.gradient_mag(cand.0, cand.1);
                if g > best_g {
                    best = cand;
                    best_g = g;
                }
            }
            best
        } else {
            (rng.gen::<f64>(), rng.gen::<f64>())
        };
        points3d.push(patch.point_at(u, v));
    }

    Ok(Scene {
        patches,
        points3d,
        seed,
        config: config.clone(),
    })
}

fn random_tilted_frame(rng: &mut impl Rng, size: f64) -> (Vector3<f64>, Vector3<f64>) {
    // Start from an axis-aligned frame facing the cameras, tilt by up to
    // ~40 degrees.
    let rot = small_rotation(rng, 40f64.to_radians());
    (
        rot * Vector3::new(size, 0.0, 0.0),
        rot * Vector3::new(0.0, size, 0.0),
    )
}

fn small_rotation(rng: &mut impl Rng, max_angle: f64) -> Matrix3<f64> {
    let axis = random_unit(rng);
    let angle = rng.gen_range(0.0..max_angle);
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle)
        .into_inner()
}

fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    small_rotation(rng, std::f64::consts::PI)
}

fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn box_faces(
    center: &Point3<f64>,
    half: &Vector3<f64>,
    rot: &Matrix3<f64>,
    tex_res: usize,
    rng: &mut impl Rng,
) -> Vec<PlanePatch> {
    let ax = rot * Vector3::new(half.x, 0.0, 0.0);
    let ay = rot * Vector3::new(0.0, half.y, 0.0);
    let az = rot * Vector3::new(0.0, 0.0, half.z);
    let mut faces = Vec::with_capacity(6);
    let mut face = |anchor: Vector3<f64>, eu: Vector3<f64>, ev: Vector3<f64>| PlanePatch {
        origin: center + anchor - eu * 0.5 - ev * 0.5,
        eu,
        ev,
        texture: Texture::random(tex_res, rng),
    };
    faces.push(face(az, ax * 2.0, ay * 2.0));
    faces.push(face(-az, ax * 2.0, ay * 2.0));
    faces.push(face(ay, ax * 2.0, az * 2.0));
    faces.push(face(-ay, ax * 2.0, az * 2.0));
    faces.push(face(ax, ay * 2.0, az * 2.0));
    faces.push(face(-ax, ay * 2.0, az * 2.0));
    faces
}

/// Camera pose from position, look-at target and roll angle.
pub fn look_at_pose(
    position: &Point3<f64>,
    target: &Point3<f64>,
    roll: f64,
) -> (Matrix3<f64>, Vector3<f64>) {
    let forward = (target - position).normalize();
    let world_up = Vector3::new(0.0, -1.0, 0.0);
    let mut right = forward.cross(&world_up);
    if right.norm() < 1e-9 {
        right = forward.cross(&Vector3::new(1.0, 0.0, 0.0));
    }
    let right = right.normalize();
    let down = forward.cross(&right);
    // Rows of R are the camera axes expressed in world coordinates.
    let base = Matrix3::from_rows(&[
        right.transpose(),
        down.transpose(),
        forward.transpose(),
    ]);
    let roll_m = nalgebra::Rotation3::from_axis_angle(
        &Vector3::z_axis(),
        roll,
    )
    .into_inner();
    let r = roll_m * base;
    let t = -(r * position.coords);
    (r, t)
}

/// Ray-casts image and depth for a camera pose; no holes, no noise applied
/// here.
pub fn render_view(
    scene: &Scene,
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    rng: &mut impl Rng,
) -> CameraView {
    let size = scene.config.image_size;
    let k = Intrinsics {
        fx: scene.config.focal,
        fy: scene.config.focal,
        cx: (size as f64 - 1.0) / 2.0,
        cy: (size as f64 - 1.0) / 2.0,
    };
    let center = Point3::from(-(rotation.transpose() * translation));
    let light = Vector3::new(0.3, -0.5, -0.8).normalize();
    let mut image = Grid::zeros_f32(size, size);
    let mut depth = Grid::zeros(size, size);
    let mut valid = Grid::filled(size, size, false);
    for y in 0..size {
        for x in 0..size {
            let dir_c = Vector3::new(
                (x as f64 - k.cx) / k.fx,
                (y as f64 - k.cy) / k.fy,
                1.0,
            );
            let dir_w = rotation.transpose() * dir_c;
            if let Some((t, pi, u, v)) = scene.raycast(&center, &dir_w) {
                let patch = &scene.patches[pi];
                let tex = patch.texture.sample(u, v);
                let shade = 0.35 + 0.65 * patch.normal().dot(&light).abs();
                let noise: f64 = gaussian(rng) * scene.config.noise_sigma;
                *image.get_mut(x, y) = ((tex * shade + noise).clamp(0.0, 1.0)) as f32;
                // dir_c.z == 1, so the ray parameter is the camera depth.
                *depth.get_mut(x, y) = t;
                *valid.get_mut(x, y) = true;
            }
        }
    }
    CameraView {
        intrinsics: k,
        rotation,
        translation,
        image,
        depth,
        depth_valid: valid,
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Invalidates depth in random blobs to emulate incomplete MVS coverage.
pub fn punch_holes(view: &mut CameraView, fraction: f64, rng: &mut impl Rng) {
    if fraction <= 0.0 {
        return;
    }
    let w = view.width();
    let h = view.height();
    let total = (w * h) as f64;
    let mut invalidated = 0.0;
    while invalidated / total < fraction {
        let cx = rng.gen_range(0.0..w as f64);
        let cy = rng.gen_range(0.0..h as f64);
        let r = rng.gen_range(2.0..(w as f64 * 0.08).max(3.0));
        let x0 = ((cx - r).floor().max(0.0)) as usize;
        let x1 = ((cx + r).ceil().min(w as f64 - 1.0)) as usize;
        let y0 = ((cy - r).floor().max(0.0)) as usize;
        let y1 = ((cy + r).ceil().min(h as f64 - 1.0)) as usize;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                if dx * dx + dy * dy <= r * r && *view.depth_valid.get(x, y) {
                    *view.depth_valid.get_mut(x, y) = false;
                    invalidated += 1.0;
                }
            }
        }
    }
}

/// Dense overlap: fraction of valid-depth pixels of `a` whose reprojection
/// lands inside `b` with positive depth.
pub fn compute_overlap(a: &CameraView, b: &CameraView) -> f64 {
    let mut inside = 0usize;
    let mut total = 0usize;
    for y in 0..a.height() {
        for x in 0..a.width() {
            if !*a.depth_valid.get(x, y) {
                continue;
            }
            total += 1;
            let d = *a.depth.get(x, y);
            let world = geometry::unproject(x as f64, y as f64, d, a);
            let pc = b.to_camera(&world);
            if pc.z <= 0.0 {
                continue;
            }
            let k = &b.intrinsics;
            let bx = k.fx * pc.x / pc.z + k.cx;
            let by = k.fy * pc.y / pc.z + k.cy;
            if b.contains(bx, by) {
                inside += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        inside as f64 / total as f64
    }
}

/// Builds a pair from two explicit cameras: computes overlap, restricts the
/// track set to co-visible points, and punches depth holes.
pub fn make_pair(
    scene: &Scene,
    mut view_a: CameraView,
    mut view_b: CameraView,
    rng: &mut impl Rng,
) -> Result<TwoViewPair> {
    let overlap = compute_overlap(&view_a, &view_b);
    let tracks = covisible_tracks(scene, &view_a, &view_b)?;
    punch_holes(&mut view_a, scene.config.hole_fraction, rng);
    punch_holes(&mut view_b, scene.config.hole_fraction, rng);
    Ok(TwoViewPair {
        view_a,
        view_b,
        tracks,
        overlap,
    })
}

fn covisible_tracks(scene: &Scene, a: &CameraView, b: &CameraView) -> Result<TrackSet> {
    let proj_a = geometry::project(&scene.points3d, a);
    let proj_b = geometry::project(&scene.points3d, b);
    let mut points = Vec::new();
    for (i, p) in scene.points3d.iter().enumerate() {
        if visible(&proj_a[i], a) && visible(&proj_b[i], b) {
            points.push(*p);
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyPrior);
    }
    let n = points.len();
    Ok(TrackSet {
        points,
        visibility_a: vec![true; n],
        visibility_b: vec![true; n],
    })
}

/// A track is visible when it projects strictly inside the pixel-center
/// lattice with positive depth and is not occluded (rendered depth agrees
/// within 1%).
fn visible(p: &crate::geometry::Projection, view: &CameraView) -> bool {
    if !p.valid || p.depth <= 0.0 {
        return false;
    }
    let w = view.width() as f64;
    let h = view.height() as f64;
    if p.x < 0.0 || p.y < 0.0 || p.x > w - 1.0 || p.y > h - 1.0 {
        return false;
    }
    match view.depth_at(p.x, p.y) {
        Some(d) => (d - p.depth).abs() <= 0.01 * 0.5 * (d + p.depth),
        None => false,
    }
}

/// Samples a pair of overlapping views. Fails with
/// [`Error::SamplingExhausted`] when no pair inside the overlap band is found
/// within `max_attempts`.
pub fn sample_pair(scene: &Scene, config: &PairConfig, seed: u64) -> Result<TwoViewPair> {
    if !(0.0..=1.0).contains(&config.min_overlap)
        || config.min_overlap > config.max_overlap
        || config.max_overlap > 1.0
    {
        return Err(Error::Config(format!(
            "invalid overlap band [{}, {}]",
            config.min_overlap, config.max_overlap
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9a1c_f0e5);
    for _ in 0..config.max_attempts {
        let (ra, ta) = sample_camera(config, &mut rng);
        let (rb, tb) = sample_camera(config, &mut rng);
        let mut render_rng = ChaCha8Rng::seed_from_u64(rng.gen());
        let view_a = render_view(scene, ra, ta, &mut render_rng);
        let view_b = render_view(scene, rb, tb, &mut render_rng);
        let overlap = compute_overlap(&view_a, &view_b);
        if overlap < config.min_overlap || overlap > config.max_overlap {
            continue;
        }
        match make_pair_with_overlap(scene, view_a, view_b, overlap, &mut render_rng) {
            Ok(pair) => return Ok(pair),
            Err(Error::EmptyPrior) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SamplingExhausted {
        attempts: config.max_attempts,
    })
}

fn make_pair_with_overlap(
    scene: &Scene,
    mut view_a: CameraView,
    mut view_b: CameraView,
    overlap: f64,
    rng: &mut impl Rng,
) -> Result<TwoViewPair> {
    let tracks = covisible_tracks(scene, &view_a, &view_b)?;
    punch_holes(&mut view_a, scene.config.hole_fraction, rng);
    punch_holes(&mut view_b, scene.config.hole_fraction, rng);
    Ok(TwoViewPair {
        view_a,
        view_b,
        tracks,
        overlap,
    })
}

fn sample_camera(config: &PairConfig, rng: &mut impl Rng) -> (Matrix3<f64>, Vector3<f64>) {
    let s = config.baseline_scale;
    let pos = Point3::new(
        rng.gen_range(-1.2 * s..1.2 * s),
        rng.gen_range(-1.2 * s..1.2 * s),
        rng.gen_range(-0.4 * s..0.4 * s),
    );
    let j = config.target_jitter;
    let target = Point3::new(
        rng.gen_range(-j..j.max(1e-9)),
        rng.gen_range(-j..j.max(1e-9)),
        4.0 + rng.gen_range(-0.5..0.5),
    );
    let roll = rng
        .gen_range(-config.max_roll_deg..config.max_roll_deg.max(1e-9))
        .to_radians();
    look_at_pose(&pos, &target, roll)
}
