//! Projective camera math: pinhole projection, unprojection, and depth-based
//! cross-view warping of points and dense probability maps.
//!
//! All views share a single world frame. The camera maps a world point `P` to
//! the camera frame as `p_c = R P + t` and then through the pinhole:
//! `u = fx X/Z + cx`, `v = fy Y/Z + cy` (pixel-center convention, see
//! [`crate::grid`]).

use nalgebra::{Matrix3, Point3, Vector3};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::targets::ProbMap;

/// Pinhole intrinsics in pixels. `fx` may be negative for horizontally
/// flipped views (augmentation), which keeps the rotation proper.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

/// One synthetic view: camera, rendered intensity image and exact depth.
#[derive(Debug, Clone)]
pub struct CameraView {
    pub intrinsics: Intrinsics,
    /// World-to-camera rotation, orthonormal with determinant +1.
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    /// Intensity in [0, 1].
    pub image: Grid<f32>,
    /// Positive depth wherever `depth_valid` is set.
    pub depth: Grid<f64>,
    pub depth_valid: Grid<bool>,
}

impl CameraView {
    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    /// Checks the documented type invariants.
    pub fn validate(&self) -> Result<()> {
        let r = self.rotation;
        let err = (r * r.transpose() - Matrix3::identity()).norm();
        if err > 1e-9 || (r.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!(
                "rotation not orthonormal with det +1 (orth err {err:.2e})"
            )));
        }
        if !self.image.same_shape(&self.depth) || !self.image.same_shape(&self.depth_valid) {
            return Err(Error::Contract(
                "image, depth and validity mask shapes differ".into(),
            ));
        }
        for (x, y, &d) in self.depth.iter_pixels() {
            if *self.depth_valid.get(x, y) && d <= 0.0 {
                return Err(Error::Contract(format!(
                    "non-positive depth {d} at valid pixel ({x}, {y})"
                )));
            }
        }
        Ok(())
    }

    /// World point into the camera frame.
    #[inline]
    pub fn to_camera(&self, p: &Point3<f64>) -> Vector3<f64> {
        self.rotation * p.coords + self.translation
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Point3<f64> {
        Point3::from(-(self.rotation.transpose() * self.translation))
    }

    /// Depth at continuous pixel coordinates, interpolated harmonically
    /// (bilinear in inverse depth, which is affine in pixel coordinates on
    /// planar surfaces, so the lookup is exact inside a patch). `None` when
    /// the location is outside the image or any contributing pixel is
    /// invalid.
    pub fn depth_at(&self, x: f64, y: f64) -> Option<f64> {
        if !self.contains(x, y) {
            return None;
        }
        let w = self.width() as i64;
        let h = self.height() as i64;
        let x0 = x.floor() as i64;
        let y0 = y.floor() as i64;
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let mut value = 0.0;
        for (dx, dy, wgt) in [
            (0, 0, (1.0 - fx) * (1.0 - fy)),
            (1, 0, fx * (1.0 - fy)),
            (0, 1, (1.0 - fx) * fy),
            (1, 1, fx * fy),
        ] {
            let xi = (x0 + dx).clamp(0, w - 1) as usize;
            let yi = (y0 + dy).clamp(0, h - 1) as usize;
            if wgt > 0.0 {
                if !*self.depth_valid.get(xi, yi) {
                    return None;
                }
                value += wgt / self.depth.get(xi, yi);
            }
        }
        Some(1.0 / value)
    }

    /// Whether a continuous pixel coordinate falls inside the image domain.
    #[inline]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= -0.5 && y >= -0.5 && x <= self.width() as f64 - 0.5 && y <= self.height() as f64 - 0.5
    }
}

/// Result of projecting a single 3D point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub x: f64,
    pub y: f64,
    /// Camera-frame depth (Z).
    pub depth: f64,
    /// False when the point lies behind the camera.
    pub valid: bool,
}

/// Pinhole projection of world points into a view. Points behind the camera
/// are flagged invalid rather than erroring.
pub fn project(points: &[Point3<f64>], view: &CameraView) -> Vec<Projection> {
    points
        .iter()
        .map(|p| {
            let pc = view.to_camera(p);
            if pc.z <= 0.0 {
                return Projection {
                    x: 0.0,
                    y: 0.0,
                    depth: pc.z,
                    valid: false,
                };
            }
            let k = &view.intrinsics;
            Projection {
                x: k.fx * pc.x / pc.z + k.cx,
                y: k.fy * pc.y / pc.z + k.cy,
                depth: pc.z,
                valid: true,
            }
        })
        .collect()
}

/// Inverse of [`project`] for a known depth: pixel + depth to a world point.
pub fn unproject(x: f64, y: f64, depth: f64, view: &CameraView) -> Point3<f64> {
    let k = &view.intrinsics;
    let pc = Vector3::new(
        (x - k.cx) / k.fx * depth,
        (y - k.cy) / k.fy * depth,
        depth,
    );
    Point3::from(view.rotation.transpose() * (pc - view.translation))
}

/// Depth-based warp from `source` pixels into the `target` view.
pub struct Warp<'a> {
    pub source: &'a CameraView,
    pub target: &'a CameraView,
    /// Relative depth tolerance for the two-sided occlusion check
    /// (fraction of the mean of the two depths).
    pub rel_depth_tol: f64,
}

impl<'a> Warp<'a> {
    pub fn new(source: &'a CameraView, target: &'a CameraView) -> Self {
        Self {
            source,
            target,
            rel_depth_tol: 0.01,
        }
    }

    /// The reverse warp (target becomes source).
    pub fn inverse(&self) -> Warp<'a> {
        Warp {
            source: self.target,
            target: self.source,
            rel_depth_tol: self.rel_depth_tol,
        }
    }
}

/// Outcome of warping a single source pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WarpResult {
    /// Landing coordinates in the target image and the transported depth.
    Valid { x: f64, y: f64, depth: f64 },
    /// A nearer surface hides this point in the target view.
    Occluded,
    /// Missing source depth, point behind the target camera, or landing
    /// outside the target image (or on a target depth hole).
    Invalid,
}

impl WarpResult {
    pub fn position(&self) -> Option<(f64, f64)> {
        match *self {
            WarpResult::Valid { x, y, .. } => Some((x, y)),
            _ => None,
        }
    }
}

/// Unprojects with source depth, transforms, projects into the target, then
/// runs the two-sided depth-consistency occlusion check at the landing pixel.
pub fn warp_point(x: f64, y: f64, warp: &Warp) -> WarpResult {
    let Some(d_src) = warp.source.depth_at(x, y) else {
        return WarpResult::Invalid;
    };
    let world = unproject(x, y, d_src, warp.source);
    let pc = warp.target.to_camera(&world);
    if pc.z <= 0.0 {
        return WarpResult::Invalid;
    }
    let k = &warp.target.intrinsics;
    let tx = k.fx * pc.x / pc.z + k.cx;
    let ty = k.fy * pc.y / pc.z + k.cy;
    if !warp.target.contains(tx, ty) {
        return WarpResult::Invalid;
    }
    let Some(d_tgt) = warp.target.depth_at(tx, ty) else {
        return WarpResult::Invalid;
    };
    let tol = warp.rel_depth_tol * 0.5 * (pc.z + d_tgt);
    if (pc.z - d_tgt).abs() > tol {
        return WarpResult::Occluded;
    }
    WarpResult::Valid {
        x: tx,
        y: ty,
        depth: pc.z,
    }
}

/// Pulls a map defined on the target view back onto the source grid.
///
/// For every source pixel the warped location is computed with
/// [`warp_point`]; valid pixels bilinearly sample `map`, invalid or occluded
/// pixels get value 0 and mask 0.
pub fn warp_map(map: &ProbMap, warp: &Warp) -> Result<(ProbMap, Grid<bool>)> {
    if map.values.width() != warp.target.width() || map.values.height() != warp.target.height() {
        return Err(Error::Contract(format!(
            "warp_map: map is {}x{} but target view is {}x{}",
            map.values.width(),
            map.values.height(),
            warp.target.width(),
            warp.target.height()
        )));
    }
    let w = warp.source.width();
    let h = warp.source.height();
    let mut out = Grid::zeros(w, h);
    let mut mask = Grid::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            if let WarpResult::Valid { x: tx, y: ty, .. } =
                warp_point(x as f64, y as f64, warp)
            {
                *out.get_mut(x, y) = map.values.sample_bilinear(tx, ty);
                *mask.get_mut(x, y) = true;
            }
        }
    }
    Ok((ProbMap::unnormalized(out), mask))
}
