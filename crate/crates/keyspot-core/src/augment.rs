//! Joint quarter-turn / horizontal-flip augmentation of views.
//!
//! A transform acts on the pixel grid and simultaneously updates the camera
//! so that projecting a 3D point through the transformed view lands exactly
//! where the grid transform moves the original projection. Rotations
//! premultiply the camera rotation by an in-plane rotation; flips negate
//! `fx` (keeping the world-to-camera rotation proper).
//!
//! The 8 elements `{rot^k . flip^b}` form the dihedral subgroup generated by
//! a quarter turn and the horizontal flip.

use nalgebra::Matrix3;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::CameraView;
use crate::grid::Grid;

/// One element of the augmentation group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugTransform {
    /// Number of quarter turns (0..4), applied after the flip.
    pub quarter_turns: u8,
    pub hflip: bool,
}

impl AugTransform {
    pub const IDENTITY: AugTransform = AugTransform {
        quarter_turns: 0,
        hflip: false,
    };

    /// All 8 group elements.
    pub fn all() -> Vec<AugTransform> {
        let mut v = Vec::with_capacity(8);
        for &hflip in &[false, true] {
            for quarter_turns in 0..4 {
                v.push(AugTransform {
                    quarter_turns,
                    hflip,
                });
            }
        }
        v
    }

    pub fn is_identity(&self) -> bool {
        self.quarter_turns == 0 && !self.hflip
    }

    /// Group composition: `self.compose(other)` applies `other` first.
    /// Uses `flip . rot_k = rot_{-k} . flip`.
    pub fn compose(&self, other: &AugTransform) -> AugTransform {
        let s: i8 = if self.hflip { -1 } else { 1 };
        let k = (self.quarter_turns as i8 + s * other.quarter_turns as i8).rem_euclid(4);
        AugTransform {
            quarter_turns: k as u8,
            hflip: self.hflip ^ other.hflip,
        }
    }

    /// Pixel map of this transform on a `size` x `size` grid.
    pub fn apply_to_pixel(&self, x: f64, y: f64, size: usize) -> (f64, f64) {
        let n = size as f64 - 1.0;
        let (mut x, mut y) = (x, y);
        if self.hflip {
            x = n - x;
        }
        for _ in 0..self.quarter_turns {
            let (nx, ny) = (y, n - x);
            x = nx;
            y = ny;
        }
        (x, y)
    }
}

fn transform_grid<T: Clone + Default>(grid: &Grid<T>, t: &AugTransform) -> Grid<T> {
    let size = grid.width();
    let mut out = Grid::filled(size, size, T::default());
    for y in 0..size {
        for x in 0..size {
            let (nx, ny) = t.apply_to_pixel(x as f64, y as f64, size);
            *out.get_mut(nx as usize, ny as usize) = grid.get(x, y).clone();
        }
    }
    out
}

/// Applies a transform to image, depth, validity mask and camera.
pub fn apply_to_view(view: &CameraView, t: &AugTransform) -> Result<CameraView> {
    if view.width() != view.height() && t.quarter_turns % 2 == 1 {
        return Err(Error::Contract(format!(
            "quarter-turn augmentation needs a square image, got {}x{}",
            view.width(),
            view.height()
        )));
    }
    if t.is_identity() {
        return Ok(view.clone());
    }
    let n = view.width() as f64 - 1.0;
    let mut k = view.intrinsics;
    let mut rotation = view.rotation;
    let mut translation = view.translation;
    if t.hflip {
        // (x, y) -> (n - x, y): negate fx, mirror cx.
        k.fx = -k.fx;
        k.cx = n - k.cx;
    }
    // One quarter turn maps (x, y) -> (y, n - x); the camera-frame point
    // rotates by M: (X, Y, Z) -> (Y, -X, Z).
    let m = Matrix3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    for _ in 0..t.quarter_turns {
        rotation = m * rotation;
        translation = m * translation;
        k = crate::geometry::Intrinsics {
            fx: k.fy,
            fy: k.fx,
            cx: k.cy,
            cy: n - k.cx,
        };
    }
    Ok(CameraView {
        intrinsics: k,
        rotation,
        translation,
        image: transform_grid(&view.image, t),
        depth: transform_grid(&view.depth, t),
        depth_valid: transform_grid(&view.depth_valid, t),
    })
}

/// Uniform draw over the enabled subgroup; identity when both are disabled.
pub fn sample_transform(rng: &mut impl Rng, enable_rot: bool, enable_flip: bool) -> AugTransform {
    AugTransform {
        quarter_turns: if enable_rot { rng.gen_range(0..4) } else { 0 },
        hflip: enable_flip && rng.gen_bool(0.5),
    }
}
