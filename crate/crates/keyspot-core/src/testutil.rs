//! Shared helpers for unit tests: hand-built minimal views and pairs.

use nalgebra::{Matrix3, Point3, Vector3};

use crate::geometry::{self, CameraView, Intrinsics};
use crate::grid::Grid;
use crate::scenegen::{self, PairConfig, SceneConfig, TrackSet, TwoViewPair};

/// Identity-pose square view with constant valid depth 4 and a flat image.
pub fn plain_view(size: usize) -> CameraView {
    CameraView {
        intrinsics: Intrinsics {
            fx: size as f64,
            fy: size as f64,
            cx: (size as f64 - 1.0) / 2.0,
            cy: (size as f64 - 1.0) / 2.0,
        },
        rotation: Matrix3::identity(),
        translation: Vector3::zeros(),
        image: Grid::filled(size, size, 0.5f32),
        depth: Grid::filled(size, size, 4.0),
        depth_valid: Grid::filled(size, size, true),
    }
}

/// Pair of identical plain views with tracks at the given pixel locations
/// (lifted onto the z=4 plane).
pub fn identical_pair(size: usize, track_pixels: &[(f64, f64)]) -> TwoViewPair {
    let view = plain_view(size);
    let points: Vec<Point3<f64>> = track_pixels
        .iter()
        .map(|&(x, y)| geometry::unproject(x, y, 4.0, &view))
        .collect();
    let n = points.len();
    TwoViewPair {
        view_a: view.clone(),
        view_b: view,
        tracks: TrackSet {
            points,
            visibility_a: vec![true; n],
            visibility_b: vec![true; n],
        },
        overlap: 1.0,
    }
}

/// A small randomly generated pair (64 px) with default-ish scene content.
pub fn random_pair(seed: u64) -> TwoViewPair {
    let config = SceneConfig {
        image_size: 64,
        focal: 64.0,
        tracks: 200,
        ..Default::default()
    };
    let scene = scenegen::generate_scene(&config, seed).unwrap();
    scenegen::sample_pair(&scene, &PairConfig::default(), seed.wrapping_add(17)).unwrap()
}
