//! Dense row-major 2D grids used for images, depth maps and probability maps.
//!
//! Coordinate convention (used everywhere in this crate): integer coordinates
//! address pixel centers, so the continuous domain of a W-wide image is
//! `[-0.5, W - 0.5]`. Normalized coordinates map that domain linearly onto
//! `[-1, 1]`: `x_n = 2 (x + 0.5) / W - 1`.

use serde::{Deserialize, Serialize};

/// Row-major `H x W` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height, "grid data length mismatch");
        Self {
            width,
            height,
            data,
        }
    }
}

impl<T> Grid<T> {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn same_shape<U>(&self, other: &Grid<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut T {
        &mut self.data[y * self.width + x]
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn map<U, F: FnMut(&T) -> U>(&self, f: F) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Iterates `(x, y, &value)` in row-major order.
    pub fn iter_pixels(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| (i % w, i / w, v))
    }
}

impl Grid<f64> {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Bilinear sample at continuous pixel coordinates (pixel-center
    /// convention). Out-of-bounds taps are clamped to the edge.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let (x0, y0, fx, fy) = bilinear_base(x, y);
        let xi0 = clamp_coord(x0, self.width);
        let xi1 = clamp_coord(x0 + 1, self.width);
        let yi0 = clamp_coord(y0, self.height);
        let yi1 = clamp_coord(y0 + 1, self.height);
        let v00 = *self.get(xi0, yi0);
        let v10 = *self.get(xi1, yi0);
        let v01 = *self.get(xi0, yi1);
        let v11 = *self.get(xi1, yi1);
        v00 * (1.0 - fx) * (1.0 - fy)
            + v10 * fx * (1.0 - fy)
            + v01 * (1.0 - fx) * fy
            + v11 * fx * fy
    }
}

impl Grid<f32> {
    pub fn zeros_f32(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn to_f64(&self) -> Grid<f64> {
        self.map(|v| *v as f64)
    }
}

/// Integer base and fractional parts for bilinear interpolation.
#[inline]
pub fn bilinear_base(x: f64, y: f64) -> (i64, i64, f64, f64) {
    let x0 = x.floor();
    let y0 = y.floor();
    (x0 as i64, y0 as i64, x - x0, y - y0)
}

#[inline]
fn clamp_coord(c: i64, size: usize) -> usize {
    c.clamp(0, size as i64 - 1) as usize
}

/// Pixel to normalized coordinate: `[-0.5, size - 0.5] -> [-1, 1]`.
#[inline]
pub fn pixel_to_normalized(x: f64, size: usize) -> f64 {
    2.0 * (x + 0.5) / size as f64 - 1.0
}

/// Normalized coordinate back to continuous pixel coordinate.
#[inline]
pub fn normalized_to_pixel(xn: f64, size: usize) -> f64 {
    (xn + 1.0) * size as f64 / 2.0 - 0.5
}
