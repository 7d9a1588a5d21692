//! Minimal PNG chart rendering: line charts for metric curves and keypoint
//! overlays on rendered views.

use image::{Rgb, RgbImage};

const WIDTH: u32 = 800;
const HEIGHT: u32 = 500;
const MARGIN: u32 = 60;

pub struct Series {
    pub label: String,
    pub color: Rgb<u8>,
    /// (x, y) samples; x is typically the training step.
    pub points: Vec<(f64, f64)>,
}

fn draw_line(img: &mut RgbImage, a: (i64, i64), b: (i64, i64), color: Rgb<u8>) {
    // Bresenham.
    let (mut x0, mut y0) = a;
    let (x1, y1) = b;
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        if x0 >= 0 && y0 >= 0 && (x0 as u32) < img.width() && (y0 as u32) < img.height() {
            img.put_pixel(x0 as u32, y0 as u32, color);
        }
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

fn draw_marker(img: &mut RgbImage, x: i64, y: i64, color: Rgb<u8>) {
    for dy in -2..=2i64 {
        for dx in -2..=2i64 {
            if dx.abs() + dy.abs() <= 2 {
                let (px, py) = (x + dx, y + dy);
                if px >= 0 && py >= 0 && (px as u32) < img.width() && (py as u32) < img.height() {
                    img.put_pixel(px as u32, py as u32, color);
                }
            }
        }
    }
}

/// Renders one or more series on shared axes; y is always scaled to [0, 1]
/// padded to the data range, x to the data range. Degenerate single-point
/// series render as markers.
pub fn line_chart(series: &[Series]) -> RgbImage {
    let mut img = RgbImage::from_pixel(WIDTH, HEIGHT, Rgb([255, 255, 255]));
    let axis = Rgb([30, 30, 30]);
    let x0 = MARGIN as i64;
    let y0 = (HEIGHT - MARGIN) as i64;
    let x1 = (WIDTH - MARGIN / 2) as i64;
    let y1 = (MARGIN / 2) as i64;
    draw_line(&mut img, (x0, y0), (x1, y0), axis);
    draw_line(&mut img, (x0, y0), (x0, y1), axis);

    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if all.is_empty() {
        return img;
    }
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &all {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    if xmax - xmin < 1e-12 {
        xmax = xmin + 1.0;
    }
    if ymax - ymin < 1e-12 {
        ymax = ymin + 1.0;
    }
    let to_px = |x: f64, y: f64| -> (i64, i64) {
        let fx = (x - xmin) / (xmax - xmin);
        let fy = (y - ymin) / (ymax - ymin);
        (
            x0 + (fx * (x1 - x0) as f64) as i64,
            y0 - (fy * (y0 - y1) as f64) as i64,
        )
    };
    for (si, s) in series.iter().enumerate() {
        let mut prev: Option<(i64, i64)> = None;
        for &(x, y) in &s.points {
            let p = to_px(x, y);
            draw_marker(&mut img, p.0, p.1, s.color);
            if let Some(q) = prev {
                draw_line(&mut img, q, p, s.color);
            }
            prev = Some(p);
        }
        // Legend swatch in the top margin.
        let ly = 8 + 10 * si as i64;
        draw_line(&mut img, (x0, ly), (x0 + 30, ly), s.color);
    }
    img
}

/// Grayscale view image with the top keypoints marked.
pub fn overlay(
    image: &keyspot_core::grid::Grid<f32>,
    keypoints: &keyspot_core::sampler::KeypointSet,
    top: usize,
    scale: u32,
) -> RgbImage {
    let w = image.width() as u32;
    let h = image.height() as u32;
    let mut img = RgbImage::new(w * scale, h * scale);
    for (x, y, &v) in image.iter_pixels() {
        let g = (v.clamp(0.0, 1.0) * 255.0) as u8;
        for dy in 0..scale {
            for dx in 0..scale {
                img.put_pixel(x as u32 * scale + dx, y as u32 * scale + dy, Rgb([g, g, g]));
            }
        }
    }
    for (px, py) in keypoints.pixel_coords().iter().take(top) {
        let cx = (px * scale as f64 + scale as f64 * 0.5) as i64;
        let cy = (py * scale as f64 + scale as f64 * 0.5) as i64;
        let r = scale as i64 + 1;
        draw_line(&mut img, (cx - r, cy), (cx + r, cy), Rgb([255, 40, 40]));
        draw_line(&mut img, (cx, cy - r), (cx, cy + r), Rgb([255, 40, 40]));
    }
    img
}
