//! Blur and compositing of the colour pass.

use image::{Rgb, RgbImage};

use super::raster::FrameBuffer;
use crate::texture::TextureImage;

#[derive(Debug, thiserror::Error)]
#[error("foreground is {fg:?} but background is {bg:?}")]
pub struct DimensionMismatch {
    pub fg: (u32, u32),
    pub bg: (u32, u32),
}

/// Premultiplied RGBA, colour channels scaled 0..255, alpha 0..1.
#[derive(Debug, Clone, PartialEq)]
pub struct PremulImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[f32; 4]>,
}

impl PremulImage {
    pub fn from_framebuffer(fb: &FrameBuffer) -> Self {
        let pixels = fb
            .color
            .iter()
            .zip(&fb.alpha)
            .map(|(c, &a)| {
                let a = a as f32;
                [c[0] as f32 * a, c[1] as f32 * a, c[2] as f32 * a, a]
            })
            .collect();
        Self { width: fb.width, height: fb.height, pixels }
    }

    pub fn filled(width: u32, height: u32, px: [f32; 4]) -> Self {
        Self { width, height, pixels: vec![px; (width * height) as usize] }
    }
}

/// Normalized discrete Gaussian of radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius).map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|w| (w / sum) as f32).collect()
}

/// Separable Gaussian over premultiplied colour and alpha, clamp-to-edge.
pub fn gaussian_blur(img: &PremulImage, sigma: f64) -> PremulImage {
    if sigma <= 0.0 {
        return img.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as i64;
    let (w, h) = (img.width as i64, img.height as i64);
    let pass = |src: &[[f32; 4]], horizontal: bool| -> Vec<[f32; 4]> {
        let mut out = vec![[0f32; 4]; src.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = [0f32; 4];
                for (k, &wk) in kernel.iter().enumerate() {
                    let o = k as i64 - r;
                    let (sx, sy) = if horizontal { ((x + o).clamp(0, w - 1), y) } else { (x, (y + o).clamp(0, h - 1)) };
                    let s = src[(sy * w + sx) as usize];
                    for c in 0..4 {
                        acc[c] += wk * s[c];
                    }
                }
                out[(y * w + x) as usize] = acc;
            }
        }
        out
    };
    let tmp = pass(&img.pixels, true);
    PremulImage { width: img.width, height: img.height, pixels: pass(&tmp, false) }
}

/// `out = fg + (1 - alpha) * bg`, rounded to 8 bits.
pub fn composite_over_background(fg: &PremulImage, bg: &TextureImage) -> Result<RgbImage, DimensionMismatch> {
    if (fg.width, fg.height) != bg.pixels.dimensions() {
        return Err(DimensionMismatch { fg: (fg.width, fg.height), bg: bg.pixels.dimensions() });
    }
    let mut out = RgbImage::new(fg.width, fg.height);
    for (i, (px, b)) in out.pixels_mut().zip(bg.pixels.pixels()).enumerate() {
        let f = fg.pixels[i];
        let keep = 1.0 - f[3].clamp(0.0, 1.0);
        *px = Rgb([0, 1, 2].map(|c| (f[c] + keep * b.0[c] as f32).round().clamp(0.0, 255.0) as u8));
    }
    Ok(out)
}
