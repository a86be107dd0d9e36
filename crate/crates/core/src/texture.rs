//! Texture and background banks, augmentation, and texture-assignment policies.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use image::{imageops, Rgb, RgbImage};

use crate::config::{GenerationConfig, TextureMode};
use crate::rng::{Purpose, RandomSource};

#[derive(Debug, thiserror::Error)]
pub enum TextureError {
    #[error("cannot read bank directory {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bank {0} contains no decodable images")]
    EmptyBank(PathBuf),
    #[error("texture bank is empty")]
    NoTextures,
    #[error("duplicate texture id `{0}`")]
    DuplicateId(String),
    #[error("texture `{id}` is {width}x{height}; at least 8x8 required")]
    TooSmall { id: String, width: u32, height: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextureImage {
    /// File stem, unique within its bank.
    pub id: String,
    pub pixels: RgbImage,
}

impl TextureImage {
    pub fn new(id: impl Into<String>, pixels: RgbImage) -> Result<Self, TextureError> {
        let id = id.into();
        let (width, height) = pixels.dimensions();
        if width < 8 || height < 8 {
            return Err(TextureError::TooSmall { id, width, height });
        }
        Ok(Self { id, pixels })
    }

    pub fn width(&self) -> u32 {
        self.pixels.width()
    }

    pub fn height(&self) -> u32 {
        self.pixels.height()
    }
}

const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg"];

/// Loads every decodable image in `dir`, ordered by id. Undecodable files are
/// skipped with a warning; an error is returned only if nothing loads.
pub fn load_bank(dir: &Path) -> Result<Vec<TextureImage>, TextureError> {
    let io = |source| TextureError::Io { path: dir.to_owned(), source };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    paths.sort();

    let mut bank = Vec::new();
    let mut seen = HashSet::new();
    for path in paths {
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_owned();
        let decoded = match image::open(&path) {
            Ok(img) => img.to_rgb8(),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                continue;
            }
        };
        let tex = match TextureImage::new(id.clone(), decoded) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                continue;
            }
        };
        if !seen.insert(id.clone()) {
            return Err(TextureError::DuplicateId(id));
        }
        bank.push(tex);
    }
    if bank.is_empty() {
        return Err(TextureError::EmptyBank(dir.to_owned()));
    }
    bank.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(bank)
}

/// Augmentation ranges shared by leaf textures and background plates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentConfig {
    pub flip_probability: f64,
    pub rotation_range: [f64; 2],
    pub zoom_range: [f64; 2],
    pub exposure_range: [f64; 2],
}

impl AugmentConfig {
    pub fn from_config(cfg: &GenerationConfig) -> Self {
        Self {
            flip_probability: cfg.flip_probability,
            rotation_range: [0.0, TAU],
            zoom_range: cfg.zoom_range,
            exposure_range: cfg.exposure_range,
        }
    }

    /// Every randomization collapsed to the identity.
    pub fn identity() -> Self {
        Self { flip_probability: 0.0, rotation_range: [0.0, 0.0], zoom_range: [1.0, 1.0], exposure_range: [1.0, 1.0] }
    }
}

/// One concrete augmentation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentParams {
    pub flip_horizontal: bool,
    pub flip_vertical: bool,
    /// Counter-clockwise rotation about the image centre, radians.
    pub angle: f64,
    pub zoom: f64,
    /// Crop window shift in source pixels.
    pub offset: [f64; 2],
    pub exposure: Option<f64>,
}

impl AugmentParams {
    pub fn identity() -> Self {
        Self { flip_horizontal: false, flip_vertical: false, angle: 0.0, zoom: 1.0, offset: [0.0; 2], exposure: None }
    }

    /// Draw order: h-flip, v-flip, angle, zoom, crop x, crop y, exposure.
    pub fn sample(src: &mut RandomSource, cfg: &AugmentConfig, width: u32, height: u32, with_exposure: bool) -> Self {
        let flip_horizontal = src.bernoulli(cfg.flip_probability);
        let flip_vertical = src.bernoulli(cfg.flip_probability);
        let angle = src.uniform(cfg.rotation_range);
        let zoom = src.uniform(cfg.zoom_range);
        // the output window spans size / zoom source pixels and must stay inside
        // the source when zooming in
        let slack = |size: u32| (size as f64 / 2.0) * (1.0 - 1.0 / zoom).max(0.0);
        let (sx, sy) = (slack(width), slack(height));
        let offset = [src.uniform([-sx, sx]), src.uniform([-sy, sy])];
        let exposure = with_exposure.then(|| src.uniform(cfg.exposure_range));
        Self { flip_horizontal, flip_vertical, angle, zoom, offset, exposure }
    }

    fn is_geometric_identity(&self) -> bool {
        self.angle == 0.0 && self.zoom == 1.0 && self.offset == [0.0, 0.0]
    }
}

/// Random flips, rotation, zoom and crop (plus exposure if requested).
/// Output dimensions always equal input dimensions.
pub fn augment_image(src: &mut RandomSource, img: &TextureImage, cfg: &AugmentConfig, with_exposure: bool) -> TextureImage {
    let params = AugmentParams::sample(src, cfg, img.width(), img.height(), with_exposure);
    apply_augmentation(img, &params)
}

pub fn apply_augmentation(img: &TextureImage, p: &AugmentParams) -> TextureImage {
    let mut pixels = img.pixels.clone();
    if p.flip_horizontal {
        imageops::flip_horizontal_in_place(&mut pixels);
    }
    if p.flip_vertical {
        imageops::flip_vertical_in_place(&mut pixels);
    }
    if !p.is_geometric_identity() {
        pixels = rotate_zoom_crop(&pixels, p.angle, p.zoom, p.offset);
    }
    if let Some(factor) = p.exposure {
        adjust_exposure(&mut pixels, factor);
    }
    TextureImage { id: img.id.clone(), pixels }
}

/// Multiplies every channel by `factor`, rounding and clamping to `[0, 255]`.
pub fn adjust_exposure(pixels: &mut RgbImage, factor: f64) {
    for px in pixels.pixels_mut() {
        for c in px.0.iter_mut() {
            *c = (*c as f64 * factor).round().clamp(0.0, 255.0) as u8;
        }
    }
}

#[inline]
fn reflect(i: i64, n: i64) -> usize {
    // symmetric padding: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Bilinear sample at continuous pixel-centre coordinates with reflection padding.
pub fn sample_bilinear_reflect(img: &RgbImage, x: f64, y: f64) -> [f64; 3] {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as i64, y0 as i64);
    let fetch = |xi: i64, yi: i64| img.get_pixel(reflect(xi, w) as u32, reflect(yi, h) as u32).0;
    let (a, b, c, d) = (fetch(x0, y0), fetch(x0 + 1, y0), fetch(x0, y0 + 1), fetch(x0 + 1, y0 + 1));
    let mut out = [0.0; 3];
    for k in 0..3 {
        let top = a[k] as f64 * (1.0 - fx) + b[k] as f64 * fx;
        let bot = c[k] as f64 * (1.0 - fx) + d[k] as f64 * fx;
        out[k] = top * (1.0 - fy) + bot * fy;
    }
    out
}

fn rotate_zoom_crop(img: &RgbImage, angle: f64, zoom: f64, offset: [f64; 2]) -> RgbImage {
    let (w, h) = img.dimensions();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let (s, c) = angle.sin_cos();
    let mut out = RgbImage::new(w, h);
    for (x, y, px) in out.enumerate_pixels_mut() {
        let dx = (x as f64 - cx) / zoom;
        let dy = (y as f64 - cy) / zoom;
        // inverse rotation; image rows grow downward, so this is a CCW turn on screen
        let sx = cx + c * dx - s * dy + offset[0];
        let sy = cy + s * dx + c * dy + offset[1];
        let v = sample_bilinear_reflect(img, sx, sy);
        *px = Rgb(v.map(|c| c.round().clamp(0.0, 255.0) as u8));
    }
    out
}

/// Resizes so the plate covers `width x height`, then centre-crops.
pub fn fit_to_frame(img: &TextureImage, width: u32, height: u32) -> TextureImage {
    if img.pixels.dimensions() == (width, height) {
        return img.clone();
    }
    let scale = (width as f64 / img.width() as f64).max(height as f64 / img.height() as f64);
    let sw = ((img.width() as f64 * scale).ceil() as u32).max(width);
    let sh = ((img.height() as f64 * scale).ceil() as u32).max(height);
    let resized = imageops::resize(&img.pixels, sw, sh, imageops::FilterType::Triangle);
    let x0 = (sw - width) / 2;
    let y0 = (sh - height) / 2;
    let pixels = imageops::crop_imm(&resized, x0, y0, width, height).to_image();
    TextureImage { id: img.id.clone(), pixels }
}

/// Decides which bank entry each leaf uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TexturePolicy {
    pub mode: TextureMode,
    /// The single dataset-wide pick used by `PlantUniform`.
    pub dataset_choice: usize,
}

impl TexturePolicy {
    pub fn new(mode: TextureMode, bank_len: usize, global_seed: u64) -> Result<Self, TextureError> {
        if bank_len == 0 {
            return Err(TextureError::NoTextures);
        }
        let dataset_choice = RandomSource::dataset(global_seed, Purpose::DatasetTexture).index(bank_len);
        Ok(Self { mode, dataset_choice })
    }

    /// Bank indices for `leaf_count` leaves.
    pub fn assign(&self, src: &mut RandomSource, bank_len: usize, leaf_count: usize) -> Result<Vec<usize>, TextureError> {
        if bank_len == 0 {
            return Err(TextureError::NoTextures);
        }
        Ok(match self.mode {
            TextureMode::PlantUniform => vec![self.dataset_choice % bank_len; leaf_count],
            TextureMode::PerLeaf | TextureMode::Arbitrary => (0..leaf_count).map(|_| src.index(bank_len)).collect(),
        })
    }
}

/// Texture identifiers for one plant's leaves.
pub fn assign_textures(
    src: &mut RandomSource,
    policy: &TexturePolicy,
    bank: &[TextureImage],
    leaf_count: usize,
) -> Result<Vec<String>, TextureError> {
    Ok(policy.assign(src, bank.len(), leaf_count)?.into_iter().map(|i| bank[i].id.clone()).collect())
}

/// Smooth value noise in `[0, 1]` on a `cells x cells` lattice, tiled to `size`.
fn value_noise(src: &mut RandomSource, size: u32, cells: u32) -> Vec<f64> {
    let lattice: Vec<f64> = (0..(cells + 1) * (cells + 1)).map(|_| src.next_f64()).collect();
    let at = |i: u32, j: u32| lattice[(j * (cells + 1) + i) as usize];
    let mut out = Vec::with_capacity((size * size) as usize);
    for y in 0..size {
        for x in 0..size {
            let gx = x as f64 / size as f64 * cells as f64;
            let gy = y as f64 / size as f64 * cells as f64;
            let (i, j) = (gx.floor() as u32, gy.floor() as u32);
            let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
            let (tx, ty) = (smooth(gx - i as f64), smooth(gy - j as f64));
            let top = at(i, j) * (1.0 - tx) + at(i + 1, j) * tx;
            let bot = at(i, j + 1) * (1.0 - tx) + at(i + 1, j + 1) * tx;
            out.push(top * (1.0 - ty) + bot * ty);
        }
    }
    out
}

fn fractal_noise(src: &mut RandomSource, size: u32, octaves: &[(u32, f64)]) -> Vec<f64> {
    let total: f64 = octaves.iter().map(|o| o.1).sum();
    let mut acc = vec![0.0; (size * size) as usize];
    for &(cells, weight) in octaves {
        for (a, n) in acc.iter_mut().zip(value_noise(src, size, cells)) {
            *a += weight * n / total;
        }
    }
    acc
}

/// Built-in green leaf textures, used when no bank directory is configured.
pub fn procedural_leaf_bank(count: usize) -> Vec<TextureImage> {
    const SIZE: u32 = 96;
    (0..count)
        .map(|k| {
            let mut src = RandomSource::with_tag(0x1EAF, k as u64, 0);
            // yellow-green through dark green
            let base = [
                40.0 + 70.0 * src.next_f64(),
                100.0 + 80.0 * src.next_f64(),
                20.0 + 40.0 * src.next_f64(),
            ];
            let noise = fractal_noise(&mut src, SIZE, &[(4, 0.6), (12, 0.3), (32, 0.1)]);
            let vein_angle = 0.3 + 0.4 * src.next_f64();
            let vein_strength = 0.1 + 0.15 * src.next_f64();
            let pixels = RgbImage::from_fn(SIZE, SIZE, |x, y| {
                let n = noise[(y * SIZE + x) as usize];
                let v = (y as f64 - SIZE as f64 / 2.0).abs() / SIZE as f64;
                let u = x as f64 / SIZE as f64;
                // midrib plus oblique side veins
                let midrib = (-(v * 40.0).powi(2)).exp();
                let side = ((u - v * vein_angle.tan()) * 9.0 * TAU).cos().max(0.0).powi(8);
                let light = 0.75 + 0.5 * n + vein_strength * (midrib + 0.5 * side);
                Rgb(base.map(|c| (c * light).round().clamp(0.0, 255.0) as u8))
            });
            TextureImage { id: format!("leaf{k:02}"), pixels }
        })
        .collect()
}

/// Built-in soil-and-pot background plates.
pub fn procedural_background_bank(count: usize) -> Vec<TextureImage> {
    const SIZE: u32 = 384;
    (0..count)
        .map(|k| {
            let mut src = RandomSource::with_tag(0xB6, k as u64, 0);
            let soil = [70.0 + 40.0 * src.next_f64(), 50.0 + 25.0 * src.next_f64(), 35.0 + 20.0 * src.next_f64()];
            let pot = [20.0 + 40.0 * src.next_f64(), 25.0 + 40.0 * src.next_f64(), 30.0 + 60.0 * src.next_f64()];
            let rim = 0.40 + 0.06 * src.next_f64();
            let noise = fractal_noise(&mut src, SIZE, &[(6, 0.4), (24, 0.35), (96, 0.25)]);
            let pixels = RgbImage::from_fn(SIZE, SIZE, |x, y| {
                let n = noise[(y * SIZE + x) as usize];
                let dx = x as f64 / SIZE as f64 - 0.5;
                let dy = y as f64 / SIZE as f64 - 0.5;
                let r = (dx * dx + dy * dy).sqrt();
                let (color, gain) = if r < rim { (soil, 0.55 + 0.9 * n) } else { (pot, 0.8 + 0.4 * n) };
                Rgb(color.map(|c| (c * gain).round().clamp(0.0, 255.0) as u8))
            });
            TextureImage { id: format!("pot{k}"), pixels }
        })
        .collect()
}
