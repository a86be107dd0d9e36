//! On-disk dataset layout, label PNG codec, manifests, annotation export, and
//! real/synthetic batch mixing.
//!
//! ```text
//! out/
//!   rgb/plantNNNNN_rgb.png          8-bit RGB
//!   label/plantNNNNN_label.png      16-bit grayscale, raw instance ids
//!   preview/plantNNNNN_preview.png  colourized labels, for humans only
//!   manifest.csv                    one row per leaf (see MANIFEST_COLUMNS)
//!   dataset.toml                    format version + config snapshot
//!   annotations.json                per-instance boxes/polygons or RLE masks
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::config::GenerationConfig;
use crate::label::LabelMap;
use crate::leaf::LeafDeformParams;
use crate::rng::RandomSource;
use crate::texture::{self, TextureError, TextureImage};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },
    #[error("{path}: label maps must be single-channel integer PNGs, found {found}; {hint}")]
    NotSingleChannel { path: PathBuf, found: String, hint: &'static str },
    #[error("{path}: every id is a multiple of 257, which looks like 8-bit labels rescaled to 16 bits")]
    ScaledLabels { path: PathBuf },
    #[error("rgb is {rgb:?} but labels are {labels:?}")]
    DimensionMismatch { rgb: (u32, u32), labels: (u32, u32) },
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("batch size must be a positive even number, got {0}")]
    OddBatch(usize),
    #[error("{0} manifest is empty")]
    EmptyManifest(&'static str),
    #[error("train fraction must be in [0, 1], got {0}")]
    BadFraction(f64),
}

impl DatasetError {
    pub fn is_io(&self) -> bool {
        matches!(self, DatasetError::Io { .. })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.to_owned(), source }
}

fn image_err(path: &Path, e: image::ImageError) -> DatasetError {
    match e {
        image::ImageError::IoError(source) => DatasetError::Io { path: path.to_owned(), source },
        other => DatasetError::Image { path: path.to_owned(), message: other.to_string() },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub instance_id: u16,
    pub pixel_area: u64,
    /// Mean member column/row; NaN when the leaf is fully hidden.
    pub centroid_x: f64,
    pub centroid_y: f64,
    pub texture_id: String,
    pub params: LeafDeformParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub index: u64,
    /// Relative to the dataset root.
    pub rgb_path: String,
    pub label_path: String,
    pub width: u32,
    pub height: u32,
    pub leaf_count: u32,
    pub background_id: String,
    pub leaves: Vec<LeafRecord>,
}

impl SampleRecord {
    pub fn visible_leaves(&self) -> impl Iterator<Item = &LeafRecord> {
        self.leaves.iter().filter(|l| l.pixel_area > 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub config: Option<GenerationConfig>,
    pub records: Vec<SampleRecord>,
    /// Directory relative paths resolve against.
    pub root: PathBuf,
}

pub fn rgb_name(index: u64) -> String {
    format!("rgb/plant{index:05}_rgb.png")
}

pub fn label_name(index: u64) -> String {
    format!("label/plant{index:05}_label.png")
}

pub fn preview_name(index: u64) -> String {
    format!("preview/plant{index:05}_preview.png")
}

fn ensure_parent(path: &Path) -> Result<(), DatasetError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    Ok(())
}

pub fn write_label_map(path: &Path, labels: &LabelMap) -> Result<(), DatasetError> {
    ensure_parent(path)?;
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(labels.width, labels.height, labels.labels.clone()).expect("label buffer size");
    buf.save(path).map_err(|e| image_err(path, e))
}

/// Decodes a single-channel 8- or 16-bit PNG of instance ids.
pub fn read_label_map(path: &Path) -> Result<LabelMap, DatasetError> {
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    let hint = "export ids as 8- or 16-bit grayscale (for indexed PNGs, write the palette indices as gray values)";
    let (w, h) = (img.width(), img.height());
    let labels: Vec<u16> = match img {
        DynamicImage::ImageLuma16(buf) => buf.into_raw(),
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u16::from).collect(),
        other => {
            return Err(DatasetError::NotSingleChannel {
                path: path.to_owned(),
                found: format!("{:?}", other.color()),
                hint,
            })
        }
    };
    let max = labels.iter().copied().max().unwrap_or(0);
    if max >= 257 && labels.iter().all(|&l| l % 257 == 0) {
        return Err(DatasetError::ScaledLabels { path: path.to_owned() });
    }
    Ok(LabelMap::from_vec(w, h, labels))
}

/// Distinct, reproducible colour per id; black background.
pub fn colorize(labels: &LabelMap) -> RgbImage {
    RgbImage::from_fn(labels.width, labels.height, |x, y| {
        let id = labels.get(x, y);
        if id == 0 {
            return Rgb([0, 0, 0]);
        }
        let hue = (id as f64 * 0.618_033_988_749_895).fract() * 6.0;
        let sector = hue.floor() as u32;
        let f = hue - sector as f64;
        let (hi, lo) = (230.0, 60.0);
        let rise = lo + (hi - lo) * f;
        let fall = hi - (hi - lo) * f;
        let [r, g, b] = match sector {
            0 => [hi, rise, lo],
            1 => [fall, hi, lo],
            2 => [lo, hi, rise],
            3 => [lo, fall, hi],
            4 => [rise, lo, hi],
            _ => [hi, lo, fall],
        };
        Rgb([r as u8, g as u8, b as u8])
    })
}

/// Inputs for one written sample.
pub struct SampleInputs<'a> {
    pub index: u64,
    pub rgb: &'a RgbImage,
    pub labels: &'a LabelMap,
    pub leaves: Vec<LeafRecord>,
    pub background_id: String,
}

pub fn write_sample(out_dir: &Path, sample: SampleInputs<'_>) -> Result<SampleRecord, DatasetError> {
    let labels = sample.labels;
    if sample.rgb.dimensions() != (labels.width, labels.height) {
        return Err(DatasetError::DimensionMismatch {
            rgb: sample.rgb.dimensions(),
            labels: (labels.width, labels.height),
        });
    }
    let rgb_path = rgb_name(sample.index);
    let label_path = label_name(sample.index);
    let rgb_full = out_dir.join(&rgb_path);
    ensure_parent(&rgb_full)?;
    sample.rgb.save(&rgb_full).map_err(|e| image_err(&rgb_full, e))?;
    write_label_map(&out_dir.join(&label_path), labels)?;
    let preview_full = out_dir.join(preview_name(sample.index));
    ensure_parent(&preview_full)?;
    colorize(labels).save(&preview_full).map_err(|e| image_err(&preview_full, e))?;
    Ok(SampleRecord {
        index: sample.index,
        rgb_path,
        label_path,
        width: labels.width,
        height: labels.height,
        leaf_count: sample.leaves.len() as u32,
        background_id: sample.background_id,
        leaves: sample.leaves,
    })
}

pub fn load_background_bank(dir: &Path) -> Result<Vec<TextureImage>, TextureError> {
    texture::load_bank(dir)
}

/// `manifest.csv` header. Leaf columns are empty for images without leaves.
pub const MANIFEST_COLUMNS: &[&str] = &[
    "index", "rgb_path", "label_path", "width", "height", "leaf_count", "background", "instance_id", "pixel_area",
    "centroid_x", "centroid_y", "texture", "scale_x", "scale_y", "scale_z", "bend", "yaw", "pitch", "roll",
    "anchor_x", "anchor_y", "anchor_z",
];

#[derive(Debug, Serialize, Deserialize)]
struct ManifestRow {
    index: u64,
    rgb_path: String,
    label_path: String,
    #[serde(default)]
    width: Option<u32>,
    #[serde(default)]
    height: Option<u32>,
    #[serde(default)]
    leaf_count: Option<u32>,
    #[serde(default)]
    background: Option<String>,
    #[serde(default)]
    instance_id: Option<u16>,
    #[serde(default)]
    pixel_area: Option<u64>,
    #[serde(default)]
    centroid_x: Option<f64>,
    #[serde(default)]
    centroid_y: Option<f64>,
    #[serde(default)]
    texture: Option<String>,
    #[serde(default)]
    scale_x: Option<f64>,
    #[serde(default)]
    scale_y: Option<f64>,
    #[serde(default)]
    scale_z: Option<f64>,
    #[serde(default)]
    bend: Option<f64>,
    #[serde(default)]
    yaw: Option<f64>,
    #[serde(default)]
    pitch: Option<f64>,
    #[serde(default)]
    roll: Option<f64>,
    #[serde(default)]
    anchor_x: Option<f64>,
    #[serde(default)]
    anchor_y: Option<f64>,
    #[serde(default)]
    anchor_z: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct DatasetMeta {
    format_version: u32,
    config: Option<GenerationConfig>,
}

impl DatasetManifest {
    pub fn new(root: impl Into<PathBuf>, config: Option<GenerationConfig>, mut records: Vec<SampleRecord>) -> Self {
        records.sort_by_key(|r| r.index);
        Self { format_version: FORMAT_VERSION, config, records, root: root.into() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(MANIFEST_COLUMNS)?;
        for r in &self.records {
            let base = |leaf: Option<&LeafRecord>| ManifestRow {
                index: r.index,
                rgb_path: r.rgb_path.clone(),
                label_path: r.label_path.clone(),
                width: Some(r.width),
                height: Some(r.height),
                leaf_count: Some(r.leaf_count),
                background: Some(r.background_id.clone()),
                instance_id: leaf.map(|l| l.instance_id),
                pixel_area: leaf.map(|l| l.pixel_area),
                centroid_x: leaf.map(|l| l.centroid_x),
                centroid_y: leaf.map(|l| l.centroid_y),
                texture: leaf.map(|l| l.texture_id.clone()),
                scale_x: leaf.map(|l| l.params.scale_x),
                scale_y: leaf.map(|l| l.params.scale_y),
                scale_z: leaf.map(|l| l.params.scale_z),
                bend: leaf.map(|l| l.params.bend_curl),
                yaw: leaf.map(|l| l.params.yaw),
                pitch: leaf.map(|l| l.params.pitch),
                roll: leaf.map(|l| l.params.roll),
                anchor_x: leaf.map(|l| l.params.anchor[0]),
                anchor_y: leaf.map(|l| l.params.anchor[1]),
                anchor_z: leaf.map(|l| l.params.anchor[2]),
            };
            if r.leaves.is_empty() {
                w.serialize(base(None))?;
            }
            for leaf in &r.leaves {
                w.serialize(base(Some(leaf)))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `manifest.csv` and `dataset.toml` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), DatasetError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join("manifest.csv");
        let file = std::fs::File::create(&path).map_err(io_err(&path))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| DatasetError::Manifest { path: path.clone(), message: e.to_string() })?;
        let meta_path = dir.join("dataset.toml");
        let meta = DatasetMeta { format_version: self.format_version, config: self.config.clone() };
        let text = toml::to_string(&meta).expect("metadata serializes");
        std::fs::write(&meta_path, text).map_err(io_err(&meta_path))
    }

    /// Reads a `manifest.csv`; a sibling `dataset.toml` is picked up if present.
    /// Minimal hand-written manifests need only `index,rgb_path,label_path`.
    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let bad = |message: String| DatasetError::Manifest { path: path.to_owned(), message };
        let file = std::fs::File::open(path).map_err(io_err(path))?;
        let mut reader = csv::Reader::from_reader(file);
        let mut by_index: BTreeMap<u64, SampleRecord> = BTreeMap::new();
        for row in reader.deserialize::<ManifestRow>() {
            let row = row.map_err(|e| bad(e.to_string()))?;
            let rec = by_index.entry(row.index).or_insert_with(|| SampleRecord {
                index: row.index,
                rgb_path: row.rgb_path.clone(),
                label_path: row.label_path.clone(),
                width: row.width.unwrap_or(0),
                height: row.height.unwrap_or(0),
                leaf_count: row.leaf_count.unwrap_or(0),
                background_id: row.background.clone().unwrap_or_default(),
                leaves: Vec::new(),
            });
            if let Some(instance_id) = row.instance_id {
                let f = |v: Option<f64>| v.unwrap_or(f64::NAN);
                rec.leaves.push(LeafRecord {
                    instance_id,
                    pixel_area: row.pixel_area.unwrap_or(0),
                    centroid_x: f(row.centroid_x),
                    centroid_y: f(row.centroid_y),
                    texture_id: row.texture.unwrap_or_default(),
                    params: LeafDeformParams {
                        scale_x: f(row.scale_x),
                        scale_y: f(row.scale_y),
                        scale_z: f(row.scale_z),
                        bend_curl: f(row.bend),
                        yaw: f(row.yaw),
                        pitch: f(row.pitch),
                        roll: f(row.roll),
                        anchor: [f(row.anchor_x), f(row.anchor_y), f(row.anchor_z)],
                    },
                });
            }
        }
        let root = path.parent().map(Path::to_owned).unwrap_or_default();
        let meta_path = root.join("dataset.toml");
        let (format_version, config) = if meta_path.exists() {
            let text = std::fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
            let meta: DatasetMeta = toml::from_str(&text).map_err(|e| bad(format!("dataset.toml: {e}")))?;
            (meta.format_version, meta.config)
        } else {
            (FORMAT_VERSION, None)
        };
        Ok(Self { format_version, config, records: by_index.into_values().collect(), root })
    }

    pub fn resolve(&self, relative: &str) -> PathBuf {
        self.root.join(relative)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationStyle {
    /// Uncompressed column-major run-length masks.
    PerInstanceMasks,
    /// Tight boxes plus the outer outline of each 4-connected piece.
    BoxesAndPolygons,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLengthMask {
    /// `[height, width]`.
    pub size: [u32; 2],
    /// Alternating background/foreground run lengths, starting with background.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub image_index: u64,
    pub instance_id: u16,
    /// `[col, row, width, height]`.
    pub bbox: [u32; 4],
    pub area: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub polygons: Option<Vec<Vec<u32>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rle: Option<RunLengthMask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationImage {
    pub index: u64,
    pub rgb: String,
    pub label: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationFile {
    pub format_version: u32,
    pub style: AnnotationStyle,
    pub images: Vec<AnnotationImage>,
    pub annotations: Vec<Annotation>,
}

impl AnnotationFile {
    pub fn write(&self, path: &Path) -> Result<(), DatasetError> {
        ensure_parent(path)?;
        let text = serde_json::to_string_pretty(self).expect("annotations serialize");
        std::fs::write(path, text).map_err(io_err(path))
    }
}

pub fn rle_encode(labels: &LabelMap, id: u16) -> RunLengthMask {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u64;
    for col in 0..labels.width {
        for row in 0..labels.height {
            let on = labels.get(col, row) == id;
            if on != current {
                counts.push(run);
                run = 0;
                current = on;
            }
            run += 1;
        }
    }
    counts.push(run);
    RunLengthMask { size: [labels.height, labels.width], counts }
}

/// Outer outline (pixel-corner coordinates, clockwise on screen) of every
/// 4-connected piece of instance `id`. Holes are not reported.
pub fn instance_polygons(labels: &LabelMap, id: u16) -> Vec<Vec<u32>> {
    let (w, h) = (labels.width as i64, labels.height as i64);
    let inside = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && labels.get(x as u32, y as u32) == id;
    let mut seen = vec![false; (w * h) as usize];
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !inside(x, y) || seen[(y * w + x) as usize] {
                continue;
            }
            // flood the piece
            let mut stack = vec![(x, y)];
            seen[(y * w + x) as usize] = true;
            while let Some((cx, cy)) = stack.pop() {
                for (nx, ny) in [(cx + 1, cy), (cx - 1, cy), (cx, cy + 1), (cx, cy - 1)] {
                    if inside(nx, ny) && !seen[(ny * w + nx) as usize] {
                        seen[(ny * w + nx) as usize] = true;
                        stack.push((nx, ny));
                    }
                }
            }
            out.push(trace_outline(&inside, x, y));
        }
    }
    out
}

/// Walks pixel-square edges with the piece on the right, starting at the top
/// edge of the piece's first pixel in raster order.
fn trace_outline(inside: &impl Fn(i64, i64) -> bool, x0: i64, y0: i64) -> Vec<u32> {
    // directions: 0 right, 1 down, 2 left, 3 up (y grows downward)
    const D: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
    // pixel to the right of an edge leaving corner (x, y) in direction d
    let right_px = |x: i64, y: i64, d: usize| match d {
        0 => (x, y),
        1 => (x - 1, y),
        2 => (x - 1, y - 1),
        _ => (x, y - 1),
    };
    let left_px = |x: i64, y: i64, d: usize| match d {
        0 => (x, y - 1),
        1 => (x, y),
        2 => (x - 1, y),
        _ => (x - 1, y - 1),
    };
    let is_boundary = |x: i64, y: i64, d: usize| {
        let (rx, ry) = right_px(x, y, d);
        let (lx, ly) = left_px(x, y, d);
        inside(rx, ry) && !inside(lx, ly)
    };
    let (mut x, mut y, mut d) = (x0, y0, 0usize);
    let mut corners: Vec<(i64, i64)> = vec![(x, y)];
    loop {
        x += D[d].0;
        y += D[d].1;
        if (x, y) == (x0, y0) {
            break;
        }
        // prefer turning right so diagonal contacts split the outline
        let next = [(d + 1) % 4, d, (d + 3) % 4].into_iter().find(|&nd| is_boundary(x, y, nd)).unwrap_or((d + 2) % 4);
        if next != d {
            corners.push((x, y));
        }
        d = next;
    }
    corners.into_iter().flat_map(|(cx, cy)| [cx as u32, cy as u32]).collect()
}

/// One annotation per distinct nonzero label, ordered by (image, id).
/// `include_hidden` also emits zero-area leaves known from the manifest.
pub fn export_annotations(
    manifest: &DatasetManifest,
    style: AnnotationStyle,
    include_hidden: bool,
) -> Result<AnnotationFile, DatasetError> {
    let mut images = Vec::new();
    let mut annotations = Vec::new();
    for rec in &manifest.records {
        let labels = read_label_map(&manifest.resolve(&rec.label_path))?;
        images.push(AnnotationImage {
            index: rec.index,
            rgb: rec.rgb_path.clone(),
            label: rec.label_path.clone(),
            width: labels.width,
            height: labels.height,
        });
        let mut per_image: BTreeMap<u16, Annotation> = BTreeMap::new();
        for s in labels.instance_stats() {
            let (polygons, rle) = match style {
                AnnotationStyle::BoxesAndPolygons => (Some(instance_polygons(&labels, s.id)), None),
                AnnotationStyle::PerInstanceMasks => (None, Some(rle_encode(&labels, s.id))),
            };
            per_image.insert(
                s.id,
                Annotation { image_index: rec.index, instance_id: s.id, bbox: s.bbox, area: s.area, polygons, rle },
            );
        }
        if include_hidden {
            for leaf in rec.leaves.iter().filter(|l| l.pixel_area == 0) {
                per_image.entry(leaf.instance_id).or_insert(Annotation {
                    image_index: rec.index,
                    instance_id: leaf.instance_id,
                    bbox: [0; 4],
                    area: 0,
                    polygons: (style == AnnotationStyle::BoxesAndPolygons).then(Vec::new),
                    rle: (style == AnnotationStyle::PerInstanceMasks).then(|| rle_encode(&labels, 0).empty_like()),
                });
            }
        }
        annotations.extend(per_image.into_values());
    }
    Ok(AnnotationFile { format_version: FORMAT_VERSION, style, images, annotations })
}

impl RunLengthMask {
    fn empty_like(&self) -> RunLengthMask {
        RunLengthMask { size: self.size, counts: vec![self.size[0] as u64 * self.size[1] as u64] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Real,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixEntry {
    pub source: Source,
    /// Position in the source manifest's record list.
    pub record: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixPlan {
    pub batches: Vec<Vec<MixEntry>>,
    /// Shuffled passes started over each source during the epoch.
    pub real_passes: usize,
    pub synthetic_passes: usize,
}

/// `passes` reshuffled passes over `n` items, each padded with repeats from
/// the same pass to a whole number of `half`-sized chunks.
fn chunked_passes(src: &mut RandomSource, n: usize, half: usize, chunks_needed: usize) -> (Vec<Vec<usize>>, usize) {
    let mut chunks = Vec::with_capacity(chunks_needed);
    let mut passes = 0;
    while chunks.len() < chunks_needed {
        let mut order: Vec<usize> = (0..n).collect();
        src.shuffle(&mut order);
        passes += 1;
        let per_pass = n.div_ceil(half);
        for c in 0..per_pass {
            if chunks.len() == chunks_needed {
                break;
            }
            chunks.push((0..half).map(|k| order[(c * half + k) % n]).collect());
        }
    }
    (chunks, passes)
}

/// Balanced epoch: every batch holds `batch_size / 2` real and `batch_size / 2`
/// synthetic entries. The epoch length follows the larger source; the smaller
/// one is reshuffled and repeated.
pub fn mix_manifests(
    real: &DatasetManifest,
    synthetic: &DatasetManifest,
    batch_size: usize,
    src: &mut RandomSource,
) -> Result<MixPlan, DatasetError> {
    mix_counts(real.len(), synthetic.len(), batch_size, src)
}

/// [`mix_manifests`] on bare source sizes.
pub fn mix_counts(real: usize, synthetic: usize, batch_size: usize, src: &mut RandomSource) -> Result<MixPlan, DatasetError> {
    if batch_size == 0 || batch_size % 2 != 0 {
        return Err(DatasetError::OddBatch(batch_size));
    }
    if real == 0 {
        return Err(DatasetError::EmptyManifest("real"));
    }
    if synthetic == 0 {
        return Err(DatasetError::EmptyManifest("synthetic"));
    }
    let half = batch_size / 2;
    let n_batches = real.div_ceil(half).max(synthetic.div_ceil(half));
    let (syn_chunks, synthetic_passes) = chunked_passes(src, synthetic, half, n_batches);
    let (real_chunks, real_passes) = chunked_passes(src, real, half, n_batches);
    let batches = real_chunks
        .into_iter()
        .zip(syn_chunks)
        .map(|(r, s)| {
            r.into_iter()
                .map(|record| MixEntry { source: Source::Real, record })
                .chain(s.into_iter().map(|record| MixEntry { source: Source::Synthetic, record }))
                .collect()
        })
        .collect();
    Ok(MixPlan { batches, real_passes, synthetic_passes })
}

/// Seeded train/validation split by whole images.
pub fn split_manifest(
    manifest: &DatasetManifest,
    train_fraction: f64,
    src: &mut RandomSource,
) -> Result<(DatasetManifest, DatasetManifest), DatasetError> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(DatasetError::BadFraction(train_fraction));
    }
    let mut order: Vec<usize> = (0..manifest.len()).collect();
    src.shuffle(&mut order);
    let n_train = (manifest.len() as f64 * train_fraction).round() as usize;
    let pick = |ids: &[usize]| {
        DatasetManifest::new(
            manifest.root.clone(),
            manifest.config.clone(),
            ids.iter().map(|&i| manifest.records[i].clone()).collect(),
        )
    };
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}
