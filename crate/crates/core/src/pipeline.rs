//! End-to-end generation of one image and of whole datasets.
//!
//! Every random choice for image `i` comes from streams keyed by
//! `(global_seed, i, purpose)`, so an image never depends on which other
//! images were generated, in what order, or on how many workers.

use std::path::Path;

use image::RgbImage;

use crate::config::GenerationConfig;
use crate::dataset::{write_sample, DatasetManifest, LeafRecord, SampleInputs, SampleRecord};
use crate::error::Error;
use crate::label::LabelMap;
use crate::mesh::{bundled_template, load_leaf_template, TriangleMesh};
use crate::plant::{assemble_plant, PlantModel};
use crate::render::{
    composite_over_background, gaussian_blur, rasterize_labels, render_passes, sample_camera, sample_light, Camera, Light, PremulImage,
};
use crate::rng::{Purpose, RandomSource};
use crate::texture::{
    augment_image, fit_to_frame, load_bank, procedural_background_bank, procedural_leaf_bank, AugmentConfig,
    TextureImage, TexturePolicy,
};

pub const BUILTIN_LEAF_TEXTURES: usize = 30;
pub const BUILTIN_BACKGROUNDS: usize = 4;

/// Immutable inputs shared by all workers.
pub struct GenerationContext {
    pub config: GenerationConfig,
    pub template: TriangleMesh,
    pub leaf_bank: Vec<TextureImage>,
    pub background_bank: Vec<TextureImage>,
    pub policy: TexturePolicy,
}

impl GenerationContext {
    /// Validates the config and loads the template and both banks.
    pub fn new(config: GenerationConfig) -> Result<Self, Error> {
        config.validate()?;
        let template = match &config.leaf_template_path {
            Some(p) => load_leaf_template(p)?,
            None => bundled_template(),
        };
        let leaf_bank = match &config.texture_bank_path {
            Some(p) => load_bank(p)?,
            None => procedural_leaf_bank(BUILTIN_LEAF_TEXTURES),
        };
        let background_bank = match &config.background_bank_path {
            Some(p) => load_bank(p)?,
            None => procedural_background_bank(BUILTIN_BACKGROUNDS),
        };
        let background_bank =
            background_bank.iter().map(|b| fit_to_frame(b, config.image_width, config.image_height)).collect();
        let policy = TexturePolicy::new(config.texture_mode, leaf_bank.len(), config.global_seed)?;
        Ok(Self { config, template, leaf_bank, background_bank, policy })
    }

    fn stream(&self, index: u64, purpose: Purpose) -> RandomSource {
        RandomSource::new(self.config.global_seed, index, purpose)
    }

    /// Geometry of image `index`, textures assigned but not rendered.
    pub fn plant(&self, index: u64) -> Result<(PlantModel, Vec<usize>), Error> {
        let mut plant = assemble_plant(&mut self.stream(index, Purpose::LeafCount), &self.config, &self.template);
        let picks = self.policy.assign(
            &mut self.stream(index, Purpose::TextureAssign),
            self.leaf_bank.len(),
            plant.leaves.len(),
        )?;
        for (leaf, &k) in plant.leaves.iter_mut().zip(&picks) {
            leaf.texture_ref = self.leaf_bank[k].id.clone();
        }
        Ok((plant, picks))
    }
}

/// Label map of image `index` without the colour pass. Identical to the
/// labels [`generate_sample`] produces when `drop_zero_area` is off.
pub fn generate_labels(ctx: &GenerationContext, index: u64) -> Result<(LabelMap, PlantModel), Error> {
    let (plant, _) = ctx.plant(index).map_err(|e| e.at_image(index))?;
    let camera = sample_camera(&mut ctx.stream(index, Purpose::Camera), &ctx.config, plant.bounds());
    Ok((rasterize_labels(&plant, &camera), plant))
}

/// One rendered image with its labels and per-leaf metadata.
#[derive(Debug, Clone)]
pub struct GeneratedSample {
    pub index: u64,
    pub rgb: RgbImage,
    pub labels: LabelMap,
    /// Plant coverage before blurring, one 0/1 entry per pixel.
    pub coverage: Vec<u8>,
    pub leaves: Vec<LeafRecord>,
    pub background_id: String,
    pub camera: Camera,
    pub light: Light,
    pub plant: PlantModel,
}

pub fn generate_sample(ctx: &GenerationContext, index: u64) -> Result<GeneratedSample, Error> {
    generate_sample_inner(ctx, index).map_err(|e| e.at_image(index))
}

fn generate_sample_inner(ctx: &GenerationContext, index: u64) -> Result<GeneratedSample, Error> {
    let cfg = &ctx.config;
    let (plant, picks) = ctx.plant(index)?;

    let augment = AugmentConfig::from_config(cfg);
    let mut tex_src = ctx.stream(index, Purpose::TextureAugment);
    let textures: Vec<TextureImage> =
        picks.iter().map(|&k| augment_image(&mut tex_src, &ctx.leaf_bank[k], &augment, true)).collect();

    let camera = sample_camera(&mut ctx.stream(index, Purpose::Camera), cfg, plant.bounds());
    let light = sample_light(&mut ctx.stream(index, Purpose::Light), cfg, plant.centroid);
    let (fb, mut labels) = render_passes(&plant, &textures, &camera, &light, cfg.shading);

    let blurred = gaussian_blur(&PremulImage::from_framebuffer(&fb), cfg.blur_sigma);
    let bg_pick = ctx.stream(index, Purpose::Background).index(ctx.background_bank.len());
    let background = augment_image(
        &mut ctx.stream(index, Purpose::BackgroundAugment),
        &ctx.background_bank[bg_pick],
        &augment,
        false,
    );
    let rgb = composite_over_background(&blurred, &background)?;

    let stats = labels.instance_stats();
    let mut leaves: Vec<LeafRecord> = plant
        .leaves
        .iter()
        .map(|leaf| {
            let s = stats.iter().find(|s| s.id == leaf.instance_id);
            LeafRecord {
                instance_id: leaf.instance_id,
                pixel_area: s.map_or(0, |s| s.area),
                centroid_x: s.map_or(f64::NAN, |s| s.centroid[0]),
                centroid_y: s.map_or(f64::NAN, |s| s.centroid[1]),
                texture_id: leaf.texture_ref.clone(),
                params: leaf.params.clone(),
            }
        })
        .collect();
    if cfg.drop_zero_area {
        leaves.retain(|l| l.pixel_area > 0);
        let mut remap = vec![0u16; plant.leaves.len() + 1];
        for (k, leaf) in leaves.iter_mut().enumerate() {
            remap[leaf.instance_id as usize] = k as u16 + 1;
            leaf.instance_id = k as u16 + 1;
        }
        labels = labels.relabel(|id| remap[id as usize]);
    }

    Ok(GeneratedSample {
        index,
        rgb,
        labels,
        coverage: fb.alpha,
        leaves,
        background_id: background.id,
        camera,
        light,
        plant,
    })
}

pub fn write_generated(out_dir: &Path, sample: GeneratedSample) -> Result<SampleRecord, Error> {
    let index = sample.index;
    write_sample(
        out_dir,
        SampleInputs {
            index,
            rgb: &sample.rgb,
            labels: &sample.labels,
            leaves: sample.leaves,
            background_id: sample.background_id,
        },
    )
    .map_err(|e| Error::from(e).at_image(index))
}

/// Generates images `start..start + count` into `out_dir` on `workers`
/// threads and writes the manifest. Output does not depend on `workers`.
pub fn generate_dataset(
    ctx: &GenerationContext,
    out_dir: &Path,
    start: u64,
    count: u64,
    workers: usize,
    progress: &(dyn Fn(u64) + Sync),
) -> Result<DatasetManifest, Error> {
    use rayon::prelude::*;
    use std::sync::atomic::{AtomicU64, Ordering};

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("worker pool: {e}")))?;
    let done = AtomicU64::new(0);
    let records = pool.install(|| {
        (start..start + count)
            .into_par_iter()
            .map(|index| {
                let rec = write_generated(out_dir, generate_sample(ctx, index)?)?;
                progress(done.fetch_add(1, Ordering::Relaxed) + 1);
                Ok(rec)
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let manifest = DatasetManifest::new(out_dir, Some(ctx.config.clone()), records);
    manifest.write(out_dir)?;
    Ok(manifest)
}
