//! Generation configuration.
//!
//! The on-disk format is a flat TOML key/value file; every key is optional and
//! falls back to the defaults below. Angles are radians; distances are in
//! template units (the bundled leaf blade is 1.0 long).
//!
//! ```toml
//! global_seed = 7
//! dataset_size = 10000
//! texture_mode = "leaf"        # plant | leaf | arbitrary
//! leaf_count_mean = 9.0
//! leaf_count_stddev = 2.5
//! pitch_range = [-0.785398, 0.785398]
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::render::ShadingModel;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("config field `{field}`: {message}")]
    Range { field: &'static str, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextureMode {
    /// One texture for every leaf of every plant in the dataset.
    #[serde(rename = "plant")]
    PlantUniform,
    /// Independent texture choice per leaf from a curated leaf bank.
    #[serde(rename = "leaf")]
    PerLeaf,
    /// Independent choice per leaf from an arbitrary-image bank.
    #[serde(rename = "arbitrary")]
    Arbitrary,
}

impl std::str::FromStr for TextureMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plant" => Ok(TextureMode::PlantUniform),
            "leaf" => Ok(TextureMode::PerLeaf),
            "arbitrary" => Ok(TextureMode::Arbitrary),
            other => Err(format!("unknown texture mode `{other}` (expected plant, leaf or arbitrary)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub global_seed: u64,
    pub dataset_size: usize,
    pub image_width: u32,
    pub image_height: u32,

    pub leaf_count_mean: f64,
    pub leaf_count_stddev: f64,
    pub leaf_count_min: u32,
    pub leaf_count_max: u32,

    pub yaw_range: [f64; 2],
    pub pitch_range: [f64; 2],
    pub roll_range: [f64; 2],
    pub scale_range_x: [f64; 2],
    pub scale_range_y: [f64; 2],
    pub scale_range_z: [f64; 2],
    pub bend_range: [f64; 2],

    /// Stddev of the anchor's polar offset from the equator.
    pub polar_sigma: f64,
    /// Hard limit on the polar offset.
    pub polar_clamp: f64,
    /// Placement sphere radius as a fraction of the template blade length.
    pub sphere_radius_factor: f64,
    /// Leaf template mesh; the bundled template when unset.
    pub leaf_template_path: Option<PathBuf>,

    pub texture_mode: TextureMode,
    /// Leaf texture directory; the built-in procedural bank when unset.
    pub texture_bank_path: Option<PathBuf>,
    /// Background plate directory; built-in procedural plates when unset.
    pub background_bank_path: Option<PathBuf>,

    pub flip_probability: f64,
    pub zoom_range: [f64; 2],
    pub exposure_range: [f64; 2],

    pub blur_sigma: f64,
    pub shading: ShadingModel,

    pub camera_distance: f64,
    pub camera_fov: f64,
    /// Relative camera offset: horizontal shift and distance change as a
    /// fraction of the nominal distance.
    pub camera_jitter: f64,
    /// Maximum angle between the view direction and straight down.
    pub camera_max_tilt: f64,

    /// Half-angle of the cone around vertical in which the light is placed.
    pub light_position_range: f64,
    pub light_distance: f64,
    pub light_intensity_range: [f64; 2],

    /// Drop fully occluded leaves and renumber the visible ones densely.
    pub drop_zero_area: bool,
}

/// Tilt can never exceed this, whatever the config says.
pub const MAX_CAMERA_TILT: f64 = 15.0 * PI / 180.0;

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            global_seed: 0,
            dataset_size: 10_000,
            image_width: 512,
            image_height: 512,
            leaf_count_mean: 9.0,
            leaf_count_stddev: 2.5,
            leaf_count_min: 1,
            leaf_count_max: 25,
            yaw_range: [0.0, TAU],
            pitch_range: [-FRAC_PI_4, FRAC_PI_4],
            roll_range: [0.0, FRAC_PI_4],
            scale_range_x: [0.6, 1.3],
            scale_range_y: [0.6, 1.3],
            scale_range_z: [0.5, 1.5],
            bend_range: [0.0, PI / 6.0],
            polar_sigma: 0.08,
            polar_clamp: 0.25,
            sphere_radius_factor: 0.15,
            leaf_template_path: None,
            texture_mode: TextureMode::PerLeaf,
            texture_bank_path: None,
            background_bank_path: None,
            flip_probability: 0.5,
            zoom_range: [0.8, 1.2],
            exposure_range: [0.7, 1.3],
            blur_sigma: 1.0,
            shading: ShadingModel::OrenNayar { roughness: 0.3 },
            camera_distance: 4.5,
            camera_fov: 45f64.to_radians(),
            camera_jitter: 0.1,
            camera_max_tilt: 10f64.to_radians(),
            light_position_range: 60f64.to_radians(),
            light_distance: 10.0,
            light_intensity_range: [0.9, 1.2],
            drop_zero_area: false,
        }
    }
}

fn range_err(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Range { field, message: message.into() }
}

fn check_interval(field: &'static str, r: [f64; 2], within: [f64; 2]) -> Result<(), ConfigError> {
    if !(r[0].is_finite() && r[1].is_finite()) || r[0] > r[1] {
        return Err(range_err(field, format!("[{}, {}] is not an ordered interval", r[0], r[1])));
    }
    if r[0] < within[0] || r[1] > within[1] {
        return Err(range_err(
            field,
            format!("[{}, {}] must lie within [{}, {}]", r[0], r[1], within[0], within[1]),
        ));
    }
    Ok(())
}

fn check_positive_interval(field: &'static str, r: [f64; 2]) -> Result<(), ConfigError> {
    check_interval(field, r, [f64::MIN_POSITIVE, f64::MAX])
}

impl GenerationConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: GenerationConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dataset_size == 0 {
            return Err(range_err("dataset_size", "must be positive"));
        }
        if self.image_width < 8 || self.image_height < 8 {
            return Err(range_err("image_width/image_height", "frames must be at least 8x8"));
        }
        if !(self.leaf_count_stddev >= 0.0) {
            return Err(range_err("leaf_count_stddev", format!("{} must be >= 0", self.leaf_count_stddev)));
        }
        if self.leaf_count_min < 1 {
            return Err(range_err("leaf_count_min", "plants need at least one leaf"));
        }
        if self.leaf_count_max > u16::MAX as u32 || self.leaf_count_max < self.leaf_count_min {
            return Err(range_err("leaf_count_max", "must be in [leaf_count_min, 65535]"));
        }
        let (lo, hi) = (self.leaf_count_min as f64, self.leaf_count_max as f64);
        if !(lo..=hi).contains(&self.leaf_count_mean) {
            return Err(range_err("leaf_count_mean", format!("{} outside [{lo}, {hi}]", self.leaf_count_mean)));
        }
        if self.yaw_range[1] > TAU || self.yaw_range[0] < 0.0 {
            return Err(range_err("yaw_range", "must lie within [0, 2pi)"));
        }
        check_interval("yaw_range", self.yaw_range, [0.0, TAU])?;
        check_interval("pitch_range", self.pitch_range, [-FRAC_PI_2, FRAC_PI_2])?;
        check_interval("roll_range", self.roll_range, [-FRAC_PI_2, FRAC_PI_2])?;
        check_positive_interval("scale_range_x", self.scale_range_x)?;
        check_positive_interval("scale_range_y", self.scale_range_y)?;
        check_positive_interval("scale_range_z", self.scale_range_z)?;
        check_interval("bend_range", self.bend_range, [-PI, PI])?;
        if !(self.polar_sigma >= 0.0) {
            return Err(range_err("polar_sigma", "must be >= 0"));
        }
        if !(0.0..FRAC_PI_2).contains(&self.polar_clamp) {
            return Err(range_err("polar_clamp", "must be in [0, pi/2)"));
        }
        if !(self.sphere_radius_factor > 0.0) {
            return Err(range_err("sphere_radius_factor", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.flip_probability) {
            return Err(range_err("flip_probability", "must be in [0, 1]"));
        }
        check_positive_interval("zoom_range", self.zoom_range)?;
        check_interval("exposure_range", self.exposure_range, [0.0, f64::MAX])?;
        if !(self.blur_sigma >= 0.0) || !self.blur_sigma.is_finite() {
            return Err(range_err("blur_sigma", "must be >= 0"));
        }
        if let ShadingModel::OrenNayar { roughness } = self.shading {
            if !(roughness >= 0.0) {
                return Err(range_err("shading", "roughness must be >= 0"));
            }
        }
        if !(self.camera_distance > 0.0) {
            return Err(range_err("camera_distance", "must be positive"));
        }
        if !(self.camera_fov > 0.0 && self.camera_fov < PI) {
            return Err(range_err("camera_fov", "must be in (0, pi)"));
        }
        if !(0.0..1.0).contains(&self.camera_jitter) {
            return Err(range_err("camera_jitter", "must be in [0, 1)"));
        }
        if !(0.0..=MAX_CAMERA_TILT).contains(&self.camera_max_tilt) {
            return Err(range_err("camera_max_tilt", "must be in [0, 15 degrees]"));
        }
        if !(0.0..FRAC_PI_2).contains(&self.light_position_range) {
            return Err(range_err("light_position_range", "cone half-angle must be in [0, pi/2)"));
        }
        if !(self.light_distance > 0.0) {
            return Err(range_err("light_distance", "must be positive"));
        }
        check_interval("light_intensity_range", self.light_intensity_range, [0.0, f64::MAX])?;
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<GenerationConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
    GenerationConfig::from_toml_str(&text)
}
