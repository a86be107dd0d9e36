//! Synthetic rosette-plant image generation with pixel-exact instance labels,
//! and the tooling to evaluate and analyse leaf instance segmentations.
//!
//! Pipeline for one image `i`:
//!
//! 1. derive per-purpose random streams from `(global_seed, i)` ([`rng`]);
//! 2. sample a leaf count and one pose per leaf, deform and place copies of
//!    the template leaf around a small sphere ([`leaf`], [`plant`]);
//! 3. pick and augment a texture per leaf ([`texture`]);
//! 4. sample an overhead camera and one light, render the shaded colour pass
//!    and the unshaded label pass from one visibility resolve ([`render`]);
//! 5. blur the plant, composite it over an augmented background plate, and
//!    write the RGB/label pair ([`pipeline`], [`dataset`]).

pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod label;
pub mod leaf;
pub mod mesh;
pub mod pipeline;
pub mod plant;
pub mod render;
pub mod rng;
pub mod stats;
pub mod texture;

pub use config::{load_config, GenerationConfig, TextureMode};
pub use error::Error;
pub use label::LabelMap;
pub use mesh::TriangleMesh;
pub use plant::PlantModel;
pub use rng::{derive_image_seed, Purpose, RandomSource};
