//! Software rasterizer: overhead camera, single light, shaded colour pass,
//! unshaded label pass, blur and compositing.

mod camera;
mod post;
mod raster;
mod shading;

pub use camera::{bbox_corners, sample_camera, Camera};
pub use post::{composite_over_background, gaussian_blur, gaussian_kernel, DimensionMismatch, PremulImage};
pub use raster::{
    labels_from_visibility, rasterize_labels, rasterize_rgb, render_passes, sample_light, shade, visibility,
    FrameBuffer, Light, VisibilityBuffer,
};
pub use shading::ShadingModel;
