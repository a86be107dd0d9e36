use std::f64::consts::TAU;

use crate::config::{GenerationConfig, MAX_CAMERA_TILT};
use crate::mesh::Vec3;
use crate::rng::RandomSource;

/// Pinhole camera. Image x grows right, image y grows down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    pub vertical_fov: f64,
    pub width: u32,
    pub height: u32,
}

/// Orthonormal view basis.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ViewBasis {
    pub right: Vec3,
    pub up: Vec3,
    pub forward: Vec3,
    pub origin: Vec3,
    pub tan_half_y: f64,
    pub tan_half_x: f64,
}

impl Camera {
    /// Straight-down camera centred over `target` at height `distance` above it.
    pub fn nadir(target: Vec3, distance: f64, vertical_fov: f64, width: u32, height: u32) -> Self {
        Self {
            position: target + Vec3::new(0.0, 0.0, distance),
            look_at: target,
            up: Vec3::y(),
            vertical_fov,
            width,
            height,
        }
    }

    pub(crate) fn basis(&self) -> ViewBasis {
        let forward = (self.look_at - self.position).normalize();
        let right = forward.cross(&self.up).normalize();
        let up = right.cross(&forward);
        let tan_half_y = (self.vertical_fov / 2.0).tan();
        let aspect = self.width as f64 / self.height as f64;
        ViewBasis { right, up, forward, origin: self.position, tan_half_y, tan_half_x: tan_half_y * aspect }
    }

    pub fn view_direction(&self) -> Vec3 {
        (self.look_at - self.position).normalize()
    }

    /// Angle between the view direction and straight down.
    pub fn tilt(&self) -> f64 {
        self.view_direction().dot(&-Vec3::z()).clamp(-1.0, 1.0).acos()
    }

    /// Screen position (pixels, continuous) and view depth of a world point.
    /// `None` when the point is not in front of the camera.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64, f64)> {
        self.basis().project(p, self.width, self.height)
    }

    /// World-space ray through a continuous pixel position.
    pub fn ray(&self, sx: f64, sy: f64) -> (Vec3, Vec3) {
        let b = self.basis();
        let ndc_x = 2.0 * sx / self.width as f64 - 1.0;
        let ndc_y = 1.0 - 2.0 * sy / self.height as f64;
        let dir = b.forward + b.right * (ndc_x * b.tan_half_x) + b.up * (ndc_y * b.tan_half_y);
        (self.position, dir.normalize())
    }

    /// Whether every point projects inside the image.
    pub fn contains_all(&self, points: &[Vec3]) -> bool {
        let b = self.basis();
        points.iter().all(|p| {
            b.project(p, self.width, self.height).is_some_and(|(x, y, _)| {
                (0.0..=self.width as f64).contains(&x) && (0.0..=self.height as f64).contains(&y)
            })
        })
    }
}

impl ViewBasis {
    #[inline]
    pub fn project(&self, p: &Vec3, width: u32, height: u32) -> Option<(f64, f64, f64)> {
        let d = p - self.origin;
        let depth = d.dot(&self.forward);
        if depth <= 1e-9 {
            return None;
        }
        let ndc_x = d.dot(&self.right) / (depth * self.tan_half_x);
        let ndc_y = d.dot(&self.up) / (depth * self.tan_half_y);
        let sx = (ndc_x + 1.0) * 0.5 * width as f64;
        let sy = (1.0 - ndc_y) * 0.5 * height as f64;
        Some((sx, sy, depth))
    }
}

pub fn bbox_corners(lo: &Vec3, hi: &Vec3) -> [Vec3; 8] {
    let mut out = [Vec3::zeros(); 8];
    for (i, c) in out.iter_mut().enumerate() {
        *c = Vec3::new(
            if i & 1 == 0 { lo.x } else { hi.x },
            if i & 2 == 0 { lo.y } else { hi.y },
            if i & 4 == 0 { lo.z } else { hi.z },
        );
    }
    out
}

/// Jittered overhead camera for a plant with bounds `(lo, hi)`.
///
/// The nominal pose sits `camera_distance` above the top of the box, looking
/// at its centre. Jitter shifts the position horizontally and scales the
/// distance, both by up to `camera_jitter` of the distance; the tilt is
/// capped at `camera_max_tilt` (never above 15 degrees). If the box does not
/// fit the frame the camera backs away along its view axis until it does.
pub fn sample_camera(src: &mut RandomSource, cfg: &GenerationConfig, bbox: (Vec3, Vec3)) -> Camera {
    let (lo, hi) = bbox;
    let centre = (lo + hi) / 2.0;
    let jitter = cfg.camera_jitter;
    let distance = cfg.camera_distance * src.uniform([1.0 - jitter, 1.0 + jitter]);
    let shift_len = cfg.camera_distance * jitter * src.uniform([0.0, 1.0]).sqrt();
    let shift_dir = src.uniform([0.0, TAU]);
    let height = hi.z - centre.z + distance;
    let max_shift = height * cfg.camera_max_tilt.min(MAX_CAMERA_TILT).tan();
    let shift = shift_len.min(max_shift);
    let position = Vec3::new(centre.x + shift * shift_dir.cos(), centre.y + shift * shift_dir.sin(), hi.z + distance);
    let mut cam = Camera {
        position,
        look_at: centre,
        up: Vec3::y(),
        vertical_fov: cfg.camera_fov,
        width: cfg.image_width,
        height: cfg.image_height,
    };
    back_off_until_visible(&mut cam, &bbox_corners(&lo, &hi));
    cam
}

fn back_off_until_visible(cam: &mut Camera, corners: &[Vec3]) {
    for _ in 0..200 {
        if cam.contains_all(corners) {
            return;
        }
        let offset = cam.position - cam.look_at;
        cam.position = cam.look_at + offset * 1.05;
    }
}
