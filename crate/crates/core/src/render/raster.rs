//! Shared visibility pass, shaded colour pass, and label pass.
//!
//! Both passes resolve visibility with the same routine: vertices are snapped
//! to a 1/256 pixel grid, coverage is tested at pixel centres with exact
//! integer edge functions and a top-left fill rule, and the nearest fragment
//! wins (ties keep the earlier leaf). Labels therefore cover exactly the
//! pixels the colour pass marks with alpha 1.

use std::f64::consts::TAU;

use crate::config::GenerationConfig;
use crate::label::LabelMap;
use crate::mesh::Vec3;
use crate::plant::PlantModel;
use crate::rng::RandomSource;
use crate::texture::TextureImage;

use super::camera::Camera;
use super::shading::ShadingModel;

const SUBPIXEL: f64 = 256.0;
const HALF: i64 = 128;
/// Vertices farther than this from the frame (pixels) are not rasterized.
const GUARD_BAND: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Light {
    pub position: Vec3,
    /// Linear RGB multiplier, each channel >= 0.
    pub intensity: [f64; 3],
}

/// Single light in a cone about the vertical above `target`.
pub fn sample_light(src: &mut RandomSource, cfg: &GenerationConfig, target: Vec3) -> Light {
    // uniform over the spherical cap
    let cos_a = src.uniform([cfg.light_position_range.cos(), 1.0]);
    let sin_a = (1.0 - cos_a * cos_a).max(0.0).sqrt();
    let azimuth = src.uniform([0.0, TAU]);
    let dir = Vec3::new(sin_a * azimuth.cos(), sin_a * azimuth.sin(), cos_a);
    let i = src.uniform(cfg.light_intensity_range);
    Light { position: target + dir * cfg.light_distance, intensity: [i; 3] }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameBuffer {
    pub width: u32,
    pub height: u32,
    /// Undefined (zero) where alpha is 0.
    pub color: Vec<[u8; 3]>,
    /// Coverage, 0 or 1.
    pub alpha: Vec<u8>,
    /// View depth; `f64::INFINITY` where nothing was drawn.
    pub depth: Vec<f64>,
}

/// Winning fragment per pixel.
#[derive(Debug, Clone)]
pub struct VisibilityBuffer {
    pub width: u32,
    pub height: u32,
    pub depth: Vec<f64>,
    /// Leaf index + 1; 0 for empty pixels.
    pub leaf: Vec<u16>,
    pub face: Vec<u32>,
    /// Perspective-correct barycentric weights of the face's three vertices.
    pub bary: Vec<[f64; 3]>,
}

#[inline]
fn edge(a: (i64, i64), b: (i64, i64), p: (i64, i64)) -> i64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

#[inline]
fn is_top_left(from: (i64, i64), to: (i64, i64)) -> bool {
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    (dy == 0 && dx > 0) || dy < 0
}

pub fn visibility(plant: &PlantModel, cam: &Camera) -> VisibilityBuffer {
    let (w, h) = (cam.width, cam.height);
    let n = (w * h) as usize;
    let mut vis = VisibilityBuffer {
        width: w,
        height: h,
        depth: vec![f64::INFINITY; n],
        leaf: vec![0; n],
        face: vec![0; n],
        bary: vec![[0.0; 3]; n],
    };
    let basis = cam.basis();
    for (li, leaf) in plant.leaves.iter().enumerate() {
        let projected: Vec<Option<((i64, i64), f64)>> = leaf
            .mesh
            .vertices
            .iter()
            .map(|v| {
                basis.project(v, w, h).and_then(|(sx, sy, d)| {
                    let inside_guard = sx.abs() < GUARD_BAND && sy.abs() < GUARD_BAND;
                    inside_guard.then(|| (((sx * SUBPIXEL).round() as i64, (sy * SUBPIXEL).round() as i64), d))
                })
            })
            .collect();
        for (fi, face) in leaf.mesh.faces.iter().enumerate() {
            let (Some(a), Some(b), Some(c)) =
                (projected[face[0] as usize], projected[face[1] as usize], projected[face[2] as usize])
            else {
                continue;
            };
            raster_triangle(&mut vis, [a, b, c], (li + 1) as u16, fi as u32);
        }
    }
    vis
}

fn raster_triangle(vis: &mut VisibilityBuffer, verts: [((i64, i64), f64); 3], leaf: u16, face: u32) {
    // slots[k] is the original vertex index at position k
    let mut slots = [0usize, 1, 2];
    let mut area = edge(verts[0].0, verts[1].0, verts[2].0);
    if area == 0 {
        return;
    }
    if area < 0 {
        slots.swap(1, 2);
        area = -area;
    }
    let [p0, p1, p2] = slots.map(|s| verts[s].0);
    let [d0, d1, d2] = slots.map(|s| verts[s].1);
    let (w, h) = (vis.width as i64, vis.height as i64);
    let min_x = ((p0.0.min(p1.0).min(p2.0) - HALF) as f64 / SUBPIXEL).floor().max(0.0) as i64;
    let max_x = ((p0.0.max(p1.0).max(p2.0) - HALF) as f64 / SUBPIXEL).ceil().min((w - 1) as f64) as i64;
    let min_y = ((p0.1.min(p1.1).min(p2.1) - HALF) as f64 / SUBPIXEL).floor().max(0.0) as i64;
    let max_y = ((p0.1.max(p1.1).max(p2.1) - HALF) as f64 / SUBPIXEL).ceil().min((h - 1) as f64) as i64;
    if min_x > max_x || min_y > max_y {
        return;
    }
    let tl0 = is_top_left(p1, p2);
    let tl1 = is_top_left(p2, p0);
    let tl2 = is_top_left(p0, p1);
    let inv_area = 1.0 / area as f64;
    for py in min_y..=max_y {
        let cy = py * SUBPIXEL as i64 + HALF;
        for px in min_x..=max_x {
            let p = (px * SUBPIXEL as i64 + HALF, cy);
            let e0 = edge(p1, p2, p);
            let e1 = edge(p2, p0, p);
            let e2 = edge(p0, p1, p);
            let inside = (e0 > 0 || (e0 == 0 && tl0)) && (e1 > 0 || (e1 == 0 && tl1)) && (e2 > 0 || (e2 == 0 && tl2));
            if !inside {
                continue;
            }
            let l = [e0 as f64 * inv_area, e1 as f64 * inv_area, e2 as f64 * inv_area];
            let q = [l[0] / d0, l[1] / d1, l[2] / d2];
            let inv_depth = q[0] + q[1] + q[2];
            let depth = 1.0 / inv_depth;
            let idx = (py * w + px) as usize;
            if depth < vis.depth[idx] {
                vis.depth[idx] = depth;
                vis.leaf[idx] = leaf;
                vis.face[idx] = face;
                let mut bary = [0.0; 3];
                for k in 0..3 {
                    bary[slots[k]] = q[k] / inv_depth;
                }
                vis.bary[idx] = bary;
            }
        }
    }
}

/// Bilinear, clamp-to-edge texel fetch; `v` grows upward. Channels in `[0, 1]`.
fn fetch_texel(tex: &TextureImage, u: f64, v: f64) -> [f64; 3] {
    let (w, h) = (tex.width() as f64, tex.height() as f64);
    let x = (u * w - 0.5).clamp(0.0, w - 1.0);
    let y = ((1.0 - v) * h - 0.5).clamp(0.0, h - 1.0);
    let (x0, y0) = (x.floor() as u32, y.floor() as u32);
    let (x1, y1) = ((x0 + 1).min(tex.width() - 1), (y0 + 1).min(tex.height() - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let at = |xx, yy| tex.pixels.get_pixel(xx, yy).0;
    let (a, b, c, d) = (at(x0, y0), at(x1, y0), at(x0, y1), at(x1, y1));
    let mut out = [0.0; 3];
    for k in 0..3 {
        let top = a[k] as f64 * (1.0 - fx) + b[k] as f64 * fx;
        let bot = c[k] as f64 * (1.0 - fx) + d[k] as f64 * fx;
        out[k] = (top * (1.0 - fy) + bot * fy) / 255.0;
    }
    out
}

/// Colour pass from an existing visibility buffer. `textures[i]` belongs to
/// `plant.leaves[i]`.
pub fn shade(
    vis: &VisibilityBuffer,
    plant: &PlantModel,
    textures: &[TextureImage],
    cam: &Camera,
    light: &Light,
    shading: ShadingModel,
) -> FrameBuffer {
    assert_eq!(textures.len(), plant.leaves.len(), "one texture per leaf");
    let n = vis.leaf.len();
    let mut fb = FrameBuffer {
        width: vis.width,
        height: vis.height,
        color: vec![[0; 3]; n],
        alpha: vec![0; n],
        depth: vis.depth.clone(),
    };
    for idx in 0..n {
        let leaf_slot = vis.leaf[idx];
        if leaf_slot == 0 {
            continue;
        }
        let li = leaf_slot as usize - 1;
        let mesh = &plant.leaves[li].mesh;
        let face = mesh.faces[vis.face[idx] as usize].map(|i| i as usize);
        let b = vis.bary[idx];
        let p = mesh.vertices[face[0]] * b[0] + mesh.vertices[face[1]] * b[1] + mesh.vertices[face[2]] * b[2];
        let mut normal =
            (mesh.normals[face[0]] * b[0] + mesh.normals[face[1]] * b[1] + mesh.normals[face[2]] * b[2]).normalize();
        let to_eye = (cam.position - p).normalize();
        // two-sided: light the side facing the camera
        if normal.dot(&to_eye) < 0.0 {
            normal = -normal;
        }
        let to_light = (light.position - p).normalize();
        let factor = shading.reflectance(&normal, &to_light, &to_eye);
        let u = mesh.uvs[face[0]][0] * b[0] + mesh.uvs[face[1]][0] * b[1] + mesh.uvs[face[2]][0] * b[2];
        let v = mesh.uvs[face[0]][1] * b[0] + mesh.uvs[face[1]][1] * b[1] + mesh.uvs[face[2]][1] * b[2];
        let albedo = fetch_texel(&textures[li], u, v);
        let mut rgb = [0u8; 3];
        for k in 0..3 {
            rgb[k] = (albedo[k] * light.intensity[k] * factor * 255.0).round().clamp(0.0, 255.0) as u8;
        }
        fb.color[idx] = rgb;
        fb.alpha[idx] = 1;
    }
    fb
}

pub fn labels_from_visibility(vis: &VisibilityBuffer, plant: &PlantModel) -> LabelMap {
    let labels = vis
        .leaf
        .iter()
        .map(|&slot| if slot == 0 { 0 } else { plant.leaves[slot as usize - 1].instance_id })
        .collect();
    LabelMap::from_vec(vis.width, vis.height, labels)
}

pub fn rasterize_rgb(
    plant: &PlantModel,
    textures: &[TextureImage],
    cam: &Camera,
    light: &Light,
    shading: ShadingModel,
) -> FrameBuffer {
    shade(&visibility(plant, cam), plant, textures, cam, light, shading)
}

/// Unshaded, single-sample instance labels.
pub fn rasterize_labels(plant: &PlantModel, cam: &Camera) -> LabelMap {
    labels_from_visibility(&visibility(plant, cam), plant)
}

/// Both passes over one shared visibility resolve.
pub fn render_passes(
    plant: &PlantModel,
    textures: &[TextureImage],
    cam: &Camera,
    light: &Light,
    shading: ShadingModel,
) -> (FrameBuffer, LabelMap) {
    let vis = visibility(plant, cam);
    let fb = shade(&vis, plant, textures, cam, light, shading);
    (fb, labels_from_visibility(&vis, plant))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriangleMesh;
    use crate::plant::LeafInstance;
    use crate::leaf::LeafDeformParams;
    use image::{Rgb, RgbImage};

    fn quad(x0: f64, y0: f64, x1: f64, y1: f64, z: f64) -> TriangleMesh {
        TriangleMesh::new(
            vec![Vec3::new(x0, y0, z), Vec3::new(x1, y0, z), Vec3::new(x1, y1, z), Vec3::new(x0, y1, z)],
            vec![[0, 1, 2], [0, 2, 3]],
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        )
        .unwrap()
    }

    fn plant_of(meshes: Vec<TriangleMesh>) -> PlantModel {
        let leaves = meshes
            .into_iter()
            .enumerate()
            .map(|(i, mesh)| LeafInstance {
                instance_id: i as u16 + 1,
                mesh,
                params: LeafDeformParams::identity(),
                texture_ref: String::new(),
            })
            .collect();
        PlantModel { leaves, sphere_radius: 0.0, centroid: Vec3::zeros() }
    }

    #[test]
    fn shared_edges_are_watertight() {
        // a quad split along its diagonal covers each pixel exactly once
        let plant = plant_of(vec![quad(-0.7, -0.6, 0.65, 0.55, 0.0)]);
        let cam = Camera::nadir(Vec3::zeros(), 3.0, 0.9, 64, 64);
        let vis = visibility(&plant, &cam);
        let covered = vis.leaf.iter().filter(|&&l| l != 0).count();
        // no holes along the diagonal: every row's covered span is contiguous
        for row in 0..64 {
            let cols: Vec<usize> = (0..64).filter(|&c| vis.leaf[row * 64 + c] != 0).collect();
            if let (Some(a), Some(b)) = (cols.first(), cols.last()) {
                assert_eq!(cols.len(), b - a + 1, "row {row}");
            }
        }
        assert!(covered > 0);
    }

    #[test]
    fn empty_scene_has_no_labels() {
        let plant = plant_of(vec![quad(10.0, 10.0, 11.0, 11.0, 0.0)]);
        let cam = Camera::nadir(Vec3::zeros(), 3.0, 0.9, 32, 32);
        assert!(rasterize_labels(&plant, &cam).labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn alpha_matches_label_support() {
        let plant = plant_of(vec![quad(-0.5, -0.5, 0.2, 0.3, 0.1), quad(-0.1, -0.2, 0.6, 0.6, 0.0)]);
        let tex = TextureImage::new("w", RgbImage::from_pixel(8, 8, Rgb([200, 200, 200]))).unwrap();
        let cam = Camera::nadir(Vec3::zeros(), 3.0, 0.9, 48, 40);
        let light = Light { position: Vec3::new(0.0, 0.0, 10.0), intensity: [1.0; 3] };
        let (fb, labels) = render_passes(&plant, &[tex.clone(), tex], &cam, &light, ShadingModel::Lambertian);
        for (a, l) in fb.alpha.iter().zip(&labels.labels) {
            assert_eq!(*a == 1, *l > 0);
        }
    }
}
