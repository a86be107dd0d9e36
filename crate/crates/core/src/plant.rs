//! Rosette assembly: leaves stemming out from a small sphere.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use crate::config::GenerationConfig;
use crate::leaf::{deform_leaf, leaf_local_to_world, LeafDeformParams};
use crate::mesh::{TriangleMesh, Vec3};
use crate::rng::RandomSource;

#[derive(Debug, Clone, PartialEq)]
pub struct LeafInstance {
    /// 1-based, dense, in generation order.
    pub instance_id: u16,
    /// World-space geometry.
    pub mesh: TriangleMesh,
    pub params: LeafDeformParams,
    /// Texture identifier, filled in by the texture policy.
    pub texture_ref: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    pub leaves: Vec<LeafInstance>,
    pub sphere_radius: f64,
    /// Mean of all leaf vertices.
    pub centroid: Vec3,
}

pub fn blade_length(template: &TriangleMesh) -> f64 {
    let (lo, hi) = template.bounds();
    hi.x - lo.x
}

/// Truncated-normal leaf count, rounded to the nearest integer.
pub fn sample_leaf_count(src: &mut RandomSource, cfg: &GenerationConfig) -> u32 {
    let (lo, hi) = (cfg.leaf_count_min as f64, cfg.leaf_count_max as f64);
    let x = src
        .sample_normal(cfg.leaf_count_mean, cfg.leaf_count_stddev, lo, hi)
        .unwrap_or(cfg.leaf_count_mean);
    (x.round() as u32).clamp(cfg.leaf_count_min, cfg.leaf_count_max)
}

/// Draw order per leaf is fixed: yaw, pitch, roll, scale x/y/z, bend, polar offset.
pub fn sample_leaf_pose(src: &mut RandomSource, cfg: &GenerationConfig, sphere_radius: f64) -> LeafDeformParams {
    let yaw = src.uniform(cfg.yaw_range);
    let pitch = src.uniform(cfg.pitch_range);
    let roll = src.uniform(cfg.roll_range);
    let scale_x = src.uniform(cfg.scale_range_x);
    let scale_y = src.uniform(cfg.scale_range_y);
    let scale_z = src.uniform(cfg.scale_range_z);
    let bend_curl = src.uniform(cfg.bend_range);
    let offset = (cfg.polar_sigma * src.standard_normal()).clamp(-cfg.polar_clamp, cfg.polar_clamp);
    let polar = FRAC_PI_2 + offset;
    let anchor = [
        sphere_radius * polar.sin() * yaw.cos(),
        sphere_radius * polar.sin() * yaw.sin(),
        sphere_radius * polar.cos(),
    ];
    LeafDeformParams { scale_x, scale_y, scale_z, bend_curl, yaw, pitch, roll, anchor }
}

pub fn assemble_plant(src: &mut RandomSource, cfg: &GenerationConfig, template: &TriangleMesh) -> PlantModel {
    let count = sample_leaf_count(src, cfg);
    assemble_plant_with_count(src, cfg, template, count)
}

/// Builds a plant with a fixed number of leaves. Leaves may interpenetrate.
pub fn assemble_plant_with_count(
    src: &mut RandomSource,
    cfg: &GenerationConfig,
    template: &TriangleMesh,
    count: u32,
) -> PlantModel {
    assert!(count >= 1 && count <= u16::MAX as u32, "leaf count out of range");
    let sphere_radius = cfg.sphere_radius_factor * blade_length(template);
    let leaves: Vec<LeafInstance> = (1..=count as u16)
        .map(|instance_id| {
            let params = sample_leaf_pose(src, cfg, sphere_radius);
            let mesh = leaf_local_to_world(&deform_leaf(template, &params), &params);
            LeafInstance { instance_id, mesh, params, texture_ref: String::new() }
        })
        .collect();
    let (sum, n) = leaves
        .iter()
        .flat_map(|l| l.mesh.vertices.iter())
        .fold((Vec3::zeros(), 0usize), |(s, n), v| (s + v, n + 1));
    PlantModel { leaves, sphere_radius, centroid: sum / n as f64 }
}

impl PlantModel {
    pub fn bounds(&self) -> (Vec3, Vec3) {
        self.leaves.iter().map(|l| l.mesh.bounds()).fold(
            (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
            |(lo, hi), (a, b)| (lo.inf(&a), hi.sup(&b)),
        )
    }

    /// Text scene dump: a header, one `leaf` parameter line per leaf, then
    /// each leaf's world mesh as an `o leaf_<id>` block of mesh records.
    pub fn dump_scene(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# leafsynth scene v1");
        let _ = writeln!(out, "# columns: leaf id texture yaw pitch roll scale_x scale_y scale_z bend anchor_x anchor_y anchor_z");
        let _ = writeln!(out, "# sphere_radius {}", self.sphere_radius);
        let c = self.centroid;
        let _ = writeln!(out, "# centroid {} {} {}", c.x, c.y, c.z);
        for leaf in &self.leaves {
            let p = &leaf.params;
            let _ = writeln!(
                out,
                "# leaf {} {} {} {} {} {} {} {} {} {} {} {}",
                leaf.instance_id,
                if leaf.texture_ref.is_empty() { "-" } else { &leaf.texture_ref },
                p.yaw,
                p.pitch,
                p.roll,
                p.scale_x,
                p.scale_y,
                p.scale_z,
                p.bend_curl,
                p.anchor[0],
                p.anchor[1],
                p.anchor[2]
            );
        }
        let mut offset = 0;
        for leaf in &self.leaves {
            let _ = writeln!(out, "o leaf_{}", leaf.instance_id);
            leaf.mesh.write_records(&mut out, offset);
            offset += leaf.mesh.vertices.len();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::bundled_template;
    use crate::rng::Purpose;

    fn src(i: u64) -> RandomSource {
        RandomSource::new(17, i, Purpose::LeafPose)
    }

    #[test]
    fn zero_stddev_gives_mean() {
        let cfg = GenerationConfig { leaf_count_stddev: 0.0, ..Default::default() };
        let mut s = src(0);
        for _ in 0..100 {
            assert_eq!(sample_leaf_count(&mut s, &cfg), 9);
        }
    }

    #[test]
    fn counts_respect_clamp() {
        let cfg = GenerationConfig { leaf_count_mean: 2.0, leaf_count_stddev: 6.0, ..Default::default() };
        let mut s = src(1);
        for _ in 0..10_000 {
            let n = sample_leaf_count(&mut s, &cfg);
            assert!((1..=25).contains(&n));
        }
    }

    #[test]
    fn collapsed_ranges_repeat_params() {
        let cfg = GenerationConfig {
            yaw_range: [1.0, 1.0],
            pitch_range: [0.1, 0.1],
            roll_range: [0.2, 0.2],
            scale_range_x: [1.1, 1.1],
            scale_range_y: [0.9, 0.9],
            scale_range_z: [1.0, 1.0],
            bend_range: [0.3, 0.3],
            polar_sigma: 0.0,
            ..Default::default()
        };
        let mut s = src(2);
        let first = sample_leaf_pose(&mut s, &cfg, 0.15);
        for _ in 0..50 {
            assert_eq!(sample_leaf_pose(&mut s, &cfg, 0.15), first);
        }
    }

    #[test]
    fn forced_counts_give_dense_ids_and_anchors_on_sphere() {
        let cfg = GenerationConfig::default();
        let t = bundled_template();
        let one = assemble_plant_with_count(&mut src(3), &cfg, &t, 1);
        assert_eq!(one.leaves.len(), 1);
        assert_eq!(one.leaves[0].instance_id, 1);
        let many = assemble_plant_with_count(&mut src(4), &cfg, &t, 12);
        let ids: Vec<u16> = many.leaves.iter().map(|l| l.instance_id).collect();
        assert_eq!(ids, (1..=12).collect::<Vec<_>>());
        for leaf in &many.leaves {
            let a = Vec3::from(leaf.params.anchor);
            assert!((a.norm() - many.sphere_radius).abs() < 1e-6);
        }
    }

    #[test]
    fn same_stream_same_plant() {
        let cfg = GenerationConfig::default();
        let t = bundled_template();
        let a = assemble_plant(&mut src(5), &cfg, &t);
        let b = assemble_plant(&mut src(5), &cfg, &t);
        assert_eq!(a, b);
    }

    #[test]
    fn scene_dump_lists_every_leaf() {
        let cfg = GenerationConfig::default();
        let t = bundled_template();
        let p = assemble_plant_with_count(&mut src(6), &cfg, &t, 3);
        let dump = p.dump_scene();
        assert_eq!(dump.lines().filter(|l| l.starts_with("# leaf ")).count(), 3);
        assert_eq!(dump.lines().filter(|l| l.starts_with("o leaf_")).count(), 3);
        // the mesh part parses as one (disconnected) mesh file
        let faces = dump.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(faces, 3 * t.faces.len());
    }
}
