//! Per-leaf deformation and pose.
//!
//! A template leaf lies with its petiole base at the origin and its blade
//! along +x. [`deform_leaf`] scales and bends it in model space;
//! [`leaf_local_to_world`] rotates it (roll about x, then pitch about y, then
//! yaw about z, all about fixed world axes, i.e. `R = Rz(yaw) Ry(pitch) Rx(roll)`)
//! and moves the petiole base to its anchor on the placement sphere.

use nalgebra::{Matrix3, Rotation3};
use serde::{Deserialize, Serialize};

use crate::mesh::{TriangleMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafDeformParams {
    pub scale_x: f64,
    pub scale_y: f64,
    pub scale_z: f64,
    /// Total curl angle along the midrib, radians. Positive curls the tip toward +z.
    pub bend_curl: f64,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub anchor: [f64; 3],
}

impl LeafDeformParams {
    pub fn identity() -> Self {
        Self {
            scale_x: 1.0,
            scale_y: 1.0,
            scale_z: 1.0,
            bend_curl: 0.0,
            yaw: 0.0,
            pitch: 0.0,
            roll: 0.0,
            anchor: [0.0; 3],
        }
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        let rx = Rotation3::from_axis_angle(&Vec3::x_axis(), self.roll);
        let ry = Rotation3::from_axis_angle(&Vec3::y_axis(), self.pitch);
        let rz = Rotation3::from_axis_angle(&Vec3::z_axis(), self.yaw);
        (rz * ry * rx).into_inner()
    }
}

/// Scales by `diag(scale_x, scale_y, scale_z)`, then bends the leaf around a
/// lateral (y-parallel) axis: a point at midrib coordinate `x` is rotated by
/// `bend_curl * x / length`, which maps the flat midrib onto a circular arc
/// of the same length. Normals are recomputed; UVs are untouched.
pub fn deform_leaf(template: &TriangleMesh, params: &LeafDeformParams) -> TriangleMesh {
    let scale = Vec3::new(params.scale_x, params.scale_y, params.scale_z);
    let mut vertices: Vec<Vec3> = template.vertices.iter().map(|v| v.component_mul(&scale)).collect();

    let length = vertices.iter().map(|v| v.x).fold(0.0, f64::max);
    if params.bend_curl != 0.0 && length > 0.0 {
        let curvature = params.bend_curl / length;
        let radius = 1.0 / curvature;
        for v in &mut vertices {
            let theta = curvature * v.x;
            let (s, c) = theta.sin_cos();
            // centre of curvature sits at (0, y, radius)
            let r = radius - v.z;
            *v = Vec3::new(r * s, v.y, radius - r * c);
        }
    }

    let mut out = TriangleMesh {
        vertices,
        faces: template.faces.clone(),
        uvs: template.uvs.clone(),
        normals: Vec::new(),
    };
    out.recompute_normals();
    out
}

/// Applies the fixed roll -> pitch -> yaw rotation and translates the petiole base
/// to the anchor. Normals are rotated with the vertices.
pub fn leaf_local_to_world(mesh: &TriangleMesh, params: &LeafDeformParams) -> TriangleMesh {
    let rot = params.rotation();
    let anchor = Vec3::from(params.anchor);
    TriangleMesh {
        vertices: mesh.vertices.iter().map(|v| rot * v + anchor).collect(),
        faces: mesh.faces.clone(),
        uvs: mesh.uvs.clone(),
        normals: mesh.normals.iter().map(|n| rot * n).collect(),
    }
}
