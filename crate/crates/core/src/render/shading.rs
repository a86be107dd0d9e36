use serde::{Deserialize, Serialize};

use crate::mesh::Vec3;

/// Diffuse reflection model of the colour pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ShadingModel {
    Lambertian,
    /// `roughness` is the standard deviation (radians) of the facet slope distribution.
    OrenNayar { roughness: f64 },
}

impl ShadingModel {
    /// Oren-Nayar `(A, B)` coefficients; `(1, 0)` for Lambertian.
    pub fn coefficients(&self) -> (f64, f64) {
        match *self {
            ShadingModel::Lambertian => (1.0, 0.0),
            ShadingModel::OrenNayar { roughness } => {
                let s2 = roughness * roughness;
                (1.0 - 0.5 * s2 / (s2 + 0.33), 0.45 * s2 / (s2 + 0.09))
            }
        }
    }

    /// Outgoing radiance per unit albedo and light intensity for unit vectors
    /// `normal`, `to_light` and `to_eye`. Capped at 1 so no pixel exceeds
    /// albedo times intensity.
    pub fn reflectance(&self, normal: &Vec3, to_light: &Vec3, to_eye: &Vec3) -> f64 {
        let cos_i = normal.dot(to_light);
        if cos_i <= 0.0 {
            return 0.0;
        }
        let (a, b) = self.coefficients();
        if b == 0.0 {
            return cos_i * a;
        }
        let cos_o = normal.dot(to_eye).clamp(-1.0, 1.0);
        let theta_i = cos_i.min(1.0).acos();
        let theta_o = cos_o.acos();
        let light_t = to_light - normal * cos_i;
        let eye_t = to_eye - normal * cos_o;
        let (li, lo) = (light_t.norm(), eye_t.norm());
        let cos_phi = if li > 1e-9 && lo > 1e-9 { (light_t.dot(&eye_t) / (li * lo)).max(0.0) } else { 0.0 };
        let alpha = theta_i.max(theta_o);
        let beta = theta_i.min(theta_o);
        (cos_i * (a + b * cos_phi * alpha.sin() * beta.tan())).min(1.0)
    }
}
