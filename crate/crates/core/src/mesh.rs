//! Triangle meshes and the plain-text mesh format.
//!
//! Format, one record per line, `#` starts a comment:
//!
//! ```text
//! v x y z        vertex position
//! vt u v         texture coordinate of the vertex with the same ordinal
//! vn x y z       optional vertex normal (recomputed when absent)
//! f i j k        triangle, 1-based vertex indices, counter-clockwise seen from +z
//! o name         ignored (object markers in scene dumps)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("cannot read mesh {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mesh has no faces")]
    Empty,
    #[error("face {face} references vertex {index}, but the mesh has {count} vertices")]
    IndexOutOfRange { face: usize, index: usize, count: usize },
    #[error("face {face} has zero area")]
    DegenerateFace { face: usize },
    #[error("{uvs} texture coordinates for {vertices} vertices")]
    UvCountMismatch { uvs: usize, vertices: usize },
    #[error("texture coordinate {index} lies outside [0, 1]^2")]
    UvOutOfRange { index: usize },
    #[error("vertex {index} has a non-unit normal")]
    BadNormal { index: usize },
    #[error("mesh is not a single connected piece")]
    Disconnected,
    #[error("face {face} winds against its vertex normals")]
    InconsistentWinding { face: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    pub uvs: Vec<[f64; 2]>,
    pub normals: Vec<Vec3>,
}

impl TriangleMesh {
    /// Builds a mesh and computes area-weighted vertex normals.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>, uvs: Vec<[f64; 2]>) -> Result<Self, MeshError> {
        let mut mesh = Self { normals: vec![Vec3::zeros(); vertices.len()], vertices, faces, uvs };
        mesh.check_indices()?;
        mesh.recompute_normals();
        mesh.validate()?;
        Ok(mesh)
    }

    fn check_indices(&self) -> Result<(), MeshError> {
        if self.faces.is_empty() {
            return Err(MeshError::Empty);
        }
        if self.uvs.len() != self.vertices.len() {
            return Err(MeshError::UvCountMismatch { uvs: self.uvs.len(), vertices: self.vertices.len() });
        }
        let count = self.vertices.len();
        for (fi, face) in self.faces.iter().enumerate() {
            if let Some(&bad) = face.iter().find(|&&i| i as usize >= count) {
                return Err(MeshError::IndexOutOfRange { face: fi, index: bad as usize, count });
            }
        }
        Ok(())
    }

    pub fn face_normal_unnormalized(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.faces[face].map(|i| self.vertices[i as usize]);
        (b - a).cross(&(c - a))
    }

    /// Area-weighted average of incident face normals.
    pub fn recompute_normals(&mut self) {
        let mut acc = vec![Vec3::zeros(); self.vertices.len()];
        for fi in 0..self.faces.len() {
            let n = self.face_normal_unnormalized(fi);
            for &i in &self.faces[fi] {
                acc[i as usize] += n;
            }
        }
        for n in &mut acc {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        self.normals = acc;
    }

    /// Checks every structural invariant of a renderable leaf mesh.
    pub fn validate(&self) -> Result<(), MeshError> {
        self.check_indices()?;
        for fi in 0..self.faces.len() {
            if self.face_normal_unnormalized(fi).norm() <= 1e-14 {
                return Err(MeshError::DegenerateFace { face: fi });
            }
        }
        for (i, uv) in self.uvs.iter().enumerate() {
            if !(0.0..=1.0).contains(&uv[0]) || !(0.0..=1.0).contains(&uv[1]) {
                return Err(MeshError::UvOutOfRange { index: i });
            }
        }
        if self.normals.len() != self.vertices.len() {
            return Err(MeshError::BadNormal { index: self.normals.len().min(self.vertices.len()) });
        }
        for (i, n) in self.normals.iter().enumerate() {
            if (n.norm() - 1.0).abs() > 1e-6 {
                return Err(MeshError::BadNormal { index: i });
            }
        }
        if !self.is_connected() {
            return Err(MeshError::Disconnected);
        }
        for fi in 0..self.faces.len() {
            let n = self.face_normal_unnormalized(fi);
            if self.faces[fi].iter().any(|&i| n.dot(&self.normals[i as usize]) <= 0.0) {
                return Err(MeshError::InconsistentWinding { face: fi });
            }
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut used = vec![false; n];
        for face in &self.faces {
            let [a, b, c] = face.map(|i| i as usize);
            used[a] = true;
            used[b] = true;
            used[c] = true;
            for (x, y) in [(a, b), (b, c)] {
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                parent[rx] = ry;
            }
        }
        if used.iter().any(|u| !u) {
            return false;
        }
        let root = find(&mut parent, 0);
        (1..n).all(|i| find(&mut parent, i) == root)
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    pub fn parse(text: &str) -> Result<Self, MeshError> {
        let mut vertices = Vec::new();
        let mut uvs = Vec::new();
        let mut normals = Vec::new();
        let mut faces = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let tag = parts.next().unwrap_or_default();
            let rest: Vec<&str> = parts.collect();
            let err = |message: String| MeshError::Parse { line: line_no, message };
            let floats = |want: usize| -> Result<Vec<f64>, MeshError> {
                if rest.len() != want {
                    return Err(err(format!("`{tag}` expects {want} values, got {}", rest.len())));
                }
                rest.iter()
                    .map(|s| {
                        s.parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| err(format!("bad number `{s}`")))
                    })
                    .collect()
            };
            match tag {
                "v" => {
                    let f = floats(3)?;
                    vertices.push(Vec3::new(f[0], f[1], f[2]));
                }
                "vt" => {
                    let f = floats(2)?;
                    uvs.push([f[0], f[1]]);
                }
                "vn" => {
                    let f = floats(3)?;
                    normals.push(Vec3::new(f[0], f[1], f[2]));
                }
                "f" => {
                    if rest.len() != 3 {
                        return Err(err(format!("faces must be triangles, got {} indices", rest.len())));
                    }
                    let mut face = [0u32; 3];
                    for (slot, s) in face.iter_mut().zip(&rest) {
                        let idx: u32 = s.parse().map_err(|_| err(format!("bad index `{s}`")))?;
                        if idx == 0 {
                            return Err(err("indices are 1-based".into()));
                        }
                        *slot = idx - 1;
                    }
                    faces.push(face);
                }
                "o" => {}
                other => return Err(err(format!("unknown record `{other}`"))),
            }
        }
        let given_normals = !normals.is_empty();
        let mut mesh = Self { normals: vec![Vec3::zeros(); vertices.len()], vertices, faces, uvs };
        mesh.check_indices()?;
        if given_normals && normals.len() == mesh.vertices.len() {
            mesh.normals = normals;
        } else {
            mesh.recompute_normals();
        }
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out);
        out
    }

    /// Appends `v`/`vt`/`f` records. `index_offset` shifts face indices so
    /// several meshes can share one file.
    pub fn write_records(&self, out: &mut String, index_offset: usize) {
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for uv in &self.uvs {
            let _ = writeln!(out, "vt {} {}", uv[0], uv[1]);
        }
        for f in &self.faces {
            let [a, b, c] = f.map(|i| i as usize + 1 + index_offset);
            let _ = writeln!(out, "f {a} {b} {c}");
        }
    }

    fn write_text(&self, out: &mut String) {
        self.write_records(out, 0);
    }
}

pub fn load_leaf_template(path: &Path) -> Result<TriangleMesh, MeshError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| MeshError::Io { path: path.display().to_string(), source })?;
    TriangleMesh::parse(&text)
}

/// The bundled inspiration leaf: petiole base at the origin, blade along +x
/// in the xy plane, upper surface facing +z, blade length 1.
pub const BUNDLED_TEMPLATE: &str = include_str!("../assets/arabidopsis_leaf.mesh");

pub fn bundled_template() -> TriangleMesh {
    TriangleMesh::parse(BUNDLED_TEMPLATE).expect("bundled leaf template is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "\
# unit square
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
vt 0 0
vt 1 0
vt 1 1
vt 0 1
f 1 2 3
f 1 3 4
";

    #[test]
    fn parses_and_recomputes_normals() {
        let m = TriangleMesh::parse(SQUARE).unwrap();
        assert_eq!(m.faces.len(), 2);
        for n in &m.normals {
            assert!((n - Vec3::z()).norm() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let bad = SQUARE.replace("f 1 3 4", "f 1 3 9");
        assert!(matches!(TriangleMesh::parse(&bad), Err(MeshError::IndexOutOfRange { index: 8, .. })));
    }

    #[test]
    fn degenerate_face_is_rejected() {
        let bad = SQUARE.replace("f 1 3 4", "f 1 3 4\nf 1 1 2");
        assert!(matches!(TriangleMesh::parse(&bad), Err(MeshError::DegenerateFace { face: 2 })));
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let bad = SQUARE.replace("v 1 1 0", "v 1 one 0");
        assert!(matches!(TriangleMesh::parse(&bad), Err(MeshError::Parse { line: 4, .. })));
        assert!(matches!(TriangleMesh::parse("v 0 0 0\n"), Err(MeshError::Empty)));
    }

    #[test]
    fn flipped_face_breaks_winding() {
        let bad = SQUARE.replace("f 1 3 4", "f 1 4 3");
        assert!(TriangleMesh::parse(&bad).is_err());
    }

    #[test]
    fn bundled_template_is_valid_and_stable() {
        let a = bundled_template();
        let b = bundled_template();
        assert_eq!(a, b);
        let (lo, hi) = a.bounds();
        assert!(lo.x.abs() < 1e-9 && (hi.x - 1.0).abs() < 1e-9, "blade spans x in [0, 1]");
        assert!(lo.y < -0.1 && hi.y > 0.1);
        // UVs span the silhouette
        let umin = a.uvs.iter().map(|t| t[0]).fold(1.0, f64::min);
        let umax = a.uvs.iter().map(|t| t[0]).fold(0.0, f64::max);
        let vmin = a.uvs.iter().map(|t| t[1]).fold(1.0, f64::min);
        let vmax = a.uvs.iter().map(|t| t[1]).fold(0.0, f64::max);
        assert!(umin < 0.01 && umax > 0.99 && vmin < 0.05 && vmax > 0.95);
        for n in &a.normals {
            assert!(n.z > 0.0, "upper surface faces +z");
        }
    }

    #[test]
    fn text_round_trip() {
        let m = bundled_template();
        let back = TriangleMesh::parse(&m.to_text()).unwrap();
        assert_eq!(back.faces, m.faces);
        assert_eq!(back.vertices, m.vertices);
    }
}
