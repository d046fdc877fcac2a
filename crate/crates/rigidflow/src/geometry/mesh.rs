//! Triangulated closed surfaces: parsing, watertightness checks, and exact
//! polyhedral mass properties via the divergence theorem.
//!
//! File format: plain text, one triangle per line as nine whitespace-separated
//! floating-point numbers (the three vertices), `#` starts a comment line.

use nalgebra::{Matrix3, Vector3};
use std::collections::HashMap;
use std::path::Path;

use super::GeometryError;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub triangles: Vec<[Vector3<f64>; 3]>,
}

impl TriMesh {
    pub fn new(triangles: Vec<[Vector3<f64>; 3]>) -> Self {
        Self { triangles }
    }

    pub fn from_text(text: &str) -> Result<Self, GeometryError> {
        let mut triangles = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let nums: Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            let nums = nums.map_err(|e| {
                GeometryError::MeshParse(format!("line {}: {e}", lineno + 1))
            })?;
            if nums.len() != 9 {
                return Err(GeometryError::MeshParse(format!(
                    "line {}: expected 9 numbers, found {}",
                    lineno + 1,
                    nums.len()
                )));
            }
            triangles.push([
                Vector3::new(nums[0], nums[1], nums[2]),
                Vector3::new(nums[3], nums[4], nums[5]),
                Vector3::new(nums[6], nums[7], nums[8]),
            ]);
        }
        if triangles.is_empty() {
            return Err(GeometryError::MeshParse("no triangles".into()));
        }
        Ok(Self::new(triangles))
    }

    pub fn from_file(path: &Path) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            GeometryError::MeshParse(format!("{}: {e}", path.display()))
        })?;
        Self::from_text(&text)
    }

    pub fn max_vertex_norm(&self) -> f64 {
        self.triangles
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn bounding_box(&self) -> (Vector3<f64>, Vector3<f64>) {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for v in self.triangles.iter().flatten() {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Every undirected edge must be shared by exactly two triangles that
    /// traverse it in opposite directions (closed, consistently oriented
    /// surface). Vertices are matched after quantizing coordinates.
    pub fn check_closed(&self) -> Result<(), GeometryError> {
        let scale = self.max_vertex_norm().max(1e-30);
        let eps = 1e-9 * scale;
        let key = |v: &Vector3<f64>| -> (i64, i64, i64) {
            (
                (v.x / eps).round() as i64,
                (v.y / eps).round() as i64,
                (v.z / eps).round() as i64,
            )
        };
        // net directed count per undirected edge: +1 forward, -1 backward
        let mut edges: HashMap<((i64, i64, i64), (i64, i64, i64)), (i64, i64)> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let a = key(&tri[e]);
                let b = key(&tri[(e + 1) % 3]);
                if a == b {
                    return Err(GeometryError::OpenMesh("degenerate edge".into()));
                }
                let (k, dir) = if a < b { ((a, b), 1) } else { ((b, a), -1) };
                let ent = edges.entry(k).or_insert((0, 0));
                ent.0 += 1; // total uses
                ent.1 += dir; // orientation balance
            }
        }
        for (total, balance) in edges.values() {
            if *total != 2 {
                return Err(GeometryError::OpenMesh(format!(
                    "edge used {total} times (expected 2)"
                )));
            }
            if *balance != 0 {
                return Err(GeometryError::OpenMesh(
                    "inconsistently oriented edge".into(),
                ));
            }
        }
        Ok(())
    }

    /// Signed volume, `det(a,b,c)/6` summed over origin tetrahedra.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| t[0].dot(&t[1].cross(&t[2])) / 6.0)
            .sum()
    }

    pub fn centroid(&self) -> Vector3<f64> {
        let mut num = Vector3::zeros();
        let mut vol = 0.0;
        for t in &self.triangles {
            let v = t[0].dot(&t[1].cross(&t[2])) / 6.0;
            num += (t[0] + t[1] + t[2]) * (v / 4.0);
            vol += v;
        }
        num / vol
    }

    pub fn translate(&mut self, d: Vector3<f64>) {
        for t in &mut self.triangles {
            for v in t.iter_mut() {
                *v += d;
            }
        }
    }

    pub fn flip_orientation(&mut self) {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
    }

    /// Rigid rotation about the origin (used by tests and tools).
    pub fn rotate(&mut self, q: &Matrix3<f64>) {
        for t in &mut self.triangles {
            for v in t.iter_mut() {
                *v = q * *v;
            }
        }
    }

    /// Inertia tensor about the origin for a homogeneous interior of density
    /// `rho`, by summing the exact second-moment integral over the signed
    /// origin tetrahedra of each face.
    pub fn inertia_about_origin(&self, rho: f64) -> Matrix3<f64> {
        // Second moments of the canonical tetrahedron {y >= 0, y1+y2+y3 <= 1}:
        // diag 1/60, off-diagonal 1/120.
        let c0 = (Matrix3::repeat(1.0) + Matrix3::identity()) / 120.0;
        let mut c = Matrix3::zeros();
        for t in &self.triangles {
            let j = Matrix3::from_columns(&[t[0], t[1], t[2]]);
            let det = j.determinant();
            c += j * c0 * j.transpose() * det;
        }
        (Matrix3::identity() * c.trace() - c) * rho
    }

    /// Parity test along a +x ray. Sample points are expected to be nudged
    /// off edge projections by the caller for robustness.
    pub fn contains(&self, p: Vector3<f64>) -> bool {
        let mut crossings = 0u32;
        for t in &self.triangles {
            // 2D (y, z) point-in-triangle, then intersection x beyond p.x.
            let (a, b, c) = (t[0], t[1], t[2]);
            let d1 = edge_side(&a, &b, &p);
            let d2 = edge_side(&b, &c, &p);
            let d3 = edge_side(&c, &a, &p);
            let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
            let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
            if has_neg && has_pos {
                continue;
            }
            // Barycentric interpolation of the plane's x at (p.y, p.z).
            let denom = d1 + d2 + d3;
            if denom.abs() < 1e-300 {
                continue; // triangle degenerate in projection
            }
            let x = (d2 * a.x + d3 * b.x + d1 * c.x) / denom;
            if x > p.x {
                crossings += 1;
            }
        }
        crossings % 2 == 1
    }
}

/// Signed area of the (y, z)-projected triangle (a, b, p), twice.
#[inline]
fn edge_side(a: &Vector3<f64>, b: &Vector3<f64>, p: &Vector3<f64>) -> f64 {
    (b.y - a.y) * (p.z - a.z) - (b.z - a.z) * (p.y - a.y)
}

/// Axis-aligned box as a triangle list, outward-oriented. Used by tests and
/// the `mesh_body` example.
pub fn box_mesh(center: Vector3<f64>, half: Vector3<f64>) -> TriMesh {
    let v = |sx: f64, sy: f64, sz: f64| {
        center + Vector3::new(sx * half.x, sy * half.y, sz * half.z)
    };
    let corners = [
        v(-1.0, -1.0, -1.0), // 0
        v(1.0, -1.0, -1.0),  // 1
        v(1.0, 1.0, -1.0),   // 2
        v(-1.0, 1.0, -1.0),  // 3
        v(-1.0, -1.0, 1.0),  // 4
        v(1.0, -1.0, 1.0),   // 5
        v(1.0, 1.0, 1.0),    // 6
        v(-1.0, 1.0, 1.0),   // 7
    ];
    // Quads with outward normals, each split into two triangles.
    let quads = [
        [0usize, 3, 2, 1], // z = -1
        [4, 5, 6, 7],      // z = +1
        [0, 1, 5, 4],      // y = -1
        [2, 3, 7, 6],      // y = +1
        [0, 4, 7, 3],      // x = -1
        [1, 2, 6, 5],      // x = +1
    ];
    let mut tris = Vec::with_capacity(12);
    for q in quads {
        tris.push([corners[q[0]], corners[q[1]], corners[q[2]]]);
        tris.push([corners[q[0]], corners[q[2]], corners[q[3]]]);
    }
    TriMesh::new(tris)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_cube_volume_and_inertia() {
        let m = box_mesh(Vector3::zeros(), Vector3::repeat(0.5));
        m.check_closed().unwrap();
        assert_relative_eq!(m.signed_volume(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(m.centroid().norm(), 0.0, epsilon = 1e-12);
        // Solid cube of side s about its center: I = m s^2 / 6 per axis.
        let inertia = m.inertia_about_origin(2.0);
        let expect = Matrix3::identity() * (2.0 / 6.0);
        assert_relative_eq!(inertia, expect, epsilon = 1e-12);
    }

    #[test]
    fn open_mesh_rejected() {
        let mut m = box_mesh(Vector3::zeros(), Vector3::repeat(0.5));
        m.triangles.pop();
        assert!(m.check_closed().is_err());
    }

    #[test]
    fn inconsistent_orientation_rejected() {
        let mut m = box_mesh(Vector3::zeros(), Vector3::repeat(0.5));
        let last = m.triangles.len() - 1;
        m.triangles[last].swap(1, 2);
        assert!(m.check_closed().is_err());
    }

    #[test]
    fn parse_roundtrip() {
        let m = box_mesh(Vector3::new(0.1, 0.0, 0.0), Vector3::repeat(0.5));
        let mut text = String::from("# cube\n");
        for t in &m.triangles {
            for v in t {
                text.push_str(&format!("{} {} {} ", v.x, v.y, v.z));
            }
            text.push('\n');
        }
        let parsed = TriMesh::from_text(&text).unwrap();
        assert_eq!(parsed.triangles.len(), 12);
        assert_relative_eq!(parsed.signed_volume(), 1.0, epsilon = 1e-12);

        assert!(TriMesh::from_text("1 2 3 4\n").is_err());
        assert!(TriMesh::from_text("").is_err());
    }

    #[test]
    fn contains_classifies_cube_points() {
        let m = box_mesh(Vector3::zeros(), Vector3::repeat(0.5));
        // interior points, avoiding edge-aligned projections
        assert!(m.contains(Vector3::new(0.1037, 0.217, -0.111)));
        assert!(!m.contains(Vector3::new(0.61, 0.017, 0.013)));
        assert!(!m.contains(Vector3::new(0.1037, 0.217, 0.711)));
    }
}
