//! Body shape, mass properties, the truncated computational box, and the
//! discrete indicator of the body region.

mod mesh;

pub use mesh::{box_mesh, TriMesh};

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use thiserror::Error;

use crate::field::Field3;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("non-positive dimension: {0}")]
    NonPositiveDimension(String),
    #[error("mesh is not closed/watertight: {0}")]
    OpenMesh(String),
    #[error("mesh parse error: {0}")]
    MeshParse(String),
    #[error("degenerate body: {0}")]
    DegenerateBody(String),
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("body does not fit the grid with the required clearance: {0}")]
    BodyOutsideGrid(String),
}

/// Body geometry. Mesh vertices are given in arbitrary coordinates; the
/// constructor recenters them at the center of mass.
#[derive(Debug, Clone)]
pub enum Shape {
    Sphere { radius: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    Mesh(TriMesh),
}

/// A rigid body: shape, density, and derived mass properties. Coordinates
/// are body-frame with the origin at the center of mass.
#[derive(Debug, Clone)]
pub struct BodySpec {
    pub shape: Shape,
    pub body_density: f64,
    pub mass: f64,
    /// Inertia tensor about the center of mass, body frame.
    pub inertia: Matrix3<f64>,
    /// Twice the radius of the smallest origin-centered ball containing the
    /// body surface.
    pub r_star: f64,
}

/// Construct a [`BodySpec`] from a shape and a homogeneous body density.
pub fn make_body(shape: Shape, body_density: f64) -> Result<BodySpec, GeometryError> {
    if !(body_density > 0.0) {
        return Err(GeometryError::NonPositiveDimension(format!(
            "body density {body_density}"
        )));
    }
    let (shape, mass, inertia) = match shape {
        Shape::Sphere { radius } => {
            if !(radius > 0.0) {
                return Err(GeometryError::NonPositiveDimension(format!(
                    "sphere radius {radius}"
                )));
            }
            let mass = body_density * 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3);
            let inertia = Matrix3::identity() * (0.4 * mass * radius * radius);
            (Shape::Sphere { radius }, mass, inertia)
        }
        Shape::Ellipsoid { a, b, c } => {
            if !(a > 0.0 && b > 0.0 && c > 0.0) {
                return Err(GeometryError::NonPositiveDimension(format!(
                    "ellipsoid semi-axes ({a}, {b}, {c})"
                )));
            }
            let mass = body_density * 4.0 / 3.0 * std::f64::consts::PI * a * b * c;
            let inertia = Matrix3::from_diagonal(&Vector3::new(
                mass / 5.0 * (b * b + c * c),
                mass / 5.0 * (a * a + c * c),
                mass / 5.0 * (a * a + b * b),
            ));
            (Shape::Ellipsoid { a, b, c }, mass, inertia)
        }
        Shape::Mesh(mut m) => {
            m.check_closed()?;
            let vol = m.signed_volume();
            if vol.abs() < 1e-300 {
                return Err(GeometryError::DegenerateBody("zero mesh volume".into()));
            }
            if vol < 0.0 {
                // closed and consistent but inward-facing; make normals outward
                m.flip_orientation();
            }
            let centroid = m.centroid();
            m.translate(-centroid);
            let mass = body_density * m.signed_volume();
            let inertia = m.inertia_about_origin(body_density);
            // positive definiteness guard for pathological (self-intersecting) input
            let eig = inertia.symmetric_eigenvalues();
            if eig.min() <= 0.0 {
                return Err(GeometryError::DegenerateBody(
                    "inertia tensor not positive definite".into(),
                ));
            }
            (Shape::Mesh(m), mass, inertia)
        }
    };
    let r_star = shape_r_star(&shape);
    Ok(BodySpec {
        shape,
        body_density,
        mass,
        inertia,
        r_star,
    })
}

impl BodySpec {
    pub fn sphere(radius: f64, body_density: f64) -> Result<Self, GeometryError> {
        make_body(Shape::Sphere { radius }, body_density)
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64, body_density: f64) -> Result<Self, GeometryError> {
        make_body(Shape::Ellipsoid { a, b, c }, body_density)
    }

    /// Largest distance from the center of mass to the body surface.
    pub fn max_extent(&self) -> f64 {
        self.r_star / 2.0
    }

    /// Smallest through-thickness of the body (resolution checks).
    pub fn min_dimension(&self) -> f64 {
        match &self.shape {
            Shape::Sphere { radius } => 2.0 * radius,
            Shape::Ellipsoid { a, b, c } => 2.0 * a.min(*b).min(*c),
            Shape::Mesh(m) => {
                let (lo, hi) = m.bounding_box();
                (hi - lo).min()
            }
        }
    }

    /// True if the body-frame point lies strictly inside the body.
    pub fn contains(&self, p: Vector3<f64>) -> bool {
        match &self.shape {
            Shape::Sphere { radius } => p.norm_squared() < radius * radius,
            Shape::Ellipsoid { a, b, c } => {
                let q = p.x / a;
                let r = p.y / b;
                let s = p.z / c;
                q * q + r * r + s * s < 1.0
            }
            Shape::Mesh(m) => m.contains(p),
        }
    }
}

/// Twice the radius of the smallest origin-centered ball containing the body
/// surface: `2 * max_{x in surface} |x|`.
pub fn compute_r_star(body: &BodySpec) -> f64 {
    shape_r_star(&body.shape)
}

fn shape_r_star(shape: &Shape) -> f64 {
    match shape {
        Shape::Sphere { radius } => 2.0 * radius,
        Shape::Ellipsoid { a, b, c } => 2.0 * a.max(*b).max(*c),
        Shape::Mesh(m) => 2.0 * m.max_vertex_norm(),
    }
}

/// The cubic computational box `[-L, L]^3` with `N` cells per side and a
/// staggered layout: velocity components on faces, pressure at cell centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub cells: usize,
    pub h: f64,
}

impl GridSpec {
    pub fn new(half_width: f64, cells: usize) -> Result<Self, GeometryError> {
        if !(half_width > 0.0) {
            return Err(GeometryError::BadGrid(format!(
                "half width {half_width} must be positive"
            )));
        }
        if cells < 16 {
            return Err(GeometryError::BadGrid(format!(
                "cells per side {cells} < 16"
            )));
        }
        if cells % 2 != 0 {
            return Err(GeometryError::BadGrid(format!(
                "cells per side {cells} must be even"
            )));
        }
        Ok(Self {
            half_width,
            cells,
            h: 2.0 * half_width / cells as f64,
        })
    }

    #[inline(always)]
    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        Vector3::new(
            -self.half_width + (i as f64 + 0.5) * self.h,
            -self.half_width + (j as f64 + 0.5) * self.h,
            -self.half_width + (k as f64 + 0.5) * self.h,
        )
    }

    /// Coordinate of the `i`-th face plane along one axis.
    #[inline(always)]
    pub fn face_coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h
    }

    #[inline(always)]
    pub fn center_coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.h
    }

    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }
}

/// Discrete indicator of the body region: per-cell volume fraction
/// `phi in [0, 1]`, the list of fully interior cells, and cached voxel
/// moments used by the coupling step.
#[derive(Debug, Clone)]
pub struct DomainMask {
    pub grid: GridSpec,
    /// Body volume fraction per cell.
    pub phi: Field3,
    /// Linear indices of cells with `phi == 1`.
    pub full_cells: Vec<u32>,
    /// Per-cell flag for `phi == 1`.
    pub is_full: Vec<bool>,
    /// Voxel body volume `sum(phi) * h^3`.
    pub vol_vox: f64,
    /// First moment of the `phi`-weighted region.
    pub moment_vox: Vector3<f64>,
    /// Inertia of the `phi`-weighted region about the origin, unit density.
    pub inertia_vox: Matrix3<f64>,
    /// Volume of the fully interior region.
    pub vol_full: f64,
    pub moment_full: Vector3<f64>,
    pub inertia_full: Matrix3<f64>,
    /// True if the smallest body dimension spans fewer than 8 cells.
    pub resolution_warning: bool,
}

impl DomainMask {
    /// Weight of the cell in fluid-region integrals.
    #[inline(always)]
    pub fn fluid_weight(&self, idx: usize) -> f64 {
        1.0 - self.phi.as_slice()[idx]
    }

    /// Mask with no body at all (pure-fluid box), for operator tests and
    /// field diagnostics.
    pub fn all_fluid(grid: GridSpec) -> Self {
        let n = grid.cells;
        Self {
            grid,
            phi: Field3::zeros(n, n, n),
            full_cells: Vec::new(),
            is_full: vec![false; n * n * n],
            vol_vox: 0.0,
            moment_vox: Vector3::zeros(),
            inertia_vox: Matrix3::zeros(),
            vol_full: 0.0,
            moment_full: Vector3::zeros(),
            inertia_full: Matrix3::zeros(),
            resolution_warning: false,
        }
    }
}

/// Voxelize the body onto the grid. Cells strictly inside get `phi = 1`,
/// strictly outside `phi = 0`; cells cut by the surface are subsampled on a
/// 4 x 4 x 4 lattice.
pub fn rasterize(body: &BodySpec, grid: GridSpec) -> Result<DomainMask, GeometryError> {
    let extent = body.max_extent();
    if grid.half_width < 2.0 * body.r_star {
        return Err(GeometryError::BodyOutsideGrid(format!(
            "half width {} < 2 * r_star = {}",
            grid.half_width,
            2.0 * body.r_star
        )));
    }
    if extent > grid.half_width - 4.0 * grid.h {
        return Err(GeometryError::BodyOutsideGrid(format!(
            "body extent {} exceeds half width {} minus 4h clearance",
            extent, grid.half_width
        )));
    }

    let n = grid.cells;
    let h = grid.h;
    // Fixed sub-cell nudge keeps mesh ray casts away from edge-aligned
    // projections of grid-aligned meshes.
    let nudge = Vector3::new(0.0, 1.2345e-7 * h, 2.3456e-7 * h);

    let mut phi = Field3::zeros(n, n, n);
    phi.par_slabs_mut().for_each(|(k, slab)| {
        for j in 0..n {
            for i in 0..n {
                let c = grid.cell_center(i, j, k);
                if c.norm() > extent + h * 0.87 {
                    continue; // cell cannot touch the body (phi = 0)
                }
                // classify the 8 corners
                let mut inside = 0;
                for (sx, sy, sz) in CORNERS {
                    let p = c + Vector3::new(sx, sy, sz) * (h / 2.0) + nudge;
                    if body.contains(p) {
                        inside += 1;
                    }
                }
                let val = if inside == 8 {
                    1.0
                } else if inside == 0 {
                    0.0
                } else {
                    // cut cell: 4^3 subsampling
                    let mut count = 0;
                    for a in 0..4 {
                        for b in 0..4 {
                            for d in 0..4 {
                                let p = c + Vector3::new(
                                    (a as f64 + 0.5) / 4.0 - 0.5,
                                    (b as f64 + 0.5) / 4.0 - 0.5,
                                    (d as f64 + 0.5) / 4.0 - 0.5,
                                ) * h
                                    + nudge;
                                if body.contains(p) {
                                    count += 1;
                                }
                            }
                        }
                    }
                    count as f64 / 64.0
                };
                slab[j * n + i] = val;
            }
        }
    });

    // cached voxel moments
    let h3 = grid.cell_volume();
    let mut full_cells = Vec::new();
    let mut is_full = vec![false; n * n * n];
    let mut vol_vox = 0.0;
    let mut moment_vox = Vector3::zeros();
    let mut inertia_vox = Matrix3::zeros();
    let mut vol_full = 0.0;
    let mut moment_full = Vector3::zeros();
    let mut inertia_full = Matrix3::zeros();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let f = phi.get(i, j, k);
                if f == 0.0 {
                    continue;
                }
                let x = grid.cell_center(i, j, k);
                let second = Matrix3::identity() * x.norm_squared() - x * x.transpose();
                vol_vox += f * h3;
                moment_vox += x * (f * h3);
                inertia_vox += second * (f * h3);
                if f == 1.0 {
                    let idx = phi.idx(i, j, k);
                    full_cells.push(idx as u32);
                    is_full[idx] = true;
                    vol_full += h3;
                    moment_full += x * h3;
                    inertia_full += second * h3;
                }
            }
        }
    }

    let cells_across = body.min_dimension() / h;
    let resolution_warning = cells_across < 8.0;
    if resolution_warning {
        log::warn!(
            "body surface resolved by only {cells_across:.1} cells across its smallest dimension (< 8)"
        );
    }

    Ok(DomainMask {
        grid,
        phi,
        full_cells,
        is_full,
        vol_vox,
        moment_vox,
        inertia_vox,
        vol_full,
        moment_full,
        inertia_full,
        resolution_warning,
    })
}

const CORNERS: [(f64, f64, f64); 8] = [
    (-1.0, -1.0, -1.0),
    (1.0, -1.0, -1.0),
    (-1.0, 1.0, -1.0),
    (1.0, 1.0, -1.0),
    (-1.0, -1.0, 1.0),
    (1.0, -1.0, 1.0),
    (-1.0, 1.0, 1.0),
    (1.0, 1.0, 1.0),
];
