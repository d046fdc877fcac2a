//! Discrete spatial operators and the projection step for the body-frame
//! momentum equation on the truncated staggered grid.
//!
//! Outer boundary: normal velocity components live on the boundary faces and
//! are pinned to zero (the truncated far-field condition). Tangential
//! derivatives at wall-adjacent rows fall back to one-sided stencils that are
//! exact on affine fields; the transverse diffusive contribution at those
//! rows vanishes (linear-extrapolation ghost), which keeps the explicit step
//! neutral rather than anti-dissipative there.

mod poisson;

pub use poisson::{pressure_project, Projection};

use nalgebra::Vector3;
use rayon::prelude::*;
use thiserror::Error;

use crate::field::{Field3, Staggered};
use crate::geometry::GridSpec;
use crate::kinematics::rigid_velocity;

#[derive(Debug, Error)]
pub enum FluidError {
    #[error(
        "pressure Poisson solve did not converge: relative residual {residual:.3e} after {iterations} iterations"
    )]
    PoissonNoConvergence { residual: f64, iterations: usize },
}

/// Constant fluid properties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    /// Fluid density.
    pub rho: f64,
    /// Dynamic (shear) viscosity.
    pub mu: f64,
}

impl FluidParams {
    pub fn new(rho: f64, mu: f64) -> Self {
        assert!(rho > 0.0 && mu > 0.0, "fluid density and viscosity must be positive");
        Self { rho, mu }
    }

    /// Kinematic viscosity `mu / rho`.
    pub fn nu(&self) -> f64 {
        self.mu / self.rho
    }
}

/// Face-centered velocity and cell-centered pressure on the truncated grid.
#[derive(Debug, Clone)]
pub struct FluidState {
    pub u: Staggered,
    pub p: Field3,
    pub grid: GridSpec,
}

impl FluidState {
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.cells;
        Self {
            u: Staggered::zeros(n),
            p: Field3::zeros(n, n, n),
            grid,
        }
    }
}

/// Transverse first derivative along a cell-index axis: centered in the
/// interior, second-order one-sided at the first/last row.
#[inline(always)]
fn d1_transverse(f: impl Fn(usize) -> f64, j: usize, n: usize, inv2h: f64) -> f64 {
    if j == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) * inv2h
    } else if j == n - 1 {
        (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) * inv2h
    } else {
        (f(j + 1) - f(j - 1)) * inv2h
    }
}

/// Transverse second difference: centered in the interior, zero at the
/// first/last row (linear-extrapolation ghost).
#[inline(always)]
fn d2_transverse(f: impl Fn(usize) -> f64, j: usize, n: usize, invh2: f64) -> f64 {
    if j == 0 || j == n - 1 {
        0.0
    } else {
        (f(j + 1) - 2.0 * f(j) + f(j - 1)) * invh2
    }
}

/// The advective bracket `(u - V) . grad(u) + omega x u` evaluated on every
/// interior face, where `V(x) = xi + omega x x`. No time factor is applied.
pub fn advective_term_into(
    u: &Staggered,
    xi: Vector3<f64>,
    omega: Vector3<f64>,
    grid: &GridSpec,
    out: &mut Staggered,
) {
    let n = grid.cells;
    let h = grid.h;
    let inv2h = 1.0 / (2.0 * h);

    let uu = &u.u;
    let vv = &u.v;
    let ww = &u.w;

    // x component on x-faces (i in 1..n)
    out.u.par_slabs_mut().for_each(|(k, slab)| {
        let z = grid.center_coord(k);
        for j in 0..n {
            let y = grid.center_coord(j);
            for i in 1..n {
                let x = grid.face_coord(i);
                let here = uu.get(i, j, k);
                let vbar = 0.25
                    * (vv.get(i - 1, j, k)
                        + vv.get(i - 1, j + 1, k)
                        + vv.get(i, j, k)
                        + vv.get(i, j + 1, k));
                let wbar = 0.25
                    * (ww.get(i - 1, j, k)
                        + ww.get(i - 1, j, k + 1)
                        + ww.get(i, j, k)
                        + ww.get(i, j, k + 1));
                let dudx = (uu.get(i + 1, j, k) - uu.get(i - 1, j, k)) * inv2h;
                let dudy = d1_transverse(|jj| uu.get(i, jj, k), j, n, inv2h);
                let dudz = d1_transverse(|kk| uu.get(i, j, kk), k, n, inv2h);
                let uvec = Vector3::new(here, vbar, wbar);
                let vrig = rigid_velocity(xi, omega, Vector3::new(x, y, z));
                let rel = uvec - vrig;
                slab[j * (n + 1) + i] = rel.x * dudx
                    + rel.y * dudy
                    + rel.z * dudz
                    + (omega.y * wbar - omega.z * vbar);
            }
        }
    });

    // y component on y-faces (j in 1..n)
    out.v.par_slabs_mut().for_each(|(k, slab)| {
        let z = grid.center_coord(k);
        for j in 1..n {
            let y = grid.face_coord(j);
            for i in 0..n {
                let x = grid.center_coord(i);
                let here = vv.get(i, j, k);
                let ubar = 0.25
                    * (uu.get(i, j - 1, k)
                        + uu.get(i + 1, j - 1, k)
                        + uu.get(i, j, k)
                        + uu.get(i + 1, j, k));
                let wbar = 0.25
                    * (ww.get(i, j - 1, k)
                        + ww.get(i, j - 1, k + 1)
                        + ww.get(i, j, k)
                        + ww.get(i, j, k + 1));
                let dvdy = (vv.get(i, j + 1, k) - vv.get(i, j - 1, k)) * inv2h;
                let dvdx = d1_transverse(|ii| vv.get(ii, j, k), i, n, inv2h);
                let dvdz = d1_transverse(|kk| vv.get(i, j, kk), k, n, inv2h);
                let uvec = Vector3::new(ubar, here, wbar);
                let vrig = rigid_velocity(xi, omega, Vector3::new(x, y, z));
                let rel = uvec - vrig;
                slab[j * n + i] = rel.x * dvdx
                    + rel.y * dvdy
                    + rel.z * dvdz
                    + (omega.z * ubar - omega.x * wbar);
            }
        }
    });

    // z component on z-faces (k in 1..n)
    out.w.par_slabs_mut().for_each(|(k, slab)| {
        if k == 0 || k == n {
            return;
        }
        let z = grid.face_coord(k);
        for j in 0..n {
            let y = grid.center_coord(j);
            for i in 0..n {
                let x = grid.center_coord(i);
                let here = ww.get(i, j, k);
                let ubar = 0.25
                    * (uu.get(i, j, k - 1)
                        + uu.get(i + 1, j, k - 1)
                        + uu.get(i, j, k)
                        + uu.get(i + 1, j, k));
                let vbar = 0.25
                    * (vv.get(i, j, k - 1)
                        + vv.get(i, j + 1, k - 1)
                        + vv.get(i, j, k)
                        + vv.get(i, j + 1, k));
                let dwdz = (ww.get(i, j, k + 1) - ww.get(i, j, k - 1)) * inv2h;
                let dwdx = d1_transverse(|ii| ww.get(ii, j, k), i, n, inv2h);
                let dwdy = d1_transverse(|jj| ww.get(i, jj, k), j, n, inv2h);
                let uvec = Vector3::new(ubar, vbar, here);
                let vrig = rigid_velocity(xi, omega, Vector3::new(x, y, z));
                let rel = uvec - vrig;
                slab[j * n + i] = rel.x * dwdx
                    + rel.y * dwdy
                    + rel.z * dwdz
                    + (omega.x * vbar - omega.y * ubar);
            }
        }
    });
}

pub fn advective_term(
    u: &Staggered,
    xi: Vector3<f64>,
    omega: Vector3<f64>,
    grid: &GridSpec,
) -> Staggered {
    let mut out = Staggered::zeros(grid.cells);
    advective_term_into(u, xi, omega, grid, &mut out);
    out
}

/// `mu` times the 7-point discrete Laplacian of each velocity component on
/// every interior face.
pub fn diffusive_term_into(u: &Staggered, mu: f64, grid: &GridSpec, out: &mut Staggered) {
    let n = grid.cells;
    let invh2 = 1.0 / (grid.h * grid.h);

    let uu = &u.u;
    let vv = &u.v;
    let ww = &u.w;

    out.u.par_slabs_mut().for_each(|(k, slab)| {
        for j in 0..n {
            for i in 1..n {
                let here = uu.get(i, j, k);
                let d2x = (uu.get(i + 1, j, k) - 2.0 * here + uu.get(i - 1, j, k)) * invh2;
                let d2y = d2_transverse(|jj| uu.get(i, jj, k), j, n, invh2);
                let d2z = d2_transverse(|kk| uu.get(i, j, kk), k, n, invh2);
                slab[j * (n + 1) + i] = mu * (d2x + d2y + d2z);
            }
        }
    });
    out.v.par_slabs_mut().for_each(|(k, slab)| {
        for j in 1..n {
            for i in 0..n {
                let here = vv.get(i, j, k);
                let d2y = (vv.get(i, j + 1, k) - 2.0 * here + vv.get(i, j - 1, k)) * invh2;
                let d2x = d2_transverse(|ii| vv.get(ii, j, k), i, n, invh2);
                let d2z = d2_transverse(|kk| vv.get(i, j, kk), k, n, invh2);
                slab[j * n + i] = mu * (d2x + d2y + d2z);
            }
        }
    });
    out.w.par_slabs_mut().for_each(|(k, slab)| {
        if k == 0 || k == n {
            return;
        }
        for j in 0..n {
            for i in 0..n {
                let here = ww.get(i, j, k);
                let d2z = (ww.get(i, j, k + 1) - 2.0 * here + ww.get(i, j, k - 1)) * invh2;
                let d2x = d2_transverse(|ii| ww.get(ii, j, k), i, n, invh2);
                let d2y = d2_transverse(|jj| ww.get(i, jj, k), j, n, invh2);
                slab[j * n + i] = mu * (d2x + d2y + d2z);
            }
        }
    });
}

pub fn diffusive_term(u: &Staggered, mu: f64, grid: &GridSpec) -> Staggered {
    let mut out = Staggered::zeros(grid.cells);
    diffusive_term_into(u, mu, grid, &mut out);
    out
}

/// Discrete divergence at every cell center.
pub fn divergence(u: &Staggered, grid: &GridSpec) -> Field3 {
    let n = grid.cells;
    let mut div = Field3::zeros(n, n, n);
    divergence_into(u, grid, &mut div);
    div
}

pub fn divergence_into(u: &Staggered, grid: &GridSpec, div: &mut Field3) {
    let n = grid.cells;
    let invh = 1.0 / grid.h;
    let uu = &u.u;
    let vv = &u.v;
    let ww = &u.w;
    div.par_slabs_mut().for_each(|(k, slab)| {
        for j in 0..n {
            for i in 0..n {
                slab[j * n + i] = (uu.get(i + 1, j, k) - uu.get(i, j, k)
                    + vv.get(i, j + 1, k)
                    - vv.get(i, j, k)
                    + ww.get(i, j, k + 1)
                    - ww.get(i, j, k))
                    * invh;
            }
        }
    });
}

/// Velocity vector interpolated to the center of cell `(i, j, k)`.
#[inline(always)]
pub fn center_velocity(u: &Staggered, i: usize, j: usize, k: usize) -> Vector3<f64> {
    Vector3::new(
        0.5 * (u.u.get(i, j, k) + u.u.get(i + 1, j, k)),
        0.5 * (u.v.get(i, j, k) + u.v.get(i, j + 1, k)),
        0.5 * (u.w.get(i, j, k) + u.w.get(i, j, k + 1)),
    )
}

/// Stability-limited step size:
/// `safety * min(h / max_speed, h^2 / (6 nu))`, capped at `dt_max`, where
/// `max_speed` bounds `|u - V|` by `max|u| + |xi| + |omega| * sqrt(3) * L`.
pub fn cfl_dt(
    u: &Staggered,
    xi: Vector3<f64>,
    omega: Vector3<f64>,
    grid: &GridSpec,
    nu: f64,
    safety: f64,
    dt_max: f64,
) -> f64 {
    assert!(safety > 0.0 && safety <= 1.0, "safety factor in (0, 1]");
    let max_speed =
        u.max_abs() + xi.norm() + omega.norm() * 3.0_f64.sqrt() * grid.half_width;
    let adv = if max_speed > 0.0 {
        grid.h / max_speed
    } else {
        f64::INFINITY
    };
    let visc = if nu > 0.0 {
        grid.h * grid.h / (6.0 * nu)
    } else {
        f64::INFINITY
    };
    let dt = safety * adv.min(visc);
    if dt.is_finite() {
        dt.min(dt_max)
    } else {
        dt_max
    }
}

/// Fill every face with the rigid field `xi + omega x x` sampled at the face
/// position (used for initial data and by the rigid projection).
pub fn fill_rigid_field(
    u: &mut Staggered,
    xi: Vector3<f64>,
    omega: Vector3<f64>,
    grid: &GridSpec,
) {
    let n = grid.cells;
    u.u.par_slabs_mut().for_each(|(k, slab)| {
        let z = grid.center_coord(k);
        for j in 0..n {
            let y = grid.center_coord(j);
            for i in 0..=n {
                let x = grid.face_coord(i);
                slab[j * (n + 1) + i] =
                    rigid_velocity(xi, omega, Vector3::new(x, y, z)).x;
            }
        }
    });
    u.v.par_slabs_mut().for_each(|(k, slab)| {
        let z = grid.center_coord(k);
        for j in 0..=n {
            let y = grid.face_coord(j);
            for i in 0..n {
                let x = grid.center_coord(i);
                slab[j * n + i] = rigid_velocity(xi, omega, Vector3::new(x, y, z)).y;
            }
        }
    });
    u.w.par_slabs_mut().for_each(|(k, slab)| {
        let z = grid.face_coord(k);
        for j in 0..n {
            let y = grid.center_coord(j);
            for i in 0..n {
                let x = grid.center_coord(i);
                slab[j * n + i] = rigid_velocity(xi, omega, Vector3::new(x, y, z)).z;
            }
        }
    });
}
