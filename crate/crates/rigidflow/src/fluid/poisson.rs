//! Pressure Poisson solve and the projection step.
//!
//! The Neumann problem `lap(p) = (rho/dt) div(u*)` is solved with conjugate
//! gradients on the 7-point stencil (missing neighbors dropped at the outer
//! boundary). The nullspace of constants is pinned by keeping the right-hand
//! side and the iterates mean-free and subtracting the mean of the result.
//!
//! With residual `r = b - A p`, the projected field satisfies
//! `div(u) = -(dt/rho) r` cell by cell, so the solver iterates until both the
//! relative l2 residual is below `tol` and the resulting max divergence is
//! below `10 * tol`.

use rayon::prelude::*;

use crate::field::{slab_sum, Field3, Staggered};
use crate::geometry::GridSpec;

use super::{divergence_into, FluidError};

/// Result of one projection.
#[derive(Debug)]
pub struct Projection {
    pub u: Staggered,
    /// Pressure from this solve (mean pinned to zero).
    pub p: Field3,
    pub iterations: usize,
    /// Max-norm of the discrete divergence of the returned velocity.
    pub div_max: f64,
}

/// Apply `A = -laplacian` with natural Neumann boundaries. `out = A * x`.
fn apply_neg_laplacian(x: &Field3, grid: &GridSpec, out: &mut Field3) {
    let n = grid.cells;
    let invh2 = 1.0 / (grid.h * grid.h);
    out.par_slabs_mut().for_each(|(k, slab)| {
        for j in 0..n {
            for i in 0..n {
                let c = x.get(i, j, k);
                let mut acc = 0.0;
                if i > 0 {
                    acc += c - x.get(i - 1, j, k);
                }
                if i + 1 < n {
                    acc += c - x.get(i + 1, j, k);
                }
                if j > 0 {
                    acc += c - x.get(i, j - 1, k);
                }
                if j + 1 < n {
                    acc += c - x.get(i, j + 1, k);
                }
                if k > 0 {
                    acc += c - x.get(i, j, k - 1);
                }
                if k + 1 < n {
                    acc += c - x.get(i, j, k + 1);
                }
                slab[j * n + i] = acc * invh2;
            }
        }
    });
}

fn dot(a: &Field3, b: &Field3) -> f64 {
    let plane = a.nx * a.ny;
    let (sa, sb) = (a.as_slice(), b.as_slice());
    slab_sum(a.nz, |k| {
        sa[k * plane..(k + 1) * plane]
            .iter()
            .zip(sb[k * plane..(k + 1) * plane].iter())
            .map(|(x, y)| x * y)
            .sum()
    })
}

fn mean(a: &Field3) -> f64 {
    let plane = a.nx * a.ny;
    let s = a.as_slice();
    slab_sum(a.nz, |k| s[k * plane..(k + 1) * plane].iter().sum()) / a.len() as f64
}

fn shift(a: &mut Field3, c: f64) {
    a.as_mut_slice().par_chunks_mut(8192).for_each(|ch| {
        for v in ch {
            *v += c;
        }
    });
}

/// Project `u_star` onto the discretely divergence-free space.
///
/// Solves `lap(p) = (rho/dt) div(u_star)` to relative residual `tol` and
/// returns `u = u_star - (dt/rho) grad(p)`. `warm` seeds the iteration
/// (typically the previous step's pressure).
pub fn pressure_project(
    mut u_star: Staggered,
    grid: &GridSpec,
    rho: f64,
    dt: f64,
    tol: f64,
    max_iters: usize,
    warm: Option<&Field3>,
) -> Result<Projection, FluidError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = grid.cells;
    let scale = rho / dt;

    // b = -(rho/dt) div(u*), mean-removed for compatibility
    let mut b = Field3::zeros(n, n, n);
    divergence_into(&u_star, grid, &mut b);
    let div0_max = b.max_abs();
    b.as_mut_slice().par_chunks_mut(8192).for_each(|ch| {
        for v in ch {
            *v *= -scale;
        }
    });
    let b_mean = mean(&b);
    shift(&mut b, -b_mean);
    let b_norm = dot(&b, &b).sqrt();

    if b_norm == 0.0 || div0_max == 0.0 {
        let div_max = div0_max;
        let p = Field3::zeros(n, n, n);
        return Ok(Projection {
            u: u_star,
            p,
            iterations: 0,
            div_max,
        });
    }

    // divergence of the result is (dt/rho) * residual
    let div_target = 10.0 * tol;

    let mut p = match warm {
        Some(w) => w.clone(),
        None => Field3::zeros(n, n, n),
    };
    let pm = mean(&p);
    shift(&mut p, -pm);

    let mut ap = Field3::zeros(n, n, n);
    apply_neg_laplacian(&p, grid, &mut ap);
    let mut r = b.clone();
    r.as_mut_slice()
        .par_chunks_mut(8192)
        .zip(ap.as_slice().par_chunks(8192))
        .for_each(|(rc, ac)| {
            for (x, y) in rc.iter_mut().zip(ac.iter()) {
                *x -= y;
            }
        });

    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    let mut converged = rr.sqrt() <= tol * b_norm && (1.0 / scale) * r.max_abs() <= div_target;

    while !converged && iterations < max_iters {
        apply_neg_laplacian(&d, grid, &mut ap);
        let dad = dot(&d, &ap);
        if dad <= 0.0 {
            break; // search direction collapsed (nullspace drift)
        }
        let alpha = rr / dad;
        p.as_mut_slice()
            .par_chunks_mut(8192)
            .zip(d.as_slice().par_chunks(8192))
            .for_each(|(pc, dc)| {
                for (x, y) in pc.iter_mut().zip(dc.iter()) {
                    *x += alpha * y;
                }
            });
        r.as_mut_slice()
            .par_chunks_mut(8192)
            .zip(ap.as_slice().par_chunks(8192))
            .for_each(|(rc, ac)| {
                for (x, y) in rc.iter_mut().zip(ac.iter()) {
                    *x -= alpha * y;
                }
            });
        let rr_new = dot(&r, &r);
        iterations += 1;

        if rr_new.sqrt() <= tol * b_norm {
            // cheap criterion met; confirm the max-divergence criterion
            if (1.0 / scale) * r.max_abs() <= div_target {
                converged = true;
                break;
            }
        }

        let beta = rr_new / rr;
        rr = rr_new;
        d.as_mut_slice()
            .par_chunks_mut(8192)
            .zip(r.as_slice().par_chunks(8192))
            .for_each(|(dc, rc)| {
                for (x, y) in dc.iter_mut().zip(rc.iter()) {
                    *x = y + beta * *x;
                }
            });
    }

    let rel = rr.sqrt() / b_norm;
    if !converged && rel > tol {
        return Err(FluidError::PoissonNoConvergence {
            residual: rel,
            iterations,
        });
    }

    // pin the nullspace: zero-mean pressure
    let pm = mean(&p);
    shift(&mut p, -pm);

    // u = u* - (dt/rho) grad(p) on interior faces
    let coef = (dt / rho) / grid.h;
    {
        let pf = &p;
        u_star.u.par_slabs_mut().for_each(|(k, slab)| {
            for j in 0..n {
                for i in 1..n {
                    slab[j * (n + 1) + i] -= coef * (pf.get(i, j, k) - pf.get(i - 1, j, k));
                }
            }
        });
        u_star.v.par_slabs_mut().for_each(|(k, slab)| {
            for j in 1..n {
                for i in 0..n {
                    slab[j * n + i] -= coef * (pf.get(i, j, k) - pf.get(i, j - 1, k));
                }
            }
        });
        u_star.w.par_slabs_mut().for_each(|(k, slab)| {
            if k == 0 || k == n {
                return;
            }
            for j in 0..n {
                for i in 0..n {
                    slab[j * n + i] -= coef * (pf.get(i, j, k) - pf.get(i, j, k - 1));
                }
            }
        });
    }

    let div_max = (dt / rho) * r.max_abs();
    Ok(Projection {
        u: u_star,
        p,
        iterations,
        div_max,
    })
}
