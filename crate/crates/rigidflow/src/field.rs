//! Dense 3-D scalar fields and the staggered (MAC) velocity layout.
//!
//! Storage is row-major in (z, y, x): the x index varies fastest. All
//! parallel reductions run over fixed z-slabs and sum the per-slab partials
//! in index order, so results are bitwise reproducible regardless of the
//! rayon thread count.

use rayon::prelude::*;

/// Dense scalar field on an `nx * ny * nz` lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3 {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    data: Vec<f64>,
}

impl Field3 {
    pub fn zeros(nx: usize, ny: usize, nz: usize) -> Self {
        Self {
            nx,
            ny,
            nz,
            data: vec![0.0; nx * ny * nz],
        }
    }

    #[inline(always)]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny && k < self.nz);
        (k * self.ny + j) * self.nx + i
    }

    #[inline(always)]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(i, j, k)]
    }

    #[inline(always)]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let id = self.idx(i, j, k);
        self.data[id] = v;
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    /// Mutable z-slabs, one `(k, slab)` pair per z index, for data-parallel
    /// kernels. Each slab is the contiguous `nx * ny` block at height `k`.
    pub fn par_slabs_mut(&mut self) -> impl ParallelIterator<Item = (usize, &mut [f64])> {
        let plane = self.nx * self.ny;
        self.data.par_chunks_mut(plane).enumerate().map(|(k, s)| (k, s))
    }

    pub fn max_abs(&self) -> f64 {
        slab_sum_map(self.nz, |k| {
            let plane = self.nx * self.ny;
            self.data[k * plane..(k + 1) * plane]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .into_iter()
        .fold(0.0f64, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Ordered per-slab partial results; summing or folding the returned vector
/// sequentially keeps reductions deterministic.
pub fn slab_sum_map<F>(nz: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync,
{
    (0..nz).into_par_iter().map(f).collect()
}

/// Deterministic parallel sum over z-slabs.
pub fn slab_sum<F>(nz: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    slab_sum_map(nz, f).iter().sum()
}

/// Deterministic parallel sum producing a small fixed-size accumulator
/// (used for simultaneous vector/tensor reductions).
pub fn slab_sum_array<const M: usize, F>(nz: usize, f: F) -> [f64; M]
where
    F: Fn(usize) -> [f64; M] + Sync,
{
    let partials: Vec<[f64; M]> = (0..nz).into_par_iter().map(f).collect();
    let mut acc = [0.0; M];
    for p in partials {
        for (a, v) in acc.iter_mut().zip(p.iter()) {
            *a += v;
        }
    }
    acc
}

/// The three face-centered velocity component arrays of a MAC grid with `n`
/// cells per side: `u` on x-faces `(n+1, n, n)`, `v` on y-faces
/// `(n, n+1, n)`, `w` on z-faces `(n, n, n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Staggered {
    pub u: Field3,
    pub v: Field3,
    pub w: Field3,
}

impl Staggered {
    pub fn zeros(n: usize) -> Self {
        Self {
            u: Field3::zeros(n + 1, n, n),
            v: Field3::zeros(n, n + 1, n),
            w: Field3::zeros(n, n, n + 1),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.u.all_finite() && self.v.all_finite() && self.w.all_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.u.max_abs().max(self.v.max_abs()).max(self.w.max_abs())
    }

    /// `self += scale * other`, componentwise over all faces.
    pub fn axpy(&mut self, scale: f64, other: &Staggered) {
        for (dst, src) in [
            (&mut self.u, &other.u),
            (&mut self.v, &other.v),
            (&mut self.w, &other.w),
        ] {
            dst.as_mut_slice()
                .par_chunks_mut(4096)
                .zip(src.as_slice().par_chunks(4096))
                .for_each(|(d, s)| {
                    for (a, b) in d.iter_mut().zip(s.iter()) {
                        *a += scale * b;
                    }
                });
        }
    }
}
