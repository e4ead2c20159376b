//! Deterministic samplers: seeded uniform boxes, Halton sequences for
//! low-discrepancy probing, and direction sets on the unit sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Vector;

/// Axis-aligned sampling region; entries may be `±inf` for unbounded axes.
#[derive(Clone, Debug)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Self { lo, hi }
    }

    pub fn cube(dim: usize, radius: f64) -> Self {
        Self {
            lo: vec![-radius; dim],
            hi: vec![radius; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Inflates the box about its center by `factor`; unbounded axes stay
    /// unbounded.
    pub fn inflated(&self, factor: f64) -> SampleBox {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            if self.lo[i].is_finite() && self.hi[i].is_finite() {
                let c = 0.5 * (self.lo[i] + self.hi[i]);
                let mut half = 0.5 * (self.hi[i] - self.lo[i]) * factor;
                if half == 0.0 {
                    // Degenerate axis: open an absolute margin so samplers
                    // still probe off-set points.
                    half = factor;
                }
                lo.push(c - half);
                hi.push(c + half);
            } else {
                lo.push(self.lo[i]);
                hi.push(self.hi[i]);
            }
        }
        SampleBox { lo, hi }
    }

    /// Replaces unbounded axes by `[-radius, radius]` and clips bounded ones
    /// to that window so every axis becomes finite.
    pub fn truncated(&self, radius: f64) -> SampleBox {
        let clip = |v: f64| v.clamp(-radius, radius);
        SampleBox {
            lo: self.lo.iter().map(|&v| if v.is_finite() { clip(v) } else { -radius }).collect(),
            hi: self.hi.iter().map(|&v| if v.is_finite() { clip(v) } else { radius }).collect(),
        }
    }
}

/// Seeded RNG used across the crate; one stream per seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from a finite box.
pub fn sample_box(r: &mut ChaCha8Rng, b: &SampleBox) -> Vector {
    let coords = (0..b.dim())
        .map(|i| {
            debug_assert!(b.lo[i].is_finite() && b.hi[i].is_finite());
            if b.lo[i] == b.hi[i] {
                b.lo[i]
            } else {
                r.gen_range(b.lo[i]..=b.hi[i])
            }
        })
        .collect();
    Vector::from_raw(coords)
}

/// Radical-inverse of `i` in the given base.
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 0.0;
    let mut denom = 1.0;
    while i > 0 {
        denom *= base as f64;
        inv += (i % base) as f64 / denom;
        i /= base;
    }
    inv
}

const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// `index`-th point of the Halton sequence mapped into the box.
pub fn halton_point(index: u64, b: &SampleBox) -> Vector {
    let coords = (0..b.dim())
        .map(|axis| {
            let u = radical_inverse(index + 1, HALTON_BASES[axis % HALTON_BASES.len()]);
            b.lo[axis] + u * (b.hi[axis] - b.lo[axis])
        })
        .collect();
    Vector::from_raw(coords)
}

/// Deterministic, roughly equidistributed unit directions.
///
/// d = 1 uses `±1`; d = 2 a uniform angle grid; d = 3 the Fibonacci sphere;
/// higher dimensions fall back to seeded normalized Gaussians.
pub fn sphere_directions(dim: usize, n: usize) -> Vec<Vector> {
    assert!(dim >= 1);
    match dim {
        1 => vec![Vector::from_raw(vec![1.0]), Vector::from_raw(vec![-1.0])],
        2 => (0..n)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
                Vector::from_raw(vec![theta.cos(), theta.sin()])
            })
            .collect(),
        3 => {
            // Fibonacci sphere.
            let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / (n as f64);
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = 2.0 * std::f64::consts::PI * (k as f64) / golden;
                    Vector::from_raw(vec![r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut r = rng(0x5f3759df);
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let coords: Vec<f64> = (0..dim)
                    .map(|_| {
                        // Box-Muller
                        let u1: f64 = r.gen_range(f64::EPSILON..1.0);
                        let u2: f64 = r.gen_range(0.0..1.0);
                        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                    })
                    .collect();
                let v = Vector::from_raw(coords);
                let norm = v.norm();
                if norm > 1e-6 {
                    out.push(v.scale(1.0 / norm));
                }
            }
            out
        }
    }
}
