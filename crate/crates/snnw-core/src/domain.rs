//! Axis-aligned box domains.

use crate::quadrature::AxisSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxDomain<const D: usize> {
    pub lo: [f64; D],
    pub hi: [f64; D],
}

impl<const D: usize> BoxDomain<D> {
    pub fn new(lo: [f64; D], hi: [f64; D]) -> Self {
        for i in 0..D {
            assert!(lo[i] < hi[i], "degenerate box on axis {i}");
        }
        Self { lo, hi }
    }

    pub fn volume(&self) -> f64 {
        (0..D).map(|i| self.hi[i] - self.lo[i]).product()
    }

    pub fn contains(&self, x: &[f64; D]) -> bool {
        (0..D).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }

    /// Per-axis specs for a composite quadrature rule with uniform structure.
    pub fn axis_specs(&self, n_sub: usize, n_pts: usize) -> Vec<AxisSpec> {
        (0..D)
            .map(|i| AxisSpec::new(self.lo[i], self.hi[i], n_sub, n_pts))
            .collect()
    }

    /// Uniform tensor grid with `n` points per axis, endpoints included.
    pub fn uniform_grid(&self, n: usize) -> Vec<[f64; D]> {
        assert!(n >= 2, "grid needs at least 2 points per axis");
        let total = n.pow(D as u32);
        let mut pts = Vec::with_capacity(total);
        let mut idx = [0usize; D];
        for _ in 0..total {
            let mut p = [0.0; D];
            for i in 0..D {
                let t = idx[i] as f64 / (n - 1) as f64;
                p[i] = self.lo[i] + t * (self.hi[i] - self.lo[i]);
            }
            pts.push(p);
            for i in (0..D).rev() {
                idx[i] += 1;
                if idx[i] < n {
                    break;
                }
                idx[i] = 0;
            }
        }
        pts
    }

    /// Sample points covering the boundary: every face, `n` points per face
    /// axis (endpoints included, so corners appear).
    pub fn boundary_samples(&self, n: usize) -> Vec<[f64; D]> {
        let mut pts = Vec::new();
        if D == 1 {
            pts.push([self.lo[0]; D]);
            let mut p = [0.0; D];
            p[0] = self.hi[0];
            pts.push(p);
            return pts;
        }
        for face_axis in 0..D {
            for &side in &[0usize, 1] {
                // grid over the remaining axes
                let m = n.pow((D - 1) as u32);
                let mut idx = vec![0usize; D - 1];
                for _ in 0..m {
                    let mut p = [0.0; D];
                    p[face_axis] = if side == 0 {
                        self.lo[face_axis]
                    } else {
                        self.hi[face_axis]
                    };
                    let mut k = 0;
                    for i in 0..D {
                        if i == face_axis {
                            continue;
                        }
                        let t = idx[k] as f64 / (n - 1) as f64;
                        p[i] = self.lo[i] + t * (self.hi[i] - self.lo[i]);
                        k += 1;
                    }
                    pts.push(p);
                    for i in (0..D - 1).rev() {
                        idx[i] += 1;
                        if idx[i] < n {
                            break;
                        }
                        idx[i] = 0;
                    }
                }
            }
        }
        pts
    }
}
