//! Composite Gauss–Legendre quadrature on intervals and tensor-product boxes.
//!
//! Nodes and weights for the base rule are computed at construction time by
//! Newton iteration on the Legendre polynomial (tolerance 1e-15), so any order
//! up to 32 is available without tables. A composite rule partitions each axis
//! into equal subintervals and maps the base rule affinely onto each.

use crate::error::{Error, Result};

/// Per-axis specification of a composite rule.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AxisSpec {
    pub a: f64,
    pub b: f64,
    /// Number of equal subintervals.
    pub n_sub: usize,
    /// Gauss points per subinterval.
    pub n_pts: usize,
}

impl AxisSpec {
    pub fn new(a: f64, b: f64, n_sub: usize, n_pts: usize) -> Self {
        Self { a, b, n_sub, n_pts }
    }
}

/// Immutable tensor-product quadrature rule.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    dim: usize,
    /// Node coordinates, flat row-major: node q occupies `[q*dim, (q+1)*dim)`.
    nodes: Vec<f64>,
    weights: Vec<f64>,
    axes: Vec<AxisSpec>,
}

pub const MAX_GAUSS_ORDER: usize = 32;

/// Gauss–Legendre nodes and weights on [-1, 1].
///
/// Roots of P_n found by Newton from the Chebyshev-like initial guess; the
/// node set is exactly symmetric because only the negative half is iterated
/// and the rest mirrored.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > MAX_GAUSS_ORDER {
        return Err(Error::Config(format!(
            "unsupported Gauss order {n} (expected 1..={MAX_GAUSS_ORDER})"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        // k-th root counted from -1.
        let mut x = -(std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-15 {
                break;
            }
        }
        // Polish once more and take the derivative at the converged root.
        let (p, d) = legendre_with_derivative(n, x);
        x -= p / d;
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = x;
        weights[k] = w;
        nodes[n - 1 - k] = -x;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for j in 2..=n {
        let jf = j as f64;
        let p_next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = p_next;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// Build a composite Gauss–Legendre rule over the box defined by `axes`.
pub fn gauss_composite(axes: &[AxisSpec]) -> Result<QuadratureRule> {
    if axes.is_empty() {
        return Err(Error::Config("quadrature rule needs at least one axis".into()));
    }
    let mut per_axis: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(axes.len());
    for ax in axes {
        if ax.n_sub == 0 {
            return Err(Error::Config("n_sub must be >= 1".into()));
        }
        if !(ax.a < ax.b) {
            return Err(Error::Config(format!(
                "invalid axis bounds [{}, {}]",
                ax.a, ax.b
            )));
        }
        let (base_x, base_w) = gauss_legendre(ax.n_pts)?;
        let width = (ax.b - ax.a) / ax.n_sub as f64;
        let mut xs = Vec::with_capacity(ax.n_sub * ax.n_pts);
        let mut ws = Vec::with_capacity(ax.n_sub * ax.n_pts);
        for s in 0..ax.n_sub {
            let lo = ax.a + s as f64 * width;
            let mid = lo + 0.5 * width;
            let half = 0.5 * width;
            for (x, w) in base_x.iter().zip(&base_w) {
                xs.push(mid + half * x);
                ws.push(half * w);
            }
        }
        per_axis.push((xs, ws));
    }

    let dim = axes.len();
    let total: usize = per_axis.iter().map(|(xs, _)| xs.len()).product();
    let mut nodes = Vec::with_capacity(total * dim);
    let mut weights = Vec::with_capacity(total);
    let mut index = vec![0usize; dim];
    for _ in 0..total {
        let mut w = 1.0;
        for (d, (xs, ws)) in per_axis.iter().enumerate() {
            nodes.push(xs[index[d]]);
            w *= ws[index[d]];
        }
        weights.push(w);
        // Odometer increment, last axis fastest.
        for d in (0..dim).rev() {
            index[d] += 1;
            if index[d] < per_axis[d].0.len() {
                break;
            }
            index[d] = 0;
        }
    }

    Ok(QuadratureRule {
        dim,
        nodes,
        weights,
        axes: axes.to_vec(),
    })
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    #[inline]
    pub fn node(&self, q: usize) -> &[f64] {
        &self.nodes[q * self.dim..(q + 1) * self.dim]
    }

    /// Node `q` as a fixed-size point. Panics if `D != dim`.
    #[inline]
    pub fn point<const D: usize>(&self, q: usize) -> [f64; D] {
        assert_eq!(D, self.dim, "rule dimension mismatch");
        std::array::from_fn(|i| self.nodes[q * self.dim + i])
    }

    #[inline]
    pub fn weight(&self, q: usize) -> f64 {
        self.weights[q]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Volume of the underlying box.
    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|ax| ax.b - ax.a).product()
    }

    /// `sum_q w_q g(x_q)`, failing loudly on a non-finite integrand value.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut g: F) -> Result<f64> {
        let mut acc = 0.0;
        for q in 0..self.len() {
            let x = self.node(q);
            let v = g(x);
            if !v.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite integrand value {v} at node {x:?}"
                )));
            }
            acc += self.weights[q] * v;
        }
        Ok(acc)
    }
}
