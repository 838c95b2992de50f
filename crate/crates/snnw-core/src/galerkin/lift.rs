//! Boundary lifting: multiply each trained base function by a limiting
//! function that vanishes on the boundary and is positive inside, so every
//! trial function satisfies the homogeneous Dirichlet condition exactly.
//!
//! On a box the limiting function is the product `prod_i (x_i - lo_i)(hi_i - x_i)`,
//! which reduces to `(x-a)(b-x)` in 1D and `x(1-x)y(1-y)` on the unit square.

use crate::autodiff::Scalar;
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::field::{AnalyticField, FieldScalar};
use crate::network::{SubspaceBasis, Workspace};

/// Limiting function of the box, evaluated in any scalar type.
#[inline]
pub fn lift<S: Scalar, const D: usize>(domain: &BoxDomain<D>, x: &[f64; D]) -> S {
    let mut h = S::from_f64(1.0);
    for i in 0..D {
        let xi = S::seed(x[i], i);
        let a = S::from_f64(domain.lo[i]);
        let b = S::from_f64(domain.hi[i]);
        h = h * (xi - a) * (b - xi);
    }
    h
}

/// A family of functions spanning the trial space, evaluable with jets.
///
/// `Scratch` carries whatever per-thread state evaluation needs, so rules can
/// be evaluated in parallel without interior mutability.
pub trait BasisEval<const D: usize>: Sync {
    type Scratch<S: Scalar>: Send;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn make_scratch<S: Scalar>(&self) -> Self::Scratch<S>;

    /// Evaluate all basis functions at `x` into `out` (length `len()`).
    fn eval_into<S: FieldScalar<D>>(
        &self,
        x: &[f64; D],
        scratch: &mut Self::Scratch<S>,
        out: &mut [S],
    );
}

/// The trained subspace multiplied by the limiting function, plus optional
/// extra columns given directly as functions that already vanish on the
/// boundary (used to plant a known solution in the span).
pub struct LiftedBasis<const D: usize> {
    basis: SubspaceBasis,
    domain: BoxDomain<D>,
    extra: Vec<AnalyticField<D>>,
}

pub struct LiftScratch<S> {
    ws: Workspace<S>,
    raw: Vec<S>,
}

impl<const D: usize> LiftedBasis<D> {
    pub fn new(basis: SubspaceBasis, domain: BoxDomain<D>) -> Result<Self> {
        if basis.input_dim() != D {
            return Err(Error::Config(format!(
                "basis input dimension {} does not match domain dimension {D}",
                basis.input_dim()
            )));
        }
        Ok(Self {
            basis,
            domain,
            extra: Vec::new(),
        })
    }

    /// Append a column that is already zero on the boundary (conceptually
    /// `h * psi` supplied in closed form).
    pub fn push_lifted_column(&mut self, column: AnalyticField<D>) {
        self.extra.push(column);
    }

    pub fn domain(&self) -> &BoxDomain<D> {
        &self.domain
    }

    pub fn network_dim(&self) -> usize {
        self.basis.subspace_dim()
    }
}

impl<const D: usize> BasisEval<D> for LiftedBasis<D> {
    type Scratch<S: Scalar> = LiftScratch<S>;

    fn len(&self) -> usize {
        self.basis.subspace_dim() + self.extra.len()
    }

    fn make_scratch<S: Scalar>(&self) -> LiftScratch<S> {
        LiftScratch {
            ws: self.basis.workspace(),
            raw: vec![S::zero(); self.basis.subspace_dim()],
        }
    }

    fn eval_into<S: FieldScalar<D>>(
        &self,
        x: &[f64; D],
        scratch: &mut LiftScratch<S>,
        out: &mut [S],
    ) {
        let m = self.basis.subspace_dim();
        self.basis.eval_into(x, &mut scratch.ws, &mut scratch.raw);
        let h: S = lift(&self.domain, x);
        for (o, phi) in out[..m].iter_mut().zip(scratch.raw.iter()) {
            *o = h * *phi;
        }
        for (o, col) in out[m..].iter_mut().zip(self.extra.iter()) {
            *o = S::eval_field(col, x);
        }
    }
}
