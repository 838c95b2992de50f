//! Closed-form scalar fields evaluable as plain values or jets.
//!
//! Problems carry their source term and exact solution as [`AnalyticField`]s:
//! a set of monomorphized function pointers (one per scalar type) plus a
//! scale factor, so parametrized fields like `(k1 + k2) * pi^2 * sin(pi x) sin(pi y)`
//! need no boxing.

use crate::autodiff::{Jet1, Jet2, Scalar};

/// A closed-form field `scale * base(x)` with exact jet evaluation.
#[derive(Clone, Copy)]
pub struct AnalyticField<const D: usize> {
    pub scale: f64,
    pub value: fn(&[f64; D]) -> f64,
    pub jet1: fn(&[f64; D]) -> Jet1<D>,
    pub jet2: fn(&[f64; D]) -> Jet2<D>,
}

impl<const D: usize> std::fmt::Debug for AnalyticField<D> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticField")
            .field("scale", &self.scale)
            .finish_non_exhaustive()
    }
}

impl<const D: usize> AnalyticField<D> {
    pub fn eval(&self, x: &[f64; D]) -> f64 {
        self.scale * (self.value)(x)
    }

    pub fn eval_jet1(&self, x: &[f64; D]) -> Jet1<D> {
        (self.jet1)(x).scale(self.scale)
    }

    pub fn eval_jet2(&self, x: &[f64; D]) -> Jet2<D> {
        (self.jet2)(x).scale(self.scale)
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self
    }
}

/// Defines an [`AnalyticField`] from a function generic over [`Scalar`]:
/// `analytic_field!(name)` where `fn name<S: Scalar>(x: &[S; D]) -> S`.
#[macro_export]
macro_rules! analytic_field {
    ($f:path) => {
        $crate::field::AnalyticField {
            scale: 1.0,
            value: |x| $f(&$crate::autodiff::seed_point::<f64, _>(x)),
            jet1: |x| $f(&$crate::autodiff::seed_point::<$crate::autodiff::Jet1<_>, _>(x)),
            jet2: |x| $f(&$crate::autodiff::seed_point::<$crate::autodiff::Jet2<_>, _>(x)),
        }
    };
}

/// Scalar types that can evaluate an [`AnalyticField`] of matching dimension.
pub trait FieldScalar<const D: usize>: Scalar {
    fn eval_field(field: &AnalyticField<D>, x: &[f64; D]) -> Self;
}

impl<const D: usize> FieldScalar<D> for f64 {
    fn eval_field(field: &AnalyticField<D>, x: &[f64; D]) -> Self {
        field.eval(x)
    }
}

impl<const D: usize> FieldScalar<D> for Jet1<D> {
    fn eval_field(field: &AnalyticField<D>, x: &[f64; D]) -> Self {
        field.eval_jet1(x)
    }
}

impl<const D: usize> FieldScalar<D> for Jet2<D> {
    fn eval_field(field: &AnalyticField<D>, x: &[f64; D]) -> Self {
        field.eval_jet2(x)
    }
}
