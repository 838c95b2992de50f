//! Bilinear forms of the benchmark operators and their pointwise integrands.
//!
//! Each operator `A u = -div(kappa grad u) + lambda u` (with diagonal kappa)
//! induces the symmetric form `a(u, v) = int sum_c k_c du/dx_c dv/dx_c + lambda u v`.
//! The same coefficients drive the strong-form residual used by the
//! collocation and L2 losses, and the Ritz energy used by the variational
//! loss, so everything derives from [`BilinearForm::grad_coeff`] /
//! [`BilinearForm::value_coeff`].

use crate::autodiff::{Jet1, Jet2};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BilinearForm {
    /// `-Laplace(u)`: `a(u,v) = int grad u . grad v`.
    Poisson,
    /// `-u'' + lambda u`: `a(u,v) = int u'v' + lambda u v`.
    Helmholtz { lambda: f64 },
    /// `-div(diag(k1,k2) grad u)`: `a(u,v) = int k1 u_x v_x + k2 u_y v_y`.
    Anisotropic { k1: f64, k2: f64 },
}

impl BilinearForm {
    /// Diffusion coefficient on the given axis.
    #[inline]
    pub fn grad_coeff(&self, axis: usize) -> f64 {
        match *self {
            BilinearForm::Poisson | BilinearForm::Helmholtz { .. } => 1.0,
            BilinearForm::Anisotropic { k1, k2 } => {
                if axis == 0 {
                    k1
                } else {
                    k2
                }
            }
        }
    }

    /// Coefficient of the zero-order `u v` term.
    #[inline]
    pub fn value_coeff(&self) -> f64 {
        match *self {
            BilinearForm::Helmholtz { lambda } => lambda,
            _ => 0.0,
        }
    }

    /// Strong-form residual `A u - f` from a second-order jet of `u`.
    #[inline]
    pub fn strong_residual<const D: usize>(&self, u: &Jet2<D>, f: f64) -> f64 {
        let mut diff = 0.0;
        for c in 0..D {
            diff += self.grad_coeff(c) * u.h[c];
        }
        self.value_coeff() * u.v - diff - f
    }

    /// Cotangent of the strong-form residual with respect to the components
    /// of `u`'s jet, scaled by `scale`.
    #[inline]
    pub fn residual_cotangent<const D: usize>(&self, scale: f64) -> Jet2<D> {
        let mut cot = Jet2::constant(self.value_coeff() * scale);
        for c in 0..D {
            cot.h[c] = -self.grad_coeff(c) * scale;
        }
        cot
    }

    /// Pointwise integrand of the Ritz energy `1/2 a(u,u) - (f,u)`.
    #[inline]
    pub fn energy_integrand<const D: usize>(&self, u: &Jet1<D>, f: f64) -> f64 {
        let mut quad = self.value_coeff() * u.v * u.v;
        for c in 0..D {
            quad += self.grad_coeff(c) * u.g[c] * u.g[c];
        }
        0.5 * quad - f * u.v
    }

    /// Cotangent of [`BilinearForm::energy_integrand`] with respect to `u`'s
    /// jet components, scaled by `scale`.
    #[inline]
    pub fn energy_cotangent<const D: usize>(&self, u: &Jet1<D>, f: f64, scale: f64) -> Jet1<D> {
        let mut cot = Jet1::constant((self.value_coeff() * u.v - f) * scale);
        for c in 0..D {
            cot.g[c] = self.grad_coeff(c) * u.g[c] * scale;
        }
        cot
    }

    /// Pointwise integrand of `a(u, v)` from first-order jets.
    #[inline]
    pub fn weak_integrand<const D: usize>(&self, u: &Jet1<D>, v: &Jet1<D>) -> f64 {
        let mut s = self.value_coeff() * u.v * v.v;
        for c in 0..D {
            s += self.grad_coeff(c) * u.g[c] * v.g[c];
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weak_integrand_is_symmetric() {
        let u = Jet1::<2> {
            v: 0.7,
            g: [1.0, -2.0],
        };
        let v = Jet1::<2> {
            v: -0.3,
            g: [0.5, 4.0],
        };
        for form in [
            BilinearForm::Poisson,
            BilinearForm::Helmholtz { lambda: 1.7 },
            BilinearForm::Anisotropic { k1: 1.0, k2: 1e6 },
        ] {
            assert_eq!(form.weak_integrand(&u, &v), form.weak_integrand(&v, &u));
        }
    }

    #[test]
    fn helmholtz_residual() {
        // u jet with value 2, u'' = 3; residual of -u'' + u - f at f = 1.
        let u = Jet2::<1> {
            v: 2.0,
            g: [0.5],
            h: [3.0],
        };
        let form = BilinearForm::Helmholtz { lambda: 1.0 };
        assert_eq!(form.strong_residual(&u, 1.0), -3.0 + 2.0 - 1.0);
    }

    #[test]
    fn anisotropic_axis_coefficients() {
        let form = BilinearForm::Anisotropic { k1: 2.0, k2: 5.0 };
        assert_eq!(form.grad_coeff(0), 2.0);
        assert_eq!(form.grad_coeff(1), 5.0);
        assert_eq!(form.value_coeff(), 0.0);
    }

    #[test]
    fn energy_cotangent_differentiates_integrand() {
        // Finite-difference check of d(integrand)/d(components).
        let form = BilinearForm::Anisotropic { k1: 3.0, k2: 0.5 };
        let u = Jet1::<2> {
            v: 0.9,
            g: [-1.2, 2.2],
        };
        let f = 0.7;
        let cot = form.energy_cotangent(&u, f, 1.0);
        let h = 1e-7;
        let mut up = u;
        up.v += h;
        let fd_v = (form.energy_integrand(&up, f) - form.energy_integrand(&u, f)) / h;
        assert!((cot.v - fd_v).abs() < 1e-6);
        for c in 0..2 {
            let mut ug = u;
            ug.g[c] += h;
            let fd = (form.energy_integrand(&ug, f) - form.energy_integrand(&u, f)) / h;
            assert!((cot.g[c] - fd).abs() < 1e-5);
        }
    }
}
