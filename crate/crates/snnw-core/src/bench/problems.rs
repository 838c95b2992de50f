//! Benchmark problem definitions with manufactured solutions.
//!
//! Every problem is homogeneous Dirichlet (`g = 0` on the boundary): the exact
//! solution vanishes on the box boundary, so the multiplicative lifting in
//! [`crate::galerkin::lift`] applies to all of them.

use std::f64::consts::PI;

use crate::analytic_field;
use crate::autodiff::Scalar;
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::field::AnalyticField;
use crate::galerkin::BilinearForm;

/// A PDE benchmark: domain, operator, source, and exact solution.
#[derive(Clone, Debug)]
pub struct ProblemSpec<const D: usize> {
    pub name: &'static str,
    pub domain: BoxDomain<D>,
    pub form: BilinearForm,
    /// Source term `f` (manufactured from `exact`).
    pub f: AnalyticField<D>,
    /// Exact solution `u*`; zero on the domain boundary.
    pub exact: AnalyticField<D>,
}

fn helm_exact<S: Scalar>(x: &[S; 1]) -> S {
    x[0].scale(3.0 * PI).sin() + (x[0].scale(4.0 * PI) + S::from_f64(0.5 * PI)).cos()
}

fn helm_source<S: Scalar>(x: &[S; 1]) -> S {
    x[0].scale(3.0 * PI).sin().scale(9.0 * PI * PI + 1.0)
        + (x[0].scale(4.0 * PI) + S::from_f64(0.5 * PI))
            .cos()
            .scale(16.0 * PI * PI + 1.0)
}

/// 1D Helmholtz `-u'' + u = f` on (0, 2) with
/// `u*(x) = sin(3 pi x) + cos(4 pi x + pi/2)`.
pub fn problem_helmholtz() -> ProblemSpec<1> {
    ProblemSpec {
        name: "helmholtz",
        domain: BoxDomain::new([0.0], [2.0]),
        form: BilinearForm::Helmholtz { lambda: 1.0 },
        f: analytic_field!(helm_source),
        exact: analytic_field!(helm_exact),
    }
}

fn sin_sin<S: Scalar>(x: &[S; 2]) -> S {
    x[0].scale(PI).sin() * x[1].scale(PI).sin()
}

/// Poisson `-Laplace(u) = f` on (0,1)^2 with `u*(x,y) = sin(pi x) sin(pi y)`.
pub fn problem_poisson2d() -> ProblemSpec<2> {
    ProblemSpec {
        name: "poisson2d",
        domain: BoxDomain::new([0.0, 0.0], [1.0, 1.0]),
        form: BilinearForm::Poisson,
        f: analytic_field!(sin_sin).scaled(2.0 * PI * PI),
        exact: analytic_field!(sin_sin),
    }
}

/// Anisotropic diffusion `-div(diag(k1,k2) grad u) = f` on (0,1)^2 with the
/// same exact solution as the Poisson problem, so `f = (k1+k2) pi^2 u*`.
pub fn problem_anisotropic(k1: f64, k2: f64) -> Result<ProblemSpec<2>> {
    if !(k1 > 0.0) || !(k2 > 0.0) {
        return Err(Error::Config(format!(
            "diffusion coefficients must be positive, got k1={k1}, k2={k2}"
        )));
    }
    Ok(ProblemSpec {
        name: "anisotropic",
        domain: BoxDomain::new([0.0, 0.0], [1.0, 1.0]),
        form: BilinearForm::Anisotropic { k1, k2 },
        f: analytic_field!(sin_sin).scaled((k1 + k2) * PI * PI),
        exact: analytic_field!(sin_sin),
    })
}

/// Van der Corput radical inverse in the given base.
fn radical_inverse(mut index: usize, base: usize) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while index > 0 {
        result += f * (index % base) as f64;
        index /= base;
        f /= base as f64;
    }
    result
}

/// Quasi-random interior points (Halton sequence, bases 2 and 3), strictly
/// inside the box because the sequence never hits 0 or 1 for index >= 1.
pub fn interior_quasi_random<const D: usize>(domain: &BoxDomain<D>, n: usize) -> Vec<[f64; D]> {
    const BASES: [usize; 2] = [2, 3];
    assert!(D <= BASES.len(), "quasi-random points support up to 2D");
    (1..=n)
        .map(|i| {
            let mut p = [0.0; D];
            for (d, b) in BASES.iter().take(D).enumerate() {
                let t = radical_inverse(i, *b);
                p[d] = domain.lo[d] + t * (domain.hi[d] - domain.lo[d]);
            }
            p
        })
        .collect()
}

/// Verify `|A u*(x) - f(x)| <= tol` at `n` quasi-random interior points,
/// with the strong-form residual taken from jets of the closed-form exact
/// solution.
pub fn check_manufactured_consistency<const D: usize>(
    problem: &ProblemSpec<D>,
    n: usize,
    tol: f64,
) -> Result<()> {
    for x in interior_quasi_random(&problem.domain, n) {
        let u = problem.exact.eval_jet2(&x);
        let r = problem.form.strong_residual(&u, problem.f.eval(&x));
        if r.abs() > tol {
            return Err(Error::Numerical(format!(
                "manufactured solution inconsistent at {x:?}: residual {r}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helmholtz_point_values() {
        let p = problem_helmholtz();
        // u*(0.5) = sin(1.5 pi) + cos(2.5 pi) = -1
        assert!((p.exact.eval(&[0.5]) - (-1.0)).abs() < 1e-14);
        // boundary values vanish
        assert!(p.exact.eval(&[0.0]).abs() < 1e-15);
        assert!(p.exact.eval(&[2.0]).abs() < 1e-13);
    }

    #[test]
    fn helmholtz_source_matches_fd_laplacian_of_exact() {
        let p = problem_helmholtz();
        let h = 1e-5;
        for &x in &[0.31, 0.9, 1.47] {
            let u = |x: f64| p.exact.eval(&[x]);
            let uxx = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h);
            let f_expect = -uxx + u(x);
            let f = p.f.eval(&[x]);
            assert!(
                (f - f_expect).abs() / f.abs().max(1.0) < 1e-5,
                "x={x}: f={f} fd={f_expect}"
            );
        }
    }

    #[test]
    fn poisson_point_values() {
        let p = problem_poisson2d();
        assert!((p.exact.eval(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
        assert!((p.f.eval(&[0.5, 0.5]) - 2.0 * PI * PI).abs() < 1e-12);
        // all four edges
        for t in [0.0, 0.3, 1.0] {
            for edge in [[0.0, t], [1.0, t], [t, 0.0], [t, 1.0]] {
                assert!(p.exact.eval(&edge).abs() < 1e-15, "u* != 0 at {edge:?}");
            }
        }
    }

    #[test]
    fn anisotropic_reduces_to_poisson_at_unit_ratio() {
        let a = problem_anisotropic(1.0, 1.0).unwrap();
        let p = problem_poisson2d();
        for pt in [[0.2, 0.7], [0.5, 0.5], [0.9, 0.1]] {
            assert_eq!(a.f.eval(&pt), p.f.eval(&pt));
            assert_eq!(a.exact.eval(&pt), p.exact.eval(&pt));
        }
        assert_eq!(a.form.grad_coeff(0), 1.0);
        assert_eq!(a.form.grad_coeff(1), 1.0);
    }

    #[test]
    fn anisotropic_source_value() {
        let a = problem_anisotropic(1.0, 10.0).unwrap();
        assert!((a.f.eval(&[0.5, 0.5]) - 11.0 * PI * PI).abs() < 1e-11);
    }

    #[test]
    fn anisotropic_rejects_nonpositive_coefficients() {
        assert!(problem_anisotropic(0.0, 1.0).is_err());
        assert!(problem_anisotropic(1.0, -2.0).is_err());
    }

    #[test]
    fn extreme_ratio_constructs() {
        let a = problem_anisotropic(1.0, 1e6).unwrap();
        assert!(a.f.eval(&[0.5, 0.5]).is_finite());
    }

    #[test]
    fn manufactured_consistency_all_problems() {
        check_manufactured_consistency(&problem_helmholtz(), 100, 1e-8).unwrap();
        check_manufactured_consistency(&problem_poisson2d(), 100, 1e-8).unwrap();
        check_manufactured_consistency(&problem_anisotropic(1.0, 1e3).unwrap(), 100, 1e-8)
            .unwrap();
    }

    #[test]
    fn halton_points_are_interior() {
        let dom: BoxDomain<2> = BoxDomain::new([0.0, 0.0], [1.0, 1.0]);
        let pts = interior_quasi_random(&dom, 100);
        assert_eq!(pts.len(), 100);
        for p in pts {
            assert!(p[0] > 0.0 && p[0] < 1.0 && p[1] > 0.0 && p[1] < 1.0);
        }
    }
}
