//! Assembly and solution of the weak-form linear system over a basis.
//!
//! `A_ij = a(phi_j, phi_i)` and `b_i = (f, phi_i)` are approximated with the
//! same quadrature rule used for training. The solve is a rank-revealing
//! least-squares via SVD: trained neural bases are often nearly collinear, so
//! singular values below `tol * sigma_max` are treated as zero and the
//! minimal-norm solution is returned.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::autodiff::Jet1;
use crate::error::{Error, Result};
use crate::field::AnalyticField;
use crate::galerkin::form::BilinearForm;
use crate::galerkin::lift::BasisEval;
use crate::quadrature::QuadratureRule;

/// Default relative rank tolerance for the SVD solve.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Dense weak-form system with solve diagnostics.
#[derive(Clone, Debug)]
pub struct GalerkinSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub omega: Option<DVector<f64>>,
    pub rank: Option<usize>,
    pub residual_norm: Option<f64>,
    pub singular_values: Option<DVector<f64>>,
}

/// `a += s * v * v^T`, `a` in column-major order.
#[inline]
fn rank1_update(a: &mut [f64], v: &[f64], s: f64) {
    let m = v.len();
    for j in 0..m {
        let sj = s * v[j];
        let col = &mut a[j * m..(j + 1) * m];
        for (ai, vi) in col.iter_mut().zip(v.iter()) {
            *ai += sj * vi;
        }
    }
}

/// Assemble `A` and `b` over the quadrature rule.
///
/// Every node contributes independent rank-1 updates; nodes are processed in
/// fixed-size chunks in parallel and the chunk results are combined in node
/// order, so the result is bitwise independent of the thread count.
pub fn assemble<const D: usize, B: BasisEval<D>>(
    basis: &B,
    form: BilinearForm,
    f: &AnalyticField<D>,
    rule: &QuadratureRule,
) -> Result<GalerkinSystem> {
    let m = basis.len();
    if m == 0 {
        return Err(Error::DegenerateBasis("basis has no functions".into()));
    }
    if rule.dim() != D {
        return Err(Error::Config(format!(
            "rule dimension {} does not match problem dimension {D}",
            rule.dim()
        )));
    }

    let n = rule.len();
    let chunk = (n / 32).max(16);
    let starts: Vec<usize> = (0..n).step_by(chunk).collect();

    let partials: Vec<Result<(Vec<f64>, Vec<f64>)>> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + chunk).min(n);
            let mut a_loc = vec![0.0; m * m];
            let mut b_loc = vec![0.0; m];
            let mut scratch = basis.make_scratch::<Jet1<D>>();
            let mut vals = vec![Jet1::<D>::constant(0.0); m];
            let mut comp = vec![0.0; m];
            for q in start..end {
                let x = rule.point::<D>(q);
                basis.eval_into(&x, &mut scratch, &mut vals);
                let w = rule.weight(q);
                let fv = f.eval(&x);
                if !fv.is_finite() {
                    return Err(Error::Assembly(format!(
                        "non-finite source value at node {q} ({x:?})"
                    )));
                }
                for (j, val) in vals.iter().enumerate() {
                    if !crate::autodiff::Scalar::is_finite(*val) {
                        return Err(Error::Assembly(format!(
                            "non-finite basis value at entry ({j}, {j}), node {q} ({x:?})"
                        )));
                    }
                }
                let wf = w * fv;
                for (bj, val) in b_loc.iter_mut().zip(vals.iter()) {
                    *bj += wf * val.v;
                }
                for c in 0..D {
                    let k = form.grad_coeff(c);
                    if k == 0.0 {
                        continue;
                    }
                    for (t, val) in comp.iter_mut().zip(vals.iter()) {
                        *t = val.g[c];
                    }
                    rank1_update(&mut a_loc, &comp, w * k);
                }
                let lambda = form.value_coeff();
                if lambda != 0.0 {
                    for (t, val) in comp.iter_mut().zip(vals.iter()) {
                        *t = val.v;
                    }
                    rank1_update(&mut a_loc, &comp, w * lambda);
                }
            }
            Ok((a_loc, b_loc))
        })
        .collect();

    let mut a_total = vec![0.0; m * m];
    let mut b_total = vec![0.0; m];
    for part in partials {
        let (a_loc, b_loc) = part?;
        for (t, s) in a_total.iter_mut().zip(a_loc.iter()) {
            *t += s;
        }
        for (t, s) in b_total.iter_mut().zip(b_loc.iter()) {
            *t += s;
        }
    }

    for (idx, v) in a_total.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Assembly(format!(
                "non-finite accumulated entry ({}, {})",
                idx % m,
                idx / m
            )));
        }
    }

    let mut a = DMatrix::from_column_slice(m, m, &a_total);
    // The integrand is symmetric, so this is a no-op up to roundoff; applied
    // so the solver sees an exactly symmetric matrix.
    let at = a.transpose();
    a = (a + at) * 0.5;
    let b = DVector::from_column_slice(&b_total);

    Ok(GalerkinSystem {
        a,
        b,
        omega: None,
        rank: None,
        residual_norm: None,
        singular_values: None,
    })
}

impl GalerkinSystem {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Minimal-norm least-squares solve with singular values below
    /// `tol * sigma_max` treated as zero. Records rank, residual norm and the
    /// singular values.
    pub fn solve(&mut self, tol: f64) -> Result<&DVector<f64>> {
        if self.a.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateBasis(
                "stiffness matrix is identically zero".into(),
            ));
        }
        let svd = self.a.clone().svd(true, true);
        let sigma_max = svd.singular_values.max();
        let eps = tol * sigma_max;
        let omega = svd
            .solve(&self.b, eps)
            .map_err(|e| Error::Numerical(format!("SVD solve failed: {e}")))?;
        let omega = DVector::from_column_slice(omega.as_slice());
        self.rank = Some(svd.singular_values.iter().filter(|&&s| s > eps).count());
        self.residual_norm = Some((&self.a * &omega - &self.b).norm());
        self.singular_values = Some(svd.singular_values.clone());
        self.omega = Some(omega);
        Ok(self.omega.as_ref().expect("just set"))
    }

    /// JSON debugging artifact with the full system and solve diagnostics.
    pub fn dump_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Dump<'a> {
            schema: &'static str,
            dim: usize,
            a: Vec<Vec<f64>>,
            b: &'a [f64],
            omega: Option<&'a [f64]>,
            rank: Option<usize>,
            residual_norm: Option<f64>,
            singular_values: Option<&'a [f64]>,
        }
        // A is symmetric after assembly, so rows and columns coincide.
        let cols: Vec<Vec<f64>> = (0..self.a.ncols())
            .map(|j| self.a.column(j).iter().copied().collect())
            .collect();
        let dump = Dump {
            schema: "snnw-system-v1",
            dim: self.dim(),
            a: cols,
            b: self.b.as_slice(),
            omega: self.omega.as_ref().map(|o| o.as_slice()),
            rank: self.rank,
            residual_norm: self.residual_norm,
            singular_values: self.singular_values.as_ref().map(|s| s.as_slice()),
        };
        Ok(serde_json::to_string(&dump)?)
    }
}

/// `u_h(x) = sum_j omega_j phi_j(x)`.
pub fn evaluate_uh<const D: usize, B: BasisEval<D>>(
    basis: &B,
    omega: &[f64],
    x: &[f64; D],
) -> f64 {
    let mut scratch = basis.make_scratch::<f64>();
    let mut vals = vec![0.0; basis.len()];
    basis.eval_into(x, &mut scratch, &mut vals);
    omega.iter().zip(vals.iter()).map(|(o, v)| o * v).sum()
}

/// `u_h` with spatial jets, for diagnostic residual checks.
pub fn evaluate_uh_jet<const D: usize, B: BasisEval<D>>(
    basis: &B,
    omega: &[f64],
    x: &[f64; D],
) -> crate::autodiff::Jet2<D> {
    let mut scratch = basis.make_scratch::<crate::autodiff::Jet2<D>>();
    let mut vals = vec![crate::autodiff::Jet2::<D>::constant(0.0); basis.len()];
    basis.eval_into(x, &mut scratch, &mut vals);
    let mut u = crate::autodiff::Jet2::<D>::constant(0.0);
    for (o, v) in omega.iter().zip(vals.iter()) {
        u = u + v.scale(*o);
    }
    u
}

/// Evaluate `u_h` on many points, in parallel with a deterministic layout.
pub fn evaluate_uh_grid<const D: usize, B: BasisEval<D>>(
    basis: &B,
    omega: &[f64],
    points: &[[f64; D]],
) -> Vec<f64> {
    let chunk = (points.len() / 32).max(64);
    points
        .par_chunks(chunk)
        .map(|pts| {
            let mut scratch = basis.make_scratch::<f64>();
            let mut vals = vec![0.0; basis.len()];
            pts.iter()
                .map(|x| {
                    basis.eval_into(x, &mut scratch, &mut vals);
                    omega.iter().zip(vals.iter()).map(|(o, v)| o * v).sum()
                })
                .collect::<Vec<f64>>()
        })
        .flatten()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Scalar;
    use crate::domain::BoxDomain;
    use crate::galerkin::lift::LiftedBasis;
    use crate::network::{Network, NetworkConfig};
    use crate::quadrature::{gauss_composite, AxisSpec};

    /// `{sin(k pi x)}` on (0,1) — closed-form oracle basis.
    struct SineBasis {
        k_max: usize,
    }

    impl BasisEval<1> for SineBasis {
        type Scratch<S: Scalar> = ();

        fn len(&self) -> usize {
            self.k_max
        }

        fn make_scratch<S: Scalar>(&self) {}

        fn eval_into<S: crate::field::FieldScalar<1>>(
            &self,
            x: &[f64; 1],
            _scratch: &mut (),
            out: &mut [S],
        ) {
            for (k, o) in out.iter_mut().enumerate() {
                let arg = S::seed(x[0], 0).scale((k + 1) as f64 * std::f64::consts::PI);
                *o = arg.sin();
            }
        }
    }

    fn sine_system() -> GalerkinSystem {
        fn source<S: Scalar>(x: &[S; 1]) -> S {
            x[0].scale(std::f64::consts::PI).sin()
        }
        let basis = SineBasis { k_max: 5 };
        let rule = gauss_composite(&[AxisSpec::new(0.0, 1.0, 20, 6)]).unwrap();
        let f: AnalyticField<1> =
            analytic_field!(source).scaled(std::f64::consts::PI * std::f64::consts::PI);
        assemble(&basis, BilinearForm::Poisson, &f, &rule).unwrap()
    }

    #[test]
    fn sine_basis_poisson_stiffness_is_diagonal() {
        let sys = sine_system();
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j {
                    (i + 1) as f64 * (i + 1) as f64 * pi2 / 2.0
                } else {
                    0.0
                };
                assert!(
                    (sys.a[(i, j)] - expect).abs() < 1e-10,
                    "A[{i},{j}] = {} want {expect}",
                    sys.a[(i, j)]
                );
            }
        }
        // b = (pi^2/2, 0, 0, 0, 0)
        assert!((sys.b[0] - pi2 / 2.0).abs() < 1e-10);
        for i in 1..5 {
            assert!(sys.b[i].abs() < 1e-10);
        }
    }

    #[test]
    fn stiffness_is_symmetric() {
        let sys = sine_system();
        let diff = (&sys.a - sys.a.transpose()).norm();
        assert!(diff <= 1e-12 * sys.a.norm());
    }

    #[test]
    fn sine_basis_solve_recovers_fourier_coefficient() {
        let mut sys = sine_system();
        let omega = sys.solve(DEFAULT_RANK_TOL).unwrap();
        assert!((omega[0] - 1.0).abs() < 1e-10);
        for i in 1..5 {
            assert!(omega[i].abs() < 1e-10);
        }
        assert_eq!(sys.rank, Some(5));
        // Galerkin residual surrogate at full rank.
        let bound = 1e-10
            * (sys.a.norm() * sys.omega.as_ref().unwrap().norm() + sys.b.norm());
        assert!(sys.residual_norm.unwrap() <= bound);
    }

    #[test]
    fn identity_system_returns_b() {
        let mut sys = GalerkinSystem {
            a: DMatrix::identity(3, 3),
            b: DVector::from_column_slice(&[0.3, -1.0, 2.5]),
            omega: None,
            rank: None,
            residual_norm: None,
            singular_values: None,
        };
        let omega = sys.solve(DEFAULT_RANK_TOL).unwrap();
        for (o, b) in omega.iter().zip([0.3, -1.0, 2.5]) {
            assert!((o - b).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_system() {
        let mut sys = GalerkinSystem {
            a: DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 2.0, 4.0])),
            b: DVector::from_column_slice(&[1.0, 1.0, 1.0]),
            omega: None,
            rank: None,
            residual_norm: None,
            singular_values: None,
        };
        let omega = sys.solve(DEFAULT_RANK_TOL).unwrap();
        for (o, e) in omega.iter().zip([1.0, 0.5, 0.25]) {
            assert!((o - e).abs() < 1e-14);
        }
    }

    #[test]
    fn duplicated_basis_function_splits_coefficient() {
        // Basis (phi, phi, psi) with a(phi,phi)=1, a(psi,psi)=2, phi ⟂ psi;
        // b chosen in the range. Pseudoinverse (hand-computed oracle):
        // the block [[1,1],[1,1]] has pinv [[0.25,0.25],[0.25,0.25]], so
        // omega = (0.5, 0.5, 1).
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let b = DVector::from_column_slice(&[1.0, 1.0, 2.0]);
        let mut sys = GalerkinSystem {
            a,
            b,
            omega: None,
            rank: None,
            residual_norm: None,
            singular_values: None,
        };
        let omega = sys.solve(DEFAULT_RANK_TOL).unwrap();
        let expect = [0.5, 0.5, 1.0];
        for (o, e) in omega.iter().zip(expect) {
            assert!((o - e).abs() < 1e-10, "omega={omega:?}");
        }
        assert_eq!(sys.rank, Some(2));
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let mut sys = GalerkinSystem {
            a: DMatrix::zeros(3, 3),
            b: DVector::from_column_slice(&[1.0, 0.0, 0.0]),
            omega: None,
            rank: None,
            residual_norm: None,
            singular_values: None,
        };
        assert!(matches!(
            sys.solve(DEFAULT_RANK_TOL),
            Err(Error::DegenerateBasis(_))
        ));
    }

    #[test]
    fn evaluate_uh_trivials() {
        let net = Network::init(NetworkConfig::new(1, 1, 6, 4, 3)).unwrap();
        let dom: BoxDomain<1> = BoxDomain::new([0.0], [2.0]);
        let lifted = LiftedBasis::new(net.freeze_basis(), dom).unwrap();
        // omega = 0 -> u_h = 0
        assert_eq!(evaluate_uh(&lifted, &[0.0; 4], &[0.7]), 0.0);
        // boundary -> 0
        let omega = [0.3, -1.0, 0.5, 2.0];
        assert!(evaluate_uh(&lifted, &omega, &[0.0]).abs() <= 1e-13);
        assert!(evaluate_uh(&lifted, &omega, &[2.0]).abs() <= 1e-13);
        // omega = e_k -> u_h = phi_k
        let mut ek = [0.0; 4];
        ek[2] = 1.0;
        let mut scratch = lifted.make_scratch::<f64>();
        let mut vals = vec![0.0; 4];
        lifted.eval_into(&[1.3], &mut scratch, &mut vals);
        assert!((evaluate_uh(&lifted, &ek, &[1.3]) - vals[2]).abs() < 1e-15);
    }

    #[test]
    fn basis_scaling_leaves_uh_unchanged() {
        // Scaling one sine basis function by c rescales its coefficient by
        // 1/c and leaves u_h pointwise unchanged.
        struct Scaled {
            inner: SineBasis,
            c: f64,
        }
        impl BasisEval<1> for Scaled {
            type Scratch<S: Scalar> = ();
            fn len(&self) -> usize {
                self.inner.len()
            }
            fn make_scratch<S: Scalar>(&self) {}
            fn eval_into<S: crate::field::FieldScalar<1>>(
                &self,
                x: &[f64; 1],
                s: &mut (),
                out: &mut [S],
            ) {
                self.inner.eval_into(x, s, out);
                out[1] = out[1].scale(self.c);
            }
        }
        fn source<S: Scalar>(x: &[S; 1]) -> S {
            let pi = std::f64::consts::PI;
            x[0].scale(pi).sin() + x[0].scale(2.0 * pi).sin().scale(8.0)
        }
        let f: AnalyticField<1> =
            analytic_field!(source).scaled(std::f64::consts::PI * std::f64::consts::PI);
        let rule = gauss_composite(&[AxisSpec::new(0.0, 1.0, 20, 6)]).unwrap();

        let plain = SineBasis { k_max: 4 };
        let mut s1 = assemble(&plain, BilinearForm::Poisson, &f, &rule).unwrap();
        let o1 = s1.solve(DEFAULT_RANK_TOL).unwrap().clone();

        let scaled = Scaled {
            inner: SineBasis { k_max: 4 },
            c: 37.0,
        };
        let mut s2 = assemble(&scaled, BilinearForm::Poisson, &f, &rule).unwrap();
        let o2 = s2.solve(DEFAULT_RANK_TOL).unwrap().clone();

        assert!((o1[1] / 37.0 - o2[1]).abs() < 1e-10);
        for &x in &[0.21, 0.5, 0.77] {
            let u1 = evaluate_uh(&plain, o1.as_slice(), &[x]);
            let u2 = evaluate_uh(&scaled, o2.as_slice(), &[x]);
            assert!((u1 - u2).abs() < 1e-10);
        }
    }

    #[test]
    fn stiffness_is_positive_semidefinite() {
        let net = Network::init(NetworkConfig::new(2, 1, 8, 10, 11)).unwrap();
        let dom: BoxDomain<2> = BoxDomain::new([0.0, 0.0], [1.0, 1.0]);
        let lifted = LiftedBasis::new(net.freeze_basis(), dom).unwrap();
        fn zero<S: Scalar>(_x: &[S; 2]) -> S {
            S::from_f64(0.0)
        }
        let f: AnalyticField<2> = analytic_field!(zero);
        let rule = gauss_composite(&dom.axis_specs(6, 4)).unwrap();
        for form in [
            BilinearForm::Poisson,
            BilinearForm::Helmholtz { lambda: 1.0 },
            BilinearForm::Anisotropic { k1: 1.0, k2: 1e6 },
        ] {
            let sys = assemble(&lifted, form, &f, &rule).unwrap();
            let eig = nalgebra::SymmetricEigen::new(sys.a.clone());
            let min = eig.eigenvalues.min();
            assert!(
                min >= -1e-10 * sys.a.norm(),
                "min eigenvalue {min} for {form:?}"
            );
        }
    }
}
