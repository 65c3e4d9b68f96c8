//! Specialization to symmetric +/-1 coordinates.
//!
//! On these models the coordinate Laplacian factors as
//! `lap_k U = X_k * D_k U`, where `D_k` is the two-point derivative
//! `(U at X_k = +1  minus  U at X_k = -1) / 2`. Since `D_k U` does not
//! depend on `X_k`, the covariation matrix can be rewritten with
//! derivatives and strictly-past / strictly-future conditionings, which
//! is the form the d2/d3 bounds below consume.

use crate::bounds::{
    specialized_report, BoundForm, BoundMethod, BoundReport, BoundStats, GaussianTarget,
    StatsMode, SQRT_2PI,
};
use crate::error::{Error, Result};
use crate::table::{CovariationSummary, JointTable, RandomVariableTable};

/// A product model qualifies when every coordinate is {+1, -1} with
/// probabilities 1/2 (within 1e-15).
pub fn require_rademacher(table: &JointTable) -> Result<()> {
    for (k, c) in table.space().model().components().iter().enumerate() {
        let atoms = c.atoms().ok_or(Error::NotExactMode)?;
        let ok = atoms.len() == 2
            && atoms.iter().any(|a| a.value == 1.0)
            && atoms.iter().any(|a| a.value == -1.0)
            && atoms.iter().all(|a| (a.prob - 0.5).abs() <= 1e-15);
        if !ok {
            return Err(Error::InvalidSpec(format!(
                "coordinate {k} is not a symmetric sign variable"
            )));
        }
    }
    Ok(())
}

/// Two-point derivative in coordinate `k`:
/// `(U at x_k = +1  minus  U at x_k = -1) / 2`.
///
/// The output is constant along coordinate `k`.
pub fn malliavin_derivative(u: &RandomVariableTable, k: usize) -> Result<RandomVariableTable> {
    let space = u.space().clone();
    if k >= space.n() {
        return Err(Error::CoordinateOutOfRange { k, n: space.n() });
    }
    let atoms = space
        .model()
        .component(k)
        .atoms()
        .ok_or(Error::NotExactMode)?;
    let plus = atoms.iter().position(|a| a.value == 1.0);
    let minus = atoms.iter().position(|a| a.value == -1.0);
    let (plus, minus) = match (plus, minus, atoms.len()) {
        (Some(p), Some(m), 2) => (p, m),
        _ => {
            return Err(Error::InvalidSpec(format!(
                "coordinate {k} is not a two-point +/-1 variable"
            )))
        }
    };
    // reuse the substitution arithmetic of integrate_coord: pick out the
    // two fiber values directly
    let strides_k = {
        // digit stride for coordinate k
        let mut s = 1usize;
        for j in (k + 1)..space.n() {
            s *= space.model().component(j).atoms().unwrap().len();
        }
        s
    };
    let size = atoms.len();
    let vals = (0..space.len())
        .map(|idx| {
            let digit = (idx / strides_k) % size;
            let base = idx - digit * strides_k;
            0.5 * (u.at(base + plus * strides_k) - u.at(base + minus * strides_k))
        })
        .collect();
    Ok(RandomVariableTable::new(space, vals))
}

/// The derivative covariation matrix at mixing weight `alpha`: entry
/// `(i, j)` is
/// `sum_k D_k F_i * (alpha E[D_k F_j | first k-1 coords] + (1-alpha) E[D_k F_j | coords k+1..])`.
///
/// Because `D_k` is independent of coordinate `k`, this equals the
/// generic covariation matrix pointwise.
pub fn derivative_covariation(table: &JointTable, alpha: f64) -> Result<CovariationSummary> {
    require_rademacher(table)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let d = table.dim();
    let n = table.space().n();
    let m = table.len();
    let comps: Vec<RandomVariableTable> = (0..d).map(|i| table.component(i)).collect();
    let mut acc: Vec<Vec<f64>> = vec![vec![0.0; m]; d * d];
    for k in 0..n {
        let derivs: Vec<RandomVariableTable> = comps
            .iter()
            .map(|c| malliavin_derivative(c, k))
            .collect::<Result<_>>()?;
        // strictly-past: condition on coordinates 0..k; strictly-future:
        // condition on coordinates k+1..
        let mixed: Vec<RandomVariableTable> = derivs
            .iter()
            .map(|dk| {
                let past = dk.cond_past(k)?;
                let future = dk.cond_future(k + 1)?;
                Ok(past.zip_with(&future, |p, f| alpha * p + (1.0 - alpha) * f))
            })
            .collect::<Result<_>>()?;
        for i in 0..d {
            for j in 0..d {
                let dst = &mut acc[i * d + j];
                let a = derivs[i].values();
                let b = mixed[j].values();
                for idx in 0..m {
                    dst[idx] += a[idx] * b[idx];
                }
            }
        }
    }
    let tables: Vec<RandomVariableTable> = acc
        .into_iter()
        .map(|vals| RandomVariableTable::new(table.space().clone(), vals))
        .collect();
    Ok(CovariationSummary::new_from_tables(d, tables))
}

/// Per-coordinate sums `sum_k E|D_k F_i|^3`. On sign models these agree
/// with the Laplacian third moments.
pub fn derivative_third_moment_sums(table: &JointTable) -> Result<Vec<f64>> {
    require_rademacher(table)?;
    let n = table.space().n();
    let mut out = vec![0.0; table.dim()];
    for (i, item) in out.iter_mut().enumerate() {
        let c = table.component(i);
        for k in 0..n {
            *item += malliavin_derivative(&c, k)?.abs_moment(3.0);
        }
    }
    Ok(out)
}

/// d2 and d3 distance bounds for a vector of sign functionals.
#[derive(Debug, Clone)]
pub struct RademacherBounds {
    /// Bound on the distance over test functions with first three
    /// derivative sups at most 1.
    pub d3: BoundReport,
    /// Bound on the distance over (Lipschitz, Hessian)-bounded test
    /// functions; requires a positive definite target.
    pub d2: Option<BoundReport>,
    /// Why `d2` is absent, when it is.
    pub d2_skipped: Option<String>,
}

/// Assemble the d3 bound
/// `(d/2) sqrt(sum_ij E|C_ij - T_ij|^2) + (d^2/3) sum_ik E|D_k F_i|^3`
/// and, when `C` is positive definite, the d2 bound with constants
/// `||C^-1||_op ||C||_op^{1/2}` and
/// `sqrt(2 pi) ||C^-1||_op^{3/2} ||C||_op d^2 / 4`.
pub fn rademacher_bounds(
    table: &JointTable,
    target: &GaussianTarget,
    alpha: f64,
) -> Result<RademacherBounds> {
    require_rademacher(table)?;
    if table.dim() != target.dim() {
        return Err(Error::InvalidSpec(
            "statistic and target dimensions differ".into(),
        ));
    }
    let d = table.dim();
    let df = d as f64;
    let t = derivative_covariation(table, alpha)?;
    let third: f64 = derivative_third_moment_sums(table)?.iter().sum();

    let mut sq_dev = 0.0;
    for i in 0..d {
        for j in 0..d {
            sq_dev += t.table(i, j).mean_sq_dev_from(target.entry(i, j));
        }
    }
    let dev = sq_dev.sqrt();

    let d3 = specialized_report(
        "rademacher-d3",
        BoundMethod::Slepian,
        BoundForm::Aggregate,
        alpha,
        vec![
            ("covariance_mismatch", df / 2.0 * dev),
            ("third_moment_term", df * df / 3.0 * third),
        ],
        vec![("deviation_coeff", df / 2.0), ("third_coeff", df * df / 3.0)],
        StatsMode::Exact,
    );

    let (d2, d2_skipped) = match target.inv_op_norm() {
        Some(inv) => {
            let op = target.op_norm();
            let c1 = inv * op.sqrt();
            let c2 = SQRT_2PI * inv.powf(1.5) * op * df * df / 4.0;
            let report = specialized_report(
                "rademacher-d2",
                BoundMethod::Stein,
                BoundForm::Aggregate,
                alpha,
                vec![
                    ("covariance_mismatch", c1 * dev),
                    ("third_moment_term", c2 * third),
                ],
                vec![("deviation_coeff", c1), ("third_coeff", c2)],
                StatsMode::Exact,
            );
            (Some(report), None)
        }
        None => (
            None,
            Some("target covariance is not positive definite".to_string()),
        ),
    };

    Ok(RademacherBounds { d3, d2, d2_skipped })
}

/// The generic aggregated assembly evaluated with the derivative
/// covariation, used to cross-check the specialized constants.
pub fn d3_via_generic_stats(
    table: &JointTable,
    target: &GaussianTarget,
    alpha: f64,
) -> Result<f64> {
    let stats = BoundStats::exact(table, alpha)?;
    let d = stats.dim as f64;
    let mut sq = 0.0;
    for i in 0..stats.dim {
        for j in 0..stats.dim {
            sq += stats.mean_sq_dev(i, j, target.entry(i, j));
        }
    }
    Ok(d / 2.0 * sq.sqrt() + d * d / 3.0 * stats.third_total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ComponentDistribution, ProductModel};
    use crate::statistic::StatisticVector;

    fn table(n: usize, stat: &StatisticVector) -> JointTable {
        JointTable::build(&ProductModel::rademacher(n), stat).unwrap()
    }

    #[test]
    fn rejects_non_sign_models() {
        let model = ProductModel::bernoulli(0.5, 2).unwrap();
        let t = JointTable::build(&model, &StatisticVector::scalar(|x| x[0])).unwrap();
        assert!(require_rademacher(&t).is_err());
        assert!(malliavin_derivative(&t.component(0), 0).is_err());
    }

    #[test]
    fn derivative_two_point_examples() {
        let t = table(2, &StatisticVector::monomial(vec![0, 1]));
        let d0 = malliavin_derivative(&t.component(0), 0).unwrap();
        // D_0 (X0 X1) = X1; assignment (1, -1) is index 1
        assert_eq!(d0.at(1), -1.0);

        let stat = StatisticVector::scalar(|x| x[0] + x[0] * x[1]);
        let t = table(2, &stat);
        let d0 = malliavin_derivative(&t.component(0), 0).unwrap();
        // D_0 = 1 + X1, zero at X1 = -1
        assert_eq!(d0.at(1), 0.0);
        assert_eq!(d0.at(0), 2.0);

        // independent of the differentiated coordinate
        let d1 = malliavin_derivative(&t.component(0), 1).unwrap();
        for idx in 0..4 {
            let flipped = idx ^ 1; // coordinate 1 is fastest
            assert_eq!(d1.at(idx), d1.at(flipped));
        }

        let c = RandomVariableTable::constant(t.space().clone(), 2.0);
        assert_eq!(malliavin_derivative(&c, 1).unwrap().values(), &[0.0; 4]);
    }

    #[test]
    fn laplacian_factors_through_derivative() {
        let stat = StatisticVector::scalar(|x| x[0] * x[1] + 0.5 * x[1] * x[2] - x[2]);
        let t = table(3, &stat);
        let u = t.component(0);
        for k in 0..3 {
            let lap = u.laplacian(k).unwrap();
            let deriv = malliavin_derivative(&u, k).unwrap();
            for idx in 0..t.len() {
                let xk = t.space().assignment(idx)[k];
                assert!(
                    (lap.at(idx) - xk * deriv.at(idx)).abs() <= 1e-12,
                    "k={k} idx={idx}"
                );
            }
        }
    }

    #[test]
    fn derivative_covariation_matches_generic() {
        let stat = StatisticVector::new(2, |x| {
            vec![x[0] * x[1] - 0.3 * x[2], x[1] + x[0] * x[2]]
        });
        let t = table(3, &stat);
        for &alpha in &[0.0, 0.5, 1.0] {
            let z = t.covariation(alpha).unwrap();
            let tt = derivative_covariation(&t, alpha).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        z.table(i, j).max_abs_diff(tt.table(i, j)) <= 1e-10,
                        "alpha={alpha} i={i} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn covariation_examples() {
        let t = table(2, &StatisticVector::monomial(vec![0, 1]));
        let tt = derivative_covariation(&t, 0.5).unwrap();
        assert!((tt.mean.get(0, 0) - 1.0).abs() < 1e-12);
        assert!(tt.var.get(0, 0).abs() < 1e-12);

        let t = table(1, &StatisticVector::scalar(|x| x[0]));
        let tt = derivative_covariation(&t, 0.5).unwrap();
        assert!((tt.mean.get(0, 0) - 1.0).abs() < 1e-15);

        let t = table(2, &StatisticVector::new(2, |x| vec![x[0], x[1]]));
        let tt = derivative_covariation(&t, 0.5).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((tt.mean.get(i, j) - want).abs() < 1e-12);
                assert!(tt.var.get(i, j).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn d3_bound_examples() {
        // F = (X1 + ... + Xn)/sqrt(n): total = (1/3) n^{-1/2}
        for n in [4usize, 9] {
            let stat = StatisticVector::scaled_sum(n, (n as f64).sqrt());
            let t = table(n, &stat);
            let b = rademacher_bounds(&t, &GaussianTarget::identity(1), 0.5).unwrap();
            assert!(
                (b.d3.total - (n as f64).powf(-0.5) / 3.0).abs() < 1e-12,
                "n={n}: {}",
                b.d3.total
            );
        }

        let t = table(2, &StatisticVector::monomial(vec![0, 1]));
        let b = rademacher_bounds(&t, &GaussianTarget::identity(1), 0.5).unwrap();
        assert!((b.d3.total - 2.0 / 3.0).abs() < 1e-12);

        let t = table(2, &StatisticVector::new(2, |x| vec![x[0], x[1]]));
        let b = rademacher_bounds(&t, &GaussianTarget::identity(2), 0.5).unwrap();
        assert!((b.d3.total - 8.0 / 3.0).abs() < 1e-12, "{}", b.d3.total);
        assert!(b.d2.is_some());
    }

    #[test]
    fn d2_absent_for_singular_target() {
        let t = table(2, &StatisticVector::new(2, |x| vec![x[0], x[0]]));
        let c = crate::matrix::DMat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let target = GaussianTarget::new(c).unwrap();
        let b = rademacher_bounds(&t, &target, 0.5).unwrap();
        assert!(b.d2.is_none());
        assert!(b.d2_skipped.is_some());
    }

    #[test]
    fn d3_matches_generic_assembly() {
        let stat = StatisticVector::new(2, |x| vec![x[0] * x[1], x[1] * x[2]]);
        let t = table(3, &stat);
        let target = GaussianTarget::identity(2);
        let b = rademacher_bounds(&t, &target, 0.5).unwrap();
        let generic = d3_via_generic_stats(&t, &target, 0.5).unwrap();
        assert!((b.d3.total - generic).abs() < 1e-12);
    }

    #[test]
    fn mixed_sign_probability_rejected() {
        let skew = ComponentDistribution::from_pairs(&[(1.0, 0.6), (-1.0, 0.4)]).unwrap();
        let model = ProductModel::new(vec![skew, ComponentDistribution::rademacher()]).unwrap();
        let t = JointTable::build(&model, &StatisticVector::scalar(|x| x[0])).unwrap();
        assert!(require_rademacher(&t).is_err());
    }
}
