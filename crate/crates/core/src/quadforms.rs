//! Vectors of quadratic forms in independent standardized variables.
//!
//! `F_i = sum_{u<v} a_i[u][v] X_u X_v` with symmetric vanishing-diagonal
//! coefficient matrices. The convergence conditions and the four-term
//! bound below depend on the coefficient matrices only through
//! upper-triangle pairings, mixed traces `||A_i A_j||_F^2`, and row sums
//! of squares, plus the worst-case `Var(X^2)` and `E|X|^4` over the
//! coordinates.

use std::sync::Arc;

use crate::bounds::{
    specialized_report, BoundForm, BoundMethod, BoundReport, GaussianTarget, SmoothnessConstants,
    StatsMode,
};
use crate::error::{Error, Result};
use crate::matrix::DMat;
use crate::model::{ComponentDistribution, ProductModel};
use crate::statistic::StatisticVector;

#[derive(Debug, Clone)]
pub struct QuadFormSpec {
    n: usize,
    matrices: Vec<DMat>,
    components: Vec<ComponentDistribution>,
    /// max_u Var(X_u^2)
    max_var_square: f64,
    /// max_u E|X_u|^4
    max_abs4: f64,
}

impl QuadFormSpec {
    /// Validates: every matrix symmetric within 1e-12 with zero diagonal,
    /// every coordinate with zero mean and unit variance (within 1e-12)
    /// and finite fourth moments. Matrices are symmetrized exactly after
    /// the tolerance check.
    pub fn new(matrices: Vec<DMat>, components: Vec<ComponentDistribution>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidSpec("need at least one coefficient matrix".into()));
        }
        let n = components.len();
        let mut symmetrized = Vec::with_capacity(matrices.len());
        for (i, a) in matrices.into_iter().enumerate() {
            if a.dim() != n {
                return Err(Error::InvalidSpec(format!(
                    "matrix {i} is {}x{} but the model has {n} coordinates",
                    a.dim(),
                    a.dim()
                )));
            }
            if a.asymmetry() > 1e-12 {
                return Err(Error::InvalidSpec(format!(
                    "matrix {i} asymmetric beyond tolerance ({:.3e})",
                    a.asymmetry()
                )));
            }
            for u in 0..n {
                if a.get(u, u) != 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "matrix {i} has nonzero diagonal entry at {u}"
                    )));
                }
            }
            let mut s = a.clone();
            for u in 0..n {
                for v in (u + 1)..n {
                    let m = 0.5 * (a.get(u, v) + a.get(v, u));
                    s.set(u, v, m);
                    s.set(v, u, m);
                }
            }
            symmetrized.push(s);
        }
        let mut max_var_square = 0.0f64;
        let mut max_abs4 = 0.0f64;
        for (u, c) in components.iter().enumerate() {
            let m = c.moments()?;
            if m.mean.abs() > 1e-12 || (m.variance - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidSpec(format!(
                    "coordinate {u} must have zero mean and unit variance (got mean {}, variance {})",
                    m.mean, m.variance
                )));
            }
            max_var_square = max_var_square.max(m.var_square);
            max_abs4 = max_abs4.max(m.abs4);
        }
        Ok(QuadFormSpec {
            n,
            matrices: symmetrized,
            components,
            max_var_square,
            max_abs4,
        })
    }

    /// Build from upper triangles only; the strict lower triangle of the
    /// input is ignored.
    pub fn from_upper_triangles(
        uppers: Vec<DMat>,
        components: Vec<ComponentDistribution>,
    ) -> Result<Self> {
        let mirrored = uppers
            .into_iter()
            .map(|u| {
                let n = u.dim();
                let mut m = DMat::zeros(n);
                for i in 0..n {
                    for j in (i + 1)..n {
                        m.set(i, j, u.get(i, j));
                        m.set(j, i, u.get(i, j));
                    }
                }
                m
            })
            .collect();
        Self::new(mirrored, components)
    }

    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self, i: usize) -> &DMat {
        &self.matrices[i]
    }

    pub fn max_var_square(&self) -> f64 {
        self.max_var_square
    }

    pub fn max_abs4(&self) -> f64 {
        self.max_abs4
    }

    pub fn model(&self) -> Result<Arc<ProductModel>> {
        ProductModel::new(self.components.clone())
    }

    /// `sum_v a_i[k][v]^2` for every row `k`.
    pub fn row_sums(&self, i: usize) -> Vec<f64> {
        let a = &self.matrices[i];
        (0..self.n)
            .map(|k| (0..self.n).map(|v| a.get(k, v) * a.get(k, v)).sum())
            .collect()
    }

    /// The quadratic-form vector as a statistic, with the rank-one
    /// update rule as the substituted evaluator.
    pub fn statistic(&self) -> StatisticVector {
        let mats: Vec<DMat> = self.matrices.clone();
        let mats2 = mats.clone();
        let d = self.dim();
        StatisticVector::new(d, move |x| {
            mats.iter().map(|a| half_quadratic(a, x)).collect()
        })
        .with_subst_eval(move |k, x, v| {
            mats2
                .iter()
                .map(|a| {
                    let base = half_quadratic(a, x);
                    let row: f64 = (0..x.len()).map(|u| a.get(k, u) * x[u]).sum();
                    base + (v - x[k]) * row
                })
                .collect()
        })
    }
}

/// `sum_{u<v} a[u][v] x_u x_v`, evaluated as `x^T A x / 2` (zero diagonal).
fn half_quadratic(a: &DMat, x: &[f64]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for u in 0..n {
        let mut row = 0.0;
        for v in 0..n {
            row += a.get(u, v) * x[v];
        }
        total += x[u] * row;
    }
    0.5 * total
}

/// Condition values for a quadratic-form family at one `n`.
#[derive(Debug, Clone)]
pub struct QfConditions {
    /// `sum_{u<v} a_i[uv] a_j[uv]`, which equals `E[F_i F_j]`.
    pub pairwise_covariance: DMat,
    /// `sum_{u,v} (sum_k a_i[ku] a_j[kv])^2 = ||A_i A_j||_F^2`.
    pub trace_condition: DMat,
    /// `max_u sum_v a_i[uv]^2` per statistic.
    pub max_row_condition: Vec<f64>,
    /// `Tr(A_i^4)` per statistic.
    pub dejong_tr_a4: Vec<f64>,
}

/// Mixed trace via explicit matrix products.
fn trace_condition_product(ai: &DMat, aj: &DMat) -> f64 {
    let p = ai.mul(aj);
    p.data().iter().map(|v| v * v).sum()
}

/// Mixed trace via the nested-sum formula, an independent arithmetic
/// route used to cross-check the matrix-product computation.
pub fn trace_condition_nested_sum(ai: &DMat, aj: &DMat) -> f64 {
    let n = ai.dim();
    let mut total = 0.0;
    for u in 0..n {
        for v in 0..n {
            let mut inner = 0.0;
            for k in 0..n {
                inner += ai.get(k, u) * aj.get(k, v);
            }
            total += inner * inner;
        }
    }
    total
}

pub fn conditions(spec: &QuadFormSpec) -> QfConditions {
    let d = spec.dim();
    let n = spec.n();
    let mut pairwise = DMat::zeros(d);
    let mut trace = DMat::zeros(d);
    for i in 0..d {
        for j in i..d {
            let ai = spec.matrix(i);
            let aj = spec.matrix(j);
            let mut pc = 0.0;
            for u in 0..n {
                for v in (u + 1)..n {
                    pc += ai.get(u, v) * aj.get(u, v);
                }
            }
            pairwise.set(i, j, pc);
            pairwise.set(j, i, pc);
            let tc = trace_condition_product(ai, aj);
            trace.set(i, j, tc);
            trace.set(j, i, tc);
        }
    }
    let max_row_condition = (0..d)
        .map(|i| spec.row_sums(i).into_iter().fold(0.0f64, f64::max))
        .collect();
    let dejong_tr_a4 = (0..d)
        .map(|i| trace_condition_product(spec.matrix(i), spec.matrix(i)))
        .collect();
    QfConditions {
        pairwise_covariance: pairwise,
        trace_condition: trace,
        max_row_condition,
        dejong_tr_a4,
    }
}

/// The four-term bound for quadratic forms against a PSD target:
///
/// * covariance mismatch `(||g''||/2) sum |C_ij - E[F_i F_j]|`;
/// * mixed-trace variance
///   `(||g''||/2^{3/2}) sum sqrt(max(2, max Var X^2) ||A_i A_j||_F^2)`;
/// * row-sum variance
///   `(||g''||/2^{3/2}) sum sqrt(8 max Var(X^2) max E|X|^4 sum_k r_i[k] r_j[k])`;
/// * third moments
///   `(2^{3/2} max E|X|^4 ||g'''|| d^2 / 3) sum_i sum_k r_i[k]^{3/2}`,
///
/// where `r_i[k] = sum_v a_i[kv]^2`.
pub fn qf_bound(
    spec: &QuadFormSpec,
    target: &GaussianTarget,
    g: &SmoothnessConstants,
) -> Result<BoundReport> {
    g.validate()?;
    let g2 = g.require_g2()?;
    let g3 = g.require_g3()?;
    if target.dim() != spec.dim() {
        return Err(Error::InvalidSpec(
            "target and quadratic-form dimensions differ".into(),
        ));
    }
    let d = spec.dim();
    let df = d as f64;
    let cond = conditions(spec);
    let rows: Vec<Vec<f64>> = (0..d).map(|i| spec.row_sums(i)).collect();
    let pow_3_2 = 2.0f64.powf(1.5);

    let mut mismatch = 0.0;
    let mut mixed_trace = 0.0;
    let mut row_sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            mismatch += (target.entry(i, j) - cond.pairwise_covariance.get(i, j)).abs();
            mixed_trace += (2.0f64.max(spec.max_var_square) * cond.trace_condition.get(i, j))
                .sqrt();
            let row_pair: f64 = (0..spec.n()).map(|k| rows[i][k] * rows[j][k]).sum();
            row_sum += (8.0 * spec.max_var_square * spec.max_abs4 * row_pair).sqrt();
        }
    }
    let mut third = 0.0;
    for row in &rows {
        third += row.iter().map(|r| r.powf(1.5)).sum::<f64>();
    }

    Ok(specialized_report(
        "quadform",
        BoundMethod::Slepian,
        BoundForm::Split,
        0.5,
        vec![
            ("covariance_mismatch", g2 / 2.0 * mismatch),
            ("mixed_trace_variance", g2 / pow_3_2 * mixed_trace),
            ("row_sum_variance", g2 / pow_3_2 * row_sum),
            (
                "third_moment_term",
                pow_3_2 * spec.max_abs4 * g3 * df * df / 3.0 * third,
            ),
        ],
        vec![
            ("max_var_square", spec.max_var_square),
            ("max_abs4", spec.max_abs4),
        ],
        StatsMode::Exact,
    ))
}

/// Per-assignment decomposition of the balanced covariation: for
/// `s_i[k] = sum_v a_i[kv] x_v`, returns the pair of matrices
/// `diag_part_ij = sum_k (x_k^2 - 1) s_i[k] s_j[k]` and
/// `gram_part_ij = sum_k s_i[k] s_j[k]`; the alpha = 1/2 covariation
/// equals their average.
pub fn covariation_half_decomposition(spec: &QuadFormSpec, x: &[f64]) -> (DMat, DMat) {
    let d = spec.dim();
    let n = spec.n();
    let s: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let a = spec.matrix(i);
            (0..n)
                .map(|k| (0..n).map(|v| a.get(k, v) * x[v]).sum())
                .collect()
        })
        .collect();
    let mut diag_part = DMat::zeros(d);
    let mut gram_part = DMat::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let mut dp = 0.0;
            let mut gp = 0.0;
            for k in 0..n {
                let prod = s[i][k] * s[j][k];
                dp += (x[k] * x[k] - 1.0) * prod;
                gp += prod;
            }
            diag_part.set(i, j, dp);
            gram_part.set(i, j, gp);
        }
    }
    (diag_part, gram_part)
}

/// One row of a convergence sweep.
#[derive(Debug, Clone)]
pub struct QfSweepRow {
    pub n: usize,
    pub covariance_mismatch: f64,
    pub mixed_trace_variance: f64,
    pub row_sum_variance: f64,
    pub third_moment_term: f64,
    pub total: f64,
    pub max_pairwise_dev: f64,
    pub max_trace_condition: f64,
    pub max_row_condition: f64,
    pub max_dejong: f64,
}

#[derive(Debug, Clone)]
pub struct QfSweep {
    pub rows: Vec<QfSweepRow>,
    /// Least-squares slope of `ln total` against `ln n`; absent for
    /// fewer than two rows.
    pub fitted_slope: Option<f64>,
    /// Whether the mixed-trace and row conditions decayed to at most
    /// half their initial values over the sweep.
    pub trace_condition_vanishing: bool,
    pub row_condition_vanishing: bool,
}

pub fn clt_sweep(
    family: &dyn Fn(usize) -> Result<QuadFormSpec>,
    target: &GaussianTarget,
    g: &SmoothnessConstants,
    n_grid: &[usize],
) -> Result<QfSweep> {
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let spec = family(n)?;
        let report = qf_bound(&spec, target, g)?;
        let cond = conditions(&spec);
        let d = spec.dim();
        let mut max_pairwise_dev = 0.0f64;
        let mut max_trace = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                max_pairwise_dev = max_pairwise_dev
                    .max((target.entry(i, j) - cond.pairwise_covariance.get(i, j)).abs());
                max_trace = max_trace.max(cond.trace_condition.get(i, j));
            }
        }
        rows.push(QfSweepRow {
            n,
            covariance_mismatch: report.term("covariance_mismatch").unwrap(),
            mixed_trace_variance: report.term("mixed_trace_variance").unwrap(),
            row_sum_variance: report.term("row_sum_variance").unwrap(),
            third_moment_term: report.term("third_moment_term").unwrap(),
            total: report.total,
            max_pairwise_dev,
            max_trace_condition: max_trace,
            max_row_condition: cond
                .max_row_condition
                .iter()
                .fold(0.0f64, |m, &v| m.max(v)),
            max_dejong: cond.dejong_tr_a4.iter().fold(0.0f64, |m, &v| m.max(v)),
        });
    }

    let fitted_slope = if rows.len() >= 2 {
        Some(log_log_slope(
            &rows.iter().map(|r| r.n as f64).collect::<Vec<_>>(),
            &rows.iter().map(|r| r.total).collect::<Vec<_>>(),
        ))
    } else {
        None
    };
    let vanish = |first: f64, last: f64| last <= 0.5 * first || first == 0.0;
    let (trace_condition_vanishing, row_condition_vanishing) = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if rows.len() >= 2 => (
            vanish(a.max_trace_condition, b.max_trace_condition),
            vanish(a.max_row_condition, b.max_row_condition),
        ),
        _ => (false, false),
    };
    Ok(QfSweep {
        rows,
        fitted_slope,
        trace_condition_vanishing,
        row_condition_vanishing,
    })
}

/// Least-squares slope of ln(y) on ln(x).
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Tridiagonal family `a[u][u+1] = 1/sqrt(n-1)` with sign coordinates;
/// the unit normalization makes `Var(F) = 1` at every `n`.
pub fn tridiagonal_spec(n: usize) -> Result<QuadFormSpec> {
    if n < 2 {
        return Err(Error::InvalidSpec("tridiagonal family needs n >= 2".into()));
    }
    let c = 1.0 / ((n - 1) as f64).sqrt();
    let mut a = DMat::zeros(n);
    for u in 0..n - 1 {
        a.set(u, u + 1, c);
        a.set(u + 1, u, c);
    }
    QuadFormSpec::new(vec![a], vec![ComponentDistribution::rademacher(); n])
}

/// Family violating the row condition: all coefficient mass in the first
/// row, normalized to unit variance. The maximal row sum stays 1 at
/// every `n`.
pub fn concentrated_row_spec(n: usize) -> Result<QuadFormSpec> {
    if n < 2 {
        return Err(Error::InvalidSpec("concentrated family needs n >= 2".into()));
    }
    let c = 1.0 / ((n - 1) as f64).sqrt();
    let mut a = DMat::zeros(n);
    for v in 1..n {
        a.set(0, v, c);
        a.set(v, 0, c);
    }
    QuadFormSpec::new(vec![a], vec![ComponentDistribution::rademacher(); n])
}
