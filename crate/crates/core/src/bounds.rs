//! Explicit bounds on `|E g(F) - E g(Y)|`.
//!
//! Two assemblies over the same ingredients (covariance of `F`,
//! variance of the covariation matrix, third moments of the coordinate
//! Laplacians):
//!
//! * [`stein_bound`]: requires a positive definite target covariance and
//!   a test function with bounded Lipschitz and Hessian constants; the
//!   constants involve the operator norms of `C` and `C^{-1}`.
//! * [`slepian_bound`]: works for any PSD target, requires bounded
//!   second and third derivatives instead.
//!
//! Each comes in an aggregate form (L2 for Stein, L1 for Slepian) and a
//! split form that separates the covariance mismatch `|C - sigma|` from
//! the covariation variance. The aggregate form never exceeds the split
//! form on identical inputs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{cholesky, jacobi_eigen, operator_norms, DMat};
use crate::table::{JointTable, RandomVariableTable};

/// sqrt(2*pi) from a high-precision literal, so totals agree bit-for-bit
/// across implementations.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_502_4;

/// Smoothness constants of a test function. Absent fields mean the
/// corresponding constant is unknown or unbounded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SmoothnessConstants {
    /// Lipschitz constant of g.
    pub lip: Option<f64>,
    /// Lipschitz constant of the gradient (sup operator norm of the Hessian).
    pub m2: Option<f64>,
    /// sup of |second mixed partials|, entrywise.
    pub g2_inf: Option<f64>,
    /// sup of |third mixed partials|, entrywise.
    pub g3_inf: Option<f64>,
}

impl SmoothnessConstants {
    pub fn require_lip(&self) -> Result<f64> {
        self.lip.ok_or(Error::MissingConstant("lip"))
    }
    pub fn require_m2(&self) -> Result<f64> {
        self.m2.ok_or(Error::MissingConstant("m2"))
    }
    pub fn require_g2(&self) -> Result<f64> {
        self.g2_inf.ok_or(Error::MissingConstant("g2_inf"))
    }
    pub fn require_g3(&self) -> Result<f64> {
        self.g3_inf.ok_or(Error::MissingConstant("g3_inf"))
    }

    /// All present constants must be nonnegative.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lip", self.lip),
            ("m2", self.m2),
            ("g2_inf", self.g2_inf),
            ("g3_inf", self.g3_inf),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidSpec(format!(
                        "smoothness constant {name} = {v} must be finite and nonnegative"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Target Gaussian covariance with cached spectral data.
#[derive(Debug, Clone)]
pub struct GaussianTarget {
    c: DMat,
    eigenvalues: Vec<f64>,
    eigenvectors: DMat,
    op_norm: f64,
    inv_op_norm: Option<f64>,
    cholesky: Option<DMat>,
}

impl GaussianTarget {
    /// Requires symmetry within 1e-12 (relative to the largest entry)
    /// and eigenvalues above `-1e-10 * max(1, ||C||_op)`.
    pub fn new(c: DMat) -> Result<Self> {
        c.require_symmetric()?;
        let eig = jacobi_eigen(&c)?;
        let op_norm = eig.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let min = eig.values.first().copied().unwrap_or(0.0);
        if min < -1e-10 * op_norm.max(1.0) {
            return Err(Error::NotPsd(min));
        }
        let inv_op_norm = if min > 1e-12 * op_norm.max(1.0) {
            Some(1.0 / min)
        } else {
            None
        };
        let chol = if inv_op_norm.is_some() { cholesky(&c) } else { None };
        Ok(GaussianTarget {
            c,
            eigenvalues: eig.values,
            eigenvectors: eig.vectors,
            op_norm,
            inv_op_norm,
            cholesky: chol,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMat::identity(dim)).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn matrix(&self) -> &DMat {
        &self.c
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.c.get(i, j)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMat {
        &self.eigenvectors
    }

    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    pub fn inv_op_norm(&self) -> Option<f64> {
        self.inv_op_norm
    }

    pub fn is_positive_definite(&self) -> bool {
        self.inv_op_norm.is_some()
    }

    pub fn cholesky_factor(&self) -> Option<&DMat> {
        self.cholesky.as_ref()
    }
}

/// Operator norm and (when positive definite) inverse operator norm of a
/// symmetric matrix, via the cyclic Jacobi eigensolver.
pub fn sym_operator_norms(c: &DMat) -> Result<(f64, Option<f64>)> {
    operator_norms(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMethod {
    Stein,
    Slepian,
}

impl BoundMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundMethod::Stein => "stein",
            BoundMethod::Slepian => "slepian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundForm {
    /// Single aggregated deviation term: L2 for Stein, L1 for Slepian.
    Aggregate,
    /// Covariance mismatch and covariation standard deviation separated.
    Split,
}

impl BoundForm {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundForm::Aggregate => "aggregate",
            BoundForm::Split => "split",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatsMode {
    Exact,
    Mc,
}

impl StatsMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StatsMode::Exact => "exact",
            StatsMode::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

fn named(name: &str, value: f64) -> NamedValue {
    NamedValue {
        name: name.to_string(),
        value,
    }
}

/// An itemized bound: terms sum to the total, constants record the
/// multipliers that went into each term.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub calculator: String,
    pub method: BoundMethod,
    pub form: BoundForm,
    pub alpha: f64,
    pub terms: Vec<NamedValue>,
    pub constants: Vec<NamedValue>,
    pub total: f64,
    pub mode: StatsMode,
    pub standard_error: Option<f64>,
}

impl BoundReport {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        calculator: &str,
        method: BoundMethod,
        form: BoundForm,
        alpha: f64,
        terms: Vec<NamedValue>,
        constants: Vec<NamedValue>,
        mode: StatsMode,
        standard_error: Option<f64>,
    ) -> Self {
        debug_assert!(terms.iter().all(|t| t.value >= 0.0));
        let total = terms.iter().map(|t| t.value).sum();
        BoundReport {
            calculator: calculator.to_string(),
            method,
            form,
            alpha,
            terms,
            constants,
            total,
            mode,
            standard_error,
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.value)
    }
}

/// Standard errors attached to Monte Carlo bound statistics.
#[derive(Debug, Clone)]
pub struct StatErrors {
    pub sigma: DMat,
    pub z_var: DMat,
    pub third: Vec<f64>,
}

/// The statistics a bound assembly consumes: covariance of the statistic,
/// mean and variance of the covariation matrix, per-coordinate third
/// moment sums, and (exact mode) the realized covariation tables.
#[derive(Debug, Clone)]
pub struct BoundStats {
    pub dim: usize,
    pub sigma: DMat,
    pub z_mean: DMat,
    pub z_var: DMat,
    pub third_moments: Vec<f64>,
    z_tables: Option<Vec<RandomVariableTable>>,
    pub errors: Option<StatErrors>,
    pub mode: StatsMode,
}

impl BoundStats {
    /// Exact statistics from an enumerated table.
    pub fn exact(table: &JointTable, alpha: f64) -> Result<Self> {
        let (_, sigma) = table.moments();
        let z = table.covariation(alpha)?;
        let third = table.third_moment_sums()?;
        let dim = table.dim();
        let tables = (0..dim * dim)
            .map(|idx| z.table(idx / dim, idx % dim).clone())
            .collect();
        Ok(BoundStats {
            dim,
            sigma,
            z_mean: z.mean,
            z_var: z.var,
            third_moments: third,
            z_tables: Some(tables),
            errors: None,
            mode: StatsMode::Exact,
        })
    }

    /// Summary-only statistics (Monte Carlo estimates).
    pub fn from_summary(
        sigma: DMat,
        z_mean: DMat,
        z_var: DMat,
        third_moments: Vec<f64>,
        errors: Option<StatErrors>,
    ) -> Self {
        let dim = sigma.dim();
        BoundStats {
            dim,
            sigma,
            z_mean,
            z_var,
            third_moments,
            z_tables: None,
            errors,
            mode: StatsMode::Mc,
        }
    }

    /// E|c - Z_ij|. Exact when the realized table is available; otherwise
    /// the Jensen upper bound `sqrt((c - sigma)^2 + Var Z)`.
    pub fn mean_abs_dev(&self, i: usize, j: usize, c: f64) -> f64 {
        match &self.z_tables {
            Some(tables) => tables[i * self.dim + j].mean_abs_dev_from(c),
            None => self.mean_sq_dev(i, j, c).sqrt(),
        }
    }

    /// E(c - Z_ij)^2. Exact from the table, or assembled from the
    /// identity `(c - sigma)^2 + Var Z` (the covariation mean is the
    /// covariance).
    pub fn mean_sq_dev(&self, i: usize, j: usize, c: f64) -> f64 {
        match &self.z_tables {
            Some(tables) => tables[i * self.dim + j].mean_sq_dev_from(c),
            None => {
                let dev = c - self.sigma.get(i, j);
                dev * dev + self.z_var.get(i, j).max(0.0)
            }
        }
    }

    pub fn third_total(&self) -> f64 {
        self.third_moments.iter().sum()
    }

    pub fn has_tables(&self) -> bool {
        self.z_tables.is_some()
    }
}

fn check_dims(stats: &BoundStats, target: &GaussianTarget) -> Result<()> {
    if stats.dim != target.dim() {
        return Err(Error::InvalidSpec(format!(
            "statistic dimension {} does not match target dimension {}",
            stats.dim,
            target.dim()
        )));
    }
    Ok(())
}

/// Split-form deviation pieces and their delta-method standard errors.
fn split_pieces(stats: &BoundStats, target: &GaussianTarget) -> (f64, f64, f64, f64) {
    let d = stats.dim;
    let mut mismatch = 0.0;
    let mut sdev = 0.0;
    let mut se_mismatch_sq = 0.0;
    let mut se_sdev_sq = 0.0;
    for i in 0..d {
        for j in 0..d {
            mismatch += (target.entry(i, j) - stats.sigma.get(i, j)).abs();
            let v = stats.z_var.get(i, j).max(0.0);
            sdev += v.sqrt();
            if let Some(err) = &stats.errors {
                let se_s = err.sigma.get(i, j);
                se_mismatch_sq += se_s * se_s;
                let se_v = err.z_var.get(i, j);
                let denom = 2.0 * v.sqrt().max(se_v.sqrt()).max(1e-300);
                let se_sd = se_v / denom;
                se_sdev_sq += se_sd * se_sd;
            }
        }
    }
    (mismatch, sdev, se_mismatch_sq.sqrt(), se_sdev_sq.sqrt())
}

fn third_se(stats: &BoundStats) -> f64 {
    stats
        .errors
        .as_ref()
        .map(|e| e.third.iter().map(|s| s * s).sum::<f64>().sqrt())
        .unwrap_or(0.0)
}

/// Bound via the Stein equation for a positive definite target.
///
/// Aggregate form:
/// `B1 * sqrt(sum_ij E|C_ij - Z_ij|^2) + B2 * sum_i sum_k E|lap_k F_i|^3`
/// with `B1 = ||C^-1||_op ||C||_op^{1/2} lip` and
/// `B2 = (sqrt(2 pi)/4) ||C^-1||_op^{3/2} ||C||_op m2 d^2`. The split
/// form replaces the square root by
/// `sum |C - sigma| + sum sqrt(Var Z)`.
pub fn stein_bound(
    stats: &BoundStats,
    target: &GaussianTarget,
    g: &SmoothnessConstants,
    alpha: f64,
    form: BoundForm,
) -> Result<BoundReport> {
    check_dims(stats, target)?;
    g.validate()?;
    let lip = g.require_lip()?;
    let m2 = g.require_m2()?;
    let inv = target
        .inv_op_norm()
        .ok_or_else(|| Error::NotPositiveDefinite(*target.eigenvalues().first().unwrap()))?;
    let op = target.op_norm();
    let d = stats.dim as f64;
    let b1 = inv * op.sqrt() * lip;
    let b2 = SQRT_2PI / 4.0 * inv.powf(1.5) * op * m2 * d * d;

    let third_total = stats.third_total();
    let constants = vec![
        named("b1", b1),
        named("b2", b2),
        named("op_norm", op),
        named("inv_op_norm", inv),
    ];

    let (terms, se) = match form {
        BoundForm::Aggregate => {
            let mut sq = 0.0;
            for i in 0..stats.dim {
                for j in 0..stats.dim {
                    sq += stats.mean_sq_dev(i, j, target.entry(i, j));
                }
            }
            let dev = sq.sqrt();
            let se = stats.errors.as_ref().map(|_| {
                let (_, _, se_m, se_sd) = split_pieces(stats, target);
                // conservative: propagate through the split majorant
                (b1 * b1 * (se_m * se_m + se_sd * se_sd) + b2 * b2 * third_se(stats).powi(2))
                    .sqrt()
            });
            (
                vec![
                    named("covariance_mismatch", b1 * dev),
                    named("variance_term", 0.0),
                    named("third_moment_term", b2 * third_total),
                ],
                se,
            )
        }
        BoundForm::Split => {
            let (mismatch, sdev, se_m, se_sd) = split_pieces(stats, target);
            let se = stats.errors.as_ref().map(|_| {
                (b1 * b1 * (se_m * se_m + se_sd * se_sd) + b2 * b2 * third_se(stats).powi(2))
                    .sqrt()
            });
            (
                vec![
                    named("covariance_mismatch", b1 * mismatch),
                    named("variance_term", b1 * sdev),
                    named("third_moment_term", b2 * third_total),
                ],
                se,
            )
        }
    };

    Ok(BoundReport::assemble(
        "generic",
        BoundMethod::Stein,
        form,
        alpha,
        terms,
        constants,
        stats.mode,
        se,
    ))
}

/// Bound via interpolation between `F` and the Gaussian target, valid
/// for any PSD covariance.
///
/// Aggregate form:
/// `B3 * sum_ij E|C_ij - Z_ij| + B4 * sum_i sum_k E|lap_k F_i|^3`
/// with `B3 = ||g''||_inf / 2` and `B4 = ||g'''||_inf d^2 / 3`.
pub fn slepian_bound(
    stats: &BoundStats,
    target: &GaussianTarget,
    g: &SmoothnessConstants,
    alpha: f64,
    form: BoundForm,
) -> Result<BoundReport> {
    check_dims(stats, target)?;
    g.validate()?;
    let g2 = g.require_g2()?;
    let g3 = g.require_g3()?;
    let d = stats.dim as f64;
    let b3 = g2 / 2.0;
    let b4 = g3 * d * d / 3.0;
    let third_total = stats.third_total();
    let constants = vec![named("b3", b3), named("b4", b4)];

    let (terms, se) = match form {
        BoundForm::Aggregate => {
            let mut abs_dev = 0.0;
            for i in 0..stats.dim {
                for j in 0..stats.dim {
                    abs_dev += stats.mean_abs_dev(i, j, target.entry(i, j));
                }
            }
            let se = stats.errors.as_ref().map(|_| {
                let (_, _, se_m, se_sd) = split_pieces(stats, target);
                (b3 * b3 * (se_m * se_m + se_sd * se_sd) + b4 * b4 * third_se(stats).powi(2))
                    .sqrt()
            });
            (
                vec![
                    named("covariance_mismatch", b3 * abs_dev),
                    named("variance_term", 0.0),
                    named("third_moment_term", b4 * third_total),
                ],
                se,
            )
        }
        BoundForm::Split => {
            let (mismatch, sdev, se_m, se_sd) = split_pieces(stats, target);
            let se = stats.errors.as_ref().map(|_| {
                (b3 * b3 * (se_m * se_m + se_sd * se_sd) + b4 * b4 * third_se(stats).powi(2))
                    .sqrt()
            });
            (
                vec![
                    named("covariance_mismatch", b3 * mismatch),
                    named("variance_term", b3 * sdev),
                    named("third_moment_term", b4 * third_total),
                ],
                se,
            )
        }
    };

    Ok(BoundReport::assemble(
        "generic",
        BoundMethod::Slepian,
        form,
        alpha,
        terms,
        constants,
        stats.mode,
        se,
    ))
}

/// Shared assembly for the specialized calculators (runs, quadratic
/// forms, sign functionals): a list of nonnegative terms under a named
/// calculator.
pub(crate) fn specialized_report(
    calculator: &str,
    method: BoundMethod,
    form: BoundForm,
    alpha: f64,
    terms: Vec<(&str, f64)>,
    constants: Vec<(&str, f64)>,
    mode: StatsMode,
) -> BoundReport {
    BoundReport::assemble(
        calculator,
        method,
        form,
        alpha,
        terms.into_iter().map(|(n, v)| named(n, v)).collect(),
        constants.into_iter().map(|(n, v)| named(n, v)).collect(),
        mode,
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProductModel;
    use crate::statistic::StatisticVector;

    fn exact_stats(n: usize, stat: &StatisticVector, alpha: f64) -> BoundStats {
        let table = JointTable::build(&ProductModel::rademacher(n), stat).unwrap();
        BoundStats::exact(&table, alpha).unwrap()
    }

    #[test]
    fn stein_constants_identity_target() {
        let g = SmoothnessConstants {
            lip: Some(1.0),
            m2: Some(1.0),
            ..Default::default()
        };
        let stat = StatisticVector::new(2, |x| vec![x[0], x[1]]);
        let stats = exact_stats(2, &stat, 0.5);
        let target = GaussianTarget::identity(2);
        let report = stein_bound(&stats, &target, &g, 0.5, BoundForm::Aggregate).unwrap();
        assert!((report.constant("b1").unwrap() - 1.0).abs() < 1e-15);
        assert!((report.constant("b2").unwrap() - SQRT_2PI).abs() < 1e-12);
    }

    #[test]
    fn stein_product_statistic_reduces_to_third_moments() {
        let g = SmoothnessConstants {
            lip: Some(1.0),
            m2: Some(1.0),
            ..Default::default()
        };
        let stat = StatisticVector::monomial(vec![0, 1]);
        let stats = exact_stats(2, &stat, 0.5);
        let target = GaussianTarget::identity(1);
        for form in [BoundForm::Aggregate, BoundForm::Split] {
            let report = stein_bound(&stats, &target, &g, 0.5, form).unwrap();
            assert!(report.term("covariance_mismatch").unwrap().abs() < 1e-12);
            assert!(report.term("variance_term").unwrap().abs() < 1e-12);
            assert!((report.total - SQRT_2PI / 4.0 * 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stein_rejects_singular_target() {
        let g = SmoothnessConstants {
            lip: Some(1.0),
            m2: Some(1.0),
            ..Default::default()
        };
        let stat = StatisticVector::new(2, |x| vec![x[0], x[1]]);
        let stats = exact_stats(2, &stat, 0.5);
        let c = DMat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let target = GaussianTarget::new(c).unwrap();
        assert!(matches!(
            stein_bound(&stats, &target, &g, 0.5, BoundForm::Split),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn slepian_scaled_sum_examples() {
        let g = SmoothnessConstants {
            g2_inf: Some(1.0),
            g3_inf: Some(1.0),
            ..Default::default()
        };
        // F = (X1 + ... + X4)/2: total = 1/3 * 4^{-1/2} = 1/6
        let stat = StatisticVector::scaled_sum(4, 2.0);
        let stats = exact_stats(4, &stat, 0.5);
        let target = GaussianTarget::identity(1);
        let report = slepian_bound(&stats, &target, &g, 0.5, BoundForm::Aggregate).unwrap();
        assert!((report.total - 1.0 / 6.0).abs() < 1e-12, "{}", report.total);

        // F = X1 X2: total = 2/3
        let stat = StatisticVector::monomial(vec![0, 1]);
        let stats = exact_stats(2, &stat, 0.5);
        let report = slepian_bound(&stats, &target, &g, 0.5, BoundForm::Aggregate).unwrap();
        assert!((report.total - 2.0 / 3.0).abs() < 1e-12);

        // zero third-derivative constant and matched covariation: total 0
        let g0 = SmoothnessConstants {
            g2_inf: Some(1.0),
            g3_inf: Some(0.0),
            ..Default::default()
        };
        let report = slepian_bound(&stats, &target, &g0, 0.5, BoundForm::Aggregate).unwrap();
        assert!(report.total.abs() < 1e-12);
    }

    #[test]
    fn aggregate_form_never_exceeds_split_form() {
        let g = SmoothnessConstants {
            lip: Some(0.7),
            m2: Some(1.3),
            g2_inf: Some(0.9),
            g3_inf: Some(0.4),
        };
        let stat = StatisticVector::new(2, |x| {
            vec![x[0] * x[1] + 0.5 * x[2], x[1] - 0.25 * x[0] * x[2]]
        });
        let stats = exact_stats(3, &stat, 0.25);
        // deliberately mismatched target
        let c = DMat::from_rows(&[vec![1.5, 0.2], vec![0.2, 0.9]]);
        let target = GaussianTarget::new(c).unwrap();
        let stein_l2 = stein_bound(&stats, &target, &g, 0.25, BoundForm::Aggregate).unwrap();
        let stein_split = stein_bound(&stats, &target, &g, 0.25, BoundForm::Split).unwrap();
        assert!(stein_l2.total <= stein_split.total + 1e-12);
        let sl_l1 = slepian_bound(&stats, &target, &g, 0.25, BoundForm::Aggregate).unwrap();
        let sl_split = slepian_bound(&stats, &target, &g, 0.25, BoundForm::Split).unwrap();
        assert!(sl_l1.total <= sl_split.total + 1e-12);
        for r in [&stein_l2, &stein_split, &sl_l1, &sl_split] {
            let sum: f64 = r.terms.iter().map(|t| t.value).sum();
            assert!((sum - r.total).abs() < 1e-12);
            assert!(r.terms.iter().all(|t| t.value >= 0.0));
        }
    }

    #[test]
    fn monotone_in_constants_and_stats() {
        let stat = StatisticVector::monomial(vec![0, 1]);
        let stats = exact_stats(2, &stat, 0.5);
        let target = GaussianTarget::identity(1);
        let mut prev = 0.0;
        for scale in [0.5, 1.0, 2.0] {
            let g = SmoothnessConstants {
                g2_inf: Some(scale),
                g3_inf: Some(scale),
                ..Default::default()
            };
            let total = slepian_bound(&stats, &target, &g, 0.5, BoundForm::Split)
                .unwrap()
                .total;
            assert!(total >= prev);
            prev = total;
        }
    }

    #[test]
    fn missing_constants_are_reported() {
        let stat = StatisticVector::monomial(vec![0, 1]);
        let stats = exact_stats(2, &stat, 0.5);
        let target = GaussianTarget::identity(1);
        let g = SmoothnessConstants::default();
        assert!(matches!(
            stein_bound(&stats, &target, &g, 0.5, BoundForm::Split),
            Err(Error::MissingConstant("lip"))
        ));
        assert!(matches!(
            slepian_bound(&stats, &target, &g, 0.5, BoundForm::Split),
            Err(Error::MissingConstant("g2_inf"))
        ));
    }

    #[test]
    fn gaussian_target_validation() {
        let asym = DMat::from_rows(&[vec![1.0, 0.3], vec![0.0, 1.0]]);
        assert!(GaussianTarget::new(asym).is_err());
        let indefinite = DMat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(GaussianTarget::new(indefinite), Err(Error::NotPsd(_))));
        let psd_singular = DMat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let t = GaussianTarget::new(psd_singular).unwrap();
        assert!(!t.is_positive_definite());
        assert!(t.cholesky_factor().is_none());
    }
}
