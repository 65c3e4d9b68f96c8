//! Exact enumeration over finite product spaces.
//!
//! [`AssignmentSpace`] fixes the enumeration order once: mixed-radix
//! lexicographic with coordinate 0 slowest and atoms in list order.
//! Every realized random variable is a value table aligned with that
//! scheme, so tables from different operators combine pointwise.
//!
//! The difference operators live on [`RandomVariableTable`]:
//!
//! * [`laplacian`](RandomVariableTable::laplacian): `U - E_k[U]`, the
//!   coordinate Laplacian from the theory of Boolean functions;
//! * [`resample_rms`](RandomVariableTable::resample_rms): the
//!   root-mean-square half-difference between `U` and its
//!   coordinate-`k` resampled copy;
//! * [`cond_past`](RandomVariableTable::cond_past) /
//!   [`cond_future`](RandomVariableTable::cond_future): conditional
//!   expectations given the first `k` / last `n - k` coordinates;
//! * [`smoothed_laplacian`](RandomVariableTable::smoothed_laplacian):
//!   the convex past/future mixture of conditioned Laplacians whose
//!   pairing with a plain Laplacian reproduces covariances.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::DMat;
use crate::model::{ProductModel, EXACT_CAP};
use crate::statistic::StatisticVector;

/// Enumeration substrate: index scheme plus product weights.
#[derive(Debug)]
pub struct AssignmentSpace {
    model: Arc<ProductModel>,
    sizes: Vec<usize>,
    strides: Vec<usize>,
    atom_values: Vec<Vec<f64>>,
    atom_probs: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl AssignmentSpace {
    pub fn new(model: Arc<ProductModel>, cap: u64) -> Result<Arc<Self>> {
        let total = model.assignment_count(cap)?;
        let n = model.n();
        let mut sizes = Vec::with_capacity(n);
        let mut atom_values: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut atom_probs: Vec<Vec<f64>> = Vec::with_capacity(n);
        for c in model.components() {
            let atoms = c.atoms().ok_or(Error::NotExactMode)?;
            sizes.push(atoms.len());
            atom_values.push(atoms.iter().map(|a| a.value).collect());
            atom_probs.push(atoms.iter().map(|a| a.prob).collect());
        }
        // coordinate 0 slowest: stride[k] = prod of sizes after k
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * sizes[k + 1];
        }
        // product weights, built coordinate by coordinate in index order
        let mut weights = vec![1.0f64];
        for probs in &atom_probs {
            let mut next = Vec::with_capacity(weights.len() * probs.len());
            for &w in &weights {
                for &p in probs {
                    next.push(w * p);
                }
            }
            weights = next;
        }
        debug_assert_eq!(weights.len(), total);
        Ok(Arc::new(AssignmentSpace {
            model,
            sizes,
            strides,
            atom_values,
            atom_probs,
            weights,
        }))
    }

    pub fn model(&self) -> &Arc<ProductModel> {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn digit(&self, idx: usize, k: usize) -> usize {
        (idx / self.strides[k]) % self.sizes[k]
    }

    /// Write the assignment values for `idx` into `out`.
    pub fn decode(&self, idx: usize, out: &mut Vec<f64>) {
        out.clear();
        for k in 0..self.n() {
            out.push(self.atom_values[k][self.digit(idx, k)]);
        }
    }

    pub fn assignment(&self, idx: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n());
        self.decode(idx, &mut out);
        out
    }

    fn check_coord(&self, k: usize) -> Result<()> {
        if k >= self.n() {
            return Err(Error::CoordinateOutOfRange { k, n: self.n() });
        }
        Ok(())
    }
}

/// A realized scalar random variable: one value per assignment.
#[derive(Debug, Clone)]
pub struct RandomVariableTable {
    space: Arc<AssignmentSpace>,
    values: Vec<f64>,
}

impl RandomVariableTable {
    pub fn new(space: Arc<AssignmentSpace>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), space.len(), "table misaligned with its space");
        RandomVariableTable { space, values }
    }

    pub fn constant(space: Arc<AssignmentSpace>, c: f64) -> Self {
        let m = space.len();
        Self::new(space, vec![c; m])
    }

    pub fn space(&self) -> &Arc<AssignmentSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(self.space.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(Arc::ptr_eq(&self.space, &other.space) || self.space.len() == other.space.len());
        Self::new(
            self.space.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn expectation(&self) -> f64 {
        self.space
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(&w, &v)| w * v)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.expectation();
        self.space
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(&w, &v)| w * (v - m) * (v - m))
            .sum()
    }

    /// E|U|^p.
    pub fn abs_moment(&self, p: f64) -> f64 {
        self.space
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(&w, &v)| w * v.abs().powf(p))
            .sum()
    }

    /// E|U - c|.
    pub fn mean_abs_dev_from(&self, c: f64) -> f64 {
        self.space
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(&w, &v)| w * (c - v).abs())
            .sum()
    }

    /// E(U - c)^2.
    pub fn mean_sq_dev_from(&self, c: f64) -> f64 {
        self.space
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(&w, &v)| w * (c - v) * (c - v))
            .sum()
    }

    pub fn covariance(&self, other: &Self) -> f64 {
        let ma = self.expectation();
        let mb = other.expectation();
        self.space
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(&w, (&a, &b))| w * (a - ma) * (b - mb))
            .sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// `E_k[U]`: integrate out coordinate `k` only.
    pub fn integrate_coord(&self, k: usize) -> Result<Self> {
        self.space.check_coord(k)?;
        let stride = self.space.strides[k];
        let size = self.space.sizes[k];
        let probs = &self.space.atom_probs[k];
        let out = (0..self.values.len())
            .map(|idx| {
                let digit = (idx / stride) % size;
                let base = idx - digit * stride;
                (0..size)
                    .map(|a| probs[a] * self.values[base + a * stride])
                    .sum()
            })
            .collect();
        Ok(Self::new(self.space.clone(), out))
    }

    /// Coordinate Laplacian `U - E_k[U]`.
    pub fn laplacian(&self, k: usize) -> Result<Self> {
        let ek = self.integrate_coord(k)?;
        Ok(self.zip_with(&ek, |u, e| u - e))
    }

    /// Root-mean-square half-difference against an independent redraw of
    /// coordinate `k`: `sqrt(0.5 * E'_k (U - T_k U)^2)`. The redraw
    /// expectation is a second sum over the same atom list.
    pub fn resample_rms(&self, k: usize) -> Result<Self> {
        self.space.check_coord(k)?;
        let stride = self.space.strides[k];
        let size = self.space.sizes[k];
        let probs = &self.space.atom_probs[k];
        let out = (0..self.values.len())
            .map(|idx| {
                let digit = (idx / stride) % size;
                let base = idx - digit * stride;
                let u = self.values[idx];
                let s: f64 = (0..size)
                    .map(|a| {
                        let dv = u - self.values[base + a * stride];
                        probs[a] * dv * dv
                    })
                    .sum();
                (0.5 * s).sqrt()
            })
            .collect();
        Ok(Self::new(self.space.clone(), out))
    }

    /// Conditional expectation given the first `k` coordinates
    /// (`k = 0` gives the plain expectation, `k = n` returns `U`).
    pub fn cond_past(&self, k: usize) -> Result<Self> {
        let n = self.space.n();
        if k > n {
            return Err(Error::CoordinateOutOfRange { k, n });
        }
        let mut out = self.clone();
        for j in k..n {
            out = out.integrate_coord(j)?;
        }
        Ok(out)
    }

    /// Conditional expectation given coordinates `k..n`
    /// (`k = 0` returns `U`, `k = n` gives the plain expectation).
    pub fn cond_future(&self, k: usize) -> Result<Self> {
        let n = self.space.n();
        if k > n {
            return Err(Error::CoordinateOutOfRange { k, n });
        }
        let mut out = self.clone();
        for j in 0..k {
            out = out.integrate_coord(j)?;
        }
        Ok(out)
    }

    /// Convex past/future mixture of the conditioned Laplacian:
    /// `alpha * E[lap_k U | first k+1 coords] + (1-alpha) * E[lap_k U | coords k..]`.
    pub fn smoothed_laplacian(&self, k: usize, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        let lap = self.laplacian(k)?;
        let past = lap.cond_past(k + 1)?;
        let future = lap.cond_future(k)?;
        Ok(past.zip_with(&future, |p, f| alpha * p + (1.0 - alpha) * f))
    }
}

/// A statistic evaluated on every assignment, with product weights.
#[derive(Debug, Clone)]
pub struct JointTable {
    space: Arc<AssignmentSpace>,
    dim: usize,
    /// row-major, `dim` values per assignment
    values: Vec<f64>,
}

impl JointTable {
    /// Evaluate `stat` once per assignment. Fails on sampler components,
    /// cap overflow, or a non-finite statistic value.
    pub fn build(model: &Arc<ProductModel>, stat: &StatisticVector) -> Result<Self> {
        Self::build_with_cap(model, stat, EXACT_CAP)
    }

    pub fn build_with_cap(
        model: &Arc<ProductModel>,
        stat: &StatisticVector,
        cap: u64,
    ) -> Result<Self> {
        let space = AssignmentSpace::new(model.clone(), cap)?;
        let m = space.len();
        let dim = stat.dim();
        let mut values = Vec::with_capacity(m * dim);
        let mut x = Vec::with_capacity(space.n());
        for idx in 0..m {
            space.decode(idx, &mut x);
            let v = stat.eval(&x);
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFiniteValue { assignment: idx });
            }
            values.extend_from_slice(&v);
        }
        Ok(JointTable { space, dim, values })
    }

    pub fn space(&self) -> &Arc<AssignmentSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn row(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.dim..(idx + 1) * self.dim]
    }

    /// Coordinate `i` of the statistic as a value table.
    pub fn component(&self, i: usize) -> RandomVariableTable {
        assert!(i < self.dim);
        let vals = (0..self.len()).map(|idx| self.values[idx * self.dim + i]).collect();
        RandomVariableTable::new(self.space.clone(), vals)
    }

    /// Scalar function of the statistic vector as a value table.
    pub fn scalar_map(&self, f: impl Fn(&[f64]) -> f64) -> RandomVariableTable {
        let vals = (0..self.len()).map(|idx| f(self.row(idx))).collect();
        RandomVariableTable::new(self.space.clone(), vals)
    }

    /// Weighted mean vector and covariance matrix (about the mean).
    pub fn moments(&self) -> (Vec<f64>, DMat) {
        let d = self.dim;
        let w = self.space.weights();
        let mut mean = vec![0.0; d];
        for idx in 0..self.len() {
            let row = self.row(idx);
            for i in 0..d {
                mean[i] += w[idx] * row[i];
            }
        }
        let mut cov = DMat::zeros(d);
        for idx in 0..self.len() {
            let row = self.row(idx);
            for i in 0..d {
                let ci = row[i] - mean[i];
                for j in i..d {
                    let add = w[idx] * ci * (row[j] - mean[j]);
                    cov.set(i, j, cov.get(i, j) + add);
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                cov.set(i, j, cov.get(j, i));
            }
        }
        (mean, cov)
    }

    /// The covariation matrix at mixing weight `alpha`: entry `(i, j)` is
    /// the random variable `sum_k lap_k F_i * smoothed_lap_k F_j`, whose
    /// expectation equals the covariance of `F_i` and `F_j`.
    pub fn covariation(&self, alpha: f64) -> Result<CovariationSummary> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        let d = self.dim;
        let n = self.space.n();
        let m = self.len();
        let comps: Vec<RandomVariableTable> = (0..d).map(|i| self.component(i)).collect();
        let mut acc: Vec<Vec<f64>> = vec![vec![0.0; m]; d * d];
        for k in 0..n {
            let laps: Vec<RandomVariableTable> =
                comps.iter().map(|c| c.laplacian(k)).collect::<Result<_>>()?;
            let smoothed: Vec<RandomVariableTable> = comps
                .iter()
                .map(|c| c.smoothed_laplacian(k, alpha))
                .collect::<Result<_>>()?;
            for i in 0..d {
                for j in 0..d {
                    let dst = &mut acc[i * d + j];
                    let a = laps[i].values();
                    let b = smoothed[j].values();
                    for idx in 0..m {
                        dst[idx] += a[idx] * b[idx];
                    }
                }
            }
        }
        let tables: Vec<RandomVariableTable> = acc
            .into_iter()
            .map(|vals| RandomVariableTable::new(self.space.clone(), vals))
            .collect();
        let mut mean = DMat::zeros(d);
        let mut var = DMat::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let t = &tables[i * d + j];
                mean.set(i, j, t.expectation());
                var.set(i, j, t.variance());
            }
        }
        Ok(CovariationSummary {
            dim: d,
            mean,
            var,
            tables,
        })
    }

    /// Per-coordinate sums `sum_k E|lap_k F_i|^3`.
    pub fn third_moment_sums(&self) -> Result<Vec<f64>> {
        let n = self.space.n();
        let mut out = vec![0.0; self.dim];
        for (i, item) in out.iter_mut().enumerate() {
            let c = self.component(i);
            for k in 0..n {
                *item += c.laplacian(k)?.abs_moment(3.0);
            }
        }
        Ok(out)
    }
}

/// Realized covariation tables with their first two moments.
#[derive(Debug, Clone)]
pub struct CovariationSummary {
    pub dim: usize,
    pub mean: DMat,
    pub var: DMat,
    tables: Vec<RandomVariableTable>,
}

impl CovariationSummary {
    pub fn new_from_tables(dim: usize, tables: Vec<RandomVariableTable>) -> Self {
        assert_eq!(tables.len(), dim * dim);
        let mut mean = DMat::zeros(dim);
        let mut var = DMat::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                let t = &tables[i * dim + j];
                mean.set(i, j, t.expectation());
                var.set(i, j, t.variance());
            }
        }
        CovariationSummary {
            dim,
            mean,
            var,
            tables,
        }
    }

    pub fn table(&self, i: usize, j: usize) -> &RandomVariableTable {
        &self.tables[i * self.dim + j]
    }
}

/// Pointwise slack of the approximate chain rule for a smooth `f`:
/// maximum over assignments of
/// `|lap_k f(F) - sum_i d_i f(F) lap_k F_i| - hess_sup * d * sum_i rms_k(F_i)^2`.
///
/// A correct operator implementation keeps this at or below zero up to
/// rounding.
pub fn chain_rule_residual(
    table: &JointTable,
    k: usize,
    f: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    hess_sup: f64,
) -> Result<f64> {
    let d = table.dim();
    let f_table = table.scalar_map(f);
    let lap_f = f_table.laplacian(k)?;
    let laps: Vec<RandomVariableTable> = (0..d)
        .map(|i| table.component(i).laplacian(k))
        .collect::<Result<_>>()?;
    let rms: Vec<RandomVariableTable> = (0..d)
        .map(|i| table.component(i).resample_rms(k))
        .collect::<Result<_>>()?;
    let mut worst = f64::NEG_INFINITY;
    for idx in 0..table.len() {
        let g = grad(table.row(idx));
        let linear: f64 = (0..d).map(|i| g[i] * laps[i].at(idx)).sum();
        let lhs = (lap_f.at(idx) - linear).abs();
        // sum over ordered pairs (i, j) of rms_i^2 + rms_j^2 collapses to
        // 2 d * sum_i rms_i^2
        let s: f64 = (0..d).map(|i| rms[i].at(idx) * rms[i].at(idx)).sum();
        let rhs = 0.5 * hess_sup * 2.0 * d as f64 * s;
        worst = worst.max(lhs - rhs);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ComponentDistribution;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn rademacher_table(n: usize, stat: &StatisticVector) -> JointTable {
        JointTable::build(&ProductModel::rademacher(n), stat).unwrap()
    }

    fn product_stat() -> StatisticVector {
        StatisticVector::monomial(vec![0, 1])
    }

    #[test]
    fn build_enumerates_lexicographically() {
        let table = rademacher_table(2, &product_stat());
        assert_eq!(table.len(), 4);
        // coordinate 0 slowest, +1 atom first
        let vals: Vec<f64> = (0..4).map(|i| table.row(i)[0]).collect();
        assert_eq!(vals, vec![1.0, -1.0, -1.0, 1.0]);
        for &w in table.space().weights() {
            assert_eq!(w, 0.25);
        }
    }

    #[test]
    fn build_degenerate_single_atom() {
        let c = ComponentDistribution::from_pairs(&[(3.0, 1.0)]).unwrap();
        let model = ProductModel::new(vec![c]).unwrap();
        let stat = StatisticVector::scalar(|x| x[0]);
        let table = JointTable::build(&model, &stat).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.row(0)[0], 3.0);
        assert_eq!(table.space().weights()[0], 1.0);
    }

    #[test]
    fn build_calls_eval_once_per_assignment() {
        static CALLS: AtomicUsize = AtomicUsize::new(0);
        let stat = StatisticVector::scalar(|x| {
            CALLS.fetch_add(1, Ordering::SeqCst);
            x.iter().sum()
        });
        CALLS.store(0, Ordering::SeqCst);
        let table = rademacher_table(3, &stat);
        assert_eq!(CALLS.load(Ordering::SeqCst), table.len());
        let rv = table.component(0);
        assert!(rv.expectation().abs() < 1e-15);
        assert!((rv.map(|v| v * v).expectation() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn build_reports_non_finite_values() {
        let stat = StatisticVector::scalar(|x| if x[0] < 0.0 { f64::NAN } else { 1.0 });
        let err = JointTable::build(&ProductModel::rademacher(1), &stat).unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { assignment: 1 }));
    }

    #[test]
    fn moments_examples() {
        let (mean, cov) = rademacher_table(2, &product_stat()).moments();
        assert!(mean[0].abs() < 1e-15);
        assert!((cov.get(0, 0) - 1.0).abs() < 1e-15);

        let dup = StatisticVector::new(2, |x| vec![x[0], x[0]]);
        let (_, cov) = rademacher_table(2, &dup).moments();
        for i in 0..2 {
            for j in 0..2 {
                assert!((cov.get(i, j) - 1.0).abs() < 1e-15);
            }
        }

        let pair = StatisticVector::new(2, |x| vec![x[0] * x[1], x[0] + x[1]]);
        let (_, cov) = rademacher_table(2, &pair).moments();
        assert!(cov.get(0, 1).abs() < 1e-15);
        assert!(cov.get(1, 0).abs() < 1e-15);
    }

    #[test]
    fn laplacian_examples() {
        let table = rademacher_table(2, &product_stat());
        let lap = table.component(0).laplacian(0).unwrap();
        // assignment (1, 1) is index 0
        assert_eq!(lap.at(0), 1.0);

        let c = RandomVariableTable::constant(table.space().clone(), 4.2);
        assert_eq!(c.laplacian(0).unwrap().values(), &[0.0; 4]);

        let stat = StatisticVector::scalar(|x| x[0] + x[0] * x[1]);
        let t = rademacher_table(2, &stat);
        let lap = t.component(0).laplacian(0).unwrap();
        // (1, -1) is index 1: U = 0, E_0 U = 0
        assert_eq!(lap.at(1), 0.0);
        // (1, 1) is index 0: U = 2
        assert_eq!(lap.at(0), 2.0);
    }

    #[test]
    fn laplacian_has_zero_conditional_mean() {
        let stat = StatisticVector::scalar(|x| x[0] * x[1] + 0.3 * x[2] - x[0]);
        let table = rademacher_table(3, &stat);
        for k in 0..3 {
            let lap = table.component(0).laplacian(k).unwrap();
            let cond = lap.integrate_coord(k).unwrap();
            for idx in 0..table.len() {
                assert!(cond.at(idx).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn resample_rms_examples() {
        let table = rademacher_table(2, &product_stat());
        let rms = table.component(0).resample_rms(0).unwrap();
        for idx in 0..4 {
            assert!((rms.at(idx) - 1.0).abs() < 1e-15);
        }

        let c = RandomVariableTable::constant(table.space().clone(), -2.0);
        assert_eq!(c.resample_rms(1).unwrap().values(), &[0.0; 4]);

        let x1 = StatisticVector::scalar(|x| x[0]);
        let t = rademacher_table(2, &x1);
        let rms = t.component(0).resample_rms(1).unwrap();
        assert_eq!(rms.values(), &[0.0; 4]);
    }

    #[test]
    fn conditional_expectation_examples() {
        let table = rademacher_table(2, &product_stat());
        let u = table.component(0);

        let past1 = u.cond_past(1).unwrap();
        for idx in 0..4 {
            assert!(past1.at(idx).abs() < 1e-15);
        }

        let future0 = u.cond_future(0).unwrap();
        assert_eq!(future0.values(), u.values());

        let sum = StatisticVector::scalar(|x| x[0] + x[1]);
        let t = rademacher_table(2, &sum);
        let past1 = t.component(0).cond_past(1).unwrap();
        // both assignments with first coordinate +1
        assert!((past1.at(0) - 1.0).abs() < 1e-15);
        assert!((past1.at(1) - 1.0).abs() < 1e-15);

        // tower property
        assert!((past1.expectation() - t.component(0).expectation()).abs() < 1e-12);

        assert!(u.cond_past(3).is_err());
    }

    #[test]
    fn smoothed_laplacian_examples() {
        for &alpha in &[0.0, 0.25, 0.5, 1.0] {
            let x1 = StatisticVector::scalar(|x| x[0]);
            let t1 = rademacher_table(1, &x1);
            let s = t1.component(0).smoothed_laplacian(0, alpha).unwrap();
            assert_eq!(s.values(), t1.component(0).values());

            let t = rademacher_table(2, &product_stat());
            let u = t.component(0);
            let s0 = u.smoothed_laplacian(0, alpha).unwrap();
            let s1 = u.smoothed_laplacian(1, alpha).unwrap();
            for idx in 0..4 {
                assert!((s0.at(idx) - (1.0 - alpha) * u.at(idx)).abs() < 1e-15);
                assert!((s1.at(idx) - alpha * u.at(idx)).abs() < 1e-15);
            }
            // zero mean
            assert!(s0.expectation().abs() < 1e-12);
        }
        let t = rademacher_table(2, &product_stat());
        assert!(t.component(0).smoothed_laplacian(0, 1.5).is_err());
    }

    #[test]
    fn covariation_examples() {
        for &alpha in &[0.0, 0.3, 0.5, 1.0] {
            let t = rademacher_table(2, &product_stat());
            let z = t.covariation(alpha).unwrap();
            assert!((z.mean.get(0, 0) - 1.0).abs() < 1e-12);
            assert!(z.var.get(0, 0).abs() < 1e-12);
            for idx in 0..4 {
                assert!((z.table(0, 0).at(idx) - 1.0).abs() < 1e-12);
            }

            let sum = StatisticVector::scaled_sum(4, 2.0);
            let t = rademacher_table(4, &sum);
            let z = t.covariation(alpha).unwrap();
            assert!((z.mean.get(0, 0) - 1.0).abs() < 1e-12);
            assert!(z.var.get(0, 0).abs() < 1e-12);
        }

        let x1 = StatisticVector::scalar(|x| x[0]);
        let t = rademacher_table(1, &x1);
        let z = t.covariation(0.5).unwrap();
        assert!((z.mean.get(0, 0) - 1.0).abs() < 1e-15);
        assert!(z.var.get(0, 0).abs() < 1e-15);
    }

    #[test]
    fn third_moment_sums_examples() {
        let sum = StatisticVector::scaled_sum(4, 2.0);
        let t = rademacher_table(4, &sum);
        assert!((t.third_moment_sums().unwrap()[0] - 0.5).abs() < 1e-13);

        let t = rademacher_table(2, &product_stat());
        assert!((t.third_moment_sums().unwrap()[0] - 2.0).abs() < 1e-13);

        let c = StatisticVector::scalar(|_| 1.25);
        let t = rademacher_table(2, &c);
        assert!(t.third_moment_sums().unwrap()[0].abs() < 1e-15);
    }

    #[test]
    fn chain_rule_linear_function_is_exact() {
        let stat = StatisticVector::new(2, |x| vec![x[0] * x[1], x[0] + x[1]]);
        let table = rademacher_table(2, &stat);
        for k in 0..2 {
            let v = chain_rule_residual(
                &table,
                k,
                &|y| 2.0 * y[0] - y[1],
                &|_| vec![2.0, -1.0],
                0.0,
            )
            .unwrap();
            assert!(v <= 1e-12, "violation {v}");
        }
    }

    #[test]
    fn chain_rule_cosine_on_single_coordinate() {
        let stat = StatisticVector::scalar(|x| x[0]);
        let table = rademacher_table(1, &stat);
        let v = chain_rule_residual(&table, 0, &|y| y[0].cos(), &|y| vec![-y[0].sin()], 1.0)
            .unwrap();
        assert!(v <= 0.0, "violation {v}");
    }

    #[test]
    fn chain_rule_constant_statistic() {
        let stat = StatisticVector::scalar(|_| 3.0);
        let table = rademacher_table(2, &stat);
        let v = chain_rule_residual(&table, 0, &|y| y[0].cos(), &|y| vec![-y[0].sin()], 1.0)
            .unwrap();
        assert!(v.abs() < 1e-15);
    }
}
