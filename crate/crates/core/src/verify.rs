//! Certified test functions and bound verification.
//!
//! The cosine family `g(x) = cos(<t, x> + phase)` carries exact
//! smoothness constants and a closed-form Gaussian mean, so both sides
//! of `|E g(F) - E g(Y)| <= bound` can be pinned down: the left side by
//! enumeration (or Monte Carlo with error bars), the right side by the
//! bound calculators. [`bound_check_suite`] runs the comparison over a
//! corpus and reports per-row slack.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bounds::{
    slepian_bound, stein_bound, BoundForm, BoundStats, GaussianTarget, SmoothnessConstants,
};
use crate::error::{Error, Result};
use crate::matrix::{jacobi_eigen, DMat};
use crate::mc::{batch_se, draw_assignment, McConfig};
use crate::model::ProductModel;
use crate::quadforms::{qf_bound, QuadFormSpec};
use crate::rademacher::{rademacher_bounds, require_rademacher};
use crate::rng::CounterRng;
use crate::runs::{runs_bound, RunsSpec};
use crate::statistic::StatisticVector;
use crate::table::JointTable;

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type GaussianMeanFn = dyn Fn(&DMat) -> f64 + Send + Sync;

/// A smooth test function with certified constants.
#[derive(Clone)]
pub struct SmoothTestFunction {
    dim: usize,
    label: String,
    eval: Arc<ScalarFn>,
    grad: Option<Arc<GradFn>>,
    pub constants: SmoothnessConstants,
    gaussian_mean: Option<Arc<GaussianMeanFn>>,
}

impl std::fmt::Debug for SmoothTestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothTestFunction")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("constants", &self.constants)
            .finish()
    }
}

impl SmoothTestFunction {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.grad {
            Some(g) => Ok(g(x)),
            None => Err(Error::MissingGradient),
        }
    }

    pub fn has_grad(&self) -> bool {
        self.grad.is_some()
    }

    pub fn gaussian_mean(&self, c: &DMat) -> Option<f64> {
        self.gaussian_mean.as_ref().map(|f| f(c))
    }
}

/// `g(x) = cos(<t, x> + phase)` with exact constants:
/// `lip = |t|_2`, `m2 = |t|_2^2`, `g2_inf = (max |t_i|)^2`,
/// `g3_inf = (max |t_i|)^3`, and Gaussian mean
/// `cos(phase) exp(-t' C t / 2)`.
pub fn cosine_test_function(t: &[f64], phase: f64) -> SmoothTestFunction {
    assert!(t.iter().all(|v| v.is_finite()));
    let t_owned: Vec<f64> = t.to_vec();
    let norm2: f64 = t.iter().map(|v| v * v).sum::<f64>().sqrt();
    let max_abs = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let constants = SmoothnessConstants {
        lip: Some(norm2),
        m2: Some(norm2 * norm2),
        g2_inf: Some(max_abs * max_abs),
        g3_inf: Some(max_abs * max_abs * max_abs),
    };
    let t_eval = t_owned.clone();
    let t_grad = t_owned.clone();
    let t_mean = t_owned.clone();
    SmoothTestFunction {
        dim: t.len(),
        label: format!("cos(t.x + {phase})"),
        eval: Arc::new(move |x| {
            let s: f64 = t_eval.iter().zip(x).map(|(a, b)| a * b).sum();
            (s + phase).cos()
        }),
        grad: Some(Arc::new(move |x| {
            let s: f64 = t_grad.iter().zip(x).map(|(a, b)| a * b).sum();
            let factor = -(s + phase).sin();
            t_grad.iter().map(|a| a * factor).collect()
        })),
        constants,
        gaussian_mean: Some(Arc::new(move |c: &DMat| {
            let mut quad = 0.0;
            for i in 0..c.dim() {
                for j in 0..c.dim() {
                    quad += t_mean[i] * c.get(i, j) * t_mean[j];
                }
            }
            phase.cos() * (-quad / 2.0).exp()
        })),
    }
}

/// Diagnostic quadratic `g(x) = x' M x` with Gaussian mean `Tr(M C)`.
/// Unbounded gradient, so only the second-derivative constant is set.
pub fn quadratic_test_function(m: DMat) -> SmoothTestFunction {
    let dim = m.dim();
    let g2 = 2.0 * m.max_abs();
    let m_eval = m.clone();
    let m_grad = m.clone();
    let m_mean = m;
    SmoothTestFunction {
        dim,
        label: "quadratic".to_string(),
        eval: Arc::new(move |x| {
            let mut s = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    s += x[i] * m_eval.get(i, j) * x[j];
                }
            }
            s
        }),
        grad: Some(Arc::new(move |x| {
            (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| (m_grad.get(i, j) + m_grad.get(j, i)) * x[j])
                        .sum()
                })
                .collect()
        })),
        constants: SmoothnessConstants {
            lip: None,
            m2: None,
            g2_inf: Some(g2),
            g3_inf: Some(0.0),
        },
        gaussian_mean: Some(Arc::new(move |c: &DMat| {
            (0..c.dim()).map(|i| {
                (0..c.dim()).map(|j| m_mean.get(i, j) * c.get(j, i)).sum::<f64>()
            })
            .sum()
        })),
    }
}

/// Gauss-Hermite rule adapted to the standard normal weight:
/// `E f(Z) = sum_i w_i f(p_i)`. Nodes come from the eigenvalues of the
/// symmetric tridiagonal recurrence matrix, weights from the first
/// eigenvector components.
pub fn hermite_rule(nodes: usize) -> Result<Vec<(f64, f64)>> {
    if nodes == 0 {
        return Err(Error::InvalidSpec("quadrature needs at least one node".into()));
    }
    let mut companion = DMat::zeros(nodes);
    for i in 0..nodes.saturating_sub(1) {
        let off = ((i + 1) as f64 * 0.5).sqrt();
        companion.set(i, i + 1, off);
        companion.set(i + 1, i, off);
    }
    let eig = jacobi_eigen(&companion)?;
    let rule = (0..nodes)
        .map(|i| {
            let q0 = eig.vectors.get(0, i);
            // physicists' node x against weight e^{-x^2}: rescale to the
            // standard normal by p = sqrt(2) x, w = q0^2
            (std::f64::consts::SQRT_2 * eig.values[i], q0 * q0)
        })
        .collect();
    Ok(rule)
}

#[derive(Debug, Clone)]
pub enum GaussianMethod {
    /// Closed form carried by the test function; zero error.
    Analytic,
    /// Tensorized Gauss-Hermite with this base node count; the error
    /// estimate is the change under node doubling.
    Quadrature { nodes: usize },
    /// Sampling via the eigenfactor; the error is three batch-means
    /// standard errors.
    Mc(McConfig),
}

/// Eigen-directions of the target with eigenvalue above the null cutoff,
/// as columns scaled by sqrt(eigenvalue).
fn positive_directions(target: &GaussianTarget) -> Vec<Vec<f64>> {
    let cutoff = 1e-12 * target.op_norm().max(1.0);
    let d = target.dim();
    let mut dirs = Vec::new();
    for (l, &lambda) in target.eigenvalues().iter().enumerate() {
        if lambda > cutoff {
            let s = lambda.sqrt();
            dirs.push((0..d).map(|row| s * target.eigenvectors().get(row, l)).collect());
        }
    }
    dirs
}

fn quadrature_pass(
    g: &SmoothTestFunction,
    target: &GaussianTarget,
    dirs: &[Vec<f64>],
    rule: &[(f64, f64)],
) -> f64 {
    let d = target.dim();
    let r = dirs.len();
    let mut total = 0.0;
    let mut index = vec![0usize; r];
    let mut point = vec![0.0f64; d];
    loop {
        let mut weight = 1.0;
        point.iter_mut().for_each(|p| *p = 0.0);
        for (l, dir) in dirs.iter().enumerate() {
            let (node, w) = rule[index[l]];
            weight *= w;
            for row in 0..d {
                point[row] += dir[row] * node;
            }
        }
        total += weight * g.eval(&point);
        // odometer increment
        let mut l = 0;
        loop {
            if l == r {
                return total;
            }
            index[l] += 1;
            if index[l] < rule.len() {
                break;
            }
            index[l] = 0;
            l += 1;
        }
    }
}

/// `E g(Y)` for `Y ~ N(0, C)` with an error estimate (zero for the
/// analytic route).
pub fn gaussian_expectation(
    g: &SmoothTestFunction,
    target: &GaussianTarget,
    method: &GaussianMethod,
) -> Result<(f64, f64)> {
    if g.dim() != target.dim() {
        return Err(Error::InvalidSpec(
            "test function and target dimensions differ".into(),
        ));
    }
    match method {
        GaussianMethod::Analytic => match g.gaussian_mean(target.matrix()) {
            Some(v) => Ok((v, 0.0)),
            None => Err(Error::MethodUnavailable(
                "test function has no closed-form Gaussian mean".into(),
            )),
        },
        GaussianMethod::Quadrature { nodes } => {
            let dirs = positive_directions(target);
            if dirs.len() > 3 {
                return Err(Error::MethodUnavailable(format!(
                    "quadrature supports at most 3 non-null directions, target has {}",
                    dirs.len()
                )));
            }
            if dirs.is_empty() {
                // degenerate target: Y = 0 surely
                return Ok((g.eval(&vec![0.0; target.dim()]), 0.0));
            }
            let coarse = quadrature_pass(g, target, &dirs, &hermite_rule(*nodes)?);
            let fine = quadrature_pass(g, target, &dirs, &hermite_rule(nodes * 2)?);
            Ok((fine, (fine - coarse).abs()))
        }
        GaussianMethod::Mc(cfg) => {
            cfg.validate()?;
            let dirs = positive_directions(target);
            let d = target.dim();
            let n_chunks = cfg.outer_samples.div_ceil(cfg.chunk_size);
            let chunk_means: Vec<f64> = (0..n_chunks)
                .map(|c| {
                    let lo = c * cfg.chunk_size;
                    let hi = ((c + 1) * cfg.chunk_size).min(cfg.outer_samples);
                    let mut sum = 0.0;
                    for s in lo..hi {
                        let mut rng = CounterRng::new(cfg.seed, s as u64);
                        let mut y = vec![0.0; d];
                        for dir in &dirs {
                            let z = rng.next_normal();
                            for row in 0..d {
                                y[row] += dir[row] * z;
                            }
                        }
                        sum += g.eval(&y);
                    }
                    sum / (hi - lo) as f64
                })
                .collect();
            let mean = {
                // weight chunks by size through a full re-pass of counts
                let mut total = 0.0;
                let mut count = 0usize;
                for (c, m) in chunk_means.iter().enumerate() {
                    let lo = c * cfg.chunk_size;
                    let hi = ((c + 1) * cfg.chunk_size).min(cfg.outer_samples);
                    total += m * (hi - lo) as f64;
                    count += hi - lo;
                }
                total / count as f64
            };
            Ok((mean, 3.0 * batch_se(&chunk_means)))
        }
    }
}

#[derive(Debug, Clone)]
pub enum EvalMode {
    Exact,
    Mc(McConfig),
}

/// Both sides of the comparison and their error bars.
#[derive(Debug, Clone)]
pub struct DiscrepancyResult {
    /// `|E g(F) - E g(Y)|`.
    pub lhs: f64,
    /// Combined error bar on `lhs`.
    pub lhs_error: f64,
    pub mean_f: f64,
    pub mean_f_error: f64,
    pub method_f: String,
    pub mean_y: f64,
    pub mean_y_error: f64,
    pub method_y: String,
}

/// `|E g(F) - E g(Y)|`: the statistic side by enumeration or sampling,
/// the Gaussian side analytic when available, else quadrature (d <= 3),
/// else sampling. No silent fallback from exact mode: a sampler
/// component under `EvalMode::Exact` is an error.
pub fn discrepancy(
    model: &Arc<ProductModel>,
    stat: &StatisticVector,
    g: &SmoothTestFunction,
    target: &GaussianTarget,
    mode: &EvalMode,
) -> Result<DiscrepancyResult> {
    if g.dim() != stat.dim() {
        return Err(Error::InvalidSpec(
            "test function and statistic dimensions differ".into(),
        ));
    }
    let (mean_f, mean_f_error, method_f) = match mode {
        EvalMode::Exact => {
            let table = JointTable::build(model, stat)?;
            let gf = table.scalar_map(|row| g.eval(row));
            (gf.expectation(), 0.0, "exact-enumeration".to_string())
        }
        EvalMode::Mc(cfg) => {
            cfg.validate()?;
            let n_chunks = cfg.outer_samples.div_ceil(cfg.chunk_size);
            let chunk_means: Vec<f64> = (0..n_chunks)
                .map(|c| {
                    let lo = c * cfg.chunk_size;
                    let hi = ((c + 1) * cfg.chunk_size).min(cfg.outer_samples);
                    let mut sum = 0.0;
                    for s in lo..hi {
                        let mut rng = CounterRng::new(cfg.seed, s as u64);
                        let x = draw_assignment(model, cfg.seed, &mut rng);
                        sum += g.eval(&stat.eval(&x));
                    }
                    sum / (hi - lo) as f64
                })
                .collect();
            let total: f64 = chunk_means
                .iter()
                .enumerate()
                .map(|(c, m)| {
                    let lo = c * cfg.chunk_size;
                    let hi = ((c + 1) * cfg.chunk_size).min(cfg.outer_samples);
                    m * (hi - lo) as f64
                })
                .sum();
            (
                total / cfg.outer_samples as f64,
                3.0 * batch_se(&chunk_means),
                "mc".to_string(),
            )
        }
    };
    let (mean_y, mean_y_error, method_y) = if g.gaussian_mean(target.matrix()).is_some() {
        let (v, e) = gaussian_expectation(g, target, &GaussianMethod::Analytic)?;
        (v, e, "analytic".to_string())
    } else if positive_directions(target).len() <= 3 {
        let (v, e) = gaussian_expectation(g, target, &GaussianMethod::Quadrature { nodes: 64 })?;
        (v, e, "quadrature".to_string())
    } else {
        let cfg = match mode {
            EvalMode::Mc(cfg) => *cfg,
            EvalMode::Exact => McConfig::new(200_000, 1, 0, 4096),
        };
        let (v, e) = gaussian_expectation(g, target, &GaussianMethod::Mc(cfg))?;
        (v, e, "mc".to_string())
    };
    Ok(DiscrepancyResult {
        lhs: (mean_f - mean_y).abs(),
        lhs_error: mean_f_error + mean_y_error,
        mean_f,
        mean_f_error,
        method_f,
        mean_y,
        mean_y_error,
        method_y,
    })
}

/// Which bound calculators apply to an instance beyond the generic pair.
#[derive(Debug, Clone)]
pub enum InstanceKind {
    Generic,
    Rademacher,
    Runs(RunsSpec),
    QuadForm(QuadFormSpec),
}

#[derive(Debug, Clone)]
pub struct BoundCheckInstance {
    pub id: String,
    pub model: Arc<ProductModel>,
    pub stat: StatisticVector,
    pub target: GaussianTarget,
    pub g: SmoothTestFunction,
    pub kind: InstanceKind,
}

#[derive(Debug, Clone)]
pub struct BoundCheckRow {
    pub instance: String,
    pub calculator: String,
    pub method: String,
    pub form: String,
    pub alpha: f64,
    pub lhs: f64,
    pub lhs_error: f64,
    pub bound_total: f64,
    pub slack: f64,
    pub pass: bool,
}

const PASS_TOLERANCE: f64 = 1e-9;

fn make_row(
    instance: &str,
    calculator: &str,
    method: &str,
    form: &str,
    alpha: f64,
    lhs: f64,
    lhs_error: f64,
    bound_total: f64,
) -> BoundCheckRow {
    BoundCheckRow {
        instance: instance.to_string(),
        calculator: calculator.to_string(),
        method: method.to_string(),
        form: form.to_string(),
        alpha,
        lhs,
        lhs_error,
        bound_total,
        slack: bound_total - lhs,
        pass: lhs <= bound_total + lhs_error + PASS_TOLERANCE,
    }
}

fn instance_rows(
    inst: &BoundCheckInstance,
    alphas: &[f64],
    forms: &[BoundForm],
) -> Result<Vec<BoundCheckRow>> {
    let disc = discrepancy(&inst.model, &inst.stat, &inst.g, &inst.target, &EvalMode::Exact)?;
    let table = JointTable::build(&inst.model, &inst.stat)?;
    let mut rows = Vec::new();
    for &alpha in alphas {
        let stats = BoundStats::exact(&table, alpha)?;
        for &form in forms {
            let slepian = slepian_bound(&stats, &inst.target, &inst.g.constants, alpha, form)?;
            rows.push(make_row(
                &inst.id,
                &slepian.calculator,
                slepian.method.as_str(),
                form.as_str(),
                alpha,
                disc.lhs,
                disc.lhs_error,
                slepian.total,
            ));
            if inst.target.is_positive_definite()
                && inst.g.constants.lip.is_some()
                && inst.g.constants.m2.is_some()
            {
                let stein = stein_bound(&stats, &inst.target, &inst.g.constants, alpha, form)?;
                rows.push(make_row(
                    &inst.id,
                    &stein.calculator,
                    stein.method.as_str(),
                    form.as_str(),
                    alpha,
                    disc.lhs,
                    disc.lhs_error,
                    stein.total,
                ));
            }
        }
        if let InstanceKind::Rademacher = inst.kind {
            require_rademacher(&table)?;
            let b = rademacher_bounds(&table, &inst.target, alpha)?;
            let c = &inst.g.constants;
            // the d3/d2 reports bound the distance over the normalized
            // class; rescale by the largest relevant constant of g
            let c3 = c
                .lip
                .unwrap_or(0.0)
                .max(c.g2_inf.unwrap_or(0.0))
                .max(c.g3_inf.unwrap_or(0.0));
            rows.push(make_row(
                &inst.id,
                &b.d3.calculator,
                b.d3.method.as_str(),
                b.d3.form.as_str(),
                alpha,
                disc.lhs,
                disc.lhs_error,
                c3 * b.d3.total,
            ));
            if let (Some(d2), Some(lip), Some(m2)) = (&b.d2, c.lip, c.m2) {
                let c2 = lip.max(m2);
                rows.push(make_row(
                    &inst.id,
                    &d2.calculator,
                    d2.method.as_str(),
                    d2.form.as_str(),
                    alpha,
                    disc.lhs,
                    disc.lhs_error,
                    c2 * d2.total,
                ));
            }
        }
    }
    match &inst.kind {
        InstanceKind::Runs(spec) => {
            let report = runs_bound(spec, &inst.g.constants)?;
            rows.push(make_row(
                &inst.id,
                &report.calculator,
                report.method.as_str(),
                report.form.as_str(),
                report.alpha,
                disc.lhs,
                disc.lhs_error,
                report.total,
            ));
        }
        InstanceKind::QuadForm(spec) => {
            let report = qf_bound(spec, &inst.target, &inst.g.constants)?;
            rows.push(make_row(
                &inst.id,
                &report.calculator,
                report.method.as_str(),
                report.form.as_str(),
                report.alpha,
                disc.lhs,
                disc.lhs_error,
                report.total,
            ));
        }
        _ => {}
    }
    Ok(rows)
}

/// Evaluate every applicable bound against the enumerated discrepancy
/// for each instance. Instances run in parallel; row order follows
/// instance order.
pub fn bound_check_suite(
    instances: &[BoundCheckInstance],
    alphas: &[f64],
    forms: &[BoundForm],
) -> Result<Vec<BoundCheckRow>> {
    let nested: Vec<Vec<BoundCheckRow>> = instances
        .par_iter()
        .map(|inst| instance_rows(inst, alphas, forms))
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Worst observed/declared ratios from random finite-difference probes
/// of the smoothness constants.
#[derive(Debug, Clone, Default)]
pub struct ConstantsProbe {
    pub lip_ratio: Option<f64>,
    pub m2_ratio: Option<f64>,
    pub g2_ratio: Option<f64>,
    pub g3_ratio: Option<f64>,
}

pub fn probe_constants(
    g: &SmoothTestFunction,
    probes: usize,
    seed: u64,
    scale: f64,
) -> ConstantsProbe {
    let d = g.dim();
    let mut rng = CounterRng::new(seed, 0);
    let point = |rng: &mut CounterRng| -> Vec<f64> {
        (0..d).map(|_| scale * (2.0 * rng.next_uniform() - 1.0)).collect()
    };
    let mut out = ConstantsProbe::default();
    let h = 1e-3;
    for _ in 0..probes {
        let x = point(&mut rng);
        let y = point(&mut rng);
        let dist: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if dist > 1e-9 {
            if let Some(lip) = g.constants.lip {
                let r = (g.eval(&x) - g.eval(&y)).abs() / dist / lip.max(1e-300);
                out.lip_ratio = Some(out.lip_ratio.unwrap_or(0.0).max(r));
            }
            if let (Some(m2), true) = (g.constants.m2, g.has_grad()) {
                let gx = g.grad(&x).unwrap();
                let gy = g.grad(&y).unwrap();
                let gd: f64 = gx
                    .iter()
                    .zip(&gy)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let r = gd / dist / m2.max(1e-300);
                out.m2_ratio = Some(out.m2_ratio.unwrap_or(0.0).max(r));
            }
        }
        let i = (rng.next_uniform() * d as f64) as usize % d;
        let j = (rng.next_uniform() * d as f64) as usize % d;
        let k = (rng.next_uniform() * d as f64) as usize % d;
        if let Some(g2) = g.constants.g2_inf {
            let fd = second_difference(g, &x, i, j, h).abs() / (h * h);
            out.g2_ratio = Some(out.g2_ratio.unwrap_or(0.0).max(fd / g2.max(1e-300)));
        }
        if let Some(g3) = g.constants.g3_inf {
            if g3 > 0.0 {
                let mut xp = x.clone();
                xp[k] += h;
                let fd =
                    (second_difference(g, &xp, i, j, h) - second_difference(g, &x, i, j, h)).abs()
                        / (h * h * h);
                out.g3_ratio = Some(out.g3_ratio.unwrap_or(0.0).max(fd / g3));
            }
        }
    }
    out
}

fn second_difference(g: &SmoothTestFunction, x: &[f64], i: usize, j: usize, h: f64) -> f64 {
    let mut xi = x.to_vec();
    xi[i] += h;
    let mut xj = x.to_vec();
    xj[j] += h;
    let mut xij = xi.clone();
    xij[j] += h;
    g.eval(&xij) - g.eval(&xi) - g.eval(&xj) + g.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_gaussian_means() {
        let g = cosine_test_function(&[1.0], 0.0);
        let target = GaussianTarget::identity(1);
        let (v, e) = gaussian_expectation(&g, &target, &GaussianMethod::Analytic).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(e, 0.0);

        let odd = cosine_test_function(&[1.0], std::f64::consts::FRAC_PI_2);
        let (v, _) = gaussian_expectation(&odd, &target, &GaussianMethod::Analytic).unwrap();
        assert!(v.abs() < 1e-16);

        let g2 = cosine_test_function(&[1.0, 1.0], 0.0);
        let target2 = GaussianTarget::identity(2);
        let (v, _) = gaussian_expectation(&g2, &target2, &GaussianMethod::Analytic).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn hermite_rule_frozen_three_point() {
        let rule = hermite_rule(3).unwrap();
        // points 0, +/-sqrt(3); weights 2/3, 1/6, 1/6
        assert!((rule[1].0).abs() < 1e-14);
        assert!((rule[0].0 + 3.0f64.sqrt()).abs() < 1e-13);
        assert!((rule[2].0 - 3.0f64.sqrt()).abs() < 1e-13);
        assert!((rule[1].1 - 2.0 / 3.0).abs() < 1e-14);
        assert!((rule[0].1 - 1.0 / 6.0).abs() < 1e-14);
        let m2: f64 = rule.iter().map(|(p, w)| w * p * p).sum();
        let m4: f64 = rule.iter().map(|(p, w)| w * p * p * p * p).sum();
        assert!((m2 - 1.0).abs() < 1e-13);
        // a 3-node rule integrates polynomials up to degree 5 exactly
        assert!((m4 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_analytic_cosine() {
        let g = cosine_test_function(&[1.0], 0.0);
        let target = GaussianTarget::identity(1);
        let (v, e) =
            gaussian_expectation(&g, &target, &GaussianMethod::Quadrature { nodes: 64 }).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-12);
        assert!(e < 1e-12);

        // 2d with correlation
        let c = DMat::from_rows(&[vec![1.0, 0.3], vec![0.3, 2.0]]);
        let target = GaussianTarget::new(c).unwrap();
        let g = cosine_test_function(&[0.7, -1.1], 0.4);
        let (quad, err) =
            gaussian_expectation(&g, &target, &GaussianMethod::Quadrature { nodes: 64 }).unwrap();
        let (exact, _) = gaussian_expectation(&g, &target, &GaussianMethod::Analytic).unwrap();
        assert!((quad - exact).abs() < 1e-10, "{quad} vs {exact}");
        assert!(err < 1e-10);
    }

    #[test]
    fn quadratic_diagnostic_via_quadrature() {
        let g = quadratic_test_function(DMat::identity(2));
        let target = GaussianTarget::identity(2);
        let (analytic, _) = gaussian_expectation(&g, &target, &GaussianMethod::Analytic).unwrap();
        assert!((analytic - 2.0).abs() < 1e-15);
        let (quad, _) =
            gaussian_expectation(&g, &target, &GaussianMethod::Quadrature { nodes: 32 }).unwrap();
        assert!((quad - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_target_drops_null_directions() {
        let c = DMat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let target = GaussianTarget::new(c).unwrap();
        let g = cosine_test_function(&[1.0, 0.0], 0.0);
        let (quad, _) =
            gaussian_expectation(&g, &target, &GaussianMethod::Quadrature { nodes: 48 }).unwrap();
        let (exact, _) = gaussian_expectation(&g, &target, &GaussianMethod::Analytic).unwrap();
        assert!((quad - exact).abs() < 1e-11);
    }

    #[test]
    fn gaussian_mc_is_deterministic_and_consistent() {
        let g = cosine_test_function(&[1.0], 0.0);
        let target = GaussianTarget::identity(1);
        let cfg = McConfig::new(50_000, 1, 9, 500);
        let (a, ea) = gaussian_expectation(&g, &target, &GaussianMethod::Mc(cfg)).unwrap();
        let (b, _) = gaussian_expectation(&g, &target, &GaussianMethod::Mc(cfg)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((a - (-0.5f64).exp()).abs() < ea.max(0.01));
    }

    #[test]
    fn discrepancy_product_statistic() {
        let model = ProductModel::rademacher(2);
        let stat = StatisticVector::monomial(vec![0, 1]);
        let g = cosine_test_function(&[1.0], 0.0);
        let target = GaussianTarget::identity(1);
        let r = discrepancy(&model, &stat, &g, &target, &EvalMode::Exact).unwrap();
        let want = (1.0f64.cos() - (-0.5f64).exp()).abs();
        assert!((r.lhs - want).abs() < 1e-12);
        assert!((r.lhs - 0.066_228_4).abs() < 1e-6);
        assert_eq!(r.lhs_error, 0.0);
    }

    #[test]
    fn discrepancy_binomial_sum() {
        let model = ProductModel::rademacher(4);
        let stat = StatisticVector::scaled_sum(4, 2.0);
        let g = cosine_test_function(&[1.0], 0.0);
        let target = GaussianTarget::identity(1);
        let r = discrepancy(&model, &stat, &g, &target, &EvalMode::Exact).unwrap();
        let mean_f = (2.0 * 2.0f64.cos() + 8.0 * 1.0f64.cos() + 6.0) / 16.0;
        assert!((r.mean_f - mean_f).abs() < 1e-14);
        assert!((r.lhs - (mean_f - (-0.5f64).exp()).abs()).abs() < 1e-14);
    }

    #[test]
    fn exact_mode_refuses_sampler_components() {
        let draw = Arc::new(|seed: u64, ctr: u64| crate::rng::draw_uniform(seed, ctr));
        let comp = crate::model::ComponentDistribution::sampler(draw, None);
        let model = ProductModel::new(vec![comp]).unwrap();
        let stat = StatisticVector::scalar(|x| x[0]);
        let g = cosine_test_function(&[1.0], 0.0);
        let target = GaussianTarget::identity(1);
        assert!(matches!(
            discrepancy(&model, &stat, &g, &target, &EvalMode::Exact),
            Err(Error::NotExactMode)
        ));
    }

    #[test]
    fn suite_passes_on_anchor_instances() {
        let instances = vec![
            BoundCheckInstance {
                id: "product".into(),
                model: ProductModel::rademacher(2),
                stat: StatisticVector::monomial(vec![0, 1]),
                target: GaussianTarget::identity(1),
                g: cosine_test_function(&[1.0], 0.0),
                kind: InstanceKind::Rademacher,
            },
            BoundCheckInstance {
                id: "scaled-sum".into(),
                model: ProductModel::rademacher(4),
                stat: StatisticVector::scaled_sum(4, 2.0),
                target: GaussianTarget::identity(1),
                g: cosine_test_function(&[1.0], 0.0),
                kind: InstanceKind::Rademacher,
            },
        ];
        let rows =
            bound_check_suite(&instances, &[0.5], &[BoundForm::Aggregate, BoundForm::Split])
                .unwrap();
        assert!(!rows.is_empty());
        for row in &rows {
            assert!(row.pass, "row failed: {row:?}");
        }
        // the slepian aggregate row for the product anchor: 0.0662 <= 2/3
        let anchor = rows
            .iter()
            .find(|r| r.instance == "product" && r.calculator == "generic" && r.form == "aggregate" && r.method == "slepian")
            .unwrap();
        assert!((anchor.bound_total - 2.0 / 3.0).abs() < 1e-12);
        assert!((anchor.slack - (2.0 / 3.0 - 0.066_228_353_8)).abs() < 1e-6);
    }

    #[test]
    fn probe_never_exceeds_declared_constants() {
        let g = cosine_test_function(&[0.8, -1.2], 0.3);
        let p = probe_constants(&g, 200, 31, 2.0);
        for r in [p.lip_ratio, p.m2_ratio, p.g2_ratio, p.g3_ratio] {
            let r = r.unwrap();
            assert!(r <= 1.0 + 1e-6, "ratio {r}");
        }
    }
}
