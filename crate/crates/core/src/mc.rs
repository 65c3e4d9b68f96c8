//! Monte Carlo counterparts of the exact operators.
//!
//! Estimates the covariance, the covariation mean and variance, and the
//! Laplacian third moments from outer samples. Per sample:
//!
//! * Laplacians are computed by atom-averaging (exact) on finite
//!   coordinates and by independent coordinate redraws on sampler
//!   coordinates;
//! * past/future conditional expectations are estimated by redrawing the
//!   complementary coordinates `inner_resamples` times;
//! * the covariation second moment uses two independent half-estimates,
//!   so its product is an unbiased estimate of the square and the
//!   variance estimate carries no `O(1/inner_resamples)` bias.
//!
//! Every draw is a pure function of `(seed, sample index, draw index)`,
//! so results are bitwise identical for a fixed config regardless of
//! thread count; `chunk_size` fixes the batch-means grouping and the
//! summation order.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bounds::{BoundStats, StatErrors};
use crate::error::{Error, Result};
use crate::matrix::DMat;
use crate::model::{ComponentKind, ProductModel};
use crate::rng::CounterRng;
use crate::statistic::StatisticVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct McConfig {
    pub outer_samples: usize,
    pub inner_resamples: usize,
    pub seed: u64,
    pub chunk_size: usize,
}

impl McConfig {
    pub fn new(outer_samples: usize, inner_resamples: usize, seed: u64, chunk_size: usize) -> Self {
        McConfig {
            outer_samples,
            inner_resamples,
            seed,
            chunk_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.outer_samples == 0 {
            return Err(Error::InvalidMcConfig("outer_samples must be positive".into()));
        }
        if self.inner_resamples == 0 {
            return Err(Error::InvalidMcConfig(
                "inner_resamples must be positive".into(),
            ));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidMcConfig("chunk_size must be positive".into()));
        }
        Ok(())
    }
}

/// Estimates with batch-means standard errors.
#[derive(Debug, Clone)]
pub struct McEstimates {
    pub dim: usize,
    pub alpha: f64,
    pub config: McConfig,
    pub sigma: DMat,
    pub sigma_se: DMat,
    pub z_mean: DMat,
    pub z_mean_se: DMat,
    pub z_var: DMat,
    pub z_var_se: DMat,
    pub third: Vec<f64>,
    pub third_se: Vec<f64>,
    /// Set when `inner_resamples < 2`: the two half-estimates coincide
    /// and the variance estimate regains the nested-resampling bias.
    pub var_estimator_biased: bool,
}

impl McEstimates {
    pub fn bound_stats(&self) -> BoundStats {
        BoundStats::from_summary(
            self.sigma.clone(),
            self.z_mean.clone(),
            self.z_var.clone(),
            self.third.clone(),
            Some(StatErrors {
                sigma: self.sigma_se.clone(),
                z_var: self.z_var_se.clone(),
                third: self.third_se.clone(),
            }),
        )
    }
}

/// Accumulated sums for one chunk of samples.
#[derive(Debug, Clone)]
struct ChunkAccum {
    count: usize,
    f: Vec<f64>,
    products: Vec<f64>,
    third: Vec<f64>,
    z: Vec<f64>,
    cross: Vec<f64>,
}

impl ChunkAccum {
    fn zero(d: usize) -> Self {
        ChunkAccum {
            count: 0,
            f: vec![0.0; d],
            products: vec![0.0; d * d],
            third: vec![0.0; d],
            z: vec![0.0; d * d],
            cross: vec![0.0; d * d],
        }
    }
}

struct SampleCtx<'a> {
    model: &'a ProductModel,
    stat: &'a StatisticVector,
    alpha: f64,
    inner: usize,
    seed: u64,
}

impl SampleCtx<'_> {
    fn draw_coordinate(&self, k: usize, rng: &mut CounterRng) -> f64 {
        match self.model.component(k).kind() {
            ComponentKind::Finite(_) => self.model.component(k).pick_atom(rng.next_uniform()),
            ComponentKind::Sampler { draw, .. } => draw(self.seed, rng.next_counter()),
        }
    }

    /// `E_k[F]` at `x`: exact atom average on finite coordinates,
    /// `inner` redraws otherwise.
    fn integrate_coord(&self, x: &[f64], k: usize, rng: &mut CounterRng) -> Vec<f64> {
        let d = self.stat.dim();
        match self.model.component(k).kind() {
            ComponentKind::Finite(atoms) => {
                let mut out = vec![0.0; d];
                for a in atoms {
                    let v = self.stat.eval_substituted(k, x, a.value);
                    for i in 0..d {
                        out[i] += a.prob * v[i];
                    }
                }
                out
            }
            ComponentKind::Sampler { draw, .. } => {
                let mut out = vec![0.0; d];
                for _ in 0..self.inner {
                    let xi = draw(self.seed, rng.next_counter());
                    let v = self.stat.eval_substituted(k, x, xi);
                    for i in 0..d {
                        out[i] += v[i];
                    }
                }
                for o in &mut out {
                    *o /= self.inner as f64;
                }
                out
            }
        }
    }

    /// Laplacian of every statistic coordinate in direction `k` at `x`.
    fn laplacian(&self, x: &[f64], fx: &[f64], k: usize, rng: &mut CounterRng) -> Vec<f64> {
        let ek = self.integrate_coord(x, k, rng);
        fx.iter().zip(ek).map(|(f, e)| f - e).collect()
    }

    /// Mean of `lap_k F` over `count` redraws of the coordinate range
    /// `redraw`, holding the rest of `x` fixed.
    fn conditional_laplacian(
        &self,
        x: &[f64],
        k: usize,
        redraw: std::ops::Range<usize>,
        count: usize,
        rng: &mut CounterRng,
    ) -> Vec<f64> {
        let d = self.stat.dim();
        let mut out = vec![0.0; d];
        let mut y = x.to_vec();
        for _ in 0..count {
            for j in redraw.clone() {
                y[j] = self.draw_coordinate(j, rng);
            }
            let fy = self.stat.eval(&y);
            let lap = self.laplacian(&y, &fy, k, rng);
            for i in 0..d {
                out[i] += lap[i];
            }
            y[redraw.start..redraw.end].copy_from_slice(&x[redraw.start..redraw.end]);
        }
        for o in &mut out {
            *o /= count as f64;
        }
        out
    }

    fn run_sample(&self, sample: usize, acc: &mut ChunkAccum) -> Result<()> {
        let n = self.model.n();
        let d = self.stat.dim();
        let mut rng = CounterRng::new(self.seed, sample as u64);
        let base_counter = rng.peek().1;

        let x: Vec<f64> = (0..n).map(|k| self.draw_coordinate(k, &mut rng)).collect();
        let fx = self.stat.eval(&x);
        if fx.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample {
                seed: self.seed,
                counter: base_counter,
            });
        }

        acc.count += 1;
        for i in 0..d {
            acc.f[i] += fx[i];
            for j in 0..d {
                acc.products[i * d + j] += fx[i] * fx[j];
            }
        }

        // two independent half-estimates of the covariation entry
        let half_a = self.inner.div_ceil(2);
        let half_b = self.inner - half_a;
        let mut z_a = vec![0.0; d * d];
        let mut z_b = vec![0.0; d * d];
        for k in 0..n {
            let lap = self.laplacian(&x, &fx, k, &mut rng);
            for i in 0..d {
                acc.third[i] += lap[i].abs().powi(3);
            }
            let mut halves = [vec![0.0; d], vec![0.0; d]];
            for (h, count) in [(0usize, half_a), (1usize, half_b)] {
                if count == 0 {
                    continue;
                }
                let past = self.conditional_laplacian(&x, k, (k + 1)..n, count, &mut rng);
                let future = self.conditional_laplacian(&x, k, 0..k, count, &mut rng);
                for j in 0..d {
                    halves[h][j] = self.alpha * past[j] + (1.0 - self.alpha) * future[j];
                }
            }
            if half_b == 0 {
                halves[1] = halves[0].clone();
            }
            for i in 0..d {
                for j in 0..d {
                    z_a[i * d + j] += lap[i] * halves[0][j];
                    z_b[i * d + j] += lap[i] * halves[1][j];
                }
            }
        }
        for e in 0..d * d {
            acc.z[e] += 0.5 * (z_a[e] + z_b[e]);
            acc.cross[e] += z_a[e] * z_b[e];
        }
        Ok(())
    }
}

/// One assignment of the model drawn from the stream: inverse-CDF on
/// finite coordinates, the component's own sampler otherwise.
pub fn draw_assignment(model: &ProductModel, seed: u64, rng: &mut CounterRng) -> Vec<f64> {
    (0..model.n())
        .map(|k| match model.component(k).kind() {
            ComponentKind::Finite(_) => model.component(k).pick_atom(rng.next_uniform()),
            ComponentKind::Sampler { draw, .. } => draw(seed, rng.next_counter()),
        })
        .collect()
}

/// Batch-means standard error of a quantity whose per-chunk means are
/// given: `sd(chunk means) / sqrt(#chunks)`.
pub fn batch_se(chunk_means: &[f64]) -> f64 {
    let c = chunk_means.len();
    if c < 2 {
        return 0.0;
    }
    let mean = chunk_means.iter().sum::<f64>() / c as f64;
    let var = chunk_means
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / (c - 1) as f64;
    (var / c as f64).sqrt()
}

pub fn mc_estimates(
    model: &Arc<ProductModel>,
    stat: &StatisticVector,
    alpha: f64,
    cfg: &McConfig,
) -> Result<McEstimates> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let d = stat.dim();
    let ctx = SampleCtx {
        model,
        stat,
        alpha,
        inner: cfg.inner_resamples,
        seed: cfg.seed,
    };
    let n_chunks = cfg.outer_samples.div_ceil(cfg.chunk_size);
    let chunks: Vec<ChunkAccum> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * cfg.chunk_size;
            let hi = ((c + 1) * cfg.chunk_size).min(cfg.outer_samples);
            let mut acc = ChunkAccum::zero(d);
            for s in lo..hi {
                ctx.run_sample(s, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let total = cfg.outer_samples as f64;
    let mut f_mean = vec![0.0; d];
    let mut p_mean = vec![0.0; d * d];
    let mut z_mean_v = vec![0.0; d * d];
    let mut w_mean = vec![0.0; d * d];
    let mut third_mean = vec![0.0; d];
    for acc in &chunks {
        for i in 0..d {
            f_mean[i] += acc.f[i];
            third_mean[i] += acc.third[i];
        }
        for e in 0..d * d {
            p_mean[e] += acc.products[e];
            z_mean_v[e] += acc.z[e];
            w_mean[e] += acc.cross[e];
        }
    }
    for v in f_mean.iter_mut() {
        *v /= total;
    }
    for v in third_mean.iter_mut() {
        *v /= total;
    }
    for v in p_mean.iter_mut().chain(&mut z_mean_v).chain(&mut w_mean) {
        *v /= total;
    }

    let mut sigma = DMat::zeros(d);
    let mut z_mean = DMat::zeros(d);
    let mut z_var = DMat::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let e = i * d + j;
            sigma.set(i, j, p_mean[e] - f_mean[i] * f_mean[j]);
            z_mean.set(i, j, z_mean_v[e]);
            z_var.set(i, j, w_mean[e] - z_mean_v[e] * z_mean_v[e]);
        }
    }

    // batch-means standard errors from per-chunk means, with the
    // delta-method influence values for the two nonlinear estimates
    let chunk_means = |extract: &dyn Fn(&ChunkAccum) -> f64| -> Vec<f64> {
        chunks
            .iter()
            .map(|acc| extract(acc) / acc.count as f64)
            .collect()
    };
    let mut sigma_se = DMat::zeros(d);
    let mut z_mean_se = DMat::zeros(d);
    let mut z_var_se = DMat::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let e = i * d + j;
            let (mi, mj) = (f_mean[i], f_mean[j]);
            let sig_infl = chunk_means(&|acc: &ChunkAccum| {
                acc.products[e] - mi * acc.f[j] - mj * acc.f[i]
            });
            sigma_se.set(i, j, batch_se(&sig_infl));
            let zc = chunk_means(&|acc: &ChunkAccum| acc.z[e]);
            z_mean_se.set(i, j, batch_se(&zc));
            let zm = z_mean_v[e];
            let var_infl =
                chunk_means(&|acc: &ChunkAccum| acc.cross[e] - 2.0 * zm * acc.z[e]);
            z_var_se.set(i, j, batch_se(&var_infl));
        }
    }
    let third_se: Vec<f64> = (0..d)
        .map(|i| batch_se(&chunk_means(&|acc: &ChunkAccum| acc.third[i])))
        .collect();

    Ok(McEstimates {
        dim: d,
        alpha,
        config: *cfg,
        sigma,
        sigma_se,
        z_mean,
        z_mean_se,
        z_var,
        z_var_se,
        third: third_mean,
        third_se,
        var_estimator_biased: cfg.inner_resamples < 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistic::StatisticVector;

    fn product_stat() -> StatisticVector {
        StatisticVector::monomial(vec![0, 1])
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::new(0, 1, 1, 1).validate().is_err());
        assert!(McConfig::new(1, 0, 1, 1).validate().is_err());
        assert!(McConfig::new(1, 1, 1, 0).validate().is_err());
        assert!(McConfig::new(1, 1, 1, 1).validate().is_ok());
    }

    #[test]
    fn product_statistic_recovers_exact_values() {
        let model = ProductModel::rademacher(2);
        let cfg = McConfig::new(10_000, 32, 7, 256);
        let est = mc_estimates(&model, &product_stat(), 0.5, &cfg).unwrap();
        // exact: sigma = 1, Z constant 1, third moments 2
        let se = est.z_mean_se.get(0, 0).max(1e-4);
        assert!(
            (est.z_mean.get(0, 0) - 1.0).abs() <= 3.0 * se,
            "z mean {} se {se}",
            est.z_mean.get(0, 0)
        );
        let vse = est.z_var_se.get(0, 0).max(1e-4);
        assert!(
            est.z_var.get(0, 0).abs() <= 3.0 * vse,
            "z var {} se {vse}",
            est.z_var.get(0, 0)
        );
        assert!((est.sigma.get(0, 0) - 1.0).abs() <= 3.0 * est.sigma_se.get(0, 0).max(1e-4));
        assert!((est.third[0] - 2.0).abs() <= 3.0 * est.third_se[0].max(1e-4));
        assert!(!est.var_estimator_biased);
    }

    #[test]
    fn scaled_sum_third_moment() {
        let n = 10;
        let model = ProductModel::rademacher(n);
        let stat = StatisticVector::scaled_sum(n, (n as f64).sqrt());
        let cfg = McConfig::new(4_000, 16, 99, 128);
        let est = mc_estimates(&model, &stat, 0.5, &cfg).unwrap();
        let want = (n as f64).powf(-0.5);
        assert!(
            (est.third[0] - want).abs() <= 3.0 * est.third_se[0].max(1e-6),
            "third {} want {want}",
            est.third[0]
        );
    }

    #[test]
    fn identical_configs_are_bitwise_identical() {
        let model = ProductModel::rademacher(3);
        let stat = StatisticVector::scalar(|x| x[0] * x[1] + 0.5 * x[2]);
        let cfg = McConfig::new(2_000, 8, 42, 64);
        let a = mc_estimates(&model, &stat, 0.25, &cfg).unwrap();
        let b = mc_estimates(&model, &stat, 0.25, &cfg).unwrap();
        assert_eq!(a.sigma.data(), b.sigma.data());
        assert_eq!(a.z_mean.data(), b.z_mean.data());
        assert_eq!(a.z_var.data(), b.z_var.data());
        assert_eq!(a.third, b.third);
        assert_eq!(a.z_var_se.data(), b.z_var_se.data());
    }

    #[test]
    fn sampler_components_estimate_linear_statistics() {
        // uniform [-sqrt(3), sqrt(3)]: zero mean, unit variance
        let draw = Arc::new(|seed: u64, ctr: u64| {
            (crate::rng::draw_uniform(seed, ctr) - 0.5) * 2.0 * 3.0f64.sqrt()
        });
        let comp = crate::model::ComponentDistribution::sampler(draw, None);
        let model = ProductModel::new(vec![comp.clone(), comp]).unwrap();
        let stat = StatisticVector::scalar(|x| x[0] + x[1]);
        let cfg = McConfig::new(20_000, 16, 5, 256);
        let est = mc_estimates(&model, &stat, 0.5, &cfg).unwrap();
        // Var(X1 + X2) = 2; covariation mean should match
        assert!(
            (est.sigma.get(0, 0) - 2.0).abs() <= 4.0 * est.sigma_se.get(0, 0).max(1e-3),
            "sigma {}",
            est.sigma.get(0, 0)
        );
        assert!(
            (est.z_mean.get(0, 0) - 2.0).abs() <= 4.0 * est.z_mean_se.get(0, 0).max(1e-3),
            "z mean {}",
            est.z_mean.get(0, 0)
        );
    }

    #[test]
    fn non_finite_sample_reports_location() {
        let model = ProductModel::rademacher(1);
        let stat = StatisticVector::scalar(|x| 1.0 / (x[0] - 1.0));
        let cfg = McConfig::new(100, 2, 3, 10);
        match mc_estimates(&model, &stat, 0.5, &cfg) {
            Err(Error::NonFiniteSample { seed, .. }) => assert_eq!(seed, 3),
            other => panic!("expected non-finite sample error, got {other:?}"),
        }
    }

    #[test]
    fn single_inner_resample_flags_biased_variance() {
        let model = ProductModel::rademacher(2);
        let cfg = McConfig::new(500, 1, 11, 50);
        let est = mc_estimates(&model, &product_stat(), 0.5, &cfg).unwrap();
        assert!(est.var_estimator_biased);
    }
}
