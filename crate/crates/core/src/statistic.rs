//! Vector-valued statistics of an assignment.

use std::sync::Arc;

type EvalFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type SubstEvalFn = dyn Fn(usize, &[f64], f64) -> Vec<f64> + Send + Sync;

/// A measurable map from assignments to `R^d`.
///
/// `eval` must be pure: the same assignment always produces the same
/// output. `subst_eval`, when present, returns the statistic at the
/// assignment with one coordinate replaced, computed by a closed-form
/// update rather than a fresh evaluation; it is both a speedup and an
/// independent arithmetic route that the tests cross-check against the
/// generic difference operators.
#[derive(Clone)]
pub struct StatisticVector {
    dim: usize,
    eval: Arc<EvalFn>,
    subst_eval: Option<Arc<SubstEvalFn>>,
}

impl std::fmt::Debug for StatisticVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StatisticVector")
            .field("dim", &self.dim)
            .field("has_subst_eval", &self.subst_eval.is_some())
            .finish()
    }
}

impl StatisticVector {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        assert!(dim >= 1, "statistic dimension must be at least 1");
        StatisticVector {
            dim,
            eval: Arc::new(eval),
            subst_eval: None,
        }
    }

    pub fn scalar<F>(eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(1, move |x| vec![eval(x)])
    }

    pub fn with_subst_eval<G>(mut self, subst: G) -> Self
    where
        G: Fn(usize, &[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.subst_eval = Some(Arc::new(subst));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let v = (self.eval)(x);
        debug_assert_eq!(v.len(), self.dim);
        v
    }

    pub fn has_subst_eval(&self) -> bool {
        self.subst_eval.is_some()
    }

    /// Statistic at `x` with coordinate `k` replaced by `value`. Uses the
    /// closed-form route when available, otherwise re-evaluates.
    pub fn eval_substituted(&self, k: usize, x: &[f64], value: f64) -> Vec<f64> {
        if let Some(subst) = &self.subst_eval {
            subst(k, x, value)
        } else {
            let mut y = x.to_vec();
            y[k] = value;
            self.eval(&y)
        }
    }

    /// Linear statistic `sum_i coeffs[i] * x_i`.
    pub fn weighted_sum(coeffs: Vec<f64>) -> Self {
        let c2 = coeffs.clone();
        Self::scalar(move |x| x.iter().zip(&coeffs).map(|(xi, ci)| xi * ci).sum())
            .with_subst_eval(move |k, x, v| {
                let base: f64 = x.iter().zip(&c2).map(|(xi, ci)| xi * ci).sum();
                vec![base + c2[k] * (v - x[k])]
            })
    }

    /// `(x_1 + ... + x_n) / scale`.
    pub fn scaled_sum(n: usize, scale: f64) -> Self {
        Self::weighted_sum(vec![1.0 / scale; n])
    }

    /// Product of the coordinates named in `indices`.
    pub fn monomial(indices: Vec<usize>) -> Self {
        Self::scalar(move |x| indices.iter().map(|&i| x[i]).product())
    }

    /// Stack several scalar statistics into one vector statistic.
    pub fn stack(parts: Vec<StatisticVector>) -> Self {
        assert!(parts.iter().all(|p| p.dim == 1));
        let dim = parts.len();
        let evals: Vec<Arc<EvalFn>> = parts.iter().map(|p| p.eval.clone()).collect();
        let all_subst = parts.iter().all(|p| p.subst_eval.is_some());
        let out = Self::new(dim, {
            let evals = evals.clone();
            move |x| evals.iter().map(|e| e(x)[0]).collect()
        });
        if all_subst {
            let substs: Vec<Arc<SubstEvalFn>> =
                parts.iter().map(|p| p.subst_eval.clone().unwrap()).collect();
            out.with_subst_eval(move |k, x, v| substs.iter().map(|s| s(k, x, v)[0]).collect())
        } else {
            out
        }
    }
}

/// A multilinear polynomial `sum_t coeff_t * prod_{i in vars_t} x_i`.
///
/// The workhorse of the randomized test corpus: every exact-mode
/// identity in this crate is exercised on random instances of these.
#[derive(Debug, Clone)]
pub struct MultilinearPoly {
    pub terms: Vec<(f64, Vec<usize>)>,
}

impl MultilinearPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, vars)| c * vars.iter().map(|&i| x[i]).product::<f64>())
            .sum()
    }

    /// Expected value under independent coordinates with the given means.
    pub fn mean_under(&self, coord_means: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, vars)| c * vars.iter().map(|&i| coord_means[i]).product::<f64>())
            .sum()
    }

    /// As a scalar statistic, optionally centered to mean zero under the
    /// given coordinate means.
    pub fn statistic(&self, center_at: Option<&[f64]>) -> StatisticVector {
        let poly = self.clone();
        let shift = center_at.map_or(0.0, |means| poly.mean_under(means));
        let poly2 = poly.clone();
        StatisticVector::scalar(move |x| poly.eval(x) - shift).with_subst_eval(move |k, x, v| {
            let mut out = -shift;
            for (c, vars) in &poly2.terms {
                let mut prod = *c;
                for &i in vars {
                    prod *= if i == k { v } else { x[i] };
                }
                out += prod;
            }
            vec![out]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_sum_substitution_matches_reeval() {
        let f = StatisticVector::weighted_sum(vec![1.0, -2.0, 0.5]);
        let x = [1.0, 3.0, -4.0];
        let direct = {
            let mut y = x;
            y[1] = 7.0;
            f.eval(&y)[0]
        };
        assert!((f.eval_substituted(1, &x, 7.0)[0] - direct).abs() < 1e-14);
    }

    #[test]
    fn multilinear_centering() {
        let p = MultilinearPoly {
            terms: vec![(2.0, vec![0]), (1.0, vec![0, 1]), (0.5, vec![])],
        };
        // coordinates with means (0.5, -1)
        let means = [0.5, -1.0];
        assert!((p.mean_under(&means) - (2.0 * 0.5 + 1.0 * (0.5 * -1.0) + 0.5)).abs() < 1e-15);
        let f = p.statistic(Some(&means));
        let v = f.eval(&[0.5, -1.0]);
        assert!((v[0] - 0.0).abs() < 1e-15);
    }

    #[test]
    fn stack_combines_coordinates() {
        let f = StatisticVector::stack(vec![
            StatisticVector::weighted_sum(vec![1.0, 0.0]),
            StatisticVector::weighted_sum(vec![0.0, 1.0]),
        ]);
        assert_eq!(f.dim(), 2);
        assert_eq!(f.eval(&[3.0, 4.0]), vec![3.0, 4.0]);
        assert_eq!(f.eval_substituted(0, &[3.0, 4.0], -1.0), vec![-1.0, 4.0]);
    }
}
