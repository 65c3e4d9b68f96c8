//! The operator identity suite.
//!
//! Every algebraic fact the difference operators satisfy on finite
//! product spaces, checked by enumeration on a corpus instance and
//! reported as one row per check. The suite also accepts a deliberate
//! operator mutation so its own detection power can be exercised: a
//! mutated run must produce failing rows.

use rayon::prelude::*;

use crate::corpus::CorpusInstance;
use crate::error::Result;
use crate::table::{JointTable, RandomVariableTable};
use crate::verify::cosine_test_function;

#[derive(Debug, Clone)]
pub struct IdentityRow {
    pub check: String,
    pub instance: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Deliberate operator corruption for harness self-tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Negate the resampling-RMS operator (breaks its nonnegativity).
    RmsSignFlip,
    /// Negate the coordinate Laplacian (breaks the conditional-increment
    /// and pairing identities).
    LaplacianSignFlip,
}

#[derive(Clone, Copy)]
struct Ops {
    mutation: Mutation,
}

impl Ops {
    fn laplacian(&self, u: &RandomVariableTable, k: usize) -> Result<RandomVariableTable> {
        let t = u.laplacian(k)?;
        Ok(match self.mutation {
            Mutation::LaplacianSignFlip => t.map(|v| -v),
            _ => t,
        })
    }

    fn rms(&self, u: &RandomVariableTable, k: usize) -> Result<RandomVariableTable> {
        let t = u.resample_rms(k)?;
        Ok(match self.mutation {
            Mutation::RmsSignFlip => t.map(|v| -v),
            _ => t,
        })
    }
}

fn row(check: &str, instance: &str, max_violation: f64, tolerance: f64) -> IdentityRow {
    IdentityRow {
        check: check.to_string(),
        instance: instance.to_string(),
        max_violation,
        tolerance,
        pass: max_violation <= tolerance,
    }
}

fn instance_rows(
    inst: &CorpusInstance,
    alphas: &[f64],
    ops: Ops,
) -> Result<Vec<IdentityRow>> {
    let table = JointTable::build(&inst.model, &inst.stat)?;
    let n = table.space().n();
    let d = table.dim();
    let id = inst.id.as_str();
    let comps: Vec<RandomVariableTable> = (0..d).map(|i| table.component(i)).collect();
    let (_, cov) = table.moments();
    let mut rows = Vec::new();

    // product weights form a probability vector
    let weight_sum: f64 = table.space().weights().iter().sum();
    rows.push(row(
        "weights_normalized",
        id,
        (weight_sum - 1.0).abs(),
        1e-12 * table.len() as f64,
    ));

    let laps: Vec<Vec<RandomVariableTable>> = (0..n)
        .map(|k| comps.iter().map(|c| ops.laplacian(c, k)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let rms: Vec<Vec<RandomVariableTable>> = (0..n)
        .map(|k| comps.iter().map(|c| ops.rms(c, k)).collect::<Result<_>>())
        .collect::<Result<_>>()?;

    // covariance formula, covariation mean, and alpha invariance
    let mut cov_violation = 0.0f64;
    let mut zero_mean_violation = 0.0f64;
    let mut pairing_sums: Vec<Vec<f64>> = vec![Vec::new(); d * d];
    for &alpha in alphas {
        for j in 0..d {
            let smoothed: Vec<RandomVariableTable> = (0..n)
                .map(|k| {
                    let lap = ops.laplacian(&comps[j], k)?;
                    let past = lap.cond_past(k + 1)?;
                    let future = lap.cond_future(k)?;
                    Ok(past.zip_with(&future, |p, f| alpha * p + (1.0 - alpha) * f))
                })
                .collect::<Result<_>>()?;
            for sm in &smoothed {
                zero_mean_violation = zero_mean_violation.max(sm.expectation().abs());
            }
            for i in 0..d {
                let mut total = 0.0;
                for k in 0..n {
                    total += laps[k][i].zip_with(&smoothed[k], |a, b| a * b).expectation();
                }
                cov_violation = cov_violation.max((total - cov.get(i, j)).abs());
                pairing_sums[i * d + j].push(total);
            }
        }
    }
    rows.push(row("covariance_formula", id, cov_violation, 1e-9));
    rows.push(row("smoothed_zero_mean", id, zero_mean_violation, 1e-12));
    let alpha_spread = pairing_sums
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .fold(0.0f64, f64::max);
    rows.push(row("alpha_invariance", id, alpha_spread, 1e-9));

    // variance decomposition
    let mut es_violation = f64::NEG_INFINITY;
    let mut es_equality = 0.0f64;
    let mut l2_match = 0.0f64;
    for i in 0..d {
        let var = cov.get(i, i);
        let lap_l2: f64 = (0..n).map(|k| laps[k][i].map(|v| v * v).expectation()).sum();
        let rms_l2: f64 = (0..n).map(|k| rms[k][i].map(|v| v * v).expectation()).sum();
        es_violation = es_violation.max(var - lap_l2);
        es_equality = es_equality.max((var - lap_l2).abs());
        l2_match = l2_match.max((lap_l2 - rms_l2).abs());
    }
    rows.push(row("efron_stein", id, es_violation, 1e-12));
    if inst.additive {
        rows.push(row("efron_stein_additive_equality", id, es_equality, 1e-9));
    }
    rows.push(row("laplacian_rms_l2_match", id, l2_match, 1e-10));

    // conditional increments, both directions
    let mut past_violation = 0.0f64;
    let mut future_violation = 0.0f64;
    for c in &comps {
        for k in 0..n {
            let past_k = c.cond_past(k + 1)?;
            let lhs = ops.laplacian(&past_k, k)?;
            let rhs = past_k.zip_with(&c.cond_past(k)?, |a, b| a - b);
            past_violation = past_violation.max(lhs.max_abs_diff(&rhs));

            let future_k = c.cond_future(k)?;
            let lhs = ops.laplacian(&future_k, k)?;
            let rhs = future_k.zip_with(&c.cond_future(k + 1)?, |a, b| a - b);
            future_violation = future_violation.max(lhs.max_abs_diff(&rhs));
        }
    }
    rows.push(row("cond_increment_past", id, past_violation, 1e-10));
    rows.push(row("cond_increment_future", id, future_violation, 1e-10));

    // pairing symmetry: E[(lap_k U) V] = E[(lap_k U)(lap_k V)]
    let mut pairing_violation = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for (k, lap_k) in laps.iter().enumerate() {
                let plain = lap_k[i].zip_with(&comps[j], |a, b| a * b).expectation();
                let paired = lap_k[i].zip_with(&laps[k][j], |a, b| a * b).expectation();
                pairing_violation = pairing_violation.max((plain - paired).abs());
            }
        }
    }
    rows.push(row("pairing_symmetry", id, pairing_violation, 1e-10));

    // pointwise square identity and moment contractions
    let mut rms_pointwise = 0.0f64;
    let mut rms_negative = 0.0f64;
    let mut contraction = f64::NEG_INFINITY;
    let mut fourth = f64::NEG_INFINITY;
    for i in 0..d {
        let sq = comps[i].map(|v| v * v).expectation();
        for k in 0..n {
            let lap = &laps[k][i];
            let r = &rms[k][i];
            let lap_sq = lap.map(|v| v * v);
            let cond_sq = lap_sq.integrate_coord(k)?;
            let identity = lap_sq.zip_with(&cond_sq, |a, b| 0.5 * (a + b));
            let r_sq = r.map(|v| v * v);
            rms_pointwise = rms_pointwise.max(r_sq.max_abs_diff(&identity));
            rms_negative = rms_negative.max(
                r.values().iter().fold(0.0f64, |m, &v| m.max(-v)),
            );
            contraction = contraction.max(lap_sq.expectation() - sq);
            fourth = fourth.max(
                r.map(|v| v.powi(4)).expectation() - lap.map(|v| v.powi(4)).expectation(),
            );
        }
    }
    rows.push(row("rms_square_identity", id, rms_pointwise, 1e-10));
    rows.push(row("rms_nonnegative", id, rms_negative, 1e-12));
    rows.push(row("moment_contraction", id, contraction, 1e-12));
    rows.push(row("rms_fourth_moment", id, fourth, 1e-12));

    // approximate chain rule against a cosine with exact constants
    let t: Vec<f64> = vec![0.6; d];
    let f = cosine_test_function(&t, 0.3);
    let g2 = f.constants.g2_inf.unwrap();
    let mut chain = f64::NEG_INFINITY;
    for k in 0..n {
        let f_table = table.scalar_map(|row| f.eval(row));
        let lap_f = ops.laplacian(&f_table, k)?;
        let mut worst = f64::NEG_INFINITY;
        for idx in 0..table.len() {
            let grad = f.grad(table.row(idx))?;
            let linear: f64 = (0..d).map(|i| grad[i] * laps[k][i].at(idx)).sum();
            let lhs = (lap_f.at(idx) - linear).abs();
            let s: f64 = (0..d).map(|i| {
                let v = rms[k][i].at(idx);
                v * v
            })
            .sum();
            let rhs = 0.5 * g2 * 2.0 * d as f64 * s;
            worst = worst.max(lhs - rhs);
        }
        chain = chain.max(worst);
    }
    rows.push(row("chain_rule_residual", id, chain, 1e-9));

    Ok(rows)
}

/// Run every check on every instance. Instances evaluate in parallel;
/// row order follows instance order.
pub fn identity_suite(
    instances: &[CorpusInstance],
    alphas: &[f64],
    mutation: Mutation,
) -> Result<Vec<IdentityRow>> {
    let ops = Ops { mutation };
    let nested: Vec<Vec<IdentityRow>> = instances
        .par_iter()
        .map(|inst| instance_rows(inst, alphas, ops))
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

pub const DEFAULT_ALPHAS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{default_corpus, randomized_corpus};

    #[test]
    fn default_corpus_passes_all_checks() {
        let rows = identity_suite(&default_corpus(), &DEFAULT_ALPHAS, Mutation::None).unwrap();
        assert!(!rows.is_empty());
        for r in &rows {
            assert!(
                r.pass,
                "{} failed on {}: violation {} > {}",
                r.check, r.instance, r.max_violation, r.tolerance
            );
        }
    }

    #[test]
    fn randomized_instances_pass_all_checks() {
        let corpus = randomized_corpus(25, 77, false);
        let rows = identity_suite(&corpus, &DEFAULT_ALPHAS, Mutation::None).unwrap();
        for r in &rows {
            assert!(
                r.pass,
                "{} failed on {}: violation {} > {}",
                r.check, r.instance, r.max_violation, r.tolerance
            );
        }
    }

    #[test]
    fn rms_sign_mutation_is_detected() {
        let rows =
            identity_suite(&default_corpus(), &[0.5], Mutation::RmsSignFlip).unwrap();
        let failing: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
        assert!(!failing.is_empty(), "mutated operator went undetected");
        assert!(failing.iter().any(|r| r.check == "rms_nonnegative"));
    }

    #[test]
    fn laplacian_sign_mutation_is_detected() {
        let rows =
            identity_suite(&default_corpus(), &[0.5], Mutation::LaplacianSignFlip).unwrap();
        let failing: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
        assert!(!failing.is_empty());
        assert!(failing
            .iter()
            .any(|r| r.check == "cond_increment_past" || r.check == "pairing_symmetry"));
    }

    #[test]
    fn empty_corpus_yields_zero_rows() {
        let rows = identity_suite(&[], &DEFAULT_ALPHAS, Mutation::None).unwrap();
        assert!(rows.is_empty());
    }
}
