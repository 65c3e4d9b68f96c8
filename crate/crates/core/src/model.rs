//! Product-space models of independent random variables.
//!
//! Each coordinate carries either a finite atom list (exact enumeration
//! and Monte Carlo both work) or a deterministic sampler of
//! `(seed, counter)` (Monte Carlo only).

use std::sync::Arc;

use crate::error::{Error, Result};

/// Default cap on the number of assignments an exact-mode enumeration
/// may produce.
pub const EXACT_CAP: u64 = 1 << 22;

/// Exact moments of a single coordinate, computable from finite atoms or
/// supplied by hand for sampler components.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    /// E|X|^3
    pub abs3: f64,
    /// E|X - mean|^3
    pub central_abs3: f64,
    /// E|X|^4
    pub abs4: f64,
    /// E|X - mean|^4
    pub central_abs4: f64,
    /// Var(X^2)
    pub var_square: f64,
}

/// One atom of a finite distribution.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

type SamplerFn = dyn Fn(u64, u64) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum ComponentKind {
    Finite(Vec<Atom>),
    Sampler {
        draw: Arc<SamplerFn>,
        moments: Option<MomentSummary>,
    },
}

impl std::fmt::Debug for ComponentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ComponentKind::Finite(atoms) => f.debug_tuple("Finite").field(atoms).finish(),
            ComponentKind::Sampler { moments, .. } => {
                f.debug_struct("Sampler").field("moments", moments).finish()
            }
        }
    }
}

/// The law of one coordinate of the input vector.
#[derive(Debug, Clone)]
pub struct ComponentDistribution {
    kind: ComponentKind,
}

impl ComponentDistribution {
    /// Finite distribution from `(value, prob)` atoms.
    ///
    /// Probabilities must be in (0, 1] and sum to 1 within 1e-12; atom
    /// values must be distinct.
    pub fn finite(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution(
                "at least one atom required".into(),
            ));
        }
        let mut total = 0.0;
        for a in &atoms {
            if !(a.prob > 0.0 && a.prob <= 1.0) {
                return Err(Error::InvalidDistribution(format!(
                    "atom probability {} outside (0, 1]",
                    a.prob
                )));
            }
            if !a.value.is_finite() {
                return Err(Error::InvalidDistribution("non-finite atom value".into()));
            }
            total += a.prob;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "atom probabilities sum to {total}, not 1"
            )));
        }
        for (i, a) in atoms.iter().enumerate() {
            for b in &atoms[i + 1..] {
                if a.value == b.value {
                    return Err(Error::InvalidDistribution(format!(
                        "duplicate atom value {}",
                        a.value
                    )));
                }
            }
        }
        Ok(ComponentDistribution {
            kind: ComponentKind::Finite(atoms),
        })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::finite(
            pairs
                .iter()
                .map(|&(value, prob)| Atom { value, prob })
                .collect(),
        )
    }

    /// Symmetric +/-1 coordinate.
    pub fn rademacher() -> Self {
        Self::from_pairs(&[(1.0, 0.5), (-1.0, 0.5)]).unwrap()
    }

    /// {0, 1} coordinate with success probability `p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "bernoulli p = {p} outside (0, 1)"
            )));
        }
        Self::from_pairs(&[(1.0, p), (0.0, 1.0 - p)])
    }

    /// Zero-mean unit-variance two-point distribution: takes
    /// `sqrt((1-p)/p)` with probability `p` and `-sqrt(p/(1-p))` with
    /// probability `1-p`.
    pub fn standardized_two_point(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "two-point p = {p} outside (0, 1)"
            )));
        }
        let hi = ((1.0 - p) / p).sqrt();
        let lo = -(p / (1.0 - p)).sqrt();
        Self::from_pairs(&[(hi, p), (lo, 1.0 - p)])
    }

    /// Sampler-only coordinate: `draw(seed, counter)` must be a pure
    /// function. `moments` is required by the bound calculators that
    /// need third/fourth moments.
    pub fn sampler(
        draw: Arc<SamplerFn>,
        moments: Option<MomentSummary>,
    ) -> Self {
        ComponentDistribution {
            kind: ComponentKind::Sampler { draw, moments },
        }
    }

    pub fn kind(&self) -> &ComponentKind {
        &self.kind
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.kind {
            ComponentKind::Finite(a) => Some(a),
            ComponentKind::Sampler { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, ComponentKind::Finite(_))
    }

    /// Exact moments: computed from atoms when finite, otherwise the
    /// supplied cache.
    pub fn moments(&self) -> Result<MomentSummary> {
        match &self.kind {
            ComponentKind::Finite(atoms) => Ok(Self::moments_from_atoms(atoms)),
            ComponentKind::Sampler { moments, .. } => moments.ok_or(Error::MissingMoments),
        }
    }

    fn moments_from_atoms(atoms: &[Atom]) -> MomentSummary {
        let mean: f64 = atoms.iter().map(|a| a.prob * a.value).sum();
        let mut variance = 0.0;
        let mut abs3 = 0.0;
        let mut central_abs3 = 0.0;
        let mut abs4 = 0.0;
        let mut central_abs4 = 0.0;
        let mut sq_mean = 0.0;
        let mut sq_sq = 0.0;
        for a in atoms {
            let c = a.value - mean;
            variance += a.prob * c * c;
            abs3 += a.prob * a.value.abs().powi(3);
            central_abs3 += a.prob * c.abs().powi(3);
            abs4 += a.prob * a.value.powi(4);
            central_abs4 += a.prob * c.powi(4);
            sq_mean += a.prob * a.value * a.value;
            sq_sq += a.prob * a.value.powi(4);
        }
        MomentSummary {
            mean,
            variance,
            abs3,
            central_abs3,
            abs4,
            central_abs4,
            var_square: sq_sq - sq_mean * sq_mean,
        }
    }

    /// Inverse-CDF draw for finite atoms, in atom-list order.
    pub fn pick_atom(&self, u: f64) -> f64 {
        match &self.kind {
            ComponentKind::Finite(atoms) => {
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.prob;
                    if u < acc {
                        return a.value;
                    }
                }
                atoms.last().unwrap().value
            }
            ComponentKind::Sampler { .. } => panic!("pick_atom on sampler component"),
        }
    }
}

/// An independent product of component distributions.
#[derive(Debug, Clone)]
pub struct ProductModel {
    components: Vec<ComponentDistribution>,
}

impl ProductModel {
    pub fn new(components: Vec<ComponentDistribution>) -> Result<Arc<Self>> {
        if components.is_empty() {
            return Err(Error::InvalidSpec("model needs at least one coordinate".into()));
        }
        Ok(Arc::new(ProductModel { components }))
    }

    /// `n` independent copies of one distribution.
    pub fn iid(component: ComponentDistribution, n: usize) -> Result<Arc<Self>> {
        Self::new(vec![component; n])
    }

    pub fn rademacher(n: usize) -> Arc<Self> {
        Self::iid(ComponentDistribution::rademacher(), n).unwrap()
    }

    pub fn bernoulli(p: f64, n: usize) -> Result<Arc<Self>> {
        Self::iid(ComponentDistribution::bernoulli(p)?, n)
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, k: usize) -> &ComponentDistribution {
        &self.components[k]
    }

    pub fn components(&self) -> &[ComponentDistribution] {
        &self.components
    }

    pub fn is_exact(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    /// Number of assignments of the finite product space, checked
    /// against `cap`.
    pub fn assignment_count(&self, cap: u64) -> Result<usize> {
        if !self.is_exact() {
            return Err(Error::NotExactMode);
        }
        let mut total: u128 = 1;
        for c in &self.components {
            total *= c.atoms().unwrap().len() as u128;
            if total > cap as u128 {
                return Err(Error::CapExceeded {
                    assignments: total,
                    cap,
                });
            }
        }
        Ok(total as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_invariants_enforced() {
        assert!(ComponentDistribution::from_pairs(&[]).is_err());
        assert!(ComponentDistribution::from_pairs(&[(1.0, 0.7), (0.0, 0.7)]).is_err());
        assert!(ComponentDistribution::from_pairs(&[(1.0, 0.5), (1.0, 0.5)]).is_err());
        assert!(ComponentDistribution::from_pairs(&[(1.0, 1.5), (0.0, -0.5)]).is_err());
        assert!(ComponentDistribution::from_pairs(&[(3.0, 1.0)]).is_ok());
    }

    #[test]
    fn bernoulli_moments_closed_form() {
        for p in [0.3, 0.5, 0.7] {
            let q = 1.0 - p;
            let m = ComponentDistribution::bernoulli(p).unwrap().moments().unwrap();
            assert!((m.mean - p).abs() < 1e-15);
            assert!((m.abs3 - p).abs() < 1e-15);
            assert!((m.central_abs3 - p * q * (q * q + p * p)).abs() < 1e-15);
            assert!((m.abs4 - p).abs() < 1e-15);
            assert!((m.central_abs4 - p * q * (q * q * q + p * p * p)).abs() < 1e-15);
        }
    }

    #[test]
    fn rademacher_moments_are_unit() {
        let m = ComponentDistribution::rademacher().moments().unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.variance, 1.0);
        assert_eq!(m.abs3, 1.0);
        assert_eq!(m.central_abs3, 1.0);
        assert_eq!(m.abs4, 1.0);
        assert_eq!(m.central_abs4, 1.0);
        assert_eq!(m.var_square, 0.0);
    }

    #[test]
    fn standardized_two_point_has_zero_mean_unit_variance() {
        for p in [0.2, 0.5, 0.9] {
            let m = ComponentDistribution::standardized_two_point(p)
                .unwrap()
                .moments()
                .unwrap();
            assert!(m.mean.abs() < 1e-15);
            assert!((m.variance - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cap_enforced() {
        let model = ProductModel::rademacher(23);
        assert!(matches!(
            model.assignment_count(EXACT_CAP),
            Err(Error::CapExceeded { .. })
        ));
        let small = ProductModel::rademacher(10);
        assert_eq!(small.assignment_count(EXACT_CAP).unwrap(), 1024);
    }

    #[test]
    fn sampler_blocks_exact_mode() {
        let s = ComponentDistribution::sampler(
            Arc::new(|seed, ctr| crate::rng::draw_uniform(seed, ctr)),
            None,
        );
        let model = ProductModel::new(vec![s]).unwrap();
        assert!(!model.is_exact());
        assert!(matches!(
            model.assignment_count(EXACT_CAP),
            Err(Error::NotExactMode)
        ));
    }
}
