//! Shipped test corpus: fixed anchor instances plus a deterministic
//! stream of randomized exact-mode instances (small models, at most
//! three atoms per coordinate, multilinear statistics normalized to
//! stay O(1)).

use std::sync::Arc;

use crate::model::{Atom, ComponentDistribution, ProductModel};
use crate::rng::CounterRng;
use crate::statistic::{MultilinearPoly, StatisticVector};

#[derive(Debug, Clone)]
pub struct CorpusInstance {
    pub id: String,
    pub model: Arc<ProductModel>,
    pub stat: StatisticVector,
    /// Statistic is a sum of univariate functions of distinct
    /// coordinates (variance decomposes exactly).
    pub additive: bool,
}

/// A finite distribution with one to `max_atoms` atoms, values in
/// [-1.5, 1.5] separated by at least 0.1, probabilities bounded away
/// from zero.
pub fn random_component(rng: &mut CounterRng, max_atoms: usize) -> ComponentDistribution {
    let count = 1 + (rng.next_uniform() * max_atoms as f64) as usize % max_atoms;
    let mut values: Vec<f64> = Vec::with_capacity(count);
    while values.len() < count {
        let v = 3.0 * rng.next_uniform() - 1.5;
        if values.iter().all(|&u| (u - v).abs() > 0.1) {
            values.push(v);
        }
    }
    let raw: Vec<f64> = (0..count).map(|_| 0.2 + rng.next_uniform()).collect();
    let total: f64 = raw.iter().sum();
    let atoms = values
        .into_iter()
        .zip(raw)
        .map(|(value, w)| Atom {
            value,
            prob: w / total,
        })
        .collect();
    ComponentDistribution::finite(atoms).expect("generated atoms are valid")
}

pub fn random_model(rng: &mut CounterRng, max_n: usize, max_atoms: usize) -> Arc<ProductModel> {
    let n = 1 + (rng.next_uniform() * max_n as f64) as usize % max_n;
    let comps = (0..n).map(|_| random_component(rng, max_atoms)).collect();
    ProductModel::new(comps).expect("generated model is valid")
}

/// Multilinear polynomial with `terms` monomials of degree at most
/// `max_degree`, coefficients scaled by the term count so values stay
/// O(1) on [-1.5, 1.5] coordinates.
pub fn random_multilinear(
    rng: &mut CounterRng,
    n: usize,
    max_degree: usize,
    terms: usize,
) -> MultilinearPoly {
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let degree = 1 + (rng.next_uniform() * max_degree as f64) as usize % max_degree.min(n);
        let mut vars: Vec<usize> = Vec::with_capacity(degree);
        while vars.len() < degree {
            let v = (rng.next_uniform() * n as f64) as usize % n;
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        vars.sort_unstable();
        let coeff = (2.0 * rng.next_uniform() - 1.0) / terms as f64;
        out.push((coeff, vars));
    }
    MultilinearPoly { terms: out }
}

/// One randomized instance: model with at most `max_n` coordinates and
/// `max_atoms` atoms, statistic dimension 1 or 2, optionally centered.
pub fn random_instance(seed: u64, index: u64, centered: bool) -> CorpusInstance {
    let mut rng = CounterRng::new(seed, index);
    let model = random_model(&mut rng, 6, 3);
    let n = model.n();
    let means: Vec<f64> = model
        .components()
        .iter()
        .map(|c| c.moments().unwrap().mean)
        .collect();
    let dim = 1 + (rng.next_uniform() * 2.0) as usize % 2;
    let center = if centered { Some(means.as_slice()) } else { None };
    let parts: Vec<StatisticVector> = (0..dim)
        .map(|_| {
            let terms = 2 + (rng.next_uniform() * 5.0) as usize % 5;
            random_multilinear(&mut rng, n, 3, terms).statistic(center)
        })
        .collect();
    let stat = if dim == 1 {
        parts.into_iter().next().unwrap()
    } else {
        StatisticVector::stack(parts)
    };
    CorpusInstance {
        id: format!("rand-{index}"),
        model,
        stat,
        additive: false,
    }
}

/// `count` randomized instances from one seed.
pub fn randomized_corpus(count: usize, seed: u64, centered: bool) -> Vec<CorpusInstance> {
    (0..count)
        .map(|i| random_instance(seed, i as u64, centered))
        .collect()
}

/// Fixed anchors: monomials, sums, products, an additive instance, a
/// degenerate coordinate, and a mixed-law model.
pub fn default_corpus() -> Vec<CorpusInstance> {
    let mut out = Vec::new();

    out.push(CorpusInstance {
        id: "product-pair".into(),
        model: ProductModel::rademacher(2),
        stat: StatisticVector::monomial(vec![0, 1]),
        additive: false,
    });
    out.push(CorpusInstance {
        id: "scaled-sum-4".into(),
        model: ProductModel::rademacher(4),
        stat: StatisticVector::scaled_sum(4, 2.0),
        additive: true,
    });
    out.push(CorpusInstance {
        id: "weighted-sum".into(),
        model: ProductModel::rademacher(3),
        stat: StatisticVector::weighted_sum(vec![0.5, -0.25, 0.125]),
        additive: true,
    });
    out.push(CorpusInstance {
        id: "pair-vector".into(),
        model: ProductModel::rademacher(3),
        stat: StatisticVector::new(2, |x| {
            vec![x[0] * x[1], (x[1] + x[2]) / 2.0]
        }),
        additive: false,
    });
    out.push(CorpusInstance {
        id: "degenerate-coordinate".into(),
        model: ProductModel::new(vec![
            ComponentDistribution::rademacher(),
            ComponentDistribution::from_pairs(&[(0.75, 1.0)]).unwrap(),
            ComponentDistribution::rademacher(),
        ])
        .unwrap(),
        stat: StatisticVector::scalar(|x| x[0] * x[1] + 0.5 * x[2]),
        additive: false,
    });
    out.push(CorpusInstance {
        id: "mixed-laws".into(),
        model: ProductModel::new(vec![
            ComponentDistribution::bernoulli(0.3).unwrap(),
            ComponentDistribution::from_pairs(&[(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]).unwrap(),
            ComponentDistribution::rademacher(),
        ])
        .unwrap(),
        stat: StatisticVector::scalar(|x| 0.5 * x[0] * x[1] - 0.25 * x[1] * x[2] + 0.125 * x[0]),
        additive: false,
    });
    out.push(CorpusInstance {
        id: "cubic-monomial".into(),
        model: ProductModel::rademacher(4),
        stat: StatisticVector::new(2, |x| {
            vec![x[0] * x[1] * x[2] / 2.0, x[1] * x[3] / 2.0]
        }),
        additive: false,
    });
    out
}

/// Sign-model corpus: monomials, normalized sums, products, and random
/// multilinear polynomials of degree at most three.
pub fn rademacher_corpus(random_count: usize, seed: u64) -> Vec<CorpusInstance> {
    let mut out = vec![
        CorpusInstance {
            id: "sign-single".into(),
            model: ProductModel::rademacher(1),
            stat: StatisticVector::scalar(|x| x[0]),
            additive: true,
        },
        CorpusInstance {
            id: "sign-product".into(),
            model: ProductModel::rademacher(2),
            stat: StatisticVector::monomial(vec![0, 1]),
            additive: false,
        },
        CorpusInstance {
            id: "sign-sum-9".into(),
            model: ProductModel::rademacher(9),
            stat: StatisticVector::scaled_sum(9, 3.0),
            additive: true,
        },
        CorpusInstance {
            id: "sign-pair".into(),
            model: ProductModel::rademacher(4),
            stat: StatisticVector::new(2, |x| {
                vec![x[0] * x[1], x[2] * x[3]]
            }),
            additive: false,
        },
        CorpusInstance {
            id: "sign-triple".into(),
            model: ProductModel::rademacher(3),
            stat: StatisticVector::monomial(vec![0, 1, 2]),
            additive: false,
        },
    ];
    for i in 0..random_count {
        let mut rng = CounterRng::new(seed, 1000 + i as u64);
        let n = 3 + (rng.next_uniform() * 3.0) as usize % 3;
        let model = ProductModel::rademacher(n);
        let terms = 2 + (rng.next_uniform() * 4.0) as usize % 4;
        let poly = random_multilinear(&mut rng, n, 3, terms);
        out.push(CorpusInstance {
            id: format!("sign-rand-{i}"),
            model,
            stat: poly.statistic(None),
            additive: false,
        });
    }
    out
}
