//! Seeded synthetic datasets: concentric circles and a two-Gaussian mixture.
//!
//! All randomness comes from one `ChaCha8Rng` stream seeded with the generator's
//! seed, consumed in a fixed order, so a seed fully determines the dataset.
//! Normal variates use `rand_distr::StandardNormal` on that stream.

use crate::dataset::SemiDataset;
use crate::error::{Error, Result};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Points per circle: `n` split by circumference (largest remainder), then
/// adjusted so every circle can host its round-robin labeled draws.
fn circle_counts(spec: &CirclesSpec) -> Vec<usize> {
    let c = spec.num_circles;
    let total: f64 = (0..c).map(|k| spec.radius(k)).sum();
    let shares: Vec<f64> = (0..c).map(|k| spec.n as f64 * spec.radius(k) / total).collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| (shares[j] - shares[j].floor()).total_cmp(&(shares[i] - shares[i].floor())));
    let given: usize = counts.iter().sum();
    for &k in order.iter().take(spec.n - given) {
        counts[k] += 1;
    }
    // Round-robin labels need ceil/floor(n_ℓ / c) points on each circle;
    // short circles borrow from the one with the most slack.
    let need: Vec<usize> = (0..c).map(|k| (spec.n_labeled + c - 1 - k) / c).collect();
    for k in 0..c {
        while counts[k] < need[k] {
            let donor = (0..c)
                .filter(|&j| counts[j] > need[j])
                .max_by_key(|&j| counts[j] - need[j])
                .expect("n >= n_labeled leaves slack somewhere");
            counts[donor] -= 1;
            counts[k] += 1;
        }
    }
    counts
}

/// Labeled-split resamples before a class-balance failure is reported.
pub const BALANCE_RETRIES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CirclesSpec {
    pub n: usize,
    pub n_labeled: usize,
    pub num_circles: usize,
    pub inner_radius: f64,
    pub radius_step: f64,
    pub seed: u64,
}

impl CirclesSpec {
    /// Four circles of radii `r, 2r, 3r, 4r` with `r = 1`.
    pub fn new(n: usize, n_labeled: usize, seed: u64) -> Self {
        Self {
            n,
            n_labeled,
            num_circles: 4,
            inner_radius: 1.0,
            radius_step: 1.0,
            seed,
        }
    }

    pub fn radius(&self, circle: usize) -> f64 {
        self.inner_radius + circle as f64 * self.radius_step
    }

    /// `+1` on even-indexed circles, `-1` on odd ones.
    pub fn label(circle: usize) -> f64 {
        if circle % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixSpec {
    pub n: usize,
    pub n_labeled: usize,
    pub d: usize,
    pub delta: f64,
    pub seed: u64,
}

impl GaussianMixSpec {
    pub fn new(n: usize, n_labeled: usize, seed: u64) -> Self {
        Self {
            n,
            n_labeled,
            d: 10,
            delta: 3.0,
            seed,
        }
    }
}

/// Points spread uniformly over the union of the circles: each circle gets a
/// share of `n` proportional to its circumference (largest remainder, after
/// reserving the points its labeled draws need) at uniform angles. One
/// labeled point per circle in round-robin order. Ground truth (the circle
/// label) is attached for every row.
pub fn gen_circles(spec: &CirclesSpec) -> Result<SemiDataset> {
    if spec.num_circles == 0 || spec.n == 0 || spec.n_labeled == 0 || spec.n_labeled > spec.n {
        return Err(Error::invalid(format!(
            "need n >= n_labeled >= 1 and at least one circle, got n = {}, n_labeled = {}, circles = {}",
            spec.n, spec.n_labeled, spec.num_circles
        )));
    }
    if !(spec.inner_radius > 0.0 && spec.inner_radius.is_finite())
        || !(spec.radius_step > 0.0 && spec.radius_step.is_finite())
    {
        return Err(Error::invalid("circle radii must be positive and finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let c = spec.num_circles;
    let counts = circle_counts(spec);
    let mut points = Vec::with_capacity(spec.n);
    for (circle, &count) in counts.iter().enumerate() {
        let r = spec.radius(circle);
        for _ in 0..count {
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            points.push(([r * theta.cos(), r * theta.sin()], circle));
        }
    }

    // Round-robin labeled draw: the j-th labeled point comes from circle j mod C.
    let mut by_circle: Vec<Vec<usize>> = vec![Vec::new(); c];
    for (i, (_, circle)) in points.iter().enumerate() {
        by_circle[*circle].push(i);
    }
    for members in &mut by_circle {
        members.shuffle(&mut rng);
    }
    let mut labeled = Vec::with_capacity(spec.n_labeled);
    for j in 0..spec.n_labeled {
        labeled.push(by_circle[j % c][j / c]);
    }
    labeled.shuffle(&mut rng);
    let mut is_labeled = vec![false; spec.n];
    for &i in &labeled {
        is_labeled[i] = true;
    }
    let mut unlabeled: Vec<usize> = (0..spec.n).filter(|&i| !is_labeled[i]).collect();
    unlabeled.shuffle(&mut rng);

    let order: Vec<usize> = labeled.iter().chain(&unlabeled).copied().collect();
    let inputs = order.iter().flat_map(|&i| points[i].0).collect();
    let truth: Vec<f64> = order.iter().map(|&i| CirclesSpec::label(points[i].1)).collect();
    let labels = truth[..spec.n_labeled].to_vec();
    SemiDataset::new(inputs, 2, labels)?.with_truth(truth)
}

/// Class `-1` centered at the origin and class `+1` at `(δ, 0, …, 0)`, each
/// drawn with probability 1/2, unit covariance. The labeled rows are a
/// uniform random subset containing both classes whenever `n_labeled >= 2`.
pub fn gen_gaussian_mix(spec: &GaussianMixSpec) -> Result<SemiDataset> {
    if spec.d == 0 || spec.n == 0 || spec.n_labeled == 0 || spec.n_labeled > spec.n {
        return Err(Error::invalid(format!(
            "need n >= n_labeled >= 1 and d >= 1, got n = {}, n_labeled = {}, d = {}",
            spec.n, spec.n_labeled, spec.d
        )));
    }
    if !(spec.delta >= 0.0 && spec.delta.is_finite()) {
        return Err(Error::invalid(format!("separation must be non-negative, got {}", spec.delta)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.d;
    let mut x = vec![0.0; spec.n * d];
    let mut y = vec![0.0; spec.n];
    for i in 0..spec.n {
        let positive = rng.random::<bool>();
        y[i] = if positive { 1.0 } else { -1.0 };
        for j in 0..d {
            x[i * d + j] = rng.sample::<f64, _>(StandardNormal);
        }
        if positive {
            x[i * d] += spec.delta;
        }
    }

    let mut labeled = None;
    for _ in 0..BALANCE_RETRIES {
        let pick = index::sample(&mut rng, spec.n, spec.n_labeled).into_vec();
        let balanced = spec.n_labeled < 2 || {
            let pos = pick.iter().filter(|&&i| y[i] > 0.0).count();
            pos > 0 && pos < pick.len()
        };
        if balanced {
            labeled = Some(pick);
            break;
        }
    }
    let labeled = labeled.ok_or_else(|| {
        Error::invalid(format!(
            "no class-balanced labeled split found in {BALANCE_RETRIES} draws"
        ))
    })?;
    let mut is_labeled = vec![false; spec.n];
    for &i in &labeled {
        is_labeled[i] = true;
    }
    let order: Vec<usize> = labeled
        .iter()
        .copied()
        .chain((0..spec.n).filter(|&i| !is_labeled[i]))
        .collect();
    let inputs = order.iter().flat_map(|&i| x[i * d..(i + 1) * d].to_vec()).collect();
    let truth: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let labels = truth[..spec.n_labeled].to_vec();
    SemiDataset::new(inputs, d, labels)?.with_truth(truth)
}

/// Bayes error of the two-Gaussian mixture: `Φ(-δ/2)`.
pub fn gaussian_mix_bayes_error(delta: f64) -> f64 {
    0.5 * libm::erfc(delta / 2.0 / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_points_lie_on_their_circles() {
        let spec = CirclesSpec::new(400, 4, 9);
        let ds = gen_circles(&spec).unwrap();
        let truth = ds.truth().unwrap();
        for i in 0..ds.n() {
            let r = ds.row(i)[0].hypot(ds.row(i)[1]);
            let circle = (0..4).find(|&c| (spec.radius(c) - r).abs() < 1e-12).expect("on a circle");
            assert_eq!(truth[i], CirclesSpec::label(circle));
        }
    }

    #[test]
    fn one_label_per_circle() {
        let spec = CirclesSpec::new(2000, 4, 3);
        let ds = gen_circles(&spec).unwrap();
        let mut radii: Vec<i64> = (0..4)
            .map(|i| ds.row(i)[0].hypot(ds.row(i)[1]).round() as i64)
            .collect();
        radii.sort();
        assert_eq!(radii, vec![1, 2, 3, 4]);
    }

    #[test]
    fn points_are_split_by_circumference() {
        let spec = CirclesSpec::new(2000, 4, 3);
        assert_eq!(circle_counts(&spec), vec![200, 400, 600, 800]);
        // Labeled draws are reserved first, so tiny n still covers every circle.
        assert_eq!(circle_counts(&CirclesSpec::new(4, 4, 0)), vec![1, 1, 1, 1]);
        let counts = circle_counts(&CirclesSpec::new(7, 5, 0));
        assert_eq!(counts.iter().sum::<usize>(), 7);
        assert!(counts[0] >= 2);
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_circles(&CirclesSpec::new(50, 4, 11)).unwrap();
        assert_eq!(a, gen_circles(&CirclesSpec::new(50, 4, 11)).unwrap());
        assert_ne!(a, gen_circles(&CirclesSpec::new(50, 4, 12)).unwrap());
        let b = gen_gaussian_mix(&GaussianMixSpec::new(60, 6, 5)).unwrap();
        assert_eq!(b, gen_gaussian_mix(&GaussianMixSpec::new(60, 6, 5)).unwrap());
    }

    #[test]
    fn labeled_split_is_balanced() {
        for seed in 0..50 {
            let ds = gen_gaussian_mix(&GaussianMixSpec::new(40, 2, seed)).unwrap();
            assert_ne!(ds.labels()[0], ds.labels()[1]);
        }
    }

    #[test]
    fn impossible_balance_errors() {
        // One point cannot carry both classes.
        let spec = GaussianMixSpec { n: 2, n_labeled: 2, d: 1, delta: 1.0, seed: 0 };
        let outcomes: Vec<bool> = (0..20)
            .map(|seed| gen_gaussian_mix(&GaussianMixSpec { seed, ..spec.clone() }).is_ok())
            .collect();
        assert!(outcomes.contains(&false) && outcomes.contains(&true));
    }

    #[test]
    fn class_means_match_centers() {
        let ds = gen_gaussian_mix(&GaussianMixSpec { n: 100_000, n_labeled: 10, d: 3, delta: 3.0, seed: 1 }).unwrap();
        let truth = ds.truth().unwrap();
        for (class, center) in [(-1.0, [0.0, 0.0, 0.0]), (1.0, [3.0, 0.0, 0.0])] {
            let rows: Vec<usize> = (0..ds.n()).filter(|&i| truth[i] == class).collect();
            for j in 0..3 {
                let mean = rows.iter().map(|&i| ds.row(i)[j]).sum::<f64>() / rows.len() as f64;
                assert!((mean - center[j]).abs() < 0.05, "class {class} coord {j}: {mean}");
            }
        }
    }

    #[test]
    fn bayes_error_value() {
        assert!((gaussian_mix_bayes_error(3.0) - 0.066_807_201_268_858_1).abs() < 1e-12);
        assert!((gaussian_mix_bayes_error(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs() {
        assert!(gen_circles(&CirclesSpec::new(3, 4, 0)).is_err());
        assert!(gen_gaussian_mix(&GaussianMixSpec::new(10, 0, 0)).is_err());
        let mut s = CirclesSpec::new(10, 2, 0);
        s.inner_radius = -1.0;
        assert!(gen_circles(&s).is_err());
    }
}
