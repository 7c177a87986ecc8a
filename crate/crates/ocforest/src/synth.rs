//! Seeded synthetic data generators used by tests, benchmarks and the demo.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;

/// One standard normal draw via Box-Muller.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// `n` points from an isotropic Gaussian in `d` dimensions.
pub fn gaussian_cloud(n: usize, d: usize, center: f64, sigma: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        rows.push((0..d).map(|_| center + sigma * normal(&mut rng)).collect());
    }
    Dataset::from_rows(&rows, None).expect("generated data is finite")
}

/// `n` points uniform on the box spanned by `lower`/`upper`.
pub fn uniform_box(n: usize, lower: &[f64], upper: &[f64], seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = lower.len();
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        rows.push((0..d).map(|j| rng.gen_range(lower[j]..upper[j])).collect());
    }
    Dataset::from_rows(&rows, None).expect("generated data is finite")
}

/// Labeled 2-D novelty benchmark: standard normal inliers around the origin
/// (label 0) and uniform far outliers on `[-10, 10]^2` kept outside the
/// `[-4, 4]^2` core (label 1).
pub fn novelty_2d(n_inliers: usize, n_outliers: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n_inliers + n_outliers);
    let mut labels = Vec::with_capacity(n_inliers + n_outliers);
    for _ in 0..n_inliers {
        rows.push(vec![normal(&mut rng), normal(&mut rng)]);
        labels.push(0);
    }
    let mut produced = 0;
    while produced < n_outliers {
        let x: f64 = rng.gen_range(-10.0..10.0);
        let y: f64 = rng.gen_range(-10.0..10.0);
        if x.abs() < 4.0 && y.abs() < 4.0 {
            continue;
        }
        rows.push(vec![x, y]);
        labels.push(1);
        produced += 1;
    }
    Dataset::from_rows(&rows, Some(labels)).expect("generated data is finite")
}

/// Unlabeled bimodal 2-D data: two Gaussian clusters of `n/2` points each at
/// `(-2, 0)` and `(2.5, 1.5)` with different spreads.
pub fn two_clusters_2d(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let (cx, cy, s) = if i % 2 == 0 {
            (-2.0, 0.0, 0.6)
        } else {
            (2.5, 1.5, 0.9)
        };
        rows.push(vec![cx + s * normal(&mut rng), cy + s * normal(&mut rng)]);
    }
    Dataset::from_rows(&rows, None).expect("generated data is finite")
}

/// Unlabeled 2-D ring: radius about `r0` with Gaussian thickness.
pub fn ring_2d(n: usize, r0: f64, thickness: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = r0 + thickness * normal(&mut rng);
        rows.push(vec![r * theta.cos(), r * theta.sin()]);
    }
    Dataset::from_rows(&rows, None).expect("generated data is finite")
}
