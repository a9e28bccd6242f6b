use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::Dataset;
use crate::error::{Error, Result};

/// Fixed shape constants of the synthetic benchmark problems.
pub mod constants {
    /// Arc radius of both banana crescents.
    pub const BANANA_RADIUS: f64 = 5.0;
    /// Default isotropic noise std of the banana problem.
    pub const BANANA_NOISE: f64 = 1.0;
    /// Offset applied to the rotated (class 1) crescent so the two interleave.
    pub const BANANA_SHIFT: [f64; 2] = [BANANA_RADIUS / 2.0, BANANA_RADIUS];

    /// Curvature of the Lithuanian ridges `y = a * x^2 + b_c`.
    pub const LITHUANIAN_CURVATURE: f64 = 0.2;
    /// Abscissa range the ridges are sampled over.
    pub const LITHUANIAN_X_RANGE: (f64, f64) = (-5.0, 5.0);
    /// Vertical offsets of the class 0 and class 1 ridges.
    pub const LITHUANIAN_OFFSETS: [f64; 2] = [0.0, 2.0];
    /// Isotropic noise std around each ridge.
    pub const LITHUANIAN_NOISE: f64 = 0.7;

    /// Class means of the two-Gaussian ENN demonstration.
    pub const GAUSSIAN_MU1: [f64; 2] = [0.0, 0.0];
    pub const GAUSSIAN_MU2: [f64; 2] = [3.5, 0.0];
    pub const GAUSSIAN_VARIANCE: f64 = 1.0;
}

fn two_class_names() -> Vec<String> {
    vec!["0".to_string(), "1".to_string()]
}

fn normal(std: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, std).map_err(|e| Error::validation(format!("bad noise std {std}: {e}")))
}

/// Two isotropic Gaussian classes `N(mu_c, variance * I)`, class 0 first.
pub fn generate_two_gaussians(
    n_per_class: usize,
    mu1: [f64; 2],
    mu2: [f64; 2],
    variance: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(Error::validation("n_per_class must be at least 1"));
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::validation(format!(
            "variance must be positive, got {variance}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = normal(variance.sqrt())?;
    let mut features = Vec::with_capacity(4 * n_per_class);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for (class, mu) in [mu1, mu2].into_iter().enumerate() {
        for _ in 0..n_per_class {
            features.push(mu[0] + noise.sample(&mut rng));
            features.push(mu[1] + noise.sample(&mut rng));
            labels.push(class);
        }
    }
    Dataset::new("gaussians", features, 2, labels, two_class_names())
}

fn check_two_class_size(n_total: usize) -> Result<(usize, usize)> {
    if n_total < 2 {
        return Err(Error::validation(format!(
            "need at least 2 samples, got {n_total}"
        )));
    }
    Ok((n_total.div_ceil(2), n_total / 2))
}

/// Two interleaved crescents. Class 0 lies on the right half of a circle of
/// radius [`constants::BANANA_RADIUS`]; class 1 is that arc rotated by pi and
/// shifted by [`constants::BANANA_SHIFT`].
pub fn generate_banana(n_total: usize, noise: f64, seed: u64) -> Result<Dataset> {
    use constants::{BANANA_RADIUS, BANANA_SHIFT};
    let (n0, n1) = check_two_class_size(n_total)?;
    if !(noise > 0.0 && noise.is_finite()) {
        return Err(Error::validation(format!(
            "noise must be positive, got {noise}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = normal(noise)?;
    let mut features = Vec::with_capacity(2 * n_total);
    let mut labels = Vec::with_capacity(n_total);
    for (class, count) in [(0usize, n0), (1, n1)] {
        for _ in 0..count {
            let theta = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
            let (mut x, mut y) = (BANANA_RADIUS * theta.cos(), BANANA_RADIUS * theta.sin());
            if class == 1 {
                x = -x + BANANA_SHIFT[0];
                y = -y + BANANA_SHIFT[1];
            }
            features.push(x + jitter.sample(&mut rng));
            features.push(y + jitter.sample(&mut rng));
            labels.push(class);
        }
    }
    Dataset::new("banana", features, 2, labels, two_class_names())
}

/// Two parallel parabolic ridges `y = a x^2 + b_c` with Gaussian noise; the
/// ridges are close enough that the classes overlap along the boundary.
pub fn generate_lithuanian(n_total: usize, seed: u64) -> Result<Dataset> {
    use constants::{
        LITHUANIAN_CURVATURE, LITHUANIAN_NOISE, LITHUANIAN_OFFSETS, LITHUANIAN_X_RANGE,
    };
    let (n0, n1) = check_two_class_size(n_total)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = normal(LITHUANIAN_NOISE)?;
    let (lo, hi) = LITHUANIAN_X_RANGE;
    let mut features = Vec::with_capacity(2 * n_total);
    let mut labels = Vec::with_capacity(n_total);
    for (class, count) in [(0usize, n0), (1, n1)] {
        for _ in 0..count {
            let t = rng.random_range(lo..=hi);
            let y = LITHUANIAN_CURVATURE * t * t + LITHUANIAN_OFFSETS[class];
            features.push(t + jitter.sample(&mut rng));
            features.push(y + jitter.sample(&mut rng));
            labels.push(class);
        }
    }
    Dataset::new("lithuanian", features, 2, labels, two_class_names())
}
