//! Gaussian-cluster datasets for desk-scale experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::learner::Example;
use crate::error::{Error, Result};
use crate::feature::FeatureVector;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub dim: usize,
    /// Distance between class centres, in units of the per-coordinate
    /// noise deviation. Exact for every pair when `classes <= dim`, in
    /// expectation otherwise.
    pub separation: f64,
    pub seed: u64,
    /// Optional noise deviation per contiguous block of coordinates. The
    /// number of blocks must divide `dim`. Empty means unit noise
    /// everywhere.
    pub block_noise: Vec<f64>,
}

impl SynthConfig {
    pub fn new(classes: usize, dim: usize, separation: f64, seed: u64) -> Self {
        SynthConfig {
            classes,
            dim,
            separation,
            seed,
            block_noise: Vec::new(),
        }
    }

    pub fn with_block_noise(mut self, block_noise: Vec<f64>) -> Self {
        self.block_noise = block_noise;
        self
    }
}

/// Class centres drawn once from the config seed; samples are drawn from
/// independent streams.
#[derive(Clone, Debug)]
pub struct GaussianClusters {
    config: SynthConfig,
    centers: Vec<Vec<f64>>,
    noise: Vec<f64>,
}

impl GaussianClusters {
    pub fn new(config: SynthConfig) -> Result<Self> {
        if config.classes == 0 || config.dim == 0 {
            return Err(Error::InvalidConfig(
                "classes and dim must be positive".into(),
            ));
        }
        if !(config.separation.is_finite() && config.separation >= 0.0) {
            return Err(Error::InvalidConfig(
                "separation must be finite and >= 0".into(),
            ));
        }
        let noise = if config.block_noise.is_empty() {
            vec![1.0; config.dim]
        } else {
            let b = config.block_noise.len();
            if !config.dim.is_multiple_of(b) {
                return Err(Error::InvalidConfig(format!(
                    "{b} noise blocks do not divide dim {}",
                    config.dim
                )));
            }
            let width = config.dim / b;
            config
                .block_noise
                .iter()
                .flat_map(|&s| std::iter::repeat_n(s, width))
                .collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let centers = if config.classes <= config.dim {
            simplex_centers(config.classes, config.dim, config.separation, &mut rng)
        } else {
            // Per-coordinate spread s gives E|a - b|^2 = 2 d s^2.
            let spread = config.separation / (2.0 * config.dim as f64).sqrt();
            (0..config.classes)
                .map(|_| {
                    gaussian(config.dim, &mut rng)
                        .into_iter()
                        .map(|z| spread * z)
                        .collect()
                })
                .collect()
        };
        Ok(GaussianClusters {
            config,
            centers,
            noise,
        })
    }

    pub fn label(class: usize) -> String {
        format!("c{class}")
    }

    pub fn config(&self) -> &SynthConfig {
        &self.config
    }

    pub fn center(&self, class: usize) -> &[f64] {
        &self.centers[class]
    }

    /// `per_class` points for each class, class-major, from sample stream
    /// `stream`.
    pub fn sample(&self, per_class: usize, stream: u64) -> Vec<Example> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(stream.wrapping_add(1));
        let mut out = Vec::with_capacity(per_class * self.config.classes);
        for (c, center) in self.centers.iter().enumerate() {
            for _ in 0..per_class {
                let x: Vec<f32> = center
                    .iter()
                    .zip(&self.noise)
                    .map(|(&m, &s)| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        (m + s * z) as f32
                    })
                    .collect();
                out.push(Example::plain(FeatureVector::from(x), Self::label(c)));
            }
        }
        out
    }

    /// Disjoint train and test samples.
    pub fn split(
        &self,
        train_per_class: usize,
        test_per_class: usize,
    ) -> (Vec<Example>, Vec<Example>) {
        (
            self.sample(train_per_class, 0),
            self.sample(test_per_class, 1),
        )
    }
}

fn gaussian(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// Orthonormal directions from Gram-Schmidt on Gaussian draws, scaled so
/// that every pair of centres is exactly `separation` apart.
fn simplex_centers(
    classes: usize,
    dim: usize,
    separation: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(classes);
    while basis.len() < classes {
        let mut v = gaussian(dim, rng);
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let scale = separation / std::f64::consts::SQRT_2;
    basis
        .into_iter()
        .map(|b| b.into_iter().map(|x| x * scale).collect())
        .collect()
}
