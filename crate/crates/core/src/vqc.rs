//! Training of the 4-qubit variational circuit against f(x) = x², with a
//! quadratic loss, parameter-shift gradients, and plain gradient descent.
//!
//! One training iteration consumes one sample from the permuted dataset and
//! costs 25 circuit evaluations: the base expectation plus two π/2-shifted
//! evaluations per parameter. Noise, when configured, applies during both
//! training and inference.

use crate::circuit::build_vqc;
pub use crate::circuit::VqcParameters;
use crate::engine;
use crate::hardware::BackendSpec;
use crate::noise::{NoiseModel, NoiseSpec};
use crate::{Error, Result};

/// The observable is Z on this qubit.
pub const MEASURED_QUBIT: usize = 1;

#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub noise: NoiseSpec,
    pub backend: Option<BackendSpec>,
    pub sample_count: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            learning_rate: 0.5,
            seed: 0,
            noise: NoiseSpec::none(),
            backend: None,
            sample_count: 20,
        }
    }
}

impl TrainingConfig {
    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be at least 1"));
        }
        if self.learning_rate.is_nan() || self.learning_rate < 0.0 {
            return Err(Error::invalid("learning rate must be non-negative"));
        }
        Ok(())
    }
}

/// State of one training iteration, captured before the update.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRecord {
    pub iteration: usize,
    pub x: f64,
    pub loss: f64,
    pub theta: [f64; 12],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    pub records: Vec<TrainingRecord>,
    pub final_parameters: VqcParameters,
    pub learning_rate: f64,
    pub seed: u64,
}

impl TrainingTrace {
    /// Mean loss over the last `count` iterations.
    pub fn final_mean_loss(&self, count: usize) -> f64 {
        let tail = &self.records[self.records.len().saturating_sub(count)..];
        tail.iter().map(|r| r.loss).sum::<f64>() / tail.len() as f64
    }

    /// CSV export: `iteration,x,loss,theta_0..theta_11`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,x,loss");
        for i in 0..12 {
            out.push_str(&format!(",theta_{i}"));
        }
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!("{},{},{}", r.iteration, r.x, r.loss));
            for t in r.theta {
                out.push_str(&format!(",{t}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Uniformly spaced samples on [−1, 1] inclusive, permuted by the seed.
pub fn make_dataset(count: usize, seed: u64) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::invalid("dataset needs at least 2 samples"));
    }
    let mut xs: Vec<f64> = (0..count)
        .map(|i| -1.0 + 2.0 * i as f64 / (count - 1) as f64)
        .collect();
    // Fisher-Yates with a seeded generator
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for i in (1..xs.len()).rev() {
        let j = rng.gen_range(0..=i);
        xs.swap(i, j);
    }
    Ok(xs)
}

/// ⟨M⟩_θ for input x: the Z expectation on the measured qubit of the noisy
/// circuit.
pub fn predict(x: f64, theta: &VqcParameters, noise: Option<&NoiseModel>) -> Result<f64> {
    let c = build_vqc(x, theta)?;
    let r = engine::simulate(&c, noise)?;
    engine::expectation_z(&r, MEASURED_QUBIT)
}

/// Quadratic loss (1/2)·(⟨M⟩_θ − x²)².
pub fn loss(x: f64, theta: &VqcParameters, noise: Option<&NoiseModel>) -> Result<f64> {
    let m = predict(x, theta, noise)?;
    Ok(0.5 * (m - x * x).powi(2))
}

/// Parameter-shift gradient: component i is
/// (1/2)·(⟨M⟩_θ − x²)·(⟨M⟩_{θ+e_i·π/2} − ⟨M⟩_{θ−e_i·π/2}).
pub fn gradient(x: f64, theta: &VqcParameters, noise: Option<&NoiseModel>) -> Result<[f64; 12]> {
    let base = predict(x, theta, noise)?;
    gradient_with_base(x, theta, noise, base)
}

fn gradient_with_base(
    x: f64,
    theta: &VqcParameters,
    noise: Option<&NoiseModel>,
    base: f64,
) -> Result<[f64; 12]> {
    let residual = base - x * x;
    let shift = std::f64::consts::FRAC_PI_2;
    let mut grad = [0.0; 12];
    for (i, g) in grad.iter_mut().enumerate() {
        let plus = predict(x, &theta.shifted(i, shift), noise)?;
        let minus = predict(x, &theta.shifted(i, -shift), noise)?;
        *g = 0.5 * residual * (plus - minus);
    }
    Ok(grad)
}

/// Gradient-descent training from θ = 0, cycling through the permuted
/// dataset one sample per iteration. Deterministic for a fixed config.
pub fn train(config: &TrainingConfig) -> Result<TrainingTrace> {
    config.validate()?;
    let model = config.noise.build_model(config.backend.as_ref())?;
    let noise = model.as_ref();
    let data = make_dataset(config.sample_count, config.seed)?;
    let mut theta = VqcParameters::zeros();
    let mut records = Vec::with_capacity(config.iterations);
    for k in 0..config.iterations {
        let x = data[k % data.len()];
        let base = predict(x, &theta, noise)?;
        let loss = 0.5 * (base - x * x).powi(2);
        let grad = gradient_with_base(x, &theta, noise, base)?;
        records.push(TrainingRecord {
            iteration: k,
            x,
            loss,
            theta: theta.theta,
        });
        for (t, g) in theta.theta.iter_mut().zip(grad.iter()) {
            *t -= config.learning_rate * g;
        }
    }
    Ok(TrainingTrace {
        records,
        final_parameters: theta,
        learning_rate: config.learning_rate,
        seed: config.seed,
    })
}
