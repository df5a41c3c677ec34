use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::OptimizerKind;

/// Optimisation settings shared by both classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Probability of keeping an activation under dropout; 1 disables it.
    pub keep_prob: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            keep_prob: 0.3,
            epochs: 10,
            batch_size: 8,
            seed: 42,
            optimizer: OptimizerKind::Sgd,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("keep probability {0} outside (0, 1]")]
    KeepProb(f64),
    #[error("learning rate must be positive, got {0}")]
    LearningRate(f64),
    #[error("batch size must be positive")]
    BatchSize,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.keep_prob > 0.0 && self.keep_prob <= 1.0) {
            return Err(ConfigError::KeepProb(self.keep_prob));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ConfigError::LearningRate(self.learning_rate));
        }
        if self.batch_size == 0 {
            return Err(ConfigError::BatchSize);
        }
        Ok(())
    }
}

/// Per-epoch record of a training run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean loss over the training set after each epoch, dropout off.
    pub epoch_losses: Vec<f64>,
    /// Model-selection metric after each epoch.
    pub epoch_metrics: Vec<f64>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
}

/// Tracks the best epoch: higher metric wins, lower loss breaks ties.
#[derive(Debug)]
pub(crate) struct BestSoFar<T> {
    pub metric: f64,
    pub loss: f64,
    pub epoch: usize,
    pub value: Option<T>,
}

impl<T> BestSoFar<T> {
    pub fn new() -> Self {
        Self {
            metric: f64::NEG_INFINITY,
            loss: f64::INFINITY,
            epoch: 0,
            value: None,
        }
    }

    pub fn offer(&mut self, epoch: usize, metric: f64, loss: f64, value: impl FnOnce() -> T) {
        if metric > self.metric || (metric == self.metric && loss < self.loss) {
            self.metric = metric;
            self.loss = loss;
            self.epoch = epoch;
            self.value = Some(value());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = TrainConfig::default();
        assert_eq!(c.learning_rate, 0.001);
        assert_eq!(c.keep_prob, 0.3);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn validation() {
        let bad = TrainConfig {
            keep_prob: 0.0,
            ..Default::default()
        };
        assert_eq!(bad.validate(), Err(ConfigError::KeepProb(0.0)));
        let bad = TrainConfig {
            learning_rate: -1.0,
            ..Default::default()
        };
        assert_eq!(bad.validate(), Err(ConfigError::LearningRate(-1.0)));
    }

    #[test]
    fn partial_toml_style_config() {
        let c: TrainConfig = serde_json::from_str(r#"{"epochs": 3, "optimizer": "adam"}"#).unwrap();
        assert_eq!(c.epochs, 3);
        assert_eq!(c.optimizer, OptimizerKind::Adam);
        assert_eq!(c.keep_prob, 0.3);
    }

    #[test]
    fn best_so_far_tie_break() {
        let mut b = BestSoFar::new();
        b.offer(1, 0.5, 1.0, || "a");
        b.offer(2, 0.5, 0.8, || "b");
        b.offer(3, 0.5, 0.9, || "c");
        b.offer(4, 0.4, 0.1, || "d");
        assert_eq!((b.epoch, b.value), (2, Some("b")));
    }
}
