//! Adaptive first-order optimizer with bias-corrected moment estimates,
//! plus the learning-rate schedules the trainer exposes.

use serde::{Deserialize, Serialize};

/// Learning-rate schedules. `warmup_linear` ramps linearly over the first
/// 10% of total steps, then decays linearly to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    Constant,
    LinearDecay,
    #[default]
    WarmupLinear,
}

const WARMUP_FRACTION: f64 = 0.1;

impl LrSchedule {
    /// Multiplier applied to the base learning rate at `step` (1-based)
    /// of `total_steps`.
    pub fn factor(&self, step: u64, total_steps: u64) -> f64 {
        let total = total_steps.max(1) as f64;
        let step = step.min(total_steps).max(1) as f64;
        match self {
            LrSchedule::Constant => 1.0,
            LrSchedule::LinearDecay => 1.0 - (step - 1.0) / total,
            LrSchedule::WarmupLinear => {
                let warmup = (total * WARMUP_FRACTION).ceil().max(1.0);
                if step <= warmup {
                    step / warmup
                } else {
                    ((total - step) / (total - warmup).max(1.0)).max(0.0)
                }
            }
        }
    }
}

/// Adam with the standard bias-correction terms.
#[derive(Debug, Clone)]
pub struct Adam {
    base_lr: f64,
    schedule: LrSchedule,
    total_steps: u64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step: u64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
}

impl Adam {
    pub fn new(param_count: usize, base_lr: f64, schedule: LrSchedule, total_steps: u64) -> Self {
        Adam {
            base_lr,
            schedule,
            total_steps,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
        }
    }

    /// Apply one update in place. `gradient` must match the parameter
    /// vector length.
    pub fn apply(&mut self, params: &mut [f64], gradient: &[f64]) {
        debug_assert_eq!(params.len(), gradient.len());
        self.step += 1;
        let lr = self.base_lr * self.schedule.factor(self.step, self.total_steps);
        let bias1 = 1.0 - self.beta1.powi(self.step as i32);
        let bias2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = gradient[i];
            self.first_moment[i] = self.beta1 * self.first_moment[i] + (1.0 - self.beta1) * g;
            self.second_moment[i] = self.beta2 * self.second_moment[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.first_moment[i] / bias1;
            let v_hat = self.second_moment[i] / bias2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}
