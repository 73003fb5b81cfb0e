//! Retry, rate-limit and concurrency policy for provider calls.

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

/// Retry and pacing settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: usize,
    /// Base delay for exponential backoff (doubles per retry).
    pub base_delay_ms: u64,
    /// Maximum in-flight requests.
    pub max_concurrent: usize,
    /// Minimum spacing between request starts.
    pub min_interval_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_delay_ms: 200,
            max_concurrent: 2,
            min_interval_ms: 0,
        }
    }
}

impl RetryPolicy {
    pub fn backoff_delay(&self, retry_index: usize) -> Duration {
        let factor = 1u64 << retry_index.min(16);
        Duration::from_millis(self.base_delay_ms.saturating_mul(factor))
    }
}

struct GateState {
    in_flight: usize,
    next_allowed: Instant,
}

/// Shared admission gate: bounds in-flight requests and enforces the
/// minimum start interval.
pub struct RequestGate {
    max_concurrent: usize,
    min_interval: Duration,
    state: Mutex<GateState>,
    freed: Condvar,
}

impl RequestGate {
    pub fn new(policy: &RetryPolicy) -> Self {
        RequestGate {
            max_concurrent: policy.max_concurrent.max(1),
            min_interval: Duration::from_millis(policy.min_interval_ms),
            state: Mutex::new(GateState {
                in_flight: 0,
                next_allowed: Instant::now(),
            }),
            freed: Condvar::new(),
        }
    }

    /// Block until a slot and the rate window are available.
    pub fn acquire(&self) -> GateGuard<'_> {
        let wait_until;
        {
            let mut state = self.state.lock().expect("gate poisoned");
            while state.in_flight >= self.max_concurrent {
                state = self.freed.wait(state).expect("gate poisoned");
            }
            state.in_flight += 1;
            let now = Instant::now();
            wait_until = state.next_allowed.max(now);
            state.next_allowed = wait_until + self.min_interval;
        }
        let now = Instant::now();
        if wait_until > now {
            std::thread::sleep(wait_until - now);
        }
        GateGuard { gate: self }
    }

    fn release(&self) {
        let mut state = self.state.lock().expect("gate poisoned");
        state.in_flight -= 1;
        drop(state);
        self.freed.notify_one();
    }
}

/// RAII slot in the gate.
pub struct GateGuard<'a> {
    gate: &'a RequestGate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        self.gate.release();
    }
}
