use std::time::Duration;

use crate::error::{Error, Result};

/// When to stop a run. At least one criterion must be set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StoppingPolicy {
    /// No iteration starts if it would push the SFO count past this.
    pub max_sfo: Option<u64>,
    /// Thread CPU time budget, checked between iterations.
    pub max_time: Option<Duration>,
    pub max_iters: Option<u64>,
    /// Stop once a logged gap `objective - reference` is at most this.
    pub epsilon_gap: Option<f64>,
    /// Reference objective value used for gaps.
    pub reference: Option<f64>,
}

impl StoppingPolicy {
    pub fn iterations(n: u64) -> Self {
        StoppingPolicy { max_iters: Some(n), ..Default::default() }
    }

    pub fn with_reference(mut self, reference: f64) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_sfo.is_none() && self.max_time.is_none() && self.max_iters.is_none() && self.epsilon_gap.is_none() {
            return Err(Error::invalid("stopping policy has no criterion"));
        }
        if self.epsilon_gap.is_some() && self.reference.is_none() {
            return Err(Error::invalid("gap stopping needs a reference value"));
        }
        if let Some(e) = self.epsilon_gap {
            if !(e > 0.0) {
                return Err(Error::invalid(format!("gap tolerance must be positive, got {e}")));
            }
        }
        Ok(())
    }

    /// Rough iteration horizon for choosing a logging cadence.
    pub(crate) fn horizon(&self, m: usize) -> u64 {
        self.max_iters
            .or(self.max_sfo.map(|s| s / m.max(1) as u64))
            .unwrap_or(20_000)
    }

    pub(crate) fn before_iteration(&self, next_k: u64, sfo: u64, cost: u64, elapsed: Duration) -> Option<StopReason> {
        if self.max_iters.is_some_and(|n| next_k > n) {
            return Some(StopReason::MaxIters);
        }
        if self.max_sfo.is_some_and(|b| sfo + cost > b) {
            return Some(StopReason::MaxSfo);
        }
        if self.max_time.is_some_and(|t| elapsed >= t) {
            return Some(StopReason::MaxTime);
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    MaxSfo,
    MaxTime,
    GapReached,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn needs_a_criterion() {
        assert!(StoppingPolicy::default().validate().is_err());
        assert!(StoppingPolicy { epsilon_gap: Some(0.1), ..Default::default() }.validate().is_err());
        StoppingPolicy::iterations(3).validate().unwrap();
    }

    #[test]
    fn budget_checks() {
        let p = StoppingPolicy { max_sfo: Some(10), max_iters: Some(5), ..Default::default() };
        assert_eq!(p.before_iteration(3, 8, 2, Duration::ZERO), None);
        assert_eq!(p.before_iteration(3, 9, 2, Duration::ZERO), Some(StopReason::MaxSfo));
        assert_eq!(p.before_iteration(6, 0, 2, Duration::ZERO), Some(StopReason::MaxIters));
    }
}
