//! Diminishing-adaptation bookkeeping for random-walk proposal scales.

/// Per-block adaptation record: a log proposal scale, acceptance counters
/// for the current epoch, and the epoch index driving the gain schedule.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BlockAdapt {
    pub log_scale: f64,
    pub dim: usize,
    pub target: f64,
    pub proposals: u64,
    pub accepts: u64,
    pub epoch_proposals: u64,
    pub epoch_accepts: u64,
    pub epoch_index: u64,
    pub frozen: bool,
}

impl BlockAdapt {
    pub fn new(initial_scale: f64, dim: usize, target: f64) -> Self {
        BlockAdapt {
            log_scale: initial_scale.ln(),
            dim,
            target,
            proposals: 0,
            accepts: 0,
            epoch_proposals: 0,
            epoch_accepts: 0,
            epoch_index: 0,
            frozen: false,
        }
    }

    #[inline]
    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    pub fn record(&mut self, accepted: bool) {
        self.proposals += 1;
        self.epoch_proposals += 1;
        if accepted {
            self.accepts += 1;
            self.epoch_accepts += 1;
        }
    }

    /// Robbins–Monro step at the end of an epoch:
    /// log-scale += g (ρ̂ − target), g = min(1, dim·i^{−1/2}).
    pub fn end_epoch(&mut self) {
        if self.epoch_proposals == 0 {
            return;
        }
        self.epoch_index += 1;
        if !self.frozen {
            let rate = self.epoch_accepts as f64 / self.epoch_proposals as f64;
            let gain = (self.dim as f64 * (self.epoch_index as f64).powf(-0.5)).min(1.0);
            self.log_scale += gain * (rate - self.target);
        }
        self.epoch_proposals = 0;
        self.epoch_accepts = 0;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepts as f64 / self.proposals as f64
        }
    }
}
