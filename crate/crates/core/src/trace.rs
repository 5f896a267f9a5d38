//! Per-round audit records emitted by every sampler.

use alloc::vec::Vec;

/// One label request: which round, which stratum (or arm), which pool point,
/// and the revealed label. Synthetic arm environments have no pool, there
/// `point` is the round index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub round: usize,
    pub group: usize,
    pub point: usize,
    pub label: f64,
}

/// Full record of a sampling run. `scores` holds the per-round selection
/// scores (UCB values or posterior draws) for algorithms that compute them;
/// it is empty for score-free samplers and is not part of trace equality.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SamplerTrace {
    pub rows: Vec<TraceRow>,
    pub scores: Vec<Vec<f64>>,
}

impl SamplerTrace {
    pub fn new() -> Self {
        SamplerTrace::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rounds-group-point-label view, the part compared across algorithms.
    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }
}
