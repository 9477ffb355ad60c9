//! Wall-clock accounting per protocol phase.

use std::collections::BTreeMap;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TimePhase {
    GradientEncrypt,
    Aggregate,
    Decide,
    Partition,
}

impl TimePhase {
    pub fn name(&self) -> &'static str {
        match self {
            TimePhase::GradientEncrypt => "gradient_encrypt",
            TimePhase::Aggregate => "aggregate",
            TimePhase::Decide => "decide",
            TimePhase::Partition => "partition",
        }
    }

    pub const ALL: [TimePhase; 4] = [
        TimePhase::GradientEncrypt,
        TimePhase::Aggregate,
        TimePhase::Decide,
        TimePhase::Partition,
    ];
}

#[derive(Debug, Default, Clone)]
pub struct PhaseTimer {
    acc: BTreeMap<TimePhase, Duration>,
}

impl PhaseTimer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, phase: TimePhase, d: Duration) {
        *self.acc.entry(phase).or_default() += d;
    }

    pub fn get(&self, phase: TimePhase) -> Duration {
        self.acc.get(&phase).copied().unwrap_or_default()
    }

    pub fn total(&self) -> Duration {
        self.acc.values().sum()
    }
}
