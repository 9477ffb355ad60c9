//! Plaintext oracle strategy: the reference every protocol must match.
//! No messages, no crypto; splits are found by direct enumeration.

use std::time::Instant;

use crate::boosting::split::find_best_split_oracle;
use crate::error::Result;
use crate::federation::topology::{ProtocolKind, Simulation};

use super::timing::{PhaseTimer, TimePhase};
use super::{partition_and_record, LevelNode, RoundCtx, SplitDecision, SplitProtocol};

pub struct PlaintextProtocol;

impl SplitProtocol for PlaintextProtocol {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Plaintext
    }

    fn find_split(
        &mut self,
        sim: &mut Simulation,
        ctx: &RoundCtx<'_>,
        node: &LevelNode,
        timer: &mut PhaseTimer,
    ) -> Result<Option<SplitDecision>> {
        let t0 = Instant::now();
        let best = find_best_split_oracle(
            &sim.dataset,
            &sim.thresholds,
            ctx.grads,
            &node.rows,
            ctx.params.lambda,
        )?;
        timer.add(TimePhase::Decide, t0.elapsed());

        let Some(best) = best else { return Ok(None) };
        let t0 = Instant::now();
        let (record, left_rows) =
            partition_and_record(sim, best.party, best.feature, best.threshold, &node.rows)?;
        timer.add(TimePhase::Partition, t0.elapsed());
        Ok(Some(SplitDecision {
            party: best.party,
            record,
            feature: best.feature,
            threshold_index: best.threshold,
            score: best.score,
            left_rows,
        }))
    }
}
