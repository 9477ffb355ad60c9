//! Federated inference: tree traversal by direction queries to whichever
//! party owns each split record. The owner answers left/right only; feature
//! and threshold never leave it.

use crate::boosting::dataset::{PartyFeatures, ACTIVE_PARTY};
use crate::boosting::tree::{BoostedModel, RegressionTree, TreeNode};
use crate::error::{Error, Result};
use crate::federation::channel::{Message, MessageKind, Phase};
use crate::federation::topology::Simulation;
use crate::protocols::wire;

/// Direction for one training-set row at the owning party.
fn answer_direction_train(sim: &Simulation, owner: usize, record: u32, row: u32) -> Result<bool> {
    let rec = sim.parties[owner].records.get(record)?;
    let x = sim.dataset.party(owner).columns[rec.feature][row as usize];
    Ok(x <= rec.threshold_value)
}

/// Route a training row to its leaf. Out-of-subsample rows during training
/// take this path; queries go over channels unless `use_messages` is off
/// (the plaintext oracle resolves locally).
pub fn route_to_leaf(
    sim: &mut Simulation,
    tree: &RegressionTree,
    row: u32,
    round: u32,
    use_messages: bool,
) -> Result<f64> {
    let mut at = 0usize;
    loop {
        match tree.nodes[at] {
            TreeNode::Leaf { weight } => return Ok(weight),
            TreeNode::Internal { owner, record, left, right } => {
                let goes_left = if owner == ACTIVE_PARTY || !use_messages {
                    answer_direction_train(sim, owner, record, row)?
                } else {
                    exchange_direction_query(sim, owner, record, row, round, |sim| {
                        answer_direction_train(sim, owner, record, row)
                    })?
                };
                at = if goes_left { left } else { right };
            }
        }
    }
}

/// Predict the logit for a sample whose features are spread across parties:
/// `eval[p]` holds party p's columns for the evaluation set. Bit-identical
/// to the resolved model's local traversal.
pub fn federated_predict(
    sim: &mut Simulation,
    model: &BoostedModel,
    eval: &[PartyFeatures],
    row: u32,
) -> Result<f64> {
    if eval.len() != sim.parties.len() {
        return Err(Error::Config("evaluation columns must cover every party".into()));
    }
    let mut logit = model.base_score;
    for tree in &model.trees {
        let mut at = 0usize;
        loop {
            match tree.nodes[at] {
                TreeNode::Leaf { weight } => {
                    logit += weight;
                    break;
                }
                TreeNode::Internal { owner, record, left, right } => {
                    if owner >= sim.parties.len() {
                        return Err(Error::UnreachableParty(owner));
                    }
                    let goes_left = if owner == ACTIVE_PARTY {
                        answer_direction_eval(sim, owner, record, eval, row)?
                    } else {
                        exchange_direction_query(sim, owner, record, row, u32::MAX, |sim| {
                            answer_direction_eval(sim, owner, record, eval, row)
                        })?
                    };
                    at = if goes_left { left } else { right };
                }
            }
        }
    }
    Ok(logit)
}

fn answer_direction_eval(
    sim: &Simulation,
    owner: usize,
    record: u32,
    eval: &[PartyFeatures],
    row: u32,
) -> Result<bool> {
    let rec = sim.parties[owner].records.get(record)?;
    let column = eval[owner]
        .columns
        .get(rec.feature)
        .ok_or_else(|| Error::Config(format!("evaluation set lacks feature {} of party {owner}", rec.feature)))?;
    let x = *column
        .get(row as usize)
        .ok_or_else(|| Error::Usage(format!("evaluation row {row} out of range")))?;
    Ok(x <= rec.threshold_value)
}

/// One query/answer exchange over the channels; the transcript carries only
/// the record id, row, and direction bit.
fn exchange_direction_query(
    sim: &mut Simulation,
    owner: usize,
    record: u32,
    row: u32,
    round: u32,
    answer: impl FnOnce(&Simulation) -> Result<bool>,
) -> Result<bool> {
    sim.router.send(Message {
        round,
        phase: Phase::Inference,
        kind: MessageKind::RouteQuery,
        sender: ACTIVE_PARTY,
        receiver: owner,
        payload: wire::RouteQuery { record, row }.encode(),
    });
    let msg = sim.router.recv(ACTIVE_PARTY, owner)?;
    let query = wire::RouteQuery::decode(&msg.payload)?;
    debug_assert_eq!(query.record, record);
    let goes_left = answer(sim)?;
    sim.router.send(Message {
        round,
        phase: Phase::Inference,
        kind: MessageKind::RouteAnswer,
        sender: owner,
        receiver: ACTIVE_PARTY,
        payload: wire::encode_route_answer(goes_left),
    });
    let msg = sim.router.recv(owner, ACTIVE_PARTY)?;
    wire::decode_route_answer(&msg.payload)
}
