use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::PartyId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    LocalGate,
    LocalMeasure,
    Send,
    Receive,
    ResourceClaim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Gate {
        gate: String,
        wires: Vec<String>,
    },
    Measure {
        wire: String,
        outcome: u8,
        probability: f64,
        forced: bool,
    },
    Send {
        msg_id: u64,
        tag: String,
        bit: u8,
        recipients: Vec<PartyId>,
    },
    Receive {
        msg_id: u64,
        tag: String,
        bit: u8,
        from: PartyId,
    },
    ResourceClaim {
        resource: String,
        wire: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEvent {
    pub actor: PartyId,
    pub kind: EventKind,
    pub step_label: String,
    pub payload: Payload,
}

/// One JSON object per line: `actor`, `kind`, `step_label`, `payload`.
pub fn to_lines(events: &[TranscriptEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("transcript events serialize"));
        out.push('\n');
    }
    out
}

pub fn from_lines(text: &str) -> std::result::Result<Vec<TranscriptEvent>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Replays a transcript and checks the LOCC rules independently of the world
/// that produced it: local events touch only wires the actor owns at that
/// moment, measured wires are retired, and every receive follows a matching
/// send addressed to the receiver.
pub fn audit(events: &[TranscriptEvent]) -> Result<()> {
    let mut owner: BTreeMap<&str, PartyId> = BTreeMap::new();
    let mut sent: BTreeMap<u64, (PartyId, BTreeSet<PartyId>, &str, u8)> = BTreeMap::new();
    let mut received: BTreeSet<(u64, PartyId)> = BTreeSet::new();

    let fail = |index: usize, reason: String| Error::AuditFailure { index, reason };

    for (i, e) in events.iter().enumerate() {
        let expected_kind = match &e.payload {
            Payload::Gate { .. } => EventKind::LocalGate,
            Payload::Measure { .. } => EventKind::LocalMeasure,
            Payload::Send { .. } => EventKind::Send,
            Payload::Receive { .. } => EventKind::Receive,
            Payload::ResourceClaim { .. } => EventKind::ResourceClaim,
        };
        if e.kind != expected_kind {
            return Err(fail(
                i,
                format!("kind {:?} with mismatched payload", e.kind),
            ));
        }
        match &e.payload {
            Payload::ResourceClaim { wire, .. } => {
                if let Some(prev) = owner.insert(wire, e.actor) {
                    return Err(fail(i, format!("wire {wire} already owned by {prev}")));
                }
            }
            Payload::Gate { wires, .. } => {
                for w in wires {
                    if owner.get(w.as_str()) != Some(&e.actor) {
                        return Err(fail(i, format!("{} touched unowned wire {w}", e.actor)));
                    }
                }
            }
            Payload::Measure { wire, .. } => {
                if owner.get(wire.as_str()) != Some(&e.actor) {
                    return Err(fail(i, format!("{} measured unowned wire {wire}", e.actor)));
                }
                owner.remove(wire.as_str());
            }
            Payload::Send {
                msg_id,
                recipients,
                tag,
                bit,
            } => {
                let rs: BTreeSet<PartyId> = recipients.iter().copied().collect();
                if rs.is_empty() || rs.contains(&e.actor) {
                    return Err(fail(i, format!("bad recipient set for message {msg_id}")));
                }
                if sent.insert(*msg_id, (e.actor, rs, tag, *bit)).is_some() {
                    return Err(fail(i, format!("message id {msg_id} reused")));
                }
            }
            Payload::Receive {
                msg_id,
                tag,
                bit,
                from,
            } => {
                let Some((sender, rs, sent_tag, sent_bit)) = sent.get(msg_id) else {
                    return Err(fail(
                        i,
                        format!("receive of message {msg_id} before its send"),
                    ));
                };
                if sender != from || !rs.contains(&e.actor) || sent_tag != tag || sent_bit != bit {
                    return Err(fail(i, format!("receive does not match message {msg_id}")));
                }
                if !received.insert((*msg_id, e.actor)) {
                    return Err(fail(i, format!("message {msg_id} received twice")));
                }
            }
        }
    }
    Ok(())
}
