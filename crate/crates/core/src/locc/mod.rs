//! Local operations and classical communication among three parties.
//!
//! A [`LoccWorld`] holds the global physical state together with the rules
//! that keep access to it local: every live wire has exactly one owner, a
//! party may only gate or measure its own wires, and information moves
//! between parties only through [`ClassicalMessage`]s. Wires are named by
//! stable [`WireId`]s; measuring a wire removes it from the register and from
//! the ownership map.

mod scheduler;
pub mod transcript;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{StateVector, Unitary};

pub use scheduler::{
    all_interleavings, random_interleaving, run_interleaved, ExecMode, Programs, RunOutcome,
    Schedule, Step,
};
pub use transcript::{audit, EventKind, Payload, TranscriptEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PartyId {
    Alice,
    Bob,
    Charlie,
}

impl PartyId {
    pub const ALL: [PartyId; 3] = [PartyId::Alice, PartyId::Bob, PartyId::Charlie];

    pub fn initial(self) -> char {
        match self {
            PartyId::Alice => 'A',
            PartyId::Bob => 'B',
            PartyId::Charlie => 'C',
        }
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WireId(u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceKind {
    Ghz,
    Bell,
}

impl ResourceKind {
    fn parties(self) -> usize {
        match self {
            ResourceKind::Ghz => 3,
            ResourceKind::Bell => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ResourceKind::Ghz => "ghz",
            ResourceKind::Bell => "bell",
        }
    }
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits; `n = 2` is the Bell pair, `n = 3` the
/// GHZ state.
pub fn cat_state(n: usize) -> StateVector {
    assert!(n >= 2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![0.0; 1 << n];
    amps[0] = s;
    amps[(1 << n) - 1] = s;
    StateVector::from_real(&amps).unwrap()
}

pub fn ghz_state() -> StateVector {
    cat_state(3)
}

pub fn bell_state() -> StateVector {
    cat_state(2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalMessage {
    sender: PartyId,
    recipients: BTreeSet<PartyId>,
    bit: u8,
    tag: String,
}

impl ClassicalMessage {
    pub fn new(
        sender: PartyId,
        recipients: impl IntoIterator<Item = PartyId>,
        bit: u8,
        tag: impl Into<String>,
    ) -> Result<Self> {
        let recipients: BTreeSet<PartyId> = recipients.into_iter().collect();
        if recipients.is_empty() {
            return Err(Error::InvalidMessage("empty recipient set".into()));
        }
        if recipients.contains(&sender) {
            return Err(Error::InvalidMessage(format!(
                "{sender} cannot message itself"
            )));
        }
        if bit > 1 {
            return Err(Error::InvalidMessage(format!("payload {bit} is not a bit")));
        }
        Ok(Self {
            sender,
            recipients,
            bit,
            tag: tag.into(),
        })
    }

    pub fn sender(&self) -> PartyId {
        self.sender
    }

    pub fn recipients(&self) -> &BTreeSet<PartyId> {
        &self.recipients
    }

    pub fn bit(&self) -> u8 {
        self.bit
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }
}

/// Resources consumed by a run. `cbits` counts one per message, broadcast
/// included; `raw_directed_messages` counts one per (sender, recipient) pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceTally {
    pub ghz_consumed: u32,
    pub bell_consumed: u32,
    pub cbits: u32,
    pub raw_directed_messages: u32,
}

#[derive(Debug, Clone)]
struct Delivery {
    msg_id: u64,
    msg: ClassicalMessage,
}

/// Outcome of [`LoccWorld::local_measure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureRecord {
    pub outcome: u8,
    pub probability: f64,
}

#[derive(Debug, Clone)]
pub struct LoccWorld {
    state: Option<StateVector>,
    /// Register position -> wire.
    register: Vec<WireId>,
    ownership: BTreeMap<WireId, PartyId>,
    labels: BTreeMap<WireId, String>,
    next_wire: u32,
    ancillas: BTreeMap<PartyId, u32>,
    mailbox: BTreeMap<PartyId, VecDeque<Delivery>>,
    next_msg: u64,
    transcript: Vec<TranscriptEvent>,
    tally: ResourceTally,
    rng_seed: u64,
    rngs: BTreeMap<PartyId, ChaCha8Rng>,
}

impl LoccWorld {
    /// Empty world. Each party draws sampled measurement outcomes from its own
    /// stream derived from `rng_seed`, so outcomes do not depend on how the
    /// parties' steps are interleaved.
    pub fn new(rng_seed: u64) -> Self {
        let rngs = PartyId::ALL
            .iter()
            .map(|&p| {
                let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
                rng.set_stream(p as u64 + 1);
                (p, rng)
            })
            .collect();
        Self {
            state: None,
            register: Vec::new(),
            ownership: BTreeMap::new(),
            labels: BTreeMap::new(),
            next_wire: 0,
            ancillas: BTreeMap::new(),
            mailbox: BTreeMap::new(),
            next_msg: 0,
            transcript: Vec::new(),
            tally: ResourceTally::default(),
            rng_seed,
            rngs,
        }
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// Appends `state` to the register, handing wire `k` to `assignment[k]`.
    pub fn load_input(
        &mut self,
        state: &StateVector,
        assignment: &[(PartyId, &str)],
    ) -> Result<Vec<WireId>> {
        if assignment.len() != state.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: state.num_qubits(),
                actual: assignment.len(),
            });
        }
        let owned: Vec<(PartyId, String)> = assignment
            .iter()
            .map(|&(p, label)| (p, label.to_string()))
            .collect();
        self.attach(state, &owned, "input")
    }

    /// Distributes a fresh GHZ state or Bell pair, one qubit per owner. New
    /// wires are labelled by party initial and a per-party counter (`A1`,
    /// `B1`, ...).
    pub fn install_resource(
        &mut self,
        kind: ResourceKind,
        owners: &[PartyId],
    ) -> Result<Vec<WireId>> {
        if owners.len() != kind.parties() {
            return Err(Error::InvalidResource(format!(
                "{} needs {} owners, got {}",
                kind.name(),
                kind.parties(),
                owners.len()
            )));
        }
        let distinct: BTreeSet<_> = owners.iter().collect();
        if distinct.len() != owners.len() {
            return Err(Error::InvalidResource("duplicate owner".into()));
        }
        let owned: Vec<(PartyId, String)> = owners
            .iter()
            .map(|&p| {
                let n = self.ancillas.entry(p).or_insert(0);
                *n += 1;
                (p, format!("{}{}", p.initial(), n))
            })
            .collect();
        let wires = self.attach(&cat_state(kind.parties()), &owned, kind.name())?;
        match kind {
            ResourceKind::Ghz => self.tally.ghz_consumed += 1,
            ResourceKind::Bell => self.tally.bell_consumed += 1,
        }
        Ok(wires)
    }

    fn attach(
        &mut self,
        state: &StateVector,
        owned: &[(PartyId, String)],
        resource: &str,
    ) -> Result<Vec<WireId>> {
        if let Some((_, dup)) = owned
            .iter()
            .find(|(_, l)| self.labels.values().any(|x| x == l))
        {
            return Err(Error::InvalidResource(format!(
                "wire label {dup} already in use"
            )));
        }
        self.state = Some(match self.state.take() {
            Some(s) => s.tensor(state),
            None => state.clone(),
        });
        let mut wires = Vec::with_capacity(owned.len());
        for (party, label) in owned {
            let id = WireId(self.next_wire);
            self.next_wire += 1;
            self.register.push(id);
            self.ownership.insert(id, *party);
            self.labels.insert(id, label.clone());
            self.push_event(
                *party,
                EventKind::ResourceClaim,
                "setup",
                Payload::ResourceClaim {
                    resource: resource.to_string(),
                    wire: label.clone(),
                },
            );
            wires.push(id);
        }
        Ok(wires)
    }

    /// Applies `gate` to `wires` on behalf of `party`, which must own every
    /// one of them.
    pub fn local_apply(
        &mut self,
        party: PartyId,
        gate: &Unitary,
        wires: &[WireId],
        gate_name: &str,
        step_label: &str,
    ) -> Result<()> {
        let positions = wires
            .iter()
            .map(|&w| self.owned_position(party, w))
            .collect::<Result<Vec<_>>>()?;
        let state = self
            .state
            .as_ref()
            .ok_or_else(|| Error::UnknownWire("<empty>".into()))?;
        self.state = Some(state.apply_gate(gate, &positions)?);
        let wire_labels = wires.iter().map(|w| self.labels[w].clone()).collect();
        self.push_event(
            party,
            EventKind::LocalGate,
            step_label,
            Payload::Gate {
                gate: gate_name.to_string(),
                wires: wire_labels,
            },
        );
        Ok(())
    }

    /// Measures one of `party`'s wires in the computational basis and retires
    /// it. Sampling uses the party's own stream unless `forced_outcome` is set.
    pub fn local_measure(
        &mut self,
        party: PartyId,
        wire: WireId,
        forced_outcome: Option<u8>,
        step_label: &str,
    ) -> Result<MeasureRecord> {
        let pos = self.owned_position(party, wire)?;
        let state = self.state.as_ref().expect("owned wire implies live state");
        let rng = self.rngs.get_mut(&party).expect("every party has a stream");
        let m = state.measure(pos, forced_outcome, rng)?;
        self.state = m.post_state;
        self.register.remove(pos);
        self.ownership.remove(&wire);
        let label = self.labels.remove(&wire).expect("live wire has a label");
        self.push_event(
            party,
            EventKind::LocalMeasure,
            step_label,
            Payload::Measure {
                wire: label,
                outcome: m.outcome,
                probability: m.probability,
                forced: forced_outcome.is_some(),
            },
        );
        Ok(MeasureRecord {
            outcome: m.outcome,
            probability: m.probability,
        })
    }

    pub fn send_classical(&mut self, msg: ClassicalMessage, step_label: &str) -> Result<()> {
        let msg_id = self.next_msg;
        self.next_msg += 1;
        self.tally.cbits += 1;
        self.tally.raw_directed_messages += msg.recipients.len() as u32;
        self.push_event(
            msg.sender,
            EventKind::Send,
            step_label,
            Payload::Send {
                msg_id,
                tag: msg.tag.clone(),
                bit: msg.bit,
                recipients: msg.recipients.iter().copied().collect(),
            },
        );
        for &r in &msg.recipients {
            self.mailbox.entry(r).or_default().push_back(Delivery {
                msg_id,
                msg: msg.clone(),
            });
        }
        Ok(())
    }

    pub fn has_message(&self, party: PartyId, tag: &str) -> bool {
        self.mailbox
            .get(&party)
            .is_some_and(|q| q.iter().any(|d| d.msg.tag == tag))
    }

    /// Takes the oldest message tagged `tag` from `party`'s mailbox. An empty
    /// mailbox here is a causality fault: the caller ran a receive ahead of
    /// its send.
    pub fn receive_classical(&mut self, party: PartyId, tag: &str, step_label: &str) -> Result<u8> {
        let queue = self.mailbox.entry(party).or_default();
        let Some(idx) = queue.iter().position(|d| d.msg.tag == tag) else {
            return Err(Error::CausalityFault {
                party,
                tag: tag.to_string(),
            });
        };
        let d = queue.remove(idx).expect("index from position");
        self.push_event(
            party,
            EventKind::Receive,
            step_label,
            Payload::Receive {
                msg_id: d.msg_id,
                tag: d.msg.tag.clone(),
                bit: d.msg.bit,
                from: d.msg.sender,
            },
        );
        Ok(d.msg.bit)
    }

    pub fn state(&self) -> Option<&StateVector> {
        self.state.as_ref()
    }

    /// Live wires in register order.
    pub fn register(&self) -> &[WireId] {
        &self.register
    }

    pub fn owner(&self, wire: WireId) -> Option<PartyId> {
        self.ownership.get(&wire).copied()
    }

    pub fn label(&self, wire: WireId) -> Option<&str> {
        self.labels.get(&wire).map(String::as_str)
    }

    pub fn position(&self, wire: WireId) -> Option<usize> {
        self.register.iter().position(|&w| w == wire)
    }

    pub fn transcript(&self) -> &[TranscriptEvent] {
        &self.transcript
    }

    pub fn tally(&self) -> ResourceTally {
        self.tally
    }

    fn owned_position(&self, party: PartyId, wire: WireId) -> Result<usize> {
        let label = || {
            self.labels
                .get(&wire)
                .cloned()
                .unwrap_or_else(|| format!("#{}", wire.0))
        };
        match self.ownership.get(&wire) {
            Some(&owner) if owner == party => {}
            Some(_) => {
                return Err(Error::OwnershipViolation {
                    party,
                    wire: label(),
                })
            }
            None => return Err(Error::UnknownWire(label())),
        }
        Ok(self.position(wire).expect("owned wire is in the register"))
    }

    fn push_event(&mut self, actor: PartyId, kind: EventKind, step_label: &str, payload: Payload) {
        self.transcript.push(TranscriptEvent {
            actor,
            kind,
            step_label: step_label.to_string(),
            payload,
        });
    }
}
