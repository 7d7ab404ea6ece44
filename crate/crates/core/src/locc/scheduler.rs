//! Cooperative, deterministic execution of per-party step lists.
//!
//! A [`Schedule`] is a total order of party slots: the k-th occurrence of a
//! party in the schedule runs that party's k-th step. In
//! [`ExecMode::Strict`] the order is followed exactly and a receive with no
//! matching message is a causality fault. In [`ExecMode::Blocking`] a party
//! waiting on a message is skipped and its slot stays pending until the
//! message arrives; if every pending slot is blocked the run deadlocks.

use std::collections::BTreeMap;

use rand::Rng;

use super::{ClassicalMessage, LoccWorld, PartyId, WireId};
use crate::error::{Error, Result};
use crate::qstate::Unitary;

/// One atomic action of a party program.
#[derive(Debug, Clone)]
pub enum Step {
    Gate {
        name: String,
        gate: Unitary,
        wires: Vec<WireId>,
        label: String,
    },
    /// Applied iff the XOR of the named local bits is 1.
    ConditionalGate {
        name: String,
        gate: Unitary,
        wires: Vec<WireId>,
        parity_of: Vec<String>,
        label: String,
    },
    /// Measures `wire` and stores the outcome as local bit `record_as`.
    Measure {
        wire: WireId,
        record_as: String,
        forced: Option<u8>,
        label: String,
    },
    /// Sends local bit `tag` under the same tag.
    Send {
        tag: String,
        recipients: Vec<PartyId>,
        label: String,
    },
    /// Waits for a message tagged `tag` and stores its bit locally.
    Receive { tag: String, label: String },
}

impl Step {
    pub fn label(&self) -> &str {
        match self {
            Step::Gate { label, .. }
            | Step::ConditionalGate { label, .. }
            | Step::Measure { label, .. }
            | Step::Send { label, .. }
            | Step::Receive { label, .. } => label,
        }
    }
}

/// Step lists keyed by party.
#[derive(Debug, Clone, Default)]
pub struct Programs {
    steps: BTreeMap<PartyId, Vec<Step>>,
}

impl Programs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, party: PartyId, step: Step) {
        self.steps.entry(party).or_default().push(step);
    }

    pub fn steps(&self, party: PartyId) -> &[Step] {
        self.steps.get(&party).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self, party: PartyId) -> usize {
        self.steps(party).len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.values().all(Vec::is_empty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Strict,
    Blocking,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    order: Vec<PartyId>,
}

impl Schedule {
    pub fn new(order: Vec<PartyId>) -> Self {
        Self { order }
    }

    /// Every program run to completion, one party after another.
    pub fn serial(programs: &Programs, parties: &[PartyId]) -> Self {
        Self::from_segments(parties.iter().map(|&p| (p, programs.len(p))))
    }

    /// Concatenation of `(party, count)` runs.
    pub fn from_segments(segments: impl IntoIterator<Item = (PartyId, usize)>) -> Self {
        let order = segments
            .into_iter()
            .flat_map(|(p, n)| std::iter::repeat_n(p, n))
            .collect();
        Self { order }
    }

    pub fn then(mut self, other: &Schedule) -> Self {
        self.order.extend_from_slice(&other.order);
        self
    }

    pub fn order(&self) -> &[PartyId] {
        &self.order
    }
}

/// Every merge of `na` slots of `a` with `nb` slots of `b`, in lexicographic
/// order of the positions taken by `a`.
pub fn all_interleavings(a: PartyId, na: usize, b: PartyId, nb: usize) -> Vec<Vec<PartyId>> {
    fn go(
        a: PartyId,
        na: usize,
        b: PartyId,
        nb: usize,
        prefix: &mut Vec<PartyId>,
        out: &mut Vec<Vec<PartyId>>,
    ) {
        if na == 0 && nb == 0 {
            out.push(prefix.clone());
            return;
        }
        if na > 0 {
            prefix.push(a);
            go(a, na - 1, b, nb, prefix, out);
            prefix.pop();
        }
        if nb > 0 {
            prefix.push(b);
            go(a, na, b, nb - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(a, na, b, nb, &mut Vec::with_capacity(na + nb), &mut out);
    out
}

/// Uniformly random merge of the given slot counts.
pub fn random_interleaving<R: Rng + ?Sized>(
    counts: &[(PartyId, usize)],
    rng: &mut R,
) -> Vec<PartyId> {
    let mut remaining: Vec<(PartyId, usize)> = counts.to_vec();
    let total: usize = remaining.iter().map(|(_, n)| n).sum();
    let mut out = Vec::with_capacity(total);
    for left in (1..=total).rev() {
        let mut pick = rng.random_range(0..left);
        for (p, n) in remaining.iter_mut() {
            if pick < *n {
                out.push(*p);
                *n -= 1;
                break;
            }
            pick -= *n;
        }
    }
    out
}

/// Local classical memory of every party after a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOutcome {
    pub bits: BTreeMap<PartyId, BTreeMap<String, u8>>,
}

impl RunOutcome {
    pub fn bit(&self, party: PartyId, tag: &str) -> Option<u8> {
        self.bits.get(&party).and_then(|b| b.get(tag)).copied()
    }
}

/// Executes `programs` against `world` in the order given by `schedule`.
///
/// The schedule must hold exactly as many slots for each party as that party
/// has steps. Parties only read their own classical memory; conditional gates
/// depend on nothing but bits a party measured or received.
pub fn run_interleaved(
    programs: &Programs,
    schedule: &Schedule,
    world: &mut LoccWorld,
    mode: ExecMode,
) -> Result<RunOutcome> {
    for p in PartyId::ALL {
        let slots = schedule.order.iter().filter(|&&q| q == p).count();
        if slots != programs.len(p) {
            return Err(Error::InvalidSchedule(format!(
                "{p} has {} steps but {slots} schedule slots",
                programs.len(p)
            )));
        }
    }

    let mut pc: BTreeMap<PartyId, usize> = BTreeMap::new();
    let mut outcome = RunOutcome::default();
    let mut pending: Vec<PartyId> = schedule.order.clone();

    while !pending.is_empty() {
        let runnable = pending.iter().position(|&p| {
            let step = &programs.steps(p)[pc.get(&p).copied().unwrap_or(0)];
            match (mode, step) {
                (ExecMode::Blocking, Step::Receive { tag, .. }) => world.has_message(p, tag),
                _ => true,
            }
        });
        let Some(slot) = runnable else {
            let mut blocked: Vec<(PartyId, String)> = Vec::new();
            for &p in &pending {
                if blocked.iter().any(|(q, _)| *q == p) {
                    continue;
                }
                if let Step::Receive { tag, .. } =
                    &programs.steps(p)[pc.get(&p).copied().unwrap_or(0)]
                {
                    blocked.push((p, tag.clone()));
                }
            }
            return Err(Error::Deadlock { blocked });
        };
        let party = pending.remove(slot);
        let counter = pc.entry(party).or_insert(0);
        let step = &programs.steps(party)[*counter];
        *counter += 1;
        execute(party, step, world, outcome.bits.entry(party).or_default())?;
    }
    Ok(outcome)
}

fn execute(
    party: PartyId,
    step: &Step,
    world: &mut LoccWorld,
    bits: &mut BTreeMap<String, u8>,
) -> Result<()> {
    let local_bit = |bits: &BTreeMap<String, u8>, tag: &str| {
        bits.get(tag).copied().ok_or_else(|| Error::MissingBit {
            party,
            tag: tag.to_string(),
        })
    };
    match step {
        Step::Gate {
            name,
            gate,
            wires,
            label,
        } => world.local_apply(party, gate, wires, name, label),
        Step::ConditionalGate {
            name,
            gate,
            wires,
            parity_of,
            label,
        } => {
            let mut parity = 0;
            for tag in parity_of {
                parity ^= local_bit(bits, tag)?;
            }
            if parity == 1 {
                world.local_apply(party, gate, wires, name, label)?;
            }
            Ok(())
        }
        Step::Measure {
            wire,
            record_as,
            forced,
            label,
        } => {
            let rec = world.local_measure(party, *wire, *forced, label)?;
            bits.insert(record_as.clone(), rec.outcome);
            Ok(())
        }
        Step::Send {
            tag,
            recipients,
            label,
        } => {
            let bit = local_bit(bits, tag)?;
            let msg = ClassicalMessage::new(party, recipients.iter().copied(), bit, tag.clone())?;
            world.send_classical(msg, label)
        }
        Step::Receive { tag, label } => {
            let bit = world.receive_classical(party, tag, label)?;
            bits.insert(tag.clone(), bit);
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::pauli_x;
    use crate::locc::{audit, ResourceKind};
    use crate::qstate::StateVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use PartyId::*;

    /// Alice measures |1⟩ and tells Bob, who flips his qubit iff the bit is 1.
    fn relay(world: &mut LoccWorld) -> Programs {
        let wires = world
            .load_input(&StateVector::basis(2, 0b10), &[(Alice, "A"), (Bob, "B")])
            .unwrap();
        let mut p = Programs::new();
        p.push(
            Alice,
            Step::Measure {
                wire: wires[0],
                record_as: "m".into(),
                forced: None,
                label: "measure".into(),
            },
        );
        p.push(
            Alice,
            Step::Send {
                tag: "m".into(),
                recipients: vec![Bob],
                label: "send".into(),
            },
        );
        p.push(
            Bob,
            Step::Receive {
                tag: "m".into(),
                label: "recv".into(),
            },
        );
        p.push(
            Bob,
            Step::ConditionalGate {
                name: "X".into(),
                gate: pauli_x(),
                wires: vec![wires[1]],
                parity_of: vec!["m".into()],
                label: "fix".into(),
            },
        );
        p
    }

    #[test]
    fn strict_mode_reports_causality_fault() {
        let mut w = LoccWorld::new(0);
        let p = relay(&mut w);
        let sched = Schedule::new(vec![Bob, Alice, Alice, Bob]);
        let err = run_interleaved(&p, &sched, &mut w, ExecMode::Strict).unwrap_err();
        assert!(matches!(err, Error::CausalityFault { party: Bob, .. }));
    }

    #[test]
    fn blocking_mode_resumes_after_send() {
        let mut w = LoccWorld::new(0);
        let p = relay(&mut w);
        let sched = Schedule::new(vec![Bob, Alice, Alice, Bob]);
        let out = run_interleaved(&p, &sched, &mut w, ExecMode::Blocking).unwrap();
        assert_eq!(out.bit(Bob, "m"), Some(1));
        assert_eq!(w.state().unwrap(), &StateVector::basis(1, 1));
        audit(w.transcript()).unwrap();
        // Bob's receive is logged after Alice's send despite being scheduled first.
        let kinds: Vec<_> = w
            .transcript()
            .iter()
            .map(|e| e.step_label.as_str())
            .collect();
        assert_eq!(&kinds[2..], ["measure", "send", "recv", "fix"]);
    }

    #[test]
    fn deadlock_names_blocked_parties() {
        let mut w = LoccWorld::new(0);
        let mut p = Programs::new();
        p.push(
            Bob,
            Step::Receive {
                tag: "x".into(),
                label: "wait".into(),
            },
        );
        p.push(
            Charlie,
            Step::Receive {
                tag: "y".into(),
                label: "wait".into(),
            },
        );
        let err = run_interleaved(
            &p,
            &Schedule::new(vec![Bob, Charlie]),
            &mut w,
            ExecMode::Blocking,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::Deadlock {
                blocked: vec![(Bob, "x".into()), (Charlie, "y".into())]
            }
        );
    }

    #[test]
    fn schedule_slot_counts_checked() {
        let mut w = LoccWorld::new(0);
        let p = relay(&mut w);
        let err = run_interleaved(
            &p,
            &Schedule::new(vec![Alice, Alice, Bob]),
            &mut w,
            ExecMode::Strict,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSchedule(_)));
    }

    #[test]
    fn foreign_wire_in_program_is_rejected() {
        let mut w = LoccWorld::new(0);
        let wires = w
            .install_resource(ResourceKind::Bell, &[Alice, Bob])
            .unwrap();
        let mut p = Programs::new();
        p.push(
            Bob,
            Step::Gate {
                name: "X".into(),
                gate: pauli_x(),
                wires: vec![wires[0]],
                label: "cheat".into(),
            },
        );
        let err =
            run_interleaved(&p, &Schedule::new(vec![Bob]), &mut w, ExecMode::Strict).unwrap_err();
        assert!(matches!(err, Error::OwnershipViolation { party: Bob, .. }));
    }

    #[test]
    fn interleaving_enumeration_counts() {
        assert_eq!(all_interleavings(Bob, 6, Charlie, 6).len(), 924);
        assert_eq!(all_interleavings(Bob, 2, Charlie, 0), vec![vec![Bob, Bob]]);
        let all = all_interleavings(Bob, 2, Charlie, 2);
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![Bob, Bob, Charlie, Charlie]);
        assert_eq!(all[5], vec![Charlie, Charlie, Bob, Bob]);
    }

    #[test]
    fn random_interleaving_preserves_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let order = random_interleaving(&[(Bob, 6), (Charlie, 4)], &mut rng);
            assert_eq!(order.iter().filter(|&&p| p == Bob).count(), 6);
            assert_eq!(order.len(), 10);
        }
    }
}
