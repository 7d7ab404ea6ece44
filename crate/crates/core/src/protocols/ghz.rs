use std::collections::BTreeMap;

use super::{
    check_dimensions, forced_assignments, load_input, oracle_state, run_branch, InputLayout, Mode,
    ProtocolOptions, ProtocolReport, Scheme,
};
use crate::error::{Error, Result};
use crate::gates::{cnot, embed_diagonal_block, hadamard, pauli_x, pauli_z, DiagonalBlockOp};
use crate::locc::{LoccWorld, PartyId, Programs, ResourceKind, Schedule, Step, WireId};
use crate::qstate::StateVector;

use PartyId::*;

/// Alice's steps before the partners run: CNOT, measure, broadcast.
const ALICE_OPENING: usize = 3;

/// Step lists for the GHZ protocol.
///
/// Alice: CNOT(A, A1), measure A1 as `a`, broadcast `a`; later receive `b`
/// and `c` and apply Z to A iff `b ⊕ c = 1`. Bob: receive `a`, X on B1 iff
/// `a = 1`, U on (B1, B), H on B1, measure B1 as `b`, send `b` to Alice.
/// Charlie mirrors Bob with V, C1 and `c`.
pub fn ghz_programs(
    u: &DiagonalBlockOp,
    v: &DiagonalBlockOp,
    layout: &InputLayout,
    ancillas: [WireId; 3],
    forced: &BTreeMap<String, u8>,
    opts: &ProtocolOptions,
) -> Programs {
    let [a1, b1, c1] = ancillas;
    let mut p = Programs::new();

    p.push(
        Alice,
        Step::Gate {
            name: "CNOT".into(),
            gate: cnot(),
            wires: vec![layout.a, a1],
            label: "step 1".into(),
        },
    );
    p.push(
        Alice,
        Step::Measure {
            wire: a1,
            record_as: "a".into(),
            forced: forced.get("a").copied(),
            label: "step 1".into(),
        },
    );
    p.push(
        Alice,
        Step::Send {
            tag: "a".into(),
            recipients: vec![Bob, Charlie],
            label: "step 1".into(),
        },
    );

    partner_program(
        &mut p,
        Bob,
        PartnerSpec {
            control_tag: "a",
            op: u,
            ancilla: b1,
            register: &layout.b,
            name: "U",
            result_tag: "b",
            correct: opts.corrections.bob_x,
            prime: "",
        },
        forced,
    );
    partner_program(
        &mut p,
        Charlie,
        PartnerSpec {
            control_tag: "a",
            op: v,
            ancilla: c1,
            register: &layout.c,
            name: "V",
            result_tag: "c",
            correct: opts.corrections.charlie_x,
            prime: "'",
        },
        forced,
    );

    for tag in ["b", "c"] {
        p.push(
            Alice,
            Step::Receive {
                tag: tag.into(),
                label: "step 5".into(),
            },
        );
    }
    if opts.corrections.alice_z {
        p.push(
            Alice,
            Step::ConditionalGate {
                name: "Z".into(),
                gate: pauli_z(),
                wires: vec![layout.a],
                parity_of: vec!["b".into(), "c".into()],
                label: "step 5".into(),
            },
        );
    }
    p
}

pub(super) struct PartnerSpec<'a> {
    pub control_tag: &'a str,
    pub op: &'a DiagonalBlockOp,
    pub ancilla: WireId,
    pub register: &'a [WireId],
    pub name: &'a str,
    pub result_tag: &'a str,
    pub correct: bool,
    pub prime: &'a str,
}

pub(super) fn partner_program(
    p: &mut Programs,
    party: PartyId,
    spec: PartnerSpec<'_>,
    forced: &BTreeMap<String, u8>,
) {
    let label = |n: u8| format!("step {n}{}", spec.prime);
    p.push(
        party,
        Step::Receive {
            tag: spec.control_tag.into(),
            label: label(2),
        },
    );
    if spec.correct {
        p.push(
            party,
            Step::ConditionalGate {
                name: "X".into(),
                gate: pauli_x(),
                wires: vec![spec.ancilla],
                parity_of: vec![spec.control_tag.into()],
                label: label(2),
            },
        );
    }
    let mut wires = vec![spec.ancilla];
    wires.extend_from_slice(spec.register);
    p.push(
        party,
        Step::Gate {
            name: spec.name.into(),
            gate: embed_diagonal_block(spec.op),
            wires,
            label: label(3),
        },
    );
    p.push(
        party,
        Step::Gate {
            name: "H".into(),
            gate: hadamard(),
            wires: vec![spec.ancilla],
            label: label(4),
        },
    );
    p.push(
        party,
        Step::Measure {
            wire: spec.ancilla,
            record_as: spec.result_tag.into(),
            forced: forced.get(spec.result_tag).copied(),
            label: label(4),
        },
    );
    p.push(
        party,
        Step::Send {
            tag: spec.result_tag.into(),
            recipients: vec![Alice],
            label: label(4),
        },
    );
}

/// Alice's opening steps, the partner slots in `partner_order` (Bob then
/// Charlie if `None`), then Alice's closing steps.
pub fn ghz_schedule(programs: &Programs, partner_order: Option<&[PartyId]>) -> Result<Schedule> {
    let alice = programs.len(Alice);
    if alice < ALICE_OPENING {
        return Err(Error::InvalidSchedule("Alice program too short".into()));
    }
    let middle = match partner_order {
        Some(order) => Schedule::new(order.to_vec()),
        None => Schedule::serial(programs, &[Bob, Charlie]),
    };
    Ok(Schedule::from_segments([(Alice, ALICE_OPENING)])
        .then(&middle)
        .then(&Schedule::from_segments([(Alice, alice - ALICE_OPENING)])))
}

/// Runs the GHZ protocol with default options.
pub fn ghz_protocol(
    u: &DiagonalBlockOp,
    v: &DiagonalBlockOp,
    initial: &StateVector,
    mode: Mode,
) -> Result<ProtocolReport> {
    ghz_protocol_with(u, v, initial, mode, &ProtocolOptions::default())
}

pub fn ghz_protocol_with(
    u: &DiagonalBlockOp,
    v: &DiagonalBlockOp,
    initial: &StateVector,
    mode: Mode,
    opts: &ProtocolOptions,
) -> Result<ProtocolReport> {
    check_dimensions(u, v, initial)?;
    let oracle = oracle_state(u, v, initial)?;

    let (seed, assignments) = match mode {
        Mode::Sampled { seed } => (seed, vec![BTreeMap::new()]),
        Mode::Enumerate => (0, forced_assignments(&["a", "b", "c"])),
    };
    let mut runs = Vec::with_capacity(assignments.len());
    for forced in &assignments {
        let mut world = LoccWorld::new(seed);
        let layout = load_input(&mut world, initial, u.block_qubits(), v.block_qubits())?;
        let anc = world.install_resource(ResourceKind::Ghz, &[Alice, Bob, Charlie])?;
        let programs = ghz_programs(u, v, &layout, [anc[0], anc[1], anc[2]], forced, opts);
        let schedule = ghz_schedule(&programs, opts.partner_order.as_deref())?;
        runs.push(run_branch(
            world,
            &layout,
            &programs,
            &schedule,
            opts.exec,
            &[(Alice, "a"), (Bob, "b"), (Charlie, "c")],
        )?);
    }
    ProtocolReport::assemble(Scheme::Ghz, mode, oracle, runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::haar_random_blocks;
    use crate::locc::{ghz_state, ExecMode};
    use crate::protocols::{verify_report, Corrections};
    use crate::qstate::VERIFICATION_TOL;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus00() -> StateVector {
        StateVector::plus().tensor(&StateVector::zero(2))
    }

    #[test]
    fn cnot_pair_on_plus00_gives_ghz_in_every_branch() {
        let cn = DiagonalBlockOp::cnot_blocks();
        let r = ghz_protocol(&cn, &cn, &plus00(), Mode::Enumerate).unwrap();
        assert_eq!(r.branches.len(), 8);
        for b in &r.branches {
            assert!(b.final_state.distance(&ghz_state()).unwrap().0 < VERIFICATION_TOL);
        }
        assert!(verify_report(&r, VERIFICATION_TOL).passed);
    }

    #[test]
    fn identity_blocks_leave_input_unchanged() {
        let id = DiagonalBlockOp::identity(1);
        let init = StateVector::random(3, &mut ChaCha8Rng::seed_from_u64(4));
        let r = ghz_protocol(&id, &id, &init, Mode::Enumerate).unwrap();
        for b in &r.branches {
            assert!(b.final_state.distance(&init).unwrap().0 < VERIFICATION_TOL);
        }
    }

    #[test]
    fn haar_blocks_two_by_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = haar_random_blocks(2, 1).unwrap();
        let v = haar_random_blocks(2, 2).unwrap();
        let init = StateVector::random(5, &mut rng);
        let r = ghz_protocol(&u, &v, &init, Mode::Enumerate).unwrap();
        assert!(
            r.max_exact_distance < VERIFICATION_TOL,
            "{}",
            r.max_exact_distance
        );
    }

    #[test]
    fn tally_and_transcript_shape() {
        let cn = DiagonalBlockOp::cnot_blocks();
        let r = ghz_protocol(&cn, &cn, &plus00(), Mode::Sampled { seed: 3 }).unwrap();
        assert_eq!(r.branches.len(), 1);
        assert_eq!(r.tally.ghz_consumed, 1);
        assert_eq!(r.tally.bell_consumed, 0);
        assert_eq!(r.tally.cbits, 3);
        assert_eq!(r.tally.raw_directed_messages, 4);
        assert!(verify_report(&r, VERIFICATION_TOL).passed);
    }

    #[test]
    fn sampled_mode_is_reproducible() {
        let u = haar_random_blocks(1, 5).unwrap();
        let init = StateVector::random(3, &mut ChaCha8Rng::seed_from_u64(1));
        let run = |seed| {
            ghz_protocol(&u, &u, &init, Mode::Sampled { seed })
                .unwrap()
                .branches[0]
                .outcomes
                .clone()
        };
        assert_eq!(run(17), run(17));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let u = haar_random_blocks(2, 5).unwrap();
        let v = haar_random_blocks(1, 6).unwrap();
        let err = ghz_protocol(&u, &v, &StateVector::zero(3), Mode::Enumerate).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 4,
                actual: 3
            }
        );
    }

    #[test]
    fn skipping_z_fails_when_b_xor_c_is_one() {
        let u = haar_random_blocks(1, 11).unwrap();
        let v = haar_random_blocks(1, 12).unwrap();
        let init = StateVector::random(3, &mut ChaCha8Rng::seed_from_u64(2));
        let opts = ProtocolOptions {
            corrections: Corrections {
                alice_z: false,
                ..Corrections::default()
            },
            ..ProtocolOptions::default()
        };
        let r = ghz_protocol_with(&u, &v, &init, Mode::Enumerate, &opts).unwrap();
        let verdict = verify_report(&r, VERIFICATION_TOL);
        assert!(!verdict.passed);
        for b in &r.branches {
            let flips = b.bit("b").unwrap() ^ b.bit("c").unwrap();
            assert_eq!(
                b.exact_distance < VERIFICATION_TOL,
                flips == 0,
                "{}",
                b.key()
            );
        }
    }

    #[test]
    fn blocking_mode_accepts_partner_first_schedule() {
        let u = haar_random_blocks(1, 3).unwrap();
        let init = StateVector::random(3, &mut ChaCha8Rng::seed_from_u64(9));
        let mut world = LoccWorld::new(0);
        let layout = load_input(&mut world, &init, 1, 1).unwrap();
        let anc = world
            .install_resource(ResourceKind::Ghz, &[Alice, Bob, Charlie])
            .unwrap();
        let programs = ghz_programs(
            &u,
            &u,
            &layout,
            [anc[0], anc[1], anc[2]],
            &BTreeMap::new(),
            &ProtocolOptions::default(),
        );
        // Bob and Charlie are scheduled before Alice has broadcast anything.
        let schedule = Schedule::serial(&programs, &[Bob, Charlie, Alice]);
        let strict = run_branch(
            world.clone(),
            &layout,
            &programs,
            &schedule,
            ExecMode::Strict,
            &[],
        );
        assert!(matches!(
            strict,
            Err(Error::CausalityFault { party: Bob, .. })
        ));
        let run = run_branch(
            world,
            &layout,
            &programs,
            &schedule,
            ExecMode::Blocking,
            &[],
        )
        .unwrap();
        let oracle = oracle_state(&u, &u, &init).unwrap();
        assert!(run.final_state.distance(&oracle).unwrap().0 < VERIFICATION_TOL);
    }
}
