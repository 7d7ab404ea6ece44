use std::collections::BTreeMap;

use super::ghz::{partner_program, PartnerSpec};
use super::{
    check_dimensions, forced_assignments, load_input, oracle_state, run_branch, InputLayout, Mode,
    ProtocolOptions, ProtocolReport, Scheme,
};
use crate::error::Result;
use crate::gates::{cnot, pauli_z, DiagonalBlockOp};
use crate::locc::{LoccWorld, PartyId, Programs, ResourceKind, Schedule, Step, WireId};
use crate::qstate::StateVector;

use PartyId::*;

/// Step lists for two bipartite rounds, Alice–Bob on the Bell pair
/// `(A1, B1)` and then Alice–Charlie on `(A2, C1)`. Each round is the GHZ
/// protocol with the third party removed: Alice sends `aₖ` to one partner and
/// corrects with Z on that partner's bit alone.
///
/// Returns the programs and a strict-order schedule: Alice's round-1 opening,
/// Bob, Alice's round-1 close and round-2 opening, Charlie, Alice's close.
pub fn baseline_programs(
    u: &DiagonalBlockOp,
    v: &DiagonalBlockOp,
    layout: &InputLayout,
    bell_ab: [WireId; 2],
    bell_ac: [WireId; 2],
    forced: &BTreeMap<String, u8>,
    opts: &ProtocolOptions,
) -> (Programs, Schedule) {
    let mut p = Programs::new();
    let rounds = [
        (
            Bob,
            u,
            bell_ab,
            &layout.b,
            "a1",
            "b",
            "U",
            opts.corrections.bob_x,
            "",
        ),
        (
            Charlie,
            v,
            bell_ac,
            &layout.c,
            "a2",
            "c",
            "V",
            opts.corrections.charlie_x,
            "'",
        ),
    ];
    let mut segments = Vec::new();
    let mut alice_pending = 0;
    for (partner, op, [anc_alice, anc_partner], register, a_tag, r_tag, name, correct, prime) in
        rounds
    {
        let before = p.len(Alice);
        p.push(
            Alice,
            Step::Gate {
                name: "CNOT".into(),
                gate: cnot(),
                wires: vec![layout.a, anc_alice],
                label: format!("step 1{prime}"),
            },
        );
        p.push(
            Alice,
            Step::Measure {
                wire: anc_alice,
                record_as: a_tag.into(),
                forced: forced.get(a_tag).copied(),
                label: format!("step 1{prime}"),
            },
        );
        p.push(
            Alice,
            Step::Send {
                tag: a_tag.into(),
                recipients: vec![partner],
                label: format!("step 1{prime}"),
            },
        );
        segments.push((Alice, alice_pending + p.len(Alice) - before));

        let partner_before = p.len(partner);
        partner_program(
            &mut p,
            partner,
            PartnerSpec {
                control_tag: a_tag,
                op,
                ancilla: anc_partner,
                register,
                name,
                result_tag: r_tag,
                correct,
                prime,
            },
            forced,
        );
        segments.push((partner, p.len(partner) - partner_before));

        let before = p.len(Alice);
        p.push(
            Alice,
            Step::Receive {
                tag: r_tag.into(),
                label: format!("step 5{prime}"),
            },
        );
        if opts.corrections.alice_z {
            p.push(
                Alice,
                Step::ConditionalGate {
                    name: "Z".into(),
                    gate: pauli_z(),
                    wires: vec![layout.a],
                    parity_of: vec![r_tag.into()],
                    label: format!("step 5{prime}"),
                },
            );
        }
        alice_pending = p.len(Alice) - before;
    }
    segments.push((Alice, alice_pending));
    (p, Schedule::from_segments(segments))
}

pub fn two_bell_baseline(
    u: &DiagonalBlockOp,
    v: &DiagonalBlockOp,
    initial: &StateVector,
    mode: Mode,
) -> Result<ProtocolReport> {
    two_bell_baseline_with(u, v, initial, mode, &ProtocolOptions::default())
}

/// Runs the baseline. `opts.partner_order` is ignored: the rounds are
/// sequential, so there is nothing for Bob and Charlie to interleave.
pub fn two_bell_baseline_with(
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
        Mode::Enumerate => (0, forced_assignments(&["a1", "b", "a2", "c"])),
    };
    let mut runs = Vec::with_capacity(assignments.len());
    for forced in &assignments {
        let mut world = LoccWorld::new(seed);
        let layout = load_input(&mut world, initial, u.block_qubits(), v.block_qubits())?;
        let ab = world.install_resource(ResourceKind::Bell, &[Alice, Bob])?;
        let ac = world.install_resource(ResourceKind::Bell, &[Alice, Charlie])?;
        let (programs, schedule) =
            baseline_programs(u, v, &layout, [ab[0], ab[1]], [ac[0], ac[1]], forced, opts);
        runs.push(run_branch(
            world,
            &layout,
            &programs,
            &schedule,
            opts.exec,
            &[(Alice, "a1"), (Bob, "b"), (Alice, "a2"), (Charlie, "c")],
        )?);
    }
    ProtocolReport::assemble(Scheme::TwoBell, mode, oracle, runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::haar_random_blocks;
    use crate::locc::ghz_state;
    use crate::protocols::{ghz_protocol, verify_report, Corrections};
    use crate::qstate::VERIFICATION_TOL;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cnot_pair_gives_ghz_with_two_bell_pairs() {
        let cn = DiagonalBlockOp::cnot_blocks();
        let init = StateVector::plus().tensor(&StateVector::zero(2));
        let r = two_bell_baseline(&cn, &cn, &init, Mode::Enumerate).unwrap();
        assert_eq!(r.branches.len(), 16);
        for b in &r.branches {
            assert!(b.final_state.distance(&ghz_state()).unwrap().0 < VERIFICATION_TOL);
            assert!((b.probability - 1.0 / 16.0).abs() < VERIFICATION_TOL);
        }
        assert_eq!(r.tally.bell_consumed, 2);
        assert_eq!(r.tally.ghz_consumed, 0);
        assert_eq!(r.tally.cbits, 4);
        assert_eq!(r.tally.raw_directed_messages, 4);
    }

    #[test]
    fn identity_blocks_leave_input_unchanged() {
        let id = DiagonalBlockOp::identity(1);
        let init = StateVector::random(3, &mut ChaCha8Rng::seed_from_u64(21));
        let r = two_bell_baseline(&id, &id, &init, Mode::Enumerate).unwrap();
        assert!(r
            .branches
            .iter()
            .all(|b| b.final_state.distance(&init).unwrap().0 < VERIFICATION_TOL));
    }

    #[test]
    fn random_blocks_match_oracle_and_ghz_protocol() {
        let u = haar_random_blocks(2, 31).unwrap();
        let v = haar_random_blocks(1, 32).unwrap();
        let init = StateVector::random(4, &mut ChaCha8Rng::seed_from_u64(33));
        let base = two_bell_baseline(&u, &v, &init, Mode::Enumerate).unwrap();
        assert!(verify_report(&base, VERIFICATION_TOL).passed);
        let ghz = ghz_protocol(&u, &v, &init, Mode::Enumerate).unwrap();
        for (x, y) in base.branches.iter().zip(&ghz.branches) {
            assert!(x.final_state.distance(&y.final_state).unwrap().0 < VERIFICATION_TOL);
        }
    }

    #[test]
    fn missing_z_breaks_baseline() {
        let u = haar_random_blocks(1, 41).unwrap();
        let init = StateVector::random(3, &mut ChaCha8Rng::seed_from_u64(42));
        let opts = ProtocolOptions {
            corrections: Corrections {
                alice_z: false,
                ..Corrections::default()
            },
            ..ProtocolOptions::default()
        };
        let r = two_bell_baseline_with(&u, &u, &init, Mode::Enumerate, &opts).unwrap();
        assert!(!verify_report(&r, VERIFICATION_TOL).passed);
    }
}
