//! The GHZ protocol and the two-Bell-pair baseline, run on the LOCC harness
//! and checked branch by branch against the dense target `W·|ψ⟩`.

mod baseline;
mod ghz;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::{compose_w, DiagonalBlockOp};
use crate::locc::{
    audit, run_interleaved, EventKind, ExecMode, LoccWorld, PartyId, Payload, Programs,
    ResourceTally, Schedule, TranscriptEvent, WireId,
};
use crate::qstate::{StateVector, ALGEBRA_TOL};

pub use baseline::{baseline_programs, two_bell_baseline, two_bell_baseline_with};
pub use ghz::{ghz_programs, ghz_protocol, ghz_protocol_with, ghz_schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Ghz,
    TwoBell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// One run with outcomes drawn by the Born rule from `seed`.
    Sampled { seed: u64 },
    /// Every combination of measurement outcomes, each forced in turn.
    Enumerate,
}

/// Which classically controlled corrections a run performs. Disabling one is
/// a fault-injection hook for mutation testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Corrections {
    /// Bob's `X` on `B1` conditioned on `a`.
    pub bob_x: bool,
    /// Charlie's `X` on `C1` conditioned on `a`.
    pub charlie_x: bool,
    /// Alice's `Z` on `A` conditioned on `b ⊕ c`.
    pub alice_z: bool,
}

impl Default for Corrections {
    fn default() -> Self {
        Self {
            bob_x: true,
            charlie_x: true,
            alice_z: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolOptions {
    pub corrections: Corrections,
    /// Order of the Bob and Charlie slots between Alice's opening and closing
    /// steps. `None` runs Bob to completion, then Charlie.
    pub partner_order: Option<Vec<PartyId>>,
    pub exec: ExecMode,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            corrections: Corrections::default(),
            partner_order: None,
            exec: ExecMode::Strict,
        }
    }
}

/// Wires of the protocol's input register.
#[derive(Debug, Clone)]
pub struct InputLayout {
    pub a: WireId,
    pub b: Vec<WireId>,
    pub c: Vec<WireId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeBranch {
    /// Measurement outcomes keyed by tag (`a`, `b`, `c` for the GHZ protocol).
    pub outcomes: BTreeMap<String, u8>,
    /// Probability of this branch, the product of `step_probabilities`.
    pub probability: f64,
    /// Born probability of each measurement in transcript order.
    pub step_probabilities: Vec<f64>,
    #[serde(skip)]
    pub final_state: StateVector,
    /// Max entrywise distance to the oracle state.
    pub exact_distance: f64,
    pub fidelity: f64,
}

impl OutcomeBranch {
    pub fn bit(&self, tag: &str) -> Option<u8> {
        self.outcomes.get(tag).copied()
    }

    /// Compact label such as `a=0 b=1 c=1`.
    pub fn key(&self) -> String {
        self.outcomes
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub scheme: Scheme,
    pub mode: Mode,
    pub branches: Vec<OutcomeBranch>,
    pub oracle_state: StateVector,
    pub max_exact_distance: f64,
    pub min_fidelity: f64,
    pub tally: ResourceTally,
    /// One transcript per branch, parallel to `branches`.
    pub transcripts: Vec<Vec<TranscriptEvent>>,
}

impl ProtocolReport {
    fn assemble(
        scheme: Scheme,
        mode: Mode,
        oracle_state: StateVector,
        runs: Vec<BranchRun>,
    ) -> Result<Self> {
        let tally = runs.first().map(|r| r.tally).unwrap_or_default();
        let mut branches = Vec::with_capacity(runs.len());
        let mut transcripts = Vec::with_capacity(runs.len());
        for run in runs {
            let (exact_distance, fidelity) = run.final_state.distance(&oracle_state)?;
            branches.push(OutcomeBranch {
                outcomes: run.outcomes,
                probability: run.step_probabilities.iter().product(),
                step_probabilities: run.step_probabilities,
                final_state: run.final_state,
                exact_distance,
                fidelity,
            });
            transcripts.push(run.transcript);
        }
        let max_exact_distance = branches
            .iter()
            .map(|b| b.exact_distance)
            .fold(0.0, f64::max);
        let min_fidelity = branches
            .iter()
            .map(|b| b.fidelity)
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            scheme,
            mode,
            branches,
            oracle_state,
            max_exact_distance,
            min_fidelity,
            tally,
            transcripts,
        })
    }

    pub fn probability_sum(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

/// Outcome of [`verify_report`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub passed: bool,
    /// Index of the branch farthest from the oracle.
    pub worst_branch: Option<usize>,
    pub worst_distance: f64,
    pub probability_sum: f64,
    pub reason: Option<String>,
}

/// Passes iff every branch is within `tolerance` of the oracle and, for an
/// enumerated report, the branch probabilities sum to 1 within `tolerance`.
/// A sampled report holds a single branch, so its probability is not checked.
pub fn verify_report(report: &ProtocolReport, tolerance: f64) -> Verdict {
    let probability_sum = report.probability_sum();
    let worst = report
        .branches
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.exact_distance.total_cmp(&y.1.exact_distance));
    let Some((worst_idx, worst_branch)) = worst else {
        return Verdict {
            passed: false,
            worst_branch: None,
            worst_distance: f64::NAN,
            probability_sum,
            reason: Some("report has no branches".into()),
        };
    };
    let worst_distance = worst_branch.exact_distance;
    // Written so that NaN fails.
    let within = |x: f64| x < tolerance;
    let reason = if !within(worst_distance) {
        Some(format!(
            "branch {} is {worst_distance:e} from the oracle",
            worst_branch.key()
        ))
    } else if report.mode == Mode::Enumerate && !within((probability_sum - 1.0).abs()) {
        Some(format!("branch probabilities sum to {probability_sum}"))
    } else {
        None
    };
    Verdict {
        passed: reason.is_none(),
        worst_branch: Some(worst_idx),
        worst_distance,
        probability_sum,
        reason,
    }
}

/// `ψ = α₀|0⟩|ξ₀⟩ + α₁|1⟩|ξ₁⟩` split on wire 0, with `αᵢ ≥ 0` and any phase
/// absorbed into `ξᵢ`. A branch with `αᵢ = 0` has no defined `ξᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlDecomposition {
    pub alpha: [f64; 2],
    pub xi: [Option<StateVector>; 2],
}

impl ControlDecomposition {
    pub fn reconstruct(&self) -> StateVector {
        let rest = self
            .xi
            .iter()
            .flatten()
            .next()
            .expect("at least one branch has weight")
            .num_qubits();
        let half = 1usize << rest;
        let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 2 * half];
        for i in 0..2 {
            if let Some(xi) = &self.xi[i] {
                for (k, a) in xi.amplitudes().iter().enumerate() {
                    amps[i * half + k] = a * self.alpha[i];
                }
            }
        }
        StateVector::normalized(amps).expect("reconstruction is nonzero")
    }
}

pub fn decompose_on_control(state: &StateVector) -> Result<ControlDecomposition> {
    if state.num_qubits() < 2 {
        return Err(Error::TooFewQubits {
            required: 2,
            actual: state.num_qubits(),
        });
    }
    let half = state.amplitudes().len() / 2;
    let mut alpha = [0.0; 2];
    let mut xi = [None, None];
    for i in 0..2 {
        let part = state.amplitudes()[i * half..(i + 1) * half].to_vec();
        let weight = part.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        alpha[i] = weight;
        if weight > ALGEBRA_TOL {
            xi[i] = Some(StateVector::normalized(part)?);
        }
    }
    Ok(ControlDecomposition { alpha, xi })
}

pub(crate) fn oracle_state(
    u: &DiagonalBlockOp,
    v: &DiagonalBlockOp,
    initial: &StateVector,
) -> Result<StateVector> {
    let w = compose_w(u, v);
    let wires: Vec<usize> = (0..initial.num_qubits()).collect();
    initial.apply_gate(&w, &wires)
}

pub(crate) fn check_dimensions(
    u: &DiagonalBlockOp,
    v: &DiagonalBlockOp,
    initial: &StateVector,
) -> Result<()> {
    let expected = 1 + u.block_qubits() + v.block_qubits();
    if initial.num_qubits() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: initial.num_qubits(),
        });
    }
    Ok(())
}

/// Loads `initial` with wire 0 to Alice, the next `n` wires to Bob and the
/// rest to Charlie.
pub(crate) fn load_input(
    world: &mut LoccWorld,
    initial: &StateVector,
    n: usize,
    m: usize,
) -> Result<InputLayout> {
    let reg_labels = |p: char, k: usize| -> Vec<String> {
        if k == 1 {
            vec![p.to_string()]
        } else {
            (0..k).map(|i| format!("{p}[{i}]")).collect()
        }
    };
    let mut labels: Vec<(PartyId, String)> = vec![(PartyId::Alice, "A".into())];
    labels.extend(reg_labels('B', n).into_iter().map(|l| (PartyId::Bob, l)));
    labels.extend(
        reg_labels('C', m)
            .into_iter()
            .map(|l| (PartyId::Charlie, l)),
    );
    let assignment: Vec<(PartyId, &str)> = labels.iter().map(|(p, l)| (*p, l.as_str())).collect();
    let wires = world.load_input(initial, &assignment)?;
    Ok(InputLayout {
        a: wires[0],
        b: wires[1..1 + n].to_vec(),
        c: wires[1 + n..].to_vec(),
    })
}

#[derive(Debug, Clone)]
pub(crate) struct BranchRun {
    outcomes: BTreeMap<String, u8>,
    step_probabilities: Vec<f64>,
    final_state: StateVector,
    transcript: Vec<TranscriptEvent>,
    tally: ResourceTally,
}

/// Runs one branch to completion and collects the measured bits named in
/// `measured` from their owners' local memory. The transcript is re-audited
/// for locality before returning.
pub(crate) fn run_branch(
    mut world: LoccWorld,
    layout: &InputLayout,
    programs: &Programs,
    schedule: &Schedule,
    exec: ExecMode,
    measured: &[(PartyId, &str)],
) -> Result<BranchRun> {
    let run = run_interleaved(programs, schedule, &mut world, exec)?;
    audit(world.transcript())?;

    let mut expected = vec![layout.a];
    expected.extend(&layout.b);
    expected.extend(&layout.c);
    debug_assert_eq!(world.register(), expected.as_slice());

    let outcomes = measured
        .iter()
        .map(|&(party, tag)| {
            let bit = run.bit(party, tag).ok_or_else(|| Error::MissingBit {
                party,
                tag: tag.to_string(),
            })?;
            Ok((tag.to_string(), bit))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    let step_probabilities = world
        .transcript()
        .iter()
        .filter_map(|e| match (e.kind, &e.payload) {
            (EventKind::LocalMeasure, Payload::Measure { probability, .. }) => Some(*probability),
            _ => None,
        })
        .collect();

    Ok(BranchRun {
        outcomes,
        step_probabilities,
        final_state: world.state().cloned().expect("input wires stay live"),
        transcript: world.transcript().to_vec(),
        tally: world.tally(),
    })
}

/// All `2^k` assignments of the given tags, first tag most significant.
pub(crate) fn forced_assignments(tags: &[&str]) -> Vec<BTreeMap<String, u8>> {
    let k = tags.len();
    (0..1usize << k)
        .map(|bits| {
            tags.iter()
                .enumerate()
                .map(|(j, t)| (t.to_string(), ((bits >> (k - 1 - j)) & 1) as u8))
                .collect()
        })
        .collect()
}
