//! `ghz-locc` command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 on a verification failure, 2 on
//! invalid flags. Reports go to standard output, either as text or, with
//! `--format machine`, as one JSON document (field reference in the README).

use std::io::Write;

use clap::{CommandFactory, Parser, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{lower_bound_demo, resource_comparison, trial_seed, TrialCase};
use crate::error::Result;
use crate::gates::MAX_BLOCK_QUBITS;
use crate::locc::{random_interleaving, transcript, PartyId, ResourceTally};
use crate::protocols::{
    ghz_protocol_with, two_bell_baseline_with, verify_report, Corrections, Mode, ProtocolOptions,
    ProtocolReport,
};
use crate::qstate::VERIFICATION_TOL;

/// Sampled Bob/Charlie interleavings per trial under `--schedule-sweep`, on
/// top of the two serial orders.
pub const SWEEP_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    Enumerate,
    LowerBound,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Ghz,
    TwoBell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Sampled,
    Enumerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Text,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Correction {
    BobX,
    CharlieX,
    AliceZ,
}

/// Block sizes `(N, M)`: qubits in Bob's and Charlie's registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dims(pub usize, pub usize);

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    let (n, m) = s
        .split_once(',')
        .ok_or_else(|| format!("expected N,M but got {s:?}"))?;
    let parse = |x: &str| -> std::result::Result<usize, String> {
        let v: usize = x
            .trim()
            .parse()
            .map_err(|_| format!("{x:?} is not an integer"))?;
        if !(1..=MAX_BLOCK_QUBITS).contains(&v) {
            return Err(format!("block size {v} outside [1, {MAX_BLOCK_QUBITS}]"));
        }
        Ok(v)
    };
    Ok(Dims(parse(n)?, parse(m)?))
}

/// Simulate and verify the three-party GHZ protocol for two consecutive
/// controlled block operations.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "ghz-locc", version)]
pub struct RunConfig {
    /// Command given as a bare word; same as --command.
    #[arg(value_enum, value_name = "COMMAND", conflicts_with = "command")]
    #[serde(skip)]
    pub command_word: Option<Command>,

    #[arg(long, value_enum, default_value = "verify")]
    pub command: Command,

    #[arg(long, value_enum, default_value = "ghz")]
    pub protocol: Protocol,

    /// Block sizes as N,M, each in [1, 3].
    #[arg(long, value_parser = parse_dims, default_value = "1,1")]
    pub dims: Dims,

    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value = "enumerate")]
    pub mode: RunMode,

    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,

    /// Re-run every trial under all serial and several sampled Bob/Charlie
    /// interleavings and require identical outputs (GHZ protocol only).
    #[arg(long)]
    pub schedule_sweep: bool,

    /// Fault injection: drop a classical correction (repeatable).
    #[arg(long, value_enum)]
    pub skip_correction: Vec<Correction>,
}

impl RunConfig {
    fn corrections(&self) -> Corrections {
        let has = |c| self.skip_correction.contains(&c);
        Corrections {
            bob_x: !has(Correction::BobX),
            charlie_x: !has(Correction::CharlieX),
            alice_z: !has(Correction::AliceZ),
        }
    }

    fn config_echo(&self) -> Value {
        let mut skips = self.skip_correction.clone();
        skips.sort();
        skips.dedup();
        json!({
            "command": self.command,
            "protocol": self.protocol,
            "dims": [self.dims.0, self.dims.1],
            "trials": self.trials,
            "seed": self.seed,
            "mode": self.mode,
            "format": self.format,
            "schedule_sweep": self.schedule_sweep,
            "skip_correction": skips,
        })
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
                if !text.contains("Usage:") {
                    let _ = writeln!(err, "\n{}", RunConfig::command().render_usage());
                }
            }
            return code;
        }
    };
    if let Some(word) = config.command_word.take() {
        config.command = word;
    }
    if config.schedule_sweep && config.protocol != Protocol::Ghz {
        let _ = writeln!(err, "error: --schedule-sweep requires --protocol ghz");
        return 2;
    }
    match execute(&config) {
        Ok(outcome) => {
            let rendered = match config.format {
                OutputFormat::Machine => {
                    let mut s =
                        serde_json::to_string_pretty(&outcome.document).expect("report serializes");
                    s.push('\n');
                    s
                }
                OutputFormat::Text => outcome.text,
            };
            if out.write_all(rendered.as_bytes()).is_err() {
                return 1;
            }
            if outcome.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

struct Outcome {
    passed: bool,
    document: Value,
    text: String,
}

fn execute(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Verify => verify_campaign(cfg, cfg.trials),
        Command::Enumerate => verify_campaign(cfg, 1),
        Command::LowerBound => lower_bound(cfg),
        Command::Compare => compare(cfg),
    }
}

fn run_protocol(
    cfg: &RunConfig,
    case: &TrialCase,
    opts: &ProtocolOptions,
) -> Result<ProtocolReport> {
    let mode = match (cfg.command, cfg.mode) {
        (Command::Enumerate, _) | (_, RunMode::Enumerate) => Mode::Enumerate,
        (_, RunMode::Sampled) => Mode::Sampled { seed: case.seed },
    };
    match cfg.protocol {
        Protocol::Ghz => ghz_protocol_with(&case.u, &case.v, &case.initial, mode, opts),
        Protocol::TwoBell => two_bell_baseline_with(&case.u, &case.v, &case.initial, mode, opts),
    }
}

#[derive(Serialize)]
struct BranchRow {
    outcomes: std::collections::BTreeMap<String, u8>,
    probability: f64,
    exact_distance: f64,
    fidelity: f64,
}

#[derive(Serialize)]
struct SweepSummary {
    schedules: usize,
    max_distance: f64,
    passed: bool,
}

/// Runs the GHZ protocol under both serial partner orders plus sampled
/// interleavings and returns the largest branch-wise deviation from the
/// reference report.
fn schedule_sweep(
    cfg: &RunConfig,
    case: &TrialCase,
    reference: &ProtocolReport,
) -> Result<SweepSummary> {
    let corr = cfg.corrections();
    let bob = 5 + usize::from(corr.bob_x);
    let charlie = 5 + usize::from(corr.charlie_x);
    let mut orders = vec![
        [vec![PartyId::Bob; bob], vec![PartyId::Charlie; charlie]].concat(),
        [vec![PartyId::Charlie; charlie], vec![PartyId::Bob; bob]].concat(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(case.seed, 3));
    for _ in 0..SWEEP_SAMPLES {
        orders.push(random_interleaving(
            &[(PartyId::Bob, bob), (PartyId::Charlie, charlie)],
            &mut rng,
        ));
    }
    let mut max_distance: f64 = 0.0;
    for order in &orders {
        let opts = ProtocolOptions {
            corrections: corr,
            partner_order: Some(order.clone()),
            ..ProtocolOptions::default()
        };
        let report = run_protocol(cfg, case, &opts)?;
        for (x, y) in report.branches.iter().zip(&reference.branches) {
            max_distance = max_distance.max(x.final_state.distance(&y.final_state)?.0);
        }
    }
    Ok(SweepSummary {
        schedules: orders.len(),
        max_distance,
        passed: max_distance < VERIFICATION_TOL,
    })
}

fn verify_campaign(cfg: &RunConfig, trials: u64) -> Result<Outcome> {
    let opts = ProtocolOptions {
        corrections: cfg.corrections(),
        ..ProtocolOptions::default()
    };
    let mut text = String::new();
    let mut trial_docs = Vec::new();
    let mut tally: Option<ResourceTally> = None;
    let mut failure: Option<Value> = None;
    let mut worst_overall: f64 = 0.0;

    for trial in 0..trials {
        let case = TrialCase::generate(cfg.dims.0, cfg.dims.1, trial_seed(cfg.seed, trial))?;
        let report = run_protocol(cfg, &case, &opts)?;
        let verdict = verify_report(&report, VERIFICATION_TOL);
        tally.get_or_insert(report.tally);
        worst_overall = worst_overall.max(verdict.worst_distance);

        let sweep = if cfg.schedule_sweep {
            Some(schedule_sweep(cfg, &case, &report)?)
        } else {
            None
        };
        let passed = verdict.passed && sweep.as_ref().is_none_or(|s| s.passed);

        let branches: Vec<BranchRow> = report
            .branches
            .iter()
            .map(|b| BranchRow {
                outcomes: b.outcomes.clone(),
                probability: b.probability,
                exact_distance: b.exact_distance,
                fidelity: b.fidelity,
            })
            .collect();

        if cfg.command == Command::Enumerate {
            text.push_str(&format!(
                "{:<24} {:>12} {:>14} {:>18}\n",
                "branch", "probability", "exact dist", "fidelity"
            ));
            for b in &report.branches {
                text.push_str(&format!(
                    "{:<24} {:>12.9} {:>14.3e} {:>18.15}\n",
                    b.key(),
                    b.probability,
                    b.exact_distance,
                    b.fidelity
                ));
            }
        }
        text.push_str(&format!(
            "trial {trial:>4} seed {:>20}  worst distance {:.3e}  {}{}\n",
            case.seed,
            verdict.worst_distance,
            if verdict.passed { "ok" } else { "FAIL" },
            sweep
                .as_ref()
                .map(|s| format!(
                    "  sweep {} schedules max diff {:.3e} {}",
                    s.schedules,
                    s.max_distance,
                    if s.passed { "ok" } else { "FAIL" }
                ))
                .unwrap_or_default()
        ));

        trial_docs.push(json!({
            "trial": trial,
            "seed": case.seed,
            "passed": passed,
            "worst_distance": verdict.worst_distance,
            "min_fidelity": report.min_fidelity,
            "probability_sum": verdict.probability_sum,
            "branches": branches,
            "schedule_sweep": sweep,
        }));

        if !passed && failure.is_none() {
            let idx = verdict.worst_branch.unwrap_or(0);
            let branch = report.branches.get(idx);
            let reason = verdict
                .reason
                .clone()
                .unwrap_or_else(|| "schedule sweep produced differing outputs".into());
            let events = report.transcripts.get(idx).cloned().unwrap_or_default();
            text.push_str(&format!(
                "FAILURE trial {trial} seed {} branch [{}]: {reason}\ntranscript:\n{}",
                case.seed,
                branch.map(|b| b.key()).unwrap_or_default(),
                transcript::to_lines(&events)
            ));
            failure = Some(json!({
                "trial": trial,
                "seed": case.seed,
                "branch": branch.map(|b| b.outcomes.clone()),
                "reason": reason,
                "transcript": events,
            }));
        }
    }

    let passed = failure.is_none();
    let tally = tally.unwrap_or_default();
    text.push_str(&format!(
        "{} trials, worst distance {:.3e}, tally ghz={} bell={} cbits={} raw={}: {}\n",
        trials,
        worst_overall,
        tally.ghz_consumed,
        tally.bell_consumed,
        tally.cbits,
        tally.raw_directed_messages,
        if passed { "PASS" } else { "FAIL" }
    ));
    let document = json!({
        "tool": "ghz-locc",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.config_echo(),
        "tolerance": VERIFICATION_TOL,
        "passed": passed,
        "worst_distance": worst_overall,
        "tally": tally,
        "trials": trial_docs,
        "failure": failure,
    });
    Ok(Outcome {
        passed,
        document,
        text,
    })
}

fn lower_bound(cfg: &RunConfig) -> Result<Outcome> {
    let r = lower_bound_demo()?;
    let passed = r.saturated && r.max_exact_distance < VERIFICATION_TOL;
    let mut text = String::from("two CNOTs on |+00> via one GHZ state\n");
    text.push_str(&format!(
        "output vs GHZ: max distance {:.3e}, min fidelity {:.15}\n",
        r.max_exact_distance, r.min_fidelity
    ));
    for (cut, e) in &r.output_entropy_min {
        text.push_str(&format!("output entropy {cut}: {e:.12} ebit\n"));
    }
    text.push_str(&format!(
        "consumed GHZ entropy A1|B1C1: {:.12} ebit\n",
        r.resource_entropy
    ));
    text.push_str(&format!(
        "two Bell pairs entropy across Alice cut: {:.12} ebit\n",
        r.two_bell_resource_entropy
    ));
    text.push_str(&format!(
        "output entanglement equals consumed entanglement: {}\n",
        if passed { "PASS" } else { "FAIL" }
    ));
    let document = json!({
        "tool": "ghz-locc",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.config_echo(),
        "tolerance": VERIFICATION_TOL,
        "passed": passed,
        "lower_bound": r,
    });
    Ok(Outcome {
        passed,
        document,
        text,
    })
}

fn compare(cfg: &RunConfig) -> Result<Outcome> {
    let r = resource_comparison(cfg.dims.0, cfg.dims.1, cfg.trials, cfg.seed)?;
    let passed = r.trials.iter().all(|t| {
        t.ghz_worst_distance < VERIFICATION_TOL && t.two_bell_worst_distance < VERIFICATION_TOL
    });
    let mut text = format!(
        "resource comparison, dims {},{}, {} verified trials\n",
        r.dims.0,
        r.dims.1,
        r.trials.len()
    );
    text.push_str(&format!(
        "{:<24} {:>4} {:>5} {:>8} {:>6}  {}\n",
        "scheme", "ghz", "bell", "ebits", "cbits", "source"
    ));
    for row in &r.rows {
        let name = serde_json::to_value(row.scheme).expect("scheme serializes");
        text.push_str(&format!(
            "{:<24} {:>4} {:>5} {:>8.4} {:>6}  {}\n",
            name.as_str().unwrap_or_default(),
            row.ghz,
            row.bell,
            row.ebits_alice_vs_rest,
            row.cbits,
            if row.simulated {
                "simulated"
            } else {
                "analytic"
            }
        ));
    }
    let document = json!({
        "tool": "ghz-locc",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.config_echo(),
        "tolerance": VERIFICATION_TOL,
        "passed": passed,
        "comparison": r,
    });
    text.push_str(&format!(
        "exactness over {} trials: {}\n",
        r.trials.len(),
        if passed { "PASS" } else { "FAIL" }
    ));
    Ok(Outcome {
        passed,
        document,
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["ghz-locc"];
        argv.extend_from_slice(args);
        let code = main_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn dims_parser() {
        assert_eq!(parse_dims("2,3").unwrap(), Dims(2, 3));
        assert!(parse_dims("5,1").is_err());
        assert!(parse_dims("0,1").is_err());
        assert!(parse_dims("2").is_err());
        assert!(parse_dims("a,1").is_err());
    }

    #[test]
    fn invalid_dims_exit_2() {
        let (code, _, err) = run(&["--command", "verify", "--dims", "5,1"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"), "{err}");
    }

    #[test]
    fn zero_trials_rejected() {
        assert_eq!(run(&["--trials", "0"]).0, 2);
    }

    #[test]
    fn sweep_requires_ghz() {
        assert_eq!(run(&["--protocol", "two-bell", "--schedule-sweep"]).0, 2);
    }

    #[test]
    fn verify_small_campaign() {
        let (code, out, _) = run(&["--trials", "3", "--seed", "7"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("PASS"));
    }

    #[test]
    fn skipped_correction_exits_1_with_transcript() {
        let (code, out, _) = run(&["--trials", "2", "--skip-correction", "alice-z"]);
        assert_eq!(code, 1);
        assert!(out.contains("FAILURE trial 0"));
        assert!(out.contains("\"kind\":\"local_gate\""));
    }
}
