//! Command-line front end.
//!
//! Exit codes: 0 when every check passed (or the certificate is valid), 1 on
//! a violation, audit failure or missing certificate, 2 on configuration or
//! runtime errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::auxiliary::{audit_condition_a, audit_phi, phi_grid, psi_grid, AuditReport};
use crate::contraction::{check_inclusions, falsify, verify};
use crate::error::{Error, Result};
use crate::iteration::{
    certify, check_compatible_on_sequence, check_weak_compatible_ordered, check_weakly_compatible, diagnose_cauchy,
    find_coincidence_points, jungck_iterate, IterationTrace, Terminal,
};
use crate::scenarios::{parse_override, resolve, Scenario};

/// Witnesses printed in the terminal summary.
const SUMMARY_WITNESSES: usize = 5;

#[derive(Debug, Parser)]
#[command(name = "commonfix", version, about = "Common fixed points of four self-maps: verification, iteration and certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Built-in scenario name or path to a scenario file.
    #[arg(long)]
    scenario: String,
    /// Override a scenario field by dotted key, e.g. iteration.conv_tol=1e-12.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write the machine-readable report here.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads for parallel checks.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct WithTrace {
    #[command(flatten)]
    common: Common,
    /// Write the iteration trace as CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the contractive condition over all sampled pairs.
    Verify(Common),
    /// Run the alternating iteration.
    Solve(WithTrace),
    /// Iterate, then certify the limit as a unique common fixed point.
    Certify(WithTrace),
    /// Audit ψ against Condition-A.
    AuditPsi(Common),
    /// Audit φ against the control-function requirements.
    AuditPhi(Common),
    /// Search seeded random pairs for a violation.
    Falsify(Common),
    /// Probe the compatibility notions of the pairs (A, S) and (B, T).
    ProbeCompat(Common),
    /// Locate coincidence points of (A, S) and (B, T).
    Coincidence(Common),
    /// Check the range inclusions T(K) ⊂ A(K) and S(K) ⊂ B(K).
    Inclusions(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Solve(_) => "solve",
            Command::Certify(_) => "certify",
            Command::AuditPsi(_) => "audit-psi",
            Command::AuditPhi(_) => "audit-phi",
            Command::Falsify(_) => "falsify",
            Command::ProbeCompat(_) => "probe-compat",
            Command::Coincidence(_) => "coincidence",
            Command::Inclusions(_) => "inclusions",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Solve(w) | Command::Certify(w) => &w.common,
            Command::Verify(c)
            | Command::AuditPsi(c)
            | Command::AuditPhi(c)
            | Command::Falsify(c)
            | Command::ProbeCompat(c)
            | Command::Coincidence(c)
            | Command::Inclusions(c) => c,
        }
    }

    fn trace_path(&self) -> Option<&PathBuf> {
        match self {
            Command::Solve(w) | Command::Certify(w) => w.trace.as_ref(),
            _ => None,
        }
    }
}

/// What a command produced.
struct Outcome {
    passed: bool,
    summary: Vec<String>,
    result: Value,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports always serialize")
}

fn status(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Parse arguments, run one command and return its exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(passed) => i32::from(!passed),
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(command: &Command) -> Result<bool> {
    let common = command.common();
    let overrides = common
        .overrides
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<_>>>()?;
    let scenario = resolve(&common.scenario, &overrides)?;
    let workers = match common.workers {
        Some(0) => return Err(Error::Config("--workers must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };

    let outcome = match command {
        Command::Verify(_) => cmd_verify(&scenario, workers)?,
        Command::Solve(_) => cmd_solve(&scenario, command.trace_path())?,
        Command::Certify(_) => cmd_certify(&scenario, command.trace_path())?,
        Command::AuditPsi(_) => cmd_audit_psi(&scenario)?,
        Command::AuditPhi(_) => cmd_audit_phi(&scenario)?,
        Command::Falsify(_) => cmd_falsify(&scenario, workers)?,
        Command::ProbeCompat(_) => cmd_probe_compat(&scenario)?,
        Command::Coincidence(_) => cmd_coincidence(&scenario)?,
        Command::Inclusions(_) => cmd_inclusions(&scenario)?,
    };

    // A closed stdout (e.g. piped into `head`) must not abort the run.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{} [{}]: {}", command.name(), scenario.name, status(outcome.passed));
    for line in &outcome.summary {
        let _ = writeln!(out, "  {line}");
    }
    drop(out);
    if let Some(path) = &common.output {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let report = json!({
            "command": command.name(),
            "scenario": scenario.name,
            "overrides": common.overrides,
            "passed": outcome.passed,
            "result": outcome.result,
            "timestamp": timestamp,
        });
        let text = serde_json::to_string_pretty(&report).expect("reports always serialize");
        std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(outcome.passed)
}

fn cmd_verify(s: &Scenario, workers: usize) -> Result<Outcome> {
    let r = verify(&s.form, &s.maps, &s.samples()?, s.checks.cond_tol, workers)?;
    let mut summary = vec![
        format!("form: {} {}", r.form, r.params),
        format!("pairs_checked: {}", r.pairs_checked),
        format!("worst_slack: {:e}", r.worst_slack),
    ];
    if let Some((x, y)) = &r.worst_pair {
        summary.push(format!("worst_pair: x = {x}, y = {y}"));
    }
    summary.push(format!("violations: {}", r.violation_count));
    for v in r.violations.iter().take(SUMMARY_WITNESSES) {
        summary.push(format!(
            "violation: x = {}, y = {}, lhs = {}, rhs = {}, slack = {:e}",
            v.x, v.y, v.lhs, v.rhs, v.slack
        ));
    }
    Ok(Outcome {
        passed: r.verdict.passed(),
        summary,
        result: to_value(&r),
    })
}

fn terminal_line(trace: &IterationTrace) -> String {
    match &trace.terminal {
        Terminal::Converged { z } => format!("converged to z = {z} after {} steps", trace.steps.len()),
        Terminal::MaxIterReached => format!("max_iter reached after {} steps", trace.steps.len()),
        Terminal::PreimageFailure { step, target } => {
            let map = if step % 2 == 0 { "A" } else { "B" };
            format!("preimage failure at step {step}: {target} has no preimage under {map}")
        }
    }
}

fn write_trace(trace: &IterationTrace, path: Option<&PathBuf>) -> Result<()> {
    if let Some(path) = path {
        std::fs::write(path, trace.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_solve(s: &Scenario, trace_path: Option<&PathBuf>) -> Result<Outcome> {
    let trace = jungck_iterate(&s.maps, &s.iteration)?;
    write_trace(&trace, trace_path)?;
    let mut summary = vec![terminal_line(&trace)];
    let cauchy = if trace.steps.len() >= 2 {
        let c = diagnose_cauchy(
            &trace,
            &s.form.psi(),
            &s.phi,
            s.checks.cond_tol,
            s.checks.mono_tol,
            s.iteration.conv_tol,
        )?;
        summary.push(format!(
            "cauchy diagnostics: {} ({} inequality, {} monotonicity failures)",
            status(c.passed),
            c.inequality_failures.len(),
            c.monotone_failures.len()
        ));
        Some(c)
    } else {
        None
    };
    if let Some(last) = trace.steps.last() {
        summary.push(format!("final alpha: {:e}", last.alpha));
    }
    Ok(Outcome {
        passed: trace.converged().is_some(),
        summary,
        result: json!({ "trace": trace, "cauchy": cauchy }),
    })
}

fn cmd_certify(s: &Scenario, trace_path: Option<&PathBuf>) -> Result<Outcome> {
    let trace = jungck_iterate(&s.maps, &s.iteration)?;
    write_trace(&trace, trace_path)?;
    let mut summary = vec![terminal_line(&trace)];
    let cert = match certify(&s.maps, &trace, &s.probes, &s.iteration) {
        Ok(c) => c,
        Err(Error::NotConverged) => {
            summary.push("uncertified: the iteration did not converge".into());
            return Ok(Outcome {
                passed: false,
                summary,
                result: json!({ "trace": trace, "certificate": null }),
            });
        }
        Err(e) => return Err(e),
    };
    summary.push(format!("max residual: {:e}", cert.max_residual));
    for p in &cert.uniqueness_probe {
        let limit = p.limit.as_ref().map_or("none".to_string(), ToString::to_string);
        let dist = p.distance_to_z.map_or("n/a".to_string(), |d| format!("{d:e}"));
        summary.push(format!("probe from {}: limit {limit}, distance to z {dist}", p.start));
    }
    summary.push(format!("certified: {}", cert.certified));
    Ok(Outcome {
        passed: cert.certified,
        summary,
        result: json!({ "trace": trace, "certificate": cert }),
    })
}

fn audit_outcome(r: AuditReport) -> Outcome {
    let summary = r
        .checks
        .iter()
        .map(|c| {
            let mut line = format!("{}: {}", c.name, status(c.passed));
            if !c.passed {
                line.push_str(&format!(" ({} violations; {})", c.violations, c.detail));
            }
            line
        })
        .collect();
    Outcome {
        passed: r.passed,
        summary,
        result: to_value(&r),
    }
}

fn cmd_audit_psi(s: &Scenario) -> Result<Outcome> {
    let grid = psi_grid(s.audit_t_max(), s.checks.audit_grid)?;
    Ok(audit_outcome(audit_condition_a(&s.psi, &grid, s.checks.audit_tol)))
}

fn cmd_audit_phi(s: &Scenario) -> Result<Outcome> {
    let grid = phi_grid(s.audit_t_max(), s.checks.audit_grid)?;
    Ok(audit_outcome(audit_phi(&s.phi, &grid, s.checks.audit_tol)))
}

fn cmd_falsify(s: &Scenario, workers: usize) -> Result<Outcome> {
    let c = &s.checks;
    let hit = falsify(&s.form, &s.maps, c.falsify_budget, c.falsify_seed, c.cond_tol, workers)?;
    let summary = match &hit {
        Some(h) => vec![format!(
            "violation at draw {}: x = {}, y = {}, lhs = {}, rhs = {}, slack = {:e}",
            h.draw, h.x, h.y, h.lhs, h.rhs, h.slack
        )],
        None => vec![format!(
            "no violation in {} draws (seed {}); not a proof",
            c.falsify_budget, c.falsify_seed
        )],
    };
    Ok(Outcome {
        passed: hit.is_none(),
        summary,
        result: json!({
            "budget": c.falsify_budget,
            "seed": c.falsify_seed,
            "cond_tol": c.cond_tol,
            "violation": hit,
        }),
    })
}

fn cmd_coincidence(s: &Scenario) -> Result<Outcome> {
    let samples = s.coincidence_samples()?;
    let mut summary = Vec::new();
    let mut reports = Vec::new();
    for (f, g) in s.coincidence_pairs() {
        let r = find_coincidence_points(f, g, &samples, s.iteration.eq_tol, s.metric())?;
        let pts: Vec<String> = r.points.iter().map(|c| c.point.to_string()).collect();
        let mut line = format!("{}: {{{}}}", r.pair, pts.join(", "));
        if r.maps_coincide {
            line.push_str(" (maps coincide on every sample; truncated)");
        }
        if !r.refinement_failures.is_empty() {
            line.push_str(&format!(" [{} refinement failures]", r.refinement_failures.len()));
        }
        summary.push(line);
        reports.push(r);
    }
    Ok(Outcome {
        passed: true,
        summary,
        result: to_value(&reports),
    })
}

fn cmd_probe_compat(s: &Scenario) -> Result<Outcome> {
    let samples = s.coincidence_samples()?;
    let metric = s.metric();
    let c = &s.checks.compat;
    let mut passed = true;
    let mut summary = Vec::new();
    let mut pairs = Vec::new();
    for (f, g) in s.coincidence_pairs() {
        let coin = find_coincidence_points(f, g, &samples, s.iteration.eq_tol, metric)?;
        let weak = check_weakly_compatible(f, g, &coin.points, c.tol, metric)?;
        passed &= weak.passed;
        summary.push(format!(
            "{} weakly compatible: {}{} (max commutator distance {:e} over {} coincidence points)",
            weak.pair,
            status(weak.passed),
            if weak.vacuous { ", vacuous" } else { "" },
            weak.max_distance,
            weak.entries.len()
        ));
        let (seq, ordered) = match &s.witness {
            Some(w) => {
                let seq = check_compatible_on_sequence(f, g, w, c.horizon, c.tol, metric)?;
                let ordered = check_weak_compatible_ordered(f, g, w, c.horizon, c.tol, metric)?;
                passed &= seq.verdict.consistent() && ordered.verdict.consistent();
                summary.push(format!(
                    "{} compatible along x_n = {} at n = {}: {:?} (premise gap {:e}, tail distance {})",
                    seq.pair, seq.witness, seq.horizon, seq.verdict, seq.premise_gap, seq.tail_distance
                ));
                summary.push(format!(
                    "{} weak compatible (ordered) along the same witness: {:?} (conclusion distance {})",
                    ordered.ordered_pair, ordered.verdict, ordered.conclusion_distance
                ));
                (Some(seq), Some(ordered))
            }
            None => {
                summary.push("no witness sequence configured; sequence probes skipped".into());
                (None, None)
            }
        };
        pairs.push(json!({
            "coincidences": coin,
            "weakly_compatible": weak,
            "compatible_on_sequence": seq,
            "weak_compatible_ordered": ordered,
        }));
    }
    Ok(Outcome {
        passed,
        summary,
        result: Value::Array(pairs),
    })
}

fn cmd_inclusions(s: &Scenario) -> Result<Outcome> {
    let r = check_inclusions(
        &s.maps,
        &s.samples()?,
        s.iteration.preimage_tol,
        s.iteration.preimage_resolution,
    )?;
    let mut summary = Vec::new();
    for side in [&r.t_in_a, &r.s_in_b] {
        summary.push(format!(
            "{}: {} ({} of {} sampled images without preimage)",
            side.inclusion,
            status(side.passed),
            side.failure_count,
            r.checked
        ));
        for f in side.failures.iter().take(SUMMARY_WITNESSES) {
            summary.push(format!("  x = {}: target {} unreachable", f.x, f.target));
        }
    }
    Ok(Outcome {
        passed: r.passed,
        summary,
        result: to_value(&r),
    })
}
