//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::path::Path;
use std::process::Command;

use commonfix::auxiliary::{audit_condition_a, psi_grid, Psi};
use commonfix::contraction::{check_pair, ConditionForm, MapQuadruple, PairCheck};
use commonfix::expr::Expr;
use commonfix::iteration::diagnose_cauchy;
use commonfix::iteration::jungck_iterate;
use commonfix::metric::{sample, Generator, Point};
use commonfix::piecewise::Guard;
use commonfix::scenarios::{builtin, builtin_names, MapSpec};
use commonfix::{auxiliary::Phi, contraction::verify};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_commonfix");

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Run the CLI; returns (exit code, report).
fn cli(dir: &Path, tag: &str, args: &[&str]) -> Result<(i32, Value), String> {
    let out = dir.join(format!("{tag}.json"));
    let status = Command::new(BIN)
        .args(args)
        .arg("--output")
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    let code = status.status.code().unwrap_or(-1);
    let text = std::fs::read_to_string(&out).map_err(|e| format!("{tag}: no report ({e}), exit {code}"))?;
    let report = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok((code, report))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn example_reproduction(dir: &Path) -> Outcome {
    let (code, rep) = cli(dir, "c1_coin", &["coincidence", "--scenario", "example_1_8", "--set", "checks.coincidence_grid=1201", "--set", "iteration.eq_tol=1e-6"])?;
    ensure(code == 0, format!("coincidence exit {code}"))?;
    let pts: Vec<f64> = rep["result"]
        .as_array()
        .into_iter()
        .flatten()
        .flat_map(|r| r["points"].as_array().cloned().unwrap_or_default())
        .map(|p| f(&p["point"][0]))
        .collect();
    ensure(pts.len() == 1 && (pts[0] - 1.0).abs() <= 1e-6, format!("coincidence set {pts:?}"))?;

    let (_, rep) = cli(dir, "c1_compat", &["probe-compat", "--scenario", "example_1_8"])?;
    let pair = &rep["result"][0];
    let commutator = f(&pair["weakly_compatible"]["max_distance"]);
    ensure(
        pair["weakly_compatible"]["passed"] == true && pair["weakly_compatible"]["vacuous"] == false && commutator < 1e-12,
        format!("weak compatibility: {}", pair["weakly_compatible"]),
    )?;
    let seq = &pair["compatible_on_sequence"];
    let tail = f(&seq["tail_distance"]);
    ensure(seq["horizon"] == 1_000_000, "horizon is not 10^6")?;
    ensure(seq["premise_established"] == true, "premise not established")?;
    ensure((tail - 1.0 / 32.0).abs() <= 1e-9, format!("tail {tail}"))?;
    Ok(format!("coincidences {{{}}}, commutator {commutator:e}, tail {tail}", pts[0]))
}

fn banach_end_to_end(dir: &Path) -> Outcome {
    let (code, rep) = cli(dir, "c2_verify", &["verify", "--scenario", "banach", "--set", "sampling.grid=101"])?;
    let worst = f(&rep["result"]["worst_slack"]);
    ensure(code == 0 && worst >= -1e-9, format!("verify exit {code}, worst_slack {worst}"))?;
    ensure(rep["result"]["pairs_checked"] == 101 * 101, "pair count")?;

    let (code, rep) = cli(dir, "c2_solve", &["solve", "--scenario", "banach", "--set", "iteration.x0=1"])?;
    let trace = &rep["result"]["trace"];
    let z = f(&trace["terminal"]["z"][0]);
    let steps = trace["steps"].as_array().map_or(usize::MAX, Vec::len);
    ensure(code == 0 && z.abs() < 1e-8 && steps <= 60, format!("solve exit {code}, z {z}, {steps} steps"))?;

    let (code, rep) = cli(dir, "c2_cert", &["certify", "--scenario", "banach", "--set", "iteration.probes=[1, 0.7, 0.31]"])?;
    let cert = &rep["result"]["certificate"];
    let residual = f(&cert["max_residual"]);
    let limits: Vec<f64> = cert["uniqueness_probe"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|p| f(&p["limit"][0]))
        .collect();
    let spread = limits.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - limits.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(code == 0 && limits.len() == 3, format!("certify exit {code}, {} limits", limits.len()))?;
    ensure(spread <= 1e-6 && residual < 1e-8, format!("spread {spread}, residual {residual}"))?;
    Ok(format!("worst_slack {worst:e}, z {z:e} after {steps} steps, limit spread {spread:e}, residual {residual:e}"))
}

fn cauchy_diagnostics(_: &Path) -> Outcome {
    let mut checked = Vec::new();
    for name in builtin_names() {
        let s = builtin(name).map_err(|e| e.to_string())?;
        let r = verify(&s.form, &s.maps, &s.samples().map_err(|e| e.to_string())?, s.checks.cond_tol, 2)
            .map_err(|e| e.to_string())?;
        if !r.verdict.passed() {
            continue;
        }
        let trace = jungck_iterate(&s.maps, &s.iteration).map_err(|e| e.to_string())?;
        let d = diagnose_cauchy(&trace, &s.form.psi(), &s.phi, 1e-9, 1e-12, s.iteration.conv_tol)
            .map_err(|e| format!("{name}: {e}"))?;
        ensure(
            d.passed,
            format!(
                "{name}: inequality failures {:?}, monotone failures {:?}",
                d.inequality_failures, d.monotone_failures
            ),
        )?;
        checked.push(format!("{name} ({} steps)", trace.steps.len()));
    }
    ensure(checked.len() >= 2, "fewer than two passing scenarios")?;
    Ok(checked.join(", "))
}

fn condition_a_audits(_: &Path) -> Outcome {
    let grid = psi_grid(1.0, 50).map_err(|e| e.to_string())?;
    let tol = 1e-9;
    let mut failed = Vec::new();
    let mut passing = 0;
    for &(p, q, r, l) in &[(1.0, 1.0, 1.0, 1.0), (2.0, 1.0, 1.0, 1.0), (1.0, 2.0, 0.5, 2.0)] {
        let members = [
            Psi::power_sum(p, q),
            Psi::product_power(p, q, r),
            Psi::max_power(p, q),
            Psi::scaled_power(p, q, r, l),
        ];
        for psi in members {
            let psi = psi.map_err(|e| e.to_string())?;
            let rep = audit_condition_a(&psi, &grid, tol);
            if rep.passed {
                passing += 1;
                // ψ(s,t) = 0 must force s = 0
                for pt in grid.iter() {
                    let (s, t) = (pt.coords()[0], pt.coords()[1]);
                    let v = psi.eval(s, t).map_err(|e| e.to_string())?;
                    ensure(!(v <= tol && s > tol), format!("{psi}: ψ({s},{t}) = {v}"))?;
                }
            } else {
                let bad: Vec<&str> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                failed.push(format!("{psi} fails {}", bad.join("+")));
            }
        }
    }
    for text in ["t", "s*t"] {
        let psi = Psi::custom(text).map_err(|e| e.to_string())?;
        let rep = audit_condition_a(&psi, &grid, tol);
        ensure(
            rep.check("positive_on_axis").is_some_and(|c| !c.passed),
            format!("custom ψ = {text} passes check (d)"),
        )?;
    }
    ensure(failed.is_empty(), format!("{passing}/12 family members pass; {}", failed.join("; ")))?;
    Ok(format!("{passing}/12 family members pass; ψ = t and ψ = s·t fail (d)"))
}

fn negative_control(dir: &Path) -> Outcome {
    let (code, rep) = cli(dir, "c5_verify", &["verify", "--scenario", "identity_violation"])?;
    ensure(code == 1 && rep["passed"] == false, format!("verify exit {code}"))?;
    let mut hits = Vec::new();
    for (i, workers) in ["1", "4", "1", "3"].iter().enumerate() {
        let (code, rep) = cli(
            dir,
            &format!("c5_falsify{i}"),
            &["falsify", "--scenario", "identity_violation", "--set", "checks.falsify_budget=1000", "--set", "checks.falsify_seed=7", "--workers", workers],
        )?;
        ensure(code == 1, format!("falsify exit {code}"))?;
        hits.push(rep["result"]["violation"].clone());
    }
    ensure(!hits[0].is_null(), "no violation found")?;
    ensure(hits.iter().all(|h| *h == hits[0]), "falsify is not deterministic")?;
    Ok(format!(
        "violations {}, falsify draw {} at x = {}, y = {} across 4 runs",
        rep_count(dir)?,
        hits[0]["draw"],
        hits[0]["x"][0],
        hits[0]["y"][0]
    ))
}

fn rep_count(dir: &Path) -> Result<String, String> {
    let text = std::fs::read_to_string(dir.join("c5_verify.json")).map_err(|e| e.to_string())?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok(v["result"]["violation_count"].to_string())
}

fn pairwise_max_diff(form_a: &ConditionForm, form_b: &ConditionForm, q: &MapQuadruple) -> Result<(usize, f64), String> {
    let grid = sample(q.domain(), Generator::Grid(101)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for x in grid.iter() {
        for y in grid.iter() {
            let a: PairCheck = check_pair(form_a, q, x, y).map_err(|e| e.to_string())?;
            let b: PairCheck = check_pair(form_b, q, x, y).map_err(|e| e.to_string())?;
            worst = worst.max((a.lhs - b.lhs).abs()).max((a.rhs - b.rhs).abs());
            pairs += 1;
        }
    }
    Ok((pairs, worst))
}

fn reduction_identities(_: &Path) -> Outcome {
    let r = 0.5;
    let reduced = ConditionForm::theorem_2_5(1.0, 0.0, 0.0, 1.0, Phi::linear(r).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let corollary = ConditionForm::corollary_2_2(Psi::scaled_power(1.0, 0.0, 0.0, 1.0).unwrap(), r).map_err(|e| e.to_string())?;
    let mut details = Vec::new();
    for name in ["four_maps", "banach", "example_1_8"] {
        let q = builtin(name).map_err(|e| e.to_string())?.maps;
        let (pairs, d) = pairwise_max_diff(&reduced, &corollary, &q)?;
        ensure(d <= 1e-12, format!("theorem_2_5 vs corollary_2_2 on {name}: {d:e}"))?;
        details.push(format!("{name}: {pairs} pairs, {d:e}"));
    }
    let psi = Psi::power_sum(1.0, 1.0).unwrap();
    let phi = Phi::linear(0.9).unwrap();
    let c23 = ConditionForm::Corollary23 { psi: psi.clone(), phi: phi.clone() };
    let t21 = ConditionForm::Theorem21 { psi, phi };
    for name in ["example_1_8", "four_maps"] {
        let m = builtin(name).map_err(|e| e.to_string())?.maps;
        let q = MapQuadruple::new(m.a.clone(), m.a.clone(), m.t.clone(), m.t.clone(), m.metric).map_err(|e| e.to_string())?;
        let (pairs, d) = pairwise_max_diff(&c23, &t21, &q)?;
        ensure(d <= 1e-12, format!("corollary_2_3 vs theorem_2_1 on {name} (A,A,T,T): {d:e}"))?;
        details.push(format!("{name} (A,A,T,T): {pairs} pairs, {d:e}"));
    }
    Ok(details.join("; "))
}

fn parser_and_determinism(dir: &Path) -> Outcome {
    let mut count = 0;
    for name in builtin_names() {
        let s = builtin(name).map_err(|e| e.to_string())?;
        let m = &s.source().maps;
        for spec in [&m.a, &m.b, &m.s, &m.t] {
            let MapSpec::Branches(branches) = spec else { continue };
            for b in branches {
                for text in b.expr_texts() {
                    let once = Expr::parse(text).map_err(|e| e.to_string())?;
                    let printed = once.to_string();
                    let twice = Expr::parse(&printed).map_err(|e| e.to_string())?;
                    ensure(once == twice && twice.to_string() == printed, format!("{text} -> {printed}"))?;
                    count += 1;
                }
                if let Some(w) = &b.when {
                    let once = Guard::parse(w).map_err(|e| e.to_string())?;
                    let printed = once.to_string();
                    let twice = Guard::parse(&printed).map_err(|e| e.to_string())?;
                    ensure(once == twice && twice.to_string() == printed, format!("{w} -> {printed}"))?;
                    count += 1;
                }
            }
        }
    }

    let ex = builtin("example_1_8").map_err(|e| e.to_string())?;
    let cases = [("T", 0.25, 0.3125), ("T", 0.45, 0.375), ("T", 1.0, 1.0), ("A", 0.4, 0.35)];
    for (map, x, want) in cases {
        let got = ex.map(map).unwrap().evaluate(&Point::scalar(x)).map_err(|e| e.to_string())?.x();
        ensure((got - want).abs() <= 1e-15, format!("{map}({x}) = {got}, want {want}"))?;
    }

    for (tag, args) in [
        ("verify", vec!["verify", "--scenario", "example_1_8", "--workers", "1"]),
        ("falsify", vec!["falsify", "--scenario", "identity_violation", "--workers", "3"]),
        ("certify", vec!["certify", "--scenario", "banach"]),
    ] {
        let (_, mut first) = cli(dir, &format!("c7_{tag}_a"), &args)?;
        let (_, mut second) = cli(dir, &format!("c7_{tag}_b"), &args)?;
        first["timestamp"] = Value::Null;
        second["timestamp"] = Value::Null;
        let (a, b) = (serde_json::to_vec(&first).unwrap(), serde_json::to_vec(&second).unwrap());
        ensure(a == b, format!("{tag} reports differ"))?;
    }
    Ok(format!("{count} expressions and guards round-trip, 4 branch values exact, 3 reports byte-identical"))
}

fn inclusion_diagnostics(dir: &Path) -> Outcome {
    let (code, rep) = cli(dir, "c8_example", &["inclusions", "--scenario", "example_1_8"])?;
    let side = &rep["result"]["t_in_a"];
    let targets: Vec<f64> = side["failures"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|w| f(&w["target"][0]))
        .collect();
    let xs_ok = side["failures"]
        .as_array()
        .into_iter()
        .flatten()
        .all(|w| f(&w["x"][0]) < 0.375);
    ensure(code == 1 && !targets.is_empty(), format!("exit {code}, {} failures", targets.len()))?;
    ensure(targets.iter().all(|&t| t == 10.0 / 32.0) && xs_ok, format!("targets {targets:?}"))?;
    let (code, rep) = cli(dir, "c8_banach", &["inclusions", "--scenario", "banach"])?;
    ensure(code == 0 && rep["passed"] == true, format!("banach exit {code}"))?;
    Ok(format!("{} images 10/32 without A-preimage (all x < 3/8); banach passes", side["failure_count"]))
}

type Criterion = (&'static str, fn(&Path) -> Outcome);

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: [Criterion; 8] = [
        ("weakly compatible example pair", example_reproduction),
        ("Banach scenario end-to-end", banach_end_to_end),
        ("Cauchy diagnostics", cauchy_diagnostics),
        ("Condition-A audits", condition_a_audits),
        ("negative control", negative_control),
        ("reduction identities", reduction_identities),
        ("parser and determinism", parser_and_determinism),
        ("inclusion diagnostics", inclusion_diagnostics),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check(dir.path()) {
            Ok(detail) => println!("criterion {} ({name}): PASS ({detail})", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} ({name}): FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
