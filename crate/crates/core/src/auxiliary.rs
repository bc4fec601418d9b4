//! Auxiliary functions of two variables (ψ) and control functions (φ).
//!
//! A ψ must be continuous, non-decreasing in each argument, vanish at the
//! origin, and satisfy `ψ(t, 0) = 0 ⟹ t = 0`. A φ must be continuous,
//! non-decreasing and satisfy `0 < φ(t) < t` for `t > 0`. Neither property is
//! decidable from samples; the audits here look for counterexamples on a
//! grid.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::metric::{linspace, Point, SampleSet};

/// Two-variable auxiliary function ψ.
#[derive(Debug, Clone, PartialEq)]
pub enum Psi {
    /// `s^p + t^q`, `p, q > 0`
    PowerSum { p: f64, q: f64 },
    /// `s^p · t^q + t^r`, `p > 0`, `q ≥ 0`, `r > 0`
    ProductPower { p: f64, q: f64, r: f64 },
    /// `max{s^p, t^q}`, `p, q > 0`
    MaxPower { p: f64, q: f64 },
    /// `(s^p + r · t^q)^λ`, `p, λ > 0`, `q, r ≥ 0`
    ScaledPower { p: f64, q: f64, r: f64, lambda: f64 },
    /// Expression in `s` and `t`.
    Custom(Expr),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")))
    }
}

impl Psi {
    pub fn power_sum(p: f64, q: f64) -> Result<Psi> {
        positive("p", p)?;
        positive("q", q)?;
        Ok(Psi::PowerSum { p, q })
    }

    pub fn product_power(p: f64, q: f64, r: f64) -> Result<Psi> {
        positive("p", p)?;
        nonnegative("q", q)?;
        positive("r", r)?;
        Ok(Psi::ProductPower { p, q, r })
    }

    pub fn max_power(p: f64, q: f64) -> Result<Psi> {
        positive("p", p)?;
        positive("q", q)?;
        Ok(Psi::MaxPower { p, q })
    }

    pub fn scaled_power(p: f64, q: f64, r: f64, lambda: f64) -> Result<Psi> {
        positive("p", p)?;
        nonnegative("q", q)?;
        nonnegative("r", r)?;
        positive("lambda", lambda)?;
        Ok(Psi::ScaledPower { p, q, r, lambda })
    }

    /// Custom ψ from an expression in `s` and `t`.
    pub fn custom(text: &str) -> Result<Psi> {
        let e = Expr::parse(text)?;
        e.check_scope(|v| matches!(v, Var::S | Var::T))?;
        Ok(Psi::Custom(e))
    }

    /// Re-check the parameter constraints (used after deserialization).
    pub fn validate(&self) -> Result<()> {
        match *self {
            Psi::PowerSum { p, q } => Psi::power_sum(p, q).map(drop),
            Psi::ProductPower { p, q, r } => Psi::product_power(p, q, r).map(drop),
            Psi::MaxPower { p, q } => Psi::max_power(p, q).map(drop),
            Psi::ScaledPower { p, q, r, lambda } => Psi::scaled_power(p, q, r, lambda).map(drop),
            Psi::Custom(ref e) => e.check_scope(|v| matches!(v, Var::S | Var::T)),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Psi::PowerSum { .. } => "power_sum",
            Psi::ProductPower { .. } => "product_power",
            Psi::MaxPower { .. } => "max_power",
            Psi::ScaledPower { .. } => "scaled_power",
            Psi::Custom(_) => "custom",
        }
    }

    /// `ψ(s, t)`. Both arguments must be nonnegative.
    ///
    /// Powers follow `0^0 = 1`, so `scaled_power` with `q = 0` reads
    /// `r · t^0 = r` even at `t = 0`.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        if s < 0.0 || s.is_nan() {
            return Err(Error::NegativeArgument(s));
        }
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeArgument(t));
        }
        let v = match *self {
            Psi::PowerSum { p, q } => s.powf(p) + t.powf(q),
            Psi::ProductPower { p, q, r } => s.powf(p) * t.powf(q) + t.powf(r),
            Psi::MaxPower { p, q } => s.powf(p).max(t.powf(q)),
            Psi::ScaledPower { p, q, r, lambda } => (s.powf(p) + r * t.powf(q)).powf(lambda),
            Psi::Custom(ref e) => e.eval_st(s, t)?,
        };
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Eval(format!("ψ({s}, {t}) = {v} is not a nonnegative real")));
        }
        Ok(v)
    }
}

impl fmt::Display for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::PowerSum { p, q } => write!(f, "power_sum(p={p}, q={q})"),
            Psi::ProductPower { p, q, r } => write!(f, "product_power(p={p}, q={q}, r={r})"),
            Psi::MaxPower { p, q } => write!(f, "max_power(p={p}, q={q})"),
            Psi::ScaledPower { p, q, r, lambda } => {
                write!(f, "scaled_power(p={p}, q={q}, r={r}, lambda={lambda})")
            }
            Psi::Custom(e) => write!(f, "custom({e})"),
        }
    }
}

/// Control function φ.
#[derive(Debug, Clone, PartialEq)]
pub enum Phi {
    /// `r · t`, `0 ≤ r < 1`
    Linear { r: f64 },
    /// Expression in `t`.
    Custom(Expr),
}

impl Phi {
    pub fn linear(r: f64) -> Result<Phi> {
        if !(r.is_finite() && (0.0..1.0).contains(&r)) {
            return Err(Error::InvalidParameter(format!(
                "r must be < 1 and >= 0 for a linear control function, got {r}"
            )));
        }
        Ok(Phi::Linear { r })
    }

    pub fn custom(text: &str) -> Result<Phi> {
        let e = Expr::parse(text)?;
        e.check_scope(|v| v == Var::T)?;
        Ok(Phi::Custom(e))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Phi::Linear { r } => Phi::linear(r).map(drop),
            Phi::Custom(ref e) => e.check_scope(|v| v == Var::T),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeArgument(t));
        }
        let v = match self {
            Phi::Linear { r } => r * t,
            Phi::Custom(e) => e.eval_t(t)?,
        };
        if !v.is_finite() {
            return Err(Error::Eval(format!("φ({t}) = {v} is not finite")));
        }
        Ok(v)
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::Linear { r } => write!(f, "linear(r={r})"),
            Phi::Custom(e) => write!(f, "custom({e})"),
        }
    }
}

/// Outcome of one audited property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Number of sampled inputs violating the property.
    pub violations: usize,
    /// Worst offending input, when the check failed.
    pub witness: Option<Vec<f64>>,
    pub detail: String,
}

impl Check {
    fn new(name: &str) -> Self {
        Check {
            name: name.to_string(),
            passed: true,
            violations: 0,
            witness: None,
            detail: String::new(),
        }
    }

    /// Record a violation; the witness with the largest `severity` wins,
    /// ties broken by the lexicographically smallest input.
    fn fail(&mut self, input: &[f64], severity: f64, worst: &mut f64, detail: impl FnOnce() -> String) {
        self.passed = false;
        self.violations += 1;
        let better = match &self.witness {
            None => true,
            Some(w) => {
                severity > *worst
                    || (severity == *worst
                        && Point::new(input.to_vec())
                            .ok()
                            .zip(Point::new(w.clone()).ok())
                            .is_some_and(|(a, b)| a.lex_cmp(&b).is_lt()))
            }
        };
        if better {
            *worst = severity;
            self.witness = Some(input.to_vec());
            self.detail = detail();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub subject: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl AuditReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn finish(subject: String, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        AuditReport {
            subject,
            checks,
            passed,
        }
    }
}

/// Halving increments for the continuity proxy: 0.1, 0.05, … down to the
/// first value ≤ 1e-6.
fn increments() -> Vec<f64> {
    let mut hs = vec![0.1];
    while *hs.last().unwrap() > 1e-6 {
        let h = hs.last().unwrap() * 0.5;
        hs.push(h);
    }
    hs
}

/// Continuity proxy along one argument.
///
/// Passes when the change over the last increment is below
/// `1e-6 · (1 + |f|)`, or when the tail of the change sequence is still
/// contracting (`c_last ≤ c_{last-8} / 2`), which accepts Hölder-continuous
/// functions such as `t^0.5` at the origin. A jump keeps the change pinned at
/// the jump size and fails both tests.
fn continuity_ok<F: Fn(f64) -> Result<f64>>(f: F, base: f64) -> std::result::Result<(), String> {
    let f0 = f(0.0).map_err(|e| e.to_string())?;
    let hs = increments();
    let changes: Vec<f64> = hs
        .iter()
        .map(|&h| f(h).map(|v| (v - f0).abs()))
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    let last = *changes.last().unwrap();
    if last < 1e-6 * (1.0 + f0.abs()) {
        return Ok(());
    }
    let earlier = changes[changes.len() - 9];
    if last <= 0.5 * earlier {
        return Ok(());
    }
    Err(format!(
        "change {last:e} at increment {:e} from {base} does not shrink",
        hs.last().unwrap()
    ))
}

/// Audit ψ against Condition-A on a sample of `[0, T_max]²`.
///
/// Checks: `monotone` (non-decreasing over all componentwise-ordered sample
/// pairs), `continuity` (halving-increment proxy in each argument),
/// `zero_at_origin` (`ψ(0,0) ≤ tol`), `positive_on_axis` (`ψ(t,0) > tol` for
/// every sampled coordinate `t > 0`) and `zero_forces_s` (`ψ(s,t) ≤ tol ⟹
/// s ≤ tol`).
pub fn audit_condition_a(psi: &Psi, grid: &SampleSet, tol: f64) -> AuditReport {
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .filter(|p| p.dim() == 2)
        .map(|p| (p.coords()[0], p.coords()[1]))
        .collect();
    let mut eval_failure = Check::new("evaluable");
    let mut worst = 0.0;
    let vals: Vec<Option<f64>> = pts
        .iter()
        .map(|&(s, t)| match psi.eval(s, t) {
            Ok(v) => Some(v),
            Err(e) => {
                eval_failure.fail(&[s, t], 0.0, &mut worst, || e.to_string());
                None
            }
        })
        .collect();

    let mut monotone = Check::new("monotone");
    let mut worst = 0.0;
    for (i, &(s1, t1)) in pts.iter().enumerate() {
        let Some(v1) = vals[i] else { continue };
        for (j, &(s2, t2)) in pts.iter().enumerate() {
            if i == j || s1 > s2 || t1 > t2 {
                continue;
            }
            let Some(v2) = vals[j] else { continue };
            let drop = v1 - v2;
            if drop > tol {
                monotone.fail(&[s1, t1, s2, t2], drop, &mut worst, || {
                    format!("ψ({s1}, {t1}) = {v1} > ψ({s2}, {t2}) = {v2}")
                });
            }
        }
    }

    let mut continuity = Check::new("continuity");
    let mut worst = 0.0;
    for &(s, t) in &pts {
        let along_s = continuity_ok(|h| psi.eval(s + h, t), s);
        let along_t = continuity_ok(|h| psi.eval(s, t + h), t);
        for r in [along_s, along_t] {
            if let Err(msg) = r {
                continuity.fail(&[s, t], 1.0, &mut worst, || msg);
            }
        }
    }

    let mut origin = Check::new("zero_at_origin");
    let mut worst = 0.0;
    match psi.eval(0.0, 0.0) {
        Ok(v) if v <= tol => {}
        Ok(v) => origin.fail(&[0.0, 0.0], v, &mut worst, || format!("ψ(0, 0) = {v}")),
        Err(e) => origin.fail(&[0.0, 0.0], f64::INFINITY, &mut worst, || e.to_string()),
    }

    let mut axis = Check::new("positive_on_axis");
    let mut worst = 0.0;
    let mut ts: Vec<f64> = pts.iter().flat_map(|&(s, t)| [s, t]).filter(|v| *v > 0.0).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    for &t in &ts {
        match psi.eval(t, 0.0) {
            Ok(v) if v > tol => {}
            Ok(v) => axis.fail(&[t, 0.0], tol - v, &mut worst, || format!("ψ({t}, 0) = {v} with {t} > 0")),
            Err(e) => axis.fail(&[t, 0.0], f64::INFINITY, &mut worst, || e.to_string()),
        }
    }

    let mut forces = Check::new("zero_forces_s");
    let mut worst = 0.0;
    for (i, &(s, t)) in pts.iter().enumerate() {
        if let Some(v) = vals[i] {
            if v <= tol && s > tol {
                forces.fail(&[s, t], s, &mut worst, || format!("ψ({s}, {t}) = {v} but s = {s}"));
            }
        }
    }

    AuditReport::finish(
        psi.to_string(),
        vec![eval_failure, monotone, continuity, origin, axis, forces],
    )
}

/// Audit φ on strictly positive sample points.
///
/// Checks: `monotone`, `continuity`, `zero_at_origin` and `strict_bounds`
/// (`0 < φ(t) < t`).
pub fn audit_phi(phi: &Phi, grid: &SampleSet, tol: f64) -> AuditReport {
    let ts: Vec<f64> = grid.iter().map(Point::x).filter(|t| *t > 0.0).collect();
    let vals: Vec<Result<f64>> = ts.iter().map(|&t| phi.eval(t)).collect();

    let mut evaluable = Check::new("evaluable");
    let mut worst = 0.0;
    for (t, v) in ts.iter().zip(&vals) {
        if let Err(e) = v {
            evaluable.fail(&[*t], 0.0, &mut worst, || e.to_string());
        }
    }

    let mut monotone = Check::new("monotone");
    let mut worst = 0.0;
    for (i, &t1) in ts.iter().enumerate() {
        let Ok(v1) = vals[i] else { continue };
        for (j, &t2) in ts.iter().enumerate() {
            if t1 > t2 || i == j {
                continue;
            }
            let Ok(v2) = vals[j] else { continue };
            if v1 - v2 > tol {
                monotone.fail(&[t1, t2], v1 - v2, &mut worst, || {
                    format!("φ({t1}) = {v1} > φ({t2}) = {v2}")
                });
            }
        }
    }

    let mut continuity = Check::new("continuity");
    let mut worst = 0.0;
    for &t in &ts {
        if let Err(msg) = continuity_ok(|h| phi.eval(t + h), t) {
            continuity.fail(&[t], 1.0, &mut worst, || msg);
        }
    }

    let mut origin = Check::new("zero_at_origin");
    let mut worst = 0.0;
    match phi.eval(0.0) {
        Ok(v) if v.abs() <= tol => {}
        Ok(v) => origin.fail(&[0.0], v.abs(), &mut worst, || format!("φ(0) = {v}")),
        Err(e) => origin.fail(&[0.0], f64::INFINITY, &mut worst, || e.to_string()),
    }

    let mut bounds = Check::new("strict_bounds");
    let mut worst = 0.0;
    for (i, &t) in ts.iter().enumerate() {
        let Ok(v) = vals[i] else { continue };
        if !(v > 0.0 && v < t) {
            let excess = if v <= 0.0 { -v } else { v - t };
            bounds.fail(&[t], excess, &mut worst, || format!("φ({t}) = {v} outside (0, {t})"));
        }
    }

    AuditReport::finish(phi.to_string(), vec![evaluable, monotone, continuity, origin, bounds])
}

/// Square grid `n × n` over `[0, t_max]²` for [`audit_condition_a`].
pub fn psi_grid(t_max: f64, n: usize) -> Result<SampleSet> {
    let domain = crate::metric::Domain::new(vec![crate::metric::Interval { lo: 0.0, hi: t_max }; 2])?;
    crate::metric::sample(&domain, crate::metric::Generator::Grid(n))
}

/// `n` evenly spaced points of `(0, t_max]` for [`audit_phi`].
pub fn phi_grid(t_max: f64, n: usize) -> Result<SampleSet> {
    if n < 1 || t_max.is_nan() || t_max <= 0.0 {
        return Err(Error::InvalidSampling(format!("phi grid needs n >= 1 and t_max > 0, got {n}, {t_max}")));
    }
    let points = linspace(0.0, t_max, n + 1)
        .into_iter()
        .skip(1)
        .map(Point::scalar)
        .collect();
    Ok(SampleSet {
        points,
        generator: crate::metric::Generator::Grid(n + 1),
    })
}
