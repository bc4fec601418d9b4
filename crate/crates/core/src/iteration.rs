//! The alternating Jungck iteration, its diagnostics, coincidence points,
//! compatibility probes and fixed-point certification.
//!
//! ```text
//! y_{2n}   = T x_{2n}   = A x_{2n+1}
//! y_{2n+1} = S x_{2n+1} = B x_{2n+2}
//! α_n      = d(y_n, y_{n+1})
//! ```

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::auxiliary::{Phi, Psi};
use crate::contraction::MapQuadruple;
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::metric::{Metric, Point, SampleSet};
use crate::piecewise::{golden_min, preimage, PiecewiseMap, PreimageQuery};

/// Consecutive steps with `α_n ≤ conv_tol` needed to stop.
pub const STABLE_STEPS: usize = 3;

/// Default horizon for sequence-based compatibility probes.
pub const DEFAULT_HORIZON: u64 = 1_000_000;

/// Coincidence points kept when two maps agree on the whole sample.
pub const MAX_COINCIDENCES: usize = 100;

/// A refined coincidence is rejected when the gap a step of `eq_tol` away
/// exceeds this multiple of `eq_tol` (a jump, not a crossing).
const STABILITY_FACTOR: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationConfig {
    pub x0: Point,
    pub max_iter: usize,
    pub conv_tol: f64,
    pub eq_tol: f64,
    pub preimage_tol: f64,
    pub preimage_resolution: usize,
}

impl IterationConfig {
    pub fn new(x0: Point) -> Self {
        IterationConfig {
            x0,
            max_iter: 200,
            conv_tol: 1e-10,
            eq_tol: 1e-6,
            preimage_tol: 1e-9,
            preimage_resolution: 1001,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        for (name, v) in [
            ("conv_tol", self.conv_tol),
            ("eq_tol", self.eq_tol),
            ("preimage_tol", self.preimage_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.preimage_resolution < 2 {
            return Err(Error::Config("preimage_resolution must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub n: usize,
    pub x: Point,
    pub y: Point,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Terminal {
    Converged { z: Point },
    MaxIterReached,
    /// `target = y_step` has no preimage under A (even step) or B (odd step).
    PreimageFailure { step: usize, target: Point },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub steps: Vec<Step>,
    pub terminal: Terminal,
}

impl IterationTrace {
    pub fn converged(&self) -> Option<&Point> {
        match &self.terminal {
            Terminal::Converged { z } => Some(z),
            _ => None,
        }
    }

    /// CSV with header `n,x,y,alpha`; coordinates joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,x,y,alpha\n");
        for s in &self.steps {
            out.push_str(&format!("{},{},{},{}\n", s.n, s.x.joined(), s.y.joined(), s.alpha));
        }
        out
    }
}

fn image(q: &MapQuadruple, n: usize, x: &Point) -> Result<Point> {
    if n.is_multiple_of(2) {
        q.t.evaluate(x)
    } else {
        q.s.evaluate(x)
    }
}

fn cover(q: &MapQuadruple, n: usize) -> &PiecewiseMap {
    if n.is_multiple_of(2) {
        &q.a
    } else {
        &q.b
    }
}

/// Run the alternating iteration from `cfg.x0`.
///
/// Stops after [`STABLE_STEPS`] consecutive `α_n ≤ conv_tol` with
/// `z = y_{n+1}`, at `max_iter` steps, or when a preimage step fails.
/// Preimages are the lexicographically smallest solution, so traces are
/// deterministic.
pub fn jungck_iterate(q: &MapQuadruple, cfg: &IterationConfig) -> Result<IterationTrace> {
    cfg.validate()?;
    q.domain().check_dim(&cfg.x0)?;
    if !q.domain().contains(&cfg.x0) {
        return Err(Error::OutsideDomain {
            point: cfg.x0.to_string(),
        });
    }
    let mut steps = Vec::new();
    let mut x = cfg.x0.clone();
    let mut y = image(q, 0, &x)?;
    let mut streak = 0;
    for n in 0..cfg.max_iter {
        let query = PreimageQuery::new(cover(q, n), &y, cfg.preimage_tol, cfg.preimage_resolution)
            .with_metric(q.metric);
        let Some(x_next) = preimage(&query) else {
            return Ok(IterationTrace {
                steps,
                terminal: Terminal::PreimageFailure { step: n, target: y },
            });
        };
        let y_next = image(q, n + 1, &x_next)?;
        let alpha = q.metric.distance(&y, &y_next)?;
        steps.push(Step {
            n,
            x,
            y,
            alpha,
        });
        streak = if alpha <= cfg.conv_tol { streak + 1 } else { 0 };
        if streak == STABLE_STEPS {
            return Ok(IterationTrace {
                steps,
                terminal: Terminal::Converged { z: y_next },
            });
        }
        x = x_next;
        y = y_next;
    }
    Ok(IterationTrace {
        steps,
        terminal: Terminal::MaxIterReached,
    })
}

/// Replay a trace against the maps; returns the first inconsistent step.
///
/// Checks `y_n` against `T(x_n)` or `S(x_n)` to `1e-12`, the preimage step
/// `A(x_{n+1})` or `B(x_{n+1})` against `y_n` to `preimage_tol`, and the
/// recorded `α_n`.
pub fn replay(q: &MapQuadruple, trace: &IterationTrace, preimage_tol: f64) -> Result<Option<usize>> {
    for (i, s) in trace.steps.iter().enumerate() {
        if q.metric.distance(&image(q, s.n, &s.x)?, &s.y)? > 1e-12 {
            return Ok(Some(s.n));
        }
        if let Some(next) = trace.steps.get(i + 1) {
            if q.metric.distance(&cover(q, s.n).evaluate(&next.x)?, &s.y)? > preimage_tol {
                return Ok(Some(s.n));
            }
            if q.metric.distance(&s.y, &next.y)? != s.alpha {
                return Ok(Some(s.n));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyReport {
    pub steps_checked: usize,
    pub ineq_tol: f64,
    pub mono_tol: f64,
    /// Steps `n` where `ψ(α_{n+1}, α_{n+1}) > φ(ψ(α_n, α_n)) + ineq_tol`.
    pub inequality_failures: Vec<usize>,
    /// Steps `n` where `α_{n+1} > α_n + mono_tol`.
    pub monotone_failures: Vec<usize>,
    pub final_alpha: Option<f64>,
    /// `None` unless the trace converged.
    pub final_alpha_ok: Option<bool>,
    pub passed: bool,
}

/// Check the descent chain `ψ(α_{n+1}, α_{n+1}) ≤ φ(ψ(α_n, α_n))` and that
/// `α_n` is non-increasing along a trace.
pub fn diagnose_cauchy(
    trace: &IterationTrace,
    psi: &Psi,
    phi: &Phi,
    ineq_tol: f64,
    mono_tol: f64,
    conv_tol: f64,
) -> Result<CauchyReport> {
    if trace.steps.len() < 2 {
        return Err(Error::Config(format!(
            "Cauchy diagnostics need at least 2 steps, trace has {}",
            trace.steps.len()
        )));
    }
    let mut inequality_failures = Vec::new();
    let mut monotone_failures = Vec::new();
    for w in trace.steps.windows(2) {
        let (a0, a1) = (w[0].alpha, w[1].alpha);
        if psi.eval(a1, a1)? > phi.eval(psi.eval(a0, a0)?)? + ineq_tol {
            inequality_failures.push(w[0].n);
        }
        if a1 > a0 + mono_tol {
            monotone_failures.push(w[0].n);
        }
    }
    let final_alpha = trace.steps.last().map(|s| s.alpha);
    let final_alpha_ok = trace
        .converged()
        .map(|_| final_alpha.is_some_and(|a| a <= conv_tol));
    let passed = inequality_failures.is_empty() && monotone_failures.is_empty() && final_alpha_ok != Some(false);
    Ok(CauchyReport {
        steps_checked: trace.steps.len() - 1,
        ineq_tol,
        mono_tol,
        inequality_failures,
        monotone_failures,
        final_alpha,
        final_alpha_ok,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidencePoint {
    pub point: Point,
    /// e.g. `(A, S)`
    pub pair: String,
    pub gap: f64,
}

/// A local minimum of the gap that refined to a jump, not a crossing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementFailure {
    pub cell: (f64, f64),
    pub point: Point,
    pub gap: f64,
    /// Largest gap one `eq_tol` step away.
    pub neighbour_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceReport {
    pub pair: String,
    pub scanned: usize,
    pub eq_tol: f64,
    pub points: Vec<CoincidencePoint>,
    /// The maps agree on every sampled point; `points` is truncated.
    pub maps_coincide: bool,
    pub refinement_failures: Vec<RefinementFailure>,
}

fn pair_label(f: &PiecewiseMap, g: &PiecewiseMap) -> String {
    format!("({}, {})", f.name(), g.name())
}

fn gap_at(f: &PiecewiseMap, g: &PiecewiseMap, metric: Metric, p: &Point) -> Result<f64> {
    metric.distance(&f.evaluate(p)?, &g.evaluate(p)?)
}

enum Refined {
    Accepted(Point, f64),
    Rejected(RefinementFailure),
    Nothing,
}

fn refine_cell(f: &PiecewiseMap, g: &PiecewiseMap, metric: Metric, lo: f64, hi: f64, eq_tol: f64) -> Refined {
    let gap = |x: f64| gap_at(f, g, metric, &Point::scalar(x)).unwrap_or(f64::INFINITY);
    let x = golden_min(gap, lo, hi);
    let g0 = gap(x);
    if g0 > eq_tol {
        return Refined::Nothing;
    }
    let dom = f.domain().bounds()[0];
    let neighbour_gap = [x - eq_tol, x + eq_tol]
        .into_iter()
        .map(|t| gap(t.clamp(dom.lo, dom.hi)))
        .fold(0.0, f64::max);
    if neighbour_gap <= STABILITY_FACTOR * eq_tol {
        Refined::Accepted(Point::scalar(x), g0)
    } else {
        Refined::Rejected(RefinementFailure {
            cell: (lo, hi),
            point: Point::scalar(x),
            gap: g0,
            neighbour_gap,
        })
    }
}

/// Points where `f` and `g` agree within `eq_tol`.
///
/// Sampled points with gap `≤ eq_tol` are kept directly. In one dimension
/// each sampled local minimum of the gap is refined by golden-section
/// (ternary) search over its two neighbouring cells, and the result is kept
/// only if the gap stays small one `eq_tol` step to either side; otherwise it
/// is recorded as a refinement failure. Results are deduplicated at `eq_tol`.
pub fn find_coincidence_points(
    f: &PiecewiseMap,
    g: &PiecewiseMap,
    samples: &SampleSet,
    eq_tol: f64,
    metric: Metric,
) -> Result<CoincidenceReport> {
    if f.domain() != g.domain() {
        return Err(Error::Config(format!(
            "maps `{}` and `{}` have different domains",
            f.name(),
            g.name()
        )));
    }
    let pair = pair_label(f, g);
    let mut pts: Vec<Point> = samples.points.clone();
    pts.sort_by(|a, b| a.lex_cmp(b));
    let gaps: Vec<f64> = pts
        .par_iter()
        .map(|p| gap_at(f, g, metric, p))
        .collect::<Result<_>>()?;

    let mut found: Vec<(Point, f64)> = pts
        .iter()
        .zip(&gaps)
        .filter(|(_, &d)| d <= eq_tol)
        .map(|(p, &d)| (p.clone(), d))
        .collect();
    let maps_coincide = found.len() == pts.len() && !pts.is_empty();
    let mut refinement_failures = Vec::new();

    if maps_coincide {
        found.truncate(MAX_COINCIDENCES);
    } else if f.domain().dim() == 1 && pts.len() >= 2 {
        let xs: Vec<f64> = pts.iter().map(Point::x).collect();
        let last = xs.len() - 1;
        let cells: Vec<(f64, f64)> = (0..=last)
            .filter(|&i| {
                let left = if i == 0 { f64::INFINITY } else { gaps[i - 1] };
                let right = if i == last { f64::INFINITY } else { gaps[i + 1] };
                gaps[i] > eq_tol && gaps[i] <= left && gaps[i] <= right && (gaps[i] < left || gaps[i] < right)
            })
            .map(|i| (xs[i.saturating_sub(1)], xs[(i + 1).min(last)]))
            .collect();
        let refined: Vec<Refined> = cells
            .par_iter()
            .map(|&(lo, hi)| refine_cell(f, g, metric, lo, hi, eq_tol))
            .collect();
        for r in refined {
            match r {
                Refined::Accepted(p, d) => found.push((p, d)),
                Refined::Rejected(fail) => refinement_failures.push(fail),
                Refined::Nothing => {}
            }
        }
        found.sort_by(|a, b| a.0.lex_cmp(&b.0));
    }

    let mut points: Vec<CoincidencePoint> = Vec::new();
    for (p, d) in found {
        match points.last_mut() {
            Some(prev) if !maps_coincide && metric.distance_unchecked(prev.point.coords(), p.coords()) <= eq_tol => {
                if d < prev.gap {
                    prev.point = p;
                    prev.gap = d;
                }
            }
            _ => points.push(CoincidencePoint {
                point: p,
                pair: pair.clone(),
                gap: d,
            }),
        }
    }
    Ok(CoincidenceReport {
        pair,
        scanned: pts.len(),
        eq_tol,
        points,
        maps_coincide,
        refinement_failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorEntry {
    pub point: Point,
    pub fg: Point,
    pub gf: Point,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakCompatReport {
    pub pair: String,
    pub tol: f64,
    pub entries: Vec<CommutatorEntry>,
    pub max_distance: f64,
    /// No coincidence points: the property holds vacuously.
    pub vacuous: bool,
    pub passed: bool,
}

/// Do `f` and `g` commute at their coincidence points?
pub fn check_weakly_compatible(
    f: &PiecewiseMap,
    g: &PiecewiseMap,
    coincidences: &[CoincidencePoint],
    tol: f64,
    metric: Metric,
) -> Result<WeakCompatReport> {
    let entries: Vec<CommutatorEntry> = coincidences
        .iter()
        .map(|c| {
            let fg = f.evaluate(&g.evaluate(&c.point)?)?;
            let gf = g.evaluate(&f.evaluate(&c.point)?)?;
            let distance = metric.distance(&fg, &gf)?;
            Ok(CommutatorEntry {
                point: c.point.clone(),
                fg,
                gf,
                distance,
            })
        })
        .collect::<Result<_>>()?;
    let max_distance = entries.iter().map(|e| e.distance).fold(0.0, f64::max);
    Ok(WeakCompatReport {
        pair: pair_label(f, g),
        tol,
        vacuous: entries.is_empty(),
        passed: max_distance <= tol,
        entries,
        max_distance,
    })
}

/// A sequence `x_n` given by one expression in `n` per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    exprs: Vec<Expr>,
}

impl Witness {
    /// Parse `;`-separated coordinate expressions in `n`.
    pub fn parse(text: &str) -> Result<Witness> {
        let exprs = text
            .split(';')
            .map(|part| {
                let e = Expr::parse(part)?;
                e.check_scope(|v| v == Var::N)?;
                Ok(e)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Witness { exprs })
    }

    pub fn at(&self, n: u64) -> Result<Point> {
        let coords = self
            .exprs
            .iter()
            .map(|e| e.eval_n(n as f64))
            .collect::<Result<Vec<_>>>()?;
        Point::new(coords)
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.exprs.iter().map(Expr::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    /// Premises hold and so does the conclusion.
    Holds,
    /// Premises hold and the conclusion fails: a counterexample witness.
    Fails,
    /// Premises not established at the horizon; nothing is claimed.
    PremiseNotEstablished,
}

impl ProbeVerdict {
    /// The property is not refuted by this witness.
    pub fn consistent(self) -> bool {
        self != ProbeVerdict::Fails
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatProbe {
    pub pair: String,
    pub witness: String,
    pub horizon: u64,
    pub tol: f64,
    pub x_n: Point,
    pub f_x: Point,
    pub g_x: Point,
    /// `d(f x_N, g x_N)`
    pub premise_gap: f64,
    pub premise_established: bool,
    /// `d(f g x_N, g f x_N)`
    pub tail_distance: f64,
    pub verdict: ProbeVerdict,
}

/// Sequence probe of compatibility: with `f x_n, g x_n → t`, does
/// `d(f g x_n, g f x_n) → 0`? Evaluated at `n = horizon` only.
pub fn check_compatible_on_sequence(
    f: &PiecewiseMap,
    g: &PiecewiseMap,
    witness: &Witness,
    horizon: u64,
    tol: f64,
    metric: Metric,
) -> Result<CompatProbe> {
    let x = witness.at(horizon)?;
    let fx = f.evaluate(&x)?;
    let gx = g.evaluate(&x)?;
    let premise_gap = metric.distance(&fx, &gx)?;
    let fg = f.evaluate(&gx)?;
    let gf = g.evaluate(&fx)?;
    let tail_distance = metric.distance(&fg, &gf)?;
    let premise_established = premise_gap <= tol;
    let verdict = match (premise_established, tail_distance <= tol) {
        (false, _) => ProbeVerdict::PremiseNotEstablished,
        (true, true) => ProbeVerdict::Holds,
        (true, false) => ProbeVerdict::Fails,
    };
    Ok(CompatProbe {
        pair: pair_label(f, g),
        witness: witness.to_string(),
        horizon,
        tol,
        x_n: x,
        f_x: fx,
        g_x: gx,
        premise_gap,
        premise_established,
        tail_distance,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderedProbe {
    /// The ordered pair `(g, f)`.
    pub ordered_pair: String,
    pub witness: String,
    pub horizon: u64,
    pub tol: f64,
    /// Limit candidate `t = g x_N`.
    pub t: Point,
    pub g_t: Point,
    /// `d(f x_N, g x_N)`
    pub first_premise_gap: f64,
    /// `max{d(g f x_N, g t), d(g g x_N, g t)}`
    pub second_premise_gap: f64,
    pub premise_established: bool,
    /// `d(f g x_N, g t)`
    pub conclusion_distance: f64,
    pub verdict: ProbeVerdict,
}

/// Sequence probe of the ordered-pair property for `(g, f)`: whenever
/// `f x_n, g x_n → t` and `g f x_n, g g x_n → g t`, then `f g x_n → g t`.
/// The limit `t` is taken as `g x_N`.
pub fn check_weak_compatible_ordered(
    f: &PiecewiseMap,
    g: &PiecewiseMap,
    witness: &Witness,
    horizon: u64,
    tol: f64,
    metric: Metric,
) -> Result<OrderedProbe> {
    let x = witness.at(horizon)?;
    let fx = f.evaluate(&x)?;
    let gx = g.evaluate(&x)?;
    let t = gx.clone();
    let gt = g.evaluate(&t)?;
    let first_premise_gap = metric.distance(&fx, &gx)?;
    let gfx = g.evaluate(&fx)?;
    let ggx = g.evaluate(&gx)?;
    let second_premise_gap = metric.distance(&gfx, &gt)?.max(metric.distance(&ggx, &gt)?);
    let fgx = f.evaluate(&gx)?;
    let conclusion_distance = metric.distance(&fgx, &gt)?;
    let premise_established = first_premise_gap <= tol && second_premise_gap <= tol;
    let verdict = match (premise_established, conclusion_distance <= tol) {
        (false, _) => ProbeVerdict::PremiseNotEstablished,
        (true, true) => ProbeVerdict::Holds,
        (true, false) => ProbeVerdict::Fails,
    };
    Ok(OrderedProbe {
        ordered_pair: pair_label(g, f),
        witness: witness.to_string(),
        horizon,
        tol,
        t,
        g_t: gt,
        first_premise_gap,
        second_premise_gap,
        premise_established,
        conclusion_distance,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residuals {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub t: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.a.max(self.b).max(self.s).max(self.t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRun {
    pub start: Point,
    pub terminal: Terminal,
    pub steps: usize,
    pub limit: Option<Point>,
    pub distance_to_z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub z: Point,
    pub conv_tol: f64,
    pub residuals: Residuals,
    pub max_residual: f64,
    pub uniqueness_probe: Vec<ProbeRun>,
    /// Preimage of `z` under A (`z = Au`).
    pub u: Option<Point>,
    /// Preimage of `z` under B (`z = Bv`).
    pub v: Option<Point>,
    pub certified: bool,
}

/// Certify the limit of a converged trace as a common fixed point and probe
/// uniqueness by rerunning the iteration from each start in `probes`.
pub fn certify(
    q: &MapQuadruple,
    trace: &IterationTrace,
    probes: &[Point],
    cfg: &IterationConfig,
) -> Result<Certificate> {
    let z = trace.converged().ok_or(Error::NotConverged)?.clone();
    let res = |m: &PiecewiseMap| -> Result<f64> { q.metric.distance(&m.evaluate(&z)?, &z) };
    let residuals = Residuals {
        a: res(&q.a)?,
        b: res(&q.b)?,
        s: res(&q.s)?,
        t: res(&q.t)?,
    };
    let max_residual = residuals.max();
    let uniqueness_probe: Vec<ProbeRun> = probes
        .par_iter()
        .map(|start| {
            let run_cfg = IterationConfig {
                x0: start.clone(),
                ..cfg.clone()
            };
            let run = jungck_iterate(q, &run_cfg)?;
            let limit = run.converged().cloned();
            let distance_to_z = limit.as_ref().map(|l| q.metric.distance(l, &z)).transpose()?;
            Ok(ProbeRun {
                start: start.clone(),
                steps: run.steps.len(),
                terminal: run.terminal,
                limit,
                distance_to_z,
            })
        })
        .collect::<Result<_>>()?;
    let pre = |m: &PiecewiseMap| {
        preimage(&PreimageQuery::new(m, &z, cfg.preimage_tol, cfg.preimage_resolution).with_metric(q.metric))
    };
    let certified = max_residual <= cfg.conv_tol
        && uniqueness_probe
            .iter()
            .all(|p| p.distance_to_z.is_some_and(|d| d <= cfg.conv_tol));
    Ok(Certificate {
        u: pre(&q.a),
        v: pre(&q.b),
        z,
        conv_tol: cfg.conv_tol,
        residuals,
        max_residual,
        uniqueness_probe,
        certified,
    })
}
