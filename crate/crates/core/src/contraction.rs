//! Contractive conditions on a quadruple of self-maps `(A, B, S, T)`.
//!
//! The central quantity is the majorant
//!
//! ```text
//! M(x, y) = max{ ψ(d(Ax,By), d(Ax,Sx)),  ψ(d(Ax,By), d(By,Ty)),
//!                ψ(d(Ax,Sx), d(By,Ty)),  ψ(d(By,Ty), d(Ax,Sx)),
//!                min{ψ(d(By,Sx), d(Ax,Sx)), ψ(d(Ax,Ty), d(By,Ty))},
//!                min{ψ(d(By,Sx), d(By,Ty)), ψ(d(Ax,Ty), d(Ax,Sx))} }
//! ```
//!
//! and the condition `ψ(d(Sx,Ty), d(Sx,Ty)) ≤ φ(M(x, y))` for all `x, y`.
//! Verification is sample based: a pass means no violation was found at the
//! sampled density, never a proof.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::auxiliary::{Phi, Psi};
use crate::error::{Error, Result};
use crate::metric::{uniform_point, Domain, Metric, Point, SampleSet};
use crate::piecewise::{preimage, PiecewiseMap, PreimageQuery};

/// Default absolute slack tolerance for condition checks.
pub const DEFAULT_COND_TOL: f64 = 1e-9;

/// Witnesses kept in a report; counts stay exact.
pub const MAX_WITNESSES: usize = 100;

/// Four self-maps of one domain under one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MapQuadruple {
    pub a: PiecewiseMap,
    pub b: PiecewiseMap,
    pub s: PiecewiseMap,
    pub t: PiecewiseMap,
    pub metric: Metric,
}

impl MapQuadruple {
    pub fn new(
        a: PiecewiseMap,
        b: PiecewiseMap,
        s: PiecewiseMap,
        t: PiecewiseMap,
        metric: Metric,
    ) -> Result<Self> {
        for m in [&b, &s, &t] {
            if m.domain() != a.domain() {
                return Err(Error::Config(format!(
                    "map `{}` is defined on a different domain than `{}`",
                    m.name(),
                    a.name()
                )));
            }
        }
        Ok(MapQuadruple { a, b, s, t, metric })
    }

    pub fn domain(&self) -> &Domain {
        self.a.domain()
    }

    pub fn maps(&self) -> [&PiecewiseMap; 4] {
        [&self.a, &self.b, &self.s, &self.t]
    }

    fn dist(&self, p: &[f64], q: &[f64]) -> f64 {
        self.metric.distance_unchecked(p, q)
    }
}

/// Which contractive inequality to check.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionForm {
    /// `ψ(d(Sx,Ty), d(Sx,Ty)) ≤ φ(M(x,y))`
    Theorem21 { psi: Psi, phi: Phi },
    /// `ψ(d(Sx,Ty), d(Sx,Ty)) ≤ r · M(x,y)`, `0 ≤ r < 1`
    Corollary22 { psi: Psi, r: f64 },
    /// [`ConditionForm::Theorem21`] with `B = A` and `S = T` substituted.
    Corollary23 { psi: Psi, phi: Phi },
    /// [`ConditionForm::Theorem21`] with `ψ(a,b) = (a^p + r·b^q)^λ`.
    Theorem25 {
        p: f64,
        q: f64,
        r: f64,
        lambda: f64,
        phi: Phi,
    },
    /// Single-map sum form
    /// `ψ(d(Tx,Ty),d(x,Tx)) + ψ(d(y,Ty),d(y,T²x)) ≤ r·ψ(d(x,y),d(x,Tx)) + s·ψ(d(y,Ty),d(y,Tx))`
    /// with `0 < r < 1`, `0 < s ≤ 1`; needs `A = B = identity`, `S = T`.
    ChoudhurySum { psi: Psi, r: f64, s: f64 },
}

impl ConditionForm {
    pub fn corollary_2_2(psi: Psi, r: f64) -> Result<Self> {
        if !(r.is_finite() && (0.0..1.0).contains(&r)) {
            return Err(Error::InvalidParameter(format!("r must be in [0, 1), got {r}")));
        }
        Ok(ConditionForm::Corollary22 { psi, r })
    }

    pub fn theorem_2_5(p: f64, q: f64, r: f64, lambda: f64, phi: Phi) -> Result<Self> {
        Psi::scaled_power(p, q, r, lambda)?;
        Ok(ConditionForm::Theorem25 {
            p,
            q,
            r,
            lambda,
            phi,
        })
    }

    pub fn choudhury_sum(psi: Psi, r: f64, s: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter(format!("r must be in (0, 1), got {r}")));
        }
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidParameter(format!("s must be in (0, 1], got {s}")));
        }
        Ok(ConditionForm::ChoudhurySum { psi, r, s })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConditionForm::Theorem21 { psi, phi } | ConditionForm::Corollary23 { psi, phi } => {
                psi.validate()?;
                phi.validate()
            }
            ConditionForm::Corollary22 { psi, r } => {
                psi.validate()?;
                ConditionForm::corollary_2_2(psi.clone(), *r).map(drop)
            }
            ConditionForm::Theorem25 {
                p,
                q,
                r,
                lambda,
                phi,
            } => {
                phi.validate()?;
                Psi::scaled_power(*p, *q, *r, *lambda).map(drop)
            }
            ConditionForm::ChoudhurySum { psi, r, s } => {
                psi.validate()?;
                ConditionForm::choudhury_sum(psi.clone(), *r, *s).map(drop)
            }
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ConditionForm::Theorem21 { .. } => "theorem_2_1",
            ConditionForm::Corollary22 { .. } => "corollary_2_2",
            ConditionForm::Corollary23 { .. } => "corollary_2_3",
            ConditionForm::Theorem25 { .. } => "theorem_2_5",
            ConditionForm::ChoudhurySum { .. } => "choudhury_sum",
        }
    }

    /// The ψ this form applies.
    pub fn psi(&self) -> Psi {
        match self {
            ConditionForm::Theorem21 { psi, .. }
            | ConditionForm::Corollary22 { psi, .. }
            | ConditionForm::Corollary23 { psi, .. }
            | ConditionForm::ChoudhurySum { psi, .. } => psi.clone(),
            ConditionForm::Theorem25 { p, q, r, lambda, .. } => Psi::ScaledPower {
                p: *p,
                q: *q,
                r: *r,
                lambda: *lambda,
            },
        }
    }

    /// Parameters for reports.
    pub fn params(&self) -> serde_json::Value {
        match self {
            ConditionForm::Theorem21 { psi, phi } | ConditionForm::Corollary23 { psi, phi } => {
                json!({ "psi": psi.to_string(), "phi": phi.to_string() })
            }
            ConditionForm::Corollary22 { psi, r } => json!({ "psi": psi.to_string(), "r": r }),
            ConditionForm::Theorem25 {
                p,
                q,
                r,
                lambda,
                phi,
            } => json!({ "p": p, "q": q, "r": r, "lambda": lambda, "phi": phi.to_string() }),
            ConditionForm::ChoudhurySum { psi, r, s } => {
                json!({ "psi": psi.to_string(), "r": r, "s": s })
            }
        }
    }

    fn check_quadruple(&self, q: &MapQuadruple) -> Result<()> {
        if let ConditionForm::ChoudhurySum { .. } = self {
            if !q.a.is_identity() || !q.b.is_identity() {
                return Err(Error::Config(
                    "choudhury_sum needs A and B to be the identity map".into(),
                ));
            }
            if q.s.branches() != q.t.branches() {
                return Err(Error::Config("choudhury_sum needs S = T".into()));
            }
        }
        Ok(())
    }
}

/// `M(x, y)` from precomputed images.
#[allow(clippy::too_many_arguments)]
fn majorant_of(psi: &Psi, d: impl Fn(&[f64], &[f64]) -> f64, ax: &[f64], by: &[f64], sx: &[f64], ty: &[f64]) -> Result<f64> {
    let ax_by = d(ax, by);
    let ax_sx = d(ax, sx);
    let by_ty = d(by, ty);
    let by_sx = d(by, sx);
    let ax_ty = d(ax, ty);
    let terms = [
        psi.eval(ax_by, ax_sx)?,
        psi.eval(ax_by, by_ty)?,
        psi.eval(ax_sx, by_ty)?,
        psi.eval(by_ty, ax_sx)?,
        psi.eval(by_sx, ax_sx)?.min(psi.eval(ax_ty, by_ty)?),
        psi.eval(by_sx, by_ty)?.min(psi.eval(ax_ty, ax_sx)?),
    ];
    Ok(terms.into_iter().fold(0.0, f64::max))
}

/// The six-term majorant `M(x, y)` of the quadruple under `psi`.
pub fn majorant(q: &MapQuadruple, psi: &Psi, x: &Point, y: &Point) -> Result<f64> {
    let ax = q.a.evaluate(x)?;
    let by = q.b.evaluate(y)?;
    let sx = q.s.evaluate(x)?;
    let ty = q.t.evaluate(y)?;
    majorant_of(
        psi,
        |p, r| q.dist(p, r),
        ax.coords(),
        by.coords(),
        sx.coords(),
        ty.coords(),
    )
}

/// Result of checking one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; negative means violation.
    pub slack: f64,
    /// `M(x, y)`; absent for the sum form, which has no majorant.
    pub majorant: Option<f64>,
}

/// Images of one point under every map a form needs.
#[derive(Debug, Clone)]
struct Images {
    x: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    s: Vec<f64>,
    t: Vec<f64>,
    /// `T(T(x))`, for the sum form.
    tt: Option<Vec<f64>>,
}

fn images(form: &ConditionForm, q: &MapQuadruple, x: &Point) -> Result<Images> {
    let a = q.a.evaluate(x)?;
    let t = q.t.evaluate(x)?;
    let (b, s) = match form {
        ConditionForm::Corollary23 { .. } => (a.clone(), t.clone()),
        _ => (q.b.evaluate(x)?, q.s.evaluate(x)?),
    };
    let tt = match form {
        ConditionForm::ChoudhurySum { .. } => Some(q.t.evaluate(&t)?.into_coords()),
        _ => None,
    };
    Ok(Images {
        x: x.coords().to_vec(),
        a: a.into_coords(),
        b: b.into_coords(),
        s: s.into_coords(),
        t: t.into_coords(),
        tt,
    })
}

fn check_images(form: &ConditionForm, q: &MapQuadruple, x: &Images, y: &Images) -> Result<PairCheck> {
    let d = |p: &[f64], r: &[f64]| q.dist(p, r);
    let (lhs, rhs, majorant) = match form {
        ConditionForm::ChoudhurySum { psi, r, s } => {
            let ttx = x.tt.as_ref().expect("sum form images carry T²x");
            let lhs = psi.eval(d(&x.t, &y.t), d(&x.x, &x.t))? + psi.eval(d(&y.x, &y.t), d(&y.x, ttx))?;
            let rhs = r * psi.eval(d(&x.x, &y.x), d(&x.x, &x.t))? + s * psi.eval(d(&y.x, &y.t), d(&y.x, &x.t))?;
            (lhs, rhs, None)
        }
        _ => {
            let psi = form.psi();
            let gap = d(&x.s, &y.t);
            let lhs = psi.eval(gap, gap)?;
            let m = majorant_of(&psi, d, &x.a, &y.b, &x.s, &y.t)?;
            let rhs = match form {
                ConditionForm::Corollary22 { r, .. } => r * m,
                ConditionForm::Theorem21 { phi, .. }
                | ConditionForm::Corollary23 { phi, .. }
                | ConditionForm::Theorem25 { phi, .. } => phi.eval(m)?,
                ConditionForm::ChoudhurySum { .. } => unreachable!(),
            };
            (lhs, rhs, Some(m))
        }
    };
    Ok(PairCheck {
        lhs,
        rhs,
        slack: rhs - lhs,
        majorant,
    })
}

/// Check the form's inequality at one pair `(x, y)`.
pub fn check_pair(form: &ConditionForm, q: &MapQuadruple, x: &Point, y: &Point) -> Result<PairCheck> {
    form.check_quadruple(q)?;
    let ix = images(form, q, x)?;
    let iy = images(form, q, y)?;
    check_images(form, q, &ix, &iy)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub x: Point,
    pub y: Point,
    pub lhs: f64,
    pub majorant: Option<f64>,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub form: String,
    pub params: serde_json::Value,
    pub cond_tol: f64,
    pub pairs_checked: usize,
    /// Minimum over pairs of `rhs - lhs`.
    pub worst_slack: f64,
    pub worst_pair: Option<(Point, Point)>,
    pub violation_count: usize,
    /// First [`MAX_WITNESSES`] violations in pair order.
    pub violations: Vec<Violation>,
    pub verdict: Verdict,
}

struct RowSummary {
    worst: Option<(f64, usize)>,
    count: usize,
    violations: Vec<(usize, PairCheck)>,
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Check every ordered pair of the sample (diagonal included).
///
/// The result is independent of `workers`.
pub fn verify(
    form: &ConditionForm,
    q: &MapQuadruple,
    samples: &SampleSet,
    cond_tol: f64,
    workers: usize,
) -> Result<ConditionReport> {
    form.check_quadruple(q)?;
    let pts = &samples.points;
    let imgs: Vec<Images> = pts.iter().map(|p| images(form, q, p)).collect::<Result<_>>()?;
    let pool = thread_pool(workers)?;
    let rows: Vec<RowSummary> = pool.install(|| {
        imgs.par_iter()
            .map(|ix| {
                let mut row = RowSummary {
                    worst: None,
                    count: 0,
                    violations: Vec::new(),
                };
                for (j, iy) in imgs.iter().enumerate() {
                    let c = check_images(form, q, ix, iy)?;
                    if row.worst.is_none_or(|(w, _)| c.slack < w) {
                        row.worst = Some((c.slack, j));
                    }
                    if c.slack < -cond_tol {
                        row.count += 1;
                        if row.violations.len() < MAX_WITNESSES {
                            row.violations.push((j, c));
                        }
                    }
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut worst: Option<(f64, usize, usize)> = None;
    let mut violation_count = 0;
    let mut violations = Vec::new();
    for (i, row) in rows.into_iter().enumerate() {
        if let Some((w, j)) = row.worst {
            if worst.is_none_or(|(cur, _, _)| w < cur) {
                worst = Some((w, i, j));
            }
        }
        violation_count += row.count;
        for (j, c) in row.violations {
            if violations.len() < MAX_WITNESSES {
                violations.push(Violation {
                    x: pts[i].clone(),
                    y: pts[j].clone(),
                    lhs: c.lhs,
                    majorant: c.majorant,
                    rhs: c.rhs,
                    slack: c.slack,
                });
            }
        }
    }
    Ok(ConditionReport {
        form: form.tag().to_string(),
        params: form.params(),
        cond_tol,
        pairs_checked: pts.len() * pts.len(),
        worst_slack: worst.map_or(f64::INFINITY, |w| w.0),
        worst_pair: worst.map(|(_, i, j)| (pts[i].clone(), pts[j].clone())),
        violation_count,
        violations,
        verdict: Verdict::from_pass(violation_count == 0),
    })
}

/// A violating pair found by random search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Falsification {
    /// Zero-based draw index.
    pub draw: usize,
    pub x: Point,
    pub y: Point,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// Draw `budget` seeded uniform pairs and return the first violation.
///
/// Pairs are drawn `x` then `y` from one ChaCha8 stream, so the answer
/// depends only on `seed` and `budget`, never on `workers`. A pass is not a
/// proof: diagonal pairs, for instance, never violate.
pub fn falsify(
    form: &ConditionForm,
    q: &MapQuadruple,
    budget: usize,
    seed: u64,
    cond_tol: f64,
    workers: usize,
) -> Result<Option<Falsification>> {
    if budget == 0 {
        return Err(Error::Config("falsify budget must be at least 1".into()));
    }
    form.check_quadruple(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Point, Point)> = (0..budget)
        .map(|_| {
            let x = uniform_point(q.domain(), &mut rng);
            let y = uniform_point(q.domain(), &mut rng);
            (x, y)
        })
        .collect();
    let pool = thread_pool(workers)?;
    let checks: Vec<PairCheck> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(x, y)| check_pair(form, q, x, y))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(checks
        .into_iter()
        .enumerate()
        .find(|(_, c)| c.slack < -cond_tol)
        .map(|(draw, c)| Falsification {
            draw,
            x: pairs[draw].0.clone(),
            y: pairs[draw].1.clone(),
            lhs: c.lhs,
            rhs: c.rhs,
            slack: c.slack,
        }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionFailure {
    pub x: Point,
    /// Image with no preimage.
    pub target: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionSide {
    /// e.g. `T(K) ⊂ A(K)`
    pub inclusion: String,
    pub failure_count: usize,
    pub failures: Vec<InclusionFailure>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub checked: usize,
    pub preimage_tol: f64,
    pub t_in_a: InclusionSide,
    pub s_in_b: InclusionSide,
    pub passed: bool,
}

fn inclusion_side(
    label: &str,
    image_map: &PiecewiseMap,
    cover: &PiecewiseMap,
    samples: &SampleSet,
    metric: Metric,
    preimage_tol: f64,
    resolution: usize,
) -> Result<InclusionSide> {
    let mut cache: HashMap<Vec<u64>, bool> = HashMap::new();
    let mut failures = Vec::new();
    let mut failure_count = 0;
    for x in samples.iter() {
        let target = image_map.evaluate(x)?;
        let key: Vec<u64> = target.coords().iter().map(|c| c.to_bits()).collect();
        let found = *cache.entry(key).or_insert_with(|| {
            let query = PreimageQuery::new(cover, &target, preimage_tol, resolution).with_metric(metric);
            preimage(&query).is_some()
        });
        if !found {
            failure_count += 1;
            if failures.len() < MAX_WITNESSES {
                failures.push(InclusionFailure {
                    x: x.clone(),
                    target,
                });
            }
        }
    }
    Ok(InclusionSide {
        inclusion: label.to_string(),
        failure_count,
        failures,
        passed: failure_count == 0,
    })
}

/// Numerical check of `T(K) ⊂ A(K)` and `S(K) ⊂ B(K)` on a sample: every
/// sampled image must have a preimage within `preimage_tol`.
pub fn check_inclusions(
    q: &MapQuadruple,
    samples: &SampleSet,
    preimage_tol: f64,
    resolution: usize,
) -> Result<InclusionReport> {
    let t_in_a = inclusion_side("T(K) ⊂ A(K)", &q.t, &q.a, samples, q.metric, preimage_tol, resolution)?;
    let s_in_b = inclusion_side("S(K) ⊂ B(K)", &q.s, &q.b, samples, q.metric, preimage_tol, resolution)?;
    let passed = t_in_a.passed && s_in_b.passed;
    Ok(InclusionReport {
        checked: samples.len(),
        preimage_tol,
        t_in_a,
        s_in_b,
        passed,
    })
}
