//! Piecewise-defined self-maps of a box domain and their preimage solver.
//!
//! A map is an ordered list of branches `(guard, expression)`. The first
//! branch whose guard holds is evaluated, which matches top-to-bottom
//! piecewise notation with half-open intervals.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::metric::{linspace, sample, Domain, Generator, Metric, Point, SampleSet, DEFAULT_EQ_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Gt => lhs > rhs,
            Cmp::Ge => lhs >= rhs,
        }
    }

    fn flip(self) -> Cmp {
        match self {
            Cmp::Lt => Cmp::Gt,
            Cmp::Le => Cmp::Ge,
            Cmp::Gt => Cmp::Lt,
            Cmp::Ge => Cmp::Le,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }
}

/// `var op bound`, with `bound` a constant expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub var: Var,
    pub op: Cmp,
    pub bound: Expr,
    pub value: f64,
}

impl Clause {
    fn coord(&self) -> usize {
        self.var.coord_index().expect("guard variables are coordinates")
    }
}

/// A conjunction of coordinate comparisons. The empty guard always holds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Guard {
    pub clauses: Vec<Clause>,
}

impl Guard {
    pub fn always() -> Self {
        Guard::default()
    }

    /// Parse text such as `x < 3/8`, `3/8 <= x < 1/2` or
    /// `x_1 >= 0 && x_2 < 1`. An empty string, `true` or `otherwise` means
    /// the guard always holds.
    pub fn parse(text: &str) -> Result<Guard> {
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == "true" || trimmed == "otherwise" {
            return Ok(Guard::always());
        }
        let mut clauses = Vec::new();
        for (offset, part) in split_keep_offsets(text, &["&&", " and "]) {
            parse_chain(part, offset, &mut clauses)?;
        }
        Ok(Guard { clauses })
    }

    pub fn holds(&self, coords: &[f64]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.op.holds(coords[c.coord()], c.value))
    }

    fn max_coord(&self) -> Option<usize> {
        self.clauses.iter().map(Clause::coord).max()
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return write!(f, "true");
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, " && ")?;
            }
            write!(f, "{} {} {}", c.var, c.op.symbol(), c.bound)?;
        }
        Ok(())
    }
}

/// Split on any of `seps`, returning each piece with its byte offset.
fn split_keep_offsets<'a>(text: &'a str, seps: &[&str]) -> Vec<(usize, &'a str)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < text.len() {
        if let Some(sep) = seps.iter().find(|s| text[i..].starts_with(**s)) {
            out.push((start, &text[start..i]));
            i += sep.len();
            start = i;
        } else {
            i += text[i..].chars().next().map_or(1, char::len_utf8);
        }
    }
    out.push((start, &text[start..]));
    out
}

fn parse_chain(part: &str, base: usize, clauses: &mut Vec<Clause>) -> Result<()> {
    // operands separated by comparison operators
    let mut operands: Vec<(usize, &str)> = Vec::new();
    let mut ops = Vec::new();
    let bytes = part.as_bytes();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let op = match (bytes[i], bytes.get(i + 1)) {
            (b'<', Some(b'=')) => Some((Cmp::Le, 2)),
            (b'>', Some(b'=')) => Some((Cmp::Ge, 2)),
            (b'<', _) => Some((Cmp::Lt, 1)),
            (b'>', _) => Some((Cmp::Gt, 1)),
            _ => None,
        };
        if let Some((op, len)) = op {
            operands.push((start, &part[start..i]));
            ops.push((i, op));
            i += len;
            start = i;
        } else {
            i += 1;
        }
    }
    operands.push((start, &part[start..]));
    if ops.is_empty() {
        return Err(Error::Syntax {
            offset: base,
            message: format!("guard `{}` has no comparison", part.trim()),
        });
    }
    let parsed: Vec<Expr> = operands
        .iter()
        .map(|(off, text)| {
            Expr::parse(text).map_err(|e| shift_offset(e, base + off))
        })
        .collect::<Result<_>>()?;
    for (k, (op_off, op)) in ops.iter().enumerate() {
        let (lhs, rhs) = (&parsed[k], &parsed[k + 1]);
        let clause = match (lhs, rhs) {
            (Expr::Var(v), bound) if v.coord_index().is_some() => make_clause(*v, *op, bound),
            (bound, Expr::Var(v)) if v.coord_index().is_some() => make_clause(*v, op.flip(), bound),
            _ => None,
        };
        match clause {
            Some(c) => clauses.push(c),
            None => {
                return Err(Error::Syntax {
                    offset: base + op_off,
                    message: "each comparison needs a coordinate on one side and a constant on the other"
                        .into(),
                })
            }
        }
    }
    Ok(())
}

fn make_clause(var: Var, op: Cmp, bound: &Expr) -> Option<Clause> {
    if !bound.variables().is_empty() {
        return None;
    }
    let value = bound.eval_at(&[]).ok()?;
    value.is_finite().then(|| Clause {
        var,
        op,
        bound: bound.clone(),
        value,
    })
}

fn shift_offset(e: Error, by: usize) -> Error {
    match e {
        Error::Syntax { offset, message } => Error::Syntax {
            offset: offset + by,
            message,
        },
        Error::UnknownIdentifier { name, offset } => Error::UnknownIdentifier {
            name,
            offset: offset + by,
        },
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub guard: Guard,
    /// One expression per output coordinate.
    pub exprs: Vec<Expr>,
}

impl Branch {
    pub fn new(guard: &str, exprs: &[&str]) -> Result<Branch> {
        Ok(Branch {
            guard: Guard::parse(guard)?,
            exprs: exprs.iter().map(|e| Expr::parse(e)).collect::<Result<_>>()?,
        })
    }
}

/// A self-map of a box domain defined by ordered guarded branches.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseMap {
    name: String,
    domain: Domain,
    branches: Vec<Branch>,
    /// Images within this distance of the domain are clamped onto it.
    eq_tol: f64,
}

impl PiecewiseMap {
    pub fn new(name: impl Into<String>, domain: Domain, branches: Vec<Branch>) -> Result<Self> {
        let name = name.into();
        if branches.is_empty() {
            return Err(Error::Config(format!("map `{name}` has no branches")));
        }
        let dim = domain.dim();
        for (k, b) in branches.iter().enumerate() {
            if b.exprs.len() != dim {
                return Err(Error::Config(format!(
                    "map `{name}` branch {k} has {} component(s), domain has dimension {dim}",
                    b.exprs.len()
                )));
            }
            if let Some(c) = b.guard.max_coord() {
                if c >= dim {
                    return Err(Error::Config(format!(
                        "map `{name}` branch {k} guards coordinate x_{} of a {dim}-dimensional domain",
                        c + 1
                    )));
                }
            }
            for e in &b.exprs {
                e.check_scope(|v| v.coord_index().is_some_and(|i| i < dim))?;
            }
        }
        Ok(PiecewiseMap {
            name,
            domain,
            branches,
            eq_tol: DEFAULT_EQ_TOL,
        })
    }

    /// One-dimensional map from `(guard, expression)` source pairs.
    pub fn from_source(name: &str, domain: Domain, branches: &[(&str, &str)]) -> Result<Self> {
        let branches = branches
            .iter()
            .map(|(g, e)| Branch::new(g, &[e]))
            .collect::<Result<_>>()?;
        PiecewiseMap::new(name, domain, branches)
    }

    pub fn identity(name: &str, domain: Domain) -> Self {
        let exprs = (0..domain.dim())
            .map(|i| {
                if domain.dim() == 1 {
                    Expr::Var(Var::X)
                } else {
                    Expr::Var(Var::Coord(i))
                }
            })
            .collect();
        PiecewiseMap::new(
            name,
            domain,
            vec![Branch {
                guard: Guard::always(),
                exprs,
            }],
        )
        .expect("identity map is well-formed")
    }

    pub fn with_eq_tol(mut self, eq_tol: f64) -> Self {
        self.eq_tol = eq_tol;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn eq_tol(&self) -> f64 {
        self.eq_tol
    }

    /// Structurally the identity: every branch returns its input.
    pub fn is_identity(&self) -> bool {
        self.branches.iter().all(|b| {
            b.exprs
                .iter()
                .enumerate()
                .all(|(i, e)| matches!(e, Expr::Var(v) if v.coord_index() == Some(i)))
        })
    }

    /// Index of the first branch whose guard holds at `coords`.
    pub fn branch_at(&self, coords: &[f64]) -> Option<usize> {
        self.branches.iter().position(|b| b.guard.holds(coords))
    }

    pub fn evaluate(&self, p: &Point) -> Result<Point> {
        self.domain.check_dim(p)?;
        if !self.domain.contains_within(p, self.eq_tol) {
            return Err(Error::OutsideDomain {
                point: p.to_string(),
            });
        }
        let k = self.branch_at(p.coords()).ok_or_else(|| Error::Coverage {
            map: self.name.clone(),
            point: p.to_string(),
        })?;
        let coords = self.branches[k]
            .exprs
            .iter()
            .map(|e| e.eval_at(p.coords()))
            .collect::<Result<Vec<f64>>>()?;
        let image = Point::new(coords)
            .map_err(|e| Error::Eval(format!("map `{}` at {p}: {e}", self.name)))?;
        if self.domain.contains(&image) {
            Ok(image)
        } else if self.domain.contains_within(&image, self.eq_tol) {
            Ok(self.domain.clamp(&image))
        } else {
            Err(Error::SelfMapViolation {
                map: self.name.clone(),
                point: p.to_string(),
                image: image.to_string(),
            })
        }
    }

    /// Shorthand for one-dimensional maps.
    pub fn eval_scalar(&self, x: f64) -> Result<f64> {
        Ok(self.evaluate(&Point::scalar(x))?.x())
    }

    /// Sample points not matched by any guard.
    pub fn coverage_gaps(&self, samples: &SampleSet) -> Vec<Point> {
        samples
            .iter()
            .filter(|p| self.branch_at(p.coords()).is_none())
            .cloned()
            .collect()
    }

    /// First sample point where evaluation fails (coverage, self-map or
    /// arithmetic), with the error.
    pub fn first_failure(&self, samples: &SampleSet) -> Option<(Point, Error)> {
        samples
            .iter()
            .find_map(|p| self.evaluate(p).err().map(|e| (p.clone(), e)))
    }
}

/// A request to invert `map` near `target`.
#[derive(Debug, Clone)]
pub struct PreimageQuery<'a> {
    pub map: &'a PiecewiseMap,
    pub target: &'a Point,
    pub tolerance: f64,
    /// Grid points per axis for the search fallback.
    pub resolution: usize,
    pub metric: Metric,
}

impl<'a> PreimageQuery<'a> {
    pub fn new(map: &'a PiecewiseMap, target: &'a Point, tolerance: f64, resolution: usize) -> Self {
        PreimageQuery {
            map,
            target,
            tolerance,
            resolution,
            metric: Metric::Euclidean,
        }
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    fn gap(&self, p: &Point) -> Option<f64> {
        let image = self.map.evaluate(p).ok()?;
        self.metric.distance(&image, self.target).ok()
    }

    fn accept(&self, p: Point, out: &mut Vec<Point>) {
        if self.map.domain().contains(&p) && self.gap(&p).is_some_and(|g| g <= self.tolerance) {
            out.push(p);
        }
    }
}

/// Find a domain point whose image lies within `tolerance` of the target.
///
/// Affine branches of one-dimensional maps are inverted exactly; other
/// branches fall back to a grid scan with bisection and golden-section
/// refinement (compass search in higher dimensions). When several points
/// qualify the lexicographically smallest is returned. `None` means the
/// target is not numerically in the range of the map.
pub fn preimage(q: &PreimageQuery<'_>) -> Option<Point> {
    if q.target.dim() != q.map.domain().dim() || q.tolerance.is_nan() || q.tolerance <= 0.0 {
        return None;
    }
    let mut candidates = Vec::new();
    let needs_search = if q.map.domain().dim() == 1 {
        analytic_candidates(q, &mut candidates)
    } else {
        true
    };
    if needs_search {
        if q.map.domain().dim() == 1 {
            search_1d(q, &mut candidates);
        } else {
            search_nd(q, &mut candidates);
        }
    }
    candidates.into_iter().min_by(|a, b| a.lex_cmp(b))
}

/// A 1-D interval with open/closed ends.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Span {
    lo: f64,
    lo_open: bool,
    hi: f64,
    hi_open: bool,
}

impl Span {
    fn closed(lo: f64, hi: f64) -> Span {
        Span {
            lo,
            lo_open: false,
            hi,
            hi_open: false,
        }
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    fn intersect(&self, o: &Span) -> Span {
        let (lo, lo_open) = match self.lo.total_cmp(&o.lo) {
            Ordering::Greater => (self.lo, self.lo_open),
            Ordering::Less => (o.lo, o.lo_open),
            Ordering::Equal => (self.lo, self.lo_open || o.lo_open),
        };
        let (hi, hi_open) = match self.hi.total_cmp(&o.hi) {
            Ordering::Less => (self.hi, self.hi_open),
            Ordering::Greater => (o.hi, o.hi_open),
            Ordering::Equal => (self.hi, self.hi_open || o.hi_open),
        };
        Span {
            lo,
            lo_open,
            hi,
            hi_open,
        }
    }

    fn minus(&self, o: &Span) -> Vec<Span> {
        if o.is_empty() {
            return vec![*self];
        }
        let left = Span {
            lo: f64::NEG_INFINITY,
            lo_open: true,
            hi: o.lo,
            hi_open: !o.lo_open,
        };
        let right = Span {
            lo: o.hi,
            lo_open: !o.hi_open,
            hi: f64::INFINITY,
            hi_open: true,
        };
        [self.intersect(&left), self.intersect(&right)]
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect()
    }

    fn min_point(&self) -> f64 {
        if self.lo_open {
            self.lo.next_up().min(self.hi)
        } else {
            self.lo
        }
    }

    /// Point of the span nearest to `x`.
    fn project(&self, x: f64) -> f64 {
        let lo = self.min_point();
        let hi = if self.hi_open {
            self.hi.next_down().max(lo)
        } else {
            self.hi
        };
        x.clamp(lo, hi)
    }
}

fn guard_span(guard: &Guard, domain: Span) -> Span {
    guard.clauses.iter().fold(domain, |acc, c| {
        let s = match c.op {
            Cmp::Lt => Span {
                lo: f64::NEG_INFINITY,
                lo_open: true,
                hi: c.value,
                hi_open: true,
            },
            Cmp::Le => Span {
                lo: f64::NEG_INFINITY,
                lo_open: true,
                hi: c.value,
                hi_open: false,
            },
            Cmp::Gt => Span {
                lo: c.value,
                lo_open: true,
                hi: f64::INFINITY,
                hi_open: true,
            },
            Cmp::Ge => Span {
                lo: c.value,
                lo_open: false,
                hi: f64::INFINITY,
                hi_open: true,
            },
        };
        acc.intersect(&s)
    })
}

/// Exact inversion of affine branches. Returns whether some branch is not
/// affine and still needs the search fallback.
fn analytic_candidates(q: &PreimageQuery<'_>, out: &mut Vec<Point>) -> bool {
    let b = q.map.domain().bounds()[0];
    let domain = Span::closed(b.lo, b.hi);
    let target = q.target.x();
    let mut taken: Vec<Span> = Vec::new();
    let mut needs_search = false;
    for branch in q.map.branches() {
        let guard = guard_span(&branch.guard, domain);
        let mut region = vec![guard];
        for t in &taken {
            region = region.iter().flat_map(|r| r.minus(t)).collect();
        }
        taken.push(guard);
        if region.is_empty() {
            continue;
        }
        match branch.exprs[0].affine_1d() {
            None => needs_search = true,
            Some((0.0, intercept)) => {
                if (intercept - target).abs() <= q.tolerance {
                    if let Some(first) = region.iter().map(Span::min_point).min_by(f64::total_cmp) {
                        q.accept(Point::scalar(first), out);
                    }
                }
            }
            Some((slope, intercept)) => {
                let x = (target - intercept) / slope;
                if !x.is_finite() {
                    continue;
                }
                let nearest = region
                    .iter()
                    .map(|r| r.project(x))
                    .min_by(|a, c| (a - x).abs().total_cmp(&(c - x).abs()).then(a.total_cmp(c)));
                if let Some(p) = nearest {
                    q.accept(Point::scalar(p), out);
                }
            }
        }
    }
    needs_search
}

const REFINE_STEPS: usize = 200;

fn search_1d(q: &PreimageQuery<'_>, out: &mut Vec<Point>) {
    let b = q.map.domain().bounds()[0];
    if b.lo == b.hi {
        q.accept(Point::scalar(b.lo), out);
        return;
    }
    let target = q.target.x();
    let xs = linspace(b.lo, b.hi, q.resolution.max(2));
    let residual = |x: f64| q.map.eval_scalar(x).ok().map(|y| y - target);
    let rs: Vec<Option<f64>> = xs.iter().map(|&x| residual(x)).collect();

    for (i, &x) in xs.iter().enumerate() {
        if rs[i].is_some_and(|r| r.abs() <= q.tolerance) {
            out.push(Point::scalar(x));
        }
    }
    // sign changes: bisection
    for i in 0..xs.len() - 1 {
        let (Some(ra), Some(rb)) = (rs[i], rs[i + 1]) else {
            continue;
        };
        if ra.signum() * rb.signum() >= 0.0 {
            continue;
        }
        let (mut lo, mut hi, mut r_lo) = (xs[i], xs[i + 1], ra);
        for _ in 0..REFINE_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let Some(rm) = residual(mid) else { break };
            if rm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if rm.signum() == r_lo.signum() {
                lo = mid;
                r_lo = rm;
            } else {
                hi = mid;
            }
        }
        q.accept(Point::scalar(lo), out);
        q.accept(Point::scalar(hi), out);
    }
    // interior local minima of |residual| that stay above tolerance: golden section
    for i in 1..xs.len() - 1 {
        let (Some(a), Some(m), Some(c)) = (rs[i - 1], rs[i], rs[i + 1]) else {
            continue;
        };
        let m = m.abs();
        if m > q.tolerance && m <= a.abs() && m <= c.abs() {
            let x = golden_min(|x| residual(x).map_or(f64::INFINITY, f64::abs), xs[i - 1], xs[i + 1]);
            q.accept(Point::scalar(x), out);
        }
    }
}

/// Minimiser of `f` on `[lo, hi]` by golden-section search.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_895;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..REFINE_STEPS {
        if hi - lo <= f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
    }
    if fa <= fb {
        a
    } else {
        b
    }
}

fn search_nd(q: &PreimageQuery<'_>, out: &mut Vec<Point>) {
    let domain = q.map.domain();
    let res = q.resolution.max(2);
    let Ok(grid) = sample(domain, Generator::Grid(res)) else {
        return;
    };
    let mut scored: Vec<(f64, &Point)> = grid
        .iter()
        .filter_map(|p| q.gap(p).map(|g| (g, p)))
        .collect();
    for (g, p) in &scored {
        if *g <= q.tolerance {
            out.push((*p).clone());
        }
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.lex_cmp(b.1)));
    let steps: Vec<f64> = domain
        .bounds()
        .iter()
        .map(|b| (b.hi - b.lo) / (res - 1) as f64)
        .collect();
    for (g0, start) in scored.into_iter().take(8) {
        let mut best = start.clone();
        let mut best_gap = g0;
        let mut scale = 1.0;
        for _ in 0..REFINE_STEPS {
            if best_gap <= q.tolerance * 1e-3 || scale < 1e-15 {
                break;
            }
            let mut improved = false;
            for axis in 0..domain.dim() {
                for dir in [-1.0, 1.0] {
                    let mut c = best.coords().to_vec();
                    c[axis] += dir * scale * steps[axis];
                    let Ok(p) = Point::new(c) else { continue };
                    let p = domain.clamp(&p);
                    if let Some(g) = q.gap(&p) {
                        if g < best_gap {
                            best = p;
                            best_gap = g;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                scale *= 0.5;
            }
        }
        q.accept(best, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(lo: f64, hi: f64) -> Domain {
        Domain::interval(lo, hi).unwrap()
    }

    fn example_a() -> PiecewiseMap {
        PiecewiseMap::from_source(
            "A",
            dom(0.0, 1.2),
            &[
                ("x < 3/8", "11/32"),
                ("3/8 <= x < 1/2", "(1+x)/4"),
                ("x >= 1/2", "(1+x)/2"),
            ],
        )
        .unwrap()
    }

    fn example_t() -> PiecewiseMap {
        PiecewiseMap::from_source(
            "T",
            dom(0.0, 1.2),
            &[("x < 3/8", "10/32"), ("3/8 <= x < 1/2", "3/8"), ("x >= 1/2", "1")],
        )
        .unwrap()
    }

    #[test]
    fn guard_parsing() {
        let g = Guard::parse("3/8 <= x < 1/2").unwrap();
        assert_eq!(g.clauses.len(), 2);
        assert_eq!(g.clauses[0].op, Cmp::Ge);
        assert_eq!(g.clauses[0].value, 0.375);
        assert_eq!(g.clauses[1].op, Cmp::Lt);
        assert!(g.holds(&[0.375]) && !g.holds(&[0.5]));
        assert_eq!(Guard::parse(&g.to_string()).unwrap(), g);
        assert!(Guard::parse("otherwise").unwrap().holds(&[7.0]));
        let g2 = Guard::parse("x_1 >= 0 && x_2 < 1").unwrap();
        assert!(g2.holds(&[0.0, 0.5]) && !g2.holds(&[0.0, 1.0]));
    }

    #[test]
    fn guard_errors() {
        assert!(matches!(Guard::parse("x"), Err(Error::Syntax { .. })));
        assert!(matches!(Guard::parse("x < x"), Err(Error::Syntax { .. })));
        assert!(matches!(
            Guard::parse("x < 1 && y > 0"),
            Err(Error::UnknownIdentifier { offset: 9, .. })
        ));
    }

    #[test]
    fn example_maps_evaluate_per_branch() {
        let t = example_t();
        let a = example_a();
        assert_eq!(t.eval_scalar(0.25).unwrap(), 0.3125);
        assert_eq!(t.eval_scalar(0.45).unwrap(), 0.375);
        assert_eq!(t.eval_scalar(0.6).unwrap(), 1.0);
        assert_eq!(a.eval_scalar(1.0).unwrap(), 1.0);
        assert_eq!(a.eval_scalar(0.4).unwrap(), 0.35);
    }

    #[test]
    fn evaluation_errors() {
        let gap = PiecewiseMap::from_source("g", dom(0.0, 1.0), &[("x < 0.5", "x"), ("x > 0.6", "x")]).unwrap();
        assert!(matches!(gap.eval_scalar(0.55), Err(Error::Coverage { .. })));
        let escape = PiecewiseMap::from_source("e", dom(0.0, 1.0), &[("", "x + 0.5")]).unwrap();
        assert!(matches!(escape.eval_scalar(0.9), Err(Error::SelfMapViolation { .. })));
        let pole = PiecewiseMap::from_source("p", dom(0.0, 1.0), &[("", "1/(x + 1) - 0.5 + 0.5*x/x")]).unwrap();
        assert!(matches!(pole.eval_scalar(0.0), Err(Error::Eval(_))));
        let nearly = PiecewiseMap::from_source("n", dom(0.0, 1.0), &[("", "x + 1e-12")]).unwrap();
        assert_eq!(nearly.eval_scalar(1.0).unwrap(), 1.0);
    }

    #[test]
    fn dimension_and_scope_are_validated() {
        let d2 = Domain::new(vec![crate::metric::Interval { lo: 0.0, hi: 1.0 }; 2]).unwrap();
        assert!(PiecewiseMap::new("m", d2.clone(), vec![Branch::new("", &["x"]).unwrap()]).is_err());
        assert!(PiecewiseMap::new("m", dom(0.0, 1.0), vec![Branch::new("", &["x_2"]).unwrap()]).is_err());
        assert!(PiecewiseMap::new("m", dom(0.0, 1.0), vec![Branch::new("", &["s"]).unwrap()]).is_err());
        assert!(PiecewiseMap::identity("I", d2).is_identity());
    }

    #[test]
    fn constant_branch_preimage_is_leftmost() {
        let a = example_a();
        let target = Point::scalar(11.0 / 32.0);
        let p = preimage(&PreimageQuery::new(&a, &target, 1e-9, 1001)).unwrap();
        assert_eq!(p.x(), 0.0);
    }

    #[test]
    fn affine_preimages() {
        let id = PiecewiseMap::identity("I", dom(0.0, 1.0));
        let t = Point::scalar(0.7);
        assert_eq!(preimage(&PreimageQuery::new(&id, &t, 1e-9, 101)).unwrap().x(), 0.7);
        let half = PiecewiseMap::from_source("h", dom(0.0, 1.0), &[("", "x/2")]).unwrap();
        let t = Point::scalar(0.3);
        assert_eq!(preimage(&PreimageQuery::new(&half, &t, 1e-9, 101)).unwrap().x(), 0.6);
        let quarter = PiecewiseMap::from_source("q", dom(0.0, 1.0), &[("", "x/4")]).unwrap();
        let t = Point::scalar(0.5);
        assert!(preimage(&PreimageQuery::new(&quarter, &t, 1e-9, 101)).is_none());
    }

    #[test]
    fn unreachable_example_target() {
        let a = example_a();
        let t = Point::scalar(10.0 / 32.0);
        assert!(preimage(&PreimageQuery::new(&a, &t, 1e-9, 1001)).is_none());
        // 3/8 is a supremum of the middle branch: approached, within tolerance
        let t = Point::scalar(0.375);
        let p = preimage(&PreimageQuery::new(&a, &t, 1e-9, 1001)).unwrap();
        assert!((a.eval_scalar(p.x()).unwrap() - 0.375).abs() <= 1e-9);
        assert!(p.x() < 0.5);
    }

    #[test]
    fn search_fallback_inverts_square() {
        let sq = PiecewiseMap::from_source("B", dom(0.0, 1.0), &[("", "x^2")]).unwrap();
        for y in [0.01, 0.3, 0.5, 1.0, 0.0] {
            let t = Point::scalar(y);
            let p = preimage(&PreimageQuery::new(&sq, &t, 1e-9, 1001)).unwrap();
            assert!((p.x() * p.x() - y).abs() <= 1e-9, "y={y} p={p}");
        }
        let t = Point::scalar(0.3);
        let p = preimage(&PreimageQuery::new(&sq, &t, 1e-12, 11)).unwrap();
        assert!((p.x() - 0.3f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn search_fallback_two_dimensional() {
        let d2 = Domain::new(vec![crate::metric::Interval { lo: 0.0, hi: 1.0 }; 2]).unwrap();
        let m = PiecewiseMap::new("m", d2, vec![Branch::new("", &["x_1 / 2", "x_2^2"]).unwrap()]).unwrap();
        let t = Point::new(vec![0.2, 0.49]).unwrap();
        let p = preimage(&PreimageQuery::new(&m, &t, 1e-9, 21)).unwrap();
        let img = m.evaluate(&p).unwrap();
        assert!(Metric::Euclidean.distance(&img, &t).unwrap() <= 1e-9);
    }
}
