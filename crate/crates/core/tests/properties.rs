use commonfix::auxiliary::{Phi, Psi};
use commonfix::contraction::{check_pair, majorant, verify, ConditionForm, MapQuadruple, Verdict};
use commonfix::expr::{Expr, Var};
use commonfix::iteration::{
    certify, check_weakly_compatible, find_coincidence_points, jungck_iterate, replay, IterationConfig,
};
use commonfix::metric::{audit_metric, sample, Domain, Generator, Metric, Point};
use commonfix::scenarios::{builtin, Scenario};
use proptest::prelude::*;
use std::collections::HashMap;
use std::sync::OnceLock;

fn cached(name: &str) -> &'static Scenario {
    static ALL: OnceLock<HashMap<&'static str, Scenario>> = OnceLock::new();
    let all = ALL.get_or_init(|| {
        ["example_1_8", "identity_violation", "four_maps", "kannan_form", "choudhury_single"]
            .into_iter()
            .map(|n| (n, builtin(n).unwrap()))
            .collect()
    });
    &all[name]
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0f64..1e6).prop_map(Expr::Const),
        Just(Expr::Var(Var::X)),
        Just(Expr::Var(Var::S)),
        Just(Expr::Var(Var::T)),
        (0usize..3).prop_map(|i| Expr::Var(Var::Coord(i))),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            (inner, -4i32..5).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
        ]
    })
}

fn point(dim: usize) -> impl Strategy<Value = Point> {
    proptest::collection::vec(-10.0f64..10.0, dim).prop_map(|v| Point::new(v).unwrap())
}

/// Six-term majorant written out independently for the four-map scenario
/// (A = x, B = x², S = x/4, T = x²/4, ψ(s,t) = s + t).
fn four_maps_majorant(x: f64, y: f64) -> f64 {
    let (ax, by, sx, ty) = (x, y * y, x / 4.0, y * y / 4.0);
    let psi = |s: f64, t: f64| s + t;
    let d = |a: f64, b: f64| (a - b).abs();
    let plain = [
        psi(d(ax, by), d(ax, sx)),
        psi(d(ax, by), d(by, ty)),
        psi(d(ax, sx), d(by, ty)),
        psi(d(by, ty), d(ax, sx)),
    ];
    let m1 = psi(d(by, sx), d(ax, sx)).min(psi(d(ax, ty), d(by, ty)));
    let m2 = psi(d(by, sx), d(by, ty)).min(psi(d(ax, ty), d(ax, sx)));
    plain.into_iter().chain([m1, m2]).fold(0.0, f64::max)
}

/// The weakly compatible example pair written out directly.
fn example_a(x: f64) -> f64 {
    if x < 0.375 {
        11.0 / 32.0
    } else if x < 0.5 {
        (1.0 + x) / 4.0
    } else {
        (1.0 + x) / 2.0
    }
}

fn example_t(x: f64) -> f64 {
    if x < 0.375 {
        10.0 / 32.0
    } else if x < 0.5 {
        0.375
    } else {
        1.0
    }
}

proptest! {
    #[test]
    fn expression_print_parse_round_trip(e in expr()) {
        let printed = e.to_string();
        let back = Expr::parse(&printed).unwrap();
        prop_assert_eq!(&back, &e, "printed as {}", printed);
        prop_assert_eq!(back.to_string(), printed);
    }

    #[test]
    fn metric_axioms_on_random_points(pts in proptest::collection::vec(point(2), 3..8)) {
        let samples = commonfix::metric::SampleSet { points: pts, generator: Generator::Grid(2) };
        for m in [Metric::Euclidean, Metric::Discrete] {
            let audit = audit_metric(m, &samples, 1e-12).unwrap();
            prop_assert!(audit.passed, "{:?}: {:?}", m, audit);
        }
    }

    #[test]
    fn absolute_difference_is_a_metric_on_the_line(xs in proptest::collection::vec(-1e3f64..1e3, 3..10)) {
        let samples = commonfix::metric::SampleSet {
            points: xs.into_iter().map(Point::scalar).collect(),
            generator: Generator::Grid(2),
        };
        prop_assert!(audit_metric(Metric::AbsoluteDifference, &samples, 1e-9).unwrap().passed);
    }

    #[test]
    fn majorant_matches_independent_oracle(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let s = cached("four_maps");
        let m = majorant(&s.maps, &s.psi, &Point::scalar(x), &Point::scalar(y)).unwrap();
        prop_assert!((m - four_maps_majorant(x, y)).abs() <= 1e-12);
    }

    #[test]
    fn example_maps_match_branch_formulas(x in 0.0f64..=1.2) {
        let s = cached("example_1_8");
        prop_assert_eq!(s.maps.a.eval_scalar(x).unwrap(), example_a(x));
        prop_assert_eq!(s.maps.t.eval_scalar(x).unwrap(), example_t(x));
    }

    #[test]
    fn both_sides_are_nonnegative(x in 0.0f64..=1.2, y in 0.0f64..=1.2) {
        for name in ["example_1_8", "identity_violation", "four_maps", "kannan_form", "choudhury_single"] {
            let s = cached(name);
            let d = s.domain().bounds()[0];
            let (x, y) = (x.min(d.hi), y.min(d.hi));
            let c = check_pair(&s.form, &s.maps, &Point::scalar(x), &Point::scalar(y)).unwrap();
            prop_assert!(c.lhs >= 0.0 && c.rhs >= 0.0, "{}: {:?}", name, c);
        }
    }
}

#[test]
fn denser_samples_never_turn_fail_into_pass() {
    for name in ["example_1_8", "identity_violation", "banach", "four_maps"] {
        let s = builtin(name).unwrap();
        let mut failed = false;
        for n in [6, 11, 21, 41, 81] {
            let grid = sample(s.domain(), Generator::Grid(n)).unwrap();
            let v = verify(&s.form, &s.maps, &grid, s.checks.cond_tol, 2).unwrap().verdict;
            if failed {
                assert_eq!(v, Verdict::Fail, "{name} at grid {n}");
            }
            failed |= v == Verdict::Fail;
        }
    }
}

#[test]
fn traces_are_deterministic_and_replay() {
    for name in ["banach", "kannan_form", "four_maps", "choudhury_single", "identity_violation"] {
        let s = builtin(name).unwrap();
        let a = jungck_iterate(&s.maps, &s.iteration).unwrap();
        let b = jungck_iterate(&s.maps, &s.iteration).unwrap();
        assert_eq!(a.to_csv(), b.to_csv(), "{name}");
        assert_eq!(replay(&s.maps, &a, s.iteration.preimage_tol).unwrap(), None, "{name}");
    }
}

#[test]
fn certified_points_zero_the_left_side() {
    for name in ["banach", "kannan_form", "four_maps"] {
        let s = builtin(name).unwrap();
        let trace = jungck_iterate(&s.maps, &s.iteration).unwrap();
        let cert = certify(&s.maps, &trace, &s.probes, &s.iteration).unwrap();
        assert!(cert.certified, "{name}");
        let c = check_pair(&s.form, &s.maps, &cert.z, &cert.z).unwrap();
        assert!(c.lhs <= 1e-9, "{name}: {c:?}");
    }
}

#[test]
fn a_map_with_itself_coincides_and_commutes() {
    let s = builtin("four_maps").unwrap();
    let grid = sample(s.domain(), Generator::Grid(51)).unwrap();
    for m in [&s.maps.a, &s.maps.b, &s.maps.s, &s.maps.t] {
        let r = find_coincidence_points(m, m, &grid, 1e-9, Metric::Euclidean).unwrap();
        assert!(r.maps_coincide);
        assert!(check_weakly_compatible(m, m, &r.points, 1e-12, Metric::Euclidean).unwrap().passed);
    }
}

#[test]
fn four_distinct_maps_need_contraction_factor_near_0_3() {
    let s = builtin("four_maps").unwrap();
    let grid = sample(s.domain(), Generator::Grid(101)).unwrap();
    let at = |r: f64| {
        let form = ConditionForm::Theorem21 { psi: s.psi.clone(), phi: Phi::linear(r).unwrap() };
        verify(&form, &s.maps, &grid, 1e-9, 2).unwrap().verdict
    };
    assert_eq!(at(0.25), Verdict::Fail);
    assert_eq!(at(0.3), Verdict::Pass);
}

#[test]
fn two_dimensional_quadruple_runs_end_to_end() {
    let d = Domain::new(vec![[0.0, 1.0].into(), [0.0, 1.0].into()]).unwrap();
    let id = |n: &str| commonfix::piecewise::PiecewiseMap::identity(n, d.clone());
    let half = commonfix::piecewise::PiecewiseMap::new(
        "T",
        d.clone(),
        vec![commonfix::piecewise::Branch::new("", &["x_1/2", "x_2/2"]).unwrap()],
    )
    .unwrap();
    let q = MapQuadruple::new(id("A"), id("B"), half.clone(), half, Metric::Euclidean).unwrap();
    let form = ConditionForm::Theorem21 {
        psi: Psi::scaled_power(1.0, 0.0, 0.0, 1.0).unwrap(),
        phi: Phi::linear(0.5).unwrap(),
    };
    let grid = sample(&d, Generator::Grid(11)).unwrap();
    assert!(verify(&form, &q, &grid, 1e-9, 2).unwrap().verdict.passed());
    let mut cfg = IterationConfig::new(Point::new(vec![1.0, 0.5]).unwrap());
    cfg.preimage_resolution = 41;
    let trace = jungck_iterate(&q, &cfg).unwrap();
    let z = trace.converged().unwrap();
    assert!(z.coords().iter().all(|c| c.abs() < 1e-8));
}
