use std::sync::OnceLock;

use hyperfour::biortho::BiorthoTable;
use hyperfour::dd::Dd;
use hyperfour::halfplane::{
    apply_map, flycatcher_height, flycatcher_with, GaussMap, HPoint, MapKind,
};
use hyperfour::hfs::{HfsCoefficients, Sided};
use hyperfour::kleingordon::{transfer_apply_fn, GridFunction, TransferKind};
use hyperfour::modular::ModularTables;
use hyperfour::qseries::NomeSeries;
use hyperfour::real::{from_c64, C64};
use num_complex::Complex;
use proptest::prelude::*;

/// Envelope constant for `sup |A_n(x)|(1 + x²) / ((n + 1) log²(n + 2))`,
/// fitted on a grid over `[−50, 50]` for `n ≤ 12`.
const DECAY_CONSTANT: f64 = 0.4;

fn tables() -> &'static ModularTables {
    static T: OnceLock<ModularTables> = OnceLock::new();
    T.get_or_init(|| ModularTables::build(64).unwrap())
}

fn dd_tables() -> &'static ModularTables<Dd> {
    static T: OnceLock<ModularTables<Dd>> = OnceLock::new();
    T.get_or_init(|| ModularTables::build(64).unwrap())
}

fn biortho() -> &'static BiorthoTable {
    static T: OnceLock<BiorthoTable> = OnceLock::new();
    T.get_or_init(|| BiorthoTable::new(8).unwrap())
}

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

/// A point with log-uniform imaginary part in `[10^lo, 10^hi]`.
fn upper_point(re: f64, lo: f64, hi: f64) -> impl Strategy<Value = C64> {
    (-re..re, lo..hi).prop_map(|(x, e)| C64::new(x, 10f64.powf(e)))
}

fn series(len: usize, scale: f64) -> impl Strategy<Value = NomeSeries> {
    prop::collection::vec(complex(), len).prop_map(move |mut v| {
        for z in v.iter_mut() {
            *z *= scale;
        }
        v[0] = C64::new(1.0, 0.0) + v[0] * 0.1;
        NomeSeries::new(0, v).unwrap()
    })
}

fn max_diff(a: &NomeSeries, b: &NomeSeries, upto: i64) -> f64 {
    (0..=upto)
        .map(|k| (a.coeff(k).unwrap() - b.coeff(k).unwrap()).norm())
        .fold(0.0, f64::max)
}

fn sup(s: &NomeSeries) -> f64 {
    s.coeffs().iter().map(|z| z.norm()).fold(1.0, f64::max)
}

fn one_sided(v: &[C64]) -> HfsCoefficients {
    let mut c = HfsCoefficients::zero(Sided::One);
    c.set_a0(from_c64(v[0]));
    for (k, pair) in v[1..].chunks(2).enumerate() {
        c.set_a(k as i64 + 1, from_c64(pair[0])).unwrap();
        c.set_b(k as i64 + 1, from_c64(pair[1])).unwrap();
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn series_multiplication_is_associative(a in series(16, 1.0), b in series(16, 1.0), c in series(16, 1.0)) {
        let l = a.mul(&b).mul(&c);
        let r = a.mul(&b.mul(&c));
        prop_assert!(max_diff(&l, &r, 15) < 1e-13 * sup(&l));
    }

    #[test]
    fn series_inverse(a in series(16, 1.0)) {
        let p = a.mul(&a.inv().unwrap());
        prop_assert!(max_diff(&p, &NomeSeries::one(15), 15) < 1e-13 * sup(&a.inv().unwrap()));
    }

    #[test]
    fn series_exp_log_are_inverse(a in series(16, 1.0)) {
        let a = a.scale(a.coeff(0).unwrap().inv());
        let l = a.log().unwrap();
        prop_assume!(sup(&l) <= 1e6);
        let b = l.exp().unwrap();
        prop_assert!(max_diff(&a, &b, 15) < 1e-13 * sup(&a).max(sup(&l)));
    }

    #[test]
    fn series_powers_cancel(a in series(16, 1.0), alpha in -3.0..3.0f64) {
        let p = a.pow(C64::new(alpha, 0.0)).unwrap();
        let m = a.pow(C64::new(-alpha, 0.0)).unwrap();
        let prod = p.mul(&m);
        prop_assert!(max_diff(&prod, &NomeSeries::one(15), 15) < 1e-13 * sup(&p) * sup(&m));
    }

    #[test]
    fn lambda_functional_equations(tau in upper_point(3.0, -3.0, 1.0)) {
        let t = tables();
        let (Ok(l), Ok(lt), Ok(ls)) = (
            t.lambda_full(tau),
            t.lambda_eval(tau + 1.0),
            t.lambda_eval(-1.0 / tau),
        ) else {
            return Err(TestCaseError::reject("λ not representable in f64"));
        };
        prop_assume!(l.lambda.is_finite() && lt.is_finite() && ls.is_finite());
        let s = l.one_minus.norm();
        let r_t = (lt + (l.lambda / s) / (l.one_minus / s)).norm() / lt.norm().max(1.0);
        let r_s = (ls - l.one_minus).norm() / l.lambda.norm().max(1.0);
        prop_assert!(r_t < 1e-9, "T residual {r_t}");
        prop_assert!(r_s < 1e-9, "S residual {r_s}");
    }

    #[test]
    fn theta_transformation(re in -2.0..2.0f64, im in 0.5..5.0f64) {
        let t = tables();
        let tau = C64::new(re, im);
        let lhs = t.theta00_eval(tau).unwrap();
        let rhs = (tau / C64::i()).powf(-0.5) * t.theta00_eval(-1.0 / tau).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn semicircle_maps_to_the_critical_line(theta in 0.1..(std::f64::consts::PI - 0.1)) {
        let (s, c) = Dd::from_f64(theta).sin_cos();
        let v = dd_tables().lambda_eval(Complex::new(c, s)).unwrap();
        prop_assert!((v.re.to_f64() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn lambda_derivative_matches_differences(tau in upper_point(1.0, -0.5, 0.5)) {
        let t = tables();
        let h = 1e-5;
        let fd = (t.lambda_eval(tau + h).unwrap() - t.lambda_eval(tau - h).unwrap()) / (2.0 * h);
        let d = t.lambda_prime_eval(tau).unwrap();
        prop_assert!((d - fd).norm() < 1e-6 * d.norm());
    }

    #[test]
    fn involutions(tau in upper_point(5.0, -3.0, 1.0)) {
        let p = HPoint::new(tau).unwrap();
        let tol = 1e-14 * tau.norm_sqr().max(1.0 / tau.norm_sqr()).max(1.0);
        let ss = apply_map(MapKind::S, apply_map(MapKind::S, p)).value();
        let st = apply_map(MapKind::SStar, apply_map(MapKind::SStar, p)).value();
        let sr = apply_map(MapKind::SStar, apply_map(MapKind::RStar, p)).value();
        prop_assert!((ss - tau).norm() <= tol);
        prop_assert!((st - tau).norm() <= tol);
        prop_assert!((sr - apply_map(MapKind::S, p).value()).norm() <= tol);
    }

    #[test]
    fn both_gauss_maps_give_the_same_height(tau in upper_point(1.0, -4.0, 1.0)) {
        let p = HPoint::new(tau).unwrap();
        let r = flycatcher_with(p, GaussMap::Reflected).unwrap();
        prop_assume!(!r.is_mesh);
        let g = flycatcher_with(p, GaussMap::Plain).unwrap();
        prop_assert_eq!(r.n, g.n);
    }

    #[test]
    fn orbits_climb_and_heights_are_bounded(tau in upper_point(1.0, -4.0, 1.0)) {
        let h = flycatcher_height(HPoint::new(tau).unwrap()).unwrap();
        for w in h.orbit.windows(2) {
            prop_assert!(w[1].im() > w[0].im());
        }
        prop_assert!(h.n as f64 <= 0.5 + 0.5 / tau.im);
    }

    #[test]
    fn hfs_evaluation_is_linear(
        u in prop::collection::vec(complex(), 21),
        v in prop::collection::vec(complex(), 21),
        s in complex(),
        tau in upper_point(1.0, -0.3, 0.5),
    ) {
        let w: Vec<C64> = u.iter().zip(&v).map(|(a, b)| a + s * b).collect();
        let lhs = one_sided(&w).eval(tau).unwrap();
        let rhs = one_sided(&u).eval(tau).unwrap() + s * one_sided(&v).eval(tau).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-13 * (1.0 + rhs.norm()));
    }

    #[test]
    fn two_sided_conjugate_flip(
        a in prop::collection::btree_map(-6i64..=6, complex(), 0..8),
        b in prop::collection::btree_map(-6i64..=6, complex(), 0..8),
        a0 in complex(),
        tau in upper_point(1.0, -0.3, 0.5),
    ) {
        let mut c = HfsCoefficients::zero(Sided::Two);
        c.set_a0(from_c64(a0));
        for (&n, &z) in a.iter().filter(|(n, _)| **n != 0) {
            c.set_a(n, from_c64(z)).unwrap();
        }
        for (&n, &z) in b.iter().filter(|(n, _)| **n != 0) {
            c.set_b(n, from_c64(z)).unwrap();
        }
        let lhs = c.eval(tau).unwrap();
        let rhs = c.conj_flip().unwrap().eval(tau).unwrap().conj();
        prop_assert!((lhs - rhs).norm() < 1e-13 * (1.0 + lhs.norm()));
    }

    #[test]
    fn coefficient_symmetry(n in 1i64..=8, x in 0.1..10.0f64, neg in any::<bool>()) {
        let x = if neg { -x } else { x };
        let t = biortho();
        let lhs = t.bn_eval(n, x).unwrap();
        let rhs = t.an_eval(n, -1.0 / x).unwrap() / (x * x);
        prop_assert!((lhs - rhs).norm() < 1e-8);
    }

    #[test]
    fn coefficient_decay_envelope(n in 1i64..=8, x in -50.0..50.0f64) {
        let v = biortho().an_eval(n, x).unwrap().norm() * (1.0 + x * x);
        let n = n as f64;
        prop_assert!(v <= DECAY_CONSTANT * (n + 1.0) * (n + 2.0).ln().powi(2));
    }

    #[test]
    fn transfer_triangle_inequality(
        vals in prop::collection::vec(complex(), 64..128),
        omega in -2.0..2.0f64,
        t in -0.99..0.99f64,
    ) {
        let g = GridFunction::new(vals).unwrap();
        let sup = g.sup_norm();
        let f = |s: f64| Ok(g.eval(s));
        let fa = |s: f64| Ok(C64::new(g.eval(s).norm(), 0.0));
        let lhs = transfer_apply_fn(TransferKind::Omega(omega), f, sup, t, 100).unwrap().value.norm();
        let rhs = transfer_apply_fn(TransferKind::Omega(0.0), fa, sup, t, 100).unwrap().value.re;
        prop_assert!(lhs <= rhs + 1e-12);
    }
}

#[test]
fn fitted_decay_constant_covers_the_grid() {
    let t = biortho();
    let mut worst: f64 = 0.0;
    for n in 1..=8i64 {
        let s = (n as f64 + 1.0) * (n as f64 + 2.0).ln().powi(2);
        for k in 0..=2000 {
            let x = -50.0 + 0.05 * k as f64;
            worst = worst.max(t.an_eval(n, x).unwrap().norm() * (1.0 + x * x) / s);
        }
    }
    assert!(worst <= DECAY_CONSTANT, "{worst}");
}
