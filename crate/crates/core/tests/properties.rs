mod common;

use g2moduli::exterior7::{hodge_star, inner, interior, wedge, wedge_top, Form, Matrix7, Metric7, Vector7, BINOM7};
use g2moduli::g2_point::{d_theta, is_positive, reference_phi, type_decompose, G2PointData};
use g2moduli::kahler_cone::{
    potential_second_differences, segment_energy, segment_energy_quadrature, volume, ConeClass,
    IntersectionEntry, IntersectionForm,
};
use g2moduli::kummer_cert::{dual_basis, energy_upper_bound, regularity, CoeffFunction, KummerModel};
use g2moduli::path_geometry::{
    cauchy_schwarz_check, cycle_flux_and_volume, h_function, path_report, FlatCycle4, FormUsed,
    ModuliPath,
};
use g2moduli::quadrature::{integrate, QuadratureSpec};
use g2moduli::torus_moduli::{Lattice, TorusModuliPoint};
use proptest::prelude::*;

fn form(k: usize) -> impl Strategy<Value = Form> {
    prop::collection::vec(-1.0..1.0f64, BINOM7[k]).prop_map(move |c| Form::new(k, c).unwrap())
}

fn vector() -> impl Strategy<Value = Vector7> {
    prop::array::uniform7(-1.0..1.0f64).prop_map(Vector7)
}

fn metric() -> impl Strategy<Value = Metric7> {
    prop::collection::vec(-0.4..0.4f64, 49).prop_map(|v| {
        let a = Matrix7::from_row_slice(&v);
        Metric7::symmetrized(&(Matrix7::identity() + a * a.transpose())).unwrap()
    })
}

/// φ₀ + perturbation of norm ≤ 0.3, scaled by c ∈ [0.5, 2].
fn positive_form() -> impl Strategy<Value = Form> {
    (form(3), 0.0..0.3f64, 0.5..2.0f64)
        .prop_map(|(p, r, c)| (&reference_phi() + &p.scaled(r / p.coefficient_norm().max(1e-12))).scaled(c))
        .prop_filter("positive", |phi| is_positive(phi).unwrap())
}

fn lattice() -> impl Strategy<Value = Lattice> {
    prop::collection::vec(-0.2..0.2f64, 49).prop_map(|v| {
        Lattice::new(Matrix7::identity() + Matrix7::from_row_slice(&v)).unwrap()
    })
}

fn close(a: &Form, b: &Form, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol * (1.0 + a.coefficient_norm().max(b.coefficient_norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_graded_commutative(p in 0usize..=4, q in 0usize..=3, seed in form(7)) {
        prop_assume!(p + q <= 7);
        let a = Form::new(p, seed.coefficients().iter().cycle().take(BINOM7[p]).copied().collect()).unwrap();
        let b = Form::new(q, seed.coefficients().iter().rev().cycle().take(BINOM7[q]).copied().collect()).unwrap();
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap();
        let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(close(&ab, &ba.scaled(sign), 1e-13));
    }

    #[test]
    fn wedge_associative(a in form(2), b in form(2), c in form(3)) {
        let left = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
        let right = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
        prop_assert!((left.top() - right.top()).abs() < 1e-11);
    }

    #[test]
    fn interior_is_a_derivation(u in vector(), a in form(3), b in form(2)) {
        let lhs = interior(&u, &wedge(&a, &b).unwrap()).unwrap();
        let rhs = &wedge(&interior(&u, &a).unwrap(), &b).unwrap()
            - &wedge(&a, &interior(&u, &b).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-13));
    }

    #[test]
    fn star_is_an_isometric_involution(g in metric(), k in 0usize..=7, seed in form(7)) {
        let a = Form::new(k, seed.coefficients().iter().cycle().take(BINOM7[k]).copied().collect()).unwrap();
        let b = Form::new(k, seed.coefficients().iter().rev().cycle().take(BINOM7[k]).copied().collect()).unwrap();
        let sb = hodge_star(&b, &g).unwrap();
        prop_assert!(close(&hodge_star(&sb, &g).unwrap(), &b, 1e-10));
        // a ∧ ⋆b = ⟨a, b⟩ vol_g
        let lhs = wedge(&a, &sb).unwrap().top();
        let rhs = inner(&a, &b, &g).unwrap() * g.determinant().sqrt();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn g2_scaling_and_wedge_identity(phi in positive_form(), c in 0.1..10.0f64) {
        let d = G2PointData::new(phi.clone()).unwrap();
        let s = G2PointData::new(phi.scaled(c)).unwrap();
        let top = wedge_top(&phi, &d.theta).unwrap();
        prop_assert!((top / (7.0 * d.density) - 1.0).abs() < 1e-10);
        prop_assert!((s.density / (d.density * c.powf(7.0 / 3.0)) - 1.0).abs() < 1e-10);
        prop_assert!(close(&s.theta, &d.theta.scaled(c.powf(4.0 / 3.0)), 1e-10));
        let gm = d.metric.matrix() * c.powf(2.0 / 3.0);
        prop_assert!((s.metric.matrix() - gm).norm() < 1e-10 * gm.norm());
    }

    #[test]
    fn d_theta_matches_finite_differences(phi in positive_form(), eta in form(3)) {
        let d = G2PointData::new(phi.clone()).unwrap();
        let lin = d_theta(&d, &eta).unwrap();
        let h = 1e-3 * phi.coefficient_norm() / eta.coefficient_norm();
        let theta = |s: f64| G2PointData::new(phi.add_scaled(s, &eta)).unwrap().theta;
        let central = |h: f64| (&theta(h) - &theta(-h)).scaled(0.5 / h);
        let fd = (&central(h / 2.0).scaled(4.0) - &central(h)).scaled(1.0 / 3.0);
        let err = (&fd - &lin).coefficient_norm() / lin.coefficient_norm();
        prop_assert!(err < 1e-6, "relative error {err:e}");
    }

    #[test]
    fn type_split_is_orthogonal(phi in positive_form(), eta in form(3)) {
        let d = G2PointData::new(phi).unwrap();
        let s = type_decompose(&eta, &d).unwrap();
        prop_assert!(close(&s.sum(), &eta, 1e-12));
        let scale = d.inner3(&eta, &eta);
        for (a, b) in [(&s.pi1, &s.pi7), (&s.pi1, &s.pi27), (&s.pi7, &s.pi27)] {
            prop_assert!(d.inner3(a, b).abs() < 1e-10 * scale);
        }
        // π₂₇ is orthogonal to φ and to every e_i ⌟ Θ
        prop_assert!(d.inner3(&s.pi27, &d.phi).abs() < 1e-10 * scale.sqrt() * d.inner3(&d.phi, &d.phi).sqrt());
        for b in d.type7_basis() {
            prop_assert!(d.inner3(&s.pi27, &b).abs() < 1e-9 * (1.0 + scale));
        }
    }

    #[test]
    fn df_matches_finite_differences(l in lattice(), phi in positive_form(), eta in form(3)) {
        let pt = TorusModuliPoint::new(l, phi.clone()).unwrap();
        let h = 1e-4 * phi.coefficient_norm() / eta.coefficient_norm();
        let f = |s: f64| pt.with_phi(phi.add_scaled(s, &eta)).unwrap().potential_f();
        let fd = (f(h) - f(-h)) / (2.0 * h);
        let exact = pt.d_f(&eta).unwrap();
        prop_assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1e-3 * eta.coefficient_norm()));
    }

    #[test]
    fn hessian_form_is_second_derivative(phi in positive_form(), eta in form(3)) {
        let pt = TorusModuliPoint::new(Lattice::unit(), phi.clone()).unwrap();
        let h = 1e-3 * phi.coefficient_norm() / eta.coefficient_norm();
        let df = |s: f64| {
            let p = pt.with_phi(phi.add_scaled(s, &eta)).unwrap();
            p.d_f(&eta).unwrap()
        };
        let fd = (df(h) - df(-h)) / (2.0 * h);
        let exact = pt.hessian_form(&eta, &eta).unwrap();
        let scale = pt.l2_pairing(&eta, &eta).unwrap();
        prop_assert!((fd - exact).abs() < 1e-5 * scale);
    }

    #[test]
    fn calibration_bounds_random_cycles(l in lattice(), phi in positive_form(),
                                        spanning in prop::array::uniform4(prop::array::uniform7(-3i64..=3))) {
        let pt = TorusModuliPoint::new(l, phi).unwrap();
        if let Ok(m) = cycle_flux_and_volume(&FlatCycle4 { spanning }, &pt) {
            prop_assert!(m.flux.abs() <= m.volume * (1.0 + 1e-9) + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn path_identities(base in positive_form(), v in form(3), a in form(3), r1 in 0.0..0.2f64, r2 in 0.0..0.1f64) {
        let v = v.scaled(r1 * base.coefficient_norm() / v.coefficient_norm());
        let a = a.scaled(r2 * base.coefficient_norm() / a.coefficient_norm());
        let path = ModuliPath::polynomial(Lattice::unit(), vec![base, v, a], 0.0, 1.0);
        prop_assume!(path.is_ok());
        let path = path.unwrap();
        let q = QuadratureSpec::default();
        let t = 0.37;
        let pt = path.point_at(t).unwrap();
        prop_assert!((h_function(&path, t).unwrap() + pt.d_f(&path.velocity(t)).unwrap()).abs() < 1e-12);
        let r = path_report(&path, 0.0, 1.0, FormUsed::HessianForm, &q).unwrap();
        prop_assert!(r.relative_residual() < 1e-6);
        let l2 = path_report(&path, 0.0, 1.0, FormUsed::L2Pairing, &q).unwrap();
        prop_assert!(cauchy_schwarz_check(&l2));
    }
}

fn poly() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 1..7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_second_derivative_integral_matches_quadrature(c in poly(), t in 0.2..3.0f64) {
        let f = CoeffFunction::Polynomial { coefficients: c.clone() };
        let r = regularity(&f, t);
        let d2 = |x: f64| {
            c.iter().enumerate().skip(2).map(|(k, ck)| (k * (k - 1)) as f64 * ck * x.powi(k as i32 - 2)).sum::<f64>()
        };
        let d1 = |x: f64| {
            c.iter().enumerate().skip(1).map(|(k, ck)| k as f64 * ck * x.powi(k as i32 - 1)).sum::<f64>()
        };
        // |f″| has kinks at its roots; many segments keep the rule accurate
        let spec = QuadratureSpec { segments: 4096, target_rel_tol: 1e-10, ..Default::default() };
        let q = integrate(|x| Ok(d2(x).abs()), 0.0, t, &spec).unwrap().value;
        prop_assert!((q - r.integral_abs_second).abs() < 1e-9 * (1.0 + q.abs()));
        let sampled = (0..=4000).map(|i| d1(t * i as f64 / 4000.0).abs()).fold(0.0, f64::max);
        prop_assert!(r.sup_abs_derivative >= sampled * (1.0 - 1e-12));
        prop_assert!(r.sup_abs_derivative <= sampled + 1e-3 * (1.0 + sampled));
    }

    #[test]
    fn certificate_is_monotone(a in -2.0..2.0f64, b in -2.0..2.0f64, g in 0.0..2.0f64, grow in 1.0..3.0f64) {
        let model = |b: f64, bound: f64| -> KummerModel {
            serde_json::from_value(serde_json::json!({
                "T": 1.0, "V0": 1.0, "b1_zero": true,
                "components": [{"name": "U", "singularity_type": "II", "delta_trivial": true,
                  "metric_dominated": true,
                  "classes": [{"class_id": "D", "coefficient": {"kind": "TypeII", "a": a, "b": b},
                               "calib_volume_bound": bound}]}]
            })).unwrap()
        };
        let base = energy_upper_bound(&model(b, g)).unwrap().bounds.energy_bound;
        let more_g = energy_upper_bound(&model(b, g * grow)).unwrap().bounds.energy_bound;
        let more_b = energy_upper_bound(&model(b * grow, g)).unwrap().bounds.energy_bound;
        prop_assert!(more_g >= base);
        // f′ = 2at + 3bt² only grows with |b| when the terms do not cancel
        if a * b >= 0.0 {
            prop_assert!(more_b >= base * (1.0 - 1e-12));
        }
    }

    #[test]
    fn dual_basis_round_trip(v in prop::collection::vec(-1.0..1.0f64, 36)) {
        let m: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..6).map(|j| v[i * 6 + j] + if i == j { 3.0 } else { 0.0 }).collect())
            .collect();
        let d = dual_basis(&m).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let dot: f64 = (0..6).map(|k| m[i][k] * d[j][k]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - expected).abs() < 1e-10);
            }
        }
    }
}

fn cone_segment() -> impl Strategy<Value = (IntersectionForm, ConeClass, ConeClass, f64)> {
    // rank 3, n = 3 with positive coefficients keeps the positive orthant in the cone
    (prop::collection::vec(0.1..2.0f64, 10), prop::collection::vec(0.1..2.0f64, 3),
     prop::collection::vec(0.1..2.0f64, 3), 0.0..0.9f64)
        .prop_map(|(vals, a, w, tau)| {
            let tuples = [[0, 0, 0], [0, 0, 1], [0, 0, 2], [0, 1, 1], [0, 1, 2],
                          [0, 2, 2], [1, 1, 1], [1, 1, 2], [1, 2, 2], [2, 2, 2]];
            let entries: Vec<IntersectionEntry> = tuples
                .iter()
                .zip(&vals)
                .map(|(t, &value)| IntersectionEntry { index: t.to_vec(), value })
                .collect();
            (IntersectionForm::new(3, 3, &entries).unwrap(), ConeClass::new(a), ConeClass::new(w), tau)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kahler_closed_form_matches_quadrature((q, a, w, tau) in cone_segment()) {
        let closed = segment_energy(&a, &w, &q, tau).unwrap();
        let quad = segment_energy_quadrature(&a, &w, &q, tau, &QuadratureSpec::default()).unwrap();
        prop_assert!((closed - quad).abs() < 1e-7 * closed.abs().max(1e-300) + 1e-15);
    }

    #[test]
    fn kahler_energy_is_scale_invariant((q, a, w, tau) in cone_segment(), c in 0.1..10.0f64) {
        let e = segment_energy(&a, &w, &q, tau).unwrap();
        let s = segment_energy(&a.scaled(c), &w.scaled(c), &q, tau).unwrap();
        prop_assert!((e - s).abs() < 1e-9 * (1.0 + e.abs()));
        let v = volume(&a, &q).unwrap();
        prop_assert!((volume(&a.scaled(c), &q).unwrap() / (v * c.powi(3)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minus_log_volume_is_convex_on_segments((q, a, w, _tau) in cone_segment()) {
        let ts: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
        for d in potential_second_differences(&a, &w, &q, &ts, 1e-3).unwrap() {
            prop_assert!(d >= -1e-9);
        }
    }
}

#[test]
fn hyperbolic_convexity_and_reference_vectors() {
    // sanity for the strategies above: the reference form is positive and
    // the hyperbolic segment is convex
    assert!(is_positive(&reference_phi()).unwrap());
    let q = IntersectionForm::hyperbolic();
    let a = ConeClass::new(vec![1.0, 0.0]);
    let w = ConeClass::new(vec![0.0, 1.0]);
    let ds = potential_second_differences(&a, &w, &q, &[0.25, 0.5, 0.75], 1e-3).unwrap();
    for (t, d) in [0.25, 0.5, 0.75].iter().zip(ds) {
        assert!((d * t * t - 1.0).abs() < 1e-5);
    }
}
