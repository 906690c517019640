use degentrace::jets::{Jet, VectorJet};
use degentrace::spectrum::{closed_form_spectrum, weyl_quantize, OperatorModel, Window};
use degentrace::symbols::{make_symbol, sphere_integral, Extremum};
use degentrace::trace::{fejer_phi, fit_exponent, gamma_sum, lambda0_predict, pairing, Side, TestFunction};
use proptest::prelude::*;

fn jet(dim: usize, order: usize, coeffs: &[f64], from_degree: usize) -> Jet {
    let mut j = Jet::zero(dim, order);
    let start = j.basis().degree_range(from_degree.min(order)).start;
    for (c, v) in j.coeffs_mut()[start..].iter_mut().zip(coeffs) {
        *c = *v;
    }
    j
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jet_ring_laws(a in coeffs(28), b in coeffs(28), c in coeffs(28)) {
        let (x, y, z) = (jet(2, 6, &a, 0), jet(2, 6, &b, 0), jet(2, 6, &c, 0));
        prop_assert!((&(&x * &y) * &z).max_abs_diff(&(&x * &(&y * &z))) < 1e-12);
        prop_assert!((&x * &y).max_abs_diff(&(&y * &x)) < 1e-15);
        prop_assert!((&x * &(&y + &z)).max_abs_diff(&(&(&x * &y) + &(&x * &z))) < 1e-13);
    }

    #[test]
    fn chain_rule(a in coeffs(28), g0 in coeffs(27), g1 in coeffs(27)) {
        // d/dz₀ f(g(z)) = Σ_i (∂_i f)(g) ∂₀g_i, exact below the truncation order
        let f = jet(2, 6, &a, 0);
        let g = [jet(2, 6, &g0, 1), jet(2, 6, &g1, 1)];
        let lhs = f.compose(&g).unwrap().diff(0).unwrap().with_order(5);
        let g5: Vec<Jet> = g.iter().map(|gi| gi.with_order(5)).collect();
        let mut rhs = Jet::zero(2, 5);
        for (i, gi) in g.iter().enumerate() {
            let dfi = f.diff(i).unwrap().compose(&g5).unwrap();
            rhs.axpy(1.0, &(&dfi * &gi.diff(0).unwrap().with_order(5)));
        }
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-11, "{}", lhs.max_abs_diff(&rhs));
    }

    #[test]
    fn composition_is_associative(a in coeffs(27), b in coeffs(27), c in coeffs(27)) {
        let f = VectorJet::new(vec![jet(2, 5, &a, 1), jet(2, 5, &b, 1)]).unwrap();
        let g = VectorJet::new(vec![jet(2, 5, &b, 1), jet(2, 5, &c, 1)]).unwrap();
        let h = VectorJet::new(vec![jet(2, 5, &c, 1), jet(2, 5, &a, 1)]).unwrap();
        let l = f.compose(&g).unwrap().compose(&h).unwrap();
        let r = f.compose(&g.compose(&h).unwrap()).unwrap();
        prop_assert!(l.max_abs_diff(&r) < 1e-11);
    }

    #[test]
    fn weyl_quantization_is_linear(a in coeffs(5), b in coeffs(5), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let mono = [vec![4, 0], vec![3, 1], vec![2, 2], vec![1, 3], vec![0, 4]];
        let ta: Vec<(Vec<usize>, f64)> = mono.iter().cloned().zip(a.iter().cloned()).collect();
        let tb: Vec<(Vec<usize>, f64)> = mono.iter().cloned().zip(b.iter().cloned()).collect();
        let tc: Vec<(Vec<usize>, f64)> = mono.iter().cloned().zip(a.iter().zip(&b).map(|(x, y)| s * x + t * y)).collect();
        let q = |terms: &[(Vec<usize>, f64)]| weyl_quantize(terms, 1, 24, 0.1).unwrap();
        let d = q(&tc).sub(&q(&ta).scale(s).add(&q(&tb).scale(t)));
        prop_assert!(d.re.max_abs().max(d.im.max_abs()) < 1e-13);
    }

    #[test]
    fn sphere_integral_is_rotation_invariant(c in prop::collection::vec(0.2f64..1.0, 3), angle in 0.0f64..6.3) {
        // x⁴ + ξ⁴ + c x²ξ² style definite quartic, rotated in the (x, ξ) plane
        let p = Jet::from_terms(2, 4, &[(vec![4, 0], c[0]), (vec![2, 2], c[1]), (vec![0, 4], c[2])]).unwrap();
        let (co, si) = (angle.cos(), angle.sin());
        let rot = [
            Jet::from_terms(2, 4, &[(vec![1, 0], co), (vec![0, 1], -si)]).unwrap(),
            Jet::from_terms(2, 4, &[(vec![1, 0], si), (vec![0, 1], co)]).unwrap(),
        ];
        let q = p.compose(&rot).unwrap();
        let i1 = sphere_integral(&make_symbol(1, 0.0, vec![p], 0.0).unwrap(), 1e-12).unwrap();
        let i2 = sphere_integral(&make_symbol(1, 0.0, vec![q], 0.0).unwrap(), 1e-12).unwrap();
        prop_assert!((i1 - i2).abs() < 1e-9 * i1);
    }

    #[test]
    fn pairing_sign_symmetry(p in -1.0f64..1.0, alpha in -0.9f64..0.0, c in -0.5f64..0.5) {
        let f = fejer_phi(1.0).unwrap().shifted(c);
        let a = pairing(&f, p, alpha, Side::Minus, 1e-11).unwrap();
        let b = pairing(&f.reflected(), -p, alpha, Side::Plus, 1e-11).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn gamma_and_lambda0_are_linear(w1 in -2.0f64..2.0, w2 in -2.0f64..2.0, c in -0.5f64..0.5) {
        let f1 = fejer_phi(1.0).unwrap();
        let f2 = fejer_phi(0.7).unwrap().shifted(c);
        let comb = TestFunction::combination(vec![(w1, f1.clone()), (w2, f2.clone())]).unwrap();
        let model = OperatorModel::osc_power(1, 2, Extremum::Minimum).unwrap();
        let s = model.symbol().unwrap();
        let l = |f: &TestFunction| lambda0_predict(&s, f, 1e-12).unwrap().lambda0;
        prop_assert!((l(&comb) - (w1 * l(&f1) + w2 * l(&f2))).abs() < 1e-10);
        let h = 1e-3;
        let spec = closed_form_spectrum(&model, h, Window::around(0.0, 0.5).unwrap()).unwrap();
        let g = |f: &TestFunction| gamma_sum(&spec, 0.0, h, f, 0.5).unwrap();
        prop_assert!((g(&comb) - (w1 * g(&f1) + w2 * g(&f2))).abs() < 1e-10 * g(&f1));
    }

    #[test]
    fn max_min_duality(h in 1e-4f64..1e-2, c in -0.5f64..0.5) {
        let f = fejer_phi(1.0).unwrap().shifted(c);
        let w = Window::around(0.0, 0.5).unwrap();
        let lo = OperatorModel::osc_power(1, 2, Extremum::Minimum).unwrap();
        let hi = OperatorModel::osc_power(1, 2, Extremum::Maximum).unwrap();
        let g_hi = gamma_sum(&closed_form_spectrum(&hi, h, w).unwrap(), 0.0, h, &f, 0.5).unwrap();
        let g_lo = gamma_sum(&closed_form_spectrum(&lo, h, w).unwrap(), 0.0, h, &f.reflected(), 0.5).unwrap();
        prop_assert_eq!(g_hi, g_lo);
    }

    #[test]
    fn fit_recovers_power_laws(slope in -2.0f64..0.0, scale in 0.01f64..100.0) {
        let pts: Vec<(f64, f64)> = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3].iter().map(|&h: &f64| (h, scale * h.powf(slope))).collect();
        let fit = fit_exponent(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-12 && (fit.intercept - scale.ln()).abs() < 1e-11);
    }

    #[test]
    fn n2_level_counts(h in 0.02f64..0.2) {
        // levels (2J + 2)h ≤ 1 with multiplicity J + 1
        let m = OperatorModel::osc_power(2, 2, Extremum::Minimum).unwrap();
        let spec = closed_form_spectrum(&m, h, Window::new(-1.0, 1.0).unwrap()).unwrap();
        let jmax = ((1.0 / h - 2.0) / 2.0).floor() as u64;
        prop_assert_eq!(spec.count(), (jmax + 1) * (jmax + 2) / 2);
    }
}
