use std::f64::consts::PI;

use conformal_euler::analysis::{fold_once, Side};
use conformal_euler::conformal::{Atom, BoundaryMeasure};
use conformal_euler::disc::{angle_gap, wrap_angle, DiscPoint};
use conformal_euler::dynamics::lad_line;
use conformal_euler::moduli::{Modulus, RateFunctions};
use conformal_euler::velocity::{kernel, kernel_components, VorticityField};
use num_complex::Complex64;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = DiscPoint<f64>> {
    (1e-6f64..1.0, -PI..PI).prop_map(|(d, phi)| DiscPoint::new(d, phi))
}

proptest! {
    #[test]
    fn wrap_angle_lands_in_range(x in -50.0f64..50.0) {
        let y = wrap_angle(x);
        prop_assert!(y > -PI && y <= PI);
        let k = (x - y) / (2.0 * PI);
        prop_assert!((k - k.round()).abs() < 1e-12);
    }

    #[test]
    fn angle_gap_is_a_wrapped_difference(a in -PI..PI, b in -PI..PI) {
        let g = angle_gap(a, b);
        prop_assert!(g.abs() <= PI + 1e-15);
        prop_assert!((g - wrap_angle(b - a)).abs() < 1e-12 || (g.abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn distances_match_complex_arithmetic(z in point(), w in point()) {
        let (zc, wc) = (z.to_complex(), w.to_complex());
        prop_assert!(((zc - wc).norm_sqr() - z.dist2(&w)).abs() < 1e-12);
        let refl = zc * wc.norm_sqr() - wc;
        prop_assert!((refl.norm_sqr() - z.reflected_dist2(&w)).abs() < 1e-12);
    }

    #[test]
    fn kernel_components_project_the_kernel(z in point(), w in point()) {
        prop_assume!(z.dist2(&w) > 1e-6);
        let (zc, wc) = (z.to_complex(), w.to_complex());
        let ik = Complex64::i() * kernel(zc, wc);
        let e = Complex64::from_polar(1.0, z.phi);
        let expected = [(ik * e.conj()).re, (ik * e.conj()).im];
        let got = kernel_components(&z, &w);
        let scale = ik.norm().max(1.0);
        prop_assert!((got[0] - expected[0]).abs() < 1e-8 * scale, "{:?} {:?}", got, expected);
        prop_assert!((got[1] - expected[1]).abs() < 1e-8 * scale, "{:?} {:?}", got, expected);
    }

    #[test]
    fn odd_half_is_antisymmetric(z in point(), c in 0.1f64..5.0) {
        prop_assume!(z.phi.abs() > 1e-9 && (z.phi.abs() - PI).abs() > 1e-9);
        let w = VorticityField::odd_half(c);
        prop_assert_eq!(w.value_at(&z.conj()), -w.value_at(&z));
    }

    #[test]
    fn folds_conserve_mass(
        ts in -PI..PI,
        delta in 0.05f64..1.5,
        raw in prop::collection::vec((-1.99f64..1.99, 0.01f64..2.0), 1..8),
        left in any::<bool>(),
    ) {
        let atoms: Vec<Atom<f64>> = raw.iter().map(|&(o, m)| Atom { theta: wrap_angle(ts + o * delta), mass: m }).collect();
        let beta = BoundaryMeasure::new(atoms, 0.0).unwrap();
        let side = if left { Side::Left } else { Side::Right };
        let folded = fold_once(&beta, ts, delta, side).unwrap();
        prop_assert!((folded.total_mass() - beta.total_mass()).abs() < 1e-13 * beta.total_mass());
        for a in folded.atoms() {
            let o = angle_gap(ts, a.theta);
            if left {
                prop_assert!(o >= -delta - 1e-12 && o <= 2.0 * delta + 1e-12);
            } else {
                prop_assert!(o <= delta + 1e-12 && o >= -2.0 * delta - 1e-12);
            }
        }
    }

    #[test]
    fn lad_line_recovers_exact_lines(a in -5.0f64..5.0, b in -5.0f64..5.0, n in 3usize..40) {
        let ts: Vec<f64> = (0..n).map(|i| i as f64 * 0.37).collect();
        let ys: Vec<f64> = ts.iter().map(|t| a * t + b).collect();
        let (s, c) = lad_line(&ts, &ys);
        prop_assert!((s - a).abs() < 1e-6 && (c - b).abs() < 1e-5);
    }

    #[test]
    fn rate_integral_decreases_in_y(a in 0.0f64..3.0, y1 in 1e-9f64..0.9, f in 1.01f64..10.0) {
        let rates = RateFunctions::new(Modulus::capped_log(a).unwrap());
        let y2 = (y1 * f).min(1.0);
        prop_assert!(rates.rate_integral(y1).unwrap() > rates.rate_integral(y2).unwrap());
        prop_assert!(rates.q(y1).unwrap() > 0.0);
    }
}
