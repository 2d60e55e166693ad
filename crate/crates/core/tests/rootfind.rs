use num_complex::Complex64 as C;
use proptest::prelude::*;
use pt_spectra::rootfind::*;
use pt_spectra::Error;
use std::f64::consts::PI;

fn roots_of(f: impl Fn(f64) -> f64 + Copy, lo: f64, hi: f64, step: f64) -> Vec<f64> {
    scan_brackets(|x| Ok(f(x)), lo, hi, step)
        .unwrap()
        .into_iter()
        .map(|b| refine_real(|x| Ok(f(x)), b, 1e-12).unwrap())
        .collect()
}

#[test]
fn scan_finds_sqrt_two() {
    let brs = scan_brackets(|e: f64| Ok(e * e - 2.0), 0.0, 2.0, 0.1).unwrap();
    assert_eq!(brs.len(), 1);
    assert!(brs[0].lo < 2f64.sqrt() && brs[0].hi > 2f64.sqrt());
}

#[test]
fn scan_finds_sine_zeros() {
    let r = roots_of(|e| (PI * e).sin(), 0.5, 3.5, 0.1);
    assert_eq!(r.len(), 3);
    for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn scan_without_roots_is_empty() {
    assert!(scan_brackets(|e: f64| Ok(e * e + 1.0), -2.0, 2.0, 0.1).unwrap().is_empty());
}

#[test]
fn scan_rejects_non_finite() {
    let r = scan_brackets(|e: f64| Ok(if e == 1.0 { f64::NAN } else { e }), 0.0, 2.0, 0.5);
    assert!(matches!(r, Err(Error::NonFinite(_))));
}

#[test]
fn brent_examples() {
    let b = Bracket { lo: 1.0, hi: 2.0, f_lo: -1.0, f_hi: 2.0 };
    let r = refine_real(|e: f64| Ok(e * e - 2.0), b, 1e-12).unwrap();
    assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    let b = Bracket { lo: 1.0, hi: 2.0, f_lo: 1f64.cos(), f_hi: 2f64.cos() };
    let r = refine_real(|e: f64| Ok(e.cos()), b, 1e-12).unwrap();
    assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn brent_reports_non_finite() {
    let b = Bracket { lo: 0.0, hi: 2.0, f_lo: -1.0, f_hi: 1.0 };
    let r = refine_real(|e: f64| Ok(if e > 0.5 { f64::NAN } else { e - 1.0 }), b, 1e-12);
    assert!(matches!(r, Err(Error::ToleranceNotMet(_))));
}

#[test]
fn newton_examples() {
    let i = newton_complex(|z: C| Ok(z * z + 1.0), C::new(0.5, 0.5), 1e-12).unwrap();
    assert!((i - C::new(0.0, 1.0)).norm() < 1e-10);
    let w = newton_complex(|z: C| Ok(z * z * z - 1.0), C::new(-1.0, 1.0), 1e-12).unwrap();
    assert!((w - C::from_polar(1.0, 2.0 * PI / 3.0)).norm() < 1e-10);
    let mi = newton_complex(|z: C| Ok(z * z + 1.0), C::new(0.5, -0.5), 1e-12).unwrap();
    assert!((mi - C::new(0.0, -1.0)).norm() < 1e-10);
}

#[test]
fn newton_fails_on_flat_function() {
    let r = newton_complex(|_z: C| Ok(C::new(1.0, 0.0)), C::new(0.0, 0.0), 1e-12);
    assert!(matches!(r, Err(Error::NoConvergence(_))));
}

#[test]
fn argument_principle_counts() {
    let f = |z: C| Ok(z * z + 1.0);
    assert_eq!(count_roots_rect(f, (-2.0, 2.0, 0.5, 2.0), 32).unwrap(), 1);
    assert_eq!(count_roots_rect(f, (-2.0, 2.0, -2.0, 2.0), 32).unwrap(), 2);
    assert_eq!(count_roots_rect(|z: C| Ok(z.exp()), (-3.0, 1.0, -7.0, 9.0), 16).unwrap(), 0);
}

#[test]
fn argument_principle_root_on_contour() {
    let r = count_roots_rect(|z: C| Ok(z * z + 1.0), (-1.0, 1.0, -1.0, 1.0), 8);
    assert!(matches!(r, Err(Error::RootOnContour { .. })));
}

#[test]
fn argument_principle_is_additive() {
    let f = |z: C| Ok((z - C::new(0.3, 0.2)) * (z + C::new(0.7, -0.4)) * (z - C::new(-0.2, -0.9)) * z.exp());
    let whole = count_roots_rect(f, (-1.5, 1.5, -1.5, 1.5), 24).unwrap();
    let quads = [(-1.5, 0.05, -1.5, 0.05), (0.05, 1.5, -1.5, 0.05), (-1.5, 0.05, 0.05, 1.5), (0.05, 1.5, 0.05, 1.5)];
    let sum: i64 = quads.iter().map(|&r| count_roots_rect(f, r, 24).unwrap()).sum();
    assert_eq!(whole, 3);
    assert_eq!(sum, whole);
}

#[test]
fn tracking_into_a_double_root() {
    let path = track_root(|g: f64, e: f64| Ok(e * e - g), 1.0, 1.0, 0.0, 10).unwrap();
    assert!(path.coalesced);
    let (g, e) = path.coalescence.unwrap();
    assert!(g.abs() < 0.1 + 1e-12);
    assert!(e.abs() < 0.05);
    assert!(path.roots.last().unwrap().re.abs() < 0.05);
    assert_eq!(path.params.len(), path.roots.len());
}

#[test]
fn tracking_a_straight_line() {
    let path = track_root(|g: f64, e: f64| Ok(e - g), 0.0, 0.0, 5.0, 50).unwrap();
    assert!(!path.coalesced);
    assert_eq!(path.roots.len(), 51);
    for (g, e) in path.params.iter().zip(&path.roots) {
        assert!((e.re - g).abs() < 1e-10);
    }
}

#[test]
fn tracking_through_a_fold() {
    // pair ±sqrt(1-g) disappears at g = 1 between grid points
    let path = track_root(|g: f64, e: f64| Ok(e * e - (1.0 - g)), 1.0, 0.0, 1.5, 7).unwrap();
    assert!(path.coalesced);
    let (g, _) = path.coalescence.unwrap();
    assert!((0.8..=1.1).contains(&g));
}

#[test]
fn coalescence_of_analytic_double_root() {
    let c = find_coalescence(|g: f64, e: f64| Ok(e * e - (3.0 - g)), (2.0, 4.0), (-1.0, 1.5)).unwrap();
    assert!((c.g - 3.0).abs() < 1e-8);
    assert!(c.e.abs() < 1e-6);
    assert!(c.residual_f <= 1e-8 && c.residual_df <= 1e-8);
}

proptest! {
    #[test]
    fn brent_stays_in_bracket(a in -10.0f64..10.0, w in 0.01f64..5.0, r in 0.0f64..1.0) {
        let root = a + r * w;
        let f = |x: f64| Ok((x - root).powi(3) + 0.1 * (x - root));
        let b = Bracket { lo: a, hi: a + w, f_lo: f(a).unwrap(), f_hi: f(a + w).unwrap() };
        prop_assume!(b.f_lo * b.f_hi <= 0.0);
        let x = refine_real(f, b, 1e-12).unwrap();
        prop_assert!(x >= a && x <= a + w);
        prop_assert!((x - root).abs() < 1e-9);
    }

    #[test]
    fn conjugate_seeds_give_conjugate_roots(re in -3.0f64..3.0, im in 0.2f64..3.0) {
        // real-coefficient polynomial
        let f = |z: C| Ok(z * z * z - z * 2.0 + 5.0);
        let a = newton_complex(f, C::new(re, im), 1e-12);
        let b = newton_complex(f, C::new(re, -im), 1e-12);
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!((a.conj() - b).norm() < 1e-9);
        }
    }
}
