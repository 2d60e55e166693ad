use num_complex::Complex64 as C;
use pt_spectra::eigensolve::*;
use std::f64::consts::PI;

fn real_g(g: f64) -> C {
    C::new(g, 0.0)
}

fn values(g: C, n: usize) -> Vec<C> {
    eigenvalues(&build_hardbox_matrix(g, n), 1e-10).unwrap().into_iter().map(|e| e.value).collect()
}

fn has(list: &[C], want: C, tol: f64) -> bool {
    list.iter().any(|z| (z - want).norm() <= tol)
}

#[test]
fn matrix_entries() {
    let h = build_hardbox_matrix(real_g(7.0), 1);
    assert!((h.at(0, 0).re - PI * PI / 4.0).abs() < 1e-15);
    assert!((h.at(0, 0).re - 2.4674011).abs() < 1e-7);
    let g = 2.5;
    let h = build_hardbox_matrix(real_g(g), 4);
    let want = C::new(0.0, 32.0 * g / (9.0 * PI * PI));
    assert!((h.at(0, 1) - want).norm() < 1e-15);
    assert_eq!(h.at(0, 2), C::new(0.0, 0.0));
    for r in 0..4 {
        assert_eq!(h.at(r, r).re, ((r + 1) * (r + 1)) as f64 * PI * PI / 4.0);
        for s in 0..4 {
            if (r + s) % 2 == 0 && r != s {
                assert_eq!(h.at(r, s), C::new(0.0, 0.0));
            }
        }
    }
}

#[test]
fn single_level() {
    let e = values(real_g(3.0), 1);
    assert_eq!(e.len(), 1);
    assert!((e[0].re - PI * PI / 4.0).abs() < 1e-14);
}

#[test]
fn g_12_31_lowest_five() {
    let e = values(real_g(12.31), 40);
    let want = [7.03165, 7.1848, 21.7217, 39.1884, 61.4929];
    for (z, w) in e.iter().zip(want) {
        assert!((z.re - w).abs() < 1e-3 && z.im == 0.0, "{z} vs {w}");
    }
}

#[test]
fn g_54_complex_pairs() {
    let e = values(real_g(54.0), 40);
    for w in [C::new(16.7009, 25.0725), C::new(30.8513, 1.9731)] {
        assert!(has(&e, w, 5e-3), "missing {w}");
        assert!(has(&e, w.conj(), 5e-3), "missing {}", w.conj());
    }
}

#[test]
fn determinant_examples() {
    let h = build_hardbox_matrix(real_g(1.0), 1);
    assert!(det_characteristic(&h, C::new(PI * PI / 4.0, 0.0)).norm() < 1e-15);
    let h = build_hardbox_matrix(real_g(0.0), 2);
    let d = det_characteristic(&h, C::new(0.0, 0.0));
    assert!((d.re - PI.powi(4) / 4.0).abs() < 1e-12);
}

#[test]
fn determinant_roots_match_eigenvalues() {
    let h = build_hardbox_matrix(real_g(12.31), 30);
    let ev = eigenvalues(&h, 1e-10).unwrap();
    for e in ev.iter().take(8) {
        let seed = e.value + C::new(1e-3, 1e-3);
        let r = det_root(&h, seed, 1e-12).unwrap();
        assert!((r - e.value).norm() < 1e-6, "{r} vs {}", e.value);
    }
}

#[test]
fn structural_residuals() {
    for g in [0.0, 3.4, 12.31, 54.0] {
        let h = build_hardbox_matrix(real_g(g), 10);
        assert!(pseudo_hermiticity_residual(&h) <= 1e-14);
        assert!(symmetry_residual(&h) <= 1e-14);
    }
    assert_eq!(pseudo_hermiticity_residual(&build_hardbox_matrix(real_g(0.0), 10)), 0.0);
    assert!(pseudo_hermiticity_residual(&build_hardbox_matrix(C::new(0.0, 5.0), 10)) > 1e-3);
    assert_eq!(symmetry_residual(&build_hardbox_matrix(real_g(1.0), 1)), 0.0);
    assert!(symmetry_residual(&build_hardbox_matrix(real_g(54.0), 40)) <= 1e-14);
}

#[test]
fn truncation_stability() {
    let a = values(real_g(12.31), 30);
    let b = values(real_g(12.31), 40);
    for i in 0..5 {
        assert!((a[i] - b[i]).norm() < 1e-4, "level {i}: {} vs {}", a[i], b[i]);
    }
}

#[test]
fn conjugate_closure_and_sign_invariance() {
    for g in [5.0, 12.32, 53.0, 80.0] {
        let e = values(real_g(g), 40);
        for z in &e {
            assert!(has(&e, z.conj(), 1e-8));
        }
        let m = values(real_g(-g), 40);
        assert_eq!(e.len(), m.len());
        for (a, b) in e.iter().zip(&m) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn ordering_is_deterministic() {
    let ev = eigenvalues(&build_hardbox_matrix(real_g(54.0), 40), 1e-10).unwrap();
    for w in ev.windows(2) {
        assert!(w[0].value.re <= w[1].value.re + 1e-12);
    }
    for (i, e) in ev.iter().enumerate() {
        if e.kind == EigenKind::ConjugatePair && e.value.im > 0.0 {
            assert_eq!(ev[i + 1].value, e.value.conj());
        }
        assert!(e.residual <= 1e-10);
    }
}

#[test]
fn single_precision_build() {
    let h = build_hardbox_matrix(num_complex::Complex32::new(12.31, 0.0), 20);
    let ev = eigenvalues(&h, 1e-3).unwrap();
    assert!((ev[0].value.re - 7.03165).abs() < 0.05);
}
