use pt_spectra::softbox::*;

fn levels(g: f64) -> Vec<f64> {
    bound_spectrum(&SoftBoxProblem::new(g)).unwrap().eigenvalues
}

/// Even state of the real well of depth v1 and half-width 1: K tan K = κ,
/// K² + κ² = v1, solved by bisection on (0, min(√v1, π/2)).
fn even_level(v1: f64) -> f64 {
    let f = |k: f64| k * k.tan() - (v1 - k * k).sqrt();
    let (mut a, mut b) = (1e-12, v1.sqrt().min(std::f64::consts::FRAC_PI_2 - 1e-12));
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(a) * f(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    let k = 0.5 * (a + b);
    k * k - v1
}

#[test]
fn characteristic_examples() {
    for (g, e) in [(1.2, -0.40891), (0.6, -2.58012)] {
        let p = SoftBoxProblem::new(g);
        let v = normalized_bound_characteristic(e, &p).unwrap();
        assert!(v.abs() <= 1e-4, "g={g}: {v}");
    }
}

#[test]
fn residual_is_imaginary_on_negative_axis() {
    for g in [0.1, 0.6, 1.2, 2.0, 5.0] {
        for exterior in [Exterior::Growing, Exterior::Decaying] {
            let p = SoftBoxProblem::with_exterior(g, exterior);
            for i in 1..=500 {
                let e = -(g * g + 10.0) * i as f64 / 500.0;
                let d = bound_residual(e, &p).unwrap();
                assert!(d.re.abs() <= 1e-10 * d.norm(), "g={g} E={e} {d}");
            }
        }
    }
}

#[test]
fn bound_pairs() {
    let cases = [(1.2, -0.40891, -0.14426), (0.6, -2.58012, -0.00275)];
    for (g, e1, e2) in cases {
        let l = levels(g);
        assert_eq!(l.len(), 2, "g={g}: {l:?}");
        assert!((l[0] - e1).abs() < 1e-4 && (l[1] - e2).abs() < 1e-4, "g={g}: {l:?}");
    }
    let l = levels(0.1);
    assert_eq!(l.len(), 2);
    assert!((l[0] + 9.29466).abs() < 1e-4);
    assert!((l[1] + 1.7849e-6).abs() / 1.7849e-6 < 1e-1, "{l:?}");
}

#[test]
fn no_levels_past_critical() {
    for g in [1.3, 2.0, 5.0] {
        let r = bound_spectrum(&SoftBoxProblem::new(g)).unwrap();
        assert!(r.eigenvalues.is_empty() && r.merged, "g={g}: {r:?}");
    }
}

#[test]
fn at_most_two_negative_levels() {
    for i in 1..=20 {
        let g = 0.5 * i as f64;
        let l = levels(g);
        assert!(l.len() <= 2 && l.iter().all(|e| *e < 0.0), "g={g}: {l:?}");
    }
}

#[test]
fn sign_of_coupling_does_not_matter() {
    for g in [0.1, 0.6, 1.2] {
        let (a, b) = (levels(g), levels(-g));
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-8 * x.abs().max(1e-6), "{x} {y}");
        }
    }
}

#[test]
fn decaying_exterior_has_no_bound_states() {
    for g in [0.1, 0.6, 1.2] {
        let r = bound_spectrum(&SoftBoxProblem::with_exterior(g, Exterior::Decaying)).unwrap();
        assert!(r.eigenvalues.is_empty(), "g={g}: {r:?}");
    }
}

#[test]
fn reported_states_decay_outside() {
    let x = [-2.0, -1.0, 1.0, 2.0];
    for g in [0.6, 1.2] {
        let p = SoftBoxProblem::new(g);
        for e in levels(g) {
            let psi = bound_wavefunction(e, &p, &x).unwrap();
            assert!(psi[0].norm() < psi[1].norm() && psi[3].norm() < psi[2].norm(), "g={g} E={e} {psi:?}");
        }
    }
}

#[test]
fn wavefunction_is_continuous_at_walls() {
    let p = SoftBoxProblem::new(1.2);
    for e in levels(1.2) {
        let h = 1e-7;
        let psi = bound_wavefunction(e, &p, &[-1.0 - h, -1.0 + h, 1.0 - h, 1.0 + h]).unwrap();
        assert!((psi[0] - psi[1]).norm() < 1e-5 && (psi[2] - psi[3]).norm() < 1e-5, "{psi:?}");
    }
}

#[test]
fn critical_coupling() {
    let c = soft_critical().unwrap();
    assert!((1.22..=1.23).contains(&c.g_c), "{c:?}");
    assert!(c.e_c < 0.0 && (c.e_c.abs() - 0.24994).abs() < 1e-3, "{c:?}");
    assert!(c.residual_f <= 1e-8 && c.residual_df <= 1e-8);
    assert_eq!(levels(c.g_c - 0.01).len(), 2);
    assert_eq!(levels(c.g_c + 0.01).len(), 0);
}

#[test]
fn shallow_level_approaches_zero() {
    let shallow: Vec<f64> = [1.2, 0.6, 0.1].iter().map(|&g| levels(g)[1]).collect();
    assert!(shallow.windows(2).all(|w| w[0] < w[1] && w[1] < 0.0), "{shallow:?}");
    let deep: Vec<f64> = [1.2, 0.6, 0.1].iter().map(|&g| levels(g)[0]).collect();
    assert!(deep.windows(2).all(|w| w[1] < w[0]), "{deep:?}");
    assert!(deep[2] > -10.0);
}

#[test]
fn free_limit_spread_decreases() {
    let s = free_limit_check(&[0.5, 0.2, 0.1]).unwrap();
    assert!(s.windows(2).all(|w| w[1] < w[0]), "{s:?}");
}

#[test]
fn reflectionless_has_no_roots() {
    for g in [0.5, 1.0] {
        let r = reflectionless_scan(&SoftBoxProblem::new(g), 1e-6, 50.0, 0.01).unwrap();
        assert!(r.roots.is_empty(), "g={g}: {r:?}");
        assert!(r.min_abs_residual > 0.0 && r.min_rel_residual > 1e-3);
    }
}

#[test]
fn reflectionless_residual_is_complex() {
    let p = SoftBoxProblem::new(1.0);
    let (mut re, mut im) = (false, false);
    for i in 1..=100 {
        let z = reflectionless_residual(0.5 * i as f64, &p).unwrap().0.to_complex().unwrap();
        re |= z.re.abs() > 1e-6 * z.norm();
        im |= z.im.abs() > 1e-6 * z.norm();
    }
    assert!(re && im);
}

#[test]
fn imaginary_rectangular_well_is_empty() {
    for v2 in [1.0, 5.0, 20.0] {
        assert!(rect_well_spectrum(0.0, v2).unwrap().is_empty(), "v2={v2}");
    }
    assert!(rect_well_spectrum(0.0, 0.0).unwrap().is_empty());
}

#[test]
fn real_rectangular_well_matches_oracle() {
    let l = rect_well_spectrum(2.0, 0.0).unwrap();
    assert_eq!(l.len(), 1);
    assert!((l[0] - even_level(2.0)).abs() < 1e-8, "{} {}", l[0], even_level(2.0));
}

#[test]
fn deeper_real_well_counts_levels() {
    // depth 10: K up to 3.16, so two even and one odd state
    let l = rect_well_spectrum(10.0, 0.0).unwrap();
    assert_eq!(l.len(), 3, "{l:?}");
    assert!((l[0] - even_level(10.0)).abs() < 1e-8);
}

#[test]
fn imaginary_step_is_empty() {
    for v0 in [0.0, 3.0, 10.0] {
        assert!(step_well_spectrum(v0).unwrap().is_empty(), "v0={v0}");
    }
}

#[test]
fn invalid_inputs() {
    assert!(bound_spectrum(&SoftBoxProblem::new(0.0)).is_err());
    assert!(bound_characteristic(0.5, &SoftBoxProblem::new(1.0)).is_err());
    assert!(reflectionless_scan(&SoftBoxProblem::new(1.0), 0.0, 1.0, 0.1).is_err());
    assert!(free_limit_check(&[0.0]).is_err());
}
