//! The three cube-root branches of q, the spectra and eigenfunctions they
//! generate, and the classical turning point of E = igx.
//!
//! Changing branch multiplies q by ω = e^{2πi/3}. The boundary values of Ai
//! and Bi then mix linearly, and the characteristic function changes only by
//! the constant factor ω̄^k: every branch has the same zeros in exact
//! arithmetic. On the complex branches the two terms of f can be
//! exponentially larger than f itself, so in floating point the higher
//! levels drown in cancellation.
//!
//! The alternative reading q³ = −g² is available through [`QConvention`]; it
//! maps every eigenvalue E to −E.

use num_complex::Complex64 as C;
use std::f64::consts::PI;

use crate::eigensolve::{EigenKind, Eigenvalue};
use crate::error::{Error, Result};
use crate::hardbox::{
    self, detect_null_bands, matrix_spectrum, null_vector_wavefunction, phase_projected_roots, refine_complex,
    EnergyBand, HardBoxProblem, Method, Spectrum, NULL_THRESHOLD, SEED_TOL,
};

/// Eigenvalues of different branches closer than this are the same level.
pub const SHARED_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QConvention {
    /// q³ = g², which follows from substituting z = (E − igx)/q.
    GSquared,
    /// q³ = −g².
    MinusGSquared,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchSet {
    pub q: [C; 3],
}

impl BranchSet {
    pub fn get(&self, k: usize) -> C {
        self.q[k % 3]
    }
}

fn omega() -> C {
    C::from_polar(1.0, 2.0 * PI / 3.0)
}

/// The roots of q³ = g². Branch 0 is real and positive for real g; for
/// purely imaginary g it is the real (negative) root, which makes the Airy
/// arguments real. Otherwise it is the root closest to the positive real axis.
pub fn branch_values(g: C) -> BranchSet {
    branch_values_with(g, QConvention::GSquared)
}

pub fn branch_values_with(g: C, conv: QConvention) -> BranchSet {
    let target = match conv {
        QConvention::GSquared => g * g,
        QConvention::MinusGSquared => -(g * g),
    };
    let r = target.norm().cbrt();
    let w = omega();
    let q0 = if target.im == 0.0 {
        // real target: use the real cube root
        C::new(target.re.cbrt(), 0.0)
    } else {
        let base = C::from_polar(r, target.arg() / 3.0);
        [base, base * w, base * w * w]
            .into_iter()
            .min_by(|a, b| a.arg().abs().partial_cmp(&b.arg().abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(base)
    };
    BranchSet { q: [q0, q0 * w, q0 * w * w] }
}

/// Spectrum with q_k in the characteristic equation.
///
/// Branch 0 is exactly [`hardbox::spectrum`]. On branches 1 and 2 real
/// levels are near-zeros of the complex residual that also carry a
/// non-vanishing wavefunction; complex levels are refined from the matrix
/// seeds and dropped when the refinement fails. Missing levels are not an
/// error here.
pub fn spectrum_on_branch(g: C, k: usize, count: usize) -> Result<Spectrum> {
    let p = HardBoxProblem::new(g, k)?;
    if k == 0 {
        return hardbox::spectrum(&p, count);
    }
    if g.re == 0.0 {
        return hardbox::hermitian_spectrum_on_branch(-g.im, k, count);
    }
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    let seeds = matrix_spectrum(g, 40usize.max(2 * count + 10))?.eigenvalues;
    let seeds: Vec<_> = seeds.into_iter().take(count + 1).collect();
    let hi = seeds.iter().map(|s| s.value.re).fold(f64::MIN, f64::max) + 2.0;
    let lo = seeds.iter().map(|s| s.value.re).fold(f64::MAX, f64::min).min(0.0) - 2.0;
    let mut found = Vec::new();
    let grid: Vec<f64> = (0..201).map(|i| -1.0 + i as f64 / 100.0).collect();
    for (r, residual) in phase_projected_roots(&p, lo, hi, 0.01, 1e-12)? {
        let (_, ratio) = null_vector_wavefunction(C::new(r, 0.0), &p, &grid)?;
        if ratio >= NULL_THRESHOLD {
            found.push(Eigenvalue { value: C::new(r, 0.0), kind: EigenKind::Real, residual });
        }
    }
    for s in seeds.iter().filter(|s| s.kind != EigenKind::Real && s.value.im > 0.0) {
        if let Ok(z) = refine_complex(&p, s.value, 1e-12) {
            if (z - s.value).norm() <= SEED_TOL && z.im.abs() > 1e-9 {
                let residual = hardbox::normalized_characteristic(z, &p)?.norm();
                found.push(Eigenvalue { value: z, kind: EigenKind::ConjugatePair, residual });
                found.push(Eigenvalue { value: z.conj(), kind: EigenKind::ConjugatePair, residual });
            }
        }
    }
    found.sort_by(|a, b| {
        a.value.re.partial_cmp(&b.value.re).unwrap_or(std::cmp::Ordering::Equal).then(
            b.value.im.partial_cmp(&a.value.im).unwrap_or(std::cmp::Ordering::Equal),
        )
    });
    found.truncate(count);
    let pt_broken = found.iter().any(|e| e.kind != EigenKind::Real);
    Ok(Spectrum { problem: p, eigenvalues: found, pt_broken, method: Method::Transcendental })
}

/// max |r(x) − median r| / |median r| for r = ψ_j/ψ_k, over grid points where
/// |ψ_k| exceeds 1e-8 of its maximum.
pub fn proportionality_check(e: C, g: C, j: usize, k: usize, x_grid: &[f64]) -> Result<f64> {
    let pj = HardBoxProblem::new(g, j)?;
    let pk = HardBoxProblem::new(g, k)?;
    let (psi_j, _) = null_vector_wavefunction(e, &pj, x_grid)?;
    let (psi_k, _) = null_vector_wavefunction(e, &pk, x_grid)?;
    let top = psi_k.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ratios: Vec<C> = psi_j
        .iter()
        .zip(&psi_k)
        .filter(|(_, b)| b.norm() > 1e-8 * top)
        .map(|(a, b)| a / b)
        .collect();
    if ratios.len() < 3 {
        return Err(Error::DegenerateDenominator);
    }
    let median = |mut v: Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let m = v.len() / 2;
        if v.len() % 2 == 0 {
            0.5 * (v[m - 1] + v[m])
        } else {
            v[m]
        }
    };
    let med = C::new(median(ratios.iter().map(|r| r.re).collect()), median(ratios.iter().map(|r| r.im).collect()));
    Ok(ratios.iter().map(|r| (r - med).norm()).fold(0.0, f64::max) / med.norm())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchComparison {
    pub spectra: [Spectrum; 3],
    /// (branch, index in that branch, index in branch 0) for shared levels.
    pub repeated: Vec<(usize, usize, usize)>,
    /// Branch eigenvalues with no branch-0 counterpart within [`SHARED_TOL`].
    pub unmatched: Vec<(usize, C)>,
    pub bands: [Vec<EnergyBand>; 3],
    /// (branch, eigenvalue, deviation of ψ_k/ψ_0 from a constant).
    pub proportionality: Vec<(usize, C, f64)>,
}

/// Spectra, shared levels, null bands and eigenfunction ratios on all three
/// branches. Bands are searched on `[band_lo, band_hi]` with `band_step`.
pub fn compare_branches(g: C, count: usize, band_window: (f64, f64, f64)) -> Result<BranchComparison> {
    let spectra = [spectrum_on_branch(g, 0, count)?, spectrum_on_branch(g, 1, count)?, spectrum_on_branch(g, 2, count)?];
    let grid: Vec<f64> = (0..101).map(|i| -1.0 + i as f64 / 50.0).collect();
    let mut repeated = Vec::new();
    let mut unmatched = Vec::new();
    let mut proportionality = Vec::new();
    for k in 1..3 {
        for (i, e) in spectra[k].eigenvalues.iter().enumerate() {
            let hit = spectra[0].eigenvalues.iter().position(|b| (b.value - e.value).norm() <= SHARED_TOL);
            match hit {
                Some(j) => {
                    repeated.push((k, i, j));
                    if e.kind == EigenKind::Real {
                        if let Ok(dev) = proportionality_check(e.value, g, k, 0, &grid) {
                            proportionality.push((k, e.value, dev));
                        }
                    }
                }
                None => unmatched.push((k, e.value)),
            }
        }
    }
    let (lo, hi, step) = band_window;
    let mut bands: [Vec<EnergyBand>; 3] = Default::default();
    for (k, slot) in bands.iter_mut().enumerate() {
        *slot = detect_null_bands(&HardBoxProblem::new(g, k)?, lo, hi, step)?;
    }
    Ok(BranchComparison { spectra, repeated, unmatched, bands, proportionality })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TurningPoints {
    pub points: Vec<C>,
    /// Whether the points form a pair ±a + ib.
    pub symmetric_pair: bool,
}

/// Solutions of E = igx: the single point x = −iE/g.
pub fn classical_turning_points(g: C, e: C) -> Result<TurningPoints> {
    if g.norm() == 0.0 {
        return Err(Error::InvalidInput("g must be nonzero".into()));
    }
    let x = -C::new(0.0, 1.0) * e / g;
    Ok(TurningPoints { points: vec![x], symmetric_pair: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minus_convention_is_real_negative_for_real_g() {
        let b = branch_values_with(C::new(8.0, 0.0), QConvention::MinusGSquared);
        assert!((b.q[0] - C::new(-4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn imaginary_coupling_picks_real_root() {
        let b = branch_values(C::new(0.0, 5.0));
        assert_eq!(b.q[0].im, 0.0);
        assert!(b.q[0].re < 0.0);
    }
}
