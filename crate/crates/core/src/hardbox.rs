//! The hard box: V(x) = igx for |x| < 1 with Dirichlet walls at x = ±1.
//!
//! Inside the box ψ(x) = C·Ai(z) + Bi(z) with z = (E − igx)/q and q³ = g².
//! The walls give the characteristic function
//! f(E) = Ai(s)Bi(t) − Ai(t)Bi(s), s = (E + ig)/q, t = (E − ig)/q,
//! which for real g and real E is i times a real function.
//!
//! A purely imaginary coupling g = ib describes the Hermitian potential
//! V = −bx; then branch 0 uses the real root of q³ = g² and f is real.

use num_complex::Complex64 as C;
use rayon::prelude::*;

use crate::airy::{airy_scaled, ScaledAiry};
use crate::branches::branch_values;
use crate::eigensolve::{build_hardbox_matrix, eigenvalues, EigenKind, Eigenvalue, DEFAULT_N};
use crate::error::{Error, Result};
use crate::rootfind::{find_coalescence, newton_complex, refine_real, scan_brackets, Bracket, DEFAULT_SCAN_STEP};
use crate::scalar::Scaled;

/// Couplings below this use the free box formula.
pub const SMALL_G: f64 = 1e-6;
/// Default upper end of the real energy window: 25π²/4 + 10.
pub const DEFAULT_E_MAX: f64 = 25.0 * std::f64::consts::PI * std::f64::consts::PI / 4.0 + 10.0;
/// Matrix seeds and transcendental roots farther apart than this are reported.
pub const SEED_TOL: f64 = 1e-2;
/// A boundary null vector whose wavefunction is smaller than this fraction of
/// its Airy components is a null eigenvector.
pub const NULL_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardBoxProblem {
    pub g: C,
    /// Index k of q_k = ω^k q_0.
    pub branch: usize,
}

/// How the characteristic function is made real on the real energy axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RealForm {
    /// Real g on branch 0: f is i times a real function.
    Imaginary,
    /// Imaginary g on branch 0: f is real.
    Real,
}

impl HardBoxProblem {
    pub fn new(g: C, branch: usize) -> Result<Self> {
        if branch > 2 {
            return Err(Error::InvalidInput(format!("branch {branch} not in 0..=2")));
        }
        if !(g.re.is_finite() && g.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coupling".into()));
        }
        Ok(Self { g, branch })
    }

    /// The PT-symmetric box with real coupling `g`.
    pub fn pt(g: f64) -> Self {
        Self { g: C::new(g, 0.0), branch: 0 }
    }

    /// The Hermitian box V = gx, written as igx with an imaginary coupling.
    pub fn hermitian(g: f64) -> Self {
        Self { g: C::new(0.0, -g), branch: 0 }
    }

    pub fn q(&self) -> C {
        branch_values(self.g).get(self.branch)
    }

    pub fn real_form(&self) -> Option<RealForm> {
        if self.branch != 0 {
            None
        } else if self.g.im == 0.0 {
            Some(RealForm::Imaginary)
        } else if self.g.re == 0.0 {
            Some(RealForm::Real)
        } else {
            None
        }
    }

    fn is_small(&self) -> bool {
        self.g.norm() < SMALL_G
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Transcendental,
    Matrix,
    /// Free box formula n²π²/4.
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub problem: HardBoxProblem,
    pub eigenvalues: Vec<Eigenvalue<f64>>,
    pub pt_broken: bool,
    pub method: Method,
}

impl Spectrum {
    pub fn values(&self) -> Vec<C> {
        self.eigenvalues.iter().map(|e| e.value).collect()
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.eigenvalues.iter().filter(|e| e.kind == EigenKind::Real).map(|e| e.value.re).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExceptionalPoint {
    pub g_c: f64,
    pub e_c: f64,
    /// Zero-based index of the lower merging level among the real levels.
    pub pair_index: usize,
    /// E_G(g_c + 0.005) − E_G(g_c − 0.005), E_G the lowest real level.
    /// None when no real level survives on one side.
    pub ground_jump: Option<f64>,
    pub residual_f: f64,
    pub residual_df: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBand {
    pub g: C,
    pub branch: usize,
    pub e_lo: f64,
    pub e_hi: f64,
    pub norm_threshold: f64,
}

/// Boundary arguments s = z(−1) and t = z(+1).
pub fn boundary_points(e: C, g: C, q: C) -> (C, C) {
    let ig = C::new(-g.im, g.re);
    let s = (e + ig) / q;
    let t = if g.im == 0.0 && q.im == 0.0 && e.im == 0.0 { s.conj() } else { (e - ig) / q };
    (s, t)
}

fn boundary_airy(e: C, g: C, q: C) -> Result<(ScaledAiry<f64>, ScaledAiry<f64>)> {
    let (s, t) = boundary_points(e, g, q);
    Ok((airy_scaled(s)?, airy_scaled(t)?))
}

/// f(E) and the size |Ai(s)Bi(t)| + |Ai(t)Bi(s)| of its two terms, scaled.
pub fn characteristic_with_q(e: C, g: C, q: C) -> Result<(Scaled<f64>, Scaled<f64>)> {
    let (a, b) = boundary_airy(e, g, q)?;
    let p1 = a.ai * b.bi;
    let p2 = b.ai * a.bi;
    Ok((p1 - p2, p1.abs_sum(p2)))
}

/// Ai(s)Bi(t) − Ai(t)Bi(s) on the problem's branch.
pub fn characteristic(e: C, p: &HardBoxProblem) -> Result<C> {
    let (f, _) = characteristic_with_q(e, p.g, p.q())?;
    f.to_complex().ok_or(Error::Overflow)
}

/// f(E) divided by the size of its terms; bounded by 1 in modulus.
pub fn normalized_characteristic(e: C, p: &HardBoxProblem) -> Result<C> {
    let (f, s) = characteristic_with_q(e, p.g, p.q())?;
    if s.is_zero() {
        return Ok(C::new(0.0, 0.0));
    }
    (f / s).to_complex().ok_or(Error::Overflow)
}

/// The real function whose roots are the real eigenvalues: Im f for real g,
/// Re f for imaginary g. Branch 0 only.
pub fn real_characteristic(e: f64, p: &HardBoxProblem) -> Result<f64> {
    let form = real_form_of(p)?;
    let v = characteristic(C::new(e, 0.0), p)?;
    Ok(pick(v, form))
}

/// As [`real_characteristic`], divided by the size of the two terms.
pub fn normalized_real_characteristic(e: f64, p: &HardBoxProblem) -> Result<f64> {
    let form = real_form_of(p)?;
    Ok(pick(normalized_characteristic(C::new(e, 0.0), p)?, form))
}

fn real_form_of(p: &HardBoxProblem) -> Result<RealForm> {
    p.real_form()
        .ok_or_else(|| Error::InvalidInput("real characteristic needs branch 0 and a real or imaginary coupling".into()))
}

fn pick(v: C, form: RealForm) -> f64 {
    match form {
        RealForm::Imaginary => v.im,
        RealForm::Real => v.re,
    }
}

/// Refined real roots of the normalized real characteristic in `[lo, hi]`.
pub fn real_roots(p: &HardBoxProblem, lo: f64, hi: f64, step: f64, tol: f64) -> Result<Vec<f64>> {
    let f = |e: f64| normalized_real_characteristic(e, p);
    let brs = scan_brackets(f, lo, hi, step)?;
    brs.into_iter().map(|b| refine_real(f, b, tol)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    /// Root tolerance in E.
    pub tol: f64,
    pub n_matrix: usize,
    pub scan_step: f64,
    pub seed_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { tol: 1e-10, n_matrix: DEFAULT_N, scan_step: DEFAULT_SCAN_STEP, seed_tol: SEED_TOL }
    }
}

/// Free box levels n²π²/4.
pub fn box_levels(count: usize) -> Vec<f64> {
    (1..=count).map(|n| (n * n) as f64 * std::f64::consts::PI.powi(2) / 4.0).collect()
}

fn exact_spectrum(p: &HardBoxProblem, count: usize) -> Spectrum {
    let eigenvalues = box_levels(count)
        .into_iter()
        .map(|e| Eigenvalue { value: C::new(e, 0.0), kind: EigenKind::Real, residual: 0.0 })
        .collect();
    Spectrum { problem: *p, eigenvalues, pt_broken: false, method: Method::Exact }
}

/// Matrix eigenvalues used as seeds for the transcendental search.
pub fn matrix_spectrum(g: C, n: usize) -> Result<Spectrum> {
    let ev = eigenvalues(&build_hardbox_matrix(g, n), 1e-8)?;
    let pt_broken = ev.iter().any(|e| e.kind != EigenKind::Real);
    Ok(Spectrum { problem: HardBoxProblem { g, branch: 0 }, eigenvalues: ev, pt_broken, method: Method::Matrix })
}

/// Lowest `count` eigenvalues from the characteristic equation, with default
/// options.
pub fn spectrum(p: &HardBoxProblem, count: usize) -> Result<Spectrum> {
    spectrum_with(p, count, &SpectrumOptions::default())
}

/// Residual of a candidate eigenvalue: the normalized characteristic.
fn root_residual(e: C, p: &HardBoxProblem) -> Result<f64> {
    Ok(normalized_characteristic(e, p)?.norm())
}

/// Newton refinement of a complex eigenvalue on the problem's branch, with
/// f normalized by a constant taken at the seed.
pub fn refine_complex(p: &HardBoxProblem, seed: C, tol: f64) -> Result<C> {
    let q = p.q();
    let (_, s0) = characteristic_with_q(seed, p.g, q)?;
    if s0.is_zero() {
        return Err(Error::NoConvergence("vanishing scale at seed".into()));
    }
    let f = |e: C| -> Result<C> {
        let (f, _) = characteristic_with_q(e, p.g, q)?;
        (f / s0).to_complex().ok_or(Error::Overflow)
    };
    newton_complex(f, seed, tol)
}

fn sort_eigenvalues(list: &mut [Eigenvalue<f64>]) {
    list.sort_by(|a, b| {
        a.value
            .re
            .partial_cmp(&b.value.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.value.im.partial_cmp(&a.value.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

fn dedup_sorted(mut v: Vec<f64>, tol: f64) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v.dedup_by(|a, b| (*a - *b).abs() <= tol);
    v
}

pub fn spectrum_with(p: &HardBoxProblem, count: usize, opt: &SpectrumOptions) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    if p.is_small() {
        return Ok(exact_spectrum(p, count));
    }
    let n = opt.n_matrix.max(2 * count + 10);
    let seeds_all = matrix_spectrum(p.g, n)?.eigenvalues;
    let seeds: Vec<Eigenvalue<f64>> = seeds_all.iter().copied().take(count + 1).collect();
    let conj_closed = p.g.im == 0.0;
    let mut found: Vec<Eigenvalue<f64>> = Vec::new();
    let mut used_complex = vec![false; seeds.len()];

    if let Some(form) = p.real_form() {
        let re_max = seeds.iter().map(|s| s.value.re).fold(f64::MIN, f64::max);
        let re_min = seeds.iter().map(|s| s.value.re).fold(f64::MAX, f64::min);
        let lo = (re_min - 2.0).min(0.0);
        let hi = re_max + 2.0;
        let mut roots = real_roots(p, lo, hi, opt.scan_step, opt.tol)?;
        // local fine scans around seeds on or near the real axis
        for s in &seeds {
            if s.value.im.abs() > 0.05 {
                continue;
            }
            let w = opt.seed_tol.max(4.0 * s.value.im.abs());
            roots.extend(real_roots(p, s.value.re - w, s.value.re + w, w / 200.0, opt.tol)?);
        }
        let roots = dedup_sorted(roots, 1e3 * opt.tol.max(1e-12));
        for &r in &roots {
            let residual = root_residual(C::new(r, 0.0), p)?;
            found.push(Eigenvalue { value: C::new(r, 0.0), kind: EigenKind::Real, residual });
        }
        // near-real matrix pairs resolved as two real roots by the transcendental equation
        for (i, s) in seeds.iter().enumerate() {
            if s.kind == EigenKind::Real || s.value.im < 0.0 {
                continue;
            }
            let w = opt.seed_tol.max(4.0 * s.value.im.abs());
            let near = roots.iter().filter(|r| (*r - s.value.re).abs() <= w).count();
            if s.value.im.abs() <= 0.05 && near >= 2 {
                used_complex[i] = true;
            }
        }
        let _ = form;
    }

    for (i, s) in seeds.iter().enumerate() {
        let needs_newton = match s.kind {
            EigenKind::Real => p.real_form().is_none(),
            EigenKind::ConjugatePair => s.value.im > 0.0 && !used_complex[i],
            EigenKind::Complex => true,
        };
        if !needs_newton {
            continue;
        }
        let z = refine_complex(p, s.value, 1e-12).map_err(|e| {
            Error::SeedMismatch(format!("Newton from matrix seed {} failed: {e}", s.value))
        })?;
        if (z - s.value).norm() > opt.seed_tol {
            return Err(Error::SeedMismatch(format!("matrix seed {} refined to {z}", s.value)));
        }
        let residual = root_residual(z, p)?;
        let kind = if conj_closed && z.im.abs() > 1e-9 * z.norm().max(1.0) {
            EigenKind::ConjugatePair
        } else if z.im.abs() <= 1e-9 * z.norm().max(1.0) {
            EigenKind::Real
        } else {
            EigenKind::Complex
        };
        let z = if kind == EigenKind::Real { C::new(z.re, 0.0) } else { z };
        found.push(Eigenvalue { value: z, kind, residual });
        if kind == EigenKind::ConjugatePair {
            found.push(Eigenvalue { value: z.conj(), kind, residual });
        }
    }
    sort_eigenvalues(&mut found);

    // every transcendental eigenvalue below the seed horizon needs a matrix counterpart
    let horizon = seeds.last().map(|s| s.value.re).unwrap_or(f64::MAX);
    for e in &found {
        if e.value.re > horizon + opt.seed_tol {
            continue;
        }
        let d = seeds_all.iter().map(|s| (s.value - e.value).norm()).fold(f64::MAX, f64::min);
        let near_pair = seeds_all
            .iter()
            .any(|s| s.kind != EigenKind::Real && s.value.im.abs() <= 0.05 && (s.value.re - e.value.re).abs() <= opt.seed_tol.max(4.0 * s.value.im.abs()));
        if d > opt.seed_tol && !near_pair {
            return Err(Error::SeedMismatch(format!("eigenvalue {} has no matrix counterpart within {}", e.value, opt.seed_tol)));
        }
    }
    for s in seeds.iter().take(count) {
        if s.kind == EigenKind::Real && !found.iter().any(|e| (e.value - s.value).norm() <= opt.seed_tol) {
            return Err(Error::SeedMismatch(format!("matrix eigenvalue {} not found by the characteristic equation", s.value)));
        }
    }
    found.truncate(count);
    let pt_broken = found.iter().any(|e| e.kind != EigenKind::Real);
    Ok(Spectrum { problem: *p, eigenvalues: found, pt_broken, method: Method::Transcendental })
}

/// Spectrum of the Hermitian box V = gx (real Airy arguments).
pub fn hermitian_spectrum(g: f64, count: usize) -> Result<Spectrum> {
    hermitian_spectrum_on_branch(g, 0, count)
}

/// Hermitian spectrum with the characteristic built on branch `k`. Real roots
/// are searched directly; on the complex branches the characteristic has a
/// constant complex phase on the real axis which is projected out.
pub fn hermitian_spectrum_on_branch(g: f64, k: usize, count: usize) -> Result<Spectrum> {
    let mut p = HardBoxProblem::hermitian(g);
    p.branch = k;
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    if p.is_small() {
        return Ok(exact_spectrum(&p, count));
    }
    let lo = -g.abs() - 1.0;
    let hi = box_levels(count)[count - 1] + g.abs() + 10.0;
    let roots = phase_projected_roots(&p, lo, hi, DEFAULT_SCAN_STEP, 1e-12)?;
    let mut eigenvalues = Vec::new();
    for (r, residual) in roots.into_iter().take(count) {
        eigenvalues.push(Eigenvalue { value: C::new(r, 0.0), kind: EigenKind::Real, residual });
    }
    if eigenvalues.len() < count {
        return Err(Error::NoConvergence(format!("found {} of {count} Hermitian levels", eigenvalues.len())));
    }
    Ok(Spectrum { problem: p, eigenvalues, pt_broken: false, method: Method::Transcendental })
}

/// Real roots of the (possibly complex-valued) normalized characteristic on
/// the real axis. On each grid interval the value is projected onto the
/// phase of its larger endpoint; a sign change of the projection is refined
/// and kept when the full normalized residual there is below 1e-8.
/// Returns (root, residual) pairs.
pub fn phase_projected_roots(p: &HardBoxProblem, lo: f64, hi: f64, step: f64, tol: f64) -> Result<Vec<(f64, f64)>> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let h = (hi - lo) / n as f64;
    let grid: Vec<f64> = (0..=n).map(|i| if i == n { hi } else { lo + h * i as f64 }).collect();
    let vals: Vec<C> = grid.iter().map(|&e| normalized_characteristic(C::new(e, 0.0), p)).collect::<Result<_>>()?;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let (a, b) = (vals[i], vals[i + 1]);
        let u = if a.norm() >= b.norm() { a } else { b };
        if u.norm() == 0.0 {
            continue;
        }
        let u = u.conj() / u.norm();
        let proj = |e: f64| -> Result<f64> { Ok((u * normalized_characteristic(C::new(e, 0.0), p)?).re) };
        let (fa, fb) = ((u * a).re, (u * b).re);
        if !((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) || fb == 0.0) {
            continue;
        }
        let r = refine_real(proj, Bracket { lo: grid[i], hi: grid[i + 1], f_lo: fa, f_hi: fb }, tol)?;
        let res = normalized_characteristic(C::new(r, 0.0), p)?.norm();
        if res <= 1e-8 && out.last().map_or(true, |(x, _)| (r - x).abs() > 1e-9) {
            out.push((r, res));
        }
    }
    Ok(out)
}

/// The two expressions −Bi(s)/Ai(s) and −Bi(t)/Ai(t) for the coefficient C,
/// and their relative difference.
pub fn coefficient_c(e: C, p: &HardBoxProblem) -> Result<(C, C, f64)> {
    let (a, b) = boundary_airy(e, p.g, p.q())?;
    if a.ai.is_zero() || b.ai.is_zero() || a.ai.ln_norm() - a.bi.ln_norm() < -30.0 || b.ai.ln_norm() - b.bi.ln_norm() < -30.0 {
        return Err(Error::PoleAtAiZero);
    }
    let c1 = -(a.bi / a.ai);
    let c2 = -(b.bi / b.ai);
    let diff = (c1 - c2).ln_norm() - c1.ln_norm().max(c2.ln_norm());
    let rel = diff.exp();
    let c1v = c1.to_complex().ok_or(Error::Overflow)?;
    let c2v = c2.to_complex().ok_or(Error::Overflow)?;
    Ok((c1v, c2v, rel))
}

/// ψ(x) = C·Ai(z) + Bi(z) on `x_grid`, with C from the x = −1 wall.
///
/// When Ai is negligible against Bi at a wall, C is effectively a pole and
/// the form Ai(z) + D·Bi(z), D = −Ai(s)/Bi(s), is used instead; that branch
/// returns ψ divided by max|ψ| since its raw size is usually not representable.
pub fn eigenfunction(e: C, p: &HardBoxProblem, x_grid: &[f64]) -> Result<Vec<C>> {
    let q = p.q();
    let ig = C::new(-p.g.im, p.g.re);
    let c = match coefficient_c(e, p) {
        Ok((_, _, rel)) if rel > 1e-6 => return Err(Error::InconsistentC(rel)),
        Ok((c, _, _)) => c,
        Err(Error::PoleAtAiZero) => return ai_form(e, p, x_grid),
        Err(err) => return Err(err),
    };
    x_grid
        .iter()
        .map(|&x| {
            let v = airy_scaled((e - ig * x) / q)?;
            (v.ai * c + v.bi).to_complex().ok_or(Error::Overflow)
        })
        .collect()
}

fn ai_form(e: C, p: &HardBoxProblem, x_grid: &[f64]) -> Result<Vec<C>> {
    let q = p.q();
    let (a, b) = boundary_airy(e, p.g, q)?;
    if a.bi.is_zero() || b.bi.is_zero() {
        return Err(Error::PoleAtAiZero);
    }
    let d1 = -(a.ai / a.bi);
    let d2 = -(b.ai / b.bi);
    let rel = ((d1 - d2).ln_norm() - d1.ln_norm().max(d2.ln_norm())).exp();
    if rel > 1e-6 {
        return Err(Error::InconsistentC(rel));
    }
    let ig = C::new(-p.g.im, p.g.re);
    let psi: Vec<Scaled<f64>> = x_grid
        .iter()
        .map(|&x| {
            let v = airy_scaled((e - ig * x) / q)?;
            Ok(v.ai + v.bi * d1)
        })
        .collect::<Result<_>>()?;
    let top = psi.iter().map(|s| s.ln_norm()).fold(f64::NEG_INFINITY, f64::max);
    let shift = if top.is_finite() { top } else { 0.0 };
    Ok(psi.iter().map(|s| s.rescaled(shift)).collect())
}

/// Boundary null vector (a, b) normalized to unit length, taken from the wall
/// row of larger size, plus the normalized size of the other row's residual.
fn null_vector(a: &ScaledAiry<f64>, b: &ScaledAiry<f64>) -> (Scaled<f64>, Scaled<f64>, f64) {
    let row_norm = |r: &ScaledAiry<f64>| r.ai.abs_sum(r.bi);
    let (big, other) = if row_norm(a).ln_norm() >= row_norm(b).ln_norm() { (a, b) } else { (b, a) };
    let n = row_norm(big);
    let ca = big.bi / n;
    let cb = -(big.ai / n);
    let res = (other.ai * ca + other.bi * cb) / row_norm(other);
    let r = res.to_complex().map(|z| z.norm()).unwrap_or(f64::INFINITY);
    (ca, cb, r)
}

/// Wavefunction from the boundary null vector, divided by its largest value,
/// together with the cancellation ratio max|ψ| / max(|a Ai| + |b Bi|).
pub fn null_vector_wavefunction(e: C, p: &HardBoxProblem, x_grid: &[f64]) -> Result<(Vec<C>, f64)> {
    let q = p.q();
    let (wa, wb) = boundary_airy(e, p.g, q)?;
    let (ca, cb, _) = null_vector(&wa, &wb);
    let ig = C::new(-p.g.im, p.g.re);
    let mut psi = Vec::with_capacity(x_grid.len());
    let mut parts = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let v = airy_scaled((e - ig * x) / q)?;
        let t1 = v.ai * ca;
        let t2 = v.bi * cb;
        psi.push(t1 + t2);
        parts.push(t1.abs_sum(t2));
    }
    let top = psi.iter().map(|s| s.ln_norm()).fold(f64::NEG_INFINITY, f64::max);
    let top_parts = parts.iter().map(|s| s.ln_norm()).fold(f64::NEG_INFINITY, f64::max);
    let ratio = if top_parts.is_finite() { (top - top_parts).exp() } else { 0.0 };
    let shift = if top.is_finite() { top } else { 0.0 };
    Ok((psi.iter().map(|s| s.rescaled(shift)).collect(), ratio))
}

/// Least-squares unimodular fit of ψ(−x) = c·conj(ψ(x)) over `x_grid`.
/// Returns c and the largest deviation relative to max|ψ|; with `fixed`
/// the constant is held at 1.
pub fn pt_relation(e: C, p: &HardBoxProblem, x_grid: &[f64], fixed: bool) -> Result<(C, f64)> {
    let both: Vec<f64> = x_grid.iter().copied().chain(x_grid.iter().map(|x| -x)).collect();
    let psi = eigenfunction(e, p, &both)?;
    let (plus, minus) = psi.split_at(x_grid.len());
    let num: C = plus.iter().zip(minus).map(|(a, b)| b * a).sum();
    let den: f64 = plus.iter().map(|a| a.norm_sqr()).sum();
    let c = if fixed || den == 0.0 { C::new(1.0, 0.0) } else { num / den };
    let top = psi.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let dev = plus.iter().zip(minus).map(|(a, b)| (b - c * a.conj()).norm()).fold(0.0, f64::max) / top;
    Ok((c, dev))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandOptions {
    /// Normalized characteristic below this counts as numerically singular.
    pub root_tol: f64,
    pub norm_threshold: f64,
    pub grid_points: usize,
}

impl Default for BandOptions {
    fn default() -> Self {
        Self { root_tol: 1e-8, norm_threshold: NULL_THRESHOLD, grid_points: 201 }
    }
}

/// Energies on a grid where the boundary system is numerically singular but
/// its null vector produces no wavefunction (cancellation ratio below the
/// threshold), merged into maximal bands.
pub fn detect_null_bands(p: &HardBoxProblem, e_lo: f64, e_hi: f64, step: f64) -> Result<Vec<EnergyBand>> {
    detect_null_bands_with(p, e_lo, e_hi, step, &BandOptions::default())
}

/// Classify one energy: (numerically singular, cancellation ratio).
pub fn null_classification(e: f64, p: &HardBoxProblem, opt: &BandOptions) -> Result<(bool, f64)> {
    let res = normalized_characteristic(C::new(e, 0.0), p)?.norm();
    let grid: Vec<f64> = (0..opt.grid_points).map(|i| -1.0 + 2.0 * i as f64 / (opt.grid_points - 1) as f64).collect();
    let (_, ratio) = null_vector_wavefunction(C::new(e, 0.0), p, &grid)?;
    Ok((res <= opt.root_tol, ratio))
}

pub fn detect_null_bands_with(
    p: &HardBoxProblem,
    e_lo: f64,
    e_hi: f64,
    step: f64,
    opt: &BandOptions,
) -> Result<Vec<EnergyBand>> {
    if !(step > 0.0) || !(e_hi > e_lo) {
        return Err(Error::InvalidInput("band scan needs step > 0 and e_lo < e_hi".into()));
    }
    let n = ((e_hi - e_lo) / step).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| (e_lo + step * i as f64).min(e_hi)).collect();
    let flags: Vec<bool> = grid
        .par_iter()
        .map(|&e| null_classification(e, p, opt).map(|(sing, ratio)| sing && ratio < opt.norm_threshold))
        .collect::<Result<_>>()?;
    let mut bands = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..=grid.len() {
        let on = i < grid.len() && flags[i];
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                let (lo, hi) = (grid[s], grid[i - 1]);
                // isolated grid points are widened by half a step each way
                let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5 * step, hi + 0.5 * step) };
                bands.push(EnergyBand { g: p.g, branch: p.branch, e_lo: lo, e_hi: hi, norm_threshold: opt.norm_threshold });
                start = None;
            }
            _ => {}
        }
    }
    Ok(bands)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExceptionalOptions {
    pub g_step: f64,
    pub e_max: f64,
    pub e_step: f64,
}

impl Default for ExceptionalOptions {
    fn default() -> Self {
        Self { g_step: 0.1, e_max: 100.0, e_step: 0.05 }
    }
}

/// Lowest real eigenvalue at real coupling `g` within `[0, e_max]`.
pub fn ground_level(g: f64, e_max: f64) -> Result<f64> {
    let p = HardBoxProblem::pt(g);
    if p.is_small() {
        return Ok(box_levels(1)[0]);
    }
    let mut lo = 0.0;
    while lo < e_max {
        let hi = (lo + 10.0).min(e_max);
        if let Some(r) = real_roots(&p, lo, hi, 0.01, 1e-12)?.first() {
            return Ok(*r);
        }
        lo = hi;
    }
    Err(Error::InsufficientData(format!("no real level below {e_max} at g = {g}")))
}

/// Couplings in `[g_lo, g_hi]` where a pair of real levels merges.
pub fn exceptional_points(g_lo: f64, g_hi: f64) -> Result<Vec<ExceptionalPoint>> {
    exceptional_points_with(g_lo, g_hi, &ExceptionalOptions::default())
}

pub fn exceptional_points_with(g_lo: f64, g_hi: f64, opt: &ExceptionalOptions) -> Result<Vec<ExceptionalPoint>> {
    if !(g_lo > 0.0 && g_hi > g_lo) {
        return Err(Error::InvalidInput("need 0 < g_lo < g_hi".into()));
    }
    let n = ((g_hi - g_lo) / opt.g_step).ceil().max(1.0) as usize;
    let gs: Vec<f64> = (0..=n).map(|i| (g_lo + opt.g_step * i as f64).min(g_hi)).collect();
    let roots: Vec<Vec<f64>> = gs
        .par_iter()
        .map(|&g| real_roots(&HardBoxProblem::pt(g), 0.0, opt.e_max, opt.e_step, 1e-12))
        .collect::<Result<_>>()?;
    let f = |g: f64, e: f64| normalized_real_characteristic(e, &HardBoxProblem::pt(g));
    let h_at = |g: f64, lo: f64, hi: f64| -> Result<Option<f64>> {
        // value of f at its stationary point in (lo, hi), if there is one
        let d = |e: f64| {
            let step = 1e-6 * e.abs().max(1.0);
            Ok((f(g, e + step)? - f(g, e - step)?) / (2.0 * step))
        };
        let brs = scan_brackets(d, lo, hi, (hi - lo) / 64.0)?;
        let mut best: Option<f64> = None;
        for b in brs {
            let x = refine_real(d, b, 1e-13)?;
            let v = f(g, x)?;
            if best.map_or(true, |bv: f64| v.abs() < bv.abs()) {
                best = Some(v);
            }
        }
        Ok(best)
    };
    let mut out = Vec::new();
    for i in 0..n {
        let (r0, r1) = (&roots[i], &roots[i + 1]);
        if r1.len() + 2 > r0.len() {
            continue;
        }
        // candidate pair: adjacent levels with the smallest gap, away from the window top
        let cand = r0
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] < opt.e_max - 5.0)
            .min_by(|a, b| (a.1[1] - a.1[0]).partial_cmp(&(b.1[1] - b.1[0])).unwrap_or(std::cmp::Ordering::Equal));
        let Some((idx, w)) = cand else { continue };
        let gap = w[1] - w[0];
        let (elo, ehi) = (w[0] - 0.45 * gap, w[1] + 0.45 * gap);
        let ga = gs[i];
        let Some(ha) = h_at(ga, elo, ehi)? else { continue };
        // the pair is gone at the next grid point unless it was merely unresolved there
        let mut gb = None;
        let fine = opt.g_step / 50.0;
        let mut g = gs[i + 1];
        while g < g_hi + opt.g_step {
            match h_at(g, elo, ehi)? {
                Some(hb) if (hb > 0.0) == (ha > 0.0) => g += fine,
                _ => {
                    gb = Some(g);
                    break;
                }
            }
        }
        let Some(gb) = gb else { continue };
        let c = find_coalescence(f, (ga, gb), (elo, ehi))?;
        if c.g < g_lo || c.g > g_hi {
            continue;
        }
        let top = 10.0 * opt.e_max;
        let jump = ground_level(c.g + 0.005, top)? - ground_level(c.g - 0.005, top)?;
        out.push(ExceptionalPoint {
            g_c: c.g,
            e_c: c.e,
            pair_index: idx,
            ground_jump: Some(jump),
            residual_f: c.residual_f,
            residual_df: c.residual_df,
        });
    }
    Ok(out)
}

/// Least-squares slope of log E_n against log n over the upper half of the
/// real levels, n counted by position in the spectrum.
pub fn asymptotic_check(s: &Spectrum) -> Result<f64> {
    let pts: Vec<(f64, f64)> = s
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, e)| e.kind == EigenKind::Real && e.value.re > 0.0)
        .map(|(i, e)| (((i + 1) as f64).ln(), e.value.re.ln()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData(format!("{} real levels, need 10", pts.len())));
    }
    let top = &pts[pts.len() / 2..];
    let m = top.len() as f64;
    let mx = top.iter().map(|p| p.0).sum::<f64>() / m;
    let my = top.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = top.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = top.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_points_are_conjugate_for_pt() {
        let (s, t) = boundary_points(C::new(7.0, 0.0), C::new(12.31, 0.0), C::new(12.31f64.powf(2.0 / 3.0), 0.0));
        assert_eq!(s, t.conj());
    }

    #[test]
    fn hermitian_form_is_real() {
        let p = HardBoxProblem::hermitian(1.0);
        assert_eq!(p.real_form(), Some(RealForm::Real));
        let (s, t) = boundary_points(C::new(3.0, 0.0), p.g, p.q());
        assert!(s.im.abs() < 1e-15 && t.im.abs() < 1e-15);
    }
}
