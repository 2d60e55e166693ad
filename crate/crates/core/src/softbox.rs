//! The soft box: V(x) = igx for |x| < 1 and V = 0 outside.
//!
//! Bound states match ψ = a·Ai(z) + b·Bi(z) inside to e^{∓κx} outside,
//! κ² = −E. With A(w) = κq·w(s) + ig·w'(s) and B(w) = κq·w(t) − ig·w'(t),
//! the matching condition reads
//!     D(E) = A(Ai)·B(Bi) − A(Bi)·B(Ai) = 0.
//! For real g and E < 0, t = conj(s) and D is i times a real function.
//!
//! Which sign of κ gives the tabulated levels is not the obvious one: with
//! κ = +√(−E) (exterior decaying) D has no real negative zeros at all, since
//! E∫|ψ|² = ∫|ψ'|² for a purely imaginary potential forces E ≥ 0. The
//! tabulated levels are the zeros with κ = −√(−E). Both are available via
//! [`Exterior`]; the default is the one that reproduces the tables.

use num_complex::Complex64 as C;

use crate::airy::{airy_scaled, ScaledAiry};
use crate::error::{Error, Result};
use crate::hardbox::ExceptionalPoint;
use crate::rootfind::{find_coalescence, refine_real, scan_brackets, Bracket};
use crate::scalar::Scaled;

/// Sign of κ in the exterior solution e^{−κ|x|}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exterior {
    /// κ = −√(−E): the exterior solution grows away from the box.
    #[default]
    Growing,
    /// κ = +√(−E): the exterior solution decays.
    Decaying,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftBoxProblem {
    pub g: f64,
    pub exterior: Exterior,
}

impl SoftBoxProblem {
    pub fn new(g: f64) -> Self {
        Self { g, exterior: Exterior::default() }
    }

    pub fn with_exterior(g: f64, exterior: Exterior) -> Self {
        Self { g, exterior }
    }

    fn q(&self) -> f64 {
        (self.g * self.g).cbrt()
    }

    fn kappa(&self, e: f64) -> f64 {
        let k = (-e).sqrt();
        match self.exterior {
            Exterior::Growing => -k,
            Exterior::Decaying => k,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundStateReport {
    pub eigenvalues: Vec<f64>,
    /// True when fewer than two real levels remain (the pair has merged).
    pub merged: bool,
    pub residuals: Vec<f64>,
}

fn boundary(e: f64, p: &SoftBoxProblem) -> Result<(C, ScaledAiry<f64>, ScaledAiry<f64>)> {
    let q = p.q();
    let s = C::new(e, p.g) / q;
    let a = airy_scaled(s)?;
    Ok((s, a, conj_airy(&a)))
}

fn conj_airy(a: &ScaledAiry<f64>) -> ScaledAiry<f64> {
    ScaledAiry { ai: a.ai.conj(), dai: a.dai.conj(), bi: a.bi.conj(), dbi: a.dbi.conj() }
}

/// The four matching factors A(Ai), B(Bi), A(Bi), B(Ai).
fn factors(e: f64, p: &SoftBoxProblem) -> Result<[Scaled<f64>; 4]> {
    let (_, a, b) = boundary(e, p)?;
    let kq = C::new(p.kappa(e) * p.q(), 0.0);
    let ig = C::new(0.0, p.g);
    let lhs = |w: Scaled<f64>, dw: Scaled<f64>| w * kq + dw * ig;
    let rhs = |w: Scaled<f64>, dw: Scaled<f64>| w * kq - dw * ig;
    Ok([lhs(a.ai, a.dai), rhs(b.bi, b.dbi), lhs(a.bi, a.dbi), rhs(b.ai, b.dai)])
}

/// D(E) and the size of its two terms, scaled.
pub fn bound_determinant(e: f64, p: &SoftBoxProblem) -> Result<(Scaled<f64>, Scaled<f64>)> {
    if !(e < 0.0) || p.g == 0.0 {
        return Err(Error::InvalidInput(format!("bound determinant needs E < 0 and g ≠ 0 (E = {e}, g = {})", p.g)));
    }
    let [a1, b1, a2, b2] = factors(e, p)?;
    let t1 = a1 * b1;
    let t2 = a2 * b2;
    Ok((t1 - t2, t1.abs_sum(t2)))
}

/// The full complex D(E).
pub fn bound_residual(e: f64, p: &SoftBoxProblem) -> Result<C> {
    bound_determinant(e, p)?.0.to_complex().ok_or(Error::Overflow)
}

/// Im D(E); its zeros are the bound states.
pub fn bound_characteristic(e: f64, p: &SoftBoxProblem) -> Result<f64> {
    Ok(bound_residual(e, p)?.im)
}

/// Im D(E) divided by the size of its terms.
pub fn normalized_bound_characteristic(e: f64, p: &SoftBoxProblem) -> Result<f64> {
    let (d, s) = bound_determinant(e, p)?;
    if s.is_zero() {
        return Ok(0.0);
    }
    Ok((d / s).to_complex().ok_or(Error::Overflow)?.im)
}

/// Grid in u = √(−E): logarithmic below 0.1, step 0.002 above.
fn u_grid(u_max: f64) -> Vec<f64> {
    let (u0, u1) = (1e-5f64, 0.1f64);
    let nlog = 400;
    let mut v: Vec<f64> = (0..nlog).map(|i| u0 * (u1 / u0).powf(i as f64 / nlog as f64)).collect();
    let n = ((u_max - u1) / 0.002).ceil().max(1.0) as usize;
    v.extend((0..=n).map(|i| u1 + (u_max - u1) * i as f64 / n as f64));
    v
}

/// Bound states on E ∈ [−(g² + 10), −1e-10].
pub fn bound_spectrum(p: &SoftBoxProblem) -> Result<BoundStateReport> {
    if p.g == 0.0 {
        return Err(Error::InvalidInput("g must be nonzero".into()));
    }
    let f = |u: f64| normalized_bound_characteristic(-u * u, p);
    let grid = u_grid((p.g * p.g + 10.0).sqrt());
    let vals: Vec<f64> = grid.iter().map(|&u| f(u)).collect::<Result<_>>()?;
    let mut levels = Vec::new();
    for i in 0..grid.len() - 1 {
        let (a, b) = (vals[i], vals[i + 1]);
        if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) || (b == 0.0 && a != 0.0) {
            let u = refine_real(f, Bracket { lo: grid[i], hi: grid[i + 1], f_lo: a, f_hi: b }, 1e-15)?;
            levels.push(-u * u);
        }
    }
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let residuals = levels.iter().map(|&e| normalized_bound_characteristic(e, p).map(f64::abs)).collect::<Result<_>>()?;
    Ok(BoundStateReport { merged: levels.len() < 2, eigenvalues: levels, residuals })
}

/// The coupling where the two bound levels merge, searched on g ∈ [1.0, 1.5].
pub fn soft_critical() -> Result<ExceptionalPoint> {
    soft_critical_in(1.0, 1.5, Exterior::default())
}

pub fn soft_critical_in(g_lo: f64, g_hi: f64, exterior: Exterior) -> Result<ExceptionalPoint> {
    let n = ((g_hi - g_lo) / 0.01).round().max(1.0) as usize;
    let mut prev: Option<(f64, Vec<f64>)> = None;
    for i in 0..=n {
        let g = g_lo + (g_hi - g_lo) * i as f64 / n as f64;
        let rep = bound_spectrum(&SoftBoxProblem::with_exterior(g, exterior))?;
        if let Some((ga, levels)) = &prev {
            if levels.len() >= 2 && rep.eigenvalues.len() + 2 <= levels.len() {
                let (e1, e2) = (levels[0], levels[1]);
                let gap = e2 - e1;
                let lo = e1 - 0.45 * gap;
                let hi = (e2 + 0.45 * gap).min(-1e-9);
                let f = |g: f64, e: f64| normalized_bound_characteristic(e, &SoftBoxProblem::with_exterior(g, exterior));
                let c = find_coalescence(f, (*ga, g), (lo, hi))?;
                return Ok(ExceptionalPoint {
                    g_c: c.g,
                    e_c: c.e,
                    pair_index: 0,
                    ground_jump: None,
                    residual_f: c.residual_f,
                    residual_df: c.residual_df,
                });
            }
        }
        prev = Some((g, rep.eigenvalues));
    }
    Err(Error::NoConvergence(format!("bound pair does not merge on [{g_lo}, {g_hi}]")))
}

/// ψ on `x_grid` (any real x) for a bound level `e`, built from the matching
/// null vector, scaled so that max|ψ| over |x| ≤ 1 is one.
pub fn bound_wavefunction(e: f64, p: &SoftBoxProblem, x_grid: &[f64]) -> Result<Vec<C>> {
    // null vector of the left-wall row (A(Ai), A(Bi))
    let [a1, _, a2, _] = factors(e, p)?;
    let (ca, cb) = (a2, -a1);
    let q = p.q();
    let kappa = p.kappa(e);
    let inside = |x: f64| -> Result<Scaled<f64>> {
        let v = airy_scaled(C::new(e, -p.g * x) / q)?;
        Ok(v.ai * ca + v.bi * cb)
    };
    let left = inside(-1.0)?;
    let right = inside(1.0)?;
    let mut vals = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let v = if x < -1.0 {
            left * C::new((kappa * (x + 1.0)).exp(), 0.0)
        } else if x > 1.0 {
            right * C::new((-kappa * (x - 1.0)).exp(), 0.0)
        } else {
            inside(x)?
        };
        vals.push(v);
    }
    let mut top = f64::NEG_INFINITY;
    for i in 0..=200 {
        top = top.max(inside(-1.0 + i as f64 / 100.0)?.ln_norm());
    }
    Ok(vals.iter().map(|v| v.rescaled(top)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionlessReport {
    pub roots: Vec<f64>,
    /// Smallest |residual| on the grid.
    pub min_abs_residual: f64,
    pub argmin: f64,
    /// Smallest |residual| divided by the size of its two terms.
    pub min_rel_residual: f64,
}

/// Residual of the outgoing-wave condition for E > 0, k = √E:
/// [kq Ai(s) + g Ai'(s)][kq Bi(t) − g Bi'(t)] − [kq Bi(s) + g Bi'(s)][kq Ai(t) − g Ai'(t)].
pub fn reflectionless_residual(e: f64, p: &SoftBoxProblem) -> Result<(Scaled<f64>, Scaled<f64>)> {
    if !(e > 0.0) {
        return Err(Error::InvalidInput("reflectionless residual needs E > 0".into()));
    }
    let (_, a, b) = boundary(e, p)?;
    let kq = C::new(e.sqrt() * p.q(), 0.0);
    let g = C::new(p.g, 0.0);
    let t1 = (a.ai * kq + a.dai * g) * (b.bi * kq - b.dbi * g);
    let t2 = (a.bi * kq + a.dbi * g) * (b.ai * kq - b.dai * g);
    Ok((t1 - t2, t1.abs_sum(t2)))
}

/// Scan `[e_lo, e_hi]` for real zeros of the reflectionless residual. Grid
/// minima of the relative residual are polished by golden-section search and
/// reported as roots when they fall below 1e-8.
pub fn reflectionless_scan(p: &SoftBoxProblem, e_lo: f64, e_hi: f64, step: f64) -> Result<ReflectionlessReport> {
    if !(e_lo > 0.0 && e_hi > e_lo && step > 0.0) {
        return Err(Error::InvalidInput("need 0 < e_lo < e_hi and step > 0".into()));
    }
    let rel = |e: f64| -> Result<f64> {
        let (r, s) = reflectionless_residual(e, p)?;
        Ok(if s.is_zero() { 0.0 } else { (r.ln_norm() - s.ln_norm()).exp() })
    };
    let mut grid: Vec<f64> = Vec::new();
    // geometric lead-in so that the region near E = 0 is sampled
    let mut e = e_lo;
    while e < (e_lo + step).min(e_hi) {
        grid.push(e);
        e *= 1.2;
    }
    let n = ((e_hi - grid.last().copied().unwrap_or(e_lo)) / step).ceil().max(1.0) as usize;
    let start = grid.last().copied().unwrap_or(e_lo);
    grid.extend((1..=n).map(|i| start + (e_hi - start) * i as f64 / n as f64));
    let mut min_abs = f64::INFINITY;
    let mut argmin = e_lo;
    let mut rels = Vec::with_capacity(grid.len());
    for &e in &grid {
        let (r, _) = reflectionless_residual(e, p)?;
        let a = r.to_complex().map(|z| z.norm()).unwrap_or(f64::INFINITY);
        if a < min_abs {
            min_abs = a;
            argmin = e;
        }
        rels.push(rel(e)?);
    }
    let mut roots = Vec::new();
    let mut min_rel = rels.iter().copied().fold(f64::INFINITY, f64::min);
    for i in 1..grid.len().saturating_sub(1) {
        if rels[i] <= rels[i - 1] && rels[i] <= rels[i + 1] {
            let (x, v) = golden_min(&rel, grid[i - 1], grid[i + 1])?;
            min_rel = min_rel.min(v);
            if v <= 1e-8 {
                roots.push(x);
            }
        }
    }
    Ok(ReflectionlessReport { roots, min_abs_residual: min_abs, argmin, min_rel_residual: min_rel })
}

fn golden_min(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let r = 0.618_033_988_749_894_9;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..80 {
        if (b - a).abs() <= 1e-13 * b.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Real negative zeros of a complex matching function m(E) on [−e_max, 0):
/// sign changes when m is real on the axis, otherwise grid minima of |m|/scale
/// polished and kept below `tol`.
fn real_zeros(m: impl Fn(f64) -> (C, f64), e_max: f64, tol: f64) -> Result<Vec<f64>> {
    let rel = |e: f64| -> Result<f64> {
        let (v, s) = m(e);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::non_finite_at(format!("E = {e}")));
        }
        Ok(if s > 0.0 { v.norm() / s } else { v.norm() })
    };
    let grid: Vec<f64> = {
        let mut g: Vec<f64> = (0..=2000).map(|i| -e_max + e_max * i as f64 / 2000.0).collect();
        g.pop();
        // finer near zero where shallow levels sit
        g.extend((1..=200).map(|i| -1e-2 * (1e-8f64 / 1e-2).powf(i as f64 / 200.0)));
        g.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        g
    };
    let vals: Vec<f64> = grid.iter().map(|&e| rel(e)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 1..grid.len() - 1 {
        if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] {
            let (x, v) = golden_min(&rel, grid[i - 1], grid[i + 1])?;
            if v <= tol {
                out.push(x);
            }
        }
    }
    Ok(out)
}

/// Bound states of the complex square well −V1 + iV2 on |x| < 1.
pub fn rect_well_spectrum(v1: f64, v2: f64) -> Result<Vec<f64>> {
    let m = |e: f64| rect_well_matching(e, v1, v2);
    let e_max = v1.abs() + v2.abs() + 10.0;
    if v2 == 0.0 {
        // below the well floor K is imaginary and neither factor can vanish
        if v1 <= 0.0 {
            return Ok(Vec::new());
        }
        let f = |e: f64| -> Result<f64> { Ok(m(e).0.re) };
        let brs = scan_brackets(f, -v1 + 1e-12, -1e-12, 1e-3)?;
        return brs.into_iter().map(|b| refine_real(f, b, 1e-14)).collect();
    }
    real_zeros(m, e_max, 1e-10)
}

/// Even and odd matching factors (K sin K − κ cos K)(K cos K + κ sin K) with
/// K = √(E + V1 − iV2), κ = √(−E), and a scale for normalization.
pub fn rect_well_matching(e: f64, v1: f64, v2: f64) -> (C, f64) {
    let k = C::new(e + v1, -v2).sqrt();
    let kappa = C::new((-e).max(0.0).sqrt(), 0.0);
    let (s, c) = (k.sin(), k.cos());
    let even = k * s - kappa * c;
    let odd = k * c + kappa * s;
    let scale = ((k * s).norm() + (kappa * c).norm()) * ((k * c).norm() + (kappa * s).norm());
    (even * odd, scale)
}

/// Bound states of iV0·sgn(x) inside |x| < 1, zero outside.
pub fn step_well_spectrum(v0: f64) -> Result<Vec<f64>> {
    real_zeros(|e| step_well_matching(e, v0), v0.abs() + 10.0, 1e-10)
}

/// ψ'(1) + κψ(1) after transfer from ψ(−1) = 1, ψ'(−1) = κ through −iV0 on
/// (−1, 0) and +iV0 on (0, 1), with a scale for normalization.
pub fn step_well_matching(e: f64, v0: f64) -> (C, f64) {
    let kappa = (-e).max(0.0).sqrt();
    let step = |psi: C, dpsi: C, k: C| -> (C, C) {
        if k.norm() == 0.0 {
            return (psi + dpsi, dpsi);
        }
        let (s, c) = (k.sin(), k.cos());
        (psi * c + dpsi * s / k, -psi * k * s + dpsi * c)
    };
    let k1 = C::new(e, v0).sqrt();
    let k2 = C::new(e, -v0).sqrt();
    let (p, dp) = step(C::new(1.0, 0.0), C::new(kappa, 0.0), k1);
    let (p, dp) = step(p, dp, k2);
    (dp + p * kappa, dp.norm() + kappa * p.norm())
}

/// Normalized spread (max − min)/mean of |Im D| over E ∈ [−5, −0.5] (46 points)
/// for each g.
pub fn free_limit_check(g_seq: &[f64]) -> Result<Vec<f64>> {
    free_limit_check_with(g_seq, Exterior::default())
}

pub fn free_limit_check_with(g_seq: &[f64], exterior: Exterior) -> Result<Vec<f64>> {
    let grid: Vec<f64> = (0..46).map(|i| -5.0 + 0.1 * i as f64).collect();
    g_seq
        .iter()
        .map(|&g| {
            if !(g > 0.0) {
                return Err(Error::InvalidInput("free_limit_check needs g > 0".into()));
            }
            let p = SoftBoxProblem::with_exterior(g, exterior);
            // |Im D| in log form, then compared relative to the largest value
            let logs: Vec<f64> = grid
                .iter()
                .map(|&e| {
                    let (d, _) = bound_determinant(e, &p)?;
                    Ok(d.ln_norm() + d.mantissa.im.abs().ln() - d.mantissa.norm().ln())
                })
                .collect::<Result<_>>()?;
            let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let vals: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let (lo, hi) = vals.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            Ok((hi - lo) / mean)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_increasing() {
        let g = u_grid(3.3);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
