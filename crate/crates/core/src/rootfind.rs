//! Root location for characteristic functions: real brackets, Brent
//! refinement, complex Newton, argument-principle counting, and continuation
//! of a real root through a parameter with coalescence detection.
//!
//! Function arguments are fallible closures so that overflow or non-finite
//! evaluations propagate as errors instead of poisoning the search.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cplx, is_finite_c, Real};

/// Default energy scan step.
pub const DEFAULT_SCAN_STEP: f64 = 0.05;
/// Two tracked roots closer than this are treated as coalesced.
pub const COALESCENCE_GAP: f64 = 1e-4;
/// Relative step for first-derivative finite differences.
pub const FD_STEP: f64 = 1e-6;
/// Step for the Jacobian of the two-dimensional coalescence polish.
pub const JACOBIAN_STEP: f64 = 1e-4;

/// A grid interval whose endpoint values differ in sign (one may be zero).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    pub f_lo: T,
    pub f_hi: T,
}

/// A root followed through a parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct RootPath<T> {
    pub params: Vec<T>,
    pub roots: Vec<Complex<T>>,
    pub coalesced: bool,
    /// (g, E) where the root merged with its partner, when it did.
    pub coalescence: Option<(T, T)>,
}

/// Solution of f = ∂f/∂E = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coalescence<T> {
    pub g: T,
    pub e: T,
    /// |f| at the solution relative to the sampled scale of f in the window.
    pub residual_f: T,
    /// |∂f/∂E| relative to scale / window width.
    pub residual_df: T,
}

fn check<T: Real>(v: T, at: T) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::non_finite_at(format!("x = {at}")))
    }
}

/// Sign-change brackets of `f` on a uniform grid over `[lo, hi]`.
///
/// Roots closer together than the grid step can be missed.
pub fn scan_brackets<T: Real>(
    mut f: impl FnMut(T) -> Result<T>,
    lo: T,
    hi: T,
    step: T,
) -> Result<Vec<Bracket<T>>> {
    if !(step > T::zero()) || !(hi > lo) {
        return Err(Error::InvalidInput(format!("scan [{lo}, {hi}] with step {step}")));
    }
    let n = ((hi - lo) / step).ceil().to_usize().unwrap_or(1).max(1);
    let h = (hi - lo) / T::of(n);
    let mut out = Vec::new();
    let mut x0 = lo;
    let mut f0 = check(f(lo)?, lo)?;
    for i in 1..=n {
        let x1 = if i == n { hi } else { lo + h * T::of(i) };
        let f1 = check(f(x1)?, x1)?;
        let straddles = (f0 < T::zero() && f1 > T::zero()) || (f0 > T::zero() && f1 < T::zero());
        let lands = f1 == T::zero() && f0 != T::zero();
        let starts = i == 1 && f0 == T::zero();
        if straddles || lands || starts {
            out.push(Bracket { lo: x0, hi: x1, f_lo: f0, f_hi: f1 });
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(out)
}

/// Brent's method inside a bracket. The result always lies in `[lo, hi]`.
pub fn refine_real<T: Real>(mut f: impl FnMut(T) -> Result<T>, br: Bracket<T>, tol: T) -> Result<T> {
    let fail = |x: T| Error::ToleranceNotMet(format!("non-finite value at {x}"));
    let (mut a, mut b) = (br.lo, br.hi);
    let (mut fa, mut fb) = (br.f_lo, br.f_hi);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    for _ in 0..200 {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + half * tol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = T::lit(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b = b + if d.abs() > tol1 { d } else { tol1 * xm.signum() };
        fb = f(b)?;
        if !fb.is_finite() {
            return Err(fail(b));
        }
    }
    Ok(b)
}

/// Newton iteration in the complex plane with a central-difference derivative.
/// Converged when |f(z)| <= tol.
pub fn newton_complex<T: Real>(
    mut f: impl FnMut(Complex<T>) -> Result<Complex<T>>,
    seed: Complex<T>,
    tol: T,
) -> Result<Complex<T>> {
    if !is_finite_c(seed) {
        return Err(Error::non_finite_at("Newton seed"));
    }
    let mut z = seed;
    let mut fz = f(z)?;
    for _ in 0..100 {
        if !is_finite_c(fz) {
            return Err(Error::non_finite_at(format!("z = {z}")));
        }
        if fz.norm() <= tol {
            return Ok(z);
        }
        let h = T::lit(FD_STEP) * T::one().max(z.norm());
        let hc = cplx(h, T::zero());
        let d = (f(z + hc)? - f(z - hc)?) / (h * T::lit(2.0));
        if d.norm() < T::lit(1e-14) {
            return Err(Error::NoConvergence(format!("derivative vanished near {z}")));
        }
        let step = fz / d;
        // damped update: halve until |f| does not grow
        let mut lambda = T::one();
        let mut next = z - step;
        let mut fnext = f(next)?;
        for _ in 0..12 {
            if is_finite_c(fnext) && fnext.norm() <= fz.norm() {
                break;
            }
            lambda = lambda * T::lit(0.5);
            next = z - step * lambda;
            fnext = f(next)?;
        }
        if next == z {
            break;
        }
        z = next;
        fz = fnext;
    }
    if is_finite_c(fz) && fz.norm() <= tol {
        return Ok(z);
    }
    Err(Error::NoConvergence(format!("|f| = {} at {z} after 100 iterations", fz.norm())))
}

/// Number of zeros of `f` inside the axis-aligned rectangle, by the argument
/// principle. Edges are sampled uniformly and subdivided where the phase
/// moves too fast to unwrap safely.
pub fn count_roots_rect<T: Real>(
    mut f: impl FnMut(Complex<T>) -> Result<Complex<T>>,
    rect: (T, T, T, T),
    samples_per_edge: usize,
) -> Result<i64> {
    let (x0, x1, y0, y1) = rect;
    if !(x1 > x0 && y1 > y0) || samples_per_edge == 0 {
        return Err(Error::InvalidInput("degenerate rectangle".into()));
    }
    let corners = [cplx(x0, y0), cplx(x1, y0), cplx(x1, y1), cplx(x0, y1)];
    let mut total = T::zero();
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let mut za = a;
        let mut fa = eval_contour(&mut f, za)?;
        for i in 1..=samples_per_edge {
            let zb = a + (b - a) * (T::of(i) / T::of(samples_per_edge));
            let fb = eval_contour(&mut f, zb)?;
            total = total + phase_change(&mut f, za, fa, zb, fb, 0)?;
            za = zb;
            fa = fb;
        }
    }
    let turns = total / (T::lit(2.0) * T::PI());
    Ok(turns.round().to_i64().unwrap_or(0))
}

fn eval_contour<T: Real>(f: &mut impl FnMut(Complex<T>) -> Result<Complex<T>>, z: Complex<T>) -> Result<Complex<T>> {
    let v = f(z)?;
    if !is_finite_c(v) {
        return Err(Error::non_finite_at(format!("contour point {z}")));
    }
    if v.norm() < T::lit(1e-12) {
        return Err(Error::RootOnContour {
            re: z.re.to_f64().unwrap_or(f64::NAN),
            im: z.im.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(v)
}

fn phase_change<T: Real>(
    f: &mut impl FnMut(Complex<T>) -> Result<Complex<T>>,
    za: Complex<T>,
    fa: Complex<T>,
    zb: Complex<T>,
    fb: Complex<T>,
    depth: usize,
) -> Result<T> {
    let d = (fb / fa).arg();
    if d.abs() <= T::FRAC_PI_4() || depth >= 24 {
        return Ok(d);
    }
    let zm = (za + zb) * T::lit(0.5);
    let fm = eval_contour(f, zm)?;
    Ok(phase_change(f, za, fa, zm, fm, depth + 1)? + phase_change(f, zm, fm, zb, fb, depth + 1)?)
}

/// Central-difference derivative of a real function.
pub fn derivative<T: Real>(f: &mut impl FnMut(T) -> Result<T>, x: T) -> Result<T> {
    let h = T::lit(FD_STEP) * T::one().max(x.abs());
    Ok((f(x + h)? - f(x - h)?) / (h * T::lit(2.0)))
}

/// Brackets of `f` in `[lo, hi]` using `n` subintervals.
fn local_brackets<T: Real>(f: &mut impl FnMut(T) -> Result<T>, lo: T, hi: T, n: usize) -> Result<Vec<Bracket<T>>> {
    scan_brackets(|x| f(x), lo, hi, (hi - lo) / T::of(n))
}

/// Roots of `f` in `[lo, hi]`, refined.
fn local_roots<T: Real>(f: &mut impl FnMut(T) -> Result<T>, lo: T, hi: T, n: usize) -> Result<Vec<T>> {
    let brs = local_brackets(f, lo, hi, n)?;
    let tol = T::epsilon() * T::lit(64.0) * T::one().max(lo.abs().max(hi.abs()));
    brs.into_iter().map(|b| refine_real(|x| f(x), b, tol)).collect()
}

/// Golden-section minimum of |f| on `[lo, hi]`.
fn min_abs<T: Real>(f: &mut impl FnMut(T) -> Result<T>, lo: T, hi: T) -> Result<(T, T)> {
    // coarse sample first so that the golden search starts in the right basin
    let n = 32;
    let mut best = (lo, f(lo)?.abs());
    for i in 1..=n {
        let x = lo + (hi - lo) * T::of(i) / T::of(n);
        let v = f(x)?.abs();
        if v < best.1 {
            best = (x, v);
        }
    }
    let w = (hi - lo) / T::of(n);
    let (mut a, mut b) = (best.0 - w, best.0 + w);
    let r = T::lit(0.618_033_988_749_894_9);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?.abs();
    let mut fd = f(d)?.abs();
    for _ in 0..100 {
        if (b - a).abs() <= T::epsilon() * T::lit(16.0) * T::one().max(a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?.abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?.abs();
        }
    }
    let x = (a + b) * T::lit(0.5);
    let v = f(x)?.abs();
    Ok(if v < best.1 { (x, v) } else { best })
}

/// Follow the real root `e0` of `f(g0, ·)` to `g1` in `steps` uniform steps.
///
/// Each step predicts from the last slope and searches a window that widens
/// until a sign change is found. The path stops with `coalesced` set when
/// the root meets a partner within [`COALESCENCE_GAP`], lands on a double
/// root, or vanishes together with its partner.
pub fn track_root<T: Real>(
    mut f: impl FnMut(T, T) -> Result<T>,
    e0: T,
    g0: T,
    g1: T,
    steps: usize,
) -> Result<RootPath<T>> {
    if steps == 0 {
        return Err(Error::InvalidInput("track_root needs at least one step".into()));
    }
    let lost = |g: T, e: T| Error::LostRoot { g: g.to_f64().unwrap_or(f64::NAN), e: e.to_f64().unwrap_or(f64::NAN) };
    let zero = T::zero();
    let mut path = RootPath { params: vec![g0], roots: vec![cplx(e0, zero)], coalesced: false, coalescence: None };
    let dg = (g1 - g0) / T::of(steps);
    let base = T::lit(1e-3) * T::one().max(e0.abs());
    let mut e = e0;
    let mut slope = zero;
    let mut partner: Option<T> = None;
    let mut gprev = g0;
    for i in 1..=steps {
        let g = if i == steps { g1 } else { g0 + dg * T::of(i) };
        let pred = e + slope * dg;
        let mut fg = |x: T| f(g, x);
        let w0 = base.max((pred - e).abs() * T::lit(2.0));
        let mut found = None;
        let mut w = w0;
        for _ in 0..8 {
            let roots = local_roots(&mut fg, pred - w, pred + w, 16)?;
            if let Some(r) = roots.iter().copied().min_by(|a, b| {
                (*a - pred).abs().partial_cmp(&(*b - pred).abs()).unwrap_or(std::cmp::Ordering::Equal)
            }) {
                found = Some((r, roots));
                break;
            }
            w = w * T::lit(2.0);
        }
        match found {
            Some((r, roots)) => {
                // partner = nearest other root, checked over a window around r
                let span = w.max((r - e).abs() * T::lit(4.0));
                let mut near: Vec<T> = local_roots(&mut fg, r - span, r + span, 64)?;
                near.extend(roots);
                partner = near
                    .into_iter()
                    .filter(|x| (*x - r).abs() > T::epsilon() * T::lit(1e3) * T::one().max(r.abs()))
                    .min_by(|a, b| (*a - r).abs().partial_cmp(&(*b - r).abs()).unwrap_or(std::cmp::Ordering::Equal));
                slope = (r - e) / (g - gprev);
                e = r;
                gprev = g;
                path.params.push(g);
                path.roots.push(cplx(r, zero));
                if let Some(p) = partner {
                    if (p - r).abs() < T::lit(COALESCENCE_GAP) {
                        path.coalesced = true;
                        path.coalescence = Some((g, (p + r) * T::lit(0.5)));
                        return Ok(path);
                    }
                }
            }
            None => {
                // no sign change: a double root, or the pair has left the real axis
                let (xm, vm) = min_abs(&mut fg, pred - w0, pred + w0)?;
                let scale = fg(pred - w0)?.abs().max(fg(pred + w0)?.abs());
                let dfm = derivative(&mut fg, xm)?.abs();
                if vm <= T::lit(1e-9) * scale && dfm * w0 <= T::lit(1e-4) * scale {
                    path.params.push(g);
                    path.roots.push(cplx(xm, zero));
                    path.coalesced = true;
                    path.coalescence = Some((g, xm));
                    return Ok(path);
                }
                if let Some(p) = partner {
                    let lo = e.min(p) - w;
                    let hi = e.max(p) + w;
                    if local_roots(&mut fg, lo, hi, 64)?.is_empty() {
                        path.coalesced = true;
                        path.coalescence = Some(((gprev + g) * T::lit(0.5), (e + p) * T::lit(0.5)));
                        return Ok(path);
                    }
                }
                return Err(lost(gprev, e));
            }
        }
    }
    Ok(path)
}

fn partial_e<T: Real>(f: &mut dyn FnMut(T, T) -> Result<T>, g: T, e: T) -> Result<T> {
    let h = T::lit(FD_STEP) * T::one().max(e.abs());
    Ok((f(g, e + h)? - f(g, e - h)?) / (h * T::lit(2.0)))
}

/// The stationary point of f(g, ·) in `[elo, ehi]` with the smallest |f|,
/// returned with the value of f there.
fn stationary_point<T: Real>(f: &mut dyn FnMut(T, T) -> Result<T>, g: T, elo: T, ehi: T) -> Result<(T, T)> {
    let brs = scan_brackets(|x| partial_e(f, g, x), elo, ehi, (ehi - elo) / T::lit(200.0))?;
    let tol = T::epsilon() * T::lit(64.0) * T::one().max(ehi.abs());
    let mut best: Option<(T, T)> = None;
    for b in brs {
        let x = refine_real(|x| partial_e(f, g, x), b, tol)?;
        let v = f(g, x)?;
        if best.map_or(true, |(_, bv)| v.abs() < bv.abs()) {
            best = Some((x, v));
        }
    }
    best.ok_or_else(|| Error::NoConvergence(format!("no stationary point of f in the window at g = {g}")))
}

/// Solve f(g, E) = 0 together with ∂f/∂E = 0 for g in `[ga, gb]` and E in
/// `e_window`.
///
/// For each g the extremum E*(g) of f between the merging pair is located as
/// a root of ∂f/∂E; the sign change of f(g, E*(g)) is then bisected in g and
/// the result polished by a two-dimensional Newton step.
pub fn find_coalescence<T: Real>(
    mut f: impl FnMut(T, T) -> Result<T>,
    g_bracket: (T, T),
    e_window: (T, T),
) -> Result<Coalescence<T>> {
    let (ga, gb) = g_bracket;
    let (elo, ehi) = e_window;
    if !(ehi > elo) {
        return Err(Error::InvalidInput("empty energy window".into()));
    }
    let width = ehi - elo;
    // E*(g): the stationary point of f(g, ·) with the smallest |f|.
    let stationary = |g: T, f: &mut dyn FnMut(T, T) -> Result<T>| stationary_point(f, g, elo, ehi);
    let (_, ha) = stationary(ga, &mut f)?;
    let (_, hb) = stationary(gb, &mut f)?;
    if (ha > T::zero()) == (hb > T::zero()) {
        return Err(Error::NoConvergence("pair does not vanish across the g bracket".into()));
    }
    let br = Bracket { lo: ga, hi: gb, f_lo: ha, f_hi: hb };
    let gtol = T::epsilon() * T::lit(16.0) * T::one().max(gb.abs());
    let gc = refine_real(|g| Ok(stationary(g, &mut f)?.1), br, gtol)?;
    let (ec, _) = stationary(gc, &mut f)?;

    // 2-D Newton polish on (f, f_E)
    let (mut g, mut e) = (gc, ec);
    let fe_at = |g: T, e: T, f: &mut dyn FnMut(T, T) -> Result<T>| partial_e(f, g, e);
    let mut scale = T::zero();
    for i in 0..=20 {
        let x = elo + width * T::of(i) / T::lit(20.0);
        scale = scale.max(f(g, x)?.abs());
    }
    if scale == T::zero() {
        return Err(Error::NoConvergence("f vanishes identically in the window".into()));
    }
    let dscale = scale / width;
    let resid = |v: T, d: T| (v.abs() / scale, d.abs() / dscale);
    let mut r = resid(f(g, e)?, fe_at(g, e, &mut f)?);
    let j = T::lit(JACOBIAN_STEP);
    for _ in 0..8 {
        if r.0 <= T::lit(1e-12) && r.1 <= T::lit(1e-12) {
            break;
        }
        let f0 = f(g, e)?;
        let d0 = fe_at(g, e, &mut f)?;
        let hg = j * T::one().max(g.abs());
        let he = j * T::one().max(e.abs());
        let two = T::lit(2.0);
        // Jacobian of (f, f_E) with respect to (g, E)
        let fg = (f(g + hg, e)? - f(g - hg, e)?) / (hg * two);
        let fe = (f(g, e + he)? - f(g, e - he)?) / (he * two);
        let dg = (fe_at(g + hg, e, &mut f)? - fe_at(g - hg, e, &mut f)?) / (hg * two);
        let de = (fe_at(g, e + he, &mut f)? - fe_at(g, e - he, &mut f)?) / (he * two);
        let det = fg * de - fe * dg;
        if det == T::zero() || !det.is_finite() {
            break;
        }
        let dgs = -(f0 * de - fe * d0) / det;
        let des = -(fg * d0 - dg * f0) / det;
        let (ng, ne) = (g + dgs, e + des);
        let nr = resid(f(ng, ne)?, fe_at(ng, ne, &mut f)?);
        if nr.0.max(nr.1) < r.0.max(r.1) {
            g = ng;
            e = ne;
            r = nr;
        } else {
            break;
        }
    }
    if r.0 <= T::lit(1e-8) && r.1 <= T::lit(1e-8) {
        Ok(Coalescence { g, e, residual_f: r.0, residual_df: r.1 })
    } else {
        Err(Error::NoConvergence(format!("coalescence residuals {} and {}", r.0, r.1)))
    }
}
