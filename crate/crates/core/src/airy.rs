//! Airy functions Ai, Bi and their derivatives for complex argument.
//!
//! Three regions, chosen by |z|:
//! - |z| <= 3: Maclaurin series in the f/g form.
//! - |z| >= 8: asymptotic expansion of Ai, truncated at the smallest term,
//!   with the connection formula for |arg z| > 2π/3.
//! - between: Taylor-series integration of w'' = z w along the ray through z,
//!   started from whichever end keeps Ai the dominant solution.
//!
//! Bi outside the series disk comes from Ai at the rotated points ωz, ω̄z.
//! Lower half-plane values are obtained by conjugation so that
//! `airy(conj z) == conj(airy(z))` holds exactly.
//!
//! The standard large-|z| prefactor is z^{-1/4} for Ai and Bi. Some texts
//! print it as z^{+1/4}; that is a slip and is not used here.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, cplx, is_finite_c, Real, Scaled};

const SERIES_RADIUS: f64 = 3.0;
const ASYMPTOTIC_RADIUS: f64 = 8.0;
const ODE_STEP: f64 = 0.5;
const MAX_SERIES_TERMS: usize = 200;
const MAX_ASYMPTOTIC_TERMS: usize = 40;

/// Ai(0) = 3^{-2/3}/Γ(2/3).
const C1: f64 = 0.355_028_053_887_817_239_260;
/// -Ai'(0) = 3^{-1/3}/Γ(1/3).
const C2: f64 = 0.258_819_403_792_806_798_405;

/// The quadruple (Ai, Ai', Bi, Bi') at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AiryValues<T> {
    pub ai: Complex<T>,
    pub dai: Complex<T>,
    pub bi: Complex<T>,
    pub dbi: Complex<T>,
}

impl<T: Real> AiryValues<T> {
    /// Ai·Bi' − Ai'·Bi, equal to 1/π.
    pub fn wronskian(&self) -> Complex<T> {
        self.ai * self.dbi - self.dai * self.bi
    }
}

/// Same quadruple with each value in log-scaled form; never overflows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledAiry<T> {
    pub ai: Scaled<T>,
    pub dai: Scaled<T>,
    pub bi: Scaled<T>,
    pub dbi: Scaled<T>,
}

impl<T: Real> ScaledAiry<T> {
    pub fn to_plain(&self) -> Result<AiryValues<T>> {
        let get = |s: &Scaled<T>| s.to_complex().ok_or(Error::Overflow);
        Ok(AiryValues { ai: get(&self.ai)?, dai: get(&self.dai)?, bi: get(&self.bi)?, dbi: get(&self.dbi)? })
    }

    fn conj(self) -> Self {
        Self { ai: self.ai.conj(), dai: self.dai.conj(), bi: self.bi.conj(), dbi: self.dbi.conj() }
    }

    fn real_part(self) -> Self {
        let re = |s: Scaled<T>| Scaled::new(cplx(s.mantissa.re, T::zero()), s.exponent);
        Self { ai: re(self.ai), dai: re(self.dai), bi: re(self.bi), dbi: re(self.dbi) }
    }
}

/// Ai, Ai', Bi, Bi' at `z`.
///
/// Returns `Overflow` when a value does not fit in `T`; use [`airy_scaled`]
/// to get such values anyway.
pub fn airy_eval<T: Real>(z: Complex<T>) -> Result<AiryValues<T>> {
    airy_scaled(z)?.to_plain()
}

/// Ai, Ai', Bi, Bi' at `z` in log-scaled form.
pub fn airy_scaled<T: Real>(z: Complex<T>) -> Result<ScaledAiry<T>> {
    if !is_finite_c(z) {
        return Err(Error::non_finite_at(format!("z = {}{:+}i", z.re, z.im)));
    }
    if z.im < T::zero() {
        return Ok(airy_upper(z.conj()).conj());
    }
    let v = airy_upper(z);
    if z.im == T::zero() {
        Ok(v.real_part())
    } else {
        Ok(v)
    }
}

fn airy_upper<T: Real>(z: Complex<T>) -> ScaledAiry<T> {
    if z.norm() <= T::lit(SERIES_RADIUS) {
        let v = airy_series(z);
        let s = Scaled::from_complex;
        return ScaledAiry { ai: s(v.ai), dai: s(v.dai), bi: s(v.bi), dbi: s(v.dbi) };
    }
    let (ai, dai) = ai_any(z);
    let w = omega::<T>();
    let (a1, d1) = ai_any(w * z);
    let (a2, d2) = ai_any(w.conj() * z);
    let p = cis(T::PI() / T::lit(6.0));
    let p5 = cis(T::lit(5.0) * T::PI() / T::lit(6.0));
    let bi = a1 * p + a2 * p.conj();
    let dbi = d1 * p5 + d2 * p5.conj();
    ScaledAiry { ai, dai, bi, dbi }
}

#[inline]
fn omega<T: Real>() -> Complex<T> {
    cis(T::lit(2.0) * T::PI() / T::lit(3.0))
}

/// Ai and Ai' anywhere.
fn ai_any<T: Real>(z: Complex<T>) -> (Scaled<T>, Scaled<T>) {
    let r = z.norm();
    if r <= T::lit(SERIES_RADIUS) {
        let v = airy_series(z);
        return (Scaled::from_complex(v.ai), Scaled::from_complex(v.dai));
    }
    let arg = z.im.atan2(z.re).abs();
    if arg <= T::lit(2.0) * T::FRAC_PI_3() {
        return ai_sector(z);
    }
    // Ai(z) = −ω Ai(ωz) − ω̄ Ai(ω̄z); both rotated points lie inside the sector.
    let w = omega::<T>();
    let (a1, d1) = ai_sector(w * z);
    let (a2, d2) = ai_sector(w.conj() * z);
    let ai = -(a1 * w) - a2 * w.conj();
    let dai = -(d1 * (w * w)) - d2 * w;
    (ai, dai)
}

/// Ai and Ai' for |arg z| <= 2π/3 and |z| > 3.
fn ai_sector<T: Real>(z: Complex<T>) -> (Scaled<T>, Scaled<T>) {
    let r = z.norm();
    if r >= T::lit(ASYMPTOTIC_RADIUS) {
        return ai_asymptotic_scaled(z);
    }
    let dir = z / r;
    let arg = z.im.atan2(z.re).abs();
    let (start, w0, dw0) = if arg <= T::FRAC_PI_3() {
        let z0 = dir * T::lit(ASYMPTOTIC_RADIUS);
        let (a, d) = ai_asymptotic_scaled(z0);
        (z0, a.to_complex().unwrap_or_default(), d.to_complex().unwrap_or_default())
    } else {
        let z0 = dir * T::lit(SERIES_RADIUS);
        let v = airy_series(z0);
        (z0, v.ai, v.dai)
    };
    let (w, dw) = integrate_ray(start, z, w0, dw0);
    (Scaled::from_complex(w), Scaled::from_complex(dw))
}

/// Integrate w'' = z w from `a` to `b` along the straight segment using
/// local Taylor series.
fn integrate_ray<T: Real>(
    a: Complex<T>,
    b: Complex<T>,
    mut w: Complex<T>,
    mut dw: Complex<T>,
) -> (Complex<T>, Complex<T>) {
    let dist = (b - a).norm();
    let n = (dist / T::lit(ODE_STEP)).ceil().to_usize().unwrap_or(1).max(1);
    let h = (b - a) / T::of(n);
    let tiny = T::epsilon() * T::lit(0.01);
    for i in 0..n {
        let x = a + h * T::of(i);
        // c_{k+2} = (x c_k + c_{k-1}) / ((k+2)(k+1))
        let (mut cm1, mut c0, mut c1) = (Complex::new(T::zero(), T::zero()), w, dw);
        let mut hp = h; // h^k for the c_k term, k = 1
        let mut sum = c0 + c1 * h;
        let mut dsum = c1;
        let mut small = 0;
        for k in 0..120usize {
            let c2 = (x * c0 + cm1) / (T::of(k + 2) * T::of(k + 1));
            let dterm = c2 * hp * T::of(k + 2);
            hp = hp * h;
            let term = c2 * hp;
            sum = sum + term;
            dsum = dsum + dterm;
            if term.norm() <= tiny * sum.norm() && dterm.norm() <= tiny * dsum.norm() {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
            cm1 = c0;
            c0 = c1;
            c1 = c2;
        }
        w = sum;
        dw = dsum;
    }
    (w, dw)
}

/// Maclaurin series for all four functions. Accurate for modest |z|.
pub fn airy_series<T: Real>(z: Complex<T>) -> AiryValues<T> {
    let one = cplx(T::one(), T::zero());
    let z3 = z * z * z;
    // f, g and their derivatives, term by term.
    let (mut f, mut g) = (one, z);
    let (mut tf, mut tg) = (one, z);
    let mut fp = Complex::new(T::zero(), T::zero());
    let mut gp = one;
    let mut tfp = z * z / T::lit(2.0);
    let mut tgp = one;
    let tol = T::epsilon() * T::lit(0.1);
    for k in 1..MAX_SERIES_TERMS {
        let kk = T::of(3 * k);
        tf = tf * z3 / ((kk - T::one()) * kk);
        tg = tg * z3 / (kk * (kk + T::one()));
        if k >= 2 {
            tfp = tfp * z3 / ((kk - T::one()) * (kk - T::lit(3.0)));
        }
        tgp = tgp * z3 / (kk * (kk - T::lit(2.0)));
        f = f + tf;
        g = g + tg;
        fp = fp + tfp;
        gp = gp + tgp;
        let done = tf.norm() <= tol * f.norm()
            && tg.norm() <= tol * g.norm()
            && tfp.norm() <= tol * fp.norm()
            && tgp.norm() <= tol * gp.norm();
        if done {
            break;
        }
    }
    let c1 = T::lit(C1);
    let c2 = T::lit(C2);
    let s3 = T::lit(3.0).sqrt();
    AiryValues {
        ai: f * c1 - g * c2,
        dai: fp * c1 - gp * c2,
        bi: (f * c1 + g * c2) * s3,
        dbi: (fp * c1 + gp * c2) * s3,
    }
}

/// Leading asymptotic expansion of Ai and Ai', valid for large |z| with
/// |arg z| < π. Returned as plain values; overflows to non-finite values when
/// they are not representable.
pub fn airy_asymptotic<T: Real>(z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let (a, d) = ai_asymptotic_scaled(z);
    let nan = cplx(T::nan(), T::nan());
    (a.to_complex().unwrap_or(nan), d.to_complex().unwrap_or(nan))
}

fn ai_asymptotic_scaled<T: Real>(z: Complex<T>) -> (Scaled<T>, Scaled<T>) {
    let sz = z.sqrt();
    let zeta = z * sz * T::lit(2.0 / 3.0);
    let q = sz.sqrt(); // z^{1/4}
    let inv = zeta.inv();
    let one = cplx(T::one(), T::zero());
    let (mut s, mut sp) = (one, one);
    let (mut u, mut pw) = (T::one(), one);
    let mut last = T::infinity();
    let mut last_p = T::infinity();
    let mut s_live = true;
    let mut sp_live = true;
    for k in 1..MAX_ASYMPTOTIC_TERMS {
        let kf = T::of(k);
        u = u * (T::lit(6.0) * kf - T::lit(5.0)) * (T::lit(6.0) * kf - T::lit(3.0)) * (T::lit(6.0) * kf - T::one())
            / ((T::lit(2.0) * kf - T::one()) * T::lit(216.0) * kf);
        let v = -(T::lit(6.0) * kf + T::one()) / (T::lit(6.0) * kf - T::one()) * u;
        pw = -pw * inv;
        let t = pw * u;
        let tp = pw * v;
        if s_live {
            if t.norm() >= last {
                s_live = false;
            } else {
                s = s + t;
                last = t.norm();
                if last <= T::epsilon() * T::lit(0.01) * s.norm() {
                    s_live = false;
                }
            }
        }
        if sp_live {
            if tp.norm() >= last_p {
                sp_live = false;
            } else {
                sp = sp + tp;
                last_p = tp.norm();
                if last_p <= T::epsilon() * T::lit(0.01) * sp.norm() {
                    sp_live = false;
                }
            }
        }
        if !s_live && !sp_live {
            break;
        }
    }
    let two_sqrt_pi = T::lit(2.0) * T::PI().sqrt();
    let phase = cis(-zeta.im);
    let ai = Scaled::new(s / (q * two_sqrt_pi) * phase, -zeta.re);
    let dai = Scaled::new(-(sp * q) / two_sqrt_pi * phase, -zeta.re);
    (ai, dai)
}

/// Finite-difference residual of w'' = z w for Ai and Bi at `z`; the larger
/// of the two.
pub fn airy_ode_residual<T: Real>(z: Complex<T>, h: T) -> Result<T> {
    if !(h > T::zero() && h <= T::lit(1e-2)) {
        return Err(Error::InvalidInput(format!("step h = {h} outside (0, 1e-2]")));
    }
    let hc = cplx(h, T::zero());
    let m = airy_eval(z - hc)?;
    let c = airy_eval(z)?;
    let p = airy_eval(z + hc)?;
    let h2 = h * h;
    let ra = ((p.ai - c.ai * T::lit(2.0) + m.ai) / h2 - z * c.ai).norm();
    let rb = ((p.bi - c.bi * T::lit(2.0) + m.bi) / h2 - z * c.bi).norm();
    Ok(ra.max(rb))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_closed_forms() {
        let v = airy_eval(Complex::new(0.0_f64, 0.0)).unwrap();
        assert!((v.ai.re - C1).abs() < 1e-15);
        assert!((v.dai.re + C2).abs() < 1e-15);
        assert!((v.bi.re - 0.614_926_627_446_000_7).abs() < 1e-15);
        assert!((v.dbi.re - 0.448_288_357_353_826_36).abs() < 1e-15);
    }

    #[test]
    fn regions_agree_near_inner_seam() {
        for k in 0..24 {
            let th = std::f64::consts::PI * (k as f64) / 12.0;
            let z = Complex::from_polar(3.2, th);
            let a = airy_series(z);
            let b = airy_eval(z).unwrap();
            let rel = (a.ai - b.ai).norm() / b.ai.norm();
            assert!(rel < 1e-11, "theta {th}: rel {rel}");
        }
    }

    #[test]
    fn f32_instantiation_works() {
        let v = airy_eval(Complex::new(1.0_f32, 0.5)).unwrap();
        let w = v.wronskian();
        assert!((w.re - std::f32::consts::FRAC_1_PI).abs() < 1e-4);
    }
}
