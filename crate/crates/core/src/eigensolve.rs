//! The hard-box Hamiltonian in the basis of box eigenstates, and a dense
//! complex eigenvalue solver (Householder reduction to Hessenberg form,
//! then shifted QR with deflation).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::rootfind::newton_complex;
use crate::scalar::{cplx, Real};

/// Default basis truncation.
pub const DEFAULT_N: usize = 40;

/// Dense n×n complex matrix in the box basis, indices r, s = 1..=n.
#[derive(Clone, Debug, PartialEq)]
pub struct HMatrix<T> {
    pub n: usize,
    pub g: Complex<T>,
    /// Row-major entries.
    pub entries: Vec<Complex<T>>,
}

impl<T: Real> HMatrix<T> {
    /// Entry (r, s), zero-based.
    #[inline]
    pub fn at(&self, r: usize, s: usize) -> Complex<T> {
        self.entries[r * self.n + s]
    }

    /// Largest row sum of moduli.
    pub fn norm_inf(&self) -> T {
        (0..self.n)
            .map(|r| (0..self.n).fold(T::zero(), |acc, s| acc + self.at(r, s).norm()))
            .fold(T::zero(), T::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenKind {
    Real,
    /// Member of a complex-conjugate pair.
    ConjugatePair,
    /// Complex with no conjugate partner (non-real coupling).
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenvalue<T> {
    pub value: Complex<T>,
    pub kind: EigenKind,
    /// Inverse-iteration residual ‖Hv − Ev‖ / (‖H‖ ‖v‖).
    pub residual: T,
}

/// H_rs = δ_rs r²π²/4 + (−1)^{t/2} 16 i g r s / (π² (r² − s²)²) for even
/// t = r + s + 1, zero otherwise.
pub fn build_hardbox_matrix<T: Real>(g: Complex<T>, n: usize) -> HMatrix<T> {
    let n = n.max(1);
    let pi2 = T::PI() * T::PI();
    let mut entries = vec![cplx(T::zero(), T::zero()); n * n];
    for r in 1..=n {
        for s in 1..=n {
            let v = if r == s {
                cplx(T::of(r * r) * pi2 / T::lit(4.0), T::zero())
            } else if (r + s + 1) % 2 == 0 {
                let sign = if ((r + s + 1) / 2) % 2 == 0 { T::one() } else { -T::one() };
                let diff = T::of(r * r) - T::of(s * s);
                let k = sign * T::lit(16.0) * T::of(r) * T::of(s) / (pi2 * diff * diff);
                cplx(T::zero(), k) * g
            } else {
                cplx(T::zero(), T::zero())
            };
            entries[(r - 1) * n + (s - 1)] = v;
        }
    }
    HMatrix { n, g, entries }
}

/// ‖P H P − H†‖_max with P = diag((−1)^r).
pub fn pseudo_hermiticity_residual<T: Real>(h: &HMatrix<T>) -> T {
    let mut worst = T::zero();
    for r in 0..h.n {
        for s in 0..h.n {
            let sign = if (r + s) % 2 == 0 { T::one() } else { -T::one() };
            worst = worst.max((h.at(r, s) * sign - h.at(s, r).conj()).norm());
        }
    }
    worst
}

/// ‖H − Hᵀ‖_max.
pub fn symmetry_residual<T: Real>(h: &HMatrix<T>) -> T {
    let mut worst = T::zero();
    for r in 0..h.n {
        for s in 0..r {
            worst = worst.max((h.at(r, s) - h.at(s, r)).norm());
        }
    }
    worst
}

/// LU factorization with partial pivoting, in place. Returns the pivot
/// permutation parity (+1 or −1) and the row order.
fn lu_in_place<T: Real>(a: &mut [Complex<T>], n: usize) -> (T, Vec<usize>) {
    let mut parity = T::one();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].norm().partial_cmp(&a[j * n + k].norm()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(k);
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            parity = -parity;
        }
        let piv = a[k * n + k];
        if piv.norm() == T::zero() {
            continue;
        }
        for i in k + 1..n {
            let m = a[i * n + k] / piv;
            a[i * n + k] = m;
            for j in k + 1..n {
                let t = a[k * n + j];
                a[i * n + j] = a[i * n + j] - m * t;
            }
        }
    }
    (parity, perm)
}

/// det(H − E·I) by LU with partial pivoting. Singular input gives zero.
pub fn det_characteristic<T: Real>(h: &HMatrix<T>, e: Complex<T>) -> Complex<T> {
    let n = h.n;
    let mut a = h.entries.clone();
    for i in 0..n {
        a[i * n + i] = a[i * n + i] - e;
    }
    let (parity, _) = lu_in_place(&mut a, n);
    (0..n).fold(cplx(parity, T::zero()), |acc, i| acc * a[i * n + i])
}

/// Refine a root of det(H − E·I) by Newton iteration on the determinant
/// normalized at a nearby point.
pub fn det_root<T: Real>(h: &HMatrix<T>, seed: Complex<T>, tol: T) -> Result<Complex<T>> {
    let offset = cplx(T::lit(0.5), T::lit(0.5));
    let norm = det_characteristic(h, seed + offset);
    if norm.norm() == T::zero() || !norm.norm().is_finite() {
        return Err(Error::NoConvergence("determinant normalization degenerate".into()));
    }
    newton_complex(|e| Ok(det_characteristic(h, e) / norm), seed, tol)
}

/// Eigenvalues of a general dense complex matrix (row-major, n×n).
pub fn complex_eigenvalues<T: Real>(matrix: &[Complex<T>], n: usize) -> Result<Vec<Complex<T>>> {
    if matrix.len() != n * n {
        return Err(Error::InvalidInput(format!("matrix of length {} is not {n}×{n}", matrix.len())));
    }
    let mut a = matrix.to_vec();
    hessenberg(&mut a, n);
    hessenberg_qr(&mut a, n)
}

fn hessenberg<T: Real>(a: &mut [Complex<T>], n: usize) {
    let zero = cplx(T::zero(), T::zero());
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).fold(T::zero(), |acc, i| acc + a[i * n + k].norm_sqr()).sqrt();
        if xnorm == T::zero() {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() == T::zero() { cplx(T::one(), T::zero()) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v = vec![zero; n];
        for i in k + 1..n {
            v[i] = a[i * n + k];
        }
        v[k + 1] = v[k + 1] - alpha;
        let vnorm = (k + 1..n).fold(T::zero(), |acc, i| acc + v[i].norm_sqr()).sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for x in v.iter_mut().skip(k + 1) {
            *x = *x / vnorm;
        }
        let two = T::lit(2.0);
        // A ← (I − 2vv^H) A
        for j in 0..n {
            let dot = (k + 1..n).fold(zero, |acc, i| acc + v[i].conj() * a[i * n + j]);
            for i in k + 1..n {
                a[i * n + j] = a[i * n + j] - v[i] * dot * two;
            }
        }
        // A ← A (I − 2vv^H)
        for i in 0..n {
            let dot = (k + 1..n).fold(zero, |acc, j| acc + a[i * n + j] * v[j]);
            for j in k + 1..n {
                a[i * n + j] = a[i * n + j] - dot * v[j].conj() * two;
            }
        }
        for i in k + 2..n {
            a[i * n + k] = zero;
        }
    }
}

fn hessenberg_qr<T: Real>(a: &mut [Complex<T>], n: usize) -> Result<Vec<Complex<T>>> {
    let zero = cplx(T::zero(), T::zero());
    let mut eig = vec![zero; n];
    if n == 0 {
        return Ok(eig);
    }
    let anorm = a.iter().fold(T::zero(), |acc, x| acc.max(x.norm()));
    let eps = T::epsilon();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let cap = 60 * n.max(4);
    loop {
        if hi == 0 {
            eig[0] = a[0];
            break;
        }
        // look for a negligible subdiagonal entry
        let mut l = hi;
        while l > 0 {
            let s = a[(l - 1) * n + l - 1].norm() + a[l * n + l].norm();
            let s = if s == T::zero() { anorm } else { s };
            if a[l * n + l - 1].norm() <= eps * s {
                a[l * n + l - 1] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = a[hi * n + hi];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > cap {
            return Err(Error::NoConvergence(format!("QR iteration cap reached with {} eigenvalues left", hi + 1)));
        }
        let d = a[hi * n + hi];
        let mu = if iter % 11 == 10 {
            // exceptional shift
            d + cplx(a[hi * n + hi - 1].norm() * T::lit(0.75), T::zero())
        } else {
            let aa = a[(hi - 1) * n + hi - 1];
            let b = a[(hi - 1) * n + hi];
            let c = a[hi * n + hi - 1];
            let tr = aa + d;
            let det = aa * d - b * c;
            let disc = (tr * tr - det * T::lit(4.0)).sqrt();
            let e1 = (tr + disc) * T::lit(0.5);
            let e2 = (tr - disc) * T::lit(0.5);
            if (e1 - d).norm() < (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };
        qr_sweep(a, n, l, hi, mu);
    }
    Ok(eig)
}

/// One explicit single-shift QR step on the active block `l..=hi`.
fn qr_sweep<T: Real>(a: &mut [Complex<T>], n: usize, l: usize, hi: usize, mu: Complex<T>) {
    for i in l..=hi {
        a[i * n + i] = a[i * n + i] - mu;
    }
    let mut rots: Vec<(T, Complex<T>)> = Vec::with_capacity(hi - l);
    for k in l..hi {
        let x = a[k * n + k];
        let y = a[(k + 1) * n + k];
        let (c, s) = givens(x, y);
        for j in k..=hi {
            let p = a[k * n + j];
            let q = a[(k + 1) * n + j];
            a[k * n + j] = p * c + s * q;
            a[(k + 1) * n + j] = -s.conj() * p + q * c;
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = l + idx;
        for i in l..=(k + 1).min(hi) {
            let p = a[i * n + k];
            let q = a[i * n + k + 1];
            a[i * n + k] = p * c + q * s.conj();
            a[i * n + k + 1] = -p * s + q * c;
        }
    }
    for i in l..=hi {
        a[i * n + i] = a[i * n + i] + mu;
    }
}

/// Rotation [c s; −s̄ c] that maps (x, y) to (r, 0).
fn givens<T: Real>(x: Complex<T>, y: Complex<T>) -> (T, Complex<T>) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == T::zero() {
        return (T::one(), cplx(T::zero(), T::zero()));
    }
    if ax == T::zero() {
        return (T::zero(), y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

/// Residual ‖Hv − λv‖ / (‖H‖ ‖v‖) after two inverse-iteration steps.
fn inverse_iteration_residual<T: Real>(h: &HMatrix<T>, lambda: Complex<T>, hnorm: T) -> T {
    let n = h.n;
    let mut a = h.entries.clone();
    let shift = lambda + cplx(hnorm * T::epsilon() * T::lit(4.0), T::zero());
    for i in 0..n {
        a[i * n + i] = a[i * n + i] - shift;
    }
    let (_, perm) = lu_in_place(&mut a, n);
    for i in 0..n {
        if a[i * n + i].norm() == T::zero() {
            a[i * n + i] = cplx(hnorm * T::epsilon(), T::zero());
        }
    }
    let mut v: Vec<Complex<T>> = (0..n).map(|i| cplx(T::one(), T::of(i % 3) * T::lit(0.1))).collect();
    for _ in 0..2 {
        // solve L U x = P v
        let mut x: Vec<Complex<T>> = perm.iter().map(|&p| v[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = a[i * n + j] * x[j];
                x[i] = x[i] - t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = a[i * n + j] * x[j];
                x[i] = x[i] - t;
            }
            x[i] = x[i] / a[i * n + i];
        }
        let nx = x.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if !(nx > T::zero()) || !nx.is_finite() {
            break;
        }
        v = x.into_iter().map(|z| z / nx).collect();
    }
    let mut res = T::zero();
    for r in 0..n {
        let hv = (0..n).fold(cplx(T::zero(), T::zero()), |acc, s| acc + h.at(r, s) * v[s]);
        res = res + (hv - lambda * v[r]).norm_sqr();
    }
    res.sqrt() / hnorm.max(T::min_positive_value())
}

/// All eigenvalues of `h`, sorted by real part with conjugate pairs adjacent
/// (positive imaginary part first). Fails if any residual exceeds `tol`.
pub fn eigenvalues<T: Real>(h: &HMatrix<T>, tol: T) -> Result<Vec<Eigenvalue<T>>> {
    let raw = complex_eigenvalues(&h.entries, h.n)?;
    let hnorm = h.norm_inf();
    let pt = h.g.im == T::zero();
    let hermitian_like = h.g.re == T::zero();
    let is_real = |z: Complex<T>| z.im.abs() <= T::lit(1e-6) * T::one().max(z.norm());

    let mut items: Vec<(T, Eigenvalue<T>)> = Vec::with_capacity(raw.len());
    let mut used = vec![false; raw.len()];
    for i in 0..raw.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = raw[i];
        if is_real(z) {
            let value = if pt || hermitian_like { cplx(z.re, T::zero()) } else { z };
            items.push((z.re, Eigenvalue { value, kind: EigenKind::Real, residual: T::zero() }));
            continue;
        }
        let partner = if pt {
            (0..raw.len())
                .filter(|&j| !used[j])
                .min_by(|&a, &b| {
                    (raw[a] - z.conj()).norm().partial_cmp(&(raw[b] - z.conj()).norm()).unwrap_or(std::cmp::Ordering::Equal)
                })
                .filter(|&j| (raw[j] - z.conj()).norm() <= T::lit(1e-6) * T::one().max(z.norm()))
        } else {
            None
        };
        match partner {
            Some(j) => {
                used[j] = true;
                let mid = (z + raw[j].conj()) * T::lit(0.5);
                let up = cplx(mid.re, mid.im.abs());
                let e = |v| Eigenvalue { value: v, kind: EigenKind::ConjugatePair, residual: T::zero() };
                items.push((mid.re, e(up)));
                items.push((mid.re, e(up.conj())));
            }
            None => items.push((z.re, Eigenvalue { value: z, kind: EigenKind::Complex, residual: T::zero() })),
        }
    }
    // stable sort keeps each pair's (+im, −im) order
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<Eigenvalue<T>> = items.into_iter().map(|(_, e)| e).collect();
    for ev in out.iter_mut() {
        ev.residual = inverse_iteration_residual(h, ev.value, hnorm);
        if !(ev.residual <= tol) {
            return Err(Error::NoConvergence(format!(
                "eigenvalue {} has residual {} above tolerance {tol}",
                ev.value, ev.residual
            )));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_on_known_triangular_plus_rotation() {
        // [[0, -1], [1, 0]] has eigenvalues ±i
        let m = vec![cplx(0.0, 0.0), cplx(-1.0, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0)];
        let mut e = complex_eigenvalues(&m, 2).unwrap();
        e.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((e[0] - cplx(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - cplx(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn hessenberg_preserves_trace() {
        let h = build_hardbox_matrix(cplx(3.0_f64, 0.0), 8);
        let mut a = h.entries.clone();
        hessenberg(&mut a, 8);
        let t0: Complex<f64> = (0..8).map(|i| h.entries[i * 8 + i]).sum();
        let t1: Complex<f64> = (0..8).map(|i| a[i * 8 + i]).sum();
        assert!((t0 - t1).norm() < 1e-12);
    }
}
