//! Small dense complex linear algebra, generic over the working precision.
//!
//! Everything here is sized for Liouvillian blocks of dimension 5–10, so the
//! routines favour clarity over blocking.

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};

use crate::scalar::{cabs, cabs1, clift, clower, csqrt, Real};

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<R> {
    n: usize,
    a: Vec<Complex<R>>,
}

/// Sparse matrix as `(row, col, value)` triplets.
pub type Triplets<R> = Vec<(usize, usize, Complex<R>)>;

impl<R: Real> CMatrix<R> {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            a: vec![Complex::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = Complex::one();
        }
        m
    }

    pub fn from_rows(n: usize, a: Vec<Complex<R>>) -> Self {
        assert_eq!(a.len(), n * n, "matrix data has wrong length");
        CMatrix { n, a }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<R> {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<R>) {
        self.a[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: Complex<R>) {
        self.a[i * self.n + j] = self.a[i * self.n + j] + v;
    }

    pub fn data(&self) -> &[Complex<R>] {
        &self.a
    }

    pub fn lift(m: &CMatrix<f64>) -> Self {
        CMatrix {
            n: m.n,
            a: m.a.iter().map(|&z| clift(z)).collect(),
        }
    }

    pub fn lower(&self) -> CMatrix<f64> {
        CMatrix {
            n: self.n,
            a: self.a.iter().map(|&z| clower(z)).collect(),
        }
    }

    /// Max row sum of `|re| + |im|`.
    pub fn norm_inf(&self) -> R {
        let mut best = R::zero();
        for i in 0..self.n {
            let mut s = R::zero();
            for j in 0..self.n {
                s = s + cabs1(self.get(i, j));
            }
            best = best.max(s);
        }
        best
    }

    pub fn trace(&self) -> Complex<R> {
        (0..self.n).fold(Complex::zero(), |acc, i| acc + self.get(i, i))
    }

    /// `self * other`, skipping structural zeros of `self`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.n);
        self.mul_acc(other, &mut out);
        out
    }

    /// `out += self * other`.
    pub fn mul_acc(&self, other: &Self, out: &mut Self) {
        let n = self.n;
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i * n + k];
                if aik.is_zero() {
                    continue;
                }
                let (row_o, row_b) = (&mut out.a[i * n..(i + 1) * n], &other.a[k * n..(k + 1) * n]);
                for (o, &b) in row_o.iter_mut().zip(row_b) {
                    *o = *o + aik * b;
                }
            }
        }
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Complex<R> {
        let n = self.n;
        let mut s = Complex::zero();
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i * n + k];
                if !aik.is_zero() {
                    s = s + aik * other.a[k * n + i];
                }
            }
        }
        s
    }

    pub fn matvec(&self, x: &[Complex<R>]) -> Vec<Complex<R>> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).fold(Complex::zero(), |acc, j| acc + self.a[i * n + j] * x[j]))
            .collect()
    }

    pub fn scaled(&self, s: Complex<R>) -> Self {
        CMatrix {
            n: self.n,
            a: self.a.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        CMatrix {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(&x, &y)| x + y).collect(),
        }
    }

    pub fn add_triplets(&mut self, t: &Triplets<R>, s: Complex<R>) {
        for &(i, j, v) in t {
            self.add_at(i, j, v * s);
        }
    }

    /// Solve `self x = b` by LU with partial pivoting. `None` if singular.
    pub fn solve(&self, b: &[Complex<R>]) -> Option<Vec<Complex<R>>> {
        let n = self.n;
        let mut a = self.a.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| {
                cabs1(a[i * n + k])
                    .partial_cmp(&cabs1(a[j * n + k]))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a[p * n + k].is_zero() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                x.swap(k, p);
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    a[i * n + j] = a[i * n + j] - f * a[k * n + j];
                }
                x[i] = x[i] - f * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s = s - a[k * n + j] * x[j];
            }
            x[k] = s / a[k * n + k];
        }
        Some(x)
    }

    /// Coefficients of the monic characteristic polynomial
    /// `det(xi I - A) = sum_k c[k] xi^k` (so `c[n] = 1`), by Faddeev–LeVerrier.
    pub fn charpoly(&self) -> Vec<Complex<R>> {
        let n = self.n;
        let mut c = vec![Complex::zero(); n + 1];
        c[n] = Complex::one();
        let mut m = Self::identity(n);
        for k in 1..=n {
            let kk = Complex::new(R::of_usize(k), R::zero());
            if k == n {
                c[0] = -self.trace_of_product(&m) / kk;
                break;
            }
            let mut am = self.mul(&m);
            let ck = -am.trace() / kk;
            c[n - k] = ck;
            for i in 0..n {
                am.a[i * n + i] = am.a[i * n + i] + ck;
            }
            m = am;
        }
        c
    }

    /// Eigenvalues via Householder reduction to Hessenberg form and
    /// single-shift complex QR. Order is unspecified.
    pub fn eigenvalues(&self) -> Result<Vec<Complex<R>>, EigenFailure> {
        let mut h = self.clone();
        h.reduce_to_hessenberg();
        h.hessenberg_qr()
    }

    fn reduce_to_hessenberg(&mut self) {
        let n = self.n;
        if n < 3 {
            return;
        }
        let two = R::lift(2.0);
        for k in 0..n - 2 {
            let mut v: Vec<Complex<R>> = (k + 1..n).map(|r| self.get(r, k)).collect();
            let alpha = v.iter().fold(R::zero(), |s, z| s + z.norm_sqr()).sqrt();
            if alpha == R::zero() {
                continue;
            }
            let x0 = v[0];
            let ax0 = cabs(x0);
            let phase = if ax0 == R::zero() {
                Complex::one()
            } else {
                x0 / Complex::new(ax0, R::zero())
            };
            v[0] = v[0] + phase * Complex::new(alpha, R::zero());
            let vv = v.iter().fold(R::zero(), |s, z| s + z.norm_sqr());
            if vv == R::zero() {
                continue;
            }
            let f = Complex::new(two / vv, R::zero());
            // left: A <- (I - f v v^H) A on rows k+1..n
            for c in 0..n {
                let mut s = Complex::<R>::zero();
                for (t, r) in (k + 1..n).enumerate() {
                    s = s + v[t].conj() * self.get(r, c);
                }
                let s = s * f;
                for (t, r) in (k + 1..n).enumerate() {
                    let val = self.get(r, c) - v[t] * s;
                    self.set(r, c, val);
                }
            }
            // right: A <- A (I - f v v^H) on cols k+1..n
            for r in 0..n {
                let mut s = Complex::<R>::zero();
                for (t, c) in (k + 1..n).enumerate() {
                    s = s + self.get(r, c) * v[t];
                }
                let s = s * f;
                for (t, c) in (k + 1..n).enumerate() {
                    let val = self.get(r, c) - s * v[t].conj();
                    self.set(r, c, val);
                }
            }
            for r in k + 2..n {
                self.set(r, k, Complex::zero());
            }
        }
    }

    fn hessenberg_qr(mut self) -> Result<Vec<Complex<R>>, EigenFailure> {
        let n = self.n;
        let mut eig = vec![Complex::zero(); n];
        if n == 0 {
            return Ok(eig);
        }
        let eps = R::lift(4.0 * R::EPS);
        let scale = self.norm_inf();
        let mut hi = n - 1;
        let mut iter = 0usize;
        let mut total = 0usize;
        let max_total = 80 * n;
        loop {
            if hi == 0 {
                eig[0] = self.get(0, 0);
                break;
            }
            // look for a negligible subdiagonal entry
            let mut l = hi;
            while l > 0 {
                let mut s = cabs1(self.get(l - 1, l - 1)) + cabs1(self.get(l, l));
                if s == R::zero() {
                    s = scale;
                }
                if cabs1(self.get(l, l - 1)) <= eps * s {
                    self.set(l, l - 1, Complex::zero());
                    break;
                }
                l -= 1;
            }
            if l == hi {
                eig[hi] = self.get(hi, hi);
                hi -= 1;
                iter = 0;
                continue;
            }
            iter += 1;
            total += 1;
            if total > max_total {
                return Err(EigenFailure { iterations: total });
            }
            let d = self.get(hi, hi);
            let mu = if iter % 11 == 10 {
                // exceptional shift to break cycles
                d + Complex::new(R::lift(0.75) * cabs1(self.get(hi, hi - 1)), R::zero())
            } else {
                let a = self.get(hi - 1, hi - 1);
                let bc = self.get(hi - 1, hi) * self.get(hi, hi - 1);
                let delta = (a - d) * Complex::new(R::lift(0.5), R::zero());
                let root = csqrt(delta * delta + bc);
                let (p, m) = (delta + root, delta - root);
                let den = if cabs1(p) >= cabs1(m) { p } else { m };
                if den.is_zero() {
                    d
                } else {
                    d - bc / den
                }
            };
            for i in l..=hi {
                self.add_at(i, i, -mu);
            }
            let mut rot = Vec::with_capacity(hi - l);
            for k in l..hi {
                let x = self.get(k, k);
                let y = self.get(k + 1, k);
                let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
                let (c, s) = if r == R::zero() {
                    (Complex::one(), Complex::zero())
                } else {
                    let rr = Complex::new(r, R::zero());
                    (x / rr, y / rr)
                };
                for j in k..=hi {
                    let (u, w) = (self.get(k, j), self.get(k + 1, j));
                    self.set(k, j, c.conj() * u + s.conj() * w);
                    self.set(k + 1, j, -s * u + c * w);
                }
                rot.push((c, s));
            }
            for (t, k) in (l..hi).enumerate() {
                let (c, s) = rot[t];
                for i in l..=(k + 1).min(hi) {
                    let (u, w) = (self.get(i, k), self.get(i, k + 1));
                    self.set(i, k, u * c + w * s);
                    self.set(i, k + 1, -u * s.conj() + w * c.conj());
                }
            }
            for i in l..=hi {
                self.add_at(i, i, mu);
            }
        }
        Ok(eig)
    }
}

/// Eigenvalue iteration did not converge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EigenFailure {
    pub iterations: usize,
}

/// Faddeev–LeVerrier on a matrix polynomial `A(x) = A0 + A1 x + A2 x^2`,
/// propagating second-order Taylor jets. Returns, for every coefficient
/// `c_k(x)` of `det(xi I - A(x))`, the triple `[c_k(0), c_k'(0), c_k''(0)/2]`.
///
/// `A1`, `A2` are expected to be very sparse (a handful of jump terms).
pub fn charpoly_jet<R: Real>(
    a0: &CMatrix<R>,
    a1: &Triplets<R>,
    a2: &Triplets<R>,
) -> Vec<[Complex<R>; 3]> {
    let n = a0.n;
    let z = Complex::zero();
    let mut c = vec![[z; 3]; n + 1];
    c[n] = [Complex::one(), z, z];
    let mut m = [CMatrix::identity(n), CMatrix::zeros(n), CMatrix::zeros(n)];

    let sparse_mul_acc = |t: &Triplets<R>, b: &CMatrix<R>, out: &mut CMatrix<R>| {
        for &(i, j, v) in t {
            for col in 0..n {
                out.a[i * n + col] = out.a[i * n + col] + v * b.a[j * n + col];
            }
        }
    };
    let sparse_trace = |t: &Triplets<R>, b: &CMatrix<R>| -> Complex<R> {
        t.iter()
            .fold(Complex::zero(), |s, &(i, j, v)| s + v * b.a[j * n + i])
    };

    for k in 1..=n {
        let kk = Complex::new(R::of_usize(k), R::zero());
        if k == n {
            let t0 = a0.trace_of_product(&m[0]);
            let t1 = a0.trace_of_product(&m[1]) + sparse_trace(a1, &m[0]);
            let t2 = a0.trace_of_product(&m[2]) + sparse_trace(a1, &m[1]) + sparse_trace(a2, &m[0]);
            c[0] = [-t0 / kk, -t1 / kk, -t2 / kk];
            break;
        }
        let mut p0 = CMatrix::zeros(n);
        a0.mul_acc(&m[0], &mut p0);
        let mut p1 = CMatrix::zeros(n);
        a0.mul_acc(&m[1], &mut p1);
        sparse_mul_acc(a1, &m[0], &mut p1);
        let mut p2 = CMatrix::zeros(n);
        a0.mul_acc(&m[2], &mut p2);
        sparse_mul_acc(a1, &m[1], &mut p2);
        sparse_mul_acc(a2, &m[0], &mut p2);
        let ck = [-p0.trace() / kk, -p1.trace() / kk, -p2.trace() / kk];
        c[n - k] = ck;
        for i in 0..n {
            p0.a[i * n + i] = p0.a[i * n + i] + ck[0];
            p1.a[i * n + i] = p1.a[i * n + i] + ck[1];
            p2.a[i * n + i] = p2.a[i * n + i] + ck[2];
        }
        m = [p0, p1, p2];
    }
    c
}

/// Truncated power series `s[a][b][e]` multiplying `ξ^a x^b y^e`, with
/// `a, b ≤ 2` and `e < E`.
type Series<R, const E: usize> = [[[Complex<R>; E]; 3]; 3];

fn series_zero<R: Real, const E: usize>() -> Series<R, E> {
    [[[Complex::zero(); E]; 3]; 3]
}

fn series_mul<R: Real, const E: usize>(x: &Series<R, E>, y: &Series<R, E>) -> Series<R, E> {
    let mut out = series_zero();
    for a1 in 0..3 {
        for b1 in 0..3 {
            for e1 in 0..E {
                let u = x[a1][b1][e1];
                if u.is_zero() {
                    continue;
                }
                for a2 in 0..3 - a1 {
                    for b2 in 0..3 - b1 {
                        for e2 in 0..E - e1 {
                            out[a1 + a2][b1 + b2][e1 + e2] =
                                out[a1 + a2][b1 + b2][e1 + e2] + u * y[a2][b2][e2];
                        }
                    }
                }
            }
        }
    }
    out
}

fn series_inv<R: Real, const E: usize>(x: &Series<R, E>) -> Series<R, E> {
    let mut y = series_zero();
    let inv0 = Complex::<R>::one() / x[0][0][0];
    y[0][0][0] = inv0;
    for a in 0..3 {
        for b in 0..3 {
            for e in 0..E {
                if a + b + e == 0 {
                    continue;
                }
                let mut acc = Complex::<R>::zero();
                for a1 in 0..=a {
                    for b1 in 0..=b {
                        for e1 in 0..=e {
                            if a1 + b1 + e1 > 0 {
                                acc = acc + x[a1][b1][e1] * y[a - a1][b - b1][e - e1];
                            }
                        }
                    }
                }
                y[a][b][e] = -acc * inv0;
            }
        }
    }
    y
}

/// Low-order coefficients of `det(ξ I − A(x))`, `A(x) = A0 + A1 x + A2 x^2`,
/// for a singular `A0` with a simple zero eigenvalue.
#[derive(Debug, Clone, Copy)]
pub struct LowOrderCharPoly<R> {
    /// `c[k] = [c_k(0), c_k'(0), c_k''(0)/2]` for `k = 0, 1, 2`.
    pub c: [[Complex<R>; 3]; 3],
    /// Constant term of the last pivot before it is zeroed (rounding residue of `det A0`).
    pub residue: Complex<R>,
    /// Smallest |pivot| among the first `n − 1`, relative to `‖A0‖∞`.
    pub min_pivot: R,
}

/// [`charpoly_low_order`] with an extra linear perturbation `y·B`:
/// `det(ξ I − A(x) − y B)` to first order in `y`.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedCharPoly<R> {
    /// Unperturbed coefficients.
    pub base: LowOrderCharPoly<R>,
    /// `∂_y c_k` jets at `y = 0`, same layout as `base.c`.
    pub dy: [[Complex<R>; 3]; 3],
}

fn eliminate<R: Real, const E: usize>(
    mut m: Vec<Series<R, E>>,
    n: usize,
    scale: R,
) -> Option<(Series<R, E>, Complex<R>, R)> {
    let z = Complex::zero();
    let mut det: Series<R, E> = series_zero();
    det[0][0][0] = Complex::one();
    let mut min_pivot = R::lift(f64::INFINITY);
    let mut residue = z;
    for k in 0..n {
        // complete pivoting keeps the rank deficiency in the last pivot even
        // when the kernel vector lives on the leading basis elements
        let (mut pr, mut pc, mut best) = (k, k, -R::one());
        for r in k..n {
            for c in k..n {
                let v = cabs1(m[r * n + c][0][0][0]);
                if v > best {
                    (pr, pc, best) = (r, c, v);
                }
            }
        }
        let mut flips = 0;
        if pr != k {
            for c in 0..n {
                m.swap(k * n + c, pr * n + c);
            }
            flips += 1;
        }
        if pc != k {
            for r in 0..n {
                m.swap(r * n + k, r * n + pc);
            }
            flips += 1;
        }
        if flips == 1 {
            for v in det.iter_mut().flatten().flatten() {
                *v = -*v;
            }
        }
        let mut piv = m[k * n + k];
        if k + 1 == n {
            residue = piv[0][0][0];
            piv[0][0][0] = z;
            det = series_mul(&det, &piv);
            break;
        }
        if piv[0][0][0].is_zero() {
            return None;
        }
        let rel = cabs1(piv[0][0][0]) / scale;
        if rel < min_pivot {
            min_pivot = rel;
        }
        det = series_mul(&det, &piv);
        let inv = series_inv(&piv);
        for r in k + 1..n {
            let lead = m[r * n + k];
            if lead.iter().flatten().flatten().all(|v| v.is_zero()) {
                continue;
            }
            let f = series_mul(&lead, &inv);
            for c in k + 1..n {
                let t = series_mul(&f, &m[k * n + c]);
                let e = &mut m[r * n + c];
                for (x, y) in e
                    .iter_mut()
                    .flatten()
                    .flatten()
                    .zip(t.iter().flatten().flatten())
                {
                    *x = *x - *y;
                }
            }
        }
    }
    Some((det, residue, min_pivot))
}

fn series_matrix<R: Real, const E: usize>(
    a0: &CMatrix<R>,
    a1: &Triplets<R>,
    a2: &Triplets<R>,
    b: Option<&CMatrix<R>>,
) -> Vec<Series<R, E>> {
    let n = a0.n;
    let mut m: Vec<Series<R, E>> = vec![series_zero(); n * n];
    for r in 0..n {
        for c in 0..n {
            m[r * n + c][0][0][0] = -a0.get(r, c);
            if let Some(b) = b {
                m[r * n + c][0][0][1] = -b.get(r, c);
            }
        }
        m[r * n + r][1][0][0] = Complex::one();
    }
    for &(r, c, v) in a1 {
        m[r * n + c][0][1][0] = m[r * n + c][0][1][0] - v;
    }
    for &(r, c, v) in a2 {
        m[r * n + c][0][2][0] = m[r * n + c][0][2][0] - v;
    }
    m
}

fn slice<R: Real, const E: usize>(s: &Series<R, E>, e: usize) -> [[Complex<R>; 3]; 3] {
    let mut out = [[Complex::zero(); 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            out[a][b] = s[a][b][e];
        }
    }
    out
}

/// Gaussian elimination with complete pivoting over truncated bivariate
/// series in `(ξ, x)`. Pivots are chosen on `A0` alone, so the arithmetic is
/// as stable as an ordinary LU of `A0`; unlike Faddeev–LeVerrier it never
/// forms power traces, which cancel badly when the spectrum spans many
/// decades. `det A0 = 0` is imposed exactly by zeroing the constant term of
/// the last pivot. Returns `None` if an earlier pivot vanishes exactly.
pub fn charpoly_low_order<R: Real>(
    a0: &CMatrix<R>,
    a1: &Triplets<R>,
    a2: &Triplets<R>,
) -> Option<LowOrderCharPoly<R>> {
    let m = series_matrix::<R, 1>(a0, a1, a2, None);
    let (det, residue, min_pivot) = eliminate(m, a0.n, a0.norm_inf())?;
    Some(LowOrderCharPoly {
        c: slice(&det, 0),
        residue,
        min_pivot,
    })
}

/// As [`charpoly_low_order`], also returning the first-order response of
/// every coefficient jet to `A0 → A0 + y·B`.
pub fn charpoly_low_order_perturbed<R: Real>(
    a0: &CMatrix<R>,
    a1: &Triplets<R>,
    a2: &Triplets<R>,
    b: &CMatrix<R>,
) -> Option<PerturbedCharPoly<R>> {
    let m = series_matrix::<R, 2>(a0, a1, a2, Some(b));
    let (det, residue, min_pivot) = eliminate(m, a0.n, a0.norm_inf())?;
    Some(PerturbedCharPoly {
        base: LowOrderCharPoly {
            c: slice(&det, 0),
            residue,
            min_pivot,
        },
        dy: slice(&det, 1),
    })
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &CMatrix<f64>) -> CMatrix<f64> {
    let n = a.dim();
    let norm = a.norm_inf();
    let mut s = 0u32;
    while norm / f64::from(1u32 << s.min(30)) > 0.25 && s < 60 {
        s += 1;
    }
    let scaled = a.scaled(Complex64::new(0.5f64.powi(s as i32), 0.0));
    let mut term = CMatrix::<f64>::identity(n);
    let mut sum = CMatrix::<f64>::identity(n);
    for k in 1..=24 {
        term = scaled
            .mul(&term)
            .scaled(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
        if term.norm_inf() < 1e-18 * sum.norm_inf() {
            break;
        }
    }
    for _ in 0..s {
        sum = sum.mul(&sum);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::DoubleDouble;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample() -> CMatrix<f64> {
        CMatrix::from_rows(
            4,
            vec![
                c(-1.0, 0.0),
                c(0.5, 0.2),
                c(0.0, 0.0),
                c(0.3, 0.0),
                c(0.2, -0.1),
                c(-2.0, 0.0),
                c(0.7, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(1.1, 0.4),
                c(-0.5, 0.3),
                c(0.2, 0.0),
                c(0.4, 0.0),
                c(0.0, 0.0),
                c(0.9, -0.2),
                c(-3.0, 1.0),
            ],
        )
    }

    #[test]
    fn solve_roundtrip() {
        let m = sample();
        let b = vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 2.0), c(0.5, 0.5)];
        let x = m.solve(&b).unwrap();
        let r = m.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-13);
        }
    }

    #[test]
    fn singular_solve_is_none() {
        let m = CMatrix::<f64>::zeros(3);
        assert!(m.solve(&[c(1.0, 0.0); 3]).is_none());
    }

    #[test]
    fn charpoly_roots_are_eigenvalues() {
        let m = sample();
        let cp = m.charpoly();
        assert_eq!(cp[4], c(1.0, 0.0));
        for ev in m.eigenvalues().unwrap() {
            let p = cp.iter().rev().fold(c(0.0, 0.0), |acc, &k| acc * ev + k);
            assert!(p.norm() < 1e-11, "{ev}: {p}");
        }
        // trace and determinant identities
        assert!((cp[3] + m.trace()).norm() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_triangular_matrix_are_its_diagonal() {
        let mut m = CMatrix::<f64>::zeros(3);
        m.set(0, 0, c(1.0, 0.0));
        m.set(0, 2, c(5.0, 0.0));
        m.set(1, 1, c(-2.0, 1.0));
        m.set(2, 2, c(3.0, 0.0));
        let mut ev = m.eigenvalues().unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((ev[0] - c(-2.0, 1.0)).norm() < 1e-14);
        assert!((ev[2] - c(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn dd_eigenvalues_agree_with_double() {
        let m = sample();
        let mut e1 = m.eigenvalues().unwrap();
        let mut e2: Vec<Complex64> = CMatrix::<DoubleDouble>::lift(&m)
            .eigenvalues()
            .unwrap()
            .into_iter()
            .map(clower)
            .collect();
        let key = |z: &Complex64| (z.re * 1e6).round() as i64;
        e1.sort_by_key(key);
        e2.sort_by_key(key);
        for (a, b) in e1.iter().zip(&e2) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn jet_charpoly_matches_pointwise() {
        let a0 = sample();
        let a1: Triplets<f64> = vec![(0, 1, c(0.3, -0.2)), (2, 3, c(0.0, 1.0))];
        let a2: Triplets<f64> = vec![(1, 0, c(-0.15, 0.0))];
        let at = |x: f64| {
            let mut m = a0.clone();
            m.add_triplets(&a1, c(x, 0.0));
            m.add_triplets(&a2, c(x * x, 0.0));
            m
        };
        let jet = charpoly_jet(&a0, &a1, &a2);
        let h = 1e-4;
        let (p, m0, q) = (at(h).charpoly(), a0.charpoly(), at(-h).charpoly());
        for k in 0..=4 {
            assert!((jet[k][0] - m0[k]).norm() < 1e-13);
            let d1 = (p[k] - q[k]) / (2.0 * h);
            let d2 = (p[k] - 2.0 * m0[k] + q[k]) / (2.0 * h * h);
            assert!((jet[k][1] - d1).norm() < 1e-7, "k={k}");
            assert!((jet[k][2] - d2).norm() < 1e-5, "k={k}");
        }
    }

    #[test]
    fn low_order_elimination_matches_leverrier_jets() {
        // Make A0 trace-preserving-like: last row minus the sum of the others, so det A0 = 0.
        let mut a0 = sample();
        let n = a0.dim();
        for col in 0..n {
            let s = (0..n - 1).fold(c(0.0, 0.0), |acc, r| acc + a0.get(r, col));
            a0.set(n - 1, col, -s);
        }
        let a1: Triplets<f64> = vec![
            (0, 1, c(0.3, -0.2)),
            (2, 3, c(0.0, 1.0)),
            (3, 3, c(-0.4, 0.0)),
        ];
        let a2: Triplets<f64> = vec![(1, 0, c(-0.15, 0.0)), (3, 3, c(0.2, 0.0))];
        let full = charpoly_jet(&a0, &a1, &a2);
        let low = charpoly_low_order(&a0, &a1, &a2).unwrap();
        assert!(low.residue.norm() < 1e-13 && low.min_pivot > 0.0);
        assert_eq!(low.c[0][0], c(0.0, 0.0));
        for (k, row) in full.iter().take(3).enumerate() {
            for (j, want) in row.iter().take(3).enumerate() {
                let scale = want.norm().max(1.0);
                assert!(
                    (low.c[k][j] - want).norm() < 1e-12 * scale,
                    "k={k} j={j}: {} vs {want}",
                    low.c[k][j]
                );
            }
        }
    }

    #[test]
    fn perturbed_elimination_matches_central_difference() {
        let singular = |m: &mut CMatrix<f64>| {
            let n = m.dim();
            for col in 0..n {
                let s = (0..n - 1).fold(c(0.0, 0.0), |acc, r| acc + m.get(r, col));
                m.set(n - 1, col, -s);
            }
        };
        let mut a0 = sample();
        singular(&mut a0);
        let mut b = CMatrix::<f64>::zeros(4);
        b.set(0, 0, c(-0.3, 0.0));
        b.set(1, 0, c(0.3, 0.0));
        b.set(2, 3, c(0.1, 0.2));
        singular(&mut b);
        let a1: Triplets<f64> = vec![(0, 1, c(0.3, -0.2)), (3, 3, c(-0.4, 0.0))];
        let a2: Triplets<f64> = vec![(3, 3, c(0.2, 0.0))];
        let p = charpoly_low_order_perturbed(&a0, &a1, &a2, &b).unwrap();
        let h = 1e-5;
        let at = |y: f64| {
            charpoly_low_order(&a0.add(&b.scaled(c(y, 0.0))), &a1, &a2)
                .unwrap()
                .c
        };
        let (up, dn) = (at(h), at(-h));
        for k in 0..3 {
            for j in 0..3 {
                assert_eq!(
                    p.base.c[k][j],
                    charpoly_low_order(&a0, &a1, &a2).unwrap().c[k][j]
                );
                let fd = (up[k][j] - dn[k][j]) / (2.0 * h);
                assert!(
                    (p.dy[k][j] - fd).norm() < 1e-8 * fd.norm().max(1.0),
                    "k={k} j={j}"
                );
            }
        }
    }

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let mut m = CMatrix::<f64>::zeros(2);
        m.set(0, 0, c(0.0, -3.0));
        m.set(0, 1, c(2.0, 0.0));
        let e = expm(&m);
        // [[e^{-3i}, 2 (e^{-3i}-1)/(-3i)], [0, 1]]
        let z = c(0.0, -3.0).exp();
        assert!((e.get(0, 0) - z).norm() < 1e-13);
        assert!((e.get(0, 1) - 2.0 * (z - 1.0) / c(0.0, -3.0)).norm() < 1e-13);
        assert!((e.get(1, 1) - c(1.0, 0.0)).norm() < 1e-14);
    }
}
