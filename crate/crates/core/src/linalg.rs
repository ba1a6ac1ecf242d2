//! Small dense linear algebra: Cholesky, symmetric eigendecomposition,
//! eigenvalues of general real matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.a[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.a[i * self.cols + j]
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            a: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut m = Mat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c);
            m.a[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.a
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.rows);
        let mut r = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            let ri = &mut r.a[i * o.cols..(i + 1) * o.cols];
            for k in 0..self.cols {
                let v = self.a[i * self.cols + k];
                if v == 0.0 {
                    continue;
                }
                let ok = &o.a[k * o.cols..(k + 1) * o.cols];
                for (x, y) in ri.iter_mut().zip(ok) {
                    *x += v * y;
                }
            }
        }
        r
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, o: &Mat) -> Mat {
        let mut r = self.clone();
        r.axpy(1.0, o);
        r
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        let mut r = self.clone();
        r.axpy(-1.0, o);
        r
    }

    /// `self += alpha * o`.
    pub fn axpy(&mut self, alpha: f64, o: &Mat) {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        for (x, y) in self.a.iter_mut().zip(&o.a) {
            *x += alpha * y;
        }
    }

    pub fn scale(&self, k: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            a: self.a.iter().map(|v| v * k).collect(),
        }
    }

    /// `(A + A^T) / 2`.
    pub fn symmetrize(&self) -> Mat {
        let mut r = self.clone();
        for i in 0..self.rows {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                r[(i, j)] = v;
                r[(j, i)] = v;
            }
        }
        r
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius inner product.
    pub fn dot(&self, o: &Mat) -> f64 {
        self.a.iter().zip(&o.a).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }

    pub fn frobenius(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }
}

/// Lower-triangular `L` with `A = L L^T`, or `None` when `A` is not positive definite.
pub fn cholesky(a: &Mat) -> Option<Mat> {
    let n = a.rows;
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = libm::sqrt(d);
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solve `L L^T x = b`.
pub fn cholesky_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &Mat) -> Mat {
    let n = l.rows;
    let mut inv = Mat::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = 1.0 / l[(j, j)];
        for i in j + 1..n {
            let mut s = 0.0;
            for k in j..i {
                s -= l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = s / l[(i, i)];
        }
    }
    inv
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse(a: &Mat) -> Option<Mat> {
    let l = cholesky(a)?;
    let li = lower_inverse(&l);
    Some(li.transpose().matmul(&li))
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn lu_solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows;
    let mut m = a.clone();
    let mut x = b.to_vec();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| libm::fabs(m[(i, c)]).total_cmp(&libm::fabs(m[(j, c)])))?;
        if m[(p, c)] == 0.0 {
            return None;
        }
        if p != c {
            for j in 0..n {
                let t = m[(p, j)];
                m[(p, j)] = m[(c, j)];
                m[(c, j)] = t;
            }
            x.swap(p, c);
        }
        for i in c + 1..n {
            let f = m[(i, c)] / m[(c, c)];
            if f == 0.0 {
                continue;
            }
            for j in c..n {
                m[(i, j)] -= f * m[(c, j)];
            }
            x[i] -= f * x[c];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[(i, j)] * x[j];
        }
        x[i] = s / m[(i, i)];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a symmetric matrix.
///
/// Householder tridiagonalisation followed by the implicit QL algorithm.
pub fn sym_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.rows;
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let mut v = a.symmetrize();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e);
    (d, v)
}

pub fn sym_eigenvalues(a: &Mat) -> Vec<f64> {
    sym_eigen(a).0
}

pub fn min_eigenvalue(a: &Mat) -> f64 {
    sym_eigenvalues(a).first().copied().unwrap_or(0.0)
}

fn tred2(v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += libm::fabs(d[k]);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(libm::fabs(d[l]) + libm::fabs(e[l]));
        let mut m = l;
        while m < n {
            if libm::fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(libm::fabs(e[l]) > eps * tst1) || iter > 100 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    // Selection sort keeps eigenvector columns aligned.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                let t = v[(r, i)];
                v[(r, i)] = v[(r, k)];
                v[(r, k)] = t;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct C64 {
    re: f64,
    im: f64,
}

impl C64 {
    fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }
    fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }
    fn sub(self, o: C64) -> C64 {
        C64::new(self.re - o.re, self.im - o.im)
    }
    fn mul(self, o: C64) -> C64 {
        C64::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
    fn scale(self, k: f64) -> C64 {
        C64::new(self.re * k, self.im * k)
    }
    fn conj(self) -> C64 {
        C64::new(self.re, -self.im)
    }
    fn abs(self) -> f64 {
        libm::hypot(self.re, self.im)
    }
    fn sqrt(self) -> C64 {
        let r = self.abs();
        if r == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let re = libm::sqrt(0.5 * (r + self.re));
        let im = libm::sqrt(0.5 * (r - self.re));
        C64::new(re, if self.im < 0.0 { -im } else { im })
    }
}

/// Diagonal similarity by powers of two that equalises row and column norms.
fn balance(a: &mut Mat) {
    let n = a.rows;
    let radix = 2.0;
    let sqrdx = radix * radix;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        sweeps += 1;
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += libm::fabs(a[(j, i)]);
                    r += libm::fabs(a[(i, j)]);
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / radix;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
}

/// Reduction to upper Hessenberg form by stabilised elementary similarities.
fn hessenberg(a: &mut Mat) {
    let n = a.rows;
    for m in 1..n.saturating_sub(1) {
        let mut x = 0.0;
        let mut piv = m;
        for j in m..n {
            if libm::fabs(a[(j, m - 1)]) > libm::fabs(x) {
                x = a[(j, m - 1)];
                piv = j;
            }
        }
        if piv != m {
            for j in m - 1..n {
                let t = a[(piv, j)];
                a[(piv, j)] = a[(m, j)];
                a[(m, j)] = t;
            }
            for j in 0..n {
                let t = a[(j, piv)];
                a[(j, piv)] = a[(j, m)];
                a[(j, m)] = t;
            }
        }
        if x != 0.0 {
            for i in m + 1..n {
                let mut y = a[(i, m - 1)];
                if y != 0.0 {
                    y /= x;
                    a[(i, m - 1)] = 0.0;
                    for j in m..n {
                        a[(i, j)] -= y * a[(m, j)];
                    }
                    for j in 0..n {
                        a[(j, m)] += y * a[(j, i)];
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..i.saturating_sub(1) {
            a[(i, j)] = 0.0;
        }
    }
}

/// Eigenvalues `(re, im)` of a real square matrix.
///
/// Balancing, Hessenberg reduction, then single-shift complex QR with
/// Wilkinson shifts and deflation. Returns `None` if QR fails to converge.
pub fn eigenvalues(a: &Mat) -> Option<Vec<(f64, f64)>> {
    let n = a.rows;
    if n == 0 {
        return Some(Vec::new());
    }
    let mut b = a.clone();
    if b.data().iter().any(|v| !v.is_finite()) {
        return None;
    }
    balance(&mut b);
    hessenberg(&mut b);
    let mut h: Vec<Vec<C64>> = (0..n)
        .map(|i| (0..n).map(|j| C64::new(b[(i, j)], 0.0)).collect())
        .collect();
    let mut out = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iter = 0;
    let mut total = 0;
    loop {
        if hi == 0 {
            out.push(h[0][0]);
            break;
        }
        // Find the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let s = h[lo - 1][lo - 1].abs() + h[lo][lo].abs();
            let s = if s == 0.0 { 1.0 } else { s };
            if h[lo][lo - 1].abs() <= f64::EPSILON * s {
                h[lo][lo - 1] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out.push(h[hi][hi]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n {
            return None;
        }
        let mu = if iter % 11 == 10 {
            // Exceptional shift breaks cycles.
            h[hi][hi].add(C64::new(libm::fabs(h[hi][hi - 1].re) * 0.75, 0.0))
        } else {
            wilkinson(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        };
        for k in lo..=hi {
            h[k][k] = h[k][k].sub(mu);
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let x = h[k][k];
            let y = h[k + 1][k];
            let r = libm::hypot(x.abs(), y.abs());
            let (c, s) = if r == 0.0 {
                (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
            } else {
                (x.scale(1.0 / r), y.scale(1.0 / r))
            };
            for j in k..=hi {
                let a0 = h[k][j];
                let a1 = h[k + 1][j];
                h[k][j] = c.conj().mul(a0).add(s.conj().mul(a1));
                h[k + 1][j] = c.mul(a1).sub(s.mul(a0));
            }
            rots.push((c, s));
        }
        for (idx, (c, s)) in rots.into_iter().enumerate() {
            let k = lo + idx;
            for i in lo..=(k + 1).min(hi) {
                let a0 = h[i][k];
                let a1 = h[i][k + 1];
                h[i][k] = a0.mul(c).add(a1.mul(s));
                h[i][k + 1] = a1.mul(c.conj()).sub(a0.mul(s.conj()));
            }
        }
        for k in lo..=hi {
            h[k][k] = h[k][k].add(mu);
        }
    }
    Some(out.into_iter().map(|z| (z.re, z.im)).collect())
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr_half = a.add(d).scale(0.5);
    let det = a.mul(d).sub(b.mul(c));
    let disc = tr_half.mul(tr_half).sub(det).sqrt();
    let l1 = tr_half.add(disc);
    let l2 = tr_half.sub(disc);
    if l1.sub(d).abs() < l2.sub(d).abs() {
        l1
    } else {
        l2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn random_matrix(n: usize, seed: u64) -> Mat {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = next();
            }
        }
        m
    }

    fn to_na(m: &Mat) -> DMatrix<f64> {
        DMatrix::from_row_slice(m.rows(), m.cols(), m.data())
    }

    #[test]
    fn cholesky_reconstructs() {
        let b = random_matrix(6, 1);
        let a = b.transpose().matmul(&b).add(&Mat::identity(6));
        let l = cholesky(&a).unwrap();
        let r = l.matmul(&l.transpose());
        assert!(r.sub(&a).max_abs() < 1e-12);
        let x = cholesky_solve(&l, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let ax = a.matvec(&x);
        for (i, v) in ax.iter().enumerate() {
            assert!((v - (i + 1) as f64).abs() < 1e-10);
        }
        assert!(cholesky(&Mat::diag(&[1.0, -1.0])).is_none());
    }

    #[test]
    fn symmetric_eigen_matches_oracle() {
        for seed in 0..20 {
            let n = 1 + (seed as usize % 9);
            let b = random_matrix(n, seed);
            let a = b.add(&b.transpose());
            let (vals, vecs) = sym_eigen(&a);
            let mut want: Vec<f64> = to_na(&a).symmetric_eigenvalues().iter().copied().collect();
            want.sort_by(f64::total_cmp);
            for (x, y) in vals.iter().zip(&want) {
                assert!((x - y).abs() < 1e-10, "{} {}", x, y);
            }
            // A V = V diag(d)
            let av = a.matmul(&vecs);
            let vd = vecs.matmul(&Mat::diag(&vals));
            assert!(av.sub(&vd).max_abs() < 1e-10);
        }
    }

    #[test]
    fn general_eigenvalues_match_oracle() {
        for seed in 0..30 {
            let n = 1 + (seed as usize % 7);
            let a = random_matrix(n, 100 + seed);
            let mut got = eigenvalues(&a).unwrap();
            let mut want: Vec<(f64, f64)> = to_na(&a)
                .complex_eigenvalues()
                .iter()
                .map(|z| (z.re, z.im))
                .collect();
            let key = |p: &(f64, f64)| (p.0 * 1e6).round() as i64 * 1_000_000 + (p.1 * 1e3).round() as i64;
            got.sort_by_key(key);
            want.sort_by_key(key);
            for (x, y) in got.iter().zip(&want) {
                assert!((x.0 - y.0).abs() < 1e-8 && (x.1 - y.1).abs() < 1e-8, "{:?} {:?}", x, y);
            }
        }
    }

    #[test]
    fn triangular_and_defective() {
        let a = Mat::from_rows(&[
            alloc::vec![0.0, 0.0, 0.0],
            alloc::vec![0.0, -3.0, -2.0],
            alloc::vec![0.0, 0.0, -9.0],
        ]);
        let mut re: Vec<f64> = eigenvalues(&a).unwrap().iter().map(|z| z.0).collect();
        re.sort_by(f64::total_cmp);
        assert_eq!(re, [-9.0, -3.0, 0.0]);
        let j = Mat::from_rows(&[alloc::vec![1.0, 1.0], alloc::vec![0.0, 1.0]]);
        for z in eigenvalues(&j).unwrap() {
            assert!((z.0 - 1.0).abs() < 1e-8 && z.1.abs() < 1e-8);
        }
        let rot = Mat::from_rows(&[alloc::vec![0.0, 1.0], alloc::vec![-1.0, 0.0]]);
        for z in eigenvalues(&rot).unwrap() {
            assert!(z.0.abs() < 1e-12 && (z.1.abs() - 1.0).abs() < 1e-12);
        }
    }
}
