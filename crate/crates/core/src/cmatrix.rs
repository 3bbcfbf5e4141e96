//! Dense complex linear algebra for small mode-space matrices.
//!
//! Everything here targets matrices of dimension up to a few tens: coupled-mode
//! Hamiltonians, bath coupling matrices and susceptibilities. Storage is
//! row-major `Vec<Complex64>`; algorithms are direct (LU with partial
//! pivoting, cyclic Jacobi for Hermitian eigenproblems, shifted Hessenberg QR
//! for general spectra) rather than blocked.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative tolerance below which a small negative eigenvalue still counts as PSD.
pub const PSD_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff for the numerical rank in factorizations.
pub const RANK_TOL: f64 = 1e-10;
/// Condition-number cutoff beyond which inversion is rejected as singular.
pub const COND_MAX: f64 = 1e12;

/// Shorthand for a complex scalar.
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    /// Zero matrix of the given shape. A zero-column matrix is allowed and
    /// represents "no bath channels".
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::default(); rows * cols] }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    /// Build from nested row slices.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::ShapeMismatch("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|row| row.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols, data })
    }

    /// Build from a generator over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Real diagonal matrix.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { c(diag[i], 0.0) } else { c(0.0, 0.0) })
    }

    /// Matrix with a single 1 at `(i, j)`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = c(1.0, 0.0);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in sub");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::default() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len(), "shape mismatch in matvec");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Horizontal concatenation; both matrices must share the row count.
    pub fn hcat(&self, other: &CMat) -> CMat {
        assert_eq!(self.rows, other.rows, "shape mismatch in hcat");
        CMat::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        })
    }

    /// Maximum Hermitian asymmetry, `max_ij |A_ij - conj(A_ji)|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && self.hermitian_asymmetry() <= HERMITIAN_TOL * self.frobenius_norm().max(1e-300)
    }

    fn require_hermitian(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "Hermitian operation on {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let asym = self.hermitian_asymmetry();
        let tol = HERMITIAN_TOL * self.frobenius_norm().max(1e-300);
        if asym > tol {
            return Err(Error::NotHermitian { asymmetry: asym, tol });
        }
        Ok(())
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> CMat {
        self.add(&self.dagger()).scale(c(0.5, 0.0))
    }

    /// `(A - A†)/(2i)`, the dissipative generator of a dynamical matrix.
    pub fn antihermitian_part_over_i(&self) -> CMat {
        self.sub(&self.dagger()).scale(c(0.0, -0.5))
    }

    /// LU decomposition with partial pivoting, in place on a copy.
    /// Returns (lu, pivots, determinant); a None determinant means an exactly
    /// zero pivot was hit.
    fn lu(&self) -> (CMat, Vec<usize>, Option<Complex64>) {
        assert!(self.is_square(), "LU requires a square matrix");
        let n = self.rows;
        let mut lu = self.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut det = c(1.0, 0.0);
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let mag = lu[(i, k)].norm();
                if mag > best {
                    best = mag;
                    p = i;
                }
            }
            if best == 0.0 {
                return (lu, piv, None);
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                piv.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            det *= pivot;
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in (k + 1)..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        (lu, piv, Some(det * sign))
    }

    /// Determinant via LU.
    pub fn det(&self) -> Complex64 {
        let (_, _, det) = self.lu();
        det.unwrap_or_default()
    }

    /// Inverse with a 1-norm condition estimate. Rejects matrices whose
    /// condition estimate exceeds [`COND_MAX`].
    pub fn inverse(&self) -> Result<CMat> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!("inverse of {}x{}", self.rows, self.cols)));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(self.clone());
        }
        let (lu, piv, det) = self.lu();
        if det.is_none() {
            return Err(Error::SingularMatrix { cond: f64::INFINITY });
        }
        let mut inv = CMat::zeros(n, n);
        let mut e = vec![Complex64::default(); n];
        for j in 0..n {
            e[j] = c(1.0, 0.0);
            let col = Self::lu_solve_ordered(&lu, &piv, &e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
            e[j] = Complex64::default();
        }
        let cond = self.one_norm() * inv.one_norm();
        if !cond.is_finite() || cond > COND_MAX {
            return Err(Error::SingularMatrix { cond });
        }
        Ok(inv)
    }

    /// Solve `A x = b` through the LU factorization.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if !self.is_square() || self.rows != b.len() {
            return Err(Error::ShapeMismatch("solve dimensions".into()));
        }
        let (lu, piv, det) = self.lu();
        if det.is_none() {
            return Err(Error::SingularMatrix { cond: f64::INFINITY });
        }
        Ok(Self::lu_solve_ordered(&lu, &piv, b))
    }

    fn lu_solve_ordered(lu: &CMat, piv: &[usize], b: &[Complex64]) -> Vec<Complex64> {
        let n = lu.rows;
        let mut x: Vec<Complex64> = piv.iter().map(|&p| b[p]).collect();
        // forward substitution (unit lower triangle)
        for i in 0..n {
            for j in 0..i {
                let sub = lu[(i, j)] * x[j];
                x[i] -= sub;
            }
        }
        // back substitution
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let sub = lu[(i, j)] * x[j];
                x[i] -= sub;
            }
            x[i] /= lu[(i, i)];
        }
        x
    }

    fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn minor(&self, drop_row: usize, drop_col: usize) -> CMat {
        let n = self.rows;
        CMat::from_fn(n - 1, n - 1, |i, j| {
            let r = if i < drop_row { i } else { i + 1 };
            let s = if j < drop_col { j } else { j + 1 };
            self[(r, s)]
        })
    }

    fn adjugate_cofactor(&self) -> CMat {
        let n = self.rows;
        if n == 1 {
            return CMat::identity(1);
        }
        if n == 2 {
            return CMat::from_rows(&[
                vec![self[(1, 1)], -self[(0, 1)]],
                vec![-self[(1, 0)], self[(0, 0)]],
            ])
            .expect("2x2 adjugate");
        }
        // adj(A)_{ij} = (-1)^{i+j} det(minor_{ji})
        CMat::from_fn(n, n, |i, j| {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            self.minor(j, i).det() * sign
        })
    }

    /// Adjugate matrix, satisfying `A adj(A) = det(A) I`. Total: defined for
    /// singular input as well. Small and near-singular matrices go through
    /// cofactors; the rest reuse `det(A) A^{-1}`.
    pub fn adjugate(&self) -> CMat {
        assert!(self.is_square(), "adjugate requires a square matrix");
        let n = self.rows;
        if n <= 4 {
            return self.adjugate_cofactor();
        }
        let det = self.det();
        let scale = self.frobenius_norm().powi(n as i32);
        if det.norm() < 1e-8 * scale.max(1e-300) {
            return self.adjugate_cofactor();
        }
        match self.inverse() {
            Ok(inv) => inv.scale(det),
            Err(_) => self.adjugate_cofactor(),
        }
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Returns `(U, lambda)` with `A = U diag(lambda) U†`,
    /// eigenvalues ascending, and each column's largest-magnitude component
    /// made real and positive so the output is deterministic.
    pub fn herm_eig(&self) -> Result<(CMat, Vec<f64>)> {
        self.require_hermitian()?;
        let n = self.rows;
        if n == 0 {
            return Ok((self.clone(), vec![]));
        }
        // symmetrize once so roundoff asymmetry cannot drift the iteration
        let mut a = self.hermitian_part();
        let mut u = CMat::identity(n);
        let norm = a.frobenius_norm().max(1e-300);

        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= 1e-15 * norm {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.norm() <= 1e-300 {
                        continue;
                    }
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let m = apq.norm();
                    let phase = apq / m; // e^{i arg(apq)}
                    let tau = (aqq - app) / (2.0 * m);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let cth = 1.0 / (1.0 + t * t).sqrt();
                    let sth = t * cth;
                    // column rotation: [p q] <- [p q] * [[c, s*phase],[-s*conj(phase), c]]
                    let g_pp = c(cth, 0.0);
                    let g_pq = phase * sth;
                    let g_qp = -phase.conj() * sth;
                    let g_qq = c(cth, 0.0);
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * g_pp + akq * g_qp;
                        a[(k, q)] = akp * g_pq + akq * g_qq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                    }
                    for k in 0..n {
                        let ukp = u[(k, p)];
                        let ukq = u[(k, q)];
                        u[(k, p)] = ukp * g_pp + ukq * g_qp;
                        u[(k, q)] = ukp * g_pq + ukq * g_qq;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&i, &j| eigs[i].total_cmp(&eigs[j]));
        let lambda: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();
        let mut v = CMat::from_fn(n, n, |i, j| u[(i, order[j])]);

        // deterministic column phases: largest component real positive
        for j in 0..n {
            let mut best_k = 0;
            let mut best = -1.0;
            for k in 0..n {
                let mag = v[(k, j)].norm();
                if mag > best + 1e-15 {
                    best = mag;
                    best_k = k;
                }
            }
            if best > 0.0 {
                let phase = v[(best_k, j)] / best;
                for k in 0..n {
                    let val = v[(k, j)] / phase;
                    v[(k, j)] = val;
                }
            }
        }
        Ok((v, lambda))
    }

    /// Split a Hermitian matrix into a difference of PSD matrices,
    /// `A = X_plus - X_minus`, via `U diag((|l| ± l)/2) U†`.
    pub fn psd_split(&self) -> Result<(CMat, CMat)> {
        let (u, lambda) = self.herm_eig()?;
        let build = |vals: Vec<f64>| -> CMat {
            let d = CMat::from_real_diag(&vals);
            let m = u.matmul(&d).matmul(&u.dagger());
            m.hermitian_part()
        };
        let plus = build(lambda.iter().map(|l| (l.abs() + l) / 2.0).collect());
        let minus = build(lambda.iter().map(|l| (l.abs() - l) / 2.0).collect());
        Ok((plus, minus))
    }

    /// Factor a Hermitian PSD matrix as `G = Y Y†` with `Y` of shape
    /// `n x r`, `r` the numerical rank. Columns are ordered by descending
    /// eigenvalue.
    pub fn psd_factor(&self) -> Result<CMat> {
        let (u, lambda) = self.herm_eig()?;
        let norm = self.frobenius_norm();
        let min_eig = lambda.iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL * norm.max(1e-300) {
            return Err(Error::NotPsd { min_eig });
        }
        let kept: Vec<usize> = (0..lambda.len())
            .rev() // descending eigenvalues
            .filter(|&i| lambda[i] > RANK_TOL * norm)
            .collect();
        let n = self.rows;
        Ok(CMat::from_fn(n, kept.len(), |i, j| {
            let idx = kept[j];
            u[(i, idx)] * lambda[idx].sqrt()
        }))
    }

    /// Eigenvalues of a general (non-Hermitian) complex matrix, sorted by
    /// real part then imaginary part. Values only; computed by Householder
    /// reduction to Hessenberg form followed by shifted QR iteration.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        assert!(self.is_square(), "eigenvalues require a square matrix");
        let n = self.rows;
        if n == 0 {
            return vec![];
        }
        if n == 1 {
            return vec![self[(0, 0)]];
        }
        if n == 2 {
            let mut e = eig2(self[(0, 0)], self[(0, 1)], self[(1, 0)], self[(1, 1)]).to_vec();
            sort_complex(&mut e);
            return e;
        }
        let mut h = self.hessenberg();
        let mut eigs: Vec<Complex64> = Vec::with_capacity(n);
        let mut hi = n - 1;
        let mut iters_left = 60 * n;
        loop {
            // deflate converged subdiagonals
            let mut lo = hi;
            while lo > 0 {
                let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
                let s = if s == 0.0 { h.frobenius_norm() } else { s };
                if h[(lo, lo - 1)].norm() <= f64::EPSILON * s {
                    h[(lo, lo - 1)] = Complex64::default();
                    break;
                }
                lo -= 1;
            }
            if lo == hi {
                eigs.push(h[(hi, hi)]);
                if hi == 0 {
                    break;
                }
                hi -= 1;
                continue;
            }
            if lo + 1 == hi {
                let block = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
                eigs.push(block[0]);
                eigs.push(block[1]);
                if lo == 0 {
                    break;
                }
                hi = lo - 1;
                continue;
            }
            if iters_left == 0 {
                // QR stopped converging (should not happen for finite input);
                // return the current diagonal for the remaining block.
                for k in lo..=hi {
                    eigs.push(h[(k, k)]);
                }
                break;
            }
            iters_left -= 1;

            // Wilkinson shift from the trailing 2x2 of the active block
            let b = eig2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let target = h[(hi, hi)];
            let mu = if (b[0] - target).norm() <= (b[1] - target).norm() { b[0] } else { b[1] };

            // explicit shifted QR step on the active Hessenberg block via
            // Givens rotations: H - mu I = Q R, then H <- R Q + mu I
            let mut rot: Vec<(Complex64, Complex64)> = Vec::with_capacity(hi - lo);
            for k in lo..=hi {
                h[(k, k)] -= mu;
            }
            for k in lo..hi {
                let (cs, sn) = givens(h[(k, k)], h[(k + 1, k)]);
                rot.push((cs, sn));
                for j in k..=hi {
                    let a1 = h[(k, j)];
                    let a2 = h[(k + 1, j)];
                    h[(k, j)] = cs.conj() * a1 + sn.conj() * a2;
                    h[(k + 1, j)] = -sn * a1 + cs * a2;
                }
            }
            for (k, (cs, sn)) in rot.iter().enumerate() {
                let k = lo + k;
                for i in lo..=(k + 1).min(hi) {
                    let a1 = h[(i, k)];
                    let a2 = h[(i, k + 1)];
                    h[(i, k)] = a1 * cs + a2 * sn;
                    h[(i, k + 1)] = -a1 * sn.conj() + a2 * cs.conj();
                }
            }
            for k in lo..=hi {
                h[(k, k)] += mu;
            }
        }
        sort_complex(&mut eigs);
        eigs
    }

    /// Reduce to upper Hessenberg form by Householder reflections.
    fn hessenberg(&self) -> CMat {
        let n = self.rows;
        let mut h = self.clone();
        for k in 0..n.saturating_sub(2) {
            // build reflector for column k below the subdiagonal
            let mut x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
            let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if xnorm == 0.0 {
                continue;
            }
            let alpha = if x[0].norm() == 0.0 { c(-xnorm, 0.0) } else { -x[0] / x[0].norm() * xnorm };
            x[0] -= alpha;
            let vnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if vnorm == 0.0 {
                continue;
            }
            let v: Vec<Complex64> = x.iter().map(|z| z / vnorm).collect();
            // H <- (I - 2 v v†) H (left), on rows k+1..n
            for j in 0..n {
                let dot: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum();
                for (i, vi) in v.iter().enumerate() {
                    let sub = 2.0 * vi * dot;
                    h[(k + 1 + i, j)] -= sub;
                }
            }
            // H <- H (I - 2 v v†) (right), on cols k+1..n
            for i in 0..n {
                let dot: Complex64 = v.iter().enumerate().map(|(j, vj)| h[(i, k + 1 + j)] * vj).sum();
                for (j, vj) in v.iter().enumerate() {
                    let sub = 2.0 * dot * vj.conj();
                    h[(i, k + 1 + j)] -= sub;
                }
            }
        }
        // zero the area below the subdiagonal exactly
        for i in 0..n {
            for j in 0..i.saturating_sub(1) {
                h[(i, j)] = Complex64::default();
            }
        }
        h
    }

    /// Matrix exponential by scaling-and-squaring with a Taylor kernel.
    /// Intended for the small propagator matrices used in time evolution.
    pub fn expm(&self) -> CMat {
        assert!(self.is_square(), "expm requires a square matrix");
        let n = self.rows;
        let norm = self.frobenius_norm();
        let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
        let a = self.scale(c(0.5f64.powi(s), 0.0));
        let mut sum = CMat::identity(n);
        let mut term = CMat::identity(n);
        for k in 1..60 {
            term = term.matmul(&a).scale(c(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
            if term.frobenius_norm() <= f64::EPSILON * sum.frobenius_norm() {
                break;
            }
        }
        let mut out = sum;
        for _ in 0..s {
            out = out.matmul(&out);
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues of a 2x2 complex matrix by the (numerically tame) closed form.
fn eig2(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> [Complex64; 2] {
    let mean = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * cc).sqrt();
    [mean - disc, mean + disc]
}

/// Complex Givens rotation zeroing the second component:
/// `[[conj(c), conj(s)], [-s, c]] [f, g]^T = [r, 0]^T` with real `c`.
fn givens(f: Complex64, g: Complex64) -> (Complex64, Complex64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (c(1.0, 0.0), Complex64::default());
    }
    let fn_ = f.norm();
    let denom = (fn_ * fn_ + gn * gn).sqrt();
    if fn_ == 0.0 {
        return (Complex64::default(), g / gn);
    }
    let cs = c(fn_ / denom, 0.0);
    let sn = (f.conj() / fn_) * g / denom;
    (cs, sn)
}

fn sort_complex(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}
