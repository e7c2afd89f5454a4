//! Dense complex linear-algebra helpers shared by the solvers.
//!
//! The Hermitian eigendecomposition here is the single spectral primitive of
//! the crate: largest eigenvalues, PSD square roots and the spectra fed to
//! the secular equation all come from [`hermitian_eigen`].

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Relative tolerance under which small negative eigenvalues are treated as
/// round-off and clamped to zero.
pub const PSD_CLAMP_TOL: f64 = 1e-10;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted in
/// non-increasing order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    pub fn principal_vector(&self) -> DVector<C64> {
        self.vectors.column(0).into_owned()
    }
}

/// Averages `m` with its conjugate transpose.
pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).map(|z| z * 0.5)
}

pub fn hermitian_eigen(m: &DMatrix<C64>) -> HermitianEigen {
    assert_eq!(m.nrows(), m.ncols(), "eigendecomposition of a non-square matrix");
    let n = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the decomposition deterministic for tied eigenvalues.
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}

/// Hermitian PSD square root. Eigenvalues within `PSD_CLAMP_TOL * λmax` of zero
/// are set to zero; anything more negative is an error.
pub fn psd_sqrt(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let eig = hermitian_eigen(m);
    let n = m.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let scale = eig.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut roots = Vec::with_capacity(n);
    for &v in eig.values.iter() {
        if v < -PSD_CLAMP_TOL * scale {
            return Err(Error::Numerical(format!(
                "matrix is not positive semidefinite (eigenvalue {v:.3e}, largest magnitude {scale:.3e})"
            )));
        }
        // Noise-level eigenvalues of either sign are zero; their square roots
        // would otherwise inflate to ~1e-8 relative.
        roots.push(if v <= PSD_CLAMP_TOL * scale { 0.0 } else { v.sqrt() });
    }
    let mut scaled = eig.vectors.clone();
    for (j, r) in roots.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*r);
    }
    Ok(hermitian_part(&(scaled * eig.vectors.adjoint())))
}

/// Column-major vectorization, `vec(X)`.
pub fn vectorize(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &DVector<C64>, rows: usize, cols: usize) -> DMatrix<C64> {
    assert_eq!(v.len(), rows * cols, "vector length does not match {rows}x{cols}");
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// `I_reps ⊗ block`.
pub fn kron_identity(reps: usize, block: &DMatrix<C64>) -> DMatrix<C64> {
    DMatrix::<C64>::identity(reps, reps).kronecker(block)
}

/// Full unitary factor of a Householder QR with column pivoting.
///
/// Returns `(q, r_diag)` where `q` is `n × n` unitary with `a P = q R`, and
/// `r_diag` holds `|R_jj|` in pivot order (non-increasing up to round-off).
/// The trailing `n - k` columns of `q` span the null space of `a†`.
pub fn householder_full_q(a: &DMatrix<C64>) -> (DMatrix<C64>, Vec<f64>) {
    let n = a.nrows();
    let k = a.ncols().min(n);
    let mut r = a.clone();
    let mut q = DMatrix::<C64>::identity(n, n);
    let mut r_diag = Vec::with_capacity(k);

    for j in 0..k {
        // Pivot on the largest remaining column norm; ties keep the lower index.
        let mut best = j;
        let mut best_norm = -1.0;
        for c in j..r.ncols() {
            let nrm = r.view((j, c), (n - j, 1)).norm_squared();
            if nrm > best_norm {
                best_norm = nrm;
                best = c;
            }
        }
        r.swap_columns(j, best);

        let x = r.view((j, j), (n - j, 1)).into_owned();
        let xnorm = x.norm();
        if xnorm == 0.0 {
            r_diag.push(0.0);
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.norm();
        if vnorm == 0.0 {
            r_diag.push(xnorm);
            continue;
        }
        v.unscale_mut(vnorm);

        // r[j.., j..] <- (I - 2 v v†) r[j.., j..]
        let cols = r.ncols() - j;
        let mut block = r.view_mut((j, j), (n - j, cols));
        let w = v.adjoint() * &block;
        block -= (&v * w).map(|z| z * 2.0);

        // q[:, j..] <- q[:, j..] (I - 2 v v†)
        let mut qb = q.view_mut((0, j), (n, n - j));
        let qv = &qb * &v;
        qb -= (qv * v.adjoint()).map(|z| z * 2.0);

        r_diag.push(r[(j, j)].norm());
    }
    (q, r_diag)
}

/// Solves `x` from `m x = rhs` for a Hermitian positive-definite `m`.
pub fn hpd_solve(m: &DMatrix<C64>, rhs: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let not_pd = || {
        let eig = hermitian_eigen(m);
        let hi = eig.values[0];
        let lo = eig.values[eig.values.len() - 1];
        Error::Numerical(format!(
            "matrix is not positive definite (eigenvalue range [{lo:.3e}, {hi:.3e}], condition number {:.3e})",
            if lo > 0.0 { hi / lo } else { f64::INFINITY }
        ))
    };
    let chol = hermitian_part(m).cholesky().ok_or_else(not_pd)?;
    // The complex factorization takes complex square roots of the pivots, so
    // an indefinite input shows up as a non-real or non-positive diagonal.
    let l = chol.l_dirty();
    let pivots_ok = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re
    });
    if !pivots_ok {
        return Err(not_pd());
    }
    Ok(chol.solve(rhs))
}

/// Numerical rank at threshold `rel_tol · σ_max`.
pub fn numerical_rank(m: &DMatrix<C64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}
