//! Small dense linear-algebra helpers shared by every module.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(r: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(r, cols)
}

pub fn real_diag(vals: &[f64]) -> CMatrix {
    let mut m = zeros(vals.len(), vals.len());
    for (i, v) in vals.iter().enumerate() {
        m[(i, i)] = c(*v);
    }
    m
}

/// Builds a complex matrix from real row-major rows.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let cols = if r == 0 { 0 } else { rows[0].len() };
    CMatrix::from_fn(r, cols, |i, j| c(rows[i][j]))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], zeros(0, 0));
    }
    let e = SymmetricEigen::new(hermitian_part(m));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[b].partial_cmp(&e.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let mut vecs = zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &e.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn eigvals_h(m: &CMatrix) -> Vec<f64> {
    eigh(m).0
}

/// V diag(vals) V†.
pub fn from_spectrum(vals: &[f64], vecs: &CMatrix) -> CMatrix {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (k, v) in vals.iter().enumerate() {
        let mut col = scaled.column_mut(k);
        col *= c(*v);
    }
    let _ = n;
    &scaled * vecs.adjoint()
}

/// Applies `f` to every eigenvalue of a Hermitian matrix.
pub fn herm_apply(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let fv: Vec<f64> = vals.iter().map(|&x| f(x)).collect();
    from_spectrum(&fv, &vecs)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

pub fn trace_re(m: &CMatrix) -> f64 {
    m.trace().re
}

/// Thin SVD (U, s, V†) with a reconstruction check. nalgebra's bidiagonal
/// SVD occasionally returns factors that do not reproduce rank-deficient
/// inputs; the adjoint is tried next, then the eigendecomposition of M†M.
pub fn svd<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> (DMatrix<T>, Vec<f64>, DMatrix<T>) {
    let scale = m.norm().max(1e-300);
    let ok = |u: &DMatrix<T>, s: &[f64], vt: &DMatrix<T>| {
        let mut us = u.clone();
        for (k, &sk) in s.iter().enumerate() {
            us.column_mut(k).scale_mut(sk);
        }
        (us * vt - m).norm() <= 1e-10 * scale
    };
    let direct = m.clone().svd(true, true);
    let (u, s, vt) = (direct.u.unwrap(), direct.singular_values.as_slice().to_vec(), direct.v_t.unwrap());
    if ok(&u, &s, &vt) {
        return (u, s, vt);
    }
    let adj = m.adjoint().svd(true, true);
    let (u2, s2, vt2) = (adj.v_t.unwrap().adjoint(), adj.singular_values.as_slice().to_vec(), adj.u.unwrap().adjoint());
    if ok(&u2, &s2, &vt2) {
        return (u2, s2, vt2);
    }
    let eig = SymmetricEigen::new(m.adjoint() * m);
    let k = m.nrows().min(m.ncols());
    let mut order: Vec<usize> = (0..m.ncols()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let v = DMatrix::from_fn(m.ncols(), k, |i, j| eig.eigenvectors[(i, order[j])].clone());
    let mv = m * &v;
    let s3: Vec<f64> = (0..k).map(|j| mv.column(j).norm()).collect();
    // left vectors by Gram-Schmidt so that null directions still give an orthonormal U
    let mut u3 = DMatrix::<T>::zeros(m.nrows(), k);
    for j in 0..k {
        let mut w = mv.column(j).into_owned();
        if s3[j] <= 1e-13 * scale {
            w = DVector::from_fn(m.nrows(), |i, _| if i == j { T::one() } else { T::zero() });
        }
        for _ in 0..2 {
            for p in 0..j {
                let up = u3.column(p).into_owned();
                let proj = up.dotc(&w);
                w -= up * proj;
            }
        }
        let n = w.norm();
        u3.set_column(j, &w.unscale(n));
    }
    (u3, s3, v.adjoint())
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = svd(m).1;
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn trace_norm(m: &CMatrix) -> f64 {
    singular_values(m).iter().sum()
}

pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn fro_norm(m: &CMatrix) -> f64 {
    m.norm()
}

/// ⟨A, B⟩ = Tr A† B.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec_col(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

pub fn transpose(m: &CMatrix) -> CMatrix {
    m.transpose()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Orthonormal basis of the kernel of `m`: right singular vectors whose
/// singular value is below `tol`.
pub fn null_space(m: &CMatrix, tol: f64) -> Vec<CVector> {
    let cols = m.ncols();
    if cols == 0 {
        return vec![];
    }
    let padded = if m.nrows() < cols {
        let mut p = zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, sv, vt) = svd(&padded);
    let mut out = Vec::new();
    for (k, s) in sv.iter().enumerate() {
        if *s < tol {
            out.push(vt.row(k).adjoint());
        }
    }
    // Rank-deficient tall systems give fewer singular values than columns.
    if vt.nrows() < cols {
        return null_space_via_gram(m, tol);
    }
    out
}

fn null_space_via_gram(m: &CMatrix, tol: f64) -> Vec<CVector> {
    let g = m.adjoint() * m;
    let (vals, vecs) = eigh(&g);
    vals.iter()
        .enumerate()
        .filter(|(_, v)| v.abs().sqrt() < tol)
        .map(|(k, _)| vecs.column(k).into_owned())
        .collect()
}

/// Orthonormalizes vectors (modified Gram-Schmidt, dropping near-dependent ones).
pub fn orthonormalize(vs: &[CVector], tol: f64) -> Vec<CVector> {
    let mut out: Vec<CVector> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let p = u.dotc(&w);
                w -= u * p;
            }
        }
        let n = w.norm();
        if n > tol {
            out.push(w / c(n));
        }
    }
    out
}

/// Pseudo-inverse of a Hermitian PSD matrix, eigenvalues below `rel_tol·λmax` treated as zero.
pub fn psd_pinv(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let lmax = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let thr = rel_tol * lmax;
    let inv: Vec<f64> = vals.iter().map(|&v| if v > thr { 1.0 / v } else { 0.0 }).collect();
    from_spectrum(&inv, &vecs)
}

pub fn random_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed isometry `rows × cols` (rows ≥ cols) via QR with phase fixing.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols);
    let g = random_gaussian_matrix(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..cols {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / c(d.norm()) } else { c(1.0) };
        let mut col = q.column_mut(k);
        col *= ph;
    }
    q
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    haar_isometry(d, d, rng)
}

pub fn pauli_x() -> CMatrix {
    from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> CMatrix {
    let mut m = zeros(2, 2);
    m[(0, 1)] = C64::new(0.0, -1.0);
    m[(1, 0)] = C64::new(0.0, 1.0);
    m
}

pub fn pauli_z() -> CMatrix {
    real_diag(&[1.0, -1.0])
}

/// Matrix exponential of a Hermitian matrix times a real scalar.
pub fn herm_exp(m: &CMatrix, t: f64) -> CMatrix {
    herm_apply(m, |x| (t * x).exp())
}

/// exp(K) for skew-Hermitian K, via the Hermitian generator iK.
pub fn skew_exp(k: &CMatrix) -> CMatrix {
    let h = k * C64::new(0.0, -1.0); // K = iH
    let (vals, vecs) = eigh(&h);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, v) in vals.iter().enumerate() {
        let ph = C64::new(0.0, *v).exp();
        let mut col = scaled.column_mut(j);
        col *= ph;
    }
    let _ = n;
    &scaled * vecs.adjoint()
}
