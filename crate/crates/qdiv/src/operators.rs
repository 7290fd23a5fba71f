//! Hermitian and PSD operators, spectral data, superoperators, perspectives,
//! operator connections and monotone metric forms.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdiv::{DivergenceFunction, ExtendedReal};
use crate::linalg::{self, c, CMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub hermiticity_tol: f64,
    pub psd_tol: f64,
    pub clustering_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { hermiticity_tol: 1e-9, psd_tol: 1e-10, clustering_gap: 1e-8 }
    }
}

/// Relative tolerance for support containment tests.
pub const SUPPORT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tol(m, Tolerances::default().hermiticity_tol)
    }

    /// Validates ‖A − A†‖∞ ≤ tol·max(1, ‖A‖∞) and stores (A + A†)/2.
    pub fn with_tol(m: CMatrix, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        let asym = linalg::max_abs(&(&m - m.adjoint()));
        if asym > tol * linalg::max_abs(&m).max(1.0) {
            return Err(Error::NotHermitian(asym));
        }
        Ok(HermitianOperator { mat: linalg::hermitian_part(&m) })
    }

    pub fn diag(vals: &[f64]) -> Self {
        HermitianOperator { mat: linalg::real_diag(vals) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }
}

/// Distinct eigenvalues (descending) with their spectral projectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub distinct_eigenvalues: Vec<f64>,
    pub projectors: Vec<CMatrix>,
    pub clustering_gap: f64,
    /// Eigenvector column indices belonging to each cluster.
    pub groups: Vec<Vec<usize>>,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.projectors.first().map(|p| p.nrows()).unwrap_or(0);
        let mut m = linalg::zeros(d, d);
        for (a, p) in self.distinct_eigenvalues.iter().zip(&self.projectors) {
            m += p * c(*a);
        }
        m
    }
}

/// Groups sorted (descending) eigenvalues whose gap is below `gap·λmax`.
/// Exact zeros are never merged with positive values.
fn cluster(vals: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let lmax = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let thr = gap * lmax;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match groups.last_mut() {
            Some(g) => {
                let prev = vals[*g.last().unwrap()];
                let zero_boundary = (prev == 0.0) != (v == 0.0);
                if prev - v <= thr && !zero_boundary {
                    g.push(i);
                } else {
                    groups.push(vec![i]);
                }
            }
            None => groups.push(vec![i]),
        }
    }
    groups
}

fn decomposition_from(vals: &[f64], vecs: &CMatrix, gap: f64) -> SpectralDecomposition {
    let groups = cluster(vals, gap);
    let mut distinct = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for g in &groups {
        let mean = g.iter().map(|&i| vals[i]).sum::<f64>() / g.len() as f64;
        distinct.push(mean);
        let cols = vecs.select_columns(g.iter());
        projectors.push(&cols * cols.adjoint());
    }
    SpectralDecomposition { distinct_eigenvalues: distinct, projectors, clustering_gap: gap, groups }
}

/// Spectral decomposition with eigenvalue clustering.
pub fn spectral_decompose(a: &HermitianOperator, clustering_gap: f64) -> Result<SpectralDecomposition> {
    if a.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("eigen-solver input".into()));
    }
    let (vals, vecs) = linalg::eigh(a.matrix());
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalInstability("eigen-solver returned non-finite values".into()));
    }
    Ok(decomposition_from(&vals, &vecs, clustering_gap))
}

/// A validated positive semidefinite operator with cached spectral data.
#[derive(Clone)]
pub struct PsdOperator {
    herm: HermitianOperator,
    /// Eigenvalues after clipping, descending.
    evals: Vec<f64>,
    evecs: CMatrix,
    tol: Tolerances,
    spectral: OnceLock<SpectralDecomposition>,
}

impl fmt::Debug for PsdOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsdOperator").field("eigenvalues", &self.evals).finish()
    }
}

impl PsdOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerances(m, Tolerances::default())
    }

    /// Eigenvalues in [−psd_tol·λmax, psd_tol·λmax] are set to 0; anything
    /// more negative is rejected.
    pub fn with_tolerances(m: CMatrix, tol: Tolerances) -> Result<Self> {
        let herm = HermitianOperator::with_tol(m, tol.hermiticity_tol)?;
        Self::from_hermitian(herm, tol)
    }

    pub fn from_hermitian(herm: HermitianOperator, tol: Tolerances) -> Result<Self> {
        let (mut vals, vecs) = linalg::eigh(herm.matrix());
        let lmax = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let thr = tol.psd_tol * lmax;
        if let Some(&min) = vals.last() {
            if min < -thr {
                return Err(Error::NotPsd { min, max: lmax });
            }
        }
        for v in vals.iter_mut() {
            if v.abs() <= thr {
                *v = 0.0;
            }
        }
        Ok(PsdOperator { herm, evals: vals, evecs: vecs, tol, spectral: OnceLock::new() })
    }

    pub fn diag(vals: &[f64]) -> Result<Self> {
        Self::new(linalg::real_diag(vals))
    }

    /// Identity scaled by `t`.
    pub fn scaled_identity(d: usize, t: f64) -> Result<Self> {
        Self::new(linalg::identity(d) * c(t))
    }

    pub fn matrix(&self) -> &CMatrix {
        self.herm.matrix()
    }

    pub fn hermitian(&self) -> &HermitianOperator {
        &self.herm
    }

    pub fn dim(&self) -> usize {
        self.herm.dim()
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn trace(&self) -> f64 {
        self.evals.iter().sum()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.evals
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.evecs
    }

    pub fn lambda_max(&self) -> f64 {
        self.evals.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self) -> usize {
        self.evals.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn is_invertible(&self) -> bool {
        self.rank() == self.dim()
    }

    /// Positive eigenvalues and the matching eigenvector columns.
    pub fn support_eigen(&self) -> (Vec<f64>, CMatrix) {
        let r = self.rank();
        (self.evals[..r].to_vec(), self.evecs.columns(0, r).into_owned())
    }

    /// Orthonormal basis of the kernel.
    pub fn kernel_basis(&self) -> CMatrix {
        let r = self.rank();
        self.evecs.columns(r, self.dim() - r).into_owned()
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        self.spectral
            .get_or_init(|| decomposition_from(&self.evals, &self.evecs, self.tol.clustering_gap))
    }

    pub fn support_projection(&self) -> CMatrix {
        let (_, u) = self.support_eigen();
        &u * u.adjoint()
    }

    /// Σ_{a>0} f(a) P_a.
    pub fn func(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let vals: Vec<f64> = self.evals.iter().map(|&v| if v > 0.0 { f(v) } else { 0.0 }).collect();
        linalg::from_spectrum(&vals, &self.evecs)
    }

    /// ϱ^t on the support; negative t gives generalized inverse powers.
    pub fn power(&self, t: f64) -> CMatrix {
        self.func(|x| x.powf(t))
    }

    /// Natural logarithm on the support.
    pub fn log_support(&self) -> CMatrix {
        self.func(f64::ln)
    }

    /// Whether supp(self) ⊆ supp(other).
    pub fn support_le(&self, other: &PsdOperator) -> bool {
        let (_, u) = self.support_eigen();
        let n = other.kernel_basis();
        if u.ncols() == 0 || n.ncols() == 0 {
            return true;
        }
        (n.adjoint() * &u).norm() <= SUPPORT_TOL * (u.ncols() as f64).sqrt()
    }

    pub fn same_support(&self, other: &PsdOperator) -> bool {
        self.support_le(other) && other.support_le(self)
    }

    /// self + t·other as a new PSD operator.
    pub fn add_scaled(&self, other: &CMatrix, t: f64) -> Result<PsdOperator> {
        PsdOperator::with_tolerances(self.matrix() + other * c(t), self.tol)
    }

    /// Scalar multiple.
    pub fn scale(&self, t: f64) -> Result<PsdOperator> {
        PsdOperator::with_tolerances(self.matrix() * c(t), self.tol)
    }

    /// self / Tr self.
    pub fn normalized(&self) -> Result<PsdOperator> {
        let t = self.trace();
        if t <= 0.0 {
            return Err(Error::InvalidInput("cannot normalize the zero operator".into()));
        }
        self.scale(1.0 / t)
    }
}

/// Σ_{a>0} f(a) P_a, failing on non-finite values.
pub fn func_calculus(f: impl Fn(f64) -> f64, a: &PsdOperator) -> Result<HermitianOperator> {
    for &v in a.eigenvalues().iter().filter(|&&v| v > 0.0) {
        if !f(v).is_finite() {
            return Err(Error::NonFinite(format!("function value at eigenvalue {v}")));
        }
    }
    Ok(HermitianOperator { mat: linalg::hermitian_part(&a.func(f)) })
}

pub fn support_projection(a: &PsdOperator) -> HermitianOperator {
    HermitianOperator { mat: a.support_projection() }
}

/// A linear map on matrices, stored as a matrix acting on column-stacked vectors.
#[derive(Clone, Debug)]
pub struct Superoperator {
    pub dim_in: usize,
    pub dim_out: usize,
    pub matrix: CMatrix,
    /// Eigenvalue / eigenprojector pairs when known in closed form.
    pub eigen: Option<Vec<(f64, CMatrix)>>,
}

impl Superoperator {
    pub fn from_map(dim_in: usize, dim_out: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let mut m = linalg::zeros(dim_out * dim_out, dim_in * dim_in);
        for j in 0..dim_in {
            for i in 0..dim_in {
                let mut e = linalg::zeros(dim_in, dim_in);
                e[(i, j)] = c(1.0);
                let col = linalg::vec_col(&f(&e));
                m.set_column(i + j * dim_in, &col);
            }
        }
        Superoperator { dim_in, dim_out, matrix: m, eigen: None }
    }

    /// L_A: X ↦ AX.
    pub fn left(a: &CMatrix) -> Self {
        let d = a.nrows();
        Superoperator { dim_in: d, dim_out: d, matrix: linalg::kron(&linalg::identity(d), a), eigen: None }
    }

    /// R_B: X ↦ XB.
    pub fn right(b: &CMatrix) -> Self {
        let d = b.nrows();
        Superoperator { dim_in: d, dim_out: d, matrix: linalg::kron(&b.transpose(), &linalg::identity(d)), eigen: None }
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        linalg::unvec(&(&self.matrix * linalg::vec_col(x)), self.dim_out, self.dim_out)
    }

    pub fn compose(&self, inner: &Superoperator) -> Superoperator {
        Superoperator {
            dim_in: inner.dim_in,
            dim_out: self.dim_out,
            matrix: &self.matrix * &inner.matrix,
            eigen: None,
        }
    }
}

/// L_ϱ R_{σ⁻¹} with its joint spectral table.
#[derive(Clone, Debug)]
pub struct RelativeModular {
    /// Distinct eigenvalues of ϱ (descending, zero included when present).
    pub rho_values: Vec<f64>,
    pub sigma_values: Vec<f64>,
    /// table[a][b] = Tr P_a Q_b.
    pub table: Vec<Vec<f64>>,
    pub superop: Superoperator,
}

impl RelativeModular {
    /// Distinct values a/b over a ∈ Sp(ϱ), b ∈ Sp(σ), b > 0.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut r: Vec<f64> = Vec::new();
        for &a in &self.rho_values {
            for &b in &self.sigma_values {
                if b > 0.0 {
                    r.push(a / b);
                }
            }
        }
        dedup_sorted(r, 1e-8)
    }
}

/// Sorts descending and merges values within a relative gap.
pub fn dedup_sorted(mut r: Vec<f64>, rel: f64) -> Vec<f64> {
    r.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let scale = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut out: Vec<f64> = Vec::new();
    for v in r {
        if out.last().is_none_or(|&p: &f64| p - v > rel * scale) {
            out.push(v);
        }
    }
    out
}

pub fn relative_modular(rho: &PsdOperator, sigma: &PsdOperator) -> Result<RelativeModular> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let sr = rho.spectral();
    let ss = sigma.spectral();
    let table: Vec<Vec<f64>> = sr
        .projectors
        .iter()
        .map(|p| ss.projectors.iter().map(|q| linalg::trace_re(&(p * q)).max(0.0)).collect())
        .collect();
    let sig_inv = sigma.power(-1.0);
    let matrix = linalg::kron(&sig_inv.transpose(), rho.matrix());
    let mut eigen = Vec::new();
    for (a, p) in sr.distinct_eigenvalues.iter().zip(&sr.projectors) {
        for (b, q) in ss.distinct_eigenvalues.iter().zip(&ss.projectors) {
            let ratio = if *b > 0.0 { a / b } else { 0.0 };
            eigen.push((ratio, linalg::kron(&q.transpose(), p)));
        }
    }
    let d = rho.dim();
    Ok(RelativeModular {
        rho_values: sr.distinct_eigenvalues.clone(),
        sigma_values: ss.distinct_eigenvalues.clone(),
        table,
        superop: Superoperator { dim_in: d, dim_out: d, matrix, eigen: Some(eigen) },
    })
}

/// P_f(x, y) = y f(x/y), with y f(0⁺) at x = 0, x f′(∞) at y = 0 and 0·∞ = 0.
pub fn scalar_perspective(f: &DivergenceFunction, x: f64, y: f64) -> ExtendedReal {
    if x > 0.0 && y > 0.0 {
        ExtendedReal::Finite(y * f.eval(x / y))
    } else if x == 0.0 && y > 0.0 {
        f.f_at_0().scale(y)
    } else if y == 0.0 && x > 0.0 {
        f.fprime_at_inf().scale(x)
    } else {
        ExtendedReal::ZERO
    }
}

/// outer^{1/2} g(outer^{-1/2} inner outer^{-1/2}) outer^{1/2} on supp(outer),
/// assuming supp(inner) ⊆ supp(outer). The rank deficit of the sandwiched
/// operator is set to exact zeros and mapped to `g0`.
fn supported_sandwich(
    g: &dyn Fn(f64) -> f64,
    g0: ExtendedReal,
    inner: &PsdOperator,
    outer: &PsdOperator,
) -> Result<CMatrix> {
    let (mu, w) = outer.support_eigen();
    let r = mu.len();
    let d = outer.dim();
    if r == 0 {
        return Ok(linalg::zeros(d, d));
    }
    let inv_sqrt = linalg::real_diag(&mu.iter().map(|m| m.powf(-0.5)).collect::<Vec<_>>());
    let sqrt = linalg::real_diag(&mu.iter().map(|m| m.sqrt()).collect::<Vec<_>>());
    let x = &inv_sqrt * w.adjoint() * inner.matrix() * &w * &inv_sqrt;
    let (mut xv, xu) = linalg::eigh(&x);
    let zeros = r.saturating_sub(inner.rank());
    for v in xv.iter_mut().rev().take(zeros) {
        *v = 0.0;
    }
    let mut gv = Vec::with_capacity(r);
    for &v in &xv {
        if v > 0.0 {
            gv.push(g(v));
        } else {
            match g0 {
                ExtendedReal::Finite(z) => gv.push(z),
                ExtendedReal::PosInf => {
                    return Err(Error::PerspectiveUndefined("endpoint value is infinite on a kernel direction".into()))
                }
            }
        }
    }
    if gv.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("function value in perspective".into()));
    }
    let gx = linalg::from_spectrum(&gv, &xu);
    let core = &sqrt * gx * &sqrt;
    Ok(linalg::hermitian_part(&(&w * core * w.adjoint())))
}

/// Operator perspective P_f(A, B) = B^{1/2} f(B^{-1/2} A B^{-1/2}) B^{1/2},
/// extended to singular arguments by support case analysis.
pub fn operator_perspective(f: &DivergenceFunction, a: &PsdOperator, b: &PsdOperator) -> Result<CMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: b.dim(), found: a.dim() });
    }
    let a_in_b = a.support_le(b);
    let b_in_a = b.support_le(a);
    let f0 = f.f_at_0();
    let fi = f.fprime_at_inf();
    if a_in_b && (f0.is_finite() || b_in_a) {
        return supported_sandwich(&|x| f.eval(x), f0, a, b);
    }
    if b_in_a && fi.is_finite() {
        let ft = f.transpose();
        return supported_sandwich(&|x| ft.eval(x), fi, b, a);
    }
    if let (Some(f0), Some(fi)) = (f0.finite(), fi.finite()) {
        let h = ConnectionFunction::from_divergence_endpoints(f, f0, fi);
        let conn = operator_connection(&h, b, a)?;
        return Ok(b.matrix() * c(f0) + a.matrix() * c(fi) - conn);
    }
    let mut why = Vec::new();
    if !a_in_b {
        why.push("supp A ⊄ supp B");
    }
    if !b_in_a {
        why.push("supp B ⊄ supp A");
    }
    if f0.is_infinite() {
        why.push("f(0+) = ∞");
    }
    if fi.is_infinite() {
        why.push("f'(∞) = ∞");
    }
    Err(Error::PerspectiveUndefined(why.join(", ")))
}

/// Kubo–Ando atoms: h(x) = α + βx + Σ w·x(1+s)/(x+s).
#[derive(Clone, Debug, PartialEq)]
pub struct KuboAndoAtoms {
    pub alpha: f64,
    pub beta: f64,
    pub atoms: Vec<(f64, f64)>,
}

/// A nonnegative operator monotone function with finite h(0⁺) and h′(∞).
#[derive(Clone)]
pub struct ConnectionFunction {
    pub name: String,
    h: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub h0: f64,
    pub slope_inf: f64,
    pub atoms: Option<KuboAndoAtoms>,
}

impl fmt::Debug for ConnectionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConnectionFunction")
            .field("name", &self.name)
            .field("h0", &self.h0)
            .field("slope_inf", &self.slope_inf)
            .field("atoms", &self.atoms)
            .finish()
    }
}

impl ConnectionFunction {
    pub fn new(
        name: &str,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        h0: f64,
        slope_inf: f64,
    ) -> Result<Self> {
        if !h0.is_finite() || !slope_inf.is_finite() {
            return Err(Error::InvalidInput(format!("connection '{name}' needs finite h(0+) and h'(∞)")));
        }
        Ok(ConnectionFunction { name: name.into(), h: Arc::new(h), h0, slope_inf, atoms: None })
    }

    /// h(x) = α + βx + Σ w·x(1+s)/(x+s).
    pub fn from_atoms(alpha: f64, beta: f64, atoms: Vec<(f64, f64)>) -> Self {
        let at = atoms.clone();
        let h = move |x: f64| alpha + beta * x + at.iter().map(|(s, w)| w * x * (1.0 + s) / (x + s)).sum::<f64>();
        let slope = beta;
        ConnectionFunction {
            name: "atoms".into(),
            h: Arc::new(h),
            h0: alpha,
            slope_inf: slope,
            atoms: Some(KuboAndoAtoms { alpha, beta, atoms }),
        }
    }

    /// Weighted geometric mean x^α, α ∈ [0, 1].
    pub fn geometric(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidInput(format!("geometric mean weight must lie in [0,1], got {alpha}")));
        }
        let h0 = if alpha == 0.0 { 1.0 } else { 0.0 };
        let slope = if alpha == 1.0 { 1.0 } else { 0.0 };
        let mut cf = ConnectionFunction::new(&format!("geometric:{alpha}"), move |x| x.powf(alpha), h0, slope)?;
        if alpha == 0.0 {
            cf.atoms = Some(KuboAndoAtoms { alpha: 1.0, beta: 0.0, atoms: vec![] });
        } else if alpha == 1.0 {
            cf.atoms = Some(KuboAndoAtoms { alpha: 0.0, beta: 1.0, atoms: vec![] });
        }
        Ok(cf)
    }

    /// h_s(x) = x(1+s)/(x+s).
    pub fn parallel_atom(s: f64) -> Self {
        let mut cf = Self::from_atoms(0.0, 0.0, vec![(s, 1.0)]);
        cf.name = format!("h_s:{s}");
        cf
    }

    /// h_f(x) = f(0) + f′(∞)x − f(x) for f with both endpoints finite.
    pub fn from_divergence_endpoints(f: &DivergenceFunction, f0: f64, fi: f64) -> Self {
        if let Some(r) = f.representation() {
            if r.b == 0.0 {
                let atoms = r.atoms.iter().map(|(s, w)| (*s, w / (1.0 + s))).collect();
                let mut cf = Self::from_atoms(0.0, 0.0, atoms);
                cf.name = format!("h[{f}]");
                return cf;
            }
        }
        let g = f.clone();
        ConnectionFunction {
            name: format!("h[{f}]"),
            h: Arc::new(move |x| f0 + fi * x - g.eval(x)),
            h0: 0.0,
            slope_inf: 0.0,
            atoms: None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.h)(x)
    }

    /// Transpose h̃(x) = x h(1/x); h̃(0⁺) = h′(∞).
    fn transposed_eval(&self, x: f64) -> f64 {
        x * (self.h)(1.0 / x)
    }
}

/// Anderson–Duffin parallel sum A : B = A − A(A+B)⁺A.
pub fn parallel_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let s = a + b;
    let pinv = linalg::psd_pinv(&s, 1e-12);
    linalg::hermitian_part(&(a - a * pinv * a))
}

/// A τ_h B = A^{1/2} h(A^{-1/2} B A^{-1/2}) A^{1/2}, extended to PSD arguments.
pub fn operator_connection(h: &ConnectionFunction, a: &PsdOperator, b: &PsdOperator) -> Result<CMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if b.support_le(a) {
        return supported_sandwich(&|x| h.eval(x), ExtendedReal::Finite(h.h0), b, a);
    }
    if a.support_le(b) {
        return supported_sandwich(&|x| h.transposed_eval(x), ExtendedReal::Finite(h.slope_inf), a, b);
    }
    if let Some(k) = &h.atoms {
        let mut out = a.matrix() * c(k.alpha) + b.matrix() * c(k.beta);
        for (s, w) in &k.atoms {
            let ps = parallel_sum(&(a.matrix() * c(*s)), b.matrix());
            out += ps * c(w * (1.0 + s) / s);
        }
        return Ok(out);
    }
    connection_by_regularization(h, a, b)
}

/// Limit along A+εP, B+εP on the joint support P, checked at two ε values.
fn connection_by_regularization(h: &ConnectionFunction, a: &PsdOperator, b: &PsdOperator) -> Result<CMatrix> {
    let joint = a.add_scaled(b.matrix(), 1.0)?;
    let p = joint.support_projection();
    let scale = a.lambda_max().max(b.lambda_max());
    let eval_at = |eps: f64| -> Result<CMatrix> {
        let ae = a.add_scaled(&p, eps * scale)?;
        let be = b.add_scaled(&p, eps * scale)?;
        supported_sandwich(&|x| h.eval(x), ExtendedReal::Finite(h.h0), &be, &ae)
    };
    let m1 = eval_at(1e-7)?;
    let m2 = eval_at(1e-9)?;
    let diff = linalg::fro_norm(&(&m1 - &m2));
    let size = linalg::fro_norm(&m2).max(1e-300);
    if diff > 1e-5 * size.max(scale * 1e-12) {
        return Err(Error::NumericalInstability(format!(
            "connection '{}' regularization did not settle (relative change {:.2e})",
            h.name,
            diff / size
        )));
    }
    Ok(m2)
}

/// Weighted geometric mean A #_α B.
pub fn geometric_mean(alpha: f64, a: &PsdOperator, b: &PsdOperator) -> Result<CMatrix> {
    operator_connection(&ConnectionFunction::geometric(alpha)?, a, b)
}

/// ⟨X, Ω_σ^κ(X)⟩ = Σ κ(λ_i/λ_j) λ_j⁻¹ |⟨u_i, X u_j⟩|² for invertible σ.
pub fn monotone_metric_form(kappa: &dyn Fn(f64) -> f64, sigma: &PsdOperator, x: &HermitianOperator) -> Result<f64> {
    if !sigma.is_invertible() {
        return Err(Error::NotInvertible("monotone metric needs invertible σ".into()));
    }
    if x.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), found: x.dim() });
    }
    let u = sigma.eigenvectors();
    let xt = u.adjoint() * x.matrix() * u;
    let l = sigma.eigenvalues();
    let mut total = 0.0;
    for i in 0..l.len() {
        for j in 0..l.len() {
            total += kappa(l[i] / l[j]) / l[j] * xt[(i, j)].norm_sqr();
        }
    }
    Ok(total)
}

/// Metric form restricted to the support of σ (for non-invertible outputs).
pub fn monotone_metric_form_on_support(
    kappa: &dyn Fn(f64) -> f64,
    sigma: &PsdOperator,
    x: &CMatrix,
) -> f64 {
    let (l, u) = sigma.support_eigen();
    let xt = u.adjoint() * x * &u;
    let mut total = 0.0;
    for i in 0..l.len() {
        for j in 0..l.len() {
            total += kappa(l[i] / l[j]) / l[j] * xt[(i, j)].norm_sqr();
        }
    }
    total
}

/// Bogoliubov–Kubo–Mori kernel log x/(x−1), equal to 1 at x = 1.
pub fn bkm_kernel(x: f64) -> f64 {
    let t = x - 1.0;
    if t.abs() < 1e-6 {
        1.0 - t / 2.0 + t * t / 3.0
    } else {
        x.ln() / t
    }
}

/// x^{-1/2}.
pub fn inv_sqrt_kernel(x: f64) -> f64 {
    x.powf(-0.5)
}
